//! Sampling, calibration and verification harness with CSV/JSON evidence.

pub mod calibration;
pub mod quality;
pub mod report;
pub mod sampling;
pub mod suites;

pub use calibration::{DistanceKind, calibrate_theorem1, calibrate_with, CalibrationConfig, CalibrationReport, CalibrationSummary};
pub use quality::{quasi_geodesic_quality, GeodesicQuality};
pub use report::{CsvTable, CSV_SCHEMA};
pub use sampling::{sample_pairs, RegimeKind, SampleRegime};
pub use suites::{verify_suite, Suite, SuiteConfig, SuiteReport};
