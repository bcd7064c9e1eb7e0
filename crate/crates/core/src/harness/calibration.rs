//! Empirical constants of the two-sided estimate `log(1+cA) ≤ d ≤ log(1+CA)`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{bergman_distance_ball, bergman_length_along_geodesic, kobayashi_ball};
use crate::bounds::{
    checked_frame, kobayashi_lower, kobayashi_upper_path, Backend, IntervalValue, DEFAULT_ESTIMATOR_C,
};
use crate::cvec::PointC;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::estimators::{pair_from_frames, PairQuantities};
use crate::harness::report::{num, CsvTable};
use crate::harness::sampling::{sample_pair_set, RegimeKind, SampleRegime};

/// XORed into regime seeds to draw the held-out sample.
/// Share of held-out pairs that must fall inside the calibrated sandwich.
pub const HOLDOUT_TARGET: f64 = 0.999;

pub const HOLDOUT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceKind {
    Kobayashi,
    /// Ball only: the Bergman length of the ball geodesic, integrated numerically.
    Bergman,
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceKind::Kobayashi => "kobayashi",
            DistanceKind::Bergman => "bergman",
        })
    }
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kobayashi" | "k" => Ok(DistanceKind::Kobayashi),
            "bergman" | "b" => Ok(DistanceKind::Bergman),
            _ => Err(Error::Config(format!("unknown distance `{s}` (kobayashi | bergman)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub backend: Backend,
    pub distance: DistanceKind,
    pub holdout_count: usize,
    /// Relative change allowed under sample doubling.
    pub stability_tol: f64,
    pub path_segments: usize,
    pub bergman_rtol: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            backend: Backend::ExactBall,
            distance: DistanceKind::Kobayashi,
            holdout_count: 1000,
            stability_tol: 0.10,
            path_segments: 16,
            bergman_rtol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub regime: RegimeKind,
    pub pair_id: usize,
    pub z: PointC,
    pub w: PointC,
    pub quantities: PairQuantities,
    pub k_lower: f64,
    pub k_upper: f64,
    pub ratio_low: f64,
    pub ratio_high: f64,
    /// Part of the base sample (as opposed to the doubling extension).
    pub in_base: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeConstants {
    pub regime: RegimeKind,
    pub pairs: usize,
    pub c_emp: f64,
    pub big_c_emp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub domain: String,
    pub backend: String,
    pub distance: String,
    pub pairs: usize,
    pub excluded_close: usize,
    pub skipped: usize,
    pub skip_log: Vec<String>,
    pub c_emp: f64,
    pub big_c_emp: f64,
    pub c_emp_doubled: f64,
    pub big_c_emp_doubled: f64,
    pub c_change: f64,
    pub big_c_change: f64,
    pub stable: bool,
    pub per_regime: Vec<RegimeConstants>,
    pub holdout_pairs: usize,
    pub holdout_inside: usize,
    pub holdout_fraction: f64,
    /// `max(½|log(δz/δw)| − k)`: the additive constant of the boundary-distance
    /// lower bound.
    pub boundary_ratio_constant: f64,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub rows: Vec<CalibrationRow>,
    pub summary: CalibrationSummary,
}

pub(crate) struct Evaluated {
    pub rows: Vec<CalibrationRow>,
    pub excluded_close: usize,
    pub skipped: Vec<String>,
}

/// Distance bracket for one pair under the configured backend and distance.
pub fn distance_bracket(domain: &DomainSpec, z: &PointC, w: &PointC, config: &CalibrationConfig) -> Result<IntervalValue> {
    match (config.backend, config.distance) {
        (Backend::ExactBall, DistanceKind::Kobayashi) => {
            let k = kobayashi_ball(z, w)?;
            IntervalValue::new(k, k)
        }
        (Backend::ExactBall, DistanceKind::Bergman) => {
            let b = bergman_length_along_geodesic(z, w, config.bergman_rtol)?;
            let closed = bergman_distance_ball(z, w)?;
            if (b - closed).abs() > 10.0 * config.bergman_rtol * closed.max(1e-300) {
                return Err(Error::Resolution(format!("integrated Bergman length {b} vs closed form {closed}")));
            }
            IntervalValue::new(b, b)
        }
        (Backend::Interval, DistanceKind::Kobayashi) => {
            let lo = kobayashi_lower(domain, z, w, DEFAULT_ESTIMATOR_C)?.certified;
            let hi = kobayashi_upper_path(domain, z, w, config.path_segments, config.backend)?.value;
            IntervalValue::new(lo, hi)
        }
        (Backend::Interval, DistanceKind::Bergman) => Err(Error::Capability {
            backend: config.backend.id().into(),
            what: "Bergman distances (ball only)".into(),
        }),
    }
}

pub(crate) fn check_capability(domain: &DomainSpec, config: &CalibrationConfig) -> Result<()> {
    config.backend.require(domain)?;
    if config.distance == DistanceKind::Bergman && config.backend != Backend::ExactBall {
        return Err(Error::Capability {
            backend: config.backend.id().into(),
            what: "Bergman distances (ball only)".into(),
        });
    }
    Ok(())
}

fn evaluate_pair(domain: &DomainSpec, z: &PointC, w: &PointC, config: &CalibrationConfig) -> Result<(PairQuantities, IntervalValue)> {
    let fz = checked_frame(domain, z)?;
    let fw = checked_frame(domain, w)?;
    let q = pair_from_frames(&fz, &fw);
    Ok((q, distance_bracket(domain, z, w, config)?))
}

pub(crate) fn evaluate(domain: &DomainSpec, regimes: &[SampleRegime], factor: usize, config: &CalibrationConfig) -> Result<Evaluated> {
    let mut out = Evaluated {
        rows: Vec::new(),
        excluded_close: 0,
        skipped: Vec::new(),
    };
    for regime in regimes {
        let set = sample_pair_set(domain, &regime.with_count(regime.count * factor))?;
        out.excluded_close += set.excluded_close;
        let results: Vec<Result<(PairQuantities, IntervalValue)>> = set
            .pairs
            .par_iter()
            .map(|(z, w)| evaluate_pair(domain, z, w, config))
            .collect();
        for (id, (res, (z, w))) in results.into_iter().zip(set.pairs).enumerate() {
            match res {
                Ok((q, k)) => out.rows.push(CalibrationRow {
                    regime: regime.kind,
                    pair_id: id,
                    ratio_low: k.lower.exp_m1() / q.a,
                    ratio_high: k.upper.exp_m1() / q.a,
                    z,
                    w,
                    quantities: q,
                    k_lower: k.lower,
                    k_upper: k.upper,
                    in_base: id < regime.count,
                }),
                Err(e @ (Error::Capability { .. } | Error::Config(_))) => return Err(e),
                Err(e) => out.skipped.push(format!("{} #{id}: {e}", regime.kind)),
            }
        }
    }
    Ok(out)
}

fn extremes<'a>(rows: impl Iterator<Item = &'a CalibrationRow>) -> (f64, f64) {
    rows.fold((f64::INFINITY, 0.0f64), |(c, big), r| (c.min(r.ratio_low), big.max(r.ratio_high)))
}

fn rel_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn calibrate_theorem1(domain: &DomainSpec, backend: Backend, regimes: &[SampleRegime]) -> Result<CalibrationReport> {
    calibrate_with(
        domain,
        regimes,
        &CalibrationConfig {
            backend,
            ..CalibrationConfig::default()
        },
    )
}

pub fn calibrate_with(domain: &DomainSpec, regimes: &[SampleRegime], config: &CalibrationConfig) -> Result<CalibrationReport> {
    if regimes.is_empty() {
        return Err(Error::Config("at least one regime is required".into()));
    }
    for r in regimes {
        r.validate()?;
    }
    check_capability(domain, config)?;
    let ev = evaluate(domain, regimes, 2, config)?;
    let base = ev.rows.iter().filter(|r| r.in_base);
    let (c_emp, big_c_emp) = extremes(base);
    let (c_d, big_c_d) = extremes(ev.rows.iter());
    if ev.rows.is_empty() || !(c_emp > 0.0) {
        return Err(Error::Sampling("no usable calibration pairs".into()));
    }
    let per_regime = regimes
        .iter()
        .map(|r| {
            let rows: Vec<&CalibrationRow> = ev.rows.iter().filter(|x| x.in_base && x.regime == r.kind).collect();
            let (c, big) = extremes(rows.iter().copied());
            RegimeConstants {
                regime: r.kind,
                pairs: rows.len(),
                c_emp: c,
                big_c_emp: big,
            }
        })
        .collect();

    let per = config.holdout_count.div_ceil(regimes.len()).max(1);
    let hold: Vec<SampleRegime> = regimes
        .iter()
        .map(|r| r.with_seed(r.seed ^ HOLDOUT_SALT).with_count(per))
        .collect();
    let mut hold_ev = Evaluated {
        rows: Vec::new(),
        excluded_close: 0,
        skipped: Vec::new(),
    };
    for r in &hold {
        let e = evaluate(domain, std::slice::from_ref(r), 1, config)?;
        hold_ev.rows.extend(e.rows);
        hold_ev.skipped.extend(e.skipped);
    }
    let inside = hold_ev
        .rows
        .iter()
        .filter(|r| {
            let lo = (c_emp * r.quantities.a).ln_1p();
            let hi = (big_c_emp * r.quantities.a).ln_1p();
            let slack = 1e-12;
            match config.backend {
                Backend::ExactBall => lo <= r.k_lower * (1.0 + slack) && r.k_upper <= hi * (1.0 + slack),
                Backend::Interval => lo <= r.k_upper * (1.0 + slack) && r.k_lower <= hi * (1.0 + slack),
            }
        })
        .count();
    let boundary_ratio_constant = ev
        .rows
        .iter()
        .filter(|r| r.in_base)
        .map(|r| 0.5 * (r.quantities.delta_z / r.quantities.delta_w).ln().abs() - r.k_lower)
        .fold(f64::NEG_INFINITY, f64::max);
    let c_change = rel_change(c_emp, c_d);
    let big_c_change = rel_change(big_c_emp, big_c_d);
    let mut skip_log = ev.skipped.clone();
    skip_log.extend(hold_ev.skipped.iter().cloned());
    let skipped = skip_log.len();
    skip_log.truncate(20);
    let summary = CalibrationSummary {
        domain: domain.family.name().into(),
        backend: config.backend.id().into(),
        distance: config.distance.to_string(),
        pairs: ev.rows.iter().filter(|r| r.in_base).count(),
        excluded_close: ev.excluded_close,
        skipped,
        skip_log,
        c_emp,
        big_c_emp,
        c_emp_doubled: c_d,
        big_c_emp_doubled: big_c_d,
        c_change,
        big_c_change,
        stable: c_change < config.stability_tol && big_c_change < config.stability_tol,
        per_regime,
        holdout_pairs: hold_ev.rows.len(),
        holdout_inside: inside,
        holdout_fraction: inside as f64 / hold_ev.rows.len().max(1) as f64,
        boundary_ratio_constant,
        note: (config.distance == DistanceKind::Bergman)
            .then(|| "Bergman branch evaluated on the unit ball only".to_string()),
    };
    Ok(CalibrationReport { rows: ev.rows, summary })
}

impl CalibrationSummary {
    pub fn passed(&self) -> bool {
        self.c_emp > 0.0
            && self.c_emp <= self.big_c_emp
            && self.big_c_emp.is_finite()
            && self.stable
            && self.holdout_fraction >= HOLDOUT_TARGET
    }
}

impl CalibrationReport {
    pub fn meta(&self) -> Vec<(&'static str, String)> {
        vec![
            ("domain", self.summary.domain.clone()),
            ("backend", self.summary.backend.clone()),
            ("distance", self.summary.distance.clone()),
        ]
    }

    pub fn write(&self, dir: &std::path::Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        crate::harness::report::write_outputs(dir, "calibration", &self.table(), &self.meta(), &self.summary)
    }

    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new([
            "regime", "pair_id", "in_base", "backend", "distance", "z", "w", "delta_z", "delta_w", "norm_diff",
            "normal_mag", "A", "k_lower", "k_upper", "ratio_low", "ratio_high",
        ]);
        for r in &self.rows {
            let q = &r.quantities;
            t.push(vec![
                r.regime.name().into(),
                r.pair_id.to_string(),
                r.in_base.to_string(),
                self.summary.backend.clone(),
                self.summary.distance.clone(),
                r.z.to_string(),
                r.w.to_string(),
                num(q.delta_z),
                num(q.delta_w),
                num(q.norm_diff),
                num(q.normal_mag),
                num(q.a),
                num(r.k_lower),
                num(r.k_upper),
                num(r.ratio_low),
                num(r.ratio_high),
            ]);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regimes(count: usize, dmin: f64) -> Vec<SampleRegime> {
        [RegimeKind::Transversal, RegimeKind::Tangential, RegimeKind::Mixed]
            .iter()
            .map(|&k| SampleRegime::new(k, dmin, 0.9, count, 42).unwrap())
            .collect()
    }

    #[test]
    fn ball_constants_are_ordered_and_exact() {
        let b = DomainSpec::unit_ball(2);
        let rep = calibrate_theorem1(&b, Backend::ExactBall, &regimes(100, 1e-3)).unwrap();
        let s = &rep.summary;
        assert!(0.0 < s.c_emp && s.c_emp < s.big_c_emp && s.big_c_emp.is_finite());
        assert!(rep.rows.iter().all(|r| r.ratio_low == r.ratio_high));
        assert_eq!(s.pairs, 300);
        assert_eq!(rep.rows.len(), 600);
        assert!(s.boundary_ratio_constant.is_finite());
        assert_eq!(rep.table().len(), 600);
    }

    #[test]
    fn interval_brackets_are_consistent_on_an_ellipsoid() {
        let e = DomainSpec::ellipsoid(&[1.0, 2.0]).unwrap();
        let cfg = CalibrationConfig {
            backend: Backend::Interval,
            holdout_count: 6,
            path_segments: 4,
            ..CalibrationConfig::default()
        };
        let regs = vec![SampleRegime::new(RegimeKind::Mixed, 1e-2, 0.3, 4, 3).unwrap()];
        let rep = calibrate_with(&e, &regs, &cfg).unwrap();
        assert!(rep.summary.c_emp <= rep.summary.big_c_emp);
        assert!(rep.rows.iter().all(|r| r.k_lower <= r.k_upper && r.ratio_low <= r.ratio_high));
    }

    #[test]
    fn capability_is_checked_before_sampling() {
        let e = DomainSpec::ellipsoid(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            calibrate_theorem1(&e, Backend::ExactBall, &regimes(1, 1e-3)),
            Err(Error::Capability { .. })
        ));
        let cfg = CalibrationConfig {
            backend: Backend::Interval,
            distance: DistanceKind::Bergman,
            ..CalibrationConfig::default()
        };
        assert!(matches!(
            calibrate_with(&DomainSpec::unit_ball(2), &regimes(1, 1e-3), &cfg),
            Err(Error::Capability { .. })
        ));
    }
}
