use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use invmetric::ball::kobayashi_ball;
use invmetric::bounds::{
    is_unit_ball, kobayashi_lower, kobayashi_upper_path, royden_interval, Backend, DEFAULT_ESTIMATOR_C,
};
use invmetric::domain::{boundary_frame, DomainConfig};
use invmetric::estimators::{a_quantity, cc_proxy, g_balogh_bonk, h_quantities};
use invmetric::harness::report::{num, CsvTable};
use invmetric::harness::{
    calibrate_with, verify_suite, CalibrationConfig, DistanceKind, RegimeKind, SampleRegime, Suite, SuiteConfig,
};
use invmetric::{CVec, DomainSpec, Error};

#[derive(Parser, Debug)]
#[command(name = "invmetric", version, about = "Invariant-distance bounds and estimator checks on model domains")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Pairs per regime (calibrate) or suite sample size (verify).
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-4)]
    delta_min: f64,
    #[arg(long, global = true, default_value_t = 0.9)]
    delta_max: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Quantity {
    #[value(name = "A")]
    A,
    #[value(name = "g")]
    G,
    #[value(name = "h")]
    H,
    #[value(name = "cc")]
    Cc,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Boundary frame of a point: δ, projection, normal, Levi minimum.
    Frame {
        config: PathBuf,
        #[arg(long)]
        point: String,
    },
    /// Kobayashi distance bracket between two points.
    Dist {
        config: PathBuf,
        #[arg(long)]
        z: String,
        #[arg(long)]
        w: String,
        #[arg(long, default_value = "exact-ball")]
        backend: String,
        #[arg(long, default_value_t = 64)]
        segments: usize,
    },
    /// Kobayashi–Royden metric bracket.
    Royden {
        config: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long)]
        vector: String,
    },
    /// One of the estimator quantities for a pair (boundary points for cc).
    Estimate {
        config: PathBuf,
        #[arg(long, value_enum)]
        quantity: Quantity,
        #[arg(long)]
        z: String,
        #[arg(long)]
        w: String,
    },
    /// Empirical sandwich constants over sampled pairs.
    Calibrate {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "transversal,tangential,mixed")]
        regimes: Vec<String>,
        #[arg(long, default_value = "exact-ball")]
        backend: String,
        #[arg(long, default_value = "kobayashi")]
        distance: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        config: PathBuf,
        #[arg(long)]
        suite: String,
        #[arg(long, default_value = "exact-ball")]
        backend: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The local-model sequence where h beats ‖z−w‖².
    ExampleS9 {
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 0.1)]
        eps0: f64,
        /// δ = ε^exponent.
        #[arg(long, default_value_t = 5.0)]
        exponent: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn load(path: &Path) -> invmetric::Result<DomainSpec> {
    DomainConfig::load(path)?.build()
}

fn point(s: &str, domain: Option<&DomainSpec>) -> invmetric::Result<CVec> {
    let p: CVec = s.parse()?;
    if let Some(d) = domain {
        if p.dim() != d.dim {
            return Err(Error::Config(format!("`{s}` has dimension {}, the domain {}", p.dim(), d.dim)));
        }
    }
    Ok(p)
}

fn emit(fields: &[(&str, String)], format: Format) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = fields
                .iter()
                .map(|(k, v)| {
                    let val = v
                        .parse::<f64>()
                        .ok()
                        .and_then(serde_json::Number::from_f64)
                        .map(serde_json::Value::Number)
                        .unwrap_or_else(|| serde_json::Value::String(v.clone()));
                    (k.to_string(), val)
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &map)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut t = CsvTable::new(fields.iter().map(|f| f.0));
            t.push(fields.iter().map(|f| f.1.clone()).collect());
            write!(out, "{}", t.to_csv_string(&[])?)?;
        }
    }
    Ok(())
}

fn emit_report(
    summary: serde_json::Value,
    csv: String,
    out: Option<&Path>,
    write: impl FnOnce(&Path) -> invmetric::Result<(PathBuf, PathBuf)>,
    format: Format,
) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout().lock();
    if let Some(dir) = out {
        let (c, j) = write(dir)?;
        eprintln!("wrote {} and {}", c.display(), j.display());
    }
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut stdout, &summary)?;
            writeln!(stdout)?;
        }
        Format::Csv => write!(stdout, "{csv}")?,
    }
    Ok(())
}

fn suite_config(common: &Common, backend: Backend) -> SuiteConfig {
    let d = SuiteConfig::default();
    SuiteConfig {
        seed: common.seed,
        samples: common.samples.unwrap_or(d.samples),
        delta_min: common.delta_min,
        delta_max: common.delta_max,
        backend,
        ..d
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let common = cli.common;
    let fmt = common.format;
    match cli.command {
        Command::Frame { config, point: p } => {
            let d = load(&config)?;
            let f = boundary_frame(&d, &point(&p, Some(&d))?)?;
            emit(
                &[
                    ("point", f.point.to_string()),
                    ("delta", num(f.delta)),
                    ("signed_delta", num(f.signed_delta)),
                    ("projection", f.projection.to_string()),
                    ("outer_normal", f.outer_normal.to_string()),
                    ("levi_min", num(f.levi_min)),
                    ("unique_projection", f.unique_projection.to_string()),
                ],
                fmt,
            )?;
        }
        Command::Dist {
            config,
            z,
            w,
            backend,
            segments,
        } => {
            let d = load(&config)?;
            let backend: Backend = backend.parse()?;
            let (z, w) = (point(&z, Some(&d))?, point(&w, Some(&d))?);
            let lower = kobayashi_lower(&d, &z, &w, DEFAULT_ESTIMATOR_C)?;
            let upper = kobayashi_upper_path(&d, &z, &w, segments, backend)?;
            let mut fields = vec![
                ("backend", backend.id().to_string()),
                ("lower", num(lower.certified)),
                ("upper", num(upper.value)),
                ("optimized", upper.optimized.to_string()),
            ];
            if is_unit_ball(&d) {
                fields.push(("exact", num(kobayashi_ball(&z, &w)?)));
            }
            emit(&fields, fmt)?;
        }
        Command::Royden { config, point: p, vector } => {
            let d = load(&config)?;
            let iv = royden_interval(&d, &point(&p, Some(&d))?, &point(&vector, Some(&d))?)?;
            emit(&[("lower", num(iv.lower)), ("upper", num(iv.upper))], fmt)?;
        }
        Command::Estimate { config, quantity, z, w } => {
            let d = load(&config)?;
            let (z, w) = (point(&z, Some(&d))?, point(&w, Some(&d))?);
            let fields = match quantity {
                Quantity::A => vec![("A", num(a_quantity(&d, &z, &w)?))],
                Quantity::G => vec![("g", num(g_balogh_bonk(&d, &z, &w)?))],
                Quantity::H => {
                    let (h, hr) = h_quantities(&d, &z, &w)?;
                    vec![("h", num(h)), ("h_real", num(hr))]
                }
                Quantity::Cc => vec![("cc", num(cc_proxy(&d, &z, &w)?))],
            };
            emit(&fields, fmt)?;
        }
        Command::Calibrate {
            config,
            regimes,
            backend,
            distance,
            out,
        } => {
            let d = load(&config)?;
            let samples = common.samples.unwrap_or(1000);
            let regimes = regimes
                .iter()
                .map(|r| SampleRegime::new(r.parse::<RegimeKind>()?, common.delta_min, common.delta_max, samples, common.seed))
                .collect::<invmetric::Result<Vec<_>>>()?;
            let cfg = CalibrationConfig {
                backend: backend.parse()?,
                distance: distance.parse::<DistanceKind>()?,
                ..CalibrationConfig::default()
            };
            let rep = calibrate_with(&d, &regimes, &cfg)?;
            let csv = rep.table().to_csv_string(&rep.meta())?;
            emit_report(serde_json::to_value(&rep.summary)?, csv, out.as_deref(), |dir| rep.write(dir), fmt)?;
            return Ok(if rep.summary.passed() { Outcome::Pass } else { Outcome::Fail });
        }
        Command::Verify {
            config,
            suite,
            backend,
            out,
        } => {
            let d = load(&config)?;
            let suite: Suite = suite.parse()?;
            let rep = verify_suite(&d, suite, &suite_config(&common, backend.parse()?))?;
            for c in &rep.checks {
                eprintln!("{} {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            emit_report(serde_json::to_value(&rep)?, rep.csv_string()?, out.as_deref(), |dir| rep.write(dir), fmt)?;
            return Ok(if rep.passed { Outcome::Pass } else { Outcome::Fail });
        }
        Command::ExampleS9 {
            levels,
            eps0,
            exponent,
            out,
        } => {
            let cfg = SuiteConfig {
                s9_levels: levels,
                s9_eps0: eps0,
                s9_exponent: exponent,
                ..suite_config(&common, Backend::Interval)
            };
            let rep = verify_suite(&DomainSpec::local_model_s9(), Suite::S9Example, &cfg)?;
            emit_report(serde_json::to_value(&rep)?, rep.csv_string()?, out.as_deref(), |dir| rep.write(dir), fmt)?;
            return Ok(if rep.passed { Outcome::Pass } else { Outcome::Fail });
        }
    }
    Ok(Outcome::Pass)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_numeric() || matches!(err, Error::Sampling(_) | Error::Singularity(_)) => 3,
        Some(_) => 2,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).context("invmetric") {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}
