//! Verification suites: each samples, evaluates, and checks one family of
//! estimates against pass/fail thresholds, keeping every row as CSV evidence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{real_geodesic_ball, DiscMap};
use crate::bounds::{checked_frame, Backend};
use crate::cvec::{CVec, PointC};
use crate::domain::{slc_lambda, DomainSpec, Family};
use crate::error::{Error, Result};
use crate::estimators::{pair_from_frames, s9_sequence, slc_ratio_scan, SlcScanConfig};
use crate::geodesics::{
    disc_invariants, infinitesimal_balance, length_ratios, reparametrize_max_delta, theorem5_balance,
    DEFAULT_ANGLES,
};
use crate::harness::calibration::{check_capability, evaluate, CalibrationConfig, CalibrationRow};
use crate::harness::report::{num, write_outputs, CsvTable};
use crate::harness::sampling::{log_uniform, random_orthonormal, RegimeKind, SampleRegime};
use crate::numeric::bisect;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    Prop2,
    Prop3,
    Prop4,
    Thm5,
    BaloghBonk,
    Symmetry,
    GehringHayman,
    S9Example,
    SLC,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Prop2,
        Suite::Prop3,
        Suite::Prop4,
        Suite::Thm5,
        Suite::BaloghBonk,
        Suite::Symmetry,
        Suite::GehringHayman,
        Suite::S9Example,
        Suite::SLC,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Prop2 => "Prop2",
            Suite::Prop3 => "Prop3",
            Suite::Prop4 => "Prop4",
            Suite::Thm5 => "Thm5",
            Suite::BaloghBonk => "BaloghBonk",
            Suite::Symmetry => "Symmetry",
            Suite::GehringHayman => "GehringHayman",
            Suite::S9Example => "S9Example",
            Suite::SLC => "SLC",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
                Error::Config(format!("unknown suite `{s}` ({})", names.join(" | ")))
            })
    }
}

/// Shared knobs. `samples` means pairs per regime for the pair suites, slices
/// for Prop4/Thm5, geodesics for Prop3 and directions per radius for SLC.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub backend: Backend,
    pub stability_tol: f64,
    pub s9_levels: usize,
    pub s9_eps0: f64,
    pub s9_exponent: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 2024,
            samples: 200,
            delta_min: 1e-4,
            delta_max: 0.9,
            backend: Backend::ExactBall,
            stability_tol: 0.10,
            s9_levels: 4,
            s9_eps0: 0.1,
            s9_exponent: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub domain: String,
    pub backend: String,
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub table: CsvTable,
}

impl SuiteReport {
    fn new(suite: Suite, domain: &DomainSpec, config: &SuiteConfig) -> Self {
        SuiteReport {
            suite,
            domain: domain.family.name().into(),
            backend: config.backend.id().into(),
            seed: config.seed,
            samples: config.samples,
            passed: true,
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            table: CsvTable::default(),
        }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn meta(&self) -> Vec<(&'static str, String)> {
        vec![
            ("suite", self.suite.to_string()),
            ("domain", self.domain.clone()),
            ("backend", self.backend.clone()),
            ("seed", self.seed.to_string()),
            ("samples", self.samples.to_string()),
        ]
    }

    pub fn csv_string(&self) -> Result<String> {
        self.table.to_csv_string(&self.meta())
    }

    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        write_outputs(dir, &self.suite.name().to_lowercase(), &self.table, &self.meta(), self)
    }
}

fn rel_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn pair_regimes(config: &SuiteConfig, delta_min: f64) -> Result<Vec<SampleRegime>> {
    [RegimeKind::Transversal, RegimeKind::Tangential, RegimeKind::Mixed]
        .iter()
        .map(|&k| SampleRegime::new(k, delta_min, config.delta_max, config.samples, config.seed))
        .collect()
}

fn calibration_config(config: &SuiteConfig) -> CalibrationConfig {
    CalibrationConfig {
        backend: config.backend,
        stability_tol: config.stability_tol,
        ..CalibrationConfig::default()
    }
}

fn require_ball(domain: &DomainSpec, suite: Suite) -> Result<()> {
    Backend::ExactBall.require(domain).map_err(|_| Error::Capability {
        backend: Backend::ExactBall.id().into(),
        what: format!("the {suite} suite (ball geodesics) on the {} family", domain.family.name()),
    })
}

pub fn verify_suite(domain: &DomainSpec, suite: Suite, config: &SuiteConfig) -> Result<SuiteReport> {
    if config.samples == 0 {
        return Err(Error::Config("samples must be positive".into()));
    }
    match suite {
        Suite::Prop2 => prop2(domain, config),
        Suite::Prop3 => prop3(domain, config),
        Suite::Prop4 => slices_suite(domain, config, Suite::Prop4),
        Suite::Thm5 => slices_suite(domain, config, Suite::Thm5),
        Suite::BaloghBonk => balogh_bonk(domain, config),
        Suite::Symmetry => symmetry(domain, config),
        Suite::GehringHayman => gehring_hayman(domain, config),
        Suite::S9Example => s9_example(domain, config),
        Suite::SLC => slc(domain, config),
    }
}

fn pair_columns(t: &mut Vec<String>, r: &CalibrationRow) {
    t.extend([
        r.regime.name().to_string(),
        r.pair_id.to_string(),
        r.in_base.to_string(),
        r.z.to_string(),
        r.w.to_string(),
        num(r.quantities.delta_z),
        num(r.quantities.delta_w),
    ]);
}

const PAIR_HEADER: [&str; 7] = ["regime", "pair_id", "in_base", "z", "w", "delta_z", "delta_w"];

fn prop2(domain: &DomainSpec, config: &SuiteConfig) -> Result<SuiteReport> {
    let cal = calibration_config(config);
    check_capability(domain, &cal)?;
    let ev = evaluate(domain, &pair_regimes(config, config.delta_min)?, 2, &cal)?;
    let mut rep = SuiteReport::new(Suite::Prop2, domain, config);
    let mut t = CsvTable::new(PAIR_HEADER.iter().copied().chain(["normal_mag", "k_lower", "prop2_ratio"]));
    let mut min_base = f64::INFINITY;
    let mut min_all = f64::INFINITY;
    let mut per: BTreeMap<RegimeKind, f64> = BTreeMap::new();
    for r in &ev.rows {
        let q = &r.quantities;
        if q.normal_mag <= 1e-14 * q.norm_diff {
            continue;
        }
        let v = r.k_lower.exp_m1() * q.delta_z.sqrt() * q.delta_w.sqrt() / q.normal_mag;
        min_all = min_all.min(v);
        if r.in_base {
            min_base = min_base.min(v);
            let e = per.entry(r.regime).or_insert(f64::INFINITY);
            *e = e.min(v);
        }
        let mut row = Vec::new();
        pair_columns(&mut row, r);
        row.extend([num(q.normal_mag), num(r.k_lower), num(v)]);
        t.push(row);
    }
    rep.metric("min_ratio", min_base);
    rep.metric("min_ratio_doubled", min_all);
    for (k, v) in &per {
        rep.metric(&format!("min_ratio_{}", k.name()), *v);
    }
    rep.metric("skipped", ev.skipped.len() as f64);
    rep.check(
        "positive",
        min_base > 0.0 && min_base.is_finite(),
        format!("min (e^k − 1)√δz√δw/‖(z−w)_z‖ = {min_base:.6e}"),
    );
    let ch = rel_change(min_base, min_all);
    rep.check("stable", ch < config.stability_tol, format!("relative change under doubling {ch:.3e}"));
    rep.table = t;
    Ok(rep)
}

fn balogh_bonk(domain: &DomainSpec, config: &SuiteConfig) -> Result<SuiteReport> {
    require_ball(domain, Suite::BaloghBonk)?;
    let cal = calibration_config(config);
    let mut rep = SuiteReport::new(Suite::BaloghBonk, domain, config);
    let mut t = CsvTable::new(
        ["delta_floor"]
            .into_iter()
            .chain(PAIR_HEADER)
            .chain(["k", "g", "abs_k_minus_g", "bb_ratio"]),
    );
    let floors = [10.0 * config.delta_min, config.delta_min];
    let mut sups = Vec::new();
    let (mut bb_min, mut bb_max) = (f64::INFINITY, 0.0f64);
    for floor in floors {
        let ev = evaluate(domain, &pair_regimes(config, floor)?, 1, &cal)?;
        let mut sup = 0.0f64;
        for r in &ev.rows {
            let q = &r.quantities;
            let gap = (r.k_lower - q.g).abs();
            // (A + 1)√δz√δw against cc² + max δ
            let bb = (q.a + 1.0) / q.g.exp();
            sup = sup.max(gap);
            bb_min = bb_min.min(bb);
            bb_max = bb_max.max(bb);
            let mut row = vec![num(floor)];
            pair_columns(&mut row, r);
            row.extend([num(r.k_lower), num(q.g), num(gap), num(bb)]);
            t.push(row);
        }
        sups.push(sup);
    }
    rep.metric("sup_abs_k_minus_g_coarse", sups[0]);
    rep.metric("sup_abs_k_minus_g_fine", sups[1]);
    rep.metric("bb_ratio_min", bb_min);
    rep.metric("bb_ratio_max", bb_max);
    rep.check(
        "finite",
        sups.iter().all(|s| s.is_finite()),
        format!("sup |k − g| = {:.6} (δ ≥ {:.0e}), {:.6} (δ ≥ {:.0e})", sups[0], floors[0], sups[1], floors[1]),
    );
    rep.check(
        "no growth",
        sups[1] <= (1.0 + config.stability_tol) * sups[0],
        format!("ratio fine/coarse = {:.4}", sups[1] / sups[0]),
    );
    rep.check(
        "bb ratio bounded",
        bb_min > 0.0 && bb_max.is_finite(),
        format!("(A+1)√δz√δw / (cc² + max δ) in [{bb_min:.4e}, {bb_max:.4e}]"),
    );
    rep.table = t;
    Ok(rep)
}

fn symmetry(domain: &DomainSpec, config: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(Suite::Symmetry, domain, config);
    let mut t = CsvTable::new(
        ["regime", "pair_id", "in_base", "z", "w", "A_zw", "A_wz", "sym_ratio"],
    );
    let (mut max_base, mut max_all) = (0.0f64, 0.0f64);
    for regime in pair_regimes(config, config.delta_min)? {
        let set = crate::harness::sampling::sample_pair_set(domain, &regime.with_count(2 * regime.count))?;
        let vals: Vec<Result<(f64, f64)>> = set
            .pairs
            .par_iter()
            .map(|(z, w)| {
                let fz = checked_frame(domain, z)?;
                let fw = checked_frame(domain, w)?;
                Ok((pair_from_frames(&fz, &fw).a, pair_from_frames(&fw, &fz).a))
            })
            .collect();
        for (id, (v, (z, w))) in vals.into_iter().zip(&set.pairs).enumerate() {
            let (a1, a2) = v?;
            let r = (a1 / a2).max(a2 / a1);
            max_all = max_all.max(r);
            let in_base = id < regime.count;
            if in_base {
                max_base = max_base.max(r);
            }
            t.push(vec![
                regime.kind.name().into(),
                id.to_string(),
                in_base.to_string(),
                z.to_string(),
                w.to_string(),
                num(a1),
                num(a2),
                num(r),
            ]);
        }
    }
    rep.metric("max_ratio", max_base);
    rep.metric("max_ratio_doubled", max_all);
    rep.check("finite", max_base.is_finite(), format!("max A(z,w)/A(w,z) = {max_base:.6}"));
    let ch = rel_change(max_base, max_all);
    rep.check("stable", ch < config.stability_tol, format!("relative change under doubling {ch:.3e}"));
    rep.table = t;
    Ok(rep)
}

fn gehring_hayman(domain: &DomainSpec, config: &SuiteConfig) -> Result<SuiteReport> {
    require_ball(domain, Suite::GehringHayman)?;
    let mut rep = SuiteReport::new(Suite::GehringHayman, domain, config);
    let mut t = CsvTable::new(["regime", "pair_id", "z", "w", "length", "max_delta", "gehring", "prop3"]);
    let mut max_g = 0.0f64;
    let mut max_p = 0.0f64;
    for regime in pair_regimes(config, config.delta_min)? {
        let pairs = crate::harness::sampling::sample_pairs(domain, &regime)?;
        let vals: Vec<_> = pairs
            .par_iter()
            .map(|(z, w)| length_ratios(domain, &real_geodesic_ball(z, w, 257)?))
            .collect::<Result<_>>()?;
        for (id, (lr, (z, w))) in vals.iter().zip(&pairs).enumerate() {
            max_g = max_g.max(lr.gehring);
            max_p = max_p.max(lr.prop3);
            t.push(vec![
                regime.kind.name().into(),
                id.to_string(),
                z.to_string(),
                w.to_string(),
                num(lr.length),
                num(lr.max_delta),
                num(lr.gehring),
                num(lr.prop3),
            ]);
        }
    }
    rep.metric("max_gehring", max_g);
    rep.metric("max_prop3", max_p);
    let bound = std::f64::consts::FRAC_PI_2 + 0.01;
    rep.check("arc bound", max_g <= bound, format!("max l/‖z−w‖ = {max_g:.6} (bound {bound:.4})"));
    rep.table = t;
    Ok(rep)
}

/// Log-spaced boundary offsets used by the Prop3 scan.
pub fn prop3_grid(points: usize) -> Vec<f64> {
    let (lo, hi) = (1e-4f64, 0.5f64);
    (0..points)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (points - 1).max(1) as f64).exp())
        .collect()
}

pub const PROP3_LEVELS: usize = 20;
/// Criterion on `l(γ)/‖z−w‖` for the Prop3 scan.
pub const PROP3_GEHRING_BOUND: f64 = 1.58 + 1e-2;

fn prop3(domain: &DomainSpec, config: &SuiteConfig) -> Result<SuiteReport> {
    require_ball(domain, Suite::Prop3)?;
    let n = domain.dim;
    let grid = prop3_grid(PROP3_LEVELS);
    let per = config.samples.div_ceil(PROP3_LEVELS).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(31);
    // the same endpoint angles and rotation at every offset
    let shapes: Vec<(f64, f64, Vec<CVec>)> = (0..per)
        .map(|_| {
            let a = std::f64::consts::TAU * rng.random::<f64>();
            let b = std::f64::consts::TAU * rng.random::<f64>();
            (a, b, random_orthonormal(&mut rng, n, n))
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|i| (0..per).map(move |j| (i, j))).collect();
    let rows: Vec<_> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let s = grid[i];
            let (a, b, u) = &shapes[j];
            let rad = (1.0 - s * s).sqrt();
            let z = u[0].scale_c(Complex64::from_polar(rad, *a));
            let w = u[0].scale_c(Complex64::from_polar(rad, *b));
            let lr = length_ratios(domain, &real_geodesic_ball(&z, &w, 1025)?)?;
            Ok((i, j, z, w, lr))
        })
        .collect::<Result<_>>()?;
    let mut rep = SuiteReport::new(Suite::Prop3, domain, config);
    let mut t = CsvTable::new(["s", "shape", "z", "w", "length", "gap", "max_delta", "gehring", "prop3"]);
    let mut sup_by_level = vec![0.0f64; grid.len()];
    let mut max_g = 0.0f64;
    for (i, j, z, w, lr) in &rows {
        sup_by_level[*i] = sup_by_level[*i].max(lr.prop3);
        max_g = max_g.max(lr.gehring);
        t.push(vec![
            num(grid[*i]),
            j.to_string(),
            z.to_string(),
            w.to_string(),
            num(lr.length),
            num(z.dist(w)),
            num(lr.max_delta),
            num(lr.gehring),
            num(lr.prop3),
        ]);
    }
    let half = grid.len() / 2;
    let fine = sup_by_level[..half].iter().cloned().fold(0.0, f64::max);
    let coarse = sup_by_level[half..].iter().cloned().fold(0.0, f64::max);
    let drift = fine / coarse - 1.0;
    rep.metric("geodesics", rows.len() as f64);
    rep.metric("max_gehring", max_g);
    rep.metric("sup_prop3_small_s", fine);
    rep.metric("sup_prop3_large_s", coarse);
    rep.metric("prop3_drift", drift);
    rep.check(
        "gehring bound",
        max_g <= PROP3_GEHRING_BOUND,
        format!("max l/‖z−w‖ = {max_g:.6} (bound {PROP3_GEHRING_BOUND})"),
    );
    rep.check(
        "prop3 drift",
        fine.is_finite() && drift <= config.stability_tol,
        format!("sup l/D^½ over s < {:.2e}: {fine:.6}; over the rest: {coarse:.6}; drift {drift:.4}", grid[half]),
    );
    rep.table = t;
    Ok(rep)
}

/// A random ball slice whose deepest point has boundary distance `s`, given in
/// a parametrization that does not yet put that point at 0.
pub fn random_ball_slice(rng: &mut ChaCha8Rng, n: usize, s: f64) -> Result<DiscMap> {
    let frame = random_orthonormal(rng, n, 2.min(n));
    let nu = &frame[0];
    let u = frame.get(1).unwrap_or(nu);
    let c0 = nu * (1.0 - s);
    let r = (s * (2.0 - s)).sqrt();
    let phase = Complex64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>());
    let shift = Complex64::from_polar(0.6 * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>());
    Ok(DiscMap::affine(c0, u.clone(), phase, Complex64::new(0.0, 0.0))?.precompose(shift))
}

#[derive(Clone, Debug)]
struct SliceEval {
    s: f64,
    disc: DiscMap,
    diameter: f64,
    max_delta: f64,
    max_derivative: f64,
    tangency: f64,
    balances: Vec<(PointC, PointC, f64)>,
    boundary_balances: Vec<f64>,
}

const PAIRS_PER_SLICE: usize = 5;
const BOUNDARY_PARAMS_PER_SLICE: usize = 4;

fn eval_slice(domain: &DomainSpec, seed: u64, index: usize, s: f64, disc: DiscMap, with_pairs: bool) -> Result<SliceEval> {
    let disc = reparametrize_max_delta(domain, &disc)?;
    let inv = disc_invariants(domain, &disc, DEFAULT_ANGLES)?;
    let mut out = SliceEval {
        s,
        diameter: inv.diameter,
        max_delta: inv.max_delta,
        max_derivative: inv.max_derivative,
        tangency: inv.tangency_defect,
        balances: Vec::new(),
        boundary_balances: Vec::new(),
        disc,
    };
    if with_pairs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1000 + index as u64);
        let draw = |rng: &mut ChaCha8Rng| {
            Complex64::from_polar(0.999 * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>())
        };
        for _ in 0..PAIRS_PER_SLICE {
            let z = out.disc.eval(draw(&mut rng));
            let w = out.disc.eval(draw(&mut rng));
            let b = theorem5_balance(domain, &out.disc, &z, &w)?;
            out.balances.push((z, w, b));
        }
        for k in 0..BOUNDARY_PARAMS_PER_SLICE {
            let t = std::f64::consts::TAU * (k as f64 + rng.random::<f64>()) / BOUNDARY_PARAMS_PER_SLICE as f64;
            out.boundary_balances.push(infinitesimal_balance(domain, &out.disc, Complex64::from_polar(1.0, t))?);
        }
    }
    Ok(out)
}

fn band(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn band_checks(rep: &mut SuiteReport, label: &str, base: (f64, f64), doubled: (f64, f64), tol: f64) {
    let width = base.1 / base.0;
    rep.metric(&format!("{label}_min"), base.0);
    rep.metric(&format!("{label}_max"), base.1);
    rep.metric(&format!("{label}_min_doubled"), doubled.0);
    rep.metric(&format!("{label}_max_doubled"), doubled.1);
    rep.check(
        &format!("{label} band"),
        base.0 > 0.0 && width.is_finite() && width <= 10.0,
        format!("[{:.6}, {:.6}], max/min = {width:.4}", base.0, base.1),
    );
    let ch = rel_change(base.0, doubled.0).max(rel_change(base.1, doubled.1));
    rep.check(
        &format!("{label} stable"),
        ch <= tol,
        format!("band ends move by {ch:.3e} under doubling"),
    );
}

/// Slice offsets `s`, log-uniform on `[1e−4, 1)`, and the slices themselves.
pub fn random_slices(seed: u64, n: usize, count: usize) -> Result<Vec<(f64, DiscMap)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(41);
    (0..count)
        .map(|_| {
            let s = log_uniform(&mut rng, 1e-4, 1.0).min(1.0 - 1e-9);
            Ok((s, random_ball_slice(&mut rng, n, s)?))
        })
        .collect()
}

fn slices_suite(domain: &DomainSpec, config: &SuiteConfig, suite: Suite) -> Result<SuiteReport> {
    require_ball(domain, suite)?;
    let with_pairs = suite == Suite::Thm5;
    let slices = random_slices(config.seed, domain.dim, 2 * config.samples)?;
    let evals: Vec<SliceEval> = slices
        .into_par_iter()
        .enumerate()
        .map(|(i, (s, d))| eval_slice(domain, config.seed, i, s, d, with_pairs))
        .collect::<Result<_>>()?;
    let base = &evals[..config.samples];
    let mut rep = SuiteReport::new(suite, domain, config);
    if suite == Suite::Prop4 {
        let mut t = CsvTable::new([
            "slice", "in_base", "s", "center", "direction", "diameter", "max_delta", "max_derivative",
            "tangency_defect", "diameter_over_sqrt_d", "derivative_over_diameter",
        ]);
        for (i, e) in evals.iter().enumerate() {
            t.push(vec![
                i.to_string(),
                (i < config.samples).to_string(),
                num(e.s),
                e.disc.eval(Complex64::new(0.0, 0.0)).to_string(),
                e.disc.direction.to_string(),
                num(e.diameter),
                num(e.max_delta),
                num(e.max_derivative),
                num(e.tangency),
                num(e.diameter / e.max_delta.sqrt()),
                num(e.max_derivative / e.diameter),
            ]);
        }
        let r1 = |e: &SliceEval| e.diameter / e.max_delta.sqrt();
        let r2 = |e: &SliceEval| e.max_derivative / e.diameter;
        band_checks(&mut rep, "diameter_over_sqrt_d", band(base.iter().map(r1)), band(evals.iter().map(r1)), config.stability_tol);
        band_checks(&mut rep, "derivative_over_diameter", band(base.iter().map(r2)), band(evals.iter().map(r2)), config.stability_tol);
        let tan = base.iter().map(|e| e.tangency).fold(0.0, f64::max);
        rep.metric("max_tangency_defect", tan);
        rep.check("tangency", tan <= 1e-6, format!("max |<φ'(0), η>|/‖φ'(0)‖ = {tan:.3e}"));
        rep.table = t;
    } else {
        let mut t = CsvTable::new(["slice", "in_base", "s", "kind", "z", "w", "diameter", "balance"]);
        for (i, e) in evals.iter().enumerate() {
            for (z, w, b) in &e.balances {
                t.push(vec![
                    i.to_string(),
                    (i < config.samples).to_string(),
                    num(e.s),
                    "pair".into(),
                    z.to_string(),
                    w.to_string(),
                    num(e.diameter),
                    num(*b),
                ]);
            }
            for b in &e.boundary_balances {
                t.push(vec![
                    i.to_string(),
                    (i < config.samples).to_string(),
                    num(e.s),
                    "boundary".into(),
                    String::new(),
                    String::new(),
                    num(e.diameter),
                    num(*b),
                ]);
            }
        }
        let pb = |es: &[SliceEval]| band(es.iter().flat_map(|e| e.balances.iter().map(|x| x.2)));
        let bb = |es: &[SliceEval]| band(es.iter().flat_map(|e| e.boundary_balances.iter().copied()));
        band_checks(&mut rep, "balance", pb(base), pb(&evals), config.stability_tol);
        let (lo, hi) = bb(base);
        rep.metric("boundary_balance_min", lo);
        rep.metric("boundary_balance_max", hi);
        rep.check(
            "boundary balance band",
            lo > 0.0 && hi / lo <= 10.0,
            format!("boundary-parameter balance in [{lo:.6}, {hi:.6}]"),
        );
        rep.table = t;
    }
    rep.metric("slices", config.samples as f64);
    Ok(rep)
}

fn s9_example(domain: &DomainSpec, config: &SuiteConfig) -> Result<SuiteReport> {
    if !matches!(domain.family, Family::LocalModelS9) {
        return Err(Error::Config(format!(
            "the S9Example suite runs on the s9 family, not {}",
            domain.family.name()
        )));
    }
    let mut rep = SuiteReport::new(Suite::S9Example, domain, config);
    let mut t = CsvTable::new(["exponent", "level", "epsilon", "delta", "z", "w", "h", "h_real", "norm_diff_sq", "ratio"]);
    let cubic = s9_sequence(config.s9_levels, config.s9_eps0, 3.0)?;
    let chosen = s9_sequence(config.s9_levels, config.s9_eps0, config.s9_exponent)?;
    for (p, rows) in [(3.0, &cubic), (config.s9_exponent, &chosen)] {
        for r in rows.iter() {
            t.push(vec![
                num(p),
                r.level.to_string(),
                num(r.epsilon),
                num(r.delta),
                r.z.to_string(),
                r.w.to_string(),
                num(r.h),
                num(r.h_real),
                num(r.norm_diff_sq),
                num(r.ratio),
            ]);
        }
    }
    let decreasing = cubic.windows(2).all(|w| w[1].ratio < w[0].ratio);
    let drops: Vec<f64> = chosen.windows(2).map(|w| w[0].ratio / w[1].ratio).collect();
    let min_drop = drops.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.metric("last_ratio_cubic", cubic.last().map_or(f64::NAN, |r| r.ratio));
    rep.metric("last_ratio", chosen.last().map_or(f64::NAN, |r| r.ratio));
    rep.metric("min_drop_factor", min_drop);
    rep.check("δ = ε³ decreasing", decreasing, "h/‖z−w‖² strictly decreasing".into());
    rep.check(
        "halving per level",
        min_drop >= 2.0,
        format!("δ = ε^{}: smallest per-level drop factor {min_drop:.4}", config.s9_exponent),
    );
    rep.table = t;
    Ok(rep)
}

/// Boundary point used by the SLC scan: the origin for the local model,
/// otherwise the boundary point on the first axis.
pub fn slc_base_point(domain: &DomainSpec) -> Result<PointC> {
    if matches!(domain.family, Family::LocalModelS9) {
        return Ok(domain.anchor() * 0.0);
    }
    let a = domain.anchor();
    let e = CVec::basis(domain.dim, 0);
    let (_, r) = domain
        .enclosing_ball()
        .ok_or_else(|| Error::Config("no enclosing ball".into()))?;
    let t = bisect(|t| domain.value_unchecked(&(&a + &(&e * t))), 0.0, 2.0 * r + 1.0, 1e-16)
        .ok_or_else(|| Error::Geometry("no boundary point on the first axis".into()))?;
    Ok(&a + &(&e * t))
}

pub const SLC_RADII: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];

fn slc(domain: &DomainSpec, config: &SuiteConfig) -> Result<SuiteReport> {
    let p = slc_base_point(domain)?;
    let rows = slc_ratio_scan(
        domain,
        &p,
        &SLC_RADII,
        &SlcScanConfig {
            base_samples: config.samples,
            seed: config.seed,
        },
    )?;
    let lambda = slc_lambda(domain, &p)?;
    let mut rep = SuiteReport::new(Suite::SLC, domain, config);
    let mut t = CsvTable::new(["radius", "c2_est", "c3_est", "c4_est", "samples_c2", "samples_c3", "samples_c4"]);
    for r in &rows {
        t.push(vec![
            num(r.radius),
            num(r.c2_est),
            num(r.c3_est),
            num(r.c4_est),
            r.samples_c2.to_string(),
            r.samples_c3.to_string(),
            r.samples_c4.to_string(),
        ]);
    }
    let first = &rows[0];
    let last = rows.last().unwrap();
    rep.metric("lambda", lambda);
    rep.metric("c3_last", last.c3_est);
    rep.metric("c4_first", first.c4_est);
    rep.metric("c4_last", last.c4_est);
    rep.check(
        "c2 ≤ c3",
        rows.iter().all(|r| r.c2_est <= r.c3_est),
        "joint infimum below the one-point infimum at every radius".into(),
    );
    if matches!(domain.family, Family::LocalModelS9) {
        rep.check(
            "c4 → 0",
            last.c4_est < 0.1 * first.c4_est,
            format!("c4 {:.3e} → {:.3e}", first.c4_est, last.c4_est),
        );
    } else {
        let err = (last.c3_est - lambda).abs() / lambda;
        rep.check(
            "c3 → λ",
            err <= 0.1,
            format!("c3 = {:.6} at r = {}, λ = {lambda:.6}, relative gap {err:.4}", last.c3_est, last.radius),
        );
    }
    rep.table = t;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(samples: usize) -> SuiteConfig {
        SuiteConfig {
            samples,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().to_lowercase().parse::<Suite>().unwrap(), s);
        }
        assert!("Thm6".parse::<Suite>().is_err());
    }

    #[test]
    fn ball_only_suites_reject_other_families() {
        let e = DomainSpec::ellipsoid(&[1.0, 2.0]).unwrap();
        for s in [Suite::Prop3, Suite::Prop4, Suite::Thm5, Suite::BaloghBonk, Suite::GehringHayman] {
            assert!(matches!(verify_suite(&e, s, &small(4)), Err(Error::Capability { .. })), "{s}");
        }
        assert!(matches!(
            verify_suite(&DomainSpec::unit_ball(2), Suite::S9Example, &small(4)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn prop4_slice_ratios_match_closed_form() {
        let ball = DomainSpec::unit_ball(2);
        let rep = verify_suite(&ball, Suite::Prop4, &small(6)).unwrap();
        assert!(rep.passed, "{:?}", rep.checks);
        // slice of depth s: diameter/√D = 2√(2 − s), max|φ'|/diameter = 1/2
        assert!(rep.metrics["diameter_over_sqrt_d_max"] <= 2.0 * 2f64.sqrt() + 1e-3);
        assert!(rep.metrics["diameter_over_sqrt_d_min"] >= 2.0 - 1e-3);
        assert!((rep.metrics["derivative_over_diameter_max"] - 0.5).abs() < 1e-3);
        assert!((rep.metrics["derivative_over_diameter_min"] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn s9_example_passes_with_default_exponent() {
        let rep = verify_suite(&DomainSpec::local_model_s9(), Suite::S9Example, &SuiteConfig::default()).unwrap();
        assert!(rep.passed, "{:?}", rep.checks);
        assert_eq!(rep.table.len(), 8);
    }

    #[test]
    fn csv_is_reproducible() {
        let ball = DomainSpec::unit_ball(2);
        let a = verify_suite(&ball, Suite::Symmetry, &small(10)).unwrap();
        let b = verify_suite(&ball, Suite::Symmetry, &small(10)).unwrap();
        assert_eq!(a.csv_string().unwrap(), b.csv_string().unwrap());
    }
}
