//! Interval bounds for the Kobayashi-Royden metric and Kobayashi distance,
//! plus the explicit estimator formulas they are compared with.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ball::{kobayashi_ball, royden_ball};
use crate::cvec::{CVec, PointC, VectorC};
use crate::domain::{boundary_frame, BoundaryFrame, DomainSpec, Family, DELTA_FLOOR};
use crate::error::{Error, Result};
use crate::numeric::{bisect, golden_min, rel_diff, GL5};

/// Constant used by the estimator forms until a calibration supplies one.
pub const DEFAULT_ESTIMATOR_C: f64 = 0.01;

static BRACKETS_BUILT: AtomicU64 = AtomicU64::new(0);
static BRACKETS_VIOLATED: AtomicU64 = AtomicU64::new(0);

/// Process-wide `(constructed, violated)` counts for [`IntervalValue::new`].
pub fn bracket_counts() -> (u64, u64) {
    (
        BRACKETS_BUILT.load(Ordering::Relaxed),
        BRACKETS_VIOLATED.load(Ordering::Relaxed),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalValue {
    pub lower: f64,
    pub upper: f64,
}

impl IntervalValue {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        BRACKETS_BUILT.fetch_add(1, Ordering::Relaxed);
        let r = Self::check(lower, upper);
        if r.is_err() {
            BRACKETS_VIOLATED.fetch_add(1, Ordering::Relaxed);
        }
        r
    }

    fn check(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower < 0.0 {
            return Err(Error::Bracket { lower, upper });
        }
        if lower > upper {
            // tolerate last-bit disagreement between two exact formulas
            if lower - upper <= 1e-12 * upper.max(1e-300) {
                return Ok(IntervalValue { lower: upper, upper });
            }
            return Err(Error::Bracket { lower, upper });
        }
        Ok(IntervalValue { lower, upper })
    }

    pub fn contains(&self, x: f64, rtol: f64) -> bool {
        x >= self.lower * (1.0 - rtol) && x <= self.upper * (1.0 + rtol)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConstants {
    pub c: f64,
    pub big_c: f64,
}

impl EstimatorConstants {
    pub fn new(c: f64, big_c: f64) -> Result<Self> {
        if !(c > 0.0 && big_c > c && big_c.is_finite()) {
            return Err(Error::Config(format!("constants need 0 < c < C, got {c}, {big_c}")));
        }
        Ok(EstimatorConstants { c, big_c })
    }
}

/// Where distances and metrics come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Backend {
    /// Closed forms; unit ball only.
    ExactBall,
    /// Certified lower/upper bounds on any bounded family.
    Interval,
}

impl Backend {
    pub fn id(&self) -> &'static str {
        match self {
            Backend::ExactBall => "exact-ball",
            Backend::Interval => "interval",
        }
    }

    pub fn require(&self, domain: &DomainSpec) -> Result<()> {
        match self {
            Backend::ExactBall if !is_unit_ball(domain) => Err(Error::Capability {
                backend: self.id().into(),
                what: format!("exact distances on the {} family", domain.family.name()),
            }),
            Backend::Interval if domain.enclosing_ball().is_none() => Err(Error::Capability {
                backend: self.id().into(),
                what: "a certified lower bound (no enclosing ball)".into(),
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-ball" => Ok(Backend::ExactBall),
            "interval" => Ok(Backend::Interval),
            other => Err(Error::Config(format!("unknown backend `{other}` (exact-ball | interval)"))),
        }
    }
}

/// The unit ball in its standard position.
pub fn is_unit_ball(domain: &DomainSpec) -> bool {
    domain.family == Family::UnitBall
        && domain
            .placement
            .as_ref()
            .is_none_or(|m| m.is_unitary(1e-12) && m.translation.norm() < 1e-15)
}

pub(crate) fn checked_frame(domain: &DomainSpec, z: &PointC) -> Result<BoundaryFrame> {
    let f = boundary_frame(domain, z)?;
    if f.signed_delta >= 0.0 {
        return Err(Error::Geometry(format!("{z:.6} is not an interior point")));
    }
    if f.delta < DELTA_FLOOR {
        return Err(Error::DeltaFloor {
            delta: f.delta,
            floor: DELTA_FLOOR,
        });
    }
    Ok(f)
}

/// Distance from `z` to the boundary of the slice `{z + ζV}` measured in the
/// ζ-plane, with `V = v/|v|`: the radius of the largest affine disc about `z`
/// in direction `v` contained in the domain.
pub fn disc_radius(domain: &DomainSpec, z: &PointC, v: &VectorC) -> Result<f64> {
    let dir = v
        .normalized()
        .ok_or_else(|| Error::Degenerate("zero tangent vector".into()))?;
    let quad = match &domain.family {
        Family::UnitBall => Some(vec![1.0; domain.dim]),
        Family::Ellipsoid { coeffs } => Some(coeffs.clone()),
        _ => None,
    };
    if let Some(a) = quad {
        // the slice is the disc {A|ζ|^2 + 2 Re(ζB) + C < 0} in model coordinates
        let x = domain.to_model(z)?;
        let u = match &domain.placement {
            Some(m) => m.inverse()?.apply_linear(&dir),
            None => dir,
        };
        let big_a: f64 = a.iter().zip(u.iter()).map(|(aj, uj)| aj * uj.norm_sqr()).sum();
        let big_b: Complex64 = a.iter().zip(x.iter().zip(u.iter())).map(|(aj, (xj, uj))| xj.conj() * uj * *aj).sum();
        let big_c: f64 = a.iter().zip(x.iter()).map(|(aj, xj)| aj * xj.norm_sqr()).sum::<f64>() - 1.0;
        if big_c >= 0.0 {
            return Err(Error::Geometry("disc radius requested at a non-interior point".into()));
        }
        let b = big_b.norm() / big_a;
        let r = (b * b - big_c / big_a).sqrt();
        // r - b without cancellation
        return Ok((-big_c / big_a) / (r + b));
    }
    generic_disc_radius(domain, z, &dir)
}

fn first_exit(domain: &DomainSpec, z: &PointC, u: &CVec, smax: f64) -> f64 {
    let inside = |s: f64| {
        let p = z + &(u * s);
        domain.in_region(&p) && domain.value_unchecked(&p) < 0.0
    };
    let steps = 256;
    let mut prev = 0.0;
    for k in 1..=steps {
        let s = smax * k as f64 / steps as f64;
        if !inside(s) {
            return bisect(|t| if inside(t) { -1.0 } else { 1.0 }, prev, s, 1e-15).unwrap_or(prev);
        }
        prev = s;
    }
    smax
}

fn generic_disc_radius(domain: &DomainSpec, z: &PointC, dir: &CVec) -> Result<f64> {
    if !(domain.value(z)? < 0.0) {
        return Err(Error::Geometry("disc radius requested at a non-interior point".into()));
    }
    let smax = match domain.enclosing_ball() {
        Some((c, r)) => r + c.dist(z),
        None => 2.0 * crate::domain::S9_RADIUS,
    };
    let ray = |theta: f64| first_exit(domain, z, &dir.scale_c(Complex64::from_polar(1.0, theta)), smax);
    let m = 64;
    let step = std::f64::consts::TAU / m as f64;
    let (mut best_k, mut best) = (0usize, f64::INFINITY);
    for k in 0..m {
        let r = ray(k as f64 * step);
        if r < best {
            best = r;
            best_k = k;
        }
    }
    let centre = best_k as f64 * step;
    let (_, refined) = golden_min(ray, centre - step, centre + step, 1e-10);
    Ok(best.min(refined))
}

/// Upper bound `|v| / R` for the Kobayashi-Royden metric, with `R` the
/// largest affine disc radius in direction `v`.
pub fn royden_upper(domain: &DomainSpec, z: &PointC, v: &VectorC) -> Result<f64> {
    if v.norm() == 0.0 {
        return Ok(0.0);
    }
    Ok(v.norm() / disc_radius(domain, z, v)?)
}

fn enclosing(domain: &DomainSpec) -> Result<(PointC, f64)> {
    domain.enclosing_ball().ok_or_else(|| {
        Error::Config(format!(
            "no enclosing ball is configured for the {} family",
            domain.family.name()
        ))
    })
}

pub fn royden_interval(domain: &DomainSpec, z: &PointC, v: &VectorC) -> Result<IntervalValue> {
    let (c, r) = enclosing(domain)?;
    checked_frame(domain, z)?;
    if v.norm() == 0.0 {
        return Err(Error::Degenerate("zero tangent vector".into()));
    }
    let lower = royden_ball(&((z - &c) * (1.0 / r)), &(v * (1.0 / r)))?;
    let upper = royden_upper(domain, z, v)?;
    IntervalValue::new(lower, upper)
}

/// `‖v_z‖/δ(z) + ‖v‖/√δ(z)`.
pub fn ma_estimator(domain: &DomainSpec, z: &PointC, v: &VectorC) -> Result<f64> {
    let f = checked_frame(domain, z)?;
    Ok(ma_from_frame(&f, v))
}

pub(crate) fn ma_from_frame(f: &BoundaryFrame, v: &VectorC) -> f64 {
    v.inner(&f.outer_normal).norm() / f.delta + v.norm() / f.delta.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathBound {
    pub value: f64,
    /// False when the optimiser failed and `value` is the straight-path bound.
    pub optimized: bool,
}

type MetricFn<'a> = Box<dyn Fn(&PointC, &VectorC) -> f64 + Sync + 'a>;

fn path_metric<'a>(domain: &'a DomainSpec, backend: Backend) -> Result<MetricFn<'a>> {
    backend.require(domain)?;
    Ok(match backend {
        Backend::ExactBall => Box::new(|p: &PointC, v: &VectorC| royden_ball(p, v).unwrap_or(f64::INFINITY)),
        Backend::Interval => Box::new(move |p: &PointC, v: &VectorC| {
            if !domain.in_region(p) || !(domain.value_unchecked(p) < 0.0) {
                return f64::INFINITY;
            }
            royden_upper(domain, p, v).unwrap_or(f64::INFINITY)
        }),
    })
}

fn gl_panel(metric: &MetricFn<'_>, a: &PointC, v: &VectorC, s0: f64, s1: f64) -> f64 {
    let h = s1 - s0;
    GL5.iter()
        .map(|(s, w)| w * h * metric(&(a + &(v * (s0 + h * s))), v))
        .sum()
}

fn adaptive(metric: &MetricFn<'_>, a: &PointC, v: &VectorC, s0: f64, s1: f64, whole: f64, depth: u32) -> f64 {
    let m = 0.5 * (s0 + s1);
    let left = gl_panel(metric, a, v, s0, m);
    let right = gl_panel(metric, a, v, m, s1);
    let both = left + right;
    if !both.is_finite() {
        return f64::INFINITY;
    }
    if depth == 0 || (both - whole).abs() <= 1e-11 * both.max(1e-300) {
        return both;
    }
    adaptive(metric, a, v, s0, m, left, depth - 1) + adaptive(metric, a, v, m, s1, right, depth - 1)
}

/// Metric length of the straight segment `[a, b]` by adaptive Gauss-Legendre.
fn seg_len(metric: &MetricFn<'_>, a: &PointC, b: &PointC) -> f64 {
    let v = b - a;
    if v.norm() == 0.0 {
        return 0.0;
    }
    let whole = gl_panel(metric, a, &v, 0.0, 1.0);
    if !whole.is_finite() {
        return f64::INFINITY;
    }
    adaptive(metric, a, &v, 0.0, 1.0, whole, 24)
}

/// Parameter `s` at which the metric length of `[a, a + s(b - a)]` is half
/// of the whole segment.
fn metric_midpoint(metric: &MetricFn<'_>, a: &PointC, b: &PointC) -> PointC {
    let total = seg_len(metric, a, b);
    if !total.is_finite() || total == 0.0 {
        return (a + b) * 0.5;
    }
    let v = b - a;
    let s = bisect(
        |s| seg_len(metric, a, &(a + &(&v * s))) - 0.5 * total,
        0.0,
        1.0,
        1e-10,
    )
    .unwrap_or(0.5);
    a + &(&v * s)
}

fn path_len(metric: &MetricFn<'_>, nodes: &[PointC]) -> f64 {
    nodes.windows(2).map(|w| seg_len(metric, &w[0], &w[1])).sum()
}

/// Coordinate descent on the interior nodes.
fn descend(metric: &MetricFn<'_>, nodes: &mut [PointC]) -> f64 {
    let n = nodes.len();
    let dim = nodes[0].dim();
    let mut cur = path_len(metric, nodes);
    for _sweep in 0..400 {
        let before = cur;
        for i in 1..n - 1 {
            for r in 0..2 * dim {
                let mut e = CVec::zeros(dim);
                e[r / 2] = if r % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
                let h = 0.25 * nodes[i - 1].dist(&nodes[i]).min(nodes[i].dist(&nodes[i + 1]));
                if h == 0.0 {
                    continue;
                }
                let base = nodes[i].clone();
                let local = |s: f64| {
                    let p = &base + &(&e * s);
                    seg_len(metric, &nodes[i - 1], &p) + seg_len(metric, &p, &nodes[i + 1])
                };
                let f0 = local(0.0);
                let (s, fs) = golden_min(local, -h, h, h * 1e-6);
                if fs < f0 {
                    nodes[i] = &base + &(&e * s);
                }
            }
        }
        cur = path_len(metric, nodes);
        if !(before - cur > 1e-5 * cur) {
            break;
        }
    }
    cur
}

fn refine(metric: &MetricFn<'_>, nodes: &[PointC]) -> Vec<PointC> {
    let mut out = Vec::with_capacity(2 * nodes.len());
    for w in nodes.windows(2) {
        out.push(w[0].clone());
        out.push(metric_midpoint(metric, &w[0], &w[1]));
    }
    out.push(nodes.last().unwrap().clone());
    out
}

fn split_longest(metric: &MetricFn<'_>, nodes: &mut Vec<PointC>) {
    let (i, _) = nodes
        .windows(2)
        .map(|w| seg_len(metric, &w[0], &w[1]))
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let m = metric_midpoint(metric, &nodes[i], &nodes[i + 1]);
    nodes.insert(i + 1, m);
}

/// Optimised polyline from `seed` (three nodes) up to `segments` segments,
/// with the value at each intermediate power-of-two level.
fn multilevel(metric: &MetricFn<'_>, seed: Vec<PointC>, segments: usize) -> (Vec<PointC>, Vec<(usize, f64)>) {
    let mut nodes = seed;
    let mut history = Vec::new();
    if segments == 1 {
        let v = path_len(metric, &[nodes[0].clone(), nodes.last().unwrap().clone()]);
        return (vec![nodes[0].clone(), nodes.last().unwrap().clone()], vec![(1, v)]);
    }
    loop {
        let v = descend(metric, &mut nodes);
        history.push((nodes.len() - 1, v));
        let segs = nodes.len() - 1;
        if segs == segments {
            return (nodes, history);
        }
        if 2 * segs <= segments {
            nodes = refine(metric, &nodes);
        } else {
            while nodes.len() - 1 < segments {
                split_longest(metric, &mut nodes);
            }
        }
    }
}

/// Seeds: the straight segment and an arc bent toward the anchor point.
fn seeds(domain: &DomainSpec, z: &PointC, w: &PointC) -> Vec<Vec<PointC>> {
    let mid = (z + w) * 0.5;
    let anchor = domain.anchor();
    let pull = anchor.dist(&mid);
    let mut out = vec![vec![z.clone(), mid.clone(), w.clone()]];
    if pull > 0.0 {
        let amount = (0.5 * z.dist(w)).min(0.9 * pull) / pull;
        let bent = &mid + &(&(&anchor - &mid) * amount);
        out.push(vec![z.clone(), bent, w.clone()]);
    }
    out
}

/// Minimised length of polylines from `z` to `w` under the backend's metric
/// (exact on the ball, the affine-disc upper bound otherwise).
pub fn kobayashi_upper_path(
    domain: &DomainSpec,
    z: &PointC,
    w: &PointC,
    segments: usize,
    backend: Backend,
) -> Result<PathBound> {
    Ok(upper_path_with_history(domain, z, w, segments, backend)?.0)
}

/// As [`kobayashi_upper_path`], also returning the value reached at every
/// intermediate refinement level.
pub fn upper_path_with_history(
    domain: &DomainSpec,
    z: &PointC,
    w: &PointC,
    segments: usize,
    backend: Backend,
) -> Result<(PathBound, Vec<(usize, f64)>)> {
    if segments == 0 {
        return Err(Error::Config("at least one segment is required".into()));
    }
    checked_frame(domain, z)?;
    checked_frame(domain, w)?;
    if z == w {
        return Ok((PathBound { value: 0.0, optimized: true }, vec![]));
    }
    let metric = path_metric(domain, backend)?;
    let straight = seg_len(&metric, z, w);
    let mut best: Option<(f64, Vec<(usize, f64)>)> = None;
    for seed in seeds(domain, z, w) {
        let (_, hist) = multilevel(&metric, seed, segments);
        let v = hist.last().map(|h| h.1).unwrap_or(f64::INFINITY);
        if v.is_finite() && best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, hist));
        }
    }
    match best {
        Some((v, hist)) => Ok((PathBound { value: v, optimized: true }, hist)),
        None if straight.is_finite() => Ok((
            PathBound {
                value: straight,
                optimized: false,
            },
            vec![(1, straight)],
        )),
        None => Err(Error::Convergence {
            what: "path optimiser",
            residual: f64::INFINITY,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KobayashiLower {
    /// Distance in the enclosing ball; a certified lower bound.
    pub certified: f64,
    /// `log((1 + c‖z−w‖/√δz)(1 + c‖z−w‖/√δw))`; not certified.
    pub product_estimate: f64,
    /// `log(1 + c‖(z−w)_z‖/(√δz √δw))`; not certified.
    pub normal_estimate: f64,
}

impl KobayashiLower {
    pub fn best(&self) -> f64 {
        self.certified.max(self.product_estimate).max(self.normal_estimate)
    }
}

pub fn kobayashi_lower(domain: &DomainSpec, z: &PointC, w: &PointC, c: f64) -> Result<KobayashiLower> {
    let fz = checked_frame(domain, z)?;
    let fw = checked_frame(domain, w)?;
    let (center, r) = enclosing(domain)?;
    let certified = kobayashi_ball(&((z - &center) * (1.0 / r)), &((w - &center) * (1.0 / r)))?;
    let d = z.dist(w);
    let (sz, sw) = (fz.delta.sqrt(), fw.delta.sqrt());
    let normal = (z - w).inner(&fz.outer_normal).norm();
    Ok(KobayashiLower {
        certified,
        product_estimate: ((1.0 + c * d / sz) * (1.0 + c * d / sw)).ln(),
        normal_estimate: (c * normal / (sz * sw)).ln_1p(),
    })
}

/// `log(1 + C‖z−w‖/(√δz √δw))`.
pub fn dini_upper_estimator(domain: &DomainSpec, z: &PointC, w: &PointC, big_c: f64) -> Result<f64> {
    let fz = checked_frame(domain, z)?;
    let fw = checked_frame(domain, w)?;
    Ok((big_c * z.dist(w) / (fz.delta.sqrt() * fw.delta.sqrt())).ln_1p())
}

/// `‖z−w‖ / (‖z−w‖^½ + δz^½ + δw^½)`.
pub fn comparison_g(dzw: f64, delta_z: f64, delta_w: f64) -> f64 {
    if dzw == 0.0 {
        return 0.0;
    }
    dzw / (dzw.sqrt() + delta_z.sqrt() + delta_w.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGap {
    pub g: f64,
    /// `C0 · g`, the additive comparison bound for `l − k`.
    pub l_minus_k_bound: f64,
    /// Certified bound for `k/c`: upper Kobayashi bound over the
    /// Carathéodory lower bound (1 on the ball).
    pub k_over_c_bound: f64,
    pub k_lower: f64,
    pub k_upper: f64,
}

/// Number of polyline segments used when an interval upper bound is needed.
pub const DEFAULT_PATH_SEGMENTS: usize = 16;

pub fn comparison_gap(domain: &DomainSpec, z: &PointC, w: &PointC, backend: Backend, c0: f64) -> Result<ComparisonGap> {
    backend.require(domain)?;
    let fz = checked_frame(domain, z)?;
    let fw = checked_frame(domain, w)?;
    let g = comparison_g(z.dist(w), fz.delta, fw.delta);
    let (kl, ku) = match backend {
        Backend::ExactBall => {
            let k = kobayashi_ball(z, w)?;
            (k, k)
        }
        Backend::Interval => {
            let kl = kobayashi_lower(domain, z, w, DEFAULT_ESTIMATOR_C)?.certified;
            let ku = kobayashi_upper_path(domain, z, w, DEFAULT_PATH_SEGMENTS, backend)?.value;
            (kl, ku)
        }
    };
    IntervalValue::new(kl, ku)?;
    Ok(ComparisonGap {
        g,
        l_minus_k_bound: c0 * g,
        k_over_c_bound: if kl > 0.0 { ku / kl } else { 1.0 },
        k_lower: kl,
        k_upper: ku,
    })
}

/// Relative agreement helper used by the suites.
pub fn agrees(a: f64, b: f64, rtol: f64) -> bool {
    rel_diff(a, b) <= rtol
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn royden_interval_on_the_ball() {
        let b = DomainSpec::unit_ball(2);
        let x = 0.6;
        let z = CVec::from_real(&[x, 0.0]);
        let iv = royden_interval(&b, &z, &CVec::basis(2, 0)).unwrap();
        assert_relative_eq!(iv.upper, 1.0 / (1.0 - x), epsilon = 1e-14);
        assert!(iv.contains(1.0 / (1.0 - x * x), 1e-14));
        let o = royden_interval(&b, &CVec::zeros(2), &CVec(vec![c(0.3, 0.4), c(0.0, 0.0)])).unwrap();
        assert_relative_eq!(o.lower, 0.5, epsilon = 1e-15);
        assert_relative_eq!(o.upper, 0.5, epsilon = 1e-15);
        assert!(royden_interval(&DomainSpec::local_model_s9(), &CVec::from_real(&[-0.1, 0.0]), &CVec::basis(2, 0))
            .is_err_and(|e| matches!(e, Error::Config(_))));
    }

    #[test]
    fn disc_radius_closed_form_matches_ray_search() {
        let e = DomainSpec::ellipsoid(&[1.0, 4.0]).unwrap();
        let z = CVec(vec![c(0.3, 0.1), c(0.1, -0.2)]);
        let v = CVec(vec![c(0.2, 0.5), c(-0.4, 0.1)]);
        let exact = disc_radius(&e, &z, &v).unwrap();
        let generic = generic_disc_radius(&e, &z, &v.normalized().unwrap()).unwrap();
        assert_relative_eq!(exact, generic, max_relative = 1e-8);
    }

    #[test]
    fn ma_estimator_examples() {
        let b = DomainSpec::unit_ball(2);
        let s = 0.01;
        let z = CVec::from_real(&[1.0 - s, 0.0]);
        assert_relative_eq!(
            ma_estimator(&b, &z, &CVec::basis(2, 0)).unwrap(),
            1.0 / s + 1.0 / s.sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(ma_estimator(&b, &z, &CVec::basis(2, 1)).unwrap(), 1.0 / s.sqrt(), max_relative = 1e-12);
        let v = CVec(vec![c(0.3, 0.1), c(0.2, 0.2)]);
        assert_relative_eq!(
            ma_estimator(&b, &z, &(&v * 2.0)).unwrap(),
            2.0 * ma_estimator(&b, &z, &v).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn upper_path_reproduces_ball_distance() {
        let b = DomainSpec::unit_ball(2);
        let w = CVec::from_real(&[0.5, 0.0]);
        let p = kobayashi_upper_path(&b, &CVec::zeros(2), &w, 64, Backend::ExactBall).unwrap();
        assert!(p.optimized);
        assert!((p.value - 0.5f64.atanh()).abs() < 5e-3);
        assert_eq!(kobayashi_upper_path(&b, &w, &w, 8, Backend::ExactBall).unwrap().value, 0.0);
    }

    #[test]
    fn bent_pair_needs_the_optimiser() {
        let b = DomainSpec::unit_ball(2);
        let z = CVec::from_real(&[0.95, 0.0]);
        let w = CVec(vec![c(0.0, 0.0), c(0.0, 0.95)]);
        let k = kobayashi_ball(&z, &w).unwrap();
        let (p, hist) = upper_path_with_history(&b, &z, &w, 32, Backend::ExactBall).unwrap();
        assert!(p.value >= k * (1.0 - 1e-9), "{} vs {k} {hist:?}", p.value);
        assert!((p.value - k) / k < 5e-3, "{} vs {k}", p.value);
        for h in hist.windows(2) {
            assert!(h[1].1 <= h[0].1 + 1e-6);
        }
    }

    #[test]
    fn lower_bound_on_ball_is_exact() {
        let b = DomainSpec::unit_ball(2);
        let z = CVec(vec![c(0.3, 0.1), c(0.2, -0.4)]);
        let w = CVec(vec![c(-0.1, 0.2), c(0.5, 0.1)]);
        let l = kobayashi_lower(&b, &z, &w, 0.01).unwrap();
        assert_relative_eq!(l.certified, kobayashi_ball(&z, &w).unwrap(), epsilon = 1e-15);
        let zero = kobayashi_lower(&b, &z, &z, 0.01).unwrap();
        assert_eq!(zero.best(), 0.0);
    }

    #[test]
    fn dini_example() {
        let b = DomainSpec::unit_ball(2);
        let v = dini_upper_estimator(&b, &CVec::zeros(2), &CVec::from_real(&[0.5, 0.0]), 1.0).unwrap();
        assert_relative_eq!(v, (1.0 + 0.5 / 0.5f64.sqrt()).ln(), epsilon = 1e-15);
        assert!((v - 0.5348).abs() < 1e-4);
    }

    #[test]
    fn comparison_quantities() {
        assert_eq!(comparison_g(0.0, 0.1, 0.2), 0.0);
        let b = DomainSpec::unit_ball(2);
        let z = CVec::from_real(&[0.5, 0.0]);
        let w = CVec::from_real(&[0.0, 0.4]);
        let gap = comparison_gap(&b, &z, &w, Backend::ExactBall, 2.0).unwrap();
        assert!(gap.g <= z.dist(&w).sqrt());
        assert_eq!(gap.k_over_c_bound, 1.0);
        assert!(comparison_gap(&DomainSpec::ellipsoid(&[1.0, 2.0]).unwrap(), &z, &w, Backend::ExactBall, 2.0).is_err());
    }

    #[test]
    fn backend_strings() {
        assert_eq!("interval".parse::<Backend>().unwrap(), Backend::Interval);
        assert_eq!(Backend::ExactBall.to_string(), "exact-ball");
        assert!("magic".parse::<Backend>().is_err());
    }
}
