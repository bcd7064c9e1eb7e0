//! Seeded, stratified pair samplers.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cvec::{CVec, PointC, VectorC};
use crate::domain::{boundary_frame, DomainSpec, DELTA_FLOOR, S9_RADIUS};
use crate::error::{Error, Result};
use crate::numeric::bisect;

/// Normal share `‖(z−w)_z‖/‖z−w‖` at or below which a pair is tangential.
pub const TANGENTIAL_MAX: f64 = 0.05;
/// Normal share at or above which a pair is transversal.
pub const TRANSVERSAL_MIN: f64 = 0.5;
pub const MAX_DRAWS: usize = 1_000_000;
/// Pairs closer than this are dropped (and counted).
pub const MIN_SEPARATION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegimeKind {
    Transversal,
    Tangential,
    /// Uniformly random difference direction, no angular constraint.
    Mixed,
    /// Two independently placed points.
    Interior,
}

impl RegimeKind {
    pub const ALL: [RegimeKind; 4] = [
        RegimeKind::Transversal,
        RegimeKind::Tangential,
        RegimeKind::Mixed,
        RegimeKind::Interior,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RegimeKind::Transversal => "transversal",
            RegimeKind::Tangential => "tangential",
            RegimeKind::Mixed => "mixed",
            RegimeKind::Interior => "interior",
        }
    }

    fn stream(&self) -> u64 {
        *self as u64 + 1
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegimeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RegimeKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown regime `{s}` (transversal | tangential | mixed | interior)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRegime {
    pub kind: RegimeKind,
    pub delta_range: [f64; 2],
    pub count: usize,
    pub seed: u64,
}

impl SampleRegime {
    pub fn new(kind: RegimeKind, delta_min: f64, delta_max: f64, count: usize, seed: u64) -> Result<Self> {
        let r = SampleRegime {
            kind,
            delta_range: [delta_min, delta_max],
            count,
            seed,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.delta_range;
        if !(lo >= DELTA_FLOOR && hi >= lo && hi.is_finite()) {
            return Err(Error::Config(format!("δ range [{lo}, {hi}] must satisfy {DELTA_FLOOR} ≤ δ_min ≤ δ_max")));
        }
        if self.count == 0 {
            return Err(Error::Config("regime count must be positive".into()));
        }
        Ok(())
    }

    pub fn with_count(&self, count: usize) -> Self {
        SampleRegime { count, ..*self }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SampleRegime { seed, ..*self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairSet {
    pub kind: RegimeKind,
    pub pairs: Vec<(PointC, PointC)>,
    /// Candidates dropped for `‖z−w‖ < MIN_SEPARATION`.
    pub excluded_close: usize,
    pub draws: usize,
}

fn gaussian_cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec(
        (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect(),
    )
}

/// `k` orthonormal vectors of complex `n`-space (`k ≤ n`).
pub(crate) fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<CVec> {
    let mut out: Vec<CVec> = Vec::with_capacity(k);
    while out.len() < k {
        let mut g = gaussian_cvec(rng, n);
        for b in &out {
            g = &g - &b.scale_c(g.inner(b));
        }
        if g.norm() > 1e-6 {
            out.push(g.normalized().unwrap());
        }
    }
    out
}

pub(crate) fn unit_cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    loop {
        if let Some(u) = gaussian_cvec(rng, n).normalized() {
            return u;
        }
    }
}

pub(crate) fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn ray_extent(domain: &DomainSpec) -> f64 {
    let a = domain.anchor();
    match domain.enclosing_ball() {
        Some((c, r)) => 1.01 * (r + c.dist(&a)),
        None => 2.0 * S9_RADIUS,
    }
}

/// A boundary point hit by a random ray from the anchor, with its outer normal.
fn random_boundary_point(domain: &DomainSpec, rng: &mut ChaCha8Rng, extent: f64) -> Option<(PointC, VectorC)> {
    let a = domain.anchor();
    let u = unit_cvec(rng, domain.dim);
    let t = bisect(|t| domain.value_unchecked(&(&a + &(&u * t))), 0.0, extent, 1e-15)?;
    let p = &a + &(&u * t);
    if !domain.in_region(&p) {
        return None;
    }
    let jet = domain.jet(&p).ok()?;
    Some((p, jet.gradient.normalized()?))
}

#[derive(Default)]
struct Rejections {
    boundary: usize,
    depth_z: usize,
    depth_w: usize,
    tangent_space: usize,
}

impl Rejections {
    fn worst(&self) -> &'static str {
        let list = [
            (self.boundary, "boundary ray search"),
            (self.depth_z, "δ(z) range / unique projection of z"),
            (self.depth_w, "δ(w) range (w interior)"),
            (self.tangent_space, "complex-tangent direction (dimension 1)"),
        ];
        list.iter().max_by_key(|x| x.0).unwrap().1
    }
}

/// Interior point `p − δη` checked to have depth `δ` in range and projection `p`.
fn drop_inside(domain: &DomainSpec, p: &PointC, eta: &VectorC, delta: f64, range: [f64; 2]) -> Option<PointC> {
    let z = p - &(eta * delta);
    let f = boundary_frame(domain, &z).ok()?;
    let ok = f.signed_delta < 0.0
        && f.delta >= range[0]
        && f.delta <= range[1]
        && f.projection.dist(p) <= 1e-8 * (1.0 + delta);
    ok.then_some(z)
}

fn depth_in_range(domain: &DomainSpec, w: &PointC, range: [f64; 2]) -> bool {
    boundary_frame(domain, w).is_ok_and(|f| f.signed_delta < 0.0 && f.delta >= range[0] && f.delta <= range[1])
}

pub fn sample_pairs(domain: &DomainSpec, regime: &SampleRegime) -> Result<Vec<(PointC, PointC)>> {
    Ok(sample_pair_set(domain, regime)?.pairs)
}

/// Rejection sampler. The stream is a pure function of `(seed, kind)`, and a
/// larger `count` extends the list produced by a smaller one.
pub fn sample_pair_set(domain: &DomainSpec, regime: &SampleRegime) -> Result<PairSet> {
    regime.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(regime.seed);
    rng.set_stream(regime.kind.stream());
    let range = regime.delta_range;
    let extent = ray_extent(domain);
    let n = domain.dim;
    let mut rej = Rejections::default();
    let mut set = PairSet {
        kind: regime.kind,
        pairs: Vec::with_capacity(regime.count),
        excluded_close: 0,
        draws: 0,
    };
    while set.pairs.len() < regime.count {
        if set.draws >= MAX_DRAWS {
            return Err(Error::Sampling(format!(
                "{} regime: {} of {} pairs after {MAX_DRAWS} draws; most rejections from {}",
                regime.kind,
                set.pairs.len(),
                regime.count,
                rej.worst()
            )));
        }
        set.draws += 1;
        let Some((p, eta)) = random_boundary_point(domain, &mut rng, extent) else {
            rej.boundary += 1;
            continue;
        };
        let dz = log_uniform(&mut rng, range[0], range[1]);
        let Some(z) = drop_inside(domain, &p, &eta, dz, range) else {
            rej.depth_z += 1;
            continue;
        };
        let w = match regime.kind {
            RegimeKind::Interior => {
                let Some((q, nu)) = random_boundary_point(domain, &mut rng, extent) else {
                    rej.boundary += 1;
                    continue;
                };
                let dw = log_uniform(&mut rng, range[0], range[1]);
                match drop_inside(domain, &q, &nu, dw, range) {
                    Some(w) => w,
                    None => {
                        rej.depth_w += 1;
                        continue;
                    }
                }
            }
            kind => {
                let dir = match kind {
                    RegimeKind::Mixed => unit_cvec(&mut rng, n),
                    _ => {
                        let share = if kind == RegimeKind::Tangential {
                            TANGENTIAL_MAX * rng.random::<f64>()
                        } else {
                            TRANSVERSAL_MIN + (1.0 - TRANSVERSAL_MIN) * rng.random::<f64>()
                        };
                        let g = gaussian_cvec(&mut rng, n);
                        let t = (&g - &eta.scale_c(g.inner(&eta))).normalized();
                        let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>());
                        match t {
                            Some(t) if n > 1 => &eta.scale_c(phase * share) + &(&t * (1.0 - share * share).sqrt()),
                            _ if share >= 1.0 - 1e-15 => eta.scale_c(phase),
                            _ => {
                                rej.tangent_space += 1;
                                continue;
                            }
                        }
                    }
                };
                let len = log_uniform(&mut rng, 1e-7, extent);
                &z + &(&dir * len)
            }
        };
        if !depth_in_range(domain, &w, range) {
            rej.depth_w += 1;
            continue;
        }
        if z.dist(&w) < MIN_SEPARATION {
            set.excluded_close += 1;
            continue;
        }
        set.pairs.push((z, w));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_regime_respects_delta_range() {
        let b = DomainSpec::unit_ball(2);
        let r = SampleRegime::new(RegimeKind::Interior, 0.3, 0.9, 200, 7).unwrap();
        for (z, w) in sample_pairs(&b, &r).unwrap() {
            for x in [z, w] {
                let d = 1.0 - x.norm();
                assert!((0.3..=0.9).contains(&d));
            }
        }
    }

    #[test]
    fn angular_constraints_hold() {
        let b = DomainSpec::unit_ball(3);
        for (kind, ok) in [
            (RegimeKind::Tangential, (|s: f64| s <= TANGENTIAL_MAX) as fn(f64) -> bool),
            (RegimeKind::Transversal, |s: f64| s >= TRANSVERSAL_MIN - 1e-12),
        ] {
            let r = SampleRegime::new(kind, 1e-4, 0.5, 300, 11).unwrap();
            for (z, w) in sample_pairs(&b, &r).unwrap() {
                let f = boundary_frame(&b, &z).unwrap();
                let share = (&z - &w).inner(&f.outer_normal).norm() / z.dist(&w);
                assert!(ok(share), "{kind}: {share}");
            }
        }
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let e = DomainSpec::ellipsoid(&[1.0, 2.0]).unwrap();
        let r = SampleRegime::new(RegimeKind::Mixed, 1e-3, 0.3, 50, 5).unwrap();
        let a = sample_pairs(&e, &r).unwrap();
        assert_eq!(a, sample_pairs(&e, &r).unwrap());
        let b = sample_pairs(&e, &r.with_count(100)).unwrap();
        assert_eq!(&b[..50], &a[..]);
        assert_ne!(a, sample_pairs(&e, &r.with_seed(6)).unwrap());
    }

    #[test]
    fn invalid_regimes_and_exhaustion() {
        assert!(SampleRegime::new(RegimeKind::Mixed, 1e-13, 0.3, 5, 1).is_err());
        assert!(SampleRegime::new(RegimeKind::Mixed, 0.3, 0.1, 5, 1).is_err());
        assert!(SampleRegime::new(RegimeKind::Mixed, 0.1, 0.3, 0, 1).is_err());
        // the disc has no complex-tangent directions
        let b = DomainSpec::unit_ball(1);
        let r = SampleRegime::new(RegimeKind::Tangential, 1e-3, 0.1, 1, 1).unwrap();
        assert!(matches!(sample_pairs(&b, &r), Err(Error::Sampling(_))));
    }
}
