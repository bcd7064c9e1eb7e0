//! `(λ, ε)`-quasi-geodesic diagnostics for sampled curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{kobayashi_ball, royden_ball};
use crate::bounds::{kobayashi_lower, royden_upper, Backend, DEFAULT_ESTIMATOR_C};
use crate::curve::SampledCurve;
use crate::domain::DomainSpec;
use crate::error::Result;

/// Additive slack accepted when picking the multiplicative constant.
pub const DEFAULT_EPSILON_BUDGET: f64 = 1.0;
pub const LAMBDA_GRID: [f64; 13] = [1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5, 3.75, 4.0];
const MAX_NODES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicQuality {
    pub lambda: f64,
    pub epsilon: f64,
    /// False when no grid λ reaches the ε budget; `lambda` is then the largest.
    pub within_budget: bool,
    /// `(λ, smallest admissible ε)` for every grid λ.
    pub table: Vec<(f64, f64)>,
}

pub fn quasi_geodesic_quality(domain: &DomainSpec, curve: &SampledCurve, backend: Backend) -> Result<GeodesicQuality> {
    quasi_geodesic_quality_with(domain, curve, backend, DEFAULT_EPSILON_BUDGET)
}

/// Lengths between sampled parameters (up to 64 nodes) against the distance
/// of their endpoints. With the interval backend, lengths use the metric upper
/// bound and distances the certified lower bound, so the result is conservative.
pub fn quasi_geodesic_quality_with(
    domain: &DomainSpec,
    curve: &SampledCurve,
    backend: Backend,
    budget: f64,
) -> Result<GeodesicQuality> {
    backend.require(domain)?;
    curve.check_interior(domain)?;
    let seg = match backend {
        Backend::ExactBall => curve.segment_lengths(royden_ball, 1e-6)?,
        Backend::Interval => curve.segment_lengths(|p, v| royden_upper(domain, p, v), 1e-6)?,
    };
    let mut prefix = vec![0.0];
    for s in &seg {
        prefix.push(prefix.last().unwrap() + s);
    }
    let n = curve.len();
    let nodes: Vec<usize> = if n <= MAX_NODES {
        (0..n).collect()
    } else {
        let mut v: Vec<usize> = (0..MAX_NODES).map(|k| k * (n - 1) / (MAX_NODES - 1)).collect();
        v.dedup();
        v
    };
    let pairs: Vec<(usize, usize)> = (0..nodes.len())
        .flat_map(|a| (a + 1..nodes.len()).map(move |b| (a, b)))
        .collect();
    let samples: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (i, j) = (nodes[a], nodes[b]);
            let (p, q) = (&curve.points[i], &curve.points[j]);
            let k = match backend {
                Backend::ExactBall => kobayashi_ball(p, q)?,
                Backend::Interval => kobayashi_lower(domain, p, q, DEFAULT_ESTIMATOR_C)?.certified,
            };
            Ok((prefix[j] - prefix[i], k))
        })
        .collect::<Result<_>>()?;
    let table: Vec<(f64, f64)> = LAMBDA_GRID
        .iter()
        .map(|&lam| {
            let eps = samples.iter().map(|(l, k)| l - lam * k).fold(0.0, f64::max);
            (lam, eps)
        })
        .collect();
    let pick = table.iter().find(|(_, e)| *e <= budget);
    let (lambda, epsilon) = pick.copied().unwrap_or(*table.last().unwrap());
    Ok(GeodesicQuality {
        lambda,
        epsilon,
        within_budget: pick.is_some(),
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::real_geodesic_ball;
    use crate::cvec::CVec;
    use crate::transforms::normal_ray_pair;

    #[test]
    fn exact_geodesic_is_one_zero() {
        let b = DomainSpec::unit_ball(2);
        let z = CVec::from_real(&[0.6, 0.1]);
        let w = CVec::from_real(&[-0.2, 0.7]);
        let g = real_geodesic_ball(&z, &w, 200).unwrap();
        let q = quasi_geodesic_quality(&b, &g, Backend::ExactBall).unwrap();
        assert_eq!(q.lambda, 1.0);
        assert!(q.epsilon < 1e-4, "{}", q.epsilon);
    }

    #[test]
    fn normal_ray_pair_is_a_two_quasi_geodesic() {
        let b = DomainSpec::unit_ball(2);
        let z = CVec::from_real(&[0.99, 0.0]);
        let w = CVec::from_real(&[0.95, 0.3]);
        let sigma = normal_ray_pair(&b, &z, &w, 0.1, 40).unwrap();
        let q = quasi_geodesic_quality(&b, &sigma, Backend::ExactBall).unwrap();
        assert!(q.lambda <= 2.0 && q.epsilon.is_finite(), "{q:?}");
    }

    #[test]
    fn arcs_hugging_the_boundary_degrade() {
        let b = DomainSpec::unit_ball(2);
        let mut last = (0.0, 0.0);
        for s in [1e-1, 1e-2, 1e-3] {
            let r = 1.0 - s;
            let pts: Vec<CVec> = (0..=50)
                .map(|i| {
                    let t = std::f64::consts::FRAC_PI_2 * i as f64 / 50.0;
                    CVec::from_real(&[r * t.cos(), r * t.sin()])
                })
                .collect();
            let c = SampledCurve::new((0..=50).map(|i| i as f64).collect(), pts).unwrap();
            let q = quasi_geodesic_quality(&b, &c, Backend::ExactBall).unwrap();
            assert!((q.lambda, q.epsilon) > last, "{q:?}");
            last = (q.lambda, q.epsilon);
        }
        assert!(last.0 > 1.0);
    }
}
