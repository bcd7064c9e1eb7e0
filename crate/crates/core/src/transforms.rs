//! Möbius maps, ball automorphisms, boundary normalisation and normal rays.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::affine::{matvec, AffineMap, CMat};
use crate::bounds::royden_upper;
use crate::curve::SampledCurve;
use crate::cvec::{CVec, PointC};
use crate::domain::{boundary_frame, tangent_basis, DomainSpec, Family, DELTA_FLOOR};
use crate::error::{Error, Result};
use crate::numeric::bisect;

/// Fraction of the transversal separation used as the length of each normal
/// ray in [`normal_ray_pair`].
pub const DEFAULT_RAY_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    t: f64,
}

impl ScalingParams {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.abs() < 1.0) {
            return Err(Error::Config(format!("scaling parameter must satisfy |t| < 1, got {t}")));
        }
        Ok(ScalingParams { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// `m_t(ζ) = (ζ + t)/(1 + tζ)`.
pub fn mobius(t: f64, zeta: Complex64) -> Complex64 {
    (zeta + t) / (1.0 + t * zeta)
}

/// `A_t(z) = (m_t(z_1), sqrt(1 - t^2) z' / (1 + t z_1))`.
pub fn ball_automorphism(t: f64, z: &PointC) -> Result<PointC> {
    let den = 1.0 + t * z[0];
    if den.norm() < 1e-14 {
        return Err(Error::Singularity(den.norm()));
    }
    let s = (1.0 - t * t).sqrt();
    let mut out = z.clone();
    out[0] = (z[0] + t) / den;
    for j in 1..z.dim() {
        out[j] = z[j] * s / den;
    }
    Ok(out)
}

/// `x -> U x + b` with `U` unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidMap {
    pub unitary: CMat,
    pub translation: CVec,
}

impl RigidMap {
    pub fn apply(&self, x: &PointC) -> PointC {
        matvec(&self.unitary, x) + &self.translation
    }

    pub fn apply_linear(&self, v: &CVec) -> CVec {
        matvec(&self.unitary, v)
    }

    pub fn inverse_apply(&self, y: &PointC) -> PointC {
        matvec(&self.unitary.adjoint(), &(y - &self.translation))
    }

    pub fn to_affine(&self) -> AffineMap {
        AffineMap {
            linear: self.unitary.clone(),
            translation: self.translation.clone(),
        }
    }

    pub fn unitary_defect(&self) -> f64 {
        self.to_affine().unitary_defect()
    }
}

/// Unitary whose first row is `conj(η)`, so that `Uη = e_1`.
fn unitary_sending_to_e1(eta: &CVec) -> CMat {
    let n = eta.dim();
    let tb = tangent_basis(eta);
    let mut u = CMat::zeros(n, n);
    for k in 0..n {
        u[(0, k)] = eta[k].conj();
        for (i, b) in tb.iter().enumerate() {
            u[(i + 1, k)] = b[k].conj();
        }
    }
    u
}

/// Rigid motion sending `p` to `e_1` and the outer normal at `p` to `e_1`.
pub fn normalize_boundary(domain: &DomainSpec, p: &PointC) -> Result<RigidMap> {
    let jet = domain.jet(p)?;
    let gn = jet.gradient.norm();
    if gn < 1e-12 {
        return Err(Error::Geometry("degenerate gradient".into()));
    }
    if jet.value.abs() > 1e-8 * gn.max(1.0) {
        return Err(Error::Geometry(format!("point is not on the boundary (ρ = {:.3e})", jet.value)));
    }
    let eta = jet.gradient.normalized().unwrap();
    let unitary = unitary_sending_to_e1(&eta);
    let e1 = CVec::basis(p.dim(), 0);
    let translation = &e1 - &matvec(&unitary, p);
    Ok(RigidMap { unitary, translation })
}

/// Second-order normalisation at `p`.
///
/// Ellipsoids (and balls) are mapped exactly onto the unit ball by an affine
/// map; every other family only receives the rigid part. The second value is
/// the remaining second-order defect at `e_1`: the largest deviation of the
/// tangential signed-distance Hessian from that of the unit sphere.
pub fn osculating_normalization(domain: &DomainSpec, p: &PointC) -> Result<(AffineMap, f64)> {
    let rigid = normalize_boundary(domain, p)?;
    let map = match (&domain.family, &domain.placement) {
        (Family::Ellipsoid { coeffs }, None) => {
            let n = coeffs.len();
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                coeffs.iter().map(|a| Complex64::new(a.sqrt(), 0.0)),
            ));
            let q = matvec(&d, p);
            let u = unitary_sending_to_e1(&q.normalized().unwrap());
            AffineMap {
                linear: &u * &d,
                translation: CVec::zeros(n),
            }
        }
        _ => rigid.to_affine(),
    };
    let image = domain.placed(&map)?;
    let e1 = CVec::basis(domain.dim, 0);
    let jet = image.jet(&e1)?;
    let gn = jet.gradient.norm();
    let basis: Vec<CVec> = tangent_basis(&jet.gradient)
        .into_iter()
        .flat_map(|b| [b.clone(), b.scale_c(Complex64::new(0.0, 1.0))])
        .collect();
    let k = basis.len();
    let h = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        jet.real_hessian(&basis[i], &basis[j]) / gn - if i == j { 1.0 } else { 0.0 }
    });
    let defect = if k == 0 {
        0.0
    } else {
        nalgebra::SymmetricEigen::new(h)
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()))
    };
    Ok((map, defect))
}

/// Largest `T` such that `z + t·n_in` stays interior for `t ∈ [0, T]`.
fn admissible_ray_length(domain: &DomainSpec, z: &PointC, dir: &CVec, t_max: f64) -> f64 {
    let inside = |t: f64| domain.in_region(&(z + &(dir * t))) && domain.value_unchecked(&(z + &(dir * t))) < 0.0;
    let steps = 1024;
    let mut prev = 0.0;
    for k in 1..=steps {
        let t = t_max * k as f64 / steps as f64;
        if !inside(t) {
            let f = |s: f64| if inside(s) { -1.0 } else { 1.0 };
            return bisect(f, prev, t, 1e-14).unwrap_or(prev);
        }
        prev = t;
    }
    t_max
}

/// Samples of the inward normal ray from `z` on `[0, T]`.
pub fn normal_ray_curve(domain: &DomainSpec, z: &PointC, t_end: f64, samples: usize) -> Result<SampledCurve> {
    let frame = boundary_frame(domain, z)?;
    if frame.signed_delta >= 0.0 {
        return Err(Error::Geometry("normal rays start at interior points".into()));
    }
    if t_end == 0.0 {
        return Ok(SampledCurve::single(z.clone()));
    }
    if !(t_end > 0.0) || samples < 2 {
        return Err(Error::Degenerate("a ray needs T > 0 and at least two samples".into()));
    }
    let dir = frame.inner_normal();
    let admissible = admissible_ray_length(domain, z, &dir, t_end);
    if admissible < t_end {
        return Err(Error::Range {
            requested: t_end,
            max_admissible: admissible,
        });
    }
    let times: Vec<f64> = (0..samples).map(|j| t_end * j as f64 / (samples - 1) as f64).collect();
    let points = times.iter().map(|t| z + &(&dir * *t)).collect();
    SampledCurve::new(times, points)
}

/// The discontinuous pair curve made of the inward normal ray from `z`
/// followed by the reversed inward normal ray from `w`, each of length
/// `fraction · ‖(z - w)_z‖`.
pub fn normal_ray_pair(
    domain: &DomainSpec,
    z: &PointC,
    w: &PointC,
    fraction: f64,
    samples_per_ray: usize,
) -> Result<SampledCurve> {
    let fz = boundary_frame(domain, z)?;
    let normal = (z - w).inner(&fz.outer_normal).norm();
    let t_end = fraction * normal;
    if t_end <= 0.0 {
        return Err(Error::Degenerate("pair has no transversal separation".into()));
    }
    let a = normal_ray_curve(domain, z, t_end, samples_per_ray)?;
    let b = normal_ray_curve(domain, w, t_end, samples_per_ray)?;
    let mut times = a.times.clone();
    let mut points = a.points.clone();
    let jump = points.len() - 1;
    for (t, p) in b.times.iter().zip(&b.points).rev() {
        if *t == t_end {
            // both rays meet the parameter t_end; keep the first one
            times.push(t_end + 1e-12 * t_end.max(1.0));
        } else {
            times.push(2.0 * t_end - t);
        }
        points.push(p.clone());
    }
    SampledCurve::new(times, points)?.with_jumps(vec![jump])
}

/// Upper bound for the Kobayashi length of an interior curve, integrating the
/// affine-disc bound of the Kobayashi-Royden metric.
pub fn curve_kobayashi_length_upper(domain: &DomainSpec, curve: &SampledCurve) -> Result<f64> {
    if curve.len() < 2 {
        return Ok(0.0);
    }
    curve.check_interior(domain)?;
    curve.length_with(|p, v| royden_upper(domain, p, v), 1e-4)
}

fn radial_boundary_scale(domain: &DomainSpec, x: &PointC) -> Option<f64> {
    let f = |s: f64| domain.value_unchecked(&(x * s));
    if f(1.0) == 0.0 {
        return Some(1.0);
    }
    // nearest sign change to s = 1
    let mut h = 1e-3;
    while h < 1.0 {
        for (a, b) in [(1.0 - h, 1.0), (1.0, 1.0 + h)] {
            let fa = f(a);
            let fb = f(b);
            if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() {
                return bisect(f, a, b, 1e-15);
            }
        }
        h *= 2.0;
    }
    None
}

/// `max |‖A_{-t}(q)‖ - 1|` over sampled boundary points `q` whose images have
/// `Re z_1 > -1/2`; the domain must already be normalised at `e_1`.
pub fn scaling_hausdorff_defect(domain: &DomainSpec, t: f64, boundary_samples: usize) -> Result<f64> {
    ScalingParams::new(t)?;
    let n = domain.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5CA1_AB1E);
    let mut worst = 0.0f64;
    let mut used = 0usize;
    let mut draws = 0usize;
    while used < boundary_samples && draws < 100 * boundary_samples {
        draws += 1;
        let xi = CVec(
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect(),
        )
        .normalized()
        .unwrap();
        if xi[0].re <= -0.5 {
            continue;
        }
        let x = ball_automorphism(t, &xi)?;
        let Some(s) = radial_boundary_scale(domain, &x) else {
            continue;
        };
        let q = &x * s;
        let Ok(y) = ball_automorphism(-t, &q) else {
            continue;
        };
        if y[0].re <= -0.5 {
            continue;
        }
        worst = worst.max((y.norm() - 1.0).abs());
        used += 1;
    }
    if used == 0 {
        return Err(Error::Sampling("no boundary sample survived the half-space filter".into()));
    }
    Ok(worst)
}

/// True if δ increases strictly along the samples of `curve`.
pub fn delta_is_increasing(domain: &DomainSpec, curve: &SampledCurve, tol: f64) -> Result<bool> {
    let mut prev = f64::NEG_INFINITY;
    for p in &curve.points {
        let d = boundary_frame(domain, p)?.delta;
        if d < DELTA_FLOOR {
            return Err(Error::DeltaFloor { delta: d, floor: DELTA_FLOOR });
        }
        if d + tol <= prev {
            return Ok(false);
        }
        prev = d;
    }
    Ok(true)
}
