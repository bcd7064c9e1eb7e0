//! Closed-form invariant objects on the unit ball.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::SampledCurve;
use crate::cvec::{PointC, VectorC};
use crate::error::{Error, Result};

fn check_inside(z: &PointC) -> Result<f64> {
    let r2 = z.norm_sqr();
    if !(r2 < 1.0) || !z.is_finite() {
        return Err(Error::OutsideBall(r2.sqrt()));
    }
    Ok(r2)
}

/// Hyperbolic distance on the unit disc.
pub fn poincare_distance(a: Complex64, b: Complex64) -> f64 {
    let num = (a - b).norm();
    let den = (Complex64::new(1.0, 0.0) - a.conj() * b).norm();
    if num == 0.0 {
        return 0.0;
    }
    let t = (num / den).min(1.0);
    t.atanh()
}

/// Kobayashi (= Carathéodory = Lempert) distance of the unit ball.
pub fn kobayashi_ball(z: &PointC, w: &PointC) -> Result<f64> {
    let rz = check_inside(z)?;
    let rw = check_inside(w)?;
    // |1 - <z,w>|^2 (1 - t^2) = (1 - |z|^2)(1 - |w|^2)
    let den = (Complex64::new(1.0, 0.0) - z.inner(w)).norm_sqr();
    // |z−w|² − |z∧w|² rewritten with d = w − z, free of cancellation
    let d = w - z;
    let num = (1.0 - rz) * d.norm_sqr() + z.inner(&d).norm_sqr();
    let t = (num / den).sqrt();
    if t == 0.0 {
        return Ok(0.0);
    }
    if t < 0.5 {
        return Ok(t.atanh());
    }
    let log_one_minus_t2 = (-rz).ln_1p() + (-rw).ln_1p() - den.ln();
    Ok((t.ln_1p() - 0.5 * log_one_minus_t2).max(0.0))
}

/// Kobayashi-Royden metric of the unit ball.
pub fn royden_ball(z: &PointC, v: &VectorC) -> Result<f64> {
    let r2 = check_inside(z)?;
    let s = 1.0 - r2;
    Ok((v.norm_sqr() / s + v.inner(z).norm_sqr() / (s * s)).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BergmanValue {
    /// Bergman kernel on the diagonal, `K(z, z)`.
    pub kernel: f64,
    /// Bergman metric `β(z; v)`.
    pub metric: f64,
}

pub fn bergman_ball(z: &PointC, v: &VectorC) -> Result<BergmanValue> {
    let r2 = check_inside(z)?;
    let n = z.dim();
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let kernel = fact / std::f64::consts::PI.powi(n as i32) / (1.0 - r2).powi(n as i32 + 1);
    let metric = ((n + 1) as f64).sqrt() * royden_ball(z, v)?;
    Ok(BergmanValue { kernel, metric })
}

/// Bergman distance of the ball in closed form.
pub fn bergman_distance_ball(z: &PointC, w: &PointC) -> Result<f64> {
    Ok(((z.dim() + 1) as f64).sqrt() * kobayashi_ball(z, w)?)
}

/// Bergman length of the ball geodesic from `z` to `w`, integrated
/// numerically and refined until the relative change drops below `rtol`.
pub fn bergman_length_along_geodesic(z: &PointC, w: &PointC, rtol: f64) -> Result<f64> {
    if z == w {
        return Ok(0.0);
    }
    let mut samples = 9;
    let mut prev = f64::NAN;
    loop {
        let curve = real_geodesic_ball(z, w, samples)?;
        let len = curve.length_with(|p, v| Ok(bergman_ball(p, v)?.metric), rtol * 0.1)?;
        if crate::numeric::rel_diff(len, prev) < rtol {
            return Ok(len);
        }
        if samples > 1 << 14 {
            return Err(Error::Resolution(format!(
                "Bergman length not converged: {prev} vs {len}"
            )));
        }
        prev = len;
        samples = 2 * samples - 1;
    }
}

/// An analytic disc `φ(ζ) = center + (a·m(ζ) + b)·direction` with
/// `m(ζ) = (ζ + ζ0)/(1 + conj(ζ0) ζ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscMap {
    pub center: PointC,
    pub direction: VectorC,
    pub scale: Complex64,
    pub offset: Complex64,
    pub pre: Complex64,
}

fn mobius_c(c: Complex64, z: Complex64) -> Complex64 {
    (z + c) / (Complex64::new(1.0, 0.0) + c.conj() * z)
}

impl DiscMap {
    pub fn affine(center: PointC, direction: VectorC, scale: Complex64, offset: Complex64) -> Result<Self> {
        let direction = direction
            .normalized()
            .ok_or_else(|| Error::Degenerate("zero disc direction".into()))?;
        if scale.norm() == 0.0 {
            return Err(Error::Degenerate("disc with zero radius".into()));
        }
        Ok(DiscMap {
            center,
            direction,
            scale,
            offset,
            pre: Complex64::new(0.0, 0.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Coordinate of `φ(ζ)` along the direction, relative to the center.
    pub fn local(&self, zeta: Complex64) -> Complex64 {
        self.scale * mobius_c(self.pre, zeta) + self.offset
    }

    pub fn eval(&self, zeta: Complex64) -> PointC {
        &self.center + &self.direction.scale_c(self.local(zeta))
    }

    pub fn derivative(&self, zeta: Complex64) -> VectorC {
        let one = Complex64::new(1.0, 0.0);
        let d = one + self.pre.conj() * zeta;
        let dm = (one - self.pre.norm_sqr()) / (d * d);
        self.direction.scale_c(self.scale * dm)
    }

    /// Disc parameter of a point on the image line, if it lies in the image.
    pub fn preimage(&self, x: &PointC) -> Option<Complex64> {
        let rel = x - &self.center;
        let xi = rel.inner(&self.direction);
        if (&rel - &self.direction.scale_c(xi)).norm() > 1e-9 * (1.0 + rel.norm()) {
            return None;
        }
        let u = (xi - self.offset) / self.scale;
        let zeta = mobius_c(-self.pre, u);
        (zeta.norm() <= 1.0 + 1e-12).then_some(zeta)
    }

    /// `φ ∘ m_c` written again in normal form.
    pub fn precompose(&self, c: Complex64) -> DiscMap {
        let one = Complex64::new(1.0, 0.0);
        let value = mobius_c(self.pre, c);
        let d = one + self.pre.conj() * c;
        let deriv = (one - self.pre.norm_sqr()) / (d * d) * (1.0 - c.norm_sqr());
        let rot = deriv / (1.0 - value.norm_sqr());
        let rot = rot / rot.norm();
        DiscMap {
            scale: self.scale * rot,
            pre: rot.conj() * value,
            ..self.clone()
        }
    }
}

/// The ball's complex geodesic through `z` and `w`: the slice by their complex
/// affine line, parametrised as a disc centred at the point of the line
/// closest to the origin.
pub fn complex_geodesic_ball(z: &PointC, w: &PointC) -> Result<DiscMap> {
    check_inside(z)?;
    check_inside(w)?;
    let u = (w - z)
        .normalized()
        .ok_or_else(|| Error::Degenerate("complex geodesic through a single point".into()))?;
    let c = z - &u.scale_c(z.inner(&u));
    let r = (1.0 - c.norm_sqr()).sqrt();
    DiscMap::affine(c, u, Complex64::new(r, 0.0), Complex64::new(0.0, 0.0))
}

/// Unit-speed real geodesic from `z` to `w` sampled at `samples` points.
pub fn real_geodesic_ball(z: &PointC, w: &PointC, samples: usize) -> Result<SampledCurve> {
    if samples < 2 {
        return Err(Error::Degenerate("a geodesic needs at least two samples".into()));
    }
    let disc = complex_geodesic_ball(z, w)?;
    let zz = disc.preimage(z).ok_or_else(|| Error::Geometry("z not on its geodesic".into()))?;
    let zw = disc.preimage(w).ok_or_else(|| Error::Geometry("w not on its geodesic".into()))?;
    let d = kobayashi_ball(z, w)?;
    if d == 0.0 {
        return Err(Error::Degenerate("geodesic between equal points".into()));
    }
    // sample outward from the midpoint so that neither end is rounded onto the circle
    let target = mobius_c(-zz, zw);
    let m = mobius_c(zz, target / target.norm() * (0.5 * d).tanh());
    let u = mobius_c(-m, zw);
    let u = u / u.norm();
    let mut times = Vec::with_capacity(samples);
    let mut points = Vec::with_capacity(samples);
    for j in 0..samples {
        let tau = d * j as f64 / (samples - 1) as f64;
        let p = if j == 0 {
            z.clone()
        } else if j == samples - 1 {
            w.clone()
        } else {
            disc.eval(mobius_c(m, u * (tau - 0.5 * d).tanh()))
        };
        times.push(tau);
        points.push(p);
    }
    SampledCurve::new(times, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::cvec::CVec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn distance_from_origin_is_artanh() {
        let k = kobayashi_ball(&CVec::zeros(2), &CVec::from_real(&[0.5, 0.0])).unwrap();
        assert_relative_eq!(k, 0.5f64.atanh(), epsilon = 1e-15);
        let z = CVec(vec![c(0.1, 0.2), c(-0.3, 0.1)]);
        assert_eq!(kobayashi_ball(&z, &z).unwrap(), 0.0);
        assert!(kobayashi_ball(&CVec::from_real(&[1.0, 0.0]), &z).is_err());
    }

    #[test]
    fn distance_stays_accurate_near_the_sphere() {
        // along a radius the distance is artanh(r2) - artanh(r1)
        let r1 = 1.0 - 1e-10;
        let r2 = 1.0 - 1e-11;
        let k = kobayashi_ball(&CVec::from_real(&[r1, 0.0]), &CVec::from_real(&[r2, 0.0])).unwrap();
        let exact = 0.5 * ((1.0 + r2) / (1.0 + r1)).ln() + 0.5 * (1e-10f64 / 1e-11).ln();
        assert_relative_eq!(k, exact, max_relative = 1e-5);
    }

    #[test]
    fn royden_reference_values() {
        let v = CVec(vec![c(0.3, -0.4), c(0.0, 1.2)]);
        assert_relative_eq!(royden_ball(&CVec::zeros(2), &v).unwrap(), v.norm(), epsilon = 1e-15);
        let r = 0.6;
        let z = CVec::from_real(&[r, 0.0]);
        assert_relative_eq!(royden_ball(&z, &CVec::basis(2, 0)).unwrap(), 1.0 / (1.0 - r * r), epsilon = 1e-14);
        assert_relative_eq!(
            royden_ball(&z, &CVec::basis(2, 1)).unwrap(),
            1.0 / (1.0 - r * r).sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn royden_is_the_derivative_of_the_distance() {
        let z = CVec(vec![c(0.3, 0.2), c(-0.1, 0.4)]);
        for v in [CVec::basis(2, 0), CVec::basis(2, 1), CVec(vec![c(0.2, 0.7), c(-0.5, 0.1)])] {
            let h = 1e-6;
            let dq = kobayashi_ball(&z, &(&z + &(&v * h))).unwrap() / h;
            assert_relative_eq!(dq, royden_ball(&z, &v).unwrap(), max_relative = 1e-5);
        }
    }

    #[test]
    fn bergman_kernel_matches_monomial_series_at_origin_and_off_it() {
        // K(z,z) = sum_alpha |z^alpha|^2 / ||z^alpha||^2 with
        // ||z^alpha||^2 = pi^N alpha! / (N + |alpha|)!
        let n = 2usize;
        let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
        let z = CVec(vec![c(0.3, 0.1), c(0.0, -0.2)]);
        let mut series = 0.0;
        for total in 0..200usize {
            let mut layer = 0.0;
            for a1 in 0..=total {
                let a2 = total - a1;
                let mono = z[0].norm_sqr().powi(a1 as i32) * z[1].norm_sqr().powi(a2 as i32);
                let norm2 = std::f64::consts::PI.powi(n as i32) * fact(a1) * fact(a2) / fact(n + total);
                layer += mono / norm2;
            }
            series += layer;
            if layer < 1e-18 * series {
                break;
            }
        }
        let k = bergman_ball(&z, &CVec::basis(2, 0)).unwrap().kernel;
        assert_relative_eq!(k, series, max_relative = 1e-12);
        let k0 = bergman_ball(&CVec::zeros(2), &CVec::basis(2, 0)).unwrap().kernel;
        assert_relative_eq!(k0, 2.0 / std::f64::consts::PI.powi(2), epsilon = 1e-15);
    }

    #[test]
    fn bergman_metric_is_log_kernel_hessian_at_origin() {
        // β(0; v)^2 = Σ ∂²log K/∂z_j∂z̄_k v_j v̄_k; along e1 the Laplacian of
        // log K in the real plane of z1 is 4 ∂∂̄.
        let n = 2;
        let h = 1e-4;
        let logk = |x: f64, y: f64| {
            bergman_ball(&CVec(vec![c(x, y), c(0.0, 0.0)]), &CVec::basis(n, 0))
                .unwrap()
                .kernel
                .ln()
        };
        let lap = (logk(h, 0.0) + logk(-h, 0.0) + logk(0.0, h) + logk(0.0, -h) - 4.0 * logk(0.0, 0.0)) / (h * h);
        let beta2 = lap / 4.0;
        let metric = bergman_ball(&CVec::zeros(2), &CVec::basis(2, 0)).unwrap().metric;
        assert_relative_eq!(beta2.sqrt(), metric, max_relative = 1e-6);
        assert_relative_eq!(metric, 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn complex_geodesic_contains_both_points_and_is_isometric() {
        let z = CVec::from_real(&[0.3, 0.0]);
        let w = CVec::from_real(&[0.0, 0.3]);
        let d = complex_geodesic_ball(&z, &w).unwrap();
        let a = d.preimage(&z).unwrap();
        let b = d.preimage(&w).unwrap();
        assert!(d.eval(a).dist(&z) < 1e-14);
        assert!(d.eval(b).dist(&w) < 1e-14);
        assert_relative_eq!(poincare_distance(a, b), kobayashi_ball(&z, &w).unwrap(), epsilon = 1e-12);
        for t in [0.0, 1.0, 2.5] {
            let p = d.eval(Complex64::from_polar(0.7, t));
            assert!(((p[0] + p[1]).re - 0.3).abs() < 1e-14);
            assert!((p[0] + p[1]).im.abs() < 1e-14);
        }
        let diam = complex_geodesic_ball(&CVec::zeros(2), &CVec::from_real(&[0.5, 0.0])).unwrap();
        assert!(diam.eval(c(0.2, 0.3)).dist(&CVec(vec![c(0.2, 0.3), c(0.0, 0.0)])) < 1e-15);
    }

    #[test]
    fn precomposition_is_a_reparametrisation() {
        let z = CVec(vec![c(0.3, 0.1), c(0.2, -0.4)]);
        let w = CVec(vec![c(-0.1, 0.2), c(0.5, 0.1)]);
        let d = complex_geodesic_ball(&z, &w).unwrap();
        let a = c(0.3, -0.5);
        let e = d.precompose(a);
        for zeta in [c(0.0, 0.0), c(0.4, 0.1), c(-0.2, 0.7)] {
            assert!(e.eval(zeta).dist(&d.eval(mobius_c(a, zeta))) < 1e-13);
        }
        let f = e.precompose(c(-0.1, 0.2));
        let zeta = c(0.15, -0.3);
        assert!(f.eval(zeta).dist(&e.eval(mobius_c(c(-0.1, 0.2), zeta))) < 1e-13);
    }

    #[test]
    fn real_geodesic_has_unit_speed_and_right_endpoints() {
        let z = CVec(vec![c(0.3, 0.1), c(0.2, -0.4)]);
        let w = CVec(vec![c(-0.1, 0.2), c(0.5, 0.1)]);
        let g = real_geodesic_ball(&z, &w, 201).unwrap();
        let k = kobayashi_ball(&z, &w).unwrap();
        assert_relative_eq!(*g.times.last().unwrap(), k, epsilon = 1e-12);
        let mid = &g.points[100];
        assert_relative_eq!(
            kobayashi_ball(&z, mid).unwrap(),
            kobayashi_ball(mid, &w).unwrap(),
            epsilon = 1e-10
        );
        let len = g.length_with(|p, v| royden_ball(p, v), 1e-10).unwrap();
        assert_relative_eq!(len, k, max_relative = 1e-6);
        // collinear with the origin: straight segment
        let s = real_geodesic_ball(&CVec::from_real(&[-0.2, 0.0]), &CVec::from_real(&[0.6, 0.0]), 7).unwrap();
        assert!(s.points.iter().all(|p| p[1].norm() < 1e-15 && p[0].im.abs() < 1e-15));
    }

    #[test]
    fn real_geodesic_between_points_very_near_the_sphere() {
        let r = (1.0f64 - 1e-8).sqrt();
        let z = CVec(vec![Complex64::from_polar(r, 0.3), c(0.0, 0.0)]);
        let w = CVec(vec![Complex64::from_polar(r, 0.30001), c(0.0, 0.0)]);
        let g = real_geodesic_ball(&z, &w, 65).unwrap();
        assert!(g.points.iter().all(|p| p.norm_sqr() < 1.0));
        assert!(g.times.windows(2).all(|t| t[1] > t[0]));
        let mid = &g.points[32];
        assert_relative_eq!(
            kobayashi_ball(&z, mid).unwrap(),
            kobayashi_ball(mid, &w).unwrap(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn bergman_length_matches_closed_form() {
        let z = CVec(vec![c(0.3, 0.1), c(0.2, -0.4)]);
        let w = CVec(vec![c(-0.1, 0.2), c(0.5, 0.1)]);
        let l = bergman_length_along_geodesic(&z, &w, 1e-6).unwrap();
        assert_relative_eq!(l, bergman_distance_ball(&z, &w).unwrap(), max_relative = 1e-6);
    }
}
