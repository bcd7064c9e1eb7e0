//! Diagnostics for complex and real geodesics: max-δ reparametrization,
//! diameter/derivative invariants, the balance quantity and length ratios.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::DiscMap;
use crate::curve::SampledCurve;
use crate::cvec::PointC;
use crate::domain::{boundary_frame, DomainSpec};
use crate::error::{Error, Result};
use crate::numeric::golden_min;

pub const DEFAULT_ANGLES: usize = 256;
pub const DEFAULT_RADII: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscInvariants {
    pub diameter: f64,
    pub max_delta: f64,
    pub max_derivative: f64,
    pub tangency_defect: f64,
}

/// Depth below the boundary; negative outside.
fn depth(domain: &DomainSpec, x: &PointC) -> f64 {
    match boundary_frame(domain, x) {
        Ok(f) => -f.signed_delta,
        Err(_) => f64::NEG_INFINITY,
    }
}

fn polar(r: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(r, theta)
}

/// `<φ'(ζ), η>` at the projection of `φ(ζ)`; vanishes at interior critical
/// points of `δ∘φ`.
fn tangency_residual(domain: &DomainSpec, disc: &DiscMap, zeta: Complex64) -> Option<Complex64> {
    let f = boundary_frame(domain, &disc.eval(zeta)).ok()?;
    Some(disc.derivative(zeta).inner(&f.outer_normal))
}

/// Newton polish of a critical point of `δ∘φ` with a difference Jacobian.
fn polish(domain: &DomainSpec, disc: &DiscMap, start: Complex64) -> Complex64 {
    let mut z = start;
    let Some(mut f) = tangency_residual(domain, disc, z) else {
        return start;
    };
    let h = 1e-7;
    for _ in 0..20 {
        if f.norm() < 1e-15 {
            break;
        }
        let (Some(fx), Some(fy)) = (
            tangency_residual(domain, disc, z + Complex64::new(h, 0.0)),
            tangency_residual(domain, disc, z + Complex64::new(0.0, h)),
        ) else {
            break;
        };
        let (a, c) = ((fx.re - f.re) / h, (fx.im - f.im) / h);
        let (b, d) = ((fy.re - f.re) / h, (fy.im - f.im) / h);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (d * f.re - b * f.im) / det;
        let dy = (-c * f.re + a * f.im) / det;
        let next = z - Complex64::new(dx, dy);
        if next.norm() >= 1.0 {
            break;
        }
        match tangency_residual(domain, disc, next) {
            Some(fn_) if fn_.norm() < f.norm() => {
                z = next;
                f = fn_;
            }
            _ => break,
        }
    }
    z
}

/// Disc parameter maximizing `δ∘φ`, from a polar grid refined by
/// golden-section and polished by Newton on the tangency residual.
pub fn max_delta_parameter(domain: &DomainSpec, disc: &DiscMap, angles: usize, radii: usize) -> Result<(Complex64, f64)> {
    if angles < 8 || radii < 4 {
        return Err(Error::Config("max-δ grid needs at least 8 angles and 4 radii".into()));
    }
    let nodes: Vec<(usize, Complex64)> = (0..radii)
        .flat_map(|j| {
            let r = j as f64 / (radii - 1) as f64;
            let count = if j == 0 { 1 } else { angles };
            (0..count).map(move |k| (j, polar(r, std::f64::consts::TAU * k as f64 / angles as f64)))
        })
        .collect();
    let values: Vec<f64> = nodes.par_iter().map(|(_, z)| depth(domain, &disc.eval(*z))).collect();
    let (best, &dbest) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    if !dbest.is_finite() {
        return Err(Error::Geometry("disc image misses the working region".into()));
    }
    if nodes[best].0 == radii - 1 {
        return Err(Error::Degenerate("maximal boundary distance sits on the boundary circle".into()));
    }
    let cell = 1.0 / (radii - 1) as f64;
    let mut z = nodes[best].1;
    let neg = |x: Complex64| {
        if x.norm() >= 1.0 {
            f64::INFINITY
        } else {
            -depth(domain, &disc.eval(x))
        }
    };
    for _ in 0..4 {
        let (x, _) = golden_min(|x| neg(Complex64::new(x, z.im)), z.re - cell, z.re + cell, 1e-12);
        z.re = x;
        let (y, _) = golden_min(|y| neg(Complex64::new(z.re, y)), z.im - cell, z.im + cell, 1e-12);
        z.im = y;
    }
    let polished = polish(domain, disc, z);
    let z = if neg(polished) <= neg(z) + 1e-15 { polished } else { z };
    if z.norm() > 1.0 - 0.5 * cell {
        return Err(Error::Degenerate("maximal boundary distance sits on the boundary circle".into()));
    }
    Ok((z, -neg(z)))
}

/// Precomposes the disc with a disc automorphism so that `δ(φ(0))` is maximal.
pub fn reparametrize_max_delta(domain: &DomainSpec, disc: &DiscMap) -> Result<DiscMap> {
    let (z, _) = max_delta_parameter(domain, disc, DEFAULT_ANGLES, DEFAULT_RADII)?;
    Ok(disc.precompose(z))
}

fn ring(disc: &DiscMap, n: usize) -> Vec<PointC> {
    (0..n)
        .map(|k| disc.eval(polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)))
        .collect()
}

fn ring_diameter(pts: &[PointC]) -> (f64, usize, usize) {
    let mut best = (0.0, 0, 0);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i].dist(&pts[j]);
            if d > best.0 {
                best = (d, i, j);
            }
        }
    }
    best
}

/// Euclidean diameter of the image of the closed disc.
pub fn disc_diameter(disc: &DiscMap, grid: usize) -> Result<f64> {
    if grid < 8 {
        return Err(Error::Config("diameter grid needs at least 8 angles".into()));
    }
    let pts = ring(disc, grid);
    let (raw, i, j) = ring_diameter(&pts);
    let coarse = ring_diameter(&ring(disc, grid / 2)).0;
    let step = std::f64::consts::TAU / grid as f64;
    let (mut a, mut b) = (step * i as f64, step * j as f64);
    let chord = |a: f64, b: f64| -disc.eval(polar(1.0, a)).dist(&disc.eval(polar(1.0, b)));
    for _ in 0..3 {
        a = golden_min(|x| chord(x, b), a - step, a + step, 1e-12).0;
        b = golden_min(|x| chord(a, x), b - step, b + step, 1e-12).0;
    }
    let refined = (-chord(a, b)).max(raw);
    if (refined - coarse) > 1e-2 * refined {
        return Err(Error::Resolution(format!(
            "diameter moved from {coarse:.6e} to {refined:.6e} under refinement; use a finer grid"
        )));
    }
    Ok(refined)
}

pub fn disc_invariants(domain: &DomainSpec, disc: &DiscMap, grid: usize) -> Result<DiscInvariants> {
    let diameter = disc_diameter(disc, grid)?;
    let zero = Complex64::new(0.0, 0.0);
    let f0 = boundary_frame(domain, &disc.eval(zero))?;
    let grid_depth = (1..grid / 4)
        .into_par_iter()
        .flat_map_iter(|j| {
            let r = j as f64 / (grid / 4) as f64;
            (0..grid).map(move |k| polar(r, std::f64::consts::TAU * k as f64 / grid as f64))
        })
        .map(|z| depth(domain, &disc.eval(z)))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let step = std::f64::consts::TAU / grid as f64;
    let speed = |t: f64| disc.derivative(polar(1.0, t)).norm();
    let (k, _) = (0..grid)
        .map(|k| (k, speed(step * k as f64)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let (t, neg) = golden_min(|t| -speed(t), step * (k as f64 - 1.0), step * (k as f64 + 1.0), 1e-12);
    let d0 = disc.derivative(zero);
    Ok(DiscInvariants {
        diameter,
        max_delta: f0.delta.max(grid_depth),
        max_derivative: (-neg).max(speed(step * k as f64)).max(speed(t)),
        tangency_defect: d0.inner(&f0.outer_normal).norm() / d0.norm(),
    })
}

/// `(‖(z−w)_z‖/‖z−w‖ + δ(z)^½ + ‖z−w‖) / d_e(φ)` for two points of the disc image.
pub fn theorem5_balance(domain: &DomainSpec, disc: &DiscMap, z: &PointC, w: &PointC) -> Result<f64> {
    let d = z.dist(w);
    if d == 0.0 {
        return Err(Error::Degenerate("balance needs two distinct points".into()));
    }
    if disc.preimage(z).is_none() || disc.preimage(w).is_none() {
        return Err(Error::Geometry("points are not on the disc image".into()));
    }
    let f = boundary_frame(domain, z)?;
    let normal = (z - w).inner(&f.outer_normal).norm();
    Ok((normal / d + f.delta.sqrt() + d) / disc_diameter(disc, DEFAULT_ANGLES)?)
}

/// Infinitesimal balance at a disc parameter (interior or on the circle):
/// `(‖φ'(ζ)_{φ(ζ)}‖/‖φ'(ζ)‖ + δ(φ(ζ))^½) / d_e(φ)`.
pub fn infinitesimal_balance(domain: &DomainSpec, disc: &DiscMap, zeta: Complex64) -> Result<f64> {
    if zeta.norm() > 1.0 + 1e-12 {
        return Err(Error::Config("disc parameter outside the closed disc".into()));
    }
    let x = disc.eval(zeta);
    let f = boundary_frame(domain, &x)?;
    let v = disc.derivative(zeta);
    Ok((v.inner(&f.outer_normal).norm() / v.norm() + f.delta.sqrt()) / disc_diameter(disc, DEFAULT_ANGLES)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthRatios {
    /// Euclidean length over the endpoint gap.
    pub gehring: f64,
    /// Euclidean length over `D(γ)^½`, `D` the largest δ along the curve.
    pub prop3: f64,
    pub length: f64,
    pub max_delta: f64,
}

pub fn length_ratios(domain: &DomainSpec, curve: &SampledCurve) -> Result<LengthRatios> {
    let gap = curve.first().dist(curve.last());
    if gap == 0.0 {
        return Err(Error::Degenerate("curve endpoints coincide".into()));
    }
    let deltas: Vec<f64> = curve
        .points
        .par_iter()
        .map(|p| boundary_frame(domain, p).map(|f| f.delta))
        .collect::<Result<_>>()?;
    let max_delta = deltas.iter().cloned().fold(0.0, f64::max);
    let length = curve.euclidean_length();
    Ok(LengthRatios {
        gehring: length / gap,
        prop3: length / max_delta.sqrt(),
        length,
        max_delta,
    })
}
