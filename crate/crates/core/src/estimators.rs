//! Scalar quantities attached to pairs of points: A, the Balogh-Bonk g with
//! the box-ball proxy, h and its real variant, and linear-convexity scans.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{checked_frame, EstimatorConstants};
use crate::cvec::{CVec, PointC, VectorC};
use crate::domain::{boundary_frame, tangent_basis, BoundaryFrame, DomainSpec};
use crate::error::{Error, Result};
use crate::numeric::bisect;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairQuantities {
    pub norm_diff: f64,
    /// `‖(z−w)_z‖`
    pub normal_mag: f64,
    /// `|Re <z−w, η>|`
    pub real_normal_mag: f64,
    pub delta_z: f64,
    pub delta_w: f64,
    pub a: f64,
    pub g: f64,
    pub h: f64,
    pub h_real: f64,
}

pub fn a_from_parts(normal_mag: f64, norm_diff: f64, delta_z: f64, delta_w: f64) -> f64 {
    (normal_mag + norm_diff * norm_diff + norm_diff * delta_z.sqrt()) / (delta_z.sqrt() * delta_w.sqrt())
}

/// All pair quantities from precomputed frames at `z` and `w`.
pub fn pair_from_frames(fz: &BoundaryFrame, fw: &BoundaryFrame) -> PairQuantities {
    let diff = &fz.point - &fw.point;
    let d = diff.norm();
    let pairing = diff.inner(&fz.outer_normal);
    let normal_mag = pairing.norm();
    let real_normal_mag = pairing.re.abs();
    let cc2 = cc_proxy_sq_raw(&fz.projection, &fz.outer_normal, &fw.projection);
    let dmax = fz.delta.max(fw.delta);
    PairQuantities {
        norm_diff: d,
        normal_mag,
        real_normal_mag,
        delta_z: fz.delta,
        delta_w: fw.delta,
        a: a_from_parts(normal_mag, d, fz.delta, fw.delta),
        g: ((cc2 + dmax) / (fz.delta.sqrt() * fw.delta.sqrt())).ln(),
        h: normal_mag + d * fz.delta.sqrt(),
        h_real: real_normal_mag + d * fz.delta.sqrt(),
    }
}

pub fn pair_quantities(domain: &DomainSpec, z: &PointC, w: &PointC) -> Result<PairQuantities> {
    let fz = checked_frame(domain, z)?;
    let fw = checked_frame(domain, w)?;
    Ok(pair_from_frames(&fz, &fw))
}

/// `A(z, w)` with the frame taken at `z`.
pub fn a_quantity(domain: &DomainSpec, z: &PointC, w: &PointC) -> Result<f64> {
    Ok(pair_quantities(domain, z, w)?.a)
}

/// `(log(1 + cA), log(1 + CA))`.
pub fn sandwich(a: f64, constants: &EstimatorConstants) -> (f64, f64) {
    ((constants.c * a).ln_1p(), (constants.big_c * a).ln_1p())
}

fn cc_proxy_sq_raw(p: &PointC, eta_p: &VectorC, q: &PointC) -> f64 {
    let diff = p - q;
    diff.inner(eta_p).norm() + diff.norm_sqr()
}

fn boundary_normal(domain: &DomainSpec, p: &PointC) -> Result<VectorC> {
    let jet = domain.jet(p)?;
    let gn = jet.gradient.norm();
    if gn == 0.0 || jet.value.abs() > 1e-8 * gn.max(1.0) {
        return Err(Error::Geometry(format!("{p:.6} is not a boundary point (ρ = {:.3e})", jet.value)));
    }
    Ok(jet.gradient * (1.0 / gn))
}

/// `sqrt(‖(p−q)_p‖ + ‖p−q‖²)` for boundary points `p`, `q`.
pub fn cc_proxy(domain: &DomainSpec, p: &PointC, q: &PointC) -> Result<f64> {
    let eta = boundary_normal(domain, p)?;
    boundary_normal(domain, q)?;
    Ok(cc_proxy_sq_raw(p, &eta, q).sqrt())
}

pub fn g_balogh_bonk(domain: &DomainSpec, z: &PointC, w: &PointC) -> Result<f64> {
    let fz = checked_frame(domain, z)?;
    let fw = checked_frame(domain, w)?;
    if !fz.unique_projection || !fw.unique_projection {
        return Err(Error::Geometry("g needs unique boundary projections".into()));
    }
    Ok(pair_from_frames(&fz, &fw).g)
}

/// `(h, h_real)` with the frame at `z`; `z` may lie on the boundary.
pub fn h_quantities(domain: &DomainSpec, z: &PointC, w: &PointC) -> Result<(f64, f64)> {
    let fz = boundary_frame(domain, z)?;
    let diff = z - w;
    let pairing = diff.inner(&fz.outer_normal);
    let d = diff.norm();
    let s = fz.delta.sqrt();
    Ok((pairing.norm() + d * s, pairing.re.abs() + d * s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlcScanRow {
    pub radius: f64,
    pub c2_est: f64,
    pub c3_est: f64,
    pub c4_est: f64,
    pub samples_c2: usize,
    pub samples_c3: usize,
    pub samples_c4: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlcScanConfig {
    /// Directions drawn at the first radius; doubled at every later radius.
    pub base_samples: usize,
    pub seed: u64,
}

impl Default for SlcScanConfig {
    fn default() -> Self {
        SlcScanConfig {
            base_samples: 256,
            seed: 20,
        }
    }
}

const GOLDEN_FRAC: f64 = 0.618_033_988_749_894_9;

fn random_cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
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

/// Boundary point reached from `x` along `-η`, searching `t ∈ [-span, span]`.
fn drop_to_boundary(domain: &DomainSpec, x: &PointC, eta: &VectorC, span: f64) -> Option<PointC> {
    let f = |t: f64| domain.value_unchecked(&(x - &(eta * t)));
    let t = bisect(f, -span, span, 1e-16)?;
    Some(x - &(eta * t))
}

/// Infimum estimates of the three linear-convexity ratios in shrinking
/// neighbourhoods of the boundary point `p`.
pub fn slc_ratio_scan(domain: &DomainSpec, p: &PointC, radii: &[f64], config: &SlcScanConfig) -> Result<Vec<SlcScanRow>> {
    if radii.windows(2).any(|w| !(w[1] < w[0])) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Config("radii must be positive and strictly decreasing".into()));
    }
    let eta = boundary_normal(domain, p)?;
    let n = domain.dim;
    let tb = tangent_basis(&eta);
    if tb.is_empty() {
        return Err(Error::Config("linear-convexity scans need dimension at least 2".into()));
    }
    let i_eta = eta.scale_c(Complex64::new(0.0, 1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::with_capacity(radii.len());
    for (level, &r) in radii.iter().enumerate() {
        let count = config.base_samples << level.min(16);
        // directions: complex-tangent ones, and generic real-tangent ones
        let draws: Vec<(CVec, f64, f64)> = (0..count)
            .map(|k| {
                let mut c = random_cvec(&mut rng, tb.len());
                // phase of the leading coefficient from a Kronecker sequence:
                // the infimum over phases is resolved at rate 1/count, not by luck
                let theta = std::f64::consts::TAU * ((k + 1) as f64 * GOLDEN_FRAC).fract();
                let lead = c[0].norm().max(f64::MIN_POSITIVE);
                c[0] = Complex64::from_polar(lead, theta);
                let mut u = CVec::zeros(n);
                for (ci, b) in c.iter().zip(&tb) {
                    u += &b.scale_c(*ci);
                }
                if k % 2 == 1 {
                    let a: f64 = StandardNormal.sample(&mut rng);
                    u += &(&i_eta * (a * 0.3));
                }
                let u = u.normalized().unwrap();
                let s = r * (0.5 + 0.5 * rng.random::<f64>());
                let depth = rng.random::<f64>().powi(3) * r * r;
                (u, s, depth)
            })
            .collect();
        let results: Vec<Option<(f64, f64, f64)>> = draws
            .par_iter()
            .map(|(u, s, depth)| {
                let x = p + &(u * *s);
                let wb = drop_to_boundary(domain, &x, &eta, *s)?;
                if !domain.in_region(&wb) || wb.dist(p) > r {
                    return None;
                }
                let ratio = |w: &PointC| (p - w).inner(&eta).norm() / (p - w).norm_sqr();
                let c4 = ratio(&wb);
                let wi = &wb - &(&eta * *depth);
                if *depth == 0.0 || wi.dist(p) > r || !domain.is_interior(&wi) {
                    return Some((c4, f64::INFINITY, f64::INFINITY));
                }
                let c3 = ratio(&wi);
                // z on the inner normal segment from p, at a few depths
                let dw = (p - &wi).inner(&eta).re.max(0.0);
                let mut c2 = c3;
                for d in [dw, 0.5 * dw, 2.0 * dw, 1e-3 * dw] {
                    if d <= 0.0 || d > r {
                        continue;
                    }
                    let z = p - &(&eta * d);
                    if let Ok((h, _)) = h_quantities(domain, &z, &wi) {
                        let dz = z.dist(&wi);
                        if dz > 0.0 {
                            c2 = c2.min(h / (dz * dz));
                        }
                    }
                }
                Some((c4, c3, c2))
            })
            .collect();
        let mut row = SlcScanRow {
            radius: r,
            c2_est: f64::INFINITY,
            c3_est: f64::INFINITY,
            c4_est: f64::INFINITY,
            samples_c2: 0,
            samples_c3: 0,
            samples_c4: 0,
        };
        for (c4, c3, c2) in results.into_iter().flatten() {
            row.c4_est = row.c4_est.min(c4);
            row.samples_c4 += 1;
            if c3.is_finite() {
                row.c3_est = row.c3_est.min(c3);
                row.samples_c3 += 1;
                row.c2_est = row.c2_est.min(c2);
                row.samples_c2 += 1;
            }
        }
        let need = (count / 8).max(4);
        if row.samples_c4 < need || row.samples_c3 < need {
            return Err(Error::Sampling(format!(
                "only {} boundary / {} interior samples landed in the shell of radius {r}",
                row.samples_c4, row.samples_c3
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S9Row {
    pub level: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub z: PointC,
    pub w: PointC,
    pub h: f64,
    pub h_real: f64,
    pub norm_diff_sq: f64,
    pub ratio: f64,
}

/// The local-model sequence `z = (−ε^p, 0)`, `w = (−ε⁴, ε)`, with `ε` halving
/// from `eps0`. `w` is the boundary point `(0, ε)` pushed inward by `ε⁴`.
pub fn s9_sequence(levels: usize, eps0: f64, exponent: f64) -> Result<Vec<S9Row>> {
    if !(eps0 > 0.0 && eps0 <= 0.1) || exponent <= 2.0 {
        return Err(Error::Config("need 0 < ε0 ≤ 0.1 and an exponent above 2".into()));
    }
    let domain = DomainSpec::local_model_s9();
    (0..levels)
        .map(|level| {
            let eps = eps0 / 2f64.powi(level as i32);
            let delta = eps.powf(exponent);
            let z = CVec::from_real(&[-delta, 0.0]);
            let w = CVec::from_real(&[-eps.powi(4), eps]);
            if !domain.is_interior(&z) || !domain.is_interior(&w) {
                return Err(Error::Geometry(format!("level {level} left the domain")));
            }
            let (h, h_real) = h_quantities(&domain, &z, &w)?;
            let nd2 = (&z - &w).norm_sqr();
            Ok(S9Row {
                level,
                epsilon: eps,
                delta,
                z,
                w,
                h,
                h_real,
                norm_diff_sq: nd2,
                ratio: h / nd2,
            })
        })
        .collect()
}
