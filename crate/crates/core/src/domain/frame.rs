use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::curvature::{levi_min_from_jet, tangent_basis};
use super::{DomainSpec, Family};
use crate::cvec::{CVec, PointC, VectorC};
use crate::error::{Error, Result};
use crate::numeric::bisect;

const RESIDUAL_TOL: f64 = 1e-10;

/// Boundary data attached to a point `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFrame {
    pub point: PointC,
    /// Euclidean distance to the boundary.
    pub delta: f64,
    /// Negative inside, positive outside.
    pub signed_delta: f64,
    pub projection: PointC,
    pub outer_normal: VectorC,
    pub levi_min: f64,
    pub unique_projection: bool,
    pub residual: f64,
}

impl BoundaryFrame {
    pub fn inner_normal(&self) -> VectorC {
        -&self.outer_normal
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalComponents {
    /// `|<v, η>|`
    pub complex_normal: f64,
    /// `|Re <v, η>|`
    pub real_normal: f64,
    pub tangential: VectorC,
}

pub fn normal_components(frame: &BoundaryFrame, v: &VectorC) -> NormalComponents {
    let p = v.inner(&frame.outer_normal);
    NormalComponents {
        complex_normal: p.norm(),
        real_normal: p.re.abs(),
        tangential: v - &frame.outer_normal.scale_c(p),
    }
}

pub fn signed_distance(domain: &DomainSpec, z: &PointC) -> Result<f64> {
    Ok(boundary_frame(domain, z)?.signed_delta)
}

pub fn boundary_frame(domain: &DomainSpec, z: &PointC) -> Result<BoundaryFrame> {
    let value = domain.value(z)?;
    let quadric = match &domain.family {
        Family::UnitBall => Some(vec![1.0; domain.dim]),
        Family::Ellipsoid { coeffs } => Some(coeffs.clone()),
        _ => None,
    };
    let (projection, unique, delta) = match quadric {
        Some(a) if domain.rigid_placement() => {
            let x = domain.to_model(z)?;
            let (px, unique, d) = quadric_closest(&a, &x);
            let p = match &domain.placement {
                Some(m) => m.apply(&px),
                None => px,
            };
            (p, unique, d)
        }
        _ => {
            let (p, unique) = generic_closest(domain, z)?;
            let d = z.dist(&p);
            (p, unique, d)
        }
    };
    let jet = domain.jet_unchecked(&projection);
    let outer_normal = jet
        .gradient
        .normalized()
        .ok_or_else(|| Error::Geometry("vanishing gradient at the projection".into()))?;
    let stationarity = {
        let t = &(z - &projection) - &outer_normal.scale_c((z - &projection).inner(&outer_normal));
        t.norm()
    };
    let residual = jet.value.abs() / jet.gradient.norm() + stationarity;
    if residual > RESIDUAL_TOL.max(1e-12 * delta) {
        return Err(Error::Convergence {
            what: "closest-point solver",
            residual,
        });
    }
    Ok(BoundaryFrame {
        point: z.clone(),
        delta,
        signed_delta: if value < 0.0 { -delta } else { delta },
        projection,
        outer_normal,
        levi_min: levi_min_from_jet(&jet),
        unique_projection: unique,
        residual,
    })
}

/// Closest point on `{sum a_j |x_j|^2 = 1}`; returns `(point, unique, distance)`.
fn quadric_closest(a: &[f64], x: &CVec) -> (CVec, bool, f64) {
    let n = a.len();
    let amax = a.iter().cloned().fold(0.0, f64::max);
    let amin = a.iter().cloned().fold(f64::INFINITY, f64::min);
    if amax == amin {
        let r = x.norm() * amax.sqrt();
        let rad = 1.0 / amax.sqrt();
        if r == 0.0 {
            return (CVec::basis(n, 0) * rad, false, rad);
        }
        return (x * (1.0 / r), true, (1.0 - r).abs() * rad);
    }
    let top: Vec<bool> = a.iter().map(|&aj| aj >= amax * (1.0 - 1e-15)).collect();
    let m: Vec<f64> = x.iter().map(|c| c.norm_sqr()).collect();
    let value: f64 = a.iter().zip(&m).map(|(aj, mj)| aj * mj).sum::<f64>() - 1.0;
    let f = |mu: f64| -> f64 {
        a.iter()
            .zip(&m)
            .map(|(aj, mj)| if *mj == 0.0 { 0.0 } else { aj * mj / (1.0 + mu * aj).powi(2) })
            .sum::<f64>()
            - 1.0
    };
    let point_at = |mu: f64| CVec(x.iter().zip(a).map(|(c, aj)| c / (1.0 + mu * aj)).collect());
    let s: f64 = m.iter().zip(&top).filter(|(_, t)| **t).map(|(mj, _)| mj).sum();
    let lo = -1.0 / amax;
    let mu = if value == 0.0 {
        0.0
    } else if value > 0.0 {
        let mut hi = 1.0;
        while f(hi) > 0.0 {
            hi *= 2.0;
        }
        bisect(f, 0.0, hi, 0.0).unwrap_or(0.0)
    } else if s > 0.0 {
        let u0 = (s * amax).sqrt().min(1.0);
        let start = lo + u0 / amax;
        bisect(f, start, 0.0, 0.0).unwrap_or(start)
    } else {
        // The minimizer may sit on the whole circle of the shortest axes.
        let mut px = CVec::zeros(n);
        let mut rest = 0.0;
        for j in 0..n {
            if !top[j] {
                px[j] = x[j] / (1.0 - a[j] / amax);
                rest += a[j] * px[j].norm_sqr();
            }
        }
        if rest <= 1.0 {
            let j0 = top.iter().position(|&t| t).unwrap();
            px[j0] = Complex64::new(((1.0 - rest) / amax).sqrt(), 0.0);
            let d = x.dist(&px);
            return (px, false, d);
        }
        bisect(f, lo, 0.0, 0.0).unwrap_or(0.0)
    };
    let px = point_at(mu);
    let d = x.dist(&px);
    (px, true, d)
}

fn real_hessian_matrix(domain: &DomainSpec, x: &PointC) -> (DMatrix<f64>, CVec, f64) {
    let jet = domain.jet_unchecked(x);
    let n = x.dim();
    let basis: Vec<CVec> = (0..2 * n)
        .map(|r| {
            let mut e = CVec::zeros(n);
            e[r / 2] = if r % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
            e
        })
        .collect();
    let h = DMatrix::from_fn(2 * n, 2 * n, |r, s| jet.real_hessian(&basis[r], &basis[s]));
    (h, jet.gradient, jet.value)
}

struct Candidate {
    point: PointC,
    dist: f64,
    min_curv: f64,
}

/// Damped Newton on `x - z + μ∇ρ(x) = 0, ρ(x) = 0` from one seed.
fn newton_project(domain: &DomainSpec, z: &PointC, seed: &PointC) -> Option<Candidate> {
    let n = z.dim();
    let m = 2 * n + 1;
    let g0 = domain.jet_unchecked(seed).gradient;
    let g0n = g0.norm_sqr();
    if g0n == 0.0 {
        return None;
    }
    let mut x = seed.to_reals();
    let mut mu = -(seed - z).real_dot(&g0) / g0n;
    let zr = z.to_reals();
    let resid = |x: &[f64], mu: f64| -> Option<(DVector<f64>, f64)> {
        let xc = CVec::from_reals(x);
        let v = domain.value_unchecked(&xc);
        if !v.is_finite() {
            return None;
        }
        let g = domain.jet_unchecked(&xc).gradient.to_reals();
        let mut f = DVector::zeros(m);
        for i in 0..2 * n {
            f[i] = x[i] - zr[i] + mu * g[i];
        }
        f[2 * n] = v;
        let nrm = f.norm();
        Some((f, nrm))
    };
    let (mut f, mut fnorm) = resid(&x, mu)?;
    for _ in 0..80 {
        if fnorm < 1e-14 {
            break;
        }
        let xc = CVec::from_reals(&x);
        let (h, g, _) = real_hessian_matrix(domain, &xc);
        let gr = g.to_reals();
        let mut jac = DMatrix::zeros(m, m);
        for i in 0..2 * n {
            for k in 0..2 * n {
                jac[(i, k)] = mu * h[(i, k)] + if i == k { 1.0 } else { 0.0 };
            }
            jac[(i, 2 * n)] = gr[i];
            jac[(2 * n, i)] = gr[i];
        }
        let step = jac.lu().solve(&(-&f))?;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-8 {
            let xn: Vec<f64> = x.iter().enumerate().map(|(i, xi)| xi + t * step[i]).collect();
            let mun = mu + t * step[2 * n];
            if let Some((fnew, nn)) = resid(&xn, mun) {
                if nn < fnorm * (1.0 - 1e-4 * t) || nn < 1e-14 {
                    x = xn;
                    mu = mun;
                    f = fnew;
                    fnorm = nn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let p = CVec::from_reals(&x);
    if fnorm > 1e-11 {
        return None;
    }
    let min_curv = tangent_min_curvature(domain, &p, mu);
    Some(Candidate {
        dist: z.dist(&p),
        point: p,
        min_curv,
    })
}

/// Smallest eigenvalue of `I + μ D²ρ` on the real tangent space at `p`.
fn tangent_min_curvature(domain: &DomainSpec, p: &PointC, mu: f64) -> f64 {
    let (h, g, _) = real_hessian_matrix(domain, p);
    let Some(nu) = g.normalized() else {
        return f64::NEG_INFINITY;
    };
    let mut basis: Vec<CVec> = vec![nu.scale_c(Complex64::new(0.0, 1.0))];
    basis.extend(tangent_basis(&nu).into_iter().flat_map(|b| [b.clone(), b.scale_c(Complex64::new(0.0, 1.0))]));
    let k = basis.len();
    let reals: Vec<DVector<f64>> = basis.iter().map(|b| DVector::from_vec(b.to_reals())).collect();
    let mut a = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let hv = &h * &reals[j];
            a[(i, j)] = reals[i].dot(&reals[j]) + mu * reals[i].dot(&hv);
        }
    }
    nalgebra::SymmetricEigen::new(a).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// First boundary crossing along `o + s u`, s in (0, smax].
fn ray_hit(domain: &DomainSpec, o: &PointC, u: &VectorC, smax: f64) -> Option<PointC> {
    let f = |s: f64| domain.value_unchecked(&(o + &(u * s)));
    let f0 = f(0.0);
    if f0 == 0.0 {
        return Some(o.clone());
    }
    let steps = 128;
    let mut prev = 0.0;
    for k in 1..=steps {
        let s = smax * k as f64 / steps as f64;
        let v = f(s);
        if v.signum() != f0.signum() {
            let r = bisect(f, prev, s, 1e-15)?;
            return Some(o + &(u * r));
        }
        prev = s;
    }
    None
}

fn generic_closest(domain: &DomainSpec, z: &PointC) -> Result<(PointC, bool)> {
    let n = z.dim();
    let smax = match domain.enclosing_ball() {
        Some((c, r)) => 2.0 * (r + c.dist(z)),
        None => 1.0,
    };
    let mut seeds = Vec::new();
    let anchor = domain.anchor();
    let radial = (z - &anchor).normalized().unwrap_or_else(|| CVec::basis(n, 0));
    if let Some(p) = ray_hit(domain, &anchor, &radial, smax) {
        seeds.push(p);
    }
    let grad = domain.jet_unchecked(z).gradient.normalized();
    let mut dirs: Vec<CVec> = Vec::new();
    if let Some(g) = grad {
        dirs.push(g.clone());
        dirs.push(-g);
    }
    for r in 0..2 * n {
        let mut e = CVec::zeros(n);
        e[r / 2] = if r % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
        dirs.push(-&e);
        dirs.push(e);
    }
    for d in &dirs {
        if let Some(p) = ray_hit(domain, z, d, smax) {
            seeds.push(p);
        }
    }
    if seeds.is_empty() {
        return Err(Error::Geometry("no boundary crossing found from the seed rays".into()));
    }
    let cands: Vec<Candidate> = seeds.iter().filter_map(|s| newton_project(domain, z, s)).collect();
    if cands.is_empty() {
        let best_seed = seeds
            .iter()
            .min_by(|a, b| a.dist(z).total_cmp(&b.dist(z)))
            .unwrap();
        let p = projected_descent(domain, z, best_seed)?;
        return Ok((p, true));
    }
    let admissible = |c: &Candidate| c.min_curv > -1e-8;
    let best = cands
        .iter()
        .filter(|c| admissible(c))
        .min_by(|a, b| a.dist.total_cmp(&b.dist))
        .or_else(|| cands.iter().min_by(|a, b| a.dist.total_cmp(&b.dist)))
        .unwrap();
    let tie = cands.iter().any(|c| {
        (c.dist - best.dist).abs() <= 1e-9 * best.dist.max(1.0) && c.point.dist(&best.point) > 1e-6
    });
    let unique = !tie && best.min_curv > 1e-8;
    Ok((best.point.clone(), unique))
}

/// Alternates a normal pull onto `{ρ = 0}` with a tangential step toward `z`.
fn projected_descent(domain: &DomainSpec, z: &PointC, seed: &PointC) -> Result<PointC> {
    let mut x = seed.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..20_000 {
        for _ in 0..5 {
            let jet = domain.jet_unchecked(&x);
            let g2 = jet.gradient.norm_sqr();
            if g2 == 0.0 {
                return Err(Error::Geometry("vanishing gradient during projection".into()));
            }
            x = &x - &(&jet.gradient * (jet.value / g2));
        }
        let jet = domain.jet_unchecked(&x);
        let nu = jet.gradient.normalized().unwrap();
        let d = z - &x;
        let tang = &d - &nu.scale_c(d.inner(&nu));
        residual = tang.norm() + jet.value.abs();
        if residual < 1e-12 {
            return Ok(x);
        }
        x = &x + &(&tang * 0.5);
    }
    if residual <= RESIDUAL_TOL {
        Ok(x)
    } else {
        Err(Error::Convergence {
            what: "projected descent",
            residual,
        })
    }
}
