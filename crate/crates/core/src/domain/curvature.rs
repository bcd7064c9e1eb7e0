use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::frame::signed_distance;
use super::{DefiningJet, DomainSpec};
use crate::cvec::{CVec, PointC, VectorC};
use crate::error::{Error, Result};
use crate::numeric::rel_diff;

/// Orthonormal basis of the complex tangent space `{v : <v, n> = 0}`.
pub fn tangent_basis(normal: &VectorC) -> Vec<VectorC> {
    let n = normal.dim();
    let nu = normal.normalized().expect("nonzero normal");
    let skip = (0..n)
        .max_by(|&a, &b| nu[a].norm().total_cmp(&nu[b].norm()))
        .unwrap_or(0);
    let mut basis: Vec<CVec> = vec![nu];
    for k in (0..n).filter(|&k| k != skip) {
        let mut v = CVec::basis(n, k);
        for b in &basis {
            let p = v.inner(b);
            v = &v - &b.scale_c(p);
        }
        basis.push(v.normalized().expect("independent basis vector"));
    }
    basis.remove(0);
    basis
}

fn min_eig_hermitian(m: DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn min_eig_real(m: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub(crate) fn levi_min_from_jet(jet: &DefiningJet) -> f64 {
    let gn = jet.gradient.norm();
    let basis = tangent_basis(&jet.gradient);
    if basis.is_empty() {
        return f64::INFINITY;
    }
    let k = basis.len();
    let n = jet.gradient.dim();
    let g = DMatrix::from_fn(k, k, |i, l| {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for m in 0..n {
                s += basis[i][j] * jet.levi[(j, m)] * basis[l][m].conj();
            }
        }
        s
    });
    min_eig_hermitian(g) / gn
}

fn boundary_jet(domain: &DomainSpec, p: &PointC) -> Result<DefiningJet> {
    let jet = domain.jet(p)?;
    let gn = jet.gradient.norm();
    if gn < 1e-12 {
        return Err(Error::Geometry("degenerate gradient".into()));
    }
    if jet.value.abs() > 1e-8 * gn.max(1.0) {
        return Err(Error::Geometry(format!(
            "point is not on the boundary (ρ = {:.3e})",
            jet.value
        )));
    }
    Ok(jet)
}

/// Minimum of the Levi form over unit complex tangent vectors, divided by `|∇ρ|`.
pub fn levi_minimum(domain: &DomainSpec, p: &PointC) -> Result<f64> {
    Ok(levi_min_from_jet(&boundary_jet(domain, p)?))
}

/// The competing normalisations of the linear-convexity eigenvalue at `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlcForms {
    /// Half the smallest eigenvalue of the real Hessian of the signed distance
    /// on the complex tangent plane; the constant of the quadratic Taylor
    /// term, comparable with the ratio scans.
    pub lambda: f64,
    /// Smallest eigenvalue of that real Hessian, unnormalised.
    pub real_hessian_min: f64,
    /// Levi-form minimum (complex Hessian form).
    pub levi_min: f64,
}

fn real_tangent_basis(normal: &VectorC) -> Vec<VectorC> {
    tangent_basis(normal)
        .into_iter()
        .flat_map(|b| {
            let ib = b.scale_c(Complex64::new(0.0, 1.0));
            [b, ib]
        })
        .collect()
}

pub fn slc_forms(domain: &DomainSpec, p: &PointC) -> Result<SlcForms> {
    let jet = boundary_jet(domain, p)?;
    let gn = jet.gradient.norm();
    let basis = real_tangent_basis(&jet.gradient);
    if basis.is_empty() {
        return Ok(SlcForms {
            lambda: f64::INFINITY,
            real_hessian_min: f64::INFINITY,
            levi_min: f64::INFINITY,
        });
    }
    let k = basis.len();
    let h = DMatrix::from_fn(k, k, |i, j| jet.real_hessian(&basis[i], &basis[j]) / gn);
    let m = min_eig_real(h);
    Ok(SlcForms {
        lambda: 0.5 * m,
        real_hessian_min: m,
        levi_min: levi_min_from_jet(&jet),
    })
}

pub fn slc_lambda(domain: &DomainSpec, p: &PointC) -> Result<f64> {
    Ok(slc_forms(domain, p)?.lambda)
}

/// λ from second differences of the signed distance with steps `h` and `h/2`.
pub fn slc_lambda_fd(domain: &DomainSpec, p: &PointC, h: f64) -> Result<f64> {
    let jet = boundary_jet(domain, p)?;
    let basis = real_tangent_basis(&jet.gradient);
    if basis.is_empty() {
        return Ok(f64::INFINITY);
    }
    let k = basis.len();
    let at = |step: f64| -> Result<f64> {
        let sd = |a: f64, i: usize, b: f64, j: usize| -> Result<f64> {
            signed_distance(domain, &(p + &(&(&basis[i] * a) + &(&basis[j] * b))))
        };
        let mut m = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = (sd(step, i, step, j)? - sd(step, i, -step, j)? - sd(-step, i, step, j)?
                    + sd(-step, i, -step, j)?)
                    / (4.0 * step * step);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(0.5 * min_eig_real(m))
    };
    let coarse = at(h)?;
    let fine = at(h / 2.0)?;
    let gap = (coarse - fine).abs();
    if gap > 1e-6 && rel_diff(coarse, fine) > 1e-3 {
        return Err(Error::Convergence {
            what: "finite-difference stencil",
            residual: gap,
        });
    }
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_basis_is_orthonormal_and_orthogonal_to_normal() {
        let n = CVec(vec![
            Complex64::new(0.3, 0.4),
            Complex64::new(-0.1, 0.2),
            Complex64::new(0.5, 0.0),
        ]);
        let b = tangent_basis(&n);
        assert_eq!(b.len(), 2);
        for (i, u) in b.iter().enumerate() {
            assert!(u.inner(&n).norm() < 1e-15);
            for (j, v) in b.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((u.inner(v) - e).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ball_levi_and_lambda_are_constant() {
        let b = DomainSpec::unit_ball(3);
        let p1 = CVec::basis(3, 0);
        let p2 = CVec(vec![
            Complex64::new(0.0, 0.6),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.8, 0.0),
        ]);
        for p in [p1, p2] {
            assert!((levi_minimum(&b, &p).unwrap() - 0.5).abs() < 1e-14);
            assert!((slc_lambda(&b, &p).unwrap() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn ellipsoid_lambda_matches_second_differences() {
        let e = DomainSpec::ellipsoid(&[1.0, 4.0]).unwrap();
        let p = CVec::basis(2, 0);
        let f = slc_forms(&e, &p).unwrap();
        assert!((f.lambda - 2.0).abs() < 1e-14);
        let fd = slc_lambda_fd(&e, &p, 1e-3).unwrap();
        assert!((fd - 2.0).abs() < 1e-4, "{fd}");
        let q = CVec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.4, 0.0)]);
        let an = slc_lambda(&e, &q).unwrap();
        let fd = slc_lambda_fd(&e, &q, 1e-3).unwrap();
        assert!((an - fd).abs() < 1e-4 * an.max(1.0), "{an} vs {fd}");
    }

    #[test]
    fn s9_is_not_linearly_convex_at_origin() {
        let s9 = DomainSpec::local_model_s9();
        let f = slc_forms(&s9, &CVec::zeros(2)).unwrap();
        assert!(f.lambda.abs() < 1e-15);
        assert!((f.levi_min - 1.0).abs() < 1e-15);
        let fd = slc_lambda_fd(&s9, &CVec::zeros(2), 1e-3).unwrap();
        assert!(fd.abs() < 1e-4, "{fd}");
    }

    #[test]
    fn off_boundary_point_is_rejected() {
        let b = DomainSpec::unit_ball(2);
        assert!(matches!(
            levi_minimum(&b, &CVec::from_real(&[0.5, 0.0])),
            Err(Error::Geometry(_))
        ));
    }
}
