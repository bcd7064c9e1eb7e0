//! Model domains given by explicit defining functions.

mod config;
mod curvature;
mod frame;

pub use config::DomainConfig;
pub use curvature::{levi_minimum, slc_forms, slc_lambda, slc_lambda_fd, tangent_basis, SlcForms};
pub use frame::{boundary_frame, normal_components, signed_distance, BoundaryFrame, NormalComponents};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::affine::{matvec, AffineMap, CMat};
use crate::cvec::{CVec, PointC, VectorC};
use crate::error::{Error, Result};

/// Radius of the ball about the origin that bounds the working region of the
/// local model.
pub const S9_RADIUS: f64 = 0.25;

/// Points closer than this to the boundary are rejected by every operation
/// that divides by a power of the boundary distance.
pub const DELTA_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: PointC,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Family {
    UnitBall,
    Ellipsoid { coeffs: Vec<f64> },
    /// `{Re(z1 - z2^2) + |z2|^2 < 0}` near the origin, N = 2.
    LocalModelS9,
    /// `|z|^2 - 1 + amplitude * exp(-|z - c|^2 / w^2) < 0`.
    PerturbedBall { amplitude: f64, bump: Bump },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::UnitBall => "ball",
            Family::Ellipsoid { .. } => "ellipsoid",
            Family::LocalModelS9 => "s9",
            Family::PerturbedBall { .. } => "perturbed-ball",
        }
    }
}

/// Value and derivatives of a defining function at one point.
///
/// `gradient` is `2 ∂ρ/∂z̄`, i.e. the real gradient written as a complex
/// vector. `levi` holds `∂²ρ/∂z_j∂z̄_k` and `hol` holds `∂²ρ/∂z_j∂z_k`.
#[derive(Clone, Debug)]
pub struct DefiningJet {
    pub value: f64,
    pub gradient: VectorC,
    pub levi: CMat,
    pub hol: CMat,
}

impl DefiningJet {
    /// Real Hessian bilinear form of ρ on C^N viewed as R^{2N}.
    pub fn real_hessian(&self, a: &VectorC, b: &VectorC) -> f64 {
        let n = a.dim();
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                s += a[j] * (self.hol[(j, k)] * b[k] + self.levi[(j, k)] * b[k].conj());
            }
        }
        2.0 * s.re
    }

    /// Levi form `Σ L_jk v_j conj(v_k)`.
    pub fn levi_form(&self, v: &VectorC) -> f64 {
        let n = v.dim();
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                s += self.levi[(j, k)] * v[j] * v[k].conj();
            }
        }
        s.re
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    pub family: Family,
    pub dim: usize,
    /// Boundary regularity exponent; carried as metadata.
    pub holder_exponent: f64,
    /// Optional affine placement `y = M x + t` of the model domain.
    pub placement: Option<AffineMap>,
}

impl DomainSpec {
    pub fn unit_ball(n: usize) -> Self {
        assert!(n >= 1);
        DomainSpec {
            family: Family::UnitBall,
            dim: n,
            holder_exponent: 1.0,
            placement: None,
        }
    }

    pub fn ellipsoid(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::Config(format!(
                "ellipsoid coefficients must be positive, got {coeffs:?}"
            )));
        }
        Ok(DomainSpec {
            family: Family::Ellipsoid {
                coeffs: coeffs.to_vec(),
            },
            dim: coeffs.len(),
            holder_exponent: 1.0,
            placement: None,
        })
    }

    pub fn local_model_s9() -> Self {
        DomainSpec {
            family: Family::LocalModelS9,
            dim: 2,
            holder_exponent: 1.0,
            placement: None,
        }
    }

    pub fn perturbed_ball(n: usize, amplitude: f64, center: PointC, width: f64) -> Result<Self> {
        if center.dim() != n {
            return Err(Error::Config("bump center has the wrong dimension".into()));
        }
        if !(width > 0.0) || !amplitude.is_finite() || amplitude.abs() >= 1.0 {
            return Err(Error::Config(format!(
                "perturbation needs width > 0 and |amplitude| < 1 (got {width}, {amplitude})"
            )));
        }
        Ok(DomainSpec {
            family: Family::PerturbedBall {
                amplitude,
                bump: Bump { center, width },
            },
            dim: n,
            holder_exponent: 1.0,
            placement: None,
        })
    }

    /// The image of this domain under `map`.
    pub fn placed(&self, map: &AffineMap) -> Result<Self> {
        if map.dim() != self.dim {
            return Err(Error::Config("placement dimension mismatch".into()));
        }
        map.inverse()?;
        let placement = match &self.placement {
            Some(inner) => map.compose(inner),
            None => map.clone(),
        };
        Ok(DomainSpec {
            placement: Some(placement),
            ..self.clone()
        })
    }

    /// Model coordinates of an ambient point.
    pub(crate) fn to_model(&self, z: &PointC) -> Result<PointC> {
        match &self.placement {
            None => Ok(z.clone()),
            Some(m) => Ok(m.inverse()?.apply(z)),
        }
    }

    pub(crate) fn rigid_placement(&self) -> bool {
        self.placement.as_ref().is_none_or(|m| m.is_unitary(1e-12))
    }

    fn check_dim(&self, z: &PointC) -> Result<()> {
        if z.dim() != self.dim {
            return Err(Error::Config(format!(
                "point has dimension {} but the domain has dimension {}",
                z.dim(),
                self.dim
            )));
        }
        if !z.is_finite() {
            return Err(Error::Degenerate("non-finite coordinates".into()));
        }
        Ok(())
    }

    fn check_region(&self, x: &PointC) -> Result<()> {
        if let Family::LocalModelS9 = self.family {
            let r = x.norm();
            if r > S9_RADIUS * (1.0 + 1e-12) {
                return Err(Error::Region {
                    family: "s9",
                    norm: r,
                    limit: S9_RADIUS,
                });
            }
        }
        Ok(())
    }

    /// True when the point lies in the working region of the family.
    pub fn in_region(&self, z: &PointC) -> bool {
        self.to_model(z).is_ok_and(|x| self.check_region(&x).is_ok())
    }

    /// ρ and its derivatives at `z` (ambient coordinates).
    pub fn jet(&self, z: &PointC) -> Result<DefiningJet> {
        self.check_dim(z)?;
        let x = self.to_model(z)?;
        self.check_region(&x)?;
        let jet = self.model_jet(&x);
        Ok(match &self.placement {
            None => jet,
            Some(m) => {
                let w = m.linear.clone().try_inverse().expect("checked at placement");
                let wt = w.transpose();
                DefiningJet {
                    value: jet.value,
                    gradient: matvec(&w.adjoint(), &jet.gradient),
                    levi: &wt * &jet.levi * w.map(|c| c.conj()),
                    hol: &wt * &jet.hol * &w,
                }
            }
        })
    }

    /// ρ at `z`, negative inside.
    pub fn value(&self, z: &PointC) -> Result<f64> {
        self.check_dim(z)?;
        let x = self.to_model(z)?;
        self.check_region(&x)?;
        Ok(self.model_value(&x))
    }

    /// ρ without the working-region check; used internally by solvers that
    /// may step slightly outside it.
    pub(crate) fn value_unchecked(&self, z: &PointC) -> f64 {
        match self.to_model(z) {
            Ok(x) => self.model_value(&x),
            Err(_) => f64::NAN,
        }
    }

    pub(crate) fn jet_unchecked(&self, z: &PointC) -> DefiningJet {
        let x = self.to_model(z).expect("placement is invertible");
        let jet = self.model_jet(&x);
        match &self.placement {
            None => jet,
            Some(m) => {
                let w = m.linear.clone().try_inverse().expect("placement is invertible");
                let wt = w.transpose();
                DefiningJet {
                    value: jet.value,
                    gradient: matvec(&w.adjoint(), &jet.gradient),
                    levi: &wt * &jet.levi * w.map(|c| c.conj()),
                    hol: &wt * &jet.hol * &w,
                }
            }
        }
    }

    pub fn is_interior(&self, z: &PointC) -> bool {
        self.value(z).is_ok_and(|v| v < 0.0)
    }

    /// A fixed interior point used to seed ray searches.
    pub fn anchor(&self) -> PointC {
        let x = match self.family {
            Family::LocalModelS9 => CVec::from_real(&[-S9_RADIUS / 2.0, 0.0]),
            _ => CVec::zeros(self.dim),
        };
        match &self.placement {
            None => x,
            Some(m) => m.apply(&x),
        }
    }

    /// A ball known to contain the domain, if the family is bounded.
    pub fn enclosing_ball(&self) -> Option<(PointC, f64)> {
        let r = match &self.family {
            Family::UnitBall => 1.0,
            Family::Ellipsoid { coeffs } => {
                let amin = coeffs.iter().cloned().fold(f64::INFINITY, f64::min);
                if amin >= 1.0 {
                    1.0
                } else {
                    1.0 / amin.sqrt()
                }
            }
            Family::PerturbedBall { amplitude, .. } => {
                if *amplitude >= 0.0 {
                    1.0
                } else {
                    (1.0 + amplitude.abs()).sqrt()
                }
            }
            Family::LocalModelS9 => return None,
        };
        Some(match &self.placement {
            None => (CVec::zeros(self.dim), r),
            Some(m) => (m.translation.clone(), r * m.operator_norm()),
        })
    }

    fn model_value(&self, x: &PointC) -> f64 {
        match &self.family {
            Family::UnitBall => x.norm_sqr() - 1.0,
            Family::Ellipsoid { coeffs } => {
                coeffs.iter().zip(x.iter()).map(|(a, c)| a * c.norm_sqr()).sum::<f64>() - 1.0
            }
            Family::LocalModelS9 => x[0].re - (x[1] * x[1]).re + x[1].norm_sqr(),
            Family::PerturbedBall { amplitude, bump } => {
                let phi = (-(x - &bump.center).norm_sqr() / (bump.width * bump.width)).exp();
                x.norm_sqr() - 1.0 + amplitude * phi
            }
        }
    }

    fn model_jet(&self, x: &PointC) -> DefiningJet {
        let n = self.dim;
        let zero = Complex64::new(0.0, 0.0);
        match &self.family {
            Family::UnitBall => DefiningJet {
                value: self.model_value(x),
                gradient: x * 2.0,
                levi: CMat::identity(n, n),
                hol: CMat::from_element(n, n, zero),
            },
            Family::Ellipsoid { coeffs } => DefiningJet {
                value: self.model_value(x),
                gradient: CVec(coeffs.iter().zip(x.iter()).map(|(a, c)| c * (2.0 * a)).collect()),
                levi: CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                    n,
                    coeffs.iter().map(|&a| Complex64::new(a, 0.0)),
                )),
                hol: CMat::from_element(n, n, zero),
            },
            Family::LocalModelS9 => {
                let mut levi = CMat::from_element(2, 2, zero);
                levi[(1, 1)] = Complex64::new(1.0, 0.0);
                let mut hol = CMat::from_element(2, 2, zero);
                hol[(1, 1)] = Complex64::new(-1.0, 0.0);
                DefiningJet {
                    value: self.model_value(x),
                    gradient: CVec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 4.0 * x[1].im)]),
                    levi,
                    hol,
                }
            }
            Family::PerturbedBall { amplitude, bump } => {
                let w2 = bump.width * bump.width;
                let d = x - &bump.center;
                let phi = (-d.norm_sqr() / w2).exp();
                let e = amplitude * phi;
                let mut gradient = x * 2.0;
                for k in 0..n {
                    gradient[k] -= d[k] * (2.0 * e / w2);
                }
                let mut levi = CMat::identity(n, n);
                let mut hol = CMat::from_element(n, n, zero);
                for j in 0..n {
                    for k in 0..n {
                        levi[(j, k)] += d[j].conj() * d[k] * (e / (w2 * w2));
                        hol[(j, k)] = d[j].conj() * d[k].conj() * (e / (w2 * w2));
                    }
                    levi[(j, j)] -= Complex64::new(e / w2, 0.0);
                }
                DefiningJet {
                    value: self.model_value(x),
                    gradient,
                    levi,
                    hol,
                }
            }
        }
    }
}

/// `(value, gradient, complex Hessian)` of the defining function.
pub fn defining_value(domain: &DomainSpec, z: &PointC) -> Result<(f64, VectorC, CMat)> {
    let j = domain.jet(z)?;
    Ok((j.value, j.gradient, j.levi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_basis(n: usize) -> Vec<CVec> {
        (0..2 * n)
            .map(|r| CVec::basis(n, r / 2).scale_c(if r % 2 == 0 { c(1.0, 0.0) } else { c(0.0, 1.0) }))
            .collect()
    }

    fn families() -> Vec<(DomainSpec, CVec)> {
        vec![
            (DomainSpec::unit_ball(2), CVec(vec![c(0.3, -0.2), c(0.1, 0.4)])),
            (DomainSpec::ellipsoid(&[1.0, 4.0]).unwrap(), CVec(vec![c(0.3, -0.2), c(0.1, 0.2)])),
            (DomainSpec::local_model_s9(), CVec(vec![c(-0.05, 0.02), c(0.07, -0.11)])),
            (
                DomainSpec::perturbed_ball(2, 0.2, CVec(vec![c(0.6, 0.1), c(0.0, 0.2)]), 0.4).unwrap(),
                CVec(vec![c(0.3, -0.2), c(0.1, 0.4)]),
            ),
        ]
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let h = 1e-5;
        for (d, z) in families() {
            let jet = d.jet(&z).unwrap();
            let basis = real_basis(d.dim);
            for (r, e) in basis.iter().enumerate() {
                let fp = d.value(&(&z + &(e * h))).unwrap();
                let fm = d.value(&(&z - &(e * h))).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                let an = jet.gradient.real_dot(e);
                assert!((fd - an).abs() < 1e-8, "{} grad {r}: {fd} vs {an}", d.family.name());
                for e2 in &basis {
                    let f = |s: f64, t: f64| d.value(&(&z + &(&(e * s) + &(e2 * t)))).unwrap();
                    let hfd = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
                    let han = jet.real_hessian(e, e2);
                    assert!((hfd - han).abs() < 1e-4, "{} hessian: {hfd} vs {han}", d.family.name());
                }
            }
        }
    }

    #[test]
    fn placement_transforms_the_jet() {
        let m = AffineMap {
            linear: CMat::from_row_slice(2, 2, &[c(1.0, 0.2), c(0.3, 0.0), c(0.0, -0.1), c(0.8, 0.0)]),
            translation: CVec(vec![c(0.2, 0.0), c(-0.1, 0.3)]),
        };
        let d = DomainSpec::ellipsoid(&[1.0, 4.0]).unwrap().placed(&m).unwrap();
        let z = CVec(vec![c(0.35, 0.1), c(0.0, 0.25)]);
        let jet = d.jet(&z).unwrap();
        let h = 1e-6;
        for e in real_basis(2) {
            let fd = (d.value(&(&z + &(&e * h))).unwrap() - d.value(&(&z - &(&e * h))).unwrap()) / (2.0 * h);
            assert!((fd - jet.gradient.real_dot(&e)).abs() < 1e-8);
        }
        let f = |s: f64| d.value(&(&z + &(&CVec::basis(2, 1) * s))).unwrap();
        let second = (f(1e-4) - 2.0 * f(0.0) + f(-1e-4)) / 1e-8;
        assert!((second - jet.real_hessian(&CVec::basis(2, 1), &CVec::basis(2, 1))).abs() < 1e-5);
    }

    #[test]
    fn defining_values_at_reference_points() {
        let b = DomainSpec::unit_ball(2);
        assert_eq!(b.value(&CVec::zeros(2)).unwrap(), -1.0);
        let (v, g, _) = defining_value(&b, &CVec::basis(2, 0)).unwrap();
        assert_eq!(v, 0.0);
        assert!(g.normalized().unwrap().dist(&CVec::basis(2, 0)) < 1e-15);
        let s9 = DomainSpec::local_model_s9();
        assert!((s9.value(&CVec::from_real(&[-0.01, 0.0])).unwrap() + 0.01).abs() < 1e-16);
        assert!(matches!(
            s9.value(&CVec::from_real(&[0.3, 0.0])),
            Err(Error::Region { .. })
        ));
    }

    #[test]
    fn enclosing_balls() {
        assert_eq!(DomainSpec::unit_ball(3).enclosing_ball().unwrap().1, 1.0);
        assert_eq!(DomainSpec::ellipsoid(&[1.0, 4.0]).unwrap().enclosing_ball().unwrap().1, 1.0);
        assert_eq!(DomainSpec::ellipsoid(&[0.25, 4.0]).unwrap().enclosing_ball().unwrap().1, 2.0);
        assert!(DomainSpec::local_model_s9().enclosing_ball().is_none());
    }
}
