//! Complex affine maps `x -> M x + t` on C^N.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cvec::CVec;
use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub fn matvec(m: &CMat, v: &CVec) -> CVec {
    assert_eq!(m.ncols(), v.dim(), "dimension mismatch");
    CVec(
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: CMat,
    pub translation: CVec,
}

impl AffineMap {
    pub fn identity(n: usize) -> Self {
        AffineMap {
            linear: CMat::identity(n, n),
            translation: CVec::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.dim()
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        matvec(&self.linear, x) + &self.translation
    }

    pub fn apply_linear(&self, v: &CVec) -> CVec {
        matvec(&self.linear, v)
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let inv = self
            .linear
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular affine map".into()))?;
        let t = -matvec(&inv, &self.translation);
        Ok(AffineMap {
            linear: inv,
            translation: t,
        })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            linear: &self.linear * &inner.linear,
            translation: self.apply(&inner.translation),
        }
    }

    pub fn unitary_defect(&self) -> f64 {
        let n = self.dim();
        let g = self.linear.adjoint() * &self.linear - CMat::identity(n, n);
        g.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_defect() <= tol
    }

    /// Spectral norm of the linear part.
    pub fn operator_norm(&self) -> f64 {
        let h = self.linear.adjoint() * &self.linear;
        let e = nalgebra::linalg::SymmetricEigen::new(h);
        e.eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x)).sqrt()
    }
}
