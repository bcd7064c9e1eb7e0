//! Points and tangent vectors in C^N.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vector in C^N with the Hermitian product `<a, b> = sum a_j conj(b_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CVec(pub Vec<Complex64>);

pub type PointC = CVec;
pub type VectorC = CVec;

impl CVec {
    pub fn zeros(n: usize) -> Self {
        CVec(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(re: &[f64]) -> Self {
        CVec(re.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Builds from interleaved `(re, im)` pairs.
    pub fn from_reals(x: &[f64]) -> Self {
        assert!(x.len() % 2 == 0, "interleaved length must be even");
        CVec(x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    pub fn to_reals(&self) -> Vec<f64> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn inner(&self, other: &CVec) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    /// Real Euclidean product of the underlying R^{2N} vectors.
    pub fn real_dot(&self, other: &CVec) -> f64 {
        self.inner(other).re
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        // hypot-style accumulation keeps tiny differences accurate
        let scale = self.0.iter().fold(0.0f64, |m, c| m.max(c.re.abs()).max(c.im.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        let s: f64 = self
            .0
            .iter()
            .map(|c| (c.re / scale).powi(2) + (c.im / scale).powi(2))
            .sum();
        scale * s.sqrt()
    }

    pub fn dist(&self, other: &CVec) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(&self) -> Option<CVec> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn scale_c(&self, s: Complex64) -> CVec {
        CVec(self.0.iter().map(|c| c * s).collect())
    }

    pub fn conj(&self) -> CVec {
        CVec(self.0.iter().map(|c| c.conj()).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `|z|^2 |w|^2 - |<z,w>|^2`, evaluated as a sum of squared 2x2 minors so it
    /// stays accurate when z and w are nearly parallel.
    pub fn wedge_norm_sqr(&self, other: &CVec) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for j in 0..n {
            for k in j + 1..n {
                s += (self.0[j] * other.0[k] - self.0[k] * other.0[j]).norm_sqr();
            }
        }
        s
    }
}

impl Index<usize> for CVec {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVec {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&CVec> for &CVec {
            type Output = CVec;
            fn $m(self, rhs: &CVec) -> CVec {
                assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
                CVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a $op b).collect())
            }
        }
        impl $tr<CVec> for CVec {
            type Output = CVec;
            fn $m(self, rhs: CVec) -> CVec {
                &self $op &rhs
            }
        }
        impl $tr<&CVec> for CVec {
            type Output = CVec;
            fn $m(self, rhs: &CVec) -> CVec {
                &self $op rhs
            }
        }
        impl $tr<CVec> for &CVec {
            type Output = CVec;
            fn $m(self, rhs: CVec) -> CVec {
                self $op &rhs
            }
        }
    };
}
binop!(Add, add, +);
binop!(Sub, sub, -);

impl AddAssign<&CVec> for CVec {
    fn add_assign(&mut self, rhs: &CVec) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl Mul<f64> for &CVec {
    type Output = CVec;
    fn mul(self, s: f64) -> CVec {
        CVec(self.0.iter().map(|c| c * s).collect())
    }
}

impl Mul<f64> for CVec {
    type Output = CVec;
    fn mul(self, s: f64) -> CVec {
        &self * s
    }
}

impl Mul<Complex64> for &CVec {
    type Output = CVec;
    fn mul(self, s: Complex64) -> CVec {
        self.scale_c(s)
    }
}

impl Neg for &CVec {
    type Output = CVec;
    fn neg(self) -> CVec {
        CVec(self.0.iter().map(|c| -c).collect())
    }
}

impl Neg for CVec {
    type Output = CVec;
    fn neg(self) -> CVec {
        -&self
    }
}

impl From<Vec<Complex64>> for CVec {
    fn from(v: Vec<Complex64>) -> Self {
        CVec(v)
    }
}

/// Parses `re:im,re:im,...`; a bare `re` means a zero imaginary part.
impl FromStr for CVec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Config("empty vector".into()));
        }
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{t}` in `{s}`")))
        };
        s.split(',')
            .map(|tok| match tok.split_once(':') {
                Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
                None => Ok(Complex64::new(parse(tok)?, 0.0)),
            })
            .collect::<Result<Vec<_>>>()
            .map(CVec)
    }
}

impl fmt::Display for CVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match f.precision() {
                Some(p) => write!(f, "{:.*}:{:.*}", p, c.re, p, c.im)?,
                None => write!(f, "{}:{}", c.re, c.im)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_is_conjugate_linear_in_second_slot() {
        let a = CVec(vec![c(0.0, 1.0), c(1.0, 0.0)]);
        let b = CVec(vec![c(0.0, 1.0), c(0.0, 0.0)]);
        assert_eq!(a.inner(&b), c(1.0, 0.0));
        assert_eq!(b.inner(&a), c(1.0, 0.0));
        let i = CVec(vec![c(0.0, 1.0)]);
        assert_eq!(CVec::from_real(&[1.0]).inner(&i), c(0.0, -1.0));
    }

    #[test]
    fn parse_and_display_roundtrip() {
        let v: CVec = "0.5:-0.25,1".parse().unwrap();
        assert_eq!(v.0, vec![c(0.5, -0.25), c(1.0, 0.0)]);
        let back: CVec = v.to_string().parse().unwrap();
        assert_eq!(back, v);
        assert!("0.1:x".parse::<CVec>().is_err());
        assert!("".parse::<CVec>().is_err());
    }

    #[test]
    fn wedge_matches_lagrange_identity() {
        let z = CVec(vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.05, 0.0)]);
        let w = CVec(vec![c(0.1, -0.2), c(0.3, 0.3), c(-0.1, 0.2)]);
        let direct = z.norm_sqr() * w.norm_sqr() - z.inner(&w).norm_sqr();
        assert!((z.wedge_norm_sqr(&w) - direct).abs() < 1e-15);
        assert_eq!(z.wedge_norm_sqr(&(&z * c(0.0, 2.0))), 0.0);
    }

    #[test]
    fn norm_handles_tiny_components() {
        let v = CVec(vec![c(3e-200, 4e-200)]);
        assert!((v.norm() / 5e-200 - 1.0).abs() < 1e-14);
    }
}
