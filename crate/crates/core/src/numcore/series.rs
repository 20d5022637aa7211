use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use super::linalg::{CMatrix, CVector};
use crate::{Error, Result};

/// Truncated power series in `theta` whose coefficients are complex
/// vectors of a fixed dimension. Coefficient `k` multiplies `theta^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSeries {
    order: usize,
    coeffs: Vec<CVector>,
}

impl ThetaSeries {
    pub fn zero(order: usize, dim: usize) -> Self {
        Self {
            order,
            coeffs: vec![CVector::zeros(dim); order + 1],
        }
    }

    /// `v * theta^degree`, or the zero series if `degree > order`.
    pub fn monomial(order: usize, degree: usize, v: CVector) -> Self {
        let mut s = Self::zero(order, v.len());
        if degree <= order {
            s.coeffs[degree] = v;
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<CVector>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::Dimension("a series needs at least one coefficient".into()));
        };
        let dim = first.len();
        if coeffs.iter().any(|c| c.len() != dim) {
            return Err(Error::Dimension("series coefficients differ in dimension".into()));
        }
        Ok(Self { order: coeffs.len() - 1, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn coeff(&self, k: usize) -> &CVector {
        &self.coeffs[k]
    }

    pub fn coeff_mut(&mut self, k: usize) -> &mut CVector {
        &mut self.coeffs[k]
    }

    pub fn set_coeff(&mut self, k: usize, v: CVector) -> Result<()> {
        if k > self.order || v.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "cannot set degree {k} (order {}) with a vector of length {}",
                self.order,
                v.len()
            )));
        }
        self.coeffs[k] = v;
        Ok(())
    }

    pub fn coeffs(&self) -> &[CVector] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::Dimension(format!(
                "series orders differ ({} vs {})",
                self.order, other.order
            )));
        }
        Ok(())
    }

    /// Truncated Cauchy product. Coefficients are multiplied componentwise
    /// when the dimensions agree; a dimension-1 factor acts as a scalar.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let (da, db) = (self.dim(), other.dim());
        let dim = match (da, db) {
            _ if da == db => da,
            (1, _) => db,
            (_, 1) => da,
            _ => {
                return Err(Error::Dimension(format!(
                    "cannot multiply series of dimensions {da} and {db}"
                )))
            }
        };
        let mut out = Self::zero(self.order, dim);
        for i in 0..=self.order {
            let a = &self.coeffs[i];
            if a.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            for j in 0..=(self.order - i) {
                let b = &other.coeffs[j];
                let target = &mut out.coeffs[i + j];
                for c in 0..dim {
                    let x = if da == 1 { a[0] } else { a[c] };
                    let y = if db == 1 { b[0] } else { b[c] };
                    target[c] += x * y;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c.map(|z| z.conj())).collect(),
        }
    }

    /// Apply a matrix to every coefficient.
    pub fn map_matrix(&self, m: &CMatrix) -> Result<Self> {
        if m.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix applied to a series of dimension {}",
                m.nrows(),
                m.ncols(),
                self.dim()
            )));
        }
        Ok(Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| m * c).collect(),
        })
    }

    /// Sum of `coeff_k * theta^k`.
    pub fn eval(&self, theta: f64) -> CVector {
        let mut acc = CVector::zeros(self.dim());
        for c in self.coeffs.iter().rev() {
            acc = acc * Complex64::new(theta, 0.0) + c;
        }
        acc
    }

    /// Largest coefficient magnitude among the given degrees.
    pub fn max_abs(&self, degrees: impl IntoIterator<Item = usize>) -> f64 {
        degrees
            .into_iter()
            .filter(|&k| k <= self.order)
            .flat_map(|k| self.coeffs[k].iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.dim() != other.dim() {
            return Err(Error::Dimension("series dimensions differ".into()));
        }
        Ok(Self {
            order: self.order,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }
}

impl Add for &ThetaSeries {
    type Output = ThetaSeries;
    /// Panics on mismatched shapes; use [`ThetaSeries::try_add`] otherwise.
    fn add(self, rhs: Self) -> ThetaSeries {
        self.try_add(rhs).expect("series shapes must agree")
    }
}

impl Neg for &ThetaSeries {
    type Output = ThetaSeries;
    fn neg(self) -> ThetaSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &ThetaSeries {
    type Output = ThetaSeries;
    fn sub(self, rhs: Self) -> ThetaSeries {
        self + &(-rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(order: usize, coeffs: &[f64]) -> ThetaSeries {
        let mut s = ThetaSeries::zero(order, 1);
        for (k, &x) in coeffs.iter().enumerate() {
            s.set_coeff(k, CVector::from_element(1, c(x, 0.0))).unwrap();
        }
        s
    }

    #[test]
    fn theta_squared() {
        let t = scalar(4, &[0.0, 1.0]);
        let sq = t.mul(&t).unwrap();
        assert_eq!(sq, scalar(4, &[0.0, 0.0, 1.0]));
    }

    #[test]
    fn truncation_drops_theta4() {
        let a = scalar(2, &[1.0, 0.0, 1.0]);
        let b = scalar(2, &[1.0, 0.0, -1.0]);
        assert_eq!(a.mul(&b).unwrap(), scalar(2, &[1.0]));
    }

    #[test]
    fn conjugate_vectors() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![c(r, 0.0), c(0.0, -r)]);
        let a = ThetaSeries::monomial(3, 1, v.clone());
        let b = ThetaSeries::monomial(3, 1, v.map(|z| z.conj()));
        let p = a.mul(&b).unwrap();
        assert!((p.coeff(2)[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((p.coeff(2)[1] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(p.max_abs([0, 1, 3]) == 0.0);
    }

    #[test]
    fn mismatched_orders_rejected() {
        assert!(scalar(2, &[1.0]).mul(&scalar(3, &[1.0])).is_err());
    }
}
