use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Chebyshev points of the first kind on `[-h, h]`, sorted ascending.
pub fn chebyshev_nodes(count: usize, h: f64) -> Vec<f64> {
    let mut nodes: Vec<f64> = (0..count)
        .map(|k| {
            let t = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * count) as f64;
            h * t.cos()
        })
        .collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes
}

/// Result of [`polyfit`]: monomial coefficients `c[k]` of `x^k` and the
/// largest absolute residual over the samples.
#[derive(Clone, Debug)]
pub struct PolyFit {
    pub coeffs: Vec<f64>,
    pub residual: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Least-squares polynomial of the given degree through `(xs, ys)`.
///
/// The fit is done in the Chebyshev basis on the symmetric interval
/// spanned by the samples, then converted to monomials in `x`.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolyFit> {
    if xs.len() != ys.len() || xs.len() <= degree {
        return Err(Error::Dimension(format!(
            "polyfit of degree {degree} needs more than {degree} samples (got {} and {})",
            xs.len(),
            ys.len()
        )));
    }
    let h = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if h == 0.0 {
        return Err(Error::Dimension("polyfit samples are all at zero".into()));
    }
    let n = xs.len();
    let mut v = DMatrix::zeros(n, degree + 1);
    for (i, &x) in xs.iter().enumerate() {
        let t = x / h;
        let mut tkm1 = 1.0;
        let mut tk = t;
        v[(i, 0)] = 1.0;
        if degree >= 1 {
            v[(i, 1)] = t;
        }
        for k in 2..=degree {
            let next = 2.0 * t * tk - tkm1;
            tkm1 = tk;
            tk = next;
            v[(i, k)] = tk;
        }
    }
    let b = DVector::from_column_slice(ys);
    let cheb = v
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Singular { what: format!("polyfit ({e})"), condition: f64::INFINITY })?;
    let residual = (&v * &cheb - &b).amax();

    // Chebyshev -> monomial in t, via the recurrence on coefficient vectors.
    let mut mono_t = vec![0.0; degree + 1];
    let mut pkm1 = vec![0.0; degree + 1];
    let mut pk = vec![0.0; degree + 1];
    pkm1[0] = 1.0;
    mono_t[0] += cheb[0];
    if degree >= 1 {
        pk[1] = 1.0;
        mono_t[1] += cheb[1];
    }
    for k in 2..=degree {
        let mut next = vec![0.0; degree + 1];
        for i in 0..degree {
            next[i + 1] += 2.0 * pk[i];
        }
        for i in 0..=degree {
            next[i] -= pkm1[i];
        }
        for i in 0..=degree {
            mono_t[i] += cheb[k] * next[i];
        }
        pkm1 = std::mem::replace(&mut pk, next);
    }
    let coeffs = mono_t
        .iter()
        .enumerate()
        .map(|(k, c)| c / h.powi(k as i32))
        .collect();
    Ok(PolyFit { coeffs, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cubic() {
        let xs = chebyshev_nodes(9, 0.01);
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + 30.0 * x * x - 500.0 * x * x * x).collect();
        let fit = polyfit(&xs, &ys, 4).unwrap();
        let expect = [1.0, -2.0, 30.0, -500.0, 0.0];
        for (k, (c, e)) in fit.coeffs.iter().zip(expect).enumerate() {
            assert!((c - e).abs() < 1e-12 / 0.01_f64.powi(k as i32), "{c} vs {e}");
        }
        assert!(fit.residual < 1e-13);
    }
}
