use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// One eigenvalue with a unit-norm right eigenvector.
#[derive(Clone, Debug)]
pub struct EigPair {
    pub value: Complex64,
    pub vector: CVector,
}

pub fn cmatrix_from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Dimension("matrix has non-finite entries".into()))
    }
}

/// All eigenpairs of a square complex matrix.
///
/// Uses the complex Schur form `m = Q T Q^H` and back-substitution on the
/// triangular factor, followed by one step of inverse iteration per pair.
pub fn eig(m: &CMatrix) -> Result<Vec<EigPair>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "eig needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    check_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![EigPair {
            value: m[(0, 0)],
            vector: CVector::from_element(1, Complex64::new(1.0, 0.0)),
        }]);
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::convergence("complex Schur iteration", 10_000, f64::NAN))?;
    let (q, t) = schur.unpack();
    let tiny = f64::EPSILON * scale;

    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let lambda = t[(i, i)];
        let mut y = CVector::zeros(n);
        y[i] = Complex64::new(1.0, 0.0);
        for k in (0..i).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in (k + 1)..=i {
                acc += t[(k, l)] * y[l];
            }
            let mut d = t[(k, k)] - lambda;
            if d.norm() < tiny {
                d = Complex64::new(tiny, 0.0);
            }
            y[k] = -acc / d;
        }
        let mut v = &q * y;
        let nv = v.norm();
        v /= Complex64::new(nv, 0.0);
        refine_pair(m, lambda, &mut v, scale);
        pairs.push(EigPair { value: lambda, vector: v });
    }

    let resid_bound = 1e-10 * scale;
    let worst = pairs
        .iter()
        .map(|p| (m * &p.vector - &p.vector * p.value).norm())
        .fold(0.0, f64::max);
    if worst > resid_bound.max(1e-300) {
        return Err(Error::convergence("eigenvector back-substitution", 1, worst));
    }
    Ok(pairs)
}

/// One inverse-iteration step with a slightly shifted eigenvalue; keeps
/// the old vector if the shifted system cannot be solved.
fn refine_pair(m: &CMatrix, lambda: Complex64, v: &mut CVector, scale: f64) {
    let n = m.nrows();
    let shift = lambda + Complex64::new(1e-12 * scale, 1e-12 * scale);
    let a = m - CMatrix::identity(n, n) * shift;
    if let Some(x) = a.lu().solve(v) {
        let nx = x.norm();
        if nx.is_finite() && nx > 0.0 {
            let cand = x / Complex64::new(nx, 0.0);
            let old = (m * &*v - &*v * lambda).norm();
            let new = (m * &cand - &cand * lambda).norm();
            if new < old {
                *v = cand;
            }
        }
    }
}

/// Solve `a x = b` by partial-pivot LU. Fails when a pivot is negligible
/// relative to the largest entry of `a`.
pub fn lu_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "lu_solve: {}x{} system with {}x{} right-hand side",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lu = a.clone().lu();
    let u = lu.u();
    let min_pivot = (0..u.nrows()).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if scale == 0.0 || min_pivot <= 1e-14 * scale {
        let condition = if min_pivot > 0.0 { scale / min_pivot } else { f64::INFINITY };
        return Err(Error::Singular {
            what: "linear system".into(),
            condition,
        });
    }
    lu.solve(b).ok_or(Error::Singular {
        what: "linear system".into(),
        condition: f64::INFINITY,
    })
}

pub fn det(a: &CMatrix) -> Complex64 {
    a.clone().lu().determinant()
}

/// Numerical rank of a real matrix (singular values above
/// `tol * sigma_max`).
pub fn real_rank(a: &DMatrix<f64>, tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > tol * smax).count()
}

#[allow(dead_code)]
pub(crate) fn cvec(values: &[Complex64]) -> CVector {
    DVector::from_column_slice(values)
}
