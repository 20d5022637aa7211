//! Transfer functions `G(s) = C (sI - A0 - A1 e^{-s tau})^{-1} B`,
//! `GJ(s) = G(s)(D1 + D2 e^{-s tau})` and the tracked characteristic
//! function with its normalized eigenvectors.

use num_complex::Complex64;

use crate::model::{Equilibrium, Params, Realization};
use crate::numcore::{cmatrix_from_real, eig, lu_solve, CMatrix, CVector};
use crate::{Error, Result};

/// Frequency `s` together with the parameter point.
#[derive(Clone, Debug)]
pub struct FrequencyPoint {
    pub s: Complex64,
    pub params: Params,
}

/// Characteristic function value with right eigenvector `v` (unit norm,
/// phase-fixed) and left eigenvector `w` of `GJ^T` scaled so `w^T v = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigTriple {
    pub lambda_hat: Complex64,
    pub v: CVector,
    pub w: CVector,
}

impl EigTriple {
    /// `Q(u) = (w^T u) v`.
    pub fn project(&self, u: &CVector) -> CVector {
        &self.v * self.w.dot(u)
    }

    /// Same triple with `v` rotated by `e^{i phi}` and `w` counter-rotated.
    pub fn rephased(&self, phi: f64) -> Self {
        let r = Complex64::from_polar(1.0, phi);
        Self {
            lambda_hat: self.lambda_hat,
            v: &self.v * r,
            w: &self.w / r,
        }
    }
}

/// Realization matrices, linearization and equilibrium at one parameter
/// point, ready for repeated frequency evaluations.
#[derive(Clone, Debug)]
pub struct OperatingPoint {
    pub eq: Equilibrium,
    a0: CMatrix,
    a1: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d1: CMatrix,
    d2: CMatrix,
}

impl OperatingPoint {
    /// Linearize at the model's default equilibrium for `params`.
    pub fn new(r: &Realization, params: &Params) -> Result<Self> {
        let eq = r.default_equilibrium(params)?;
        Self::at(r, eq)
    }

    pub fn at(r: &Realization, eq: Equilibrium) -> Result<Self> {
        let lin = r.linear(&eq.params)?;
        let t = r.tensors_at(&eq, 1)?;
        Ok(Self {
            a0: cmatrix_from_real(&lin.a0),
            a1: cmatrix_from_real(&lin.a1),
            b: cmatrix_from_real(&lin.b),
            c: cmatrix_from_real(&lin.c),
            d1: cmatrix_from_real(&t.d1()),
            d2: cmatrix_from_real(&t.d2()),
            eq,
        })
    }

    pub fn params(&self) -> &Params {
        &self.eq.params
    }

    pub fn tau(&self) -> f64 {
        self.eq.params.tau
    }

    pub fn m(&self) -> usize {
        self.c.nrows()
    }

    /// `G(s)`, an `m x p` matrix.
    pub fn g(&self, s: Complex64) -> Result<CMatrix> {
        let n = self.a0.nrows();
        let delay = (-s * self.tau()).exp();
        let k = CMatrix::identity(n, n) * s - &self.a0 - &self.a1 * delay;
        let x = lu_solve(&k, &self.b).map_err(|_| Error::SingularResolvent { s })?;
        Ok(&self.c * x)
    }

    /// Linearization `D1 + D2 e^{-s tau}` of `g` along `e^{st}`.
    pub fn jacobian(&self, s: Complex64) -> CMatrix {
        &self.d1 + &self.d2 * (-s * self.tau()).exp()
    }

    /// Characteristic matrix of the linearized DDE,
    /// `sI - A0 - A1 e^{-s tau} + B (D1 + D2 e^{-s tau}) C`.
    pub fn char_matrix(&self, s: Complex64) -> CMatrix {
        let n = self.a0.nrows();
        let delay = (-s * self.tau()).exp();
        CMatrix::identity(n, n) * s - &self.a0 - &self.a1 * delay + &self.b * self.jacobian(s) * &self.c
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn gj(&self, s: Complex64) -> Result<CMatrix> {
        Ok(self.g(s)? * self.jacobian(s))
    }

    /// Eigentriple of `GJ(s)` nearest `-1`, or nearest the seed's value.
    pub fn char_function(&self, s: Complex64, seed: Option<&EigTriple>) -> Result<EigTriple> {
        eig_triple(&self.gj(s)?, seed)
    }

    /// `lambda_hat(i omega)` selected nearest `-1`.
    pub fn lambda(&self, omega: f64) -> Result<Complex64> {
        Ok(self.char_function(Complex64::new(0.0, omega), None)?.lambda_hat)
    }
}

const SIMPLICITY_GAP: f64 = 1e-8;
const MAX_TRACKING_JUMP: f64 = 0.5;

/// Select and normalize the eigentriple of `gj`.
pub fn eig_triple(gj: &CMatrix, seed: Option<&EigTriple>) -> Result<EigTriple> {
    let target = seed.map_or(Complex64::new(-1.0, 0.0), |t| t.lambda_hat);
    let pairs = eig(gj)?;
    let (idx, _) = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| (i, (p.value - target).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Dimension("empty transfer matrix".into()))?;
    let lambda = pairs[idx].value;
    let gap = pairs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != idx)
        .map(|(_, p)| (p.value - lambda).norm())
        .fold(f64::INFINITY, f64::min);
    if gap < SIMPLICITY_GAP {
        return Err(Error::Multiplicity { lambda, gap });
    }
    if let Some(t) = seed {
        if (lambda - t.lambda_hat).norm() > MAX_TRACKING_JUMP {
            return Err(Error::TrackingJump { from: t.lambda_hat, to: lambda });
        }
    }
    let v = phase_fix(pairs[idx].vector.clone());

    let gjt = gj.transpose();
    let left = eig(&gjt)?;
    let w = left
        .iter()
        .min_by(|a, b| (a.value - lambda).norm().total_cmp(&(b.value - lambda).norm()))
        .map(|p| p.vector.clone())
        .expect("nonempty spectrum");
    let pairing = w.dot(&v);
    if pairing.norm() < 1e-12 {
        return Err(Error::Multiplicity { lambda, gap: pairing.norm() });
    }
    let w = w / pairing;
    Ok(EigTriple { lambda_hat: lambda, v, w })
}

/// Normalize to unit norm and rotate so the first component whose modulus
/// is within `1e-9` (relative) of the largest becomes real and positive.
fn phase_fix(v: CVector) -> CVector {
    let v = &v / Complex64::new(v.norm(), 0.0);
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-9))
        .copied()
        .expect("nonzero vector");
    let rot = pivot.conj() / pivot.norm();
    let mut out = v * rot;
    let k = out.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap();
    out[k] = Complex64::new(out[k].norm(), 0.0);
    out
}

/// `G(s)` at a frequency point.
pub fn transfer_g(r: &Realization, fp: &FrequencyPoint) -> Result<CMatrix> {
    let lin = r.linear(&fp.params)?;
    let n = r.n;
    let delay = (-fp.s * fp.params.tau).exp();
    let k = CMatrix::identity(n, n) * fp.s - cmatrix_from_real(&lin.a0) - cmatrix_from_real(&lin.a1) * delay;
    let x = lu_solve(&k, &cmatrix_from_real(&lin.b)).map_err(|_| Error::SingularResolvent { s: fp.s })?;
    Ok(cmatrix_from_real(&lin.c) * x)
}

/// `GJ(s)` at a frequency point, linearized at `eq`.
pub fn transfer_gj(r: &Realization, eq: &Equilibrium, fp: &FrequencyPoint) -> Result<CMatrix> {
    let mut eq = eq.clone();
    eq.params = fp.params.clone();
    OperatingPoint::at(r, eq)?.gj(fp.s)
}

/// Characteristic function at a frequency point.
pub fn char_function(
    r: &Realization,
    eq: &Equilibrium,
    fp: &FrequencyPoint,
    seed: Option<&EigTriple>,
) -> Result<EigTriple> {
    eig_triple(&transfer_gj(r, eq, fp)?, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{leukemia, leukemia_model, pyragas, pyragas_model};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pyragas_op(mu: f64, tau: f64, kappa: f64) -> OperatingPoint {
        let r = pyragas_model();
        let mut p = r.default_params().with_mu(mu).with_tau(tau);
        p.aux.insert("kappa".into(), kappa);
        OperatingPoint::new(&r, &p).unwrap()
    }

    #[test]
    fn pyragas_g_at_kappa_zero() {
        let op = pyragas_op(0.0, 1.0, 0.0);
        let g = op.g(c(0.0, 1.0)).unwrap();
        assert!((g[(0, 0)] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(g[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn static_gain_scalar() {
        let r = leukemia_model();
        let p = r.default_params().with_mu(0.3);
        let g0 = transfer_g(&r, &FrequencyPoint { s: c(0.0, 0.0), params: p }).unwrap();
        assert!((g0[(0, 0)] - c(1.0 / 1.3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pyragas_gj_and_eigenvalues() {
        let op = pyragas_op(0.0, 1.0, 0.0);
        let gj = op.gj(c(0.0, 1.0)).unwrap();
        // G(i) = -i I and D1 = [[0, 1], [-1, 0]], so GJ = -i [[0, 1], [-1, 0]].
        assert!((gj[(0, 1)] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((gj[(1, 0)] - c(0.0, 1.0)).norm() < 1e-14);
        let mut vals: Vec<f64> = eig(&gj).unwrap().iter().map(|p| p.value.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let t = op.char_function(c(0.0, 1.0), None).unwrap();
        assert!((t.lambda_hat + 1.0).norm() < 1e-14);
    }

    #[test]
    fn pyragas_eigenvectors() {
        let op = pyragas_op(0.05, 1.7, -0.3);
        let s = c(0.0, 0.9);
        let t = op.char_function(s, None).unwrap();
        let lam = pyragas::lambda_hat(s, op.params()).unwrap();
        assert!((t.lambda_hat - lam).norm() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((t.v[0] - c(r, 0.0)).norm() < 1e-12 && (t.v[1] - c(0.0, -r)).norm() < 1e-12);
        assert!((t.w[0] - c(r, 0.0)).norm() < 1e-12 && (t.w[1] - c(0.0, r)).norm() < 1e-12);
    }

    #[test]
    fn leukemia_gj_closed_form() {
        let r = leukemia_model();
        let p = r.default_params().with_mu(0.11);
        let op = OperatingPoint::new(&r, &p).unwrap();
        let s = c(0.0, 0.26);
        let t = op.char_function(s, None).unwrap();
        let expect = leukemia::gj(s, &p).unwrap();
        assert!((t.lambda_hat - expect).norm() < 1e-12);
        assert_eq!(t.v[0], c(1.0, 0.0));
        assert!((t.w[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eigentriple_invariants() {
        let op = pyragas_op(-0.1, 2.3, 0.4);
        let s = c(0.0, 1.3);
        let gj = op.gj(s).unwrap();
        let t = op.char_function(s, None).unwrap();
        assert!((&gj * &t.v - &t.v * t.lambda_hat).norm() <= 1e-9);
        assert!((gj.transpose() * &t.w - &t.w * t.lambda_hat).norm() <= 1e-9);
        assert!((t.w.dot(&t.v) - 1.0).norm() <= 1e-12);
        let again = op.char_function(s, None).unwrap();
        assert_eq!(t, again);
        let det = (CMatrix::identity(2, 2) * t.lambda_hat - gj).determinant();
        assert!(det.norm() <= 1e-8);
    }

    #[test]
    fn tracking_is_continuous() {
        let op = pyragas_op(0.0, 1.0, -0.05);
        let mut seed = op.char_function(c(0.0, 0.95), None).unwrap();
        for k in 1..=100 {
            let s = c(0.0, 0.95 + 1e-3 * k as f64);
            let t = op.char_function(s, Some(&seed)).unwrap();
            assert!((t.lambda_hat - seed.lambda_hat).norm() < 1e-2);
            seed = t;
        }
    }
}
