//! DDEs in feedback form `x' = A0 x + A1 x(t - tau) + B g(y, y_tau, mu)`,
//! `y = -C x`: parameters, realizations, nonlinearities, Taylor tensors,
//! equilibria and model files.

mod file;
mod matrix;
mod tensors;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use file::{load_model, parse_model};
pub use matrix::{Entry, ParamMatrix};
pub use tensors::{exponents, finite_difference_tensors, recenter, sorted_multi_indices, TaylorTensors};

use crate::builtin::BuiltinG;
use crate::numcore::{newton_solve, real_rank, NewtonConfig};
use crate::{Error, Result};

/// Auxiliary parameters by name (everything except `mu` and `tau`).
pub type Aux = BTreeMap<String, f64>;

/// A full parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub mu: f64,
    pub tau: f64,
    pub aux: Aux,
}

impl Params {
    pub fn new(mu: f64, tau: f64, aux: Aux) -> Self {
        Self { mu, tau, aux }
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..self.clone() }
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self { tau, ..self.clone() }
    }

    /// Set `mu`, `tau` or an auxiliary value by name. `mu_name` is the
    /// model's label for the bifurcation parameter.
    pub fn set(&mut self, name: &str, value: f64, mu_name: &str) {
        match name {
            "tau" => self.tau = value,
            n if n == "mu" || n == mu_name => self.mu = value,
            n => {
                self.aux.insert(n.to_string(), value);
            }
        }
    }

    pub fn get(&self, name: &str, mu_name: &str) -> Option<f64> {
        match name {
            "tau" => Some(self.tau),
            n if n == "mu" || n == mu_name => Some(self.mu),
            n => self.aux.get(n).copied(),
        }
    }

    /// Auxiliary value that must be present.
    pub fn aux(&self, name: &str) -> Result<f64> {
        self.aux
            .get(name)
            .copied()
            .ok_or_else(|| Error::Validation(format!("missing auxiliary parameter `{name}`")))
    }
}

/// Signature of a user-supplied nonlinearity `g(z1, z2, params)`.
pub type GFn = dyn Fn(&[f64], &[f64], &Params) -> Vec<f64> + Send + Sync;

/// The nonlinearity `g` closing the feedback loop.
#[derive(Clone)]
pub enum Nonlinearity {
    /// One of the reference systems, with analytic tensors.
    Builtin(BuiltinG),
    /// `g(z) = constant + sum_alpha T_alpha (z - center)^alpha` with
    /// `center = (reference_point, reference_point)`.
    Polynomial {
        constant: DVector<f64>,
        tensors: TaylorTensors,
        reference_point: Vec<f64>,
    },
    /// Arbitrary smooth map; tensors come from finite differences.
    Callable { f: Arc<GFn>, max_order: usize },
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Builtin(b) => write!(f, "Builtin({b:?})"),
            Nonlinearity::Polynomial { tensors, .. } => {
                write!(f, "Polynomial(order {})", tensors.order())
            }
            Nonlinearity::Callable { max_order, .. } => write!(f, "Callable(max_order {max_order})"),
        }
    }
}

/// Numeric values of the realization matrices at one parameter point.
#[derive(Clone, Debug)]
pub struct LinearPart {
    pub a0: DMatrix<f64>,
    pub a1: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

/// Default starting point for locating a Hopf point of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct Seed {
    pub omega: f64,
    pub mu: f64,
    pub y0: Option<Vec<f64>>,
}

/// A DDE in feedback form.
#[derive(Clone, Debug)]
pub struct Realization {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub a0: ParamMatrix,
    pub a1: ParamMatrix,
    pub b: ParamMatrix,
    pub c: ParamMatrix,
    pub g: Nonlinearity,
    pub mu_name: String,
    /// Default auxiliary values; `tau` is kept separately.
    pub aux: Aux,
    pub tau: f64,
    pub seed: Option<Seed>,
}

/// A rest point `y_hat = -G(0) g(y_hat, y_hat, mu)`.
#[derive(Clone, Debug)]
pub struct Equilibrium {
    pub y_hat: DVector<f64>,
    pub x_hat: DVector<f64>,
    pub params: Params,
    /// Newton iterations spent locating the point.
    pub iterations: usize,
}

impl Realization {
    pub fn validate(&self) -> Result<()> {
        let (n, m, p) = (self.n, self.m, self.p);
        if n == 0 || m == 0 || p == 0 {
            return Err(Error::Validation("n, m and p must be positive".into()));
        }
        for (label, mat, rows, cols) in [
            ("A0", &self.a0, n, n),
            ("A1", &self.a1, n, n),
            ("B", &self.b, n, p),
            ("C", &self.c, m, n),
        ] {
            if mat.rows() != rows || mat.cols() != cols {
                return Err(Error::Validation(format!(
                    "{label} is {}x{}, expected {rows}x{cols}",
                    mat.rows(),
                    mat.cols()
                )));
            }
        }
        match &self.g {
            Nonlinearity::Polynomial { tensors, constant, reference_point } => {
                if tensors.m() != m || tensors.p() != p || constant.len() != p || reference_point.len() != m {
                    return Err(Error::Validation("polynomial g does not match (m, p)".into()));
                }
            }
            Nonlinearity::Builtin(b) => b.check_dims(m, p)?,
            Nonlinearity::Callable { .. } => {}
        }
        if !(self.tau > 0.0) {
            return Err(Error::Validation(format!("tau must be positive, got {}", self.tau)));
        }
        // Every expression must evaluate at the default point.
        self.linear(&self.default_params())?;
        Ok(())
    }

    /// Parameters at the defaults (seed `mu` when known, else 0).
    pub fn default_params(&self) -> Params {
        let mu = self.seed.as_ref().map_or(0.0, |s| s.mu);
        Params::new(mu, self.tau, self.aux.clone())
    }

    pub fn linear(&self, params: &Params) -> Result<LinearPart> {
        let ctx = matrix::context(params, &self.mu_name);
        Ok(LinearPart {
            a0: self.a0.eval(&ctx)?,
            a1: self.a1.eval(&ctx)?,
            b: self.b.eval(&ctx)?,
            c: self.c.eval(&ctx)?,
        })
    }

    /// `g(z1, z2)` at the given parameters.
    pub fn g(&self, z1: &[f64], z2: &[f64], params: &Params) -> Result<Vec<f64>> {
        if z1.len() != self.m || z2.len() != self.m {
            return Err(Error::Dimension(format!(
                "g expects two vectors of length {}",
                self.m
            )));
        }
        let out = match &self.g {
            Nonlinearity::Builtin(b) => b.eval(z1, z2, params)?,
            Nonlinearity::Polynomial { constant, tensors, reference_point } => {
                let u: Vec<f64> = z1
                    .iter()
                    .zip(reference_point)
                    .map(|(z, c)| z - c)
                    .chain(z2.iter().zip(reference_point).map(|(z, c)| z - c))
                    .collect();
                let mut acc = constant.clone();
                for n in 1..=tensors.order() {
                    for (idx, val) in tensors.block(n) {
                        let w: f64 = idx.iter().map(|&s| u[s]).product();
                        acc += val * w;
                    }
                }
                acc.as_slice().to_vec()
            }
            Nonlinearity::Callable { f, .. } => f(z1, z2, params),
        };
        if out.len() != self.p {
            return Err(Error::Dimension(format!(
                "g returned {} values, expected p = {}",
                out.len(),
                self.p
            )));
        }
        Ok(out)
    }

    /// Largest tensor order the nonlinearity can supply.
    pub fn max_order(&self) -> usize {
        match &self.g {
            Nonlinearity::Builtin(_) => 7,
            Nonlinearity::Polynomial { tensors, .. } => tensors.order().max(7),
            Nonlinearity::Callable { max_order, .. } => *max_order,
        }
    }

    /// Taylor tensors of `g` at the equilibrium, degrees `1..=order`.
    pub fn tensors_at(&self, eq: &Equilibrium, order: usize) -> Result<TaylorTensors> {
        if order > self.max_order() || order > 7 {
            return Err(Error::Capability(format!(
                "tensors of order {order} requested; model supports up to {}",
                self.max_order().min(7)
            )));
        }
        let y = eq.y_hat.as_slice();
        match &self.g {
            Nonlinearity::Builtin(b) => b.tensors(y, &eq.params, order),
            Nonlinearity::Polynomial { constant, tensors, reference_point } => {
                let from: Vec<f64> = reference_point.iter().chain(reference_point).copied().collect();
                let to: Vec<f64> = y.iter().chain(y).copied().collect();
                let (_, shifted) = recenter(tensors, constant, &from, &to);
                Ok(shifted.truncated(order))
            }
            Nonlinearity::Callable { .. } => self.fd_tensors(eq, order),
        }
    }

    /// Finite-difference tensors regardless of the nonlinearity kind.
    pub fn fd_tensors(&self, eq: &Equilibrium, order: usize) -> Result<TaylorTensors> {
        let y = eq.y_hat.as_slice();
        let scale = y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        finite_difference_tensors(
            |z1, z2| self.g(z1, z2, &eq.params),
            y,
            y,
            self.p,
            order,
            FD_BASE_STEP * scale,
        )
    }

    /// Solve `(A0 + A1) x + B g(-C x, -C x, mu) = 0` by Newton iteration,
    /// starting from the state whose output is closest to `y0`.
    ///
    /// Working in state space keeps the solve valid where the static gain
    /// `G(0)` itself is singular.
    pub fn find_equilibrium(&self, params: &Params, y0: &[f64]) -> Result<Equilibrium> {
        if y0.len() != self.m {
            return Err(Error::Dimension(format!(
                "equilibrium guess has length {}, expected m = {}",
                y0.len(),
                self.m
            )));
        }
        let lin = self.linear(params)?;
        let a = &lin.a0 + &lin.a1;
        let x0 = lin
            .c
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Validation(format!("C has no pseudo-inverse: {e}")))?
            * -DVector::from_column_slice(y0);
        let f = |x: &[f64]| -> Result<Vec<f64>> {
            let x = DVector::from_column_slice(x);
            let y = -(&lin.c * &x);
            let gy = DVector::from_vec(self.g(y.as_slice(), y.as_slice(), params)?);
            Ok((&a * &x + &lin.b * gy).as_slice().to_vec())
        };
        let sol = newton_solve(f, x0.as_slice(), &NewtonConfig::default())?;
        let x_hat = DVector::from_vec(sol.x);
        let y_hat = -(&lin.c * &x_hat);
        Ok(Equilibrium { y_hat, x_hat, params: params.clone(), iterations: sol.iterations })
    }

    /// Equilibrium from the model's default guess (zero when none).
    pub fn default_equilibrium(&self, params: &Params) -> Result<Equilibrium> {
        let guess = match &self.g {
            Nonlinearity::Builtin(b) => b.equilibrium_guess(params),
            _ => None,
        }
        .or_else(|| self.seed.as_ref().and_then(|s| s.y0.clone()))
        .unwrap_or_else(|| vec![0.0; self.m]);
        self.find_equilibrium(params, &guess)
    }

    /// Kalman rank tests on `(A0 + A1, B, C)`. Returns human-readable
    /// warnings; an empty list means the realization passed.
    pub fn minimality_warnings(&self, params: &Params) -> Result<Vec<String>> {
        let lin = self.linear(params)?;
        let a = &lin.a0 + &lin.a1;
        let n = self.n;
        let mut ctrb = DMatrix::zeros(n, n * self.p);
        let mut blk = lin.b.clone();
        for k in 0..n {
            ctrb.view_mut((0, k * self.p), (n, self.p)).copy_from(&blk);
            blk = &a * blk;
        }
        let mut obsv = DMatrix::zeros(n * self.m, n);
        let mut blk = lin.c.clone();
        for k in 0..n {
            obsv.view_mut((k * self.m, 0), (self.m, n)).copy_from(&blk);
            blk = blk * &a;
        }
        let mut out = Vec::new();
        if real_rank(&ctrb, 1e-10) < n {
            out.push(format!("realization `{}` is not controllable through (A0 + A1, B)", self.name));
        }
        if real_rank(&obsv, 1e-10) < n {
            out.push(format!("realization `{}` is not observable through (A0 + A1, C)", self.name));
        }
        Ok(out)
    }
}

/// Coarse stencil spacing for finite-difference tensors, relative to
/// `max(1, |y_hat|)`. High-order mixed differences need a wide stencil to
/// stay clear of round-off.
pub const FD_BASE_STEP: f64 = 0.02;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{leukemia_model, pyragas_model};

    fn leuk_at(delta: f64) -> (Realization, Params) {
        let r = leukemia_model();
        let p = r.default_params().with_mu(delta);
        (r, p)
    }

    #[test]
    fn pyragas_rest_point_is_origin() {
        let r = pyragas_model();
        let mut p = r.default_params().with_mu(0.3);
        p.aux.insert("kappa".into(), -0.2);
        let eq = r.find_equilibrium(&p, &[0.1, 0.1]).unwrap();
        assert!(eq.y_hat.amax() < 1e-12);
    }

    #[test]
    fn leukemia_nontrivial_equilibrium() {
        let (r, p) = leuk_at(0.5);
        let eq = r.default_equilibrium(&p).unwrap();
        assert!((eq.x_hat[0] - 1.5_f64.sqrt()).abs() < 1e-10);
        assert!((eq.y_hat[0] + 1.5_f64.sqrt()).abs() < 1e-10);
        let again = r.find_equilibrium(&p, eq.y_hat.as_slice()).unwrap();
        assert!(again.iterations <= 2);
    }

    #[test]
    fn leukemia_trivial_equilibrium() {
        let (r, p) = leuk_at(0.5);
        let eq = r.find_equilibrium(&p, &[0.0]).unwrap();
        assert_eq!(eq.y_hat[0], 0.0);
    }

    #[test]
    fn leukemia_jacobian_closed_form() {
        let (r, p) = leuk_at(0.11);
        let eq = r.default_equilibrium(&p).unwrap();
        let t = r.tensors_at(&eq, 5).unwrap();
        let xn = eq.x_hat[0].powi(2);
        let d1 = -1.0 + 2.5 * (1.0 - xn) / (1.0 + xn).powi(2);
        assert!((t.d1()[(0, 0)] - d1).abs() < 1e-13);
        let fd = r.fd_tensors(&eq, 1).unwrap();
        assert!((fd.d1()[(0, 0)] - d1).abs() < 1e-6);
    }

    #[test]
    fn analytic_and_fd_tensors_agree() {
        let (r, p) = leuk_at(0.11);
        let eq = r.default_equilibrium(&p).unwrap();
        let diff = r.tensors_at(&eq, 5).unwrap().max_diff(&r.fd_tensors(&eq, 5).unwrap(), 5);
        assert!(diff < 1e-5, "leukemia tensors differ by {diff}");

        let r = pyragas_model();
        let mut p = r.default_params();
        p.aux.insert("kappa".into(), -0.3);
        let eq = r.find_equilibrium(&p, &[0.0, 0.0]).unwrap();
        let diff = r.tensors_at(&eq, 5).unwrap().max_diff(&r.fd_tensors(&eq, 5).unwrap(), 5);
        assert!(diff < 1e-5, "pyragas tensors differ by {diff}");
    }

    #[test]
    fn pyragas_has_no_quadratic_terms() {
        let r = pyragas_model();
        let p = r.default_params();
        let eq = r.find_equilibrium(&p, &[0.0, 0.0]).unwrap();
        let t = r.tensors_at(&eq, 3).unwrap();
        assert_eq!(t.block(2).count(), 0);
        assert_eq!(t.block(3).count(), 4);
    }

    #[test]
    fn bad_shape_is_rejected() {
        let text = crate::builtin::PYRAGAS_JSON.replace(
            r#""A1": [["kappa*cos(beta)", 0], [0, "kappa*cos(beta)"]]"#,
            r#""A1": [[1, 0], [0, 1], [0, 0]]"#,
        );
        assert!(matches!(parse_model(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn schema_error_names_field() {
        let text = crate::builtin::LEUKEMIA_JSON.replace(r#""n": 1,"#, r#""n": "one","#);
        match parse_model(&text) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "n"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
