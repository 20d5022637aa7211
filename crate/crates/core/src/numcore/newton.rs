use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Settings for [`newton_solve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub max_iter: usize,
    pub tol_residual: f64,
    pub tol_step: f64,
    /// Relative finite-difference increment; the absolute step for
    /// component `i` is `jacobian_step * max(1, |x_i|)`.
    pub jacobian_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol_residual: 1e-12,
            tol_step: 1e-13,
            jacobian_step: 1e-7,
        }
    }
}

impl NewtonConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0
            || !(self.tol_residual > 0.0)
            || !(self.tol_step > 0.0)
            || !(self.jacobian_step > 0.0)
        {
            return Err(Error::Validation(format!("invalid Newton settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NewtonSolution {
    pub x: Vec<f64>,
    /// Infinity norm of `f(x)`.
    pub residual: f64,
    pub iterations: usize,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn jacobian<F>(f: &mut F, x: &[f64], h_rel: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for i in 0..n {
        let h = h_rel * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = f(&xp)?;
        xp[i] = x[i] - h;
        let fm = f(&xp)?;
        xp[i] = x[i];
        for r in 0..n {
            jac[(r, i)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Solve the square system `f(x) = 0` by damped Newton iteration with a
/// central-difference Jacobian.
///
/// Succeeds only when `||f(x)||_inf <= tol_residual`. A small step alone is
/// not accepted as convergence.
pub fn newton_solve<F>(mut f: F, x0: &[f64], cfg: &NewtonConfig) -> Result<NewtonSolution>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("Newton start point is not finite".into()));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    if fx.len() != n {
        return Err(Error::Dimension(format!(
            "Newton system maps R^{n} to R^{}",
            fx.len()
        )));
    }
    let mut res = inf_norm(&fx);
    let mut stalled = 0;
    for it in 0..cfg.max_iter {
        if res <= cfg.tol_residual {
            return Ok(NewtonSolution { x, residual: res, iterations: it });
        }
        let jac = jacobian(&mut f, &x, cfg.jacobian_step)?;
        let svd = jac.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= 1e14) {
            return Err(Error::Singular { what: "Newton Jacobian".into(), condition });
        }
        let rhs = DVector::from_iterator(n, fx.iter().map(|v| -v));
        let dx = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::Singular { what: format!("Newton Jacobian ({e})"), condition })?;

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Ok(ft) = f(&trial) {
                let rt = inf_norm(&ft);
                if rt.is_finite() && rt < res {
                    x = trial;
                    fx = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // No decrease along the Newton direction: take the full step if it
            // is already negligible, otherwise give up.
            return if res <= cfg.tol_residual {
                Ok(NewtonSolution { x, residual: res, iterations: it + 1 })
            } else {
                Err(Error::convergence("Newton line search", it + 1, res))
            };
        }
        let step = inf_norm(dx.as_slice()) * lambda;
        let scale = inf_norm(&x).max(1.0);
        if step <= cfg.tol_step * scale {
            stalled += 1;
            if stalled >= 3 && res > cfg.tol_residual {
                return Err(Error::convergence("Newton iteration (stalled)", it + 1, res));
            }
        } else {
            stalled = 0;
        }
    }
    if res <= cfg.tol_residual {
        Ok(NewtonSolution { x, residual: res, iterations: cfg.max_iter })
    } else {
        Err(Error::convergence("Newton iteration", cfg.max_iter, res))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_quadratic() {
        let sol = newton_solve(|x| Ok(vec![x[0] * x[0] - 4.0]), &[1.0], &NewtonConfig::default()).unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-12);
        assert!(sol.residual <= 1e-12);
    }

    #[test]
    fn linear_pair() {
        let sol = newton_solve(
            |v| Ok(vec![v[0] + v[1] - 1.0, v[0] - v[1]]),
            &[0.0, 0.0],
            &NewtonConfig::default(),
        )
        .unwrap();
        assert!((sol.x[0] - 0.5).abs() < 1e-14 && (sol.x[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn singular_jacobian_is_reported() {
        let r = newton_solve(|v| Ok(vec![v[0] + v[1] - 1.0, 2.0 * v[0] + 2.0 * v[1] - 3.0]), &[0.0, 0.0], &NewtonConfig::default());
        assert!(matches!(r, Err(Error::Singular { .. })));
    }

    #[test]
    fn no_root_fails() {
        let r = newton_solve(|x| Ok(vec![x[0] * x[0] + 1.0]), &[0.3], &NewtonConfig::default());
        assert!(r.is_err());
    }
}
