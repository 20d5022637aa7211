//! Hopf points: solutions of `lambda_hat(i omega0, mu0, tau0) = -1`,
//! continuation of Hopf curves in `(mu, tau)`, and the transversality
//! condition.

use num_complex::Complex64;

use crate::model::{Params, Realization};
use crate::numcore::{newton_solve, NewtonConfig};
use crate::transfer::{EigTriple, OperatingPoint};
use crate::{Error, Result};

/// Which of `mu`, `tau` is held fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fixed {
    Mu(f64),
    Tau(f64),
}

/// The parameter varied along a [`HopfCurve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveParam {
    Mu,
    Tau,
}

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub omega0: f64,
    pub mu0: f64,
    pub tau0: f64,
    /// Full parameter point (`mu = mu0`, `tau = tau0`).
    pub params: Params,
    pub eig: EigTriple,
    /// Determinant of the implicit-function condition.
    pub transversality: f64,
    pub nondegenerate: bool,
}

#[derive(Clone, Debug)]
pub struct HopfCurve {
    pub points: Vec<CriticalPoint>,
    pub parametrized_by: CurveParam,
    /// Why the curve stopped early, if it did.
    pub warnings: Vec<String>,
}

const FD_STEP: f64 = 1e-6;
const TRANSVERSALITY_TOL: f64 = 1e-8;
const MIN_OMEGA: f64 = 1e-8;

/// `lambda_hat(i omega) + 1` at the given parameters.
pub fn char_residual(r: &Realization, params: &Params, omega: f64) -> Result<Complex64> {
    Ok(OperatingPoint::new(r, params)?.lambda(omega)? + 1.0)
}

fn with_free(base: &Params, fixed: Fixed, free: f64) -> Params {
    match fixed {
        Fixed::Mu(mu) => base.with_mu(mu).with_tau(free),
        Fixed::Tau(tau) => base.with_tau(tau).with_mu(free),
    }
}

/// Solve the critical condition for `(omega, free)` where `free` is the
/// parameter not fixed. `base` supplies the auxiliary values.
pub fn find_critical(r: &Realization, base: &Params, fixed: Fixed, guess: (f64, f64)) -> Result<CriticalPoint> {
    let f = |x: &[f64]| -> Result<Vec<f64>> {
        let p = with_free(base, fixed, x[1]);
        if let Fixed::Mu(_) = fixed {
            if !(x[1] > 0.0) {
                return Err(Error::Validation("delay left the positive axis".into()));
            }
        }
        let d = char_residual(r, &p, x[0])?;
        Ok(vec![d.re, d.im])
    };
    let cfg = NewtonConfig::default();
    let sol = newton_solve(f, &[guess.0, guess.1], &cfg)?;
    let (omega, free) = (sol.x[0], sol.x[1]);
    if omega.abs() < MIN_OMEGA {
        return Err(Error::DegenerateFrequency(omega));
    }
    critical_point(r, &with_free(base, fixed, free), omega)
}

/// Assemble a [`CriticalPoint`] at a point already known to be critical.
pub fn critical_point(r: &Realization, params: &Params, omega: f64) -> Result<CriticalPoint> {
    let op = OperatingPoint::new(r, params)?;
    let eig = op.char_function(Complex64::new(0.0, omega), None)?;
    let mut cp = CriticalPoint {
        omega0: omega,
        mu0: params.mu,
        tau0: params.tau,
        params: params.clone(),
        eig,
        transversality: 0.0,
        nondegenerate: false,
    };
    let (value, ok) = check_transversality(r, &cp)?;
    cp.transversality = value;
    cp.nondegenerate = ok;
    Ok(cp)
}

/// `Re l_mu Im l_omega - Im l_mu Re l_omega` by central differences, and
/// whether it is nonzero beyond `1e-8`.
pub fn check_transversality(r: &Realization, cp: &CriticalPoint) -> Result<(f64, bool)> {
    let hm = FD_STEP * cp.mu0.abs().max(1.0);
    let hw = FD_STEP * cp.omega0.abs().max(1.0);
    let lam = |mu: f64, omega: f64| char_residual(r, &cp.params.with_mu(mu), omega);
    let l_mu = (lam(cp.mu0 + hm, cp.omega0)? - lam(cp.mu0 - hm, cp.omega0)?) / (2.0 * hm);
    let l_om = (lam(cp.mu0, cp.omega0 + hw)? - lam(cp.mu0, cp.omega0 - hw)?) / (2.0 * hw);
    let value = transversality_value(l_mu, l_om);
    Ok((value, value.abs() > TRANSVERSALITY_TOL))
}

/// The determinant for given partial derivatives.
pub fn transversality_value(l_mu: Complex64, l_omega: Complex64) -> f64 {
    l_mu.re * l_omega.im - l_mu.im * l_omega.re
}

/// Options for [`hopf_curve`].
#[derive(Clone, Debug)]
pub struct CurveConfig {
    pub param: CurveParam,
    pub start: f64,
    pub end: f64,
    pub step: f64,
    /// Seed `(omega, other)` at `start`, where `other` is the parameter
    /// not being stepped.
    pub seed: (f64, f64),
    /// Adds `2 pi n / omega` to a delay seed.
    pub branch: i32,
    /// Cap on the number of points, including arclength steps past folds.
    pub max_points: usize,
}

/// Natural-parameter continuation with step halving; after a fold the
/// curve is followed by secant-predicted pseudo-arclength steps.
pub fn hopf_curve(r: &Realization, base: &Params, cfg: &CurveConfig) -> Result<HopfCurve> {
    let mut curve = HopfCurve {
        points: Vec::new(),
        parametrized_by: cfg.param,
        warnings: Vec::new(),
    };
    if !(cfg.step > 0.0) || !cfg.start.is_finite() || !cfg.end.is_finite() {
        return Err(Error::Validation("curve range needs a positive step".into()));
    }
    if cfg.end < cfg.start {
        return Ok(curve);
    }
    let fixed_at = |v: f64| match cfg.param {
        CurveParam::Mu => Fixed::Mu(v),
        CurveParam::Tau => Fixed::Tau(v),
    };
    let mut seed = cfg.seed;
    if cfg.param == CurveParam::Mu && cfg.branch != 0 {
        seed.1 += 2.0 * std::f64::consts::PI * f64::from(cfg.branch) / seed.0;
    }

    let first = find_critical(r, base, fixed_at(cfg.start), seed)?;
    curve.points.push(first);
    let min_step = cfg.step / 64.0;
    let mut t = cfg.start;
    let mut h = cfg.step;
    while t < cfg.end - 1e-12 * cfg.step.max(1.0) && curve.points.len() < cfg.max_points {
        let next_t = (t + h).min(cfg.end);
        let guess = predict(&curve.points, cfg.param, next_t);
        match find_critical(r, base, fixed_at(next_t), guess) {
            Ok(cp) if jump_ok(&curve.points, &cp, cfg.param) => {
                curve.points.push(cp);
                t = next_t;
                h = (h * 2.0).min(cfg.step);
            }
            Ok(_) | Err(Error::Convergence { .. }) | Err(Error::Singular { .. }) if h > min_step => {
                h /= 2.0;
            }
            Err(e @ Error::Multiplicity { .. }) => {
                curve.warnings.push(format!("stopped: {e}"));
                break;
            }
            _ => {
                curve.warnings.push(format!(
                    "natural continuation failed near {} = {t}; switching to arclength",
                    param_name(cfg.param)
                ));
                arclength(r, base, cfg, &mut curve);
                break;
            }
        }
    }
    Ok(curve)
}

fn param_name(p: CurveParam) -> &'static str {
    match p {
        CurveParam::Mu => "mu",
        CurveParam::Tau => "tau",
    }
}

/// (stepped, other) coordinates of a critical point.
fn coords(cp: &CriticalPoint, param: CurveParam) -> (f64, f64) {
    match param {
        CurveParam::Mu => (cp.mu0, cp.tau0),
        CurveParam::Tau => (cp.tau0, cp.mu0),
    }
}

fn predict(points: &[CriticalPoint], param: CurveParam, t: f64) -> (f64, f64) {
    let last = points.last().unwrap();
    let (t1, o1) = coords(last, param);
    if points.len() < 2 {
        return (last.omega0, o1);
    }
    let prev = &points[points.len() - 2];
    let (t0, o0) = coords(prev, param);
    if (t1 - t0).abs() < 1e-15 {
        return (last.omega0, o1);
    }
    let s = (t - t1) / (t1 - t0);
    (last.omega0 + s * (last.omega0 - prev.omega0), o1 + s * (o1 - o0))
}

/// Reject solutions that hop to another branch.
fn jump_ok(points: &[CriticalPoint], cp: &CriticalPoint, param: CurveParam) -> bool {
    let last = points.last().unwrap();
    let (_, o1) = coords(last, param);
    let (_, o2) = coords(cp, param);
    (cp.omega0 - last.omega0).abs() < 0.25 * last.omega0.abs().max(1.0)
        && (o2 - o1).abs() < 0.25 * o1.abs().max(1.0)
}

fn arclength(r: &Realization, base: &Params, cfg: &CurveConfig, curve: &mut HopfCurve) {
    let ds = cfg.step;
    while curve.points.len() < cfg.max_points {
        let n = curve.points.len();
        let x1 = [curve.points[n - 1].omega0, curve.points[n - 1].mu0, curve.points[n - 1].tau0];
        let x0 = if n >= 2 {
            [curve.points[n - 2].omega0, curve.points[n - 2].mu0, curve.points[n - 2].tau0]
        } else {
            x1
        };
        let mut tan = [x1[0] - x0[0], x1[1] - x0[1], x1[2] - x0[2]];
        let norm = tan.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            curve.warnings.push("arclength continuation has no secant direction".into());
            return;
        }
        tan.iter_mut().for_each(|v| *v /= norm);
        let pred = [x1[0] + ds * tan[0], x1[1] + ds * tan[1], x1[2] + ds * tan[2]];
        let f = |x: &[f64]| -> Result<Vec<f64>> {
            if !(x[2] > 0.0) {
                return Err(Error::Validation("delay left the positive axis".into()));
            }
            let d = char_residual(r, &base.with_mu(x[1]).with_tau(x[2]), x[0])?;
            let arc = (0..3).map(|i| (x[i] - pred[i]) * tan[i]).sum::<f64>();
            Ok(vec![d.re, d.im, arc])
        };
        let sol = match newton_solve(f, &pred, &NewtonConfig::default()) {
            Ok(s) => s,
            Err(e) => {
                curve.warnings.push(format!("arclength continuation stopped: {e}"));
                return;
            }
        };
        let x = sol.x;
        match critical_point(r, &base.with_mu(x[1]).with_tau(x[2]), x[0]) {
            Ok(cp) => curve.points.push(cp),
            Err(e) => {
                curve.warnings.push(format!("arclength continuation stopped: {e}"));
                return;
            }
        }
        let (t, _) = coords(curve.points.last().unwrap(), cfg.param);
        if t < cfg.start || t > cfg.end {
            return;
        }
    }
}
