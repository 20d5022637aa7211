//! `x' = -delta x - beta (h(x) - k h(x(t - tau)))`, `h(x) = x / (1 + x^n)`,
//! with realization `(-(delta + 1), 0, 1, 1)` and
//! `g(y, y_tau) = -y - beta h(-y) + beta k h(-y_tau)`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::model::{Params, TaylorTensors};
use crate::numcore::Jet;
use crate::{Error, Result};

struct P {
    beta: f64,
    n: f64,
    k: f64,
}

fn read(params: &Params) -> Result<P> {
    Ok(P {
        beta: params.aux("beta")?,
        n: params.aux("n")?,
        k: params.aux("k")?,
    })
}

fn h(x: f64, n: f64) -> f64 {
    let xn = if n.fract() == 0.0 { x.powi(n as i32) } else { x.powf(n) };
    x / (1.0 + xn)
}

fn h_jet(x: &Jet, n: f64) -> Result<Jet> {
    if n.fract() != 0.0 && x.value() <= 0.0 {
        return Err(Error::Capability("non-integer n needs a positive expansion point".into()));
    }
    let one = Jet::constant(1.0, x.order());
    Ok(x / &(&one + &x.powf(n)))
}

pub(crate) fn g(y: f64, y_tau: f64, params: &Params) -> Result<f64> {
    let P { beta, n, k } = read(params)?;
    Ok(-y - beta * h(-y, n) + beta * k * h(-y_tau, n))
}

pub(crate) fn tensors(y: f64, params: &Params, order: usize) -> Result<TaylorTensors> {
    let P { beta, n, k } = read(params)?;
    // g separates into a function of y plus a function of y_tau, so the
    // mixed coefficients vanish.
    let x = -&Jet::variable(y, order);
    let undelayed = &(-&Jet::variable(y, order)) - &h_jet(&x, n)?.scale(beta);
    let delayed = h_jet(&x, n)?.scale(beta * k);
    let mut t = TaylorTensors::new(1, 1, order);
    for d in 1..=order {
        t.insert(&vec![0; d], DVector::from_element(1, undelayed.coeffs()[d]))?;
        t.insert(&vec![1; d], DVector::from_element(1, delayed.coeffs()[d]))?;
    }
    Ok(t)
}

/// Nontrivial equilibrium `((beta / delta)(k - 1) - 1)^{1/n}`.
pub fn x_hat(delta: f64, params: &Params) -> Result<f64> {
    let P { beta, n, k } = read(params)?;
    let base = beta / delta * (k - 1.0) - 1.0;
    if !(base > 0.0) {
        return Err(Error::Validation(format!(
            "no positive equilibrium at delta = {delta} (needs (beta/delta)(k-1) > 1)"
        )));
    }
    Ok(base.powf(1.0 / n))
}

/// `beta_1 = delta((n-1)(k-1)beta - n delta) / (beta (k-1)^2)`.
pub fn beta1(delta: f64, params: &Params) -> Result<f64> {
    let P { beta, n, k } = read(params)?;
    Ok(delta * ((n - 1.0) * (k - 1.0) * beta - n * delta) / (beta * (k - 1.0).powi(2)))
}

/// Linear transfer function `-(1 + beta_1 (1 - k e^{-s tau})) / (s + delta + 1)`.
pub fn gj(s: Complex64, params: &Params) -> Result<Complex64> {
    let b1 = beta1(params.mu, params)?;
    let k = params.aux("k")?;
    Ok(-(1.0 + b1 * (1.0 - k * (-s * params.tau).exp())) / (s + params.mu + 1.0))
}

/// Hopf frequency and delay at a given `delta`; `None` when no crossing
/// exists there.
pub fn omega_tau(delta: f64, params: &Params) -> Result<Option<(f64, f64)>> {
    let b1 = beta1(delta, params)?;
    let k = params.aux("k")?;
    let w2 = (b1 * k).powi(2) - (delta - b1).powi(2);
    if !(w2 > 0.0) {
        return Ok(None);
    }
    let omega = w2.sqrt();
    let c = (b1 - delta) / (b1 * k);
    Ok(Some((omega, c.acos() / omega)))
}

/// Dispatch by quantity name: `beta1`, `omega`, `tau`, `x_hat`, `gj`.
pub fn reference(quantity: &str, omega: f64, params: &Params) -> Result<Complex64> {
    let re = |x: f64| Complex64::new(x, 0.0);
    let delta = params.mu;
    match quantity {
        "beta1" => beta1(delta, params).map(re),
        "x_hat" => x_hat(delta, params).map(re),
        "omega" | "tau" => {
            let (w, t) = omega_tau(delta, params)?
                .ok_or_else(|| Error::NotFound(format!("no Hopf crossing at delta = {delta}")))?;
            Ok(re(if quantity == "omega" { w } else { t }))
        }
        "gj" => gj(Complex64::new(0.0, omega), params),
        other => Err(Error::Capability(format!("no leukemia reference named `{other}`"))),
    }
}
