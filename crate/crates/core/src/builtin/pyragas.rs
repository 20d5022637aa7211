//! `z' = (mu + i) z - (1 + i gamma)|z|^2 z + kappa e^{i beta}(z(t - tau) - z)`
//! written in real coordinates with realization
//! `((mu - kappa cos beta) I, kappa cos beta I, I, I)`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::model::{recenter, Params, TaylorTensors};
use crate::numcore::{newton_solve, NewtonConfig};
use crate::{Error, Result};

/// Published location where H0, H1 and D meet for `beta = pi/4`,
/// `gamma = -10`.
pub const PUBLISHED_TRIPLE_POINT: (f64, f64) = (-0.0475468061, 2.0927529542);

struct P {
    kappa: f64,
    beta: f64,
    gamma: f64,
}

fn read(params: &Params) -> Result<P> {
    Ok(P {
        kappa: params.aux("kappa")?,
        beta: params.aux("beta")?,
        gamma: params.aux("gamma")?,
    })
}

pub(crate) fn g(z1: &[f64], z2: &[f64], params: &Params) -> Result<Vec<f64>> {
    let P { kappa, beta, gamma } = read(params)?;
    let ks = kappa * beta.sin();
    let (y1, y2) = (z1[0], z1[1]);
    let r2 = y1 * y1 + y2 * y2;
    Ok(vec![
        y2 - ks * (y2 - z2[1]) - r2 * (y1 - gamma * y2),
        -y1 + ks * (y1 - z2[0]) - r2 * (gamma * y1 + y2),
    ])
}

pub(crate) fn tensors(y: &[f64], params: &Params, order: usize) -> Result<TaylorTensors> {
    let P { kappa, beta, gamma } = read(params)?;
    let ks = kappa * beta.sin();
    let v = |a: f64, b: f64| DVector::from_vec(vec![a, b]);
    let mut t = TaylorTensors::new(2, 2, 3);
    t.insert(&[0], v(0.0, -(1.0 - ks)))?;
    t.insert(&[1], v(1.0 - ks, 0.0))?;
    t.insert(&[2], v(0.0, -ks))?;
    t.insert(&[3], v(ks, 0.0))?;
    t.insert(&[0, 0, 0], v(-1.0, -gamma))?;
    t.insert(&[0, 0, 1], v(gamma, -1.0))?;
    t.insert(&[0, 1, 1], v(-1.0, -gamma))?;
    t.insert(&[1, 1, 1], v(gamma, -1.0))?;
    let to = [y[0], y[1], y[0], y[1]];
    let (_, shifted) = recenter(&t, &DVector::zeros(2), &[0.0; 4], &to);
    let mut out = TaylorTensors::new(2, 2, order);
    for n in 1..=order.min(3) {
        for (idx, val) in shifted.block(n) {
            out.insert(idx, val.clone())?;
        }
    }
    Ok(out)
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Characteristic function `lambda(s)`.
pub fn lambda_hat(s: Complex64, params: &Params) -> Result<Complex64> {
    let P { kappa, beta, .. } = read(params)?;
    let e = 1.0 - (-s * params.tau).exp();
    Ok(-i() * (1.0 - kappa * beta.sin() * e) / (s - params.mu + kappa * beta.cos() * e))
}

/// First bifurcation-equation coefficient at `omega`.
pub fn xi1(omega: f64, params: &Params) -> Result<Complex64> {
    let P { kappa, beta, gamma } = read(params)?;
    let iw = i() * omega;
    let e = 1.0 - (-iw * params.tau).exp();
    Ok(-2.0 * (1.0 + i() * gamma) / (iw - params.mu + e * kappa * beta.cos()))
}

/// `(mu_1, mu_2, mu_3)` and `(omega_1, omega_2, omega_3)` at a Hopf point
/// with frequency `omega0`.
pub fn amplitude_coefficients(omega0: f64, params: &Params) -> Result<([f64; 3], [f64; 3])> {
    let P { kappa, beta, gamma } = read(params)?;
    let tau = params.tau;
    let phi = beta - tau * omega0;
    let (s, c) = phi.sin_cos();
    let d = 1.0 + kappa * tau * c;
    let kt = kappa * tau;
    let mu1 = -(2.0 + 2.0 * kappa * gamma * tau * s / d);
    let mu2 = 2.0 * kappa * gamma.powi(2) * tau.powi(2) * (kt + c) / d.powi(3);
    let mu3 = -4.0 / 3.0 * kappa * gamma.powi(3) * tau.powi(3) * (-1.0 + 3.0 * kt * kt + 2.0 * kt * c) * s / d.powi(5);
    let om1 = 2.0 * gamma / d;
    let om2 = -2.0 * kappa * gamma.powi(2) * tau.powi(2) * s / d.powi(3);
    let om3 = -4.0 / 3.0 * kappa * gamma.powi(3) * tau.powi(3) * (-c + kt * (-2.0 + (2.0 * phi).cos())) / d.powi(5);
    Ok(([mu1, mu2, mu3], [om1, om2, om3]))
}

/// Orbit amplitude squared `z` and parameter `mu` along the cycle family,
/// as functions of the frequency.
pub fn slice(omega: f64, params: &Params) -> Result<(f64, f64)> {
    let P { kappa, beta, gamma } = read(params)?;
    let phi = beta - omega * params.tau;
    let num = omega - 1.0 + kappa * beta.sin() - kappa * phi.sin();
    let z = num / (2.0 * gamma);
    let mu = kappa * beta.cos() - kappa * phi.cos() - num / gamma;
    Ok((z, mu))
}

/// Hopf curve `(omega, tau)` at a given `mu`. `branch` selects the sign of
/// the arccos and `n` the `2 pi n` shift. `None` when the branch does not
/// exist at this `mu`.
pub fn hopf_tau(mu: f64, params: &Params, branch: i32, n: i32) -> Result<Option<(f64, f64)>> {
    let P { kappa, beta, .. } = read(params)?;
    let c = beta.cos() - mu / kappa;
    if !(-1.0..=1.0).contains(&c) {
        return Ok(None);
    }
    let phi = f64::from(branch.signum()) * c.acos();
    let omega = 1.0 - kappa * beta.sin() + kappa * phi.sin();
    if omega <= 0.0 {
        return Ok(None);
    }
    Ok(Some((omega, (beta - phi + 2.0 * PI * f64::from(n)) / omega)))
}

/// Critical `(omega0, mu0)` at fixed `tau` from the closed-form Hopf
/// conditions, by Newton from `guess`.
pub fn critical(params: &Params, guess: (f64, f64)) -> Result<(f64, f64)> {
    let P { kappa, beta, .. } = read(params)?;
    let tau = params.tau;
    let f = |x: &[f64]| {
        let phi = beta - x[0] * tau;
        Ok(vec![
            -x[1] + kappa * beta.cos() - kappa * phi.cos(),
            kappa * beta.sin() - kappa * phi.sin() - 1.0 + x[0],
        ])
    };
    let sol = newton_solve(f, &[guess.0, guess.1], &NewtonConfig::default())?;
    Ok((sol.x[0], sol.x[1]))
}

/// Point in `(kappa, tau)` where the closed-form `mu_1` and `mu_2` vanish
/// together, solved from `guess` with `beta` and `gamma` taken from
/// `params`.
pub fn closed_form_triple_point(params: &Params, guess: (f64, f64)) -> Result<(f64, f64)> {
    let base = params.clone();
    let f = |x: &[f64]| -> Result<Vec<f64>> {
        let mut p = base.with_tau(x[1]);
        p.aux.insert("kappa".into(), x[0]);
        let (om, _) = critical(&p, (1.0, 0.0))?;
        let (mu, _) = amplitude_coefficients(om, &p)?;
        Ok(vec![mu[0], mu[1] * 1e-3])
    };
    let sol = newton_solve(f, &[guess.0, guess.1], &NewtonConfig { tol_residual: 1e-11, ..NewtonConfig::default() })?;
    Ok((sol.x[0], sol.x[1]))
}

/// Dispatch by quantity name, for tooling that selects references at run
/// time. Known ids: `lambda`, `xi1`, `mu1`..`mu3`, `omega1`..`omega3`,
/// `z`, `mu_of_omega`.
pub fn reference(quantity: &str, omega: f64, params: &Params) -> Result<Complex64> {
    let re = |x: f64| Complex64::new(x, 0.0);
    match quantity {
        "lambda" => lambda_hat(i() * omega, params),
        "xi1" => xi1(omega, params),
        "mu1" | "mu2" | "mu3" | "omega1" | "omega2" | "omega3" => {
            let (mu, om) = amplitude_coefficients(omega, params)?;
            let k: usize = quantity[quantity.len() - 1..].parse().unwrap();
            Ok(re(if quantity.starts_with("mu") { mu[k - 1] } else { om[k - 1] }))
        }
        "z" => slice(omega, params).map(|(z, _)| re(z)),
        "mu_of_omega" => slice(omega, params).map(|(_, m)| re(m)),
        other => Err(Error::Capability(format!("no pyragas reference named `{other}`"))),
    }
}
