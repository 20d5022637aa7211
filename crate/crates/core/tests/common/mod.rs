#![allow(dead_code)]

use hopfbalance::builtin::{leukemia_model, pyragas_model};
use hopfbalance::hopf::{find_critical, CriticalPoint, Fixed};
use hopfbalance::{Params, Realization};

pub fn pyragas_params(kappa: f64, tau: f64) -> (Realization, Params) {
    let r = pyragas_model();
    let mut p = r.default_params().with_tau(tau);
    p.set("kappa", kappa, &r.mu_name);
    (r, p)
}

pub fn pyragas_critical(kappa: f64, tau: f64) -> (Realization, CriticalPoint) {
    let (r, p) = pyragas_params(kappa, tau);
    let cp = find_critical(&r, &p, Fixed::Tau(tau), (1.0, 0.0)).expect("pyragas Hopf point");
    (r, cp)
}

pub fn leukemia_critical(k: f64, tau: f64, guess: (f64, f64)) -> (Realization, CriticalPoint) {
    let r = leukemia_model();
    let mut p = r.default_params().with_tau(tau);
    p.set("k", k, &r.mu_name);
    let cp = find_critical(&r, &p, Fixed::Tau(tau), guess).expect("leukemia Hopf point");
    (r, cp)
}

/// Five Hopf points per builtin model, spread over the delay.
pub fn near_critical_points() -> Vec<(Realization, CriticalPoint)> {
    let mut out = Vec::new();
    for (kappa, tau) in [(-0.05, 2.0), (-0.03, 1.5), (0.02, 1.2), (0.05, 2.5), (-0.08, 3.0)] {
        out.push(pyragas_critical(kappa, tau));
    }
    for tau in [4.2, 4.7, 4.9740704569, 5.3, 5.8] {
        out.push(leukemia_critical(1.5, tau, (0.27, 0.11)));
    }
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
