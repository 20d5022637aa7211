//! Locates the leukemia Bautin point (k = 1.5) and expands the q = 2
//! bifurcation equation there.

use hopfbalance::bifexpand::expand_amplitude;
use hopfbalance::builtin::leukemia_model;
use hopfbalance::hopf::{find_critical, Fixed};
use hopfbalance::singclass::{classify_amplitude, DEFAULT_TOL};

fn main() -> hopfbalance::Result<()> {
    let r = leukemia_model();
    let tau = 4.9740704569;
    let base = r.default_params().with_tau(tau);
    let cp = find_critical(&r, &base, Fixed::Tau(tau), (0.26, 0.11))?;
    println!("omega0 = {:.10}  delta0 = {:.10}  tau0 = {:.10}", cp.omega0, cp.mu0, cp.tau0);
    println!("nondegenerate: {}", cp.nondegenerate);

    let be = expand_amplitude(&r, &cp, 2)?;
    println!("delta_k = {:?}", &be.mu_k[1..]);
    println!("omega_k = {:?}", &be.omega_k[1..]);
    let report = classify_amplitude(&be, DEFAULT_TOL)?;
    println!("diagram: {}  (unfolding {:?})", report.label(), report.unfolding);
    Ok(())
}
