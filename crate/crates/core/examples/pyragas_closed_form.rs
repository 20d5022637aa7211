//! Amplitude expansion of the Pyragas-controlled normal form compared
//! with its closed-form coefficients.

use hopfbalance::bifexpand::expand_amplitude;
use hopfbalance::builtin::{pyragas, pyragas_model};
use hopfbalance::hbalance::bif_equation;
use hopfbalance::hopf::{find_critical, Fixed};

fn main() -> hopfbalance::Result<()> {
    let r = pyragas_model();
    for (kappa, tau) in [(-0.05, 2.0), (-0.04, 2.1), (0.03, 1.8)] {
        let mut base = r.default_params().with_tau(tau);
        base.set("kappa", kappa, &r.mu_name);
        let cp = find_critical(&r, &base, Fixed::Tau(tau), (1.0, 0.0))?;
        let be = expand_amplitude(&r, &cp, 3)?;
        let (mu, om) = pyragas::amplitude_coefficients(cp.omega0, &cp.params)?;
        let xi = bif_equation(&r, &cp.params, cp.omega0, 3)?.xi;
        println!("kappa = {kappa}, tau = {tau}: omega0 = {:.10}, mu0 = {:.3e}", cp.omega0, cp.mu0);
        println!("  xi1 = {:.10}  closed form {:.10}", xi[0], pyragas::xi1(cp.omega0, &cp.params)?);
        for k in 0..3 {
            println!(
                "  mu{}: {:+.10e} vs {:+.10e}   omega{}: {:+.10e} vs {:+.10e}",
                k + 1, be.mu_k[k + 1], mu[k], k + 1, be.omega_k[k + 1], om[k]
            );
        }
    }
    Ok(())
}
