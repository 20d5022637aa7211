//! A model read from JSON: x' = -a x(t - 1) - x(t - 1)^3, with the cubic
//! written as x' = (1 - a) x(t - 1) + g(y(t - 1)) with y = -x and the
//! polynomial g(u) = u + u^3. Its Hopf point is a = pi/2; the cubic
//! stiffens the feedback, so cycles appear below it (mu1 = -3).

use hopfbalance::bifexpand::expand_amplitude;
use hopfbalance::hopf::{find_critical, Fixed};
use hopfbalance::model::load_model;
use hopfbalance::singclass::{classify_amplitude, DEFAULT_TOL};

fn main() -> hopfbalance::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/cubic_delay.json");
    let r = load_model(path)?;
    let base = r.default_params();
    let cp = find_critical(&r, &base, Fixed::Tau(base.tau), (1.5, 1.5))?;
    println!("{}: omega0 = {:.10}, a0 = {:.10} (pi/2 = {:.10})", r.name, cp.omega0, cp.mu0, std::f64::consts::FRAC_PI_2);
    let be = expand_amplitude(&r, &cp, 1)?;
    println!("mu1 = {:+.6e}, omega1 = {:+.6e}", be.mu_k[1], be.omega_k[1]);
    println!("diagram: {}", classify_amplitude(&be, DEFAULT_TOL)?.label());
    Ok(())
}
