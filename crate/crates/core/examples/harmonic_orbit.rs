//! Harmonic-balance orbit of the leukemia model just past onset, printed
//! as samples over one period together with its leading harmonics.

use hopfbalance::bifexpand::expand_amplitude;
use hopfbalance::builtin::leukemia_model;
use hopfbalance::hbalance::{assemble_orbit, solve_harmonics};
use hopfbalance::hopf::{find_critical, Fixed};

fn main() -> hopfbalance::Result<()> {
    let r = leukemia_model();
    let base = r.default_params().with_tau(4.7);
    let cp = find_critical(&r, &base, Fixed::Tau(4.7), (0.26, 0.11))?;
    let be = expand_amplitude(&r, &cp, 2)?;
    let delta = cp.mu0 + 1e-4;
    let (theta, omega) = be.predict_cycle(delta, 1.0).expect("supercritical side");
    let hs = solve_harmonics(&r, &cp.params.with_mu(delta), omega, 2)?;
    println!("delta = {delta:.8}  theta = {theta:.6}  omega = {omega:.8}");
    for (j, a) in hs.harmonics().into_iter().filter(|(j, _)| *j >= 0) {
        println!("  |a_{j}(theta)| = {:.6e}", a.eval(theta).norm());
    }
    let orbit = assemble_orbit(&hs, theta, 16);
    for (t, y) in orbit.t.iter().zip(&orbit.y) {
        println!("{t:10.4} {:+.8}", y[0]);
    }
    println!("discarded imaginary part: {:.1e}", orbit.max_imag);
    Ok(())
}
