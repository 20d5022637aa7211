//! Leukemia model at tau = 4.7: cycle amplitudes and frequencies predicted
//! by the bifurcation equation against direct simulation of the DDE.

use hopfbalance::bifexpand::expand_amplitude;
use hopfbalance::builtin::leukemia_model;
use hopfbalance::ddesim::{integrate, measure_cycle, FeedbackSystem, History, SimConfig};
use hopfbalance::hbalance::{assemble_orbit, solve_harmonics};
use hopfbalance::hopf::{find_critical, Fixed};

fn main() -> hopfbalance::Result<()> {
    let r = leukemia_model();
    let base = r.default_params().with_tau(4.7);
    let cp = find_critical(&r, &base, Fixed::Tau(4.7), (0.26, 0.11))?;
    let be = expand_amplitude(&r, &cp, 2)?;
    println!("Hopf: omega0={:.10} delta0={:.10}  delta1={:.6e} delta2={:.6e}", cp.omega0, cp.mu0, be.mu_k[1], be.mu_k[2]);
    let side = be.mu_k[1].signum();
    println!("{:>12} {:>10} {:>12} {:>12} {:>10} {:>10} {}", "delta", "theta", "amp_pred", "amp_sim", "w_pred", "w_sim", "conv");
    for step in [2e-5, 5e-5, 1e-4, 2e-4, 4e-4] {
        let delta = cp.mu0 + side * step;
        let Some((theta, omega)) = be.predict_cycle(delta, 1.0) else { continue };
        let params = base.with_mu(delta);
        let hs = solve_harmonics(&r, &params, omega, 2)?;
        let orbit = assemble_orbit(&hs, theta, 512);
        let (lo, hi) = orbit.y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), y| (l.min(y[0]), h.max(y[0])));
        let amp_pred = 0.5 * (hi - lo);
        let t0 = std::time::Instant::now();
        let mut cfg = SimConfig::new(4.7 / 40.0, 80000.0, 400.0, History::from_orbit(&r, &hs, 1.1 * theta)?);
        cfg.harmonics = 2;
        let traj = integrate(&FeedbackSystem::new(&r, &params)?, &cfg)?;
        let m = measure_cycle(&traj, &cfg);
        println!(
            "{delta:12.8} {theta:10.6} {amp_pred:12.8} {:12.8} {omega:10.6} {:10.6} {} ({:.1?})",
            m.amplitude[0], m.frequency, m.converged, t0.elapsed()
        );
    }
    Ok(())
}
