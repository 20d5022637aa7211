//! Continuation of leukemia Hopf points in the delay, with the first
//! cycle coefficient along the curve.

use hopfbalance::bifexpand::expand_amplitude;
use hopfbalance::builtin::leukemia_model;
use hopfbalance::hopf::{hopf_curve, CurveConfig, CurveParam};

fn main() -> hopfbalance::Result<()> {
    let r = leukemia_model();
    let cfg = CurveConfig {
        param: CurveParam::Tau,
        start: 4.0,
        end: 6.0,
        step: 0.25,
        seed: (0.3, 0.1),
        branch: 0,
        max_points: 200,
    };
    let curve = hopf_curve(&r, &r.default_params().with_tau(4.0), &cfg)?;
    println!("{:>8} {:>12} {:>12} {:>12}", "tau", "omega", "delta", "delta1");
    for cp in &curve.points {
        let d1 = expand_amplitude(&r, cp, 1).map(|be| be.mu_k[1]).unwrap_or(f64::NAN);
        println!("{:8.4} {:12.8} {:12.8} {:+12.4e}", cp.tau0, cp.omega0, cp.mu0, d1);
    }
    for w in &curve.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
