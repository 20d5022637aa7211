//! Transition varieties H0, H1, D of the Pyragas-controlled oscillator in
//! the (kappa, tau) plane and the point where they meet.

use hopfbalance::builtin::{pyragas, pyragas_model};
use hopfbalance::singclass::{scan_varieties, Family, ScanAxis, ScanConfig};

fn main() -> hopfbalance::Result<()> {
    let r = pyragas_model();
    let base = r.default_params();
    let kappa = ScanAxis::linspace("kappa", -0.06, -0.035, 6);
    let tau = ScanAxis::linspace("tau", 2.0, 2.2, 6);
    let cfg = ScanConfig::new(Family::AmplitudeQ3, (1.0, 0.0));
    let t0 = std::time::Instant::now();
    let scan = scan_varieties(&r, &base, &kappa, &tau, &cfg)?;
    println!("scan took {:.1?}", t0.elapsed());
    for c in &scan.contours {
        println!("{:>2} kappa={:+.8} tau={:.8}", c.variety, c.p1, c.p2);
    }
    for c in &scan.centres {
        println!("centre kappa={:+.10} tau={:.10} mu3={:.4}", c.p1, c.p2, c.leading);
    }
    for w in &scan.warnings {
        println!("warning: {w}");
    }
    let (k, t) = pyragas::PUBLISHED_TRIPLE_POINT;
    println!("published triple point: kappa={k} tau={t}");
    Ok(())
}
