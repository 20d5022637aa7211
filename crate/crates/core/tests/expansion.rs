mod common;

use common::{leukemia_critical, pyragas_critical, rel_err};
use hopfbalance::bifexpand::{expand_amplitude, expand_amplitude_with, FitConfig};
use hopfbalance::hopf::{find_critical, Fixed};
use hopfbalance::model::load_model;

#[test]
fn coefficients_ignore_eigenvector_phase() {
    for (r, cp) in [pyragas_critical(-0.05, 2.0), leukemia_critical(1.5, 4.7, (0.28, 0.12))] {
        let base = expand_amplitude(&r, &cp, 2).unwrap();
        for phi in [1.1, -2.4] {
            let cfg = FitConfig { eig_phase: phi, ..FitConfig::amplitude() };
            let be = expand_amplitude_with(&r, &cp, 2, &cfg).unwrap();
            for k in 1..=2 {
                let (a, b) = (base.mu_k[k], be.mu_k[k]);
                assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{} mu_{k}: {a} vs {b}", r.name);
                let (a, b) = (base.omega_k[k], be.omega_k[k]);
                assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{} omega_{k}: {a} vs {b}", r.name);
            }
        }
    }
}

#[test]
fn refitting_with_other_degrees_is_stable() {
    let (r, cp) = pyragas_critical(-0.04, 2.1);
    let reference = expand_amplitude(&r, &cp, 3).unwrap();
    for (degree, nodes) in [(8, 15), (12, 21)] {
        let cfg = FitConfig { degree, nodes, ..FitConfig::amplitude() };
        let be = expand_amplitude_with(&r, &cp, 3, &cfg).unwrap();
        for k in 1..=3 {
            assert!(rel_err(be.mu_k[k], reference.mu_k[k]) < 1e-5, "degree {degree}: mu_{k}");
        }
    }
}

/// For x' = -a x(t-1) - x(t-1)^3 the describing function of the cubic
/// adds 3A^2/4 to the loop gain at amplitude A = 2 theta, so cycles sit on
/// a = pi/2 - 3 theta^2 with unchanged frequency.
#[test]
fn file_model_matches_describing_function() {
    let r = load_model(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/cubic_delay.json")).unwrap();
    let p = r.default_params();
    let cp = find_critical(&r, &p, Fixed::Tau(1.0), (1.5, 1.5)).unwrap();
    assert!((cp.mu0 - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    assert!((cp.omega0 - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    let be = expand_amplitude(&r, &cp, 1).unwrap();
    assert!((be.mu_k[1] + 3.0).abs() < 1e-6, "{}", be.mu_k[1]);
    assert!(be.omega_k[1].abs() < 1e-6);
}
