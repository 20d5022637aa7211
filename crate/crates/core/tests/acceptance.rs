//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any fails.

mod common;

use std::f64::consts::FRAC_PI_4;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{leukemia_critical, near_critical_points, pyragas_critical, pyragas_params, rel_err};
use hopfbalance::bifexpand::{expand_amplitude, expand_amplitude_with, FitConfig};
use hopfbalance::builtin::{leukemia_model, pyragas, pyragas_model};
use hopfbalance::ddesim::{integrate, measure_cycle, FeedbackSystem, History, SimConfig};
use hopfbalance::hbalance::{assemble_orbit, bif_equation, fourier_all, orbit_at, solve_harmonics, Balance, PointSetup};
use hopfbalance::hopf::{find_critical, CriticalPoint, Fixed};
use hopfbalance::singclass::{
    b_variety, classify_eps, classify_mu_as, cycle_signature_amplitude, cycle_signature_frequency, scan_varieties,
    Family, ScanAxis, ScanConfig, DEFAULT_TOL,
};
use hopfbalance::{Complex64, Realization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Solve `delta_1(tau) = 0` along the Hopf curve by the secant method.
fn bautin(k: f64, tau0: f64, tau1: f64, guess: (f64, f64)) -> (Realization, CriticalPoint, f64) {
    let r = leukemia_model();
    let at = |tau: f64, g: (f64, f64)| {
        let mut p = r.default_params().with_tau(tau);
        p.set("k", k, &r.mu_name);
        let cp = find_critical(&r, &p, Fixed::Tau(tau), g).unwrap();
        let be = expand_amplitude(&r, &cp, 2).unwrap();
        (cp, be.mu_k[1], be.mu_k[2])
    };
    let (mut a, mut b) = (tau0, tau1);
    let (cpa, mut fa, _) = at(a, guess);
    let (mut cpb, mut fb, mut d2) = at(b, (cpa.omega0, cpa.mu0));
    for _ in 0..30 {
        if fb.abs() < 1e-14 || (b - a).abs() < 1e-13 {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        let (cpc, fc, d2c) = at(c, (cpb.omega0, cpb.mu0));
        (a, fa) = (b, fb);
        (b, fb, cpb, d2) = (c, fc, cpc, d2c);
    }
    (r, cpb, d2)
}

fn criterion_bautin(k: f64, taus: (f64, f64), guess: (f64, f64), expect: (f64, f64, f64), d2: f64, d2_tol: f64) -> Outcome {
    let t0 = Instant::now();
    let (_, cp, delta2) = bautin(k, taus.0, taus.1, guess);
    let errs = [(cp.omega0 - expect.0).abs(), (cp.mu0 - expect.1).abs(), (cp.tau0 - expect.2).abs()];
    let ok = errs.iter().all(|e| *e <= 1e-6) && (delta2 - d2).abs() <= d2_tol && cp.nondegenerate;
    outcome(
        ok,
        format!(
            "omega0={:.10} delta0={:.10} tau0={:.10} delta2={:.10} (errors {:.1e} {:.1e} {:.1e}, {:.1e}); {:.1?}",
            cp.omega0,
            cp.mu0,
            cp.tau0,
            delta2,
            errs[0],
            errs[1],
            errs[2],
            (delta2 - d2).abs(),
            t0.elapsed()
        ),
    )
}

fn criterion_3() -> Outcome {
    let r = pyragas_model();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_xi1, mut worst_tail, mut n) = (0.0f64, 0.0f64, 0);
    while n < 10 {
        let kappa = rng.random_range(-0.1..0.1);
        let tau = rng.random_range(0.5..3.0);
        let mu = rng.random_range(-0.1..0.1);
        let omega = rng.random_range(0.6..1.4);
        let (_, p) = pyragas_params(kappa, tau);
        let p = p.with_mu(mu);
        let Ok(be) = bif_equation(&r, &p, omega, 3) else { continue };
        let xi1 = pyragas::xi1(omega, &p).unwrap();
        worst_xi1 = worst_xi1.max((be.xi[0] - xi1).norm() / xi1.norm());
        worst_tail = worst_tail.max(be.xi[1].norm()).max(be.xi[2].norm());
        n += 1;
    }
    let mut worst_coeff = 0.0f64;
    for (kappa, tau) in [(-0.05, 2.0), (-0.04, 2.1), (0.03, 1.8), (-0.02, 1.5), (0.05, 2.5)] {
        let (r, cp) = pyragas_critical(kappa, tau);
        assert!((cp.params.aux("beta").unwrap() - FRAC_PI_4).abs() < 1e-15);
        let be = expand_amplitude(&r, &cp, 3).unwrap();
        let (mu, om) = pyragas::amplitude_coefficients(cp.omega0, &cp.params).unwrap();
        for k in 0..3 {
            worst_coeff = worst_coeff.max(rel_err(be.mu_k[k + 1], mu[k])).max(rel_err(be.omega_k[k + 1], om[k]));
        }
    }
    outcome(
        worst_xi1 <= 1e-10 && worst_tail <= 1e-10 && worst_coeff <= 1e-6,
        format!("xi1 rel err {worst_xi1:.1e}, |xi2|,|xi3| <= {worst_tail:.1e}, mu_k/omega_k rel err {worst_coeff:.1e}"),
    )
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let r = pyragas_model();
    let kappa = ScanAxis::linspace("kappa", -0.06, -0.035, 6);
    let tau = ScanAxis::linspace("tau", 2.0, 2.2, 6);
    let scan = scan_varieties(&r, &r.default_params(), &kappa, &tau, &ScanConfig::new(Family::AmplitudeQ3, (1.0, 0.0))).unwrap();
    let (pk, pt) = pyragas::PUBLISHED_TRIPLE_POINT;
    let Some(c) = scan.centres.iter().min_by(|a, b| {
        let d = |c: &&hopfbalance::singclass::OrganizingCentre| (c.p1 - pk).abs().max((c.p2 - pt).abs());
        d(a).total_cmp(&d(b))
    }) else {
        return outcome(false, format!("no organizing centre found; {:.1?}", t0.elapsed()));
    };
    let (ek, et) = ((c.p1 - pk).abs(), (c.p2 - pt).abs());
    outcome(
        ek <= 1e-5 && et <= 1e-5 && c.leading < 0.0,
        format!(
            "found kappa={:.10} tau={:.10} mu3={:.2} vs published ({pk}, {pt}): errors {ek:.1e}, {et:.1e}; {:.1?}",
            c.p1,
            c.p2,
            c.leading,
            t0.elapsed()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    for (r, cp) in near_critical_points() {
        let setup = PointSetup::new(&r, &cp.params, cp.omega0, 2).unwrap();
        let bal = Balance::new(&setup.op, &setup.tensors, cp.omega0, 2).unwrap();
        let hs = bal.solve_with(setup.eig.clone()).unwrap();
        for (_, res) in bal.residuals(&hs).unwrap() {
            worst = worst.max(res.max_abs(0..=4));
        }
    }
    outcome(worst <= 1e-9, format!("largest residual coefficient {worst:.1e} over 10 points"))
}

fn criterion_6() -> Outcome {
    const N: usize = 512;
    let q = 2;
    let mut worst_ratio = 0.0f64;
    for (r, cp) in near_critical_points() {
        let setup = PointSetup::new(&r, &cp.params, cp.omega0, q).unwrap();
        let hs = Balance::new(&setup.op, &setup.tensors, cp.omega0, q).unwrap().solve_with(setup.eig.clone()).unwrap();
        let c = fourier_all(&setup.tensors, &hs).unwrap();
        let (d1, d2) = (setup.tensors.d1(), setup.tensors.d2());
        let y_hat = hs.y_hat.clone();
        let g_hat = r.g(y_hat.as_slice(), y_hat.as_slice(), &cp.params).unwrap();
        for theta in [0.01f64, 0.05] {
            let orbit = assemble_orbit(&hs, theta, N);
            let nl: Vec<Vec<f64>> = orbit
                .t
                .iter()
                .zip(&orbit.y)
                .map(|(t, y)| {
                    let yd = orbit_at(&hs, theta, t - cp.tau0);
                    let g = r.g(y.as_slice(), yd.as_slice(), &cp.params).unwrap();
                    let lin = &d1 * (y - &y_hat) + &d2 * (&yd - &y_hat);
                    g.iter().zip(&g_hat).zip(lin.iter()).map(|((a, b), l)| a - b - l).collect()
                })
                .collect();
            let tol = 1e-8 + 10.0 * theta.powi(2 * q as i32 + 1);
            for (j, series) in &c {
                let val = series.eval(theta);
                for comp in 0..val.len() {
                    let quad: Complex64 = orbit
                        .t
                        .iter()
                        .zip(&nl)
                        .map(|(t, v)| v[comp] * Complex64::from_polar(1.0, -(*j as f64) * cp.omega0 * t))
                        .sum::<Complex64>()
                        / N as f64;
                    worst_ratio = worst_ratio.max((quad - val[comp]).norm() / tol);
                }
            }
        }
    }
    outcome(worst_ratio <= 1.0, format!("largest error / tolerance {worst_ratio:.2e}"))
}

fn criterion_7() -> Outcome {
    let t0 = Instant::now();
    let (r, cp) = leukemia_critical(1.5, 4.7, (0.28, 0.12));
    let be = expand_amplitude(&r, &cp, 2).unwrap();
    let side = be.mu_k[1].signum();
    let mut rows = Vec::new();
    for step in [2e-5, 5e-5, 1e-4, 2e-4, 4e-4] {
        if rows.len() == 3 {
            break;
        }
        let delta = cp.mu0 + side * step;
        let Some((theta, omega)) = be.predict_cycle(delta, 1.0) else { continue };
        let params = cp.params.with_mu(delta);
        let hs = solve_harmonics(&r, &params, omega, 2).unwrap();
        let exact = History::from_orbit(&r, &hs, theta).unwrap();
        let period = 2.0 * std::f64::consts::PI / omega;
        let (lo, hi) = (0..1024).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let x = exact.eval(period * i as f64 / 1024.0)[0];
            (lo.min(x), hi.max(x))
        });
        let amp_pred = 0.5 * (hi - lo);
        let mut cfg = SimConfig::new(4.7 / 40.0, 80000.0, 400.0, History::from_orbit(&r, &hs, 1.1 * theta).unwrap());
        cfg.harmonics = 2;
        let traj = integrate(&FeedbackSystem::new(&r, &params).unwrap(), &cfg).unwrap();
        let m = measure_cycle(&traj, &cfg);
        if m.converged {
            rows.push((step, rel_err(m.amplitude[0], amp_pred), rel_err(m.frequency, omega)));
        }
    }
    let ok = rows.len() == 3 && rows.iter().all(|(_, a, f)| *a <= 0.05 && *f <= 0.02);
    let detail: Vec<String> = rows.iter().map(|(s, a, f)| format!("+{s:.0e}: amp {:.2}%, freq {:.3}%", 100.0 * a, 100.0 * f)).collect();
    outcome(ok, format!("{}; {:.1?}", detail.join(", "), t0.elapsed()))
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let mut worst_phase = 0.0f64;
    for (r, cp) in [pyragas_critical(-0.05, 2.0), leukemia_critical(1.5, 4.7, (0.28, 0.12))] {
        let base = expand_amplitude(&r, &cp, 2).unwrap();
        let setup = PointSetup::new(&r, &cp.params, cp.omega0, 2).unwrap();
        let bal = Balance::new(&setup.op, &setup.tensors, cp.omega0, 2).unwrap();
        let hs = bal.solve_with(setup.eig.clone()).unwrap();
        for phi in [0.7, -2.2] {
            let be = expand_amplitude_with(&r, &cp, 2, &FitConfig { eig_phase: phi, ..FitConfig::amplitude() }).unwrap();
            for k in 1..=2 {
                worst_phase = worst_phase
                    .max((be.mu_k[k] - base.mu_k[k]).abs() / base.mu_k[k].abs().max(1.0))
                    .max((be.omega_k[k] - base.omega_k[k]).abs() / base.omega_k[k].abs().max(1.0));
            }
            let hs2 = bal.solve_with(setup.eig.rephased(phi)).unwrap();
            for j in 0..=4 {
                for k in 0..=4 {
                    for (a, b) in hs.coeff(j, k).iter().zip(hs2.coeff(j, k).iter()) {
                        worst_phase = worst_phase.max((a.norm() - b.norm()).abs());
                    }
                }
            }
        }
    }
    ok &= worst_phase <= 1e-9;
    notes.push(format!("rephasing change {worst_phase:.1e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut scale_fail = 0;
    for _ in 0..300 {
        let q = rng.random_range(1..=3);
        let mu: Vec<f64> = (0..q).map(|_| rng.random_range(-5.0..5.0)).collect();
        let s = 10f64.powf(rng.random_range(-3.0..3.0));
        let scaled: Vec<f64> = mu.iter().map(|m| m * s).collect();
        if classify_mu_as(&mu, DEFAULT_TOL).unwrap().label() != classify_mu_as(&scaled, DEFAULT_TOL).unwrap().label() {
            scale_fail += 1;
        }
        let (eps, e0, e1) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        if classify_eps(eps, &[e0], DEFAULT_TOL).unwrap().label() != classify_eps(eps * s, &[e0 * s], DEFAULT_TOL).unwrap().label() {
            scale_fail += 1;
        }
        let c = s.cbrt();
        let weighted = classify_eps(eps * s, &[e0 * c.powi(3), e1 * c * c], DEFAULT_TOL).unwrap();
        if classify_eps(eps, &[e0, e1], DEFAULT_TOL).unwrap().label() != weighted.label() {
            scale_fail += 1;
        }
    }
    ok &= scale_fail == 0;
    notes.push(format!("{scale_fail} scaling mismatches"));

    let signed = |rng: &mut ChaCha8Rng| {
        let m = 10f64.powf(rng.random_range(-2.0..2.0));
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    };
    let mut oracle_fail = 0;
    for q in 1..=3 {
        let mut n = 0;
        while n < 100 {
            let mu: Vec<f64> = (0..q).map(|_| signed(&mut rng)).collect();
            if q == 3 {
                let d = mu[1] * mu[1] - 4.0 * mu[0] * mu[2];
                let h1 = mu[1] * mu[1] - 3.0 * mu[0] * mu[2];
                if d.abs() < 1e-3 * mu[1] * mu[1] || h1.abs() < 1e-3 * mu[1] * mu[1] {
                    continue;
                }
            }
            let rep = classify_mu_as(&mu, DEFAULT_TOL).unwrap();
            oracle_fail += usize::from(rep.diagram_label.signature() != cycle_signature_amplitude(&mu));
            n += 1;
        }
    }
    for p in [2, 3] {
        let mut n = 0;
        while n < 100 {
            let eps = signed(&mut rng);
            let unfolding: Vec<f64> = (0..p - 1).map(|_| signed(&mut rng)).collect();
            if p == 3 && b_variety(unfolding[0], unfolding[1]).abs() < 1e-3 * 27.0 * unfolding[0].powi(2) {
                continue;
            }
            let rep = classify_eps(eps, &unfolding, DEFAULT_TOL).unwrap();
            oracle_fail += usize::from(rep.diagram_label.signature() != cycle_signature_frequency(eps, &unfolding));
            n += 1;
        }
    }
    ok &= oracle_fail == 0;
    notes.push(format!("{oracle_fail}/500 root-count mismatches"));
    outcome(ok, notes.join(", "))
}

fn criterion_9() -> Outcome {
    let runs: [(&[&str], &[&str]); 4] = [
        (&["--model", "leukemia", "hopf", "--fix", "tau=4", "--range", "4:5:0.25"], &["hopf_curve.csv"]),
        (&["--model", "leukemia", "coeffs", "--q", "2", "--fix", "tau=4.7"], &["coeffs.json"]),
        (&["--model", "pyragas", "--param", "kappa=-0.05", "classify", "--fix", "tau=2"], &["report.json", "varieties.csv"]),
        (
            &["--model", "leukemia", "compare", "--fix", "tau=4.7", "--range", "0.1191:0.1192:0.0001", "--sim-transient", "2000"],
            &["branch.csv"],
        ),
    ];
    let exe = env!("CARGO_BIN_EXE_hopfbalance");
    let mut compared = 0;
    for (args, files) in runs {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            let out = Command::new(exe).arg("--out").arg(d.path()).args(args).output().unwrap();
            if !out.status.success() {
                return outcome(false, format!("{args:?} exited with {}", out.status));
            }
        }
        let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
        for f in files {
            if read(dirs[0].path(), f) != read(dirs[1].path(), f) {
                return outcome(false, format!("{f} differs between identical runs"));
            }
            compared += 1;
        }
    }
    outcome(true, format!("{compared} output files byte-identical across repeated runs"))
}

fn main() {
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "leukemia Bautin point k=1.5", Box::new(|| {
            criterion_bautin(1.5, (4.9, 5.0), (0.26, 0.11), (0.2624792103, 0.1100351576, 4.9740704569), 0.0019537383, 5e-5)
        })),
        (2, "leukemia second case k=1.01", Box::new(|| {
            criterion_bautin(1.01, (5.28, 5.32), (0.04, 0.0023), (0.0396791, 0.0023073665, 5.301432998), 0.0000417833, 5e-6)
        })),
        (3, "Pyragas closed forms", Box::new(criterion_3)),
        (4, "triple intersection of H0, H1, D", Box::new(criterion_4)),
        (5, "harmonic-balance residuals", Box::new(criterion_5)),
        (6, "Fourier coefficients vs quadrature", Box::new(criterion_6)),
        (7, "simulator cross-check", Box::new(criterion_7)),
        (8, "invariance suite", Box::new(criterion_8)),
        (9, "CLI determinism", Box::new(criterion_9)),
    ];
    let mut failed = Vec::new();
    for (n, name, f) in criteria {
        let o = f();
        println!("{} criterion {n} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
