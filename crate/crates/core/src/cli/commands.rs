use std::fmt::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::manifest::{ModelSource, RunManifest};
use super::svg::{line_plot, Series};
use super::{fmt_f64, ClassifyArgs, CoeffsArgs, CompareArgs, FamilyArg, Global, HopfArgs};
use crate::bifexpand::{expand_amplitude, expand_frequency, FitConfig};
use crate::ddesim::{integrate, measure_cycle, FeedbackSystem, History, SimConfig};
use crate::hbalance::{bif_equation, solve_harmonics};
use crate::hopf::{find_critical, hopf_curve, CriticalPoint, CurveConfig, CurveParam, Fixed};
use crate::model::{Params, Realization};
use crate::singclass::{
    classify_amplitude, classify_eps, classify_frequency, classify_frequency_as, classify_mu_as,
    scan_varieties, Family, ScanAxis, ScanConfig,
};
use crate::{Error, Result};

fn base_params(r: &Realization, g: &Global) -> Params {
    let mut p = r.default_params();
    for (name, value) in &g.params {
        p.set(name, *value, &r.mu_name);
    }
    p
}

fn apply_fix(r: &Realization, params: &mut Params, fix: &(String, f64)) -> Result<Fixed> {
    let (name, value) = (fix.0.as_str(), fix.1);
    if name == "tau" {
        params.tau = value;
        Ok(Fixed::Tau(value))
    } else if name == "mu" || name == r.mu_name {
        params.mu = value;
        Ok(Fixed::Mu(value))
    } else {
        Err(Error::Validation(format!("--fix expects tau=... or {}=..., got `{name}`", r.mu_name)))
    }
}

fn default_guess(r: &Realization, params: &Params, fixed: Fixed, guess: Option<(f64, f64)>) -> (f64, f64) {
    if let Some(g) = guess {
        return g;
    }
    let omega = r.seed.as_ref().map_or(1.0, |s| s.omega);
    match fixed {
        Fixed::Tau(_) => (omega, r.seed.as_ref().map_or(params.mu, |s| s.mu)),
        Fixed::Mu(_) => (omega, params.tau),
    }
}

/// A failed critical-point search means nothing was found, unless the
/// failure is a mathematical obstruction.
fn not_found(e: Error, what: &str) -> Error {
    match e {
        Error::Convergence { .. } | Error::Singular { .. } => Error::NotFound(format!("{what}: {e}")),
        other => other,
    }
}

fn cplx(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn to_json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

pub(super) fn hopf(g: &Global, src: &ModelSource, a: &HopfArgs) -> Result<Vec<PathBuf>> {
    let r = src.realization()?;
    let mut params = base_params(&r, g);
    let fixed = apply_fix(&r, &mut params, &a.fix)?;
    let guess = default_guess(&r, &params, fixed, a.guess);
    let config = json!({ "fix": a.fix, "range": a.range.map(|x| [x.lo, x.hi, x.step]), "guess": guess });
    let mut m = RunManifest::new("hopf", src, &g.params, config, &g.out, g.threads);

    let points: Vec<(f64, CriticalPoint)> = match a.range {
        None => {
            let cp = find_critical(&r, &params, fixed, guess).map_err(|e| not_found(e, "no critical point"))?;
            vec![(a.fix.1, cp)]
        }
        Some(range) => {
            let param = match fixed {
                Fixed::Tau(_) => CurveParam::Tau,
                Fixed::Mu(_) => CurveParam::Mu,
            };
            let cfg = CurveConfig {
                param,
                start: range.lo,
                end: range.hi,
                step: range.step,
                seed: guess,
                branch: 0,
                max_points: 100_000,
            };
            let curve = hopf_curve(&r, &params, &cfg).map_err(|e| not_found(e, "no critical point in range"))?;
            for w in &curve.warnings {
                eprintln!("warning: {w}");
            }
            curve
                .points
                .into_iter()
                .map(|cp| (if param == CurveParam::Tau { cp.tau0 } else { cp.mu0 }, cp))
                .collect()
        }
    };
    if points.is_empty() {
        return Err(Error::NotFound("no critical point in range".into()));
    }
    let mut csv = String::from("param,omega,mu,tau,nondegenerate\n");
    for (p, cp) in &points {
        let _ = writeln!(csv, "{},{},{},{},{}", fmt_f64(*p), fmt_f64(cp.omega0), fmt_f64(cp.mu0), fmt_f64(cp.tau0), cp.nondegenerate);
    }
    let mut out = vec![m.write(&g.out, "hopf_curve.csv", csv.as_bytes())?];
    if g.svg {
        let series = Series { name: "Hopf points".into(), points: points.iter().map(|(_, cp)| (cp.tau0, cp.mu0)).collect(), scatter: points.len() == 1 };
        let svg = line_plot("Hopf curve", "tau", &r.mu_name, &[series]);
        out.push(m.write(&g.out, "hopf_curve.svg", svg.as_bytes())?);
    }
    out.push(m.finish(&g.out)?);
    Ok(out)
}

pub(super) fn coeffs(g: &Global, src: &ModelSource, a: &CoeffsArgs) -> Result<Vec<PathBuf>> {
    let r = src.realization()?;
    let q = usize::from(a.q);
    let mut params = base_params(&r, g);
    let (omega, params) = match (a.omega, &a.fix) {
        (Some(omega), _) => (omega, params),
        (None, fix) => {
            let fix = fix.clone().unwrap_or(("tau".into(), params.tau));
            let fixed = apply_fix(&r, &mut params, &fix)?;
            let guess = default_guess(&r, &params, fixed, a.guess);
            let cp = find_critical(&r, &params, fixed, guess).map_err(|e| not_found(e, "no critical point"))?;
            (cp.omega0, cp.params)
        }
    };
    let config = json!({ "q": q, "omega": a.omega, "fix": a.fix, "guess": a.guess });
    let mut m = RunManifest::new("coeffs", src, &g.params, config, &g.out, g.threads);
    let hs = solve_harmonics(&r, &params, omega, q)?;
    let be = bif_equation(&r, &params, omega, q)?;
    let harmonics: Vec<Value> = hs
        .harmonics()
        .into_iter()
        .filter(|(j, _)| *j >= 0)
        .map(|(j, s)| {
            let coefficients: Vec<Value> = s
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| c.iter().any(|z| z.norm() != 0.0))
                .map(|(k, c)| json!({ "k": k, "value": c.iter().map(|z| cplx(*z)).collect::<Vec<_>>() }))
                .collect();
            json!({ "j": j, "coefficients": coefficients })
        })
        .collect();
    let doc = json!({
        "manifest_digest": m.digest,
        "q": q,
        "omega": omega,
        "mu": params.mu,
        "tau": params.tau,
        "aux": params.aux,
        "lambda_hat": cplx(be.lambda_hat),
        "v": hs.eig.v.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
        "w": hs.eig.w.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
        "xi": be.xi.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
        "harmonics": harmonics,
    });
    let out = vec![m.write(&g.out, "coeffs.json", &to_json_bytes(&doc))?, m.finish(&g.out)?];
    Ok(out)
}

fn family_of(a: &ClassifyArgs) -> Result<Family> {
    match a.family {
        FamilyArg::Amplitude => Family::amplitude(usize::from(a.q)).ok_or_else(|| Error::Validation("q must be 1..3".into())),
        FamilyArg::P2 => Ok(Family::FreqP2),
        FamilyArg::P3 => Ok(Family::FreqP3),
    }
}

pub(super) fn classify(g: &Global, src: &ModelSource, a: &ClassifyArgs) -> Result<Vec<PathBuf>> {
    let r = src.realization()?;
    let mut params = base_params(&r, g);
    let family = family_of(a)?;
    let grid: Vec<Value> = a.grid.iter().map(|ax| json!([ax.name, ax.lo, ax.hi, ax.count])).collect();
    let config = json!({ "q": a.q, "family": family, "fix": a.fix, "grid": grid, "guess": a.guess, "tol": a.tol });
    let mut m = RunManifest::new("classify", src, &g.params, config, &g.out, g.threads);
    let mut csv = String::from("p1,p2,variety\n");
    let mut out = Vec::new();

    let doc = match a.grid.as_slice() {
        [] => {
            let fix = a.fix.clone().unwrap_or(("tau".into(), params.tau));
            let fixed = apply_fix(&r, &mut params, &fix)?;
            let guess = default_guess(&r, &params, fixed, a.guess);
            let cp = find_critical(&r, &params, fixed, guess).map_err(|e| not_found(e, "no critical point"))?;
            let (report, coefficients) = if family.is_amplitude() {
                let be = expand_amplitude(&r, &cp, usize::from(a.q))?;
                (classify_amplitude(&be, a.tol)?, json!({ "mu_k": be.mu_k, "omega_k": be.omega_k }))
            } else {
                let fs = expand_frequency(&r, &cp, 3, &FitConfig::frequency())?;
                let auto = classify_frequency(&fs, a.tol).ok();
                let rep = classify_frequency_as(&fs, family, a.tol)?;
                (rep, json!({ "dmu": fs.dmu, "dz": fs.dz, "generic_label": auto.map(|r| r.label()) }))
            };
            json!({
                "manifest_digest": m.digest,
                "point": { "omega0": cp.omega0, "mu0": cp.mu0, "tau0": cp.tau0, "aux": cp.params.aux },
                "coefficients": coefficients,
                "report": report,
            })
        }
        [ax1, ax2] => {
            let axis = |ax: &super::GridAxis| ScanAxis::linspace(&ax.name, ax.lo, ax.hi, ax.count);
            if let Some(fix) = &a.fix {
                apply_fix(&r, &mut params, fix)?;
            }
            let guess = a.guess.unwrap_or_else(|| default_guess(&r, &params, Fixed::Tau(params.tau), None));
            let cfg = ScanConfig::new(family, guess);
            let scan = scan_varieties(&r, &params, &axis(ax1), &axis(ax2), &cfg)?;
            let nodes: Vec<Value> = scan
                .nodes
                .iter()
                .flatten()
                .map(|node| match node {
                    None => json!({ "report": Value::Null, "error": "expansion failed" }),
                    Some(n) => {
                        let rep = if family.is_amplitude() {
                            let mut mu = n.coeffs.clone();
                            mu.push(n.leading);
                            classify_mu_as(&mu, a.tol)
                        } else {
                            classify_eps(n.leading, &n.coeffs, a.tol)
                        };
                        let (report, error) = match rep {
                            Ok(rep) => (serde_json::to_value(rep).unwrap_or(Value::Null), Value::Null),
                            Err(e) => (Value::Null, Value::String(e.to_string())),
                        };
                        json!({ "p1": n.p1, "p2": n.p2, "omega0": n.omega0, "mu0": n.mu0, "report": report, "error": error })
                    }
                })
                .collect();
            for c in &scan.contours {
                let _ = writeln!(csv, "{},{},{}", fmt_f64(c.p1), fmt_f64(c.p2), c.variety);
            }
            if g.svg {
                let mut series: Vec<Series> = Vec::new();
                for c in &scan.contours {
                    match series.iter_mut().find(|s| s.name == c.variety) {
                        Some(s) => s.points.push((c.p1, c.p2)),
                        None => series.push(Series { name: c.variety.to_string(), points: vec![(c.p1, c.p2)], scatter: true }),
                    }
                }
                if !scan.centres.is_empty() {
                    series.push(Series { name: "centre".into(), points: scan.centres.iter().map(|c| (c.p1, c.p2)).collect(), scatter: true });
                }
                let svg = line_plot("Transition varieties", &ax1.name, &ax2.name, &series);
                out.push(m.write(&g.out, "diagrams.svg", svg.as_bytes())?);
            }
            json!({
                "manifest_digest": m.digest,
                "axes": [ax1.name, ax2.name],
                "nodes": nodes,
                "contours": scan.contours,
                "centres": scan.centres,
                "warnings": scan.warnings,
            })
        }
        _ => return Err(Error::Validation("--grid must be given zero or two times".into())),
    };
    out.push(m.write(&g.out, "report.json", &to_json_bytes(&doc))?);
    out.push(m.write(&g.out, "varieties.csv", csv.as_bytes())?);
    out.push(m.finish(&g.out)?);
    Ok(out)
}

struct BranchRow {
    mu: f64,
    theta_pred: f64,
    amp_pred: f64,
    amp_sim: f64,
    freq_pred: f64,
    freq_sim: f64,
    converged: bool,
}

pub(super) fn compare(g: &Global, src: &ModelSource, a: &CompareArgs) -> Result<Vec<PathBuf>> {
    let r = src.realization()?;
    let mut params = base_params(&r, g);
    let fixed = apply_fix(&r, &mut params, &a.fix)?;
    if !matches!(fixed, Fixed::Tau(_)) {
        return Err(Error::Validation("compare needs --fix tau=...".into()));
    }
    let q = usize::from(a.q);
    let dt = a.sim_dt.unwrap_or(params.tau / 40.0);
    let config = json!({
        "q": q, "fix": a.fix, "range": [a.range.lo, a.range.hi, a.range.step], "guess": a.guess,
        "sim_dt": dt, "sim_transient": a.sim_transient, "sim_measure": a.sim_measure,
    });
    let mut m = RunManifest::new("compare", src, &g.params, config, &g.out, g.threads);
    let grid = a.range.values();
    let mut csv = String::from("mu,theta_pred,amp_pred,amp_sim,freq_pred,freq_sim,converged\n");
    let mut rows: Vec<BranchRow> = Vec::new();
    if !grid.is_empty() {
        let guess = default_guess(&r, &params, fixed, a.guess);
        let cp = find_critical(&r, &params, fixed, guess).map_err(|e| not_found(e, "no critical point"))?;
        let be = expand_amplitude(&r, &cp, q)?;
        let measure = a.sim_measure.unwrap_or((12.0 * std::f64::consts::TAU / cp.omega0).max(400.0));
        let results: Vec<Result<BranchRow>> = grid
            .par_iter()
            .map(|&mu| {
                let p = params.with_mu(mu);
                let prediction = be.predict_cycle(mu, 1.0);
                let (theta, omega, amp_pred, history) = match prediction {
                    Some((theta, omega)) => {
                        let hs = solve_harmonics(&r, &p, omega, q)?;
                        let exact = History::from_orbit(&r, &hs, theta)?;
                        let period = 2.0 * std::f64::consts::PI / omega;
                        let amp = half_range(&exact, period);
                        (theta, omega, amp, History::from_orbit(&r, &hs, 1.1 * theta)?)
                    }
                    None => {
                        let eq = r.default_equilibrium(&p)?;
                        let x0: Vec<f64> = eq.x_hat.iter().map(|v| v + 1e-2).collect();
                        (f64::NAN, f64::NAN, 0.0, History::Constant(x0))
                    }
                };
                let mut cfg = SimConfig::new(dt, a.sim_transient, measure, history);
                cfg.harmonics = 2 * q;
                let traj = integrate(&FeedbackSystem::new(&r, &p)?, &cfg)?;
                let meas = measure_cycle(&traj, &cfg);
                Ok(BranchRow {
                    mu,
                    theta_pred: theta,
                    amp_pred,
                    amp_sim: if meas.diverged { f64::NAN } else { meas.amplitude[0] },
                    freq_pred: omega,
                    freq_sim: meas.frequency,
                    converged: meas.converged,
                })
            })
            .collect();
        for row in results {
            rows.push(row?);
        }
    }
    for row in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt_f64(row.mu),
            fmt_f64(row.theta_pred),
            fmt_f64(row.amp_pred),
            fmt_f64(row.amp_sim),
            fmt_f64(row.freq_pred),
            fmt_f64(row.freq_sim),
            row.converged
        );
    }
    let mut out = vec![m.write(&g.out, "branch.csv", csv.as_bytes())?];
    if g.svg {
        let series = [
            Series { name: "predicted".into(), points: rows.iter().map(|r| (r.mu, r.amp_pred)).collect(), scatter: false },
            Series { name: "simulated".into(), points: rows.iter().map(|r| (r.mu, r.amp_sim)).collect(), scatter: true },
        ];
        let svg = line_plot("Cycle amplitude", &r.mu_name, "amplitude (x1)", &series);
        out.push(m.write(&g.out, "branch.svg", svg.as_bytes())?);
    }
    out.push(m.finish(&g.out)?);
    Ok(out)
}

fn half_range(h: &History, period: f64) -> f64 {
    let n = 1024;
    let (lo, hi) = (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| {
        let x = h.eval(period * k as f64 / n as f64)[0];
        (lo.min(x), hi.max(x))
    });
    0.5 * (hi - lo)
}
