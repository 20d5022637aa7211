use num_complex::Complex64;
use serde::Serialize;

use super::{integrate, FeedbackSystem, SimConfig, Trajectory};
use crate::model::{Params, Realization};
use crate::Result;

/// Periods that must agree for a run to count as converged.
const PERIODS_CHECKED: usize = 5;
const PERIOD_RTOL: f64 = 1e-6;
/// Relative change of the reference amplitude over the checked periods.
const AMPLITUDE_RTOL: f64 = 1e-5;
const RESAMPLE: usize = 1024;

#[derive(Clone, Debug, Serialize)]
pub struct CycleMeasurement {
    /// Bifurcation parameter of the run, when part of a branch.
    pub mu: Option<f64>,
    /// Half peak-to-peak per state component over the last period.
    pub amplitude: Vec<f64>,
    pub period: f64,
    pub frequency: f64,
    pub converged: bool,
    pub diverged: bool,
    /// Successive period estimates.
    pub periods: Vec<f64>,
    /// `c_j` per state component for `|j| <= harmonics`, over the last
    /// full period starting at an upward crossing.
    pub fourier: Vec<(i32, Vec<Complex64>)>,
}

impl CycleMeasurement {
    fn failed(diverged: bool, n: usize) -> Self {
        Self {
            mu: None,
            amplitude: vec![0.0; n],
            period: f64::NAN,
            frequency: f64::NAN,
            converged: false,
            diverged,
            periods: Vec::new(),
            fourier: Vec::new(),
        }
    }
}

/// Upward zero crossings of `s`, each refined by the root of the parabola
/// through three neighbouring samples.
fn crossings(t: &[f64], s: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..s.len().saturating_sub(1) {
        if !(s[i] < 0.0 && s[i + 1] >= 0.0) {
            continue;
        }
        let j = if i + 2 < s.len() { i } else if i >= 1 { i - 1 } else { i };
        let h = t[i + 1] - t[i];
        let lin = t[i] - s[i] * h / (s[i + 1] - s[i]);
        if j + 2 >= s.len() {
            out.push(lin);
            continue;
        }
        // s(u) = a u^2 + b u + c on u = (t - t_j)/h, nodes u = 0, 1, 2
        let (y0, y1, y2) = (s[j], s[j + 1], s[j + 2]);
        let a = 0.5 * (y0 - 2.0 * y1 + y2);
        let b = -1.5 * y0 + 2.0 * y1 - 0.5 * y2;
        let c = y0;
        let (lo, hi) = ((i - j) as f64, (i - j + 1) as f64);
        let root = if a.abs() < 1e-14 * (b.abs() + c.abs()) {
            -c / b
        } else {
            let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
            let r1 = (-b + disc) / (2.0 * a);
            let r2 = (-b - disc) / (2.0 * a);
            if (lo..=hi).contains(&r1) { r1 } else { r2 }
        };
        if (lo..=hi).contains(&root) {
            out.push(t[j] + root * h);
        } else {
            out.push(lin);
        }
    }
    out
}

/// Period, amplitude and Fourier content of the part of `traj` after
/// `cfg.t_transient`.
pub fn measure_cycle(traj: &Trajectory, cfg: &SimConfig) -> CycleMeasurement {
    let n = traj.dim();
    if traj.diverged_at.is_some() {
        return CycleMeasurement::failed(true, n);
    }
    let start = traj.t.partition_point(|&s| s < cfg.t_transient);
    let t = &traj.t[start..];
    if t.len() < 4 {
        return CycleMeasurement::failed(false, n);
    }
    let comp: Vec<f64> = traj.x[start..].iter().map(|x| x[cfg.component]).collect();
    let mut mean = comp.iter().sum::<f64>() / comp.len() as f64;
    let mut cross = crossings(t, &comp.iter().map(|v| v - mean).collect::<Vec<_>>());
    if cross.len() >= 3 {
        // Re-centre on a whole number of periods.
        let (a, b) = (cross[0], *cross.last().unwrap());
        let m = 2000;
        mean = (0..m).map(|k| traj.at(a + (b - a) * (k as f64 + 0.5) / m as f64)[cfg.component]).sum::<f64>() / m as f64;
        cross = crossings(t, &comp.iter().map(|v| v - mean).collect::<Vec<_>>());
    }
    if cross.len() < 2 {
        return CycleMeasurement::failed(false, n);
    }
    let periods: Vec<f64> = cross.windows(2).map(|w| w[1] - w[0]).collect();
    let tail = &periods[periods.len().saturating_sub(PERIODS_CHECKED)..];
    let period = tail.iter().sum::<f64>() / tail.len() as f64;
    let spread = tail.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - tail.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let omega = 2.0 * std::f64::consts::PI / period;

    let t_end = *cross.last().unwrap();
    let t_begin = t_end - period;
    let resample = |from: f64| -> Vec<Vec<f64>> {
        (0..RESAMPLE).map(|k| traj.at(from + period * k as f64 / RESAMPLE as f64)).collect()
    };
    let half_range = |samples: &[Vec<f64>], c: usize| {
        let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[c]), hi.max(x[c])));
        0.5 * (hi - lo)
    };
    let samples = resample(t_begin);
    let amplitude: Vec<f64> = (0..n).map(|c| half_range(&samples, c)).collect();
    // A slowly relaxing orbit can have steady periods long before its
    // amplitude settles.
    let settled = cross.len() > PERIODS_CHECKED && {
        let earlier = half_range(&resample(cross[cross.len() - 1 - PERIODS_CHECKED]), cfg.component);
        let now = amplitude[cfg.component];
        (now - earlier).abs() <= AMPLITUDE_RTOL * now
    };
    let converged = tail.len() == PERIODS_CHECKED && spread <= PERIOD_RTOL * period && settled;
    let h = cfg.harmonics as i32;
    let fourier = (-h..=h)
        .map(|j| {
            let coeffs = (0..n)
                .map(|c| {
                    samples.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (k, x)| {
                        let phase = -2.0 * std::f64::consts::PI * j as f64 * k as f64 / RESAMPLE as f64;
                        acc + Complex64::from_polar(x[c], phase)
                    }) / RESAMPLE as f64
                })
                .collect();
            (j, coeffs)
        })
        .collect();
    CycleMeasurement { mu: None, amplitude, period, frequency: omega, converged, diverged: false, periods, fourier }
}

/// Simulate along `mu_grid`, seeding each run with the tail of the previous
/// one (the configured history after a divergence).
pub fn amplitude_branch(r: &Realization, base: &Params, mu_grid: &[f64], cfg: &SimConfig) -> Result<Vec<CycleMeasurement>> {
    let mut out = Vec::with_capacity(mu_grid.len());
    let mut history = cfg.history.clone();
    for &mu in mu_grid {
        let params = base.with_mu(mu);
        let sys = FeedbackSystem::new(r, &params)?;
        let run = SimConfig { history: history.clone(), ..cfg.clone() };
        let traj = integrate(&sys, &run)?;
        let mut m = measure_cycle(&traj, &run);
        m.mu = Some(mu);
        history = if m.diverged { cfg.history.clone() } else { traj.tail_history(params.tau) };
        out.push(m);
    }
    Ok(out)
}
