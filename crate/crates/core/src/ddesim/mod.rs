//! Direct integration of the DDE as an independent check on the
//! frequency-domain predictions: fixed-step RK4 with cubic Hermite
//! interpolation of the stored solution for delayed values.

mod measure;

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use measure::{amplitude_branch, measure_cycle, CycleMeasurement};

use crate::hbalance::{fourier_all, HarmonicState};
use crate::model::{Params, Realization};
use crate::numcore::{lu_solve, CMatrix, CVector};
use crate::{Error, Result};

/// Norm beyond which a run is reported as divergent.
pub const DIVERGENCE_NORM: f64 = 1e8;

/// Right-hand side `x' = f(x, x(t - tau))` with a single constant delay.
pub trait DelaySystem {
    fn dim(&self) -> usize;
    fn tau(&self) -> f64;
    fn rhs(&self, x: &[f64], x_tau: &[f64], out: &mut [f64]) -> Result<()>;
}

/// `x' = A0 x + A1 x_tau + B g(-C x, -C x_tau)` for a realization at fixed
/// parameters.
pub struct FeedbackSystem<'a> {
    r: &'a Realization,
    params: Params,
    a0: DMatrix<f64>,
    a1: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl<'a> FeedbackSystem<'a> {
    pub fn new(r: &'a Realization, params: &Params) -> Result<Self> {
        let lin = r.linear(params)?;
        Ok(Self { r, params: params.clone(), a0: lin.a0, a1: lin.a1, b: lin.b, c: lin.c })
    }
}

impl DelaySystem for FeedbackSystem<'_> {
    fn dim(&self) -> usize {
        self.r.n
    }

    fn tau(&self) -> f64 {
        self.params.tau
    }

    fn rhs(&self, x: &[f64], x_tau: &[f64], out: &mut [f64]) -> Result<()> {
        let xv = DVector::from_column_slice(x);
        let xd = DVector::from_column_slice(x_tau);
        let y = -(&self.c * &xv);
        let yd = -(&self.c * &xd);
        let g = DVector::from_vec(self.r.g(y.as_slice(), yd.as_slice(), &self.params)?);
        let f = &self.a0 * xv + &self.a1 * xd + &self.b * g;
        out.copy_from_slice(f.as_slice());
        Ok(())
    }
}

/// A DDE given directly by a closure.
pub struct RawDde<F> {
    pub n: usize,
    pub tau: f64,
    pub f: F,
}

impl<F: Fn(&[f64], &[f64]) -> Vec<f64>> DelaySystem for RawDde<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn tau(&self) -> f64 {
        self.tau
    }

    fn rhs(&self, x: &[f64], x_tau: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&(self.f)(x, x_tau));
        Ok(())
    }
}

pub type HistoryFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

/// Initial function on `[-tau, 0]`.
#[derive(Clone)]
pub enum History {
    Constant(Vec<f64>),
    /// Samples `(t, x)` with increasing `t` covering `[-tau, 0]`.
    Sampled { t: Vec<f64>, x: Vec<Vec<f64>> },
    Function(Arc<HistoryFn>),
}

impl std::fmt::Debug for History {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            History::Constant(x) => f.debug_tuple("Constant").field(x).finish(),
            History::Sampled { t, .. } => write!(f, "Sampled({} points)", t.len()),
            History::Function(_) => f.write_str("Function"),
        }
    }
}

impl History {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            History::Constant(x) => x.clone(),
            History::Function(h) => h(t),
            History::Sampled { t: ts, x } => {
                let i = ts.partition_point(|&s| s <= t).clamp(1, ts.len() - 1);
                let (t0, t1) = (ts[i - 1], ts[i]);
                let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                x[i - 1].iter().zip(&x[i]).map(|(a, b)| a + s * (b - a)).collect()
            }
        }
    }

    /// The periodic state signal of a harmonic-balance orbit at amplitude
    /// `theta`. State harmonics are `-C^{-1} a_j` when `C` is invertible,
    /// otherwise `R(i j omega) B c_j` with `R` the state resolvent.
    pub fn from_orbit(r: &Realization, hs: &HarmonicState, theta: f64) -> Result<Self> {
        let lin = r.linear(&hs.params)?;
        let eq = r.find_equilibrium(&hs.params, hs.y_hat.as_slice())?;
        let n = r.n;
        let to_c = |m: &DMatrix<f64>| m.map(|v| Complex64::new(v, 0.0));
        let (b, a0, a1) = (to_c(&lin.b), to_c(&lin.a0), to_c(&lin.a1));
        let mut state: Vec<(i32, CVector)> = Vec::new();
        let c_inv = if lin.c.nrows() == n && lin.c.ncols() == n { lin.c.clone().try_inverse() } else { None };
        if let Some(ci) = c_inv {
            let ci = to_c(&ci);
            for (j, s) in hs.harmonics() {
                state.push((j, -(&ci * s.eval(theta))));
            }
        } else {
            let tensors = r.tensors_at(&eq, 2 * hs.q + 1)?;
            for (j, cj) in fourier_all(&tensors, hs)? {
                let s = Complex64::new(0.0, j as f64 * hs.omega);
                let res: CMatrix = CMatrix::identity(n, n) * s - &a0 - &a1 * (-s * hs.params.tau).exp();
                let rhs: CMatrix = &b * CMatrix::from_column_slice(r.m, 1, cj.eval(theta).as_slice());
                state.push((j, lu_solve(&res, &rhs)?.column(0).into_owned()));
            }
        }
        let x_hat = eq.x_hat.clone();
        let omega = hs.omega;
        Ok(History::Function(Arc::new(move |t| {
            let mut acc = x_hat.map(|v| Complex64::new(v, 0.0));
            for (j, xj) in &state {
                acc += xj * Complex64::from_polar(1.0, *j as f64 * omega * t);
            }
            acc.iter().map(|z| z.re).collect()
        })))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    CubicHermite,
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub dt: f64,
    pub t_transient: f64,
    pub t_measure: f64,
    pub history: History,
    pub interpolation: Interpolation,
    /// State component used for period detection.
    pub component: usize,
    /// Fourier coefficients are estimated for `|j| <= harmonics`.
    pub harmonics: usize,
}

impl SimConfig {
    pub fn new(dt: f64, t_transient: f64, t_measure: f64, history: History) -> Self {
        Self { dt, t_transient, t_measure, history, interpolation: Interpolation::CubicHermite, component: 0, harmonics: 4 }
    }

    pub fn validate(&self, tau: f64) -> Result<()> {
        if !(self.dt > 0.0) || self.dt > tau / 20.0 + 1e-15 {
            return Err(Error::Validation(format!("dt = {} must lie in (0, tau/20 = {}]", self.dt, tau / 20.0)));
        }
        if !(self.t_transient >= 0.0 && self.t_measure > 0.0) {
            return Err(Error::Validation("durations must be positive".into()));
        }
        Ok(())
    }
}

/// Solution sampled every `dt` from `t = 0`, with derivatives.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub dx: Vec<Vec<f64>>,
    /// Time at which the norm exceeded [`DIVERGENCE_NORM`].
    pub diverged_at: Option<f64>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    /// State at an arbitrary time inside the trajectory (cubic Hermite).
    pub fn at(&self, t: f64) -> Vec<f64> {
        let h = self.t[1] - self.t[0];
        let i = (((t - self.t[0]) / h).floor() as usize).min(self.t.len() - 2);
        hermite(self.t[i], h, &self.x[i], &self.dx[i], &self.x[i + 1], &self.dx[i + 1], t)
    }

    /// CSV with header `t,x1,...,xn`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string()).chain((1..=self.dim()).map(|i| format!("x{i}"))).collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, x) in self.t.iter().zip(&self.x) {
            write!(w, "{t:.16e}")?;
            for v in x {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// The last `tau` of the run as a sampled history for a follow-up run.
    pub fn tail_history(&self, tau: f64) -> History {
        let end = *self.t.last().unwrap();
        let start = self.t.partition_point(|&s| s < end - tau - 1e-12).saturating_sub(1);
        History::Sampled {
            t: self.t[start..].iter().map(|s| s - end).collect(),
            x: self.x[start..].to_vec(),
        }
    }
}

fn hermite(t0: f64, h: f64, x0: &[f64], d0: &[f64], x1: &[f64], d1: &[f64], t: f64) -> Vec<f64> {
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..x0.len()).map(|k| h00 * x0[k] + h10 * h * d0[k] + h01 * x1[k] + h11 * h * d1[k]).collect()
}

/// Delayed values: history samples on `[-tau, 0]` (derivatives by
/// finite differences) followed by the computed solution. The solution
/// slope generally jumps at `t = 0`, so the last history interval keeps
/// the history's own left slope there.
struct Store<'a> {
    h: f64,
    t0: f64,
    x: Vec<Vec<f64>>,
    dx: Vec<Vec<f64>>,
    zero: usize,
    left_slope: Vec<f64>,
    history: &'a History,
}

impl Store<'_> {
    fn at(&self, t: f64) -> Vec<f64> {
        if t <= 0.0 && !matches!(self.history, History::Sampled { .. }) {
            return self.history.eval(t);
        }
        let pos = (t - self.t0) / self.h;
        let i = (pos.floor().max(0.0) as usize).min(self.x.len() - 2);
        let ti = self.t0 + i as f64 * self.h;
        let d1 = if i + 1 == self.zero { &self.left_slope } else { &self.dx[i + 1] };
        hermite(ti, self.h, &self.x[i], &self.dx[i], &self.x[i + 1], d1, t)
    }
}

/// Integrate over `[0, t_transient + t_measure]`.
pub fn integrate<S: DelaySystem>(sys: &S, cfg: &SimConfig) -> Result<Trajectory> {
    let tau = sys.tau();
    cfg.validate(tau)?;
    let n = sys.dim();
    let h = cfg.dt;
    let steps = ((cfg.t_transient + cfg.t_measure) / h).ceil() as usize;
    let hist_steps = (tau / h).ceil() as usize + 1;
    let t0 = -(hist_steps as f64) * h;
    let mut store = Store {
        h,
        t0,
        x: Vec::with_capacity(hist_steps + steps + 1),
        dx: Vec::new(),
        zero: hist_steps,
        left_slope: Vec::new(),
        history: &cfg.history,
    };
    for i in 0..=hist_steps {
        let x = cfg.history.eval(t0 + i as f64 * h);
        if x.len() != n {
            return Err(Error::Dimension(format!("history has dimension {}, system {n}", x.len())));
        }
        store.x.push(x);
    }
    // Finite-difference slopes on the history, one-sided at the ends.
    for i in 0..=hist_steps {
        let (a, b, w) = match i {
            0 => (0, 1, h),
            i if i == hist_steps => (i - 1, i, h),
            i => (i - 1, i + 1, 2.0 * h),
        };
        store.dx.push((0..n).map(|k| (store.x[b][k] - store.x[a][k]) / w).collect());
    }
    // The slope at t = 0 is the vector field.
    let mut f = vec![0.0; n];
    {
        let x = store.x[hist_steps].clone();
        sys.rhs(&x, &store.at(-tau), &mut f)?;
        store.left_slope = std::mem::replace(&mut store.dx[hist_steps], f.clone());
    }

    let mut traj = Trajectory { t: vec![0.0], x: vec![store.x[hist_steps].clone()], dx: vec![f.clone()], diverged_at: None };
    let (mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for step in 0..steps {
        let t = step as f64 * h;
        let x = traj.x[step].clone();
        let k1 = traj.dx[step].clone();
        let xd_half = store.at(t + 0.5 * h - tau);
        let xd_full = store.at(t + h - tau);
        for k in 0..n {
            tmp[k] = x[k] + 0.5 * h * k1[k];
        }
        sys.rhs(&tmp, &xd_half, &mut k2)?;
        for k in 0..n {
            tmp[k] = x[k] + 0.5 * h * k2[k];
        }
        sys.rhs(&tmp, &xd_half, &mut k3)?;
        for k in 0..n {
            tmp[k] = x[k] + h * k3[k];
        }
        sys.rhs(&tmp, &xd_full, &mut k4)?;
        let xn: Vec<f64> = (0..n).map(|k| x[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])).collect();
        let tn = t + h;
        let norm = xn.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            traj.diverged_at = Some(tn);
            break;
        }
        sys.rhs(&xn, &xd_full, &mut f)?;
        store.x.push(xn.clone());
        store.dx.push(f.clone());
        traj.t.push(tn);
        traj.x.push(xn);
        traj.dx.push(f.clone());
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::pyragas_model;
    use crate::hbalance::solve_harmonics;

    #[test]
    fn scalar_linear_decay() {
        let sys = RawDde { n: 1, tau: 0.1, f: |_x: &[f64], xd: &[f64]| vec![-xd[0]] };
        let cfg = SimConfig::new(0.005, 50.0, 1.0, History::Constant(vec![1.0]));
        let traj = integrate(&sys, &cfg).unwrap();
        assert!(traj.at(50.0)[0].abs() < 1e-3);
    }

    #[test]
    fn undelayed_exponential_is_fourth_order() {
        let err = |dt: f64| {
            let sys = RawDde { n: 1, tau: 1.0, f: |x: &[f64], _: &[f64]| vec![-x[0]] };
            let cfg = SimConfig::new(dt, 0.0, 1.0, History::Constant(vec![1.0]));
            let tr = integrate(&sys, &cfg).unwrap();
            (tr.x.last().unwrap()[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.05) / err(0.025);
        assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
    }

    #[test]
    fn dt_cap_enforced() {
        let sys = RawDde { n: 1, tau: 1.0, f: |x: &[f64], _: &[f64]| vec![-x[0]] };
        let cfg = SimConfig::new(0.1, 1.0, 1.0, History::Constant(vec![1.0]));
        assert!(matches!(integrate(&sys, &cfg), Err(Error::Validation(_))));
    }

    #[test]
    fn divergence_is_reported() {
        let sys = RawDde { n: 1, tau: 1.0, f: |x: &[f64], _: &[f64]| vec![x[0] * x[0]] };
        let cfg = SimConfig::new(0.01, 5.0, 1.0, History::Constant(vec![1.0]));
        let tr = integrate(&sys, &cfg).unwrap();
        assert!(tr.diverged_at.is_some());
    }

    #[test]
    fn pyragas_orbit_history_is_exact_cycle() {
        let r = pyragas_model();
        let p = r.default_params();
        let hs = solve_harmonics(&r, &p, 1.0, 2).unwrap();
        let theta = 0.05;
        let Ok(History::Function(h)) = History::from_orbit(&r, &hs, theta) else { panic!() };
        let x = h(0.0);
        assert!((x[0].hypot(x[1]) - 2f64.sqrt() * theta).abs() < 1e-14);
    }

    #[test]
    fn csv_header() {
        let tr = Trajectory { t: vec![0.0], x: vec![vec![1.0, 2.0]], dx: vec![vec![0.0, 0.0]], diverged_at: None };
        let mut out = Vec::new();
        tr.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("t,x1,x2\n"));
    }
}
