use rayon::prelude::*;
use serde::Serialize;

use super::{amplitude_varieties, classify_frequency_as, Family};
use crate::bifexpand::{expand_amplitude, expand_frequency, FitConfig};
use crate::hopf::{find_critical, Fixed};
use crate::model::{Params, Realization};
use crate::numcore::{newton_solve, NewtonConfig};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct ScanAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl ScanAxis {
    pub fn linspace(name: &str, lo: f64, hi: f64, count: usize) -> Self {
        let values = (0..count)
            .map(|i| if count == 1 { lo } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
            .collect();
        Self { name: name.to_string(), values }
    }
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub family: Family,
    /// `(omega, mu)` guess for the critical point at the first node.
    pub guess: (f64, f64),
    /// Absolute tolerance on the refined parameter along a grid edge.
    pub refine_tol: f64,
    /// Frequency window for the p-families.
    pub window: FitConfig,
}

impl ScanConfig {
    pub fn new(family: Family, guess: (f64, f64)) -> Self {
        Self { family, guess, refine_tol: 1e-8, window: FitConfig::frequency() }
    }
}

/// Expansion data at one parameter point.
#[derive(Clone, Debug, Serialize)]
pub struct NodeValue {
    pub p1: f64,
    pub p2: f64,
    pub omega0: f64,
    pub mu0: f64,
    /// `mu_1..mu_q`, or `[eps0]` / `[eps0, eps1]`.
    pub coeffs: Vec<f64>,
    /// `mu_q` or `eps`.
    pub leading: f64,
    pub varieties: Vec<(&'static str, f64, bool)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContourPoint {
    pub variety: &'static str,
    pub p1: f64,
    pub p2: f64,
    pub omega0: f64,
    pub mu0: f64,
}

/// Point where every unfolding coefficient vanishes.
#[derive(Clone, Debug, Serialize)]
pub struct OrganizingCentre {
    pub p1: f64,
    pub p2: f64,
    pub omega0: f64,
    pub mu0: f64,
    /// Leading coefficient (`mu_q` or `eps`) at the centre.
    pub leading: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VarietyScan {
    pub axes: (String, String),
    pub nodes: Vec<Vec<Option<NodeValue>>>,
    pub contours: Vec<ContourPoint>,
    pub centres: Vec<OrganizingCentre>,
    pub warnings: Vec<String>,
}

struct Ctx<'a> {
    r: &'a Realization,
    base: &'a Params,
    names: (&'a str, &'a str),
    cfg: &'a ScanConfig,
}

impl Ctx<'_> {
    fn params(&self, p1: f64, p2: f64) -> Params {
        let mut p = self.base.clone();
        p.set(self.names.0, p1, &self.r.mu_name);
        p.set(self.names.1, p2, &self.r.mu_name);
        p
    }

    fn eval(&self, p1: f64, p2: f64, guess: (f64, f64)) -> Result<NodeValue> {
        let params = self.params(p1, p2);
        let cp = find_critical(self.r, &params, Fixed::Tau(params.tau), guess)?;
        let family = self.cfg.family;
        let (coeffs, varieties, leading) = if family.is_amplitude() {
            let q = family.order();
            let be = expand_amplitude(self.r, &cp, q)?;
            let mu = be.mu_k[1..=q].to_vec();
            let vs = amplitude_varieties(&mu, 0.0).into_iter().map(|v| (v.name, v.value, v.active)).collect();
            (mu[..q - 1].to_vec(), vs, mu[q - 1])
        } else {
            let fs = expand_frequency(self.r, &cp, 3, &self.cfg.window)?;
            let rep = classify_frequency_as(&fs, family, 0.0)?;
            let vs = rep.varieties.iter().map(|v| (v.name, v.value, v.active)).collect();
            (rep.unfolding.clone(), vs, rep.leading_coeff)
        };
        Ok(NodeValue { p1, p2, omega0: cp.omega0, mu0: cp.mu0, coeffs, leading, varieties })
    }
}

/// Transition varieties of `cfg.family` over a two-parameter grid.
/// Critical points are found at fixed delay; each node is seeded from its
/// neighbour. Sign changes of a variety function along grid edges are
/// refined by regula falsi; cells where all unfolding coefficients change
/// sign are searched for an organizing centre by Newton.
pub fn scan_varieties(
    r: &Realization,
    base: &Params,
    axis1: &ScanAxis,
    axis2: &ScanAxis,
    cfg: &ScanConfig,
) -> Result<VarietyScan> {
    if axis1.values.is_empty() || axis2.values.is_empty() {
        return Err(Error::Validation("empty scan axis".into()));
    }
    if cfg.family == Family::AmplitudeQ1 {
        return Err(Error::Validation("q = 1 has no transition varieties".into()));
    }
    let ctx = Ctx { r, base, names: (&axis1.name, &axis2.name), cfg };
    let mut warnings = Vec::new();

    // First column sequentially, then rows in parallel.
    let mut col0: Vec<Option<(f64, f64)>> = Vec::with_capacity(axis2.values.len());
    let mut guess = cfg.guess;
    for &p2 in &axis2.values {
        match ctx.eval(axis1.values[0], p2, guess) {
            Ok(e) => {
                guess = (e.omega0, e.mu0);
                col0.push(Some(guess));
            }
            Err(_) => col0.push(None),
        }
    }
    let rows: Vec<Vec<std::result::Result<NodeValue, String>>> = axis2
        .values
        .par_iter()
        .zip(col0.par_iter())
        .map(|(&p2, seed)| {
            let mut guess = seed.unwrap_or(cfg.guess);
            axis1
                .values
                .iter()
                .map(|&p1| {
                    let e = ctx.eval(p1, p2, guess).map_err(|e| format!("node ({p1}, {p2}): {e}"))?;
                    guess = (e.omega0, e.mu0);
                    Ok(e)
                })
                .collect()
        })
        .collect();

    let mut nodes: Vec<Vec<Option<NodeValue>>> = Vec::new();
    for row in rows {
        let mut nrow = Vec::new();
        for cell in row {
            match cell {
                Ok(e) => nrow.push(Some(e)),
                Err(msg) => {
                    warnings.push(format!("{msg}; node skipped"));
                    nrow.push(None);
                }
            }
        }
        nodes.push(nrow);
    }

    // Edges with a sign change of an active variety function.
    let mut edges = Vec::new();
    let (n1, n2) = (axis1.values.len(), axis2.values.len());
    for j in 0..n2 {
        for i in 0..n1 {
            for (dj, di) in [(0usize, 1usize), (1, 0)] {
                let (j2, i2) = (j + dj, i + di);
                if j2 >= n2 || i2 >= n1 {
                    continue;
                }
                let (Some(a), Some(b)) = (&nodes[j][i], &nodes[j2][i2]) else { continue };
                for (k, (va, vb)) in a.varieties.iter().zip(&b.varieties).enumerate() {
                    if va.1 * vb.1 < 0.0 && (va.2 || vb.2) {
                        edges.push((a.clone(), b.clone(), k));
                    }
                }
            }
        }
    }
    let refined: Vec<std::result::Result<Option<ContourPoint>, String>> =
        edges.par_iter().map(|(a, b, k)| refine_edge(&ctx, a, b, *k)).collect();
    let mut contours = Vec::new();
    for item in refined {
        match item {
            Ok(Some(c)) => contours.push(c),
            Ok(None) => {}
            Err(msg) => warnings.push(msg),
        }
    }

    // Organizing centres.
    let mut cells = Vec::new();
    let arity = cfg.family.arity();
    for j in 0..n2.saturating_sub(1) {
        for i in 0..n1.saturating_sub(1) {
            let corners = [(j, i), (j, i + 1), (j + 1, i), (j + 1, i + 1)];
            let vals: Option<Vec<&NodeValue>> = corners.iter().map(|&(a, b)| nodes[a][b].as_ref()).collect();
            let Some(vals) = vals else { continue };
            let changes = (0..arity).all(|k| {
                let pos = vals.iter().any(|v| v.coeffs[k] > 0.0);
                let neg = vals.iter().any(|v| v.coeffs[k] < 0.0);
                pos && neg
            });
            if arity == 2 && changes {
                cells.push(vals.iter().map(|v| (*v).clone()).collect::<Vec<_>>());
            }
        }
    }
    let centres: Vec<std::result::Result<OrganizingCentre, String>> =
        cells.par_iter().map(|corners| find_centre(&ctx, corners)).collect();
    let mut found: Vec<OrganizingCentre> = Vec::new();
    for c in centres {
        match c {
            Ok(c) => {
                let dup = found.iter().any(|f| (f.p1 - c.p1).abs() < 1e-7 && (f.p2 - c.p2).abs() < 1e-7);
                if !dup {
                    found.push(c);
                }
            }
            Err(msg) => warnings.push(msg),
        }
    }
    Ok(VarietyScan { axes: (axis1.name.clone(), axis2.name.clone()), nodes, contours, centres: found, warnings })
}

fn refine_edge(ctx: &Ctx, a: &NodeValue, b: &NodeValue, k: usize) -> std::result::Result<Option<ContourPoint>, String> {
    let name = a.varieties[k].0;
    let at = |t: f64| -> Result<(f64, NodeValue)> {
        let p1 = a.p1 + t * (b.p1 - a.p1);
        let p2 = a.p2 + t * (b.p2 - a.p2);
        let guess = (a.omega0 + t * (b.omega0 - a.omega0), a.mu0 + t * (b.mu0 - a.mu0));
        let e = ctx.eval(p1, p2, guess)?;
        Ok((e.varieties[k].1, e))
    };
    let len = (b.p1 - a.p1).abs().max((b.p2 - a.p2).abs());
    let (mut ta, mut fa) = (0.0, a.varieties[k].1);
    let (mut tb, mut fb) = (1.0, b.varieties[k].1);
    let mut side = 0i8;
    let mut last = None;
    for _ in 0..80 {
        if (tb - ta) * len <= ctx.cfg.refine_tol {
            break;
        }
        let mut t = (ta * fb - tb * fa) / (fb - fa);
        if !(t > ta && t < tb) {
            t = 0.5 * (ta + tb);
        }
        let (ft, node) = at(t).map_err(|e| format!("{name} refinement near ({}, {}): {e}", a.p1, a.p2))?;
        last = Some((t, node));
        if ft == 0.0 {
            ta = t;
            tb = t;
            break;
        }
        if (ft < 0.0) == (fa < 0.0) {
            ta = t;
            fa = ft;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            tb = t;
            fb = ft;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    let Some((_, node)) = last else { return Ok(None) };
    // The zero belongs to the variety only if its side condition holds.
    if !node.varieties[k].2 {
        return Ok(None);
    }
    let t = 0.5 * (ta + tb);
    Ok(Some(ContourPoint {
        variety: name,
        p1: a.p1 + t * (b.p1 - a.p1),
        p2: a.p2 + t * (b.p2 - a.p2),
        omega0: node.omega0,
        mu0: node.mu0,
    }))
}

fn find_centre(ctx: &Ctx, corners: &[NodeValue]) -> std::result::Result<OrganizingCentre, String> {
    let n = corners.len() as f64;
    let c1 = corners.iter().map(|c| c.p1).sum::<f64>() / n;
    let c2 = corners.iter().map(|c| c.p2).sum::<f64>() / n;
    let guess = (
        corners.iter().map(|c| c.omega0).sum::<f64>() / n,
        corners.iter().map(|c| c.mu0).sum::<f64>() / n,
    );
    let scales: Vec<f64> = (0..2)
        .map(|k| corners.iter().fold(0.0f64, |m, c| m.max(c.coeffs[k].abs())).max(f64::MIN_POSITIVE))
        .collect();
    let span1 = corners.iter().map(|c| c.p1).fold(f64::NEG_INFINITY, f64::max) - corners.iter().map(|c| c.p1).fold(f64::INFINITY, f64::min);
    let span2 = corners.iter().map(|c| c.p2).fold(f64::NEG_INFINITY, f64::max) - corners.iter().map(|c| c.p2).fold(f64::INFINITY, f64::min);
    let cell = std::cell::RefCell::new(guess);
    let f = |x: &[f64]| -> Result<Vec<f64>> {
        let e = ctx.eval(c1 + x[0] * span1, c2 + x[1] * span2, *cell.borrow())?;
        *cell.borrow_mut() = (e.omega0, e.mu0);
        Ok(vec![e.coeffs[0] / scales[0], e.coeffs[1] / scales[1]])
    };
    let cfg = NewtonConfig { tol_residual: 1e-9, tol_step: 1e-12, jacobian_step: 1e-5, max_iter: 30 };
    let sol = newton_solve(f, &[0.0, 0.0], &cfg).map_err(|e| format!("organizing centre near ({c1}, {c2}): {e}"))?;
    let (p1, p2) = (c1 + sol.x[0] * span1, c2 + sol.x[1] * span2);
    let e = ctx.eval(p1, p2, *cell.borrow()).map_err(|e| e.to_string())?;
    Ok(OrganizingCentre { p1, p2, omega0: e.omega0, mu0: e.mu0, leading: e.leading })
}
