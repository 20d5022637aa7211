//! Parametrizations of the bifurcation equation: `mu(z)`, `omega(z)` in
//! `z = theta^2` at fixed delay, and `z(omega)`, `mu(omega)` along a
//! frequency window.
//!
//! Both are obtained by solving the two real equations at Chebyshev nodes
//! and fitting a polynomial, because `xi_k` are only available pointwise.

use num_complex::Complex64;

use crate::hbalance::{bif_equation, bif_equation_rephased};
use crate::hopf::CriticalPoint;
use crate::model::{Params, Realization};
use crate::numcore::{chebyshev_nodes, newton_solve, polyfit, NewtonConfig};
use crate::{Error, Result};

/// Sampling and fitting options shared by both expansions.
#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    /// Half-width of the sample interval (in `z` or in `omega`).
    pub half_width: f64,
    pub nodes: usize,
    pub degree: usize,
    /// Maximum accepted fit residual.
    pub max_residual: f64,
    /// Extra phase applied to the critical eigenvector before each sweep.
    /// Results must not depend on it.
    pub eig_phase: f64,
}

impl FitConfig {
    pub fn amplitude() -> Self {
        Self { half_width: 2.5e-3, nodes: 17, degree: 10, max_residual: 1e-8, eig_phase: 0.0 }
    }

    pub fn frequency() -> Self {
        Self { half_width: 2e-3, nodes: 17, degree: 10, max_residual: 1e-8, eig_phase: 0.0 }
    }
}

/// `mu = sum mu_k z^k`, `omega = sum omega_k z^k` with `z = theta^2`.
#[derive(Clone, Debug)]
pub struct BifExpansion {
    pub q: usize,
    pub mu_k: Vec<f64>,
    pub omega_k: Vec<f64>,
    /// Parameter point of the seeding critical point.
    pub params: Params,
    /// Largest fit residual over both series.
    pub fit_residual: f64,
}

impl BifExpansion {
    pub fn mu_at(&self, z: f64) -> f64 {
        self.mu_k.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    pub fn omega_at(&self, z: f64) -> f64 {
        self.omega_k.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    /// Smallest positive `z` with `mu(z) = mu`, scanning outward from 0 up
    /// to `z_max`, with the matching frequency. Roots where the truncated
    /// frequency series has turned non-positive are not cycles.
    pub fn predict_cycle(&self, mu: f64, z_max: f64) -> Option<(f64, f64)> {
        self.predict_raw(mu, z_max).filter(|(_, omega)| *omega > 0.0)
    }

    fn predict_raw(&self, mu: f64, z_max: f64) -> Option<(f64, f64)> {
        let f = |z: f64| self.mu_at(z) - mu;
        let steps = 2000;
        let mut a = 0.0;
        let mut fa = f(a);
        for i in 1..=steps {
            let b = z_max * i as f64 / steps as f64;
            let fb = f(b);
            if fa == 0.0 && a > 0.0 {
                return Some((a.sqrt(), self.omega_at(a)));
            }
            if fa * fb < 0.0 {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid);
                    if (fm < 0.0) == (flo < 0.0) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                let z = 0.5 * (lo + hi);
                return Some((z.sqrt(), self.omega_at(z)));
            }
            a = b;
            fa = fb;
        }
        None
    }
}

fn newton_cfg() -> NewtonConfig {
    NewtonConfig { tol_residual: 1e-13, max_iter: 40, ..NewtonConfig::default() }
}

/// Solve at every node, marching outward from the node nearest `center`
/// and seeding each solve from the nearest solved neighbour (linearly
/// extrapolated when two are available).
fn march<F>(nodes: &[f64], center: f64, seed: (f64, f64), mut solve: F) -> Result<Vec<(f64, f64)>>
where
    F: FnMut(f64, (f64, f64)) -> Result<(f64, f64)>,
{
    let n = nodes.len();
    let start = (0..n)
        .min_by(|&a, &b| (nodes[a] - center).abs().total_cmp(&(nodes[b] - center).abs()))
        .unwrap();
    let mut out: Vec<Option<(f64, f64)>> = vec![None; n];
    out[start] = Some(solve(nodes[start], seed)?);
    for dir in [1i64, -1] {
        let mut i = start as i64 + dir;
        while i >= 0 && (i as usize) < n {
            let iu = i as usize;
            let prev = (i - dir) as usize;
            let p1 = out[prev].unwrap();
            let guess = match out.get((i - 2 * dir) as usize).copied().flatten() {
                Some(p0) if i - 2 * dir >= 0 => {
                    let (x0, x1) = (nodes[(i - 2 * dir) as usize], nodes[prev]);
                    let s = (nodes[iu] - x1) / (x1 - x0);
                    (p1.0 + s * (p1.0 - p0.0), p1.1 + s * (p1.1 - p0.1))
                }
                _ => p1,
            };
            out[iu] = Some(solve(nodes[iu], guess)?);
            i += dir;
        }
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// Amplitude expansion at the critical point's delay.
pub fn expand_amplitude(r: &Realization, cp: &CriticalPoint, q: usize) -> Result<BifExpansion> {
    expand_amplitude_with(r, cp, q, &FitConfig::amplitude())
}

pub fn expand_amplitude_with(r: &Realization, cp: &CriticalPoint, q: usize, cfg: &FitConfig) -> Result<BifExpansion> {
    if !cp.nondegenerate {
        return Err(Error::Degeneracy(format!(
            "transversality determinant {:.3e} vanishes at the critical point",
            cp.transversality
        )));
    }
    let base = cp.params.clone();
    let mut attempt = cfg.clone();
    for shrink in 0..2 {
        let nodes = chebyshev_nodes(attempt.nodes, attempt.half_width);
        let solved = march(&nodes, 0.0, (cp.omega0, cp.mu0), |z, guess| {
            let f = |x: &[f64]| -> Result<Vec<f64>> {
                let be = bif_equation_rephased(r, &base.with_mu(x[1]), x[0], q, attempt.eig_phase)?;
                let res = be.lambda_hat + 1.0 + be.xi.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, xi| (acc + xi) * z);
                Ok(vec![res.re, res.im])
            };
            let s = newton_solve(f, &[guess.0, guess.1], &newton_cfg())?;
            Ok((s.x[0], s.x[1]))
        });
        match solved {
            Ok(sol) => {
                let omegas: Vec<f64> = sol.iter().map(|s| s.0).collect();
                let mus: Vec<f64> = sol.iter().map(|s| s.1).collect();
                let fo = polyfit(&nodes, &omegas, attempt.degree)?;
                let fm = polyfit(&nodes, &mus, attempt.degree)?;
                let fit_residual = fo.residual.max(fm.residual);
                if fit_residual > attempt.max_residual {
                    return Err(Error::IllConditioned { residual: fit_residual, tail: fm.coeffs[attempt.degree] });
                }
                let mut mu_k = fm.coeffs[..=q].to_vec();
                let mut omega_k = fo.coeffs[..=q].to_vec();
                // The constant terms are the critical values themselves.
                mu_k[0] = cp.mu0;
                omega_k[0] = cp.omega0;
                return Ok(BifExpansion { q, mu_k, omega_k, params: base, fit_residual });
            }
            Err(e) if shrink == 0 => {
                let _ = e;
                attempt.half_width /= 4.0;
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

/// `z(omega)` and `mu(omega)` along a frequency window at fixed delay.
#[derive(Clone, Debug)]
pub struct FreqSlice {
    pub q: usize,
    pub omega_grid: Vec<f64>,
    pub z_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    /// Expansion point `(omega_c, z_c, mu_c)`.
    pub center: (f64, f64, f64),
    /// `d^k mu / d omega^k` at `omega_c`, `k = 1..=3`.
    pub dmu: [f64; 3],
    /// `d^k z / d omega^k` at `omega_c`, `k = 1..=3`.
    pub dz: [f64; 3],
    /// Grid points where `z < -1e-12` (no real orbit).
    pub negative_z: Vec<bool>,
    pub params: Params,
    pub fit_residual: f64,
}

/// Frequency parametrization around a Hopf point.
pub fn expand_frequency(r: &Realization, cp: &CriticalPoint, q: usize, cfg: &FitConfig) -> Result<FreqSlice> {
    check_frequency_condition(r, cp, q)?;
    frequency_slice(r, &cp.params, q, (cp.omega0, 0.0, cp.mu0), cfg)
}

/// `Re l_mu Im xi_1 - Im l_mu Re xi_1` must not vanish for `z`, `mu` to
/// be functions of `omega`.
pub fn check_frequency_condition(r: &Realization, cp: &CriticalPoint, q: usize) -> Result<f64> {
    let h = 1e-6 * cp.mu0.abs().max(1.0);
    let lam = |mu: f64| -> Result<Complex64> { Ok(bif_equation(r, &cp.params.with_mu(mu), cp.omega0, q)?.lambda_hat) };
    let l_mu = (lam(cp.mu0 + h)? - lam(cp.mu0 - h)?) / (2.0 * h);
    let xi1 = bif_equation(r, &cp.params, cp.omega0, q)?.xi[0];
    let value = l_mu.re * xi1.im - l_mu.im * xi1.re;
    if value.abs() <= 1e-8 {
        return Err(Error::Degeneracy(format!(
            "Re(l_mu) Im(xi_1) - Im(l_mu) Re(xi_1) = {value:.3e}"
        )));
    }
    Ok(value)
}

/// Solve for `(z, mu)` on a Chebyshev grid centred at `center.0`, seeded
/// with `(center.1, center.2)`; derivatives come from the fitted
/// polynomials.
pub fn frequency_slice(
    r: &Realization,
    params: &Params,
    q: usize,
    center: (f64, f64, f64),
    cfg: &FitConfig,
) -> Result<FreqSlice> {
    let (wc, zc, mc) = center;
    let offsets = chebyshev_nodes(cfg.nodes, cfg.half_width);
    let solved = march(&offsets, 0.0, (zc, mc), |dw, guess| {
        let omega = wc + dw;
        let f = |x: &[f64]| -> Result<Vec<f64>> {
            let be = bif_equation(r, &params.with_mu(x[1]), omega, q)?;
            let res = be.residual_z(x[0]);
            Ok(vec![res.re, res.im])
        };
        let s = newton_solve(f, &[guess.0, guess.1], &newton_cfg())?;
        Ok((s.x[0], s.x[1]))
    })?;
    let zs: Vec<f64> = solved.iter().map(|s| s.0).collect();
    let mus: Vec<f64> = solved.iter().map(|s| s.1).collect();
    let fz = polyfit(&offsets, &zs, cfg.degree)?;
    let fm = polyfit(&offsets, &mus, cfg.degree)?;
    let fit_residual = fz.residual.max(fm.residual);
    if fit_residual > cfg.max_residual {
        return Err(Error::IllConditioned { residual: fit_residual, tail: fz.coeffs[cfg.degree] });
    }
    let deriv = |c: &[f64]| [c[1], 2.0 * c[2], 6.0 * c[3]];
    Ok(FreqSlice {
        q,
        omega_grid: offsets.iter().map(|d| wc + d).collect(),
        negative_z: zs.iter().map(|&z| z < -1e-12).collect(),
        z_values: zs,
        mu_values: mus,
        center: (wc, fz.coeffs[0], fm.coeffs[0]),
        dmu: deriv(&fm.coeffs),
        dz: deriv(&fz.coeffs),
        params: params.clone(),
        fit_residual,
    })
}

impl crate::hbalance::BifEquation {
    /// `lambda_hat + 1 + sum z^k xi_k`.
    pub fn residual_z(&self, z: f64) -> Complex64 {
        self.lambda_hat + 1.0 + self.xi.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, x| (acc + x) * z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{pyragas, pyragas_model};
    use crate::hopf::{find_critical, Fixed};

    fn pyragas_at(kappa: f64, tau: f64) -> (Realization, Params) {
        let r = pyragas_model();
        let mut p = r.default_params().with_tau(tau);
        p.aux.insert("kappa".into(), kappa);
        (r, p)
    }

    #[test]
    fn pyragas_kappa_zero_coefficients() {
        let (r, p) = pyragas_at(0.0, 1.0);
        let cp = find_critical(&r, &p, Fixed::Tau(1.0), (1.0, 0.0)).unwrap();
        let be = expand_amplitude(&r, &cp, 3).unwrap();
        assert!((be.mu_k[1] + 2.0).abs() < 1e-8, "{:?}", be.mu_k);
        assert!((be.omega_k[1] + 20.0).abs() < 1e-7, "{:?}", be.omega_k);
        assert!(be.mu_k[2].abs() < 1e-5 && be.mu_k[3].abs() < 1e-3);
    }

    #[test]
    fn pyragas_matches_closed_form() {
        let (r, p) = pyragas_at(-0.05, 2.0);
        let (om, mu) = pyragas::critical(&p, (1.0, 0.0)).unwrap();
        let cp = find_critical(&r, &p, Fixed::Tau(2.0), (om, mu)).unwrap();
        let be = expand_amplitude(&r, &cp, 3).unwrap();
        let (mus, oms) = pyragas::amplitude_coefficients(cp.omega0, &p).unwrap();
        for k in 0..3 {
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-3);
            assert!(rel(be.mu_k[k + 1], mus[k]) < 1e-6, "mu{} {} vs {}", k + 1, be.mu_k[k + 1], mus[k]);
            assert!(rel(be.omega_k[k + 1], oms[k]) < 1e-6, "om{} {} vs {}", k + 1, be.omega_k[k + 1], oms[k]);
        }
    }

    #[test]
    fn pyragas_frequency_slice_matches_closed_form() {
        let (r, p) = pyragas_at(-0.05, 2.0);
        let cp = find_critical(&r, &p, Fixed::Tau(2.0), (1.0, 0.0)).unwrap();
        let fs = expand_frequency(&r, &cp, 3, &FitConfig::frequency()).unwrap();
        for (i, &w) in fs.omega_grid.iter().enumerate() {
            let (z, mu) = pyragas::slice(w, &p).unwrap();
            assert!((fs.z_values[i] - z).abs() < 1e-10);
            assert!((fs.mu_values[i] - mu).abs() < 1e-10);
        }
    }

    #[test]
    fn leukemia_delta2() {
        let r = crate::builtin::leukemia_model();
        let cp = find_critical(&r, &r.default_params(), Fixed::Tau(4.9740704569), (0.26, 0.11)).unwrap();
        let be = expand_amplitude(&r, &cp, 2).unwrap();
        assert!(be.mu_k[1].abs() < 1e-6, "{:?}", be.mu_k);
        assert!((be.mu_k[2] - 0.00195373827).abs() < 5e-5, "{:?}", be.mu_k);
    }

    #[test]
    fn predict_cycle_inverts_mu() {
        let be = BifExpansion {
            q: 1,
            mu_k: vec![0.0, -2.0],
            omega_k: vec![1.0, -20.0],
            params: Params::new(0.0, 1.0, Default::default()),
            fit_residual: 0.0,
        };
        let (theta, omega) = be.predict_cycle(-0.02, 1.0).unwrap();
        assert!((theta - 0.1).abs() < 1e-10);
        assert!((omega - 0.8).abs() < 1e-9);
    }
}
