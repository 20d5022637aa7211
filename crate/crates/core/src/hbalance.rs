//! Graded harmonic balance: Fourier coefficients `c_j` of the nonlinear
//! part of `g` along a truncated periodic ansatz, the sweep that solves for
//! the harmonic coefficients `a_j` order by order in `theta`, and the
//! coefficients `xi_k` of the bifurcation equation
//! `lambda_hat + 1 + sum_k theta^(2k) xi_k = 0`.

use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::model::{Params, Realization, TaylorTensors};
use crate::numcore::{det, lu_solve, CMatrix, CVector, ThetaSeries};
use crate::transfer::{EigTriple, OperatingPoint};
use crate::{Error, Result};

/// Harmonic coefficients `a_0..a_{2q}` as series in `theta` (order `2q`);
/// negative harmonics are the conjugates.
#[derive(Clone, Debug)]
pub struct HarmonicState {
    pub q: usize,
    pub omega: f64,
    pub params: Params,
    pub y_hat: DVector<f64>,
    pub eig: EigTriple,
    a: Vec<ThetaSeries>,
}

impl HarmonicState {
    /// Initial state: `a_1 = v theta`, everything else zero.
    pub fn seeded(q: usize, omega: f64, params: Params, y_hat: DVector<f64>, eig: EigTriple) -> Self {
        let m = eig.v.len();
        let order = 2 * q;
        let mut a = vec![ThetaSeries::zero(order, m); 2 * q + 1];
        a[1] = ThetaSeries::monomial(order, 1, eig.v.clone());
        Self { q, omega, params, y_hat, eig, a }
    }

    pub fn m(&self) -> usize {
        self.eig.v.len()
    }

    /// `a_j` for `-2q <= j <= 2q`.
    pub fn a(&self, j: i32) -> ThetaSeries {
        let k = j.unsigned_abs() as usize;
        if k > 2 * self.q {
            return ThetaSeries::zero(2 * self.q, self.m());
        }
        if j >= 0 {
            self.a[k].clone()
        } else {
            self.a[k].conj()
        }
    }

    /// Coefficient vector `a_{j,k}`.
    pub fn coeff(&self, j: i32, k: usize) -> CVector {
        let s = self.a(j);
        if k > s.order() {
            CVector::zeros(self.m())
        } else {
            s.coeff(k).clone()
        }
    }

    fn set(&mut self, j: usize, k: usize, v: CVector) {
        self.a[j].set_coeff(k, v).expect("harmonic coefficient within order");
        if j == 0 {
            // a_0 = conj(a_0): keep it exactly real.
            let c = self.a[0].coeff(k).map(|z| Complex64::new(z.re, 0.0));
            self.a[0].set_coeff(k, c).unwrap();
        }
    }

    /// Harmonics `-2q..=2q` with their series, conjugates included.
    pub fn harmonics(&self) -> Vec<(i32, ThetaSeries)> {
        let h = 2 * self.q as i32;
        (-h..=h).map(|j| (j, self.a(j))).collect()
    }
}

/// Coefficients `xi_1..xi_q` at a point.
#[derive(Clone, Debug)]
pub struct BifEquation {
    pub q: usize,
    pub xi: Vec<Complex64>,
    pub lambda_hat: Complex64,
    pub omega: f64,
    pub params: Params,
}

impl BifEquation {
    /// `lambda_hat + 1 + sum theta^(2k) xi_k`.
    pub fn residual(&self, theta: f64) -> Complex64 {
        let z = theta * theta;
        self.lambda_hat + 1.0 + self.xi.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, x| (acc + x) * z)
    }
}

/// Dense table over (theta degree 0..=D, harmonic -D..=D).
#[derive(Clone)]
struct Grid {
    d: usize,
    v: Vec<Complex64>,
}

impl Grid {
    fn zero(d: usize) -> Self {
        Self { d, v: vec![Complex64::new(0.0, 0.0); (d + 1) * (2 * d + 1)] }
    }

    fn idx(&self, deg: usize, h: i32) -> usize {
        deg * (2 * self.d + 1) + (h + self.d as i32) as usize
    }

    fn get(&self, deg: usize, h: i32) -> Complex64 {
        self.v[self.idx(deg, h)]
    }

    fn add(&mut self, deg: usize, h: i32, z: Complex64) {
        let i = self.idx(deg, h);
        self.v[i] += z;
    }

    fn is_zero(&self) -> bool {
        self.v.iter().all(|z| z.norm_sqr() == 0.0)
    }

    /// Truncated product of the two signals.
    fn mul(&self, o: &Grid) -> Grid {
        let d = self.d as i32;
        let mut out = Grid::zero(self.d);
        let nz: Vec<(usize, i32, Complex64)> = (0..=self.d)
            .flat_map(|k| (-d..=d).map(move |h| (k, h)))
            .map(|(k, h)| (k, h, self.get(k, h)))
            .filter(|(_, _, z)| z.norm_sqr() != 0.0)
            .collect();
        for k2 in 0..=self.d {
            for h2 in -d..=d {
                let z2 = o.get(k2, h2);
                if z2.norm_sqr() == 0.0 {
                    continue;
                }
                for &(k1, h1, z1) in &nz {
                    let (k, h) = (k1 + k2, h1 + h2);
                    if k <= self.d && h.abs() <= d {
                        out.add(k, h, z1 * z2);
                    }
                }
            }
        }
        out
    }
}

/// All Fourier coefficients `c_j`, `|j| <= 2q`, of the nonlinear part of
/// `g` along the ansatz, as series of order `2q + 1` (the extra degree is
/// what the bifurcation equation reads at `theta^(2q+1)`).
pub fn fourier_all(tensors: &TaylorTensors, hs: &HarmonicState) -> Result<Vec<(i32, ThetaSeries)>> {
    let q = hs.q;
    let d = 2 * q + 1;
    if tensors.order() < d {
        return Err(Error::Capability(format!(
            "q = {q} needs tensors of order {d}, got {}",
            tensors.order()
        )));
    }
    let m = hs.m();
    let p = tensors.p();
    let slots = 2 * m;
    let tau = hs.params.tau;
    // Slot signals: undelayed outputs, then delayed ones.
    let mut signals = Vec::with_capacity(slots);
    for s in 0..slots {
        let comp = s % m;
        let delayed = s >= m;
        let mut g = Grid::zero(d);
        for (j, series) in hs.harmonics() {
            let factor = if delayed {
                Complex64::from_polar(1.0, -(j as f64) * hs.omega * tau)
            } else {
                Complex64::new(1.0, 0.0)
            };
            for k in 0..=series.order().min(d) {
                let z = series.coeff(k)[comp];
                if z.norm_sqr() != 0.0 {
                    g.add(k, j, z * factor);
                }
            }
        }
        signals.push(g);
    }

    let mut acc: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); (d + 1) * (2 * d + 1)]; p];
    let mut memo: HashMap<Vec<usize>, Grid> = HashMap::new();
    for n in 2..=d {
        for (idx, val) in tensors.block(n) {
            let prod = product(idx, &signals, &mut memo);
            if prod.is_zero() {
                continue;
            }
            for (r, coeff) in val.iter().enumerate() {
                if *coeff == 0.0 {
                    continue;
                }
                for (t, z) in acc[r].iter_mut().zip(&prod.v) {
                    *t += z * *coeff;
                }
            }
        }
    }
    let proto = Grid::zero(d);
    let h = 2 * q as i32;
    let mut out = Vec::new();
    for j in -h..=h {
        let coeffs: Vec<CVector> = (0..=d)
            .map(|k| CVector::from_iterator(p, (0..p).map(|r| acc[r][proto.idx(k, j)])))
            .collect();
        out.push((j, ThetaSeries::from_coeffs(coeffs)?));
    }
    Ok(out)
}

fn product(idx: &[usize], signals: &[Grid], memo: &mut HashMap<Vec<usize>, Grid>) -> Grid {
    if idx.len() == 1 {
        return signals[idx[0]].clone();
    }
    if let Some(g) = memo.get(idx) {
        return g.clone();
    }
    let head = product(&idx[..idx.len() - 1], signals, memo);
    let g = if head.is_zero() { head } else { head.mul(&signals[idx[idx.len() - 1]]) };
    memo.insert(idx.to_vec(), g.clone());
    g
}

/// Fourier coefficient `c_j` (order `2q + 1`).
pub fn fourier_c(tensors: &TaylorTensors, hs: &HarmonicState, j: i32) -> Result<ThetaSeries> {
    let h = 2 * hs.q as i32;
    if j.abs() > h {
        return Err(Error::Capability(format!("harmonic {j} outside -{h}..={h}")));
    }
    Ok(fourier_all(tensors, hs)?.into_iter().find(|(k, _)| *k == j).unwrap().1)
}

fn c_of(all: &[(i32, ThetaSeries)], j: i32) -> &ThetaSeries {
    &all.iter().find(|(k, _)| *k == j).unwrap().1
}

/// Everything the sweep needs at one `(omega, mu, tau)`.
pub struct Balance<'a> {
    pub op: &'a OperatingPoint,
    pub tensors: &'a TaylorTensors,
    pub omega: f64,
    pub q: usize,
    /// `G(i j omega)` for `j = 0..=2q`; `None` at a pole of `G`.
    g: Vec<Option<CMatrix>>,
    /// `L_j = GJ(i j omega) + I`, where `G` is defined.
    l: Vec<Option<CMatrix>>,
    /// Characteristic matrix of the linearized DDE at `i j omega`.
    delta: Vec<CMatrix>,
}

/// Frequencies below this make all harmonics coincide.
const MIN_OMEGA: f64 = 1e-8;

/// Smallest admissible `|det L_j|` for `j != 1`.
pub const RESONANCE_TOL: f64 = 1e-10;

impl<'a> Balance<'a> {
    pub fn new(op: &'a OperatingPoint, tensors: &'a TaylorTensors, omega: f64, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::Validation("q must be at least 1".into()));
        }
        if !(omega.abs() > MIN_OMEGA) {
            return Err(Error::DegenerateFrequency(omega));
        }
        let m = op.m();
        let mut g = Vec::with_capacity(2 * q + 1);
        let mut l = Vec::with_capacity(2 * q + 1);
        let mut delta = Vec::with_capacity(2 * q + 1);
        for j in 0..=2 * q {
            let s = Complex64::new(0.0, j as f64 * omega);
            let gj = match op.g(s) {
                Ok(x) => Some(x),
                Err(Error::SingularResolvent { .. }) if j != 1 => None,
                Err(e) => return Err(e),
            };
            let lj = gj.as_ref().map(|x| x * op.jacobian(s) + CMatrix::identity(m, m));
            let dj = op.char_matrix(s);
            if j != 1 {
                // det L_j = det Delta_j / det K_j where G exists; at a pole
                // of G only Delta_j matters.
                let d = match &lj {
                    Some(x) => det(x).norm(),
                    None => {
                        let scale = dj.camax().max(1.0);
                        det(&(&dj / Complex64::new(scale, 0.0))).norm()
                    }
                };
                if d < RESONANCE_TOL {
                    return Err(Error::Resonance { harmonic: j as i32, det: d });
                }
            }
            g.push(gj);
            l.push(lj);
            delta.push(dj);
        }
        Ok(Self { op, tensors, omega, q, g, l, delta })
    }

    /// Run the sweep with a given eigentriple.
    pub fn solve_with(&self, eig: EigTriple) -> Result<HarmonicState> {
        let q = self.q;
        let mut hs = HarmonicState::seeded(q, self.omega, self.op.params().clone(), self.op.eq.y_hat.clone(), eig);
        for k in 1..=q {
            // Even harmonics at degree 2k.
            let c = fourier_all(self.tensors, &hs)?;
            for j in (0..=2 * k).step_by(2) {
                let x = self.solve_l(j, c_of(&c, j as i32).coeff(2 * k))?;
                hs.set(j, 2 * k, x);
            }
            if k == q {
                break;
            }
            // Odd harmonics at degree 2k + 1.
            let c = fourier_all(self.tensors, &hs)?;
            for j in (1..=2 * k + 1).step_by(2) {
                let cj = c_of(&c, j as i32).coeff(2 * k + 1);
                let x = if j == 1 {
                    let rhs = -(self.g1() * cj);
                    self.solve_projected(&hs.eig, &rhs)?
                } else {
                    self.solve_l(j, cj)?
                };
                hs.set(j, 2 * k + 1, x);
            }
        }
        Ok(hs)
    }

    fn g1(&self) -> &CMatrix {
        self.g[1].as_ref().expect("G(i omega) checked in new")
    }

    /// `a = -L_j^{-1} G(i j omega) c`, computed as `-C Delta_j^{-1} B c`,
    /// which stays defined at poles of `G`.
    fn solve_l(&self, j: usize, c: &CVector) -> Result<CVector> {
        let bc = self.op.b() * c;
        let rhs = CMatrix::from_column_slice(bc.len(), 1, bc.as_slice());
        let x = lu_solve(&self.delta[j], &rhs).map_err(|_| Error::Resonance {
            harmonic: j as i32,
            det: det(&self.delta[j]).norm(),
        })?;
        Ok(-(self.op.c() * x.column(0)))
    }

    /// Solve `(I - Q) L_1 x = (I - Q) rhs` for `x` orthogonal to `v`
    /// (Hermitian product), via the bordered system
    /// `[[L_1, v], [w^T, 0]] [y; beta] = [rhs; 0]`.
    fn solve_projected(&self, eig: &EigTriple, rhs: &CVector) -> Result<CVector> {
        let m = rhs.len();
        let mut k = CMatrix::zeros(m + 1, m + 1);
        k.view_mut((0, 0), (m, m)).copy_from(self.l[1].as_ref().expect("G(i omega) checked in new"));
        for i in 0..m {
            k[(i, m)] = eig.v[i];
            k[(m, i)] = eig.w[i];
        }
        let mut b = CMatrix::zeros(m + 1, 1);
        for i in 0..m {
            b[(i, 0)] = rhs[i];
        }
        let sol = lu_solve(&k, &b).map_err(|e| Error::Projection(e.to_string()))?;
        let y = CVector::from_iterator(m, (0..m).map(|i| sol[(i, 0)]));
        let along = eig.v.dotc(&y);
        Ok(&y - &eig.v * along)
    }

    /// Step 2: `xi_k = (lambda + 1) w^T a_{1,2k+1} + w^T G(i omega) [c_1]_{2k+1}`,
    /// with `a_{1,2q+1} = 0`.
    pub fn extract_xi(&self, hs: &HarmonicState) -> Result<BifEquation> {
        let c = fourier_all(self.tensors, hs)?;
        let c1 = c_of(&c, 1);
        let lam1 = hs.eig.lambda_hat + 1.0;
        let wg = hs.eig.w.transpose() * self.g1();
        let xi = (1..=hs.q)
            .map(|k| {
                let proj = if 2 * k + 1 <= 2 * hs.q { hs.eig.w.dot(&hs.coeff(1, 2 * k + 1)) } else { Complex64::new(0.0, 0.0) };
                lam1 * proj + (&wg * c1.coeff(2 * k + 1))[0]
            })
            .collect();
        Ok(BifEquation {
            q: hs.q,
            xi,
            lambda_hat: hs.eig.lambda_hat,
            omega: hs.omega,
            params: hs.params.clone(),
        })
    }

    /// Harmonic-balance residual series for `j = 0..=2q`: `L_j a_j + G c_j`,
    /// projected by `I - Q` for `j = 1`. All coefficients through degree
    /// `2q` vanish for a solved state. Fails at a pole of `G`.
    pub fn residuals(&self, hs: &HarmonicState) -> Result<Vec<(i32, ThetaSeries)>> {
        let c = fourier_all(self.tensors, hs)?;
        let order = 2 * self.q;
        let mut out = Vec::new();
        for j in 0..=2 * self.q {
            let s = Complex64::new(0.0, j as f64 * self.omega);
            let (Some(l), Some(g)) = (&self.l[j], &self.g[j]) else {
                return Err(Error::SingularResolvent { s });
            };
            let a = hs.a(j as i32);
            let cj = c_of(&c, j as i32);
            let coeffs: Vec<CVector> = (0..=order)
                .map(|k| {
                    let r = l * a.coeff(k) + g * cj.coeff(k);
                    if j == 1 {
                        &r - hs.eig.project(&r)
                    } else {
                        r
                    }
                })
                .collect();
            out.push((j as i32, ThetaSeries::from_coeffs(coeffs)?));
        }
        Ok(out)
    }
}

/// Linearization, tensors and eigentriple at `(omega, params)`.
pub struct PointSetup {
    pub op: OperatingPoint,
    pub tensors: TaylorTensors,
    pub eig: EigTriple,
}

impl PointSetup {
    pub fn new(r: &Realization, params: &Params, omega: f64, q: usize) -> Result<Self> {
        let op = OperatingPoint::new(r, params)?;
        let tensors = r.tensors_at(&op.eq, 2 * q + 1)?;
        let eig = op.char_function(Complex64::new(0.0, omega), None)?;
        Ok(Self { op, tensors, eig })
    }
}

/// Solve the harmonic-balance system at `(omega, params)` to order `q`.
pub fn solve_harmonics(r: &Realization, params: &Params, omega: f64, q: usize) -> Result<HarmonicState> {
    let setup = PointSetup::new(r, params, omega, q)?;
    Balance::new(&setup.op, &setup.tensors, omega, q)?.solve_with(setup.eig.clone())
}

/// `xi_1..xi_q` at `(omega, params)`.
pub fn bif_equation(r: &Realization, params: &Params, omega: f64, q: usize) -> Result<BifEquation> {
    bif_equation_rephased(r, params, omega, q, 0.0)
}

/// [`bif_equation`] with the eigentriple rotated by `e^{i phi}` first.
pub fn bif_equation_rephased(r: &Realization, params: &Params, omega: f64, q: usize, phi: f64) -> Result<BifEquation> {
    let setup = PointSetup::new(r, params, omega, q)?;
    let bal = Balance::new(&setup.op, &setup.tensors, omega, q)?;
    let hs = bal.solve_with(setup.eig.rephased(phi))?;
    bal.extract_xi(&hs)
}

/// Samples of `y(t) = y_hat + sum_j a_j(theta) e^{i j omega t}` over one
/// period.
#[derive(Clone, Debug)]
pub struct OrbitSamples {
    pub t: Vec<f64>,
    pub y: Vec<DVector<f64>>,
    /// Largest imaginary part discarded when taking the real signal.
    pub max_imag: f64,
}

pub fn assemble_orbit(hs: &HarmonicState, theta: f64, samples: usize) -> OrbitSamples {
    let period = 2.0 * std::f64::consts::PI / hs.omega;
    let coeffs: Vec<(i32, CVector)> = hs.harmonics().into_iter().map(|(j, s)| (j, s.eval(theta))).collect();
    let mut t = Vec::with_capacity(samples);
    let mut y = Vec::with_capacity(samples);
    let mut max_imag: f64 = 0.0;
    for i in 0..samples {
        let ti = period * i as f64 / samples as f64;
        let mut acc = hs.y_hat.map(|v| Complex64::new(v, 0.0));
        for (j, a) in &coeffs {
            acc += a * Complex64::from_polar(1.0, *j as f64 * hs.omega * ti);
        }
        max_imag = acc.iter().fold(max_imag, |m, z| m.max(z.im.abs()));
        t.push(ti);
        y.push(acc.map(|z| z.re));
    }
    OrbitSamples { t, y, max_imag }
}

/// `y(t)` of the ansatz at a single time.
pub fn orbit_at(hs: &HarmonicState, theta: f64, t: f64) -> DVector<f64> {
    let mut acc = hs.y_hat.map(|v| Complex64::new(v, 0.0));
    for (j, s) in hs.harmonics() {
        acc += s.eval(theta) * Complex64::from_polar(1.0, j as f64 * hs.omega * t);
    }
    acc.map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{leukemia_model, pyragas, pyragas_model};
    use crate::hopf::{find_critical, Fixed};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_state(q: usize, omega: f64, tau: f64) -> HarmonicState {
        let eig = EigTriple {
            lambda_hat: c(-1.0, 0.0),
            v: CVector::from_element(1, c(1.0, 0.0)),
            w: CVector::from_element(1, c(1.0, 0.0)),
        };
        let params = Params::new(0.0, tau, Default::default());
        HarmonicState::seeded(q, omega, params, DVector::zeros(1), eig)
    }

    fn square_tensor(slot: usize, q: usize) -> TaylorTensors {
        let mut t = TaylorTensors::new(1, 1, 2 * q + 1);
        t.insert(&[slot, slot], DVector::from_element(1, 1.0)).unwrap();
        t
    }

    #[test]
    fn undelayed_square() {
        let hs = scalar_state(1, 1.3, 0.7);
        let t = square_tensor(0, 1);
        let c0 = fourier_c(&t, &hs, 0).unwrap();
        let c2 = fourier_c(&t, &hs, 2).unwrap();
        assert_eq!(c0.coeff(2)[0], c(2.0, 0.0));
        assert_eq!(c2.coeff(2)[0], c(1.0, 0.0));
        assert!(fourier_c(&t, &hs, 1).unwrap().is_zero());
    }

    #[test]
    fn delayed_square_phase() {
        let (omega, tau) = (1.3, 0.7);
        let hs = scalar_state(1, omega, tau);
        let c2 = fourier_c(&square_tensor(1, 1), &hs, 2).unwrap();
        let expect = Complex64::from_polar(1.0, -2.0 * omega * tau);
        assert!((c2.coeff(2)[0] - expect).norm() < 1e-15);
    }

    #[test]
    fn zero_state_gives_zero_coefficients() {
        let mut hs = scalar_state(2, 1.0, 1.0);
        hs.a[1] = ThetaSeries::zero(4, 1);
        for j in -4..=4 {
            assert!(fourier_c(&square_tensor(0, 2), &hs, j).unwrap().is_zero());
        }
    }

    fn pyragas_params(kappa: f64, tau: f64, mu: f64) -> Params {
        let r = pyragas_model();
        let mut p = r.default_params().with_mu(mu).with_tau(tau);
        p.aux.insert("kappa".into(), kappa);
        p
    }

    #[test]
    fn pyragas_first_harmonic_only() {
        let r = pyragas_model();
        let p = pyragas_params(-0.1, 1.5, 0.02);
        let omega = 1.05;
        let q = 3;
        let setup = PointSetup::new(&r, &p, omega, q).unwrap();
        let bal = Balance::new(&setup.op, &setup.tensors, omega, q).unwrap();
        let hs = bal.solve_with(setup.eig.clone()).unwrap();
        for j in 0..=6 {
            let a = hs.a(j);
            let degrees: Vec<usize> = (0..=6).filter(|&k| !(j == 1 && k == 1)).collect();
            assert!(a.max_abs(degrees) < 1e-12, "a_{j} should vanish: {:?}", a.coeffs());
        }
        let c1 = fourier_c(&setup.tensors, &hs, 1).unwrap();
        let expect = &setup.eig.v * (c(-2.0, 0.0) * c(1.0, -10.0));
        assert!((c1.coeff(3) - expect).norm() < 1e-13);
        let be = bal.extract_xi(&hs).unwrap();
        let xi1 = pyragas::xi1(omega, &p).unwrap();
        assert!((be.xi[0] - xi1).norm() < 1e-12 * xi1.norm());
        assert!(be.xi[1].norm() < 1e-12 && be.xi[2].norm() < 1e-12);
    }

    #[test]
    fn pyragas_xi1_at_kappa_zero() {
        let r = pyragas_model();
        let be = bif_equation(&r, &pyragas_params(0.0, 1.0, 0.0), 1.0, 1).unwrap();
        assert!((be.xi[0] - c(20.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn leukemia_bautin_xi() {
        let r = leukemia_model();
        let cp = find_critical(&r, &r.default_params(), Fixed::Tau(4.9740704569), (0.26, 0.11)).unwrap();
        let be = bif_equation(&r, &cp.params, cp.omega0, 2).unwrap();
        assert!((be.xi[0] - c(-0.0159486, 0.0131978)).norm() < 2e-7, "{:?}", be.xi);
        assert!((be.xi[1] - c(0.0061493, -0.000408)).norm() < 2e-6, "{:?}", be.xi);
    }

    #[test]
    fn orbit_is_real_and_matches_pyragas_form() {
        let r = pyragas_model();
        let p = pyragas_params(0.0, 1.0, 0.0);
        let hs = solve_harmonics(&r, &p, 1.0, 2).unwrap();
        let theta = 0.1;
        let orbit = assemble_orbit(&hs, theta, 64);
        assert!(orbit.max_imag < 1e-15);
        for (t, y) in orbit.t.iter().zip(&orbit.y) {
            let s = 2.0_f64.sqrt() * theta;
            assert!((y[0] - s * t.cos()).abs() < 1e-14 && (y[1] - s * t.sin()).abs() < 1e-14);
        }
        let flat = assemble_orbit(&hs, 0.0, 8);
        assert!(flat.y.iter().all(|y| y.amax() == 0.0));
    }
}
