//! Classification of the bifurcation equation by its leading coefficients:
//! amplitude families `mu - mu0 = sum mu_k z^k` (q = 1, 2, 3) and frequency
//! families `eps z + (mu - mu0)^p + ...` (p = 2, 3), with their transition
//! varieties and persistent-diagram labels.
//!
//! Stability statements attached to labels assume the equilibrium is
//! stable below the critical parameter value.

mod labels;
mod scan;


use serde::Serialize;

pub use labels::{cycle_signature_amplitude, cycle_signature_frequency, Base, DiagramLabel};
pub use scan::{scan_varieties, ContourPoint, NodeValue, OrganizingCentre, ScanAxis, ScanConfig, VarietyScan};


use crate::bifexpand::{BifExpansion, FreqSlice};
use crate::{Error, Result};

/// Default relative tolerance for treating a coefficient as zero.
pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    AmplitudeQ1,
    AmplitudeQ2,
    AmplitudeQ3,
    FreqP2,
    FreqP3,
}

impl Family {
    pub fn amplitude(q: usize) -> Option<Self> {
        match q {
            1 => Some(Self::AmplitudeQ1),
            2 => Some(Self::AmplitudeQ2),
            3 => Some(Self::AmplitudeQ3),
            _ => None,
        }
    }

    pub fn order(self) -> usize {
        match self {
            Self::AmplitudeQ1 => 1,
            Self::AmplitudeQ2 | Self::FreqP2 => 2,
            Self::AmplitudeQ3 | Self::FreqP3 => 3,
        }
    }

    pub fn is_amplitude(self) -> bool {
        matches!(self, Self::AmplitudeQ1 | Self::AmplitudeQ2 | Self::AmplitudeQ3)
    }

    /// Unfolding coefficient count.
    pub fn arity(self) -> usize {
        match self {
            Self::AmplitudeQ1 => 0,
            Self::AmplitudeQ2 | Self::FreqP2 => 1,
            Self::AmplitudeQ3 | Self::FreqP3 => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Supercritical,
    Subcritical,
}

/// Signed value of a transition-variety function. `active` is false when
/// the variety's side condition (e.g. `mu2 mu3 <= 0`) fails, in which case
/// a zero of `value` is not a transition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarietyValue {
    pub name: &'static str,
    pub value: f64,
    pub active: bool,
    pub on: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalFormReport {
    pub family: Family,
    /// `mu_q` for amplitude families, `eps` for frequency families.
    pub leading_coeff: f64,
    /// `mu_1..mu_{q-1}`, or `[eps0]` / `[eps0, eps1]`.
    pub unfolding: Vec<f64>,
    pub varieties: Vec<VarietyValue>,
    pub diagram_label: DiagramLabel,
    pub criticality: Option<Criticality>,
    /// Shift from the expansion point to the organizing value of `mu`
    /// (nonzero only for frequency families).
    pub mu_shift: f64,
    /// Labels rely on the equilibrium being stable for `mu < mu0`.
    pub assumes_stable_below: bool,
}

impl NormalFormReport {
    pub fn label(&self) -> &'static str {
        self.diagram_label.as_str()
    }
}

fn scale_of(c: &[f64]) -> f64 {
    c.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Classify with `q` the first coefficient above `tol * max |mu_k|`.
/// Lower coefficients are then treated as zero, so the label is the
/// diagram at the organizing point itself.
pub fn classify_amplitude(be: &BifExpansion, tol: f64) -> Result<NormalFormReport> {
    classify_mu(&be.mu_k[1..], tol)
}

/// Classify the unfolding of the order-`q` singularity with `mu_1..mu_q`
/// taken as they are.
pub fn classify_amplitude_as(be: &BifExpansion, q: usize, tol: f64) -> Result<NormalFormReport> {
    if be.mu_k.len() <= q {
        return Err(Error::Validation(format!("expansion has order {}, need {q}", be.q)));
    }
    classify_mu_as(&be.mu_k[1..=q], tol)
}

/// Automatic order on raw coefficients `mu_1, mu_2, ...`.
pub fn classify_mu(mu: &[f64], tol: f64) -> Result<NormalFormReport> {
    let scale = scale_of(mu);
    if !scale.is_finite() || scale <= tol * tol {
        return Err(Error::IndeterminateOrder { tol });
    }
    let thr = tol * scale;
    let q = mu.iter().position(|m| m.abs() > thr).unwrap() + 1;
    if q > 3 {
        return Err(Error::CodimensionOverflow(format!("first nonvanishing coefficient is mu_{q}")));
    }
    let mut c = mu[..q].to_vec();
    c[..q - 1].iter_mut().for_each(|x| *x = 0.0);
    classify_mu_as(&c, tol)
}

/// Forced order `q = mu.len()`.
pub fn classify_mu_as(mu: &[f64], tol: f64) -> Result<NormalFormReport> {
    let q = mu.len();
    let family = Family::amplitude(q).ok_or_else(|| Error::CodimensionOverflow(format!("amplitude order {q}")))?;
    let scale = scale_of(mu);
    let lead = mu[q - 1];
    if !scale.is_finite() || lead.abs() <= tol * scale || lead == 0.0 {
        return Err(Error::IndeterminateOrder { tol });
    }
    let varieties = amplitude_varieties(mu, tol * scale);
    let diagram_label = labels::amplitude_label(mu);
    let first = mu.iter().copied().find(|m| *m != 0.0).unwrap();
    Ok(NormalFormReport {
        family,
        leading_coeff: lead,
        unfolding: mu[..q - 1].to_vec(),
        varieties,
        diagram_label,
        criticality: Some(if first > 0.0 { Criticality::Supercritical } else { Criticality::Subcritical }),
        mu_shift: 0.0,
        assumes_stable_below: true,
    })
}

/// `H0: mu1`, `H1: 3 mu1 mu3 - mu2^2`, `D: 4 mu1 mu3 - mu2^2`, the last two
/// active when `mu2 mu3 <= 0`.
pub fn amplitude_varieties(mu: &[f64], thr: f64) -> Vec<VarietyValue> {
    let mut out = Vec::new();
    if mu.len() >= 2 {
        out.push(VarietyValue { name: "H0", value: mu[0], active: true, on: mu[0].abs() <= thr });
    }
    if mu.len() == 3 {
        let (m1, m2, m3) = (mu[0], mu[1], mu[2]);
        let active = m2 * m3 <= 0.0;
        let thr2 = thr * scale_of(mu);
        for (name, k) in [("H1", 3.0), ("D", 4.0)] {
            let value = k * m1 * m3 - m2 * m2;
            out.push(VarietyValue { name, value, active, on: active && value.abs() <= thr2 });
        }
    }
    out
}

/// Unfolding `(eps, eps0, eps1)` and organizing shift of the relation
/// `z = Z0 + Z1 u + Z2 u^2 + Z3 u^3`, `u = mu - mu_c`, for order `p`.
pub fn frequency_unfolding(z: [f64; 4], p: usize) -> Result<(f64, Vec<f64>, f64)> {
    let [z0, z1, z2, z3] = z;
    match p {
        2 => {
            if z2 == 0.0 {
                return Err(Error::Degeneracy("second z-derivative vanishes".into()));
            }
            let shift = -z1 / (2.0 * z2);
            let zext = z0 - z1 * z1 / (4.0 * z2);
            Ok((-1.0 / z2, vec![zext / z2], shift))
        }
        3 => {
            if z3 == 0.0 {
                return Err(Error::Degeneracy("third z-derivative vanishes".into()));
            }
            let shift = -z2 / (3.0 * z3);
            let p1 = z1 / z3 - z2 * z2 / (3.0 * z3 * z3);
            let r = z0 / z3 - z1 * z2 / (3.0 * z3 * z3) + 2.0 * z2.powi(3) / (27.0 * z3.powi(3));
            Ok((-1.0 / z3, vec![r, p1], shift))
        }
        _ => Err(Error::CodimensionOverflow(format!("frequency order {p}"))),
    }
}

/// Classify `eps z + u^p + eps1 u + eps0 = 0` with unfolding `[eps0]` or
/// `[eps0, eps1]`.
pub fn classify_eps(eps: f64, unfolding: &[f64], tol: f64) -> Result<NormalFormReport> {
    let (family, varieties) = match unfolding.len() {
        1 => (
            Family::FreqP2,
            vec![VarietyValue { name: "B0", value: unfolding[0], active: true, on: unfolding[0].abs() <= tol * eps.abs() }],
        ),
        2 => {
            let b = b_variety(unfolding[0], unfolding[1]);
            let s = unfolding[0].abs().max(unfolding[1].abs().powf(1.5)).max(f64::MIN_POSITIVE);
            (Family::FreqP3, vec![VarietyValue { name: "B", value: b, active: true, on: b.abs() <= 27.0 * tol * s * s }])
        }
        _ => return Err(Error::CodimensionOverflow(format!("{} unfolding coefficients", unfolding.len()))),
    };
    if eps == 0.0 || !eps.is_finite() {
        return Err(Error::Degeneracy("eps vanishes".into()));
    }
    Ok(NormalFormReport {
        family,
        leading_coeff: eps,
        unfolding: unfolding.to_vec(),
        varieties,
        diagram_label: labels::frequency_label(eps, unfolding),
        criticality: None,
        mu_shift: 0.0,
        assumes_stable_below: true,
    })
}

/// `B: 4 eps1^3 + 27 eps0^2 = 0`; negative inside the three-root region.
pub fn b_variety(eps0: f64, eps1: f64) -> f64 {
    4.0 * eps1.powi(3) + 27.0 * eps0 * eps0
}

/// Taylor coefficients in `delta = omega - omega_c` from a slice.
fn taylor(c0: f64, d: &[f64; 3]) -> [f64; 4] {
    [c0, d[0], d[1] / 2.0, d[2] / 6.0]
}

/// Series reversion of `x = a1 t + a2 t^2 + a3 t^3` to third order.
fn revert(a: [f64; 4]) -> [f64; 4] {
    let (a1, a2, a3) = (a[1], a[2], a[3]);
    [0.0, 1.0 / a1, -a2 / a1.powi(3), (2.0 * a2 * a2 - a1 * a3) / a1.powi(5)]
}

/// `f(g(u))` to third order, `g(0) = 0`.
fn compose(f: [f64; 4], g: [f64; 4]) -> [f64; 4] {
    let (g1, g2, g3) = (g[1], g[2], g[3]);
    [
        f[0],
        f[1] * g1,
        f[1] * g2 + f[2] * g1 * g1,
        f[1] * g3 + 2.0 * f[2] * g1 * g2 + f[3] * g1.powi(3),
    ]
}

/// Order detection on a frequency slice. `dmu/domega != 0` with vanishing
/// `dz/domega` gives the p-families; otherwise `mu` is re-expanded in `z`
/// and classified as an amplitude family.
pub fn classify_frequency(fs: &FreqSlice, tol: f64) -> Result<NormalFormReport> {
    let (_, zc, mc) = fs.center;
    let m = taylor(mc, &fs.dmu);
    let z = taylor(zc, &fs.dz);
    let mthr = tol * scale_of(&m[1..]);
    let zthr = tol * scale_of(&z[1..]);
    let z_nonzero: Vec<bool> = z[1..].iter().map(|x| x.abs() > zthr && zthr > 0.0).collect();
    if z_nonzero[0] {
        if zc.abs() > 1e-10 {
            return Err(Error::Degeneracy(format!("slice centre has z = {zc:.3e}, not a Hopf point")));
        }
        let mz = compose(m, revert(z));
        return classify_mu(&mz[1..], tol);
    }
    if m[1].abs() <= mthr || mthr == 0.0 {
        return Err(Error::CodimensionOverflow("dmu/domega and dz/domega vanish together".into()));
    }
    let p = match z_nonzero.iter().position(|&b| b) {
        Some(i) => i + 1,
        None => return Err(Error::CodimensionOverflow("z-derivatives vanish through order 3".into())),
    };
    let mut zu = compose(z, revert([0.0, m[1], m[2], m[3]]));
    zu[0] = zc;
    for k in 1..p {
        zu[k] = 0.0;
    }
    frequency_report(zu, p, tol)
}

/// Forced p-family classification of a slice, keeping all lower-order
/// terms as unfolding.
pub fn classify_frequency_as(fs: &FreqSlice, family: Family, tol: f64) -> Result<NormalFormReport> {
    let p = match family {
        Family::FreqP2 => 2,
        Family::FreqP3 => 3,
        _ => return Err(Error::Validation("classify_frequency_as needs a frequency family".into())),
    };
    let (_, zc, mc) = fs.center;
    let m = taylor(mc, &fs.dmu);
    if m[1].abs() <= tol * scale_of(&m[1..]) {
        return Err(Error::Degeneracy("dmu/domega vanishes".into()));
    }
    let z = taylor(zc, &fs.dz);
    let zu = compose(z, revert([0.0, m[1], m[2], m[3]]));
    frequency_report(zu, p, tol)
}

fn frequency_report(zu: [f64; 4], p: usize, tol: f64) -> Result<NormalFormReport> {
    let (eps, unfolding, shift) = frequency_unfolding(zu, p)?;
    let mut rep = classify_eps(eps, &unfolding, tol)?;
    rep.mu_shift = shift;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q1_labels() {
        assert_eq!(classify_mu(&[-2.0], DEFAULT_TOL).unwrap().label(), "q1_subcritical");
        let r = classify_mu(&[0.5, 3.0], DEFAULT_TOL).unwrap();
        assert_eq!(r.family, Family::AmplitudeQ1);
        assert_eq!(r.criticality, Some(Criticality::Supercritical));
    }

    #[test]
    fn q2_bautin_auto_and_unfolded() {
        let r = classify_mu(&[1e-12, 0.0019537383], DEFAULT_TOL).unwrap();
        assert_eq!(r.family, Family::AmplitudeQ2);
        assert_eq!(r.unfolding, vec![0.0]);
        assert!(r.varieties[0].on);
        assert_eq!(classify_mu_as(&[1e-3, 0.002], DEFAULT_TOL).unwrap().label(), "q2_supercritical");
        assert_eq!(classify_mu_as(&[-1e-3, 0.002], DEFAULT_TOL).unwrap().label(), "q2_fold");
    }

    #[test]
    fn synthetic_q3_varieties() {
        let r = classify_mu_as(&[-0.01, 0.05, -1.0], DEFAULT_TOL).unwrap();
        let h1 = &r.varieties[1];
        let d = &r.varieties[2];
        assert!(h1.active && d.active);
        assert!((h1.value - (0.03 - 0.0025)).abs() < 1e-15);
        assert!((d.value - (0.04 - 0.0025)).abs() < 1e-15);
    }

    #[test]
    fn all_zero_is_indeterminate() {
        assert!(matches!(classify_mu(&[0.0, 0.0, 0.0], DEFAULT_TOL), Err(Error::IndeterminateOrder { .. })));
        assert!(matches!(classify_mu(&[0.0, 0.0, 0.0, 1.0], DEFAULT_TOL), Err(Error::CodimensionOverflow(_))));
    }

    #[test]
    fn p2_bubble_endpoints() {
        // z = -(u^2 - 0.1): cycles on |u| < sqrt(0.1)
        let (eps, unf, shift) = frequency_unfolding([0.1, 0.0, -1.0, 0.0], 2).unwrap();
        assert_eq!((eps, shift), (1.0, 0.0));
        assert!((unf[0] + 0.1).abs() < 1e-15);
        assert_eq!(classify_eps(eps, &unf, DEFAULT_TOL).unwrap().label(), "p2_bubble");
        assert_eq!(classify_eps(1.0, &[0.1], DEFAULT_TOL).unwrap().label(), "p2_empty");
    }

    #[test]
    fn p3_depression() {
        // z = -( (u+1)^3 - 3(u+1) + 1 ) expanded
        let z = [-(1.0 - 3.0 + 1.0), -(3.0 - 3.0), -3.0, -1.0];
        let (eps, unf, shift) = frequency_unfolding(z, 3).unwrap();
        assert!((eps - 1.0).abs() < 1e-15 && (shift + 1.0).abs() < 1e-15);
        assert!((unf[0] - 1.0).abs() < 1e-14 && (unf[1] + 3.0).abs() < 1e-14);
        assert_eq!(classify_eps(eps, &unf, DEFAULT_TOL).unwrap().label(), "p3_bubble_plus_branch");
    }

    #[test]
    fn series_reversion_roundtrip() {
        let a = [0.0, 0.7, -0.3, 0.11];
        let id = compose(a, revert(a));
        assert!((id[1] - 1.0).abs() < 1e-14 && id[2].abs() < 1e-14 && id[3].abs() < 1e-14);
    }
}
