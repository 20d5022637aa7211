use serde::{Serialize, Serializer};

/// Persistent-diagram shapes, in the orientation `mu_q > 0` (amplitude) or
/// `eps > 0` (frequency).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    Q1Supercritical,
    Q2Bautin,
    Q2Supercritical,
    Q2Fold,
    Q3Center,
    Q3Region(u8),
    P2Center,
    P2Bubble,
    P2Empty,
    P3Center,
    P3Plain,
    P3BubblePlusBranch,
}

/// A diagram shape plus orientation. Mirrored amplitude diagrams are
/// reflected in `mu`; mirrored frequency diagrams swap where cycles exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiagramLabel {
    pub base: Base,
    pub mirrored: bool,
}

impl DiagramLabel {
    pub fn as_str(&self) -> &'static str {
        use Base::*;
        match (self.base, self.mirrored) {
            (Q1Supercritical, false) => "q1_supercritical",
            (Q1Supercritical, true) => "q1_subcritical",
            (Q2Bautin, false) => "q2_bautin",
            (Q2Bautin, true) => "q2_bautin_mirrored",
            (Q2Supercritical, false) => "q2_supercritical",
            (Q2Supercritical, true) => "q2_subcritical",
            (Q2Fold, false) => "q2_fold",
            (Q2Fold, true) => "q2_fold_mirrored",
            (Q3Center, false) => "q3_center",
            (Q3Center, true) => "q3_center_mirrored",
            (Q3Region(1), false) => "q3_region_1",
            (Q3Region(2), false) => "q3_region_2",
            (Q3Region(3), false) => "q3_region_3",
            (Q3Region(_), false) => "q3_region_4",
            (Q3Region(1), true) => "q3_region_1_mirrored",
            (Q3Region(2), true) => "q3_region_2_mirrored",
            (Q3Region(3), true) => "q3_region_3_mirrored",
            (Q3Region(_), true) => "q3_region_4_mirrored",
            (P2Center, false) => "p2_center",
            (P2Center, true) => "p2_center_mirrored",
            (P2Bubble, false) => "p2_bubble",
            (P2Bubble, true) => "p2_gap",
            (P2Empty, false) => "p2_empty",
            (P2Empty, true) => "p2_full",
            (P3Center, false) => "p3_center",
            (P3Center, true) => "p3_center_mirrored",
            (P3Plain, false) => "p3_plain",
            (P3Plain, true) => "p3_plain_mirrored",
            (P3BubblePlusBranch, false) => "p3_bubble_plus_branch",
            (P3BubblePlusBranch, true) => "p3_bubble_plus_branch_mirrored",
        }
    }

    /// Number of small cycles on each open `mu`-interval, from `mu = -inf`
    /// to `+inf`, with consecutive repeats merged.
    pub fn signature(&self) -> Vec<usize> {
        use Base::*;
        let base: Vec<usize> = match self.base {
            Q1Supercritical | Q2Bautin | Q2Supercritical | Q3Center => vec![0, 1],
            Q2Fold => vec![0, 2, 1],
            Q3Region(1) => vec![0, 2, 1],
            Q3Region(2) => vec![0, 1],
            Q3Region(3) => vec![0, 1, 3, 1],
            Q3Region(_) => vec![0, 2, 3, 1],
            P2Center | P2Empty => vec![0],
            P2Bubble => vec![0, 1, 0],
            P3Center | P3Plain => vec![1, 0],
            P3BubblePlusBranch => vec![1, 0, 1, 0],
        };
        let frequency = matches!(self.base, P2Center | P2Bubble | P2Empty | P3Center | P3Plain | P3BubblePlusBranch);
        match (self.mirrored, frequency) {
            (false, _) => base,
            (true, false) => base.into_iter().rev().collect(),
            (true, true) => {
                let flipped: Vec<usize> = base.into_iter().map(|c| 1 - c).collect();
                if self.base == P2Center { vec![1] } else { flipped }
            }
        }
    }
}

impl Serialize for DiagramLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Decision rules on `mu_1..mu_q` (the last is the leading coefficient).
pub(super) fn amplitude_label(mu: &[f64]) -> DiagramLabel {
    let q = mu.len();
    let mirrored = mu[q - 1] < 0.0;
    // Normalize to a positive leading coefficient.
    let s = if mirrored { -1.0 } else { 1.0 };
    let base = match q {
        1 => Base::Q1Supercritical,
        2 => {
            let m1 = s * mu[0];
            if m1 > 0.0 {
                Base::Q2Supercritical
            } else if m1 < 0.0 {
                Base::Q2Fold
            } else {
                Base::Q2Bautin
            }
        }
        _ => {
            let (m1, m2, m3) = (s * mu[0], s * mu[1], s * mu[2]);
            if m1 == 0.0 && m2 == 0.0 {
                Base::Q3Center
            } else if m1 < 0.0 {
                Base::Q3Region(1)
            } else if m2 >= 0.0 || m2 * m2 <= 3.0 * m1 * m3 {
                Base::Q3Region(2)
            } else if m2 * m2 <= 4.0 * m1 * m3 {
                Base::Q3Region(3)
            } else {
                Base::Q3Region(4)
            }
        }
    };
    DiagramLabel { base, mirrored }
}

/// Decision rules on `eps` and `[eps0]` / `[eps0, eps1]`.
pub(super) fn frequency_label(eps: f64, unfolding: &[f64]) -> DiagramLabel {
    let mirrored = eps < 0.0;
    let base = match unfolding {
        [e0] if *e0 == 0.0 => Base::P2Center,
        [e0] if *e0 < 0.0 => Base::P2Bubble,
        [_] => Base::P2Empty,
        [e0, e1] if *e0 == 0.0 && *e1 == 0.0 => Base::P3Center,
        [e0, e1] if super::b_variety(*e0, *e1) < 0.0 => Base::P3BubblePlusBranch,
        _ => Base::P3Plain,
    };
    DiagramLabel { base, mirrored }
}

fn merge(counts: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for c in counts {
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    out
}

/// Brute-force signature of `sum mu_k z^k = c`: positive real roots `z`
/// counted by sign changes between critical points, on a logarithmic grid of
/// `c` on both sides of zero.
pub fn cycle_signature_amplitude(mu: &[f64]) -> Vec<usize> {
    let grid = symmetric_log_grid();
    merge(grid.into_iter().map(|c| positive_roots(mu, c)))
}

/// Brute-force signature of `eps z + u^p + eps1 u + eps0 = 0` over a grid
/// of `u`: one cycle where the solved `z` is positive.
pub fn cycle_signature_frequency(eps: f64, unfolding: &[f64]) -> Vec<usize> {
    let p = unfolding.len() + 1;
    let grid = symmetric_log_grid();
    merge(grid.into_iter().map(|u| {
        let mut f = u.powi(p as i32) + unfolding[0];
        if p == 3 {
            f += unfolding[1] * u;
        }
        usize::from(-f / eps > 0.0)
    }))
}

fn symmetric_log_grid() -> Vec<f64> {
    let per_side = 6000;
    let (lo, hi) = (-12.0f64, 12.0f64);
    let side: Vec<f64> = (0..per_side).map(|i| 10f64.powf(lo + (hi - lo) * (i as f64 + 0.5) / per_side as f64)).collect();
    side.iter().rev().map(|x| -x).chain(side.iter().copied()).collect()
}

/// Positive roots of `mu_q z^q + ... + mu_1 z - c` for `q <= 3`. The
/// polynomial is monotone between consecutive critical points, so each
/// sign change across `0`, the positive critical points and `+inf` is
/// exactly one root.
fn positive_roots(mu: &[f64], c: f64) -> usize {
    let p = |z: f64| mu.iter().rev().fold(0.0, |acc, m| (acc + m) * z) - c;
    let mut crit: Vec<f64> = match *mu {
        [_] => vec![],
        [m1, m2] => vec![-m1 / (2.0 * m2)],
        [m1, m2, m3] => quadratic_roots(3.0 * m3, 2.0 * m2, m1),
        _ => unreachable!("amplitude families have q <= 3"),
    };
    crit.retain(|z| *z > 0.0 && z.is_finite());
    crit.sort_by(f64::total_cmp);
    let mut signs: Vec<f64> = std::iter::once(-c).chain(crit.iter().map(|&z| p(z))).collect();
    signs.push(mu[mu.len() - 1]);
    signs.retain(|v| *v != 0.0);
    signs.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let t = -0.5 * (b + b.signum() * disc.sqrt());
    if t == 0.0 {
        return vec![0.0];
    }
    vec![t / a, c / t]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_on_known_shapes() {
        assert_eq!(cycle_signature_amplitude(&[-2.0]), vec![1, 0]);
        assert_eq!(cycle_signature_amplitude(&[-1.0, 1.0]), vec![0, 2, 1]);
        // mu3 > 0, mu1 > 0, mu2 < 0 between H1 and D: 3*1*1 < 1.85^2 < 4
        assert_eq!(cycle_signature_amplitude(&[1.0, -1.85, 1.0]), vec![0, 1, 3, 1]);
        assert_eq!(cycle_signature_frequency(1.0, &[-0.1]), vec![0, 1, 0]);
    }

    #[test]
    fn label_signatures_match_oracle_on_examples() {
        for mu in [vec![0.3], vec![-0.3], vec![1.0, 2.0], vec![-1.0, 2.0], vec![-1.0, -2.0], vec![1.0, -2.0]] {
            assert_eq!(amplitude_label(&mu).signature(), cycle_signature_amplitude(&mu), "{mu:?}");
        }
        for mu in [[1.0, -1.85, 1.0], [1.0, -2.5, 1.0], [-1.0, 0.5, 1.0], [1.0, 0.5, 1.0], [-1.0, 1.85, -1.0]] {
            assert_eq!(amplitude_label(&mu).signature(), cycle_signature_amplitude(&mu), "{mu:?}");
        }
    }
}
