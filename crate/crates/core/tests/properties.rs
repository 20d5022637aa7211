use hopfbalance::numcore::{det, eig, CMatrix, CVector, ThetaSeries};
use hopfbalance::singclass::{
    b_variety, classify_eps, classify_mu_as, cycle_signature_amplitude, cycle_signature_frequency, DEFAULT_TOL,
};
use hopfbalance::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORDER: usize = 5;

fn series() -> impl Strategy<Value = ThetaSeries> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 2 * (ORDER + 1)).prop_map(|v| {
        let coeffs = v
            .chunks(2)
            .map(|c| CVector::from_vec(vec![Complex64::new(c[0].0, c[0].1), Complex64::new(c[1].0, c[1].1)]))
            .collect();
        ThetaSeries::from_coeffs(coeffs).unwrap()
    })
}

fn close(a: &ThetaSeries, b: &ThetaSeries) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).norm() < 1e-9)
}

fn signed_magnitude(rng: &mut ChaCha8Rng) -> f64 {
    let m = 10f64.powf(rng.random_range(-2.0..2.0));
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

proptest! {
    #[test]
    fn series_product_commutes(a in series(), b in series()) {
        prop_assert!(close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()));
    }

    #[test]
    fn series_product_associates(a in series(), b in series(), c in series()) {
        let l = a.mul(&b).unwrap().mul(&c).unwrap();
        let r = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&l, &r));
    }

    #[test]
    fn series_product_distributes(a in series(), b in series(), c in series()) {
        let l = a.mul(&b.try_add(&c).unwrap()).unwrap();
        let r = a.mul(&b).unwrap().try_add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&l, &r));
    }

    #[test]
    fn series_product_evaluates_to_pointwise_product(a in series(), b in series(), theta in -0.1..0.1f64) {
        // Truncation error is bounded by theta^(ORDER+1) times coefficient sums.
        let p = a.mul(&b).unwrap().eval(theta);
        let (x, y) = (a.eval(theta), b.eval(theta));
        for c in 0..2 {
            prop_assert!((p[c] - x[c] * y[c]).norm() < 100.0 * theta.abs().powi(ORDER as i32 + 1) + 1e-12);
        }
    }

    #[test]
    fn eigenvalues_reproduce_trace_and_determinant(v in prop::collection::vec(-2.0..2.0f64, 2 * 16)) {
        let m = CMatrix::from_fn(4, 4, |r, c| Complex64::new(v[2 * (4 * r + c)], v[2 * (4 * r + c) + 1]));
        let pairs = eig(&m).unwrap();
        let sum: Complex64 = pairs.iter().map(|p| p.value).sum();
        let prod: Complex64 = pairs.iter().map(|p| p.value).product();
        prop_assert!((sum - m.trace()).norm() < 1e-10 * (1.0 + m.norm()));
        prop_assert!((prod - det(&m)).norm() < 1e-9 * (1.0 + det(&m).norm()));
        for p in &pairs {
            prop_assert!((&m * &p.vector - &p.vector * p.value).norm() < 1e-10 * (1.0 + m.norm()));
        }
    }

    #[test]
    fn amplitude_labels_scale_invariant(mu in prop::collection::vec(-5.0..5.0f64, 1..=3), s in 0.01..100.0f64) {
        let lead = *mu.last().unwrap();
        prop_assume!(lead.abs() > 1e-3);
        let scaled: Vec<f64> = mu.iter().map(|m| m * s).collect();
        let a = classify_mu_as(&mu, DEFAULT_TOL).unwrap();
        let b = classify_mu_as(&scaled, DEFAULT_TOL).unwrap();
        prop_assert_eq!(a.label(), b.label());
    }

    #[test]
    fn p2_labels_scale_invariant(eps in -5.0..5.0f64, e0 in -5.0..5.0f64, s in 0.01..100.0f64) {
        prop_assume!(eps.abs() > 1e-3);
        let a = classify_eps(eps, &[e0], DEFAULT_TOL).unwrap();
        let b = classify_eps(eps * s, &[e0 * s], DEFAULT_TOL).unwrap();
        prop_assert_eq!(a.label(), b.label());
    }

    /// Rescaling u by c maps (eps0, eps1) to (c^3 eps0, c^2 eps1); eps is
    /// free.
    #[test]
    fn p3_labels_weighted_scale_invariant(eps in -5.0..5.0f64, e0 in -5.0..5.0f64, e1 in -5.0..5.0f64, c in 0.2..5.0f64, s in 0.01..100.0f64) {
        prop_assume!(eps.abs() > 1e-3);
        let a = classify_eps(eps, &[e0, e1], DEFAULT_TOL).unwrap();
        let b = classify_eps(eps * s, &[e0 * c.powi(3), e1 * c * c], DEFAULT_TOL).unwrap();
        prop_assert_eq!(a.label(), b.label());
    }
}

#[test]
fn amplitude_labels_match_root_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for q in 1..=3 {
        let mut checked = 0;
        while checked < 100 {
            let mu: Vec<f64> = (0..q).map(|_| signed_magnitude(&mut rng)).collect();
            // Skip draws within 1e-3 of a transition variety; the sampled
            // oracle cannot resolve them.
            if q == 3 {
                let d = mu[1] * mu[1] - 4.0 * mu[0] * mu[2];
                let h1 = mu[1] * mu[1] - 3.0 * mu[0] * mu[2];
                if d.abs() < 1e-3 * mu[1] * mu[1] || h1.abs() < 1e-3 * mu[1] * mu[1] {
                    continue;
                }
            }
            let rep = classify_mu_as(&mu, DEFAULT_TOL).unwrap();
            assert_eq!(rep.diagram_label.signature(), cycle_signature_amplitude(&mu), "{mu:?} -> {}", rep.label());
            checked += 1;
        }
    }
}

#[test]
fn frequency_labels_match_root_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [2, 3] {
        let mut checked = 0;
        while checked < 100 {
            let eps = signed_magnitude(&mut rng);
            let unfolding: Vec<f64> = (0..p - 1).map(|_| signed_magnitude(&mut rng)).collect();
            if p == 3 && b_variety(unfolding[0], unfolding[1]).abs() < 1e-3 * 27.0 * unfolding[0].powi(2) {
                continue;
            }
            let rep = classify_eps(eps, &unfolding, DEFAULT_TOL).unwrap();
            assert_eq!(
                rep.diagram_label.signature(),
                cycle_signature_frequency(eps, &unfolding),
                "eps={eps} unfolding={unfolding:?} -> {}",
                rep.label()
            );
            checked += 1;
        }
    }
}
