use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Taylor coefficients of `g` at a point, over `2m` input slots
/// (`0..m` for the undelayed output, `m..2m` for the delayed one).
///
/// The entry for a sorted multi-index `alpha` is `d^alpha g / alpha!`, so
/// `g(y + u) = g(y) + sum_alpha T_alpha u^alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorTensors {
    m: usize,
    p: usize,
    order: usize,
    /// `blocks[n - 1]` holds the degree-`n` coefficients.
    blocks: Vec<BTreeMap<Vec<usize>, DVector<f64>>>,
}

impl TaylorTensors {
    pub fn new(m: usize, p: usize, order: usize) -> Self {
        Self {
            m,
            p,
            order,
            blocks: vec![BTreeMap::new(); order],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn slots(&self) -> usize {
        2 * self.m
    }

    /// Store a coefficient; the multi-index may be given in any order.
    pub fn insert(&mut self, index: &[usize], value: DVector<f64>) -> Result<()> {
        let n = index.len();
        if n == 0 || n > self.order {
            return Err(Error::Capability(format!(
                "tensor degree {n} outside 1..={}",
                self.order
            )));
        }
        if value.len() != self.p {
            return Err(Error::Dimension(format!(
                "tensor value has length {}, expected p = {}",
                value.len(),
                self.p
            )));
        }
        if let Some(&s) = index.iter().find(|&&s| s >= self.slots()) {
            return Err(Error::Dimension(format!(
                "slot {s} out of range for 2m = {}",
                self.slots()
            )));
        }
        let mut key = index.to_vec();
        key.sort_unstable();
        if value.iter().all(|v| *v == 0.0) {
            self.blocks[n - 1].remove(&key);
        } else {
            self.blocks[n - 1].insert(key, value);
        }
        Ok(())
    }

    /// Coefficient for a multi-index in any order; zero when absent.
    pub fn get(&self, index: &[usize]) -> DVector<f64> {
        let n = index.len();
        if n == 0 || n > self.order {
            return DVector::zeros(self.p);
        }
        let mut key = index.to_vec();
        key.sort_unstable();
        self.blocks[n - 1]
            .get(&key)
            .cloned()
            .unwrap_or_else(|| DVector::zeros(self.p))
    }

    /// Nonzero coefficients of degree `n`, keyed by sorted multi-index.
    pub fn block(&self, n: usize) -> impl Iterator<Item = (&Vec<usize>, &DVector<f64>)> {
        let b = if n >= 1 && n <= self.order { Some(&self.blocks[n - 1]) } else { None };
        b.into_iter().flat_map(|m| m.iter())
    }

    pub fn truncated(&self, order: usize) -> Self {
        let mut t = self.clone();
        t.blocks.truncate(order);
        t.blocks.resize(order, BTreeMap::new());
        t.order = order;
        t
    }

    /// Jacobian of `g` with respect to the undelayed output.
    pub fn d1(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.p, self.m, |r, c| self.get(&[c])[r])
    }

    /// Jacobian of `g` with respect to the delayed output.
    pub fn d2(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.p, self.m, |r, c| self.get(&[self.m + c])[r])
    }

    /// Largest entrywise difference to another tensor set over degrees
    /// `1..=order`.
    pub fn max_diff(&self, other: &Self, order: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 1..=order {
            for idx in sorted_multi_indices(self.slots(), n) {
                let d = (self.get(&idx) - other.get(&idx)).amax();
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// All non-decreasing index tuples of length `n` over `0..slots`.
pub fn sorted_multi_indices(slots: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(slots: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for s in start..slots {
            cur.push(s);
            rec(slots, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(slots, n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Exponent vector of a sorted multi-index.
pub fn exponents(index: &[usize], slots: usize) -> Vec<usize> {
    let mut e = vec![0; slots];
    for &s in index {
        e[s] += 1;
    }
    e
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Taylor coefficients of `f` at `(z1, z2)` by mixed central differences
/// with one Richardson extrapolation step.
///
/// `base_step` is the spacing of the coarse stencil; the fine stencil
/// uses half of it.
pub fn finite_difference_tensors<F>(
    f: F,
    z1: &[f64],
    z2: &[f64],
    p: usize,
    order: usize,
    base_step: f64,
) -> Result<TaylorTensors>
where
    F: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let m = z1.len();
    if z2.len() != m {
        return Err(Error::Dimension("z1 and z2 differ in length".into()));
    }
    let slots = 2 * m;
    let center: Vec<f64> = z1.iter().chain(z2).copied().collect();
    let mut out = TaylorTensors::new(m, p, order);
    let eval = |x: &[f64]| -> Result<DVector<f64>> {
        let v = f(&x[..m], &x[m..])?;
        if v.len() != p {
            return Err(Error::Dimension(format!("g returned {} values, expected {p}", v.len())));
        }
        Ok(DVector::from_vec(v))
    };

    // Central difference of multi-exponent `e` with spacing h:
    // prod_s sum_i (-1)^i C(e_s, i) f(x + (e_s/2 - i) h) / h^|e|.
    let stencil = |e: &[usize], h: f64| -> Result<DVector<f64>> {
        let active: Vec<usize> = (0..slots).filter(|&s| e[s] > 0).collect();
        let mut counters = vec![0usize; active.len()];
        let mut acc = DVector::zeros(p);
        loop {
            let mut x = center.clone();
            let mut w = 1.0;
            for (a, &s) in active.iter().enumerate() {
                let i = counters[a];
                w *= if i % 2 == 0 { 1.0 } else { -1.0 } * binomial(e[s], i);
                x[s] += (e[s] as f64 / 2.0 - i as f64) * h;
            }
            acc += eval(&x)? * w;
            let mut a = 0;
            loop {
                if a == active.len() {
                    let n: usize = e.iter().sum();
                    return Ok(acc / h.powi(n as i32));
                }
                counters[a] += 1;
                if counters[a] <= e[active[a]] {
                    break;
                }
                counters[a] = 0;
                a += 1;
            }
        }
    };

    for n in 1..=order {
        for idx in sorted_multi_indices(slots, n) {
            let e = exponents(&idx, slots);
            let coarse = stencil(&e, base_step)?;
            let fine = stencil(&e, base_step / 2.0)?;
            let d = (fine * 4.0 - coarse) / 3.0;
            let denom: f64 = e.iter().map(|&k| factorial(k)).product();
            let value = d / denom;
            if value.iter().any(|v| !v.is_finite()) {
                return Err(Error::Precision(format!(
                    "non-finite difference quotient for multi-index {idx:?}"
                )));
            }
            // Entries at round-off level are treated as structural zeros.
            let cleaned = value.map(|v| if v.abs() < 1e-9 { 0.0 } else { v });
            out.insert(&idx, cleaned)?;
        }
    }
    Ok(out)
}

/// Re-expand a polynomial given by Taylor coefficients about `from` into
/// coefficients about `to`, both points in the `2m`-dimensional slot space.
/// Returns the constant term and the shifted tensors.
pub fn recenter(t: &TaylorTensors, constant: &DVector<f64>, from: &[f64], to: &[f64]) -> (DVector<f64>, TaylorTensors) {
    let slots = t.slots();
    let d: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
    let mut new_const = constant.clone();
    let mut out = TaylorTensors::new(t.m(), t.p(), t.order());
    let mut acc: BTreeMap<Vec<usize>, DVector<f64>> = BTreeMap::new();
    for n in 1..=t.order() {
        for (idx, val) in t.block(n) {
            let e = exponents(idx, slots);
            // prod_s (u_s + d_s)^{e_s} = sum_{k <= e} prod_s C(e_s,k_s) d_s^{e_s-k_s} u_s^{k_s}
            let mut k = vec![0usize; slots];
            loop {
                let mut w = 1.0;
                for s in 0..slots {
                    w *= binomial(e[s], k[s]) * d[s].powi((e[s] - k[s]) as i32);
                }
                if w != 0.0 {
                    let key: Vec<usize> = (0..slots).flat_map(|s| std::iter::repeat_n(s, k[s])).collect();
                    if key.is_empty() {
                        new_const += val * w;
                    } else {
                        *acc.entry(key).or_insert_with(|| DVector::zeros(t.p())) += val * w;
                    }
                }
                let mut s = 0;
                loop {
                    if s == slots {
                        break;
                    }
                    k[s] += 1;
                    if k[s] <= e[s] {
                        break;
                    }
                    k[s] = 0;
                    s += 1;
                }
                if s == slots {
                    break;
                }
            }
        }
    }
    for (key, val) in acc {
        out.insert(&key, val).expect("recentred index within order");
    }
    (new_const, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_sorted_indices() {
        assert_eq!(sorted_multi_indices(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(sorted_multi_indices(4, 3).len(), 20);
    }

    #[test]
    fn permutation_lookup() {
        let mut t = TaylorTensors::new(1, 1, 3);
        t.insert(&[1, 0, 1], DVector::from_element(1, 2.5)).unwrap();
        assert_eq!(t.get(&[0, 1, 1])[0], 2.5);
        assert_eq!(t.get(&[1, 1, 0])[0], 2.5);
        assert_eq!(t.get(&[0, 0, 1])[0], 0.0);
    }

    #[test]
    fn delayed_square_monomial() {
        let t = finite_difference_tensors(|_z1, z2| Ok(vec![z2[0] * z2[0]]), &[0.0], &[0.0], 1, 3, 0.05).unwrap();
        assert!((t.get(&[1, 1])[0] - 1.0).abs() < 1e-10);
        assert_eq!(t.d1()[(0, 0)], 0.0);
        assert_eq!(t.d2()[(0, 0)], 0.0);
        assert_eq!(t.get(&[0, 0])[0], 0.0);
    }

    #[test]
    fn recenter_cubic() {
        // g(u) = u^3 about 0, re-expanded about 1: 1 + 3u + 3u^2 + u^3
        let mut t = TaylorTensors::new(1, 1, 3);
        t.insert(&[0, 0, 0], DVector::from_element(1, 1.0)).unwrap();
        let (c, s) = recenter(&t, &DVector::zeros(1), &[0.0, 0.0], &[1.0, 0.0]);
        assert_eq!(c[0], 1.0);
        assert_eq!(s.get(&[0])[0], 3.0);
        assert_eq!(s.get(&[0, 0])[0], 3.0);
        assert_eq!(s.get(&[0, 0, 0])[0], 1.0);
    }
}
