use std::ops::{Add, Div, Mul, Neg, Sub};

/// Univariate truncated Taylor series with real coefficients, used to
/// obtain exact higher derivatives of analytic nonlinearities.
///
/// `c[k]` is the `k`-th Taylor coefficient, i.e. `f^(k)(x0) / k!`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Self { c }
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut j = Self::constant(x0, order);
        if order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.c.len(), other.c.len(), "jet orders differ");
        Self {
            c: self.c.iter().zip(&other.c).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0, self.order()) / self.clone()
    }

    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut e = vec![0.0; n];
        e[0] = self.c[0].exp();
        // e' = a' e  =>  k e_k = sum_{j=1..k} j a_j e_{k-j}
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Self { c: e }
    }

    pub fn ln(&self) -> Self {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut l = vec![0.0; n];
        l[0] = a0.ln();
        // a l' = a'  =>  k a0 l_k = k a_k - sum_{j=1..k-1} j l_j a_{k-j}
        for k in 1..n {
            let mut s = k as f64 * self.c[k];
            for j in 1..k {
                s -= j as f64 * l[j] * self.c[k - j];
            }
            l[k] = s / (k as f64 * a0);
        }
        Self { c: l }
    }

    /// `self^p` for a positive base value.
    pub fn powf(&self, p: f64) -> Self {
        if p == 0.0 {
            return Jet::constant(1.0, self.order());
        }
        if p.fract() == 0.0 && p > 0.0 && p <= 16.0 {
            let mut out = Jet::constant(1.0, self.order());
            for _ in 0..(p as usize) {
                out = &out * self;
            }
            return out;
        }
        (self.ln().scale(p)).exp()
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a - b)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        assert_eq!(self.c.len(), o.c.len(), "jet orders differ");
        let n = self.c.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..(n - i) {
                out[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c: out }
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, o: &Jet) -> Jet {
        assert_eq!(self.c.len(), o.c.len(), "jet orders differ");
        let n = self.c.len();
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut s = self.c[k];
            for j in 0..k {
                s -= q[j] * o.c[k - j];
            }
            q[k] = s / o.c[0];
        }
        Jet { c: q }
    }
}

macro_rules! by_value {
    ($tr:ident, $f:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet {
                (&self).$f(&o)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);
by_value!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_function_coefficients() {
        // 1/(1-x) = sum x^k
        let x = Jet::variable(0.0, 6);
        let f = Jet::constant(1.0, 6) / (Jet::constant(1.0, 6) - x);
        for c in f.coeffs() {
            assert!((c - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exp_ln_roundtrip() {
        let x = Jet::variable(0.7, 5);
        let y = x.ln().exp();
        for (a, b) in y.coeffs().iter().zip(x.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn fractional_power() {
        // sqrt(x) at 4: 2, 1/4, -1/64
        let s = Jet::variable(4.0, 2).powf(0.5);
        assert!((s.coeffs()[0] - 2.0).abs() < 1e-14);
        assert!((s.coeffs()[1] - 0.25).abs() < 1e-14);
        assert!((s.coeffs()[2] + 1.0 / 64.0).abs() < 1e-14);
    }
}
