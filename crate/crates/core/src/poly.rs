//! Dense polynomials over the crate's coefficient types.
//!
//! The coefficient trait deliberately has no free-standing `zero()`: scalars
//! carry their field configuration, so neutral elements are derived from an
//! existing coefficient (`zero_like`).  The zero polynomial is the empty
//! coefficient list.

use crate::padic::scalar::{FieldConfig, PadicScalar};

/// Ring operations needed for polynomial arithmetic.
pub trait Coeff: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    /// Exact-zero test used for trimming; indeterminate values are not zero.
    fn is_zero_c(&self) -> bool;
    fn add_c(&self, o: &Self) -> Self;
    fn sub_c(&self, o: &Self) -> Self;
    fn mul_c(&self, o: &Self) -> Self;
    fn neg_c(&self) -> Self;
}

impl Coeff for PadicScalar {
    fn zero_like(&self) -> Self {
        PadicScalar::zero(self.config())
    }
    fn one_like(&self) -> Self {
        PadicScalar::one(self.config())
    }
    fn is_zero_c(&self) -> bool {
        self.is_exact_zero()
    }
    fn add_c(&self, o: &Self) -> Self {
        self.add_raw(o)
    }
    fn sub_c(&self, o: &Self) -> Self {
        self.sub_raw(o)
    }
    fn mul_c(&self, o: &Self) -> Self {
        self.mul_raw(o)
    }
    fn neg_c(&self) -> Self {
        self.neg_raw()
    }
}

/// Dense polynomial, lowest-degree coefficient first.
#[derive(Clone, Debug)]
pub struct Poly<C: Coeff> {
    coeffs: Vec<C>,
}

impl<C: Coeff> Poly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero_c()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    pub fn monomial(c: C, deg: usize) -> Self {
        let mut coeffs = vec![c.zero_like(); deg + 1];
        coeffs[deg] = c;
        Self::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree by stored length; indeterminate leading coefficients count.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<&C> {
        self.coeffs.get(i)
    }

    pub fn coeff_or_zero(&self, i: usize, model: &C) -> C {
        self.coeffs.get(i).cloned().unwrap_or_else(|| model.zero_like())
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let model = &self.coeffs[0];
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (self.coeffs.get(i), o.coeffs.get(i)) {
                (Some(a), Some(b)) => a.add_c(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => model.zero_like(),
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.neg_c()).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let model = self.coeffs[0].zero_like();
        let mut coeffs = vec![model; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add_c(&a.mul_c(b));
            }
        }
        Self::new(coeffs)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.mul_c(c)).collect())
    }

    pub fn pow(&self, e: usize) -> Self
    where
        C: Clone,
    {
        if e == 0 {
            let one = self
                .coeffs
                .first()
                .map(|c| c.one_like())
                .expect("pow(0) needs a model coefficient");
            return Self::constant(one);
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &C) -> C {
        let mut acc = x.zero_like();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_c(x).add_c(c);
        }
        acc
    }

    /// `self(a + c * u)` as a polynomial in `u`.
    pub fn compose_affine(&self, a: &C, c: &C) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut acc: Vec<C> = vec![a.zero_like()];
        for coeff in self.coeffs.iter().rev() {
            let mut next = vec![a.zero_like(); acc.len() + 1];
            for (i, t) in acc.iter().enumerate() {
                next[i] = next[i].add_c(&t.mul_c(a));
                next[i + 1] = next[i + 1].add_c(&t.mul_c(c));
            }
            next[0] = next[0].add_c(coeff);
            acc = next;
        }
        Self::new(acc)
    }

    /// Substitute another polynomial for the variable.
    pub fn compose(&self, inner: &Self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Self::constant(c.clone()));
        }
        acc
    }

    /// Coefficients of the reversed polynomial `z^n self(1/z)`.
    pub fn reversed(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self::new(coeffs)
    }

    /// Division by a monic divisor; exact over any coefficient ring.
    pub fn div_rem_monic(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("monic divisor is nonzero");
        if self.is_zero() || self.degree().unwrap() < dd {
            return (Self::zero(), self.clone());
        }
        let model = self.coeffs[0].zero_like();
        let mut rem = self.coeffs.clone();
        let n = rem.len();
        let mut quo = vec![model.zero_like(); n - dd];
        for k in (dd..n).rev() {
            let factor = rem[k].clone();
            if factor.is_zero_c() {
                continue;
            }
            quo[k - dd] = factor.clone();
            for (j, dc) in d.coeffs.iter().enumerate() {
                let idx = k - dd + j;
                rem[idx] = rem[idx].sub_c(&factor.mul_c(dc));
            }
        }
        rem.truncate(dd);
        (Self::new(quo), Self::new(rem))
    }
}

impl Poly<PadicScalar> {
    pub fn from_rationals(cfg: &FieldConfig, cs: &[(i64, i64)]) -> Self {
        Self::new(
            cs.iter()
                .map(|&(n, d)| PadicScalar::from_rational(cfg, n, d).expect("nonzero denominator"))
                .collect(),
        )
    }

    pub fn derivative(&self, cfg: &FieldConfig) -> Self {
        Self::new(crate::padic::hensel::diff(self.coeffs(), cfg))
    }
}

/// Bivariate helper: polynomials in `z` whose coefficients are polynomials
/// in the parameter.
pub type LambdaPoly = Poly<PadicScalar>;

impl Coeff for Poly<PadicScalar> {
    fn zero_like(&self) -> Self {
        Poly::zero()
    }
    fn one_like(&self) -> Self {
        let model = self.coeffs.first().expect("one_like needs a model");
        Poly::constant(model.one_like())
    }
    fn is_zero_c(&self) -> bool {
        self.is_zero()
    }
    fn add_c(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn sub_c(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn mul_c(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn neg_c(&self) -> Self {
        self.neg()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::scalar::rat;

    fn f3() -> FieldConfig {
        FieldConfig::base(3, 60).unwrap()
    }

    #[test]
    fn monic_division_round_trips() {
        let cfg = f3();
        let a = Poly::from_rationals(&cfg, &[(1, 1), (0, 1), (-1, 3), (1, 1)]);
        let d = Poly::from_rationals(&cfg, &[(2, 1), (1, 1)]); // z + 2
        let (q, r) = a.div_rem_monic(&d);
        let back = q.mul(&d).add(&r);
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!(x.sub_raw(y).maybe_zero());
        }
        assert!(r.degree().unwrap_or(0) < d.degree().unwrap());
    }

    #[test]
    fn compose_affine_matches_eval() {
        let cfg = f3();
        let p = Poly::from_rationals(&cfg, &[(5, 1), (-2, 1), (1, 9), (7, 1)]);
        let a = PadicScalar::from_rational(&cfg, 4, 3).unwrap();
        let c = PadicScalar::from_integer(&cfg, 6);
        let shifted = p.compose_affine(&a, &c);
        for u in [0i64, 1, 2, 5] {
            let uu = PadicScalar::from_integer(&cfg, u);
            let lhs = shifted.eval(&uu);
            let x = a.add_raw(&c.mul_raw(&uu));
            let rhs = p.eval(&x);
            assert!(lhs.sub_raw(&rhs).maybe_zero());
        }
    }

    #[test]
    fn derivative_valuations() {
        let cfg = f3();
        let p = Poly::from_rationals(&cfg, &[(1, 1), (0, 1), (1, 1)]); // 1 + z^2
        let d = p.derivative(&cfg); // 2z
        assert_eq!(d.degree(), Some(1));
        assert_eq!(d.coeff(1).unwrap().valuation().unwrap(), rat(0, 1));
    }
}
