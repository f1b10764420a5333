//! The finite residue field of the working field and polynomials over it.
//!
//! The residue field has order `p` (base field or ramified extension) or
//! `p^2` (unramified extension, presented as `F_p(s)` with `s^2 = d~`).
//! Polynomial utilities here back reduction of rational maps, residue root
//! enumeration for Hensel seeding, and squarefree decomposition for the
//! square tests over residue function fields.

use std::fmt;

/// Descriptor of the residue field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueField {
    p: u64,
    /// For order p^2: the nonresidue `d~` with `s^2 = d~`.
    ext: Option<u64>,
}

impl ResidueField {
    pub fn prime(p: u64) -> Self {
        ResidueField { p, ext: None }
    }

    pub fn quadratic(p: u64, d: u64) -> Self {
        ResidueField { p, ext: Some(d % p) }
    }

    pub fn order(&self) -> u64 {
        match self.ext {
            Some(_) => self.p * self.p,
            None => self.p,
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn zero(&self) -> ResidueElem {
        self.make(0, 0)
    }

    pub fn one(&self) -> ResidueElem {
        self.make(1, 0)
    }

    pub fn make(&self, u: u64, v: u64) -> ResidueElem {
        debug_assert!(self.ext.is_some() || v % self.p == 0);
        ResidueElem { field: *self, u: u % self.p, v: v % self.p }
    }

    pub fn from_int(&self, n: i64) -> ResidueElem {
        self.make(n.rem_euclid(self.p as i64) as u64, 0)
    }

    /// All elements, in a fixed enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = ResidueElem> + '_ {
        let p = self.p;
        let vmax = if self.ext.is_some() { p } else { 1 };
        (0..vmax).flat_map(move |v| (0..p).map(move |u| self.make(u, v)))
    }
}

/// Element `u + v s` of the residue field.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct ResidueElem {
    field: ResidueField,
    u: u64,
    v: u64,
}

impl ResidueElem {
    pub fn field(&self) -> &ResidueField {
        &self.field
    }

    pub fn coords(&self) -> (u64, u64) {
        (self.u, self.v)
    }

    pub fn is_zero(&self) -> bool {
        self.u == 0 && self.v == 0
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.field, o.field);
        self.field.make(self.u + o.u, self.v + o.v)
    }

    pub fn neg(&self) -> Self {
        let p = self.field.p;
        self.field.make(p - self.u % p, p - self.v % p)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.field, o.field);
        let p = self.field.p as u128;
        let (a, b) = (self.u as u128, self.v as u128);
        let (c, d) = (o.u as u128, o.v as u128);
        match self.field.ext {
            None => self.field.make((a * c % p) as u64, 0),
            Some(dd) => {
                let dd = dd as u128;
                let u = (a * c + b * d % p * dd) % p;
                let v = (a * d + b * c) % p;
                self.field.make(u as u64, v as u64)
            }
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = self.field.one();
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(self.pow(self.field.order() - 2))
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        Some(self.mul(&o.inv()?))
    }

    /// Euler criterion over F_q, q odd.
    pub fn is_square(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        self.pow((self.field.order() - 1) / 2) == self.field.one()
    }

    /// Tonelli–Shanks square root, `None` for nonresidues.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(*self);
        }
        if !self.is_square() {
            return None;
        }
        let q = self.field.order();
        // q - 1 = 2^s * t
        let mut t = q - 1;
        let mut s = 0u32;
        while t % 2 == 0 {
            t /= 2;
            s += 1;
        }
        // find a nonresidue
        let z = self
            .field
            .elements()
            .find(|e| !e.is_zero() && !e.is_square())
            .expect("nonresidue exists in odd-order field");
        let mut m = s;
        let mut c = z.pow(t);
        let mut u = self.pow(t);
        let mut r = self.pow((t + 1) / 2);
        while u != self.field.one() {
            let mut i = 0u32;
            let mut probe = u;
            while probe != self.field.one() {
                probe = probe.mul(&probe);
                i += 1;
                if i == m {
                    return None;
                }
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = b.mul(&b);
            }
            m = i;
            c = b.mul(&b);
            u = u.mul(&c);
            r = r.mul(&b);
        }
        Some(r)
    }

    /// The canonical square root: the one with the lexicographically smaller
    /// coordinate representative.
    pub fn canonical_sqrt(&self) -> Option<Self> {
        let r = self.sqrt()?;
        let r2 = r.neg();
        Some(if (r.u, r.v) <= (r2.u, r2.v) { r } else { r2 })
    }
}

impl fmt::Debug for ResidueElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v == 0 {
            write!(f, "{}", self.u)
        } else {
            write!(f, "{}+{}s", self.u, self.v)
        }
    }
}

impl fmt::Display for ResidueElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Dense polynomial over the residue field.
#[derive(Clone, PartialEq, Eq)]
pub struct ResiduePoly {
    field: ResidueField,
    /// Coefficients, lowest degree first, trailing zeros trimmed.
    coeffs: Vec<ResidueElem>,
}

impl ResiduePoly {
    pub fn new(field: ResidueField, mut coeffs: Vec<ResidueElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ResiduePoly { field, coeffs }
    }

    pub fn zero(field: ResidueField) -> Self {
        ResiduePoly { field, coeffs: vec![] }
    }

    pub fn constant(c: ResidueElem) -> Self {
        Self::new(c.field, vec![c])
    }

    pub fn monomial(field: ResidueField, c: ResidueElem, deg: usize) -> Self {
        let mut coeffs = vec![field.zero(); deg + 1];
        coeffs[deg] = c;
        Self::new(field, coeffs)
    }

    pub fn field(&self) -> ResidueField {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> ResidueElem {
        self.coeffs.get(i).copied().unwrap_or_else(|| self.field.zero())
    }

    pub fn coeffs(&self) -> &[ResidueElem] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<ResidueElem> {
        self.coeffs.last().copied()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect();
        Self::new(self.field, coeffs)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect();
        Self::new(self.field, coeffs)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.field);
        }
        let mut coeffs = vec![self.field.zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Self::new(self.field, coeffs)
    }

    pub fn scale(&self, c: &ResidueElem) -> Self {
        Self::new(self.field, self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn pow_usize(&self, e: usize) -> Self {
        let mut acc = Self::constant(self.field.one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &ResidueElem) -> ResidueElem {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero(self.field);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul(&self.field.from_int(i as i64)))
            .collect();
        Self::new(self.field, coeffs)
    }

    pub fn monic(&self) -> Option<Self> {
        let lc = self.leading()?;
        Some(self.scale(&lc.inv()?))
    }

    pub fn div_rem(&self, d: &Self) -> Option<(Self, Self)> {
        let dd = d.degree()?;
        let lc_inv = d.leading()?.inv()?;
        let mut rem = self.clone();
        let mut quo = vec![self.field.zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let factor = rem.coeff(rd).mul(&lc_inv);
            quo[rd - dd] = factor;
            let shifted = Self::monomial(self.field, factor, rd - dd).mul(d);
            rem = rem.sub(&shifted);
        }
        Some((Self::new(self.field, quo), rem))
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic().unwrap_or(a)
    }

    /// All roots in the residue field, found by enumeration, with multiplicity.
    pub fn roots(&self) -> Vec<(ResidueElem, usize)> {
        let mut out = vec![];
        if self.is_zero() {
            return out;
        }
        let mut f = self.clone();
        for x in self.field.elements() {
            if !f.eval(&x).is_zero() {
                continue;
            }
            let mut mult = 0;
            let linear = Self::new(self.field, vec![x.neg(), self.field.one()]);
            loop {
                let (q, r) = f.div_rem(&linear).expect("linear divisor");
                if r.is_zero() {
                    f = q;
                    mult += 1;
                } else {
                    break;
                }
            }
            if mult > 0 {
                out.push((x, mult));
            }
        }
        out
    }

    /// Extract `g` with `self = g(x^p)`; requires all exponents divisible by p.
    fn pth_root(&self) -> Self {
        let p = self.field.p as usize;
        let q = self.field.order();
        let mut coeffs = vec![];
        for (i, c) in self.coeffs.iter().enumerate() {
            if i % p == 0 {
                // Frobenius inverse: x -> x^(q/p)
                coeffs.push(c.pow(q / self.field.p));
            } else {
                debug_assert!(c.is_zero());
            }
        }
        Self::new(self.field, coeffs)
    }

    /// Squarefree decomposition `self = c * prod f_i^(e_i)` with the `f_i`
    /// pairwise coprime, squarefree and monic.  Valid in characteristic p.
    pub fn squarefree_decomposition(&self) -> Vec<(Self, usize)> {
        let mut out: Vec<(Self, usize)> = vec![];
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic().expect("nonzero");
        let fp = f.derivative();
        if fp.is_zero() {
            for (g, e) in f.pth_root().squarefree_decomposition() {
                out.push((g, e * self.field.p as usize));
            }
            return out;
        }
        let mut c = f.gcd(&fp);
        let mut w = f.div_rem(&c).expect("gcd divides").0;
        let mut i = 1usize;
        while w.degree().unwrap_or(0) > 0 {
            let y = w.gcd(&c);
            let z = w.div_rem(&y).expect("gcd divides").0;
            if z.degree().unwrap_or(0) > 0 {
                out.push((z, i));
            }
            w = y;
            c = c.div_rem(&w).expect("gcd divides").0;
            i += 1;
        }
        if c.degree().unwrap_or(0) > 0 {
            for (g, e) in c.pth_root().squarefree_decomposition() {
                out.push((g, e * self.field.p as usize));
            }
        }
        out
    }

    /// Whether this polynomial is a square in `F_q~[x]` up to a constant,
    /// i.e. over the algebraic closure of the constants: all irreducible
    /// factors occur with even multiplicity.
    pub fn is_square_up_to_constant(&self) -> bool {
        self.squarefree_decomposition().iter().all(|(_, e)| e % 2 == 0)
    }

    /// Order of vanishing at `x` (0 when `f(x) != 0`).
    pub fn vanishing_order(&self, x: &ResidueElem) -> usize {
        let mut f = self.clone();
        let linear = Self::new(self.field, vec![x.neg(), self.field.one()]);
        let mut k = 0;
        while !f.is_zero() && f.eval(x).is_zero() {
            f = f.div_rem(&linear).expect("linear divisor").0;
            k += 1;
        }
        k
    }

    /// Display with the given variable name.
    pub fn display(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = vec![];
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = format!("{c}");
            let part = match i {
                0 => cs,
                1 if cs == "1" => var.to_string(),
                1 => format!("{cs}*{var}"),
                _ if cs == "1" => format!("{var}^{i}"),
                _ => format!("{cs}*{var}^{i}"),
            };
            parts.push(part);
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for ResiduePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("x"))
    }
}
