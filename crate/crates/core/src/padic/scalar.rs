//! The working field and its scalars.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::fmt;

use super::PadicError;

/// Exact rational used for valuations and radius exponents.
pub type Rat = Ratio<i128>;

pub(crate) fn rat(n: i128, d: i128) -> Rat {
    Rat::new(n, d)
}

/// Minimum number of certified digits an arithmetic result may carry before
/// the public operations refuse with `PrecisionExhausted`.
pub const MIN_DIGITS: u32 = 8;

/// Residual certification margin: a value is accepted as a root when its
/// residual valuation reaches `precision - HENSEL_MARGIN`.
pub const HENSEL_MARGIN: u32 = 8;

/// Configuration of the working field: an odd prime, a relative precision,
/// and at most one quadratic extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldConfig {
    prime: u64,
    precision: u32,
    ext: Option<Ext>,
}

/// Normalized description of the adjoined square root.
///
/// The raw integer `d` is factored as `p^(2k) * d0` with `v_p(d0)` equal to
/// 0 or 1; the field stores `sqrt(d0)` as its second basis element and the
/// original `d` only for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ext {
    pub(crate) raw_d: i64,
    /// `d0 = d / p^(2k)`, with `v_p(d0)` in `{0, 1}`.
    pub(crate) d0: i64,
    /// Half of `v_p(d0)`: the valuation of the basis element `sqrt(d0)`.
    pub(crate) ramified: bool,
    /// `p^k` folded out of `sqrt(d)`.
    pub(crate) shift: u32,
}

impl FieldConfig {
    /// Base field `Q_p` with `precision` significant digits.
    pub fn base(prime: u64, precision: u32) -> Result<Self, PadicError> {
        Self::validate(prime, precision)?;
        Ok(FieldConfig { prime, precision, ext: None })
    }

    /// Quadratic extension `Q_p(sqrt d)`; `d` must not be a square in `Q_p`.
    pub fn with_ext(prime: u64, precision: u32, d: i64) -> Result<Self, PadicError> {
        Self::validate(prime, precision)?;
        if d == 0 {
            return Err(PadicError::BadConfig("extension square must be nonzero".into()));
        }
        let p = prime as i64;
        let mut d0 = d;
        let mut shift = 0u32;
        while d0 % (p * p) == 0 {
            d0 /= p * p;
            shift += 1;
        }
        let ramified = d0 % p == 0;
        if !ramified {
            // unramified requires d0 to be a nonresidue mod p
            let r = d0.rem_euclid(p) as u64;
            if legendre(r, prime) != -1 {
                return Err(PadicError::BadConfig(format!(
                    "{d} is a square in Q_{prime}; no extension needed"
                )));
            }
        } else {
            let u = d0 / p;
            if u % p == 0 {
                return Err(PadicError::BadConfig(format!(
                    "{d} has p-adic valuation >= 2 after normalization"
                )));
            }
        }
        Ok(FieldConfig { prime, precision, ext: Some(Ext { raw_d: d, d0, ramified, shift }) })
    }

    fn validate(prime: u64, precision: u32) -> Result<(), PadicError> {
        if prime == 2 {
            return Err(PadicError::BadConfig("p = 2 is rejected".into()));
        }
        if prime < 3 || !is_prime(prime) {
            return Err(PadicError::BadConfig(format!("{prime} is not an odd prime")));
        }
        if precision == 0 {
            return Err(PadicError::BadConfig("precision must be at least 1".into()));
        }
        if prime >= (1 << 31) {
            return Err(PadicError::BadConfig("prime too large for digit tracking".into()));
        }
        Ok(())
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn ext(&self) -> Option<&Ext> {
        self.ext.as_ref()
    }

    /// Ramification index of the working field (1 or 2).
    pub fn ramification(&self) -> u32 {
        match &self.ext {
            Some(e) if e.ramified => 2,
            _ => 1,
        }
    }

    /// Whether `v` lies in the value group `(1/e) Z`.
    pub fn in_value_group(&self, v: Rat) -> bool {
        (v * Rat::from_integer(self.ramification() as i128)).is_integer()
    }

    pub(crate) fn pow_prec(&self, k: u32) -> BigUint {
        BigUint::from(self.prime).pow(k)
    }

    /// The residue field of the working field.
    pub fn residue_field(&self) -> super::ResidueField {
        match &self.ext {
            Some(e) if !e.ramified => {
                let p = self.prime as i64;
                super::ResidueField::quadratic(self.prime, e.d0.rem_euclid(p) as u64)
            }
            _ => super::ResidueField::prime(self.prime),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Legendre symbol (r/p) for 0 <= r < p.
pub(crate) fn legendre(r: u64, p: u64) -> i32 {
    if r == 0 {
        return 0;
    }
    let e = (p - 1) / 2;
    let mut acc: u128 = 1;
    let mut base = r as u128;
    let mut exp = e;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        exp >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// One coordinate of a scalar: a base-field number with exact integer
/// valuation.  `Lost` records a value whose digits cancelled away entirely:
/// only the lower bound `floor` on its valuation is known.
#[derive(Clone, Debug)]
pub(crate) enum Qp {
    Zero,
    Elem { val: i64, unit: BigUint, prec: u32 },
    Lost { floor: i64 },
}

impl Qp {
    fn from_bigint(cfg: &FieldConfig, n: &BigInt) -> Qp {
        if n.is_zero() {
            return Qp::Zero;
        }
        let p = BigInt::from(cfg.prime);
        let mut v = 0i64;
        let mut m = n.clone();
        while (&m % &p).is_zero() {
            m /= &p;
            v += 1;
        }
        let modulus = BigInt::from(cfg.pow_prec(cfg.precision));
        let unit = m.mod_floor(&modulus).to_biguint().expect("nonnegative");
        Qp::Elem { val: v, unit, prec: cfg.precision }
    }

    fn from_rat(cfg: &FieldConfig, q: Ratio<BigInt>) -> Qp {
        if q.is_zero() {
            return Qp::Zero;
        }
        let num = Qp::from_bigint(cfg, q.numer());
        let den = Qp::from_bigint(cfg, q.denom());
        num.div(cfg, &den).expect("denominator is nonzero")
    }

    fn is_exact_zero(&self) -> bool {
        matches!(self, Qp::Zero)
    }

    /// Exact valuation if determined.
    fn val(&self) -> Option<i64> {
        match self {
            Qp::Elem { val, .. } => Some(*val),
            _ => None,
        }
    }

    fn val_floor(&self) -> Option<i64> {
        match self {
            Qp::Zero => None,
            Qp::Elem { val, .. } => Some(*val),
            Qp::Lost { floor } => Some(*floor),
        }
    }

    fn neg(&self, cfg: &FieldConfig) -> Qp {
        match self {
            Qp::Elem { val, unit, prec } => {
                let m = cfg.pow_prec(*prec);
                Qp::Elem { val: *val, unit: (&m - unit % &m) % &m, prec: *prec }
            }
            other => other.clone(),
        }
    }

    fn add(&self, cfg: &FieldConfig, other: &Qp) -> Qp {
        match (self, other) {
            (Qp::Zero, x) | (x, Qp::Zero) => x.clone(),
            (Qp::Lost { floor: f1 }, Qp::Lost { floor: f2 }) => Qp::Lost { floor: (*f1).min(*f2) },
            (Qp::Lost { floor }, Qp::Elem { val, unit, prec })
            | (Qp::Elem { val, unit, prec }, Qp::Lost { floor }) => {
                if val < floor {
                    let certified = ((*floor - *val) as u64).min(*prec as u64) as u32;
                    if certified == 0 {
                        Qp::Lost { floor: *val }
                    } else {
                        let m = cfg.pow_prec(certified);
                        Qp::Elem { val: *val, unit: unit % &m, prec: certified }
                    }
                } else {
                    Qp::Lost { floor: (*val).min(*floor) }
                }
            }
            (Qp::Elem { val: v1, unit: u1, prec: p1 }, Qp::Elem { val: v2, unit: u2, prec: p2 }) => {
                let v = (*v1).min(*v2);
                // digits of the sum are certified modulo p^m
                let m1 = (*v1 - v) as i64 + *p1 as i64;
                let m2 = (*v2 - v) as i64 + *p2 as i64;
                let m = m1.min(m2).min(cfg.precision as i64) as u32;
                let modulus = cfg.pow_prec(m);
                let t1 = u1 * cfg.pow_prec((*v1 - v) as u32) % &modulus;
                let t2 = u2 * cfg.pow_prec((*v2 - v) as u32) % &modulus;
                let s = (t1 + t2) % &modulus;
                if s.is_zero() {
                    return Qp::Lost { floor: v + m as i64 };
                }
                let p = BigUint::from(cfg.prime);
                let mut k = 0u32;
                let mut u = s;
                while (&u % &p).is_zero() {
                    u /= &p;
                    k += 1;
                }
                Qp::Elem { val: v + k as i64, unit: u, prec: m - k }
            }
        }
    }

    fn mul(&self, cfg: &FieldConfig, other: &Qp) -> Qp {
        match (self, other) {
            (Qp::Zero, _) | (_, Qp::Zero) => Qp::Zero,
            (Qp::Lost { floor: f1 }, Qp::Lost { floor: f2 }) => Qp::Lost { floor: f1 + f2 },
            (Qp::Lost { floor }, Qp::Elem { val, .. }) | (Qp::Elem { val, .. }, Qp::Lost { floor }) => {
                Qp::Lost { floor: floor + val }
            }
            (Qp::Elem { val: v1, unit: u1, prec: p1 }, Qp::Elem { val: v2, unit: u2, prec: p2 }) => {
                let prec = (*p1).min(*p2);
                let m = cfg.pow_prec(prec);
                Qp::Elem { val: v1 + v2, unit: u1 * u2 % &m, prec }
            }
        }
    }

    fn div(&self, cfg: &FieldConfig, other: &Qp) -> Result<Qp, PadicError> {
        match (self, other) {
            (_, Qp::Zero) => Err(PadicError::DivisionByZero),
            (_, Qp::Lost { .. }) => Err(PadicError::PrecisionExhausted { min: MIN_DIGITS }),
            (Qp::Zero, _) => Ok(Qp::Zero),
            (Qp::Lost { floor }, Qp::Elem { val, .. }) => Ok(Qp::Lost { floor: floor - val }),
            (Qp::Elem { val: v1, unit: u1, prec: p1 }, Qp::Elem { val: v2, unit: u2, prec: p2 }) => {
                let prec = (*p1).min(*p2);
                let m = cfg.pow_prec(prec);
                let inv = mod_inverse(u2, &m).ok_or(PadicError::DivisionByZero)?;
                Ok(Qp::Elem { val: v1 - v2, unit: u1 * inv % &m, prec })
            }
        }
    }
}

pub(crate) fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(&m).to_biguint().expect("nonnegative"))
}

/// Summary of what is known about a scalar's valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValInfo {
    /// The scalar is exactly zero.
    Zero,
    /// Valuation known exactly.
    Exact(Rat),
    /// All digits cancelled; only `valuation >= bound` is certified.
    AtLeast(Rat),
}

impl ValInfo {
    pub fn exact(&self) -> Option<Rat> {
        match self {
            ValInfo::Exact(v) => Some(*v),
            _ => None,
        }
    }
}

/// An element of the working field with exact valuation and tracked digits.
///
/// Internally a pair `a + b * sqrt(d0)` of base-field coordinates.  The
/// minimum of the coordinate valuations is always the exact valuation of the
/// element, because the basis residues are independent (unramified) or the
/// coordinate valuations can never meet (ramified).
#[derive(Clone, Debug)]
pub struct PadicScalar {
    pub(crate) cfg: FieldConfig,
    pub(crate) a: Qp,
    pub(crate) b: Qp,
}

impl PadicScalar {
    pub fn zero(cfg: &FieldConfig) -> Self {
        PadicScalar { cfg: *cfg, a: Qp::Zero, b: Qp::Zero }
    }

    pub fn one(cfg: &FieldConfig) -> Self {
        Self::from_integer(cfg, 1)
    }

    pub fn from_integer(cfg: &FieldConfig, n: i64) -> Self {
        PadicScalar { cfg: *cfg, a: Qp::from_bigint(cfg, &BigInt::from(n)), b: Qp::Zero }
    }

    pub fn from_rational(cfg: &FieldConfig, num: i64, den: i64) -> Result<Self, PadicError> {
        if den == 0 {
            return Err(PadicError::DivisionByZero);
        }
        Ok(PadicScalar {
            cfg: *cfg,
            a: Qp::from_rat(cfg, Ratio::new(BigInt::from(num), BigInt::from(den))),
            b: Qp::Zero,
        })
    }

    pub fn from_rat(cfg: &FieldConfig, q: Rat) -> Self {
        PadicScalar {
            cfg: *cfg,
            a: Qp::from_rat(cfg, Ratio::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))),
            b: Qp::Zero,
        }
    }

    pub fn from_big_rational(cfg: &FieldConfig, q: Ratio<BigInt>) -> Self {
        PadicScalar { cfg: *cfg, a: Qp::from_rat(cfg, q), b: Qp::Zero }
    }

    /// The adjoined square root `sqrt(d)`, when an extension is configured.
    pub fn sqrt_d(cfg: &FieldConfig) -> Result<Self, PadicError> {
        let ext = cfg.ext.ok_or(PadicError::BadConfig("no extension configured".into()))?;
        let shift = BigInt::from(cfg.prime).pow(ext.shift);
        Ok(PadicScalar { cfg: *cfg, a: Qp::Zero, b: Qp::from_bigint(cfg, &shift) })
    }

    pub fn config(&self) -> &FieldConfig {
        &self.cfg
    }

    pub fn is_exact_zero(&self) -> bool {
        self.a.is_exact_zero() && self.b.is_exact_zero()
    }

    /// Whether this scalar may be zero (exact zero or all digits lost).
    pub fn maybe_zero(&self) -> bool {
        !matches!(self.val_info(), ValInfo::Exact(_))
    }

    /// Valuation of the second coordinate's basis element.
    fn basis_val(&self) -> Rat {
        match &self.cfg.ext {
            Some(e) if e.ramified => rat(1, 2),
            _ => Rat::zero(),
        }
    }

    pub fn val_info(&self) -> ValInfo {
        let bshift = self.basis_val();
        let av = self.a.val().map(|v| Rat::from_integer(v as i128));
        let bv = self.b.val().map(|v| Rat::from_integer(v as i128) + bshift);
        let af = self.a.val_floor().map(|v| Rat::from_integer(v as i128));
        let bf = self.b.val_floor().map(|v| Rat::from_integer(v as i128) + bshift);
        let floor = match (af, bf) {
            (None, None) => return ValInfo::Zero,
            (Some(x), None) => x,
            (None, Some(y)) => y,
            (Some(x), Some(y)) => x.min(y),
        };
        // the floor is exact when achieved by a coordinate with known digits
        let exact = match (av, bv) {
            (Some(x), _) if x == floor => true,
            (_, Some(y)) if y == floor => true,
            _ => false,
        };
        if exact {
            ValInfo::Exact(floor)
        } else {
            ValInfo::AtLeast(floor)
        }
    }

    /// Exact valuation; errors if the scalar is zero or indeterminate.
    pub fn valuation(&self) -> Result<Rat, PadicError> {
        match self.val_info() {
            ValInfo::Exact(v) => Ok(v),
            ValInfo::Zero => Err(PadicError::DivisionByZero),
            ValInfo::AtLeast(_) => Err(PadicError::PrecisionExhausted { min: MIN_DIGITS }),
        }
    }

    /// Certified digits of the result (relative precision): depth of the
    /// certified absolute expansion below the leading valuation.
    pub fn precision_digits(&self) -> u32 {
        let v = match self.val_info() {
            ValInfo::Zero => return self.cfg.precision,
            ValInfo::AtLeast(_) => return 0,
            ValInfo::Exact(v) => v,
        };
        let digits = self.certified_abs_depth() - v;
        if digits <= Rat::zero() {
            return 0;
        }
        let whole = (digits.numer() / digits.denom()) as u64;
        (whole.min(self.cfg.precision as u64)) as u32
    }

    fn check_cfg(&self, other: &Self) -> Result<(), PadicError> {
        if self.cfg != other.cfg {
            return Err(PadicError::ConfigMismatch);
        }
        Ok(())
    }

    // -- tolerant internal arithmetic: Lost states propagate --

    pub fn add_raw(&self, other: &Self) -> Self {
        debug_assert_eq!(self.cfg, other.cfg);
        PadicScalar {
            cfg: self.cfg,
            a: self.a.add(&self.cfg, &other.a),
            b: self.b.add(&self.cfg, &other.b),
        }
    }

    pub fn neg_raw(&self) -> Self {
        PadicScalar { cfg: self.cfg, a: self.a.neg(&self.cfg), b: self.b.neg(&self.cfg) }
    }

    pub fn sub_raw(&self, other: &Self) -> Self {
        self.add_raw(&other.neg_raw())
    }

    pub fn mul_raw(&self, other: &Self) -> Self {
        debug_assert_eq!(self.cfg, other.cfg);
        let cfg = &self.cfg;
        // (a1 + b1 s)(a2 + b2 s) = a1 a2 + b1 b2 d0' + (a1 b2 + a2 b1) s,
        // where s^2 = d0 / p^(2 shift) seen by the stored coordinates.
        let d0 = self.ext_square_coord();
        let aa = self.a.mul(cfg, &other.a);
        let bb = self.b.mul(cfg, &other.b);
        let cross1 = self.a.mul(cfg, &other.b);
        let cross2 = self.b.mul(cfg, &other.a);
        let a = aa.add(cfg, &bb.mul(cfg, &d0));
        let b = cross1.add(cfg, &cross2);
        PadicScalar { cfg: self.cfg, a, b }
    }

    /// The square of the stored basis element, as a base coordinate.
    fn ext_square_coord(&self) -> Qp {
        match &self.cfg.ext {
            None => Qp::Zero,
            Some(e) => Qp::from_bigint(&self.cfg, &BigInt::from(e.d0)),
        }
    }

    pub fn div_raw(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_cfg(other)?;
        let cfg = &self.cfg;
        if other.is_exact_zero() {
            return Err(PadicError::DivisionByZero);
        }
        if other.b.is_exact_zero() {
            return Ok(PadicScalar {
                cfg: self.cfg,
                a: self.a.div(cfg, &other.a)?,
                b: self.b.div(cfg, &other.a)?,
            });
        }
        // multiply by the conjugate; the norm has exact valuation since the
        // basis residues are independent
        let conj = PadicScalar { cfg: self.cfg, a: other.a.clone(), b: other.b.neg(cfg) };
        let norm = other.mul_raw(&conj);
        debug_assert!(norm.b.is_exact_zero() || norm.b.val_floor().is_some());
        let num = self.mul_raw(&conj);
        Ok(PadicScalar {
            cfg: self.cfg,
            a: num.a.div(cfg, &norm.a)?,
            b: num.b.div(cfg, &norm.a)?,
        })
    }

    pub fn square_raw(&self) -> Self {
        self.mul_raw(self)
    }

    /// Multiply by `p^k` (k may be negative).
    pub fn shift_p(&self, k: i64) -> Self {
        let shift = |q: &Qp| match q {
            Qp::Zero => Qp::Zero,
            Qp::Lost { floor } => Qp::Lost { floor: floor + k },
            Qp::Elem { val, unit, prec } => {
                Qp::Elem { val: val + k, unit: unit.clone(), prec: *prec }
            }
        };
        PadicScalar { cfg: self.cfg, a: shift(&self.a), b: shift(&self.b) }
    }

    /// An element of exact valuation `v`, when `v` lies in the value group.
    pub fn uniformizer_pow(cfg: &FieldConfig, v: Rat) -> Result<Self, PadicError> {
        if v.is_integer() {
            let k = v.to_integer().to_i64().ok_or(PadicError::BadConfig("exponent overflow".into()))?;
            return Ok(Self::one(cfg).shift_p(k));
        }
        if cfg.ramification() == 2 && (v * rat(2, 1)).is_integer() {
            // v = m + 1/2: p^m * sqrt(d0)
            let half = v - rat(1, 2);
            let m = half.to_integer().to_i64().ok_or(PadicError::BadConfig("exponent overflow".into()))?;
            let pi = PadicScalar {
                cfg: *cfg,
                a: Qp::Zero,
                b: Qp::from_bigint(cfg, &BigInt::one()),
            };
            return Ok(pi.shift_p(m));
        }
        Err(PadicError::BadConfig(format!("{v} is not in the value group")))
    }

    // -- public arithmetic with the precision contract --

    fn guard(self) -> Result<Self, PadicError> {
        if self.is_exact_zero() {
            return Ok(self);
        }
        match self.val_info() {
            ValInfo::Exact(_) if self.precision_digits() >= MIN_DIGITS => Ok(self),
            _ => Err(PadicError::PrecisionExhausted { min: MIN_DIGITS }),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_cfg(other)?;
        self.add_raw(other).guard()
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_cfg(other)?;
        self.sub_raw(other).guard()
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_cfg(other)?;
        self.mul_raw(other).guard()
    }

    pub fn div(&self, other: &Self) -> Result<Self, PadicError> {
        self.div_raw(other)?.guard()
    }

    /// Image in the residue field; requires valuation >= 0.
    pub fn reduce(&self) -> Result<super::ResidueElem, PadicError> {
        let rf = self.cfg.residue_field();
        match self.val_info() {
            ValInfo::Zero => Ok(rf.zero()),
            ValInfo::AtLeast(f) if f > Rat::zero() => Ok(rf.zero()),
            ValInfo::AtLeast(_) => Err(PadicError::PrecisionExhausted { min: MIN_DIGITS }),
            ValInfo::Exact(v) => {
                if v < Rat::zero() {
                    return Err(PadicError::NotIntegral { val: format_rat(&v) });
                }
                if v > Rat::zero() {
                    return Ok(rf.zero());
                }
                let digit = |q: &Qp, positive_ok: bool| -> Result<u64, PadicError> {
                    match q {
                        Qp::Zero => Ok(0),
                        Qp::Lost { floor } if *floor > 0 => Ok(0),
                        Qp::Lost { .. } => Err(PadicError::PrecisionExhausted { min: MIN_DIGITS }),
                        Qp::Elem { val, unit, .. } => {
                            if *val > 0 {
                                Ok(0)
                            } else if *val == 0 {
                                Ok((unit % BigUint::from(self.cfg.prime))
                                    .to_u64()
                                    .expect("digit fits"))
                            } else if positive_ok {
                                Ok(0)
                            } else {
                                Err(PadicError::NotIntegral { val: val.to_string() })
                            }
                        }
                    }
                };
                match &self.cfg.ext {
                    Some(e) if !e.ramified => {
                        let u = digit(&self.a, false)?;
                        let vdig = digit(&self.b, false)?;
                        Ok(rf.make(u, vdig))
                    }
                    _ => {
                        // ramified or base: only the a-coordinate survives
                        let u = digit(&self.a, false)?;
                        Ok(rf.make(u, 0))
                    }
                }
            }
        }
    }

    /// Lift a residue element back into the field (valuation 0 representative,
    /// or exact zero).
    pub fn lift(cfg: &FieldConfig, r: &super::ResidueElem) -> Self {
        let (u, v) = r.coords();
        let a = Qp::from_bigint(cfg, &BigInt::from(u));
        let b = if v == 0 { Qp::Zero } else { Qp::from_bigint(cfg, &BigInt::from(v)) };
        match &cfg.ext {
            Some(e) if !e.ramified => PadicScalar { cfg: *cfg, a, b },
            _ => {
                debug_assert_eq!(v, 0);
                PadicScalar { cfg: *cfg, a, b: Qp::Zero }
            }
        }
    }

    /// Whether two scalars agree on all mutually certified digits.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let d = self.sub_raw(other);
        match d.val_info() {
            ValInfo::Zero => true,
            ValInfo::AtLeast(_) => true,
            ValInfo::Exact(v) => {
                // equal up to the shared certified depth
                let depth = self.certified_abs_depth().min(other.certified_abs_depth());
                v >= depth
            }
        }
    }

    /// The absolute depth to which this scalar's digits are certified:
    /// the minimum over coordinates of `val + prec` (or the loss floor).
    fn certified_abs_depth(&self) -> Rat {
        let bshift = self.basis_val();
        let depth = |q: &Qp, shift: Rat| -> Rat {
            match q {
                Qp::Zero => Rat::from_integer(i64::MAX as i128),
                Qp::Lost { floor } => Rat::from_integer(*floor as i128) + shift,
                Qp::Elem { val, prec, .. } => {
                    Rat::from_integer(*val as i128 + *prec as i128) + shift
                }
            }
        };
        depth(&self.a, Rat::zero()).min(depth(&self.b, bshift))
    }

    /// Residual test: certified that `valuation >= bound`.
    pub fn val_at_least(&self, bound: Rat) -> bool {
        match self.val_info() {
            ValInfo::Zero => true,
            ValInfo::Exact(v) => v >= bound,
            ValInfo::AtLeast(f) => f >= bound,
        }
    }

    /// Base-p digit string (little-endian) of the unit part, for display.
    fn unit_digits_str(q: &Qp, p: u64) -> String {
        match q {
            Qp::Zero => "0".into(),
            Qp::Lost { .. } => "?".into(),
            Qp::Elem { unit, .. } => {
                let digits = unit.to_radix_le(p as u32);
                digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(".")
            }
        }
    }
}

pub(crate) fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl PartialEq for PadicScalar {
    /// Equality of certified data: both exact zero, or equal valuation and
    /// matching digits to the shared precision.
    fn eq(&self, other: &Self) -> bool {
        if self.cfg != other.cfg {
            return false;
        }
        match (self.val_info(), other.val_info()) {
            (ValInfo::Zero, ValInfo::Zero) => true,
            (ValInfo::Exact(a), ValInfo::Exact(b)) => a == b && self.agrees_with(other),
            _ => false,
        }
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.val_info() {
            ValInfo::Zero => write!(f, "0"),
            ValInfo::AtLeast(v) => write!(f, "O(p^{})", format_rat(&v)),
            ValInfo::Exact(v) => {
                write!(f, "p^{} * [{}", format_rat(&v), Self::unit_digits_str(&self.a, self.cfg.prime))?;
                if !self.b.is_exact_zero() {
                    write!(f, " + sqrt*{}", Self::unit_digits_str(&self.b, self.cfg.prime))?;
                }
                write!(f, "]")
            }
        }
    }
}

impl Serialize for PadicScalar {
    fn serialize<S>(&self, s: S) -> Result<S::Ok, S::Error>
    where
        S: Serializer,
    {
        match self.val_info() {
            ValInfo::Zero => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("zero", &true)?;
                m.end()
            }
            ValInfo::AtLeast(v) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("val_at_least", &format_rat(&v))?;
                m.end()
            }
            ValInfo::Exact(v) => {
                let mut m = s.serialize_map(Some(3))?;
                m.serialize_entry("val", &format_rat(&v))?;
                if self.b.is_exact_zero() {
                    m.serialize_entry("unit", &Self::unit_digits_str(&self.a, self.cfg.prime))?;
                } else {
                    m.serialize_entry(
                        "unit",
                        &vec![
                            Self::unit_digits_str(&self.a, self.cfg.prime),
                            Self::unit_digits_str(&self.b, self.cfg.prime),
                        ],
                    )?;
                }
                m.serialize_entry("prec", &self.precision_digits())?;
                m.end()
            }
        }
    }
}

/// Public entry point for the four arithmetic operations.
pub fn arith(
    x: &PadicScalar,
    y: &PadicScalar,
    op: ArithOp,
) -> Result<PadicScalar, PadicError> {
    match op {
        ArithOp::Add => x.add(y),
        ArithOp::Sub => x.sub(y),
        ArithOp::Mul => x.mul(y),
        ArithOp::Div => x.div(y),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> FieldConfig {
        FieldConfig::base(3, 60).unwrap()
    }

    #[test]
    fn config_rejects_p2_and_squares() {
        assert!(FieldConfig::base(2, 60).is_err());
        assert!(FieldConfig::base(9, 60).is_err());
        // 7 = 1 + 2*3 is a square mod 3 and lifts (7 ≡ 1 mod 3)
        assert!(FieldConfig::with_ext(3, 60, 7).is_err());
        assert!(FieldConfig::with_ext(3, 60, -1).is_ok());
        assert!(FieldConfig::with_ext(3, 60, 3).is_ok());
    }

    #[test]
    fn valuation_additivity() {
        let cfg = f3();
        let three = PadicScalar::from_integer(&cfg, 3);
        let ninth = PadicScalar::from_rational(&cfg, 1, 9).unwrap();
        let prod = three.mul(&ninth).unwrap();
        assert_eq!(prod.valuation().unwrap(), rat(-1, 1));
        // unit part 1
        assert!(prod.sub_raw(&PadicScalar::from_rational(&cfg, 1, 3).unwrap()).maybe_zero());
    }

    #[test]
    fn addition_and_cancellation_bookkeeping() {
        let cfg = f3();
        let one = PadicScalar::one(&cfg);
        let three = PadicScalar::from_integer(&cfg, 3);
        let four = one.add(&three).unwrap();
        assert_eq!(four.valuation().unwrap(), rat(0, 1));
        let diff = four.sub(&one).unwrap();
        assert_eq!(diff.valuation().unwrap(), rat(1, 1));
        assert_eq!(diff.precision_digits(), 59);
    }

    #[test]
    fn full_cancellation_is_precision_exhausted() {
        let cfg = f3();
        let x = PadicScalar::from_rational(&cfg, 22, 7).unwrap();
        assert!(matches!(x.sub(&x), Err(PadicError::PrecisionExhausted { .. })));
        // but the raw layer keeps a bound
        let d = x.sub_raw(&x);
        assert!(matches!(d.val_info(), ValInfo::AtLeast(_)));
    }

    #[test]
    fn division_in_extension() {
        let cfg = FieldConfig::with_ext(3, 60, -1).unwrap();
        let s = PadicScalar::sqrt_d(&cfg).unwrap();
        let x = PadicScalar::from_integer(&cfg, 5).add(&s).unwrap();
        let y = x.div(&x).unwrap();
        assert!(y.sub_raw(&PadicScalar::one(&cfg)).maybe_zero());
        // sqrt(-1)^2 = -1
        let sq = s.mul(&s).unwrap();
        assert!(sq.sub_raw(&PadicScalar::from_integer(&cfg, -1)).maybe_zero());
    }

    #[test]
    fn ramified_valuations_are_half_integers() {
        let cfg = FieldConfig::with_ext(3, 60, 3).unwrap();
        let pi = PadicScalar::sqrt_d(&cfg).unwrap();
        assert_eq!(pi.valuation().unwrap(), rat(1, 2));
        let x = PadicScalar::uniformizer_pow(&cfg, rat(-3, 2)).unwrap();
        assert_eq!(x.valuation().unwrap(), rat(-3, 2));
    }

    #[test]
    fn reduce_is_multiplicative() {
        let cfg = f3();
        let four = PadicScalar::from_integer(&cfg, 4);
        let r = four.reduce().unwrap();
        assert_eq!(r.coords(), (1, 0));
        assert_eq!(PadicScalar::from_integer(&cfg, 3).reduce().unwrap().coords(), (0, 0));
        let x = PadicScalar::from_integer(&cfg, 5);
        let y = PadicScalar::from_integer(&cfg, 7);
        let lhs = x.mul(&y).unwrap().reduce().unwrap();
        let rhs = x.reduce().unwrap().mul(&y.reduce().unwrap());
        assert_eq!(lhs, rhs);
        // negative valuation is rejected
        let bad = PadicScalar::from_rational(&cfg, 1, 3).unwrap();
        assert!(matches!(bad.reduce(), Err(PadicError::NotIntegral { .. })));
    }

    #[test]
    fn residue_generator_squares_to_d() {
        let cfg = FieldConfig::with_ext(3, 60, -1).unwrap();
        let s = PadicScalar::sqrt_d(&cfg).unwrap();
        let r = s.reduce().unwrap();
        let d = PadicScalar::from_integer(&cfg, -1).reduce().unwrap();
        assert_eq!(r.mul(&r), d);
        assert!(!r.is_zero());
    }

    #[test]
    fn random_valuation_axioms() {
        use rand::prelude::*;
        let cfg = f3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let a: i64 = rng.gen_range(-200..200);
            let b: i64 = rng.gen_range(1..200);
            let c: i64 = rng.gen_range(-200..200);
            let d: i64 = rng.gen_range(1..200);
            if a == 0 || c == 0 {
                continue;
            }
            let x = PadicScalar::from_rational(&cfg, a, b).unwrap();
            let y = PadicScalar::from_rational(&cfg, c, d).unwrap();
            let vx = x.valuation().unwrap();
            let vy = y.valuation().unwrap();
            let prod = x.mul(&y).unwrap();
            assert_eq!(prod.valuation().unwrap(), vx + vy);
            let sum = x.add_raw(&y);
            match sum.val_info() {
                ValInfo::Zero | ValInfo::AtLeast(_) => assert_eq!(vx, vy),
                ValInfo::Exact(vs) => {
                    assert!(vs >= vx.min(vy));
                    if vx != vy {
                        assert_eq!(vs, vx.min(vy));
                    }
                }
            }
        }
    }
}
