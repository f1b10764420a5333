//! The Berkovich projective-line point model: point kinds, equality,
//! diameter, hyperbolic metric, Gauss seminorms, tangent directions, and
//! limits of nested disc chains.
//!
//! Radii are powers `p^(-(a + b*sqrt2))` with rational `a`, `b`; the
//! irrational part represents type III radii exactly, and all comparisons
//! reduce to rational sign computations.

use crate::padic::scalar::{format_rat, rat};
use crate::padic::{FieldConfig, PadicError, PadicScalar, Rat, ResidueElem, ValInfo};
use crate::poly::Poly;
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BerkError {
    #[error("the point at infinity has no diameter")]
    InfinityHasNoDiameter,
    #[error("hyperbolic distance is infinite at type I points")]
    TypeIPoint,
    #[error("tangent direction from a point to itself")]
    SamePoint,
    #[error("tangent directions require a type II base point over the working field")]
    NotTypeII,
    #[error("disc chain is not nested")]
    NotNested,
    #[error("disc chain certifies an empty intersection in the working field")]
    TypeIVLimit,
    #[error("chain tail is neither stabilized nor geometric; limit undetermined")]
    LimitUndetermined,
    #[error("limit radius is not a power of p")]
    UnrepresentableRadius,
    #[error("scalar error: {0}")]
    Padic(#[from] PadicError),
}

/// Exponent `a + b*sqrt2`; encodes the radius `p^-(a + b*sqrt2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RadiusExp {
    pub a: Rat,
    pub b: Rat,
}

impl RadiusExp {
    pub fn new(a: Rat, b: Rat) -> Self {
        RadiusExp { a, b }
    }

    pub fn from_rat(a: Rat) -> Self {
        RadiusExp { a, b: Rat::zero() }
    }

    pub fn from_int(a: i64) -> Self {
        Self::from_rat(Rat::from_integer(a as i128))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    /// Whether the radius lies in the value group `p^Q` (no sqrt2 part).
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        RadiusExp { a: self.a + o.a, b: self.b + o.b }
    }

    pub fn sub(&self, o: &Self) -> Self {
        RadiusExp { a: self.a - o.a, b: self.b - o.b }
    }

    pub fn scale(&self, k: Rat) -> Self {
        RadiusExp { a: self.a * k, b: self.b * k }
    }

    /// Sign of `a + b*sqrt2`, computed rationally.
    fn sign(&self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        let (a, b) = (self.a, self.b);
        if b.is_zero() {
            return a.cmp(&Rat::zero());
        }
        if a.is_zero() {
            return b.cmp(&Rat::zero());
        }
        match (a.is_positive(), b.is_positive()) {
            (true, true) => Greater,
            (false, false) => Less,
            _ => {
                // the sign is decided by comparing a^2 with 2 b^2
                let a2 = a * a;
                let b2 = b * b * rat(2, 1);
                match a2.cmp(&b2) {
                    Equal => Equal, // unreachable for nonzero rationals
                    Greater => a.cmp(&Rat::zero()),
                    Less => b.cmp(&Rat::zero()),
                }
            }
        }
    }
}

impl PartialOrd for RadiusExp {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RadiusExp {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sub(other).sign()
    }
}

impl fmt::Display for RadiusExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", format_rat(&self.a))
        } else {
            write!(f, "({} + {}*sqrt2)", format_rat(&self.a), format_rat(&self.b))
        }
    }
}

impl Serialize for RadiusExp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("a", &format_rat(&self.a))?;
        m.serialize_entry("b", &format_rat(&self.b))?;
        m.end()
    }
}

/// An exact absolute value / radius: zero or `p^-exp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    Zero,
    Pos(RadiusExp),
}

impl Norm {
    pub fn one() -> Self {
        Norm::Pos(RadiusExp::zero())
    }

    pub fn from_val(v: Rat) -> Self {
        Norm::Pos(RadiusExp::from_rat(v))
    }

    pub fn of(x: &PadicScalar) -> Result<Self, PadicError> {
        match x.val_info() {
            ValInfo::Zero => Ok(Norm::Zero),
            ValInfo::Exact(v) => Ok(Norm::Pos(RadiusExp::from_rat(v))),
            ValInfo::AtLeast(_) => Err(PadicError::PrecisionExhausted { min: 0 }),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Norm::Zero)
    }

    pub fn exp(&self) -> Option<&RadiusExp> {
        match self {
            Norm::Zero => None,
            Norm::Pos(e) => Some(e),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        match (self, o) {
            (Norm::Zero, _) | (_, Norm::Zero) => Norm::Zero,
            (Norm::Pos(x), Norm::Pos(y)) => Norm::Pos(x.add(y)),
        }
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        match (self, o) {
            (_, Norm::Zero) => None,
            (Norm::Zero, _) => Some(Norm::Zero),
            (Norm::Pos(x), Norm::Pos(y)) => Some(Norm::Pos(x.sub(y))),
        }
    }

    pub fn pow(&self, k: i64) -> Self {
        match self {
            Norm::Zero => Norm::Zero,
            Norm::Pos(e) => Norm::Pos(e.scale(Rat::from_integer(k as i128))),
        }
    }
}

impl PartialOrd for Norm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Norm {
    // |x| = p^-exp: larger norm means smaller exponent
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Norm::Zero, Norm::Zero) => std::cmp::Ordering::Equal,
            (Norm::Zero, Norm::Pos(_)) => std::cmp::Ordering::Less,
            (Norm::Pos(_), Norm::Zero) => std::cmp::Ordering::Greater,
            (Norm::Pos(x), Norm::Pos(y)) => y.cmp(x),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Zero => write!(f, "0"),
            Norm::Pos(e) => write!(f, "p^-{e}"),
        }
    }
}

/// A point of the Berkovich projective line over the working field.
#[derive(Clone, Debug)]
pub enum BerkPoint {
    TypeI(PadicScalar),
    Disc { center: PadicScalar, rexp: RadiusExp },
    Infinity,
}

impl BerkPoint {
    pub fn gauss(cfg: &FieldConfig) -> Self {
        BerkPoint::Disc { center: PadicScalar::zero(cfg), rexp: RadiusExp::zero() }
    }

    pub fn disc(center: PadicScalar, rexp: RadiusExp) -> Self {
        BerkPoint::Disc { center, rexp }
    }

    /// Type II: disc point whose radius lies in `p^Q`.
    pub fn is_type_ii(&self) -> bool {
        matches!(self, BerkPoint::Disc { rexp, .. } if rexp.is_rational())
    }

    pub fn is_type_iii(&self) -> bool {
        matches!(self, BerkPoint::Disc { rexp, .. } if !rexp.is_rational())
    }

    /// Diameter: 0 at type I points, the radius at disc points.
    pub fn diam(&self) -> Result<Norm, BerkError> {
        match self {
            BerkPoint::TypeI(_) => Ok(Norm::Zero),
            BerkPoint::Disc { rexp, .. } => Ok(Norm::Pos(*rexp)),
            BerkPoint::Infinity => Err(BerkError::InfinityHasNoDiameter),
        }
    }

    /// Seminorm `|T - c|` of the coordinate minus a scalar at this point.
    pub fn dist_to(&self, c: &PadicScalar) -> Result<Norm, BerkError> {
        match self {
            BerkPoint::Infinity => Err(BerkError::InfinityHasNoDiameter),
            BerkPoint::TypeI(x) => Ok(Norm::of(&x.sub_raw(c))?),
            BerkPoint::Disc { center, rexp } => {
                let d = center.sub_raw(c);
                // max(|center - c|, r)
                match norm_with_floor(&d) {
                    NormBound::Exact(n) => Ok(n.max(Norm::Pos(*rexp))),
                    NormBound::AtMost(e) => {
                        if e >= *rexp {
                            Ok(Norm::Pos(*rexp))
                        } else {
                            Err(BerkError::Padic(PadicError::PrecisionExhausted { min: 0 }))
                        }
                    }
                }
            }
        }
    }

    /// Seminorm of the coordinate function `T`.
    pub fn coord_norm(&self) -> Result<Norm, BerkError> {
        match self {
            BerkPoint::Infinity => Err(BerkError::InfinityHasNoDiameter),
            BerkPoint::TypeI(x) => Ok(Norm::of(x)?),
            BerkPoint::Disc { center, .. } => self.dist_to(&PadicScalar::zero(center.config())),
        }
    }
}

enum NormBound {
    Exact(Norm),
    /// `|x| <= p^-e`: digits certified down to depth `e` all vanished.
    AtMost(RadiusExp),
}

fn norm_with_floor(x: &PadicScalar) -> NormBound {
    match x.val_info() {
        ValInfo::Zero => NormBound::Exact(Norm::Zero),
        ValInfo::Exact(v) => NormBound::Exact(Norm::Pos(RadiusExp::from_rat(v))),
        ValInfo::AtLeast(f) => NormBound::AtMost(RadiusExp::from_rat(f)),
    }
}

impl PartialEq for BerkPoint {
    /// `Disc(a, r) = Disc(b, s)` iff `r = s` and `|a - b| <= r`.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (BerkPoint::Infinity, BerkPoint::Infinity) => true,
            (BerkPoint::TypeI(x), BerkPoint::TypeI(y)) => x == y,
            (BerkPoint::Disc { center: a, rexp: r }, BerkPoint::Disc { center: b, rexp: s }) => {
                if r != s {
                    return false;
                }
                match norm_with_floor(&a.sub_raw(b)) {
                    NormBound::Exact(n) => n <= Norm::Pos(*r),
                    NormBound::AtMost(e) => e >= *r,
                }
            }
            _ => false,
        }
    }
}

impl fmt::Display for BerkPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BerkPoint::Infinity => write!(f, "inf"),
            BerkPoint::TypeI(x) => write!(f, "{x}"),
            BerkPoint::Disc { center, rexp } => write!(f, "zeta({center}, p^-{rexp})"),
        }
    }
}

/// Hyperbolic distance between two disc points, in units of `log p`,
/// returned as an exact exponent pair.
pub fn hyperbolic_distance(x: &BerkPoint, y: &BerkPoint) -> Result<RadiusExp, BerkError> {
    let (a, r) = match x {
        BerkPoint::Disc { center, rexp } => (center, rexp),
        _ => return Err(BerkError::TypeIPoint),
    };
    let (b, s) = match y {
        BerkPoint::Disc { center, rexp } => (center, rexp),
        _ => return Err(BerkError::TypeIPoint),
    };
    // d_H / log p = r + s - 2 min(r, s, val(a-b)), exponent-wise
    let mut m = (*r).min(*s);
    match norm_with_floor(&a.sub_raw(b)) {
        NormBound::Exact(Norm::Pos(v)) => m = m.min(v),
        NormBound::Exact(Norm::Zero) => {}
        NormBound::AtMost(e) => {
            if e < m {
                return Err(BerkError::Padic(PadicError::PrecisionExhausted { min: 0 }));
            }
        }
    }
    Ok(r.add(s).sub(&m.scale(rat(2, 1))))
}

/// Gauss seminorm `|P|_xi = max_k |c_k| r^k` for a polynomial written in
/// powers of `z - a`, at `xi = zeta(a, r)`.
pub fn gauss_seminorm(coeffs: &[PadicScalar], rexp: &RadiusExp) -> Result<Norm, BerkError> {
    let mut best: Option<RadiusExp> = None;
    let mut floors: Vec<RadiusExp> = vec![];
    for (k, c) in coeffs.iter().enumerate() {
        let term = rexp.scale(Rat::from_integer(k as i128));
        match c.val_info() {
            ValInfo::Zero => {}
            ValInfo::Exact(v) => {
                let e = RadiusExp::from_rat(v).add(&term);
                best = Some(match best {
                    None => e,
                    Some(b) => b.min(e),
                });
            }
            ValInfo::AtLeast(f) => floors.push(RadiusExp::from_rat(f).add(&term)),
        }
    }
    match best {
        None => {
            if floors.is_empty() {
                Ok(Norm::Zero)
            } else {
                Err(BerkError::Padic(PadicError::PrecisionExhausted { min: 0 }))
            }
        }
        Some(b) => {
            // lost coefficients must not be able to dominate the max
            if floors.iter().any(|f| *f < b) {
                return Err(BerkError::Padic(PadicError::PrecisionExhausted { min: 0 }));
            }
            Ok(Norm::Pos(b))
        }
    }
}

/// Gauss seminorm of a polynomial in `z` at `zeta(a, r)`: recenters first.
pub fn seminorm_at_disc(
    poly: &Poly<PadicScalar>,
    center: &PadicScalar,
    rexp: &RadiusExp,
) -> Result<Norm, BerkError> {
    if poly.is_zero() {
        return Ok(Norm::Zero);
    }
    let one = PadicScalar::one(center.config());
    let shifted = poly.compose_affine(center, &one);
    gauss_seminorm(shifted.coeffs(), rexp)
}

/// Seminorm of a polynomial at an arbitrary non-infinity point.
pub fn seminorm_at(poly: &Poly<PadicScalar>, xi: &BerkPoint) -> Result<Norm, BerkError> {
    match xi {
        BerkPoint::Infinity => Err(BerkError::InfinityHasNoDiameter),
        BerkPoint::TypeI(x) => Ok(Norm::of(&poly.eval(x))?),
        BerkPoint::Disc { center, rexp } => seminorm_at_disc(poly, center, rexp),
    }
}

/// A tangent direction at a type II point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentDir {
    pub base: BerkPoint,
    pub dir: Dir,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Finite(ResidueElem),
    Infinity,
}

/// The tangent direction at a type II point `xi` toward `target`.
///
/// Finite directions are the residue classes of `(target_center - a) / c`
/// with `|c| = r`; everything outside the closed disc lies in the direction
/// toward infinity.
pub fn tangent_direction(xi: &BerkPoint, target: &BerkPoint) -> Result<TangentDir, BerkError> {
    let (a, rexp) = match xi {
        BerkPoint::Disc { center, rexp } if rexp.is_rational() => (center, rexp),
        _ => return Err(BerkError::NotTypeII),
    };
    let cfg = a.config();
    if !cfg.in_value_group(rexp.a) {
        return Err(BerkError::NotTypeII);
    }
    if target == xi {
        return Err(BerkError::SamePoint);
    }
    let outside = match target {
        BerkPoint::Infinity => true,
        other => other.dist_to(a)? > Norm::Pos(*rexp),
    };
    if outside {
        return Ok(TangentDir { base: xi.clone(), dir: Dir::Infinity });
    }
    let b = match target {
        BerkPoint::TypeI(x) => x.clone(),
        BerkPoint::Disc { center, .. } => center.clone(),
        BerkPoint::Infinity => unreachable!(),
    };
    let c = PadicScalar::uniformizer_pow(cfg, rexp.a)?;
    let q = b.sub_raw(a).div_raw(&c)?;
    let r = match q.val_info() {
        ValInfo::Zero => cfg.residue_field().zero(),
        ValInfo::AtLeast(f) if f > Rat::zero() => cfg.residue_field().zero(),
        ValInfo::AtLeast(_) => {
            return Err(BerkError::Padic(PadicError::PrecisionExhausted { min: 0 }))
        }
        ValInfo::Exact(_) => q.reduce()?,
    };
    Ok(TangentDir { base: xi.clone(), dir: Dir::Finite(r) })
}

/// One entry of a nested chain sample: a closed disc with an exact rational
/// radius.  Rational radii (rather than exponents) let strictly shrinking
/// chains with non-p-power radii be written down exactly.
#[derive(Clone, Debug)]
pub struct ChainDisc {
    pub center: PadicScalar,
    pub radius: Rat,
}

/// Limit of a nested chain of closed discs, inferred from a finite sample.
///
/// The radius tail must either stabilize or be exactly geometric; geometric
/// tails are summed in closed form, so chains like `r_j = 1/p + p^-j`
/// resolve to their true limits.  A zero limit radius gives a type I point
/// (the centers are Cauchy by nestedness); a positive limit radius must be
/// a power of p and gives the disc point, after checking that the tail
/// centers agree within it.
pub fn nested_disc_limit(chain: &[ChainDisc]) -> Result<BerkPoint, BerkError> {
    if chain.len() < 3 {
        return Err(BerkError::LimitUndetermined);
    }
    let cfg = *chain[0].center.config();
    for w in chain.windows(2) {
        if w[1].radius > w[0].radius || w[1].radius <= Rat::zero() {
            return Err(BerkError::NotNested);
        }
        let d = w[1].center.sub_raw(&w[0].center);
        if !scalar_abs_le_rat(&d, &w[0].radius, cfg.prime()) {
            return Err(BerkError::NotNested);
        }
    }
    let n = chain.len();
    let (r2, r1, r0) = (chain[n - 3].radius, chain[n - 2].radius, chain[n - 1].radius);
    let limit = if r0 == r1 {
        r0
    } else {
        let d1 = r1 - r2;
        let d0 = r0 - r1;
        if d1.is_zero() {
            return Err(BerkError::LimitUndetermined);
        }
        let q = d0 / d1;
        if q.abs() >= Rat::from_integer(1) || q.is_zero() {
            return Err(BerkError::LimitUndetermined);
        }
        if n >= 4 {
            let d2 = r2 - chain[n - 4].radius;
            if !d2.is_zero() && d1 / d2 != q {
                return Err(BerkError::LimitUndetermined);
            }
        }
        r0 + d0 * q / (Rat::from_integer(1) - q)
    };
    let last = &chain[n - 1];
    if limit.is_zero() {
        return Ok(BerkPoint::TypeI(last.center.clone()));
    }
    if limit < Rat::zero() {
        return Err(BerkError::TypeIVLimit);
    }
    let rexp = rat_as_p_power(&limit, cfg.prime()).ok_or(BerkError::UnrepresentableRadius)?;
    for c in &chain[n.saturating_sub(3)..] {
        let d = last.center.sub_raw(&c.center);
        if !scalar_abs_le_rat(&d, &limit, cfg.prime()) {
            return Err(BerkError::TypeIVLimit);
        }
    }
    Ok(BerkPoint::Disc { center: last.center.clone(), rexp: RadiusExp::from_int(rexp) })
}

/// `|x| <= r` for a rational radius, via `p^(-2 val) <= r^2`.
fn scalar_abs_le_rat(x: &PadicScalar, r: &Rat, p: u64) -> bool {
    let v = match x.val_info() {
        ValInfo::Zero => return true,
        ValInfo::Exact(v) => v,
        ValInfo::AtLeast(f) => f,
    };
    let tv = v * rat(2, 1);
    debug_assert!(tv.is_integer());
    let e = tv.to_integer();
    let r2 = r * r;
    if e >= 0 {
        Rat::from_integer(1) <= r2 * Rat::from_integer((p as i128).pow(e as u32))
    } else {
        Rat::from_integer((p as i128).pow((-e) as u32)) <= r2
    }
}

/// Write a positive rational as `p^-k`, if it is one.
fn rat_as_p_power(r: &Rat, p: u64) -> Option<i64> {
    let mut num = *r.numer();
    let mut den = *r.denom();
    let p = p as i128;
    let mut k = 0i64;
    while num % p == 0 {
        num /= p;
        k -= 1;
    }
    while den % p == 0 {
        den /= p;
        k += 1;
    }
    if num == 1 && den == 1 {
        Some(k)
    } else {
        None
    }
}
