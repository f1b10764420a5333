//! Laurent-polynomial analysis on discs and annuli: Weierstrass degrees,
//! zero counting, the metric scaling law, range analysis on basic open
//! sets, and the injectivity-ratio criterion as a checkable routine.
//!
//! Analytic functions are represented by Laurent polynomials (finite
//! support) or by rational functions; every statement exercised here is
//! determined by finitely many dominant terms, and all comparisons are
//! exact exponent arithmetic.

use crate::berk::{
    gauss_seminorm, hyperbolic_distance, seminorm_at, BerkError, BerkPoint, Norm, RadiusExp,
};
use crate::padic::scalar::rat;
use crate::padic::{FieldConfig, NewtonPolygon, PadicError, PadicScalar, Rat, ResiduePoly, ValInfo};
use crate::poly::Poly;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SeriesError {
    #[error("the zero function has no Weierstrass degree")]
    ZeroFunction,
    #[error("inner and outer Weierstrass degrees split on the sub-annulus")]
    DegreesSplit,
    #[error("hypothesis violated: {0}")]
    HypothesisFails(String),
    #[error("function has zeros on the region")]
    HasZeros,
    #[error("function has poles on the region")]
    NotAnalytic,
    #[error("malformed region: {0}")]
    BadRegion(String),
    #[error("image point not representable over the working field")]
    Unsupported,
    #[error(transparent)]
    Berk(#[from] BerkError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// Finite Laurent series `sum b_k (z - a)^k` on the open annulus
/// `r < |z - a| < s`, stored as radius exponents with `inner_exp >
/// outer_exp` (the inner radius is the smaller one).
#[derive(Clone, Debug)]
pub struct LaurentSegment {
    pub center: PadicScalar,
    pub coeffs: BTreeMap<i64, PadicScalar>,
    pub inner_exp: RadiusExp,
    pub outer_exp: RadiusExp,
}

impl LaurentSegment {
    pub fn new(
        center: PadicScalar,
        coeffs: BTreeMap<i64, PadicScalar>,
        inner_exp: RadiusExp,
        outer_exp: RadiusExp,
    ) -> Result<Self, SeriesError> {
        if inner_exp <= outer_exp {
            return Err(SeriesError::BadRegion("inner radius must be smaller than outer".into()));
        }
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_exact_zero()).collect();
        Ok(LaurentSegment { center, coeffs, inner_exp, outer_exp })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent of `|b_k| t^k` for the term at index `k`.
    fn term_exp(&self, k: i64, t: &RadiusExp) -> Result<RadiusExp, SeriesError> {
        let c = &self.coeffs[&k];
        match c.val_info() {
            ValInfo::Exact(v) => {
                Ok(RadiusExp::from_rat(v).add(&t.scale(Rat::from_integer(k as i128))))
            }
            _ => Err(SeriesError::Padic(PadicError::PrecisionExhausted { min: 0 })),
        }
    }

    /// Indices attaining the maximum of `|b_k| t^k` (minimum exponent).
    fn maximizers(&self, t: &RadiusExp, skip_zero_index: bool) -> Result<Vec<i64>, SeriesError> {
        let mut best: Option<RadiusExp> = None;
        let mut idx: Vec<i64> = vec![];
        for &k in self.coeffs.keys() {
            if skip_zero_index && k == 0 {
                continue;
            }
            let e = self.term_exp(k, t)?;
            match &best {
                None => {
                    best = Some(e);
                    idx = vec![k];
                }
                Some(b) => {
                    if e < *b {
                        best = Some(e);
                        idx = vec![k];
                    } else if e == *b {
                        idx.push(k);
                    }
                }
            }
        }
        Ok(idx)
    }

    /// Largest maximizing index at the inner radius.
    pub fn inner_wdeg(&self) -> Result<i64, SeriesError> {
        let idx = self.maximizers(&self.inner_exp, false)?;
        idx.last().copied().ok_or(SeriesError::ZeroFunction)
    }

    /// Smallest maximizing index at the outer radius.
    pub fn outer_wdeg(&self) -> Result<i64, SeriesError> {
        let idx = self.maximizers(&self.outer_exp, false)?;
        idx.first().copied().ok_or(SeriesError::ZeroFunction)
    }

    /// Number of zeros on the open annulus: outer minus inner degree.
    pub fn zero_count(&self) -> Result<usize, SeriesError> {
        let n = self.outer_wdeg()? - self.inner_wdeg()?;
        debug_assert!(n >= 0);
        Ok(n as usize)
    }

    /// Independent zero count through the Newton polygon of the underlying
    /// polynomial: root valuations strictly inside `(outer_exp, inner_exp)`.
    pub fn zero_count_by_polygon(&self) -> Result<usize, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::ZeroFunction);
        }
        let min_k = *self.coeffs.keys().next().unwrap();
        let max_k = *self.coeffs.keys().last().unwrap();
        let zero = PadicScalar::zero(self.center.config());
        let mut coeffs = vec![zero; (max_k - min_k + 1) as usize];
        for (&k, c) in &self.coeffs {
            coeffs[(k - min_k) as usize] = c.clone();
        }
        let np = NewtonPolygon::build(&coeffs)?;
        Ok(np
            .root_valuations()
            .iter()
            .filter(|(v, _)| {
                let ve = RadiusExp::from_rat(*v);
                ve > self.outer_exp && ve < self.inner_exp
            })
            .map(|(_, l)| l)
            .sum())
    }

    /// Image of the skeleton point `zeta(a, p^-t)` when `psi - b_0` has a
    /// unique dominant term at `t`; `DegreesSplit` when a tie certifies a
    /// zero of `psi - b_0` at that radius.
    pub fn push_skeleton(&self, t: &RadiusExp) -> Result<BerkPoint, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::ZeroFunction);
        }
        let cfg = *self.center.config();
        let b0 = self.coeffs.get(&0).cloned().unwrap_or_else(|| PadicScalar::zero(&cfg));
        if self.coeffs.keys().all(|&k| k == 0) {
            return Ok(BerkPoint::TypeI(b0));
        }
        let idx = self.maximizers(t, true)?;
        if idx.len() != 1 {
            return Err(SeriesError::DegreesSplit);
        }
        let e = self.term_exp(idx[0], t)?;
        Ok(BerkPoint::disc(b0, e))
    }

    /// Exact check of the metric scaling law: with `psi - b_0` of equal
    /// inner and outer Weierstrass degree `N` on the annulus,
    /// `d_H(psi(inner), psi(outer)) = |N| d_H(inner, outer)`.  Both sides
    /// are computed through independent routes and returned.
    pub fn scaling_check(&self) -> Result<ScalingWitness, SeriesError> {
        let centered = self.drop_constant();
        if centered.is_zero() {
            return Err(SeriesError::HypothesisFails("psi - b0 is zero".into()));
        }
        let n_in = centered.inner_wdeg()?;
        let n_out = centered.outer_wdeg()?;
        if n_in != n_out {
            return Err(SeriesError::HypothesisFails(format!(
                "Weierstrass degrees split: inner {n_in}, outer {n_out}"
            )));
        }
        let n = n_in;
        // route 1: push both skeleton endpoints and measure in the image
        let e_in = centered.boundary_image_exp(&self.inner_exp)?;
        let e_out = centered.boundary_image_exp(&self.outer_exp)?;
        let b0 = self
            .coeffs
            .get(&0)
            .cloned()
            .unwrap_or_else(|| PadicScalar::zero(self.center.config()));
        let img_in = BerkPoint::disc(b0.clone(), e_in);
        let img_out = BerkPoint::disc(b0, e_out);
        let lhs = hyperbolic_distance(&img_in, &img_out)?;
        // route 2: |N| times the source annulus modulus
        let src_in = BerkPoint::disc(self.center.clone(), self.inner_exp);
        let src_out = BerkPoint::disc(self.center.clone(), self.outer_exp);
        let modulus = hyperbolic_distance(&src_in, &src_out)?;
        let rhs = modulus.scale(Rat::from_integer(n.abs() as i128));
        if lhs != rhs {
            return Err(SeriesError::HypothesisFails(format!(
                "scaling equality violated: lhs {lhs}, rhs {rhs}"
            )));
        }
        Ok(ScalingWitness { lhs, rhs, degree: n })
    }

    /// `|psi - b_0|` exponent at boundary radius exponent `t` (max-term
    /// value; the continuous boundary extension tolerates ties).
    fn boundary_image_exp(&self, t: &RadiusExp) -> Result<RadiusExp, SeriesError> {
        let mut best: Option<RadiusExp> = None;
        for &k in self.coeffs.keys() {
            if k == 0 {
                continue;
            }
            let e = self.term_exp(k, t)?;
            best = Some(match best {
                None => e,
                Some(b) => b.min(e),
            });
        }
        best.ok_or(SeriesError::ZeroFunction)
    }

    fn drop_constant(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.remove(&0);
        LaurentSegment {
            center: self.center.clone(),
            coeffs,
            inner_exp: self.inner_exp,
            outer_exp: self.outer_exp,
        }
    }
}

/// Exact equality witness returned by `scaling_check`.
#[derive(Clone, Debug)]
pub struct ScalingWitness {
    pub lhs: RadiusExp,
    pub rhs: RadiusExp,
    pub degree: i64,
}

/// A quotient of polynomials over the working field.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    pub num: Poly<PadicScalar>,
    pub den: Poly<PadicScalar>,
}

impl RationalFunction {
    pub fn new(num: Poly<PadicScalar>, den: Poly<PadicScalar>) -> Self {
        RationalFunction { num, den }
    }

    pub fn poly(num: Poly<PadicScalar>, cfg: &FieldConfig) -> Self {
        RationalFunction { num, den: Poly::constant(PadicScalar::one(cfg)) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        RationalFunction {
            num: self.num.mul(&o.den).sub(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
    }

    /// `|num|_x / |den|_x` at a non-infinity point.
    pub fn norm_at(&self, x: &BerkPoint) -> Result<Norm, SeriesError> {
        let n = seminorm_at(&self.num, x)?;
        let d = seminorm_at(&self.den, x)?;
        n.div(&d).ok_or(SeriesError::NotAnalytic)
    }
}

/// Image of a disc point under a rational function.
///
/// Takes the direct-formula route when the denominator is zero-free on the
/// closed disc, the reciprocal-chart route when instead the numerator is,
/// and otherwise conjugates the source to the Gauss point and resolves the
/// image by successive recentering (type II sources only).
pub fn rational_image_of_disc(
    f: &RationalFunction,
    center: &PadicScalar,
    rexp: &RadiusExp,
) -> Result<BerkPoint, SeriesError> {
    let cfg = *center.config();
    let one = PadicScalar::one(&cfg);
    let num = f.num.compose_affine(center, &one);
    let den = f.den.compose_affine(center, &one);
    if zero_free_on_closed_disc(&den, rexp)? {
        return direct_disc_image(&num, &den, rexp, &cfg);
    }
    if zero_free_on_closed_disc(&num, rexp)? {
        let img = direct_disc_image(&den, &num, rexp, &cfg)?;
        return invert_point(&img);
    }
    // zeros of both polynomials meet the disc: resolve via the Gauss chart
    if !rexp.is_rational() || !cfg.in_value_group(rexp.a) {
        return Err(SeriesError::Unsupported);
    }
    let scale = PadicScalar::uniformizer_pow(&cfg, rexp.a)?;
    let zero = PadicScalar::zero(&cfg);
    let num_g = num.compose_affine(&zero, &scale);
    let den_g = den.compose_affine(&zero, &scale);
    image_of_gauss(&num_g, &den_g, &cfg)
}

/// No roots of `p` (already recentred) lie in the closed disc of radius
/// exponent `rexp`: all polygon root valuations < rexp and no root at 0.
fn zero_free_on_closed_disc(p: &Poly<PadicScalar>, rexp: &RadiusExp) -> Result<bool, SeriesError> {
    if p.is_zero() {
        return Ok(false);
    }
    if p.degree() == Some(0) {
        return Ok(true);
    }
    let np = NewtonPolygon::build(p.coeffs())?;
    if np.vanishing_order > 0 {
        return Ok(false);
    }
    Ok(np.root_valuations().iter().all(|(v, _)| RadiusExp::from_rat(*v) < *rexp))
}

/// `f(a)`-centered image for a pole-free closed disc: radius
/// `|P Q(a) - P(a) Q| / (|Q| |Q(a)|)`.
fn direct_disc_image(
    num: &Poly<PadicScalar>,
    den: &Poly<PadicScalar>,
    rexp: &RadiusExp,
    cfg: &FieldConfig,
) -> Result<BerkPoint, SeriesError> {
    let zero = PadicScalar::zero(cfg);
    let p_a = num.coeff_or_zero(0, &zero);
    let q_a = den.coeff_or_zero(0, &zero);
    let b = p_a.div_raw(&q_a)?;
    let cross = num.scale(&q_a).sub(&den.scale(&p_a));
    // the constant term of the cross polynomial vanishes identically
    let mut cross_coeffs = cross.coeffs().to_vec();
    if !cross_coeffs.is_empty() {
        cross_coeffs[0] = zero.clone();
    }
    let cross = Poly::new(cross_coeffs);
    let cross_norm = gauss_seminorm(cross.coeffs(), rexp)?;
    let q_norm = gauss_seminorm(den.coeffs(), rexp)?;
    let qa_norm = Norm::of(&q_a)?;
    let radius = cross_norm.div(&q_norm.mul(&qa_norm)).ok_or(SeriesError::NotAnalytic)?;
    match radius {
        Norm::Zero => Ok(BerkPoint::TypeI(b)),
        Norm::Pos(e) => Ok(BerkPoint::disc(b, e)),
    }
}

/// Image of a point under `w -> 1/w`.
pub fn invert_point(pt: &BerkPoint) -> Result<BerkPoint, SeriesError> {
    match pt {
        BerkPoint::Infinity => Err(SeriesError::Unsupported),
        BerkPoint::TypeI(x) => {
            if x.is_exact_zero() {
                Ok(BerkPoint::Infinity)
            } else {
                let one = PadicScalar::one(x.config());
                Ok(BerkPoint::TypeI(one.div_raw(x)?))
            }
        }
        BerkPoint::Disc { center, rexp } => {
            let contains_zero = match center.val_info() {
                ValInfo::Zero => true,
                ValInfo::Exact(v) => RadiusExp::from_rat(v) >= *rexp,
                ValInfo::AtLeast(fl) => {
                    if RadiusExp::from_rat(fl) >= *rexp {
                        true
                    } else {
                        return Err(SeriesError::Padic(PadicError::PrecisionExhausted { min: 0 }));
                    }
                }
            };
            if contains_zero {
                Ok(BerkPoint::disc(PadicScalar::zero(center.config()), rexp.scale(rat(-1, 1))))
            } else {
                let v = center.valuation()?;
                let one = PadicScalar::one(center.config());
                let inv = one.div_raw(center)?;
                // radius rho / |c|^2: exponent rexp - 2 val(c)
                let e = rexp.sub(&RadiusExp::from_rat(v * rat(2, 1)));
                Ok(BerkPoint::disc(inv, e))
            }
        }
    }
}

/// Jointly normalize a polynomial pair to max seminorm 1 at the Gauss point
/// and reduce coefficientwise; returns the normalization exponent too.
pub(crate) fn reduce_pair(
    num: &Poly<PadicScalar>,
    den: &Poly<PadicScalar>,
    cfg: &FieldConfig,
) -> Result<(ResiduePoly, ResiduePoly, Rat), SeriesError> {
    let mut min_val: Option<Rat> = None;
    for c in num.coeffs().iter().chain(den.coeffs()) {
        if let ValInfo::Exact(v) = c.val_info() {
            min_val = Some(match min_val {
                None => v,
                Some(m) => m.min(v),
            });
        }
    }
    let m = min_val.ok_or(SeriesError::Padic(PadicError::PrecisionExhausted { min: 0 }))?;
    let scale = PadicScalar::uniformizer_pow(cfg, -m)?;
    let rf = cfg.residue_field();
    let reduce_poly = |p: &Poly<PadicScalar>| -> Result<ResiduePoly, SeriesError> {
        let mut out = vec![];
        for c in p.coeffs() {
            let s = c.mul_raw(&scale);
            let r = match s.val_info() {
                ValInfo::Zero => rf.zero(),
                ValInfo::Exact(v) if v > Rat::zero() => rf.zero(),
                ValInfo::Exact(_) => s.reduce()?,
                ValInfo::AtLeast(fl) if fl > Rat::zero() => rf.zero(),
                ValInfo::AtLeast(_) => {
                    return Err(SeriesError::Padic(PadicError::PrecisionExhausted { min: 0 }))
                }
            };
            out.push(r);
        }
        Ok(ResiduePoly::new(rf, out))
    };
    Ok((reduce_poly(num)?, reduce_poly(den)?, m))
}

/// Image of the Gauss point under `P/Q` by successive recentering.
fn image_of_gauss(
    num: &Poly<PadicScalar>,
    den: &Poly<PadicScalar>,
    cfg: &FieldConfig,
) -> Result<BerkPoint, SeriesError> {
    let gauss = RadiusExp::zero();
    let num_norm = gauss_seminorm(num.coeffs(), &gauss)?;
    let den_norm = gauss_seminorm(den.coeffs(), &gauss)?;
    let fnorm = num_norm.div(&den_norm).ok_or(SeriesError::NotAnalytic)?;
    if fnorm > Norm::one() {
        // image is nearer to infinity: compute in the reciprocal chart
        let img = image_of_gauss(den, num, cfg)?;
        return invert_point(&img);
    }
    let mut c = PadicScalar::zero(cfg);
    let max_iter = 2 * (cfg.precision() + 8) as usize;
    for _ in 0..max_iter {
        // residual (f - c), with |f - c|_gauss = A
        let shifted = num.sub(&den.scale(&c));
        let a_norm = gauss_seminorm(shifted.coeffs(), &gauss)?
            .div(&den_norm)
            .ok_or(SeriesError::NotAnalytic)?;
        let Norm::Pos(a_exp) = a_norm else {
            return Ok(BerkPoint::TypeI(c)); // constant map
        };
        if !a_exp.is_rational() || !cfg.in_value_group(a_exp.a) {
            return Err(SeriesError::Unsupported);
        }
        let sigma = PadicScalar::uniformizer_pow(cfg, a_exp.a)?;
        let (rn, rd, _) = reduce_pair(&shifted, &den.scale(&sigma), cfg)?;
        let g = rn.gcd(&rd);
        let rn_c = rn.div_rem(&g).expect("gcd divides").0;
        let rd_c = rd.div_rem(&g).expect("gcd divides").0;
        let const_red = rn_c.degree().unwrap_or(0) == 0 && rd_c.degree().unwrap_or(0) == 0;
        if !const_red {
            // (f - c)/sigma fixes the Gauss point: image is zeta(c, A)
            return Ok(BerkPoint::disc(c, a_exp));
        }
        let gamma = rn_c.coeff(0).div(&rd_c.coeff(0)).ok_or(SeriesError::NotAnalytic)?;
        let step = PadicScalar::lift(cfg, &gamma).mul_raw(&sigma);
        c = c.add_raw(&step);
    }
    Err(SeriesError::Padic(PadicError::PrecisionExhausted { min: 0 }))
}

/// The region `U = D(0, 1/r)` minus the closed discs `D(a_i, r)`, with all
/// arm centers in distinct finite tangent directions at the Gauss point.
#[derive(Clone, Debug)]
pub struct BasicOpenRegion {
    pub arms: Vec<PadicScalar>,
    pub rexp: RadiusExp,
}

impl BasicOpenRegion {
    pub fn new(arms: Vec<PadicScalar>, rexp: RadiusExp) -> Result<Self, SeriesError> {
        if rexp <= RadiusExp::zero() {
            return Err(SeriesError::BadRegion("need r < 1".into()));
        }
        for a in &arms {
            if Norm::of(a).map_err(SeriesError::Padic)? > Norm::one() {
                return Err(SeriesError::BadRegion("arm centers must lie in the unit disc".into()));
            }
        }
        for (i, a) in arms.iter().enumerate() {
            for b in arms.iter().skip(i + 1) {
                let d = Norm::of(&a.sub_raw(b)).map_err(SeriesError::Padic)?;
                if d != Norm::one() {
                    return Err(SeriesError::BadRegion(
                        "arm centers must lie in distinct tangent directions".into(),
                    ));
                }
            }
        }
        Ok(BasicOpenRegion { arms, rexp })
    }

    /// Roots of `p` inside the region, counted with multiplicity through
    /// Newton polygons: roots in `D(0, 1/r)` minus roots in the closed arm
    /// discs.
    pub fn roots_inside(&self, p: &Poly<PadicScalar>) -> Result<usize, SeriesError> {
        if p.is_zero() {
            return Err(SeriesError::ZeroFunction);
        }
        if p.degree() == Some(0) {
            return Ok(0);
        }
        let big = NewtonPolygon::build(p.coeffs())?;
        let outer_exp = self.rexp.scale(rat(-1, 1));
        let mut total = big.vanishing_order
            + big
                .root_valuations()
                .iter()
                .filter(|(v, _)| RadiusExp::from_rat(*v) > outer_exp)
                .map(|(_, l)| l)
                .sum::<usize>();
        for a in &self.arms {
            total -= self.roots_in_arm_disc(p, a)?;
        }
        Ok(total)
    }

    /// Roots in one closed arm disc.
    fn roots_in_arm_disc(&self, p: &Poly<PadicScalar>, arm: &PadicScalar) -> Result<usize, SeriesError> {
        if p.degree().unwrap_or(0) == 0 {
            return Ok(0);
        }
        let shifted = p.compose_affine(arm, &PadicScalar::one(arm.config()));
        let np = NewtonPolygon::build(shifted.coeffs())?;
        Ok(np.vanishing_order
            + np.root_valuations()
                .iter()
                .filter(|(v, _)| RadiusExp::from_rat(*v) >= self.rexp)
                .map(|(_, l)| l)
                .sum::<usize>())
    }

    /// Weierstrass degree on the arm annulus toward `arm`, by root counting.
    fn degree_toward(&self, f: &RationalFunction, arm: &PadicScalar) -> Result<i64, SeriesError> {
        Ok(self.roots_in_arm_disc(&f.num, arm)? as i64
            - self.roots_in_arm_disc(&f.den, arm)? as i64)
    }

    /// Degree on the annulus toward infinity: roots with `|root| <= 1`.
    fn degree_toward_infinity(&self, f: &RationalFunction) -> Result<i64, SeriesError> {
        let count = |p: &Poly<PadicScalar>| -> Result<i64, SeriesError> {
            if p.degree().unwrap_or(0) == 0 {
                return Ok(0);
            }
            let np = NewtonPolygon::build(p.coeffs())?;
            Ok((np.vanishing_order
                + np.root_valuations()
                    .iter()
                    .filter(|(v, _)| *v >= Rat::zero())
                    .map(|(_, l)| l)
                    .sum::<usize>()) as i64)
        };
        Ok(count(&f.num)? - count(&f.den)?)
    }
}

/// Reported dichotomy for the range of a zero-free function on the region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentDichotomy {
    /// `psi(gauss)` lies on the segment `[0, inf]`.
    MeetsSegment,
    /// `|psi|` is constant; the range misses the segment.
    MissesSegment,
}

/// Output of `basic_open_analysis`.
#[derive(Clone, Debug)]
pub struct BasicOpenReport {
    pub arm_boundary_values: Vec<BerkPoint>,
    pub outer_boundary_value: BerkPoint,
    pub gauss_image: BerkPoint,
    pub dichotomy: SegmentDichotomy,
    pub arm_degrees: Vec<i64>,
    pub infinity_degree: i64,
    pub reduction_degree: usize,
    pub reduction_display: String,
    /// `R = |psi(gauss)| r^-d`: the range stays inside `D(0, R)`.
    pub range_bound: Norm,
    pub attained_max: Norm,
}

/// Range and direction analysis of a zero-free analytic function on a basic
/// open region.
pub fn basic_open_analysis(
    f: &RationalFunction,
    region: &BasicOpenRegion,
) -> Result<BasicOpenReport, SeriesError> {
    let cfg = *f
        .num
        .coeffs()
        .first()
        .or_else(|| f.den.coeffs().first())
        .ok_or(SeriesError::ZeroFunction)?
        .config();
    if region.roots_inside(&f.den)? != 0 {
        return Err(SeriesError::NotAnalytic);
    }
    if region.roots_inside(&f.num)? != 0 {
        return Err(SeriesError::HasZeros);
    }
    let mut arm_boundary_values = vec![];
    for a in &region.arms {
        arm_boundary_values.push(rational_image_of_disc(f, a, &region.rexp)?);
    }
    let zero = PadicScalar::zero(&cfg);
    let outer_boundary_value = rational_image_of_disc(f, &zero, &region.rexp.scale(rat(-1, 1)))?;
    let gauss_image = rational_image_of_disc(f, &zero, &RadiusExp::zero())?;
    let dichotomy = match &gauss_image {
        BerkPoint::Disc { center, rexp } => {
            let on = match Norm::of(center) {
                Ok(n) => n <= Norm::Pos(*rexp),
                Err(_) => true,
            };
            if on {
                SegmentDichotomy::MeetsSegment
            } else {
                SegmentDichotomy::MissesSegment
            }
        }
        _ => SegmentDichotomy::MissesSegment,
    };
    let (rn, rd, _) = reduce_pair(&f.num, &f.den, &cfg)?;
    let g = rn.gcd(&rd);
    let rn_c = rn.div_rem(&g).expect("gcd divides").0;
    let rd_c = rd.div_rem(&g).expect("gcd divides").0;
    let reduction_degree = rn_c.degree().unwrap_or(0).max(rd_c.degree().unwrap_or(0));
    let reduction_display = format!("({}) / ({})", rn_c.display("z~"), rd_c.display("z~"));
    // (c): per-direction Weierstrass degrees through both routes
    let mut arm_degrees = vec![];
    for a in &region.arms {
        let by_valuation = region.degree_toward(f, a)?;
        let at = a.reduce()?;
        let by_residue = rn_c.vanishing_order(&at) as i64 - rd_c.vanishing_order(&at) as i64;
        if by_valuation != by_residue {
            return Err(SeriesError::HypothesisFails(format!(
                "direction degree mismatch: polygon {by_valuation}, reduction {by_residue}"
            )));
        }
        arm_degrees.push(by_valuation);
    }
    let infinity_degree = region.degree_toward_infinity(f)?;
    let by_residue_inf = rn_c.degree().unwrap_or(0) as i64 - rd_c.degree().unwrap_or(0) as i64;
    if infinity_degree != by_residue_inf {
        return Err(SeriesError::HypothesisFails(format!(
            "infinity degree mismatch: polygon {infinity_degree}, reduction {by_residue_inf}"
        )));
    }
    // (d): certified range bound R = |psi(gauss)| r^-d
    let gauss_norm = f.norm_at(&BerkPoint::gauss(&cfg))?;
    let range_bound = match gauss_norm {
        Norm::Zero => Norm::Zero,
        Norm::Pos(e) => {
            Norm::Pos(e.sub(&region.rexp.scale(Rat::from_integer(reduction_degree as i128))))
        }
    };
    let mut attained_max = Norm::Zero;
    for pt in arm_boundary_values.iter().chain([&outer_boundary_value, &gauss_image]) {
        let n = pt.coord_norm()?;
        if n > attained_max {
            attained_max = n;
        }
    }
    if attained_max > range_bound {
        return Err(SeriesError::HypothesisFails(format!(
            "range bound exceeded: attained {attained_max}, bound {range_bound}"
        )));
    }
    Ok(BasicOpenReport {
        arm_boundary_values,
        outer_boundary_value,
        gauss_image,
        dichotomy,
        arm_degrees,
        infinity_degree,
        reduction_degree,
        reduction_display,
        range_bound,
        attained_max,
    })
}

/// Exact constant returned by the injectivity-ratio check.
#[derive(Clone, Debug)]
pub struct RatioWitness {
    /// `t_2 / t_1` as a norm.
    pub ratio: Norm,
    pub probes: usize,
}

/// Verify the injectivity-ratio criterion: with `psi_1`, `psi_2` and their
/// difference zero-free on the region, and `t_2 = |psi_2(x_0)|` inside the
/// window determined by the distance datum `r_0`, the ratio
/// `|psi_2(x)| / |psi_1(x)|` equals the constant `t_2 / t_1` on the region.
/// Equality is asserted at all arm endpoints, the Gauss point, the outer
/// boundary, the base point and 50 deterministic interior disc points.
pub fn injectivity_ratio_check(
    f1: &RationalFunction,
    f2: &RationalFunction,
    region: &BasicOpenRegion,
    x0: &BerkPoint,
) -> Result<RatioWitness, SeriesError> {
    let cfg = *f1.num.coeffs().first().ok_or(SeriesError::ZeroFunction)?.config();
    for (idx, f) in [f1, f2].iter().enumerate() {
        if region.roots_inside(&f.den)? != 0 {
            return Err(SeriesError::HypothesisFails(format!("psi_{} has poles", idx + 1)));
        }
        if region.roots_inside(&f.num)? != 0 {
            return Err(SeriesError::HypothesisFails(format!(
                "clause (1): psi_{} has zeros",
                idx + 1
            )));
        }
    }
    let diff = f1.sub(f2);
    if region.roots_inside(&diff.num)? != 0 {
        return Err(SeriesError::HypothesisFails("clause (1): psi_1 - psi_2 has zeros".into()));
    }
    // distance datum r_0 at x_0
    let mut r0 = Norm::one();
    for a in &region.arms {
        let d = x0.dist_to(a)?;
        if d < r0 {
            r0 = d;
        }
    }
    match x0.coord_norm()? {
        Norm::Zero => {}
        Norm::Pos(e) => {
            let inv = Norm::Pos(e.scale(rat(-1, 1)));
            if inv < r0 {
                r0 = inv;
            }
        }
    }
    let t1 = f1.norm_at(x0)?;
    let t2 = f2.norm_at(x0)?;
    if t1.is_zero() || t2.is_zero() {
        return Err(SeriesError::HypothesisFails("zero value at the base point".into()));
    }
    if !(t2 < t1) {
        return Err(SeriesError::HypothesisFails("clause (2): need t2 < t1".into()));
    }
    let r_norm = Norm::Pos(region.rexp);
    let lower = if r0 < Norm::one() {
        let ratio = r_norm.div(&r0).expect("r0 positive");
        r0.max(ratio).mul(&t1)
    } else {
        r_norm.mul(&t1)
    };
    if !(lower < t2) {
        return Err(SeriesError::HypothesisFails(
            "clause (2)/(3): t2 is not above the window floor".into(),
        ));
    }
    let want = t2.div(&t1).expect("t1 positive");
    let mut probes: Vec<BerkPoint> = vec![];
    for a in &region.arms {
        probes.push(BerkPoint::disc(a.clone(), region.rexp));
    }
    probes.push(BerkPoint::gauss(&cfg));
    probes.push(BerkPoint::disc(PadicScalar::zero(&cfg), region.rexp.scale(rat(-1, 1))));
    probes.push(x0.clone());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_1e11);
    while probes.len() < 54 {
        let c = PadicScalar::from_integer(&cfg, rng.gen_range(-200..200));
        // any disc point with radius strictly between r and 1, centered in
        // the unit disc, lies in the region
        let den: i128 = *region.rexp.a.denom();
        let num_max = (*region.rexp.a.numer()).max(1);
        let num = rng.gen_range(1..=num_max);
        let e = RadiusExp::from_rat(Rat::new(num, den));
        if e <= RadiusExp::zero() || e > region.rexp {
            continue;
        }
        probes.push(BerkPoint::disc(c, e));
    }
    for pt in &probes {
        let n1 = f1.norm_at(pt)?;
        let n2 = f2.norm_at(pt)?;
        let got = n2.div(&n1).ok_or(SeriesError::NotAnalytic)?;
        if got != want {
            return Err(SeriesError::HypothesisFails(format!(
                "ratio {got} differs from {want} at probe {pt}"
            )));
        }
    }
    Ok(RatioWitness { ratio: want, probes: probes.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> FieldConfig {
        FieldConfig::base(3, 60).unwrap()
    }

    fn sc(cfg: &FieldConfig, n: i64, d: i64) -> PadicScalar {
        PadicScalar::from_rational(cfg, n, d).unwrap()
    }

    fn segment(cfg: &FieldConfig, terms: &[(i64, i64, i64)], inner: i64, outer: i64) -> LaurentSegment {
        let coeffs = terms.iter().map(|&(k, n, d)| (k, sc(cfg, n, d))).collect::<BTreeMap<_, _>>();
        LaurentSegment::new(
            PadicScalar::zero(cfg),
            coeffs,
            RadiusExp::from_int(inner),
            RadiusExp::from_int(outer),
        )
        .unwrap()
    }

    #[test]
    fn weierstrass_degrees() {
        let cfg = f3();
        // z + 3 z^2 on (3^-2, 1)
        let s = segment(&cfg, &[(1, 1, 1), (2, 3, 1)], 2, 0);
        assert_eq!(s.inner_wdeg().unwrap(), 1);
        assert_eq!(s.outer_wdeg().unwrap(), 1);
        assert_eq!(s.zero_count().unwrap(), 0);
        // z^-1 + z on (3^-1, 3)
        let s2 = segment(&cfg, &[(-1, 1, 1), (1, 1, 1)], 1, -1);
        assert_eq!(s2.inner_wdeg().unwrap(), -1);
        assert_eq!(s2.outer_wdeg().unwrap(), 1);
        assert_eq!(s2.zero_count().unwrap(), 2);
        assert_eq!(s2.zero_count_by_polygon().unwrap(), 2);
        // constant
        let s3 = segment(&cfg, &[(0, 7, 1)], 1, -1);
        assert_eq!(s3.inner_wdeg().unwrap(), 0);
        assert_eq!(s3.outer_wdeg().unwrap(), 0);
        assert_eq!(s3.zero_count().unwrap(), 0);
        // z^2 - z on (3^-1, 3)
        let s4 = segment(&cfg, &[(1, -1, 1), (2, 1, 1)], 1, -1);
        assert_eq!(s4.outer_wdeg().unwrap(), 2);
        assert_eq!(s4.inner_wdeg().unwrap(), 1);
        assert_eq!(s4.zero_count().unwrap(), 1);
        assert_eq!(s4.zero_count_by_polygon().unwrap(), 1);
    }

    #[test]
    fn push_skeleton_examples() {
        let cfg = f3();
        let s = segment(&cfg, &[(2, 1, 1)], 2, 0);
        assert_eq!(
            s.push_skeleton(&RadiusExp::from_int(1)).unwrap(),
            BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(2))
        );
        let s2 = segment(&cfg, &[(0, 5, 1), (1, 1, 1)], 1, -1);
        let img = s2.push_skeleton(&RadiusExp::zero()).unwrap();
        assert_eq!(img, BerkPoint::gauss(&cfg));
        assert_eq!(img, BerkPoint::disc(sc(&cfg, 5, 1), RadiusExp::zero()));
        let s3 = segment(&cfg, &[(-1, 1, 1)], 2, 0);
        assert_eq!(
            s3.push_skeleton(&RadiusExp::from_int(1)).unwrap(),
            BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(-1))
        );
        // tie at |z| = 1 certifies a zero of psi - b0 there
        let s4 = segment(&cfg, &[(1, 1, 1), (2, 1, 1)], 1, -1);
        assert!(matches!(s4.push_skeleton(&RadiusExp::zero()), Err(SeriesError::DegreesSplit)));
    }

    #[test]
    fn scaling_examples() {
        let cfg = f3();
        let s = segment(&cfg, &[(2, 1, 1)], 2, 1);
        let w = s.scaling_check().unwrap();
        assert_eq!(w.lhs, RadiusExp::from_int(2));
        assert_eq!(w.degree, 2);
        let s2 = segment(&cfg, &[(1, 7, 9)], 2, 1);
        let w2 = s2.scaling_check().unwrap();
        assert_eq!(w2.lhs, w2.rhs);
        assert_eq!(w2.lhs, RadiusExp::from_int(1));
        let s3 = segment(&cfg, &[(-1, 1, 1)], 1, 0);
        let w3 = s3.scaling_check().unwrap();
        assert_eq!(w3.degree, -1);
        assert_eq!(w3.lhs, w3.rhs);
    }

    #[test]
    fn image_of_discs_under_rational_maps() {
        let cfg = f3();
        let z = Poly::from_rationals(&cfg, &[(0, 1), (1, 1)]);
        let one = Poly::from_rationals(&cfg, &[(1, 1)]);
        let inv = RationalFunction::new(one.clone(), z.clone());
        let img =
            rational_image_of_disc(&inv, &PadicScalar::zero(&cfg), &RadiusExp::from_int(1)).unwrap();
        assert_eq!(img, BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(-1)));
        let sq = RationalFunction::poly(Poly::from_rationals(&cfg, &[(0, 1), (0, 1), (1, 1)]), &cfg);
        let img2 =
            rational_image_of_disc(&sq, &PadicScalar::zero(&cfg), &RadiusExp::from_int(1)).unwrap();
        assert_eq!(img2, BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(2)));
        // z/(z-3) at the Gauss point: both charts vanish somewhere in the
        // disc; recentering resolves the image to zeta(1, 3^-1)
        let f = RationalFunction::new(z.clone(), Poly::from_rationals(&cfg, &[(-3, 1), (1, 1)]));
        let img3 = rational_image_of_disc(&f, &PadicScalar::zero(&cfg), &RadiusExp::zero()).unwrap();
        assert_eq!(img3, BerkPoint::disc(sc(&cfg, 1, 1), RadiusExp::from_int(1)));
    }

    #[test]
    fn basic_open_identity_function() {
        let cfg = f3();
        let region =
            BasicOpenRegion::new(vec![PadicScalar::zero(&cfg)], RadiusExp::from_int(1)).unwrap();
        let z = RationalFunction::poly(Poly::from_rationals(&cfg, &[(0, 1), (1, 1)]), &cfg);
        let rep = basic_open_analysis(&z, &region).unwrap();
        assert_eq!(rep.arm_degrees, vec![1]);
        assert_eq!(rep.reduction_degree, 1);
        assert_eq!(
            rep.arm_boundary_values[0],
            BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(1))
        );
        assert_eq!(rep.range_bound, Norm::Pos(RadiusExp::from_int(-1)));
        assert_eq!(rep.dichotomy, SegmentDichotomy::MeetsSegment);
    }

    #[test]
    fn basic_open_constant() {
        let cfg = f3();
        let region =
            BasicOpenRegion::new(vec![PadicScalar::zero(&cfg)], RadiusExp::from_int(1)).unwrap();
        let c = RationalFunction::poly(Poly::from_rationals(&cfg, &[(7, 9)]), &cfg);
        let rep = basic_open_analysis(&c, &region).unwrap();
        assert_eq!(rep.reduction_degree, 0);
        assert_eq!(rep.arm_degrees, vec![0]);
        assert_eq!(rep.range_bound, Norm::Pos(RadiusExp::from_int(-2)));
        assert_eq!(rep.gauss_image, BerkPoint::TypeI(sc(&cfg, 7, 9)));
        assert_eq!(rep.attained_max, Norm::Pos(RadiusExp::from_int(-2)));
    }

    #[test]
    fn basic_open_two_arms() {
        let cfg = f3();
        let region = BasicOpenRegion::new(
            vec![PadicScalar::zero(&cfg), PadicScalar::one(&cfg)],
            RadiusExp::from_int(1),
        )
        .unwrap();
        let f = RationalFunction::new(
            Poly::from_rationals(&cfg, &[(-1, 1), (1, 1)]),
            Poly::from_rationals(&cfg, &[(0, 1), (1, 1)]),
        );
        let rep = basic_open_analysis(&f, &region).unwrap();
        assert_eq!(rep.arm_degrees, vec![-1, 1]);
        assert_eq!(rep.infinity_degree, 0);
        assert_eq!(rep.reduction_degree, 1);
        assert_eq!(rep.range_bound, Norm::Pos(RadiusExp::from_int(-1)));
        assert_eq!(rep.attained_max, Norm::Pos(RadiusExp::from_int(-1)));
        let g = RationalFunction::poly(Poly::from_rationals(&cfg, &[(-2, 1), (1, 1)]), &cfg);
        assert!(matches!(basic_open_analysis(&g, &region), Err(SeriesError::HasZeros)));
    }

    #[test]
    fn injectivity_constant_pair() {
        let cfg = f3();
        let region =
            BasicOpenRegion::new(vec![PadicScalar::zero(&cfg)], RadiusExp::from_int(2)).unwrap();
        let f1 = RationalFunction::poly(Poly::from_rationals(&cfg, &[(1, 1)]), &cfg);
        let f2 = RationalFunction::poly(Poly::from_rationals(&cfg, &[(3, 1)]), &cfg);
        let w = injectivity_ratio_check(&f1, &f2, &region, &BerkPoint::gauss(&cfg)).unwrap();
        assert_eq!(w.ratio, Norm::Pos(RadiusExp::from_int(1)));
        let z = Poly::from_rationals(&cfg, &[(0, 1), (1, 1)]);
        let g1 = RationalFunction::poly(z.clone(), &cfg);
        let g2 = RationalFunction::poly(z.scale(&sc(&cfg, 3, 1)), &cfg);
        let w2 = injectivity_ratio_check(&g1, &g2, &region, &BerkPoint::gauss(&cfg)).unwrap();
        assert_eq!(w2.ratio, Norm::Pos(RadiusExp::from_int(1)));
        // window violation: |c| = p^-3 is at or below r = p^-2
        let bad = RationalFunction::poly(Poly::from_rationals(&cfg, &[(27, 1)]), &cfg);
        assert!(matches!(
            injectivity_ratio_check(&f1, &bad, &region, &BerkPoint::gauss(&cfg)),
            Err(SeriesError::HypothesisFails(_))
        ));
    }
}
