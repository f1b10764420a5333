//! Rational maps on the Berkovich line: evaluation, disc-point pushforward,
//! reduction at the Gauss point, local degree, period polynomials,
//! periodic-point solving and classification, and the two-letter coding of
//! Julia sets for the quadratic family.

use crate::berk::{BerkError, BerkPoint, Norm};
use crate::padic::scalar::{rat, HENSEL_MARGIN};
use crate::padic::{
    hensel, FieldConfig, NewtonPolygon, PadicError, PadicScalar, Rat, ResiduePoly, ValInfo,
};
use crate::poly::Poly;
use crate::series::{rational_image_of_disc, RationalFunction, SeriesError};
use num_traits::Zero;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynError {
    #[error("map is degenerate: resultant of the coordinate pair vanishes")]
    DegenerateMap,
    #[error("point is not fixed by the map")]
    NotFixed,
    #[error("irreducible factor of degree {degree} over the working field")]
    IrreducibleFactorTooLarge { degree: usize },
    #[error("inverse branch leaves the working field")]
    BranchLeavesField,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Berk(#[from] BerkError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// A degree-d rational map, stored as a dehomogenized coefficient pair
/// normalized so the largest coefficient absolute value is 1.
#[derive(Clone, Debug)]
pub struct RationalMap {
    num: Poly<PadicScalar>,
    den: Poly<PadicScalar>,
    degree: usize,
    cfg: FieldConfig,
}

impl RationalMap {
    /// Build a map from numerator and denominator polynomials; the pair is
    /// jointly normalized and its resultant checked against zero.
    pub fn new(num: Poly<PadicScalar>, den: Poly<PadicScalar>, cfg: &FieldConfig) -> Result<Self, DynError> {
        let map = Self::new_unchecked(num, den, cfg)?;
        if !map.resultant_nonzero()? {
            return Err(DynError::DegenerateMap);
        }
        Ok(map)
    }

    /// Normalize without the resultant check; for compositions and chart
    /// changes of maps that are already known to be nondegenerate.
    fn new_unchecked(
        num: Poly<PadicScalar>,
        den: Poly<PadicScalar>,
        cfg: &FieldConfig,
    ) -> Result<Self, DynError> {
        if num.is_zero() && den.is_zero() {
            return Err(DynError::DegenerateMap);
        }
        let degree = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
        if degree == 0 {
            return Err(DynError::DegenerateMap);
        }
        // joint normalization to max coefficient norm 1
        let mut min_val: Option<Rat> = None;
        for c in num.coeffs().iter().chain(den.coeffs()) {
            if let ValInfo::Exact(v) = c.val_info() {
                min_val = Some(match min_val {
                    None => v,
                    Some(m) => m.min(v),
                });
            }
        }
        let m = min_val.ok_or(DynError::DegenerateMap)?;
        let scale = PadicScalar::uniformizer_pow(cfg, -m)?;
        Ok(RationalMap { num: num.scale(&scale), den: den.scale(&scale), degree, cfg: *cfg })
    }

    pub fn from_rationals(cfg: &FieldConfig, num: &[(i64, i64)], den: &[(i64, i64)]) -> Result<Self, DynError> {
        Self::new(Poly::from_rationals(cfg, num), Poly::from_rationals(cfg, den), cfg)
    }

    pub fn config(&self) -> &FieldConfig {
        &self.cfg
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num(&self) -> &Poly<PadicScalar> {
        &self.num
    }

    pub fn den(&self) -> &Poly<PadicScalar> {
        &self.den
    }

    pub fn as_rational_function(&self) -> RationalFunction {
        RationalFunction::new(self.num.clone(), self.den.clone())
    }

    /// Homogeneous coefficient vectors padded to length `degree + 1`.
    fn hom_coeffs(&self) -> (Vec<PadicScalar>, Vec<PadicScalar>) {
        let zero = PadicScalar::zero(&self.cfg);
        let pad = |p: &Poly<PadicScalar>| {
            (0..=self.degree)
                .map(|i| p.coeff(i).cloned().unwrap_or_else(|| zero.clone()))
                .collect::<Vec<_>>()
        };
        (pad(&self.num), pad(&self.den))
    }

    /// Resultant of the homogeneous pair is nonzero (no common roots,
    /// including at infinity).
    fn resultant_nonzero(&self) -> Result<bool, DynError> {
        let (p, q) = self.hom_coeffs();
        let n = self.degree;
        let size = 2 * n;
        // Sylvester matrix rows: shifted copies of p and q
        let zero = PadicScalar::zero(&self.cfg);
        let mut m: Vec<Vec<PadicScalar>> = vec![vec![zero.clone(); size]; size];
        for i in 0..n {
            for (j, c) in p.iter().enumerate() {
                m[i][i + j] = c.clone();
            }
            for (j, c) in q.iter().enumerate() {
                m[n + i][i + j] = c.clone();
            }
        }
        // Gaussian elimination with max-norm pivoting; nonzero determinant
        // iff every column produces a certified pivot
        for col in 0..size {
            let mut pivot: Option<(usize, Rat)> = None;
            for (row, row_vals) in m.iter().enumerate().skip(col) {
                if let ValInfo::Exact(v) = row_vals[col].val_info() {
                    match pivot {
                        None => pivot = Some((row, v)),
                        Some((_, pv)) if v < pv => pivot = Some((row, v)),
                        _ => {}
                    }
                }
            }
            let Some((prow, _)) = pivot else {
                let all_zero = m.iter().skip(col).all(|r| r[col].is_exact_zero());
                if all_zero {
                    return Ok(false);
                }
                return Err(DynError::Padic(PadicError::PrecisionExhausted { min: 0 }));
            };
            m.swap(col, prow);
            let inv_pivot = m[col][col].clone();
            for row in (col + 1)..size {
                let factor = m[row][col].div_raw(&inv_pivot)?;
                if factor.is_exact_zero() {
                    continue;
                }
                for k in col..size {
                    let t = m[col][k].mul_raw(&factor);
                    m[row][k] = m[row][k].sub_raw(&t);
                }
            }
        }
        Ok(true)
    }

    /// Evaluate at a type I point (or infinity), in homogeneous coordinates.
    pub fn evaluate(&self, xi: &BerkPoint) -> Result<BerkPoint, DynError> {
        match xi {
            BerkPoint::Disc { .. } => self.push_disc_point(xi),
            BerkPoint::Infinity => {
                let dp = self.num.degree().unwrap_or(0);
                let dq = self.den.degree().unwrap_or(0);
                if dp > dq {
                    Ok(BerkPoint::Infinity)
                } else if dq > dp {
                    Ok(BerkPoint::TypeI(PadicScalar::zero(&self.cfg)))
                } else {
                    let l = self.num.leading().expect("nonzero").clone();
                    let m = self.den.leading().expect("nonzero").clone();
                    Ok(BerkPoint::TypeI(l.div_raw(&m)?))
                }
            }
            BerkPoint::TypeI(x) => {
                let px = self.num.eval(x);
                let qx = self.den.eval(x);
                match (px.val_info(), qx.val_info()) {
                    (_, ValInfo::Exact(_)) => Ok(BerkPoint::TypeI(px.div_raw(&qx)?)),
                    (ValInfo::Exact(_), ValInfo::Zero) => Ok(BerkPoint::Infinity),
                    (ValInfo::Exact(pv), ValInfo::AtLeast(qf)) if qf > pv => {
                        // |Q(x)| is far below |P(x)|: the image is a unit
                        // beyond the certified depth in the w = 1/z chart
                        Ok(BerkPoint::Infinity)
                    }
                    _ => Err(DynError::Padic(PadicError::PrecisionExhausted { min: 0 })),
                }
            }
        }
    }

    /// Image of a disc point under the map.
    pub fn push_disc_point(&self, xi: &BerkPoint) -> Result<BerkPoint, DynError> {
        let BerkPoint::Disc { center, rexp } = xi else {
            return Err(DynError::HypothesisViolated("push requires a disc point".into()));
        };
        Ok(rational_image_of_disc(&self.as_rational_function(), center, rexp)?)
    }

    /// The map in the reciprocal chart: `w -> 1 / f(1/w)`.
    pub fn swap_chart(&self) -> Result<RationalMap, DynError> {
        let (p, q) = self.hom_coeffs();
        let rev = |v: &[PadicScalar]| {
            let mut c = v.to_vec();
            c.reverse();
            Poly::new(c)
        };
        RationalMap::new_unchecked(rev(&q), rev(&p), &self.cfg)
    }

    /// Conjugate by the affine chart `z = a + c w`: returns
    /// `w -> (f(a + c w) - a) / c`.
    pub fn conjugate_affine(&self, a: &PadicScalar, c: &PadicScalar) -> Result<RationalMap, DynError> {
        let pm = self.num.compose_affine(a, c);
        let qm = self.den.compose_affine(a, c);
        // (P_M - a Q_M) / (c Q_M)
        let num = pm.sub(&qm.scale(a));
        let den = qm.scale(c);
        RationalMap::new_unchecked(num, den, &self.cfg)
    }

    /// Coefficientwise reduction of the normalized pair over the residue
    /// field, with common factors (including at infinity) cancelled.
    pub fn reduction_at_gauss(&self) -> Result<Reduction, DynError> {
        let (p, q) = self.hom_coeffs();
        let (rp, rq, _) = crate::series::reduce_pair(&Poly::new(p), &Poly::new(q), &self.cfg)?;
        Ok(Reduction::cancel(rp, rq, self.degree))
    }

    /// Derivative as a rational function: `(P' Q - P Q') / Q^2`.
    pub fn derivative(&self) -> RationalFunction {
        let dp = self.num.derivative(&self.cfg);
        let dq = self.den.derivative(&self.cfg);
        let num = dp.mul(&self.den).sub(&self.num.mul(&dq));
        RationalFunction::new(num, self.den.mul(&self.den))
    }

    /// `|f'(x)|` at a type I point (chart-correct at infinity is not
    /// handled here; callers swap charts first).
    pub fn derivative_norm_at(&self, x: &PadicScalar) -> Result<Norm, DynError> {
        let d = self.derivative();
        let nv = d.num.eval(x);
        let dv = d.den.eval(x);
        let n = match nv.val_info() {
            ValInfo::Zero => Norm::Zero,
            ValInfo::Exact(v) => Norm::from_val(v),
            ValInfo::AtLeast(f) if f >= big_val(&self.cfg) => Norm::Zero,
            ValInfo::AtLeast(_) => return Err(DynError::Padic(PadicError::PrecisionExhausted { min: 0 })),
        };
        let dn = Norm::of(&dv)?;
        n.div(&dn).ok_or(DynError::DegenerateMap)
    }

    /// Value of `f'` at a finite type I point (no pole there).
    pub fn derivative_value_at(&self, x: &PadicScalar) -> Result<PadicScalar, DynError> {
        let d = self.derivative();
        let nv = d.num.eval(x);
        let dv = d.den.eval(x);
        Ok(nv.div_raw(&dv)?)
    }

    /// Homogeneous composition `self(inner)`.
    pub fn compose(&self, inner: &RationalMap) -> Result<RationalMap, DynError> {
        let (p, q) = self.hom_coeffs();
        let d = self.degree;
        let mut pg_pow: Vec<Poly<PadicScalar>> = vec![Poly::constant(PadicScalar::one(&self.cfg))];
        let mut qg_pow = pg_pow.clone();
        for i in 1..=d {
            pg_pow.push(pg_pow[i - 1].mul(&inner.num));
            qg_pow.push(qg_pow[i - 1].mul(&inner.den));
        }
        let mut num = Poly::zero();
        let mut den = Poly::zero();
        for i in 0..=d {
            let basis = pg_pow[i].mul(&qg_pow[d - i]);
            num = num.add(&basis.scale(&p[i]));
            den = den.add(&basis.scale(&q[i]));
        }
        RationalMap::new_unchecked(num, den, &self.cfg)
    }

    /// The n-th iterate, composed homogeneously.
    pub fn iterate(&self, n: u32) -> Result<RationalMap, DynError> {
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Period polynomial of the n-th iterate: the dehomogenized
    /// `P_n(z) - z Q_n(z)`, together with the homogeneous degree
    /// `d^n + 1` (the gap to the polynomial degree is the multiplicity of
    /// the root at infinity).
    pub fn period_polynomial(&self, n: u32) -> Result<PeriodPoly, DynError> {
        let it = self.iterate(n)?;
        let z = Poly::monomial(PadicScalar::one(&self.cfg), 1);
        let phi = it.num.sub(&z.mul(&it.den));
        let hom_degree = self.degree.pow(n) + 1;
        Ok(PeriodPoly { phi, hom_degree, period: n })
    }

    /// All type I points of period dividing `n` solvable over the working
    /// field, classified; unsolvable factors are reported, not guessed.
    pub fn periodic_points(&self, n: u32) -> Result<PeriodicPointsOutcome, DynError> {
        let mut records: Vec<PeriodicPointRecord> = vec![];
        let mut unresolved: Vec<UnresolvedFactor> = vec![];
        let pp = self.period_polynomial(n)?;
        let phi = &pp.phi;
        let phi_deg = phi.degree().ok_or(DynError::DegenerateMap)?;
        // the point at infinity
        if pp.hom_degree > phi_deg {
            let inf_mult = pp.hom_degree - phi_deg;
            if inf_mult > 1 {
                unresolved.push(UnresolvedFactor {
                    degree: inf_mult,
                    description: "multiple root at infinity".into(),
                    root_valuations: vec![],
                });
            }
            let m = self.exact_period_of(&BerkPoint::Infinity, n)?;
            if let Some(m) = m {
                let mult = self.orbit_multiplier(&BerkPoint::Infinity, m)?;
                records.push(PeriodicPointRecord {
                    point: BerkPoint::Infinity,
                    period: m,
                    multiplier_abs: mult,
                    class: classify(&mult),
                    local_degree: None,
                });
            }
        }
        // roots at the origin
        let np = NewtonPolygon::build(phi.coeffs())?;
        if np.vanishing_order > 0 {
            if np.vanishing_order > 1 {
                unresolved.push(UnresolvedFactor {
                    degree: np.vanishing_order,
                    description: "multiple root at the origin".into(),
                    root_valuations: vec![],
                });
            } else {
                let zero_pt = BerkPoint::TypeI(PadicScalar::zero(&self.cfg));
                if let Some(m) = self.exact_period_of(&zero_pt, n)? {
                    let mult = self.orbit_multiplier(&zero_pt, m)?;
                    records.push(PeriodicPointRecord {
                        point: zero_pt,
                        period: m,
                        multiplier_abs: mult,
                        class: classify(&mult),
                        local_degree: None,
                    });
                }
            }
        }
        // finite nonzero roots, slope by slope
        let mut found: Vec<PadicScalar> = vec![];
        for (v, len) in np.root_valuations() {
            if !self.cfg.in_value_group(v) {
                unresolved.push(UnresolvedFactor {
                    degree: len,
                    description: format!("roots of valuation {v} lie outside the value group"),
                    root_valuations: vec![(v, len)],
                });
                continue;
            }
            match hensel::hensel_roots(phi.coeffs(), v) {
                Ok(roots) => {
                    if roots.len() < len {
                        unresolved.push(UnresolvedFactor {
                            degree: len - roots.len(),
                            description: format!(
                                "factor at valuation {v} does not split over the working field"
                            ),
                            root_valuations: vec![(v, len - roots.len())],
                        });
                    }
                    found.extend(roots);
                }
                Err(PadicError::NoRootsInField) => {
                    unresolved.push(UnresolvedFactor {
                        degree: len,
                        description: format!(
                            "factor at valuation {v} has no roots in the working field"
                        ),
                        root_valuations: vec![(v, len)],
                    });
                }
                Err(PadicError::NotSquarefree) => {
                    unresolved.push(UnresolvedFactor {
                        degree: len,
                        description: format!("factor at valuation {v} is not squarefree"),
                        root_valuations: vec![(v, len)],
                    });
                }
                Err(e) => return Err(e.into()),
            }
        }
        for root in found {
            let pt = BerkPoint::TypeI(root);
            let Some(m) = self.exact_period_of(&pt, n)? else {
                continue;
            };
            let mult = self.orbit_multiplier(&pt, m)?;
            records.push(PeriodicPointRecord {
                point: pt,
                period: m,
                multiplier_abs: mult,
                class: classify(&mult),
                local_degree: None,
            });
        }
        sort_records(&mut records);
        Ok(PeriodicPointsOutcome { records, unresolved })
    }

    /// Smallest divisor `m` of `n` with `f^m(x) = x` (residually certified),
    /// or `None` when `x` is not periodic of period dividing `n`.
    pub fn exact_period_of(&self, x: &BerkPoint, n: u32) -> Result<Option<u32>, DynError> {
        let threshold = rat((self.cfg.precision() / 2) as i128, 1);
        for m in 1..=n {
            if n % m != 0 {
                continue;
            }
            let it = self.iterate(m)?;
            let fixed = match x {
                BerkPoint::Infinity => it.evaluate(&BerkPoint::Infinity)? == BerkPoint::Infinity,
                BerkPoint::TypeI(v) => {
                    // residual |P_m(x) - x Q_m(x)| small
                    let z = Poly::monomial(PadicScalar::one(&self.cfg), 1);
                    let phi = it.num.sub(&z.mul(&it.den));
                    phi.eval(v).val_at_least(threshold)
                }
                BerkPoint::Disc { .. } => it.push_disc_point(x)? == *x,
            };
            if fixed {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    /// `|(f^m)'| along the orbit of a type I periodic point (or infinity),
    /// computed in a chart avoiding infinity at the evaluation point.
    pub fn orbit_multiplier(&self, x: &BerkPoint, m: u32) -> Result<Norm, DynError> {
        let it = self.iterate(m)?;
        match x {
            BerkPoint::Infinity => {
                let sw = it.swap_chart()?;
                sw.derivative_norm_at(&PadicScalar::zero(&self.cfg))
            }
            BerkPoint::TypeI(v) => {
                let qx = it.den.eval(v);
                if matches!(qx.val_info(), ValInfo::Exact(_)) {
                    it.derivative_norm_at(v)
                } else {
                    // the point is a pole of the iterate's denominator:
                    // measure in the reciprocal chart
                    let sw = it.swap_chart()?;
                    let one = PadicScalar::one(&self.cfg);
                    sw.derivative_norm_at(&one.div_raw(v)?)
                }
            }
            BerkPoint::Disc { .. } => {
                Err(DynError::HypothesisViolated("multiplier is a type I notion".into()))
            }
        }
    }

    /// Local degree and classification of a fixed type II point: conjugate
    /// the point to the Gauss point and take the degree of the reduction.
    pub fn local_degree(&self, xi: &BerkPoint) -> Result<LocalDegree, DynError> {
        let BerkPoint::Disc { center, rexp } = xi else {
            return Err(DynError::HypothesisViolated("local degree requires a type II point".into()));
        };
        if !rexp.is_rational() || !self.cfg.in_value_group(rexp.a) {
            return Err(DynError::HypothesisViolated(
                "type II point is not conjugatable over the working field".into(),
            ));
        }
        if self.push_disc_point(xi)? != *xi {
            return Err(DynError::NotFixed);
        }
        let c = PadicScalar::uniformizer_pow(&self.cfg, rexp.a)?;
        let g = self.conjugate_affine(center, &c)?;
        let red = g.reduction_at_gauss()?;
        let degree = match red.kind {
            ReductionKind::NonConstant { degree } => degree,
            ReductionKind::Degenerate { .. } => {
                return Err(DynError::HypothesisViolated(
                    "conjugated map has degenerate reduction at a fixed point".into(),
                ))
            }
        };
        Ok(LocalDegree {
            degree,
            class: if degree == 1 { PointClass::Indifferent } else { PointClass::Repelling },
        })
    }

    /// Inverse-branch coding for `f = z^2 + c`: the point whose itinerary
    /// starts with `word`, anchored at the fixed point of the plus branch.
    pub fn cantor_coding(&self, word: &[u8], lambda0: &PadicScalar) -> Result<BerkPoint, DynError> {
        cantor_coding(lambda0, word)
    }
}

fn big_val(cfg: &FieldConfig) -> Rat {
    rat((cfg.precision() as i128) - (HENSEL_MARGIN as i128), 1)
}

/// Period polynomial data: `phi` vanishes at every type I point of period
/// dividing `period`; the root at infinity has multiplicity
/// `hom_degree - deg(phi)`.
#[derive(Clone, Debug)]
pub struct PeriodPoly {
    pub phi: Poly<PadicScalar>,
    pub hom_degree: usize,
    pub period: u32,
}

/// Reduced rational map over the residue field.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub num: ResiduePoly,
    pub den: ResiduePoly,
    pub kind: ReductionKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionKind {
    NonConstant { degree: usize },
    Degenerate { description: &'static str },
}

impl Reduction {
    fn cancel(rp: ResiduePoly, rq: ResiduePoly, hom_degree: usize) -> Reduction {
        if rq.is_zero() {
            return Reduction {
                num: rp,
                den: rq,
                kind: ReductionKind::Degenerate { description: "constant infinity" },
            };
        }
        if rp.is_zero() {
            return Reduction {
                num: rp,
                den: rq,
                kind: ReductionKind::Degenerate { description: "constant zero" },
            };
        }
        let g = rp.gcd(&rq);
        let p = rp.div_rem(&g).expect("gcd divides").0;
        let q = rq.div_rem(&g).expect("gcd divides").0;
        // common factors at infinity: shared gap to the homogeneous degree
        let dp = p.degree().unwrap_or(0);
        let dq = q.degree().unwrap_or(0);
        let used = g.degree().unwrap_or(0);
        let y_common = (hom_degree - used - dp).min(hom_degree - used - dq);
        let degree = hom_degree - used - y_common;
        let kind = if degree == 0 {
            ReductionKind::Degenerate { description: "constant" }
        } else {
            ReductionKind::NonConstant { degree }
        };
        Reduction { num: p, den: q, kind }
    }

    pub fn is_nonconstant(&self) -> bool {
        matches!(self.kind, ReductionKind::NonConstant { .. })
    }

    pub fn display(&self) -> String {
        format!("({}) / ({})", self.num.display("z~"), self.den.display("z~"))
    }
}

/// Classification of a periodic point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointClass {
    Attracting,
    Indifferent,
    Repelling,
}

fn classify(mult: &Norm) -> PointClass {
    match mult.cmp(&Norm::one()) {
        std::cmp::Ordering::Less => PointClass::Attracting,
        std::cmp::Ordering::Equal => PointClass::Indifferent,
        std::cmp::Ordering::Greater => PointClass::Repelling,
    }
}

/// One classified periodic point.
#[derive(Clone, Debug)]
pub struct PeriodicPointRecord {
    pub point: BerkPoint,
    /// Exact (minimal) period.
    pub period: u32,
    pub multiplier_abs: Norm,
    pub class: PointClass,
    /// Local degree, for type II records produced by classification.
    pub local_degree: Option<usize>,
}

/// A factor of the period polynomial that was not solved over the working
/// field, reported with its Newton-polygon data.
#[derive(Clone, Debug)]
pub struct UnresolvedFactor {
    pub degree: usize,
    pub description: String,
    pub root_valuations: Vec<(Rat, usize)>,
}

/// Result of a periodic-point search.
#[derive(Clone, Debug)]
pub struct PeriodicPointsOutcome {
    pub records: Vec<PeriodicPointRecord>,
    pub unresolved: Vec<UnresolvedFactor>,
}

impl PeriodicPointsOutcome {
    /// Error out if any unresolved factor has degree 3 or more.
    pub fn strict(self) -> Result<Self, DynError> {
        if let Some(f) = self.unresolved.iter().find(|f| f.degree >= 3) {
            return Err(DynError::IrreducibleFactorTooLarge { degree: f.degree });
        }
        Ok(self)
    }
}

fn sort_records(records: &mut [PeriodicPointRecord]) {
    records.sort_by_key(|r| {
        let (inf, val, digits) = match &r.point {
            BerkPoint::Infinity => (1u8, Rat::zero(), String::new()),
            BerkPoint::TypeI(x) => match x.val_info() {
                ValInfo::Zero => (0, rat(i64::MAX as i128, 1), String::new()),
                ValInfo::Exact(v) => (0, v, format!("{x}")),
                ValInfo::AtLeast(f) => (0, f, String::new()),
            },
            BerkPoint::Disc { .. } => (2, Rat::zero(), format!("{}", r.point)),
        };
        (r.period, inf, val, digits)
    });
}

/// Itinerary coding for `f = z^2 + lambda0` in the Cantor regime
/// (`|lambda0| > 1`, `-lambda0` a square): applies the signed inverse
/// branches `(-1)^b sqrt(lambda0) sqrt(1 - z/lambda0)` along the word,
/// anchored at the fixed point of the plus branch, so that
/// `f(x_w) = x_shift(w)` holds to working precision.
pub fn cantor_coding(lambda0: &PadicScalar, word: &[u8]) -> Result<BerkPoint, DynError> {
    let cfg = *lambda0.config();
    let v = lambda0.valuation()?;
    if v >= Rat::zero() {
        return Err(DynError::HypothesisViolated("need |lambda0| > 1".into()));
    }
    let s = hensel::sqrt(&lambda0.neg_raw()).map_err(|e| match e {
        PadicError::NotASquare | PadicError::OddValuation => DynError::BranchLeavesField,
        other => DynError::Padic(other),
    })?;
    let one = PadicScalar::one(&cfg);
    let branch = |z: &PadicScalar, bit: u8| -> Result<PadicScalar, DynError> {
        let u = one.sub_raw(&z.div_raw(lambda0)?);
        let root = hensel::sqrt(&u).map_err(|e| match e {
            PadicError::NotASquare | PadicError::OddValuation => DynError::BranchLeavesField,
            other => DynError::Padic(other),
        })?;
        let val = s.mul_raw(&root);
        Ok(if bit == 0 { val } else { val.neg_raw() })
    };
    // anchor: the fixed point of the plus branch, i.e. the root of
    // z^2 - z + lambda0 fixed by it
    let fix_poly = Poly::new(vec![
        lambda0.clone(),
        PadicScalar::from_integer(&cfg, -1),
        PadicScalar::one(&cfg),
    ]);
    let roots = hensel::hensel_roots(fix_poly.coeffs(), v / Rat::from_integer(2)).map_err(|e| {
        match e {
            PadicError::NoRootsInField => DynError::BranchLeavesField,
            other => DynError::Padic(other),
        }
    })?;
    let anchor = roots
        .into_iter()
        .find(|r| {
            branch(r, 0)
                .map(|img| img.sub_raw(r).val_at_least(big_val(&cfg)))
                .unwrap_or(false)
        })
        .ok_or(DynError::BranchLeavesField)?;
    let mut x = anchor;
    for &b in word.iter().rev() {
        x = branch(&x, b)?;
    }
    Ok(BerkPoint::TypeI(x))
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rational map of degree {}", self.degree)
    }
}

#[cfg(test)]
mod tests {
    use crate::berk::RadiusExp;
    use super::*;

    fn f3() -> FieldConfig {
        FieldConfig::base(3, 60).unwrap()
    }

    fn sc(cfg: &FieldConfig, n: i64, d: i64) -> PadicScalar {
        PadicScalar::from_rational(cfg, n, d).unwrap()
    }

    fn zsq_plus(cfg: &FieldConfig, n: i64, d: i64) -> RationalMap {
        RationalMap::from_rationals(cfg, &[(n, d), (0, 1), (1, 1)], &[(1, 1)]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let cfg = f3();
        let sq = zsq_plus(&cfg, 0, 1);
        assert_eq!(
            sq.evaluate(&BerkPoint::TypeI(sc(&cfg, 3, 1))).unwrap(),
            BerkPoint::TypeI(sc(&cfg, 9, 1))
        );
        let inv = RationalMap::from_rationals(&cfg, &[(1, 1)], &[(0, 1), (1, 1)]).unwrap();
        assert_eq!(
            inv.evaluate(&BerkPoint::TypeI(PadicScalar::zero(&cfg))).unwrap(),
            BerkPoint::Infinity
        );
        assert_eq!(inv.evaluate(&BerkPoint::Infinity).unwrap(), BerkPoint::TypeI(PadicScalar::zero(&cfg)));
        // fixed point of z^2 - 1/9 stays fixed
        let f = zsq_plus(&cfg, -1, 9);
        let s13 = hensel::sqrt(&sc(&cfg, 13, 1)).unwrap();
        let fix = sc(&cfg, 3, 1).add_raw(&s13).div_raw(&sc(&cfg, 6, 1)).unwrap();
        let img = f.evaluate(&BerkPoint::TypeI(fix.clone())).unwrap();
        let BerkPoint::TypeI(y) = img else { panic!() };
        assert!(y.sub_raw(&fix).val_at_least(rat(50, 1)));
    }

    #[test]
    fn push_examples() {
        let cfg = f3();
        let sq = zsq_plus(&cfg, 0, 1);
        let img = sq
            .push_disc_point(&BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(1)))
            .unwrap();
        assert_eq!(img, BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(2)));
        // |lambda0| <= 1 fixes the Gauss point
        for (n, d) in [(1i64, 1i64), (3, 1), (2, 1), (5, 1), (0, 1)] {
            let f = zsq_plus(&cfg, n, d);
            assert_eq!(f.push_disc_point(&BerkPoint::gauss(&cfg)).unwrap(), BerkPoint::gauss(&cfg));
        }
        let inv = RationalMap::from_rationals(&cfg, &[(1, 1)], &[(0, 1), (1, 1)]).unwrap();
        assert_eq!(
            inv.push_disc_point(&BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(1)))
                .unwrap(),
            BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(-1))
        );
    }

    #[test]
    fn reduction_examples() {
        let cfg = f3();
        // z^2 + 3 reduces to z~^2
        let f = zsq_plus(&cfg, 3, 1);
        let red = f.reduction_at_gauss().unwrap();
        assert_eq!(red.kind, ReductionKind::NonConstant { degree: 2 });
        assert!(red.is_nonconstant());
        // 3z^2 + z reduces to z~ (degree drops)
        let g = RationalMap::from_rationals(&cfg, &[(0, 1), (1, 1), (3, 1)], &[(1, 1)]).unwrap();
        let red_g = g.reduction_at_gauss().unwrap();
        assert_eq!(red_g.kind, ReductionKind::NonConstant { degree: 1 });
        // z^2/3 normalizes to [X^2, 3Y^2]: reduction degenerate, and the
        // push moves the Gauss point elsewhere
        let h = RationalMap::from_rationals(&cfg, &[(0, 1), (0, 1), (1, 1)], &[(3, 1)]).unwrap();
        let red_h = h.reduction_at_gauss().unwrap();
        assert!(!red_h.is_nonconstant());
        assert_ne!(h.push_disc_point(&BerkPoint::gauss(&cfg)).unwrap(), BerkPoint::gauss(&cfg));
        // cross-check: nonconstant reduction iff the Gauss point is fixed
        for f in [f, g] {
            assert_eq!(
                f.push_disc_point(&BerkPoint::gauss(&cfg)).unwrap() == BerkPoint::gauss(&cfg),
                f.reduction_at_gauss().unwrap().is_nonconstant()
            );
        }
    }

    #[test]
    fn local_degree_examples() {
        let cfg = f3();
        let gauss = BerkPoint::gauss(&cfg);
        let sq = zsq_plus(&cfg, 0, 1);
        let ld = sq.local_degree(&gauss).unwrap();
        assert_eq!(ld.degree, 2);
        assert_eq!(ld.class, PointClass::Repelling);
        let f = zsq_plus(&cfg, 1, 1);
        let ld2 = f.local_degree(&gauss).unwrap();
        assert_eq!(ld2.degree, 2);
        // z + 3z^2: reduction z~, indifferent
        let g = RationalMap::from_rationals(&cfg, &[(0, 1), (1, 1), (3, 1)], &[(1, 1)]).unwrap();
        let ld3 = g.local_degree(&gauss).unwrap();
        assert_eq!(ld3.degree, 1);
        assert_eq!(ld3.class, PointClass::Indifferent);
        // non-fixed point errors
        let h = zsq_plus(&cfg, -1, 9);
        let far = BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(-1));
        assert!(matches!(h.local_degree(&far), Err(DynError::NotFixed)));
    }

    #[test]
    fn period_polynomial_examples() {
        let cfg = f3();
        let sq = zsq_plus(&cfg, 0, 1);
        let p1 = sq.period_polynomial(1).unwrap();
        // z^2 - z, with a simple root at infinity
        assert_eq!(p1.phi.degree(), Some(2));
        assert_eq!(p1.hom_degree, 3);
        let want = Poly::from_rationals(&cfg, &[(0, 1), (-1, 1), (1, 1)]);
        for (a, b) in p1.phi.coeffs().iter().zip(want.coeffs()) {
            assert!(a.sub_raw(b).maybe_zero());
        }
        let p2 = sq.period_polynomial(2).unwrap();
        // z^4 - z
        assert_eq!(p2.phi.degree(), Some(4));
        let want2 = Poly::from_rationals(&cfg, &[(0, 1), (-1, 1), (0, 1), (0, 1), (1, 1)]);
        for (a, b) in p2.phi.coeffs().iter().zip(want2.coeffs()) {
            assert!(a.sub_raw(b).maybe_zero());
        }
        // z^2 + c: phi_1 = z^2 - z + c
        let f = zsq_plus(&cfg, 5, 1);
        let p = f.period_polynomial(1).unwrap();
        let want3 = Poly::from_rationals(&cfg, &[(5, 1), (-1, 1), (1, 1)]);
        for (a, b) in p.phi.coeffs().iter().zip(want3.coeffs()) {
            assert!(a.sub_raw(b).maybe_zero());
        }
    }

    #[test]
    fn periodic_points_of_squaring_map() {
        let cfg = f3();
        let sq = zsq_plus(&cfg, 0, 1);
        let out = sq.periodic_points(1).unwrap();
        assert!(out.unresolved.is_empty());
        assert_eq!(out.records.len(), 3);
        // 0 attracting, 1 indifferent, infinity attracting
        let by_class: Vec<_> = out.records.iter().map(|r| r.class).collect();
        assert_eq!(
            by_class.iter().filter(|c| **c == PointClass::Attracting).count(),
            2
        );
        assert_eq!(
            by_class.iter().filter(|c| **c == PointClass::Indifferent).count(),
            1
        );
        let zero_rec = out
            .records
            .iter()
            .find(|r| r.point == BerkPoint::TypeI(PadicScalar::zero(&cfg)))
            .unwrap();
        assert_eq!(zero_rec.multiplier_abs, Norm::Zero);
        let inf_rec = out.records.iter().find(|r| r.point == BerkPoint::Infinity).unwrap();
        assert_eq!(inf_rec.multiplier_abs, Norm::Zero);
    }

    #[test]
    fn periodic_points_cantor_map() {
        let cfg = f3();
        let f = zsq_plus(&cfg, -1, 9);
        let out = f.periodic_points(1).unwrap();
        assert!(out.unresolved.is_empty());
        // two repelling fixed points with |z| = 3 and multiplier |2z| = 3,
        // plus superattracting infinity
        assert_eq!(out.records.len(), 3);
        for r in &out.records {
            match &r.point {
                BerkPoint::Infinity => {
                    assert_eq!(r.class, PointClass::Attracting);
                }
                BerkPoint::TypeI(x) => {
                    assert_eq!(x.valuation().unwrap(), rat(-1, 1));
                    assert_eq!(r.multiplier_abs, Norm::Pos(RadiusExp::from_int(-1)));
                    assert_eq!(r.class, PointClass::Repelling);
                }
                _ => panic!("unexpected point kind"),
            }
        }
        // period 2: the pair solves z^2 + z + 8/9, multiplier norm 9
        let out2 = f.periodic_points(2).unwrap();
        assert!(out2.unresolved.is_empty());
        let pairs: Vec<_> = out2.records.iter().filter(|r| r.period == 2).collect();
        assert_eq!(pairs.len(), 2);
        let factor = Poly::from_rationals(&cfg, &[(8, 9), (1, 1), (1, 1)]);
        for r in &pairs {
            let BerkPoint::TypeI(x) = &r.point else { panic!() };
            assert!(factor.eval(x).val_at_least(rat(40, 1)));
            assert_eq!(r.multiplier_abs, Norm::Pos(RadiusExp::from_int(-2)));
            assert_eq!(r.class, PointClass::Repelling);
        }
    }

    #[test]
    fn multiplier_constant_along_orbits() {
        let cfg = f3();
        let f = zsq_plus(&cfg, -1, 9);
        let out = f.periodic_points(2).unwrap();
        for r in &out.records {
            if let BerkPoint::TypeI(x) = &r.point {
                // chain rule: the orbit multiplier equals the product of
                // |f'| along the orbit
                let mut acc = Norm::one();
                let mut y = x.clone();
                for _ in 0..r.period {
                    acc = acc.mul(&f.derivative_norm_at(&y).unwrap());
                    let BerkPoint::TypeI(next) = f.evaluate(&BerkPoint::TypeI(y)).unwrap() else {
                        panic!("orbit leaves the finite chart")
                    };
                    y = next;
                }
                assert_eq!(acc, r.multiplier_abs);
            }
        }
    }

    #[test]
    fn push_composition_functoriality() {
        use rand::prelude::*;
        let cfg = f3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..60 {
            let f = zsq_plus(&cfg, rng.gen_range(-12..12), [1, 3, 9][rng.gen_range(0..3)]);
            let g = RationalMap::from_rationals(
                &cfg,
                &[(rng.gen_range(-9..9), 1), (rng.gen_range(-9..9), 1), (0, 1), (1, 1)],
                &[(1, 1)],
            )
            .unwrap();
            let xi = BerkPoint::disc(
                sc(&cfg, rng.gen_range(-20..20), 1),
                RadiusExp::from_int(rng.gen_range(-2..3)),
            );
            let comp = f.compose(&g).unwrap();
            let lhs = comp.push_disc_point(&xi).unwrap();
            let rhs = f.push_disc_point(&g.push_disc_point(&xi).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn reduction_composition_functoriality() {
        use rand::prelude::*;
        let cfg = f3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        let rf = cfg.residue_field();
        for _ in 0..60 {
            // monic integral quadratics fix the Gauss point
            let f = zsq_plus(&cfg, rng.gen_range(-12..12), 1);
            let g = zsq_plus(&cfg, rng.gen_range(-12..12), 1);
            let comp = f.compose(&g).unwrap();
            let red_comp = comp.reduction_at_gauss().unwrap();
            let rf_f = f.reduction_at_gauss().unwrap();
            let rf_g = g.reduction_at_gauss().unwrap();
            // compose reductions: both are polynomials here
            let composed = rf_f.num.coeffs().iter().enumerate().fold(
                ResiduePoly::zero(rf),
                |acc, (i, c)| {
                    let term = rf_g.num.pow_usize(i).scale(c);
                    acc.add(&term)
                },
            );
            assert_eq!(red_comp.num, composed);
        }
    }

    #[test]
    fn cantor_coding_fixed_point_and_separation() {
        let cfg = f3();
        let l0 = sc(&cfg, -1, 9);
        // the all-zeros word is the fixed point of the plus branch
        let x0 = cantor_coding(&l0, &[0; 6]).unwrap();
        let BerkPoint::TypeI(x) = &x0 else { panic!() };
        let fix_poly = Poly::from_rationals(&cfg, &[(-1, 9), (-1, 1), (1, 1)]);
        assert!(fix_poly.eval(x).val_at_least(rat(45, 1)));
        // words differing in the first letter are |lambda0|^(1/2) apart
        let a = cantor_coding(&l0, &[0, 1, 0]).unwrap();
        let b = cantor_coding(&l0, &[1, 1, 0]).unwrap();
        let (BerkPoint::TypeI(xa), BerkPoint::TypeI(xb)) = (&a, &b) else { panic!() };
        assert_eq!(Norm::of(&xa.sub_raw(xb)).unwrap(), Norm::Pos(RadiusExp::from_rat(rat(-1, 1))));
        // shift relation f(x_w) = x_shift(w)
        let f = zsq_plus(&cfg, -1, 9);
        let w = [1u8, 0, 1, 1];
        let xw = cantor_coding(&l0, &w).unwrap();
        let xs = cantor_coding(&l0, &w[1..]).unwrap();
        let BerkPoint::TypeI(xv) = &xw else { panic!() };
        let BerkPoint::TypeI(sv) = &xs else { panic!() };
        let BerkPoint::TypeI(img) = f.evaluate(&BerkPoint::TypeI(xv.clone())).unwrap() else {
            panic!()
        };
        assert!(img.sub_raw(sv).val_at_least(rat(40, 1)));
        // hypothesis violations
        assert!(cantor_coding(&sc(&cfg, 1, 1), &[0]).is_err());
        assert!(matches!(
            cantor_coding(&sc(&cfg, 1, 3), &[0]),
            Err(DynError::BranchLeavesField) | Err(DynError::HypothesisViolated(_))
        ));
    }
}

/// Local degree outcome for a fixed type II point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalDegree {
    pub degree: usize,
    pub class: PointClass,
}
