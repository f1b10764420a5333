//! One-parameter analytic families: period curves, multiplier polynomials,
//! unstably-indifferent detection at Berkovich parameter points, type I
//! multiplicity through residue square tests, Hensel continuation of
//! repelling periodic points, and the stability scanner.
//!
//! Parameter points may be classical (type I) or disc points of the
//! parameter line.  Completed residue fields of disc parameters are never
//! constructed: every predicate reduces to exact valuation arithmetic plus
//! factorization data over the residue function field in one transcendental
//! `t`, whose constants are treated as algebraically closed (matching the
//! ground field of the underlying theory).

use crate::berk::{seminorm_at, BerkError, BerkPoint, Norm, RadiusExp};
use crate::dynamics::{DynError, RationalMap};
use crate::padic::scalar::rat;
use crate::padic::{
    FieldConfig, PadicError, PadicScalar, Rat, ResiduePoly, ValInfo,
};
use crate::poly::Poly;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Polynomial in the parameter.
pub type LambdaPoly = Poly<PadicScalar>;
/// Polynomial in `z` with coefficients polynomial in the parameter.
pub type ZPoly = Poly<LambdaPoly>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FamilyError {
    #[error("family degenerates: {0}")]
    Degenerate(String),
    #[error("leading coefficient vanishes at the parameter point in both charts")]
    LeadingCoeffVanishes,
    #[error("period factor has degree {degree} over the parameter residue field")]
    FactorDegreeTooLarge { degree: usize },
    #[error("periodic points of this factor are not repelling at the parameter")]
    NotRepelling,
    #[error("continuation step exceeds the collision radius")]
    CollisionRadiusExceeded,
    #[error("discriminant vanishes at the target parameter: multiple root")]
    MultipleRoot,
    #[error("rational families require per-chart handling; only polynomial families are supported here")]
    NotPolynomial,
    #[error("unsupported parameter point kind: {0}")]
    UnsupportedParam(String),
    #[error(transparent)]
    Dyn(#[from] DynError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Berk(#[from] BerkError),
}

/// One-parameter family of rational maps with coefficients polynomial in
/// the parameter.
#[derive(Clone, Debug)]
pub struct AnalyticFamily {
    num: ZPoly,
    den: ZPoly,
    degree: usize,
    cfg: FieldConfig,
}

/// A parameter point, with the literal it was written as.
#[derive(Clone, Debug)]
pub struct ParamPoint {
    pub point: BerkPoint,
    pub literal: String,
}

impl ParamPoint {
    pub fn new(point: BerkPoint, literal: impl Into<String>) -> Self {
        ParamPoint { point, literal: literal.into() }
    }
}

impl fmt::Display for ParamPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.literal)
    }
}

impl AnalyticFamily {
    pub fn new(num: ZPoly, den: ZPoly, cfg: &FieldConfig) -> Result<Self, FamilyError> {
        let degree = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
        if degree == 0 {
            return Err(FamilyError::Degenerate("constant family".into()));
        }
        let fam = AnalyticFamily { num, den, degree, cfg: *cfg };
        // not identically degenerate: some specialization is a genuine map
        let mut ok = false;
        for k in 0..=(4 * degree as i64 + 4) {
            let l = PadicScalar::from_integer(cfg, k);
            if fam.specialize(&l).is_ok() {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(FamilyError::Degenerate("resultant vanishes identically".into()));
        }
        Ok(fam)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn config(&self) -> &FieldConfig {
        &self.cfg
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    /// The rational map at a classical parameter value.
    pub fn specialize(&self, lambda: &PadicScalar) -> Result<RationalMap, FamilyError> {
        let num = self.num.map(|c| c.eval(lambda));
        let den = self.den.map(|c| c.eval(lambda));
        if num.degree().unwrap_or(0).max(den.degree().unwrap_or(0)) != self.degree {
            return Err(FamilyError::Degenerate("degree drops at the parameter".into()));
        }
        Ok(RationalMap::new(num, den, &self.cfg)?)
    }

    /// Homogeneous coefficient lists padded to `degree + 1`.
    fn hom_coeffs(&self) -> (Vec<LambdaPoly>, Vec<LambdaPoly>) {
        let pad = |p: &ZPoly| {
            (0..=self.degree)
                .map(|i| p.coeff(i).cloned().unwrap_or_else(Poly::zero))
                .collect::<Vec<_>>()
        };
        (pad(&self.num), pad(&self.den))
    }

    /// Homogeneous n-th iterate over the parameter ring.
    fn iterate_pair(&self, n: u32) -> (ZPoly, ZPoly) {
        let (p, q) = self.hom_coeffs();
        let mut pn = self.num.clone();
        let mut qn = self.den.clone();
        for _ in 1..n {
            let d = self.degree;
            let mut pg_pow: Vec<ZPoly> = vec![Poly::constant(Poly::constant(PadicScalar::one(&self.cfg)))];
            let mut qg_pow = pg_pow.clone();
            for i in 1..=d {
                pg_pow.push(pg_pow[i - 1].mul(&pn));
                qg_pow.push(qg_pow[i - 1].mul(&qn));
            }
            let mut np = ZPoly::zero();
            let mut nq = ZPoly::zero();
            for i in 0..=d {
                let basis = pg_pow[i].mul(&qg_pow[d - i]);
                np = np.add(&basis.scale(&p[i]));
                nq = nq.add(&basis.scale(&q[i]));
            }
            pn = np;
            qn = nq;
        }
        (pn, qn)
    }

    /// The Berkovich n-period curve slice: `Phi_n(lambda, z)` dehomogenized.
    pub fn period_curve(&self, n: u32) -> PeriodCurveSlice {
        let (pn, qn) = self.iterate_pair(n);
        let z = ZPoly::monomial(Poly::constant(PadicScalar::one(&self.cfg)), 1);
        let phi = pn.sub(&z.mul(&qn));
        PeriodCurveSlice { phi, hom_degree: self.degree.pow(n) + 1, period: n }
    }

    /// Factor of the period curve carrying the exact-period-n points,
    /// obtained by exact division by lower period curves when the divisors
    /// are monic in `z`.  Falls back to the full curve otherwise.
    pub fn dynatomic_factor(&self, n: u32) -> DynatomicFactor {
        let full = self.period_curve(n);
        let divisors: &[u32] = match n {
            1 => &[],
            2 => &[1],
            3 => &[1],
            4 => &[2],
            5 => &[1],
            _ => return DynatomicFactor { poly: full.phi, period: n, exact: false },
        };
        let mut poly = full.phi.clone();
        for &m in divisors {
            let div = self.period_curve(m).phi;
            let monic = div
                .leading()
                .map(|l| l.degree() == Some(0) && !l.coeffs()[0].maybe_zero())
                .unwrap_or(false);
            if !monic {
                return DynatomicFactor { poly: full.phi, period: n, exact: false };
            }
            // scale so the divisor is literally monic
            let lead = div.leading().unwrap().coeffs()[0].clone();
            let inv = match PadicScalar::one(&self.cfg).div_raw(&lead) {
                Ok(x) => x,
                Err(_) => return DynatomicFactor { poly: full.phi, period: n, exact: false },
            };
            let monic_div = div.map(|c| c.scale(&inv));
            let (q, r) = poly.div_rem_monic(&monic_div);
            let remainder_zero = r.coeffs().iter().all(|c| {
                c.coeffs().iter().all(|s| s.maybe_zero())
            });
            if !remainder_zero {
                return DynatomicFactor { poly: full.phi, period: n, exact: false };
            }
            poly = q.map(|c| c.scale(&lead));
        }
        DynatomicFactor { poly, period: n, exact: true }
    }

    /// Multiplier polynomial `M_n(w, lambda)`: the characteristic polynomial
    /// of the iterate derivative acting on the quotient by the monic period
    /// factor.  Its roots over a specialized parameter are exactly the
    /// multipliers of the period-n points there.
    pub fn multiplier_polynomial(&self, n: u32) -> Result<MultiplierPoly, FamilyError> {
        if !self.is_polynomial() {
            return Err(FamilyError::NotPolynomial);
        }
        let factor = self.dynatomic_factor(n);
        let lead = factor.poly.leading().ok_or_else(|| {
            FamilyError::Degenerate("empty period factor".into())
        })?;
        if lead.degree() != Some(0) {
            return Err(FamilyError::Degenerate(
                "period factor is not monic over the parameter ring".into(),
            ));
        }
        let lead_inv = PadicScalar::one(&self.cfg)
            .div_raw(&lead.coeffs()[0])
            .map_err(FamilyError::Padic)?;
        let a: ZPoly = factor.poly.map(|c| c.scale(&lead_inv));
        debug_assert!(a.degree().is_some());
        // derivative of the n-th iterate (polynomial family)
        let (pn, _) = self.iterate_pair(n);
        let g = z_derivative(&pn, &self.cfg);
        // companion matrix of the monic factor
        let mat = companion(&a, &self.cfg);
        let gm = poly_at_matrix(&g, &mat, &self.cfg);
        let coeffs = char_poly(&gm, &self.cfg)?;
        Ok(MultiplierPoly { w_coeffs: coeffs, period: n, factor_exact: factor.exact })
    }

    /// Per-root unstably-indifferent verdicts at a parameter point.
    pub fn unstably_indifferent(
        &self,
        n: u32,
        x: &ParamPoint,
    ) -> Result<UnstableVerdicts, FamilyError> {
        let mp = self.multiplier_polynomial(n)?;
        unstable_verdicts(&mp, x, &self.cfg)
    }

    /// Multiplicity of the period-n points at a parameter point, by the
    /// discriminant square test over the residue function field (treating
    /// the constants as algebraically closed).
    pub fn type1_multiplicity(&self, n: u32, x: &ParamPoint) -> Result<MultiplicityReport, FamilyError> {
        let factor = self.dynatomic_factor(n);
        let mp = self.multiplier_polynomial(n)?;
        // Lemma hypothesis: the points must be repelling at x
        let roots = multiplier_valuations(&mp, &x.point, &self.cfg)?;
        if roots.iter().any(|(v, _)| *v >= RadiusExp::zero()) {
            return Err(FamilyError::NotRepelling);
        }
        match &x.point {
            BerkPoint::Infinity => Err(FamilyError::UnsupportedParam("infinity".into())),
            BerkPoint::TypeI(_) => Ok(MultiplicityReport {
                m: 1,
                disc_val: None,
                reduction_display: None,
                note: Some("classical parameter: periodic points move in the ground field".into()),
            }),
            BerkPoint::Disc { center, rexp } => {
                let monic = monic_specialct(&factor.poly, &x.point, &self.cfg)?;
                let deg = monic.degree().unwrap_or(0);
                if deg != 2 {
                    return Err(FamilyError::FactorDegreeTooLarge { degree: deg });
                }
                let a = monic.coeff(2).cloned().unwrap_or_else(Poly::zero);
                let b = monic.coeff(1).cloned().unwrap_or_else(Poly::zero);
                let c = monic.coeff(0).cloned().unwrap_or_else(Poly::zero);
                let four = Poly::constant(PadicScalar::from_integer(&self.cfg, 4));
                let disc = b.mul(&b).sub(&four.mul(&a).mul(&c));
                disc_square_test(&disc, center, rexp, &self.cfg)
            }
        }
    }

    /// Hensel continuation of a simple period-n root from one classical
    /// parameter to a nearby one.
    pub fn continue_periodic_point(
        &self,
        n: u32,
        lambda0: &PadicScalar,
        xi0: &PadicScalar,
        lambda1: &PadicScalar,
    ) -> Result<PadicScalar, FamilyError> {
        let curve = self.period_curve(n);
        let threshold = rat((self.cfg.precision() / 2) as i128, 1);
        let at0 = curve.specialize(lambda0);
        if !at0.eval(xi0).val_at_least(threshold) {
            return Err(FamilyError::Degenerate("seed is not a root at the base parameter".into()));
        }
        let at1 = curve.specialize(lambda1);
        // collision detection through the discriminant of the target factor
        match discriminant_norm(&at1, &self.cfg) {
            DiscNorm::Vanishing => return Err(FamilyError::MultipleRoot),
            DiscNorm::Nonzero(_) => {}
        }
        // move to the classical Hensel frame: unit-scale the variable at the
        // seed's valuation and normalize the coefficient height to zero
        let v = match xi0.val_info() {
            ValInfo::Zero => Rat::zero(),
            ValInfo::Exact(v) => v,
            ValInfo::AtLeast(_) => {
                return Err(FamilyError::Padic(PadicError::PrecisionExhausted { min: 0 }))
            }
        };
        if !self.cfg.in_value_group(v) {
            return Err(FamilyError::Degenerate("seed valuation outside the value group".into()));
        }
        let cscale = PadicScalar::uniformizer_pow(&self.cfg, v).map_err(FamilyError::Padic)?;
        let mut scaled: Vec<PadicScalar> = vec![];
        let mut pw = PadicScalar::one(&self.cfg);
        for a in at1.coeffs() {
            scaled.push(a.mul_raw(&pw));
            pw = pw.mul_raw(&cscale);
        }
        let height = scaled
            .iter()
            .filter_map(|c| c.val_info().exact())
            .min()
            .ok_or(FamilyError::Padic(PadicError::PrecisionExhausted { min: 0 }))?;
        let norm = PadicScalar::uniformizer_pow(&self.cfg, -height).map_err(FamilyError::Padic)?;
        let a_hat = Poly::new(scaled.into_iter().map(|c| c.mul_raw(&norm)).collect::<Vec<_>>());
        let d_hat = a_hat.derivative(&self.cfg);
        let w0 = xi0.div_raw(&cscale).map_err(FamilyError::Padic)?;
        // classical condition over the integers: |A(w0)| < |A'(w0)|^2
        let f0 = a_hat.eval(&w0);
        let df0 = d_hat.eval(&w0);
        let (v_f, v_df) = match (f0.val_info(), df0.val_info()) {
            (ValInfo::Exact(a), ValInfo::Exact(b)) => (a, b),
            (ValInfo::AtLeast(a), ValInfo::Exact(b)) => (a, b),
            (ValInfo::Zero, ValInfo::Exact(_)) => return Ok(xi0.clone()),
            _ => return Err(FamilyError::Padic(PadicError::PrecisionExhausted { min: 0 })),
        };
        if v_f <= v_df * rat(2, 1) {
            return Err(FamilyError::CollisionRadiusExceeded);
        }
        let target = rat((self.cfg.precision() as i128) - 2, 1);
        let certify = rat(
            (self.cfg.precision() as i128) - (crate::padic::scalar::HENSEL_MARGIN as i128),
            1,
        );
        // Newton iteration from the seed; stop once the correction falls
        // below the certified resolution so truncation cannot erode digits
        let mut wcur = w0;
        for _ in 0..(self.cfg.precision() + 8) {
            let fx = a_hat.eval(&wcur);
            if fx.val_at_least(target) {
                break;
            }
            let dfx = d_hat.eval(&wcur);
            let step = fx.div_raw(&dfx).map_err(FamilyError::Padic)?;
            if !matches!(step.val_info(), ValInfo::Exact(_)) {
                break;
            }
            wcur = wcur.sub_raw(&step);
        }
        if !a_hat.eval(&wcur).val_at_least(certify) {
            return Err(FamilyError::CollisionRadiusExceeded);
        }
        Ok(wcur.mul_raw(&cscale))
    }

    /// Scan parameter points across all periods up to `n_max`, flagging
    /// unstably indifferent periods and multiplicity collisions.
    pub fn stability_scan(&self, n_max: u32, points: &[ParamPoint]) -> BifurcationReport {
        let rows: Vec<Vec<ScanRow>> = points
            .par_iter()
            .map(|pt| self.scan_point(n_max, pt))
            .collect();
        BifurcationReport { rows: rows.into_iter().flatten().collect() }
    }

    fn scan_point(&self, n_max: u32, pt: &ParamPoint) -> Vec<ScanRow> {
        let mut rows = vec![];
        // degree-drop diagnostic at classical points
        if let BerkPoint::TypeI(l) = &pt.point {
            if self.specialize(l).is_err() {
                for period in 1..=n_max {
                    rows.push(ScanRow {
                        param: pt.literal.clone(),
                        period,
                        flag: BifurcationFlag::DegreeDrop,
                        evidence: Evidence::note("specialized map degenerates"),
                    });
                }
                return rows;
            }
        }
        for period in 1..=n_max {
            rows.push(self.scan_one(period, pt));
        }
        rows
    }

    fn scan_one(&self, period: u32, pt: &ParamPoint) -> ScanRow {
        let make = |flag, evidence| ScanRow {
            param: pt.literal.clone(),
            period,
            flag,
            evidence,
        };
        let verdicts = match self.unstably_indifferent(period, pt) {
            Ok(v) => v,
            Err(e) => {
                return make(BifurcationFlag::Unsupported, Evidence::note(format!("{e}")));
            }
        };
        if verdicts.any_unstable() {
            let ev = Evidence {
                multiplier_val: Some("0".into()),
                reduction_poly: verdicts.slope_zero_display.clone(),
                m: None,
                note: Some(format!(
                    "{} of {} unit-multiplier roots have transcendental reduction",
                    verdicts.unstable_count(),
                    verdicts.unit_count()
                )),
            };
            return make(BifurcationFlag::UnstablyIndifferent, ev);
        }
        // multiplicity path
        match self.type1_multiplicity(period, pt) {
            Ok(rep) => {
                let mut ev = Evidence {
                    multiplier_val: verdicts.min_val_display(),
                    reduction_poly: rep.reduction_display.clone(),
                    m: Some(rep.m),
                    note: rep.note.clone(),
                };
                if rep.m > 1 {
                    make(BifurcationFlag::MultiplicityGt1, ev)
                } else {
                    // classical OK points are certified motion candidates;
                    // exercise the continuation along a small sampled step
                    if let BerkPoint::TypeI(l0) = &pt.point {
                        ev.note = Some(self.exercise_continuation(period, l0));
                    }
                    make(BifurcationFlag::Ok, ev)
                }
            }
            Err(FamilyError::NotRepelling) => {
                // indifferent or attracting cycles do not threaten the
                // stability conditions once unstable indifference is ruled out
                let ev = Evidence {
                    multiplier_val: verdicts.min_val_display(),
                    reduction_poly: None,
                    m: None,
                    note: Some("cycle not repelling at this parameter; collision test not applicable".into()),
                };
                make(BifurcationFlag::Ok, ev)
            }
            Err(FamilyError::FactorDegreeTooLarge { degree }) => make(
                BifurcationFlag::Unsupported,
                Evidence::note(format!("period factor has degree {degree} > 2 over H(x)")),
            ),
            Err(e) => make(BifurcationFlag::Unsupported, Evidence::note(format!("{e}"))),
        }
    }
}

impl AnalyticFamily {
    /// Continue one period-n root along a small step from a classical
    /// parameter, reporting the outcome as scan evidence.
    fn exercise_continuation(&self, n: u32, l0: &PadicScalar) -> String {
        let factor = self.dynatomic_factor(n).specialize(l0);
        let np = match crate::padic::NewtonPolygon::build(factor.coeffs()) {
            Ok(np) => np,
            Err(e) => return format!("continuation skipped: {e}"),
        };
        let mut seed = None;
        for (v, _) in np.root_valuations() {
            if !self.cfg.in_value_group(v) {
                continue;
            }
            if let Ok(roots) = crate::padic::hensel::hensel_roots(factor.coeffs(), v) {
                if let Some(r) = roots.into_iter().next() {
                    seed = Some(r);
                    break;
                }
            }
        }
        let Some(xi0) = seed else {
            return "continuation skipped: factor has no roots in the working field".into();
        };
        for k in 2..28 {
            let step = l0.shift_p(k);
            let l1 = l0.add_raw(&step);
            match self.continue_periodic_point(n, l0, &xi0, &l1) {
                Ok(_) => {
                    return format!(
                        "continuation verified along a step of valuation offset {k}"
                    )
                }
                Err(FamilyError::CollisionRadiusExceeded) => continue,
                Err(e) => return format!("continuation failed: {e}"),
            }
        }
        "continuation skipped: no admissible step found".into()
    }
}

fn z_derivative(p: &ZPoly, cfg: &FieldConfig) -> ZPoly {
    let mut coeffs: Vec<LambdaPoly> = vec![];
    for (i, c) in p.coeffs().iter().enumerate().skip(1) {
        coeffs.push(c.scale(&PadicScalar::from_integer(cfg, i as i64)));
    }
    ZPoly::new(coeffs)
}

/// Companion matrix of a monic polynomial over the parameter ring.
fn companion(a: &ZPoly, cfg: &FieldConfig) -> Vec<Vec<LambdaPoly>> {
    let n = a.degree().expect("nonzero");
    let zero = || LambdaPoly::zero();
    let mut m = vec![vec![zero(); n]; n];
    for i in 1..n {
        m[i][i - 1] = LambdaPoly::constant(PadicScalar::one(cfg));
    }
    for i in 0..n {
        m[i][n - 1] = a.coeff(i).cloned().unwrap_or_else(Poly::zero).neg();
    }
    m
}

fn mat_mul(a: &[Vec<LambdaPoly>], b: &[Vec<LambdaPoly>]) -> Vec<Vec<LambdaPoly>> {
    let n = a.len();
    let mut out = vec![vec![LambdaPoly::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[k][j].is_zero() {
                    continue;
                }
                out[i][j] = out[i][j].add(&a[i][k].mul(&b[k][j]));
            }
        }
    }
    out
}

fn mat_add_scalar_diag(m: &[Vec<LambdaPoly>], s: &LambdaPoly) -> Vec<Vec<LambdaPoly>> {
    let mut out = m.to_vec();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = row[i].add(s);
    }
    out
}

fn poly_at_matrix(g: &ZPoly, m: &[Vec<LambdaPoly>], cfg: &FieldConfig) -> Vec<Vec<LambdaPoly>> {
    let n = m.len();
    let mut acc = vec![vec![LambdaPoly::zero(); n]; n];
    for c in g.coeffs().iter().rev() {
        acc = mat_mul(&acc, m);
        for (i, row) in acc.iter_mut().enumerate() {
            let _ = i;
            let _ = row;
        }
        acc = mat_add_scalar_diag(&acc, c);
    }
    let _ = cfg;
    acc
}

fn trace(m: &[Vec<LambdaPoly>]) -> LambdaPoly {
    let mut t = LambdaPoly::zero();
    for (i, row) in m.iter().enumerate() {
        t = t.add(&row[i]);
    }
    t
}

/// Characteristic polynomial coefficients (lowest degree first) of a matrix
/// over the parameter ring, by the trace recursion; divisions are by
/// integers only.
fn char_poly(m: &[Vec<LambdaPoly>], cfg: &FieldConfig) -> Result<Vec<LambdaPoly>, FamilyError> {
    let n = m.len();
    let one = LambdaPoly::constant(PadicScalar::one(cfg));
    let mut cs: Vec<LambdaPoly> = vec![one; n + 1]; // cs[n-k] coefficient of w^(n-k)
    let mut mk = m.to_vec();
    let mut coeffs_high_first: Vec<LambdaPoly> = vec![LambdaPoly::constant(PadicScalar::one(cfg))];
    for k in 1..=n {
        let t = trace(&mk);
        let kk = PadicScalar::from_integer(cfg, k as i64);
        let inv = PadicScalar::one(cfg).div_raw(&kk).map_err(FamilyError::Padic)?;
        let ck = t.scale(&inv).neg();
        coeffs_high_first.push(ck.clone());
        if k < n {
            let adj = mat_add_scalar_diag(&mk, &ck);
            mk = mat_mul(m, &adj);
        }
    }
    // reorder lowest-first
    coeffs_high_first.reverse();
    cs = coeffs_high_first;
    Ok(cs)
}

/// Factor of the period curve attached to exact period n.
#[derive(Clone, Debug)]
pub struct DynatomicFactor {
    pub poly: ZPoly,
    pub period: u32,
    /// Whether lower-period factors were divided out exactly.
    pub exact: bool,
}

/// A slice of the Berkovich n-period curve.
#[derive(Clone, Debug)]
pub struct PeriodCurveSlice {
    pub phi: ZPoly,
    pub hom_degree: usize,
    pub period: u32,
}

impl PeriodCurveSlice {
    pub fn specialize(&self, lambda: &PadicScalar) -> Poly<PadicScalar> {
        self.phi.map(|c| c.eval(lambda))
    }
}

impl DynatomicFactor {
    pub fn specialize(&self, lambda: &PadicScalar) -> Poly<PadicScalar> {
        self.poly.map(|c| c.eval(lambda))
    }
}

/// `M_n(w, lambda)` with coefficients in the parameter ring, lowest
/// w-degree first, monic in `w`.
#[derive(Clone, Debug)]
pub struct MultiplierPoly {
    pub w_coeffs: Vec<LambdaPoly>,
    pub period: u32,
    pub factor_exact: bool,
}

impl MultiplierPoly {
    pub fn specialize(&self, lambda: &PadicScalar) -> Poly<PadicScalar> {
        Poly::new(self.w_coeffs.iter().map(|c| c.eval(lambda)).collect())
    }

    pub fn degree(&self) -> usize {
        self.w_coeffs.len().saturating_sub(1)
    }
}

/// Lower convex hull over exact radius exponents; returns
/// `(slope, length)` segments with strictly increasing slopes.
fn exp_polygon(points: &[(usize, RadiusExp)]) -> Vec<(RadiusExp, usize)> {
    let mut hull: Vec<(usize, RadiusExp)> = vec![];
    for &(x, y) in points {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let lhs = y2.sub(&y1).scale(Rat::from_integer((x - x1) as i128));
            let rhs = y.sub(&y1).scale(Rat::from_integer((x2 - x1) as i128));
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let mut segments: Vec<(RadiusExp, usize)> = vec![];
    for w in hull.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        let slope = y2.sub(&y1).scale(Rat::new(1, (x2 - x1) as i128));
        match segments.last_mut() {
            Some((s, l)) if *s == slope => *l += x2 - x1,
            _ => segments.push((slope, x2 - x1)),
        }
    }
    segments
}

/// Multiplier root norms at a parameter point: `(val_exponent, count)`
/// pairs; `|w| = p^-val`.
fn multiplier_valuations(
    mp: &MultiplierPoly,
    x: &BerkPoint,
    _cfg: &FieldConfig,
) -> Result<Vec<(RadiusExp, usize)>, FamilyError> {
    let mut pts = vec![];
    for (k, c) in mp.w_coeffs.iter().enumerate() {
        let n = seminorm_at(c, x).map_err(FamilyError::Berk)?;
        if let Norm::Pos(e) = n {
            pts.push((k, e));
        }
    }
    if pts.is_empty() {
        return Err(FamilyError::Degenerate("multiplier polynomial vanishes at the parameter".into()));
    }
    Ok(exp_polygon(&pts).into_iter().map(|(s, l)| (s.scale(rat(-1, 1)), l)).collect())
}

/// Verdicts of the unstably-indifferent test at one parameter point.
#[derive(Clone, Debug)]
pub struct UnstableVerdicts {
    /// `(|w| exponent, count, unstable_count)` per multiplier norm class.
    pub rows: Vec<(RadiusExp, usize, usize)>,
    /// Display of the reduced unit-multiplier factor, when one exists.
    pub slope_zero_display: Option<String>,
}

impl UnstableVerdicts {
    pub fn any_unstable(&self) -> bool {
        self.rows.iter().any(|(_, _, u)| *u > 0)
    }

    pub fn unstable_count(&self) -> usize {
        self.rows.iter().map(|(_, _, u)| u).sum()
    }

    pub fn unit_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|(e, _, _)| *e == RadiusExp::zero())
            .map(|(_, c, _)| c)
            .sum()
    }

    fn min_val_display(&self) -> Option<String> {
        self.rows.first().map(|(e, _, _)| format!("{e}"))
    }
}

fn unstable_verdicts(
    mp: &MultiplierPoly,
    x: &ParamPoint,
    cfg: &FieldConfig,
) -> Result<UnstableVerdicts, FamilyError> {
    let vals = multiplier_valuations(mp, &x.point, cfg)?;
    let mut rows: Vec<(RadiusExp, usize, usize)> =
        vals.iter().map(|(v, c)| (*v, *c, 0usize)).collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut display = None;
    // only unit multipliers at type II parameter points can be the Gauss
    // point: classical parameters have algebraic reductions, and type III
    // parameters map to type III points
    if let BerkPoint::Disc { center, rexp } = &x.point {
        if rexp.is_rational() && cfg.in_value_group(rexp.a) {
            if let Some(slot) = rows.iter_mut().find(|(e, _, _)| *e == RadiusExp::zero()) {
                let (count, reduced) = reduce_unit_factor(mp, center, rexp, cfg)?;
                debug_assert_eq!(count, slot.1);
                // constant roots over the closed constants are the common
                // roots of the t-coefficient polynomials in w
                let field = cfg.residue_field();
                let mut t_deg = 0usize;
                for p in &reduced {
                    t_deg = t_deg.max(p.degree().unwrap_or(0));
                }
                let mut g = ResiduePoly::zero(field);
                for j in 0..=t_deg {
                    let wj = ResiduePoly::new(
                        field,
                        reduced.iter().map(|p| p.coeff(j)).collect::<Vec<_>>(),
                    );
                    g = if g.is_zero() { wj } else { g.gcd(&wj) };
                }
                let const_roots = if g.is_zero() { 0 } else { g.degree().unwrap_or(0) };
                slot.2 = slot.1 - const_roots.min(slot.1);
                display = Some(display_bivariate(&reduced));
            }
        }
    }
    Ok(UnstableVerdicts { rows, slope_zero_display: display })
}

/// Rebase the unit-multiplier (slope-zero) part of `M_n` at a type II
/// parameter point and reduce it over the residue function field; returns
/// the w-coefficients as polynomials in the reduced coordinate `t`.
fn reduce_unit_factor(
    mp: &MultiplierPoly,
    center: &PadicScalar,
    rexp: &RadiusExp,
    cfg: &FieldConfig,
) -> Result<(usize, Vec<ResiduePoly>), FamilyError> {
    let scale = PadicScalar::uniformizer_pow(cfg, rexp.a).map_err(FamilyError::Padic)?;
    let mut pts = vec![];
    let mut rebased: Vec<LambdaPoly> = vec![];
    for (k, c) in mp.w_coeffs.iter().enumerate() {
        let r = c.compose_affine(center, &scale);
        let n = crate::berk::gauss_seminorm(r.coeffs(), &RadiusExp::zero()).map_err(FamilyError::Berk)?;
        if let Norm::Pos(e) = n {
            pts.push((k, e));
        }
        rebased.push(r);
    }
    let segments = exp_polygon(&pts);
    // locate the flat segment and its index range
    let mut start_idx = pts[0].0;
    let mut start_exp = pts[0].1;
    // walk hull segments to find slope zero
    let mut k1 = None;
    let mut k2 = None;
    let mut x = start_idx;
    let mut y = start_exp;
    for (s, l) in &segments {
        let nx = x + l;
        if *s == RadiusExp::zero() {
            k1 = Some(x);
            k2 = Some(nx);
        }
        y = y.add(&s.scale(Rat::from_integer(*l as i128)));
        x = nx;
    }
    let _ = y;
    let (Some(k1), Some(k2)) = (k1, k2) else {
        return Ok((0, vec![]));
    };
    // exponent value on the flat segment
    let sigma = {
        let mut e = None;
        for &(k, v) in &pts {
            if k == k1 {
                e = Some(v);
            }
        }
        e.expect("flat segment endpoint is an exact point")
    };
    if !sigma.is_rational() || !cfg.in_value_group(sigma.a) {
        return Err(FamilyError::UnsupportedParam(
            "unit-factor height is outside the working value group".into(),
        ));
    }
    let norm = PadicScalar::uniformizer_pow(cfg, -sigma.a).map_err(FamilyError::Padic)?;
    let rf = cfg.residue_field();
    let mut reduced = vec![];
    for k in k1..=k2 {
        let r = rebased[k].scale(&norm);
        let mut coeffs = vec![];
        for c in r.coeffs() {
            let v = match c.val_info() {
                ValInfo::Zero => rf.zero(),
                ValInfo::Exact(v) if v > Rat::zero() => rf.zero(),
                ValInfo::Exact(_) => c.reduce().map_err(FamilyError::Padic)?,
                ValInfo::AtLeast(f) if f > Rat::zero() => rf.zero(),
                ValInfo::AtLeast(_) => {
                    return Err(FamilyError::Padic(PadicError::PrecisionExhausted { min: 0 }))
                }
            };
            coeffs.push(v);
        }
        reduced.push(ResiduePoly::new(rf, coeffs));
    }
    start_idx = k1;
    start_exp = sigma;
    let _ = (start_idx, start_exp);
    Ok((k2 - k1, reduced))
}

fn display_bivariate(ws: &[ResiduePoly]) -> String {
    let mut parts = vec![];
    for (k, p) in ws.iter().enumerate().rev() {
        if p.is_zero() {
            continue;
        }
        let c = format!("({})", p.display("t"));
        let part = match k {
            0 => c,
            1 => format!("{c}*w"),
            _ => format!("{c}*w^{k}"),
        };
        parts.push(part);
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Outcome of the multiplicity test.
#[derive(Clone, Debug)]
pub struct MultiplicityReport {
    pub m: u32,
    pub disc_val: Option<RadiusExp>,
    pub reduction_display: Option<String>,
    pub note: Option<String>,
}

/// Monic-in-z specialization data of a period factor at a parameter point:
/// returns the factor scaled so its leading coefficient has nonzero value
/// at `x`, applying the reciprocal chart when needed.
fn monic_specialct(
    factor: &ZPoly,
    x: &BerkPoint,
    cfg: &FieldConfig,
) -> Result<ZPoly, FamilyError> {
    let lead_nonzero = |p: &ZPoly| -> Result<bool, FamilyError> {
        match p.leading() {
            None => Ok(false),
            Some(l) => {
                if l.is_zero() {
                    return Ok(false);
                }
                match seminorm_at(l, x) {
                    Ok(Norm::Zero) => Ok(false),
                    Ok(Norm::Pos(_)) => Ok(true),
                    Err(e) => Err(FamilyError::Berk(e)),
                }
            }
        }
    };
    let _ = cfg;
    if lead_nonzero(factor)? {
        return Ok(factor.clone());
    }
    let swapped = factor.reversed();
    if lead_nonzero(&swapped)? {
        return Ok(swapped);
    }
    Err(FamilyError::LeadingCoeffVanishes)
}

/// Public entry point for the monic normalization of a period-curve slice
/// at a parameter point.
pub fn monic_normalize(
    slice: &PeriodCurveSlice,
    x: &ParamPoint,
    cfg: &FieldConfig,
) -> Result<ZPoly, FamilyError> {
    monic_specialct(&slice.phi, &x.point, cfg)
}

enum DiscNorm {
    Nonzero(#[allow(dead_code)] Rat),
    Vanishing,
}

/// Norm of the discriminant of a scalar polynomial, by eliminating the
/// Sylvester matrix of `(A, A')`; vanishing (exactly or beyond the
/// certified depth) reports `Vanishing`.
fn discriminant_norm(a: &Poly<PadicScalar>, cfg: &FieldConfig) -> DiscNorm {
    let Some(n) = a.degree() else { return DiscNorm::Vanishing };
    if n < 2 {
        return DiscNorm::Nonzero(Rat::zero());
    }
    if n == 2 {
        let zero = PadicScalar::zero(cfg);
        let c = a.coeff_or_zero(0, &zero);
        let b = a.coeff_or_zero(1, &zero);
        let aa = a.coeff_or_zero(2, &zero);
        let four = PadicScalar::from_integer(cfg, 4);
        let disc = b.mul_raw(&b).sub_raw(&four.mul_raw(&aa).mul_raw(&c));
        return match disc.val_info() {
            ValInfo::Exact(v) if v < rat((cfg.precision() / 2) as i128, 1) => DiscNorm::Nonzero(v),
            _ => DiscNorm::Vanishing,
        };
    }
    let da = a.derivative(cfg);
    let m = n - 1;
    let size = n + m;
    let zero = PadicScalar::zero(cfg);
    let mut mat = vec![vec![zero.clone(); size]; size];
    for i in 0..m {
        for (j, c) in a.coeffs().iter().enumerate() {
            mat[i][i + j] = c.clone();
        }
    }
    for i in 0..n {
        for (j, c) in da.coeffs().iter().enumerate() {
            mat[m + i][i + j] = c.clone();
        }
    }
    let mut total = Rat::zero();
    for col in 0..size {
        let mut pivot: Option<(usize, Rat)> = None;
        for (row, rv) in mat.iter().enumerate().skip(col) {
            if let ValInfo::Exact(v) = rv[col].val_info() {
                match pivot {
                    None => pivot = Some((row, v)),
                    Some((_, pv)) if v < pv => pivot = Some((row, v)),
                    _ => {}
                }
            }
        }
        let Some((prow, pval)) = pivot else {
            return DiscNorm::Vanishing;
        };
        total = total + pval;
        mat.swap(col, prow);
        let piv = mat[col][col].clone();
        for row in (col + 1)..size {
            let f = match mat[row][col].div_raw(&piv) {
                Ok(f) => f,
                Err(_) => return DiscNorm::Vanishing,
            };
            if f.is_exact_zero() {
                continue;
            }
            for k in col..size {
                let t = mat[col][k].mul_raw(&f);
                mat[row][k] = mat[row][k].sub_raw(&t);
            }
        }
    }
    DiscNorm::Nonzero(total)
}

/// Discriminant square test over the residue function field at a disc
/// parameter point; constants count as squares (the ground field of the
/// theory is algebraically closed).
fn disc_square_test(
    disc: &LambdaPoly,
    center: &PadicScalar,
    rexp: &RadiusExp,
    cfg: &FieldConfig,
) -> Result<MultiplicityReport, FamilyError> {
    if disc.is_zero() {
        return Err(FamilyError::Degenerate("identically vanishing discriminant".into()));
    }
    if rexp.is_rational() {
        if !cfg.in_value_group(rexp.a) {
            return Err(FamilyError::UnsupportedParam(
                "type II radius outside the working value group".into(),
            ));
        }
        let scale = PadicScalar::uniformizer_pow(cfg, rexp.a).map_err(FamilyError::Padic)?;
        let rebased = disc.compose_affine(center, &scale);
        let n = crate::berk::gauss_seminorm(rebased.coeffs(), &RadiusExp::zero())
            .map_err(FamilyError::Berk)?;
        let Norm::Pos(e) = n else {
            return Err(FamilyError::Degenerate("discriminant vanishes at the parameter".into()));
        };
        if !e.is_rational() || !cfg.in_value_group(e.a) {
            return Err(FamilyError::UnsupportedParam(
                "discriminant height outside the working value group".into(),
            ));
        }
        let norm = PadicScalar::uniformizer_pow(cfg, -e.a).map_err(FamilyError::Padic)?;
        let unit = rebased.scale(&norm);
        let rf = cfg.residue_field();
        let mut coeffs = vec![];
        for c in unit.coeffs() {
            let v = match c.val_info() {
                ValInfo::Zero => rf.zero(),
                ValInfo::Exact(v) if v > Rat::zero() => rf.zero(),
                ValInfo::Exact(_) => c.reduce().map_err(FamilyError::Padic)?,
                ValInfo::AtLeast(f) if f > Rat::zero() => rf.zero(),
                ValInfo::AtLeast(_) => {
                    return Err(FamilyError::Padic(PadicError::PrecisionExhausted { min: 0 }))
                }
            };
            coeffs.push(v);
        }
        let reduced = ResiduePoly::new(rf, coeffs);
        let is_square = reduced.is_square_up_to_constant();
        Ok(MultiplicityReport {
            m: if is_square { 1 } else { 2 },
            disc_val: Some(e),
            reduction_display: Some(reduced.display("t")),
            note: None,
        })
    } else {
        // type III: the dominant rebased index is unique (no ties are
        // possible against an irrational radius exponent) and its parity
        // decides the square test
        let one = PadicScalar::one(cfg);
        let rebased = disc.compose_affine(center, &one);
        let mut best: Option<(usize, RadiusExp)> = None;
        for (i, c) in rebased.coeffs().iter().enumerate() {
            if let ValInfo::Exact(v) = c.val_info() {
                let e = RadiusExp::from_rat(v).add(&rexp.scale(Rat::from_integer(i as i128)));
                best = Some(match best {
                    None => (i, e),
                    Some((bi, be)) => {
                        if e < be {
                            (i, e)
                        } else {
                            (bi, be)
                        }
                    }
                });
            }
        }
        let (i_star, e) = best.ok_or(FamilyError::Padic(PadicError::PrecisionExhausted { min: 0 }))?;
        Ok(MultiplicityReport {
            m: if i_star % 2 == 0 { 1 } else { 2 },
            disc_val: Some(e),
            reduction_display: None,
            note: Some(format!(
                "type III parameter: dominant rebased index {i_star}; parity decides"
            )),
        })
    }
}

/// Flags attached to scan rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BifurcationFlag {
    #[serde(rename = "UNSTABLY_INDIFFERENT")]
    UnstablyIndifferent,
    #[serde(rename = "MULTIPLICITY_GT_1")]
    MultiplicityGt1,
    #[serde(rename = "OK")]
    Ok,
    #[serde(rename = "DEGREE_DROP")]
    DegreeDrop,
    #[serde(rename = "UNSUPPORTED")]
    Unsupported,
}

#[derive(Clone, Debug, Serialize)]
pub struct Evidence {
    pub multiplier_val: Option<String>,
    pub reduction_poly: Option<String>,
    pub m: Option<u32>,
    pub note: Option<String>,
}

impl Evidence {
    fn note(s: impl Into<String>) -> Self {
        Evidence { multiplier_val: None, reduction_poly: None, m: None, note: Some(s.into()) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub param: String,
    pub period: u32,
    pub flag: BifurcationFlag,
    pub evidence: Evidence,
}

/// Per-parameter-point scan results, one row per (point, period).
#[derive(Clone, Debug, Serialize)]
pub struct BifurcationReport {
    pub rows: Vec<ScanRow>,
}

impl BifurcationReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.flag == BifurcationFlag::Ok)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::hensel;

    fn f3() -> FieldConfig {
        FieldConfig::base(3, 60).unwrap()
    }

    fn sc(cfg: &FieldConfig, n: i64, d: i64) -> PadicScalar {
        PadicScalar::from_rational(cfg, n, d).unwrap()
    }

    /// The family z^2 + lambda.
    fn quad(cfg: &FieldConfig) -> AnalyticFamily {
        let lam = LambdaPoly::from_rationals(cfg, &[(0, 1), (1, 1)]);
        let num = ZPoly::new(vec![
            lam,
            LambdaPoly::zero(),
            LambdaPoly::constant(PadicScalar::one(cfg)),
        ]);
        let den = ZPoly::constant(LambdaPoly::constant(PadicScalar::one(cfg)));
        AnalyticFamily::new(num, den, cfg).unwrap()
    }

    /// The family z^2 + lambda z.
    fn quad_z(cfg: &FieldConfig) -> AnalyticFamily {
        let lam = LambdaPoly::from_rationals(cfg, &[(0, 1), (1, 1)]);
        let num = ZPoly::new(vec![
            LambdaPoly::zero(),
            lam,
            LambdaPoly::constant(PadicScalar::one(cfg)),
        ]);
        let den = ZPoly::constant(LambdaPoly::constant(PadicScalar::one(cfg)));
        AnalyticFamily::new(num, den, cfg).unwrap()
    }

    fn gauss_param(cfg: &FieldConfig) -> ParamPoint {
        ParamPoint::new(BerkPoint::gauss(cfg), "zeta(0, 1)")
    }

    fn disc_param(cfg: &FieldConfig, k: i64) -> ParamPoint {
        ParamPoint::new(
            BerkPoint::disc(PadicScalar::zero(cfg), RadiusExp::from_int(-k)),
            format!("zeta(0, 3^{k})"),
        )
    }

    #[test]
    fn period_curves_of_quadratic_family() {
        let cfg = f3();
        let fam = quad(&cfg);
        let p1 = fam.period_curve(1);
        // z^2 - z + lambda
        assert_eq!(p1.phi.degree(), Some(2));
        let at = |l: i64| p1.specialize(&sc(&cfg, l, 1));
        let want = Poly::from_rationals(&cfg, &[(5, 1), (-1, 1), (1, 1)]);
        for (a, b) in at(5).coeffs().iter().zip(want.coeffs()) {
            assert!(a.sub_raw(b).maybe_zero());
        }
        // phi_2 = (z^2 - z + lambda)(z^2 + z + lambda + 1): check division
        let d2 = fam.dynatomic_factor(2);
        assert!(d2.exact);
        assert_eq!(d2.poly.degree(), Some(2));
        let want2 = Poly::from_rationals(&cfg, &[(6, 1), (1, 1), (1, 1)]); // at lambda = 5
        for (a, b) in d2.specialize(&sc(&cfg, 5, 1)).coeffs().iter().zip(want2.coeffs()) {
            assert!(a.sub_raw(b).maybe_zero());
        }
        // z^2 + lambda z: phi_1 = z^2 + (lambda - 1) z
        let famz = quad_z(&cfg);
        let p1z = famz.period_curve(1);
        let spec = p1z.specialize(&sc(&cfg, 4, 1));
        let wantz = Poly::from_rationals(&cfg, &[(0, 1), (3, 1), (1, 1)]);
        for (a, b) in spec.coeffs().iter().zip(wantz.coeffs()) {
            assert!(a.sub_raw(b).maybe_zero());
        }
    }

    #[test]
    fn specialization_coherence() {
        let cfg = f3();
        let fam = quad(&cfg);
        for l in [(0i64, 1i64), (5, 1), (-1, 9), (2, 3)] {
            let lam = sc(&cfg, l.0, l.1);
            let map = fam.specialize(&lam).unwrap();
            for n in 1..=3u32 {
                let from_family = fam.period_curve(n).specialize(&lam);
                let from_map = map.period_polynomial(n).unwrap().phi;
                assert_eq!(from_family.degree(), from_map.degree());
                // the map normalizes its pair to max coefficient norm 1, so
                // the two period polynomials agree up to that scale factor
                let ratio = from_map
                    .leading()
                    .unwrap()
                    .div_raw(from_family.leading().unwrap())
                    .unwrap();
                for (a, b) in from_family.coeffs().iter().zip(from_map.coeffs()) {
                    assert!(
                        a.mul_raw(&ratio).sub_raw(b).maybe_zero(),
                        "specialization mismatch at {l:?} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn multiplier_polynomial_of_quadratic_family() {
        let cfg = f3();
        let fam = quad(&cfg);
        let m1 = fam.multiplier_polynomial(1).unwrap();
        // w^2 - 2w + 4 lambda
        assert_eq!(m1.degree(), 2);
        let spec = m1.specialize(&sc(&cfg, 5, 1));
        let want = Poly::from_rationals(&cfg, &[(20, 1), (-2, 1), (1, 1)]);
        for (a, b) in spec.coeffs().iter().zip(want.coeffs()) {
            assert!(a.sub_raw(b).maybe_zero());
        }
        // z^2 + lambda z: the fixed-point multipliers are lambda and 2 - lambda
        let famz = quad_z(&cfg);
        let mz = famz.multiplier_polynomial(1).unwrap();
        assert_eq!(mz.degree(), 2);
        let at4 = mz.specialize(&sc(&cfg, 4, 1));
        // roots 4 and -2: (w - 4)(w + 2) = w^2 - 2w - 8
        let wantz = Poly::from_rationals(&cfg, &[(-8, 1), (-2, 1), (1, 1)]);
        for (a, b) in at4.coeffs().iter().zip(wantz.coeffs()) {
            assert!(a.sub_raw(b).maybe_zero());
        }
    }

    #[test]
    fn multiplier_consistency_with_dynamics() {
        let cfg = f3();
        let fam = quad(&cfg);
        let lam = sc(&cfg, -1, 9);
        let map = fam.specialize(&lam).unwrap();
        for n in 1..=2u32 {
            let mp = fam.multiplier_polynomial(n).unwrap().specialize(&lam);
            let out = map.periodic_points(n).unwrap();
            for r in out.records.iter().filter(|r| r.period == n) {
                if let BerkPoint::TypeI(x) = &r.point {
                    // the actual multiplier value is a root of M_n( . , lambda)
                    let it = map.iterate(n).unwrap();
                    let w = it.derivative_value_at(x).unwrap();
                    assert!(mp.eval(&w).val_at_least(rat(25, 1)));
                    // and its norm agrees with the record
                    assert_eq!(Norm::of(&w).unwrap(), r.multiplier_abs);
                }
            }
        }
    }

    #[test]
    fn unstably_indifferent_at_the_gauss_point() {
        let cfg = f3();
        let fam = quad(&cfg);
        let x = gauss_param(&cfg);
        for n in 1..=3u32 {
            let v = fam.unstably_indifferent(n, &x).unwrap();
            assert!(v.any_unstable(), "period {n} should be unstably indifferent at the Gauss point");
        }
        // z^2 + lambda z at the Gauss point: the w - lambda factor is the
        // paper's model case
        let famz = quad_z(&cfg);
        let v = famz.unstably_indifferent(1, &x).unwrap();
        assert!(v.any_unstable());
    }

    #[test]
    fn not_unstable_away_from_the_gauss_point() {
        let cfg = f3();
        let fam = quad(&cfg);
        // segment points: multipliers have |w| > 1
        for k in [1i64, 2] {
            let x = disc_param(&cfg, k);
            for n in 1..=2u32 {
                let v = fam.unstably_indifferent(n, &x).unwrap();
                assert!(!v.any_unstable());
            }
        }
        // classical points with |lambda| > 1
        let x = ParamPoint::new(BerkPoint::TypeI(sc(&cfg, -1, 9)), "-1/9");
        for n in 1..=3u32 {
            let v = fam.unstably_indifferent(n, &x).unwrap();
            assert!(!v.any_unstable());
        }
        // type III parameter point between the Gauss point and infinity
        let t3 = ParamPoint::new(
            BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::new(rat(-1, 1), rat(-1, 2))),
            "zeta(0, 3^(1 + 1/2 sqrt2))",
        );
        let v3 = fam.unstably_indifferent(1, &t3).unwrap();
        assert!(!v3.any_unstable());
    }

    #[test]
    fn multiplicity_two_on_the_segment() {
        let cfg = f3();
        let fam = quad(&cfg);
        for k in [1i64, 2] {
            let x = disc_param(&cfg, k);
            for n in 1..=2u32 {
                let rep = fam.type1_multiplicity(n, &x).unwrap();
                assert_eq!(rep.m, 2, "expected m = 2 at zeta(0, 3^{k}) period {n}");
            }
        }
        // off-segment disc point in the Cantor region: m = 1
        let off = ParamPoint::new(
            BerkPoint::disc(sc(&cfg, 1, 9), RadiusExp::zero()),
            "zeta(1/9, 1)",
        );
        let rep = fam.type1_multiplicity(1, &off).unwrap();
        assert_eq!(rep.m, 1);
        // classical parameter: m = 1
        let x1 = ParamPoint::new(BerkPoint::TypeI(sc(&cfg, -1, 9)), "-1/9");
        assert_eq!(fam.type1_multiplicity(1, &x1).unwrap().m, 1);
        // small radius disc point: discriminant reduces to a unit square
        let small = ParamPoint::new(
            BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::from_int(1)),
            "zeta(0, 3^-1)",
        );
        // fixed points there are indifferent, so the collision lemma does
        // not apply
        assert!(matches!(fam.type1_multiplicity(1, &small), Err(FamilyError::NotRepelling)));
        // type III segment point: parity decides, m = 2
        let t3 = ParamPoint::new(
            BerkPoint::disc(PadicScalar::zero(&cfg), RadiusExp::new(rat(-1, 1), rat(-1, 2))),
            "zeta(0, 3^(1 + 1/2 sqrt2))",
        );
        assert_eq!(fam.type1_multiplicity(1, &t3).unwrap().m, 2);
        // period 3 factor has degree 6: too large over H(x)
        assert!(matches!(
            fam.type1_multiplicity(3, &disc_param(&cfg, 1)),
            Err(FamilyError::FactorDegreeTooLarge { degree: 6 })
        ));
    }

    #[test]
    fn monic_normalization_charts() {
        let cfg = f3();
        // z^2 - z + lambda is already monic at any parameter
        let fam = quad(&cfg);
        let slice = fam.period_curve(1);
        let x = ParamPoint::new(BerkPoint::TypeI(sc(&cfg, 3, 1)), "3");
        let m = monic_normalize(&slice, &x, &cfg).unwrap();
        assert_eq!(m.degree(), Some(2));
        // l z^2 - z + 1: unit leading coefficient at lambda = 3, but the
        // reciprocal chart is needed at lambda = 0
        let lam = LambdaPoly::from_rationals(&cfg, &[(0, 1), (1, 1)]);
        let curve = PeriodCurveSlice {
            phi: ZPoly::new(vec![
                LambdaPoly::from_rationals(&cfg, &[(1, 1)]),
                LambdaPoly::from_rationals(&cfg, &[(-1, 1)]),
                lam,
            ]),
            hom_degree: 3,
            period: 1,
        };
        let at3 = monic_normalize(&curve, &x, &cfg).unwrap();
        assert_eq!(at3.degree(), Some(2));
        let x0 = ParamPoint::new(BerkPoint::TypeI(PadicScalar::zero(&cfg)), "0");
        let swapped = monic_normalize(&curve, &x0, &cfg).unwrap();
        // the reciprocal chart reverses the coefficients
        assert_eq!(swapped.degree(), Some(2));
        assert!(seminorm_at(swapped.leading().unwrap(), &x0.point).unwrap() > Norm::Zero);
        // vanishing in both charts is rejected
        let degenerate = PeriodCurveSlice {
            phi: ZPoly::new(vec![lam_times_z(&cfg), LambdaPoly::from_rationals(&cfg, &[(1, 1)]), lam_times_z(&cfg)]),
            hom_degree: 3,
            period: 1,
        };
        assert!(matches!(
            monic_normalize(&degenerate, &x0, &cfg),
            Err(FamilyError::LeadingCoeffVanishes)
        ));
    }

    fn lam_times_z(cfg: &FieldConfig) -> LambdaPoly {
        LambdaPoly::from_rationals(cfg, &[(0, 1), (1, 1)])
    }

    #[test]
    fn continuation_examples() {
        let cfg = f3();
        let fam = quad(&cfg);
        let l0 = sc(&cfg, -1, 9);
        let curve = fam.period_curve(1);
        let at0 = curve.specialize(&l0);
        let roots = hensel::hensel_roots(at0.coeffs(), rat(-1, 1)).unwrap();
        let xi0 = roots[0].clone();
        // identity continuation
        let same = fam.continue_periodic_point(1, &l0, &xi0, &l0).unwrap();
        assert!(same.sub_raw(&xi0).val_at_least(rat(40, 1)));
        // a genuine step
        let l1 = l0.add_raw(&sc(&cfg, 1, 3));
        let xi1 = fam.continue_periodic_point(1, &l0, &xi0, &l1).unwrap();
        let at1 = curve.specialize(&l1);
        assert!(at1.eval(&xi1).val_at_least(rat(50, 1)));
        // conjugacy: continuing f(xi0) lands on f(xi1); for fixed points
        // this is the same continuation, so exercise period 2 instead,
        // with a step small enough for the degree-4 curve's Hensel ball
        let l1 = l0.add_raw(&sc(&cfg, 3, 1));
        let d2 = fam.dynatomic_factor(2);
        let p2roots = hensel::hensel_roots(d2.specialize(&l0).coeffs(), rat(-1, 1)).unwrap();
        let y0 = p2roots[0].clone();
        let y1 = fam.continue_periodic_point(2, &l0, &y0, &l1).unwrap();
        let map0 = fam.specialize(&l0).unwrap();
        let map1 = fam.specialize(&l1).unwrap();
        let BerkPoint::TypeI(fy0) = map0.evaluate(&BerkPoint::TypeI(y0.clone())).unwrap() else {
            panic!()
        };
        let fy1 = fam.continue_periodic_point(2, &l0, &fy0, &l1).unwrap();
        let BerkPoint::TypeI(fy1_direct) = map1.evaluate(&BerkPoint::TypeI(y1.clone())).unwrap()
        else {
            panic!()
        };
        assert!(fy1.sub_raw(&fy1_direct).val_at_least(rat(40, 1)));
        // continuation into the discriminant locus raises MultipleRoot
        let quarter = sc(&cfg, 1, 4);
        assert!(matches!(
            fam.continue_periodic_point(1, &l0, &xi0, &quarter),
            Err(FamilyError::MultipleRoot)
        ));
    }

    #[test]
    fn scanner_on_the_three_regions() {
        let cfg = f3();
        let fam = quad(&cfg);
        let points = vec![
            gauss_param(&cfg),
            disc_param(&cfg, 1),
            disc_param(&cfg, 2),
            ParamPoint::new(BerkPoint::TypeI(sc(&cfg, -1, 9)), "-1/9"),
            ParamPoint::new(BerkPoint::TypeI(sc(&cfg, 1, 3)), "1/3"),
            // |4| <= 1: the classical fixed points are indifferent, the
            // collision lemma does not apply, and the row stays OK
            ParamPoint::new(BerkPoint::TypeI(sc(&cfg, 4, 1)), "4"),
        ];
        let report = fam.stability_scan(2, &points);
        assert_eq!(report.rows.len(), 12);
        for row in &report.rows {
            match row.param.as_str() {
                "zeta(0, 1)" => assert_eq!(row.flag, BifurcationFlag::UnstablyIndifferent),
                "zeta(0, 3^1)" | "zeta(0, 3^2)" => {
                    assert_eq!(row.flag, BifurcationFlag::MultiplicityGt1);
                    assert_eq!(row.evidence.m, Some(2));
                }
                "-1/9" | "1/3" => {
                    assert_eq!(row.flag, BifurcationFlag::Ok);
                    assert_eq!(row.evidence.m, Some(1));
                }
                "4" => assert_eq!(row.flag, BifurcationFlag::Ok),
                other => panic!("unexpected param {other}"),
            }
        }
    }
}
