//! Square roots and certified root finding by Hensel lifting.

use super::polygon::NewtonPolygon;
use super::scalar::{rat, FieldConfig, PadicScalar, Rat, ValInfo, HENSEL_MARGIN};
use super::PadicError;
use num_traits::Zero;

/// Square root in the working field.
///
/// Requires the valuation to be attainable as twice an element of the value
/// group and the unit residue to be a square in the residue field.  Of the
/// two roots, returns the one whose residue is the canonical square root
/// (smallest coordinate representative).
pub fn sqrt(x: &PadicScalar) -> Result<PadicScalar, PadicError> {
    let cfg = *x.config();
    let v = match x.val_info() {
        ValInfo::Zero => return Ok(x.clone()),
        ValInfo::AtLeast(_) => return Err(PadicError::PrecisionExhausted { min: 0 }),
        ValInfo::Exact(v) => v,
    };
    let half = v / rat(2, 1);
    if !cfg.in_value_group(half) {
        return Err(PadicError::OddValuation);
    }
    let scale = PadicScalar::uniformizer_pow(&cfg, half)?;
    let unit = x.div_raw(&scale.square_raw())?;
    debug_assert_eq!(unit.valuation().ok(), Some(Rat::zero()));
    let r0 = unit.reduce()?;
    let seed = r0.canonical_sqrt().ok_or(PadicError::NotASquare)?;
    // Newton iteration w <- (w + u/w) / 2, quadratically convergent since
    // p is odd and the seed is a simple residue root.
    let mut w = PadicScalar::lift(&cfg, &seed);
    let two = PadicScalar::from_integer(&cfg, 2);
    let target = rat((cfg.precision() as i128).saturating_sub(2), 1);
    for _ in 0..(cfg.precision() + 4) {
        let res = w.square_raw().sub_raw(&unit);
        if res.val_at_least(target) {
            break;
        }
        let q = unit.div_raw(&w)?;
        w = w.add_raw(&q).div_raw(&two)?;
    }
    let res = w.square_raw().sub_raw(&unit);
    if !res.val_at_least(rat((cfg.precision() as i128) - (HENSEL_MARGIN as i128), 1)) {
        return Err(PadicError::PrecisionExhausted { min: HENSEL_MARGIN });
    }
    Ok(w.mul_raw(&scale))
}

fn eval_poly(coeffs: &[PadicScalar], x: &PadicScalar) -> PadicScalar {
    let cfg = x.config();
    let mut acc = PadicScalar::zero(cfg);
    for c in coeffs.iter().rev() {
        acc = acc.mul_raw(x).add_raw(c);
    }
    acc
}

fn derivative(coeffs: &[PadicScalar], cfg: &FieldConfig) -> Vec<PadicScalar> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul_raw(&PadicScalar::from_integer(cfg, i as i64)))
        .collect()
}

/// All roots of the polynomial in the working field with the given
/// valuation, each certified by a small residual and a matching
/// simple-root derivative bound.
///
/// The polynomial must be squarefree along the requested slope; residue-level
/// collisions are separated by recentering, and failure to separate within
/// the precision budget reports `NotSquarefree`.
pub fn hensel_roots(
    coeffs: &[PadicScalar],
    target_valuation: Rat,
) -> Result<Vec<PadicScalar>, PadicError> {
    let cfg = *coeffs
        .first()
        .ok_or(PadicError::ZeroPolynomial)?
        .config();
    let polygon = NewtonPolygon::build(coeffs)?;
    if polygon.has_uncertified_tail() {
        // coefficients beyond the certified degree could hide roots
        return Err(PadicError::PrecisionExhausted { min: 0 });
    }
    let mult = polygon.count_at(target_valuation);
    if mult == 0 {
        return Ok(vec![]);
    }
    if !cfg.in_value_group(target_valuation) {
        // roots of this valuation exist over an extension only
        return Err(PadicError::NoRootsInField);
    }
    // scale z = c w so candidate roots become units
    let c = PadicScalar::uniformizer_pow(&cfg, target_valuation)?;
    let mut scaled: Vec<PadicScalar> = vec![];
    let mut pw = PadicScalar::one(&cfg);
    for a in coeffs {
        scaled.push(a.mul_raw(&pw));
        pw = pw.mul_raw(&c);
    }
    let unit_roots = unit_roots(&scaled, &cfg, 0)?;
    let mut out = vec![];
    for w in unit_roots {
        let root = w.mul_raw(&c);
        // certification against the original polynomial
        let res = eval_poly(coeffs, &root);
        let bound = residual_bound(coeffs, target_valuation, &cfg);
        if !res.val_at_least(bound) {
            return Err(PadicError::PrecisionExhausted { min: HENSEL_MARGIN });
        }
        out.push(root);
    }
    if out.is_empty() {
        return Err(PadicError::NoRootsInField);
    }
    Ok(out)
}

/// Residual threshold scaled by the polynomial's height along the slope.
fn residual_bound(coeffs: &[PadicScalar], target: Rat, cfg: &FieldConfig) -> Rat {
    let min_val = coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            c.val_info().exact().map(|v| v + target * Rat::from_integer(i as i128))
        })
        .min()
        .unwrap_or_else(Rat::zero);
    min_val + rat((cfg.precision() as i128) - (HENSEL_MARGIN as i128), 1)
}

/// Roots of `q` that are units, by residue enumeration, Newton lifting and
/// recentering on residue collisions.  `depth` counts recenterings.
fn unit_roots(
    q: &[PadicScalar],
    cfg: &FieldConfig,
    depth: u32,
) -> Result<Vec<PadicScalar>, PadicError> {
    if depth > 2 * cfg.precision() {
        return Err(PadicError::NotSquarefree);
    }
    // normalize so the minimum coefficient valuation is 0
    let min_val = q
        .iter()
        .filter_map(|c| c.val_info().exact())
        .min()
        .ok_or(PadicError::PrecisionExhausted { min: 0 })?;
    let scale = PadicScalar::uniformizer_pow(cfg, -min_val)?;
    let normalized: Vec<PadicScalar> = q.iter().map(|c| c.mul_raw(&scale)).collect();
    let rf = cfg.residue_field();
    let reduced = super::residue::ResiduePoly::new(
        rf,
        normalized
            .iter()
            .map(|c| if c.val_at_least(rat(1, 1)) { Ok(rf.zero()) } else { c.reduce() })
            .collect::<Result<Vec<_>, _>>()?,
    );
    if reduced.degree().unwrap_or(0) == 0 {
        return Ok(vec![]);
    }
    let deriv = derivative(&normalized, cfg);
    let mut out = vec![];
    for (r, m) in reduced.roots() {
        if r.is_zero() {
            continue; // not a unit root
        }
        let seed = PadicScalar::lift(cfg, &r);
        if m == 1 {
            // a simple residue root lifts directly unless deeper roots
            // crowd the Newton ball; crowding falls through to recentering
            if let Ok(root) = newton_lift(&normalized, &deriv, seed.clone(), cfg) {
                out.push(root);
                continue;
            }
        }
        // residue collision (or crowded ball): recenter w = r + p*u and
        // recurse over the shifted polynomial in u
        let p_elem = PadicScalar::one(cfg).shift_p(1);
        let shifted = compose_affine(&normalized, &seed, &p_elem, cfg);
        let sub = all_integral_roots(&shifted, cfg, depth + 1)?;
        for u in sub {
            out.push(seed.add_raw(&u.mul_raw(&p_elem)));
        }
    }
    Ok(out)
}

/// All roots with valuation >= 0, used by the recentering recursion.
fn all_integral_roots(
    q: &[PadicScalar],
    cfg: &FieldConfig,
    depth: u32,
) -> Result<Vec<PadicScalar>, PadicError> {
    let polygon = NewtonPolygon::build(q)?;
    let mut out = vec![];
    // a root exactly at the recentered origin
    if polygon.vanishing_order > 0 {
        if polygon.vanishing_order > 1 {
            return Err(PadicError::NotSquarefree);
        }
        out.push(PadicScalar::zero(cfg));
    }
    for (v, _) in polygon.root_valuations() {
        if v < Rat::zero() || !cfg.in_value_group(v) {
            continue;
        }
        let c = PadicScalar::uniformizer_pow(cfg, v)?;
        let mut scaled: Vec<PadicScalar> = vec![];
        let mut pw = PadicScalar::one(cfg);
        for a in q {
            scaled.push(a.mul_raw(&pw));
            pw = pw.mul_raw(&c);
        }
        for w in unit_roots(&scaled, cfg, depth)? {
            out.push(w.mul_raw(&c));
        }
    }
    Ok(out)
}

/// `q(a + c u)` as a polynomial in `u`.
fn compose_affine(
    q: &[PadicScalar],
    a: &PadicScalar,
    c: &PadicScalar,
    cfg: &FieldConfig,
) -> Vec<PadicScalar> {
    // Horner in (a + c u)
    let mut acc: Vec<PadicScalar> = vec![PadicScalar::zero(cfg)];
    for coeff in q.iter().rev() {
        // acc = acc * (a + c u) + coeff
        let mut next = vec![PadicScalar::zero(cfg); acc.len() + 1];
        for (i, t) in acc.iter().enumerate() {
            next[i] = next[i].add_raw(&t.mul_raw(a));
            next[i + 1] = next[i + 1].add_raw(&t.mul_raw(c));
        }
        next[0] = next[0].add_raw(coeff);
        acc = next;
    }
    while acc.len() > 1 && acc.last().is_some_and(|x| x.is_exact_zero()) {
        acc.pop();
    }
    acc
}

fn newton_lift(
    q: &[PadicScalar],
    deriv: &[PadicScalar],
    seed: PadicScalar,
    cfg: &FieldConfig,
) -> Result<PadicScalar, PadicError> {
    // quadratic convergence needs |f(seed)| < |f'(seed)|^2
    let f0 = eval_poly(q, &seed);
    let df0 = eval_poly(deriv, &seed);
    let v_f = match f0.val_info() {
        ValInfo::Zero => return Ok(seed),
        ValInfo::Exact(v) => v,
        ValInfo::AtLeast(f) => f,
    };
    match df0.val_info() {
        ValInfo::Exact(v) if v_f > v * rat(2, 1) => {}
        _ => return Err(PadicError::NotSquarefree),
    }
    let mut x = seed;
    let target = rat((cfg.precision() as i128).saturating_sub(2), 1);
    for _ in 0..(cfg.precision() + 4) {
        let fx = eval_poly(q, &x);
        if fx.val_at_least(target) {
            return Ok(x);
        }
        let dfx = eval_poly(deriv, &x);
        let step = fx.div_raw(&dfx)?;
        if !matches!(step.val_info(), super::scalar::ValInfo::Exact(_)) {
            // the correction is below certified resolution: the iterate is
            // already a root to full representable depth
            break;
        }
        x = x.sub_raw(&step);
    }
    let fx = eval_poly(q, &x);
    if fx.val_at_least(rat(
        (cfg.precision() as i128) - (HENSEL_MARGIN as i128),
        1,
    )) {
        Ok(x)
    } else {
        Err(PadicError::NotSquarefree)
    }
}

/// Convenience: exact evaluation of a scalar polynomial (tolerant layer).
pub fn eval(coeffs: &[PadicScalar], x: &PadicScalar) -> PadicScalar {
    eval_poly(coeffs, x)
}

/// Derivative coefficients (tolerant layer).
pub fn diff(coeffs: &[PadicScalar], cfg: &FieldConfig) -> Vec<PadicScalar> {
    derivative(coeffs, cfg)
}
