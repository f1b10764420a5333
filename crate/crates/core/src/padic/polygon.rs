//! Newton polygons: lower convex hulls of `(index, valuation)` point sets.
//!
//! The polygon of a polynomial is the root-valuation oracle used throughout:
//! a segment of slope `s` and horizontal length `l` certifies `l` roots of
//! valuation `-s` (in the algebraic closure), and the order of vanishing at
//! the origin is tracked separately.

use super::scalar::{PadicScalar, Rat, ValInfo};
use super::PadicError;

/// Lower convex hull data for a polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Order of vanishing at 0 (index of the first nonzero coefficient).
    pub vanishing_order: usize,
    /// `(slope, length)` pairs with strictly increasing slopes.
    pub segments: Vec<(Rat, usize)>,
    /// Degree of the certified part (last index with exact valuation).
    pub degree: usize,
    /// Hull height at `vanishing_order`.
    start: Rat,
    /// Indices whose coefficients lost all digits; their valuation floors
    /// were verified to lie on or above the hull.
    uncertified: Vec<(usize, Rat)>,
}

impl NewtonPolygon {
    /// Build the polygon of `sum coeffs[i] z^i`.
    ///
    /// Coefficients with lost digits are tolerated as long as their
    /// valuation floor certifies they lie on or above the hull through the
    /// exact points; otherwise the polygon itself is indeterminate.
    pub fn build(coeffs: &[PadicScalar]) -> Result<Self, PadicError> {
        let mut exact: Vec<(usize, Rat)> = vec![];
        let mut lost: Vec<(usize, Rat)> = vec![];
        for (i, c) in coeffs.iter().enumerate() {
            match c.val_info() {
                ValInfo::Zero => {}
                ValInfo::Exact(v) => exact.push((i, v)),
                ValInfo::AtLeast(f) => lost.push((i, f)),
            }
        }
        if exact.is_empty() {
            if lost.is_empty() {
                return Err(PadicError::ZeroPolynomial);
            }
            return Err(PadicError::PrecisionExhausted { min: 0 });
        }
        let vanishing_order = exact[0].0;
        let degree = exact.last().unwrap().0;
        // monotone scan for the lower hull over exact points
        let mut hull: Vec<(usize, Rat)> = vec![];
        for &(i, v) in &exact {
            while hull.len() >= 2 {
                let (x1, y1) = hull[hull.len() - 2];
                let (x2, y2) = hull[hull.len() - 1];
                // drop (x2,y2) if it is on or above the segment (x1,y1)-(i,v)
                let lhs = (y2 - y1) * Rat::from_integer((i - x1) as i128);
                let rhs = (v - y1) * Rat::from_integer((x2 - x1) as i128);
                if lhs >= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push((i, v));
        }
        let start = hull[0].1;
        let mut segments: Vec<(Rat, usize)> = vec![];
        for w in hull.windows(2) {
            let (x1, y1) = w[0];
            let (x2, y2) = w[1];
            let slope = (y2 - y1) / Rat::from_integer((x2 - x1) as i128);
            match segments.last_mut() {
                Some((ps, pl)) if *ps == slope => *pl += x2 - x1,
                _ => segments.push((slope, x2 - x1)),
            }
        }
        let polygon =
            NewtonPolygon { vanishing_order, segments, degree, start, uncertified: lost };
        for &(i, floor) in &polygon.uncertified {
            if i < polygon.vanishing_order || i > polygon.degree {
                continue; // tail indices are handled by query-time checks
            }
            if floor < polygon.hull_at(i) {
                return Err(PadicError::PrecisionExhausted { min: 0 });
            }
        }
        Ok(polygon)
    }

    /// Hull height at index `i` within `[vanishing_order, degree]`.
    fn hull_at(&self, i: usize) -> Rat {
        debug_assert!(i >= self.vanishing_order && i <= self.degree);
        let mut x = self.vanishing_order;
        let mut y = self.start;
        for &(s, l) in &self.segments {
            if i <= x + l {
                return y + s * Rat::from_integer((i - x) as i128);
            }
            y = y + s * Rat::from_integer(l as i128);
            x += l;
        }
        y
    }

    /// Root valuations with multiplicity, one entry per segment.
    pub fn root_valuations(&self) -> Vec<(Rat, usize)> {
        self.segments.iter().map(|&(s, l)| (-s, l)).collect()
    }

    /// Number of roots whose valuation satisfies both predicates.  Roots at
    /// the origin (the vanishing order) have infinite valuation and are not
    /// counted.
    pub fn count_val_where<F, G>(&self, above: F, below: G) -> usize
    where
        F: Fn(&Rat) -> bool,
        G: Fn(&Rat) -> bool,
    {
        self.root_valuations()
            .iter()
            .filter(|(v, _)| above(v) && below(v))
            .map(|(_, l)| l)
            .sum()
    }

    /// Multiplicity of roots with exactly the given valuation.
    pub fn count_at(&self, v: Rat) -> usize {
        self.count_val_where(|x| *x == v, |_| true)
    }

    /// Total number of roots away from the origin.
    pub fn total_length(&self) -> usize {
        self.segments.iter().map(|&(_, l)| l).sum()
    }

    /// Whether indices beyond the certified degree carry lost coefficients.
    pub fn has_uncertified_tail(&self) -> bool {
        self.uncertified.iter().any(|&(i, _)| i > self.degree)
    }
}
