//! Exact-arithmetic dynamics on the Berkovich projective line over p-adic
//! fields: periodic-point classification, Weierstrass-degree analysis on
//! annuli, and bifurcation detection in one-parameter analytic families.
//!
//! Everything is computed in exact valuation/exponent arithmetic; unit
//! digits are tracked to a configured relative precision and only certify
//! Hensel steps.  No predicate in this crate compares floating-point
//! numbers.

pub mod berk;
pub mod dynamics;
pub mod families;
pub mod padic;
pub mod poly;
pub mod series;

pub use berk::{BerkPoint, Norm, RadiusExp, TangentDir};
pub use dynamics::{PeriodicPointRecord, PointClass, RationalMap};
pub use families::{AnalyticFamily, BifurcationFlag, BifurcationReport, ParamPoint};
pub use padic::{FieldConfig, NewtonPolygon, PadicScalar, Rat, ResidueElem, ResidueField};
pub use poly::Poly;
