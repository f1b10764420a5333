//! Exact p-adic scalar arithmetic with tracked precision.
//!
//! The working field is either `Q_p` (p an odd prime) or a single quadratic
//! extension `Q_p(sqrt d)`.  Every scalar carries an exact valuation (a
//! rational with denominator dividing the ramification index) together with
//! finitely many certified unit digits.  Valuations are what the dynamical
//! predicates consume; digits only certify Hensel steps.
//!
//! Submodules:
//! * [`scalar`] — `FieldConfig`, `PadicScalar` and arithmetic,
//! * [`residue`] — the finite residue field (order `p` or `p^2`) and
//!   polynomial utilities over it,
//! * [`polygon`] — Newton polygons (the disc/annulus root-valuation oracle),
//! * [`hensel`] — square roots and certified root finding.

pub mod hensel;
pub mod polygon;
pub mod residue;
pub mod scalar;

pub use hensel::{hensel_roots, sqrt};
pub use polygon::NewtonPolygon;
pub use residue::{ResidueElem, ResidueField, ResiduePoly};
pub use scalar::{FieldConfig, PadicScalar, Rat, ValInfo};

use thiserror::Error;

/// Errors raised by scalar and root-finding operations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PadicError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: fewer than {min} certified digits remain")]
    PrecisionExhausted { min: u32 },
    #[error("operand is not integral (valuation {val} < 0)")]
    NotIntegral { val: String },
    #[error("element is not a square in the working field")]
    NotASquare,
    #[error("square root of an element of odd valuation")]
    OddValuation,
    #[error("zero polynomial has no Newton polygon")]
    ZeroPolynomial,
    #[error("polynomial is not squarefree at the requested slope")]
    NotSquarefree,
    #[error("no roots of the requested valuation exist in the working field")]
    NoRootsInField,
    #[error("field configurations of the operands differ")]
    ConfigMismatch,
    #[error("invalid field configuration: {0}")]
    BadConfig(String),
}
