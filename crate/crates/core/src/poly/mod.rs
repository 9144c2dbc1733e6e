//! Exact polynomials: homogeneous forms ([`HomPoly`]), univariate affine
//! polynomials ([`UniPoly`]) and affine bivariate polynomials ([`BiPoly`]),
//! plus the text grammar used by instance files.

mod bi;
mod hom;
mod parse;
mod uni;

pub use bi::BiPoly;
pub use hom::{binary_divisor, BinaryDivisor, HomPoly};
pub use parse::{parse_form, parse_forms, parse_poly, ParseError, ParsedPoly, MAX_DEGREE};
pub use uni::UniPoly;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("gcd of two zero polynomials")]
    BothZero,
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("resultant of two constants")]
    BothConstant,
    #[error("substitution matrix is singular")]
    SingularMatrix,
    #[error("division is not exact")]
    InexactDivision,
    #[error("terms of degree {found} in a form of degree {expected}")]
    NotHomogeneous { expected: u32, found: u32 },
    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
}
