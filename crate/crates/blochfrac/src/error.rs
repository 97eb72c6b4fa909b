//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by weight, series, norm, kernel, and construction operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Radius outside `[0, 1)` where an interior point was required.
    #[error("radius {r} outside [0, 1)")]
    RadiusOutOfRange { r: f64 },

    /// A tail evaluation produced a negative or non-finite value.
    #[error("tail at r = {r} evaluated to {value}; weight data is invalid")]
    InvalidTail { r: f64, value: f64 },

    /// The tail is mathematically positive but below the smallest positive double.
    /// Grid sweeps treat this as a truncation signal, not a failure.
    #[error("tail underflowed to zero at 1 - r = {one_minus_r:.3e}")]
    TailUnderflow { one_minus_r: f64 },

    /// Bad construction parameters for a weight family.
    #[error("invalid weight parameters: {0}")]
    BadWeight(String),

    /// Weight-spec string could not be parsed.
    #[error("weight spec error at byte {position}: {message}")]
    SpecParse { position: usize, message: String },

    /// Malformed tabulated-weight data.
    #[error("tabulated weight: {0}")]
    BadTable(String),

    /// Quadrature failed to converge or produced a non-finite value.
    #[error("quadrature ({context}): {message} after {panels} panels")]
    Quadrature {
        context: &'static str,
        message: String,
        panels: usize,
    },

    /// Series truncation drops a non-negligible tail.
    #[error(
        "truncation at N = {n} drops an estimated {ratio:.3e} of the sum; \
         a bound below {target:.1e} needs N >= {suggested}"
    )]
    Truncation {
        n: usize,
        ratio: f64,
        target: f64,
        suggested: usize,
    },

    /// Requested construction depth is not representable for this weight.
    #[error("depth {requested} unreachable for this tail; deepest attainable level is {achievable}")]
    DepthUnreachable { requested: usize, achievable: usize },

    /// Polynomial degree exceeds a hard representation cap.
    #[error("degree {degree} exceeds the dense-representation cap {cap}")]
    DegreeCap { degree: u64, cap: u64 },

    /// Sampled-difference derivative order out of range.
    #[error("derivative order {m} unsupported (sampled differences go up to 4)")]
    UnsupportedOrder { m: usize },

    /// An operation needed a pointwise density but the weight has none.
    #[error("weight '{0}' carries no pointwise density")]
    DensityRequired(String),

    /// Moment exponent outside the admissible range.
    #[error("moment exponent {x} out of range ({requirement})")]
    BadExponent { x: f64, requirement: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;
