use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("root extraction supports degrees 1 to 3, got degree {0}")]
    DegreeUnsupported(usize),

    #[error("transfer function evaluated at a pole (|den| = {0:e})")]
    EvalAtPole(f64),

    #[error("denominator polynomial is zero")]
    ZeroDenominator,

    #[error("no common factor (s - {root}) to cancel within relative tolerance {tol:e}")]
    NoCommonFactor { root: f64, tol: f64 },

    #[error("controller integral time {ti} does not cancel plant pole at -1/{t1}")]
    CancellationRequired { ti: f64, t1: f64 },

    #[error("transfer function is not strictly proper (num degree {num}, den degree {den})")]
    NotStrictlyProper { num: usize, den: usize },

    #[error("state-space realization supports denominator degree up to 3, got {0}")]
    RealizationTooLarge(usize),

    #[error("system is unstable: pole with real part {0:e}")]
    UnstableSystem(f64),

    #[error("step response has not settled into the {band} band (final value {final_value})")]
    NotSettled { band: f64, final_value: f64 },

    #[error("invalid frequency range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("frequency grid must be strictly positive and ascending")]
    InvalidGrid,

    #[error("gain crossover not bracketed: |L| = {mag_lo} at {lo} rad/s, {mag_hi} at {hi} rad/s")]
    NotBracketed {
        lo: f64,
        hi: f64,
        mag_lo: f64,
        mag_hi: f64,
    },
}

/// Validates a strictly positive finite parameter.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            requirement: "> 0",
            value,
        })
    }
}
