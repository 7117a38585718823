//! Error taxonomy shared by every module of the crate.
//!
//! Domain violations (outside a convergence region, on a theta zero set, on a
//! resonant parameter lattice) are reported eagerly, before any summation
//! starts, so that a returned value is always meaningful. Truncation failures
//! carry enough diagnostics to tell which one-sided tail refused to decay.

use std::fmt;

use thiserror::Error;

/// Which one-sided tail of a bilateral sum a diagnostic refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumSide {
    /// Terms with index n >= 0.
    Positive,
    /// Terms with index n <= -1.
    Negative,
}

impl fmt::Display for SumSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SumSide::Positive => f.write_str("positive"),
            SumSide::Negative => f.write_str("negative"),
        }
    }
}

/// Errors produced by evaluation, transformation, and verification routines.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// Context construction rejected its inputs (|q| outside (0,1), a
    /// non-positive eps, or a term cap below the minimum).
    #[error("invalid context: {reason}")]
    InvalidContext { reason: String },

    /// A parameter sits within tolerance of a q-power lattice on which the
    /// requested formula degenerates (a vanishing theta factor or infinite
    /// Pochhammer product in a denominator).
    #[error("resonant parameter: {what} lies on {lattice} within tolerance")]
    ResonantParameter { what: String, lattice: String },

    /// A factor 1 - a*q^{-k} of a negative-order q-Pochhammer symbol is below
    /// tolerance in magnitude, so the finite product cannot be divided out.
    #[error("vanishing factor 1 - a*q^(-{k}) in a q-Pochhammer symbol (|factor| = {magnitude:.3e})")]
    DivisionByVanishingFactor { k: i64, magnitude: f64 },

    /// The theta function was requested at 0, where it has an essential
    /// singularity.
    #[error("theta function argument must be nonzero")]
    ZeroArgument,

    /// A truncated sum reached its term cap before the stopping rule fired.
    #[error("term cap {cap} reached before convergence{}; last term magnitude {last_term_mag:.3e}",
        side.map(|s| format!(" ({s} side not decaying)")).unwrap_or_default())]
    MaxTermsExceeded {
        cap: usize,
        /// For bilateral sums, the side whose tail failed; None for
        /// unilateral sums and infinite products.
        side: Option<SumSide>,
        last_term_mag: f64,
    },

    /// The evaluation point violates the series' convergence region.
    #[error("outside convergence domain: {what}")]
    OutsideConvergenceDomain { what: String },

    /// A unilateral series with more numerator than denominator-plus-one
    /// parameters has radius of convergence 0.
    #[error("series with {r} numerator and {s} denominator parameters diverges for every nonzero argument")]
    DivergentSeries { r: usize, s: usize },

    /// A bilateral series with more numerator than denominator parameters
    /// diverges around the origin for every x; the (2,1) case must be
    /// evaluated through `resum_2psi1`, its Borel-Laplace resummation.
    #[error("bilateral series with more numerator than denominator parameters diverges around the origin; use resum_2psi1 for the (2,1) case")]
    DivergentAtOrigin,

    /// The evaluation point lies on the forbidden spiral -lambda*q^Z, where a
    /// theta denominator of the Laplace sum vanishes.
    #[error("evaluation point collides with the spiral -lambda*q^{k}")]
    SpiralCollision { k: i64 },

    /// The transform argument lies on -q^Z, where the theta prefactor of the
    /// continuation formula vanishes.
    #[error("argument lies on the theta zero set -q^{k}")]
    ThetaPole { k: i64 },

    /// A theta factor of a closed-form expression vanishes at this point.
    #[error("theta factor {which} vanishes at this point (argument on -q^{k})")]
    ThetaZero { which: String, k: i64 },

    /// A denominator factor of an infinite-product formula vanishes.
    #[error("infinite product pole: denominator factor ({factor}; q)_inf vanishes (argument on q^{k})")]
    PoleInProduct { factor: String, k: i64 },

    /// A sweep configuration is malformed.
    #[error("invalid configuration: {reason}")]
    ConfigError { reason: String },

    /// Report or configuration file I/O failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
