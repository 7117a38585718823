//! Core q-series arithmetic.
//!
//! Everything downstream builds on the pieces defined here:
//!
//! - [`QContext`]: the base q together with precision and truncation policy.
//! - [`qpochhammer`], [`qpochhammer_inf`], [`qpochhammer_multi`]: the
//!   q-shifted factorial (a; q)_n for integer, infinite, and joint orders.
//! - [`theta`]: the Jacobi theta function sum_{n in Z} q^(n(n-1)/2) x^n.
//! - [`phi_series`] / [`psi_series`]: unilateral and bilateral basic
//!   hypergeometric series with truncation diagnostics.
//!
//! All sums run on an extended-range accumulator, so intermediate factors
//! like q^(n(n-1)/2) never overflow even though they leave `f64` range
//! near n = 40.

pub mod scalar;

mod pochhammer;
mod scaled;
mod series;
mod theta;

pub use pochhammer::{qpochhammer, qpochhammer_inf, qpochhammer_multi};
pub use series::{phi_series, psi_series};
pub use theta::theta;

pub(crate) use pochhammer::qpochhammer_multi_scaled;
pub(crate) use scaled::{c_abs, c_abs_f64, c_from_f64, cpowi_plain, term_status, Scaled};
pub(crate) use series::{fmt_c, phi_series_scaled, psi_series_scaled, sum_bilateral_scaled};
pub(crate) use theta::theta_scaled;

use num_complex::Complex;


use crate::error::{Error, Result};
use scalar::QReal;

/// Default truncation cap when a context does not override it.
pub const DEFAULT_MAX_TERMS: usize = 4096;

/// Number of consecutive sub-threshold terms required before a tail is
/// declared converged. A single small term can be an accidental
/// near-cancellation; three in a row cannot, because each term ratio here
/// is a fixed rational function of q^n.
pub(crate) const STOP_RUN: usize = 3;

/// Minimum terms examined per direction before the stopping rule may fire,
/// so a short run of zero coefficients in a polynomial cannot fake
/// convergence ahead of its top-degree term.
pub(crate) const MIN_TERMS: usize = 8;

/// Evaluation context: the base q plus precision and truncation policy.
///
/// A context is cheap to copy and is threaded by value through every
/// evaluation routine.
#[derive(Clone, Copy, Debug)]
pub struct QContext<T: QReal> {
    /// Base of the q-series, required to satisfy 0 < |q| < 1.
    pub q: Complex<T>,
    /// Mantissa bits of the working scalar (53 for `f64`).
    pub precision_bits: u32,
    /// Relative truncation target for series tails.
    pub eps: f64,
    /// Hard cap on summed terms per direction.
    pub max_terms: usize,
}

impl<T: QReal> QContext<T> {
    /// Creates a context after validating `0 < |q| < 1`.
    ///
    /// The truncation target defaults to 100 rounding units of the scalar,
    /// and the term cap to [`DEFAULT_MAX_TERMS`].
    pub fn new(q: Complex<T>) -> Result<Self> {
        let mag = c_abs_f64(q);
        if !(mag > 0.0 && mag < 1.0) {
            return Err(Error::InvalidContext {
                reason: format!("|q| = {mag:e} is outside the open interval (0, 1)"),
            });
        }
        Ok(QContext {
            q,
            precision_bits: T::PRECISION_BITS,
            eps: 100.0 * T::EPSILON,
            max_terms: DEFAULT_MAX_TERMS,
        })
    }

    /// Replaces the relative truncation target.
    pub fn with_eps(self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidContext {
                reason: format!("eps = {eps:e} must be positive"),
            });
        }
        Ok(QContext { eps, ..self })
    }

    /// Replaces the per-direction term cap (at least 8).
    pub fn with_max_terms(self, max_terms: usize) -> Result<Self> {
        if max_terms < 8 {
            return Err(Error::InvalidContext {
                reason: format!("max_terms = {max_terms} is below the minimum of 8"),
            });
        }
        Ok(QContext { max_terms, ..self })
    }

    /// Relative tolerance for deciding that a parameter sits on a q-power
    /// lattice. 1000 rounding units absorbs the drift of the iterated
    /// products used to reach the lattice point while staying far below
    /// any deliberate parameter separation.
    pub fn resonance_tol(&self) -> f64 {
        1e3 * T::EPSILON
    }

    /// |q| as an `f64`, used throughout for tail estimates.
    pub(crate) fn q_mag(&self) -> f64 {
        c_abs_f64(self.q)
    }
}

/// A truncated series value together with its convergence diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct TruncatedValue<T: QReal> {
    /// The accumulated sum.
    pub value: Complex<T>,
    /// Terms taken with index n >= 0.
    pub terms_used_pos: usize,
    /// Terms taken with index n < 0 (zero for unilateral series).
    pub terms_used_neg: usize,
    /// Magnitude of the last term examined, relative to max(|value|, 1).
    pub last_term_mag: f64,
    /// True when every tail met the stopping rule before its term cap.
    pub converged: bool,
}

/// Internal accumulator state shared by the series drivers.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Trunc {
    pub pos: usize,
    pub neg: usize,
    pub mag: f64,
    pub converged: bool,
}

impl Trunc {
    pub(crate) fn unilateral(pos: usize, mag: f64, converged: bool) -> Self {
        Trunc {
            pos,
            neg: 0,
            mag,
            converged,
        }
    }

    pub(crate) fn merge(self, other: Trunc) -> Self {
        Trunc {
            pos: self.pos + other.pos,
            neg: self.neg + other.neg,
            mag: self.mag.max(other.mag),
            converged: self.converged && other.converged,
        }
    }

    pub(crate) fn into_value<T: QReal>(self, value: Complex<T>) -> TruncatedValue<T> {
        TruncatedValue {
            value,
            terms_used_pos: self.pos,
            terms_used_neg: self.neg,
            last_term_mag: self.mag,
            converged: self.converged,
        }
    }
}

/// Which series family a parameter list describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// Unilateral r_phi_s, summed over n >= 0.
    UnilateralPhi,
    /// Bilateral r_psi_s, summed over all integers n.
    BilateralPsi,
}

/// Numerator and denominator parameters of a basic hypergeometric series.
#[derive(Clone, Debug)]
pub struct SeriesSpec<T: QReal> {
    /// Upper parameters a_1, ..., a_r.
    pub numerator: Vec<Complex<T>>,
    /// Lower parameters b_1, ..., b_s.
    pub denominator: Vec<Complex<T>>,
    /// Unilateral or bilateral summation.
    pub kind: SeriesKind,
}

impl<T: QReal> SeriesSpec<T> {
    /// Spec for the unilateral series r_phi_s.
    pub fn phi(numerator: Vec<Complex<T>>, denominator: Vec<Complex<T>>) -> Self {
        SeriesSpec {
            numerator,
            denominator,
            kind: SeriesKind::UnilateralPhi,
        }
    }

    /// Spec for the bilateral series r_psi_s.
    pub fn psi(numerator: Vec<Complex<T>>, denominator: Vec<Complex<T>>) -> Self {
        SeriesSpec {
            numerator,
            denominator,
            kind: SeriesKind::BilateralPsi,
        }
    }
}

/// Which part of the lattice { q^k } a membership test should cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum QPowerLattice {
    /// All integer exponents.
    All,
    /// Exponents k <= 0, the zeros of (a; q)_inf in the a-plane.
    NonPositive,
    /// Exponents k >= 1.
    Positive,
}

/// Detects whether z sits on the lattice q^k (within the resonance
/// tolerance) and returns the exponent if so.
///
/// The candidate exponent comes from log|z| / log|q|; the three nearest
/// integers are then checked multiplicatively, which also verifies the
/// argument of z and not just its magnitude.
pub(crate) fn q_power_index<T: QReal>(
    z: Complex<T>,
    ctx: &QContext<T>,
    lattice: QPowerLattice,
) -> Option<i64> {
    let zm = c_abs_f64(z);
    if zm == 0.0 || !zm.is_finite() {
        return None;
    }
    let k_est = (zm.ln() / ctx.q_mag().ln()).round();
    if !k_est.is_finite() || k_est.abs() > 1e6 {
        return None;
    }
    let k0 = k_est as i64;
    let tol = ctx.resonance_tol();
    for k in [k0 - 1, k0, k0 + 1] {
        match lattice {
            QPowerLattice::All => {}
            QPowerLattice::NonPositive if k > 0 => continue,
            QPowerLattice::Positive if k < 1 => continue,
            _ => {}
        }
        let qk = q_pow_i64(ctx.q, k);
        let diff = c_abs_f64(z - qk);
        if diff <= tol * c_abs_f64(qk) {
            return Some(k);
        }
    }
    None
}

/// q^k for possibly negative k, without leaving the representable range
/// (|k| stays small at every call site).
pub(crate) fn q_pow_i64<T: QReal>(q: Complex<T>, k: i64) -> Complex<T> {
    let p = cpowi_plain(q, k.unsigned_abs().min(u64::from(u32::MAX)) as u32);
    if k < 0 {
        Complex::from(T::one()) / p
    } else {
        p
    }
}
