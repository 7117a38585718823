//! Jacobi theta function.
//!
//! theta(x) = sum_{n in Z} q^(n(n-1)/2) x^n, computed directly from the
//! bilateral sum. The term ratios are q^n x going up and q^(m+1)/x going
//! down (for the step from -m to -m-1... from n to n-1 at n = -m), so both
//! tails decay like q^(n^2/2) and the sum converges for every x != 0.
//!
//! The triple-product factorization (q, -x, -q/x; q)_inf is used by the
//! verification suite as an independent cross-check, not by this routine.


use num_complex::Complex;

use crate::error::{Error, Result, SumSide};
use super::scalar::QReal;
use super::scaled::{term_status, Scaled};
use super::{QContext, Trunc, TruncatedValue, MIN_TERMS, STOP_RUN};

/// Sums one direction of a bilateral series by running term ratios.
///
/// `term` enters as the first term of this direction (index 1 in direction
/// steps), `ratio` as the multiplicative step, and `ratio_step` as the
/// factor applied to the ratio after every term (q for theta-type decay).
/// The accumulated partial sum is added onto `sum` in place.
pub(crate) fn sum_direction<T: QReal>(
    sum: &mut Scaled<T>,
    mut term: Scaled<T>,
    mut ratio: Scaled<T>,
    ratio_step: Complex<T>,
    ctx: &QContext<T>,
    side: SumSide,
) -> Result<(usize, f64)> {
    let mut run = 0;
    let mut last_mag = 0.0;
    for k in 0..ctx.max_terms {
        *sum = sum.add(term);
        let (mag, below) = term_status(term, *sum, ctx.eps);
        last_mag = mag;
        if below {
            run += 1;
            if run >= STOP_RUN && k + 1 >= MIN_TERMS {
                return Ok((k + 1, mag));
            }
        } else {
            run = 0;
        }
        term = term.mul(ratio);
        ratio = ratio.mul_complex(ratio_step);
    }
    Err(Error::MaxTermsExceeded {
        cap: ctx.max_terms,
        side: Some(side),
        last_term_mag: last_mag,
    })
}

/// Shared core of [`theta`], returning the extended-range sum.
pub(crate) fn theta_scaled<T: QReal>(
    x: Complex<T>,
    ctx: &QContext<T>,
) -> Result<(Scaled<T>, Trunc)> {
    if x.re.is_zero() && x.im.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let mut sum = Scaled::one();
    let xs = Scaled::from_complex(x);
    // Ascending: the step from T_n to T_{n+1} multiplies by q^n x; the
    // first step out of T_1 = x is therefore qx, and each later step
    // picks up another factor q.
    let (pos, pos_mag) = sum_direction(
        &mut sum,
        xs,
        xs.mul_complex(ctx.q),
        ctx.q,
        ctx,
        SumSide::Positive,
    )?;
    // Descending: the step from T_{-m} to T_{-m-1} multiplies by
    // q^(m+1)/x; the first step out of T_{-1} = q/x is q^2/x.
    let qx = Scaled::from_complex(ctx.q).div_complex(x);
    let (neg, neg_mag) = sum_direction(
        &mut sum,
        qx,
        qx.mul_complex(ctx.q),
        ctx.q,
        ctx,
        SumSide::Negative,
    )?;
    let trunc = Trunc {
        pos: pos + 1,
        neg,
        mag: pos_mag.max(neg_mag),
        converged: true,
    };
    Ok((sum, trunc))
}

/// The theta function sum_{n in Z} q^(n(n-1)/2) x^n.
///
/// Vanishes exactly on x in -q^Z (numerically: returns a value at rounding
/// scale there). Errors with [`Error::ZeroArgument`] at x = 0.
pub fn theta<T: QReal>(x: Complex<T>, ctx: &QContext<T>) -> Result<TruncatedValue<T>> {
    let (sum, trunc) = theta_scaled(x, ctx)?;
    Ok(trunc.into_value(sum.to_complex()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: f64) -> QContext<f64> {
        QContext::new(Complex::new(q, 0.0)).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_zero_argument() {
        let err = theta(c(0.0, 0.0), &ctx(0.5)).unwrap_err();
        assert!(matches!(err, Error::ZeroArgument));
    }

    #[test]
    fn frozen_value_at_one() {
        let v = theta(c(1.0, 0.0), &ctx(0.5)).unwrap();
        assert!(v.converged);
        assert!((v.value - c(3.2832651213103077, 0.0)).norm() < 1e-14);
        assert!(v.terms_used_neg > 0);
    }

    #[test]
    fn frozen_complex_value() {
        let v = theta(c(0.8, 0.5), &ctx(0.4)).unwrap();
        let expected = c(2.3387627173913132, 0.5817088254546773);
        assert!((v.value - expected).norm() < 1e-14);
    }

    #[test]
    fn vanishes_at_minus_one() {
        // Terms n and 1-n share the exponent n(n-1)/2 and cancel in pairs.
        let v = theta(c(-1.0, 0.0), &ctx(0.5)).unwrap();
        assert!(v.value.norm() < 1e-14);
    }

    #[test]
    fn inversion_formula() {
        let ctx = ctx(0.3);
        let t2 = theta(c(2.0, 0.0), &ctx).unwrap().value;
        let th = theta(c(0.5, 0.0), &ctx).unwrap().value;
        assert!((th * 2.0 - t2).norm() < 1e-13 * t2.norm());
    }

    #[test]
    fn shift_by_q_matches_quasi_periodicity() {
        // theta(qx) = x^{-1} theta(x)
        let ctx = ctx(0.45);
        let x = c(1.3, 0.7);
        let lhs = theta(ctx.q * x, &ctx).unwrap().value;
        let rhs = theta(x, &ctx).unwrap().value / x;
        assert!((lhs - rhs).norm() < 1e-13 * rhs.norm());
    }

    #[test]
    fn tiny_and_huge_arguments_stay_finite() {
        let ctx = ctx(0.5);
        for mag in [1e-8, 1e8] {
            let v = theta(c(mag, 0.0), &ctx).unwrap();
            assert!(v.converged);
            assert!(v.value.norm() > 0.0);
        }
    }

    #[test]
    fn double_double_reaches_25_digits() {
        use crate::qcore::scalar::{Dd, QReal};
        use num_traits::Num;
        let q = Complex::new(Dd::from_f64(0.5), Dd::from_f64(0.0));
        let ctx = QContext::new(q).unwrap();
        let v = theta(Complex::new(Dd::ONE, Dd::from_f64(0.0)), &ctx).unwrap();
        let expected = <Dd as Num>::from_str_radix("3.283265121310307732587686", 10).unwrap();
        let err = (v.value.re - expected).abs().to_f64().abs();
        assert!(err < 1e-24, "err = {err:e}");
        assert!(v.value.im.to_f64().abs() < 1e-30);
    }

    #[test]
    fn last_term_contract_holds() {
        let ctx = ctx(0.5);
        let v = theta(c(0.8, -0.3), &ctx).unwrap();
        assert!(v.converged);
        assert!(v.last_term_mag <= ctx.eps * v.value.norm().max(1.0));
    }
}
