//! q-shifted factorials (Pochhammer symbols).
//!
//! The finite symbol follows the three-case definition
//!
//! ```text
//! (a; q)_0 = 1
//! (a; q)_n = (1 - a)(1 - aq) ... (1 - aq^(n-1))          n >= 1
//! (a; q)_n = 1 / [(1 - aq^(-1))(1 - aq^(-2)) ... (1 - aq^n)]   n <= -1
//! ```
//!
//! and the infinite symbol is the limit of the first branch. Products
//! accumulate on the extended-range representation, so large |a| or deep
//! negative orders cannot overflow.

use num_complex::Complex;
use num_traits::One;

use crate::error::{Error, Result};
use super::scalar::QReal;
use super::scaled::{c_abs_f64, Scaled};
use super::{QContext, Trunc, TruncatedValue};

/// The q-shifted factorial (a; q)_n for any integer order n.
///
/// Zero `a` gives 1 for every n, matching both branch formulas. For
/// n <= -1 each factor 1 - aq^(-k) is checked against the resonance
/// tolerance before inverting.
pub fn qpochhammer<T: QReal>(a: Complex<T>, ctx: &QContext<T>, n: i64) -> Result<Complex<T>> {
    if n == 0 {
        return Ok(Complex::<T>::one());
    }
    if n > 0 {
        let mut product = Scaled::one();
        let mut qp = Complex::<T>::one();
        let decay = 1.0 - ctx.q_mag();
        for _ in 0..n {
            // Once the remaining factors differ from 1 by less than the
            // truncation budget in total, the finished prefix is the value.
            if c_abs_f64(a * qp) / decay < 0.5 * ctx.eps {
                break;
            }
            product = product.mul_complex(Complex::<T>::one() - a * qp);
            qp = qp * ctx.q;
        }
        return Ok(product.to_complex());
    }
    let qinv = Scaled::from_complex(Complex::<T>::one() / ctx.q);
    let mut w = Scaled::from_complex(a);
    let mut product = Scaled::one();
    for k in 1..=(-n) {
        w = w.mul(qinv);
        let factor = Scaled::one().sub(w);
        let vanish_at = ctx.resonance_tol().log2() + w.mag_log2().max(0.0);
        if factor.mag_log2() <= vanish_at {
            return Err(Error::DivisionByVanishingFactor {
                k,
                magnitude: factor.mag_log2().exp2(),
            });
        }
        product = product.mul(factor);
    }
    Ok(Scaled::one().div(product).to_complex())
}

/// Shared core of the infinite product (a; q)_inf.
pub(crate) fn qpochhammer_inf_scaled<T: QReal>(
    a: Complex<T>,
    ctx: &QContext<T>,
) -> Result<(Scaled<T>, Trunc)> {
    let mut product = Scaled::one();
    let mut aq = a;
    let decay = 1.0 - ctx.q_mag();
    for k in 0..ctx.max_terms {
        let dev = c_abs_f64(aq);
        // Multiplicative tail bound: the remaining factors multiply to
        // 1 + O(|aq^k| / (1 - |q|)).
        if dev / decay < 0.5 * ctx.eps {
            return Ok((product, Trunc::unilateral(k + 1, dev, true)));
        }
        let factor = Complex::<T>::one() - aq;
        if factor.re.is_zero() && factor.im.is_zero() {
            // a is exactly a nonpositive power of q; the product vanishes.
            return Ok((Scaled::zero(), Trunc::unilateral(k + 1, 0.0, true)));
        }
        product = product.mul_complex(factor);
        aq = aq * ctx.q;
    }
    Err(Error::MaxTermsExceeded {
        cap: ctx.max_terms,
        side: None,
        last_term_mag: c_abs_f64(aq),
    })
}

/// The infinite q-shifted factorial (a; q)_inf.
pub fn qpochhammer_inf<T: QReal>(a: Complex<T>, ctx: &QContext<T>) -> Result<TruncatedValue<T>> {
    let (product, trunc) = qpochhammer_inf_scaled(a, ctx)?;
    Ok(trunc.into_value(product.to_complex()))
}

/// Shared core of the joint product (a_1, ..., a_m; q)_inf.
pub(crate) fn qpochhammer_multi_scaled<T: QReal>(
    parameters: &[Complex<T>],
    ctx: &QContext<T>,
) -> Result<(Scaled<T>, Trunc)> {
    let mut product = Scaled::one();
    let mut trunc = Trunc::unilateral(0, 0.0, true);
    for &a in parameters {
        let (p, t) = qpochhammer_inf_scaled(a, ctx)?;
        product = product.mul(p);
        trunc = trunc.merge(t);
    }
    Ok((product, trunc))
}

/// The joint infinite symbol (a_1, ..., a_m; q)_inf, the product of the
/// individual infinite symbols.
pub fn qpochhammer_multi<T: QReal>(
    parameters: &[Complex<T>],
    ctx: &QContext<T>,
) -> Result<TruncatedValue<T>> {
    let (product, trunc) = qpochhammer_multi_scaled(parameters, ctx)?;
    Ok(trunc.into_value(product.to_complex()))
}
