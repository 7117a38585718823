//! Basic hypergeometric series.
//!
//! [`phi_series`] evaluates the unilateral series
//!
//! ```text
//! r_phi_s(a_1..a_r; b_1..b_s; q, x)
//!   = sum_{n>=0} (a_1..a_r;q)_n / [(b_1..b_s;q)_n (q;q)_n]
//!       * [(-1)^n q^(n(n-1)/2)]^(1+s-r) * x^n
//! ```
//!
//! whose radius of convergence is infinity, 1, or 0 according to whether
//! r - s is below, equal to, or above 1. [`psi_series`] evaluates the
//! bilateral series
//!
//! ```text
//! r_psi_s(a_1..a_r; b_1..b_s; q, x)
//!   = sum_{n in Z} (a_1..a_r;q)_n / (b_1..b_s;q)_n
//!       * [(-1)^n q^(n(n-1)/2)]^(s-r) * x^n
//! ```
//!
//! which for r < s converges for |x| > R and for r = s on the annulus
//! R < |x| < 1, where R = |b_1..b_s| / |a_1..a_r|; for s < r it diverges
//! around the origin and is rejected here (the resummation module handles
//! that regime).
//!
//! Both engines advance terms by their running ratio, a fixed rational
//! function of q^n, rather than recomputing Pochhammer symbols per term.

use num_complex::Complex;
use num_traits::One;

use crate::error::{Error, Result, SumSide};
use super::scalar::QReal;
use super::scaled::{c_abs_f64, term_status, Scaled};
use super::{
    q_power_index, QContext, QPowerLattice, SeriesKind, SeriesSpec, Trunc, TruncatedValue,
    MIN_TERMS, STOP_RUN,
};

/// Rejects denominator parameters on q^(Z<=0), where (b; q)_n vanishes for
/// some n >= 1.
fn check_denominator_lattice<T: QReal>(
    denominator: &[Complex<T>],
    ctx: &QContext<T>,
) -> Result<()> {
    for &b in denominator {
        if let Some(k) = q_power_index(b, ctx, QPowerLattice::NonPositive) {
            return Err(Error::ResonantParameter {
                what: format!("denominator parameter {}", fmt_c(b)),
                lattice: format!("q^{k}"),
            });
        }
    }
    Ok(())
}

pub(crate) fn fmt_c<T: QReal>(z: Complex<T>) -> String {
    format!("{}{}{}i", z.re, if z.im.to_f64() < 0.0 { "" } else { "+" }, z.im)
}

/// One-sided sum driver with the shared stopping rule. `next` maps the
/// current term and the side-local index (0-based) to the next term.
fn run_side<T: QReal>(
    sum: &mut Scaled<T>,
    first: Scaled<T>,
    ctx: &QContext<T>,
    side: SumSide,
    mut next: impl FnMut(Scaled<T>, usize) -> Scaled<T>,
) -> Result<(usize, f64)> {
    let mut term = first;
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
        term = next(term, k);
    }
    Err(Error::MaxTermsExceeded {
        cap: ctx.max_terms,
        side: Some(side),
        last_term_mag: last_mag,
    })
}

/// Shared core of [`phi_series`].
pub(crate) fn phi_series_scaled<T: QReal>(
    spec: &SeriesSpec<T>,
    ctx: &QContext<T>,
    x: Complex<T>,
) -> Result<(Scaled<T>, Trunc)> {
    if spec.kind != SeriesKind::UnilateralPhi {
        return Err(Error::ConfigError {
            reason: "phi_series requires a unilateral_phi spec".into(),
        });
    }
    let r = spec.numerator.len();
    let s = spec.denominator.len();
    if r > s + 1 {
        return Err(Error::DivergentSeries { r, s });
    }
    let e = (1 + s - r) as u32;
    if e == 0 && c_abs_f64(x) >= 1.0 {
        return Err(Error::OutsideConvergenceDomain {
            what: format!(
                "|x| = {:.6e} must be below 1 when r = s + 1",
                c_abs_f64(x)
            ),
        });
    }
    check_denominator_lattice(&spec.denominator, ctx)?;

    let sign = if e % 2 == 1 { -T::one() } else { T::one() };
    let base = x * Complex::from(sign);
    let qe = super::q_pow_i64(ctx.q, i64::from(e));
    let mut sum = Scaled::zero();
    // Running state captured by the ratio closure: qp = q^n and
    // w = q^(e n), both starting at n = 0.
    let mut qp = Complex::<T>::one();
    let mut w = Complex::<T>::one();
    let (pos, mag) = run_side(
        &mut sum,
        Scaled::one(),
        ctx,
        SumSide::Positive,
        |term, _| {
            let mut num = Complex::<T>::one();
            for &a in &spec.numerator {
                num = num * (Complex::<T>::one() - a * qp);
            }
            let mut den = Complex::<T>::one() - qp * ctx.q;
            for &b in &spec.denominator {
                den = den * (Complex::<T>::one() - b * qp);
            }
            qp = qp * ctx.q;
            let stepped = term
                .mul_complex(num)
                .div_complex(den)
                .mul_complex(base)
                .mul_complex(w);
            w = w * qe;
            stepped
        },
    )?;
    Ok((sum, Trunc::unilateral(pos, mag, true)))
}

/// The unilateral basic hypergeometric series r_phi_s.
pub fn phi_series<T: QReal>(
    spec: &SeriesSpec<T>,
    ctx: &QContext<T>,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    let (sum, trunc) = phi_series_scaled(spec, ctx, x)?;
    Ok(trunc.into_value(sum.to_complex()))
}

/// Shared core of [`psi_series`].
pub(crate) fn psi_series_scaled<T: QReal>(
    spec: &SeriesSpec<T>,
    ctx: &QContext<T>,
    x: Complex<T>,
) -> Result<(Scaled<T>, Trunc)> {
    if spec.kind != SeriesKind::BilateralPsi {
        return Err(Error::ConfigError {
            reason: "psi_series requires a bilateral_psi spec".into(),
        });
    }
    let r = spec.numerator.len();
    let s = spec.denominator.len();
    if s < r {
        return Err(Error::DivergentAtOrigin);
    }
    check_denominator_lattice(&spec.denominator, ctx)?;
    let mut radius = 1.0;
    for &a in &spec.numerator {
        if a.re.is_zero() && a.im.is_zero() {
            return Err(Error::OutsideConvergenceDomain {
                what: "numerator parameter 0 pushes the inner radius R to infinity".into(),
            });
        }
        if let Some(k) = q_power_index(a, ctx, QPowerLattice::Positive) {
            return Err(Error::ResonantParameter {
                what: format!("numerator parameter {}", fmt_c(a)),
                lattice: format!("q^{k}"),
            });
        }
        radius /= c_abs_f64(a);
    }
    for &b in &spec.denominator {
        radius *= c_abs_f64(b);
    }
    let xm = c_abs_f64(x);
    if xm <= radius {
        return Err(Error::OutsideConvergenceDomain {
            what: format!("|x| = {xm:.6e} must exceed R = {radius:.6e}"),
        });
    }
    let e = (s - r) as u32;
    if e == 0 && xm >= 1.0 {
        return Err(Error::OutsideConvergenceDomain {
            what: format!("|x| = {xm:.6e} must be below 1 when r = s"),
        });
    }

    let sign = if e % 2 == 1 { -T::one() } else { T::one() };
    let base = x * Complex::from(sign);
    let qe = super::q_pow_i64(ctx.q, i64::from(e));
    let mut sum = Scaled::zero();
    // Ascending side, from T_0 = 1: the ratio is a rational function of
    // qp = q^n, times (-1)^e q^(e n) x.
    let mut qp = Complex::<T>::one();
    let mut w = Complex::<T>::one();
    let (pos, pos_mag) = run_side(
        &mut sum,
        Scaled::one(),
        ctx,
        SumSide::Positive,
        |term, _| {
            let mut num = Complex::<T>::one();
            for &a in &spec.numerator {
                num = num * (Complex::<T>::one() - a * qp);
            }
            let mut den = Complex::<T>::one();
            for &b in &spec.denominator {
                den = den * (Complex::<T>::one() - b * qp);
            }
            qp = qp * ctx.q;
            let stepped = term
                .mul_complex(num)
                .div_complex(den)
                .mul_complex(base)
                .mul_complex(w);
            w = w * qe;
            stepped
        },
    )?;
    // Descending side, from T_{-1}: clearing q^(-m) out of every factor
    // turns the ratio T_{-m} / T_{-(m-1)} into
    // (-1)^e prod_j (q^m - b_j) / [x prod_i (q^m - a_i)]; the auxiliary
    // q powers cancel exactly, and dividing by base = (-1)^e x supplies
    // the sign since (-1)^e is its own inverse.
    let mut qneg = ctx.q;
    let mut step_down = |term: Scaled<T>| {
        let mut num = Complex::<T>::one();
        for &b in &spec.denominator {
            num = num * (qneg - b);
        }
        let mut den = Complex::<T>::one();
        for &a in &spec.numerator {
            den = den * (qneg - a);
        }
        qneg = qneg * ctx.q;
        term.mul_complex(num).div_complex(den).div_complex(base)
    };
    let first = step_down(Scaled::one());
    let (neg, neg_mag) = run_side(&mut sum, first, ctx, SumSide::Negative, |term, _| {
        step_down(term)
    })?;
    let trunc = Trunc {
        pos,
        neg,
        mag: pos_mag.max(neg_mag),
        converged: true,
    };
    Ok((sum, trunc))
}

/// The bilateral basic hypergeometric series r_psi_s.
pub fn psi_series<T: QReal>(
    spec: &SeriesSpec<T>,
    ctx: &QContext<T>,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    let (sum, trunc) = psi_series_scaled(spec, ctx, x)?;
    Ok(trunc.into_value(sum.to_complex()))
}

/// Bilateral sum with explicitly supplied term values, for coefficient
/// sequences that do not follow a hypergeometric ratio (Borel images of
/// arbitrary entire functions). `term(n)` must return the complete n-th
/// term already including the power of x.
pub(crate) fn sum_bilateral_scaled<T: QReal>(
    term: impl Fn(i64) -> Scaled<T>,
    ctx: &QContext<T>,
) -> Result<(Scaled<T>, Trunc)> {
    let mut sum = Scaled::zero();
    let (pos, pos_mag) = run_side(&mut sum, term(0), ctx, SumSide::Positive, |_, k| {
        term(k as i64 + 1)
    })?;
    let (neg, neg_mag) = run_side(&mut sum, term(-1), ctx, SumSide::Negative, |_, k| {
        term(-(k as i64) - 2)
    })?;
    let trunc = Trunc {
        pos,
        neg,
        mag: pos_mag.max(neg_mag),
        converged: true,
    };
    Ok((sum, trunc))
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
    fn phi_at_zero_is_one() {
        let spec = SeriesSpec::phi(vec![c(0.4, 0.0)], vec![]);
        let v = phi_series(&spec, &ctx(0.5), c(0.0, 0.0)).unwrap();
        assert!((v.value - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn phi_2x1_frozen_values() {
        let spec = SeriesSpec::phi(vec![c(0.5, 0.0), c(0.3, 0.0)], vec![c(0.7, 0.0)]);
        let v = phi_series(&spec, &ctx(0.4), c(0.25, 0.0)).unwrap();
        assert!((v.value - c(1.6775366088143267, 0.0)).norm() < 1e-14);

        let spec = SeriesSpec::phi(vec![c(1.6, 0.0), c(0.45, 0.0)], vec![c(0.2, 0.0)]);
        let v = phi_series(&spec, &ctx(0.35), c(0.6, 0.25)).unwrap();
        let expected = c(0.5524487015212245, -0.37410208546292327);
        assert!((v.value - expected).norm() < 1e-14, "got {}", v.value);
    }

    #[test]
    fn phi_0x1_frozen_value() {
        let spec = SeriesSpec::phi(vec![], vec![c(0.3, 0.0)]);
        let v = phi_series(&spec, &ctx(0.4), c(0.8, 0.0)).unwrap();
        assert!((v.value - c(3.2421974516311675, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn phi_1x1_converges_for_huge_argument() {
        // r - s = 0: entire in x, the q^(n(n-1)/2) factor wins.
        let spec = SeriesSpec::phi(vec![c(0.4, 0.0)], vec![c(0.7, 0.0)]);
        let v = phi_series(&spec, &ctx(0.5), c(1e3, 0.0)).unwrap();
        assert!(v.converged);
        assert!(v.value.is_finite());
    }

    #[test]
    fn phi_rejects_divergent_order() {
        let spec = SeriesSpec::phi(vec![c(0.4, 0.0), c(0.5, 0.0), c(0.6, 0.0)], vec![]);
        let err = phi_series(&spec, &ctx(0.5), c(0.1, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DivergentSeries { r: 3, s: 0 }));
    }

    #[test]
    fn phi_rejects_unit_disc_boundary() {
        let spec = SeriesSpec::phi(vec![c(0.5, 0.0), c(0.3, 0.0)], vec![c(0.7, 0.0)]);
        let err = phi_series(&spec, &ctx(0.4), c(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::OutsideConvergenceDomain { .. }));
    }

    #[test]
    fn phi_rejects_resonant_denominator() {
        // b = q^{-2} exactly.
        let spec = SeriesSpec::phi(vec![c(0.5, 0.0)], vec![c(6.25, 0.0)]);
        let err = phi_series(&spec, &ctx(0.4), c(0.3, 0.0)).unwrap_err();
        assert!(matches!(err, Error::ResonantParameter { .. }));
    }

    #[test]
    fn phi_terminates_for_inverse_power_numerator() {
        // a = q^{-3}: (a;q)_n = 0 for n > 3, so the series is a polynomial.
        let q: f64 = 0.4;
        let spec = SeriesSpec::phi(vec![c(q.powi(-3), 0.0)], vec![c(0.6, 0.0)]);
        let v = phi_series(&spec, &ctx(q), c(0.9, 0.0)).unwrap();
        assert!(v.converged);
        assert!(v.terms_used_pos < 20);
    }

    #[test]
    fn psi_1x1_frozen_value() {
        let spec = SeriesSpec::psi(vec![c(0.5, 0.0)], vec![c(0.2, 0.0)]);
        let v = psi_series(&spec, &ctx(0.3), c(0.55, 0.0)).unwrap();
        assert!((v.value - c(-0.6923846112883912, 0.0)).norm() < 1e-13);
        assert!(v.terms_used_neg > 0);
    }

    #[test]
    fn psi_2x2_confluent_frozen_value() {
        let spec = SeriesSpec::psi(
            vec![c(0.7, 0.0), c(0.3, 0.0)],
            vec![c(0.9, 0.0), c(0.0, 0.0)],
        );
        let v = psi_series(&spec, &ctx(0.4), c(-0.5, 0.0)).unwrap();
        assert!(
            (v.value - c(-92.457009343940867, 0.0)).norm() < 1e-11,
            "got {}",
            v.value
        );
    }

    #[test]
    fn psi_rejects_divergent_at_origin() {
        let spec = SeriesSpec::psi(vec![c(0.7, 0.0), c(0.3, 0.0)], vec![c(0.9, 0.0)]);
        let err = psi_series(&spec, &ctx(0.4), c(0.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DivergentAtOrigin));
    }

    #[test]
    fn psi_rejects_annulus_violations() {
        let spec = SeriesSpec::psi(vec![c(0.5, 0.0)], vec![c(0.2, 0.0)]);
        let inner = psi_series(&spec, &ctx(0.3), c(0.3, 0.0)).unwrap_err();
        assert!(matches!(inner, Error::OutsideConvergenceDomain { .. }));
        let outer = psi_series(&spec, &ctx(0.3), c(1.1, 0.0)).unwrap_err();
        assert!(matches!(outer, Error::OutsideConvergenceDomain { .. }));
        let zero = psi_series(&spec, &ctx(0.3), c(0.0, 0.0)).unwrap_err();
        assert!(matches!(zero, Error::OutsideConvergenceDomain { .. }));
    }

    #[test]
    fn psi_matches_naive_summation() {
        // Independent check against terms built from the three-case
        // definition. Descending terms keep the (b;q)/(a;q) factors as a
        // ratio product: the symbols themselves underflow f64 near
        // m = 40 even though the terms are ~0.727^m.
        let q = 0.3;
        let qc = ctx(q);
        let (a, b, z) = (c(0.5, 0.0), c(0.2, 0.0), c(0.55, 0.0));
        let mut naive = c(0.0, 0.0);
        for n in 0i64..=120 {
            let top = crate::qcore::qpochhammer(a, &qc, n).unwrap();
            let bottom = crate::qcore::qpochhammer(b, &qc, n).unwrap();
            naive += top / bottom * z.powi(n as i32);
        }
        let mut ratio_prod = c(1.0, 0.0);
        let mut qinv_pow = c(1.0, 0.0);
        for m in 1i32..=150 {
            qinv_pow /= c(q, 0.0);
            ratio_prod *= (c(1.0, 0.0) - b * qinv_pow) / (c(1.0, 0.0) - a * qinv_pow);
            naive += ratio_prod * z.powi(-m);
        }
        let spec = SeriesSpec::psi(vec![a], vec![b]);
        let v = psi_series(&spec, &qc, z).unwrap();
        assert!((v.value - naive).norm() < 1e-12, "got {} vs {naive}", v.value);
    }

    #[test]
    fn phi_matches_naive_summation() {
        let q = 0.5;
        let qc = ctx(q);
        let (a, b, cc, x) = (c(0.3, 0.0), c(0.7, 0.0), c(0.9, 0.0), c(0.4, 0.0));
        let mut naive = c(0.0, 0.0);
        for n in 0i64..60 {
            let top = crate::qcore::qpochhammer(a, &qc, n).unwrap()
                * crate::qcore::qpochhammer(b, &qc, n).unwrap();
            let bottom = crate::qcore::qpochhammer(cc, &qc, n).unwrap()
                * crate::qcore::qpochhammer(c(q, 0.0), &qc, n).unwrap();
            naive += top / bottom * x.powi(n as i32);
        }
        let spec = SeriesSpec::phi(vec![a, b], vec![cc]);
        let v = phi_series(&spec, &qc, x).unwrap();
        assert!((v.value - naive).norm() < 1e-13);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let spec = SeriesSpec::psi(vec![c(0.5, 0.0)], vec![c(0.2, 0.0)]);
        assert!(matches!(
            phi_series(&spec, &ctx(0.3), c(0.5, 0.0)),
            Err(Error::ConfigError { .. })
        ));
        let spec = SeriesSpec::phi(vec![c(0.5, 0.0)], vec![c(0.2, 0.0)]);
        assert!(matches!(
            psi_series(&spec, &ctx(0.3), c(0.5, 0.0)),
            Err(Error::ConfigError { .. })
        ));
    }
}
