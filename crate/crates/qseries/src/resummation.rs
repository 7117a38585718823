//! q-Borel and q-Laplace transforms along a lambda-spiral.
//!
//! The q-Borel transform reweights a bilateral coefficient sequence by
//! q^(n(n-1)/2); the q-Laplace transform sums psi(lambda q^n) / theta(lambda
//! q^n / x) over the spiral lambda q^Z. On entire functions the two compose
//! to the identity ([`roundtrip_check`]), and applied to the divergent
//! (2,1) bilateral series they produce its canonical resummation
//! ([`resum_2psi1`]), the function compared against the closed connection
//! formula in the `connection` module.
//!
//! Both tails of the Laplace sum are ratios of theta-scale quantities, so
//! no a-priori bound describes them; convergence is decided empirically per
//! side: a tail that decays below the truncation target converges, a tail
//! that keeps growing is reported as the failing side, and a tail that is
//! still decaying when the window ends comes back with `converged = false`
//! rather than a silent truncation.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::connection;
use crate::error::{Error, Result, SumSide};
use crate::qcore::scalar::QReal;
use crate::qcore::{
    c_abs, c_abs_f64, c_from_f64, fmt_c, psi_series_scaled, q_power_index, qpochhammer,
    sum_bilateral_scaled, term_status, theta_scaled, QContext, QPowerLattice, Scaled, SeriesSpec,
    Trunc, TruncatedValue, MIN_TERMS, STOP_RUN,
};

/// Default number of Laplace terms examined per spiral direction.
pub const DEFAULT_WINDOW: usize = 64;

/// Consecutive growing above-threshold terms after which a Laplace tail is
/// declared non-decaying. Healthy tails decay by an asymptotically constant
/// factor per step; eight strict rises in a row cannot happen on the way to
/// convergence, only on a genuinely divergent side.
const GROW_RUN: usize = 8;

/// The discrete support lambda q^Z of the q-Laplace sum, together with the
/// evaluation context and the per-side term window.
#[derive(Clone, Copy, Debug)]
pub struct SpiralSpec<T: QReal> {
    /// Spiral representative; any lambda q^k describes the same spiral.
    pub lambda: Complex<T>,
    /// Evaluation context shared by every sum along the spiral.
    pub ctx: QContext<T>,
    /// Hard cap on Laplace terms per side, at least [`MIN_TERMS`].
    pub window: usize,
}

impl<T: QReal> SpiralSpec<T> {
    /// Creates a spiral after validating the direction.
    ///
    /// `lambda` must be nonzero and off the lattice q^Z: a lattice
    /// direction collapses the spiral onto the powers of q, the degenerate
    /// configuration every downstream formula assumes away.
    pub fn new(lambda: Complex<T>, ctx: QContext<T>) -> Result<Self> {
        if lambda.re == T::zero() && lambda.im == T::zero() {
            return Err(Error::ConfigError {
                reason: "spiral direction lambda must be nonzero".into(),
            });
        }
        if let Some(k) = q_power_index(lambda, &ctx, QPowerLattice::All) {
            return Err(Error::ResonantParameter {
                what: format!("spiral direction lambda = {}", fmt_c(lambda)),
                lattice: format!("q^{k}"),
            });
        }
        Ok(SpiralSpec {
            lambda,
            ctx,
            window: DEFAULT_WINDOW,
        })
    }

    /// Replaces the per-side term window (at least [`MIN_TERMS`]).
    pub fn with_window(self, window: usize) -> Result<Self> {
        if window < MIN_TERMS {
            return Err(Error::ConfigError {
                reason: format!("laplace window {window} is below the minimum of {MIN_TERMS}"),
            });
        }
        Ok(SpiralSpec { window, ..self })
    }
}

/// A bilateral coefficient sequence n in Z -> a_n.
///
/// The evaluator must be pure and cheap enough to call repeatedly; nothing
/// is cached. `coeff(0)` is expected to be finite, but no normalization
/// such as a_0 = 1 is imposed: the transforms are linear and are used on
/// scaled and shifted sequences.
#[derive(Clone)]
pub struct BilateralCoefficients<T: QReal> {
    coeff: Arc<dyn Fn(i64) -> Complex<T> + Send + Sync>,
    description: String,
}

impl<T: QReal> BilateralCoefficients<T> {
    /// Wraps a coefficient evaluator under a short display label.
    pub fn new(
        description: impl Into<String>,
        coeff: impl Fn(i64) -> Complex<T> + Send + Sync + 'static,
    ) -> Self {
        BilateralCoefficients {
            coeff: Arc::new(coeff),
            description: description.into(),
        }
    }

    /// The coefficient a_n.
    pub fn coeff(&self, n: i64) -> Complex<T> {
        (self.coeff)(n)
    }

    /// The display label.
    pub fn description(&self) -> &str {
        &self.description
    }
}

impl<T: QReal> fmt::Debug for BilateralCoefficients<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BilateralCoefficients")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

/// An entire function given two ways: by its coefficient sequence (for the
/// Borel side) and by a direct evaluator (the roundtrip comparison value).
#[derive(Clone)]
pub struct EntireFunction<T: QReal> {
    /// Taylor coefficients, exposed bilaterally; negative indices are zero
    /// for a genuinely entire function.
    pub coefficients: BilateralCoefficients<T>,
    evaluator: Arc<dyn Fn(Complex<T>, &QContext<T>) -> Result<Complex<T>> + Send + Sync>,
}

impl<T: QReal> EntireFunction<T> {
    /// Pairs a coefficient sequence with its direct evaluator.
    pub fn new(
        coefficients: BilateralCoefficients<T>,
        evaluator: impl Fn(Complex<T>, &QContext<T>) -> Result<Complex<T>> + Send + Sync + 'static,
    ) -> Self {
        EntireFunction {
            coefficients,
            evaluator: Arc::new(evaluator),
        }
    }

    /// The polynomial with the given coefficients, constant term first.
    pub fn polynomial(coeffs: Vec<Complex<T>>) -> Self {
        let description = format!(
            "polynomial of degree {}",
            coeffs.len().saturating_sub(1)
        );
        let for_coeff = coeffs.clone();
        let coefficients = BilateralCoefficients::new(description, move |n| {
            if n >= 0 && (n as usize) < for_coeff.len() {
                for_coeff[n as usize]
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        EntireFunction::new(coefficients, move |x, _| {
            let mut value = Complex::new(T::zero(), T::zero());
            for &c in coeffs.iter().rev() {
                value = value * x + c;
            }
            Ok(value)
        })
    }

    /// Evaluates the function directly.
    pub fn evaluate(&self, x: Complex<T>, ctx: &QContext<T>) -> Result<Complex<T>> {
        (self.evaluator)(x, ctx)
    }
}

impl<T: QReal> fmt::Debug for EntireFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntireFunction")
            .field("coefficients", &self.coefficients)
            .finish_non_exhaustive()
    }
}

/// Parameters (a1, a2; b1) of the divergent (2,1) bilateral series and of
/// every closed form derived from it.
#[derive(Clone, Copy, Debug)]
pub struct Psi1Params<T: QReal> {
    /// First numerator parameter.
    pub a1: Complex<T>,
    /// Second numerator parameter.
    pub a2: Complex<T>,
    /// Denominator parameter.
    pub b1: Complex<T>,
}

impl<T: QReal> Psi1Params<T> {
    /// Bundles the three series parameters; validity is checked against a
    /// context by [`Psi1Params::validate`].
    pub fn new(a1: Complex<T>, a2: Complex<T>, b1: Complex<T>) -> Self {
        Psi1Params { a1, a2, b1 }
    }

    /// Checks the non-resonance conditions every formula in this module and
    /// in `connection` relies on: a1, a2, b1 nonzero, b1 off q^{k <= 0},
    /// and a1/a2 off q^Z.
    pub fn validate(&self, ctx: &QContext<T>) -> Result<()> {
        for (z, name) in [(self.a1, "a1"), (self.a2, "a2")] {
            if z.re == T::zero() && z.im == T::zero() {
                return Err(Error::ConfigError {
                    reason: format!("numerator parameter {name} must be nonzero"),
                });
            }
        }
        if self.b1.re == T::zero() && self.b1.im == T::zero() {
            return Err(Error::ConfigError {
                reason: "b1 = 0 leaves the comparison solutions v1, v2 undefined".into(),
            });
        }
        if let Some(k) = q_power_index(self.b1, ctx, QPowerLattice::NonPositive) {
            return Err(Error::ResonantParameter {
                what: format!("denominator parameter b1 = {}", fmt_c(self.b1)),
                lattice: format!("q^{k}"),
            });
        }
        if let Some(k) = q_power_index(self.a1 / self.a2, ctx, QPowerLattice::All) {
            return Err(Error::ResonantParameter {
                what: "parameter ratio a1/a2".into(),
                lattice: format!("q^{k}"),
            });
        }
        Ok(())
    }
}

/// n(n-1)/2 as the exponent of the Borel weight; nonnegative for every
/// integer n.
fn triangular(n: i64) -> u64 {
    (n * (n - 1) / 2) as u64
}

/// z^n in extended range for possibly negative n (z nonzero).
fn scaled_pow_i64<T: QReal>(z: Complex<T>, n: i64) -> Scaled<T> {
    let p = Scaled::from_complex(z).powi(n.unsigned_abs());
    if n < 0 {
        Scaled::one().div(p)
    } else {
        p
    }
}

/// The q-Borel transform: a_n -> a_n q^(n(n-1)/2), purely formal.
///
/// The weight is exact in extended range internally, but the returned
/// sequence delivers plain complex values, which saturate once
/// q^(n(n-1)/2) leaves the scalar's exponent range (|n| around 40 for
/// `f64`). The resummation pipeline never consumes the sequence in that
/// regime; it exists for coefficient-level identities and inspection.
pub fn q_borel_plus<T: QReal>(
    f: &BilateralCoefficients<T>,
    ctx: &QContext<T>,
) -> BilateralCoefficients<T> {
    let inner = f.coeff.clone();
    let q = ctx.q;
    BilateralCoefficients {
        coeff: Arc::new(move |n| {
            let weight = Scaled::from_complex(q).powi(triangular(n));
            weight.mul_complex(inner(n)).to_complex()
        }),
        description: format!("q-borel of {}", f.description),
    }
}

/// The coefficient sequence of the divergent (2,1) bilateral series:
/// a_n = (a1; q)_n (a2; q)_n / (b1; q)_n * (-1)^n q^(-n(n-1)/2).
///
/// The q^(-n(n-1)/2) factor grows beyond every scalar's exponent range
/// (|n| around 40 for `f64`, where delivered values saturate to infinity);
/// the sequence is meant for coefficient-level checks at moderate |n|,
/// while [`resum_2psi1`] works from the closed Borel image instead.
pub fn psi1_coefficients<T: QReal>(
    params: &Psi1Params<T>,
    ctx: &QContext<T>,
) -> Result<BilateralCoefficients<T>> {
    params.validate(ctx)?;
    for (a, name) in [(params.a1, "a1"), (params.a2, "a2")] {
        if let Some(k) = q_power_index(a, ctx, QPowerLattice::Positive) {
            return Err(Error::ResonantParameter {
                what: format!("numerator parameter {name} = {}", fmt_c(a)),
                lattice: format!("q^{k}"),
            });
        }
    }
    let p = *params;
    let ctx = *ctx;
    Ok(BilateralCoefficients::new(
        "coefficients of 2psi1(a1,a2;b1)",
        move |n| {
            let sym = qpochhammer(p.a1, &ctx, n)
                .and_then(|p1| qpochhammer(p.a2, &ctx, n).map(|p2| p1 * p2))
                .and_then(|num| qpochhammer(p.b1, &ctx, n).map(|den| num / den));
            match sym {
                Ok(v) => {
                    let inv_weight =
                        Scaled::one().div(Scaled::from_complex(ctx.q).powi(triangular(n)));
                    let signed = inv_weight.mul_complex(v).to_complex();
                    if n % 2 == 0 {
                        signed
                    } else {
                        -signed
                    }
                }
                Err(_) => c_from_f64(f64::NAN, f64::NAN),
            }
        },
    ))
}

/// One side of the Laplace sum, with decay/growth monitoring.
///
/// Returns (terms taken, last term magnitude, side converged). A side whose
/// terms grow [`GROW_RUN`] times in a row while above the truncation
/// threshold fails hard; a side still above threshold when the window runs
/// out reports `converged = false`.
fn laplace_side<T: QReal>(
    sum: &mut Scaled<T>,
    psi: &impl Fn(Complex<T>) -> Result<Scaled<T>>,
    spiral: &SpiralSpec<T>,
    x: Complex<T>,
    side: SumSide,
) -> Result<(usize, f64, bool)> {
    let ctx = &spiral.ctx;
    let step = match side {
        SumSide::Positive => ctx.q,
        SumSide::Negative => Complex::from(T::one()) / ctx.q,
    };
    let mut xi = match side {
        SumSide::Positive => spiral.lambda,
        SumSide::Negative => spiral.lambda * step,
    };
    let mut below_run = 0usize;
    let mut rise_run = 0usize;
    let mut prev_log2 = f64::NEG_INFINITY;
    let mut last_mag = 0.0f64;
    for k in 0..spiral.window {
        let numerator = psi(xi)?;
        let (denominator, _) = theta_scaled(xi / x, ctx)?;
        let term = numerator.div(denominator);
        *sum = sum.add(term);
        let (mag, below) = term_status(term, *sum, ctx.eps);
        last_mag = mag;
        let log2 = term.mag_log2();
        if below {
            below_run += 1;
            rise_run = 0;
            if below_run >= STOP_RUN && k + 1 >= MIN_TERMS {
                return Ok((k + 1, mag, true));
            }
        } else {
            below_run = 0;
            if log2 > prev_log2 {
                rise_run += 1;
                if rise_run >= GROW_RUN {
                    return Err(Error::MaxTermsExceeded {
                        cap: spiral.window,
                        side: Some(side),
                        last_term_mag: mag,
                    });
                }
            } else {
                rise_run = 0;
            }
        }
        prev_log2 = log2;
        xi = xi * step;
    }
    Ok((spiral.window, last_mag, false))
}

/// Extended-range core of [`q_laplace_plus`]: psi supplies terms in scaled
/// form, so theta-scale numerators (Borel images far out on the spiral)
/// never pass through the plain scalar range.
pub(crate) fn q_laplace_plus_scaled<T: QReal>(
    psi: impl Fn(Complex<T>) -> Result<Scaled<T>>,
    spiral: &SpiralSpec<T>,
    x: Complex<T>,
) -> Result<(Scaled<T>, Trunc)> {
    if x.re == T::zero() && x.im == T::zero() {
        return Err(Error::ZeroArgument);
    }
    if let Some(k) = q_power_index(-x / spiral.lambda, &spiral.ctx, QPowerLattice::All) {
        return Err(Error::SpiralCollision { k });
    }
    let mut sum = Scaled::zero();
    let (pos, pos_mag, pos_ok) = laplace_side(&mut sum, &psi, spiral, x, SumSide::Positive)?;
    let (neg, neg_mag, neg_ok) = laplace_side(&mut sum, &psi, spiral, x, SumSide::Negative)?;
    Ok((
        sum,
        Trunc {
            pos,
            neg,
            mag: pos_mag.max(neg_mag),
            converged: pos_ok && neg_ok,
        },
    ))
}

/// The q-Laplace transform along the spiral:
/// sum over n in Z of psi(lambda q^n) / theta(lambda q^n / x).
///
/// `x` must stay off the spiral -lambda q^Z, where a theta denominator
/// vanishes. The two tails are truncated independently; see the module
/// notes for the three possible outcomes per side. The plain-complex
/// `psi_on_spiral` signature limits usable windows to arguments where psi
/// stays in scalar range; [`resum_2psi1`] and [`roundtrip_check`] route
/// around that limit internally.
pub fn q_laplace_plus<T: QReal>(
    psi_on_spiral: impl Fn(Complex<T>) -> Result<Complex<T>>,
    spiral: &SpiralSpec<T>,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    let (sum, trunc) = q_laplace_plus_scaled(
        |xi| psi_on_spiral(xi).map(Scaled::from_complex),
        spiral,
        x,
    )?;
    Ok(trunc.into_value(sum.to_complex()))
}

/// Extended-range core of [`borel_image_2psi2`], without parameter
/// re-validation (the Laplace driver calls it once per spiral point).
pub(crate) fn borel_image_2psi2_scaled<T: QReal>(
    params: &Psi1Params<T>,
    ctx: &QContext<T>,
    xi: Complex<T>,
) -> Result<(Scaled<T>, Trunc)> {
    if c_abs_f64(xi) < 1.0 {
        let spec = SeriesSpec::psi(
            vec![params.a1, params.a2],
            vec![params.b1, Complex::new(T::zero(), T::zero())],
        );
        psi_series_scaled(&spec, ctx, -xi)
    } else {
        if let Some(k) = q_power_index(-xi, ctx, QPowerLattice::All) {
            return Err(Error::ThetaPole { k });
        }
        connection::corollary_core_scaled(params, ctx, -xi)
    }
}

/// The Borel image of the divergent (2,1) series: the convergent (2,2)
/// bilateral series with denominator parameters (b1, 0) evaluated at -xi,
/// analytically continued past |xi| = 1 by its two-term closed form.
///
/// Inside the unit disk the bilateral series is summed directly; outside,
/// the continuation applies for xi off the pole spiral -q^Z, where the
/// continuation's theta prefactor ratio has poles.
pub fn borel_image_2psi2<T: QReal>(
    params: &Psi1Params<T>,
    ctx: &QContext<T>,
    xi: Complex<T>,
) -> Result<TruncatedValue<T>> {
    params.validate(ctx)?;
    let (sum, trunc) = borel_image_2psi2_scaled(params, ctx, xi)?;
    Ok(trunc.into_value(sum.to_complex()))
}

/// Borel-Laplace resummation of the divergent (2,1) bilateral series:
/// the q-Laplace transform of [`borel_image_2psi2`] along the spiral,
/// evaluated at x.
///
/// This is the analytic object the connection formula describes; it is
/// computed with no reference to the closed right-hand side, so the two
/// are independent oracles for each other. The sum is certified on
/// |x| > |b1/(a1 a2)|, where both tails decay geometrically.
pub fn resum_2psi1<T: QReal>(
    params: &Psi1Params<T>,
    spiral: &SpiralSpec<T>,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    params.validate(&spiral.ctx)?;
    let ctx = spiral.ctx;
    let (sum, trunc) = q_laplace_plus_scaled(
        |xi| borel_image_2psi2_scaled(params, &ctx, xi).map(|(v, _)| v),
        spiral,
        x,
    )?;
    Ok(trunc.into_value(sum.to_complex()))
}

/// The Borel image of an arbitrary coefficient sequence, summed in
/// extended range at one spiral point.
fn borel_sum_scaled<T: QReal>(
    f: &BilateralCoefficients<T>,
    ctx: &QContext<T>,
    xi: Complex<T>,
) -> Result<Scaled<T>> {
    let (sum, _) = sum_bilateral_scaled(
        |n| {
            Scaled::from_complex(f.coeff(n))
                .mul(Scaled::from_complex(ctx.q).powi(triangular(n)))
                .mul(scaled_pow_i64(xi, n))
        },
        ctx,
    )?;
    Ok(sum)
}

/// Roundtrip residual |(L o B f)(x) - f(x)| / max(|f(x)|, 1) for an entire
/// function f; the composed transforms are the identity on entire
/// functions, so the residual is a pure numerical-error gauge.
///
/// The Borel side works from the raw coefficients in extended range, so
/// spiral points far from the origin (where the image reaches theta-scale
/// magnitudes) cost nothing in accuracy.
pub fn roundtrip_check<T: QReal>(
    f: &EntireFunction<T>,
    spiral: &SpiralSpec<T>,
    x: Complex<T>,
) -> Result<T> {
    let ctx = spiral.ctx;
    let direct = f.evaluate(x, &ctx)?;
    let (resummed, _) = q_laplace_plus_scaled(
        |xi| borel_sum_scaled(&f.coefficients, &ctx, xi),
        spiral,
        x,
    )?;
    let diff = c_abs(resummed.to_complex() - direct);
    let scale = c_abs(direct);
    let floor = T::one();
    Ok(diff / if scale > floor { scale } else { floor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{phi_series, psi_series};

    fn ctx(q: f64) -> QContext<f64> {
        QContext::new(Complex::new(q, 0.0)).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn polar(r: f64, arg: f64) -> Complex<f64> {
        Complex::from_polar(r, arg)
    }

    fn flagship_params() -> Psi1Params<f64> {
        Psi1Params::new(c(0.7, 0.0), c(0.3, 0.0), c(0.9, 0.0))
    }

    fn generic_spiral(q: f64) -> SpiralSpec<f64> {
        SpiralSpec::new(polar(1.1, std::f64::consts::PI / 7.0), ctx(q)).unwrap()
    }

    fn rel(got: Complex<f64>, want: Complex<f64>) -> f64 {
        (got - want).norm() / want.norm()
    }

    #[test]
    fn spiral_rejects_degenerate_directions() {
        let cx = ctx(0.4);
        assert!(matches!(
            SpiralSpec::new(c(0.0, 0.0), cx),
            Err(Error::ConfigError { .. })
        ));
        assert!(matches!(
            SpiralSpec::new(c(1.0, 0.0), cx),
            Err(Error::ResonantParameter { .. })
        ));
        assert!(matches!(
            SpiralSpec::new(c(0.16, 0.0), cx),
            Err(Error::ResonantParameter { .. })
        ));
        let good = SpiralSpec::new(polar(1.1, 0.4488), cx).unwrap();
        assert_eq!(good.window, DEFAULT_WINDOW);
        assert!(good.with_window(4).is_err());
        assert_eq!(good.with_window(512).unwrap().window, 512);
    }

    #[test]
    fn psi1_params_validation() {
        let cx = ctx(0.4);
        assert!(flagship_params().validate(&cx).is_ok());
        let zero_a = Psi1Params::new(c(0.0, 0.0), c(0.3, 0.0), c(0.9, 0.0));
        assert!(matches!(
            zero_a.validate(&cx),
            Err(Error::ConfigError { .. })
        ));
        let zero_b = Psi1Params::new(c(0.7, 0.0), c(0.3, 0.0), c(0.0, 0.0));
        assert!(matches!(
            zero_b.validate(&cx),
            Err(Error::ConfigError { .. })
        ));
        // b1 = q^{-2} sits on the nonpositive lattice.
        let resonant_b = Psi1Params::new(c(0.7, 0.0), c(0.3, 0.0), c(6.25, 0.0));
        assert!(matches!(
            resonant_b.validate(&cx),
            Err(Error::ResonantParameter { .. })
        ));
        // a1/a2 = q.
        let resonant_ratio = Psi1Params::new(c(0.2, 0.0), c(0.5, 0.0), c(0.9, 0.0));
        assert!(matches!(
            resonant_ratio.validate(&cx),
            Err(Error::ResonantParameter { .. })
        ));
    }

    #[test]
    fn borel_weights_constant_sequence_into_theta_coefficients() {
        let cx = ctx(0.45);
        let ones = BilateralCoefficients::new("all ones", |_| c(1.0, 0.0));
        let image = q_borel_plus(&ones, &cx);
        for n in -6i64..=6 {
            let e = (n * (n - 1) / 2) as i32;
            let want = 0.45f64.powi(e);
            assert!(
                (image.coeff(n) - c(want, 0.0)).norm() < 1e-15 * want,
                "n = {n}"
            );
        }
    }

    #[test]
    fn borel_fixes_the_delta_sequence() {
        let cx = ctx(0.3);
        let delta = BilateralCoefficients::new("delta", |n| {
            if n == 0 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let image = q_borel_plus(&delta, &cx);
        assert_eq!(image.coeff(0), c(1.0, 0.0));
        assert_eq!(image.coeff(5), c(0.0, 0.0));
        assert_eq!(image.coeff(-3), c(0.0, 0.0));
    }

    #[test]
    fn borel_is_linear_on_coefficients() {
        let cx = ctx(0.5);
        let f = BilateralCoefficients::new("f", |n| c(n as f64, 1.0));
        let g = BilateralCoefficients::new("g", |n| c(2.0, -(n as f64)));
        let (alpha, beta) = (c(0.5, 0.0), c(0.25, 0.0));
        let combined = {
            let (f, g) = (f.clone(), g.clone());
            BilateralCoefficients::new("0.5 f + 0.25 g", move |n| {
                alpha * f.coeff(n) + beta * g.coeff(n)
            })
        };
        let lhs = q_borel_plus(&combined, &cx);
        let bf = q_borel_plus(&f, &cx);
        let bg = q_borel_plus(&g, &cx);
        for n in -8i64..=8 {
            let rhs = alpha * bf.coeff(n) + beta * bg.coeff(n);
            assert!((lhs.coeff(n) - rhs).norm() <= 1e-15 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn psi1_coefficients_match_the_borel_image_per_index() {
        let cx = ctx(0.4);
        let params = flagship_params();
        let raw = psi1_coefficients(&params, &cx).unwrap();
        let image = q_borel_plus(&raw, &cx);
        for n in -5i64..=5 {
            // The reweighted coefficient is the (2,2) confluent coefficient
            // with the sign of (-x)^n absorbed.
            let sym = qpochhammer(params.a1, &cx, n).unwrap()
                * qpochhammer(params.a2, &cx, n).unwrap()
                / qpochhammer(params.b1, &cx, n).unwrap();
            let want = if n % 2 == 0 { sym } else { -sym };
            assert!(
                (image.coeff(n) - want).norm() <= 1e-12 * want.norm(),
                "n = {n}"
            );
        }
    }

    #[test]
    fn laplace_of_the_constant_one_is_one() {
        let spiral = generic_spiral(0.4);
        for x in [c(0.7, 0.2), polar(3.0, 0.6283), c(0.3, 0.0)] {
            let v = q_laplace_plus(|_| Ok(c(1.0, 0.0)), &spiral, x).unwrap();
            assert!(v.converged);
            assert!((v.value - c(1.0, 0.0)).norm() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn laplace_rejects_the_forbidden_spiral() {
        let spiral = generic_spiral(0.4);
        let lam = spiral.lambda;
        assert!(matches!(
            q_laplace_plus(|_| Ok(c(1.0, 0.0)), &spiral, -lam),
            Err(Error::SpiralCollision { k: 0 })
        ));
        let x = -lam * c(0.4, 0.0).powi(3);
        assert!(matches!(
            q_laplace_plus(|_| Ok(c(1.0, 0.0)), &spiral, x),
            Err(Error::SpiralCollision { k: 3 })
        ));
        assert!(matches!(
            q_laplace_plus(|_| Ok(c(1.0, 0.0)), &spiral, c(0.0, 0.0)),
            Err(Error::ZeroArgument)
        ));
    }

    #[test]
    fn laplace_of_theta_identifies_the_divergent_side() {
        // Term n of L(theta) is exactly x^{-n} times a constant: a
        // bilateral geometric sum, divergent for every x. The growing side
        // flips with |x|.
        let spiral = generic_spiral(0.4);
        let cx = spiral.ctx;
        let psi = |xi: Complex<f64>| theta_scaled(xi, &cx).map(|(v, _)| v);
        let inside = q_laplace_plus_scaled(psi, &spiral, c(0.5, 0.2));
        assert!(matches!(
            inside,
            Err(Error::MaxTermsExceeded {
                side: Some(SumSide::Positive),
                ..
            })
        ));
        let outside = q_laplace_plus_scaled(psi, &spiral, c(2.5, 1.0));
        assert!(matches!(
            outside,
            Err(Error::MaxTermsExceeded {
                side: Some(SumSide::Negative),
                ..
            })
        ));
    }

    #[test]
    fn laplace_reports_window_exhaustion_as_not_converged() {
        // psi built to decay by a factor 0.95 per positive step and to
        // vanish on the negative side: too slow for a 64-term window, but
        // never growing, so the sum returns instead of failing.
        let spiral = generic_spiral(0.4);
        let cx = spiral.ctx;
        let lam = spiral.lambda;
        let x = c(2.0, 0.9);
        let psi = move |xi: Complex<f64>| {
            let n = ((xi / lam).norm().ln() / 0.4f64.ln()).round() as i32;
            if n < 0 {
                return Ok(Scaled::zero());
            }
            let (th, _) = theta_scaled(xi / x, &cx)?;
            Ok(th.mul_complex(c(0.95f64.powi(n), 0.0)))
        };
        let (_, trunc) = q_laplace_plus_scaled(psi, &spiral, x).unwrap();
        assert!(!trunc.converged);
        assert_eq!(trunc.pos, DEFAULT_WINDOW);
    }

    #[test]
    fn borel_image_matches_the_direct_bilateral_series() {
        let cx = ctx(0.4);
        let params = flagship_params();
        let spec = SeriesSpec::psi(
            vec![params.a1, params.a2],
            vec![params.b1, c(0.0, 0.0)],
        );
        for xi in [c(0.5, 0.0), c(0.3, 0.2), c(-0.25, 0.55)] {
            let image = borel_image_2psi2(&params, &cx, xi).unwrap();
            let direct = psi_series(&spec, &cx, -xi).unwrap();
            assert!(rel(image.value, direct.value) < 1e-12, "xi = {xi}");
        }
    }

    #[test]
    fn borel_image_continuation_matches_frozen_value() {
        let cx = ctx(0.4);
        let params = flagship_params();
        let xi = polar(3.7, std::f64::consts::PI / 6.0);
        let want = c(
            -2.600991090492572608653975,
            1.484963636939202117297651,
        );
        let got = borel_image_2psi2(&params, &cx, xi).unwrap();
        assert!(got.converged);
        assert!(rel(got.value, want) < 1e-13);
    }

    #[test]
    fn borel_image_branches_agree_near_the_seam() {
        // Just inside the unit circle the dispatch picks the direct series;
        // the closed two-term form must agree there. The series tail decays
        // only like 0.99^n, hence the raised term cap.
        let cx = ctx(0.4).with_max_terms(8192).unwrap();
        let params = flagship_params();
        let xi = polar(0.99, std::f64::consts::PI / 3.0);
        let series = borel_image_2psi2(&params, &cx, xi).unwrap();
        let (closed, _) = connection::corollary_core_scaled(&params, &cx, -xi).unwrap();
        assert!(rel(series.value, closed.to_complex()) < 1e-8);
    }

    #[test]
    fn borel_image_continuation_rejects_theta_poles() {
        let cx = ctx(0.4);
        let params = flagship_params();
        // xi = -q^{-1} lies on the continuation's pole spiral.
        let got = borel_image_2psi2(&params, &cx, c(-2.5, 0.0));
        assert!(matches!(got, Err(Error::ThetaPole { k: -1 })));
    }

    #[test]
    fn roundtrip_on_polynomials() {
        let spiral = generic_spiral(0.4);
        let x = c(0.7, 0.2);
        let one = EntireFunction::polynomial(vec![c(1.0, 0.0)]);
        assert!(roundtrip_check(&one, &spiral, x).unwrap() < 1e-12);
        let cube = EntireFunction::polynomial(vec![
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
        ]);
        assert!(roundtrip_check(&cube, &spiral, x).unwrap() < 1e-12);
        let affine = EntireFunction::polynomial(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(roundtrip_check(&affine, &spiral, x).unwrap() < 1e-12);
        // The same polynomial family away from the unit disk.
        let far = polar(5.0, 1.1);
        assert!(roundtrip_check(&affine, &spiral, far).unwrap() < 1e-12);
    }

    #[test]
    fn roundtrip_on_an_entire_series() {
        // f = 0phi1(; c; q, x) is entire: coefficient q^(n(n-1)) dominates
        // every power.
        let spiral = generic_spiral(0.5);
        let cparam = c(0.3, 0.0);
        let coeffs = BilateralCoefficients::new("0phi1 coefficients", move |n| {
            if n < 0 {
                return c(0.0, 0.0);
            }
            let cx = ctx(0.5);
            let den = qpochhammer(cparam, &cx, n).unwrap()
                * qpochhammer(c(0.5, 0.0), &cx, n).unwrap();
            let weight = Scaled::from_complex(c(0.5, 0.0)).powi((n * (n - 1)) as u64);
            weight.div_complex(den).to_complex()
        });
        let f = EntireFunction::new(coeffs, move |x, cx| {
            phi_series(&SeriesSpec::phi(vec![], vec![cparam]), cx, x).map(|v| v.value)
        });
        let residual = roundtrip_check(&f, &spiral, c(1.7, 0.0)).unwrap();
        assert!(residual < 1e-10, "residual = {residual:e}");
    }

    #[test]
    fn resum_matches_frozen_flagship_value() {
        let spiral = generic_spiral(0.4);
        let x = polar(9.0, std::f64::consts::PI / 5.0);
        let want = c(-1.42144094837554959003995, 4.258149091112917780228987);
        let got = resum_2psi1(&flagship_params(), &spiral, x).unwrap();
        assert!(got.converged);
        assert!(rel(got.value, want) < 5e-12, "rel = {:e}", rel(got.value, want));
    }

    #[test]
    fn resum_is_independent_of_the_spiral_representative() {
        let spiral = generic_spiral(0.4);
        let shifted = SpiralSpec::new(spiral.lambda * c(0.4, 0.0), spiral.ctx).unwrap();
        let x = polar(9.0, std::f64::consts::PI / 5.0);
        let a = resum_2psi1(&flagship_params(), &spiral, x).unwrap();
        let b = resum_2psi1(&flagship_params(), &shifted, x).unwrap();
        assert!(rel(a.value, b.value) < 1e-10);
    }
}
