//! Closed-form sides of the bilateral connection identities.
//!
//! Everything here evaluates finite combinations of infinite Pochhammer
//! products, theta quotients, and convergent unilateral series: the product
//! form of the (1,1) bilateral sum ([`ramanujan_product`]), the two-term
//! connection of the Gauss-type series between 0 and infinity
//! ([`watson_rhs`]), the r-term expansion of the (r,r) bilateral series
//! ([`slater_rhs`]), its confluent two-term limit ([`corollary_2psi2_rhs`]),
//! and the coefficient/solution pair ([`connection_coefficient`],
//! [`v_solution`]) whose combination [`main_theorem_rhs`] reproduces the
//! Borel-Laplace resummation computed independently in `resummation`.
//!
//! Denominator products that vanish identically are rejected up front as
//! [`Error::PoleInProduct`], and evaluation points on a zero set of a
//! denominator theta as [`Error::ThetaZero`]; both name the offending
//! factor, since "division by zero" alone is useless across expressions
//! with a dozen factors.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qcore::scalar::QReal;
use crate::qcore::{
    c_abs_f64, cpowi_plain, phi_series_scaled, q_power_index, qpochhammer_multi_scaled,
    theta_scaled, QContext, QPowerLattice, Scaled, SeriesSpec, Trunc, TruncatedValue,
};
use crate::resummation::{Psi1Params, SpiralSpec};

/// Selects one of the two connection coefficients (and with it the paired
/// solution): `C1` goes with the a1-led term, `C2` with a1 and a2 swapped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientIndex {
    /// Coefficient of the first solution v1.
    C1,
    /// Coefficient of the second solution v2.
    C2,
}

/// A validated request for one connection coefficient C1(x) or C2(x).
#[derive(Clone, Copy, Debug)]
pub struct ConnectionCoefficientSpec<T: QReal> {
    /// Series parameters (a1, a2; b1).
    pub params: Psi1Params<T>,
    /// Spiral whose direction lambda enters the theta quotients.
    pub spiral: SpiralSpec<T>,
    /// Which of the two coefficients to evaluate.
    pub which: CoefficientIndex,
}

impl<T: QReal> ConnectionCoefficientSpec<T> {
    /// Validates the parameters against the spiral's context.
    ///
    /// Beyond the base non-resonance of [`Psi1Params::validate`], the
    /// coefficient's infinite products must not vanish identically, which
    /// pins q/a1, q/a2, q a1/a2, and q a2/a1 off the lattice q^{k <= 0}.
    pub fn new(
        params: Psi1Params<T>,
        spiral: SpiralSpec<T>,
        which: CoefficientIndex,
    ) -> Result<Self> {
        params.validate(&spiral.ctx)?;
        let q = spiral.ctx.q;
        let checks = [
            (q / params.a1, "q/a1"),
            (q / params.a2, "q/a2"),
            (q * params.a1 / params.a2, "q*a1/a2"),
            (q * params.a2 / params.a1, "q*a2/a1"),
        ];
        for (z, name) in checks {
            if let Some(k) = q_power_index(z, &spiral.ctx, QPowerLattice::NonPositive) {
                return Err(Error::PoleInProduct {
                    factor: name.to_string(),
                    k,
                });
            }
        }
        Ok(ConnectionCoefficientSpec {
            params,
            spiral,
            which,
        })
    }
}

fn is_zero<T: QReal>(z: Complex<T>) -> bool {
    z.re == T::zero() && z.im == T::zero()
}

/// Errors when y lies on the zero set of theta, which is exactly -q^Z.
fn guard_theta<T: QReal>(y: Complex<T>, which: &str, ctx: &QContext<T>) -> Result<()> {
    if let Some(k) = q_power_index(-y, ctx, QPowerLattice::All) {
        return Err(Error::ThetaZero {
            which: which.to_string(),
            k,
        });
    }
    Ok(())
}

/// Errors when any listed denominator-product argument lies on q^{k <= 0},
/// where its infinite Pochhammer vanishes identically.
fn guard_product_den<T: QReal>(args: &[(Complex<T>, &str)], ctx: &QContext<T>) -> Result<()> {
    for (z, name) in args {
        if let Some(k) = q_power_index(*z, ctx, QPowerLattice::NonPositive) {
            return Err(Error::PoleInProduct {
                factor: (*name).to_string(),
                k,
            });
        }
    }
    Ok(())
}

/// The product form of the (1,1) bilateral sum:
/// (q, b/a, az, q/(az); q)_inf / (b, q/a, z, b/(az); q)_inf.
///
/// The closed form is evaluated as stated; it represents the bilateral
/// series on |b/a| < |z| < 1 and its analytic continuation elsewhere, so no
/// annulus check is made here (the series side enforces its own domain).
pub fn ramanujan_product<T: QReal>(
    a: Complex<T>,
    b: Complex<T>,
    ctx: &QContext<T>,
    z: Complex<T>,
) -> Result<TruncatedValue<T>> {
    if is_zero(a) {
        return Err(Error::ConfigError {
            reason: "parameter a must be nonzero".into(),
        });
    }
    if is_zero(z) {
        return Err(Error::ZeroArgument);
    }
    let q = ctx.q;
    let az = a * z;
    guard_product_den(
        &[(b, "b"), (q / a, "q/a"), (z, "z"), (b / az, "b/(a*z)")],
        ctx,
    )?;
    let (num, tn) = qpochhammer_multi_scaled(&[q, b / a, az, q / az], ctx)?;
    let (den, td) = qpochhammer_multi_scaled(&[b, q / a, z, b / az], ctx)?;
    Ok(tn.merge(td).into_value(num.div(den).to_complex()))
}

/// The two-term connection of the Gauss-type series between its expansions
/// at 0 and at infinity:
/// sum over (u, w) in {(a, b), (b, a)} of
/// [(w, c/u; q)_inf / (c, w/u; q)_inf] * [theta(-u x) / theta(-x)] *
/// 2phi1(u, u q/c; u q/w; q, c q/(u w x)).
///
/// Requires |c q/(a b x)| < 1 so both series at infinity converge, and
/// x off q^Z, the zero set of theta(-x).
pub fn watson_rhs<T: QReal>(
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    ctx: &QContext<T>,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    for (z, name) in [(a, "a"), (b, "b"), (c, "c")] {
        if is_zero(z) {
            return Err(Error::ConfigError {
                reason: format!("parameter {name} must be nonzero"),
            });
        }
    }
    if is_zero(x) {
        return Err(Error::ZeroArgument);
    }
    if let Some(k) = q_power_index(a / b, ctx, QPowerLattice::All) {
        return Err(Error::ResonantParameter {
            what: "parameter ratio a/b".into(),
            lattice: format!("q^{k}"),
        });
    }
    guard_product_den(&[(c, "c")], ctx)?;
    guard_theta(-x, "theta(-x)", ctx)?;
    let q = ctx.q;
    let (th_den, t0) = theta_scaled(-x, ctx)?;
    let mut total = Scaled::zero();
    let mut trunc = t0;
    for (u, w) in [(a, b), (b, a)] {
        let (num, t1) = qpochhammer_multi_scaled(&[w, c / u], ctx)?;
        let (den, t2) = qpochhammer_multi_scaled(&[c, w / u], ctx)?;
        let (th_num, t3) = theta_scaled(-(u * x), ctx)?;
        let spec = SeriesSpec::phi(vec![u, u * q / c], vec![u * q / w]);
        let (phi, t4) = phi_series_scaled(&spec, ctx, c * q / (u * w * x))?;
        total = total.add(num.div(den).mul(th_num).div(th_den).mul(phi));
        trunc = trunc.merge(t1).merge(t2).merge(t3).merge(t4);
    }
    Ok(trunc.into_value(total.to_complex()))
}

/// Parameters (a_1..a_r; b_1..b_r) of the (r, r) bilateral expansion.
#[derive(Clone, Debug)]
pub struct SlaterParams<T: QReal> {
    /// Numerator parameters a_1..a_r.
    pub a: Vec<Complex<T>>,
    /// Denominator parameters b_1..b_r.
    pub b: Vec<Complex<T>>,
}

impl<T: QReal> SlaterParams<T> {
    /// Bundles the parameter lists; validity is checked against a context
    /// by [`SlaterParams::validate`].
    pub fn new(a: Vec<Complex<T>>, b: Vec<Complex<T>>) -> Self {
        SlaterParams { a, b }
    }

    /// The order r of the expansion.
    pub fn r(&self) -> usize {
        self.a.len()
    }

    /// Checks shape and non-resonance: equal nonempty lists, every a_i and
    /// b_j nonzero, b_j off q^{k <= 0}, and a_i/a_j off q^Z for i != j (the
    /// swapped terms of the expansion collide otherwise).
    pub fn validate(&self, ctx: &QContext<T>) -> Result<()> {
        if self.a.is_empty() || self.a.len() != self.b.len() {
            return Err(Error::ConfigError {
                reason: format!(
                    "parameter lists must have equal nonzero length, got {} and {}",
                    self.a.len(),
                    self.b.len()
                ),
            });
        }
        for (i, &ai) in self.a.iter().enumerate() {
            if is_zero(ai) {
                return Err(Error::ConfigError {
                    reason: format!("numerator parameter a{} must be nonzero", i + 1),
                });
            }
        }
        for (j, &bj) in self.b.iter().enumerate() {
            if is_zero(bj) {
                return Err(Error::ConfigError {
                    reason: format!("denominator parameter b{} must be nonzero", j + 1),
                });
            }
            if let Some(k) = q_power_index(bj, ctx, QPowerLattice::NonPositive) {
                return Err(Error::ResonantParameter {
                    what: format!("denominator parameter b{}", j + 1),
                    lattice: format!("q^{k}"),
                });
            }
        }
        for i in 0..self.a.len() {
            for j in 0..self.a.len() {
                if i == j {
                    continue;
                }
                if let Some(k) = q_power_index(self.a[i] / self.a[j], ctx, QPowerLattice::All) {
                    return Err(Error::ResonantParameter {
                        what: format!("parameter ratio a{}/a{}", i + 1, j + 1),
                        lattice: format!("q^{k}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// The product multiplying the (r, r) bilateral series on the left of the
/// r-term expansion:
/// (b_1..b_r, q/a_1..q/a_r, x, q/x; q)_inf / (q a_1..q a_r, 1/a_1..1/a_r; q)_inf.
///
/// Exposed separately so prefactor * series can be compared against
/// [`slater_rhs`] exactly as the identity is stated.
pub fn slater_lhs_prefactor<T: QReal>(
    params: &SlaterParams<T>,
    ctx: &QContext<T>,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    params.validate(ctx)?;
    if is_zero(x) {
        return Err(Error::ZeroArgument);
    }
    let q = ctx.q;
    let one = Complex::from(T::one());
    let mut num_args = Vec::with_capacity(2 * params.r() + 2);
    let mut den_args = Vec::with_capacity(2 * params.r());
    num_args.extend(params.b.iter().copied());
    for (i, &ai) in params.a.iter().enumerate() {
        num_args.push(q / ai);
        for (z, label) in [(q * ai, "q*a"), (one / ai, "1/a")] {
            if let Some(k) = q_power_index(z, ctx, QPowerLattice::NonPositive) {
                return Err(Error::PoleInProduct {
                    factor: format!("{label}{}", i + 1),
                    k,
                });
            }
            den_args.push(z);
        }
    }
    num_args.push(x);
    num_args.push(q / x);
    let (num, tn) = qpochhammer_multi_scaled(&num_args, ctx)?;
    let (den, td) = qpochhammer_multi_scaled(&den_args, ctx)?;
    Ok(tn.merge(td).into_value(num.div(den).to_complex()))
}

/// The r-term expansion of the (prefactored) (r, r) bilateral series on the
/// annulus |b_1..b_r / (a_1..a_r)| < |x| < 1. Term k is led by a_k^(r-1)
/// and its own Pochhammer quotient, times an (r, r-1) unilateral series at
/// the reciprocal-type argument b_1..b_r / (a_1..a_r x); the terms for
/// k >= 2 are the k = 1 term with a_1 and a_k interchanged.
pub fn slater_rhs<T: QReal>(
    params: &SlaterParams<T>,
    ctx: &QContext<T>,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    params.validate(ctx)?;
    if is_zero(x) {
        return Err(Error::ZeroArgument);
    }
    let q = ctx.q;
    let one = Complex::from(T::one());
    let r = params.r();
    let big_a = params.a.iter().copied().fold(one, |p, z| p * z);
    let big_b = params.b.iter().copied().fold(one, |p, z| p * z);
    let radius = c_abs_f64(big_b) / c_abs_f64(big_a);
    let xm = c_abs_f64(x);
    if !(radius < xm && xm < 1.0) {
        return Err(Error::OutsideConvergenceDomain {
            what: format!(
                "the expansion is stated on the annulus {radius:.6} < |x| < 1, got |x| = {xm:.6}"
            ),
        });
    }
    let mut total = Scaled::zero();
    let mut trunc = Trunc::unilateral(0, 0.0, true);
    for k in 0..r {
        let ak = params.a[k];
        for (z, label) in [(q * ak, "q*a"), (one / ak, "1/a")] {
            if let Some(idx) = q_power_index(z, ctx, QPowerLattice::NonPositive) {
                return Err(Error::PoleInProduct {
                    factor: format!("{label}{}", k + 1),
                    k: idx,
                });
            }
        }
        let mut num_args = vec![q];
        let mut den_args = vec![q * ak, one / ak];
        for (j, &aj) in params.a.iter().enumerate() {
            if j == k {
                continue;
            }
            num_args.push(q * ak / aj);
            den_args.push(ak / aj);
            den_args.push(q * aj / ak);
        }
        for &bj in &params.b {
            num_args.push(bj / ak);
        }
        num_args.push(ak * x);
        num_args.push(q / (ak * x));
        let (num, t1) = qpochhammer_multi_scaled(&num_args, ctx)?;
        let (den, t2) = qpochhammer_multi_scaled(&den_args, ctx)?;
        let phi_num = params.b.iter().map(|&bj| q * ak / bj).collect();
        let phi_den = params
            .a
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &aj)| q * ak / aj)
            .collect();
        let spec = SeriesSpec::phi(phi_num, phi_den);
        let (phi, t3) = phi_series_scaled(&spec, ctx, big_b / (big_a * x))?;
        let lead = cpowi_plain(ak, (r - 1) as u32);
        total = total.add(num.div(den).mul_complex(lead).mul(phi));
        trunc = trunc.merge(t1).merge(t2).merge(t3);
    }
    Ok(trunc.into_value(total.to_complex()))
}

/// The Pochhammer quotient shared by the two-term closed form and the
/// connection coefficients, for the term led by u (with v the other
/// numerator parameter):
/// (q v, 1/v, q u/v, b1/u, q; q)_inf / (b1, q/u, q/v, u/v, q v/u; q)_inf.
pub(crate) fn pair_coefficient_scaled<T: QReal>(
    u: Complex<T>,
    v: Complex<T>,
    u_name: &str,
    v_name: &str,
    b1: Complex<T>,
    ctx: &QContext<T>,
) -> Result<(Scaled<T>, Trunc)> {
    let q = ctx.q;
    let one = Complex::from(T::one());
    let den_args = [
        (b1, "b1".to_string()),
        (q / u, format!("q/{u_name}")),
        (q / v, format!("q/{v_name}")),
        (u / v, format!("{u_name}/{v_name}")),
        (q * v / u, format!("q*{v_name}/{u_name}")),
    ];
    for (z, name) in &den_args {
        if let Some(k) = q_power_index(*z, ctx, QPowerLattice::NonPositive) {
            return Err(Error::PoleInProduct {
                factor: name.clone(),
                k,
            });
        }
    }
    let (num, t1) = qpochhammer_multi_scaled(&[q * v, one / v, q * u / v, b1 / u, q], ctx)?;
    let (den, t2) = qpochhammer_multi_scaled(&[b1, q / u, q / v, u / v, q * v / u], ctx)?;
    Ok((num.div(den), t1.merge(t2)))
}

/// Core of [`corollary_2psi2_rhs`] without parameter re-validation or the
/// |x| < 1 gate; the Borel-image continuation in `resummation` uses it on
/// |x| >= 1, where the same two-term expression continues the series.
pub(crate) fn corollary_core_scaled<T: QReal>(
    params: &Psi1Params<T>,
    ctx: &QContext<T>,
    x: Complex<T>,
) -> Result<(Scaled<T>, Trunc)> {
    let q = ctx.q;
    guard_theta(-x / q, "theta(-x/q)", ctx)?;
    let (th_den, t0) = theta_scaled(-x / q, ctx)?;
    let mut total = Scaled::zero();
    let mut trunc = t0;
    for (u, v, un, vn) in [
        (params.a1, params.a2, "a1", "a2"),
        (params.a2, params.a1, "a2", "a1"),
    ] {
        let (pair, t1) = pair_coefficient_scaled(u, v, un, vn, params.b1, ctx)?;
        let (th_num, t2) = theta_scaled(-(u * x) / q, ctx)?;
        let spec = SeriesSpec::phi(vec![q * u / params.b1], vec![q * u / v]);
        let (phi, t3) = phi_series_scaled(&spec, ctx, q * params.b1 / (v * x))?;
        total = total.add(pair.mul(th_num).div(th_den).mul(phi));
        trunc = trunc.merge(t1).merge(t2).merge(t3);
    }
    Ok((total, trunc))
}

/// The two-term closed form of the confluent (2,2) bilateral series
/// 2psi2(a1, a2; b1, 0; q, x) on 0 < |x| < 1:
/// sum over the (a1, a2) swap of [Pochhammer quotient] *
/// [theta(-u x/q) / theta(-x/q)] * 1phi1(q u/b1; q u/v; q, q b1/(v x)).
///
/// Requires x off q^Z, the zero set of theta(-x/q).
pub fn corollary_2psi2_rhs<T: QReal>(
    params: &Psi1Params<T>,
    ctx: &QContext<T>,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    params.validate(ctx)?;
    if is_zero(x) {
        return Err(Error::ZeroArgument);
    }
    let xm = c_abs_f64(x);
    if xm >= 1.0 {
        return Err(Error::OutsideConvergenceDomain {
            what: format!(
                "the two-term closed form is stated on 0 < |x| < 1, got |x| = {xm:.6}"
            ),
        });
    }
    let (value, trunc) = corollary_core_scaled(params, ctx, x)?;
    Ok(trunc.into_value(value.to_complex()))
}

/// Extended-range core of [`v_solution`], shared with [`main_theorem_rhs`].
pub(crate) fn v_solution_scaled<T: QReal>(
    params: &Psi1Params<T>,
    ctx: &QContext<T>,
    which: usize,
    x: Complex<T>,
) -> Result<(Scaled<T>, Trunc)> {
    let (u, v) = match which {
        1 => (params.a1, params.a2),
        2 => (params.a2, params.a1),
        _ => {
            return Err(Error::ConfigError {
                reason: format!("solution index must be 1 or 2, got {which}"),
            })
        }
    };
    if is_zero(x) {
        return Err(Error::ZeroArgument);
    }
    guard_theta(x, "theta(x)", ctx)?;
    let q = ctx.q;
    let (th_num, t1) = theta_scaled(u * x, ctx)?;
    let (th_den, t2) = theta_scaled(x, ctx)?;
    let zero = Complex::new(T::zero(), T::zero());
    let spec = SeriesSpec::phi(vec![q * u / params.b1, zero], vec![q * u / v]);
    let arg = params.b1 / (params.a1 * params.a2 * x);
    let (phi, t3) = phi_series_scaled(&spec, ctx, arg)?;
    Ok((th_num.div(th_den).mul(phi), t1.merge(t2).merge(t3)))
}

/// The solution around infinity with index 1 or 2:
/// v_i(x) = [theta(a_i x) / theta(x)] *
/// 2phi1(q a_i/b1, 0; q a_i/a_j; q, b1/(a1 a2 x)), j the other index.
///
/// Requires |b1/(a1 a2 x)| < 1 for the series and x off -q^Z, the zero set
/// of theta(x).
pub fn v_solution<T: QReal>(
    params: &Psi1Params<T>,
    ctx: &QContext<T>,
    which: usize,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    params.validate(ctx)?;
    let (value, trunc) = v_solution_scaled(params, ctx, which, x)?;
    Ok(trunc.into_value(value.to_complex()))
}

/// Extended-range core of [`connection_coefficient`], shared with
/// [`main_theorem_rhs`]; assumes the parameters were validated.
pub(crate) fn connection_coefficient_scaled<T: QReal>(
    params: &Psi1Params<T>,
    spiral: &SpiralSpec<T>,
    which: CoefficientIndex,
    x: Complex<T>,
) -> Result<(Scaled<T>, Trunc)> {
    let ctx = &spiral.ctx;
    let q = ctx.q;
    let lam = spiral.lambda;
    let (u, v, un, vn) = match which {
        CoefficientIndex::C1 => (params.a1, params.a2, "a1", "a2"),
        CoefficientIndex::C2 => (params.a2, params.a1, "a2", "a1"),
    };
    if is_zero(x) {
        return Err(Error::ZeroArgument);
    }
    guard_theta(lam / q, "theta(lambda/q)", ctx)?;
    guard_theta(q * x / lam, "theta(q*x/lambda)", ctx)?;
    guard_theta(u * x, &format!("theta({un}*x)"), ctx)?;
    let (pair, t0) = pair_coefficient_scaled(u, v, un, vn, params.b1, ctx)?;
    let (lam_num, t1) = theta_scaled(u * lam / q, ctx)?;
    let (lam_den, t2) = theta_scaled(lam / q, ctx)?;
    let (shift_num, t3) = theta_scaled(u * q * x / lam, ctx)?;
    let (shift_den, t4) = theta_scaled(q * x / lam, ctx)?;
    let (plain_num, t5) = theta_scaled(x, ctx)?;
    let (plain_den, t6) = theta_scaled(u * x, ctx)?;
    let value = pair
        .mul(lam_num)
        .div(lam_den)
        .mul(shift_num)
        .div(shift_den)
        .mul(plain_num)
        .div(plain_den);
    let trunc = t0
        .merge(t1)
        .merge(t2)
        .merge(t3)
        .merge(t4)
        .merge(t5)
        .merge(t6);
    Ok((value, trunc))
}

/// One connection coefficient:
/// C_i(x) = [Pochhammer quotient] * [theta(a_i lambda/q) / theta(lambda/q)]
/// * [theta(a_i q x/lambda) / theta(q x/lambda)] * [theta(x) / theta(a_i x)].
///
/// Both coefficients are q-elliptic in x (invariant under x -> q x), which
/// the verify module checks numerically. Requires x, lambda off the zero
/// sets of the three denominator thetas.
pub fn connection_coefficient<T: QReal>(
    spec: &ConnectionCoefficientSpec<T>,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    let (value, trunc) =
        connection_coefficient_scaled(&spec.params, &spec.spiral, spec.which, x)?;
    Ok(trunc.into_value(value.to_complex()))
}

/// The closed side of the main connection formula:
/// C1(x) v1(x) + C2(x) v2(x).
///
/// Evaluated entirely from closed forms and convergent series, so it is an
/// independent oracle for [`crate::resummation::resum_2psi1`].
pub fn main_theorem_rhs<T: QReal>(
    params: &Psi1Params<T>,
    spiral: &SpiralSpec<T>,
    x: Complex<T>,
) -> Result<TruncatedValue<T>> {
    params.validate(&spiral.ctx)?;
    let ctx = &spiral.ctx;
    let mut total = Scaled::zero();
    let mut trunc = Trunc::unilateral(0, 0.0, true);
    for (which, index) in [(CoefficientIndex::C1, 1), (CoefficientIndex::C2, 2)] {
        let (coeff, t1) = connection_coefficient_scaled(params, spiral, which, x)?;
        let (sol, t2) = v_solution_scaled(params, ctx, index, x)?;
        total = total.add(coeff.mul(sol));
        trunc = trunc.merge(t1).merge(t2);
    }
    Ok(trunc.into_value(total.to_complex()))
}
