//! Numerical verification of the library's identities: q-difference
//! operators, parameter sweeps over grids, and deterministic reports.
//!
//! Each identity pairs two independent evaluation routes (a series against
//! a closed form, a function against its image under a q-shift operator, a
//! transform against its inverse) and measures the relative gap. A sweep
//! walks a grid of parameter points, classifies each point as pass, fail,
//! or skip, and assembles a [`SweepReport`]. Points whose parameters break
//! a precondition (outside an annulus, on a resonance lattice, on a theta
//! zero) skip rather than fail: they carry no information about the
//! identity. A point fails only when every precondition held and either
//! the residual exceeded the tolerance or a series hit its truncation cap.
//!
//! Sweeps are deterministic: the grid is evaluated in order, randomized
//! points are drawn from a counter-based generator seeded by the config,
//! and reports serialize with a fixed field order and exact float
//! formatting, so identical configs produce byte-identical reports.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::connection::{
    connection_coefficient, corollary_2psi2_rhs, main_theorem_rhs, ramanujan_product,
    slater_lhs_prefactor, slater_rhs, v_solution, watson_rhs, CoefficientIndex,
    ConnectionCoefficientSpec, SlaterParams,
};
use crate::error::{Error, Result};
use crate::qcore::scalar::QReal;
use crate::qcore::{
    c_abs_f64, phi_series, psi_series, q_power_index, q_pow_i64, qpochhammer, qpochhammer_multi,
    theta, QContext, QPowerLattice, Scaled, SeriesSpec, TruncatedValue,
};
use crate::resummation::{
    resum_2psi1, roundtrip_check, BilateralCoefficients, EntireFunction, Psi1Params, SpiralSpec,
};

mod grids;
mod report;

pub use grids::default_config;
pub use report::{
    parse_report, write_report, RecordStatus, ReportFormat, SweepRecord, SweepReport,
    SweepSummary,
};

type C = Complex<f64>;

/// Spiral window used by sweeps when a grid point does not set one. Wider
/// than the library default because sweep grids reach closer to the edge
/// of the certified domain, where the positive Laplace tail decays slowly.
const SWEEP_WINDOW: usize = 128;

/// Attempts at drawing an admissible random point before giving up.
const DRAW_ATTEMPTS: usize = 64;

/// A linear q-difference equation sum_k coeff(k, x) u(q^k x) = 0.
///
/// `coeff(order, x)` must not vanish identically, so the equation genuinely
/// has the stated order; `coeff(k, x)` for k beyond the order is zero.
#[derive(Clone)]
pub struct QDifferenceEquation<T: QReal> {
    pub order: usize,
    pub label: String,
    coeff: Arc<dyn Fn(usize, Complex<T>) -> Complex<T> + Send + Sync>,
}

impl<T: QReal> fmt::Debug for QDifferenceEquation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QDifferenceEquation")
            .field("order", &self.order)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl<T: QReal> QDifferenceEquation<T> {
    pub fn new(
        order: usize,
        label: impl Into<String>,
        coeff: impl Fn(usize, Complex<T>) -> Complex<T> + Send + Sync + 'static,
    ) -> Self {
        QDifferenceEquation { order, label: label.into(), coeff: Arc::new(coeff) }
    }

    /// The coefficient of u(q^k x); zero for k beyond the order.
    pub fn coeff(&self, k: usize, x: Complex<T>) -> Complex<T> {
        if k > self.order {
            return Complex::new(T::zero(), T::zero());
        }
        (self.coeff)(k, x)
    }
}

/// The second-order equation satisfied by the resummed bilateral series
/// and by both of its closed-form solution branches:
///
/// (b1/q^2 - a1 a2 x) u(q^2 x) - (1/q - (a1 + a2) x) u(q x) - x u(x) = 0.
///
/// The leading coefficient vanishes only at the single point
/// x = b1/(q^2 a1 a2), so the order is genuinely two.
pub fn equation_2psi1<T: QReal>(
    params: &Psi1Params<T>,
    ctx: &QContext<T>,
) -> QDifferenceEquation<T> {
    let q = ctx.q;
    let (a1, a2, b1) = (params.a1, params.a2, params.b1);
    let one = Complex::from(T::one());
    QDifferenceEquation::new(2, "2psi1", move |k, x| match k {
        2 => b1 / (q * q) - a1 * a2 * x,
        1 => -(one / q - (a1 + a2) * x),
        _ => -x,
    })
}

/// Heine's second-order equation for 2_phi_1(a, b; c; q, x):
///
/// (c - a b q x) u(q^2 x) - ((c + q) - (a + b) q x) u(q x) + q (1 - x) u(x) = 0.
pub fn equation_heine<T: QReal>(
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    ctx: &QContext<T>,
) -> QDifferenceEquation<T> {
    let q = ctx.q;
    let one = Complex::from(T::one());
    QDifferenceEquation::new(2, "heine", move |k, x| match k {
        2 => c - a * b * q * x,
        1 => -((c + q) - (a + b) * q * x),
        _ => q * (one - x),
    })
}

/// Residual of a candidate solution under a q-difference equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QdeResidual {
    /// |sum_k coeff(k, x) u(q^k x)| / max_k |coeff(k, x) u(q^k x)|.
    pub residual: f64,
    /// True when every summand vanished (u is zero along the q-orbit), in
    /// which case the 0/0 quotient is reported as 0.
    pub degenerate: bool,
}

/// Evaluates how well `u` annihilates `eq` at `x`, normalized by the
/// largest summand so cancellation between large terms is measured
/// relative to their size. The residual is invariant under scaling the
/// whole equation by a nonzero constant. Evaluation errors from `u`
/// propagate.
pub fn qde_residual<T: QReal>(
    eq: &QDifferenceEquation<T>,
    u: impl Fn(Complex<T>) -> Result<Complex<T>>,
    ctx: &QContext<T>,
    x: Complex<T>,
) -> Result<QdeResidual> {
    let mut total = Complex::new(T::zero(), T::zero());
    let mut max_mag = 0.0f64;
    let mut arg = x;
    for k in 0..=eq.order {
        let term = eq.coeff(k, x) * u(arg)?;
        total = total + term;
        max_mag = max_mag.max(c_abs_f64(term));
        arg = arg * ctx.q;
    }
    if max_mag == 0.0 {
        return Ok(QdeResidual { residual: 0.0, degenerate: true });
    }
    Ok(QdeResidual { residual: c_abs_f64(total) / max_mag, degenerate: false })
}

/// The identities the sweep harness can exercise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Identity {
    /// Bilateral theta sum against the triple product of Pochhammer factors.
    TripleProduct,
    /// theta(q^k x) against the closed shift factor times theta(x).
    ThetaShift,
    /// theta(1/x) against theta(x)/x.
    ThetaInversion,
    /// u(q x) = -u(x) for u(x) = theta(x)/theta(-x).
    SignQuasiperiod,
    /// Bilateral 1_psi_1 series against its closed product.
    Ramanujan,
    /// 2_phi_1 series against its two-term theta expansion.
    Watson,
    /// Prefactored r_psi_r series against the r-term idem sum.
    SlaterR,
    /// Bilateral 2_psi_2 series against its two-term closed form.
    Corollary,
    /// Resummed divergent series against C1 v1 + C2 v2.
    MainTheorem,
    /// Connection coefficients are invariant under x -> q x.
    Ellipticity,
    /// Solutions annihilate their q-difference equations.
    QdeResidual,
    /// q-Laplace after q-Borel is the identity on entire functions.
    Roundtrip,
}

impl Identity {
    /// All identities, in the order verify-all runs them.
    pub const ALL: [Identity; 12] = [
        Identity::TripleProduct,
        Identity::ThetaShift,
        Identity::ThetaInversion,
        Identity::SignQuasiperiod,
        Identity::Ramanujan,
        Identity::Watson,
        Identity::SlaterR,
        Identity::Corollary,
        Identity::MainTheorem,
        Identity::Ellipticity,
        Identity::QdeResidual,
        Identity::Roundtrip,
    ];

    /// Snake-case name used in configs, reports, and the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            Identity::TripleProduct => "triple_product",
            Identity::ThetaShift => "theta_shift",
            Identity::ThetaInversion => "theta_inversion",
            Identity::SignQuasiperiod => "sign_quasiperiod",
            Identity::Ramanujan => "ramanujan",
            Identity::Watson => "watson",
            Identity::SlaterR => "slater_r",
            Identity::Corollary => "corollary",
            Identity::MainTheorem => "main_theorem",
            Identity::Ellipticity => "ellipticity",
            Identity::QdeResidual => "qde_residual",
            Identity::Roundtrip => "roundtrip",
        }
    }

    pub fn parse(s: &str) -> Result<Identity> {
        Identity::ALL
            .into_iter()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| Error::ConfigError {
                reason: format!(
                    "unknown identity \"{s}\"; expected one of: {}",
                    Identity::ALL.map(Identity::as_str).join(", ")
                ),
            })
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sweep: an identity, a grid of named parameter points, a pass
/// tolerance, and a seed for any randomized points.
///
/// Grid values are json-shaped: a bare number is a real scalar, a
/// two-element array `[re, im]` is a complex scalar, an array is a
/// parameter list for the r-term identities (each element a number or an
/// `[re, im]` pair), and strings select named choices such as the
/// roundtrip test function or `"random"` for a drawn point.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub identity: Identity,
    pub parameter_grid: Vec<Map<String, Value>>,
    pub tolerance: f64,
    pub seed: u64,
}

impl SweepConfig {
    /// Parses a config from json text, rejecting unknown or ill-typed
    /// fields before any evaluation starts.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| config_err(format!("config is not valid json: {e}")))?;
        let obj = root
            .as_object()
            .ok_or_else(|| config_err("config root is not an object"))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "identity" | "parameter_grid" | "tolerance" | "seed") {
                return Err(config_err(format!("unknown config key \"{key}\"")));
            }
        }
        let identity = Identity::parse(
            obj.get("identity")
                .and_then(Value::as_str)
                .ok_or_else(|| config_err("config needs a string \"identity\""))?,
        )?;
        let tolerance = obj
            .get("tolerance")
            .and_then(Value::as_f64)
            .ok_or_else(|| config_err("config needs a numeric \"tolerance\""))?;
        let seed = match obj.get("seed") {
            None => 0,
            Some(v) => v
                .as_u64()
                .ok_or_else(|| config_err("config \"seed\" must be a nonnegative integer"))?,
        };
        let raw_grid = obj
            .get("parameter_grid")
            .and_then(Value::as_array)
            .ok_or_else(|| config_err("config needs an array \"parameter_grid\""))?;
        let mut parameter_grid = Vec::with_capacity(raw_grid.len());
        for (i, point) in raw_grid.iter().enumerate() {
            let point = point
                .as_object()
                .ok_or_else(|| config_err(format!("grid point {i} is not an object")))?;
            parameter_grid.push(point.clone());
        }
        let config = SweepConfig { identity, parameter_grid, tolerance, seed };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(config_err(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

fn config_err(reason: impl Into<String>) -> Error {
    Error::ConfigError { reason: reason.into() }
}

/// Truncation diagnostics accumulated over the evaluations behind one
/// grid point: deepest positive and negative term counts, and whether
/// every series converged.
#[derive(Clone, Copy, Debug)]
struct Tally {
    pos: usize,
    neg: usize,
    converged: bool,
}

impl Tally {
    fn new() -> Self {
        Tally { pos: 0, neg: 0, converged: true }
    }

    fn add<T: QReal>(&mut self, t: &TruncatedValue<T>) {
        self.pos = self.pos.max(t.terms_used_pos);
        self.neg = self.neg.max(t.terms_used_neg);
        self.converged &= t.converged;
    }
}

/// What evaluating one grid point produced, before the tolerance verdict.
enum Outcome {
    Evaluated {
        lhs: Option<(f64, f64)>,
        rhs: Option<(f64, f64)>,
        abs_residual: Option<f64>,
        rel_residual: f64,
        tally: Tally,
    },
    Skipped { reason: String },
    Failed { reason: String },
}

impl Outcome {
    /// Standard two-sided comparison with max-magnitude normalization.
    fn compare(lhs: C, rhs: C, tally: Tally) -> Outcome {
        let abs = (lhs - rhs).norm();
        let scale = lhs.norm().max(rhs.norm());
        let rel = if scale > 0.0 { abs / scale } else { 0.0 };
        Outcome::Evaluated {
            lhs: Some((lhs.re, lhs.im)),
            rhs: Some((rhs.re, rhs.im)),
            abs_residual: Some(abs),
            rel_residual: rel,
            tally,
        }
    }

    /// A residual-style check with no natural value pair.
    fn residual(rel: f64, tally: Tally) -> Outcome {
        Outcome::Evaluated {
            lhs: None,
            rhs: None,
            abs_residual: None,
            rel_residual: rel,
            tally,
        }
    }
}

/// Classifies an evaluation error: config-shaped errors abort the sweep,
/// truncation caps are failures, every other domain error is a skip.
fn outcome_from_error(e: Error) -> Result<Outcome> {
    match e {
        Error::ConfigError { .. } | Error::InvalidContext { .. } | Error::Io(_) => Err(e),
        Error::MaxTermsExceeded { .. } => Ok(Outcome::Failed { reason: e.to_string() }),
        other => Ok(Outcome::Skipped { reason: other.to_string() }),
    }
}

fn guard(result: Result<Outcome>) -> Result<Outcome> {
    match result {
        Ok(o) => Ok(o),
        Err(e) => outcome_from_error(e),
    }
}

/// Runs one sweep. Grid points are evaluated in order; per-point domain
/// errors become skip records and residuals above tolerance become fail
/// records, so the report is complete even when points fail. Only a
/// malformed config aborts the sweep. Identical configs (including the
/// seed) produce identical reports.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::with_capacity(config.parameter_grid.len());
    let mut summary = SweepSummary { pass: 0, fail: 0, skip: 0, max_rel_residual: 0.0 };

    for (index, point) in config.parameter_grid.iter().enumerate() {
        let (outcome, extra) = evaluate_point(config.identity, point, &mut rng)?;
        let record = build_record(index, point, outcome, extra, config.tolerance);
        match record.status {
            RecordStatus::Pass => summary.pass += 1,
            RecordStatus::Fail => summary.fail += 1,
            RecordStatus::Skip => summary.skip += 1,
        }
        if let Some(rel) = record.rel_residual {
            summary.max_rel_residual = summary.max_rel_residual.max(rel);
        }
        records.push(record);
    }

    Ok(SweepReport {
        identity: config.identity.as_str().to_string(),
        tolerance: config.tolerance,
        seed: config.seed,
        records,
        summary,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

fn build_record(
    index: usize,
    point: &Map<String, Value>,
    outcome: Outcome,
    extra: Vec<(String, String)>,
    tolerance: f64,
) -> SweepRecord {
    let mut inputs: Vec<(String, String)> =
        point.iter().map(|(k, v)| (k.clone(), fmt_input(v))).collect();
    inputs.extend(extra);

    let mut record = SweepRecord {
        index,
        inputs,
        lhs: None,
        rhs: None,
        abs_residual: None,
        rel_residual: None,
        terms_pos: 0,
        terms_neg: 0,
        converged: false,
        status: RecordStatus::Skip,
        reason: String::new(),
    };

    match outcome {
        Outcome::Skipped { reason } => {
            record.reason = reason;
        }
        Outcome::Failed { reason } => {
            record.status = RecordStatus::Fail;
            record.reason = reason;
        }
        Outcome::Evaluated { lhs, rhs, abs_residual, rel_residual, tally } => {
            record.lhs = lhs;
            record.rhs = rhs;
            record.abs_residual = abs_residual;
            record.rel_residual = Some(rel_residual);
            record.terms_pos = tally.pos;
            record.terms_neg = tally.neg;
            record.converged = tally.converged;
            if !tally.converged {
                record.status = RecordStatus::Fail;
                record.reason = "a series stopped before meeting its accuracy target".to_string();
            } else if rel_residual.is_finite() && rel_residual <= tolerance {
                record.status = RecordStatus::Pass;
            } else {
                record.status = RecordStatus::Fail;
                record.reason = format!(
                    "relative residual {rel_residual:.3e} exceeds tolerance {tolerance:.3e}"
                );
            }
        }
    }
    record
}

/// Formats one grid value for the report's input listing.
fn fmt_input(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.to_string(),
            None => format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::Array(items) => {
            if let Some((re, im)) = as_pair(items) {
                format!("{re:.16e} {im:.16e}")
            } else {
                let parts: Vec<String> = items.iter().map(fmt_input).collect();
                format!("[{}]", parts.join("; "))
            }
        }
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

fn as_pair(items: &[Value]) -> Option<(f64, f64)> {
    if items.len() == 2 {
        if let (Some(re), Some(im)) = (items[0].as_f64(), items[1].as_f64()) {
            return Some((re, im));
        }
    }
    None
}

fn missing(key: &str) -> Error {
    config_err(format!("grid point is missing \"{key}\""))
}

/// A complex grid value: a bare number or an [re, im] pair.
fn cx(point: &Map<String, Value>, key: &str) -> Result<C> {
    let v = point.get(key).ok_or_else(|| missing(key))?;
    cx_value(v).ok_or_else(|| {
        config_err(format!("grid value \"{key}\" must be a number or an [re, im] pair"))
    })
}

fn cx_value(v: &Value) -> Option<C> {
    match v {
        Value::Number(n) => n.as_f64().map(|re| Complex::new(re, 0.0)),
        Value::Array(items) => as_pair(items).map(|(re, im)| Complex::new(re, im)),
        _ => None,
    }
}

/// A parameter list: each element a number or an [re, im] pair.
fn cx_list(point: &Map<String, Value>, key: &str) -> Result<Vec<C>> {
    let items = point
        .get(key)
        .ok_or_else(|| missing(key))?
        .as_array()
        .ok_or_else(|| config_err(format!("grid value \"{key}\" must be an array")))?;
    items
        .iter()
        .map(|v| {
            cx_value(v).ok_or_else(|| {
                config_err(format!(
                    "grid list \"{key}\" elements must be numbers or [re, im] pairs"
                ))
            })
        })
        .collect()
}

fn int(point: &Map<String, Value>, key: &str) -> Result<i64> {
    point
        .get(key)
        .ok_or_else(|| missing(key))?
        .as_i64()
        .ok_or_else(|| config_err(format!("grid value \"{key}\" must be an integer")))
}

fn opt_window(point: &Map<String, Value>) -> Result<Option<usize>> {
    match point.get("window") {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|w| Some(w as usize))
            .ok_or_else(|| config_err("grid value \"window\" must be a nonnegative integer")),
    }
}

fn name_of<'a>(point: &'a Map<String, Value>, key: &str) -> Result<&'a str> {
    point
        .get(key)
        .ok_or_else(|| missing(key))?
        .as_str()
        .ok_or_else(|| config_err(format!("grid value \"{key}\" must be a string")))
}

fn context(point: &Map<String, Value>) -> Result<QContext<f64>> {
    QContext::new(cx(point, "q")?)
}

fn nonzero(x: C) -> Result<C> {
    if x.re == 0.0 && x.im == 0.0 {
        Err(Error::ZeroArgument)
    } else {
        Ok(x)
    }
}

fn psi1_params(point: &Map<String, Value>) -> Result<Psi1Params<f64>> {
    Ok(Psi1Params::new(cx(point, "a1")?, cx(point, "a2")?, cx(point, "b1")?))
}

fn evaluate_point(
    identity: Identity,
    point: &Map<String, Value>,
    rng: &mut ChaCha8Rng,
) -> Result<(Outcome, Vec<(String, String)>)> {
    if identity == Identity::Ellipticity {
        return eval_ellipticity(point, rng);
    }
    let outcome = guard(match identity {
        Identity::TripleProduct => eval_triple_product(point),
        Identity::ThetaShift => eval_theta_shift(point),
        Identity::ThetaInversion => eval_theta_inversion(point),
        Identity::SignQuasiperiod => eval_sign_quasiperiod(point),
        Identity::Ramanujan => eval_ramanujan(point),
        Identity::Watson => eval_watson(point),
        Identity::SlaterR => eval_slater(point),
        Identity::Corollary => eval_corollary(point),
        Identity::MainTheorem => eval_main_theorem(point),
        Identity::QdeResidual => eval_qde(point),
        Identity::Roundtrip => eval_roundtrip(point),
        Identity::Ellipticity => unreachable!("handled above"),
    })?;
    Ok((outcome, Vec::new()))
}

fn eval_triple_product(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let x = nonzero(cx(point, "x")?)?;
    let lhs = theta(x, &ctx)?;
    let rhs = qpochhammer_multi(&[ctx.q, -x, -ctx.q / x], &ctx)?;
    let mut tally = Tally::new();
    tally.add(&lhs);
    tally.add(&rhs);
    Ok(Outcome::compare(lhs.value, rhs.value, tally))
}

fn eval_theta_shift(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let x = nonzero(cx(point, "x")?)?;
    let k = int(point, "k")?;
    let shifted = theta(q_pow_i64(ctx.q, k) * x, &ctx)?;
    let base = theta(x, &ctx)?;
    let factor = q_pow_i64(ctx.q, -k * (k - 1) / 2) * x.powi(-k as i32);
    let mut tally = Tally::new();
    tally.add(&shifted);
    tally.add(&base);
    Ok(Outcome::compare(shifted.value, factor * base.value, tally))
}

fn eval_theta_inversion(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let x = nonzero(cx(point, "x")?)?;
    let lhs = theta(Complex::new(1.0, 0.0) / x, &ctx)?;
    let rhs = theta(x, &ctx)?;
    let mut tally = Tally::new();
    tally.add(&lhs);
    tally.add(&rhs);
    Ok(Outcome::compare(lhs.value, rhs.value / x, tally))
}

fn eval_sign_quasiperiod(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let x = nonzero(cx(point, "x")?)?;
    for (z, which) in [(x, "theta(x)"), (-x, "theta(-x)")] {
        if let Some(k) = q_power_index(-z, &ctx, QPowerLattice::All) {
            return Err(Error::ThetaZero { which: which.to_string(), k });
        }
    }
    let qx = ctx.q * x;
    let mut tally = Tally::new();
    let mut eval = |z: C| -> Result<C> {
        let t = theta(z, &ctx)?;
        tally.add(&t);
        Ok(t.value)
    };
    let lhs = eval(qx)? / eval(-qx)?;
    let rhs = -(eval(x)? / eval(-x)?);
    Ok(Outcome::compare(lhs, rhs, tally))
}

fn eval_ramanujan(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let (a, b) = (cx(point, "a")?, cx(point, "b")?);
    let z = cx(point, "z")?;
    let lhs = psi_series(&SeriesSpec::psi(vec![a], vec![b]), &ctx, z)?;
    let rhs = ramanujan_product(a, b, &ctx, z)?;
    let mut tally = Tally::new();
    tally.add(&lhs);
    tally.add(&rhs);
    Ok(Outcome::compare(lhs.value, rhs.value, tally))
}

fn eval_watson(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let (a, b, c) = (cx(point, "a")?, cx(point, "b")?, cx(point, "c")?);
    let x = cx(point, "x")?;
    let lhs = phi_series(&SeriesSpec::phi(vec![a, b], vec![c]), &ctx, x)?;
    let rhs = watson_rhs(a, b, c, &ctx, x)?;
    let mut tally = Tally::new();
    tally.add(&lhs);
    tally.add(&rhs);
    Ok(Outcome::compare(lhs.value, rhs.value, tally))
}

fn eval_slater(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let a = cx_list(point, "a")?;
    let b = cx_list(point, "b")?;
    let x = cx(point, "x")?;
    let params = SlaterParams::new(a.clone(), b.clone());
    let prefactor = slater_lhs_prefactor(&params, &ctx, x)?;
    let series = psi_series(&SeriesSpec::psi(a, b), &ctx, x)?;
    let rhs = slater_rhs(&params, &ctx, x)?;
    let mut tally = Tally::new();
    tally.add(&prefactor);
    tally.add(&series);
    tally.add(&rhs);
    Ok(Outcome::compare(prefactor.value * series.value, rhs.value, tally))
}

fn eval_corollary(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let params = psi1_params(point)?;
    let x = cx(point, "x")?;
    let spec = SeriesSpec::psi(
        vec![params.a1, params.a2],
        vec![params.b1, Complex::new(0.0, 0.0)],
    );
    let lhs = psi_series(&spec, &ctx, x)?;
    let rhs = corollary_2psi2_rhs(&params, &ctx, x)?;
    let mut tally = Tally::new();
    tally.add(&lhs);
    tally.add(&rhs);
    Ok(Outcome::compare(lhs.value, rhs.value, tally))
}

fn sweep_spiral(point: &Map<String, Value>, ctx: QContext<f64>) -> Result<SpiralSpec<f64>> {
    let spiral = SpiralSpec::new(cx(point, "lambda")?, ctx)?;
    spiral.with_window(opt_window(point)?.unwrap_or(SWEEP_WINDOW))
}

fn eval_main_theorem(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let params = psi1_params(point)?;
    let spiral = sweep_spiral(point, ctx)?;
    let x = cx(point, "x")?;
    let lhs = resum_2psi1(&params, &spiral, x)?;
    let rhs = main_theorem_rhs(&params, &spiral, x)?;
    let mut tally = Tally::new();
    tally.add(&lhs);
    tally.add(&rhs);
    Ok(Outcome::compare(lhs.value, rhs.value, tally))
}

/// Ellipticity residual of both connection coefficients at one x. The
/// residual is |C_i(q x) - C_i(x)| / (|C_i(x)| + 1), worst case over i,
/// with the first coefficient's pair recorded as the compared values.
fn ellipticity_at(
    params: &Psi1Params<f64>,
    spiral: &SpiralSpec<f64>,
    x: C,
) -> Result<Outcome> {
    let q = spiral.ctx.q;
    let mut tally = Tally::new();
    let mut abs = 0.0f64;
    let mut rel = 0.0f64;
    let mut recorded: Option<(C, C)> = None;
    for which in [CoefficientIndex::C1, CoefficientIndex::C2] {
        let spec = ConnectionCoefficientSpec::new(*params, *spiral, which)?;
        let at_x = connection_coefficient(&spec, x)?;
        let at_qx = connection_coefficient(&spec, q * x)?;
        tally.add(&at_x);
        tally.add(&at_qx);
        let diff = (at_qx.value - at_x.value).norm();
        abs = abs.max(diff);
        rel = rel.max(diff / (at_x.value.norm() + 1.0));
        recorded.get_or_insert((at_x.value, at_qx.value));
    }
    let (lhs, rhs) = recorded.expect("loop ran");
    Ok(Outcome::Evaluated {
        lhs: Some((lhs.re, lhs.im)),
        rhs: Some((rhs.re, rhs.im)),
        abs_residual: Some(abs),
        rel_residual: rel,
        tally,
    })
}

fn eval_ellipticity(
    point: &Map<String, Value>,
    rng: &mut ChaCha8Rng,
) -> Result<(Outcome, Vec<(String, String)>)> {
    let ctx = context(point)?;
    let params = psi1_params(point)?;
    let spiral = sweep_spiral(point, ctx)?;

    let wants_random = matches!(point.get("x"), Some(Value::String(s)) if s == "random");
    if !wants_random {
        let x = cx(point, "x")?;
        return Ok((guard(ellipticity_at(&params, &spiral, x))?, Vec::new()));
    }

    for _ in 0..DRAW_ATTEMPTS {
        let radius = (0.8f64.ln() + rng.random::<f64>() * (6.0f64 / 0.8).ln()).exp();
        let angle = rng.random::<f64>() * std::f64::consts::TAU;
        let x = Complex::from_polar(radius, angle);
        match ellipticity_at(&params, &spiral, x) {
            Ok(outcome) => {
                let drawn = vec![("x_drawn".to_string(), format!("{:.16e} {:.16e}", x.re, x.im))];
                return Ok((outcome, drawn));
            }
            Err(e @ (Error::ConfigError { .. } | Error::InvalidContext { .. })) => return Err(e),
            Err(_) => continue,
        }
    }
    let reason = format!("no admissible random point found in {DRAW_ATTEMPTS} draws");
    Ok((Outcome::Skipped { reason }, Vec::new()))
}

fn eval_qde(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let x = cx(point, "x")?;
    let which = name_of(point, "u")?;
    let tally = RefCell::new(Tally::new());

    let residual = match which {
        "v1" | "v2" => {
            let params = psi1_params(point)?;
            let index = if which == "v1" { 1 } else { 2 };
            let eq = equation_2psi1(&params, &ctx);
            qde_residual(
                &eq,
                |y| {
                    let t = v_solution(&params, &ctx, index, y)?;
                    tally.borrow_mut().add(&t);
                    Ok(t.value)
                },
                &ctx,
                x,
            )?
        }
        "phi21" => {
            let (a, b, c) = (cx(point, "a")?, cx(point, "b")?, cx(point, "c")?);
            let eq = equation_heine(a, b, c, &ctx);
            let spec = SeriesSpec::phi(vec![a, b], vec![c]);
            qde_residual(
                &eq,
                |y| {
                    let t = phi_series(&spec, &ctx, y)?;
                    tally.borrow_mut().add(&t);
                    Ok(t.value)
                },
                &ctx,
                x,
            )?
        }
        other => {
            return Err(config_err(format!(
                "unknown solution \"{other}\"; expected v1, v2, or phi21"
            )))
        }
    };
    Ok(Outcome::residual(residual.residual, tally.into_inner()))
}

fn eval_roundtrip(point: &Map<String, Value>) -> Result<Outcome> {
    let ctx = context(point)?;
    let x = cx(point, "x")?;
    let spiral = SpiralSpec::new(cx(point, "lambda")?, ctx)?;
    let spiral = match opt_window(point)? {
        Some(w) => spiral.with_window(w)?,
        None => spiral,
    };
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let f = match name_of(point, "f")? {
        "one" => EntireFunction::polynomial(vec![one]),
        "cube" => EntireFunction::polynomial(vec![zero, zero, zero, one]),
        "affine" => EntireFunction::polynomial(vec![one, one]),
        "phi01" => entire_0phi1(cx(point, "c")?, ctx),
        other => {
            return Err(config_err(format!(
                "unknown test function \"{other}\"; expected one, cube, affine, or phi01"
            )))
        }
    };
    let residual = roundtrip_check(&f, &spiral, x)?;
    Ok(Outcome::residual(residual, Tally::new()))
}

/// The entire function 0_phi_1(; c; q, x), given by coefficients
/// q^(n(n-1)) / ((c; q)_n (q; q)_n) and evaluated through its series.
fn entire_0phi1(c: C, ctx: QContext<f64>) -> EntireFunction<f64> {
    let q = ctx.q;
    let coeffs = BilateralCoefficients::new("0phi1 coefficients", move |n| {
        if n < 0 {
            return Complex::new(0.0, 0.0);
        }
        let den = match (qpochhammer(c, &ctx, n), qpochhammer(q, &ctx, n)) {
            (Ok(u), Ok(v)) => u * v,
            _ => return Complex::new(f64::NAN, f64::NAN),
        };
        Scaled::from_complex(q).powi((n * (n - 1)) as u64).div_complex(den).to_complex()
    });
    EntireFunction::new(coeffs, move |x, cx| {
        phi_series(&SeriesSpec::phi(vec![], vec![c]), cx, x).map(|v| v.value)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn polar(r: f64, theta: f64) -> C {
        Complex::from_polar(r, theta)
    }

    fn ctx(q: f64) -> QContext<f64> {
        QContext::new(c(q, 0.0)).unwrap()
    }

    fn point(text: &str) -> Map<String, Value> {
        serde_json::from_str::<Value>(text).unwrap().as_object().unwrap().clone()
    }

    fn config(identity: Identity, tolerance: f64, points: &[&str]) -> SweepConfig {
        SweepConfig {
            identity,
            parameter_grid: points.iter().map(|p| point(p)).collect(),
            tolerance,
            seed: 7,
        }
    }

    #[test]
    fn both_solution_branches_annihilate_their_equation() {
        let cx = ctx(0.3);
        let params = Psi1Params::new(c(0.8, 0.0), c(0.5, 0.0), c(0.1, 0.0));
        let eq = equation_2psi1(&params, &cx);
        let x = polar(10.0, std::f64::consts::PI / 5.0);
        for index in [1, 2] {
            let res = qde_residual(
                &eq,
                |y| v_solution(&params, &cx, index, y).map(|t| t.value),
                &cx,
                x,
            )
            .unwrap();
            assert!(!res.degenerate);
            assert!(res.residual < 1e-9, "v{index} residual = {:e}", res.residual);
        }
    }

    #[test]
    fn heine_solution_annihilates_heine() {
        let cx = ctx(0.4);
        let (a, b, cc) = (c(0.5, 0.0), c(0.3, 0.0), c(0.7, 0.0));
        let eq = equation_heine(a, b, cc, &cx);
        let spec = SeriesSpec::phi(vec![a, b], vec![cc]);
        let res = qde_residual(
            &eq,
            |y| phi_series(&spec, &cx, y).map(|t| t.value),
            &cx,
            c(0.25, 0.0),
        )
        .unwrap();
        assert!(res.residual < 1e-12, "residual = {:e}", res.residual);
    }

    #[test]
    fn residual_is_invariant_under_equation_scaling() {
        let cx = ctx(0.3);
        let params = Psi1Params::new(c(0.8, 0.0), c(0.5, 0.0), c(0.1, 0.0));
        let base = equation_2psi1(&params, &cx);
        let scale = c(2.7, -0.4);
        let inner = base.clone();
        let scaled = QDifferenceEquation::new(2, "scaled", move |k, x| scale * inner.coeff(k, x));
        let x = polar(10.0, std::f64::consts::PI / 5.0);

        // A non-solution leaves an order-one residual, where invariance is
        // checkable at full relative precision.
        let u = |y: C| Ok(c(1.0, 0.0) / (c(1.0, 0.0) - y));
        let r0 = qde_residual(&base, u, &cx, x).unwrap().residual;
        let r1 = qde_residual(&scaled, u, &cx, x).unwrap().residual;
        assert!(r0 > 1e-3, "expected a visible residual, got {r0:e}");
        assert!((r0 - r1).abs() <= 1e-12 * r0, "{r0:e} vs {r1:e}");

        // A genuine solution leaves cancellation noise; scaling must not
        // move it above noise level.
        let v = |y: C| v_solution(&params, &cx, 1, y).map(|t| t.value);
        let s0 = qde_residual(&base, v, &cx, x).unwrap().residual;
        let s1 = qde_residual(&scaled, v, &cx, x).unwrap().residual;
        assert!(s0 < 1e-12 && s1 < 1e-12, "{s0:e} vs {s1:e}");
    }

    #[test]
    fn zero_solution_is_degenerate_not_infinite() {
        let cx = ctx(0.4);
        let params = Psi1Params::new(c(0.7, 0.0), c(0.3, 0.0), c(0.9, 0.0));
        let eq = equation_2psi1(&params, &cx);
        let res = qde_residual(&eq, |_| Ok(c(0.0, 0.0)), &cx, c(2.0, 1.0)).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.residual, 0.0);
    }

    #[test]
    fn coefficients_beyond_the_order_vanish() {
        let cx = ctx(0.4);
        let params = Psi1Params::new(c(0.7, 0.0), c(0.3, 0.0), c(0.9, 0.0));
        let eq = equation_2psi1(&params, &cx);
        assert_eq!(eq.order, 2);
        assert_eq!(eq.coeff(3, c(1.0, 0.0)), c(0.0, 0.0));
        assert_ne!(eq.coeff(2, c(1.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn identity_names_roundtrip() {
        assert_eq!(Identity::ALL.len(), 12);
        for id in Identity::ALL {
            assert_eq!(Identity::parse(id.as_str()).unwrap(), id);
        }
        assert!(matches!(
            Identity::parse("quintuple_product"),
            Err(Error::ConfigError { .. })
        ));
    }

    #[test]
    fn config_parsing_rejects_malformed_input() {
        let good = r#"{"identity": "ramanujan", "tolerance": 1e-10, "seed": 3,
                       "parameter_grid": [{"q": 0.3, "a": 0.5, "b": 0.2, "z": 0.55}]}"#;
        let parsed = SweepConfig::from_json_str(good).unwrap();
        assert_eq!(parsed.identity, Identity::Ramanujan);
        assert_eq!(parsed.seed, 3);
        assert_eq!(parsed.parameter_grid.len(), 1);

        for bad in [
            "not json",
            "[]",
            r#"{"identity": "ramanujan", "tolerance": 1e-10}"#,
            r#"{"identity": "ramanujan", "tolerance": 0.0, "parameter_grid": []}"#,
            r#"{"identity": "bogus", "tolerance": 1e-10, "parameter_grid": []}"#,
            r#"{"identity": "ramanujan", "tolerance": 1e-10, "parameter_grid": [3]}"#,
            r#"{"identity": "ramanujan", "tolerance": 1e-10, "parameter_grid": [], "extra": 1}"#,
        ] {
            assert!(
                matches!(SweepConfig::from_json_str(bad), Err(Error::ConfigError { .. })),
                "accepted: {bad}"
            );
        }
    }

    #[test]
    fn sweep_passes_a_small_theta_grid() {
        let cfg = config(
            Identity::TripleProduct,
            1e-12,
            &[
                r#"{"q": 0.5, "x": [0.8, 0.5]}"#,
                r#"{"q": 0.3, "x": [-1.2, 0.7]}"#,
            ],
        );
        let report = run_sweep(&cfg).unwrap();
        assert_eq!(report.summary.pass, 2);
        assert_eq!(report.summary.fail, 0);
        assert_eq!(report.summary.skip, 0);
        assert!(report.summary.max_rel_residual < 1e-12);
        assert_eq!(report.records.len(), 2);
        assert!(report.records.iter().all(|r| r.converged));
    }

    #[test]
    fn annulus_violations_skip_rather_than_fail() {
        let cfg = config(
            Identity::Ramanujan,
            1e-10,
            &[
                r#"{"q": 0.3, "a": 0.5, "b": 0.2, "z": 0.55}"#,
                r#"{"q": 0.3, "a": 0.5, "b": 0.2, "z": 0.1}"#,
            ],
        );
        let report = run_sweep(&cfg).unwrap();
        assert_eq!(report.summary.pass, 1);
        assert_eq!(report.summary.skip, 1);
        assert_eq!(report.records[1].status, RecordStatus::Skip);
        assert!(report.records[1].reason.contains("convergence domain"));
    }

    #[test]
    fn impossible_tolerance_fails_with_a_residual_reason() {
        let cfg = config(Identity::ThetaShift, 1e-30, &[r#"{"q": 0.5, "x": [0.8, 0.5], "k": 2}"#]);
        let report = run_sweep(&cfg).unwrap();
        assert_eq!(report.summary.fail, 1);
        assert!(report.records[0].reason.contains("exceeds tolerance"));
    }

    #[test]
    fn sweeps_with_random_points_are_reproducible() {
        let tuple = r#"{"q": 0.4, "a1": 0.7, "a2": 0.3, "b1": 0.9,
                        "lambda": [0.9909, 0.4772], "x": "random"}"#;
        let cfg = config(Identity::Ellipticity, 1e-10, &[tuple, tuple]);
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.summary.pass, 2);
        let drawn: Vec<_> = a.records[0].inputs.iter().filter(|(k, _)| k == "x_drawn").collect();
        assert_eq!(drawn.len(), 1);
        assert_ne!(a.records[0].inputs, a.records[1].inputs);
    }

    #[test]
    fn qde_and_roundtrip_points_pass_through_the_sweep() {
        let cfg = config(
            Identity::QdeResidual,
            1e-9,
            &[
                r#"{"q": 0.3, "a1": 0.8, "a2": 0.5, "b1": 0.1, "x": [8.09, 5.877], "u": "v1"}"#,
                r#"{"q": 0.4, "a": 0.5, "b": 0.3, "c": 0.7, "x": 0.25, "u": "phi21"}"#,
            ],
        );
        let report = run_sweep(&cfg).unwrap();
        assert_eq!(report.summary.pass, 2, "report: {}", report.to_json());

        let cfg = config(
            Identity::Roundtrip,
            1e-10,
            &[
                r#"{"q": 0.4, "lambda": [0.9909, 0.4772], "x": 1.7, "f": "one"}"#,
                r#"{"q": 0.4, "lambda": [0.9909, 0.4772], "x": 1.7, "f": "phi01", "c": 0.3}"#,
            ],
        );
        let report = run_sweep(&cfg).unwrap();
        assert_eq!(report.summary.pass, 2, "report: {}", report.to_json());
    }

    #[test]
    fn unknown_grid_names_abort_the_sweep() {
        let cfg = config(Identity::QdeResidual, 1e-9, &[r#"{"q": 0.3, "x": 5.0, "u": "v9"}"#]);
        assert!(matches!(run_sweep(&cfg), Err(Error::ConfigError { .. })));

        let cfg = config(Identity::TripleProduct, 1e-12, &[r#"{"q": 0.5}"#]);
        let err = run_sweep(&cfg).unwrap_err();
        assert!(matches!(err, Error::ConfigError { .. }), "{err}");
    }

    #[test]
    fn default_configs_exist_for_every_identity() {
        for id in Identity::ALL {
            let cfg = default_config(id);
            assert_eq!(cfg.identity, id);
            assert!(!cfg.parameter_grid.is_empty(), "{id} grid is empty");
            assert!(cfg.tolerance > 0.0);
        }
    }
}
