//! Numerics for q-series: Pochhammer symbols, theta functions, basic
//! hypergeometric series (unilateral and bilateral), q-Borel/q-Laplace
//! resummation of the divergent bilateral 2_psi_1, and the connection
//! identities that tie them together, with a verification harness that
//! sweeps every identity over parameter grids.
//!
//! Organization:
//!
//! - [`qcore`]: scalars, evaluation context, Pochhammer, theta, series.
//! - [`resummation`]: q-Borel and q-Laplace transforms on a spiral, and
//!   the resummed 2_psi_1.
//! - [`connection`]: product and series identities (Ramanujan, Watson,
//!   the r-term idem sum, the confluent corollary) and the connection
//!   coefficients of the main identity.
//! - [`verify`]: q-difference operators, identity sweeps, reports.

pub mod connection;
pub mod error;
pub mod qcore;
pub mod resummation;
pub mod verify;

pub use connection::{
    connection_coefficient, corollary_2psi2_rhs, main_theorem_rhs, ramanujan_product,
    slater_lhs_prefactor, slater_rhs, v_solution, watson_rhs, CoefficientIndex,
    ConnectionCoefficientSpec, SlaterParams,
};
pub use error::{Error, Result};
pub use qcore::scalar::{Dd, QReal};
pub use qcore::{
    phi_series, psi_series, qpochhammer, qpochhammer_inf, qpochhammer_multi, theta, QContext,
    SeriesKind, SeriesSpec, TruncatedValue,
};
pub use resummation::{
    borel_image_2psi2, psi1_coefficients, q_borel_plus, q_laplace_plus, resum_2psi1,
    roundtrip_check, BilateralCoefficients, EntireFunction, Psi1Params, SpiralSpec,
    DEFAULT_WINDOW,
};
pub use verify::{
    default_config, equation_2psi1, equation_heine, parse_report, qde_residual, run_sweep,
    write_report, Identity, QDifferenceEquation, QdeResidual, RecordStatus, ReportFormat,
    SweepConfig, SweepRecord, SweepReport, SweepSummary,
};
