//! Randomized property tests for the core evaluators: Pochhammer algebra,
//! theta functional equations, and series drivers against naive summation.
//!
//! Strategies draw q from [0.1, 0.6] and parameters from moderate annuli,
//! then discard draws the library itself rejects (resonances, lattice
//! collisions) or that land too close to a vanishing factor for the
//! identity to be testable at full precision.

use num_complex::Complex;
use proptest::prelude::*;
use qseries::{
    phi_series, psi_series, qpochhammer, qpochhammer_multi, theta, Dd, QContext, QReal,
    SeriesSpec,
};

type C = Complex<f64>;

fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

fn ctx(q: f64) -> QContext<f64> {
    QContext::new(c(q, 0.0)).unwrap()
}

fn rel(lhs: C, rhs: C) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300)
}

/// A complex draw from the annulus lo <= |z| <= hi.
fn annulus(lo: f64, hi: f64) -> impl Strategy<Value = C> {
    ((lo.ln())..(hi.ln()), 0.0..std::f64::consts::TAU)
        .prop_map(|(log_mag, angle)| Complex::from_polar(log_mag.exp(), angle))
}

/// Smallest |1 - z q^j| over j in [0, count); the composition identity
/// regroups exactly these factors, so its attainable accuracy is limited
/// by how close any of them comes to zero.
fn min_factor(z: C, q: f64, count: i64) -> f64 {
    let mut min = f64::INFINITY;
    let mut p = z;
    for _ in 0..count {
        min = min.min((c(1.0, 0.0) - p).norm());
        p *= q;
    }
    min
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    // qpochhammer(a, m+n) = qpochhammer(a, m) * qpochhammer(a q^m, n): the
    // two sides multiply the same factors in different groupings, so they
    // agree to a few rounding units once every factor is kept away from
    // zero. The tolerance is ten truncation targets of the context.
    #[test]
    fn pochhammer_composition_regroups_exactly(
        q in 0.1f64..0.6,
        a in annulus(0.2, 2.5),
        m in -5i64..=5,
        n in -5i64..=5,
    ) {
        let qc = ctx(q);
        let shifted = a * c(q, 0.0).powi(m as i32);
        let lo = m.min(n.min(0) + m.min(0)).min(0) - 1;
        let hi = (m.max(0) + n.max(0)).max(m) + 1;
        prop_assume!(min_factor(a * q.powi(lo as i32), q, hi - lo) > 0.1);

        let whole = qpochhammer(a, &qc, m + n);
        let left = qpochhammer(a, &qc, m);
        let right = qpochhammer(shifted, &qc, n);
        let (Ok(whole), Ok(left), Ok(right)) = (whole, left, right) else {
            prop_assume!(false);
            unreachable!();
        };
        prop_assert!(
            rel(whole, left * right) <= 10.0 * qc.eps,
            "m = {m}, n = {n}: {whole} vs {}",
            left * right
        );
    }

    // theta(x) = (q, -x, -q/x; q)_inf.
    #[test]
    fn triple_product_holds_at_random_points(
        q in 0.1f64..0.6,
        x in annulus(0.3, 3.0),
    ) {
        let qc = ctx(q);
        let sum = theta(x, &qc).unwrap().value;
        prop_assume!(sum.norm() > 1e-6 * (1.0 + x.norm()));
        let product = qpochhammer_multi(&[c(q, 0.0), -x, -c(q, 0.0) / x], &qc)
            .unwrap()
            .value;
        prop_assert!(rel(sum, product) <= 1e-12, "{sum} vs {product}");
    }

    // theta(q^k x) = q^(-k(k-1)/2) x^(-k) theta(x) for k in -3..3.
    #[test]
    fn theta_shift_holds_at_random_points(
        q in 0.1f64..0.6,
        x in annulus(0.3, 3.0),
        k in -3i32..=3,
    ) {
        let qc = ctx(q);
        let base = theta(x, &qc).unwrap().value;
        prop_assume!(base.norm() > 1e-6 * (1.0 + x.norm()));
        let shifted = theta(x * c(q, 0.0).powi(k), &qc).unwrap().value;
        let predicted = c(q, 0.0).powi(-k * (k - 1) / 2) * x.powi(-k) * base;
        prop_assert!(rel(shifted, predicted) <= 1e-12, "k = {k}: {shifted} vs {predicted}");
    }

    // theta(1/x) = theta(x) / x.
    #[test]
    fn theta_inversion_holds_at_random_points(
        q in 0.1f64..0.6,
        x in annulus(0.3, 3.0),
    ) {
        let qc = ctx(q);
        let base = theta(x, &qc).unwrap().value;
        prop_assume!(base.norm() > 1e-6 * (1.0 + x.norm()));
        let inverted = theta(1.0 / x, &qc).unwrap().value;
        prop_assert!(rel(inverted, base / x) <= 1e-12, "{inverted} vs {}", base / x);
    }

    // u(x) = theta(-lambda x) / theta(lambda x) flips sign under x -> qx.
    #[test]
    fn sign_quasiperiod_holds_for_random_spirals(
        q in 0.1f64..0.6,
        lambda in annulus(0.5, 2.0),
        x in annulus(0.3, 3.0),
    ) {
        let qc = ctx(q);
        let quotient = |y: C| -> Option<C> {
            let num = theta(-lambda * y, &qc).unwrap().value;
            let den = theta(lambda * y, &qc).unwrap().value;
            let floor = 1e-5 * (1.0 + (lambda * y).norm());
            (num.norm() > floor && den.norm() > floor).then(|| num / den)
        };
        let (Some(u), Some(u_shifted)) = (quotient(x), quotient(x * q)) else {
            prop_assume!(false);
            unreachable!();
        };
        prop_assert!(rel(u_shifted, -u) <= 1e-11, "{u_shifted} vs {}", -u);
    }

    // The unilateral driver against a from-scratch partial sum built on the
    // public Pochhammer evaluator.
    #[test]
    fn phi_driver_matches_naive_summation(
        q in 0.1f64..0.6,
        a in annulus(0.2, 2.5),
        b in annulus(0.2, 2.5),
        denom in annulus(0.2, 0.9),
        x in annulus(0.05, 0.6),
    ) {
        let qc = ctx(q);
        let spec = SeriesSpec::phi(vec![a, b], vec![denom]);
        let Ok(driver) = phi_series(&spec, &qc, x) else {
            prop_assume!(false);
            unreachable!();
        };
        let mut naive = c(0.0, 0.0);
        for n in 0i64..150 {
            let top = qpochhammer(a, &qc, n).unwrap() * qpochhammer(b, &qc, n).unwrap();
            let bottom =
                qpochhammer(denom, &qc, n).unwrap() * qpochhammer(c(q, 0.0), &qc, n).unwrap();
            naive += top / bottom * x.powi(n as i32);
        }
        prop_assert!(rel(driver.value, naive) <= 1e-12, "{} vs {naive}", driver.value);
    }

    // The bilateral driver for 1psi1 against a two-sided naive sum. The
    // descending side keeps the (b;q)/(a;q) factors as a running ratio in
    // the rearranged form (q^m - b)/(q^m - a): the symbols themselves leave
    // f64 range near m = 40 even though the terms decay geometrically.
    #[test]
    fn psi_driver_matches_naive_summation(
        q in 0.1f64..0.6,
        a in annulus(0.7, 2.0),
        b in annulus(0.1, 0.35),
        x in annulus(0.55, 0.85),
    ) {
        let qc = ctx(q);
        prop_assume!((b / a).norm() < 0.4);
        let spec = SeriesSpec::psi(vec![a], vec![b]);
        let Ok(driver) = psi_series(&spec, &qc, x) else {
            prop_assume!(false);
            unreachable!();
        };
        let mut naive = c(0.0, 0.0);
        let mut scale = 0.0f64;
        for n in 0i64..=300 {
            let term = qpochhammer(a, &qc, n).unwrap() / qpochhammer(b, &qc, n).unwrap()
                * x.powi(n as i32);
            scale = scale.max(term.norm());
            naive += term;
        }
        let mut ratio = c(1.0, 0.0);
        let mut qpow = c(1.0, 0.0);
        for m in 1i32..=200 {
            qpow *= q;
            ratio *= (qpow - b) / (qpow - a);
            let term = ratio * x.powi(-m);
            scale = scale.max(term.norm());
            naive += term;
        }
        // Normalized by the largest term, exactly like the driver's own
        // stopping rule: near a zero of the sum the cancelled digits are
        // not recoverable by either side.
        let err = (driver.value - naive).norm() / scale.max(1.0);
        prop_assert!(err <= 1e-12, "{} vs {naive} (err {err:.3e})", driver.value);
    }

    // The double-double path follows the f64 path to better than f64
    // accuracy, so disagreement beyond rounding scale means one of the
    // two scalar implementations is wrong.
    #[test]
    fn theta_agrees_across_precisions(
        q in 0.1f64..0.6,
        x in annulus(0.3, 3.0),
    ) {
        let qc = ctx(q);
        let double = theta(x, &qc).unwrap().value;
        prop_assume!(double.norm() > 1e-6 * (1.0 + x.norm()));
        let wide_ctx = QContext::new(Complex::new(Dd::from_f64(q), Dd::from_f64(0.0))).unwrap();
        let wide = theta(
            Complex::new(Dd::from_f64(x.re), Dd::from_f64(x.im)),
            &wide_ctx,
        )
        .unwrap()
        .value;
        let wide_as_f64 = c(wide.re.to_f64(), wide.im.to_f64());
        prop_assert!(rel(double, wide_as_f64) <= 1e-12, "{double} vs {wide_as_f64}");
    }
}
