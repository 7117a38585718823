//! Built-in parameter grids, one per identity. These are the grids
//! behind `verify-all`: every point is chosen to satisfy its identity's
//! preconditions (annuli, resonance lattices, theta zero sets), so a
//! healthy library passes every point rather than skipping through.

use serde_json::{json, Map, Value};

use super::{Identity, SweepConfig};

fn polar(r: f64, theta: f64) -> Value {
    json!([r * theta.cos(), r * theta.sin()])
}

fn points(raw: Vec<Value>) -> Vec<Map<String, Value>> {
    raw.into_iter()
        .map(|v| v.as_object().expect("grid points are objects").clone())
        .collect()
}

const PI: f64 = std::f64::consts::PI;

/// The default grid and tolerance for one identity. Deterministic: the
/// same identity always produces the same config (seed included), so
/// reports built from these configs are reproducible byte for byte.
pub fn default_config(identity: Identity) -> SweepConfig {
    let (tolerance, grid) = match identity {
        Identity::TripleProduct => (1e-12, triple_product_grid()),
        Identity::ThetaShift => (1e-12, theta_shift_grid()),
        Identity::ThetaInversion => (1e-12, theta_inversion_grid()),
        Identity::SignQuasiperiod => (1e-12, sign_quasiperiod_grid()),
        Identity::Ramanujan => (1e-10, ramanujan_grid()),
        Identity::Watson => (1e-9, watson_grid()),
        Identity::SlaterR => (1e-9, slater_grid()),
        Identity::Corollary => (1e-10, corollary_grid()),
        Identity::MainTheorem => (1e-8, main_theorem_grid()),
        Identity::Ellipticity => (1e-10, ellipticity_grid()),
        Identity::QdeResidual => (1e-9, qde_grid()),
        Identity::Roundtrip => (1e-10, roundtrip_grid()),
    };
    SweepConfig { identity, parameter_grid: points(grid), tolerance, seed: 7 }
}

/// Twelve points per q on a log spiral: radii 0.3 to about 8, angles
/// stepping around the circle and avoiding the negative-real zero set.
fn triple_product_grid() -> Vec<Value> {
    let mut grid = Vec::new();
    for q in [0.1, 0.3, 0.5] {
        for j in 0..12 {
            let r = 0.3 * 1.35f64.powi(j);
            let theta = 0.26 + 2.0 * PI * f64::from(j) / 12.0;
            grid.push(json!({"q": q, "x": polar(r, theta)}));
        }
    }
    grid
}

fn theta_shift_grid() -> Vec<Value> {
    let mut grid = Vec::new();
    for (q, x) in [(0.3, polar(0.8, 0.7)), (0.5, polar(2.2, 2.3)), (0.45, polar(0.6, 5.1))] {
        for k in -3i64..=3 {
            grid.push(json!({"q": q, "x": x, "k": k}));
        }
    }
    grid
}

fn theta_inversion_grid() -> Vec<Value> {
    let xs = [
        polar(0.45, 0.8),
        polar(1.0, 2.1),
        polar(2.6, 3.9),
        polar(0.7, 5.6),
        json!([-0.55, 0.15]),
        json!([1.8, -0.6]),
    ];
    let mut grid = Vec::new();
    for q in [0.3, 0.5] {
        for x in &xs {
            grid.push(json!({"q": q, "x": x}));
        }
    }
    grid
}

fn sign_quasiperiod_grid() -> Vec<Value> {
    let xs = [polar(1.3, 0.9), polar(0.7, 2.2), polar(2.1, 4.0), polar(0.45, 1.6)];
    let mut grid = Vec::new();
    for q in [0.3, 0.5] {
        for x in &xs {
            grid.push(json!({"q": q, "x": x}));
        }
    }
    grid
}

/// Eleven tuples across three (a, b) families, every z inside the
/// annulus |b/a| < |z| < 1.
fn ramanujan_grid() -> Vec<Value> {
    let mut grid = Vec::new();
    for z in [json!(0.45), json!(0.55), json!(0.65), json!([0.5, 0.3]), polar(0.7, 2.0)] {
        grid.push(json!({"q": 0.3, "a": 0.5, "b": 0.2, "z": z}));
    }
    for z in [json!(0.4), json!([0.3, 0.3]), polar(0.8, 1.2)] {
        grid.push(json!({"q": 0.3, "a": 1.3, "b": 0.35, "z": z}));
    }
    for z in [json!(0.5), polar(0.45, 2.6), json!([0.6, 0.25])] {
        grid.push(json!({"q": 0.45, "a": [0.8, 0.2], "b": 0.25, "z": z}));
    }
    grid
}

/// The overlap domain: |x| < 1 for the series, |c q / (a b x)| < 1 for
/// the expansion around infinity.
fn watson_grid() -> Vec<Value> {
    let mut grid = Vec::new();
    for x in [json!(0.55), json!(0.6), json!([0.7, 0.2]), json!([0.45, -0.15])] {
        grid.push(json!({"q": 0.5, "a": 5.0, "b": 4.0, "c": 0.3, "x": x}));
    }
    grid.push(json!({"q": 0.4, "a": 3.7, "b": 2.3, "c": 0.25, "x": 0.62}));
    grid
}

/// Five tuples per order r = 1, 2, 3, each x inside that family's
/// annulus prod |b| / prod |a| < |x| < 1.
fn slater_grid() -> Vec<Value> {
    let mut grid = Vec::new();
    for x in [json!(0.45), json!(0.55), json!(0.65), json!([0.5, 0.2])] {
        grid.push(json!({"q": 0.3, "a": [0.5], "b": [0.2], "x": x}));
    }
    grid.push(json!({"q": 0.45, "a": [0.9], "b": [0.3], "x": 0.6}));

    for x in [json!(0.5), json!(0.6), json!(0.7762), json!([0.55, 0.3]), polar(0.8, 0.4)] {
        grid.push(json!({"q": 0.4, "a": [0.7, 0.3], "b": [0.9, 0.1], "x": x}));
    }

    for x in [json!([0.6, 0.25]), json!(0.3), polar(0.45, 1.1), polar(0.7, 2.0), json!([0.2, 0.5])]
    {
        grid.push(json!({"q": 0.35, "a": [1.6, 0.45, 0.9], "b": [0.3, 0.35, 0.55], "x": x}));
    }
    grid
}

fn corollary_grid() -> Vec<Value> {
    let mut grid = Vec::new();
    for x in [json!(0.5), json!([-0.35, 0.2]), json!([0.1, -0.6]), polar(0.3, 2.5), polar(0.75, 0.9)]
    {
        grid.push(json!({"q": 0.4, "a1": 0.7, "a2": 0.3, "b1": 0.9, "x": x}));
    }
    for x in [json!(0.45), polar(0.5, 1.8)] {
        grid.push(json!({"q": 0.3, "a1": 0.8, "a2": [0.5, 0.1], "b1": 0.2, "x": x}));
    }
    grid
}

/// Every x beyond that tuple's certified radius |b1/(a1 a2)|, with a
/// generic spiral base point; the steep tuple gets a wider window.
fn main_theorem_grid() -> Vec<Value> {
    vec![
        json!({"q": 0.4, "a1": 0.7, "a2": 0.3, "b1": 0.9,
               "lambda": polar(1.1, PI / 7.0), "x": polar(9.0, PI / 5.0)}),
        json!({"q": 0.3, "a1": 0.8, "a2": [0.5, 0.1], "b1": 0.2,
               "lambda": polar(1.1, PI / 7.0), "x": polar(2.3, PI / 5.0)}),
        json!({"q": 0.3, "a1": 0.8, "a2": 0.5, "b1": 0.2,
               "lambda": polar(1.2, PI / 3.0), "x": polar(7.0, PI / 5.0)}),
        json!({"q": 0.5, "a1": 1.6, "a2": 0.6, "b1": 0.45,
               "lambda": polar(0.9, 2.0 * PI / 7.0), "x": polar(1.4, 3.0 * PI / 7.0),
               "window": 512}),
        json!({"q": 0.35, "a1": 0.9, "a2": 0.4, "b1": 0.3,
               "lambda": polar(1.3, PI / 9.0), "x": polar(3.1, PI / 8.0)}),
        json!({"q": 0.45, "a1": 0.75, "a2": 0.35, "b1": 0.12,
               "lambda": polar(1.1, PI / 7.0), "x": polar(4.0, PI / 5.0)}),
        json!({"q": 0.3, "a1": 0.8, "a2": 0.5, "b1": 0.1,
               "lambda": polar(1.2, PI / 3.0), "x": polar(10.0, PI / 5.0)}),
        json!({"q": 0.45, "a1": 0.75, "a2": 0.35, "b1": 0.12,
               "lambda": polar(1.1, PI / 7.0), "x": polar(11.0, PI / 5.0)}),
    ]
}

fn ellipticity_grid() -> Vec<Value> {
    let mut grid = Vec::new();
    for _ in 0..4 {
        grid.push(json!({"q": 0.4, "a1": 0.7, "a2": 0.3, "b1": 0.9,
                         "lambda": polar(1.1, PI / 7.0), "x": "random"}));
    }
    grid.push(json!({"q": 0.4, "a1": 0.7, "a2": 0.3, "b1": 0.9,
                     "lambda": polar(1.1, PI / 7.0), "x": [2.0, 1.1]}));
    grid.push(json!({"q": 0.4, "a1": 0.7, "a2": 0.3, "b1": 0.9,
                     "lambda": polar(1.1, PI / 7.0), "x": [0.8, -1.3]}));
    grid
}

/// Solution branches against their equation. The bilateral tuples sit
/// far enough out that all three q-shifts of x stay in the certified
/// domain; the Heine tuples stay well inside the unit disk.
fn qde_grid() -> Vec<Value> {
    let mut grid = Vec::new();
    for u in ["v1", "v2"] {
        grid.push(json!({"q": 0.3, "a1": 0.8, "a2": 0.5, "b1": 0.1,
                         "x": polar(10.0, PI / 5.0), "u": u}));
        grid.push(json!({"q": 0.45, "a1": 0.75, "a2": 0.35, "b1": 0.12,
                         "x": polar(11.0, PI / 5.0), "u": u}));
    }
    grid.push(json!({"q": 0.4, "a": 0.5, "b": 0.3, "c": 0.7, "x": 0.25, "u": "phi21"}));
    grid.push(json!({"q": 0.5, "a": 1.6, "b": 0.45, "c": 0.2, "x": 0.3, "u": "phi21"}));
    grid
}

/// Four test functions at five points each, spiral base away from the
/// collision set of every point.
fn roundtrip_grid() -> Vec<Value> {
    let xs = [json!([0.7, 0.2]), polar(5.0, 1.1), json!(1.7), polar(0.9, 2.8), polar(3.3, 0.5)];
    let mut grid = Vec::new();
    for f in ["one", "cube", "affine", "phi01"] {
        for x in &xs {
            let mut point = json!({"q": 0.4, "lambda": polar(1.1, PI / 7.0), "x": x, "f": f});
            if f == "phi01" {
                point["c"] = json!(0.3);
            }
            grid.push(point);
        }
    }
    grid
}
