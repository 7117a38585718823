//! Sweep reports: per-point records, summary counts, and serialization
//! that is byte-stable across runs.
//!
//! The json emitter is hand-rolled so the byte layout is under our
//! control: fields appear in a fixed order and every float is written
//! with 17 significant digits, which round-trips f64 exactly. Parsing
//! goes through [`serde_json`], so round-tripping a report through
//! [`write_report`] and [`parse_report`] reproduces it field for field.
//! Wall time is the one lossy field: it is a measurement of the host,
//! not of the sweep, so it is excluded from serialization and from
//! report equality.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

/// Outcome of one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordStatus {
    /// Residual within tolerance and every series converged.
    Pass,
    /// Residual above tolerance, or a truncation cap was hit.
    Fail,
    /// A precondition failed (annulus, lattice, theta zero); the point
    /// carries no verdict about the identity.
    Skip,
}

impl RecordStatus {
    /// Lowercase name used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Pass => "pass",
            RecordStatus::Fail => "fail",
            RecordStatus::Skip => "skip",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "pass" => Ok(RecordStatus::Pass),
            "fail" => Ok(RecordStatus::Fail),
            "skip" => Ok(RecordStatus::Skip),
            other => Err(Error::ConfigError {
                reason: format!("unknown record status \"{other}\""),
            }),
        }
    }
}

/// One evaluated grid point.
///
/// `lhs` and `rhs` are the two compared values as (re, im) pairs where
/// the identity produces a pair; residual-style identities (q-difference
/// residuals, roundtrips) leave them empty. `inputs` holds the point's
/// parameters, already formatted, in a fixed order; randomized points
/// additionally record the drawn value.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub index: usize,
    pub inputs: Vec<(String, String)>,
    pub lhs: Option<(f64, f64)>,
    pub rhs: Option<(f64, f64)>,
    pub abs_residual: Option<f64>,
    pub rel_residual: Option<f64>,
    pub terms_pos: usize,
    pub terms_neg: usize,
    pub converged: bool,
    pub status: RecordStatus,
    /// Why the point skipped or failed; empty on a pass.
    pub reason: String,
}

/// Aggregate counts over a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSummary {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
    /// Largest relative residual over evaluated (non-skip) points; 0 when
    /// every point skipped.
    pub max_rel_residual: f64,
}

/// Result of sweeping one identity over a parameter grid.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub identity: String,
    pub tolerance: f64,
    pub seed: u64,
    pub records: Vec<SweepRecord>,
    pub summary: SweepSummary,
    /// Wall-clock duration of the sweep; not serialized.
    pub wall_time_ms: u128,
}

impl PartialEq for SweepReport {
    fn eq(&self, other: &Self) -> bool {
        self.identity == other.identity
            && self.tolerance == other.tolerance
            && self.seed == other.seed
            && self.records == other.records
            && self.summary == other.summary
    }
}

/// On-disk format of a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Writes `report` to `path` in the requested format.
pub fn write_report(report: &SweepReport, format: ReportFormat, path: &Path) -> Result<()> {
    let body = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
    };
    fs::write(path, body)?;
    Ok(())
}

/// 17 significant digits: one before the point, sixteen after.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_f64(v),
        None => "null".to_string(),
    }
}

fn fmt_opt_pair(v: Option<(f64, f64)>) -> String {
    match v {
        Some((re, im)) => format!("[{}, {}]", fmt_f64(re), fmt_f64(im)),
        None => "null".to_string(),
    }
}

fn escape_json(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

impl SweepReport {
    /// Canonical json serialization: fixed field order, floats at 17
    /// significant digits, one record per line. Identical reports
    /// produce identical bytes.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"identity\": \"{}\",\n", escape_json(&self.identity)));
        out.push_str(&format!("  \"tolerance\": {},\n", fmt_f64(self.tolerance)));
        out.push_str(&format!("  \"seed\": {},\n", self.seed));
        out.push_str("  \"records\": [");
        for (i, rec) in self.records.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("\n    ");
            out.push_str(&rec.to_json_line());
        }
        if !self.records.is_empty() {
            out.push_str("\n  ");
        }
        out.push_str("],\n");
        let s = &self.summary;
        out.push_str(&format!(
            "  \"summary\": {{\"pass\": {}, \"fail\": {}, \"skip\": {}, \"max_rel_residual\": {}}}\n",
            s.pass,
            s.fail,
            s.skip,
            fmt_f64(s.max_rel_residual)
        ));
        out.push_str("}\n");
        out
    }

    /// Flat csv with a fixed header; inputs are packed into one quoted
    /// column as `name=value` pairs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "index,status,converged,terms_pos,terms_neg,abs_residual,rel_residual,reason,inputs\n",
        );
        for rec in &self.records {
            let inputs = rec
                .inputs
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join("; ");
            let fields = [
                rec.index.to_string(),
                rec.status.as_str().to_string(),
                rec.converged.to_string(),
                rec.terms_pos.to_string(),
                rec.terms_neg.to_string(),
                rec.abs_residual.map(fmt_f64).unwrap_or_default(),
                rec.rel_residual.map(fmt_f64).unwrap_or_default(),
                csv_field(&rec.reason),
                csv_field(&inputs),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl SweepRecord {
    fn to_json_line(&self) -> String {
        let inputs = self
            .inputs
            .iter()
            .map(|(k, v)| format!("\"{}\": \"{}\"", escape_json(k), escape_json(v)))
            .collect::<Vec<_>>()
            .join(", ");
        format!(
            "{{\"index\": {}, \"inputs\": {{{}}}, \"lhs\": {}, \"rhs\": {}, \
             \"abs_residual\": {}, \"rel_residual\": {}, \"terms_pos\": {}, \
             \"terms_neg\": {}, \"converged\": {}, \"status\": \"{}\", \"reason\": \"{}\"}}",
            self.index,
            inputs,
            fmt_opt_pair(self.lhs),
            fmt_opt_pair(self.rhs),
            fmt_opt_f64(self.abs_residual),
            fmt_opt_f64(self.rel_residual),
            self.terms_pos,
            self.terms_neg,
            self.converged,
            self.status.as_str(),
            escape_json(&self.reason)
        )
    }
}

fn bad(reason: impl Into<String>) -> Error {
    Error::ConfigError { reason: reason.into() }
}

fn get<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| bad(format!("report is missing \"{key}\"")))
}

fn as_f64(v: &Value, key: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(format!("report field \"{key}\" is not a number")))
}

fn as_usize(v: &Value, key: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| bad(format!("report field \"{key}\" is not a nonnegative integer")))
}

fn opt_f64(v: &Value, key: &str) -> Result<Option<f64>> {
    if v.is_null() {
        Ok(None)
    } else {
        as_f64(v, key).map(Some)
    }
}

fn opt_pair(v: &Value, key: &str) -> Result<Option<(f64, f64)>> {
    if v.is_null() {
        return Ok(None);
    }
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| bad(format!("report field \"{key}\" is not a [re, im] pair")))?;
    Ok(Some((as_f64(&arr[0], key)?, as_f64(&arr[1], key)?)))
}

/// Parses a json report produced by [`SweepReport::to_json`]. The parsed
/// report compares equal to the original (wall time is not serialized
/// and does not participate in equality).
pub fn parse_report(text: &str) -> Result<SweepReport> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| bad(format!("report is not valid json: {e}")))?;
    let obj = root.as_object().ok_or_else(|| bad("report root is not an object"))?;

    let identity = get(obj, "identity")?
        .as_str()
        .ok_or_else(|| bad("report field \"identity\" is not a string"))?
        .to_string();
    let tolerance = as_f64(get(obj, "tolerance")?, "tolerance")?;
    let seed = get(obj, "seed")?
        .as_u64()
        .ok_or_else(|| bad("report field \"seed\" is not a nonnegative integer"))?;

    let raw_records = get(obj, "records")?
        .as_array()
        .ok_or_else(|| bad("report field \"records\" is not an array"))?;
    let mut records = Vec::with_capacity(raw_records.len());
    for raw in raw_records {
        let rec = raw.as_object().ok_or_else(|| bad("record is not an object"))?;
        let raw_inputs = get(rec, "inputs")?
            .as_object()
            .ok_or_else(|| bad("record field \"inputs\" is not an object"))?;
        let mut inputs = Vec::with_capacity(raw_inputs.len());
        for (k, v) in raw_inputs {
            let v = v
                .as_str()
                .ok_or_else(|| bad(format!("record input \"{k}\" is not a string")))?;
            inputs.push((k.clone(), v.to_string()));
        }
        records.push(SweepRecord {
            index: as_usize(get(rec, "index")?, "index")?,
            inputs,
            lhs: opt_pair(get(rec, "lhs")?, "lhs")?,
            rhs: opt_pair(get(rec, "rhs")?, "rhs")?,
            abs_residual: opt_f64(get(rec, "abs_residual")?, "abs_residual")?,
            rel_residual: opt_f64(get(rec, "rel_residual")?, "rel_residual")?,
            terms_pos: as_usize(get(rec, "terms_pos")?, "terms_pos")?,
            terms_neg: as_usize(get(rec, "terms_neg")?, "terms_neg")?,
            converged: get(rec, "converged")?
                .as_bool()
                .ok_or_else(|| bad("record field \"converged\" is not a bool"))?,
            status: RecordStatus::parse(
                get(rec, "status")?
                    .as_str()
                    .ok_or_else(|| bad("record field \"status\" is not a string"))?,
            )?,
            reason: get(rec, "reason")?
                .as_str()
                .ok_or_else(|| bad("record field \"reason\" is not a string"))?
                .to_string(),
        });
    }

    let raw_summary = get(obj, "summary")?
        .as_object()
        .ok_or_else(|| bad("report field \"summary\" is not an object"))?;
    let summary = SweepSummary {
        pass: as_usize(get(raw_summary, "pass")?, "pass")?,
        fail: as_usize(get(raw_summary, "fail")?, "fail")?,
        skip: as_usize(get(raw_summary, "skip")?, "skip")?,
        max_rel_residual: as_f64(get(raw_summary, "max_rel_residual")?, "max_rel_residual")?,
    };

    Ok(SweepReport { identity, tolerance, seed, records, summary, wall_time_ms: 0 })
}
