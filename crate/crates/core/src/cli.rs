//! Command bodies behind the `dirrep` binary: feature-table ingestion, report
//! rows, and CSV/JSON rendering.
//!
//! Exit codes: 0 on success, 1 for runtime and I/O failures (including
//! malformed input rows), 2 for usage errors.

use std::collections::HashSet;
use std::io::{self, Read, Write};
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::directional::{adaptive_r, directional_test, ReplicabilityQuery, Rule};
use crate::error::Error;
use crate::error_analysis::{figure1_curve, gg_curve, mc_type1, mc_type3, ThetaPoint};
use crate::numerics::{norm_isf, ExtendedReal};
use crate::partial_conjunction::{CombinerKind, StudyVector};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

/// Library errors raised while validating flag values are usage errors.
fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationMode {
    Type1,
    Type3,
}

impl SimulationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimulationMode::Type1 => "type1",
            SimulationMode::Type3 => "type3",
        }
    }
}

impl FromStr for SimulationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "type1" => Ok(SimulationMode::Type1),
            "type3" => Ok(SimulationMode::Type3),
            other => Err(format!("unknown mode '{other}' (expected type1 or type3)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Feature {
    pub id: String,
    pub z: StudyVector,
}

/// Rows of `feature_id,z1,…,zn`, all with the same `n`.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub n: usize,
    pub features: Vec<Feature>,
}

impl FeatureTable {
    /// Parse the CSV feature table. With `pvalues` set the value columns hold
    /// right-sided p-values, converted to z-scores by `z = Φ⁻¹(1 − p)`.
    pub fn read_csv<R: Read>(reader: R, pvalues: bool) -> Result<FeatureTable, CliError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| CliError::Runtime(format!("cannot read header: {e}")))?
            .clone();
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Ok(FeatureTable {
                n: 0,
                features: Vec::new(),
            });
        }
        if headers[0].trim() != "feature_id" {
            return Err(CliError::Runtime(format!(
                "line 1: first column must be 'feature_id', found '{}'",
                &headers[0]
            )));
        }
        let n = headers.len() - 1;
        let mut seen = HashSet::new();
        let mut features = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| CliError::Runtime(format!("malformed csv: {e}")))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != n + 1 {
                return Err(CliError::Runtime(format!(
                    "line {line}: expected {} fields, found {}",
                    n + 1,
                    record.len()
                )));
            }
            let id = record[0].trim().to_string();
            if !seen.insert(id.clone()) {
                return Err(CliError::Runtime(format!("line {line}: duplicate feature_id '{id}'")));
            }
            let mut z = Vec::with_capacity(n);
            for (col, field) in record.iter().enumerate().skip(1) {
                let value: f64 = field.trim().parse().map_err(|_| {
                    CliError::Runtime(format!(
                        "line {line}, column {}: cannot parse '{field}' as a number",
                        col + 1
                    ))
                })?;
                let zi = if pvalues {
                    norm_isf(value).map_err(|_| {
                        CliError::Runtime(format!(
                            "line {line}, column {}: p-value {value} must lie strictly inside (0, 1)",
                            col + 1
                        ))
                    })?
                } else {
                    value
                };
                if !zi.is_finite() {
                    return Err(CliError::Runtime(format!(
                        "line {line}, column {}: value '{field}' is not finite",
                        col + 1
                    )));
                }
                z.push(zi);
            }
            let z = StudyVector::new(z).map_err(|e| CliError::Runtime(format!("line {line}: {e}")))?;
            features.push(Feature { id, z });
        }
        Ok(FeatureTable { n, features })
    }

    /// Check a `--n` flag against the table width.
    pub fn check_n(&self, n: Option<usize>) -> Result<(), CliError> {
        match n {
            Some(n) if self.n != 0 && n != self.n => Err(CliError::Usage(format!(
                "--n {n} does not match the {} study columns in the input",
                self.n
            ))),
            _ => Ok(()),
        }
    }
}

/// Parse a theta specification such as `inf*9,-inf*9,0*2` or `1.5,0,-2`.
pub fn parse_theta_spec(spec: &str) -> Result<ThetaPoint, CliError> {
    let mut theta = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        let (value, count) = match token.split_once('*') {
            Some((v, k)) => {
                let k: usize = k.trim().parse().map_err(|_| {
                    CliError::Usage(format!("theta token '{token}': bad repeat count"))
                })?;
                if k == 0 {
                    return Err(CliError::Usage(format!("theta token '{token}': repeat count is zero")));
                }
                (v.trim(), k)
            }
            None => (token, 1),
        };
        let x: f64 = value
            .parse()
            .map_err(|_| CliError::Usage(format!("theta token '{token}' is not a number")))?;
        if x.is_nan() {
            return Err(CliError::Usage(format!("theta token '{token}' is NaN")));
        }
        theta.extend(std::iter::repeat_n(ExtendedReal::from(x), count));
    }
    ThetaPoint::new(theta).map_err(usage)
}

/// Format with 8 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        format!("{x:.7e}")
    } else {
        format!("{:.*}", (7 - exp).max(0) as usize, x)
    }
}

/// The value a reader recovers from [`fmt_sig`]; JSON output carries the
/// same rounded numbers as CSV output.
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
    Bool(bool),
    /// Structured value: nested JSON, flattened text for CSV.
    Nested { json: Value, text: String },
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_sig(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Nested { text, .. } => text.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(i) => json!(i),
            Cell::Num(x) => json!(round_sig(*x)),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Nested { json, .. } => json.clone(),
        }
    }
}

/// A rectangular report: one header list, rows of cells in header order.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn write<W: Write>(&self, format: OutputFormat, out: W) -> Result<(), CliError> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let runtime = |e: csv::Error| CliError::Runtime(format!("cannot write csv: {e}"));
        w.write_record(&self.headers).map_err(runtime)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(runtime)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .headers
                    .iter()
                    .zip(row)
                    .map(|(h, c)| (h.to_string(), c.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &rows)
            .map_err(|e| CliError::Runtime(format!("cannot write json: {e}")))?;
        writeln!(out)?;
        Ok(())
    }
}

/// Query flags shared by the batch commands.
#[derive(Debug, Clone, Copy)]
pub struct QueryParams {
    pub r: usize,
    pub alpha: f64,
    pub combiner: CombinerKind,
    pub rule: Rule,
}

pub const TEST_HEADERS: [&str; 10] = [
    "feature_id",
    "n",
    "r",
    "p_plus",
    "p_minus",
    "p_final",
    "rule_applied",
    "reject",
    "sign",
    "warning",
];

/// One directional test per feature.
pub fn cmd_test(table: &FeatureTable, params: QueryParams) -> Result<Report, CliError> {
    let mut report = Report {
        headers: TEST_HEADERS.to_vec(),
        rows: Vec::new(),
    };
    if table.features.is_empty() {
        crate::directional::check_alpha(params.alpha).map_err(usage)?;
        return Ok(report);
    }
    let q = ReplicabilityQuery::new(table.n, params.r, params.alpha, params.combiner, params.rule)
        .map_err(usage)?;
    for f in &table.features {
        let res = directional_test(&f.z, &q).map_err(|e| CliError::Runtime(format!("{}: {e}", f.id)))?;
        report.rows.push(vec![
            Cell::Text(f.id.clone()),
            Cell::Int(q.n() as u64),
            Cell::Int(q.r() as u64),
            Cell::Num(res.p_plus),
            Cell::Num(res.p_minus),
            Cell::Num(res.p_final),
            Cell::Text(res.rule_applied.to_string()),
            Cell::Bool(res.reject),
            Cell::Text(res.sign.to_string()),
            Cell::Text(if res.unproven_validity { "unproven_validity" } else { "" }.to_string()),
        ]);
    }
    Ok(report)
}

pub const ADAPTIVE_HEADERS: [&str; 5] = ["feature_id", "n", "k", "l", "steps"];

/// Sequential choice of `r` per feature. The `steps` column lists tested
/// hypotheses as `r:p_final:reject` separated by `;`.
pub fn cmd_adaptive(table: &FeatureTable, alpha: f64, combiner: CombinerKind) -> Result<Report, CliError> {
    crate::directional::check_alpha(alpha).map_err(usage)?;
    let mut report = Report {
        headers: ADAPTIVE_HEADERS.to_vec(),
        rows: Vec::new(),
    };
    for f in &table.features {
        let res = adaptive_r(&f.z, alpha, combiner).map_err(usage)?;
        let text = res
            .steps
            .iter()
            .map(|s| format!("{}:{}:{}", s.r, fmt_sig(s.p_final), s.reject))
            .collect::<Vec<_>>()
            .join(";");
        let steps = res
            .steps
            .iter()
            .map(|s| json!({"r": s.r, "p_final": round_sig(s.p_final), "reject": s.reject}))
            .collect();
        report.rows.push(vec![
            Cell::Text(f.id.clone()),
            Cell::Int(res.n as u64),
            Cell::Int(res.k as u64),
            Cell::Int(res.l as u64),
            Cell::Nested {
                json: Value::Array(steps),
                text,
            },
        ]);
    }
    Ok(report)
}

pub const CURVE_HEADERS: [&str; 5] = ["r", "c_concordant", "c_discordant", "alpha", "two_alpha"];

pub fn cmd_type1_curve(n: usize, alpha: f64) -> Result<Report, CliError> {
    let curve = figure1_curve(n, alpha).map_err(usage)?;
    let rows = curve
        .rows
        .iter()
        .map(|row| {
            vec![
                Cell::Int(row.r as u64),
                Cell::Num(row.c_concordant),
                Cell::Num(row.c_discordant),
                Cell::Num(alpha),
                Cell::Num(2.0 * alpha),
            ]
        })
        .collect();
    Ok(Report {
        headers: CURVE_HEADERS.to_vec(),
        rows,
    })
}

/// `0, step, 2·step, …` up to `max`; a last point within 1e-6 of `max` is
/// snapped onto it.
pub fn grid_points(max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite()) || !(max >= 0.0 && max.is_finite()) {
        return Err(CliError::Usage(format!(
            "grid needs a positive step and a non-negative maximum, got step {step}, max {max}"
        )));
    }
    let count = (max / step + 1e-9).floor();
    if count > 1e7 {
        return Err(CliError::Usage(format!("grid of {count} points is too large")));
    }
    let count = count as usize;
    let mut grid: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
    if let Some(last) = grid.last_mut() {
        if (*last - max).abs() <= 1e-6 * max.max(1.0) {
            *last = max;
        }
    }
    Ok(grid)
}

pub const GG_HEADERS: [&str; 2] = ["theta1", "gg"];

pub fn cmd_gg_curve(alpha: f64, grid_max: f64, grid_step: f64) -> Result<Report, CliError> {
    let grid = grid_points(grid_max, grid_step)?;
    let curve = gg_curve(&grid, alpha).map_err(usage)?;
    Ok(Report {
        headers: GG_HEADERS.to_vec(),
        rows: curve
            .into_iter()
            .map(|(x, y)| vec![Cell::Num(x), Cell::Num(y)])
            .collect(),
    })
}

pub const SIMULATE_HEADERS: [&str; 10] = [
    "mode", "n", "r", "alpha", "combiner", "rule", "estimate", "std_error", "reps", "seed",
];

pub fn cmd_simulate(
    theta: &ThetaPoint,
    n: Option<usize>,
    params: QueryParams,
    reps: u64,
    seed: u64,
    mode: SimulationMode,
) -> Result<Report, CliError> {
    if let Some(n) = n {
        if n != theta.n() {
            return Err(CliError::Usage(format!(
                "--n {n} does not match the {} theta entries",
                theta.n()
            )));
        }
    }
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let q = ReplicabilityQuery::new(theta.n(), params.r, params.alpha, params.combiner, params.rule)
        .map_err(usage)?;
    let est = match mode {
        SimulationMode::Type1 => mc_type1(theta, &q, reps, seed),
        SimulationMode::Type3 => mc_type3(theta, &q, reps, seed),
    }
    .map_err(usage)?;
    Ok(Report {
        headers: SIMULATE_HEADERS.to_vec(),
        rows: vec![vec![
            Cell::Text(mode.as_str().to_string()),
            Cell::Int(q.n() as u64),
            Cell::Int(q.r() as u64),
            Cell::Num(q.alpha()),
            Cell::Text(q.combiner().to_string()),
            Cell::Text(q.rule().to_string()),
            Cell::Num(est.estimate),
            Cell::Num(est.std_error),
            Cell::Int(est.reps),
            Cell::Int(est.seed),
        ]],
    })
}
