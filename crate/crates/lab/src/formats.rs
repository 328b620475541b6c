//! On-disk formats: labeled sets as CSV with a JSON sidecar, JSON records
//! for traces, estimates and reports, and CSV tables for studies.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use typnet_core::contnet::MarginReport;
use typnet_core::sampler::GncTrace;
use typnet_core::stats::Proportion;
use typnet_core::teacher::{InputDomain, LabeledSet, Points, TeacherSpec};

use crate::error::{io_err, LabError, Result};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&s)?)
}

/// A CSV table kept in memory so it can be hashed and written in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(io_err(path))
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Sidecar metadata for a labeled-set CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetMeta {
    pub domain: InputDomain,
    pub seed: Option<u64>,
    pub n: usize,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teacher: Option<TeacherSpec>,
}

/// Sidecar path for a labeled-set CSV: `data.csv` → `data.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Columns `x_1..x_d, y`.
pub fn labeled_set_table(set: &LabeledSet) -> Table {
    let mut header: Vec<String> = (1..=set.dim()).map(|j| format!("x_{j}")).collect();
    header.push("y".into());
    let mut t = Table { header, rows: Vec::with_capacity(set.len()) };
    for (x, y) in set.iter() {
        let mut row: Vec<String> = x.iter().map(|&v| fmt_f64(v)).collect();
        row.push(y.to_string());
        t.rows.push(row);
    }
    t
}

pub fn write_labeled_set(path: &Path, set: &LabeledSet, meta: &SetMeta) -> Result<()> {
    labeled_set_table(set).write(path)?;
    write_json(&sidecar_path(path), meta)
}

pub fn read_labeled_set(path: &Path) -> Result<(LabeledSet, SetMeta)> {
    let meta: SetMeta = read_json(&sidecar_path(path))?;
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let dim = header
        .len()
        .checked_sub(1)
        .filter(|&d| d > 0)
        .ok_or_else(|| LabError::Config("labeled set needs x columns and y".into()))?;
    if header.get(dim) != Some("y") || dim != meta.dim {
        return Err(LabError::Config(format!("{}: expected columns x_1..x_{}, y", path.display(), meta.dim)));
    }
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        for j in 0..dim {
            data.push(parse_f64(&rec[j])?);
        }
        labels.push(match &rec[dim] {
            "1" | "+1" => 1,
            "-1" => -1,
            other => return Err(LabError::Config(format!("label {other:?} is not +1 or -1"))),
        });
    }
    let points = Points::new(dim, data).map_err(|e| LabError::Config(e.to_string()))?;
    let set = LabeledSet::new(points, labels).map_err(|e| LabError::Config(e.to_string()))?;
    Ok((set, meta))
}

fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| LabError::Config(format!("{s:?} is not a number"))),
    }
}

/// Where a reported number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    MonteCarlo,
    Formula,
}

impl Provenance {
    pub fn label(self, n_draws: Option<u64>) -> String {
        match (self, n_draws) {
            (Provenance::Exact, _) => "exact".into(),
            (Provenance::Formula, _) => "formula".into(),
            (Provenance::MonteCarlo, Some(n)) => format!("monte-carlo(n={n})"),
            (Provenance::MonteCarlo, None) => "monte-carlo".into(),
        }
    }
}

/// `{seed, T, n_draws, estimate, ci_low, ci_high, mode}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: Option<u64>,
    pub n_draws: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mode: String,
}

impl EstimateRecord {
    /// A Guess & Check run: the estimate is the training error of the accepted draw.
    pub fn from_trace(trace: &GncTrace) -> Self {
        Self {
            seed: trace.seed,
            t: Some(trace.t),
            n_draws: trace.draws,
            estimate: trace.train_error,
            ci_low: trace.train_error,
            ci_high: trace.train_error,
            mode: if trace.threshold > 0.0 { format!("threshold({})", trace.threshold) } else { "interpolate".into() },
        }
    }

    pub fn from_proportion(seed: u64, p: &Proportion, mode: &str) -> Self {
        Self {
            seed,
            t: None,
            n_draws: p.trials,
            estimate: p.estimate,
            ci_low: p.ci_low,
            ci_high: p.ci_high,
            mode: mode.into(),
        }
    }
}

/// Columns `trial, alpha, beta, log_ratio, degenerate, beta_clamped`.
pub fn margins_table(report: &MarginReport) -> Table {
    let mut t = Table::new(&["trial", "alpha", "beta", "log_ratio", "degenerate", "beta_clamped"]);
    for m in &report.trials {
        t.push(vec![
            m.trial.to_string(),
            fmt_f64(m.alpha),
            fmt_f64(m.beta),
            m.log_ratio.map(fmt_f64).unwrap_or_default(),
            m.degenerate.to_string(),
            m.beta_clamped.to_string(),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginSummary {
    pub config: typnet_core::contnet::MarginConfig,
    pub seed: u64,
    pub trials: usize,
    pub degenerate: usize,
    pub clamped: usize,
    pub fraction_beta_gt_alpha: f64,
    pub log_ratio_quantiles: Vec<(f64, f64)>,
    pub provenance: String,
}

impl MarginSummary {
    pub fn of(report: &MarginReport) -> Self {
        let mut r = report.log_ratios();
        r.sort_by(f64::total_cmp);
        let q = |p: f64| {
            if r.is_empty() {
                f64::NAN
            } else {
                r[((r.len() - 1) as f64 * p).round() as usize]
            }
        };
        Self {
            config: report.config,
            seed: report.seed,
            trials: report.trials.len(),
            degenerate: report.degenerate,
            clamped: report.trials.iter().filter(|t| t.beta_clamped).count(),
            fraction_beta_gt_alpha: report.fraction_beta_gt_alpha,
            log_ratio_quantiles: [0.05, 0.25, 0.5, 0.75, 0.95].iter().map(|&p| (p, q(p))).collect(),
            provenance: Provenance::MonteCarlo.label(Some(report.trials.len() as u64)),
        }
    }
}
