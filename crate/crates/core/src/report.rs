//! Run reports: construction, table rendering, JSON persistence, and
//! cross-report comparison.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::histogram::Histogram;
use crate::model::{ModelError, Outcome, OutcomeSpec, OutcomeType};
use crate::runner::RunParams;

/// Current JSON schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed report: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported report schema version {found} (expected {SCHEMA_VERSION})")]
    UnknownSchema { found: u32 },
    #[error("invalid report: {0}")]
    Invalid(String),
    #[error("cannot compare reports for different tests: {0} vs {1}")]
    TestMismatch(String, String),
    #[error("cannot compare reports with outcome arity {0} and {1}")]
    ArityMismatch(usize, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Host description recorded with every run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Environment {
    pub cpu_model: Option<String>,
    pub cores: usize,
    pub os: String,
    pub arch: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub tool_version: String,
}

impl Environment {
    pub fn capture() -> Self {
        Environment {
            cpu_model: cpu_model(),
            cores: std::thread::available_parallelism().map_or(1, |n| n.get()),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

fn cpu_model() -> Option<String> {
    let info = std::fs::read_to_string("/proc/cpuinfo").ok()?;
    info.lines()
        .find(|l| {
            l.starts_with("model name") || l.starts_with("Model") || l.starts_with("Hardware")
        })
        .and_then(|l| l.split_once(':'))
        .map(|(_, v)| v.trim().to_string())
        .filter(|v| !v.is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportEntry {
    pub outcome: Outcome,
    #[serde(rename = "type")]
    pub kind: OutcomeType,
    pub count: u64,
}

impl ReportEntry {
    pub fn frequency(&self, total: u64) -> f64 {
        if total == 0 {
            0.0
        } else {
            self.count as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub test_name: String,
    pub params: RunParams,
    /// Spec the outcomes were classified with.
    pub spec: OutcomeSpec,
    /// Descending by count, ties by outcome.
    pub entries: Vec<ReportEntry>,
    pub total_count: u64,
    pub overall_status: OutcomeType,
    pub rounds_completed: usize,
    /// Set when the time budget cut the run short.
    pub truncated: bool,
    pub environment: Environment,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct DocOut<'a> {
    schema: u32,
    #[serde(flatten)]
    report: &'a RunReport,
}

#[derive(Deserialize)]
struct DocIn {
    #[allow(dead_code)]
    schema: u32,
    #[serde(flatten)]
    report: RunReport,
}

#[derive(Deserialize)]
struct Header {
    schema: u32,
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        test_name: &str,
        params: RunParams,
        spec: OutcomeSpec,
        histogram: &Histogram,
        rounds_completed: usize,
        truncated: bool,
        environment: Environment,
        warnings: Vec<String>,
    ) -> Result<Self, ModelError> {
        let mut entries = histogram
            .iter()
            .filter(|&(_, c)| c > 0)
            .map(|(outcome, count)| {
                Ok(ReportEntry {
                    outcome,
                    kind: spec.classify(&outcome)?,
                    count,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        sort_entries(&mut entries);
        let overall_status = spec.overall_status(histogram)?;
        Ok(RunReport {
            test_name: test_name.to_string(),
            params,
            total_count: histogram.total(),
            spec,
            entries,
            overall_status,
            rounds_completed,
            truncated,
            environment,
            warnings,
        })
    }

    /// Histogram equivalent of the entries.
    pub fn histogram(&self) -> Histogram {
        let mut h = Histogram::new(self.spec.arity());
        for e in &self.entries {
            h.add(&e.outcome, e.count)
                .expect("entries validated against spec arity");
        }
        h
    }

    pub fn count(&self, outcome: &Outcome) -> u64 {
        self.entries
            .iter()
            .find(|e| e.outcome == *outcome)
            .map_or(0, |e| e.count)
    }

    /// Checks every structural invariant of a report.
    pub fn validate(&self) -> Result<(), ReportError> {
        let invalid = |m: String| Err(ReportError::Invalid(m));
        let sum: u64 = self.entries.iter().map(|e| e.count).sum();
        if sum != self.total_count {
            return invalid(format!(
                "entry counts sum to {sum}, but totalCount is {}",
                self.total_count
            ));
        }
        let mut seen = BTreeSet::new();
        let mut status = OutcomeType::Acceptable;
        for e in &self.entries {
            if e.count == 0 {
                return invalid(format!("outcome {} has a zero count", e.outcome));
            }
            if !seen.insert(e.outcome) {
                return invalid(format!("outcome {} listed twice", e.outcome));
            }
            let kind = self.spec.classify(&e.outcome)?;
            if kind != e.kind {
                return invalid(format!(
                    "outcome {} is {} but the spec says {kind}",
                    e.outcome, e.kind
                ));
            }
            status = status.max(kind);
        }
        if status != self.overall_status {
            return invalid(format!(
                "overall status {} does not match entries ({status})",
                self.overall_status
            ));
        }
        let mut sorted = self.entries.clone();
        sort_entries(&mut sorted);
        if sorted != self.entries {
            return invalid("entries are not sorted by descending count".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(&DocOut {
            schema: SCHEMA_VERSION,
            report: self,
        })
        .expect("reports always serialize")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ReportError> {
        let header: Header = serde_json::from_slice(bytes)?;
        if header.schema != SCHEMA_VERSION {
            return Err(ReportError::UnknownSchema {
                found: header.schema,
            });
        }
        let doc: DocIn = serde_json::from_slice(bytes)?;
        doc.report.validate()?;
        Ok(doc.report)
    }

    /// Aligned `Outcome | Type | Count | Frequency` table with a status footer.
    pub fn format_table(&self, style: FreqStyle) -> String {
        let header = ["Outcome", "Type", "Count", "Frequency"];
        let rows: Vec<[String; 4]> = self
            .entries
            .iter()
            .map(|e| {
                [
                    e.outcome.to_string(),
                    e.kind.to_string(),
                    thousands(e.count),
                    format_frequency(e.count, self.total_count, style),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: [&str; 4]| {
            format!(
                "{:<w0$} | {:<w1$} | {:>w2$} | {:>w3$}\n",
                cells[0],
                cells[1],
                cells[2],
                cells[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3],
            )
        };
        let rule = format!(
            "{}-+-{}-+-{}-+-{}\n",
            "-".repeat(widths[0]),
            "-".repeat(widths[1]),
            "-".repeat(widths[2]),
            "-".repeat(widths[3])
        );

        let mut out = format!("test: {}\n", self.test_name);
        out.push_str(&line(header));
        out.push_str(&rule);
        for row in &rows {
            out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
        }
        out.push_str(&rule);
        out.push_str(&format!(
            "total count: {}, overall status: {}\n",
            thousands(self.total_count),
            self.overall_status
        ));
        out.push_str(&format!(
            "unlisted outcomes are {}\n",
            self.spec.default_type()
        ));
        if self.truncated {
            out.push_str(&format!(
                "truncated by time budget after {} of {} rounds\n",
                self.rounds_completed, self.params.rounds
            ));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

fn sort_entries(entries: &mut [ReportEntry]) {
    entries.sort_by_key(|e| (Reverse(e.count), e.outcome));
}

/// Parse a file holding either one report or an array of reports.
pub fn reports_from_json(bytes: &[u8]) -> Result<Vec<RunReport>, ReportError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .map(|v| RunReport::from_json(&serde_json::to_vec(&v)?))
            .collect(),
        _ => Ok(vec![RunReport::from_json(bytes)?]),
    }
}

/// Serialize several reports; a single report is written as a bare object.
pub fn reports_to_json(reports: &[RunReport]) -> Vec<u8> {
    if let [only] = reports {
        return only.to_json();
    }
    let docs: Vec<DocOut<'_>> = reports
        .iter()
        .map(|r| DocOut {
            schema: SCHEMA_VERSION,
            report: r,
        })
        .collect();
    serde_json::to_vec_pretty(&docs).expect("reports always serialize")
}

/// Frequency rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreqStyle {
    /// Four significant digits, rounded.
    #[default]
    Uniform,
    /// Truncated to three decimals, keeping at least three significant
    /// digits for small values.
    Paper,
}

impl std::str::FromStr for FreqStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(FreqStyle::Uniform),
            "paper" => Ok(FreqStyle::Paper),
            _ => Err(format!(
                "unknown frequency style {s:?}: expected uniform or paper"
            )),
        }
    }
}

/// Renders `count / total` as a percentage. Values under 0.001% print as
/// `<0.001%`.
pub fn format_frequency(count: u64, total: u64, style: FreqStyle) -> String {
    if total == 0 {
        return "0%".to_string();
    }
    // count/total < 0.001% <=> count * 100_000 < total
    if (count as u128) * 100_000 < total as u128 {
        return "<0.001%".to_string();
    }
    match style {
        FreqStyle::Uniform => {
            let pct = count as f64 * 100.0 / total as f64;
            let mut decimals = decimals_for_sig(pct, 4);
            let mut text = format!("{pct:.decimals$}");
            // Rounding may carry into a new leading digit (9.9996 -> 10.000).
            let rounded: f64 = text.parse().unwrap_or(pct);
            let again = decimals_for_sig(rounded, 4);
            if again < decimals {
                decimals = again;
                text = format!("{pct:.decimals$}");
            }
            format!("{text}%")
        }
        FreqStyle::Paper => {
            let pct = count as f64 * 100.0 / total as f64;
            let decimals = decimals_for_sig(pct, 3).max(3);
            // Exact truncation: floor(count * 100 * 10^d / total).
            let scale = 10u128.pow(decimals as u32);
            let scaled = (count as u128) * 100 * scale / (total as u128);
            let int = scaled / scale;
            let frac = scaled % scale;
            format!("{int}.{frac:0decimals$}%")
        }
    }
}

fn decimals_for_sig(value: f64, sig: i32) -> usize {
    if value <= 0.0 {
        return (sig - 1) as usize;
    }
    let magnitude = value.log10().floor() as i32;
    (sig - 1 - magnitude).max(0) as usize
}

/// `1234567` -> `1,234,567`.
pub fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Discrepancy {
    StatusDiffers {
        a: OutcomeType,
        b: OutcomeType,
    },
    OutcomeOnlyIn {
        side: Side,
        outcome: Outcome,
        kind: OutcomeType,
    },
    /// The two reports' specs classify the outcome differently.
    ClassificationDiffers {
        outcome: Outcome,
        a: OutcomeType,
        b: OutcomeType,
    },
    /// Informational: frequencies differ by at least the configured ratio.
    FrequencyRatio {
        outcome: Outcome,
        a: f64,
        b: f64,
        ratio: f64,
    },
}

impl Discrepancy {
    /// Severity used for ordering; informational entries sort last.
    pub fn severity(&self) -> Option<OutcomeType> {
        match self {
            Discrepancy::StatusDiffers { a, b } => Some(*a.max(b)),
            Discrepancy::OutcomeOnlyIn { kind, .. } => Some(*kind),
            Discrepancy::ClassificationDiffers { a, b, .. } => Some(*a.max(b)),
            Discrepancy::FrequencyRatio { .. } => None,
        }
    }

    pub fn is_informational(&self) -> bool {
        matches!(self, Discrepancy::FrequencyRatio { .. })
    }

    /// Same discrepancy with the sides swapped.
    pub fn mirrored(&self) -> Discrepancy {
        match self.clone() {
            Discrepancy::StatusDiffers { a, b } => Discrepancy::StatusDiffers { a: b, b: a },
            Discrepancy::OutcomeOnlyIn {
                side,
                outcome,
                kind,
            } => Discrepancy::OutcomeOnlyIn {
                side: side.flip(),
                outcome,
                kind,
            },
            Discrepancy::ClassificationDiffers { outcome, a, b } => {
                Discrepancy::ClassificationDiffers {
                    outcome,
                    a: b,
                    b: a,
                }
            }
            Discrepancy::FrequencyRatio {
                outcome,
                a,
                b,
                ratio,
            } => Discrepancy::FrequencyRatio {
                outcome,
                a: b,
                b: a,
                ratio,
            },
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Discrepancy::StatusDiffers { .. } => 0,
            Discrepancy::OutcomeOnlyIn { .. } => 1,
            Discrepancy::ClassificationDiffers { .. } => 2,
            Discrepancy::FrequencyRatio { .. } => 3,
        }
    }

    fn outcome(&self) -> Option<Outcome> {
        match self {
            Discrepancy::StatusDiffers { .. } => None,
            Discrepancy::OutcomeOnlyIn { outcome, .. }
            | Discrepancy::ClassificationDiffers { outcome, .. }
            | Discrepancy::FrequencyRatio { outcome, .. } => Some(*outcome),
        }
    }
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Discrepancy::StatusDiffers { a, b } => write!(f, "status differs: a={a}, b={b}"),
            Discrepancy::OutcomeOnlyIn {
                side,
                outcome,
                kind,
            } => {
                let side = match side {
                    Side::A => "a",
                    Side::B => "b",
                };
                write!(f, "outcome {outcome} ({kind}) only in {side}")
            }
            Discrepancy::ClassificationDiffers { outcome, a, b } => {
                write!(f, "outcome {outcome} classified differently: a={a}, b={b}")
            }
            Discrepancy::FrequencyRatio {
                outcome,
                a,
                b,
                ratio,
            } => write!(
                f,
                "info: outcome {outcome} frequency differs {ratio:.1}x: a={:.4}%, b={:.4}%",
                a * 100.0,
                b * 100.0
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    /// Frequency ratio at or above which an informational entry is emitted.
    pub frequency_ratio: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            frequency_ratio: 100.0,
        }
    }
}

/// Differences between two reports of the same test, most severe first.
pub fn compare(
    a: &RunReport,
    b: &RunReport,
    options: &CompareOptions,
) -> Result<Vec<Discrepancy>, ReportError> {
    if a.test_name != b.test_name {
        return Err(ReportError::TestMismatch(
            a.test_name.clone(),
            b.test_name.clone(),
        ));
    }
    if a.spec.arity() != b.spec.arity() {
        return Err(ReportError::ArityMismatch(a.spec.arity(), b.spec.arity()));
    }
    let mut out = Vec::new();
    if a.overall_status != b.overall_status {
        out.push(Discrepancy::StatusDiffers {
            a: a.overall_status,
            b: b.overall_status,
        });
    }
    let support_a: BTreeSet<Outcome> = a.entries.iter().map(|e| e.outcome).collect();
    let support_b: BTreeSet<Outcome> = b.entries.iter().map(|e| e.outcome).collect();
    for e in &a.entries {
        if !support_b.contains(&e.outcome) {
            out.push(Discrepancy::OutcomeOnlyIn {
                side: Side::A,
                outcome: e.outcome,
                kind: e.kind,
            });
        }
    }
    for e in &b.entries {
        if !support_a.contains(&e.outcome) {
            out.push(Discrepancy::OutcomeOnlyIn {
                side: Side::B,
                outcome: e.outcome,
                kind: e.kind,
            });
        }
    }
    for outcome in support_a.union(&support_b) {
        let ka = a.spec.classify(outcome)?;
        let kb = b.spec.classify(outcome)?;
        if ka != kb {
            out.push(Discrepancy::ClassificationDiffers {
                outcome: *outcome,
                a: ka,
                b: kb,
            });
        }
    }
    for outcome in support_a.intersection(&support_b) {
        let fa = a.count(outcome) as f64 / a.total_count as f64;
        let fb = b.count(outcome) as f64 / b.total_count as f64;
        let ratio = fa.max(fb) / fa.min(fb);
        if ratio >= options.frequency_ratio {
            out.push(Discrepancy::FrequencyRatio {
                outcome: *outcome,
                a: fa,
                b: fb,
                ratio,
            });
        }
    }
    out.sort_by_key(|d| (Reverse(d.severity()), d.rank(), d.outcome()));
    Ok(out)
}
