//! Campaign reports: aggregation, JSON/CSV export and mutant files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coverage::{coverage_ratio, jaccard_distance, Topology};
use crate::engine::{FuzzConfig, SeedRun, SweepRow};
use crate::mutators::{Location, OperatorId};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 6] =
    ["seed_id", "generation", "operator", "new_neurons", "jaccard", "noise_fraction"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown report format `{0}` (expected json or csv)")]
    UnknownFormat(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot encode report: {0}")]
    Encode(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    NcGuided,
    Random,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::NcGuided => "nc-guided",
            Mode::Random => "random",
        })
    }
}

/// The effective settings of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub max_mutations: usize,
    pub activation_threshold: f64,
    pub master_seed: u64,
    pub operator_set: Vec<OperatorId>,
    /// Chain length of a Random@K run.
    pub k: Option<usize>,
    pub oracle: String,
}

impl ConfigEcho {
    pub fn new(cfg: &FuzzConfig, k: Option<usize>, oracle: impl Into<String>) -> Self {
        ConfigEcho {
            max_mutations: cfg.max_mutations,
            activation_threshold: cfg.activation_threshold,
            master_seed: cfg.master_seed,
            operator_set: cfg.operator_set.clone(),
            k,
            oracle: oracle.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEcho {
    pub fingerprint: String,
    pub seeds: usize,
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub seed_id: String,
    pub generation: usize,
    pub operator: OperatorId,
    pub trace: Vec<OperatorId>,
    pub location: Location,
    /// Against the lineage's accumulated set.
    pub new_neurons: usize,
    /// Against the untouched seed.
    pub new_vs_seed: usize,
    /// Between the mutant's and the seed's activated sets.
    pub jaccard: f64,
    pub noise_fraction: f64,
    pub coverage_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed_id: String,
    pub coverage_before: Option<f64>,
    pub coverage_after: Option<f64>,
    pub oracle_calls: usize,
    pub error: Option<String>,
    pub tests: Vec<TestRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub count: usize,
    pub fraction: f64,
}

/// Means over all emitted tests; `None` when nothing was emitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub tests: usize,
    pub mean_coverage_ratio: Option<f64>,
    pub mean_new_neurons: Option<f64>,
    pub mean_new_vs_seed: Option<f64>,
    pub mean_jaccard: Option<f64>,
    pub mean_noise_fraction: Option<f64>,
    pub operator_histogram: BTreeMap<OperatorId, HistogramEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub schema: u32,
    pub mode: Mode,
    pub config: ConfigEcho,
    pub corpus: CorpusEcho,
    pub topology: Topology,
    pub campaign: CampaignStats,
    pub per_seed: Vec<SeedReport>,
}

impl FuzzReport {
    pub fn rows(&self) -> impl Iterator<Item = &TestRow> {
        self.per_seed.iter().flat_map(|s| s.tests.iter())
    }
}

/// Order-independent mean: summing sorted values makes the result the same
/// for every permutation of the input.
fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v.iter().sum::<f64>() / v.len() as f64)
}

pub fn campaign_stats(rows: &[&TestRow]) -> CampaignStats {
    let mut counts: BTreeMap<OperatorId, usize> = BTreeMap::new();
    for r in rows {
        *counts.entry(r.operator).or_insert(0) += 1;
    }
    let total = rows.len();
    let operator_histogram = counts
        .into_iter()
        .map(|(op, count)| (op, HistogramEntry { count, fraction: count as f64 / total as f64 }))
        .collect();
    CampaignStats {
        tests: total,
        mean_coverage_ratio: mean(rows.iter().map(|r| r.coverage_ratio)),
        mean_new_neurons: mean(rows.iter().map(|r| r.new_neurons as f64)),
        mean_new_vs_seed: mean(rows.iter().map(|r| r.new_vs_seed as f64)),
        mean_jaccard: mean(rows.iter().map(|r| r.jaccard)),
        mean_noise_fraction: mean(rows.iter().map(|r| r.noise_fraction)),
        operator_histogram,
    }
}

fn seed_report(run: &SeedRun, topology: &Topology) -> SeedReport {
    let Some(seed) = &run.seed else {
        return SeedReport {
            seed_id: run.seed_id.clone(),
            coverage_before: None,
            coverage_after: None,
            oracle_calls: run.oracle_calls,
            error: run.error.clone(),
            tests: Vec::new(),
        };
    };
    let tests = run
        .tests
        .iter()
        .map(|t| TestRow {
            seed_id: run.seed_id.clone(),
            generation: t.outcome.generation,
            operator: t.outcome.operator,
            trace: t.operator_trace.clone(),
            location: t.outcome.location.clone(),
            new_neurons: t.new_neuron_count,
            new_vs_seed: t.new_vs_seed(seed),
            jaccard: jaccard_distance(&t.activated, &seed.baseline_nc),
            noise_fraction: t.noise_fraction(seed),
            coverage_ratio: coverage_ratio(&t.activated, topology),
        })
        .collect();
    let after = run.tests.last().map_or(&seed.baseline_nc, |t| &t.nc_after);
    SeedReport {
        seed_id: run.seed_id.clone(),
        coverage_before: Some(coverage_ratio(&seed.baseline_nc, topology)),
        coverage_after: Some(coverage_ratio(after, topology)),
        oracle_calls: run.oracle_calls,
        error: run.error.clone(),
        tests,
    }
}

pub fn summarize(
    mode: Mode,
    config: ConfigEcho,
    corpus: CorpusEcho,
    topology: &Topology,
    runs: &[SeedRun],
) -> FuzzReport {
    let per_seed: Vec<SeedReport> = runs.iter().map(|r| seed_report(r, topology)).collect();
    let rows: Vec<&TestRow> = per_seed.iter().flat_map(|s| s.tests.iter()).collect();
    let campaign = campaign_stats(&rows);
    FuzzReport {
        schema: SCHEMA_VERSION,
        mode,
        config,
        corpus,
        topology: topology.clone(),
        campaign,
        per_seed,
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| ReportError::Io { path: parent.to_path_buf(), source })?;
    }
    fs::write(path, bytes).map_err(|source| ReportError::Io { path: path.to_path_buf(), source })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| ReportError::Encode(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn to_csv(report: &FuzzReport) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| ReportError::Encode(e.to_string());
    w.write_record(CSV_HEADER).map_err(enc)?;
    for r in report.rows() {
        w.write_record([
            r.seed_id.clone(),
            r.generation.to_string(),
            r.operator.to_string(),
            r.new_neurons.to_string(),
            r.jaccard.to_string(),
            r.noise_fraction.to_string(),
        ])
        .map_err(enc)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Encode(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ReportError::Encode(e.to_string()))
}

pub fn export(report: &FuzzReport, format: Format, path: &Path) -> Result<(), ReportError> {
    let text = match format {
        Format::Json => to_json(report)?,
        Format::Csv => to_csv(report)?,
    };
    write(path, text.as_bytes())
}

/// Writes each emitted mutant to `<out>/<seed_id>/gen<k>_<op>.java`.
pub fn write_mutants(runs: &[SeedRun], out: &Path) -> Result<usize, ReportError> {
    let mut written = 0;
    for run in runs {
        for t in &run.tests {
            let path = out
                .join(&run.seed_id)
                .join(format!("gen{}_{}.java", t.outcome.generation, t.outcome.operator));
            write(&path, t.outcome.mutant.text().as_bytes())?;
            written += 1;
        }
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: u32,
    pub master_seed: u64,
    pub operator_set: Vec<OperatorId>,
    pub corpus: CorpusEcho,
    pub rows: Vec<SweepRow>,
}

pub fn sweep_to_csv(report: &SweepReport) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| ReportError::Encode(e.to_string());
    w.write_record(["max", "mean_noise_fraction", "seeds"]).map_err(enc)?;
    for r in &report.rows {
        w.write_record([r.max.to_string(), r.mean_noise_fraction.to_string(), r.seeds.to_string()])
            .map_err(enc)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Encode(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ReportError::Encode(e.to_string()))
}

pub fn export_sweep(report: &SweepReport, format: Format, path: &Path) -> Result<(), ReportError> {
    let text = match format {
        Format::Json => to_json(report)?,
        Format::Csv => sweep_to_csv(report)?,
    };
    write(path, text.as_bytes())
}
