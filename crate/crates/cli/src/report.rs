//! Machine-readable run reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use subsel_core::opcount::{render_csv, render_text, CountRow};
use subsel_core::{Method, SearchOutcome};

use crate::ingest::Dataset;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub responder: String,
    pub subset: Vec<String>,
    pub subset_indices: Vec<usize>,
    pub omega_sq_cond: f64,
    pub mse: f64,
    pub r_squared: f64,
    pub beta0: f64,
    pub betas: Vec<f64>,
    pub skipped_singular: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub method: Method,
    pub k: usize,
    pub subsets_evaluated: u64,
    pub subsets_skipped: u64,
    pub pairs_scored: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub records: Vec<Record>,
}

impl Run {
    pub fn from_outcome(out: &SearchOutcome, data: &Dataset, wall_time_s: Option<f64>) -> Self {
        Run {
            method: out.method,
            k: out.k,
            subsets_evaluated: out.stats.subsets_evaluated,
            subsets_skipped: out.stats.skipped_singular,
            pairs_scored: out.stats.pairs_scored,
            wall_time_s,
            records: out
                .results
                .iter()
                .map(|r| Record {
                    responder: data.responder_names[r.responder].clone(),
                    subset: r
                        .best
                        .indices()
                        .iter()
                        .map(|&i| data.predictor_names[i].clone())
                        .collect(),
                    subset_indices: r.best.indices().to_vec(),
                    omega_sq_cond: r.omega_sq_cond,
                    mse: r.mse,
                    r_squared: r.r_squared,
                    beta0: r.coefficients.beta0,
                    betas: r.coefficients.betas.clone(),
                    skipped_singular: r.skipped_singular,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub responder: String,
    pub passed: bool,
    /// Winning subset indices, in the order of `Verification::methods`.
    pub subsets: Vec<Vec<usize>>,
    pub mses: Vec<f64>,
    pub max_rel_mse_diff: f64,
    pub skipped_singular: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub methods: Vec<Method>,
    pub rel_tolerance: f64,
    pub passed: bool,
    pub records: Vec<VerifyRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub method: Method,
    pub threads: usize,
    pub subsets: u64,
    pub pairs: u64,
    pub total_s: f64,
    pub per_subset_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub predictors: Vec<String>,
    pub responders: Vec<String>,
    pub runs: Vec<Run>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<Timing>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op_counts: Option<Vec<CountRow>>,
}

impl Report {
    pub fn new(command: &str, data: &Dataset) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            d: data.matrix.d(),
            n: data.n(),
            m: data.m(),
            predictors: data.predictor_names.clone(),
            responders: data.responder_names.clone(),
            runs: Vec::new(),
            verification: None,
            timings: None,
            op_counts: None,
        }
    }

    pub fn render(&self, format: Format) -> Result<String, serde_json::Error> {
        Ok(match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self)?;
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        })
    }

    fn to_csv(&self) -> String {
        let mut s = String::new();
        if !self.runs.is_empty() {
            s.push_str("method,k,responder,subset,omega_sq_cond,mse,r_squared,beta0,betas,skipped_singular\n");
            for run in &self.runs {
                for r in &run.records {
                    let betas: Vec<String> = r.betas.iter().map(|b| b.to_string()).collect();
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{},{}",
                        run.method,
                        run.k,
                        csv_field(&r.responder),
                        csv_field(&r.subset.join(";")),
                        r.omega_sq_cond,
                        r.mse,
                        r.r_squared,
                        r.beta0,
                        betas.join(";"),
                        r.skipped_singular
                    );
                }
            }
        }
        if let Some(t) = &self.timings {
            s.push_str("method,threads,subsets,pairs,total_s,per_subset_s\n");
            for t in t {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    t.method, t.threads, t.subsets, t.pairs, t.total_s, t.per_subset_s
                );
            }
        }
        if let Some(rows) = &self.op_counts {
            s.push_str(&render_csv(rows));
        }
        s
    }

    fn to_text(&self) -> String {
        let mut s = format!(
            "{}: d={} n={} m={}\n",
            self.command, self.d, self.n, self.m
        );
        for run in &self.runs {
            let _ = writeln!(
                s,
                "\n{} k={}  subsets={} skipped={}{}",
                run.method,
                run.k,
                run.subsets_evaluated,
                run.subsets_skipped,
                run.wall_time_s
                    .map(|t| format!(" time={t:.6}s"))
                    .unwrap_or_default()
            );
            let _ = writeln!(
                s,
                "  {:<14} {:<28} {:>14} {:>14} {:>10}",
                "responder", "subset", "omega_sq", "mse", "r_squared"
            );
            for r in &run.records {
                let _ = writeln!(
                    s,
                    "  {:<14} {:<28} {:>14.6e} {:>14.6e} {:>10.6}",
                    r.responder,
                    r.subset.join(","),
                    r.omega_sq_cond,
                    r.mse,
                    r.r_squared
                );
            }
        }
        if let Some(v) = &self.verification {
            let _ = writeln!(
                s,
                "\nverification ({}): {}",
                v.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(", "),
                if v.passed { "PASS" } else { "FAIL" }
            );
            for r in &v.records {
                let _ = writeln!(
                    s,
                    "  {:<14} {}  max rel mse diff {:.3e}",
                    r.responder,
                    if r.passed { "pass" } else { "FAIL" },
                    r.max_rel_mse_diff
                );
            }
        }
        if let Some(t) = &self.timings {
            let _ = writeln!(s, "\n{:<20} {:>10} {:>14} {:>16}", "method", "subsets", "total_s", "per_subset_s");
            for t in t {
                let _ = writeln!(
                    s,
                    "{:<20} {:>10} {:>14.6} {:>16.3e}",
                    t.method.name(),
                    t.subsets,
                    t.total_s,
                    t.per_subset_s
                );
            }
        }
        if let Some(rows) = &self.op_counts {
            s.push('\n');
            s.push_str(&render_text(rows));
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
