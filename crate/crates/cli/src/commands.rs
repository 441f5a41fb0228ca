//! The `select`, `verify`, `bench` and `count-ops` commands.

use std::path::PathBuf;
use std::time::Instant;

use subsel_core::opcount::{count_row, CountMethod, CountRow};
use subsel_core::search::{select_best_with_model, select_sweep};
use subsel_core::stats::column_stats;
use subsel_core::{synth, CorrelationModel, Error as CoreError, Method, SearchOptions, SearchOutcome};

use crate::error::{CliError, Result};
use crate::ingest::{ingest_csv, ColumnSpec, Dataset};
use crate::report::{Report, Run, Timing, Verification, VerifyRecord};

/// Relative MSE agreement required between methods.
pub const VERIFY_REL_TOL: f64 = 1e-9;

/// Absolute floor, as a fraction of `σ_y²`, for near-zero MSE comparisons.
pub const VERIFY_ABS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv { path: PathBuf, spec: ColumnSpec },
    /// Independent standard normal columns: `n` predictors then `m` responders.
    Synthetic { d: usize, n: usize, m: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: DataSource,
    pub k: usize,
    pub method: Method,
    pub threads: usize,
    pub limit: Option<u64>,
    /// Also report the best subset of every size below `k`.
    pub sweep: bool,
    /// Include wall-clock times in the report.
    pub timing: bool,
}

impl RunConfig {
    pub fn options(&self) -> SearchOptions {
        SearchOptions {
            threads: self.threads,
            pair_limit: self.limit,
        }
    }
}

pub fn load(source: &DataSource) -> Result<Dataset> {
    match source {
        DataSource::Csv { path, spec } => ingest_csv(path, spec),
        &DataSource::Synthetic { d, n, m, seed } => {
            if n == 0 || m == 0 {
                return Err(CliError::Config("synthetic data needs n >= 1 and m >= 1".into()));
            }
            Ok(Dataset {
                matrix: synth::standard_normal(d, n + m, seed)?,
                predictor_names: (0..n).map(|i| format!("x{i}")).collect(),
                responder_names: (0..m).map(|j| format!("y{j}")).collect(),
            })
        }
    }
}

fn name_errors(data: &Dataset) -> impl Fn(CoreError) -> CliError + '_ {
    move |e| match e {
        CoreError::ZeroVariance { column } => CliError::ZeroVariance {
            name: data.name(column).to_string(),
        },
        other => CliError::Core(other),
    }
}

fn build_model(data: &Dataset) -> Result<CorrelationModel> {
    CorrelationModel::build(&data.matrix, &data.predictors(), &data.responders()).map_err(name_errors(data))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

pub fn cmd_select(cfg: &RunConfig) -> Result<Report> {
    let data = load(&cfg.source)?;
    let mut report = Report::new("select", &data);
    let opts = cfg.options();
    let outcomes: Vec<(SearchOutcome, f64)> = if cfg.sweep {
        let (res, t) = timed(|| {
            select_sweep(
                &data.matrix,
                &data.predictors(),
                &data.responders(),
                cfg.k,
                cfg.method,
                &opts,
            )
        });
        let outs = res.map_err(name_errors(&data))?;
        let share = t / outs.len() as f64;
        outs.into_iter().map(|o| (o, share)).collect()
    } else {
        let model = build_model(&data)?;
        let (res, t) = timed(|| select_best_with_model(&data.matrix, &model, cfg.k, cfg.method, &opts));
        vec![(res.map_err(name_errors(&data))?, t)]
    };
    report.runs = outcomes
        .iter()
        .map(|(o, t)| Run::from_outcome(o, &data, cfg.timing.then_some(*t)))
        .collect();
    Ok(report)
}

fn mse_agree(a: f64, b: f64, sigma_sq: f64) -> bool {
    (a - b).abs() <= VERIFY_REL_TOL * a.abs().max(b.abs()) + VERIFY_ABS_FLOOR * sigma_sq
}

/// Runs every method on the same input and checks that they select the same
/// subsets with matching MSEs and the same collinear-subset count.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Report> {
    let data = load(&cfg.source)?;
    let model = build_model(&data)?;
    let opts = cfg.options();
    let mut report = Report::new("verify", &data);
    let mut outcomes = Vec::new();
    for method in Method::ALL {
        let (res, t) = timed(|| select_best_with_model(&data.matrix, &model, cfg.k, method, &opts));
        let out = res.map_err(name_errors(&data))?;
        report.runs.push(Run::from_outcome(&out, &data, cfg.timing.then_some(t)));
        outcomes.push(out);
    }

    let mut records = Vec::new();
    for r in 0..data.m() {
        let sigma_sq = column_stats(&data.matrix, data.n() + r)?.variance();
        let subsets: Vec<Vec<usize>> = outcomes
            .iter()
            .map(|o| o.results[r].best.indices().to_vec())
            .collect();
        let mses: Vec<f64> = outcomes.iter().map(|o| o.results[r].mse).collect();
        let skipped: Vec<u64> = outcomes.iter().map(|o| o.results[r].skipped_singular).collect();
        let max_rel = mses
            .iter()
            .map(|&v| {
                let scale = v.abs().max(mses[0].abs());
                if scale == 0.0 {
                    0.0
                } else {
                    (v - mses[0]).abs() / scale
                }
            })
            .fold(0.0, f64::max);
        let passed = subsets.iter().all(|s| s == &subsets[0])
            && mses.iter().all(|&v| mse_agree(v, mses[0], sigma_sq))
            && skipped.iter().all(|&s| s == skipped[0]);
        records.push(VerifyRecord {
            responder: data.responder_names[r].clone(),
            passed,
            subsets,
            mses,
            max_rel_mse_diff: max_rel,
            skipped_singular: skipped,
        });
    }
    report.verification = Some(Verification {
        methods: Method::ALL.to_vec(),
        rel_tolerance: VERIFY_REL_TOL,
        passed: records.iter().all(|r| r.passed),
        records,
    });
    Ok(report)
}

/// The error to exit with when a verification report did not pass.
pub fn verification_failure(report: &Report) -> Option<CliError> {
    let v = report.verification.as_ref()?;
    if v.passed {
        return None;
    }
    let details: Vec<String> = v
        .records
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{}: subsets {:?}, mses {:?}", r.responder, r.subsets, r.mses))
        .collect();
    Some(CliError::Verification(details.join("; ")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    pub threads: usize,
    pub methods: Vec<Method>,
    pub limit: Option<u64>,
    /// Random inputs per op-count measurement.
    pub trials: usize,
}

/// Full-enumeration wall time of each method on one synthetic data set. Each
/// timing covers the whole selection, including that method's global precomputation.
pub fn bench_timings(data: &Dataset, cfg: &BenchConfig) -> Result<Vec<(SearchOutcome, Timing)>> {
    let opts = SearchOptions {
        threads: cfg.threads,
        pair_limit: cfg.limit,
    };
    cfg.methods
        .iter()
        .map(|&method| {
            let (res, t) = timed(|| {
                CorrelationModel::build(&data.matrix, &data.predictors(), &data.responders())
                    .and_then(|model| select_best_with_model(&data.matrix, &model, cfg.k, method, &opts))
            });
            let out = res.map_err(name_errors(data))?;
            let subsets = out.stats.subsets_evaluated;
            let timing = Timing {
                method,
                threads: cfg.threads,
                subsets,
                pairs: out.stats.pairs_scored,
                total_s: t,
                per_subset_s: t / subsets.max(1) as f64,
            };
            Ok((out, timing))
        })
        .collect()
}

pub fn bench_counts(cfg: &BenchConfig) -> Result<Vec<CountRow>> {
    CountMethod::ALL
        .iter()
        .map(|&method| count_row(method, cfg.k, cfg.d, cfg.m, cfg.trials, cfg.seed).map_err(CliError::from))
        .collect()
}

pub fn cmd_bench(cfg: &BenchConfig) -> Result<Report> {
    let data = load(&DataSource::Synthetic {
        d: cfg.d,
        n: cfg.n,
        m: cfg.m,
        seed: cfg.seed,
    })?;
    let mut report = Report::new("bench", &data);
    let timed = bench_timings(&data, cfg)?;
    report.runs = timed
        .iter()
        .map(|(o, t)| Run::from_outcome(o, &data, Some(t.total_s)))
        .collect();
    report.timings = Some(timed.into_iter().map(|(_, t)| t).collect());
    report.op_counts = Some(bench_counts(cfg)?);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountOpsConfig {
    pub methods: Vec<CountMethod>,
    pub ks: Vec<usize>,
    pub ds: Vec<usize>,
    pub ms: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

/// Measured-vs-predicted op counts over a parameter grid. Methods whose counts do
/// not depend on `d` are measured once per `(k, m)`; `hat-single` once per `(k, d)`.
pub fn cmd_count_ops(cfg: &CountOpsConfig) -> Result<Vec<CountRow>> {
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        let ds: &[usize] = match method {
            CountMethod::Alg1 | CountMethod::Alg2 => &cfg.ds[..cfg.ds.len().min(1)],
            _ => &cfg.ds,
        };
        let ms: &[usize] = if method == CountMethod::HatSingle {
            &[1]
        } else {
            &cfg.ms
        };
        for &k in &cfg.ks {
            for &d in ds {
                for &m in ms {
                    rows.push(count_row(method, k, d, m, cfg.trials, cfg.seed)?);
                }
            }
        }
    }
    Ok(rows)
}
