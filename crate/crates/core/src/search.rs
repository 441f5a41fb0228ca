//! Exhaustive subset search.
//!
//! Every k-subset of the predictors is scored for every responder and the
//! per-responder minimum is kept. Scores are normalized to `MSE / σ_y²` for every
//! method (that is `ω²(y | x)` for the correlation methods), so the tie tolerance
//! means the same thing regardless of how a score was computed.
//!
//! Subsets are cut into fixed-size chunks by lexicographic rank. Chunks are scored
//! independently (possibly in parallel) and their minima are folded in chunk order,
//! so the result does not depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hat::{self, GramTables, HatOrdering, HatScratch};
use crate::stats::{correlation_from_centered, pearson_centered, Centered};
use crate::subsets::{binomial, unrank, KSubsets};
use crate::uuc::{self, clamp_omega, RegressionCoefficients};
use crate::{
    ColumnStats, CorrelationMatrix, DesignMatrix, Error, ObservationMatrix, Result, Square,
    SubsetCandidate, TIE_EPS,
};

const CHUNK: u64 = 512;

/// Default cap on scored `(subset, responder)` pairs.
pub const DEFAULT_PAIR_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Factor `R_x` once per subset, then one forward recursion per responder.
    CondUncorrelation,
    /// Full `(k+1)×(k+1)` triangulation per responder.
    Algorithm1,
    HatA,
    HatB,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::CondUncorrelation,
        Method::Algorithm1,
        Method::HatA,
        Method::HatB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::CondUncorrelation => "cond-uncorrelation",
            Method::Algorithm1 => "algorithm1",
            Method::HatA => "hat-a",
            Method::HatB => "hat-b",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Correlations and column statistics for every predictor and responder,
/// computed once from the raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    pub d: usize,
    /// Data column of each predictor.
    pub predictors: Vec<usize>,
    /// Data column of each responder.
    pub responders: Vec<usize>,
    pub predictor_corr: CorrelationMatrix,
    /// `ρ(x_i, y_r)`, indexed `[r][i]`.
    pub responder_corr: Vec<Vec<f64>>,
    pub predictor_stats: Vec<ColumnStats>,
    pub responder_stats: Vec<ColumnStats>,
}

impl CorrelationModel {
    pub fn build(data: &ObservationMatrix, predictors: &[usize], responders: &[usize]) -> Result<Self> {
        let xs = predictors
            .iter()
            .map(|&c| Centered::new(data, c))
            .collect::<Result<Vec<_>>>()?;
        let ys = responders
            .iter()
            .map(|&c| Centered::new(data, c))
            .collect::<Result<Vec<_>>>()?;
        let predictor_corr = correlation_from_centered(&xs, predictors)?;
        let responder_corr = ys
            .iter()
            .zip(responders)
            .map(|(y, &yc)| {
                xs.iter()
                    .zip(predictors)
                    .map(|(x, &xc)| if xc == yc { Ok(1.0) } else { pearson_centered(x, y) })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d: data.d(),
            predictors: predictors.to_vec(),
            responders: responders.to_vec(),
            predictor_corr,
            responder_corr,
            predictor_stats: xs.iter().map(|c| c.stats).collect(),
            responder_stats: ys.iter().map(|c| c.stats).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.predictors.len()
    }

    pub fn m(&self) -> usize {
        self.responders.len()
    }
}

/// `R_x` and `ρ_y` for one subset and responder, copied out of the model.
pub fn slice_correlations(
    model: &CorrelationModel,
    subset: &SubsetCandidate,
    responder: usize,
) -> (CorrelationMatrix, Vec<f64>) {
    let idx = subset.indices();
    let rho = idx.iter().map(|&i| model.responder_corr[responder][i]).collect();
    (model.predictor_corr.select(idx), rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Worker threads; 0 uses all available cores.
    pub threads: usize,
    /// Maximum `m · C(n, k)`; `None` disables the check.
    pub pair_limit: Option<u64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            threads: 0,
            pair_limit: Some(DEFAULT_PAIR_LIMIT),
        }
    }
}

impl SearchOptions {
    pub fn single_threaded() -> Self {
        Self {
            threads: 1,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Position of the responder in the responder list.
    pub responder: usize,
    /// Positions in the predictor list.
    pub best: SubsetCandidate,
    pub omega_sq_cond: f64,
    pub mse: f64,
    pub r_squared: f64,
    pub coefficients: RegressionCoefficients,
    pub skipped_singular: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub subsets_evaluated: u64,
    pub skipped_singular: u64,
    pub pairs_scored: u64,
    /// Factorizations of `R_x` by the cond-uncorrelation method (one per subset).
    pub precompute_calls: u64,
}

impl SearchStats {
    fn merge(mut self, other: SearchStats) -> SearchStats {
        self.subsets_evaluated += other.subsets_evaluated;
        self.skipped_singular += other.skipped_singular;
        self.pairs_scored += other.pairs_scored;
        self.precompute_calls += other.precompute_calls;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub method: Method,
    pub k: usize,
    pub results: Vec<SelectionResult>,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq)]
struct Best {
    score: f64,
    subset: Vec<usize>,
}

/// Lower score wins; scores within `TIE_EPS` go to the lexicographically smaller subset.
fn beats(score: f64, subset: &[usize], incumbent: &Option<Best>) -> bool {
    match incumbent {
        None => true,
        Some(b) => {
            if (score - b.score).abs() <= TIE_EPS {
                subset < b.subset.as_slice()
            } else {
                score < b.score
            }
        }
    }
}

fn offer(slot: &mut Option<Best>, score: f64, subset: &[usize]) {
    if beats(score, subset, slot) {
        *slot = Some(Best {
            score,
            subset: subset.to_vec(),
        });
    }
}

struct ChunkResult {
    best: Vec<Option<Best>>,
    stats: SearchStats,
}

struct Searcher<'a> {
    method: Method,
    k: usize,
    model: &'a CorrelationModel,
    gram: Option<GramTables>,
    xcols: Vec<&'a [f64]>,
    ycols: Vec<&'a [f64]>,
    ones: Vec<f64>,
}

impl<'a> Searcher<'a> {
    fn scan(&self, start: u128, len: u64) -> Result<ChunkResult> {
        let k = self.k;
        let n = self.model.n();
        let m = self.model.m();
        let mut best: Vec<Option<Best>> = vec![None; m];
        let mut stats = SearchStats::default();
        let mut out = vec![0.0; m];
        let mut flat = vec![0.0; m * (k + 1)];
        let mut r_x = Square::filled(k, 0.0);
        let mut r_xy = Square::filled(k + 1, 0.0);
        let mut b = vec![0.0; k];
        let mut hat_scratch = HatScratch::new();
        let mut cols: Vec<&[f64]> = Vec::with_capacity(k + 1);
        let Some(mut subset) = unrank(n, k, start) else {
            return Ok(ChunkResult { best, stats });
        };

        for step in 0..len {
            if step > 0 && !KSubsets::advance(&mut subset, n) {
                break;
            }
            stats.subsets_evaluated += 1;
            let scored = match self.method {
                Method::CondUncorrelation | Method::Algorithm1 => {
                    for (i, &si) in subset.iter().enumerate() {
                        for (j, &sj) in subset.iter().enumerate().skip(i) {
                            r_x[(i, j)] = self.model.predictor_corr.get(si, sj);
                        }
                    }
                    for r in 0..m {
                        let row = &self.model.responder_corr[r];
                        for (i, &si) in subset.iter().enumerate() {
                            flat[r * k + i] = row[si];
                        }
                    }
                    if self.method == Method::CondUncorrelation {
                        stats.precompute_calls += 1;
                        uuc::score_subset_alg2(&mut r_x, &flat[..m * k], &mut b, &mut out)
                    } else {
                        uuc::score_subset_alg1(&r_x, &flat[..m * k], &mut r_xy, &mut out)
                    }
                }
                Method::HatA | Method::HatB => {
                    let gram = self.gram.as_ref().expect("gram tables for hat methods");
                    let mut xty = Vec::with_capacity(k + 1);
                    for r in 0..m {
                        gram.xty_into(&subset, r, &mut xty);
                        flat[r * (k + 1)..(r + 1) * (k + 1)].copy_from_slice(&xty);
                    }
                    cols.clear();
                    cols.push(&self.ones);
                    cols.extend(subset.iter().map(|&i| self.xcols[i]));
                    let ordering = if self.method == Method::HatA {
                        HatOrdering::A
                    } else {
                        HatOrdering::B
                    };
                    hat::score_subset_hat(
                        gram.xtx(&subset),
                        &flat,
                        &cols,
                        &self.ycols,
                        ordering,
                        &mut hat_scratch,
                        &mut out,
                    )
                    .map(|()| {
                        let d = self.model.d as f64;
                        for (o, st) in out.iter_mut().zip(&self.model.responder_stats) {
                            *o /= d * st.variance();
                        }
                    })
                }
            };
            match scored {
                Ok(()) => {}
                Err(Error::SingularMatrix { .. }) => {
                    stats.skipped_singular += 1;
                    continue;
                }
                Err(e) => return Err(e),
            }
            for (slot, &raw) in best.iter_mut().zip(&out) {
                let score = match self.method {
                    Method::CondUncorrelation | Method::Algorithm1 => clamp_omega(raw)?,
                    _ => raw,
                };
                offer(slot, score, &subset);
            }
            stats.pairs_scored += m as u64;
        }
        Ok(ChunkResult { best, stats })
    }

    fn finish(&self, r: usize, best: Best, skipped: u64) -> Result<SelectionResult> {
        let model = self.model;
        let ys = model.responder_stats[r];
        let subset = SubsetCandidate::new(best.subset, model.n())?;
        let coefficients = match self.method {
            Method::CondUncorrelation | Method::Algorithm1 => {
                let (r_x, rho) = slice_correlations(model, &subset, r);
                let (sigmas, mus): (Vec<f64>, Vec<f64>) = subset
                    .indices()
                    .iter()
                    .map(|&i| (model.predictor_stats[i].stddev, model.predictor_stats[i].mean))
                    .unzip();
                uuc::coefficients(&r_x, &rho, ys.stddev, &sigmas, ys.mean, &mus)?
            }
            Method::HatA | Method::HatB => {
                let design = DesignMatrix::new(
                    subset.indices().iter().map(|&i| self.xcols[i].to_vec()).collect(),
                )?;
                let fit = hat::fit_single(&design, self.ycols[r])?;
                RegressionCoefficients {
                    beta0: fit.beta_hat[0],
                    betas: fit.beta_hat[1..].to_vec(),
                }
            }
        };
        Ok(SelectionResult {
            responder: r,
            best: subset,
            omega_sq_cond: best.score,
            mse: uuc::mse_from_uuc(ys.variance(), best.score),
            r_squared: uuc::r_squared(best.score),
            coefficients,
            skipped_singular: skipped,
        })
    }
}

/// Exact best `k`-subset of `predictors` for every responder.
///
/// Subsets whose predictors are collinear are skipped and counted. Coefficients
/// are computed only for each responder's winning subset.
pub fn select_best(
    data: &ObservationMatrix,
    predictors: &[usize],
    responders: &[usize],
    k: usize,
    method: Method,
    options: &SearchOptions,
) -> Result<SearchOutcome> {
    let model = CorrelationModel::build(data, predictors, responders)?;
    select_best_with_model(data, &model, k, method, options)
}

pub fn select_best_with_model(
    data: &ObservationMatrix,
    model: &CorrelationModel,
    k: usize,
    method: Method,
    options: &SearchOptions,
) -> Result<SearchOutcome> {
    let n = model.n();
    let max = n.min(data.d() - 1);
    if k < 1 || k > max {
        return Err(Error::InvalidSparsity { k, max });
    }
    let total = binomial(n, k);
    let pairs = total.saturating_mul(model.m() as u128);
    if let Some(limit) = options.pair_limit {
        if pairs > limit as u128 {
            return Err(Error::LimitExceeded { pairs, limit });
        }
    }
    let gram = match method {
        Method::HatA | Method::HatB => {
            Some(hat::gram_products(data, &model.predictors, &model.responders)?)
        }
        _ => None,
    };
    let searcher = Searcher {
        method,
        k,
        model,
        gram,
        xcols: model
            .predictors
            .iter()
            .map(|&c| data.column(c))
            .collect::<Result<_>>()?,
        ycols: model
            .responders
            .iter()
            .map(|&c| data.column(c))
            .collect::<Result<_>>()?,
        ones: vec![1.0; data.d()],
    };

    let total = total as u64;
    let chunks: Vec<u64> = (0..total.div_ceil(CHUNK)).collect();
    let run = |c: &u64| {
        let start = c * CHUNK;
        searcher.scan(start as u128, CHUNK.min(total - start))
    };
    let partial: Vec<Result<ChunkResult>> = if options.threads == 1 {
        chunks.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()
            .map_err(|e| Error::Dimension(format!("thread pool: {e}")))?;
        pool.install(|| chunks.par_iter().map(run).collect())
    };

    let mut best: Vec<Option<Best>> = vec![None; model.m()];
    let mut stats = SearchStats::default();
    for chunk in partial {
        let chunk = chunk?;
        stats = stats.merge(chunk.stats);
        for (slot, cand) in best.iter_mut().zip(chunk.best) {
            if let Some(c) = cand {
                offer(slot, c.score, &c.subset);
            }
        }
    }

    let results = best
        .into_iter()
        .enumerate()
        .map(|(r, b)| {
            let b = b.ok_or(Error::NoValidSubset {
                k,
                skipped: stats.skipped_singular,
            })?;
            searcher.finish(r, b, stats.skipped_singular)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchOutcome {
        method,
        k,
        results,
        stats,
    })
}

/// Best subset for every size `1..=k_max` (no penalty across sizes).
pub fn select_sweep(
    data: &ObservationMatrix,
    predictors: &[usize],
    responders: &[usize],
    k_max: usize,
    method: Method,
    options: &SearchOptions,
) -> Result<Vec<SearchOutcome>> {
    let model = CorrelationModel::build(data, predictors, responders)?;
    if k_max < 1 {
        return Err(Error::InvalidSparsity { k: k_max, max: model.n() });
    }
    (1..=k_max)
        .map(|k| select_best_with_model(data, &model, k, method, options))
        .collect()
}
