//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.
//!
//! Reference values come from oracles written here, independent of the library:
//! cofactor-expansion determinants, Householder least squares, and the
//! operation-count polynomials typed in as integer numerators over 6.

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use subsel_cli::commands::{cmd_select, DataSource, RunConfig};
use subsel_cli::Format;
use subsel_core::opcount::measure_counts;
use subsel_core::search::select_best;
use subsel_core::stats::{column_stats, correlation_matrix};
use subsel_core::subsets::enumerate_subsets;
use subsel_core::uuc::{algorithm1, conditional_uuc, precompute_triangular};
use subsel_core::{
    synth, CountMethod, Method, ObservationMatrix, OpTally, SearchOptions, SelectionResult,
};

type Outcome = Result<String, String>;

// ---------------------------------------------------------------- oracles

/// Determinant by Laplace expansion along the first row.
fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    fn rec(m: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
        if rows.len() == 1 {
            return m[rows[0]][cols[0]];
        }
        let sub_rows = &rows[1..];
        let mut total = 0.0;
        for (j, &c) in cols.iter().enumerate() {
            let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * m[rows[0]][c] * rec(m, sub_rows, &sub_cols);
        }
        total
    }
    let idx: Vec<usize> = (0..m.len()).collect();
    rec(m, &idx, &idx)
}

/// Two-pass Pearson correlation with the 1/(d-1) normalization.
fn pearson_oracle(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0);
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / (n - 1.0);
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / (n - 1.0);
    cov / (va * vb).sqrt()
}

/// Least squares with an intercept by Householder QR.
struct LsFit {
    /// Intercept first.
    beta: Vec<f64>,
    fitted: Vec<f64>,
}

impl LsFit {
    fn mse(&self, y: &[f64]) -> f64 {
        y.iter().zip(&self.fitted).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64
    }
}

#[allow(clippy::needless_range_loop)]
fn lstsq(xs: &[&[f64]], y: &[f64]) -> LsFit {
    let d = y.len();
    let q = xs.len() + 1;
    let mut a: Vec<Vec<f64>> = (0..d)
        .map(|t| std::iter::once(1.0).chain(xs.iter().map(|c| c[t])).collect())
        .collect();
    let mut rhs = y.to_vec();
    for j in 0..q {
        let norm = (j..d).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..d).map(|i| a[i][j]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for c in j..q {
            let s: f64 = (j..d).map(|i| v[i - j] * a[i][c]).sum::<f64>() * 2.0 / vv;
            for i in j..d {
                a[i][c] -= s * v[i - j];
            }
        }
        let s: f64 = (j..d).map(|i| v[i - j] * rhs[i]).sum::<f64>() * 2.0 / vv;
        for i in j..d {
            rhs[i] -= s * v[i - j];
        }
    }
    let mut beta = vec![0.0; q];
    for j in (0..q).rev() {
        let s: f64 = ((j + 1)..q).map(|c| a[j][c] * beta[c]).sum();
        beta[j] = (rhs[j] - s) / a[j][j];
    }
    let fitted = (0..d)
        .map(|t| beta[0] + xs.iter().zip(&beta[1..]).map(|(c, b)| c[t] * b).sum::<f64>())
        .collect();
    LsFit { beta, fitted }
}

fn pop_var(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Reference operation-count polynomials, as numerators over 6.
fn table_counts(method: CountMethod, k: i128, d: i128, m: i128) -> (i128, i128, i128) {
    let k2 = k * k;
    let k3 = k2 * k;
    let (adds6, muls6, divs) = match method {
        CountMethod::Alg1 => (m * (k3 + 3 * k2 + 2 * k), m * (k3 + 6 * k2 + 5 * k), m * k),
        CountMethod::Alg2 => (
            k3 - k + m * (3 * k2 + 3 * k),
            k3 + 3 * k2 - 10 * k + 6 + m * (3 * k2 + 9 * k - 6),
            k - 1,
        ),
        CountMethod::HatSingle => (
            6 * (k + 3) * d + k3 + 9 * k2 + 8 * k,
            6 * (k + 2) * d + k3 + 12 * k2 + 17 * k + 6,
            k + 1,
        ),
        CountMethod::HatA => (
            k3 + 3 * k2 + 2 * k + 6 * m * (k * d + 3 * d + k2 + k),
            k3 + 6 * k2 + 5 * k + 6 * m * (k * d + 2 * d + k2 + 2 * k + 1),
            k + 1,
        ),
        CountMethod::HatB => (
            k3 + 3 * k2 + 2 * k + 6 * m * (k * d + 3 * d) + 6 * (k2 + k) * d,
            k3 + 6 * k2 + 5 * k + 6 * m * (k * d + 2 * d) + 6 * (k2 + 2 * k + 1) * d,
            k + 1,
        ),
    };
    assert!(adds6 % 6 == 0 && muls6 % 6 == 0, "table polynomial not integral");
    (adds6 / 6, muls6 / 6, divs)
}

fn tally_tuple(t: OpTally) -> (i128, i128, i128) {
    (t.adds as i128, t.muls as i128, t.divs as i128)
}

// ---------------------------------------------------------------- instances

const TIE: f64 = 1e-12;

struct Instance {
    seed: u64,
    data: ObservationMatrix,
    n: usize,
    m: usize,
    k: usize,
}

impl Instance {
    fn predictors(&self) -> Vec<usize> {
        (0..self.n).collect()
    }
    fn responders(&self) -> Vec<usize> {
        (self.n..self.n + self.m).collect()
    }
    fn col(&self, c: usize) -> &[f64] {
        self.data.column(c).unwrap()
    }
}

fn random_instances(count: u64) -> Vec<Instance> {
    (0..count)
        .map(|seed| {
            let mut rng = synth::rng(1000 + seed);
            let d = rng.random_range(10..=50);
            let n = rng.random_range(4..=10);
            let k = rng.random_range(1..=4);
            let m = rng.random_range(1..=3);
            let shared = rng.random_range(0.0..1.5);
            let noise = rng.random_range(0.2..2.0);
            let preds = synth::correlated(d, n, shared, seed).unwrap();
            let data = synth::with_mixed_responders(&preds, m, noise, seed ^ 0xABCD).unwrap();
            Instance { seed, data, n, m, k }
        })
        .collect()
}

/// Per-subset reference scores for one responder.
struct SubsetScore {
    subset: Vec<usize>,
    omega_sq: f64,
    oracle_mse: f64,
    oracle_r2: f64,
}

fn score_all(inst: &Instance, r: usize) -> Vec<SubsetScore> {
    let y = inst.col(inst.n + r);
    let mut cols = inst.predictors();
    cols.push(inst.n + r);
    let full = correlation_matrix(&inst.data, &cols).unwrap();
    let rho: Vec<f64> = (0..inst.n).map(|i| full.get(i, inst.n)).collect();
    enumerate_subsets(inst.n, inst.k)
        .unwrap()
        .map(|s| {
            let s = s.indices().to_vec();
            let cache = precompute_triangular(&full.select(&s)).unwrap();
            let rho_s: Vec<f64> = s.iter().map(|&i| rho[i]).collect();
            let omega_sq = conditional_uuc(&cache, &rho_s).unwrap().omega_sq;
            let xs: Vec<&[f64]> = s.iter().map(|&i| inst.col(i)).collect();
            let fit = lstsq(&xs, y);
            SubsetScore {
                omega_sq,
                oracle_mse: fit.mse(y),
                oracle_r2: pop_var(&fit.fitted) / pop_var(y),
                subset: s,
            }
        })
        .collect()
}

/// Index of the best entry under `better`-is-smaller with the lexicographic tie rule
/// (enumeration order is lexicographic, so the first within tolerance wins).
fn arg_best(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] - TIE {
            best = i;
        }
    }
    best
}

fn run_all_methods(inst: &Instance) -> Vec<Vec<SelectionResult>> {
    Method::ALL
        .iter()
        .map(|&method| {
            select_best(
                &inst.data,
                &inst.predictors(),
                &inst.responders(),
                inst.k,
                method,
                &SearchOptions::single_threaded(),
            )
            .unwrap()
            .results
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

// ---------------------------------------------------------------- criteria

fn criterion_1(instances: &[Instance], runs: &[Vec<Vec<SelectionResult>>]) -> Outcome {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for (inst, by_method) in instances.iter().zip(runs) {
        for r in 0..inst.m {
            pairs += 1;
            let reference = &by_method[0][r];
            for (method, res) in Method::ALL.iter().zip(by_method) {
                let res = &res[r];
                if res.best != reference.best {
                    return Err(format!(
                        "seed {} responder {r}: {} picked {:?}, cond-uncorrelation picked {:?}",
                        inst.seed,
                        method,
                        res.best.indices(),
                        reference.best.indices()
                    ));
                }
                worst = worst.max(rel(res.mse, reference.mse));
            }
        }
    }
    if worst > 1e-9 {
        return Err(format!("max relative MSE disagreement {worst:.3e} > 1e-9"));
    }
    Ok(format!(
        "{} instances, {pairs} responders, identical subsets, max rel MSE diff {worst:.2e}",
        instances.len()
    ))
}

fn criterion_2() -> Outcome {
    let mut rng = synth::rng(2024);
    let data = synth::correlated(40, 12, 0.8, 7).unwrap();
    let mut worst = 0.0f64;
    let trials = 150;
    for _ in 0..trials {
        let k = rng.random_range(1..=6);
        let picked = sample(&mut rng, data.p(), k + 1).into_vec();
        let (xs, y) = (&picked[..k], picked[k]);
        // Oracle correlation matrices straight from the columns.
        let cols: Vec<usize> = xs.iter().copied().chain(std::iter::once(y)).collect();
        let r_xy: Vec<Vec<f64>> = cols
            .iter()
            .map(|&a| {
                cols.iter()
                    .map(|&b| pearson_oracle(data.column(a).unwrap(), data.column(b).unwrap()))
                    .collect()
            })
            .collect();
        let r_x: Vec<Vec<f64>> = r_xy[..k].iter().map(|row| row[..k].to_vec()).collect();
        let expected = cofactor_det(&r_xy) / cofactor_det(&r_x);

        let lib = correlation_matrix(&data, &cols).unwrap();
        let cache = precompute_triangular(&lib.select(&(0..k).collect::<Vec<_>>())).unwrap();
        let rho: Vec<f64> = (0..k).map(|i| lib.get(i, k)).collect();
        let alg2 = conditional_uuc(&cache, &rho).unwrap().omega_sq;
        let alg1 = algorithm1(lib).unwrap();
        worst = worst.max((alg2 - expected).abs()).max((alg1 - expected).abs());
    }
    if worst > 1e-10 {
        return Err(format!("max |omega_sq - det ratio| = {worst:.3e} > 1e-10"));
    }
    Ok(format!("{trials} random subsets, k <= 6, max abs diff {worst:.2e}"))
}

fn criterion_3(instances: &[Instance], scores: &[Vec<Vec<SubsetScore>>]) -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (inst, per_resp) in instances.iter().zip(scores) {
        for (r, all) in per_resp.iter().enumerate() {
            let var_y = pop_var(inst.col(inst.n + r));
            for s in all {
                count += 1;
                worst = worst.max(rel(var_y * s.omega_sq, s.oracle_mse));
            }
        }
    }
    if worst > 1e-9 {
        return Err(format!("max rel diff {worst:.3e} > 1e-9"));
    }
    Ok(format!("{count} (subset, responder) pairs, max rel diff {worst:.2e}"))
}

fn criterion_4(
    instances: &[Instance],
    runs: &[Vec<Vec<SelectionResult>>],
    scores: &[Vec<Vec<SubsetScore>>],
) -> Outcome {
    let (mut worst_fit, mut worst_identity) = (0.0f64, 0.0f64);
    for ((inst, by_method), per_resp) in instances.iter().zip(runs).zip(scores) {
        for (r, all) in per_resp.iter().enumerate() {
            let by_mse = arg_best(&all.iter().map(|s| s.oracle_mse).collect::<Vec<_>>());
            let by_r2 = arg_best(&all.iter().map(|s| -s.oracle_r2).collect::<Vec<_>>());
            let by_omega = arg_best(&all.iter().map(|s| s.omega_sq).collect::<Vec<_>>());
            if by_mse != by_r2 || by_mse != by_omega {
                return Err(format!(
                    "seed {} responder {r}: objectives disagree ({:?}, {:?}, {:?})",
                    inst.seed, all[by_mse].subset, all[by_r2].subset, all[by_omega].subset
                ));
            }
            for res in by_method.iter().map(|m| &m[r]) {
                let oracle = all
                    .iter()
                    .find(|s| s.subset == res.best.indices())
                    .expect("winner is a k-subset");
                if res.best.indices() != all[by_mse].subset {
                    return Err(format!("seed {} responder {r}: winner is not the oracle argmin", inst.seed));
                }
                worst_fit = worst_fit.max((res.r_squared - oracle.oracle_r2).abs());
                worst_identity = worst_identity.max((res.r_squared - (1.0 - res.omega_sq_cond)).abs());
            }
        }
    }
    if worst_fit > 1e-9 || worst_identity > 1e-12 {
        return Err(format!(
            "R^2 vs explicit fit {worst_fit:.3e} (tol 1e-9), vs 1 - omega^2 {worst_identity:.3e} (tol 1e-12)"
        ));
    }
    Ok(format!(
        "objectives agree everywhere; R^2 vs fit {worst_fit:.2e}, vs 1 - omega^2 {worst_identity:.2e}"
    ))
}

fn criterion_5(instances: &[Instance], runs: &[Vec<Vec<SelectionResult>>]) -> Outcome {
    let (mut worst_beta, mut worst_mean) = (0.0f64, 0.0f64);
    for (inst, by_method) in instances.iter().zip(runs) {
        for res in &by_method[0] {
            let y = inst.col(inst.n + res.responder);
            let xs: Vec<&[f64]> = res.best.indices().iter().map(|&i| inst.col(i)).collect();
            let oracle = lstsq(&xs, y);
            let ours: Vec<f64> = std::iter::once(res.coefficients.beta0)
                .chain(res.coefficients.betas.iter().copied())
                .collect();
            let scale = oracle.beta.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let diff = ours
                .iter()
                .zip(&oracle.beta)
                .fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
            worst_beta = worst_beta.max(diff / scale);
            let fitted = res.coefficients.fitted(&xs);
            worst_mean = worst_mean.max((mean(&fitted) - mean(y)).abs());
        }
    }
    if worst_beta > 1e-9 || worst_mean > 1e-9 {
        return Err(format!(
            "coefficients rel diff {worst_beta:.3e}, mean(y_hat) - mean(y) {worst_mean:.3e} (tol 1e-9)"
        ));
    }
    Ok(format!(
        "coefficients rel diff {worst_beta:.2e}, |mean(y_hat) - mean(y)| {worst_mean:.2e}"
    ))
}

fn check_counts(method: CountMethod, k: usize, d: usize, m: usize) -> Result<(), String> {
    let measured = tally_tuple(measure_counts(method, k, d, m, 3, 99).map_err(|e| e.to_string())?);
    let expected = table_counts(method, k as i128, d as i128, m as i128);
    if measured != expected {
        return Err(format!(
            "{method} k={k} d={d} m={m}: measured {measured:?}, table {expected:?}"
        ));
    }
    Ok(())
}

fn criterion_6() -> Outcome {
    for k in 1..=8 {
        check_counts(CountMethod::Alg2, k, 1, 1)?;
        check_counts(CountMethod::Alg1, k, 1, 1)?;
    }
    for (k, spot) in [(2, (4, 5, 1)), (3, (10, 13, 2))] {
        let got = tally_tuple(measure_counts(CountMethod::Alg2, k, 1, 1, 1, 5).map_err(|e| e.to_string())?);
        if got != spot {
            return Err(format!("alg2 k={k}: {got:?} != {spot:?}"));
        }
    }
    Ok("alg1 and alg2 exact for k = 1..8; spot values (4,5,1), (10,13,2)".into())
}

fn criterion_7() -> Outcome {
    for m in 1..=5 {
        for k in 1..=8 {
            check_counts(CountMethod::Alg2, k, 1, m)?;
        }
    }
    // The multi-responder polynomials at m = 1 against the single-responder row.
    for k in 1..=8i128 {
        let t1 = (
            (k * k * k + 3 * k * k + 2 * k) / 6,
            (k * k * k + 6 * k * k - k) / 6,
            k - 1,
        );
        if table_counts(CountMethod::Alg2, k, 1, 1) != t1 {
            return Err(format!("m = 1 does not reduce to the single-responder row at k = {k}"));
        }
    }
    Ok("alg2 exact for m = 1..5, k = 1..8; m = 1 reduces to single-responder row".into())
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn criterion_8() -> Outcome {
    for k in 1..=8 {
        for d in [20, 57, 100] {
            check_counts(CountMethod::HatSingle, k, d, 1)?;
            for m in 1..=3 {
                check_counts(CountMethod::HatA, k, d, m)?;
                check_counts(CountMethod::HatB, k, d, m)?;
            }
        }
    }
    let ds = [50.0, 100.0, 200.0, 400.0, 800.0];
    let mut worst = 0.0f64;
    for k in [1usize, 3, 6] {
        let mut adds = Vec::new();
        let mut muls = Vec::new();
        for &d in &ds {
            let t = measure_counts(CountMethod::HatSingle, k, d as usize, 1, 1, 3).map_err(|e| e.to_string())?;
            adds.push(t.adds as f64);
            muls.push(t.muls as f64);
        }
        let (sa, sm) = (slope(&ds, &adds), slope(&ds, &muls));
        let ea = (sa - (k + 3) as f64).abs() / (k + 3) as f64;
        let em = (sm - (k + 2) as f64).abs() / (k + 2) as f64;
        if ea > 0.05 || em > 0.05 {
            return Err(format!("k={k}: slopes {sa:.3}, {sm:.3} vs {}, {}", k + 3, k + 2));
        }
        worst = worst.max(ea).max(em);
    }
    Ok(format!(
        "hat-single/hat-a/hat-b exact for k = 1..8, d in {{20,57,100}}, m = 1..3; slope deviation {worst:.2e}"
    ))
}

fn criterion_9() -> Outcome {
    let (d, n, k, m) = (1000, 15, 3, 10);
    let data = synth::standard_normal(d, n + m, 42).unwrap();
    let preds: Vec<usize> = (0..n).collect();
    let resps: Vec<usize> = (n..n + m).collect();
    let opts = SearchOptions::single_threaded();
    let time = |method: Method| -> Result<f64, String> {
        let mut best = f64::INFINITY;
        let mut subsets = 0;
        for _ in 0..5 {
            let start = Instant::now();
            let out = select_best(&data, &preds, &resps, k, method, &opts).map_err(|e| e.to_string())?;
            best = best.min(start.elapsed().as_secs_f64());
            subsets = out.stats.subsets_evaluated;
        }
        Ok(best / subsets as f64)
    };
    let cond = time(Method::CondUncorrelation)?;
    let hat_b = time(Method::HatB)?;
    let ratio = hat_b / cond;
    let detail = format!(
        "per subset: cond-uncorrelation {:.3e} s, hat-b {:.3e} s, speedup {ratio:.1}x",
        cond, hat_b
    );
    if ratio >= 2.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();

    // Scale and shift invariance of every argmin.
    for seed in 0..20u64 {
        let mut rng = synth::rng(500 + seed);
        let (d, n, m, k) = (30, 7, 2, rng.random_range(1..=3));
        let preds = synth::correlated(d, n, 0.7, seed).unwrap();
        let data = synth::with_mixed_responders(&preds, m, 1.0, seed + 1).unwrap();
        let col = rng.random_range(0..n + m);
        let a = rng.random_range(0.01..100.0);
        let b = rng.random_range(-50.0..50.0);
        let moved = data.affine_column(col, a, b).unwrap();
        let p: Vec<usize> = (0..n).collect();
        let r: Vec<usize> = (n..n + m).collect();
        for method in Method::ALL {
            let opts = SearchOptions::single_threaded();
            let before = select_best(&data, &p, &r, k, method, &opts).unwrap();
            let after = select_best(&moved, &p, &r, k, method, &opts).unwrap();
            for (x, y) in before.results.iter().zip(&after.results) {
                if x.best != y.best {
                    return Err(format!("scale/shift changed the {method} winner (seed {seed}, column {col})"));
                }
            }
        }
    }
    notes.push("scale/shift ok");

    // Adding a predictor never increases omega^2.
    let data = synth::correlated(60, 10, 0.9, 77).unwrap();
    let mut rng = synth::rng(77);
    for _ in 0..200 {
        let k = rng.random_range(1..=6);
        let picked = sample(&mut rng, 10, k + 2).into_vec();
        let y = picked[k + 1];
        let omega = |xs: &[usize]| {
            let cols: Vec<usize> = xs.iter().copied().chain([y]).collect();
            let r = correlation_matrix(&data, &cols).unwrap();
            let q = xs.len();
            let cache = precompute_triangular(&r.select(&(0..q).collect::<Vec<_>>())).unwrap();
            let rho: Vec<f64> = (0..q).map(|i| r.get(i, q)).collect();
            conditional_uuc(&cache, &rho).unwrap().omega_sq
        };
        let small = omega(&picked[..k]);
        let big = omega(&picked[..k + 1]);
        if big > small + 1e-12 {
            return Err(format!("omega^2 grew from {small} to {big} when adding a predictor"));
        }
    }
    notes.push("monotone");

    // Exactly orthogonal centered predictors: Walsh columns of length 16.
    let d = 16;
    let walsh = |w: usize| -> Vec<f64> {
        (0..d)
            .map(|t: usize| if (t & w).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 })
            .collect()
    };
    let mut columns: Vec<Vec<f64>> = (1..=5).map(walsh).collect();
    let mut yrng = synth::rng(5);
    columns.push((0..d).map(|_| yrng.random_range(-3.0..3.0)).collect());
    let data = ObservationMatrix::from_columns(columns).unwrap();
    let mut worst = 0.0f64;
    for k in 1..=5 {
        for s in enumerate_subsets(5, k).unwrap().map(|s| s.indices().to_vec()) {
            let cols: Vec<usize> = s.iter().copied().chain([5]).collect();
            let r = correlation_matrix(&data, &cols).unwrap();
            let cache = precompute_triangular(&r.select(&(0..k).collect::<Vec<_>>())).unwrap();
            let rho: Vec<f64> = (0..k).map(|i| r.get(i, k)).collect();
            let got = conditional_uuc(&cache, &rho).unwrap().omega_sq;
            let expected = 1.0
                - s.iter()
                    .map(|&i| pearson_oracle(data.column(i).unwrap(), data.column(5).unwrap()).powi(2))
                    .sum::<f64>();
            worst = worst.max((got - expected).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("orthogonal closed form off by {worst:.3e}"));
    }
    notes.push("orthogonal closed form");

    // Reports do not depend on the worker count.
    for method in Method::ALL {
        let render = |threads: usize| {
            let cfg = RunConfig {
                source: DataSource::Synthetic { d: 80, n: 14, m: 3, seed: 11 },
                k: 4,
                method,
                threads,
                limit: None,
                sweep: false,
                timing: false,
            };
            cmd_select(&cfg).unwrap().render(Format::Json).unwrap()
        };
        let one = render(1);
        for threads in [2, 3, 8] {
            if render(threads) != one {
                return Err(format!("{method} report differs between 1 and {threads} threads"));
            }
        }
    }
    notes.push("thread independent");

    // Lossless boundary k = d - 1.
    let mut worst_explicit = 0.0f64;
    let mut worst_score = 0.0f64;
    for seed in 0..30u64 {
        let k = 1 + (seed as usize % 6);
        let d = k + 1;
        let data = synth::standard_normal(d, k + 1, 300 + seed).unwrap();
        let p: Vec<usize> = (0..k).collect();
        for method in Method::ALL {
            let out = select_best(&data, &p, &[k], k, method, &SearchOptions::single_threaded())
                .map_err(|e| format!("boundary d={d}: {e}"))?;
            let res = &out.results[0];
            let y = data.column(k).unwrap();
            let var_y = column_stats(&data, k).unwrap().variance();
            let xs: Vec<&[f64]> = p.iter().map(|&i| data.column(i).unwrap()).collect();
            let fitted = res.coefficients.fitted(&xs);
            let explicit = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / d as f64;
            worst_explicit = worst_explicit.max(explicit / var_y);
            worst_score = worst_score.max(res.mse / var_y);
        }
    }
    if worst_explicit >= 1e-18 {
        return Err(format!(
            "boundary explicit residual MSE / var(y) = {worst_explicit:.3e} (needs < 1e-18)"
        ));
    }
    notes.push("boundary");
    Ok(format!(
        "{}; boundary residual MSE/var(y) <= {worst_explicit:.1e}, reported score MSE/var(y) <= {worst_score:.1e}",
        notes.join(", ")
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: u32, name: &str, started: Instant, out: Outcome| {
        let secs = started.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("[PASS] criterion {n}: {name} ({detail}) [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {n}: {name} ({detail}) [{secs:.2}s]");
            }
        }
    };

    let t = Instant::now();
    let instances = random_instances(240);
    let runs: Vec<_> = instances.iter().map(run_all_methods).collect();
    report(1, "all methods select the same subsets", t, criterion_1(&instances, &runs));

    let t = Instant::now();
    report(2, "omega^2 equals the determinant ratio", t, criterion_2());

    let t = Instant::now();
    let scores: Vec<Vec<Vec<SubsetScore>>> = instances
        .iter()
        .map(|inst| (0..inst.m).map(|r| score_all(inst, r)).collect())
        .collect();
    report(3, "var(y) * omega^2 equals the residual MSE", t, criterion_3(&instances, &scores));

    let t = Instant::now();
    report(4, "R^2 identities and objective equivalence", t, criterion_4(&instances, &runs, &scores));

    let t = Instant::now();
    report(5, "coefficients match least squares", t, criterion_5(&instances, &runs));

    let t = Instant::now();
    report(6, "single-responder operation counts", t, criterion_6());

    let t = Instant::now();
    report(7, "multi-responder operation counts", t, criterion_7());

    let t = Instant::now();
    report(8, "hat-matrix operation counts", t, criterion_8());

    let t = Instant::now();
    report(9, "speedup over hat-b at d=1000, n=15, k=3, m=10", t, criterion_9());

    let t = Instant::now();
    report(10, "property suites", t, criterion_10());

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
