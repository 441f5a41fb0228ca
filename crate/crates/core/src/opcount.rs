//! Operation counting for the per-subset kernels.
//!
//! [`Counted`] wraps an `f64` and bumps a thread-local [`OpTally`] on every
//! `+ - * /`. Subtraction counts as an addition and a reciprocal as a division;
//! comparisons, copies and index arithmetic are free. The kernels are generic over
//! [`Scalar`], so the counts describe the exact code used by the search.

use std::cell::Cell;
use std::fmt::{self, Write as _};
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::hat::{self, HatOrdering, HatScratch};
use crate::search::CorrelationModel;
use crate::{synth, uuc, Error, Result, Scalar, Square};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpTally {
    pub adds: u64,
    pub muls: u64,
    pub divs: u64,
}

impl OpTally {
    pub fn total(&self) -> u64 {
        self.adds + self.muls + self.divs
    }
}

thread_local! {
    static TALLY: Cell<OpTally> = const { Cell::new(OpTally { adds: 0, muls: 0, divs: 0 }) };
}

/// Runs `f` with a fresh tally and returns what it counted.
pub fn count<R>(f: impl FnOnce() -> R) -> (R, OpTally) {
    let saved = TALLY.with(|t| t.replace(OpTally::default()));
    let out = f();
    let counted = TALLY.with(|t| t.replace(saved));
    (out, counted)
}

#[inline]
fn bump(f: impl FnOnce(&mut OpTally)) {
    TALLY.with(|t| {
        let mut v = t.get();
        f(&mut v);
        t.set(v);
    });
}

/// An `f64` that records every arithmetic operation applied to it.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Counted(pub f64);

impl Add for Counted {
    type Output = Counted;
    fn add(self, rhs: Counted) -> Counted {
        bump(|t| t.adds += 1);
        Counted(self.0 + rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for Counted {
    type Output = Counted;
    fn sub(self, rhs: Counted) -> Counted {
        bump(|t| t.adds += 1);
        Counted(self.0 - rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Counted {
    type Output = Counted;
    fn mul(self, rhs: Counted) -> Counted {
        bump(|t| t.muls += 1);
        Counted(self.0 * rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Counted {
    type Output = Counted;
    fn div(self, rhs: Counted) -> Counted {
        bump(|t| t.divs += 1);
        Counted(self.0 / rhs.0)
    }
}

impl Scalar for Counted {
    fn from_f64(v: f64) -> Self {
        Counted(v)
    }

    fn to_f64(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    /// Full triangulation, run once per responder.
    Alg1,
    /// Split factorization: `R_x` once, forward recursion per responder.
    Alg2,
    /// Normal equations for a single responder.
    HatSingle,
    HatA,
    HatB,
}

impl CountMethod {
    pub const ALL: [CountMethod; 5] = [
        CountMethod::Alg1,
        CountMethod::Alg2,
        CountMethod::HatSingle,
        CountMethod::HatA,
        CountMethod::HatB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CountMethod::Alg1 => "alg1",
            CountMethod::Alg2 => "alg2",
            CountMethod::HatSingle => "hat-single",
            CountMethod::HatA => "hat-a",
            CountMethod::HatB => "hat-b",
        }
    }

    fn uses_d(self) -> bool {
        !matches!(self, CountMethod::Alg1 | CountMethod::Alg2)
    }

    fn responders(self, m: usize) -> usize {
        if self == CountMethod::HatSingle {
            1
        } else {
            m
        }
    }
}

impl fmt::Display for CountMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CountMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CountMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountPrediction {
    pub method: CountMethod,
    pub k: usize,
    pub d: usize,
    pub m: usize,
    pub adds: u64,
    pub muls: u64,
    pub divs: u64,
}

impl CountPrediction {
    pub fn tally(&self) -> OpTally {
        OpTally {
            adds: self.adds,
            muls: self.muls,
            divs: self.divs,
        }
    }
}

/// Evaluates `num / 6`, which the closed forms guarantee to be a non-negative integer.
fn sixth(num: i128) -> u64 {
    debug_assert!(num >= 0 && num % 6 == 0, "{num} is not a multiple of 6");
    (num / 6) as u64
}

/// Closed-form operation counts for one candidate subset.
///
/// `alg1` is the single-responder count times `m`; `hat-single` ignores `m`.
pub fn predicted_counts(method: CountMethod, k: usize, d: usize, m: usize) -> Result<CountPrediction> {
    if k < 1 {
        return Err(Error::InvalidSparsity { k, max: usize::MAX });
    }
    if m < 1 || (method.uses_d() && d < 1) {
        return Err(Error::Dimension(format!("need d >= 1 and m >= 1, got d={d}, m={m}")));
    }
    let (k, d, m) = (k as i128, d as i128, method.responders(m) as i128);
    let (k2, k3) = (k * k, k * k * k);
    // Everything below is six times the real count.
    let (adds, muls, divs) = match method {
        CountMethod::Alg1 => (
            m * (k3 + 3 * k2 + 2 * k),
            m * (k3 + 6 * k2 + 5 * k),
            m * 6 * k,
        ),
        CountMethod::Alg2 => (
            k3 - k + m * (3 * k2 + 3 * k),
            k3 + 3 * k2 - 10 * k + 6 + m * (3 * k2 + 9 * k - 6),
            6 * (k - 1),
        ),
        CountMethod::HatSingle | CountMethod::HatA => (
            k3 + 3 * k2 + 2 * k + m * (6 * k * d + 18 * d + 6 * k2 + 6 * k),
            k3 + 6 * k2 + 5 * k + m * (6 * k * d + 12 * d + 6 * k2 + 12 * k + 6),
            6 * (k + 1),
        ),
        CountMethod::HatB => (
            k3 + 3 * k2 + 2 * k + m * (6 * k * d + 18 * d) + 6 * (k2 + k) * d,
            k3 + 6 * k2 + 5 * k + m * (6 * k * d + 12 * d) + 6 * (k2 + 2 * k + 1) * d,
            6 * (k + 1),
        ),
    };
    Ok(CountPrediction {
        method,
        k: k as usize,
        d: d as usize,
        m: m as usize,
        adds: sixth(adds),
        muls: sixth(muls),
        divs: sixth(divs),
    })
}

fn to_counted(v: &[f64]) -> Vec<Counted> {
    v.iter().map(|&x| Counted(x)).collect()
}

/// Counts one per-subset evaluation on a random instance drawn from `seed`.
fn measure_once(method: CountMethod, k: usize, d: usize, m: usize, seed: u64) -> Result<OpTally> {
    let m = method.responders(m);
    let subset: Vec<usize> = (0..k).collect();
    let responders: Vec<usize> = (k..k + m).collect();
    let rows = if method.uses_d() { d } else { d.max(2 * k + 4) };
    let data = synth::standard_normal(rows, k + m, seed)?;
    match method {
        CountMethod::Alg1 | CountMethod::Alg2 => {
            let model = CorrelationModel::build(&data, &subset, &responders)?;
            let mut r_x: Square<Counted> = model.predictor_corr.as_square().map(Counted);
            let rhos: Vec<Counted> = model.responder_corr.iter().flat_map(|r| to_counted(r)).collect();
            let mut out = vec![Counted(0.0); m];
            let (res, tally) = if method == CountMethod::Alg2 {
                let mut b = vec![Counted(0.0); k];
                count(|| uuc::score_subset_alg2(&mut r_x, &rhos, &mut b, &mut out))
            } else {
                let mut scratch = Square::filled(k + 1, Counted(0.0));
                count(|| uuc::score_subset_alg1(&r_x, &rhos, &mut scratch, &mut out))
            };
            res.map(|()| tally)
        }
        CountMethod::HatSingle | CountMethod::HatA | CountMethod::HatB => {
            let gram = hat::gram_products(&data, &subset, &responders)?;
            let xtx: Square<Counted> = gram.xtx(&subset);
            let xtys: Vec<Counted> = (0..m).flat_map(|r| gram.xty::<Counted>(&subset, r)).collect();
            let ones = vec![Counted(1.0); d];
            let xcols: Vec<Vec<Counted>> = subset.iter().map(|&c| to_counted(&data.columns()[c])).collect();
            let ycols: Vec<Vec<Counted>> = responders.iter().map(|&c| to_counted(&data.columns()[c])).collect();
            let cols: Vec<&[Counted]> = std::iter::once(ones.as_slice())
                .chain(xcols.iter().map(Vec::as_slice))
                .collect();
            let ys: Vec<&[Counted]> = ycols.iter().map(Vec::as_slice).collect();
            let ordering = if method == CountMethod::HatB {
                HatOrdering::B
            } else {
                HatOrdering::A
            };
            let mut scratch = HatScratch::new();
            let mut out = vec![Counted(0.0); m];
            let (res, tally) =
                count(|| hat::score_subset_hat(xtx, &xtys, &cols, &ys, ordering, &mut scratch, &mut out));
            res.map(|()| tally)
        }
    }
}

/// Operation counts of one per-subset evaluation, checked to be identical over
/// `trials` independent random inputs of the same shape.
///
/// One-time global work (correlations, inner-product tables) is excluded.
pub fn measure_counts(
    method: CountMethod,
    k: usize,
    d: usize,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<OpTally> {
    if k < 1 || (method.uses_d() && k + 1 > d) {
        return Err(Error::InvalidSparsity {
            k,
            max: if method.uses_d() { d.saturating_sub(1) } else { usize::MAX },
        });
    }
    if m < 1 {
        return Err(Error::Dimension("need at least one responder".into()));
    }
    let mut first: Option<OpTally> = None;
    let mut attempt = seed;
    let mut done = 0;
    while done < trials.max(1) {
        let tally = match measure_once(method, k, d, m, attempt) {
            Ok(t) => t,
            Err(Error::SingularMatrix { .. }) if attempt - seed < 1000 => {
                attempt += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        attempt += 1;
        done += 1;
        match first {
            None => first = Some(tally),
            Some(f) if f != tally => return Err(Error::NondeterministicCount { first: f, other: tally }),
            Some(_) => {}
        }
    }
    Ok(first.expect("at least one trial"))
}

/// One line of a measured-vs-predicted table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub predicted: CountPrediction,
    pub measured: OpTally,
}

impl CountRow {
    pub fn exact(&self) -> bool {
        self.predicted.tally() == self.measured
    }

    /// Largest relative deviation over the three operation classes.
    pub fn max_deviation(&self) -> f64 {
        let rel = |p: u64, m: u64| {
            if p == m {
                0.0
            } else {
                (m as f64 - p as f64).abs() / (p.max(1) as f64)
            }
        };
        let p = self.predicted;
        let m = self.measured;
        rel(p.adds, m.adds).max(rel(p.muls, m.muls)).max(rel(p.divs, m.divs))
    }
}

pub fn count_row(method: CountMethod, k: usize, d: usize, m: usize, trials: usize, seed: u64) -> Result<CountRow> {
    Ok(CountRow {
        predicted: predicted_counts(method, k, d, m)?,
        measured: measure_counts(method, k, d, m, trials, seed)?,
    })
}

pub fn render_csv(rows: &[CountRow]) -> String {
    let mut s = String::from(
        "method,k,d,m,pred_adds,pred_muls,pred_divs,meas_adds,meas_muls,meas_divs,exact,max_deviation\n",
    );
    for r in rows {
        let p = r.predicted;
        let q = r.measured;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p.method, p.k, p.d, p.m, p.adds, p.muls, p.divs, q.adds, q.muls, q.divs, r.exact(), r.max_deviation()
        );
    }
    s
}

pub fn render_text(rows: &[CountRow]) -> String {
    let mut s = format!(
        "{:<10} {:>3} {:>6} {:>3} {:>24} {:>24} {:>6}\n",
        "method", "k", "d", "m", "predicted (+, x, /)", "measured (+, x, /)", "exact"
    );
    for r in rows {
        let p = r.predicted;
        let q = r.measured;
        let _ = writeln!(
            s,
            "{:<10} {:>3} {:>6} {:>3} {:>24} {:>24} {:>6}",
            p.method.name(),
            p.k,
            p.d,
            p.m,
            format!("({}, {}, {})", p.adds, p.muls, p.divs),
            format!("({}, {}, {})", q.adds, q.muls, q.divs),
            if r.exact() { "yes" } else { "NO" }
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(p: CountPrediction) -> (u64, u64, u64) {
        (p.adds, p.muls, p.divs)
    }

    #[test]
    fn counted_scalar_tallies() {
        let (v, t) = count(|| {
            let a = Counted(3.0);
            let b = Counted(2.0);
            (a + b) * (a - b) / b
        });
        assert_eq!(v, Counted(2.5));
        assert_eq!(t, OpTally { adds: 2, muls: 1, divs: 1 });
        let (_, t) = count(|| Counted::from_f64(1.0).to_f64());
        assert_eq!(t, OpTally::default());
    }

    #[test]
    fn alg2_single_responder_spot_values() {
        let p = predicted_counts(CountMethod::Alg2, 2, 1, 1).unwrap();
        assert_eq!(triple(p), (4, 5, 1));
        let p = predicted_counts(CountMethod::Alg2, 3, 1, 1).unwrap();
        assert_eq!(triple(p), (10, 13, 2));
        assert_eq!(predicted_counts(CountMethod::Alg1, 1, 1, 1).unwrap().divs, 1);
        assert_eq!(predicted_counts(CountMethod::Alg2, 1, 1, 1).unwrap().divs, 0);
    }

    #[test]
    fn multi_responder_alg2_reduces_to_single() {
        for k in 1..=8usize {
            let p = predicted_counts(CountMethod::Alg2, k, 1, 1).unwrap();
            // Single-responder polynomials, times six.
            let k = k as u64;
            assert_eq!(p.adds * 6, k * k * k + 3 * k * k + 2 * k);
            assert_eq!(p.muls * 6, k * k * k + 6 * k * k - k);
            assert_eq!(p.divs, k - 1);
        }
    }

    #[test]
    fn hat_single_equals_hat_a_with_one_responder() {
        for k in 1..=6 {
            for d in [10, 57, 1000] {
                let s = predicted_counts(CountMethod::HatSingle, k, d, 1).unwrap();
                let a = predicted_counts(CountMethod::HatA, k, d, 1).unwrap();
                assert_eq!(s.tally(), a.tally());
            }
        }
    }

    #[test]
    fn unknown_method_name() {
        assert_eq!("alg3".parse::<CountMethod>(), Err(Error::UnknownMethod("alg3".into())));
        assert_eq!("hat-b".parse::<CountMethod>().unwrap(), CountMethod::HatB);
    }

    #[test]
    fn measured_alg2_spot_values() {
        let t = measure_counts(CountMethod::Alg2, 2, 10, 1, 3, 1).unwrap();
        assert_eq!(t, OpTally { adds: 4, muls: 5, divs: 1 });
        let t = measure_counts(CountMethod::Alg2, 5, 10, 3, 3, 2).unwrap();
        assert_eq!(t, predicted_counts(CountMethod::Alg2, 5, 10, 3).unwrap().tally());
    }

    #[test]
    fn measured_hat_single_matches_table() {
        let t = measure_counts(CountMethod::HatSingle, 3, 100, 1, 2, 3).unwrap();
        assert_eq!(t, predicted_counts(CountMethod::HatSingle, 3, 100, 1).unwrap().tally());
    }

    #[test]
    fn hat_needs_enough_observations() {
        assert!(matches!(
            measure_counts(CountMethod::HatA, 5, 5, 1, 1, 0),
            Err(Error::InvalidSparsity { k: 5, max: 4 })
        ));
    }

    #[test]
    fn tables_render() {
        let rows = vec![count_row(CountMethod::Alg2, 2, 10, 1, 1, 0).unwrap()];
        let csv = render_csv(&rows);
        assert!(csv.lines().nth(1).unwrap().starts_with("alg2,2,10,1,4,5,1,4,5,1,true,0"));
        assert!(render_text(&rows).contains("(4, 5, 1)"));
    }
}
