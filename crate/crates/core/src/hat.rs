//! Normal-equation least squares, the classical "hat-matrix" baseline.
//!
//! `XᵀX` and `Xᵀy` are assembled from precomputed inner-product tables, `XᵀX` is
//! triangulated by Gaussian elimination without row exchanges, and the residual
//! `e = y - ŷ` is formed explicitly over all `d` observations. The `d×d` hat matrix
//! itself is never built.
//!
//! With several responders the fitted values can be produced in two orders:
//!
//! * [`HatOrdering::A`]: `X · [(XᵀX)⁻¹ (XᵀY)]`, one solve per responder;
//! * [`HatOrdering::B`]: `[X (XᵀX)⁻¹] · (XᵀY)`, the `d×(k+1)` product formed once per
//!   subset and each `Xᵀy` streamed through it.

use serde::{Deserialize, Serialize};

use crate::{Error, ObservationMatrix, Result, Scalar, Square, EPS_PIV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HatOrdering {
    A,
    B,
}

/// Cached inner products between all columns involved in a search.
#[derive(Debug, Clone, PartialEq)]
pub struct GramTables {
    pub d: usize,
    /// `⟨x_i, x_j⟩` over predictors.
    pub xx: Square<f64>,
    /// `⟨x_i, y_r⟩`, indexed `[r][i]`.
    pub xy: Vec<Vec<f64>>,
    /// `⟨1, x_i⟩`.
    pub one_x: Vec<f64>,
    /// `⟨1, y_r⟩`.
    pub one_y: Vec<f64>,
    /// `⟨y_r, y_r⟩`.
    pub yy: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (&u, &v)| acc + u * v)
}

fn sum(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |acc, &v| acc + v)
}

pub fn gram_products(
    data: &ObservationMatrix,
    predictors: &[usize],
    responders: &[usize],
) -> Result<GramTables> {
    let xs = predictors
        .iter()
        .map(|&c| data.column(c))
        .collect::<Result<Vec<_>>>()?;
    let ys = responders
        .iter()
        .map(|&c| data.column(c))
        .collect::<Result<Vec<_>>>()?;
    let n = xs.len();
    let mut xx = Square::filled(n, 0.0);
    for i in 0..n {
        for j in i..n {
            let v = dot(xs[i], xs[j]);
            xx[(i, j)] = v;
            xx[(j, i)] = v;
        }
    }
    Ok(GramTables {
        d: data.d(),
        xx,
        xy: ys
            .iter()
            .map(|y| xs.iter().map(|x| dot(x, y)).collect())
            .collect(),
        one_x: xs.iter().map(|x| sum(x)).collect(),
        one_y: ys.iter().map(|y| sum(y)).collect(),
        yy: ys.iter().map(|y| dot(y, y)).collect(),
    })
}

impl GramTables {
    /// `XᵀX` for `X = [1, x_subset...]`, by table lookup.
    pub fn xtx<S: Scalar>(&self, subset: &[usize]) -> Square<S> {
        Square::from_fn(subset.len() + 1, |i, j| {
            let v = match (i, j) {
                (0, 0) => self.d as f64,
                (0, j) => self.one_x[subset[j - 1]],
                (i, 0) => self.one_x[subset[i - 1]],
                (i, j) => self.xx[(subset[i - 1], subset[j - 1])],
            };
            S::from_f64(v)
        })
    }

    /// `Xᵀy_r` for `X = [1, x_subset...]`, by table lookup.
    pub fn xty_into<S: Scalar>(&self, subset: &[usize], responder: usize, out: &mut Vec<S>) {
        out.clear();
        out.push(S::from_f64(self.one_y[responder]));
        out.extend(subset.iter().map(|&i| S::from_f64(self.xy[responder][i])));
    }

    pub fn xty<S: Scalar>(&self, subset: &[usize], responder: usize) -> Vec<S> {
        let mut out = Vec::with_capacity(subset.len() + 1);
        self.xty_into(subset, responder, &mut out);
        out
    }
}

/// `X = [1, x_1, ..., x_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    ones: Vec<f64>,
    predictors: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn new(predictors: Vec<Vec<f64>>) -> Result<Self> {
        let d = predictors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Dimension("design matrix needs a predictor".into()))?;
        if predictors.iter().any(|c| c.len() != d) {
            return Err(Error::Dimension("predictor columns differ in length".into()));
        }
        if predictors.len() + 1 > d {
            return Err(Error::InvalidSparsity {
                k: predictors.len(),
                max: d.saturating_sub(1),
            });
        }
        Ok(Self {
            ones: vec![1.0; d],
            predictors,
        })
    }

    pub fn from_data(data: &ObservationMatrix, cols: &[usize]) -> Result<Self> {
        let predictors = cols
            .iter()
            .map(|&c| data.column(c).map(<[f64]>::to_vec))
            .collect::<Result<Vec<_>>>()?;
        Self::new(predictors)
    }

    pub fn d(&self) -> usize {
        self.ones.len()
    }

    pub fn k(&self) -> usize {
        self.predictors.len()
    }

    /// All `k + 1` columns, the ones column first.
    pub fn columns(&self) -> Vec<&[f64]> {
        std::iter::once(self.ones.as_slice())
            .chain(self.predictors.iter().map(Vec::as_slice))
            .collect()
    }

    pub fn gram(&self) -> Square<f64> {
        let cols = self.columns();
        Square::from_fn(cols.len(), |i, j| dot(cols[i], cols[j]))
    }

    pub fn xty(&self, y: &[f64]) -> Vec<f64> {
        self.columns().iter().map(|c| dot(c, y)).collect()
    }
}

/// Triangulated `XᵀX`: the upper triangle holds the eliminated rows, the strict
/// lower triangle the row multipliers, and `recip` the pivot reciprocals.
#[derive(Debug, Clone)]
pub struct NormalFactor<S> {
    lu: Square<S>,
    recip: Vec<S>,
}

/// Gaussian elimination of a symmetric `XᵀX` without row exchanges.
///
/// A pivot is rejected when it falls below `EPS_PIV` relative to the same diagonal
/// entry after centering (elimination by the ones row), which matches the
/// correlation-matrix pivot test on the same subset.
pub fn factor_kernel<S: Scalar>(mut a: Square<S>) -> Result<NormalFactor<S>> {
    let n = a.dim();
    let mut base = vec![1.0; n];
    let mut recip = vec![S::one(); n];
    for i in 0..n {
        let piv = a[(i, i)].to_f64();
        if i == 0 {
            if !(piv.abs() > 0.0) {
                return Err(Error::SingularMatrix { pivot: 0, value: piv });
            }
            base[0] = piv;
        }
        let ratio = piv / base[i];
        if !(base[i] > 0.0 && ratio.abs() >= EPS_PIV) {
            return Err(Error::SingularMatrix { pivot: i, value: ratio });
        }
        recip[i] = S::one() / a[(i, i)];
        for j in i + 1..n {
            let temp = a[(i, j)] * recip[i];
            a[(j, i)] = temp;
            for p in j..n {
                a[(j, p)] = a[(j, p)] - a[(i, p)] * temp;
            }
        }
        if i == 0 {
            for (j, b) in base.iter_mut().enumerate().skip(1) {
                *b = a[(j, j)].to_f64();
            }
        }
    }
    Ok(NormalFactor { lu: a, recip })
}

impl<S: Scalar> NormalFactor<S> {
    pub fn dim(&self) -> usize {
        self.recip.len()
    }

    /// Solves `XᵀX x = rhs`; `rhs` is overwritten by the forward pass.
    pub fn solve_into(&self, rhs: &mut [S], x: &mut [S]) {
        let n = self.dim();
        for i in 0..n {
            for j in i + 1..n {
                rhs[j] = rhs[j] - self.lu[(j, i)] * rhs[i];
            }
        }
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for p in i + 1..n {
                acc = acc - self.lu[(i, p)] * x[p];
            }
            x[i] = acc * self.recip[i];
        }
    }

    pub fn solve(&self, rhs: &[S]) -> Vec<S> {
        let mut work = rhs.to_vec();
        let mut x = vec![S::zero(); rhs.len()];
        self.solve_into(&mut work, &mut x);
        x
    }
}

/// `Σ_t (y_t - Σ_c cols[c][t]·coef[c])²`, optionally keeping the residuals.
pub fn residual_kernel<S: Scalar>(
    cols: &[&[S]],
    coef: &[S],
    y: &[S],
    mut residual: Option<&mut Vec<S>>,
) -> S {
    let mut sse = S::zero();
    for (t, &yt) in y.iter().enumerate() {
        let mut fit = S::zero();
        for (col, &c) in cols.iter().zip(coef) {
            fit = fit + col[t] * c;
        }
        let e = yt - fit;
        if let Some(r) = residual.as_deref_mut() {
            r.push(e);
        }
        sse = sse + e * e;
    }
    sse
}

/// Rows of `X (XᵀX)⁻¹`, row-major `d × (k+1)` into `h`.
pub fn hat_rows_kernel<S: Scalar>(factor: &NormalFactor<S>, cols: &[&[S]], h: &mut Vec<S>) {
    let n = factor.dim();
    let d = cols[0].len();
    h.clear();
    h.resize(d * n, S::zero());
    let mut rhs = vec![S::zero(); n];
    for t in 0..d {
        for (c, col) in cols.iter().enumerate() {
            rhs[c] = col[t];
        }
        factor.solve_into(&mut rhs, &mut h[t * n..(t + 1) * n]);
    }
}

/// Per-subset scratch for [`score_subset_hat`].
#[derive(Debug, Default)]
pub struct HatScratch<S> {
    rhs: Vec<S>,
    beta: Vec<S>,
    h: Vec<S>,
}

impl<S: Scalar> HatScratch<S> {
    pub fn new() -> Self {
        Self {
            rhs: Vec::new(),
            beta: Vec::new(),
            h: Vec::new(),
        }
    }
}

/// Residual sum of squares of every responder on one subset.
///
/// `cols` are the design columns (ones first); `xtys` holds the assembled `Xᵀy_r`
/// back to back (stride `k + 1`).
pub fn score_subset_hat<S: Scalar>(
    xtx: Square<S>,
    xtys: &[S],
    cols: &[&[S]],
    ys: &[&[S]],
    ordering: HatOrdering,
    scratch: &mut HatScratch<S>,
    sse: &mut [S],
) -> Result<()> {
    let factor = factor_kernel(xtx)?;
    let n = factor.dim();
    match ordering {
        HatOrdering::A => {
            scratch.beta.resize(n, S::zero());
            for ((xty, y), out) in xtys.chunks_exact(n).zip(ys).zip(sse.iter_mut()) {
                scratch.rhs.clear();
                scratch.rhs.extend_from_slice(xty);
                factor.solve_into(&mut scratch.rhs, &mut scratch.beta);
                *out = residual_kernel(cols, &scratch.beta, y, None);
            }
        }
        HatOrdering::B => {
            hat_rows_kernel(&factor, cols, &mut scratch.h);
            for ((xty, y), out) in xtys.chunks_exact(n).zip(ys).zip(sse.iter_mut()) {
                let mut acc = S::zero();
                for (t, &yt) in y.iter().enumerate() {
                    let row = &scratch.h[t * n..(t + 1) * n];
                    let mut fit = S::zero();
                    for (&hv, &q) in row.iter().zip(xty.iter()) {
                        fit = fit + hv * q;
                    }
                    let e = yt - fit;
                    acc = acc + e * e;
                }
                *out = acc;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// `β̂₀, β̂₁, ..., β̂_k`.
    pub beta_hat: Vec<f64>,
    pub residual: Vec<f64>,
    /// `‖e‖² / d`.
    pub mse: f64,
}

pub fn fit_single(x: &DesignMatrix, y: &[f64]) -> Result<FitResult> {
    Ok(fit_multi(x, &[y], HatOrdering::A)?.remove(0))
}

pub fn fit_multi(x: &DesignMatrix, responders: &[&[f64]], ordering: HatOrdering) -> Result<Vec<FitResult>> {
    if let Some(bad) = responders.iter().find(|y| y.len() != x.d()) {
        return Err(Error::Dimension(format!(
            "responder has {} values, design has {} rows",
            bad.len(),
            x.d()
        )));
    }
    let cols = x.columns();
    let factor = factor_kernel(x.gram())?;
    let d = x.d() as f64;
    match ordering {
        HatOrdering::A => Ok(responders
            .iter()
            .map(|y| {
                let beta_hat = factor.solve(&x.xty(y));
                let mut residual = Vec::with_capacity(y.len());
                let sse = residual_kernel(&cols, &beta_hat, y, Some(&mut residual));
                FitResult {
                    beta_hat,
                    residual,
                    mse: sse / d,
                }
            })
            .collect()),
        HatOrdering::B => {
            let n = factor.dim();
            let mut h = Vec::new();
            hat_rows_kernel(&factor, &cols, &mut h);
            Ok(responders
                .iter()
                .map(|y| {
                    let xty = x.xty(y);
                    let residual: Vec<f64> = y
                        .iter()
                        .enumerate()
                        .map(|(t, &yt)| yt - dot(&h[t * n..(t + 1) * n], &xty))
                        .collect();
                    let sse = residual.iter().fold(0.0, |acc, e| acc + e * e);
                    FitResult {
                        beta_hat: factor.solve(&xty),
                        residual,
                        mse: sse / d,
                    }
                })
                .collect())
        }
    }
}
