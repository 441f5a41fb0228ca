//! Conditional uncorrelation kernels.
//!
//! For predictors `x_1..x_k` and a responder `y` with correlation matrices `R_x`
//! and `R_xy = [[R_x, ρ_y], [ρ_yᵀ, 1]]`, the squared conditional uncorrelation is
//! `ω²(y | x) = det(R_xy) / det(R_x)` and the least-squares error of `y` on `x`
//! (with intercept) is `σ_y² · ω²(y | x)`.
//!
//! Two triangulation schedules compute `ω²` without any regression coefficients:
//!
//! * [`algorithm1`] eliminates the full `(k+1)×(k+1)` matrix in place; its last
//!   diagonal entry is `ω²`.
//! * [`precompute_triangular`] eliminates `R_x` once into a unit upper-triangular
//!   factor plus pivot reciprocals; [`conditional_uuc`] then needs only a forward
//!   recursion over `ρ_y` per responder.
//!
//! Neither schedule exchanges rows, and both touch only the upper triangle. The
//! `*_kernel` functions are generic over [`Scalar`] so that operation counts can be
//! measured on exactly the code that runs in production.

use serde::{Deserialize, Serialize};

use crate::matrix::gauss_solve;
use crate::{CorrelationMatrix, Error, Result, Scalar, Square, EPS_NUM, EPS_PIV};

#[inline]
fn check_pivot<S: Scalar>(value: S, pivot: usize) -> Result<()> {
    let v = value.to_f64();
    if v.abs() >= EPS_PIV {
        Ok(())
    } else {
        Err(Error::SingularMatrix { pivot, value: v })
    }
}

/// Maps a raw `ω²` into `[0, 1]`, absorbing rounding of at most `EPS_NUM`.
pub fn clamp_omega(raw: f64) -> Result<f64> {
    if !raw.is_finite() {
        return Err(Error::InternalNumeric(format!("ω² = {raw}")));
    }
    if !(-EPS_NUM..=1.0 + EPS_NUM).contains(&raw) {
        return Err(Error::InternalNumeric(format!("ω² = {raw:e} outside [0, 1]")));
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// Squared unsigned uncorrelation coefficient `ω² = det(R)`.
pub fn uuc_squared(r: &CorrelationMatrix) -> Result<f64> {
    let mut m = r.as_square().clone();
    let q = m.dim();
    let mut det = 1.0;
    for i in 0..q {
        check_pivot(m[(i, i)], i)?;
        det *= m[(i, i)];
        let recip = 1.0 / m[(i, i)];
        for j in i + 1..q {
            let temp = m[(i, j)] * recip;
            for p in j..q {
                m[(j, p)] -= m[(i, p)] * temp;
            }
        }
    }
    Ok(det)
}

/// In-place triangulation of a `(k+1)×(k+1)` matrix whose last row and column hold
/// the responder; returns the final diagonal entry.
///
/// Only the upper triangle is read or written; `r[(i, j)]` stands in for `r[(j, i)]`.
pub fn algorithm1_kernel<S: Scalar>(r: &mut Square<S>) -> Result<S> {
    let last = r.dim() - 1;
    for i in 0..last {
        check_pivot(r[(i, i)], i)?;
        let recip = S::one() / r[(i, i)];
        for j in i + 1..=last {
            let temp = r[(i, j)] * recip;
            for p in j..=last {
                r[(j, p)] = r[(j, p)] - r[(i, p)] * temp;
            }
        }
    }
    Ok(r[(last, last)])
}

/// `ω²(y | x_1..x_k)` from the stacked correlation matrix, by full triangulation.
pub fn algorithm1(r_xy: CorrelationMatrix) -> Result<f64> {
    if r_xy.dim() < 2 {
        return Err(Error::Dimension("R_xy needs at least one predictor".into()));
    }
    let mut m = r_xy.into_square();
    clamp_omega(algorithm1_kernel(&mut m)?)
}

/// Responder-independent factor of `R_x`.
///
/// `r_t` is unit upper triangular; its strictly upper entries are the scaled
/// elimination rows (row 0 is the first row of `R_x` itself). `eta[i]` is the
/// reciprocal of the `i`th pivot, with `eta[0] = 1` because the first pivot of a
/// correlation matrix is always 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangularCache<S = f64> {
    pub r_t: Square<S>,
    pub eta: Vec<S>,
}

impl<S: Scalar> TriangularCache<S> {
    pub fn k(&self) -> usize {
        self.eta.len()
    }
}

/// Factors `r_x` (destroying its upper triangle) into a [`TriangularCache`].
pub fn precompute_kernel<S: Scalar>(r_x: &mut Square<S>) -> Result<TriangularCache<S>> {
    let k = r_x.dim();
    let mut r_t = Square::from_fn(k, |i, j| {
        if i == j {
            S::one()
        } else if i == 0 && j > 0 {
            r_x[(0, j)]
        } else {
            S::zero()
        }
    });
    let mut eta = vec![S::one(); k];
    for i in 0..k {
        if i != 0 {
            check_pivot(r_x[(i, i)], i)?;
            let recip = S::one() / r_x[(i, i)];
            eta[i] = recip;
            for p in i + 1..k {
                r_t[(i, p)] = r_x[(i, p)] * recip;
            }
        }
        for j in i + 1..k {
            let temp = r_x[(i, j)];
            for p in j..k {
                r_x[(j, p)] = r_x[(j, p)] - r_t[(i, p)] * temp;
            }
        }
    }
    Ok(TriangularCache { r_t, eta })
}

/// Builds the reusable factor for one predictor subset. `r_x` itself is untouched.
pub fn precompute_triangular(r_x: &CorrelationMatrix) -> Result<TriangularCache> {
    if r_x.dim() == 0 {
        return Err(Error::Dimension("R_x must have at least one predictor".into()));
    }
    let mut scratch = r_x.as_square().clone();
    precompute_kernel(&mut scratch)
}

/// Forward recursion `b_i = ρ_iy - Σ_{j<i} a_ji b_j`, `ω² = 1 - Σ b_j² η_j`.
///
/// Writes `b` and returns the unclamped `ω²`.
pub fn conditional_kernel<S: Scalar>(cache: &TriangularCache<S>, rho_y: &[S], b: &mut [S]) -> S {
    let k = cache.k();
    let mut omega = S::one() - rho_y[0] * rho_y[0];
    b[0] = rho_y[0];
    for i in 1..k {
        let mut t = rho_y[i];
        for j in 0..i {
            t = t - b[j] * cache.r_t[(j, i)];
        }
        b[i] = t;
        omega = omega - t * t * cache.eta[i];
    }
    omega
}

/// Scores one subset for `m` responders: one factorization of `r_x`, then one
/// recursion per responder. `rhos` holds the responder correlation vectors
/// back to back (stride `k`); raw `ω²` values go to `out`.
pub fn score_subset_alg2<S: Scalar>(
    r_x: &mut Square<S>,
    rhos: &[S],
    b: &mut [S],
    out: &mut [S],
) -> Result<()> {
    let cache = precompute_kernel(r_x)?;
    for (rho, o) in rhos.chunks_exact(cache.k()).zip(out.iter_mut()) {
        *o = conditional_kernel(&cache, rho, b);
    }
    Ok(())
}

/// Scores one subset for `m` responders by running the full triangulation once
/// per responder on a `(k+1)×(k+1)` scratch matrix.
pub fn score_subset_alg1<S: Scalar>(
    r_x: &Square<S>,
    rhos: &[S],
    scratch: &mut Square<S>,
    out: &mut [S],
) -> Result<()> {
    let k = r_x.dim();
    for (rho, o) in rhos.chunks_exact(k).zip(out.iter_mut()) {
        for i in 0..k {
            for j in i..k {
                scratch[(i, j)] = r_x[(i, j)];
            }
            scratch[(i, k)] = rho[i];
        }
        scratch[(k, k)] = S::one();
        *o = algorithm1_kernel(scratch)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalUuc {
    pub omega_sq: f64,
    pub b: Vec<f64>,
}

pub fn conditional_uuc(cache: &TriangularCache, rho_y: &[f64]) -> Result<ConditionalUuc> {
    if rho_y.len() != cache.k() {
        return Err(Error::Dimension(format!(
            "ρ_y has {} entries, cache has k = {}",
            rho_y.len(),
            cache.k()
        )));
    }
    let mut b = vec![0.0; rho_y.len()];
    let raw = conditional_kernel(cache, rho_y, &mut b);
    Ok(ConditionalUuc {
        omega_sq: clamp_omega(raw)?,
        b,
    })
}

/// `MSE = σ_y² · ω²(y | x)`.
#[inline]
pub fn mse_from_uuc(sigma_y_sq: f64, omega_sq_cond: f64) -> f64 {
    sigma_y_sq * omega_sq_cond
}

/// Coefficient of multiple determination, `R² = 1 - ω²(y | x)`.
#[inline]
pub fn r_squared(omega_sq_cond: f64) -> f64 {
    1.0 - omega_sq_cond
}

/// Offset and slopes of a fitted linear model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionCoefficients {
    pub beta0: f64,
    pub betas: Vec<f64>,
}

impl RegressionCoefficients {
    /// `ŷ_t = β₀ + Σ β_i x_i[t]` for predictor columns `xs`.
    pub fn fitted(&self, xs: &[&[f64]]) -> Vec<f64> {
        let d = xs.first().map_or(0, |c| c.len());
        (0..d)
            .map(|t| {
                self.betas
                    .iter()
                    .zip(xs)
                    .fold(self.beta0, |acc, (b, col)| acc + b * col[t])
            })
            .collect()
    }
}

/// Recovers regression coefficients from correlations:
/// `σ_i β_i = σ_y (R_x⁻¹ ρ_y)_i` and `β₀ = μ_y - Σ β_i μ_i`.
pub fn coefficients(
    r_x: &CorrelationMatrix,
    rho_y: &[f64],
    sigma_y: f64,
    sigmas: &[f64],
    mu_y: f64,
    mus: &[f64],
) -> Result<RegressionCoefficients> {
    let k = r_x.dim();
    if rho_y.len() != k || sigmas.len() != k || mus.len() != k {
        return Err(Error::Dimension(format!(
            "coefficient inputs must all have length k = {k}"
        )));
    }
    let s = gauss_solve(r_x.as_square().clone(), rho_y.to_vec(), EPS_PIV)?;
    let betas: Vec<f64> = s
        .iter()
        .zip(sigmas)
        .map(|(&si, &sigma)| sigma_y / sigma * si)
        .collect();
    let beta0 = betas
        .iter()
        .zip(mus)
        .fold(mu_y, |acc, (&b, &mu)| acc - b * mu);
    Ok(RegressionCoefficients { beta0, betas })
}
