//! Explained logratio variance by multivariate least squares.
//!
//! The responses are the `J` centred logratios, each regressed with an
//! intercept on the same set of logratio predictors. Fitted variance is
//! accumulated over responses with the part weights, so the explained
//! fraction is a fraction of total logratio variance. Fitting all responses at
//! once is the same as running `J` separate regressions and summing.
//!
//! Predictors are projected through a rank-revealing SVD of the centred design:
//! singular values below `1e-10 × largest` are treated as zero, so collinear
//! predictors contribute nothing beyond the column space they share.

use log::warn;

use crate::composition::{CompositionMatrix, LogratioSpec, PartWeights};
use crate::error::{CodaError, Result};
use crate::linalg::{svd, Matrix};
use crate::scalar::{compensated_dot, compensated_sum, count, lit, max_abs, variance_noise_floor, Scalar};
use crate::variance::variance_population;

/// Relative singular-value cutoff for the design matrix.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit<T> {
    /// One intercept per response (centred logratio).
    pub intercepts: Vec<T>,
    /// P×J coefficients; dropped or collinear predictors get minimum-norm values.
    pub coefficients: Matrix<T>,
    /// Weighted sum over responses of the fitted-value variances.
    pub fitted_variance: T,
    pub residual_variance: T,
    pub total_variance: T,
    pub explained_fraction: T,
    /// Dimension of the predictor column space.
    pub rank: usize,
    /// Predictors dropped for having zero variance.
    pub dropped: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Centred responses and weights for one composition, reused across many fits.
#[derive(Debug, Clone)]
pub struct ExplainedVarianceModel<'a, T> {
    data: &'a CompositionMatrix<T>,
    weights: Vec<T>,
    response_means: Vec<T>,
    responses: Vec<Vec<T>>,
    total: T,
}

/// Column space of a centred design matrix.
struct Projection<T> {
    basis: Vec<Vec<T>>,
    kept: Vec<usize>,
    dropped: Vec<usize>,
    svd_v: Matrix<T>,
    svd_s: Vec<T>,
    means: Vec<T>,
}

impl<'a, T: Scalar> ExplainedVarianceModel<'a, T> {
    pub fn new(data: &'a CompositionMatrix<T>, weights: &PartWeights<T>) -> Result<Self> {
        let clr = data.clr_matrix(weights)?;
        let response_means = clr.column_means();
        let responses: Vec<Vec<T>> = clr
            .columns()
            .into_iter()
            .zip(&response_means)
            .map(|(col, &mu)| col.into_iter().map(|y| y - mu).collect())
            .collect();
        let c = weights.as_slice().to_vec();
        let total = compensated_sum(
            responses
                .iter()
                .zip(&c)
                .map(|(y, &w)| w * compensated_dot(y, y) / count::<T>(y.len())),
        );
        if !(total > variance_noise_floor(max_abs(clr.as_slice()))) {
            return Err(CodaError::Degenerate(
                "total logratio variance is zero; explained fractions are undefined".into(),
            ));
        }
        Ok(Self {
            data,
            weights: c,
            response_means,
            responses,
            total,
        })
    }

    pub fn total_variance(&self) -> T {
        self.total
    }

    pub fn data(&self) -> &CompositionMatrix<T> {
        self.data
    }

    fn predictor_columns(&self, predictors: &[LogratioSpec]) -> Result<Vec<Vec<T>>> {
        predictors.iter().map(|p| self.data.slr_values(p)).collect()
    }

    fn project(&self, columns: &[Vec<T>]) -> Projection<T> {
        let n = self.data.n_samples();
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        let mut centred = Vec::new();
        let mut means = Vec::with_capacity(columns.len());
        let tiny = lit::<T>(1e3) * T::epsilon();
        for (p, col) in columns.iter().enumerate() {
            let mean = compensated_sum(col.iter().copied()) / count::<T>(n);
            means.push(mean);
            let c: Vec<T> = col.iter().map(|&x| x - mean).collect();
            let scale = col.iter().fold(T::one(), |a, &x| a.max(x.abs()));
            let spread = c.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
            if spread <= tiny * scale {
                dropped.push(p);
            } else {
                kept.push(p);
                centred.push(c);
            }
        }
        if centred.is_empty() {
            return Projection {
                basis: Vec::new(),
                kept,
                dropped,
                svd_v: Matrix::zeros(0, 0),
                svd_s: Vec::new(),
                means,
            };
        }
        let design = Matrix::from_columns(&centred);
        let dec = svd(&design);
        let rank = dec.rank(lit(RANK_TOLERANCE));
        let basis = (0..rank).map(|r| dec.u.column(r)).collect();
        Projection {
            basis,
            kept,
            dropped,
            svd_v: dec.v,
            svd_s: dec.singular_values[..rank].to_vec(),
            means,
        }
    }

    /// Fraction of total logratio variance explained by the predictors.
    pub fn explained_fraction(&self, predictors: &[LogratioSpec]) -> Result<T> {
        let columns = self.predictor_columns(predictors)?;
        Ok(self.explained_fraction_of_columns(&columns))
    }

    /// As [`explained_fraction`](Self::explained_fraction) for precomputed
    /// predictor columns.
    pub fn explained_fraction_of_columns(&self, columns: &[Vec<T>]) -> T {
        let proj = self.project(columns);
        let n = count::<T>(self.data.n_samples());
        let fitted = compensated_sum(self.responses.iter().zip(&self.weights).map(|(y, &w)| {
            let ss = compensated_sum(proj.basis.iter().map(|u| {
                let a = compensated_dot(u, y);
                a * a
            }));
            w * ss / n
        }));
        fitted / self.total
    }

    /// Full least-squares fit with coefficients and variance decomposition.
    pub fn fit(&self, predictors: &[LogratioSpec]) -> Result<RegressionFit<T>> {
        let columns = self.predictor_columns(predictors)?;
        let proj = self.project(&columns);
        let n_obs = self.data.n_samples();
        let p_count = predictors.len();
        let j_count = self.responses.len();

        let mut warnings = Vec::new();
        for &p in &proj.dropped {
            let msg = format!(
                "predictor {} has zero variance and was dropped",
                predictors[p].label(self.data.part_names())
            );
            warn!("{msg}");
            warnings.push(msg);
        }
        let rank = proj.basis.len();
        if rank < proj.kept.len() {
            let msg = format!(
                "predictors are collinear: {} columns span only {rank} dimensions",
                proj.kept.len()
            );
            warn!("{msg}");
            warnings.push(msg);
        }

        let mut coefficients = Matrix::zeros(p_count, j_count);
        let mut intercepts = Vec::with_capacity(j_count);
        let mut fitted_parts = Vec::with_capacity(j_count);
        let mut residual_parts = Vec::with_capacity(j_count);
        for (j, y) in self.responses.iter().enumerate() {
            let scores: Vec<T> = proj.basis.iter().map(|u| compensated_dot(u, y)).collect();
            let fitted: Vec<T> = (0..n_obs)
                .map(|i| compensated_sum(proj.basis.iter().zip(&scores).map(|(u, &a)| u[i] * a)))
                .collect();
            let residual: Vec<T> = y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect();
            fitted_parts.push(self.weights[j] * variance_population(&fitted)?);
            residual_parts.push(self.weights[j] * variance_population(&residual)?);

            // β = V_r S_r⁻¹ (U_rᵀ y), scattered back onto the kept predictors
            for (slot, &p) in proj.kept.iter().enumerate() {
                let beta = compensated_sum(
                    scores
                        .iter()
                        .zip(&proj.svd_s)
                        .enumerate()
                        .map(|(r, (&a, &s))| proj.svd_v.get(slot, r) * a / s),
                );
                coefficients.set(p, j, beta);
            }
            let offset = compensated_sum((0..p_count).map(|p| proj.means[p] * coefficients.get(p, j)));
            intercepts.push(self.response_means[j] - offset);
        }
        let fitted_variance = compensated_sum(fitted_parts);
        let residual_variance = compensated_sum(residual_parts);
        Ok(RegressionFit {
            intercepts,
            coefficients,
            fitted_variance,
            residual_variance,
            total_variance: self.total,
            explained_fraction: fitted_variance / self.total,
            rank,
            dropped: proj.dropped,
            warnings,
        })
    }
}

/// Regresses the centred logratios of `m` on the given logratio predictors.
pub fn explained_variance<T: Scalar>(
    m: &CompositionMatrix<T>,
    weights: &PartWeights<T>,
    predictors: &[LogratioSpec],
) -> Result<RegressionFit<T>> {
    ExplainedVarianceModel::new(m, weights)?.fit(predictors)
}
