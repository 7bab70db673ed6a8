//! Independent reference computations and random instances.
//!
//! Nothing here calls the crate's numerical routines: logratios are formed
//! from raw values and least squares goes through nalgebra's SVD.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Strictly positive `rows × cols` values spread over several orders of magnitude.
pub fn positive_rows(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| 10f64.powf(rng.gen_range(-2.0..2.0))).collect())
        .collect()
}

/// Random positive weights summing to one.
pub fn random_weights(rng: &mut ChaCha8Rng, cols: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w / s).collect()
}

pub fn uniform(cols: usize) -> Vec<f64> {
    vec![1.0 / cols as f64; cols]
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

/// `Σ_{j<k} c_j c_k var(ln x_j / x_k)`.
pub fn total_by_pairs(rows: &[Vec<f64>], w: &[f64]) -> f64 {
    let j = w.len();
    let mut t = 0.0;
    for a in 0..j {
        for b in a + 1..j {
            let plr: Vec<f64> = rows.iter().map(|r| (r[a] / r[b]).ln()).collect();
            t += w[a] * w[b] * var(&plr);
        }
    }
    t
}

/// Weighted centred logratios, one vector per part.
pub fn clr_columns(rows: &[Vec<f64>], w: &[f64]) -> Vec<Vec<f64>> {
    let centre: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(w).map(|(x, c)| c * x.ln()).sum())
        .collect();
    (0..w.len())
        .map(|j| rows.iter().zip(&centre).map(|(r, g)| r[j].ln() - g).collect())
        .collect()
}

/// `ln(Σ_num x / Σ_den x)` per row.
pub fn slr(rows: &[Vec<f64>], num: &[usize], den: &[usize]) -> Vec<f64> {
    rows.iter()
        .map(|r| (num.iter().map(|&j| r[j]).sum::<f64>() / den.iter().map(|&j| r[j]).sum::<f64>()).ln())
        .collect()
}

/// Explained fraction from `J` separate multiple regressions of each
/// centred logratio on the predictors, each solved by nalgebra's SVD.
pub fn explained_by_separate_regressions(rows: &[Vec<f64>], w: &[f64], predictors: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let responses = clr_columns(rows, w);
    let total: f64 = responses.iter().zip(w).map(|(y, c)| c * var(y)).sum();
    if predictors.is_empty() {
        return 0.0;
    }
    // intercept column plus raw predictors
    let x = DMatrix::from_fn(n, predictors.len() + 1, |i, p| if p == 0 { 1.0 } else { predictors[p - 1][i] });
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let mut fitted_total = 0.0;
    for (y, c) in responses.iter().zip(w) {
        let beta = svd.solve(&DVector::from_column_slice(y), 1e-10 * smax).expect("svd solve");
        let fitted = &x * beta;
        fitted_total += c * var(fitted.as_slice());
    }
    fitted_total / total
}

/// Names `p1..pJ`.
pub fn part_names(j: usize) -> Vec<String> {
    (1..=j).map(|k| format!("p{k}")).collect()
}
