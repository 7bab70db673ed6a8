//! Total logratio variance.
//!
//! Two equivalent routes are provided: the weighted sum over all
//! `J(J-1)/2` pairwise logratio variances, and the weighted sum of the `J`
//! centred-logratio variances. Variances divide by the number of samples `I`,
//! never `I - 1`.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::composition::{CompositionMatrix, PartWeights};
use crate::error::{CodaError, Result};
use crate::scalar::{compensated_sum, count, lit, Scalar};

/// Population variance `(1/I) Σ (v_i - mean)²`.
pub fn variance_population<T: Scalar>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(CodaError::Shape("variance of an empty vector".into()));
    }
    let n = count::<T>(values.len());
    let mean = compensated_sum(values.iter().copied()) / n;
    Ok(compensated_sum(values.iter().map(|&v| (v - mean) * (v - mean))) / n)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMethod {
    /// Weighted sum over all pairwise logratio variances.
    Pairs,
    /// Weighted sum of centred logratio variances.
    #[default]
    Clr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairVariance<T> {
    pub numerator: usize,
    pub denominator: usize,
    pub variance: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport<T> {
    pub total: T,
    pub method: VarianceMethod,
    /// Variance of each centred logratio. Filled by both methods.
    pub per_clr: Vec<T>,
    /// Variance of every pairwise logratio `j < k`; only for [`VarianceMethod::Pairs`].
    pub per_pair: Option<Vec<PairVariance<T>>>,
    pub weights_used: PartWeights<T>,
    pub n_samples: usize,
}

/// Serializable form of a [`VarianceReport`], keyed by part names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceDocument {
    pub total: f64,
    pub method: VarianceMethod,
    pub n_samples: usize,
    pub n_parts: usize,
    pub per_clr: IndexMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_pair: Option<IndexMap<String, f64>>,
    pub weights: IndexMap<String, f64>,
}

impl<T: Scalar> VarianceReport<T> {
    pub fn to_document(&self, part_names: &[String]) -> VarianceDocument {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        VarianceDocument {
            total: f(self.total),
            method: self.method,
            n_samples: self.n_samples,
            n_parts: part_names.len(),
            per_clr: part_names.iter().cloned().zip(self.per_clr.iter().map(|&v| f(v))).collect(),
            per_pair: self.per_pair.as_ref().map(|pairs| {
                pairs
                    .iter()
                    .map(|p| {
                        (
                            format!("{}/{}", part_names[p.numerator], part_names[p.denominator]),
                            f(p.variance),
                        )
                    })
                    .collect()
            }),
            weights: part_names
                .iter()
                .cloned()
                .zip(self.weights_used.as_slice().iter().map(|&c| f(c)))
                .collect(),
        }
    }
}

/// Total (weighted) logratio variance of a strictly positive composition.
pub fn total_logratio_variance<T: Scalar>(
    m: &CompositionMatrix<T>,
    weights: &PartWeights<T>,
    method: VarianceMethod,
) -> Result<VarianceReport<T>> {
    let clr = m.clr_matrix(weights)?;
    let per_clr = clr
        .columns()
        .iter()
        .map(|c| variance_population(c))
        .collect::<Result<Vec<_>>>()?;
    let c = weights.as_slice();

    let (total, per_pair) = match method {
        VarianceMethod::Clr => (compensated_sum(per_clr.iter().zip(c).map(|(&v, &w)| w * v)), None),
        VarianceMethod::Pairs => {
            let logs = m.values().map(T::ln);
            let columns = logs.columns();
            let parts = m.n_parts();
            let mut pairs = Vec::with_capacity(parts * parts.saturating_sub(1) / 2);
            for j in 0..parts {
                for k in (j + 1)..parts {
                    let plr: Vec<T> = columns[j].iter().zip(&columns[k]).map(|(&a, &b)| a - b).collect();
                    pairs.push(PairVariance {
                        numerator: j,
                        denominator: k,
                        variance: variance_population(&plr)?,
                    });
                }
            }
            let total = compensated_sum(pairs.iter().map(|p| c[p.numerator] * c[p.denominator] * p.variance));
            (total, Some(pairs))
        }
    };

    Ok(VarianceReport {
        total,
        method,
        per_clr,
        per_pair,
        weights_used: weights.clone(),
        n_samples: m.n_samples(),
    })
}

/// `100 × explained / total`.
pub fn explained_percentage<T: Scalar>(explained: T, report: &VarianceReport<T>) -> Result<T> {
    percentage_of(explained, report.total)
}

pub(crate) fn percentage_of<T: Scalar>(explained: T, total: T) -> Result<T> {
    if !(total > T::zero()) {
        return Err(CodaError::Degenerate("total logratio variance is zero".into()));
    }
    let slack = lit::<T>(1e-9) * total;
    if explained < -slack || explained > total + slack {
        return Err(CodaError::Shape(format!(
            "explained variance {explained} outside [0, {total}]"
        )));
    }
    Ok(lit::<T>(100.0) * explained / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn population_variance_examples() {
        assert_eq!(variance_population(&[0.0, -2.0]).unwrap(), 1.0);
        assert_eq!(variance_population(&[4.2; 5]).unwrap(), 0.0);
        assert!((variance_population(&[1.0_f64, 2.0, 3.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(variance_population::<f64>(&[]).is_err());
    }

    #[test]
    fn toy_fixture_both_methods() {
        let m = CompositionMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, E * E]]).unwrap();
        let w = PartWeights::uniform(2);
        let pairs = total_logratio_variance(&m, &w, VarianceMethod::Pairs).unwrap();
        let clr = total_logratio_variance(&m, &w, VarianceMethod::Clr).unwrap();
        assert!((pairs.total - 0.25).abs() < 1e-12);
        assert!((clr.total - 0.25).abs() < 1e-12);
        assert_eq!(pairs.per_pair.as_ref().unwrap().len(), 1);
        assert!((pairs.per_pair.unwrap()[0].variance - 1.0).abs() < 1e-12);
        assert!(clr.per_pair.is_none());
        for v in clr.per_clr {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_rows_have_zero_variance() {
        let m = CompositionMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        let r = total_logratio_variance(&m, &PartWeights::uniform(3), VarianceMethod::Pairs).unwrap();
        assert_eq!(r.total, 0.0);
        assert!(explained_percentage(0.0, &r).unwrap_err().is_numerical());
    }

    #[test]
    fn percentage_bounds() {
        let m = CompositionMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, E * E]]).unwrap();
        let r = total_logratio_variance(&m, &PartWeights::uniform(2), VarianceMethod::Clr).unwrap();
        assert!((explained_percentage(r.total, &r).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(explained_percentage(0.0, &r).unwrap(), 0.0);
        assert!(explained_percentage(2.0 * r.total, &r).is_err());
    }

    #[test]
    fn pair_count_and_document_keys() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| (0..5).map(|j| 1.0 + ((i * 5 + j) % 7) as f64).collect()).collect();
        let m = CompositionMatrix::from_rows(&rows).unwrap();
        let r = total_logratio_variance(&m, &PartWeights::uniform(5), VarianceMethod::Pairs).unwrap();
        let doc = r.to_document(m.part_names());
        let pairs = doc.per_pair.unwrap();
        assert_eq!(pairs.len(), 10);
        assert!(pairs.contains_key("p1/p2"));
        assert_eq!(doc.per_clr.len(), 5);
    }
}
