//! Explained variance by multivariate regression, low-rank ordination and
//! plotting coordinates.

mod hull;
mod pca;
mod regression;
mod ternary;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use hull::{convex_hull, convex_polygons_overlap};
pub use pca::{lra, pca_of_logratios, BiplotScaling, GroupHull, OrdinationResult, PcaOptions};
pub use regression::{explained_variance, ExplainedVarianceModel, RegressionFit, RANK_TOLERANCE};
pub use ternary::ternary_coords;

use crate::error::Result;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn dim_names(d: usize) -> Vec<String> {
    (1..=d).map(|k| format!("dim{k}")).collect()
}

fn keyed<T: Scalar>(names: &[String], row: &[T]) -> IndexMap<String, f64> {
    names.iter().cloned().zip(row.iter().map(|&x| to_f64(x))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDocument {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub group: Option<String>,
    pub coords: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinationDocument {
    pub dimensions: Vec<String>,
    pub dim_variances: IndexMap<String, f64>,
    pub dim_percentages: IndexMap<String, f64>,
    pub total_variance: f64,
    pub scaling: BiplotScaling,
    pub rows: Vec<PointDocument>,
    pub variables: Vec<PointDocument>,
    pub hulls: Vec<GroupHull>,
}

impl<T: Scalar> OrdinationResult<T> {
    pub fn to_document(&self) -> OrdinationDocument {
        let dims = dim_names(self.dimensions());
        let rows = (0..self.row_coords.nrows())
            .map(|i| PointDocument {
                label: self.row_labels[i].clone(),
                group: self.groups.as_ref().map(|g| g[i].clone()),
                coords: keyed(&dims, self.row_coords.row(i)),
            })
            .collect();
        let variables = (0..self.col_coords.nrows())
            .map(|j| PointDocument {
                label: self.variables[j].clone(),
                group: None,
                coords: keyed(&dims, self.col_coords.row(j)),
            })
            .collect();
        OrdinationDocument {
            dim_variances: keyed(&dims, &self.dim_variances),
            dim_percentages: keyed(&dims, &self.dim_percentages),
            dimensions: dims,
            total_variance: to_f64(self.total_variance),
            scaling: self.scaling,
            rows,
            variables,
            hulls: self.hulls.clone(),
        }
    }

    /// Sample coordinates as CSV: `label,group,dim1..dimD`.
    pub fn rows_csv(&self) -> Result<String> {
        coordinates_csv(&self.row_labels, self.groups.as_deref(), &self.row_coords)
    }
}

/// Writes coordinates as CSV with columns `label,group,dim1..dimD`, using the
/// shortest representation that round-trips each value.
pub fn coordinates_csv<T: Scalar>(labels: &[String], groups: Option<&[String]>, coords: &Matrix<T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["label".to_string(), "group".to_string()];
    header.extend(dim_names(coords.ncols()));
    w.write_record(&header)?;
    for (i, label) in labels.iter().enumerate() {
        let mut rec = vec![label.clone(), groups.map_or_else(String::new, |g| g[i].clone())];
        rec.extend(coords.row(i).iter().map(|&x| format!("{}", to_f64(x))));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Serializable summary of a [`RegressionFit`], keyed by names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDocument {
    pub predictors: Vec<String>,
    pub intercepts: IndexMap<String, f64>,
    /// Per predictor, coefficients keyed by response part.
    pub coefficients: IndexMap<String, IndexMap<String, f64>>,
    pub fitted_variance: f64,
    pub residual_variance: f64,
    pub total_variance: f64,
    pub explained_fraction: f64,
    pub explained_pct: f64,
    pub rank: usize,
    pub warnings: Vec<String>,
}

impl<T: Scalar> RegressionFit<T> {
    pub fn to_document(&self, predictor_names: &[String], part_names: &[String]) -> RegressionDocument {
        RegressionDocument {
            predictors: predictor_names.to_vec(),
            intercepts: keyed(part_names, &self.intercepts),
            coefficients: predictor_names
                .iter()
                .enumerate()
                .map(|(p, name)| (name.clone(), keyed(part_names, self.coefficients.row(p))))
                .collect(),
            fitted_variance: to_f64(self.fitted_variance),
            residual_variance: to_f64(self.residual_variance),
            total_variance: to_f64(self.total_variance),
            explained_fraction: to_f64(self.explained_fraction),
            explained_pct: 100.0 * to_f64(self.explained_fraction),
            rank: self.rank,
            warnings: self.warnings.clone(),
        }
    }
}
