//! Logratio analysis (PCA of centred logratios) and PCA of selected logratios.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::hull::convex_hull;
use crate::composition::{CompositionMatrix, NamedLogratio, PartWeights};
use crate::error::{CodaError, Result};
use crate::linalg::{svd, Matrix};
use crate::scalar::{compensated_sum, count, lit, max_abs, variance_noise_floor, Scalar};
use crate::variance::variance_population;

/// Relative singular-value cutoff below which a dimension is considered empty.
const DIMENSION_TOLERANCE: f64 = 1e-10;

/// Which set of points carries the singular values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiplotScaling {
    /// Rows in principal coordinates, variables in standard coordinates.
    #[default]
    RowPrincipal,
    /// Rows in standard coordinates, variables in principal coordinates.
    ColumnPrincipal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupHull {
    pub group: String,
    /// Row indices of hull vertices, counter-clockwise.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrdinationResult<T> {
    /// I×D sample coordinates.
    pub row_coords: Matrix<T>,
    /// V×D variable coordinates.
    pub col_coords: Matrix<T>,
    pub dim_variances: Vec<T>,
    pub dim_percentages: Vec<T>,
    pub total_variance: T,
    pub variables: Vec<String>,
    pub row_labels: Vec<String>,
    pub groups: Option<Vec<String>>,
    /// Convex hull of each group in the first two dimensions.
    pub hulls: Vec<GroupHull>,
    pub scaling: BiplotScaling,
}

impl<T: Scalar> OrdinationResult<T> {
    pub fn dimensions(&self) -> usize {
        self.dim_variances.len()
    }

    /// Sum of the percentages of the first `d` dimensions.
    pub fn percentage_in(&self, d: usize) -> T {
        compensated_sum(self.dim_percentages.iter().take(d).copied())
    }

    /// Points of each group in the first two dimensions (the second is zero
    /// for a one-dimensional solution), ordered as the hull vertices.
    pub fn hull_polygons(&self) -> Vec<(String, Vec<(T, T)>)> {
        self.hulls
            .iter()
            .map(|h| (h.group.clone(), h.vertices.iter().map(|&i| self.planar(i)).collect()))
            .collect()
    }

    fn planar(&self, i: usize) -> (T, T) {
        let y = if self.dimensions() > 1 { self.row_coords.get(i, 1) } else { T::zero() };
        (self.row_coords.get(i, 0), y)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PcaOptions {
    /// Divide each logratio by its standard deviation before the SVD.
    pub standardize: bool,
    pub scaling: BiplotScaling,
}

/// Singular value decomposition of `diag(1/√I) · centred · diag(col_factors)`
/// and conversion to biplot coordinates.
fn ordinate<T: Scalar>(
    centred: &Matrix<T>,
    col_factors: &[T],
    scale: T,
    scaling: BiplotScaling,
    variables: Vec<String>,
    source: RowInfo,
) -> Result<OrdinationResult<T>> {
    let n = centred.nrows();
    let root_n = count::<T>(n).sqrt();
    let scaled = Matrix::from_fn(n, centred.ncols(), |i, j| centred.get(i, j) * col_factors[j] / root_n);
    let dec = svd(&scaled);
    let dims = dec.rank(lit(DIMENSION_TOLERANCE));
    if dims == 0 || dec.singular_values[0] * dec.singular_values[0] <= variance_noise_floor(scale) {
        return Err(CodaError::Degenerate("matrix has no variance to ordinate".into()));
    }
    let all_var: Vec<T> = dec.singular_values.iter().map(|&s| s * s).collect();
    let total = compensated_sum(all_var.iter().copied());
    let dim_variances = all_var[..dims].to_vec();
    let dim_percentages = dim_variances.iter().map(|&v| lit::<T>(100.0) * v / total).collect();

    let mut u = Matrix::zeros(n, dims);
    let mut v = Matrix::zeros(centred.ncols(), dims);
    for d in 0..dims {
        // largest-magnitude loading on each axis is positive
        let mut pivot = 0;
        for j in 0..centred.ncols() {
            if dec.v.get(j, d).abs() > dec.v.get(pivot, d).abs() {
                pivot = j;
            }
        }
        let sign = if dec.v.get(pivot, d) < T::zero() { -T::one() } else { T::one() };
        for i in 0..n {
            u.set(i, d, sign * dec.u.get(i, d));
        }
        for j in 0..centred.ncols() {
            v.set(j, d, sign * dec.v.get(j, d));
        }
    }

    let s = &dec.singular_values;
    let (row_coords, col_coords) = match scaling {
        BiplotScaling::RowPrincipal => (
            Matrix::from_fn(n, dims, |i, d| root_n * u.get(i, d) * s[d]),
            Matrix::from_fn(v.nrows(), dims, |j, d| v.get(j, d) / col_factors[j]),
        ),
        BiplotScaling::ColumnPrincipal => (
            Matrix::from_fn(n, dims, |i, d| root_n * u.get(i, d)),
            Matrix::from_fn(v.nrows(), dims, |j, d| v.get(j, d) * s[d] / col_factors[j]),
        ),
    };

    let mut result = OrdinationResult {
        row_coords,
        col_coords,
        dim_variances,
        dim_percentages,
        total_variance: total,
        variables,
        row_labels: source.labels,
        groups: source.groups,
        hulls: Vec::new(),
        scaling,
    };
    result.hulls = group_hulls(&result);
    Ok(result)
}

struct RowInfo {
    labels: Vec<String>,
    groups: Option<Vec<String>>,
}

impl RowInfo {
    fn of<T: Scalar>(m: &CompositionMatrix<T>) -> Self {
        Self {
            labels: m.sample_labels().to_vec(),
            groups: m.groups().map(<[String]>::to_vec),
        }
    }
}

fn group_hulls<T: Scalar>(result: &OrdinationResult<T>) -> Vec<GroupHull> {
    let Some(groups) = &result.groups else {
        return Vec::new();
    };
    let mut levels: IndexMap<&str, Vec<usize>> = IndexMap::new();
    for (i, g) in groups.iter().enumerate() {
        levels.entry(g.as_str()).or_default().push(i);
    }
    levels
        .into_iter()
        .map(|(group, rows)| {
            let pts: Vec<(T, T)> = rows.iter().map(|&i| result.planar(i)).collect();
            GroupHull {
                group: group.to_string(),
                vertices: convex_hull(&pts).into_iter().map(|k| rows[k]).collect(),
            }
        })
        .collect()
}

/// Logratio analysis: weighted PCA of the centred logratios.
///
/// The total of all dimension variances equals the total logratio variance.
pub fn lra<T: Scalar>(m: &CompositionMatrix<T>, weights: &PartWeights<T>, scaling: BiplotScaling) -> Result<OrdinationResult<T>> {
    let clr = m.clr_matrix(weights)?;
    let scale = max_abs(clr.as_slice());
    let factors: Vec<T> = weights.as_slice().iter().map(|c| c.sqrt()).collect();
    ordinate(&clr.center_columns(), &factors, scale, scaling, m.part_names().to_vec(), RowInfo::of(m))
}

/// PCA of a set of logratios, centred and by default not standardized.
pub fn pca_of_logratios<T: Scalar>(
    m: &CompositionMatrix<T>,
    specs: &[NamedLogratio],
    options: PcaOptions,
) -> Result<OrdinationResult<T>> {
    if specs.len() < 2 {
        return Err(CodaError::Shape("PCA of logratios needs at least 2 logratios".into()));
    }
    for (a, sa) in specs.iter().enumerate() {
        if let Some(sb) = specs[..a].iter().find(|sb| sb.spec.same_span(&sa.spec)) {
            return Err(CodaError::DuplicateLogratio(format!("{} duplicates {}", sa.name, sb.name)));
        }
    }
    let columns = specs.iter().map(|s| m.slr_values(&s.spec)).collect::<Result<Vec<_>>>()?;
    let raw = Matrix::from_columns(&columns);
    let scale = max_abs(raw.as_slice());
    let mut centred = raw.center_columns();
    if options.standardize {
        for (j, col) in columns.iter().enumerate() {
            let var = variance_population(col)?;
            let sd = var.sqrt();
            if var <= variance_noise_floor(max_abs(col)) {
                return Err(CodaError::Degenerate(format!("logratio {} is constant", specs[j].name)));
            }
            for i in 0..centred.nrows() {
                centred.set(i, j, centred.get(i, j) / sd);
            }
        }
    }
    let factors = vec![T::one(); specs.len()];
    ordinate(
        &centred,
        &factors,
        scale,
        options.scaling,
        specs.iter().map(|s| s.name.clone()).collect(),
        RowInfo::of(m),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::LogratioSpec;
    use crate::variance::{total_logratio_variance, VarianceMethod};

    fn data() -> CompositionMatrix<f64> {
        let rows: Vec<Vec<f64>> = (0..9)
            .map(|i| (0..5).map(|j| 1.0 + ((i * 7 + j * 3) % 13) as f64 + 0.1 * j as f64).collect())
            .collect();
        let groups = (0..9).map(|i| ["a", "b", "c"][i % 3].to_string()).collect();
        let m = CompositionMatrix::from_rows(&rows).unwrap();
        CompositionMatrix::new(m.values().clone(), m.part_names().to_vec(), m.sample_labels().to_vec(), Some(groups)).unwrap()
    }

    #[test]
    fn lra_total_matches_logratio_variance() {
        let m = data();
        let w = PartWeights::normalized(&[1.0, 2.0, 3.0, 1.0, 1.0]).unwrap();
        let res = lra(&m, &w, BiplotScaling::RowPrincipal).unwrap();
        let tot = total_logratio_variance(&m, &w, VarianceMethod::Clr).unwrap().total;
        assert!((res.total_variance - tot).abs() < 1e-9 * tot);
        assert!(res.dimensions() <= 4);
        assert!(res.dim_variances.windows(2).all(|w| w[0] >= w[1]));
        assert!((res.percentage_in(res.dimensions()) - 100.0).abs() < 1e-9);
        // principal row coordinates carry the dimension variances
        for d in 0..res.dimensions() {
            let var: f64 = (0..9).map(|i| res.row_coords.get(i, d).powi(2)).sum::<f64>() / 9.0;
            assert!((var - res.dim_variances[d]).abs() < 1e-10);
        }
        assert_eq!(res.hulls.len(), 3);
    }

    #[test]
    fn three_parts_are_two_dimensional() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![1.0 + i as f64, 2.0 + (i * i) as f64 * 0.3, 5.0 - 0.5 * i as f64]).collect();
        let m = CompositionMatrix::from_rows(&rows).unwrap();
        let res = lra(&m, &PartWeights::uniform(3), BiplotScaling::RowPrincipal).unwrap();
        assert_eq!(res.dimensions(), 2);
        assert!((res.percentage_in(2) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn rank_one_pattern_is_one_dimensional() {
        let pattern = [0.3, -0.1, 0.5, -0.7];
        let rows: Vec<Vec<f64>> = (0..5).map(|i| pattern.iter().map(|p| (p * i as f64).exp()).collect()).collect();
        let m = CompositionMatrix::from_rows(&rows).unwrap();
        let res = lra(&m, &PartWeights::uniform(4), BiplotScaling::RowPrincipal).unwrap();
        assert_eq!(res.dimensions(), 1);
        assert!((res.dim_percentages[0] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn sign_convention_makes_largest_loading_positive() {
        let m = data();
        for scaling in [BiplotScaling::RowPrincipal, BiplotScaling::ColumnPrincipal] {
            let res = lra(&m, &PartWeights::uniform(5), scaling).unwrap();
            for d in 0..res.dimensions() {
                let col = res.col_coords.column(d);
                let max = col.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
                assert!(max > 0.0);
            }
        }
    }

    #[test]
    fn constant_data_is_degenerate() {
        let m = CompositionMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert!(lra(&m, &PartWeights::uniform(3), BiplotScaling::RowPrincipal).unwrap_err().is_numerical());
    }

    #[test]
    fn pca_rejects_duplicates_and_single_spec() {
        let m = data();
        let a = NamedLogratio::from_parts(LogratioSpec::pair(0, 1).unwrap(), m.part_names());
        let b = NamedLogratio::new("flipped", a.spec.reversed());
        assert!(matches!(pca_of_logratios(&m, &[a.clone(), b], PcaOptions::default()), Err(CodaError::DuplicateLogratio(_))));
        assert!(pca_of_logratios(&m, &[a], PcaOptions::default()).is_err());
    }

    #[test]
    fn orthogonal_equal_variance_logratios_split_evenly() {
        // log(p1/p3) = ±1 and log(p2/p3) = ±1 in a balanced, uncorrelated design
        let e = std::f64::consts::E;
        let rows = vec![
            vec![e, e, 1.0],
            vec![e, 1.0 / e, 1.0],
            vec![1.0 / e, e, 1.0],
            vec![1.0 / e, 1.0 / e, 1.0],
        ];
        let m = CompositionMatrix::from_rows(&rows).unwrap();
        let specs = vec![
            NamedLogratio::from_parts(LogratioSpec::pair(0, 2).unwrap(), m.part_names()),
            NamedLogratio::from_parts(LogratioSpec::pair(1, 2).unwrap(), m.part_names()),
        ];
        let res = pca_of_logratios(&m, &specs, PcaOptions::default()).unwrap();
        assert_eq!(res.dimensions(), 2);
        assert!((res.dim_percentages[0] - 50.0).abs() < 1e-9);
        assert!((res.dim_percentages[1] - 50.0).abs() < 1e-9);
    }
}
