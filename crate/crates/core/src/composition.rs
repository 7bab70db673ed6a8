//! Compositional data model: the data matrix, part weights, logratio
//! definitions and amalgamations, together with the transforms between them.
//!
//! All logarithms are natural logarithms. Percentages of explained variance
//! do not depend on the base (a change of base rescales every variance by the
//! same factor), only absolute total logratio variance does.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CodaError, Result};
use crate::linalg::Matrix;
use crate::scalar::{compensated_sum, count, lit, Scalar};

/// I×J matrix of nonnegative part values with part names, sample labels and an
/// optional grouping factor (e.g. season).
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionMatrix<T> {
    values: Matrix<T>,
    part_names: Vec<String>,
    sample_labels: Vec<String>,
    groups: Option<Vec<String>>,
}

/// Number of zero cells replaced per part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub per_part: Vec<PartReplacement>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartReplacement {
    pub part: String,
    pub replaced: usize,
}

impl<T: Scalar> CompositionMatrix<T> {
    pub fn new(
        values: Matrix<T>,
        part_names: Vec<String>,
        sample_labels: Vec<String>,
        groups: Option<Vec<String>>,
    ) -> Result<Self> {
        let (rows, cols) = (values.nrows(), values.ncols());
        if rows < 2 || cols < 2 {
            return Err(CodaError::Shape(format!(
                "need at least 2 samples and 2 parts, got {rows}×{cols}"
            )));
        }
        if part_names.len() != cols {
            return Err(CodaError::Shape(format!(
                "{} part names for {cols} columns",
                part_names.len()
            )));
        }
        if sample_labels.len() != rows {
            return Err(CodaError::Shape(format!(
                "{} sample labels for {rows} rows",
                sample_labels.len()
            )));
        }
        if let Some(g) = &groups {
            if g.len() != rows {
                return Err(CodaError::Shape(format!("{} group labels for {rows} rows", g.len())));
            }
        }
        let mut seen = HashSet::new();
        for name in &part_names {
            if !seen.insert(name.as_str()) {
                return Err(CodaError::DuplicatePart(name.clone()));
            }
        }
        for (i, row) in values.rows().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() || x < T::zero() {
                    return Err(CodaError::Negative {
                        row: i,
                        label: sample_labels[i].clone(),
                        part: part_names[j].clone(),
                        value: x.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        Ok(Self {
            values,
            part_names,
            sample_labels,
            groups,
        })
    }

    /// Convenience constructor from nested rows with generated names
    /// (`p1..pJ`, `s1..sI`).
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(CodaError::Shape("ragged rows".into()));
        }
        let values = Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
        let parts = (1..=ncols).map(|j| format!("p{j}")).collect();
        let labels = (1..=rows.len()).map(|i| format!("s{i}")).collect();
        Self::new(values, parts, labels, None)
    }

    pub fn values(&self) -> &Matrix<T> {
        &self.values
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_parts(&self) -> usize {
        self.values.ncols()
    }

    pub fn part_names(&self) -> &[String] {
        &self.part_names
    }

    pub fn sample_labels(&self) -> &[String] {
        &self.sample_labels
    }

    pub fn groups(&self) -> Option<&[String]> {
        self.groups.as_deref()
    }

    pub fn part_index(&self, name: &str) -> Option<usize> {
        self.part_names.iter().position(|p| p == name)
    }

    pub fn require_part(&self, name: &str) -> Result<usize> {
        self.part_index(name).ok_or_else(|| CodaError::UnknownName(name.to_string()))
    }

    fn with_values(&self, values: Matrix<T>) -> Self {
        Self {
            values,
            part_names: self.part_names.clone(),
            sample_labels: self.sample_labels.clone(),
            groups: self.groups.clone(),
        }
    }

    /// Rescales each row to sum to `constant`.
    pub fn close(&self, constant: T) -> Result<Self> {
        if !(constant > T::zero()) {
            return Err(CodaError::Shape("closure constant must be positive".into()));
        }
        let mut out = self.values.clone();
        for i in 0..out.nrows() {
            let sum = compensated_sum(self.values.row(i).iter().copied());
            if sum <= T::zero() {
                return Err(CodaError::ZeroRow {
                    row: i,
                    label: self.sample_labels[i].clone(),
                });
            }
            for x in out.row_mut(i) {
                *x = constant * (*x / sum);
            }
        }
        Ok(self.with_values(out))
    }

    /// Replaces every zero in a column by two-thirds of that column's smallest
    /// positive value. Positive entries are left untouched and rows are not
    /// re-closed. A row without any positive entry is rejected, not filled.
    pub fn replace_zeros(&self) -> Result<(Self, ZeroReport)> {
        if let Some(i) = self.values.rows().position(|row| !row.iter().any(|&x| x > T::zero())) {
            return Err(CodaError::ZeroRow {
                row: i,
                label: self.sample_labels[i].clone(),
            });
        }
        let two_thirds = lit::<T>(2.0) / lit::<T>(3.0);
        let mut out = self.values.clone();
        let mut per_part = Vec::with_capacity(self.n_parts());
        for j in 0..self.n_parts() {
            let column = self.values.column(j);
            let min_positive = column
                .iter()
                .copied()
                .filter(|&x| x > T::zero())
                .fold(None, |acc: Option<T>, x| Some(acc.map_or(x, |a| a.min(x))));
            let Some(min_positive) = min_positive else {
                return Err(CodaError::AllZeroColumn {
                    part: self.part_names[j].clone(),
                });
            };
            let replacement = two_thirds * min_positive;
            let mut replaced = 0;
            for (i, &x) in column.iter().enumerate() {
                if x == T::zero() {
                    out.set(i, j, replacement);
                    replaced += 1;
                }
            }
            per_part.push(PartReplacement {
                part: self.part_names[j].clone(),
                replaced,
            });
        }
        let total = per_part.iter().map(|p| p.replaced).sum();
        Ok((self.with_values(out), ZeroReport { per_part, total }))
    }

    /// Errors with the first nonpositive cell, if any.
    pub fn require_positive(&self) -> Result<()> {
        for (i, row) in self.values.rows().enumerate() {
            if let Some(j) = row.iter().position(|&x| !(x > T::zero())) {
                return Err(CodaError::NonPositive {
                    row: i,
                    part: self.part_names[j].clone(),
                });
            }
        }
        Ok(())
    }

    fn log_values(&self) -> Result<Matrix<T>> {
        self.require_positive()?;
        Ok(self.values.map(T::ln))
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.n_parts() {
            return Err(CodaError::InvalidLogratio(format!(
                "part index {j} out of range for {} parts",
                self.n_parts()
            )));
        }
        Ok(())
    }

    /// Pairwise logratio `log(x_j / x_k)` for every sample.
    pub fn plr_values(&self, j: usize, k: usize) -> Result<Vec<T>> {
        self.check_index(j)?;
        self.check_index(k)?;
        if j == k {
            return Err(CodaError::InvalidLogratio(
                "numerator and denominator are the same part".into(),
            ));
        }
        self.require_positive()?;
        Ok(self
            .values
            .rows()
            .map(|row| row[j].ln() - row[k].ln())
            .collect())
    }

    /// Centred logratios: each log part minus the weighted mean of the row's
    /// log parts.
    pub fn clr_matrix(&self, weights: &PartWeights<T>) -> Result<Matrix<T>> {
        weights.check_len(self.n_parts())?;
        let logs = self.log_values()?;
        let mut out = logs.clone();
        for i in 0..logs.nrows() {
            let row = logs.row(i);
            let centre = compensated_sum(row.iter().zip(weights.as_slice()).map(|(&l, &c)| c * l));
            for x in out.row_mut(i) {
                *x = *x - centre;
            }
        }
        Ok(out)
    }

    /// Summated logratio `log(Σ_num x / Σ_den x)` for every sample. With two
    /// singleton sets this is exactly [`plr_values`](Self::plr_values).
    pub fn slr_values(&self, spec: &LogratioSpec) -> Result<Vec<T>> {
        for &j in spec.numerator().iter().chain(spec.denominator()) {
            self.check_index(j)?;
        }
        if spec.is_plr() {
            return self.plr_values(spec.numerator()[0], spec.denominator()[0]);
        }
        self.require_positive()?;
        Ok(self
            .values
            .rows()
            .map(|row| {
                let num = compensated_sum(spec.numerator().iter().map(|&j| row[j]));
                let den = compensated_sum(spec.denominator().iter().map(|&k| row[k]));
                num.ln() - den.ln()
            })
            .collect())
    }

    /// One column per group holding the row sums over the group's parts.
    /// Parts outside every group are dropped.
    pub fn amalgamate(&self, groups: &[Amalgamation]) -> Result<Self> {
        let mut owner: Vec<Option<&str>> = vec![None; self.n_parts()];
        for group in groups {
            if group.parts.is_empty() {
                return Err(CodaError::Hierarchy(format!(
                    "amalgamation `{}` has no parts",
                    group.name
                )));
            }
            for &j in &group.parts {
                self.check_index(j)?;
                if owner[j].is_some() {
                    return Err(CodaError::Overlap {
                        part: self.part_names[j].clone(),
                    });
                }
                owner[j] = Some(&group.name);
            }
        }
        let values = Matrix::from_fn(self.n_samples(), groups.len(), |i, g| {
            compensated_sum(groups[g].parts.iter().map(|&j| self.values.get(i, j)))
        });
        Self::new(
            values,
            groups.iter().map(|g| g.name.clone()).collect(),
            self.sample_labels.clone(),
            self.groups.clone(),
        )
    }

    /// Subcomposition over the given part indices, in the given order.
    pub fn subcomposition(&self, parts: &[usize]) -> Result<Self> {
        for &j in parts {
            self.check_index(j)?;
        }
        let values = Matrix::from_fn(self.n_samples(), parts.len(), |i, c| self.values.get(i, parts[c]));
        Self::new(
            values,
            parts.iter().map(|&j| self.part_names[j].clone()).collect(),
            self.sample_labels.clone(),
            self.groups.clone(),
        )
    }
}

/// Part weights `c_j`: positive and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartWeights<T> {
    weights: Vec<T>,
}

impl<T: Scalar> PartWeights<T> {
    pub fn uniform(n_parts: usize) -> Self {
        let c = T::one() / count::<T>(n_parts.max(1));
        Self {
            weights: vec![c; n_parts],
        }
    }

    /// Validates weights that are already closed to one.
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(CodaError::Weights("no weights given".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > T::zero()) || !w.is_finite()) {
            return Err(CodaError::Weights(format!("weight {w} is not positive")));
        }
        let sum = compensated_sum(weights.iter().copied());
        let tol = lit::<T>(1e-12).max(T::epsilon() * count::<T>(4 * weights.len()));
        if (sum - T::one()).abs() > tol {
            return Err(CodaError::Weights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Closes arbitrary positive values to a set of weights.
    pub fn normalized(raw: &[T]) -> Result<Self> {
        if let Some(w) = raw.iter().find(|w| !(**w > T::zero()) || !w.is_finite()) {
            return Err(CodaError::Weights(format!("weight {w} is not positive")));
        }
        let sum = compensated_sum(raw.iter().copied());
        Self::new(raw.iter().map(|&w| w / sum).collect())
    }

    /// Weights proportional to the mean of each part over the closed rows.
    pub fn from_column_means(m: &CompositionMatrix<T>) -> Result<Self> {
        let closed = m.close(T::one())?;
        Self::normalized(&closed.values().column_means())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub(crate) fn check_len(&self, n_parts: usize) -> Result<()> {
        if self.weights.len() != n_parts {
            return Err(CodaError::Weights(format!(
                "{} weights for {n_parts} parts",
                self.weights.len()
            )));
        }
        Ok(())
    }
}

/// A pairwise (PLR) or summated (SLR) logratio over part indices.
///
/// Index sets are stored sorted; orientation (which set is the numerator) is
/// kept as given.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LogratioSpec {
    numerator: Vec<usize>,
    denominator: Vec<usize>,
}

impl LogratioSpec {
    pub fn new(numerator: impl IntoIterator<Item = usize>, denominator: impl IntoIterator<Item = usize>) -> Result<Self> {
        let num: BTreeSet<usize> = numerator.into_iter().collect();
        let den: BTreeSet<usize> = denominator.into_iter().collect();
        if num.is_empty() || den.is_empty() {
            return Err(CodaError::InvalidLogratio("empty numerator or denominator".into()));
        }
        if let Some(shared) = num.intersection(&den).next() {
            return Err(CodaError::InvalidLogratio(format!(
                "part index {shared} is in both numerator and denominator"
            )));
        }
        Ok(Self {
            numerator: num.into_iter().collect(),
            denominator: den.into_iter().collect(),
        })
    }

    pub fn pair(j: usize, k: usize) -> Result<Self> {
        Self::new([j], [k])
    }

    pub fn numerator(&self) -> &[usize] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[usize] {
        &self.denominator
    }

    pub fn is_plr(&self) -> bool {
        self.numerator.len() == 1 && self.denominator.len() == 1
    }

    pub fn reversed(&self) -> Self {
        Self {
            numerator: self.denominator.clone(),
            denominator: self.numerator.clone(),
        }
    }

    /// Same pair of sets in either orientation; such logratios differ only
    /// in sign.
    pub fn same_span(&self, other: &Self) -> bool {
        self == other || (self.numerator == other.denominator && self.denominator == other.numerator)
    }

    /// Readable name such as `A/B` or `A+B/C`.
    pub fn label(&self, part_names: &[String]) -> String {
        let join = |idx: &[usize]| {
            idx.iter()
                .map(|&j| part_names.get(j).map_or_else(|| format!("#{j}"), Clone::clone))
                .collect::<Vec<_>>()
                .join("+")
        };
        format!("{}/{}", join(&self.numerator), join(&self.denominator))
    }
}

/// A logratio together with its display name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedLogratio {
    pub name: String,
    pub spec: LogratioSpec,
}

impl NamedLogratio {
    pub fn new(name: impl Into<String>, spec: LogratioSpec) -> Self {
        Self { name: name.into(), spec }
    }

    /// Names the logratio after its parts.
    pub fn from_parts(spec: LogratioSpec, part_names: &[String]) -> Self {
        Self {
            name: spec.label(part_names),
            spec,
        }
    }
}

impl fmt::Display for NamedLogratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log({})", self.name)
    }
}

/// A named set of parts whose values are summed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Amalgamation {
    pub name: String,
    pub parts: Vec<usize>,
}

impl Amalgamation {
    pub fn new(name: impl Into<String>, parts: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = parts.into_iter().collect();
        Self {
            name: name.into(),
            parts: set.into_iter().collect(),
        }
    }
}

/// All `J(J-1)/2` pairwise logratios `j/k` with `j < k`, in column order.
pub fn all_plrs(part_names: &[String]) -> Vec<NamedLogratio> {
    let j_count = part_names.len();
    let mut out = Vec::with_capacity(j_count * j_count.saturating_sub(1) / 2);
    for j in 0..j_count {
        for k in (j + 1)..j_count {
            let spec = LogratioSpec::pair(j, k).expect("distinct indices");
            out.push(NamedLogratio::from_parts(spec, part_names));
        }
    }
    out
}
