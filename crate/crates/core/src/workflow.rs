//! Views shared by the command-line and HTTP front ends: which parts or
//! amalgamations to analyse, how to weight them, and which ordination to run.
//! Both front ends go through these functions so they report identical numbers.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::composition::{all_plrs, Amalgamation, CompositionMatrix, LogratioSpec, NamedLogratio, PartWeights};
use crate::error::{CodaError, Result};
use crate::io::read_weights;
use crate::linalg::Matrix;
use crate::ordination::{
    convex_hull, coordinates_csv, lra, pca_of_logratios, ternary_coords, GroupHull,
    OrdinationDocument, OrdinationResult, PcaOptions, PointDocument,
};
use crate::scalar::{count, Scalar};
use crate::selection::AmalgamationHierarchy;

/// How part (or amalgamation) weights are chosen.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum WeightScheme {
    #[default]
    Uniform,
    /// Column means of the closed composition.
    ColumnMeans,
    /// Proportional to the number of original parts in each amalgamation;
    /// uniform on the parts themselves.
    AmalgamationSize,
    /// `part,weight` CSV text naming every column of the view.
    Table(String),
}

impl WeightScheme {
    pub fn resolve<T: Scalar>(&self, m: &CompositionMatrix<T>, sizes: &[usize]) -> Result<PartWeights<T>> {
        match self {
            Self::Uniform => Ok(PartWeights::uniform(m.n_parts())),
            Self::ColumnMeans => PartWeights::from_column_means(m),
            Self::AmalgamationSize => {
                let raw: Vec<T> = sizes.iter().map(|&s| count::<T>(s)).collect();
                PartWeights::normalized(&raw)
            }
            Self::Table(text) => read_weights(text.as_bytes(), m.part_names()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::ColumnMeans => "mean",
            Self::AmalgamationSize => "size",
            Self::Table(_) => "file",
        }
    }
}

/// Parses `num/den`, where each side is one or more `+`-joined names. A name
/// refers to an amalgamation of `h` when one exists, otherwise to a part.
pub fn parse_logratio(text: &str, h: &AmalgamationHierarchy, part_names: &[String]) -> Result<NamedLogratio> {
    let text = text.trim();
    let (num, den) = text
        .split_once('/')
        .filter(|(_, d)| !d.contains('/'))
        .ok_or_else(|| CodaError::InvalidLogratio(format!("`{text}` is not of the form num/den")))?;
    let side = |s: &str| -> Result<Vec<usize>> {
        let mut parts = Vec::new();
        for name in s.split('+').map(str::trim) {
            if name.is_empty() {
                return Err(CodaError::InvalidLogratio(format!("empty name in `{text}`")));
            }
            if h.node(name).is_some() {
                parts.extend(h.parts_of(name, part_names)?);
            } else {
                parts.push(
                    part_names
                        .iter()
                        .position(|p| p == name)
                        .ok_or_else(|| CodaError::UnknownName(name.to_string()))?,
                );
            }
        }
        Ok(parts)
    };
    let spec = LogratioSpec::new(side(num)?, side(den)?)?;
    Ok(NamedLogratio::new(format!("{}/{}", num.trim(), den.trim()), spec))
}

/// One logratio per nonblank line; `#` starts a comment. The single word
/// `all` expands to every pairwise logratio of the parts.
pub fn parse_candidates(text: &str, h: &AmalgamationHierarchy, part_names: &[String]) -> Result<Vec<NamedLogratio>> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    if lines == ["all"] {
        return Ok(all_plrs(part_names));
    }
    lines.into_iter().map(|l| parse_logratio(l, h, part_names)).collect()
}

/// Columns of an analysis view.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Target {
    /// The original parts.
    #[default]
    Parts,
    /// The top-level amalgamations of the hierarchy.
    Roots,
    /// The named amalgamations, which must be disjoint.
    Nodes(Vec<String>),
}

impl FromStr for Target {
    type Err = CodaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "" | "parts" => Ok(Self::Parts),
            "roots" => Ok(Self::Roots),
            list => {
                let names: Vec<String> = list.split(',').map(|n| n.trim().to_string()).collect();
                if names.iter().any(String::is_empty) {
                    return Err(CodaError::Shape(format!("malformed target list `{list}`")));
                }
                Ok(Self::Nodes(names))
            }
        }
    }
}

/// Composition over the target's columns and the number of original parts
/// in each column.
pub fn target_matrix<T: Scalar>(
    m: &CompositionMatrix<T>,
    h: &AmalgamationHierarchy,
    target: &Target,
) -> Result<(CompositionMatrix<T>, Vec<usize>)> {
    let names: Vec<String> = match target {
        Target::Parts => return Ok((m.clone(), vec![1; m.n_parts()])),
        Target::Roots => h.roots().into_iter().map(str::to_string).collect(),
        Target::Nodes(list) => list.clone(),
    };
    if names.len() < 2 {
        return Err(CodaError::Shape(format!(
            "an amalgamation view needs at least 2 amalgamations, found {}",
            names.len()
        )));
    }
    let groups = names
        .iter()
        .map(|n| Ok(Amalgamation::new(n.clone(), h.parts_of(n, m.part_names())?)))
        .collect::<Result<Vec<_>>>()?;
    let sizes = groups.iter().map(|g| g.parts.len()).collect();
    Ok((m.amalgamate(&groups)?, sizes))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrdinationMode {
    /// Logratio analysis of the target's columns.
    #[default]
    Lra,
    /// PCA of a set of logratios.
    PcaSlr,
    /// Barycentric plot of a three-column target.
    Ternary,
}

impl FromStr for OrdinationMode {
    type Err = CodaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lra" => Ok(Self::Lra),
            "pca-slr" => Ok(Self::PcaSlr),
            "ternary" => Ok(Self::Ternary),
            other => Err(CodaError::Shape(format!("unknown ordination mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TernaryView<T> {
    /// Names of the bottom-left, bottom-right and top vertices.
    pub vertices: Vec<String>,
    /// I×2 planar coordinates.
    pub coords: Matrix<T>,
    pub labels: Vec<String>,
    pub groups: Option<Vec<String>>,
    pub hulls: Vec<GroupHull>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TernaryDocument {
    pub vertices: Vec<String>,
    pub rows: Vec<PointDocument>,
    pub hulls: Vec<GroupHull>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum View<T> {
    Biplot(OrdinationResult<T>),
    Ternary(TernaryView<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ViewDocument {
    Biplot(OrdinationDocument),
    Ternary(TernaryDocument),
}

impl<T: Scalar> View<T> {
    pub fn to_document(&self) -> ViewDocument {
        match self {
            Self::Biplot(o) => ViewDocument::Biplot(o.to_document()),
            Self::Ternary(t) => ViewDocument::Ternary(TernaryDocument {
                vertices: t.vertices.clone(),
                rows: (0..t.coords.nrows())
                    .map(|i| PointDocument {
                        label: t.labels[i].clone(),
                        group: t.groups.as_ref().map(|g| g[i].clone()),
                        coords: [("x", t.coords.get(i, 0)), ("y", t.coords.get(i, 1))]
                            .into_iter()
                            .map(|(k, v)| (k.to_string(), v.to_f64().unwrap_or(f64::NAN)))
                            .collect(),
                    })
                    .collect(),
                hulls: t.hulls.clone(),
            }),
        }
    }

    /// Sample coordinates as CSV.
    pub fn rows_csv(&self) -> Result<String> {
        match self {
            Self::Biplot(o) => o.rows_csv(),
            Self::Ternary(t) => coordinates_csv(&t.labels, t.groups.as_deref(), &t.coords),
        }
    }

    /// Percentage of variance per dimension; empty for a ternary view.
    pub fn dim_percentages(&self) -> Vec<T> {
        match self {
            Self::Biplot(o) => o.dim_percentages.clone(),
            Self::Ternary(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ViewRequest {
    pub mode: OrdinationMode,
    pub target: Target,
    pub weights: WeightScheme,
    /// Standardization and biplot scaling; the scaling applies to LRA too.
    pub pca: PcaOptions,
}

/// Builds the requested view. `logratios` feeds the PCA mode and defaults to
/// the hierarchy's committed logratios when empty.
pub fn ordination_view<T: Scalar>(
    m: &CompositionMatrix<T>,
    h: &AmalgamationHierarchy,
    logratios: &[NamedLogratio],
    request: &ViewRequest,
) -> Result<View<T>> {
    match request.mode {
        OrdinationMode::Lra => {
            let (view, sizes) = target_matrix(m, h, &request.target)?;
            let w = request.weights.resolve(&view, &sizes)?;
            Ok(View::Biplot(lra(&view, &w, request.pca.scaling)?))
        }
        OrdinationMode::PcaSlr => {
            let specs = if logratios.is_empty() { h.committed(m.part_names())? } else { logratios.to_vec() };
            Ok(View::Biplot(pca_of_logratios(m, &specs, request.pca)?))
        }
        OrdinationMode::Ternary => {
            let (view, _) = target_matrix(m, h, &request.target)?;
            let coords = ternary_coords(&view)?;
            let labels = view.sample_labels().to_vec();
            let groups = view.groups().map(<[String]>::to_vec);
            let hulls = groups.as_ref().map_or_else(Vec::new, |g| {
                let mut levels: indexmap::IndexMap<&str, Vec<usize>> = indexmap::IndexMap::new();
                for (i, name) in g.iter().enumerate() {
                    levels.entry(name.as_str()).or_default().push(i);
                }
                levels
                    .into_iter()
                    .map(|(group, rows)| {
                        let pts: Vec<(T, T)> = rows.iter().map(|&i| (coords.get(i, 0), coords.get(i, 1))).collect();
                        GroupHull {
                            group: group.to_string(),
                            vertices: convex_hull(&pts).into_iter().map(|k| rows[k]).collect(),
                        }
                    })
                    .collect()
            });
            Ok(View::Ternary(TernaryView {
                vertices: view.part_names().to_vec(),
                coords,
                labels,
                groups,
                hulls,
            }))
        }
    }
}
