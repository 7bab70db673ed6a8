//! Logratio variance and amalgamation-based variable selection for
//! compositional data.
//!
//! The numerical core is generic over the scalar type (see [`Scalar`]); the
//! `*64` aliases at the crate root fix it to `f64`, which is what the
//! documented tolerances assume.

pub mod composition;
pub mod error;
pub mod io;
pub mod linalg;
pub mod ordination;
pub mod scalar;
pub mod selection;
pub mod variance;
pub mod workflow;

pub use composition::{all_plrs, Amalgamation, CompositionMatrix, LogratioSpec, NamedLogratio, PartWeights, ZeroReport};
pub use error::{CodaError, Result};
pub use linalg::Matrix;
pub use ordination::{
    explained_variance, lra, pca_of_logratios, ternary_coords, BiplotScaling, ExplainedVarianceModel,
    OrdinationResult, PcaOptions, RegressionFit,
};
pub use scalar::Scalar;
pub use selection::{
    evaluate_candidates, hierarchy_explained, plr_graph, stepwise_select, AmalgamationHierarchy, SelectionTrace,
    StepwiseOptions,
};
pub use variance::{explained_percentage, total_logratio_variance, variance_population, VarianceMethod, VarianceReport};

pub type CompositionMatrix64 = CompositionMatrix<f64>;
pub type CompositionMatrix32 = CompositionMatrix<f32>;
pub type PartWeights64 = PartWeights<f64>;
pub type PartWeights32 = PartWeights<f32>;
pub type VarianceReport64 = VarianceReport<f64>;
pub type RegressionFit64 = RegressionFit<f64>;
pub type OrdinationResult64 = OrdinationResult<f64>;
pub type SelectionTrace64 = SelectionTrace<f64>;
pub type Matrix64 = Matrix<f64>;

/// Replaces zeros as ingested, then closes every row to `closure`.
pub fn prepare<T: Scalar>(m: &CompositionMatrix<T>, closure: T) -> Result<(CompositionMatrix<T>, ZeroReport)> {
    let (replaced, report) = m.replace_zeros()?;
    Ok((replaced.close(closure)?, report))
}
