//! Forward selection of logratios by explained variance, the amalgamation
//! hierarchy, and graph checks on selected pairwise logratios.

mod graph;
mod hierarchy;
mod stepwise;

pub use graph::{plr_graph, LogratioGraph};
pub use hierarchy::{
    hierarchy_explained, hierarchy_trace, AmalgamationHierarchy, CommittedSlr, HierarchyExplained, HierarchyNode,
    SlrDefinition, Split, StepIncrement,
};
pub use stepwise::{
    evaluate_candidates, evaluate_candidates_with, leading_ties, record_step, stepwise_select, CandidateScore, SelectionStep,
    SelectionTrace, StepwiseOptions, StopReason, TIE_TOLERANCE,
};
