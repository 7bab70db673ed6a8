//! One analysis session: an uploaded composition, its amalgamation hierarchy
//! and the undo/redo history of hierarchy states.
//!
//! The selection trace is always recomputed from the hierarchy, so the two
//! cannot disagree.

use amalgam_core::io::{read_composition, CsvOptions, GroupColumn};
use amalgam_core::selection::{
    evaluate_candidates_with, hierarchy_trace, leading_ties, HierarchyNode, SelectionTrace, SlrDefinition,
};
use amalgam_core::workflow::{ordination_view, parse_candidates, OrdinationMode, Target, ViewDocument, ViewRequest, WeightScheme};
use amalgam_core::{
    all_plrs, prepare, total_logratio_variance, AmalgamationHierarchy, BiplotScaling, CodaError, CompositionMatrix,
    ExplainedVarianceModel, LogratioSpec, NamedLogratio, PartWeights, PcaOptions, Result, VarianceMethod, ZeroReport,
};
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, Deserialize)]
pub struct UploadOptions {
    /// `uniform` (default) or `mean`.
    pub weights: Option<String>,
    /// Group-factor column; `none` disables detection.
    pub label_col: Option<String>,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    data: CompositionMatrix<f64>,
    zeros: ZeroReport,
    weight_scheme: WeightScheme,
    weights: PartWeights<f64>,
    total: f64,
    hierarchy: AmalgamationHierarchy,
    undo: Vec<AmalgamationHierarchy>,
    redo: Vec<AmalgamationHierarchy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub step: usize,
    pub logratio: String,
    pub additional_pct: f64,
    pub cumulative_pct: f64,
    pub tie_set: Vec<String>,
    pub manual: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionState {
    pub id: String,
    pub parts: usize,
    pub samples: usize,
    pub part_names: Vec<String>,
    pub groups: Vec<String>,
    pub replaced_cells: usize,
    pub zero_replacement: ZeroReport,
    pub weights: String,
    pub total_logratio_variance: f64,
    pub hierarchy: AmalgamationHierarchy,
    pub steps: Vec<StepRow>,
    pub cumulative_pct: f64,
    pub warnings: Vec<String>,
    pub state_hash: String,
    pub can_undo: bool,
    pub can_redo: bool,
}

/// Export document; contains nothing session-specific so that importing it
/// elsewhere over the same data and exporting again reproduces it exactly.
#[derive(Debug, Clone, Serialize)]
pub struct ExportDocument {
    pub hierarchy: AmalgamationHierarchy,
    pub steps: Vec<StepRow>,
    pub definitions: Vec<SlrDefinition>,
    pub cumulative_pct: f64,
    pub state_hash: String,
}

fn double_option<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Option<String>>, D::Error> {
    Option::<String>::deserialize(d).map(Some)
}

/// What-if request. Exactly one of the fields selects the candidate set.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRequest {
    /// Logratios as `num/den` text (`+` joins names), or the single entry `all`.
    #[serde(default)]
    pub candidates: Option<Vec<String>>,
    /// Sibling logratios under this amalgamation; `null` for the top level.
    #[serde(default, deserialize_with = "double_option")]
    pub siblings_of: Option<Option<String>>,
    /// Pairwise logratios among the parts of this amalgamation.
    #[serde(default)]
    pub plrs_within: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoredCandidate {
    pub name: String,
    pub numerator: Vec<String>,
    pub denominator: Vec<String>,
    pub additional_pct: f64,
    pub cumulative_pct: f64,
    pub duplicate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluateResponse {
    pub base_pct: f64,
    pub committed: Vec<String>,
    pub tie_set: Vec<String>,
    pub candidates: Vec<ScoredCandidate>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SplitRequest {
    pub parent: String,
    pub children: Vec<HierarchyNode>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RootsRequest {
    pub nodes: Vec<HierarchyNode>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CommitRequest {
    pub num: String,
    pub den: String,
    #[serde(default)]
    pub manual: bool,
    /// Reject the commit unless the session is still in this state.
    #[serde(default)]
    pub expected_hash: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct OrdinationQuery {
    pub mode: Option<String>,
    pub target: Option<String>,
    pub weights: Option<String>,
    #[serde(default)]
    pub standardize: bool,
    #[serde(default)]
    pub column_principal: bool,
}

/// Failure of a state-dependent request, carrying the state it was judged against.
#[derive(Debug)]
pub struct Conflict {
    pub error: CodaError,
    pub state: Box<SessionState>,
}

fn weight_scheme(name: Option<&str>) -> Result<WeightScheme> {
    match name.unwrap_or("uniform") {
        "uniform" => Ok(WeightScheme::Uniform),
        "mean" => Ok(WeightScheme::ColumnMeans),
        "size" => Ok(WeightScheme::AmalgamationSize),
        other => Err(CodaError::Weights(format!("unknown weighting `{other}`"))),
    }
}

impl Session {
    pub fn from_csv(id: String, csv: &[u8], options: &UploadOptions) -> Result<Self> {
        let group_column = match options.label_col.as_deref() {
            None => GroupColumn::Detect,
            Some("none") => GroupColumn::None,
            Some(name) => GroupColumn::Named(name.to_string()),
        };
        let raw = read_composition::<f64, _>(csv, &CsvOptions { group_column })?;
        let (data, zeros) = prepare(&raw, 1.0)?;
        let weight_scheme = weight_scheme(options.weights.as_deref())?;
        if weight_scheme == WeightScheme::AmalgamationSize {
            return Err(CodaError::Weights("size weighting applies to amalgamation views only".into()));
        }
        let weights = weight_scheme.resolve(&data, &vec![1; data.n_parts()])?;
        let total = total_logratio_variance(&data, &weights, VarianceMethod::Clr)?.total;
        Ok(Self {
            id,
            data,
            zeros,
            weight_scheme,
            weights,
            total,
            hierarchy: AmalgamationHierarchy::new(),
            undo: Vec::new(),
            redo: Vec::new(),
        })
    }

    fn names(&self) -> &[String] {
        self.data.part_names()
    }

    pub fn hierarchy(&self) -> &AmalgamationHierarchy {
        &self.hierarchy
    }

    /// SHA-256 of the canonical hierarchy document.
    pub fn state_hash(&self) -> String {
        hex::encode(Sha256::digest(self.hierarchy.to_json().as_bytes()))
    }

    fn trace(&self) -> Result<SelectionTrace<f64>> {
        hierarchy_trace(&self.data, &self.weights, &self.hierarchy)
    }

    fn steps(&self) -> Result<(Vec<StepRow>, f64)> {
        if self.hierarchy.slrs.is_empty() {
            return Ok((Vec::new(), 0.0));
        }
        let trace = self.trace()?;
        let rows = trace
            .steps
            .iter()
            .map(|s| StepRow {
                step: s.step,
                logratio: s.chosen.name.clone(),
                additional_pct: s.additional_pct,
                cumulative_pct: s.cumulative_pct,
                tie_set: s.tie_set.clone(),
                manual: s.manual,
            })
            .collect();
        Ok((rows, trace.final_pct()))
    }

    pub fn state(&self) -> SessionState {
        let mut warnings = self.hierarchy.validate(self.names()).unwrap_or_default();
        let (steps, cumulative_pct) = self.steps().unwrap_or_else(|e| {
            warnings.push(e.to_string());
            (Vec::new(), 0.0)
        });
        let mut groups: Vec<String> = Vec::new();
        for g in self.data.groups().unwrap_or_default() {
            if !groups.contains(g) {
                groups.push(g.clone());
            }
        }
        SessionState {
            id: self.id.clone(),
            parts: self.data.n_parts(),
            samples: self.data.n_samples(),
            part_names: self.names().to_vec(),
            groups,
            replaced_cells: self.zeros.total,
            zero_replacement: self.zeros.clone(),
            weights: self.weight_scheme.label().to_string(),
            total_logratio_variance: self.total,
            hierarchy: self.hierarchy.clone(),
            steps,
            cumulative_pct,
            warnings,
            state_hash: self.state_hash(),
            can_undo: !self.undo.is_empty(),
            can_redo: !self.redo.is_empty(),
        }
    }

    fn conflict(&self, error: CodaError) -> Conflict {
        Conflict {
            error,
            state: Box::new(self.state()),
        }
    }

    /// Applies a hierarchy mutation transactionally and records it for undo.
    fn mutate(
        &mut self,
        f: impl FnOnce(&mut AmalgamationHierarchy, &CompositionMatrix<f64>, &PartWeights<f64>) -> Result<Vec<String>>,
    ) -> std::result::Result<Vec<String>, Conflict> {
        let before = self.hierarchy.clone();
        match f(&mut self.hierarchy, &self.data, &self.weights) {
            Ok(warnings) => {
                self.undo.push(before);
                self.redo.clear();
                Ok(warnings)
            }
            Err(e) => {
                self.hierarchy = before;
                Err(self.conflict(e))
            }
        }
    }

    pub fn add_roots(&mut self, req: RootsRequest) -> std::result::Result<Vec<String>, Conflict> {
        self.mutate(|h, data, _| h.add_roots(req.nodes, data.part_names()))
    }

    pub fn add_split(&mut self, req: SplitRequest) -> std::result::Result<Vec<String>, Conflict> {
        self.mutate(|h, data, _| h.add_split(&req.parent, req.children, data.part_names()))
    }

    pub fn commit(&mut self, req: CommitRequest) -> std::result::Result<Vec<String>, Conflict> {
        if let Some(expected) = &req.expected_hash {
            if *expected != self.state_hash() {
                return Err(self.conflict(CodaError::SiblingRule {
                    slr: format!("{}/{}", req.num, req.den),
                    reason: "session state changed since it was read".into(),
                }));
            }
        }
        self.mutate(|h, data, weights| {
            let warnings = h.commit(&req.num, &req.den, req.manual, data.part_names())?;
            // a commit must leave a trace that can be computed
            hierarchy_trace(data, weights, h)?;
            Ok(warnings)
        })
    }

    /// Replaces the hierarchy with an imported document.
    pub fn import(&mut self, h: AmalgamationHierarchy) -> std::result::Result<Vec<String>, Conflict> {
        self.mutate(|current, data, weights| {
            let warnings = h.validate(data.part_names())?;
            if !h.slrs.is_empty() {
                hierarchy_trace(data, weights, &h)?;
            }
            *current = h;
            Ok(warnings)
        })
    }

    pub fn undo(&mut self) -> std::result::Result<(), Conflict> {
        let Some(previous) = self.undo.pop() else {
            return Err(self.conflict(CodaError::Hierarchy("nothing to undo".into())));
        };
        self.redo.push(std::mem::replace(&mut self.hierarchy, previous));
        Ok(())
    }

    pub fn redo(&mut self) -> std::result::Result<(), Conflict> {
        let Some(next) = self.redo.pop() else {
            return Err(self.conflict(CodaError::Hierarchy("nothing to redo".into())));
        };
        self.undo.push(std::mem::replace(&mut self.hierarchy, next));
        Ok(())
    }

    fn candidates(&self, req: &EvaluateRequest) -> Result<Vec<NamedLogratio>> {
        let names = self.names();
        match (&req.candidates, &req.siblings_of, &req.plrs_within) {
            (Some(list), None, None) => parse_candidates(&list.join("\n"), &self.hierarchy, names),
            (None, Some(parent), None) => self.hierarchy.sibling_candidates(parent.as_deref(), names),
            (None, None, Some(node)) => {
                let parts = self.hierarchy.parts_of(node, names)?;
                let sub: Vec<String> = parts.iter().map(|&j| names[j].clone()).collect();
                Ok(all_plrs(&sub)
                    .into_iter()
                    .map(|c| {
                        let spec =
                            LogratioSpec::pair(parts[c.spec.numerator()[0]], parts[c.spec.denominator()[0]])?;
                        Ok(NamedLogratio::new(c.name, spec))
                    })
                    .collect::<Result<_>>()?)
            }
            _ => Err(CodaError::InvalidLogratio(
                "give exactly one of `candidates`, `siblings_of` or `plrs_within`".into(),
            )),
        }
    }

    /// Scores candidates on top of the committed logratios. Does not mutate.
    pub fn evaluate(&self, req: &EvaluateRequest) -> Result<EvaluateResponse> {
        let names = self.names();
        let candidates = self.candidates(req)?;
        let committed = self.hierarchy.committed(names)?;
        let specs: Vec<LogratioSpec> = committed.iter().map(|c| c.spec.clone()).collect();
        let model = ExplainedVarianceModel::new(&self.data, &self.weights)?;
        let scores = evaluate_candidates_with(&model, &specs, &candidates)?;
        let base_pct = 100.0 * model.explained_fraction(&specs)?;
        let tie_set = leading_ties(&scores);
        let part_list = |idx: &[usize]| idx.iter().map(|&j| names[j].clone()).collect();
        Ok(EvaluateResponse {
            base_pct,
            committed: committed.into_iter().map(|c| c.name).collect(),
            tie_set,
            candidates: scores
                .into_iter()
                .map(|s| ScoredCandidate {
                    numerator: part_list(s.spec.numerator()),
                    denominator: part_list(s.spec.denominator()),
                    name: s.name,
                    additional_pct: s.additional_pct,
                    cumulative_pct: s.cumulative_pct,
                    duplicate: s.duplicate,
                })
                .collect(),
        })
    }

    pub fn ordination(&self, q: &OrdinationQuery) -> Result<ViewDocument> {
        let mode: OrdinationMode = q.mode.as_deref().unwrap_or("lra").parse()?;
        let target: Target = q.target.as_deref().unwrap_or("parts").parse()?;
        let weights = match &q.weights {
            Some(w) => weight_scheme(Some(w))?,
            None => self.weight_scheme.clone(),
        };
        let request = ViewRequest {
            mode,
            target,
            weights,
            pca: PcaOptions {
                standardize: q.standardize,
                scaling: if q.column_principal { BiplotScaling::ColumnPrincipal } else { BiplotScaling::RowPrincipal },
            },
        };
        Ok(ordination_view(&self.data, &self.hierarchy, &[], &request)?.to_document())
    }

    pub fn export(&self) -> Result<ExportDocument> {
        let (steps, cumulative_pct) = self.steps()?;
        Ok(ExportDocument {
            hierarchy: self.hierarchy.clone(),
            steps,
            definitions: self.hierarchy.definitions(),
            cumulative_pct,
            state_hash: self.state_hash(),
        })
    }
}
