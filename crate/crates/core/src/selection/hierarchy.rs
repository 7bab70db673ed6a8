//! Expert-built hierarchy of amalgamations and the summated logratios
//! committed between sibling amalgamations.
//!
//! Amalgamations are named sets of parts. The top level (roots) and every
//! split partition their parent into disjoint children; logratios may only be
//! formed between two siblings. The document form is JSON with `nodes`,
//! `splits` and `slrs` arrays, parts referenced by name.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::stepwise::{record_step, SelectionTrace};
use crate::composition::{CompositionMatrix, LogratioSpec, NamedLogratio, PartWeights};
use crate::error::{CodaError, Result};
use crate::ordination::{ExplainedVarianceModel, RegressionFit};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyNode {
    pub name: String,
    pub parts: Vec<String>,
}

impl HierarchyNode {
    pub fn new<S: Into<String>>(name: impl Into<String>, parts: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            parts: parts.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub parent: String,
    pub children: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommittedSlr {
    pub step: usize,
    pub num: String,
    pub den: String,
    #[serde(default)]
    pub manual: bool,
}

impl CommittedSlr {
    pub fn name(&self) -> String {
        format!("{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmalgamationHierarchy {
    pub nodes: Vec<HierarchyNode>,
    #[serde(default)]
    pub splits: Vec<Split>,
    #[serde(default)]
    pub slrs: Vec<CommittedSlr>,
}

/// One row of the summary table of committed logratios.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlrDefinition {
    pub step: usize,
    pub logratio: String,
    /// Parent amalgamation whose children are compared, or `None` for the top level.
    pub within: Option<String>,
    pub numerator: String,
    pub numerator_parts: Vec<String>,
    pub denominator: String,
    pub denominator_parts: Vec<String>,
    pub manual: bool,
}

impl AmalgamationHierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hierarchy serializes")
    }

    pub fn node(&self, name: &str) -> Option<&HierarchyNode> {
        self.nodes.iter().find(|n| n.name == name)
    }

    fn require_node(&self, name: &str) -> Result<&HierarchyNode> {
        self.node(name).ok_or_else(|| CodaError::UnknownName(name.to_string()))
    }

    fn is_child(&self, name: &str) -> bool {
        self.splits.iter().any(|s| s.children.iter().any(|c| c == name))
    }

    /// Top-level amalgamations, in node order.
    pub fn roots(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| !self.is_child(&n.name))
            .map(|n| n.name.as_str())
            .collect()
    }

    /// Parent of a node: `Some(None)` for a root, `None` for an unknown name.
    pub fn parent_of(&self, name: &str) -> Option<Option<&str>> {
        self.node(name)?;
        Some(
            self.splits
                .iter()
                .find(|s| s.children.iter().any(|c| c == name))
                .map(|s| s.parent.as_str()),
        )
    }

    /// Children of `parent`, or the roots when `parent` is `None`.
    pub fn siblings(&self, parent: Option<&str>) -> Vec<&str> {
        match parent {
            None => self.roots(),
            Some(p) => self
                .splits
                .iter()
                .find(|s| s.parent == p)
                .map(|s| s.children.iter().map(String::as_str).collect())
                .unwrap_or_default(),
        }
    }

    fn part_indices(&self, node: &HierarchyNode, part_names: &[String]) -> Result<Vec<usize>> {
        node.parts
            .iter()
            .map(|p| {
                part_names
                    .iter()
                    .position(|q| q == p)
                    .ok_or_else(|| CodaError::UnknownName(p.clone()))
            })
            .collect()
    }

    /// Part indices of a named amalgamation.
    pub fn parts_of(&self, name: &str, part_names: &[String]) -> Result<Vec<usize>> {
        self.part_indices(self.require_node(name)?, part_names)
    }

    /// Checks structural invariants; returns non-fatal warnings.
    pub fn validate(&self, part_names: &[String]) -> Result<Vec<String>> {
        let mut names = HashSet::new();
        let mut sets: HashMap<&str, HashSet<usize>> = HashMap::new();
        for node in &self.nodes {
            if node.name.is_empty() || node.name.contains('/') {
                return Err(CodaError::Hierarchy(format!(
                    "amalgamation name `{}` must be nonempty and contain no `/`",
                    node.name
                )));
            }
            if !names.insert(node.name.as_str()) {
                return Err(CodaError::Hierarchy(format!("amalgamation `{}` defined twice", node.name)));
            }
            if node.parts.is_empty() {
                return Err(CodaError::Hierarchy(format!("amalgamation `{}` has no parts", node.name)));
            }
            let idx = self.part_indices(node, part_names)?;
            let set: HashSet<usize> = idx.iter().copied().collect();
            if set.len() != idx.len() {
                return Err(CodaError::Hierarchy(format!("amalgamation `{}` lists a part twice", node.name)));
            }
            sets.insert(node.name.as_str(), set);
        }

        let mut split_parents = HashSet::new();
        let mut seen_children = HashSet::new();
        for split in &self.splits {
            let parent = sets
                .get(split.parent.as_str())
                .ok_or_else(|| CodaError::UnknownName(split.parent.clone()))?;
            if !split_parents.insert(split.parent.as_str()) {
                return Err(CodaError::Hierarchy(format!("`{}` is split more than once", split.parent)));
            }
            if split.children.len() < 2 {
                return Err(CodaError::Hierarchy(format!("split of `{}` needs at least two children", split.parent)));
            }
            let mut union = HashSet::new();
            for child in &split.children {
                let set = sets.get(child.as_str()).ok_or_else(|| CodaError::UnknownName(child.clone()))?;
                if !seen_children.insert(child.as_str()) {
                    return Err(CodaError::Hierarchy(format!("`{child}` is a child in more than one split")));
                }
                if let Some(&shared) = set.iter().find(|j| union.contains(*j)) {
                    return Err(CodaError::Overlap {
                        part: part_names[shared].clone(),
                    });
                }
                union.extend(set.iter().copied());
            }
            if &union != parent {
                return Err(CodaError::Hierarchy(format!(
                    "children of `{}` do not partition its parts",
                    split.parent
                )));
            }
        }

        let mut root_union = HashSet::new();
        for root in self.roots() {
            for &j in &sets[root] {
                if !root_union.insert(j) {
                    return Err(CodaError::Overlap {
                        part: part_names[j].clone(),
                    });
                }
            }
        }

        let mut warnings = Vec::new();
        let mut last_step = 0;
        let mut per_set: BTreeMap<Option<&str>, usize> = BTreeMap::new();
        for (k, slr) in self.slrs.iter().enumerate() {
            if slr.step <= last_step {
                return Err(CodaError::Hierarchy(format!("step numbers must increase (at `{}`)", slr.name())));
            }
            last_step = slr.step;
            let parent = self.sibling_parent(&slr.num, &slr.den)?;
            if let Some(prev) = self.slrs[..k]
                .iter()
                .find(|p| (p.num == slr.num && p.den == slr.den) || (p.num == slr.den && p.den == slr.num))
            {
                return Err(CodaError::SiblingRule {
                    slr: slr.name(),
                    reason: format!("same amalgamations as step {}", prev.step),
                });
            }
            *per_set.entry(parent).or_default() += 1;
        }
        for (parent, used) in per_set {
            let g = self.siblings(parent).len();
            if used > g - 1 {
                warnings.push(format!(
                    "{used} logratios among the {g} children of {}; at most {} can add explained variance",
                    parent.unwrap_or("the top level"),
                    g - 1
                ));
            }
        }
        Ok(warnings)
    }

    /// Shared parent of two sibling amalgamations (`None` for roots).
    fn sibling_parent(&self, num: &str, den: &str) -> Result<Option<&str>> {
        let name = format!("{num}/{den}");
        let rule = |reason: String| CodaError::SiblingRule {
            slr: name.clone(),
            reason,
        };
        if num == den {
            return Err(rule("numerator and denominator are the same amalgamation".into()));
        }
        let pn = self.parent_of(num).ok_or_else(|| rule(format!("unknown amalgamation `{num}`")))?;
        let pd = self.parent_of(den).ok_or_else(|| rule(format!("unknown amalgamation `{den}`")))?;
        if pn != pd {
            return Err(rule(format!(
                "`{num}` is under {} but `{den}` is under {}",
                pn.unwrap_or("the top level"),
                pd.unwrap_or("the top level")
            )));
        }
        Ok(pn)
    }

    /// Logratio between two amalgamations, named `num/den`.
    pub fn logratio(&self, num: &str, den: &str, part_names: &[String]) -> Result<NamedLogratio> {
        let spec = LogratioSpec::new(self.parts_of(num, part_names)?, self.parts_of(den, part_names)?)?;
        Ok(NamedLogratio::new(format!("{num}/{den}"), spec))
    }

    pub fn committed(&self, part_names: &[String]) -> Result<Vec<NamedLogratio>> {
        self.slrs.iter().map(|s| self.logratio(&s.num, &s.den, part_names)).collect()
    }

    /// All `g(g-1)/2` logratios among the children of `parent` (roots when
    /// `None`), each later sibling over an earlier one.
    pub fn sibling_candidates(&self, parent: Option<&str>, part_names: &[String]) -> Result<Vec<NamedLogratio>> {
        if let Some(p) = parent {
            self.require_node(p)?;
        }
        let sibs = self.siblings(parent);
        let mut out = Vec::new();
        for (a, earlier) in sibs.iter().enumerate() {
            for later in &sibs[a + 1..] {
                out.push(self.logratio(later, earlier, part_names)?);
            }
        }
        Ok(out)
    }

    /// Adds top-level amalgamations.
    pub fn add_roots(&mut self, nodes: Vec<HierarchyNode>, part_names: &[String]) -> Result<Vec<String>> {
        let mut next = self.clone();
        next.nodes.extend(nodes);
        let warnings = next.validate(part_names)?;
        *self = next;
        Ok(warnings)
    }

    /// Splits `parent` into the given children, which must partition it.
    pub fn add_split(&mut self, parent: &str, children: Vec<HierarchyNode>, part_names: &[String]) -> Result<Vec<String>> {
        self.require_node(parent)?;
        let mut next = self.clone();
        next.splits.push(Split {
            parent: parent.to_string(),
            children: children.iter().map(|c| c.name.clone()).collect(),
        });
        next.nodes.extend(children);
        let warnings = next.validate(part_names)?;
        *self = next;
        Ok(warnings)
    }

    /// Commits `log(num/den)` as the next step.
    pub fn commit(&mut self, num: &str, den: &str, manual: bool, part_names: &[String]) -> Result<Vec<String>> {
        self.sibling_parent(num, den)?;
        let mut next = self.clone();
        let step = self.slrs.last().map_or(1, |s| s.step + 1);
        next.slrs.push(CommittedSlr {
            step,
            num: num.to_string(),
            den: den.to_string(),
            manual,
        });
        let warnings = next.validate(part_names)?;
        *self = next;
        Ok(warnings)
    }

    /// Summary table of the committed logratios.
    pub fn definitions(&self) -> Vec<SlrDefinition> {
        self.slrs
            .iter()
            .map(|s| SlrDefinition {
                step: s.step,
                logratio: s.name(),
                within: self.parent_of(&s.num).flatten().map(str::to_string),
                numerator: s.num.clone(),
                numerator_parts: self.node(&s.num).map(|n| n.parts.clone()).unwrap_or_default(),
                denominator: s.den.clone(),
                denominator_parts: self.node(&s.den).map(|n| n.parts.clone()).unwrap_or_default(),
                manual: s.manual,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepIncrement<T> {
    pub step: usize,
    pub name: String,
    pub additional_pct: T,
    pub cumulative_pct: T,
    pub manual: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyExplained<T> {
    pub fit: RegressionFit<T>,
    pub steps: Vec<StepIncrement<T>>,
    pub total_pct: T,
    pub warnings: Vec<String>,
}

/// Explained variance of the committed logratios, accumulated in step order.
pub fn hierarchy_explained<T: Scalar>(
    m: &CompositionMatrix<T>,
    weights: &PartWeights<T>,
    h: &AmalgamationHierarchy,
) -> Result<HierarchyExplained<T>> {
    let warnings = h.validate(m.part_names())?;
    let committed = h.committed(m.part_names())?;
    let model = ExplainedVarianceModel::new(m, weights)?;
    let hundred = lit::<T>(100.0);
    let mut specs = Vec::with_capacity(committed.len());
    let mut previous = T::zero();
    let mut steps = Vec::with_capacity(committed.len());
    for (slr, named) in h.slrs.iter().zip(&committed) {
        specs.push(named.spec.clone());
        let cumulative = hundred * model.explained_fraction(&specs)?;
        steps.push(StepIncrement {
            step: slr.step,
            name: named.name.clone(),
            additional_pct: (cumulative - previous).max(T::zero()),
            cumulative_pct: cumulative,
            manual: slr.manual,
        });
        previous = cumulative;
    }
    let fit = model.fit(&specs)?;
    Ok(HierarchyExplained {
        total_pct: hundred * fit.explained_fraction,
        fit,
        steps,
        warnings,
    })
}

/// Selection trace of the committed logratios: at each step every sibling
/// logratio of the same split is scored, giving the tie set the expert chose from.
pub fn hierarchy_trace<T: Scalar>(
    m: &CompositionMatrix<T>,
    weights: &PartWeights<T>,
    h: &AmalgamationHierarchy,
) -> Result<SelectionTrace<T>> {
    h.validate(m.part_names())?;
    let model = ExplainedVarianceModel::new(m, weights)?;
    let names = m.part_names();
    let mut trace = SelectionTrace::new(T::zero());
    let mut committed: Vec<LogratioSpec> = Vec::new();
    for slr in &h.slrs {
        let chosen = h.logratio(&slr.num, &slr.den, names)?;
        let parent = h.parent_of(&slr.num).flatten();
        let candidates = h.sibling_candidates(parent, names)?;
        let step = record_step(&model, slr.step, &committed, &candidates, &chosen, slr.manual)?;
        committed.push(chosen.spec);
        trace.steps.push(step);
    }
    Ok(trace)
}
