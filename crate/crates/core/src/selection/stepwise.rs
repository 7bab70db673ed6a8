//! Candidate scoring and greedy forward selection of logratios.
//!
//! Candidates are ranked by the additional percentage of total logratio
//! variance they explain on top of the committed set. Scores within
//! [`TIE_TOLERANCE`] of each other form a tie; ties are ordered by name so the
//! output is fully deterministic, and the auto-selected candidate is the
//! lexicographically smallest member of the leading tie.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::composition::{CompositionMatrix, LogratioSpec, NamedLogratio, PartWeights};
use crate::error::{CodaError, Result};
use crate::ordination::ExplainedVarianceModel;
use crate::scalar::{lit, Scalar};

/// Tie tolerance in fraction-of-total units.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore<T> {
    pub name: String,
    pub spec: LogratioSpec,
    pub additional_pct: T,
    /// Explained percentage of the committed set plus this candidate.
    pub cumulative_pct: T,
    /// Same pair of sets as a committed logratio (in either orientation).
    pub duplicate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep<T> {
    pub step: usize,
    pub chosen: NamedLogratio,
    pub additional_pct: T,
    pub cumulative_pct: T,
    /// Names of candidates whose increment ties with the best one.
    pub tie_set: Vec<String>,
    /// The chosen logratio was picked by the user rather than the ranking.
    pub manual: bool,
    pub candidates: Vec<CandidateScore<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum StopReason {
    /// Every remaining candidate lies in the span of the committed set.
    Collinear { step: usize },
    /// The best increment fell below the configured floor.
    BelowFloor { step: usize },
    /// No candidates left.
    Exhausted { step: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace<T> {
    /// Explained percentage of the seed set before the first step.
    pub base_pct: T,
    pub steps: Vec<SelectionStep<T>>,
    pub stopped: Option<StopReason>,
}

impl<T: Scalar> SelectionTrace<T> {
    pub fn new(base_pct: T) -> Self {
        Self {
            base_pct,
            steps: Vec::new(),
            stopped: None,
        }
    }

    pub fn final_pct(&self) -> T {
        self.steps.last().map_or(self.base_pct, |s| s.cumulative_pct)
    }

    pub fn chosen(&self) -> impl Iterator<Item = &NamedLogratio> {
        self.steps.iter().map(|s| &s.chosen)
    }

    /// Table with columns `step,chosen,additional_pct,cumulative_pct,tie_set,manual`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["step", "chosen", "additional_pct", "cumulative_pct", "tie_set", "manual"])?;
        let f = |x: T| format!("{}", x.to_f64().unwrap_or(f64::NAN));
        for s in &self.steps {
            w.write_record([
                s.step.to_string(),
                s.chosen.name.clone(),
                f(s.additional_pct),
                f(s.cumulative_pct),
                s.tie_set.join(";"),
                s.manual.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepwiseOptions<T> {
    /// Stop when the best increment (in percent) is below this value.
    pub floor_pct: T,
}

impl<T: Scalar> Default for StepwiseOptions<T> {
    fn default() -> Self {
        Self { floor_pct: T::zero() }
    }
}

fn tie_pct<T: Scalar>() -> T {
    lit::<T>(100.0 * TIE_TOLERANCE)
}

/// Orders scores by decreasing increment; scores within the tie tolerance of
/// a run's leading score are ordered by name.
fn rank<T: Scalar>(scores: &mut Vec<CandidateScore<T>>) {
    scores.sort_by(|a, b| {
        b.additional_pct
            .partial_cmp(&a.additional_pct)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.name.cmp(&b.name))
    });
    let tol = tie_pct::<T>();
    let mut start = 0;
    while start < scores.len() {
        let lead = scores[start].additional_pct;
        let mut end = start + 1;
        while end < scores.len() && lead - scores[end].additional_pct <= tol {
            end += 1;
        }
        scores[start..end].sort_by(|a, b| a.name.cmp(&b.name));
        start = end;
    }
}

/// Names of the candidates tied with the top-ranked one.
pub fn leading_ties<T: Scalar>(ranked: &[CandidateScore<T>]) -> Vec<String> {
    let Some(top) = ranked.iter().map(|s| s.additional_pct).reduce(T::max) else {
        return Vec::new();
    };
    ranked
        .iter()
        .filter(|s| !s.duplicate && top - s.additional_pct <= tie_pct::<T>())
        .map(|s| s.name.clone())
        .collect()
}

/// Scores candidates against a model that is reused across calls.
pub fn evaluate_candidates_with<T: Scalar>(
    model: &ExplainedVarianceModel<'_, T>,
    committed: &[LogratioSpec],
    candidates: &[NamedLogratio],
) -> Result<Vec<CandidateScore<T>>> {
    if candidates.is_empty() {
        return Err(CodaError::InvalidLogratio("no candidates to evaluate".into()));
    }
    let data = model.data();
    let base_columns = committed.iter().map(|s| data.slr_values(s)).collect::<Result<Vec<_>>>()?;
    let candidate_columns = candidates.iter().map(|c| data.slr_values(&c.spec)).collect::<Result<Vec<_>>>()?;
    let hundred = lit::<T>(100.0);
    let base_pct = hundred * model.explained_fraction_of_columns(&base_columns);

    let mut scores: Vec<CandidateScore<T>> = candidates
        .par_iter()
        .zip(candidate_columns.into_par_iter())
        .map(|(cand, column)| {
            let duplicate = committed.iter().any(|c| c.same_span(&cand.spec));
            let (additional, cumulative) = if duplicate {
                (T::zero(), base_pct)
            } else {
                let mut cols = base_columns.clone();
                cols.push(column);
                let cumulative = hundred * model.explained_fraction_of_columns(&cols);
                ((cumulative - base_pct).max(T::zero()), cumulative)
            };
            CandidateScore {
                name: cand.name.clone(),
                spec: cand.spec.clone(),
                additional_pct: additional,
                cumulative_pct: cumulative,
                duplicate,
            }
        })
        .collect();
    rank(&mut scores);
    Ok(scores)
}

/// Additional explained percentage of each candidate on top of `committed`,
/// best first.
pub fn evaluate_candidates<T: Scalar>(
    m: &CompositionMatrix<T>,
    weights: &PartWeights<T>,
    committed: &[LogratioSpec],
    candidates: &[NamedLogratio],
) -> Result<Vec<CandidateScore<T>>> {
    let model = ExplainedVarianceModel::new(m, weights)?;
    evaluate_candidates_with(&model, committed, candidates)
}

/// Builds the trace record for committing `chosen` after `committed`, with
/// the other `candidates` scored alongside for the tie set.
pub fn record_step<T: Scalar>(
    model: &ExplainedVarianceModel<'_, T>,
    step: usize,
    committed: &[LogratioSpec],
    candidates: &[NamedLogratio],
    chosen: &NamedLogratio,
    manual: bool,
) -> Result<SelectionStep<T>> {
    let mut pool: Vec<NamedLogratio> = candidates.to_vec();
    if !pool.iter().any(|c| c.spec == chosen.spec) {
        pool.push(chosen.clone());
    }
    let scores = evaluate_candidates_with(model, committed, &pool)?;
    let own = scores
        .iter()
        .find(|s| s.spec == chosen.spec)
        .expect("chosen logratio is in the pool");
    Ok(SelectionStep {
        step,
        chosen: chosen.clone(),
        additional_pct: own.additional_pct,
        cumulative_pct: own.cumulative_pct,
        tie_set: leading_ties(&scores),
        manual,
        candidates: scores,
    })
}

/// Greedy forward selection of up to `steps` logratios from `candidates`,
/// starting from the `seed` set.
pub fn stepwise_select<T: Scalar>(
    m: &CompositionMatrix<T>,
    weights: &PartWeights<T>,
    candidates: &[NamedLogratio],
    steps: usize,
    seed: &[LogratioSpec],
    options: StepwiseOptions<T>,
) -> Result<SelectionTrace<T>> {
    if steps == 0 {
        return Err(CodaError::InvalidLogratio("step count must be at least 1".into()));
    }
    let model = ExplainedVarianceModel::new(m, weights)?;
    let mut committed: Vec<LogratioSpec> = seed.to_vec();
    let base_pct = lit::<T>(100.0) * model.explained_fraction(&committed)?;
    let mut trace = SelectionTrace::new(base_pct);
    let mut pool: Vec<NamedLogratio> = candidates
        .iter()
        .filter(|c| !committed.iter().any(|s| s.same_span(&c.spec)))
        .cloned()
        .collect();

    for step in 1..=steps {
        if pool.is_empty() {
            trace.stopped = Some(StopReason::Exhausted { step });
            break;
        }
        let scores = evaluate_candidates_with(&model, &committed, &pool)?;
        let best = &scores[0];
        if best.additional_pct <= tie_pct::<T>() {
            trace.stopped = Some(StopReason::Collinear { step });
            break;
        }
        if best.additional_pct < options.floor_pct {
            trace.stopped = Some(StopReason::BelowFloor { step });
            break;
        }
        let chosen = NamedLogratio::new(best.name.clone(), best.spec.clone());
        trace.steps.push(SelectionStep {
            step,
            chosen: chosen.clone(),
            additional_pct: best.additional_pct,
            cumulative_pct: best.cumulative_pct,
            tie_set: leading_ties(&scores),
            manual: false,
            candidates: scores,
        });
        committed.push(chosen.spec.clone());
        pool.retain(|c| !c.spec.same_span(&chosen.spec));
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::all_plrs;

    fn data() -> CompositionMatrix<f64> {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| (0..5).map(|j| 1.0 + ((i * 7 + j * j * 3 + i * j) % 17) as f64).collect())
            .collect();
        CompositionMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn duplicates_score_zero() {
        let m = data();
        let w = PartWeights::uniform(5);
        let plrs = all_plrs(m.part_names());
        let committed = vec![plrs[0].spec.clone()];
        let flipped = NamedLogratio::new("flip", plrs[0].spec.reversed());
        let scores = evaluate_candidates(&m, &w, &committed, &[plrs[0].clone(), flipped, plrs[1].clone()]).unwrap();
        let dup: Vec<_> = scores.iter().filter(|s| s.duplicate).collect();
        assert_eq!(dup.len(), 2);
        assert!(dup.iter().all(|s| s.additional_pct == 0.0));
        assert!(!scores[0].duplicate);
    }

    #[test]
    fn empty_candidates_rejected() {
        let m = data();
        assert!(evaluate_candidates(&m, &PartWeights::uniform(5), &[], &[]).is_err());
    }

    #[test]
    fn ranking_breaks_ties_by_name() {
        let mk = |name: &str, pct: f64| CandidateScore {
            name: name.into(),
            spec: LogratioSpec::pair(0, 1).unwrap(),
            additional_pct: pct,
            cumulative_pct: pct,
            duplicate: false,
        };
        let mut v = vec![mk("b", 5.0), mk("a", 5.0 - 1e-12), mk("c", 7.0), mk("d", 1.0)];
        rank(&mut v);
        let names: Vec<_> = v.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["c", "a", "b", "d"]);
        assert_eq!(leading_ties(&v), vec!["c".to_string()]);
    }

    #[test]
    fn full_selection_reaches_100_percent() {
        let m = data();
        let w = PartWeights::uniform(5);
        let trace = stepwise_select(&m, &w, &all_plrs(m.part_names()), 4, &[], StepwiseOptions::default()).unwrap();
        assert_eq!(trace.steps.len(), 4);
        assert!((trace.final_pct() - 100.0).abs() < 1e-7);
        assert!(trace.steps.windows(2).all(|s| s[1].cumulative_pct >= s[0].cumulative_pct));
        // a fifth step has nothing left to explain
        let trace = stepwise_select(&m, &w, &all_plrs(m.part_names()), 5, &[], StepwiseOptions::default()).unwrap();
        assert_eq!(trace.steps.len(), 4);
        assert_eq!(trace.stopped, Some(StopReason::Collinear { step: 5 }));
    }

    #[test]
    fn floor_stops_early() {
        let m = data();
        let w = PartWeights::uniform(5);
        let opts = StepwiseOptions { floor_pct: 101.0 };
        let trace = stepwise_select(&m, &w, &all_plrs(m.part_names()), 3, &[], opts).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(trace.stopped, Some(StopReason::BelowFloor { step: 1 }));
    }

    #[test]
    fn trace_csv_has_one_row_per_step() {
        let m = data();
        let w = PartWeights::uniform(5);
        let trace = stepwise_select(&m, &w, &all_plrs(m.part_names()), 2, &[], StepwiseOptions::default()).unwrap();
        let csv = trace.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("step,chosen,additional_pct,cumulative_pct,tie_set,manual"));
    }
}
