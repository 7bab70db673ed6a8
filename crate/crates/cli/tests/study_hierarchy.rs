mod fatty_acids;

use amalgam_core::selection::{hierarchy_explained, hierarchy_trace};
use amalgam_core::{prepare, CompositionMatrix, Matrix, PartWeights};
use fatty_acids::{fatty_acid_hierarchy, parse_fatty_acid, FattyAcid, NAMES, STUDY_LOGRATIOS};

fn names() -> Vec<String> {
    NAMES.iter().map(|s| s.to_string()).collect()
}

#[test]
fn parses_plain_and_mangled_names() {
    let want = FattyAcid {
        branched: false,
        chain: 16,
        bonds: 1,
        omega: Some(7),
    };
    assert_eq!(parse_fatty_acid("16:1(n-7)"), Some(want.clone()));
    assert_eq!(parse_fatty_acid("X16.1.n.7."), Some(want));
    assert!(parse_fatty_acid("i-15:0").unwrap().branched);
    assert!(parse_fatty_acid("X.a.15.0").is_none());
    assert!(parse_fatty_acid("a.15.0").unwrap().branched);
    assert!(parse_fatty_acid("Season").is_none());
}

#[test]
fn study_hierarchy_has_twelve_amalgamations() {
    let names = names();
    let mut h = fatty_acid_hierarchy(&names).unwrap();
    assert_eq!(h.nodes.len(), 12);
    assert_eq!(h.roots(), ["SFA", "MUFA", "PUFA"]);
    let sizes: Vec<usize> = ["SFA", "MUFA", "PUFA"].iter().map(|r| h.node(r).unwrap().parts.len()).collect();
    assert_eq!(sizes, [11, 14, 15]);
    assert_eq!(h.node("nX").unwrap().parts, ["16:2(n-4)", "16:3(n-4)", "16:4(n-1)"]);
    let first: Vec<String> = h.sibling_candidates(None, &names).unwrap().into_iter().map(|c| c.name).collect();
    assert_eq!(first, ["MUFA/SFA", "PUFA/SFA", "PUFA/MUFA"]);
    for (num, den, manual) in STUDY_LOGRATIOS {
        h.commit(num, den, manual, &names).unwrap();
    }
    let defs = h.definitions();
    assert_eq!(defs.len(), 7);
    assert_eq!(defs[2].within.as_deref(), Some("PUFA"));
    assert!(defs[2].manual);
}

#[test]
fn study_workflow_runs_on_synthetic_values() {
    let names = names();
    let values = Matrix::from_fn(42, 40, |i, j| {
        if (i + 3 * j) % 29 == 0 {
            0.0
        } else {
            1.0 + ((i * 7 + j * 13 + i * j) % 23) as f64 + 0.1 * (j as f64 * 0.7 + i as f64).sin()
        }
    });
    let labels = (1..=42).map(|i| i.to_string()).collect();
    let raw = CompositionMatrix::new(values, names.clone(), labels, None).unwrap();
    let (m, zeros) = prepare(&raw, 100.0).unwrap();
    assert!(zeros.total > 0);
    let mut h = fatty_acid_hierarchy(&names).unwrap();
    for (num, den, manual) in STUDY_LOGRATIOS {
        h.commit(num, den, manual, &names).unwrap();
    }
    let w = PartWeights::uniform(40);
    let explained = hierarchy_explained(&m, &w, &h).unwrap();
    assert_eq!(explained.steps.len(), 7);
    for pair in explained.steps.windows(2) {
        assert!(pair[1].cumulative_pct >= pair[0].cumulative_pct - 1e-9);
    }
    let trace = hierarchy_trace(&m, &w, &h).unwrap();
    assert!((trace.final_pct() - explained.total_pct).abs() < 1e-9);
    // after the first top-level logratio the other two tie
    assert_eq!(trace.steps[1].tie_set, ["MUFA/SFA", "PUFA/MUFA"]);
}
