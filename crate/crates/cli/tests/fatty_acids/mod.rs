//! Classification of fatty-acid column names into the expert hierarchy of
//! saturated, mono- and polyunsaturated groups and their subgroups.

#![allow(dead_code)]

use std::collections::BTreeMap;

use amalgam_core::selection::HierarchyNode;
use amalgam_core::AmalgamationHierarchy;
use regex::Regex;

/// The seven logratios committed in the study, in order, with the manual flag.
pub const STUDY_LOGRATIOS: [(&str, &str, bool); 7] = [
    ("PUFA", "SFA", false),
    ("MUFA", "SFA", false),
    ("n3", "n6", true),
    ("n3", "nX", false),
    ("long", "short", false),
    ("C14+C18", "C16+C20", false),
    ("iso-anteiso", "odd", false),
];

/// Column names with the group structure of the study.
pub const NAMES: [&str; 40] = [
    "14:0", "14:1(n-5)", "i-15:0", "a-15:0", "15:0", "15:1(n-6)", "i-16:0", "16:0", "16:1(n-7)", "16:1(n-5)",
    "16:2(n-4)", "i-17:0", "a-17:0", "16:3(n-4)", "17:0", "16:4(n-1)", "17:1(n-8)", "18:0", "18:1(n-9)",
    "18:1(n-7)", "18:2(n-6)", "18:3(n-6)", "18:3(n-3)", "18:4(n-3)", "20:0", "20:1(n-11)", "20:1(n-9)",
    "20:1(n-7)", "20:2(n-6)", "20:3(n-3)", "20:4(n-6)", "20:4(n-3)", "20:5(n-3)", "22:1(n-11)", "22:1(n-9)",
    "22:1(n-7)", "22:5(n-6)", "22:5(n-3)", "22:6(n-3)", "24:1(n-9)",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FattyAcid {
    pub branched: bool,
    pub chain: u32,
    pub bonds: u32,
    pub omega: Option<u32>,
}

/// Parses names like `16:1(n-7)`, `i-15:0`, or their R-mangled forms `X16.1.n.7.`.
pub fn parse_fatty_acid(name: &str) -> Option<FattyAcid> {
    let re = Regex::new(r"^X?(?:([ia])[-.])?(\d+)[:.](\d+)(?:[.(]*n[-.]?(\d+)[.)]*)?$").unwrap();
    let c = re.captures(name.trim())?;
    Some(FattyAcid {
        branched: c.get(1).is_some(),
        chain: c[2].parse().ok()?,
        bonds: c[3].parse().ok()?,
        omega: c.get(4).and_then(|m| m.as_str().parse().ok()),
    })
}

/// The expert hierarchy of the fatty-acid study, built from column names.
pub fn fatty_acid_hierarchy(part_names: &[String]) -> Result<AmalgamationHierarchy, String> {
    let mut buckets: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for name in part_names {
        let fa = parse_fatty_acid(name).ok_or_else(|| format!("cannot classify column `{name}`"))?;
        let bucket = match (fa.bonds, fa.branched, fa.chain, fa.omega) {
            (0, true, _, _) => "iso-anteiso",
            (0, false, 14 | 18, _) => "C14+C18",
            (0, false, 16 | 20, _) => "C16+C20",
            (0, false, 15 | 17, _) => "odd",
            (0, ..) => return Err(format!("saturated `{name}` fits no subgroup")),
            (1, _, c, _) if c <= 18 => "short",
            (1, ..) => "long",
            (_, _, _, Some(3)) => "n3",
            (_, _, _, Some(6)) => "n6",
            _ => "nX",
        };
        buckets.entry(bucket).or_default().push(name.clone());
    }
    let get = |k: &str| buckets.get(k).cloned().unwrap_or_default();
    let sizes: Vec<usize> = ["C14+C18", "C16+C20", "iso-anteiso", "odd", "short", "long", "n3", "n6", "nX"]
        .iter()
        .map(|k| get(k).len())
        .collect();
    if sizes != [2, 2, 5, 2, 7, 7, 7, 5, 3] {
        return Err(format!("unexpected group sizes {sizes:?}"));
    }
    let concat = |ks: &[&str]| ks.iter().flat_map(|k| get(k)).collect::<Vec<_>>();
    let node = |n: &str, ks: &[&str]| HierarchyNode::new(n, concat(ks));
    let mut h = AmalgamationHierarchy::new();
    let e = |e: amalgam_core::CodaError| e.to_string();
    h.add_roots(
        vec![
            node("SFA", &["C14+C18", "C16+C20", "iso-anteiso", "odd"]),
            node("MUFA", &["short", "long"]),
            node("PUFA", &["n3", "n6", "nX"]),
        ],
        part_names,
    )
    .map_err(e)?;
    h.add_split("PUFA", vec![node("n3", &["n3"]), node("n6", &["n6"]), node("nX", &["nX"])], part_names)
        .map_err(e)?;
    h.add_split("MUFA", vec![node("short", &["short"]), node("long", &["long"])], part_names).map_err(e)?;
    h.add_split(
        "SFA",
        vec![
            node("C14+C18", &["C14+C18"]),
            node("C16+C20", &["C16+C20"]),
            node("iso-anteiso", &["iso-anteiso"]),
            node("odd", &["odd"]),
        ],
        part_names,
    )
    .map_err(e)?;
    Ok(h)
}
