use std::fs;

use amalgam_core::io::{read_composition_file, CsvOptions, GroupColumn};
use amalgam_core::ordination::convex_polygons_overlap;
use amalgam_core::scalar::{max_abs, variance_noise_floor};
use amalgam_core::selection::{hierarchy_trace, SelectionTrace, StopReason};
use amalgam_core::workflow::{ordination_view, parse_candidates, OrdinationMode, Target, View, ViewRequest, WeightScheme};
use amalgam_core::{
    explained_variance, prepare, stepwise_select, total_logratio_variance, AmalgamationHierarchy, CodaError,
    CompositionMatrix, NamedLogratio, PcaOptions, Result, StepwiseOptions, VarianceMethod,
};
use amalgam_core::{BiplotScaling, ZeroReport};
use serde_json::json;

use crate::output::{pct, OutDir};
use crate::{Common, OrdinateArgs, SelectArgs};

struct Loaded {
    data: CompositionMatrix<f64>,
    zeros: ZeroReport,
    hierarchy: AmalgamationHierarchy,
    weights: WeightScheme,
}

fn load(c: &Common) -> Result<Loaded> {
    if !(c.closure.is_finite() && c.closure > 0.0) {
        return Err(CodaError::Shape(format!("closure constant must be positive, got {}", c.closure)));
    }
    let group_column = match c.label_col.as_deref() {
        None => GroupColumn::Detect,
        Some("none") => GroupColumn::None,
        Some(name) => GroupColumn::Named(name.to_string()),
    };
    let raw = read_composition_file::<f64>(&c.input, &CsvOptions { group_column })?;
    let (data, zeros) = prepare(&raw, c.closure)?;
    let weights = match c.weights.as_str() {
        "uniform" => WeightScheme::Uniform,
        "mean" => WeightScheme::ColumnMeans,
        "size" => WeightScheme::AmalgamationSize,
        path => WeightScheme::Table(fs::read_to_string(path)?),
    };
    let hierarchy = match &c.hierarchy {
        Some(path) => {
            let h = AmalgamationHierarchy::from_json(&fs::read_to_string(path)?)?;
            for w in h.validate(data.part_names())? {
                eprintln!("warning: {w}");
            }
            h
        }
        None => AmalgamationHierarchy::new(),
    };
    Ok(Loaded {
        data,
        zeros,
        hierarchy,
        weights,
    })
}

fn run_record(command: &str, c: &Common, extra: serde_json::Value) -> serde_json::Value {
    json!({
        "command": command,
        "input": c.input.display().to_string(),
        "label_col": c.label_col,
        "closure": c.closure,
        "weights": c.weights,
        "hierarchy": c.hierarchy.as_ref().map(|p| p.display().to_string()),
        "options": extra,
    })
}

fn print_zeros(z: &ZeroReport) {
    println!("replaced zeros: {} cells", z.total);
    for p in z.per_part.iter().filter(|p| p.replaced > 0) {
        println!("  {}: {}", p.part, p.replaced);
    }
}

pub fn variance(c: &Common) -> Result<()> {
    let Loaded { data, zeros, weights, .. } = load(c)?;
    let j = data.n_parts();
    let w = weights.resolve(&data, &vec![1; j])?;
    let pairs = total_logratio_variance(&data, &w, VarianceMethod::Pairs)?;
    let clr = total_logratio_variance(&data, &w, VarianceMethod::Clr)?;

    println!("parts (J): {j}");
    println!("samples (I): {}", data.n_samples());
    println!("pairwise logratios: {}", j * (j - 1) / 2);
    print_zeros(&zeros);
    println!("weights: {}", weights.label());
    println!("TotLogVar (centred logratios): {:.6}", clr.total);
    println!("TotLogVar (pairwise logratios): {:.6}", pairs.total);
    let scale = max_abs(data.values().map(f64::ln).as_slice());
    if clr.total <= variance_noise_floor(scale) {
        eprintln!("warning: total logratio variance is zero; the samples are compositionally identical");
    }

    let out = OutDir::new(&c.out_dir)?;
    out.write_json(
        "variance.json",
        &json!({
            "n_samples": data.n_samples(),
            "n_parts": j,
            "n_pairs": j * (j - 1) / 2,
            "zero_replacement": zeros,
            "total_clr": clr.total,
            "total_pairs": pairs.total,
            "report": pairs.to_document(data.part_names()),
        }),
    )?;
    out.write_json("run.json", &run_record("variance", c, json!({})))
}

fn candidate_text(arg: &str) -> Result<String> {
    if arg == "all" {
        Ok("all".into())
    } else {
        Ok(fs::read_to_string(arg)?)
    }
}

fn print_trace(trace: &SelectionTrace<f64>) {
    println!("{:>4}  {:<32} {:>7} {:>7}  ties", "step", "logratio", "+%", "cum%");
    println!("{:>4}  {:<32} {:>7} {:>7}", 0, "(none)", "", pct(trace.base_pct));
    for s in &trace.steps {
        let ties = if s.tie_set.len() > 1 { s.tie_set.join(", ") } else { String::new() };
        let mark = if s.manual { " (manual)" } else { "" };
        println!(
            "{:>4}  {:<32} {:>7} {:>7}  {ties}{mark}",
            s.step,
            s.chosen.name,
            pct(s.additional_pct),
            pct(s.cumulative_pct)
        );
    }
    match &trace.stopped {
        Some(StopReason::Collinear { step }) => println!("stopped at step {step}: remaining candidates add nothing"),
        Some(StopReason::BelowFloor { step }) => println!("stopped at step {step}: best increment below floor"),
        Some(StopReason::Exhausted { step }) => println!("stopped at step {step}: no candidates left"),
        None => {}
    }
}

pub fn select(args: &SelectArgs) -> Result<()> {
    let c = &args.common;
    let Loaded {
        data,
        zeros,
        hierarchy,
        weights,
    } = load(c)?;
    let names = data.part_names().to_vec();
    let w = weights.resolve(&data, &vec![1; names.len()])?;
    print_zeros(&zeros);
    let out = OutDir::new(&c.out_dir)?;

    let (trace, chosen): (SelectionTrace<f64>, Vec<NamedLogratio>) = match &args.candidates {
        Some(arg) => {
            let candidates = parse_candidates(&candidate_text(arg)?, &hierarchy, &names)?;
            let seed: Vec<_> = hierarchy.committed(&names)?.into_iter().map(|n| n.spec).collect();
            let steps = args.steps.unwrap_or(names.len() - 1);
            let options = StepwiseOptions { floor_pct: args.floor };
            let trace = stepwise_select(&data, &w, &candidates, steps, &seed, options)?;
            let mut chosen = hierarchy.committed(&names)?;
            chosen.extend(trace.chosen().cloned());
            (trace, chosen)
        }
        None => {
            if c.hierarchy.is_none() {
                return Err(CodaError::Shape("select needs --candidates or --hierarchy".into()));
            }
            let trace = hierarchy_trace(&data, &w, &hierarchy)?;
            out.write_json("definitions.json", &hierarchy.definitions())?;
            (trace, hierarchy.committed(&names)?)
        }
    };
    print_trace(&trace);

    let specs: Vec<_> = chosen.iter().map(|n| n.spec.clone()).collect();
    let fit = explained_variance(&data, &w, &specs)?;
    for warning in &fit.warnings {
        eprintln!("warning: {warning}");
    }
    println!("explained: {}%", pct(100.0 * fit.explained_fraction));
    let predictor_names: Vec<String> = chosen.iter().map(|n| n.name.clone()).collect();
    out.write("trace.csv", &trace.to_csv()?)?;
    out.write_json("trace.json", &trace)?;
    out.write_json("regression.json", &fit.to_document(&predictor_names, &names))?;
    out.write_json(
        "run.json",
        &run_record(
            "select",
            c,
            json!({"candidates": args.candidates, "steps": args.steps, "floor": args.floor}),
        ),
    )
}

pub fn ordinate(args: &OrdinateArgs) -> Result<()> {
    let c = &args.common;
    let Loaded {
        data,
        zeros,
        hierarchy,
        weights,
    } = load(c)?;
    print_zeros(&zeros);
    let mode: OrdinationMode = args.mode.parse()?;
    let target: Target = args.target.parse()?;
    let logratios = match &args.candidates {
        Some(arg) => parse_candidates(&candidate_text(arg)?, &hierarchy, data.part_names())?,
        None => Vec::new(),
    };
    let request = ViewRequest {
        mode,
        target,
        weights,
        pca: PcaOptions {
            standardize: args.standardize,
            scaling: if args.column_principal { BiplotScaling::ColumnPrincipal } else { BiplotScaling::RowPrincipal },
        },
    };
    let view = ordination_view(&data, &hierarchy, &logratios, &request)?;

    let out = OutDir::new(&c.out_dir)?;
    match &view {
        View::Biplot(o) => {
            for (d, p) in o.dim_percentages.iter().enumerate() {
                println!("dim{}: {}%", d + 1, pct(*p));
            }
            if o.dimensions() >= 2 {
                println!("dims 1+2: {}%", pct(o.percentage_in(2)));
            }
            let polygons = o.hull_polygons();
            let mut overlapping = Vec::new();
            for (a, (ga, pa)) in polygons.iter().enumerate() {
                for (gb, pb) in &polygons[a + 1..] {
                    if convex_polygons_overlap(pa, pb) {
                        overlapping.push(format!("{ga}/{gb}"));
                    }
                }
            }
            if polygons.len() > 1 {
                if overlapping.is_empty() {
                    println!("group hulls: disjoint");
                } else {
                    println!("group hulls overlapping: {}", overlapping.join(", "));
                }
            }
            out.write(
                "variables.csv",
                &amalgam_core::ordination::coordinates_csv(&o.variables, None, &o.col_coords)?,
            )?;
        }
        View::Ternary(t) => println!("vertices: {}", t.vertices.join(", ")),
    }
    out.write("coords.csv", &view.rows_csv()?)?;
    out.write_json("ordination.json", &view.to_document())?;
    out.write_json(
        "run.json",
        &run_record(
            "ordinate",
            c,
            json!({
                "mode": args.mode,
                "target": args.target,
                "candidates": args.candidates,
                "standardize": args.standardize,
                "column_principal": args.column_principal,
            }),
        ),
    )
}
