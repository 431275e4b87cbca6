use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use spingeo_core::fieldgrid::{
    commutator_residual, pseudoscalar_wave_residual, Family, GridAnalysis, ResidualField, SpinorField,
};
use spingeo_core::io::{fmt_f64, parse_grid_input, read_text, residual_csv, to_json, write_text, GridInput};
use spingeo_core::{Error, Result};

use crate::{create_dir, Outcome, RunConfig};

/// Families reported when the input names none.
pub const DEFAULT_FAMILIES: [&str; 11] = [
    "dirac",
    "vector_divergence",
    "axial_divergence",
    "left_divergence",
    "right_divergence",
    "trace_balance",
    "trace_balance_swapped",
    "density_gradient",
    "frame_expansion",
    "axial_expansion",
    "connection_defect",
];

/// Outputs beyond the per-node families: the commutator decomposition,
/// the pseudoscalar wave relation, and the rotation coefficients.
const EXTRA: [&str; 3] = ["commutator", "pseudoscalar_wave", "omega"];

#[derive(Debug, Default)]
struct Selection {
    families: Vec<Family>,
    commutator: bool,
    pseudoscalar_wave: bool,
    omega: bool,
}

fn select(names: Option<&Vec<String>>) -> Result<Selection> {
    let defaults: Vec<String> = DEFAULT_FAMILIES.iter().map(|s| s.to_string()).collect();
    let mut sel = Selection::default();
    for name in names.unwrap_or(&defaults) {
        match name.as_str() {
            "all" => {
                sel.families = Family::ALL.to_vec();
                sel.commutator = true;
                sel.pseudoscalar_wave = true;
            }
            "commutator" => sel.commutator = true,
            "pseudoscalar_wave" => sel.pseudoscalar_wave = true,
            "omega" => sel.omega = true,
            other => {
                let f = Family::from_name(other).ok_or_else(|| {
                    let known: Vec<&str> = Family::ALL.iter().map(|f| f.name()).chain(EXTRA).collect();
                    Error::Format(format!("unknown residual family {other:?}; known: {}", known.join(", ")))
                })?;
                if !sel.families.contains(&f) {
                    sel.families.push(f);
                }
            }
        }
    }
    Ok(sel)
}

#[derive(Serialize, Clone)]
pub struct FamilySummary {
    pub name: String,
    pub max: f64,
    /// Root mean square over interior nodes with a value.
    pub l2: f64,
    pub masked: usize,
}

#[derive(Serialize)]
struct FieldSummary {
    dims: [usize; 4],
    spacing: [f64; 4],
    nodes: usize,
    degenerate_nodes: usize,
    families: Vec<FamilySummary>,
}

#[derive(Serialize)]
struct RatioLine {
    name: String,
    /// `max(coarse) / max(fine)` for consecutive levels.
    max_ratios: Vec<f64>,
    l2_ratios: Vec<f64>,
}

#[derive(Serialize)]
struct RefinementSummary {
    levels: Vec<FieldSummary>,
    ratios: Vec<RatioLine>,
}

fn summarize(r: &ResidualField) -> FamilySummary {
    FamilySummary { name: r.name.clone(), max: r.max_interior, l2: r.rms_interior, masked: r.masked }
}

/// Residual fields for the selection, in selection order.
fn residuals(field: &SpinorField, sel: &Selection) -> Result<(Vec<ResidualField>, usize)> {
    let an = GridAnalysis::new(field)?;
    let degenerate = an.degenerate_count();
    let mut out = an.residuals(&sel.families);
    if sel.commutator {
        out.push(commutator_residual(field)?);
    }
    if sel.pseudoscalar_wave {
        out.push(pseudoscalar_wave_residual(field)?);
    }
    Ok((out, degenerate))
}

fn omega_csv(field: &SpinorField) -> Result<String> {
    let an = GridAnalysis::new(field)?;
    let rows: Vec<String> = (0..field.len())
        .into_par_iter()
        .map(|k| {
            let ix = field.multi_index(k);
            let mut row = format!("{},{},{},{}", ix[0], ix[1], ix[2], ix[3]);
            let local = an.local(k);
            for a in 0..4 {
                for b in a + 1..4 {
                    for c in 0..4 {
                        let v = local.as_ref().map_or(f64::NAN, |l| l.omega[a][b][c]);
                        row.push(',');
                        row.push_str(&fmt_f64(v));
                    }
                }
            }
            row
        })
        .collect();
    let mut out = String::from("# i0,i1,i2,i3");
    for a in 0..4 {
        for b in a + 1..4 {
            for c in 0..4 {
                let _ = write!(out, ",omega_{a}{b}{c}");
            }
        }
    }
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}

fn load_field(path: &Path) -> Result<SpinorField> {
    match parse_grid_input(&read_text(path)?)? {
        GridInput::Field(doc) => doc.into_field(),
        GridInput::Refinement(_) => {
            Err(Error::Format(format!("{}: nested refinement documents are not supported", path.display())))
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    match parse_grid_input(&read_text(&config.input)?)? {
        GridInput::Field(doc) => {
            let sel = select(doc.families.as_ref())?;
            let field = doc.into_field()?;
            create_dir(&config.output)?;
            let (fields, degenerate) = residuals(&field, &sel)?;
            for r in &fields {
                write_text(&config.output.join(format!("{}.csv", r.name)), &residual_csv(&field, r))?;
            }
            if sel.omega {
                write_text(&config.output.join("omega.csv"), &omega_csv(&field)?)?;
            }
            let summary = FieldSummary {
                dims: field.dims,
                spacing: field.spacing,
                nodes: field.len(),
                degenerate_nodes: degenerate,
                families: fields.iter().map(summarize).collect(),
            };
            write_text(&config.output.join("summary.json"), &to_json(&summary))?;
        }
        GridInput::Refinement(doc) => {
            let sel = select(doc.families.as_ref())?;
            if doc.refinement.len() < 2 {
                return Err(Error::Format("refinement needs at least two field files".into()));
            }
            let base = config.input.parent().unwrap_or(Path::new("."));
            let mut levels = Vec::new();
            // fields are analysed one at a time to bound memory
            for p in &doc.refinement {
                let field = load_field(&base.join(p))?;
                let (fields, degenerate) = residuals(&field, &sel)?;
                levels.push(FieldSummary {
                    dims: field.dims,
                    spacing: field.spacing,
                    nodes: field.len(),
                    degenerate_nodes: degenerate,
                    families: fields.iter().map(summarize).collect(),
                });
            }
            let ratios = levels[0]
                .families
                .iter()
                .enumerate()
                .map(|(i, f)| RatioLine {
                    name: f.name.clone(),
                    max_ratios: levels.windows(2).map(|w| w[0].families[i].max / w[1].families[i].max).collect(),
                    l2_ratios: levels.windows(2).map(|w| w[0].families[i].l2 / w[1].families[i].l2).collect(),
                })
                .collect();
            create_dir(&config.output)?;
            write_text(&config.output.join("summary.json"), &to_json(&RefinementSummary { levels, ratios }))?;
        }
    }
    Ok(Outcome::Pass)
}
