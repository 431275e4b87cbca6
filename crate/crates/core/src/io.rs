//! File formats: field and problem documents (JSON) and the CSV/JSON
//! outputs written by the command-line driver.
//!
//! Numbers in CSV files are written with 17 significant digits; JSON output
//! uses the shortest representation that reads back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::Spinor;
use crate::error::{Error, Result};
use crate::fieldgrid::{AxialMode, Couplings, ResidualField, SpinorField};
use crate::radial::{
    AxialProfile, GridKind, NonlinearOptions, Potential, RadialGrid, RadialProblem, RadialState, Table,
};

/// Parses JSON, reporting the line and column of the first error.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text)
        .map_err(|e| Error::Format(format!("line {}, column {}: {}", e.line(), e.column(), e)))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::File { path: path.display().to_string(), source })
}

/// `{:.16e}` formatting, which round-trips every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingsDoc {
    #[serde(alias = "charge", default)]
    pub e: f64,
    #[serde(alias = "axial", default)]
    pub g: f64,
    #[serde(alias = "mass")]
    pub m: f64,
}

/// Field document: `psi` holds eight numbers per node (re/im of `u_L, d_L,
/// u_R, d_R`), `A` and `aleph` four frame components per node. Nodes are in
/// row-major order with axis 3 fastest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldDoc {
    pub dims: [usize; 4],
    pub spacing: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 4]>,
    pub couplings: CouplingsDoc,
    pub psi: Vec<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aleph: Option<Vec<f64>>,
    /// `"given"` (default) or `"gradient"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axial_mode: Option<String>,
    /// Residual families to report; a default set when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<String>>,
}

fn quads(values: &[f64], nodes: usize, name: &str) -> Result<Vec<[f64; 4]>> {
    if values.len() != 4 * nodes {
        return Err(Error::Format(format!(
            "{name} has {} numbers, expected {} (4 per node)",
            values.len(),
            4 * nodes
        )));
    }
    Ok(values.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect())
}

impl FieldDoc {
    pub fn into_field(self) -> Result<SpinorField> {
        let nodes: usize = self.dims.iter().product();
        if self.psi.len() != 8 * nodes {
            return Err(Error::Format(format!(
                "psi has {} numbers, expected {} (8 per node)",
                self.psi.len(),
                8 * nodes
            )));
        }
        let psi = self
            .psi
            .chunks_exact(8)
            .map(|c| {
                Spinor::new(
                    Complex64::new(c[0], c[1]),
                    Complex64::new(c[2], c[3]),
                    Complex64::new(c[4], c[5]),
                    Complex64::new(c[6], c[7]),
                )
            })
            .collect();
        let couplings = Couplings { charge: self.couplings.e, axial: self.couplings.g, mass: self.couplings.m };
        let mut field = SpinorField::new(self.dims, self.spacing, couplings, psi)?;
        if let Some(o) = self.origin {
            field.origin = o;
        }
        if let Some(a) = &self.potential {
            field.potential = Some(quads(a, nodes, "A")?);
        }
        if let Some(a) = &self.aleph {
            field.aleph = Some(quads(a, nodes, "aleph")?);
        }
        field.axial_mode = match self.axial_mode.as_deref() {
            None | Some("given") => AxialMode::Given,
            Some("gradient") => AxialMode::Gradient,
            Some(other) => return Err(Error::Format(format!("unknown axial_mode {other:?}"))),
        };
        Ok(field)
    }

    pub fn from_field(field: &SpinorField) -> Self {
        let psi = field.psi.iter().flat_map(|s| s.iter().flat_map(|z| [z.re, z.im])).collect();
        let flat = |v: &Option<Vec<[f64; 4]>>| v.as_ref().map(|v| v.iter().flatten().copied().collect());
        FieldDoc {
            dims: field.dims,
            spacing: field.spacing,
            origin: Some(field.origin),
            couplings: CouplingsDoc {
                e: field.couplings.charge,
                g: field.couplings.axial,
                m: field.couplings.mass,
            },
            psi,
            potential: flat(&field.potential),
            aleph: flat(&field.aleph),
            axial_mode: match field.axial_mode {
                AxialMode::Given => None,
                AxialMode::Gradient => Some("gradient".into()),
            },
            families: None,
        }
    }
}

/// Refinement study: field files (paths relative to this document) ordered
/// from coarse to fine, each halving the spacing of the previous one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementDoc {
    pub refinement: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<String>>,
}

/// Grid-analysis input, either a field or a refinement study.
#[derive(Debug, Clone)]
pub enum GridInput {
    Field(Box<FieldDoc>),
    Refinement(RefinementDoc),
}

pub fn parse_grid_input(text: &str) -> Result<GridInput> {
    let value: serde_json::Value = parse_json(text)?;
    if value.get("refinement").is_some() {
        Ok(GridInput::Refinement(parse_json(text)?))
    } else {
        Ok(GridInput::Field(Box::new(parse_json(text)?)))
    }
}

/// Residual CSV: `# i0,i1,i2,i3,value` then one row per node; masked nodes
/// hold `nan`.
pub fn residual_csv(field: &SpinorField, residual: &ResidualField) -> String {
    let mut out = String::from("# i0,i1,i2,i3,value\n");
    for (k, v) in residual.values.iter().enumerate() {
        let ix = field.multi_index(k);
        let _ = writeln!(out, "{},{},{},{},{}", ix[0], ix[1], ix[2], ix[3], fmt_f64(*v));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableDoc {
    Columns { r: Vec<f64>, values: Vec<f64> },
    Pairs(Vec<[f64; 2]>),
}

impl TableDoc {
    pub fn to_table(&self) -> Result<Table> {
        match self {
            TableDoc::Columns { r, values } => Table::new(r.clone(), values.clone()),
            TableDoc::Pairs(p) => Table::new(p.iter().map(|v| v[0]).collect(), p.iter().map(|v| v[1]).collect()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxialDoc {
    Preset(String),
    Table(TableDoc),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDoc {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    #[serde(default = "default_grid_kind")]
    pub kind: String,
}

fn default_grid_kind() -> String {
    "log".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonlinearDoc {
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub density_scale: Option<f64>,
    #[serde(default)]
    pub bracket_half_width: Option<f64>,
}

fn default_damping() -> f64 {
    0.5
}

impl NonlinearDoc {
    pub fn options(&self) -> NonlinearOptions {
        let d = NonlinearOptions::default();
        NonlinearOptions {
            damping: self.damping,
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            density_scale: self.density_scale.unwrap_or(d.density_scale),
            bracket_half_width: self.bracket_half_width.unwrap_or(d.bracket_half_width),
        }
    }
}

/// Radial problem document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemDoc {
    pub m: f64,
    #[serde(default = "default_charge")]
    pub e: f64,
    #[serde(default)]
    pub g: f64,
    #[serde(rename = "Zalpha", default, skip_serializing_if = "Option::is_none")]
    pub z_alpha: Option<f64>,
    #[serde(rename = "A0_table", default, skip_serializing_if = "Option::is_none")]
    pub a0_table: Option<TableDoc>,
    /// `"zero"`, `"arcsin_angle"` (also `"eq417"`) or a table of `aleph(r)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aleph: Option<AxialDoc>,
    pub k: u32,
    pub grid: GridDoc,
    pub bracket: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinear: Option<NonlinearDoc>,
}

fn default_charge() -> f64 {
    1.0
}

impl ProblemDoc {
    pub fn to_problem(&self) -> Result<RadialProblem> {
        let potential = match (&self.z_alpha, &self.a0_table) {
            (Some(_), Some(_)) => {
                return Err(Error::Format("give either Zalpha or A0_table, not both".into()))
            }
            (Some(z), None) => Potential::Coulomb { z_alpha: *z },
            (None, Some(t)) => Potential::Table(t.to_table()?),
            (None, None) => Potential::Zero,
        };
        let axial = match &self.aleph {
            None => AxialProfile::Zero,
            Some(AxialDoc::Preset(name)) => match name.as_str() {
                "zero" => AxialProfile::Zero,
                "arcsin_angle" | "eq417" => AxialProfile::ArcsinAngle,
                other => return Err(Error::Format(format!("unknown aleph preset {other:?}"))),
            },
            Some(AxialDoc::Table(t)) => AxialProfile::Table(t.to_table()?),
        };
        let kind = match self.grid.kind.as_str() {
            "log" => GridKind::Log,
            "uniform" => GridKind::Uniform,
            other => return Err(Error::Format(format!("unknown grid kind {other:?}"))),
        };
        let p = RadialProblem {
            mass: self.m,
            charge: self.e,
            axial_coupling: self.g,
            potential,
            axial,
            k: self.k,
            grid: RadialGrid { r_min: self.grid.r_min, r_max: self.grid.r_max, n: self.grid.n, kind },
            energy_scale: None,
        };
        p.validate()?;
        Ok(p)
    }
}

/// State CSV: `r`, real and imaginary parts of `u_L, d_L, u_R, d_R`, and the
/// summed squared modulus.
pub fn state_csv(state: &RadialState) -> String {
    let mut out = String::from("# r,re_uL,im_uL,re_dL,im_dL,re_uR,im_uR,re_dR,im_dR,density\n");
    for (r, c) in state.r.iter().zip(&state.components) {
        let dens: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        let mut row = fmt_f64(*r);
        for z in c {
            row.push(',');
            row.push_str(&fmt_f64(z.re));
            row.push(',');
            row.push_str(&fmt_f64(z.im));
        }
        row.push(',');
        row.push_str(&fmt_f64(dens));
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Spinor list for classification: each entry holds eight numbers.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpinorListDoc {
    Wrapped { spinors: Vec<[f64; 8]> },
    Bare(Vec<[f64; 8]>),
}

impl SpinorListDoc {
    pub fn spinors(&self) -> Vec<Spinor> {
        let list = match self {
            SpinorListDoc::Wrapped { spinors } => spinors,
            SpinorListDoc::Bare(v) => v,
        };
        list.iter()
            .map(|c| {
                Spinor::new(
                    Complex64::new(c[0], c[1]),
                    Complex64::new(c[2], c[3]),
                    Complex64::new(c[4], c[5]),
                    Complex64::new(c[6], c[7]),
                )
            })
            .collect()
    }
}
