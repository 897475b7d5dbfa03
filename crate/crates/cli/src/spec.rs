//! Manifold spec files: TOML with rationals written as `"p/q"` strings.
//!
//! ```toml
//! name = "EX-F5(1)"
//! n = 1
//! backend = "lie"
//!
//! [[bracket]]          # [e_i, e_j] has `value` along e_k
//! i = 2
//! j = 0
//! k = 0
//! value = "1"
//!
//! [structure]
//! source = "canonical" # or "explicit" with phi, xi, g
//! ```
//!
//! Chart specs replace the brackets with a `[chart]` table naming a warp
//! from the catalog (`exp` with `rate`, `poly` with `coeffs`), the
//! evaluation `point`, the finite-difference `step` and `richardson`.

use std::path::Path;

use acn_core::backend::chart::DEFAULT_STEP;
use acn_core::backend::StructureConstants;
use acn_core::residual::Tolerance;
use acn_core::scalar::{format_rational, parse_rational};
use acn_core::{AcnStructure, Error as CoreError, FrameEndo, FrameTensor, Rational, Scalar};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },

    #[error("brackets are not antisymmetric at [{i}][{j}][{k}]")]
    Antisymmetry { i: usize, j: usize, k: usize },

    #[error("brackets violate the Jacobi identity at (i, j, l, k) = ({i}, {j}, {l}, {k})")]
    Jacobi { i: usize, j: usize, l: usize, k: usize },

    #[error("structure axiom `{axiom}` fails with residual {residual:e}")]
    StructureAxiom { axiom: String, residual: f64 },

    #[error("{0}")]
    Core(CoreError),
}

impl SpecError {
    fn field(field: impl Into<String>, message: impl ToString) -> Self {
        SpecError::Field { field: field.into(), message: message.to_string() }
    }
}

impl From<CoreError> for SpecError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Antisymmetry { i, j, k } => SpecError::Antisymmetry { i, j, k },
            CoreError::Jacobi { i, j, l, k } => SpecError::Jacobi { i, j, l, k },
            CoreError::StructureAxiom { axiom, residual } => SpecError::StructureAxiom { axiom, residual },
            other => SpecError::Core(other),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: String,
    n: usize,
    backend: String,
    #[serde(default)]
    bracket: Vec<RawBracket>,
    chart: Option<RawChart>,
    structure: Option<RawStructure>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBracket {
    i: usize,
    j: usize,
    k: usize,
    value: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    warp: String,
    rate: Option<String>,
    coeffs: Option<Vec<String>>,
    point: Vec<f64>,
    step: Option<f64>,
    #[serde(default)]
    richardson: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    source: String,
    phi: Option<Vec<Vec<String>>>,
    xi: Option<Vec<String>>,
    g: Option<Vec<Vec<String>>>,
}

/// Warp functions from the fixed catalog, with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub enum WarpSpec {
    /// `exp(rate * t)`.
    Exp { rate: Rational },
    /// `sum_k coeffs[k] t^k`.
    Poly { coeffs: Vec<Rational> },
}

impl WarpSpec {
    pub fn describe(&self) -> String {
        match self {
            WarpSpec::Exp { rate } => format!("exp({} t)", format_rational(rate)),
            WarpSpec::Poly { coeffs } => {
                let terms: Vec<String> =
                    coeffs.iter().enumerate().map(|(k, c)| format!("{} t^{k}", format_rational(c))).collect();
                terms.join(" + ")
            }
        }
    }

    pub fn to_float(&self) -> acn_core::backend::Warp {
        match self {
            WarpSpec::Exp { rate } => acn_core::backend::Warp::Exp { rate: rate.to_f64() },
            WarpSpec::Poly { coeffs } => {
                acn_core::backend::Warp::Poly { coeffs: coeffs.iter().map(Scalar::to_f64).collect() }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    pub warp: WarpSpec,
    pub point: Vec<f64>,
    pub step: f64,
    pub richardson: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpecBody {
    Lie { constants: StructureConstants<Rational>, structure: AcnStructure<Rational> },
    Chart(ChartSpec),
}

/// A validated manifold description.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldSpec {
    pub name: String,
    pub n: usize,
    pub body: SpecBody,
}

impl ManifoldSpec {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            SpecBody::Lie { .. } => "lie",
            SpecBody::Chart(_) => "chart",
        }
    }
}

pub fn parse_spec(path: &Path) -> Result<ManifoldSpec, SpecError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpecError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_spec_str(&text)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

pub fn parse_spec_str(text: &str) -> Result<ManifoldSpec, SpecError> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        SpecError::Syntax { line, column, message: e.message().to_string() }
    })?;
    if raw.n == 0 {
        return Err(SpecError::field("n", "must be at least 1"));
    }
    let dim = 2 * raw.n + 1;
    let body = match raw.backend.as_str() {
        "lie" => {
            if raw.chart.is_some() {
                return Err(SpecError::field("chart", "not allowed with backend = \"lie\""));
            }
            let constants = brackets(dim, &raw.bracket)?;
            let structure = structure(raw.n, raw.structure.as_ref())?;
            SpecBody::Lie { constants, structure }
        }
        "chart" => {
            if !raw.bracket.is_empty() {
                return Err(SpecError::field("bracket", "not allowed with backend = \"chart\""));
            }
            if let Some(st) = &raw.structure {
                if st.source != "canonical" {
                    return Err(SpecError::field("structure.source", "chart models carry the canonical structure"));
                }
            }
            let chart =
                raw.chart.as_ref().ok_or_else(|| SpecError::field("chart", "missing for backend = \"chart\""))?;
            SpecBody::Chart(chart_spec(dim, chart)?)
        }
        other => return Err(SpecError::field("backend", format!("expected \"lie\" or \"chart\", got \"{other}\""))),
    };
    Ok(ManifoldSpec { name: raw.name, n: raw.n, body })
}

fn rational(field: &str, text: &str) -> Result<Rational, SpecError> {
    parse_rational(text).map_err(|e| SpecError::field(field, e))
}

fn brackets(dim: usize, raw: &[RawBracket]) -> Result<StructureConstants<Rational>, SpecError> {
    let mut entries = Vec::with_capacity(raw.len());
    for (idx, b) in raw.iter().enumerate() {
        for (name, v) in [("i", b.i), ("j", b.j), ("k", b.k)] {
            if v >= dim {
                return Err(SpecError::field(
                    format!("bracket[{idx}].{name}"),
                    format!("index {v} out of range for dimension {dim}"),
                ));
            }
        }
        entries.push((b.i, b.j, b.k, rational(&format!("bracket[{idx}].value"), &b.value)?));
    }
    let c = StructureConstants::from_entries(dim, &entries)?;
    c.check_jacobi()?;
    Ok(c)
}

fn matrix(field: &str, rows: &[Vec<String>], dim: usize) -> Result<Vec<Rational>, SpecError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(SpecError::field(field, format!("expected a {dim}x{dim} array")));
    }
    let mut out = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out.push(rational(&format!("{field}[{i}][{j}]"), v)?);
        }
    }
    Ok(out)
}

fn structure(n: usize, raw: Option<&RawStructure>) -> Result<AcnStructure<Rational>, SpecError> {
    let dim = 2 * n + 1;
    let Some(raw) = raw else { return Ok(AcnStructure::canonical(n)) };
    match raw.source.as_str() {
        "canonical" => {
            if raw.phi.is_some() || raw.xi.is_some() || raw.g.is_some() {
                return Err(SpecError::field("structure", "components are only read with source = \"explicit\""));
            }
            Ok(AcnStructure::canonical(n))
        }
        "explicit" => {
            let need = |f: &str| SpecError::field(format!("structure.{f}"), "required with source = \"explicit\"");
            let phi = matrix("structure.phi", raw.phi.as_ref().ok_or_else(|| need("phi"))?, dim)?;
            let g = matrix("structure.g", raw.g.as_ref().ok_or_else(|| need("g"))?, dim)?;
            let xi_raw = raw.xi.as_ref().ok_or_else(|| need("xi"))?;
            if xi_raw.len() != dim {
                return Err(SpecError::field("structure.xi", format!("expected {dim} components")));
            }
            let xi = xi_raw
                .iter()
                .enumerate()
                .map(|(i, v)| rational(&format!("structure.xi[{i}]"), v))
                .collect::<Result<Vec<_>, _>>()?;
            let phi = FrameEndo::new(dim, phi)?;
            let g = FrameTensor::new(dim, 2, g)?;
            Ok(AcnStructure::from_parts_validated(phi, xi, g, None, Tolerance::default())?)
        }
        other => Err(SpecError::field(
            "structure.source",
            format!("expected \"canonical\" or \"explicit\", got \"{other}\""),
        )),
    }
}

fn chart_spec(dim: usize, raw: &RawChart) -> Result<ChartSpec, SpecError> {
    let warp = match raw.warp.as_str() {
        "exp" => {
            let rate =
                raw.rate.as_ref().ok_or_else(|| SpecError::field("chart.rate", "required for warp = \"exp\""))?;
            WarpSpec::Exp { rate: rational("chart.rate", rate)? }
        }
        "poly" => {
            let coeffs =
                raw.coeffs.as_ref().ok_or_else(|| SpecError::field("chart.coeffs", "required for warp = \"poly\""))?;
            if coeffs.is_empty() {
                return Err(SpecError::field("chart.coeffs", "needs at least one coefficient"));
            }
            let coeffs = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| rational(&format!("chart.coeffs[{k}]"), c))
                .collect::<Result<Vec<_>, _>>()?;
            WarpSpec::Poly { coeffs }
        }
        other => return Err(SpecError::field("chart.warp", format!("expected \"exp\" or \"poly\", got \"{other}\""))),
    };
    if raw.point.len() != dim {
        return Err(SpecError::field("chart.point", format!("expected {dim} coordinates")));
    }
    if raw.point.iter().any(|x| !x.is_finite()) {
        return Err(SpecError::field("chart.point", "coordinates must be finite"));
    }
    let step = raw.step.unwrap_or(DEFAULT_STEP);
    if !(1e-6..=1e-2).contains(&step) {
        return Err(SpecError::field("chart.step", format!("{step} outside [1e-6, 1e-2]")));
    }
    Ok(ChartSpec { warp, point: raw.point.clone(), step, richardson: raw.richardson })
}
