//! Turns a spec into a backend of the requested numeric kind.

use std::sync::Arc;

use acn_core::backend::chart::{ChartBackend, WarpedChart};
use acn_core::backend::{LieBackend, StructureConstants};
use acn_core::{AcnStructure, Backend, FrameEndo, FrameTensor, Rational, Scalar};

use crate::spec::{ManifoldSpec, SpecBody, SpecError};

/// Default single threshold for finite-difference chart data.
pub const CHART_TOLERANCE: f64 = 1e-5;
/// Default single threshold for the float Lie backend.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

pub enum Loaded {
    Exact(LieBackend<Rational>),
    Float(LieBackend<f64>),
    Chart(ChartBackend),
}

impl Loaded {
    pub fn backend(&self) -> Backend {
        match self {
            Loaded::Exact(_) => Backend::Exact,
            Loaded::Float(_) | Loaded::Chart(_) => Backend::Float,
        }
    }

    /// Pass threshold reported with every check: `None` on the exact backend.
    pub fn tolerance(&self, requested: Option<f64>) -> Option<f64> {
        match self {
            Loaded::Exact(_) => None,
            Loaded::Float(_) => Some(requested.unwrap_or(FLOAT_TOLERANCE)),
            Loaded::Chart(_) => Some(requested.unwrap_or(CHART_TOLERANCE)),
        }
    }
}

/// Runs `$body` with `$b` bound to whichever backend `$loaded` holds.
#[macro_export]
macro_rules! with_backend {
    ($loaded:expr, $b:ident => $body:expr) => {
        match $loaded {
            $crate::engine::Loaded::Exact($b) => $body,
            $crate::engine::Loaded::Float($b) => $body,
            $crate::engine::Loaded::Chart($b) => $body,
        }
    };
}

fn tensor_to_f64(t: &FrameTensor<Rational>) -> FrameTensor<f64> {
    FrameTensor::new(t.dim(), t.order(), t.components().iter().map(Scalar::to_f64).collect()).expect("same shape")
}

fn structure_to_f64(s: &AcnStructure<Rational>) -> Result<AcnStructure<f64>, SpecError> {
    let dim = s.dim();
    let phi = FrameEndo::new(dim, s.phi().components().iter().map(Scalar::to_f64).collect())?;
    let xi = s.xi().iter().map(Scalar::to_f64).collect();
    Ok(AcnStructure::from_parts(phi, xi, tensor_to_f64(s.g()), None)?)
}

pub fn load(spec: &ManifoldSpec, backend: Backend) -> Result<Loaded, SpecError> {
    match (&spec.body, backend) {
        (SpecBody::Lie { constants, structure }, Backend::Exact) => {
            Ok(Loaded::Exact(LieBackend::new(structure.clone(), constants.clone())?))
        }
        (SpecBody::Lie { constants, structure }, Backend::Float) => {
            let c = StructureConstants::new(tensor_to_f64(constants.tensor()))?;
            Ok(Loaded::Float(LieBackend::new(structure_to_f64(structure)?, c)?))
        }
        (SpecBody::Chart(_), Backend::Exact) => Err(SpecError::Field {
            field: "backend".into(),
            message: "chart specs are evaluated by finite differences; use --backend float".into(),
        }),
        (SpecBody::Chart(chart), Backend::Float) => {
            let model = Arc::new(WarpedChart { n: spec.n, warp: chart.warp.to_float() });
            Ok(Loaded::Chart(ChartBackend::with_options(model, chart.point.clone(), chart.step, chart.richardson)?))
        }
    }
}

/// Backend used when the command line does not choose one.
pub fn default_backend(spec: &ManifoldSpec) -> Backend {
    match spec.body {
        SpecBody::Lie { .. } => Backend::Exact,
        SpecBody::Chart(_) => Backend::Float,
    }
}
