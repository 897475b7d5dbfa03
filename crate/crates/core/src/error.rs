use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("slot {slot} out of range for a tensor of order {order}")]
    SlotOutOfRange { slot: usize, order: usize },

    #[error("frame dimension {0} is not an odd number >= 3")]
    BadDimension(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate metric: matrix is singular")]
    DegenerateMetric,

    #[error("structure constants are not antisymmetric at [{i}][{j}][{k}]")]
    Antisymmetry { i: usize, j: usize, k: usize },

    #[error("Jacobi identity fails at (i, j, l, k) = ({i}, {j}, {l}, {k})")]
    Jacobi { i: usize, j: usize, l: usize, k: usize },

    #[error("structure axiom `{axiom}` violated (residual {residual:e})")]
    StructureAxiom { axiom: String, residual: f64 },

    #[error("eta is not g(., xi): residual {0:e}")]
    InconsistentEta(f64),

    #[error("manifold is not in the required class: {0}")]
    ClassViolation(String),

    #[error("internal inconsistency: {check} residual {residual:e}")]
    Inconsistent { check: String, residual: f64 },

    #[error("non-finite value while evaluating {0}")]
    NonFinite(String),

    #[error("finite-difference step {0} outside [1e-6, 1e-2]")]
    BadStep(f64),

    #[error("operation requires the float backend: {0}")]
    BackendUnsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}
