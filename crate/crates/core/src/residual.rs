//! Residual measurement and acceptance verdicts.

use std::fmt;

use crate::scalar::{Backend, Scalar};
use crate::tensor::FrameTensor;

/// Float residuals below this are accepted.
pub const FLOAT_ACCEPT: f64 = 1e-9;
/// Float residuals above this are rejected; values in between warn.
pub const FLOAT_REJECT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Warn => "warn",
            Verdict::Fail => "fail",
        })
    }
}

/// Thresholds used to turn a residual into a verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub accept: f64,
    pub reject: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { accept: FLOAT_ACCEPT, reject: FLOAT_REJECT }
    }
}

impl Tolerance {
    /// Single threshold: below passes, above fails.
    pub fn strict(tol: f64) -> Self {
        Tolerance { accept: tol, reject: tol }
    }
}

/// Worst-case deviation of a tensor identity, measured over all index tuples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub max_abs: f64,
    /// Number of components that are not exactly zero.
    pub nonzero: usize,
    pub backend: Backend,
}

impl Residual {
    pub const fn zero(backend: Backend) -> Self {
        Residual { max_abs: 0.0, nonzero: 0, backend }
    }

    pub fn of_values<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> Self {
        let mut r = Residual::zero(S::BACKEND);
        for v in values {
            if !v.is_zero() {
                r.nonzero += 1;
                let m = if v.is_finite() { v.magnitude() } else { f64::INFINITY };
                r.max_abs = r.max_abs.max(m);
            }
        }
        r
    }

    pub fn of_tensor<S: Scalar>(t: &FrameTensor<S>) -> Self {
        Self::of_values(t.components())
    }

    pub fn of_scalar<S: Scalar>(v: &S) -> Self {
        Self::of_values(std::iter::once(v))
    }

    pub fn of_difference<S: Scalar>(a: &FrameTensor<S>, b: &FrameTensor<S>) -> Self {
        let diffs: Vec<S> = a.components().iter().zip(b.components()).map(|(x, y)| x.clone() - y.clone()).collect();
        Self::of_values(&diffs)
    }

    pub fn max(self, other: Residual) -> Residual {
        Residual {
            max_abs: self.max_abs.max(other.max_abs),
            nonzero: self.nonzero + other.nonzero,
            backend: self.backend,
        }
    }

    /// Exact backend: zero iff no component is nonzero. Float backend: graded by `tol`.
    pub fn verdict(&self, tol: Tolerance) -> Verdict {
        match self.backend {
            Backend::Exact => {
                if self.nonzero == 0 {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            Backend::Float => {
                if self.max_abs.is_nan() || self.max_abs > tol.reject {
                    Verdict::Fail
                } else if self.max_abs < tol.accept || self.max_abs == 0.0 {
                    Verdict::Pass
                } else {
                    Verdict::Warn
                }
            }
        }
    }

    /// Accepting warnings as passes.
    pub fn vanishes(&self, tol: Tolerance) -> bool {
        self.verdict(tol) != Verdict::Fail
    }

    pub fn is_exact_zero(&self) -> bool {
        self.nonzero == 0
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.backend {
            Backend::Exact if self.nonzero == 0 => f.write_str("0 (exact)"),
            Backend::Exact => write!(f, "{:.3e} ({} nonzero)", self.max_abs, self.nonzero),
            Backend::Float => write!(f, "{:.3e}", self.max_abs),
        }
    }
}
