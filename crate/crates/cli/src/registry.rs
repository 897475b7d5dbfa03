//! Bundled example manifolds and their frozen reference values.

use serde::{Deserialize, Serialize};

use crate::spec::{parse_spec_str, ManifoldSpec};

pub struct Example {
    pub name: &'static str,
    pub summary: &'static str,
    pub spec: &'static str,
    pub golden: &'static str,
}

macro_rules! example {
    ($name:literal, $summary:literal) => {
        Example {
            name: $name,
            summary: $summary,
            spec: include_str!(concat!("../specs/", $name, ".spec")),
            golden: include_str!(concat!("../golden/", $name, ".json")),
        }
    };
}

pub const EXAMPLES: [Example; 6] = [
    example!("ex-flat", "abelian frame, F = 0"),
    example!("ex-f4", "[xi, e1] = e2, [xi, e2] = -e1"),
    example!("ex-f5", "[xi, e1] = e1, [xi, e2] = e2"),
    example!("ex-f45", "[xi, e1] = e1 + e2, [xi, e2] = -e1 + e2"),
    example!("ex-chart", "warped chart exp(-t/2) at the origin"),
    example!("ex-chart-poly", "warped chart 1 + t^2 at t = 1/2"),
];

pub fn find(name: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.name == name)
}

impl Example {
    pub fn manifold(&self) -> ManifoldSpec {
        parse_spec_str(self.spec).expect("bundled specs parse")
    }

    pub fn reference(&self) -> Golden {
        serde_json::from_str(self.golden).expect("bundled golden data parses")
    }
}

/// One component of `F(e_i, e_j, e_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub index: [usize; 3],
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenFlags {
    pub f0: bool,
    pub normal: bool,
    pub eta_closed: bool,
    pub f4: bool,
    pub f5: bool,
    pub f4_plus_f5: bool,
}

/// Reference values, written as exact rationals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Golden {
    pub name: String,
    /// Absolute tolerance for comparison; absent when values must match exactly.
    pub tolerance: Option<f64>,
    pub theta_xi: String,
    pub theta_star_xi: String,
    pub xi_theta_xi: String,
    pub xi_theta_star_xi: String,
    /// Nonzero components of `F`.
    pub f: Vec<Component>,
    pub flags: GoldenFlags,
}
