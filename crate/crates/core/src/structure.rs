//! Almost contact structures with Norden metric.

use crate::error::{Error, Result};
use crate::residual::{Residual, Tolerance, Verdict};
use crate::scalar::Scalar;
use crate::tensor::{invert_metric, is_symmetric, signature, FrameEndo, FrameTensor};

/// The quadruple `(phi, xi, eta, g)` over a frame of dimension `2n + 1`,
/// with the inverse metric cached.
///
/// `eta` is always derived as `g(., xi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AcnStructure<S> {
    n: usize,
    phi: FrameEndo<S>,
    xi: Vec<S>,
    eta: FrameTensor<S>,
    g: FrameTensor<S>,
    g_inv: FrameTensor<S>,
}

impl<S: Scalar> AcnStructure<S> {
    /// Adapted frame: `phi e_i = e_{n+i}`, `phi e_{n+i} = -e_i`, `phi xi = 0`,
    /// `g = diag(1 x n, -1 x n, 1)`, `xi` last.
    pub fn canonical(n: usize) -> Self {
        assert!(n >= 1, "n must be at least 1");
        let dim = 2 * n + 1;
        let phi = FrameEndo::from_fn(dim, |out, inp| {
            if inp < n && out == inp + n {
                S::one()
            } else if inp >= n && inp < 2 * n && out == inp - n {
                -S::one()
            } else {
                S::zero()
            }
        });
        let g = FrameTensor::from_fn(dim, 2, |i| match (i[0] == i[1], i[0]) {
            (false, _) => S::zero(),
            (true, k) if k >= n && k < 2 * n => -S::one(),
            (true, _) => S::one(),
        });
        let mut xi = vec![S::zero(); dim];
        xi[dim - 1] = S::one();
        Self::from_parts(phi, xi, g, None).expect("canonical structure is nondegenerate")
    }

    /// Assembles a structure from its components. `eta`, when given, must
    /// equal `g(., xi)`; the structure axioms are not checked here (see
    /// [`AcnStructure::validate`]).
    pub fn from_parts(phi: FrameEndo<S>, xi: Vec<S>, g: FrameTensor<S>, eta: Option<Vec<S>>) -> Result<Self> {
        let dim = phi.dim();
        if g.order() != 2 {
            return Err(Error::Shape("metric must have order 2".into()));
        }
        if g.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
        }
        if xi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: xi.len() });
        }
        let derived = FrameTensor::from_fn(dim, 1, |i| {
            (0..dim).fold(S::zero(), |acc, k| acc + g[[i[0], k]].clone() * xi[k].clone())
        });
        if let Some(given) = eta {
            if given.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: given.len() });
            }
            let diff: Vec<S> = given.iter().zip(derived.components()).map(|(a, b)| a.clone() - b.clone()).collect();
            let r = Residual::of_values(&diff);
            if !r.vanishes(Tolerance::default()) {
                return Err(Error::InconsistentEta(r.max_abs));
            }
        }
        let g_inv = invert_metric(&g)?;
        Ok(AcnStructure { n: (dim - 1) / 2, phi, xi, eta: derived, g, g_inv })
    }

    /// Like [`AcnStructure::from_parts`] but rejects structures whose
    /// axioms fail under `tol`.
    pub fn from_parts_validated(
        phi: FrameEndo<S>,
        xi: Vec<S>,
        g: FrameTensor<S>,
        eta: Option<Vec<S>>,
        tol: Tolerance,
    ) -> Result<Self> {
        let s = Self::from_parts(phi, xi, g, eta)?;
        let report = s.validate(tol)?;
        if let Some(bad) = report.checks.iter().find(|c| c.verdict == Verdict::Fail) {
            return Err(Error::StructureAxiom { axiom: bad.name.into(), residual: bad.residual.max_abs });
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn phi(&self) -> &FrameEndo<S> {
        &self.phi
    }

    pub fn xi(&self) -> &[S] {
        &self.xi
    }

    pub fn eta(&self) -> &FrameTensor<S> {
        &self.eta
    }

    pub fn g(&self) -> &FrameTensor<S> {
        &self.g
    }

    pub fn g_inv(&self) -> &FrameTensor<S> {
        &self.g_inv
    }

    /// `(x, y) -> g(phi x, y)`.
    pub fn phi_form(&self) -> FrameTensor<S> {
        self.phi.lower(&self.g).expect("shapes checked at construction")
    }

    /// `g(u, v)` for frame-component vectors.
    pub fn g_of(&self, u: &[S], v: &[S]) -> S {
        bilinear(&self.g, u, v)
    }

    pub fn eta_of(&self, v: &[S]) -> S {
        v.iter().zip(self.eta.components()).fold(
            S::zero(),
            |acc, (a, b)| {
                if a.is_zero() {
                    acc
                } else {
                    acc + a.clone() * b.clone()
                }
            },
        )
    }

    /// Checks every axiom and the consequences derived from them, one residual each.
    pub fn validate(&self, tol: Tolerance) -> Result<ValidationReport> {
        let dim = self.dim();
        let e = |i: usize| unit::<S>(dim, i);
        let mut checks = Vec::new();
        let mut push = |name: &'static str, r: Residual| {
            checks.push(AxiomCheck { name, verdict: r.verdict(tol), residual: r });
        };

        // phi^2 x = -x + eta(x) xi
        let phi2 = self.phi.compose(&self.phi);
        let r = FrameTensor::from_fn(dim, 2, |i| {
            let (out, inp) = (i[0], i[1]);
            let id = if out == inp { S::one() } else { S::zero() };
            phi2[[out, inp]].clone() + id - self.eta[[inp]].clone() * self.xi[out].clone()
        });
        push("phi_squared", Residual::of_tensor(&r));

        push("eta_xi", Residual::of_scalar(&(self.eta_of(&self.xi) - S::one())));

        let r = FrameTensor::from_fn(dim, 2, |i| {
            let (x, y) = (e(i[0]), e(i[1]));
            self.g_of(&self.phi.apply(&x), &self.phi.apply(&y)) + self.g[[i[0], i[1]]].clone()
                - self.eta[[i[0]]].clone() * self.eta[[i[1]]].clone()
        });
        push("norden", Residual::of_tensor(&r));

        push("phi_xi", Residual::of_values(&self.phi.apply(&self.xi)));

        let r = FrameTensor::from_fn(dim, 1, |i| self.eta_of(&self.phi.column(i[0])));
        push("eta_phi", Residual::of_tensor(&r));

        let pf = self.phi_form();
        push("phi_symmetric", Residual::of_difference(&pf, &pf.swapped(0, 1)?));
        push("metric_symmetric", Residual::of_difference(&self.g, &self.g.swapped(0, 1)?));

        let sig = if is_symmetric(&self.g) { Some(signature(&self.g)?) } else { None };
        let expected = (self.n + 1, self.n);
        let sig_ok = sig == Some(expected);
        checks.push(AxiomCheck {
            name: "signature",
            residual: Residual {
                max_abs: if sig_ok { 0.0 } else { 1.0 },
                nonzero: usize::from(!sig_ok),
                backend: S::BACKEND,
            },
            verdict: if sig_ok { Verdict::Pass } else { Verdict::Fail },
        });

        Ok(ValidationReport { checks, signature: sig })
    }

    /// `g~(x, y) = g(x, phi y) + eta(x) eta(y)`.
    pub fn associated_metric(&self) -> AssociatedMetric<S> {
        let pf = self.phi_form();
        let g_tilde = FrameTensor::from_fn(self.dim(), 2, |i| {
            pf[[i[1], i[0]]].clone() + self.eta[[i[0]]].clone() * self.eta[[i[1]]].clone()
        });
        let norden = FrameTensor::from_fn(self.dim(), 2, |i| {
            let (x, y) = (self.phi.column(i[0]), self.phi.column(i[1]));
            bilinear(&g_tilde, &x, &y) + g_tilde[[i[0], i[1]]].clone()
                - self.eta[[i[0]]].clone() * self.eta[[i[1]]].clone()
        });
        AssociatedMetric { g_tilde, norden_residual: Residual::of_tensor(&norden) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssociatedMetric<S> {
    pub g_tilde: FrameTensor<S>,
    /// Residual of `g~(phi x, phi y) = -g~(x, y) + eta(x) eta(y)`.
    pub norden_residual: Residual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub residual: Residual,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
    /// `None` when the metric is not symmetric.
    pub signature: Option<(usize, usize)>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn worst(&self) -> Verdict {
        self.checks.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Pass)
    }

    pub fn get(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub(crate) fn unit<S: Scalar>(dim: usize, i: usize) -> Vec<S> {
    (0..dim).map(|k| if k == i { S::one() } else { S::zero() }).collect()
}

pub(crate) fn bilinear<S: Scalar>(m: &FrameTensor<S>, u: &[S], v: &[S]) -> S {
    let dim = m.dim();
    let mut acc = S::zero();
    for a in 0..dim {
        if u[a].is_zero() {
            continue;
        }
        for b in 0..dim {
            if v[b].is_zero() {
                continue;
            }
            acc = acc + u[a].clone() * v[b].clone() * m[[a, b]].clone();
        }
    }
    acc
}
