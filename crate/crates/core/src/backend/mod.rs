//! Differential-geometry substrate behind one interface.
//!
//! A [`GeometryBackend`] supplies three things at its evaluation point:
//! frame brackets, the Levi-Civita connection, and frame derivatives of
//! tensor fields. The Lie backend is exact and every left-invariant field has
//! vanishing derivatives; the chart backend evaluates closed-form metric and
//! frame fields and differentiates by central differences.

pub mod chart;
pub mod lie;

use crate::error::{Error, Result};
use crate::residual::{Residual, Tolerance};
use crate::scalar::Scalar;
use crate::structure::AcnStructure;
use crate::tensor::FrameTensor;

pub use chart::{ChartBackend, ChartModel, Warp, WarpedChart};
pub use lie::{levi_civita_lie, LieBackend};

/// Structure constants `[e_i, e_j] = sum_k c[[i, j, k]] e_k` of the frame.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants<S> {
    c: FrameTensor<S>,
}

impl<S: Scalar> StructureConstants<S> {
    /// Checks antisymmetry; the Jacobi identity is checked separately.
    pub fn new(c: FrameTensor<S>) -> Result<Self> {
        if c.order() != 3 {
            return Err(Error::Shape("structure constants need order 3".into()));
        }
        let dim = c.dim();
        for i in 0..dim {
            for j in 0..=i {
                for k in 0..dim {
                    if !(c[[i, j, k]].clone() + c[[j, i, k]].clone()).is_zero() {
                        let (i, j) = if c[[i, j, k]].is_zero() { (j, i) } else { (i, j) };
                        return Err(Error::Antisymmetry { i, j, k });
                    }
                }
            }
        }
        Ok(StructureConstants { c })
    }

    pub fn abelian(dim: usize) -> Self {
        StructureConstants { c: FrameTensor::zeros(dim, 3) }
    }

    /// Builds from `(i, j, k, value)` triples meaning `[e_i, e_j]` has `value`
    /// along `e_k`; the `[e_j, e_i]` entry is filled in by antisymmetry unless
    /// it is also listed, in which case the two must agree.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, usize, S)]) -> Result<Self> {
        let mut c = FrameTensor::<S>::zeros(dim, 3);
        let mut set = vec![false; dim * dim * dim];
        for (i, j, k, v) in entries {
            let (i, j, k) = (*i, *j, *k);
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::SlotOutOfRange { slot: i.max(j).max(k), order: dim });
            }
            let flat = (i * dim + j) * dim + k;
            if set[flat] && c[[i, j, k]] != *v {
                return Err(Error::Antisymmetry { i, j, k });
            }
            c[[i, j, k]] = v.clone();
            set[flat] = true;
            let mirror = (j * dim + i) * dim + k;
            if !set[mirror] {
                c[[j, i, k]] = -v.clone();
            }
        }
        Self::new(c)
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn tensor(&self) -> &FrameTensor<S> {
        &self.c
    }

    /// Bracket of two vectors with constant frame components.
    pub fn bracket(&self, u: &[S], v: &[S]) -> Vec<S> {
        let dim = self.dim();
        let mut out = vec![S::zero(); dim];
        for i in 0..dim {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..dim {
                if v[j].is_zero() {
                    continue;
                }
                let w = u[i].clone() * v[j].clone();
                for (k, o) in out.iter_mut().enumerate() {
                    let cijk = &self.c[[i, j, k]];
                    if !cijk.is_zero() {
                        *o = o.clone() + w.clone() * cijk.clone();
                    }
                }
            }
        }
        out
    }

    /// Cyclic sum `[[e_i, e_j], e_l] + [[e_j, e_l], e_i] + [[e_l, e_i], e_j]`
    /// as an order-4 tensor `(i, j, l, k)`.
    pub fn jacobiator(&self) -> FrameTensor<S> {
        let dim = self.dim();
        let c = &self.c;
        let nested = |i: usize, j: usize, l: usize, k: usize| {
            (0..dim).fold(S::zero(), |acc, m| {
                let a = &c[[i, j, m]];
                if a.is_zero() {
                    acc
                } else {
                    acc + a.clone() * c[[m, l, k]].clone()
                }
            })
        };
        FrameTensor::from_fn(dim, 4, |x| {
            let (i, j, l, k) = (x[0], x[1], x[2], x[3]);
            nested(i, j, l, k) + nested(j, l, i, k) + nested(l, i, j, k)
        })
    }

    pub fn check_jacobi(&self) -> Result<()> {
        let jac = self.jacobiator();
        let mut failure = None;
        jac.for_each(|idx, v| {
            if failure.is_none() && !v.is_zero() && (S::EXACT || v.magnitude() > 1e-9) {
                failure = Some((idx[0], idx[1], idx[2], idx[3]));
            }
        });
        match failure {
            Some((i, j, l, k)) => Err(Error::Jacobi { i, j, l, k }),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    LeviCivita,
    Deformed,
    Direct,
}

/// Frame coefficients `nabla_{e_i} e_j = sum_k gamma[[i, j, k]] e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionCoeffs<S> {
    gamma: FrameTensor<S>,
    provenance: Provenance,
}

impl<S: Scalar> ConnectionCoeffs<S> {
    pub fn new(gamma: FrameTensor<S>, provenance: Provenance) -> Result<Self> {
        if gamma.order() != 3 {
            return Err(Error::Shape("connection coefficients need order 3".into()));
        }
        Ok(ConnectionCoeffs { gamma, provenance })
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn gamma(&self) -> &FrameTensor<S> {
        &self.gamma
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `nabla_x y` for vectors with constant frame components.
    pub fn covariant(&self, x: &[S], y: &[S]) -> Vec<S> {
        let dim = self.dim();
        let mut out = vec![S::zero(); dim];
        for i in 0..dim {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..dim {
                if y[j].is_zero() {
                    continue;
                }
                let w = x[i].clone() * y[j].clone();
                for (k, o) in out.iter_mut().enumerate() {
                    let gk = &self.gamma[[i, j, k]];
                    if !gk.is_zero() {
                        *o = o.clone() + w.clone() * gk.clone();
                    }
                }
            }
        }
        out
    }

    /// `nabla' = nabla + Q` where `q_mixed[[x, y, k]]` are the frame
    /// components of the vector `Q(e_x, e_y)`.
    pub fn deformed(&self, q_mixed: &FrameTensor<S>) -> Result<Self> {
        Ok(ConnectionCoeffs { gamma: self.gamma.add(q_mixed)?, provenance: Provenance::Deformed })
    }

    /// The (0,3) deformation `g(other_x y - self_x y, z)`.
    pub fn deformation_to(&self, other: &Self, g: &FrameTensor<S>) -> Result<FrameTensor<S>> {
        other.gamma.sub(&self.gamma)?.lower(g, 2)
    }

    pub fn residual_against(&self, other: &Self) -> Residual {
        Residual::of_difference(&self.gamma, &other.gamma)
    }
}

/// The geometric substrate at one evaluation point.
pub trait GeometryBackend<S: Scalar>: Sized + Sync {
    fn structure(&self) -> &AcnStructure<S>;

    fn brackets(&self) -> &StructureConstants<S>;

    fn levi_civita(&self) -> Result<ConnectionCoeffs<S>>;

    /// `true` when all frame components of every field are constant, so
    /// frame derivatives vanish identically.
    fn is_invariant(&self) -> bool;

    /// Frame derivatives of a tensor field: result slot 0 is the direction
    /// `e_a`, the remaining slots are those of the field. `None` means the
    /// derivative vanishes identically.
    fn frame_derivatives<F>(&self, field: F) -> Result<Option<FrameTensor<S>>>
    where
        F: Fn(&Self) -> Result<FrameTensor<S>>;

    fn dim(&self) -> usize {
        self.structure().dim()
    }

    /// Threshold for internal consistency guards (identities that hold by
    /// construction and fail only on a bug or on discretization error).
    fn consistency_tolerance(&self) -> Tolerance {
        Tolerance::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Covariant,
    Contravariant,
}

/// Covariant derivative of a tensor field, derivative slot first:
/// `(nabla t)(x; y_1..y_k) = x(t(y_1..y_k)) - sum_i t(.., nabla_x y_i, ..)`
/// for covariant slots, with the opposite sign for contravariant ones.
pub fn nabla_tensor<S, B, F>(
    backend: &B,
    conn: &ConnectionCoeffs<S>,
    field: F,
    variance: &[Variance],
) -> Result<FrameTensor<S>>
where
    S: Scalar,
    B: GeometryBackend<S>,
    F: Fn(&B) -> Result<FrameTensor<S>>,
{
    let value = field(backend)?;
    if variance.len() != value.order() {
        return Err(Error::Shape(format!(
            "{} variance markers for a tensor of order {}",
            variance.len(),
            value.order()
        )));
    }
    let derivative = backend.frame_derivatives(&field)?;
    let dim = value.dim();
    let gamma = conn.gamma();
    let mut src = vec![0; value.order()];
    FrameTensor::try_from_fn(dim, value.order() + 1, |idx| {
        let a = idx[0];
        let slots = &idx[1..];
        let mut acc = match &derivative {
            Some(d) => d.get(idx).clone(),
            None => S::zero(),
        };
        for (s, var) in variance.iter().enumerate() {
            src.copy_from_slice(slots);
            for m in 0..dim {
                src[s] = m;
                let t = value.get(&src);
                if t.is_zero() {
                    continue;
                }
                match var {
                    // t(.., nabla_a e_slot, ..) = sum_m gamma[a, slot, m] t(.., e_m, ..)
                    Variance::Covariant => {
                        let c = &gamma[[a, slots[s], m]];
                        if !c.is_zero() {
                            acc = acc - c.clone() * t.clone();
                        }
                    }
                    Variance::Contravariant => {
                        let c = &gamma[[a, m, slots[s]]];
                        if !c.is_zero() {
                            acc = acc + c.clone() * t.clone();
                        }
                    }
                }
            }
        }
        Ok(acc)
    })
}

/// `nabla_tensor` for an all-covariant field.
pub fn nabla_covariant<S, B, F>(backend: &B, conn: &ConnectionCoeffs<S>, field: F) -> Result<FrameTensor<S>>
where
    S: Scalar,
    B: GeometryBackend<S>,
    F: Fn(&B) -> Result<FrameTensor<S>>,
{
    let order = field(backend)?.order();
    nabla_tensor(backend, conn, field, &vec![Variance::Covariant; order])
}

/// The (0,4) curvature `R(x, y, z, u) = g(R(x, y) z, u)` with
/// `R(x, y) z = nabla_x nabla_y z - nabla_y nabla_x z - nabla_[x,y] z`,
/// for any linear connection given as a field over the backend.
pub fn curvature<S, B, F>(backend: &B, conn_field: F) -> Result<FrameTensor<S>>
where
    S: Scalar,
    B: GeometryBackend<S>,
    F: Fn(&B) -> Result<ConnectionCoeffs<S>>,
{
    let conn = conn_field(backend)?;
    let dgamma = backend.frame_derivatives(|b| conn_field(b).map(|c| c.gamma().clone()))?;
    let mixed = curvature_mixed(&conn, backend.brackets(), dgamma.as_ref());
    mixed.lower(backend.structure().g(), 3)
}

/// `R(e_i, e_j) e_k` with its last slot the output component.
pub fn curvature_mixed<S: Scalar>(
    conn: &ConnectionCoeffs<S>,
    brackets: &StructureConstants<S>,
    dgamma: Option<&FrameTensor<S>>,
) -> FrameTensor<S> {
    let dim = conn.dim();
    let g = conn.gamma();
    let c = brackets.tensor();
    FrameTensor::from_fn(dim, 4, |idx| {
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = match dgamma {
            Some(d) => d[[i, j, k, l]].clone() - d[[j, i, k, l]].clone(),
            None => S::zero(),
        };
        for m in 0..dim {
            let a = &g[[j, k, m]];
            if !a.is_zero() {
                acc = acc + a.clone() * g[[i, m, l]].clone();
            }
            let b = &g[[i, k, m]];
            if !b.is_zero() {
                acc = acc - b.clone() * g[[j, m, l]].clone();
            }
            let cm = &c[[i, j, m]];
            if !cm.is_zero() {
                acc = acc - cm.clone() * g[[m, k, l]].clone();
            }
        }
        acc
    })
}

/// Torsion residual `nabla_x y - nabla_y x - [x, y]` in frame components.
pub fn torsion_mixed<S: Scalar>(conn: &ConnectionCoeffs<S>, brackets: &StructureConstants<S>) -> FrameTensor<S> {
    let g = conn.gamma();
    let c = brackets.tensor();
    FrameTensor::from_fn(conn.dim(), 3, |i| {
        g[[i[0], i[1], i[2]]].clone() - g[[i[1], i[0], i[2]]].clone() - c[[i[0], i[1], i[2]]].clone()
    })
}
