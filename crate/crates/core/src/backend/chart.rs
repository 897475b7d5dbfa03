//! Single-patch coordinate charts with an adapted frame.
//!
//! Christoffel symbols come from central differences of the coordinate
//! metric; frame brackets come from closed-form frame-field derivatives when
//! the model provides them and from central differences otherwise.

use std::fmt::Debug;
use std::sync::Arc;

use super::{ConnectionCoeffs, GeometryBackend, Provenance, StructureConstants};
use crate::error::{Error, Result};
use crate::residual::{Tolerance, FLOAT_ACCEPT};
use crate::structure::AcnStructure;
use crate::tensor::{invert_metric, FrameTensor};

pub const DEFAULT_STEP: f64 = 1e-3;

/// Reject threshold for internal consistency guards on finite-difference data.
pub const FD_GUARD: f64 = 1e-4;

type Matrix = Vec<Vec<f64>>;

/// Closed-form geometry on one coordinate patch.
pub trait ChartModel: Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// Coordinate components `g(d_a, d_b)` at `p`.
    fn metric(&self, p: &[f64]) -> Matrix;

    /// Frame vectors in coordinates: row `i` holds the components of `e_i`.
    fn frame(&self, p: &[f64]) -> Matrix;

    /// `d_c E_i^a` as `[c][i][a]`, when available in closed form.
    fn frame_derivative(&self, _p: &[f64]) -> Option<Vec<Matrix>> {
        None
    }

    /// Frame components of `(phi, xi, g)` at `p`.
    fn structure(&self, p: &[f64]) -> Result<AcnStructure<f64>>;
}

/// Warp functions of the time coordinate.
#[derive(Clone, Debug, PartialEq)]
pub enum Warp {
    /// `exp(rate * t)`.
    Exp { rate: f64 },
    /// `sum_k coeffs[k] t^k`.
    Poly { coeffs: Vec<f64> },
}

impl Warp {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Warp::Exp { rate } => (rate * t).exp(),
            Warp::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Warp::Exp { rate } => rate * (rate * t).exp(),
            Warp::Poly { coeffs } => {
                coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * t + k as f64 * c)
            }
        }
    }
}

/// Warped product `g = a(t)^2 (sum_i dx_i^2 - sum_i dx_{n+i}^2) + dt^2` with
/// adapted frame `e_i = d_i / a(t)`, `xi = d_t` and the canonical
/// structure in that frame. An exponential warp gives a left-invariant
/// (Lie-equivalent) geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedChart {
    pub n: usize,
    pub warp: Warp,
}

impl WarpedChart {
    fn t(&self, p: &[f64]) -> f64 {
        p[2 * self.n]
    }
}

impl ChartModel for WarpedChart {
    fn dim(&self) -> usize {
        2 * self.n + 1
    }

    fn metric(&self, p: &[f64]) -> Matrix {
        let dim = self.dim();
        let a = self.warp.value(self.t(p));
        let mut g = vec![vec![0.0; dim]; dim];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = if i < self.n {
                a * a
            } else if i < 2 * self.n {
                -a * a
            } else {
                1.0
            };
        }
        g
    }

    fn frame(&self, p: &[f64]) -> Matrix {
        let dim = self.dim();
        let a = self.warp.value(self.t(p));
        let mut e = vec![vec![0.0; dim]; dim];
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = if i < 2 * self.n { 1.0 / a } else { 1.0 };
        }
        e
    }

    fn frame_derivative(&self, p: &[f64]) -> Option<Vec<Matrix>> {
        let dim = self.dim();
        let t = self.t(p);
        let (a, da) = (self.warp.value(t), self.warp.derivative(t));
        let mut d = vec![vec![vec![0.0; dim]; dim]; dim];
        for i in 0..2 * self.n {
            d[dim - 1][i][i] = -da / (a * a);
        }
        Some(d)
    }

    fn structure(&self, _p: &[f64]) -> Result<AcnStructure<f64>> {
        Ok(AcnStructure::canonical(self.n))
    }
}

/// Finite-difference geometry of a [`ChartModel`] at one point.
#[derive(Clone, Debug)]
pub struct ChartBackend {
    model: Arc<dyn ChartModel>,
    point: Vec<f64>,
    step: f64,
    richardson: bool,
    structure: AcnStructure<f64>,
    brackets: StructureConstants<f64>,
    levi_civita: ConnectionCoeffs<f64>,
}

impl ChartBackend {
    pub fn new(model: Arc<dyn ChartModel>, point: Vec<f64>, step: f64) -> Result<Self> {
        Self::with_options(model, point, step, false)
    }

    /// `richardson` combines steps `h` and `h/2` to cancel the `h^2` error term.
    pub fn with_options(model: Arc<dyn ChartModel>, point: Vec<f64>, step: f64, richardson: bool) -> Result<Self> {
        if !(1e-6..=1e-2).contains(&step) {
            return Err(Error::BadStep(step));
        }
        let dim = model.dim();
        if point.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: point.len() });
        }
        let structure = model.structure(&point)?;
        if structure.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: structure.dim() });
        }
        let mut backend = ChartBackend {
            model,
            point,
            step,
            richardson,
            brackets: StructureConstants::abelian(dim),
            levi_civita: ConnectionCoeffs::new(FrameTensor::zeros(dim, 3), Provenance::LeviCivita)?,
            structure,
        };
        backend.check_frame_metric()?;
        backend.brackets = backend.frame_brackets()?;
        backend.levi_civita = backend.levi_civita_chart()?;
        Ok(backend)
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn model(&self) -> &Arc<dyn ChartModel> {
        &self.model
    }

    /// Same model and options at another point.
    pub fn at(&self, point: Vec<f64>) -> Result<Self> {
        Self::with_options(self.model.clone(), point, self.step, self.richardson)
    }

    pub fn with_step(&self, step: f64) -> Result<Self> {
        Self::with_options(self.model.clone(), self.point.clone(), step, self.richardson)
    }

    fn metric_at(&self, p: &[f64]) -> Result<Matrix> {
        let g = self.model.metric(p);
        finite(&g, "metric")?;
        Ok(g)
    }

    fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Frame metric `E g E^T` must agree with the structure's frame metric.
    fn check_frame_metric(&self) -> Result<()> {
        let e = self.model.frame(&self.point);
        finite(&e, "frame")?;
        let g = self.metric_at(&self.point)?;
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let mut v = 0.0;
                for a in 0..dim {
                    for b in 0..dim {
                        v += e[i][a] * e[j][b] * g[a][b];
                    }
                }
                worst = worst.max((v - self.structure.g()[[i, j]]).abs());
            }
        }
        if worst > 1e-9 {
            return Err(Error::Inconsistent { check: "frame metric vs structure metric".into(), residual: worst });
        }
        Ok(())
    }

    /// Central difference of a matrix-valued function along coordinate `c`,
    /// optionally Richardson-extrapolated.
    fn coordinate_derivative(&self, f: &dyn Fn(&[f64]) -> Result<Matrix>, c: usize) -> Result<Matrix> {
        let central = |h: f64| -> Result<Matrix> {
            let mut plus = self.point.clone();
            let mut minus = self.point.clone();
            plus[c] += h;
            minus[c] -= h;
            let (fp, fm) = (f(&plus)?, f(&minus)?);
            Ok(combine(&fp, &fm, |a, b| (a - b) / (2.0 * h)))
        };
        let d = central(self.step)?;
        if !self.richardson {
            return Ok(d);
        }
        let half = central(self.step / 2.0)?;
        Ok(combine(&half, &d, |a, b| (4.0 * a - b) / 3.0))
    }

    fn frame_derivative(&self) -> Result<Vec<Matrix>> {
        if let Some(d) = self.model.frame_derivative(&self.point) {
            return Ok(d);
        }
        let model = self.model.clone();
        (0..self.dim()).map(|c| self.coordinate_derivative(&|p| Ok(model.frame(p)), c)).collect()
    }

    fn frame_inverse(&self) -> Result<Matrix> {
        let e = self.model.frame(&self.point);
        let t = FrameTensor::from_rows(&e)?;
        let inv = invert_metric(&t)?; // general inverse; symmetry not required
        Ok((0..self.dim()).map(|i| (0..self.dim()).map(|j| inv[[i, j]]).collect()).collect())
    }

    fn frame_brackets(&self) -> Result<StructureConstants<f64>> {
        let dim = self.dim();
        let e = self.model.frame(&self.point);
        let de = self.frame_derivative()?;
        let einv = self.frame_inverse()?;
        let mut c = FrameTensor::<f64>::zeros(dim, 3);
        for i in 0..dim {
            for j in 0..dim {
                // [E_i, E_j]^b = E_i^a d_a E_j^b - E_j^a d_a E_i^b
                let v: Vec<f64> =
                    (0..dim).map(|b| (0..dim).map(|a| e[i][a] * de[a][j][b] - e[j][a] * de[a][i][b]).sum()).collect();
                for k in 0..dim {
                    c[[i, j, k]] = (0..dim).map(|b| v[b] * einv[b][k]).sum();
                }
            }
        }
        // Exact antisymmetry by construction up to rounding; enforce it.
        let c = FrameTensor::from_fn(dim, 3, |x| 0.5 * (c[[x[0], x[1], x[2]]] - c[[x[1], x[0], x[2]]]));
        StructureConstants::new(c)
    }

    /// Christoffel symbols from central differences of the coordinate
    /// metric, re-expressed in the adapted frame.
    fn levi_civita_chart(&self) -> Result<ConnectionCoeffs<f64>> {
        let dim = self.dim();
        let g = self.metric_at(&self.point)?;
        let g_inv = invert_metric(&FrameTensor::from_rows(&g)?)?;
        let model = self.model.clone();
        let dg: Vec<Matrix> = (0..dim)
            .map(|c| {
                self.coordinate_derivative(
                    &|p| {
                        let m = model.metric(p);
                        finite(&m, "metric")?;
                        Ok(m)
                    },
                    c,
                )
            })
            .collect::<Result<_>>()?;
        // christoffel[a][b][c] = Gamma^c_{ab}
        let mut chr = vec![vec![vec![0.0; dim]; dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    chr[a][b][c] =
                        0.5 * (0..dim).map(|d| g_inv[[c, d]] * (dg[a][b][d] + dg[b][a][d] - dg[d][a][b])).sum::<f64>();
                }
            }
        }
        let e = self.model.frame(&self.point);
        let de = self.frame_derivative()?;
        let einv = self.frame_inverse()?;
        let mut gamma = FrameTensor::<f64>::zeros(dim, 3);
        for i in 0..dim {
            for j in 0..dim {
                // nabla_{E_i} E_j = E_i^a (d_a E_j^c + Gamma^c_{ab} E_j^b) d_c
                let v: Vec<f64> = (0..dim)
                    .map(|c| {
                        (0..dim)
                            .map(|a| e[i][a] * (de[a][j][c] + (0..dim).map(|b| chr[a][b][c] * e[j][b]).sum::<f64>()))
                            .sum()
                    })
                    .collect();
                for k in 0..dim {
                    gamma[[i, j, k]] = (0..dim).map(|c| v[c] * einv[c][k]).sum();
                }
            }
        }
        if gamma.components().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Christoffel symbols".into()));
        }
        ConnectionCoeffs::new(gamma, Provenance::LeviCivita)
    }
}

impl GeometryBackend<f64> for ChartBackend {
    fn structure(&self) -> &AcnStructure<f64> {
        &self.structure
    }

    fn brackets(&self) -> &StructureConstants<f64> {
        &self.brackets
    }

    fn levi_civita(&self) -> Result<ConnectionCoeffs<f64>> {
        Ok(self.levi_civita.clone())
    }

    fn is_invariant(&self) -> bool {
        false
    }

    fn consistency_tolerance(&self) -> Tolerance {
        Tolerance { accept: FLOAT_ACCEPT, reject: FD_GUARD }
    }

    /// Central differences along each frame direction `p +- h E_a(p)`.
    fn frame_derivatives<F>(&self, field: F) -> Result<Option<FrameTensor<f64>>>
    where
        F: Fn(&Self) -> Result<FrameTensor<f64>>,
    {
        let dim = self.dim();
        let e = self.model.frame(&self.point);
        let shifted = |a: usize, h: f64| -> Result<FrameTensor<f64>> {
            let p: Vec<f64> = self.point.iter().zip(&e[a]).map(|(x, v)| x + h * v).collect();
            field(&self.at(p)?)
        };
        let central = |a: usize, h: f64| -> Result<FrameTensor<f64>> {
            let plus = shifted(a, h)?;
            let minus = shifted(a, -h)?;
            Ok(plus.sub(&minus)?.scale(&(1.0 / (2.0 * h))))
        };
        let mut slices = Vec::with_capacity(dim);
        for a in 0..dim {
            let d = central(a, self.step)?;
            let d = if self.richardson {
                let half = central(a, self.step / 2.0)?;
                half.scale(&(4.0 / 3.0)).sub(&d.scale(&(1.0 / 3.0)))?
            } else {
                d
            };
            slices.push(d);
        }
        let order = slices[0].order() + 1;
        let data: Vec<f64> = slices.into_iter().flat_map(|s| s.into_components()).collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("frame derivative".into()));
        }
        Ok(Some(FrameTensor::new(dim, order, data)?))
    }
}

fn finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

fn combine(a: &Matrix, b: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| f(*x, *y)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(warp: Warp, t: f64, h: f64) -> ChartBackend {
        ChartBackend::new(Arc::new(WarpedChart { n: 1, warp }), vec![0.0, 0.0, t], h).unwrap()
    }

    #[test]
    fn warp_values_and_derivatives() {
        let p = Warp::Poly { coeffs: vec![1.0, 0.0, 1.0] };
        assert_eq!(p.value(2.0), 5.0);
        assert_eq!(p.derivative(2.0), 4.0);
        let e = Warp::Exp { rate: -0.5 };
        assert!((e.derivative(0.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn flat_chart_has_no_christoffels() {
        let b = chart(Warp::Poly { coeffs: vec![1.0] }, 0.3, 1e-3);
        assert!(b.levi_civita().unwrap().gamma().components().iter().all(|v| v.abs() < 1e-12));
        assert!(b.brackets().tensor().components().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn exponential_warp_brackets() {
        // a = exp(-t/2): [xi, e_i] = (1/2) e_i
        let b = chart(Warp::Exp { rate: -0.5 }, 0.0, 1e-3);
        let c = b.brackets().tensor();
        assert!((c[[2, 0, 0]] - 0.5).abs() < 1e-14);
        assert!((c[[2, 1, 1]] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn step_outside_range_is_rejected() {
        let m: Arc<dyn ChartModel> = Arc::new(WarpedChart { n: 1, warp: Warp::Exp { rate: 1.0 } });
        assert!(matches!(ChartBackend::new(m.clone(), vec![0.0; 3], 0.1), Err(Error::BadStep(_))));
        assert!(matches!(ChartBackend::new(m, vec![0.0; 3], 1e-8), Err(Error::BadStep(_))));
    }

    #[test]
    fn nan_in_metric_is_reported() {
        // 1/a with a(t) = t blows up at t = 0
        let m: Arc<dyn ChartModel> = Arc::new(WarpedChart { n: 1, warp: Warp::Poly { coeffs: vec![0.0, 1.0] } });
        assert!(ChartBackend::new(m, vec![0.0; 3], 1e-3).is_err());
    }

    #[test]
    fn frame_brackets_by_finite_differences_match_closed_form() {
        #[derive(Debug)]
        struct NoDerivative(WarpedChart);
        impl ChartModel for NoDerivative {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn metric(&self, p: &[f64]) -> Matrix {
                self.0.metric(p)
            }
            fn frame(&self, p: &[f64]) -> Matrix {
                self.0.frame(p)
            }
            fn structure(&self, p: &[f64]) -> Result<AcnStructure<f64>> {
                self.0.structure(p)
            }
        }
        let inner = WarpedChart { n: 1, warp: Warp::Poly { coeffs: vec![1.0, 0.0, 1.0] } };
        let fd = ChartBackend::new(Arc::new(NoDerivative(inner.clone())), vec![0.0, 0.0, 0.5], 1e-3).unwrap();
        let exact = ChartBackend::new(Arc::new(inner), vec![0.0, 0.0, 0.5], 1e-3).unwrap();
        let r = fd.brackets().tensor().sub(exact.brackets().tensor()).unwrap();
        assert!(r.components().iter().all(|v| v.abs() < 1e-6));
    }
}
