//! Left-invariant geometry on a Lie group: everything follows from the
//! structure constants of the frame.

use rand::Rng;

use super::{torsion_mixed, ConnectionCoeffs, GeometryBackend, Provenance, StructureConstants};
use crate::error::{Error, Result};
use crate::residual::Residual;
use crate::scalar::Scalar;
use crate::structure::AcnStructure;
use crate::tensor::FrameTensor;

/// Levi-Civita connection of a left-invariant metric from the Koszul formula
/// `2 g(nabla_x y, z) = g([x, y], z) - g([y, z], x) + g([z, x], y)`.
///
/// Torsion-freeness and metricity of the result are re-verified.
pub fn levi_civita_lie<S: Scalar>(
    constants: &StructureConstants<S>,
    g: &FrameTensor<S>,
    g_inv: &FrameTensor<S>,
) -> Result<ConnectionCoeffs<S>> {
    constants.check_jacobi()?;
    let dim = constants.dim();
    // lowered[i, j, z] = g([e_i, e_j], e_z)
    let lowered = constants.tensor().lower(g, 2)?;
    let half = S::ratio(1, 2);
    let koszul = FrameTensor::from_fn(dim, 3, |x| {
        let (i, j, z) = (x[0], x[1], x[2]);
        (lowered[[i, j, z]].clone() - lowered[[j, z, i]].clone() + lowered[[z, i, j]].clone()) * half.clone()
    });
    let conn = ConnectionCoeffs::new(koszul.raise(g_inv, 2)?, Provenance::LeviCivita)?;

    let torsion = Residual::of_tensor(&torsion_mixed(&conn, constants));
    let metric = Residual::of_tensor(&metric_defect(&conn, g));
    let tol = crate::residual::Tolerance::default();
    if !torsion.vanishes(tol) {
        return Err(Error::Inconsistent { check: "Levi-Civita torsion".into(), residual: torsion.max_abs });
    }
    if !metric.vanishes(tol) {
        return Err(Error::Inconsistent { check: "Levi-Civita metricity".into(), residual: metric.max_abs });
    }
    Ok(conn)
}

/// `(nabla_x g)(y, z)` for constant metric components.
pub(crate) fn metric_defect<S: Scalar>(conn: &ConnectionCoeffs<S>, g: &FrameTensor<S>) -> FrameTensor<S> {
    let dim = conn.dim();
    let gl = conn.gamma().lower(g, 2).expect("matching shapes");
    FrameTensor::from_fn(dim, 3, |x| -(gl[[x[0], x[1], x[2]]].clone() + gl[[x[0], x[2], x[1]]].clone()))
}

/// A Lie group with left-invariant almost contact Norden structure.
#[derive(Clone, Debug)]
pub struct LieBackend<S> {
    structure: AcnStructure<S>,
    constants: StructureConstants<S>,
    levi_civita: ConnectionCoeffs<S>,
}

impl<S: Scalar> LieBackend<S> {
    pub fn new(structure: AcnStructure<S>, constants: StructureConstants<S>) -> Result<Self> {
        if constants.dim() != structure.dim() {
            return Err(Error::DimensionMismatch { expected: structure.dim(), found: constants.dim() });
        }
        let levi_civita = levi_civita_lie(&constants, structure.g(), structure.g_inv())?;
        Ok(LieBackend { structure, constants, levi_civita })
    }

    pub fn constants(&self) -> &StructureConstants<S> {
        &self.constants
    }
}

impl<S: Scalar> GeometryBackend<S> for LieBackend<S> {
    fn structure(&self) -> &AcnStructure<S> {
        &self.structure
    }

    fn brackets(&self) -> &StructureConstants<S> {
        &self.constants
    }

    fn levi_civita(&self) -> Result<ConnectionCoeffs<S>> {
        Ok(self.levi_civita.clone())
    }

    fn is_invariant(&self) -> bool {
        true
    }

    fn frame_derivatives<F>(&self, _field: F) -> Result<Option<FrameTensor<S>>>
    where
        F: Fn(&Self) -> Result<FrameTensor<S>>,
    {
        Ok(None)
    }
}

/// Algebras used by the bundled examples, all on the canonical frame of
/// dimension `2n + 1` with `xi` acting on the `e_i` by a derivation `D`:
/// `[xi, e_i] = D e_i`, `[e_i, e_j] = 0`.
pub fn almost_abelian<S: Scalar>(n: usize, derivation: impl Fn(usize, usize) -> S) -> StructureConstants<S> {
    let dim = 2 * n + 1;
    let xi = dim - 1;
    let mut entries = Vec::new();
    for i in 0..2 * n {
        for k in 0..2 * n {
            let v = derivation(k, i);
            if !v.is_zero() {
                entries.push((xi, i, k, v));
            }
        }
    }
    StructureConstants::from_entries(dim, &entries).expect("antisymmetric by construction")
}

/// `[xi, e_i] = alpha e_i`, `[xi, e_{n+i}] = alpha e_{n+i}`.
pub fn f5_algebra<S: Scalar>(n: usize, alpha: S) -> StructureConstants<S> {
    f45_algebra(n, alpha, S::zero())
}

/// `[xi, e_i] = beta e_{n+i}`, `[xi, e_{n+i}] = -beta e_i`.
pub fn f4_algebra<S: Scalar>(n: usize, beta: S) -> StructureConstants<S> {
    f45_algebra(n, S::zero(), beta)
}

/// `[xi, e_i] = alpha e_i + beta e_{n+i}`, `[xi, e_{n+i}] = -beta e_i + alpha e_{n+i}`.
pub fn f45_algebra<S: Scalar>(n: usize, alpha: S, beta: S) -> StructureConstants<S> {
    almost_abelian(n, |out, inp| {
        if out == inp {
            alpha.clone()
        } else if inp < n && out == inp + n {
            beta.clone()
        } else if inp >= n && out + n == inp {
            -beta.clone()
        } else {
            S::zero()
        }
    })
}

/// Random rational with small numerator and denominator.
pub fn random_rational<S: Scalar, R: Rng + ?Sized>(rng: &mut R, max_num: i64, max_den: i64) -> S {
    S::ratio(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

/// A random Lie algebra on the frame of dimension `2n + 1`.
///
/// The span of `e_0..e_{2n-1}` is made 2-step nilpotent: a random subset
/// spans the centre and every other bracket lands in it. `xi` then acts by
/// a derivation: a grading derivation (`c` on the generators, `2c` on the
/// centre) plus a random inner derivation. When the nilpotent part is
/// abelian the derivation is an arbitrary rational matrix instead. Jacobi is
/// verified, never assumed.
pub fn random_nilpotent_extension<S: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> StructureConstants<S> {
    let dim = 2 * n + 1;
    let m = 2 * n;
    let xi = dim - 1;
    loop {
        let abelian = rng.gen_bool(0.4);
        let mut entries: Vec<(usize, usize, usize, S)> = Vec::new();
        if abelian {
            for i in 0..m {
                for k in 0..m {
                    let v: S = random_rational(rng, 3, 2);
                    if !v.is_zero() {
                        entries.push((xi, i, k, v));
                    }
                }
            }
        } else {
            let centre_size = rng.gen_range(1..m);
            let mut order: Vec<usize> = (0..m).collect();
            for i in (1..m).rev() {
                order.swap(i, rng.gen_range(0..=i));
            }
            let (centre, gens) = order.split_at(centre_size);
            // [gens, gens] -> centre
            let mut bracket = vec![vec![vec![S::zero(); m]; m]; m];
            for (a, &i) in gens.iter().enumerate() {
                for &j in &gens[a + 1..] {
                    for &z in centre {
                        let v: S = random_rational(rng, 2, 2);
                        bracket[i][j][z] = v.clone();
                        bracket[j][i][z] = -v.clone();
                        if !v.is_zero() {
                            entries.push((i, j, z, v));
                        }
                    }
                }
            }
            // D = grading + ad_w with w in the generator span
            let c: S = random_rational(rng, 2, 2);
            let w: Vec<S> =
                (0..m).map(|k| if gens.contains(&k) { random_rational(rng, 1, 2) } else { S::zero() }).collect();
            for i in 0..m {
                let mut image = vec![S::zero(); m];
                image[i] = if centre.contains(&i) { c.clone() + c.clone() } else { c.clone() };
                for (k, wk) in w.iter().enumerate() {
                    if wk.is_zero() {
                        continue;
                    }
                    for z in 0..m {
                        image[z] = image[z].clone() + wk.clone() * bracket[k][i][z].clone();
                    }
                }
                for (z, v) in image.into_iter().enumerate() {
                    if !v.is_zero() {
                        entries.push((xi, i, z, v));
                    }
                }
            }
        }
        let constants = StructureConstants::from_entries(dim, &entries).expect("antisymmetric by construction");
        if constants.check_jacobi().is_ok() {
            return constants;
        }
    }
}
