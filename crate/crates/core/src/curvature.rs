//! Curvature of deformed connections, the five standard curvature-like
//! tensors and the closed form of the curvature on the two-parameter family.

use crate::backend::{curvature, nabla_covariant, ConnectionCoeffs, GeometryBackend};
use crate::error::Result;
use crate::forms::{eta, g, phi, term, Form, FormContext, U, X, Y, Z};
use crate::fundamental::FundamentalData;
use crate::residual::{Residual, Tolerance};
use crate::scalar::Scalar;
use crate::structure::AcnStructure;
use crate::tensor::FrameTensor;

/// Symmetry residuals of a (0,4) tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureLike {
    /// `L(x,y,z,u) + L(y,x,z,u)`.
    pub antisym_xy: Residual,
    /// `L(x,y,z,u) + L(x,y,u,z)`.
    pub antisym_zu: Residual,
    /// Cyclic sum over `x, y, z`.
    pub bianchi: Residual,
}

impl CurvatureLike {
    pub fn worst(&self) -> Residual {
        self.antisym_xy.max(self.antisym_zu).max(self.bianchi)
    }

    pub fn holds(&self, tol: Tolerance) -> bool {
        self.worst().vanishes(tol)
    }
}

pub fn check_curvature_like<S: Scalar>(l: &FrameTensor<S>) -> Result<CurvatureLike> {
    let cyc = l.add(&l.permute(&[1, 2, 0, 3])?)?.add(&l.permute(&[2, 0, 1, 3])?)?;
    Ok(CurvatureLike {
        antisym_xy: Residual::of_tensor(&l.add(&l.swapped(0, 1)?)?),
        antisym_zu: Residual::of_tensor(&l.add(&l.swapped(2, 3)?)?),
        bianchi: Residual::of_tensor(&cyc),
    })
}

/// Residual of `L(x,y,phi z,phi u) + L(x,y,z,u)`.
pub fn check_phi_kaehler<S: Scalar>(l: &FrameTensor<S>, s: &AcnStructure<S>) -> Result<Residual> {
    let phi_t = s.phi().as_tensor().swapped(0, 1)?;
    let rotated = l.transform_slot(&phi_t, 2)?.transform_slot(&phi_t, 3)?;
    Ok(Residual::of_tensor(&rotated.add(l)?))
}

/// The components `L(x, y, xi, u)`.
pub fn xi_slot_residual<S: Scalar>(l: &FrameTensor<S>, s: &AcnStructure<S>) -> Result<Residual> {
    let xi = FrameTensor::new(s.dim(), 1, s.xi().to_vec())?;
    Ok(Residual::of_tensor(&l.contract(&xi, 2, 0)?))
}

/// The five standard curvature-like tensors built from `g`, `phi`, `eta`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiBasis<S> {
    pub pi: [FrameTensor<S>; 5],
}

impl<S> PiBasis<S> {
    /// `pi_i` with the one-based index.
    pub fn get(&self, i: usize) -> &FrameTensor<S> {
        &self.pi[i - 1]
    }
}

pub fn pi_forms() -> [Form; 5] {
    [
        Form::new(4, vec![term(1, &[g(Y, Z), g(X, U)]), term(-1, &[g(X, Z), g(Y, U)])]),
        Form::new(4, vec![term(1, &[g(Y, phi(Z)), g(X, phi(U))]), term(-1, &[g(X, phi(Z)), g(Y, phi(U))])]),
        Form::new(
            4,
            vec![
                term(-1, &[g(Y, Z), g(X, phi(U))]),
                term(1, &[g(X, Z), g(Y, phi(U))]),
                term(-1, &[g(X, U), g(Y, phi(Z))]),
                term(1, &[g(Y, U), g(X, phi(Z))]),
            ],
        ),
        Form::new(
            4,
            vec![
                term(1, &[g(Y, Z), eta(X), eta(U)]),
                term(-1, &[g(X, Z), eta(Y), eta(U)]),
                term(1, &[g(X, U), eta(Y), eta(Z)]),
                term(-1, &[g(Y, U), eta(X), eta(Z)]),
            ],
        ),
        Form::new(
            4,
            vec![
                term(1, &[g(Y, phi(Z)), eta(X), eta(U)]),
                term(-1, &[g(X, phi(Z)), eta(Y), eta(U)]),
                term(1, &[g(X, phi(U)), eta(Y), eta(Z)]),
                term(-1, &[g(Y, phi(U)), eta(X), eta(Z)]),
            ],
        ),
    ]
}

pub fn pi_basis<S: Scalar>(s: &AcnStructure<S>) -> Result<PiBasis<S>> {
    let ctx = FormContext::new(s);
    let [a, b, c, d, e] = pi_forms();
    Ok(PiBasis { pi: [ctx.evaluate(&a)?, ctx.evaluate(&b)?, ctx.evaluate(&c)?, ctx.evaluate(&d)?, ctx.evaluate(&e)?] })
}

/// `R'(x,y,z,u) = R(x,y,z,u) + (nabla_x Q)(y,z,u) - (nabla_y Q)(x,z,u)
///               + Q(x,Q(y,z),u) - Q(y,Q(x,z),u)`
/// for the deformation `Q` of `conn` given as a field over the backend.
pub fn curvature_via_deformation<S, B, F>(
    backend: &B,
    r: &FrameTensor<S>,
    conn: &ConnectionCoeffs<S>,
    q_field: F,
) -> Result<FrameTensor<S>>
where
    S: Scalar,
    B: GeometryBackend<S>,
    F: Fn(&B) -> Result<FrameTensor<S>>,
{
    let q = q_field(backend)?;
    let q_mixed = q.raise(backend.structure().g_inv(), 2)?;
    let nq = nabla_covariant(backend, conn, &q_field)?;
    // qq[y, z, x, u] = Q(x, Q(y, z), u)
    let qq = q_mixed.contract(&q, 2, 1)?;
    let dim = r.dim();
    Ok(FrameTensor::from_fn(dim, 4, |i| {
        let (x, y, z, u) = (i[0], i[1], i[2], i[3]);
        r[[x, y, z, u]].clone() + nq[[x, y, z, u]].clone() - nq[[y, x, z, u]].clone() + qq[[y, z, x, u]].clone()
            - qq[[x, z, y, u]].clone()
    }))
}

/// Both computations of the curvature of `nabla + Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformedCurvature<S> {
    pub direct: FrameTensor<S>,
    pub via_deformation: FrameTensor<S>,
}

impl<S: Scalar> DeformedCurvature<S> {
    pub fn agreement(&self) -> Residual {
        Residual::of_difference(&self.direct, &self.via_deformation)
    }
}

/// Curvature of the connection `conn_field` computed directly from its
/// coefficients and from its deformation of the Levi-Civita connection.
pub fn deformed_curvature<S, B, F>(backend: &B, conn_field: F) -> Result<DeformedCurvature<S>>
where
    S: Scalar,
    B: GeometryBackend<S>,
    F: Fn(&B) -> Result<ConnectionCoeffs<S>>,
{
    let lc = backend.levi_civita()?;
    let r = curvature(backend, |b| b.levi_civita())?;
    let direct = curvature(backend, &conn_field)?;
    let q_field = |b: &B| -> Result<FrameTensor<S>> {
        let base = b.levi_civita()?;
        base.deformation_to(&conn_field(b)?, b.structure().g())
    };
    let via_deformation = curvature_via_deformation(backend, &r, &lc, q_field)?;
    Ok(DeformedCurvature { direct, via_deformation })
}

/// Right-hand side of the closed form
/// `R + xi theta(xi)/2n pi_5 + xi theta*(xi)/2n pi_4 + theta(xi)^2/4n^2 (pi_2 - pi_4)
///    + theta*(xi)^2/4n^2 pi_1 - theta(xi) theta*(xi)/4n^2 (pi_3 - pi_5)`.
pub fn r_prime_formula<S: Scalar>(
    s: &AcnStructure<S>,
    fd: &FundamentalData<S>,
    r: &FrameTensor<S>,
    pis: &PiBasis<S>,
) -> Result<FrameTensor<S>> {
    let n = S::from_i64(s.n() as i64);
    let two_n = S::from_i64(2) * n.clone();
    let four_nn = S::from_i64(4) * n.clone() * n;
    let (th, ths) = (fd.theta_xi.clone(), fd.theta_star_xi.clone());
    let mut out = r.clone();
    out.add_scaled(&(fd.xi_theta_xi.clone() / two_n.clone()), pis.get(5))?;
    out.add_scaled(&(fd.xi_theta_star_xi.clone() / two_n), pis.get(4))?;
    let c_th = th.clone() * th.clone() / four_nn.clone();
    out.add_scaled(&c_th, &pis.get(2).sub(pis.get(4))?)?;
    out.add_scaled(&(ths.clone() * ths.clone() / four_nn.clone()), pis.get(1))?;
    out.add_scaled(&(-(th * ths) / four_nn), &pis.get(3).sub(pis.get(5))?)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RPrimeReport {
    /// `R'` against the closed form.
    pub formula: Residual,
    pub phi_kaehler: Residual,
    /// `R'(x, y, xi, u)`.
    pub xi_slot: Residual,
    pub curvature_like: CurvatureLike,
}

impl RPrimeReport {
    pub fn holds(&self, tol: Tolerance) -> bool {
        self.formula.vanishes(tol)
            && self.phi_kaehler.vanishes(tol)
            && self.xi_slot.vanishes(tol)
            && self.curvature_like.holds(tol)
    }
}

pub fn verify_r_prime_formula<S: Scalar>(
    s: &AcnStructure<S>,
    fd: &FundamentalData<S>,
    r: &FrameTensor<S>,
    r_prime: &FrameTensor<S>,
    pis: &PiBasis<S>,
) -> Result<RPrimeReport> {
    let rhs = r_prime_formula(s, fd, r, pis)?;
    Ok(RPrimeReport {
        formula: Residual::of_difference(r_prime, &rhs),
        phi_kaehler: check_phi_kaehler(r_prime, s)?,
        xi_slot: xi_slot_residual(r_prime, s)?,
        curvature_like: check_curvature_like(r_prime)?,
    })
}
