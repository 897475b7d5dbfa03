//! The fundamental tensor `F`, its 1-forms, the Nijenhuis tensors and the
//! class predicates built on them.

use crate::backend::{nabla_covariant, ConnectionCoeffs, GeometryBackend};
use crate::error::{Error, Result};
use crate::forms::{eta, f, g, omega, phi, term, Form, FormContext, X, XI, Y, Z};
use crate::residual::{Residual, Tolerance};
use crate::scalar::Scalar;
use crate::structure::AcnStructure;
use crate::tensor::FrameTensor;

#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalData<S> {
    /// `F(x, y, z) = g((nabla_x phi) y, z)`.
    pub f: FrameTensor<S>,
    pub theta: FrameTensor<S>,
    pub theta_star: FrameTensor<S>,
    pub omega: FrameTensor<S>,
    pub theta_xi: S,
    pub theta_star_xi: S,
    /// `x theta(xi)` for every frame vector `x`.
    pub d_theta_xi: Vec<S>,
    pub d_theta_star_xi: Vec<S>,
    pub xi_theta_xi: S,
    pub xi_theta_star_xi: S,
    /// Worst residual of the two symmetries of `F` and of `F(x, xi, xi) = 0`.
    pub symmetry_residual: Residual,
    /// Consistency threshold of the backend `F` was computed on.
    pub guard: Tolerance,
}

/// `F`, `theta`, `theta*` and `omega` at the backend's point, without derivatives.
#[derive(Clone, Debug)]
struct Pointwise<S> {
    f: FrameTensor<S>,
    theta: FrameTensor<S>,
    theta_star: FrameTensor<S>,
    omega: FrameTensor<S>,
}

fn pointwise<S: Scalar, B: GeometryBackend<S>>(backend: &B, conn: &ConnectionCoeffs<S>) -> Result<Pointwise<S>> {
    let s = backend.structure();
    // For a metric connection, nabla of g(phi ., .) is g((nabla phi) ., .).
    let f = nabla_covariant(backend, conn, |b| Ok(b.structure().phi_form()))?;
    let g_inv = s.g_inv();
    let theta = g_inv.contract(&f, 0, 0)?.trace(0, 1)?;
    let f_phi = f.transform_slot(&s.phi().as_tensor().swapped(0, 1)?, 1)?;
    let theta_star = g_inv.contract(&f_phi, 0, 0)?.trace(0, 1)?;
    let omega = FormContext::new(s).with_f(&f).evaluate(&Form::new(1, vec![term(1, &[omega(X)])]))?;
    Ok(Pointwise { f, theta, theta_star, omega })
}

fn along<S: Scalar>(form: &FrameTensor<S>, v: &[S]) -> S {
    form.components().iter().zip(v).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

/// Computes `F` from the Levi-Civita connection `conn` and checks
/// `F(x,y,z) = F(x,z,y)`, `F(x,phi y,phi z) = F(x,y,z) - F(x,xi,z) eta(y) - F(x,y,xi) eta(z)`
/// and `F(x, xi, xi) = 0`.
pub fn fundamental_tensor<S: Scalar, B: GeometryBackend<S>>(
    backend: &B,
    conn: &ConnectionCoeffs<S>,
) -> Result<FundamentalData<S>> {
    let s = backend.structure();
    let p = pointwise(backend, conn)?;
    let xi = s.xi();

    let ctx = FormContext::new(s).with_f(&p.f);
    let sym = Residual::of_difference(&p.f, &p.f.swapped(1, 2)?);
    let phi_rule = ctx.evaluate(&Form::new(
        3,
        vec![
            term(1, &[f(X, phi(Y), phi(Z))]),
            term(-1, &[f(X, Y, Z)]),
            term(1, &[f(X, XI, Z), eta(Y)]),
            term(1, &[f(X, Y, XI), eta(Z)]),
        ],
    ))?;
    let xixi = ctx.evaluate(&Form::new(1, vec![term(1, &[f(X, XI, XI)])]))?;
    let symmetry_residual = sym.max(Residual::of_tensor(&phi_rule)).max(Residual::of_tensor(&xixi));
    let guard = backend.consistency_tolerance();
    if !symmetry_residual.vanishes(guard) {
        return Err(Error::Inconsistent {
            check: "symmetries of F (connection not Levi-Civita or structure invalid)".into(),
            residual: symmetry_residual.max_abs,
        });
    }

    let theta_xi = along(&p.theta, xi);
    let theta_star_xi = along(&p.theta_star, xi);
    let dim = s.dim();
    let (d_theta_xi, d_theta_star_xi) = if backend.is_invariant() {
        (vec![S::zero(); dim], vec![S::zero(); dim])
    } else {
        let field = |b: &B| -> Result<FrameTensor<S>> {
            let lc = b.levi_civita()?;
            let q = pointwise(b, &lc)?;
            let xi = b.structure().xi();
            // slot 0: theta(xi), slot 1: theta*(xi), the rest unused
            let mut v = vec![S::zero(); b.dim()];
            v[0] = along(&q.theta, xi);
            v[1] = along(&q.theta_star, xi);
            FrameTensor::new(b.dim(), 1, v)
        };
        match backend.frame_derivatives(field)? {
            Some(d) => ((0..dim).map(|a| d[[a, 0]].clone()).collect(), (0..dim).map(|a| d[[a, 1]].clone()).collect()),
            None => (vec![S::zero(); dim], vec![S::zero(); dim]),
        }
    };
    let xi_theta_xi = xi.iter().zip(&d_theta_xi).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
    let xi_theta_star_xi = xi.iter().zip(&d_theta_star_xi).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone());

    Ok(FundamentalData {
        f: p.f,
        theta: p.theta,
        theta_star: p.theta_star,
        omega: p.omega,
        theta_xi,
        theta_star_xi,
        d_theta_xi,
        d_theta_star_xi,
        xi_theta_xi,
        xi_theta_star_xi,
        symmetry_residual,
        guard,
    })
}

/// `N(x,y,z) = F(phi x,y,z) - F(phi y,x,z) - F(x,y,phi z) + F(y,x,phi z)
///           + F(x,phi y,xi) eta(z) - F(y,phi x,xi) eta(z)`.
pub fn nijenhuis_form() -> Form {
    Form::new(
        3,
        vec![
            term(1, &[f(phi(X), Y, Z)]),
            term(-1, &[f(phi(Y), X, Z)]),
            term(-1, &[f(X, Y, phi(Z))]),
            term(1, &[f(Y, X, phi(Z))]),
            term(1, &[f(X, phi(Y), XI), eta(Z)]),
            term(-1, &[f(Y, phi(X), XI), eta(Z)]),
        ],
    )
}

/// The associated tensor: the same six monomials with the second, fourth
/// and sixth signs flipped.
pub fn associated_nijenhuis_form() -> Form {
    Form::new(
        3,
        vec![
            term(1, &[f(phi(X), Y, Z)]),
            term(1, &[f(phi(Y), X, Z)]),
            term(-1, &[f(X, Y, phi(Z))]),
            term(-1, &[f(Y, X, phi(Z))]),
            term(1, &[f(X, phi(Y), XI), eta(Z)]),
            term(1, &[f(Y, phi(X), XI), eta(Z)]),
        ],
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct NijenhuisData<S> {
    /// `N` from `F`.
    pub n: FrameTensor<S>,
    /// `N` lowered from its bracket definition.
    pub n_bracket: FrameTensor<S>,
    pub n_tilde: FrameTensor<S>,
    /// `d eta(x, y) = (nabla_x eta) y - (nabla_y eta) x`.
    pub d_eta: FrameTensor<S>,
    /// Worst of `F(x,y,xi) - F(y,x,xi)` and `omega`.
    pub normal_consequences: Residual,
    /// Worst of `F(phi x,phi y,xi) - F(y,x,xi)` and `omega`.
    pub n_tilde_consequences: Residual,
}

impl<S: Scalar> NijenhuisData<S> {
    pub fn duality_residual(&self) -> Residual {
        Residual::of_difference(&self.n, &self.n_bracket)
    }
}

/// `N` two ways (from `F`, and from brackets of the frame), `N~` and `d eta`.
/// The two computations of `N` must agree.
pub fn nijenhuis<S: Scalar, B: GeometryBackend<S>>(backend: &B, fd: &FundamentalData<S>) -> Result<NijenhuisData<S>> {
    let s = backend.structure();
    let dim = s.dim();
    let ctx = FormContext::new(s).with_f(&fd.f);
    let n = ctx.evaluate(&nijenhuis_form())?;
    let n_tilde = ctx.evaluate(&associated_nijenhuis_form())?;

    let lc = backend.levi_civita()?;
    let nabla_eta = nabla_covariant(backend, &lc, |b| Ok(b.structure().eta().clone()))?;
    let d_eta = nabla_eta.antisymmetrized(0, 1)?;

    let n_bracket = bracket_nijenhuis(backend, &nabla_eta)?;
    let duality = Residual::of_difference(&n, &n_bracket);
    if !duality.vanishes(fd.guard) {
        return Err(Error::Inconsistent {
            check: "Nijenhuis tensor from F vs from brackets".into(),
            residual: duality.max_abs,
        });
    }

    let sym_xi = ctx.evaluate(&Form::new(2, vec![term(1, &[f(X, Y, XI)]), term(-1, &[f(Y, X, XI)])]))?;
    let phi_sym_xi = ctx.evaluate(&Form::new(2, vec![term(1, &[f(phi(X), phi(Y), XI)]), term(-1, &[f(Y, X, XI)])]))?;
    let om = Residual::of_tensor(&fd.omega);
    debug_assert_eq!(n.dim(), dim);
    Ok(NijenhuisData {
        n,
        n_bracket,
        n_tilde,
        d_eta,
        normal_consequences: Residual::of_tensor(&sym_xi).max(om),
        n_tilde_consequences: Residual::of_tensor(&phi_sym_xi).max(om),
    })
}

/// `N(x,y) = phi^2 [x,y] + [phi x, phi y] - phi [phi x, y] - phi [x, phi y]
///          + (nabla_x eta) y xi - (nabla_y eta) x xi`, lowered with `g`.
fn bracket_nijenhuis<S: Scalar, B: GeometryBackend<S>>(
    backend: &B,
    nabla_eta: &FrameTensor<S>,
) -> Result<FrameTensor<S>> {
    let s = backend.structure();
    let dim = s.dim();
    let c = backend.brackets();
    let ph = s.phi();
    // dphi[[a, out, in]] = e_a(phi^out_in)
    let dphi = backend.frame_derivatives(|b| Ok(b.structure().phi().as_tensor()))?;
    let dphi_at =
        |a: usize, out: usize, inp: usize| -> S { dphi.as_ref().map_or_else(S::zero, |d| d[[a, out, inp]].clone()) };
    let unit = |i: usize| -> Vec<S> { (0..dim).map(|k| if k == i { S::one() } else { S::zero() }).collect() };
    let add = |a: &mut Vec<S>, b: &[S], w: &S| {
        for (x, y) in a.iter_mut().zip(b) {
            if !y.is_zero() {
                *x = x.clone() + w.clone() * y.clone();
            }
        }
    };

    // [phi e_i, e_j] = sum_c phi^c_i [e_c, e_j] - e_j(phi^c_i) e_c
    let phi_x_y = |i: usize, j: usize| -> Vec<S> {
        let mut out = vec![S::zero(); dim];
        for cc in 0..dim {
            let p = &ph[[cc, i]];
            if !p.is_zero() {
                add(&mut out, &c.bracket(&unit(cc), &unit(j)), p);
            }
            out[cc] = out[cc].clone() - dphi_at(j, cc, i);
        }
        out
    };
    // [phi e_i, phi e_j]
    let phi_x_phi_y = |i: usize, j: usize| -> Vec<S> {
        let mut out = c.bracket(&ph.column(i), &ph.column(j));
        for cc in 0..dim {
            let pi = ph[[cc, i]].clone();
            let pj = ph[[cc, j]].clone();
            for d in 0..dim {
                out[d] = out[d].clone() + pi.clone() * dphi_at(cc, d, j) - pj.clone() * dphi_at(cc, d, i);
            }
        }
        out
    };

    let xi = s.xi();
    let mut n = FrameTensor::<S>::zeros(dim, 3);
    for i in 0..dim {
        for j in 0..dim {
            let br = c.bracket(&unit(i), &unit(j));
            let mut v = ph.apply(&ph.apply(&br));
            add(&mut v, &phi_x_phi_y(i, j), &S::one());
            add(&mut v, &ph.apply(&phi_x_y(i, j)), &-S::one());
            // [e_i, phi e_j] = -[phi e_j, e_i]
            add(&mut v, &ph.apply(&phi_x_y(j, i)), &S::one());
            let w = nabla_eta[[i, j]].clone() - nabla_eta[[j, i]].clone();
            add(&mut v, xi, &w);
            for k in 0..dim {
                n[[i, j, k]] = s.g_of(&v, &unit(k));
            }
        }
    }
    Ok(n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassFlag {
    pub holds: bool,
    pub residual: Residual,
}

impl ClassFlag {
    fn from_residual(residual: Residual, tol: Tolerance) -> Self {
        ClassFlag { holds: residual.vanishes(tol), residual }
    }

    fn and(&self, other: &ClassFlag) -> ClassFlag {
        ClassFlag { holds: self.holds && other.holds, residual: self.residual.max(other.residual) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassReport {
    pub is_f0: ClassFlag,
    pub is_normal: ClassFlag,
    pub eta_closed: ClassFlag,
    pub is_f4: ClassFlag,
    pub is_f5: ClassFlag,
    pub is_f4_plus_f5: ClassFlag,
    pub is_f3_plus_f7_candidate: ClassFlag,
    /// `x theta(xi) = xi theta(xi) eta(x)`.
    pub theta_xi_closed: ClassFlag,
    /// `x theta*(xi) = xi theta*(xi) eta(x)`.
    pub theta_star_xi_closed: ClassFlag,
    pub is_f4_0: ClassFlag,
    pub is_f5_0: ClassFlag,
    pub theta_xi: f64,
    pub theta_star_xi: f64,
}

impl ClassReport {
    /// `N = 0` and `d eta = 0`: the class on which the four-parameter
    /// family and the symmetric connection are defined.
    pub fn normal_and_closed(&self) -> bool {
        self.is_normal.holds && self.eta_closed.holds
    }

    /// Sum of the two classes with both closedness identities.
    pub fn is_f4_0_plus_f5_0(&self) -> bool {
        self.is_f4_plus_f5.holds && self.theta_xi_closed.holds && self.theta_star_xi_closed.holds
    }
}

/// `-(theta(xi) / 2n) {g(phi x, phi y) eta(z) + g(phi x, phi z) eta(y)}`
/// without the scalar prefactor.
pub fn f4_shape() -> Form {
    Form::new(3, vec![term(1, &[g(phi(X), phi(Y)), eta(Z)]), term(1, &[g(phi(X), phi(Z)), eta(Y)])])
}

/// `-(theta*(xi) / 2n) {g(phi x, y) eta(z) + g(phi x, z) eta(y)}` without
/// the scalar prefactor.
pub fn f5_shape() -> Form {
    Form::new(3, vec![term(1, &[g(phi(X), Y), eta(Z)]), term(1, &[g(phi(X), Z), eta(Y)])])
}

/// Compares `F` with each class formula using the computed `theta(xi)`, `theta*(xi)`.
pub fn classify<S: Scalar>(
    s: &AcnStructure<S>,
    fd: &FundamentalData<S>,
    nd: &NijenhuisData<S>,
    tol: Tolerance,
) -> Result<ClassReport> {
    let two_n = S::from_i64(2 * s.n() as i64);
    let ctx = FormContext::new(s);
    let c4 = -fd.theta_xi.clone() / two_n.clone();
    let c5 = -fd.theta_star_xi.clone() / two_n;
    let f4 = ctx.evaluate(&f4_shape())?.scale(&c4);
    let f5 = ctx.evaluate(&f5_shape())?.scale(&c5);
    let flag = |r: Residual| ClassFlag::from_residual(r, tol);

    let closed = |d: &[S], xi_d: &S| {
        let diffs: Vec<S> =
            d.iter().zip(s.eta().components()).map(|(dx, e)| dx.clone() - xi_d.clone() * e.clone()).collect();
        flag(Residual::of_values(&diffs))
    };

    let is_f4 = flag(Residual::of_difference(&fd.f, &f4));
    let is_f5 = flag(Residual::of_difference(&fd.f, &f5));
    let theta_xi_closed = closed(&fd.d_theta_xi, &fd.xi_theta_xi);
    let theta_star_xi_closed = closed(&fd.d_theta_star_xi, &fd.xi_theta_star_xi);
    Ok(ClassReport {
        is_f0: flag(Residual::of_tensor(&fd.f)),
        is_normal: flag(Residual::of_tensor(&nd.n)),
        eta_closed: flag(Residual::of_tensor(&nd.d_eta)),
        is_f4_plus_f5: flag(Residual::of_difference(&fd.f, &f4.add(&f5)?)),
        is_f3_plus_f7_candidate: flag(Residual::of_tensor(&nd.n_tilde)),
        is_f4_0: is_f4.and(&theta_xi_closed),
        is_f5_0: is_f5.and(&theta_star_xi_closed),
        is_f4,
        is_f5,
        theta_xi_closed,
        theta_star_xi_closed,
        theta_xi: fd.theta_xi.to_f64(),
        theta_star_xi: fd.theta_star_xi.to_f64(),
    })
}
