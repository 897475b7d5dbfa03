//! Connection families given by deformation tensors `Q`, with
//! `g(nabla'_x y - nabla_x y, z) = Q(x, y, z)`, and the checks that go
//! with them: parallelism of the structure tensors, torsion, parameter
//! conditions.

use rand::Rng;

use crate::backend::lie::random_rational;
use crate::backend::{
    nabla_tensor, torsion_mixed, ConnectionCoeffs, GeometryBackend, Provenance, StructureConstants, Variance,
};
use crate::error::{Error, Result};
use crate::forms::{eta, f, nij, nt, omega, phi, term, term_q, Form, FormContext, Term, X, XI, Y, Z};
use crate::fundamental::{ClassReport, FundamentalData, NijenhuisData};
use crate::residual::{Residual, Tolerance, FLOAT_ACCEPT};
use crate::scalar::Scalar;
use crate::structure::AcnStructure;
use crate::tensor::FrameTensor;

/// Parameters `t_1..t_10` of the ten-parameter family (stored zero-based).
#[derive(Clone, Debug, PartialEq)]
pub struct TenParams<S> {
    pub t: [S; 10],
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourParamsS<S> {
    pub s: [S; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourParamsP<S> {
    pub p: [S; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaMu<S> {
    pub lambda: S,
    pub mu: S,
}

fn array<S: Clone + std::fmt::Debug, const K: usize>(v: Vec<S>) -> [S; K] {
    v.try_into().expect("length checked by caller")
}

impl<S: Scalar> TenParams<S> {
    pub fn new(t: [S; 10]) -> Self {
        TenParams { t }
    }

    pub fn zero() -> Self {
        TenParams { t: array((0..10).map(|_| S::zero()).collect()) }
    }

    /// `t_i` with the one-based index used in formulas.
    pub fn get(&self, i: usize) -> &S {
        &self.t[i - 1]
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_num: i64, max_den: i64) -> Self {
        TenParams { t: array((0..10).map(|_| random_rational(rng, max_num, max_den)).collect()) }
    }

    /// `s_1 = t_1+t_2`, `s_2 = t_3+t_4`, `s_3 = 2(t_5+t_6) - t_3 - t_4`, `s_4 = -t_1 - t_2 - 2(t_7+t_8)`.
    pub fn s_map(&self) -> FourParamsS<S> {
        let t = |i| self.get(i).clone();
        let two = S::from_i64(2);
        FourParamsS {
            s: [
                t(1) + t(2),
                t(3) + t(4),
                two.clone() * (t(5) + t(6)) - t(3) - t(4),
                -t(1) - t(2) - two * (t(7) + t(8)),
            ],
        }
    }

    pub fn conditions(&self) -> ParamConditions {
        parameter_conditions(self)
    }
}

impl<S: Scalar> FourParamsS<S> {
    pub fn new(s: [S; 4]) -> Self {
        FourParamsS { s }
    }

    pub fn zero() -> Self {
        FourParamsS { s: array((0..4).map(|_| S::zero()).collect()) }
    }

    /// `s_1 = s_4 = 0`, `s_2 = 1/4`, `s_3 = -3/4`: the torsion-free member.
    pub fn yano() -> Self {
        FourParamsS { s: [S::zero(), S::ratio(1, 4), S::ratio(-3, 4), S::zero()] }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_num: i64, max_den: i64) -> Self {
        FourParamsS { s: array((0..4).map(|_| random_rational(rng, max_num, max_den)).collect()) }
    }

    pub fn get(&self, i: usize) -> &S {
        &self.s[i - 1]
    }

    /// `lambda = s_1 + s_4`, `mu = s_3 - s_2`.
    pub fn lambda_mu(&self) -> LambdaMu<S> {
        LambdaMu { lambda: self.get(1).clone() + self.get(4).clone(), mu: self.get(3).clone() - self.get(2).clone() }
    }
}

impl<S: Scalar> FourParamsP<S> {
    pub fn new(p: [S; 4]) -> Self {
        FourParamsP { p }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_num: i64, max_den: i64) -> Self {
        FourParamsP { p: array((0..4).map(|_| random_rational(rng, max_num, max_den)).collect()) }
    }

    /// `p_1 = t_1 = -t_2`, `p_2 = t_3 = -t_4`, `p_3 = t_5 = -t_6`, `p_4 = t_7 = -t_8`, `t_9 = t_10 = 0`.
    pub fn to_ten(&self) -> TenParams<S> {
        let p = |i: usize| self.p[i].clone();
        TenParams { t: [p(0), -p(0), p(1), -p(1), p(2), -p(2), p(3), -p(3), S::zero(), S::zero()] }
    }
}

impl<S: Scalar> LambdaMu<S> {
    pub fn new(lambda: S, mu: S) -> Self {
        LambdaMu { lambda, mu }
    }
}

/// A deformation tensor in both its (0,3) and (1,2) forms.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationQ<S> {
    pub q: FrameTensor<S>,
    pub q_mixed: FrameTensor<S>,
}

impl<S: Scalar> DeformationQ<S> {
    pub fn from_lowered(q: FrameTensor<S>, s: &AcnStructure<S>) -> Result<Self> {
        let q_mixed = q.raise(s.g_inv(), 2)?;
        Ok(DeformationQ { q, q_mixed })
    }

    /// The deformation carrying `base` to `other`.
    pub fn between(base: &ConnectionCoeffs<S>, other: &ConnectionCoeffs<S>, s: &AcnStructure<S>) -> Result<Self> {
        Self::from_lowered(base.deformation_to(other, s.g())?, s)
    }

    pub fn apply(&self, conn: &ConnectionCoeffs<S>) -> Result<ConnectionCoeffs<S>> {
        conn.deformed(&self.q_mixed)
    }
}

/// Class preconditions for formulas only claimed on a subclass.
#[derive(Clone, Copy, Debug)]
pub enum ClassGuard<'a> {
    Require(&'a ClassReport),
    /// Evaluate the formula regardless of class.
    Override,
}

impl ClassGuard<'_> {
    fn check(&self, holds: impl Fn(&ClassReport) -> bool, what: &str) -> Result<()> {
        match self {
            ClassGuard::Require(c) if !holds(c) => Err(Error::ClassViolation(format!("structure is not {what}"))),
            _ => Ok(()),
        }
    }
}

const NORMAL_CLOSED: &str = "normal with closed eta (N = 0, d eta = 0)";

fn q(num: i64, den: i64, factors: &[crate::forms::Factor]) -> Term {
    term_q(num, den, factors)
}

/// `1/2 {F(x,phi y,z) + F(x,phi y,xi) eta(z)} - F(x,phi z,xi) eta(y)`,
/// the part shared by every family.
pub fn base_form() -> Form {
    Form::new(
        3,
        vec![q(1, 2, &[f(X, phi(Y), Z)]), q(1, 2, &[f(X, phi(Y), XI), eta(Z)]), term(-1, &[f(X, phi(Z), XI), eta(Y)])],
    )
}

/// The ten-parameter deformation as eleven forms: the base part, then the
/// bracket multiplying each `t_i`.
pub fn ten_param_forms() -> [Form; 11] {
    let t1 = Form::new(
        3,
        vec![
            term(1, &[f(Y, X, Z)]),
            term(1, &[f(phi(Y), phi(X), Z)]),
            term(-1, &[f(Y, X, XI), eta(Z)]),
            term(-1, &[f(phi(Y), phi(X), XI), eta(Z)]),
            term(-1, &[f(Y, Z, XI), eta(X)]),
            term(-1, &[f(XI, X, Z), eta(Y)]),
            term(1, &[eta(X), eta(Y), omega(Z)]),
        ],
    );
    let t2 = Form::new(
        3,
        vec![
            term(1, &[f(Z, X, Y)]),
            term(1, &[f(phi(Z), phi(X), Y)]),
            term(-1, &[f(Z, X, XI), eta(Y)]),
            term(-1, &[f(phi(Z), phi(X), XI), eta(Y)]),
            term(-1, &[f(Z, Y, XI), eta(X)]),
            term(-1, &[f(XI, X, Y), eta(Z)]),
            term(1, &[eta(X), eta(Z), omega(Y)]),
        ],
    );
    let t3 = Form::new(
        3,
        vec![
            term(1, &[f(Y, phi(X), Z)]),
            term(-1, &[f(phi(Y), X, Z)]),
            term(-1, &[f(Y, phi(X), XI), eta(Z)]),
            term(1, &[f(phi(Y), X, XI), eta(Z)]),
            term(-1, &[f(Y, phi(Z), XI), eta(X)]),
            term(-1, &[f(XI, phi(X), Z), eta(Y)]),
            term(1, &[eta(X), eta(Y), omega(phi(Z))]),
        ],
    );
    let t4 = Form::new(
        3,
        vec![
            term(1, &[f(Z, phi(X), Y)]),
            term(-1, &[f(phi(Z), X, Y)]),
            term(-1, &[f(Z, phi(X), XI), eta(Y)]),
            term(1, &[f(phi(Z), X, XI), eta(Y)]),
            term(-1, &[f(Z, phi(Y), XI), eta(X)]),
            term(-1, &[f(XI, phi(X), Y), eta(Z)]),
            term(1, &[eta(X), eta(Z), omega(phi(Y))]),
        ],
    );
    let t5 = Form::new(
        3,
        vec![term(1, &[f(phi(Y), Z, XI)]), term(1, &[f(Y, phi(Z), XI)]), term(-1, &[eta(Y), omega(phi(Z))])],
    )
    .times_eta(X);
    let t6 = Form::new(
        3,
        vec![term(1, &[f(phi(Z), Y, XI)]), term(1, &[f(Z, phi(Y), XI)]), term(-1, &[omega(phi(Y)), eta(Z)])],
    )
    .times_eta(X);
    let t7 =
        Form::new(3, vec![term(1, &[f(phi(Y), phi(Z), XI)]), term(-1, &[f(Y, Z, XI)]), term(1, &[eta(Y), omega(Z)])])
            .times_eta(X);
    let t8 =
        Form::new(3, vec![term(1, &[f(phi(Z), phi(Y), XI)]), term(-1, &[f(Z, Y, XI)]), term(1, &[omega(Y), eta(Z)])])
            .times_eta(X);
    let t9 = Form::new(3, vec![term(1, &[omega(X), eta(Y), eta(Z)])]);
    let t10 = Form::new(3, vec![term(1, &[omega(phi(X)), eta(Y), eta(Z)])]);
    [base_form(), t1, t2, t3, t4, t5, t6, t7, t8, t9, t10]
}

/// The four-parameter deformation as five forms: base, then the brackets
/// multiplying `s_1..s_4`.
pub fn four_param_forms() -> [Form; 5] {
    [
        base_form(),
        Form::new(3, vec![term(1, &[f(Y, X, Z)]), term(1, &[f(phi(Y), phi(X), Z)])]),
        Form::new(3, vec![term(1, &[f(Y, phi(X), Z)]), term(-1, &[f(phi(Y), X, Z)])]),
        Form::new(3, vec![term(1, &[f(Y, phi(Z), XI), eta(X)])]),
        Form::new(3, vec![term(1, &[f(Y, Z, XI), eta(X)])]),
    ]
}

/// The natural family as five forms: base, then the `N` brackets
/// multiplying `p_1..p_4`.
pub fn natural_forms() -> [Form; 5] {
    [
        base_form(),
        Form::new(
            3,
            vec![
                term(1, &[nij(Y, Z, phi(X))]),
                term(1, &[nij(XI, Y, phi(X)), eta(Z)]),
                term(1, &[nij(Z, XI, phi(X)), eta(Y)]),
            ],
        ),
        Form::new(
            3,
            vec![term(1, &[nij(Z, Y, X)]), term(1, &[nij(Y, XI, X), eta(Z)]), term(1, &[nij(XI, Z, X), eta(Y)])],
        ),
        Form::new(3, vec![term(1, &[nij(phi(phi(Z)), Y, XI)]), term(1, &[nij(Z, XI, XI), eta(Y)])]).times_eta(X),
        Form::new(3, vec![term(1, &[nij(Y, phi(Z), XI)]), term(1, &[nij(phi(Z), XI, XI), eta(Y)])]).times_eta(X),
    ]
}

/// Right-hand side of the symmetric-part identity as six forms, multiplied
/// by `t_1+t_2`, `-(t_3+t_4)`, `-(t_5+t_6)`, `t_7+t_8`, `2 t_9`, `2 t_10`.
pub fn symmetric_part_forms() -> [Form; 6] {
    [
        Form::new(
            3,
            vec![
                term(1, &[nt(Y, Z, phi(X))]),
                term(-1, &[nt(XI, Y, phi(X)), eta(Z)]),
                term(-1, &[nt(XI, Z, phi(X)), eta(Y)]),
            ],
        ),
        Form::new(
            3,
            vec![term(1, &[nt(Y, Z, X)]), term(-1, &[nt(XI, Y, X), eta(Z)]), term(-1, &[nt(XI, Z, X), eta(Y)])],
        ),
        Form::new(3, vec![term(1, &[nt(phi(phi(Z)), Y, XI)]), term(1, &[nt(Z, XI, XI), eta(Y)])]).times_eta(X),
        Form::new(3, vec![term(1, &[nt(phi(Z), Y, XI)]), term(-1, &[nt(phi(Z), XI, XI), eta(Y)])]).times_eta(X),
        Form::new(3, vec![term(1, &[omega(X), eta(Y), eta(Z)])]),
        Form::new(3, vec![term(1, &[omega(phi(X)), eta(Y), eta(Z)])]),
    ]
}

/// Torsion of the four-parameter family as four forms `A, B, C, D` with
/// `T = s_1 A + (1 - 4 s_2)/2 B - s_4 C - (1 - s_2 + s_3) D`.
pub fn torsion_forms() -> [Form; 4] {
    [
        Form::new(
            3,
            vec![
                term(1, &[f(Y, X, Z)]),
                term(-1, &[f(X, Y, Z)]),
                term(1, &[f(phi(Y), phi(X), Z)]),
                term(-1, &[f(phi(X), phi(Y), Z)]),
            ],
        ),
        Form::new(3, vec![term(1, &[f(X, phi(Y), Z)]), term(-1, &[f(Y, phi(X), Z)])]),
        Form::new(3, vec![term(1, &[f(X, Z, XI), eta(Y)]), term(-1, &[f(Y, Z, XI), eta(X)])]),
        Form::new(3, vec![term(1, &[f(X, phi(Z), XI), eta(Y)]), term(-1, &[f(Y, phi(Z), XI), eta(X)])]),
    ]
}

fn linear_combination<S: Scalar>(
    base: &FrameTensor<S>,
    groups: &[FrameTensor<S>],
    coeffs: &[S],
) -> Result<FrameTensor<S>> {
    let mut out = base.clone();
    for (g, c) in groups.iter().zip(coeffs) {
        if !c.is_zero() {
            out.add_scaled(c, g)?;
        }
    }
    Ok(out)
}

/// `F(x,y,z) - Q(x,y,phi z) + Q(x,phi y,z)`: vanishes iff `nabla' phi = 0`.
pub fn almost_phi_defect<S: Scalar>(
    s: &AcnStructure<S>,
    fd: &FundamentalData<S>,
    q: &FrameTensor<S>,
) -> Result<FrameTensor<S>> {
    let phi_t = s.phi().as_tensor().swapped(0, 1)?;
    let q_phi_z = q.transform_slot(&phi_t, 2)?;
    let q_phi_y = q.transform_slot(&phi_t, 1)?;
    fd.f.sub(&q_phi_z)?.add(&q_phi_y)
}

/// The eleven group tensors of the ten-parameter family evaluated once for a
/// structure, so that `Q(t) = G_0 + sum t_i G_i` for any `t`.
#[derive(Clone, Debug)]
pub struct QTable<S> {
    groups: Vec<FrameTensor<S>>,
}

impl<S: Scalar> QTable<S> {
    pub fn new(s: &AcnStructure<S>, fd: &FundamentalData<S>) -> Result<Self> {
        let ctx = FormContext::new(s).with_f(&fd.f);
        let groups = ten_param_forms().iter().map(|form| ctx.evaluate(form)).collect::<Result<Vec<_>>>()?;
        Ok(QTable { groups })
    }

    /// `G_0` for `i = 0`, else the tensor multiplying `t_i`.
    pub fn group(&self, i: usize) -> &FrameTensor<S> {
        &self.groups[i]
    }

    pub fn lowered(&self, t: &TenParams<S>) -> Result<FrameTensor<S>> {
        linear_combination(&self.groups[0], &self.groups[1..], &t.t)
    }

    /// `Q(t)`, with the almost-phi condition re-verified.
    pub fn q(&self, s: &AcnStructure<S>, fd: &FundamentalData<S>, t: &TenParams<S>) -> Result<DeformationQ<S>> {
        let q = self.lowered(t)?;
        let defect = Residual::of_tensor(&almost_phi_defect(s, fd, &q)?);
        if !defect.vanishes(fd.guard) {
            return Err(Error::Inconsistent {
                check: "almost-phi condition of the ten-parameter family".into(),
                residual: defect.max_abs,
            });
        }
        DeformationQ::from_lowered(q, s)
    }
}

/// The ten-parameter family of almost phi-connections.
pub fn q_ten_param<S: Scalar>(
    s: &AcnStructure<S>,
    fd: &FundamentalData<S>,
    t: &TenParams<S>,
) -> Result<DeformationQ<S>> {
    QTable::new(s, fd)?.q(s, fd, t)
}

/// The four-parameter family on normal manifolds with closed `eta`.
pub fn q_four_param<S: Scalar>(
    s: &AcnStructure<S>,
    fd: &FundamentalData<S>,
    sp: &FourParamsS<S>,
    guard: ClassGuard<'_>,
) -> Result<DeformationQ<S>> {
    guard.check(ClassReport::normal_and_closed, NORMAL_CLOSED)?;
    let ctx = FormContext::new(s).with_f(&fd.f);
    let g = four_param_forms().iter().map(|form| ctx.evaluate(form)).collect::<Result<Vec<_>>>()?;
    DeformationQ::from_lowered(linear_combination(&g[0], &g[1..], &sp.s)?, s)
}

/// Closed form of the torsion of the four-parameter family.
pub fn torsion_formula<S: Scalar>(
    s: &AcnStructure<S>,
    fd: &FundamentalData<S>,
    sp: &FourParamsS<S>,
) -> Result<FrameTensor<S>> {
    let ctx = FormContext::new(s).with_f(&fd.f);
    let [a, b, c, d] = torsion_forms();
    let (a, b, c, d) = (ctx.evaluate(&a)?, ctx.evaluate(&b)?, ctx.evaluate(&c)?, ctx.evaluate(&d)?);
    let s_ = |i| sp.get(i).clone();
    let cb = (S::one() - S::from_i64(4) * s_(2)) / S::from_i64(2);
    let cd = -(S::one() - s_(2) + s_(3));
    linear_combination(&FrameTensor::zeros(s.dim(), 3), &[a, b, c, d], &[s_(1), cb, -s_(4), cd])
}

/// Right-hand side of the symmetric-part identity for `Q(t)`.
pub fn symmetric_part_formula<S: Scalar>(
    s: &AcnStructure<S>,
    fd: &FundamentalData<S>,
    nd: &NijenhuisData<S>,
    t: &TenParams<S>,
) -> Result<FrameTensor<S>> {
    let ctx = FormContext::new(s).with_f(&fd.f).with_n_tilde(&nd.n_tilde);
    let g = symmetric_part_forms().iter().map(|form| ctx.evaluate(form)).collect::<Result<Vec<_>>>()?;
    let t_ = |i| t.get(i).clone();
    let two = S::from_i64(2);
    let coeffs = [t_(1) + t_(2), -(t_(3) + t_(4)), -(t_(5) + t_(6)), t_(7) + t_(8), two.clone() * t_(9), two * t_(10)];
    linear_combination(&FrameTensor::zeros(s.dim(), 3), &g, &coeffs)
}

/// `Q(x,y,z) + Q(x,z,y)` minus its closed form in terms of `N~`.
pub fn symmetric_part_residual<S: Scalar>(
    s: &AcnStructure<S>,
    fd: &FundamentalData<S>,
    nd: &NijenhuisData<S>,
    t: &TenParams<S>,
    q: &DeformationQ<S>,
) -> Result<Residual> {
    let lhs = q.q.symmetrized(1, 2)?;
    Ok(Residual::of_difference(&lhs, &symmetric_part_formula(s, fd, nd, t)?))
}

fn near_zero<S: Scalar>(v: &S) -> bool {
    if S::EXACT {
        v.is_zero()
    } else {
        v.magnitude() <= FLOAT_ACCEPT
    }
}

/// Parameter conditions for the ten-parameter family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamConditions {
    /// `t_1 + t_2 - t_9 = t_3 + t_4 - t_10 = 0`.
    pub almost_contact: bool,
    /// `t_1 + t_2 = t_3 + t_4 = t_5 + t_6 = t_7 + t_8 = t_9 = t_10 = 0`.
    pub natural: bool,
    /// `t_1 = -t_2` and `t_3 = -t_4`, sufficient for naturality when `N~ = 0`.
    pub natural_if_n_tilde_vanishes: bool,
}

pub fn parameter_conditions<S: Scalar>(t: &TenParams<S>) -> ParamConditions {
    let t_ = |i| t.get(i).clone();
    let s12 = t_(1) + t_(2);
    let s34 = t_(3) + t_(4);
    ParamConditions {
        almost_contact: near_zero(&(s12.clone() - t_(9))) && near_zero(&(s34.clone() - t_(10))),
        natural: near_zero(&s12)
            && near_zero(&s34)
            && near_zero(&(t_(5) + t_(6)))
            && near_zero(&(t_(7) + t_(8)))
            && near_zero(&t_(9))
            && near_zero(&t_(10)),
        natural_if_n_tilde_vanishes: near_zero(&s12) && near_zero(&s34),
    }
}

/// Residuals of `nabla' phi`, `nabla' xi`, `nabla' eta`, `nabla' g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionFlags {
    pub phi: Residual,
    pub xi: Residual,
    pub eta: Residual,
    pub g: Residual,
}

impl ConnectionFlags {
    pub fn almost_phi(&self, tol: Tolerance) -> bool {
        self.phi.vanishes(tol)
    }

    pub fn almost_contact(&self, tol: Tolerance) -> bool {
        self.phi.vanishes(tol) && self.xi.vanishes(tol) && self.eta.vanishes(tol)
    }

    pub fn natural(&self, tol: Tolerance) -> bool {
        self.phi.vanishes(tol) && self.eta.vanishes(tol) && self.g.vanishes(tol)
    }
}

pub fn nabla_phi<S: Scalar, B: GeometryBackend<S>>(backend: &B, conn: &ConnectionCoeffs<S>) -> Result<FrameTensor<S>> {
    nabla_tensor(
        backend,
        conn,
        |b| Ok(b.structure().phi().as_tensor()),
        &[Variance::Contravariant, Variance::Covariant],
    )
}

pub fn nabla_xi<S: Scalar, B: GeometryBackend<S>>(backend: &B, conn: &ConnectionCoeffs<S>) -> Result<FrameTensor<S>> {
    nabla_tensor(
        backend,
        conn,
        |b| FrameTensor::new(b.dim(), 1, b.structure().xi().to_vec()),
        &[Variance::Contravariant],
    )
}

pub fn nabla_eta<S: Scalar, B: GeometryBackend<S>>(backend: &B, conn: &ConnectionCoeffs<S>) -> Result<FrameTensor<S>> {
    nabla_tensor(backend, conn, |b| Ok(b.structure().eta().clone()), &[Variance::Covariant])
}

pub fn nabla_g<S: Scalar, B: GeometryBackend<S>>(backend: &B, conn: &ConnectionCoeffs<S>) -> Result<FrameTensor<S>> {
    nabla_tensor(backend, conn, |b| Ok(b.structure().g().clone()), &[Variance::Covariant, Variance::Covariant])
}

/// Measures parallelism of each structure tensor under `conn` directly.
pub fn check_connection_flags<S: Scalar, B: GeometryBackend<S>>(
    backend: &B,
    conn: &ConnectionCoeffs<S>,
) -> Result<ConnectionFlags> {
    Ok(ConnectionFlags {
        phi: Residual::of_tensor(&nabla_phi(backend, conn)?),
        xi: Residual::of_tensor(&nabla_xi(backend, conn)?),
        eta: Residual::of_tensor(&nabla_eta(backend, conn)?),
        g: Residual::of_tensor(&nabla_g(backend, conn)?),
    })
}

/// `T(x, y, z) = g(nabla'_x y - nabla'_y x - [x, y], z)`.
pub fn torsion<S: Scalar>(
    conn: &ConnectionCoeffs<S>,
    brackets: &StructureConstants<S>,
    g: &FrameTensor<S>,
) -> Result<FrameTensor<S>> {
    torsion_mixed(conn, brackets).lower(g, 2)
}

/// The four-parameter family of natural connections written with `N`.
/// The result is checked to parallelize `phi`, `eta` and `g`.
pub fn natural_family<S: Scalar, B: GeometryBackend<S>>(
    backend: &B,
    fd: &FundamentalData<S>,
    nd: &NijenhuisData<S>,
    p: &FourParamsP<S>,
) -> Result<DeformationQ<S>> {
    let s = backend.structure();
    let ctx = FormContext::new(s).with_f(&fd.f).with_n(&nd.n);
    let g = natural_forms().iter().map(|form| ctx.evaluate(form)).collect::<Result<Vec<_>>>()?;
    let q = DeformationQ::from_lowered(linear_combination(&g[0], &g[1..], &p.p)?, s)?;
    let conn = q.apply(&backend.levi_civita()?)?;
    let flags = check_connection_flags(backend, &conn)?;
    let worst = flags.phi.max(flags.eta).max(flags.g);
    if !worst.vanishes(backend.consistency_tolerance()) {
        return Err(Error::Inconsistent { check: "naturality of the natural family".into(), residual: worst.max_abs });
    }
    Ok(q)
}

/// Builds `nabla'_{e_i} e_j = nabla_{e_i} e_j + delta(i, j)` from a vector-valued `delta`.
fn shifted<S: Scalar>(
    conn: &ConnectionCoeffs<S>,
    mut delta: impl FnMut(usize, usize) -> Vec<S>,
) -> Result<ConnectionCoeffs<S>> {
    let dim = conn.dim();
    let mut gamma = conn.gamma().clone();
    for i in 0..dim {
        for j in 0..dim {
            for (k, v) in delta(i, j).into_iter().enumerate() {
                if !v.is_zero() {
                    gamma[[i, j, k]] = gamma[[i, j, k]].clone() + v;
                }
            }
        }
    }
    ConnectionCoeffs::new(gamma, Provenance::Deformed)
}

/// Covariant derivatives of the structure tensors under the Levi-Civita
/// connection, in mixed form.
struct StructureDerivatives<S> {
    /// `[a, out, in]`: `(nabla_{e_a} phi)` as an endomorphism.
    phi: FrameTensor<S>,
    /// `[a, k]`: `nabla_{e_a} xi`.
    xi: FrameTensor<S>,
    /// `[a, b]`: `(nabla_{e_a} eta) e_b`.
    eta: FrameTensor<S>,
}

impl<S: Scalar> StructureDerivatives<S> {
    fn new<B: GeometryBackend<S>>(backend: &B, conn: &ConnectionCoeffs<S>) -> Result<Self> {
        Ok(StructureDerivatives {
            phi: nabla_phi(backend, conn)?,
            xi: nabla_xi(backend, conn)?,
            eta: nabla_eta(backend, conn)?,
        })
    }

    /// `(nabla_u phi) v` for arbitrary frame vectors.
    fn phi_at(&self, u: &[S], v: &[S]) -> Vec<S> {
        let dim = u.len();
        (0..dim)
            .map(|k| {
                let mut acc = S::zero();
                for (a, ua) in u.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                    for (m, vm) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                        let c = &self.phi[[a, k, m]];
                        if !c.is_zero() {
                            acc = acc + ua.clone() * vm.clone() * c.clone();
                        }
                    }
                }
                acc
            })
            .collect()
    }

    fn xi_at(&self, a: usize) -> Vec<S> {
        (0..self.xi.dim()).map(|k| self.xi[[a, k]].clone()).collect()
    }
}

fn unit<S: Scalar>(dim: usize, i: usize) -> Vec<S> {
    (0..dim).map(|k| if k == i { S::one() } else { S::zero() }).collect()
}

fn axpy<S: Scalar>(out: &mut [S], c: &S, v: &[S]) {
    if c.is_zero() {
        return;
    }
    for (o, x) in out.iter_mut().zip(v) {
        if !x.is_zero() {
            *o = o.clone() + c.clone() * x.clone();
        }
    }
}

/// `nabla''_x y = nabla_x y + 1/2 {(nabla_x phi) phi y + (nabla_x eta)(y) xi} - eta(y) nabla_x xi`.
pub fn canonical_connection<S: Scalar, B: GeometryBackend<S>>(
    backend: &B,
    conn: &ConnectionCoeffs<S>,
) -> Result<ConnectionCoeffs<S>> {
    let s = backend.structure();
    let dim = s.dim();
    let d = StructureDerivatives::new(backend, conn)?;
    let half = S::ratio(1, 2);
    shifted(conn, |i, j| {
        let mut v = vec![S::zero(); dim];
        axpy(&mut v, &half, &d.phi_at(&unit(dim, i), &s.phi().column(j)));
        axpy(&mut v, &(half.clone() * d.eta[[i, j]].clone()), s.xi());
        axpy(&mut v, &-s.eta()[[j]].clone(), &d.xi_at(i));
        v
    })
}

/// The torsion-free almost phi-connection
/// `nabla'_x y = nabla_x y + 1/4 {2 (nabla_x phi) phi y + (nabla_y phi) phi x - (nabla_{phi y} phi) x
///               + 2 (nabla_x eta)(y) xi - 3 eta(x) nabla_y xi - 4 eta(y) nabla_x xi}`.
pub fn yano_connection<S: Scalar, B: GeometryBackend<S>>(
    backend: &B,
    conn: &ConnectionCoeffs<S>,
    guard: ClassGuard<'_>,
) -> Result<ConnectionCoeffs<S>> {
    guard.check(ClassReport::normal_and_closed, NORMAL_CLOSED)?;
    let s = backend.structure();
    let dim = s.dim();
    let d = StructureDerivatives::new(backend, conn)?;
    let quarter = S::ratio(1, 4);
    let c = |k: i64| quarter.clone() * S::from_i64(k);
    shifted(conn, |i, j| {
        let (x, y) = (unit(dim, i), unit(dim, j));
        let mut v = vec![S::zero(); dim];
        axpy(&mut v, &c(2), &d.phi_at(&x, &s.phi().column(j)));
        axpy(&mut v, &c(1), &d.phi_at(&y, &s.phi().column(i)));
        axpy(&mut v, &c(-1), &d.phi_at(&s.phi().column(j), &x));
        axpy(&mut v, &(c(2) * d.eta[[i, j]].clone()), s.xi());
        axpy(&mut v, &(c(-3) * s.eta()[[i]].clone()), &d.xi_at(j));
        axpy(&mut v, &(c(-4) * s.eta()[[j]].clone()), &d.xi_at(i));
        v
    })
}

/// The two-parameter family on the sum of the two classes:
/// `nabla'_x y = nabla_x y + theta(xi)/2n {g(x,phi y) xi - eta(y) phi x}
///   + theta*(xi)/2n {g(x,y) xi - eta(y) x}
///   + (lambda theta(xi) + mu theta*(xi))/2n {eta(x) y - eta(x) eta(y) xi}
///   + (mu theta(xi) - lambda theta*(xi))/2n eta(x) phi y`.
pub fn f45_family<S: Scalar>(
    s: &AcnStructure<S>,
    conn: &ConnectionCoeffs<S>,
    fd: &FundamentalData<S>,
    lm: &LambdaMu<S>,
    guard: ClassGuard<'_>,
) -> Result<ConnectionCoeffs<S>> {
    guard.check(|c| c.is_f4_plus_f5.holds, "in the sum of the two classes")?;
    let dim = s.dim();
    let two_n = S::from_i64(2 * s.n() as i64);
    let th = fd.theta_xi.clone() / two_n.clone();
    let ths = fd.theta_star_xi.clone() / two_n;
    let (l, m) = (lm.lambda.clone(), lm.mu.clone());
    let c3 = l.clone() * th.clone() + m.clone() * ths.clone();
    let c4 = m * th.clone() - l * ths.clone();
    let xi = s.xi();
    shifted(conn, |i, j| {
        let (x, y) = (unit(dim, i), unit(dim, j));
        let phi_x = s.phi().column(i);
        let phi_y = s.phi().column(j);
        let (eta_x, eta_y) = (s.eta()[[i]].clone(), s.eta()[[j]].clone());
        let mut v = vec![S::zero(); dim];
        axpy(&mut v, &(th.clone() * s.g_of(&x, &phi_y)), xi);
        axpy(&mut v, &(-th.clone() * eta_y.clone()), &phi_x);
        axpy(&mut v, &(ths.clone() * s.g()[[i, j]].clone()), xi);
        axpy(&mut v, &(-ths.clone() * eta_y.clone()), &x);
        axpy(&mut v, &(c3.clone() * eta_x.clone()), &y);
        axpy(&mut v, &(-c3.clone() * eta_x.clone() * eta_y), xi);
        axpy(&mut v, &(c4.clone() * eta_x), &phi_y);
        v
    })
}
