//! Multilinear forms written as tables of monomials.
//!
//! A monomial is a rational coefficient times a product of factors such as
//! `F(y, phi x, z)`, `eta(z)` or `omega(phi x)`, whose arguments are the
//! form's slots (`x, y, z, u`), `xi`, or powers of `phi` applied to either.
//! Writing every formula as such a table keeps it comparable line by line
//! with its source and lets one evaluator serve all of them.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::structure::AcnStructure;
use crate::tensor::FrameTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    Slot(usize),
    Xi,
}

/// `phi^power` applied to a slot or to `xi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arg {
    pub base: Base,
    pub power: u8,
}

pub const X: Arg = Arg { base: Base::Slot(0), power: 0 };
pub const Y: Arg = Arg { base: Base::Slot(1), power: 0 };
pub const Z: Arg = Arg { base: Base::Slot(2), power: 0 };
pub const U: Arg = Arg { base: Base::Slot(3), power: 0 };
pub const XI: Arg = Arg { base: Base::Xi, power: 0 };

pub const fn phi(a: Arg) -> Arg {
    Arg { base: a.base, power: a.power + 1 }
}

/// Source tensors a factor may read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    F,
    N,
    NTilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    Tensor(Source, [Arg; 3]),
    Metric(Arg, Arg),
    Eta(Arg),
    /// `omega(v) = F(xi, xi, v)`.
    Omega(Arg),
}

pub const fn f(a: Arg, b: Arg, c: Arg) -> Factor {
    Factor::Tensor(Source::F, [a, b, c])
}

pub const fn nij(a: Arg, b: Arg, c: Arg) -> Factor {
    Factor::Tensor(Source::N, [a, b, c])
}

pub const fn nt(a: Arg, b: Arg, c: Arg) -> Factor {
    Factor::Tensor(Source::NTilde, [a, b, c])
}

pub const fn g(a: Arg, b: Arg) -> Factor {
    Factor::Metric(a, b)
}

pub const fn eta(a: Arg) -> Factor {
    Factor::Eta(a)
}

pub const fn omega(a: Arg) -> Factor {
    Factor::Omega(a)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub num: i64,
    pub den: i64,
    pub factors: Vec<Factor>,
}

pub fn term(num: i64, factors: &[Factor]) -> Term {
    Term { num, den: 1, factors: factors.to_vec() }
}

pub fn term_q(num: i64, den: i64, factors: &[Factor]) -> Term {
    Term { num, den, factors: factors.to_vec() }
}

/// A sum of monomials in `arity` slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    pub arity: usize,
    pub terms: Vec<Term>,
}

impl Form {
    pub fn new(arity: usize, terms: Vec<Term>) -> Self {
        Form { arity, terms }
    }

    /// Every monomial multiplied by `eta(a)`.
    pub fn times_eta(mut self, a: Arg) -> Self {
        for t in &mut self.terms {
            t.factors.push(eta(a));
        }
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Tensors a form can be evaluated against.
pub struct FormContext<'a, S> {
    structure: &'a AcnStructure<S>,
    f: Option<&'a FrameTensor<S>>,
    n: Option<&'a FrameTensor<S>>,
    n_tilde: Option<&'a FrameTensor<S>>,
    /// `vectors[b][p]`: sparse components of `phi^p e_b`, with `b = dim` for `xi`.
    vectors: Vec<Vec<Sparse<S>>>,
}

type Sparse<S> = Vec<(usize, S)>;

const MAX_POWER: usize = 3;

impl<'a, S: Scalar> FormContext<'a, S> {
    pub fn new(structure: &'a AcnStructure<S>) -> Self {
        let dim = structure.dim();
        let phi = structure.phi();
        let vectors = (0..=dim)
            .map(|b| {
                let mut v: Vec<S> = if b == dim {
                    structure.xi().to_vec()
                } else {
                    (0..dim).map(|k| if k == b { S::one() } else { S::zero() }).collect()
                };
                let mut powers = Vec::with_capacity(MAX_POWER + 1);
                for _ in 0..=MAX_POWER {
                    powers.push(sparse(&v));
                    v = phi.apply(&v);
                }
                powers
            })
            .collect();
        FormContext { structure, f: None, n: None, n_tilde: None, vectors }
    }

    pub fn with_f(mut self, f: &'a FrameTensor<S>) -> Self {
        self.f = Some(f);
        self
    }

    pub fn with_n(mut self, n: &'a FrameTensor<S>) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_n_tilde(mut self, n_tilde: &'a FrameTensor<S>) -> Self {
        self.n_tilde = Some(n_tilde);
        self
    }

    fn vector(&self, a: Arg, idx: &[usize]) -> &Sparse<S> {
        let b = match a.base {
            Base::Slot(s) => idx[s],
            Base::Xi => self.structure.dim(),
        };
        &self.vectors[b][a.power as usize]
    }

    fn source(&self, s: Source) -> Result<&'a FrameTensor<S>> {
        let t = match s {
            Source::F => self.f,
            Source::N => self.n,
            Source::NTilde => self.n_tilde,
        };
        t.ok_or_else(|| Error::Shape(format!("form needs {s:?} but the context has none")))
    }

    fn trilinear(&self, t: &FrameTensor<S>, args: &[Arg; 3], idx: &[usize]) -> S {
        let (u, v, w) = (self.vector(args[0], idx), self.vector(args[1], idx), self.vector(args[2], idx));
        let mut acc = S::zero();
        for (a, ua) in u {
            for (b, vb) in v {
                for (c, wc) in w {
                    let x = &t[[*a, *b, *c]];
                    if !x.is_zero() {
                        acc = acc + ua.clone() * vb.clone() * wc.clone() * x.clone();
                    }
                }
            }
        }
        acc
    }

    fn factor(&self, fac: &Factor, idx: &[usize]) -> Result<S> {
        Ok(match fac {
            Factor::Tensor(src, args) => self.trilinear(self.source(*src)?, args, idx),
            Factor::Omega(a) => self.trilinear(self.source(Source::F)?, &[XI, XI, *a], idx),
            Factor::Eta(a) => {
                let eta = self.structure.eta();
                self.vector(*a, idx).iter().fold(S::zero(), |acc, (k, v)| acc + v.clone() * eta[[*k]].clone())
            }
            Factor::Metric(a, b) => {
                let g = self.structure.g();
                let mut acc = S::zero();
                for (i, ui) in self.vector(*a, idx) {
                    for (j, vj) in self.vector(*b, idx) {
                        let gij = &g[[*i, *j]];
                        if !gij.is_zero() {
                            acc = acc + ui.clone() * vj.clone() * gij.clone();
                        }
                    }
                }
                acc
            }
        })
    }

    /// Value of one monomial at a frame index tuple.
    pub fn eval_term(&self, t: &Term, idx: &[usize]) -> Result<S> {
        let mut acc = S::ratio(t.num, t.den);
        for fac in &t.factors {
            if acc.is_zero() {
                return Ok(acc);
            }
            acc = acc * self.factor(fac, idx)?;
        }
        Ok(acc)
    }

    /// All components of a form.
    pub fn evaluate(&self, form: &Form) -> Result<FrameTensor<S>> {
        for t in &form.terms {
            for fac in &t.factors {
                let args: Vec<Arg> = match fac {
                    Factor::Tensor(_, a) => a.to_vec(),
                    Factor::Metric(a, b) => vec![*a, *b],
                    Factor::Eta(a) | Factor::Omega(a) => vec![*a],
                };
                for a in &args {
                    if let Base::Slot(s) = a.base {
                        if s >= form.arity {
                            return Err(Error::SlotOutOfRange { slot: s, order: form.arity });
                        }
                    }
                    if a.power as usize > MAX_POWER {
                        return Err(Error::Shape(format!("phi power {} not supported", a.power)));
                    }
                }
            }
        }
        FrameTensor::try_from_fn(self.structure.dim(), form.arity, |idx| {
            form.terms.iter().try_fold(S::zero(), |acc, t| Ok(acc + self.eval_term(t, idx)?))
        })
    }
}

fn sparse<S: Scalar>(v: &[S]) -> Sparse<S> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}
