//! Brute-force reference computations for left-invariant structures with a
//! diagonal metric. Everything is plain nested loops over rationals and
//! shares no code with the library beyond the scalar type.

#![allow(dead_code)]

use acn_core::Rational;
use num_traits::{One, Zero};

pub type Vector = Vec<Rational>;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// A Lie algebra with a diagonal metric and an endomorphism `phi[out][in]`.
pub struct Oracle {
    pub dim: usize,
    pub c: Vec<Vec<Vec<Rational>>>,
    pub g: Vec<Rational>,
    pub phi: Vec<Vec<Rational>>,
    pub xi: usize,
    /// `gamma[i][j][k]`: component `k` of `nabla_{e_i} e_j`.
    pub gamma: Vec<Vec<Vec<Rational>>>,
}

impl Oracle {
    /// Canonical structure of dimension `2n + 1` over the given brackets.
    pub fn canonical(n: usize, c: Vec<Vec<Vec<Rational>>>) -> Self {
        let dim = 2 * n + 1;
        let mut g = vec![Rational::one(); dim];
        let mut phi = vec![vec![Rational::zero(); dim]; dim];
        for i in 0..n {
            g[n + i] = -Rational::one();
            phi[n + i][i] = Rational::one();
            phi[i][n + i] = -Rational::one();
        }
        let mut o = Oracle { dim, c, g, phi, xi: dim - 1, gamma: vec![] };
        o.gamma = o.koszul();
        o
    }

    fn bracket_lowered(&self, i: usize, j: usize, k: usize) -> Rational {
        self.c[i][j][k].clone() * self.g[k].clone()
    }

    /// `2 g(nabla_i e_j, e_k) = g([e_i,e_j],e_k) - g([e_j,e_k],e_i) + g([e_k,e_i],e_j)`.
    fn koszul(&self) -> Vec<Vec<Vec<Rational>>> {
        let d = self.dim;
        let mut gamma = vec![vec![vec![Rational::zero(); d]; d]; d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let two_g =
                        self.bracket_lowered(i, j, k) - self.bracket_lowered(j, k, i) + self.bracket_lowered(k, i, j);
                    gamma[i][j][k] = two_g / (r(2, 1) * self.g[k].clone());
                }
            }
        }
        gamma
    }

    pub fn unit(&self, i: usize) -> Vector {
        (0..self.dim).map(|k| if k == i { Rational::one() } else { Rational::zero() }).collect()
    }

    pub fn gv(&self, u: &Vector, v: &Vector) -> Rational {
        (0..self.dim).fold(Rational::zero(), |a, k| a + u[k].clone() * v[k].clone() * self.g[k].clone())
    }

    pub fn phi_v(&self, v: &Vector) -> Vector {
        (0..self.dim)
            .map(|o| (0..self.dim).fold(Rational::zero(), |a, i| a + self.phi[o][i].clone() * v[i].clone()))
            .collect()
    }

    pub fn eta(&self, v: &Vector) -> Rational {
        self.gv(v, &self.unit(self.xi))
    }

    pub fn bracket(&self, u: &Vector, v: &Vector) -> Vector {
        let d = self.dim;
        let mut out = vec![Rational::zero(); d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    out[k] = out[k].clone() + u[i].clone() * v[j].clone() * self.c[i][j][k].clone();
                }
            }
        }
        out
    }

    /// `nabla_u v` for constant-component vectors.
    pub fn nabla(&self, u: &Vector, v: &Vector) -> Vector {
        let d = self.dim;
        let mut out = vec![Rational::zero(); d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    out[k] = out[k].clone() + u[i].clone() * v[j].clone() * self.gamma[i][j][k].clone();
                }
            }
        }
        out
    }

    /// `(nabla_u phi) v = nabla_u (phi v) - phi (nabla_u v)`.
    pub fn nabla_phi(&self, u: &Vector, v: &Vector) -> Vector {
        let a = self.nabla(u, &self.phi_v(v));
        let b = self.phi_v(&self.nabla(u, v));
        a.into_iter().zip(b).map(|(x, y)| x - y).collect()
    }

    /// `(nabla_u eta) v = g(nabla_u xi, v)`.
    pub fn nabla_eta(&self, u: &Vector, v: &Vector) -> Rational {
        self.gv(&self.nabla(u, &self.unit(self.xi)), v)
    }

    pub fn f(&self, i: usize, j: usize, k: usize) -> Rational {
        self.gv(&self.nabla_phi(&self.unit(i), &self.unit(j)), &self.unit(k))
    }

    pub fn f_all(&self) -> Vec<((usize, usize, usize), Rational)> {
        let d = self.dim;
        let mut out = vec![];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    out.push(((i, j, k), self.f(i, j, k)));
                }
            }
        }
        out
    }

    /// `theta(e_k) = sum_i g^{ii} F(e_i, e_i, e_k)` and `theta*(e_k)`.
    pub fn theta(&self, k: usize) -> (Rational, Rational) {
        let mut th = Rational::zero();
        let mut ths = Rational::zero();
        for i in 0..self.dim {
            let ginv = Rational::one() / self.g[i].clone();
            th += ginv.clone() * self.f(i, i, k);
            let pe = self.phi_v(&self.unit(i));
            ths += ginv * self.gv(&self.nabla_phi(&self.unit(i), &pe), &self.unit(k));
        }
        (th, ths)
    }

    /// `R(e_i,e_j)e_k` lowered on `e_l`, from second covariant derivatives.
    pub fn curvature(&self, gamma: &[Vec<Vec<Rational>>]) -> Vec<Vec<Vec<Vec<Rational>>>> {
        let d = self.dim;
        let nab = |u: &Vector, v: &Vector| -> Vector {
            let mut out = vec![Rational::zero(); d];
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        out[k] = out[k].clone() + u[i].clone() * v[j].clone() * gamma[i][j][k].clone();
                    }
                }
            }
            out
        };
        let mut out = vec![vec![vec![vec![Rational::zero(); d]; d]; d]; d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (ei, ej, ek) = (self.unit(i), self.unit(j), self.unit(k));
                    let a = nab(&ei, &nab(&ej, &ek));
                    let b = nab(&ej, &nab(&ei, &ek));
                    let c = nab(&self.bracket(&ei, &ej), &ek);
                    let v: Vector = (0..d).map(|m| a[m].clone() - b[m].clone() - c[m].clone()).collect();
                    for l in 0..d {
                        out[i][j][k][l] = self.gv(&v, &self.unit(l));
                    }
                }
            }
        }
        out
    }

    /// `N(x,y) = (nabla_{phi x} phi) y - (nabla_{phi y} phi) x - phi (nabla_x phi) y
    ///          + phi (nabla_y phi) x + (nabla_x eta)(y) xi - (nabla_y eta)(x) xi`, lowered.
    pub fn nijenhuis(&self, i: usize, j: usize, k: usize) -> Rational {
        let (x, y) = (self.unit(i), self.unit(j));
        let a = self.nabla_phi(&self.phi_v(&x), &y);
        let b = self.nabla_phi(&self.phi_v(&y), &x);
        let c = self.phi_v(&self.nabla_phi(&x, &y));
        let e = self.phi_v(&self.nabla_phi(&y, &x));
        let w = self.nabla_eta(&x, &y) - self.nabla_eta(&y, &x);
        let mut v: Vector = (0..self.dim).map(|m| a[m].clone() - b[m].clone() - c[m].clone() + e[m].clone()).collect();
        v[self.xi] = v[self.xi].clone() + w;
        self.gv(&v, &self.unit(k))
    }
}

/// Brackets `[xi, e_i] = alpha e_i + beta e_{n+i}`, `[xi, e_{n+i}] = -beta e_i + alpha e_{n+i}`.
pub fn f45_brackets(n: usize, alpha: Rational, beta: Rational) -> Vec<Vec<Vec<Rational>>> {
    let dim = 2 * n + 1;
    let xi = dim - 1;
    let mut c = vec![vec![vec![Rational::zero(); dim]; dim]; dim];
    let mut set = |i: usize, j: usize, k: usize, v: Rational| {
        c[i][j][k] = v.clone();
        c[j][i][k] = -v;
    };
    for i in 0..n {
        set(xi, i, i, alpha.clone());
        set(xi, i, n + i, beta.clone());
        set(xi, n + i, i, -beta.clone());
        set(xi, n + i, n + i, alpha.clone());
    }
    c
}

/// Nested-vector copy of the library's structure constants.
pub fn brackets_of(t: &acn_core::backend::StructureConstants<Rational>) -> Vec<Vec<Vec<Rational>>> {
    let d = t.dim();
    (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| t.tensor()[[i, j, k]].clone()).collect()).collect()).collect()
}
