//! Dense frame-indexed multilinear algebra.
//!
//! All tensors live over a fixed frame `{e_0, .., e_{2n-1}, xi}` of odd
//! dimension `2n + 1`; `xi` is always the last basis vector. Components are
//! stored row-major by slot order. Variance is not tracked by the type: a
//! slot is covariant unless the caller has raised it, and contractions pair
//! slots exactly as requested.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_dim(dim: usize) -> Result<()> {
    if dim >= 3 && dim % 2 == 1 {
        Ok(())
    } else {
        Err(Error::BadDimension(dim))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameTensor<S> {
    dim: usize,
    order: usize,
    data: Vec<S>,
}

impl<S: Scalar> FrameTensor<S> {
    pub fn new(dim: usize, order: usize, data: Vec<S>) -> Result<Self> {
        check_dim(dim)?;
        let len = dim.pow(order as u32);
        if data.len() != len {
            return Err(Error::Shape(format!(
                "order-{order} tensor over dim {dim} needs {len} components, got {}",
                data.len()
            )));
        }
        Ok(FrameTensor { dim, order, data })
    }

    /// # Panics
    /// If `dim` is not odd and at least 3.
    pub fn zeros(dim: usize, order: usize) -> Self {
        check_dim(dim).expect("frame dimension");
        FrameTensor { dim, order, data: vec![S::zero(); dim.pow(order as u32)] }
    }

    /// Builds a tensor from a function of the multi-index.
    pub fn from_fn(dim: usize, order: usize, mut f: impl FnMut(&[usize]) -> S) -> Self {
        check_dim(dim).expect("frame dimension");
        let len = dim.pow(order as u32);
        let mut idx = vec![0; order];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            decode(flat, dim, &mut idx);
            data.push(f(&idx));
        }
        FrameTensor { dim, order, data }
    }

    /// Fallible variant of [`FrameTensor::from_fn`].
    pub fn try_from_fn(dim: usize, order: usize, mut f: impl FnMut(&[usize]) -> Result<S>) -> Result<Self> {
        check_dim(dim)?;
        let len = dim.pow(order as u32);
        let mut idx = vec![0; order];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            decode(flat, dim, &mut idx);
            data.push(f(&idx)?);
        }
        Ok(FrameTensor { dim, order, data })
    }

    pub fn scalar(dim: usize, value: S) -> Self {
        check_dim(dim).expect("frame dimension");
        FrameTensor { dim, order: 0, data: vec![value] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn components(&self) -> &[S] {
        &self.data
    }

    pub fn into_components(self) -> Vec<S> {
        self.data
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.data[self.flat(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut S {
        let f = self.flat(idx);
        &mut self.data[f]
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order, "index arity");
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// Calls `f` with every multi-index and its component.
    pub fn for_each(&self, mut f: impl FnMut(&[usize], &S)) {
        let mut idx = vec![0; self.order];
        for (flat, v) in self.data.iter().enumerate() {
            decode(flat, self.dim, &mut idx);
            f(&idx, v);
        }
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        FrameTensor { dim: self.dim, order: self.order, data: self.data.iter().map(f).collect() }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        self.same_shape(other)?;
        Ok(FrameTensor {
            dim: self.dim,
            order: self.order,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.order != other.order {
            return Err(Error::Shape(format!("order {} vs order {}", self.order, other.order)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    /// `self += c * other`, skipping the work when `c` is zero.
    pub fn add_scaled(&mut self, c: &S, other: &Self) -> Result<()> {
        self.same_shape(other)?;
        if c.is_zero() {
            return Ok(());
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a = a.clone() + c.clone() * b.clone();
            }
        }
        Ok(())
    }

    /// Reorders slots: result slot `s` is input slot `perm[s]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.order {
            return Err(Error::Shape(format!("permutation of length {} for order {}", perm.len(), self.order)));
        }
        let mut seen = vec![false; self.order];
        for &p in perm {
            if p >= self.order || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Shape(format!("{perm:?} is not a permutation")));
            }
        }
        let mut src = vec![0; self.order];
        Ok(FrameTensor::from_fn(self.dim, self.order, |idx| {
            for (s, &p) in perm.iter().enumerate() {
                src[p] = idx[s];
            }
            self.get(&src).clone()
        }))
    }

    /// Sums `self[.., m, ..] * other[.., m, ..]` over the paired slots. The
    /// free slots of `self` come first, then those of `other`.
    pub fn contract(&self, other: &Self, slot_a: usize, slot_b: usize) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if slot_a >= self.order {
            return Err(Error::SlotOutOfRange { slot: slot_a, order: self.order });
        }
        if slot_b >= other.order {
            return Err(Error::SlotOutOfRange { slot: slot_b, order: other.order });
        }
        let ka = self.order;
        let kb = other.order;
        let mut ia = vec![0; ka];
        let mut ib = vec![0; kb];
        Ok(FrameTensor::from_fn(self.dim, ka + kb - 2, |idx| {
            let (free_a, free_b) = idx.split_at(ka - 1);
            fill_skipping(&mut ia, free_a, slot_a);
            fill_skipping(&mut ib, free_b, slot_b);
            let mut acc = S::zero();
            for m in 0..self.dim {
                ia[slot_a] = m;
                ib[slot_b] = m;
                let a = self.get(&ia);
                if a.is_zero() {
                    continue;
                }
                let b = other.get(&ib);
                if !b.is_zero() {
                    acc = acc + a.clone() * b.clone();
                }
            }
            acc
        }))
    }

    /// Sums the diagonal of two slots of the same tensor.
    pub fn trace(&self, s1: usize, s2: usize) -> Result<Self> {
        for s in [s1, s2] {
            if s >= self.order {
                return Err(Error::SlotOutOfRange { slot: s, order: self.order });
            }
        }
        if s1 == s2 {
            return Err(Error::Shape("trace needs two distinct slots".into()));
        }
        let mut full = vec![0; self.order];
        Ok(FrameTensor::from_fn(self.dim, self.order - 2, |idx| {
            let mut it = idx.iter();
            for (s, slot) in full.iter_mut().enumerate() {
                if s != s1 && s != s2 {
                    *slot = *it.next().unwrap();
                }
            }
            let mut acc = S::zero();
            for m in 0..self.dim {
                full[s1] = m;
                full[s2] = m;
                acc = acc + self.get(&full).clone();
            }
            acc
        }))
    }

    /// Applies a matrix to one slot: `result[.., i, ..] = sum_j m[i][j] * self[.., j, ..]`.
    /// With `m = g` this lowers a raised slot; with `m = g^-1` it raises one.
    pub fn transform_slot(&self, m: &FrameTensor<S>, slot: usize) -> Result<Self> {
        if m.order != 2 {
            return Err(Error::Shape("slot transform needs an order-2 matrix".into()));
        }
        if slot >= self.order {
            return Err(Error::SlotOutOfRange { slot, order: self.order });
        }
        if m.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: m.dim });
        }
        let mut src = vec![0; self.order];
        Ok(FrameTensor::from_fn(self.dim, self.order, |idx| {
            src.copy_from_slice(idx);
            let mut acc = S::zero();
            for j in 0..self.dim {
                let mij = m.get(&[idx[slot], j]);
                if mij.is_zero() {
                    continue;
                }
                src[slot] = j;
                acc = acc + mij.clone() * self.get(&src).clone();
            }
            acc
        }))
    }

    pub fn lower(&self, g: &FrameTensor<S>, slot: usize) -> Result<Self> {
        self.transform_slot(g, slot)
    }

    pub fn raise(&self, g_inv: &FrameTensor<S>, slot: usize) -> Result<Self> {
        self.transform_slot(g_inv, slot)
    }

    /// `t(.., a, .., b, ..) + t(.., b, .., a, ..)` without the 1/2.
    pub fn symmetrized(&self, s1: usize, s2: usize) -> Result<Self> {
        self.add(&self.swapped(s1, s2)?)
    }

    /// `t(.., a, .., b, ..) - t(.., b, .., a, ..)`.
    pub fn antisymmetrized(&self, s1: usize, s2: usize) -> Result<Self> {
        self.sub(&self.swapped(s1, s2)?)
    }

    pub fn swapped(&self, s1: usize, s2: usize) -> Result<Self> {
        let mut perm: Vec<usize> = (0..self.order).collect();
        if s1 >= self.order || s2 >= self.order {
            return Err(Error::SlotOutOfRange { slot: s1.max(s2), order: self.order });
        }
        perm.swap(s1, s2);
        self.permute(&perm)
    }

    /// Order-2 matrix identity (Kronecker delta).
    pub fn identity(dim: usize) -> Self {
        FrameTensor::from_fn(dim, 2, |i| if i[0] == i[1] { S::one() } else { S::zero() })
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("matrix rows must be square".into()));
        }
        FrameTensor::new(dim, 2, rows.iter().flatten().cloned().collect())
    }

    /// Unit frame vector `e_i` (order 1).
    pub fn basis(dim: usize, i: usize) -> Self {
        FrameTensor::from_fn(dim, 1, |k| if k[0] == i { S::one() } else { S::zero() })
    }
}

impl<S: Scalar, const N: usize> Index<[usize; N]> for FrameTensor<S> {
    type Output = S;

    fn index(&self, idx: [usize; N]) -> &S {
        self.get(&idx)
    }
}

impl<S: Scalar, const N: usize> IndexMut<[usize; N]> for FrameTensor<S> {
    fn index_mut(&mut self, idx: [usize; N]) -> &mut S {
        self.get_mut(&idx)
    }
}

fn decode(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

fn fill_skipping(full: &mut [usize], free: &[usize], skip: usize) {
    let mut it = free.iter();
    for (s, slot) in full.iter_mut().enumerate() {
        if s != skip {
            *slot = *it.next().unwrap();
        }
    }
}

/// A (1,1) tensor. Components are indexed `[output, input]`, so
/// `phi e_j = sum_i phi[[i, j]] e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameEndo<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> FrameEndo<S> {
    pub fn new(dim: usize, data: Vec<S>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::Shape(format!("endomorphism over dim {dim} needs {} entries", dim * dim)));
        }
        Ok(FrameEndo { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        check_dim(dim).expect("frame dimension");
        let mut data = Vec::with_capacity(dim * dim);
        for out in 0..dim {
            for inp in 0..dim {
                data.push(f(out, inp));
            }
        }
        FrameEndo { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |a, b| if a == b { S::one() } else { S::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[S] {
        &self.data
    }

    /// Column `j`: the frame components of `phi e_j`.
    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.dim).map(|i| self[[i, j]].clone()).collect()
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(S::zero(), |acc, j| {
                    if v[j].is_zero() {
                        acc
                    } else {
                        acc + self[[i, j]].clone() * v[j].clone()
                    }
                })
            })
            .collect()
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::from_fn(self.dim, |i, k| {
            (0..self.dim).fold(S::zero(), |acc, j| acc + self[[i, j]].clone() * other[[j, k]].clone())
        })
    }

    /// The (0,2) form `(x, y) -> g(phi x, y)`.
    pub fn lower(&self, g: &FrameTensor<S>) -> Result<FrameTensor<S>> {
        if g.order() != 2 || g.dim() != self.dim {
            return Err(Error::Shape("lowering needs a metric of matching dimension".into()));
        }
        Ok(FrameTensor::from_fn(self.dim, 2, |i| {
            (0..self.dim).fold(S::zero(), |acc, k| acc + self[[k, i[0]]].clone() * g[[k, i[1]]].clone())
        }))
    }

    /// Inverse of [`FrameEndo::lower`]: recovers `phi` from `(x, y) -> g(phi x, y)`.
    pub fn raise(form: &FrameTensor<S>, g_inv: &FrameTensor<S>) -> Result<Self> {
        if form.order() != 2 || g_inv.order() != 2 || form.dim() != g_inv.dim() {
            return Err(Error::Shape("raising needs two order-2 tensors of matching dimension".into()));
        }
        let dim = form.dim();
        Ok(Self::from_fn(dim, |out, inp| {
            (0..dim).fold(S::zero(), |acc, k| acc + g_inv[[out, k]].clone() * form[[inp, k]].clone())
        }))
    }

    /// As an order-2 tensor with the same `[output, input]` layout.
    pub fn as_tensor(&self) -> FrameTensor<S> {
        FrameTensor { dim: self.dim, order: 2, data: self.data.clone() }
    }
}

impl<S: Scalar> Index<[usize; 2]> for FrameEndo<S> {
    type Output = S;

    fn index(&self, [out, inp]: [usize; 2]) -> &S {
        &self.data[out * self.dim + inp]
    }
}

/// Inverts a symmetric nondegenerate metric by Gauss-Jordan elimination.
/// Exact on the rational backend; pivots on the largest entry for floats.
pub fn invert_metric<S: Scalar>(g: &FrameTensor<S>) -> Result<FrameTensor<S>> {
    if g.order() != 2 {
        return Err(Error::Shape("metric must have order 2".into()));
    }
    let n = g.dim();
    let mut a: Vec<Vec<S>> = (0..n).map(|i| (0..n).map(|j| g[[i, j]].clone()).collect()).collect();
    let mut inv: Vec<Vec<S>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect();

    let scale = g.components().iter().map(|v| v.magnitude()).fold(0.0, f64::max);
    let singular_below = if S::EXACT { 0.0 } else { scale * 1e-13 };

    for col in 0..n {
        let pivot = if S::EXACT {
            (col..n).find(|&r| !a[r][col].is_zero())
        } else {
            (col..n).max_by(|&r, &s| a[r][col].magnitude().total_cmp(&a[s][col].magnitude()))
        };
        let p = match pivot {
            Some(p) if !a[p][col].is_zero() && a[p][col].magnitude() > singular_below => p,
            _ => return Err(Error::DegenerateMetric),
        };
        a.swap(col, p);
        inv.swap(col, p);
        let d = a[col][col].clone();
        for j in 0..n {
            a[col][j] = a[col][j].clone() / d.clone();
            inv[col][j] = inv[col][j].clone() / d.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let (ar, ac) = (a[r][j].clone(), a[col][j].clone());
                a[r][j] = ar - f.clone() * ac;
                let (ir, ic) = (inv[r][j].clone(), inv[col][j].clone());
                inv[r][j] = ir - f.clone() * ic;
            }
        }
    }
    FrameTensor::from_rows(&inv)
}

pub fn is_symmetric<S: Scalar>(m: &FrameTensor<S>) -> bool {
    let n = m.dim();
    (0..n).all(|i| (0..i).all(|j| m[[i, j]] == m[[j, i]]))
}

/// Counts (positive, negative) entries in a congruence diagonalization of a
/// symmetric matrix: Sylvester's law of inertia without eigenvalues.
pub fn signature<S: Scalar>(m: &FrameTensor<S>) -> Result<(usize, usize)> {
    let n = m.dim();
    let mut a: Vec<Vec<S>> = (0..n).map(|i| (0..n).map(|j| m[[i, j]].clone()).collect()).collect();
    let tol = if S::EXACT { 0.0 } else { 1e-12 * m.components().iter().map(|v| v.magnitude()).fold(0.0, f64::max) };
    let is_zero = |v: &S| v.is_zero() || v.magnitude() <= tol;
    let (mut pos, mut neg) = (0, 0);

    for k in 0..n {
        if is_zero(&a[k][k]) {
            // Bring a nonzero diagonal entry to position k, or manufacture one
            // by adding a row/column with a nonzero off-diagonal coupling.
            if let Some(r) = (k + 1..n).find(|&r| !is_zero(&a[r][r])) {
                a.swap(k, r);
                for row in a.iter_mut() {
                    row.swap(k, r);
                }
            } else if let Some(r) = (k + 1..n).find(|&r| !is_zero(&a[k][r])) {
                for j in 0..n {
                    let v = a[r][j].clone();
                    a[k][j] = a[k][j].clone() + v;
                }
                for row in a.iter_mut() {
                    let v = row[r].clone();
                    row[k] = row[k].clone() + v;
                }
            } else {
                return Err(Error::DegenerateMetric);
            }
        }
        let d = a[k][k].clone();
        if is_zero(&d) {
            return Err(Error::DegenerateMetric);
        }
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].clone() / d.clone();
            for j in k..n {
                let v = a[k][j].clone();
                a[r][j] = a[r][j].clone() - f.clone() * v;
            }
        }
        for r in k + 1..n {
            a[k][r] = S::zero();
            a[r][k] = S::zero();
        }
    }
    Ok((pos, neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn diag(v: &[i64]) -> FrameTensor<Rational> {
        FrameTensor::from_fn(v.len(), 2, |i| if i[0] == i[1] { q(v[i[0]], 1) } else { q(0, 1) })
    }

    #[test]
    fn rejects_even_or_small_frames() {
        assert_eq!(FrameTensor::<f64>::new(2, 1, vec![0.0; 2]), Err(Error::BadDimension(2)));
        assert!(FrameTensor::<f64>::new(3, 2, vec![0.0; 8]).is_err());
    }

    #[test]
    fn identity_trace_is_dimension() {
        let id = FrameTensor::<Rational>::identity(3);
        let t = id.contract(&id, 1, 0).unwrap().trace(0, 1).unwrap();
        assert_eq!(t.components(), &[q(3, 1)]);
    }

    #[test]
    fn inverse_metric_contracts_to_delta() {
        let g = diag(&[1, -1, 1]);
        let gi = invert_metric(&g).unwrap();
        assert_eq!(gi, g);
        assert_eq!(gi.contract(&g, 1, 0).unwrap(), FrameTensor::identity(3));
        let g2 = diag(&[1, 1, -1, -1, 1]);
        assert_eq!(invert_metric(&g2).unwrap(), g2);
    }

    #[test]
    fn inverse_of_rational_symmetric_matrix() {
        let g = FrameTensor::from_rows(&[
            vec![q(2, 3), q(1, 2), q(0, 1)],
            vec![q(1, 2), q(-1, 5), q(3, 7)],
            vec![q(0, 1), q(3, 7), q(1, 1)],
        ])
        .unwrap();
        let gi = invert_metric(&g).unwrap();
        assert_eq!(g.contract(&gi, 1, 0).unwrap(), FrameTensor::identity(3));
        assert_eq!(invert_metric(&gi).unwrap(), g);
    }

    #[test]
    fn singular_metric_is_reported() {
        let g = diag(&[1, 0, 1]);
        assert_eq!(invert_metric(&g), Err(Error::DegenerateMetric));
        assert_eq!(signature(&g), Err(Error::DegenerateMetric));
    }

    #[test]
    fn contract_errors() {
        let a = FrameTensor::<f64>::zeros(3, 2);
        let b = FrameTensor::<f64>::zeros(5, 2);
        assert!(matches!(a.contract(&b, 0, 0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(a.contract(&a, 2, 0), Err(Error::SlotOutOfRange { slot: 2, .. })));
    }

    #[test]
    fn signature_by_congruence() {
        assert_eq!(signature(&diag(&[1, -1, 1])).unwrap(), (2, 1));
        // Hyperbolic plane plus a positive direction: zero diagonal needs the
        // off-diagonal fallback.
        let h = FrameTensor::from_rows(&[
            vec![q(0, 1), q(1, 1), q(0, 1)],
            vec![q(1, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1)],
        ])
        .unwrap();
        assert_eq!(signature(&h).unwrap(), (2, 1));
    }

    #[test]
    fn permute_and_swap() {
        let t = FrameTensor::<Rational>::from_fn(3, 3, |i| q((i[0] * 9 + i[1] * 3 + i[2]) as i64, 1));
        let p = t.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p[[0, 1, 2]], t[[1, 2, 0]]);
        assert_eq!(t.swapped(0, 2).unwrap()[[0, 1, 2]], t[[2, 1, 0]]);
        assert!(t.permute(&[0, 0, 1]).is_err());
    }

    #[test]
    fn endo_lower_raise_roundtrip() {
        let g = diag(&[1, -1, 1]);
        let phi = FrameEndo::from_fn(3, |o, i| match (o, i) {
            (1, 0) => q(1, 1),
            (0, 1) => q(-1, 1),
            _ => q(0, 1),
        });
        let low = phi.lower(&g).unwrap();
        assert!(is_symmetric(&low));
        let back = FrameEndo::raise(&low, &invert_metric(&g).unwrap()).unwrap();
        assert_eq!(back, phi);
    }
}
