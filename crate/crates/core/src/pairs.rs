//! Antisymmetric vector fields on atom pairs and the projection machinery
//! used to build optimality witnesses.
//!
//! A field `q` on `n` atoms is stored once per unordered pair `i < j`, in
//! lexicographic order; `q(j, i) = -q(i, j)` is implied and `q(i, i) = 0`.
//!
//! The linear map of interest sends a field to its weighted row sums,
//! `(A q)_i = sum_j a_j q(i, j)`. Its Gram matrix is `S I - a a^T` with
//! `S = sum_j a_j^2`, so projecting onto `{A q = b}` costs two passes over
//! the pairs.

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::scalar::Scalar;

/// Number of unordered pairs on `n` atoms.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)`, `i < j`, in lexicographic order.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Iterator over `(i, j)` with `i < j`, in storage order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Antisymmetric field of `dim`-vectors on pairs of `n` atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct PairField<T> {
    n: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> PairField<T> {
    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            n,
            dim,
            data: vec![T::zero(); pair_count(n) * dim],
        }
    }

    pub(crate) fn from_data(n: usize, dim: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), pair_count(n) * dim);
        Self { n, dim, data }
    }

    /// Builds the field from `f(i, j)` evaluated for `i < j`.
    pub fn from_fn(n: usize, dim: usize, mut f: impl FnMut(usize, usize) -> Vec<T>) -> Self {
        let mut data = Vec::with_capacity(pair_count(n) * dim);
        for (i, j) in pairs(n) {
            let v = f(i, j);
            assert_eq!(v.len(), dim, "pair value has wrong dimension");
            data.extend(v);
        }
        Self { n, dim, data }
    }

    pub fn atoms(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Stored value for `i < j`.
    pub fn upper(&self, i: usize, j: usize) -> &[T] {
        let p = pair_index(self.n, i, j);
        &self.data[p * self.dim..(p + 1) * self.dim]
    }

    pub(crate) fn upper_mut(&mut self, i: usize, j: usize) -> &mut [T] {
        let p = pair_index(self.n, i, j);
        &mut self.data[p * self.dim..(p + 1) * self.dim]
    }

    /// `q(i, j)` for any ordered pair, using antisymmetry.
    pub fn get(&self, i: usize, j: usize) -> Vec<T> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper(i, j).to_vec(),
            std::cmp::Ordering::Greater => self.upper(j, i).iter().map(|&v| -v).collect(),
            std::cmp::Ordering::Equal => vec![T::zero(); self.dim],
        }
    }

    /// `sup_{i<j} |q(i, j)|`.
    pub fn max_norm(&self) -> T {
        max_pair_norm(&self.data, self.dim)
    }
}

impl<T: Scalar> Serialize for PairField<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PairField", 4)?;
        st.serialize_field("atoms", &self.n)?;
        st.serialize_field("dim", &self.dim)?;
        let idx: Vec<[usize; 2]> = pairs(self.n).map(|(i, j)| [i, j]).collect();
        st.serialize_field("pairs", &idx)?;
        let vals: Vec<&[T]> = self.data.chunks_exact(self.dim.max(1)).collect();
        st.serialize_field("values", &vals)?;
        st.end()
    }
}

pub(crate) fn max_pair_norm<T: Scalar>(data: &[T], dim: usize) -> T {
    data.chunks_exact(dim)
        .map(|c| c.iter().fold(T::zero(), |s, &v| s + v * v))
        .fold(T::zero(), T::max)
        .sqrt()
}

/// Projects every pair vector onto the closed ball of radius `t`.
pub(crate) fn clip_pairs<T: Scalar>(data: &mut [T], dim: usize, t: T) {
    let t2 = t * t;
    for c in data.chunks_exact_mut(dim) {
        let n2 = c.iter().fold(T::zero(), |s, &v| s + v * v);
        if n2 > t2 {
            let f = t / n2.sqrt();
            c.iter_mut().for_each(|v| *v = *v * f);
        }
    }
}

/// The weighted row-sum operator on pair fields over `n` atoms.
pub(crate) struct RowSumOperator<T> {
    a: Vec<T>,
    dim: usize,
    gram_diag: T,
}

impl<T: Scalar> RowSumOperator<T> {
    pub fn new(a: Vec<T>, dim: usize) -> Self {
        let gram_diag = a.iter().map(|&w| w * w).sum();
        Self { a, dim, gram_diag }
    }

    pub fn pair_len(&self) -> usize {
        pair_count(self.a.len()) * self.dim
    }

    /// `out_i = sum_j a_j q(i, j)`.
    pub fn forward(&self, q: &[T], out: &mut [T]) {
        let (n, d) = (self.a.len(), self.dim);
        out.iter_mut().for_each(|v| *v = T::zero());
        let mut p = 0;
        for i in 0..n {
            let ai = self.a[i];
            for j in i + 1..n {
                let aj = self.a[j];
                let qp = &q[p * d..(p + 1) * d];
                for k in 0..d {
                    out[i * d + k] = out[i * d + k] + aj * qp[k];
                    out[j * d + k] = out[j * d + k] - ai * qp[k];
                }
                p += 1;
            }
        }
    }

    /// `out(i, j) = a_j y_i - a_i y_j`.
    pub fn adjoint(&self, y: &[T], out: &mut [T]) {
        let (n, d) = (self.a.len(), self.dim);
        let mut p = 0;
        for i in 0..n {
            let ai = self.a[i];
            for j in i + 1..n {
                let aj = self.a[j];
                for k in 0..d {
                    out[p * d + k] = aj * y[i * d + k] - ai * y[j * d + k];
                }
                p += 1;
            }
        }
    }

    /// Applies the pseudo-inverse of `S I - a a^T` in place.
    pub fn gram_pinv(&self, r: &mut [T]) {
        let (n, d) = (self.a.len(), self.dim);
        let s = self.gram_diag;
        if s <= T::zero() {
            return;
        }
        for k in 0..d {
            let ar = (0..n).fold(T::zero(), |acc, i| acc + self.a[i] * r[i * d + k]);
            for i in 0..n {
                r[i * d + k] = (r[i * d + k] - self.a[i] * ar / s) / s;
            }
        }
    }
}

/// Scratch buffers for repeated affine projections.
pub(crate) struct AffineProjector<'a, T> {
    op: &'a RowSumOperator<T>,
    b: &'a [T],
    row: Vec<T>,
    gap: Vec<T>,
}

/// Diagnostics of one affine projection `z = P(w)`.
pub(crate) struct Projection<T> {
    /// `max_i |(A w - b)_i|` before projecting.
    pub residual: T,
    /// A lower bound on `min {||q||_inf : A q = b}` read off the gap `w - z`.
    pub dual_bound: T,
}

impl<'a, T: Scalar> AffineProjector<'a, T> {
    pub fn new(op: &'a RowSumOperator<T>, b: &'a [T]) -> Self {
        Self {
            op,
            b,
            row: vec![T::zero(); b.len()],
            gap: vec![T::zero(); op.pair_len()],
        }
    }

    /// Writes the projection of `w` onto `{A q = b}` (least squares when the
    /// system is inconsistent) into `z`.
    pub fn project(&mut self, w: &[T], z: &mut [T]) -> Projection<T> {
        let d = self.op.dim;
        self.op.forward(w, &mut self.row);
        let mut residual = T::zero();
        for (i, (r, &bi)) in self.row.iter_mut().zip(self.b).enumerate() {
            *r = *r - bi;
            let _ = i;
        }
        for c in self.row.chunks_exact(d) {
            residual = residual.max(c.iter().fold(T::zero(), |s, &v| s + v * v).sqrt());
        }
        // y = pinv(AA^T)(A w - b), z = w - A^T y
        self.op.gram_pinv(&mut self.row);
        self.op.adjoint(&self.row, &mut self.gap);
        let mut l1 = T::zero();
        for ((zi, &wi), &gi) in z.iter_mut().zip(w).zip(&self.gap) {
            *zi = wi - gi;
        }
        for c in self.gap.chunks_exact(d) {
            l1 = l1 + c.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
        }
        // any feasible q has |b.y| = |q . A^T y| <= ||q||_inf * sum_p |(A^T y)_p|
        let by = self
            .row
            .iter()
            .zip(self.b)
            .fold(T::zero(), |s, (&y, &b)| s + y * b)
            .abs();
        let dual_bound = if l1 > T::zero() { by / l1 } else { T::zero() };
        Projection {
            residual,
            dual_bound,
        }
    }
}

/// Result of the min-max-norm search.
pub(crate) struct MinMaxOutcome<T> {
    pub upper: T,
    pub lower: T,
    pub q: Vec<T>,
    pub iterations: usize,
}

/// Minimises `max_p |q_p|` over `{A q = b}` by alternating projections
/// between the affine set and the product of radius-`t` balls, bisecting on
/// `t`. Every affine iterate is feasible and bounds the optimum from above;
/// every projection gap yields a dual bound from below, so the returned
/// bracket is certified.
pub(crate) fn min_max_pair_norm<T: Scalar>(
    op: &RowSumOperator<T>,
    b: &[T],
    start: Vec<T>,
    lower: T,
    abs_tol: T,
    max_iter: usize,
) -> MinMaxOutcome<T> {
    let d = op.dim;
    let len = op.pair_len();
    let mut proj = AffineProjector::new(op, b);
    let mut w = start;
    let mut z = vec![T::zero(); len];
    proj.project(&w, &mut z);
    let mut best = z.clone();
    let mut upper = max_pair_norm(&best, d);

    // minimum-norm solution as a second starting candidate
    let zero = vec![T::zero(); len];
    let mut z0 = vec![T::zero(); len];
    proj.project(&zero, &mut z0);
    let u0 = max_pair_norm(&z0, d);
    if u0 < upper {
        upper = u0;
        best.copy_from_slice(&z0);
    }
    w.copy_from_slice(&best);

    let mut lower = lower.min(upper);
    let mut iterations = 0;
    let half = T::c(0.5);
    let shrink = T::c(0.75);
    while upper - lower > abs_tol && iterations < max_iter {
        let width = upper - lower;
        let t = lower + half * width;
        loop {
            clip_pairs(&mut w, d, t);
            let info = proj.project(&w, &mut z);
            iterations += 1;
            let uz = max_pair_norm(&z, d);
            if uz < upper {
                upper = uz;
                best.copy_from_slice(&z);
            }
            if info.dual_bound > lower {
                lower = info.dual_bound.min(upper);
            }
            std::mem::swap(&mut w, &mut z);
            if upper - lower <= shrink * width || iterations >= max_iter {
                break;
            }
        }
    }
    MinMaxOutcome {
        upper,
        lower,
        q: best,
        iterations,
    }
}

/// Outcome of a fixed-radius feasibility search.
pub(crate) struct FeasibilityOutcome<T> {
    /// Iterate inside the balls.
    pub ball_point: Vec<T>,
    /// Its row-sum residual `max_i |(A w - b)_i|`.
    pub ball_residual: T,
    /// Affine projection of the last ball iterate.
    pub affine_point: Vec<T>,
}

/// Searches for `q` with `|q_p| <= radius` and `A q = b` by alternating
/// projections, stopping once the ball iterate has residual `<= tol`.
pub(crate) fn feasible_pair_field<T: Scalar>(
    op: &RowSumOperator<T>,
    b: &[T],
    radius: T,
    tol: T,
    max_iter: usize,
) -> FeasibilityOutcome<T> {
    let d = op.dim;
    let len = op.pair_len();
    let mut proj = AffineProjector::new(op, b);
    let mut w = vec![T::zero(); len];
    let mut z = vec![T::zero(); len];
    proj.project(&w, &mut z);
    let mut residual = T::infinity();
    for _ in 0..max_iter {
        w.copy_from_slice(&z);
        clip_pairs(&mut w, d, radius);
        let info = proj.project(&w, &mut z);
        residual = info.residual;
        if residual <= tol {
            break;
        }
    }
    FeasibilityOutcome {
        ball_point: w,
        ball_residual: residual,
        affine_point: z,
    }
}
