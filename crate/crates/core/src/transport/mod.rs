//! Optimal transport between discrete measures of equal mass.
//!
//! Couplings follow the mass-scaled convention: both marginals are
//! multiplied by the common total mass, so for probability measures the
//! values are the usual `W₁` and `W∞`.

mod simplex;
mod stability;

use serde::{Serialize, Serializer};

pub use stability::{
    check_minimizer_stability, check_shattering_stability, check_value_stability, MinimizerStabilityReport,
    ShatteringStabilityReport, ValueStabilityReport,
};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::scalar::{vec, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    One,
    Infinity,
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::One => s.serialize_u8(1),
            Order::Infinity => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct TransportPlan<T> {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub coupling: Vec<T>,
    pub cost: T,
    pub p: Order,
}

impl<T: Scalar> TransportPlan<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.coupling[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.coupling.chunks_exact(self.cols).map(|r| r.iter().copied().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for r in self.coupling.chunks_exact(self.cols) {
            for (o, &v) in out.iter_mut().zip(r) {
                *o = *o + v;
            }
        }
        out
    }

    /// Nonzero entries as `(row, col, mass)`.
    pub fn support(&self) -> Vec<(usize, usize, T)> {
        self.coupling
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > T::zero())
            .map(|(q, &v)| (q / self.cols, q % self.cols, v))
            .collect()
    }
}

fn check_pair<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch(mu.dim(), nu.dim()));
    }
    let (a, b) = (mu.total_mass(), nu.total_mass());
    if (a - b).abs() > T::c(1e-9) * a.max(b) {
        return Err(Error::MassMismatch(a.f64(), b.f64()));
    }
    Ok(())
}

fn cost_matrix<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Vec<T> {
    let mut c = Vec::with_capacity(mu.len() * nu.len());
    for x in mu.points() {
        c.extend(nu.points().map(|y| vec::dist(x, y)));
    }
    c
}

/// Exact `W₁(μ, ν)` and an optimal coupling, by the transportation simplex.
pub fn w1<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<(T, TransportPlan<T>)> {
    check_pair(mu, nu)?;
    let mass = mu.total_mass();
    let supply: Vec<T> = mu.weights().iter().map(|&a| mass * a).collect();
    // rescale the demand so both sides balance exactly
    let total: T = supply.iter().copied().sum();
    let nu_mass: T = nu.weights().iter().copied().sum();
    let demand: Vec<T> = nu.weights().iter().map(|&b| b * total / nu_mass).collect();
    let cost = cost_matrix(mu, nu);
    let flow = simplex::solve(&supply, &demand, &cost)?;
    let value = flow.iter().zip(&cost).map(|(&f, &c)| f * c).sum();
    Ok((
        value,
        TransportPlan {
            rows: mu.len(),
            cols: nu.len(),
            coupling: flow,
            cost: value,
            p: Order::One,
        },
    ))
}

/// True when both measures have the same number of atoms, all of one weight.
pub fn equal_weight_supports<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> bool {
    if mu.len() != nu.len() {
        return false;
    }
    let w0 = mu.weight(0);
    let tol = T::c(1e-12) * w0;
    mu.weights().iter().chain(nu.weights()).all(|&w| (w - w0).abs() <= tol)
}

/// Exact `W∞(μ, ν)` for equal-size, equal-weight supports: the bottleneck
/// perfect matching, found by bisection over the candidate edge lengths.
pub fn w_infty<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<(T, TransportPlan<T>)> {
    check_pair(mu, nu)?;
    if !equal_weight_supports(mu, nu) {
        return Err(Error::UnsupportedShape(
            "W∞ is implemented for equal-size, equal-weight supports only".into(),
        ));
    }
    let n = mu.len();
    let cost = cost_matrix(mu, nu);
    let mut cand = cost.clone();
    cand.sort_by(|a, b| a.partial_cmp(b).expect("finite costs"));
    cand.dedup();
    let (mut lo, mut hi) = (0, cand.len() - 1);
    let mut best = matching_below(n, &cost, cand[hi]).expect("complete graph has a perfect matching");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match matching_below(n, &cost, cand[mid]) {
            Some(m) => {
                best = m;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    let value = cand[lo];
    let atom = mu.total_mass() * mu.weight(0);
    let mut coupling = vec![T::zero(); n * n];
    for (i, &j) in best.iter().enumerate() {
        coupling[i * n + j] = atom;
    }
    Ok((
        value,
        TransportPlan {
            rows: n,
            cols: n,
            coupling,
            cost: value,
            p: Order::Infinity,
        },
    ))
}

/// Hopcroft–Karp on the edges with `cost ≤ thr`; `Some(match of each row)`
/// when a perfect matching exists.
fn matching_below<T: Scalar>(n: usize, cost: &[T], thr: T) -> Option<Vec<usize>> {
    const NONE: usize = usize::MAX;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| cost[i * n + j] <= thr).collect())
        .collect();
    let mut match_row = vec![NONE; n];
    let mut match_col = vec![NONE; n];
    let mut dist = vec![0usize; n];
    let mut matched = 0;

    loop {
        // layered BFS from free rows
        let mut queue = std::collections::VecDeque::new();
        for i in 0..n {
            if match_row[i] == NONE {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = NONE;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                let k = match_col[j];
                if k == NONE {
                    found = true;
                } else if dist[k] == NONE {
                    dist[k] = dist[i] + 1;
                    queue.push_back(k);
                }
            }
        }
        if !found {
            break;
        }
        fn augment(
            i: usize,
            adj: &[Vec<usize>],
            match_row: &mut [usize],
            match_col: &mut [usize],
            dist: &mut [usize],
        ) -> bool {
            for &j in &adj[i] {
                let k = match_col[j];
                if k == usize::MAX || (dist[k] == dist[i] + 1 && augment(k, adj, match_row, match_col, dist)) {
                    match_row[i] = j;
                    match_col[j] = i;
                    return true;
                }
            }
            dist[i] = usize::MAX;
            false
        }
        for i in 0..n {
            if match_row[i] == NONE && augment(i, &adj, &mut match_row, &mut match_col, &mut dist) {
                matched += 1;
            }
        }
    }
    (matched == n).then_some(match_row)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, pts: Vec<Vec<f64>>) -> DiscreteMeasure<f64> {
        DiscreteMeasure::unit_weights(d, pts).unwrap()
    }

    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for k in 0..n {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn identical_and_dirac() {
        let m = unit(2, vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![-1.0, 0.5]]);
        assert_eq!(w1(&m, &m).unwrap().0, 0.0);
        assert_eq!(w_infty(&m, &m).unwrap().0, 0.0);
        let a = unit(2, vec![vec![0.0, 0.0]]);
        let b = unit(2, vec![vec![3.0, 4.0]]);
        assert_eq!(w1(&a, &b).unwrap().0, 5.0);
        assert_eq!(w_infty(&a, &b).unwrap().0, 5.0);
    }

    #[test]
    fn matches_permutation_oracle() {
        let a = unit(1, vec![vec![0.0], vec![1.0], vec![5.0]]);
        let b = unit(1, vec![vec![0.5], vec![4.0], vec![4.5]]);
        let cost = |p: &[usize]| -> (f64, f64) {
            let c: Vec<f64> = p.iter().enumerate().map(|(i, &j)| (a.point(i)[0] - b.point(j)[0]).abs()).collect();
            (c.iter().sum(), c.iter().cloned().fold(0.0, f64::max))
        };
        let all: Vec<(f64, f64)> = perms(3).iter().map(|p| cost(p)).collect();
        let best1 = all.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let bestinf = all.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        // unit weights, mass 3: each matched pair carries mass 3
        let (v, plan) = w1(&a, &b).unwrap();
        assert!((v - 3.0 * best1).abs() < 1e-12);
        assert_eq!(plan.row_sums(), vec![3.0; 3]);
        assert!((w_infty(&a, &b).unwrap().0 - bestinf).abs() < 1e-12);
    }

    #[test]
    fn marginals_are_mass_scaled() {
        let a = DiscreteMeasure::<f64>::new(1, vec![vec![0.0], vec![1.0]], vec![0.25, 0.75]).unwrap();
        let b = DiscreteMeasure::new(1, vec![vec![0.0], vec![2.0], vec![3.0]], vec![0.5, 0.25, 0.25]).unwrap();
        let (v, plan) = w1(&a, &b).unwrap();
        assert_eq!(plan.rows, 2);
        assert_eq!(plan.cols, 3);
        for (s, w) in plan.row_sums().iter().zip(a.weights()) {
            assert!((s - w).abs() < 1e-12);
        }
        // 0.25 stays at 0; from 1, 0.25 each goes to 0, 2 and 3
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = unit(1, vec![vec![0.0]]);
        let b = unit(1, vec![vec![0.0], vec![1.0]]);
        assert!(matches!(w1(&a, &b), Err(Error::MassMismatch(..))));
        let c = unit(2, vec![vec![0.0, 0.0]]);
        assert!(matches!(w1(&a, &c), Err(Error::DimensionMismatch(..))));
        let e = DiscreteMeasure::new(1, vec![vec![0.0], vec![1.0]], vec![1.5, 0.5]).unwrap();
        assert!(matches!(w_infty(&b, &e), Err(Error::UnsupportedShape(_))));
    }
}
