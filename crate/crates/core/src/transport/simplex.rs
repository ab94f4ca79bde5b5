//! Transportation simplex on a dense `m × n` cost matrix.
//!
//! The basis is a spanning tree of the bipartite row/column graph with
//! `m + n - 1` cells (degenerate zero flows included). The starting tree
//! comes from the matrix-minimum rule; pivots use Dantzig pricing.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const NONE: usize = usize::MAX;

pub(super) fn solve<T: Scalar>(supply: &[T], demand: &[T], cost: &[T]) -> Result<Vec<T>> {
    let (m, n) = (supply.len(), demand.len());
    debug_assert_eq!(cost.len(), m * n);
    let (mut basis, mut flow) = initial_basis(supply, demand, cost);

    let cmax = cost.iter().fold(T::zero(), |a, &c| a.max(c));
    let eps = T::epsilon() * T::c(64.0) * cmax.max(T::one());
    let nodes = m + n;
    let max_pivots = 100 * nodes + 10_000;
    let mut u = vec![T::zero(); m];
    let mut v = vec![T::zero(); n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut parent_edge = vec![NONE; nodes];
    let mut seen = vec![false; nodes];
    let mut queue = VecDeque::new();

    for _ in 0..max_pivots {
        adj.iter_mut().for_each(Vec::clear);
        for (e, &(i, j)) in basis.iter().enumerate() {
            adj[i].push(e);
            adj[m + j].push(e);
        }
        // potentials: u_i + v_j = c_ij on the tree, rooted at row 0
        u[0] = T::zero();
        bfs(0, m, &basis, &adj, &mut seen, &mut parent_edge, &mut queue, |node, e| {
            let (i, j) = basis[e];
            if node < m {
                u[i] = cost[i * n + j] - v[j];
            } else {
                v[j] = cost[i * n + j] - u[i];
            }
        });

        let mut enter = None;
        let mut best = -eps;
        for i in 0..m {
            let row = &cost[i * n..(i + 1) * n];
            for j in 0..n {
                let r = row[j] - u[i] - v[j];
                if r < best {
                    best = r;
                    enter = Some((i, j));
                }
            }
        }
        let Some((ei, ej)) = enter else {
            let mut out = vec![T::zero(); m * n];
            for (&(i, j), &f) in basis.iter().zip(&flow) {
                out[i * n + j] = f;
            }
            return Ok(out);
        };

        // tree path from column ej back to row ei
        bfs(ei, m, &basis, &adj, &mut seen, &mut parent_edge, &mut queue, |_, _| {});
        let mut path = Vec::new();
        let mut node = m + ej;
        while node != ei {
            let e = parent_edge[node];
            path.push(e);
            let (i, j) = basis[e];
            node = if node == m + j { i } else { m + j };
        }
        // edges alternate -, +, -, ... starting next to the entering cell
        let mut leave = NONE;
        let mut theta = T::infinity();
        for &e in path.iter().step_by(2) {
            if flow[e] < theta {
                theta = flow[e];
                leave = e;
            }
        }
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[e] = flow[e] - theta;
            } else {
                flow[e] = flow[e] + theta;
            }
        }
        basis[leave] = (ei, ej);
        flow[leave] = theta;
    }
    Err(Error::Numeric("transportation simplex exceeded its pivot budget".into()))
}

#[allow(clippy::too_many_arguments)]
fn bfs(
    root: usize,
    m: usize,
    basis: &[(usize, usize)],
    adj: &[Vec<usize>],
    seen: &mut [bool],
    parent_edge: &mut [usize],
    queue: &mut VecDeque<usize>,
    mut visit: impl FnMut(usize, usize),
) {
    seen.iter_mut().for_each(|s| *s = false);
    queue.clear();
    seen[root] = true;
    parent_edge[root] = NONE;
    queue.push_back(root);
    while let Some(x) = queue.pop_front() {
        for &e in &adj[x] {
            let (i, j) = basis[e];
            let y = if x < m { m + j } else { i };
            if !seen[y] {
                seen[y] = true;
                parent_edge[y] = e;
                visit(y, e);
                queue.push_back(y);
            }
        }
    }
}

/// Matrix-minimum rule: fill the cheapest open cell, close its row or column
/// (exactly one, except for the final cell), so the `m + n - 1` cells form a
/// spanning tree.
fn initial_basis<T: Scalar>(supply: &[T], demand: &[T], cost: &[T]) -> (Vec<(usize, usize)>, Vec<T>) {
    let (m, n) = (supply.len(), demand.len());
    let mut s = supply.to_vec();
    let mut t = demand.to_vec();
    let mut order: Vec<usize> = (0..m * n).collect();
    order.sort_by(|&a, &b| cost[a].partial_cmp(&cost[b]).expect("finite costs").then(a.cmp(&b)));
    let mut row_open = vec![true; m];
    let mut col_open = vec![true; n];
    let (mut rows_left, mut cols_left) = (m, n);
    let mut basis = Vec::with_capacity(m + n - 1);
    let mut flow = Vec::with_capacity(m + n - 1);
    for q in order {
        let (i, j) = (q / n, q % n);
        if !row_open[i] || !col_open[j] {
            continue;
        }
        let x = s[i].min(t[j]);
        let close_row = s[i] <= t[j];
        s[i] = s[i] - x;
        t[j] = t[j] - x;
        basis.push((i, j));
        flow.push(x);
        if rows_left == 1 && cols_left == 1 {
            break;
        }
        if (close_row && rows_left > 1) || cols_left == 1 {
            row_open[i] = false;
            rows_left -= 1;
        } else {
            col_open[j] = false;
            cols_left -= 1;
        }
    }
    debug_assert_eq!(basis.len(), m + n - 1);
    (basis, flow)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_problem() {
        // classic 3 × 4 textbook instance, optimum 743
        let supply = [7.0, 9.0, 18.0];
        let demand = [5.0, 8.0, 7.0, 14.0];
        let cost = [
            19.0, 30.0, 50.0, 10.0, //
            70.0, 30.0, 40.0, 60.0, //
            40.0, 8.0, 70.0, 20.0,
        ];
        let f = solve(&supply, &demand, &cost).unwrap();
        let v: f64 = f.iter().zip(&cost).map(|(a, b)| a * b).sum();
        assert!((v - 743.0).abs() < 1e-9);
        for i in 0..3 {
            let r: f64 = f[i * 4..(i + 1) * 4].iter().sum();
            assert!((r - supply[i]).abs() < 1e-12);
        }
        assert!(f.iter().all(|&x| x >= 0.0));
    }
}
