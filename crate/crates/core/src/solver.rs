//! Minimisation of the sum-of-norms functional, level-set extraction and
//! cluster paths over a `λ` grid.
//!
//! The solver is ADMM on the pairwise differences: `z_p = u_i - u_j` for every
//! unordered pair, fusion weight `2 λ a_i a_j` per pair. The `u`-step is a
//! diagonal-plus-rank-one system (the pair graph is complete) solved in
//! closed form; the `z`-step is block soft-thresholding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::pairs::{pair_count, pairs};
use crate::partition::Partition;
use crate::scalar::{vec, Scalar};

/// Pairs per work unit in the parallel sweeps. Fixed so that partial sums are
/// combined in the same order regardless of scheduling.
const BLOCK: usize = 8192;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Absolute, on `||D u - z|| / sqrt(#pairs)`.
    pub primal_tol: f64,
    /// Absolute, on the RMS over atoms of `ρ (Dᵀ(z - z_prev))_i / (2 a_i)`.
    pub dual_tol: f64,
    /// Initial ADMM penalty, in units of `2 · mass / N²`.
    pub penalty: f64,
    /// Relaxation factor in `[1, 2)`.
    pub over_relaxation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::for_scalar::<f64>()
    }
}

impl SolverOptions {
    /// Defaults with tolerances suited to the precision of `T`.
    pub fn for_scalar<T: Scalar>() -> Self {
        Self {
            max_iters: 50_000,
            primal_tol: T::SOLVER_TOL,
            dual_tol: T::SOLVER_TOL,
            penalty: 1.0,
            over_relaxation: 1.7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        if !(self.primal_tol > 0.0 && self.dual_tol > 0.0) {
            return Err(Error::Domain("solver tolerances must be positive".into()));
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(Error::Domain("penalty must be positive".into()));
        }
        if !(1.0..2.0).contains(&self.over_relaxation) {
            return Err(Error::Domain("over_relaxation must lie in [1, 2)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Residuals<T> {
    pub primal: T,
    pub dual: T,
}

/// Output of [`minimize`]. Serialises as
/// `{"lambda", "objective", "u", "converged", "iterations", "residuals": {"primal", "dual"}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SolverResult<T> {
    pub lambda: T,
    pub objective: T,
    #[serde(rename = "u")]
    pub u_values: Vec<Vec<T>>,
    pub converged: bool,
    pub iterations: usize,
    pub residuals: Residuals<T>,
}

impl<T: Scalar> SolverResult<T> {
    pub fn primal_residual(&self) -> T {
        self.residuals.primal
    }

    pub fn dual_residual(&self) -> T {
        self.residuals.dual
    }

    pub fn u_flat(&self) -> Vec<T> {
        self.u_values.iter().flatten().copied().collect()
    }
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if !(lambda >= T::zero() && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    Ok(())
}

fn objective_flat<T: Scalar>(m: &DiscreteMeasure<T>, lambda: T, u: &[T]) -> T {
    let d = m.dim();
    let n = m.len();
    let fit: T = (0..n)
        .map(|i| m.weight(i) * vec::dist2(&u[i * d..(i + 1) * d], m.point(i)))
        .sum();
    if lambda == T::zero() {
        return fit;
    }
    let fusion: T = (0..n)
        .into_par_iter()
        .map(|i| {
            let ui = &u[i * d..(i + 1) * d];
            (i + 1..n)
                .map(|j| m.weight(j) * vec::dist(ui, &u[j * d..(j + 1) * d]))
                .fold(T::zero(), |s, v| s + v)
                * m.weight(i)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    fit + T::c(2.0) * lambda * fusion
}

/// `J_{μ,λ}(u)`, with the fusion sum over ordered pairs.
pub fn objective<T: Scalar>(m: &DiscreteMeasure<T>, lambda: T, u: &[Vec<T>]) -> Result<T> {
    check_lambda(lambda)?;
    if u.len() != m.len() {
        return Err(Error::SizeMismatch {
            expected: m.len(),
            got: u.len(),
        });
    }
    if let Some(bad) = u.iter().find(|v| v.len() != m.dim()) {
        return Err(Error::DimensionMismatch(m.dim(), bad.len()));
    }
    let flat: Vec<T> = u.iter().flatten().copied().collect();
    Ok(objective_flat(m, lambda, &flat))
}

/// ADMM iterate; kept between solves along a path.
#[derive(Clone)]
struct State<T> {
    y: Vec<T>,
    z: Vec<T>,
    s: Vec<T>,
    rho: T,
}

struct Problem<'a, T> {
    m: &'a DiscreteMeasure<T>,
    pairs: Vec<(u32, u32)>,
    /// `2 λ a_i a_j` per pair.
    weight: Vec<T>,
}

impl<'a, T: Scalar> Problem<'a, T> {
    fn new(m: &'a DiscreteMeasure<T>, lambda: T) -> Self {
        let two_l = T::c(2.0) * lambda;
        let pairs: Vec<(u32, u32)> = pairs(m.len()).map(|(i, j)| (i as u32, j as u32)).collect();
        let weight = pairs
            .iter()
            .map(|&(i, j)| two_l * m.weight(i as usize) * m.weight(j as usize))
            .collect();
        Self { m, pairs, weight }
    }

    /// `out_i = Σ_{j>i} v_ij - Σ_{j<i} v_ji`, one sequential sweep.
    fn dt(&self, v: &[T], out: &mut [T]) {
        let d = self.m.dim();
        out.iter_mut().for_each(|x| *x = T::zero());
        for (vp, &(i, j)) in v.chunks_exact(d).zip(&self.pairs) {
            let (i, j) = (i as usize * d, j as usize * d);
            for k in 0..d {
                out[i + k] = out[i + k] + vp[k];
                out[j + k] = out[j + k] - vp[k];
            }
        }
    }

    fn initial_state(&self, y: Vec<T>, rho: T) -> State<T> {
        let d = self.m.dim();
        let mut z = vec![T::zero(); self.pairs.len() * d];
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let (i, j) = (i as usize, j as usize);
            for k in 0..d {
                z[p * d + k] = y[i * d + k] - y[j * d + k];
            }
        }
        let s = vec![T::zero(); z.len()];
        State { y, z, s, rho }
    }

    fn run(&self, st: &mut State<T>, opts: &SolverOptions) -> Result<(bool, usize, Residuals<T>)> {
        let m = self.m;
        let n = m.len();
        let d = m.dim();
        let np = self.pairs.len();
        let sqrt_p = T::of_usize(np).sqrt();
        let alpha = T::c(opts.over_relaxation);
        let ptol = T::c(opts.primal_tol);
        let dtol = T::c(opts.dual_tol);
        let two = T::c(2.0);
        let nn = T::of_usize(n);

        let ax2: Vec<T> = (0..n * d).map(|q| two * m.weight(q / d) * m.coords()[q]).collect();
        // Dᵀz and Dᵀs are carried instead of recomputed from the pair arrays
        let mut dtz = vec![T::zero(); n * d];
        let mut dts = vec![T::zero(); n * d];
        self.dt(&st.z, &mut dtz);
        self.dt(&st.s, &mut dts);
        let mut h = vec![T::zero(); n * d];
        let mut res = Residuals {
            primal: T::infinity(),
            dual: T::infinity(),
        };
        let balance_until = opts.max_iters / 2;

        for it in 1..=opts.max_iters {
            let rho = st.rho;
            // u-step: (2 diag(a) + ρ(N I - 11ᵀ)) y = 2 a∘x + ρ Dᵀ(z - s)
            let delta: Vec<T> = (0..n).map(|i| two * m.weight(i) + rho * nn).collect();
            let inv_sum: T = delta.iter().map(|&v| rho / v).sum();
            for k in 0..d {
                let mut hs = T::zero();
                for i in 0..n {
                    let q = i * d + k;
                    h[q] = ax2[q] + rho * (dtz[q] - dts[q]);
                    hs = hs + h[q] / delta[i];
                }
                let sigma = hs / (T::one() - inv_sum);
                for i in 0..n {
                    st.y[i * d + k] = (h[i * d + k] + rho * sigma) / delta[i];
                }
            }

            // z- and s-steps, pair-parallel in fixed blocks; each block
            // returns its share of the primal residual, Dᵀz and Dᵀs
            let y = &st.y;
            let inv_rho = T::one() / rho;
            let parts: Vec<(T, Vec<T>, Vec<T>)> = st
                .z
                .par_chunks_mut(BLOCK * d)
                .zip(st.s.par_chunks_mut(BLOCK * d))
                .enumerate()
                .map(|(b, (zb, sb))| {
                    let mut acc = T::zero();
                    let mut az = vec![T::zero(); n * d];
                    let mut as_ = vec![T::zero(); n * d];
                    let mut v = vec![T::zero(); d];
                    let offset = b * BLOCK;
                    for (q, (zq, sq)) in zb.chunks_exact_mut(d).zip(sb.chunks_exact_mut(d)).enumerate() {
                        let p = offset + q;
                        let (i, j) = (self.pairs[p].0 as usize * d, self.pairs[p].1 as usize * d);
                        let mut vn = T::zero();
                        for k in 0..d {
                            let e = y[i + k] - y[j + k];
                            v[k] = alpha * e + (T::one() - alpha) * zq[k] + sq[k];
                            vn = vn + v[k] * v[k];
                        }
                        let vn = vn.sqrt();
                        let thr = self.weight[p] * inv_rho;
                        let f = if vn > thr { T::one() - thr / vn } else { T::zero() };
                        for k in 0..d {
                            let znew = f * v[k];
                            let snew = v[k] - znew;
                            zq[k] = znew;
                            sq[k] = snew;
                            az[i + k] = az[i + k] + znew;
                            az[j + k] = az[j + k] - znew;
                            as_[i + k] = as_[i + k] + snew;
                            as_[j + k] = as_[j + k] - snew;
                            let e = y[i + k] - y[j + k] - znew;
                            acc = acc + e * e;
                        }
                    }
                    (acc, az, as_)
                })
                .collect();
            let mut primal2 = T::zero();
            std::mem::swap(&mut h, &mut dtz);
            dtz.iter_mut().for_each(|v| *v = T::zero());
            dts.iter_mut().for_each(|v| *v = T::zero());
            for (acc, az, as_) in &parts {
                primal2 = primal2 + *acc;
                for q in 0..n * d {
                    dtz[q] = dtz[q] + az[q];
                    dts[q] = dts[q] + as_[q];
                }
            }

            // dual residual as a displacement: ρ Dᵀ(z - z_old) divided by the
            // fidelity curvature 2 a_i (h holds the old Dᵀz here)
            let dual2: T = (0..n)
                .map(|i| {
                    let g = rho / (two * m.weight(i));
                    (i * d..(i + 1) * d).fold(T::zero(), |s, q| {
                        let v = dtz[q] - h[q];
                        s + v * v
                    }) * g * g
                })
                .sum();
            let dual = (dual2 / nn).sqrt();
            let primal = primal2.sqrt() / sqrt_p;
            if !(primal.is_finite() && dual.is_finite()) {
                return Err(Error::Numeric(format!("non-finite residual at iteration {it}")));
            }
            res = Residuals { primal, dual };
            if primal <= ptol && dual <= dtol {
                return Ok((true, it, res));
            }

            if it % 20 == 0 && it <= balance_until {
                let ten = T::c(10.0);
                let factor = if primal > ten * dual {
                    Some(two)
                } else if dual > ten * primal {
                    Some(T::one() / two)
                } else {
                    None
                };
                if let Some(f) = factor {
                    st.rho = st.rho * f;
                    let g = T::one() / f;
                    st.s.iter_mut().for_each(|v| *v = *v * g);
                    dts.iter_mut().for_each(|v| *v = *v * g);
                }
            }
        }
        Ok((false, opts.max_iters, res))
    }
}

fn unflatten<T: Scalar>(flat: &[T], d: usize) -> Vec<Vec<T>> {
    flat.chunks_exact(d).map(<[T]>::to_vec).collect()
}

fn trivial_result<T: Scalar>(m: &DiscreteMeasure<T>, lambda: T) -> SolverResult<T> {
    SolverResult {
        lambda,
        objective: objective_flat(m, lambda, m.coords()),
        u_values: m.points().map(<[T]>::to_vec).collect(),
        converged: true,
        iterations: 0,
        residuals: Residuals {
            primal: T::zero(),
            dual: T::zero(),
        },
    }
}

fn initial_rho<T: Scalar>(m: &DiscreteMeasure<T>, opts: &SolverOptions) -> T {
    let n = T::of_usize(m.len());
    T::c(opts.penalty) * T::c(2.0) * m.total_mass() / (n * n)
}

fn solve_state<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambda: T,
    opts: &SolverOptions,
    st: &mut State<T>,
) -> Result<SolverResult<T>> {
    let prob = Problem::new(m, lambda);
    let (converged, iterations, residuals) = prob.run(st, opts)?;
    if st.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite iterate".into()));
    }
    Ok(SolverResult {
        lambda,
        objective: objective_flat(m, lambda, &st.y),
        u_values: unflatten(&st.y, m.dim()),
        converged,
        iterations,
        residuals,
    })
}

/// Minimises `J_{μ,λ}` starting from the identity map.
///
/// `λ = 0` and single-atom measures return the identity exactly. Running out
/// of iterations is not an error: the result carries `converged = false`.
pub fn minimize<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambda: T,
    opts: &SolverOptions,
) -> Result<SolverResult<T>> {
    minimize_from(m, lambda, opts, m.coords().to_vec())
}

/// As [`minimize`], starting from the map `u0` (one vector per atom).
pub fn minimize_with_init<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambda: T,
    opts: &SolverOptions,
    u0: &[Vec<T>],
) -> Result<SolverResult<T>> {
    if u0.len() != m.len() {
        return Err(Error::SizeMismatch {
            expected: m.len(),
            got: u0.len(),
        });
    }
    if let Some(bad) = u0.iter().find(|v| v.len() != m.dim()) {
        return Err(Error::DimensionMismatch(m.dim(), bad.len()));
    }
    minimize_from(m, lambda, opts, u0.iter().flatten().copied().collect())
}

fn minimize_from<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambda: T,
    opts: &SolverOptions,
    y0: Vec<T>,
) -> Result<SolverResult<T>> {
    check_lambda(lambda)?;
    opts.validate()?;
    if lambda == T::zero() || m.len() == 1 {
        return Ok(trivial_result(m, lambda));
    }
    let prob = Problem::new(m, lambda);
    let mut st = prob.initial_state(y0, initial_rho(m, opts));
    drop(prob);
    solve_state(m, lambda, opts, &mut st)
}

/// Solver state carried between nearby solves.
pub(crate) struct Warm<T> {
    lambda: T,
    state: State<T>,
}

/// Minimises `J_{μ,λ}` warm-starting from `warm` (updated in place), and
/// returns the pair field `w = ρ s / (2 λ a_i a_j)` recovered from the scaled
/// dual. The soft-threshold step guarantees `|w| ≤ 1` exactly.
pub(crate) fn minimize_with_witness<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambda: T,
    opts: &SolverOptions,
    warm: &mut Option<Warm<T>>,
) -> Result<(SolverResult<T>, Vec<T>)> {
    check_lambda(lambda)?;
    opts.validate()?;
    let d = m.dim();
    if lambda == T::zero() || m.len() == 1 {
        return Ok((trivial_result(m, lambda), vec![T::zero(); pair_count(m.len()) * d]));
    }
    let prob = Problem::new(m, lambda);
    let mut st = match warm.take() {
        Some(Warm { lambda: prev, mut state }) if prev > T::zero() => {
            let f = lambda / prev;
            state.s.iter_mut().for_each(|v| *v = *v * f);
            state
        }
        _ => prob.initial_state(m.coords().to_vec(), initial_rho(m, opts)),
    };
    let (converged, iterations, residuals) = prob.run(&mut st, opts)?;
    if st.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite iterate".into()));
    }
    let mut w = st.s.clone();
    for (c, &wt) in w.chunks_exact_mut(d).zip(&prob.weight) {
        let f = st.rho / wt;
        c.iter_mut().for_each(|v| *v = *v * f);
    }
    let result = SolverResult {
        lambda,
        objective: objective_flat(m, lambda, &st.y),
        u_values: unflatten(&st.y, d),
        converged,
        iterations,
        residuals,
    };
    *warm = Some(Warm { lambda, state: st });
    Ok((result, w))
}

/// `1e-6 · diam` in double precision (scaled up with the solver tolerance for
/// `f32`); a tiny positive floor keeps it usable for single-point supports.
pub fn default_fuse_tol<T: Scalar>(m: &DiscreteMeasure<T>) -> T {
    let rel = T::c(T::SOLVER_TOL * 100.0);
    (rel * m.diameter()).max(T::min_positive_value().sqrt())
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Connected components of the graph joining atoms whose values in `u`
/// (flat, `N * d`) are within `fuse_tol`.
pub fn fuse_labels<T: Scalar>(u: &[T], d: usize, fuse_tol: T) -> Vec<usize> {
    let n = u.len() / d;
    let mut parent: Vec<usize> = (0..n).collect();
    let t2 = fuse_tol * fuse_tol;
    for i in 0..n {
        for j in i + 1..n {
            if vec::dist2(&u[i * d..(i + 1) * d], &u[j * d..(j + 1) * d]) <= t2 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// Level-set partition of a solver output, fusing values within `fuse_tol`
/// transitively.
pub fn extract_partition<T: Scalar>(
    m: &DiscreteMeasure<T>,
    r: &SolverResult<T>,
    fuse_tol: T,
) -> Result<Partition<T>> {
    if !(fuse_tol > T::zero()) {
        return Err(Error::Domain("fuse_tol must be positive".into()));
    }
    let u = r.u_flat();
    if u.len() != m.len() * m.dim() {
        return Err(Error::SizeMismatch {
            expected: m.len(),
            got: r.u_values.len(),
        });
    }
    let labels = fuse_labels(&u, m.dim(), fuse_tol);
    Partition::from_labels_and_values(m, &labels, &u)
}

/// Convenience: [`minimize`] followed by [`extract_partition`] at the default
/// fuse tolerance.
pub fn solve_and_partition<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambda: T,
    opts: &SolverOptions,
) -> Result<(SolverResult<T>, Partition<T>)> {
    let r = minimize(m, lambda, opts)?;
    let p = extract_partition(m, &r, default_fuse_tol(m))?;
    Ok((r, p))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PathEntry<T> {
    pub result: SolverResult<T>,
    pub partition: Partition<T>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClusterPath<T> {
    pub lambdas: Vec<T>,
    pub entries: Vec<PathEntry<T>>,
}

impl<T: Scalar> ClusterPath<T> {
    /// Assembles a path from precomputed entries; `lambdas` must be strictly
    /// increasing and aligned with `entries`.
    pub fn from_entries(lambdas: Vec<T>, entries: Vec<PathEntry<T>>) -> Result<Self> {
        check_grid(&lambdas)?;
        if lambdas.len() != entries.len() {
            return Err(Error::SizeMismatch {
                expected: lambdas.len(),
                got: entries.len(),
            });
        }
        Ok(Self { lambdas, entries })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn cluster_counts(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.partition.num_clusters()).collect()
    }
}

fn check_grid<T: Scalar>(lambdas: &[T]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::Domain("lambda grid is empty".into()));
    }
    if lambdas.iter().any(|&l| !(l >= T::zero() && l.is_finite())) {
        return Err(Error::Domain("lambda grid must be finite and nonnegative".into()));
    }
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("lambda grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Solves along an increasing `λ` grid, warm-starting every solve from the
/// previous iterate. Uses the default fuse tolerance.
pub fn cluster_path<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambdas: &[T],
    opts: &SolverOptions,
) -> Result<ClusterPath<T>> {
    cluster_path_with_fuse(m, lambdas, opts, default_fuse_tol(m))
}

pub fn cluster_path_with_fuse<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambdas: &[T],
    opts: &SolverOptions,
    fuse_tol: T,
) -> Result<ClusterPath<T>> {
    check_grid(lambdas)?;
    opts.validate()?;
    let mut entries = Vec::with_capacity(lambdas.len());
    let mut state: Option<(T, State<T>)> = None;
    for &lambda in lambdas {
        let result = if lambda == T::zero() || m.len() == 1 {
            trivial_result(m, lambda)
        } else {
            let mut st = match state.take() {
                // the scaled dual is proportional to λ at a fixed sign pattern
                Some((prev, mut st)) if prev > T::zero() => {
                    let f = lambda / prev;
                    st.s.iter_mut().for_each(|v| *v = *v * f);
                    st
                }
                _ => Problem::new(m, lambda).initial_state(m.coords().to_vec(), initial_rho(m, opts)),
            };
            let r = solve_state(m, lambda, opts, &mut st)?;
            state = Some((lambda, st));
            r
        };
        let partition = extract_partition(m, &result, fuse_tol)?;
        entries.push(PathEntry { result, partition });
    }
    Ok(ClusterPath {
        lambdas: lambdas.to_vec(),
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AgglomerationReport<T> {
    pub nested: bool,
    pub first_violation: Option<(T, T)>,
}

/// Whether every cluster at each grid point is contained in a single cluster
/// at the next one.
pub fn check_agglomeration<T: Scalar>(path: &ClusterPath<T>) -> AgglomerationReport<T> {
    for (w, l) in path.entries.windows(2).zip(path.lambdas.windows(2)) {
        if !w[0].partition.refines(&w[1].partition) {
            return AgglomerationReport {
                nested: false,
                first_violation: Some((l[0], l[1])),
            };
        }
    }
    AgglomerationReport {
        nested: true,
        first_violation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> DiscreteMeasure<f64> {
        DiscreteMeasure::new(1, vec![vec![0.0], vec![1.0]], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn objective_examples() {
        let m = two_points();
        let j = objective(&m, 0.5, &[vec![0.25], vec![0.75]]).unwrap();
        // 2·½·(1/16) + 0.5·2·¼·½
        assert!((j - 0.1875).abs() < 1e-15);
        let id = objective(&m, 0.7, &[vec![0.0], vec![1.0]]).unwrap();
        assert!((id - 0.7 * 0.5).abs() < 1e-15);
        let c = objective(&m, 3.0, &[vec![0.2], vec![0.2]]).unwrap();
        assert!((c - (0.5 * 0.04 + 0.5 * 0.64)).abs() < 1e-15);
        assert!(objective(&m, 1.0, &[vec![0.0]]).is_err());
    }

    #[test]
    fn two_point_minimiser() {
        let m = two_points();
        let opts = SolverOptions::default();
        let r = minimize(&m, 0.5, &opts).unwrap();
        assert!(r.converged);
        assert!((r.u_values[0][0] - 0.25).abs() < 1e-6);
        assert!((r.u_values[1][0] - 0.75).abs() < 1e-6);
        let r = minimize(&m, 2.0, &opts).unwrap();
        assert!((r.u_values[0][0] - 0.5).abs() < 1e-6);
        assert!((r.u_values[1][0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn lambda_zero_and_singleton_are_exact() {
        let m = DiscreteMeasure::<f64>::unit_weights(2, vec![vec![0.3, 1.0], vec![-2.0, 0.5]]).unwrap();
        let r = minimize(&m, 0.0, &SolverOptions::default()).unwrap();
        assert_eq!(r.u_flat(), m.coords());
        assert_eq!(r.iterations, 0);
        let one = DiscreteMeasure::<f64>::unit_weights(2, vec![vec![3.0, 4.0]]).unwrap();
        let r = minimize(&one, 10.0, &SolverOptions::default()).unwrap();
        assert_eq!(r.u_values, vec![vec![3.0, 4.0]]);
    }

    #[test]
    fn partition_extraction() {
        let m = DiscreteMeasure::<f64>::unit_weights(1, vec![vec![0.0], vec![0.1], vec![1.0]]).unwrap();
        let mk = |u: Vec<f64>| SolverResult {
            lambda: 1.0,
            objective: 0.0,
            u_values: u.into_iter().map(|v| vec![v]).collect(),
            converged: true,
            iterations: 0,
            residuals: Residuals { primal: 0.0, dual: 0.0 },
        };
        let p = extract_partition(&m, &mk(vec![0.0, 5e-5, 1.0]), 1e-4).unwrap();
        assert_eq!(p.labels(), &[0, 0, 1]);
        // chained within tolerance, though the ends are 1.6e-4 apart
        let p = extract_partition(&m, &mk(vec![0.0, 8e-5, 1.6e-4]), 1e-4).unwrap();
        assert!(p.is_trivial());
        let two = two_points();
        let p = extract_partition(&two, &mk(vec![0.25, 0.75]), 1e-4).unwrap();
        assert_eq!(p.num_clusters(), 2);
        let p = extract_partition(&two, &mk(vec![0.5, 0.5]), 1e-4).unwrap();
        assert!(p.is_trivial());
    }

    #[test]
    fn result_json_shape() {
        let m = two_points();
        let r = minimize(&m, 0.0, &SolverOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["lambda", "objective", "u", "converged", "iterations", "residuals"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["residuals"].get("primal").is_some() && v["residuals"].get("dual").is_some());
        assert_eq!(v["u"], serde_json::json!([[0.0], [1.0]]));
    }

    #[test]
    fn two_point_path() {
        let m = two_points();
        let path = cluster_path(&m, &[0.5, 1.5], &SolverOptions::default()).unwrap();
        assert_eq!(path.cluster_counts(), vec![2, 1]);
        assert!(check_agglomeration(&path).nested);
        assert!(cluster_path(&m, &[1.0, 0.5], &SolverOptions::default()).is_err());
    }

    #[test]
    fn crossed_path_is_not_nested() {
        let m = DiscreteMeasure::<f64>::unit_weights(
            1,
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
        )
        .unwrap();
        let mk = |lambda: f64, labels: &[usize]| PathEntry {
            result: trivial_result(&m, lambda),
            partition: Partition::from_labels(&m, labels).unwrap(),
        };
        let path = ClusterPath::from_entries(
            vec![0.1, 0.2],
            vec![mk(0.1, &[0, 0, 1, 1]), mk(0.2, &[0, 1, 0, 1])],
        )
        .unwrap();
        let rep = check_agglomeration(&path);
        assert!(!rep.nested);
        assert_eq!(rep.first_violation, Some((0.1, 0.2)));
    }

    #[test]
    fn f32_solver() {
        let m = DiscreteMeasure::<f32>::new(1, vec![vec![0.0], vec![1.0]], vec![0.5, 0.5]).unwrap();
        let r = minimize(&m, 0.5f32, &SolverOptions::for_scalar::<f32>()).unwrap();
        assert!(r.converged);
        assert!((r.u_values[0][0] - 0.25).abs() < 1e-3);
    }
}
