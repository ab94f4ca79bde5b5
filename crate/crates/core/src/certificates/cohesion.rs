//! The cohesion threshold `λ₁` as a min-max-norm problem over antisymmetric
//! pair fields with prescribed weighted row sums.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::pairs::{max_pair_norm, min_max_pair_norm, pairs, AffineProjector, PairField, RowSumOperator};
use crate::solver::{minimize_with_witness, SolverOptions};
use crate::scalar::{vec, Scalar};

const DEFAULT_SOLVES: usize = 80;
const MAX_STALLS: usize = 4;
/// Solver tolerance per unit of bracket width (in displacement units).
const SOLVE_TOL_PER_WIDTH: f64 = 0.05;
const POLISH_ITERS: usize = 20_000;

/// Witness `q` for `λ₁ · mass ≤ value`, together with a certified lower bound
/// on the optimal value.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CohesionCertificate<T> {
    pub q: PairField<T>,
    /// `max_{i<j} |q(i, j)|`.
    pub value: T,
    /// No feasible field has smaller sup-norm than this.
    pub lower_bound: T,
    /// `max_i |x_i - c - mass⁻¹ Σ_j a_j q(i, j)|`.
    pub constraint_residual: T,
    /// Solver calls plus projection sweeps spent.
    pub iterations: usize,
}

/// `(R(μ) / mass, diam(supp μ) / mass)`.
pub fn lambda1_bounds<T: Scalar>(m: &DiscreteMeasure<T>) -> (T, T) {
    let mass = m.total_mass();
    (m.radius() / mass, m.diameter() / mass)
}

fn row_targets<T: Scalar>(m: &DiscreteMeasure<T>) -> Vec<T> {
    let c = m.global_centroid();
    let mass = m.total_mass();
    m.points()
        .flat_map(|p| p.iter().zip(&c).map(|(&x, &ci)| mass * (x - ci)).collect::<Vec<_>>())
        .collect()
}

fn constraint_residual<T: Scalar>(m: &DiscreteMeasure<T>, op: &RowSumOperator<T>, b: &[T], q: &[T]) -> T {
    let d = m.dim();
    let mut row = vec![T::zero(); b.len()];
    op.forward(q, &mut row);
    let mass = m.total_mass();
    row.chunks_exact(d)
        .zip(b.chunks_exact(d))
        .map(|(r, t)| vec::dist(r, t) / mass)
        .fold(T::zero(), T::max)
}

/// Simple dual bounds on `min ||q||_∞`: the farthest atom's row constraint and
/// the test direction `y_i = x_i - c`.
fn initial_lower<T: Scalar>(m: &DiscreteMeasure<T>) -> T {
    let mass = m.total_mass();
    let c = m.global_centroid();
    let mut best = T::zero();
    let mut num = T::zero();
    for (i, p) in m.points().enumerate() {
        let r = vec::dist(p, &c);
        let rest = mass - m.weight(i);
        if rest > T::zero() {
            best = best.max(mass * r / rest);
        }
        num = num + m.weight(i) * r * r;
    }
    let mut den = T::zero();
    for (i, j) in pairs(m.len()) {
        den = den + m.weight(i) * m.weight(j) * vec::dist(m.point(i), m.point(j));
    }
    if den > T::zero() {
        best = best.max(mass * num / den);
    }
    best
}

/// Lower bound `Σ a_i ⟨x_i - c, v_i⟩ / Σ_{i<j} a_i a_j |v_i - v_j|` on `λ₁`
/// from the test direction `v`: the directional derivative of `J` at the
/// constant map must be nonnegative when `μ` is cohesive.
fn direction_bound<T: Scalar>(m: &DiscreteMeasure<T>, v: &[T], c: &[T]) -> Option<T> {
    let d = m.dim();
    let mut num = T::zero();
    for (i, p) in m.points().enumerate() {
        let vi = &v[i * d..(i + 1) * d];
        num = num + m.weight(i) * p.iter().zip(c).zip(vi).fold(T::zero(), |s, ((&x, &ci), &vk)| s + (x - ci) * vk);
    }
    let mut den = T::zero();
    for (i, j) in pairs(m.len()) {
        den = den + m.weight(i) * m.weight(j) * vec::dist(&v[i * d..(i + 1) * d], &v[j * d..(j + 1) * d]);
    }
    (den > T::zero() && num > T::zero()).then(|| num / den)
}

/// `λ₁(μ)` to absolute accuracy `tol`, with the optimal witness.
///
/// The returned value is the sup-norm of the witness divided by the mass, so
/// it is always a certified upper bound; `certificate.lower_bound / mass` is
/// within `tol` below it.
///
/// The bracket is narrowed by solving the clustering problem at its midpoint:
/// a non-constant minimiser `u` is a test direction whose ratio exceeds the
/// probed `λ`, and the solver's dual field, projected onto the constraint set,
/// is a feasible `q`. Alternating projections polish the witness if the
/// solver stalls.
pub fn lambda1_exact<T: Scalar>(m: &DiscreteMeasure<T>, tol: T) -> Result<(T, CohesionCertificate<T>)> {
    lambda1_exact_with_budget(m, tol, DEFAULT_SOLVES)
}

pub fn lambda1_exact_with_budget<T: Scalar>(
    m: &DiscreteMeasure<T>,
    tol: T,
    max_solves: usize,
) -> Result<(T, CohesionCertificate<T>)> {
    if !(tol > T::zero()) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let n = m.len();
    let d = m.dim();
    if n == 1 {
        let cert = CohesionCertificate {
            q: PairField::zeros(1, d),
            value: T::zero(),
            lower_bound: T::zero(),
            constraint_residual: T::zero(),
            iterations: 0,
        };
        return Ok((T::zero(), cert));
    }
    let mass = m.total_mass();
    let c = m.global_centroid();
    let op = RowSumOperator::new(m.weights().to_vec(), d);
    let b = row_targets(m);
    let mut proj = AffineProjector::new(&op, &b);

    // q(i, j) = x_i - x_j is always feasible
    let mut best = Vec::with_capacity(op.pair_len());
    for (i, j) in pairs(n) {
        best.extend(m.point(i).iter().zip(m.point(j)).map(|(&a, &cj)| a - cj));
    }
    let mut upper = max_pair_norm(&best, d) / mass;
    let mut lower = (initial_lower(m) / mass).min(upper);
    let mut z = vec![T::zero(); op.pair_len()];

    // bounds are certified whatever the solve accuracy, so the solver only
    // needs to be accurate relative to the current bracket
    let mut opts = SolverOptions::for_scalar::<T>();
    let floor = opts.primal_tol;
    let mut tighten = 1.0;
    let mut warm = None;
    let mut work = 0;
    let mut solves = 0;
    let mut stalls = 0;
    while upper - lower > tol && solves < max_solves && stalls <= MAX_STALLS {
        let width = upper - lower;
        let lambda = lower + T::c(0.3) * width;
        let admm_tol = (SOLVE_TOL_PER_WIDTH * tighten * (width * mass).f64()).max(floor);
        opts.primal_tol = admm_tol;
        opts.dual_tol = admm_tol;
        let (r, w) = minimize_with_witness(m, lambda, &opts, &mut warm)?;
        solves += 1;
        work += 1;
        if let Some(l) = direction_bound(m, &r.u_flat(), &c) {
            lower = lower.max(l.min(upper));
        }
        let scale = lambda * mass;
        let q: Vec<T> = w.iter().map(|&v| v * scale).collect();
        proj.project(&q, &mut z);
        let uq = max_pair_norm(&z, d) / mass;
        if uq < upper {
            upper = uq;
            std::mem::swap(&mut best, &mut z);
        }
        if upper - lower > T::c(0.75) * width {
            // the dual is not accurate enough to certify: solve tighter
            stalls += 1;
            tighten *= 0.1;
        }
    }
    if upper - lower > tol {
        let out = min_max_pair_norm(&op, &b, best.clone(), lower * mass, tol * mass, POLISH_ITERS);
        work += out.iterations;
        if out.upper / mass < upper {
            upper = out.upper / mass;
            best = out.q;
        }
        lower = lower.max(out.lower / mass).min(upper);
    }
    if upper - lower > tol {
        return Err(Error::NotConverged {
            lower: lower.f64(),
            upper: upper.f64(),
        });
    }
    let residual = constraint_residual(m, &op, &b, &best);
    let cert = CohesionCertificate {
        q: PairField::from_data(n, d, best),
        value: upper * mass,
        lower_bound: lower * mass,
        constraint_residual: residual,
        iterations: work,
    };
    Ok((upper, cert))
}

/// Upper bound on `λ₁` from any antisymmetric `q₁`: the field
/// `q₁(x, y) + x - y - ⨍q₁(x, ·) + ⨍q₁(y, ·)` is feasible, so its sup-norm
/// over the mass bounds `λ₁`.
pub fn lambda1_upper_from_pair_field<T: Scalar>(m: &DiscreteMeasure<T>, q1: &PairField<T>) -> Result<T> {
    let n = m.len();
    let d = m.dim();
    if q1.atoms() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: q1.atoms(),
        });
    }
    if q1.dim() != d {
        return Err(Error::DimensionMismatch(d, q1.dim()));
    }
    let mass = m.total_mass();
    let op = RowSumOperator::new(m.weights().to_vec(), d);
    let mut avg = vec![T::zero(); n * d];
    op.forward(q1.data(), &mut avg);
    avg.iter_mut().for_each(|v| *v = *v / mass);
    let mut best = T::zero();
    let mut tmp = vec![T::zero(); d];
    for (i, j) in pairs(n) {
        let q = q1.upper(i, j);
        for k in 0..d {
            tmp[k] = q[k] + m.point(i)[k] - m.point(j)[k] - avg[i * d + k] + avg[j * d + k];
        }
        best = best.max(vec::norm(&tmp));
    }
    Ok(best / mass)
}

/// As [`lambda1_upper_from_pair_field`] for `q₁` given on ordered pairs;
/// rejects maps that are not antisymmetric.
pub fn lambda1_upper_from_q1<T: Scalar>(
    m: &DiscreteMeasure<T>,
    q1: impl Fn(usize, usize) -> Vec<T>,
) -> Result<T> {
    let n = m.len();
    let d = m.dim();
    let slack = |a: &[T], b: &[T]| -> bool {
        let scale = vec::norm(a) + vec::norm(b);
        let sum: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x + y).collect();
        vec::norm(&sum) <= T::c(1e-12) * scale
    };
    for i in 0..n {
        let v = q1(i, i);
        if v.len() != d {
            return Err(Error::DimensionMismatch(d, v.len()));
        }
        if vec::norm(&v) > T::zero() {
            return Err(Error::Domain(format!("q1({i}, {i}) must vanish")));
        }
    }
    let field = PairField::from_fn(n, d, |i, j| q1(i, j));
    for (i, j) in pairs(n) {
        let back = q1(j, i);
        if back.len() != d {
            return Err(Error::DimensionMismatch(d, back.len()));
        }
        if !slack(field.upper(i, j), &back) {
            return Err(Error::Domain(format!("q1 is not antisymmetric at ({i}, {j})")));
        }
    }
    lambda1_upper_from_pair_field(m, &field)
}

/// The radial comparator field `q₁(x, y) = α sgn(x)` if `|x| > |y|`,
/// `-α sgn(y)` if `|x| < |y|`, `0` on ties, used to bound `λ₁` of a ball.
/// `alpha = None` picks `2^{(d-1)/d} / d`.
pub fn ball_q1<T: Scalar>(m: &DiscreteMeasure<T>, alpha: Option<T>) -> PairField<T> {
    let d = m.dim();
    let alpha = alpha.unwrap_or_else(|| {
        let df = T::of_usize(d);
        T::c(2.0).powf((df - T::one()) / df) / df
    });
    let norms: Vec<T> = m.points().map(vec::norm).collect();
    let sgn = |i: usize| -> Vec<T> {
        if norms[i] > T::zero() {
            m.point(i).iter().map(|&v| alpha * v / norms[i]).collect()
        } else {
            vec![T::zero(); d]
        }
    };
    PairField::from_fn(m.len(), d, |i, j| match norms[i].partial_cmp(&norms[j]) {
        Some(std::cmp::Ordering::Greater) => sgn(i),
        Some(std::cmp::Ordering::Less) => sgn(j).into_iter().map(|v| -v).collect(),
        _ => vec![T::zero(); d],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(d: usize, pts: Vec<Vec<f64>>, w: Vec<f64>) -> DiscreteMeasure<f64> {
        DiscreteMeasure::new(d, pts, w).unwrap()
    }

    #[test]
    fn bounds_examples() {
        let two = m(1, vec![vec![-1.0], vec![1.0]], vec![1.0, 1.0]);
        assert_eq!(lambda1_bounds(&two), (0.5, 1.0));
        let one = m(1, vec![vec![2.0]], vec![3.0]);
        assert_eq!(lambda1_bounds(&one), (0.0, 0.0));
        let sq = m(
            2,
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![1.0; 4],
        );
        assert_eq!(lambda1_bounds(&sq), (0.25, 0.5));
    }

    #[test]
    fn two_points_exact() {
        let two = m(1, vec![vec![0.0], vec![1.0]], vec![0.5, 0.5]);
        let (l, cert) = lambda1_exact(&two, 1e-9).unwrap();
        assert!((l - 1.0).abs() < 1e-8);
        assert!(cert.constraint_residual < 1e-12);
        let single = m(2, vec![vec![1.0, 2.0]], vec![1.0]);
        assert_eq!(lambda1_exact(&single, 1e-6).unwrap().0, 0.0);
    }

    #[test]
    fn cross_polytope_d2() {
        let cp = crate::measure::cross_polytope_measure::<f64>(2).unwrap();
        let (l, cert) = lambda1_exact(&cp, 1e-9).unwrap();
        assert!((l - 1.0 / (2f64.sqrt() + 1.0)).abs() < 1e-7, "{l}");
        assert!(cert.lower_bound <= cert.value);
    }

    #[test]
    fn q1_zero_recovers_diameter_bound() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-0.3, 2.0]];
        let mm = m(2, pts, vec![0.2, 0.5, 0.3]);
        let b = lambda1_upper_from_q1(&mm, |_, _| vec![0.0, 0.0]).unwrap();
        assert!((b - mm.diameter() / mm.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn q1_difference_field_on_two_points() {
        let two = m(1, vec![vec![0.0], vec![3.0]], vec![1.0, 2.0]);
        let x = [0.0, 3.0];
        let b = lambda1_upper_from_q1(&two, |i, j| vec![x[i] - x[j]]).unwrap();
        // q = 2(x - y) - (x - y) = x - y once the averages are removed
        assert!((b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn q1_must_be_antisymmetric() {
        let two = m(1, vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]);
        assert!(lambda1_upper_from_q1(&two, |_, _| vec![1.0]).is_err());
        assert!(lambda1_upper_from_q1(&two, |i, _| vec![i as f64]).is_err());
    }
}
