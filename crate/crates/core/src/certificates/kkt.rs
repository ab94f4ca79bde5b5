//! Certificates of optimality for solver output.
//!
//! `u` minimises `J_{μ,λ}` iff there is an antisymmetric `w` with `|w| ≤ 1`,
//! `w(i, j) = sgn(u_i - u_j)` whenever `u_i ≠ u_j`, and
//! `x_i - u_i = λ Σ_j a_j w(i, j)` for every atom. Across clusters `w` is
//! forced; inside each cluster it is found by alternating projections.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::pairs::{feasible_pair_field, max_pair_norm, pairs, PairField, RowSumOperator};
use crate::partition::Partition;
use crate::scalar::{vec, Scalar};
use crate::solver::SolverResult;

const DEFAULT_BUDGET: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CertificateResiduals<T> {
    pub max_norm: T,
    pub stationarity_residual: T,
    pub sign_residual: T,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct KktCertificate<T> {
    pub w: PairField<T>,
    pub max_norm: T,
    /// `max_i |x_i - u_i - λ Σ_j a_j w(i, j)|`.
    pub stationarity_residual: T,
    /// `max |w(i, j) - sgn(u_i - u_j)|` over pairs in different clusters.
    pub sign_residual: T,
    pub tol: T,
    /// `max_norm ≤ 1 + tol` and both residuals `≤ tol`.
    pub valid: bool,
}

fn sgn<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let diff: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let n = vec::norm(&diff);
    if n > T::zero() {
        diff.into_iter().map(|v| v / n).collect()
    } else {
        diff
    }
}

fn check_shapes<T: Scalar>(m: &DiscreteMeasure<T>, u: &[Vec<T>], p: &Partition<T>) -> Result<()> {
    if u.len() != m.len() {
        return Err(Error::SizeMismatch {
            expected: m.len(),
            got: u.len(),
        });
    }
    if let Some(bad) = u.iter().find(|v| v.len() != m.dim()) {
        return Err(Error::DimensionMismatch(m.dim(), bad.len()));
    }
    if p.len() != m.len() {
        return Err(Error::SizeMismatch {
            expected: m.len(),
            got: p.len(),
        });
    }
    Ok(())
}

/// Residuals of a candidate witness `w` for the map `u` under partition `p`.
pub fn check_certificate<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambda: T,
    u: &[Vec<T>],
    p: &Partition<T>,
    w: &PairField<T>,
) -> Result<CertificateResiduals<T>> {
    check_shapes(m, u, p)?;
    let n = m.len();
    let d = m.dim();
    if w.atoms() != n || w.dim() != d {
        return Err(Error::SizeMismatch {
            expected: n,
            got: w.atoms(),
        });
    }
    let mut acc = vec![T::zero(); n * d];
    let mut sign_residual = T::zero();
    for (i, j) in pairs(n) {
        let wij = w.upper(i, j);
        for k in 0..d {
            acc[i * d + k] = acc[i * d + k] + m.weight(j) * wij[k];
            acc[j * d + k] = acc[j * d + k] - m.weight(i) * wij[k];
        }
        if p.label(i) != p.label(j) {
            let s = sgn(&u[i], &u[j]);
            let gap = if vec::norm(&s) == T::zero() {
                // distinct clusters must carry distinct values
                T::one()
            } else {
                vec::dist(wij, &s)
            };
            sign_residual = sign_residual.max(gap);
        }
    }
    let mut stationarity = T::zero();
    for i in 0..n {
        let x = m.point(i);
        let r: T = (0..d)
            .map(|k| {
                let v = x[k] - u[i][k] - lambda * acc[i * d + k];
                v * v
            })
            .sum::<T>()
            .sqrt();
        stationarity = stationarity.max(r);
    }
    Ok(CertificateResiduals {
        max_norm: w.max_norm(),
        stationarity_residual: stationarity,
        sign_residual,
    })
}

/// Builds and checks a KKT witness for `r` with clusters `p`.
///
/// An infeasible within-cluster system is not an error: the certificate is
/// returned with its residuals and `valid = false`.
pub fn verify_kkt<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambda: T,
    r: &SolverResult<T>,
    p: &Partition<T>,
    tol: T,
) -> Result<KktCertificate<T>> {
    verify_kkt_with_budget(m, lambda, r, p, tol, DEFAULT_BUDGET)
}

pub fn verify_kkt_with_budget<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambda: T,
    r: &SolverResult<T>,
    p: &Partition<T>,
    tol: T,
    max_iter: usize,
) -> Result<KktCertificate<T>> {
    let u = &r.u_values;
    check_shapes(m, u, p)?;
    if !(lambda >= T::zero() && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    if !(tol > T::zero()) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let n = m.len();
    let d = m.dim();
    let mut w = PairField::zeros(n, d);
    for (i, j) in pairs(n) {
        if p.label(i) != p.label(j) {
            w.upper_mut(i, j).copy_from_slice(&sgn(&u[i], &u[j]));
        }
    }

    if lambda > T::zero() {
        for k in 0..p.num_clusters() {
            let members = p.members(k);
            if members.len() < 2 {
                continue;
            }
            // right-hand side with the forced cross-cluster part moved over
            let mut b = Vec::with_capacity(members.len() * d);
            for &i in &members {
                let mut ri: Vec<T> = (0..d).map(|c| m.point(i)[c] - u[i][c]).collect();
                for j in 0..n {
                    if p.label(j) == k {
                        continue;
                    }
                    let wij = w.get(i, j);
                    for c in 0..d {
                        ri[c] = ri[c] - lambda * m.weight(j) * wij[c];
                    }
                }
                b.extend(ri.into_iter().map(|v| v / lambda));
            }
            let op = RowSumOperator::new(members.iter().map(|&i| m.weight(i)).collect(), d);
            let out = feasible_pair_field(&op, &b, T::one(), T::c(0.5) * tol / lambda, max_iter);
            let use_affine = lambda * out.ball_residual > tol
                && max_pair_norm(&out.affine_point, d) <= T::one() + tol;
            let local = if use_affine { &out.affine_point } else { &out.ball_point };
            for (q, (a, c)) in pairs(members.len()).enumerate() {
                w.upper_mut(members[a], members[c])
                    .copy_from_slice(&local[q * d..(q + 1) * d]);
            }
        }
    }

    let res = check_certificate(m, lambda, u, p, &w)?;
    let valid = res.max_norm <= T::one() + tol
        && res.stationarity_residual <= tol
        && res.sign_residual <= tol;
    Ok(KktCertificate {
        w,
        max_norm: res.max_norm,
        stationarity_residual: res.stationarity_residual,
        sign_residual: res.sign_residual,
        tol,
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{extract_partition, minimize, Residuals, SolverOptions};

    fn two_points() -> DiscreteMeasure<f64> {
        DiscreteMeasure::new(1, vec![vec![0.0], vec![1.0]], vec![0.5, 0.5]).unwrap()
    }

    fn result(lambda: f64, u: &[f64]) -> SolverResult<f64> {
        SolverResult {
            lambda,
            objective: 0.0,
            u_values: u.iter().map(|&v| vec![v]).collect(),
            converged: true,
            iterations: 0,
            residuals: Residuals { primal: 0.0, dual: 0.0 },
        }
    }

    #[test]
    fn split_two_points() {
        let m = two_points();
        let r = result(0.5, &[0.25, 0.75]);
        let p = extract_partition(&m, &r, 1e-4).unwrap();
        let c = verify_kkt(&m, 0.5, &r, &p, 1e-9).unwrap();
        assert_eq!(c.w.upper(0, 1), &[-1.0]);
        assert!(c.stationarity_residual < 1e-15);
        assert!(c.valid);
    }

    #[test]
    fn fused_two_points() {
        let m = two_points();
        let r = result(2.0, &[0.5, 0.5]);
        let p = extract_partition(&m, &r, 1e-4).unwrap();
        let c = verify_kkt(&m, 2.0, &r, &p, 1e-9).unwrap();
        assert!((c.w.upper(0, 1)[0] + 0.5).abs() < 1e-9);
        assert!(c.stationarity_residual < 1e-9);
        assert!(c.valid);
    }

    #[test]
    fn identity_is_rejected_at_large_lambda() {
        let m = two_points();
        let r = result(2.0, &[0.0, 1.0]);
        let p = extract_partition(&m, &r, 1e-4).unwrap();
        let c = verify_kkt(&m, 2.0, &r, &p, 1e-6).unwrap();
        assert_eq!(c.w.upper(0, 1), &[-1.0]);
        assert!((c.stationarity_residual - 1.0).abs() < 1e-12);
        assert!(!c.valid);
    }

    #[test]
    fn solver_output_is_certified() {
        let m = DiscreteMeasure::<f64>::unit_weights(
            2,
            vec![
                vec![0.0, 0.0],
                vec![0.1, 0.0],
                vec![0.0, 0.2],
                vec![3.0, 3.0],
                vec![3.1, 2.9],
            ],
        )
        .unwrap();
        for &lambda in &[0.01, 0.05, 0.3, 2.0] {
            let r = minimize(&m, lambda, &SolverOptions::default()).unwrap();
            let p = extract_partition(&m, &r, 1e-6 * m.diameter()).unwrap();
            let c = verify_kkt(&m, lambda, &r, &p, 1e-5).unwrap();
            assert!(c.valid, "lambda={lambda}: {:?}", (c.max_norm, c.stationarity_residual, c.sign_residual));
        }
    }
}
