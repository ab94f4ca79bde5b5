//! Bisection estimates of `λ₁` and `λ*`, detection intervals and the split
//! condition.
//!
//! Conventions at the boundary: a measure counts as cohesive at `λ₁` itself
//! (closed at the top) and as shattered only strictly below `λ*`.

use rayon::prelude::*;
use serde::Serialize;

use super::cohesion::{lambda1_bounds, lambda1_exact};
use super::Threshold;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::pairs::pairs;
use crate::partition::Partition;
use crate::scalar::{vec, Scalar};
use crate::solver::{default_fuse_tol, extract_partition, minimize, SolverOptions};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct BisectionEstimate<T> {
    /// Midpoint of the final bracket.
    pub value: Threshold<T>,
    pub lower: T,
    pub upper: Threshold<T>,
    /// Solver calls spent.
    pub evaluations: usize,
    /// Some probe could not be classified even after tightening the fuse
    /// tolerance; the bracket was left wider than requested.
    pub ambiguous: bool,
    /// Repeated atoms: `λ* = 0` by convention.
    pub degenerate: bool,
}

impl<T: Scalar> BisectionEstimate<T> {
    fn exact(v: Threshold<T>, degenerate: bool) -> Self {
        let lower = v.finite().unwrap_or_else(T::zero);
        Self {
            value: v,
            lower,
            upper: v,
            evaluations: 0,
            ambiguous: false,
            degenerate,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Yes,
    No,
    Unsure,
}

fn classify<T: Scalar>(
    m: &DiscreteMeasure<T>,
    lambda: T,
    opts: &SolverOptions,
    fuse: T,
    test: fn(&Partition<T>) -> bool,
    evals: &mut usize,
) -> Result<Verdict> {
    let ten = T::c(10.0);
    let r = minimize(m, lambda, opts)?;
    *evals += 1;
    let a = test(&extract_partition(m, &r, fuse)?);
    let b = test(&extract_partition(m, &r, fuse / ten)?);
    if a == b {
        return Ok(if a { Verdict::Yes } else { Verdict::No });
    }
    // fuse tolerance matters here: solve tighter and look again one decade down
    let tight = SolverOptions {
        primal_tol: opts.primal_tol * 1e-2,
        dual_tol: opts.dual_tol * 1e-2,
        max_iters: opts.max_iters * 2,
        ..opts.clone()
    };
    let r = minimize(m, lambda, &tight)?;
    *evals += 1;
    let a = test(&extract_partition(m, &r, fuse / ten)?);
    let b = test(&extract_partition(m, &r, fuse / (ten * ten))?);
    Ok(match (a, b) {
        (true, true) => Verdict::Yes,
        (false, false) => Verdict::No,
        _ => Verdict::Unsure,
    })
}

fn trivial<T: Scalar>(p: &Partition<T>) -> bool {
    p.is_trivial()
}

fn discrete<T: Scalar>(p: &Partition<T>) -> bool {
    p.is_discrete()
}

/// Whether the minimiser at `λ` is constant (default fuse tolerance).
pub fn is_cohesive<T: Scalar>(m: &DiscreteMeasure<T>, lambda: T, opts: &SolverOptions) -> Result<bool> {
    let r = minimize(m, lambda, opts)?;
    Ok(extract_partition(m, &r, default_fuse_tol(m))?.is_trivial())
}

/// Whether the minimiser at `λ` is injective (default fuse tolerance).
pub fn is_shattered<T: Scalar>(m: &DiscreteMeasure<T>, lambda: T, opts: &SolverOptions) -> Result<bool> {
    let r = minimize(m, lambda, opts)?;
    Ok(extract_partition(m, &r, default_fuse_tol(m))?.is_discrete())
}

/// Bisection on `[lo, hi]` for the switch of a monotone predicate; `rising`
/// means the predicate holds above the threshold.
fn bisect<T: Scalar>(
    m: &DiscreteMeasure<T>,
    mut lo: T,
    mut hi: T,
    tol: T,
    opts: &SolverOptions,
    test: fn(&Partition<T>) -> bool,
    rising: bool,
) -> Result<BisectionEstimate<T>> {
    let fuse = default_fuse_tol(m);
    let half = T::c(0.5);
    let mut evals = 0;
    let mut ambiguous = false;
    while hi - lo > tol {
        let mid = lo + half * (hi - lo);
        if !(mid > lo && mid < hi) {
            break;
        }
        match classify(m, mid, opts, fuse, test, &mut evals)? {
            Verdict::Yes if rising => hi = mid,
            Verdict::No if rising => lo = mid,
            Verdict::Yes => lo = mid,
            Verdict::No => hi = mid,
            Verdict::Unsure => {
                ambiguous = true;
                break;
            }
        }
    }
    Ok(BisectionEstimate {
        value: Threshold::Finite(lo + half * (hi - lo)),
        lower: lo,
        upper: Threshold::Finite(hi),
        evaluations: evals,
        ambiguous,
        degenerate: false,
    })
}

fn check_tol<T: Scalar>(tol: T) -> Result<()> {
    if !(tol > T::zero()) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    Ok(())
}

/// `λ₁` by bisection on "the minimiser is constant", starting from
/// `[R(μ)/mass, diam/mass]`.
pub fn lambda1_bisect<T: Scalar>(
    m: &DiscreteMeasure<T>,
    tol: T,
    opts: &SolverOptions,
) -> Result<BisectionEstimate<T>> {
    check_tol(tol)?;
    if m.len() == 1 {
        return Ok(BisectionEstimate::exact(Threshold::Finite(T::zero()), false));
    }
    let (lo, hi) = lambda1_bounds(m);
    bisect(m, lo, hi, tol, opts, trivial, true)
}

/// `λ*` by bisection on "the minimiser is injective". A single atom gives
/// [`Threshold::Unbounded`]; repeated atoms give `0`, flagged `degenerate`.
pub fn lambda_star_bisect<T: Scalar>(
    m: &DiscreteMeasure<T>,
    tol: T,
    opts: &SolverOptions,
) -> Result<BisectionEstimate<T>> {
    check_tol(tol)?;
    if m.len() == 1 {
        return Ok(BisectionEstimate::exact(Threshold::Unbounded, false));
    }
    if m.has_duplicate_atoms() {
        return Ok(BisectionEstimate::exact(Threshold::Finite(T::zero()), true));
    }
    // a shattered measure has |x_i - x_j| > λ (a_i + a_j) for every pair
    let mut hi = m.diameter() / m.total_mass();
    for (i, j) in pairs(m.len()) {
        hi = hi.min(vec::dist(m.point(i), m.point(j)) / (m.weight(i) + m.weight(j)));
    }
    bisect(m, T::zero(), hi, tol, opts, discrete, false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct DetectionInterval<T> {
    /// `max_k λ₁(μ restricted to cluster k)`.
    pub lower: T,
    /// `λ*` of the consolidated measure.
    pub upper: Threshold<T>,
    pub nonempty: bool,
    pub per_cluster_lambda1: Vec<T>,
}

fn per_cluster_lambda1<T: Scalar>(m: &DiscreteMeasure<T>, p: &Partition<T>, tol: T) -> Result<Vec<T>> {
    if p.len() != m.len() {
        return Err(Error::SizeMismatch {
            expected: m.len(),
            got: p.len(),
        });
    }
    p.subsets()
        .par_iter()
        .map(|s| lambda1_exact(&m.restrict(s)?, tol).map(|(l, _)| l))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// The interval of `λ` on which the clusters of `p` are exactly the
/// sum-of-norms clusters.
pub fn detection_interval<T: Scalar>(
    m: &DiscreteMeasure<T>,
    p: &Partition<T>,
    tol: T,
    opts: &SolverOptions,
) -> Result<DetectionInterval<T>> {
    check_tol(tol)?;
    let per = per_cluster_lambda1(m, p, tol)?;
    let lower = per.iter().copied().fold(T::zero(), T::max);
    let upper = lambda_star_bisect(&m.consolidate(p)?, tol, opts)?.value;
    Ok(DetectionInterval {
        lower,
        upper,
        nonempty: upper.exceeds(lower),
        per_cluster_lambda1: per,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SplitReport<T> {
    pub lambda: T,
    /// `λ` lies strictly below the certified part of the `λ*` bracket of the
    /// consolidated measure.
    pub shattered_ok: bool,
    /// `λ` is at least the certified upper bound on every cluster's `λ₁`.
    pub cohesive_ok: bool,
    pub per_cluster_lambda1: Vec<T>,
    pub lambda_star: Threshold<T>,
}

impl<T> SplitReport<T> {
    /// Both halves hold, so the clusters at `λ` should be exactly `p`.
    pub fn predicts_partition(&self) -> bool {
        self.shattered_ok && self.cohesive_ok
    }
}

/// Checks whether the clusters of `p` are the sum-of-norms clusters at `λ`:
/// the consolidated measure is `λ`-shattered and every cluster is
/// `λ`-cohesive.
pub fn check_split_condition<T: Scalar>(
    m: &DiscreteMeasure<T>,
    p: &Partition<T>,
    lambda: T,
    tol: T,
    opts: &SolverOptions,
) -> Result<SplitReport<T>> {
    check_tol(tol)?;
    if p.len() != m.len() {
        return Err(Error::SizeMismatch {
            expected: m.len(),
            got: p.len(),
        });
    }
    let scale = m.diameter().max(T::one());
    if let Some(sep) = p.min_centroid_separation() {
        if sep <= T::c(1e-12) * scale {
            return Err(Error::Regularity("two clusters share a centroid".into()));
        }
    }
    let per = per_cluster_lambda1(m, p, tol)?;
    let star = lambda_star_bisect(&m.consolidate(p)?, tol, opts)?;
    let shattered_ok = match star.upper {
        Threshold::Unbounded => true,
        Threshold::Finite(_) => lambda < star.lower,
    };
    Ok(SplitReport {
        lambda,
        shattered_ok,
        cohesive_ok: per.iter().all(|&l| lambda >= l),
        per_cluster_lambda1: per,
        lambda_star: star.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(a0: f64, a1: f64, dist: f64) -> DiscreteMeasure<f64> {
        DiscreteMeasure::new(1, vec![vec![0.0], vec![dist]], vec![a0, a1]).unwrap()
    }

    #[test]
    fn two_point_thresholds() {
        let opts = SolverOptions::default();
        let m = two(0.5, 0.5, 1.0);
        let l1 = lambda1_bisect(&m, 1e-6, &opts).unwrap();
        assert!((l1.value.to_f64() - 1.0).abs() < 1e-5, "{l1:?}");
        let m = two(1.0, 2.0, 3.0);
        let ls = lambda_star_bisect(&m, 1e-6, &opts).unwrap();
        assert!((ls.value.to_f64() - 1.0).abs() < 1e-5, "{ls:?}");
    }

    #[test]
    fn singleton_and_duplicates() {
        let opts = SolverOptions::default();
        let one = DiscreteMeasure::<f64>::unit_weights(1, vec![vec![0.0]]).unwrap();
        assert!(lambda_star_bisect(&one, 1e-6, &opts).unwrap().value.is_unbounded());
        assert_eq!(lambda1_bisect(&one, 1e-6, &opts).unwrap().value, Threshold::Finite(0.0));
        let dup = DiscreteMeasure::<f64>::unit_weights(1, vec![vec![0.0], vec![0.0], vec![1.0]]).unwrap();
        let e = lambda_star_bisect(&dup, 1e-6, &opts).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.value, Threshold::Finite(0.0));
    }

    #[test]
    fn detection_of_two_far_atoms() {
        let m = DiscreteMeasure::<f64>::unit_weights(1, vec![vec![0.0], vec![10.0]]).unwrap();
        let p = Partition::from_labels(&m, &[0, 1]).unwrap();
        let iv = detection_interval(&m, &p, 1e-6, &SolverOptions::default()).unwrap();
        assert_eq!(iv.lower, 0.0);
        assert!((iv.upper.to_f64() - 5.0).abs() < 1e-5);
        assert!(iv.nonempty);
        let p = Partition::from_labels(&m, &[0, 0]).unwrap();
        let iv = detection_interval(&m, &p, 1e-6, &SolverOptions::default()).unwrap();
        assert!(iv.upper.is_unbounded());
        assert!((iv.lower - 5.0).abs() < 1e-5);
    }

    #[test]
    fn split_condition_on_two_points() {
        let opts = SolverOptions::default();
        let m = two(0.5, 0.5, 1.0);
        let p = Partition::from_labels(&m, &[0, 1]).unwrap();
        let rep = check_split_condition(&m, &p, 0.5, 1e-6, &opts).unwrap();
        assert!(rep.shattered_ok && rep.cohesive_ok);
        let rep = check_split_condition(&m, &p, 1.5, 1e-6, &opts).unwrap();
        assert!(!rep.shattered_ok);
    }

    #[test]
    fn coincident_centroids_are_irregular() {
        let m = DiscreteMeasure::<f64>::unit_weights(
            1,
            vec![vec![-1.0], vec![1.0], vec![-2.0], vec![2.0]],
        )
        .unwrap();
        let p = Partition::from_labels(&m, &[0, 0, 1, 1]).unwrap();
        let e = check_split_condition(&m, &p, 0.1, 1e-6, &SolverOptions::default());
        assert!(matches!(e, Err(Error::Regularity(_))));
    }
}
