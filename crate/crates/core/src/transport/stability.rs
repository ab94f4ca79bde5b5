//! Empirical checks of the transport stability inequalities for the
//! clustering functional. Each inequality is a theorem, so on valid input a
//! report with `holds = false` indicates a bug (or an inaccurate solve).

use serde::Serialize;

use super::{equal_weight_supports, w1};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::scalar::{vec, Scalar};
use crate::solver::{default_fuse_tol, fuse_labels, minimize, SolverOptions, SolverResult};

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ValueStabilityReport<T> {
    /// `|inf J_μ - inf J_ν|`.
    pub lhs: T,
    /// `4 M W₁(μ, ν)`.
    pub rhs: T,
    pub w1: T,
    pub tol: T,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct MinimizerStabilityReport<T> {
    /// `Σ π_ij |u_μ(x_i) - u_ν(y_j)|²` over the optimal `W₁` matching.
    pub lhs: T,
    /// `16 M W₁(μ, ν)`.
    pub rhs: T,
    pub w1: T,
    pub tol: T,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ShatteringStabilityReport<T> {
    /// Smallest gap between the values of `u_μ`.
    pub delta1: T,
    /// Smallest atom mass of `ν`.
    pub delta2: T,
    pub w1: T,
    /// `δ₁² δ₂ / (32 M)`.
    pub bound: T,
    pub hypothesis_met: bool,
    /// Only evaluated when the hypothesis holds.
    pub nu_shattered: Option<bool>,
    /// `true` unless the hypothesis holds and `ν` is not shattered.
    pub holds: bool,
}

fn check_probability<T: Scalar>(m: &DiscreteMeasure<T>, radius: T, name: &str) -> Result<()> {
    if (m.total_mass() - T::one()).abs() > T::c(1e-9) {
        return Err(Error::Domain(format!("{name} must be a probability measure")));
    }
    if m.max_norm() > radius * (T::one() + T::c(1e-12)) {
        return Err(Error::Domain(format!(
            "support of {name} leaves the ball of radius {radius}"
        )));
    }
    Ok(())
}

fn check_inputs<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, lambda: T, radius: T) -> Result<()> {
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if !(radius > T::zero() && radius.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    check_probability(mu, radius, "mu")?;
    check_probability(nu, radius, "nu")
}

/// Slack granted to solver inaccuracy, in units of `M²`.
fn slack<T: Scalar>(radius: T) -> T {
    T::c(1e-6) * radius.max(T::one()).powi(2)
}

fn solve<T: Scalar>(m: &DiscreteMeasure<T>, lambda: T) -> Result<SolverResult<T>> {
    let r = minimize(m, lambda, &SolverOptions::for_scalar::<T>())?;
    if !r.converged {
        return Err(Error::Numeric(format!(
            "solver did not converge at lambda = {lambda} (residuals {}, {})",
            r.residuals.primal, r.residuals.dual
        )));
    }
    Ok(r)
}

/// `|inf J_{μ,λ} - inf J_{ν,λ}| ≤ 4 M W₁(μ, ν)` for probability measures on
/// `B_M(0)`.
pub fn check_value_stability<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    lambda: T,
    radius: T,
) -> Result<ValueStabilityReport<T>> {
    check_inputs(mu, nu, lambda, radius)?;
    let (w, _) = w1(mu, nu)?;
    let (a, b) = (solve(mu, lambda)?, solve(nu, lambda)?);
    let lhs = (a.objective - b.objective).abs();
    let rhs = T::c(4.0) * radius * w;
    let tol = slack(radius);
    Ok(ValueStabilityReport {
        lhs,
        rhs,
        w1: w,
        tol,
        holds: lhs <= rhs + tol,
    })
}

/// `∫ |u_μ(x) - u_ν(x̃)|² dπ ≤ 16 M W₁(μ, ν)` along the optimal matching, for
/// equal-size, equal-weight supports.
pub fn check_minimizer_stability<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    lambda: T,
    radius: T,
) -> Result<MinimizerStabilityReport<T>> {
    check_inputs(mu, nu, lambda, radius)?;
    if !equal_weight_supports(mu, nu) {
        return Err(Error::UnsupportedShape(
            "minimiser stability needs equal-size, equal-weight supports".into(),
        ));
    }
    let (w, plan) = w1(mu, nu)?;
    let (a, b) = (solve(mu, lambda)?, solve(nu, lambda)?);
    let lhs = plan
        .support()
        .into_iter()
        .map(|(i, j, p)| p * vec::dist2(&a.u_values[i], &b.u_values[j]))
        .sum();
    let rhs = T::c(16.0) * radius * w;
    let tol = slack(radius);
    Ok(MinimizerStabilityReport {
        lhs,
        rhs,
        w1: w,
        tol,
        holds: lhs <= rhs + tol,
    })
}

fn is_injective<T: Scalar>(m: &DiscreteMeasure<T>, r: &SolverResult<T>) -> bool {
    let labels = fuse_labels(&r.u_flat(), m.dim(), default_fuse_tol(m));
    labels.iter().enumerate().all(|(i, &l)| l == i)
}

/// If `μ` is `λ`-shattered and `W₁(μ, ν) < δ₁² δ₂ / (32 M)`, then `ν` is
/// `λ`-shattered too. `μ` must be shattered; otherwise this is an error.
pub fn check_shattering_stability<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    lambda: T,
    radius: T,
) -> Result<ShatteringStabilityReport<T>> {
    check_inputs(mu, nu, lambda, radius)?;
    let a = solve(mu, lambda)?;
    if !is_injective(mu, &a) {
        return Err(Error::Domain(format!("mu is not shattered at lambda = {lambda}")));
    }
    let n = mu.len();
    let mut delta1 = T::infinity();
    for i in 0..n {
        for j in i + 1..n {
            delta1 = delta1.min(vec::dist(&a.u_values[i], &a.u_values[j]));
        }
    }
    let delta2 = nu.weights().iter().fold(T::infinity(), |m, &w| m.min(w));
    let (w, _) = w1(mu, nu)?;
    let bound = delta1 * delta1 * delta2 / (T::c(32.0) * radius);
    let hypothesis_met = w < bound;
    let nu_shattered = if hypothesis_met {
        Some(is_injective(nu, &solve(nu, lambda)?))
    } else {
        None
    };
    Ok(ShatteringStabilityReport {
        delta1,
        delta2,
        w1: w,
        bound,
        hypothesis_met,
        nu_shattered,
        holds: nu_shattered != Some(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points(shift: f64) -> DiscreteMeasure<f64> {
        DiscreteMeasure::new(1, vec![vec![-1.0], vec![1.0 - shift]], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn identical_measures() {
        let m = two_points(0.0);
        let v = check_value_stability(&m, &m, 0.5, 1.0).unwrap();
        assert_eq!(v.rhs, 0.0);
        assert!(v.lhs <= 1e-12 && v.holds);
        let s = check_minimizer_stability(&m, &m, 0.5, 1.0).unwrap();
        assert!(s.lhs <= 1e-12 && s.holds);
        let r = check_shattering_stability(&m, &m, 0.5, 1.0).unwrap();
        assert!(r.hypothesis_met && r.nu_shattered == Some(true));
    }

    #[test]
    fn shattering_survives_small_jitter() {
        let mu = two_points(0.0);
        let nu = two_points(1e-4);
        let r = check_shattering_stability(&mu, &nu, 0.5, 1.0).unwrap();
        // u = ±(1 - λ/2), so δ₁ = 1.5 and the bound is 1.5² · 0.5 / 32
        assert!((r.delta1 - 1.5).abs() < 1e-6);
        assert!((r.bound - 2.25 * 0.5 / 32.0).abs() < 1e-6);
        assert!(r.hypothesis_met);
        assert_eq!(r.nu_shattered, Some(true));
        let far = two_points(0.5);
        let r = check_shattering_stability(&mu, &far, 0.5, 1.0).unwrap();
        assert!(!r.hypothesis_met && r.nu_shattered.is_none() && r.holds);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mu = two_points(0.0);
        assert!(check_value_stability(&mu, &mu, 0.5, 0.5).is_err());
        let heavy = DiscreteMeasure::new(1, vec![vec![0.0]], vec![2.0]).unwrap();
        assert!(check_value_stability(&heavy, &heavy, 0.5, 1.0).is_err());
        assert!(check_shattering_stability(&mu, &mu, 5.0, 1.0).is_err());
    }
}
