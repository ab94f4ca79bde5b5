//! Closed-form thresholds for symmetric geometries and the constants behind
//! them, with a Monte-Carlo oracle for the mean pairwise distance in a ball.
//!
//! Factorial ratios are evaluated in log space so that everything stays
//! finite up to `d = 200`.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::sampling::{stream_rng, unit_ball_point};

fn ln_fact(n: f64) -> f64 {
    libm::lgamma(n + 1.0)
}

fn check_d(d: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(Error::Domain(format!("dimension must be at least {min}, got {d}")));
    }
    Ok(())
}

/// Log of the factorial bracket shared by `γ_d` and `β_d`; the two constants
/// use it with opposite signs, so `γ_d β_d` is exact up to rounding.
fn ln_bracket(d: usize) -> f64 {
    let df = d as f64;
    if d % 2 == 0 {
        (df + 1.0).ln() + ln_fact(2.0 * df) + PI.ln()
            - 3.0 * df * 2f64.ln()
            - 2.0 * ln_fact(df / 2.0)
            - ln_fact(df)
    } else {
        (df + 1.0).ln() + 2.0 * ln_fact((df - 1.0) / 2.0) + ln_fact(2.0 * df)
            - df * 2f64.ln()
            - 3.0 * ln_fact(df)
    }
}

/// `γ_d`, the lower bound on `λ₁ μ(R^d)` for the uniform unit ball; also the
/// critical separation of the two-ball model.
pub fn gamma_d(d: usize) -> Result<f64> {
    check_d(d, 1)?;
    let df = d as f64;
    Ok((2.0 * df + 1.0) / (2.0 * df + 4.0) * ln_bracket(d).exp())
}

/// Deviation of `γ_{d+2}/γ_d` from `1 + (7d+13)/((d+1)(2d+4)(2d+8))`.
pub fn gamma_ratio_check(d: usize) -> f64 {
    let d = d.max(1);
    let df = d as f64;
    let ratio = gamma_d(d + 2).unwrap() / gamma_d(d).unwrap();
    (ratio - (1.0 + (7.0 * df + 13.0) / ((df + 1.0) * (2.0 * df + 4.0) * (2.0 * df + 8.0)))).abs()
}

/// Mean distance `E|X - Y|` for `X, Y` independent uniform on `B_1(0)`.
pub fn beta_d(d: usize) -> Result<f64> {
    check_d(d, 1)?;
    let df = d as f64;
    Ok(2.0 * df / (2.0 * df + 1.0) * 2.0 * (-ln_bracket(d)).exp())
}

/// `λ₁ μ(R^d)` for the uniform measure on `S^{d-1}`:
/// `Γ(d-½) Γ((d-1)/2) / (Γ(d-1) Γ(d/2))`.
pub fn lambda1_sphere_mass(d: usize) -> Result<f64> {
    check_d(d, 2)?;
    let df = d as f64;
    let lg = libm::lgamma;
    Ok((lg(df - 0.5) + lg((df - 1.0) / 2.0) - lg(df - 1.0) - lg(df / 2.0)).exp())
}

/// `λ₁ μ(R^d)` for unit masses on the `2d` vertices `±e_k`.
pub fn lambda1_crosspolytope_mass(d: usize) -> Result<f64> {
    check_d(d, 1)?;
    let df = d as f64;
    Ok(2.0 * df / ((df - 1.0) * SQRT_2 + 1.0))
}

/// `|x₁ - x₀| / (a₀ + a₁)` for a two-atom measure.
pub fn lambda1_two_points(x0: &[f64], x1: &[f64], a0: f64, a1: f64) -> Result<f64> {
    if x0.len() != x1.len() {
        return Err(Error::DimensionMismatch(x0.len(), x1.len()));
    }
    if !(a0 > 0.0 && a1 > 0.0 && a0.is_finite() && a1.is_finite()) {
        return Err(Error::InvalidMeasure("weights must be positive and finite".into()));
    }
    let dist = x0.iter().zip(x1).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(dist / (a0 + a1))
}

/// `(γ_d, 2^{1-1/d})`, which bracket `λ₁ μ(R^d)` for the uniform unit ball.
pub fn ball_lambda1_bounds_mass(d: usize) -> Result<(f64, f64)> {
    Ok((gamma_d(d)?, ball_upper(d)?))
}

fn ball_upper(d: usize) -> Result<f64> {
    check_d(d, 1)?;
    Ok(2f64.powf(1.0 - 1.0 / d as f64))
}

/// Surface area `α_{d-1} = 2 π^{d/2} / Γ(d/2)` of `S^{d-1}`.
pub fn sphere_area(d: usize) -> Result<f64> {
    check_d(d, 1)?;
    let df = d as f64;
    Ok((2f64.ln() + df / 2.0 * PI.ln() - libm::lgamma(df / 2.0)).exp())
}

/// `λ₁ = 2/α_{d-1}` for the density `|x|^{-(d-1)}` on `B_R(0)`, with the
/// total mass normalised to `½ α_{d-1} R`. Independent of `R`.
pub fn lambda1_power_law_ball(d: usize, radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    Ok(2.0 / sphere_area(d)?)
}

/// The total mass the power-law ball is normalised to.
pub fn power_law_ball_mass(d: usize, radius: f64) -> Result<f64> {
    Ok(0.5 * sphere_area(d)? * radius)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

const MC_CHUNKS: usize = 64;

/// Monte-Carlo `E|X - Y|` over `B_1(0)` with its standard error.
///
/// The pairs are split over a fixed number of independent streams, so the
/// estimate depends only on `(d, n_pairs, seed)`.
pub fn mc_mean_pairwise_distance_with_error(d: usize, n_pairs: usize, seed: u64) -> Result<McEstimate> {
    check_d(d, 1)?;
    if n_pairs == 0 {
        return Err(Error::Domain("need at least one pair".into()));
    }
    let per = n_pairs.div_ceil(MC_CHUNKS);
    let sums: Vec<(f64, f64, usize)> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|c| {
            let count = per.min(n_pairs.saturating_sub(c * per));
            let mut rng = stream_rng(seed, 1000 + c as u64);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let x = unit_ball_point(&mut rng, d);
                let y = unit_ball_point(&mut rng, d);
                let r = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                s += r;
                s2 += r * r;
            }
            (s, s2, count)
        })
        .collect();
    let (s, s2, n) = sums
        .into_iter()
        .fold((0.0, 0.0, 0), |acc, v| (acc.0 + v.0, acc.1 + v.1, acc.2 + v.2));
    let nf = n as f64;
    let mean = s / nf;
    let var = if n > 1 { (s2 - nf * mean * mean) / (nf - 1.0) } else { 0.0 };
    Ok(McEstimate {
        mean,
        std_error: (var.max(0.0) / nf).sqrt(),
        samples: n,
    })
}

pub fn mc_mean_pairwise_distance(d: usize, n_pairs: usize, seed: u64) -> Result<f64> {
    Ok(mc_mean_pairwise_distance_with_error(d, n_pairs, seed)?.mean)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub d: usize,
    pub gamma_d: f64,
    pub beta_d: f64,
    pub ball_upper: f64,
    /// `None` for `d = 1`, where the sphere is two points.
    pub sphere_lambda1_mass: Option<f64>,
    pub crosspolytope_lambda1_mass: f64,
    pub alpha_dminus1: f64,
}

impl ConstantsTable {
    pub fn new(d: usize) -> Result<Self> {
        Ok(Self {
            d,
            gamma_d: gamma_d(d)?,
            beta_d: beta_d(d)?,
            ball_upper: ball_upper(d)?,
            sphere_lambda1_mass: if d >= 2 { Some(lambda1_sphere_mass(d)?) } else { None },
            crosspolytope_lambda1_mass: lambda1_crosspolytope_mass(d)?,
            alpha_dminus1: sphere_area(d)?,
        })
    }

    /// Aligned `name value` lines.
    pub fn to_text(&self) -> String {
        let rows: [(&str, Option<f64>); 7] = [
            ("d", Some(self.d as f64)),
            ("gamma_d", Some(self.gamma_d)),
            ("beta_d", Some(self.beta_d)),
            ("ball_upper", Some(self.ball_upper)),
            ("sphere_lambda1_mass", self.sphere_lambda1_mass),
            ("crosspolytope_lambda1_mass", Some(self.crosspolytope_lambda1_mass)),
            ("alpha_dminus1", Some(self.alpha_dminus1)),
        ];
        let mut out = String::new();
        for (name, v) in rows {
            let v = match v {
                Some(v) if name == "d" => format!("{}", v as usize),
                Some(v) => format!("{v:.12}"),
                None => "-".to_string(),
            };
            out.push_str(&format!("{name:<28}{v}\n"));
        }
        out
    }
}
