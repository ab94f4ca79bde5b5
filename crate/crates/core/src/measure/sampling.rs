//! Seeded samplers for the geometries used throughout the crate.
//!
//! Every sampler draws from a ChaCha8 stream keyed by `(seed, stream)`, so the
//! output is a pure function of its arguments on every platform. Sampling is
//! done in `f64` and converted, which keeps `f32` and `f64` draws aligned.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::DiscreteMeasure;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Deterministic generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform direction on `S^{d-1}` via a normalised Gaussian vector.
pub(crate) fn unit_direction<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-300 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

/// Uniform point of the open unit ball, polar method.
pub(crate) fn unit_ball_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let dir = unit_direction(rng, d);
    let u: f64 = rng.random();
    let rad = u.powf(1.0 / d as f64);
    dir.into_iter().map(|v| v * rad).collect()
}

fn check_dim(d: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(Error::Domain(format!("dimension must be at least {min}, got {d}")));
    }
    Ok(())
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    Ok(())
}

fn empirical<T: Scalar>(d: usize, pts: Vec<Vec<f64>>) -> Result<DiscreteMeasure<T>> {
    let n = pts.len();
    let coords = pts.into_iter().flatten().map(T::c).collect();
    let w = T::c(1.0 / n as f64);
    DiscreteMeasure::from_flat(d, coords, vec![w; n])
}

/// `N` i.i.d. uniform points on `B_1(-r e_1) ∪ B_1(r e_1)` with weight `1/N`,
/// plus the ball each point came from (0 for `-r e_1`, 1 for `+r e_1`).
pub fn sample_two_balls_labeled<T: Scalar>(
    d: usize,
    r: f64,
    n: usize,
    seed: u64,
) -> Result<(DiscreteMeasure<T>, Vec<usize>)> {
    check_dim(d, 1)?;
    check_count(n)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("ball offset must be nonnegative, got {r}")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut labels = Vec::with_capacity(n);
    let pts = (0..n)
        .map(|_| {
            let right: bool = rng.random_bool(0.5);
            let mut p = unit_ball_point(&mut rng, d);
            p[0] += if right { r } else { -r };
            labels.push(usize::from(right));
            p
        })
        .collect();
    Ok((empirical(d, pts)?, labels))
}

pub fn sample_two_balls<T: Scalar>(
    d: usize,
    r: f64,
    n: usize,
    seed: u64,
) -> Result<DiscreteMeasure<T>> {
    sample_two_balls_labeled(d, r, n, seed).map(|(m, _)| m)
}

/// `N` i.i.d. uniform points in the unit ball.
pub fn sample_ball<T: Scalar>(d: usize, n: usize, seed: u64) -> Result<DiscreteMeasure<T>> {
    check_dim(d, 1)?;
    check_count(n)?;
    let mut rng = stream_rng(seed, 1);
    let pts = (0..n).map(|_| unit_ball_point(&mut rng, d)).collect();
    empirical(d, pts)
}

/// `N` i.i.d. uniform points on the unit sphere `S^{d-1}`, `d >= 2`.
pub fn sample_sphere<T: Scalar>(d: usize, n: usize, seed: u64) -> Result<DiscreteMeasure<T>> {
    check_dim(d, 2)?;
    check_count(n)?;
    let mut rng = stream_rng(seed, 2);
    let pts = (0..n).map(|_| unit_direction(&mut rng, d)).collect();
    empirical(d, pts)
}

/// `N` i.i.d. points with density proportional to `|x|^{-(d-1)}` on
/// `B_R(0)`: the radius is uniform on `(0, R]` and the direction uniform.
pub fn sample_power_law_ball<T: Scalar>(
    d: usize,
    radius: f64,
    n: usize,
    seed: u64,
) -> Result<DiscreteMeasure<T>> {
    check_dim(d, 1)?;
    check_count(n)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    let mut rng = stream_rng(seed, 3);
    let pts = (0..n)
        .map(|_| {
            let dir = unit_direction(&mut rng, d);
            let u: f64 = rng.random();
            let rad = radius * (1.0 - u);
            dir.into_iter().map(|v| v * rad).collect()
        })
        .collect();
    empirical(d, pts)
}

/// Unit-weight atoms at `±e_i`, ordered `e_1, -e_1, e_2, -e_2, …`.
pub fn cross_polytope_measure<T: Scalar>(d: usize) -> Result<DiscreteMeasure<T>> {
    check_dim(d, 1)?;
    let mut coords = Vec::with_capacity(2 * d * d);
    for i in 0..d {
        for sign in [T::one(), -T::one()] {
            coords.extend((0..d).map(|k| if k == i { sign } else { T::zero() }));
        }
    }
    DiscreteMeasure::from_flat(d, coords, vec![T::one(); 2 * d])
}
