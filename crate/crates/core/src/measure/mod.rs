//! Weighted discrete measures on `R^d`.

mod io;
pub mod sampling;

pub use io::{read_measure, write_measure_csv, write_measure_json, MeasureFormat};
pub use sampling::{
    cross_polytope_measure, sample_ball, sample_power_law_ball, sample_sphere, sample_two_balls,
    sample_two_balls_labeled,
};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::scalar::{vec, Scalar};

/// Sorted set of distinct atom indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSubset {
    indices: Vec<usize>,
}

impl IndexSubset {
    /// Builds a subset of `0..n`, sorting and rejecting duplicates.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("duplicate index {}", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::Domain(format!("index {last} out of range 0..{n}")));
            }
        }
        Ok(Self { indices })
    }

    pub fn all(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// A finite positive measure `sum_i a_i delta_{x_i}` on `R^d`.
///
/// Points are stored row-major in one flat buffer. Weights are arbitrary
/// positive reals, so both probability measures and unit-weight atoms are
/// representable.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T> {
    dim: usize,
    coords: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    pub fn from_flat(dim: usize, coords: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        if coords.len() != dim * weights.len() {
            return Err(Error::SizeMismatch {
                expected: dim * weights.len(),
                got: coords.len(),
            });
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > T::zero())) {
            return Err(Error::InvalidMeasure(format!(
                "weight {i} must be positive and finite, got {}",
                weights[i]
            )));
        }
        if let Some(k) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "coordinate {} of atom {} is not finite",
                k % dim,
                k / dim
            )));
        }
        Ok(Self {
            dim,
            coords,
            weights,
        })
    }

    pub fn new(dim: usize, points: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::SizeMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, weights)
    }

    /// Empirical measure: every atom receives weight `1/N`.
    pub fn empirical(dim: usize, points: Vec<Vec<T>>) -> Result<Self> {
        let n = points.len();
        let w = T::one() / T::of_usize(n.max(1));
        Self::new(dim, points, vec![w; n])
    }

    /// Every atom receives weight one.
    pub fn unit_weights(dim: usize, points: Vec<Vec<T>>) -> Result<Self> {
        let n = points.len();
        Self::new(dim, points, vec![T::one(); n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn total_mass(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Mass-weighted mean of the atoms in `s`.
    pub fn centroid(&self, s: &IndexSubset) -> Result<Vec<T>> {
        if s.is_empty() {
            return Err(Error::Domain("centroid of an empty subset".into()));
        }
        if let Some(&i) = s.indices().last() {
            if i >= self.len() {
                return Err(Error::Domain(format!("index {i} out of range")));
            }
        }
        if let [i] = s.indices() {
            return Ok(self.point(*i).to_vec());
        }
        let mut c = vec![T::zero(); self.dim];
        let mut mass = T::zero();
        for &i in s.indices() {
            let w = self.weights[i];
            mass = mass + w;
            for (ck, &xk) in c.iter_mut().zip(self.point(i)) {
                *ck = *ck + w * xk;
            }
        }
        c.iter_mut().for_each(|ck| *ck = *ck / mass);
        Ok(c)
    }

    pub fn global_centroid(&self) -> Vec<T> {
        self.centroid(&IndexSubset::all(self.len()))
            .expect("measures are nonempty")
    }

    /// Largest distance from an atom to the global centroid.
    pub fn radius(&self) -> T {
        let c = self.global_centroid();
        self.points()
            .map(|p| vec::dist(p, &c))
            .fold(T::zero(), T::max)
    }

    /// Largest pairwise distance between atoms.
    pub fn diameter(&self) -> T {
        let n = self.len();
        let mut best = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(vec::dist2(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }

    /// `max_i |x_i|`, the smallest `M` with support in the closed ball `B_M(0)`.
    pub fn max_norm(&self) -> T {
        self.points().map(vec::norm).fold(T::zero(), T::max)
    }

    /// Restriction `mu|_s`; weights are kept, not renormalised.
    pub fn restrict(&self, s: &IndexSubset) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Domain("restriction to an empty subset".into()));
        }
        let mut coords = Vec::with_capacity(s.len() * self.dim);
        let mut weights = Vec::with_capacity(s.len());
        for &i in s.indices() {
            if i >= self.len() {
                return Err(Error::Domain(format!("index {i} out of range")));
            }
            coords.extend_from_slice(self.point(i));
            weights.push(self.weights[i]);
        }
        Self::from_flat(self.dim, coords, weights)
    }

    /// Places each cluster's mass at its centroid, in ascending label order.
    pub fn consolidate(&self, p: &Partition<T>) -> Result<Self> {
        if p.len() != self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                got: p.len(),
            });
        }
        let mut coords = Vec::with_capacity(p.num_clusters() * self.dim);
        let mut weights = Vec::with_capacity(p.num_clusters());
        for k in 0..p.num_clusters() {
            let members = p.members(k);
            let s = IndexSubset { indices: members };
            coords.extend(self.centroid(&s)?);
            weights.push(s.indices().iter().map(|&i| self.weights[i]).sum());
        }
        Self::from_flat(self.dim, coords, weights)
    }

    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        Self::from_flat(self.dim, self.coords.clone(), weights)
    }

    /// Multiplies every weight by `c`.
    pub fn scale_weights(&self, c: T) -> Result<Self> {
        self.with_weights(self.weights.iter().map(|&w| w * c).collect())
    }

    /// Applies `f` to every atom location.
    pub fn map_points(&self, mut f: impl FnMut(&[T]) -> Vec<T>) -> Result<Self> {
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.points() {
            let q = f(p);
            if q.len() != self.dim {
                return Err(Error::DimensionMismatch(self.dim, q.len()));
            }
            coords.extend(q);
        }
        Self::from_flat(self.dim, coords, self.weights.clone())
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> DiscreteMeasure<U> {
        DiscreteMeasure {
            dim: self.dim,
            coords: self.coords.iter().map(|&c| U::c(c.f64())).collect(),
            weights: self.weights.iter().map(|&w| U::c(w.f64())).collect(),
        }
    }

    /// True if two atoms share a location.
    pub fn has_duplicate_atoms(&self) -> bool {
        let n = self.len();
        (0..n).any(|i| (i + 1..n).any(|j| self.point(i) == self.point(j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], ws: &[f64]) -> DiscreteMeasure<f64> {
        DiscreteMeasure::new(1, xs.iter().map(|&x| vec![x]).collect(), ws.to_vec()).unwrap()
    }

    #[test]
    fn centroid_examples() {
        let m = line(&[0.0, 1.0], &[0.5, 0.5]);
        assert_eq!(m.centroid(&IndexSubset::all(2)).unwrap(), vec![0.5]);

        let m2 = DiscreteMeasure::new(2, vec![vec![3.0, 4.0]], vec![7.0]).unwrap();
        assert_eq!(m2.centroid(&IndexSubset::all(1)).unwrap(), vec![3.0, 4.0]);

        let m3 = line(&[0.0, 1.0], &[1.0, 2.0]);
        let c = m3.centroid(&IndexSubset::all(2)).unwrap()[0];
        assert!((c - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn centroid_of_empty_subset_is_an_error() {
        let m = line(&[0.0, 1.0], &[0.5, 0.5]);
        let s = IndexSubset::new(vec![], 2).unwrap();
        assert!(matches!(m.centroid(&s), Err(Error::Domain(_))));
    }

    #[test]
    fn radius_examples() {
        assert_eq!(line(&[-1.0, 1.0], &[1.0, 1.0]).radius(), 1.0);
        assert_eq!(line(&[5.0], &[1.0]).radius(), 0.0);
        // centroid (0 + 1 + 4)/4 = 1.25, farthest atom is 0
        let m = line(&[0.0, 1.0, 2.0], &[1.0, 1.0, 2.0]);
        assert!((m.radius() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn invalid_measures_are_rejected() {
        assert!(DiscreteMeasure::<f64>::new(1, vec![vec![0.0]], vec![0.0]).is_err());
        assert!(DiscreteMeasure::<f64>::new(1, vec![vec![f64::NAN]], vec![1.0]).is_err());
        assert!(DiscreteMeasure::<f64>::new(1, vec![], vec![]).is_err());
        assert!(DiscreteMeasure::<f64>::new(2, vec![vec![0.0]], vec![1.0]).is_err());
        assert!(DiscreteMeasure::<f64>::new(1, vec![vec![0.0]], vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn index_subset_validation() {
        assert!(IndexSubset::new(vec![0, 0], 3).is_err());
        assert!(IndexSubset::new(vec![3], 3).is_err());
        assert_eq!(IndexSubset::new(vec![2, 0], 3).unwrap().indices(), &[0, 2]);
    }

    #[test]
    fn consolidate_examples() {
        let m = line(&[0.0, 1.0, 10.0, 11.0], &[1.0; 4]);
        let split = Partition::from_labels(&m, &[0, 0, 1, 1]).unwrap();
        let c = m.consolidate(&split).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.point(0), &[0.5]);
        assert_eq!(c.point(1), &[10.5]);
        assert_eq!(c.weights(), &[2.0, 2.0]);

        let trivial = Partition::from_labels(&m, &[0; 4]).unwrap();
        let c = m.consolidate(&trivial).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.point(0), m.global_centroid().as_slice());
        assert_eq!(c.total_mass(), 4.0);

        let discrete = Partition::from_labels(&m, &[0, 1, 2, 3]).unwrap();
        assert_eq!(m.consolidate(&discrete).unwrap(), m);
    }

    #[test]
    fn consolidate_size_mismatch() {
        let m = line(&[0.0, 1.0], &[1.0; 2]);
        let other = line(&[0.0, 1.0, 2.0], &[1.0; 3]);
        let p = Partition::from_labels(&other, &[0, 0, 1]).unwrap();
        assert!(matches!(m.consolidate(&p), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn restrict_keeps_weights() {
        let m = line(&[0.0, 1.0, 2.0], &[0.2, 0.3, 0.5]);
        let r = m.restrict(&IndexSubset::new(vec![2, 1], 3).unwrap()).unwrap();
        assert_eq!(r.weights(), &[0.3, 0.5]);
        assert_eq!(r.point(1), &[2.0]);
    }
}
