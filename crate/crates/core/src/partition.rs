//! Level-set decompositions of maps on atoms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, IndexSubset};
use crate::scalar::{vec, Scalar};

/// Clusters of a measure's atoms with their masses, centroids and the
/// common value of the clustered map on each cluster.
///
/// Labels are canonical: cluster `k` is the `k`-th distinct label met when
/// scanning atoms in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Partition<T> {
    labels: Vec<usize>,
    cluster_masses: Vec<T>,
    cluster_centroids: Vec<Vec<T>>,
    representatives: Vec<Vec<T>>,
}

fn canonical_labels(raw: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    raw.iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

impl<T: Scalar> Partition<T> {
    /// Partition with arbitrary labels; representatives are the centroids.
    pub fn from_labels(m: &DiscreteMeasure<T>, labels: &[usize]) -> Result<Self> {
        Self::build(m, labels, None)
    }

    /// Partition whose representatives are the mass-weighted means of the
    /// per-atom values `u` (flat, `N * d`) over each cluster.
    pub fn from_labels_and_values(
        m: &DiscreteMeasure<T>,
        labels: &[usize],
        u: &[T],
    ) -> Result<Self> {
        if u.len() != m.len() * m.dim() {
            return Err(Error::SizeMismatch {
                expected: m.len() * m.dim(),
                got: u.len(),
            });
        }
        Self::build(m, labels, Some(u))
    }

    fn build(m: &DiscreteMeasure<T>, labels: &[usize], u: Option<&[T]>) -> Result<Self> {
        if labels.len() != m.len() {
            return Err(Error::SizeMismatch {
                expected: m.len(),
                got: labels.len(),
            });
        }
        let labels = canonical_labels(labels);
        let k = labels.iter().max().map_or(0, |&l| l + 1);
        let d = m.dim();
        let mut masses = vec![T::zero(); k];
        let mut reps = vec![vec![T::zero(); d]; k];
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            let w = m.weight(i);
            masses[l] = masses[l] + w;
            members[l].push(i);
            if let Some(u) = u {
                for (r, &v) in reps[l].iter_mut().zip(&u[i * d..(i + 1) * d]) {
                    *r = *r + w * v;
                }
            }
        }
        let centroids = members
            .into_iter()
            .map(|idx| m.centroid(&IndexSubset::new(idx, m.len())?))
            .collect::<Result<Vec<_>>>()?;
        let representatives = match u {
            Some(_) => reps
                .into_iter()
                .zip(&masses)
                .map(|(r, &w)| r.into_iter().map(|v| v / w).collect())
                .collect(),
            None => centroids.clone(),
        };
        Ok(Self {
            labels,
            cluster_masses: masses,
            cluster_centroids: centroids,
            representatives,
        })
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_masses.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn cluster_masses(&self) -> &[T] {
        &self.cluster_masses
    }

    pub fn cluster_centroids(&self) -> &[Vec<T>] {
        &self.cluster_centroids
    }

    pub fn representatives(&self) -> &[Vec<T>] {
        &self.representatives
    }

    /// Atom indices of cluster `k`, ascending.
    pub fn members(&self, k: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == k).then_some(i))
            .collect()
    }

    pub fn subsets(&self) -> Vec<IndexSubset> {
        let n = self.len();
        (0..self.num_clusters())
            .map(|k| IndexSubset::new(self.members(k), n).expect("labels in range"))
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.num_clusters() == 1
    }

    pub fn is_discrete(&self) -> bool {
        self.num_clusters() == self.len()
    }

    /// Same set partition of the atoms, ignoring label names.
    pub fn same_clusters(&self, other: &Partition<T>) -> bool {
        self.labels == other.labels
    }

    /// Every cluster of `self` lies inside one cluster of `coarser`.
    pub fn refines(&self, coarser: &Partition<T>) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut image = vec![usize::MAX; self.num_clusters()];
        for (&fine, &coarse) in self.labels.iter().zip(&coarser.labels) {
            if image[fine] == usize::MAX {
                image[fine] = coarse;
            } else if image[fine] != coarse {
                return false;
            }
        }
        true
    }

    /// Smallest distance between two distinct cluster centroids, if any.
    pub fn min_centroid_separation(&self) -> Option<T> {
        let k = self.num_clusters();
        let mut best: Option<T> = None;
        for a in 0..k {
            for b in a + 1..k {
                let dd = vec::dist(&self.cluster_centroids[a], &self.cluster_centroids[b]);
                best = Some(best.map_or(dd, |x| x.min(dd)));
            }
        }
        best
    }

    /// How far the clusters of a minimiser at `λ` are from the two geometric
    /// constraints every exact minimiser satisfies: each atom lies within
    /// `λ · mass(V)` of its cluster's centroid, and distinct centroids are at
    /// least `λ (mass(V) + mass(W))` apart. Positive values are violations.
    pub fn geometry_excess(&self, m: &DiscreteMeasure<T>, lambda: T) -> Result<GeometryExcess<T>> {
        if m.len() != self.len() {
            return Err(Error::SizeMismatch {
                expected: m.len(),
                got: self.len(),
            });
        }
        let mut ball = T::neg_infinity();
        for (i, &l) in self.labels.iter().enumerate() {
            let r = vec::dist(m.point(i), &self.cluster_centroids[l]);
            ball = ball.max(r - lambda * self.cluster_masses[l]);
        }
        let k = self.num_clusters();
        let mut sep = T::neg_infinity();
        for a in 0..k {
            for b in a + 1..k {
                let dd = vec::dist(&self.cluster_centroids[a], &self.cluster_centroids[b]);
                sep = sep.max(lambda * (self.cluster_masses[a] + self.cluster_masses[b]) - dd);
            }
        }
        Ok(GeometryExcess {
            ball,
            separation: (k > 1).then_some(sep),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct GeometryExcess<T> {
    /// `max_i |x_i - c_{V(i)}| - λ mass(V(i))`.
    pub ball: T,
    /// `max_{V≠W} λ (mass V + mass W) - |c_V - c_W|`; `None` for one cluster.
    pub separation: Option<T>,
}

impl<T: Scalar> GeometryExcess<T> {
    pub fn holds(&self, tol: T) -> bool {
        self.ball <= tol && self.separation.is_none_or(|s| s <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_geometry() {
        let m = DiscreteMeasure::<f64>::new(1, vec![vec![0.0], vec![1.0]], vec![0.5, 0.5]).unwrap();
        let split = Partition::from_labels(&m, &[0, 1]).unwrap();
        // split minimiser exists for λ < 1: gap 1 - λ·(½ + ½)
        let g = split.geometry_excess(&m, 0.5).unwrap();
        assert_eq!(g.ball, -0.25);
        assert_eq!(g.separation, Some(-0.5));
        assert!(!split.geometry_excess(&m, 1.5).unwrap().holds(1e-9));
        let one = Partition::from_labels(&m, &[0, 0]).unwrap();
        let g = one.geometry_excess(&m, 1.0).unwrap();
        assert_eq!(g.ball, -0.5);
        assert!(g.separation.is_none() && g.holds(0.0));
    }

    #[test]
    fn labels_are_canonicalised() {
        let m = DiscreteMeasure::<f64>::unit_weights(1, vec![vec![0.0], vec![1.0], vec![2.0]])
            .unwrap();
        let p = Partition::from_labels(&m, &[7, 3, 7]).unwrap();
        assert_eq!(p.labels(), &[0, 1, 0]);
        assert_eq!(p.num_clusters(), 2);
        assert_eq!(p.cluster_masses(), &[2.0, 1.0]);
        assert_eq!(p.cluster_centroids()[0], vec![1.0]);
        assert_eq!(p.members(0), vec![0, 2]);
    }

    #[test]
    fn refinement() {
        let m = DiscreteMeasure::<f64>::unit_weights(
            1,
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
        )
        .unwrap();
        let fine = Partition::from_labels(&m, &[0, 1, 2, 2]).unwrap();
        let coarse = Partition::from_labels(&m, &[0, 0, 1, 1]).unwrap();
        let crossed = Partition::from_labels(&m, &[0, 1, 0, 1]).unwrap();
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(!coarse.refines(&crossed));
    }
}
