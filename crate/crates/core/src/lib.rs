//! Sum-of-norms clustering of weighted discrete measures.
//!
//! Given atoms `x_n` with weights `a_n`, the clustering at scale `λ` is the
//! unique minimiser of
//!
//! ```text
//! J(u) = Σ_n a_n |u_n - x_n|² + λ Σ_{k,n} a_k a_n |u_k - u_n|
//! ```
//!
//! The crate provides a splitting solver for `J`, optimality certificates,
//! the cohesion and shattering thresholds `λ₁` and `λ*`, closed-form
//! constants for symmetric geometries, transport distances with the
//! associated stability checks, and seeded experiment harnesses.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the tolerances are tuned for.

pub mod analytic;
pub mod certificates;
pub mod error;
pub mod experiments;
pub mod measure;
pub mod pairs;
pub mod partition;
pub mod scalar;
pub mod solver;
pub mod transport;

pub use error::{Error, Result};
pub use measure::{DiscreteMeasure, IndexSubset};
pub use pairs::PairField;
pub use partition::{GeometryExcess, Partition};
pub use scalar::Scalar;
pub use solver::{SolverOptions, SolverResult};

pub type Measure = DiscreteMeasure<f64>;
pub type Clustering = Partition<f64>;
pub type Solution = SolverResult<f64>;
pub type Path = solver::ClusterPath<f64>;
pub type KktCertificate = certificates::KktCertificate<f64>;
pub type CohesionCertificate = certificates::CohesionCertificate<f64>;
pub type DetectionInterval = certificates::DetectionInterval<f64>;
pub type TransportPlan = transport::TransportPlan<f64>;
