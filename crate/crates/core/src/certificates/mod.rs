//! Optimality witnesses and the cohesion / shattering thresholds.

mod cohesion;
mod kkt;
mod thresholds;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

pub use cohesion::{
    ball_q1, lambda1_bounds, lambda1_exact, lambda1_exact_with_budget, lambda1_upper_from_pair_field,
    lambda1_upper_from_q1, CohesionCertificate,
};
pub use kkt::{check_certificate, verify_kkt, verify_kkt_with_budget, CertificateResiduals, KktCertificate};
pub use thresholds::{
    check_split_condition, detection_interval, is_cohesive, is_shattered, lambda1_bisect,
    lambda_star_bisect, BisectionEstimate, DetectionInterval, SplitReport,
};

use crate::scalar::Scalar;

/// A threshold that may be infinite (a single atom is shattered at every
/// scale). Serialises as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold<T> {
    Finite(T),
    Unbounded,
}

impl<T: Scalar> Threshold<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Threshold::Finite(v) => Some(v),
            Threshold::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Threshold::Unbounded)
    }

    /// `λ < self`.
    pub fn exceeds(self, lambda: T) -> bool {
        match self {
            Threshold::Finite(v) => lambda < v,
            Threshold::Unbounded => true,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Threshold::Finite(v) => v.f64(),
            Threshold::Unbounded => f64::INFINITY,
        }
    }
}

impl<T: Scalar> std::fmt::Display for Threshold<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Threshold::Finite(v) => write!(f, "{v}"),
            Threshold::Unbounded => f.write_str("inf"),
        }
    }
}

impl<T: Scalar> Serialize for Threshold<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Threshold::Finite(v) => v.serialize(s),
            Threshold::Unbounded => s.serialize_str("inf"),
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Threshold<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(std::marker::PhantomData<T>);
        impl<T: Scalar> Visitor<'_> for V<T> {
            type Value = Threshold<T>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Ok(Threshold::Finite(T::c(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(Threshold::Finite(T::c(v as f64)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(Threshold::Finite(T::c(v as f64)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                if v == "inf" {
                    Ok(Threshold::Unbounded)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V(std::marker::PhantomData))
    }
}
