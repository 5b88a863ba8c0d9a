//! Newtonian and logarithmic capacity, torsional rigidity and Quermass
//! integrals of simple bodies, together with the capacity upper bounds built
//! from perimeters of parallel sets, mean curvature and Fraenkel asymmetry.
//!
//! Every Monte Carlo routine takes an explicit [`mc::MCConfig`] seed and is
//! bit-reproducible regardless of the rayon thread count.

pub mod bounds;
pub mod capacity;
pub mod corpus;
pub mod error;
pub mod fraenkel;
pub mod geometry;
pub mod mc;
pub mod quad;
pub mod quermass;
pub mod report;
pub mod sausage;
pub mod special;
pub mod torsion;
pub mod verify;

use serde::{Deserialize, Serialize};


pub use error::{Error, Result};
pub use geometry::{Shape, ShapeSpec};
pub use mc::MCConfig;
pub use quermass::QuermassVector;
pub use capacity::{CapacityEstimate, CapacityMethod};
pub use bounds::{BoundReport, BoundsConfig};
pub use sausage::SausageRun;

/// Library version string, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A value with a Monte Carlo standard error (zero for deterministic paths).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    pub fn mc(value: f64, stderr: f64) -> Self {
        Self { value, stderr }
    }
}
