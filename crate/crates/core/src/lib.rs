//! Minimal Green-energy point configurations on compact rank one symmetric
//! spaces, their separation bounds, and discrete harmonic balls on triangulated
//! surfaces.

pub mod error;
pub mod field;
pub mod geometry;
pub mod quadrature;
pub mod special;
pub mod constants;
pub mod kernel;
pub mod energy;
pub mod mesh;

pub use constants::{bound_report, cross_constant, radius_r_n, BoundReport, RadiusSolution};
pub use energy::{
    green_energy, minimize, riemannian_gradient, separation, verify_separation_bound, BoundCheck, BoundKind,
    Configuration, ConfigurationRecord, MinimizeOptions, MinimizeReport, Start, StopReason,
};
pub use error::{Error, Result};
pub use geometry::{distance, exp_map, log_map, ManifoldId, Point, TangentVector};
pub use kernel::KernelTable;
pub use mesh::{DiscreteGreen, ObstacleOptions, ObstacleSolution, TriMesh};

/// Version string embedded in every output artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
