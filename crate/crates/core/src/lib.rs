//! Certified bounds on the free energy and surface pressure of the hard-core
//! and monomer-dimer models on Z^d via the sequential cavity method.

pub mod bounds;
pub mod cavity;
pub mod error;
pub mod interval;
pub mod lattice;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use interval::BoundInterval;
pub use lattice::{LatticePoint, Region, RegionKind, ShapeVector};
pub use model::{ModelKind, ModelSpec, Pattern, SeedKind};
