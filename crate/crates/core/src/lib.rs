//! Random hives with GUE boundary data.
//!
//! The crate samples GUE minor processes, turns them into Gelfand–Tsetlin
//! patterns and hives, evaluates augmented-hive values as maximum-weight
//! lozenge tilings of excavation hexagons, estimates surface tensions on
//! small patches, maximizes the limiting variational functional on a mesh,
//! and decomposes Lipschitz functions into good and bad dyadic cubes.

pub mod eigen;
pub mod error;
pub mod height;
pub mod hive;
pub mod lozenge;
pub mod qdiff;
pub mod randmat;
pub mod rng;
pub mod stats;
pub mod tension;
pub mod varsolve;

pub use error::{HiveError, Result};
