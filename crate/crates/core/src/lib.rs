//! Exact analysis of finite metric dynamical systems: shadowing deciders and
//! moduli, expansivity radii, shadower counts, example generators and a
//! verification harness.
//!
//! All distances are compared as squares against squared thresholds in exact
//! rational arithmetic, with strict `<` throughout.

pub mod document;
pub mod error;
pub mod expansivity;
pub mod generators;
pub mod harness;
pub mod lattice;
pub mod multiplicity;
pub mod pointset;
pub mod rational;
pub mod replay;
pub mod shadowing;
pub mod system;
pub mod threshold;

pub use error::{Error, Result};
pub use rational::ExactRational;
pub use shadowing::{Budget, ShadowingKind, Verdict, Witness};
pub use system::{FiniteSystem, Metric, PointId, PointRecord, RawSystem};
pub use threshold::Threshold;
