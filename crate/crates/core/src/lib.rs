//! Simulation and design toolkit for coherent photonic neural networks built
//! from Mach-Zehnder interferometer (MZI) meshes, focused on how correlated
//! fabrication variations in waveguide width and SOI thickness distort
//! programmed weights, and on width-engineering strategies that tolerate them.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod mzi;
pub mod optimizer;
pub mod photonics;
pub mod spnn;
pub mod varmap;

pub use error::{Error, Result};
