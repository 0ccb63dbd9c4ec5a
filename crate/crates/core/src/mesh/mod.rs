//! Programmable interference meshes: decomposition of weight matrices into
//! MZI programs, physical placement on a die, and perturbed reconstruction.

pub mod clements;
pub mod layer;
pub mod placement;

use serde::{Deserialize, Serialize};

use crate::mzi::MziConfig;

/// One device of a mesh program, pinned to a physical column/row of the
/// canonical rectangle. `row` is the lower of the two mode indices the
/// device couples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshEntry {
    pub col: usize,
    pub row: usize,
    pub config: MziConfig,
}

/// A feed-forward mesh: devices in application order (ascending column; the
/// realized matrix is `diag(e^{i·output_phases}) · E_p ⋯ E_1` with `E_1`
/// applied to the input first), then one output phase per mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshProgram {
    pub n: usize,
    pub entries: Vec<MeshEntry>,
    pub output_phases: Vec<f64>,
}

pub use clements::{column_count, decompose, reconstruct_ideal, reconstruct_perturbed};
pub use layer::{
    decompose_layer, deviated_weight, realized_weight, LayerDecomposition, LayerVariations,
};
pub use placement::{
    default_sensitivity, die_map_for, place_mesh, place_network, sample_device, sample_knowledge,
    NetworkPlacement, PlacedDevice, SamplingOptions, Segment,
};
