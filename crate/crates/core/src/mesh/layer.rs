//! Weight-matrix layers as mesh–attenuator–mesh sandwiches.
//!
//! A real (or complex) weight matrix W factors as U·Σ·Vᴴ; the two unitaries
//! become rectangular MZI meshes and the singular values become one
//! amplitude-setting MZI per diagonal channel, normalized by the largest
//! singular value, whose through-port feeds the second mesh. The
//! normalization is restored as a scalar gain.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{clements, MeshProgram};
use crate::error::{Error, Result};
use crate::linalg::{self, Cmat};
use crate::mzi::{perturbed_transfer, ArmVariations, MziConfig, PhaseNoiseModel};

/// A weight matrix lowered to photonic hardware.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerDecomposition {
    /// Output dimension (rows of W).
    pub rows: usize,
    /// Input dimension (columns of W).
    pub cols: usize,
    /// Mesh realizing Vᴴ (applied to the input first).
    pub v: MeshProgram,
    /// Normalized singular amplitudes σᵢ/σ_max in channel order.
    pub amplitudes: Vec<f64>,
    /// Device settings realizing each amplitude on its channel.
    pub sigma_configs: Vec<MziConfig>,
    /// Scalar gain σ_max restoring the normalization.
    pub gain: f64,
    /// Mesh realizing U (applied last).
    pub u: MeshProgram,
}

/// Per-device fabrication deviations for one layer, indexed like the
/// corresponding program entries / channels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerVariations {
    pub v: Vec<ArmVariations>,
    pub sigma: Vec<ArmVariations>,
    pub u: Vec<ArmVariations>,
}

impl LayerVariations {
    pub fn zero(dec: &LayerDecomposition) -> LayerVariations {
        LayerVariations {
            v: vec![ArmVariations::default(); dec.v.entries.len()],
            sigma: vec![ArmVariations::default(); dec.sigma_configs.len()],
            u: vec![ArmVariations::default(); dec.u.entries.len()],
        }
    }
}

/// Device settings sending amplitude `a ∈ [0,1]` to the through port with
/// zero phase: |T₀₀| = sin(θ/2), and φ = −θ/2 − π/2 cancels the residual
/// phase so T₀₀ = a exactly.
pub fn amplitude_config(a: f64) -> MziConfig {
    let a = a.clamp(0.0, 1.0);
    let theta = 2.0 * a.asin();
    MziConfig::new(theta, -theta / 2.0 - std::f64::consts::FRAC_PI_2)
}

/// Factor a weight matrix into meshes and channel amplitudes.
pub fn decompose_layer(w: &Cmat) -> Result<LayerDecomposition> {
    let (rows, cols) = (w.nrows(), w.ncols());
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter("empty weight matrix".into()));
    }
    let svd = linalg::svd(w);
    let gain = svd.sigma.iter().cloned().fold(0.0f64, f64::max);
    let amplitudes: Vec<f64> = if gain > 0.0 {
        svd.sigma.iter().map(|s| s / gain).collect()
    } else {
        vec![0.0; svd.sigma.len()]
    };
    let sigma_configs: Vec<MziConfig> = amplitudes.iter().map(|&a| amplitude_config(a)).collect();
    let vh = linalg::adjoint(&svd.v);
    Ok(LayerDecomposition {
        rows,
        cols,
        v: clements::decompose(&vh)?,
        amplitudes,
        sigma_configs,
        gain,
        u: clements::decompose(&svd.u)?,
    })
}

/// Rectangular diagonal (rows×cols) with the given channel entries.
fn rect_diag(rows: usize, cols: usize, d: &[Complex64]) -> Cmat {
    let mut m = Array2::from_elem((rows, cols), Complex64::new(0.0, 0.0));
    for (i, &z) in d.iter().enumerate().take(rows.min(cols)) {
        m[(i, i)] = z;
    }
    m
}

/// The ideal weight matrix realized by the hardware program.
pub fn realized_weight(dec: &LayerDecomposition) -> Cmat {
    let u = clements::reconstruct_ideal(&dec.u);
    let vh = clements::reconstruct_ideal(&dec.v);
    let d: Vec<Complex64> = dec
        .amplitudes
        .iter()
        .map(|&a| Complex64::new(dec.gain * a, 0.0))
        .collect();
    u.dot(&rect_diag(dec.rows, dec.cols, &d)).dot(&vh)
}

/// The weight matrix realized under fabrication deviations: both meshes are
/// rebuilt device-by-device and each channel amplitude becomes the through
/// coefficient of its perturbed device.
pub fn deviated_weight(
    dec: &LayerDecomposition,
    vars: &LayerVariations,
    model: PhaseNoiseModel,
) -> Result<Cmat> {
    if vars.sigma.len() != dec.sigma_configs.len() {
        return Err(Error::InvalidParameter(format!(
            "{} channel variation records for {} channels",
            vars.sigma.len(),
            dec.sigma_configs.len()
        )));
    }
    let u = clements::reconstruct_perturbed(&dec.u, &vars.u, model)?;
    let vh = clements::reconstruct_perturbed(&dec.v, &vars.v, model)?;
    let d: Vec<Complex64> = dec
        .sigma_configs
        .iter()
        .zip(&vars.sigma)
        .map(|(cfg, v)| perturbed_transfer(*cfg, v, model)[(0, 0)] * dec.gain)
        .collect();
    Ok(u.dot(&rect_diag(dec.rows, dec.cols, &d)).dot(&vh))
}
