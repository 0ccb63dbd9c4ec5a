//! Photonic neural-network pipeline: frequency-domain MNIST features, a
//! software-trained fully connected model, its lowering onto MZI meshes, and
//! accuracy evaluation under fabrication-deviated weights.
//!
//! The evaluation path mirrors the hardware: each layer's weight matrix is
//! realized as input mesh · amplitude column · output mesh, every placed
//! device reads its arm deviations from a shared variation map (optionally
//! through width-engineered designs), and inference runs on the resulting
//! complex weight stack with magnitude detection between layers.

pub mod features;
pub mod mnist;
pub mod model;

pub use features::{features_for_split, FeatureExtractor, FeatureVector};
pub use mnist::{default_mnist_dir, load_test, load_train, MnistSplit};
pub use model::{
    ArchiveMetadata, Dataset, SpnnModel, TrainParams, TrainReport, WeightArchive,
};

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Cmat;
use crate::mesh::{
    self, clements, decompose_layer, deviated_weight, die_map_for, place_network, realized_weight,
    sample_device, LayerDecomposition, LayerVariations, NetworkPlacement, SamplingOptions, Segment,
};
use crate::metrics::rvd;
use crate::mzi::{PhaseNoiseModel, ARM_LENGTH_UM};
use crate::optimizer::{DesignPolicy, TolerantDesign};
use crate::photonics::{Geometry, SensitivityTable, NOMINAL_WIDTH_NM};
use crate::varmap::{VariationMap, VariationParams};
use model::{argmax_rows, fraction_correct, log_softmax_rows, softplus};

/// A trained model lowered to photonic hardware: one mesh decomposition per
/// layer, in forward order.
#[derive(Debug, Clone)]
pub struct PhotonicNetwork {
    pub layers: Vec<LayerDecomposition>,
}

/// Phase shifters in the unitary meshes of layers with the given (rows,
/// columns) weight shapes: each N×N mesh carries N² (two per device plus the
/// output column). Amplitude devices are excluded from this count, matching
/// the usual bookkeeping for mesh-programmed networks.
pub fn phase_shifter_count_for_dims(dims: &[(usize, usize)]) -> usize {
    dims.iter().map(|&(rows, cols)| rows * rows + cols * cols).sum()
}

impl PhotonicNetwork {
    pub fn from_model(model: &SpnnModel) -> Result<PhotonicNetwork> {
        model.validate()?;
        let layers = model
            .weights
            .iter()
            .map(decompose_layer)
            .collect::<Result<_>>()?;
        Ok(PhotonicNetwork { layers })
    }

    /// Mesh phase-shifter count (see [`phase_shifter_count_for_dims`]).
    pub fn phase_shifter_count(&self) -> usize {
        self.layers.iter().map(|l| l.u.n * l.u.n + l.v.n * l.v.n).sum()
    }

    /// Physical device sites for every mesh entry and amplitude channel.
    pub fn placement(&self) -> NetworkPlacement {
        place_network(&self.layers)
    }

    /// The weight stack realized with ideal (unperturbed) hardware.
    pub fn nominal_stack(&self) -> Vec<Cmat> {
        self.layers.iter().map(realized_weight).collect()
    }

    /// The weight stack realized under per-device deviations.
    pub fn deviated_stack(
        &self,
        vars: &[LayerVariations],
        noise_model: PhaseNoiseModel,
    ) -> Result<Vec<Cmat>> {
        if vars.len() != self.layers.len() {
            return Err(Error::InvalidParameter(format!(
                "{} variation records for {} layers",
                vars.len(),
                self.layers.len()
            )));
        }
        self.layers
            .iter()
            .zip(vars)
            .map(|(dec, v)| deviated_weight(dec, v, noise_model))
            .collect()
    }

    /// RVD of every unitary mesh under the deviations, in layer order with
    /// the input mesh before the output mesh ([v₀, u₀, v₁, u₁, ...]).
    pub fn mesh_rvds(
        &self,
        vars: &[LayerVariations],
        noise_model: PhaseNoiseModel,
    ) -> Result<Vec<f64>> {
        if vars.len() != self.layers.len() {
            return Err(Error::InvalidParameter(format!(
                "{} variation records for {} layers",
                vars.len(),
                self.layers.len()
            )));
        }
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for (dec, v) in self.layers.iter().zip(vars) {
            for (prog, dev_vars) in [(&dec.v, &v.v), (&dec.u, &v.u)] {
                let ideal = clements::reconstruct_ideal(prog);
                let real = clements::reconstruct_perturbed(prog, dev_vars, noise_model)?;
                out.push(rvd(&ideal, &real)?);
            }
        }
        Ok(out)
    }
}

/// Read every placed device's deviations from the map. `designs` (indexed
/// like the placement's devices) selects per-arm widths and lengths; absent
/// designs mean nominal geometry everywhere.
pub fn sample_network_variations(
    layers: &[LayerDecomposition],
    placement: &NetworkPlacement,
    map: &VariationMap,
    sens: &SensitivityTable,
    designs: Option<&[TolerantDesign]>,
    opts: SamplingOptions,
) -> Result<Vec<LayerVariations>> {
    if let Some(d) = designs {
        if d.len() != placement.devices.len() {
            return Err(Error::InvalidParameter(format!(
                "{} designs for {} placed devices",
                d.len(),
                placement.devices.len()
            )));
        }
    }
    let mut out: Vec<LayerVariations> = layers.iter().map(LayerVariations::zero).collect();
    for (i, dev) in placement.devices.iter().enumerate() {
        let (widths, lengths) = match designs {
            Some(ds) => (ds[i].widths_nm, ds[i].arm_lengths_um),
            None => ([NOMINAL_WIDTH_NM; 4], [ARM_LENGTH_UM; 4]),
        };
        let vars = sample_device(map, sens, dev.site, widths, lengths, opts)?;
        let layer = out.get_mut(dev.layer).ok_or_else(|| {
            Error::InvalidParameter(format!("device on layer {} of {}", dev.layer, layers.len()))
        })?;
        let slot = match dev.segment {
            Segment::V => layer.v.get_mut(dev.index),
            Segment::Sigma => layer.sigma.get_mut(dev.index),
            Segment::U => layer.u.get_mut(dev.index),
        };
        *slot.ok_or_else(|| {
            Error::InvalidParameter(format!(
                "device index {} outside layer {} segment {:?}",
                dev.index, dev.layer, dev.segment
            ))
        })? = vars;
    }
    Ok(out)
}

/// Log-probabilities through an explicit (complex) weight stack with the
/// same modulus → Softplus chain as the software model and LogSoftMax at the
/// end. The input rows are complex fields; after each detection the batch
/// re-enters the next mesh as a real-valued (zero-phase) field.
pub fn forward_stack(stack: &[Cmat], x: ArrayView2<'_, Complex64>) -> Result<Array2<f64>> {
    if stack.is_empty() {
        return Err(Error::InvalidParameter("empty weight stack".into()));
    }
    let last = stack.len() - 1;
    let mut cur = x.to_owned();
    let mut mag = Array2::zeros((0, 0));
    for (m, w) in stack.iter().enumerate() {
        if w.ncols() != cur.ncols() {
            return Err(Error::InvalidParameter(format!(
                "stack layer {m} expects {} inputs, got {}",
                w.ncols(),
                cur.ncols()
            )));
        }
        let z = cur.dot(&w.t());
        mag = z.mapv(|c| c.norm());
        if m < last {
            cur = mag.mapv(|v| Complex64::from(softplus(v)));
        }
    }
    Ok(log_softmax_rows(&mag))
}

/// Classification accuracy of a weight stack on a dataset.
pub fn stack_accuracy(stack: &[Cmat], data: &Dataset) -> Result<f64> {
    if data.features.nrows() != data.labels.len() {
        return Err(Error::InvalidParameter("feature/label count mismatch".into()));
    }
    let lp = forward_stack(stack, data.features.view())?;
    if data.labels.iter().any(|&l| (l as usize) >= lp.ncols()) {
        return Err(Error::InvalidParameter("label outside the output range".into()));
    }
    Ok(fraction_correct(&argmax_rows(&lp), &data.labels))
}

/// Accuracy of the photonic realization with zero fabrication deviations
/// (differs from the software model only by decomposition round-off).
pub fn photonic_nominal_accuracy(net: &PhotonicNetwork, data: &Dataset) -> Result<f64> {
    stack_accuracy(&net.nominal_stack(), data)
}

/// One Monte-Carlo experiment cell: how maps are drawn and how devices are
/// designed and sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub trials: usize,
    /// Trial t uses map seed `base_seed + t`.
    pub base_seed: u64,
    /// Map parameters at 1× scale; `sigma_scale` multiplies both σ values.
    pub base_params: VariationParams,
    pub sigma_scale: f64,
    pub geometry: Geometry,
    pub policy: DesignPolicy,
    /// false = width-only variations (thickness ignored in sampling and in
    /// design knowledge).
    pub include_thickness: bool,
    pub include_couplers: bool,
    pub noise_model: PhaseNoiseModel,
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
        }
        if !(self.sigma_scale >= 0.0 && self.sigma_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma scale {}",
                self.sigma_scale
            )));
        }
        self.base_params.validate()
    }
}

/// Outcome of a single map realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub accuracy: f64,
    /// Mean RVD over the network's unitary meshes.
    pub mean_mesh_rvd: f64,
}

/// Aggregated Monte-Carlo accuracy for one experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub outcomes: Vec<TrialOutcome>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

/// Run `trials` independent map realizations of the full pipeline: fresh die
/// map → (policy) designs → per-device sampling → deviated weight stack →
/// test accuracy. Trials run in parallel; results are deterministic for a
/// fixed configuration.
pub fn monte_carlo_accuracy(
    net: &PhotonicNetwork,
    test: &Dataset,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloResult> {
    cfg.validate()?;
    let placement = net.placement();
    let sens = mesh::default_sensitivity(cfg.geometry)?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialOutcome> {
            let mut params = cfg.base_params;
            params.sigma_w *= cfg.sigma_scale;
            params.sigma_t *= cfg.sigma_scale;
            params.seed = cfg.base_seed.wrapping_add(t as u64);
            let map = die_map_for(&placement, &params)?;
            let designs =
                cfg.policy.designs_for(&map, &sens, &placement, cfg.include_thickness)?;
            let opts = SamplingOptions {
                include_thickness: cfg.include_thickness,
                include_couplers: cfg.include_couplers,
            };
            let vars = sample_network_variations(
                &net.layers,
                &placement,
                &map,
                &sens,
                designs.as_deref(),
                opts,
            )?;
            let stack = net.deviated_stack(&vars, cfg.noise_model)?;
            let accuracy = stack_accuracy(&stack, test)?;
            let rvds = net.mesh_rvds(&vars, cfg.noise_model)?;
            let mean_mesh_rvd = rvds.iter().sum::<f64>() / rvds.len() as f64;
            Ok(TrialOutcome { accuracy, mean_mesh_rvd })
        })
        .collect::<Result<_>>()?;
    let n = outcomes.len() as f64;
    let mean_accuracy = outcomes.iter().map(|o| o.accuracy).sum::<f64>() / n;
    let var = outcomes
        .iter()
        .map(|o| (o.accuracy - mean_accuracy).powi(2))
        .sum::<f64>()
        / n;
    Ok(MonteCarloResult { outcomes, mean_accuracy, std_accuracy: var.sqrt() })
}
