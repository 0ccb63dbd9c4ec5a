//! Batch experiment drivers: mesh-level RVD box statistics over random
//! unitaries, Monte-Carlo accuracy sweeps of the digit networks across
//! variation scales / correlation lengths / design policies, and the
//! worst-case-budget table. Every driver is deterministic for a fixed base
//! seed and emits rows that serialize to CSV plus aggregate summaries.

use ndarray::Axis;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::haar_unitary;
use crate::mesh::{
    decompose, default_sensitivity, die_map_for, place_mesh, reconstruct_ideal,
    reconstruct_perturbed, sample_device, SamplingOptions,
};
use crate::metrics::rvd;
use crate::mzi::{PhaseNoiseModel, ARM_LENGTH_UM};
use crate::optimizer::{worst_case_optimize, DesignPolicy};
use crate::photonics::{Geometry, NOMINAL_WIDTH_NM};
use crate::spnn::{
    monte_carlo_accuracy, photonic_nominal_accuracy, Dataset, MonteCarloConfig, PhotonicNetwork,
    SpnnModel,
};
use crate::varmap::VariationParams;

/// Which geometry dimensions vary in an experiment cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariationMode {
    /// Width deviations only.
    Width,
    /// Width and thickness deviations together.
    WidthThickness,
}

impl VariationMode {
    pub fn include_thickness(self) -> bool {
        matches!(self, VariationMode::WidthThickness)
    }
}

impl std::fmt::Display for VariationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VariationMode::Width => write!(f, "W"),
            VariationMode::WidthThickness => write!(f, "W+T"),
        }
    }
}

impl std::str::FromStr for VariationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<VariationMode> {
        match s {
            "W" | "w" | "width" => Ok(VariationMode::Width),
            "W+T" | "w+t" | "wt" | "width-thickness" => Ok(VariationMode::WidthThickness),
            other => Err(Error::InvalidParameter(format!(
                "unknown variation mode {other:?} (expected W or W+T)"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Small numeric helpers shared by the report builders.
// ---------------------------------------------------------------------------

/// Linearly interpolated quantile of an ascending-sorted slice (the common
/// `h = q·(n−1)` convention).
pub fn quantile(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InvalidParameter("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("quantile {q} outside [0, 1]")));
    }
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Ordinary least-squares line fit with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter(format!(
            "{} x-values for {} y-values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter("need at least two points to fit a line".into()));
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("degenerate fit: all x-values equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit { slope, intercept, r2 })
}

// ---------------------------------------------------------------------------
// CSV / JSON emission.
// ---------------------------------------------------------------------------

/// Write serializable rows as headed CSV.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(Error::from)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush().map_err(|e| Error::io_at(path, e))
}

/// Read headed CSV back into typed rows (round-trip counterpart of
/// [`write_csv`]).
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path).map_err(Error::from)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io_at(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Mesh-level RVD box statistics over random unitaries.
// ---------------------------------------------------------------------------

/// Configuration of the random-unitary RVD experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RvdSweepConfig {
    pub n_unitaries: usize,
    pub mesh_dim: usize,
    pub geometry: Geometry,
    pub policies: Vec<DesignPolicy>,
    /// Correlation lengths in µm.
    pub corr_lengths: Vec<f64>,
    pub sigma_scale: f64,
    pub include_thickness: bool,
    pub include_couplers: bool,
    pub noise_model: PhaseNoiseModel,
    /// Template for map statistics; correlation length and seed are
    /// overridden per cell/unitary.
    pub base_params: VariationParams,
    /// Unitary u draws its map from seed `base_seed + u`.
    pub base_seed: u64,
}

impl Default for RvdSweepConfig {
    fn default() -> RvdSweepConfig {
        RvdSweepConfig {
            n_unitaries: 100,
            mesh_dim: 16,
            geometry: Geometry::Ridge,
            policies: vec![
                DesignPolicy::NoOpt,
                DesignPolicy::Region(12),
                DesignPolicy::Region(6),
                DesignPolicy::Region(3),
                DesignPolicy::Region(1),
            ],
            corr_lengths: vec![100.0, 1000.0],
            sigma_scale: 1.0,
            include_thickness: true,
            include_couplers: false,
            noise_model: PhaseNoiseModel::Differential,
            base_params: VariationParams::default(),
            base_seed: 9000,
        }
    }
}

impl RvdSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_unitaries == 0 || self.mesh_dim < 2 {
            return Err(Error::InvalidParameter(
                "need ≥ 1 unitary and mesh dimension ≥ 2".into(),
            ));
        }
        if self.policies.is_empty() || self.corr_lengths.is_empty() {
            return Err(Error::InvalidParameter("no policies or correlation lengths".into()));
        }
        if !(self.sigma_scale >= 0.0 && self.sigma_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma scale {}", self.sigma_scale)));
        }
        self.base_params.validate()
    }
}

/// One (policy, correlation length, unitary) RVD observation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RvdSample {
    pub policy: String,
    pub corr_length_um: f64,
    pub unitary: usize,
    pub map_seed: u64,
    pub rvd: f64,
}

/// Box-plot statistics of one policy × correlation-length cell.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RvdBoxStats {
    pub policy: String,
    pub corr_length_um: f64,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    /// Coefficient of variation of the IQR across equal subgroups of the
    /// unitaries (dispersion-consistency diagnostic).
    pub iqr_group_cov: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RvdSweepReport {
    pub config: RvdSweepConfig,
    pub samples: Vec<RvdSample>,
    pub stats: Vec<RvdBoxStats>,
}

fn box_stats(
    policy: &DesignPolicy,
    corr: f64,
    values_in_unitary_order: &[f64],
) -> Result<RvdBoxStats> {
    let mut sorted = values_in_unitary_order.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (mean, std) = mean_std(&sorted);
    // IQR per subgroup of unitaries (5 groups when divisible, else 1).
    let groups = if values_in_unitary_order.len() % 5 == 0 && values_in_unitary_order.len() >= 10 {
        5
    } else {
        1
    };
    let gsize = values_in_unitary_order.len() / groups;
    let mut iqrs = Vec::with_capacity(groups);
    for g in 0..groups {
        let mut part = values_in_unitary_order[g * gsize..(g + 1) * gsize].to_vec();
        part.sort_by(|a, b| a.partial_cmp(b).unwrap());
        iqrs.push(quantile(&part, 0.75)? - quantile(&part, 0.25)?);
    }
    let (im, is) = mean_std(&iqrs);
    let iqr_group_cov = if im == 0.0 { 0.0 } else { is / im };
    Ok(RvdBoxStats {
        policy: policy.to_string(),
        corr_length_um: corr,
        n: sorted.len(),
        min: sorted[0],
        q1: quantile(&sorted, 0.25)?,
        median: quantile(&sorted, 0.5)?,
        q3: quantile(&sorted, 0.75)?,
        max: *sorted.last().unwrap(),
        mean,
        std,
        iqr_group_cov,
    })
}

/// Decompose `n_unitaries` Haar-random meshes and measure each one's RVD
/// under a fresh map realization for every policy × correlation length.
/// The same unitaries and map seeds are shared across cells, so policies are
/// compared on identical fabrication draws.
pub fn rvd_box_sweep(cfg: &RvdSweepConfig) -> Result<RvdSweepReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.base_seed);
    let programs = (0..cfg.n_unitaries)
        .map(|_| decompose(&haar_unitary(cfg.mesh_dim, &mut rng)))
        .collect::<Result<Vec<_>>>()?;
    let placement = place_mesh(&programs[0]);
    let sens = default_sensitivity(cfg.geometry)?;
    let opts = SamplingOptions {
        include_thickness: cfg.include_thickness,
        include_couplers: cfg.include_couplers,
    };
    let mut samples = Vec::new();
    let mut stats = Vec::new();
    for &corr in &cfg.corr_lengths {
        for policy in &cfg.policies {
            let cell: Vec<RvdSample> = (0..cfg.n_unitaries)
                .into_par_iter()
                .map(|u| -> Result<RvdSample> {
                    let mut params = cfg.base_params;
                    params.sigma_w *= cfg.sigma_scale;
                    params.sigma_t *= cfg.sigma_scale;
                    params.corr_length = corr;
                    params.seed = cfg.base_seed.wrapping_add(u as u64);
                    let map = die_map_for(&placement, &params)?;
                    let designs =
                        policy.designs_for(&map, &sens, &placement, cfg.include_thickness)?;
                    let vars = placement
                        .devices
                        .iter()
                        .enumerate()
                        .map(|(i, dev)| {
                            let (w, l) = match &designs {
                                Some(ds) => (ds[i].widths_nm, ds[i].arm_lengths_um),
                                None => ([NOMINAL_WIDTH_NM; 4], [ARM_LENGTH_UM; 4]),
                            };
                            sample_device(&map, &sens, dev.site, w, l, opts)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let prog = &programs[u];
                    let ideal = reconstruct_ideal(prog);
                    let pert = reconstruct_perturbed(prog, &vars, cfg.noise_model)?;
                    Ok(RvdSample {
                        policy: policy.to_string(),
                        corr_length_um: corr,
                        unitary: u,
                        map_seed: params.seed,
                        rvd: rvd(&ideal, &pert)?,
                    })
                })
                .collect::<Result<_>>()?;
            let values: Vec<f64> = cell.iter().map(|s| s.rvd).collect();
            stats.push(box_stats(policy, corr, &values)?);
            samples.extend(cell);
        }
    }
    Ok(RvdSweepReport { config: cfg.clone(), samples, stats })
}

// ---------------------------------------------------------------------------
// Network accuracy sweep (degradation and recovery bars).
// ---------------------------------------------------------------------------

/// Configuration of the Monte-Carlo accuracy sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccuracySweepConfig {
    pub geometry: Geometry,
    pub sigma_scales: Vec<f64>,
    /// Correlation lengths in µm.
    pub corr_lengths: Vec<f64>,
    pub policies: Vec<DesignPolicy>,
    pub modes: Vec<VariationMode>,
    pub trials: usize,
    pub include_couplers: bool,
    pub noise_model: PhaseNoiseModel,
    pub base_params: VariationParams,
    /// Trial t of every cell uses map seed `base_seed + t` (cells are paired
    /// on identical fabrication draws).
    pub base_seed: u64,
}

impl Default for AccuracySweepConfig {
    fn default() -> AccuracySweepConfig {
        AccuracySweepConfig {
            geometry: Geometry::Strip,
            sigma_scales: vec![0.5, 1.0, 2.0],
            corr_lengths: vec![100.0, 1000.0],
            policies: vec![
                DesignPolicy::NoOpt,
                DesignPolicy::Region(12),
                DesignPolicy::Region(6),
                DesignPolicy::Region(3),
                DesignPolicy::Region(1),
            ],
            modes: vec![VariationMode::Width, VariationMode::WidthThickness],
            trials: 10,
            include_couplers: false,
            noise_model: PhaseNoiseModel::Differential,
            base_params: VariationParams::default(),
            base_seed: 7000,
        }
    }
}

impl AccuracySweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
        }
        if self.sigma_scales.is_empty()
            || self.corr_lengths.is_empty()
            || self.policies.is_empty()
            || self.modes.is_empty()
        {
            return Err(Error::InvalidParameter("empty sweep axis".into()));
        }
        if self
            .sigma_scales
            .iter()
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return Err(Error::InvalidParameter("sigma scales must be finite and ≥ 0".into()));
        }
        self.base_params.validate()
    }
}

/// One trial of one sweep cell.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AccuracyRow {
    pub geometry: String,
    pub sigma_scale: f64,
    pub corr_length_um: f64,
    pub policy: String,
    pub mode: String,
    pub trial: usize,
    pub map_seed: u64,
    pub accuracy: f64,
    pub mean_mesh_rvd: f64,
}

/// Aggregate of one sweep cell (one bar of the accuracy figure).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AccuracyCell {
    pub geometry: String,
    pub sigma_scale: f64,
    pub corr_length_um: f64,
    pub policy: String,
    pub mode: String,
    pub trials: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_rvd: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccuracySweepReport {
    pub config: AccuracySweepConfig,
    pub software_accuracy: f64,
    pub nominal_accuracy: f64,
    pub rows: Vec<AccuracyRow>,
    pub cells: Vec<AccuracyCell>,
}

impl AccuracySweepReport {
    /// Accuracy-vs-RVD line fit over the per-trial observations.
    pub fn rvd_accuracy_fit(&self) -> Result<LinearFit> {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.mean_mesh_rvd).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.accuracy).collect();
        linear_fit(&xs, &ys)
    }
}

/// Full accuracy sweep of a trained model over every configured cell.
pub fn accuracy_sweep(
    model: &SpnnModel,
    test: &Dataset,
    cfg: &AccuracySweepConfig,
) -> Result<AccuracySweepReport> {
    cfg.validate()?;
    let net = PhotonicNetwork::from_model(model)?;
    let software_accuracy = model.accuracy(test)?;
    let nominal_accuracy = photonic_nominal_accuracy(&net, test)?;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &corr in &cfg.corr_lengths {
        for mode in &cfg.modes {
            for policy in &cfg.policies {
                for &scale in &cfg.sigma_scales {
                    let mc = MonteCarloConfig {
                        trials: cfg.trials,
                        base_seed: cfg.base_seed,
                        base_params: VariationParams {
                            corr_length: corr,
                            ..cfg.base_params
                        },
                        sigma_scale: scale,
                        geometry: cfg.geometry,
                        policy: *policy,
                        include_thickness: mode.include_thickness(),
                        include_couplers: cfg.include_couplers,
                        noise_model: cfg.noise_model,
                    };
                    let res = monte_carlo_accuracy(&net, test, &mc)?;
                    for (t, o) in res.outcomes.iter().enumerate() {
                        rows.push(AccuracyRow {
                            geometry: cfg.geometry.to_string(),
                            sigma_scale: scale,
                            corr_length_um: corr,
                            policy: policy.to_string(),
                            mode: mode.to_string(),
                            trial: t,
                            map_seed: cfg.base_seed.wrapping_add(t as u64),
                            accuracy: o.accuracy,
                            mean_mesh_rvd: o.mean_mesh_rvd,
                        });
                    }
                    let mean_rvd = res.outcomes.iter().map(|o| o.mean_mesh_rvd).sum::<f64>()
                        / res.outcomes.len() as f64;
                    cells.push(AccuracyCell {
                        geometry: cfg.geometry.to_string(),
                        sigma_scale: scale,
                        corr_length_um: corr,
                        policy: policy.to_string(),
                        mode: mode.to_string(),
                        trials: cfg.trials,
                        mean_accuracy: res.mean_accuracy,
                        std_accuracy: res.std_accuracy,
                        mean_rvd,
                    });
                }
            }
        }
    }
    Ok(AccuracySweepReport { config: cfg.clone(), software_accuracy, nominal_accuracy, rows, cells })
}

// ---------------------------------------------------------------------------
// Worst-case budget table.
// ---------------------------------------------------------------------------

/// Configuration of the worst-case-budget accuracy table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetTableConfig {
    /// Area-overhead budgets as fractions (0.01 = 1%).
    pub budgets: Vec<f64>,
    /// Correlation lengths in µm.
    pub corr_lengths: Vec<f64>,
    pub trials: usize,
    pub noise_model: PhaseNoiseModel,
    pub base_params: VariationParams,
    pub base_seed: u64,
}

impl Default for BudgetTableConfig {
    fn default() -> BudgetTableConfig {
        BudgetTableConfig {
            budgets: vec![0.01, 0.02, 0.04, 0.08, 0.16, 0.32],
            corr_lengths: vec![100.0, 1000.0],
            trials: 10,
            noise_model: PhaseNoiseModel::Differential,
            base_params: VariationParams::default(),
            base_seed: 5000,
        }
    }
}

/// One budget × correlation-length row of the worst-case table: the chosen
/// uniform width, its arm length, and accuracy before/after applying the
/// design (width-only variations, strip geometry — the regime the uniform
/// worst-case design addresses).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BudgetRow {
    pub budget_pct: f64,
    pub width_nm: f64,
    pub arm_length_um: f64,
    pub area_overhead_pct: f64,
    pub corr_length_um: f64,
    pub trials: usize,
    pub pre_mean_accuracy: f64,
    pub pre_std_accuracy: f64,
    pub post_mean_accuracy: f64,
    pub post_std_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetTableReport {
    pub config: BudgetTableConfig,
    pub nominal_accuracy: f64,
    pub rows: Vec<BudgetRow>,
}

/// Evaluate the uniform worst-case design at each area budget against the
/// unoptimized baseline, trial-paired per correlation length.
pub fn budget_table_sweep(
    model: &SpnnModel,
    test: &Dataset,
    cfg: &BudgetTableConfig,
) -> Result<BudgetTableReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
    }
    if cfg.budgets.is_empty() || cfg.corr_lengths.is_empty() {
        return Err(Error::InvalidParameter("empty sweep axis".into()));
    }
    let net = PhotonicNetwork::from_model(model)?;
    let nominal_accuracy = photonic_nominal_accuracy(&net, test)?;
    let mc_base = |corr: f64, policy: DesignPolicy| MonteCarloConfig {
        trials: cfg.trials,
        base_seed: cfg.base_seed,
        base_params: VariationParams { corr_length: corr, ..cfg.base_params },
        sigma_scale: 1.0,
        geometry: Geometry::Strip,
        policy,
        include_thickness: false,
        include_couplers: false,
        noise_model: cfg.noise_model,
    };
    let mut rows = Vec::new();
    for &corr in &cfg.corr_lengths {
        let pre = monte_carlo_accuracy(&net, test, &mc_base(corr, DesignPolicy::NoOpt))?;
        for &budget in &cfg.budgets {
            let design = worst_case_optimize(budget)?;
            let post =
                monte_carlo_accuracy(&net, test, &mc_base(corr, DesignPolicy::WorstCase(budget)))?;
            rows.push(BudgetRow {
                budget_pct: budget * 100.0,
                width_nm: design.width_nm,
                arm_length_um: design.arm_length_um,
                area_overhead_pct: design.area_overhead * 100.0,
                corr_length_um: corr,
                trials: cfg.trials,
                pre_mean_accuracy: pre.mean_accuracy,
                pre_std_accuracy: pre.std_accuracy,
                post_mean_accuracy: post.mean_accuracy,
                post_std_accuracy: post.std_accuracy,
            });
        }
    }
    Ok(BudgetTableReport { config: cfg.clone(), nominal_accuracy, rows })
}

// ---------------------------------------------------------------------------
// Feature/dataset plumbing shared by the CLI drivers.
// ---------------------------------------------------------------------------

/// Load an MNIST split and extract unit-norm frequency features.
pub fn dataset_from_mnist(dir: &Path, train: bool, dim: usize) -> Result<Dataset> {
    let split = if train {
        crate::spnn::load_train(dir)?
    } else {
        crate::spnn::load_test(dir)?
    };
    let (features, labels) = crate::spnn::features_for_split(&split, dim)?;
    Dataset::new(features, labels)
}

/// Deterministic subsample (stride-based) keeping at most `n` samples.
pub fn subsample(data: &Dataset, n: usize) -> Dataset {
    if n == 0 || n >= data.len() {
        return data.clone();
    }
    let stride = data.len() as f64 / n as f64;
    let idx: Vec<usize> = (0..n).map(|k| (k as f64 * stride) as usize).collect();
    Dataset {
        features: data.features.select(Axis(0), &idx),
        labels: idx.iter().map(|&i| data.labels[i]).collect(),
    }
}
