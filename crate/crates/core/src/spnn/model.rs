//! Fully connected networks with magnitude detection between layers.
//!
//! The forward pass of layer m is Oₘ = fₘ(|Wₘ·Oₘ₋₁|): a complex-valued
//! matrix-vector product on optical fields, modulus detection, then the
//! activation on the detected magnitudes. Both the input O₀ (frequency-domain
//! features keep their phase) and the weights are complex — the mesh hardware
//! realizes arbitrary complex matrices natively, and the phase freedom in the
//! weights is what lets the first detection stage exploit feature phase.
//! Hidden activations are Softplus; the output layer is LogSoftMax and
//! training minimizes the negative log-likelihood. The subgradient of |z| at
//! z = 0 is taken as 0.
//!
//! Gradients for the complex weights follow from ∂|u|/∂W with u = W·x:
//! stepping W along −(G ⊙ u/|u|)·x̄ descends the loss in the (Re, Im)
//! parameterization, and the loss signal entering a layer's real input is
//! Re[(Ḡ ⊙ ū/|u|)·W].

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Cmat;

/// Class count of the canonical digit-recognition networks.
pub const N_CLASSES: usize = 10;

/// Weights of a fully connected stack; `weights[m]` maps layer input to
/// output as `y = W x` (rows = outputs). Softplus follows every layer except
/// the last, which feeds LogSoftMax.
#[derive(Debug, Clone, PartialEq)]
pub struct SpnnModel {
    pub weights: Vec<Cmat>,
}

pub(crate) fn softplus(z: f64) -> f64 {
    // Stable: ln(1+e^z) = max(z,0) + ln(1+e^{−|z|}).
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// u/|u| with the value at 0 fixed to 0 (matching the |·| subgradient).
fn unit_phase(u: Complex64) -> Complex64 {
    let n = u.norm();
    if n == 0.0 {
        Complex64::default()
    } else {
        u / n
    }
}

/// Row-wise log-softmax, numerically stable.
pub(crate) fn log_softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln() + max;
        row.mapv_inplace(|v| v - lse);
    }
    out
}

impl SpnnModel {
    /// Seeded complex Gaussian initialization with per-layer scale E|W|² =
    /// 1/fan_in. `dims` lists (outputs, inputs) per layer; consecutive layers
    /// must chain.
    pub fn init(dims: &[(usize, usize)], seed: u64) -> Result<SpnnModel> {
        if dims.is_empty() {
            return Err(Error::InvalidParameter("a network needs at least one layer".into()));
        }
        for win in dims.windows(2) {
            if win[0].0 != win[1].1 {
                return Err(Error::InvalidParameter(format!(
                    "layer outputs {} feed layer inputs {}",
                    win[0].0, win[1].1
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = dims
            .iter()
            .map(|&(rows, cols)| {
                let scale = 1.0 / (2.0 * cols as f64).sqrt();
                Array2::from_shape_fn((rows, cols), |_| {
                    let re: f64 = rand_distr::StandardNormal.sample(&mut rng);
                    let im: f64 = rand_distr::StandardNormal.sample(&mut rng);
                    Complex64::new(scale * re, scale * im)
                })
            })
            .collect();
        Ok(SpnnModel { weights })
    }

    /// The 16-feature digit classifier: FC(16,16)-SP-FC(16,16)-SP-FC(16,10)-LSM.
    pub fn network1(seed: u64) -> SpnnModel {
        SpnnModel::init(&[(16, 16), (16, 16), (N_CLASSES, 16)], seed).unwrap()
    }

    /// The 64-feature digit classifier: FC(64,64)-SP-FC(64,64)-SP-FC(64,10)-LSM.
    pub fn network2(seed: u64) -> SpnnModel {
        SpnnModel::init(&[(64, 64), (64, 64), (N_CLASSES, 64)], seed).unwrap()
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().unwrap().nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::InvalidParameter("a network needs at least one layer".into()));
        }
        for (m, win) in self.weights.windows(2).enumerate() {
            if win[0].nrows() != win[1].ncols() {
                return Err(Error::InvalidParameter(format!(
                    "layer {m} outputs {} but layer {} expects {}",
                    win[0].nrows(),
                    m + 1,
                    win[1].ncols()
                )));
            }
        }
        if self
            .weights
            .iter()
            .any(|w| w.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()))
        {
            return Err(Error::Domain("non-finite weight".into()));
        }
        Ok(())
    }

    /// Log-probability outputs for a batch of complex input fields
    /// (rows = samples).
    pub fn forward_batch(&self, x: ArrayView2<'_, Complex64>) -> Array2<f64> {
        let last = self.weights.len() - 1;
        let mut a = x.to_owned();
        let mut mag = Array2::zeros((0, 0));
        for (m, w) in self.weights.iter().enumerate() {
            let u = a.dot(&w.t());
            mag = u.mapv(Complex64::norm);
            if m < last {
                a = mag.mapv(|z| Complex64::from(softplus(z)));
            }
        }
        log_softmax_rows(&mag)
    }

    /// Log-probabilities for a single sample.
    pub fn forward(&self, x: ArrayView1<'_, Complex64>) -> Array1<f64> {
        let x2 = x.insert_axis(Axis(0));
        self.forward_batch(x2).index_axis(Axis(0), 0).to_owned()
    }

    /// Argmax class per sample.
    pub fn predict(&self, x: ArrayView2<'_, Complex64>) -> Vec<usize> {
        argmax_rows(&self.forward_batch(x))
    }

    /// Fraction of samples classified correctly.
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        self.check_data(data)?;
        let pred = self.predict(data.features.view());
        Ok(fraction_correct(&pred, &data.labels))
    }

    fn check_data(&self, data: &Dataset) -> Result<()> {
        if data.features.ncols() != self.input_dim() {
            return Err(Error::InvalidParameter(format!(
                "{}-dimensional features for a {}-input network",
                data.features.ncols(),
                self.input_dim()
            )));
        }
        if data.features.nrows() != data.labels.len() {
            return Err(Error::InvalidParameter("feature/label count mismatch".into()));
        }
        if data.labels.iter().any(|&l| l as usize >= self.output_dim()) {
            return Err(Error::InvalidParameter("label outside the output range".into()));
        }
        Ok(())
    }

    /// Mini-batch SGD with momentum on the negative log-likelihood.
    /// Deterministic for a fixed seed. Fails if the loss goes non-finite.
    pub fn train(&mut self, data: &Dataset, params: &TrainParams) -> Result<TrainReport> {
        self.validate()?;
        self.check_data(data)?;
        params.validate()?;
        let n = data.features.nrows();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut order: Vec<usize> = (0..n).collect();
        let mut velocity: Vec<Cmat> =
            self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect();
        let mut epoch_loss = Vec::with_capacity(params.epochs);
        for epoch in 0..params.epochs {
            order.shuffle(&mut rng);
            let lr = params.learning_rate * params.lr_decay.powi(epoch as i32);
            let mut loss_sum = 0.0;
            for chunk in order.chunks(params.batch_size) {
                let xb = data.features.select(Axis(0), chunk);
                let yb: Vec<u8> = chunk.iter().map(|&i| data.labels[i]).collect();
                let (loss, grads) = self.batch_gradient(&xb, &yb);
                loss_sum += loss * chunk.len() as f64;
                for ((w, v), g) in self.weights.iter_mut().zip(&mut velocity).zip(&grads) {
                    v.zip_mut_with(g, |v, &g| *v = params.momentum * *v - lr * g);
                    *w += &*v;
                }
            }
            let mean_loss = loss_sum / n as f64;
            if !mean_loss.is_finite() {
                return Err(Error::Domain(format!(
                    "training diverged at epoch {epoch}: loss {mean_loss}"
                )));
            }
            epoch_loss.push(mean_loss);
        }
        let train_accuracy = self.accuracy(data)?;
        Ok(TrainReport { epoch_loss, train_accuracy })
    }

    /// Mean NLL over the batch and the complex weight gradients.
    fn batch_gradient(&self, x: &Cmat, labels: &[u8]) -> (f64, Vec<Cmat>) {
        let b = x.nrows() as f64;
        let last = self.weights.len() - 1;
        // acts[m] is the (complex) input of layer m; us[m] its pre-detection
        // product.
        let mut acts: Vec<Cmat> = Vec::with_capacity(self.weights.len());
        let mut us: Vec<Cmat> = Vec::with_capacity(self.weights.len());
        acts.push(x.clone());
        for (m, w) in self.weights.iter().enumerate() {
            let u = acts[m].dot(&w.t());
            if m < last {
                acts.push(u.mapv(|c| Complex64::from(softplus(c.norm()))));
            }
            us.push(u);
        }
        let z_last = us[last].mapv(Complex64::norm);
        let logp = log_softmax_rows(&z_last);
        let mut loss = 0.0;
        // dL/dz_last = softmax − one-hot, averaged over the batch.
        let mut g = logp.mapv(f64::exp);
        for (i, &lab) in labels.iter().enumerate() {
            loss -= logp[(i, lab as usize)];
            g[(i, lab as usize)] -= 1.0;
        }
        loss /= b;
        g.mapv_inplace(|v| v / b);
        let mut grads: Vec<Cmat> = Vec::with_capacity(self.weights.len());
        for m in (0..self.weights.len()).rev() {
            // Through the modulus: gu = g ⊙ u/|u|.
            let mut gu = us[m].mapv(unit_phase);
            gu.zip_mut_with(&g, |v, &s| *v *= s);
            grads.push(gu.t().dot(&acts[m].mapv(|c| c.conj())));
            if m > 0 {
                // Signal into the (real) activation feeding this layer, then
                // through the Softplus of the previous detection stage.
                let back = gu.mapv(|c| c.conj()).dot(&self.weights[m]);
                g = back.mapv(|c| c.re);
                g.zip_mut_with(&us[m - 1], |v, &u| *v *= sigmoid(u.norm()));
            }
        }
        grads.reverse();
        (loss, grads)
    }
}

pub(crate) fn argmax_rows(logp: &Array2<f64>) -> Vec<usize> {
    logp.rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap()
        })
        .collect()
}

pub(crate) fn fraction_correct(pred: &[usize], labels: &[u8]) -> f64 {
    let hits = pred.iter().zip(labels).filter(|&(&p, &l)| p == l as usize).count();
    hits as f64 / labels.len().max(1) as f64
}

/// Complex feature matrix (rows = samples) with labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Cmat,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new(features: Cmat, labels: Vec<u8>) -> Result<Dataset> {
        if features.nrows() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} feature rows for {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        Ok(Dataset { features, labels })
    }

    /// Wrap real-valued features (zero imaginary parts).
    pub fn from_real(features: Array2<f64>, labels: Vec<u8>) -> Result<Dataset> {
        Dataset::new(features.mapv(Complex64::from), labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The first `n` samples (or all, if fewer).
    pub fn head(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset {
            features: self.features.slice(ndarray::s![..n, ..]).to_owned(),
            labels: self.labels[..n].to_vec(),
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainParams {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Multiplicative step-size decay per epoch.
    pub lr_decay: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> TrainParams {
        TrainParams {
            epochs: 20,
            batch_size: 64,
            learning_rate: 0.1,
            lr_decay: 0.9,
            momentum: 0.9,
            seed: 7,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter("epochs and batch size must be positive".into()));
        }
        if !(self.learning_rate >= 0.0 && self.lr_decay > 0.0 && (0.0..1.0).contains(&self.momentum))
        {
            return Err(Error::InvalidParameter(format!(
                "learning rate {} / decay {} / momentum {} out of range",
                self.learning_rate, self.lr_decay, self.momentum
            )));
        }
        Ok(())
    }
}

/// Per-epoch mean loss and final training-set accuracy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_loss: Vec<f64>,
    pub train_accuracy: f64,
}

/// Serialized weight container: layer dims, row-major complex weights split
/// into real/imaginary planes, activation tags, and training provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightArchive {
    pub feature_dim: usize,
    pub layers: Vec<LayerRecord>,
    pub activations: Vec<String>,
    pub metadata: ArchiveMetadata,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerRecord {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ArchiveMetadata {
    pub seed: u64,
    pub epochs: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

impl WeightArchive {
    pub fn from_model(model: &SpnnModel, metadata: ArchiveMetadata) -> WeightArchive {
        let mut activations: Vec<String> =
            vec!["softplus".into(); model.weights.len().saturating_sub(1)];
        activations.push("logsoftmax".into());
        WeightArchive {
            feature_dim: model.input_dim(),
            layers: model
                .weights
                .iter()
                .map(|w| LayerRecord {
                    rows: w.nrows(),
                    cols: w.ncols(),
                    re: w.iter().map(|c| c.re).collect(),
                    im: w.iter().map(|c| c.im).collect(),
                })
                .collect(),
            activations,
            metadata,
        }
    }

    pub fn to_model(&self) -> Result<SpnnModel> {
        let mut weights = Vec::with_capacity(self.layers.len());
        for rec in &self.layers {
            if rec.re.len() != rec.im.len() {
                return Err(Error::Format("real/imaginary plane length mismatch".into()));
            }
            let data: Vec<Complex64> = rec
                .re
                .iter()
                .zip(&rec.im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect();
            let w = Array2::from_shape_vec((rec.rows, rec.cols), data)
                .map_err(|e| Error::Format(format!("weight layer shape: {e}")))?;
            weights.push(w);
        }
        let model = SpnnModel { weights };
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, json).map_err(|e| Error::io_at(path, e))
    }

    pub fn load(path: &Path) -> Result<WeightArchive> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}
