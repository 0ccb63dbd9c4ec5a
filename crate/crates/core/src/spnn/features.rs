//! Frequency-domain compression of 28×28 images into short feature vectors.
//!
//! The image is transformed with a 2D FFT, the spectrum is centered so the DC
//! bin sits in the middle, and a small square around the center is kept: 4×4
//! for 16-dimensional features, 8×8 for 64. The retained complex bins are
//! flattened row-major and scaled to unit L2 norm (Σ|fᵢ|² = 1). Features
//! stay complex: they are injected as coherent optical input fields, and the
//! first detection stage takes the modulus after the mesh, so the spectral
//! phase carries usable information.

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::spnn::mnist::MnistSplit;

/// Image side length the extractor operates on.
pub const IMAGE_SIDE: usize = 28;

/// A compressed feature vector. `is_zero` marks an all-zero spectrum (blank
/// image), in which case `values` is the zero vector rather than NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Array1<Complex64>,
    pub is_zero: bool,
}

/// Reusable extractor holding the FFT plan for one feature dimension.
pub struct FeatureExtractor {
    crop: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl FeatureExtractor {
    /// `dim` must be 16 (4×4 crop) or 64 (8×8 crop).
    pub fn new(dim: usize) -> Result<FeatureExtractor> {
        let crop = match dim {
            16 => 4,
            64 => 8,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "feature dimension {other}; supported: 16, 64"
                )))
            }
        };
        let fft = FftPlanner::new().plan_fft_forward(IMAGE_SIDE);
        Ok(FeatureExtractor { crop, fft })
    }

    pub fn dim(&self) -> usize {
        self.crop * self.crop
    }

    /// Extract features from one grayscale image (any linear intensity scale;
    /// the unit-norm output is scale-invariant except for the zero image).
    pub fn extract(&self, image: ArrayView2<'_, f64>) -> Result<FeatureVector> {
        let n = IMAGE_SIDE;
        if image.shape() != [n, n] {
            return Err(Error::InvalidParameter(format!(
                "image shape {:?}, expected [{n}, {n}]",
                image.shape()
            )));
        }
        if image.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("image contains non-finite pixels".into()));
        }
        let mut spec: Vec<Complex64> =
            image.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        // Row FFTs in place, then column FFTs through a scratch column.
        for row in spec.chunks_exact_mut(n) {
            self.fft.process(row);
        }
        let mut col = vec![Complex64::default(); n];
        for x in 0..n {
            for y in 0..n {
                col[y] = spec[y * n + x];
            }
            self.fft.process(&mut col);
            for y in 0..n {
                spec[y * n + x] = col[y];
            }
        }
        // Centered crop: shifted index k reads bin (k + n/2) mod n, so the
        // retained square spans shifted rows/cols [n/2 − crop/2, n/2 + crop/2).
        let lo = n / 2 - self.crop / 2;
        let mut values = Array1::default(self.crop * self.crop);
        for dy in 0..self.crop {
            for dx in 0..self.crop {
                let sy = (lo + dy + n / 2) % n;
                let sx = (lo + dx + n / 2) % n;
                values[dy * self.crop + dx] = spec[sy * n + sx];
            }
        }
        let norm = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(FeatureVector { values, is_zero: true });
        }
        values.mapv_inplace(|v| v / norm);
        Ok(FeatureVector { values, is_zero: false })
    }
}

/// Extract features for a whole split: one row per image, bytes scaled to
/// [0, 1]. Returns the feature matrix and the labels unchanged.
pub fn features_for_split(
    split: &MnistSplit,
    dim: usize,
) -> Result<(Array2<Complex64>, Vec<u8>)> {
    let ex = FeatureExtractor::new(dim)?;
    let n = split.len();
    let mut out = Array2::default((n, dim));
    let mut img = Array2::zeros((IMAGE_SIDE, IMAGE_SIDE));
    for k in 0..n {
        for y in 0..IMAGE_SIDE {
            for x in 0..IMAGE_SIDE {
                img[(y, x)] = split.images[(k, y, x)] as f64 / 255.0;
            }
        }
        let f = ex.extract(img.view())?;
        out.row_mut(k).assign(&f.values);
    }
    Ok((out, split.labels.clone()))
}
