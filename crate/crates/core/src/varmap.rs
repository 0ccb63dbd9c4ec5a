//! Correlated fabrication-variation maps: waveguide width and SOI thickness
//! deviation fields sampled on a regular grid over a wafer or die.
//!
//! Fields are zero-mean Gaussian with std `sigma_w`/`sigma_t` and a Gaussian
//! autocorrelation whose 1/e lag equals `corr_length`. They are synthesized
//! spectrally: white noise is circularly convolved (via FFT on an oversized,
//! wrap-around grid) with the kernel exp(−r²/s²), s = corr_length/√2, which
//! yields autocorrelation exp(−(lag/corr_length)²), then cropped. Wafer maps
//! additionally carry a rotationally symmetric quadratic radial trend.

use crate::error::{Error, Result};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Statistical parameters of a variation map.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct VariationParams {
    /// Width-deviation std, nm.
    pub sigma_w: f64,
    /// Thickness-deviation std, nm.
    pub sigma_t: f64,
    /// 1/e autocorrelation lag, µm.
    pub corr_length: f64,
    /// Grid cell size, µm.
    pub mesh_size: f64,
    /// Peak of the systematic radial offset at the wafer edge, nm (0 = none).
    pub radial_amplitude: f64,
    /// RNG seed; equal seeds reproduce maps bit-exactly.
    pub seed: u64,
}

impl Default for VariationParams {
    fn default() -> Self {
        VariationParams {
            sigma_w: 5.0,
            sigma_t: 2.0,
            corr_length: 1000.0,
            mesh_size: 10.0,
            radial_amplitude: 0.0,
            seed: 0,
        }
    }
}

impl VariationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_w >= 0.0 && self.sigma_w.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma_w = {}", self.sigma_w)));
        }
        if !(self.sigma_t >= 0.0 && self.sigma_t.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma_t = {}", self.sigma_t)));
        }
        if !(self.corr_length > 0.0 && self.corr_length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "corr_length = {}",
                self.corr_length
            )));
        }
        if !(self.mesh_size > 0.0 && self.mesh_size.is_finite()) {
            return Err(Error::InvalidParameter(format!("mesh_size = {}", self.mesh_size)));
        }
        if !self.radial_amplitude.is_finite() {
            return Err(Error::InvalidParameter("radial_amplitude".into()));
        }
        Ok(())
    }
}

/// Axis-aligned rectangle in map coordinates (µm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Rect {
        Rect { x, y, width, height }
    }
}

/// A sampled deviation-field pair on a regular grid. Cell `[iy, ix]` covers
/// x ∈ [origin.0 + ix·mesh, +mesh), y ∈ [origin.1 + iy·mesh, +mesh).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationMap {
    pub params: VariationParams,
    /// Lower-left corner of cell (0,0), µm.
    pub origin: (f64, f64),
    /// Cell size, µm (copied from params; kept explicit for extracted dies).
    pub mesh_size: f64,
    /// Width deviation per cell, nm.
    pub width_dev: Array2<f64>,
    /// Thickness deviation per cell, nm.
    pub thick_dev: Array2<f64>,
}

/// Smallest n ≥ x whose prime factors are all in {2, 3, 5} (fast FFT sizes).
fn next_fast_len(x: usize) -> usize {
    let mut n = x.max(1);
    loop {
        let mut m = n;
        for p in [2usize, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Derive an independent 32-byte ChaCha seed from (seed, stream).
fn derive_seed(seed: u64, stream: u64) -> [u8; 32] {
    // splitmix64 chain over the pair; cheap and collision-free enough for
    // the handful of streams we use.
    let mut state = seed ^ stream.wrapping_mul(0x9e3779b97f4a7c15);
    let mut out = [0u8; 32];
    for chunk in out.chunks_mut(8) {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    out
}

/// 2D FFT (in place over a flat row-major buffer) along both axes.
fn fft2(buf: &mut [Complex64], ny: usize, nx: usize, planner: &mut FftPlanner<f64>, inverse: bool) {
    let fft_x = if inverse {
        planner.plan_fft_inverse(nx)
    } else {
        planner.plan_fft_forward(nx)
    };
    for row in buf.chunks_mut(nx) {
        fft_x.process(row);
    }
    let fft_y = if inverse {
        planner.plan_fft_inverse(ny)
    } else {
        planner.plan_fft_forward(ny)
    };
    let mut col = vec![Complex64::new(0.0, 0.0); ny];
    for x in 0..nx {
        for y in 0..ny {
            col[y] = buf[y * nx + x];
        }
        fft_y.process(&mut col);
        for y in 0..ny {
            buf[y * nx + x] = col[y];
        }
    }
}

/// Correlated zero-mean Gaussian field with unit target std, on a wrap-around
/// grid of `ny_pad × nx_pad` cells, cropped to `ny × nx`.
fn correlated_field(
    ny: usize,
    nx: usize,
    mesh: f64,
    corr_length: f64,
    rng: &mut ChaCha20Rng,
) -> Array2<f64> {
    // Oversize so the crop never sees its own wrap-around (4 corr lengths).
    let pad = ((4.0 * corr_length / mesh).ceil() as usize).max(2);
    let ny_pad = next_fast_len(ny + pad);
    let nx_pad = next_fast_len(nx + pad);
    let n_tot = ny_pad * nx_pad;

    // Gaussian kernel with wrapped distances; s = l/√2 gives a 1/e
    // autocorrelation lag of exactly l after self-correlation.
    let s = corr_length / std::f64::consts::SQRT_2;
    let wrapped = |i: usize, n: usize| mesh * (i.min(n - i) as f64);
    let mut kernel = vec![Complex64::new(0.0, 0.0); n_tot];
    let mut kernel_sq_sum = 0.0f64;
    for y in 0..ny_pad {
        let dy = wrapped(y, ny_pad);
        for x in 0..nx_pad {
            let dx = wrapped(x, nx_pad);
            let g = (-(dx * dx + dy * dy) / (s * s)).exp();
            kernel[y * nx_pad + x] = Complex64::new(g, 0.0);
            kernel_sq_sum += g * g;
        }
    }

    let mut noise = vec![Complex64::new(0.0, 0.0); n_tot];
    for v in noise.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = Complex64::new(z, 0.0);
    }

    let mut planner = FftPlanner::new();
    fft2(&mut kernel, ny_pad, nx_pad, &mut planner, false);
    fft2(&mut noise, ny_pad, nx_pad, &mut planner, false);
    for (n, k) in noise.iter_mut().zip(kernel.iter()) {
        *n *= *k;
    }
    fft2(&mut noise, ny_pad, nx_pad, &mut planner, true);

    // Unnormalized FFT round trip scales by n_tot; the circular convolution
    // of unit white noise with g has variance Σg², so divide that out too.
    let scale = 1.0 / (n_tot as f64 * kernel_sq_sum.sqrt());
    Array2::from_shape_fn((ny, nx), |(y, x)| noise[y * nx_pad + x].re * scale)
}

/// Generate a rectangular die-scale map (no radial trend).
pub fn generate_die_map(
    params: &VariationParams,
    width_um: f64,
    height_um: f64,
    origin: (f64, f64),
) -> Result<VariationMap> {
    params.validate()?;
    if !(width_um >= params.mesh_size && height_um >= params.mesh_size) {
        return Err(Error::InvalidParameter(format!(
            "die extent {width_um}×{height_um} µm is below one mesh cell"
        )));
    }
    let nx = (width_um / params.mesh_size).ceil() as usize;
    let ny = (height_um / params.mesh_size).ceil() as usize;
    let mut rng_w = ChaCha20Rng::from_seed(derive_seed(params.seed, 0));
    let mut rng_t = ChaCha20Rng::from_seed(derive_seed(params.seed, 1));
    let width_dev =
        correlated_field(ny, nx, params.mesh_size, params.corr_length, &mut rng_w).mapv(|v| v * params.sigma_w);
    let thick_dev =
        correlated_field(ny, nx, params.mesh_size, params.corr_length, &mut rng_t).mapv(|v| v * params.sigma_t);
    Ok(VariationMap {
        params: *params,
        origin,
        mesh_size: params.mesh_size,
        width_dev,
        thick_dev,
    })
}

/// Generate a square wafer-scale map spanning [0, diameter]² with the
/// configured radial trend added to both fields.
pub fn generate_wafer_map(params: &VariationParams, wafer_diameter_um: f64) -> Result<VariationMap> {
    params.validate()?;
    if wafer_diameter_um < 10.0 * params.mesh_size {
        return Err(Error::InvalidParameter(format!(
            "wafer diameter {wafer_diameter_um} µm must be at least 10 mesh cells"
        )));
    }
    let mut map = generate_die_map(params, wafer_diameter_um, wafer_diameter_um, (0.0, 0.0))?;
    if params.radial_amplitude != 0.0 {
        let r_wafer = wafer_diameter_um / 2.0;
        let center = wafer_diameter_um / 2.0;
        let mesh = params.mesh_size;
        let (ny, nx) = map.width_dev.dim();
        for iy in 0..ny {
            let cy = (iy as f64 + 0.5) * mesh - center;
            for ix in 0..nx {
                let cx = (ix as f64 + 0.5) * mesh - center;
                let trend = params.radial_amplitude * (cx * cx + cy * cy) / (r_wafer * r_wafer);
                map.width_dev[(iy, ix)] += trend;
                map.thick_dev[(iy, ix)] += trend;
            }
        }
    }
    Ok(map)
}

/// Mean of the configured radial trend over the map grid (0 for die maps).
pub fn radial_trend_mean(map: &VariationMap, wafer_diameter_um: f64) -> f64 {
    if map.params.radial_amplitude == 0.0 {
        return 0.0;
    }
    let r_wafer = wafer_diameter_um / 2.0;
    let center = wafer_diameter_um / 2.0;
    let mesh = map.mesh_size;
    let (ny, nx) = map.width_dev.dim();
    let mut sum = 0.0;
    for iy in 0..ny {
        let cy = (iy as f64 + 0.5) * mesh - center;
        for ix in 0..nx {
            let cx = (ix as f64 + 0.5) * mesh - center;
            sum += map.params.radial_amplitude * (cx * cx + cy * cy) / (r_wafer * r_wafer);
        }
    }
    sum / (ny * nx) as f64
}

impl VariationMap {
    pub fn ncols(&self) -> usize {
        self.width_dev.ncols()
    }

    pub fn nrows(&self) -> usize {
        self.width_dev.nrows()
    }

    /// Full extent of the map, µm.
    pub fn extent(&self) -> (f64, f64) {
        (
            self.ncols() as f64 * self.mesh_size,
            self.nrows() as f64 * self.mesh_size,
        )
    }

    /// Extract a cell-aligned sub-map. `origin` is snapped down to the cell
    /// grid; the result covers at least `width × height` µm.
    pub fn extract_die(&self, origin: (f64, f64), width: f64, height: f64) -> Result<VariationMap> {
        if width <= 0.0 || height <= 0.0 {
            return Err(Error::InvalidParameter("die extent must be positive".into()));
        }
        let eps = 1e-9;
        let fx = (origin.0 - self.origin.0) / self.mesh_size;
        let fy = (origin.1 - self.origin.1) / self.mesh_size;
        let ix0 = (fx + eps).floor();
        let iy0 = (fy + eps).floor();
        if ix0 < 0.0 || iy0 < 0.0 {
            return Err(Error::InvalidParameter("die origin outside the map".into()));
        }
        let (ix0, iy0) = (ix0 as usize, iy0 as usize);
        let nx = ((width / self.mesh_size) - eps).ceil().max(1.0) as usize;
        let ny = ((height / self.mesh_size) - eps).ceil().max(1.0) as usize;
        if ix0 + nx > self.ncols() || iy0 + ny > self.nrows() {
            return Err(Error::InvalidParameter(format!(
                "die [{}..{}]×[{}..{}] exceeds the {}×{} map",
                ix0,
                ix0 + nx,
                iy0,
                iy0 + ny,
                self.ncols(),
                self.nrows()
            )));
        }
        let slice = ndarray::s![iy0..iy0 + ny, ix0..ix0 + nx];
        Ok(VariationMap {
            params: self.params,
            origin: (
                self.origin.0 + ix0 as f64 * self.mesh_size,
                self.origin.1 + iy0 as f64 * self.mesh_size,
            ),
            mesh_size: self.mesh_size,
            width_dev: self.width_dev.slice(slice).to_owned(),
            thick_dev: self.thick_dev.slice(slice).to_owned(),
        })
    }

    /// Normalized x- or y-overlap weights and cell centers of a rect's span.
    fn axis_weights(&self, r0: f64, r1: f64, n_cells: usize) -> Vec<(f64, f64)> {
        let m = self.mesh_size;
        let lo = ((r0 / m).floor().max(0.0)) as usize;
        let hi = ((r1 / m).ceil() as usize).min(n_cells);
        let mut out = Vec::with_capacity(hi.saturating_sub(lo));
        let mut total = 0.0;
        for i in lo..hi {
            let c0 = i as f64 * m;
            let o = (r1.min(c0 + m) - r0.max(c0)).max(0.0);
            if o > 0.0 {
                out.push((c0 + m / 2.0, o));
                total += o;
            }
        }
        for e in &mut out {
            e.1 /= total;
        }
        out
    }

    /// Unit-variance covariance factor between the rect means of `a` and `b`
    /// under the synthesis autocorrelation exp(−(lag/corr_length)²), treating
    /// the field as constant per cell (which it is). Multiply by σ² of the
    /// field to get the covariance of the two sampled means; `a == b` gives
    /// the variance-reduction factor of a single rect mean.
    pub fn rect_mean_cov_factor(&self, a: Rect, b: Rect) -> Result<f64> {
        for r in [a, b] {
            if r.width <= 0.0 || r.height <= 0.0 {
                return Err(Error::InvalidParameter(
                    "covariance rect must have positive area".into(),
                ));
            }
        }
        let l2 = self.params.corr_length * self.params.corr_length;
        let axis_factor = |a0: f64, a1: f64, b0: f64, b1: f64, n: usize| {
            let wa = self.axis_weights(a0, a1, n);
            let wb = self.axis_weights(b0, b1, n);
            let mut s = 0.0;
            for &(ca, fa) in &wa {
                for &(cb, fb) in &wb {
                    let d = ca - cb;
                    s += fa * fb * (-(d * d) / l2).exp();
                }
            }
            s
        };
        let fx = axis_factor(
            a.x - self.origin.0,
            a.x - self.origin.0 + a.width,
            b.x - self.origin.0,
            b.x - self.origin.0 + b.width,
            self.ncols(),
        );
        let fy = axis_factor(
            a.y - self.origin.1,
            a.y - self.origin.1 + a.height,
            b.y - self.origin.1,
            b.y - self.origin.1 + b.height,
            self.nrows(),
        );
        Ok(fx * fy)
    }

    /// Area-weighted mean (width_dev, thick_dev) over every cell overlapping
    /// the rectangle.
    pub fn sample_region(&self, rect: Rect) -> Result<(f64, f64)> {
        if rect.width <= 0.0 || rect.height <= 0.0 {
            return Err(Error::InvalidParameter("sample rect must have positive area".into()));
        }
        let (w_ext, h_ext) = self.extent();
        let rx0 = rect.x - self.origin.0;
        let ry0 = rect.y - self.origin.1;
        let rx1 = rx0 + rect.width;
        let ry1 = ry0 + rect.height;
        let tol = 1e-6 * self.mesh_size;
        if rx0 < -tol || ry0 < -tol || rx1 > w_ext + tol || ry1 > h_ext + tol {
            return Err(Error::InvalidParameter(format!(
                "sample rect ({:.3},{:.3})+({:.3}×{:.3}) outside map extent {:.3}×{:.3}",
                rect.x, rect.y, rect.width, rect.height, w_ext, h_ext
            )));
        }
        let m = self.mesh_size;
        let ix_lo = ((rx0 / m).floor().max(0.0)) as usize;
        let iy_lo = ((ry0 / m).floor().max(0.0)) as usize;
        let ix_hi = ((rx1 / m).ceil() as usize).min(self.ncols());
        let iy_hi = ((ry1 / m).ceil() as usize).min(self.nrows());
        let mut area = 0.0;
        let mut acc_w = 0.0;
        let mut acc_t = 0.0;
        for iy in iy_lo..iy_hi {
            let cy0 = iy as f64 * m;
            let oy = (ry1.min(cy0 + m) - ry0.max(cy0)).max(0.0);
            if oy == 0.0 {
                continue;
            }
            for ix in ix_lo..ix_hi {
                let cx0 = ix as f64 * m;
                let ox = (rx1.min(cx0 + m) - rx0.max(cx0)).max(0.0);
                if ox == 0.0 {
                    continue;
                }
                let w = ox * oy;
                area += w;
                acc_w += w * self.width_dev[(iy, ix)];
                acc_t += w * self.thick_dev[(iy, ix)];
            }
        }
        if area <= 0.0 {
            return Err(Error::Domain("sample rect overlaps no cells".into()));
        }
        Ok((acc_w / area, acc_t / area))
    }

    /// Empirical std of both fields.
    pub fn empirical_sigma(&self) -> (f64, f64) {
        (field_std(&self.width_dev), field_std(&self.thick_dev))
    }

    /// Save to disk; `.json` extension selects JSON, anything else the binary
    /// container. Both round-trip f64 grids exactly.
    pub fn save(&self, path: &Path) -> Result<()> {
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let f = BufWriter::new(std::fs::File::create(path)?);
            serde_json::to_writer(f, self)?;
            return Ok(());
        }
        let mut f = BufWriter::new(std::fs::File::create(path)?);
        f.write_all(MAGIC)?;
        #[derive(Serialize)]
        struct Header<'a> {
            params: &'a VariationParams,
            origin: (f64, f64),
            mesh_size: f64,
            nrows: usize,
            ncols: usize,
        }
        let header = serde_json::to_vec(&Header {
            params: &self.params,
            origin: self.origin,
            mesh_size: self.mesh_size,
            nrows: self.nrows(),
            ncols: self.ncols(),
        })?;
        f.write_u32::<LittleEndian>(header.len() as u32)?;
        f.write_all(&header)?;
        for v in self.width_dev.iter().chain(self.thick_dev.iter()) {
            f.write_f64::<LittleEndian>(*v)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<VariationMap> {
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let f = BufReader::new(std::fs::File::open(path)?);
            return Ok(serde_json::from_reader(f)?);
        }
        let mut f = BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 8];
        f.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a variation-map file (bad magic)".into()));
        }
        let hlen = f.read_u32::<LittleEndian>()? as usize;
        if hlen > 1 << 20 {
            return Err(Error::Format("unreasonable header length".into()));
        }
        let mut hbuf = vec![0u8; hlen];
        f.read_exact(&mut hbuf)?;
        #[derive(Deserialize)]
        struct Header {
            params: VariationParams,
            origin: (f64, f64),
            mesh_size: f64,
            nrows: usize,
            ncols: usize,
        }
        let h: Header = serde_json::from_slice(&hbuf)?;
        let n = h.nrows * h.ncols;
        let mut read_grid = |nrows: usize, ncols: usize| -> Result<Array2<f64>> {
            let mut data = vec![0.0f64; n];
            f.read_f64_into::<LittleEndian>(&mut data)?;
            Array2::from_shape_vec((nrows, ncols), data)
                .map_err(|e| Error::Format(e.to_string()))
        };
        let width_dev = read_grid(h.nrows, h.ncols)?;
        let thick_dev = read_grid(h.nrows, h.ncols)?;
        Ok(VariationMap {
            params: h.params,
            origin: h.origin,
            mesh_size: h.mesh_size,
            width_dev,
            thick_dev,
        })
    }
}

const MAGIC: &[u8; 8] = b"PVARMAP1";

fn field_std(a: &Array2<f64>) -> f64 {
    let n = a.len() as f64;
    let mean = a.sum() / n;
    (a.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// 1/e crossing of the empirical autocorrelation, averaged over both axes,
/// in µm. `max_lag` bounds the scan (cells).
pub fn fitted_corr_length(field: &Array2<f64>, mesh_size: f64, max_lag: usize) -> Result<f64> {
    let (ny, nx) = field.dim();
    let n = (ny * nx) as f64;
    let mean = field.sum() / n;
    let f = field.mapv(|v| v - mean);
    let var = f.iter().map(|v| v * v).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::Domain("constant field has no correlation length".into()));
    }
    let max_lag = max_lag.min(nx.saturating_sub(1)).min(ny.saturating_sub(1));
    let target = (-1.0f64).exp();
    let mut prev = 1.0f64;
    for lag in 1..=max_lag {
        // Products along x and along y at this lag, averaged.
        let mut acc = 0.0;
        let mut cnt = 0usize;
        for y in 0..ny {
            for x in 0..nx - lag {
                acc += f[(y, x)] * f[(y, x + lag)];
                cnt += 1;
            }
        }
        for y in 0..ny - lag {
            for x in 0..nx {
                acc += f[(y, x)] * f[(y + lag, x)];
                cnt += 1;
            }
        }
        let c = acc / (cnt as f64 * var);
        if c < target {
            // Linear interpolation between the bracketing lags.
            let frac = (prev - target) / (prev - c);
            return Ok(((lag - 1) as f64 + frac) * mesh_size);
        }
        prev = c;
    }
    Err(Error::Domain(format!(
        "autocorrelation never crossed 1/e within {max_lag} lags"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params(seed: u64) -> VariationParams {
        VariationParams {
            sigma_w: 5.0,
            sigma_t: 2.0,
            corr_length: 100.0,
            mesh_size: 10.0,
            radial_amplitude: 0.0,
            seed,
        }
    }

    #[test]
    fn deterministic_by_seed() {
        let p = small_params(11);
        let a = generate_die_map(&p, 1000.0, 800.0, (0.0, 0.0)).unwrap();
        let b = generate_die_map(&p, 1000.0, 800.0, (0.0, 0.0)).unwrap();
        assert_eq!(a.width_dev, b.width_dev);
        assert_eq!(a.thick_dev, b.thick_dev);
        let c = generate_die_map(&small_params(12), 1000.0, 800.0, (0.0, 0.0)).unwrap();
        assert_ne!(a.width_dev, c.width_dev);
    }

    #[test]
    fn empirical_sigma_and_corr_length_match_parameters() {
        // 4 mm die at l = 100 µm: plenty of independent patches for a tight
        // check on a fixed seed.
        let p = small_params(1);
        let map = generate_die_map(&p, 4000.0, 4000.0, (0.0, 0.0)).unwrap();
        let (sw, st) = map.empirical_sigma();
        assert!((sw - 5.0).abs() / 5.0 < 0.10, "sigma_w {sw}");
        assert!((st - 2.0).abs() / 2.0 < 0.10, "sigma_t {st}");
        let lw = fitted_corr_length(&map.width_dev, 10.0, 60).unwrap();
        assert!((lw - 100.0).abs() / 100.0 < 0.20, "corr length {lw}");
    }

    #[test]
    fn fields_are_independent_and_quadrants_agree() {
        let p = small_params(5);
        let map = generate_die_map(&p, 4000.0, 4000.0, (0.0, 0.0)).unwrap();
        // Cross-correlation at lag 0.
        let n = map.width_dev.len() as f64;
        let mw = map.width_dev.sum() / n;
        let mt = map.thick_dev.sum() / n;
        let mut num = 0.0;
        for (a, b) in map.width_dev.iter().zip(map.thick_dev.iter()) {
            num += (a - mw) * (b - mt);
        }
        let (sw, st) = map.empirical_sigma();
        let rho = num / (n * sw * st);
        assert!(rho.abs() < 0.1, "cross-correlation {rho}");
        // Per-quadrant sigma within 15% of the full-map value.
        let (ny, nx) = map.width_dev.dim();
        for (y0, x0) in [(0, 0), (0, nx / 2), (ny / 2, 0), (ny / 2, nx / 2)] {
            let q = map
                .width_dev
                .slice(ndarray::s![y0..y0 + ny / 2, x0..x0 + nx / 2])
                .to_owned();
            let s = field_std(&q);
            assert!((s - sw).abs() / sw < 0.15, "quadrant sigma {s} vs {sw}");
        }
    }

    #[test]
    fn wafer_map_mean_is_consistent_with_the_radial_trend() {
        let mut p = small_params(3);
        p.radial_amplitude = 4.0;
        let d = 4000.0;
        let map = generate_wafer_map(&p, d).unwrap();
        let trend_mean = radial_trend_mean(&map, d);
        // Correlated samples: the standard error uses the effective sample
        // count n_eff ≈ n·mesh²/(π l²), not the raw cell count.
        let n = map.width_dev.len() as f64;
        let n_eff = n * p.mesh_size * p.mesh_size / (std::f64::consts::PI * p.corr_length * p.corr_length);
        let se = p.sigma_w / n_eff.sqrt();
        let mean = map.width_dev.sum() / n;
        assert!(
            (mean - trend_mean).abs() < 3.0 * se,
            "mean {mean} vs trend mean {trend_mean} (se {se})"
        );
        // Quadratic bowl over the square grid: mean of (x²+y²)/R² with
        // x,y ~ U[-R, R] is 2/3·A.
        assert!((trend_mean - 4.0 * 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn wafer_diameter_precondition() {
        let p = small_params(0);
        assert!(generate_wafer_map(&p, 50.0).is_err());
    }

    #[test]
    fn extract_die_exact_subgrid_and_identity() {
        let p = small_params(9);
        let map = generate_die_map(&p, 500.0, 400.0, (0.0, 0.0)).unwrap();
        let full = map.extract_die((0.0, 0.0), 500.0, 400.0).unwrap();
        assert_eq!(full.width_dev, map.width_dev);
        let single = map.extract_die((120.0, 50.0), 10.0, 10.0).unwrap();
        assert_eq!(single.width_dev.dim(), (1, 1));
        assert_eq!(single.width_dev[(0, 0)], map.width_dev[(5, 12)]);
        assert_eq!(single.origin, (120.0, 50.0));
        assert!(map.extract_die((490.0, 0.0), 100.0, 10.0).is_err());
    }

    #[test]
    fn sample_region_matches_brute_force() {
        let p = small_params(21);
        let map = generate_die_map(&p, 300.0, 300.0, (0.0, 0.0)).unwrap();
        let rect = Rect::new(17.0, 41.5, 135.0, 0.5);
        let got = map.sample_region(rect).unwrap();
        // Independent brute force over every cell in the map.
        let m = map.mesh_size;
        let (mut area, mut accw, mut acct) = (0.0, 0.0, 0.0);
        for iy in 0..map.nrows() {
            for ix in 0..map.ncols() {
                let (cx0, cy0) = (ix as f64 * m, iy as f64 * m);
                let ox = (rect.x + rect.width).min(cx0 + m) - rect.x.max(cx0);
                let oy = (rect.y + rect.height).min(cy0 + m) - rect.y.max(cy0);
                if ox > 0.0 && oy > 0.0 {
                    area += ox * oy;
                    accw += ox * oy * map.width_dev[(iy, ix)];
                    acct += ox * oy * map.thick_dev[(iy, ix)];
                }
            }
        }
        assert!((got.0 - accw / area).abs() < 1e-12);
        assert!((got.1 - acct / area).abs() < 1e-12);
        // A cell-interior rect returns that cell's value exactly.
        let inner = map.sample_region(Rect::new(102.0, 203.0, 4.0, 4.0)).unwrap();
        assert_eq!(inner.0, map.width_dev[(20, 10)]);
        // Out-of-bounds errors.
        assert!(map.sample_region(Rect::new(-20.0, 0.0, 10.0, 10.0)).is_err());
    }

    #[test]
    fn serialization_round_trips_bit_exactly() {
        let p = small_params(33);
        let map = generate_die_map(&p, 200.0, 150.0, (30.0, 60.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for name in ["map.bin", "map.json"] {
            let path = dir.path().join(name);
            map.save(&path).unwrap();
            let rt = VariationMap::load(&path).unwrap();
            assert_eq!(rt.width_dev, map.width_dev, "{name}");
            assert_eq!(rt.thick_dev, map.thick_dev, "{name}");
            assert_eq!(rt.origin, map.origin);
            assert_eq!(rt.params, map.params);
        }
        // Corrupt magic is rejected as a format error.
        let path = dir.path().join("bad.bin");
        std::fs::write(&path, b"NOTAMAP_whatever").unwrap();
        match VariationMap::load(&path) {
            Err(Error::Format(_)) => {}
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn next_fast_len_basics() {
        assert_eq!(next_fast_len(1), 1);
        assert_eq!(next_fast_len(7), 8);
        assert_eq!(next_fast_len(241), 243);
        assert_eq!(next_fast_len(2049), 2160);
    }

    /// Oracle for the separable factorization: re-derive the rect-mean
    /// covariance factor as a single Euclidean-distance double sum over all
    /// overlapped cell pairs, without assuming the ACF factorizes per axis.
    fn naive_cov_factor(map: &VariationMap, a: Rect, b: Rect) -> f64 {
        let m = map.mesh_size;
        let cells = |r: Rect| -> Vec<(f64, f64, f64)> {
            let rx0 = r.x - map.origin.0;
            let ry0 = r.y - map.origin.1;
            let (rx1, ry1) = (rx0 + r.width, ry0 + r.height);
            let mut out = Vec::new();
            let mut total = 0.0;
            for iy in 0..map.nrows() {
                for ix in 0..map.ncols() {
                    let (cx0, cy0) = (ix as f64 * m, iy as f64 * m);
                    let ox = (rx1.min(cx0 + m) - rx0.max(cx0)).max(0.0);
                    let oy = (ry1.min(cy0 + m) - ry0.max(cy0)).max(0.0);
                    if ox > 0.0 && oy > 0.0 {
                        out.push((cx0 + m / 2.0, cy0 + m / 2.0, ox * oy));
                        total += ox * oy;
                    }
                }
            }
            for e in &mut out {
                e.2 /= total;
            }
            out
        };
        let (ca, cb) = (cells(a), cells(b));
        let l2 = map.params.corr_length * map.params.corr_length;
        let mut s = 0.0;
        for &(xa, ya, fa) in &ca {
            for &(xb, yb, fb) in &cb {
                let d2 = (xa - xb).powi(2) + (ya - yb).powi(2);
                s += fa * fb * (-d2 / l2).exp();
            }
        }
        s
    }

    #[test]
    fn rect_mean_cov_factor_matches_naive_double_sum() {
        let mut p = small_params(3);
        p.corr_length = 70.0;
        let map = generate_die_map(&p, 300.0, 200.0, (20.0, -10.0)).unwrap();
        // Cell-unaligned rects exercise the partial-overlap weights.
        let a = Rect::new(43.4, 21.2, 137.0, 12.5);
        let b = Rect::new(81.0, 48.9, 55.0, 41.0);
        let c = Rect::new(200.0, 150.0, 30.0, 8.0);
        for (ra, rb) in [(a, b), (b, a), (a, a), (a, c), (b, c)] {
            let got = map.rect_mean_cov_factor(ra, rb).unwrap();
            let want = naive_cov_factor(&map, ra, rb);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "factor {got} vs naive {want}"
            );
        }
        // Self-factor of any rect is a variance-reduction factor in (0, 1].
        for r in [a, b, c] {
            let f = map.rect_mean_cov_factor(r, r).unwrap();
            assert!(f > 0.0 && f <= 1.0 + 1e-12, "self factor {f}");
        }
        assert!(map.rect_mean_cov_factor(a, Rect::new(0.0, 0.0, 0.0, 5.0)).is_err());
    }

    #[test]
    fn rect_mean_cov_factor_predicts_generated_field_covariance() {
        // End-to-end: predicted cell-grid covariances must describe the means
        // actually sampled from generated maps, for both fields, including a
        // nearly-decorrelated far pair. Arm-like 135×1 µm rects 15 µm apart
        // mirror how device arms read the map.
        let mut p = small_params(0);
        let a = Rect::new(103.7, 101.2, 135.0, 1.0);
        let b = Rect::new(103.7, 116.2, 135.0, 1.0);
        let far = Rect::new(103.7, 321.2, 135.0, 1.0);
        let n = 1600;
        let mut s: [Vec<f64>; 4] = [vec![], vec![], vec![], vec![]];
        for k in 0..n {
            p.seed = 40_000 + k;
            let map = generate_die_map(&p, 600.0, 340.0, (0.0, 0.0)).unwrap();
            let (wa, ta) = map.sample_region(a).unwrap();
            let (wb, tb) = map.sample_region(b).unwrap();
            let (wf, _) = map.sample_region(far).unwrap();
            s[0].push(wa);
            s[1].push(wb);
            s[2].push(wf);
            s[3].push(ta - tb);
        }
        let cov = |x: &[f64], y: &[f64]| {
            let (mx, my) = (
                x.iter().sum::<f64>() / x.len() as f64,
                y.iter().sum::<f64>() / y.len() as f64,
            );
            x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum::<f64>() / (x.len() - 1) as f64
        };
        let map0 = generate_die_map(&p, 600.0, 340.0, (0.0, 0.0)).unwrap();
        let f_aa = map0.rect_mean_cov_factor(a, a).unwrap();
        let f_ab = map0.rect_mean_cov_factor(a, b).unwrap();
        let f_af = map0.rect_mean_cov_factor(a, far).unwrap();
        let sw2 = p.sigma_w * p.sigma_w;
        // ~3 standard errors at n = 1600 for factors of this size.
        assert!((cov(&s[0], &s[0]) / sw2 - f_aa).abs() < 0.08, "var(A)");
        assert!((cov(&s[0], &s[1]) / sw2 - f_ab).abs() < 0.08, "cov(A,B)");
        assert!(f_af < 0.01 && (cov(&s[0], &s[2]) / sw2 - f_af).abs() < 0.08, "cov(A,far)");
        // Differential thickness across the arm pair: Var = σ_t²(f_aa+f_bb−2f_ab).
        let f_bb = map0.rect_mean_cov_factor(b, b).unwrap();
        let pred = p.sigma_t * p.sigma_t * (f_aa + f_bb - 2.0 * f_ab);
        let got = cov(&s[3], &s[3]);
        assert!(
            (got - pred).abs() < 0.15 * pred.max(p.sigma_t * p.sigma_t * 0.02),
            "diff-thickness var {got} vs {pred}"
        );
        // Width and thickness fields are independent.
        assert!((cov(&s[0], &s[3]) / (p.sigma_w * p.sigma_t)).abs() < 0.05);
    }
}
