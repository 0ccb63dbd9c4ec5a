//! Waveguide physics surface: effective-index evaluation for strip and ridge
//! silicon waveguides, width/thickness sensitivities, propagation-constant
//! deviations under fabrication offsets, and directional-coupler response.
//!
//! Downstream code only depends on [`EffIndexModel`]; the bundled evaluators
//! are an analytic effective-index-method surrogate ([`eim::EimModel`]) and a
//! table interpolator ([`table::NeffTable`]) for data imported from external
//! mode solvers.

pub mod eim;
pub mod table;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const N_SILICON: f64 = 3.476;
pub const N_OXIDE: f64 = 1.444;
pub const N_AIR: f64 = 1.0;

/// Nominal single-mode design point.
pub const NOMINAL_WIDTH_NM: f64 = 470.0;
pub const NOMINAL_THICKNESS_NM: f64 = 220.0;
pub const NOMINAL_WAVELENGTH_NM: f64 = 1550.0;
/// Exposed slab height of the shallow-etched ridge, nm.
pub const RIDGE_SLAB_NM: f64 = 150.0;

/// Searchable width range, nm.
pub const WIDTH_MIN_NM: f64 = 350.0;
pub const WIDTH_MAX_NM: f64 = 1200.0;

/// Extra margin the evaluators accept around the width range so central
/// finite differences stay usable at the boundaries.
const WIDTH_PROBE_MARGIN_NM: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Fully etched channel waveguide.
    Strip,
    /// Shallow-etched waveguide with an exposed Si slab on both sides.
    Ridge,
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Geometry::Strip => write!(f, "strip"),
            Geometry::Ridge => write!(f, "ridge"),
        }
    }
}

impl std::str::FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Geometry> {
        match s.to_ascii_lowercase().as_str() {
            "strip" => Ok(Geometry::Strip),
            "ridge" => Ok(Geometry::Ridge),
            other => Err(Error::InvalidParameter(format!("unknown geometry '{other}'"))),
        }
    }
}

/// Cross-section of one waveguide at one wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    pub geometry: Geometry,
    pub width_nm: f64,
    pub thickness_nm: f64,
    /// Exposed slab height for ridge, 0 for strip.
    pub slab_height_nm: f64,
    pub wavelength_nm: f64,
}

impl WaveguideSpec {
    pub fn new(
        geometry: Geometry,
        width_nm: f64,
        thickness_nm: f64,
        wavelength_nm: f64,
    ) -> Result<WaveguideSpec> {
        let slab_height_nm = match geometry {
            Geometry::Strip => 0.0,
            Geometry::Ridge => RIDGE_SLAB_NM,
        };
        let spec = WaveguideSpec {
            geometry,
            width_nm,
            thickness_nm,
            slab_height_nm,
            wavelength_nm,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Nominal cross-section for a geometry.
    pub fn nominal(geometry: Geometry) -> WaveguideSpec {
        WaveguideSpec::new(
            geometry,
            NOMINAL_WIDTH_NM,
            NOMINAL_THICKNESS_NM,
            NOMINAL_WAVELENGTH_NM,
        )
        .expect("nominal spec is valid")
    }

    pub fn with_width(mut self, width_nm: f64) -> WaveguideSpec {
        self.width_nm = width_nm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(WIDTH_MIN_NM..=WIDTH_MAX_NM).contains(&self.width_nm) {
            return Err(Error::InvalidParameter(format!(
                "width {} nm outside [{WIDTH_MIN_NM}, {WIDTH_MAX_NM}]",
                self.width_nm
            )));
        }
        if !(self.thickness_nm > self.slab_height_nm && self.slab_height_nm >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "thickness {} nm must exceed slab height {} nm",
                self.thickness_nm, self.slab_height_nm
            )));
        }
        if !(self.wavelength_nm > 0.0) {
            return Err(Error::InvalidParameter("wavelength must be positive".into()));
        }
        Ok(())
    }

    /// Loose bound used by evaluators: the validated range plus the probe
    /// margin needed for finite differences at the range edges.
    pub(crate) fn in_probe_range(&self) -> bool {
        self.width_nm >= WIDTH_MIN_NM - WIDTH_PROBE_MARGIN_NM
            && self.width_nm <= WIDTH_MAX_NM + WIDTH_PROBE_MARGIN_NM
            && self.thickness_nm > self.slab_height_nm
            && self.slab_height_nm >= 0.0
            && self.wavelength_nm > 0.0
    }
}

/// Anything that can evaluate a guided-mode effective index.
pub trait EffIndexModel: Send + Sync {
    /// Effective index of the fundamental quasi-TE mode.
    fn n_eff(&self, spec: &WaveguideSpec) -> Result<f64>;
    /// Where the numbers come from ("analytic-surrogate" or "table").
    fn provenance(&self) -> &'static str;
}

/// Width/thickness derivatives of n_eff, per nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    pub dn_dw: f64,
    pub dn_dt: f64,
}

/// Central finite difference with a 1 nm step in each geometric parameter.
pub fn dn_eff(model: &dyn EffIndexModel, spec: &WaveguideSpec) -> Result<Sensitivity> {
    let h = 1.0;
    let wp = model.n_eff(&WaveguideSpec {
        width_nm: spec.width_nm + h,
        ..*spec
    })?;
    let wm = model.n_eff(&WaveguideSpec {
        width_nm: spec.width_nm - h,
        ..*spec
    })?;
    let tp = model.n_eff(&WaveguideSpec {
        thickness_nm: spec.thickness_nm + h,
        ..*spec
    })?;
    let tm = model.n_eff(&WaveguideSpec {
        thickness_nm: spec.thickness_nm - h,
        ..*spec
    })?;
    Ok(Sensitivity {
        dn_dw: (wp - wm) / (2.0 * h),
        dn_dt: (tp - tm) / (2.0 * h),
    })
}

/// Propagation-constant deviation in rad/µm under width/thickness offsets
/// (nm). Linear by construction: partials are evaluated once at `spec`.
pub fn delta_beta(
    model: &dyn EffIndexModel,
    spec: &WaveguideSpec,
    rho_w_nm: f64,
    rho_t_nm: f64,
) -> Result<f64> {
    let s = dn_eff(model, spec)?;
    Ok(delta_beta_from_sensitivity(&s, spec.wavelength_nm, rho_w_nm, rho_t_nm))
}

/// Same as [`delta_beta`] with precomputed sensitivities (hot path for the
/// width searches).
pub fn delta_beta_from_sensitivity(
    s: &Sensitivity,
    wavelength_nm: f64,
    rho_w_nm: f64,
    rho_t_nm: f64,
) -> f64 {
    // 2π/λ in rad/µm is 2000π/λ[nm].
    let k = 2000.0 * std::f64::consts::PI / wavelength_nm;
    k * (s.dn_dw * rho_w_nm + s.dn_dt * rho_t_nm)
}

/// Precomputed per-nm sensitivities over the full searchable width range, the
/// hot path for exhaustive width searches and device sampling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensitivityTable {
    pub geometry: Geometry,
    pub wavelength_nm: f64,
    /// Index 0 corresponds to the minimum searchable width; 1 nm spacing.
    pub dn_dw: Vec<f64>,
    pub dn_dt: Vec<f64>,
}

impl SensitivityTable {
    pub fn build(model: &dyn EffIndexModel, geometry: Geometry) -> Result<SensitivityTable> {
        let base = WaveguideSpec::nominal(geometry);
        let count = (WIDTH_MAX_NM - WIDTH_MIN_NM) as usize + 1;
        let mut dn_dw = Vec::with_capacity(count);
        let mut dn_dt = Vec::with_capacity(count);
        for i in 0..count {
            let s = dn_eff(model, &base.with_width(WIDTH_MIN_NM + i as f64))?;
            dn_dw.push(s.dn_dw);
            dn_dt.push(s.dn_dt);
        }
        Ok(SensitivityTable {
            geometry,
            wavelength_nm: base.wavelength_nm,
            dn_dw,
            dn_dt,
        })
    }

    pub fn min_width_nm(&self) -> f64 {
        WIDTH_MIN_NM
    }

    pub fn width_count(&self) -> usize {
        self.dn_dw.len()
    }

    /// Sensitivities at the nearest tabulated width (designs use integer nm).
    pub fn at(&self, width_nm: f64) -> Sensitivity {
        let i = ((width_nm - WIDTH_MIN_NM).round() as isize)
            .clamp(0, self.dn_dw.len() as isize - 1) as usize;
        Sensitivity {
            dn_dw: self.dn_dw[i],
            dn_dt: self.dn_dt[i],
        }
    }

    /// Propagation-constant deviation (rad/µm) at a given design width.
    pub fn delta_beta(&self, width_nm: f64, rho_w_nm: f64, rho_t_nm: f64) -> f64 {
        delta_beta_from_sensitivity(&self.at(width_nm), self.wavelength_nm, rho_w_nm, rho_t_nm)
    }
}

/// Directional coupler nominal design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcSpec {
    /// Coupling length, µm.
    pub length_um: f64,
    /// Gap between the coupled waveguides, nm.
    pub gap_nm: f64,
    /// Nominal cross-coupling ratio.
    pub kappa: f64,
    /// Input field intensity factor.
    pub input_intensity: f64,
}

impl Default for DcSpec {
    fn default() -> Self {
        DcSpec {
            length_um: 10.0,
            gap_nm: 200.0,
            kappa: 0.5,
            input_intensity: 1.0,
        }
    }
}

/// Effective-index deviation of the coupler under mean footprint offsets,
/// approximated by the single-waveguide sensitivities at `spec`.
pub fn delta_n_dc(
    model: &dyn EffIndexModel,
    spec: &WaveguideSpec,
    rho_w_mean_nm: f64,
    rho_t_mean_nm: f64,
) -> Result<f64> {
    let s = dn_eff(model, spec)?;
    Ok(s.dn_dw * rho_w_mean_nm + s.dn_dt * rho_t_mean_nm)
}

/// Cross-coupling deviation of a directional coupler whose effective index
/// moved by `delta_n`: I·sin²(π·L·Δn/λ₀).
pub fn delta_kappa(dc: &DcSpec, delta_n: f64, wavelength_nm: f64) -> f64 {
    let arg = std::f64::consts::PI * dc.length_um * 1000.0 * delta_n / wavelength_nm;
    dc.input_intensity * arg.sin().powi(2)
}

/// Length of an adiabatic taper between two widths: 1 µm per 100 nm of
/// width difference.
pub fn taper_length_um(w_from_nm: f64, w_to_nm: f64) -> f64 {
    (w_from_nm - w_to_nm).abs() / 100.0
}
