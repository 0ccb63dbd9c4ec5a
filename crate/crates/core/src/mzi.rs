//! 2×2 Mach–Zehnder interferometer transfer matrices, ideal and perturbed.
//!
//! Convention: the device is two 50:50 directional couplers with a tunable
//! phase `φ` on the upper arm before the first coupler and `θ` on the upper
//! arm between the couplers. Arms are numbered 1 (upper) / 2 (lower) for the
//! `φ` section and 3 (upper) / 4 (lower) for the `θ` section.
//!
//! Fabrication variations enter as per-arm propagation-constant deviations
//! `Δβ_k` (rad/µm) over arm lengths `L_k` (µm) plus per-coupler splitting
//! deviations `Δκ`.

use ndarray::array;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::Cmat;

/// Nominal power cross-coupling of each directional coupler.
pub const KAPPA_NOMINAL: f64 = 0.5;
/// Nominal phase-shifter arm length, µm.
pub const ARM_LENGTH_UM: f64 = 135.0;

/// The two programmed phases of one MZI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MziConfig {
    pub theta: f64,
    pub phi: f64,
}

impl MziConfig {
    pub fn new(theta: f64, phi: f64) -> MziConfig {
        MziConfig { theta, phi }
    }

    /// The "bar" state: straight-through with unit magnitude.
    pub fn bar() -> MziConfig {
        MziConfig::new(std::f64::consts::PI, 0.0)
    }
}

/// Per-device fabrication deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmVariations {
    /// Propagation-constant deviation on arms 1–4, rad/µm.
    pub delta_beta: [f64; 4],
    /// Arm lengths, µm.
    pub lengths_um: [f64; 4],
    /// Cross-coupling deviation of the input and output couplers.
    pub delta_kappa: [f64; 2],
}

impl Default for ArmVariations {
    fn default() -> Self {
        ArmVariations {
            delta_beta: [0.0; 4],
            lengths_um: [ARM_LENGTH_UM; 4],
            delta_kappa: [0.0; 2],
        }
    }
}

impl ArmVariations {
    /// Undesired differential phases accumulated ahead of each coupler:
    /// `(Δβ₁L₁ − Δβ₂L₂, Δβ₃L₃ − Δβ₄L₄)`.
    pub fn differential_phases(&self) -> (f64, f64) {
        let d = &self.delta_beta;
        let l = &self.lengths_um;
        (d[0] * l[0] - d[1] * l[1], d[2] * l[2] - d[3] * l[3])
    }

    /// Total undesired phase-noise magnitude (both stages).
    pub fn phase_noise(&self) -> f64 {
        let (a, b) = self.differential_phases();
        a.abs() + b.abs()
    }
}

/// How per-arm deviations enter the transfer matrix.
///
/// `PerArm` keeps every arm's absolute phase, so two devices with identical
/// differential noise but different common-mode phase produce matrices that
/// differ by a global phase. `Differential` drops the per-device common mode
/// and applies only the arm-to-arm differences, which is the quantity the
/// width optimization can actually control; network-level studies use it so
/// that irreducible common-mode offsets do not swamp the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseNoiseModel {
    PerArm,
    Differential,
}

fn coupler(kappa: f64) -> Cmat {
    let k = kappa.clamp(0.0, 1.0);
    let t = Complex64::new((1.0 - k).sqrt(), 0.0);
    let c = Complex64::new(0.0, k.sqrt());
    array![[t, c], [c, t]]
}

fn phase_pair(upper: f64, lower: f64) -> Cmat {
    array![
        [Complex64::from_polar(1.0, upper), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, lower)]
    ]
}

/// Transfer matrix of a variation-free MZI with 50:50 couplers.
pub fn ideal_transfer(cfg: MziConfig) -> Cmat {
    perturbed_transfer(cfg, &ArmVariations::default(), PhaseNoiseModel::PerArm)
}

/// Transfer matrix including fabrication deviations.
pub fn perturbed_transfer(cfg: MziConfig, vars: &ArmVariations, model: PhaseNoiseModel) -> Cmat {
    let d = &vars.delta_beta;
    let l = &vars.lengths_um;
    let (phi_stage, theta_stage) = match model {
        PhaseNoiseModel::PerArm => (
            phase_pair(cfg.phi + d[0] * l[0], d[1] * l[1]),
            phase_pair(cfg.theta + d[2] * l[2], d[3] * l[3]),
        ),
        PhaseNoiseModel::Differential => {
            let (dphi, dtheta) = vars.differential_phases();
            (
                phase_pair(cfg.phi + dphi, 0.0),
                phase_pair(cfg.theta + dtheta, 0.0),
            )
        }
    };
    let b1 = coupler(KAPPA_NOMINAL + vars.delta_kappa[0]);
    let b2 = coupler(KAPPA_NOMINAL + vars.delta_kappa[1]);
    b2.dot(&theta_stage).dot(&b1).dot(&phi_stage)
}
