//! Variation-tolerant waveguide-width selection.
//!
//! Two design flows:
//!
//! * **Region-based**: devices are grouped into spatial regions; the designer
//!   knows each region's mean per-arm deviations and picks, per region and
//!   per stage, the pair of arm widths (exhaustive 1 nm search) minimizing
//!   the predicted RMS residual differential phase of a member device. The
//!   prediction combines the residual at the region-mean offsets — which
//!   width asymmetry between opposite arms can cancel — with the variance
//!   contributed by unknown member-level deviations around that mean, which
//!   penalizes sensitivity-mismatched arm pairs and rewards wide,
//!   low-sensitivity arms when the region knowledge is coarse. With
//!   single-device regions the variance term vanishes and the search reduces
//!   to exact cancellation of the known offsets.
//! * **Worst-case**: no map knowledge; all arms share the largest width
//!   whose taper area overhead fits a budget, exploiting the falloff of
//!   width sensitivity with width.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::placement::{arm_rects, sample_knowledge, NetworkPlacement};
use crate::mzi::ARM_LENGTH_UM;
use crate::photonics::{taper_length_um, SensitivityTable, NOMINAL_WIDTH_NM};
use crate::varmap::{Rect, VariationMap};

pub const WIDTH_MIN_NM: f64 = 350.0;
pub const WIDTH_MAX_NM: f64 = 1200.0;

/// Widths ties within this residual (rad) are broken by taper length.
const TIE_EPS_RAD: f64 = 1e-12;

/// Chosen arm geometry for one device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerantDesign {
    pub widths_nm: [f64; 4],
    /// Taper length at each arm end (one value per arm; each arm carries two
    /// such tapers).
    pub taper_lengths_um: [f64; 4],
    /// Phase-arm extent including one taper length.
    pub arm_lengths_um: [f64; 4],
    /// Region this design was derived from (0 for global designs).
    pub region: usize,
    /// Residual differential phase (rad) predicted from the design
    /// knowledge, both stages summed.
    pub predicted_residual_rad: f64,
}

fn taper4(widths_nm: [f64; 4]) -> [f64; 4] {
    std::array::from_fn(|k| taper_length_um(NOMINAL_WIDTH_NM, widths_nm[k]))
}

impl TolerantDesign {
    pub fn from_widths(widths_nm: [f64; 4], region: usize, residual: f64) -> TolerantDesign {
        let tapers = taper4(widths_nm);
        TolerantDesign {
            widths_nm,
            taper_lengths_um: tapers,
            arm_lengths_um: std::array::from_fn(|k| ARM_LENGTH_UM + tapers[k]),
            region,
            predicted_residual_rad: residual,
        }
    }

    pub fn nominal() -> TolerantDesign {
        TolerantDesign::from_widths([NOMINAL_WIDTH_NM; 4], 0, 0.0)
    }

    pub fn uniform(width_nm: f64) -> TolerantDesign {
        TolerantDesign::from_widths([width_nm; 4], 0, 0.0)
    }

    /// Taper-only area overhead relative to the nominal four-arm footprint:
    /// every arm carries two tapers of mean width (w + w_nom)/2.
    pub fn area_overhead(&self) -> f64 {
        let nominal = 4.0 * ARM_LENGTH_UM * NOMINAL_WIDTH_NM * 1e-3;
        let tapers: f64 = self
            .widths_nm
            .iter()
            .map(|&w| 2.0 * taper_length_um(NOMINAL_WIDTH_NM, w) * (w + NOMINAL_WIDTH_NM) * 0.5e-3)
            .sum();
        tapers / nominal
    }
}

/// Spatial grouping of placed devices into regions of at most `region_size`
/// members. Devices are enumerated column by column: the lane pitch (30 µm)
/// is an order of magnitude finer than the device length (340 µm), so
/// vertical neighbours are by far the closest, and chunking the column-major
/// order keeps each region's footprint as compact as possible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionAssignment {
    /// Region id per device, indexed like the placement's device list.
    pub region_of_device: Vec<usize>,
    pub n_regions: usize,
}

pub fn assign_regions(placement: &NetworkPlacement, region_size: usize) -> Result<RegionAssignment> {
    if region_size == 0 {
        return Err(Error::InvalidParameter("region size must be positive".into()));
    }
    let n = placement.devices.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let sa = placement.devices[a].site;
        let sb = placement.devices[b].site;
        (sa.0, sa.1).partial_cmp(&(sb.0, sb.1)).unwrap()
    });
    let mut region_of_device = vec![0usize; n];
    for (rank, &dev) in order.iter().enumerate() {
        region_of_device[dev] = rank / region_size;
    }
    Ok(RegionAssignment {
        region_of_device,
        n_regions: n.div_ceil(region_size),
    })
}

/// Knowledge available to the designer for one phase stage of a region: the
/// region-mean per-arm offsets plus the second moments of how individual
/// member devices deviate from those means.
#[derive(Debug, Clone, Copy, Default)]
struct StageKnowledge {
    /// Region-mean (ρ_w, ρ_t) of the upper and lower arm, nm.
    mean_a: (f64, f64),
    mean_b: (f64, f64),
    /// Mean per-member covariances of the deviations from the region mean,
    /// `[aa, ab, bb]`, for the width field, nm².
    cov_w: [f64; 3],
    /// Same for the thickness field, nm².
    cov_t: [f64; 3],
}

/// Exhaustive width-pair search for one stage. The objective is the
/// root-mean-square differential phase a member device is predicted to
/// retain:
///
/// * the mean term `δ₁(w₁) − δ₂(w₂)` — the residual at the region-mean
///   offsets, which width asymmetry can cancel, and
/// * a variance term — unknown member-level deviations from the region mean
///   feed through each arm's absolute sensitivity, so the search also favors
///   matched, low-sensitivity (wide where that helps) arm pairs.
///
/// Phase accumulates over the taper-extended arm length. Ties (within
/// [`TIE_EPS_RAD`]) fall back to the smallest total taper, then the
/// narrowest widths.
fn solve_stage(sens: &SensitivityTable, know: &StageKnowledge) -> (f64, f64, f64) {
    let count = sens.width_count();
    let w0 = sens.min_width_nm();
    let k = 2000.0 * std::f64::consts::PI / sens.wavelength_nm;

    // Per-width phase sensitivities (rad per nm of offset) over the
    // taper-extended arm and the resulting mean-offset phases.
    let mut a_w = vec![0.0f64; count];
    let mut a_t = vec![0.0f64; count];
    let mut m_a = vec![0.0f64; count];
    let mut m_b = vec![0.0f64; count];
    for i in 0..count {
        let w = w0 + i as f64;
        let s = sens.at(w);
        let len = ARM_LENGTH_UM + taper_length_um(NOMINAL_WIDTH_NM, w);
        a_w[i] = k * s.dn_dw * len;
        a_t[i] = k * s.dn_dt * len;
        m_a[i] = a_w[i] * know.mean_a.0 + a_t[i] * know.mean_a.1;
        m_b[i] = a_w[i] * know.mean_b.0 + a_t[i] * know.mean_b.1;
    }
    let taper_of = |i: usize| (w0 + i as f64 - NOMINAL_WIDTH_NM).abs();
    let [cw_aa, cw_ab, cw_bb] = know.cov_w;
    let [ct_aa, ct_ab, ct_bb] = know.cov_t;

    let mut best = (f64::INFINITY, f64::INFINITY, 0usize, 0usize);
    for i in 0..count {
        let var_i = a_w[i] * a_w[i] * cw_aa + a_t[i] * a_t[i] * ct_aa;
        for j in 0..count {
            let mean = m_a[i] - m_b[j];
            let var = var_i - 2.0 * (a_w[i] * a_w[j] * cw_ab + a_t[i] * a_t[j] * ct_ab)
                + a_w[j] * a_w[j] * cw_bb
                + a_t[j] * a_t[j] * ct_bb;
            let obj = (mean * mean + var.max(0.0)).sqrt();
            if obj < best.0 - TIE_EPS_RAD {
                best = (obj, taper_of(i) + taper_of(j), i, j);
            } else if obj < best.0 + TIE_EPS_RAD {
                let taper = taper_of(i) + taper_of(j);
                if (taper, i, j) < (best.1, best.2, best.3) {
                    best = (best.0.min(obj), taper, i, j);
                }
            }
        }
    }
    (w0 + best.2 as f64, w0 + best.3 as f64, best.0)
}

/// Mean per-member covariance of the deviations from the region mean,
/// between slot-`a` and slot-`b` rect means: averages over members `k` of
/// `Cov(v_a[k] − mean(v_a), v_b[k] − mean(v_b))`, in units of the field
/// variance. `factors[i][j]` holds the plain rect-mean covariance factor
/// between member i's slot-a rect and member j's slot-b rect.
fn mean_member_cov(factors: &[Vec<f64>]) -> f64 {
    let m = factors.len();
    if m <= 1 {
        return 0.0;
    }
    let mf = m as f64;
    let grand: f64 = factors.iter().flatten().sum::<f64>() / (mf * mf);
    let mut acc = 0.0;
    for k in 0..m {
        let row: f64 = factors[k].iter().sum::<f64>() / mf;
        let col: f64 = factors.iter().map(|r| r[k]).sum::<f64>() / mf;
        acc += factors[k][k] - row - col + grand;
    }
    acc / mf
}

/// Design every device of a placed network from region-mean map knowledge.
/// Returns designs indexed like the placement's device list.
pub fn region_optimize(
    map: &VariationMap,
    sens: &SensitivityTable,
    placement: &NetworkPlacement,
    region_size: usize,
    include_thickness: bool,
) -> Result<Vec<TolerantDesign>> {
    let assignment = assign_regions(placement, region_size)?;
    let n = placement.devices.len();

    // Per-device nominal-geometry knowledge, then region means per arm.
    let knowledge: Vec<[(f64, f64); 4]> = placement
        .devices
        .iter()
        .map(|d| sample_knowledge(map, d.site, include_thickness))
        .collect::<Result<_>>()?;
    let rects: Vec<[Rect; 4]> = placement
        .devices
        .iter()
        .map(|d| arm_rects(d.site, [NOMINAL_WIDTH_NM; 4]))
        .collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); assignment.n_regions];
    for (dev, &r) in assignment.region_of_device.iter().enumerate() {
        members[r].push(dev);
    }

    let var_w = map.params.sigma_w * map.params.sigma_w;
    let var_t = if include_thickness {
        map.params.sigma_t * map.params.sigma_t
    } else {
        0.0
    };
    let stage_knowledge = |devs: &[usize], arm_a: usize, arm_b: usize| -> Result<StageKnowledge> {
        let m = devs.len() as f64;
        let mut mean_a = (0.0, 0.0);
        let mut mean_b = (0.0, 0.0);
        for &d in devs {
            mean_a.0 += knowledge[d][arm_a].0 / m;
            mean_a.1 += knowledge[d][arm_a].1 / m;
            mean_b.0 += knowledge[d][arm_b].0 / m;
            mean_b.1 += knowledge[d][arm_b].1 / m;
        }
        let pair_factors = |slot_i: usize, slot_j: usize| -> Result<Vec<Vec<f64>>> {
            devs.iter()
                .map(|&di| {
                    devs.iter()
                        .map(|&dj| map.rect_mean_cov_factor(rects[di][slot_i], rects[dj][slot_j]))
                        .collect()
                })
                .collect()
        };
        let (aa, ab, bb) = (
            mean_member_cov(&pair_factors(arm_a, arm_a)?),
            mean_member_cov(&pair_factors(arm_a, arm_b)?),
            mean_member_cov(&pair_factors(arm_b, arm_b)?),
        );
        Ok(StageKnowledge {
            mean_a,
            mean_b,
            cov_w: [aa * var_w, ab * var_w, bb * var_w],
            cov_t: [aa * var_t, ab * var_t, bb * var_t],
        })
    };
    let region_knowledge: Vec<(StageKnowledge, StageKnowledge)> = members
        .iter()
        .map(|devs| Ok((stage_knowledge(devs, 0, 1)?, stage_knowledge(devs, 2, 3)?)))
        .collect::<Result<_>>()?;

    let region_designs: Vec<TolerantDesign> = region_knowledge
        .par_iter()
        .enumerate()
        .map(|(r, (phi, theta))| {
            let (w1, w2, res_a) = solve_stage(sens, phi);
            let (w3, w4, res_b) = solve_stage(sens, theta);
            TolerantDesign::from_widths([w1, w2, w3, w4], r, res_a + res_b)
        })
        .collect();

    Ok((0..n)
        .map(|dev| region_designs[assignment.region_of_device[dev]])
        .collect())
}

/// How devices of a placed network get their widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy", content = "value")]
pub enum DesignPolicy {
    /// Every arm at nominal width and length.
    NoOpt,
    /// Region-based designs with the given region size (R1, R3, ...).
    Region(usize),
    /// One widened width everywhere, chosen for the given area budget.
    WorstCase(f64),
}

impl DesignPolicy {
    /// Designs indexed like the placement's devices; `None` for [`DesignPolicy::NoOpt`]
    /// (meaning: sample every device at nominal geometry).
    pub fn designs_for(
        &self,
        map: &VariationMap,
        sens: &SensitivityTable,
        placement: &NetworkPlacement,
        include_thickness: bool,
    ) -> Result<Option<Vec<TolerantDesign>>> {
        match *self {
            DesignPolicy::NoOpt => Ok(None),
            DesignPolicy::Region(size) => {
                region_optimize(map, sens, placement, size, include_thickness).map(Some)
            }
            DesignPolicy::WorstCase(budget) => {
                let d = worst_case_optimize(budget)?;
                Ok(Some(vec![
                    TolerantDesign::uniform(d.width_nm);
                    placement.devices.len()
                ]))
            }
        }
    }
}

impl std::fmt::Display for DesignPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            DesignPolicy::NoOpt => write!(f, "no-opt"),
            DesignPolicy::Region(size) => write!(f, "R{size}"),
            DesignPolicy::WorstCase(budget) => write!(f, "WC{}%", budget * 100.0),
        }
    }
}

impl std::str::FromStr for DesignPolicy {
    type Err = Error;

    /// Accepts the [`std::fmt::Display`] forms: `no-opt`, `R<n>` (any case),
    /// and `WC<pct>%` (percent sign and `wc:` separator optional).
    fn from_str(s: &str) -> Result<DesignPolicy> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if lower == "no-opt" || lower == "noopt" || lower == "none" {
            return Ok(DesignPolicy::NoOpt);
        }
        if let Some(num) = lower.strip_prefix('r') {
            if let Ok(size) = num.parse::<usize>() {
                if size == 0 {
                    return Err(Error::InvalidParameter("region size must be ≥ 1".into()));
                }
                return Ok(DesignPolicy::Region(size));
            }
        }
        if let Some(rest) = lower.strip_prefix("wc") {
            let rest = rest.strip_prefix(':').unwrap_or(rest);
            let rest = rest.strip_suffix('%').unwrap_or(rest);
            if let Ok(pct) = rest.trim().parse::<f64>() {
                if pct.is_finite() && pct >= 0.0 {
                    return Ok(DesignPolicy::WorstCase(pct / 100.0));
                }
            }
        }
        Err(Error::InvalidParameter(format!(
            "unknown design policy {t:?} (expected no-opt, R<n>, or WC<pct>%)"
        )))
    }
}

/// Worst-case design: one width everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseDesign {
    pub width_nm: f64,
    pub taper_length_um: f64,
    pub arm_length_um: f64,
    pub area_overhead: f64,
}

pub fn worst_case_design_for_width(width_nm: f64) -> Result<WorstCaseDesign> {
    if !(WIDTH_MIN_NM..=WIDTH_MAX_NM).contains(&width_nm) {
        return Err(Error::InvalidParameter(format!(
            "width {width_nm} nm outside [{WIDTH_MIN_NM}, {WIDTH_MAX_NM}]"
        )));
    }
    let taper = taper_length_um(NOMINAL_WIDTH_NM, width_nm);
    Ok(WorstCaseDesign {
        width_nm,
        taper_length_um: taper,
        arm_length_um: ARM_LENGTH_UM + taper,
        area_overhead: TolerantDesign::uniform(width_nm).area_overhead(),
    })
}

/// Largest equal width (1 nm grid, never below nominal) whose taper area
/// overhead stays within `area_budget` (a fraction, e.g. 0.08 for 8%).
pub fn worst_case_optimize(area_budget: f64) -> Result<WorstCaseDesign> {
    if !(0.0..).contains(&area_budget) || !area_budget.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "area budget must be a non-negative fraction, got {area_budget}"
        )));
    }
    let mut w = WIDTH_MAX_NM;
    while w > NOMINAL_WIDTH_NM {
        if worst_case_design_for_width(w)?.area_overhead <= area_budget + 1e-12 {
            break;
        }
        w -= 1.0;
    }
    worst_case_design_for_width(w.max(NOMINAL_WIDTH_NM))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::complexify;
    use crate::mesh::placement::{default_sensitivity, place_network};
    use crate::mesh::decompose_layer;
    use crate::photonics::Geometry;
    use crate::varmap::{generate_die_map, VariationParams};
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny_placement(rng: &mut ChaCha8Rng) -> NetworkPlacement {
        let w = complexify(&Array2::from_shape_fn((4, 4), |_| rng.gen_range(-1.0..1.0)));
        place_network(&[decompose_layer(&w).unwrap()])
    }

    fn flat_map(width_offset: f64, thickness_offset: f64) -> VariationMap {
        let params = VariationParams {
            sigma_w: 0.0,
            sigma_t: 0.0,
            ..Default::default()
        };
        let mut map = generate_die_map(&params, 8000.0, 600.0, (0.0, 0.0)).unwrap();
        map.width_dev.fill(width_offset);
        map.thick_dev.fill(thickness_offset);
        map
    }

    #[test]
    fn zero_map_keeps_nominal_widths() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let placement = tiny_placement(&mut rng);
        let sens = default_sensitivity(Geometry::Strip).unwrap();
        let map = flat_map(0.0, 0.0);
        let designs = region_optimize(&map, &sens, &placement, 1, true).unwrap();
        for d in &designs {
            assert_eq!(d.widths_nm, [NOMINAL_WIDTH_NM; 4]);
            assert_eq!(d.taper_lengths_um, [0.0; 4]);
            assert!(d.predicted_residual_rad.abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_map_keeps_nominal_widths() {
        // A spatially uniform offset hits both arms of every stage equally;
        // any equal-width pair cancels it, and the taper tie-break keeps the
        // nominal width.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let placement = tiny_placement(&mut rng);
        let sens = default_sensitivity(Geometry::Strip).unwrap();
        let map = flat_map(3.0, -1.5);
        let designs = region_optimize(&map, &sens, &placement, 1, true).unwrap();
        for d in &designs {
            assert_eq!(d.widths_nm, [NOMINAL_WIDTH_NM; 4]);
            assert!(d.predicted_residual_rad.abs() < 1e-12);
        }
    }

    #[test]
    fn single_device_designs_cancel_known_offsets() {
        let params = VariationParams {
            corr_length: 100.0,
            seed: 11,
            ..Default::default()
        };
        let map = generate_die_map(&params, 4000.0, 400.0, (0.0, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let placement = tiny_placement(&mut rng);
        let sens = default_sensitivity(Geometry::Strip).unwrap();
        let designs = region_optimize(&map, &sens, &placement, 1, true).unwrap();
        let mut total_nominal = 0.0;
        let mut total_predicted = 0.0;
        for (dev, d) in placement.devices.iter().zip(&designs) {
            // The nominal-width pair is always in the search set, so the
            // optimized residual can never exceed the all-nominal residual
            // (summed over both phase stages of the device).
            let know = sample_knowledge(&map, dev.site, true).unwrap();
            let stage = |a: usize, b: usize| {
                (sens.delta_beta(470.0, know[a].0, know[a].1)
                    - sens.delta_beta(470.0, know[b].0, know[b].1))
                .abs()
                    * ARM_LENGTH_UM
            };
            let nominal_res = stage(0, 1) + stage(2, 3);
            assert!(
                d.predicted_residual_rad <= nominal_res + 1e-9,
                "worse than nominal: {} vs {}",
                d.predicted_residual_rad,
                nominal_res
            );
            total_nominal += nominal_res;
            total_predicted += d.predicted_residual_rad;
        }
        // Across the whole placement the per-arm width search should claw
        // back most of the differential phase error. A few stages can be
        // left with an irreducible remainder when neither arm sees a width
        // offset large enough to bridge the thickness gap.
        assert!(
            total_predicted < 0.25 * total_nominal,
            "weak aggregate improvement: {} vs {}",
            total_predicted,
            total_nominal
        );
    }

    #[test]
    fn coarser_regions_share_designs() {
        let params = VariationParams {
            corr_length: 100.0,
            seed: 5,
            ..Default::default()
        };
        let map = generate_die_map(&params, 4000.0, 400.0, (0.0, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let placement = tiny_placement(&mut rng);
        let sens = default_sensitivity(Geometry::Strip).unwrap();
        let designs = region_optimize(&map, &sens, &placement, 6, true).unwrap();
        let assignment = assign_regions(&placement, 6).unwrap();
        for (dev, d) in designs.iter().enumerate() {
            assert_eq!(d.region, assignment.region_of_device[dev]);
            // All devices in a region share one design.
            for (other, od) in designs.iter().enumerate() {
                if assignment.region_of_device[other] == d.region {
                    assert_eq!(od.widths_nm, d.widths_nm);
                }
            }
        }
        let total_regions = assignment.n_regions;
        assert_eq!(
            total_regions,
            placement.devices.len().div_ceil(6)
        );
    }

    #[test]
    fn regions_group_spatial_neighbours() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let placement = tiny_placement(&mut rng);
        let a = assign_regions(&placement, 3).unwrap();
        // Devices sorted by (x, y) get contiguous region ids: the lane pitch is
        // much smaller than the device length, so column-major order keeps each
        // region's members spatially close.
        let mut order: Vec<usize> = (0..placement.devices.len()).collect();
        order.sort_by(|&i, &j| {
            let si = placement.devices[i].site;
            let sj = placement.devices[j].site;
            (si.0, si.1).partial_cmp(&(sj.0, sj.1)).unwrap()
        });
        for (rank, &dev) in order.iter().enumerate() {
            assert_eq!(a.region_of_device[dev], rank / 3);
        }
        assert!(assign_regions(&placement, 0).is_err());
    }

    #[test]
    fn worst_case_budget_table() {
        for (budget, width) in [
            (0.01, 533.0),
            (0.02, 589.0),
            (0.04, 688.0),
            (0.08, 853.0),
            (0.16, 1111.0),
            (0.32, 1200.0),
        ] {
            let d = worst_case_optimize(budget).unwrap();
            assert_eq!(d.width_nm, width, "budget {budget}");
        }
        assert_eq!(worst_case_optimize(0.0).unwrap().width_nm, 470.0);
    }

    #[test]
    fn worst_case_arm_lengths_follow_the_taper_rule() {
        for (w, len) in [
            (533.0, 135.63),
            (589.0, 136.19),
            (688.0, 137.18),
            (853.0, 138.83),
            (1111.0, 141.41),
            (1200.0, 142.3),
        ] {
            let d = worst_case_design_for_width(w).unwrap();
            assert!(
                (d.arm_length_um - len).abs() < 1e-9,
                "w={w}: {} vs {len}",
                d.arm_length_um
            );
        }
        assert!(worst_case_design_for_width(300.0).is_err());
    }

    #[test]
    fn overhead_accounting_by_hand() {
        // w = 853: per-arm taper 3.83 µm, mean width 0.6615 µm, eight tapers
        // against 4·135·0.47 µm².
        let d = worst_case_design_for_width(853.0).unwrap();
        let by_hand = 8.0 * 3.83 * 0.6615 / (4.0 * 135.0 * 0.47);
        assert!((d.area_overhead - by_hand).abs() < 1e-12);
        assert_eq!(worst_case_design_for_width(470.0).unwrap().area_overhead, 0.0);
    }

    #[test]
    fn budgets_below_any_taper_keep_nominal() {
        let d = worst_case_optimize(1e-6).unwrap();
        assert_eq!(d.width_nm, 470.0);
        assert!(worst_case_optimize(-0.1).is_err());
        assert!(worst_case_optimize(f64::NAN).is_err());
    }
}
