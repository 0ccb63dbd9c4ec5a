//! Physical placement of mesh devices on a die and sampling of fabrication
//! deviations from a variation map.
//!
//! Ports ride on 30 µm-pitch lanes; a device couples two adjacent lanes and
//! occupies a 340 × 30 µm box centered between its two port centers. Inside
//! the box the four arms sit on two tracks 15 µm apart, with the tunable arm
//! (arms 1 and 3) on the lower-index-mode side:
//!
//! ```text
//!   x:   0    10        145 150 160 165       300 305 315   340
//!             [ φ arm 1  ]  [DC1]  [  θ arm 3  ]  [DC2]        y = 7.5
//!             [   arm 2  ]  [   ]  [    arm 4  ]  [   ]        y = 22.5
//! ```

use serde::{Deserialize, Serialize};

use super::layer::LayerDecomposition;
use crate::error::Result;
use crate::mzi::ArmVariations;
use crate::photonics::{self, DcSpec, Geometry, SensitivityTable, NOMINAL_WIDTH_NM};
use crate::varmap::{Rect, VariationMap};

pub const MZI_LENGTH_UM: f64 = 340.0;
pub const PORT_PITCH_UM: f64 = 30.0;
pub const DEVICE_HEIGHT_UM: f64 = 30.0;
/// Vertical clearance between stacked layers, µm.
pub const LAYER_GAP_UM: f64 = 60.0;
/// Arm tracks inside the device box, µm from the box top.
pub const ARM_TRACKS_UM: [f64; 2] = [7.5, 22.5];
/// Stage x-spans inside the device box, µm: φ arms, input coupler, θ arms,
/// output coupler.
pub const PHI_SPAN_UM: (f64, f64) = (10.0, 145.0);
pub const DC1_SPAN_UM: (f64, f64) = (150.0, 160.0);
pub const THETA_SPAN_UM: (f64, f64) = (165.0, 300.0);
pub const DC2_SPAN_UM: (f64, f64) = (305.0, 315.0);

/// Which part of a layer a device belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    /// Input-side mesh (realizes Vᴴ).
    V,
    /// Per-channel amplitude devices.
    Sigma,
    /// Output-side mesh (realizes U).
    U,
}

/// One physically placed device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedDevice {
    pub layer: usize,
    pub segment: Segment,
    /// Index into the segment's entry (or channel) list.
    pub index: usize,
    /// Device-box corner (lowest x/y), µm in die coordinates.
    pub site: (f64, f64),
}

/// All device sites of a multi-layer network, plus the die extent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkPlacement {
    pub devices: Vec<PlacedDevice>,
    pub extent: (f64, f64),
}

/// Device-box corner for a mesh entry at `(col, row)` with the mesh corner at
/// `origin`. The box is centered between the two port lanes it couples.
pub fn device_site(origin: (f64, f64), col: usize, row: usize) -> (f64, f64) {
    (
        origin.0 + col as f64 * MZI_LENGTH_UM,
        origin.1 + row as f64 * PORT_PITCH_UM + PORT_PITCH_UM / 2.0,
    )
}

/// Footprint of an n-mode mesh: n columns of devices, n+1 lanes of height.
pub fn mesh_extent(n: usize) -> (f64, f64) {
    (n as f64 * MZI_LENGTH_UM, (n + 1) as f64 * PORT_PITCH_UM)
}

fn stage_span(arm: usize) -> (f64, f64) {
    if arm < 2 {
        PHI_SPAN_UM
    } else {
        THETA_SPAN_UM
    }
}

/// Footprint rectangles of the four phase arms for given arm widths.
pub fn arm_rects(site: (f64, f64), widths_nm: [f64; 4]) -> [Rect; 4] {
    std::array::from_fn(|k| {
        let (x0, x1) = stage_span(k);
        let track = site.1 + ARM_TRACKS_UM[k % 2];
        let w_um = widths_nm[k] * 1e-3;
        Rect::new(site.0 + x0, track - w_um / 2.0, x1 - x0, w_um)
    })
}

/// Footprint rectangles of the two couplers (two waveguide tracks each) at
/// nominal width.
pub fn coupler_rects(site: (f64, f64)) -> [[Rect; 2]; 2] {
    let w_um = NOMINAL_WIDTH_NM * 1e-3;
    let spans = [DC1_SPAN_UM, DC2_SPAN_UM];
    std::array::from_fn(|d| {
        std::array::from_fn(|t| {
            let (x0, x1) = spans[d];
            let track = site.1 + ARM_TRACKS_UM[t];
            Rect::new(site.0 + x0, track - w_um / 2.0, x1 - x0, w_um)
        })
    })
}

/// Place a standalone n-mode mesh with its corner at the die origin.
pub fn place_mesh(program: &super::MeshProgram) -> NetworkPlacement {
    let devices = program
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| PlacedDevice {
            layer: 0,
            segment: Segment::U,
            index: i,
            site: device_site((0.0, 0.0), e.col, e.row),
        })
        .collect();
    NetworkPlacement {
        devices,
        extent: mesh_extent(program.n),
    }
}

/// Place the layers of a network on one die: within a layer the input mesh,
/// amplitude block, and output mesh run left to right; layers stack
/// vertically with a fixed gap. Amplitude devices take two columns, even
/// channels then odd, so vertically adjacent devices never collide.
pub fn place_network(layers: &[LayerDecomposition]) -> NetworkPlacement {
    let mut devices = Vec::new();
    let mut y0 = 0.0f64;
    let mut max_x = 0.0f64;
    for (li, dec) in layers.iter().enumerate() {
        let v_extent = mesh_extent(dec.v.n);
        let sigma_w = 2.0 * MZI_LENGTH_UM;
        let u_extent = mesh_extent(dec.u.n);

        let v_origin = (0.0, y0);
        for (i, e) in dec.v.entries.iter().enumerate() {
            devices.push(PlacedDevice {
                layer: li,
                segment: Segment::V,
                index: i,
                site: device_site(v_origin, e.col, e.row),
            });
        }
        let s_origin = (v_extent.0, y0);
        for i in 0..dec.sigma_configs.len() {
            devices.push(PlacedDevice {
                layer: li,
                segment: Segment::Sigma,
                index: i,
                site: device_site(s_origin, i % 2, i),
            });
        }
        let u_origin = (v_extent.0 + sigma_w, y0);
        for (i, e) in dec.u.entries.iter().enumerate() {
            devices.push(PlacedDevice {
                layer: li,
                segment: Segment::U,
                index: i,
                site: device_site(u_origin, e.col, e.row),
            });
        }

        max_x = max_x.max(v_extent.0 + sigma_w + u_extent.0);
        let height = v_extent.1.max(u_extent.1);
        y0 += height + LAYER_GAP_UM;
    }
    NetworkPlacement {
        devices,
        extent: (max_x, (y0 - LAYER_GAP_UM).max(0.0)),
    }
}

/// Generate a die-scale variation map covering the placement's bounding box
/// plus a one-cell margin, with the die corner at the placement origin.
pub fn die_map_for(
    placement: &NetworkPlacement,
    params: &crate::varmap::VariationParams,
) -> Result<VariationMap> {
    crate::varmap::generate_die_map(
        params,
        placement.extent.0 + params.mesh_size,
        placement.extent.1 + params.mesh_size,
        (0.0, 0.0),
    )
}

/// What deviations to apply when sampling devices from a map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    /// Apply thickness deviations (width deviations are always applied).
    pub include_thickness: bool,
    /// Model coupler splitting-ratio deviations (otherwise couplers ideal).
    pub include_couplers: bool,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            include_thickness: true,
            include_couplers: false,
        }
    }
}

/// Sample one device's fabrication deviations from the map: per-arm mean
/// width/thickness offsets over each arm footprint, converted through the
/// sensitivity table at that arm's design width. `lengths_um` are the
/// phase-accumulating arm lengths (taper-extended for widened designs); the
/// taper sections sit at the footprint ends and are taken to see the arm's
/// mean deviation.
pub fn sample_device(
    map: &VariationMap,
    sens: &SensitivityTable,
    site: (f64, f64),
    widths_nm: [f64; 4],
    lengths_um: [f64; 4],
    opts: SamplingOptions,
) -> Result<ArmVariations> {
    let rects = arm_rects(site, widths_nm);
    let mut delta_beta = [0.0f64; 4];
    for k in 0..4 {
        let (rho_w, rho_t) = map.sample_region(rects[k])?;
        let rho_t = if opts.include_thickness { rho_t } else { 0.0 };
        delta_beta[k] = sens.delta_beta(widths_nm[k], rho_w, rho_t);
    }
    let mut delta_kappa = [0.0f64; 2];
    if opts.include_couplers {
        let dc = DcSpec::default();
        let s = sens.at(NOMINAL_WIDTH_NM);
        for (d, pair) in coupler_rects(site).iter().enumerate() {
            let (w0, t0) = map.sample_region(pair[0])?;
            let (w1, t1) = map.sample_region(pair[1])?;
            let rho_w = 0.5 * (w0 + w1);
            let rho_t = if opts.include_thickness {
                0.5 * (t0 + t1)
            } else {
                0.0
            };
            let dn = s.dn_dw * rho_w + s.dn_dt * rho_t;
            delta_kappa[d] = photonics::delta_kappa(&dc, dn, sens.wavelength_nm);
        }
    }
    Ok(ArmVariations {
        delta_beta,
        lengths_um,
        delta_kappa,
    })
}

/// Per-arm mean width/thickness offsets at nominal arm geometry — the
/// "knowledge" a designer has about a device before choosing widths.
pub fn sample_knowledge(
    map: &VariationMap,
    site: (f64, f64),
    include_thickness: bool,
) -> Result<[(f64, f64); 4]> {
    let rects = arm_rects(site, [NOMINAL_WIDTH_NM; 4]);
    let mut out = [(0.0, 0.0); 4];
    for k in 0..4 {
        let (w, t) = map.sample_region(rects[k])?;
        out[k] = (w, if include_thickness { t } else { 0.0 });
    }
    Ok(out)
}

/// Convenience: a strip or ridge sensitivity table from the analytic model.
pub fn default_sensitivity(geometry: Geometry) -> Result<SensitivityTable> {
    SensitivityTable::build(&crate::photonics::eim::EimModel::default(), geometry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::complexify;
    use crate::mesh::decompose_layer;
    use crate::mzi::ARM_LENGTH_UM;
    use crate::varmap::{generate_die_map, VariationParams};
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn device_sites_land_on_the_grid() {
        let s = device_site((100.0, 200.0), 3, 4);
        assert_eq!(s, (100.0 + 3.0 * 340.0, 200.0 + 4.0 * 30.0 + 15.0));
    }

    #[test]
    fn arm_rects_have_stage_lengths_and_design_widths() {
        let r = arm_rects((0.0, 0.0), [470.0, 470.0, 853.0, 1200.0]);
        assert_eq!(r[0].width, 135.0);
        assert_eq!(r[2].width, 135.0);
        assert!((r[0].height - 0.470).abs() < 1e-12);
        assert!((r[3].height - 1.2).abs() < 1e-12);
        // Arms 1 and 2 share an x-span but sit on different tracks.
        assert_eq!(r[0].x, r[1].x);
        assert!((r[1].y - r[0].y - 15.0).abs() < 1e-9);
        // θ arms sit after the input coupler.
        assert!(r[2].x > r[0].x + r[0].width);
    }

    #[test]
    fn coupler_rects_sit_between_the_stages() {
        let c = coupler_rects((0.0, 0.0));
        assert_eq!(c[0][0].x, 150.0);
        assert_eq!(c[0][0].width, 10.0);
        assert_eq!(c[1][1].x, 305.0);
        assert!((c[0][1].y - c[0][0].y - 15.0).abs() < 1e-9);
    }

    fn toy_layers(rng: &mut ChaCha8Rng) -> Vec<LayerDecomposition> {
        [(4usize, 4usize), (3, 4)]
            .iter()
            .map(|&(r, c)| {
                let w = complexify(&Array2::from_shape_fn((r, c), |_| rng.gen_range(-1.0..1.0)));
                decompose_layer(&w).unwrap()
            })
            .collect()
    }

    #[test]
    fn network_placement_is_collision_free_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layers = toy_layers(&mut rng);
        let placed = place_network(&layers);
        let n_dev: usize = layers
            .iter()
            .map(|l| l.v.entries.len() + l.sigma_configs.len() + l.u.entries.len())
            .sum();
        assert_eq!(placed.devices.len(), n_dev);
        for (i, a) in placed.devices.iter().enumerate() {
            assert!(a.site.0 >= 0.0 && a.site.1 >= 0.0);
            assert!(a.site.0 + MZI_LENGTH_UM <= placed.extent.0 + 1e-9);
            assert!(a.site.1 + DEVICE_HEIGHT_UM <= placed.extent.1 + 1e-9);
            for b in placed.devices.iter().skip(i + 1) {
                let dx = (a.site.0 - b.site.0).abs();
                let dy = (a.site.1 - b.site.1).abs();
                assert!(
                    dx >= MZI_LENGTH_UM - 1e-9 || dy >= DEVICE_HEIGHT_UM - 1e-9,
                    "device boxes overlap: {a:?} {b:?}"
                );
            }
        }
        // Segments run left to right within a layer.
        let max_v = placed
            .devices
            .iter()
            .filter(|d| d.layer == 0 && d.segment == Segment::V)
            .map(|d| d.site.0 as i64)
            .max()
            .unwrap();
        let min_u = placed
            .devices
            .iter()
            .filter(|d| d.layer == 0 && d.segment == Segment::U)
            .map(|d| d.site.0 as i64)
            .min()
            .unwrap();
        assert!(max_v < min_u);
    }

    #[test]
    fn sampled_deviations_scale_with_the_field() {
        let params = VariationParams {
            sigma_w: 5.0,
            sigma_t: 2.0,
            corr_length: 100.0,
            seed: 42,
            ..Default::default()
        };
        let map = generate_die_map(&params, 2000.0, 400.0, (0.0, 0.0)).unwrap();
        let sens = default_sensitivity(Geometry::Strip).unwrap();
        let site = (400.0, 120.0);
        let v = sample_device(&map, &sens, site, [470.0; 4], [ARM_LENGTH_UM; 4], SamplingOptions::default())
            .unwrap();
        // Against a direct by-hand conversion of the sampled footprint means.
        let know = sample_knowledge(&map, site, true).unwrap();
        for k in 0..4 {
            let expect = sens.delta_beta(470.0, know[k].0, know[k].1);
            assert!((v.delta_beta[k] - expect).abs() < 1e-15);
        }
        assert_eq!(v.lengths_um, [ARM_LENGTH_UM; 4]);
        assert_eq!(v.delta_kappa, [0.0; 2]);
        // Width-only sampling zeroes the thickness contribution.
        let wonly = sample_device(
            &map,
            &sens,
            site,
            [470.0; 4],
            [ARM_LENGTH_UM; 4],
            SamplingOptions {
                include_thickness: false,
                include_couplers: false,
            },
        )
        .unwrap();
        let expect = sens.delta_beta(470.0, know[0].0, 0.0);
        assert!((wonly.delta_beta[0] - expect).abs() < 1e-15);
        // Coupler modelling switches on Δκ.
        let with_dc = sample_device(
            &map,
            &sens,
            site,
            [470.0; 4],
            [ARM_LENGTH_UM; 4],
            SamplingOptions {
                include_thickness: true,
                include_couplers: true,
            },
        )
        .unwrap();
        assert!(with_dc.delta_kappa[0].abs() > 0.0);
        assert!(with_dc.delta_kappa[0] >= 0.0 && with_dc.delta_kappa[0] < 0.5);
    }

    #[test]
    fn nearby_arms_see_correlated_long_range_fields() {
        let params = VariationParams {
            corr_length: 1000.0,
            seed: 7,
            ..Default::default()
        };
        let map = generate_die_map(&params, 3000.0, 300.0, (0.0, 0.0)).unwrap();
        let know = sample_knowledge(&map, (800.0, 150.0), true).unwrap();
        // Opposite arms 15 µm apart under a 1 mm correlation length differ by
        // far less than the field's spread.
        let d = (know[0].0 - know[1].0).abs();
        assert!(d < 1.0, "arm-to-arm width offset {d} nm too large");
    }
}
