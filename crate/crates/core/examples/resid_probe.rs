//! Scratch probe: distribution of the R1 design's predicted residual phase
//! per stage, to separate grid-quantization error from missing in-domain
//! cancellation.

use photonvar::linalg::haar_unitary;
use photonvar::mesh::{decompose, default_sensitivity, die_map_for, place_mesh};
use photonvar::optimizer::region_optimize;
use photonvar::photonics::Geometry;
use photonvar::varmap::VariationParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = haar_unitary(16, &mut rng);
    let prog = decompose(&u).unwrap();
    let placement = place_mesh(&prog);
    for include_thickness in [false, true] {
        for corr in [100.0, 1000.0] {
            let params = VariationParams { corr_length: corr, seed: 77, ..Default::default() };
            let map = die_map_for(&placement, &params).unwrap();
            let sens = default_sensitivity(Geometry::Strip).unwrap();
            let designs = region_optimize(&map, &sens, &placement, 1, include_thickness).unwrap();
            let mut resid: Vec<f64> = designs.iter().map(|d| d.predicted_residual_rad).collect();
            resid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = resid.len();
            println!(
                "thick={include_thickness} corr={corr:6}: residual rad min {:.2e} med {:.2e} p90 {:.2e} max {:.2e}",
                resid[0],
                resid[n / 2],
                resid[(n * 9) / 10],
                resid[n - 1]
            );
            // How many stages end at a domain boundary (350 or 1200 nm)?
            let at_edge = designs
                .iter()
                .flat_map(|d| d.widths_nm.iter())
                .filter(|&&w| w <= 350.5 || w >= 1199.5)
                .count();
            println!("  arm widths at domain edge: {at_edge} / {}", 4 * designs.len());
        }
    }
}
