//! Scratch probe: realized RVD of a perturbed 16×16 mesh under each design
//! policy, geometry, and correlation length.

use photonvar::linalg::haar_unitary;
use photonvar::mesh::{
    decompose, default_sensitivity, place_mesh, reconstruct_ideal, reconstruct_perturbed,
    sample_device, SamplingOptions,
};
use photonvar::metrics::rvd;
use photonvar::mzi::PhaseNoiseModel;
use photonvar::optimizer::{region_optimize, TolerantDesign};
use photonvar::photonics::Geometry;
use photonvar::varmap::{generate_die_map, VariationParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let unitaries: Vec<_> = (0..10).map(|_| haar_unitary(16, &mut rng)).collect();
    let programs: Vec<_> = unitaries.iter().map(|u| decompose(u).unwrap()).collect();
    let placement = place_mesh(&programs[0]);
    let opts = SamplingOptions::default();

    for corr in [100.0, 1000.0] {
        for geom in [Geometry::Strip, Geometry::Ridge] {
            let sens = default_sensitivity(geom).unwrap();
            for region in [0usize, 1, 3, 6, 12] {
                let mut rvds = Vec::new();
                for seed in [31u64, 32, 33] {
                    let params = VariationParams {
                        corr_length: corr,
                        seed,
                        ..Default::default()
                    };
                    let map = generate_die_map(
                        &params,
                        placement.extent.0 + 20.0,
                        placement.extent.1 + 20.0,
                        (0.0, 0.0),
                    )
                    .unwrap();
                    let designs: Vec<TolerantDesign> = if region == 0 {
                        placement
                            .devices
                            .iter()
                            .map(|_| TolerantDesign::nominal())
                            .collect()
                    } else {
                        region_optimize(&map, &sens, &placement, region, true).unwrap()
                    };
                    let vars: Vec<_> = placement
                        .devices
                        .iter()
                        .zip(&designs)
                        .map(|(dev, d)| {
                            sample_device(&map, &sens, dev.site, d.widths_nm, d.arm_lengths_um, opts)
                                .unwrap()
                        })
                        .collect();
                    for (u, p) in unitaries.iter().zip(&programs) {
                        let ideal = reconstruct_ideal(p);
                        let pert =
                            reconstruct_perturbed(p, &vars, PhaseNoiseModel::Differential).unwrap();
                        assert!(photonvar::linalg::fro_dist(&ideal, u) < 1e-8);
                        rvds.push(rvd(&ideal, &pert).unwrap());
                    }
                }
                rvds.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let med = rvds[rvds.len() / 2];
                let p90 = rvds[(rvds.len() * 9) / 10];
                println!(
                    "corr={corr:6.0} {geom:?} region={region:2}: median RVD={med:.4} p90={p90:.4}"
                );
            }
        }
    }
}
