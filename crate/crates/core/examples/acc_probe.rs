//! Scratch probe: Monte-Carlo accuracy of the trained 16-feature network
//! under fabrication variations, per policy / correlation length / mode.

use photonvar::mzi::PhaseNoiseModel;
use photonvar::optimizer::DesignPolicy;
use photonvar::photonics::Geometry;
use photonvar::spnn::{
    features_for_split, load_test, load_train, monte_carlo_accuracy, photonic_nominal_accuracy,
    ArchiveMetadata, Dataset, MonteCarloConfig, PhotonicNetwork, SpnnModel, TrainParams,
    WeightArchive,
};
use photonvar::varmap::VariationParams;
use std::path::Path;

const TRIALS: usize = 40;

fn main() {
    let t0 = std::time::Instant::now();
    let dir = std::path::PathBuf::from("data/mnist");
    let test = load_test(&dir).unwrap();
    let (fte, lte) = features_for_split(&test, 16).unwrap();
    let dte = Dataset::new(fte, lte).unwrap();

    let cache = Path::new("/root/notes/net1_weights.json");
    let model = if cache.exists() {
        WeightArchive::load(cache).unwrap().to_model().unwrap()
    } else {
        let train = load_train(&dir).unwrap();
        let (ftr, ltr) = features_for_split(&train, 16).unwrap();
        let dtr = Dataset::new(ftr, ltr).unwrap();
        let mut m = SpnnModel::network1(7);
        let report = m.train(&dtr, &TrainParams::default()).unwrap();
        println!("trained: train acc {:.4}", report.train_accuracy);
        WeightArchive::from_model(&m, ArchiveMetadata::default()).save(cache).unwrap();
        m
    };
    let software = model.accuracy(&dte).unwrap();
    let net = PhotonicNetwork::from_model(&model).unwrap();
    let nominal = photonic_nominal_accuracy(&net, &dte).unwrap();
    println!("software {software:.4} photonic-nominal {nominal:.4} [{:?}]", t0.elapsed());

    let policies = [
        DesignPolicy::NoOpt,
        DesignPolicy::Region(1),
        DesignPolicy::Region(3),
        DesignPolicy::Region(6),
        DesignPolicy::Region(12),
    ];
    for corr in [100.0f64] {
        for include_thickness in [false, true] {
            let mut per_policy: Vec<Vec<f64>> = Vec::new();
            for policy in policies {
                let cfg = MonteCarloConfig {
                    trials: TRIALS,
                    base_seed: 40_000,
                    base_params: VariationParams {
                        corr_length: corr,
                        ..VariationParams::default()
                    },
                    sigma_scale: 1.0,
                    geometry: Geometry::Strip,
                    policy,
                    include_thickness,
                    include_couplers: false,
                    noise_model: PhaseNoiseModel::Differential,
                };
                let t = std::time::Instant::now();
                let res = monte_carlo_accuracy(&net, &dte, &cfg).unwrap();
                let accs: Vec<f64> = res.outcomes.iter().map(|o| o.accuracy).collect();
                let mean_rvd = res.outcomes.iter().map(|o| o.mean_mesh_rvd).sum::<f64>()
                    / res.outcomes.len() as f64;
                println!(
                    "corr {corr:6} {} {policy:>6}: acc {:.4} ± {:.4} sem {:.4} (drop {:+.2} pts) rvd {:.4} [{:?}]",
                    if include_thickness { "W+T" } else { "W  " },
                    res.mean_accuracy,
                    res.std_accuracy,
                    res.std_accuracy / (TRIALS as f64).sqrt(),
                    (res.mean_accuracy - nominal) * 100.0,
                    mean_rvd,
                    t.elapsed()
                );
                per_policy.push(accs);
            }
            // Paired differences along the expected ordering chain.
            let chain = [(1usize, 2usize), (2, 3), (3, 4), (4, 0)];
            let names = ["R1-R3", "R3-R6", "R6-R12", "R12-NoOpt"];
            for (&(a, b), name) in chain.iter().zip(names) {
                let diffs: Vec<f64> = per_policy[a]
                    .iter()
                    .zip(&per_policy[b])
                    .map(|(&x, &y)| x - y)
                    .collect();
                let n = diffs.len() as f64;
                let mean = diffs.iter().sum::<f64>() / n;
                let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
                let sem = var.sqrt() / n.sqrt();
                let neg = diffs.iter().filter(|&&d| d < 0.0).count();
                println!(
                    "  paired {name:>9}: {:+.3} ± {:.3} pts (sem, {} of {} trials negative)",
                    mean * 100.0,
                    sem * 100.0,
                    neg,
                    TRIALS
                );
            }
        }
    }
}
