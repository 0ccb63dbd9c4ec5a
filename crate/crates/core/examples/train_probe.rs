//! Scratch probe: hyperparameter sweep for the digit classifiers.

use photonvar::spnn::{features_for_split, load_test, load_train, Dataset, SpnnModel, TrainParams};

fn main() {
    let dir = std::path::PathBuf::from("data/mnist");
    let train = load_train(&dir).unwrap();
    let test = load_test(&dir).unwrap();

    for dim in [16usize, 64] {
        let (ftr, ltr) = features_for_split(&train, dim).unwrap();
        let (fte, lte) = features_for_split(&test, dim).unwrap();
        let dtr = Dataset::new(ftr, ltr).unwrap();
        let dte = Dataset::new(fte, lte).unwrap();

        for (seed, lr, epochs, decay) in [
            (7u64, 0.1f64, 20usize, 0.9f64),
            (1, 0.1, 20, 0.9),
            (7, 0.05, 20, 0.9),
            (7, 0.1, 30, 0.95),
        ] {
            let mut model = if dim == 16 {
                SpnnModel::network1(seed)
            } else {
                SpnnModel::network2(seed)
            };
            let params = TrainParams {
                epochs,
                learning_rate: lr,
                lr_decay: decay,
                seed,
                ..TrainParams::default()
            };
            match model.train(&dtr, &params) {
                Ok(report) => {
                    let acc = model.accuracy(&dte).unwrap();
                    println!(
                        "dim {dim} seed {seed} lr {lr} epochs {epochs} decay {decay}: train {:.4} test {:.4} (loss {:.4} -> {:.4})",
                        report.train_accuracy,
                        acc,
                        report.epoch_loss.first().unwrap(),
                        report.epoch_loss.last().unwrap()
                    );
                }
                Err(e) => println!("dim {dim} seed {seed} lr {lr} epochs {epochs}: DIVERGED {e}"),
            }
        }
    }
}
