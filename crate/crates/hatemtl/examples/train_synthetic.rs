//! Joint multi-task training on three synthetic keyword datasets.
//!
//! Run with: cargo run --release --example train_synthetic

use hatemtl::data::{oversample, stratified_split, SplitRatios};
use hatemtl::synth::synth_family;
use hatemtl::train::{train_mtl, DatasetSplits, TrainConfig};

fn main() {
    let (sources, _target) = synth_family(240, 240, 0.05, 11);
    let seed = 11;
    let splits: Vec<DatasetSplits> = sources
        .iter()
        .map(|ds| {
            let mut bundle = stratified_split(ds, SplitRatios::default(), seed).unwrap();
            bundle.train = oversample(&bundle.train, seed);
            DatasetSplits {
                name: ds.name.clone(),
                classes: ds.classes.clone(),
                bundle,
            }
        })
        .collect();

    let config = TrainConfig {
        epochs: 10,
        batch_size: 16,
        seed,
        ..TrainConfig::default()
    };
    let artifact = train_mtl(&splits, &config).unwrap();
    println!("epoch  total_loss  mean_val_macro_f1");
    for rec in &artifact.history {
        println!(
            "{:>5}  {:>10.4}  {:>17.4}",
            rec.epoch, rec.total_loss, rec.mean_val_macro_f1
        );
    }
    println!(
        "selected epoch {} with mean validation macro-F1 {:.4}",
        artifact.best_epoch, artifact.history[artifact.best_epoch].mean_val_macro_f1
    );
}
