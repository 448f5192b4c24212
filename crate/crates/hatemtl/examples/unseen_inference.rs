//! Classify a dataset never seen in training, comparing the frozen-trunk
//! binary head (NCH) against the majority vote of the per-dataset heads.
//!
//! Run with: cargo run --release --example unseen_inference

use hatemtl::eval::{loo_fold, UnseenEvalSet, UnseenScheme};
use hatemtl::synth::synth_family;
use hatemtl::train::TrainConfig;

fn main() {
    let (mut datasets, target) = synth_family(200, 200, 0.05, 21);
    datasets.push(target);
    let target_idx = datasets.len() - 1;

    let config = TrainConfig {
        epochs: 8,
        batch_size: 16,
        seed: 21,
        ..TrainConfig::default()
    };
    for scheme in [UnseenScheme::Nch, UnseenScheme::Mv] {
        let fold = loo_fold(
            &datasets,
            target_idx,
            scheme,
            1,
            UnseenEvalSet::Full,
            &config,
        )
        .unwrap();
        assert_eq!(fold.leaked_ids, 0, "isolation audit");
        println!(
            "{scheme}: binarized macro-F1 {:.4} on unseen dataset {:?}",
            fold.mean_macro_f1, fold.target
        );
    }
}
