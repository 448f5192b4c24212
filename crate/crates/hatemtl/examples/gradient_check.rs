//! Verify the reverse-mode gradients of the full model against central
//! finite differences.
//!
//! The check loss is the batch cross-entropy scaled by a small constant:
//! scaling pushes near-zero gradient coordinates below the checker's
//! absolute floor, so the reported error reflects genuine backward bugs
//! rather than finite-difference truncation noise.
//!
//! Run with: cargo run --example gradient_check

use std::collections::BTreeMap;

use hatemtl::model::{EncoderConfig, EncoderVariant, HeadInfo, MtlModel};
use hatemtl::numerics::{finite_diff_check, Tape};
use hatemtl::tokenizer::TokenSequence;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LOSS_SCALE: f64 = 5e-4;

fn forward_loss(model: &MtlModel, batch: &[(TokenSequence, usize)]) -> f64 {
    let mut tape = Tape::new();
    let binding = model.bind(&mut tape);
    let losses: Vec<_> = batch
        .iter()
        .map(|(seq, gold)| {
            let emb = model.encode_pool(&mut tape, &binding, seq);
            let probs = model.head_forward(&mut tape, &binding, "demo", emb);
            tape.cross_entropy(probs, *gold)
        })
        .collect();
    let total = tape.sum_vars(&losses);
    let scaled = tape.scale(total, LOSS_SCALE);
    tape.scalar_value(scaled)
}

fn backward_grads(model: &MtlModel, batch: &[(TokenSequence, usize)]) -> Vec<Vec<f64>> {
    let mut tape = Tape::new();
    let binding = model.bind(&mut tape);
    let losses: Vec<_> = batch
        .iter()
        .map(|(seq, gold)| {
            let emb = model.encode_pool(&mut tape, &binding, seq);
            let probs = model.head_forward(&mut tape, &binding, "demo", emb);
            tape.cross_entropy(probs, *gold)
        })
        .collect();
    let total = tape.sum_vars(&losses);
    let scaled = tape.scale(total, LOSS_SCALE);
    tape.backward(scaled);
    model
        .params()
        .iter()
        .map(|(name, _)| tape.grad(binding.var(name)).to_vec())
        .collect()
}

fn with_params(model: &MtlModel, values: &[Vec<f64>]) -> MtlModel {
    let mut m = model.clone();
    for ((_, p), v) in m.params_mut().iter_mut().zip(values) {
        p.data.copy_from_slice(v);
    }
    m
}

fn main() {
    let config = EncoderConfig {
        variant: EncoderVariant::MiniTransformer,
        d_model: 8,
        n_layers: 2,
        n_heads: 2,
        ff_dim: 16,
        max_len: 8,
        vocab_size: 20,
    };
    let heads = BTreeMap::from([(
        "demo".to_string(),
        HeadInfo {
            class_count: 3,
            harmful: vec![false, true, true],
        },
    )]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut model = MtlModel::init(config, 8, &heads, 7);
    for (_, p) in model.params_mut() {
        for v in &mut p.data {
            *v = rng.gen_range(-0.5..0.5);
        }
    }
    let batch: Vec<(TokenSequence, usize)> = (0..4)
        .map(|_| {
            let mut ids = vec![2usize];
            for _ in 1..4 {
                ids.push(rng.gen_range(3..20));
            }
            (TokenSequence { ids, true_length: 4 }, rng.gen_range(0..3))
        })
        .collect();

    let params: Vec<Vec<f64>> = model.params().iter().map(|(_, p)| p.data.clone()).collect();
    let err = finite_diff_check(
        &params,
        |p| forward_loss(&with_params(&model, p), &batch),
        |p| backward_grads(&with_params(&model, p), &batch),
        3e-6,
    );
    let coords: usize = params.iter().map(Vec::len).sum();
    println!("checked {coords} coordinates across {} tensors", params.len());
    println!("max relative error = {err:.3e}");
    assert!(err < 1e-4, "gradient check failed");
    println!("PASS (threshold 1e-4)");
}
