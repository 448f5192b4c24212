//! Synthetic keyword corpora for end-to-end checks of the training
//! pipeline. A shared pool of harmful and harmless keywords is split into
//! disjoint slices per source dataset, while a held-out target draws from
//! the full pool, so transfer to the target genuinely requires combining
//! what the sources teach.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{ClassDef, Instance, LabeledDataset};

/// Twelve harmful-marker keywords (invented, deliberately meaningless).
pub const HARMFUL_KEYWORDS: [&str; 12] = [
    "grukk", "sneev", "dralk", "vurst", "plogg", "krinth",
    "zabble", "morgg", "twiln", "skarn", "blezz", "fronk",
];

/// Twelve harmless-marker keywords.
pub const HARMLESS_KEYWORDS: [&str; 12] = [
    "lumi", "perle", "sorin", "velda", "quena", "tilba",
    "rosam", "nivea", "calor", "brista", "elwyn", "sahel",
];

const FILLERS: [&str; 16] = [
    "the", "a", "people", "today", "really", "just", "saw", "some",
    "about", "this", "that", "very", "again", "online", "post", "here",
];

/// Generate one binary dataset: class 0 sentences carry a harmless keyword,
/// class 1 sentences a harmful one, drawn from the given slices of the pool.
/// With probability `noise` a sentence keeps its text but flips its label.
pub fn synth_dataset(
    name: &str,
    size: usize,
    harmful_kw: &[&str],
    harmless_kw: &[&str],
    noise: f64,
    seed: u64,
) -> LabeledDataset {
    assert!(!harmful_kw.is_empty() && !harmless_kw.is_empty());
    assert!((0.0..=1.0).contains(&noise));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(size);
    for i in 0..size {
        let harmful = i % 2 == 1;
        let keyword = if harmful {
            harmful_kw.choose(&mut rng).unwrap()
        } else {
            harmless_kw.choose(&mut rng).unwrap()
        };
        let n_fill = rng.gen_range(3..=6);
        let mut words: Vec<&str> = (0..n_fill)
            .map(|_| *FILLERS.choose(&mut rng).unwrap())
            .collect();
        let pos = rng.gen_range(0..=words.len());
        words.insert(pos, keyword);
        let mut class = usize::from(harmful);
        if rng.gen_bool(noise) {
            class = 1 - class;
        }
        instances.push(Instance {
            id: format!("{name}#{i}"),
            text: words.join(" "),
            class,
            timestamp: None,
            author: None,
        });
    }
    LabeledDataset {
        name: name.to_string(),
        classes: vec![
            ClassDef {
                name: "benign".into(),
                harmful: false,
            },
            ClassDef {
                name: "harmful".into(),
                harmful: true,
            },
        ],
        instances,
        dropped: 0,
    }
}

/// Three source datasets over disjoint thirds of the keyword pool plus a
/// target over the full pool. Only a model that pools all three sources has
/// seen every target keyword.
pub fn synth_family(
    source_size: usize,
    target_size: usize,
    noise: f64,
    seed: u64,
) -> (Vec<LabeledDataset>, LabeledDataset) {
    let sources = (0..3)
        .map(|k| {
            let lo = k * 4;
            synth_dataset(
                &format!("src{k}"),
                source_size,
                &HARMFUL_KEYWORDS[lo..lo + 4],
                &HARMLESS_KEYWORDS[lo..lo + 4],
                noise,
                seed.wrapping_add(k as u64),
            )
        })
        .collect();
    let target = synth_dataset(
        "target",
        target_size,
        &HARMFUL_KEYWORDS,
        &HARMLESS_KEYWORDS,
        noise,
        seed.wrapping_add(100),
    );
    (sources, target)
}
