//! Ruzicka similarity between term-frequency profiles of datasets.
//!
//! Run with: cargo run --example vocabulary_similarity

use hatemtl::analysis::{ruzicka, term_profile};
use hatemtl::synth::{synth_dataset, HARMFUL_KEYWORDS, HARMLESS_KEYWORDS};

fn main() {
    // two datasets over the same keyword slice, one over a disjoint slice
    let a = synth_dataset("a", 300, &HARMFUL_KEYWORDS[..4], &HARMLESS_KEYWORDS[..4], 0.0, 1);
    let b = synth_dataset("b", 300, &HARMFUL_KEYWORDS[..4], &HARMLESS_KEYWORDS[..4], 0.0, 2);
    let c = synth_dataset("c", 300, &HARMFUL_KEYWORDS[8..], &HARMLESS_KEYWORDS[8..], 0.0, 3);

    let profile = |ds: &hatemtl::data::LabeledDataset| {
        let texts: Vec<&str> = ds.instances.iter().map(|i| i.text.as_str()).collect();
        term_profile(&texts)
    };
    let (pa, pb, pc) = (profile(&a), profile(&b), profile(&c));

    println!("ruzicka(a, a) = {:.4} (identical)", ruzicka(&pa, &pa));
    println!("ruzicka(a, b) = {:.4} (same keyword slice)", ruzicka(&pa, &pb));
    println!("ruzicka(a, c) = {:.4} (disjoint keyword slice)", ruzicka(&pa, &pc));
}
