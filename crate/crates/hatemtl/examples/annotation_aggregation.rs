//! Two-stage vote aggregation, tie-break strategies, agreement, and worker
//! diagnostics on a small synthetic vote corpus.
//!
//! Run with: cargo run --example annotation_aggregation

use hatemtl::annotation::{
    aggregate, compare_strategies, consensus_histogram, group_by_item, krippendorff_alpha,
    worker_report, AnnotationRecord, ConsensusKind, TieBreakStrategy, Vote, ALL_STRATEGIES,
};

fn main() {
    // eight workers, four items; w7 votes close to randomly
    let labels: [&[Vote]; 4] = [
        &[Vote::Neutral; 8],
        &[
            Vote::Neutral, Vote::Neutral, Vote::Neutral, Vote::Abuse,
            Vote::Abuse, Vote::Hate, Vote::Hate, Vote::Hate,
        ],
        &[
            Vote::Neutral, Vote::Neutral, Vote::Neutral, Vote::Neutral,
            Vote::Abuse, Vote::Abuse, Vote::Hate, Vote::Hate,
        ],
        &[
            Vote::Abuse, Vote::Abuse, Vote::Abuse, Vote::Hate,
            Vote::Hate, Vote::Hate, Vote::Hate, Vote::Neutral,
        ],
    ];
    let mut records = Vec::new();
    for (i, item_votes) in labels.iter().enumerate() {
        for (w, &vote) in item_votes.iter().enumerate() {
            records.push(AnnotationRecord {
                item: format!("post-{i}"),
                worker: format!("w{w}"),
                label: vote,
            });
        }
    }
    let items = group_by_item(&records);

    println!("per-item labels by strategy:");
    for (item, votes) in &items {
        let row: Vec<String> = ALL_STRATEGIES
            .iter()
            .map(|&s| format!("{s}={}", aggregate(votes, s)))
            .collect();
        println!("  {item}: {}", row.join("  "));
    }

    let alpha = krippendorff_alpha(&items).unwrap();
    println!("\nKrippendorff alpha = {alpha:.4}");

    println!("\nbinary consensus histogram (votes on the winning side):");
    for (level, count) in consensus_histogram(&items, ConsensusKind::Binary) {
        println!("  {level} of 8 votes: {count} item(s)");
    }

    let cmp = compare_strategies(&items);
    println!("\nlabel counts per strategy [NEUTRAL, ABUSE, HATE]:");
    for (s, counts) in &cmp.counts {
        println!("  {s}: {counts:?}");
    }

    println!("\nworkers by agreement with the HL consensus (ascending):");
    for w in worker_report(&records, TieBreakStrategy::Hl) {
        println!(
            "  {}: {:.0}% over {} votes",
            w.worker,
            100.0 * w.agreement,
            w.votes
        );
    }
}
