//! Metrics, the two unseen-domain inference schemes, and the experiment
//! protocols: leave-one-out, pairwise transfer, and diminishing returns.

use serde::{Deserialize, Serialize};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{self, LabeledDataset, SplitRatios, HARMFUL, HARMLESS};
use crate::error::Result;
use crate::model::MtlModel;
use crate::numerics::Tape;
use crate::tokenizer::TokenSequence;
use crate::train::{self, DatasetSplits, TrainConfig, TrainedArtifact, NCH_HEAD};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Per-class and aggregate scores for one prediction run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub weighted_f1: f64,
    /// confusion[gold][predicted]
    pub confusion: Vec<Vec<usize>>,
}

/// Build the full report. Classes with no gold instances and no predictions
/// score F1 = 0 and still count toward the macro average.
pub fn classification_report(gold: &[usize], predicted: &[usize], classes: usize) -> EvalReport {
    assert_eq!(
        gold.len(),
        predicted.len(),
        "gold has {} labels, predictions {}",
        gold.len(),
        predicted.len()
    );
    let mut confusion = vec![vec![0usize; classes]; classes];
    for (&g, &p) in gold.iter().zip(predicted) {
        assert!(g < classes, "gold label {g} out of range {classes}");
        assert!(p < classes, "predicted label {p} out of range {classes}");
        confusion[g][p] += 1;
    }
    let mut per_class = Vec::with_capacity(classes);
    let mut correct = 0usize;
    for c in 0..classes {
        let tp = confusion[c][c];
        correct += tp;
        let fp: usize = (0..classes).filter(|&g| g != c).map(|g| confusion[g][c]).sum();
        let fn_: usize = (0..classes).filter(|&p| p != c).map(|p| confusion[c][p]).sum();
        let support = tp + fn_;
        let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
        let recall = if support > 0 { tp as f64 / support as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }
    let n = gold.len();
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / classes as f64;
    // pooled counts: in single-label classification every error is one FP
    // and one FN, so micro-F1 collapses to accuracy
    let micro_f1 = if n > 0 { correct as f64 / n as f64 } else { 0.0 };
    let weighted_f1 = if n > 0 {
        per_class
            .iter()
            .map(|m| m.f1 * m.support as f64)
            .sum::<f64>()
            / n as f64
    } else {
        0.0
    };
    EvalReport {
        per_class,
        macro_f1,
        micro_f1,
        weighted_f1,
        confusion,
    }
}

/// Index of the largest value; ties break to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Batch inference helper: binds the model onto a tape once and reclaims
/// scratch nodes after every call.
pub struct Inferencer<'m> {
    model: &'m MtlModel,
    tape: Tape,
    binding: crate::model::Binding,
    watermark: usize,
}

impl<'m> Inferencer<'m> {
    pub fn new(model: &'m MtlModel) -> Self {
        let mut tape = Tape::new();
        let binding = model.bind(&mut tape);
        let watermark = tape.len();
        Inferencer {
            model,
            tape,
            binding,
            watermark,
        }
    }

    pub fn embed(&mut self, seq: &TokenSequence) -> Vec<f64> {
        let emb = self.model.encode_pool(&mut self.tape, &self.binding, seq);
        let out = self.tape.value(emb).to_vec();
        self.tape.truncate(self.watermark);
        out
    }

    pub fn head_probs(&mut self, head: &str, embedding: &[f64]) -> Vec<f64> {
        let emb = self.tape.leaf(1, embedding.len(), embedding.to_vec());
        let probs = self
            .model
            .head_forward(&mut self.tape, &self.binding, head, emb);
        let out = self.tape.value(probs).to_vec();
        self.tape.truncate(self.watermark);
        out
    }

    /// Majority vote over the dataset heads' binarized argmax classes.
    /// An exact tie resolves to HARMFUL. The NCH head, when present, does
    /// not vote.
    pub fn predict_mv(&mut self, embedding: &[f64]) -> usize {
        let mut harmful_votes = 0usize;
        let mut harmless_votes = 0usize;
        let heads: Vec<(String, Vec<bool>)> = self
            .model
            .heads
            .iter()
            .filter(|(name, _)| name.as_str() != NCH_HEAD)
            .map(|(name, info)| (name.clone(), info.harmful.clone()))
            .collect();
        assert!(!heads.is_empty(), "majority vote needs at least one head");
        for (name, harmful) in heads {
            let probs = self.head_probs(&name, embedding);
            if harmful[argmax(&probs)] {
                harmful_votes += 1;
            } else {
                harmless_votes += 1;
            }
        }
        if harmful_votes >= harmless_votes {
            HARMFUL
        } else {
            HARMLESS
        }
    }

    /// Binary label of the frozen-trunk NCH head.
    pub fn predict_nch(&mut self, embedding: &[f64]) -> usize {
        let probs = self.head_probs(NCH_HEAD, embedding);
        argmax(&probs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnseenScheme {
    Nch,
    Mv,
}

impl std::fmt::Display for UnseenScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnseenScheme::Nch => write!(f, "nch"),
            UnseenScheme::Mv => write!(f, "mv"),
        }
    }
}

/// Which part of the held-out dataset the unseen evaluation scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnseenEvalSet {
    /// the entire target dataset (none of it was observed in training)
    Full,
    /// only the target's test split, for comparability with targeted runs
    TestSplit,
}

#[derive(Debug, Clone, Serialize)]
pub struct LooRun {
    pub seed: u64,
    pub macro_f1: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct LooFoldResult {
    pub target: String,
    pub scheme: UnseenScheme,
    pub runs: Vec<LooRun>,
    pub mean_macro_f1: f64,
    /// number of training-material instance ids found in the target
    /// (mechanical isolation audit; must be zero)
    pub leaked_ids: usize,
}

fn splits_for(
    datasets: &[&LabeledDataset],
    seed: u64,
) -> Result<Vec<DatasetSplits>> {
    datasets
        .iter()
        .map(|ds| {
            let mut bundle = data::stratified_split(ds, SplitRatios::default(), seed)?;
            bundle.train = data::oversample(&bundle.train, seed);
            Ok(DatasetSplits {
                name: ds.name.clone(),
                classes: ds.classes.clone(),
                bundle,
            })
        })
        .collect()
}

fn binary_gold(ds: &LabeledDataset, instances: &[data::Instance]) -> Vec<usize> {
    instances.iter().map(|i| ds.binarize(i.class)).collect()
}

/// One leave-one-out fold: train on everything except `target_idx`, build
/// the scheme's predictor, score binarized predictions on the target.
pub fn loo_fold(
    datasets: &[LabeledDataset],
    target_idx: usize,
    scheme: UnseenScheme,
    runs: usize,
    eval_set: UnseenEvalSet,
    config: &TrainConfig,
) -> Result<LooFoldResult> {
    assert!(datasets.len() >= 2, "leave-one-out needs at least 2 datasets");
    let target = &datasets[target_idx];
    let sources: Vec<&LabeledDataset> = datasets
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_idx)
        .map(|(_, d)| d)
        .collect();

    // isolation audit: ids of everything the training side can see
    let target_ids: std::collections::HashSet<&str> =
        target.instances.iter().map(|i| i.id.as_str()).collect();
    let leaked_ids = sources
        .iter()
        .flat_map(|d| d.instances.iter())
        .filter(|i| target_ids.contains(i.id.as_str()))
        .count();

    let mut fold_runs = Vec::with_capacity(runs);
    for r in 0..runs {
        let seed = config.seed.wrapping_add(r as u64);
        let run_config = TrainConfig {
            seed,
            ..config.clone()
        };
        let splits = splits_for(&sources, seed)?;
        let mut artifact = train::train_mtl(&splits, &run_config)?;
        if scheme == UnseenScheme::Nch {
            train::train_nch_head(&mut artifact, &splits, &run_config)?;
        }

        let eval_instances: Vec<data::Instance> = match eval_set {
            UnseenEvalSet::Full => target.instances.clone(),
            UnseenEvalSet::TestSplit => {
                data::stratified_split(target, SplitRatios::default(), seed)?.test
            }
        };
        let gold = binary_gold(target, &eval_instances);
        let mut inf = Inferencer::new(&artifact.model);
        let predicted: Vec<usize> = eval_instances
            .iter()
            .map(|inst| {
                let seq = artifact.vocab.encode(&inst.text, artifact.model.config.max_len);
                let emb = inf.embed(&seq);
                match scheme {
                    UnseenScheme::Nch => inf.predict_nch(&emb),
                    UnseenScheme::Mv => inf.predict_mv(&emb),
                }
            })
            .collect();
        let report = classification_report(&gold, &predicted, 2);
        fold_runs.push(LooRun {
            seed,
            macro_f1: report.macro_f1,
            report,
        });
    }
    let mean_macro_f1 =
        fold_runs.iter().map(|r| r.macro_f1).sum::<f64>() / fold_runs.len() as f64;
    Ok(LooFoldResult {
        target: target.name.clone(),
        scheme,
        runs: fold_runs,
        mean_macro_f1,
        leaked_ids,
    })
}

/// Rotate the held-out dataset over all positions.
pub fn leave_one_out(
    datasets: &[LabeledDataset],
    scheme: UnseenScheme,
    runs: usize,
    eval_set: UnseenEvalSet,
    config: &TrainConfig,
) -> Result<Vec<LooFoldResult>> {
    (0..datasets.len())
        .map(|t| loo_fold(datasets, t, scheme, runs, eval_set, config))
        .collect()
}

/// Source-by-target grid of mean binarized macro-F1; the diagonal is absent.
#[derive(Debug, Clone, Serialize)]
pub struct TransferMatrix {
    pub names: Vec<String>,
    pub runs: usize,
    /// cells[source][target]; None on the diagonal
    pub cells: Vec<Vec<Option<f64>>>,
}

/// One cell of the pairwise transfer grid: a single-dataset model trained
/// on `source`, scored on the whole of `target` with binarized outputs.
pub fn pairwise_cell(
    source: &LabeledDataset,
    target: &LabeledDataset,
    runs: usize,
    config: &TrainConfig,
) -> Result<f64> {
    let mut sum = 0.0;
    for r in 0..runs {
        let seed = config.seed.wrapping_add(r as u64);
        let run_config = TrainConfig {
            seed,
            ..config.clone()
        };
        let splits = splits_for(&[source], seed)?;
        let artifact = train::train_single(&splits[0], &run_config)?;
        let gold = binary_gold(target, &target.instances);
        let mut inf = Inferencer::new(&artifact.model);
        let predicted: Vec<usize> = target
            .instances
            .iter()
            .map(|inst| {
                let seq = artifact.vocab.encode(&inst.text, artifact.model.config.max_len);
                let emb = inf.embed(&seq);
                // a single voter: the head's binarized argmax
                inf.predict_mv(&emb)
            })
            .collect();
        sum += classification_report(&gold, &predicted, 2).macro_f1;
    }
    Ok(sum / runs as f64)
}

pub fn pairwise_matrix(
    datasets: &[LabeledDataset],
    runs: usize,
    config: &TrainConfig,
) -> Result<TransferMatrix> {
    assert!(datasets.len() >= 2, "pairwise transfer needs at least 2 datasets");
    let names: Vec<String> = datasets.iter().map(|d| d.name.clone()).collect();
    let mut cells = vec![vec![None; datasets.len()]; datasets.len()];
    for s in 0..datasets.len() {
        for t in 0..datasets.len() {
            if s == t {
                continue;
            }
            cells[s][t] = Some(pairwise_cell(&datasets[s], &datasets[t], runs, config)?);
        }
    }
    Ok(TransferMatrix {
        names,
        runs,
        cells,
    })
}

/// Mean and 95% CI of targeted test macro-F1 when `i` sampled auxiliary
/// datasets join the target's training.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub additional: usize,
    pub mean: f64,
    pub ci95: f64,
    pub samples: Vec<f64>,
}

pub const CURVE_ITERATIONS: usize = 10;

/// For each `i` in `1..=max_i`: repeatedly sample `i` pool datasets without
/// replacement, train jointly with the target, and score the target head on
/// the target's test split.
pub fn diminishing_returns(
    target: &LabeledDataset,
    pool: &[LabeledDataset],
    max_i: usize,
    config: &TrainConfig,
) -> Result<Vec<CurvePoint>> {
    assert!(max_i <= pool.len(), "max_i {max_i} exceeds pool size {}", pool.len());
    assert!(
        pool.iter().all(|d| d.name != target.name),
        "pool must exclude the target"
    );
    let mut points = Vec::new();
    for i in 1..=max_i {
        let mut samples = Vec::with_capacity(CURVE_ITERATIONS);
        for iter in 0..CURVE_ITERATIONS {
            let seed = config
                .seed
                .wrapping_mul(1_000_003)
                .wrapping_add((i * 101 + iter) as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut order: Vec<usize> = (0..pool.len()).collect();
            order.shuffle(&mut rng);
            let mut chosen: Vec<&LabeledDataset> = vec![target];
            chosen.extend(order[..i].iter().map(|&k| &pool[k]));

            let run_config = TrainConfig {
                seed,
                ..config.clone()
            };
            let splits = splits_for(&chosen, seed)?;
            let artifact = train::train_mtl(&splits, &run_config)?;
            samples.push(targeted_macro_f1(&artifact, target, seed)?);
        }
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
            / (samples.len() - 1).max(1) as f64;
        let ci95 = 1.96 * (var / samples.len() as f64).sqrt();
        points.push(CurvePoint {
            additional: i,
            mean,
            ci95,
            samples,
        });
    }
    Ok(points)
}

/// Multi-class macro-F1 of the target's own head on the target's test split.
fn targeted_macro_f1(
    artifact: &TrainedArtifact,
    target: &LabeledDataset,
    seed: u64,
) -> Result<f64> {
    let test = data::stratified_split(target, SplitRatios::default(), seed)?.test;
    let gold: Vec<usize> = test.iter().map(|i| i.class).collect();
    let mut inf = Inferencer::new(&artifact.model);
    let predicted: Vec<usize> = test
        .iter()
        .map(|inst| {
            let seq = artifact.vocab.encode(&inst.text, artifact.model.config.max_len);
            let emb = inf.embed(&seq);
            argmax(&inf.head_probs(&target.name, &emb))
        })
        .collect();
    Ok(classification_report(&gold, &predicted, target.classes.len()).macro_f1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions_score_one() {
        let r = classification_report(&[0, 1, 0, 1], &[0, 1, 0, 1], 2);
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.micro_f1, 1.0);
        assert_eq!(r.weighted_f1, 1.0);
    }

    #[test]
    fn hand_confusion_fixture() {
        // gold [0,0,1,1], pred [0,1,1,1]: class0 F1=2/3, class1 F1=4/5
        let r = classification_report(&[0, 0, 1, 1], &[0, 1, 1, 1], 2);
        assert!((r.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.per_class[1].f1 - 0.8).abs() < 1e-12);
        assert!((r.macro_f1 - 11.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn all_one_class_on_balanced_binary() {
        let r = classification_report(&[0, 0, 1, 1], &[0, 0, 0, 0], 2);
        assert!((r.macro_f1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "labels")]
    fn length_mismatch_panics() {
        classification_report(&[0, 1], &[0], 2);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.9, 0.9]), 1);
    }

    proptest! {
        #[test]
        fn micro_f1_equals_accuracy(pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..120)) {
            let gold: Vec<usize> = pairs.iter().map(|&(g, _)| g).collect();
            let pred: Vec<usize> = pairs.iter().map(|&(_, p)| p).collect();
            let r = classification_report(&gold, &pred, 4);
            let acc = gold.iter().zip(&pred).filter(|(g, p)| g == p).count() as f64
                / gold.len() as f64;
            prop_assert!((r.micro_f1 - acc).abs() < 1e-12);
        }

        #[test]
        fn macro_f1_invariant_under_relabeling(pairs in proptest::collection::vec((0usize..3, 0usize..3), 1..80)) {
            let gold: Vec<usize> = pairs.iter().map(|&(g, _)| g).collect();
            let pred: Vec<usize> = pairs.iter().map(|&(_, p)| p).collect();
            let perm = [2usize, 0, 1];
            let gold_p: Vec<usize> = gold.iter().map(|&g| perm[g]).collect();
            let pred_p: Vec<usize> = pred.iter().map(|&p| perm[p]).collect();
            let a = classification_report(&gold, &pred, 3);
            let b = classification_report(&gold_p, &pred_p, 3);
            prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-12);
        }
    }
}
