//! Joint multi-task training, single-dataset baselines, and the frozen-trunk
//! NCH binary head.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{ClassDef, SplitBundle, HARMFUL, HARMLESS};
use crate::error::{Error, Result};
use crate::eval::{argmax, classification_report};
use crate::model::{
    forward_head_vars, init_head_params, EncoderConfig, HeadInfo, MtlModel,
};
use crate::numerics::{AdamConfig, AdamState, ParamTensor, Tape, Var};
use crate::tokenizer::{TokenSequence, Vocabulary};

/// Reserved name of the binary head trained on the frozen trunk; it never
/// participates in the majority vote.
pub const NCH_HEAD: &str = "nch";

/// Whether the optimizer steps after every interleaved minibatch round
/// (default) or once per epoch on the accumulated gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    Interleaved,
    EpochAccumulated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub head_hidden: usize,
    pub encoder: EncoderConfig,
    pub step_mode: StepMode,
    pub vocab_max_size: usize,
    pub vocab_min_freq: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 42,
            head_hidden: 32,
            encoder: EncoderConfig::mean_pool(),
            step_mode: StepMode::Interleaved,
            vocab_max_size: 20_000,
            vocab_min_freq: 1,
        }
    }
}

/// One dataset's class schema together with its train/validation/test split.
/// The train part is expected to be oversampled already when balance matters.
#[derive(Debug, Clone)]
pub struct DatasetSplits {
    pub name: String,
    pub classes: Vec<ClassDef>,
    pub bundle: SplitBundle,
}

impl DatasetSplits {
    pub fn harmful_flags(&self) -> Vec<bool> {
        self.classes.iter().map(|c| c.harmful).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// training loss summed over the epoch's optimizer objectives
    pub total_loss: f64,
    /// the same loss broken down by dataset, in input order
    pub per_dataset_loss: Vec<f64>,
    /// validation macro-F1 per dataset head, in input order
    pub val_macro_f1: Vec<f64>,
    /// unweighted mean of the per-dataset scores; drives model selection
    pub mean_val_macro_f1: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedArtifact {
    pub model: MtlModel,
    pub vocab: Vocabulary,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    /// history of the NCH head fit, when one has been attached
    pub nch_history: Vec<EpochRecord>,
}

/// Endless shuffled pass over `0..n`; reshuffles whenever a pass completes,
/// so smaller datasets cycle while a larger one finishes its epoch.
struct BatchCycler {
    indices: Vec<usize>,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl BatchCycler {
    fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        BatchCycler {
            indices,
            cursor: 0,
            rng,
        }
    }

    fn next_batch(&mut self, size: usize) -> Vec<usize> {
        if self.cursor >= self.indices.len() {
            self.indices.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let end = (self.cursor + size).min(self.indices.len());
        let batch = self.indices[self.cursor..end].to_vec();
        self.cursor = end;
        batch
    }
}

fn encode_split(
    vocab: &Vocabulary,
    max_len: usize,
    instances: &[crate::data::Instance],
) -> Vec<(TokenSequence, usize)> {
    instances
        .iter()
        .map(|i| (vocab.encode(&i.text, max_len), i.class))
        .collect()
}

fn apply_adam(model: &mut MtlModel, adam: &mut AdamState) {
    let mut refs: Vec<&mut ParamTensor> =
        model.params_mut().iter_mut().map(|(_, p)| p).collect();
    adam.step(&mut refs);
}

/// Per-head validation macro-F1 over the datasets' own class spaces.
fn validation_scores(
    model: &MtlModel,
    datasets: &[DatasetSplits],
    val_enc: &[Vec<(TokenSequence, usize)>],
) -> Vec<f64> {
    let mut tape = Tape::new();
    let binding = model.bind(&mut tape);
    let mark = tape.len();
    datasets
        .iter()
        .zip(val_enc)
        .map(|(ds, split)| {
            if split.is_empty() {
                return 0.0;
            }
            let mut gold = Vec::with_capacity(split.len());
            let mut pred = Vec::with_capacity(split.len());
            for (seq, class) in split {
                let emb = model.encode_pool(&mut tape, &binding, seq);
                let probs = model.head_forward(&mut tape, &binding, &ds.name, emb);
                pred.push(argmax(tape.value(probs)));
                gold.push(*class);
                tape.truncate(mark);
            }
            classification_report(&gold, &pred, ds.classes.len()).macro_f1
        })
        .collect()
}

/// Train the shared trunk and one head per dataset.
///
/// Every optimizer step draws one minibatch from each dataset and minimizes
/// the sum of the per-dataset mean cross-entropies; an epoch ends when the
/// largest train split has been consumed once. The returned model is the
/// epoch with the best mean validation macro-F1 (earliest on ties).
pub fn train_mtl(datasets: &[DatasetSplits], config: &TrainConfig) -> Result<TrainedArtifact> {
    if datasets.is_empty() {
        return Err(Error::Config("no datasets to train on".into()));
    }
    {
        let mut names: Vec<&str> = datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != datasets.len() {
            return Err(Error::Config("duplicate dataset names".into()));
        }
        if names.contains(&NCH_HEAD) {
            return Err(Error::Config(format!("dataset name {NCH_HEAD:?} is reserved")));
        }
    }
    for ds in datasets {
        if ds.bundle.train.is_empty() {
            return Err(Error::Config(format!("dataset {:?} has an empty train split", ds.name)));
        }
    }

    // vocabulary comes from training text only
    let corpus: Vec<&str> = datasets
        .iter()
        .flat_map(|d| d.bundle.train.iter().map(|i| i.text.as_str()))
        .collect();
    let vocab = Vocabulary::build(&corpus, config.vocab_max_size, config.vocab_min_freq)?;
    let mut enc_cfg = config.encoder;
    enc_cfg.vocab_size = vocab.len();

    let heads: BTreeMap<String, HeadInfo> = datasets
        .iter()
        .map(|d| {
            (
                d.name.clone(),
                HeadInfo {
                    class_count: d.classes.len(),
                    harmful: d.harmful_flags(),
                },
            )
        })
        .collect();
    let mut model = MtlModel::init(enc_cfg, config.head_hidden, &heads, config.seed);

    let train_enc: Vec<Vec<(TokenSequence, usize)>> = datasets
        .iter()
        .map(|d| encode_split(&vocab, enc_cfg.max_len, &d.bundle.train))
        .collect();
    let val_enc: Vec<Vec<(TokenSequence, usize)>> = datasets
        .iter()
        .map(|d| encode_split(&vocab, enc_cfg.max_len, &d.bundle.validation))
        .collect();

    let mut adam = {
        let refs: Vec<&ParamTensor> = model.params().iter().map(|(_, p)| p).collect();
        AdamState::new(config.adam, &refs)
    };
    let mut cyclers: Vec<BatchCycler> = train_enc
        .iter()
        .enumerate()
        .map(|(i, t)| BatchCycler::new(t.len(), config.seed.wrapping_add(1 + i as u64)))
        .collect();
    let largest = train_enc.iter().map(Vec::len).max().unwrap();
    let steps_per_epoch = largest.div_ceil(config.batch_size);

    let mut history = Vec::with_capacity(config.epochs);
    let mut best_epoch = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    let mut best_model = model.clone();

    for epoch in 0..config.epochs {
        let mut epoch_total = 0.0;
        let mut epoch_per = vec![0.0; datasets.len()];
        for _ in 0..steps_per_epoch {
            let mut tape = Tape::new();
            let binding = model.bind(&mut tape);
            let mut ds_losses: Vec<Var> = Vec::with_capacity(datasets.len());
            for (i, ds) in datasets.iter().enumerate() {
                let batch = cyclers[i].next_batch(config.batch_size);
                let mut example_losses = Vec::with_capacity(batch.len());
                for idx in batch {
                    let (seq, class) = &train_enc[i][idx];
                    let emb = model.encode_pool(&mut tape, &binding, seq);
                    let probs = model.head_forward(&mut tape, &binding, &ds.name, emb);
                    example_losses.push(tape.cross_entropy(probs, *class));
                }
                let sum = tape.sum_vars(&example_losses);
                let mean = tape.scale(sum, 1.0 / example_losses.len() as f64);
                ds_losses.push(mean);
            }
            let total = tape.sum_vars(&ds_losses);
            tape.backward(total);
            model.accumulate_grads(&tape, &binding, false);
            if config.step_mode == StepMode::Interleaved {
                apply_adam(&mut model, &mut adam);
            }
            epoch_total += tape.scalar_value(total);
            for (acc, &l) in epoch_per.iter_mut().zip(&ds_losses) {
                *acc += tape.scalar_value(l);
            }
        }
        if config.step_mode == StepMode::EpochAccumulated {
            apply_adam(&mut model, &mut adam);
        }

        let val_macro_f1 = validation_scores(&model, datasets, &val_enc);
        let mean_val_macro_f1 =
            val_macro_f1.iter().sum::<f64>() / val_macro_f1.len() as f64;
        if mean_val_macro_f1 > best_score {
            best_score = mean_val_macro_f1;
            best_epoch = epoch;
            best_model = model.clone();
        }
        history.push(EpochRecord {
            epoch,
            total_loss: epoch_total,
            per_dataset_loss: epoch_per,
            val_macro_f1,
            mean_val_macro_f1,
        });
    }

    best_model.zero_grads();
    Ok(TrainedArtifact {
        model: best_model,
        vocab,
        history,
        best_epoch,
        nch_history: Vec::new(),
    })
}

/// Single-dataset baseline: the same pipeline with one dataset and one head.
pub fn train_single(dataset: &DatasetSplits, config: &TrainConfig) -> Result<TrainedArtifact> {
    train_mtl(std::slice::from_ref(dataset), config)
}

/// Fit the binary NCH head on top of a trained artifact's frozen trunk and
/// attach it to the model under [`NCH_HEAD`].
///
/// Training material is the concatenation of the binarized train splits;
/// selection uses the concatenated validation *and* test splits (legitimate
/// because the scheme is scored on a dataset held out entirely). The trunk is
/// never touched: sentence embeddings are computed once up front.
pub fn train_nch_head(
    artifact: &mut TrainedArtifact,
    datasets: &[DatasetSplits],
    config: &TrainConfig,
) -> Result<Vec<EpochRecord>> {
    let model = &artifact.model;
    let d = model.config.d_model;
    let max_len = model.config.max_len;

    let mut tape = Tape::new();
    let binding = model.bind(&mut tape);
    let mark = tape.len();
    let mut embed_one = |text: &str| -> Vec<f64> {
        let seq = artifact.vocab.encode(text, max_len);
        let v = model.encode_pool(&mut tape, &binding, &seq);
        let out = tape.value(v).to_vec();
        tape.truncate(mark);
        out
    };
    let mut collect = |take: &dyn Fn(&DatasetSplits) -> Vec<&crate::data::Instance>| {
        let mut out: Vec<(Vec<f64>, usize)> = Vec::new();
        for ds in datasets {
            let flags = ds.harmful_flags();
            for inst in take(ds) {
                let label = if flags[inst.class] { HARMFUL } else { HARMLESS };
                out.push((embed_one(&inst.text), label));
            }
        }
        out
    };
    let train: Vec<(Vec<f64>, usize)> = collect(&|ds| ds.bundle.train.iter().collect());
    let val: Vec<(Vec<f64>, usize)> = collect(&|ds| {
        ds.bundle
            .validation
            .iter()
            .chain(ds.bundle.test.iter())
            .collect()
    });
    drop(tape);
    if train.is_empty() {
        return Err(Error::Config("no training material for the NCH head".into()));
    }

    // fresh head, independent of the trunk's initialization stream
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x6e63_68));
    let prefix = format!("head.{NCH_HEAD}");
    let mut head = init_head_params(&mut rng, &prefix, d, config.head_hidden, 2);
    let mut adam = {
        let refs: Vec<&ParamTensor> = head.iter().map(|(_, p)| p).collect();
        AdamState::new(config.adam, &refs)
    };
    let mut cycler = BatchCycler::new(train.len(), config.seed.wrapping_add(0x6e63_69));
    let steps_per_epoch = train.len().div_ceil(config.batch_size);

    let head_vars = |tape: &mut Tape, head: &[(String, ParamTensor)]| -> [Var; 6] {
        let vs: Vec<Var> = head.iter().map(|(_, p)| tape.param(p)).collect();
        [vs[0], vs[1], vs[2], vs[3], vs[4], vs[5]]
    };

    let mut history = Vec::with_capacity(config.epochs);
    let mut best_epoch = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    let mut best_head = head.clone();

    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        for _ in 0..steps_per_epoch {
            let mut tape = Tape::new();
            let wb = head_vars(&mut tape, &head);
            let batch = cycler.next_batch(config.batch_size);
            let mut losses = Vec::with_capacity(batch.len());
            for idx in batch {
                let (emb, label) = &train[idx];
                let e = tape.leaf(1, d, emb.clone());
                let probs = forward_head_vars(&mut tape, &wb, e);
                losses.push(tape.cross_entropy(probs, *label));
            }
            let sum = tape.sum_vars(&losses);
            let mean = tape.scale(sum, 1.0 / losses.len() as f64);
            tape.backward(mean);
            for (k, (_, p)) in head.iter_mut().enumerate() {
                for (g, t) in p.grad.iter_mut().zip(tape.grad(wb[k])) {
                    *g += t;
                }
            }
            let mut refs: Vec<&mut ParamTensor> = head.iter_mut().map(|(_, p)| p).collect();
            adam.step(&mut refs);
            epoch_loss += tape.scalar_value(mean);
        }

        let score = {
            let mut tape = Tape::new();
            let wb = head_vars(&mut tape, &head);
            let mark = tape.len();
            let mut gold = Vec::with_capacity(val.len());
            let mut pred = Vec::with_capacity(val.len());
            for (emb, label) in &val {
                let e = tape.leaf(1, d, emb.clone());
                let probs = forward_head_vars(&mut tape, &wb, e);
                pred.push(argmax(tape.value(probs)));
                gold.push(*label);
                tape.truncate(mark);
            }
            if gold.is_empty() {
                0.0
            } else {
                classification_report(&gold, &pred, 2).macro_f1
            }
        };
        if score > best_score {
            best_score = score;
            best_epoch = epoch;
            best_head = head.clone();
        }
        history.push(EpochRecord {
            epoch,
            total_loss: epoch_loss,
            per_dataset_loss: vec![epoch_loss],
            val_macro_f1: vec![score],
            mean_val_macro_f1: score,
        });
    }
    let _ = best_epoch;

    for (_, p) in &mut best_head {
        p.zero_grad();
    }
    artifact.model.insert_head(
        NCH_HEAD,
        HeadInfo {
            class_count: 2,
            harmful: vec![false, true],
        },
        best_head,
    );
    artifact.nch_history = history.clone();
    Ok(history)
}

/// Write a training history as CSV with one row per epoch.
pub fn write_history_csv(
    path: &Path,
    dataset_names: &[String],
    history: &[EpochRecord],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    let mut header = vec!["epoch".to_string(), "total_loss".to_string()];
    header.extend(dataset_names.iter().map(|n| format!("loss_{n}")));
    header.extend(dataset_names.iter().map(|n| format!("val_macro_f1_{n}")));
    header.push("mean_val_macro_f1".to_string());
    w.write_record(&header)?;
    for rec in history {
        let mut row = vec![rec.epoch.to_string(), format!("{:.17e}", rec.total_loss)];
        row.extend(rec.per_dataset_loss.iter().map(|v| format!("{v:.17e}")));
        row.extend(rec.val_macro_f1.iter().map(|v| format!("{v:.17e}")));
        row.push(format!("{:.17e}", rec.mean_val_macro_f1));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Config(format!("flush {}: {e}", path.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Instance;

    fn inst(dataset: &str, n: usize, text: &str, class: usize) -> Instance {
        Instance {
            id: format!("{dataset}#{n}"),
            text: text.to_string(),
            class,
            timestamp: None,
            author: None,
        }
    }

    /// Tiny linearly separable dataset; sizes divisible by the batch size so
    /// zero-learning-rate runs produce identical epochs.
    fn toy_splits(name: &str, salt: usize) -> DatasetSplits {
        let benign = ["good sunny day", "nice kind friend", "happy calm walk", "sweet warm tea"];
        let nasty = ["bad vile scum", "awful cruel slur", "nasty mean filth", "gross dumb trash"];
        let mut train = Vec::new();
        for k in 0..8 {
            train.push(inst(name, k * 2, benign[(k + salt) % 4], 0));
            train.push(inst(name, k * 2 + 1, nasty[(k + salt) % 4], 1));
        }
        let validation = vec![
            inst(name, 100, benign[salt % 4], 0),
            inst(name, 101, nasty[salt % 4], 1),
        ];
        let test = vec![
            inst(name, 200, benign[(salt + 1) % 4], 0),
            inst(name, 201, nasty[(salt + 1) % 4], 1),
        ];
        DatasetSplits {
            name: name.to_string(),
            classes: vec![
                ClassDef { name: "ok".into(), harmful: false },
                ClassDef { name: "harm".into(), harmful: true },
            ],
            bundle: SplitBundle {
                train,
                validation,
                test,
                seed: 0,
            },
        }
    }

    fn tiny_config() -> TrainConfig {
        TrainConfig {
            epochs: 3,
            batch_size: 4,
            encoder: EncoderConfig {
                d_model: 8,
                max_len: 8,
                ..EncoderConfig::mean_pool()
            },
            head_hidden: 8,
            seed: 7,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn loss_is_additive_over_datasets() {
        let splits = vec![toy_splits("a", 0), toy_splits("b", 1)];
        let art = train_mtl(&splits, &tiny_config()).unwrap();
        for rec in &art.history {
            let sum: f64 = rec.per_dataset_loss.iter().sum();
            assert!(
                (rec.total_loss - sum).abs() < 1e-9,
                "epoch {}: {} vs {}",
                rec.epoch,
                rec.total_loss,
                sum
            );
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let splits = vec![toy_splits("a", 0), toy_splits("b", 1)];
        let cfg = tiny_config();
        let one = train_mtl(&splits, &cfg).unwrap();
        let two = train_mtl(&splits, &cfg).unwrap();
        assert_eq!(one.model, two.model);
        assert_eq!(one.history, two.history);
        assert_eq!(one.best_epoch, two.best_epoch);
    }

    #[test]
    fn step_modes_agree_on_recorded_losses_first_epoch() {
        // with zero learning rate nothing moves, so both modes log the same
        // losses every epoch
        let splits = vec![toy_splits("a", 0), toy_splits("b", 1)];
        let mut cfg = tiny_config();
        cfg.adam.learning_rate = 0.0;
        let interleaved = train_mtl(&splits, &cfg).unwrap();
        cfg.step_mode = StepMode::EpochAccumulated;
        let accumulated = train_mtl(&splits, &cfg).unwrap();
        assert_eq!(interleaved.history, accumulated.history);
    }

    #[test]
    fn zero_learning_rate_keeps_initial_params_and_picks_first_epoch() {
        let splits = vec![toy_splits("a", 0)];
        let mut cfg = tiny_config();
        cfg.adam.learning_rate = 0.0;
        let art = train_mtl(&splits, &cfg).unwrap();
        // constant validation score across epochs: earliest epoch wins
        assert_eq!(art.best_epoch, 0);
        let scores: Vec<f64> = art.history.iter().map(|r| r.mean_val_macro_f1).collect();
        assert!(scores.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn single_is_mtl_with_one_head() {
        let ds = toy_splits("solo", 0);
        let art = train_single(&ds, &tiny_config()).unwrap();
        assert_eq!(art.model.heads.len(), 1);
        assert!(art.model.heads.contains_key("solo"));
    }

    #[test]
    fn learns_the_toy_task() {
        let splits = vec![toy_splits("a", 0), toy_splits("b", 1)];
        let mut cfg = tiny_config();
        cfg.epochs = 40;
        cfg.adam.learning_rate = 0.02;
        let art = train_mtl(&splits, &cfg).unwrap();
        let best = &art.history[art.best_epoch];
        assert!(
            best.mean_val_macro_f1 > 0.9,
            "validation macro-F1 stuck at {}",
            best.mean_val_macro_f1
        );
    }

    #[test]
    fn nch_head_leaves_trunk_untouched() {
        let splits = vec![toy_splits("a", 0), toy_splits("b", 1)];
        let cfg = tiny_config();
        let mut art = train_mtl(&splits, &cfg).unwrap();
        let trunk_before: Vec<(String, Vec<f64>)> = art
            .model
            .params()
            .iter()
            .filter(|(n, _)| MtlModel::is_trunk_param(n))
            .map(|(n, p)| (n.clone(), p.data.clone()))
            .collect();
        train_nch_head(&mut art, &splits, &cfg).unwrap();
        let trunk_after: Vec<(String, Vec<f64>)> = art
            .model
            .params()
            .iter()
            .filter(|(n, _)| MtlModel::is_trunk_param(n))
            .map(|(n, p)| (n.clone(), p.data.clone()))
            .collect();
        assert_eq!(trunk_before, trunk_after);
        assert!(art.model.heads.contains_key(NCH_HEAD));
        assert_eq!(art.model.heads[NCH_HEAD].class_count, 2);
        assert_eq!(
            art.model
                .param_names()
                .filter(|n| n.starts_with("head.nch."))
                .count(),
            6
        );
    }

    #[test]
    fn nch_head_learns_binarized_task() {
        let splits = vec![toy_splits("a", 0), toy_splits("b", 1)];
        let mut cfg = tiny_config();
        cfg.epochs = 40;
        cfg.adam.learning_rate = 0.02;
        let mut art = train_mtl(&splits, &cfg).unwrap();
        let history = train_nch_head(&mut art, &splits, &cfg).unwrap();
        let best = history
            .iter()
            .map(|r| r.mean_val_macro_f1)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(best > 0.9, "NCH validation macro-F1 stuck at {best}");
    }

    #[test]
    fn reserved_head_name_rejected() {
        let mut ds = toy_splits("a", 0);
        ds.name = NCH_HEAD.to_string();
        assert!(train_single(&ds, &tiny_config()).is_err());
    }

    #[test]
    fn history_csv_round_trips_row_count() {
        let splits = vec![toy_splits("a", 0)];
        let art = train_mtl(&splits, &tiny_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("history.csv");
        write_history_csv(&path, &["a".into()], &art.history).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert_eq!(body.lines().count(), art.history.len() + 1);
        assert!(body.starts_with("epoch,total_loss,loss_a,val_macro_f1_a,mean_val_macro_f1"));
    }
}
