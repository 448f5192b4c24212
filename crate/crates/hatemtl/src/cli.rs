//! Command-line front end. Exit codes: 0 on success, 1 on usage errors,
//! 2 on data or configuration errors.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis;
use crate::annotation::{self, ConsensusKind, TieBreakStrategy};
use crate::data::{self, DatasetManifest, LabeledDataset, SplitRatios};
use crate::error::{Error, Result};
use crate::eval::{self, Inferencer, UnseenEvalSet, UnseenScheme};
use crate::model::MtlModel;
use crate::textnorm;
use crate::tokenizer::Vocabulary;
use crate::train::{self, DatasetSplits, TrainConfig};

/// Environment variable capping the worker threads used to fan out
/// independent folds and cells. Defaults to 1 (fully sequential).
pub const WORKERS_ENV: &str = "HATEMTL_WORKERS";

#[derive(Parser)]
#[command(name = "hatemtl", version, about = "Multi-task harmful-content classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct TrainOpts {
    /// JSON file with training-configuration overrides
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the RNG seed from the config
    #[arg(long)]
    seed: Option<u64>,
}

impl TrainOpts {
    fn load(&self) -> Result<TrainConfig> {
        let mut cfg: TrainConfig = match &self.config {
            Some(path) => {
                let body = std::fs::read_to_string(path)
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
                serde_json::from_str(&body)?
            }
            None => TrainConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train the joint model (or per-dataset baselines with --single)
    Train {
        /// Dataset manifest files
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Train one independent model per dataset instead of jointly
        #[arg(long)]
        single: bool,
        /// Also fit the frozen-trunk NCH binary head
        #[arg(long)]
        nch: bool,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        opts: TrainOpts,
    },
    /// Leave-one-dataset-out evaluation of unseen-domain inference
    Loo {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Inference scheme on the held-out dataset
        #[arg(long)]
        scheme: UnseenSchemeArg,
        /// Training repetitions per fold
        #[arg(long, default_value_t = 1)]
        runs: usize,
        /// Score only the target's test split instead of the whole dataset
        #[arg(long)]
        test_split: bool,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        opts: TrainOpts,
    },
    /// Pairwise cross-dataset transfer matrix of single-source models
    Pairwise {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        opts: TrainOpts,
    },
    /// Diminishing-returns curve: targeted quality as auxiliary datasets join
    Curve {
        /// Manifest of the target dataset
        #[arg(long)]
        target: PathBuf,
        /// Manifests of the auxiliary pool
        #[arg(required = true)]
        pool: Vec<PathBuf>,
        /// Largest number of auxiliary datasets to sample
        #[arg(long)]
        max_i: Option<usize>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        opts: TrainOpts,
    },
    /// Classify raw text lines with a trained model
    Predict {
        /// Directory holding model.bin and vocab.txt
        #[arg(long)]
        model_dir: PathBuf,
        #[arg(long)]
        scheme: UnseenSchemeArg,
        /// File with one post per line; stdin when omitted
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Crowd-annotation utilities
    Annot {
        #[command(subcommand)]
        command: AnnotCommand,
    },
    /// Corpus and time-series analysis
    Analyze {
        #[command(subcommand)]
        command: AnalyzeCommand,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum UnseenSchemeArg {
    Nch,
    Mv,
}

impl From<UnseenSchemeArg> for UnseenScheme {
    fn from(v: UnseenSchemeArg) -> Self {
        match v {
            UnseenSchemeArg::Nch => UnseenScheme::Nch,
            UnseenSchemeArg::Mv => UnseenScheme::Mv,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum StrategyArg {
    Naive,
    Hh,
    Hl,
    Lh,
    Ll,
}

impl From<StrategyArg> for TieBreakStrategy {
    fn from(v: StrategyArg) -> Self {
        match v {
            StrategyArg::Naive => TieBreakStrategy::Naive,
            StrategyArg::Hh => TieBreakStrategy::Hh,
            StrategyArg::Hl => TieBreakStrategy::Hl,
            StrategyArg::Lh => TieBreakStrategy::Lh,
            StrategyArg::Ll => TieBreakStrategy::Ll,
        }
    }
}

#[derive(Subcommand)]
enum AnnotCommand {
    /// Collapse votes to one label per item
    Aggregate {
        /// CSV with item,worker,label rows
        votes: PathBuf,
        #[arg(long, default_value = "hl")]
        strategy: StrategyArg,
    },
    /// Krippendorff's alpha of the vote corpus
    Alpha { votes: PathBuf },
    /// Per-worker agreement report, least reliable first
    Workers {
        votes: PathBuf,
        #[arg(long, default_value = "hl")]
        strategy: StrategyArg,
    },
    /// Label distributions and disagreements across all strategies
    Compare { votes: PathBuf },
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Ruzicka similarity between two datasets' term profiles
    Ruzicka { manifest_a: PathBuf, manifest_b: PathBuf },
    /// Monthly harmful-content series with optional event and causality tests
    Timeseries {
        manifest: PathBuf,
        /// Event month as YYYY-MM for a before/after window delta
        #[arg(long)]
        event: Option<String>,
        /// Second dataset whose series is tested as a Granger cause
        #[arg(long)]
        granger_with: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        lag: usize,
    },
}

/// Parse and dispatch; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// Run `f` over the items on up to `workers` scoped threads, preserving
/// input order in the output.
fn parallel_map<T, R, F>(items: Vec<T>, workers: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    if workers <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    let queue: Vec<Mutex<Option<T>>> = items.into_iter().map(|t| Mutex::new(Some(t))).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers.min(queue.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= queue.len() {
                    break;
                }
                let item = queue[i].lock().unwrap().take().unwrap();
                *slots[i].lock().unwrap() = Some(f(item));
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().unwrap())
        .collect()
}

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    args: Vec<String>,
    started_utc: String,
    inputs: Vec<InputRecord>,
    outputs: Vec<String>,
}

/// Write `run_manifest.json` recording the invocation, a digest of every
/// input file, and the produced outputs.
fn write_run_manifest(
    out_dir: &Path,
    command: &str,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
) -> Result<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        args: std::env::args().skip(1).collect(),
        started_utc: Utc::now().to_rfc3339(),
        inputs: inputs
            .iter()
            .map(|p| {
                Ok(InputRecord {
                    path: p.display().to_string(),
                    sha256: sha256_hex(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = out_dir.join("run_manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Load datasets and remember every file that fed them (manifest + data).
fn load_datasets(manifests: &[PathBuf]) -> Result<(Vec<LabeledDataset>, Vec<PathBuf>)> {
    let mut datasets = Vec::new();
    let mut inputs = Vec::new();
    for path in manifests {
        let manifest = DatasetManifest::from_file(path)?;
        inputs.push(path.clone());
        inputs.push(manifest.path.clone());
        datasets.push(data::load_dataset(&manifest)?);
    }
    Ok((datasets, inputs))
}

fn make_splits(datasets: &[LabeledDataset], seed: u64) -> Result<Vec<DatasetSplits>> {
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

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

fn save_artifact(
    art: &train::TrainedArtifact,
    names: &[String],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let model_path = dir.join("model.bin");
    let vocab_path = dir.join("vocab.txt");
    let history_path = dir.join("history.csv");
    art.model.save(&model_path)?;
    art.vocab.save(&vocab_path)?;
    train::write_history_csv(&history_path, names, &art.history)?;
    let mut outputs = vec![model_path, vocab_path, history_path];
    if !art.nch_history.is_empty() {
        let nch_path = dir.join("nch_history.csv");
        train::write_history_csv(&nch_path, &[train::NCH_HEAD.to_string()], &art.nch_history)?;
        outputs.push(nch_path);
    }
    Ok(outputs)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            manifests,
            single,
            nch,
            out_dir,
            opts,
        } => cmd_train(&manifests, single, nch, &out_dir, &opts),
        Command::Loo {
            manifests,
            scheme,
            runs,
            test_split,
            out_dir,
            opts,
        } => cmd_loo(&manifests, scheme.into(), runs, test_split, &out_dir, &opts),
        Command::Pairwise {
            manifests,
            runs,
            out_dir,
            opts,
        } => cmd_pairwise(&manifests, runs, &out_dir, &opts),
        Command::Curve {
            target,
            pool,
            max_i,
            out_dir,
            opts,
        } => cmd_curve(&target, &pool, max_i, &out_dir, &opts),
        Command::Predict {
            model_dir,
            scheme,
            input,
        } => cmd_predict(&model_dir, scheme.into(), input.as_deref()),
        Command::Annot { command } => cmd_annot(command),
        Command::Analyze { command } => cmd_analyze(command),
    }
}

fn cmd_train(
    manifests: &[PathBuf],
    single: bool,
    nch: bool,
    out_dir: &Path,
    opts: &TrainOpts,
) -> Result<()> {
    let config = opts.load()?;
    let (datasets, mut inputs) = load_datasets(manifests)?;
    if let Some(path) = &opts.config {
        inputs.push(path.clone());
    }
    ensure_dir(out_dir)?;
    let mut outputs = Vec::new();
    if single {
        let splits = make_splits(&datasets, config.seed)?;
        let results = parallel_map(splits, worker_count(), |ds| -> Result<_> {
            let art = train::train_single(&ds, &config)?;
            Ok((ds.name.clone(), art))
        });
        for result in results {
            let (name, art) = result?;
            let dir = out_dir.join(&name);
            outputs.extend(save_artifact(&art, &[name.clone()], &dir)?);
            println!(
                "{name}: best epoch {} validation macro-F1 {:.4}",
                art.best_epoch, art.history[art.best_epoch].mean_val_macro_f1
            );
        }
    } else {
        let splits = make_splits(&datasets, config.seed)?;
        let mut art = train::train_mtl(&splits, &config)?;
        if nch {
            train::train_nch_head(&mut art, &splits, &config)?;
        }
        let names: Vec<String> = splits.iter().map(|s| s.name.clone()).collect();
        outputs.extend(save_artifact(&art, &names, out_dir)?);
        println!(
            "joint model: best epoch {} mean validation macro-F1 {:.4}",
            art.best_epoch, art.history[art.best_epoch].mean_val_macro_f1
        );
    }
    write_run_manifest(out_dir, "train", &inputs, &outputs)
}

fn cmd_loo(
    manifests: &[PathBuf],
    scheme: UnseenScheme,
    runs: usize,
    test_split: bool,
    out_dir: &Path,
    opts: &TrainOpts,
) -> Result<()> {
    let config = opts.load()?;
    let (datasets, inputs) = load_datasets(manifests)?;
    let eval_set = if test_split {
        UnseenEvalSet::TestSplit
    } else {
        UnseenEvalSet::Full
    };
    let folds = parallel_map(
        (0..datasets.len()).collect::<Vec<_>>(),
        worker_count(),
        |t| eval::loo_fold(&datasets, t, scheme, runs, eval_set, &config),
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    for fold in &folds {
        if fold.leaked_ids > 0 {
            return Err(Error::Config(format!(
                "isolation audit failed for target {:?}: {} leaked ids",
                fold.target, fold.leaked_ids
            )));
        }
        println!(
            "{}: mean binarized macro-F1 {:.4} over {} run(s)",
            fold.target,
            fold.mean_macro_f1,
            fold.runs.len()
        );
    }
    ensure_dir(out_dir)?;
    let report = out_dir.join(format!("loo_{scheme}.json"));
    write_json(&report, &folds)?;
    write_run_manifest(out_dir, "loo", &inputs, &[report])
}

fn cmd_pairwise(
    manifests: &[PathBuf],
    runs: usize,
    out_dir: &Path,
    opts: &TrainOpts,
) -> Result<()> {
    let config = opts.load()?;
    let (datasets, inputs) = load_datasets(manifests)?;
    let n = datasets.len();
    if n < 2 {
        return Err(Error::Config("pairwise transfer needs at least 2 datasets".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| (0..n).filter(move |&t| t != s).map(move |t| (s, t)))
        .collect();
    let cells = parallel_map(pairs.clone(), worker_count(), |(s, t)| {
        eval::pairwise_cell(&datasets[s], &datasets[t], runs, &config)
    });
    let mut matrix = eval::TransferMatrix {
        names: datasets.iter().map(|d| d.name.clone()).collect(),
        runs,
        cells: vec![vec![None; n]; n],
    };
    for ((s, t), cell) in pairs.into_iter().zip(cells) {
        matrix.cells[s][t] = Some(cell?);
    }
    for (s, row) in matrix.cells.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .map(|c| c.map_or("    -- ".into(), |v| format!("{v:.4} ")))
            .collect();
        println!("{:>12} -> {}", matrix.names[s], cells.concat());
    }
    ensure_dir(out_dir)?;
    let report = out_dir.join("pairwise.json");
    write_json(&report, &matrix)?;
    write_run_manifest(out_dir, "pairwise", &inputs, &[report])
}

fn cmd_curve(
    target: &Path,
    pool: &[PathBuf],
    max_i: Option<usize>,
    out_dir: &Path,
    opts: &TrainOpts,
) -> Result<()> {
    let config = opts.load()?;
    let (mut targets, mut inputs) = load_datasets(std::slice::from_ref(&target.to_path_buf()))?;
    let target_ds = targets.remove(0);
    let (pool_ds, pool_inputs) = load_datasets(pool)?;
    inputs.extend(pool_inputs);
    let max_i = max_i.unwrap_or(pool_ds.len());
    let points = eval::diminishing_returns(&target_ds, &pool_ds, max_i, &config)?;
    for p in &points {
        println!(
            "+{} dataset(s): macro-F1 {:.4} +/- {:.4}",
            p.additional, p.mean, p.ci95
        );
    }
    ensure_dir(out_dir)?;
    let report = out_dir.join("curve.json");
    write_json(&report, &points)?;
    write_run_manifest(out_dir, "curve", &inputs, &[report])
}

fn cmd_predict(model_dir: &Path, scheme: UnseenScheme, input: Option<&Path>) -> Result<()> {
    let model = MtlModel::load(&model_dir.join("model.bin"))?;
    let vocab = Vocabulary::load(&model_dir.join("vocab.txt"))?;
    if scheme == UnseenScheme::Nch && !model.heads.contains_key(train::NCH_HEAD) {
        return Err(Error::Config(
            "model has no NCH head; train with --nch or use --scheme mv".into(),
        ));
    }
    let lines: Vec<String> = match input {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            body.lines().map(String::from).collect()
        }
        None => std::io::stdin()
            .lock()
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io("<stdin>".to_string(), e))?,
    };
    let mut inf = Inferencer::new(&model);
    for line in lines {
        let label = match textnorm::normalize(&line) {
            Some(norm) => {
                let seq = vocab.encode(&norm, model.config.max_len);
                let emb = inf.embed(&seq);
                let class = match scheme {
                    UnseenScheme::Nch => inf.predict_nch(&emb),
                    UnseenScheme::Mv => inf.predict_mv(&emb),
                };
                if class == data::HARMFUL {
                    "HARMFUL"
                } else {
                    "HARMLESS"
                }
            }
            None => "EMPTY",
        };
        println!("{}", serde_json::json!({ "text": line, "label": label }));
    }
    Ok(())
}

fn cmd_annot(command: AnnotCommand) -> Result<()> {
    match command {
        AnnotCommand::Aggregate { votes, strategy } => {
            let records = annotation::read_annotation_csv(&votes)?;
            let items = annotation::group_by_item(&records);
            println!("item,label");
            for (item, votes) in &items {
                println!("{item},{}", annotation::aggregate(votes, strategy.into()));
            }
        }
        AnnotCommand::Alpha { votes } => {
            let records = annotation::read_annotation_csv(&votes)?;
            let alpha = annotation::krippendorff_alpha(&annotation::group_by_item(&records))?;
            println!("{alpha:.6}");
        }
        AnnotCommand::Workers { votes, strategy } => {
            let records = annotation::read_annotation_csv(&votes)?;
            let report = annotation::worker_report(&records, strategy.into());
            println!("worker,votes,agreement,alpha_without");
            for w in report {
                let aw = w
                    .alpha_without
                    .map_or("undefined".into(), |a| format!("{a:.6}"));
                println!("{},{},{:.6},{}", w.worker, w.votes, w.agreement, aw);
            }
        }
        AnnotCommand::Compare { votes } => {
            let records = annotation::read_annotation_csv(&votes)?;
            let items = annotation::group_by_item(&records);
            let cmp = annotation::compare_strategies(&items);
            let binary = annotation::consensus_histogram(&items, ConsensusKind::Binary);
            let three = annotation::consensus_histogram(&items, ConsensusKind::ThreeClass);
            let out = serde_json::json!({
                "comparison": cmp,
                "consensus": { "binary": binary, "three_class": three },
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(())
}

fn harmful_series(ds: &LabeledDataset) -> Result<Vec<analysis::MonthPoint>> {
    let posts: Vec<(chrono::DateTime<Utc>, usize)> = ds
        .instances
        .iter()
        .filter_map(|i| i.timestamp.map(|ts| (ts, ds.binarize(i.class))))
        .collect();
    if posts.is_empty() {
        return Err(Error::Config(format!("dataset {:?} has no timestamps", ds.name)));
    }
    Ok(analysis::monthly_series(&posts))
}

fn cmd_analyze(command: AnalyzeCommand) -> Result<()> {
    match command {
        AnalyzeCommand::Ruzicka {
            manifest_a,
            manifest_b,
        } => {
            let (datasets, _) = load_datasets(&[manifest_a, manifest_b])?;
            let profiles: Vec<BTreeMap<String, f64>> = datasets
                .iter()
                .map(|d| {
                    let texts: Vec<&str> =
                        d.instances.iter().map(|i| i.text.as_str()).collect();
                    analysis::term_profile(&texts)
                })
                .collect();
            println!("{:.6}", analysis::ruzicka(&profiles[0], &profiles[1]));
        }
        AnalyzeCommand::Timeseries {
            manifest,
            event,
            granger_with,
            lag,
        } => {
            let (datasets, _) = load_datasets(std::slice::from_ref(&manifest))?;
            let series = harmful_series(&datasets[0])?;
            let mut out = serde_json::json!({ "series": series });
            if let Some(event) = event {
                let (y, m) = parse_event_month(&event)?;
                out["event_delta"] =
                    serde_json::to_value(analysis::event_window_delta(&series, y, m)?)?;
            }
            if let Some(other) = granger_with {
                let (others, _) = load_datasets(std::slice::from_ref(&other))?;
                let other_series = harmful_series(&others[0])?;
                let (x, y) = align_series(&other_series, &series).ok_or_else(|| {
                    Error::Config("the two series share no overlapping months".into())
                })?;
                out["pearson"] = serde_json::to_value(analysis::pearson(&x, &y)?)?;
                out["granger"] = serde_json::to_value(analysis::granger(&x, &y, lag)?)?;
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(())
}

fn parse_event_month(s: &str) -> Result<(i32, u32)> {
    let err = || Error::Config(format!("event must be YYYY-MM, got {s:?}"));
    let (y, m) = s.split_once('-').ok_or_else(err)?;
    let year: i32 = y.parse().map_err(|_| err())?;
    let month: u32 = m.parse().map_err(|_| err())?;
    if !(1..=12).contains(&month) {
        return Err(err());
    }
    Ok((year, month))
}

/// Restrict two monthly series to their overlapping months, as aligned
/// harmful-count vectors (x from `a`, y from `b`).
fn align_series(
    a: &[analysis::MonthPoint],
    b: &[analysis::MonthPoint],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let index: BTreeMap<(i32, u32), f64> = b
        .iter()
        .map(|p| ((p.year, p.month), p.harmful as f64))
        .collect();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for p in a {
        if let Some(&v) = index.get(&(p.year, p.month)) {
            x.push(p.harmful as f64);
            y.push(v);
        }
    }
    (!x.is_empty()).then_some((x, y))
}
