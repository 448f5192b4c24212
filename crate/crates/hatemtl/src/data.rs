//! Manifest-driven dataset ingestion, stratified splitting, oversampling,
//! and harmful binarization.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm;

pub const HARMLESS: usize = 0;
pub const HARMFUL: usize = 1;

/// One native class and whether it folds into the harmful side of the
/// binary mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDef {
    pub name: String,
    pub harmful: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Jsonl,
    Csv,
}

/// Column mapping for ingestion. JSONL files use these as field names; CSV
/// files as header names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub text: String,
    pub label: String,
    #[serde(default)]
    pub timestamp: Option<String>,
    #[serde(default)]
    pub author: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            text: "text".into(),
            label: "label".into(),
            timestamp: None,
            author: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub classes: Vec<ClassDef>,
    pub path: PathBuf,
    pub format: FileFormat,
    #[serde(default)]
    pub columns: ColumnMap,
}

impl DatasetManifest {
    pub fn from_file(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut manifest: DatasetManifest = serde_json::from_str(&body)?;
        manifest.validate()?;
        // dataset path is relative to the manifest's directory
        if manifest.path.is_relative() {
            if let Some(dir) = path.parent() {
                manifest.path = dir.join(&manifest.path);
            }
        }
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.len() < 2 {
            return Err(Error::Config(format!(
                "dataset {:?} declares fewer than two classes",
                self.name
            )));
        }
        let mut names = std::collections::HashSet::new();
        for c in &self.classes {
            if !names.insert(&c.name) {
                return Err(Error::Config(format!(
                    "dataset {:?} repeats class {:?}",
                    self.name, c.name
                )));
            }
        }
        if !self.classes.iter().any(|c| c.harmful) || self.classes.iter().all(|c| c.harmful) {
            return Err(Error::Config(format!(
                "dataset {:?} needs at least one harmful and one non-harmful class",
                self.name
            )));
        }
        Ok(())
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == label)
    }
}

/// One normalized, labeled instance. `id` is stable within its dataset and
/// globally unique as `dataset#row`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub text: String,
    pub class: usize,
    pub timestamp: Option<DateTime<Utc>>,
    pub author: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub classes: Vec<ClassDef>,
    pub instances: Vec<Instance>,
    /// rows whose text normalized to nothing
    pub dropped: usize,
}

impl LabeledDataset {
    /// Binary label of a class index under this dataset's mapping.
    pub fn binarize(&self, class: usize) -> usize {
        assert!(
            class < self.classes.len(),
            "class index {class} out of range for dataset {:?}",
            self.name
        );
        if self.classes[class].harmful {
            HARMFUL
        } else {
            HARMLESS
        }
    }

    pub fn harmful_flags(&self) -> Vec<bool> {
        self.classes.iter().map(|c| c.harmful).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for inst in &self.instances {
            counts[inst.class] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        // 8:1:1, the remainder after flooring goes to test
        SplitRatios {
            train: 0.8,
            validation: 0.1,
        }
    }
}

/// Disjoint train/validation/test views of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitBundle {
    pub train: Vec<Instance>,
    pub validation: Vec<Instance>,
    pub test: Vec<Instance>,
    pub seed: u64,
}

struct RawRow {
    text: String,
    label: String,
    timestamp: Option<String>,
    author: Option<String>,
}

fn parse_timestamp(raw: &str, row: usize) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(raw)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::Load(format!("row {row}: bad timestamp {raw:?}: {e}")))
}

fn read_jsonl(path: &Path, cols: &ColumnMap) -> Result<Vec<RawRow>> {
    let body =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut rows = Vec::new();
    for (i, line) in body.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::Load(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        let field = |key: &str| -> Option<String> {
            value.get(key).and_then(|v| match v {
                serde_json::Value::String(s) => Some(s.clone()),
                other => Some(other.to_string()),
            })
        };
        let text = field(&cols.text).ok_or_else(|| {
            Error::Load(format!(
                "{}: row {} misses field {:?}",
                path.display(),
                i + 1,
                cols.text
            ))
        })?;
        let label = field(&cols.label).ok_or_else(|| {
            Error::Load(format!(
                "{}: row {} misses field {:?}",
                path.display(),
                i + 1,
                cols.label
            ))
        })?;
        rows.push(RawRow {
            text,
            label,
            timestamp: cols.timestamp.as_deref().and_then(|k| field(k)),
            author: cols.author.as_deref().and_then(|k| field(k)),
        });
    }
    Ok(rows)
}

fn read_csv(path: &Path, cols: &ColumnMap) -> Result<Vec<RawRow>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let idx = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Load(format!("{}: missing column {name:?}", path.display()))
        })
    };
    let text_i = idx(&cols.text)?;
    let label_i = idx(&cols.label)?;
    let ts_i = cols.timestamp.as_deref().map(idx).transpose()?;
    let author_i = cols.author.as_deref().map(idx).transpose()?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(RawRow {
            text: record.get(text_i).unwrap_or_default().to_string(),
            label: record.get(label_i).unwrap_or_default().to_string(),
            timestamp: ts_i.and_then(|i| record.get(i)).map(str::to_string),
            author: author_i.and_then(|i| record.get(i)).map(str::to_string),
        });
    }
    Ok(rows)
}

/// Load and normalize a dataset. Rows with labels outside the manifest are
/// errors; rows whose text normalizes to nothing are dropped and counted.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<LabeledDataset> {
    manifest.validate()?;
    let rows = match manifest.format {
        FileFormat::Jsonl => read_jsonl(&manifest.path, &manifest.columns)?,
        FileFormat::Csv => read_csv(&manifest.path, &manifest.columns)?,
    };
    let mut instances = Vec::with_capacity(rows.len());
    let mut dropped = 0;
    for (i, row) in rows.iter().enumerate() {
        let class = manifest.class_index(&row.label).ok_or_else(|| {
            Error::Load(format!(
                "{}: row {}: unknown label {:?}",
                manifest.path.display(),
                i + 1,
                row.label
            ))
        })?;
        let Some(text) = textnorm::normalize(&row.text) else {
            dropped += 1;
            continue;
        };
        let timestamp = row
            .timestamp
            .as_deref()
            .filter(|s| !s.is_empty())
            .map(|s| parse_timestamp(s, i + 1))
            .transpose()?;
        instances.push(Instance {
            id: format!("{}#{}", manifest.name, i),
            text,
            class,
            timestamp,
            author: row.author.clone().filter(|s| !s.is_empty()),
        });
    }
    Ok(LabeledDataset {
        name: manifest.name.clone(),
        classes: manifest.classes.clone(),
        instances,
        dropped,
    })
}

/// Per-class shuffle and floor-allocate: `floor(r_train*k)` to train,
/// `floor(r_val*k)` to validation, the remainder to test.
pub fn stratified_split(
    dataset: &LabeledDataset,
    ratios: SplitRatios,
    seed: u64,
) -> Result<SplitBundle> {
    let mut by_class: BTreeMap<usize, Vec<&Instance>> = BTreeMap::new();
    for inst in &dataset.instances {
        by_class.entry(inst.class).or_default().push(inst);
    }
    for (class_idx, class) in dataset.classes.iter().enumerate() {
        let count = by_class.get(&class_idx).map_or(0, Vec::len);
        if count > 0 && count < 3 {
            return Err(Error::Split {
                dataset: dataset.name.clone(),
                class: class.name.clone(),
                count,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bundle = SplitBundle {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        seed,
    };
    for (_, mut members) in by_class {
        members.shuffle(&mut rng);
        let k = members.len();
        let n_train = (ratios.train * k as f64).floor() as usize;
        let n_val = (ratios.validation * k as f64).floor() as usize;
        for (i, inst) in members.into_iter().enumerate() {
            if i < n_train {
                bundle.train.push(inst.clone());
            } else if i < n_train + n_val {
                bundle.validation.push(inst.clone());
            } else {
                bundle.test.push(inst.clone());
            }
        }
    }
    Ok(bundle)
}

/// Bring every class up to the majority-class count by uniform sampling
/// with replacement from its own instances. Originals are all retained.
pub fn oversample(train: &[Instance], seed: u64) -> Vec<Instance> {
    assert!(!train.is_empty(), "cannot oversample an empty train split");
    let mut by_class: BTreeMap<usize, Vec<&Instance>> = BTreeMap::new();
    for inst in train {
        by_class.entry(inst.class).or_default().push(inst);
    }
    let majority = by_class.values().map(Vec::len).max().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Instance> = train.to_vec();
    for (_, members) in by_class {
        for _ in members.len()..majority {
            let pick = members[rng.gen_range(0..members.len())];
            out.push(pick.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn manifest(dir: &Path, body: &str, classes: &[(&str, bool)]) -> DatasetManifest {
        let data_path = dir.join("data.jsonl");
        let mut f = std::fs::File::create(&data_path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        DatasetManifest {
            name: "demo".into(),
            classes: classes
                .iter()
                .map(|&(n, h)| ClassDef {
                    name: n.into(),
                    harmful: h,
                })
                .collect(),
            path: data_path,
            format: FileFormat::Jsonl,
            columns: ColumnMap::default(),
        }
    }

    fn synthetic(name: &str, counts: &[usize]) -> LabeledDataset {
        let classes = (0..counts.len())
            .map(|i| ClassDef {
                name: format!("c{i}"),
                harmful: i > 0,
            })
            .collect();
        let mut instances = Vec::new();
        for (class, &n) in counts.iter().enumerate() {
            for k in 0..n {
                instances.push(Instance {
                    id: format!("{name}#{class}-{k}"),
                    text: format!("token{class} filler{k}"),
                    class,
                    timestamp: None,
                    author: None,
                });
            }
        }
        LabeledDataset {
            name: name.into(),
            classes,
            instances,
            dropped: 0,
        }
    }

    #[test]
    fn jsonl_rows_load_and_normalize() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(
            dir.path(),
            "{\"text\":\"Hello THERE\",\"label\":\"ok\"}\n\
             {\"text\":\"BAD stuff!!\",\"label\":\"bad\"}\n\
             {\"text\":\"fine\",\"label\":\"ok\"}\n",
            &[("ok", false), ("bad", true)],
        );
        let ds = load_dataset(&m).unwrap();
        assert_eq!(ds.instances.len(), 3);
        assert_eq!(ds.instances[0].text, "hello there");
        assert_eq!(ds.instances[1].text, "bad stuff !");
        assert_eq!(ds.dropped, 0);
    }

    #[test]
    fn unknown_label_names_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(
            dir.path(),
            "{\"text\":\"x\",\"label\":\"spamm\"}\n",
            &[("ok", false), ("bad", true)],
        );
        let err = load_dataset(&m).unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
        assert!(err.contains("spamm"), "{err}");
    }

    #[test]
    fn empty_normalization_is_dropped_and_counted() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(
            dir.path(),
            "{\"text\":\"RT\",\"label\":\"ok\"}\n{\"text\":\"keep\",\"label\":\"ok\"}\n",
            &[("ok", false), ("bad", true)],
        );
        let ds = load_dataset(&m).unwrap();
        assert_eq!(ds.instances.len(), 1);
        assert_eq!(ds.dropped, 1);
    }

    #[test]
    fn csv_ingestion_with_mapped_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "body,tag\nHi there,ok\nugh!!,bad\n").unwrap();
        let m = DatasetManifest {
            name: "csvset".into(),
            classes: vec![
                ClassDef { name: "ok".into(), harmful: false },
                ClassDef { name: "bad".into(), harmful: true },
            ],
            path,
            format: FileFormat::Csv,
            columns: ColumnMap {
                text: "body".into(),
                label: "tag".into(),
                timestamp: None,
                author: None,
            },
        };
        let ds = load_dataset(&m).unwrap();
        assert_eq!(ds.instances.len(), 2);
        assert_eq!(ds.instances[1].text, "ugh !");
    }

    #[test]
    fn split_exact_ratio_class() {
        let ds = synthetic("s", &[10, 10]);
        let b = stratified_split(&ds, SplitRatios::default(), 1).unwrap();
        assert_eq!(b.train.len(), 16);
        assert_eq!(b.validation.len(), 2);
        assert_eq!(b.test.len(), 2);
    }

    #[test]
    fn split_remainder_goes_to_test() {
        let ds = synthetic("s", &[25]);
        // single-class dataset is not a valid manifest, but the splitter
        // only needs the instances
        let b = stratified_split(&ds, SplitRatios::default(), 1).unwrap();
        assert_eq!(b.train.len(), 20);
        assert_eq!(b.validation.len(), 2);
        assert_eq!(b.test.len(), 3);
    }

    #[test]
    fn split_is_seed_deterministic_and_partitions() {
        let ds = synthetic("s", &[13, 9, 21]);
        let a = stratified_split(&ds, SplitRatios::default(), 9).unwrap();
        let b = stratified_split(&ds, SplitRatios::default(), 9).unwrap();
        assert_eq!(a, b);
        let mut ids: Vec<&str> = a
            .train
            .iter()
            .chain(&a.validation)
            .chain(&a.test)
            .map(|i| i.id.as_str())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), ds.instances.len());
    }

    #[test]
    fn split_rejects_tiny_class() {
        let ds = synthetic("s", &[10, 2]);
        match stratified_split(&ds, SplitRatios::default(), 1) {
            Err(Error::Split { class, count, .. }) => {
                assert_eq!(class, "c1");
                assert_eq!(count, 2);
            }
            other => panic!("expected split error, got {other:?}"),
        }
    }

    #[test]
    fn oversample_balances_to_majority() {
        let ds = synthetic("s", &[10, 3]);
        let out = oversample(&ds.instances, 5);
        let mut counts = [0usize; 2];
        for inst in &out {
            counts[inst.class] += 1;
        }
        assert_eq!(counts, [10, 10]);
        // originals retained
        for orig in &ds.instances {
            assert!(out.iter().any(|i| i.id == orig.id));
        }
        // additions come from the minority's own 3 originals
        let minority_ids: std::collections::HashSet<_> = ds.instances
            [10..]
            .iter()
            .map(|i| i.id.clone())
            .collect();
        for inst in out.iter().filter(|i| i.class == 1) {
            assert!(minority_ids.contains(&inst.id));
        }
    }

    #[test]
    fn oversample_balanced_input_unchanged() {
        let ds = synthetic("s", &[4, 4]);
        let out = oversample(&ds.instances, 5);
        assert_eq!(out.len(), 8);
    }

    #[test]
    fn oversample_is_seed_deterministic() {
        let ds = synthetic("s", &[9, 2, 5]);
        assert_eq!(oversample(&ds.instances, 3), oversample(&ds.instances, 3));
    }

    #[test]
    fn binarize_follows_manifest_flags() {
        let ds = synthetic("s", &[2, 2, 2]);
        assert_eq!(ds.binarize(0), HARMLESS);
        assert_eq!(ds.binarize(1), HARMFUL);
        assert_eq!(ds.binarize(2), HARMFUL);
    }

    #[test]
    fn manifest_validation_rules() {
        let ok = DatasetManifest {
            name: "x".into(),
            classes: vec![
                ClassDef { name: "a".into(), harmful: false },
                ClassDef { name: "b".into(), harmful: true },
            ],
            path: "x.jsonl".into(),
            format: FileFormat::Jsonl,
            columns: ColumnMap::default(),
        };
        assert!(ok.validate().is_ok());
        let mut all_harmful = ok.clone();
        all_harmful.classes[0].harmful = true;
        assert!(all_harmful.validate().is_err());
        let mut dup = ok.clone();
        dup.classes[1].name = "a".into();
        assert!(dup.validate().is_err());
    }
}
