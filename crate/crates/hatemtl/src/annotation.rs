//! Crowd-annotation aggregation: two-stage majority voting with the four
//! tie-break strategies, a naive plurality baseline, Krippendorff's alpha,
//! and per-worker diagnostics.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Annotation classes in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Vote {
    Neutral,
    Abuse,
    Hate,
}

pub const VOTE_ORDER: [Vote; 3] = [Vote::Neutral, Vote::Abuse, Vote::Hate];

impl Vote {
    pub fn index(self) -> usize {
        match self {
            Vote::Neutral => 0,
            Vote::Abuse => 1,
            Vote::Hate => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Vote::Neutral => "NEUTRAL",
            Vote::Abuse => "ABUSE",
            Vote::Hate => "HATE",
        }
    }
}

impl FromStr for Vote {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NEUTRAL" => Ok(Vote::Neutral),
            "ABUSE" => Ok(Vote::Abuse),
            "HATE" => Ok(Vote::Hate),
            other => Err(Error::Load(format!("unknown annotation label {other:?}"))),
        }
    }
}

impl std::fmt::Display for Vote {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Tie handling for the two-stage vote. The first letter resolves the
/// stage-1 tie (H: problematic, L: neutral); the second resolves stage 2
/// (H: HATE, L: ABUSE). `Naive` is the flat three-way plurality baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TieBreakStrategy {
    Naive,
    Hh,
    Hl,
    Lh,
    Ll,
}

pub const ALL_STRATEGIES: [TieBreakStrategy; 5] = [
    TieBreakStrategy::Naive,
    TieBreakStrategy::Hh,
    TieBreakStrategy::Hl,
    TieBreakStrategy::Lh,
    TieBreakStrategy::Ll,
];

impl TieBreakStrategy {
    pub fn name(self) -> &'static str {
        match self {
            TieBreakStrategy::Naive => "NAIVE",
            TieBreakStrategy::Hh => "HH",
            TieBreakStrategy::Hl => "HL",
            TieBreakStrategy::Lh => "LH",
            TieBreakStrategy::Ll => "LL",
        }
    }
}

impl FromStr for TieBreakStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NAIVE" => Ok(TieBreakStrategy::Naive),
            "HH" => Ok(TieBreakStrategy::Hh),
            "HL" => Ok(TieBreakStrategy::Hl),
            "LH" => Ok(TieBreakStrategy::Lh),
            "LL" => Ok(TieBreakStrategy::Ll),
            other => Err(Error::Config(format!("unknown tie-break strategy {other:?}"))),
        }
    }
}

impl std::fmt::Display for TieBreakStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One worker's vote on one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub item: String,
    pub worker: String,
    pub label: Vote,
}

/// Read `item,worker,label` rows. Label parsing is case-insensitive.
pub fn read_annotation_csv(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Load(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for row in reader.deserialize::<(String, String, String)>() {
        let (item, worker, label) = row?;
        out.push(AnnotationRecord {
            item,
            worker,
            label: label.parse()?,
        });
    }
    if out.is_empty() {
        return Err(Error::Load(format!("{} holds no annotations", path.display())));
    }
    Ok(out)
}

/// Group records by item, preserving first-seen item order via BTreeMap key
/// ordering on the item id.
pub fn group_by_item(records: &[AnnotationRecord]) -> BTreeMap<String, Vec<Vote>> {
    let mut items: BTreeMap<String, Vec<Vote>> = BTreeMap::new();
    for rec in records {
        items.entry(rec.item.clone()).or_default().push(rec.label);
    }
    items
}

fn counts(votes: &[Vote]) -> [usize; 3] {
    let mut c = [0usize; 3];
    for v in votes {
        c[v.index()] += 1;
    }
    c
}

/// Collapse one item's votes to a single label.
///
/// The two-stage strategies first decide NEUTRAL against ABUSE+HATE, then
/// split the problematic side into ABUSE against HATE; each stage's exact tie
/// follows the strategy letters. `Naive` takes the flat plurality, breaking
/// ties toward the earliest class in NEUTRAL < ABUSE < HATE order.
pub fn aggregate(votes: &[Vote], strategy: TieBreakStrategy) -> Vote {
    assert!(!votes.is_empty(), "cannot aggregate zero votes");
    let [n, a, h] = counts(votes);
    match strategy {
        TieBreakStrategy::Naive => {
            let c = [n, a, h];
            VOTE_ORDER[(0..3).max_by_key(|&i| (c[i], std::cmp::Reverse(i))).unwrap()]
        }
        _ => {
            let stage1_problematic = match (a + h).cmp(&n) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => matches!(
                    strategy,
                    TieBreakStrategy::Hh | TieBreakStrategy::Hl
                ),
            };
            if !stage1_problematic {
                return Vote::Neutral;
            }
            match h.cmp(&a) {
                std::cmp::Ordering::Greater => Vote::Hate,
                std::cmp::Ordering::Less => Vote::Abuse,
                std::cmp::Ordering::Equal => {
                    if matches!(strategy, TieBreakStrategy::Hh | TieBreakStrategy::Lh) {
                        Vote::Hate
                    } else {
                        Vote::Abuse
                    }
                }
            }
        }
    }
}

/// Krippendorff's alpha with the nominal metric over the three classes.
///
/// Items with fewer than two votes carry no pair information and are
/// skipped; if nothing pairable remains the coefficient is undefined. When
/// every vote in the corpus lands on one class, agreement is trivially
/// perfect and the result is 1.
pub fn krippendorff_alpha(items: &BTreeMap<String, Vec<Vote>>) -> Result<f64> {
    let mut o = [[0.0f64; 3]; 3];
    let mut pairable = false;
    for votes in items.values() {
        let m = votes.len();
        if m < 2 {
            continue;
        }
        pairable = true;
        let w = 1.0 / (m - 1) as f64;
        for (i, a) in votes.iter().enumerate() {
            for (j, b) in votes.iter().enumerate() {
                if i != j {
                    o[a.index()][b.index()] += w;
                }
            }
        }
    }
    if !pairable {
        return Err(Error::UndefinedAlpha);
    }
    let n_c: Vec<f64> = (0..3).map(|c| o[c].iter().sum()).collect();
    let n: f64 = n_c.iter().sum();
    let mut disagree = 0.0;
    let mut expected = 0.0;
    for c in 0..3 {
        for k in 0..3 {
            if c != k {
                disagree += o[c][k];
                expected += n_c[c] * n_c[k];
            }
        }
    }
    let d_o = disagree / n;
    let d_e = expected / (n * (n - 1.0));
    if d_e == 0.0 {
        // a single class in use: no disagreement is possible or observed
        return Ok(1.0);
    }
    Ok(1.0 - d_o / d_e)
}

/// Per-worker diagnostics, sorted by agreement ascending so the least
/// reliable workers appear first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkerStats {
    pub worker: String,
    pub votes: usize,
    /// fraction of this worker's votes matching the item's aggregate label
    pub agreement: f64,
    /// corpus alpha with this worker removed, when still defined
    pub alpha_without: Option<f64>,
}

pub fn worker_report(
    records: &[AnnotationRecord],
    strategy: TieBreakStrategy,
) -> Vec<WorkerStats> {
    let items = group_by_item(records);
    let consensus: BTreeMap<&str, Vote> = items
        .iter()
        .map(|(item, votes)| (item.as_str(), aggregate(votes, strategy)))
        .collect();
    let mut workers: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for rec in records {
        let (total, matching) = workers.entry(rec.worker.as_str()).or_default();
        *total += 1;
        if consensus[rec.item.as_str()] == rec.label {
            *matching += 1;
        }
    }
    let mut out: Vec<WorkerStats> = workers
        .into_iter()
        .map(|(worker, (total, matching))| {
            let remaining: Vec<AnnotationRecord> = records
                .iter()
                .filter(|r| r.worker != worker)
                .cloned()
                .collect();
            let alpha_without = krippendorff_alpha(&group_by_item(&remaining)).ok();
            WorkerStats {
                worker: worker.to_string(),
                votes: total,
                agreement: matching as f64 / total as f64,
                alpha_without,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.agreement
            .partial_cmp(&b.agreement)
            .unwrap()
            .then_with(|| a.worker.cmp(&b.worker))
    });
    out
}

/// Final-label distribution per strategy plus the pairwise count of items
/// on which two strategies disagree.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyComparison {
    pub items: usize,
    /// (strategy, [NEUTRAL, ABUSE, HATE] counts)
    pub counts: Vec<(TieBreakStrategy, [usize; 3])>,
    /// disagreements[i][j] over `ALL_STRATEGIES` order
    pub disagreements: Vec<Vec<usize>>,
}

pub fn compare_strategies(items: &BTreeMap<String, Vec<Vote>>) -> StrategyComparison {
    let labels: Vec<Vec<Vote>> = items
        .values()
        .map(|votes| {
            ALL_STRATEGIES
                .iter()
                .map(|&s| aggregate(votes, s))
                .collect()
        })
        .collect();
    let counts = ALL_STRATEGIES
        .iter()
        .enumerate()
        .map(|(si, &s)| {
            let mut c = [0usize; 3];
            for row in &labels {
                c[row[si].index()] += 1;
            }
            (s, c)
        })
        .collect();
    let k = ALL_STRATEGIES.len();
    let mut disagreements = vec![vec![0usize; k]; k];
    for row in &labels {
        for i in 0..k {
            for j in 0..k {
                if row[i] != row[j] {
                    disagreements[i][j] += 1;
                }
            }
        }
    }
    StrategyComparison {
        items: items.len(),
        counts,
        disagreements,
    }
}

/// Which vote split a consensus level describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsensusKind {
    /// stage-1 view: NEUTRAL against ABUSE+HATE
    Binary,
    /// flat plurality over the three classes
    ThreeClass,
}

/// Histogram of consensus strength: for each item, the number of votes on
/// the winning side, keyed by that count.
pub fn consensus_histogram(
    items: &BTreeMap<String, Vec<Vote>>,
    kind: ConsensusKind,
) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for votes in items.values() {
        let [n, a, h] = counts(votes);
        let winning = match kind {
            ConsensusKind::Binary => n.max(a + h),
            ConsensusKind::ThreeClass => n.max(a).max(h),
        };
        *hist.entry(winning).or_insert(0) += 1;
    }
    hist
}
