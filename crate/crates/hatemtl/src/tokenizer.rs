//! Corpus-derived vocabulary and fixed-length integer encoding.
//!
//! Whitespace tokens are ranked by (frequency desc, token asc) and assigned
//! dense ids after three reserved slots. Every encoded sequence starts with
//! a synthetic CLS token so first-token pooling is well defined.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const CLS: usize = 2;

const RESERVED: [&str; 3] = ["<pad>", "<unk>", "<cls>"];

/// Immutable token-to-id mapping with dense ids `0..len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
}

/// Fixed-length id sequence; `ids[0]` is CLS and positions at or beyond
/// `true_length` are PAD.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub ids: Vec<usize>,
    pub true_length: usize,
}

impl Vocabulary {
    /// Build from normalized corpus lines. Tokens with frequency below
    /// `min_freq` are dropped; at most `max_size` entries survive including
    /// the reserved ids.
    pub fn build<S: AsRef<str>>(corpus: &[S], max_size: usize, min_freq: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Config("vocabulary corpus is empty".into()));
        }
        if max_size < RESERVED.len() {
            return Err(Error::Config(format!(
                "vocabulary max_size {max_size} cannot hold the {} reserved tokens",
                RESERVED.len()
            )));
        }
        let mut freq: HashMap<&str, usize> = HashMap::new();
        for line in corpus {
            for tok in line.as_ref().split_whitespace() {
                *freq.entry(tok).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> =
            freq.into_iter().filter(|&(_, n)| n >= min_freq).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(max_size - RESERVED.len());

        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        tokens.extend(ranked.into_iter().map(|(t, _)| t.to_string()));
        Ok(Self::from_tokens(tokens))
    }

    fn from_tokens(tokens: Vec<String>) -> Self {
        let ids = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary { tokens, ids }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// Encode normalized text as `[CLS] tok...` truncated to `max_len` and
    /// right-padded with PAD. Out-of-vocabulary tokens map to UNK.
    pub fn encode(&self, text: &str, max_len: usize) -> TokenSequence {
        assert!(max_len >= 1, "max_len must be at least 1 to hold CLS");
        let mut ids = Vec::with_capacity(max_len);
        ids.push(CLS);
        for tok in text.split_whitespace() {
            if ids.len() == max_len {
                break;
            }
            ids.push(self.id(tok).unwrap_or(UNK));
        }
        let true_length = ids.len();
        ids.resize(max_len, PAD);
        TokenSequence { ids, true_length }
    }

    /// One token per line; the line number is the id.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        for tok in &self.tokens {
            writeln!(f, "{tok}").map_err(|e| Error::io(path.display().to_string(), e))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let tokens: Vec<String> = body.lines().map(str::to_string).collect();
        if tokens.len() < RESERVED.len() {
            return Err(Error::Load(format!(
                "vocabulary file {} holds fewer than the {} reserved tokens",
                path.display(),
                RESERVED.len()
            )));
        }
        Ok(Self::from_tokens(tokens))
    }
}
