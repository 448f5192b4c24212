//! Shared encoder, pooler, and per-dataset classifier heads.
//!
//! The encoder is either a mean-pool bag of embeddings or a small
//! transformer; both feed a tanh pooler over the first-token state (or the
//! masked token mean) and per-dataset 3-layer softmax heads. Heads share no
//! weights with each other.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ParamTensor, Tape, Var};
use crate::tokenizer::TokenSequence;

const MAGIC: &[u8; 4] = b"HMTL";
const FORMAT_VERSION: u32 = 1;
const EMBED_STD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderVariant {
    MeanPool,
    MiniTransformer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub variant: EncoderVariant,
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub ff_dim: usize,
    pub max_len: usize,
    pub vocab_size: usize,
}

impl EncoderConfig {
    /// Desk-scale transformer defaults; vocab size is filled in once the
    /// vocabulary is built.
    pub fn mini_transformer() -> Self {
        EncoderConfig {
            variant: EncoderVariant::MiniTransformer,
            d_model: 64,
            n_layers: 2,
            n_heads: 2,
            ff_dim: 128,
            max_len: 64,
            vocab_size: 0,
        }
    }

    pub fn mean_pool() -> Self {
        EncoderConfig {
            variant: EncoderVariant::MeanPool,
            d_model: 32,
            n_layers: 0,
            n_heads: 0,
            ff_dim: 0,
            max_len: 32,
            vocab_size: 0,
        }
    }

    fn validate(&self) {
        assert!(self.d_model > 0 && self.max_len > 0 && self.vocab_size > 0);
        if self.variant == EncoderVariant::MiniTransformer {
            assert!(self.n_heads > 0 && self.n_layers > 0 && self.ff_dim > 0);
            assert_eq!(
                self.d_model % self.n_heads,
                0,
                "d_model {} not divisible by n_heads {}",
                self.d_model,
                self.n_heads
            );
        }
    }
}

/// Per-head metadata: output width plus the owning dataset's class-to-harmful
/// mapping, kept here so a serialized model can binarize its own votes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadInfo {
    pub class_count: usize,
    pub harmful: Vec<bool>,
}

/// The joint model: ordered named parameters plus head metadata. Parameter
/// names are prefixed `embed.`, `layer{i}.`, `pooler.`, or `head.{name}.`;
/// everything outside `head.` is the shared trunk frozen by the NCH scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MtlModel {
    pub config: EncoderConfig,
    pub head_hidden: usize,
    pub heads: BTreeMap<String, HeadInfo>,
    params: Vec<(String, ParamTensor)>,
}

fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize, fan_in: usize, fan_out: usize) -> ParamTensor {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.gen_range(-a..a)).collect();
    ParamTensor::new(rows, cols, data)
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, std: f64) -> ParamTensor {
    let dist = Normal::new(0.0, std).expect("valid normal");
    let data = (0..rows * cols).map(|_| dist.sample(rng)).collect();
    ParamTensor::new(rows, cols, data)
}

/// Build one 3-layer head's parameters under `prefix`.
pub fn init_head_params(
    rng: &mut ChaCha8Rng,
    prefix: &str,
    d_model: usize,
    hidden: usize,
    classes: usize,
) -> Vec<(String, ParamTensor)> {
    assert!(classes >= 2, "head needs at least two classes");
    let dims = [(d_model, hidden), (hidden, hidden), (hidden, classes)];
    let mut out = Vec::new();
    for (i, &(fi, fo)) in dims.iter().enumerate() {
        out.push((format!("{prefix}.w{}", i + 1), xavier(rng, fi, fo, fi, fo)));
        out.push((format!("{prefix}.b{}", i + 1), xavier(rng, 1, fo, fi, fo)));
    }
    out
}

impl MtlModel {
    /// Deterministic initialization: affine layers uniform Xavier, embedding
    /// tables normal with std 0.02.
    pub fn init(
        config: EncoderConfig,
        head_hidden: usize,
        heads: &BTreeMap<String, HeadInfo>,
        seed: u64,
    ) -> Self {
        config.validate();
        assert!(!heads.is_empty(), "at least one dataset head required");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.d_model;
        let mut params: Vec<(String, ParamTensor)> = Vec::new();

        params.push((
            "embed.tok".into(),
            gaussian(&mut rng, config.vocab_size, d, EMBED_STD),
        ));
        if config.variant == EncoderVariant::MiniTransformer {
            params.push((
                "embed.pos".into(),
                gaussian(&mut rng, config.max_len, d, EMBED_STD),
            ));
            let dk = d / config.n_heads;
            for l in 0..config.n_layers {
                for h in 0..config.n_heads {
                    for name in ["wq", "wk", "wv"] {
                        params.push((
                            format!("layer{l}.head{h}.{name}"),
                            xavier(&mut rng, d, dk, d, dk),
                        ));
                    }
                }
                params.push((format!("layer{l}.attn.wo"), xavier(&mut rng, d, d, d, d)));
                params.push((format!("layer{l}.attn.bo"), xavier(&mut rng, 1, d, d, d)));
                params.push((
                    format!("layer{l}.ff.w1"),
                    xavier(&mut rng, d, config.ff_dim, d, config.ff_dim),
                ));
                params.push((
                    format!("layer{l}.ff.b1"),
                    xavier(&mut rng, 1, config.ff_dim, d, config.ff_dim),
                ));
                params.push((
                    format!("layer{l}.ff.w2"),
                    xavier(&mut rng, config.ff_dim, d, config.ff_dim, d),
                ));
                params.push((
                    format!("layer{l}.ff.b2"),
                    xavier(&mut rng, 1, d, config.ff_dim, d),
                ));
            }
        }
        params.push(("pooler.w".into(), xavier(&mut rng, d, d, d, d)));
        params.push(("pooler.b".into(), xavier(&mut rng, 1, d, d, d)));

        for (name, info) in heads {
            assert_eq!(
                info.class_count,
                info.harmful.len(),
                "head {name}: harmful flags must cover every class"
            );
            params.extend(init_head_params(
                &mut rng,
                &format!("head.{name}"),
                d,
                head_hidden,
                info.class_count,
            ));
        }

        MtlModel {
            config,
            head_hidden,
            heads: heads.clone(),
            params,
        }
    }

    pub fn param(&self, name: &str) -> &ParamTensor {
        &self
            .params
            .iter()
            .find(|(n, _)| n == name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
            .1
    }

    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(|(n, _)| n.as_str())
    }

    pub fn params(&self) -> &[(String, ParamTensor)] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [(String, ParamTensor)] {
        &mut self.params
    }

    pub fn is_trunk_param(name: &str) -> bool {
        !name.starts_with("head.")
    }

    /// Add (or replace) a head trained elsewhere, e.g. the NCH binary head.
    pub fn insert_head(&mut self, name: &str, info: HeadInfo, params: Vec<(String, ParamTensor)>) {
        let prefix = format!("head.{name}.");
        self.params.retain(|(n, _)| !n.starts_with(&prefix));
        for (n, _) in &params {
            assert!(n.starts_with(&prefix), "head parameter {n} outside {prefix}");
        }
        self.params.extend(params);
        self.heads.insert(name.to_string(), info);
    }

    pub fn zero_grads(&mut self) {
        for (_, p) in &mut self.params {
            p.zero_grad();
        }
    }

    /// Copy all parameters onto a tape; returns the name-to-var binding used
    /// by the forward functions and by gradient read-back.
    pub fn bind(&self, tape: &mut Tape) -> Binding {
        let vars = self
            .params
            .iter()
            .map(|(n, p)| (n.clone(), tape.param(p)))
            .collect();
        Binding { vars }
    }

    /// Accumulate tape gradients back into the parameter store. With
    /// `trunk_frozen` only `head.` parameters receive gradients.
    pub fn accumulate_grads(&mut self, tape: &Tape, binding: &Binding, trunk_frozen: bool) {
        for (name, p) in &mut self.params {
            if trunk_frozen && Self::is_trunk_param(name) {
                continue;
            }
            let var = binding.var(name);
            for (g, t) in p.grad.iter_mut().zip(tape.grad(var)) {
                *g += t;
            }
        }
    }

    /// Run the encoder and pooler over one sequence, returning the `[1,d]`
    /// pooled sentence embedding on the tape.
    pub fn encode_pool(&self, tape: &mut Tape, binding: &Binding, seq: &TokenSequence) -> Var {
        let cfg = &self.config;
        assert!(seq.true_length >= 1 && seq.true_length <= cfg.max_len);
        for &id in &seq.ids {
            assert!(
                id < cfg.vocab_size,
                "token id {id} out of range for vocab size {}",
                cfg.vocab_size
            );
        }
        // PAD positions are dropped before the encoder runs, which makes
        // pad-extension invariance structural.
        let active = &seq.ids[..seq.true_length];
        let tok = tape.embed(binding.var("embed.tok"), active);
        let first = match cfg.variant {
            EncoderVariant::MeanPool => tape.mean_rows(tok),
            EncoderVariant::MiniTransformer => {
                let positions: Vec<usize> = (0..active.len()).collect();
                let pos = tape.embed(binding.var("embed.pos"), &positions);
                let mut x = tape.add(tok, pos);
                for l in 0..cfg.n_layers {
                    let mut heads = Vec::with_capacity(cfg.n_heads);
                    for h in 0..cfg.n_heads {
                        let q = tape.matmul(x, binding.var(&format!("layer{l}.head{h}.wq")));
                        let k = tape.matmul(x, binding.var(&format!("layer{l}.head{h}.wk")));
                        let v = tape.matmul(x, binding.var(&format!("layer{l}.head{h}.wv")));
                        heads.push(tape.attention(q, k, v, None));
                    }
                    let cat = tape.concat_cols(&heads);
                    let proj = tape.matmul(cat, binding.var(&format!("layer{l}.attn.wo")));
                    let proj = tape.add_row(proj, binding.var(&format!("layer{l}.attn.bo")));
                    let res = tape.add(x, proj);
                    x = tape.layer_norm(res);
                    let h1 = tape.matmul(x, binding.var(&format!("layer{l}.ff.w1")));
                    let h1 = tape.add_row(h1, binding.var(&format!("layer{l}.ff.b1")));
                    let h1 = tape.relu(h1);
                    let h2 = tape.matmul(h1, binding.var(&format!("layer{l}.ff.w2")));
                    let h2 = tape.add_row(h2, binding.var(&format!("layer{l}.ff.b2")));
                    let res = tape.add(x, h2);
                    x = tape.layer_norm(res);
                }
                tape.slice_rows(x, 0, 1)
            }
        };
        let affine = tape.matmul(first, binding.var("pooler.w"));
        let affine = tape.add_row(affine, binding.var("pooler.b"));
        tape.tanh(affine)
    }

    /// Probability vector of the named head over a pooled embedding.
    pub fn head_forward(&self, tape: &mut Tape, binding: &Binding, head: &str, emb: Var) -> Var {
        assert!(self.heads.contains_key(head), "unknown head {head}");
        forward_head_vars(
            tape,
            &[
                binding.var(&format!("head.{head}.w1")),
                binding.var(&format!("head.{head}.b1")),
                binding.var(&format!("head.{head}.w2")),
                binding.var(&format!("head.{head}.b2")),
                binding.var(&format!("head.{head}.w3")),
                binding.var(&format!("head.{head}.b3")),
            ],
            emb,
        )
    }

    /// Convenience inference path: pooled embedding as plain floats.
    pub fn embed_sequence(&self, seq: &TokenSequence) -> Vec<f64> {
        let mut tape = Tape::new();
        let binding = self.bind(&mut tape);
        let emb = self.encode_pool(&mut tape, &binding, seq);
        tape.value(emb).to_vec()
    }

    /// Class probabilities of one head for a pooled embedding.
    pub fn head_probs(&self, head: &str, embedding: &[f64]) -> Vec<f64> {
        let mut tape = Tape::new();
        let binding = self.bind(&mut tape);
        let emb = tape.leaf(1, embedding.len(), embedding.to_vec());
        let probs = self.head_forward(&mut tape, &binding, head, emb);
        tape.value(probs).to_vec()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path.display().to_string(), e);
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.push(match self.config.variant {
            EncoderVariant::MeanPool => 0,
            EncoderVariant::MiniTransformer => 1,
        });
        for v in [
            self.config.d_model,
            self.config.n_layers,
            self.config.n_heads,
            self.config.ff_dim,
            self.config.max_len,
            self.config.vocab_size,
            self.head_hidden,
        ] {
            buf.extend_from_slice(&(v as u64).to_le_bytes());
        }
        buf.extend_from_slice(&(self.heads.len() as u64).to_le_bytes());
        for (name, info) in &self.heads {
            write_str(&mut buf, name);
            buf.extend_from_slice(&(info.class_count as u64).to_le_bytes());
            buf.extend(info.harmful.iter().map(|&h| h as u8));
        }
        buf.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for (name, p) in &self.params {
            write_str(&mut buf, name);
            buf.extend_from_slice(&(p.rows as u64).to_le_bytes());
            buf.extend_from_slice(&(p.cols as u64).to_le_bytes());
            for x in &p.data {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        let mut f = std::fs::File::create(path).map_err(io)?;
        f.write_all(&buf).map_err(io)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let io = |e| Error::io(path.display().to_string(), e);
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .map_err(io)?
            .read_to_end(&mut bytes)
            .map_err(io)?;
        let mut cur = Cursor { bytes: &bytes, pos: 0 };
        let magic = cur.take(4)?;
        if magic != MAGIC {
            return Err(Error::Load(format!(
                "{} is not a model file (bad magic)",
                path.display()
            )));
        }
        let version = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let variant = match cur.take(1)?[0] {
            0 => EncoderVariant::MeanPool,
            1 => EncoderVariant::MiniTransformer,
            other => return Err(Error::Load(format!("unknown encoder variant tag {other}"))),
        };
        let mut dims = [0usize; 7];
        for d in &mut dims {
            *d = cur.u64()? as usize;
        }
        let config = EncoderConfig {
            variant,
            d_model: dims[0],
            n_layers: dims[1],
            n_heads: dims[2],
            ff_dim: dims[3],
            max_len: dims[4],
            vocab_size: dims[5],
        };
        let head_hidden = dims[6];
        let n_heads = cur.u64()? as usize;
        let mut heads = BTreeMap::new();
        for _ in 0..n_heads {
            let name = cur.string()?;
            let class_count = cur.u64()? as usize;
            let flags = cur.take(class_count)?;
            heads.insert(
                name,
                HeadInfo {
                    class_count,
                    harmful: flags.iter().map(|&b| b != 0).collect(),
                },
            );
        }
        let n_params = cur.u64()? as usize;
        let mut params = Vec::with_capacity(n_params);
        for _ in 0..n_params {
            let name = cur.string()?;
            let rows = cur.u64()? as usize;
            let cols = cur.u64()? as usize;
            let raw = cur.take(rows * cols * 8)?;
            let data: Vec<f64> = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            params.push((name, ParamTensor::new(rows, cols, data)));
        }
        if cur.pos != bytes.len() {
            return Err(Error::Load(format!(
                "{} carries {} trailing bytes",
                path.display(),
                bytes.len() - cur.pos
            )));
        }
        let model = MtlModel {
            config,
            head_hidden,
            heads,
            params,
        };
        model.check_shapes()?;
        Ok(model)
    }

    fn check_shapes(&self) -> Result<()> {
        let d = self.config.d_model;
        let tok = self.param_checked("embed.tok")?;
        if tok.rows != self.config.vocab_size || tok.cols != d {
            return Err(Error::ModelShape(format!(
                "embed.tok is [{},{}], expected [{},{}]",
                tok.rows, tok.cols, self.config.vocab_size, d
            )));
        }
        for (name, info) in &self.heads {
            let w3 = self.param_checked(&format!("head.{name}.w3"))?;
            if w3.cols != info.class_count {
                return Err(Error::ModelShape(format!(
                    "head {name} output width {} != class count {}",
                    w3.cols, info.class_count
                )));
            }
        }
        Ok(())
    }

    fn param_checked(&self, name: &str) -> Result<&ParamTensor> {
        self.params
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| p)
            .ok_or_else(|| Error::ModelShape(format!("missing parameter {name}")))
    }
}

/// Name-to-tape-var map produced by [`MtlModel::bind`].
pub struct Binding {
    vars: Vec<(String, Var)>,
}

impl Binding {
    pub fn var(&self, name: &str) -> Var {
        self.vars
            .iter()
            .find(|(n, _)| n == name)
            .unwrap_or_else(|| panic!("unbound parameter {name}"))
            .1
    }
}

/// Head forward over explicit weight vars: relu, relu, softmax.
pub fn forward_head_vars(tape: &mut Tape, wb: &[Var; 6], emb: Var) -> Var {
    let h1 = tape.matmul(emb, wb[0]);
    let h1 = tape.add_row(h1, wb[1]);
    let h1 = tape.relu(h1);
    let h2 = tape.matmul(h1, wb[2]);
    let h2 = tape.add_row(h2, wb[3]);
    let h2 = tape.relu(h2);
    let logits = tape.matmul(h2, wb[4]);
    let logits = tape.add_row(logits, wb[5]);
    tape.softmax_rows(logits)
}

fn write_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u64).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::TruncatedModel);
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u64()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Load("non-utf8 name".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::{CLS, PAD};

    fn heads2() -> BTreeMap<String, HeadInfo> {
        let mut h = BTreeMap::new();
        h.insert(
            "alpha".into(),
            HeadInfo {
                class_count: 3,
                harmful: vec![false, true, true],
            },
        );
        h.insert(
            "beta".into(),
            HeadInfo {
                class_count: 2,
                harmful: vec![false, true],
            },
        );
        h
    }

    fn tiny_config() -> EncoderConfig {
        EncoderConfig {
            variant: EncoderVariant::MiniTransformer,
            d_model: 8,
            n_layers: 2,
            n_heads: 2,
            ff_dim: 16,
            max_len: 8,
            vocab_size: 20,
        }
    }

    #[test]
    fn init_is_seed_deterministic() {
        let a = MtlModel::init(tiny_config(), 8, &heads2(), 7);
        let b = MtlModel::init(tiny_config(), 8, &heads2(), 7);
        assert_eq!(a, b);
        let c = MtlModel::init(tiny_config(), 8, &heads2(), 8);
        assert_ne!(a, c);
    }

    #[test]
    fn head_output_widths_follow_class_counts() {
        let m = MtlModel::init(tiny_config(), 8, &heads2(), 1);
        assert_eq!(m.param("head.alpha.w3").cols, 3);
        assert_eq!(m.param("head.beta.w3").cols, 2);
    }

    #[test]
    fn zero_pooler_gives_zero_embedding() {
        let mut m = MtlModel::init(
            EncoderConfig {
                vocab_size: 10,
                ..EncoderConfig::mean_pool()
            },
            8,
            &heads2(),
            3,
        );
        for (name, p) in m.params_mut() {
            if name.starts_with("pooler.") {
                p.data.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        let seq = TokenSequence {
            ids: vec![CLS, 4, 5, PAD],
            true_length: 3,
        };
        let emb = m.embed_sequence(&seq);
        assert!(emb.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn all_pad_after_cls_is_finite() {
        let m = MtlModel::init(tiny_config(), 8, &heads2(), 3);
        let seq = TokenSequence {
            ids: vec![CLS, PAD, PAD, PAD, PAD, PAD, PAD, PAD],
            true_length: 1,
        };
        let emb = m.embed_sequence(&seq);
        assert!(emb.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn pad_extension_invariance() {
        let m = MtlModel::init(tiny_config(), 8, &heads2(), 11);
        let short = TokenSequence {
            ids: vec![CLS, 4, 9, 3, PAD],
            true_length: 4,
        };
        let long = TokenSequence {
            ids: vec![CLS, 4, 9, 3, PAD, PAD, PAD, PAD],
            true_length: 4,
        };
        let emb1 = m.embed_sequence(&short);
        let emb2 = m.embed_sequence(&long);
        for (a, b) in emb1.iter().zip(&emb2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pooled_embedding_in_open_unit_interval() {
        let m = MtlModel::init(tiny_config(), 8, &heads2(), 5);
        let seq = TokenSequence {
            ids: vec![CLS, 1, 2, 3, 4, 5, PAD, PAD],
            true_length: 6,
        };
        for x in m.embed_sequence(&seq) {
            assert!(x > -1.0 && x < 1.0);
        }
    }

    #[test]
    fn zero_head_gives_uniform_probabilities() {
        let mut m = MtlModel::init(tiny_config(), 8, &heads2(), 5);
        for (name, p) in m.params_mut() {
            if name.starts_with("head.alpha.") {
                p.data.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        let probs = m.head_probs("alpha", &[0.1; 8]);
        for p in probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn heads_are_independent() {
        let mut m = MtlModel::init(tiny_config(), 8, &heads2(), 5);
        let emb = vec![0.3; 8];
        let before = m.head_probs("beta", &emb);
        for (name, p) in m.params_mut() {
            if name.starts_with("head.alpha.") {
                p.data.iter_mut().for_each(|x| *x += 1.5);
            }
        }
        let after = m.head_probs("beta", &emb);
        assert_eq!(before, after);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let m = MtlModel::init(tiny_config(), 8, &heads2(), 5);
        let sum: f64 = m.head_probs("alpha", &[0.7; 8]).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_sized_head_matches_pencil_forward() {
        // d=2, h=2, C=2 with fixed weights
        let mut tape = Tape::new();
        let w1 = tape.leaf(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let b1 = tape.leaf(1, 2, vec![0.5, -2.0]);
        let w2 = tape.leaf(2, 2, vec![1.0, 1.0, 0.0, 0.0]);
        let b2 = tape.leaf(1, 2, vec![0.0, 0.0]);
        let w3 = tape.leaf(2, 2, vec![1.0, -1.0, 2.0, 0.0]);
        let b3 = tape.leaf(1, 2, vec![0.0, 1.0]);
        let emb = tape.leaf(1, 2, vec![1.0, 1.0]);
        let probs = forward_head_vars(&mut tape, &[w1, b1, w2, b2, w3, b3], emb);
        // h1 = relu([1,1] + [0.5,-2]) = [1.5, 0]
        // h2 = relu([1.5, 1.5]) = [1.5, 1.5]
        // logits = [1.5*1 + 1.5*2, 1.5*-1 + 0] + [0,1] = [4.5, -0.5]
        let z = [4.5f64, -0.5];
        let m = z[0].max(z[1]);
        let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
        let s: f64 = e.iter().sum();
        let got = tape.value(probs);
        assert!((got[0] - e[0] / s).abs() < 1e-14);
        assert!((got[1] - e[1] / s).abs() < 1e-14);
    }

    #[test]
    fn save_load_round_trip_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("m1.bin");
        let p2 = dir.path().join("m2.bin");
        let m = MtlModel::init(tiny_config(), 8, &heads2(), 42);
        m.save(&p1).unwrap();
        let loaded = MtlModel::load(&p1).unwrap();
        assert_eq!(loaded, m);
        loaded.save(&p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let m = MtlModel::init(tiny_config(), 8, &heads2(), 42);
        m.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        match MtlModel::load(&path) {
            Err(Error::TruncatedModel) => {}
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let m = MtlModel::init(tiny_config(), 8, &heads2(), 42);
        m.save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 99;
        std::fs::write(&path, &bytes).unwrap();
        match MtlModel::load(&path) {
            Err(Error::UnsupportedVersion(99)) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }
}
