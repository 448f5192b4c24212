//! The recording tape: forward primitives and their backward rules.

pub const CE_CLIP: f64 = 1e-12;
const LN_EPS: f64 = 1e-5;

/// A named parameter living outside any tape: value plus gradient
/// accumulator of identical shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    pub grad: Vec<f64>,
}

impl ParamTensor {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "param data length mismatch");
        let grad = vec![0.0; data.len()];
        ParamTensor {
            rows,
            cols,
            data,
            grad,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }
}

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Leaf,
    Add(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    MulRow(Var, Var),
    MatMul(Var, Var),
    /// `A * B^T` with A `[m,k]`, B `[n,k]`.
    MatMulNT(Var, Var),
    Tanh(Var),
    Relu(Var),
    LayerNorm(Var),
    Embed {
        table: Var,
        ids: Vec<usize>,
    },
    SoftmaxRows(Var),
    CrossEntropy {
        probs: Var,
        gold: usize,
    },
    SliceRows(Var, usize, usize),
    ConcatCols(Vec<Var>),
    MeanRows(Var),
    Scale(Var, f64),
    SumVars(Vec<Var>),
}

struct Node {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    grad: Vec<f64>,
    op: Op,
}

/// Topologically ordered record of applied primitives. One tape belongs to
/// one execution context; independent tapes may run in parallel.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    fn push(&mut self, rows: usize, cols: usize, data: Vec<f64>, op: Op) -> Var {
        debug_assert_eq!(rows * cols, data.len());
        let grad = vec![0.0; data.len()];
        self.nodes.push(Node {
            rows,
            cols,
            data,
            grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Discard every node recorded after a watermark taken with [`Tape::len`].
    /// Lets long inference loops reuse one binding without unbounded growth.
    pub fn truncate(&mut self, len: usize) {
        self.nodes.truncate(len);
    }

    pub fn leaf(&mut self, rows: usize, cols: usize, data: Vec<f64>) -> Var {
        assert_eq!(
            rows * cols,
            data.len(),
            "leaf shape [{rows},{cols}] does not match data length {}",
            data.len()
        );
        self.push(rows, cols, data, Op::Leaf)
    }

    pub fn param(&mut self, p: &ParamTensor) -> Var {
        self.push(p.rows, p.cols, p.data.clone(), Op::Leaf)
    }

    pub fn scalar(&mut self, v: f64) -> Var {
        self.leaf(1, 1, vec![v])
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let n = &self.nodes[v.0];
        (n.rows, n.cols)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].data
    }

    pub fn grad(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].grad
    }

    pub fn scalar_value(&self, v: Var) -> f64 {
        assert_eq!(self.shape(v), (1, 1), "not a scalar node");
        self.nodes[v.0].data[0]
    }

    fn assert_same_shape(&self, a: Var, b: Var, op: &str) {
        let (ar, ac) = self.shape(a);
        let (br, bc) = self.shape(b);
        assert!(
            ar == br && ac == bc,
            "{op}: shape mismatch [{ar},{ac}] vs [{br},{bc}]"
        );
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.assert_same_shape(a, b, "add");
        let (r, c) = self.shape(a);
        let data = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(x, y)| x + y)
            .collect();
        self.push(r, c, data, Op::Add(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.assert_same_shape(a, b, "mul");
        let (r, c) = self.shape(a);
        let data = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(x, y)| x * y)
            .collect();
        self.push(r, c, data, Op::Mul(a, b))
    }

    /// Broadcast add of a `[1,c]` vector onto every row of a `[r,c]` matrix.
    pub fn add_row(&mut self, m: Var, v: Var) -> Var {
        let (r, c) = self.shape(m);
        let (vr, vc) = self.shape(v);
        assert!(
            vr == 1 && vc == c,
            "add_row: shape mismatch [{r},{c}] vs [{vr},{vc}]"
        );
        let mut data = self.value(m).to_vec();
        let vec = self.value(v);
        for i in 0..r {
            for j in 0..c {
                data[i * c + j] += vec[j];
            }
        }
        self.push(r, c, data, Op::AddRow(m, v))
    }

    /// Broadcast elementwise multiply of a `[1,c]` vector across rows.
    pub fn mul_row(&mut self, m: Var, v: Var) -> Var {
        let (r, c) = self.shape(m);
        let (vr, vc) = self.shape(v);
        assert!(
            vr == 1 && vc == c,
            "mul_row: shape mismatch [{r},{c}] vs [{vr},{vc}]"
        );
        let mut data = self.value(m).to_vec();
        let vec = self.value(v);
        for i in 0..r {
            for j in 0..c {
                data[i * c + j] *= vec[j];
            }
        }
        self.push(r, c, data, Op::MulRow(m, v))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let (m, k) = self.shape(a);
        let (k2, n) = self.shape(b);
        assert_eq!(k, k2, "matmul: shape mismatch [{m},{k}] vs [{k2},{n}]");
        let mut data = vec![0.0; m * n];
        let av = self.value(a);
        let bv = self.value(b);
        for i in 0..m {
            for p in 0..k {
                let x = av[i * k + p];
                if x == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += x * bv[p * n + j];
                }
            }
        }
        self.push(m, n, data, Op::MatMul(a, b))
    }

    /// `A * B^T`: `[m,k] x [n,k] -> [m,n]`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Var {
        let (m, k) = self.shape(a);
        let (n, k2) = self.shape(b);
        assert_eq!(k, k2, "matmul_nt: shape mismatch [{m},{k}] vs [{n},{k2}]");
        let mut data = vec![0.0; m * n];
        let av = self.value(a);
        let bv = self.value(b);
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for p in 0..k {
                    s += av[i * k + p] * bv[j * k + p];
                }
                data[i * n + j] = s;
            }
        }
        self.push(m, n, data, Op::MatMulNT(a, b))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        let data = self.value(a).iter().map(|x| x.tanh()).collect();
        self.push(r, c, data, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        let data = self.value(a).iter().map(|x| x.max(0.0)).collect();
        self.push(r, c, data, Op::Relu(a))
    }

    /// Row-wise layer normalization without affine parameters.
    pub fn layer_norm(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        assert!(c > 0, "layer_norm on empty rows");
        let av = self.value(a);
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            let row = &av[i * c..(i + 1) * c];
            let mean = row.iter().sum::<f64>() / c as f64;
            let var = row.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / c as f64;
            let inv = 1.0 / (var + LN_EPS).sqrt();
            for j in 0..c {
                data[i * c + j] = (row[j] - mean) * inv;
            }
        }
        self.push(r, c, data, Op::LayerNorm(a))
    }

    /// Gather rows of `table` by id; output `[ids.len(), cols]`.
    pub fn embed(&mut self, table: Var, ids: &[usize]) -> Var {
        let (rows, cols) = self.shape(table);
        let tv = self.value(table);
        let mut data = Vec::with_capacity(ids.len() * cols);
        for &id in ids {
            assert!(id < rows, "embed: id {id} out of range for table [{rows},{cols}]");
            data.extend_from_slice(&tv[id * cols..(id + 1) * cols]);
        }
        self.push(
            ids.len(),
            cols,
            data,
            Op::Embed {
                table,
                ids: ids.to_vec(),
            },
        )
    }

    /// Numerically stable row-wise softmax.
    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        let av = self.value(a);
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            let row = &av[i * c..(i + 1) * c];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for j in 0..c {
                let e = (row[j] - max).exp();
                data[i * c + j] = e;
                sum += e;
            }
            for j in 0..c {
                data[i * c + j] /= sum;
            }
        }
        self.push(r, c, data, Op::SoftmaxRows(a))
    }

    /// `-ln(max(p_gold, 1e-12))` over a `[1,C]` probability row.
    pub fn cross_entropy(&mut self, probs: Var, gold: usize) -> Var {
        let (r, c) = self.shape(probs);
        assert_eq!(r, 1, "cross_entropy expects a single probability row");
        assert!(gold < c, "cross_entropy: gold class {gold} out of range {c}");
        let p = self.value(probs)[gold];
        let loss = -(p.max(CE_CLIP)).ln();
        self.push(1, 1, vec![loss], Op::CrossEntropy { probs, gold })
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Var {
        let (r, c) = self.shape(a);
        assert!(start < end && end <= r, "slice_rows: [{start},{end}) out of [{r},{c}]");
        let data = self.value(a)[start * c..end * c].to_vec();
        self.push(end - start, c, data, Op::SliceRows(a, start, end))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "concat_cols of nothing");
        let (r, _) = self.shape(parts[0]);
        let total: usize = parts
            .iter()
            .map(|&p| {
                let (pr, pc) = self.shape(p);
                assert_eq!(pr, r, "concat_cols: row mismatch {pr} vs {r}");
                pc
            })
            .sum();
        let mut data = vec![0.0; r * total];
        let mut offset = 0;
        for &p in parts {
            let (_, pc) = self.shape(p);
            let pv = self.value(p).to_vec();
            for i in 0..r {
                data[i * total + offset..i * total + offset + pc]
                    .copy_from_slice(&pv[i * pc..(i + 1) * pc]);
            }
            offset += pc;
        }
        self.push(r, total, data, Op::ConcatCols(parts.to_vec()))
    }

    /// Mean over the row axis: `[r,c] -> [1,c]`.
    pub fn mean_rows(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        assert!(r > 0, "mean_rows of empty tensor");
        let av = self.value(a);
        let mut data = vec![0.0; c];
        for i in 0..r {
            for j in 0..c {
                data[j] += av[i * c + j];
            }
        }
        data.iter_mut().for_each(|x| *x /= r as f64);
        self.push(1, c, data, Op::MeanRows(a))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let (r, c) = self.shape(a);
        let data = self.value(a).iter().map(|x| x * factor).collect();
        self.push(r, c, data, Op::Scale(a, factor))
    }

    /// Elementwise sum of same-shaped tensors, in the given order.
    pub fn sum_vars(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "sum_vars of nothing");
        let (r, c) = self.shape(parts[0]);
        let mut data = vec![0.0; r * c];
        for &p in parts {
            self.assert_same_shape(parts[0], p, "sum_vars");
            for (d, x) in data.iter_mut().zip(self.value(p)) {
                *d += x;
            }
        }
        self.push(r, c, data, Op::SumVars(parts.to_vec()))
    }

    /// Scaled dot-product attention: `softmax(Q K^T / sqrt(d_k) + mask) V`.
    /// The optional mask is added to the score matrix before the softmax
    /// (use large negative entries to exclude positions).
    pub fn attention(&mut self, q: Var, k: Var, v: Var, mask: Option<Var>) -> Var {
        let (_, dk) = self.shape(q);
        let scores = self.matmul_nt(q, k);
        let scaled = self.scale(scores, 1.0 / (dk as f64).sqrt());
        let masked = match mask {
            Some(m) => self.add(scaled, m),
            None => scaled,
        };
        let weights = self.softmax_rows(masked);
        self.matmul(weights, v)
    }

    /// Accumulate `d loss / d node` into every node's grad buffer. The loss
    /// must be scalar. Repeated calls keep accumulating (gradients are
    /// summed), matching the additivity contract.
    pub fn backward(&mut self, loss: Var) {
        assert_eq!(self.shape(loss), (1, 1), "backward requires a scalar loss");
        self.nodes[loss.0].grad[0] += 1.0;
        for idx in (0..=loss.0).rev() {
            // Split borrow: take the grad out, restore after dispatch.
            let g = std::mem::take(&mut self.nodes[idx].grad);
            self.propagate(idx, &g);
            self.nodes[idx].grad = g;
        }
    }

    fn propagate(&mut self, idx: usize, g: &[f64]) {
        let (rows, cols) = (self.nodes[idx].rows, self.nodes[idx].cols);
        match &self.nodes[idx].op {
            Op::Leaf => {}
            &Op::Add(a, b) => {
                for (i, &gi) in g.iter().enumerate() {
                    self.nodes[a.0].grad[i] += gi;
                }
                for (i, &gi) in g.iter().enumerate() {
                    self.nodes[b.0].grad[i] += gi;
                }
            }
            &Op::Mul(a, b) => {
                for i in 0..g.len() {
                    let av = self.nodes[a.0].data[i];
                    let bv = self.nodes[b.0].data[i];
                    self.nodes[a.0].grad[i] += g[i] * bv;
                    self.nodes[b.0].grad[i] += g[i] * av;
                }
            }
            &Op::AddRow(m, v) => {
                for i in 0..rows {
                    for j in 0..cols {
                        let gi = g[i * cols + j];
                        self.nodes[m.0].grad[i * cols + j] += gi;
                        self.nodes[v.0].grad[j] += gi;
                    }
                }
            }
            &Op::MulRow(m, v) => {
                for i in 0..rows {
                    for j in 0..cols {
                        let gi = g[i * cols + j];
                        let mv = self.nodes[m.0].data[i * cols + j];
                        let vv = self.nodes[v.0].data[j];
                        self.nodes[m.0].grad[i * cols + j] += gi * vv;
                        self.nodes[v.0].grad[j] += gi * mv;
                    }
                }
            }
            &Op::MatMul(a, b) => {
                let (m, k) = (self.nodes[a.0].rows, self.nodes[a.0].cols);
                let n = cols;
                // dA += G B^T ; dB += A^T G
                for i in 0..m {
                    for p in 0..k {
                        let mut s = 0.0;
                        for j in 0..n {
                            s += g[i * n + j] * self.nodes[b.0].data[p * n + j];
                        }
                        self.nodes[a.0].grad[i * k + p] += s;
                    }
                }
                for p in 0..k {
                    for j in 0..n {
                        let mut s = 0.0;
                        for i in 0..m {
                            s += self.nodes[a.0].data[i * k + p] * g[i * n + j];
                        }
                        self.nodes[b.0].grad[p * n + j] += s;
                    }
                }
            }
            &Op::MatMulNT(a, b) => {
                let (m, k) = (self.nodes[a.0].rows, self.nodes[a.0].cols);
                let n = cols;
                // C = A B^T: dA += G B ; dB += G^T A
                for i in 0..m {
                    for p in 0..k {
                        let mut s = 0.0;
                        for j in 0..n {
                            s += g[i * n + j] * self.nodes[b.0].data[j * k + p];
                        }
                        self.nodes[a.0].grad[i * k + p] += s;
                    }
                }
                for j in 0..n {
                    for p in 0..k {
                        let mut s = 0.0;
                        for i in 0..m {
                            s += g[i * n + j] * self.nodes[a.0].data[i * k + p];
                        }
                        self.nodes[b.0].grad[j * k + p] += s;
                    }
                }
            }
            &Op::Tanh(a) => {
                for i in 0..g.len() {
                    let y = self.nodes[idx].data[i];
                    self.nodes[a.0].grad[i] += g[i] * (1.0 - y * y);
                }
            }
            &Op::Relu(a) => {
                for i in 0..g.len() {
                    if self.nodes[a.0].data[i] > 0.0 {
                        self.nodes[a.0].grad[i] += g[i];
                    }
                }
            }
            &Op::LayerNorm(a) => {
                for i in 0..rows {
                    let x = &self.nodes[a.0].data[i * cols..(i + 1) * cols];
                    let mean = x.iter().sum::<f64>() / cols as f64;
                    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / cols as f64;
                    let inv = 1.0 / (var + LN_EPS).sqrt();
                    let y: Vec<f64> = x.iter().map(|v| (v - mean) * inv).collect();
                    let gr = &g[i * cols..(i + 1) * cols];
                    let g_mean = gr.iter().sum::<f64>() / cols as f64;
                    let gy_mean =
                        gr.iter().zip(&y).map(|(gi, yi)| gi * yi).sum::<f64>() / cols as f64;
                    for j in 0..cols {
                        self.nodes[a.0].grad[i * cols + j] +=
                            inv * (gr[j] - g_mean - y[j] * gy_mean);
                    }
                }
            }
            Op::Embed { table, ids } => {
                let table = *table;
                let ids = ids.clone();
                for (row, id) in ids.iter().enumerate() {
                    for j in 0..cols {
                        self.nodes[table.0].grad[id * cols + j] += g[row * cols + j];
                    }
                }
            }
            &Op::SoftmaxRows(a) => {
                for i in 0..rows {
                    let y: Vec<f64> = self.nodes[idx].data[i * cols..(i + 1) * cols].to_vec();
                    let gr = &g[i * cols..(i + 1) * cols];
                    let dot: f64 = y.iter().zip(gr).map(|(yi, gi)| yi * gi).sum();
                    for j in 0..cols {
                        self.nodes[a.0].grad[i * cols + j] += y[j] * (gr[j] - dot);
                    }
                }
            }
            &Op::CrossEntropy { probs, gold } => {
                let p = self.nodes[probs.0].data[gold];
                if p >= CE_CLIP {
                    self.nodes[probs.0].grad[gold] += g[0] * (-1.0 / p);
                }
            }
            &Op::SliceRows(a, start, _end) => {
                for i in 0..rows {
                    for j in 0..cols {
                        self.nodes[a.0].grad[(start + i) * cols + j] += g[i * cols + j];
                    }
                }
            }
            Op::ConcatCols(parts) => {
                let parts = parts.clone();
                let mut offset = 0;
                for p in parts {
                    let pc = self.nodes[p.0].cols;
                    for i in 0..rows {
                        for j in 0..pc {
                            self.nodes[p.0].grad[i * pc + j] += g[i * cols + offset + j];
                        }
                    }
                    offset += pc;
                }
            }
            &Op::MeanRows(a) => {
                let r = self.nodes[a.0].rows;
                let w = 1.0 / r as f64;
                for i in 0..r {
                    for j in 0..cols {
                        self.nodes[a.0].grad[i * cols + j] += g[j] * w;
                    }
                }
            }
            &Op::Scale(a, factor) => {
                for i in 0..g.len() {
                    self.nodes[a.0].grad[i] += g[i] * factor;
                }
            }
            Op::SumVars(parts) => {
                let parts = parts.clone();
                for p in parts {
                    for i in 0..g.len() {
                        self.nodes[p.0].grad[i] += g[i];
                    }
                }
            }
        }
    }
}
