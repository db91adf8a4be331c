//! Per-forward-pass operation tape.
//!
//! Every forward op appends one node holding its output value; `backward`
//! walks the nodes in reverse, applying each op's local derivative, and
//! accumulates parameter gradients into the owning [`ParamStore`].

use super::{ParamId, ParamStore, Tensor};
use crate::error::{Error, Result};

/// Index of a node on a [`Tape`].
pub type NodeId = usize;

/// Probability floor used by the binary cross-entropy loss.
pub const BCE_EPS: f64 = 1e-7;

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Param { pid: ParamId },
    Gather { pid: ParamId, ids: Vec<usize> },
    MatMul { a: NodeId, b: NodeId },
    Add { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    AddRow { a: NodeId, row: NodeId },
    Tanh { a: NodeId },
    Sigmoid { a: NodeId },
    Relu { a: NodeId },
    Softmax { a: NodeId },
    MaskedSoftmax { a: NodeId },
    SliceCols { a: NodeId, start: usize },
    ConcatRows { parts: Vec<NodeId> },
    ConcatCols { parts: Vec<NodeId> },
    Transpose { a: NodeId },
    Sum { a: NodeId },
    BceLoss { p: NodeId, targets: Vec<f64> },
}

struct Node {
    op: Op,
    value: Tensor,
}

/// Records one forward computation; discarded after `backward`.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax over `xs` restricted to positions where `mask` is true; masked
/// positions come out exactly zero. Max-subtraction keeps exp() finite.
fn masked_softmax_values(xs: &[f64], mask: &[bool]) -> Vec<f64> {
    let max = xs
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&x, _)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = vec![0.0; xs.len()];
    let mut denom = 0.0;
    for (i, (&x, &m)) in xs.iter().zip(mask).enumerate() {
        if m {
            let e = (x - max).exp();
            out[i] = e;
            denom += e;
        }
    }
    for v in &mut out {
        *v /= denom;
    }
    out
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id].value
    }

    fn push(&mut self, op: Op, value: Tensor) -> NodeId {
        self.nodes.push(Node { op, value });
        self.nodes.len() - 1
    }

    fn shape(&self, id: NodeId) -> &[usize] {
        self.nodes[id].value.shape()
    }

    /// Constant input node (not differentiated).
    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Leaf, value)
    }

    /// Copies a parameter's current value onto the tape; `backward` routes
    /// this node's gradient into the store.
    pub fn param(&mut self, store: &ParamStore, pid: ParamId) -> NodeId {
        let value = Tensor::new(
            store.value(pid).shape().to_vec(),
            store.value(pid).data().to_vec(),
        )
        .expect("stored parameter is well-formed");
        self.push(Op::Param { pid }, value)
    }

    /// Row lookup into a `[rows × dim]` parameter table, producing
    /// `[ids.len() × dim]`. Only the gathered rows receive gradient.
    pub fn gather(&mut self, store: &ParamStore, pid: ParamId, ids: &[usize]) -> Result<NodeId> {
        let table = store.value(pid);
        if table.shape().len() != 2 {
            return Err(Error::Dimension(format!(
                "gather needs a 2-d table, got shape {:?}",
                table.shape()
            )));
        }
        if ids.is_empty() {
            return Err(Error::Dimension("gather with no indices".into()));
        }
        let (rows, dim) = (table.rows(), table.cols());
        let mut data = Vec::with_capacity(ids.len() * dim);
        for &i in ids {
            if i >= rows {
                return Err(Error::Dimension(format!(
                    "gather index {i} out of range for table with {rows} rows"
                )));
            }
            data.extend_from_slice(&table.data()[i * dim..(i + 1) * dim]);
        }
        let value = Tensor::new(vec![ids.len(), dim], data)?;
        Ok(self.push(Op::Gather { pid, ids: ids.to_vec() }, value))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::Dimension(format!(
                "matmul shapes {sa:?} x {sb:?} do not agree"
            )));
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let (da, db) = (self.nodes[a].value.data(), self.nodes[b].value.data());
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for p in 0..k {
                let aip = da[i * k + p];
                let brow = &db[p * n..(p + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += aip * b;
                }
            }
        }
        let value = Tensor::new(vec![m, n], out)?;
        Ok(self.push(Op::MatMul { a, b }, value))
    }

    fn binary_same_shape(&mut self, a: NodeId, b: NodeId, name: &str) -> Result<(Vec<usize>, Vec<f64>, Vec<f64>)> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(Error::Dimension(format!(
                "{name} shapes {sa:?} and {sb:?} differ"
            )));
        }
        Ok((
            sa.to_vec(),
            self.nodes[a].value.data().to_vec(),
            self.nodes[b].value.data().to_vec(),
        ))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (shape, da, db) = self.binary_same_shape(a, b, "add")?;
        let out: Vec<f64> = da.iter().zip(&db).map(|(x, y)| x + y).collect();
        let value = Tensor::new(shape, out)?;
        Ok(self.push(Op::Add { a, b }, value))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (shape, da, db) = self.binary_same_shape(a, b, "mul")?;
        let out: Vec<f64> = da.iter().zip(&db).map(|(x, y)| x * y).collect();
        let value = Tensor::new(shape, out)?;
        Ok(self.push(Op::Mul { a, b }, value))
    }

    /// Adds a `[1 × c]` row vector to every row of a `[r × c]` matrix.
    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> Result<NodeId> {
        let (sa, sr) = (self.shape(a).to_vec(), self.shape(row).to_vec());
        let cols = *sa.last().unwrap();
        if sa.len() != 2 || self.nodes[row].value.numel() != cols {
            return Err(Error::Dimension(format!(
                "add_row shapes {sa:?} and {sr:?} do not agree"
            )));
        }
        let rd = self.nodes[row].value.data().to_vec();
        let mut out = self.nodes[a].value.data().to_vec();
        for chunk in out.chunks_mut(cols) {
            for (o, &r) in chunk.iter_mut().zip(&rd) {
                *o += r;
            }
        }
        let value = Tensor::new(sa, out)?;
        Ok(self.push(Op::AddRow { a, row }, value))
    }

    fn unary(&mut self, a: NodeId, f: impl Fn(f64) -> f64, op: Op) -> NodeId {
        let out: Vec<f64> = self.nodes[a].value.data().iter().map(|&x| f(x)).collect();
        let value = Tensor::new(self.shape(a).to_vec(), out).expect("same shape");
        self.push(op, value)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.unary(a, f64::tanh, Op::Tanh { a })
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.unary(a, stable_sigmoid, Op::Sigmoid { a })
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        self.unary(a, |x| x.max(0.0), Op::Relu { a })
    }

    /// Softmax over all entries of a vector-shaped tensor.
    pub fn softmax(&mut self, a: NodeId) -> Result<NodeId> {
        let n = self.nodes[a].value.numel();
        if n == 0 {
            return Err(Error::Dimension("softmax of an empty tensor".into()));
        }
        let mask = vec![true; n];
        let out = masked_softmax_values(self.nodes[a].value.data(), &mask);
        let value = Tensor::new(self.shape(a).to_vec(), out)?;
        Ok(self.push(Op::Softmax { a }, value))
    }

    /// Softmax restricted to unmasked entries; masked entries are exactly 0.
    pub fn masked_softmax(&mut self, a: NodeId, mask: &[bool]) -> Result<NodeId> {
        let n = self.nodes[a].value.numel();
        if mask.len() != n {
            return Err(Error::Dimension(format!(
                "mask length {} does not match tensor with {n} entries",
                mask.len()
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::Contract("masked_softmax with all positions masked".into()));
        }
        let out = masked_softmax_values(self.nodes[a].value.data(), mask);
        let value = Tensor::new(self.shape(a).to_vec(), out)?;
        Ok(self.push(Op::MaskedSoftmax { a }, value))
    }

    /// Columns `[start, start+len)` of a 2-d tensor.
    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let sa = self.shape(a).to_vec();
        if sa.len() != 2 || start + len > sa[1] || len == 0 {
            return Err(Error::Dimension(format!(
                "slice_cols [{start}, {}) out of range for shape {sa:?}",
                start + len
            )));
        }
        let (rows, cols) = (sa[0], sa[1]);
        let src = self.nodes[a].value.data();
        let mut out = Vec::with_capacity(rows * len);
        for r in 0..rows {
            out.extend_from_slice(&src[r * cols + start..r * cols + start + len]);
        }
        let value = Tensor::new(vec![rows, len], out)?;
        Ok(self.push(Op::SliceCols { a, start }, value))
    }

    /// Stacks 2-d tensors with equal column counts on top of each other.
    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::Dimension("concat_rows of nothing".into()));
        }
        let cols = self.nodes[parts[0]].value.cols();
        let mut rows = 0;
        let mut data = Vec::new();
        for &p in parts {
            let t = &self.nodes[p].value;
            if t.cols() != cols {
                return Err(Error::Dimension(format!(
                    "concat_rows column mismatch: {:?} vs {cols} columns",
                    t.shape()
                )));
            }
            rows += t.rows();
            data.extend_from_slice(t.data());
        }
        let value = Tensor::new(vec![rows, cols], data)?;
        Ok(self.push(Op::ConcatRows { parts: parts.to_vec() }, value))
    }

    /// Concatenates 2-d tensors with equal row counts side by side.
    pub fn concat_cols(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::Dimension("concat_cols of nothing".into()));
        }
        let rows = self.nodes[parts[0]].value.rows();
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let t = &self.nodes[p].value;
            if t.rows() != rows {
                return Err(Error::Dimension(format!(
                    "concat_cols row mismatch: {:?} vs {rows} rows",
                    t.shape()
                )));
            }
            widths.push(t.cols());
        }
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for (&p, &w) in parts.iter().zip(&widths) {
                let t = &self.nodes[p].value;
                data.extend_from_slice(&t.data()[r * w..(r + 1) * w]);
            }
        }
        let value = Tensor::new(vec![rows, total], data)?;
        Ok(self.push(Op::ConcatCols { parts: parts.to_vec() }, value))
    }

    pub fn transpose(&mut self, a: NodeId) -> Result<NodeId> {
        let sa = self.shape(a).to_vec();
        if sa.len() != 2 {
            return Err(Error::Dimension(format!("transpose needs 2-d, got {sa:?}")));
        }
        let (r, c) = (sa[0], sa[1]);
        let src = self.nodes[a].value.data();
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = src[i * c + j];
            }
        }
        let value = Tensor::new(vec![c, r], out)?;
        Ok(self.push(Op::Transpose { a }, value))
    }

    /// Sum of all entries, as a `[1]` scalar.
    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let s: f64 = self.nodes[a].value.data().iter().sum();
        self.push(Op::Sum { a }, Tensor::scalar(s))
    }

    /// Mean binary cross-entropy of probabilities `p` against 0/1 targets.
    /// Probabilities are clamped to `[BCE_EPS, 1 - BCE_EPS]`.
    pub fn bce_loss(&mut self, p: NodeId, targets: &[f64]) -> Result<NodeId> {
        let n = self.nodes[p].value.numel();
        if targets.len() != n {
            return Err(Error::Dimension(format!(
                "bce_loss got {n} probabilities and {} targets",
                targets.len()
            )));
        }
        if n == 0 {
            return Err(Error::Dimension("bce_loss on empty input".into()));
        }
        if targets.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::Contract("bce_loss targets must be 0 or 1".into()));
        }
        let mut acc = 0.0;
        for (&pi, &y) in self.nodes[p].value.data().iter().zip(targets) {
            let pc = pi.clamp(BCE_EPS, 1.0 - BCE_EPS);
            acc -= y * pc.ln() + (1.0 - y) * (1.0 - pc).ln();
        }
        let value = Tensor::scalar(acc / n as f64);
        Ok(self.push(Op::BceLoss { p, targets: targets.to_vec() }, value))
    }

    /// Reverse pass from a scalar node. Parameter gradients ACCUMULATE into
    /// the store; call `store.zero_grads()` between independent passes.
    pub fn backward(&self, loss: NodeId, store: &mut ParamStore) -> Result<()> {
        if self.nodes[loss].value.numel() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.nodes[loss].value.shape()
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss] = Some(vec![1.0]);

        for id in (0..=loss).rev() {
            let Some(gout) = grads[id].take() else { continue };
            match &self.nodes[id].op {
                Op::Leaf => {}
                Op::Param { pid } => store.accumulate_grad(*pid, &gout),
                Op::Gather { pid, ids } => {
                    let dim = self.nodes[id].value.cols();
                    for (t, &row) in ids.iter().enumerate() {
                        store.accumulate_grad_row(*pid, row, &gout[t * dim..(t + 1) * dim]);
                    }
                }
                Op::MatMul { a, b } => {
                    let (m, k) = (self.shape(*a)[0], self.shape(*a)[1]);
                    let n = self.shape(*b)[1];
                    let da = self.nodes[*a].value.data();
                    let db = self.nodes[*b].value.data();
                    // dA = dC · Bᵀ
                    let ga = grads[*a].get_or_insert_with(|| vec![0.0; m * k]);
                    for i in 0..m {
                        for p in 0..k {
                            let mut s = 0.0;
                            for j in 0..n {
                                s += gout[i * n + j] * db[p * n + j];
                            }
                            ga[i * k + p] += s;
                        }
                    }
                    // dB = Aᵀ · dC
                    let gb = grads[*b].get_or_insert_with(|| vec![0.0; k * n]);
                    for p in 0..k {
                        for i in 0..m {
                            let aip = da[i * k + p];
                            for j in 0..n {
                                gb[p * n + j] += aip * gout[i * n + j];
                            }
                        }
                    }
                }
                Op::Add { a, b } => {
                    for &side in &[*a, *b] {
                        let g = grads[side].get_or_insert_with(|| vec![0.0; gout.len()]);
                        for (gi, &d) in g.iter_mut().zip(&gout) {
                            *gi += d;
                        }
                    }
                }
                Op::Mul { a, b } => {
                    let db = self.nodes[*b].value.data().to_vec();
                    let da = self.nodes[*a].value.data().to_vec();
                    let ga = grads[*a].get_or_insert_with(|| vec![0.0; gout.len()]);
                    for ((gi, &d), &bv) in ga.iter_mut().zip(&gout).zip(&db) {
                        *gi += d * bv;
                    }
                    let gb = grads[*b].get_or_insert_with(|| vec![0.0; gout.len()]);
                    for ((gi, &d), &av) in gb.iter_mut().zip(&gout).zip(&da) {
                        *gi += d * av;
                    }
                }
                Op::AddRow { a, row } => {
                    let cols = self.nodes[*row].value.numel();
                    let ga = grads[*a].get_or_insert_with(|| vec![0.0; gout.len()]);
                    for (gi, &d) in ga.iter_mut().zip(&gout) {
                        *gi += d;
                    }
                    let gr = grads[*row].get_or_insert_with(|| vec![0.0; cols]);
                    for chunk in gout.chunks(cols) {
                        for (gi, &d) in gr.iter_mut().zip(chunk) {
                            *gi += d;
                        }
                    }
                }
                Op::Tanh { a } => {
                    let y = self.nodes[id].value.data();
                    let ga = grads[*a].get_or_insert_with(|| vec![0.0; gout.len()]);
                    for ((gi, &d), &yv) in ga.iter_mut().zip(&gout).zip(y) {
                        *gi += d * (1.0 - yv * yv);
                    }
                }
                Op::Sigmoid { a } => {
                    let y = self.nodes[id].value.data();
                    let ga = grads[*a].get_or_insert_with(|| vec![0.0; gout.len()]);
                    for ((gi, &d), &yv) in ga.iter_mut().zip(&gout).zip(y) {
                        *gi += d * yv * (1.0 - yv);
                    }
                }
                Op::Relu { a } => {
                    let x = self.nodes[*a].value.data();
                    let ga = grads[*a].get_or_insert_with(|| vec![0.0; gout.len()]);
                    for ((gi, &d), &xv) in ga.iter_mut().zip(&gout).zip(x) {
                        if xv > 0.0 {
                            *gi += d;
                        }
                    }
                }
                Op::Softmax { a } | Op::MaskedSoftmax { a } => {
                    // dx_i = y_i (dy_i - Σ_j dy_j y_j); masked entries have
                    // y_i = 0 and so receive no gradient.
                    let y = self.nodes[id].value.data();
                    let dot: f64 = gout.iter().zip(y).map(|(&d, &yv)| d * yv).sum();
                    let ga = grads[*a].get_or_insert_with(|| vec![0.0; gout.len()]);
                    for ((gi, &d), &yv) in ga.iter_mut().zip(&gout).zip(y) {
                        *gi += yv * (d - dot);
                    }
                }
                Op::SliceCols { a, start } => {
                    let sa = self.shape(*a).to_vec();
                    let (rows, cols) = (sa[0], sa[1]);
                    let len = self.nodes[id].value.cols();
                    let ga = grads[*a].get_or_insert_with(|| vec![0.0; rows * cols]);
                    for r in 0..rows {
                        for j in 0..len {
                            ga[r * cols + start + j] += gout[r * len + j];
                        }
                    }
                }
                Op::ConcatRows { parts } => {
                    let mut offset = 0;
                    for &p in parts {
                        let n = self.nodes[p].value.numel();
                        let gp = grads[p].get_or_insert_with(|| vec![0.0; n]);
                        for (gi, &d) in gp.iter_mut().zip(&gout[offset..offset + n]) {
                            *gi += d;
                        }
                        offset += n;
                    }
                }
                Op::ConcatCols { parts } => {
                    let rows = self.nodes[id].value.rows();
                    let total = self.nodes[id].value.cols();
                    let mut offset = 0;
                    for &p in parts {
                        let w = self.nodes[p].value.cols();
                        let n = self.nodes[p].value.numel();
                        let gp = grads[p].get_or_insert_with(|| vec![0.0; n]);
                        for r in 0..rows {
                            for j in 0..w {
                                gp[r * w + j] += gout[r * total + offset + j];
                            }
                        }
                        offset += w;
                    }
                }
                Op::Transpose { a } => {
                    let (r, c) = (self.shape(id)[0], self.shape(id)[1]);
                    let ga = grads[*a].get_or_insert_with(|| vec![0.0; r * c]);
                    // output is [r × c]; input was [c × r]
                    for i in 0..r {
                        for j in 0..c {
                            ga[j * r + i] += gout[i * c + j];
                        }
                    }
                }
                Op::Sum { a } => {
                    let n = self.nodes[*a].value.numel();
                    let ga = grads[*a].get_or_insert_with(|| vec![0.0; n]);
                    for gi in ga.iter_mut() {
                        *gi += gout[0];
                    }
                }
                Op::BceLoss { p, targets } => {
                    let n = targets.len() as f64;
                    let pv = self.nodes[*p].value.data();
                    let gp = grads[*p].get_or_insert_with(|| vec![0.0; pv.len()]);
                    for ((gi, &pi), &y) in gp.iter_mut().zip(pv).zip(targets) {
                        let pc = pi.clamp(BCE_EPS, 1.0 - BCE_EPS);
                        *gi += gout[0] * (pc - y) / (pc * (1.0 - pc) * n);
                    }
                }
            }
        }
        Ok(())
    }
}
