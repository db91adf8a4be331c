//! Model building blocks: embedding lookup, LSTM cell recurrence, and the
//! self-attention pooling that collapses a hidden-state sequence into one
//! summary vector.

use crate::error::{Error, Result};
use crate::tensor::{NodeId, ParamId, ParamStore, Tape, Tensor};
use rand::Rng;

/// Uniform in ±sqrt(6 / (fan_in + fan_out)); keeps early activations in the
/// linear regime of tanh/sigmoid.
pub fn xavier_uniform(rng: &mut impl Rng, fan_in: usize, fan_out: usize, shape: Vec<usize>) -> Tensor {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let numel: usize = shape.iter().product();
    let data: Vec<f64> = (0..numel).map(|_| rng.gen_range(-bound..bound)).collect();
    Tensor::new(shape, data).expect("shape matches generated data")
}

/// Token-id → dense-vector table. Index 0 is the padding slot; padded
/// positions never reach the attention pool, so its row stays untrained.
#[derive(Debug, Clone)]
pub struct EmbeddingLayer {
    pub table: ParamId,
    pub vocab_size: usize,
    pub dim: usize,
}

impl EmbeddingLayer {
    pub fn init(store: &mut ParamStore, rng: &mut impl Rng, vocab_size: usize, dim: usize) -> Result<Self> {
        let table = store.add(
            "embedding",
            xavier_uniform(rng, vocab_size, dim, vec![vocab_size, dim]),
        )?;
        Ok(EmbeddingLayer { table, vocab_size, dim })
    }

    /// One token id → `[1 × dim]`.
    pub fn lookup(&self, tape: &mut Tape, store: &ParamStore, id: usize) -> Result<NodeId> {
        if id >= self.vocab_size {
            return Err(Error::Dimension(format!(
                "token id {id} out of range for vocabulary of {}",
                self.vocab_size
            )));
        }
        tape.gather(store, self.table, &[id])
    }
}

/// Single-direction LSTM. Gate blocks are packed `[input, forget, cell,
/// output]` along the 4H axis; hidden and cell states start at zero.
#[derive(Debug, Clone)]
pub struct LstmLayer {
    pub w_ih: ParamId,
    pub w_hh: ParamId,
    pub bias: ParamId,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl LstmLayer {
    pub fn init(
        store: &mut ParamStore,
        rng: &mut impl Rng,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
    ) -> Result<Self> {
        let gates = 4 * hidden_dim;
        let w_ih = store.add(
            &format!("{prefix}.w_ih"),
            xavier_uniform(rng, input_dim, gates, vec![input_dim, gates]),
        )?;
        let w_hh = store.add(
            &format!("{prefix}.w_hh"),
            xavier_uniform(rng, hidden_dim, gates, vec![hidden_dim, gates]),
        )?;
        let bias = store.add(&format!("{prefix}.bias"), Tensor::zeros(vec![1, gates])?)?;
        Ok(LstmLayer { w_ih, w_hh, bias, input_dim, hidden_dim })
    }

    /// Runs the recurrence over `xs` (each `[1 × input_dim]`) and returns one
    /// hidden state per step, each `[1 × hidden_dim]`.
    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, xs: &[NodeId]) -> Result<Vec<NodeId>> {
        let h = self.hidden_dim;
        let w_ih = tape.param(store, self.w_ih);
        let w_hh = tape.param(store, self.w_hh);
        let bias = tape.param(store, self.bias);
        let mut h_prev = tape.leaf(Tensor::zeros(vec![1, h])?);
        let mut c_prev = tape.leaf(Tensor::zeros(vec![1, h])?);
        let mut states = Vec::with_capacity(xs.len());
        for &x in xs {
            let from_x = tape.matmul(x, w_ih)?;
            let from_h = tape.matmul(h_prev, w_hh)?;
            let pre = tape.add(from_x, from_h)?;
            let gates = tape.add(pre, bias)?;
            let i_pre = tape.slice_cols(gates, 0, h)?;
            let f_pre = tape.slice_cols(gates, h, h)?;
            let g_pre = tape.slice_cols(gates, 2 * h, h)?;
            let o_pre = tape.slice_cols(gates, 3 * h, h)?;
            let i = tape.sigmoid(i_pre);
            let f = tape.sigmoid(f_pre);
            let g = tape.tanh(g_pre);
            let o = tape.sigmoid(o_pre);
            let keep = tape.mul(f, c_prev)?;
            let write = tape.mul(i, g)?;
            let c = tape.add(keep, write)?;
            let c_act = tape.tanh(c);
            let h_t = tape.mul(o, c_act)?;
            states.push(h_t);
            h_prev = h_t;
            c_prev = c;
        }
        Ok(states)
    }
}

/// Attention over a hidden-state sequence:
/// `u_t = tanh(W h_t + b)`, weights = softmax over unmasked `u_t · context`,
/// summary = weighted sum of the `h_t`.
#[derive(Debug, Clone)]
pub struct SelfAttentionPool {
    pub w: ParamId,
    pub bias: ParamId,
    pub context: ParamId,
    pub hidden_dim: usize,
}

impl SelfAttentionPool {
    pub fn init(
        store: &mut ParamStore,
        rng: &mut impl Rng,
        prefix: &str,
        hidden_dim: usize,
    ) -> Result<Self> {
        let w = store.add(
            &format!("{prefix}.w"),
            xavier_uniform(rng, hidden_dim, hidden_dim, vec![hidden_dim, hidden_dim]),
        )?;
        let bias = store.add(&format!("{prefix}.bias"), Tensor::zeros(vec![1, hidden_dim])?)?;
        let context = store.add(
            &format!("{prefix}.context"),
            xavier_uniform(rng, hidden_dim, 1, vec![hidden_dim, 1]),
        )?;
        Ok(SelfAttentionPool { w, bias, context, hidden_dim })
    }
}

/// Pooled summary `[1 × hidden]` plus the attention weights `[T × 1]`.
#[derive(Debug)]
pub struct AttentionOutput {
    pub pooled: NodeId,
    pub weights: NodeId,
}

/// Pools stacked hidden states `h` (`[T × hidden]`) under `mask`; masked
/// positions get exactly zero weight. Errors when everything is masked.
pub fn attention_pool(
    tape: &mut Tape,
    store: &ParamStore,
    pool: &SelfAttentionPool,
    h: NodeId,
    mask: &[bool],
) -> Result<AttentionOutput> {
    let shape = tape.value(h).shape().to_vec();
    if shape.len() != 2 || shape[1] != pool.hidden_dim {
        return Err(Error::Dimension(format!(
            "attention_pool expects [T x {}], got {shape:?}",
            pool.hidden_dim
        )));
    }
    if mask.len() != shape[0] {
        return Err(Error::Dimension(format!(
            "mask has {} entries for {} states",
            mask.len(),
            shape[0]
        )));
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::Contract("attention_pool with every position masked".into()));
    }
    let w = tape.param(store, pool.w);
    let bias = tape.param(store, pool.bias);
    let context = tape.param(store, pool.context);
    let proj = tape.matmul(h, w)?;
    let shifted = tape.add_row(proj, bias)?;
    let u = tape.tanh(shifted);
    let scores = tape.matmul(u, context)?;
    let weights = tape.masked_softmax(scores, mask)?;
    let weights_row = tape.transpose(weights)?;
    let pooled = tape.matmul(weights_row, h)?;
    Ok(AttentionOutput { pooled, weights })
}
