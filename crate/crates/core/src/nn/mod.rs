//! The hybrid classifier: per text channel an embedding → LSTM →
//! self-attention pooling stack (embedding table shared across channels),
//! pooled vectors concatenated with the auxiliary features, then a
//! ReLU dense layer and a sigmoid output.

mod layers;

pub use layers::{attention_pool, AttentionOutput, EmbeddingLayer, LstmLayer, SelfAttentionPool};

use crate::error::{Error, Result};
use crate::tensor::{Adam, NodeId, ParamId, ParamStore, Tape, Tensor};
use crate::text::TokenSequence;
use layers::xavier_uniform;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// How the per-channel hidden-state sequence collapses to one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    #[default]
    SelfAttention,
    /// Plain LSTM: keep only the final hidden state.
    LastState,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub dense_dim: usize,
    pub text_channels: usize,
    pub aux_dim: usize,
    pub max_seq_len: usize,
    #[serde(default)]
    pub pooling: Pooling,
}

impl ModelConfig {
    /// Trains-in-seconds desk defaults; vocabulary size is filled in later.
    pub fn with_defaults(vocab_size: usize, aux_dim: usize) -> Self {
        ModelConfig {
            vocab_size,
            embed_dim: 64,
            hidden_dim: 64,
            dense_dim: 32,
            text_channels: 2,
            aux_dim,
            max_seq_len: 100,
            pooling: Pooling::SelfAttention,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("vocab_size", self.vocab_size),
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("dense_dim", self.dense_dim),
            ("text_channels", self.text_channels),
            ("max_seq_len", self.max_seq_len),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

/// Assembled inputs for one record: one token sequence per text channel
/// plus the auxiliary feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInput {
    pub channels: Vec<TokenSequence>,
    pub aux: Vec<f64>,
}

/// One supervised example.
#[derive(Debug, Clone)]
pub struct TrainExample {
    pub input: ModelInput,
    pub label: f64,
}

struct Channel {
    lstm: LstmLayer,
    attention: SelfAttentionPool,
}

/// A fully materialized model instance: configuration plus parameter store.
/// Single-threaded for training; frozen-parameter prediction is pure.
pub struct Model {
    pub config: ModelConfig,
    params: ParamStore,
    embedding: EmbeddingLayer,
    channels: Vec<Channel>,
    dense1_w: ParamId,
    dense1_b: ParamId,
    dense2_w: ParamId,
    dense2_b: ParamId,
}

impl Model {
    /// Builds a freshly initialized model; identical seeds give identical
    /// parameters.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let embedding =
            EmbeddingLayer::init(&mut params, &mut rng, config.vocab_size, config.embed_dim)?;
        let mut channels = Vec::with_capacity(config.text_channels);
        for c in 0..config.text_channels {
            let lstm = LstmLayer::init(
                &mut params,
                &mut rng,
                &format!("lstm{c}"),
                config.embed_dim,
                config.hidden_dim,
            )?;
            let attention =
                SelfAttentionPool::init(&mut params, &mut rng, &format!("attn{c}"), config.hidden_dim)?;
            channels.push(Channel { lstm, attention });
        }
        let fused = config.text_channels * config.hidden_dim + config.aux_dim;
        let dense1_w = params.add(
            "dense1.w",
            xavier_uniform(&mut rng, fused, config.dense_dim, vec![fused, config.dense_dim]),
        )?;
        let dense1_b = params.add("dense1.bias", Tensor::zeros(vec![1, config.dense_dim])?)?;
        let dense2_w = params.add(
            "dense2.w",
            xavier_uniform(&mut rng, config.dense_dim, 1, vec![config.dense_dim, 1]),
        )?;
        let dense2_b = params.add("dense2.bias", Tensor::zeros(vec![1, 1])?)?;
        Ok(Model {
            config,
            params,
            embedding,
            channels,
            dense1_w,
            dense1_b,
            dense2_w,
            dense2_b,
        })
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn attention(&self, channel: usize) -> &SelfAttentionPool {
        &self.channels[channel].attention
    }

    /// Records the full forward pass for one record onto `tape` and returns
    /// the `[1 × 1]` probability node.
    pub fn forward_on_tape(&self, tape: &mut Tape, input: &ModelInput) -> Result<NodeId> {
        if input.channels.len() != self.config.text_channels {
            return Err(Error::Dimension(format!(
                "model expects {} text channels, got {}",
                self.config.text_channels,
                input.channels.len()
            )));
        }
        if input.aux.len() != self.config.aux_dim {
            return Err(Error::Dimension(format!(
                "model expects aux width {}, got {}",
                self.config.aux_dim,
                input.aux.len()
            )));
        }
        let mut fused_parts = Vec::with_capacity(self.config.text_channels + 1);
        for (channel, seq) in self.channels.iter().zip(&input.channels) {
            if seq.ids.len() != self.config.max_seq_len {
                return Err(Error::Dimension(format!(
                    "token sequence length {} != max_seq_len {}",
                    seq.ids.len(),
                    self.config.max_seq_len
                )));
            }
            let t_eff = seq.true_length.min(self.config.max_seq_len);
            if t_eff == 0 {
                // an empty channel (e.g. blank tweet) contributes a zero vector
                fused_parts.push(tape.leaf(Tensor::zeros(vec![1, self.config.hidden_dim])?));
                continue;
            }
            let xs: Vec<NodeId> = seq.ids[..t_eff]
                .iter()
                .map(|&id| self.embedding.lookup(tape, &self.params, id))
                .collect::<Result<_>>()?;
            let states = channel.lstm.forward(tape, &self.params, &xs)?;
            let pooled = match self.config.pooling {
                Pooling::SelfAttention => {
                    let h = tape.concat_rows(&states)?;
                    let mask = vec![true; t_eff];
                    attention_pool(tape, &self.params, &channel.attention, h, &mask)?.pooled
                }
                Pooling::LastState => *states.last().expect("t_eff >= 1"),
            };
            fused_parts.push(pooled);
        }
        if self.config.aux_dim > 0 {
            fused_parts.push(tape.leaf(Tensor::new(vec![1, self.config.aux_dim], input.aux.clone())?));
        }
        let fused = tape.concat_cols(&fused_parts)?;
        let w1 = tape.param(&self.params, self.dense1_w);
        let b1 = tape.param(&self.params, self.dense1_b);
        let pre1 = tape.matmul(fused, w1)?;
        let pre1b = tape.add(pre1, b1)?;
        let hidden = tape.relu(pre1b);
        let w2 = tape.param(&self.params, self.dense2_w);
        let b2 = tape.param(&self.params, self.dense2_b);
        let pre2 = tape.matmul(hidden, w2)?;
        let pre2b = tape.add(pre2, b2)?;
        Ok(tape.sigmoid(pre2b))
    }

    /// Pure single-record forward pass.
    pub fn predict(&self, input: &ModelInput) -> Result<f64> {
        let mut tape = Tape::new();
        let p = self.forward_on_tape(&mut tape, input)?;
        Ok(tape.value(p).data()[0])
    }

    /// Order-preserving map of [`Model::predict`] over records.
    pub fn predict_proba(&self, inputs: &[ModelInput]) -> Result<Vec<f64>> {
        inputs.iter().map(|i| self.predict(i)).collect()
    }

    /// Writes a JSON checkpoint of the config and every named parameter.
    pub fn save(&self, path: &Path) -> Result<()> {
        let params: Vec<CheckpointParam> = self
            .params
            .iter()
            .map(|p| CheckpointParam {
                name: p.name.clone(),
                shape: p.value.shape().to_vec(),
                data: p.value.data().to_vec(),
            })
            .collect();
        let ckpt = Checkpoint { config: self.config.clone(), params };
        let json = serde_json::to_string(&ckpt)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        let mut model = Model::new(ckpt.config, 0)?;
        if ckpt.params.len() != model.params.len() {
            return Err(Error::Contract(format!(
                "checkpoint has {} parameters, model expects {}",
                ckpt.params.len(),
                model.params.len()
            )));
        }
        for p in &ckpt.params {
            let id = model
                .params
                .id(&p.name)
                .ok_or_else(|| Error::Contract(format!("unknown parameter '{}' in checkpoint", p.name)))?;
            if model.params.value(id).shape() != p.shape.as_slice() {
                return Err(Error::Contract(format!(
                    "parameter '{}' has shape {:?} in checkpoint but {:?} in model",
                    p.name,
                    p.shape,
                    model.params.value(id).shape()
                )));
            }
            model.params.set_value(id, &p.data)?;
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointParam {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    config: ModelConfig,
    params: Vec<CheckpointParam>,
}

/// One pass over `examples` in order, mini-batched BCE + Adam; returns the
/// mean per-batch loss. Deterministic for a fixed example order.
pub fn train_epoch(
    model: &mut Model,
    examples: &[TrainExample],
    optimizer: &mut Adam,
    batch_size: usize,
) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::Contract("train_epoch on an empty example stream".into()));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch_size must be at least 1".into()));
    }
    let mut batch_losses = Vec::with_capacity(examples.len() / batch_size + 1);
    for batch in examples.chunks(batch_size) {
        let mut tape = Tape::new();
        let mut probs = Vec::with_capacity(batch.len());
        let mut targets = Vec::with_capacity(batch.len());
        for ex in batch {
            if ex.label != 0.0 && ex.label != 1.0 {
                return Err(Error::Contract(format!("labels must be 0 or 1, got {}", ex.label)));
            }
            probs.push(model.forward_on_tape(&mut tape, &ex.input)?);
            targets.push(ex.label);
        }
        let stacked = tape.concat_rows(&probs)?;
        let loss = tape.bce_loss(stacked, &targets)?;
        tape.backward(loss, &mut model.params)?;
        optimizer.step(&mut model.params);
        batch_losses.push(tape.value(loss).data()[0]);
    }
    Ok(batch_losses.iter().sum::<f64>() / batch_losses.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::AdamConfig;

    fn tiny_config() -> ModelConfig {
        ModelConfig {
            vocab_size: 10,
            embed_dim: 4,
            hidden_dim: 4,
            dense_dim: 3,
            text_channels: 2,
            aux_dim: 2,
            max_seq_len: 3,
            pooling: Pooling::SelfAttention,
        }
    }

    fn seq(ids: &[usize], max_len: usize) -> TokenSequence {
        let mut padded = ids.to_vec();
        let true_length = padded.len();
        padded.resize(max_len, 0);
        TokenSequence { ids: padded, true_length }
    }

    fn tiny_input() -> ModelInput {
        ModelInput {
            channels: vec![seq(&[2, 5, 7], 3), seq(&[3, 4], 3)],
            aux: vec![0.5, -1.0],
        }
    }

    #[test]
    fn output_is_a_probability_and_deterministic() {
        for seed in 0..20 {
            let model = Model::new(tiny_config(), seed).unwrap();
            let p1 = model.predict(&tiny_input()).unwrap();
            let p2 = model.predict(&tiny_input()).unwrap();
            assert!(p1 > 0.0 && p1 < 1.0);
            assert_eq!(p1, p2);
        }
    }

    #[test]
    fn mismatched_widths_are_dimension_errors() {
        let model = Model::new(tiny_config(), 0).unwrap();
        let mut bad_aux = tiny_input();
        bad_aux.aux.push(0.0);
        assert!(matches!(model.predict(&bad_aux), Err(Error::Dimension(_))));

        let mut bad_len = tiny_input();
        bad_len.channels[0].ids.push(0);
        assert!(matches!(model.predict(&bad_len), Err(Error::Dimension(_))));

        let mut bad_channels = tiny_input();
        bad_channels.channels.pop();
        assert!(matches!(model.predict(&bad_channels), Err(Error::Dimension(_))));
    }

    #[test]
    fn padding_content_beyond_true_length_is_ignored() {
        let model = Model::new(tiny_config(), 3).unwrap();
        let mut input = tiny_input();
        input.channels[1] = seq(&[3, 4], 3);
        let p_before = model.predict(&input).unwrap();
        // poke junk into the padded tail; true_length still 2
        input.channels[1].ids[2] = 9;
        let p_after = model.predict(&input).unwrap();
        assert_eq!(p_before, p_after);
    }

    #[test]
    fn empty_channel_is_allowed() {
        let model = Model::new(tiny_config(), 4).unwrap();
        let input = ModelInput {
            channels: vec![seq(&[], 3), seq(&[2], 3)],
            aux: vec![0.0, 0.0],
        };
        let p = model.predict(&input).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn single_channel_forward_matches_scalar_reimplementation() {
        // 1-channel model, every parameter pinned to small fixed values,
        // 2-token input; reference computed with plain f64 loops.
        let config = ModelConfig {
            vocab_size: 4,
            embed_dim: 2,
            hidden_dim: 2,
            dense_dim: 2,
            text_channels: 1,
            aux_dim: 1,
            max_seq_len: 2,
            pooling: Pooling::SelfAttention,
        };
        let mut model = Model::new(config, 0).unwrap();
        let pin = |model: &mut Model, name: &str, data: &[f64]| {
            let id = model.params.id(name).unwrap();
            model.params_mut().set_value(id, data).unwrap();
        };
        let emb = [0.0, 0.0, 0.1, -0.1, 0.2, 0.1, -0.2, 0.3]; // 4 x 2
        pin(&mut model, "embedding", &emb);
        let w_ih: Vec<f64> = (0..16).map(|i| 0.05 * (i as f64 - 8.0) / 8.0).collect(); // 2 x 8
        pin(&mut model, "lstm0.w_ih", &w_ih);
        let w_hh: Vec<f64> = (0..16).map(|i| 0.03 * ((i * 7 % 16) as f64 - 8.0) / 8.0).collect();
        pin(&mut model, "lstm0.w_hh", &w_hh);
        let b: Vec<f64> = (0..8).map(|i| 0.01 * i as f64).collect();
        pin(&mut model, "lstm0.bias", &b);
        let attn_w = [0.3, -0.2, 0.1, 0.4];
        pin(&mut model, "attn0.w", &attn_w);
        let attn_b = [0.05, -0.05];
        pin(&mut model, "attn0.bias", &attn_b);
        let ctx = [0.6, -0.3];
        pin(&mut model, "attn0.context", &ctx);
        let d1w = [0.2, -0.1, 0.15, 0.25, -0.3, 0.1]; // 3 x 2 (2 hidden + 1 aux)
        pin(&mut model, "dense1.w", &d1w);
        pin(&mut model, "dense1.bias", &[0.02, -0.02]);
        pin(&mut model, "dense2.w", &[0.5, -0.4]);
        pin(&mut model, "dense2.bias", &[0.1]);

        let ids = [1usize, 3];
        let aux = 0.7;

        // --- scalar reference, independent of the tape ---
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let mut h = [0.0f64; 2];
        let mut cstate = [0.0f64; 2];
        let mut hs = Vec::new();
        for &tok in &ids {
            let x = [emb[tok * 2], emb[tok * 2 + 1]];
            let mut gates = [0.0f64; 8];
            for gi in 0..8 {
                gates[gi] = b[gi] + x[0] * w_ih[gi] + x[1] * w_ih[8 + gi]
                    + h[0] * w_hh[gi]
                    + h[1] * w_hh[8 + gi];
            }
            let i = [sig(gates[0]), sig(gates[1])];
            let f = [sig(gates[2]), sig(gates[3])];
            let g = [gates[4].tanh(), gates[5].tanh()];
            let o = [sig(gates[6]), sig(gates[7])];
            for d in 0..2 {
                cstate[d] = f[d] * cstate[d] + i[d] * g[d];
                h[d] = o[d] * cstate[d].tanh();
            }
            hs.push(h);
        }
        let mut scores = Vec::new();
        for ht in &hs {
            let u = [
                (attn_w[0] * ht[0] + attn_w[2] * ht[1] + attn_b[0]).tanh(),
                (attn_w[1] * ht[0] + attn_w[3] * ht[1] + attn_b[1]).tanh(),
            ];
            scores.push(u[0] * ctx[0] + u[1] * ctx[1]);
        }
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let mut pooled = [0.0f64; 2];
        for (w, ht) in exps.iter().zip(&hs) {
            pooled[0] += w / z * ht[0];
            pooled[1] += w / z * ht[1];
        }
        let fused = [pooled[0], pooled[1], aux];
        let mut d1 = [0.0f64; 2];
        for j in 0..2 {
            let pre = fused[0] * d1w[j] + fused[1] * d1w[2 + j] + fused[2] * d1w[4 + j]
                + [0.02, -0.02][j];
            d1[j] = pre.max(0.0);
        }
        let expected = sig(d1[0] * 0.5 + d1[1] * -0.4 + 0.1);

        // --- model under test ---
        let input = ModelInput { channels: vec![seq(&ids, 2)], aux: vec![aux] };
        let got = model.predict(&input).unwrap();
        assert!(
            (got - expected).abs() < 1e-12,
            "model {got} vs scalar reference {expected}"
        );
    }

    #[test]
    fn tiny_model_gradients_match_finite_differences() {
        let mut model = Model::new(tiny_config(), 9).unwrap();
        let input = tiny_input();
        let target = 1.0;

        let loss_of = |model: &Model| -> f64 {
            let mut tape = Tape::new();
            let p = model.forward_on_tape(&mut tape, &input).unwrap();
            let l = tape.bce_loss(p, &[target]).unwrap();
            tape.value(l).data()[0]
        };

        let mut tape = Tape::new();
        let p = model.forward_on_tape(&mut tape, &input).unwrap();
        let loss = tape.bce_loss(p, &[target]).unwrap();
        model.params_mut().zero_grads();
        tape.backward(loss, &mut model.params).unwrap();

        let h = 1e-4;
        for pid in 0..model.params().len() {
            let name = model.params().param(pid).name.clone();
            let analytic = model.params().value(pid).grad().unwrap().to_vec();
            for i in 0..analytic.len() {
                let orig = model.params().value(pid).data()[i];
                let mut data = model.params().value(pid).data().to_vec();
                data[i] = orig + h;
                model.params_mut().set_value(pid, &data).unwrap();
                let up = loss_of(&model);
                data[i] = orig - h;
                model.params_mut().set_value(pid, &data).unwrap();
                let down = loss_of(&model);
                data[i] = orig;
                model.params_mut().set_value(pid, &data).unwrap();

                let numeric = (up - down) / (2.0 * h);
                let denom = analytic[i].abs().max(numeric.abs());
                if denom < 1e-8 {
                    continue;
                }
                assert!(
                    (analytic[i] - numeric).abs() / denom <= 1e-3,
                    "{name}[{i}]: analytic {} vs numeric {numeric}",
                    analytic[i]
                );
            }
        }
    }

    fn toy_examples() -> Vec<TrainExample> {
        // token 2 ↔ label 1, token 3 ↔ label 0; aux agrees in sign
        vec![
            TrainExample {
                input: ModelInput { channels: vec![seq(&[2, 2], 3), seq(&[2], 3)], aux: vec![1.0, 0.5] },
                label: 1.0,
            },
            TrainExample {
                input: ModelInput { channels: vec![seq(&[3, 3], 3), seq(&[3], 3)], aux: vec![-1.0, -0.5] },
                label: 0.0,
            },
            TrainExample {
                input: ModelInput { channels: vec![seq(&[2], 3), seq(&[2, 2], 3)], aux: vec![0.8, 1.0] },
                label: 1.0,
            },
            TrainExample {
                input: ModelInput { channels: vec![seq(&[3], 3), seq(&[3, 3], 3)], aux: vec![-0.8, -1.0] },
                label: 0.0,
            },
        ]
    }

    #[test]
    fn loss_decreases_on_separable_toy_set() {
        let mut model = Model::new(tiny_config(), 1).unwrap();
        let mut opt = Adam::new(AdamConfig { lr: 0.01, ..AdamConfig::default() }).unwrap();
        let examples = toy_examples();
        let first = train_epoch(&mut model, &examples, &mut opt, 2).unwrap();
        let mut last = first;
        for _ in 0..49 {
            last = train_epoch(&mut model, &examples, &mut opt, 2).unwrap();
        }
        assert!(
            last < first,
            "mean loss should fall over 50 epochs: {first} -> {last}"
        );
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let mut model = Model::new(tiny_config(), 2).unwrap();
        let snapshot: Vec<Vec<f64>> =
            model.params().iter().map(|p| p.value.data().to_vec()).collect();
        let mut opt = Adam::with_lr(0.0).unwrap();
        let examples = toy_examples();
        let l1 = train_epoch(&mut model, &examples, &mut opt, 2).unwrap();
        let l2 = train_epoch(&mut model, &examples, &mut opt, 2).unwrap();
        assert_eq!(l1, l2);
        for (p, before) in model.params().iter().zip(&snapshot) {
            assert_eq!(p.value.data(), before.as_slice());
        }
    }

    #[test]
    fn duplicated_stream_equals_twice_the_epochs() {
        let examples = toy_examples();
        let mut doubled = examples.clone();
        doubled.extend(examples.iter().cloned());

        let mut model_a = Model::new(tiny_config(), 5).unwrap();
        let mut opt_a = Adam::new(AdamConfig::default()).unwrap();
        for _ in 0..3 {
            train_epoch(&mut model_a, &doubled, &mut opt_a, 1).unwrap();
        }

        let mut model_b = Model::new(tiny_config(), 5).unwrap();
        let mut opt_b = Adam::new(AdamConfig::default()).unwrap();
        for _ in 0..6 {
            train_epoch(&mut model_b, &examples, &mut opt_b, 1).unwrap();
        }

        for (pa, pb) in model_a.params().iter().zip(model_b.params().iter()) {
            assert_eq!(pa.value.data(), pb.value.data(), "parameter {}", pa.name);
        }
    }

    #[test]
    fn empty_stream_is_a_contract_error() {
        let mut model = Model::new(tiny_config(), 0).unwrap();
        let mut opt = Adam::new(AdamConfig::default()).unwrap();
        assert!(matches!(
            train_epoch(&mut model, &[], &mut opt, 4),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn predict_proba_preserves_order_and_matches_single_calls() {
        let model = Model::new(tiny_config(), 8).unwrap();
        let inputs: Vec<ModelInput> = (0..6)
            .map(|i| ModelInput {
                channels: vec![seq(&[2 + i % 5], 3), seq(&[3, 2 + i % 5], 3)],
                aux: vec![i as f64 * 0.1, -(i as f64) * 0.2],
            })
            .collect();
        assert!(model.predict_proba(&[]).unwrap().is_empty());
        let probs = model.predict_proba(&inputs).unwrap();
        for (input, &p) in inputs.iter().zip(&probs) {
            assert_eq!(model.predict(input).unwrap(), p);
        }
        let mut reversed = inputs.clone();
        reversed.reverse();
        let rev_probs = model.predict_proba(&reversed).unwrap();
        let mut expected = probs.clone();
        expected.reverse();
        assert_eq!(rev_probs, expected);
    }

    #[test]
    fn checkpoint_round_trip_preserves_predictions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let mut model = Model::new(tiny_config(), 13).unwrap();
        let mut opt = Adam::new(AdamConfig::default()).unwrap();
        train_epoch(&mut model, &toy_examples(), &mut opt, 2).unwrap();
        model.save(&path).unwrap();
        let loaded = Model::load(&path).unwrap();
        for ex in toy_examples() {
            assert_eq!(model.predict(&ex.input).unwrap(), loaded.predict(&ex.input).unwrap());
        }
    }

    #[test]
    fn last_state_pooling_runs() {
        let config = ModelConfig { pooling: Pooling::LastState, ..tiny_config() };
        let model = Model::new(config, 3).unwrap();
        let p = model.predict(&tiny_input()).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }
}
