//! Classical baselines over bag-of-words + auxiliary features, and the
//! shared metrics kernel. Fake (label 1) is the positive class throughout.

use crate::error::{Error, Result};
use crate::text::{Vocabulary, PAD_ID};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn from_predictions(predicted: &[u8], truth: &[u8]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::Dimension(format!(
                "{} predictions for {} labels",
                predicted.len(),
                truth.len()
            )));
        }
        let mut cm = ConfusionMatrix::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p, t) {
                (1, 1) => cm.tp += 1,
                (1, 0) => cm.fp += 1,
                (0, 0) => cm.tn += 1,
                (0, 1) => cm.fn_ += 1,
                other => {
                    return Err(Error::Contract(format!(
                        "predictions and labels must be 0/1, got {other:?}"
                    )))
                }
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Standard definitions with the fake class positive; precision/recall fall
/// back to 0 when their denominator is 0, as does F1 when both are 0.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Contract("metrics over an empty confusion matrix".into()));
    }
    let accuracy = (cm.tp + cm.tn) as f64 / total as f64;
    let precision = if cm.tp + cm.fp > 0 {
        cm.tp as f64 / (cm.tp + cm.fp) as f64
    } else {
        0.0
    };
    let recall = if cm.tp + cm.fn_ > 0 {
        cm.tp as f64 / (cm.tp + cm.fn_) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Metrics { accuracy, precision, recall, f1 })
}

/// Sparse feature vector: bag-of-words counts with the auxiliary features
/// appended after the vocabulary index space.
#[derive(Debug, Clone)]
pub struct SparseFeatures {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

/// Token counts over the vocabulary (unknowns land on index 1, padding is
/// never counted) followed by dense aux columns at `vocab.size() + i`.
pub fn featurize(tokens: &[String], aux: &[f64], vocab: &Vocabulary) -> SparseFeatures {
    let mut counts: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    for tok in tokens {
        let id = vocab.lookup(tok);
        if id != PAD_ID {
            *counts.entry(id).or_insert(0.0) += 1.0;
        }
    }
    let mut indices: Vec<usize> = counts.keys().copied().collect();
    let mut values: Vec<f64> = counts.values().copied().collect();
    for (i, &a) in aux.iter().enumerate() {
        if a != 0.0 {
            indices.push(vocab.size() + i);
            values.push(a);
        }
    }
    SparseFeatures { indices, values }
}

/// L2-regularized logistic regression trained by full-batch gradient descent
/// from a small seeded random init.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub l2: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig { l2: 1e-4, epochs: 600, lr: 0.5, seed: 0 }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl LogisticRegression {
    pub fn zeros(dim: usize) -> Self {
        LogisticRegression { weights: vec![0.0; dim], bias: 0.0 }
    }

    pub fn train(
        features: &[SparseFeatures],
        labels: &[u8],
        dim: usize,
        cfg: LogRegConfig,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows for {} labels",
                features.len(),
                labels.len()
            )));
        }
        if !labels.contains(&0) || !labels.contains(&1) {
            return Err(Error::Contract(
                "logistic regression needs at least one example of each class".into(),
            ));
        }
        if cfg.lr <= 0.0 {
            return Err(Error::Config(format!("learning rate must be positive, got {}", cfg.lr)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut model = LogisticRegression {
            weights: (0..dim).map(|_| rng.gen_range(-0.01..0.01)).collect(),
            bias: 0.0,
        };
        let n = features.len() as f64;
        let mut grad = vec![0.0f64; dim];
        for _ in 0..cfg.epochs {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_bias = 0.0;
            for (row, &y) in features.iter().zip(labels) {
                let err = model.predict_proba(row) - y as f64;
                for (&i, &v) in row.indices.iter().zip(&row.values) {
                    grad[i] += err * v;
                }
                grad_bias += err;
            }
            for (w, g) in model.weights.iter_mut().zip(&grad) {
                *w -= cfg.lr * (g / n + cfg.l2 * *w);
            }
            model.bias -= cfg.lr * grad_bias / n;
        }
        Ok(model)
    }

    pub fn predict_proba(&self, row: &SparseFeatures) -> f64 {
        let z: f64 = row
            .indices
            .iter()
            .zip(&row.values)
            .map(|(&i, &v)| self.weights[i] * v)
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }

    pub fn predict(&self, row: &SparseFeatures) -> u8 {
        u8::from(self.predict_proba(row) > 0.5)
    }

    /// Mean L2-regularized BCE over a dataset.
    pub fn loss(&self, features: &[SparseFeatures], labels: &[u8], l2: f64) -> f64 {
        let eps = 1e-12;
        let n = features.len() as f64;
        let data: f64 = features
            .iter()
            .zip(labels)
            .map(|(row, &y)| {
                let p = self.predict_proba(row).clamp(eps, 1.0 - eps);
                -(y as f64 * p.ln() + (1.0 - y as f64) * (1.0 - p).ln())
            })
            .sum::<f64>()
            / n;
        let reg: f64 = 0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>();
        data + reg
    }
}

/// Multinomial naive Bayes with Laplace smoothing over token counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaiveBayes {
    pub log_prior: [f64; 2],
    /// Per-class log-likelihood for every token index.
    pub log_likelihood: [Vec<f64>; 2],
    pub alpha: f64,
}

impl NaiveBayes {
    /// `docs` are token-index count rows (bag-of-words only, no aux);
    /// `vocab_dim` is the token index space size.
    pub fn train(
        docs: &[SparseFeatures],
        labels: &[u8],
        vocab_dim: usize,
        alpha: f64,
    ) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
        }
        if vocab_dim == 0 {
            return Err(Error::Contract("naive bayes needs a non-empty vocabulary".into()));
        }
        if docs.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} documents for {} labels",
                docs.len(),
                labels.len()
            )));
        }
        if !labels.contains(&0) || !labels.contains(&1) {
            return Err(Error::Contract(
                "naive bayes needs at least one example of each class".into(),
            ));
        }
        let mut class_docs = [0usize; 2];
        let mut token_counts = [vec![0.0f64; vocab_dim], vec![0.0f64; vocab_dim]];
        let mut class_tokens = [0.0f64; 2];
        for (row, &y) in docs.iter().zip(labels) {
            let y = y as usize;
            class_docs[y] += 1;
            for (&i, &v) in row.indices.iter().zip(&row.values) {
                if i < vocab_dim {
                    token_counts[y][i] += v;
                    class_tokens[y] += v;
                }
            }
        }
        let total_docs = docs.len() as f64;
        let log_prior = [
            (class_docs[0] as f64 / total_docs).ln(),
            (class_docs[1] as f64 / total_docs).ln(),
        ];
        let log_likelihood = [0, 1].map(|y| {
            let denom = class_tokens[y] + alpha * vocab_dim as f64;
            token_counts[y]
                .iter()
                .map(|&c| ((c + alpha) / denom).ln())
                .collect()
        });
        Ok(NaiveBayes { log_prior, log_likelihood, alpha })
    }

    pub fn log_scores(&self, row: &SparseFeatures) -> [f64; 2] {
        let mut scores = self.log_prior;
        for (&i, &v) in row.indices.iter().zip(&row.values) {
            if i < self.log_likelihood[0].len() {
                scores[0] += v * self.log_likelihood[0][i];
                scores[1] += v * self.log_likelihood[1][i];
            }
        }
        scores
    }

    /// Argmax of the log scores; exact ties go to class 0.
    pub fn predict(&self, row: &SparseFeatures) -> u8 {
        let [s0, s1] = self.log_scores(row);
        u8::from(s1 > s0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{tokenize, UNK_ID};

    #[test]
    fn perfect_predictions_score_one() {
        let cm = ConfusionMatrix { tp: 10, fp: 0, tn: 0, fn_: 0 };
        let m = compute_metrics(&cm).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn metrics_match_direct_formula() {
        let cm = ConfusionMatrix { tp: 8, fp: 2, tn: 6, fn_: 4 };
        let m = compute_metrics(&cm).unwrap();
        assert!((m.accuracy - 14.0 / 20.0).abs() < 1e-12);
        assert!((m.precision - 0.8).abs() < 1e-12);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-12);
        let expected_f1 = 2.0 * 0.8 * (2.0 / 3.0) / (0.8 + 2.0 / 3.0);
        assert!((m.f1 - expected_f1).abs() < 1e-12);
    }

    #[test]
    fn zero_denominators_yield_zero_not_panic() {
        let cm = ConfusionMatrix { tp: 0, fp: 0, tn: 5, fn_: 5 };
        let m = compute_metrics(&cm).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert!((m.accuracy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_matrix_is_a_contract_error() {
        assert!(matches!(
            compute_metrics(&ConfusionMatrix::default()),
            Err(Error::Contract(_))
        ));
    }

    fn one_dim_rows(xs: &[f64]) -> Vec<SparseFeatures> {
        xs.iter()
            .map(|&x| SparseFeatures { indices: vec![0], values: vec![x] })
            .collect()
    }

    #[test]
    fn separable_pair_reaches_perfect_train_accuracy() {
        let rows = one_dim_rows(&[-1.0, 1.0]);
        let labels = [0u8, 1];
        let cfg = LogRegConfig { l2: 0.0, epochs: 2000, lr: 0.5, seed: 1 };
        let model = LogisticRegression::train(&rows, &labels, 1, cfg).unwrap();
        assert_eq!(model.predict(&rows[0]), 0);
        assert_eq!(model.predict(&rows[1]), 1);
    }

    #[test]
    fn zero_weights_predict_half() {
        let model = LogisticRegression::zeros(3);
        let row = SparseFeatures { indices: vec![0, 2], values: vec![5.0, -3.0] };
        assert_eq!(model.predict_proba(&row), 0.5);
    }

    #[test]
    fn single_class_training_rejected() {
        let rows = one_dim_rows(&[1.0, 2.0]);
        assert!(matches!(
            LogisticRegression::train(&rows, &[1, 1], 1, LogRegConfig::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn logreg_loss_non_increasing_under_small_lr() {
        let rows = one_dim_rows(&[-2.0, -1.0, 1.0, 2.0, 0.5, -0.5]);
        let labels = [0u8, 0, 1, 1, 1, 0];
        let mut prev = f64::INFINITY;
        for epochs in [1usize, 5, 25, 125] {
            let cfg = LogRegConfig { l2: 1e-4, epochs, lr: 0.01, seed: 7 };
            let model = LogisticRegression::train(&rows, &labels, 1, cfg).unwrap();
            let loss = model.loss(&rows, &labels, 1e-4);
            assert!(loss <= prev + 1e-12, "loss rose from {prev} to {loss}");
            prev = loss;
        }
    }

    /// Hand evaluation of the smoothed likelihoods on the two-word corpus
    /// {class1: "fake fake", class0: "real"} with alpha = 1.
    #[test]
    fn naive_bayes_matches_hand_computation() {
        let vocab = Vocabulary::build(vec![vec!["fake", "fake", "real"]], 1, 10).unwrap();
        let fake_id = vocab.lookup("fake");
        let real_id = vocab.lookup("real");
        let docs = vec![
            featurize(&tokenize("fake fake"), &[], &vocab),
            featurize(&tokenize("real"), &[], &vocab),
        ];
        let labels = [1u8, 0];
        let nb = NaiveBayes::train(&docs, &labels, vocab.size(), 1.0).unwrap();

        // class 1 saw 2 tokens over an index space of size(): counts fake=2.
        let dim = vocab.size() as f64;
        let expect_ll1_fake = ((2.0 + 1.0) / (2.0 + dim)).ln();
        let expect_ll0_fake = ((0.0 + 1.0) / (1.0 + dim)).ln();
        assert!((nb.log_likelihood[1][fake_id] - expect_ll1_fake).abs() < 1e-12);
        assert!((nb.log_likelihood[0][fake_id] - expect_ll0_fake).abs() < 1e-12);
        assert!((nb.log_prior[0] - 0.5f64.ln()).abs() < 1e-12);

        let test_doc = featurize(&tokenize("fake"), &[], &vocab);
        let [s0, s1] = nb.log_scores(&test_doc);
        assert!((s0 - (0.5f64.ln() + expect_ll0_fake)).abs() < 1e-12);
        assert!((s1 - (0.5f64.ln() + expect_ll1_fake)).abs() < 1e-12);
        assert_eq!(nb.predict(&test_doc), 1);

        let real_doc = featurize(&tokenize("real"), &[], &vocab);
        assert_eq!(nb.predict(&real_doc), 0);
        let _ = real_id;
    }

    #[test]
    fn uniform_evidence_ties_break_to_class_zero() {
        let vocab = Vocabulary::build(vec![vec!["a", "b"]], 1, 10).unwrap();
        let docs = vec![
            featurize(&tokenize("a b"), &[], &vocab),
            featurize(&tokenize("a b"), &[], &vocab),
        ];
        let nb = NaiveBayes::train(&docs, &[0, 1], vocab.size(), 1.0).unwrap();
        let doc = featurize(&tokenize("a b"), &[], &vocab);
        let [s0, s1] = nb.log_scores(&doc);
        assert!((s0 - s1).abs() < 1e-12);
        assert_eq!(nb.predict(&doc), 0);
    }

    #[test]
    fn decisions_invariant_under_corpus_duplication_and_count_scaling() {
        let vocab =
            Vocabulary::build(vec![vec!["scam", "hoax", "city", "report", "verified"]], 1, 20).unwrap();
        let texts = ["scam hoax scam", "city report verified", "hoax city", "report verified city"];
        let labels = [1u8, 0, 1, 0];
        let docs: Vec<SparseFeatures> =
            texts.iter().map(|t| featurize(&tokenize(t), &[], &vocab)).collect();

        let nb1 = NaiveBayes::train(&docs, &labels, vocab.size(), 1.0).unwrap();

        let mut doubled_docs = docs.clone();
        doubled_docs.extend(docs.iter().cloned());
        let mut doubled_labels = labels.to_vec();
        doubled_labels.extend_from_slice(&labels);
        let nb2 = NaiveBayes::train(&doubled_docs, &doubled_labels, vocab.size(), 1.0).unwrap();

        // scaling every count by 3 in both classes
        let scaled: Vec<SparseFeatures> = docs
            .iter()
            .map(|d| SparseFeatures {
                indices: d.indices.clone(),
                values: d.values.iter().map(|v| v * 3.0).collect(),
            })
            .collect();
        let nb3 = NaiveBayes::train(&scaled, &labels, vocab.size(), 1.0).unwrap();

        let probes = ["scam report", "verified city report", "hoax", "city"];
        for probe in probes {
            let row = featurize(&tokenize(probe), &[], &vocab);
            assert_eq!(nb1.predict(&row), nb2.predict(&row), "duplication changed '{probe}'");
            assert_eq!(nb1.predict(&row), nb3.predict(&row), "count scaling changed '{probe}'");
        }
    }

    #[test]
    fn featurize_counts_tokens_and_appends_aux() {
        let vocab = Vocabulary::build(vec![vec!["a", "b"]], 1, 10).unwrap();
        let toks = tokenize("a a b zz");
        let row = featurize(&toks, &[0.0, 2.5], &vocab);
        // counts: a -> 2 (id 2), b -> 1 (id 3), zz -> unk (id 1)
        assert_eq!(row.indices, vec![UNK_ID, 2, 3, vocab.size() + 1]);
        assert_eq!(row.values, vec![1.0, 2.0, 1.0, 2.5]);
    }
}
