//! The self-learning loop: train on the labeled fold, pseudo-label the next
//! fold at confidence σ, absorb the confident records, retrain from scratch,
//! repeat through fold k, and evaluate the final round on the test split.

use crate::baselines::{compute_metrics, ConfusionMatrix, Metrics};
use crate::dataset::{
    assemble_features, id_fingerprint, DatasetSplit, FoldPlan, Label, NewsRecord, NormStats,
    AUX_DIM,
};
use crate::error::{Error, Result};
use crate::nn::{train_epoch, Model, ModelConfig, ModelInput, TrainExample};
use crate::sentiment::SentimentEncoder;
use crate::tensor::{Adam, AdamConfig};
use crate::text::{tokenize, Vocabulary};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

/// What happens to records whose prediction stays inside (1-σ, σ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RejectPolicy {
    /// Discard permanently. Guarantees termination in exactly k rounds.
    #[default]
    Drop,
    /// Re-score once after the next round's retraining, then drop.
    Defer,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelfTrainConfig {
    pub k: usize,
    pub sigma: f64,
    pub epochs_per_round: usize,
    pub seed: u64,
    pub reject_policy: RejectPolicy,
    pub batch_size: usize,
}

impl Default for SelfTrainConfig {
    fn default() -> Self {
        SelfTrainConfig {
            k: 5,
            sigma: 0.95,
            epochs_per_round: 10,
            seed: 0,
            reject_policy: RejectPolicy::Drop,
            batch_size: 2,
        }
    }
}

impl SelfTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if !(self.sigma > 0.5 && self.sigma < 1.0) {
            return Err(Error::Config(format!(
                "sigma must lie strictly between 0.5 and 1, got {}",
                self.sigma
            )));
        }
        if self.epochs_per_round == 0 {
            return Err(Error::Config("epochs_per_round must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accepted1,
    Accepted0,
    Rejected,
}

/// The σ rule: accept as fake above σ, as real below 1-σ, reject otherwise.
pub fn decide(p: f64, sigma: f64) -> Decision {
    if p > sigma {
        Decision::Accepted1
    } else if p < 1.0 - sigma {
        Decision::Accepted0
    } else {
        Decision::Rejected
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudoDecision {
    pub id: String,
    pub p: f64,
    pub decision: Decision,
}

/// All decisions for one fold in one round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudoLabelBatch {
    pub round: usize,
    pub decisions: Vec<PseudoDecision>,
}

impl PseudoLabelBatch {
    pub fn accepted(&self) -> impl Iterator<Item = (&str, f64)> {
        self.decisions.iter().filter_map(|d| match d.decision {
            Decision::Accepted1 => Some((d.id.as_str(), 1.0)),
            Decision::Accepted0 => Some((d.id.as_str(), 0.0)),
            Decision::Rejected => None,
        })
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted().count()
    }

    pub fn rejected_ids(&self) -> Vec<String> {
        self.decisions
            .iter()
            .filter(|d| d.decision == Decision::Rejected)
            .map(|d| d.id.clone())
            .collect()
    }
}

/// Scores one fold with a frozen model. The model is untouched; records are
/// looked at only through their assembled features.
pub fn pseudo_label(
    model: &Model,
    fold_ids: &[String],
    features: &HashMap<String, ModelInput>,
    sigma: f64,
    round: usize,
) -> Result<PseudoLabelBatch> {
    if fold_ids.is_empty() {
        return Err(Error::Contract(format!("round {round}: pseudo-labeling an empty fold")));
    }
    let mut decisions = Vec::with_capacity(fold_ids.len());
    for id in fold_ids {
        let input = features
            .get(id)
            .ok_or_else(|| Error::Contract(format!("no assembled features for record '{id}'")))?;
        let p = model.predict(input)?;
        decisions.push(PseudoDecision { id: id.clone(), p, decision: decide(p, sigma) });
    }
    Ok(PseudoLabelBatch { round, decisions })
}

/// Ordered training set of (record id, hard label).
#[derive(Debug, Clone, Default)]
pub struct TrainSet {
    entries: Vec<(String, f64)>,
    ids: HashSet<String>,
}

impl TrainSet {
    pub fn from_labeled<'a>(ids: impl IntoIterator<Item = &'a str>, labels: &HashMap<String, Label>) -> Result<Self> {
        let mut set = TrainSet::default();
        for id in ids {
            let label = labels
                .get(id)
                .ok_or_else(|| Error::Contract(format!("fold-1 record '{id}' has no label")))?;
            set.insert(id, label.as_f64())?;
        }
        Ok(set)
    }

    fn insert(&mut self, id: &str, label: f64) -> Result<()> {
        if !self.ids.insert(id.to_string()) {
            return Err(Error::Contract(format!(
                "record '{id}' is already in the training set"
            )));
        }
        self.entries.push((id.to_string(), label));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn fingerprint(&self) -> String {
        let ids: Vec<&str> = self.ids().collect();
        id_fingerprint(&ids)
    }
}

/// Accepted records join with their pseudo-labels as hard labels; the new
/// set keeps the old ordering with the batch appended in decision order.
pub fn augment_train_set(current: &TrainSet, batch: &PseudoLabelBatch) -> Result<TrainSet> {
    let mut next = current.clone();
    for (id, label) in batch.accepted() {
        next.insert(id, label)?;
    }
    Ok(next)
}

/// Mirrors one row of the round report table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RoundReport {
    pub label: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub train_size: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub deferred_accepted: usize,
}

/// One appended line of the run log; `decisions` plus `sigma` are enough to
/// replay the confidence-soundness check offline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundLogEntry {
    pub round: usize,
    pub label: String,
    pub sigma: f64,
    pub train_size: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub deferred_accepted: usize,
    pub train_ids_sha256: String,
    pub metrics: Metrics,
    pub decisions: Vec<PseudoDecision>,
}

pub struct SelfTrainOutcome {
    pub reports: Vec<RoundReport>,
    pub log: Vec<RoundLogEntry>,
    pub model: Model,
    pub model_config: ModelConfig,
}

/// Vocabulary, normalization stats and assembled features, fitted strictly
/// on the training split and applied to the whole corpus.
pub struct Pipeline {
    pub vocab: Vocabulary,
    pub stats: NormStats,
    pub features: HashMap<String, ModelInput>,
    pub labels: HashMap<String, Label>,
}

impl Pipeline {
    pub fn build(
        records: &[NewsRecord],
        split: &DatasetSplit,
        encoder: &dyn SentimentEncoder,
        vocab_min_frequency: usize,
        vocab_max_size: usize,
        max_seq_len: usize,
    ) -> Result<Self> {
        let by_id: HashMap<&str, &NewsRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
        let train_records: Vec<&NewsRecord> = split
            .train
            .iter()
            .map(|id| {
                by_id
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::Contract(format!("split references unknown record '{id}'")))
            })
            .collect::<Result<_>>()?;

        let corpus = train_records
            .iter()
            .flat_map(|r| [tokenize(&r.news_text), tokenize(&r.tweet_text)]);
        let vocab = Vocabulary::build(corpus, vocab_min_frequency, vocab_max_size)?;

        let stats = NormStats::compute(&train_records)?;
        stats.ensure_matches(&split.train)?;

        let mut features = HashMap::with_capacity(records.len());
        let mut labels = HashMap::new();
        for rec in records {
            let fv = assemble_features(rec, &vocab, encoder, &stats, max_seq_len)?;
            features.insert(
                rec.id.clone(),
                ModelInput { channels: vec![fv.news, fv.tweet], aux: fv.aux },
            );
            if let Some(label) = rec.label {
                labels.insert(rec.id.clone(), label);
            }
        }
        Ok(Pipeline { vocab, stats, features, labels })
    }
}

/// Which part of the split an evaluation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Train,
    Validation,
    Test,
}

impl SplitKind {
    pub fn ids<'a>(&self, split: &'a DatasetSplit) -> &'a [String] {
        match self {
            SplitKind::Train => &split.train,
            SplitKind::Validation => &split.validation,
            SplitKind::Test => &split.test,
        }
    }
}

/// Thresholds predictions at 0.5 and scores them against ground truth.
/// Every id must belong to the named split; unlabeled ids are skipped.
pub fn evaluate(
    model: &Model,
    ids: &[String],
    pipeline: &Pipeline,
    split: &DatasetSplit,
    kind: SplitKind,
) -> Result<Metrics> {
    let member: HashSet<&str> = kind.ids(split).iter().map(String::as_str).collect();
    for id in ids {
        if !member.contains(id.as_str()) {
            return Err(Error::Contract(format!(
                "record '{id}' does not belong to the {kind:?} split"
            )));
        }
    }
    let mut predicted = Vec::new();
    let mut truth = Vec::new();
    for id in ids {
        let Some(label) = pipeline.labels.get(id) else { continue };
        let input = pipeline
            .features
            .get(id)
            .ok_or_else(|| Error::Contract(format!("no assembled features for record '{id}'")))?;
        let p = model.predict(input)?;
        predicted.push(u8::from(Label::from_prob(p) == Label::Fake));
        truth.push(u8::from(*label == Label::Fake));
    }
    if predicted.is_empty() {
        return Err(Error::Contract(format!(
            "no labeled records to evaluate in the {kind:?} split"
        )));
    }
    compute_metrics(&ConfusionMatrix::from_predictions(&predicted, &truth)?)
}

/// Per-round model seed, derived from the base seed with a splitmix64 step.
fn round_seed(base: u64, round: usize) -> u64 {
    let mut z = base.wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(round as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn train_round(
    cfg: &ModelConfig,
    st: &SelfTrainConfig,
    round: usize,
    train_set: &TrainSet,
    features: &HashMap<String, ModelInput>,
) -> Result<Model> {
    let mut model = Model::new(cfg.clone(), round_seed(st.seed, round))?;
    let examples: Vec<TrainExample> = train_set
        .entries()
        .iter()
        .map(|(id, label)| {
            let input = features
                .get(id)
                .ok_or_else(|| Error::Contract(format!("no assembled features for record '{id}'")))?;
            Ok(TrainExample { input: input.clone(), label: *label })
        })
        .collect::<Result<_>>()?;
    let mut optimizer = Adam::new(AdamConfig::default())?;
    for _ in 0..st.epochs_per_round {
        train_epoch(&mut model, &examples, &mut optimizer, st.batch_size)?;
    }
    Ok(model)
}

/// Runs the whole loop and returns one report per round, k in total:
/// "Fold1-Val", "Fold+2-Val", ..., "Fold+k-Test". Each round retrains from
/// scratch with a fresh seed-derived initialization.
pub fn run_self_training(
    split: &DatasetSplit,
    plan: &FoldPlan,
    pipeline: &Pipeline,
    model_template: &ModelConfig,
    st_cfg: &SelfTrainConfig,
) -> Result<SelfTrainOutcome> {
    st_cfg.validate()?;
    if plan.k != st_cfg.k {
        return Err(Error::Config(format!(
            "fold plan has k = {} but self-training config says {}",
            plan.k, st_cfg.k
        )));
    }
    plan.validate(split)?;

    let cfg = ModelConfig {
        vocab_size: pipeline.vocab.size(),
        aux_dim: AUX_DIM,
        text_channels: 2,
        ..model_template.clone()
    };
    cfg.validate()?;

    let mut reports = Vec::with_capacity(st_cfg.k);
    let mut log = Vec::with_capacity(st_cfg.k);

    // round 1: supervised training on the label-exposed part of fold 1
    let mut train_set =
        TrainSet::from_labeled(plan.labeled_fold1.iter().map(String::as_str), &pipeline.labels)?;
    if train_set.is_empty() {
        return Err(Error::Contract("fold 1 exposes no labeled records".into()));
    }
    let mut model = train_round(&cfg, st_cfg, 1, &train_set, &pipeline.features)?;
    let metrics = evaluate(&model, &split.validation, pipeline, split, SplitKind::Validation)?;
    push_round(
        &mut reports,
        &mut log,
        RoundState {
            round: 1,
            label: "Fold1-Val".to_string(),
            sigma: st_cfg.sigma,
            metrics,
            train_set: &train_set,
            accepted: 0,
            rejected: 0,
            deferred_accepted: 0,
            decisions: Vec::new(),
        },
    );

    let mut defer_pool: Vec<String> = Vec::new();
    for round in 2..=st_cfg.k {
        let fold_ids = &plan.folds[round - 1];
        let batch = pseudo_label(&model, fold_ids, &pipeline.features, st_cfg.sigma, round)?;
        let accepted = batch.accepted_count();
        let rejected = batch.decisions.len() - accepted;

        train_set = augment_train_set(&train_set, &batch)?;
        model = train_round(&cfg, st_cfg, round, &train_set, &pipeline.features)?;

        // one deferred re-score of the previous round's rejects, then drop
        let mut deferred_accepted = 0;
        let mut deferred_decisions = Vec::new();
        if st_cfg.reject_policy == RejectPolicy::Defer && !defer_pool.is_empty() {
            let rescore =
                pseudo_label(&model, &defer_pool, &pipeline.features, st_cfg.sigma, round)?;
            deferred_accepted = rescore.accepted_count();
            train_set = augment_train_set(&train_set, &rescore)?;
            deferred_decisions = rescore.decisions;
        }
        defer_pool = match st_cfg.reject_policy {
            RejectPolicy::Drop => Vec::new(),
            RejectPolicy::Defer => batch.rejected_ids(),
        };

        let (eval_ids, kind, label) = if round == st_cfg.k {
            (&split.test, SplitKind::Test, format!("Fold+{round}-Test"))
        } else {
            (&split.validation, SplitKind::Validation, format!("Fold+{round}-Val"))
        };
        let metrics = evaluate(&model, eval_ids, pipeline, split, kind)?;

        let mut decisions = batch.decisions;
        decisions.extend(deferred_decisions);
        push_round(
            &mut reports,
            &mut log,
            RoundState {
                round,
                label,
                sigma: st_cfg.sigma,
                metrics,
                train_set: &train_set,
                accepted,
                rejected,
                deferred_accepted,
                decisions,
            },
        );
    }

    Ok(SelfTrainOutcome { reports, log, model, model_config: cfg })
}

struct RoundState<'a> {
    round: usize,
    label: String,
    sigma: f64,
    metrics: Metrics,
    train_set: &'a TrainSet,
    accepted: usize,
    rejected: usize,
    deferred_accepted: usize,
    decisions: Vec<PseudoDecision>,
}

fn push_round(reports: &mut Vec<RoundReport>, log: &mut Vec<RoundLogEntry>, state: RoundState) {
    reports.push(RoundReport {
        label: state.label.clone(),
        accuracy: state.metrics.accuracy,
        precision: state.metrics.precision,
        recall: state.metrics.recall,
        f1: state.metrics.f1,
        train_size: state.train_set.len(),
        accepted: state.accepted,
        rejected: state.rejected,
        deferred_accepted: state.deferred_accepted,
    });
    log.push(RoundLogEntry {
        round: state.round,
        label: state.label,
        sigma: state.sigma,
        train_size: state.train_set.len(),
        accepted: state.accepted,
        rejected: state.rejected,
        deferred_accepted: state.deferred_accepted,
        train_ids_sha256: state.train_set.fingerprint(),
        metrics: state.metrics,
        decisions: state.decisions,
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decision_rule_matches_the_sigma_contract() {
        assert_eq!(decide(0.97, 0.95), Decision::Accepted1);
        assert_eq!(decide(0.50, 0.95), Decision::Rejected);
        assert_eq!(decide(0.03, 0.95), Decision::Accepted0);
        // boundaries are strict; 0.75 keeps 1 - sigma exactly representable
        assert_eq!(decide(0.75, 0.75), Decision::Rejected);
        assert_eq!(decide(0.25, 0.75), Decision::Rejected);
    }

    #[test]
    fn sigma_must_exceed_half() {
        let bad = SelfTrainConfig { sigma: 0.4, ..SelfTrainConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = SelfTrainConfig { sigma: 1.0, ..SelfTrainConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        SelfTrainConfig::default().validate().unwrap();
    }

    fn batch(round: usize, items: &[(&str, f64)]) -> PseudoLabelBatch {
        PseudoLabelBatch {
            round,
            decisions: items
                .iter()
                .map(|(id, p)| PseudoDecision {
                    id: id.to_string(),
                    p: *p,
                    decision: decide(*p, 0.95),
                })
                .collect(),
        }
    }

    #[test]
    fn augment_with_no_acceptances_changes_nothing() {
        let mut labels = HashMap::new();
        labels.insert("a".to_string(), Label::Fake);
        let set = TrainSet::from_labeled(["a"], &labels).unwrap();
        let next = augment_train_set(&set, &batch(2, &[("x", 0.6), ("y", 0.5)])).unwrap();
        assert_eq!(next.len(), 1);
    }

    #[test]
    fn augment_absorbs_accepted_records_distinctly() {
        let mut labels = HashMap::new();
        for i in 0..20 {
            labels.insert(format!("l{i}"), Label::Real);
        }
        let ids: Vec<String> = (0..20).map(|i| format!("l{i}")).collect();
        let set = TrainSet::from_labeled(ids.iter().map(String::as_str), &labels).unwrap();

        let items: Vec<(String, f64)> = (0..10)
            .map(|i| (format!("p{i}"), if i % 2 == 0 { 0.99 } else { 0.01 }))
            .collect();
        let refs: Vec<(&str, f64)> = items.iter().map(|(s, p)| (s.as_str(), *p)).collect();
        let next = augment_train_set(&set, &batch(2, &refs)).unwrap();
        assert_eq!(next.len(), 30);
        let unique: HashSet<&str> = next.ids().collect();
        assert_eq!(unique.len(), 30);
        // pseudo-labels became hard labels
        assert!(next.entries().iter().any(|(id, l)| id == "p0" && *l == 1.0));
        assert!(next.entries().iter().any(|(id, l)| id == "p1" && *l == 0.0));
    }

    #[test]
    fn augment_rejects_id_collisions() {
        let mut labels = HashMap::new();
        labels.insert("a".to_string(), Label::Fake);
        let set = TrainSet::from_labeled(["a"], &labels).unwrap();
        let err = augment_train_set(&set, &batch(2, &[("a", 0.99)])).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn round_seeds_differ_by_round() {
        let s: Vec<u64> = (1..6).map(|r| round_seed(42, r)).collect();
        let unique: HashSet<&u64> = s.iter().collect();
        assert_eq!(unique.len(), s.len());
        assert_eq!(round_seed(42, 3), round_seed(42, 3));
    }
}
