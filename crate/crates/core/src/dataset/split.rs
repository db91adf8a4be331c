//! Train/validation/test splitting and the k-fold plan with labels exposed
//! only in fold 1.

use super::{Label, NewsRecord};
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.validation, self.test];
        if all.iter().any(|&r| r <= 0.0 || !r.is_finite()) {
            return Err(Error::Config(format!("split ratios must be positive, got {all:?}")));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios must sum to 1, got {all:?}")));
        }
        Ok(())
    }
}

/// Disjoint record-id partition of a corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

impl DatasetSplit {
    pub fn train_set(&self) -> HashSet<&str> {
        self.train.iter().map(String::as_str).collect()
    }

    pub fn validation_set(&self) -> HashSet<&str> {
        self.validation.iter().map(String::as_str).collect()
    }

    pub fn test_set(&self) -> HashSet<&str> {
        self.test.iter().map(String::as_str).collect()
    }
}

/// Largest-remainder apportionment of `n` items over the three ratios;
/// exact when the products are integral, off by at most one otherwise.
fn apportion(n: usize, ratios: &SplitRatios) -> [usize; 3] {
    let targets = [
        n as f64 * ratios.train,
        n as f64 * ratios.validation,
        n as f64 * ratios.test,
    ];
    let mut counts = [0usize; 3];
    let mut fracs = [0.0f64; 3];
    for i in 0..3 {
        counts[i] = targets[i].floor() as usize;
        fracs[i] = targets[i] - targets[i].floor();
    }
    let mut rest = n - counts.iter().sum::<usize>();
    // ties in fractional part resolve in train, validation, test order
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| fracs[b].partial_cmp(&fracs[a]).unwrap().then(a.cmp(&b)));
    for &i in &order {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

/// Seed-deterministic stratified split. Fake, real and unlabeled records are
/// shuffled and apportioned independently, so labeled class proportions in
/// validation and test match the labeled pool within one record per class.
pub fn split(records: &[NewsRecord], ratios: SplitRatios, seed: u64) -> Result<DatasetSplit> {
    ratios.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result = DatasetSplit { train: vec![], validation: vec![], test: vec![] };

    let groups: [Vec<&NewsRecord>; 3] = [
        records.iter().filter(|r| r.label == Some(Label::Fake)).collect(),
        records.iter().filter(|r| r.label == Some(Label::Real)).collect(),
        records.iter().filter(|r| r.label.is_none()).collect(),
    ];
    for group in groups {
        let mut ids: Vec<&str> = group.iter().map(|r| r.id.as_str()).collect();
        ids.shuffle(&mut rng);
        let [n_train, n_val, _] = apportion(ids.len(), &ratios);
        for (i, id) in ids.into_iter().enumerate() {
            let bucket = if i < n_train {
                &mut result.train
            } else if i < n_train + n_val {
                &mut result.validation
            } else {
                &mut result.test
            };
            bucket.push(id.to_string());
        }
    }
    if result.train.is_empty() || result.validation.is_empty() || result.test.is_empty() {
        return Err(Error::Config(format!(
            "split produced an empty part (train {}, validation {}, test {})",
            result.train.len(),
            result.validation.len(),
            result.test.len()
        )));
    }
    Ok(result)
}

/// Partition of the training split into k folds. Only the ids listed in
/// `labeled_fold1` (all inside fold 1) expose their true labels; every other
/// record is treated as unlabeled regardless of what the corpus knows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub folds: Vec<Vec<String>>,
    pub seed: u64,
    pub labeled_fold1: Vec<String>,
}

impl FoldPlan {
    /// Structural checks against the split that produced the training pool:
    /// folds must partition the train ids and stay disjoint from validation
    /// and test. Violations are leakage, not recoverable config mistakes.
    pub fn validate(&self, split: &DatasetSplit) -> Result<()> {
        if self.k < 2 || self.folds.len() != self.k {
            return Err(Error::Leakage(format!(
                "fold plan has {} folds but k = {}",
                self.folds.len(),
                self.k
            )));
        }
        let train = split.train_set();
        let val = split.validation_set();
        let test = split.test_set();
        let mut seen: HashSet<&str> = HashSet::new();
        for (i, fold) in self.folds.iter().enumerate() {
            for id in fold {
                if val.contains(id.as_str()) {
                    return Err(Error::Leakage(format!(
                        "fold {} contains validation record '{id}'",
                        i + 1
                    )));
                }
                if test.contains(id.as_str()) {
                    return Err(Error::Leakage(format!(
                        "fold {} contains test record '{id}'",
                        i + 1
                    )));
                }
                if !train.contains(id.as_str()) {
                    return Err(Error::Leakage(format!(
                        "fold {} contains '{id}' which is not a training record",
                        i + 1
                    )));
                }
                if !seen.insert(id) {
                    return Err(Error::Leakage(format!("record '{id}' appears in two folds")));
                }
            }
        }
        if seen.len() != train.len() {
            return Err(Error::Leakage(format!(
                "folds cover {} records but the train split has {}",
                seen.len(),
                train.len()
            )));
        }
        let fold1: HashSet<&str> = self.folds[0].iter().map(String::as_str).collect();
        for id in &self.labeled_fold1 {
            if !fold1.contains(id.as_str()) {
                return Err(Error::Leakage(format!(
                    "label-exposed record '{id}' is not in fold 1"
                )));
            }
        }
        Ok(())
    }
}

/// Builds the k-fold plan over the training split. Fold 1 is drawn from the
/// labeled pool (all of it, up to fold capacity); folds 2..k take the rest
/// with labels stripped from exposure. Fold sizes differ by at most one,
/// remainder going to the earliest folds.
pub fn make_folds(
    split: &DatasetSplit,
    records: &[NewsRecord],
    k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    if split.train.len() < k {
        return Err(Error::Config(format!(
            "cannot cut {} training records into {k} folds",
            split.train.len()
        )));
    }
    let labels: HashMap<&str, Option<Label>> =
        records.iter().map(|r| (r.id.as_str(), r.label)).collect();
    let mut labeled: Vec<&str> = Vec::new();
    let mut unlabeled: Vec<&str> = Vec::new();
    for id in &split.train {
        match labels.get(id.as_str()) {
            Some(Some(_)) => labeled.push(id),
            Some(None) => unlabeled.push(id),
            None => {
                return Err(Error::Contract(format!(
                    "train split references unknown record '{id}'"
                )))
            }
        }
    }
    if labeled.len() < k {
        return Err(Error::Contract(format!(
            "fold 1 must contain labels: found {} labeled training records, need at least {k}",
            labeled.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    labeled.shuffle(&mut rng);
    unlabeled.shuffle(&mut rng);

    let n = split.train.len();
    let base = n / k;
    let rem = n % k;
    let fold_size = |i: usize| base + usize::from(i < rem);

    let cap1 = fold_size(0);
    let take_labeled = labeled.len().min(cap1);
    let mut fold1: Vec<String> = labeled[..take_labeled].iter().map(|s| s.to_string()).collect();
    let labeled_fold1 = fold1.clone();

    // leftover labeled records are exposed as unlabeled in folds 2..k
    let mut pool: Vec<&str> = labeled[take_labeled..].to_vec();
    pool.extend(unlabeled);
    let mut pool_iter = pool.into_iter();
    while fold1.len() < cap1 {
        fold1.push(pool_iter.next().expect("train has at least k records").to_string());
    }

    let mut folds = vec![fold1];
    for i in 1..k {
        let fold: Vec<String> = pool_iter.by_ref().take(fold_size(i)).map(str::to_string).collect();
        folds.push(fold);
    }
    debug_assert!(pool_iter.next().is_none());

    Ok(FoldPlan { k, folds, seed, labeled_fold1 })
}
