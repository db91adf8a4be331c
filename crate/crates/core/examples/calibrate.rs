//! Dev probe: baselines vs the self-trained network on the synthetic corpus.

use fakenews_core::baselines::{
    compute_metrics, featurize, ConfusionMatrix, LogRegConfig, LogisticRegression, NaiveBayes,
};
use fakenews_core::dataset::{make_folds, split, Label, SplitRatios};
use fakenews_core::nn::{ModelConfig, Pooling};
use fakenews_core::selftrain::{run_self_training, Pipeline, SelfTrainConfig};
use fakenews_core::sentiment::LexiconEncoder;
use fakenews_core::synth;
use fakenews_core::text::tokenize;
use std::collections::HashMap;
use std::time::Instant;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let records = synth::generate(n, 20240701);
    let ratios = SplitRatios { train: 0.6, validation: 0.2, test: 0.2 };
    let s = split(&records, ratios, 42).unwrap();
    let plan = make_folds(&s, &records, 5, 42).unwrap();
    let encoder = LexiconEncoder::new();
    let pipeline = Pipeline::build(&records, &s, &encoder, 2, 20000, 100).unwrap();
    println!("vocab size: {}", pipeline.vocab.size());

    let by_id: HashMap<&str, &fakenews_core::dataset::NewsRecord> =
        records.iter().map(|r| (r.id.as_str(), r)).collect();

    // --- baselines: supervised on the fully labeled train split ---
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for id in &s.train {
        let rec = by_id[id.as_str()];
        let mut toks = tokenize(&rec.news_text);
        toks.extend(tokenize(&rec.tweet_text));
        let aux = &pipeline.features[id.as_str()].aux;
        rows.push(featurize(&toks, aux, &pipeline.vocab));
        labels.push(u8::from(rec.label.unwrap() == Label::Fake));
    }
    let dim = pipeline.vocab.size() + pipeline.features[s.train[0].as_str()].aux.len();

    let mut test_rows = Vec::new();
    let mut test_labels = Vec::new();
    for id in &s.test {
        let rec = by_id[id.as_str()];
        let mut toks = tokenize(&rec.news_text);
        toks.extend(tokenize(&rec.tweet_text));
        let aux = &pipeline.features[id.as_str()].aux;
        test_rows.push(featurize(&toks, aux, &pipeline.vocab));
        test_labels.push(u8::from(rec.label.unwrap() == Label::Fake));
    }

    let t0 = Instant::now();
    let lr = LogisticRegression::train(&rows, &labels, dim, LogRegConfig::default()).unwrap();
    let preds: Vec<u8> = test_rows.iter().map(|r| lr.predict(r)).collect();
    let m = compute_metrics(&ConfusionMatrix::from_predictions(&preds, &test_labels).unwrap()).unwrap();
    println!("logreg: acc {:.4} f1 {:.4}  ({:?})", m.accuracy, m.f1, t0.elapsed());

    let nb = NaiveBayes::train(&rows, &labels, pipeline.vocab.size(), 1.0).unwrap();
    let preds: Vec<u8> = test_rows.iter().map(|r| nb.predict(r)).collect();
    let m = compute_metrics(&ConfusionMatrix::from_predictions(&preds, &test_labels).unwrap()).unwrap();
    println!("nb:     acc {:.4} f1 {:.4}", m.accuracy, m.f1);

    // --- self-trained network ---
    let model_cfg = ModelConfig::with_defaults(0, 0);
    let st_cfg = SelfTrainConfig::default();
    let t0 = Instant::now();
    let outcome = run_self_training(&s, &plan, &pipeline, &model_cfg, &st_cfg).unwrap();
    println!("self-training took {:?}", t0.elapsed());
    for r in &outcome.reports {
        println!(
            "{:12} acc {:.4} prec {:.4} rec {:.4} f1 {:.4}  train {} acc+{} rej{}",
            r.label, r.accuracy, r.precision, r.recall, r.f1, r.train_size, r.accepted, r.rejected
        );
    }

    // plain LSTM ablation
    let model_cfg = ModelConfig { pooling: Pooling::LastState, ..model_cfg };
    let t0 = Instant::now();
    let outcome = run_self_training(&s, &plan, &pipeline, &model_cfg, &st_cfg).unwrap();
    println!("plain-lstm self-training took {:?}", t0.elapsed());
    for r in &outcome.reports {
        println!(
            "{:12} acc {:.4} f1 {:.4}  train {}",
            r.label, r.accuracy, r.f1, r.train_size
        );
    }
}
