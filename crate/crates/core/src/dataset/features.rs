//! Per-record model-input assembly: token channels plus the auxiliary
//! numeric / date / sentiment vector.

use super::NewsRecord;
use crate::error::{Error, Result};
use crate::sentiment::SentimentEncoder;
use crate::text::{encode_pad, tokenize, TokenSequence, Vocabulary};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Numeric record fields entering `aux`, in order.
pub const NUMERIC_COLUMNS: [&str; 5] = [
    "retweet_count",
    "user_tweet_count",
    "follower_count",
    "following_count",
    "like_count",
];

/// Width of the auxiliary vector: 5 z-scored numerics, 2 date features,
/// 6 sentiment columns.
pub const AUX_DIM: usize = NUMERIC_COLUMNS.len() + 2 + 6;

/// Keeps date features O(1) without fitting normalization to dates.
const DATE_SCALE: f64 = 1.0 / 10000.0;

fn numeric_fields(rec: &NewsRecord) -> [Option<u64>; 5] {
    [
        rec.retweet_count,
        rec.user_tweet_count,
        rec.follower_count,
        rec.following_count,
        rec.like_count,
    ]
}

fn date_epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid epoch")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ColumnStats {
    median: f64,
    mean: f64,
    std: f64,
}

/// Imputation medians and z-score moments for the numeric columns, fitted on
/// the training split only. The fingerprint (hash of the sorted train ids)
/// is checked before any feature assembly, so stats fitted on a different
/// split fail loudly instead of leaking.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormStats {
    columns: Vec<ColumnStats>,
    pub fingerprint: String,
}

/// Hex SHA-256 over the sorted ids, newline-joined.
pub fn id_fingerprint<S: AsRef<str>>(ids: &[S]) -> String {
    let mut sorted: Vec<&str> = ids.iter().map(|s| s.as_ref()).collect();
    sorted.sort_unstable();
    let mut hasher = Sha256::new();
    for id in sorted {
        hasher.update(id.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl NormStats {
    /// Fits medians over the non-null values and mean/std (population) over
    /// the median-imputed column.
    pub fn compute(train_records: &[&NewsRecord]) -> Result<Self> {
        if train_records.is_empty() {
            return Err(Error::Contract("cannot fit normalization stats on no records".into()));
        }
        let mut columns = Vec::with_capacity(NUMERIC_COLUMNS.len());
        for c in 0..NUMERIC_COLUMNS.len() {
            let mut present: Vec<f64> = train_records
                .iter()
                .filter_map(|r| numeric_fields(r)[c])
                .map(|v| v as f64)
                .collect();
            present.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = if present.is_empty() {
                0.0
            } else if present.len() % 2 == 1 {
                present[present.len() / 2]
            } else {
                (present[present.len() / 2 - 1] + present[present.len() / 2]) / 2.0
            };
            let imputed: Vec<f64> = train_records
                .iter()
                .map(|r| numeric_fields(r)[c].map(|v| v as f64).unwrap_or(median))
                .collect();
            let n = imputed.len() as f64;
            let mean = imputed.iter().sum::<f64>() / n;
            let var = imputed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            columns.push(ColumnStats { median, mean, std: var.sqrt() });
        }
        let ids: Vec<&str> = train_records.iter().map(|r| r.id.as_str()).collect();
        Ok(NormStats { columns, fingerprint: id_fingerprint(&ids) })
    }

    /// Fails with a contract error unless these stats were fitted on exactly
    /// the given id set.
    pub fn ensure_matches<S: AsRef<str>>(&self, train_ids: &[S]) -> Result<()> {
        let expected = id_fingerprint(train_ids);
        if expected != self.fingerprint {
            return Err(Error::Contract(format!(
                "normalization stats were fitted on a different record set \
                 (fingerprint {} != {})",
                self.fingerprint, expected
            )));
        }
        Ok(())
    }

    fn zscore(&self, c: usize, value: Option<u64>) -> f64 {
        let s = &self.columns[c];
        let v = value.map(|v| v as f64).unwrap_or(s.median);
        if s.std > 0.0 {
            (v - s.mean) / s.std
        } else {
            0.0
        }
    }
}

/// Assembled model inputs for one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub news: TokenSequence,
    pub tweet: TokenSequence,
    pub aux: Vec<f64>,
}

impl FeatureVector {
    pub fn channels(&self) -> [&TokenSequence; 2] {
        [&self.news, &self.tweet]
    }
}

/// Builds the two token channels and the auxiliary vector:
/// z-scored numerics (nulls imputed with the train median), news-date days
/// since 2000-01-01 and tweet-minus-registration account age (both scaled
/// by 1/10000, 0 when a date is null), then the sentiment 6-tuple.
pub fn assemble_features(
    record: &NewsRecord,
    vocab: &Vocabulary,
    encoder: &dyn SentimentEncoder,
    stats: &NormStats,
    max_seq_len: usize,
) -> Result<FeatureVector> {
    let news = encode_pad(&tokenize(&record.news_text), vocab, max_seq_len);
    let tweet = encode_pad(&tokenize(&record.tweet_text), vocab, max_seq_len);

    let mut aux = Vec::with_capacity(AUX_DIM);
    let numerics = numeric_fields(record);
    for (c, &value) in numerics.iter().enumerate() {
        aux.push(stats.zscore(c, value));
    }

    let news_days = record
        .news_date
        .map(|d| (d - date_epoch()).num_days() as f64 * DATE_SCALE)
        .unwrap_or(0.0);
    aux.push(news_days);
    let account_age = match (record.tweet_date, record.user_registration_date) {
        (Some(tweet), Some(reg)) => (tweet - reg).num_days() as f64 * DATE_SCALE,
        _ => 0.0,
    };
    aux.push(account_age);

    let sentiment = encoder.encode_record(&record.id, &record.news_text, &record.tweet_text)?;
    aux.extend_from_slice(&sentiment);

    debug_assert_eq!(aux.len(), AUX_DIM);
    if aux.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract(format!(
            "non-finite auxiliary feature for record '{}'",
            record.id
        )));
    }
    Ok(FeatureVector { news, tweet, aux })
}
