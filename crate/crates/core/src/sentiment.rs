//! Sentiment encoding: each of the two text columns maps to a
//! (negative, neutral, positive) proportion triple, giving six auxiliary
//! feature columns per record.
//!
//! Two encoders are provided. [`LexiconEncoder`] scores text against a
//! bundled opinion word list and is fully offline. [`PrecomputedEncoder`]
//! reads per-record scores from a sidecar CSV, the integration point for
//! external model pipelines that produce sentiment distributions.

use crate::error::{Error, Result};
use crate::text::tokenize;
use std::collections::{HashMap, HashSet};
use std::path::Path;

const POSITIVE_WORDS: &str = include_str!("../data/lexicon/positive.txt");
const NEGATIVE_WORDS: &str = include_str!("../data/lexicon/negative.txt");

/// Class proportions; sums to 1 within 1e-6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentScore {
    pub negative: f64,
    pub neutral: f64,
    pub positive: f64,
}

impl SentimentScore {
    pub fn new(negative: f64, neutral: f64, positive: f64) -> Result<Self> {
        let ok_range = |v: f64| (0.0..=1.0).contains(&v);
        if !(ok_range(negative) && ok_range(neutral) && ok_range(positive)) {
            return Err(Error::Contract(format!(
                "sentiment components must lie in [0,1]: ({negative}, {neutral}, {positive})"
            )));
        }
        if ((negative + neutral + positive) - 1.0).abs() > 1e-6 {
            return Err(Error::Contract(format!(
                "sentiment components must sum to 1: ({negative}, {neutral}, {positive})"
            )));
        }
        Ok(SentimentScore { negative, neutral, positive })
    }

    /// The score given to empty text.
    pub fn neutral_text() -> Self {
        SentimentScore { negative: 0.0, neutral: 1.0, positive: 0.0 }
    }
}

/// Which text slot of a record a score is requested for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextField {
    News,
    Tweet,
}

/// Pure text → score mapping. `record_id` and `field` identify the slot
/// for encoders keyed by record rather than by text content.
pub trait SentimentEncoder {
    fn score_text(&self, record_id: &str, field: TextField, text: &str) -> Result<SentimentScore>;

    /// `[news.neg, news.neu, news.pos, tweet.neg, tweet.neu, tweet.pos]`.
    fn encode_record(
        &self,
        record_id: &str,
        news_text: &str,
        tweet_text: &str,
    ) -> Result<[f64; 6]> {
        let news = self.score_text(record_id, TextField::News, news_text)?;
        let tweet = self.score_text(record_id, TextField::Tweet, tweet_text)?;
        Ok([
            news.negative,
            news.neutral,
            news.positive,
            tweet.negative,
            tweet.neutral,
            tweet.positive,
        ])
    }
}

/// Counts opinion-lexicon hits: with P positive tokens, N negative tokens
/// and T total tokens, the score is (N/T, (T-P-N)/T, P/T); empty text is
/// fully neutral.
pub struct LexiconEncoder {
    positive: HashSet<&'static str>,
    negative: HashSet<&'static str>,
}

impl Default for LexiconEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl LexiconEncoder {
    pub fn new() -> Self {
        LexiconEncoder {
            positive: POSITIVE_WORDS.lines().filter(|l| !l.is_empty()).collect(),
            negative: NEGATIVE_WORDS.lines().filter(|l| !l.is_empty()).collect(),
        }
    }

    pub fn is_positive(&self, word: &str) -> bool {
        self.positive.contains(word)
    }

    pub fn is_negative(&self, word: &str) -> bool {
        self.negative.contains(word)
    }
}

impl SentimentEncoder for LexiconEncoder {
    fn score_text(&self, _record_id: &str, _field: TextField, text: &str) -> Result<SentimentScore> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Ok(SentimentScore::neutral_text());
        }
        let total = tokens.len() as f64;
        let mut pos = 0.0;
        let mut neg = 0.0;
        for tok in &tokens {
            if self.positive.contains(tok.as_str()) {
                pos += 1.0;
            } else if self.negative.contains(tok.as_str()) {
                neg += 1.0;
            }
        }
        SentimentScore::new(neg / total, (total - pos - neg) / total, pos / total)
    }
}

/// Looks scores up in a sidecar CSV keyed by record id. Expected header:
/// `record_id,news_neg,news_neu,news_pos,tweet_neg,tweet_neu,tweet_pos`.
pub struct PrecomputedEncoder {
    scores: HashMap<String, (SentimentScore, SentimentScore)>,
}

const SIDECAR_HEADER: [&str; 7] = [
    "record_id",
    "news_neg",
    "news_neu",
    "news_pos",
    "tweet_neg",
    "tweet_neu",
    "tweet_pos",
];

impl PrecomputedEncoder {
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(csv_error)?;
        let headers = reader.headers().map_err(csv_error)?.clone();
        let got: Vec<&str> = headers.iter().collect();
        if got != SIDECAR_HEADER {
            return Err(Error::Parse {
                line: 1,
                message: format!("sidecar header must be {SIDECAR_HEADER:?}, got {got:?}"),
            });
        }
        let mut scores = HashMap::new();
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            if record.len() != 7 {
                return Err(Error::Parse { line, message: format!("expected 7 fields, got {}", record.len()) });
            }
            let id = record[0].to_string();
            let mut vals = [0.0; 6];
            for (i, v) in vals.iter_mut().enumerate() {
                *v = record[i + 1].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad number '{}' in column {}", &record[i + 1], SIDECAR_HEADER[i + 1]),
                })?;
            }
            let news = SentimentScore::new(vals[0], vals[1], vals[2]).map_err(|e| Error::Parse {
                line,
                message: format!("news triple for '{id}': {e}"),
            })?;
            let tweet = SentimentScore::new(vals[3], vals[4], vals[5]).map_err(|e| Error::Parse {
                line,
                message: format!("tweet triple for '{id}': {e}"),
            })?;
            if scores.insert(id.clone(), (news, tweet)).is_some() {
                return Err(Error::Parse { line, message: format!("duplicate record id '{id}'") });
            }
        }
        Ok(PrecomputedEncoder { scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse { line, message: e.to_string() }
}

impl SentimentEncoder for PrecomputedEncoder {
    fn score_text(&self, record_id: &str, field: TextField, _text: &str) -> Result<SentimentScore> {
        let (news, tweet) = self.scores.get(record_id).ok_or_else(|| {
            Error::Lookup(format!("no precomputed sentiment for record id '{record_id}'"))
        })?;
        Ok(match field {
            TextField::News => *news,
            TextField::Tweet => *tweet,
        })
    }
}
