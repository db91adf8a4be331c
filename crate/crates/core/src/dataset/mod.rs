//! Record schema, corpus ingestion, splitting, folding and feature assembly.

mod features;
mod split;

pub use features::{assemble_features, id_fingerprint, FeatureVector, NormStats, AUX_DIM, NUMERIC_COLUMNS};
pub use split::{make_folds, split, DatasetSplit, FoldPlan, SplitRatios};

use crate::error::{Error, Result};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::{BufRead, BufReader};
use std::path::Path;

/// Binary ground-truth class; fake news is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Label {
    Real,
    Fake,
}

impl Label {
    pub fn as_f64(self) -> f64 {
        match self {
            Label::Real => 0.0,
            Label::Fake => 1.0,
        }
    }

    pub fn from_prob(p: f64) -> Self {
        if p > 0.5 {
            Label::Fake
        } else {
            Label::Real
        }
    }
}

impl TryFrom<u8> for Label {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Label::Real),
            1 => Ok(Label::Fake),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        match l {
            Label::Real => 0,
            Label::Fake => 1,
        }
    }
}

/// One news item with its social context. Optional fields are null when the
/// source row omitted them; a missing `label` means the record is unlabeled.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewsRecord {
    pub id: String,
    pub title: String,
    pub news_text: String,
    pub source: String,
    pub tweet_text: String,
    #[serde(default)]
    pub reply_texts: Vec<String>,
    #[serde(default)]
    pub news_date: Option<NaiveDate>,
    #[serde(default)]
    pub tweet_date: Option<NaiveDate>,
    #[serde(default)]
    pub user_registration_date: Option<NaiveDate>,
    #[serde(default)]
    pub retweet_count: Option<u64>,
    #[serde(default)]
    pub user_tweet_count: Option<u64>,
    #[serde(default)]
    pub follower_count: Option<u64>,
    #[serde(default)]
    pub following_count: Option<u64>,
    #[serde(default)]
    pub like_count: Option<u64>,
    #[serde(default)]
    pub post_device: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

/// Supported corpus file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(Error::Config(format!("unknown corpus format '{other}'"))),
        }
    }
}

/// Loads a corpus, enforcing non-empty unique record ids.
pub fn load_records(path: &Path, format: CorpusFormat) -> Result<Vec<NewsRecord>> {
    let records = match format {
        CorpusFormat::Jsonl => load_jsonl(path)?,
        CorpusFormat::Csv => load_csv(path)?,
    };
    let mut seen: HashSet<&str> = HashSet::with_capacity(records.len());
    for rec in &records {
        if !seen.insert(rec.id.as_str()) {
            return Err(Error::Parse {
                line: 0,
                message: format!("duplicate record id '{}'", rec.id),
            });
        }
    }
    Ok(records)
}

fn load_jsonl(path: &Path) -> Result<Vec<NewsRecord>> {
    let file = std::fs::File::open(path)?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: NewsRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if rec.id.is_empty() {
            return Err(Error::Parse { line: lineno, message: "empty record id".into() });
        }
        records.push(rec);
    }
    Ok(records)
}

/// CSV columns carry the same names as the JSONL fields; `reply_texts` is a
/// JSON array encoded into one cell, empty cells mean null.
fn load_csv(path: &Path) -> Result<Vec<NewsRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse { line: 1, message: format!("missing column '{name}'") })
    };
    let idx_id = col("id")?;
    let idx_title = col("title")?;
    let idx_news_text = col("news_text")?;
    let idx_source = col("source")?;
    let idx_tweet_text = col("tweet_text")?;
    let opt = |name: &str| headers.iter().position(|h| h == name);
    let idx_reply = opt("reply_texts");
    let idx_news_date = opt("news_date");
    let idx_tweet_date = opt("tweet_date");
    let idx_reg_date = opt("user_registration_date");
    let idx_retweet = opt("retweet_count");
    let idx_user_tweets = opt("user_tweet_count");
    let idx_followers = opt("follower_count");
    let idx_following = opt("following_count");
    let idx_likes = opt("like_count");
    let idx_device = opt("post_device");
    let idx_label = opt("label");

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let cell = |i: usize| row.get(i).unwrap_or("").to_string();
        let opt_cell = |i: Option<usize>| i.map(|i| row.get(i).unwrap_or("")).filter(|s| !s.is_empty());

        let parse_date = |i: Option<usize>| -> Result<Option<NaiveDate>> {
            opt_cell(i)
                .map(|s| {
                    s.parse::<NaiveDate>().map_err(|_| Error::Parse {
                        line,
                        message: format!("bad date '{s}'"),
                    })
                })
                .transpose()
        };
        let parse_count = |i: Option<usize>| -> Result<Option<u64>> {
            opt_cell(i)
                .map(|s| {
                    s.parse::<u64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("bad count '{s}'"),
                    })
                })
                .transpose()
        };

        let id = cell(idx_id);
        if id.is_empty() {
            return Err(Error::Parse { line, message: "empty record id".into() });
        }
        let reply_texts = match opt_cell(idx_reply) {
            Some(s) => serde_json::from_str(s).map_err(|e| Error::Parse {
                line,
                message: format!("reply_texts must be a JSON array: {e}"),
            })?,
            None => Vec::new(),
        };
        let label = match opt_cell(idx_label) {
            Some("0") => Some(Label::Real),
            Some("1") => Some(Label::Fake),
            Some(other) => {
                return Err(Error::Parse { line, message: format!("label must be 0 or 1, got '{other}'") })
            }
            None => None,
        };

        records.push(NewsRecord {
            id,
            title: cell(idx_title),
            news_text: cell(idx_news_text),
            source: cell(idx_source),
            tweet_text: cell(idx_tweet_text),
            reply_texts,
            news_date: parse_date(idx_news_date)?,
            tweet_date: parse_date(idx_tweet_date)?,
            user_registration_date: parse_date(idx_reg_date)?,
            retweet_count: parse_count(idx_retweet)?,
            user_tweet_count: parse_count(idx_user_tweets)?,
            follower_count: parse_count(idx_followers)?,
            following_count: parse_count(idx_following)?,
            like_count: parse_count(idx_likes)?,
            post_device: opt_cell(idx_device).map(str::to_string),
            label,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    const FULL_LINE: &str = r#"{"id":"a1","title":"T","news_text":"body","source":"site","tweet_text":"tw","reply_texts":["r1"],"news_date":"2021-03-01","tweet_date":"2021-03-02","user_registration_date":"2015-01-01","retweet_count":4,"user_tweet_count":100,"follower_count":50,"following_count":10,"like_count":7,"post_device":"android","label":1}"#;

    #[test]
    fn jsonl_full_record_maps_directly() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "c.jsonl", &format!("{FULL_LINE}\n"));
        let recs = load_records(&path, CorpusFormat::Jsonl).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].label, Some(Label::Fake));
        assert_eq!(recs[0].retweet_count, Some(4));
        assert_eq!(recs[0].news_date, Some(NaiveDate::from_ymd_opt(2021, 3, 1).unwrap()));
    }

    #[test]
    fn missing_label_means_unlabeled() {
        let dir = tempfile::tempdir().unwrap();
        let line = r#"{"id":"a1","title":"T","news_text":"b","source":"s","tweet_text":"t"}"#;
        let path = write_file(&dir, "c.jsonl", &format!("{line}\n"));
        let recs = load_records(&path, CorpusFormat::Jsonl).unwrap();
        assert_eq!(recs[0].label, None);
        assert!(recs[0].reply_texts.is_empty());
        assert_eq!(recs[0].post_device, None);
    }

    #[test]
    fn duplicate_id_is_an_error_naming_the_id() {
        let dir = tempfile::tempdir().unwrap();
        let line = r#"{"id":"dup","title":"T","news_text":"b","source":"s","tweet_text":"t"}"#;
        let path = write_file(&dir, "c.jsonl", &format!("{line}\n{line}\n"));
        let err = load_records(&path, CorpusFormat::Jsonl).unwrap_err();
        assert!(err.to_string().contains("dup"));
    }

    #[test]
    fn malformed_line_error_carries_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let good = r#"{"id":"a1","title":"T","news_text":"b","source":"s","tweet_text":"t"}"#;
        let path = write_file(&dir, "c.jsonl", &format!("{good}\nnot json\n"));
        match load_records(&path, CorpusFormat::Jsonl) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_label_value_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let line = r#"{"id":"a1","title":"T","news_text":"b","source":"s","tweet_text":"t","label":2}"#;
        let path = write_file(&dir, "c.jsonl", &format!("{line}\n"));
        assert!(load_records(&path, CorpusFormat::Jsonl).is_err());
    }

    #[test]
    fn csv_round_trip_with_quoted_text_and_replies() {
        let dir = tempfile::tempdir().unwrap();
        let csv = "id,title,news_text,source,tweet_text,reply_texts,news_date,tweet_date,user_registration_date,retweet_count,user_tweet_count,follower_count,following_count,like_count,post_device,label\n\
                   a1,Title,\"body, with comma\",site,tw,\"[\"\"yes\"\",\"\"no\"\"]\",2021-03-01,,2015-06-01,4,,50,,7,web,0\n";
        let path = write_file(&dir, "c.csv", csv);
        let recs = load_records(&path, CorpusFormat::Csv).unwrap();
        assert_eq!(recs[0].news_text, "body, with comma");
        assert_eq!(recs[0].reply_texts, vec!["yes", "no"]);
        assert_eq!(recs[0].label, Some(Label::Real));
        assert_eq!(recs[0].tweet_date, None);
        assert_eq!(recs[0].user_tweet_count, None);
    }

    #[test]
    fn csv_bad_count_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let csv = "id,title,news_text,source,tweet_text,retweet_count\n\
                   a1,T,b,s,t,notanumber\n";
        let path = write_file(&dir, "c.csv", csv);
        match load_records(&path, CorpusFormat::Csv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
