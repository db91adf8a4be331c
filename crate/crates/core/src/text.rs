//! Tokenization, vocabulary construction and fixed-length integer encoding.
//!
//! Index 0 is reserved for padding and index 1 for unknown tokens; real
//! tokens start at index 2. The vocabulary must be built from training-split
//! text only — the split logic upstream is responsible for feeding the right
//! records in.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;

/// Lowercases, splits on Unicode whitespace, collapses URLs to `<url>` and
/// @-mentions to `<user>`, strips leading/trailing punctuation from every
/// other token, and drops empties.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    lowered
        .split_whitespace()
        .filter_map(|raw| {
            if raw.starts_with("http://") || raw.starts_with("https://") || raw.starts_with("www.")
            {
                return Some("<url>".to_string());
            }
            if raw.starts_with('@') && raw.len() > 1 {
                return Some("<user>".to_string());
            }
            let stripped = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if stripped.is_empty() {
                None
            } else {
                Some(stripped.to_string())
            }
        })
        .collect()
}

/// Token → index map with reserved padding (0) and unknown (1) slots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    /// Tokens in rank order; `tokens[i]` has index `i + 2`.
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    pub min_frequency: usize,
    pub max_size: usize,
}

impl Vocabulary {
    /// Ranks tokens by (count desc, token asc), keeps those with count >=
    /// `min_frequency`, truncates to `max_size - 2` and assigns indices
    /// from 2 upward.
    pub fn build<S: AsRef<str>>(
        corpus: impl IntoIterator<Item = impl IntoIterator<Item = S>>,
        min_frequency: usize,
        max_size: usize,
    ) -> Result<Self> {
        if max_size < 3 {
            return Err(Error::Config(format!(
                "vocabulary max_size must be at least 3, got {max_size}"
            )));
        }
        let mut counts: HashMap<String, usize> = HashMap::new();
        for doc in corpus {
            for tok in doc {
                *counts.entry(tok.as_ref().to_string()).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> =
            counts.into_iter().filter(|(_, c)| *c >= min_frequency).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_size - 2);
        let tokens: Vec<String> = ranked.into_iter().map(|(t, _)| t).collect();
        Ok(Vocabulary::from_tokens(tokens, min_frequency, max_size))
    }

    fn from_tokens(tokens: Vec<String>, min_frequency: usize, max_size: usize) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i + 2))
            .collect();
        Vocabulary { tokens, index, min_frequency, max_size }
    }

    /// Total index space including padding and unknown.
    pub fn size(&self) -> usize {
        self.tokens.len() + 2
    }

    pub fn lookup(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Writes one `token<TAB>index` line per entry, UTF-8, in index order.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::fs::File::create(path)?;
        for (i, tok) in self.tokens.iter().enumerate() {
            writeln!(out, "{tok}\t{}", i + 2)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut tokens = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let (tok, idx) = line.split_once('\t').ok_or(Error::Parse {
                line: lineno + 1,
                message: "expected token<TAB>index".into(),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("bad index '{idx}'"),
            })?;
            if idx != tokens.len() + 2 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("index {idx} out of order, expected {}", tokens.len() + 2),
                });
            }
            tokens.push(tok.to_string());
        }
        let max_size = tokens.len() + 2;
        Ok(Vocabulary::from_tokens(tokens, 0, max_size))
    }
}

/// Fixed-length id sequence: prefix of the token list, right-padded with 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub ids: Vec<usize>,
    pub true_length: usize,
}

/// Known tokens map to their index, unknown to 1; the PREFIX is kept on
/// truncation and padding fills the tail with 0.
pub fn encode_pad(tokens: &[String], vocab: &Vocabulary, max_seq_len: usize) -> TokenSequence {
    assert!(max_seq_len >= 1, "max_seq_len must be positive");
    let true_length = tokens.len().min(max_seq_len);
    let mut ids = Vec::with_capacity(max_seq_len);
    for tok in &tokens[..true_length] {
        ids.push(vocab.lookup(tok));
    }
    ids.resize(max_seq_len, PAD_ID);
    TokenSequence { ids, true_length }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_strips_case_and_punctuation() {
        assert_eq!(tokenize("Breaking: FAKE news!!"), vec!["breaking", "fake", "news"]);
    }

    #[test]
    fn tokenize_collapses_urls_and_mentions() {
        assert_eq!(
            tokenize("see https://x.co/ab @bob"),
            vec!["see", "<url>", "<user>"]
        );
        assert_eq!(tokenize("WWW.Example.com"), vec!["<url>"]);
    }

    #[test]
    fn tokenize_handles_non_ascii() {
        assert_eq!(tokenize("Fälschung!  新闻 …"), vec!["fälschung", "新闻"]);
    }

    #[test]
    fn build_vocab_ranks_and_filters() {
        let corpus = vec![vec!["a", "b", "a"]];
        let v = Vocabulary::build(corpus.clone(), 1, 100).unwrap();
        assert_eq!(v.lookup("a"), 2);
        assert_eq!(v.lookup("b"), 3);

        let v2 = Vocabulary::build(corpus, 2, 100).unwrap();
        assert_eq!(v2.lookup("a"), 2);
        assert_eq!(v2.lookup("b"), UNK_ID);
        assert_eq!(v2.size(), 3);
    }

    #[test]
    fn build_vocab_breaks_count_ties_lexicographically() {
        let corpus = vec![vec!["x", "m", "x", "m", "x", "m", "x", "m", "x", "m"]];
        let v = Vocabulary::build(corpus, 1, 100).unwrap();
        assert_eq!(v.lookup("m"), 2);
        assert_eq!(v.lookup("x"), 3);
    }

    #[test]
    fn build_vocab_rejects_tiny_max_size() {
        let corpus: Vec<Vec<&str>> = vec![];
        assert!(matches!(
            Vocabulary::build(corpus, 1, 2),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn encode_pad_basic() {
        let v = Vocabulary::build(vec![vec!["a", "a", "b", "b"]], 1, 100).unwrap();
        let seq = encode_pad(&["a".into(), "b".into()], &v, 4);
        assert_eq!(seq.ids, vec![2, 3, 0, 0]);
        assert_eq!(seq.true_length, 2);
    }

    #[test]
    fn encode_pad_unknown_and_truncation() {
        let v = Vocabulary::build(vec![vec!["a", "a"]], 1, 100).unwrap();
        let seq = encode_pad(&["z".into()], &v, 2);
        assert_eq!(seq.ids, vec![UNK_ID, PAD_ID]);

        let toks: Vec<String> = (0..6).map(|i| format!("t{i}")).collect();
        let seq = encode_pad(&toks, &v, 4);
        assert_eq!(seq.true_length, 4);
        assert_eq!(seq.ids.len(), 4);
    }

    #[test]
    fn encoded_ids_stay_below_vocab_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let docs: Vec<Vec<String>> = (0..50)
            .map(|_| {
                (0..rng.gen_range(0..20))
                    .map(|_| format!("w{}", rng.gen_range(0..40)))
                    .collect()
            })
            .collect();
        let vocab = Vocabulary::build(docs.iter().map(|d| d.iter()), 1, 30).unwrap();
        for doc in &docs {
            let seq = encode_pad(doc, &vocab, 16);
            assert!(seq.ids.iter().all(|&id| id < vocab.size()));
            assert!(seq.ids[seq.true_length..].iter().all(|&id| id == PAD_ID));
        }
    }

    #[test]
    fn vocab_serialization_round_trips_byte_identically() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = vec![vec!["news", "fake", "news", "real", "café"]];
        let v = Vocabulary::build(corpus, 1, 100).unwrap();
        let p1 = dir.path().join("v1.tsv");
        let p2 = dir.path().join("v2.tsv");
        v.save(&p1).unwrap();
        let loaded = Vocabulary::load(&p1).unwrap();
        loaded.save(&p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        assert_eq!(loaded.lookup("café"), v.lookup("café"));
    }
}
