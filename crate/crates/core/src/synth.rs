//! Deterministic synthetic corpus generator for tests and demos.
//!
//! Records are separable by construction through four signals:
//! class-leaning word choice in both text fields (visible to bag-of-words
//! models), a two-token word-order pattern opening the news text (invisible
//! to bag-of-words, easy for a recurrent reader), a sentiment skew in the
//! tweets, and an interaction between retweet volume and account age whose
//! per-feature marginals are identical across classes.

use crate::dataset::{Label, NewsRecord};
use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Word-order pattern: real news opens "officials sources", fake news
/// "sources officials". Same unigrams either way.
pub const PATTERN_A: &str = "officials";
pub const PATTERN_B: &str = "sources";
const PATTERN_RELIABILITY: f64 = 0.97;

/// Fraction of fake (respectively real) records whose retweet/follower
/// bits disagree (respectively agree).
const INTERACTION_RELIABILITY: f64 = 0.9;

const NEWS_OWN_RATE: f64 = 0.12;
const NEWS_OPPOSITE_RATE: f64 = 0.04;
const TWEET_OWN_RATE: f64 = 0.25;
const TWEET_OPPOSITE_RATE: f64 = 0.05;

pub const SHARED_WORDS: &[&str] = &[
    "the", "a", "of", "in", "on", "for", "with", "after", "president", "government", "city",
    "state", "county", "school", "health", "report", "election", "study", "researchers",
    "company", "market", "public", "community", "plan", "budget", "water", "road", "team",
    "season", "festival", "weather", "local", "national", "world", "economy", "jobs", "workers",
    "union", "court", "judge", "law", "bill", "vote", "council", "mayor", "governor", "senator",
    "committee", "agency", "program", "project", "funding", "students", "teachers", "hospital",
    "doctors", "patients", "vaccine", "cases", "data", "numbers", "percent", "million",
    "billion", "year", "week", "month", "monday", "friday", "sunday", "january", "april",
    "september", "downtown", "north", "south", "river", "bridge", "airport", "train", "traffic",
    "energy", "power", "climate", "environment", "wildlife", "museum", "library", "church",
    "park", "residents", "families", "children", "seniors", "business", "stores", "restaurant",
    "food", "farm", "harvest", "prices", "meeting", "conference", "statement", "interview",
    "announcement", "release", "update", "details", "areas", "streets", "officers", "ceremony",
    "event", "opening", "renovation", "construction", "highway", "station", "district",
];

/// Words fake records lean on; negative-lexicon or neutral, never positive.
pub const FAKE_WORDS: &[&str] = &[
    "shocking", "secret", "exposed", "banned", "hoax", "scandal", "insider", "leaked",
    "conspiracy", "outrage", "viral", "bombshell", "coverup", "anonymous", "rumor",
    "fabricated", "forbidden", "underground", "shocker", "clickbait",
];

/// Words real records lean on; positive-lexicon or neutral, never negative.
pub const REAL_WORDS: &[&str] = &[
    "verified", "credible", "accurate", "thorough", "transparent", "reliable", "trusted",
    "peer", "reviewed", "documented", "measured", "archive", "published", "cited", "evidence",
    "methodology", "dataset", "audit", "records", "confirmed",
];

const SOURCES: &[&str] = &[
    "metro-daily.example", "city-times.example", "the-dispatch.example", "news-wire.example",
    "morning-post.example", "observer.example", "the-bulletin.example", "county-herald.example",
];

const DEVICES: &[&str] = &["android", "iphone", "web"];

const REPLIES: &[&str] = &[
    "is this true",
    "source please",
    "saw this earlier today",
    "sharing with my family",
    "hard to believe",
    "thanks for posting",
];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn body_word<'a>(rng: &mut ChaCha8Rng, fake: bool, own: f64, opposite: f64) -> &'a str {
    let r: f64 = rng.gen();
    let (own_pool, opp_pool) = if fake { (FAKE_WORDS, REAL_WORDS) } else { (REAL_WORDS, FAKE_WORDS) };
    if r < own {
        pick(rng, own_pool)
    } else if r < own + opposite {
        pick(rng, opp_pool)
    } else {
        pick(rng, SHARED_WORDS)
    }
}

/// Generates `n` fully labeled records; identical (n, seed) pairs produce
/// identical corpora.
pub fn generate(n: usize, seed: u64) -> Vec<NewsRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let epoch = NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date");
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let fake = rng.gen_bool(0.5);

        // news text: order-pattern prefix plus a class-leaning body
        let mut news_tokens: Vec<&str> = Vec::new();
        if rng.gen_bool(PATTERN_RELIABILITY) {
            if fake {
                news_tokens.extend([PATTERN_B, PATTERN_A]);
            } else {
                news_tokens.extend([PATTERN_A, PATTERN_B]);
            }
        } else {
            news_tokens.push(pick(&mut rng, SHARED_WORDS));
            news_tokens.push(pick(&mut rng, SHARED_WORDS));
        }
        let news_len = rng.gen_range(10..=16);
        for _ in 0..news_len {
            news_tokens.push(body_word(&mut rng, fake, NEWS_OWN_RATE, NEWS_OPPOSITE_RATE));
        }
        let news_text = news_tokens.join(" ");

        let tweet_text = if rng.gen_bool(0.01) {
            String::new()
        } else {
            let tweet_len = rng.gen_range(8..=14);
            let mut toks: Vec<String> = (0..tweet_len)
                .map(|_| body_word(&mut rng, fake, TWEET_OWN_RATE, TWEET_OPPOSITE_RATE).to_string())
                .collect();
            if rng.gen_bool(0.25) {
                toks.push(format!("@user{}", rng.gen_range(100..999)));
            }
            if rng.gen_bool(0.2) {
                toks.push(format!("https://t.example/{}", rng.gen_range(1000..9999)));
            }
            toks.join(" ")
        };

        let title: String = (0..rng.gen_range(3..=6))
            .map(|_| pick(&mut rng, SHARED_WORDS))
            .collect::<Vec<_>>()
            .join(" ");

        // retweet volume (b1) and follower volume (b2): each bit is a fair
        // coin, but fake records mostly disagree and real records mostly
        // agree, so neither feature separates the classes on its own.
        let xor_target = if fake {
            rng.gen_bool(INTERACTION_RELIABILITY)
        } else {
            rng.gen_bool(1.0 - INTERACTION_RELIABILITY)
        };
        let b1 = rng.gen_bool(0.5);
        let b2 = b1 ^ xor_target;
        let retweet_count = if b1 {
            300 + rng.gen_range(0..400)
        } else {
            rng.gen_range(0..60)
        };
        let follower_count = if b2 {
            2000 + rng.gen_range(0..3000)
        } else {
            10 + rng.gen_range(0..500)
        };

        let account_age_days = rng.gen_range(20..2800);
        let news_date = epoch + Duration::days(rng.gen_range(0..1800));
        let tweet_date = news_date + Duration::days(rng.gen_range(0..=7));
        let user_registration_date = tweet_date - Duration::days(account_age_days);

        let mut maybe = |lo: u64, hi: u64| {
            let v = rng.gen_range(lo..hi);
            if rng.gen_bool(0.05) {
                None
            } else {
                Some(v)
            }
        };
        let following_count = maybe(10, 2000);
        let user_tweet_count = maybe(50, 20000);
        let like_count = maybe(0, 1000);

        let reply_texts: Vec<String> = (0..rng.gen_range(0..=2))
            .map(|_| pick(&mut rng, REPLIES).to_string())
            .collect();

        records.push(NewsRecord {
            id: format!("syn{i:05}"),
            title,
            news_text,
            source: pick(&mut rng, SOURCES).to_string(),
            tweet_text,
            reply_texts,
            news_date: Some(news_date),
            tweet_date: Some(tweet_date),
            user_registration_date: Some(user_registration_date),
            retweet_count: Some(retweet_count),
            user_tweet_count,
            follower_count: Some(follower_count),
            following_count,
            like_count,
            post_device: Some(pick(&mut rng, DEVICES).to_string()),
            label: Some(if fake { Label::Fake } else { Label::Real }),
        });
    }
    records
}
