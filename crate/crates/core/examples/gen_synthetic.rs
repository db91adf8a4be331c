//! Regenerates the bundled synthetic corpus at data/synthetic_fnn.jsonl.
//!
//! Usage: cargo run -p fakenews-core --example gen_synthetic [-- <n> <seed> <path>]

use fakenews_core::synth;
use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().expect("n")).unwrap_or(2000);
    let seed: u64 = args.get(2).map(|s| s.parse().expect("seed")).unwrap_or(20240701);
    let default_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/synthetic_fnn.jsonl");
    let path = args.get(3).map(String::as_str).unwrap_or(default_path);

    let records = synth::generate(n, seed);
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).expect("create output"));
    for rec in &records {
        let line = serde_json::to_string(rec).expect("serialize record");
        writeln!(out, "{line}").expect("write line");
    }
    out.flush().expect("flush");
    eprintln!("wrote {} records to {path}", records.len());
}
