//! Regenerates the demo inputs under `fixtures/`:
//! `cargo run -p candor-core --example make_fixtures -- fixtures`

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use candor_core::corpus::{labeled_to_jsonl, write_jsonl};
use candor_core::synth::{labeled_corpus, reference_violations};
use candor_core::KeywordDictionary;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let d = KeywordDictionary::default_honesty();
    let corpus = labeled_corpus(500, d.keywords(), 7);
    write_jsonl(&corpus, BufWriter::new(File::create(dir.join("reviews.jsonl"))?))?;
    std::fs::write(dir.join("violations.jsonl"), labeled_to_jsonl(&reference_violations()))?;
    println!("wrote {} reviews and {} labelled violations to {}", corpus.len(), 401, dir.display());
    Ok(())
}
