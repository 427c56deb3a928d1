//! Write the bundled demo dataset: planted concepts, weak words for the
//! noise study and a few distractor vectors absent from the norms.
//!
//!     cargo run --example generate_demo_data -- [out_dir]

use std::path::PathBuf;

use conceptmap::synth::{generate, SynthSpec};

fn main() -> conceptmap::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/demo"));
    let spec = SynthSpec {
        concepts: 20,
        weak_words: 40,
        distractors: 8,
        seed: 7,
        ..SynthSpec::default()
    };
    let data = generate(&spec)?;
    data.write_to(&dir)?;
    let words: usize = data.concepts.iter().map(Vec::len).sum();
    println!(
        "{} concepts, {words} concept words, {} weak words -> {}",
        data.concepts.len(),
        data.weak_words.len(),
        dir.display()
    );
    Ok(())
}
