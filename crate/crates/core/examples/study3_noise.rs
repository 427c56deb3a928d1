//! Inject weakly associated words into Moderate-class WE networks and track
//! IC against the noise-free WA partition.

use conceptmap::studies::{run_noise_study, StudyConfig};
use conceptmap::synth::{generate, SynthSpec};

fn main() -> conceptmap::Result<()> {
    let data = generate(&SynthSpec {
        concepts: 20,
        weak_words: 60,
        seed: 9,
        ..SynthSpec::default()
    })?
    .dataset()?;
    let cfg = StudyConfig {
        noise_levels: vec![0, 5, 10, 20],
        noise_replicates: 20,
        ..StudyConfig::default()
    };
    let out = run_noise_study(&cfg, &data)?;
    for c in &out.curves {
        println!(
            "{} (threshold {:.2}, {} words, pool {}): baseline IC {:.1}",
            c.pos, c.threshold, c.vocabulary, c.pool_size, c.baseline_ic
        );
        for p in &c.points {
            println!("  +{:>2} noise words: IC {:.2} +/- {:.2}", p.level, p.mean_ic, p.sd_ic);
        }
        if !c.skipped_levels.is_empty() {
            println!("  skipped levels beyond the pool: {:?}", c.skipped_levels);
        }
    }
    for (pos, why) in &out.failures {
        println!("{pos}: {why}");
    }
    Ok(())
}
