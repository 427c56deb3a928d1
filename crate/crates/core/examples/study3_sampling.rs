//! Bootstrap concept samples and sweep the WE cosine threshold, reporting
//! the IC curve and the best threshold per sample size.

use conceptmap::studies::{run_sampling_study, PosSelection, StudyConfig};
use conceptmap::norms::Pos;
use conceptmap::synth::{generate, SynthSpec};

fn main() -> conceptmap::Result<()> {
    let data = generate(&SynthSpec {
        concepts: 40,
        jitter: 0.25,
        seed: 4,
        ..SynthSpec::default()
    })?
    .dataset()?;
    let cfg = StudyConfig {
        pos: PosSelection::Only(Pos::Noun),
        sample_sizes: vec![5, 10, 15, 20],
        sampling_replicates: 20,
        ..StudyConfig::default()
    };
    let out = run_sampling_study(&cfg, &data)?;
    println!("available noun concepts: {:?}", out.available_concepts.get(&Pos::Noun));
    for r in &out.results {
        let ends = (r.curve.first().expect("grid"), r.curve.last().expect("grid"));
        println!(
            "k = {:>2}: best threshold {:.2} (mean IC {:.1}); IC at {:.2} = {:.1} +/- {:.1}, at {:.2} = {:.1} +/- {:.1}",
            r.concept_count,
            r.optimal_threshold,
            r.optimal_mean_ic,
            ends.0.threshold,
            ends.0.mean_ic,
            ends.0.sd_ic,
            ends.1.threshold,
            ends.1.mean_ic,
            ends.1.sd_ic
        );
    }
    Ok(())
}
