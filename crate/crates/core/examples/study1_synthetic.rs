//! Whole-network comparison on planted data: WA by map equation, WE by
//! agglomeration and tree cut over the complete cosine graph.

use conceptmap::studies::{run_study1, StudyConfig};
use conceptmap::synth::{generate, SynthSpec};

fn main() -> conceptmap::Result<()> {
    let cfg = StudyConfig::default();
    for concepts in [5, 20, 50] {
        let data = generate(&SynthSpec {
            concepts,
            seed: concepts as u64,
            ..SynthSpec::default()
        })?
        .dataset()?;
        let out = run_study1(&cfg, &data)?;
        let r = &out.report;
        println!(
            "{concepts:>2} concepts: IC {:.1}%, SC {:.1}%, {} WA / {} WE clusters, mean pair cosine {:.3}",
            r.ic_percent, r.sc_percent, r.n_wa_clusters, r.n_we_clusters, r.mean_cosine
        );
    }
    Ok(())
}
