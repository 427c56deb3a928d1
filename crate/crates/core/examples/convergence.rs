//! Informational (IC) and semantic (SC) convergence between a WA and a WE
//! clustering of the same words.

use conceptmap::cluster::{infomap_partition, Partition};
use conceptmap::converge::{
    convergence_report, informational_convergence, semantic_convergence, summarize_clusters, ConvergenceOptions,
    MatchingMode,
};
use conceptmap::graph::{wa_graph, we_graph};
use conceptmap::studies::StudyConfig;
use conceptmap::synth::{generate, SynthSpec};

fn main() -> conceptmap::Result<()> {
    // One misencoded word per few concepts sits in a neighbouring concept's
    // embedding block, so the two networks disagree slightly.
    let data = generate(&SynthSpec {
        concepts: 10,
        misencoded: 3,
        seed: 11,
        ..SynthSpec::default()
    })?
    .dataset()?;
    let (table, _) = data.prescreened(&StudyConfig::default())?;
    let wa = wa_graph(&table)?;
    let words = wa.nodes().to_vec();
    let we = we_graph(&words, &data.embeddings, Some(0.72))?;
    let wa_part = infomap_partition(&wa, 5);
    let we_part = infomap_partition(&we, 5);

    let ic = informational_convergence(&wa_part, &we_part)?;
    println!("IC {:.2}% (H(WA) {:.3}, H(WE) {:.3}, H(WA|WE) {:.3} nats)", ic.percent, ic.h_wa, ic.h_we, ic.h_wa_given_we);

    let was = summarize_clusters(&wa_part, &words, &data.embeddings, false)?;
    let wes = summarize_clusters(&we_part, &words, &data.embeddings, false)?;
    for mode in [MatchingMode::Optimal, MatchingMode::Greedy] {
        let sc = semantic_convergence(&was, &wes, 0.726, mode)?;
        println!("SC {:.2}% with {mode:?} matching, mean cosine {:.3}", sc.percent, sc.mean_cosine);
    }

    let report = convergence_report((&wa, &wa_part), (&we, &we_part), &data.embeddings, &ConvergenceOptions::default(), 5)?;
    for p in report.pairs.iter().take(4) {
        println!("  {} <-> {} cos {:.3}", p.wa_label, p.we_label, p.cosine);
    }
    let identical = informational_convergence(&wa_part, &Partition::from_labels(wa_part.assignment()))?;
    println!("self-comparison IC {:.1}%", identical.percent);
    Ok(())
}
