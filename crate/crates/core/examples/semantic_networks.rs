//! Build association (WA) and embedding (WE) networks over the same words
//! and compare their structure as the cosine threshold rises.

use conceptmap::cluster::infomap_partition;
use conceptmap::graph::{network_stats, wa_graph, we_graph, ThresholdTable};
use conceptmap::norms::{split_pos, Pos, StrengthClass};
use conceptmap::synth::{generate, SynthSpec};
use conceptmap::studies::StudyConfig;

fn main() -> conceptmap::Result<()> {
    let data = generate(&SynthSpec {
        concepts: 12,
        jitter: 0.35,
        seed: 3,
        ..SynthSpec::default()
    })?
    .dataset()?;
    let (table, _) = data.prescreened(&StudyConfig::default())?;
    let nouns = split_pos(&table).remove(&Pos::Noun).expect("every POS present");

    let wa = wa_graph(&nouns)?;
    let wa_part = infomap_partition(&wa, 1);
    let s = network_stats(&wa, &wa_part)?;
    println!("WA nouns: {} nodes, {} edges, degree {:.2}, modularity {:.3}", s.node_count, s.edge_count, s.average_degree, s.modularity.unwrap_or(f64::NAN));

    let published = ThresholdTable::published(Pos::Noun).expect("nouns have a table");
    for class in [None, Some(StrengthClass::Low), Some(StrengthClass::Moderate), Some(StrengthClass::High)] {
        let t = published.for_class(class).expect("all bands published");
        let we = we_graph(wa.nodes(), &data.embeddings, Some(t))?;
        let part = infomap_partition(&we, 1);
        let s = network_stats(&we, &part)?;
        println!(
            "WE at {t:.2}: {} edges, degree {:.2}, sparsity {:.3}, {} clusters",
            s.edge_count,
            s.average_degree,
            s.sparsity,
            part.n_clusters()
        );
    }
    Ok(())
}
