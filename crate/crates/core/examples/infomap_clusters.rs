//! Map-equation clustering on a ring of cliques joined by weak bridges.

use conceptmap::cluster::{infomap_partition, map_equation, Partition};
use conceptmap::graph::{Edge, GraphKind, WeightedGraph};

fn ring_of_cliques(cliques: usize, size: usize, bridge: f64) -> conceptmap::Result<WeightedGraph> {
    let n = cliques * size;
    let mut edges = Vec::new();
    for c in 0..cliques {
        let base = c * size;
        for i in 0..size {
            for j in (i + 1)..size {
                edges.push(Edge { a: base + i, b: base + j, weight: 1.0 });
            }
        }
        let next = ((c + 1) % cliques) * size;
        edges.push(Edge { a: base, b: next + 1, weight: bridge });
    }
    WeightedGraph::new(GraphKind::WA, (0..n).map(|i| format!("v{i}")).collect(), edges)
}

fn main() -> conceptmap::Result<()> {
    let g = ring_of_cliques(6, 5, 0.05)?;
    let found = infomap_partition(&g, 42);
    println!("{} modules, sizes {:?}", found.n_clusters(), found.cluster_sizes());

    let planted = Partition::from_labels(&(0..30).map(|v| v / 5).collect::<Vec<_>>());
    println!("planted structure recovered: {}", found == planted);

    for (name, p) in [
        ("one module", Partition::one_cluster(30)),
        ("planted", planted),
        ("singletons", Partition::singletons(30)),
    ] {
        let s = map_equation(&g, &p)?;
        println!(
            "{name:>10}: L = {:.4} bits (index {:.4}, modules {:.4})",
            s.codelength, s.index_codelength, s.module_codelength
        );
    }
    Ok(())
}
