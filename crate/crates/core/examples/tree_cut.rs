//! Average-linkage agglomeration over cosine distance, then a static
//! tree cut that folds undersized branches into their nearest cluster.

use conceptmap::cluster::{agglomerate, dynamic_tree_cut, TreeCut};
use conceptmap::embed::{EmbeddingTable, WordVector};

fn main() -> conceptmap::Result<()> {
    // Branches separate only where average cosine falls below .01, so the
    // two groups point slightly away from each other.
    let rows: [(&str, [f64; 4]); 8] = [
        ("apple", [1.0, 0.05, 0.0, 0.0]),
        ("pear", [0.95, 0.1, 0.0, 0.0]),
        ("plum", [0.9, 0.0, -0.02, 0.0]),
        ("hammer", [-0.05, 0.0, 1.0, 0.0]),
        ("saw", [-0.05, 0.1, 0.9, 0.0]),
        ("drill", [-0.03, 0.0, 1.0, 0.0]),
        // Joins nothing below the cut; its summed vector leans toward fruit.
        ("basket", [0.008, 0.0, -0.02, 1.0]),
        ("orange", [1.0, 0.0, 0.0, 0.0]),
    ];
    let mut table = EmbeddingTable::new(4)?;
    for (w, v) in rows {
        table.insert(w, WordVector::new(v.to_vec())?)?;
    }
    let words: Vec<String> = rows.iter().map(|(w, _)| w.to_string()).collect();
    let dendrogram = agglomerate(&words, &table)?;
    for m in dendrogram.merges() {
        println!("merge {:>2} + {:>2} at height {:.4} (size {})", m.left, m.right, m.height, m.size);
    }
    let partition = dynamic_tree_cut(&dendrogram, &words, &table, &TreeCut::default())?;
    for members in partition.clusters() {
        let names: Vec<&str> = members.iter().map(|&v| words[v].as_str()).collect();
        println!("cluster: {}", names.join(", "));
    }
    Ok(())
}
