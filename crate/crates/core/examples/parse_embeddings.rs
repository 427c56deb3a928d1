//! Parse a word-vector file, compare words by cosine and label a summed
//! vector with its nearest token.

use std::collections::HashSet;

use conceptmap::embed::{cosine, parse_embeddings, sum_vectors};

const VECTORS: &str = "\
6 3
dog 0.9 0.1 0.0
puppy 0.8 0.2 0.1
cat 0.7 0.3 0.0
car 0.0 0.1 0.9
truck 0.1 0.0 0.8
banana 0.2 0.9 0.1
";

fn main() -> conceptmap::Result<()> {
    // Only tokens in the filter are kept; the header still declares 6 rows.
    let wanted: HashSet<String> = ["dog", "puppy", "cat", "car", "truck"].iter().map(|s| s.to_string()).collect();
    let table = parse_embeddings(VECTORS.as_bytes(), Some(&wanted))?;
    println!("kept {} of {} vectors, dim {}", table.len(), table.declared_count(), table.dim());

    for (a, b) in [("dog", "puppy"), ("dog", "car"), ("car", "truck")] {
        let c = cosine(table.require(a)?, table.require(b)?)?;
        println!("cos({a}, {b}) = {c:.3}");
    }

    let pets = sum_vectors(["dog", "puppy", "cat"].iter().map(|w| table.require(w)).collect::<Result<Vec<_>, _>>()?)?;
    let none = HashSet::new();
    println!("label of dog+puppy+cat: {}", table.nearest_label(&pets, &none)?);
    let no_dog: HashSet<String> = ["dog".to_string()].into();
    println!("label excluding dog:    {}", table.nearest_label(&pets, &no_dog)?);
    Ok(())
}
