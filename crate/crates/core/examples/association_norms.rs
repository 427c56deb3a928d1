//! From raw cue/response counts to a screened association table, split by
//! strength class and part of speech.

use std::collections::BTreeMap;

use conceptmap::norms::{
    build_edges, compute_probabilities, content_pos, filter_strength, prescreen, split_pos, PrescreenOptions,
    ResponseCount, StrengthClass, StrengthRule,
};

fn count(cue: &str, response: &str, n: u64, total: u64, pc: &str, pr: &str) -> ResponseCount {
    ResponseCount {
        cue: cue.into(),
        response: response.into(),
        n_response: n,
        n_cue_presentations: total,
        pos_cue: pc.into(),
        pos_response: pr.into(),
    }
}

fn main() -> conceptmap::Result<()> {
    let records = vec![
        count("sun", "moon", 49, 283, "noun", "noun"),
        count("moon", "sun", 22, 296, "noun", "noun"),
        count("sun", "hot", 80, 283, "noun", "adjective"),
        count("hot", "sun", 30, 150, "adjective", "noun"),
        count("hot", "cold", 60, 150, "adjective", "adjective"),
        count("cold", "hot", 70, 160, "adjective", "adjective"),
        count("moon", "night", 40, 296, "noun", "noun"),
        count("run", "walk", 33, 120, "verb", "verb"),
    ];
    let probs = compute_probabilities(&records)?;
    let edges = build_edges(&probs);
    println!("{} directed probabilities, {} bidirectional edges", probs.len(), edges.len());
    for e in &edges {
        println!("  {} - {}: fsa {:.2} bsa {:.2} weight {:.2}", e.word_a, e.word_b, e.fsa, e.bsa, e.weight);
    }

    let mut tags = BTreeMap::new();
    for r in &records {
        tags.insert(r.cue.clone(), r.pos_cue.clone());
        tags.insert(r.response.clone(), r.pos_response.clone());
    }
    let opts = PrescreenOptions {
        min_probability: 0.05,
        rule: StrengthRule::Max,
    };
    let (table, summary) = prescreen(&edges, None, &content_pos(&tags), opts);
    println!("retained {} edges over {} words", summary.retained_edges, summary.retained_words);

    for class in StrengthClass::ALL {
        let t = filter_strength(&table, class, StrengthRule::Max);
        println!("{:>8}: {} edges", class.as_str(), t.edges().len());
    }
    for (pos, t) in split_pos(&table) {
        println!("{:>9}: {} words, {} edges", pos.as_str(), t.word_count(), t.edges().len());
    }
    Ok(())
}
