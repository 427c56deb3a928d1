//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! gating criterion fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use conceptmap::cluster::{
    agglomerate, dynamic_tree_cut, infomap_partition, map_equation, Partition, TreeCut,
};
use conceptmap::converge::{
    informational_convergence, match_clusters, semantic_convergence, ClusterSummary, MatchingMode,
};
use conceptmap::embed::{cosine, EmbeddingTable, WordVector};
use conceptmap::graph::{modularity, we_graph, Edge, GraphKind, ThresholdTable, WeightedGraph};
use conceptmap::norms::{build_edges, compute_probabilities, Pos, ResponseCount, StrengthClass};
use conceptmap::studies::{run_noise_study, run_sampling_study, run_study1, Dataset, StudyConfig};
use conceptmap::synth::{generate, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn graph(n: usize, edges: &[(usize, usize, f64)]) -> WeightedGraph {
    WeightedGraph::new(
        GraphKind::WA,
        (0..n).map(|i| format!("n{i}")).collect(),
        edges.iter().map(|&(a, b, weight)| Edge { a, b, weight }).collect(),
    )
    .expect("valid fixture graph")
}

fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let k = rng.gen_range(1..=n);
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// Mutual information over joint entropy terms computed from an explicit
/// contingency table, in nats.
fn nmi_oracle(a: &[usize], e: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut table: HashMap<(usize, usize), f64> = HashMap::new();
    let mut row: HashMap<usize, f64> = HashMap::new();
    let mut col: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(e) {
        *table.entry((x, y)).or_default() += 1.0;
        *row.entry(x).or_default() += 1.0;
        *col.entry(y).or_default() += 1.0;
    }
    let h = |m: &HashMap<usize, f64>| -> f64 { m.values().map(|c| -(c / n) * (c / n).ln()).sum() };
    let (ha, he) = (h(&row), h(&col));
    if ha + he == 0.0 {
        return 1.0;
    }
    let mi: f64 = table
        .iter()
        .map(|(&(x, y), &c)| (c / n) * ((c / n) / ((row[&x] / n) * (col[&y] / n))).ln())
        .sum();
    2.0 * mi / (ha + he)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=12);
        let a = random_labels(&mut rng, n);
        let e = random_labels(&mut rng, n);
        let ic = informational_convergence(&Partition::from_labels(&a), &Partition::from_labels(&e))
            .map_err(|x| x.to_string())?
            .percent;
        let oracle = 100.0 * nmi_oracle(&a, &e);
        worst = worst.max((ic - oracle).abs());
    }
    ensure(worst <= 1e-9, || format!("max |IC - 100 NMI| = {worst:e}"))?;
    let ic = |a: &[usize], e: &[usize]| {
        informational_convergence(&Partition::from_labels(a), &Partition::from_labels(e))
            .unwrap()
            .percent
    };
    let same = ic(&[0, 1, 1, 2, 0], &[5, 4, 4, 3, 5]);
    let indep = ic(&[0, 0, 1, 1], &[0, 1, 0, 1]);
    let eighty = ic(&[0, 0, 1, 1], &[0, 0, 1, 2]);
    ensure(same == 100.0, || format!("identical partitions gave {same}"))?;
    ensure(indep.abs() < 1e-9, || format!("independent partitions gave {indep}"))?;
    ensure((eighty - 80.0).abs() < 1e-6, || format!("{{12|34}} vs {{12|3|4}} gave {eighty}"))?;
    Ok(format!("1000 random pairs, max deviation {worst:.1e}; fixtures 100 / 0 / {eighty:.6}"))
}

/// All set partitions of `0..n` as restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            if i == 0 && c > 0 {
                break;
            }
            cur.push(c);
            rec(i + 1, n, if c > max || i == 0 { c } else { max }, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, 0, &mut Vec::new(), &mut out);
    out
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let partitions: Vec<Vec<Vec<usize>>> = (0..=8).map(set_partitions).collect();
    // Bell numbers B(1..=8).
    let bell: Vec<usize> = partitions[1..].iter().map(Vec::len).collect();
    ensure(bell == [1, 2, 5, 15, 52, 203, 877, 4140], || format!("enumeration sizes {bell:?}"))?;
    let (mut hits, mut total, mut worst_gap): (usize, usize, f64) = (0, 0, 0.0);
    for _ in 0..200 {
        let n = rng.gen_range(3..=8);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if rng.gen_bool(0.45) {
                    edges.push((a, b, rng.gen_range(0.1..1.0)));
                }
            }
        }
        if edges.is_empty() {
            edges.push((0, 1, 1.0));
        }
        let g = graph(n, &edges);
        let one = map_equation(&g, &Partition::one_cluster(n)).map_err(|e| e.to_string())?;
        ensure(one.index_codelength == 0.0, || "one-module index term is nonzero".into())?;
        let best = partitions[n]
            .iter()
            .map(|l| map_equation(&g, &Partition::from_labels(l)).unwrap().codelength)
            .fold(f64::INFINITY, f64::min);
        let seed = rng.gen();
        let found = map_equation(&g, &infomap_partition(&g, seed)).unwrap().codelength;
        let gap = (found - best) / best.max(f64::MIN_POSITIVE);
        total += 1;
        if found <= best + 1e-9 {
            hits += 1;
        } else {
            worst_gap = worst_gap.max(gap);
        }
    }
    let rate = hits as f64 / total as f64;
    ensure(rate >= 0.95, || format!("optimum reached on {hits}/{total}"))?;
    ensure(worst_gap <= 0.02, || format!("worst miss {:.3}% above optimum", 100.0 * worst_gap))?;
    Ok(format!("optimum on {hits}/{total} graphs, worst miss {:.3}%", 100.0 * worst_gap))
}

fn ring_of_cliques(k: usize, size: usize) -> (WeightedGraph, Partition) {
    let mut edges = Vec::new();
    for c in 0..k {
        for i in 0..size {
            for j in (i + 1)..size {
                edges.push((c * size + i, c * size + j, 1.0));
            }
        }
        edges.push((c * size, ((c + 1) % k) * size + 1, 0.05));
    }
    let planted: Vec<usize> = (0..k * size).map(|v| v / size).collect();
    (graph(k * size, &edges), Partition::from_labels(&planted))
}

fn two_bundles(rng: &mut ChaCha8Rng, size: usize) -> (Vec<String>, EmbeddingTable, Partition) {
    let dim = 16;
    let mut table = EmbeddingTable::new(dim).unwrap();
    let mut words = Vec::new();
    for b in 0..2 {
        for i in 0..size {
            let mut v = vec![0.0; dim];
            v[b] = 1.0;
            for x in v.iter_mut().skip(2).take(8 * (b + 1)).skip(8 * b) {
                *x = rng.gen_range(-0.05..0.05);
            }
            let w = format!("b{b}_{i}");
            table.insert(w.clone(), WordVector::new(v).unwrap()).unwrap();
            words.push(w);
        }
    }
    let planted: Vec<usize> = (0..2 * size).map(|v| v / size).collect();
    (words, table, Partition::from_labels(&planted))
}

fn criterion_3() -> Outcome {
    let mut cases = 0;
    for k in 2..=8 {
        for size in 4..=10 {
            let (g, planted) = ring_of_cliques(k, size);
            for seed in [0u64, 1, 7, 42] {
                let p = infomap_partition(&g, seed);
                ensure(p == planted, || format!("k={k} size={size} seed={seed}: {} clusters", p.n_clusters()))?;
                cases += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = TreeCut::default();
    for size in 2..=12 {
        let (words, table, planted) = two_bundles(&mut rng, size);
        let d = agglomerate(&words, &table).map_err(|e| e.to_string())?;
        let p = dynamic_tree_cut(&d, &words, &table, &params).map_err(|e| e.to_string())?;
        ensure(p == planted, || format!("two bundles of {size}: {} clusters", p.n_clusters()))?;
    }
    Ok(format!("{cases} ring-of-cliques runs and 11 bundle fixtures recovered exactly"))
}

fn criterion_4() -> Outcome {
    let triangles = graph(6, &[(0, 1, 1.), (1, 2, 1.), (0, 2, 1.), (3, 4, 1.), (4, 5, 1.), (3, 5, 1.)]);
    let k4 = graph(4, &[(0, 1, 1.), (0, 2, 1.), (0, 3, 1.), (1, 2, 1.), (1, 3, 1.), (2, 3, 1.)]);
    let q = |g: &WeightedGraph, l: &[usize]| modularity(g, &Partition::from_labels(l)).unwrap();
    let a = q(&triangles, &[0, 0, 0, 1, 1, 1]);
    let b = q(&triangles, &[0; 6]);
    let c = q(&k4, &[0, 0, 1, 1]);
    ensure((a - 0.5).abs() <= 1e-9, || format!("two triangles Q = {a}"))?;
    ensure(b.abs() <= 1e-12, || format!("trivial Q = {b}"))?;
    ensure((c + 1.0 / 6.0).abs() <= 1e-9, || format!("K4 Q = {c}"))?;
    Ok(format!("Q = {a:.9}, {b:.9}, {c:.9}"))
}

fn criterion_5() -> Outcome {
    let rec = |cue: &str, response: &str, n, total| ResponseCount {
        cue: cue.into(),
        response: response.into(),
        n_response: n,
        n_cue_presentations: total,
        pos_cue: "noun".into(),
        pos_response: "noun".into(),
    };
    let probs = compute_probabilities(&[rec("outer", "space", 49, 283), rec("space", "outer", 22, 296)])
        .map_err(|e| e.to_string())?;
    let edges = build_edges(&probs);
    ensure(edges.len() == 1, || format!("{} edges", edges.len()))?;
    let e = &edges[0];
    let r2 = |x: f64| (x * 100.0).round() / 100.0;
    ensure(r2(e.fsa) == 0.17 && r2(e.bsa) == 0.07, || format!("fsa {} bsa {}", e.fsa, e.bsa))?;
    ensure(r2(e.weight) == 0.12, || format!("weight {}", e.weight))?;
    Ok(format!("FSA {:.2}, BSA {:.2}, weight {:.2}", e.fsa, e.bsa, e.weight))
}

fn criterion_6() -> Outcome {
    let expected: [(Pos, [f64; 5]); 3] = [
        (Pos::Noun, [0.65, 0.71, 0.72, 0.74, 0.77]),
        (Pos::Verb, [0.67, 0.72, 0.74, 0.75, 0.78]),
        (Pos::Adjective, [0.68, 0.75, 0.77, 0.79, 0.81]),
    ];
    for (pos, values) in expected {
        let table = ThresholdTable::published(pos).ok_or("missing published table")?;
        let got: Vec<f64> = table.thresholds.iter().map(|(_, t)| *t).collect();
        ensure(got == values, || format!("{pos} table {got:?}"))?;
    }
    let high = ThresholdTable::published(Pos::Noun)
        .unwrap()
        .for_class(Some(StrengthClass::High))
        .ok_or("no High threshold")?;
    ensure(high == 0.77, || format!("High noun threshold {high}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut emb = EmbeddingTable::new(6).unwrap();
    let mut words = Vec::new();
    for i in 0..80 {
        let base = i % 3;
        let v: Vec<f64> = (0..6)
            .map(|d| if d == base { 1.0 } else { rng.gen_range(-0.6..0.6) })
            .collect();
        let w = format!("noun{i}");
        emb.insert(w.clone(), WordVector::new(v).unwrap()).unwrap();
        words.push(w);
    }
    let g = we_graph(&words, &emb, Some(high)).map_err(|e| e.to_string())?;
    let mut kept = 0;
    for e in g.edges() {
        let c = cosine(emb.vector(&words[e.a]).unwrap(), emb.vector(&words[e.b]).unwrap()).unwrap();
        ensure(c >= 0.77, || format!("edge {}-{} cosine {c}", e.a, e.b))?;
        kept += 1;
    }
    ensure(kept > 0, || "fixture retained no edges".into())?;
    Ok(format!("published tables match; {kept} High noun edges all >= .77"))
}

fn summaries(vectors: &[Vec<f64>]) -> Vec<ClusterSummary> {
    vectors
        .iter()
        .enumerate()
        .map(|(i, v)| ClusterSummary {
            cluster_id: i,
            members: vec![],
            vector: WordVector::new(v.clone()).unwrap(),
            label: format!("c{i}"),
        })
        .collect()
}

fn exhaustive_matching(sim: &[Vec<f64>], t: f64) -> Vec<Vec<(usize, usize)>> {
    fn rec(sim: &[Vec<f64>], t: f64, i: usize, used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if i == sim.len() {
            out.push(cur.clone());
            return;
        }
        rec(sim, t, i + 1, used, cur, out);
        for j in 0..sim[i].len() {
            if !used[j] && sim[i][j] >= t {
                used[j] = true;
                cur.push((i, j));
                rec(sim, t, i + 1, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(sim, t, 0, &mut vec![false; sim[0].len()], &mut Vec::new(), &mut out);
    out
}

fn criterion_7() -> Outcome {
    let base = vec![vec![1.0, 0.0, 0.2], vec![0.0, 1.0, 0.1], vec![0.3, 0.3, 1.0]];
    let same = semantic_convergence(&summaries(&base), &summaries(&base), 0.726, MatchingMode::Optimal)
        .map_err(|e| e.to_string())?;
    ensure(same.percent == 100.0, || format!("identical lists SC = {}", same.percent))?;
    let far = semantic_convergence(
        &summaries(&[vec![1.0, 0.0]]),
        &summaries(&[vec![0.0, 1.0], vec![-1.0, 0.2]]),
        0.726,
        MatchingMode::Optimal,
    )
    .map_err(|e| e.to_string())?;
    ensure(far.percent == 0.0, || format!("below-threshold SC = {}", far.percent))?;

    let sim = vec![vec![0.9, 0.1], vec![0.8, 0.2], vec![0.3, 0.75]];
    let pairs = match_clusters(&sim, 0.726, MatchingMode::Optimal);
    let best = exhaustive_matching(&sim, 0.726)
        .into_iter()
        .max_by(|x, y| {
            let s = |m: &Vec<(usize, usize)>| m.iter().map(|&(i, j)| sim[i][j]).sum::<f64>();
            x.len().cmp(&y.len()).then(s(x).total_cmp(&s(y)))
        })
        .unwrap();
    ensure(pairs == vec![(0, 0), (2, 1)] && pairs == best, || format!("3x2 matching {pairs:?}, oracle {best:?}"))?;
    let sc = 100.0 * pairs.len() as f64 / 2.0;
    ensure(sc == 100.0, || format!("3x2 SC = {sc}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let mk = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            let k = rng.gen_range(1..8);
            (0..k).map(|_| (0..4).map(|_| rng.gen_range(0.0..1.0)).collect()).collect()
        };
        let (a, e) = (summaries(&mk(&mut rng)), summaries(&mk(&mut rng)));
        let mut last = f64::INFINITY;
        for step in 0..=35 {
            let t = 0.60 + 0.01 * step as f64;
            let s = semantic_convergence(&a, &e, t, MatchingMode::Optimal).unwrap().percent;
            ensure(s <= last, || format!("SC rose from {last} to {s} at threshold {t:.2}"))?;
            last = s;
        }
    }
    Ok("identical 100, disjoint 0, 3x2 example 100 via {(0,0),(2,1)}, monotone on 100 fixtures".into())
}

/// End-to-end runs over planted datasets of 5 to 50 concepts.
fn criterion_8() -> Outcome {
    let mut detail = Vec::new();
    for concepts in (5..=50).step_by(5) {
        let data = generate(&SynthSpec {
            concepts,
            weak_words: 2 * concepts,
            seed: concepts as u64,
            ..SynthSpec::default()
        })
        .map_err(|e| e.to_string())?
        .dataset()
        .map_err(|e| e.to_string())?;
        let cfg = StudyConfig {
            noise_levels: vec![0, 2],
            noise_replicates: 3,
            ..StudyConfig::default()
        };
        let r = run_study1(&cfg, &data).map_err(|e| format!("C={concepts}: {e}"))?.report;
        ensure(r.ic_percent == 100.0 && r.sc_percent == 100.0, || {
            format!("C={concepts}: IC {} SC {}", r.ic_percent, r.sc_percent)
        })?;
        let noise = run_noise_study(&cfg, &data).map_err(|e| format!("C={concepts} noise: {e}"))?;
        for c in &noise.curves {
            let zero = c.points.iter().find(|p| p.level == 0).ok_or("level 0 missing")?;
            ensure(zero.mean_ic == c.baseline_ic && zero.sd_ic == 0.0, || {
                format!("C={concepts} {}: level 0 {} vs baseline {}", c.pos, zero.mean_ic, c.baseline_ic)
            })?;
        }
    }
    detail.push("run 1 IC = SC = 100 for C = 5..50; noise level 0 equals baseline".to_string());

    // 85 concepts give 51 noun concepts, enough to sample every k up to 50.
    let data = generate(&SynthSpec {
        concepts: 85,
        seed: 85,
        ..SynthSpec::default()
    })
    .and_then(|d| d.dataset())
    .map_err(|e| e.to_string())?;
    let cfg = StudyConfig {
        sampling_replicates: 10,
        ..StudyConfig::default()
    };
    let sampling = run_sampling_study(&cfg, &data).map_err(|e| e.to_string())?;
    for k in (5..=50).step_by(5) {
        ensure(sampling.results.iter().any(|r| r.concept_count == k), || format!("k={k} never sampled"))?;
    }
    let mut floor = f64::INFINITY;
    for r in &sampling.results {
        let worst = r.curve.iter().map(|p| p.mean_ic).fold(f64::INFINITY, f64::min);
        ensure(worst >= 90.0, || format!("{} k={}: mean IC {worst} below 90", r.pos, r.concept_count))?;
        floor = floor.min(worst);
    }
    detail.push(format!(
        "sampling mean IC >= {floor:.1} over {} (POS, k) curves, k = 5..50",
        sampling.results.len()
    ));
    Ok(detail.join("; "))
}

/// Best-effort check on real norms and embeddings named by a config file.
fn criterion_9() -> Verdict {
    let Some(path) = std::env::var_os(REAL_CONFIG_ENV) else {
        return Verdict::Skip(format!("set {REAL_CONFIG_ENV} to a study config over real data"));
    };
    let run = || -> Outcome {
        let cfg = StudyConfig::load(std::path::Path::new(&path)).map_err(|e| e.to_string())?;
        let data = Dataset::load(&cfg).map_err(|e| e.to_string())?;
        let r = run_study1(&cfg, &data).map_err(|e| e.to_string())?.report;
        let summary = format!("IC {:.1}, SC {:.1}", r.ic_percent, r.sc_percent);
        ensure((76.0..=85.0).contains(&r.ic_percent) && (85.0..=100.0).contains(&r.sc_percent), || {
            format!("{summary}, expected IC in [76, 85] and SC in [85, 100]")
        })?;
        Ok(summary)
    };
    run().into()
}

const REAL_CONFIG_ENV: &str = "CONCEPTMAP_REAL_CONFIG";

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

impl From<Outcome> for Verdict {
    fn from(o: Outcome) -> Self {
        match o {
            Ok(d) => Verdict::Pass(d),
            Err(e) => Verdict::Fail(e),
        }
    }
}

struct Criterion {
    id: &'static str,
    limit: Option<Duration>,
    /// Informative criteria print a verdict but never fail the suite.
    gating: bool,
    run: fn() -> Verdict,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: "1 IC oracle", limit: Some(Duration::from_secs(10)), gating: true, run: || criterion_1().into() },
        Criterion { id: "2 map-equation oracle", limit: Some(Duration::from_secs(120)), gating: true, run: || criterion_2().into() },
        Criterion { id: "3 planted recovery", limit: Some(Duration::from_secs(30)), gating: true, run: || criterion_3().into() },
        Criterion { id: "4 modularity", limit: None, gating: true, run: || criterion_4().into() },
        Criterion { id: "5 FSA/BSA fixture", limit: None, gating: true, run: || criterion_5().into() },
        Criterion { id: "6 threshold application", limit: None, gating: true, run: || criterion_6().into() },
        Criterion { id: "7 SC behavior", limit: None, gating: true, run: || criterion_7().into() },
        Criterion { id: "8 end-to-end synthetic", limit: Some(Duration::from_secs(300)), gating: true, run: || criterion_8().into() },
        Criterion { id: "9 real data (informative)", limit: None, gating: false, run: criterion_9 },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let verdict = (c.run)();
        let elapsed = start.elapsed();
        let verdict = match (verdict, c.limit) {
            (Verdict::Pass(_), Some(limit)) if elapsed > limit => {
                Verdict::Fail(format!("took {elapsed:.1?}, limit {limit:?}"))
            }
            (v, _) => v,
        };
        match verdict {
            Verdict::Pass(detail) => println!("PASS  criterion {}: {detail} [{elapsed:.2?}]", c.id),
            Verdict::Skip(why) => println!("SKIP  criterion {}: {why}", c.id),
            Verdict::Fail(why) => {
                if c.gating {
                    failed += 1;
                }
                println!("FAIL  criterion {}: {why} [{elapsed:.2?}]", c.id);
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
