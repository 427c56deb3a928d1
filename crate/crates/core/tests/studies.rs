//! Study-level behavior on planted datasets.

use conceptmap::embed::{EmbeddingTable, WordVector};
use conceptmap::norms::{Pos, ResponseCount};
use conceptmap::studies::{
    run_noise_study, run_sampling_study, run_study1, run_study2, Dataset, PosSelection, StudyConfig, ThresholdMode,
};
use conceptmap::synth::{generate, SynthSpec};
use conceptmap::Error;

fn planted(spec: SynthSpec) -> Dataset {
    generate(&spec).unwrap().dataset().unwrap()
}

#[test]
fn study2_strength_raises_modularity_and_uses_pos_thresholds() {
    let data = planted(SynthSpec {
        concepts: 15,
        seed: 21,
        ..SynthSpec::default()
    });
    let out = run_study2(&StudyConfig::default(), &data).unwrap();
    assert_eq!(out.cells.len(), 32);
    let report = |name: &str| {
        let c = out.cells.iter().find(|c| c.cell == name).unwrap();
        (c.report.clone().unwrap_or_else(|| panic!("{name}: {:?}", c.error)), c.threshold)
    };
    for screening in ["screened", "unscreened"] {
        for group in ["heterogeneous", "noun", "verb", "adjective"] {
            let (none, _) = report(&format!("{screening}/{group}/none"));
            let (high, _) = report(&format!("{screening}/{group}/high"));
            for (a, b) in [(&high.stats_wa, &none.stats_wa), (&high.stats_we, &none.stats_we)] {
                assert!(a.modularity.unwrap() >= b.modularity.unwrap() - 1e-12, "{screening}/{group}");
            }
        }
    }
    for (pos, t) in [("noun", 0.77), ("verb", 0.78), ("adjective", 0.81)] {
        assert_eq!(report(&format!("screened/{pos}/high")).1, Some(t));
    }
}

#[test]
fn study2_screening_barely_moves_ic() {
    // One misencoded word among ~120.
    let data = planted(SynthSpec {
        concepts: 30,
        misencoded: 1,
        seed: 5,
        ..SynthSpec::default()
    });
    let out = run_study2(&StudyConfig::default(), &data).unwrap();
    assert_eq!(out.excluded_vectors.len(), 1);
    let ic = |name: &str| {
        out.cells.iter().find(|c| c.cell == name).unwrap().report.as_ref().unwrap().ic_percent
    };
    for class in ["none", "low", "moderate", "high"] {
        let cell = format!("heterogeneous/{class}");
        let (s, u) = (ic(&format!("screened/{cell}")), ic(&format!("unscreened/{cell}")));
        assert!((s - u).abs() < 2.0, "{cell}: screened {s} vs unscreened {u}");
    }
}

#[test]
fn sweep_mode_picks_grid_points() {
    let data = planted(SynthSpec {
        concepts: 10,
        jitter: 0.3,
        seed: 8,
        ..SynthSpec::default()
    });
    let cfg = StudyConfig {
        threshold_mode: ThresholdMode::Sweep,
        ..StudyConfig::default()
    };
    let grid = cfg.sweep_grid();
    let out = run_study2(&cfg, &data).unwrap();
    for c in out.cells.iter().filter(|c| c.group != "heterogeneous") {
        let t = c.threshold.unwrap();
        assert!(grid.contains(&t), "{}: {t}", c.cell);
    }
}

#[test]
fn prescreen_failure_is_tagged() {
    let mut emb = EmbeddingTable::new(2).unwrap();
    emb.insert("unrelated", WordVector::new(vec![1.0, 0.0]).unwrap()).unwrap();
    let records: Vec<ResponseCount> = [("a", "b"), ("b", "a")]
        .iter()
        .map(|(c, r)| ResponseCount {
            cue: c.to_string(),
            response: r.to_string(),
            n_response: 30,
            n_cue_presentations: 100,
            pos_cue: "noun".into(),
            pos_response: "noun".into(),
        })
        .collect();
    let data = Dataset::from_parts(&records, &Dataset::tags_of(&records), emb, Default::default()).unwrap();
    let err = run_study1(&StudyConfig::default(), &data).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "prescreen", .. }), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn sampling_curves_cover_the_grid_and_repeat() {
    let data = planted(SynthSpec {
        concepts: 25,
        jitter: 0.3,
        seed: 13,
        ..SynthSpec::default()
    });
    let cfg = StudyConfig {
        pos: PosSelection::Only(Pos::Noun),
        sample_sizes: vec![3, 5, 15, 16],
        sampling_replicates: 4,
        ..StudyConfig::default()
    };
    let a = run_sampling_study(&cfg, &data).unwrap();
    let grid = cfg.sweep_grid();
    assert_eq!(a.available_concepts[&Pos::Noun], 15);
    assert_eq!(a.skipped, vec![(Pos::Noun, 16)]);
    for r in &a.results {
        let ts: Vec<f64> = r.curve.iter().map(|p| p.threshold).collect();
        assert_eq!(ts, grid);
        let best = r.curve.iter().map(|p| p.mean_ic).fold(f64::MIN, f64::max);
        assert_eq!(r.optimal_mean_ic, best);
        assert!(grid.contains(&r.optimal_threshold));
    }
    assert_eq!(a.rows.len(), 3 * 4 * grid.len());
    let b = run_sampling_study(&cfg, &data).unwrap();
    assert_eq!(a.results, b.results);
    assert_eq!(a.rows, b.rows);
}

#[test]
fn noise_between_clusters_never_lowers_ic() {
    let data = planted(SynthSpec {
        concepts: 20,
        jitter: 0.2,
        weak_words: 60,
        seed: 17,
        ..SynthSpec::default()
    });
    let cfg = StudyConfig {
        noise_levels: vec![0, 4, 8, 12],
        noise_replicates: 6,
        ..StudyConfig::default()
    };
    let out = run_noise_study(&cfg, &data).unwrap();
    assert_eq!(out.curves.len(), 3);
    for c in &out.curves {
        assert_eq!(c.points[0].level, 0);
        assert_eq!(c.points[0].mean_ic, c.baseline_ic);
        for p in &c.points {
            assert!(p.mean_ic >= c.baseline_ic - 1e-9, "{} +{}: {} < {}", c.pos, p.level, p.mean_ic, c.baseline_ic);
        }
    }
}

#[test]
fn noise_without_weak_words_fails_per_pos() {
    let data = planted(SynthSpec {
        concepts: 10,
        seed: 1,
        ..SynthSpec::default()
    });
    let err = run_noise_study(&StudyConfig::default(), &data).unwrap_err();
    assert!(err.to_string().contains("weak-word pool"), "{err}");
}
