//! Screening x part of speech x strength class on planted data with a few
//! misencoded vectors that synonym screening should catch.

use conceptmap::studies::{run_study2, StudyConfig};
use conceptmap::synth::{generate, SynthSpec};

fn main() -> conceptmap::Result<()> {
    let synth = generate(&SynthSpec {
        concepts: 15,
        misencoded: 4,
        seed: 2,
        ..SynthSpec::default()
    })?;
    println!("misencoded: {:?}", synth.misencoded);
    let out = run_study2(&StudyConfig::default(), &synth.dataset()?)?;
    println!("screening excluded: {:?}", out.excluded_vectors);
    for (pos, cal) in &out.calibration {
        let bands: Vec<String> = cal.bands.iter().map(|b| format!("{} {:.2}", b.band.label(), b.mean_cosine)).collect();
        println!("calibration {pos}: {}", bands.join(", "));
    }
    for cell in &out.cells {
        match (&cell.report, &cell.error) {
            (Some(r), _) => println!(
                "{:<32} IC {:>6.2}  SC {:>6.2}  Q(WA) {:.3}  threshold {}",
                cell.cell,
                r.ic_percent,
                r.sc_percent,
                r.stats_wa.modularity.unwrap_or(f64::NAN),
                cell.threshold.map_or("-".into(), |t| format!("{t:.2}"))
            ),
            (None, Some(e)) => println!("{:<32} failed: {e}", cell.cell),
            (None, None) => unreachable!("a cell has a report or an error"),
        }
    }
    Ok(())
}
