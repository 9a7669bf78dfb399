//! Runs the reduced-resolution wide-torus experiment, where the line soliton
//! breaks up into a lump, and writes run.csv, verdict.csv and snapshots.

use cqnls::scenarios::{find, run_scenario};

fn main() -> cqnls::Result<()> {
    let id = std::env::args().nth(1).unwrap_or_else(|| "deform-cq-Ly3-desk".into());
    let out = std::env::temp_dir().join(format!("cqnls-{id}"));
    let report = run_scenario(&find(&id)?, Some(&out))?;
    for c in &report.checks {
        println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    let v = &report.verdict;
    println!(
        "{}: {} peak(s), anisotropy {:.3}, transverse modulation {:.3}",
        v.classification, v.peak_count, v.anisotropy, v.modulation
    );
    println!("artifacts in {}", out.display());
    Ok(())
}
