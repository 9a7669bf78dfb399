//! Evolves a line soliton with a small negative bump on a narrow torus, writes
//! snapshots to a temporary directory and fits a line soliton to each.

use cqnls::diagnostics::{fit_line_soliton_with, AmplitudeEstimate};
use cqnls::integrator::{DirectorySnapshots, Simulation};
use cqnls::scenarios::find;
use cqnls::snapshot;

fn main() -> cqnls::Result<()> {
    let cfg = find("stable-Ly2-minus")?.config;
    let dir = std::env::temp_dir().join("cqnls-stable-fit");
    std::fs::create_dir_all(&dir).map_err(|e| cqnls::Error::io(&dir, e))?;
    let initial = cfg.prepare_initial()?.field;
    let mut sim = Simulation::new(&initial, cfg.evolution()?)?;
    let record = sim.run(&mut DirectorySnapshots { dir: dir.clone() }, &mut |_| {})?;
    println!("{}; mass drift {:.2e}", record.termination, record.max_mass_drift());
    for path in record.snapshots.iter().filter_map(|s| s.path.as_ref()) {
        let (field, t) = snapshot::read(path)?;
        let mean = fit_line_soliton_with(&field, cfg.model, AmplitudeEstimate::RowMean)?;
        let peak = fit_line_soliton_with(&field, cfg.model, AmplitudeEstimate::Peak)?;
        println!(
            "t = {t:5.1}  omega* = {:.5} (row mean) / {:.5} (peak), residual {:.2}%",
            mean.omega_star,
            peak.omega_star,
            100.0 * peak.relative_residual()
        );
    }
    Ok(())
}
