//! Mass of the line soliton per unit of torus length against the ground-state
//! mass, and the torus length at which the two cross.

use std::f64::consts::PI;

use cqnls::diagnostics::critical_torus_length;
use cqnls::groundstate::{ground_state_curves, GroundStateOptions};
use cqnls::profiles::{Model, SolitonProfile1D};

fn main() -> cqnls::Result<()> {
    let opts = GroundStateOptions::default();
    let omegas: Vec<f64> = (1..=9).map(|i| 0.02 * i as f64).collect();
    let rows = ground_state_curves(Model::CubicQuintic, &omegas, &opts);
    println!("{:>6} {:>12} {:>12} {:>10} {:>8}", "omega", "2pi M_1d", "M(Q)", "|Q|_inf", "L_crit");
    for row in &rows {
        let line = SolitonProfile1D::cubic_quintic(row.omega)?;
        match &row.outcome {
            Ok(s) => println!(
                "{:>6.2} {:>12.4} {:>12.4} {:>10.4} {:>8.4}",
                row.omega,
                2.0 * PI * line.mass_1d(),
                s.mass,
                s.amplitude,
                s.mass / (2.0 * PI * line.mass_1d())
            ),
            Err(e) => println!("{:>6.2} failed: {e}", row.omega),
        }
    }
    println!("L_crit(0.1) = {:.4}", critical_torus_length(Model::CubicQuintic, 0.1, &opts)?);
    Ok(())
}
