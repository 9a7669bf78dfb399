//! Propagates the exact line soliton and the radial ground state for one time
//! unit and compares with the exact phase rotation.

use std::time::Instant;

use cqnls::grid::Grid2D;
use cqnls::groundstate::{refine_periodic, solve_ground_state, GroundStateOptions};
use cqnls::integrator::{evolve, Evolution};
use cqnls::profiles::{exact_line_soliton, line_soliton_field, Model, SolitonProfile1D};

fn main() -> cqnls::Result<()> {
    let omega = 0.1;
    let profile = SolitonProfile1D::cubic_quintic(omega)?;
    let grid = Grid2D::new(40.0, 3.0, 1 << 10, 1 << 5)?;
    let start = Instant::now();
    let run = evolve(&line_soliton_field(&profile, grid), &Evolution::new(Model::CubicQuintic, grid, 1.0, 1000))?;
    let err = run.final_state.max_distance(&exact_line_soliton(&profile, grid, 1.0));
    println!(
        "line soliton: max error {err:.3e}, energy drift {:.3e} ({:.2?})",
        run.record.max_energy_drift(),
        start.elapsed()
    );

    let gs = solve_ground_state(Model::CubicQuintic, omega, &GroundStateOptions::default())?;
    let grid = Grid2D::new(10.0, 10.0, 1 << 8, 1 << 8)?;
    let radial = gs.embed(grid)?;
    let periodic = refine_periodic(&gs, grid, 1e-12)?;
    println!(
        "periodic correction: {:.3e} after {} Newton steps, residual {:.3e}",
        periodic.field.max_distance(&radial),
        periodic.newton_iterations,
        periodic.residual_norm
    );
    let initial = periodic.field;
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let start = Instant::now();
    let run = evolve(&initial, &Evolution::new(Model::CubicQuintic, grid, 1.0, steps))?;
    let exact = initial.scaled(num_complex::Complex64::from_polar(1.0, omega));
    println!(
        "ground state: max error {:.3e}, energy drift {:.3e}, mass drift {:.3e} ({:.2?})",
        run.final_state.max_distance(&exact),
        run.record.max_energy_drift(),
        run.record.max_mass_drift(),
        start.elapsed()
    );
    Ok(())
}
