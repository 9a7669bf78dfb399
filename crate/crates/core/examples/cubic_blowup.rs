//! Watches a perturbed cubic line soliton focus until the energy-drift stop
//! fires. Pass `nx nt` to change the resolution (default 1024 and 10000).

use cqnls::config::InitialSpec;
use cqnls::integrator::{MemorySnapshots, Simulation};
use cqnls::scenarios::find;

fn main() -> cqnls::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().ok());
    let mut cfg = find("cubic-blowup-plus")?.config;
    cfg.grid.nx = args.next().flatten().unwrap_or(1024);
    cfg.time.steps = args.next().flatten().unwrap_or(10_000);
    if let InitialSpec::Gaussian { lambda } = cfg.initial {
        println!("cubic, omega = {}, lambda = {lambda:.4}", cfg.omega);
    }
    let initial = cfg.prepare_initial()?.field;
    let mut sim = Simulation::new(&initial, cfg.evolution()?)?;
    let mut last_print = -1.0;
    let record = sim.run(&mut MemorySnapshots::default(), &mut |s| {
        if s.t - last_print >= 0.25 {
            println!("t = {:6.3}  |u|_inf = {:8.4}  dE = {:.2e}", s.t, s.sup_norm, s.delta_e);
            last_print = s.t;
        }
    })?;
    let last = record.last();
    println!("{} with |u|_inf = {:.3}", record.termination, last.sup_norm);
    Ok(())
}
