use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cqnls::config::RunConfig;
use cqnls::diagnostics::{critical_torus_length, fit_line_soliton};
use cqnls::groundstate::{ground_state_curves, solve_ground_state, write_curves_csv, GroundStateOptions};
use cqnls::profiles::{Model, SolitonProfile1D};
use cqnls::scenarios::{registry, resolve, run_scenario, Overrides, Scenario, ScenarioReport};
use cqnls::{snapshot, Error};

/// Line and lump solitary waves of the cubic-quintic NLS on a waveguide.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Resolution {
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Number of time steps.
    #[arg(long)]
    nt: Option<usize>,
    /// Final time (keeps the time step unless --nt is also given).
    #[arg(long)]
    t_final: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML configuration.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        resolution: Resolution,
    },
    /// Solve for a radial ground state and print its scalars.
    Groundstate {
        #[arg(long, default_value = "cubic-quintic")]
        model: Model,
        #[arg(long)]
        omega: f64,
        /// Write `r,Q` on the collocation nodes.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mass and energy of line solitons and ground states over a frequency range.
    ProfileCurves {
        #[arg(long, default_value = "cubic-quintic")]
        model: Model,
        #[arg(long, default_value_t = 0.01)]
        omega_min: f64,
        #[arg(long, default_value_t = 0.185)]
        omega_max: f64,
        #[arg(long, default_value_t = 36)]
        count: usize,
        #[arg(long, default_value = "curves")]
        out: PathBuf,
    },
    /// Fit a line soliton to a snapshot.
    Fit {
        snapshot: PathBuf,
        #[arg(long, default_value = "cubic-quintic")]
        model: Model,
    },
    /// Run a registered scenario and check its expectations.
    Reproduce {
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the reduced-resolution variant.
        #[arg(long)]
        desk: bool,
        #[command(flatten)]
        resolution: Resolution,
    },
    /// List registered scenarios.
    ListScenarios,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Diverged { .. } => 3,
        _ => 2,
    }
}

fn print_report(report: &ScenarioReport) {
    for c in &report.checks {
        println!("  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    println!(
        "  termination: {}; verdict: {} (peaks {}, anisotropy {:.3})",
        report.record.termination,
        report.verdict.classification,
        report.verdict.peak_count,
        report.verdict.anisotropy
    );
    println!("{}", report.summary_line());
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Simulate { config, out, resolution } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(t) = resolution.t_final {
                let dt = cfg.time.t_final / cfg.time.steps as f64;
                cfg.time.steps = (t / dt).round().max(1.0) as usize;
                cfg.time.t_final = t;
            }
            cfg.time.steps = resolution.nt.unwrap_or(cfg.time.steps);
            cfg.grid.nx = resolution.nx.unwrap_or(cfg.grid.nx);
            cfg.grid.ny = resolution.ny.unwrap_or(cfg.grid.ny);
            cfg.validate()?;
            let id = config.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
            let report = run_scenario(&Scenario::custom(&id, cfg), out.as_deref())?;
            print_report(&report);
            Ok(report.exit_code() as u8)
        }
        Command::Groundstate { model, omega, out } => {
            let opts = GroundStateOptions::default();
            let gs = solve_ground_state(model, omega, &opts)?;
            let s = gs.scalars;
            println!("omega      {omega}");
            println!("mass       {:.10}", s.mass);
            println!("energy     {:.10}", s.energy);
            println!("amplitude  {:.10}", s.amplitude);
            println!("residual   {:.3e} after {} Newton steps", gs.residual_norm, gs.iterations);
            println!("pohozaev   {:.3e}", s.pohozaev_defect(model));
            if model == Model::CubicQuintic {
                println!("L_crit     {:.6}", critical_torus_length(model, omega, &opts)?);
            }
            if let Some(path) = out {
                gs.write_profile_csv(&path)?;
            }
            Ok(0)
        }
        Command::ProfileCurves { model, omega_min, omega_max, count, out } => {
            std::fs::create_dir_all(&out).map_err(|e| Error::InvalidConfig(format!("{}: {e}", out.display())))?;
            let omegas: Vec<f64> = (0..count)
                .map(|i| omega_min + (omega_max - omega_min) * i as f64 / (count.max(2) - 1) as f64)
                .collect();
            let line_path = out.join("line_soliton.csv");
            let mut w = csv::Writer::from_path(&line_path)?;
            w.write_record(["omega", "mass_1d", "energy_1d", "amplitude"])?;
            for &omega in &omegas {
                let p = SolitonProfile1D::new(model, omega)?;
                w.write_record(&[
                    format!("{omega:.17e}"),
                    format!("{:.17e}", p.mass_1d()),
                    format!("{:.17e}", p.energy_1d()),
                    format!("{:.17e}", p.amplitude()),
                ])?;
            }
            w.flush().map_err(|e| Error::InvalidConfig(e.to_string()))?;
            let rows = ground_state_curves(model, &omegas, &GroundStateOptions::default());
            for row in &rows {
                if let Err(e) = &row.outcome {
                    eprintln!("omega = {}: {e}", row.omega);
                }
            }
            write_curves_csv(&rows, &out.join("ground_state.csv"))?;
            println!("wrote {} and {}", line_path.display(), out.join("ground_state.csv").display());
            Ok(0)
        }
        Command::Fit { snapshot: path, model } => {
            let (field, t) = snapshot::read(&path)?;
            let fit = fit_line_soliton(&field, model)?;
            println!("t          {t}");
            println!("omega*     {:.6}", fit.omega_star);
            println!("amplitude  {:.6}", fit.fit_amplitude);
            println!("residual   {:.3}%", 100.0 * fit.relative_residual());
            Ok(0)
        }
        Command::Reproduce { id, out, desk, resolution } => {
            let overrides = Overrides {
                nx: resolution.nx,
                ny: resolution.ny,
                nt: resolution.nt,
                t_final: resolution.t_final,
                desk,
            };
            let s = resolve(&id, &overrides)?;
            let report = run_scenario(&s, out.as_deref())?;
            print_report(&report);
            Ok(report.exit_code() as u8)
        }
        Command::ListScenarios => {
            let mut stdout = std::io::stdout().lock();
            for s in registry() {
                let c = &s.config;
                let tag = if s.long_running { " [long]" } else if s.desk { " [desk]" } else { "" };
                let _ = writeln!(
                    stdout,
                    "{:<26} {:<13} w={:<5} L=({}, {}) N=({}, {}) T={} Nt={}{tag}",
                    s.id, c.model.to_string(), c.omega, c.grid.lx, c.grid.ly, c.grid.nx, c.grid.ny, c.time.t_final, c.time.steps
                );
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
