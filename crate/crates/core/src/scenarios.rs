//! Registry of reproducible runs with their expected outcomes, and the runner
//! that executes one of them and writes its artifacts.
//!
//! Artifacts of a run in `DIR`:
//!
//! - `meta.json`: scenario, configuration, termination, checks and verdict
//!   (written once before stepping and again at the end)
//! - `run.csv`: sampled diagnostics
//! - `verdict.csv`: classification of the final state
//! - `snapshots/snap_<step>.cqnls` and `final.cqnls`

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::{GridSpec, InitialSpec, RunConfig, TimeSpec};
use crate::diagnostics::{classify_final_state, fit_line_soliton_with, AmplitudeEstimate, Classification, StabilityVerdict, Thresholds};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::integrator::{RunRecord, Scheme, Simulation, SnapshotSink, StopRule};
use crate::profiles::{Model, SolitonProfile1D};
use crate::snapshot;

/// A checkable statement about a finished run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum Expectation {
    /// `max |u(T) - exact(T)|` for stationary initial data.
    ExactError { max: f64 },
    /// Largest sampled `|E/E0 - 1|`.
    EnergyDrift { max: f64 },
    /// Largest sampled `|M/M0 - 1|`.
    MassDrift { max: f64 },
    Completes,
    /// Stopped by the energy-drift rule inside `window`.
    StopsByEnergyDrift { window: (f64, f64) },
    /// `||u||_inf` of the last state is at least `min`.
    FinalSupAtLeast { min: f64 },
    FinalSupWithin { range: (f64, f64) },
    PeakCount { count: usize },
    Classification { expected: Classification },
    AnisotropyWithin { range: (f64, f64) },
    /// Line-soliton fit of the state at time `at`.
    FittedFrequency { at: f64, range: (f64, f64), max_residual: f64, estimate: AmplitudeEstimate },
    /// First time `||u||_inf` exceeds `factor ||u_0||_inf` lies in `window`.
    JumpWithin { window: (f64, f64), factor: f64 },
    /// `||u||_inf` never exceeds `factor ||u_0||_inf`.
    NoJump { factor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub id: String,
    pub summary: String,
    pub config: RunConfig,
    pub expectations: Vec<Expectation>,
    /// Reduced-resolution variant of a longer run.
    pub desk: bool,
    /// Hours of compute at the stated resolution.
    pub long_running: bool,
    pub notes: Option<String>,
}

impl Scenario {
    /// Unregistered run of `config` with no expectations.
    pub fn custom(id: &str, config: RunConfig) -> Self {
        Scenario {
            id: id.to_string(),
            summary: "user configuration".to_string(),
            config,
            expectations: Vec::new(),
            desk: false,
            long_running: false,
            notes: None,
        }
    }

    fn expects_stop(&self) -> bool {
        self.expectations
            .iter()
            .any(|e| matches!(e, Expectation::StopsByEnergyDrift { .. }))
    }

    /// Times at which the runner must keep the state in memory.
    fn fit_times(&self) -> Vec<f64> {
        self.expectations
            .iter()
            .filter_map(|e| match e {
                Expectation::FittedFrequency { at, .. } => Some(*at),
                _ => None,
            })
            .collect()
    }
}

/// Step enlargement of the deformation desk runs to t = 1000. The usual 4x
/// exhausts the energy-drift budget (1e-3) near t = 700.
const LONG_DESK_STEP: f64 = 2.0;

/// Amplitude read-off used for registered frequency fits: `||u||_inf`, which
/// is the quantity plotted next to every reported fitted frequency.
const PAPER_FIT: AmplitudeEstimate = AmplitudeEstimate::Peak;

struct Builder {
    s: Scenario,
}

#[allow(clippy::too_many_arguments)]
fn scenario(
    id: &str,
    summary: &str,
    model: Model,
    omega: f64,
    initial: InitialSpec,
    (lx, ly): (f64, f64),
    (nx, ny): (usize, usize),
    (t_final, steps): (f64, usize),
) -> Builder {
    let snapshot_times = (0..=4).map(|i| t_final * i as f64 / 4.0).collect();
    Builder {
        s: Scenario {
            id: id.to_string(),
            summary: summary.to_string(),
            config: RunConfig {
                model,
                omega,
                initial,
                grid: GridSpec { lx, ly, nx, ny },
                time: TimeSpec {
                    t_final,
                    steps,
                    sample_stride: None,
                    snapshot_times,
                    scheme: Scheme::Driscoll,
                    dealias: false,
                    stiff_cutoff: crate::integrator::DEFAULT_STIFF_CUTOFF,
                },
                stop: StopRule::default(),
                strict_boundary: false,
            },
            expectations: Vec::new(),
            desk: false,
            long_running: false,
            notes: None,
        },
    }
}

impl Builder {
    fn expect(mut self, e: Expectation) -> Self {
        self.s.expectations.push(e);
        self
    }

    fn snapshots(mut self, times: &[f64]) -> Self {
        self.s.config.time.snapshot_times = times.to_vec();
        self
    }

    fn long(mut self) -> Self {
        self.s.long_running = true;
        self
    }

    fn note(mut self, text: &str) -> Self {
        self.s.notes = Some(text.to_string());
        self
    }

    fn build(self) -> Scenario {
        self.s
    }

    /// Reduced variant: `Nx / 4`, time step scaled with it, final time
    /// `t_final`, expectations replaced.
    /// Quarter-resolution variant with the time step enlarged by `step_factor`.
    fn desk_with_step(&self, t_final: f64, step_factor: f64, expectations: Vec<Expectation>) -> Scenario {
        let mut d = self.s.clone();
        d.id = format!("{}-desk", self.s.id);
        d.summary = format!("{} (desk)", self.s.summary);
        d.desk = true;
        d.long_running = false;
        d.config.grid.nx /= 4;
        let dt = self.s.config.time.t_final / self.s.config.time.steps as f64;
        d.config.time.t_final = t_final;
        d.config.time.steps = (t_final / (step_factor * dt)).round() as usize;
        d.config.time.snapshot_times = (0..=4).map(|i| t_final * i as f64 / 4.0).collect();
        // the fourth-order mass error grows like step_factor^4
        d.expectations = expectations
            .into_iter()
            .map(|e| match e {
                Expectation::MassDrift { max } => Expectation::MassDrift {
                    max: max * step_factor.max(1.0).powi(4),
                },
                e => e,
            })
            .collect();
        d
    }

    fn desk(&self, t_final: f64, expectations: Vec<Expectation>) -> Scenario {
        self.desk_with_step(t_final, 4.0, expectations)
    }
}

fn cubic_lambda(omega: f64, positive: bool) -> f64 {
    let size = (2.0 * omega).sqrt() / 10.0;
    if positive {
        size
    } else {
        -size
    }
}

/// All registered scenarios, full-resolution runs followed by their desk variants.
pub fn registry() -> Vec<Scenario> {
    use Expectation::*;
    let cq = Model::CubicQuintic;
    let cubic = Model::Cubic;
    let retained = Classification {
        expected: crate::diagnostics::Classification::LineSolitonRetained,
    };
    let lump = Classification {
        expected: crate::diagnostics::Classification::LumpFormed,
    };
    let tight_mass = MassDrift { max: 1e-10 };
    let mut out = Vec::new();

    out.push(
        scenario(
            "validate-line-soliton",
            "exact line soliton, phase rotation over one time unit",
            cq,
            0.1,
            InitialSpec::LineSoliton,
            (40.0, 3.0),
            (1 << 10, 1 << 5),
            (1.0, 1000),
        )
        .snapshots(&[1.0])
        .expect(ExactError { max: 1e-12 })
        .expect(EnergyDrift { max: 1e-12 })
        .expect(tight_mass.clone())
        .build(),
    );
    out.push(
        scenario(
            "validate-ground-state",
            "periodic ground state, phase rotation over one time unit",
            cq,
            0.1,
            InitialSpec::GroundState { periodic: true },
            (10.0, 10.0),
            (1 << 8, 1 << 8),
            (1.0, 10_000),
        )
        .snapshots(&[1.0])
        .expect(ExactError { max: 1e-8 })
        .expect(EnergyDrift { max: 1e-12 })
        .expect(tight_mass.clone())
        .note("radial profile corrected to a stationary state of the periodic discretization")
        .build(),
    );

    for (sign, positive) in [("plus", true), ("minus", false)] {
        let b = scenario(
            &format!("cubic-stable-{sign}"),
            "cubic line soliton below the ground-state mass with a Gaussian bump",
            cubic,
            0.04,
            InitialSpec::Gaussian { lambda: cubic_lambda(0.04, positive) },
            (100.0, 2.0),
            (1 << 12, 1 << 7),
            (100.0, 10_000),
        )
        .expect(Completes)
        .expect(tight_mass.clone())
        .expect(retained.clone());
        let desk = b.desk(100.0, b.s.expectations.clone());
        out.push(b.long().build());
        out.push(desk);
    }

    out.push(
        scenario(
            "cubic-blowup-plus",
            "cubic line soliton above the ground-state mass, positive bump",
            cubic,
            1.0,
            InitialSpec::Gaussian { lambda: cubic_lambda(1.0, true) },
            (100.0, 2.0),
            (1 << 12, 1 << 7),
            (100.0, 10_000),
        )
        .snapshots(&[0.0, 1.0, 2.0])
        .expect(StopsByEnergyDrift { window: (2.0, 2.7) })
        .expect(FinalSupAtLeast { min: 30.0 })
        .expect(Classification { expected: crate::diagnostics::Classification::BlownUp })
        .build(),
    );
    out.push(
        scenario(
            "cubic-blowup-minus",
            "cubic line soliton above the ground-state mass, negative bump",
            cubic,
            1.0,
            InitialSpec::Gaussian { lambda: cubic_lambda(1.0, false) },
            (100.0, 2.0),
            (1 << 12, 1 << 7),
            (100.0, 10_000),
        )
        .snapshots(&[0.0, 1.0, 2.0, 3.0])
        .expect(StopsByEnergyDrift { window: (2.7, 3.6) })
        .expect(PeakCount { count: 2 })
        .expect(Classification { expected: crate::diagnostics::Classification::BlownUp })
        .build(),
    );

    out.push(
        scenario(
            "stable-Ly2-plus",
            "cubic-quintic line soliton on a narrow torus, positive bump",
            cq,
            0.1,
            InitialSpec::Gaussian { lambda: 0.05 },
            (40.0, 2.0),
            (1 << 10, 1 << 7),
            (20.0, 1000),
        )
        .snapshots(&[0.0, 5.0, 10.0, 20.0])
        .expect(Completes)
        .expect(tight_mass.clone())
        .expect(FittedFrequency { at: 5.0, range: (0.1007, 0.1027), max_residual: 0.05, estimate: PAPER_FIT })
        .expect(retained.clone())
        .build(),
    );
    out.push(
        scenario(
            "stable-Ly2-minus",
            "cubic-quintic line soliton on a narrow torus, negative bump",
            cq,
            0.1,
            InitialSpec::Gaussian { lambda: -0.05 },
            (40.0, 2.0),
            (1 << 10, 1 << 7),
            (20.0, 1000),
        )
        .snapshots(&[0.0, 5.0, 10.0, 20.0])
        .expect(Completes)
        .expect(tight_mass.clone())
        .expect(FittedFrequency { at: 20.0, range: (0.0994, 0.1014), max_residual: 0.05, estimate: PAPER_FIT })
        .expect(retained.clone())
        .build(),
    );

    for (sign, lambda) in [("plus", 0.05), ("minus", -0.05)] {
        let b = scenario(
            &format!("unstable-Ly3-{sign}"),
            "cubic-quintic line soliton on a wide torus with a Gaussian bump",
            cq,
            0.1,
            InitialSpec::Gaussian { lambda },
            (150.0, 3.0),
            (1 << 12, 1 << 7),
            (500.0, 50_000),
        );
        let expectations = vec![
            Completes,
            tight_mass.clone(),
            lump.clone(),
            AnisotropyWithin { range: (0.5, 2.0) },
            FinalSupWithin { range: (0.5, 1.0) },
        ];
        let b = expectations.into_iter().fold(b, Builder::expect);
        let desk = b.desk(500.0, b.s.expectations.clone());
        let b = if lambda > 0.0 { b.expect(PeakCount { count: 1 }) } else { b };
        out.push(b.long().build());
        out.push(desk);
    }

    for (sign, lambda) in [("plus", 0.077), ("minus", -0.077)] {
        let b = scenario(
            &format!("freq-Ly3-{sign}"),
            "line soliton near the upper frequency limit on a wide torus",
            cq,
            0.18,
            InitialSpec::Gaussian { lambda },
            (150.0, 3.0),
            (1 << 12, 1 << 7),
            (1000.0, 100_000),
        )
        .expect(Completes)
        .expect(tight_mass.clone())
        .expect(retained.clone());
        let desk = b.desk(
            200.0,
            vec![
                Completes,
                tight_mass.clone(),
                retained.clone(),
                FittedFrequency { at: 200.0, range: (0.1795, 0.1820), max_residual: 0.05, estimate: PAPER_FIT },
            ],
        );
        let paper = if lambda > 0.0 { 0.1809 } else { 0.1805 };
        let b = b.expect(FittedFrequency {
            at: 1000.0,
            range: (paper - 0.001, paper + 0.001),
            max_residual: 0.05,
            estimate: PAPER_FIT,
        });
        out.push(b.long().build());
        out.push(desk);
    }

    for (sign, lambda) in [("plus", 0.077), ("minus", -0.077)] {
        let b = scenario(
            &format!("freq-Ly5-{sign}"),
            "line soliton near the upper frequency limit on a very wide torus",
            cq,
            0.18,
            InitialSpec::Gaussian { lambda },
            (150.0, 5.0),
            (1 << 12, 1 << 7),
            (1000.0, 20_000),
        )
        .expect(Completes)
        .note("one figure caption gives Ly = 3 for this study; the text and parameters say Ly = 5");
        // even 2x exhausts the energy-drift budget before t = 1000 here
        let desk = b.desk_with_step(1000.0, 1.0, vec![Completes]);
        out.push(b.long().build());
        out.push(desk);
    }

    let b = scenario(
        "deform-cubic-w004",
        "periodically deformed cubic line soliton below the ground-state mass",
        cubic,
        0.04,
        InitialSpec::Deformation { lambda: 0.8 },
        (100.0, 2.0),
        (1 << 12, 1 << 7),
        (100.0, 10_000),
    )
    .expect(Completes)
    .expect(tight_mass.clone())
    .expect(NoJump { factor: 1.5 });
    let desk = b.desk(100.0, b.s.expectations.clone());
    out.push(b.long().build());
    out.push(desk);

    out.push(
        scenario(
            "deform-cubic-w1",
            "periodically deformed cubic line soliton above the ground-state mass",
            cubic,
            1.0,
            InitialSpec::Deformation { lambda: 0.8 },
            (10.0, 2.0),
            (1 << 12, 1 << 7),
            (100.0, 10_000),
        )
        .snapshots(&[0.0, 1.0, 2.0, 2.75])
        .expect(StopsByEnergyDrift { window: (2.3, 3.2) })
        .expect(PeakCount { count: 3 })
        .note(
            "expected: simultaneous collapse at three points near t = 2.75. The data is invariant under \
             (x, y) -> (-x, y + pi), which leaves no unstable neck mode, and converged runs stay \
             bounded until roundoff-seeded growth stops them near t = 30",
        )
        .build(),
    );

    let b = scenario(
        "deform-cq-Ly2",
        "periodically deformed cubic-quintic line soliton on a narrow torus",
        cq,
        0.1,
        InitialSpec::Deformation { lambda: 0.8 },
        (150.0, 2.0),
        (1 << 12, 1 << 6),
        (1000.0, 10_000),
    )
    .expect(Completes)
    .expect(NoJump { factor: 1.25 });
    let desk = b.desk_with_step(1000.0, LONG_DESK_STEP, b.s.expectations.clone());
    out.push(b.long().build());
    out.push(desk);

    let b = scenario(
        "deform-cq-Ly3",
        "periodically deformed cubic-quintic line soliton on a wide torus",
        cq,
        0.1,
        InitialSpec::Deformation { lambda: 0.8 },
        (150.0, 3.0),
        (1 << 12, 1 << 6),
        (1000.0, 10_000),
    )
    .expect(Completes)
    .expect(JumpWithin { window: (280.0, 380.0), factor: 1.25 })
    .expect(lump.clone());
    let desk = b.desk_with_step(
        1000.0,
        LONG_DESK_STEP,
        vec![Completes, JumpWithin { window: (200.0, 500.0), factor: 1.25 }, lump],
    );
    out.push(b.long().build());
    out.push(desk);

    out
}

pub fn find(id: &str) -> Result<Scenario> {
    registry()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownScenario(id.to_string()))
}

/// Resolution and duration changes allowed on a registered scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub nt: Option<usize>,
    pub t_final: Option<f64>,
    /// Use the `-desk` variant when one exists.
    pub desk: bool,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        *self == Overrides::default()
    }
}

/// Looks up `id` and applies `overrides`. Overriding the final time without
/// the step count keeps the time step.
pub fn resolve(id: &str, overrides: &Overrides) -> Result<Scenario> {
    let mut s = find(id)?;
    if overrides.desk && !s.desk {
        s = find(&format!("{id}-desk")).map_err(|_| {
            Error::InvalidConfig(format!("scenario `{id}` has no desk variant"))
        })?;
    }
    let time = &mut s.config.time;
    if let Some(t) = overrides.t_final {
        let dt = time.t_final / time.steps as f64;
        time.steps = (t / dt).round().max(1.0) as usize;
        time.t_final = t;
    }
    if let Some(nt) = overrides.nt {
        time.steps = nt;
    }
    if let Some(nx) = overrides.nx {
        s.config.grid.nx = nx;
    }
    if let Some(ny) = overrides.ny {
        s.config.grid.ny = ny;
    }
    if !overrides.is_empty() {
        s.summary.push_str(" [overridden]");
    }
    s.config.validate()?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`run_scenario`].
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub record: RunRecord,
    pub verdict: StabilityVerdict,
    pub checks: Vec<CheckOutcome>,
    /// `max |u(T) - exact(T)|` when the initial data is stationary.
    pub exact_error: Option<f64>,
    pub elapsed_seconds: f64,
    #[serde(skip)]
    pub final_state: Field,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
    #[serde(skip)]
    expects_stop: bool,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Process exit code: 0 pass, 1 failed expectation, 3 divergence that no
    /// expectation anticipated.
    pub fn exit_code(&self) -> i32 {
        if self.record.termination.stopped_early() && !self.expects_stop {
            3
        } else if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn summary_line(&self) -> String {
        let failed: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        if failed.is_empty() {
            format!("{}: PASS ({} checks, {:.1} s)", self.id, self.checks.len(), self.elapsed_seconds)
        } else {
            format!("{}: FAIL ({})", self.id, failed.join(", "))
        }
    }
}

/// Writes snapshots to disk (when a directory is given) and keeps the states
/// at selected steps in memory.
struct RunnerSink {
    dir: Option<PathBuf>,
    keep: Vec<usize>,
    kept: BTreeMap<usize, (f64, Field)>,
}

impl SnapshotSink for RunnerSink {
    fn accept(&mut self, t: f64, step: usize, field: &Field) -> Result<Option<PathBuf>> {
        if self.keep.contains(&step) {
            self.kept.insert(step, (t, field.clone()));
        }
        match &self.dir {
            Some(dir) => {
                let path = dir.join(format!("snap_{step:08}.cqnls"));
                snapshot::write(&path, field, t)?;
                Ok(Some(path))
            }
            None => Ok(None),
        }
    }
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn within(v: f64, (lo, hi): (f64, f64)) -> bool {
    v >= lo && v <= hi
}

fn first_exceedance(record: &RunRecord, factor: f64) -> Option<f64> {
    let base = record.samples[0].sup_norm;
    record
        .samples
        .iter()
        .find(|s| s.sup_norm > factor * base)
        .map(|s| s.t)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'static str,
    scenario: &'a Scenario,
    dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<&'a ScenarioReport>,
}

fn meta<'a>(scenario: &'a Scenario, dt: f64, result: Option<&'a ScenarioReport>) -> Meta<'a> {
    Meta {
        version: env!("CARGO_PKG_VERSION"),
        scenario,
        dt,
        result,
    }
}

/// Builds the initial data, evolves, classifies and checks expectations.
/// With `out` set, writes the artifacts listed in the module docs.
pub fn run_scenario(s: &Scenario, out: Option<&Path>) -> Result<ScenarioReport> {
    let start = Instant::now();
    let cfg = &s.config;
    let mut evolution = cfg.evolution()?;
    for t in s.fit_times() {
        if !evolution.snapshot_times.contains(&t) {
            evolution.snapshot_times.push(t);
        }
    }
    let dt = evolution.dt();
    let snap_dir = match out {
        Some(dir) => {
            let snaps = dir.join("snapshots");
            std::fs::create_dir_all(&snaps).map_err(|e| Error::io(&snaps, e))?;
            write_json(&dir.join("meta.json"), &meta(s, dt, None))?;
            Some(snaps)
        }
        None => None,
    };
    let initial = cfg.prepare_initial()?;
    let keep = s
        .fit_times()
        .iter()
        .map(|t| ((t / dt).round() as usize).min(evolution.steps))
        .collect();
    let mut sink = RunnerSink {
        dir: snap_dir,
        keep,
        kept: BTreeMap::new(),
    };
    let mut sim = Simulation::new(&initial.field, evolution.clone())?;
    let report_every = (evolution.steps / 10).max(1) as f64 * dt;
    let mut next_report = report_every;
    let record = sim.run(&mut sink, &mut |sample| {
        if sample.t >= next_report - 0.5 * dt {
            log::info!(
                "{}: t = {:.3}, |u|_inf = {:.5}, delta_E = {:.2e}",
                s.id,
                sample.t,
                sample.sup_norm,
                sample.delta_e
            );
            next_report += report_every;
        }
    })?;
    let final_state = sim.state();
    let t_end = sim.time();
    let thresholds = Thresholds::default();
    let verdict = classify_final_state(&record, &final_state, cfg.model, &thresholds);
    let exact_error = initial
        .exact_at(cfg.omega, t_end)
        .map(|exact| final_state.max_distance(&exact));

    let mut checks = Vec::new();
    for e in &s.expectations {
        checks.push(match e {
            Expectation::ExactError { max } => match exact_error {
                Some(err) => check("exact-error", err <= *max, format!("{err:.3e} <= {max:e}")),
                None => check("exact-error", false, "initial data has no exact solution"),
            },
            Expectation::EnergyDrift { max } => {
                let d = record.max_energy_drift();
                check("energy-drift", d <= *max, format!("{d:.3e} <= {max:e}"))
            }
            Expectation::MassDrift { max } => {
                let d = record.max_mass_drift();
                check("mass-drift", d <= *max, format!("{d:.3e} <= {max:e}"))
            }
            Expectation::Completes => check(
                "completes",
                !record.termination.stopped_early(),
                record.termination.to_string(),
            ),
            Expectation::StopsByEnergyDrift { window } => {
                let ok = matches!(record.termination,
                    crate::integrator::Termination::EnergyDriftStop { t } if within(t, *window));
                check("energy-drift-stop", ok, format!("{} in {window:?}", record.termination))
            }
            Expectation::FinalSupAtLeast { min } => {
                let v = record.last().sup_norm;
                check("final-sup", v >= *min, format!("{v:.4} >= {min}"))
            }
            Expectation::FinalSupWithin { range } => {
                let v = record.last().sup_norm;
                check("final-sup", within(v, *range), format!("{v:.4} in {range:?}"))
            }
            Expectation::PeakCount { count } => {
                check("peak-count", verdict.peak_count == *count, format!("{} == {count}", verdict.peak_count))
            }
            Expectation::Classification { expected } => check(
                "classification",
                verdict.classification == *expected,
                format!("{} == {expected}", verdict.classification),
            ),
            Expectation::AnisotropyWithin { range } => check(
                "anisotropy",
                within(verdict.anisotropy, *range),
                format!("{:.3} in {range:?}", verdict.anisotropy),
            ),
            Expectation::FittedFrequency { at, range, max_residual, estimate } => {
                let step = ((at / dt).round() as usize).min(evolution.steps);
                let name = format!("fit@{at}");
                match sink.kept.get(&step) {
                    None => check(name, false, format!("run ended before t = {at}")),
                    Some((_, field)) => match fit_line_soliton_with(field, cfg.model, *estimate) {
                        Ok(fit) => {
                            let other = match estimate {
                                AmplitudeEstimate::RowMean => AmplitudeEstimate::Peak,
                                AmplitudeEstimate::Peak => AmplitudeEstimate::RowMean,
                            };
                            let alt = fit_line_soliton_with(field, cfg.model, other)
                                .map_or_else(|e| e.to_string(), |f| format!("{:.5}", f.omega_star));
                            check(
                                name,
                                within(fit.omega_star, *range) && fit.relative_residual() <= *max_residual,
                                format!(
                                    "omega* = {:.5} ({estimate}) in {range:?}, residual {:.2}% <= {:.0}%; {other}: {alt}",
                                    fit.omega_star,
                                    100.0 * fit.relative_residual(),
                                    100.0 * max_residual
                                ),
                            )
                        }
                        Err(e) => check(name, false, e.to_string()),
                    },
                }
            }
            Expectation::JumpWithin { window, factor } => {
                let t = first_exceedance(&record, *factor);
                check(
                    "sup-jump",
                    t.is_some_and(|t| within(t, *window)),
                    format!("first exceedance of {factor} x initial at {t:?}, window {window:?}"),
                )
            }
            Expectation::NoJump { factor } => {
                let t = first_exceedance(&record, *factor);
                check("no-sup-jump", t.is_none(), format!("first exceedance of {factor} x initial at {t:?}"))
            }
        });
    }

    let report = ScenarioReport {
        id: s.id.clone(),
        record,
        verdict,
        checks,
        exact_error,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        final_state,
        out_dir: out.map(Path::to_path_buf),
        expects_stop: s.expects_stop(),
    };
    if let Some(dir) = out {
        report.record.write_csv(&dir.join("run.csv"))?;
        report.verdict.write_csv(&dir.join("verdict.csv"))?;
        snapshot::write(&dir.join("final.cqnls"), &report.final_state, t_end)?;
        write_json(&dir.join("meta.json"), &meta(s, dt, Some(&report)))?;
    }
    Ok(report)
}

/// Unperturbed line soliton on the scenario's grid.
pub fn line_soliton_data(s: &Scenario) -> Result<Field> {
    let p = SolitonProfile1D::new(s.config.model, s.config.omega)?;
    Ok(crate::profiles::line_soliton_field(&p, s.config.grid()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn registry_is_complete_and_unique() {
        let reg = registry();
        let ids: HashSet<&str> = reg.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids.len(), reg.len());
        for id in [
            "validate-line-soliton",
            "validate-ground-state",
            "cubic-stable-plus",
            "cubic-stable-minus",
            "cubic-blowup-plus",
            "cubic-blowup-minus",
            "stable-Ly2-plus",
            "stable-Ly2-minus",
            "unstable-Ly3-plus",
            "unstable-Ly3-minus",
            "freq-Ly3-plus",
            "freq-Ly3-minus",
            "freq-Ly5-plus",
            "freq-Ly5-minus",
            "deform-cubic-w004",
            "deform-cubic-w1",
            "deform-cq-Ly2",
            "deform-cq-Ly3",
        ] {
            assert!(ids.contains(id), "missing {id}");
        }
        for s in &reg {
            s.config.validate().unwrap_or_else(|e| panic!("{}: {e}", s.id));
            if s.long_running {
                assert!(ids.contains(format!("{}-desk", s.id).as_str()), "{} lacks a desk variant", s.id);
            }
        }
    }

    #[test]
    fn paper_parameters() {
        let s = find("validate-line-soliton").unwrap();
        let c = &s.config;
        assert_eq!((c.grid.lx, c.grid.ly, c.grid.nx, c.grid.ny), (40.0, 3.0, 1024, 32));
        assert_eq!((c.time.steps, c.time.t_final), (1000, 1.0));
        let s = find("unstable-Ly3-plus").unwrap();
        let c = &s.config;
        assert_eq!(c.initial, InitialSpec::Gaussian { lambda: 0.05 });
        assert_eq!((c.grid.lx, c.grid.ly, c.grid.nx, c.grid.ny), (150.0, 3.0, 4096, 128));
        assert_eq!((c.time.steps, c.time.t_final), (50_000, 500.0));
        let s = find("deform-cq-Ly3").unwrap();
        assert_eq!(s.config.initial, InitialSpec::Deformation { lambda: 0.8 });
        assert_eq!(s.config.time.t_final, 1000.0);
        let s = find("cubic-blowup-minus").unwrap();
        assert_eq!(s.config.initial, InitialSpec::Gaussian { lambda: -(2f64.sqrt()) / 10.0 });
    }

    #[test]
    fn desk_variants_scale_resolution() {
        let full = find("unstable-Ly3-plus").unwrap();
        let desk = find("unstable-Ly3-plus-desk").unwrap();
        assert!(desk.desk && !desk.long_running);
        assert_eq!(desk.config.grid.nx, full.config.grid.nx / 4);
        assert_eq!(desk.config.time.steps, full.config.time.steps / 4);
        let freq = find("freq-Ly3-minus-desk").unwrap();
        assert_eq!((freq.config.time.t_final, freq.config.time.steps), (200.0, 5000));
        assert!(desk.expectations.contains(&Expectation::MassDrift { max: 1e-10 * 256.0 }));
        let deform = find("deform-cq-Ly3-desk").unwrap();
        assert_eq!(deform.config.time.steps, find("deform-cq-Ly3").unwrap().config.time.steps / 2);
        let via = resolve("unstable-Ly3-plus", &Overrides { desk: true, ..Default::default() }).unwrap();
        assert_eq!(via.id, desk.id);
    }

    #[test]
    fn overrides() {
        let o = Overrides {
            nx: Some(256),
            t_final: Some(0.5),
            ..Default::default()
        };
        let s = resolve("validate-line-soliton", &o).unwrap();
        assert_eq!(s.config.grid.nx, 256);
        assert_eq!(s.config.time.steps, 500);
        assert!(matches!(resolve("nope", &Overrides::default()), Err(Error::UnknownScenario(_))));
        let bad = Overrides { nx: Some(100), ..Default::default() };
        assert!(matches!(resolve("validate-line-soliton", &bad), Err(Error::InvalidConfig(_))));
        let no_desk = Overrides { desk: true, ..Default::default() };
        assert!(resolve("validate-line-soliton", &no_desk).is_err());
    }

    #[test]
    fn unperturbed_data_is_classified_as_retained() {
        let rec = |f: &Field| RunRecord {
            samples: vec![crate::integrator::Sample {
                t: 0.0,
                sup_norm: f.sup_norm(),
                mass: 1.0,
                energy: -1.0,
                delta_e: 0.0,
            }],
            termination: crate::integrator::Termination::Completed,
            snapshots: vec![],
        };
        for s in registry() {
            let f = line_soliton_data(&s).unwrap();
            let v = classify_final_state(&rec(&f), &f, s.config.model, &Thresholds::default());
            assert_eq!(v.classification, crate::diagnostics::Classification::LineSolitonRetained, "{}", s.id);
        }
    }

    #[test]
    fn small_run_writes_artifacts() {
        let dir = std::env::temp_dir().join(format!("cqnls-scenario-{}", std::process::id()));
        let o = Overrides {
            ny: Some(8),
            t_final: Some(0.1),
            ..Default::default()
        };
        let s = resolve("validate-line-soliton", &o).unwrap();
        let report = run_scenario(&s, Some(&dir)).unwrap();
        assert_eq!(report.exit_code(), 0, "{:?}", report.checks);
        for name in ["meta.json", "run.csv", "verdict.csv", "final.cqnls"] {
            assert!(dir.join(name).exists(), "{name}");
        }
        let (f, t) = snapshot::read(&dir.join("final.cqnls")).unwrap();
        assert_eq!(f, report.final_state);
        assert!((t - 0.1).abs() < 1e-12);
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap();
        assert_eq!(meta["scenario"]["id"], "validate-line-soliton");
        assert_eq!(meta["result"]["record"]["termination"]["status"], "completed");
        std::fs::remove_dir_all(dir).ok();
    }
}
