//! End-to-end acceptance checks. Each test prints one `[PASS]`/`[FAIL]` line
//! for its criterion, preceded by the individual measurements. Run with
//! `cargo test --release --test acceptance -- --nocapture --test-threads=1`
//! to see the lines as they finish.

use std::f64::consts::PI;

use num_complex::Complex64;

use cqnls::diagnostics::critical_torus_length;
use cqnls::grid::{Field, Grid2D};
use cqnls::groundstate::{ground_state_curves, solve_ground_state, GroundStateOptions};
use cqnls::integrator::{evolve, Evolution, Propagator, Scheme};
use cqnls::profiles::{fit_omega_from_amplitude, Model, SolitonProfile1D};
use cqnls::scenarios::{find, run_scenario};

#[derive(Default)]
struct Criterion {
    lines: Vec<(bool, String)>,
}

impl Criterion {
    fn check(&mut self, passed: bool, detail: impl Into<String>) -> &mut Self {
        self.lines.push((passed, detail.into()));
        self
    }

    fn finish(&self, name: &str) {
        for (ok, detail) in &self.lines {
            println!("    {} {detail}", if *ok { "ok  " } else { "FAIL" });
        }
        let passed = self.lines.iter().all(|(ok, _)| *ok);
        let failed: Vec<&str> = self.lines.iter().filter(|l| !l.0).map(|l| l.1.as_str()).collect();
        println!("[{}] {name}", if passed { "PASS" } else { "FAIL" });
        assert!(passed, "{name}: {}", failed.join("; "));
    }

    /// Runs a registered scenario and records each of its expectation checks.
    fn scenario(&mut self, id: &str) -> &mut Self {
        let s = find(id).unwrap();
        let report = run_scenario(&s, None).unwrap();
        for c in &report.checks {
            self.check(c.passed, format!("{id} {}: {}", c.name, c.detail));
        }
        println!(
            "    info {id}: {}, mass drift {:.2e}, energy drift {:.2e}, {:.0} s",
            report.record.termination,
            report.record.max_mass_drift(),
            report.record.max_energy_drift(),
            report.elapsed_seconds
        );
        self
    }
}

fn within(v: f64, centre: f64, tol: f64) -> bool {
    (v - centre).abs() <= tol
}

#[test]
fn validation_line_soliton() {
    let mut c = Criterion::default();
    let report = run_scenario(&find("validate-line-soliton").unwrap(), None).unwrap();
    let err = report.exact_error.unwrap();
    let drift = report.record.max_energy_drift();
    c.check(err <= 1e-12, format!("max |u(1) - phi e^(0.1i)| = {err:.2e} <= 1e-12"));
    c.check(drift <= 1e-12, format!("energy drift {drift:.2e} <= 1e-12"));
    c.finish("validation A: exact line soliton");
}

#[test]
fn validation_ground_state() {
    let mut c = Criterion::default();
    let report = run_scenario(&find("validate-ground-state").unwrap(), None).unwrap();
    let err = report.exact_error.unwrap();
    c.check(err <= 1e-8, format!("max |u(1) - Q e^(0.1i)| = {err:.2e} <= 1e-8"));
    c.finish("validation B: ground state");
}

#[test]
fn ground_state_scalars() {
    let mut c = Criterion::default();
    let opts = GroundStateOptions::default();
    let q = solve_ground_state(Model::CubicQuintic, 0.1, &opts).unwrap();
    c.check(within(q.mass(), 23.74, 0.05), format!("M(Q_0.1) = {:.4} in 23.74 +- 0.05", q.mass()));
    c.check(
        within(q.amplitude(), 0.75, 0.02),
        format!("|Q_0.1|_inf = {:.4} in 0.75 +- 0.02", q.amplitude()),
    );
    let m: Vec<f64> = [0.25, 1.0]
        .iter()
        .map(|&w| solve_ground_state(Model::Cubic, w, &opts).unwrap().mass())
        .collect();
    for (w, mass) in [0.25, 1.0].iter().zip(&m) {
        c.check(within(*mass, 11.70, 0.1), format!("cubic M(Q_{w}) = {mass:.6} in 11.70 +- 0.1"));
    }
    let spread = (m[0] - m[1]).abs() / m[1];
    c.check(spread <= 1e-4, format!("cubic mass relative spread {spread:.2e} <= 1e-4"));
    c.finish("ground-state scalars");
}

#[test]
fn line_soliton_mass_anchor() {
    let mut c = Criterion::default();
    let m = 4.0 * PI * SolitonProfile1D::cubic_quintic(0.1).unwrap().mass_1d();
    c.check(within(m, 20.22, 0.02), format!("4 pi mass_1d(phi_0.1) = {m:.4} in 20.22 +- 0.02"));
    for w in [0.01, 0.04, 0.25, 1.0, 4.0] {
        let m = SolitonProfile1D::cubic(w).unwrap().mass_1d();
        let err = (m - 4.0 * f64::sqrt(w)).abs() / (4.0 * f64::sqrt(w));
        c.check(err <= 1e-10, format!("cubic mass_1d({w}) vs 4 sqrt(w): {err:.1e} <= 1e-10"));
    }
    c.finish("1D mass anchor");
}

#[test]
fn cubic_blow_up() {
    let mut c = Criterion::default();
    c.scenario("cubic-blowup-plus")
        .scenario("cubic-blowup-minus")
        .scenario("cubic-stable-plus-desk")
        .scenario("cubic-stable-minus-desk");
    c.finish("cubic blow-up and small-frequency stability");
}

#[test]
fn stable_regime() {
    let mut c = Criterion::default();
    c.scenario("stable-Ly2-plus").scenario("stable-Ly2-minus");
    c.finish("stable regime, L_y = 2");
}

#[test]
fn unstable_regime_desk() {
    let mut c = Criterion::default();
    c.scenario("unstable-Ly3-plus-desk")
        .scenario("unstable-Ly3-minus-desk")
        .scenario("deform-cq-Ly3-desk");
    c.finish("unstable regime, L_y = 3 (desk)");
}

#[test]
fn frequency_study_desk() {
    let mut c = Criterion::default();
    c.scenario("freq-Ly3-plus-desk").scenario("freq-Ly3-minus-desk");
    c.finish("frequency study, omega = 0.18 (desk)");
}

fn perturbed_soliton(g: Grid2D) -> Field {
    let p = SolitonProfile1D::cubic_quintic(0.1).unwrap();
    Field::from_fn(g, |x, y| {
        Complex64::new(p.evaluate(x) + 0.05 * (-(x * x + y * y)).exp(), 0.02 * (-(x * x)).exp() * y.sin())
    })
}

fn run_to(u0: &Field, t: f64, steps: usize, scheme: Scheme, cutoff: f64) -> Field {
    let mut p = Propagator::with_options(Model::CubicQuintic, u0, t / steps as f64, scheme, cutoff, false);
    for _ in 0..steps {
        p.step().unwrap();
    }
    p.state()
}

#[test]
fn property_suite() {
    let mut c = Criterion::default();

    // time-step halving with the explicit/integrating-factor split held fixed
    let g = Grid2D::new(4.0, 1.0, 64, 16).unwrap();
    let u0 = perturbed_soliton(g);
    let split = |n: usize| 40.0 / n as f64;
    let reference = run_to(&u0, 1.0, 2560, Scheme::Driscoll, split(2560));
    let errors: Vec<f64> = [40, 80, 160]
        .iter()
        .map(|&n| run_to(&u0, 1.0, n, Scheme::Driscoll, split(n)).max_distance(&reference))
        .collect();
    for w in errors.windows(2) {
        let r = w[0] / w[1];
        c.check((r - 16.0).abs() <= 3.0, format!("halving ratio {r:.2} in 16 +- 3"));
    }

    let g = Grid2D::new(40.0, 3.0, 1 << 10, 1 << 5).unwrap();
    let profile = SolitonProfile1D::cubic_quintic(0.1).unwrap();
    let soliton = Field::from_real_fn(g, |x, _| profile.evaluate(x));
    let a = run_to(&soliton, 1.0, 10_000, Scheme::Driscoll, cqnls::integrator::DEFAULT_STIFF_CUTOFF);
    let b = run_to(&soliton, 1.0, 10_000, Scheme::SplitStep, 0.0);
    let d = a.max_distance(&b);
    c.check(d <= 1e-8, format!("composite vs split-step on the line soliton: {d:.2e} <= 1e-8"));

    let g = Grid2D::new(40.0, 2.0, 256, 16).unwrap();
    let u0 = perturbed_soliton(g);
    let ev = Evolution::new(Model::CubicQuintic, g, 5.0, 500);
    let base = evolve(&u0, &ev).unwrap();
    let drift = base.record.max_mass_drift();
    c.check(drift <= 1e-10, format!("mass drift {drift:.2e} <= 1e-10"));
    let phase = Complex64::from_polar(1.0, 0.7);
    let gauge = evolve(&u0.scaled(phase), &ev).unwrap().final_state;
    let e = gauge.max_distance(&base.final_state.scaled(phase));
    c.check(e <= 1e-12, format!("gauge equivariance {e:.2e} <= 1e-12"));
    let shifted = evolve(&u0.shifted(37, 5), &ev).unwrap().final_state;
    let e = shifted.max_distance(&base.final_state.shifted(37, 5));
    c.check(e <= 1e-12, format!("translation equivariance {e:.2e} <= 1e-12"));

    let omegas: Vec<f64> = (1..=18).map(|i| 0.01 * i as f64).collect();
    let rows = ground_state_curves(Model::CubicQuintic, &omegas, &GroundStateOptions::default());
    let converged: Vec<_> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    c.check(converged.len() == omegas.len(), format!("{} of {} ground states converged", converged.len(), omegas.len()));
    let worst = converged
        .iter()
        .map(|s| s.pohozaev_defect(Model::CubicQuintic).max(s.nehari_defect(Model::CubicQuintic)))
        .fold(0.0, f64::max);
    c.check(worst <= 1e-8, format!("worst Pohozaev/Nehari defect {worst:.2e} <= 1e-8"));
    let rising = converged.windows(2).all(|w| w[1].mass > w[0].mass);
    c.check(rising, "M(Q_w) increasing over w = 0.01..0.18");
    let line: Vec<f64> = omegas.iter().map(|&w| SolitonProfile1D::cubic_quintic(w).unwrap().mass_1d()).collect();
    c.check(line.windows(2).all(|w| w[1] > w[0]), "M(phi_w) increasing over w = 0.01..0.18");

    let worst = omegas
        .iter()
        .chain(&[1e-4, 0.185, 0.187])
        .map(|&w| {
            let a = SolitonProfile1D::cubic_quintic(w).unwrap().amplitude();
            (fit_omega_from_amplitude(a).unwrap() - w).abs()
        })
        .fold(0.0, f64::max);
    c.check(worst <= 1e-12, format!("omega -> amplitude -> omega error {worst:.1e} <= 1e-12"));

    let opts = GroundStateOptions::default();
    let l = critical_torus_length(Model::CubicQuintic, 0.1, &opts).unwrap();
    c.check((2.0..=3.0).contains(&l), format!("L_crit(0.1) = {l:.4} in [2, 3]"));
    let l18 = critical_torus_length(Model::CubicQuintic, 0.18, &opts).unwrap();
    c.check(l18 > 3.0 && l18 > l, format!("L_crit(0.18) = {l18:.4} > max(3, L_crit(0.1))"));

    c.finish("property suite");
}
