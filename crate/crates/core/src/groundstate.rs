//! Radial ground states `Q_omega` of `-Delta Q + omega Q - Q^3 + Q^5 = 0` in 2D.
//!
//! The profile is represented by its values on a mapped Chebyshev grid over
//! `[-R, R]`. Evenness is imposed by folding the collocation matrices onto the
//! nodes with `r > 0` (the node count is odd, so `r = 0` is never a node and
//! the `Q'/r` term needs no special treatment). The map
//! `r = R sinh(beta s) / sinh(beta)` moves nodes from the far boundary into
//! the core of the profile. Newton's method on the collocation equations
//! gives residuals at roundoff level, and the profile can be evaluated
//! anywhere through its barycentric interpolant.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::chebyshev::{self, Barycentric};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D, SpectralTransform};
use crate::profiles::{Model, SolitonProfile1D};
use crate::quadrature::CompositeRule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateOptions {
    /// Domain radius; `None` means `30 / sqrt(omega)`.
    pub radius: Option<f64>,
    /// Chebyshev degree on `[-R, R]`; forced odd.
    pub degree: usize,
    /// Strength of the sinh node map.
    pub stretch: f64,
    /// Max-norm residual accepted as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        GroundStateOptions {
            radius: None,
            degree: 301,
            stretch: 3.0,
            tolerance: 1e-12,
            max_iterations: 50,
        }
    }
}

impl GroundStateOptions {
    fn radius_for(&self, omega: f64) -> f64 {
        self.radius.unwrap_or(30.0 / omega.sqrt())
    }
}

/// Mapped Chebyshev mesh on `[-R, R]`.
#[derive(Debug, Clone)]
struct RadialMesh {
    degree: usize,
    radius: f64,
    stretch: f64,
    /// Computational nodes `s_j`, all `degree + 1` of them.
    s: Vec<f64>,
    /// Physical radii of the interior positive nodes `j = 1..=half`.
    r: Vec<f64>,
    half: usize,
}

impl RadialMesh {
    fn new(degree: usize, radius: f64, stretch: f64) -> Self {
        let degree = degree | 1;
        let s = chebyshev::nodes(degree);
        let half = (degree - 1) / 2;
        let mut mesh = RadialMesh {
            degree,
            radius,
            stretch,
            s,
            r: Vec::new(),
            half,
        };
        mesh.r = (1..=half).map(|j| mesh.map(mesh.s[j])).collect();
        mesh
    }

    fn map(&self, s: f64) -> f64 {
        self.radius * (self.stretch * s).sinh() / self.stretch.sinh()
    }

    fn map_d1(&self, s: f64) -> f64 {
        self.radius * self.stretch * (self.stretch * s).cosh() / self.stretch.sinh()
    }

    fn map_d2(&self, s: f64) -> f64 {
        self.radius * self.stretch.powi(2) * (self.stretch * s).sinh() / self.stretch.sinh()
    }

    fn inverse(&self, r: f64) -> f64 {
        (r * self.stretch.sinh() / self.radius).asinh() / self.stretch
    }

    /// Folded radial Laplacian `Q'' + Q'/r` acting on the interior positive nodes.
    fn laplacian(&self) -> DMatrix<f64> {
        let n = self.degree;
        let d = chebyshev::differentiation_matrix(n);
        let d2 = &d * &d;
        let h = self.half;
        let mut a = DMatrix::zeros(h, h);
        for i in 1..=h {
            let s = self.s[i];
            let (m1, m2) = (self.map_d1(s), self.map_d2(s));
            let r = self.map(s);
            // d/dr = D/m1, d2/dr2 = D2/m1^2 - m2/m1^3 D
            let c2 = 1.0 / (m1 * m1);
            let c1 = -m2 / (m1 * m1 * m1) + 1.0 / (r * m1);
            for j in 1..=h {
                let mirror = n - j;
                a[(i - 1, j - 1)] = c2 * (d2[(i, j)] + d2[(i, mirror)])
                    + c1 * (d[(i, j)] + d[(i, mirror)]);
            }
        }
        a
    }

    /// Values on all `degree + 1` nodes from the interior positive half.
    fn unfold(&self, half_values: &[f64]) -> Vec<f64> {
        let n = self.degree;
        let mut full = vec![0.0; n + 1];
        for (j, v) in half_values.iter().enumerate() {
            full[j + 1] = *v;
            full[n - j - 1] = *v;
        }
        full
    }
}

/// Scalars of a converged ground state, all integrals over `R^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateScalars {
    pub omega: f64,
    pub mass: f64,
    pub energy: f64,
    pub amplitude: f64,
    /// `int |grad Q|^2`
    pub kinetic: f64,
    /// `int Q^4`
    pub quartic: f64,
    /// `int Q^6`
    pub sextic: f64,
}

impl GroundStateScalars {
    /// Relative defect of `int |grad Q|^2 + omega int Q^2 - int Q^4 + int Q^6 = 0`.
    pub fn nehari_defect(&self, model: Model) -> f64 {
        let sextic = if model == Model::CubicQuintic { self.sextic } else { 0.0 };
        (self.kinetic + self.omega * self.mass - self.quartic + sextic).abs() / self.quartic
    }

    /// Relative defect of the 2D Pohozaev identity `omega int Q^2 = 1/2 int Q^4 - 1/3 int Q^6`.
    pub fn pohozaev_defect(&self, model: Model) -> f64 {
        let sextic = if model == Model::CubicQuintic { self.sextic } else { 0.0 };
        (self.omega * self.mass - 0.5 * self.quartic + sextic / 3.0).abs() / (self.omega * self.mass)
    }
}

/// Converged radial profile `Q_omega(r)`.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub model: Model,
    pub omega: f64,
    /// Max-norm of the collocation residual at convergence.
    pub residual_norm: f64,
    pub iterations: usize,
    pub scalars: GroundStateScalars,
    mesh: RadialMesh,
    values: Vec<f64>,
    /// `dQ/ds` on all nodes, for the gradient integral.
    slope: Vec<f64>,
    interp: Barycentric,
}

impl GroundState {
    pub fn mass(&self) -> f64 {
        self.scalars.mass
    }

    pub fn energy(&self) -> f64 {
        self.scalars.energy
    }

    pub fn amplitude(&self) -> f64 {
        self.scalars.amplitude
    }

    pub fn radius(&self) -> f64 {
        self.mesh.radius
    }

    /// Radial nodes in increasing order, from the innermost node to `R`.
    pub fn rmesh(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.mesh.r.iter().rev().copied().collect();
        r.push(self.mesh.radius);
        r
    }

    /// `Q` at [`GroundState::rmesh`].
    pub fn values(&self) -> Vec<f64> {
        let mut q: Vec<f64> = self.values[1..=self.mesh.half].iter().rev().copied().collect();
        q.push(0.0);
        q
    }

    /// `Q(r)`; zero beyond the domain radius.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.mesh.radius {
            return 0.0;
        }
        self.interp.eval(&self.values, self.mesh.inverse(r))
    }

    /// `Q'(r)` for `r >= 0`.
    pub fn eval_derivative(&self, r: f64) -> f64 {
        if r >= self.mesh.radius {
            return 0.0;
        }
        let s = self.mesh.inverse(r);
        self.interp.eval(&self.slope, s) / self.mesh.map_d1(s)
    }

    /// Interpolates `Q(|x|)` onto a Cartesian grid.
    pub fn embed(&self, grid: Grid2D) -> Result<Field> {
        let corner = PI * grid.lx.hypot(grid.ly);
        if corner > self.mesh.radius {
            let tail = (0..=16)
                .map(|i| self.eval(self.mesh.radius * (0.75 + 0.015 * i as f64)).abs())
                .fold(0.0, f64::max);
            if tail >= 1e-10 {
                return Err(Error::DomainMismatch {
                    radius: self.mesh.radius,
                    needed: corner,
                    tail,
                });
            }
        }
        // Q(|x|) is even in both directions: evaluate one quadrant and mirror.
        let mut field = Field::zeros(grid);
        let (cx, cy) = (grid.nx / 2, grid.ny / 2);
        for m in cy..grid.ny {
            let y = grid.y(m);
            for j in cx..grid.nx {
                let v = self.eval(grid.x(j).hypot(y));
                let jm = 2 * cx - j;
                let mm = 2 * cy - m;
                for (jj, mm) in [(j, m), (jm, m), (j, mm), (jm, mm)] {
                    if jj < grid.nx && mm < grid.ny {
                        field.values[grid.index(jj, mm)].re = v;
                    }
                }
            }
        }
        // row/column 0 are the boundary at -L pi, which has no mirror partner
        for m in 0..grid.ny {
            let v = self.eval(grid.x(0).hypot(grid.y(m)));
            field.values[grid.index(0, m)].re = v;
        }
        for j in 0..grid.nx {
            let v = self.eval(grid.x(j).hypot(grid.y(0)));
            field.values[grid.index(j, 0)].re = v;
        }
        Ok(field)
    }

    /// `(r, Q)` CSV on the collocation nodes.
    pub fn write_profile_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "r,Q").map_err(io)?;
        for (r, q) in self.rmesh().iter().zip(self.values()) {
            writeln!(w, "{r:.17e},{q:.17e}").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

fn nonlinearity(model: Model, omega: f64, q: f64) -> (f64, f64) {
    // value and derivative of omega q - q^3 (+ q^5)
    let q2 = q * q;
    match model {
        Model::CubicQuintic => (
            q * (omega - q2 + q2 * q2),
            omega - 3.0 * q2 + 5.0 * q2 * q2,
        ),
        Model::Cubic => (q * (omega - q2), omega - 3.0 * q2),
    }
}

fn residual(model: Model, omega: f64, lap: &DMatrix<f64>, q: &DVector<f64>) -> DVector<f64> {
    let mut f = -(lap * q);
    for (fi, qi) in f.iter_mut().zip(q.iter()) {
        *fi += nonlinearity(model, omega, *qi).0;
    }
    f
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Solves the collocation equations by damped Newton from `guess(r)`.
/// Stationary state of the periodic problem on a given grid.
#[derive(Debug, Clone)]
pub struct PeriodicGroundState {
    pub field: Field,
    pub omega: f64,
    /// Max-norm of `-Delta Q + omega Q - V(Q^2) Q` with spectral derivatives.
    pub residual_norm: f64,
    pub newton_iterations: usize,
}

/// Corrects the embedded radial profile into an exact (to `tolerance`)
/// stationary state of the spectrally discretized periodic equation.
///
/// The radial profile is not periodic: its tail at the box edge is a residual
/// of the periodic problem. Newton's method with GMRES, preconditioned by
/// `(-Delta + omega)^{-1}`, removes it.
pub fn refine_periodic(gs: &GroundState, grid: Grid2D, tolerance: f64) -> Result<PeriodicGroundState> {
    let model = gs.model;
    let omega = gs.omega;
    let n = grid.len();
    let symbol: Vec<f64> = grid.k_squared().iter().map(|k| k + omega).collect();
    let tr = std::cell::RefCell::new(SpectralTransform::new(grid));
    let spectral = std::cell::RefCell::new(vec![Complex64::new(0.0, 0.0); n]);
    let phys = std::cell::RefCell::new(vec![Complex64::new(0.0, 0.0); n]);
    // out = F^{-1}[mult(k) F[v]]
    let fourier_multiply = |v: &[f64], out: &mut [f64], divide: bool| {
        let mut tr = tr.borrow_mut();
        let mut spec = spectral.borrow_mut();
        let mut ph = phys.borrow_mut();
        for (p, v) in ph.iter_mut().zip(v) {
            *p = Complex64::new(*v, 0.0);
        }
        tr.forward_into(&ph, &mut spec);
        for (s, m) in spec.iter_mut().zip(&symbol) {
            if divide {
                *s /= m;
            } else {
                *s *= m;
            }
        }
        tr.inverse_into(&spec, &mut ph);
        for (o, p) in out.iter_mut().zip(ph.iter()) {
            *o = p.re;
        }
    };

    let mut q: Vec<f64> = gs.embed(grid)?.values.iter().map(|v| v.re).collect();
    let mut residual = vec![0.0; n];
    let mut iterations = 0;
    loop {
        fourier_multiply(&q, &mut residual, false);
        for (r, q) in residual.iter_mut().zip(&q) {
            *r -= model.potential(q * q) * q;
        }
        let rmax = residual.iter().map(|r| r.abs()).fold(0.0, f64::max);
        if rmax <= tolerance {
            let field = Field {
                grid,
                values: q.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
            };
            return Ok(PeriodicGroundState { field, omega, residual_norm: rmax, newton_iterations: iterations });
        }
        if iterations == 20 || !rmax.is_finite() {
            return Err(Error::NoConvergence { iterations, residual: rmax });
        }
        let coupling: Vec<f64> = q
            .iter()
            .map(|q| {
                let d = q * q;
                model.potential(d) + 2.0 * d * model.potential_slope(d)
            })
            .collect();
        let rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
        let mut delta = vec![0.0; n];
        crate::krylov::gmres(
            |v, out| {
                fourier_multiply(v, out, false);
                for ((o, v), c) in out.iter_mut().zip(v).zip(&coupling) {
                    *o -= c * v;
                }
            },
            |v, out| fourier_multiply(v, out, true),
            &rhs,
            &mut delta,
            50,
            1e-10,
            500,
        );
        for (q, d) in q.iter_mut().zip(&delta) {
            *q += d;
        }
        iterations += 1;
    }
}

fn newton(
    model: Model,
    omega: f64,
    mesh: RadialMesh,
    guess: impl Fn(f64) -> f64,
    opts: &GroundStateOptions,
) -> Result<GroundState> {
    let lap = mesh.laplacian();
    let mut q = DVector::from_iterator(mesh.half, mesh.r.iter().map(|r| guess(*r)));
    let mut f = residual(model, omega, &lap, &q);
    let mut norm = max_abs(&f);
    let mut iterations = 0;
    while norm > opts.tolerance {
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        let mut jac = -lap.clone();
        for (i, qi) in q.iter().enumerate() {
            jac[(i, i)] += nonlinearity(model, omega, *qi).1;
        }
        let step = jac.lu().solve(&(-&f)).ok_or(Error::NoConvergence {
            iterations,
            residual: norm,
        })?;
        let mut damping = 1.0;
        loop {
            let trial = &q + damping * &step;
            let ft = residual(model, omega, &lap, &trial);
            let nt = max_abs(&ft);
            if nt < norm || damping < 1e-3 || norm < 1e3 * opts.tolerance {
                q = trial;
                f = ft;
                norm = nt;
                break;
            }
            damping *= 0.5;
        }
    }
    let values = mesh.unfold(q.as_slice());
    if values.iter().fold(0.0f64, |a, v| a.max(v.abs())) < 1e-6 {
        // collapsed onto the trivial solution
        return Err(Error::NoConvergence {
            iterations,
            residual: norm,
        });
    }
    let d = chebyshev::differentiation_matrix(mesh.degree);
    let slope = (&d * DVector::from_column_slice(&values)).as_slice().to_vec();
    let interp = Barycentric::new(mesh.degree);
    let mut gs = GroundState {
        model,
        omega,
        residual_norm: norm,
        iterations,
        scalars: GroundStateScalars {
            omega,
            mass: 0.0,
            energy: 0.0,
            amplitude: 0.0,
            kinetic: 0.0,
            quartic: 0.0,
            sextic: 0.0,
        },
        mesh,
        values,
        slope,
        interp,
    };
    gs.scalars = integrate_scalars(&gs);
    Ok(gs)
}

/// `2 pi int_0^R f r dr`, integrated in the computational coordinate.
fn integrate_scalars(gs: &GroundState) -> GroundStateScalars {
    let rule = CompositeRule::new(0.0, 1.0, 32, 24);
    let (mut mass, mut kinetic, mut quartic, mut sextic) = (0.0, 0.0, 0.0, 0.0);
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        let r = gs.mesh.map(*s);
        let jac = gs.mesh.map_d1(*s);
        let q = gs.interp.eval(&gs.values, *s);
        let dq = gs.interp.eval(&gs.slope, *s) / jac;
        let weight = 2.0 * PI * w * r * jac;
        let q2 = q * q;
        mass += weight * q2;
        kinetic += weight * dq * dq;
        quartic += weight * q2 * q2;
        sextic += weight * q2 * q2 * q2;
    }
    let mut energy = 0.5 * kinetic - 0.25 * quartic;
    if gs.model == Model::CubicQuintic {
        energy += sextic / 6.0;
    }
    GroundStateScalars {
        omega: gs.omega,
        mass,
        energy,
        amplitude: gs.interp.eval(&gs.values, 0.0),
        kinetic,
        quartic,
        sextic,
    }
}

fn initial_guess(model: Model, omega: f64) -> Result<SolitonProfile1D> {
    SolitonProfile1D::new(model, omega)
}

/// Solves for `Q_omega`, falling back to continuation in `omega` when the
/// direct Newton iteration from the inflated 1D profile fails.
pub fn solve_ground_state(
    model: Model,
    omega: f64,
    opts: &GroundStateOptions,
) -> Result<GroundState> {
    model.check_omega(omega)?;
    let mesh = RadialMesh::new(opts.degree, opts.radius_for(omega), opts.stretch);
    let profile = initial_guess(model, omega)?;
    match newton(model, omega, mesh, |r| 1.5 * profile.evaluate(r), opts) {
        Ok(gs) => Ok(gs),
        Err(direct) if model == Model::CubicQuintic => {
            log::debug!("direct solve at omega = {omega} failed ({direct}); continuing from 0.1");
            continuation(model, 0.1, omega, opts).map_err(|_| direct)
        }
        Err(e) => Err(e),
    }
}

/// Re-solves at `omega` starting from a converged neighbour.
pub fn continue_ground_state(
    from: &GroundState,
    omega: f64,
    opts: &GroundStateOptions,
) -> Result<GroundState> {
    from.model.check_omega(omega)?;
    let mesh = RadialMesh::new(opts.degree, opts.radius_for(omega), opts.stretch);
    newton(from.model, omega, mesh, |r| from.eval(r), opts)
}

fn continuation(
    model: Model,
    start: f64,
    target: f64,
    opts: &GroundStateOptions,
) -> Result<GroundState> {
    let profile = initial_guess(model, start)?;
    let mesh = RadialMesh::new(opts.degree, opts.radius_for(start), opts.stretch);
    let mut state = newton(model, start, mesh, |r| 1.5 * profile.evaluate(r), opts)?;
    let mut step = (target - start) / 10.0;
    let mut omega = start;
    while (target - omega).abs() > 1e-15 {
        let next = if (target - omega).abs() <= step.abs() {
            target
        } else {
            omega + step
        };
        match continue_ground_state(&state, next, opts) {
            Ok(s) => {
                state = s;
                omega = next;
            }
            Err(e) => {
                step *= 0.5;
                if step.abs() < 1e-6 {
                    return Err(e);
                }
            }
        }
    }
    Ok(state)
}

/// One row of a ground-state sweep.
#[derive(Debug)]
pub struct CurveRow {
    pub omega: f64,
    pub outcome: Result<GroundStateScalars>,
}

/// Mass, energy and amplitude along `omegas`, continuing from each converged
/// state to the next; failures are recorded per row and the sweep goes on.
pub fn ground_state_curves(
    model: Model,
    omegas: &[f64],
    opts: &GroundStateOptions,
) -> Vec<CurveRow> {
    let mut previous: Option<GroundState> = None;
    omegas
        .iter()
        .map(|&omega| {
            let attempt = match &previous {
                Some(p) => continue_ground_state(p, omega, opts)
                    .or_else(|_| solve_ground_state(model, omega, opts)),
                None => solve_ground_state(model, omega, opts),
            };
            let outcome = attempt.map(|gs| {
                let s = gs.scalars;
                previous = Some(gs);
                s
            });
            CurveRow { omega, outcome }
        })
        .collect()
}

/// CSV `omega,mass,energy,amplitude` of the converged rows.
pub fn write_curves_csv(rows: &[CurveRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["omega", "mass", "energy", "amplitude"])?;
    for row in rows {
        if let Ok(s) = &row.outcome {
            w.write_record(&[
                format!("{:.17e}", s.omega),
                format!("{:.17e}", s.mass),
                format!("{:.17e}", s.energy),
                format!("{:.17e}", s.amplitude),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cq(omega: f64) -> GroundState {
        solve_ground_state(Model::CubicQuintic, omega, &GroundStateOptions::default()).unwrap()
    }

    #[test]
    fn cubic_quintic_reference_values() {
        let gs = cq(0.1);
        assert!(gs.residual_norm <= 1e-12, "{}", gs.residual_norm);
        assert!((gs.mass() - 23.74).abs() < 0.05, "M = {}", gs.mass());
        assert!((gs.amplitude() - 0.75).abs() < 0.02, "A = {}", gs.amplitude());
        assert!(gs.energy() < 0.0);
        let line = SolitonProfile1D::cubic_quintic(0.1).unwrap();
        assert!(gs.amplitude() > line.amplitude());
    }

    #[test]
    fn profile_shape() {
        let gs = cq(0.05);
        let q = gs.values();
        let r = gs.rmesh();
        assert!(q[..q.len() - 1].iter().all(|v| *v > 0.0));
        assert!(q.windows(2).all(|w| w[1] < w[0]));
        assert!(gs.eval(gs.radius() * 0.999) < 1e-10);
        assert_eq!(*r.last().unwrap(), gs.radius());
        assert!(gs.eval_derivative(1e-8).abs() < 1e-8);
    }

    #[test]
    fn pohozaev_and_nehari_hold() {
        for omega in [0.02, 0.1, 0.17] {
            let gs = cq(omega);
            assert!(gs.scalars.pohozaev_defect(gs.model) < 1e-8, "{omega}: {:e}", gs.scalars.pohozaev_defect(gs.model));
            assert!(gs.scalars.nehari_defect(gs.model) < 1e-8, "{omega}");
            // combining both identities gives E = -1/6 int Q^6
            assert!((gs.energy() + gs.scalars.sextic / 6.0).abs() < 1e-8 * gs.scalars.sextic);
        }
    }

    #[test]
    fn cubic_ground_state_scaling() {
        let opts = GroundStateOptions::default();
        let a = solve_ground_state(Model::Cubic, 0.25, &opts).unwrap();
        let b = solve_ground_state(Model::Cubic, 1.0, &opts).unwrap();
        assert!((a.mass() - 11.70).abs() < 0.1, "{}", a.mass());
        assert!((a.mass() / b.mass() - 1.0).abs() < 1e-6);
        assert!((b.amplitude() / a.amplitude() - 2.0).abs() < 2e-6);
        assert!(a.energy().abs() < 1e-8 * a.scalars.kinetic);
        assert!(b.scalars.pohozaev_defect(Model::Cubic) < 1e-8);
    }

    #[test]
    fn continuation_converges_quickly() {
        let opts = GroundStateOptions::default();
        let gs = cq(0.1);
        let next = continue_ground_state(&gs, 0.1001, &opts).unwrap();
        assert!(next.iterations <= 10, "{}", next.iterations);
        assert!(next.mass() > gs.mass());
    }

    #[test]
    fn sweep_is_monotone() {
        let rows = ground_state_curves(
            Model::CubicQuintic,
            &[0.05, 0.1, 0.15],
            &GroundStateOptions::default(),
        );
        let masses: Vec<f64> = rows.iter().map(|r| r.outcome.as_ref().unwrap().mass).collect();
        assert!(masses.windows(2).all(|w| w[1] > w[0]), "{masses:?}");
        let cubic = ground_state_curves(Model::Cubic, &[0.5, 1.0], &GroundStateOptions::default());
        let m: Vec<f64> = cubic.iter().map(|r| r.outcome.as_ref().unwrap().mass).collect();
        assert!((m[0] / m[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cubic_mass_below_cubic_quintic() {
        let cubic = solve_ground_state(Model::Cubic, 0.1, &GroundStateOptions::default()).unwrap();
        for omega in [0.02, 0.1, 0.18] {
            assert!(cubic.mass() < cq(omega).mass());
        }
    }

    #[test]
    fn invalid_frequency() {
        let opts = GroundStateOptions::default();
        assert!(matches!(
            solve_ground_state(Model::CubicQuintic, 0.2, &opts),
            Err(Error::InvalidFrequency { .. })
        ));
    }

    #[test]
    fn embedding_matches_radial_mass() {
        let gs = cq(0.1);
        let grid = Grid2D::new(10.0, 10.0, 256, 256).unwrap();
        let f = gs.embed(grid).unwrap();
        let centre = f.at(128, 128).re;
        assert!((centre - gs.amplitude()).abs() < 1e-12);
        assert!(f.max_distance(&f.reflected(true, false)) < 1e-15);
        assert!(f.max_distance(&f.reflected(false, true)) < 1e-15);
        let wide = Grid2D::new(15.0, 15.0, 256, 256).unwrap();
        let m = crate::grid::quadrature_mass(&gs.embed(wide).unwrap());
        assert!((m / gs.mass() - 1.0).abs() < 1e-8, "{m} vs {}", gs.mass());
        // a truncated radial domain cannot fill a larger box
        let opts = GroundStateOptions {
            radius: Some(10.0 / 0.1f64.sqrt()),
            ..GroundStateOptions::default()
        };
        let short = solve_ground_state(Model::CubicQuintic, 0.1, &opts).unwrap();
        assert!(matches!(short.embed(wide), Err(Error::DomainMismatch { .. })));
    }
}
