//! Exact line-soliton profiles and the initial data built from them.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};
use crate::groundstate::GroundState;
use crate::quadrature::CompositeRule;

/// Upper end of the cubic-quintic frequency window.
pub const OMEGA_MAX_CQ: f64 = 3.0 / 16.0;

/// Largest invertible cubic-quintic amplitude, `phi_omega(0)` as `omega -> 3/16`.
pub const AMPLITUDE_MAX_CQ: f64 = 0.866_025_403_784_438_6; // sqrt(3)/2

/// Which nonlinearity is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Focusing cubic plus defocusing quintic.
    CubicQuintic,
    /// Focusing cubic only.
    Cubic,
}

impl Model {
    pub fn check_omega(self, omega: f64) -> Result<()> {
        let ok = match self {
            Model::CubicQuintic => omega > 0.0 && omega < OMEGA_MAX_CQ,
            Model::Cubic => omega > 0.0 && omega.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidFrequency {
                omega,
                window: match self {
                    Model::CubicQuintic => "(0, 3/16)",
                    Model::Cubic => "(0, inf)",
                },
            })
        }
    }

    /// Inverts `amplitude -> omega` along the line-soliton family.
    pub fn omega_from_amplitude(self, a: f64) -> Result<f64> {
        match self {
            Model::CubicQuintic => fit_omega_from_amplitude(a),
            Model::Cubic => {
                if a > 0.0 && a.is_finite() {
                    Ok(0.5 * a * a)
                } else {
                    Err(Error::AmplitudeOutOfRange {
                        amplitude: a,
                        range: "(0, inf)",
                    })
                }
            }
        }
    }

    /// Pointwise nonlinearity `|u|^2 - |u|^4` (cubic: `|u|^2`) as a function of `|u|^2`.
    #[inline]
    pub fn potential(self, density: f64) -> f64 {
        match self {
            Model::CubicQuintic => density - density * density,
            Model::Cubic => density,
        }
    }

    /// Derivative of [`Model::potential`] with respect to the density.
    #[inline]
    pub fn potential_slope(self, density: f64) -> f64 {
        match self {
            Model::CubicQuintic => 1.0 - 2.0 * density,
            Model::Cubic => 1.0,
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::CubicQuintic => "cubic-quintic",
            Model::Cubic => "cubic",
        })
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cubic-quintic" | "cq" => Ok(Model::CubicQuintic),
            "cubic" => Ok(Model::Cubic),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

/// Explicit 1D solitary wave `phi_omega(x)`.
///
/// Cubic-quintic: `(1/(4w) + sqrt(1/(16w^2) - 1/(3w)) cosh(2 sqrt(w) x))^(-1/2)`.
/// Cubic: `sqrt(2w) sech(sqrt(w) x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonProfile1D {
    pub model: Model,
    pub omega: f64,
}

impl SolitonProfile1D {
    pub fn new(model: Model, omega: f64) -> Result<Self> {
        model.check_omega(omega)?;
        Ok(SolitonProfile1D { model, omega })
    }

    pub fn cubic_quintic(omega: f64) -> Result<Self> {
        Self::new(Model::CubicQuintic, omega)
    }

    pub fn cubic(omega: f64) -> Result<Self> {
        Self::new(Model::Cubic, omega)
    }

    /// `(a, b, c)` with `phi^-2 = a + b cosh(c x)`.
    fn cq_coefficients(&self) -> (f64, f64, f64) {
        let w = self.omega;
        let a = 0.25 / w;
        let b = (a * a - 1.0 / (3.0 * w)).sqrt();
        (a, b, 2.0 * w.sqrt())
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self.model {
            Model::CubicQuintic => {
                let (a, b, c) = self.cq_coefficients();
                (a + b * (c * x).cosh()).sqrt().recip()
            }
            Model::Cubic => {
                let s = self.omega.sqrt();
                (2.0 * self.omega).sqrt() / (s * x).cosh()
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.model {
            Model::CubicQuintic => {
                let (a, b, c) = self.cq_coefficients();
                let g = a + b * (c * x).cosh();
                if !g.is_finite() {
                    return 0.0;
                }
                -0.5 * b * c * (c * x).sinh() / (g * g.sqrt())
            }
            Model::Cubic => {
                let s = self.omega.sqrt();
                let ch = (s * x).cosh();
                if !ch.is_finite() {
                    return 0.0;
                }
                -(2.0 * self.omega).sqrt() * s * (s * x).tanh() / ch
            }
        }
    }

    /// `||phi||_inf = phi(0)`; for cubic-quintic equal to `sqrt(3) (1/4 - sqrt(1/16 - w/3))^(1/2)`.
    pub fn amplitude(&self) -> f64 {
        self.evaluate(0.0)
    }

    fn quadrature(&self) -> CompositeRule {
        let extent = 50.0 / self.omega.sqrt();
        CompositeRule::new(0.0, extent, 200, 20)
    }

    /// `int_R phi^2 dx`.
    pub fn mass_1d(&self) -> f64 {
        2.0 * self.quadrature().integrate(|x| self.evaluate(x).powi(2))
    }

    /// `int_R (1/2 phi'^2 - 1/4 phi^4 + 1/6 phi^6) dx`; the sextic term is absent for cubic.
    pub fn energy_1d(&self) -> f64 {
        let sextic = match self.model {
            Model::CubicQuintic => 1.0 / 6.0,
            Model::Cubic => 0.0,
        };
        2.0 * self.quadrature().integrate(|x| {
            let p = self.evaluate(x);
            let p2 = p * p;
            0.5 * self.derivative(x).powi(2) - 0.25 * p2 * p2 + sextic * p2 * p2 * p2
        })
    }

    /// Mass of the line soliton extended over a transverse period `2 pi Ly`.
    pub fn mass_2d(&self, ly: f64) -> f64 {
        2.0 * PI * ly * self.mass_1d()
    }

    /// Two-column CSV `x,phi` on `n` equispaced points of `[-half_width, half_width]`.
    pub fn write_csv(&self, path: &Path, half_width: f64, n: usize) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "x,phi").map_err(io)?;
        for i in 0..n {
            let x = -half_width + 2.0 * half_width * i as f64 / (n.max(2) - 1) as f64;
            writeln!(w, "{x:.17e},{:.17e}", self.evaluate(x)).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Closed inversion `omega = a^2/2 - a^4/3` of the cubic-quintic amplitude.
pub fn fit_omega_from_amplitude(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < AMPLITUDE_MAX_CQ) {
        return Err(Error::AmplitudeOutOfRange {
            amplitude: a,
            range: "(0, sqrt(3)/2)",
        });
    }
    let a2 = a * a;
    Ok(0.5 * a2 - a2 * a2 / 3.0)
}

/// What to sample on the grid.
#[derive(Debug, Clone)]
pub enum InitialCondition {
    /// `phi_omega(x)`, constant in `y`.
    LineSoliton { profile: SolitonProfile1D },
    /// `phi_omega(x) + lambda exp(-(x^2 + y^2))`, Gaussian centred at the origin.
    GaussianPerturbed {
        profile: SolitonProfile1D,
        lambda: f64,
    },
    /// `phi_omega(x - lambda cos(y))`.
    PeriodicDeformation {
        profile: SolitonProfile1D,
        lambda: f64,
    },
    /// Radial ground state `Q_omega(|x|)`.
    GroundState(Box<GroundState>),
}

impl InitialCondition {
    /// Cubic initial data `phi^cub_omega(x) +- sqrt(2 omega)/10 exp(-(x^2 + y^2))`.
    pub fn cubic_gaussian(omega: f64, positive: bool) -> Result<Self> {
        let profile = SolitonProfile1D::cubic(omega)?;
        let size = (2.0 * omega).sqrt() / 10.0;
        Ok(InitialCondition::GaussianPerturbed {
            profile,
            lambda: if positive { size } else { -size },
        })
    }

    pub fn model(&self) -> Model {
        match self {
            InitialCondition::LineSoliton { profile }
            | InitialCondition::GaussianPerturbed { profile, .. }
            | InitialCondition::PeriodicDeformation { profile, .. } => profile.model,
            InitialCondition::GroundState(gs) => gs.model,
        }
    }
}

/// Behaviour of the x-boundary decay check in [`build_initial_condition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCheck {
    /// Fail with [`Error::DomainTooSmall`].
    Strict,
    /// Log a warning and continue.
    Warn,
}

/// Largest admissible `|u|` on the x-boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Samples `ic` at the grid nodes.
pub fn build_initial_condition(
    ic: &InitialCondition,
    grid: Grid2D,
    check: BoundaryCheck,
) -> Result<Field> {
    let field = match ic {
        InitialCondition::LineSoliton { profile } => {
            Field::from_real_fn(grid, |x, _| profile.evaluate(x))
        }
        InitialCondition::GaussianPerturbed { profile, lambda } => {
            Field::from_real_fn(grid, |x, y| {
                profile.evaluate(x) + lambda * (-(x * x + y * y)).exp()
            })
        }
        InitialCondition::PeriodicDeformation { profile, lambda } => {
            Field::from_real_fn(grid, |x, y| profile.evaluate(x - lambda * y.cos()))
        }
        InitialCondition::GroundState(gs) => gs.embed(grid)?,
    };
    let edge = field.x_boundary_max();
    if edge >= BOUNDARY_TOLERANCE {
        match check {
            BoundaryCheck::Strict => {
                return Err(Error::DomainTooSmall {
                    boundary_value: edge,
                    limit: BOUNDARY_TOLERANCE,
                })
            }
            BoundaryCheck::Warn => log::warn!(
                "initial data is {edge:e} at the x-boundary (Lx = {}); periodic wrap-around is not negligible",
                grid.lx
            ),
        }
    }
    Ok(field)
}

/// Convenience wrapper: a `y`-independent copy of `phi` on the grid.
pub fn line_soliton_field(profile: &SolitonProfile1D, grid: Grid2D) -> Field {
    Field::from_real_fn(grid, |x, _| profile.evaluate(x))
}

/// `phi_omega(x) exp(i omega t)`.
pub fn exact_line_soliton(profile: &SolitonProfile1D, grid: Grid2D, t: f64) -> Field {
    let phase = Complex64::from_polar(1.0, profile.omega * t);
    Field::from_fn(grid, |x, _| phase * profile.evaluate(x))
}
