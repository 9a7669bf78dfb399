//! Run configuration: everything needed to build initial data and an
//! [`Evolution`], readable from TOML.
//!
//! ```toml
//! model = "cubic-quintic"
//! omega = 0.1
//!
//! [initial]
//! kind = "gaussian"        # line-soliton | gaussian | deformation | ground-state
//! lambda = 0.05
//!
//! [grid]
//! lx = 40.0
//! ly = 2.0
//! nx = 1024
//! ny = 128
//!
//! [time]
//! t_final = 20.0
//! steps = 1000
//! snapshot_times = [5.0, 20.0]
//!
//! [stop]
//! energy_drift = 1e-3
//! sup_limit = 1e6
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};
use crate::groundstate::{refine_periodic, solve_ground_state, GroundStateOptions};
use crate::integrator::{Evolution, Scheme, StopRule, DEFAULT_STIFF_CUTOFF};
use crate::profiles::{
    build_initial_condition, exact_line_soliton, BoundaryCheck, InitialCondition, Model,
    SolitonProfile1D,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    LineSoliton,
    /// Line soliton plus `lambda exp(-(x^2 + y^2))`.
    Gaussian { lambda: f64 },
    /// Line soliton displaced to `x - lambda cos(y)`.
    Deformation { lambda: f64 },
    /// Radial ground state, corrected to a stationary state of the periodic
    /// problem unless `periodic = false`.
    GroundState {
        #[serde(default = "yes")]
        periodic: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_final: f64,
    pub steps: usize,
    #[serde(default)]
    pub sample_stride: Option<usize>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default)]
    pub dealias: bool,
    #[serde(default = "default_cutoff")]
    pub stiff_cutoff: f64,
}

fn default_scheme() -> Scheme {
    Scheme::Driscoll
}

fn default_cutoff() -> f64 {
    DEFAULT_STIFF_CUTOFF
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub omega: f64,
    pub initial: InitialSpec,
    pub grid: GridSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub stop: StopRule,
    /// Fail instead of warning when the data does not decay at the x-boundary.
    #[serde(default)]
    pub strict_boundary: bool,
}

/// Initial data together with the exact solution it generates, if known.
#[derive(Debug, Clone)]
pub struct PreparedInitial {
    pub field: Field,
    /// Stationary profile whose phase rotation `exp(i omega t)` is exact.
    pub stationary: Option<Field>,
}

impl PreparedInitial {
    pub fn exact_at(&self, omega: f64, t: f64) -> Option<Field> {
        self.stationary
            .as_ref()
            .map(|f| f.scaled(Complex64::from_polar(1.0, omega * t)))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.grid.lx, self.grid.ly, self.grid.nx, self.grid.ny)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.check_omega(self.omega)?;
        self.evolution()?.validate()
    }

    pub fn evolution(&self) -> Result<Evolution> {
        let mut ev = Evolution::new(self.model, self.grid()?, self.time.t_final, self.time.steps);
        if let Some(s) = self.time.sample_stride {
            ev.sample_stride = s;
        }
        ev.snapshot_times = self.time.snapshot_times.clone();
        ev.scheme = self.time.scheme;
        ev.dealias = self.time.dealias;
        ev.stiff_cutoff = self.time.stiff_cutoff;
        ev.stop = self.stop;
        Ok(ev)
    }

    pub fn profile(&self) -> Result<SolitonProfile1D> {
        SolitonProfile1D::new(self.model, self.omega)
    }

    pub fn prepare_initial(&self) -> Result<PreparedInitial> {
        let grid = self.grid()?;
        let check = if self.strict_boundary {
            BoundaryCheck::Strict
        } else {
            BoundaryCheck::Warn
        };
        let profile = self.profile()?;
        let ic = match self.initial {
            InitialSpec::LineSoliton => {
                let field = build_initial_condition(&InitialCondition::LineSoliton { profile }, grid, check)?;
                return Ok(PreparedInitial {
                    stationary: Some(exact_line_soliton(&profile, grid, 0.0)),
                    field,
                });
            }
            InitialSpec::Gaussian { lambda } => InitialCondition::GaussianPerturbed { profile, lambda },
            InitialSpec::Deformation { lambda } => InitialCondition::PeriodicDeformation { profile, lambda },
            InitialSpec::GroundState { periodic } => {
                let gs = solve_ground_state(self.model, self.omega, &GroundStateOptions::default())?;
                let field = if periodic {
                    refine_periodic(&gs, grid, 1e-12)?.field
                } else {
                    build_initial_condition(&InitialCondition::GroundState(Box::new(gs)), grid, check)?
                };
                return Ok(PreparedInitial {
                    stationary: Some(field.clone()),
                    field,
                });
            }
        };
        Ok(PreparedInitial {
            field: build_initial_condition(&ic, grid, check)?,
            stationary: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
model = "cubic-quintic"
omega = 0.1

[initial]
kind = "gaussian"
lambda = 0.05

[grid]
lx = 40.0
ly = 2.0
nx = 1024
ny = 128

[time]
t_final = 20.0
steps = 1000
snapshot_times = [5.0, 20.0]
"#;

    #[test]
    fn parses_and_defaults() {
        let cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.initial, InitialSpec::Gaussian { lambda: 0.05 });
        assert_eq!(cfg.stop, StopRule::default());
        let ev = cfg.evolution().unwrap();
        assert_eq!(ev.sample_stride, 1);
        assert!((ev.dt() - 0.02).abs() < 1e-15);
        assert_eq!(ev.scheme, Scheme::Driscoll);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        let again = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_bad_values() {
        let bad_grid = SAMPLE.replace("nx = 1024", "nx = 1000");
        assert!(matches!(RunConfig::from_toml_str(&bad_grid), Err(Error::InvalidConfig(_))));
        let bad_omega = SAMPLE.replace("omega = 0.1", "omega = 0.2");
        assert!(matches!(RunConfig::from_toml_str(&bad_omega), Err(Error::InvalidFrequency { .. })));
        let unknown = SAMPLE.replace("lambda = 0.05", "lambda = 0.05\nsize = 1");
        assert!(matches!(RunConfig::from_toml_str(&unknown), Err(Error::Toml(_))));
        let threshold = format!("{SAMPLE}\n[stop]\nenergy_drift = 2.0\nsup_limit = 1e6\n");
        assert!(RunConfig::from_toml_str(&threshold).is_err());
    }

    #[test]
    fn strict_boundary_rejects_narrow_box() {
        let mut cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        cfg.grid.lx = 2.0;
        cfg.grid.nx = 64;
        cfg.strict_boundary = true;
        assert!(matches!(cfg.prepare_initial(), Err(Error::DomainTooSmall { .. })));
        cfg.strict_boundary = false;
        assert!(cfg.prepare_initial().is_ok());
    }
}
