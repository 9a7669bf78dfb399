//! Post-processing of evolved fields: line-soliton fits, peak detection and
//! the line-versus-lump classification.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::groundstate::{solve_ground_state, GroundStateOptions};
use crate::integrator::RunRecord;
use crate::profiles::{Model, SolitonProfile1D};

/// Line soliton fitted to a 2D field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub omega_star: f64,
    /// Peak height of `|u|` inverted to obtain `omega_star`.
    pub fit_amplitude: f64,
    /// Max-norm mismatch between `|u|` on the row through the peak and the fitted profile.
    pub residual: f64,
    /// Estimated centre of the fitted profile.
    pub centre: f64,
}

impl FitResult {
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.fit_amplitude
    }
}

/// Per-row `max_x |u|`, indexed by the `y` node.
pub fn row_maxima(f: &Field) -> Vec<f64> {
    (0..f.grid.ny)
        .map(|m| f.row(m).iter().map(|v| v.norm()).fold(0.0, f64::max))
        .collect()
}

/// Per-row peak height of `|u|`, refined between nodes by a parabola through
/// the largest sample and its two periodic neighbours.
pub fn interpolated_row_maxima(f: &Field) -> Vec<f64> {
    let nx = f.grid.nx;
    (0..f.grid.ny)
        .map(|m| {
            let row: Vec<f64> = f.row(m).iter().map(|v| v.norm()).collect();
            let (j, &b) = row
                .iter()
                .enumerate()
                .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            let a = row[(j + nx - 1) % nx];
            let c = row[(j + 1) % nx];
            let curvature = a - 2.0 * b + c;
            if curvature < 0.0 {
                b - (a - c).powi(2) / (8.0 * curvature)
            } else {
                b
            }
        })
        .collect()
}

/// Node of the largest `|u|` as `(j, m)`.
fn argmax(f: &Field) -> (usize, usize) {
    let (i, _) = f
        .values
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, v)| {
            let a = v.norm();
            if a > best.1 {
                (i, a)
            } else {
                best
            }
        });
    (i % f.grid.nx, i / f.grid.nx)
}

/// Centre of `profile` best matching `row` in least squares: a root of the
/// derivative of the squared mismatch, bracketed within one cell of node `j0`.
fn fit_centre(row: &[f64], xs: &[f64], j0: usize, profile: &SolitonProfile1D) -> f64 {
    let dx = xs[1] - xs[0];
    let slope = |c: f64| -> f64 {
        row.iter()
            .zip(xs)
            .map(|(u, x)| (u - profile.evaluate(x - c)) * profile.derivative(x - c))
            .sum()
    };
    let cost = |c: f64| -> f64 {
        row.iter()
            .zip(xs)
            .map(|(u, x)| (u - profile.evaluate(x - c)).powi(2))
            .sum()
    };
    let (mut a, mut b) = (xs[j0] - dx, xs[j0] + dx);
    let (mut ga, gb) = (slope(a), slope(b));
    if ga * gb > 0.0 {
        return if cost(a) < cost(b) { a } else { b };
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let gm = slope(mid);
        if gm == 0.0 || b - a < 1e-14 * dx.max(mid.abs()) {
            return mid;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Fits `|u|` to a line soliton `phi_{omega*}` through its `y`-averaged peak height.
///
/// Fails with [`Error::AmplitudeOutOfRange`] when that height admits no line
/// soliton, which is itself a sign of lump formation or blow-up.
/// How the peak height of a nearly line-shaped field is read off.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeEstimate {
    /// Mean over `y` of the row maxima.
    #[default]
    RowMean,
    /// Largest row maximum, i.e. `||u||_inf`.
    Peak,
}

impl AmplitudeEstimate {
    pub fn of(self, f: &Field) -> f64 {
        let maxima = interpolated_row_maxima(f);
        match self {
            AmplitudeEstimate::RowMean => maxima.iter().sum::<f64>() / maxima.len() as f64,
            AmplitudeEstimate::Peak => maxima.iter().copied().fold(0.0, f64::max),
        }
    }
}

impl std::fmt::Display for AmplitudeEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AmplitudeEstimate::RowMean => "row-mean",
            AmplitudeEstimate::Peak => "peak",
        })
    }
}

impl std::str::FromStr for AmplitudeEstimate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row-mean" => Ok(AmplitudeEstimate::RowMean),
            "peak" => Ok(AmplitudeEstimate::Peak),
            _ => Err(Error::InvalidConfig(format!("unknown amplitude estimate {s:?}"))),
        }
    }
}

/// Fits a line soliton using the row-mean amplitude.
pub fn fit_line_soliton(f: &Field, model: Model) -> Result<FitResult> {
    fit_line_soliton_with(f, model, AmplitudeEstimate::RowMean)
}

pub fn fit_line_soliton_with(f: &Field, model: Model, estimate: AmplitudeEstimate) -> Result<FitResult> {
    let amplitude = estimate.of(f);
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::AmplitudeOutOfRange {
            amplitude,
            range: "(0, inf)",
        });
    }
    let omega_star = model.omega_from_amplitude(amplitude)?;
    let profile = SolitonProfile1D::new(model, omega_star)?;
    let (j0, m0) = argmax(f);
    let row: Vec<f64> = f.row(m0).iter().map(|v| v.norm()).collect();
    let xs = f.grid.xs();
    let centre = fit_centre(&row, &xs, j0, &profile);
    let residual = row
        .iter()
        .zip(&xs)
        .map(|(u, x)| (u - profile.evaluate(x - centre)).abs())
        .fold(0.0, f64::max);
    Ok(FitResult {
        omega_star,
        fit_amplitude: amplitude,
        residual,
        centre,
    })
}

/// Labels `|u| > rel_threshold * max|u|` into 4-connected periodic components.
/// Returns one label per node (`usize::MAX` below threshold) and the count.
fn components(f: &Field, rel_threshold: f64) -> (Vec<usize>, usize) {
    let (nx, ny) = (f.grid.nx, f.grid.ny);
    let peak = f.sup_norm();
    let above: Vec<bool> = f
        .values
        .iter()
        .map(|v| peak > 0.0 && v.norm() > rel_threshold * peak)
        .collect();
    let mut label = vec![usize::MAX; nx * ny];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..nx * ny {
        if !above[start] || label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (j, m) = (i % nx, i / nx);
            let neighbours = [
                m * nx + (j + 1) % nx,
                m * nx + (j + nx - 1) % nx,
                ((m + 1) % ny) * nx + j,
                ((m + ny - 1) % ny) * nx + j,
            ];
            for k in neighbours {
                if above[k] && label[k] == usize::MAX {
                    label[k] = count;
                    stack.push(k);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Number of connected components of `{|u| > rel_threshold max|u|}` under
/// periodic 4-neighbour adjacency.
pub fn count_peaks(f: &Field, rel_threshold: f64) -> usize {
    components(f, rel_threshold).1
}

/// Ratio of the `x` to `y` second moments of `|u|^2` over the thresholded
/// component that contains the global maximum, measured from the maximum
/// with periodic minimum-image distances. Near 1 for a round lump, small for
/// a line stretched along `y`.
pub fn anisotropy(f: &Field, rel_threshold: f64) -> f64 {
    let g = f.grid;
    let (label, _) = components(f, rel_threshold);
    let (j0, m0) = argmax(f);
    let target = label[g.index(j0, m0)];
    if target == usize::MAX {
        return f64::NAN;
    }
    let (px, py) = (2.0 * PI * g.lx, 2.0 * PI * g.ly);
    let wrap = |d: f64, p: f64| d - p * (d / p).round();
    let (mut sxx, mut syy, mut w) = (0.0, 0.0, 0.0);
    for m in 0..g.ny {
        for j in 0..g.nx {
            let i = g.index(j, m);
            if label[i] != target {
                continue;
            }
            let a = f.values[i].norm_sqr();
            let dx = wrap(g.x(j) - g.x(j0), px);
            let dy = wrap(g.y(m) - g.y(m0), py);
            sxx += a * dx * dx;
            syy += a * dy * dy;
            w += a;
        }
    }
    if w == 0.0 {
        return f64::NAN;
    }
    // a single-node component has zero spread in both directions
    if syy == 0.0 {
        return if sxx == 0.0 { 1.0 } else { f64::INFINITY };
    }
    sxx / syy
}

/// Relative transverse modulation `(max_y - min_y) / max` of the row maxima.
pub fn transverse_modulation(f: &Field) -> f64 {
    let maxima = row_maxima(f);
    let hi = maxima.iter().cloned().fold(0.0, f64::max);
    let lo = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi > 0.0 {
        (hi - lo) / hi
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    LineSolitonRetained,
    LumpFormed,
    BlownUp,
    Undecided,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::LineSolitonRetained => "line-soliton-retained",
            Classification::LumpFormed => "lump-formed",
            Classification::BlownUp => "blown-up",
            Classification::Undecided => "undecided",
        })
    }
}

impl std::str::FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line-soliton-retained" => Ok(Classification::LineSolitonRetained),
            "lump-formed" => Ok(Classification::LumpFormed),
            "blown-up" => Ok(Classification::BlownUp),
            "undecided" => Ok(Classification::Undecided),
            other => Err(Error::InvalidConfig(format!("unknown classification `{other}`"))),
        }
    }
}

/// Tunable thresholds of [`classify_final_state`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Peak detection level relative to `max |u|`.
    pub peak_level: f64,
    /// Minimum [`transverse_modulation`] of a lump.
    pub modulation: f64,
    /// Admissible [`anisotropy`] band of a lump.
    pub anisotropy: (f64, f64),
    /// Maximum relative fit residual of a retained line soliton.
    pub fit_residual: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            peak_level: 0.5,
            modulation: 0.25,
            anisotropy: (0.5, 2.0),
            fit_residual: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub classification: Classification,
    pub peak_count: usize,
    pub anisotropy: f64,
    pub modulation: f64,
    pub fit: Option<FitResult>,
}

impl StabilityVerdict {
    /// Writes `verdict.csv`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["classification", "peak_count", "anisotropy", "omega_star", "residual"])?;
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.12e}")).unwrap_or_default();
        w.write_record(&[
            self.classification.to_string(),
            self.peak_count.to_string(),
            format!("{:.12e}", self.anisotropy),
            opt(self.fit.map(|f| f.omega_star)),
            opt(self.fit.map(|f| f.relative_residual())),
        ])?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Classifies the end state of a run.
///
/// Runs stopped by the energy-drift or overflow rule are blown up. Otherwise a
/// strongly `y`-modulated, roughly round peak is a lump, and a field matching
/// a line soliton within the residual threshold is a retained line soliton.
pub fn classify_final_state(
    record: &RunRecord,
    last: &Field,
    model: Model,
    thresholds: &Thresholds,
) -> StabilityVerdict {
    let peak_count = count_peaks(last, thresholds.peak_level);
    let aniso = anisotropy(last, thresholds.peak_level);
    let modulation = transverse_modulation(last);
    let fit = fit_line_soliton(last, model).ok();
    let (lo, hi) = thresholds.anisotropy;
    let classification = if record.termination.stopped_early() {
        Classification::BlownUp
    } else if modulation > thresholds.modulation && aniso >= lo && aniso <= hi {
        Classification::LumpFormed
    } else if fit.is_some_and(|f| f.relative_residual() < thresholds.fit_residual) {
        Classification::LineSolitonRetained
    } else {
        Classification::Undecided
    };
    StabilityVerdict {
        classification,
        peak_count,
        anisotropy: aniso,
        modulation,
        fit,
    }
}

/// Torus length `M(Q_omega) / (2 pi M_1D(phi_omega))` above which a line
/// soliton carries enough mass per period to form a lump.
pub fn critical_torus_length(model: Model, omega: f64, opts: &GroundStateOptions) -> Result<f64> {
    let gs = solve_ground_state(model, omega, opts)?;
    let line = SolitonProfile1D::new(model, omega)?;
    Ok(gs.mass() / (2.0 * PI * line.mass_1d()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use crate::integrator::{Sample, Termination};
    use crate::profiles::line_soliton_field;
    use num_complex::Complex64;

    fn record(termination: Termination) -> RunRecord {
        let s = Sample {
            t: 0.0,
            sup_norm: 1.0,
            mass: 1.0,
            energy: -1.0,
            delta_e: 0.0,
        };
        RunRecord {
            samples: vec![s],
            termination,
            snapshots: vec![],
        }
    }

    #[test]
    fn self_fit_is_exact() {
        let g = Grid2D::new(40.0, 2.0, 1024, 16).unwrap();
        for w in [0.05, 0.1, 0.15, 0.18] {
            let p = SolitonProfile1D::cubic_quintic(w).unwrap();
            let fit = fit_line_soliton(&line_soliton_field(&p, g), Model::CubicQuintic).unwrap();
            assert!((fit.omega_star - w).abs() < 1e-10, "{w}: {}", fit.omega_star);
            assert!(fit.residual < 1e-10);
        }
        let p = SolitonProfile1D::cubic(0.7).unwrap();
        let fit = fit_line_soliton(&line_soliton_field(&p, g), Model::Cubic).unwrap();
        assert!((fit.omega_star - 0.7).abs() < 1e-12 && fit.residual < 1e-12);
    }

    #[test]
    fn fit_is_gauge_invariant_and_tracks_shifts() {
        let g = Grid2D::new(40.0, 2.0, 1024, 16).unwrap();
        let p = SolitonProfile1D::cubic_quintic(0.1).unwrap();
        let f = Field::from_fn(g, |x, y| Complex64::from_polar(p.evaluate(x - 3.1), 0.4 * x + y));
        let fit = fit_line_soliton(&f, Model::CubicQuintic).unwrap();
        let plain = fit_line_soliton(&Field::from_real_fn(g, |x, _| p.evaluate(x - 3.1)), Model::CubicQuintic).unwrap();
        assert!((fit.omega_star - plain.omega_star).abs() < 1e-14);
        assert!((fit.residual - plain.residual).abs() < 1e-14);
        assert!((fit.centre - 3.1).abs() < 1e-6, "{}", fit.centre);
        // off-node peaks carry the parabolic-interpolation error of the amplitude
        assert!(fit.relative_residual() < 1e-5, "{}", fit.relative_residual());
    }

    #[test]
    fn fit_rejects_overlarge_amplitude() {
        let g = Grid2D::new(4.0, 1.0, 64, 8).unwrap();
        let f = Field::from_real_fn(g, |x, _| 0.9 * (-x * x).exp());
        assert!(matches!(
            fit_line_soliton(&f, Model::CubicQuintic),
            Err(Error::AmplitudeOutOfRange { .. })
        ));
        assert!(fit_line_soliton(&Field::zeros(g), Model::Cubic).is_err());
    }

    #[test]
    fn peaks_of_gaussians() {
        let g = Grid2D::new(3.0, 3.0, 64, 64).unwrap();
        let one = Field::from_real_fn(g, |x, y| (-(x * x + y * y)).exp());
        assert_eq!(count_peaks(&one, 0.5), 1);
        let two = Field::from_real_fn(g, |x, y| (-(x * x + (y - 4.0).powi(2))).exp() + (-(x * x + (y + 4.0).powi(2))).exp());
        assert_eq!(count_peaks(&two, 0.5), 2);
        // a bump straddling the periodic seam is still one component
        let seam = Field::from_real_fn(g, |x, y| {
            let d = (y.abs() - 3.0 * PI).abs();
            (-(x * x + d * d)).exp()
        });
        assert_eq!(count_peaks(&seam, 0.5), 1);
        assert_eq!(count_peaks(&Field::zeros(g), 0.5), 0);
    }

    #[test]
    fn anisotropy_of_round_and_line_states() {
        let g = Grid2D::new(3.0, 3.0, 128, 128).unwrap();
        let round = Field::from_real_fn(g, |x, y| (-(x * x + y * y) / 4.0).exp());
        assert!((anisotropy(&round, 0.5) - 1.0).abs() < 0.05);
        let p = SolitonProfile1D::cubic_quintic(0.1).unwrap();
        let line = line_soliton_field(&p, g);
        assert!(anisotropy(&line, 0.5) < 0.5);
        assert!(transverse_modulation(&line) < 1e-14);
        assert!((transverse_modulation(&round) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn classification_rules() {
        let th = Thresholds::default();
        let g = Grid2D::new(20.0, 3.0, 256, 64).unwrap();
        let p = SolitonProfile1D::cubic_quintic(0.1).unwrap();
        let line = line_soliton_field(&p, g);
        let v = classify_final_state(&record(Termination::Completed), &line, Model::CubicQuintic, &th);
        assert_eq!(v.classification, Classification::LineSolitonRetained);
        assert_eq!(v.peak_count, 1);
        let v = classify_final_state(&record(Termination::EnergyDriftStop { t: 1.0 }), &line, Model::CubicQuintic, &th);
        assert_eq!(v.classification, Classification::BlownUp);
        let lump = Field::from_real_fn(g, |x, y| 0.75 * (-(x * x + y * y) / 8.0).exp());
        let v = classify_final_state(&record(Termination::Completed), &lump, Model::CubicQuintic, &th);
        assert_eq!(v.classification, Classification::LumpFormed);
        // modulated but elongated along x: neither
        let streak = Field::from_real_fn(g, |x, y| 0.5 * (-(x * x / 400.0 + y * y)).exp());
        let v = classify_final_state(&record(Termination::Completed), &streak, Model::CubicQuintic, &th);
        assert_eq!(v.classification, Classification::Undecided);
    }

    #[test]
    fn critical_length_brackets_observed_regimes() {
        let opts = GroundStateOptions::default();
        let l1 = critical_torus_length(Model::CubicQuintic, 0.1, &opts).unwrap();
        assert!(l1 > 2.0 && l1 < 3.0, "{l1}");
        let l2 = critical_torus_length(Model::CubicQuintic, 0.18, &opts).unwrap();
        assert!(l2 > 3.0 && l2 > l1, "{l2}");
    }

    #[test]
    fn verdict_csv_columns() {
        let dir = std::env::temp_dir().join(format!("cqnls-verdict-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("verdict.csv");
        let v = StabilityVerdict {
            classification: Classification::LumpFormed,
            peak_count: 1,
            anisotropy: 1.1,
            modulation: 0.9,
            fit: None,
        };
        v.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("classification,peak_count,anisotropy,omega_star,residual"));
        assert!(lines.next().unwrap().starts_with("lump-formed,1,1.1"));
        std::fs::remove_dir_all(dir).ok();
    }
}
