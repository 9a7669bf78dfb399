//! Periodic computational domain, Fourier transforms and quadrature.
//!
//! The domain is the rectangle `[-Lx pi, Lx pi) x [-Ly pi, Ly pi)` sampled at
//! `Nx x Ny` equispaced nodes. Physical fields are stored row-major with `x`
//! fastest: sample `(j, m)` lives at index `m * Nx + j`, with
//! `x_j = -Lx pi + j dx` and `y_m = -Ly pi + m dy`. The origin is node
//! `(Nx/2, Ny/2)`.
//!
//! Transform convention: the forward transform is unnormalized,
//! `u_hat[k] = sum_j u[j] exp(-i k x_j)` up to the phase of the grid offset,
//! and the inverse carries the `1/(Nx Ny)` factor. Spectra are stored
//! transposed (`kx`-major, `ky` fastest) so that each 2D transform needs a
//! single transpose; use [`FourierField::get`] rather than raw indexing.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic rectangle with FFT wavenumbers `kx = n / Lx`, `ky = n / Ly`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid2D {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
}

fn check_modes(name: &str, n: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidConfig(format!(
            "{name} = {n} must be a power of two >= 8"
        )));
    }
    Ok(())
}

impl Grid2D {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        for (name, v) in [("Lx", lx), ("Ly", ly)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} = {v} must be positive")));
            }
        }
        check_modes("Nx", nx)?;
        check_modes("Ny", ny)?;
        Ok(Grid2D { lx, ly, nx, ny })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI * self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * PI * self.ly / self.ny as f64
    }

    /// Area element `dx * dy` used by every quadrature.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x(&self, j: usize) -> f64 {
        -PI * self.lx + j as f64 * self.dx()
    }

    pub fn y(&self, m: usize) -> f64 {
        -PI * self.ly + m as f64 * self.dy()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|m| self.y(m)).collect()
    }

    pub fn index(&self, j: usize, m: usize) -> usize {
        m * self.nx + j
    }

    pub fn kx(&self, j: usize) -> f64 {
        fft_wavenumber(j, self.nx) / self.lx
    }

    pub fn ky(&self, m: usize) -> f64 {
        fft_wavenumber(m, self.ny) / self.ly
    }

    pub fn kxs(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.kx(j)).collect()
    }

    pub fn kys(&self) -> Vec<f64> {
        (0..self.ny).map(|m| self.ky(m)).collect()
    }

    /// `|k|^2` in the spectral (transposed) layout of [`FourierField`].
    pub fn k_squared(&self) -> Vec<f64> {
        let ky = self.kys();
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.nx {
            let kx2 = self.kx(j).powi(2);
            out.extend(ky.iter().map(|k| kx2 + k * k));
        }
        out
    }

    /// Two-thirds rule mask in spectral layout: `true` for retained modes.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let keep = |i: usize, n: usize| (fft_wavenumber(i, n).abs() as usize) <= n / 3;
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.nx {
            let kx_ok = keep(j, self.nx);
            out.extend((0..self.ny).map(|m| kx_ok && keep(m, self.ny)));
        }
        out
    }
}

/// Integer wavenumber of FFT bin `i` out of `n` (FFT ordering, Nyquist negative).
fn fft_wavenumber(i: usize, n: usize) -> f64 {
    if i < n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// Complex samples on the grid, row-major with `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid2D,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid2D) -> Self {
        Field {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for m in 0..grid.ny {
            let y = grid.y(m);
            for j in 0..grid.nx {
                values.push(f(grid.x(j), y));
            }
        }
        Field { grid, values }
    }

    pub fn from_real_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, |x, y| Complex64::new(f(x, y), 0.0))
    }

    pub fn at(&self, j: usize, m: usize) -> Complex64 {
        self.values[self.grid.index(j, m)]
    }

    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.values[m * self.grid.nx..(m + 1) * self.grid.nx]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Max-norm distance to another field on the same grid.
    pub fn max_distance(&self, other: &Field) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Periodic shift by `(sx, sy)` grid cells: `out(j, m) = self(j - sx, m - sy)`.
    pub fn shifted(&self, sx: usize, sy: usize) -> Field {
        let g = self.grid;
        let mut out = Field::zeros(g);
        for m in 0..g.ny {
            let ms = (m + sy) % g.ny;
            for j in 0..g.nx {
                let js = (j + sx) % g.nx;
                out.values[g.index(js, ms)] = self.values[g.index(j, m)];
            }
        }
        out
    }

    /// Mirror image about the grid origin in the selected directions, e.g. `u(-x, y)`.
    pub fn reflected(&self, flip_x: bool, flip_y: bool) -> Field {
        let g = self.grid;
        let mirror = |i: usize, n: usize, flip: bool| if flip { (n - i) % n } else { i };
        let mut out = Field::zeros(g);
        for m in 0..g.ny {
            for j in 0..g.nx {
                out.values[g.index(j, m)] =
                    self.values[g.index(mirror(j, g.nx, flip_x), mirror(m, g.ny, flip_y))];
            }
        }
        out
    }

    /// Largest `|u|` on the two x-boundary columns.
    pub fn x_boundary_max(&self) -> f64 {
        let g = self.grid;
        (0..g.ny)
            .flat_map(|m| [self.at(0, m).norm(), self.at(g.nx - 1, m).norm()])
            .fold(0.0, f64::max)
    }
}

/// Spectrum of a [`Field`], stored `kx`-major with `ky` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    pub grid: Grid2D,
    pub values: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(grid: Grid2D) -> Self {
        FourierField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Coefficient at FFT bins `(jx, my)`.
    pub fn get(&self, jx: usize, my: usize) -> Complex64 {
        self.values[jx * self.grid.ny + my]
    }
}

/// Reusable FFT plans and scratch for one grid. Not `Sync`-shared: each
/// simulation owns its own instance.
pub struct SpectralTransform {
    grid: Grid2D,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    work: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralTransform").field("grid", &self.grid).finish()
    }
}

impl SpectralTransform {
    pub fn new(grid: Grid2D) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(grid.nx);
        let inv_x = planner.plan_fft_inverse(grid.nx);
        let fwd_y = planner.plan_fft_forward(grid.ny);
        let inv_y = planner.plan_fft_inverse(grid.ny);
        let scratch_len = [&fwd_x, &inv_x, &fwd_y, &inv_y]
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        SpectralTransform {
            grid,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
            work: vec![Complex64::new(0.0, 0.0); grid.len()],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    /// Physical (x-fastest) samples to spectrum (transposed layout).
    pub fn forward_into(&mut self, physical: &[Complex64], spectral: &mut [Complex64]) {
        let g = self.grid;
        self.work.copy_from_slice(physical);
        self.fwd_x.process_with_scratch(&mut self.work, &mut self.scratch);
        transpose(&self.work, spectral, g.ny, g.nx);
        self.fwd_y.process_with_scratch(spectral, &mut self.scratch);
    }

    /// Spectrum (transposed layout) to physical samples, including `1/(Nx Ny)`.
    pub fn inverse_into(&mut self, spectral: &[Complex64], physical: &mut [Complex64]) {
        let g = self.grid;
        self.work.copy_from_slice(spectral);
        self.inv_y.process_with_scratch(&mut self.work, &mut self.scratch);
        transpose(&self.work, physical, g.nx, g.ny);
        self.inv_x.process_with_scratch(physical, &mut self.scratch);
        let norm = 1.0 / g.len() as f64;
        for v in physical.iter_mut() {
            *v *= norm;
        }
    }

    pub fn forward(&mut self, f: &Field) -> FourierField {
        let mut out = FourierField::zeros(self.grid);
        self.forward_into(&f.values, &mut out.values);
        out
    }

    pub fn inverse(&mut self, f: &FourierField) -> Field {
        let mut out = Field::zeros(self.grid);
        self.inverse_into(&f.values, &mut out.values);
        out
    }
}

/// Transpose a `rows x cols` row-major block into `cols x rows`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const BLOCK: usize = 16;
    for r0 in (0..rows).step_by(BLOCK) {
        for c0 in (0..cols).step_by(BLOCK) {
            for r in r0..(r0 + BLOCK).min(rows) {
                for c in c0..(c0 + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// One-shot forward transform (plans a fresh [`SpectralTransform`]).
pub fn transform(f: &Field) -> FourierField {
    SpectralTransform::new(f.grid).forward(f)
}

/// One-shot inverse transform.
pub fn inverse_transform(f: &FourierField) -> Field {
    SpectralTransform::new(f.grid).inverse(f)
}

/// The four integrals entering mass and energy.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Integrals {
    /// `int |u|^2`
    pub mass: f64,
    /// `int |grad u|^2`
    pub gradient: f64,
    /// `int |u|^4`
    pub quartic: f64,
    /// `int |u|^6`
    pub sextic: f64,
}

impl Integrals {
    /// Hamiltonian `1/2 |grad u|^2 - 1/4 |u|^4 + 1/6 |u|^6` (cubic model drops the last term).
    pub fn energy(&self, model: crate::profiles::Model) -> f64 {
        let base = 0.5 * self.gradient - 0.25 * self.quartic;
        match model {
            crate::profiles::Model::CubicQuintic => base + self.sextic / 6.0,
            crate::profiles::Model::Cubic => base,
        }
    }
}

/// Trapezoidal mass `sum |u|^2 dx dy`.
pub fn quadrature_mass(f: &Field) -> f64 {
    f.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * f.grid.cell_area()
}

/// Power integrals of the physical samples; the gradient term is left zero.
pub(crate) fn power_integrals(values: &[Complex64], cell_area: f64) -> Integrals {
    let (mut m, mut q, mut s) = (0.0, 0.0, 0.0);
    for v in values {
        let a = v.norm_sqr();
        m += a;
        q += a * a;
        s += a * a * a;
    }
    Integrals {
        mass: m * cell_area,
        gradient: 0.0,
        quartic: q * cell_area,
        sextic: s * cell_area,
    }
}

/// `int |grad u|^2` from a spectrum via Parseval.
pub(crate) fn gradient_integral(spectrum: &[Complex64], k2: &[f64], grid: &Grid2D) -> f64 {
    let s: f64 = spectrum.iter().zip(k2).map(|(c, k)| k * c.norm_sqr()).sum();
    s * grid.cell_area() / grid.len() as f64
}

pub fn quadrature_integrals(f: &Field) -> Integrals {
    let mut tr = SpectralTransform::new(f.grid);
    let spec = tr.forward(f);
    let mut out = power_integrals(&f.values, f.grid.cell_area());
    out.gradient = gradient_integral(&spec.values, &f.grid.k_squared(), &f.grid);
    out
}

/// Trapezoidal mass of the spectrum, `(1/(Nx Ny)) sum |u_hat|^2 dx dy`.
pub fn spectral_mass(f: &FourierField) -> f64 {
    let g = f.grid;
    f.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.cell_area() / g.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid2D::new(1.0, 1.0, 12, 8).is_err());
        assert!(Grid2D::new(1.0, 1.0, 4, 8).is_err());
        assert!(Grid2D::new(0.0, 1.0, 8, 8).is_err());
        assert!(Grid2D::new(1.0, -2.0, 8, 8).is_err());
        assert!(Grid2D::new(f64::NAN, 1.0, 8, 8).is_err());
    }

    #[test]
    fn paper_grid_spacing() {
        let g = Grid2D::new(40.0, 3.0, 1024, 32).unwrap();
        assert!((g.dx() - 80.0 * PI / 1024.0).abs() < 1e-15);
        let kmax = g.kxs().iter().fold(0.0f64, |a, k| a.max(k.abs()));
        assert!((kmax - 512.0 / 40.0).abs() < 1e-12);
        assert!((g.dx() * g.nx as f64 - 2.0 * PI * g.lx).abs() < 1e-12);

        let g = Grid2D::new(150.0, 3.0, 4096, 128).unwrap();
        assert!((g.dy() - 6.0 * PI / 128.0).abs() < 1e-15);
    }

    #[test]
    fn unit_torus_wavenumbers() {
        let g = Grid2D::new(1.0, 1.0, 8, 8).unwrap();
        assert_eq!(g.kxs(), vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert_eq!(g.kys(), g.kxs());
    }

    #[test]
    fn origin_is_a_node() {
        let g = Grid2D::new(3.0, 2.0, 64, 16).unwrap();
        assert!(g.x(32).abs() < 1e-13);
        assert!(g.y(8).abs() < 1e-13);
    }

    #[test]
    fn constant_field_is_dc_only() {
        let g = Grid2D::new(2.0, 1.0, 16, 8).unwrap();
        let c = Complex64::new(0.3, -1.2);
        let spec = transform(&Field::from_fn(g, |_, _| c));
        assert!((spec.get(0, 0) - c * g.len() as f64).norm() < 1e-12);
        for (i, v) in spec.values.iter().enumerate().skip(1) {
            assert!(v.norm() < 1e-12, "mode {i}: {v}");
        }
    }

    #[test]
    fn pure_mode_is_single_bin() {
        let g = Grid2D::new(2.0, 1.0, 16, 8).unwrap();
        let f = Field::from_fn(g, |x, _| Complex64::from_polar(1.0, x / g.lx));
        let spec = transform(&f);
        for jx in 0..g.nx {
            for my in 0..g.ny {
                let v = spec.get(jx, my).norm();
                if jx == 1 && my == 0 {
                    assert!((v - g.len() as f64).abs() < 1e-10);
                    assert!((g.kx(jx) - 1.0 / g.lx).abs() < 1e-15);
                } else {
                    assert!(v < 1e-10);
                }
            }
        }
    }

    #[test]
    fn zero_field_integrals_vanish() {
        let g = Grid2D::new(2.0, 1.0, 16, 8).unwrap();
        let i = quadrature_integrals(&Field::zeros(g));
        assert_eq!(i, Integrals::default());
    }

    #[test]
    fn gradient_of_plane_wave() {
        // |grad e^{i(2x/Lx + 3y/Ly)}|^2 = (2/Lx)^2 + (3/Ly)^2 everywhere.
        let g = Grid2D::new(2.0, 1.5, 32, 16).unwrap();
        let (a, b) = (2.0 / g.lx, 3.0 / g.ly);
        let f = Field::from_fn(g, |x, y| Complex64::from_polar(1.0, a * x + b * y));
        let area = 4.0 * PI * PI * g.lx * g.ly;
        let i = quadrature_integrals(&f);
        assert!((i.gradient - (a * a + b * b) * area).abs() < 1e-10 * area);
        assert!((i.mass - area).abs() < 1e-12 * area);
    }

    #[test]
    fn dealias_mask_keeps_low_modes() {
        let g = Grid2D::new(1.0, 1.0, 8, 8).unwrap();
        let mask = g.dealias_mask();
        assert!(mask[0]);
        // bin 4 is the Nyquist mode -4.
        assert!(!mask[4 * g.ny]);
        assert_eq!(mask.iter().filter(|b| **b).count(), 25);
    }
}
