//! Sampling grids and sampled fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{assemble_psi_with, ModeSpec, ThetaPath, WaveError};
use crate::bessel::EvalDomain;
use crate::export;
use crate::ode::TransformTrajectory;

/// Tensor grid over a rectangle, masked to the annulus
/// `rho_min <= rho <= rho_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl CartesianGrid {
    /// `n x n` nodes on `[-half_width, half_width]^2`.
    pub fn square(half_width: f64, n: usize, rho_min: f64, rho_max: f64) -> Result<Self, WaveError> {
        let g = Self {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
            nx: n,
            ny: n,
            rho_min,
            rho_max,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), WaveError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(WaveError::InvalidGrid("need at least 2 nodes per axis".into()));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(WaveError::InvalidGrid("empty extent".into()));
        }
        if !(self.rho_min >= 0.0 && self.rho_max > self.rho_min) {
            return Err(WaveError::InvalidGrid(format!("annulus [{}, {}] is empty", self.rho_min, self.rho_max)));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    /// Node coordinates; indices may lie outside `0..n` (stencil halo).
    pub fn x(&self, i: isize) -> f64 {
        if i == self.nx as isize - 1 {
            self.x_max
        } else {
            self.x_min + i as f64 * self.hx()
        }
    }

    pub fn y(&self, j: isize) -> f64 {
        if j == self.ny as isize - 1 {
            self.y_max
        } else {
            self.y_min + j as f64 * self.hy()
        }
    }

    /// Same extent with the spacing halved.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx - 1, ny: 2 * self.ny - 1, ..*self }
    }

    pub fn in_annulus(&self, x: f64, y: f64) -> bool {
        let r = x.hypot(y);
        r >= self.rho_min && r <= self.rho_max
    }

    /// Masked nodes as `(i, j)` in row-major order (`j` outer).
    pub fn masked(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.in_annulus(self.x(i as isize), self.y(j as isize)) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Polar tensor grid: `n_rho` radii from `rho_min` to `rho_max` and `n_theta`
/// equally spaced polar angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_rho: usize,
    pub n_theta: usize,
}

impl PolarGrid {
    pub fn validate(&self) -> Result<(), WaveError> {
        if self.n_rho < 2 || self.n_theta < 1 {
            return Err(WaveError::InvalidGrid("polar grid needs n_rho >= 2 and n_theta >= 1".into()));
        }
        if !(self.rho_min >= 0.0 && self.rho_max > self.rho_min) {
            return Err(WaveError::InvalidGrid("empty radial extent".into()));
        }
        Ok(())
    }

    pub fn rho(&self, i: usize) -> f64 {
        if i == self.n_rho - 1 {
            self.rho_max
        } else {
            self.rho_min + i as f64 * (self.rho_max - self.rho_min) / (self.n_rho - 1) as f64
        }
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    Cartesian(CartesianGrid),
    Polar(PolarGrid),
}

impl Grid {
    pub fn validate(&self) -> Result<(), WaveError> {
        match self {
            Grid::Cartesian(g) => g.validate(),
            Grid::Polar(g) => g.validate(),
        }
    }

    /// Sample points `(x, y)`: masked Cartesian nodes, or polar nodes with
    /// the radius index outer.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self {
            Grid::Cartesian(g) => g.masked().into_iter().map(|(i, j)| (g.x(i as isize), g.y(j as isize))).collect(),
            Grid::Polar(g) => (0..g.n_rho)
                .flat_map(|i| (0..g.n_theta).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let (s, c) = g.phi(j).sin_cos();
                    (g.rho(i) * c, g.rho(i) * s)
                })
                .collect(),
        }
    }
}

/// Psi sampled on a grid at one or more times.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid,
    pub points: Vec<(f64, f64)>,
    pub times: Vec<f64>,
    /// `values[k][p]` is Psi at `points[p]`, `times[k]`.
    pub values: Vec<Vec<Complex64>>,
    pub mode: Option<ModeSpec>,
    pub trajectory_digest: Option<String>,
}

impl WaveField {
    /// Wraps externally computed samples; `values[k]` must match `grid.points()`.
    pub fn from_values(grid: Grid, times: Vec<f64>, values: Vec<Vec<Complex64>>) -> Result<Self, WaveError> {
        grid.validate()?;
        let points = grid.points();
        if values.len() != times.len() || values.iter().any(|v| v.len() != points.len()) {
            return Err(WaveError::InvalidGrid("sample count does not match the grid".into()));
        }
        if values.iter().flatten().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(WaveError::InvalidGrid("non-finite sample".into()));
        }
        Ok(Self { grid, points, times, values, mode: None, trajectory_digest: None })
    }

    /// Assembles `mode` at every grid point and time.
    pub fn sample(mode: &ModeSpec, traj: &TransformTrajectory, grid: Grid, times: &[f64]) -> Result<Self, WaveError> {
        grid.validate()?;
        let points = grid.points();
        let singular = traj.coefficients().coupling() != 0.0 || mode.nu < 1.0;
        if singular && points.iter().any(|&(x, y)| x == 0.0 && y == 0.0) {
            return Err(WaveError::InvalidGrid("grid contains the singular point rho = 0".into()));
        }
        let dom = EvalDomain::default();
        let mut values = Vec::with_capacity(times.len());
        for &t in times {
            let row = points
                .par_iter()
                .map(|&(x, y)| assemble_psi_with(mode, traj, x, y, t, &dom, ThetaPath::Rotated))
                .collect::<Result<Vec<_>, _>>()?;
            values.push(row);
        }
        let mut field = Self::from_values(grid, times.to_vec(), values)?;
        field.mode = Some(*mode);
        field.trajectory_digest = Some(traj.digest());
        Ok(field)
    }

    /// CSV with columns `x, y, t, re_psi, im_psi, abs2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,t,re_psi,im_psi,abs2\n");
        for (k, &t) in self.times.iter().enumerate() {
            for (p, &(x, y)) in self.points.iter().enumerate() {
                let v = self.values[k][p];
                export::push_row(&mut out, &[x, y, t, v.re, v.im, v.norm_sqr()]);
            }
        }
        out
    }

    /// `∫∫ |Psi|^2` over the disk `rho <= rho_max` at time index `k`.
    pub fn norm_on_disk(&self, k: usize, rho_max: f64) -> f64 {
        let vals = &self.values[k];
        match &self.grid {
            Grid::Cartesian(g) => {
                // 2D trapezoid over the rectangle with the integrand cut to the disk.
                let mut sum = 0.0;
                for (p, &(i, j)) in g.masked().iter().enumerate() {
                    let (x, y) = self.points[p];
                    if x.hypot(y) > rho_max {
                        continue;
                    }
                    let wx = if i == 0 || i == g.nx - 1 { 0.5 } else { 1.0 };
                    let wy = if j == 0 || j == g.ny - 1 { 0.5 } else { 1.0 };
                    sum += wx * wy * vals[p].norm_sqr();
                }
                sum * g.hx() * g.hy()
            }
            Grid::Polar(g) => {
                let ring = |i: usize| -> f64 {
                    let s: f64 = (0..g.n_theta).map(|j| vals[i * g.n_theta + j].norm_sqr()).sum();
                    2.0 * PI * s / g.n_theta as f64
                };
                let mut sum = 0.0;
                for i in 0..g.n_rho - 1 {
                    let (r0, r1) = (g.rho(i), g.rho(i + 1));
                    if r1 > rho_max {
                        break;
                    }
                    sum += 0.5 * (r1 - r0) * (r0 * ring(i) + r1 * ring(i + 1));
                }
                sum
            }
        }
    }
}

/// Rescales the field (and the amplitudes of its mode) so that
/// `∫∫ |Psi|^2 = 1` over the disk at the first sampled time. Returns the
/// rescaled field and the norm before rescaling.
pub fn normalize_on_disk(field: &WaveField, rho_max: f64) -> Result<(WaveField, f64), WaveError> {
    if field.times.is_empty() {
        return Err(WaveError::ZeroNorm);
    }
    let norm = field.norm_on_disk(0, rho_max);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(WaveError::ZeroNorm);
    }
    let s = 1.0 / norm.sqrt();
    let mut out = field.clone();
    for row in &mut out.values {
        for v in row {
            *v *= s;
        }
    }
    if let Some(m) = &mut out.mode {
        m.amp_first *= s;
        m.amp_second *= s;
    }
    Ok((out, norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_on_polar_disk() {
        let g = PolarGrid { rho_min: 0.0, rho_max: 3.0, n_rho: 31, n_theta: 8 };
        let n = g.n_rho * g.n_theta;
        let amp = (1.0 / (PI * 9.0)).sqrt();
        let f = WaveField::from_values(Grid::Polar(g), vec![0.0], vec![vec![Complex64::new(amp, 0.0); n]]).unwrap();
        let (g2, norm) = normalize_on_disk(&f, 3.0).unwrap();
        assert!((norm - 1.0).abs() < 1e-14);
        assert!((g2.values[0][5] - f.values[0][5]).norm() < 1e-14);
    }

    #[test]
    fn norm_scales_quadratically() {
        let g = CartesianGrid::square(2.0, 41, 0.0, 2.0).unwrap();
        let pts = Grid::Cartesian(g).points();
        let vals: Vec<_> = pts.iter().map(|&(x, y)| Complex64::new((-(x * x + y * y)).exp(), x)).collect();
        let f1 = WaveField::from_values(Grid::Cartesian(g), vec![0.0], vec![vals.clone()]).unwrap();
        let f2 = WaveField::from_values(Grid::Cartesian(g), vec![0.0], vec![vals.iter().map(|v| v * 2.0).collect()])
            .unwrap();
        let (_, n1) = normalize_on_disk(&f1, 2.0).unwrap();
        let (_, n2) = normalize_on_disk(&f2, 2.0).unwrap();
        assert!((n2 / n1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_has_no_norm() {
        let g = PolarGrid { rho_min: 0.0, rho_max: 1.0, n_rho: 4, n_theta: 2 };
        let f = WaveField::from_values(Grid::Polar(g), vec![0.0], vec![vec![Complex64::new(0.0, 0.0); 8]]).unwrap();
        assert!(matches!(normalize_on_disk(&f, 1.0), Err(WaveError::ZeroNorm)));
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = CartesianGrid::square(8.0, 256, 0.4, 8.0).unwrap();
        let r = g.refined();
        assert!((r.hx() - g.hx() / 2.0).abs() < 1e-15);
        assert_eq!(r.x(r.nx as isize - 1), 8.0);
    }
}
