//! Discrete Schrödinger residual `R = i Psi_t - H Psi` and refinement ladders.
//!
//! `H = (p - qA)^2/(2m) + (m/2) w^2 rho^2 + C/(m rho^2)` with `p = -i grad` and
//! `A = (B/2)(y, -x)`, which expands to
//!
//! ```text
//! (p - qA)^2 Psi = -lap Psi + i q B (y d_x - x d_y) Psi + (q B rho / 2)^2 Psi.
//! ```
//!
//! Space uses 4th-order central differences, time a 2nd-order central
//! difference. The stencil step is independent of the sample grid, so the
//! temporal and spatial truncation terms can be refined separately.

use num_complex::Complex64;
use rayon::prelude::*;

use super::field::CartesianGrid;
use super::{assemble_psi_with, ModeSpec, ThetaPath, WaveError};
use crate::bessel::EvalDomain;
use crate::export;
use crate::ode::TransformTrajectory;
use crate::params::CoefficientSet;

/// Anything that can be evaluated at `(x, y, t)`.
pub trait Field: Sync {
    fn value(&self, x: f64, y: f64, t: f64) -> Result<Complex64, WaveError>;
}

impl<F> Field for F
where
    F: Fn(f64, f64, f64) -> Result<Complex64, WaveError> + Sync,
{
    fn value(&self, x: f64, y: f64, t: f64) -> Result<Complex64, WaveError> {
        self(x, y, t)
    }
}

/// An assembled mode as a [`Field`].
pub struct ModeField<'a> {
    pub mode: &'a ModeSpec,
    pub traj: &'a TransformTrajectory,
    pub dom: EvalDomain,
}

impl<'a> ModeField<'a> {
    pub fn new(mode: &'a ModeSpec, traj: &'a TransformTrajectory) -> Self {
        Self { mode, traj, dom: EvalDomain::default() }
    }
}

impl Field for ModeField<'_> {
    fn value(&self, x: f64, y: f64, t: f64) -> Result<Complex64, WaveError> {
        assemble_psi_with(self.mode, self.traj, x, y, t, &self.dom, ThetaPath::Rotated)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    /// `dt` halves per level, stencil fixed.
    Temporal,
    /// Stencil step halves per level, `dt` fixed.
    Spatial,
}

impl LadderKind {
    pub fn name(self) -> &'static str {
        match self {
            LadderKind::Temporal => "temporal",
            LadderKind::Spatial => "spatial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSettings {
    /// Time step of the coarsest level.
    pub dt: f64,
    /// Spatial stencil step of the coarsest level; `None` uses the grid spacing
    /// and reuses the grid samples.
    pub stencil_step: Option<f64>,
    pub levels: usize,
    pub kind: LadderKind,
}

impl ResidualSettings {
    pub fn single(dt: f64, stencil_step: Option<f64>) -> Self {
        Self { dt, stencil_step, levels: 1, kind: LadderKind::Temporal }
    }
}

/// Residual norms at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeNorms {
    pub t: f64,
    pub max_abs: f64,
    pub l2_abs: f64,
    pub h_max: f64,
    pub h_l2: f64,
}

impl TimeNorms {
    pub fn max_rel(&self) -> f64 {
        self.max_abs / self.h_max
    }

    pub fn l2_rel(&self) -> f64 {
        self.l2_abs / self.h_l2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderLevel {
    pub dt: f64,
    pub stencil_x: f64,
    pub stencil_y: f64,
    pub per_time: Vec<TimeNorms>,
}

impl LadderLevel {
    /// Worst `‖R‖∞ / ‖HΨ‖∞` over the sampled times.
    pub fn max_rel(&self) -> f64 {
        self.per_time.iter().map(TimeNorms::max_rel).fold(0.0, f64::max)
    }

    pub fn l2_rel(&self) -> f64 {
        self.per_time.iter().map(TimeNorms::l2_rel).fold(0.0, f64::max)
    }

    pub fn step(&self, kind: LadderKind) -> f64 {
        match kind {
            LadderKind::Temporal => self.dt,
            LadderKind::Spatial => self.stencil_x,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub kind: LadderKind,
    pub grid_hx: f64,
    pub grid_hy: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub points: usize,
    pub times: Vec<f64>,
    pub levels: Vec<LadderLevel>,
}

impl ResidualReport {
    pub fn finest(&self) -> &LadderLevel {
        self.levels.last().expect("ladder has at least one level")
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.levels.iter().map(LadderLevel::max_rel).collect()
    }

    /// Strictly decreasing residuals over at least two levels.
    pub fn is_monotone(&self) -> bool {
        let r = self.residuals();
        r.len() >= 2 && r.windows(2).all(|w| w[1] < w[0])
    }

    /// Least-squares slope of `log(residual)` against `log(step)`.
    pub fn order(&self) -> Option<f64> {
        if self.levels.len() < 2 {
            return None;
        }
        let pts: Vec<(f64, f64)> = self.levels.iter().map(|l| (l.step(self.kind).ln(), l.max_rel().ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        slope.is_finite().then_some(slope)
    }

    /// One row per level and time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,dt,stencil_x,stencil_y,t,max_abs,l2_abs,h_max,h_l2,max_rel,l2_rel\n");
        for (i, l) in self.levels.iter().enumerate() {
            for n in &l.per_time {
                export::push_row(
                    &mut out,
                    &[
                        i as f64,
                        l.dt,
                        l.stencil_x,
                        l.stencil_y,
                        n.t,
                        n.max_abs,
                        n.l2_abs,
                        n.h_max,
                        n.h_l2,
                        n.max_rel(),
                        n.l2_rel(),
                    ],
                );
            }
        }
        out
    }

    /// Single-line JSON summary.
    pub fn summary_line(&self) -> String {
        let order = self.order().map_or("null".to_string(), |o| format!("{o:e}"));
        format!(
            "{{\"ladder\":\"{}\",\"levels\":{},\"order\":{},\"finest_max_rel\":{:e},\"finest_l2_rel\":{:e},\"rho_min\":{:e},\"rho_max\":{:e},\"points\":{},\"monotone\":{}}}",
            self.kind.name(),
            self.levels.len(),
            order,
            self.finest().max_rel(),
            self.finest().l2_rel(),
            self.rho_min,
            self.rho_max,
            self.points,
            self.is_monotone()
        )
    }
}

const D1: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];

#[derive(Debug, Clone, Copy)]
struct Frozen {
    m: f64,
    w2: f64,
    qb: f64,
    c: f64,
}

impl Frozen {
    fn at(coeffs: &CoefficientSet, t: f64) -> Result<Self, WaveError> {
        let w = coeffs.frequency(t)?;
        Ok(Self { m: coeffs.mass(t)?, w2: w * w, qb: coeffs.charge() * coeffs.field(t)?, c: coeffs.coupling() })
    }

    /// `H Psi` from the 5-point cross stencil `sx`, `sy` centered at `(x, y)`.
    fn apply(&self, x: f64, y: f64, sx: &[Complex64; 5], sy: &[Complex64; 5], hx: f64, hy: f64) -> Complex64 {
        let p = sx[2];
        let dot = |w: &[f64; 5], s: &[Complex64; 5]| -> Complex64 { w.iter().zip(s).map(|(a, b)| b * *a).sum() };
        let lap = dot(&D2, sx) / (hx * hx) + dot(&D2, sy) / (hy * hy);
        let dx = dot(&D1, sx) / hx;
        let dy = dot(&D1, sy) / hy;
        let rho2 = x * x + y * y;
        let i = Complex64::new(0.0, 1.0);
        let kinetic = -lap + i * self.qb * (dx * y - dy * x) + p * (0.25 * self.qb * self.qb * rho2);
        kinetic / (2.0 * self.m) + p * (0.5 * self.m * self.w2 * rho2 + self.c / (self.m * rho2))
    }
}

fn masked_points(grid: &CartesianGrid) -> Vec<(usize, usize, f64, f64)> {
    grid.masked().into_iter().map(|(i, j)| (i, j, grid.x(i as isize), grid.y(j as isize))).collect()
}

/// `H Psi` at every masked node, reusing grid samples for the stencil.
fn h_psi_on_grid<F: Field>(
    field: &F,
    frozen: &Frozen,
    grid: &CartesianGrid,
    pts: &[(usize, usize, f64, f64)],
    t: f64,
) -> Result<Vec<Complex64>, WaveError> {
    let (w, h) = (grid.nx + 4, grid.ny + 4);
    let mut need = vec![false; w * h];
    let idx = |i: isize, j: isize| (j + 2) as usize * w + (i + 2) as usize;
    for &(i, j, _, _) in pts {
        let (i, j) = (i as isize, j as isize);
        for d in -2..=2 {
            need[idx(i + d, j)] = true;
            need[idx(i, j + d)] = true;
        }
    }
    let needed: Vec<usize> = (0..w * h).filter(|&k| need[k]).collect();
    let vals = needed
        .par_iter()
        .map(|&k| {
            let (i, j) = ((k % w) as isize - 2, (k / w) as isize - 2);
            field.value(grid.x(i), grid.y(j), t)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut store = vec![Complex64::new(0.0, 0.0); w * h];
    for (k, v) in needed.into_iter().zip(vals) {
        store[k] = v;
    }
    let (hx, hy) = (grid.hx(), grid.hy());
    Ok(pts
        .iter()
        .map(|&(i, j, x, y)| {
            let (i, j) = (i as isize, j as isize);
            let sx = [-2, -1, 0, 1, 2].map(|d| store[idx(i + d, j)]);
            let sy = [-2, -1, 0, 1, 2].map(|d| store[idx(i, j + d)]);
            frozen.apply(x, y, &sx, &sy, hx, hy)
        })
        .collect())
}

/// `H Psi` at every masked node with an explicit stencil step.
fn h_psi_pointwise<F: Field>(
    field: &F,
    frozen: &Frozen,
    pts: &[(usize, usize, f64, f64)],
    t: f64,
    hx: f64,
    hy: f64,
) -> Result<Vec<Complex64>, WaveError> {
    pts.par_iter()
        .map(|&(_, _, x, y)| {
            let mut sx = [Complex64::new(0.0, 0.0); 5];
            let mut sy = sx;
            for (k, d) in [-2.0, -1.0, 0.0, 1.0, 2.0].into_iter().enumerate() {
                sx[k] = field.value(x + d * hx, y, t)?;
                sy[k] = if d == 0.0 { sx[k] } else { field.value(x, y + d * hy, t)? };
            }
            Ok(frozen.apply(x, y, &sx, &sy, hx, hy))
        })
        .collect()
}

fn time_derivative<F: Field>(
    field: &F,
    pts: &[(usize, usize, f64, f64)],
    t: f64,
    dt: f64,
) -> Result<Vec<Complex64>, WaveError> {
    pts.par_iter()
        .map(|&(_, _, x, y)| Ok((field.value(x, y, t + dt)? - field.value(x, y, t - dt)?) / (2.0 * dt)))
        .collect()
}

fn norms(t: f64, hpsi: &[Complex64], dpsi: &[Complex64], cell: f64) -> TimeNorms {
    let i = Complex64::new(0.0, 1.0);
    let (mut max_abs, mut sum_r, mut h_max, mut sum_h) = (0.0f64, 0.0, 0.0f64, 0.0);
    for (h, d) in hpsi.iter().zip(dpsi) {
        let r = (i * d - h).norm();
        max_abs = max_abs.max(r);
        sum_r += r * r;
        h_max = h_max.max(h.norm());
        sum_h += h.norm_sqr();
    }
    TimeNorms { t, max_abs, l2_abs: (sum_r * cell).sqrt(), h_max, h_l2: (sum_h * cell).sqrt() }
}

/// Runs the ladder without judging it.
pub fn residual_ladder<F: Field>(
    field: &F,
    coeffs: &CoefficientSet,
    grid: &CartesianGrid,
    times: &[f64],
    settings: &ResidualSettings,
) -> Result<ResidualReport, WaveError> {
    grid.validate()?;
    if settings.levels == 0 || !(settings.dt > 0.0) {
        return Err(WaveError::InvalidGrid("ladder needs dt > 0 and at least one level".into()));
    }
    if let Some(h) = settings.stencil_step {
        if !(h > 0.0) {
            return Err(WaveError::InvalidGrid("stencil step must be positive".into()));
        }
    }
    if times.is_empty() {
        return Err(WaveError::InvalidGrid("no residual times".into()));
    }
    let span = coeffs.span();
    for &t in times {
        if !(t - settings.dt >= span.t0 && t + settings.dt <= span.t1) {
            return Err(WaveError::InvalidGrid(format!(
                "time {t} +/- {} is not interior to [{}, {}]",
                settings.dt, span.t0, span.t1
            )));
        }
    }
    let pts = masked_points(grid);
    if pts.is_empty() {
        return Err(WaveError::InvalidGrid("annulus contains no grid nodes".into()));
    }
    let cell = grid.hx() * grid.hy();
    let (bx, by) = settings.stencil_step.map_or((grid.hx(), grid.hy()), |h| (h, h));

    let mut cached: Option<(f64, f64, Vec<Vec<Complex64>>)> = None;
    let mut levels = Vec::with_capacity(settings.levels);
    for level in 0..settings.levels {
        let scale = 0.5f64.powi(level as i32);
        let (dt, hx, hy) = match settings.kind {
            LadderKind::Temporal => (settings.dt * scale, bx, by),
            LadderKind::Spatial => (settings.dt, bx * scale, by * scale),
        };
        let reuse_grid = settings.stencil_step.is_none() && hx == grid.hx() && hy == grid.hy();
        let hpsi_all = match &cached {
            Some((cx, cy, v)) if *cx == hx && *cy == hy => v.clone(),
            _ => {
                let mut v = Vec::with_capacity(times.len());
                for &t in times {
                    let frozen = Frozen::at(coeffs, t)?;
                    v.push(if reuse_grid {
                        h_psi_on_grid(field, &frozen, grid, &pts, t)?
                    } else {
                        h_psi_pointwise(field, &frozen, &pts, t, hx, hy)?
                    });
                }
                cached = Some((hx, hy, v.clone()));
                v
            }
        };
        let mut per_time = Vec::with_capacity(times.len());
        for (k, &t) in times.iter().enumerate() {
            let dpsi = time_derivative(field, &pts, t, dt)?;
            per_time.push(norms(t, &hpsi_all[k], &dpsi, cell));
        }
        levels.push(LadderLevel { dt, stencil_x: hx, stencil_y: hy, per_time });
    }
    Ok(ResidualReport {
        kind: settings.kind,
        grid_hx: grid.hx(),
        grid_hy: grid.hy(),
        rho_min: grid.rho_min,
        rho_max: grid.rho_max,
        points: pts.len(),
        times: times.to_vec(),
        levels,
    })
}

/// Residual of an assembled mode. Fails with [`WaveError::GridTooCoarse`]
/// unless the ladder has at least two strictly decreasing levels.
pub fn schrodinger_residual(
    mode: &ModeSpec,
    traj: &TransformTrajectory,
    coeffs: &CoefficientSet,
    grid: &CartesianGrid,
    times: &[f64],
    settings: &ResidualSettings,
) -> Result<ResidualReport, WaveError> {
    let report = residual_ladder(&ModeField::new(mode, traj), coeffs, grid, times, settings)?;
    if !report.is_monotone() {
        return Err(WaveError::GridTooCoarse { residuals: report.residuals() });
    }
    Ok(report)
}
