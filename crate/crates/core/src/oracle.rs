//! Independent radial Crank-Nicolson propagation in a fixed angular sector.
//!
//! For `Psi = u(rho, t) e^{i n phi}` the Hamiltonian reduces to
//!
//! ```text
//! H u = -(1/2m)(u'' + u'/rho) + V_eff u,
//! V_eff = (m/2) Oe^2 rho^2 + (C + n^2/2)/(m rho^2) + c q B n / m,
//! ```
//!
//! where `c` is obtained once at run time by applying the discrete 2D cross
//! term to `rho e^{-rho^2} e^{i phi}` ([`sector_coefficient`]).
//!
//! The radial grid is `rho_j = j·d`, `d = rho_max / N`, with a hard wall at
//! `rho_max`. For nu > 0 the unknowns are `j = 1..N-1` and `u_0 = 0`. For
//! nu = 0 the origin is an unknown too, with the mirrored stencil
//! `lap u_0 = 4 (u_1 - u_0) / d^2` on the cell `[0, d/2]`. Elsewhere the
//! Laplacian uses the flux form
//! `(1/rho_j)[rho_{j+1/2}(u_{j+1}-u_j) - rho_{j-1/2}(u_j-u_{j-1})]/d^2`.
//! Both are symmetric in the cell-volume inner product, so the scheme is
//! unitary in that norm.

use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::export;
use crate::ode::TransformTrajectory;
use crate::params::{CoefficientSet, ParamError, Span};
use crate::wavefunction::{assemble_psi, ModeSpec, WaveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error("invalid radial problem: {0}")]
    InvalidProblem(String),
    #[error("rho = {rho} must be positive")]
    OutOfDomain { rho: f64 },
    #[error("grids differ: {left} vs {right} samples")]
    MismatchedGrids { left: usize, right: usize },
    #[error("unstable propagation at t = {t}: norm drift {norm_drift:e}, step-doubling defect {step_defect:e}")]
    Unstable { t: f64, norm_drift: f64, step_defect: f64 },
    #[error("singular tridiagonal system at t = {t}")]
    SingularSolve { t: f64 },
    #[error("state has zero norm")]
    ZeroNorm,
}

const FIT_STEP: f64 = 0.05;

fn fit_sector_coefficient() -> f64 {
    // Discrete i(y d_x - x d_y)/2 on psi = (x + i y) e^{-(x^2+y^2)} (q = B = m = 1, n = 1).
    let psi = |x: f64, y: f64| Complex64::new(x, y) * (-(x * x + y * y)).exp();
    let h = FIT_STEP;
    let d =
        |f: &dyn Fn(f64) -> Complex64| -> Complex64 { (f(-2.0 * h) - f(2.0 * h) + (f(h) - f(-h)) * 8.0) / (12.0 * h) };
    let i = Complex64::new(0.0, 1.0);
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
    for a in -40..=40 {
        for b in -40..=40 {
            let (x, y) = (a as f64 * 0.05, b as f64 * 0.05);
            let dx = d(&|s| psi(x + s, y));
            let dy = d(&|s| psi(x, y + s));
            let k = i * (dx * y - dy * x) * 0.5;
            let p = psi(x, y);
            num += p.conj() * k;
            den += p.norm_sqr();
        }
    }
    (num / den).re
}

/// Coefficient `c` of the sector shift `c·qBn/m`, fitted from the discrete
/// cross term and snapped to the nearest quarter.
pub fn sector_coefficient() -> f64 {
    static COEFF: OnceLock<f64> = OnceLock::new();
    *COEFF.get_or_init(|| {
        let fitted = fit_sector_coefficient();
        let snapped = (4.0 * fitted).round() / 4.0;
        assert!((fitted - snapped).abs() < 1e-4, "sector fit {fitted} is not a quarter multiple");
        snapped
    })
}

/// `V_eff` in sector `n` at radius `rho > 0`.
pub fn effective_potential(coeffs: &CoefficientSet, n: i64, rho: f64, t: f64) -> Result<f64, OracleError> {
    if !(rho > 0.0) {
        return Err(OracleError::OutOfDomain { rho });
    }
    potential(coeffs, n, rho, t)
}

/// `V_eff` without the domain check; the centrifugal term is skipped when its
/// coefficient vanishes, which makes `rho = 0` usable for nu = 0.
fn potential(coeffs: &CoefficientSet, n: i64, rho: f64, t: f64) -> Result<f64, OracleError> {
    let m = coeffs.mass(t)?;
    let w2 = coeffs.shifted_frequency_sq(t)?;
    let nf = n as f64;
    let qb = coeffs.charge() * coeffs.field(t)?;
    let barrier = coeffs.coupling() + 0.5 * nf * nf;
    let centrifugal = if barrier == 0.0 { 0.0 } else { barrier / (m * rho * rho) };
    Ok(0.5 * m * w2 * rho * rho + centrifugal + sector_coefficient() * qb * nf / m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProblem {
    pub coeffs: CoefficientSet,
    /// Angular number in the lab frame.
    pub n: i64,
    pub rho_max: f64,
    pub n_rho: usize,
    pub dt: f64,
    pub span: Span,
    /// Number of equally spaced recorded times, endpoints included.
    pub samples: usize,
    /// Cumulative relative norm drift that counts as unstable.
    pub drift_tol: f64,
    /// Relative one-step vs two-half-steps defect that counts as unstable;
    /// `None` disables the probe.
    pub probe_tol: Option<f64>,
}

impl RadialProblem {
    pub fn new(coeffs: CoefficientSet, n: i64, rho_max: f64, n_rho: usize, dt: f64, span: Span) -> Self {
        Self { coeffs, n, rho_max, n_rho, dt, span, samples: 11, drift_tol: 1e-6, probe_tol: Some(1e-6) }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.n_rho < 256 {
            return Err(OracleError::InvalidProblem(format!("n_rho = {} < 256", self.n_rho)));
        }
        if !(self.dt > 0.0 && self.rho_max > 0.0) {
            return Err(OracleError::InvalidProblem("dt and rho_max must be positive".into()));
        }
        if self.samples < 2 {
            return Err(OracleError::InvalidProblem("need at least 2 samples".into()));
        }
        let outer = self.coeffs.span();
        if !(outer.contains(self.span.t0) && outer.contains(self.span.t1)) {
            return Err(ParamError::OutOfDomain { t: self.span.t1, t0: outer.t0, t1: outer.t1 }.into());
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.rho_max / self.n_rho as f64
    }

    /// Whether the origin is an unknown (nu = 0).
    pub fn includes_origin(&self) -> bool {
        matches!(self.order(), Ok(v) if v == 0.0)
    }

    fn first_node(&self) -> usize {
        usize::from(!self.includes_origin())
    }

    /// Radii of the unknowns: `rho_1 .. rho_{N-1}`, from `rho_0 = 0` when
    /// [`Self::includes_origin`].
    pub fn nodes(&self) -> Vec<f64> {
        let d = self.spacing();
        (self.first_node()..self.n_rho).map(|j| j as f64 * d).collect()
    }

    /// Trapezoid weights (without the rho factor) matching [`Self::nodes`].
    pub fn weights(&self) -> Vec<f64> {
        vec![self.spacing(); self.n_rho - self.first_node()]
    }

    /// Cell volumes `∫ rho drho` of the unknowns; the norm the scheme conserves.
    fn cells(&self) -> Vec<f64> {
        let d = self.spacing();
        (self.first_node()..self.n_rho).map(|j| if j == 0 { d * d / 8.0 } else { j as f64 * d * d }).collect()
    }

    fn order(&self) -> Result<f64, OracleError> {
        let v = 2.0 * self.coeffs.coupling() + (self.n * self.n) as f64;
        if v < 0.0 {
            return Err(WaveError::FallToCenter { coupling: self.coeffs.coupling(), n: self.n, value: v }.into());
        }
        Ok(v.sqrt())
    }

    /// Steps and their size; the step is shrunk so the span is covered exactly.
    fn stepping(&self) -> (usize, f64) {
        let steps = ((self.span.length() / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (steps, self.span.length() / steps as f64)
    }
}

/// Tridiagonal `H(t)`: sub, diag, super.
struct Operator {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl Operator {
    fn at(p: &RadialProblem, t: f64) -> Result<Self, OracleError> {
        let m = p.coeffs.mass(t)?;
        let d = p.spacing();
        let first = p.first_node();
        let n = p.n_rho - first;
        let (mut sub, mut diag, mut sup) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for k in 0..n {
            let j = (k + first) as f64;
            let rho = j * d;
            let v = potential(&p.coeffs, p.n, rho, t)?;
            if j == 0.0 {
                let s = 2.0 / (m * d * d);
                diag[k] = s + v;
                sup[k] = -s;
                continue;
            }
            let s = 1.0 / (2.0 * m * rho * d * d);
            let (inner, outer) = ((j - 0.5) * d, (j + 0.5) * d);
            diag[k] = s * (outer + inner) + v;
            if k > 0 {
                sub[k] = -s * inner;
            }
            if k + 1 < n {
                sup[k] = -s * outer;
            }
        }
        Ok(Self { sub, diag, sup })
    }

    fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = u.len();
        (0..n)
            .map(|k| {
                let mut v = u[k] * self.diag[k];
                if k > 0 {
                    v += u[k - 1] * self.sub[k];
                }
                if k + 1 < n {
                    v += u[k + 1] * self.sup[k];
                }
                v
            })
            .collect()
    }

    /// One Crank-Nicolson step `(1 + i dt H/2) u' = (1 - i dt H/2) u`.
    fn cn_step(&self, u: &[Complex64], dt: f64, t: f64) -> Result<Vec<Complex64>, OracleError> {
        let g = Complex64::new(0.0, 0.5 * dt);
        let hu = self.apply(u);
        let rhs: Vec<Complex64> = u.iter().zip(&hu).map(|(a, b)| a - g * b).collect();
        let n = u.len();
        let mut cp = vec![Complex64::new(0.0, 0.0); n];
        let mut dp = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let a = g * self.sub[k];
            let b = Complex64::new(1.0, 0.0) + g * self.diag[k];
            let c = g * self.sup[k];
            let den = if k == 0 { b } else { b - a * cp[k - 1] };
            if den.norm() < 1e-300 {
                return Err(OracleError::SingularSolve { t });
            }
            cp[k] = c / den;
            dp[k] = if k == 0 { rhs[k] / den } else { (rhs[k] - a * dp[k - 1]) / den };
        }
        for k in (0..n - 1).rev() {
            let next = dp[k + 1];
            dp[k] -= cp[k] * next;
        }
        Ok(dp)
    }
}

fn weighted_norm_sq(u: &[Complex64], cells: &[f64]) -> f64 {
    u.iter().zip(cells).map(|(v, w)| w * v.norm_sqr()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub rho: Vec<f64>,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<Complex64>>,
    /// `|‖u(t)‖/‖u(t0)‖ - 1|` at the recorded times.
    pub norm_drift: Vec<f64>,
    /// Largest single-step relative norm change.
    pub max_step_drift: f64,
    /// Largest step-doubling defect seen by the probe.
    pub max_step_defect: f64,
    /// Fidelity against the reference at the recorded times (empty without one).
    pub fidelity: Vec<f64>,
    pub steps: usize,
    pub dt: f64,
}

impl PropagationResult {
    pub fn min_fidelity(&self) -> Option<f64> {
        self.fidelity.iter().copied().reduce(f64::min)
    }

    /// CSV with columns `t, fidelity, norm_drift`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,fidelity,norm_drift\n");
        for (k, &t) in self.times.iter().enumerate() {
            let f = self.fidelity.get(k).copied().unwrap_or(f64::NAN);
            export::push_row(&mut out, &[t, f, self.norm_drift[k]]);
        }
        out
    }

    /// CSV with columns `rho, re_u, im_u` for snapshot `k`.
    pub fn snapshot_csv(&self, k: usize) -> String {
        let mut out = String::from("rho,re_u,im_u\n");
        for (r, u) in self.rho.iter().zip(&self.snapshots[k]) {
            export::push_row(&mut out, &[*r, u.re, u.im]);
        }
        out
    }
}

/// Propagates `u0` (values at [`RadialProblem::nodes`]) over the span.
pub fn propagate(problem: &RadialProblem, u0: &[Complex64]) -> Result<PropagationResult, OracleError> {
    propagate_with_reference(problem, u0, None::<fn(f64) -> Result<Vec<Complex64>, OracleError>>)
}

/// As [`propagate`], also recording the fidelity against `reference(t)`.
pub fn propagate_with_reference<R>(
    problem: &RadialProblem,
    u0: &[Complex64],
    reference: Option<R>,
) -> Result<PropagationResult, OracleError>
where
    R: Fn(f64) -> Result<Vec<Complex64>, OracleError>,
{
    problem.validate()?;
    let nodes = problem.nodes();
    if u0.len() != nodes.len() {
        return Err(OracleError::MismatchedGrids { left: u0.len(), right: nodes.len() });
    }
    if u0.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(OracleError::InvalidProblem("initial state is not finite".into()));
    }
    problem.order()?;
    let cells = problem.cells();
    let weights = problem.weights();
    let n0 = weighted_norm_sq(u0, &cells).sqrt();
    if n0 == 0.0 {
        return Err(OracleError::ZeroNorm);
    }
    let (steps, dt) = problem.stepping();
    let t0 = problem.span.t0;
    let record: Vec<usize> =
        (0..problem.samples).map(|k| ((k * steps) as f64 / (problem.samples - 1) as f64).round() as usize).collect();
    let probe_every = (steps / 16).max(1);

    let mut out = PropagationResult {
        rho: nodes.clone(),
        times: Vec::new(),
        snapshots: Vec::new(),
        norm_drift: Vec::new(),
        max_step_drift: 0.0,
        max_step_defect: 0.0,
        fidelity: Vec::new(),
        steps,
        dt,
    };
    let push = |out: &mut PropagationResult, step: usize, u: &[Complex64], norm: f64| -> Result<(), OracleError> {
        let t = if step == steps { problem.span.t1 } else { t0 + step as f64 * dt };
        out.times.push(t);
        out.snapshots.push(u.to_vec());
        out.norm_drift.push((norm / n0 - 1.0).abs());
        if let Some(r) = &reference {
            out.fidelity.push(fidelity(u, &r(t)?, &nodes, &weights)?);
        }
        Ok(())
    };

    let mut u = u0.to_vec();
    let mut norm = n0;
    let mut next = 0;
    while next < record.len() && record[next] == 0 {
        push(&mut out, 0, &u, norm)?;
        next += 1;
    }
    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        let op = Operator::at(problem, t + 0.5 * dt)?;
        let un = op.cn_step(&u, dt, t)?;
        if let Some(tol) = problem.probe_tol {
            if step % probe_every == 0 {
                let h1 = Operator::at(problem, t + 0.25 * dt)?;
                let h2 = Operator::at(problem, t + 0.75 * dt)?;
                let half = h2.cn_step(&h1.cn_step(&u, 0.5 * dt, t)?, 0.5 * dt, t)?;
                let diff: Vec<Complex64> = un.iter().zip(&half).map(|(a, b)| a - b).collect();
                let defect = weighted_norm_sq(&diff, &cells).sqrt() / norm;
                out.max_step_defect = out.max_step_defect.max(defect);
                if !(defect <= tol) {
                    return Err(OracleError::Unstable { t, norm_drift: (norm / n0 - 1.0).abs(), step_defect: defect });
                }
            }
        }
        let nn = weighted_norm_sq(&un, &cells).sqrt();
        out.max_step_drift = out.max_step_drift.max((nn - norm).abs() / n0);
        let drift = (nn / n0 - 1.0).abs();
        if !(drift <= problem.drift_tol) {
            return Err(OracleError::Unstable { t: t + dt, norm_drift: drift, step_defect: out.max_step_defect });
        }
        u = un;
        norm = nn;
        while next < record.len() && record[next] == step + 1 {
            push(&mut out, step + 1, &u, norm)?;
            next += 1;
        }
    }
    Ok(out)
}

/// `|Σ w_i rho_i conj(a_i) b_i| / (‖a‖ ‖b‖)` in the same weighted norm.
pub fn fidelity(a: &[Complex64], b: &[Complex64], rho: &[f64], weights: &[f64]) -> Result<f64, OracleError> {
    if a.len() != b.len() {
        return Err(OracleError::MismatchedGrids { left: a.len(), right: b.len() });
    }
    if rho.len() != a.len() || weights.len() != a.len() {
        return Err(OracleError::MismatchedGrids { left: a.len(), right: rho.len().min(weights.len()) });
    }
    let (mut s, mut na, mut nb) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for i in 0..a.len() {
        let w = weights[i] * rho[i];
        s += a[i].conj() * b[i] * w;
        na += a[i].norm_sqr() * w;
        nb += b[i].norm_sqr() * w;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(OracleError::ZeroNorm);
    }
    Ok(s.norm() / (na.sqrt() * nb.sqrt()))
}

/// Radial profile of an assembled mode at time `t`, read along `phi = 0`
/// (so it carries the full phase of Psi there).
pub fn analytic_slice(
    mode: &ModeSpec,
    traj: &TransformTrajectory,
    rho: &[f64],
    t: f64,
) -> Result<Vec<Complex64>, OracleError> {
    rho.iter().map(|&r| Ok(assemble_psi(mode, traj, r, 0.0, t)?)).collect()
}
