//! Assembly of the exact solution and its verification against the
//! Schrödinger operator.
//!
//! A single separable mode is
//!
//! ```text
//! Psi = [A J_nu(k rho / mu) + B N_nu(k rho / mu)] exp(s h alpha rho^2 ± i n theta - i f)
//! ```
//!
//! with `theta` measured in the frame rotated by `beta(t)` ([`theta_from_xy`])
//! and `(s, h)` chosen from [`ConventionFlags`]. Which flags actually solve
//! the equation is decided by [`scan::convention_scan`], not assumed.

pub mod field;
pub mod residual;
pub mod scan;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::bessel::{bessel_j, bessel_n_with, BesselError, BesselOrder, EvalDomain};
use crate::ode::{OdeError, TransformTrajectory};
use crate::params::ParamError;
use crate::Sign;

pub use field::{normalize_on_disk, CartesianGrid, Grid, PolarGrid, WaveField};
pub use residual::{
    residual_ladder, schrodinger_residual, Field, LadderKind, LadderLevel, ResidualReport, ResidualSettings,
};
pub use scan::{convention_scan, convention_scan_in_order, ScanOutcome, ScanRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("fall to the center: 2C + n^2 = {value} < 0 (C = {coupling}, n = {n})")]
    FallToCenter { coupling: f64, n: i64, value: f64 },
    #[error("angle undefined at the origin")]
    OriginUndefined,
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("mode expects alpha branch {expected} but the trajectory was solved on branch {found}")]
    BranchMismatch { expected: Sign, found: Sign },
    #[error("invalid mode: {0}")]
    InvalidMode(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("refinement ladder not in the asymptotic regime: residuals {residuals:?}")]
    GridTooCoarse { residuals: Vec<f64> },
    #[error("convention scan inconclusive: best {best:e} vs runner-up {runner_up:e}")]
    Inconclusive { best: f64, runner_up: f64, table: Vec<ScanRow> },
    #[error("field has zero norm on the disk")]
    ZeroNorm,
}

/// `nu = sqrt(2C + n^2)`.
pub fn order_from_coupling(coupling: f64, n: i64) -> Result<f64, WaveError> {
    let value = 2.0 * coupling + (n * n) as f64;
    if !(value >= 0.0) {
        return Err(WaveError::FallToCenter { coupling, n, value });
    }
    Ok(value.sqrt())
}

/// Angle in the rotated frame:
/// `atan2(cos b x + sin b y, -sin b x + cos b y)`.
pub fn theta_from_xy(x: f64, y: f64, beta: f64) -> Result<f64, WaveError> {
    if x == 0.0 && y == 0.0 {
        return Err(WaveError::OriginUndefined);
    }
    let (s, c) = beta.sin_cos();
    Ok((c * x + s * y).atan2(-s * x + c * y))
}

/// Inverse of [`theta_from_xy`] at radius `rho`.
pub fn xy_from_theta(rho: f64, theta: f64, beta: f64) -> (f64, f64) {
    let (q1, q2) = (rho * theta.sin(), rho * theta.cos());
    let (s, c) = beta.sin_cos();
    (c * q1 - s * q2, s * q1 + c * q2)
}

/// Multiplier `h` of the Gaussian exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExponentScale {
    One,
    Half,
}

impl ExponentScale {
    pub fn value(self) -> f64 {
        match self {
            ExponentScale::One => 1.0,
            ExponentScale::Half => 0.5,
        }
    }
}

/// One reading of the exponent: sign `s`, scale `h`, and the branch of
/// `alpha0`. Ordered lexicographically with `+ < -` and `1 < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConventionFlags {
    pub exponent_sign: Sign,
    pub exponent_half: ExponentScale,
    pub alpha_branch: Sign,
}

impl ConventionFlags {
    /// `s = +1, h = 1, branch +`: the exponent `exp(+alpha rho^2)` read as written.
    pub fn as_written() -> Self {
        Self { exponent_sign: Sign::Plus, exponent_half: ExponentScale::One, alpha_branch: Sign::Plus }
    }

    /// `s = -1, h = 1/2, branch +`: `exp(-alpha rho^2 / 2)` on the decaying branch.
    pub fn gaussian() -> Self {
        Self { exponent_sign: Sign::Minus, exponent_half: ExponentScale::Half, alpha_branch: Sign::Plus }
    }

    /// All eight combinations in lexicographic order.
    pub fn all() -> [Self; 8] {
        let mut out = [Self::as_written(); 8];
        let mut i = 0;
        for s in [Sign::Plus, Sign::Minus] {
            for h in [ExponentScale::One, ExponentScale::Half] {
                for b in [Sign::Plus, Sign::Minus] {
                    out[i] = Self { exponent_sign: s, exponent_half: h, alpha_branch: b };
                    i += 1;
                }
            }
        }
        out
    }

    /// `s * h`.
    pub fn exponent_factor(self) -> f64 {
        self.exponent_sign.value() * self.exponent_half.value()
    }
}

impl fmt::Display for ConventionFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = match self.exponent_half {
            ExponentScale::One => "1",
            ExponentScale::Half => "1/2",
        };
        write!(f, "s={}1,h={},branch={}", self.exponent_sign, h, self.alpha_branch)
    }
}

impl FromStr for ConventionFlags {
    type Err = String;

    /// Accepts `s=+1,h=1/2,branch=-`; `h` may also be `0.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (mut sign, mut half, mut branch) = (None, None, None);
        for part in s.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got '{part}'"))?;
            match k.trim() {
                "s" | "sign" => sign = Some(v.parse::<Sign>()?),
                "h" | "half" => {
                    half = Some(match v.trim() {
                        "1" | "1.0" => ExponentScale::One,
                        "1/2" | "0.5" => ExponentScale::Half,
                        other => return Err(format!("h must be 1 or 1/2, got '{other}'")),
                    })
                }
                "branch" | "b" => branch = Some(v.parse::<Sign>()?),
                other => return Err(format!("unknown flag '{other}'")),
            }
        }
        match (sign, half, branch) {
            (Some(exponent_sign), Some(exponent_half), Some(alpha_branch)) => {
                Ok(Self { exponent_sign, exponent_half, alpha_branch })
            }
            _ => Err(format!("flags need s, h and branch: '{s}'")),
        }
    }
}

/// A single separable mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub k: f64,
    pub n: i64,
    pub nu: f64,
    pub amp_first: Complex64,
    pub amp_second: Complex64,
    pub angular_sign: Sign,
    pub conventions: ConventionFlags,
}

impl ModeSpec {
    /// Mode with `A = 1`, `B = 0`, `e^{+i n theta}` and `nu` from the coupling.
    pub fn new(k: f64, n: i64, coupling: f64, conventions: ConventionFlags) -> Result<Self, WaveError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(WaveError::InvalidMode(format!("k must be positive, got {k}")));
        }
        Ok(Self {
            k,
            n,
            nu: order_from_coupling(coupling, n)?,
            amp_first: Complex64::new(1.0, 0.0),
            amp_second: Complex64::new(0.0, 0.0),
            angular_sign: Sign::Plus,
            conventions,
        })
    }

    /// Overrides the Bessel order.
    pub fn with_order(self, nu: f64) -> Self {
        Self { nu, ..self }
    }

    pub fn with_amplitudes(self, amp_first: Complex64, amp_second: Complex64) -> Self {
        Self { amp_first, amp_second, ..self }
    }

    pub fn with_conventions(self, conventions: ConventionFlags) -> Self {
        Self { conventions, ..self }
    }

    pub fn with_angular_sign(self, angular_sign: Sign) -> Self {
        Self { angular_sign, ..self }
    }

    /// Angular number of `Psi` in the lab frame. The rotated angle runs
    /// opposite to the polar angle, so `e^{±i n theta}` carries `∓n`.
    pub fn lab_angular_number(&self) -> i64 {
        -(self.angular_sign.value() as i64) * self.n
    }
}

/// How the angle is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaPath {
    /// [`theta_from_xy`] with `beta(t)`.
    Rotated,
    /// `atan2(x, y)`, ignoring `beta`; valid when the field vanishes.
    Unrotated,
}

/// Psi at `(x, y, t)` through the rotated-angle path with default Bessel settings.
pub fn assemble_psi(
    mode: &ModeSpec,
    traj: &TransformTrajectory,
    x: f64,
    y: f64,
    t: f64,
) -> Result<Complex64, WaveError> {
    assemble_psi_with(mode, traj, x, y, t, &EvalDomain::default(), ThetaPath::Rotated)
}

pub fn assemble_psi_with(
    mode: &ModeSpec,
    traj: &TransformTrajectory,
    x: f64,
    y: f64,
    t: f64,
    dom: &EvalDomain,
    path: ThetaPath,
) -> Result<Complex64, WaveError> {
    let found = traj.options().alpha_branch;
    if traj.options().alpha0.is_none() && found != mode.conventions.alpha_branch {
        return Err(WaveError::BranchMismatch { expected: mode.conventions.alpha_branch, found });
    }
    let zero = Complex64::new(0.0, 0.0);
    if mode.amp_first == zero && mode.amp_second == zero {
        return Ok(zero);
    }
    let nu = BesselOrder::new(mode.nu)?;
    let rho2 = x * x + y * y;
    let rho = rho2.sqrt();
    let i = Complex64::new(0.0, 1.0);
    let state = traj.state(t)?;
    let (f, mu) = (state.phase, state.mu);

    if rho == 0.0 {
        if mode.amp_second != zero {
            return Err(WaveError::InvalidMode("second-kind term is singular at the origin".into()));
        }
        let radial = mode.amp_first * bessel_j(nu, zero, dom)?;
        return if mode.n == 0 || (mode.nu >= 1.0 && radial == zero) {
            Ok(radial * (-i * f).exp())
        } else {
            Err(WaveError::OriginUndefined)
        };
    }

    let theta = match path {
        ThetaPath::Rotated => theta_from_xy(x, y, traj.beta(t)?)?,
        ThetaPath::Unrotated => x.atan2(y),
    };
    let z = Complex64::new(mode.k * rho, 0.0) / mu;
    let mut radial = mode.amp_first * bessel_j(nu, z, dom)?;
    if mode.amp_second != zero {
        if z.im != 0.0 || !(z.re > 0.0) {
            return Err(WaveError::InvalidMode(format!("second-kind term needs a real positive argument, got {z}")));
        }
        radial += mode.amp_second * bessel_n_with(nu, z.re, dom)?;
    }
    let alpha = state.alpha;
    let angular = mode.angular_sign.value() * mode.n as f64 * theta;
    let exponent = alpha * (mode.conventions.exponent_factor() * rho2) + i * angular - i * f;
    Ok(radial * exponent.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{ChainOptions, IntegratorConfig};
    use crate::params::{CoefficientSet, Span};
    use std::f64::consts::PI;

    fn static_traj(b: f64, c: f64, branch: Sign) -> TransformTrajectory {
        let s = Span::new(0.0, 1.0).unwrap();
        let coeffs = CoefficientSet::constant(1.0, 1.0, b, 1.0, c, s).unwrap();
        TransformTrajectory::solve(
            &coeffs,
            s,
            1.0,
            &ChainOptions::default().with_branch(branch),
            &IntegratorConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn orders() {
        assert_eq!(order_from_coupling(0.0, 3).unwrap(), 3.0);
        assert_eq!(order_from_coupling(1.5, 1).unwrap(), 2.0);
        assert!(matches!(order_from_coupling(-1.0, 1), Err(WaveError::FallToCenter { .. })));
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_from_xy(0.0, 1.0, 0.0).unwrap(), 0.0);
        assert!((theta_from_xy(1.0, 0.0, 0.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((theta_from_xy(1.0, 0.0, PI / 2.0).unwrap() - PI).abs() < 1e-15);
        assert!(matches!(theta_from_xy(0.0, 0.0, 0.3), Err(WaveError::OriginUndefined)));
    }

    #[test]
    fn theta_inverse() {
        for &(rho, th, b) in &[(1.0, 0.3, 0.0), (2.5, -2.0, 1.1), (0.7, 3.0, -0.4)] {
            let (x, y) = xy_from_theta(rho, th, b);
            assert!((theta_from_xy(x, y, b).unwrap() - th).abs() < 1e-13);
            assert!(((x * x + y * y).sqrt() - rho).abs() < 1e-14);
        }
    }

    #[test]
    fn flags_enumerate_and_round_trip() {
        let all = ConventionFlags::all();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for f in all {
            assert_eq!(f.to_string().parse::<ConventionFlags>().unwrap(), f);
        }
        assert_eq!(all[0], ConventionFlags::as_written());
        let f: ConventionFlags = "s=+1,h=1,branch=-".parse().unwrap();
        assert_eq!(f.alpha_branch, Sign::Minus);
        assert!("s=+1,h=2,branch=-".parse::<ConventionFlags>().is_err());
        assert!("s=+1,h=1".parse::<ConventionFlags>().is_err());
    }

    #[test]
    fn origin_value_is_amplitude() {
        let traj = static_traj(0.0, 0.0, Sign::Plus);
        let amp = Complex64::new(0.3, -1.2);
        let mode = ModeSpec::new(1.0, 0, 0.0, ConventionFlags::gaussian())
            .unwrap()
            .with_amplitudes(amp, Complex64::new(0.0, 0.0));
        assert_eq!(assemble_psi(&mode, &traj, 0.0, 0.0, 0.0).unwrap(), amp);
    }

    #[test]
    fn zero_amplitudes_give_zero() {
        let traj = static_traj(1.0, 1.5, Sign::Plus);
        let zero = Complex64::new(0.0, 0.0);
        let mode = ModeSpec::new(1.0, 1, 1.5, ConventionFlags::gaussian()).unwrap().with_amplitudes(zero, zero);
        assert_eq!(assemble_psi(&mode, &traj, 0.4, -2.0, 0.5).unwrap(), zero);
    }

    #[test]
    fn origin_rules() {
        let traj = static_traj(1.0, -0.3, Sign::Plus);
        let mode = ModeSpec::new(1.0, 1, -0.3, ConventionFlags::gaussian()).unwrap();
        assert!(mode.nu < 1.0);
        assert!(matches!(assemble_psi(&mode, &traj, 0.0, 0.0, 0.2), Err(WaveError::OriginUndefined)));
        let traj = static_traj(1.0, 1.5, Sign::Plus);
        let mode = ModeSpec::new(1.0, 1, 1.5, ConventionFlags::gaussian()).unwrap();
        assert_eq!(assemble_psi(&mode, &traj, 0.0, 0.0, 0.2).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn branch_mismatch_is_rejected() {
        let traj = static_traj(0.0, 0.0, Sign::Minus);
        let mode = ModeSpec::new(1.0, 0, 0.0, ConventionFlags::gaussian()).unwrap();
        assert!(matches!(assemble_psi(&mode, &traj, 1.0, 0.0, 0.1), Err(WaveError::BranchMismatch { .. })));
    }

    #[test]
    fn second_kind_needs_real_argument() {
        // At t = 0, mu = 1 and the argument is real.
        let traj = static_traj(0.0, 1.5, Sign::Plus);
        let mode = ModeSpec::new(1.0, 1, 1.5, ConventionFlags::gaussian())
            .unwrap()
            .with_amplitudes(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let v = assemble_psi(&mode, &traj, 1.0, 0.0, 0.0).unwrap();
        let n2 = crate::bessel::bessel_n(BesselOrder::new(2.0).unwrap(), 1.0).unwrap();
        assert!((v.norm() - n2.abs() * (-0.5f64).exp()).abs() < 1e-10);
        assert!(matches!(assemble_psi(&mode, &traj, 1.0, 0.0, 0.5), Err(WaveError::InvalidMode(_))));
    }
}
