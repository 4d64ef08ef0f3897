//! The four scalar time problems of the transformation chain.
//!
//! * `beta`: rotation angle removing the `L_z` cross term, `β' = c·qB/m`.
//! * `alpha`: complex Riccati parameter, `α' = i(m·Ωe² − α²/m)` with
//!   `Ωe² = ω² + q²B²/(4m²)`.
//! * `mu`: scale function, `μ' = −r(t)·μ`.
//! * `f`: phase, `f' = (k² + 2μ²α)/(2mμ²)`.
//!
//! Everything runs through one adaptive Dormand-Prince engine ([`dopri`]) and
//! is stored as dense output.
//!
//! Two couplings are selectable. [`RotationRule::Larmor`] (`c = 1/2`) and
//! [`ScaleRule::Consistent`] (`r = −iα/m`) are the choices that make the
//! assembled wavefunction satisfy the Schrödinger equation; the `Literal`
//! variants (`c = 1/4`, `r = α`) are kept for comparison.

pub mod dopri;

use num_complex::Complex64;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::export;
use crate::params::{CoefficientSet, ParamError, Span};
use crate::Sign;

pub use dopri::{integrate, DenseSolution, IntegrationStats, OdeState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("t = {t} outside the solved span [{t0}, {t1}]")]
    OutOfSpan { t: f64, t0: f64, t1: f64 },
    #[error("tolerance not met: step size collapsed to {h:e} at t = {t}")]
    ToleranceNotMet { t: f64, h: f64 },
    #[error("alpha escaped at t = {t}: |alpha| = {magnitude:e} exceeds ceiling {ceiling:e}")]
    BlowUp { t: f64, magnitude: f64, ceiling: f64 },
    #[error("mu vanished at t = {t}: |mu| = {magnitude:e}")]
    ZeroCrossing { t: f64, magnitude: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the step; `None` means the span length.
    pub max_step: Option<f64>,
    /// Number of equally spaced samples used for export and consistency checks.
    pub dense_points: usize,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-10, max_step: None, dense_points: 201, max_steps: 1_000_000 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), OdeError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(OdeError::InvalidConfig("tolerances must be positive".into()));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(OdeError::InvalidConfig("max_step must be positive".into()));
            }
        }
        if self.dense_points < 2 {
            return Err(OdeError::InvalidConfig("dense_points must be at least 2".into()));
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }
}

/// Rate of the rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RotationRule {
    /// `β' = qB/(4m)`.
    Literal,
    /// `β' = qB/(2m)`, the Larmor frequency.
    Larmor,
}

impl RotationRule {
    pub fn factor(self) -> f64 {
        match self {
            RotationRule::Literal => 0.25,
            RotationRule::Larmor => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RotationRule::Literal => "literal",
            RotationRule::Larmor => "larmor",
        }
    }
}

/// Relation between the scale function and alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScaleRule {
    /// `μ' = −α μ`.
    Literal,
    /// `μ' = (iα/m) μ`.
    Consistent,
}

impl ScaleRule {
    pub fn name(self) -> &'static str {
        match self {
            ScaleRule::Literal => "literal",
            ScaleRule::Consistent => "consistent",
        }
    }

    /// The `r(t)` in `μ' = −r μ`.
    pub fn rate(self, alpha: Complex64, mass: f64) -> Complex64 {
        match self {
            ScaleRule::Literal => alpha,
            ScaleRule::Consistent => Complex64::new(0.0, -1.0) * alpha / mass,
        }
    }
}

/// Initial data and couplings of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    /// Sign of the default `alpha0`.
    pub alpha_branch: Sign,
    /// Explicit `alpha0`, overriding the branch default.
    pub alpha0: Option<Complex64>,
    pub mu0: Complex64,
    pub rotation: RotationRule,
    pub scaling: ScaleRule,
    /// Riccati ceiling as a multiple of `|alpha0|` (or of 1 when `alpha0 = 0`).
    pub blowup_factor: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            alpha_branch: Sign::Plus,
            alpha0: None,
            mu0: Complex64::new(1.0, 0.0),
            rotation: RotationRule::Larmor,
            scaling: ScaleRule::Consistent,
            blowup_factor: 1e6,
        }
    }
}

impl ChainOptions {
    pub fn literal() -> Self {
        Self { rotation: RotationRule::Literal, scaling: ScaleRule::Literal, ..Self::default() }
    }

    pub fn with_branch(self, alpha_branch: Sign) -> Self {
        Self { alpha_branch, ..self }
    }
}

/// `±m(t0)·Ωe(t0)`, the stationary point of the frozen Riccati equation.
pub fn default_alpha0(coeffs: &CoefficientSet, t0: f64, branch: Sign) -> Result<Complex64, OdeError> {
    let m = coeffs.mass(t0)?;
    let omega = coeffs.shifted_frequency_sq(t0)?.sqrt();
    Ok(Complex64::new(branch.value() * m * omega, 0.0))
}

fn quadrature<G>(mut g: G, span: Span, cfg: &IntegratorConfig) -> Result<DenseSolution<Complex64>, OdeError>
where
    G: FnMut(f64) -> Result<Complex64, OdeError>,
{
    integrate(|t, _| g(t), Complex64::new(0.0, 0.0), span, cfg, |_, _| Ok(()))
}

/// `β(t) = ∫ c·q·B/m`, `β(t0) = 0`.
pub fn integrate_beta(
    coeffs: &CoefficientSet,
    span: Span,
    rule: RotationRule,
    cfg: &IntegratorConfig,
) -> Result<DenseSolution<f64>, OdeError> {
    check_within(coeffs, span)?;
    let c = rule.factor() * coeffs.charge();
    integrate(|t, _| Ok(c * coeffs.field(t)? / coeffs.mass(t)?), 0.0, span, cfg, |_, _| Ok(()))
}

/// Solves `α' = i(m·Ωe² − α²/m)` from `alpha0`. Aborts with
/// [`OdeError::BlowUp`] once `|α|` exceeds `ceiling`.
pub fn solve_riccati(
    coeffs: &CoefficientSet,
    alpha0: Complex64,
    span: Span,
    ceiling: f64,
    cfg: &IntegratorConfig,
) -> Result<DenseSolution<Complex64>, OdeError> {
    check_within(coeffs, span)?;
    if !(alpha0.re.is_finite() && alpha0.im.is_finite()) {
        return Err(OdeError::InvalidConfig(format!("alpha0 = {alpha0} is not finite")));
    }
    let i = Complex64::new(0.0, 1.0);
    let rhs = |t: f64, a: Complex64| -> Result<Complex64, OdeError> {
        let m = coeffs.mass(t)?;
        let w2 = coeffs.shifted_frequency_sq(t)?;
        let d = i * (m * w2 - a * a / m);
        if d.norm() > 1e3 * ceiling * ceiling || !d.norm().is_finite() {
            return Err(OdeError::BlowUp { t, magnitude: a.norm(), ceiling });
        }
        Ok(d)
    };
    integrate(rhs, alpha0, span, cfg, |t, a| {
        let magnitude = a.norm();
        if magnitude > ceiling || !magnitude.is_finite() {
            Err(OdeError::BlowUp { t, magnitude, ceiling })
        } else {
            Ok(())
        }
    })
}

/// Relative residual of the Riccati condition at `t`:
/// `|(m/2)Ωe² − α²/(2m) + iα'/2|` over the largest of the three terms.
pub fn riccati_residual(
    coeffs: &CoefficientSet,
    t: f64,
    alpha: Complex64,
    alpha_rate: Complex64,
) -> Result<f64, OdeError> {
    let m = coeffs.mass(t)?;
    let t1 = Complex64::new(0.5 * m * coeffs.shifted_frequency_sq(t)?, 0.0);
    let t2 = -alpha * alpha / (2.0 * m);
    let t3 = Complex64::new(0.0, 0.5) * alpha_rate;
    let scale = t1.norm().max(t2.norm()).max(t3.norm());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((t1 + t2 + t3).norm() / scale)
}

/// Solves `μ' = −r(t)·μ` from `mu0`.
pub fn integrate_mu<R>(
    rate: R,
    mu0: Complex64,
    span: Span,
    cfg: &IntegratorConfig,
) -> Result<DenseSolution<Complex64>, OdeError>
where
    R: Fn(f64) -> Result<Complex64, OdeError>,
{
    if mu0.norm() == 0.0 || !mu0.norm().is_finite() {
        return Err(OdeError::InvalidConfig(format!("mu0 = {mu0} must be finite and nonzero")));
    }
    let floor = 1e-12 * mu0.norm();
    integrate(
        |t, mu| Ok(-rate(t)? * mu),
        mu0,
        span,
        cfg,
        |t, mu| {
            if mu.norm() < floor {
                Err(OdeError::ZeroCrossing { t, magnitude: mu.norm() })
            } else {
                Ok(())
            }
        },
    )
}

/// `f(t) = ∫ (k² + 2μ²α)/(2mμ²)`, `f(t0) = 0`.
pub fn integrate_phase<A, M>(
    coeffs: &CoefficientSet,
    alpha: A,
    mu: M,
    k: f64,
    span: Span,
    cfg: &IntegratorConfig,
) -> Result<DenseSolution<Complex64>, OdeError>
where
    A: Fn(f64) -> Result<Complex64, OdeError>,
    M: Fn(f64) -> Result<Complex64, OdeError>,
{
    check_within(coeffs, span)?;
    quadrature(
        |t| {
            let m = coeffs.mass(t)?;
            let u = mu(t)?;
            let u2 = u * u;
            if u2.norm() == 0.0 {
                return Err(OdeError::ZeroCrossing { t, magnitude: 0.0 });
            }
            Ok((k * k / u2 + 2.0 * alpha(t)?) / (2.0 * m))
        },
        span,
        cfg,
    )
}

fn check_within(coeffs: &CoefficientSet, span: Span) -> Result<(), OdeError> {
    let outer = coeffs.span();
    for t in [span.t0, span.t1] {
        if !outer.contains(t) {
            return Err(ParamError::OutOfDomain { t, t0: outer.t0, t1: outer.t1 }.into());
        }
    }
    Ok(())
}

/// Coupled state `(α, μ, f)` integrated as one system so that μ and f see
/// the same steps as α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainState {
    pub alpha: Complex64,
    pub mu: Complex64,
    pub phase: Complex64,
}

impl std::ops::Add for ChainState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { alpha: self.alpha + o.alpha, mu: self.mu + o.mu, phase: self.phase + o.phase }
    }
}

impl std::ops::Sub for ChainState {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { alpha: self.alpha - o.alpha, mu: self.mu - o.mu, phase: self.phase - o.phase }
    }
}

impl std::ops::Mul<f64> for ChainState {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self { alpha: self.alpha * s, mu: self.mu * s, phase: self.phase * s }
    }
}

impl OdeState for ChainState {
    fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { alpha: z, mu: z, phase: z }
    }

    fn magnitude(self) -> f64 {
        self.alpha.norm().max(self.mu.norm()).max(self.phase.norm())
    }

    fn error_ratio(err: Self, y0: Self, y1: Self, abs_tol: f64, rel_tol: f64) -> f64 {
        let part = |e: Complex64, a: Complex64, b: Complex64| e.norm() / (abs_tol + rel_tol * a.norm().max(b.norm()));
        part(err.alpha, y0.alpha, y1.alpha).max(part(err.mu, y0.mu, y1.mu)).max(part(err.phase, y0.phase, y1.phase))
    }
}

/// `n` equally spaced times covering `span`, endpoints exact.
pub fn sample_times(span: Span, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let h = span.length() / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { span.t1 } else { span.t0 + i as f64 * h }).collect()
}

/// Dense record of β, α, μ and f for one separation constant `k`.
#[derive(Debug, Clone)]
pub struct TransformTrajectory {
    coeffs: CoefficientSet,
    k: f64,
    options: ChainOptions,
    cfg: IntegratorConfig,
    alpha0: Complex64,
    beta: DenseSolution<f64>,
    chain: DenseSolution<ChainState>,
}

impl TransformTrajectory {
    pub fn solve(
        coeffs: &CoefficientSet,
        span: Span,
        k: f64,
        options: &ChainOptions,
        cfg: &IntegratorConfig,
    ) -> Result<Self, OdeError> {
        cfg.validate()?;
        if !k.is_finite() {
            return Err(OdeError::InvalidConfig(format!("k = {k} is not finite")));
        }
        let alpha0 = match options.alpha0 {
            Some(a) => a,
            None => default_alpha0(coeffs, span.t0, options.alpha_branch)?,
        };
        let ceiling = options.blowup_factor * alpha0.norm().max(1.0);
        let mu0 = options.mu0;
        if mu0.norm() == 0.0 || !mu0.norm().is_finite() {
            return Err(OdeError::InvalidConfig(format!("mu0 = {mu0} must be finite and nonzero")));
        }
        let beta = integrate_beta(coeffs, span, options.rotation, cfg)?;
        let scaling = options.scaling;
        let i = Complex64::new(0.0, 1.0);
        let rhs = |t: f64, y: ChainState| -> Result<ChainState, OdeError> {
            let m = coeffs.mass(t)?;
            let w2 = coeffs.shifted_frequency_sq(t)?;
            let a = y.alpha;
            let da = i * (m * w2 - a * a / m);
            if !(da.norm() <= 1e3 * ceiling * ceiling) {
                return Err(OdeError::BlowUp { t, magnitude: a.norm(), ceiling });
            }
            let u2 = y.mu * y.mu;
            if u2.norm() == 0.0 {
                return Err(OdeError::ZeroCrossing { t, magnitude: 0.0 });
            }
            Ok(ChainState { alpha: da, mu: -scaling.rate(a, m) * y.mu, phase: (k * k / u2 + 2.0 * a) / (2.0 * m) })
        };
        let y0 = ChainState { alpha: alpha0, mu: mu0, phase: Complex64::new(0.0, 0.0) };
        let floor = 1e-12 * mu0.norm();
        let chain = integrate(rhs, y0, span, cfg, |t, y| {
            let magnitude = y.alpha.norm();
            if magnitude > ceiling || !magnitude.is_finite() {
                return Err(OdeError::BlowUp { t, magnitude, ceiling });
            }
            if y.mu.norm() < floor {
                return Err(OdeError::ZeroCrossing { t, magnitude: y.mu.norm() });
            }
            Ok(())
        })?;
        Ok(Self { coeffs: coeffs.clone(), k, options: *options, cfg: *cfg, alpha0, beta, chain })
    }

    pub fn span(&self) -> Span {
        self.chain.span()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn options(&self) -> &ChainOptions {
        &self.options
    }

    pub fn integrator(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn alpha0(&self) -> Complex64 {
        self.alpha0
    }

    pub fn beta(&self, t: f64) -> Result<f64, OdeError> {
        self.beta.eval(t)
    }

    pub fn alpha(&self, t: f64) -> Result<Complex64, OdeError> {
        Ok(self.chain.eval(t)?.alpha)
    }

    pub fn alpha_rate(&self, t: f64) -> Result<Complex64, OdeError> {
        Ok(self.chain.derivative(t)?.alpha)
    }

    pub fn mu(&self, t: f64) -> Result<Complex64, OdeError> {
        Ok(self.chain.eval(t)?.mu)
    }

    pub fn mu_rate(&self, t: f64) -> Result<Complex64, OdeError> {
        Ok(self.chain.derivative(t)?.mu)
    }

    pub fn phase(&self, t: f64) -> Result<Complex64, OdeError> {
        Ok(self.chain.eval(t)?.phase)
    }

    /// `(α, μ, f)` at `t` from one interpolant lookup.
    pub fn state(&self, t: f64) -> Result<ChainState, OdeError> {
        self.chain.eval(t)
    }

    /// Step counts of the rotation and chain integrations and the worst
    /// scaled error ratio (each <= 1).
    pub fn achieved(&self) -> IntegrationStats {
        let (b, c) = (self.beta.stats(), self.chain.stats());
        IntegrationStats {
            accepted: b.accepted + c.accepted,
            rejected: b.rejected + c.rejected,
            max_error_ratio: b.max_error_ratio.max(c.max_error_ratio),
            ..c
        }
    }

    /// `max |μ' + rμ| / (|μ'| + |rμ| + ε)` over the dense sample points.
    pub fn chain_consistency(&self) -> Result<f64, OdeError> {
        let mut worst = 0.0f64;
        for t in sample_times(self.span(), self.cfg.dense_points) {
            let mu = self.mu(t)?;
            let dmu = self.mu_rate(t)?;
            let r = self.options.scaling.rate(self.alpha(t)?, self.coeffs.mass(t)?) * mu;
            worst = worst.max((dmu + r).norm() / (dmu.norm() + r.norm() + 1e-300));
        }
        Ok(worst)
    }

    /// Largest Riccati plug-back residual over the dense sample points.
    pub fn riccati_residual(&self) -> Result<f64, OdeError> {
        let mut worst = 0.0f64;
        for t in sample_times(self.span(), self.cfg.dense_points) {
            worst = worst.max(riccati_residual(&self.coeffs, t, self.alpha(t)?, self.alpha_rate(t)?)?);
        }
        Ok(worst)
    }

    /// CSV with columns `t, beta, re_alpha, im_alpha, re_mu, im_mu, re_f, im_f`.
    pub fn to_csv(&self, points: usize) -> Result<String, OdeError> {
        let mut out = String::from("t,beta,re_alpha,im_alpha,re_mu,im_mu,re_f,im_f\n");
        for t in sample_times(self.span(), points) {
            let ChainState { alpha: a, mu: m, phase: f } = self.state(t)?;
            let row = [t, self.beta(t)?, a.re, a.im, m.re, m.im, f.re, f.im];
            export::push_row(&mut out, &row);
        }
        Ok(out)
    }

    /// SHA-256 over the sampled trajectory and chain options.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!(
            "k={:e};alpha0={:e},{:e};mu0={:e},{:e};rotation={};scaling={}\n",
            self.k,
            self.alpha0.re,
            self.alpha0.im,
            self.options.mu0.re,
            self.options.mu0.im,
            self.options.rotation.name(),
            self.options.scaling.name()
        ));
        if let Ok(csv) = self.to_csv(self.cfg.dense_points) {
            h.update(csv.as_bytes());
        }
        export::hex(&h.finalize())
    }
}
