//! Dormand-Prince 5(4) with the 4th-order continuous extension.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::{IntegratorConfig, OdeError};
use crate::params::Span;

/// Scalar state the integrator can advance.
pub trait OdeState: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn magnitude(self) -> f64;

    /// Error estimate `err` scaled by `abs_tol + rel_tol * max(|y0|, |y1|)`.
    fn error_ratio(err: Self, y0: Self, y1: Self, abs_tol: f64, rel_tol: f64) -> f64 {
        err.magnitude() / (abs_tol + rel_tol * y0.magnitude().max(y1.magnitude()))
    }
}

impl OdeState for f64 {
    fn zero() -> Self {
        0.0
    }

    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl OdeState for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn magnitude(self) -> f64 {
        self.norm()
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
struct DenseStep<S> {
    t: f64,
    h: f64,
    rc: [S; 5],
}

impl<S: OdeState> DenseStep<S> {
    fn value(&self, t: f64) -> S {
        let th = (t - self.t) / self.h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = self.rc;
        r1 + (r2 + (r3 + (r4 + r5 * th1) * th) * th1) * th
    }

    fn derivative(&self, t: f64) -> S {
        let th = (t - self.t) / self.h;
        let th1 = 1.0 - th;
        let [_, r2, r3, r4, r5] = self.rc;
        let p = r3 + (r4 + r5 * th1) * th;
        let dp = r4 + r5 * (1.0 - 2.0 * th);
        let q = r2 + p * th1;
        let dq = dp * th1 - p;
        (q + dq * th) * (1.0 / self.h)
    }
}

/// Counters and the achieved error level of one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest accepted scaled error estimate (<= 1 by construction).
    pub max_error_ratio: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

/// Piecewise-polynomial solution over the whole span.
#[derive(Debug, Clone)]
pub struct DenseSolution<S> {
    span: Span,
    steps: Vec<DenseStep<S>>,
    stats: IntegrationStats,
}

impl<S: OdeState> DenseSolution<S> {
    fn locate(&self, t: f64) -> Result<&DenseStep<S>, OdeError> {
        if !self.span.contains(t) {
            return Err(OdeError::OutOfSpan { t, t0: self.span.t0, t1: self.span.t1 });
        }
        let i = self.steps.partition_point(|s| s.t + s.h < t);
        Ok(&self.steps[i.min(self.steps.len() - 1)])
    }

    pub fn eval(&self, t: f64) -> Result<S, OdeError> {
        Ok(self.locate(t)?.value(t))
    }

    /// Time derivative of the interpolant.
    pub fn derivative(&self, t: f64) -> Result<S, OdeError> {
        Ok(self.locate(t)?.derivative(t))
    }

    pub fn span(&self) -> Span {
        self.span
    }

    pub fn stats(&self) -> IntegrationStats {
        self.stats
    }

    /// Accepted step boundaries.
    pub fn mesh(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.t).chain(self.steps.last().map(|s| s.t + s.h))
    }
}

/// Integrates `y' = f(t, y)` over `span` from `y0`. `check` runs after every
/// accepted step and may abort the integration.
pub fn integrate<S, F, G>(
    mut f: F,
    y0: S,
    span: Span,
    cfg: &IntegratorConfig,
    mut check: G,
) -> Result<DenseSolution<S>, OdeError>
where
    S: OdeState,
    F: FnMut(f64, S) -> Result<S, OdeError>,
    G: FnMut(f64, S) -> Result<(), OdeError>,
{
    cfg.validate()?;
    let (t0, t1) = (span.t0, span.t1);
    let max_step = cfg.max_step.unwrap_or(span.length()).min(span.length());
    let scale_of = |a: S, b: S| cfg.abs_tol + cfg.rel_tol * a.magnitude().max(b.magnitude());

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, y)?;
    let mut h = {
        let d0 = y.magnitude() / scale_of(y, y);
        let d1 = k1.magnitude() / scale_of(y, y);
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.length() } else { 0.01 * d0 / d1 };
        guess.min(max_step)
    };
    let mut steps = Vec::new();
    let mut stats =
        IntegrationStats { accepted: 0, rejected: 0, max_error_ratio: 0.0, abs_tol: cfg.abs_tol, rel_tol: cfg.rel_tol };
    let mut last = false;

    while !last {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(OdeError::ToleranceNotMet { t, h });
        }
        if t + 1.01 * h >= t1 {
            h = t1 - t;
            last = true;
        }
        if h <= 1e-14 * t.abs().max(span.length()) {
            return Err(OdeError::ToleranceNotMet { t, h });
        }
        let k2 = f(t + C2 * h, y + k1 * (h * A21))?;
        let k3 = f(t + C3 * h, y + (k1 * A31 + k2 * A32) * h)?;
        let k4 = f(t + C4 * h, y + (k1 * A41 + k2 * A42 + k3 * A43) * h)?;
        let k5 = f(t + C5 * h, y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h)?;
        let tn = if last { t1 } else { t + h };
        let k6 = f(tn, y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h)?;
        let y1 = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
        let k7 = f(tn, y1)?;
        let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let ratio = S::error_ratio(err, y, y1, cfg.abs_tol, cfg.rel_tol);
        if !ratio.is_finite() {
            return Err(OdeError::ToleranceNotMet { t, h });
        }

        if ratio <= 1.0 {
            let r2 = y1 - y;
            let r3 = k1 * h - r2;
            let r4 = r2 - k7 * h - r3;
            let r5 = (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h;
            steps.push(DenseStep { t, h, rc: [y, r2, r3, r4, r5] });
            stats.accepted += 1;
            stats.max_error_ratio = stats.max_error_ratio.max(ratio);
            t = tn;
            y = y1;
            k1 = k7;
            check(t, y)?;
            let fac = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(max_step);
        } else {
            stats.rejected += 1;
            last = false;
            h *= (0.9 * ratio.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(DenseSolution { span, steps, stats })
}
