//! Time-dependent physical coefficients m(t), ω(t), B(t) and the constants q, C.
//!
//! Every coefficient is a [`TimeFunction`]: a closed-form family (or a cubic
//! spline through tabulated samples) restricted to a closed time span. Values
//! and derivatives are analytic per family. Units are natural (ħ = c = 1).
//!
//! The vector potential is taken literally as `A = (B/2)(y, -x)` with zero
//! scalar potential. Its curl is `-B(t) e3`; [`curl_of_gauge`] exposes that
//! so callers can check orientation against [`derived_fields`].

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("time {t} outside span [{t0}, {t1}]")]
    OutOfDomain { t: f64, t0: f64, t1: f64 },
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid span [{t0}, {t1}]")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("tabulated samples must have strictly increasing times (index {index})")]
    NonIncreasingSamples { index: usize },
    #[error("tabulated family needs at least 2 samples, got {count}")]
    TooFewSamples { count: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("nonpositive mass near t = {t} (m = {value})")]
    NonPositiveMass { t: f64, value: f64 },
    #[error("coefficient spans do not overlap")]
    DisjointSpans,
    #[error("negative radius {rho}")]
    NegativeRadius { rho: f64 },
}

/// Closed time interval `[t0, t1]` with `t0 < t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub t0: f64,
    pub t1: f64,
}

impl Span {
    pub fn new(t0: f64, t1: f64) -> Result<Self, ParamError> {
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(ParamError::InvalidSpan { t0, t1 });
        }
        Ok(Self { t0, t1 })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0 && t <= self.t1
    }

    pub fn length(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn check(&self, t: f64) -> Result<(), ParamError> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(ParamError::OutOfDomain { t, t0: self.t0, t1: self.t1 })
        }
    }

    pub fn intersect(&self, other: &Span) -> Option<Span> {
        Span::new(self.t0.max(other.t0), self.t1.min(other.t1)).ok()
    }
}

/// Natural cubic spline through strictly increasing samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    times: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the nodes.
    moments: Vec<f64>,
}

impl CubicSpline {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, ParamError> {
        if times.len() != values.len() {
            return Err(ParamError::InvalidParameter(format!("{} times but {} values", times.len(), values.len())));
        }
        let n = times.len();
        if n < 2 {
            return Err(ParamError::TooFewSamples { count: n });
        }
        for i in 1..n {
            if !(times[i] > times[i - 1]) {
                return Err(ParamError::NonIncreasingSamples { index: i });
            }
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(ParamError::InvalidParameter("non-finite sample".into()));
        }

        // Tridiagonal system for the interior moments, natural ends.
        let mut moments = vec![0.0; n];
        if n > 2 {
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 1..n - 1 {
                let h0 = times[i] - times[i - 1];
                let h1 = times[i + 1] - times[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            }
            // Forward sweep; the sub-diagonal equals the previous super-diagonal.
            for i in 1..m {
                let w = upper[i - 1] / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            moments[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                moments[i + 1] = (rhs[i] - upper[i] * moments[i + 2]) / diag[i];
            }
        }
        Ok(Self { times, values, moments })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn segment(&self, t: f64) -> usize {
        let idx = self.times.partition_point(|&s| s <= t);
        idx.clamp(1, self.times.len() - 1) - 1
    }

    /// Local power-basis coefficients of segment `i` in `s = t - t_i`.
    fn segment_poly(&self, i: usize) -> [f64; 4] {
        let h = self.times[i + 1] - self.times[i];
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        [y0, (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0, m0 / 2.0, (m1 - m0) / (6.0 * h)]
    }

    fn value(&self, t: f64) -> f64 {
        let i = self.segment(t);
        if t == self.times[i] {
            return self.values[i];
        }
        if t == self.times[i + 1] {
            return self.values[i + 1];
        }
        let c = self.segment_poly(i);
        let s = t - self.times[i];
        c[0] + s * (c[1] + s * (c[2] + s * c[3]))
    }

    fn derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let c = self.segment_poly(i);
        let s = t - self.times[i];
        c[1] + s * (2.0 * c[2] + s * 3.0 * c[3])
    }

    fn range(&self, a: f64, b: f64) -> Interval {
        let mut out: Option<Interval> = None;
        let last = self.times.len() - 1;
        for i in 0..last {
            let (lo, hi) = (self.times[i].max(a), self.times[i + 1].min(b));
            if lo > hi {
                continue;
            }
            let c = self.segment_poly(i);
            let s = Interval::new(lo - self.times[i], hi - self.times[i]);
            let r = horner(&c, s);
            out = Some(match out {
                Some(acc) => acc.hull(r),
                None => r,
            });
        }
        out.unwrap_or(Interval::point(self.value(a)))
    }
}

/// Closed-form or tabulated shape of one coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Constant {
        value: f64,
    },
    /// `value + slope * t`
    Linear {
        value: f64,
        slope: f64,
    },
    /// `value * exp(rate * t)`
    Exponential {
        value: f64,
        rate: f64,
    },
    /// `offset + amplitude * cos(freq * t + phase)`
    Sinusoidal {
        offset: f64,
        amplitude: f64,
        freq: f64,
        phase: f64,
    },
    /// `sum_i coeffs[i] * t^i`
    Polynomial {
        coeffs: Vec<f64>,
    },
    Tabulated(CubicSpline),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Constant { .. } => "constant",
            Family::Linear { .. } => "linear",
            Family::Exponential { .. } => "exponential",
            Family::Sinusoidal { .. } => "sinusoidal",
            Family::Polynomial { .. } => "polynomial",
            Family::Tabulated(_) => "tabulated",
        }
    }
}

/// A coefficient `f(t)` on a closed span, with analytic derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFunction {
    family: Family,
    span: Span,
}

impl TimeFunction {
    pub fn new(family: Family, span: Span) -> Result<Self, ParamError> {
        let params: Vec<f64> = match &family {
            Family::Constant { value } => vec![*value],
            Family::Linear { value, slope } => vec![*value, *slope],
            Family::Exponential { value, rate } => vec![*value, *rate],
            Family::Sinusoidal { offset, amplitude, freq, phase } => {
                vec![*offset, *amplitude, *freq, *phase]
            }
            Family::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err(ParamError::InvalidParameter("polynomial needs at least one coefficient".into()));
                }
                coeffs.clone()
            }
            Family::Tabulated(spline) => {
                let (first, last) = (spline.times[0], spline.times[spline.times.len() - 1]);
                if span.t0 < first || span.t1 > last {
                    return Err(ParamError::InvalidParameter(format!(
                        "tabulated samples cover [{first}, {last}] but span is [{}, {}]",
                        span.t0, span.t1
                    )));
                }
                vec![]
            }
        };
        if params.iter().any(|p| !p.is_finite()) {
            return Err(ParamError::InvalidParameter(format!("non-finite parameter in {} family", family.name())));
        }
        Ok(Self { family, span })
    }

    pub fn constant(value: f64, span: Span) -> Result<Self, ParamError> {
        Self::new(Family::Constant { value }, span)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn span(&self) -> Span {
        self.span
    }

    pub fn evaluate(&self, t: f64) -> Result<f64, ParamError> {
        self.span.check(t)?;
        let v = match &self.family {
            Family::Constant { value } => *value,
            Family::Linear { value, slope } => value + slope * t,
            Family::Exponential { value, rate } => value * (rate * t).exp(),
            Family::Sinusoidal { offset, amplitude, freq, phase } => offset + amplitude * (freq * t + phase).cos(),
            Family::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            Family::Tabulated(spline) => spline.value(t),
        };
        finite(v, t)
    }

    pub fn derivative(&self, t: f64) -> Result<f64, ParamError> {
        self.span.check(t)?;
        let v = match &self.family {
            Family::Constant { .. } => 0.0,
            Family::Linear { slope, .. } => *slope,
            Family::Exponential { value, rate } => value * rate * (rate * t).exp(),
            Family::Sinusoidal { amplitude, freq, phase, .. } => -amplitude * freq * (freq * t + phase).sin(),
            Family::Polynomial { coeffs } => {
                coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, c)| acc * t + i as f64 * c)
            }
            Family::Tabulated(spline) => spline.derivative(t),
        };
        finite(v, t)
    }

    /// Guaranteed enclosure of the function's range over `[a, b]`.
    pub(crate) fn range(&self, a: f64, b: f64) -> Interval {
        match &self.family {
            Family::Constant { value } => Interval::point(*value),
            Family::Linear { value, slope } => Interval::new(value + slope * a, value + slope * b).sorted(),
            Family::Exponential { value, rate } => {
                Interval::new(value * (rate * a).exp(), value * (rate * b).exp()).sorted()
            }
            Family::Sinusoidal { offset, amplitude, freq, phase } => {
                let c = cos_range(freq * a + phase, freq * b + phase);
                c.scale(*amplitude).shift(*offset)
            }
            Family::Polynomial { coeffs } => horner(coeffs, Interval::new(a, b)),
            Family::Tabulated(spline) => spline.range(a, b),
        }
    }

    /// Proves `f > 0` on the span by 1024-point sampling plus interval bisection.
    fn check_positive(&self) -> Result<(), ParamError> {
        let Span { t0, t1 } = self.span;
        let samples = 1024;
        for i in 0..samples {
            let t = t0 + (t1 - t0) * i as f64 / (samples - 1) as f64;
            let v = self.evaluate(t)?;
            if v <= 0.0 {
                return Err(ParamError::NonPositiveMass { t, value: v });
            }
        }
        self.prove_positive(t0, t1, 24)
    }

    fn prove_positive(&self, a: f64, b: f64, depth: u32) -> Result<(), ParamError> {
        if self.range(a, b).lo > 0.0 {
            return Ok(());
        }
        let mid = 0.5 * (a + b);
        let v = self.evaluate(mid)?;
        if v <= 0.0 || depth == 0 {
            return Err(ParamError::NonPositiveMass { t: mid, value: v });
        }
        self.prove_positive(a, mid, depth - 1)?;
        self.prove_positive(mid, b, depth - 1)
    }
}

fn finite(v: f64, t: f64) -> Result<f64, ParamError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParamError::NonFinite { t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn sorted(self) -> Self {
        Self { lo: self.lo.min(self.hi), hi: self.lo.max(self.hi) }
    }

    fn hull(self, o: Self) -> Self {
        Self { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    fn scale(self, s: f64) -> Self {
        Self::new(self.lo * s, self.hi * s).sorted()
    }

    fn shift(self, s: f64) -> Self {
        Self::new(self.lo + s, self.hi + s)
    }

    fn mul(self, o: Self) -> Self {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        Self {
            lo: p.iter().copied().fold(f64::INFINITY, f64::min),
            hi: p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

fn horner(coeffs: &[f64], x: Interval) -> Interval {
    coeffs.iter().rev().fold(Interval::point(0.0), |acc, &c| acc.mul(x).shift(c))
}

/// Exact range of `cos` over `[a, b]`.
fn cos_range(a: f64, b: f64) -> Interval {
    let (a, b) = (a.min(b), a.max(b));
    let mut r = Interval::new(a.cos(), b.cos()).sorted();
    // cos hits +1 at 2kπ and -1 at (2k+1)π.
    let k_lo = (a / PI).ceil() as i64;
    let k_hi = (b / PI).floor() as i64;
    for k in k_lo..=k_hi.min(k_lo + 2) {
        if k.rem_euclid(2) == 0 {
            r.hi = 1.0;
        } else {
            r.lo = -1.0;
        }
    }
    r
}

/// Physical inputs of the Hamiltonian. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    mass: TimeFunction,
    frequency: TimeFunction,
    magnetic_field: TimeFunction,
    charge: f64,
    coupling: f64,
    span: Span,
}

impl CoefficientSet {
    pub fn new(
        mass: TimeFunction,
        frequency: TimeFunction,
        magnetic_field: TimeFunction,
        charge: f64,
        coupling: f64,
    ) -> Result<Self, ParamError> {
        if !charge.is_finite() || !coupling.is_finite() {
            return Err(ParamError::InvalidParameter("charge and coupling must be finite".into()));
        }
        let span = mass
            .span()
            .intersect(&frequency.span())
            .and_then(|s| s.intersect(&magnetic_field.span()))
            .ok_or(ParamError::DisjointSpans)?;
        let mass = TimeFunction { span, ..mass };
        mass.check_positive()?;
        Ok(Self {
            mass,
            frequency: TimeFunction { span, ..frequency },
            magnetic_field: TimeFunction { span, ..magnetic_field },
            charge,
            coupling,
            span,
        })
    }

    /// All-constant coefficients, the static fixtures.
    pub fn constant(
        mass: f64,
        frequency: f64,
        field: f64,
        charge: f64,
        coupling: f64,
        span: Span,
    ) -> Result<Self, ParamError> {
        Self::new(
            TimeFunction::constant(mass, span)?,
            TimeFunction::constant(frequency, span)?,
            TimeFunction::constant(field, span)?,
            charge,
            coupling,
        )
    }

    pub fn span(&self) -> Span {
        self.span
    }

    pub fn mass_fn(&self) -> &TimeFunction {
        &self.mass
    }

    pub fn frequency_fn(&self) -> &TimeFunction {
        &self.frequency
    }

    pub fn field_fn(&self) -> &TimeFunction {
        &self.magnetic_field
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn mass(&self, t: f64) -> Result<f64, ParamError> {
        self.mass.evaluate(t)
    }

    pub fn frequency(&self, t: f64) -> Result<f64, ParamError> {
        self.frequency.evaluate(t)
    }

    pub fn field(&self, t: f64) -> Result<f64, ParamError> {
        self.magnetic_field.evaluate(t)
    }

    pub fn field_rate(&self, t: f64) -> Result<f64, ParamError> {
        self.magnetic_field.derivative(t)
    }

    /// `ω² + q²B²/(4m²)`: the squared frequency after the diamagnetic shift.
    pub fn shifted_frequency_sq(&self, t: f64) -> Result<f64, ParamError> {
        let m = self.mass(t)?;
        let w = self.frequency(t)?;
        let qb = self.charge * self.field(t)?;
        Ok(w * w + qb * qb / (4.0 * m * m))
    }

    /// Same coefficients with a different coupling constant.
    pub fn with_coupling(&self, coupling: f64) -> Self {
        Self { coupling, ..self.clone() }
    }
}

/// Field strengths implied by the gauge: `(B_z, E_phi)` with
/// `B_z = B(t)` and `E_phi = rho * B'(t) / 2`.
pub fn derived_fields(coeffs: &CoefficientSet, t: f64, rho: f64) -> Result<(f64, f64), ParamError> {
    if !(rho >= 0.0) {
        return Err(ParamError::NegativeRadius { rho });
    }
    let bz = coeffs.field(t)?;
    let e_phi = 0.5 * rho * coeffs.field_rate(t)?;
    Ok((bz, e_phi))
}

/// `A(t, x, y) = (B/2)(y, -x)`.
pub fn vector_potential(coeffs: &CoefficientSet, t: f64, x: f64, y: f64) -> Result<(f64, f64), ParamError> {
    let b = coeffs.field(t)?;
    Ok((0.5 * b * y, -0.5 * b * x))
}

/// z-component of `curl A` by central differences of [`vector_potential`].
/// For the literal gauge this equals `-B(t)`.
pub fn curl_of_gauge(coeffs: &CoefficientSet, t: f64, x: f64, y: f64, h: f64) -> Result<f64, ParamError> {
    let (_, ay_p) = vector_potential(coeffs, t, x + h, y)?;
    let (_, ay_m) = vector_potential(coeffs, t, x - h, y)?;
    let (ax_p, _) = vector_potential(coeffs, t, x, y + h)?;
    let (ax_m, _) = vector_potential(coeffs, t, x, y - h)?;
    Ok((ay_p - ay_m) / (2.0 * h) - (ax_p - ax_m) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(t0: f64, t1: f64) -> Span {
        Span::new(t0, t1).unwrap()
    }

    #[test]
    fn constant_family() {
        let f = TimeFunction::constant(3.0, span(0.0, 20.0)).unwrap();
        assert_eq!(f.evaluate(17.2).unwrap(), 3.0);
        assert_eq!(f.derivative(17.2).unwrap(), 0.0);
    }

    #[test]
    fn sinusoidal_zero_crossing() {
        let f = TimeFunction::new(
            Family::Sinusoidal { offset: 0.0, amplitude: 2.0, freq: 1.0, phase: 0.0 },
            span(0.0, 4.0),
        )
        .unwrap();
        assert!(f.evaluate(PI / 2.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn tabulated_reproduces_nodes() {
        let s = CubicSpline::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 5.0]).unwrap();
        let f = TimeFunction::new(Family::Tabulated(s), span(0.0, 2.0)).unwrap();
        assert_eq!(f.evaluate(1.0).unwrap(), 2.0);
        assert_eq!(f.evaluate(0.0).unwrap(), 1.0);
        assert_eq!(f.evaluate(2.0).unwrap(), 5.0);
    }

    #[test]
    fn tabulated_rejects_unsorted_times() {
        let err = CubicSpline::new(vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 5.0]).unwrap_err();
        assert_eq!(err, ParamError::NonIncreasingSamples { index: 2 });
    }

    #[test]
    fn spline_is_exact_for_linear_data() {
        let times: Vec<f64> = (0..6).map(|i| i as f64 * 0.7).collect();
        let values: Vec<f64> = times.iter().map(|t| 2.0 - 0.5 * t).collect();
        let s = CubicSpline::new(times, values).unwrap();
        for t in [0.1, 1.3, 2.2, 3.4] {
            assert!((s.value(t) - (2.0 - 0.5 * t)).abs() < 1e-14);
            assert!((s.derivative(t) + 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn out_of_span_is_an_error() {
        let f = TimeFunction::constant(1.0, span(0.0, 1.0)).unwrap();
        assert!(matches!(f.evaluate(1.5), Err(ParamError::OutOfDomain { .. })));
        assert!(matches!(f.derivative(-0.1), Err(ParamError::OutOfDomain { .. })));
    }

    #[test]
    fn overflowing_exponential_is_non_finite() {
        let f = TimeFunction::new(Family::Exponential { value: 1.0, rate: 1000.0 }, span(0.0, 1.0)).unwrap();
        assert!(matches!(f.evaluate(1.0), Err(ParamError::NonFinite { .. })));
    }

    #[test]
    fn rejects_nonpositive_mass() {
        let s = span(0.0, 1.0);
        let one = TimeFunction::constant(1.0, s).unwrap();
        let neg = TimeFunction::constant(-1.0, s).unwrap();
        let err = CoefficientSet::new(neg, one.clone(), one.clone(), 1.0, 0.0).unwrap_err();
        assert!(matches!(err, ParamError::NonPositiveMass { .. }));
        assert!(err.to_string().contains("nonpositive mass"));

        let bowl = TimeFunction::new(Family::Polynomial { coeffs: vec![1.0, -1.0, 1.0] }, s).unwrap();
        assert!(CoefficientSet::new(bowl, one.clone(), one.clone(), 1.0, 0.0).is_ok());
        // 4e6 (t - c)^2 - 1e-3 is negative only on a ~3e-5 wide window that
        // sits between two of the 1024 samples.
        let c = 512.5 / 1023.0;
        let dip = TimeFunction::new(Family::Polynomial { coeffs: vec![4e6 * c * c - 1e-3, -8e6 * c, 4e6] }, s).unwrap();
        assert!(CoefficientSet::new(dip, one.clone(), one, 1.0, 0.0).is_err());
    }

    #[test]
    fn linear_ramp_through_zero_is_rejected() {
        let s = span(0.0, 2.0);
        let one = TimeFunction::constant(1.0, s).unwrap();
        let ramp = TimeFunction::new(Family::Linear { value: 1.0, slope: -0.6 }, s).unwrap();
        assert!(CoefficientSet::new(ramp, one.clone(), one, 1.0, 0.0).is_err());
    }

    #[test]
    fn derived_field_examples() {
        let s = span(0.0, 10.0);
        let one = TimeFunction::constant(1.0, s).unwrap();
        let b_const =
            CoefficientSet::new(one.clone(), one.clone(), TimeFunction::constant(5.0, s).unwrap(), 1.0, 0.0).unwrap();
        assert_eq!(derived_fields(&b_const, 2.0, 2.0).unwrap(), (5.0, 0.0));

        let b_lin = CoefficientSet::new(
            one.clone(),
            one.clone(),
            TimeFunction::new(Family::Linear { value: 0.0, slope: 1.0 }, s).unwrap(),
            1.0,
            0.0,
        )
        .unwrap();
        assert_eq!(derived_fields(&b_lin, 3.0, 4.0).unwrap(), (3.0, 2.0));

        let b_cos = CoefficientSet::new(
            one.clone(),
            one,
            TimeFunction::new(Family::Sinusoidal { offset: 0.0, amplitude: 1.0, freq: 1.0, phase: 0.0 }, s).unwrap(),
            1.0,
            0.0,
        )
        .unwrap();
        let (bz, e) = derived_fields(&b_cos, 0.0, 1.0).unwrap();
        assert_eq!(bz, 1.0);
        assert_eq!(e, 0.0);
        assert!(derived_fields(&b_cos, 0.0, -1.0).is_err());
    }

    #[test]
    fn literal_gauge_curl_is_minus_b() {
        let c = CoefficientSet::constant(1.0, 1.0, 2.5, 1.0, 0.0, span(0.0, 1.0)).unwrap();
        let curl = curl_of_gauge(&c, 0.5, 0.3, -1.1, 1e-3).unwrap();
        assert!((curl + 2.5).abs() < 1e-12);
    }

    #[test]
    fn cos_range_covers_extrema() {
        let r = cos_range(-0.5, 0.5);
        assert_eq!(r.hi, 1.0);
        assert!((r.lo - 0.5f64.cos()).abs() < 1e-15);
        let r = cos_range(3.0, 3.5);
        assert_eq!(r.lo, -1.0);
    }
}
