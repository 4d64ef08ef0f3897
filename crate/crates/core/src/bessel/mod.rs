//! Bessel functions of real order: J_nu for complex argument, N_nu (Y_nu) on
//! the positive real axis, and the real Gamma function behind the series.
//!
//! Evaluation strategy:
//! * `|z| <= series_radius` (any complex z): ascending series in
//!   double-double, so cancellation between large terms costs nothing.
//! * real `x > series_radius`: Steed's continued-fraction method.
//!
//! N_nu for non-integer nu comes from `(J_nu cos nu*pi - J_{-nu}) / sin nu*pi`.
//! Integer orders use the logarithmic series below x = 2 and Steed above it;
//! the limit nu -> n by symmetric Richardson extrapolation in the order offset
//! remains as a fallback where the log series overflows.

mod dd;
mod gamma;
mod series;
mod steed;

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

pub use gamma::{cos_pi, gamma_real, ln_gamma, sin_pi};
pub use steed::{bessel_jy_steed, BesselPair};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BesselError {
    #[error("Gamma pole at x = {x}")]
    Pole { x: f64 },
    #[error("result overflows f64")]
    Overflow,
    #[error("|z| = {modulus} exceeds the series radius {radius}; shrink the grid or time window")]
    DomainTooLarge { modulus: f64, radius: f64 },
    #[error("argument must be positive, got {x}")]
    NonPositiveArgument { x: f64 },
    #[error("invalid order {nu}")]
    InvalidOrder { nu: f64 },
    #[error("invalid argument {value}")]
    InvalidArgument { value: f64 },
    #[error("invalid evaluation domain: {0}")]
    InvalidDomain(String),
    #[error("estimated relative error {estimate:e} exceeds target {target:e}")]
    PrecisionLoss { estimate: f64, target: f64 },
    #[error("iteration did not converge")]
    NoConvergence,
}

/// Non-negative, finite Bessel order.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self, BesselError> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(Self(nu))
        } else {
            Err(BesselError::InvalidOrder { nu })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn integer(self) -> Option<i64> {
        integer_order(self.0)
    }
}

/// Where the series branch is trusted and how accurate it must be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalDomain {
    pub series_radius: f64,
    pub target_accuracy: f64,
}

impl EvalDomain {
    pub fn new(series_radius: f64, target_accuracy: f64) -> Result<Self, BesselError> {
        if !(series_radius > 0.0 && series_radius.is_finite()) {
            return Err(BesselError::InvalidDomain(format!("series radius {series_radius}")));
        }
        if !(target_accuracy > 0.0 && target_accuracy < 1.0) {
            return Err(BesselError::InvalidDomain(format!("target accuracy {target_accuracy}")));
        }
        Ok(Self { series_radius, target_accuracy })
    }
}

impl Default for EvalDomain {
    fn default() -> Self {
        Self { series_radius: 30.0, target_accuracy: 1e-12 }
    }
}

/// Offset used when approaching an integer order for N_n.
pub const INTEGER_ORDER_OFFSET: f64 = 1e-6;

fn integer_order(mu: f64) -> Option<i64> {
    (mu == mu.round() && mu.abs() < 1e15).then_some(mu as i64)
}

fn parity(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// J_nu(z). Complex z is limited to `|z| <= dom.series_radius`; real positive
/// z of any size is accepted.
pub fn bessel_j(nu: BesselOrder, z: Complex64, dom: &EvalDomain) -> Result<Complex64, BesselError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(BesselError::InvalidArgument { value: z.norm() });
    }
    let modulus = z.norm();
    if modulus > dom.series_radius {
        if z.im == 0.0 && z.re > 0.0 {
            return Ok(Complex64::new(bessel_jy_steed(nu.0, z.re)?.j, 0.0));
        }
        return Err(BesselError::DomainTooLarge { modulus, radius: dom.series_radius });
    }
    series_checked(nu.0, z, dom)
}

/// Series-only J_mu(z) for any real order that is not a negative integer.
/// Exposed so the two real-axis branches can be compared directly.
pub fn bessel_j_series(mu: f64, z: Complex64) -> Result<Complex64, BesselError> {
    series::j_series(mu, z).map(|(v, _)| v)
}

fn series_checked(mu: f64, z: Complex64, dom: &EvalDomain) -> Result<Complex64, BesselError> {
    let (v, err) = series::j_series(mu, z)?;
    if err > dom.target_accuracy {
        return Err(BesselError::PrecisionLoss { estimate: err, target: dom.target_accuracy });
    }
    Ok(v)
}

/// N_nu(x) (Bessel function of the second kind) for real x > 0.
pub fn bessel_n(nu: BesselOrder, x: f64) -> Result<f64, BesselError> {
    bessel_n_with(nu, x, &EvalDomain::default())
}

pub fn bessel_n_with(nu: BesselOrder, x: f64, dom: &EvalDomain) -> Result<f64, BesselError> {
    if !(x > 0.0) {
        return Err(BesselError::NonPositiveArgument { x });
    }
    if x > dom.series_radius {
        return Ok(bessel_jy_steed(nu.0, x)?.y);
    }
    match integer_order(nu.0) {
        None => n_reflection(nu.0, x),
        Some(n) if x >= 2.0 => Ok(bessel_jy_steed(n as f64, x)?.y),
        Some(n) => {
            if let Ok(v) = series::n_integer_series(n as u32, x) {
                return Ok(v);
            }
            let n = n as f64;
            let e = INTEGER_ORDER_OFFSET;
            let sym =
                |d: f64| -> Result<f64, BesselError> { Ok(0.5 * (n_reflection(n + d, x)? + n_reflection(n - d, x)?)) };
            // The symmetric mean is even in the offset; one Richardson step
            // removes the O(e^2) term.
            Ok((4.0 * sym(e)? - sym(2.0 * e)?) / 3.0)
        }
    }
}

/// `(J_mu cos(mu pi) - J_{-mu}) / sin(mu pi)` for non-integer real mu.
fn n_reflection(mu: f64, x: f64) -> Result<f64, BesselError> {
    let z = Complex64::new(x, 0.0);
    let jp = series::j_series(mu, z)?.0.re;
    let jm = series::j_series(-mu, z)?.0.re;
    let v = (jp * cos_pi(mu) - jm) / sin_pi(mu);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(BesselError::Overflow)
    }
}

/// J_mu(x) for any real order and x > 0.
fn j_signed(mu: f64, x: f64, dom: &EvalDomain) -> Result<f64, BesselError> {
    if mu >= 0.0 {
        return Ok(bessel_j(BesselOrder(mu), Complex64::new(x, 0.0), dom)?.re);
    }
    if let Some(n) = integer_order(mu) {
        return Ok(parity(n) * j_signed(-mu, x, dom)?);
    }
    if x <= dom.series_radius {
        return Ok(series_checked(mu, Complex64::new(x, 0.0), dom)?.re);
    }
    let nu = -mu;
    let pair = bessel_jy_steed(nu, x)?;
    Ok(cos_pi(nu) * pair.j - sin_pi(nu) * pair.y)
}

/// N_mu(x) for any real order and x > 0.
fn n_signed(mu: f64, x: f64, dom: &EvalDomain) -> Result<f64, BesselError> {
    if mu >= 0.0 {
        return bessel_n_with(BesselOrder(mu), x, dom);
    }
    if let Some(n) = integer_order(mu) {
        return Ok(parity(n) * n_signed(-mu, x, dom)?);
    }
    let nu = -mu;
    if x <= dom.series_radius {
        return n_reflection(mu, x);
    }
    let pair = bessel_jy_steed(nu, x)?;
    Ok(sin_pi(nu) * pair.j + cos_pi(nu) * pair.y)
}

/// `J_nu N_nu' - J_nu' N_nu - 2/(pi x)`, with derivatives from
/// `f' = f_{nu-1} - (nu/x) f_nu`. Zero up to rounding for every nu.
pub fn wronskian_check(nu: BesselOrder, x: f64) -> Result<f64, BesselError> {
    if !(x > 0.0) {
        return Err(BesselError::NonPositiveArgument { x });
    }
    let dom = EvalDomain::default();
    let v = nu.0;
    let j = j_signed(v, x, &dom)?;
    let n = n_signed(v, x, &dom)?;
    let jd = j_signed(v - 1.0, x, &dom)? - v / x * j;
    let nd = n_signed(v - 1.0, x, &dom)? - v / x * n;
    Ok(j * nd - jd * n - 2.0 / (PI * x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    fn j_real(nu: f64, x: f64) -> f64 {
        bessel_j(order(nu), Complex64::new(x, 0.0), &EvalDomain::default()).unwrap().re
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn j0_at_origin() {
        let v = bessel_j(order(0.0), Complex64::new(0.0, 0.0), &EvalDomain::default()).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
        let v = bessel_j(order(2.5), Complex64::new(0.0, 0.0), &EvalDomain::default()).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn half_integer_closed_forms() {
        let x = 1.0f64;
        let j = j_real(0.5, x);
        let want = (2.0 / (PI * x)).sqrt() * x.sin();
        assert!(rel(j, want) < 1e-14);
        assert!((j - 0.671_396_707_1).abs() < 1e-10);

        let n = bessel_n(order(0.5), x).unwrap();
        let want = -(2.0 / (PI * x)).sqrt() * x.cos();
        assert!(rel(n, want) < 1e-13);
        assert!((n + 0.431_098_868_0).abs() < 1e-10);
    }

    #[test]
    fn half_integer_closed_form_large_argument() {
        // Steed branch beyond the series radius.
        for x in [31.0f64, 45.5, 80.0] {
            let j = j_real(0.5, x);
            let want = (2.0 / (PI * x)).sqrt() * x.sin();
            assert!((j - want).abs() < 1e-14, "x={x}");
            let n = bessel_n(order(0.5), x).unwrap();
            let want = -(2.0 / (PI * x)).sqrt() * x.cos();
            assert!((n - want).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn n3_diverges_at_small_argument() {
        assert!(bessel_n(order(3.0), 0.01).unwrap() < -1e6);
    }

    #[test]
    fn nonpositive_argument_rejected() {
        assert!(matches!(bessel_n(order(1.0), 0.0), Err(BesselError::NonPositiveArgument { .. })));
        assert!(matches!(wronskian_check(order(1.0), -1.0), Err(BesselError::NonPositiveArgument { .. })));
    }

    #[test]
    fn complex_argument_outside_radius() {
        let err = bessel_j(order(1.0), Complex64::new(25.0, 20.0), &EvalDomain::default()).unwrap_err();
        assert!(matches!(err, BesselError::DomainTooLarge { .. }));
    }

    #[test]
    fn negative_order_rejected() {
        assert!(BesselOrder::new(-0.5).is_err());
        assert!(BesselOrder::new(f64::NAN).is_err());
    }

    #[test]
    fn wronskian_examples() {
        assert!(wronskian_check(order(0.0), 1.0).unwrap().abs() < 1e-10);
        assert!(wronskian_check(order(2.5), 10.0).unwrap().abs() < 1e-10);
        assert!(wronskian_check(order(7.0), 0.3).unwrap().abs() < 1e-9);
    }

    #[test]
    fn large_order_uses_scaled_prefactor() {
        // J_200(10) ~ 1e-190 is representable even though Γ(201) is not.
        let v = j_real(200.0, 10.0);
        assert!(v > 0.0 && v < 1e-180);
        // Compare with one downward step of the three-term recurrence.
        let a = j_real(199.0, 10.0);
        let b = j_real(201.0, 10.0);
        assert!(rel(a + b, 2.0 * 200.0 / 10.0 * v) < 1e-12);
    }
}
