//! Ascending power series of J_mu(z) for real order and complex argument,
//! summed in double-double.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use super::dd::{CDd, Dd};
use super::gamma::{gamma_real, ln_gamma};
use super::BesselError;

const MAX_TERMS: usize = 2000;
/// Unit roundoff of the double-double sum.
const DD_EPS: f64 = 1.0e-32;

/// A complex value `mant * 2^exp2`, used to carry `(z/2)^mu / Γ(mu+1)` past
/// the f64 exponent range.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scaled {
    pub mant: Complex64,
    pub exp2: i32,
}

impl Scaled {
    fn from_log(log: Complex64) -> Self {
        let exp2 = (log.re / LN_2).floor();
        let exp2 = exp2.clamp(i32::MIN as f64 / 2.0, i32::MAX as f64 / 2.0) as i32;
        let mant = (log - Complex64::new(exp2 as f64 * LN_2, 0.0)).exp();
        Self { mant, exp2 }
    }

    pub fn assemble(self) -> Result<Complex64, BesselError> {
        let half = self.exp2 / 2;
        let rest = self.exp2 - half;
        let v = self.mant * 2f64.powi(half) * 2f64.powi(rest);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(BesselError::Overflow)
        }
    }
}

/// `(z/2)^mu / Γ(mu + 1)`, principal branch.
fn prefactor(mu: f64, z: Complex64) -> Result<Scaled, BesselError> {
    let half = z * 0.5;
    let direct =
        if z.im == 0.0 && z.re > 0.0 { Complex64::new((0.5 * z.re).powf(mu), 0.0) } else { (half.ln() * mu).exp() };
    let g = if mu + 1.0 <= 170.0 { gamma_real(mu + 1.0).ok() } else { None };
    if let Some(g) = g {
        let v = direct / g;
        if v.re.is_finite() && v.im.is_finite() && (v.norm() > 1e-300 || v.norm() == 0.0) {
            return Ok(Scaled { mant: v, exp2: 0 });
        }
    }
    // Large order or extreme argument: stay in log space.
    let lg = if mu + 1.0 > 0.0 {
        Complex64::new(ln_gamma(mu + 1.0)?, 0.0)
    } else {
        // Γ(mu+1) < 0 is folded into the phase.
        let g = gamma_real(mu + 1.0)?;
        Complex64::new(g.abs().ln(), if g < 0.0 { std::f64::consts::PI } else { 0.0 })
    };
    Ok(Scaled::from_log(half.ln() * mu - lg))
}

/// J_mu(z) from the ascending series. `mu` may be negative but not a negative
/// integer. Returns the value and the estimated relative rounding error.
pub(crate) fn j_series(mu: f64, z: Complex64) -> Result<(Complex64, f64), BesselError> {
    if mu < 0.0 && mu == mu.floor() {
        return Err(BesselError::InvalidOrder { nu: mu });
    }
    if z == Complex64::new(0.0, 0.0) {
        return if mu == 0.0 {
            Ok((Complex64::new(1.0, 0.0), 0.0))
        } else if mu > 0.0 {
            Ok((Complex64::new(0.0, 0.0), 0.0))
        } else {
            Err(BesselError::Overflow)
        };
    }
    let w = CDd::neg_quarter_square(z);
    let w_abs = w.abs_hi();
    let mut term = CDd::ONE;
    let mut sum = CDd::ONE;
    let mut max_term = 1.0f64;
    let mut converged = false;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        let divisor = Dd::sum_of(mu, kf).scale(kf);
        term = term.mul(w).div_real(divisor);
        sum = sum.add(term);
        let t = term.abs_hi();
        max_term = max_term.max(t);
        // Past the peak the remaining tail is dominated by the current term.
        let decreasing = kf * (mu + kf + 1.0).abs() > 2.0 * w_abs;
        if decreasing && t <= DD_EPS * sum.abs_hi() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(BesselError::NoConvergence);
    }
    let s = sum.to_complex();
    let err = (DD_EPS * max_term * 4.0 / s.norm()).max(f64::EPSILON);
    let pref = prefactor(mu, z)?;
    let v = Scaled { mant: pref.mant * s, exp2: pref.exp2 }.assemble()?;
    Ok((v, err))
}

const EULER_GAMMA: Dd = Dd { hi: 0.5772156649015329, lo: -4.942915152430649e-18 };

/// N_n(x) for integer n >= 0 and 0 < x < 2 from the logarithmic series
///
/// `pi N_n = (x/2)^n sum_k [2 ln(x/2) - psi(k+1) - psi(n+k+1)] (-x^2/4)^k / (k! (n+k)!)
///           - (x/2)^-n sum_{k<n} (n-k-1)!/k! (x^2/4)^k`
///
/// summed in double-double.
pub(crate) fn n_integer_series(n: u32, x: f64) -> Result<f64, BesselError> {
    if !(x > 0.0 && x < 2.0) {
        return Err(BesselError::InvalidArgument { value: x });
    }
    if n > 170 {
        return Err(BesselError::Overflow);
    }
    let q = Dd::prod_of(x, x).scale(0.25);
    let two_log = Dd::from_f64(2.0 * (0.5 * x).ln());

    // harmonic numbers H_k and H_{n+k}
    let mut h_k = Dd::ZERO;
    let mut h_nk = Dd::ZERO;
    for m in 1..=n {
        h_nk = h_nk.add(Dd::ONE.div(Dd::from_f64(m as f64)));
    }
    let mut term = Dd::ONE;
    for m in 1..=n {
        term = term.div(Dd::from_f64(m as f64));
    }
    let weight = |hk: Dd, hnk: Dd| two_log.add(EULER_GAMMA.scale(2.0)).sub(hk).sub(hnk);
    let mut sum = term.mul(weight(h_k, h_nk));
    let mut converged = false;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term = term.mul(q).neg().div(Dd::from_f64(kf * (n as f64 + kf)));
        h_k = h_k.add(Dd::ONE.div(Dd::from_f64(kf)));
        h_nk = h_nk.add(Dd::ONE.div(Dd::from_f64(n as f64 + kf)));
        let t = term.mul(weight(h_k, h_nk));
        sum = sum.add(t);
        if t.hi.abs() <= DD_EPS * sum.hi.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(BesselError::NoConvergence);
    }

    let mut finite = Dd::ZERO;
    if n > 0 {
        let mut c = Dd::ONE;
        for m in 1..n {
            c = c.scale(m as f64);
        }
        finite = c;
        for k in 1..n {
            c = c.mul(q).div(Dd::from_f64(k as f64 * (n - k) as f64));
            finite = finite.add(c);
        }
    }
    let half = 0.5 * x;
    let v = (half.powi(n as i32) * sum.to_f64() - finite.to_f64() / half.powi(n as i32)) / std::f64::consts::PI;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(BesselError::Overflow)
    }
}
