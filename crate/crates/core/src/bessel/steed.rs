//! J_nu, Y_nu and their derivatives on the real axis for x >= 2 by Steed's
//! method: a continued fraction for J'/J, downward recurrence to a small
//! order, and the complex continued fraction for (J' + iY')/(J + iY).

use std::f64::consts::PI;

use super::BesselError;

const EPS: f64 = 1.0e-16;
const FPMIN: f64 = 1.0e-300;
const MAXIT: usize = 100_000;

/// Values `(J, Y, J', Y')` at order `nu >= 0` and argument `x >= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPair {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

pub fn bessel_jy_steed(nu: f64, x: f64) -> Result<BesselPair, BesselError> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(BesselError::InvalidOrder { nu });
    }
    if !(x >= 2.0 && x.is_finite()) {
        return Err(BesselError::InvalidArgument { value: x });
    }
    let nl = ((nu - x + 1.5).floor().max(0.0)) as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1 by modified Lentz: f = J'_nu / J_nu.
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut ok = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(BesselError::NoConvergence);
    }

    // Downward recurrence from nu to xmu, unnormalised.
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    // CF2: p + iq = (J' + iY') / (J + iY) at order xmu.
    let mut a = 0.25 - xmu2;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fct = a * xi / (p * p + q * q);
    let mut cr = br + q * fct;
    let mut ci = bi + p * fct;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    ok = false;
    for i in 2..MAXIT {
        a += 2.0 * (i - 1) as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fct = a / (cr * cr + ci * ci);
        cr = br + cr * fct;
        ci = bi - ci * fct;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(BesselError::NoConvergence);
    }

    let gam = (p - f) / q;
    let mut rjmu = (w / ((p - f) * gam + q)).sqrt();
    if rjl < 0.0 {
        rjmu = -rjmu;
    }
    let mut rymu = rjmu * gam;
    let rymup = rymu * (p + q / gam);
    let mut ry1 = xmu * xi * rymu - rymup;
    let scale = rjmu / rjl;
    let j = rjl1 * scale;
    let jp = rjp1 * scale;
    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    let y = rymu;
    let yp = nu * xi * rymu - ry1;
    Ok(BesselPair { j, y, jp, yp })
}
