//! Minimal double-double arithmetic (about 32 significant digits), enough to
//! sum the ascending Bessel series without cancellation loss for |z| <= 30.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    /// Exact sum of two doubles.
    pub fn sum_of(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    /// Exact product of two doubles.
    pub fn prod_of(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn scale(self, s: f64) -> Dd {
        let (p, e) = two_prod(self.hi, s);
        let (hi, lo) = quick_two_sum(p, e + self.lo * s);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.scale(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.scale(q2));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from_f64(q3))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub const ONE: CDd = CDd { re: Dd::ONE, im: Dd::ZERO };

    pub fn add(self, o: CDd) -> CDd {
        CDd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    pub fn mul(self, o: CDd) -> CDd {
        CDd { re: self.re.mul(o.re).sub(self.im.mul(o.im)), im: self.re.mul(o.im).add(self.im.mul(o.re)) }
    }

    pub fn div_real(self, d: Dd) -> CDd {
        CDd { re: self.re.div(d), im: self.im.div(d) }
    }

    /// `-z^2 / 4`, exact in double-double for double inputs.
    pub fn neg_quarter_square(z: Complex64) -> CDd {
        let xx = Dd::prod_of(z.re, z.re);
        let yy = Dd::prod_of(z.im, z.im);
        let xy = Dd::prod_of(z.re, z.im);
        CDd { re: yy.sub(xx).scale(0.25), im: xy.scale(-0.5) }
    }

    /// Cheap modulus estimate from the leading parts.
    pub fn abs_hi(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_digits_lost_in_double() {
        // (1 + 2^-60) - 1 vanishes in f64 but survives in double-double.
        let tiny = 2f64.powi(-60);
        let a = Dd::sum_of(1.0, tiny);
        let d = a.sub(Dd::ONE);
        assert_eq!(d.to_f64(), tiny);
    }

    #[test]
    fn division_round_trips() {
        let a = Dd::sum_of(1.0, 1e-20);
        let b = Dd::from_f64(3.0);
        let q = a.div(b).mul(b).sub(a);
        assert!(q.to_f64().abs() < 1e-31);
    }
}
