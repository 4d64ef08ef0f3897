use std::f64::consts::PI;

use invharm_core::bessel::{bessel_j, bessel_j_series, bessel_jy_steed, bessel_n, wronskian_check};
use invharm_core::{BesselOrder, Complex64, EvalDomain};
use proptest::prelude::*;

fn order(nu: f64) -> BesselOrder {
    BesselOrder::new(nu).unwrap()
}

fn j_complex(nu: f64, z: Complex64) -> Complex64 {
    bessel_j(order(nu), z, &EvalDomain::default()).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Integral representation of N_n for integer n:
/// (1/pi) int_0^pi sin(x sin t - n t) dt - (1/pi) int_0^inf (e^{nt} + (-1)^n e^{-nt}) e^{-x sinh t} dt
fn n_by_quadrature(n: i32, x: f64) -> f64 {
    let first = simpson(|t| (x * t.sin() - n as f64 * t).sin(), 0.0, PI, 20_000) / PI;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let tail = |t: f64| ((n as f64 * t).exp() + sign * (-(n as f64) * t).exp()) * (-x * t.sinh()).exp();
    // e^{-x sinh t} is below 1e-40 long before t = 12 for x >= 0.3
    let second = simpson(tail, 0.0, 12.0, 200_000) / PI;
    first - second
}

#[test]
#[allow(clippy::excessive_precision)]
fn complex_half_integer_order_matches_frozen_reference() {
    let z = Complex64::new(3.7, 0.2);
    let v = j_complex(2.5, z);
    let reference = Complex64::new(0.46174332066815544178, -0.003205716463664865546);
    assert!((v - reference).norm() / reference.norm() < 1e-11, "{v}");

    // spherical closed form: J_{5/2}(z) = sqrt(2/(pi z)) ((3/z^2 - 1) sin z - 3 cos z / z)
    let closed = (2.0 / (PI * z)).sqrt() * ((3.0 / (z * z) - 1.0) * z.sin() - 3.0 * z.cos() / z);
    assert!((v - closed).norm() / closed.norm() < 1e-12);
}

#[test]
fn n0_at_one_matches_quadrature() {
    let q = n_by_quadrature(0, 1.0);
    assert!((q - 0.0882569642156769).abs() < 1e-12, "quadrature {q}");
    let v = bessel_n(order(0.0), 1.0).unwrap();
    assert!((v - q).abs() < 1e-10, "{v} vs {q}");
}

#[test]
fn integer_order_n_matches_quadrature() {
    for n in 0..3 {
        for &x in &[0.3, 1.0, 4.5, 12.0] {
            let q = n_by_quadrature(n, x);
            let v = bessel_n(order(n as f64), x).unwrap();
            assert!(((v - q) / q).abs() < 1e-10, "N_{n}({x}) = {v}, quadrature {q}");
        }
    }
}

#[test]
fn integer_order_n_continuous_at_method_switch() {
    for n in 0..6 {
        let below = bessel_n(order(n as f64), 2.0 * (1.0 - 1e-15)).unwrap();
        let above = bessel_n(order(n as f64), 2.0).unwrap();
        assert!(((below - above) / above).abs() < 1e-12, "n={n}: {below} vs {above}");
    }
}

#[test]
fn series_and_steed_agree_on_overlap() {
    let mut worst: f64 = 0.0;
    for &nu in &[0.0, 0.5, 1.3, 2.0, 4.7, 8.0] {
        for i in 0..=40 {
            let x = 10.0 + 0.5 * i as f64;
            let s = bessel_j_series(nu, Complex64::new(x, 0.0)).unwrap().re;
            let p = bessel_jy_steed(nu, x).unwrap().j;
            // compare against the local envelope so that zeros of J do not inflate the error
            let scale = (2.0 / (PI * x)).sqrt();
            worst = worst.max((s - p).abs() / scale);
        }
    }
    assert!(worst < 1e-10, "worst scaled disagreement {worst:e}");
}

#[test]
fn branch_switch_is_continuous() {
    let dom = EvalDomain::default();
    let r = dom.series_radius;
    for &nu in &[0.0, 1.5, 3.0] {
        let inside = bessel_j(order(nu), Complex64::new(r, 0.0), &dom).unwrap().re;
        let outside = bessel_j(order(nu), Complex64::new(r * (1.0 + 1e-14), 0.0), &dom).unwrap().re;
        assert!((inside - outside).abs() < 1e-11);
    }
}

#[test]
fn wronskian_on_grid_of_orders() {
    for &nu in &[0.0, 0.25, 1.0, 2.5, 3.0, 6.1] {
        for &x in &[0.2, 1.0, 5.0, 17.0, 29.0, 45.0] {
            let w = wronskian_check(order(nu), x).unwrap();
            let scale = 2.0 / (PI * x);
            assert!(w.abs() / scale < 1e-9, "nu={nu} x={x} w={w:e}");
        }
    }
}

proptest! {
    #[test]
    fn conjugate_symmetry_is_exact(nu in 0.0f64..6.0, r in 0.01f64..25.0, arg in 0.01f64..3.1) {
        let z = Complex64::from_polar(r, arg);
        let a = j_complex(nu, z.conj());
        let b = j_complex(nu, z).conj();
        prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
        prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    #[test]
    fn three_term_recurrence(nu in 1.0f64..6.0, r in 0.1f64..20.0, arg in -1.0f64..1.0) {
        let z = Complex64::from_polar(r, arg);
        let lhs = j_complex(nu - 1.0, z) + j_complex(nu + 1.0, z);
        let rhs = 2.0 * nu / z * j_complex(nu, z);
        let scale = j_complex(nu - 1.0, z).norm() + j_complex(nu + 1.0, z).norm();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale);
    }

    #[test]
    fn real_axis_gives_real_value(nu in 0.0f64..8.0, x in 0.01f64..60.0) {
        let v = j_complex(nu, Complex64::new(x, 0.0));
        prop_assert_eq!(v.im, 0.0);
    }
}
