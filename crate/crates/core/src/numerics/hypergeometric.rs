//! Gauss hypergeometric function `2F1(a, b; c; z)`.
//!
//! The power series is summed directly near the origin. Elsewhere the
//! argument is moved into the small disk with the Pfaff, `1 - z` or `1 / z`
//! connection formulas. The `1 - z` and `1 / z` formulas degenerate when
//! `c - a - b` (resp. `a - b`) is an integer; there the function is
//! recovered as the mean over a small circle in `b`, which is exact for
//! functions analytic in `b` and spectrally accurate with equispaced nodes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::gamma::{gamma_ratio, is_gamma_pole};
use crate::error::{Error, Result};

const MAX_TERMS: usize = 200_000;
const CIRCLE_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    Unit,
    Series,
    Terminating,
    Pfaff,
    OneMinus,
    Reciprocal,
    GaussSum,
    CircleMean,
}

/// A value together with the route taken and a condition estimate
/// `sum |terms| / |value|` (1 means no cancellation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1 {
    pub value: Complex64,
    pub condition: f64,
    pub route: Route,
}

fn near_nonpositive_integer(x: Complex64, tol: f64) -> Option<u64> {
    if x.im.abs() > tol || x.re > tol {
        return None;
    }
    let n = x.re.round();
    ((x.re - n).abs() <= tol).then_some((-n) as u64)
}

fn integer_offset(x: Complex64) -> f64 {
    Complex64::new(x.re - x.re.round(), x.im).norm()
}

fn check_c(c: Complex64) -> Result<()> {
    if is_gamma_pole(c) || near_nonpositive_integer(c, 1e-14).is_some() {
        return Err(Error::Pole {
            factor: "2F1 lower parameter c",
            at: c,
        });
    }
    Ok(())
}

/// Direct summation of the Gauss series; requires `|z| < 1` unless it terminates.
pub fn series(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Hyp2F1> {
    check_c(c)?;
    let one = Complex64::new(1.0, 0.0);
    let mut sum = one;
    let mut abs_sum = 1.0;
    let mut term = one;
    let zn = z.norm();
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        if term.norm() == 0.0 {
            return Ok(Hyp2F1 {
                value: sum,
                condition: abs_sum / sum.norm(),
                route: Route::Series,
            });
        }
        sum += term;
        let tn = term.norm();
        abs_sum += tn;
        let q = ratio.norm();
        if q < 1.0 && nf > 2.0 {
            let tail = tn * q / (1.0 - q.max(zn));
            if tail <= 1e-17 * sum.norm() || tail <= 1e-300 {
                return Ok(Hyp2F1 {
                    value: sum,
                    condition: abs_sum / sum.norm(),
                    route: Route::Series,
                });
            }
        }
        if !tn.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence {
        what: "2F1 series",
        estimate: sum,
        error_bound: term.norm(),
    })
}

/// Finite sum when `a = -k` for a nonnegative integer `k`; valid for any `z`.
pub fn terminating(k: u64, b: Complex64, c: Complex64, z: Complex64) -> Result<Hyp2F1> {
    check_c(c)?;
    let a = -(k as f64);
    let mut sum = Complex64::new(1.0, 0.0);
    let mut abs_sum = 1.0;
    let mut term = sum;
    for n in 0..k {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        abs_sum += term.norm();
    }
    Ok(Hyp2F1 {
        value: sum,
        condition: if sum.norm() > 0.0 {
            abs_sum / sum.norm()
        } else {
            f64::INFINITY
        },
        route: Route::Terminating,
    })
}

/// Pfaff transformation `(1-z)^{-a} 2F1(a, c-b; c; z/(z-1))`.
pub fn pfaff(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Hyp2F1> {
    let w = z / (z - 1.0);
    let inner = inner_eval(a, c - b, c, w)?;
    Ok(Hyp2F1 {
        value: (1.0 - z).powc(-a) * inner.value,
        condition: inner.condition,
        route: Route::Pfaff,
    })
}

/// Connection formula around `z = 1`. Fails with `IllConditioned` when
/// `c - a - b` is within `1e-6` of an integer.
pub fn one_minus(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Hyp2F1> {
    check_c(c)?;
    let s = c - a - b;
    if integer_offset(s) < 1e-6 {
        return Err(Error::IllConditioned(format!(
            "1-z connection formula with integer c-a-b = {s}"
        )));
    }
    let w = 1.0 - z;
    let ga = gamma_ratio(&[c, s], &[c - a, c - b])?;
    let gb = gamma_ratio(&[c, -s], &[a, b])?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    if ga != Complex64::new(0.0, 0.0) {
        let f1 = inner_eval(a, b, 1.0 - s, w)?;
        let v = ga * f1.value;
        value += v;
        abs += v.norm() * f1.condition;
    }
    if gb != Complex64::new(0.0, 0.0) {
        let f2 = inner_eval(c - a, c - b, s + 1.0, w)?;
        let v = gb * w.powc(s) * f2.value;
        value += v;
        abs += v.norm() * f2.condition;
    }
    Ok(Hyp2F1 {
        value,
        condition: abs / value.norm(),
        route: Route::OneMinus,
    })
}

/// Connection formula around `z = infinity` (the large-argument formula
/// with the factors `(-z)^{-a}` and `(-z)^{-b}`). Fails with
/// `IllConditioned` when `a - b` is within `1e-6` of an integer.
pub fn reciprocal(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Hyp2F1> {
    check_c(c)?;
    let d = a - b;
    if integer_offset(d) < 1e-6 {
        return Err(Error::IllConditioned(format!(
            "1/z connection formula with integer a-b = {d}"
        )));
    }
    let w = z.inv();
    let lnmz = (-z).ln();
    let mut value = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    let ga = gamma_ratio(&[c, -d], &[b, c - a])?;
    if ga != Complex64::new(0.0, 0.0) {
        let f = inner_eval(a, a - c + 1.0, d + 1.0, w)?;
        let v = ga * (-a * lnmz).exp() * f.value;
        value += v;
        abs += v.norm() * f.condition;
    }
    let gb = gamma_ratio(&[c, d], &[a, c - b])?;
    if gb != Complex64::new(0.0, 0.0) {
        let f = inner_eval(b, b - c + 1.0, 1.0 - d, w)?;
        let v = gb * (-b * lnmz).exp() * f.value;
        value += v;
        abs += v.norm() * f.condition;
    }
    Ok(Hyp2F1 {
        value,
        condition: abs / value.norm(),
        route: Route::Reciprocal,
    })
}

/// Gauss summation at `z = 1`.
pub fn gauss_sum(a: Complex64, b: Complex64, c: Complex64) -> Result<Hyp2F1> {
    check_c(c)?;
    let s = c - a - b;
    if s.re <= 0.0 {
        return Err(Error::OutOfRange {
            what: "Re(c - a - b) at z = 1",
            value: s.re,
        });
    }
    Ok(Hyp2F1 {
        value: gamma_ratio(&[c, s], &[c - a, c - b])?,
        condition: 1.0,
        route: Route::GaussSum,
    })
}

/// Mean of `f(b + delta e^{i theta})` over an equispaced circle.
fn circle_mean_in_b<F>(b: Complex64, delta: f64, f: F) -> Result<Hyp2F1>
where
    F: Fn(Complex64) -> Result<Hyp2F1>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    let mut worst: f64 = 0.0;
    for j in 0..CIRCLE_NODES {
        let th = 2.0 * PI * (j as f64 + 0.5) / CIRCLE_NODES as f64;
        let h = f(b + Complex64::from_polar(delta, th))?;
        acc += h.value;
        worst = worst.max(h.value.norm() * h.condition);
    }
    let value = acc / CIRCLE_NODES as f64;
    Ok(Hyp2F1 {
        value,
        condition: worst / value.norm(),
        route: Route::CircleMean,
    })
}

fn one_minus_robust(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Hyp2F1> {
    let scale = (1.0 - z).norm().ln().abs().max(1.0);
    let delta = (0.5 / scale).min(0.2);
    if integer_offset(c - a - b) < 0.5 * delta {
        circle_mean_in_b(b, delta, |bb| one_minus(a, bb, c, z))
    } else {
        one_minus(a, b, c, z)
    }
}

fn reciprocal_robust(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Hyp2F1> {
    let scale = z.norm().ln().max(1.0);
    let delta = (0.5 / scale).min(0.2);
    if integer_offset(a - b) < 0.5 * delta {
        circle_mean_in_b(b, delta, |bb| reciprocal(a, bb, c, z))
    } else {
        reciprocal(a, b, c, z)
    }
}

/// Evaluation for arguments that a transformation has already placed in
/// the region where the series converges geometrically.
fn inner_eval(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Hyp2F1> {
    if let Some(k) = near_nonpositive_integer(a, 1e-14) {
        return terminating(k, b, c, z);
    }
    if let Some(k) = near_nonpositive_integer(b, 1e-14) {
        return terminating(k, a, c, z);
    }
    series(a, b, c, z)
}

/// Full evaluation with route and condition information.
pub fn gauss_2f1_detailed(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Hyp2F1> {
    check_c(c)?;
    if z == Complex64::new(0.0, 0.0) {
        return Ok(Hyp2F1 {
            value: Complex64::new(1.0, 0.0),
            condition: 1.0,
            route: Route::Unit,
        });
    }
    if let Some(k) = near_nonpositive_integer(a, 1e-14) {
        return terminating(k, b, c, z);
    }
    if let Some(k) = near_nonpositive_integer(b, 1e-14) {
        return terminating(k, a, c, z);
    }
    if z.im == 0.0 {
        let x = z.re;
        if x == 1.0 {
            return gauss_sum(a, b, c);
        }
        if x > 1.0 {
            return Err(Error::OutOfRange {
                what: "real 2F1 argument (branch cut z > 1)",
                value: x,
            });
        }
        return if (-0.5..=0.9).contains(&x) {
            series(a, b, c, z)
        } else if x > 0.9 {
            one_minus_robust(a, b, c, z)
        } else if x >= -2.0 {
            pfaff(a, b, c, z)
        } else {
            reciprocal_robust(a, b, c, z)
        };
    }
    let r = z.norm();
    if r > 1.0 {
        return reciprocal_robust(a, b, c, z);
    }
    let rp = (z / (z - 1.0)).norm();
    let r1 = (1.0 - z).norm();
    if r <= 0.7 || (r <= rp && r <= r1) {
        series(a, b, c, z)
    } else if rp <= r1 {
        pfaff(a, b, c, z)
    } else {
        one_minus_robust(a, b, c, z)
    }
}

/// `2F1(a, b; c; z)` for real `z <= 1` or complex `z` off the cut `[1, inf)`.
pub fn gauss_2f1(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64> {
    gauss_2f1_detailed(a, b, c, z).map(|h| h.value)
}

/// Real-argument convenience wrapper.
pub fn gauss_2f1_real(a: Complex64, b: Complex64, c: Complex64, x: f64) -> Result<Complex64> {
    gauss_2f1(a, b, c, Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
    fn r(x: f64) -> Complex64 {
        c(x, 0.0)
    }

    #[test]
    fn unit_at_origin() {
        let v = gauss_2f1(c(1.3, 2.0), c(-0.4, 7.0), c(2.5, -1.0), r(0.0)).unwrap();
        assert_eq!(v, r(1.0));
    }

    #[test]
    fn binomial_identity() {
        let a = c(0.7, 0.3);
        let b = c(1.9, -0.2);
        for &x in &[-30.0, -5.0, -1.2, -0.3, 0.2, 0.8, 0.95] {
            let v = gauss_2f1(a, b, b, r(x)).unwrap();
            let want = (1.0 - r(x)).powc(-a);
            assert!((v - want).norm() < 1e-12 * want.norm(), "{x}: {v} vs {want}");
        }
    }

    #[test]
    fn log_identity() {
        let v = gauss_2f1(r(1.0), r(1.0), r(2.0), r(0.5)).unwrap();
        assert_relative_eq!(v.re, 2.0 * 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(v.re, 1.386294, epsilon = 1e-6);
        // -ln(1 - z)/z at z = -9 exercises the degenerate 1/z route (a = b)
        let v = gauss_2f1(r(1.0), r(1.0), r(2.0), r(-9.0)).unwrap();
        assert_relative_eq!(v.re, 10f64.ln() / 9.0, max_relative = 1e-12);
    }

    #[test]
    fn pfaff_and_reciprocal_agree() {
        let (a, b, cc, z) = (r(0.3), r(0.7), r(1.9), r(-5.0));
        let p = pfaff(a, b, cc, z).unwrap();
        let q = reciprocal(a, b, cc, z).unwrap();
        assert_eq!(p.route, Route::Pfaff);
        assert_eq!(q.route, Route::Reciprocal);
        assert!((p.value - q.value).norm() < 1e-10 * q.value.norm());
    }

    #[test]
    fn one_minus_near_unit() {
        // 2F1(1/2, 1/2; 3/2; x^2) = asin(x)/x
        let x: f64 = 0.99;
        let v = gauss_2f1(r(0.5), r(0.5), r(1.5), r(x * x)).unwrap();
        assert_relative_eq!(v.re, x.asin() / x, max_relative = 1e-13);
        // integer c - a - b: 2F1(1,1;2;z) near 1 via circle mean
        let v = gauss_2f1_detailed(r(1.0), r(1.0), r(2.0), r(0.97)).unwrap();
        assert_eq!(v.route, Route::CircleMean);
        assert_relative_eq!(v.value.re, -(0.03f64).ln() / 0.97, max_relative = 1e-12);
    }

    #[test]
    fn gauss_sum_and_terminating() {
        let v = gauss_2f1(r(0.5), r(0.25), r(2.0), r(1.0)).unwrap();
        let want = gamma_ratio(&[r(2.0), r(1.25)], &[r(1.5), r(1.75)]).unwrap();
        assert_relative_eq!(v.re, want.re, max_relative = 1e-14);
        // Legendre-like terminating polynomial: 2F1(-2, b; c; z)
        let (b, cc, z) = (c(1.5, 0.5), c(2.0, -1.0), r(-40.0));
        let want = 1.0 - 2.0 * b / cc * z + b * (b + 1.0) / (cc * (cc + 1.0)) * z * z;
        let v = gauss_2f1(r(-2.0), b, cc, z).unwrap();
        assert!((v - want).norm() < 1e-13 * want.norm());
    }

    #[test]
    fn complex_arguments() {
        // (1 - z)^{-a} for complex z inside and outside the disk
        let a = c(0.4, -0.6);
        let b = c(2.2, 0.1);
        for z in [c(0.3, 0.4), c(0.6, 0.7), c(-3.0, 2.0), c(0.9, -0.2)] {
            let v = gauss_2f1(a, b, b, z).unwrap();
            let want = (1.0 - z).powc(-a);
            assert!((v - want).norm() < 1e-12 * want.norm(), "{z}");
        }
    }

    #[test]
    fn c_pole_rejected() {
        assert!(matches!(
            gauss_2f1(r(1.0), r(2.0), r(-3.0), r(0.2)),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn large_negative_arguments() {
        // 2F1(a, a+1/2; 3/2; -x^2) = ((1+x^2)^{1/2-a} sin((1-2a) atan x)) / ((1-2a) x)
        let a = r(0.3);
        for &x in &[3.0f64, 40.0, 1e4] {
            let v = gauss_2f1(a, a + 0.5, r(1.5), r(-x * x)).unwrap();
            let s = 1.0 - 0.6;
            let want = (1.0 + x * x).powf(0.5 - 0.3) * (s * x.atan()).sin() / (s * x);
            assert_relative_eq!(v.re, want, max_relative = 1e-11);
        }
    }

    proptest! {
        #[test]
        fn symmetric_in_a_b(
            ar in -3.0f64..3.0, ai in -3.0f64..3.0,
            br in -3.0f64..3.0, bi in -3.0f64..3.0,
            x in -50.0f64..0.99,
        ) {
            let a = Complex64::new(ar, ai);
            let b = Complex64::new(br, bi);
            let cc = Complex64::new(1.7, 0.4);
            let u = gauss_2f1(a, b, cc, Complex64::new(x, 0.0)).unwrap();
            let v = gauss_2f1(b, a, cc, Complex64::new(x, 0.0)).unwrap();
            prop_assert!((u - v).norm() <= 1e-12 * u.norm().max(1.0), "{} vs {}", u, v);
        }
    }
}
