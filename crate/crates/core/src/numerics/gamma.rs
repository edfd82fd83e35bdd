//! Complex log-gamma via the Stirling series with upward recurrence.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k (2k - 1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// True when `z` is exactly one of 0, -1, -2, ...
pub fn is_gamma_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

/// Distance from `z` to the nearest pole of Gamma, or +inf for Re z > 0.5.
pub fn pole_distance(z: Complex64) -> f64 {
    if z.re > 0.5 {
        return f64::INFINITY;
    }
    let n = z.re.round().min(0.0);
    (z - n).norm()
}

fn stirling(z: Complex64) -> Complex64 {
    let zi = z.inv();
    let zi2 = zi * zi;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut p = zi;
    for c in STIRLING {
        acc += p * c;
        p *= zi2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + acc
}

/// Principal branch of `log Gamma(z)`, continuous off the negative real axis,
/// so that `log_gamma(z + 1) = log_gamma(z) + log z` holds exactly.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if is_gamma_pole(z) {
        return Err(Error::Pole {
            factor: "Gamma",
            at: z,
        });
    }
    let shift = if z.im.abs() >= 15.0 {
        (-z.re).ceil().max(0.0)
    } else {
        (15.0 - z.re).ceil().max(0.0)
    } as usize;
    let mut w = z;
    let mut corr = Complex64::new(0.0, 0.0);
    for _ in 0..shift {
        corr += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - corr)
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re > 0.0 && z.re <= 170.0 && z.re.fract() == 0.0 {
        let mut f = 1.0;
        for k in 2..(z.re as u32) {
            f *= k as f64;
        }
        return Ok(Complex64::new(f, 0.0));
    }
    Ok(log_gamma(z)?.exp())
}

/// `1 / Gamma(z)`, entire, zero at the poles of Gamma.
pub fn rgamma(z: Complex64) -> Complex64 {
    match log_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

/// `prod Gamma(num) / prod Gamma(den)`; poles in the denominator give 0.
pub fn gamma_ratio(num: &[Complex64], den: &[Complex64]) -> Result<Complex64> {
    if den.iter().any(|&d| is_gamma_pole(d)) {
        for &n in num {
            if is_gamma_pole(n) {
                return Err(Error::Pole {
                    factor: "Gamma ratio (0/0)",
                    at: n,
                });
            }
        }
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &n in num {
        acc += log_gamma(n)?;
    }
    for &d in den {
        acc -= log_gamma(d)?;
    }
    Ok(acc.exp())
}

/// `Gamma(-z) / Gamma(z) = -Gamma(1 - z) / Gamma(1 + z)`; finite at z = 0 (value -1).
pub fn reflected_ratio(z: Complex64) -> Result<Complex64> {
    Ok(-gamma_ratio(&[1.0 - z], &[1.0 + z])?)
}

/// `sin(pi z)` with exact zeros at integers.
pub fn sin_pi(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re.fract() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (z * PI).sin()
}
