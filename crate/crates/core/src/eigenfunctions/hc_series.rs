//! Harish-Chandra expansion `Phi_lambda(t) = e^{(lambda - rho) t} sum Gamma_m(lambda) e^{-m t}`.
//!
//! Substituting the expansion into the radial eigenvalue equation and
//! expanding the drift in powers of `q = e^{-2t}` gives
//!
//! ```text
//! m (m - 2 lambda) Gamma_m = sum_{j >= 1} b_j (rho + m - 2j - lambda) Gamma_{m-2j}
//! ```
//!
//! where `b_j` is the coefficient of `q^j` in the drift minus `2 rho`. Only
//! even `m` occur. Writing `g_n = Gamma_{2n}` and `h_i = (rho - lambda + 2i) g_i`,
//! the right side is `sum_{i<n} b_{n-i} h_i`; since `b_j` depends only on
//! `j mod 4` it is maintained with four running sums, so extending the
//! sequence costs O(1) per coefficient.

use num_complex::Complex64;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::spaces::SpaceGeometry;

/// Distance below which `lambda` counts as sitting on a coefficient pole.
pub const HC_POLE_TOL: f64 = 1e-8;

#[derive(Debug)]
struct HcState {
    /// `g[n] = Gamma_{2n}`.
    g: Vec<Complex64>,
    acc: [Complex64; 4],
}

/// Lazily extended, append-only coefficient cache for a fixed `lambda`.
#[derive(Debug)]
pub struct HcCoefficients {
    lambda: Complex64,
    rho: f64,
    b: [f64; 4],
    state: RwLock<HcState>,
}

impl HcCoefficients {
    pub fn new(g: &SpaceGeometry, lambda: Complex64) -> Self {
        let mut b = [0.0; 4];
        for (j, slot) in b.iter_mut().enumerate() {
            // index by j mod 4 with j = 4 for the zero class
            *slot = g.drift_coefficient(if j == 0 { 4 } else { j });
        }
        let h0 = Complex64::new(g.rho, 0.0) - lambda;
        Self {
            lambda,
            rho: g.rho,
            b,
            state: RwLock::new(HcState {
                g: vec![Complex64::new(1.0, 0.0)],
                acc: [h0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            }),
        }
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// Ensures `Gamma_{2n}` is available for `n < count`.
    fn ensure(&self, count: usize) -> Result<()> {
        if self.state.read().expect("coefficient cache poisoned").g.len() >= count {
            return Ok(());
        }
        let mut st = self.state.write().expect("coefficient cache poisoned");
        while st.g.len() < count {
            let n = st.g.len();
            let nf = n as f64;
            let den = 4.0 * nf * (nf - self.lambda);
            if den.norm() < 4.0 * nf * HC_POLE_TOL {
                return Err(Error::Pole {
                    factor: "Harish-Chandra coefficient Gamma_m",
                    at: self.lambda,
                });
            }
            let mut rhs = Complex64::new(0.0, 0.0);
            for r in 0..4 {
                rhs += self.b[(n + 4 - r) % 4] * st.acc[r];
            }
            let gn = rhs / den;
            let hn = (self.rho - self.lambda + 2.0 * nf) * gn;
            st.acc[n % 4] += hn;
            st.g.push(gn);
        }
        Ok(())
    }

    /// `Gamma_m` for `m < count`, odd entries zero.
    pub fn gamma_m(&self, count: usize) -> Result<Vec<Complex64>> {
        self.ensure(count.div_ceil(2))?;
        let st = self.state.read().expect("coefficient cache poisoned");
        Ok((0..count)
            .map(|m| {
                if m % 2 == 0 {
                    st.g[m / 2]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect())
    }

    /// Sum of the series at `t > 0`, stopping once the geometric tail bound
    /// falls below `tol` relative to the partial sum.
    pub fn sum(&self, t: f64, tol: f64, max_terms: usize) -> Result<Complex64> {
        if !(t > 0.0) {
            return Err(Error::OutOfRange {
                what: "Harish-Chandra series argument t",
                value: t,
            });
        }
        let q = (-2.0 * t).exp();
        let mut chunk = ((20.0 / t) as usize).clamp(16, max_terms);
        let mut s = Complex64::new(0.0, 0.0);
        let mut pw = 1.0;
        let mut n = 0;
        let mut quiet = 0;
        loop {
            self.ensure(chunk)?;
            let st = self.state.read().expect("coefficient cache poisoned");
            while n < chunk {
                let term = st.g[n] * pw;
                s += term;
                pw *= q;
                n += 1;
                if term.norm() <= tol * (1.0 - q) * s.norm() {
                    quiet += 1;
                    if quiet >= 4 {
                        return Ok(s * ((self.lambda - self.rho) * t).exp());
                    }
                } else {
                    quiet = 0;
                }
                if pw == 0.0 {
                    return Ok(s * ((self.lambda - self.rho) * t).exp());
                }
            }
            drop(st);
            if chunk >= max_terms {
                return Err(Error::NonConvergence {
                    what: "Harish-Chandra series (t too small; use the hypergeometric phi0 path)",
                    estimate: s * ((self.lambda - self.rho) * t).exp(),
                    error_bound: f64::NAN,
                });
            }
            chunk = (2 * chunk).min(max_terms);
        }
    }
}

fn check_half_integer_poles(lambda: Complex64, m_max: usize) -> Result<()> {
    if lambda.im.abs() < HC_POLE_TOL {
        let two = 2.0 * lambda.re;
        let k = two.round();
        if k >= 1.0 && k <= m_max as f64 && (two - k).abs() < 2.0 * HC_POLE_TOL {
            return Err(Error::Pole {
                factor: "Harish-Chandra coefficient Gamma_m (half-integer lambda)",
                at: lambda,
            });
        }
    }
    Ok(())
}

/// First `count` coefficients `Gamma_0, ..., Gamma_{count-1}`.
pub fn gamma_coefficients(g: &SpaceGeometry, lambda: Complex64, count: usize) -> Result<Vec<Complex64>> {
    check_half_integer_poles(lambda, count.saturating_sub(1))?;
    HcCoefficients::new(g, lambda).gamma_m(count)
}

/// Candidate pole locations of `Gamma_m` read off the recursion denominators.
pub fn gamma_coefficient_poles(m: usize) -> Vec<f64> {
    (1..=m / 2).map(|n| n as f64).collect()
}

/// Default lower limit on `t` for the public series evaluator.
pub const HC_DEFAULT_DELTA: f64 = 0.5;

/// `Phi_lambda(t)` from the Harish-Chandra series, for `t >= 0.5`.
pub fn hc_series_phi(g: &SpaceGeometry, lambda: Complex64, t: f64, tol: f64) -> Result<Complex64> {
    if t < HC_DEFAULT_DELTA {
        return Err(Error::OutOfRange {
            what: "t below the series threshold 0.5 (use the hypergeometric phi0 path)",
            value: t,
        });
    }
    let max_terms = 200_000;
    check_half_integer_poles(lambda, 2 * max_terms)?;
    HcCoefficients::new(g, lambda).sum(t, tol, max_terms)
}
