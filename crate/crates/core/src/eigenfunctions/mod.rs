//! Spherical eigenfunctions of the radial Laplacian.
//!
//! `E°(lambda)` is the Eisenstein integral, `Phi_lambda` the Harish-Chandra
//! series solution, `Phi0_lambda` its hypergeometric closed form and
//! `Phi0_{-lambda_k}` the discrete-spectrum functions. All of them solve
//! `L f = (lambda^2 - rho^2) f` with
//! `L = d^2/dt^2 + (m1p coth t + m1m tanh t + 2 m2p coth 2t + 2 m2m tanh 2t) d/dt`.
//!
//! The closed forms hold when the radial Jacobian is of Jacobi type, which
//! is the case `m2m = 0`; other geometries get the series only.

pub mod bounds;
pub mod hc_series;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::contour::circle_mean;
use crate::numerics::diff::fd_derivative_c;
use crate::numerics::gamma::{log_gamma, pole_distance, rgamma};
use crate::numerics::hypergeometric::{gauss_2f1_detailed, terminating};
use crate::spaces::{poly_p_r, poly_q_r, SpaceGeometry};
use crate::transform::RadialFunction;

pub use hc_series::{
    gamma_coefficient_poles, gamma_coefficients, hc_series_phi, HcCoefficients, HC_DEFAULT_DELTA,
};

/// Pole proximity for the c-function factors.
pub const C_POLE_TOL: f64 = 1e-8;
/// Pole proximity for the Eisenstein prefactor.
pub const E_POLE_TOL: f64 = 1e-6;

/// Above this modulus the series is preferred away from the origin.
const LARGE_LAMBDA: f64 = 12.0;
/// Series is used only where `|lambda| t` exceeds this.
const HC_MIN_PHASE: f64 = 6.0;
const HC_TOL: f64 = 1e-16;
const HC_MAX_TERMS: usize = 400_000;
const HYP_CONDITION_LIMIT: f64 = 1e8;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Element of `C^W`: one complex value per open orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WVector {
    pub components: Vec<Complex64>,
}

impl WVector {
    pub fn new(components: Vec<Complex64>) -> Self {
        Self { components }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![cx(0.0, 0.0); n])
    }

    pub fn ones(n: usize) -> Self {
        Self::new(vec![cx(1.0, 0.0); n])
    }

    pub fn splat(n: usize, v: Complex64) -> Self {
        Self::new(vec![v; n])
    }

    /// `w`-th standard basis vector.
    pub fn basis(n: usize, w: usize) -> Self {
        let mut v = Self::zeros(n);
        v.components[w] = cx(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn get(&self, w: usize) -> Complex64 {
        self.components[w]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.components.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.components.iter().zip(&other.components).map(|(a, b)| a * b).collect())
    }

    /// Largest component modulus.
    pub fn norm(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self::new(self.components.iter().map(|&c| f(c)).collect())
    }
}

impl fmt::Display for WVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", c.re, c.im)?;
        }
        write!(f, "]")
    }
}

fn require_jacobi_form(g: &SpaceGeometry) -> Result<()> {
    if g.multiplicities.m2m > 0 {
        return Err(Error::Unsupported(format!(
            "closed-form eigenfunctions need m2m = 0 (got m2m = {}); only the Harish-Chandra series is available",
            g.multiplicities.m2m
        )));
    }
    Ok(())
}

fn check_eta(g: &SpaceGeometry, eta: &WVector) -> Result<()> {
    if eta.len() != g.orbits() {
        return Err(Error::OutOfRange {
            what: "boundary vector length (must equal the orbit count)",
            value: eta.len() as f64,
        });
    }
    Ok(())
}

/// `exp(log_scale) prod Gamma(num) / prod Gamma(den)` with pole bookkeeping:
/// more numerator than denominator poles near the point is a pole of the
/// product, equal counts a removable point (resolved by the caller).
enum GammaProduct {
    Value(Complex64),
    Pole(&'static str, Complex64),
    Removable,
}

fn gamma_product(log_scale: Complex64, num: &[(Complex64, &'static str)], den: &[Complex64], tol: f64) -> Result<GammaProduct> {
    let near: Vec<&(Complex64, &'static str)> = num.iter().filter(|(z, _)| pole_distance(*z) < tol).collect();
    let dp = den.iter().filter(|z| pole_distance(**z) < tol).count();
    if near.len() > dp {
        return Ok(GammaProduct::Pole(near[0].1, near[0].0));
    }
    if !near.is_empty() {
        return Ok(GammaProduct::Removable);
    }
    // log space keeps products like Gamma(i nu)^3 from underflowing
    let mut log = log_scale;
    let mut factor = cx(1.0, 0.0);
    for (z, _) in num {
        log += log_gamma(*z)?;
    }
    for z in den {
        if pole_distance(*z) < 1e-3 {
            factor *= rgamma(*z);
        } else {
            log -= log_gamma(*z)?;
        }
    }
    Ok(GammaProduct::Value(factor * log.exp()))
}

pub const REMOVABLE_RADIUS: f64 = 0.01;

fn c_terms(g: &SpaceGeometry, l: Complex64) -> Result<GammaProduct> {
    let rho = g.rho;
    let mu = g.mu();
    gamma_product(
        2.0 * l * std::f64::consts::LN_2,
        &[
            ((rho + l) / 2.0, "Gamma((rho+lambda)/2)"),
            (-l, "Gamma(-lambda)"),
            ((l - rho + mu) / 2.0, "Gamma((lambda-rho+mu)/2)"),
        ],
        &[(rho - l) / 2.0, l, (mu - rho - l) / 2.0],
        C_POLE_TOL,
    )
}

/// Harish-Chandra c-function
/// `2^{2 lambda} Gamma((rho+lambda)/2) Gamma(-lambda) Gamma((lambda-rho+mu)/2)
///  / [Gamma((rho-lambda)/2) Gamma(lambda) Gamma((mu-rho-lambda)/2)]`.
pub fn c_function(g: &SpaceGeometry, lambda: Complex64) -> Result<Complex64> {
    require_jacobi_form(g)?;
    match c_terms(g, lambda)? {
        GammaProduct::Value(v) => Ok(v),
        GammaProduct::Pole(factor, at) => Err(Error::Pole { factor, at }),
        GammaProduct::Removable => circle_mean(
            |z| match c_terms(g, z)? {
                GammaProduct::Value(v) => Ok(v),
                _ => Err(Error::Pole {
                    factor: "c-function (circle node)",
                    at: z,
                }),
            },
            lambda,
            REMOVABLE_RADIUS,
            16,
        ),
    }
}

fn prefactor_terms(g: &SpaceGeometry, l: Complex64) -> Result<GammaProduct> {
    let rho = g.rho;
    let mu = g.mu();
    gamma_product(
        (l - rho) * std::f64::consts::LN_2,
        &[
            ((rho + l) / 2.0, "Gamma((rho+lambda)/2)"),
            ((l - rho + mu) / 2.0, "Gamma((lambda-rho+m1p+m2p+1)/2)"),
        ],
        &[l, cx(mu / 2.0, 0.0)],
        E_POLE_TOL,
    )
}

/// Gamma prefactor of `E°(lambda)`, i.e. its value at `t = 0`.
pub fn eisenstein_prefactor(g: &SpaceGeometry, lambda: Complex64) -> Result<Complex64> {
    require_jacobi_form(g)?;
    match prefactor_terms(g, lambda)? {
        GammaProduct::Value(v) => Ok(v),
        GammaProduct::Pole(factor, at) => Err(Error::Pole { factor, at }),
        GammaProduct::Removable => circle_mean(
            |z| match prefactor_terms(g, z)? {
                GammaProduct::Value(v) => Ok(v),
                _ => Err(Error::Pole {
                    factor: "Eisenstein prefactor (circle node)",
                    at: z,
                }),
            },
            lambda,
            REMOVABLE_RADIUS,
            16,
        ),
    }
}

fn ln_2cosh(t: f64) -> f64 {
    t.abs() + (-2.0 * t.abs()).exp().ln_1p()
}

fn near_half_integer(lambda: Complex64, margin: f64) -> bool {
    let two = 2.0 * lambda;
    two.im.abs() < 2.0 * margin && (two.re - two.re.round()).abs() < 2.0 * margin && two.re.round() >= 1.0
}

/// `Phi0_lambda(t)` through its hypergeometric representation
/// `(2 cosh t)^{lambda-rho} 2F1((rho-lambda)/2, (mu-rho-lambda)/2; 1-lambda; cosh^{-2} t)`.
pub fn phi0_hypergeometric(g: &SpaceGeometry, lambda: Complex64, t: f64) -> Result<(Complex64, f64)> {
    require_jacobi_form(g)?;
    if !(t > 0.0) {
        return Err(Error::OutOfRange {
            what: "phi0 argument t (must be > 0)",
            value: t,
        });
    }
    let c = 1.0 - lambda;
    if pole_distance(c) < C_POLE_TOL {
        return Err(Error::Pole {
            factor: "2F1 lower parameter 1-lambda",
            at: lambda,
        });
    }
    let a = (g.rho - lambda) / 2.0;
    let b = (g.mu() - g.rho - lambda) / 2.0;
    let z = 1.0 / (t.cosh() * t.cosh());
    let h = gauss_2f1_detailed(a, b, c, cx(z, 0.0))?;
    Ok((((lambda - g.rho) * ln_2cosh(t)).exp() * h.value, h.condition))
}

fn hc_usable(lambda: Complex64, t: f64) -> bool {
    lambda.norm() > LARGE_LAMBDA && lambda.norm() * t >= HC_MIN_PHASE && !near_half_integer(lambda, 0.05)
}

/// `Phi0_lambda(t)`; the hypergeometric form, switching to the series for
/// large `|lambda|` where the closed form loses accuracy.
pub fn phi0(g: &SpaceGeometry, lambda: Complex64, t: f64) -> Result<Complex64> {
    require_jacobi_form(g)?;
    if hc_usable(lambda, t) {
        return HcCoefficients::new(g, lambda).sum(t, HC_TOL, HC_MAX_TERMS);
    }
    phi0_hypergeometric(g, lambda, t).map(|v| v.0)
}

/// Discrete-spectrum function `Phi0_{-lambda_k}(t)`: a terminating series
/// of degree `k` in `cosh^{-2} t` times `(2 cosh t)^{-lambda_k - rho}`.
pub fn phi0_discrete(g: &SpaceGeometry, k: usize, t: f64) -> Result<f64> {
    let poles = g.pole_set();
    let lk = *poles.lambdas.get(k).ok_or(Error::OutOfRange {
        what: "pole-set index k",
        value: k as f64,
    })?;
    let z = 1.0 / (t.cosh() * t.cosh());
    let f = terminating(k as u64, cx((g.rho + lk) / 2.0, 0.0), cx(1.0 + lk, 0.0), cx(z, 0.0))?;
    Ok((-(lk + g.rho) * ln_2cosh(t)).exp() * f.value.re)
}

/// `E°(lambda)(t)` without the boundary vector.
pub fn eisenstein_scalar(g: &SpaceGeometry, lambda: Complex64, t: f64) -> Result<Complex64> {
    SphericalEvaluator::new(g, lambda)?.eisenstein(t)
}

/// Components `eta_w E°(lambda)(t)`.
pub fn eisenstein(g: &SpaceGeometry, lambda: Complex64, eta: &WVector, t: f64) -> Result<WVector> {
    check_eta(g, eta)?;
    let e = eisenstein_scalar(g, lambda, t)?;
    Ok(eta.scale(e))
}

/// Evaluator for a fixed spectral parameter; caches the Gamma factors and
/// the series coefficients of `Phi_{+-lambda}` across `t`.
#[derive(Debug)]
pub struct SphericalEvaluator {
    g: SpaceGeometry,
    lambda: Complex64,
    prefactor: Result<Complex64>,
    c: Option<Complex64>,
    hc: Option<(HcCoefficients, HcCoefficients)>,
}

impl SphericalEvaluator {
    pub fn new(g: &SpaceGeometry, lambda: Complex64) -> Result<Self> {
        require_jacobi_form(g)?;
        let prefactor = eisenstein_prefactor(g, lambda);
        let use_hc = lambda.norm() > LARGE_LAMBDA && !near_half_integer(lambda, 0.05) && !near_half_integer(-lambda, 0.05);
        let c = if use_hc { c_function(g, lambda).ok() } else { None };
        let hc = if use_hc && c.is_some() {
            Some((HcCoefficients::new(g, lambda), HcCoefficients::new(g, -lambda)))
        } else {
            None
        };
        Ok(Self {
            g: *g,
            lambda,
            prefactor,
            c,
            hc,
        })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    fn by_series(&self, t: f64) -> Option<Result<Complex64>> {
        let (p, m) = self.hc.as_ref()?;
        if self.lambda.norm() * t < HC_MIN_PHASE {
            return None;
        }
        let c = self.c?;
        Some((|| Ok(p.sum(t, HC_TOL, HC_MAX_TERMS)? + c * m.sum(t, HC_TOL, HC_MAX_TERMS)?))())
    }

    /// `E°(lambda)(t)` for `t >= 0`.
    pub fn eisenstein(&self, t: f64) -> Result<Complex64> {
        let pre = match &self.prefactor {
            Ok(p) => *p,
            Err(e) => return Err(e.clone()),
        };
        if t < 0.0 {
            return Err(Error::OutOfRange {
                what: "Eisenstein argument t (must be >= 0)",
                value: t,
            });
        }
        if t == 0.0 {
            return Ok(pre);
        }
        if let Some(v) = self.by_series(t) {
            return v;
        }
        let rho = self.g.rho;
        let l = self.lambda;
        let s = t.sinh();
        let h = gauss_2f1_detailed((rho + l) / 2.0, (rho - l) / 2.0, cx(self.g.mu() / 2.0, 0.0), cx(-s * s, 0.0))?;
        Ok(pre * h.value)
    }

    /// `Phi_lambda(t) = Phi0_lambda(t)`.
    pub fn phi(&self, t: f64) -> Result<Complex64> {
        if let Some((p, _)) = self.hc.as_ref() {
            if self.lambda.norm() * t >= HC_MIN_PHASE {
                return p.sum(t, HC_TOL, HC_MAX_TERMS);
            }
        }
        let (v, cond) = phi0_hypergeometric(&self.g, self.lambda, t)?;
        if cond > HYP_CONDITION_LIMIT && t >= HC_DEFAULT_DELTA && !near_half_integer(self.lambda, 0.05) {
            return HcCoefficients::new(&self.g, self.lambda).sum(t, HC_TOL, HC_MAX_TERMS);
        }
        Ok(v)
    }
}

/// Jacobi function `phi^{(alpha, beta)}_{-i lambda}(t)
/// = 2F1((rho_J+lambda)/2, (rho_J-lambda)/2; alpha+1; -sinh^2 t)`, `rho_J = alpha + beta + 1`.
pub fn jacobi_function(alpha: f64, beta: f64, lambda: Complex64, t: f64) -> Result<Complex64> {
    if alpha <= -1.0 && (alpha - alpha.round()).abs() < 1e-12 {
        return Err(Error::Pole {
            factor: "Jacobi parameter alpha (alpha + 1 nonpositive integer)",
            at: cx(alpha, 0.0),
        });
    }
    let rj = alpha + beta + 1.0;
    let s = t.sinh();
    let h = gauss_2f1_detailed((rj + lambda) / 2.0, (rj - lambda) / 2.0, cx(alpha + 1.0, 0.0), cx(-s * s, 0.0))?;
    Ok(h.value)
}

/// Jacobi parameters `(alpha, beta)` of a geometry.
pub fn jacobi_parameters(g: &SpaceGeometry) -> (f64, f64) {
    let m = g.multiplicities;
    let alpha = (m.m1p + m.m2p + 1) as f64 / 2.0 - 1.0;
    let beta = (m.m1m + m.m2p + 2 * m.m2m + 1) as f64 / 2.0 - 1.0;
    (alpha, beta)
}

/// Default finite-difference step for the radial Laplacian.
pub const LAPLACIAN_STEP: f64 = 1e-3;

/// `f''(t) + A(t) f'(t)` on orbit `w`, with analytic derivatives when the
/// function carries them and five-point stencils otherwise.
pub fn radial_laplacian_apply(g: &SpaceGeometry, f: &RadialFunction, w: usize, t: f64, h: f64) -> Result<Complex64> {
    let (d1, d2) = if f.analytic_order() >= 2 {
        (f.derivative(w, t, 1)?, f.derivative(w, t, 2)?)
    } else {
        if !(t - 2.0 * h > 0.0) {
            return Err(Error::OutOfRange {
                what: "t too close to 0 for the difference stencil",
                value: t,
            });
        }
        (
            fd_derivative_c(|x| f.eval(w, x), t, 1, h),
            fd_derivative_c(|x| f.eval(w, x), t, 2, h),
        )
    };
    Ok(d2 + g.drift(t) * d1)
}

/// `p_R(lambda) E°(lambda)(t)`, holomorphic on `Re lambda > -R`; at the
/// cancelled poles the value is recovered from a circle mean.
pub fn regularized_eisenstein(g: &SpaceGeometry, lambda: Complex64, t: f64, big_r: f64) -> Result<Complex64> {
    let p = poly_p_r(g, big_r);
    let near_root = p.roots.iter().any(|r| (lambda - r).norm() < REMOVABLE_RADIUS);
    let direct = |z: Complex64| -> Result<Complex64> { Ok(p.eval(z) * eisenstein_scalar(g, z, t)?) };
    if !near_root {
        return direct(lambda);
    }
    circle_mean(direct, lambda, 5.0 * REMOVABLE_RADIUS, 24)
}

/// `q_R(lambda) Phi_lambda(t)`, with circle means at the zeros of `q_R`.
pub fn regularized_phi(g: &SpaceGeometry, lambda: Complex64, t: f64, big_r: f64) -> Result<Complex64> {
    let q = poly_q_r(big_r);
    let near_root = q.roots.iter().any(|r| (lambda - r).norm() < REMOVABLE_RADIUS);
    let direct = |z: Complex64| -> Result<Complex64> {
        let v = if t >= HC_DEFAULT_DELTA && !near_half_integer(z, 1e-6) {
            HcCoefficients::new(g, z).sum(t, HC_TOL, HC_MAX_TERMS)?
        } else {
            phi0(g, z, t)?
        };
        Ok(q.eval(z) * v)
    };
    if !near_root {
        return direct(lambda);
    }
    circle_mean(direct, lambda, 5.0 * REMOVABLE_RADIUS, 24)
}
