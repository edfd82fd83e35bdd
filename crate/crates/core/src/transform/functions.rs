//! Radial (space-side) and spectral (lambda-side) function containers.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use crate::eigenfunctions::{phi0_discrete, WVector};
use crate::error::{Error, Result};
use crate::numerics::diff::fd_derivative_c;
use crate::spaces::SpaceGeometry;

pub type RadialEval = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
/// `(t, order) -> d^order f / dt^order`.
pub type RadialDerivative = Arc<dyn Fn(f64, usize) -> Complex64 + Send + Sync>;
pub type SpectralEval = Arc<dyn Fn(Complex64) -> Result<WVector> + Send + Sync>;

/// Finite-difference step used when no analytic derivative is attached.
pub const FD_STEP: f64 = 1e-3;

/// A K-invariant function given by one radial profile per open orbit.
#[derive(Clone)]
pub struct RadialFunction {
    components: Vec<RadialEval>,
    derivatives: Option<(Vec<RadialDerivative>, usize)>,
    /// `f_w(t) = 0` outside `[start, bound]`.
    support: Option<(f64, f64)>,
    /// Schwartz class `r` the function is known to belong to.
    pub decay_class: Option<f64>,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("orbits", &self.components.len())
            .field("analytic_order", &self.analytic_order())
            .field("support", &self.support)
            .field("decay_class", &self.decay_class)
            .finish()
    }
}

impl RadialFunction {
    pub fn new(components: Vec<RadialEval>) -> Self {
        Self {
            components,
            derivatives: None,
            support: None,
            decay_class: None,
        }
    }

    /// The same profile on every orbit.
    pub fn uniform<F>(orbits: usize, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        let f: RadialEval = Arc::new(f);
        Self::new(vec![f; orbits])
    }

    /// Attaches analytic derivatives up to `max_order`.
    pub fn with_derivatives(mut self, derivatives: Vec<RadialDerivative>, max_order: usize) -> Self {
        assert_eq!(derivatives.len(), self.components.len());
        self.derivatives = Some((derivatives, max_order));
        self
    }

    pub fn with_support(mut self, start: f64, bound: f64) -> Self {
        self.support = Some((start.max(0.0), bound));
        self
    }

    pub fn with_decay_class(mut self, r: f64) -> Self {
        self.decay_class = Some(r);
        self
    }

    pub fn orbits(&self) -> usize {
        self.components.len()
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn support_bound(&self) -> Option<f64> {
        self.support.map(|s| s.1)
    }

    pub fn analytic_order(&self) -> usize {
        self.derivatives.as_ref().map_or(0, |d| d.1)
    }

    pub fn eval(&self, w: usize, t: f64) -> Complex64 {
        if let Some((a, b)) = self.support {
            if t < a || t > b {
                return Complex64::new(0.0, 0.0);
            }
        }
        (self.components[w])(t)
    }

    pub fn eval_all(&self, t: f64) -> WVector {
        WVector::new((0..self.orbits()).map(|w| self.eval(w, t)).collect())
    }

    /// `d^order f_w / dt^order` at `t`: analytic when attached, otherwise a
    /// central difference with step `FD_STEP`.
    pub fn derivative(&self, w: usize, t: f64, order: usize) -> Result<Complex64> {
        if order == 0 {
            return Ok(self.eval(w, t));
        }
        if let Some((d, max)) = &self.derivatives {
            if order <= *max {
                if let Some((a, b)) = self.support {
                    if t < a || t > b {
                        return Ok(Complex64::new(0.0, 0.0));
                    }
                }
                return Ok((d[w])(t, order));
            }
        }
        let h = FD_STEP * (1.0 + order as f64 / 2.0);
        if t - (order as f64 / 2.0 + 1.0) * h <= 0.0 {
            return Err(Error::OutOfRange {
                what: "t too close to 0 for the difference stencil",
                value: t,
            });
        }
        Ok(fd_derivative_c(|x| self.eval(w, x), t, order, h))
    }

    /// Pointwise linear combination `a f + b g`.
    pub fn combine(a: Complex64, f: &RadialFunction, b: Complex64, g: &RadialFunction) -> RadialFunction {
        assert_eq!(f.orbits(), g.orbits());
        let comps = (0..f.orbits())
            .map(|w| {
                let (f, g) = (f.clone(), g.clone());
                Arc::new(move |t: f64| a * f.eval(w, t) + b * g.eval(w, t)) as RadialEval
            })
            .collect();
        let mut out = RadialFunction::new(comps);
        if let (Some(sf), Some(sg)) = (f.support, g.support) {
            out.support = Some((sf.0.min(sg.0), sf.1.max(sg.1)));
        }
        out.decay_class = match (f.decay_class, g.decay_class) {
            (Some(x), Some(y)) => Some(x.min(y)),
            _ => None,
        };
        let order = f.analytic_order().min(g.analytic_order());
        if order > 0 {
            let ds = (0..f.orbits())
                .map(|w| {
                    let (f, g) = (f.clone(), g.clone());
                    Arc::new(move |t: f64, k: usize| {
                        a * f.derivative(w, t, k).unwrap_or_default() + b * g.derivative(w, t, k).unwrap_or_default()
                    }) as RadialDerivative
                })
                .collect();
            out = out.with_derivatives(ds, order);
        }
        out
    }

    pub fn scaled(&self, s: Complex64) -> RadialFunction {
        let zero = RadialFunction::uniform(self.orbits(), |_| Complex64::new(0.0, 0.0));
        let mut out = RadialFunction::combine(s, self, Complex64::new(0.0, 0.0), &zero);
        out.support = self.support;
        out.decay_class = self.decay_class;
        out
    }

    /// Smooth bump `exp(1 - 1/(1 - u^2))`, `u = (t - t0)/w`, on every orbit,
    /// with analytic derivatives through order `BUMP_ORDER`.
    pub fn bump(orbits: usize, t0: f64, w: f64) -> RadialFunction {
        Self::bump_weighted(vec![1.0; orbits], t0, w)
    }

    /// Bump with a per-orbit amplitude.
    pub fn bump_weighted(amplitudes: Vec<f64>, t0: f64, w: f64) -> RadialFunction {
        let comps = amplitudes
            .iter()
            .map(|&a| Arc::new(move |t: f64| Complex64::new(a * bump_jet(t, t0, w, 0)[0], 0.0)) as RadialEval)
            .collect();
        let ds = amplitudes
            .iter()
            .map(|&a| {
                Arc::new(move |t: f64, k: usize| {
                    let jet = bump_jet(t, t0, w, k);
                    Complex64::new(a * jet[k] * factorial(k), 0.0)
                }) as RadialDerivative
            })
            .collect();
        RadialFunction::new(comps)
            .with_derivatives(ds, BUMP_ORDER)
            .with_support(t0 - w, t0 + w)
            .with_decay_class(f64::MIN_POSITIVE)
    }

    /// `(cosh t)^{-delta - rho}` on every orbit.
    pub fn cosh_power(orbits: usize, exponent: f64) -> RadialFunction {
        RadialFunction::uniform(orbits, move |t: f64| {
            Complex64::new((-exponent * (t.abs() + (-2.0 * t.abs()).exp().ln_1p() - std::f64::consts::LN_2)).exp(), 0.0)
        })
    }

    /// Discrete-spectrum function `Phi0_{-lambda_k}` with per-orbit weights.
    pub fn discrete(g: &SpaceGeometry, k: usize, weights: Vec<Complex64>) -> Result<RadialFunction> {
        phi0_discrete(g, k, 1.0)?;
        let g = *g;
        let comps = weights
            .iter()
            .map(|&c| Arc::new(move |t: f64| c * phi0_discrete(&g, k, t).unwrap_or(0.0)) as RadialEval)
            .collect();
        let lk = g.pole_set().lambdas[k];
        // in C^r exactly when gamma_r < lambda_k, i.e. r > 2 rho / (rho + lambda_k)
        Ok(RadialFunction::new(comps).with_decay_class(2.0 * g.rho / (g.rho + lk) + 1e-9))
    }
}

/// Highest analytic derivative order carried by the bump.
pub const BUMP_ORDER: usize = 8;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Taylor coefficients through `order` of the bump at `t`.
fn bump_jet(t: f64, t0: f64, w: f64, order: usize) -> Vec<f64> {
    let n = order + 1;
    let u0 = (t - t0) / w;
    if u0.abs() >= 1.0 {
        return vec![0.0; n];
    }
    // s = 1 - u^2 with u = u0 + x / w
    let mut s = vec![0.0; n];
    s[0] = 1.0 - u0 * u0;
    if n > 1 {
        s[1] = -2.0 * u0 / w;
    }
    if n > 2 {
        s[2] = -1.0 / (w * w);
    }
    // r = 1/s
    let mut r = vec![0.0; n];
    r[0] = 1.0 / s[0];
    for k in 1..n {
        let acc: f64 = (1..=k.min(2)).map(|j| s[j] * r[k - j]).sum();
        r[k] = -acc * r[0];
    }
    // e = exp(1 - r)
    let gcoef: Vec<f64> = r.iter().enumerate().map(|(k, &x)| if k == 0 { 1.0 - x } else { -x }).collect();
    let mut e = vec![0.0; n];
    e[0] = gcoef[0].exp();
    for k in 1..n {
        let acc: f64 = (1..=k).map(|j| j as f64 * gcoef[j] * e[k - j]).sum();
        e[k] = acc / k as f64;
    }
    e
}

/// A pole of a spectral function with its residue, when known.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPole {
    pub location: Complex64,
    pub residue: Option<WVector>,
}

/// A `C^W`-valued function of `lambda` with declared simple poles.
#[derive(Clone)]
pub struct SpectralFunction {
    eval: SpectralEval,
    orbits: usize,
    pub poles: Vec<SpectralPole>,
    /// `(left, right)` bounds of `Re lambda` where the function is defined.
    pub strip: Option<(f64, f64)>,
}

impl fmt::Debug for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralFunction")
            .field("orbits", &self.orbits)
            .field("poles", &self.poles)
            .field("strip", &self.strip)
            .finish()
    }
}

impl SpectralFunction {
    pub fn new<F>(orbits: usize, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<WVector> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            orbits,
            poles: Vec::new(),
            strip: None,
        }
    }

    /// The same scalar function on every orbit.
    pub fn scalar<F>(orbits: usize, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self::new(orbits, move |l| Ok(WVector::splat(orbits, f(l)?)))
    }

    pub fn with_pole(mut self, location: Complex64, residue: Option<WVector>) -> Self {
        self.poles.push(SpectralPole { location, residue });
        self
    }

    pub fn with_strip(mut self, left: f64, right: f64) -> Self {
        self.strip = Some((left, right));
        self
    }

    pub fn orbits(&self) -> usize {
        self.orbits
    }

    pub fn eval(&self, lambda: Complex64) -> Result<WVector> {
        (self.eval)(lambda)
    }

    /// Component `w` only.
    pub fn eval_component(&self, w: usize, lambda: Complex64) -> Result<Complex64> {
        Ok(self.eval(lambda)?.get(w))
    }
}
