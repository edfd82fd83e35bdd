//! Spherical Fourier transform, wave packets and inversion.
//!
//! Conventions used throughout:
//!
//! * `F f(lambda)_w = int_0^inf f_w(t) E°(-lambda)(t) J(t) dt`, one
//!   component per orbit.
//! * A spectral line integral `int_{x0 + iR} h(lambda) dlambda` carries the
//!   line element `dlambda = i dnu`, oriented upward.
//! * The wave packet is `J phi(t) = 2 int_{iR} Phi_lambda(t) phi(lambda) dlambda`
//!   and the shifted packet `I_r` is the same integral over `Re lambda = -gamma_r`.
//!   Their difference is `4 pi i sum_{L_r} Phi0_{-lambda_k} Res_{-lambda_k} phi`.
//! * Inversion: `f = kappa [ int_R E°(i nu) F f(i nu) dnu - 4 pi sum_L Phi0_{-lambda_k} Res_k ]`,
//!   i.e. `f = -i kappa [ J F f - 4 pi i sum_L ... ]`.

pub mod functions;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::eigenfunctions::{phi0_discrete, SphericalEvaluator, WVector};
use crate::error::{Error, Result};
use crate::numerics::contour::{contour_residue, ContourSpec};
use crate::numerics::quadrature::{gauss_legendre, integrate_halfline, CompositeRule, QuadratureSpec};
use crate::parallel::par_map;
use crate::spaces::SpaceGeometry;

pub use functions::{RadialEval, RadialFunction, SpectralFunction, SpectralPole, BUMP_ORDER};

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Residue of a transform at `-lambda_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueData {
    pub k: usize,
    pub location: Complex64,
    pub value: WVector,
}

/// Closed-form Plancherel constant for the `dnu` form of the inversion
/// formula, `2^{2 rho - m2p} / (4 pi)`; the calibrated value is checked
/// against it.
pub fn kappa_analytic(g: &SpaceGeometry) -> f64 {
    2f64.powf(2.0 * g.rho - g.multiplicities.m2p as f64) / (4.0 * PI)
}

/// Gauss-Legendre order of every fixed composite rule in this module.
pub const RULE_ORDER: usize = 20;

/// Panel width resolving `E°(-lambda)(t)` in `t`.
pub fn forward_panel(lambda: Complex64) -> f64 {
    (8.0 / (1.0 + lambda.norm())).min(0.1)
}

/// Radial data pre-weighted by quadrature weights and the Jacobian on a
/// fixed node set: `f_w(t_i) omega_i J(t_i)`.
#[derive(Debug, Clone)]
pub struct SampledRadial {
    pub nodes: Vec<f64>,
    pub weighted: Vec<WVector>,
}

impl SampledRadial {
    pub fn new(g: &SpaceGeometry, f: &RadialFunction, rule: &CompositeRule) -> Self {
        let values = rule.nodes.iter().map(|&t| f.eval_all(t)).collect();
        Self::from_values(g, rule, values)
    }

    pub fn from_values(g: &SpaceGeometry, rule: &CompositeRule, values: Vec<WVector>) -> Self {
        let weighted = values
            .into_iter()
            .zip(rule.nodes.iter().zip(&rule.weights))
            .map(|(v, (&t, &w))| v.scale(cx(w * g.jacobian(t), 0.0)))
            .collect();
        Self {
            nodes: rule.nodes.clone(),
            weighted,
        }
    }

    /// Quadrature sum for `F f(lambda)`.
    pub fn forward(&self, g: &SpaceGeometry, lambda: Complex64) -> Result<WVector> {
        let ev = SphericalEvaluator::new(g, -lambda)?;
        let n = self.weighted.first().map_or(0, |v| v.len());
        let mut acc = WVector::zeros(n);
        for (&t, fw) in self.nodes.iter().zip(&self.weighted) {
            let e = ev.eisenstein(t)?;
            for (a, b) in acc.components.iter_mut().zip(&fw.components) {
                *a += b * e;
            }
        }
        Ok(acc)
    }
}

/// `F f(lambda)` for compactly supported `f` on a composite rule whose
/// panel is `panel_scale` times the smaller of [`forward_panel`] and a
/// twentieth of the support.
pub fn forward_compact(g: &SpaceGeometry, f: &RadialFunction, lambda: Complex64, panel_scale: f64, order: usize) -> Result<WVector> {
    let (a, b) = f.support().ok_or_else(|| Error::Divergent("compact-support transform of a function without support bound".into()))?;
    let panel = forward_panel(lambda).min((b - a) / 20.0);
    let rule = CompositeRule::new(a, b, panel_scale * panel, order);
    SampledRadial::new(g, f, &rule).forward(g, lambda)
}

/// Spherical transform `F f(lambda)`.
///
/// Compactly supported functions are integrated on a fixed rule for any
/// `lambda`; otherwise the decay class `r` must make the integral converge,
/// which requires `|Re lambda| < gamma_r`.
pub fn forward(g: &SpaceGeometry, f: &RadialFunction, lambda: Complex64, spec: &QuadratureSpec) -> Result<WVector> {
    if f.support().is_some() {
        return forward_compact(g, f, lambda, 1.0, RULE_ORDER);
    }
    let r = f
        .decay_class
        .ok_or_else(|| Error::Divergent("function has neither a support bound nor a decay class".into()))?;
    let rate = (2.0 / r - 1.0) * g.rho - lambda.re.abs();
    if !(rate > 0.0) {
        return Err(Error::Divergent(format!(
            "Re lambda = {} lies outside the convergence strip |Re lambda| < gamma_r = {} of decay class r = {r}",
            lambda.re,
            (2.0 / r - 1.0) * g.rho
        )));
    }
    let ev = SphericalEvaluator::new(g, -lambda)?;
    let mut out = Vec::with_capacity(f.orbits());
    for w in 0..f.orbits() {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let v = integrate_halfline(
            |t| {
                if t <= 0.0 {
                    return cx(0.0, 0.0);
                }
                match ev.eisenstein(t) {
                    Ok(e) => f.eval(w, t) * e * g.log_jacobian(t).exp(),
                    Err(err) => {
                        failure.borrow_mut().get_or_insert(err);
                        cx(0.0, 0.0)
                    }
                }
            },
            rate,
            spec,
        )?;
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }
        out.push(v);
    }
    Ok(WVector::new(out))
}

/// `lambda -> F f(lambda)` as a spectral function with the poles at `-lambda_k`.
pub fn transform_function(g: &SpaceGeometry, f: &RadialFunction, spec: &QuadratureSpec) -> SpectralFunction {
    let (gg, ff, ss) = (*g, f.clone(), *spec);
    let mut phi = SpectralFunction::new(f.orbits(), move |l| forward(&gg, &ff, l, &ss));
    for lk in g.pole_set().lambdas {
        phi = phi.with_pole(cx(-lk, 0.0), None);
    }
    phi
}

/// Residue of `lambda -> F f(lambda)` at `-lambda_k`, from a contour integral.
pub fn residue_at(g: &SpaceGeometry, f: &RadialFunction, k: usize, c: &ContourSpec) -> Result<ResidueData> {
    let lambdas = g.pole_set().lambdas;
    let lk = *lambdas.get(k).ok_or(Error::OutOfRange {
        what: "pole-set index k",
        value: k as f64,
    })?;
    if f.support().is_none() {
        return Err(Error::Unsupported(
            "contour residues need a compactly supported function; use the projection form".into(),
        ));
    }
    let loc = cx(-lk, 0.0);
    // the circle must not reach the neighbouring poles
    for (j, l) in lambdas.iter().enumerate() {
        if j != k && (loc + l).norm() <= c.radius {
            return Err(Error::Pole {
                factor: "neighbouring transform pole inside the residue contour",
                at: cx(-l, 0.0),
            });
        }
    }
    let spec = ContourSpec { center: loc, ..*c };
    let mut value = Vec::with_capacity(f.orbits());
    for w in 0..f.orbits() {
        value.push(contour_residue(|l| Ok(forward_compact(g, f, l, 1.0, RULE_ORDER)?.get(w)), &spec)?);
    }
    Ok(ResidueData {
        k,
        location: loc,
        value: WVector::new(value),
    })
}

/// `Res_{mu = lambda_k} E°(mu)(t) / Phi0_{-lambda_k}(t)`, independent of `t`.
pub fn eisenstein_residue_ratio(g: &SpaceGeometry, k: usize) -> Result<f64> {
    let lk = *g.pole_set().lambdas.get(k).ok_or(Error::OutOfRange {
        what: "pole-set index k",
        value: k as f64,
    })?;
    let t = 1.0;
    let res = contour_residue(
        |mu| crate::eigenfunctions::eisenstein_scalar(g, mu, t),
        &ContourSpec::new(cx(lk, 0.0), 0.25),
    )?;
    Ok(res.re / phi0_discrete(g, k, t)?)
}

/// Integrand weight `J(t)` times a decaying profile, as a closure error sink.
fn halfline_product<F>(g: &SpaceGeometry, f: F, rate: f64, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    integrate_halfline(|t| if t <= 0.0 { cx(0.0, 0.0) } else { f(t) * g.log_jacobian(t).exp() }, rate, spec)
}

/// `||Phi0_{-lambda_k}||^2 = int Phi0^2 J dt`.
pub fn discrete_norm_sq(g: &SpaceGeometry, k: usize, spec: &QuadratureSpec) -> Result<f64> {
    let lk = *g.pole_set().lambdas.get(k).ok_or(Error::OutOfRange {
        what: "pole-set index k",
        value: k as f64,
    })?;
    let v = halfline_product(g, |t| cx(phi0_discrete(g, k, t).unwrap_or(0.0).powi(2), 0.0), 2.0 * lk, spec)?;
    Ok(v.re)
}

/// Per-orbit inner products `<f_w, Phi0_{-lambda_k}> = int f_w Phi0 J dt`.
pub fn discrete_inner_products(g: &SpaceGeometry, f: &RadialFunction, k: usize, spec: &QuadratureSpec) -> Result<WVector> {
    let lk = *g.pole_set().lambdas.get(k).ok_or(Error::OutOfRange {
        what: "pole-set index k",
        value: k as f64,
    })?;
    let mut out = Vec::with_capacity(f.orbits());
    for w in 0..f.orbits() {
        let v = if let Some((a, b)) = f.support() {
            let rule = CompositeRule::new(a, b, 0.05, RULE_ORDER);
            rule.integrate(|t| f.eval(w, t) * phi0_discrete(g, k, t).unwrap_or(0.0) * g.jacobian(t))
        } else {
            let spec = spec.with_truncation(spec.truncation.min(80.0 / lk.max(0.5)));
            halfline_product(g, |t| f.eval(w, t) * phi0_discrete(g, k, t).unwrap_or(0.0), lk, &spec)?
        };
        out.push(v);
    }
    Ok(WVector::new(out))
}

/// Residue at `-lambda_k` in projection form,
/// `Res_k = -(Res E° / Phi0_{-lambda_k}) <f, Phi0_{-lambda_k}>`, valid for any
/// square-integrable `f`.
pub fn residue_projection(g: &SpaceGeometry, f: &RadialFunction, k: usize, spec: &QuadratureSpec) -> Result<ResidueData> {
    let ratio = eisenstein_residue_ratio(g, k)?;
    let ip = discrete_inner_products(g, f, k, spec)?;
    Ok(ResidueData {
        k,
        location: cx(-g.pole_set().lambdas[k], 0.0),
        value: ip.scale(cx(-ratio, 0.0)),
    })
}

/// Projection coefficients `<f_w, Phi0_k> / ||Phi0_k||^2`, one vector per `k`.
pub fn discrete_coefficients(g: &SpaceGeometry, f: &RadialFunction, spec: &QuadratureSpec) -> Result<Vec<WVector>> {
    (0..g.pole_set().len())
        .map(|k| {
            let n = discrete_norm_sq(g, k, spec)?;
            Ok(discrete_inner_products(g, f, k, spec)?.scale(cx(1.0 / n, 0.0)))
        })
        .collect()
}

/// `sum_k c_{k,w} Phi0_{-lambda_k}` as a radial function.
pub fn discrete_combination(g: &SpaceGeometry, coefficients: &[(usize, WVector)], orbits: usize) -> RadialFunction {
    let gg = *g;
    let coeffs: Arc<Vec<(usize, WVector)>> = Arc::new(coefficients.to_vec());
    let comps = (0..orbits)
        .map(|w| {
            let coeffs = coeffs.clone();
            Arc::new(move |t: f64| {
                coeffs
                    .iter()
                    .map(|(k, c)| c.get(w) * phi0_discrete(&gg, *k, t).unwrap_or(0.0))
                    .sum::<Complex64>()
            }) as RadialEval
        })
        .collect();
    let poles = g.pole_set();
    let slowest = coefficients
        .iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, _)| poles.lambdas[*k])
        .fold(f64::INFINITY, f64::min);
    let mut out = RadialFunction::new(comps);
    if slowest.is_finite() {
        out = out.with_decay_class(2.0 * g.rho / (g.rho + slowest) + 1e-9);
    }
    out
}

/// Orthogonal projection onto the span of the discrete-spectrum functions,
/// per orbit.
pub fn project_discrete(g: &SpaceGeometry, f: &RadialFunction, spec: &QuadratureSpec) -> Result<RadialFunction> {
    let coeffs: Vec<(usize, WVector)> = discrete_coefficients(g, f, spec)?.into_iter().enumerate().collect();
    Ok(discrete_combination(g, &coeffs, f.orbits()))
}

/// Sampling parameters for spectral line integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineOptions {
    pub panel: f64,
    pub order: usize,
    /// Stop once two consecutive panels stay below this fraction of the
    /// largest sampled `|phi|`.
    pub tail_tol: f64,
    pub min_extent: f64,
    pub max_extent: f64,
}

impl LineOptions {
    pub fn from_spec(spec: &QuadratureSpec, panel: f64) -> Self {
        Self {
            panel,
            order: 16,
            tail_tol: (0.1 * spec.rel_tol).max(1e-16),
            min_extent: 8.0,
            max_extent: if spec.truncation.is_finite() { spec.truncation } else { 400.0 },
        }
    }

    /// Panel width resolving the oscillation `e^{i nu (t + s)}` for
    /// `t <= t_max` and spectral data built from support up to `s`.
    pub fn panel_for(t_max: f64, support_end: f64) -> f64 {
        (12.0 / (t_max + support_end + 1.0)).min(1.0)
    }
}

/// Samples of a spectral function on a composite rule along `x0 + i nu`.
/// With `symmetric` only `nu >= 0` is sampled and the integrand is taken to
/// be even in `nu`.
#[derive(Debug, Clone)]
pub struct LineSamples {
    pub x0: f64,
    pub symmetric: bool,
    pub nu: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<WVector>,
    pub orbits: usize,
}

/// Packet flavour for [`LineSamples::packets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketForm {
    /// `2 int Phi_lambda(t) phi(lambda) dlambda`.
    Phi,
    /// `int E°(lambda)(t) phi(lambda) dlambda`.
    Eisenstein,
}

const LINE_CHUNK: usize = 64;

impl LineSamples {
    pub fn build(phi: &SpectralFunction, x0: f64, symmetric: bool, opts: &LineOptions) -> Result<Self> {
        let (gx, gw) = gauss_legendre(opts.order);
        let batch = 2 * crate::parallel::threads().max(4);
        let mut nu = Vec::new();
        let mut weights = Vec::new();
        let mut values = Vec::new();
        let mut biggest: f64 = 0.0;
        let mut quiet = 0;
        let mut p = 0usize;
        'outer: loop {
            let mut nodes = Vec::new();
            let mut ws = Vec::new();
            let mut panel_of = Vec::new();
            for q in p..p + batch {
                let lo = q as f64 * opts.panel;
                let sides: &[f64] = if symmetric { &[1.0] } else { &[1.0, -1.0] };
                for &side in sides {
                    for (x, w) in gx.iter().zip(&gw) {
                        nodes.push(side * (lo + 0.5 * opts.panel * (x + 1.0)));
                        ws.push(0.5 * opts.panel * w);
                        panel_of.push(q);
                    }
                }
            }
            let evals = par_map(&nodes, |&v| phi.eval(cx(x0, v)));
            let mut panel_max = vec![0.0f64; batch];
            let mut fresh = Vec::with_capacity(evals.len());
            for (i, e) in evals.into_iter().enumerate() {
                let e = e?;
                panel_max[panel_of[i] - p] = panel_max[panel_of[i] - p].max(e.norm());
                fresh.push(e);
            }
            let mut kept = 0;
            for (j, m) in panel_max.iter().enumerate() {
                biggest = biggest.max(*m);
                kept += 1;
                let extent = (p + j + 1) as f64 * opts.panel;
                quiet = if *m <= opts.tail_tol * biggest { quiet + 1 } else { 0 };
                if (quiet >= 2 && extent >= opts.min_extent) || extent >= opts.max_extent {
                    let per_panel = if symmetric { opts.order } else { 2 * opts.order };
                    let take = kept * per_panel;
                    nu.extend_from_slice(&nodes[..take]);
                    weights.extend_from_slice(&ws[..take]);
                    values.extend(fresh.drain(..take));
                    break 'outer;
                }
            }
            nu.extend(nodes);
            weights.extend(ws);
            values.extend(fresh);
            p += batch;
        }
        Ok(Self {
            x0,
            symmetric,
            nu,
            weights,
            values,
            orbits: phi.orbits(),
        })
    }

    /// Largest sampled `nu`.
    pub fn extent(&self) -> f64 {
        self.nu.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Spectral line integrals at every `t` in `ts`, including the line
    /// element `dlambda = i dnu`.
    pub fn packets(&self, g: &SpaceGeometry, ts: &[f64], form: PacketForm) -> Result<Vec<WVector>> {
        let idx: Vec<usize> = (0..self.nu.len()).step_by(LINE_CHUNK).collect();
        let parts = par_map(&idx, |&start| -> Result<Vec<WVector>> {
            let mut acc = vec![WVector::zeros(self.orbits); ts.len()];
            for j in start..(start + LINE_CHUNK).min(self.nu.len()) {
                let lambda = cx(self.x0, self.nu[j]);
                let ev = SphericalEvaluator::new(g, lambda)?;
                for (i, &t) in ts.iter().enumerate() {
                    let k = match form {
                        PacketForm::Phi => 2.0 * ev.phi(t)?,
                        PacketForm::Eisenstein => ev.eisenstein(t)?,
                    };
                    let s = k * self.weights[j];
                    for (a, b) in acc[i].components.iter_mut().zip(&self.values[j].components) {
                        *a += s * b;
                    }
                }
            }
            Ok(acc)
        });
        let factor = cx(0.0, if self.symmetric { 2.0 } else { 1.0 });
        let mut out = vec![WVector::zeros(self.orbits); ts.len()];
        for part in parts {
            for (o, p) in out.iter_mut().zip(part?) {
                *o = o.add(&p);
            }
        }
        Ok(out.into_iter().map(|v| v.scale(factor)).collect())
    }
}

fn default_line(spec: &QuadratureSpec, t: f64) -> LineOptions {
    LineOptions::from_spec(spec, LineOptions::panel_for(t, 4.0))
}

/// Wave packet `J phi(t) = 2 int_{iR} Phi_lambda(t) phi(lambda) dlambda`.
pub fn wave_packet(g: &SpaceGeometry, phi: &SpectralFunction, t: f64, spec: &QuadratureSpec) -> Result<WVector> {
    let s = LineSamples::build(phi, 0.0, false, &default_line(spec, t))?;
    Ok(s.packets(g, &[t], PacketForm::Phi)?.remove(0))
}

/// `int_{iR} E°(lambda)(t) phi(lambda) dlambda`; equal to [`wave_packet`]
/// for `phi` with `phi(-lambda) = c(lambda) phi(lambda)`.
pub fn wave_packet_eisenstein(g: &SpaceGeometry, phi: &SpectralFunction, t: f64, spec: &QuadratureSpec) -> Result<WVector> {
    let s = LineSamples::build(phi, 0.0, false, &default_line(spec, t))?;
    Ok(s.packets(g, &[t], PacketForm::Eisenstein)?.remove(0))
}

/// Shifted packet `I_r phi(t) = 2 int_{Re lambda = -gamma_r} Phi_lambda(t) phi(lambda) dlambda`.
pub fn shifted_wave_packet(g: &SpaceGeometry, phi: &SpectralFunction, r: f64, t: f64, spec: &QuadratureSpec) -> Result<WVector> {
    let split = g.pole_set().split(r)?;
    let s = LineSamples::build(phi, -split.gamma, false, &default_line(spec, t))?;
    Ok(s.packets(g, &[t], PacketForm::Phi)?.remove(0))
}

/// How the discrete part of an inversion is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum DiscretePart {
    /// `kappa` times `-4 pi Phi0_{-lambda_k} Res_k` with contour residues.
    Residues(Vec<ResidueData>),
    /// Projection coefficients (non-compact functions).
    Projection(Vec<WVector>),
}

/// Uncalibrated inversion data for one function.
#[derive(Debug, Clone)]
pub struct Inversion {
    g: SpaceGeometry,
    pub samples: LineSamples,
    pub discrete: DiscretePart,
}

impl Inversion {
    pub fn new(g: &SpaceGeometry, f: &RadialFunction, spec: &QuadratureSpec) -> Result<Self> {
        let support_end = f.support_bound().unwrap_or(4.0);
        let opts = LineOptions::from_spec(spec, LineOptions::panel_for(8.0, support_end));
        let phi = transform_function(g, f, spec);
        let samples = LineSamples::build(&phi, 0.0, true, &opts)?;
        let n = g.pole_set().len();
        let discrete = if f.support().is_some() {
            let c = ContourSpec::new(cx(0.0, 0.0), 0.5);
            DiscretePart::Residues((0..n).map(|k| residue_at(g, f, k, &c)).collect::<Result<_>>()?)
        } else {
            DiscretePart::Projection(discrete_coefficients(g, f, spec)?)
        };
        Ok(Self { g: *g, samples, discrete })
    }

    /// `int_R E°(i nu)(t) F f(i nu) dnu`, the continuous part.
    pub fn continuous(&self, ts: &[f64]) -> Result<Vec<WVector>> {
        let p = self.samples.packets(&self.g, ts, PacketForm::Eisenstein)?;
        Ok(p.into_iter().map(|v| v.scale(cx(0.0, -1.0))).collect())
    }

    /// Discrete part already multiplied by `kappa`.
    pub fn discrete_part(&self, kappa: f64, t: f64) -> Result<WVector> {
        let mut acc = WVector::zeros(self.samples.orbits);
        match &self.discrete {
            DiscretePart::Residues(rs) => {
                for r in rs {
                    let phi = phi0_discrete(&self.g, r.k, t)?;
                    acc = acc.add(&r.value.scale(cx(-4.0 * PI * kappa * phi, 0.0)));
                }
            }
            DiscretePart::Projection(cs) => {
                for (k, c) in cs.iter().enumerate() {
                    acc = acc.add(&c.scale(cx(phi0_discrete(&self.g, k, t)?, 0.0)));
                }
            }
        }
        Ok(acc)
    }

    /// Reconstruction at every `t` in `ts` with the given constant.
    pub fn evaluate(&self, kappa: f64, ts: &[f64]) -> Result<Vec<WVector>> {
        let cont = self.continuous(ts)?;
        cont.into_iter()
            .zip(ts)
            .map(|(c, &t)| Ok(c.scale(cx(kappa, 0.0)).add(&self.discrete_part(kappa, t)?)))
            .collect()
    }
}

/// Least-squares constant `kappa` with `f ~ kappa * continuous + discrete(kappa)`
/// over the sample points `ts`.
pub fn fit_plancherel(g: &SpaceGeometry, f: &RadialFunction, spec: &QuadratureSpec, ts: &[f64]) -> Result<f64> {
    let inv = Inversion::new(g, f, spec)?;
    let cont = inv.continuous(ts)?;
    // the residue form is linear in kappa, the projection form is not
    let mut num = 0.0;
    let mut den = 0.0;
    let mut scale: f64 = 0.0;
    for (c, &t) in cont.iter().zip(ts) {
        let u = c.add(&inv.discrete_part(1.0, t)?);
        let fixed = match inv.discrete {
            DiscretePart::Residues(_) => WVector::zeros(u.len()),
            DiscretePart::Projection(_) => inv.discrete_part(1.0, t)?,
        };
        let u = u.sub(&fixed);
        let target = f.eval_all(t).sub(&fixed);
        for (a, b) in u.components.iter().zip(&target.components) {
            num += (a.conj() * b).re;
            den += a.norm_sqr();
        }
        scale = scale.max(target.norm());
    }
    if !(den > 0.0) {
        return Err(Error::IllConditioned("reconstruction vanishes on the calibration grid".into()));
    }
    let kappa = num / den;
    let mut resid: f64 = 0.0;
    for (c, &t) in cont.iter().zip(ts) {
        let rec = c.scale(cx(kappa, 0.0)).add(&inv.discrete_part(kappa, t)?);
        resid = resid.max(rec.sub(&f.eval_all(t)).norm());
    }
    if !(kappa > 0.0) || resid > 1e-3 * scale {
        return Err(Error::IllConditioned(format!(
            "Plancherel fit kappa = {kappa:e} leaves residual {resid:e} (scale {scale:e})"
        )));
    }
    Ok(kappa)
}

/// Reference bump for calibration and its sample grid.
pub fn calibration_reference(orbits: usize) -> (RadialFunction, Vec<f64>) {
    let f = RadialFunction::bump(orbits, 2.0, 1.5);
    let ts = (0..31).map(|i| 0.55 + 2.9 * i as f64 / 30.0).collect();
    (f, ts)
}

fn kappa_cache() -> &'static Mutex<HashMap<(u32, u32, u32, u32, u8), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32, u32, u32, u8), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Plancherel constant from a least-squares fit on the reference bump;
/// computed once per geometry.
pub fn calibrate_plancherel(g: &SpaceGeometry, spec: &QuadratureSpec) -> Result<f64> {
    let m = g.multiplicities;
    let key = (m.m1p, m.m1m, m.m2p, m.m2m, m.orbits);
    if let Some(k) = kappa_cache().lock().expect("kappa cache poisoned").get(&key) {
        return Ok(*k);
    }
    let (f, ts) = calibration_reference(g.orbits());
    let k = fit_plancherel(g, &f, spec, &ts)?;
    Ok(*kappa_cache().lock().expect("kappa cache poisoned").entry(key).or_insert(k))
}

/// Reconstruction of `f` from its transform and residues.
pub fn invert(g: &SpaceGeometry, f: &RadialFunction, spec: &QuadratureSpec) -> Result<RadialFunction> {
    let kappa = calibrate_plancherel(g, spec)?;
    let inv = Arc::new(Inversion::new(g, f, spec)?);
    let comps = (0..f.orbits())
        .map(|w| {
            let inv = inv.clone();
            Arc::new(move |t: f64| {
                inv.evaluate(kappa, &[t])
                    .map(|v| v[0].get(w))
                    .unwrap_or(cx(f64::NAN, f64::NAN))
            }) as RadialEval
        })
        .collect();
    Ok(RadialFunction::new(comps))
}

/// `f = f_H + f_B`, where `f_B` collects the discrete terms with
/// `lambda_k` in `L_r^c`.
pub fn decompose_hb(g: &SpaceGeometry, f: &RadialFunction, r: f64, spec: &QuadratureSpec) -> Result<(RadialFunction, RadialFunction)> {
    let split = g.pole_set().split(r)?;
    let mut coeffs = Vec::new();
    if !split.above.is_empty() {
        if f.support().is_some() {
            let kappa = calibrate_plancherel(g, spec)?;
            let c = ContourSpec::new(cx(0.0, 0.0), 0.5);
            for &k in &split.above {
                let res = residue_at(g, f, k, &c)?;
                coeffs.push((k, res.value.scale(cx(-4.0 * PI * kappa, 0.0))));
            }
        } else {
            let all = discrete_coefficients(g, f, spec)?;
            for &k in &split.above {
                coeffs.push((k, all[k].clone()));
            }
        }
    }
    let f_b = discrete_combination(g, &coeffs, f.orbits());
    let mut f_h = RadialFunction::combine(cx(1.0, 0.0), f, cx(-1.0, 0.0), &f_b);
    f_h.decay_class = if coeffs.is_empty() { f.decay_class } else { f_b.decay_class };
    if coeffs.is_empty() {
        if let Some((a, b)) = f.support() {
            f_h = f_h.with_support(a, b);
        }
    }
    Ok((f_h, f_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenfunctions::c_function;
    use crate::transform::functions::RadialEval;

    fn geom(m1p: u32, m1m: u32, m2p: u32, m2m: u32) -> SpaceGeometry {
        SpaceGeometry::from_multiplicities(m1p, m1m, m2p, m2m, 1).unwrap()
    }

    #[test]
    fn forward_resolutions_agree() {
        let g = geom(1, 3, 1, 0);
        let f = RadialFunction::bump(1, 1.5, 0.5);
        for l in [cx(0.0, 0.5), cx(0.0, 7.0), cx(-1.0, 20.0)] {
            let a = forward_compact(&g, &f, l, 1.0, RULE_ORDER).unwrap().get(0);
            let b = forward_compact(&g, &f, l, 0.5, 24).unwrap().get(0);
            assert!((a - b).norm() < 1e-8 * b.norm().max(1e-3), "{l}");
        }
    }

    #[test]
    fn symmetry_on_imaginary_axis() {
        let g = geom(0, 8, 0, 0);
        let spec = QuadratureSpec::default();
        let f = RadialFunction::bump(1, 1.5, 0.5);
        for nu in [0.3, 2.0, 9.0, 25.0] {
            let l = cx(0.0, nu);
            let a = forward(&g, &f, -l, &spec).unwrap().get(0);
            let b = c_function(&g, l).unwrap() * forward(&g, &f, l, &spec).unwrap().get(0);
            assert!((a - b).norm() < 1e-8 * a.norm().max(1e-12), "{nu}");
        }
    }

    #[test]
    fn discrete_functions_are_in_the_kernel() {
        let g = geom(0, 8, 0, 0);
        let spec = QuadratureSpec::default();
        for k in 0..2 {
            let f = RadialFunction::discrete(&g, k, vec![cx(1.0, 0.0)]).unwrap();
            let norm = discrete_norm_sq(&g, k, &spec).unwrap().sqrt();
            for nu in [0.5, 1.0, 2.0, 5.0] {
                let v = forward(&g, &f, cx(0.0, nu), &spec).unwrap().get(0);
                assert!(v.norm() < 1e-6 * norm, "k={k} nu={nu}: {v}");
            }
        }
        let f = RadialFunction::discrete(&g, 1, vec![cx(1.0, 0.0)]).unwrap();
        assert!(matches!(forward(&g, &f, cx(-1.5, 0.0), &spec), Err(Error::Divergent(_))));
    }

    #[test]
    fn projection_properties() {
        let g = geom(0, 8, 0, 0);
        let spec = QuadratureSpec::default();
        let n0 = discrete_norm_sq(&g, 0, &spec).unwrap();
        let n1 = discrete_norm_sq(&g, 1, &spec).unwrap();
        let f0 = RadialFunction::discrete(&g, 0, vec![cx(1.0, 0.0)]).unwrap();
        let cross = discrete_inner_products(&g, &f0, 1, &spec).unwrap().get(0).re;
        assert!(cross.abs() < 1e-8 * (n0 * n1).sqrt());
        let f1 = RadialFunction::discrete(&g, 1, vec![cx(1.0, 0.0)]).unwrap();
        let c = discrete_coefficients(&g, &f1, &spec).unwrap();
        assert!((c[1].get(0) - 1.0).norm() < 1e-8 && c[0].get(0).norm() < 1e-8);
        let b = RadialFunction::bump(1, 1.5, 0.5);
        let p = project_discrete(&g, &b, &spec).unwrap();
        let pp = project_discrete(&g, &p, &spec).unwrap();
        for t in [0.5, 1.0, 2.5] {
            assert!((p.eval(0, t) - pp.eval(0, t)).norm() < 1e-8 * p.eval(0, t).norm().max(1e-12));
        }
    }

    #[test]
    fn residue_forms_agree() {
        let g = geom(0, 8, 0, 0);
        let spec = QuadratureSpec::default();
        let f = RadialFunction::bump(1, 1.5, 0.5);
        for k in 0..2 {
            let a = residue_at(&g, &f, k, &ContourSpec::new(cx(0.0, 0.0), 0.5)).unwrap();
            let b = residue_projection(&g, &f, k, &spec).unwrap();
            assert!((a.value.get(0) - b.value.get(0)).norm() < 1e-8 * b.value.norm(), "{a:?} {b:?}");
            assert_eq!(a.location, cx(-g.pole_set().lambdas[k], 0.0));
        }
        // regular point
        let r = contour_residue(
            |l| Ok(forward_compact(&g, &f, l, 1.0, 16)?.get(0)),
            &ContourSpec::new(cx(-2.0, 0.3), 0.3),
        )
        .unwrap();
        assert!(r.norm() < 1e-9);
    }

    #[test]
    fn kappa_matches_residue_normalisation() {
        // 4 pi kappa (Res E° / Phi0) ||Phi0||^2 = 1 for every k
        let spec = QuadratureSpec::default();
        for g in [geom(0, 8, 0, 0), geom(1, 6, 0, 0), geom(0, 6, 2, 0)] {
            for k in 0..g.pole_set().len() {
                let ratio = eisenstein_residue_ratio(&g, k).unwrap();
                let n = discrete_norm_sq(&g, k, &spec).unwrap();
                let v = 4.0 * PI * kappa_analytic(&g) * ratio * n;
                assert!((v - 1.0).abs() < 1e-8, "{g:?} k={k}: {v}");
            }
        }
    }

    #[test]
    fn calibration_matches_closed_form() {
        let spec = QuadratureSpec::default();
        for g in [geom(0, 2, 0, 0), geom(0, 8, 0, 0)] {
            let k = calibrate_plancherel(&g, &spec).unwrap();
            let a = kappa_analytic(&g);
            assert!((k - a).abs() < 1e-7 * a, "{g:?}: {k} vs {a}");
        }
        assert!((kappa_analytic(&geom(0, 2, 0, 0)) - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn inversion_recovers_bump() {
        let g = geom(0, 8, 0, 0);
        let spec = QuadratureSpec::default();
        let f = RadialFunction::bump(1, 1.5, 0.5);
        let inv = Inversion::new(&g, &f, &spec).unwrap();
        let ts = [0.3, 1.2, 1.5, 1.9, 3.0];
        let rec = inv.evaluate(kappa_analytic(&g), &ts).unwrap();
        for (r, &t) in rec.iter().zip(&ts) {
            assert!((r.get(0) - f.eval(0, t)).norm() < 1e-6, "t={t}: {}", r.get(0));
        }
    }

    #[test]
    fn decomposition_is_idempotent() {
        let g = geom(0, 8, 0, 0);
        let spec = QuadratureSpec::default();
        let f = RadialFunction::bump(1, 1.5, 0.5);
        let (fh, fb) = decompose_hb(&g, &f, 4.0 / 3.0, &spec).unwrap();
        for t in [0.5, 1.5, 4.0] {
            let s = fh.eval(0, t) + fb.eval(0, t);
            assert!((s - f.eval(0, t)).norm() < 1e-12);
        }
        let (fh2, fb2) = decompose_hb(&g, &fh, 4.0 / 3.0, &spec).unwrap();
        for t in [0.5, 1.5, 4.0] {
            assert!(fb2.eval(0, t).norm() < 1e-6 * fb.eval(0, t).norm().max(1e-12));
            assert!((fh2.eval(0, t) - fh.eval(0, t)).norm() < 1e-6 * fh.eval(0, t).norm().max(1e-12));
        }
        // r = 1.05: gamma_r > 3, L_r^c is empty
        let (fh, fb) = decompose_hb(&g, &f, 1.05, &spec).unwrap();
        assert_eq!(fb.eval(0, 1.5), cx(0.0, 0.0));
        assert_eq!(fh.eval(0, 1.5), f.eval(0, 1.5));
    }

    fn bump_transform(g: &SpaceGeometry) -> SpectralFunction {
        transform_function(g, &RadialFunction::bump(1, 1.5, 0.5), &QuadratureSpec::default())
    }

    #[test]
    fn zero_packet() {
        let g = geom(0, 8, 0, 0);
        let zero = SpectralFunction::scalar(1, |_| Ok(cx(0.0, 0.0)));
        let v = wave_packet(&g, &zero, 1.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(v.get(0), cx(0.0, 0.0));
    }

    #[test]
    fn packet_forms_agree() {
        use rand::{Rng, SeedableRng};
        let g = geom(0, 8, 0, 0);
        let phi = bump_transform(&g);
        let opts = LineOptions::from_spec(&QuadratureSpec::default(), LineOptions::panel_for(6.0, 2.0));
        let s = LineSamples::build(&phi, 0.0, false, &opts).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let ts: Vec<f64> = (0..10).map(|_| rng.gen_range(0.2..6.0)).collect();
        let a = s.packets(&g, &ts, PacketForm::Phi).unwrap();
        let b = s.packets(&g, &ts, PacketForm::Eisenstein).unwrap();
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            assert!((x.get(0) - y.get(0)).norm() < 1e-8 * scale);
            // d lambda = i d nu: the packet of a real-structured phi is imaginary
            assert!(x.get(0).re.abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn shifted_packet_at_r2_is_the_packet() {
        let g = geom(0, 8, 0, 0);
        let phi = SpectralFunction::scalar(1, |l: Complex64| Ok((l * l).exp()));
        let spec = QuadratureSpec::default();
        let a = wave_packet(&g, &phi, 1.3, &spec).unwrap();
        let b = shifted_wave_packet(&g, &phi, 2.0, 1.3, &spec).unwrap();
        assert!((a.get(0) - b.get(0)).norm() < 1e-14 * a.norm());
    }

    #[test]
    fn shifted_packet_decay() {
        let g = geom(0, 8, 0, 0);
        let r = 4.0 / 3.0;
        let gamma = g.gamma_r(r).unwrap();
        let phi = bump_transform(&g);
        let opts = LineOptions::from_spec(&QuadratureSpec::default(), LineOptions::panel_for(15.0, 2.0));
        let s = LineSamples::build(&phi, -gamma, false, &opts).unwrap();
        let ts: Vec<f64> = (0..11).map(|i| 5.0 + i as f64).collect();
        let v = s.packets(&g, &ts, PacketForm::Phi).unwrap();
        let ys: Vec<f64> = v.iter().map(|x| x.norm().ln()).collect();
        let n = ts.len() as f64;
        let (mx, my) = (ts.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let slope = ts.iter().zip(&ys).map(|(t, y)| (t - mx) * (y - my)).sum::<f64>()
            / ts.iter().map(|t| (t - mx).powi(2)).sum::<f64>();
        assert!(-slope >= gamma + g.rho - 0.01, "rate {}", -slope);
    }

    #[test]
    fn contour_shift_identity() {
        let g = geom(0, 8, 0, 0);
        let r = 4.0 / 3.0;
        let spec = QuadratureSpec::default();
        // simple pole at -1, the only point of -L_r
        let phi = SpectralFunction::scalar(1, |l: Complex64| Ok((l * l).exp() / (l + 1.0))).with_pole(cx(-1.0, 0.0), None);
        let res = (1.0f64).exp();
        for t in [0.5, 1.0, 2.0, 3.0] {
            let j = wave_packet(&g, &phi, t, &spec).unwrap().get(0);
            let i = shifted_wave_packet(&g, &phi, r, t, &spec).unwrap().get(0);
            let rhs = cx(0.0, 4.0 * PI) * phi0_discrete(&g, 1, t).unwrap() * res;
            assert!((j - i - rhs).norm() < 1e-8 * rhs.norm(), "t={t}");
        }
    }

    #[test]
    fn intertwining() {
        let g = geom(0, 8, 0, 0);
        let spec = QuadratureSpec::default();
        let f = RadialFunction::bump(1, 1.5, 0.5);
        let (ff, gg) = (f.clone(), g);
        let lf = RadialFunction::new(vec![Arc::new(move |t: f64| {
            crate::eigenfunctions::radial_laplacian_apply(&gg, &ff, 0, t, 1e-3).unwrap() + gg.rho * gg.rho * ff.eval(0, t)
        }) as RadialEval])
        .with_support(1.0, 2.0);
        for l in [cx(0.0, 0.7), cx(0.0, 4.0), cx(-1.5, 2.0), cx(0.2, 10.0)] {
            let a = forward(&g, &lf, l, &spec).unwrap().get(0);
            let b = l * l * forward(&g, &f, l, &spec).unwrap().get(0);
            assert!((a - b).norm() < 1e-6 * b.norm(), "{l}: {a} vs {b}");
        }
    }

    #[test]
    fn orbit_equivariance() {
        let g = SpaceGeometry::from_multiplicities(0, 8, 0, 0, 2).unwrap();
        let spec = QuadratureSpec::default();
        let a = RadialFunction::bump_weighted(vec![1.0, -2.5], 1.5, 0.5);
        let b = RadialFunction::bump_weighted(vec![-2.5, 1.0], 1.5, 0.5);
        let l = cx(0.0, 1.7);
        let fa = forward(&g, &a, l, &spec).unwrap();
        let fb = forward(&g, &b, l, &spec).unwrap();
        assert_eq!(fa.get(0), fb.get(1));
        assert_eq!(fa.get(1), fb.get(0));
        let single = forward(&geom(0, 8, 0, 0), &RadialFunction::bump(1, 1.5, 0.5), l, &spec).unwrap().get(0);
        assert!((fa.get(1) - (-2.5) * single).norm() < 1e-14 * single.norm());
    }

    #[test]
    fn residue_limit_along_radius() {
        let g = geom(0, 8, 0, 0);
        let f = RadialFunction::bump(1, 1.5, 0.5);
        let circle = residue_at(&g, &f, 1, &ContourSpec::new(cx(0.0, 0.0), 0.5)).unwrap().value.get(0);
        let eps = 1e-4;
        let lim = cx(eps, 0.0) * forward_compact(&g, &f, cx(-1.0 + eps, 0.0), 1.0, 16).unwrap().get(0);
        let lim2 = cx(-eps, 0.0) * forward_compact(&g, &f, cx(-1.0 - eps, 0.0), 1.0, 16).unwrap().get(0);
        assert!((0.5 * (lim + lim2) - circle).norm() < 1e-6 * circle.norm());
    }

    #[test]
    fn projection_reproduces_discrete_functions() {
        let g = geom(0, 8, 0, 0);
        let spec = QuadratureSpec::default();
        for k in 0..2 {
            let f = RadialFunction::discrete(&g, k, vec![cx(1.0, 0.0)]).unwrap();
            let p = project_discrete(&g, &f, &spec).unwrap();
            for t in [0.3, 1.0, 4.0] {
                assert!((p.eval(0, t) - f.eval(0, t)).norm() < 1e-6 * f.eval(0, t).norm());
            }
        }
    }

    #[test]
    fn kernel_part_has_vanishing_transform() {
        let g = geom(0, 8, 0, 0);
        let spec = QuadratureSpec::default();
        let (_, fb) = decompose_hb(&g, &RadialFunction::bump(1, 1.5, 0.5), 4.0 / 3.0, &spec).unwrap();
        let scale = fb.eval(0, 1.0).norm();
        for nu in [0.5, 2.0, 6.0] {
            assert!(forward(&g, &fb, cx(0.0, nu), &spec).unwrap().norm() < 1e-6 * scale);
        }
    }
}
