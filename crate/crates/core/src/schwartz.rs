//! Strips, seminorms and membership checks for the Schwartz spaces on
//! either side of the transform.
//!
//! All suprema are taken over finite grids, so every reported value is a
//! lower bound of the true seminorm. Divergence is flagged heuristically: a
//! sampled sequence that keeps growing over the last decade of its grid
//! counts as infinite.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigenfunctions::{c_function, WVector};
use crate::error::{Error, Result};
use crate::numerics::contour::{contour_residue, ContourSpec};
use crate::parallel::par_map;
use crate::spaces::{PolynomialSpec, SpaceGeometry};
use crate::transform::{RadialFunction, SpectralFunction};

pub const DEFAULT_EPSILON0: f64 = 0.25;

/// Why `epsilon0 < 1/2` suffices for the right edge of a strip.
pub const EPSILON0_NOTE: &str = "E° has no poles in -1/2 < Re lambda < 0, so the strip may extend to Re lambda = epsilon0 < 1/2";

/// Growth factor over the last decade of a grid above which a monotone
/// sequence is reported as divergent.
pub const GROWTH_THRESHOLD: f64 = 2.0;

/// Radius of the Cauchy circles used for spectral derivatives.
pub const CAUCHY_RADIUS: f64 = 0.05;
const CAUCHY_NODES: usize = 16;
/// Step of the one-sided stencils used within `CAUCHY_RADIUS` of a strip edge.
const EDGE_STEP: f64 = 0.02;

/// The strip `S_r = iR + [-gamma_r, epsilon0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripSpec {
    pub r: f64,
    pub epsilon0: f64,
    pub left: f64,
    pub right: f64,
}

impl StripSpec {
    pub fn contains(&self, lambda: Complex64) -> bool {
        lambda.re >= self.left - 1e-12 && lambda.re <= self.right + 1e-12
    }
}

pub fn strip_for(g: &SpaceGeometry, r: f64, epsilon0: f64) -> Result<StripSpec> {
    if !(epsilon0 > 0.0 && epsilon0 < 0.5) {
        return Err(Error::OutOfRange {
            what: "epsilon0 (expected 0 < epsilon0 < 1/2)",
            value: epsilon0,
        });
    }
    let gamma = g.gamma_r(r)?;
    Ok(StripSpec {
        r,
        epsilon0,
        left: -gamma,
        right: epsilon0,
    })
}

/// Supremum over a grid, with its location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub value: f64,
    pub infinite: bool,
    /// Sample point of the supremum; `t` sits on the real axis for radial
    /// seminorms.
    pub argmax: Complex64,
    pub samples: usize,
    pub grid: String,
}

impl SeminormReport {
    pub fn is_finite(&self) -> bool {
        !self.infinite && self.value.is_finite()
    }
}

/// Log-spaced radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for TauGrid {
    fn default() -> Self {
        Self {
            t_min: 1e-3,
            t_max: 40.0,
            points: 400,
        }
    }
}

impl TauGrid {
    pub fn nodes(&self) -> Vec<f64> {
        geomspace(self.t_min, self.t_max, self.points)
    }
}

fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `true` when `values` (indexed like `abscissae`) keep growing over the
/// last decade `[x_max / 10, x_max]` by more than [`GROWTH_THRESHOLD`].
fn diverges(abscissae: &[f64], values: &[f64]) -> bool {
    let Some(&x_max) = abscissae.last() else {
        return false;
    };
    let tail: Vec<f64> = abscissae
        .iter()
        .zip(values)
        .filter(|(x, _)| **x >= x_max / 10.0)
        .map(|(_, v)| *v)
        .collect();
    if tail.len() < 3 || !(tail[0] > 0.0) {
        return false;
    }
    let steps = tail.len() - 1;
    let rising = tail.windows(2).filter(|w| w[1] >= w[0]).count();
    10 * rising >= 9 * steps && tail[steps] > GROWTH_THRESHOLD * tail[0]
}

/// `tau_{n,m}(f) = sup_t (1 + t)^n e^{(2/r) rho t} |f_w^{(m)}(t)|`, maximised over orbits.
pub fn tau_seminorm(g: &SpaceGeometry, f: &RadialFunction, n: u32, m_deriv: usize, r: f64, grid: &TauGrid) -> Result<SeminormReport> {
    if !(r > 0.0 && r <= 2.0) {
        return Err(Error::OutOfRange {
            what: "r (expected 0 < r <= 2)",
            value: r,
        });
    }
    let ts = grid.nodes();
    let a = 2.0 / r * g.rho;
    let mut values = Vec::with_capacity(ts.len());
    for &t in &ts {
        let mut v: f64 = 0.0;
        for w in 0..f.orbits() {
            let d = f.derivative(w, t, m_deriv)?.norm();
            // the weight is applied in log form to stay finite where f underflows
            let weighted = if d > 0.0 { (n as f64 * (1.0 + t).ln() + a * t + d.ln()).exp() } else { 0.0 };
            v = v.max(weighted);
        }
        values.push(v);
    }
    let (i, value) = values
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &v)| if v > acc.1 || v.is_nan() { (i, v) } else { acc });
    let infinite = !value.is_finite() || diverges(&ts, &values);
    Ok(SeminormReport {
        value: if infinite { f64::INFINITY } else { value },
        infinite,
        argmax: Complex64::new(ts[i], 0.0),
        samples: ts.len(),
        grid: format!("t log-spaced in [{}, {}], {} points", grid.t_min, grid.t_max, grid.points),
    })
}

/// Rectangular strip grid: `n_re` real parts spanning the strip and imaginary
/// parts `0, ±geomspace(im_min, im_max, n_half_im)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripGrid {
    pub n_re: usize,
    pub n_half_im: usize,
    pub im_min: f64,
    pub im_max: f64,
}

impl Default for StripGrid {
    fn default() -> Self {
        Self {
            n_re: 60,
            n_half_im: 60,
            im_min: 0.05,
            im_max: 400.0,
        }
    }
}

impl StripGrid {
    pub fn re_nodes(&self, strip: &StripSpec) -> Vec<f64> {
        if self.n_re == 1 {
            return vec![strip.left];
        }
        (0..self.n_re)
            .map(|i| strip.left + (strip.right - strip.left) * i as f64 / (self.n_re - 1) as f64)
            .collect()
    }

    /// Non-negative imaginary parts; the grid uses each with both signs.
    pub fn im_levels(&self) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend(geomspace(self.im_min, self.im_max, self.n_half_im));
        v
    }

    pub fn points(&self, strip: &StripSpec) -> Vec<Complex64> {
        let re = self.re_nodes(strip);
        let mut pts = Vec::new();
        for y in self.im_levels() {
            for &x in &re {
                pts.push(Complex64::new(x, y));
                if y > 0.0 {
                    pts.push(Complex64::new(x, -y));
                }
            }
        }
        pts
    }
}

/// Finite-difference weights for the derivatives of orders `0..=m` at `z`
/// from samples at `xs` (Fornberg's recursion).
fn fornberg(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// `(d/dlambda)^q [p(lambda) phi(lambda)]` for `q = 0..=max_order`.
///
/// Inside the strip a Cauchy circle is used, which also serves the value at
/// removable singularities; within the circle radius of an edge the
/// derivatives come from one-sided stencils along the real direction.
pub fn spectral_jet(
    phi: &SpectralFunction,
    p: &PolynomialSpec,
    strip: &StripSpec,
    lambda: Complex64,
    max_order: usize,
) -> Result<Vec<WVector>> {
    let f = |z: Complex64| -> Result<WVector> { Ok(phi.eval(z)?.scale(p.eval(z))) };
    let orbits = phi.orbits();
    let inward = if lambda.re - strip.left < CAUCHY_RADIUS {
        Some(1.0)
    } else if strip.right - lambda.re < CAUCHY_RADIUS {
        Some(-1.0)
    } else {
        None
    };
    match inward {
        None => {
            let n = CAUCHY_NODES.max(2 * max_order + 4);
            let mut jet = vec![WVector::zeros(orbits); max_order + 1];
            for j in 0..n {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
                let v = f(lambda + Complex64::from_polar(CAUCHY_RADIUS, th))?;
                for (q, slot) in jet.iter_mut().enumerate() {
                    let k = Complex64::from_polar(1.0, -(q as f64) * th);
                    *slot = slot.add(&v.scale(k));
                }
            }
            let mut fact = 1.0;
            for (q, slot) in jet.iter_mut().enumerate() {
                if q > 0 {
                    fact *= q as f64;
                }
                *slot = slot.scale(Complex64::new(fact / (n as f64 * CAUCHY_RADIUS.powi(q as i32)), 0.0));
            }
            Ok(jet)
        }
        Some(dir) => {
            let count = max_order + 5;
            let xs: Vec<f64> = (0..count).map(|j| dir * EDGE_STEP * j as f64).collect();
            let w = fornberg(0.0, &xs, max_order);
            let samples = xs
                .iter()
                .map(|&x| f(lambda + Complex64::new(x, 0.0)))
                .collect::<Result<Vec<_>>>()?;
            Ok((0..=max_order)
                .map(|q| {
                    samples
                        .iter()
                        .zip(&w[q])
                        .fold(WVector::zeros(orbits), |acc, (s, c)| acc.add(&s.scale(Complex64::new(*c, 0.0))))
                })
                .collect())
        }
    }
}

fn check_poles(phi: &SpectralFunction, strip: &StripSpec, p: &PolynomialSpec) -> Result<()> {
    for pole in &phi.poles {
        if strip.contains(pole.location) && p.eval(pole.location).norm() > 1e-8 {
            return Err(Error::Pole {
                factor: "spectral function pole not cancelled by p_r",
                at: pole.location,
            });
        }
    }
    Ok(())
}

/// Jets of `p_r phi` on every strip-grid point, computed once for a sweep
/// of seminorms.
#[derive(Debug, Clone)]
pub struct StripSamples {
    pub points: Vec<Complex64>,
    pub jets: Vec<Vec<f64>>,
    pub degree: usize,
    grid: StripGrid,
}

impl StripSamples {
    pub fn new(phi: &SpectralFunction, strip: &StripSpec, p: &PolynomialSpec, grid: &StripGrid, max_order: usize) -> Result<Self> {
        check_poles(phi, strip, p)?;
        let points = grid.points(strip);
        let jets = par_map(&points, |&l| -> Result<Vec<f64>> {
            Ok(spectral_jet(phi, p, strip, l, max_order)?.iter().map(|v| v.norm()).collect())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            jets,
            degree: p.degree(),
            grid: *grid,
        })
    }

    /// `omega_{n,q} = sup (1 + |lambda|)^{n - deg p} |(d/dlambda)^q [p phi]|`.
    pub fn omega(&self, n: i32, q: usize) -> Result<SeminormReport> {
        if q >= self.jets.first().map_or(0, |j| j.len()) {
            return Err(Error::OutOfRange {
                what: "derivative order beyond the sampled jet",
                value: q as f64,
            });
        }
        let e = n - self.degree as i32;
        let mut best = (0.0f64, Complex64::new(0.0, 0.0));
        let levels = self.grid.im_levels();
        let mut by_level = vec![0.0f64; levels.len()];
        for (l, jet) in self.points.iter().zip(&self.jets) {
            let v = (1.0 + l.norm()).powi(e) * jet[q];
            if v > best.0 || v.is_nan() {
                best = (v, *l);
            }
            let idx = levels.iter().position(|y| (y - l.im.abs()).abs() <= 1e-12 * y.max(1.0)).unwrap_or(0);
            by_level[idx] = by_level[idx].max(v);
        }
        let infinite = !best.0.is_finite() || diverges(&levels[1..], &by_level[1..]);
        Ok(SeminormReport {
            value: if infinite { f64::INFINITY } else { best.0 },
            infinite,
            argmax: best.1,
            samples: self.points.len(),
            grid: format!(
                "{} x {} strip points, |Im| up to {}",
                self.grid.n_re,
                2 * self.grid.n_half_im + 1,
                self.grid.im_max
            ),
        })
    }
}

/// `omega_{n,q}(phi) = sup_{S_r} (1 + |lambda|)^{n - deg p_r} |(d/dlambda)^q [p_r phi]|`.
pub fn omega_seminorm(
    phi: &SpectralFunction,
    n: i32,
    q_degree: usize,
    strip: &StripSpec,
    p_r: &PolynomialSpec,
    grid: &StripGrid,
) -> Result<SeminormReport> {
    StripSamples::new(phi, strip, p_r, grid, q_degree)?.omega(n, q_degree)
}

/// One condition of the spectral Schwartz-space test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: u8,
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchwartzReport {
    pub conditions: Vec<ConditionResult>,
}

impl SchwartzReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn condition(&self, k: u8) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.condition == k)
    }
}

/// Knobs of [`validate_spectral_schwartz`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwartzCheck {
    /// Relative tolerance of the smoothness, holomorphy and symmetry checks.
    pub tol: f64,
    /// Grid of the seminorm condition.
    pub grid: StripGrid,
    pub n_max: i32,
    pub q_max: usize,
    /// Samples per direction for the local checks.
    pub local_samples: usize,
    /// Largest `|Im lambda|` of the local checks.
    pub local_extent: f64,
}

impl Default for SchwartzCheck {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            grid: StripGrid {
                n_re: 8,
                n_half_im: 16,
                im_min: 0.1,
                im_max: 200.0,
            },
            n_max: 4,
            q_max: 4,
            local_samples: 12,
            local_extent: 20.0,
        }
    }
}

fn scale_of(values: &[WVector]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
}

/// Checks the five defining conditions of the even spectral Schwartz space
/// `S(S_r)_e` on samples:
///
/// 1. smoothness on `iR`: Cauchy derivatives agree with differences of the
///    next lower order;
/// 2. holomorphy of `p_r phi` in the interior: Cauchy-Riemann residual;
/// 3. the zeros of `p_r` inside the strip carry simple poles of `phi` with
///    nonzero residue;
/// 4. sampled seminorms `omega_{n,q}` are finite;
/// 5. `phi(-lambda) = c(lambda) phi(lambda)` on `|Re lambda| <= epsilon0`.
pub fn validate_spectral_schwartz(
    g: &SpaceGeometry,
    phi: &SpectralFunction,
    strip: &StripSpec,
    p_r: &PolynomialSpec,
    opts: &SchwartzCheck,
) -> SchwartzReport {
    let mut conditions = Vec::new();
    let ys: Vec<f64> = (0..opts.local_samples)
        .map(|i| -opts.local_extent + 2.0 * opts.local_extent * (i as f64 + 0.37) / opts.local_samples as f64)
        .collect();

    // (1) smoothness on iR
    conditions.push({
        let h = 1e-3;
        let mut worst: f64 = 0.0;
        let mut failure = None;
        let mut scale: f64 = f64::MIN_POSITIVE;
        for &y in &ys {
            let l = Complex64::new(0.0, y);
            let res = (|| -> Result<f64> {
                let jet = spectral_jet(phi, p_r, strip, l, 2)?;
                let up = spectral_jet(phi, p_r, strip, l + Complex64::new(0.0, h), 1)?;
                let dn = spectral_jet(phi, p_r, strip, l - Complex64::new(0.0, h), 1)?;
                scale = scale.max(jet[0].norm()).max(jet[1].norm()).max(jet[2].norm());
                let mut err: f64 = 0.0;
                // d/dnu = i d/dlambda
                for q in 0..2 {
                    let fd = up[q].sub(&dn[q]).scale(Complex64::new(1.0 / (2.0 * h), 0.0));
                    err = err.max(fd.sub(&jet[q + 1].scale(Complex64::new(0.0, 1.0))).norm());
                }
                Ok(err)
            })();
            match res {
                Ok(e) => worst = worst.max(e),
                Err(e) => failure = Some(e.to_string()),
            }
        }
        let rel = worst / scale;
        ConditionResult {
            condition: 1,
            name: "smooth on the imaginary axis".into(),
            passed: failure.is_none() && rel <= opts.tol,
            worst: rel,
            detail: failure.unwrap_or_else(|| format!("{} samples, max relative derivative mismatch {rel:.3e}", ys.len())),
        }
    });

    // (2) holomorphy of p_r phi
    conditions.push({
        let h = 1e-3;
        let mid = 0.5 * (strip.left + strip.right);
        let xs = [strip.left + 0.25 * (strip.right - strip.left), mid, strip.right - 0.25 * (strip.right - strip.left)];
        let f = |z: Complex64| -> Result<WVector> { Ok(phi.eval(z)?.scale(p_r.eval(z))) };
        let mut worst: f64 = 0.0;
        let mut vals = Vec::new();
        let mut failure = None;
        for &x in &xs {
            for &y in &ys {
                let z = Complex64::new(x, y);
                if p_r.roots.iter().chain(phi.poles.iter().map(|p| &p.location)).any(|r| (z - r).norm() < 0.1) {
                    continue;
                }
                let res = (|| -> Result<(f64, WVector)> {
                    let dx = f(z + h)?.sub(&f(z - h)?);
                    let dy = f(z + Complex64::new(0.0, h))?.sub(&f(z - Complex64::new(0.0, h))?);
                    // holomorphic: d/dy = i d/dx
                    let r = dy.sub(&dx.scale(Complex64::new(0.0, 1.0))).norm() / (2.0 * h);
                    Ok((r, dx.scale(Complex64::new(1.0 / (2.0 * h), 0.0))))
                })();
                match res {
                    Ok((r, d)) => {
                        worst = worst.max(r);
                        vals.push(d);
                    }
                    Err(e) => failure = Some(e.to_string()),
                }
            }
        }
        let rel = worst / scale_of(&vals);
        ConditionResult {
            condition: 2,
            name: "p_r phi holomorphic in the strip".into(),
            passed: failure.is_none() && rel <= 1e3 * opts.tol,
            worst: rel,
            detail: failure.unwrap_or_else(|| format!("Cauchy-Riemann residual {rel:.3e} relative to |d/dlambda|")),
        }
    });

    // (3) simple poles at the zeros of p_r
    conditions.push({
        let mut ok = true;
        let mut notes = Vec::new();
        let mut worst: f64 = 0.0;
        for &z in p_r.roots.iter().filter(|z| strip.contains(**z)) {
            let res = (|| -> Result<(f64, f64, f64)> {
                let mut r1 = Vec::new();
                let mut r2 = Vec::new();
                let mut m2 = Vec::new();
                for w in 0..phi.orbits() {
                    let c1 = ContourSpec::new(z, 0.1);
                    let c2 = ContourSpec::new(z, 0.2);
                    r1.push(contour_residue(|l| phi.eval_component(w, l), &c1)?);
                    r2.push(contour_residue(|l| phi.eval_component(w, l), &c2)?);
                    m2.push(contour_residue(|l| Ok((l - z) * phi.eval_component(w, l)?), &c1)?);
                }
                let n1 = WVector::new(r1.clone()).norm();
                let spread = WVector::new(r1).sub(&WVector::new(r2)).norm();
                Ok((n1, spread, WVector::new(m2).norm()))
            })();
            match res {
                Ok((n1, spread, second)) => {
                    let size = n1.max(second);
                    let simple = second <= opts.tol.sqrt() * size && spread <= opts.tol.sqrt() * size;
                    let nonzero = n1 > 0.0;
                    worst = worst.max(second / size.max(f64::MIN_POSITIVE));
                    if !(simple && nonzero) {
                        ok = false;
                    }
                    notes.push(format!("at {z}: residue {n1:.3e}, second moment {second:.3e}"));
                }
                Err(e) => {
                    ok = false;
                    notes.push(format!("at {z}: {e}"));
                }
            }
        }
        ConditionResult {
            condition: 3,
            name: "simple poles at -L_r with nonzero residues".into(),
            passed: ok,
            worst,
            detail: if notes.is_empty() { "no poles in the strip".into() } else { notes.join("; ") },
        }
    });

    // (4) finite seminorms
    conditions.push(match StripSamples::new(phi, strip, p_r, &opts.grid, opts.q_max) {
        Ok(s) => {
            let mut bad = Vec::new();
            let mut worst: f64 = 0.0;
            for n in 0..=opts.n_max {
                for q in 0..=opts.q_max {
                    match s.omega(n, q) {
                        Ok(r) if r.is_finite() => worst = worst.max(r.value),
                        _ => bad.push(format!("({n},{q})")),
                    }
                }
            }
            ConditionResult {
                condition: 4,
                name: "finite omega seminorms".into(),
                passed: bad.is_empty(),
                worst,
                detail: if bad.is_empty() {
                    format!("all omega_(n,q), n <= {}, q <= {} finite", opts.n_max, opts.q_max)
                } else {
                    format!("divergent: {}", bad.join(" "))
                },
            }
        }
        Err(e) => ConditionResult {
            condition: 4,
            name: "finite omega seminorms".into(),
            passed: false,
            worst: f64::INFINITY,
            detail: e.to_string(),
        },
    });

    // (5) symmetry
    conditions.push({
        let eps = strip.epsilon0.min(strip.right).min(-strip.left);
        let xs = [-eps, -0.5 * eps, 0.0, 0.5 * eps, eps];
        let mut worst: f64 = 0.0;
        let mut vals = Vec::new();
        let mut failure = None;
        for &x in &xs {
            for &y in &ys {
                let l = Complex64::new(x, y);
                let res = (|| -> Result<(f64, WVector)> {
                    let a = phi.eval(-l)?;
                    let b = phi.eval(l)?.scale(c_function(g, l)?);
                    Ok((a.sub(&b).norm(), a))
                })();
                match res {
                    Ok((d, a)) => {
                        worst = worst.max(d);
                        vals.push(a);
                    }
                    Err(Error::Pole { .. }) => {}
                    Err(e) => failure = Some(e.to_string()),
                }
            }
        }
        let rel = worst / scale_of(&vals);
        ConditionResult {
            condition: 5,
            name: "phi(-lambda) = c(lambda) phi(lambda)".into(),
            passed: failure.is_none() && rel <= opts.tol,
            worst: rel,
            detail: failure.unwrap_or_else(|| format!("max relative defect {rel:.3e} on |Re lambda| <= {eps}")),
        }
    });

    SchwartzReport { conditions }
}
