//! Gauss-Legendre rules, adaptive Gauss-Kronrod integration on finite
//! intervals, half-line and vertical-line integrals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Half-line cutoff `T` or spectral cutoff `Lambda`; `inf` means none.
    pub truncation: f64,
    /// Maximum number of interval bisections.
    pub refinement_limit: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            truncation: f64::INFINITY,
            refinement_limit: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_truncation(mut self, truncation: f64) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::OutOfRange {
                what: "rel_tol",
                value: self.rel_tol,
            });
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::OutOfRange {
                what: "abs_tol",
                value: self.abs_tol,
            });
        }
        if !(self.truncation > 0.0) {
            return Err(Error::OutOfRange {
                what: "truncation",
                value: self.truncation,
            });
        }
        Ok(())
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// A fixed composite Gauss-Legendre rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// Panels of width at most `panel` with `order` nodes each.
    pub fn new(a: f64, b: f64, panel: f64, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let count = (((b - a) / panel).ceil() as usize).max(1);
        let h = (b - a) / count as f64;
        let mut nodes = Vec::with_capacity(count * order);
        let mut weights = Vec::with_capacity(count * order);
        for p in 0..count {
            let lo = a + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    /// Concatenation of rules on adjacent intervals.
    pub fn join(parts: &[CompositeRule]) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in parts {
            nodes.extend_from_slice(&p.nodes);
            weights.extend_from_slice(&p.weights);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7-K15 panel: (Kronrod estimate, |K15 - G7|).
pub fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive G7-K15 integration of a complex integrand over the
/// union of the given breakpoint intervals.
pub fn integrate_adaptive<F>(mut f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            total += v;
            err += e;
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value: v,
                err: e,
            });
        }
    }
    let mut splits = 0;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.norm());
        if err <= target {
            return Ok(total);
        }
        if splits >= spec.refinement_limit {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                estimate: total,
                error_bound: err,
            });
        }
        let Some(p) = heap.pop() else {
            return Ok(total);
        };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // interval exhausted at machine resolution
            return Err(Error::NonConvergence {
                what: "adaptive quadrature (interval underflow)",
                estimate: total,
                error_bound: err,
            });
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.err;
        heap.push(Panel {
            a: p.a,
            b: m,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: m,
            b: p.b,
            value: v2,
            err: e2,
        });
        splits += 1;
    }
}

/// `int_0^inf g(t) dt` for an integrand decaying at least like
/// `e^{-decay_rate t}`. The integral is accumulated over successive blocks
/// until the decay-based tail bound drops below `abs_tol / 10` (or a
/// relative equivalent), never past `spec.truncation`. Integrands that
/// vanish on a leading stretch should pass their support end as truncation.
pub fn integrate_halfline<F>(mut g: F, decay_rate: f64, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    spec.validate()?;
    if !(decay_rate > 0.0) {
        return Err(Error::OutOfRange {
            what: "decay rate hint",
            value: decay_rate,
        });
    }
    let block = (4.0 / decay_rate).clamp(0.5, 10.0);
    let mut total = Complex64::new(0.0, 0.0);
    let mut lo = 0.0;
    let mut first = true;
    while lo < spec.truncation {
        let hi = (lo + block).min(spec.truncation);
        let breaks: Vec<f64> = if first {
            // grade toward the origin where J(t) vanishes to high order
            let mut b = vec![0.0];
            let mut x = hi * 1e-3;
            while x < hi {
                b.push(x);
                x *= 4.0;
            }
            b.push(hi);
            b
        } else {
            vec![lo, 0.5 * (lo + hi), hi]
        };
        first = false;
        let part = integrate_adaptive(&mut g, &breaks, spec)?;
        total += part;
        // envelope at the block end from three samples, robust to zeros of
        // oscillatory integrands
        let edge = (0..3)
            .map(|k| {
                let back = k as f64 * block / 3.0;
                g(hi - back).norm() * (-decay_rate * back).exp()
            })
            .fold(0.0, f64::max);
        let tail = edge / decay_rate;
        let target = spec.abs_tol.max(spec.rel_tol * total.norm()) / 10.0;
        if tail <= target && part.norm() <= 10.0 * target {
            break;
        }
        lo = hi;
    }
    Ok(total)
}

/// `int_R h(x0 + i nu) dnu`, oriented from `-inf` to `+inf`. With finite
/// `spec.truncation` the range is `[-Lambda, Lambda]`; otherwise the real
/// line is mapped onto `(-1, 1)` by `nu = s / (1 - s^2)`.
pub fn integrate_vertical_line<F>(mut h: F, x0: f64, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Complex64,
{
    spec.validate()?;
    if spec.truncation.is_finite() {
        let l = spec.truncation;
        let n = ((2.0 * l).ceil() as usize).clamp(4, 4096);
        let breaks: Vec<f64> = (0..=n).map(|k| -l + 2.0 * l * k as f64 / n as f64).collect();
        integrate_adaptive(|nu| h(Complex64::new(x0, nu)), &breaks, spec)
    } else {
        let breaks: Vec<f64> = (0..=16).map(|k| -1.0 + k as f64 / 8.0).collect();
        integrate_adaptive(
            |s| {
                let d = 1.0 - s * s;
                if d <= 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let nu = s / d;
                let jac = (1.0 + s * s) / (d * d);
                let v = h(Complex64::new(x0, nu)) * jac;
                if v.is_finite() {
                    v
                } else {
                    Complex64::new(0.0, 0.0)
                }
            },
            &breaks,
            spec,
        )
    }
}
