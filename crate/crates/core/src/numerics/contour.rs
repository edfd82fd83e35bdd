//! Trapezoid rules on circles: residues, Cauchy derivatives and mean values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: Complex64,
    pub radius: f64,
    pub node_count: usize,
    /// Agreement required between successive node doublings, relative to
    /// the largest sampled `|h (lambda - center)|`.
    pub tol: f64,
}

impl ContourSpec {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self {
            center,
            radius,
            node_count: 32,
            tol: 1e-11,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::OutOfRange {
                what: "contour radius",
                value: self.radius,
            });
        }
        if self.node_count < 16 {
            return Err(Error::OutOfRange {
                what: "contour node count (minimum 16)",
                value: self.node_count as f64,
            });
        }
        Ok(())
    }
}

const MAX_NODES: usize = 4096;

fn node(c: &ContourSpec, j: usize, n: usize) -> Complex64 {
    c.center + Complex64::from_polar(c.radius, 2.0 * PI * j as f64 / n as f64)
}

/// `(1 / 2 pi i) oint h` over the counterclockwise circle, refining by node
/// doubling until two successive rules agree.
pub fn contour_residue<F>(mut h: F, c: &ContourSpec) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    c.validate()?;
    let mut n = c.node_count;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut scale: f64 = 0.0;
    for j in 0..n {
        let z = node(c, j, n);
        let v = h(z)? * (z - c.center);
        scale = scale.max(v.norm());
        sum += v;
    }
    let mut prev = sum / n as f64;
    while n < MAX_NODES {
        // odd nodes of the doubled rule
        for j in 0..n {
            let z = node(c, 2 * j + 1, 2 * n);
            let v = h(z)? * (z - c.center);
            scale = scale.max(v.norm());
            sum += v;
        }
        n *= 2;
        let next = sum / n as f64;
        if (next - prev).norm() <= c.tol * scale.max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        what: "contour residue",
        estimate: prev,
        error_bound: scale,
    })
}

/// `n`-th derivative at the center by the Cauchy integral formula with `nodes` points.
pub fn cauchy_derivative<F>(mut f: F, center: Complex64, radius: f64, order: usize, nodes: usize) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let th = 2.0 * PI * j as f64 / nodes as f64;
        let e = Complex64::from_polar(1.0, th);
        acc += f(center + e * radius)? * e.powi(-(order as i32));
    }
    let fact: f64 = (1..=order).map(|k| k as f64).product();
    Ok(acc * fact / (nodes as f64 * radius.powi(order as i32)))
}

/// Value of an analytic function at `center` from its mean over a circle;
/// used at removable singularities where direct evaluation fails.
pub fn circle_mean<F>(mut f: F, center: Complex64, radius: f64, nodes: usize) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let th = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
        acc += f(center + Complex64::from_polar(radius, th))?;
    }
    Ok(acc / nodes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gamma::gamma;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn simple_pole() {
        let r = contour_residue(|l| Ok(1.0 / (l + 1.0)), &ContourSpec::new(c(-1.0, 0.0), 0.1)).unwrap();
        assert!((r - 1.0).norm() < 1e-14);
    }

    #[test]
    fn analytic_gives_zero() {
        let r = contour_residue(|l| Ok(l.exp() * l.sin()), &ContourSpec::new(c(0.3, 0.2), 0.5)).unwrap();
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn gamma_at_origin() {
        let r = contour_residue(gamma, &ContourSpec::new(c(0.0, 0.0), 0.3)).unwrap();
        assert!((r - 1.0).norm() < 1e-12);
    }

    #[test]
    fn radius_independence() {
        let h = |l: Complex64| Ok(l.cos() / ((l + 2.0) * (l - 3.0)));
        for rad in [0.2, 0.4, 0.8] {
            let a = contour_residue(h, &ContourSpec::new(c(-2.0, 0.0), rad)).unwrap();
            let b = contour_residue(h, &ContourSpec::new(c(-2.0, 0.0), 2.0 * rad)).unwrap();
            assert!((a - b).norm() < 1e-9);
            assert!((a - (-2f64).cos() / -5.0).norm() < 1e-12);
        }
        let a = contour_residue(gamma, &ContourSpec::new(c(-2.0, 0.0), 0.2)).unwrap();
        let b = contour_residue(gamma, &ContourSpec::new(c(-2.0, 0.0), 0.4)).unwrap();
        assert!((a - b).norm() < 1e-9 && (a - 0.5).norm() < 1e-11);
    }

    #[test]
    fn derivative_and_mean() {
        let d = cauchy_derivative(|z| Ok(z.exp()), c(0.5, 0.0), 0.1, 3, 32).unwrap();
        assert!((d - 0.5f64.exp()).norm() < 1e-11);
        let m = circle_mean(|z| Ok(z.sin() / z), c(0.0, 0.0), 0.2, 16).unwrap();
        assert!((m - 1.0).norm() < 1e-15);
    }

    #[test]
    fn rejects_small_node_count() {
        let mut spec = ContourSpec::new(c(0.0, 0.0), 1.0);
        spec.node_count = 8;
        assert!(contour_residue(Ok, &spec).is_err());
    }
}
