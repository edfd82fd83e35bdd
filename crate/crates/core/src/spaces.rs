//! Root-multiplicity data and the spectral geometry derived from it.
//!
//! A split-rank-one symmetric space enters every computation only through
//! its four root multiplicities `m1p, m1m, m2p, m2m` and the number of open
//! orbits `|W|`. From those we derive `rho`, the radial Jacobian, the
//! discrete pole set `L`, the strip exponent `gamma_r` and the polynomial
//! regularisers used to cancel poles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for deciding that `gamma_r` sits on a pole.
pub const SINGULAR_R_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiplicityDatum {
    pub m1p: u32,
    pub m1m: u32,
    pub m2p: u32,
    pub m2m: u32,
    /// Number of open orbits, `|W|`, either 1 or 2.
    pub orbits: u8,
}

impl MultiplicityDatum {
    pub fn new(m1p: u32, m1m: u32, m2p: u32, m2m: u32, orbits: u8) -> Result<Self> {
        let m = Self {
            m1p,
            m1m,
            m2p,
            m2m,
            orbits,
        };
        m.validate()?;
        Ok(m)
    }

    /// Checks the structural constraints on split-rank-one multiplicities.
    pub fn validate(&self) -> Result<()> {
        if self.m1p + self.m1m == 0 {
            return Err(Error::InvalidMultiplicities {
                rule: "m1p + m1m > 0",
            });
        }
        if self.m2m > 0 && self.m1p != self.m1m {
            return Err(Error::InvalidMultiplicities {
                rule: "if m2m > 0 then m1p = m1m",
            });
        }
        if self.orbits != 1 && self.orbits != 2 {
            return Err(Error::InvalidMultiplicities {
                rule: "orbit count |W| must be 1 or 2",
            });
        }
        Ok(())
    }

    pub fn m1(&self) -> u32 {
        self.m1p + self.m1m
    }

    pub fn m2(&self) -> u32 {
        self.m2p + self.m2m
    }

    /// The pair is Riemannian exactly when `m1m = m2m = 0`.
    pub fn is_riemannian(&self) -> bool {
        self.m1m == 0 && self.m2m == 0
    }
}

/// Derived data of a validated multiplicity datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceGeometry {
    pub rho: f64,
    pub multiplicities: MultiplicityDatum,
}

pub fn derive_geometry(m: MultiplicityDatum) -> Result<SpaceGeometry> {
    m.validate()?;
    let rho = 0.5 * (m.m1() as f64 + 2.0 * m.m2() as f64);
    Ok(SpaceGeometry {
        rho,
        multiplicities: m,
    })
}

impl SpaceGeometry {
    pub fn from_multiplicities(m1p: u32, m1m: u32, m2p: u32, m2m: u32, orbits: u8) -> Result<Self> {
        derive_geometry(MultiplicityDatum::new(m1p, m1m, m2p, m2m, orbits)?)
    }

    pub fn orbits(&self) -> usize {
        self.multiplicities.orbits as usize
    }

    /// `m1p + m2p + 1`, twice the third hypergeometric parameter of `E°`.
    pub fn mu(&self) -> f64 {
        let m = &self.multiplicities;
        (m.m1p + m.m2p + 1) as f64
    }

    /// Radial density `J(t)` of the invariant measure.
    pub fn jacobian(&self, t: f64) -> f64 {
        let m = &self.multiplicities;
        let t = t.abs();
        t.sinh().powi(m.m1p as i32)
            * t.cosh().powi(m.m1m as i32)
            * (2.0 * t).sinh().powi(m.m2p as i32)
            * (2.0 * t).cosh().powi(m.m2m as i32)
    }

    /// `log J(t)`, stable for large `t`.
    pub fn log_jacobian(&self, t: f64) -> f64 {
        let m = &self.multiplicities;
        let ln_sinh = |x: f64| x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2;
        let ln_cosh = |x: f64| x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2;
        let mut acc = 0.0;
        if m.m1p > 0 {
            acc += m.m1p as f64 * ln_sinh(t);
        }
        if m.m2p > 0 {
            acc += m.m2p as f64 * ln_sinh(2.0 * t);
        }
        acc + m.m1m as f64 * ln_cosh(t) + m.m2m as f64 * ln_cosh(2.0 * t)
    }

    /// First-order coefficient of the radial Laplacian,
    /// `m1p coth t + m1m tanh t + 2 m2p coth 2t + 2 m2m tanh 2t`.
    pub fn drift(&self, t: f64) -> f64 {
        let m = &self.multiplicities;
        let mut a = 0.0;
        if m.m1p > 0 {
            a += m.m1p as f64 / t.tanh();
        }
        if m.m1m > 0 {
            a += m.m1m as f64 * t.tanh();
        }
        if m.m2p > 0 {
            a += 2.0 * m.m2p as f64 / (2.0 * t).tanh();
        }
        if m.m2m > 0 {
            a += 2.0 * m.m2m as f64 * (2.0 * t).tanh();
        }
        a
    }

    /// Coefficient of `e^{-2jt}` (j >= 1) in `drift(t) - 2 rho`.
    pub fn drift_coefficient(&self, j: usize) -> f64 {
        let m = &self.multiplicities;
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut b = 2.0 * m.m1p as f64 + 2.0 * m.m1m as f64 * sign;
        if j.is_multiple_of(2) {
            let sign2 = if (j / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            b += 4.0 * m.m2p as f64 + 4.0 * m.m2m as f64 * sign2;
        }
        b
    }

    pub fn gamma_r(&self, r: f64) -> Result<f64> {
        gamma_r(self, r)
    }

    pub fn pole_set(&self) -> PoleSet {
        pole_set(self)
    }

    /// Eigenvalue `lambda^2 - rho^2` of the radial Laplacian.
    pub fn eigenvalue(&self, lambda: Complex64) -> Complex64 {
        lambda * lambda - self.rho * self.rho
    }
}

pub fn jacobian(g: &SpaceGeometry, t: f64) -> f64 {
    g.jacobian(t)
}

/// `gamma_r = (2/r - 1) rho` for `0 < r <= 2`.
pub fn gamma_r(g: &SpaceGeometry, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 2.0) {
        return Err(Error::OutOfRange {
            what: "r (expected 0 < r <= 2)",
            value: r,
        });
    }
    Ok((2.0 / r - 1.0) * g.rho)
}

/// The finite set `L` of discrete-spectrum parameters, in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub lambdas: Vec<f64>,
    pub rho: f64,
}

impl PoleSet {
    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn split(&self, r: f64) -> Result<PoleSplit> {
        split_pole_set(self, r)
    }
}

pub fn pole_set(g: &SpaceGeometry) -> PoleSet {
    let m = &g.multiplicities;
    let top = g.rho - 1.0 - m.m1p as f64 - m.m2p as f64;
    let lambdas = (0..)
        .map(|k| top - 2.0 * k as f64)
        .take_while(|&l| l > 0.0)
        .collect();
    PoleSet {
        lambdas,
        rho: g.rho,
    }
}

/// Indices into a [`PoleSet`] for the parts below and above `gamma_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSplit {
    pub gamma: f64,
    /// `L_r`: entries strictly below `gamma_r`.
    pub below: Vec<usize>,
    /// `L_r^c`: entries strictly above `gamma_r`.
    pub above: Vec<usize>,
}

pub fn split_pole_set(p: &PoleSet, r: f64) -> Result<PoleSplit> {
    if !(r > 0.0 && r <= 2.0) {
        return Err(Error::OutOfRange {
            what: "r (expected 0 < r <= 2)",
            value: r,
        });
    }
    let gamma = (2.0 / r - 1.0) * p.rho;
    let mut below = Vec::new();
    let mut above = Vec::new();
    for (k, &l) in p.lambdas.iter().enumerate() {
        if (l - gamma).abs() <= SINGULAR_R_TOL {
            return Err(Error::SingularExponent {
                r,
                gamma,
                lambda_k: l,
            });
        }
        if l < gamma {
            below.push(k);
        } else {
            above.push(k);
        }
    }
    Ok(PoleSplit {
        gamma,
        below,
        above,
    })
}

/// A polynomial stored by its roots: `leading * prod (x - root)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    pub roots: Vec<Complex64>,
    pub leading: f64,
}

impl PolynomialSpec {
    pub fn constant(c: f64) -> Self {
        Self {
            roots: Vec::new(),
            leading: c,
        }
    }

    pub fn monic(roots: Vec<Complex64>) -> Self {
        Self {
            roots,
            leading: 1.0,
        }
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.roots
            .iter()
            .fold(Complex64::new(self.leading, 0.0), |acc, r| acc * (x - r))
    }

    /// Coefficients in ascending order, expanded from the roots.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(self.leading, 0.0)];
        for r in &self.roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        c
    }
}

/// `p_R`: cancels every pole of `E°(lambda)` with `Re lambda >= -R`.
pub fn poly_p_r(g: &SpaceGeometry, big_r: f64) -> PolynomialSpec {
    let mut roots = Vec::new();
    let mut k = 0.0;
    while g.rho + 2.0 * k <= big_r {
        roots.push(Complex64::new(-g.rho - 2.0 * k, 0.0));
        k += 1.0;
    }
    let shift = g.mu() - g.rho;
    let mut k = 0.0;
    while shift + 2.0 * k <= big_r {
        roots.push(Complex64::new(-shift - 2.0 * k, 0.0));
        k += 1.0;
    }
    PolynomialSpec::monic(roots)
}

/// `q_R(lambda) = prod_{0 < k <= R} (2 lambda - k)`, stored as roots `k/2`
/// with leading coefficient `2^{#roots}`.
pub fn poly_q_r(big_r: f64) -> PolynomialSpec {
    let n = if big_r >= 1.0 { big_r.floor() as usize } else { 0 };
    PolynomialSpec {
        roots: (1..=n).map(|k| Complex64::new(k as f64 / 2.0, 0.0)).collect(),
        leading: 2f64.powi(n as i32),
    }
}

/// `pi(s) = prod_{lambda_k in L} (s - lambda_k^2 + rho^2)` in the eigenvalue
/// variable `s`, so that `pi(lambda^2 - rho^2)` vanishes at `lambda = ±lambda_k`.
pub fn poly_pi(p: &PoleSet) -> PolynomialSpec {
    PolynomialSpec::monic(
        p.lambdas
            .iter()
            .map(|l| Complex64::new(l * l - p.rho * p.rho, 0.0))
            .collect(),
    )
}

/// Strip polynomial `p_r` with zeros exactly at `-lambda_k`, `lambda_k in L_r`.
pub fn poly_p_strip(p: &PoleSet, r: f64) -> Result<PolynomialSpec> {
    let split = split_pole_set(p, r)?;
    Ok(PolynomialSpec::monic(
        split
            .below
            .iter()
            .map(|&k| Complex64::new(-p.lambdas[k], 0.0))
            .collect(),
    ))
}

/// Entry of the preset catalogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub multiplicities: MultiplicityDatum,
    pub note: String,
}

/// Riemannian real hyperbolic space `H^n`: `m1p = n - 1`, one orbit.
pub fn riemannian_hyperbolic(n: u32) -> Result<Preset> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "hyperbolic dimension n (expected n >= 2)",
            value: n as f64,
        });
    }
    Ok(Preset {
        name: format!("riemannian-H{n}"),
        multiplicities: MultiplicityDatum::new(n - 1, 0, 0, 0, 1)?,
        note: format!(
            "SO_e({n},1)/SO({n}); m1p = n-1, all other multiplicities zero; |W| = 1 (H = K)"
        ),
    })
}

/// `SO_e(p,q)/SO_e(p-1,q)`: `m1p = q - 1`, `m1m = p - 1`.
///
/// In the hyperboloid model the sign of the time-like coordinate is a
/// K-invariant only for `q = 1`, which gives two orbits; otherwise one.
pub fn real_hyperbolic(p: u32, q: u32) -> Result<Preset> {
    if p < 2 || q < 1 {
        return Err(Error::OutOfRange {
            what: "real hyperbolic (p, q) (expected p > 1, q > 0)",
            value: if p < 2 { p as f64 } else { q as f64 },
        });
    }
    let orbits = if q == 1 { 2 } else { 1 };
    Ok(Preset {
        name: format!("real-hyperbolic-p{p}-q{q}"),
        multiplicities: MultiplicityDatum::new(q - 1, p - 1, 0, 0, orbits)?,
        note: format!(
            "SO_e({p},{q})/SO_e({},{q}); m1p = q-1, m1m = p-1 so that rho = (p+q-2)/2 and L = {{rho-q-2k > 0}}; |W| = {orbits}",
            p - 1
        ),
    })
}

/// Fixed catalogue shipped with the crate.
pub fn preset_catalogue() -> Vec<Preset> {
    let mut out = Vec::new();
    for n in [2, 3, 4, 5, 6] {
        out.push(riemannian_hyperbolic(n).expect("valid preset"));
    }
    for (p, q) in [(3, 1), (4, 3), (5, 1), (7, 1), (9, 1), (4, 2), (6, 2)] {
        out.push(real_hyperbolic(p, q).expect("valid preset"));
    }
    out
}

/// Resolves `riemannian-H<n>` and `real-hyperbolic-p<p>-q<q>` names.
pub fn preset(name: &str) -> Result<Preset> {
    let bad = || Error::Unsupported(format!("unknown preset `{name}`"));
    if let Some(n) = name.strip_prefix("riemannian-H") {
        let n: u32 = n.parse().map_err(|_| bad())?;
        return riemannian_hyperbolic(n);
    }
    if let Some(rest) = name.strip_prefix("real-hyperbolic-p") {
        let (p, q) = rest.split_once("-q").ok_or_else(bad)?;
        let p: u32 = p.parse().map_err(|_| bad())?;
        let q: u32 = q.parse().map_err(|_| bad())?;
        return real_hyperbolic(p, q);
    }
    Err(bad())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(m1p: u32, m1m: u32, m2p: u32, m2m: u32) -> SpaceGeometry {
        SpaceGeometry::from_multiplicities(m1p, m1m, m2p, m2m, 1).unwrap()
    }

    #[test]
    fn rho_examples() {
        assert_eq!(geom(2, 0, 0, 0).rho, 1.0);
        assert_eq!(geom(0, 8, 0, 0).rho, 4.0);
        // SO(4,3)/SO(3,3): (p+q-2)/2
        assert_eq!(geom(2, 3, 0, 0).rho, 2.5);
    }

    #[test]
    fn invalid_multiplicities_name_the_rule() {
        let e = MultiplicityDatum::new(0, 0, 1, 0, 1).unwrap_err();
        assert_eq!(e, Error::InvalidMultiplicities { rule: "m1p + m1m > 0" });
        let e = MultiplicityDatum::new(2, 1, 0, 1, 1).unwrap_err();
        assert!(matches!(
            e,
            Error::InvalidMultiplicities { rule } if rule.contains("m2m > 0")
        ));
        assert!(MultiplicityDatum::new(1, 1, 0, 1, 3).is_err());
    }

    #[test]
    fn riemannian_flag() {
        assert!(geom(2, 0, 1, 0).multiplicities.is_riemannian());
        assert!(!geom(2, 1, 0, 0).multiplicities.is_riemannian());
    }

    #[test]
    fn jacobian_values() {
        let g = geom(2, 0, 0, 0);
        assert_eq!(g.jacobian(0.0), 0.0);
        assert!((g.jacobian(1.0) - 1f64.sinh().powi(2)).abs() < 1e-15);
        assert!((g.jacobian(1.0) - 1.381098).abs() < 1e-6);
        let g = geom(1, 1, 1, 1);
        for t in [0.1f64, 0.7, 2.3] {
            let want = 0.5 * (2.0 * t).sinh().powi(2) * (2.0 * t).cosh();
            assert!((g.jacobian(t) - want).abs() < 1e-12 * want);
            assert!((g.log_jacobian(t) - want.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_r_values() {
        let g = geom(0, 8, 0, 0);
        assert_eq!(g.gamma_r(2.0).unwrap(), 0.0);
        assert_eq!(g.gamma_r(1.0).unwrap(), g.rho);
        assert!((g.gamma_r(4.0 / 3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(g.gamma_r(0.0).is_err());
        assert!(g.gamma_r(2.5).is_err());
    }

    #[test]
    fn pole_sets() {
        assert!(geom(2, 0, 0, 0).pole_set().is_empty());
        assert!(geom(2, 3, 0, 0).pole_set().is_empty());
        assert_eq!(geom(0, 8, 0, 0).pole_set().lambdas, vec![3.0, 1.0]);
    }

    #[test]
    fn split_examples() {
        let p = geom(0, 8, 0, 0).pole_set();
        let s = p.split(4.0 / 3.0).unwrap();
        assert_eq!((s.below, s.above), (vec![1], vec![0]));
        let s = p.split(2.0).unwrap();
        assert_eq!((s.below.len(), s.above), (0, vec![0, 1]));
        let s = p.split(0.9).unwrap();
        assert_eq!((s.below, s.above.len()), (vec![0, 1], 0));
        // gamma_r = 3 at r = 8/7, gamma_r = 1 at r = 8/5.
        assert!(matches!(
            p.split(8.0 / 7.0),
            Err(Error::SingularExponent { .. })
        ));
        assert!(p.split(1.6).is_err());
    }

    #[test]
    fn p_r_examples() {
        let p = poly_p_r(&geom(0, 8, 0, 0), 5.0);
        let roots: Vec<f64> = p.roots.iter().map(|r| r.re).collect();
        assert_eq!(roots, vec![-4.0, 3.0, 1.0, -1.0, -3.0, -5.0]);
        let p = poly_p_r(&geom(2, 0, 0, 0), 0.5);
        assert_eq!(p.degree(), 0);
        assert_eq!(p.eval(Complex64::new(3.0, 1.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn q_r_examples() {
        let q = poly_q_r(2.0);
        let x = Complex64::new(0.3, 0.2);
        let want = (2.0 * x - 1.0) * (2.0 * x - 2.0);
        assert!((q.eval(x) - want).norm() < 1e-15);
        assert_eq!(poly_q_r(0.5).degree(), 0);
        let q = poly_q_r(3.5);
        let want = (2.0 * x - 1.0) * (2.0 * x - 2.0) * (2.0 * x - 3.0);
        assert!((q.eval(x) - want).norm() < 1e-14);
        for r in &q.roots {
            assert_eq!(q.eval(*r), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn pi_examples() {
        let g = geom(0, 8, 0, 0);
        assert_eq!(poly_pi(&geom(2, 0, 0, 0).pole_set()).degree(), 0);
        let pi = poly_pi(&g.pole_set());
        let s = Complex64::new(0.4, -1.1);
        assert!((pi.eval(s) - (s + 7.0) * (s + 15.0)).norm() < 1e-13);
        for l in [3.0, 1.0, -3.0, -1.0] {
            let lam = Complex64::new(l, 0.0);
            assert_eq!(pi.eval(g.eigenvalue(lam)).norm(), 0.0);
        }
        let lam = Complex64::new(0.2, 2.0);
        let want = (lam * lam - 9.0) * (lam * lam - 1.0);
        assert!((pi.eval(g.eigenvalue(lam)) - want).norm() < 1e-12);
    }

    #[test]
    fn coefficients_expand_roots() {
        let p = PolynomialSpec::monic(vec![Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0)]);
        let c = p.coefficients();
        assert_eq!(c, vec![(-2.0).into(), 1.0.into(), 1.0.into()]);
    }

    #[test]
    fn drift_series_matches_drift() {
        let g = geom(3, 2, 1, 0);
        let t: f64 = 1.7;
        let q = (-2.0 * t).exp();
        let series: f64 = 2.0 * g.rho
            + (1..200)
                .map(|j| g.drift_coefficient(j) * q.powi(j as i32))
                .sum::<f64>();
        assert!((series - g.drift(t)).abs() < 1e-12);
        let g = SpaceGeometry::from_multiplicities(2, 2, 1, 3, 2).unwrap();
        let series: f64 = 2.0 * g.rho
            + (1..200)
                .map(|j| g.drift_coefficient(j) * q.powi(j as i32))
                .sum::<f64>();
        assert!((series - g.drift(t)).abs() < 1e-12);
    }

    #[test]
    fn presets_resolve() {
        let p = preset("real-hyperbolic-p9-q1").unwrap();
        assert_eq!(
            (p.multiplicities.m1p, p.multiplicities.m1m, p.multiplicities.orbits),
            (0, 8, 2)
        );
        let p = preset("riemannian-H3").unwrap();
        assert_eq!(p.multiplicities.m1p, 2);
        assert!(preset("complex-hyperbolic-p2-q1").is_err());
        for p in preset_catalogue() {
            let g = derive_geometry(p.multiplicities).unwrap();
            if p.name.starts_with("real-hyperbolic") {
                let m = p.multiplicities;
                let (pp, qq) = (m.m1m + 1, m.m1p + 1);
                assert_eq!(g.rho, (pp + qq - 2) as f64 / 2.0);
                if pp <= qq + 2 {
                    assert!(g.pole_set().is_empty(), "{}", p.name);
                }
            }
        }
    }
}
