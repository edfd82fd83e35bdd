//! JSON run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use rank1sft::eigenfunctions::WVector;
use rank1sft::numerics::quadrature::QuadratureSpec;
use rank1sft::spaces::{preset, Preset};
use rank1sft::transform::RadialFunction;
use rank1sft::{MultiplicityDatum, SpaceGeometry};

/// Orbit count assumed for raw multiplicities without an explicit value.
pub const DEFAULT_ORBITS: u8 = 2;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceConfig,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_epsilon0")]
    pub epsilon0: f64,
    /// Degree parameter `R` of the regularising polynomials and bound suites.
    #[serde(default = "default_big_r")]
    pub big_r: f64,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub function: FunctionConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_r() -> f64 {
    2.0
}

fn default_epsilon0() -> f64 {
    rank1sft::schwartz::DEFAULT_EPSILON0
}

fn default_big_r() -> f64 {
    2.0
}

/// Either `preset` or the four multiplicities (with optional `orbits`).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m1p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m1m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbits: Option<u8>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    /// Half-line or spectral cutoff; absent means none.
    pub truncation: Option<f64>,
    pub refinement_limit: Option<usize>,
}

impl QuadratureConfig {
    pub fn spec(&self) -> QuadratureSpec {
        let d = QuadratureSpec::default();
        QuadratureSpec {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            truncation: self.truncation.unwrap_or(d.truncation),
            refinement_limit: self.refinement_limit.unwrap_or(d.refinement_limit),
        }
    }
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    fn validate(&self, what: &str) -> anyhow::Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            bail!("grids.{what}: start and stop must be finite");
        }
        if self.count == 0 {
            bail!("grids.{what}: count must be positive");
        }
        Ok(())
    }
}

/// Spectral points: the product `re x im`, or an explicit list of `[re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub re: Range,
    pub im: Range,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            re: Range::new(0.0, 0.0, 1),
            im: Range::new(0.5, 10.0, 20),
            points: None,
        }
    }
}

impl LambdaGrid {
    pub fn points(&self) -> Vec<Complex64> {
        if let Some(ps) = &self.points {
            return ps.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        }
        let mut out = Vec::new();
        for re in self.re.points() {
            for im in self.im.points() {
                out.push(Complex64::new(re, im));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default)]
    pub lambda: LambdaGrid,
    #[serde(default = "default_t")]
    pub t: Range,
}

fn default_t() -> Range {
    Range::new(0.5, 3.0, 26)
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            lambda: LambdaGrid::default(),
            t: default_t(),
        }
    }
}

/// Test function for `transform`, `invert` and the transform-based suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionConfig {
    /// Smooth bump supported in `[center - width, center + width]`.
    Bump {
        center: f64,
        width: f64,
        /// Per-orbit amplitudes; all ones when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitudes: Option<Vec<f64>>,
    },
    /// `Phi0_{-lambda_k}` with per-orbit weights.
    Discrete {
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
}

impl Default for FunctionConfig {
    fn default() -> Self {
        FunctionConfig::Bump {
            center: 1.5,
            width: 0.5,
            amplitudes: None,
        }
    }
}

impl FunctionConfig {
    pub fn build(&self, g: &SpaceGeometry) -> anyhow::Result<RadialFunction> {
        let n = g.orbits();
        let per_orbit = |v: &Option<Vec<f64>>, what: &str| -> anyhow::Result<Vec<f64>> {
            match v {
                None => Ok(vec![1.0; n]),
                Some(v) if v.len() == n => Ok(v.clone()),
                Some(v) => bail!("function.{what} has {} entries, the space has {n} orbits", v.len()),
            }
        };
        match self {
            FunctionConfig::Bump { center, width, amplitudes } => {
                if !(*width > 0.0 && center - width >= 0.0) {
                    bail!("function: bump needs width > 0 and center - width >= 0");
                }
                Ok(RadialFunction::bump_weighted(per_orbit(amplitudes, "amplitudes")?, *center, *width))
            }
            FunctionConfig::Discrete { k, weights } => {
                let w = per_orbit(weights, "weights")?;
                let len = g.pole_set().len();
                if *k >= len {
                    bail!("function: discrete index k = {k} but the pole set has {len} entries");
                }
                Ok(RadialFunction::discrete(g, *k, w.into_iter().map(|x| Complex64::new(x, 0.0)).collect())?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalObject {
    Eisenstein,
    Phi0,
    Cfunction,
    Hcseries,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default = "default_object")]
    pub object: EvalObject,
    /// Boundary vector as `[re, im]` pairs, one per orbit; ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<[f64; 2]>>,
    /// Relative tolerance of the series evaluator.
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
}

fn default_object() -> EvalObject {
    EvalObject::Eisenstein
}

fn default_series_tol() -> f64 {
    1e-14
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            object: default_object(),
            eta: None,
            series_tol: default_series_tol(),
        }
    }
}

impl EvalConfig {
    pub fn eta(&self, orbits: usize) -> anyhow::Result<WVector> {
        match &self.eta {
            None => Ok(WVector::ones(orbits)),
            Some(v) if v.len() == orbits => Ok(WVector::new(v.iter().map(|p| Complex64::new(p[0], p[1])).collect())),
            Some(v) => bail!("eval.eta has {} entries, the space has {orbits} orbits", v.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Kernel,
    Inversion,
    Eigen,
    Symmetry,
    Schwartz,
    Bounds,
    Contour,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Kernel,
        Suite::Inversion,
        Suite::Eigen,
        Suite::Symmetry,
        Suite::Schwartz,
        Suite::Bounds,
        Suite::Contour,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Inversion => "inversion",
            Suite::Eigen => "eigen",
            Suite::Symmetry => "symmetry",
            Suite::Schwartz => "schwartz",
            Suite::Bounds => "bounds",
            Suite::Contour => "contour",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    /// Suites to run; all when empty.
    #[serde(default)]
    pub suites: Vec<Suite>,
    /// Random spectral points per randomized check.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_points() -> usize {
    8
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            suites: Vec::new(),
            points: default_points(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A validated space.
#[derive(Debug, Clone)]
pub struct Space {
    pub geometry: SpaceGeometry,
    pub preset: Option<Preset>,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Checks every field that does not need a computation.
    pub fn validate(&self) -> anyhow::Result<Space> {
        let space = self.space()?;
        if !(self.r > 0.0 && self.r <= 2.0) {
            bail!("r = {} outside (0, 2]", self.r);
        }
        space.geometry.pole_set().split(self.r)?;
        if !(self.epsilon0 > 0.0 && self.epsilon0 < 0.5) {
            bail!("epsilon0 = {} outside (0, 1/2)", self.epsilon0);
        }
        if !(self.big_r >= 0.0 && self.big_r.is_finite()) {
            bail!("big_r = {} must be finite and non-negative", self.big_r);
        }
        self.quadrature.spec().validate()?;
        self.grids.lambda.re.validate("lambda.re")?;
        self.grids.lambda.im.validate("lambda.im")?;
        self.grids.t.validate("t")?;
        if !(self.eval.series_tol > 0.0) {
            bail!("eval.series_tol must be positive");
        }
        self.eval.eta(space.geometry.orbits())?;
        self.function.build(&space.geometry)?;
        Ok(space)
    }

    fn space(&self) -> anyhow::Result<Space> {
        let s = &self.space;
        let raw = [s.m1p, s.m1m, s.m2p, s.m2m];
        match &s.preset {
            Some(name) => {
                if raw.iter().any(Option::is_some) || s.orbits.is_some() {
                    bail!("space: give either a preset or multiplicities, not both");
                }
                let p = preset(name)?;
                let geometry = rank1sft::derive_geometry(p.multiplicities)?;
                Ok(Space {
                    geometry,
                    preset: Some(p),
                    warnings: Vec::new(),
                })
            }
            None => {
                let [Some(m1p), Some(m1m), Some(m2p), Some(m2m)] = raw else {
                    bail!("space: needs a preset name or all of m1p, m1m, m2p, m2m");
                };
                let mut warnings = Vec::new();
                let orbits = s.orbits.unwrap_or_else(|| {
                    warnings.push(format!("space.orbits not given; assuming |W| = {DEFAULT_ORBITS}"));
                    DEFAULT_ORBITS
                });
                let m = MultiplicityDatum::new(m1p, m1m, m2p, m2m, orbits)?;
                Ok(Space {
                    geometry: rank1sft::derive_geometry(m)?,
                    preset: None,
                    warnings,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> anyhow::Result<RunConfig> {
        Ok(serde_json::from_str(s)?)
    }

    #[test]
    fn range_points() {
        assert_eq!(Range::new(1.0, 3.0, 3).points(), [1.0, 2.0, 3.0]);
        assert_eq!(Range::new(2.0, 5.0, 1).points(), [2.0]);
        assert!(Range::new(0.0, 1.0, 0).validate("t").is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = parse(r#"{"space": {"preset": "riemannian-H3"}}"#).unwrap();
        assert_eq!(cfg.r, 2.0);
        assert_eq!(cfg.function, FunctionConfig::default());
        assert_eq!(cfg.quadrature.spec(), QuadratureSpec::default());
        assert_eq!(cfg.grids.lambda.points().len(), 20);
        cfg.validate().unwrap();
    }

    #[test]
    fn explicit_points_override_the_product_grid() {
        let cfg = parse(
            r#"{"space": {"preset": "riemannian-H3"},
                "grids": {"lambda": {"re": {"start": 0, "stop": 1, "count": 4},
                                     "im": {"start": 0, "stop": 1, "count": 4},
                                     "points": [[0.5, 2.0]]}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.grids.lambda.points(), [Complex64::new(0.5, 2.0)]);
    }

    #[test]
    fn space_forms() {
        let both = parse(r#"{"space": {"preset": "riemannian-H3", "m1p": 2}}"#).unwrap();
        assert!(both.validate().is_err());
        let raw = parse(r#"{"space": {"m1p": 0, "m1m": 8, "m2p": 0, "m2m": 0}}"#).unwrap();
        let s = raw.validate().unwrap();
        assert_eq!(s.geometry.orbits(), DEFAULT_ORBITS as usize);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn function_shape_is_checked_against_orbits() {
        let cfg = parse(
            r#"{"space": {"preset": "real-hyperbolic-p9-q1"},
                "function": {"kind": "bump", "center": 1.5, "width": 0.5, "amplitudes": [1.0]}}"#,
        )
        .unwrap();
        assert!(cfg.validate().is_err());
        let cfg = parse(r#"{"space": {"preset": "riemannian-H3"}, "function": {"kind": "discrete", "k": 0}}"#).unwrap();
        assert!(cfg.validate().is_err(), "H^3 has no discrete spectrum");
    }
}
