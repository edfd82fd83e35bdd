//! The `describe`, `eval`, `transform`, `invert` and `calibrate` verbs.

use num_complex::Complex64;
use serde::Serialize;

use rank1sft::eigenfunctions::{c_function, eisenstein, hc_series_phi, phi0};
use rank1sft::parallel::par_map;
use rank1sft::schwartz::{strip_for, StripSpec};
use rank1sft::spaces::{poly_p_r, poly_p_strip, poly_pi, poly_q_r};
use rank1sft::transform::{calibrate_plancherel, calibration_reference, forward, kappa_analytic, Inversion};

use crate::config::{EvalObject, FunctionConfig, RunConfig, Space};
use crate::report::{pair, CheckResult, InvertRow, Row, SpaceSummary};

/// Tolerance of the round-trip check attached to `invert`.
pub const INVERSION_TOL: f64 = 1e-4;
/// Agreement required between the fitted and the closed-form constant.
pub const KAPPA_TOL: f64 = 1e-4;

#[derive(Debug, Serialize)]
pub struct Description {
    pub space: SpaceSummary,
    pub r: f64,
    pub gamma_r: f64,
    pub epsilon0: f64,
    pub big_r: f64,
    /// `L`, largest first.
    pub pole_set: Vec<f64>,
    pub l_r: Vec<f64>,
    pub l_r_complement: Vec<f64>,
    pub p_big_r_roots: Vec<[f64; 2]>,
    pub q_big_r_roots: Vec<[f64; 2]>,
    pub pi_roots: Vec<[f64; 2]>,
    pub p_strip_roots: Vec<[f64; 2]>,
    pub strip: StripSpec,
    pub warnings: Vec<String>,
}

pub fn describe(cfg: &RunConfig, space: &Space) -> anyhow::Result<Description> {
    let g = &space.geometry;
    let poles = g.pole_set();
    let split = poles.split(cfg.r)?;
    let pick = |ks: &[usize]| ks.iter().map(|&k| poles.lambdas[k]).collect::<Vec<f64>>();
    let roots = |p: rank1sft::PolynomialSpec| p.roots.into_iter().map(pair).collect::<Vec<_>>();
    Ok(Description {
        space: SpaceSummary::new(space),
        r: cfg.r,
        gamma_r: split.gamma,
        epsilon0: cfg.epsilon0,
        big_r: cfg.big_r,
        pole_set: poles.lambdas.clone(),
        l_r: pick(&split.below),
        l_r_complement: pick(&split.above),
        p_big_r_roots: roots(poly_p_r(g, cfg.big_r)),
        q_big_r_roots: roots(poly_q_r(cfg.big_r)),
        pi_roots: roots(poly_pi(&poles)),
        p_strip_roots: roots(poly_p_strip(&poles, cfg.r)?),
        strip: strip_for(g, cfg.r, cfg.epsilon0)?,
        warnings: space.warnings.clone(),
    })
}

/// Sweep of one eigenfunction object over the `lambda x t` grid.
pub fn eval(cfg: &RunConfig, space: &Space) -> anyhow::Result<Vec<Row>> {
    let g = space.geometry;
    let eta = cfg.eval.eta(g.orbits())?;
    let ts = cfg.grids.t.points();
    let lambdas = cfg.grids.lambda.points();
    let object = cfg.eval.object;
    let tol = cfg.eval.series_tol;
    let per_lambda = par_map(&lambdas, |&l| {
        let mut rows = Vec::new();
        if object == EvalObject::Cfunction {
            rows.push(Row::new(l, None, 0, c_function(&g, l).map_err(|e| e.to_string())));
            return rows;
        }
        for &t in &ts {
            match object {
                EvalObject::Eisenstein => match eisenstein(&g, l, &eta, t) {
                    Ok(v) => rows.extend(v.components.iter().enumerate().map(|(w, z)| Row::new(l, Some(t), w, Ok(*z)))),
                    Err(e) => rows.extend((0..eta.len()).map(|w| Row::new(l, Some(t), w, Err(e.to_string())))),
                },
                EvalObject::Phi0 => rows.push(Row::new(l, Some(t), 0, phi0(&g, l, t).map_err(|e| e.to_string()))),
                EvalObject::Hcseries => rows.push(Row::new(l, Some(t), 0, hc_series_phi(&g, l, t, tol).map_err(|e| e.to_string()))),
                EvalObject::Cfunction => unreachable!(),
            }
        }
        rows
    });
    Ok(per_lambda.into_iter().flatten().collect())
}

/// Forward transform of the configured function on the spectral grid.
pub fn transform(cfg: &RunConfig, space: &Space) -> anyhow::Result<Vec<Row>> {
    let g = space.geometry;
    let f = cfg.function.build(&g)?;
    let spec = cfg.quadrature.spec();
    let lambdas = cfg.grids.lambda.points();
    let values = par_map(&lambdas, |&l| forward(&g, &f, l, &spec));
    let mut rows = Vec::new();
    for (l, v) in lambdas.iter().zip(values) {
        match v {
            Ok(v) => rows.extend(v.components.iter().enumerate().map(|(w, z)| Row::new(*l, None, w, Ok(*z)))),
            Err(e) => rows.extend((0..g.orbits()).map(|w| Row::new(*l, None, w, Err(e.to_string())))),
        }
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct InvertReport {
    pub space: SpaceSummary,
    pub function: FunctionConfig,
    pub kappa: Option<f64>,
    pub rows: Vec<InvertRow>,
    pub checks: Vec<CheckResult>,
}

/// Reconstruction of the configured function on the `t` grid.
pub fn invert(cfg: &RunConfig, space: &Space) -> anyhow::Result<InvertReport> {
    let g = space.geometry;
    let f = cfg.function.build(&g)?;
    let spec = cfg.quadrature.spec();
    let ts = cfg.grids.t.points();
    let attempt = calibrate_plancherel(&g, &spec).and_then(|kappa| {
        let rec = Inversion::new(&g, &f, &spec)?.evaluate(kappa, &ts)?;
        Ok((kappa, rec))
    });
    let mut rows = Vec::new();
    let target = format!("sup-norm relative error on t in [{}, {}]", cfg.grids.t.start, cfg.grids.t.stop);
    let (kappa, check) = match attempt {
        Ok((kappa, rec)) => {
            let mut worst: f64 = 0.0;
            let mut peak: f64 = 0.0;
            for (v, &t) in rec.iter().zip(&ts) {
                let reference = f.eval_all(t);
                worst = worst.max(v.sub(&reference).norm());
                peak = peak.max(reference.norm());
                for (w, (z, r)) in v.components.iter().zip(&reference.components).enumerate() {
                    rows.push(invert_row(t, w, Ok(*z), *r));
                }
            }
            let rel = if peak > 0.0 { worst / peak } else { worst };
            (Some(kappa), CheckResult::bounded("inversion round trip", target, rel, INVERSION_TOL))
        }
        Err(e) => {
            for &t in &ts {
                for (w, r) in f.eval_all(t).components.iter().enumerate() {
                    rows.push(invert_row(t, w, Err(e.to_string()), *r));
                }
            }
            (None, CheckResult::failed("inversion round trip", target, Some(INVERSION_TOL), e))
        }
    };
    Ok(InvertReport {
        space: SpaceSummary::new(space),
        function: cfg.function.clone(),
        kappa,
        rows,
        checks: vec![check],
    })
}

fn invert_row(t: f64, w: usize, value: Result<Complex64, String>, reference: Complex64) -> InvertRow {
    let (v, status) = match value {
        Ok(v) => (Some(v), "ok".to_string()),
        Err(e) => (None, e),
    };
    InvertRow {
        t,
        w,
        value_re: v.map(|v| v.re),
        value_im: v.map(|v| v.im),
        reference_re: reference.re,
        reference_im: reference.im,
        status,
    }
}

#[derive(Debug, Serialize)]
pub struct CalibrationReport {
    pub space: SpaceSummary,
    pub reference: String,
    pub kappa: Option<f64>,
    pub kappa_closed_form: f64,
    pub checks: Vec<CheckResult>,
}

pub fn calibrate(cfg: &RunConfig, space: &Space) -> anyhow::Result<CalibrationReport> {
    let g = space.geometry;
    let (_, ts) = calibration_reference(g.orbits());
    let reference = format!(
        "bump centred at 2 with half-width 1.5, fitted at {} points in [{}, {}]",
        ts.len(),
        ts[0],
        ts[ts.len() - 1]
    );
    let closed = kappa_analytic(&g);
    let target = "relative distance to 2^(2 rho - m2p) / (4 pi)";
    let (kappa, check) = match calibrate_plancherel(&g, &cfg.quadrature.spec()) {
        Ok(k) => (Some(k), CheckResult::bounded("plancherel constant", target, (k - closed).abs() / closed, KAPPA_TOL)),
        Err(e) => (None, CheckResult::failed("plancherel constant", target, Some(KAPPA_TOL), e)),
    };
    Ok(CalibrationReport {
        space: SpaceSummary::new(space),
        reference,
        kappa,
        kappa_closed_form: closed,
        checks: vec![check],
    })
}
