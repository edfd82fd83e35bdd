//! Verification suites behind `check`.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rank1sft::eigenfunctions::bounds::{coefficient_bound, derivative_bound, series_bound, BoundReport};
use rank1sft::eigenfunctions::{c_function, eisenstein_scalar, phi0, phi0_discrete, radial_laplacian_apply, LAPLACIAN_STEP};
use rank1sft::numerics::quadrature::QuadratureSpec;
use rank1sft::schwartz::{strip_for, validate_spectral_schwartz, SchwartzCheck};
use rank1sft::spaces::poly_p_strip;
use rank1sft::transform::{
    calibrate_plancherel, discrete_norm_sq, forward, kappa_analytic, shifted_wave_packet, transform_function,
    wave_packet, Inversion, RadialEval, RadialFunction, SpectralFunction,
};
use rank1sft::SpaceGeometry;

use crate::commands::{INVERSION_TOL, KAPPA_TOL};
use crate::config::{RunConfig, Space, Suite};
use crate::report::CheckResult;

pub const KERNEL_TOL: f64 = 1e-6;
pub const EIGEN_TOL: f64 = 1e-6;
pub const SYMMETRY_TOL: f64 = 1e-8;
pub const CONTOUR_TOL: f64 = 1e-6;
/// Coefficient-suite cutoff `m`.
pub const COEFFICIENT_TERMS: usize = 200;
/// Distance `delta` of the series-suite grid from `t = 0`.
pub const SERIES_DELTA: f64 = 0.5;

struct Ctx<'a> {
    cfg: &'a RunConfig,
    g: SpaceGeometry,
    spec: QuadratureSpec,
    seed: u64,
}

type Outcome = anyhow::Result<Vec<CheckResult>>;

pub fn run(cfg: &RunConfig, space: &Space, suites: &[Suite], seed: u64) -> Vec<CheckResult> {
    let ctx = Ctx {
        cfg,
        g: space.geometry,
        spec: cfg.quadrature.spec(),
        seed,
    };
    let mut out = Vec::new();
    for &suite in suites {
        let result = panic::catch_unwind(AssertUnwindSafe(|| match suite {
            Suite::Kernel => kernel(&ctx),
            Suite::Inversion => inversion(&ctx),
            Suite::Eigen => eigen(&ctx),
            Suite::Symmetry => symmetry(&ctx),
            Suite::Schwartz => schwartz(&ctx),
            Suite::Bounds => bounds(&ctx),
            Suite::Contour => contour(&ctx),
        }));
        let checks = match result {
            Ok(Ok(checks)) => checks,
            Ok(Err(e)) => vec![CheckResult::failed(suite.name(), "suite setup", None, format!("{e:#}"))],
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                vec![CheckResult::failed(suite.name(), "suite aborted", None, msg)]
            }
        };
        out.extend(checks.into_iter().map(|mut c| {
            c.name = format!("{}: {}", suite.name(), c.name);
            c
        }));
    }
    out
}

fn imaginary_axis(ctx: &Ctx) -> Vec<f64> {
    let mut nus: Vec<f64> = ctx.cfg.grids.lambda.points().iter().map(|l| l.im.abs()).collect();
    nus.sort_by(f64::total_cmp);
    nus.dedup();
    nus
}

/// Random spectral parameter at distance >= 0.05 from the half-integers.
fn random_lambda(rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let l = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-8.0..8.0));
        if (l - Complex64::new((2.0 * l.re).round() / 2.0, 0.0)).norm() >= 0.05 {
            return l;
        }
    }
}

/// Measured value or the failure, as a check.
fn measure(name: String, target: &str, tol: f64, value: rank1sft::Result<f64>) -> CheckResult {
    match value {
        Ok(v) => CheckResult::bounded(name, target, v, tol),
        Err(e) => CheckResult::failed(name, target, Some(tol), e),
    }
}

fn kernel(ctx: &Ctx) -> Outcome {
    let g = &ctx.g;
    let lambdas = g.pole_set().lambdas;
    if lambdas.is_empty() {
        return Ok(vec![CheckResult::bounded("no discrete spectrum", "L is empty", 0.0, KERNEL_TOL)]);
    }
    let nus = imaginary_axis(ctx);
    let target = "max |F Phi0_{-lambda_k}(i nu)| / ||Phi0_{-lambda_k}||";
    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(k, lk)| {
            let value = (|| {
                let f = RadialFunction::discrete(g, k, vec![Complex64::new(1.0, 0.0); g.orbits()])?;
                let norm = (discrete_norm_sq(g, k, &ctx.spec)? * g.orbits() as f64).sqrt();
                let mut worst: f64 = 0.0;
                for &nu in &nus {
                    worst = worst.max(forward(g, &f, Complex64::new(0.0, nu), &ctx.spec)?.norm() / norm);
                }
                Ok(worst)
            })();
            measure(format!("lambda_k = {lk}"), target, KERNEL_TOL, value)
        })
        .collect())
}

fn inversion(ctx: &Ctx) -> Outcome {
    let g = &ctx.g;
    let f = ctx.cfg.function.build(g)?;
    let ts = ctx.cfg.grids.t.points();
    let round_trip = (|| {
        let kappa = calibrate_plancherel(g, &ctx.spec)?;
        let rec = Inversion::new(g, &f, &ctx.spec)?.evaluate(kappa, &ts)?;
        let mut worst: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for (v, &t) in rec.iter().zip(&ts) {
            worst = worst.max(v.sub(&f.eval_all(t)).norm());
            peak = peak.max(f.eval_all(t).norm());
        }
        Ok(if peak > 0.0 { worst / peak } else { worst })
    })();
    let target = format!("sup-norm relative error on t in [{}, {}]", ctx.cfg.grids.t.start, ctx.cfg.grids.t.stop);
    let closed = kappa_analytic(g);
    let kappa = calibrate_plancherel(g, &ctx.spec).map(|k| (k - closed).abs() / closed);
    Ok(vec![
        measure("round trip".into(), &target, INVERSION_TOL, round_trip),
        measure("plancherel constant".into(), "relative distance to the closed form", KAPPA_TOL, kappa),
    ])
}

fn eigen(ctx: &Ctx) -> Outcome {
    let g = ctx.g;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let lambdas: Vec<Complex64> = (0..ctx.cfg.check.points).map(|_| random_lambda(&mut rng)).collect();
    let ts: Vec<f64> = (0..19).map(|i| 0.5 + 0.25 * i as f64).collect();
    let target = "sup_t |L f - (lambda^2 - rho^2) f| / sup_t |(lambda^2 - rho^2) f|, t in [0.5, 5]";

    let residual = |f: &RadialFunction, l: Complex64| -> rank1sft::Result<f64> {
        let ev = l * l - g.rho * g.rho;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for &t in &ts {
            let v = f.eval(0, t);
            if !v.is_finite() {
                return Err(rank1sft::Error::NonConvergence {
                    what: "eigenfunction sample",
                    estimate: v,
                    error_bound: f64::INFINITY,
                });
            }
            worst = worst.max((radial_laplacian_apply(&g, f, 0, t, LAPLACIAN_STEP)? - ev * v).norm());
            scale = scale.max((ev * v).norm());
        }
        Ok(worst / scale)
    };
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let scalar = |h: Arc<dyn Fn(f64) -> rank1sft::Result<Complex64> + Send + Sync>| {
        RadialFunction::new(vec![Arc::new(move |t: f64| h(t).unwrap_or(nan)) as RadialEval])
    };

    let mut checks = Vec::new();
    for (name, use_phi) in [("eisenstein", false), ("phi0", true)] {
        let value = lambdas.iter().try_fold(0.0f64, |acc, &l| {
            if use_phi {
                phi0(&g, l, 1.0)?;
            } else {
                eisenstein_scalar(&g, l, 1.0)?;
            }
            let f = if use_phi {
                scalar(Arc::new(move |t| phi0(&g, l, t)))
            } else {
                scalar(Arc::new(move |t| eisenstein_scalar(&g, l, t)))
            };
            Ok(acc.max(residual(&f, l)?))
        });
        checks.push(measure(format!("{name} at {} random lambda", lambdas.len()), target, EIGEN_TOL, value));
    }
    for (k, &lk) in g.pole_set().lambdas.iter().enumerate() {
        let f = scalar(Arc::new(move |t| phi0_discrete(&g, k, t).map(|v| Complex64::new(v, 0.0))));
        checks.push(measure(format!("phi0 at -lambda_k = {}", -lk), target, EIGEN_TOL, residual(&f, Complex64::new(-lk, 0.0))));
    }
    Ok(checks)
}

fn symmetry(ctx: &Ctx) -> Outcome {
    let g = &ctx.g;
    let f = ctx.cfg.function.build(g)?;
    let nus = imaginary_axis(ctx);
    let value = (|| {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for &nu in &nus {
            let l = Complex64::new(0.0, nu);
            let a = forward(g, &f, -l, &ctx.spec)?;
            let b = forward(g, &f, l, &ctx.spec)?.scale(c_function(g, l)?);
            worst = worst.max(a.sub(&b).norm());
            scale = scale.max(a.norm()).max(b.norm());
        }
        Ok(if scale > 0.0 { worst / scale } else { worst })
    })();
    Ok(vec![measure(
        format!("{} points on iR", nus.len()),
        "max |F f(-lambda) - c(lambda) F f(lambda)| / max |F f|",
        SYMMETRY_TOL,
        value,
    )])
}

fn schwartz(ctx: &Ctx) -> Outcome {
    let g = &ctx.g;
    let f = ctx.cfg.function.build(g)?;
    let phi = transform_function(g, &f, &ctx.spec);
    let strip = strip_for(g, ctx.cfg.r, ctx.cfg.epsilon0)?;
    let p = poly_p_strip(&g.pole_set(), ctx.cfg.r)?;
    let opts = SchwartzCheck::default();
    let report = validate_spectral_schwartz(g, &phi, &strip, &p, &opts);
    Ok(report
        .conditions
        .into_iter()
        .map(|c| {
            // conditions 3 and 4 are qualitative: located poles, finite suprema
            let tol = matches!(c.condition, 1 | 2 | 5).then_some(opts.tol);
            CheckResult {
                name: format!("condition {} ({})", c.condition, c.name),
                target: c.detail,
                measured: Some(c.worst).filter(|v| v.is_finite()),
                tolerance: tol,
                pass: c.passed,
                error: None,
            }
        })
        .collect())
}

fn bounds(ctx: &Ctx) -> Outcome {
    let g = &ctx.g;
    let big_r = ctx.cfg.big_r;
    let mut reports: Vec<(String, rank1sft::Result<BoundReport>)> = vec![
        ("coefficients".into(), coefficient_bound(g, big_r, COEFFICIENT_TERMS)),
        ("series".into(), series_bound(g, big_r, SERIES_DELTA)),
    ];
    for order in 0..=2 {
        reports.push((format!("derivative order {order}"), derivative_bound(g, big_r, order)));
    }
    let target = "worst validation ratio to the fitted bound with margin";
    Ok(reports
        .into_iter()
        .map(|(name, r)| match r {
            Ok(r) => CheckResult {
                name,
                target: format!(
                    "{target}; constant {:.3e}, exponent {}, {} training / {} validation points, {} violations",
                    r.constant,
                    r.exponent.map_or("none".into(), |x| format!("{x:.3}")),
                    r.training_points,
                    r.validation_points,
                    r.violations
                ),
                measured: Some(r.worst_ratio),
                tolerance: Some(1.0),
                pass: r.passed(),
                error: None,
            },
            Err(e) => CheckResult::failed(name, target, Some(1.0), e),
        })
        .collect())
}

fn contour(ctx: &Ctx) -> Outcome {
    let g = ctx.g;
    let r = ctx.cfg.r;
    let poles = g.pole_set();
    let split = poles.split(r)?;
    // simple poles planted at -lambda_k for every lambda_k in L_r
    let planted: Vec<(usize, f64)> = split.below.iter().map(|&k| (k, poles.lambdas[k])).collect();
    let shape = planted.clone();
    let mut phi = SpectralFunction::scalar(g.orbits(), move |l: Complex64| {
        let s: Complex64 = shape.iter().map(|&(_, lk)| 1.0 / (l + lk)).sum();
        Ok((l * l).exp() * if shape.is_empty() { Complex64::new(1.0, 0.0) } else { s })
    });
    for &(_, lk) in &planted {
        phi = phi.with_pole(Complex64::new(-lk, 0.0), None);
    }
    let value = (|| {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for t in [0.5, 1.0, 2.0, 3.0] {
            let j = wave_packet(&g, &phi, t, &ctx.spec)?.get(0);
            let i = shifted_wave_packet(&g, &phi, r, t, &ctx.spec)?.get(0);
            let mut s = 0.0;
            for &(k, lk) in &planted {
                s += phi0_discrete(&g, k, t)? * (lk * lk).exp();
            }
            let rhs = Complex64::new(0.0, 4.0 * PI * s);
            worst = worst.max((j - i - rhs).norm());
            scale = scale.max(rhs.norm()).max(j.norm());
        }
        Ok(worst / scale)
    })();
    let lr: Vec<f64> = planted.iter().map(|p| p.1).collect();
    Ok(vec![measure(
        format!("poles planted at -L_r = {:?}", lr.iter().map(|x| -x).collect::<Vec<_>>()),
        "sup_t |J phi - I_r phi - 4 pi i sum Phi0 Res| / sup_t max(|rhs|, |J phi|)",
        CONTOUR_TOL,
        value,
    )])
}
