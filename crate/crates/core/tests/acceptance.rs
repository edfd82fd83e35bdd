//! End-to-end acceptance checks. Each criterion prints one `PASS` or `FAIL`
//! line; the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rank1sft::eigenfunctions::bounds::{coefficient_bound, derivative_bound, series_bound, BoundReport};
use rank1sft::eigenfunctions::{
    c_function, eisenstein, eisenstein_scalar, hc_series_phi, phi0, phi0_discrete, phi0_hypergeometric,
    radial_laplacian_apply, WVector,
};
use rank1sft::numerics::quadrature::{CompositeRule, QuadratureSpec};
use rank1sft::schwartz::{strip_for, tau_seminorm, validate_spectral_schwartz, SchwartzCheck, StripGrid, StripSamples, TauGrid};
use rank1sft::spaces::{poly_p_strip, preset, preset_catalogue};
use rank1sft::transform::{
    calibrate_plancherel, decompose_hb, discrete_norm_sq, fit_plancherel, forward, kappa_analytic, shifted_wave_packet,
    transform_function, wave_packet, Inversion, LineOptions, LineSamples, PacketForm, RadialEval, RadialFunction,
    SampledRadial, SpectralFunction, RULE_ORDER,
};
use rank1sft::SpaceGeometry;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn geom(m1p: u32, m1m: u32, m2p: u32, m2m: u32, orbits: u8) -> SpaceGeometry {
    SpaceGeometry::from_multiplicities(m1p, m1m, m2p, m2m, orbits).unwrap()
}

fn from_preset(name: &str) -> SpaceGeometry {
    rank1sft::derive_geometry(preset(name).unwrap().multiplicities).unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Random spectral parameter at distance >= 0.05 from the half-integer lattice.
fn random_lambda(rng: &mut ChaCha8Rng, re: f64, im: f64) -> Complex64 {
    loop {
        let l = cx(rng.gen_range(-re..re), rng.gen_range(-im..im));
        let near = cx((2.0 * l.re).round() / 2.0, 0.0);
        if (l - near).norm() >= 0.05 {
            return l;
        }
    }
}

struct Outcome {
    pass: bool,
    summary: String,
}

fn bounded(measured: f64, tol: f64, what: &str) -> Outcome {
    Outcome {
        pass: measured <= tol,
        summary: format!("{what} {measured:.2e} (tolerance {tol:.0e})"),
    }
}

fn closed_form_oracle() -> Outcome {
    let g = geom(2, 0, 0, 0, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let l = random_lambda(&mut rng, 3.0, 10.0);
        let t = rng.gen_range(0.1..10.0);
        let eta = WVector::new(vec![cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))]);
        let e = eisenstein(&g, l, &eta, t).unwrap().get(0);
        let exact = eta.get(0) * (l * t).sinh() / t.sinh();
        worst = worst.max((e - exact).norm() / exact.norm());
        let c = c_function(&g, l).unwrap();
        worst = worst.max((c + 1.0).norm());
    }
    bounded(worst, 1e-10, "max relative error")
}

fn series_matches_hypergeometric() -> Outcome {
    let geoms = [geom(2, 0, 0, 0, 1), geom(0, 8, 0, 0, 1), geom(0, 6, 2, 0, 1), geom(1, 3, 1, 0, 1)];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for g in &geoms {
        for _ in 0..30 {
            let l = random_lambda(&mut rng, 3.0, 10.0);
            let t = rng.gen_range(1.0..5.0);
            let a = hc_series_phi(g, l, t, 1e-15).unwrap();
            let b = phi0_hypergeometric(g, l, t).unwrap().0;
            worst = worst.max((a - b).norm() / b.norm());
        }
    }
    bounded(worst, 1e-8, "max relative difference")
}

fn eigen_equations() -> Outcome {
    let h = 1e-3;
    let ts = linspace(0.5, 5.0, 19);
    let lambdas = [cx(0.2, 0.3), cx(0.0, 1.5), cx(-0.7, 2.0), cx(0.0, 3.0), cx(1.3, -0.4)];
    let mut worst: f64 = 0.0;
    for g in [geom(0, 8, 0, 0, 1), geom(0, 6, 2, 0, 1), geom(2, 0, 0, 0, 1), geom(1, 3, 1, 0, 1)] {
        let mut cases: Vec<(Complex64, RadialFunction)> = Vec::new();
        for &l in &lambdas {
            cases.push((l, RadialFunction::new(vec![Arc::new(move |t: f64| eisenstein_scalar(&g, l, t).unwrap()) as RadialEval])));
            cases.push((l, RadialFunction::new(vec![Arc::new(move |t: f64| phi0(&g, l, t).unwrap()) as RadialEval])));
        }
        for (k, &lk) in g.pole_set().lambdas.iter().enumerate() {
            let f = RadialFunction::new(vec![Arc::new(move |t: f64| cx(phi0_discrete(&g, k, t).unwrap(), 0.0)) as RadialEval]);
            cases.push((cx(-lk, 0.0), f));
        }
        for (l, f) in &cases {
            let ev = l * l - g.rho * g.rho;
            let scale = ts.iter().map(|&t| (ev * f.eval(0, t)).norm()).fold(0.0, f64::max);
            for &t in &ts {
                let lhs = radial_laplacian_apply(&g, f, 0, t, h).unwrap();
                worst = worst.max((lhs - ev * f.eval(0, t)).norm() / scale);
            }
        }
    }
    bounded(worst, 1e-6, "max residual relative to sup |(lambda^2 - rho^2) f|")
}

fn c_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let catalogue = preset_catalogue();
    for p in &catalogue {
        let g = rank1sft::derive_geometry(p.multiplicities).unwrap();
        for _ in 0..50 {
            let l = random_lambda(&mut rng, 3.0, 10.0);
            let prod = c_function(&g, l).unwrap() * c_function(&g, -l).unwrap();
            worst = worst.max((prod - 1.0).norm());
            let nu = rng.gen_range(-30.0..30.0);
            worst = worst.max((c_function(&g, cx(0.0, nu)).unwrap().norm() - 1.0).abs());
        }
    }
    Outcome {
        pass: worst <= 1e-10,
        summary: format!("{} presets, max deviation {worst:.2e} (tolerance 1e-10)", catalogue.len()),
    }
}

fn kernel_vanishing() -> Outcome {
    let g = geom(0, 8, 0, 0, 1);
    let spec = QuadratureSpec::default().with_truncation(45.0);
    let mut worst: f64 = 0.0;
    for k in 0..2 {
        let f = RadialFunction::discrete(&g, k, vec![cx(1.0, 0.0)]).unwrap();
        let norm = discrete_norm_sq(&g, k, &spec).unwrap().sqrt();
        for nu in linspace(0.1, 20.0, 12) {
            let v = forward(&g, &f, cx(0.0, nu), &spec).unwrap().norm();
            worst = worst.max(v / norm);
        }
    }
    bounded(worst, 1e-6, "max |F Phi0_{-lambda_k}(i nu)| / ||Phi0||")
}

fn transform_symmetry() -> Outcome {
    let g = from_preset("real-hyperbolic-p9-q1");
    let spec = QuadratureSpec::default();
    let bumps = [
        RadialFunction::bump_weighted(vec![1.0, -0.4], 1.5, 0.5),
        RadialFunction::bump_weighted(vec![0.3, 1.0], 2.0, 1.0),
        RadialFunction::bump_weighted(vec![1.0, 1.0], 1.2, 0.3),
    ];
    let mut worst: f64 = 0.0;
    for f in &bumps {
        for nu in [0.3, 1.0, 2.5, 6.0, 15.0, 30.0] {
            let l = cx(0.0, nu);
            let c = c_function(&g, l).unwrap();
            let a = forward(&g, f, -l, &spec).unwrap();
            let b = forward(&g, f, l, &spec).unwrap().scale(c);
            worst = worst.max(a.sub(&b).norm() / a.norm().max(b.norm()));
        }
    }
    bounded(worst, 1e-8, "max relative asymmetry")
}

fn inversion_round_trip() -> Outcome {
    let spec = QuadratureSpec::default();
    let ts = linspace(0.5, 3.0, 26);
    let mut worst: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for name in ["riemannian-H3", "real-hyperbolic-p9-q1"] {
        let g = from_preset(name);
        let n = g.orbits();
        let kappa = calibrate_plancherel(&g, &spec).unwrap();
        let bumps = [
            RadialFunction::bump_weighted(vec![1.0, -0.4][..n].to_vec(), 1.5, 0.5),
            RadialFunction::bump_weighted(vec![0.5, 1.0][..n].to_vec(), 2.2, 0.6),
        ];
        for f in &bumps {
            let rec = Inversion::new(&g, f, &spec).unwrap().evaluate(kappa, &ts).unwrap();
            let peak = ts.iter().map(|&t| f.eval_all(t).norm()).fold(0.0, f64::max);
            for (r, &t) in rec.iter().zip(&ts) {
                worst = worst.max(r.sub(&f.eval_all(t)).norm() / peak);
            }
            let (a, b) = f.support().unwrap();
            let fit = fit_plancherel(&g, f, &spec, &linspace(a + 0.05, b - 0.05, 15)).unwrap();
            drift = drift.max((fit - kappa).abs() / kappa);
        }
        drift = drift.max((kappa - kappa_analytic(&g)).abs() / kappa);
    }
    Outcome {
        pass: worst <= 1e-4 && drift <= 1e-4,
        summary: format!("sup relative error {worst:.2e} (tolerance 1e-4), kappa spread {drift:.2e} (tolerance 1e-4)"),
    }
}

fn contour_shift() -> Outcome {
    let g = geom(0, 8, 0, 0, 1);
    let spec = QuadratureSpec::default();
    let ts = [0.5, 1.0, 1.7, 2.5, 3.5];
    let mut worst: f64 = 0.0;
    // r = 4/3 leaves one pole in L_r, r = 1.05 both
    let cases: [(f64, Vec<(usize, f64, f64)>); 2] = [(4.0 / 3.0, vec![(1, 1.0, 1.0)]), (1.05, vec![(1, 1.0, 1.0), (0, 3.0, 0.5)])];
    for (r, poles) in cases {
        let planted = poles.clone();
        let mut phi = SpectralFunction::scalar(1, move |l: Complex64| {
            Ok(planted.iter().map(|&(_, lk, a)| a * (l * l).exp() / (l + lk)).sum())
        });
        for &(_, lk, _) in &poles {
            phi = phi.with_pole(cx(-lk, 0.0), None);
        }
        let mut diffs = Vec::new();
        let mut rhs = Vec::new();
        for &t in &ts {
            let j = wave_packet(&g, &phi, t, &spec).unwrap().get(0);
            let i = shifted_wave_packet(&g, &phi, r, t, &spec).unwrap().get(0);
            let s: f64 = poles.iter().map(|&(k, lk, a)| phi0_discrete(&g, k, t).unwrap() * a * (lk * lk).exp()).sum();
            diffs.push(j - i);
            rhs.push(cx(0.0, 4.0 * PI * s));
        }
        let scale = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (d, v) in diffs.iter().zip(&rhs) {
            worst = worst.max((d - v).norm() / scale);
        }
    }
    bounded(worst, 1e-6, "max relative error")
}

fn shifted_inversion_is_right_inverse() -> Outcome {
    let g = geom(0, 8, 0, 0, 1);
    let spec = QuadratureSpec::default();
    let r = 4.0 / 3.0;
    let gamma = g.gamma_r(r).unwrap();
    let phi = transform_function(&g, &RadialFunction::bump(1, 2.0, 1.5), &spec);
    let kappa = calibrate_plancherel(&g, &spec).unwrap();

    // h = -i kappa I_r phi sampled on a t-rule; F h is then a quadrature sum
    let rule = CompositeRule::join(&[
        CompositeRule::new(0.0, 3.5, 0.25, RULE_ORDER),
        CompositeRule::new(3.5, 18.0, 1.0, 16),
    ]);
    let opts = LineOptions::from_spec(&spec, LineOptions::panel_for(18.0, 3.5));
    let line = LineSamples::build(&phi, -gamma, false, &opts).unwrap();
    let packets = line.packets(&g, &rule.nodes, PacketForm::Phi).unwrap();
    let h: Vec<WVector> = packets.into_iter().map(|v| v.scale(cx(0.0, -kappa))).collect();
    let sampled = SampledRadial::from_values(&g, &rule, h);

    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for re in [-1.9, -1.5, -0.5, 0.0, 0.2] {
        for im in [0.0, 0.5, 2.0, 5.0] {
            let l = cx(re, im);
            let weight = PI * (l * l - g.rho * g.rho);
            let lhs = sampled.forward(&g, l).unwrap().get(0) * weight;
            let rhs = phi.eval_component(0, l).unwrap() * weight;
            worst = worst.max((lhs - rhs).norm());
            scale = scale.max(rhs.norm());
        }
    }
    bounded(worst / scale, 1e-6, "max |pi(lambda^2 - rho^2)(F I_r phi - phi)| relative to sup")
}

fn kernel_decomposition() -> Outcome {
    let g = geom(0, 8, 0, 0, 1);
    let spec = QuadratureSpec::default().with_truncation(45.0);
    let r = 4.0 / 3.0;
    let split = g.pole_set().split(r).unwrap();
    let lam = |ks: &[usize]| ks.iter().map(|&k| g.pole_set().lambdas[k]).collect::<Vec<f64>>();
    let (below, above) = (lam(&split.below), lam(&split.above));
    let split_ok = below == [1.0] && above == [3.0];

    let (_, f_b) = decompose_hb(&g, &RadialFunction::bump(1, 1.5, 0.5), r, &QuadratureSpec::default()).unwrap();
    let coeff = f_b.eval(0, 1.0) / phi0_discrete(&g, 0, 1.0).unwrap();
    let norm = coeff.norm() * discrete_norm_sq(&g, 0, &spec).unwrap().sqrt();
    let mut leak: f64 = 0.0;
    for nu in linspace(0.1, 20.0, 12) {
        leak = leak.max(forward(&g, &f_b, cx(0.0, nu), &spec).unwrap().norm() / norm);
    }

    let grid = TauGrid {
        t_min: 0.01,
        ..TauGrid::default()
    };
    let mut tau_b_finite = true;
    for n in 0..=2 {
        for m in 0..=2 {
            tau_b_finite &= tau_seminorm(&g, &f_b, n, m, r, &grid).unwrap().is_finite();
        }
    }
    let phi_low = RadialFunction::discrete(&g, 1, vec![cx(1.0, 0.0)]).unwrap();
    let low_flagged = tau_seminorm(&g, &phi_low, 0, 0, r, &grid).unwrap().infinite;

    Outcome {
        pass: split_ok && coeff.norm() > 0.0 && leak <= 1e-6 && tau_b_finite && low_flagged,
        summary: format!(
            "L_r = {below:?}, L_r^c = {above:?}; |F f_B| / ||f_B|| = {leak:.2e} (tolerance 1e-6); tau(f_B) finite: {tau_b_finite}; tau(Phi0_-1) flagged infinite: {low_flagged}"
        ),
    }
}

fn schwartz_mapping() -> Outcome {
    let g = geom(0, 8, 0, 0, 1);
    let spec = QuadratureSpec::default();
    let r = 4.0 / 3.0;
    let phi = transform_function(&g, &RadialFunction::bump(1, 1.5, 0.5), &spec);
    let strip = strip_for(&g, r, 0.25).unwrap();
    let p = poly_p_strip(&g.pole_set(), r).unwrap();
    let grid = StripGrid {
        n_re: 12,
        n_half_im: 30,
        im_min: 0.05,
        im_max: 400.0,
    };
    let samples = StripSamples::new(&phi, &strip, &p, &grid, 4).unwrap();
    let mut finite = 0;
    let mut largest: f64 = 0.0;
    for n in 0..=4 {
        for q in 0..=4 {
            let w = samples.omega(n, q).unwrap();
            if w.is_finite() {
                finite += 1;
                largest = largest.max(w.value);
            }
        }
    }
    let report = validate_spectral_schwartz(&g, &phi, &strip, &p, &SchwartzCheck::default());
    let failed: Vec<u8> = report.conditions.iter().filter(|c| !c.passed).map(|c| c.condition).collect();
    Outcome {
        pass: finite == 25 && report.passed(),
        summary: format!("{finite}/25 omega seminorms finite (largest {largest:.3e}); failed conditions: {failed:?}"),
    }
}

fn bound_suites() -> Outcome {
    let big_r = 2.0;
    let mut reports: Vec<BoundReport> = Vec::new();
    for g in [geom(0, 8, 0, 0, 1), geom(0, 6, 2, 0, 1)] {
        reports.push(coefficient_bound(&g, big_r, 200).unwrap());
        reports.push(series_bound(&g, big_r, 0.5).unwrap());
    }
    let g = geom(0, 8, 0, 0, 1);
    for order in 0..=2 {
        reports.push(derivative_bound(&g, big_r, order).unwrap());
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    let worst = reports.iter().map(|r| r.worst_ratio).fold(0.0, f64::max);
    Outcome {
        pass: failed.is_empty(),
        summary: format!(
            "{} suites, {violations} validation violations, worst ratio to fitted bound {worst:.3}; failed: {failed:?}",
            reports.len()
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("closed-form oracle on H^3", closed_form_oracle),
        ("series vs hypergeometric", series_matches_hypergeometric),
        ("eigenfunction equations", eigen_equations),
        ("c-function identities", c_identities),
        ("kernel vanishing", kernel_vanishing),
        ("transform symmetry", transform_symmetry),
        ("inversion round trip", inversion_round_trip),
        ("contour-shift identity", contour_shift),
        ("F I_r = id on the strip", shifted_inversion_is_right_inverse),
        ("kernel and decomposition", kernel_decomposition),
        ("Schwartz mapping", schwartz_mapping),
        ("empirical bound suites", bound_suites),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| Outcome {
            pass: false,
            summary: format!(
                "panicked: {}",
                e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
            ),
        });
        let secs = start.elapsed().as_secs_f64();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {} [{secs:.1}s]", i + 1, outcome.summary);
        if !outcome.pass {
            failures += 1;
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
