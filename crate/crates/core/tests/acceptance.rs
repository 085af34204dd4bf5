//! Acceptance criteria at desk scale (n = 256, L = 40). Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.
//! Positional integer arguments select a subset of criteria.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use ncl_core::crystal::{evaluate, identity_residuals, q_decomposed, q_direct, rhs};
use ncl_core::diagnostics::{
    contraction_study, emit_outputs, lipschitz_study, smoothing_integral, smoothing_study, viscosity_study,
    RunArtifacts,
};
use ncl_core::evolution::{evolve, Scheme};
use ncl_core::linear::{linstep_constant_b, solve_linear_ivp, Coefficient, LinearProblem};
use ncl_core::runner::{run_study, Study};
use ncl_core::spectral::{hilbert_residuals, random_bandlimited, sobolev_norm};
use ncl_core::{parse_config, Background, EvolveConfig, PhysicsParams, RealField, SobolevIndex, SpectralGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 256;
const L: f64 = 40.0;

/// Verdict and a one-line account of what was measured.
struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn grid(n: usize, l: f64) -> Arc<SpectralGrid> {
    SpectralGrid::new(n, l).unwrap()
}

fn s5() -> SobolevIndex {
    SobolevIndex::new(5.0).unwrap()
}

fn flat_config(g: &Arc<SpectralGrid>, dt: f64, t: f64) -> EvolveConfig {
    EvolveConfig::new(PhysicsParams::new(1.0, 0.0, 0.0).unwrap(), Background::flat(g), s5(), dt, t)
}

fn mode(g: &Arc<SpectralGrid>, k: usize, amplitude: f64) -> RealField {
    let w = 2.0 * PI * k as f64 / g.length();
    RealField::from_fn(g, |x| amplitude * (w * x).sin())
}

fn operator_identities() -> Verdict {
    let g = grid(N, L);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fields: Vec<RealField> = (0..100)
        .map(|_| random_bandlimited(&g, N / 4 - 1, 1.0, &mut rng).unwrap())
        .collect();
    let worst = (0..100)
        .map(|i| hilbert_residuals(&fields[i], &fields[(i + 1) % 100]).unwrap().max())
        .fold(0.0, f64::max);
    verdict(worst <= 1e-10, format!("max residual {worst:.3e} <= 1e-10 over 100 fields"))
}

fn route_equivalence() -> Verdict {
    let g = grid(N, L);
    let p = PhysicsParams::new(1.0, 0.3, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut route, mut ident) = (0.0f64, 0.0f64);
    for bg in [Background::flat(&g), Background::ivantsov(&g, 0.6).unwrap()] {
        for _ in 0..20 {
            let u = random_bandlimited(&g, 24, 1.0, &mut rng).unwrap();
            let u = u.scale(1.0 / sobolev_norm(&u, s5()));
            let d = q_direct(&u, &bg, &p).unwrap();
            let q = q_decomposed(&u, &bg, &p).unwrap();
            route = route.max(d.l2_distance(&q) / d.l2_distance(&RealField::zeros(&g)));
            let r = identity_residuals(&evaluate(&u, &bg, &p).unwrap());
            ident = ident.max(r.derivative).max(r.hilbert).max(r.route);
        }
    }
    verdict(
        route <= 1e-9 && ident <= 1e-9,
        format!("route {route:.3e}, identities {ident:.3e} (both <= 1e-9, 20 fields x 2 backgrounds)"),
    )
}

fn dispersion_law() -> Verdict {
    let g = grid(N, L);
    let dt = 1e-2;
    let zero = RealField::zeros(&g);
    let mut worst = 0.0f64;
    for b in [0.4, 1.0] {
        for eps in [0.0, 1e-3] {
            for k in [1, 2, 4] {
                let u0 = mode(&g, k, 1.0);
                let lam = 2.0 * PI * k as f64 / L;
                let exact = u0.scale((-(b * lam.powi(3) + eps * lam.powi(6)) * 100.0 * dt).exp());
                let mut u = u0.clone();
                for _ in 0..100 {
                    u = linstep_constant_b(&u, &zero, b, eps, dt).unwrap();
                }
                let prob = LinearProblem::new(Coefficient::Fixed(RealField::constant(&g, b)), u0, eps, 1.0, dt).unwrap();
                let (traj, _) = solve_linear_ivp(&prob, SobolevIndex::new(0.0).unwrap()).unwrap();
                worst = worst
                    .max(u.max_distance(&exact))
                    .max(traj.last().unwrap().max_distance(&exact));
            }
        }
    }
    verdict(worst <= 1e-8, format!("max deviation {worst:.3e} <= 1e-8 over 12 cases, 100 steps"))
}

fn ivantsov_consistency() -> Verdict {
    let p = PhysicsParams::zero_surface_tension(0.0).unwrap();
    let window_sup = |n: usize, l: f64| {
        let g = grid(n, l);
        let bg = Background::ivantsov(&g, 0.6).unwrap();
        let r = rhs(&RealField::zeros(&g), &bg, &p).unwrap();
        let half = bg.inner_half_width();
        g.nodes()
            .iter()
            .zip(r.samples())
            .filter(|(x, _)| x.abs() <= half)
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()))
    };
    let (r40, r80) = (window_sup(N, 40.0), window_sup(2 * N, 80.0));
    verdict(
        r40 <= 1e-4 && r80 < r40,
        format!("sup|rhs| on inner window: L=40 {r40:.3e} (limit 1e-4), L=80 {r80:.3e}"),
    )
}

fn steady_state() -> Verdict {
    let g = grid(N, L);
    let mut worst = 0.0f64;
    let mut completed = true;
    for scheme in [Scheme::Imex, Scheme::Picard] {
        let cfg = flat_config(&g, 1e-4, 0.1).with_scheme(scheme).with_output_stride(100);
        let traj = evolve(&RealField::zeros(&g), &cfg).unwrap();
        completed &= traj.completed() && (traj.final_time() - 0.1).abs() < 1e-12;
        worst = traj.fields.iter().map(RealField::max_abs).fold(worst, f64::max);
    }
    verdict(completed && worst <= 1e-14, format!("max|u| = {worst:.3e} over T = 0.1, imex and picard"))
}

fn smoothing_functional() -> Verdict {
    let g = grid(N, L);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u0 = random_bandlimited(&g, 16, 1.0, &mut rng).unwrap();
    let u0 = u0.scale(1.0 / sobolev_norm(&u0, s5().shifted(0.5)));
    let cfg = flat_config(&g, 1e-4, 0.1).with_output_stride(10);
    let report = smoothing_study(&u0, &cfg).unwrap();
    let drift = report.measurement("refinement_drift").unwrap();
    let ratio = report.measurement("smoothing_ratio").unwrap();

    // linear flow, u0 = sin xi, b = beta, s + 2 = 3
    let beta = 1.0;
    let t = 0.1;
    let g2 = grid(32, 2.0 * PI);
    let prob = LinearProblem::new(
        Coefficient::Fixed(RealField::constant(&g2, beta)),
        RealField::from_fn(&g2, f64::sin),
        0.0,
        t,
        1e-4,
    )
    .unwrap();
    let (traj, _) = solve_linear_ivp(&prob, SobolevIndex::new(1.0).unwrap()).unwrap();
    let value = smoothing_integral(&traj).unwrap().value;
    let exact = PI * (1.0 - (-2.0 * beta * t).exp()) / (2.0 * beta);
    let closed = (value - exact).abs();
    verdict(
        report.passed() && closed <= 1e-6,
        format!(
            "value/M0^2 = {ratio:.6e}, refinement drift {:.3}% (< 5%); closed form error {closed:.3e} <= 1e-6",
            100.0 * drift
        ),
    )
}

fn contraction() -> Verdict {
    let g = grid(N, L);
    let cfg = flat_config(&g, 1e-4, 0.1).with_scheme(Scheme::Picard);
    let r = contraction_study(&mode(&g, 3, 1e-3), &cfg, None).unwrap();
    let m = |k: &str| r.measurement(k).unwrap_or(f64::NAN);
    verdict(
        r.passed() && r.find_check("ratio grows on a 4x longer slab").is_some(),
        format!(
            "adapted slab {} steps: max ratio {:.3e} (<= 0.5); 4x slab: {:.3e}",
            m("adapted_slab_steps"),
            m("adapted_max_ratio"),
            m("long_slab_max_ratio")
        ),
    )
}

fn viscosity_limit() -> Verdict {
    let g = grid(N, L);
    let cfg = flat_config(&g, 1e-4, 0.1).with_output_stride(100);
    let r = viscosity_study(&mode(&g, 6, 1e-3), &cfg, &[1e-2, 5e-3, 2.5e-3]).unwrap();
    let ratio = r.checks[0].value;
    verdict(r.passed(), format!("Richardson ratio {ratio:.4} in [1.7, 2.3]"))
}

fn lipschitz() -> Verdict {
    let g = grid(N, L);
    let cfg = flat_config(&g, 1e-4, 0.1).with_output_stride(10);
    let p = random_bandlimited(&g, 8, 1.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let r = lipschitz_study(&mode(&g, 3, 1e-3), &p, &[1e-2, 5e-3, 2.5e-3], &cfg).unwrap();
    let ratio = r.measurement("R_ratio_two_smallest").unwrap();
    verdict(r.passed(), format!("R(5e-3)/R(2.5e-3) = {ratio:.4} in [0.8, 1.25]"))
}

fn determinism() -> Verdict {
    let text = "init = random_bandlimited 12 0.001\nseed = 11\nt_final = 0.01\noutput_stride = 20\n";
    let cfg = parse_config(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let emit = |name: &str| {
        let run = run_study(&cfg, &Study::Simulate).unwrap();
        let out = dir.path().join(name);
        emit_outputs(
            &RunArtifacts {
                config_text: &run.config_text,
                background: &run.background,
                trajectory: run.trajectory.as_ref(),
                report: &run.report,
                wall_time_s: 0.0,
            },
            &out,
        )
        .unwrap();
        out
    };
    let (a, b) = (emit("a"), emit("b"));
    let mut csvs: Vec<_> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    csvs.sort();
    let identical = csvs
        .iter()
        .all(|n| std::fs::read(a.join(n)).unwrap() == std::fs::read(b.join(n)).unwrap());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("run.json")).unwrap()).unwrap();
    let round_trip = parse_config(json["config"].as_str().unwrap()).unwrap() == cfg;
    verdict(
        identical && round_trip && csvs.len() > 2,
        format!("{} CSVs bit-identical: {identical}; run.json config round trip: {round_trip}", csvs.len()),
    )
}

type Criterion = (usize, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    (1, "operator identity suite", operator_identities),
    (2, "route equivalence", route_equivalence),
    (3, "linear dispersion law", dispersion_law),
    (4, "ivantsov consistency", ivantsov_consistency),
    (5, "steady state", steady_state),
    (6, "smoothing functional", smoothing_functional),
    (7, "contraction", contraction),
    (8, "viscosity limit", viscosity_limit),
    (9, "lipschitz dependence", lipschitz),
    (10, "determinism and format", determinism),
];

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag} {name}: {} [{:.1}s]", v.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
