//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL
//! line each and exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use two_slit_bohm::ensemble::{integrate_trajectory, run_ensemble, Conditioning, SamplerConfig};
use two_slit_bohm::guidance::{com_closed_form, velocity, PairState};
use two_slit_bohm::integrate::IntegratorConfig;
use two_slit_bohm::model::{psi_slit, psi_total, PhysicalParams, Slit};
use two_slit_bohm::scenario::{
    distance_for_spreading, run_scenario, run_selective_control, Histogram, ScenarioConfig,
    REJECTION_BUDGET,
};
use two_slit_bohm::sqm::{density_support, joint_density, marginal_bin_masses, total_probability};

const NORM_TOL: f64 = 1e-4;
const SYMMETRY_REL_TOL: f64 = 1e-14;
const AXIS_VELOCITY_TOL: f64 = 1e-12;
const FD_REL_TOL: f64 = 1e-6;
const RANDOM_STATES: usize = 1_000;
const ENSEMBLE_PAIRS: usize = 100_000;
const CHI2_MIN_P: f64 = 0.01;
const CHI2_INTERIOR_BINS: usize = 48;
const CHI2_INTERIOR_SIGMAS: f64 = 3.5;
const CLOSED_FORM_REL_TOL: f64 = 0.02;
const SYMMETRY_METRIC_MAX: f64 = 0.2;
const SQM_ASYMMETRIC_MIN: f64 = 0.05;
const BAND_FACTOR: f64 = 2.0;
const CONTROL_BAND_FRACTION: f64 = 0.1;
const DETERMINISM_PAIRS: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.pass &= elapsed <= budget;
    o.detail = format!("{} [{:.2}s / budget {:.0}s]", o.detail, elapsed.as_secs_f64(), budget.as_secs_f64());
    o
}

fn base() -> PhysicalParams {
    PhysicalParams::natural(1.0, 0.1, 10.0)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

fn random_states(seed: u64) -> Vec<PairState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..RANDOM_STATES)
        .map(|_| PairState::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(0.0..3.0)))
        .collect()
}

fn normalization() -> Outcome {
    let p = base();
    let t_screen = distance_for_spreading(&p, 1.0) / p.ux();
    let errs: Vec<f64> = [0.0, t_screen].iter().map(|&t| (total_probability(&p, t) - 1.0).abs()).collect();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(worst <= NORM_TOL, format!("max |norm - 1| = {worst:.2e} at t in {{0, T}} (tol {NORM_TOL:.0e})"))
}

fn symmetry_suite() -> Outcome {
    let p = base();
    let mut identity = 0.0f64;
    let mut exchange = 0.0f64;
    let mut reflection = 0.0f64;
    let mut density = 0.0f64;
    let mut axis = 0.0f64;
    let mut antisym = 0.0f64;
    for s in random_states(1) {
        let (y1, y2, t) = (s.y1, s.y2, s.t);
        identity = identity.max(rel(psi_slit(&p, Slit::A, 0.0, y1, t), psi_slit(&p, Slit::B, 0.0, -y1, t)));
        let psi = psi_total(&p, 0.0, y1, 0.0, y2, t);
        exchange = exchange.max(rel(psi, psi_total(&p, 0.0, y2, 0.0, y1, t)));
        reflection = reflection.max(rel(psi, psi_total(&p, 0.0, -y1, 0.0, -y2, t)));
        let d = joint_density(&p, y1, y2, t);
        let d_swapped = joint_density(&p, y2, y1, t);
        let d_reflected = joint_density(&p, -y1, -y2, t);
        density = density.max((d - d_swapped).abs().max((d - d_reflected).abs()) / d);
        let v0 = velocity(&p, &PairState::new(0.0, y2, t)).unwrap();
        let w0 = velocity(&p, &PairState::new(y1, 0.0, t)).unwrap();
        axis = axis.max(v0.v1.abs()).max(w0.v2.abs());
        let v = velocity(&p, &s).unwrap();
        let r = velocity(&p, &PairState::new(-y1, -y2, t)).unwrap();
        let scale = v.v1.abs().max(v.v2.abs()).max(1.0);
        antisym = antisym.max(((v.v1 + r.v1).abs().max((v.v2 + r.v2).abs())) / scale);
    }
    let pass = identity <= SYMMETRY_REL_TOL
        && exchange <= SYMMETRY_REL_TOL
        && reflection <= SYMMETRY_REL_TOL
        && density <= SYMMETRY_REL_TOL
        && axis <= AXIS_VELOCITY_TOL
        && antisym <= SYMMETRY_REL_TOL;
    outcome(
        pass,
        format!(
            "slit identity {identity:.1e}, exchange {exchange:.1e}, reflection {reflection:.1e}, density {density:.1e}, \
             axis |v| {axis:.1e}, antisymmetry {antisym:.1e} (tol {SYMMETRY_REL_TOL:.0e} / {AXIS_VELOCITY_TOL:.0e}, {RANDOM_STATES} states)"
        ),
    )
}

/// Phase gradient by fourth-order central differences of `arg psi`.
fn phase_gradient(p: &PhysicalParams, s: &PairState) -> (f64, f64) {
    let h = 1e-3;
    let psi0 = psi_total(p, 0.0, s.y1, 0.0, s.y2, s.t);
    let phase = |dy1: f64, dy2: f64| (psi_total(p, 0.0, s.y1 + dy1, 0.0, s.y2 + dy2, s.t) / psi0).arg();
    let d1 = (-phase(2.0 * h, 0.0) + 8.0 * phase(h, 0.0) - 8.0 * phase(-h, 0.0) + phase(-2.0 * h, 0.0)) / (12.0 * h);
    let d2 = (-phase(0.0, 2.0 * h) + 8.0 * phase(0.0, h) - 8.0 * phase(0.0, -h) + phase(0.0, -2.0 * h)) / (12.0 * h);
    (p.hbar / p.mass * d1, p.hbar / p.mass * d2)
}

fn velocity_field() -> Outcome {
    let p = base();
    let floor = 1e-3 * p.hbar / (p.mass * p.sigma0);
    let mut worst = 0.0f64;
    for s in random_states(2) {
        let v = velocity(&p, &s).unwrap();
        let (f1, f2) = phase_gradient(&p, &s);
        worst = worst
            .max((v.v1 - f1).abs() / v.v1.abs().max(floor))
            .max((v.v2 - f2).abs() / v.v2.abs().max(floor));
    }
    outcome(
        worst <= FD_REL_TOL,
        format!("max relative deviation {worst:.2e} over {RANDOM_STATES} states (tol {FD_REL_TOL:.0e})"),
    )
}

struct EnsembleChecks {
    crossings: u64,
}

fn equivariance(checks: &mut EnsembleChecks) -> Outcome {
    let p = base();
    let t = distance_for_spreading(&p, 1.0) / p.ux();
    let sampler = SamplerConfig {
        n_pairs: ENSEMBLE_PAIRS,
        seed: 2024,
        conditioning: Conditioning::None,
    };
    let run = run_ensemble(&p, &sampler, &IntegratorConfig::default(), t, None).unwrap();
    checks.crossings += run.axis_crossings();

    let width = CHI2_INTERIOR_SIGMAS * p.sigma0 * (1.0 + 1.0f64).sqrt();
    let edges: Vec<f64> = (0..=CHI2_INTERIOR_BINS)
        .map(|i| -width + 2.0 * width * i as f64 / CHI2_INTERIOR_BINS as f64)
        .collect();
    let mut hist = Histogram::new(edges.clone());
    run.completed().for_each(|tr| hist.fill(tr.terminal.y1));
    let r = density_support(&p, t);
    let mut expected = marginal_bin_masses(&p, t, &[-r, -width]);
    expected.extend(marginal_bin_masses(&p, t, &edges));
    expected.extend(marginal_bin_masses(&p, t, &[width, r]));
    let mut observed = vec![hist.underflow];
    observed.extend(&hist.counts);
    observed.push(hist.overflow);

    let n = run.counts.completed as f64;
    let mass: f64 = expected.iter().sum();
    let chi2: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| {
            let e = e / mass * n;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let df = (observed.len() - 1) as f64;
    let p_value = ChiSquared::new(df).unwrap().sf(chi2);
    let rejection = run.counts.rejection_fraction();
    outcome(
        p_value > CHI2_MIN_P && rejection < REJECTION_BUDGET,
        format!(
            "chi2 = {chi2:.2}, {} bins, df = {df}, p = {p_value:.4} (min {CHI2_MIN_P}); rejection {rejection:.1e} (max {REJECTION_BUDGET:.0e}); n = {}",
            observed.len(),
            run.counts.completed
        ),
    )
}

fn closed_form() -> Outcome {
    let p = PhysicalParams::natural(1.0, 0.01, 10.0);
    let s = p.spreading_rate();
    let mut worst = 0.0f64;
    let mut all_completed = true;
    for st in [0.5, 1.0, 2.0] {
        let t = st / s;
        for y0 in [0.1, 0.5, 1.0, 2.0] {
            let tr = integrate_trajectory(&p, PairState::new(y0, y0, 0.0), t, &IntegratorConfig::default());
            all_completed &= tr.is_completed();
            let want = y0 * (1.0 + st * st).sqrt();
            worst = worst.max((tr.terminal.com() - want).abs() / want);
            debug_assert!((com_closed_form(&p, y0, t) - want).abs() < 1e-12);
        }
    }
    outcome(
        all_completed && worst <= CLOSED_FORM_REL_TOL,
        format!("max relative deviation {worst:.2e} over 12 (y0, sT) points (tol {CLOSED_FORM_REL_TOL})"),
    )
}

fn symmetric_contrast(checks: &mut EnsembleChecks) -> Outcome {
    let cfg = ScenarioConfig::symmetric_default(ENSEMBLE_PAIRS, 7);
    let r = run_scenario(&cfg, None).unwrap().report;
    checks.crossings += r.axis_crossings;
    let metric = r.symmetry_metric.unwrap();
    outcome(
        metric < SYMMETRY_METRIC_MAX && r.sqm_asymmetric_probability > SQM_ASYMMETRIC_MIN,
        format!(
            "symmetry_metric = {metric:.4} (max {SYMMETRY_METRIC_MAX}), SQM non-mirror probability = {:.4} (min {SQM_ASYMMETRIC_MIN}); \
             BQM non-mirror fraction = {:.4}",
            r.sqm_asymmetric_probability, r.bqm_asymmetric_fraction
        ),
    )
}

fn empty_band(checks: &mut EnsembleChecks) -> Outcome {
    let cfg = ScenarioConfig::selective_default(ENSEMBLE_PAIRS, 11);
    let r = run_scenario(&cfg, None).unwrap().report;
    checks.crossings += r.axis_crossings;
    let band = &r.empty_band;
    let l = band.l_predicted_target.unwrap();
    let ratio = band.length_measured / l;
    let control = run_selective_control(&cfg).unwrap();
    checks.crossings += control.axis_crossings;
    let flagged = r.notes.iter().any(|n| n.contains("contested"));
    let pass = r.n_completed == ENSEMBLE_PAIRS
        && (1.0 / BAND_FACTOR..=BAND_FACTOR).contains(&ratio)
        && control.empty_band.length_measured < CONTROL_BAND_FRACTION * l
        && flagged;
    outcome(
        pass,
        format!(
            "band [{:.3}, {:.3}], length {:.3} vs L = {l:.3} (ratio {ratio:.3}, factor {BAND_FACTOR}); L from mean <y0> = {:.3}; \
             control length {:.2e} (max {:.1}); flagged contested: {flagged}",
            band.lower,
            band.upper,
            band.length_measured,
            band.l_predicted,
            control.empty_band.length_measured,
            CONTROL_BAND_FRACTION * l
        ),
    )
}

fn determinism() -> Outcome {
    let configs = [
        ScenarioConfig::symmetric_default(DETERMINISM_PAIRS, 3),
        ScenarioConfig::selective_default(DETERMINISM_PAIRS, 3),
    ];
    let mut same = true;
    for cfg in &configs {
        let outputs: Vec<String> = [1, 4]
            .iter()
            .map(|&threads| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
                let report = pool.install(|| run_scenario(cfg, None)).unwrap().report;
                serde_json::to_string(&report).unwrap()
            })
            .collect();
        same &= outputs[0] == outputs[1];
    }
    outcome(same, format!("byte-identical reports with 1 and 4 threads, both cases, n = {DETERMINISM_PAIRS}"))
}

fn main() {
    let mut checks = EnsembleChecks { crossings: 0 };
    let mut results = Vec::new();
    results.push(("1 normalization", timed(Duration::from_secs(1), normalization)));
    results.push(("2 symmetry suite", timed(Duration::from_secs(1), symmetry_suite)));
    results.push(("3 velocity field", timed(Duration::from_secs(1), velocity_field)));
    results.push(("4 equivariance", timed(Duration::from_secs(120), || equivariance(&mut checks))));
    results.push(("5 com closed form", timed(Duration::from_secs(10), closed_form)));
    results.push(("6 symmetric contrast", timed(Duration::from_secs(120), || symmetric_contrast(&mut checks))));
    results.push(("7 empty band", timed(Duration::from_secs(300), || empty_band(&mut checks))));
    results.push((
        "8 no crossing",
        outcome(checks.crossings == 0, format!("{} sign changes across criteria 4-7", checks.crossings)),
    ));
    results.push(("9 determinism", determinism()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
