//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p pitune --test acceptance`.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use pitune::cli;
use pitune::freqdomain::{
    closed_form, comp_sensitivity_tf, magnitude_peak, robustness_report, sensitivity_tf, FreqMetrics,
};
use pitune::loop_analysis::{analyze_closed_loop, closed_loop, loop_tf};
use pitune::reference::CASES;
use pitune::tf::Polynomial;
use pitune::timedomain::{
    analytic_step_tuned, default_horizon, is_monotonic, percent_overshoot, settling_constant, settling_time,
    simulate_step, StepResponse, DEFAULT_BAND, DEFAULT_DT, DEFAULT_MONOTONIC_TOL,
};
use pitune::{tune_pi, PiController, Plant};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_0001;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Plants with kp in [0.1, 10], t2 log-uniform in [0.01, 10] and t1/t2 in [1, 100].
fn random_plants(n: usize, seed: u64) -> Vec<Plant> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let kp = rng.random_range(0.1..10.0);
            let t2 = log_uniform(&mut rng, 0.01, 10.0);
            let ratio = rng.random_range(1.0..100.0);
            Plant::new(kp, ratio * t2, t2).unwrap()
        })
        .collect()
}

fn tuned_response(plant: &Plant, band_horizon: Option<f64>) -> StepResponse {
    let g = closed_loop(plant, &tune_pi(plant));
    let horizon = band_horizon.unwrap_or_else(|| default_horizon(plant));
    simulate_step(&g, DEFAULT_DT, horizon).unwrap()
}

fn sorted_re(poles: &[Complex64]) -> Vec<f64> {
    let mut v: Vec<f64> = poles.iter().map(|p| p.re).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst_gain = 0.0f64;
    let mut worst_pole = 0.0f64;
    for case in &CASES {
        let plant = case.plant();
        let ctrl = tune_pi(&plant);
        worst_gain = worst_gain
            .max((ctrl.k() - case.k).abs() / case.k)
            .max((ctrl.ti() - case.ti).abs() / case.ti);
        let report = analyze_closed_loop(&plant, &ctrl).unwrap();
        let mut want = vec![-1.0 / plant.t1(), -0.5 / plant.t2(), -0.5 / plant.t2()];
        want.sort_by(f64::total_cmp);
        for (got, want) in sorted_re(&report.poles).iter().zip(&want) {
            worst_pole = worst_pole.max((got - want).abs());
        }
        for p in &report.poles {
            worst_pole = worst_pole.max(p.im.abs());
        }
        // the published pole columns agree with the closed form
        worst_pole = worst_pole
            .max((case.p1 + 1.0 / case.t1).abs())
            .max((case.p23 + 0.5 / case.t2).abs());
    }
    let elapsed = start.elapsed();
    check(
        worst_gain <= 1e-12 && worst_pole <= 1e-8 && elapsed < Duration::from_secs(1),
        format!("max rel K/Ti error {worst_gain:.1e}, max pole error {worst_pole:.1e}, {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst_ts = 0.0f64;
    let mut worst_po = 0.0f64;
    let mut all_monotonic = true;
    for case in &CASES {
        let r = tuned_response(&case.plant(), None);
        worst_ts = worst_ts.max((settling_time(&r, DEFAULT_BAND).unwrap() - case.ts).abs());
        worst_po = worst_po.max(percent_overshoot(&r));
        all_monotonic &= is_monotonic(&r, DEFAULT_MONOTONIC_TOL);
    }
    let elapsed = start.elapsed();
    check(
        worst_ts <= 0.010 && worst_po <= 1e-6 && all_monotonic && elapsed < Duration::from_secs(5),
        format!("max |Ts - table| {worst_ts:.4} s, max PO {worst_po:.1e} %, monotonic {all_monotonic}, {elapsed:.2?}"),
    )
}

fn criterion_3() -> Outcome {
    let plants: Vec<Plant> = CASES.iter().map(|c| c.plant()).chain(random_plants(100, SEED)).collect();
    let metrics: Vec<FreqMetrics> = plants
        .iter()
        .map(|p| robustness_report(p, &tune_pi(p)).unwrap())
        .collect();
    let ms_exact = 2.0 / 3.0f64.sqrt();
    let spread = |f: fn(&FreqMetrics) -> f64| {
        let (lo, hi) = metrics
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi - lo
    };
    let ms_err = metrics.iter().map(|m| (m.ms - 1.154_701).abs()).fold(0.0, f64::max);
    let ms_exact_err = metrics.iter().map(|m| (m.ms - ms_exact).abs()).fold(0.0, f64::max);
    let mt_err = metrics.iter().map(|m| (m.mt - 1.0).abs()).fold(0.0, f64::max);
    let pm_err = metrics.iter().map(|m| (m.pm_deg - 76.35).abs()).fold(0.0, f64::max);
    let (s_ms, s_mt, s_pm) = (spread(|m| m.ms), spread(|m| m.mt), spread(|m| m.pm_deg));
    check(
        ms_err <= 1e-6
            && ms_exact_err <= 1e-6
            && mt_err <= 1e-9
            && pm_err <= 0.01
            && s_ms < 1e-6
            && s_mt < 1e-6
            && s_pm < 1e-3,
        format!(
            "{} plants: |Ms-1.154701| {ms_err:.1e}, |Mt-1| {mt_err:.1e}, |PM-76.35| {pm_err:.4} deg, \
             spread Ms {s_ms:.1e} Mt {s_mt:.1e} PM {s_pm:.1e} deg",
            plants.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for case in &CASES {
        let plant = case.plant();
        let r = tuned_response(&plant, None);
        let ts = settling_time(&r, DEFAULT_BAND).unwrap();
        for (t, y) in r.times().zip(r.samples()).take_while(|(t, _)| *t <= 2.0 * ts + 1e-12) {
            worst = worst.max((y - analytic_step_tuned(plant.t2(), t)).abs());
        }
    }
    check(worst <= 1e-6, format!("max |RK4 - closed form| over [0, 2 Ts]: {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let tol = DEFAULT_DT + DEFAULT_DT;
    let mut worst = 0.0f64;
    for band in [0.02, 0.05] {
        let tau = settling_constant(band).unwrap();
        for case in &CASES {
            let plant = case.plant();
            let ts = settling_time(&tuned_response(&plant, None), band).unwrap();
            worst = worst.max((ts - 2.0 * plant.t2() * tau).abs());
        }
    }
    check(
        worst <= tol,
        format!("max |Ts - 2 T2 tau*| over bands 2%, 5%: {worst:.4} s (tol {tol} s)"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);

    let mut vieta_worst = 0.0f64;
    let mut dc_exact = true;
    let mut sum_worst = 0.0f64;
    for _ in 0..1000 {
        let plant = Plant::new(
            rng.random_range(0.1..10.0),
            log_uniform(&mut rng, 0.01, 10.0),
            log_uniform(&mut rng, 0.01, 10.0),
        )
        .unwrap();
        let ctrl = PiController::new(log_uniform(&mut rng, 0.01, 100.0), log_uniform(&mut rng, 0.01, 10.0)).unwrap();
        let report = analyze_closed_loop(&plant, &ctrl).unwrap();
        let coeffs = report.char_poly.coeffs();
        for (i, r) in report.vieta_residuals.iter().enumerate() {
            vieta_worst = vieta_worst.max(r / coeffs[2 - i].abs().max(1.0));
        }
        dc_exact &= closed_loop(&plant, &ctrl).eval(0.0).unwrap() == Complex64::new(1.0, 0.0);

        let l = loop_tf(&plant, &ctrl);
        let (s, t) = (sensitivity_tf(&l), comp_sensitivity_tf(&l));
        for _ in 0..5 {
            let w = log_uniform(&mut rng, 1e-3, 1e3);
            let sum = s.eval(w).unwrap() + t.eval(w).unwrap();
            sum_worst = sum_worst.max((sum - 1.0).norm());
        }
    }

    let mut residual_ok = true;
    for _ in 0..1000 {
        let roots: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..-0.01)).collect();
        let p = Polynomial::from_roots(&roots);
        for r in p.roots().unwrap() {
            residual_ok &= p.eval(r).norm() <= p.root_tolerance(r);
        }
    }

    check(
        vieta_worst <= 1e-8 && sum_worst <= 1e-12 && dc_exact && residual_ok,
        format!(
            "Vieta {vieta_worst:.1e} (scaled), |S+T-1| {sum_worst:.1e}, DC gain exact {dc_exact}, \
             root residuals within tolerance {residual_ok}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut min_po = f64::INFINITY;
    let mut any_monotonic = false;
    for case in &CASES {
        let plant = case.plant();
        let tuned = tune_pi(&plant);
        let ctrl = tuned.with_gain(1.2 * tuned.k()).unwrap();
        let r = simulate_step(&closed_loop(&plant, &ctrl), DEFAULT_DT, default_horizon(&plant)).unwrap();
        min_po = min_po.min(percent_overshoot(&r));
        any_monotonic |= is_monotonic(&r, DEFAULT_MONOTONIC_TOL);
    }
    check(
        min_po > 0.0 && !any_monotonic,
        format!("K x 1.2: min PO {min_po:.4} %, any monotonic {any_monotonic}"),
    )
}

fn criterion_8() -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(["pitune", "verify"], &mut out, &mut err);
    let text = String::from_utf8(out).unwrap();
    let cell_lines = text
        .lines()
        .filter(|l| l.trim_end().ends_with("PASS") || l.trim_end().ends_with("FAIL"))
        .count();
    let has_table = text.contains("Cell checks") && text.contains("Table 2") && text.contains("Table 3");
    check(
        code == cli::EXIT_OK && has_table && cell_lines >= 6 * 6 + 6 * 7,
        format!("exit {code}, {cell_lines} pass/fail lines"),
    )
}

/// Closed form of the sensitivity peak agrees with the numerical search.
fn supporting_closed_form_peak() -> Outcome {
    let mut worst = 0.0f64;
    for case in &CASES {
        let plant = case.plant();
        let l = loop_tf(&plant, &tune_pi(&plant));
        let (lo, hi) = (1e-3 / plant.t2(), 1e3 / plant.t2());
        let (numeric, _) = magnitude_peak(&sensitivity_tf(&l), lo, hi).unwrap();
        // independent path: brute-force maximum of the closed form over u
        let n = 200_000;
        let closed = (0..=n)
            .map(|i| closed_form::sensitivity_mag(1e-3 * 1e6f64.powf(i as f64 / n as f64)))
            .fold(0.0f64, f64::max);
        worst = worst.max((numeric - closed).abs());
    }
    check(worst <= 1e-6, format!("max |Ms numeric - Ms closed form| {worst:.1e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("C1 Table 2 reproduction", criterion_1),
        ("C2 Table 3 reproduction", criterion_2),
        ("C3 universal constants", criterion_3),
        ("C4 RK4 vs closed-form step", criterion_4),
        ("C5 settling law", criterion_5),
        ("C6 property suites", criterion_6),
        ("C7 monotonicity boundary", criterion_7),
        ("C8 verify command", criterion_8),
        ("-- closed-form vs numeric Ms", supporting_closed_form_peak),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = run();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
