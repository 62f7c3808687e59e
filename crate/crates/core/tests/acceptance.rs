//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use lindet_core::analysis::edelman_tail;
use lindet_core::experiments::{
    min_singular_samples, run_cond_ratio_sweep, run_gain_sweep, run_table1, simulate_ber, DEFAULT_DIMS,
};
use lindet_core::props;
use lindet_core::stats::tail_at_or_above;

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    summary: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, summary: String) -> Self {
        Self {
            passed,
            summary,
            notes: Vec::new(),
        }
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn within_rel(value: f64, target: f64, tol: f64) -> bool {
    ((value - target) / target).abs() <= tol
}

fn table1() -> Outcome {
    let reference = [(2, 0.642, 4.27), (4, 0.447, 10.82), (8, 0.314, 24.32)];
    let table = run_table1(&[2, 4, 8], 10_000, SEED).expect("table1 run");
    let mut passed = true;
    let mut parts = Vec::new();
    for (row, (n, sigma, cond)) in table.rows().zip(reference) {
        assert_eq!(row.int("N"), n);
        let (ms, mc) = (row.f64("mean_sigma_min"), row.f64("mean_cond"));
        passed &= within_rel(ms, sigma, 0.03) && within_rel(mc, cond, 0.05);
        parts.push(format!(
            "N={n}: sigma_min {ms:.4} (ref {sigma}), cond {mc:.3} (ref {cond})"
        ));
    }
    Outcome::new(passed, parts.join("; "))
}

fn gain() -> Outcome {
    let low = run_gain_sweep(&[20], &[0.0], 5_000, SEED).expect("gain run");
    let g0 = low.rows().next().unwrap().f64("mean_gain_db");
    let high = run_gain_sweep(&DEFAULT_DIMS, &[50.0], 5_000, SEED).expect("gain run");
    let worst = high
        .rows()
        .map(|r| r.f64("mean_gain_db"))
        .fold(f64::NEG_INFINITY, f64::max);
    let infinite: i64 = high.rows().map(|r| r.int("infinite_trials")).sum();
    Outcome::new(
        (g0 - 15.0).abs() <= 2.0 && worst <= 0.5 && infinite == 0,
        format!("N=20 at 0 dB: {g0:.2} dB (ref 15 +- 2); worst gain at 50 dB over N in {DEFAULT_DIMS:?}: {worst:.3} dB (<= 0.5)"),
    )
}

fn ber_gap() -> Outcome {
    let grid: Vec<f64> = (0..=15).map(|k| 2.0 * k as f64).collect();
    let sweep = simulate_ber(4, &grid, 0.0, 200_000, SEED).expect("ber run");
    match sweep.gap_db(1e-2) {
        Some(gap) => Outcome::new(
            (gap - 4.2).abs() <= 1.0,
            format!("gap at BER 1e-2: {gap:.2} dB (ref 4.2 +- 1), 200000 channel uses per point"),
        ),
        None => Outcome::new(false, "BER 1e-2 not crossed on the grid".into()),
    }
}

fn cond_ratio() -> Outcome {
    let grid = [0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5];
    let n2 = run_cond_ratio_sweep(2, 15.0, &grid, 10.0, 200, SEED).expect("condratio run");
    let n4 = run_cond_ratio_sweep(4, 15.0, &grid, 10.0, 200, SEED).expect("condratio run");
    let at =
        |t: &lindet_core::ResultTable, s: f64, col: &str| t.rows().find(|r| r.f64("sigma_min") == s).unwrap().f64(col);
    let cond_mmse = at(&n2, 0.1, "mean_cond_w_mmse");
    let worst_above = |t: &lindet_core::ResultTable| {
        t.rows()
            .filter(|r| r.f64("sigma_min") >= 0.3)
            .map(|r| r.f64("relative_error"))
            .fold(0.0, f64::max)
    };
    let (w2, w4) = (worst_above(&n2), worst_above(&n4));
    let degrades = at(&n4, 0.1, "relative_error") > w4;
    let mut out = Outcome::new(
        (1.2..=1.7).contains(&cond_mmse) && w2 <= 0.10 && w4 <= 0.10 && degrades,
        format!(
            "N=2, sigma_min 0.1: mean cond(W_mmse) {cond_mmse:.3} (in [1.2, 1.7]); worst approx error for sigma_min >= 0.3: \
             {w2:.2e} (N=2), {w4:.2e} (N=4); N=4 error at 0.1: {:.3}",
            at(&n4, 0.1, "relative_error")
        ),
    );
    out.notes.push(format!(
        "sensitivity: N=4 with geometric interior singular values gives mean cond(W_mmse) {:.3} at sigma_min 0.1",
        at(&n4, 0.1, "mean_cond_w_mmse")
    ));
    out
}

fn edelman() -> Outcome {
    let n = 64;
    let trials = 20_000;
    let samples = min_singular_samples(n, trials, SEED).expect("cdf samples");
    let sorted = |scale: f64| {
        let mut v: Vec<f64> = samples.iter().map(|s| scale * s.raw).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let scaled = sorted(n as f64);
    let root = sorted((n as f64).sqrt());
    let mut passed = true;
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    for x in [0.5, 1.0, 2.0] {
        let p = tail_at_or_above(&scaled, x);
        let reference = edelman_tail(x).unwrap();
        passed &= (p - reference).abs() <= 0.03;
        parts.push(format!("x={x}: {p:.4} vs {reference:.4}"));
        notes.push(format!(
            "diagnostic x={x}: P[sqrt(N) sigma_N >= x] = {:.4}, exp(-x^2) = {:.4}, exp(-x^2/N) = {:.4}",
            tail_at_or_above(&root, x),
            (-x * x).exp(),
            (-x * x / n as f64).exp()
        ));
    }
    let mut out = Outcome::new(
        passed,
        format!("N=64, {trials} samples, P[N sigma_N >= x]: {}", parts.join(", ")),
    );
    out.notes = notes;
    out
}

fn properties() -> Outcome {
    let reports = props::run_all(SEED).expect("property suite");
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    let mut out = Outcome::new(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} properties, no violations", reports.len())
        } else {
            format!("violations in {failed:?}")
        },
    );
    out.notes = reports.iter().map(ToString::to_string).collect();
    out
}

fn coincidence_order() -> Outcome {
    let grid: Vec<f64> = (10..=45).map(f64::from).collect();
    let mut points = Vec::new();
    for floor in [0.3, 0.2, 0.1] {
        let sweep = simulate_ber(4, &grid, floor, 100_000, SEED).expect("ber run");
        points.push((floor, sweep.coincidence_snr(0.1)));
    }
    let snrs: Option<Vec<f64>> = points.iter().map(|p| p.1).collect();
    let passed = snrs.as_ref().is_some_and(|s| s.windows(2).all(|w| w[0] < w[1]));
    let text = points
        .iter()
        .map(|(f, s)| match s {
            Some(s) => format!("floor {f}: {s} dB"),
            None => format!("floor {f}: none"),
        })
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(
        passed,
        format!("coincidence SNR (ref 25/28/33 dB) {text}; strictly increasing as the floor drops"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 table1", table1),
        ("2 gain", gain),
        ("3 ber-gap", ber_gap),
        ("4 cond-ratio", cond_ratio),
        ("5 edelman-tail", edelman),
        ("6 properties", properties),
        ("7 coincidence-order", coincidence_order),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {name}: {} [{:.1}s]",
            outcome.summary,
            start.elapsed().as_secs_f64()
        );
        for note in &outcome.notes {
            println!("    {note}");
        }
        failures += usize::from(!outcome.passed);
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
