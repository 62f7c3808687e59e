//! Seeded numerical property checks over random inputs.
//!
//! Each check returns a [`PropertyReport`] instead of panicking so the same
//! suite can back unit tests, the acceptance run and the `props` subcommand.

use std::fmt;

use rayon::prelude::*;

use crate::analysis::{cond_ratio_exact, empirical_distortion_snr, mmse_abc, snr_mmse, snr_zf, weyl_lower_bound};
use crate::channel::{normalize, sample_floored, sample_standard_gaussian, NoiseModel, DEFAULT_MAX_ATTEMPTS};
use crate::detection::{mmse_filter, zf_filter};
use crate::error::Result;
use crate::experiments::{cdf_grid, min_singular_samples, run_table1, simulate_ber};
use crate::linalg::{
    condition_number, gram, hermitian_eigenvalues, inverse, singular_values, svd, ComplexMatrix, Spectrum,
};
use crate::rng::RngStream;
use crate::stats::{ecdf_below, proportion_std_error};

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: &'static str,
    pub checked: usize,
    pub violations: usize,
    /// Description of the worst case, or of the first failure.
    pub detail: String,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {}: {} checked, {} violations ({})",
            self.name, self.checked, self.violations, self.detail
        )
    }
}

/// Tracks the worst observed value of a per-case error measure.
struct Tally {
    name: &'static str,
    checked: usize,
    violations: usize,
    worst: f64,
    first_failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            violations: 0,
            worst: 0.0,
            first_failure: None,
        }
    }

    /// Records a case whose error measure `err` must not exceed `tol`.
    fn check(&mut self, err: f64, tol: f64, context: impl FnOnce() -> String) {
        self.checked += 1;
        if err.is_nan() || err > tol {
            self.violations += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(format!("{} (error {err:.3e} > {tol:.1e})", context()));
            }
        }
        if err > self.worst {
            self.worst = err;
        }
    }

    fn report(self) -> PropertyReport {
        let detail = self
            .first_failure
            .unwrap_or_else(|| format!("worst error {:.3e}", self.worst));
        PropertyReport {
            name: self.name,
            checked: self.checked,
            violations: self.violations,
            detail,
        }
    }
}

const DIMS: [usize; 3] = [2, 4, 8];

fn stream(seed: u64, tag: &str, case: usize) -> rand_chacha::ChaCha8Rng {
    RngStream::for_experiment(seed, tag, case as u64).rng()
}

fn random_matrix(seed: u64, tag: &str, case: usize) -> ComplexMatrix {
    let n = DIMS[case % DIMS.len()];
    sample_standard_gaussian(n, &mut stream(seed, tag, case))
}

fn random_spectrum(seed: u64, tag: &str, case: usize) -> Result<Spectrum> {
    singular_values(normalize(&random_matrix(seed, tag, case))?.matrix())
}

/// Log-uniform noise variance in `[1e-4, 10]`.
fn random_noise(seed: u64, tag: &str, case: usize) -> Result<NoiseModel> {
    use rand::Rng;
    let exponent: f64 = stream(seed, tag, case).random_range(-4.0..1.0);
    NoiseModel::new(10f64.powf(exponent))
}

fn psd_spectrum(m: &ComplexMatrix) -> Result<Spectrum> {
    Spectrum::from_unsorted(hermitian_eigenvalues(m)?.into_iter().map(|v| v.max(0.0)).collect())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Every eigenvalue of `Sigma + Delta` is at least its Weyl lower bound.
pub fn weyl_validity(seed: u64, pairs: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("weyl_validity");
    for case in 0..pairs {
        let sigma = gram(&random_matrix(seed, "props/weyl/sigma", case));
        let delta = gram(&random_matrix(seed, "props/weyl/delta", case));
        let (s, d) = (psd_spectrum(&sigma)?, psd_spectrum(&delta)?);
        let sum = psd_spectrum(&sigma.add(&delta)?)?;
        for i in 1..=sum.len() {
            let bound = weyl_lower_bound(i, &s, &d)?;
            tally.check(bound - sum.values()[i - 1], 1e-9, || format!("case {case}, index {i}"));
        }
    }
    Ok(tally.report())
}

/// With `Delta = v I` the Weyl bound is attained: `lambda_i(Sigma + v I) = lambda_i(Sigma) + v`.
pub fn identity_shift_tightness(seed: u64, cases: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("identity_shift_tightness");
    for case in 0..cases {
        let sigma = gram(&random_matrix(seed, "props/shift", case));
        let v = random_noise(seed, "props/shift/noise", case)?.variance();
        let s = psd_spectrum(&sigma)?;
        let shifted = psd_spectrum(&sigma.add_scaled_identity(v)?)?;
        let d = Spectrum::new(vec![v; s.len()])?;
        for i in 1..=s.len() {
            let expected = s.values()[i - 1] + v;
            tally.check((shifted.values()[i - 1] - expected).abs(), 1e-9, || {
                format!("case {case}, index {i}")
            });
            tally.check((weyl_lower_bound(i, &s, &d)? - expected).abs(), 1e-9, || {
                format!("case {case}, bound {i}")
            });
        }
    }
    Ok(tally.report())
}

/// Unitary factors, reconstruction, and agreement with the independent
/// singular-value routine.
pub fn svd_invariants(seed: u64, cases: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("svd_invariants");
    for case in 0..cases {
        let a = random_matrix(seed, "props/svd", case);
        let n = a.rows() as f64;
        let f = svd(&a)?;
        let unitary_u = gram(&f.left_basis).distance_from_identity();
        let unitary_v = gram(&f.right_basis).distance_from_identity();
        tally.check(unitary_u.max(unitary_v), 1e-10 * n, || {
            format!("case {case}: unitarity")
        });
        let residual = f.reconstruct().sub(&a)?.frobenius_norm();
        tally.check(residual, 1e-10 * a.frobenius_norm(), || {
            format!("case {case}: reconstruction")
        });
        let other = singular_values(&a)?;
        let gap = f
            .spectrum
            .values()
            .iter()
            .zip(other.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        tally.check(gap, 1e-10 * f.spectrum.first(), || {
            format!("case {case}: routines disagree")
        });
    }
    Ok(tally.report())
}

/// Eigenvalues of `H^H H` equal the squared singular values of `H`.
pub fn gram_eigenvalues(seed: u64, cases: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("gram_eigenvalues");
    for case in 0..cases {
        let h = random_matrix(seed, "props/lemma-gram", case);
        let eig = psd_spectrum(&gram(&h))?;
        let squared = svd(&h)?.spectrum.squared();
        for (k, (e, s)) in eig.values().iter().zip(squared.values()).enumerate() {
            tally.check(rel(*e, *s), 1e-9, || format!("case {case}, index {}", k + 1));
        }
    }
    Ok(tally.report())
}

/// `cond(A) = cond(A^{-1})`.
pub fn inverse_condition(seed: u64, cases: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("inverse_condition");
    for case in 0..cases {
        let a = random_matrix(seed, "props/lemma-cond", case);
        let (c, ci) = (condition_number(&a)?, condition_number(&inverse(&a)?)?);
        tally.check(rel(ci, c), 1e-8, || format!("case {case}: cond {c}"));
    }
    Ok(tally.report())
}

/// `||W_zf H - I||_F <= 1e-8` and the noiseless MMSE filter equals ZF.
pub fn zf_and_mmse_zero(seed: u64, cases: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("zf_inverse_and_mmse_at_zero_noise");
    for case in 0..cases {
        let h = normalize(&random_matrix(seed, "props/filters", case))?.into_matrix();
        let zf = zf_filter(&h)?.matrix;
        tally.check(zf.matmul(&h)?.distance_from_identity(), 1e-8, || {
            format!("case {case}: W_zf H")
        });
        let mmse = mmse_filter(&h, NoiseModel::noiseless())?.matrix;
        tally.check(mmse.sub(&zf)?.frobenius_norm() / zf.frobenius_norm(), 1e-9, || {
            format!("case {case}: mmse(0) vs zf")
        });
    }
    Ok(tally.report())
}

/// `snr_mmse >= snr_zf` (within 1e-9 relative) and `a >= b`.
pub fn mmse_snr_dominance(seed: u64, cases: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("mmse_snr_dominance");
    for case in 0..cases {
        let spectrum = random_spectrum(seed, "props/dominance", case)?;
        let noise = random_noise(seed, "props/dominance/noise", case)?;
        let (m, z) = (snr_mmse(&spectrum, noise)?, snr_zf(&spectrum, noise)?);
        tally.check((z - m) / z, 1e-9, || format!("case {case}: mmse {m} < zf {z}"));
        let abc = mmse_abc(&spectrum, noise)?;
        tally.check(abc.b - abc.a, 1e-12 * abc.a, || format!("case {case}: a < b"));
    }
    Ok(tally.report())
}

/// `snr_mmse / snr_zf` lies in `[1, 1 + 1e-4]` once the noise is small
/// next to the weakest mode: at `sigma_n^2 = 1e-6` on channels floored at
/// `sigma_N >= 0.1`, and at `sigma_n^2 = 1e-6 sigma_N^2` on unconstrained ones.
pub fn snr_ratio_limit(seed: u64, cases: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("snr_ratio_limit");
    let mut check = |spectrum: &Spectrum, noise: NoiseModel, case: usize| -> Result<()> {
        let ratio = snr_mmse(spectrum, noise)? / snr_zf(spectrum, noise)?;
        // Distance outside [1, 1 + 1e-4].
        let err = (1.0 - ratio).max(ratio - 1.0 - 1e-4).max(0.0);
        tally.check(err, 0.0, || {
            format!("case {case}: ratio {ratio} at {}", noise.variance())
        });
        Ok(())
    };
    let absolute = NoiseModel::new(1e-6)?;
    for case in 0..cases {
        let n = DIMS[case % DIMS.len()];
        let floored = sample_floored(
            n,
            0.1,
            &mut stream(seed, "props/limit/floored", case),
            DEFAULT_MAX_ATTEMPTS,
        )?;
        check(floored.spectrum(), absolute, case)?;
        let spectrum = random_spectrum(seed, "props/limit", case)?;
        let scaled = NoiseModel::new(1e-6 * spectrum.last() * spectrum.last())?;
        check(&spectrum, scaled, case)?;
    }
    Ok(tally.report())
}

/// MMSE regularisation never worsens the filter condition number.
pub fn cond_ratio_bound(seed: u64, cases: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("cond_ratio_bound");
    for case in 0..cases {
        let h = normalize(&random_matrix(seed, "props/cond-ratio", case))?.into_matrix();
        let noise = random_noise(seed, "props/cond-ratio/noise", case)?;
        let report = cond_ratio_exact(&h, noise)?;
        tally.check(report.exact_ratio - 1.0, 1e-9, || {
            format!("case {case}: exact {}", report.exact_ratio)
        });
        tally.check(report.approx_ratio - 1.0, 0.0, || {
            format!("case {case}: approx {}", report.approx_ratio)
        });
    }
    Ok(tally.report())
}

/// Monte Carlo distortion SNR of the ZF filter agrees with the closed form.
pub fn zf_distortion_oracle(seed: u64, channels: usize, trials: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("zf_distortion_oracle");
    let mut cases = vec![(ComplexMatrix::from_diagonal(&[3f64.sqrt(), 1.0]), NoiseModel::new(0.1)?)];
    for case in 0..channels {
        let h = normalize(&sample_standard_gaussian(4, &mut stream(seed, "props/oracle", case)))?.into_matrix();
        cases.push((h, NoiseModel::new(0.4)?));
    }
    for (case, (h, noise)) in cases.iter().enumerate() {
        let closed = snr_zf(&singular_values(h)?, *noise)?;
        let mc = empirical_distortion_snr(
            h,
            &zf_filter(h)?,
            *noise,
            trials,
            RngStream::for_experiment(seed, "props/oracle/mc", case as u64),
        )?;
        tally.check((mc.snr - closed).abs() / mc.std_error, 3.0, || {
            format!("case {case}: {} +- {} vs {closed}", mc.snr, mc.std_error)
        });
    }
    Ok(tally.report())
}

/// Spectrum `(sqrt 3, 1)` at `sigma_n^2 = 0.1`: ZF 15.0, closed-form MMSE
/// 15.319, simulated MMSE distortion SNR 16.24.
pub fn worked_example(seed: u64, trials: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("worked_example");
    let spectrum = Spectrum::new(vec![3f64.sqrt(), 1.0])?;
    let noise = NoiseModel::new(0.1)?;
    let zf = snr_zf(&spectrum, noise)?;
    tally.check(rel(zf, 15.0), 5e-4, || format!("zf {zf}"));
    let mmse = snr_mmse(&spectrum, noise)?;
    tally.check(rel(mmse, 15.319), 5e-4, || format!("mmse {mmse}"));
    let h = ComplexMatrix::from_diagonal(spectrum.values());
    let oracle = empirical_distortion_snr(
        &h,
        &mmse_filter(&h, noise)?,
        noise,
        trials,
        RngStream::for_experiment(seed, "props/worked", 0),
    )?;
    tally.check(rel(oracle.snr, 16.24), 0.02, || format!("oracle {}", oracle.snr));
    Ok(tally.report())
}

/// Larger normalized channels have stochastically smaller `sigma_N`:
/// `F_M(x) >= F_N(x) - 3 se` for `M > N`.
pub fn cdf_dominance(seed: u64, trials: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("cdf_dominance");
    let mut curves = Vec::new();
    for n in DIMS {
        let mut s: Vec<f64> = min_singular_samples(n, trials, seed)?
            .iter()
            .map(|m| m.normalized)
            .collect();
        s.sort_by(f64::total_cmp);
        curves.push((n, s));
    }
    for (i, (small_n, small)) in curves.iter().enumerate() {
        for (large_n, large) in &curves[i + 1..] {
            for x in cdf_grid() {
                let (fs, fl) = (ecdf_below(small, x), ecdf_below(large, x));
                let se = proportion_std_error(fs, trials).hypot(proportion_std_error(fl, trials));
                tally.check(fs - fl - 3.0 * se, 0.0, || {
                    format!("N={small_n} vs N={large_n} at x={x}")
                });
            }
        }
    }
    Ok(tally.report())
}

/// Every normalized or floored channel satisfies `||H||_F^2 = N^2`.
pub fn normalization(seed: u64, cases: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("normalization");
    for case in 0..cases {
        let n = DIMS[case % DIMS.len()];
        let mut rng = stream(seed, "props/normalization", case);
        let plain = normalize(&sample_standard_gaussian(n, &mut rng))?;
        let floored = sample_floored(n, 0.1, &mut rng, DEFAULT_MAX_ATTEMPTS)?;
        let target = (n * n) as f64;
        for ch in [plain, floored] {
            tally.check(rel(ch.matrix().frobenius_norm_sqr(), target), 1e-8, || {
                format!("case {case}")
            });
            tally.check(rel(ch.spectrum().sum_of_squares(), target), 1e-8, || {
                format!("case {case}: spectrum")
            });
        }
    }
    Ok(tally.report())
}

/// BER falls with SNR and MMSE never loses to ZF, both within 3 standard errors.
pub fn ber_monotone_and_dominance(seed: u64, trials: usize) -> Result<PropertyReport> {
    let mut tally = Tally::new("ber_monotone_and_dominance");
    let grid: Vec<f64> = (0..=5).map(|k| 5.0 * k as f64).collect();
    for n in [2, 4] {
        let sweep = simulate_ber(n, &grid, 0.0, trials, seed)?;
        for k in 0..grid.len() {
            let (z, m) = (sweep.zf[k], sweep.mmse[k]);
            let se = z.std_error().hypot(m.std_error());
            tally.check(m.ber() - z.ber() - 3.0 * se, 0.0, || {
                format!("N={n}, {} dB: dominance", grid[k])
            });
            if k > 0 {
                for curve in [&sweep.zf, &sweep.mmse] {
                    let se = curve[k].std_error().hypot(curve[k - 1].std_error());
                    tally.check(curve[k].ber() - curve[k - 1].ber() - 3.0 * se, 0.0, || {
                        format!("N={n}, {} dB: not monotone", grid[k])
                    });
                }
            }
        }
    }
    Ok(tally.report())
}

/// The same run on one worker and on several yields identical tables.
pub fn worker_invariance(seed: u64) -> Result<PropertyReport> {
    let mut tally = Tally::new("worker_invariance");
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(|| {
                let table = run_table1(&[2, 4], 1_000, seed)?;
                let ber = simulate_ber(2, &[5.0, 10.0], 0.1, 2_000, seed)?;
                Ok::<_, crate::Error>((table, ber))
            })
    };
    let single = run(1)?;
    let multi = run(4)?;
    tally.check(f64::from(u8::from(single.0 != multi.0)), 0.0, || {
        "table1 differs".into()
    });
    tally.check(f64::from(u8::from(single.1 != multi.1)), 0.0, || {
        "ber sweep differs".into()
    });
    Ok(tally.report())
}

/// Runs the full suite at its default budgets.
pub fn run_all(seed: u64) -> Result<Vec<PropertyReport>> {
    type Check = fn(u64) -> Result<PropertyReport>;
    let checks: [Check; 15] = [
        |s| weyl_validity(s, 1_000),
        |s| identity_shift_tightness(s, 200),
        |s| svd_invariants(s, 200),
        |s| gram_eigenvalues(s, 200),
        |s| inverse_condition(s, 200),
        |s| zf_and_mmse_zero(s, 200),
        |s| mmse_snr_dominance(s, 1_000),
        |s| snr_ratio_limit(s, 200),
        |s| cond_ratio_bound(s, 200),
        |s| zf_distortion_oracle(s, 5, 20_000),
        |s| worked_example(s, 100_000),
        |s| cdf_dominance(s, 10_000),
        |s| normalization(s, 60),
        |s| ber_monotone_and_dominance(s, 20_000),
        worker_invariance,
    ];
    checks.par_iter().map(|check| check(seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_reports_first_failure() {
        let mut t = Tally::new("x");
        t.check(0.5, 1.0, || "ok".into());
        t.check(2.0, 1.0, || "bad".into());
        t.check(f64::NAN, 1.0, || "nan".into());
        let r = t.report();
        assert_eq!((r.checked, r.violations), (3, 2));
        assert!(r.detail.starts_with("bad"));
        assert!(!r.passed());
        assert!(r.to_string().starts_with("FAIL x"));
    }

    #[test]
    fn small_budget_suite_passes() {
        for report in [
            weyl_validity(1, 50).unwrap(),
            identity_shift_tightness(1, 20).unwrap(),
            svd_invariants(1, 30).unwrap(),
            gram_eigenvalues(1, 30).unwrap(),
            inverse_condition(1, 30).unwrap(),
            zf_and_mmse_zero(1, 30).unwrap(),
            mmse_snr_dominance(1, 100).unwrap(),
            snr_ratio_limit(1, 30).unwrap(),
            cond_ratio_bound(1, 30).unwrap(),
            normalization(1, 6).unwrap(),
        ] {
            assert!(report.passed(), "{report}");
            assert!(report.checked > 0);
        }
    }
}
