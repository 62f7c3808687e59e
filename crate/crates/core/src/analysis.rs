//! Closed-form conditioning and post-processing SNR analysis of the ZF and
//! MMSE filters.
//!
//! Infinite SNR is represented by `f64::INFINITY`; it is the correct value in
//! the noiseless limit and callers are expected to handle it.

use rayon::prelude::*;

use crate::channel::{sample_noise, transmit, NoiseModel};
use crate::detection::{mmse_filter, qpsk_modulate, zf_filter, BitBlock, FilterMatrix};
use crate::error::{Error, Result};
use crate::linalg::{condition_number, singular_values, ComplexMatrix, Spectrum};
use crate::rng::RngStream;

/// Near-zero guard for the MMSE SNR denominator, relative to `a + b`.
pub const MMSE_DENOMINATOR_GUARD: f64 = 1e-12;

/// Weyl lower bound on the `i`-th (1-based) eigenvalue of `Sigma + Delta`:
/// the maximum over `k` of `sigma[i + k] + delta[N - k]`.
pub fn weyl_lower_bound(i: usize, sigma_spectrum: &Spectrum, delta_spectrum: &Spectrum) -> Result<f64> {
    let n = sigma_spectrum.len();
    if delta_spectrum.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: delta_spectrum.len(),
        });
    }
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let (s, d) = (sigma_spectrum.values(), delta_spectrum.values());
    // 1-based: sigma_{i+k} + delta_{N-k}, k = 0..=N-i.
    Ok((0..=n - i)
        .map(|k| s[i + k - 1] + d[n - k - 1])
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Approximate `cond(W_mmse) / cond(W_zf)`:
/// `(1 + sigma_n^2 / sigma_1^2) / (1 + sigma_n^2 / sigma_N^2)`.
pub fn cond_ratio_approx(sigma_1: f64, sigma_n: f64, noise: NoiseModel) -> Result<f64> {
    if sigma_n == 0.0 {
        return Err(Error::Singular {
            sigma_min: sigma_n,
            sigma_max: sigma_1,
        });
    }
    if !(sigma_n > 0.0 && sigma_1 >= sigma_n && sigma_1.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need sigma_1 >= sigma_N > 0, got {sigma_1} and {sigma_n}"
        )));
    }
    let v = noise.variance();
    Ok((1.0 + v / (sigma_1 * sigma_1)) / (1.0 + v / (sigma_n * sigma_n)))
}

/// Exact and approximate conditioning of the two filters for one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondRatioReport {
    pub exact_ratio: f64,
    pub approx_ratio: f64,
    pub cond_w_zf: f64,
    pub cond_w_mmse: f64,
}

impl CondRatioReport {
    /// `|approx - exact| / exact`.
    pub fn relative_error(&self) -> f64 {
        (self.approx_ratio - self.exact_ratio).abs() / self.exact_ratio
    }
}

pub fn cond_ratio_exact(h: &ComplexMatrix, noise: NoiseModel) -> Result<CondRatioReport> {
    let spectrum = singular_values(h)?;
    spectrum.condition_number()?;
    let cond_w_zf = condition_number(&zf_filter(h)?.matrix)?;
    let cond_w_mmse = condition_number(&mmse_filter(h, noise)?.matrix)?;
    Ok(CondRatioReport {
        exact_ratio: cond_w_mmse / cond_w_zf,
        approx_ratio: cond_ratio_approx(spectrum.first(), spectrum.last(), noise)?,
        cond_w_zf,
        cond_w_mmse,
    })
}

/// ZF post-processing SNR `N / sum_i (sigma_n^2 / sigma_i^2)`.
pub fn snr_zf(spectrum: &Spectrum, noise: NoiseModel) -> Result<f64> {
    if spectrum.last() == 0.0 {
        return Err(Error::Singular {
            sigma_min: 0.0,
            sigma_max: spectrum.first(),
        });
    }
    let v = noise.variance();
    if v == 0.0 {
        return Ok(f64::INFINITY);
    }
    let n = spectrum.len() as f64;
    let denom: f64 = spectrum.values().iter().map(|s| v / (s * s)).sum();
    Ok(n / denom)
}

/// The three spectral sums of the MMSE SNR formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmseAbc {
    /// `(sum_i q_i)^2` with `q_i = sigma_i^2 / (sigma_i^2 + sigma_n^2)`.
    pub a: f64,
    /// `sum_i q_i^2`.
    pub b: f64,
    /// `sum_i sigma_i^2 / (sigma_i^2 + sigma_n^2)^2`.
    pub c: f64,
}

fn shrinkage_factors(spectrum: &Spectrum, noise: NoiseModel) -> Result<Vec<f64>> {
    let v = noise.variance();
    if v == 0.0 && spectrum.last() == 0.0 {
        return Err(Error::Singular {
            sigma_min: 0.0,
            sigma_max: spectrum.first(),
        });
    }
    Ok(spectrum
        .values()
        .iter()
        .map(|s| {
            let s2 = s * s;
            s2 / (s2 + v)
        })
        .collect())
}

pub fn mmse_abc(spectrum: &Spectrum, noise: NoiseModel) -> Result<MmseAbc> {
    let q = shrinkage_factors(spectrum, noise)?;
    let v = noise.variance();
    let sum_q: f64 = q.iter().sum();
    Ok(MmseAbc {
        a: sum_q * sum_q,
        b: q.iter().map(|x| x * x).sum(),
        c: spectrum
            .values()
            .iter()
            .map(|s| {
                let s2 = s * s;
                s2 / ((s2 + v) * (s2 + v))
            })
            .sum(),
    })
}

/// MMSE post-processing SNR `(a + b) / (sigma_n^2 (N + 1) c + N b - a)`.
///
/// `N b - a` equals `N * sum_i (q_i - mean(q))^2`; the centred form is used
/// so that small noise variances do not lose the term to cancellation.
pub fn snr_mmse(spectrum: &Spectrum, noise: NoiseModel) -> Result<f64> {
    let q = shrinkage_factors(spectrum, noise)?;
    let MmseAbc { a, b, c } = mmse_abc(spectrum, noise)?;
    let n = q.len() as f64;
    let mean = q.iter().sum::<f64>() / n;
    let spread = n * q.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    let denominator = noise.variance() * (n + 1.0) * c + spread;
    if denominator < -MMSE_DENOMINATOR_GUARD * (a + b) {
        return Err(Error::FormulaDomain { denominator });
    }
    if denominator <= MMSE_DENOMINATOR_GUARD * (a + b) {
        return Ok(f64::INFINITY);
    }
    Ok((a + b) / denominator)
}

/// `10 log10(mmse / zf)`; any non-finite input yields `f64::INFINITY`.
pub fn gain_db(snr_mmse_lin: f64, snr_zf_lin: f64) -> f64 {
    if !snr_mmse_lin.is_finite() || !snr_zf_lin.is_finite() {
        return f64::INFINITY;
    }
    10.0 * (snr_mmse_lin / snr_zf_lin).log10()
}

/// Asymptotic tail `exp(-x - x^2 / 2)` of the scaled minimum singular value.
pub fn edelman_tail(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!("tail argument must be >= 0, got {x}")));
    }
    Ok((-x - 0.5 * x * x).exp())
}

/// Monte Carlo estimate of signal energy over filter-output distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionSnr {
    pub snr: f64,
    /// Delta-method standard error of `snr`.
    pub std_error: f64,
    pub trials: usize,
}

/// `sum ||x||^2 / sum ||W (H x + n) - x||^2` over random QPSK vectors and noise.
///
/// Trial `t` draws from `rng.child(t)`, so the estimate is independent of the
/// thread count.
pub fn empirical_distortion_snr(
    h: &ComplexMatrix,
    w: &FilterMatrix,
    noise: NoiseModel,
    trials: usize,
    rng: RngStream,
) -> Result<DistortionSnr> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    if w.matrix.cols() != h.rows() || w.matrix.rows() != h.cols() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: w.matrix.cols(),
        });
    }
    let n = h.cols();
    let samples: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut g = rng.child(t).rng();
            let x = qpsk_modulate(&BitBlock::random(n, &mut g));
            let noise_vec = sample_noise(n, noise, &mut g);
            let r = transmit(h, &x, &noise_vec).expect("shapes checked above");
            let y = w.apply(&r).expect("shapes checked above");
            let signal: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            let distortion: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum();
            (signal, distortion)
        })
        .collect();

    let signal: f64 = samples.iter().map(|s| s.0).sum();
    let distortion: f64 = samples.iter().map(|s| s.1).sum();
    if distortion == 0.0 {
        return Ok(DistortionSnr {
            snr: f64::INFINITY,
            std_error: 0.0,
            trials,
        });
    }
    let t = trials as f64;
    let mean = distortion / t;
    let var = if trials > 1 {
        samples.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>() / (t - 1.0)
    } else {
        0.0
    };
    let snr = signal / distortion;
    Ok(DistortionSnr {
        snr,
        std_error: snr * (var / t).sqrt() / mean,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_standard_gaussian, synthesize_spectrum};
    use crate::linalg::svd;

    fn spec(values: &[f64]) -> Spectrum {
        Spectrum::from_unsorted(values.to_vec()).unwrap()
    }

    fn noise(v: f64) -> NoiseModel {
        NoiseModel::new(v).unwrap()
    }

    /// sigma^2 = (3, 1).
    fn worked_spectrum() -> Spectrum {
        spec(&[3f64.sqrt(), 1.0])
    }

    #[test]
    fn weyl_examples() {
        assert_eq!(
            weyl_lower_bound(1, &spec(&[4.0, 1.0]), &spec(&[1.0, 1.0])).unwrap(),
            5.0
        );
        assert_eq!(
            weyl_lower_bound(1, &spec(&[3.0, 1.0]), &spec(&[2.0, 0.5])).unwrap(),
            3.5
        );
        let s = spec(&[5.0, 3.0, 2.0, 0.5]);
        let zero = spec(&[0.0; 4]);
        for i in 1..=4 {
            assert_eq!(weyl_lower_bound(i, &s, &zero).unwrap(), s.values()[i - 1]);
        }
    }

    #[test]
    fn weyl_rejects_bad_arguments() {
        let s = spec(&[2.0, 1.0]);
        assert_eq!(
            weyl_lower_bound(0, &s, &s).unwrap_err(),
            Error::IndexOutOfRange { index: 0, len: 2 }
        );
        assert!(weyl_lower_bound(3, &s, &s).is_err());
        assert!(weyl_lower_bound(1, &s, &spec(&[1.0])).is_err());
    }

    #[test]
    fn cond_ratio_approx_examples() {
        assert_eq!(cond_ratio_approx(3.0, 0.2, NoiseModel::noiseless()).unwrap(), 1.0);
        assert_eq!(cond_ratio_approx(0.7, 0.7, noise(0.3)).unwrap(), 1.0);
        let r = cond_ratio_approx(1.5, 0.1, noise(0.1)).unwrap();
        assert!((r - 0.094_949_494_949_494_95).abs() < 1e-15);
        assert!((15.0 * r - 1.424_242_424_242_424).abs() < 1e-12);
        assert!(matches!(
            cond_ratio_approx(1.0, 0.0, noise(0.1)),
            Err(Error::Singular { .. })
        ));
        assert!(cond_ratio_approx(0.1, 1.0, noise(0.1)).is_err());
    }

    #[test]
    fn cond_ratio_exact_examples() {
        let u = svd(&sample_standard_gaussian(4, &mut RngStream::new(5, 0).rng()))
            .unwrap()
            .left_basis;
        let report = cond_ratio_exact(&u, noise(0.7)).unwrap();
        assert!((report.exact_ratio - 1.0).abs() <= 1e-9);

        let h = sample_standard_gaussian(4, &mut RngStream::new(6, 0).rng());
        let report = cond_ratio_exact(&h, NoiseModel::noiseless()).unwrap();
        assert!((report.exact_ratio - 1.0).abs() <= 1e-9);
        assert_eq!(report.approx_ratio, 1.0);

        let h = synthesize_spectrum(4, 15.0, 0.3, &mut RngStream::new(7, 0).rng()).unwrap();
        let report = cond_ratio_exact(h.matrix(), noise(0.1)).unwrap();
        assert!(report.relative_error() <= 0.10, "{report:?}");
        assert!((report.exact_ratio - report.cond_w_mmse / report.cond_w_zf).abs() <= 1e-10 * report.exact_ratio);
    }

    #[test]
    fn snr_zf_examples() {
        let n: f64 = 4.0;
        let orth = spec(&[n.sqrt(); 4]);
        assert!((snr_zf(&orth, noise(0.25)).unwrap() - n / 0.25).abs() < 1e-12);
        assert!((snr_zf(&worked_spectrum(), noise(0.1)).unwrap() - 15.0).abs() < 1e-12);
        assert_eq!(
            snr_zf(&worked_spectrum(), NoiseModel::noiseless()).unwrap(),
            f64::INFINITY
        );
        assert!(matches!(
            snr_zf(&spec(&[1.0, 0.0]), noise(0.1)),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn mmse_abc_examples() {
        let abc = mmse_abc(&worked_spectrum(), noise(0.1)).unwrap();
        assert!((abc.a - 3.522_501_526_474_66).abs() < 1e-12);
        assert!((abc.b - 1.762_970_734_685_804).abs() < 1e-12);
        assert!((abc.c - 1.138_621_098_889_758).abs() < 1e-12);

        let s = spec(&[2.0, 1.0, 0.5]);
        let abc = mmse_abc(&s, NoiseModel::noiseless()).unwrap();
        assert_eq!(abc.a, 9.0);
        assert_eq!(abc.b, 3.0);
        assert!((abc.c - (0.25 + 1.0 + 4.0)).abs() < 1e-12);

        assert!(matches!(
            mmse_abc(&spec(&[1.0, 0.0]), NoiseModel::noiseless()),
            Err(Error::Singular { .. })
        ));
        assert!(mmse_abc(&spec(&[1.0, 0.0]), noise(0.1)).is_ok());
    }

    #[test]
    fn snr_mmse_examples() {
        assert_eq!(
            snr_mmse(&worked_spectrum(), NoiseModel::noiseless()).unwrap(),
            f64::INFINITY
        );
        let s = snr_mmse(&worked_spectrum(), noise(0.1)).unwrap();
        assert!((s - 15.319_042_871_385_84).abs() < 1e-10, "{s}");

        let spectrum = spec(&[2.0, 1.3, 0.4]);
        let mut previous = f64::INFINITY;
        for exp in 1..=6 {
            let v = noise(10f64.powi(-exp));
            let ratio = snr_mmse(&spectrum, v).unwrap() / snr_zf(&spectrum, v).unwrap();
            assert!(ratio >= 1.0 && ratio < previous, "exp {exp}: {ratio}");
            previous = ratio;
        }
        assert!(previous - 1.0 <= 1e-4);
    }

    #[test]
    fn gain_examples() {
        assert_eq!(gain_db(3.0, 3.0), 0.0);
        assert!((gain_db(15.319_042_871_385_84, 15.0) - 0.091_403_725_162_976).abs() < 1e-10);
        assert!((gain_db(100.0, 10.0) - 10.0).abs() < 1e-12);
        assert_eq!(gain_db(f64::INFINITY, 10.0), f64::INFINITY);
    }

    #[test]
    fn edelman_examples() {
        assert_eq!(edelman_tail(0.0).unwrap(), 1.0);
        assert!((edelman_tail(1.0).unwrap() - 0.223_130_160_148_429_8).abs() < 1e-15);
        let grid: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        for w in grid.windows(2) {
            assert!(edelman_tail(w[1]).unwrap() < edelman_tail(w[0]).unwrap());
        }
        assert!(edelman_tail(-0.1).is_err());
        assert!(edelman_tail(f64::NAN).is_err());
    }

    #[test]
    fn distortion_oracle_worked_example() {
        let h = ComplexMatrix::from_diagonal(&[3f64.sqrt(), 1.0]);
        let v = noise(0.1);
        let zf = empirical_distortion_snr(&h, &zf_filter(&h).unwrap(), v, 100_000, RngStream::new(8, 0)).unwrap();
        assert!((zf.snr - 15.0).abs() <= 0.02 * 15.0, "{zf:?}");
        assert!((zf.snr - 15.0).abs() <= 3.0 * zf.std_error, "{zf:?}");

        let mmse =
            empirical_distortion_snr(&h, &mmse_filter(&h, v).unwrap(), v, 100_000, RngStream::new(8, 1)).unwrap();
        assert!((mmse.snr - 16.238_095_238).abs() <= 0.02 * 16.238_095_238, "{mmse:?}");

        let noiseless = NoiseModel::noiseless();
        let exact = ComplexMatrix::from_diagonal(&[2.0, 1.0]);
        let free =
            empirical_distortion_snr(&exact, &zf_filter(&exact).unwrap(), noiseless, 10, RngStream::new(8, 2)).unwrap();
        assert_eq!(free.snr, f64::INFINITY);
        let free = empirical_distortion_snr(&h, &zf_filter(&h).unwrap(), noiseless, 10, RngStream::new(8, 2)).unwrap();
        assert!(free.snr > 1e20);
    }

    #[test]
    fn distortion_oracle_rejects_bad_input() {
        let h = ComplexMatrix::identity(2);
        let w = zf_filter(&ComplexMatrix::identity(3)).unwrap();
        assert!(empirical_distortion_snr(&h, &w, noise(0.1), 10, RngStream::new(0, 0)).is_err());
        let w = zf_filter(&h).unwrap();
        assert!(empirical_distortion_snr(&h, &w, noise(0.1), 0, RngStream::new(0, 0)).is_err());
    }
}
