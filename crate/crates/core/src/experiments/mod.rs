//! Seeded Monte Carlo drivers for the conditioning, SNR-gain, singular-value
//! and BER experiments.
//!
//! Trial `t` of an experiment always draws from the stream
//! `RngStream::for_experiment(master_seed, tag, t)`, and every aggregate is
//! formed from per-trial values in trial order (or with exact integer
//! arithmetic), so tables are bit-identical for any rayon pool size.

mod table;

pub use table::{Cell, ResultTable, Row, RowView, SnrConvention};

use rayon::prelude::*;

use crate::analysis::{cond_ratio_approx, cond_ratio_exact, edelman_tail, gain_db, snr_mmse, snr_zf};
use crate::channel::{
    normalize, sample_floored, sample_noise, sample_standard_gaussian, synthesize_spectrum, transmit, NoiseModel,
    DEFAULT_MAX_ATTEMPTS,
};
use crate::detection::{count_bit_errors, mmse_filter, qpsk_modulate, zf_filter, BitBlock};
use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::rng::RngStream;
use crate::stats::{ecdf_below, proportion_std_error, tail_at_or_above, Summary};

pub const DEFAULT_DIMS: [usize; 6] = [2, 4, 8, 12, 16, 20];
pub const DEFAULT_TABLE1_TRIALS: usize = 10_000;
pub const DEFAULT_GAIN_TRIALS: usize = 5_000;
pub const DEFAULT_CDF_TRIALS: usize = 20_000;
pub const DEFAULT_BER_TRIALS: usize = 200_000;
pub const DEFAULT_COND_TRIALS: usize = 200;
/// Fewest realizations per dimension accepted by `run_table1`.
pub const MIN_TABLE1_TRIALS: usize = 1_000;
/// BER points with fewer errors are flagged `low_confidence`.
pub const MIN_CONFIDENT_ERRORS: u64 = 100;

/// Evaluation points for the minimum-singular-value CDF: 0 to 2 in steps of 0.02.
pub fn cdf_grid() -> Vec<f64> {
    (0..=100).map(|k| k as f64 / 50.0).collect()
}

/// Evaluation points for the scaled tail: 0 to 3 in steps of 0.1.
pub fn tail_grid() -> Vec<f64> {
    (0..=30).map(|k| k as f64 / 10.0).collect()
}

/// `sigma_n^2 = N / 10^(snr_db / 10)`.
pub fn noise_var_from_snr(snr_db: f64, n: usize) -> Result<NoiseModel> {
    NoiseModel::new(n as f64 / 10f64.powf(snr_db / 10.0))
}

impl SnrConvention {
    /// Noise model for `snr_db` on an `n`-antenna system under this convention.
    pub fn noise(&self, snr_db: f64, n: usize) -> Result<NoiseModel> {
        match self {
            SnrConvention::PerAntenna => noise_var_from_snr(snr_db, n),
            SnrConvention::InverseNoise => noise_var_from_snr(snr_db, 1),
            SnrConvention::NotApplicable => Err(Error::InvalidArgument("no SNR convention for this experiment".into())),
        }
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("at least one dimension is required".into()));
    }
    if let Some(&n) = dims.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidArgument(format!("dimensions must be >= 2, got {n}")));
    }
    Ok(())
}

fn check_trials(trials: usize, minimum: usize) -> Result<()> {
    if trials < minimum {
        return Err(Error::InvalidArgument(format!(
            "trials must be >= {minimum}, got {trials}"
        )));
    }
    Ok(())
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} grid has non-finite values")));
    }
    Ok(())
}

fn trial_stream(master_seed: u64, tag: &str, t: usize) -> rand_chacha::ChaCha8Rng {
    RngStream::for_experiment(master_seed, tag, t as u64).rng()
}

/// Mean minimum singular value and condition number of normalized channels.
pub fn run_table1(dims: &[usize], trials: usize, master_seed: u64) -> Result<ResultTable> {
    check_dims(dims)?;
    check_trials(trials, MIN_TABLE1_TRIALS)?;
    let mut table = ResultTable::new(
        "table1",
        SnrConvention::NotApplicable,
        master_seed,
        trials,
        &["N", "mean_sigma_min", "se_sigma_min", "mean_cond", "se_cond"],
    );
    for &n in dims {
        let tag = format!("table1/N={n}");
        let samples = (0..trials)
            .into_par_iter()
            .map(|t| {
                let h = normalize(&sample_standard_gaussian(n, &mut trial_stream(master_seed, &tag, t)))?;
                Ok((h.sigma_min(), h.spectrum().condition_number()?))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let sigma = Summary::of(&samples.iter().map(|s| s.0).collect::<Vec<_>>());
        let cond = Summary::of(&samples.iter().map(|s| s.1).collect::<Vec<_>>());
        table.push(vec![
            n.into(),
            sigma.mean.into(),
            sigma.std_error.into(),
            cond.mean.into(),
            cond.std_error.into(),
        ]);
    }
    Ok(table)
}

/// Mean per-realization gain (dB) of the MMSE over the ZF post-processing SNR.
///
/// Gains are averaged in dB. Realizations whose gain is infinite are counted
/// in `infinite_trials` and left out of the mean.
pub fn run_gain_sweep(dims: &[usize], snr_grid_db: &[f64], trials: usize, master_seed: u64) -> Result<ResultTable> {
    check_dims(dims)?;
    check_grid("SNR", snr_grid_db)?;
    check_trials(trials, 1)?;
    let mut table = ResultTable::new(
        "gain",
        SnrConvention::PerAntenna,
        master_seed,
        trials,
        &[
            "N",
            "snr_db",
            "noise_variance",
            "mean_gain_db",
            "se_gain_db",
            "used_trials",
            "infinite_trials",
        ],
    );
    for &n in dims {
        let noises = snr_grid_db
            .iter()
            .map(|&snr| noise_var_from_snr(snr, n))
            .collect::<Result<Vec<_>>>()?;
        let tag = format!("gain/N={n}");
        let per_trial = (0..trials)
            .into_par_iter()
            .map(|t| {
                let h = normalize(&sample_standard_gaussian(n, &mut trial_stream(master_seed, &tag, t)))?;
                noises
                    .iter()
                    .map(|&noise| Ok(gain_db(snr_mmse(h.spectrum(), noise)?, snr_zf(h.spectrum(), noise)?)))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;

        for (k, (&snr, noise)) in snr_grid_db.iter().zip(&noises).enumerate() {
            let finite: Vec<f64> = per_trial.iter().map(|g| g[k]).filter(|g| g.is_finite()).collect();
            let summary = Summary::of(&finite);
            table.push(vec![
                n.into(),
                snr.into(),
                noise.variance().into(),
                summary.mean.into(),
                summary.std_error.into(),
                finite.len().into(),
                (trials - finite.len()).into(),
            ]);
        }
    }
    Ok(table)
}

/// Smallest singular value of one standard Gaussian draw, before and after
/// Frobenius normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinSingular {
    pub raw: f64,
    pub normalized: f64,
}

/// Per-trial minimum singular values of `n x n` standard Gaussian channels.
pub fn min_singular_samples(n: usize, trials: usize, master_seed: u64) -> Result<Vec<MinSingular>> {
    let tag = format!("cdf/N={n}");
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let h = sample_standard_gaussian(n, &mut trial_stream(master_seed, &tag, t));
            let raw = singular_values(&h)?.last();
            let fro = h.frobenius_norm();
            if fro == 0.0 {
                return Err(Error::DegenerateInput("cannot normalize an all-zero channel"));
            }
            // Normalization is a scalar rescaling, so it scales every singular value.
            Ok(MinSingular {
                raw,
                normalized: raw * n as f64 / fro,
            })
        })
        .collect()
}

/// Empirical CDF of `sigma_N` for normalized channels at every dimension, and
/// for the largest dimension the tail `P[N sigma_N >= x]` of unnormalized
/// channels next to its asymptotic law.
pub fn run_min_singular_cdf(dims: &[usize], trials: usize, master_seed: u64) -> Result<ResultTable> {
    check_dims(dims)?;
    check_trials(trials, 1)?;
    let mut table = ResultTable::new(
        "cdf",
        SnrConvention::NotApplicable,
        master_seed,
        trials,
        &["statistic", "N", "x", "value", "se", "reference"],
    );
    let largest = *dims.iter().max().expect("dims checked non-empty");
    let mut tail_samples = None;
    for &n in dims {
        let samples = min_singular_samples(n, trials, master_seed)?;
        let mut normalized: Vec<f64> = samples.iter().map(|s| s.normalized).collect();
        normalized.sort_by(f64::total_cmp);
        for x in cdf_grid() {
            let p = ecdf_below(&normalized, x);
            table.push(vec![
                "cdf".into(),
                n.into(),
                x.into(),
                p.into(),
                proportion_std_error(p, trials).into(),
                Cell::Empty,
            ]);
        }
        if n == largest && tail_samples.is_none() {
            let mut scaled: Vec<f64> = samples.iter().map(|s| n as f64 * s.raw).collect();
            scaled.sort_by(f64::total_cmp);
            tail_samples = Some(scaled);
        }
    }
    let scaled = tail_samples.expect("largest dimension sampled");
    for x in tail_grid() {
        let p = tail_at_or_above(&scaled, x);
        table.push(vec![
            "tail".into(),
            largest.into(),
            x.into(),
            p.into(),
            proportion_std_error(p, trials).into(),
            edelman_tail(x)?.into(),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Zf,
    Mmse,
}

impl Detector {
    pub fn label(&self) -> &'static str {
        match self {
            Detector::Zf => "zf",
            Detector::Mmse => "mmse",
        }
    }
}

/// Bit-error counts for one detector at one SNR point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorTally {
    pub bit_errors: u64,
    /// Sum of squared per-trial error counts, for the standard error.
    pub sum_sq_errors: u64,
    pub bits: u64,
    pub trials: u64,
}

impl ErrorTally {
    fn record(&mut self, errors: usize, bits: usize) {
        let e = errors as u64;
        self.bit_errors += e;
        self.sum_sq_errors += e * e;
        self.bits += bits as u64;
        self.trials += 1;
    }

    fn merge(self, other: ErrorTally) -> ErrorTally {
        ErrorTally {
            bit_errors: self.bit_errors + other.bit_errors,
            sum_sq_errors: self.sum_sq_errors + other.sum_sq_errors,
            bits: self.bits + other.bits,
            trials: self.trials + other.trials,
        }
    }

    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits as f64
    }

    /// Standard error of the BER, treating each channel use as one sample.
    pub fn std_error(&self) -> f64 {
        if self.trials < 2 {
            return 0.0;
        }
        let t = self.trials as f64;
        let bits_per_trial = self.bits as f64 / t;
        let mean = self.bit_errors as f64 / t;
        let var = (self.sum_sq_errors as f64 - t * mean * mean).max(0.0) / (t - 1.0);
        (var / t).sqrt() / bits_per_trial
    }

    pub fn low_confidence(&self) -> bool {
        self.bit_errors < MIN_CONFIDENT_ERRORS
    }
}

/// Paired ZF/MMSE BER curves over a shared set of channels, bits and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct BerSweep {
    pub n: usize,
    pub sigma_min_floor: f64,
    pub master_seed: u64,
    pub trials: usize,
    pub snr_db: Vec<f64>,
    pub noise_variance: Vec<f64>,
    pub zf: Vec<ErrorTally>,
    pub mmse: Vec<ErrorTally>,
}

impl BerSweep {
    pub fn curve(&self, detector: Detector) -> &[ErrorTally] {
        match detector {
            Detector::Zf => &self.zf,
            Detector::Mmse => &self.mmse,
        }
    }

    /// SNR where the BER curve first crosses below `target`, interpolating
    /// linearly in `log10(BER)` between grid points.
    pub fn snr_at_ber(&self, detector: Detector, target: f64) -> Option<f64> {
        let curve = self.curve(detector);
        for k in 1..curve.len() {
            let (b0, b1) = (curve[k - 1].ber(), curve[k].ber());
            if b0 >= target && b1 < target {
                if b0 == target {
                    return Some(self.snr_db[k - 1]);
                }
                if b1 == 0.0 {
                    return None;
                }
                let (s0, s1) = (self.snr_db[k - 1], self.snr_db[k]);
                let frac = (b0.log10() - target.log10()) / (b0.log10() - b1.log10());
                return Some(s0 + frac * (s1 - s0));
            }
        }
        None
    }

    /// Horizontal distance in dB between the ZF and MMSE curves at `target`.
    pub fn gap_db(&self, target: f64) -> Option<f64> {
        Some(self.snr_at_ber(Detector::Zf, target)? - self.snr_at_ber(Detector::Mmse, target)?)
    }

    /// First grid SNR from which every point satisfies
    /// `|BER_zf - BER_mmse| <= rel_tol * max(BER_zf, BER_mmse)`.
    pub fn coincidence_snr(&self, rel_tol: f64) -> Option<f64> {
        let coincide = |k: usize| {
            let (z, m) = (self.zf[k].ber(), self.mmse[k].ber());
            (z - m).abs() <= rel_tol * z.max(m)
        };
        let n = self.snr_db.len();
        let mut first = n;
        while first > 0 && coincide(first - 1) {
            first -= 1;
        }
        (first < n).then(|| self.snr_db[first])
    }

    pub fn to_table(&self) -> ResultTable {
        let mut table = ResultTable::new(
            "ber",
            SnrConvention::PerAntenna,
            self.master_seed,
            self.trials,
            &[
                "detector",
                "snr_db",
                "noise_variance",
                "ber",
                "se_ber",
                "bit_errors",
                "bits",
                "low_confidence",
            ],
        )
        .with_parameter("N", self.n)
        .with_parameter("sigma_min_floor", self.sigma_min_floor);
        for detector in [Detector::Zf, Detector::Mmse] {
            for (k, tally) in self.curve(detector).iter().enumerate() {
                table.push(vec![
                    detector.label().into(),
                    self.snr_db[k].into(),
                    self.noise_variance[k].into(),
                    tally.ber().into(),
                    tally.std_error().into(),
                    tally.bit_errors.into(),
                    tally.bits.into(),
                    tally.low_confidence().into(),
                ]);
            }
        }
        table
    }
}

/// Paired QPSK BER simulation of the ZF and MMSE detectors.
///
/// Each trial draws a floored channel, one bit block and one unit-variance
/// noise vector; the noise is rescaled for every SNR point and both detectors
/// see the same received vector.
pub fn simulate_ber(
    n: usize,
    snr_grid_db: &[f64],
    sigma_min_floor: f64,
    trials: usize,
    master_seed: u64,
) -> Result<BerSweep> {
    check_dims(&[n])?;
    check_grid("SNR", snr_grid_db)?;
    check_trials(trials, 1)?;
    if !sigma_min_floor.is_finite() || sigma_min_floor < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma_min floor must be >= 0, got {sigma_min_floor}"
        )));
    }
    let noises = snr_grid_db
        .iter()
        .map(|&snr| noise_var_from_snr(snr, n))
        .collect::<Result<Vec<_>>>()?;
    let unit = NoiseModel::new(1.0)?;
    let tag = format!("ber/N={n}/floor={sigma_min_floor}");
    let points = noises.len();

    let tallies = (0..trials)
        .into_par_iter()
        .try_fold(
            || vec![(ErrorTally::default(), ErrorTally::default()); points],
            |mut acc, t| {
                let mut rng = trial_stream(master_seed, &tag, t);
                let channel = sample_floored(n, sigma_min_floor, &mut rng, DEFAULT_MAX_ATTEMPTS)?;
                let h = channel.matrix();
                let bits = BitBlock::random(n, &mut rng);
                let x = qpsk_modulate(&bits);
                let unit_noise = sample_noise(n, unit, &mut rng);
                let zf = zf_filter(h)?;
                for (slot, noise) in acc.iter_mut().zip(&noises) {
                    let scale = noise.variance().sqrt();
                    let noise_vec: Vec<_> = unit_noise.iter().map(|z| z * scale).collect();
                    let r = transmit(h, &x, &noise_vec)?;
                    let mmse = mmse_filter(h, *noise)?;
                    slot.0
                        .record(count_bit_errors(&bits, &zf.equalize_and_slice(&r)?)?, bits.len());
                    slot.1
                        .record(count_bit_errors(&bits, &mmse.equalize_and_slice(&r)?)?, bits.len());
                }
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![(ErrorTally::default(), ErrorTally::default()); points],
            |a, b| {
                Ok(a.into_iter()
                    .zip(b)
                    .map(|(x, y)| (x.0.merge(y.0), x.1.merge(y.1)))
                    .collect())
            },
        )?;

    Ok(BerSweep {
        n,
        sigma_min_floor,
        master_seed,
        trials,
        snr_db: snr_grid_db.to_vec(),
        noise_variance: noises.iter().map(NoiseModel::variance).collect(),
        zf: tallies.iter().map(|p| p.0).collect(),
        mmse: tallies.iter().map(|p| p.1).collect(),
    })
}

pub fn run_ber_sweep(
    n: usize,
    snr_grid_db: &[f64],
    sigma_min_floor: f64,
    trials: usize,
    master_seed: u64,
) -> Result<ResultTable> {
    Ok(simulate_ber(n, snr_grid_db, sigma_min_floor, trials, master_seed)?.to_table())
}

/// Exact versus approximate filter condition-number ratio over synthesized
/// channels with a prescribed condition number, one row per `sigma_min`.
///
/// The noise variance follows the `1 / sigma_n^2` convention.
pub fn run_cond_ratio_sweep(
    n: usize,
    cond_target: f64,
    sigma_min_grid: &[f64],
    snr_db: f64,
    trials: usize,
    master_seed: u64,
) -> Result<ResultTable> {
    check_dims(&[n])?;
    check_trials(trials, 1)?;
    check_grid("sigma_min", sigma_min_grid)?;
    if sigma_min_grid.iter().any(|&s| s <= 0.0) {
        return Err(Error::InvalidArgument("sigma_min grid values must be > 0".into()));
    }
    if !cond_target.is_finite() || cond_target < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "condition number must be >= 1, got {cond_target}"
        )));
    }
    let convention = SnrConvention::InverseNoise;
    let noise = convention.noise(snr_db, n)?;
    let mut table = ResultTable::new(
        "condratio",
        convention,
        master_seed,
        trials,
        &[
            "sigma_min",
            "mean_exact_ratio",
            "se_exact_ratio",
            "approx_ratio",
            "relative_error",
            "mean_cond_w_mmse",
            "se_cond_w_mmse",
            "mean_cond_w_zf",
        ],
    )
    .with_parameter("N", n)
    .with_parameter("cond", cond_target)
    .with_parameter("snr_db", snr_db)
    .with_parameter("noise_variance", noise.variance());

    for (i, &sigma_min) in sigma_min_grid.iter().enumerate() {
        let tag = format!("condratio/N={n}/point={i}");
        let reports = (0..trials)
            .into_par_iter()
            .map(|t| {
                let h = synthesize_spectrum(n, cond_target, sigma_min, &mut trial_stream(master_seed, &tag, t))?;
                cond_ratio_exact(h.matrix(), noise)
            })
            .collect::<Result<Vec<_>>>()?;
        let exact = Summary::of(&reports.iter().map(|r| r.exact_ratio).collect::<Vec<_>>());
        let cond_mmse = Summary::of(&reports.iter().map(|r| r.cond_w_mmse).collect::<Vec<_>>());
        let cond_zf = Summary::of(&reports.iter().map(|r| r.cond_w_zf).collect::<Vec<_>>());
        let approx = cond_ratio_approx(cond_target * sigma_min, sigma_min, noise)?;
        table.push(vec![
            sigma_min.into(),
            exact.mean.into(),
            exact.std_error.into(),
            approx.into(),
            ((approx - exact.mean).abs() / exact.mean).into(),
            cond_mmse.mean.into(),
            cond_mmse.std_error.into(),
            cond_zf.mean.into(),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Table1,
    Gain,
    Cdf,
    Ber,
    CondRatio,
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dims: Vec<usize>,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub sigma_min_floor: Option<f64>,
    pub cond_target: Option<f64>,
    pub sigma_min_grid: Option<Vec<f64>>,
}

impl SimConfig {
    pub fn validate(&self, experiment: Experiment) -> Result<()> {
        check_dims(&self.dims)?;
        check_trials(self.trials, 1)?;
        let single_dim = || {
            if self.dims.len() == 1 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(
                    "this experiment takes a single dimension".into(),
                ))
            }
        };
        match experiment {
            Experiment::Table1 => check_trials(self.trials, MIN_TABLE1_TRIALS),
            Experiment::Cdf => Ok(()),
            Experiment::Gain => check_grid("SNR", &self.snr_grid_db),
            Experiment::Ber => {
                single_dim()?;
                check_grid("SNR", &self.snr_grid_db)?;
                match self.sigma_min_floor {
                    Some(f) if !(f >= 0.0 && f.is_finite()) => {
                        Err(Error::InvalidArgument(format!("sigma_min floor must be >= 0, got {f}")))
                    }
                    _ => Ok(()),
                }
            }
            Experiment::CondRatio => {
                single_dim()?;
                if self.snr_grid_db.len() != 1 {
                    return Err(Error::InvalidArgument(
                        "condition-ratio sweep takes a single SNR value".into(),
                    ));
                }
                check_grid("sigma_min", self.sigma_min_grid.as_deref().unwrap_or(&[]))?;
                match self.cond_target {
                    Some(c) if c >= 1.0 && c.is_finite() => Ok(()),
                    other => Err(Error::InvalidArgument(format!(
                        "condition number must be >= 1, got {other:?}"
                    ))),
                }
            }
        }
    }

    pub fn run(&self, experiment: Experiment) -> Result<ResultTable> {
        self.validate(experiment)?;
        let seed = self.master_seed;
        match experiment {
            Experiment::Table1 => run_table1(&self.dims, self.trials, seed),
            Experiment::Gain => run_gain_sweep(&self.dims, &self.snr_grid_db, self.trials, seed),
            Experiment::Cdf => run_min_singular_cdf(&self.dims, self.trials, seed),
            Experiment::Ber => run_ber_sweep(
                self.dims[0],
                &self.snr_grid_db,
                self.sigma_min_floor.unwrap_or(0.0),
                self.trials,
                seed,
            ),
            Experiment::CondRatio => run_cond_ratio_sweep(
                self.dims[0],
                self.cond_target.expect("validated"),
                self.sigma_min_grid.as_deref().expect("validated"),
                self.snr_grid_db[0],
                self.trials,
                seed,
            ),
        }
    }
}
