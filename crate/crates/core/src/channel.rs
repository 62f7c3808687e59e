//! Channel ensembles and the transmission model `r = Hx + n`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, ComplexMatrix, Spectrum};

/// Default rejection budget for [`sample_floored`].
pub const DEFAULT_MAX_ATTEMPTS: usize = 1_000_000;

/// How a channel realization was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Raw,
    /// Scaled so that `||H||_F^2 = N^2`.
    Normalized,
    /// Normalized and accepted only if `sigma_N >= sigma_min`.
    Floored {
        sigma_min: f64,
    },
    /// Built from a prescribed spectrum and Haar unitaries.
    Synthesized {
        cond: f64,
        sigma_min: f64,
    },
}

/// A channel matrix with its cached singular values.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    matrix: ComplexMatrix,
    spectrum: Spectrum,
    provenance: Provenance,
}

impl ChannelRealization {
    /// Wraps an arbitrary square matrix without rescaling.
    pub fn raw(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_provenance(matrix, Provenance::Raw)
    }

    fn with_provenance(matrix: ComplexMatrix, provenance: Provenance) -> Result<Self> {
        let spectrum = singular_values(&matrix)?;
        Ok(Self {
            matrix,
            spectrum,
            provenance,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn sigma_min(&self) -> f64 {
        self.spectrum.last()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// Additive noise with `E[n n^H] = variance * I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    variance: f64,
}

impl NoiseModel {
    pub fn new(variance: f64) -> Result<Self> {
        if !variance.is_finite() || variance < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be finite and nonnegative, got {variance}"
            )));
        }
        Ok(Self { variance })
    }

    pub fn noiseless() -> Self {
        Self { variance: 0.0 }
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, std_per_dim: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std_per_dim, im * std_per_dim)
}

/// `n x n` matrix of i.i.d. `CN(0, 1)` entries (variance 1/2 per real dimension).
pub fn sample_standard_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(n, n, |_, _| complex_normal(rng, s))
}

/// Scales `H` by `N / ||H||_F` so the squared singular values sum to `N^2`.
pub fn normalize(h: &ComplexMatrix) -> Result<ChannelRealization> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let fro = h.frobenius_norm();
    if fro == 0.0 {
        return Err(Error::DegenerateInput("cannot normalize an all-zero channel"));
    }
    let n = h.rows() as f64;
    ChannelRealization::with_provenance(h.scaled(n / fro), Provenance::Normalized)
}

/// Draws normalized Gaussian channels until one has `sigma_N >= sigma_min`.
pub fn sample_floored<R: Rng + ?Sized>(
    n: usize,
    sigma_min: f64,
    rng: &mut R,
    max_attempts: usize,
) -> Result<ChannelRealization> {
    if !sigma_min.is_finite() || sigma_min < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma_min floor must be >= 0, got {sigma_min}"
        )));
    }
    if max_attempts == 0 {
        return Err(Error::InvalidArgument("max_attempts must be >= 1".into()));
    }
    for _ in 0..max_attempts {
        let candidate = normalize(&sample_standard_gaussian(n, rng))?;
        if candidate.sigma_min() >= sigma_min {
            return Ok(ChannelRealization {
                provenance: Provenance::Floored { sigma_min },
                ..candidate
            });
        }
    }
    Err(Error::SamplingExhausted {
        sigma_min,
        attempts: max_attempts,
    })
}

/// Haar-distributed unitary: Gram-Schmidt QR of a Gaussian matrix with the
/// diagonal of R made positive real.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let z = sample_standard_gaussian(n, rng);
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = z.column(j);
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for b in &q {
                let coeff: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= coeff * bi;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        q.push(v.into_iter().map(|x| x / norm).collect());
    }
    ComplexMatrix::from_fn(n, n, |i, j| q[j][i])
}

/// `H = U diag(sigma) V^H` with `sigma_1 = cond * sigma_min`, `sigma_n = sigma_min`
/// and geometrically spaced interior values. Not Frobenius-normalized.
pub fn synthesize_spectrum<R: Rng + ?Sized>(
    n: usize,
    cond: f64,
    sigma_min: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "synthesized channels need n >= 2, got {n}"
        )));
    }
    if !cond.is_finite() || cond < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "condition number must be >= 1, got {cond}"
        )));
    }
    if !sigma_min.is_finite() || sigma_min <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma_min must be > 0, got {sigma_min}"
        )));
    }
    let sigma = geometric_profile(n, cond, sigma_min);
    let u = haar_unitary(n, rng);
    let v = haar_unitary(n, rng);
    let mut us = u;
    for i in 0..n {
        for (j, s) in sigma.iter().enumerate() {
            us[(i, j)] *= *s;
        }
    }
    let h = us.matmul(&v.hermitian())?;
    ChannelRealization::with_provenance(h, Provenance::Synthesized { cond, sigma_min })
}

/// Descending values from `cond * sigma_min` down to `sigma_min`, equal log spacing.
pub fn geometric_profile(n: usize, cond: f64, sigma_min: f64) -> Vec<f64> {
    let mut sigma: Vec<f64> = (0..n)
        .map(|k| sigma_min * cond.powf((n - 1 - k) as f64 / (n - 1) as f64))
        .collect();
    sigma[0] = cond * sigma_min;
    sigma[n - 1] = sigma_min;
    sigma
}

/// Noise vector with i.i.d. `CN(0, variance)` entries.
///
/// Draws are `sqrt(variance)` times a unit-variance draw from the same
/// generator state, so sweeps can reuse one draw across noise levels.
pub fn sample_noise<R: Rng + ?Sized>(n: usize, noise: NoiseModel, rng: &mut R) -> Vec<Complex64> {
    let s = (noise.variance() / 2.0).sqrt();
    (0..n).map(|_| complex_normal(rng, s)).collect()
}

/// `r = H x + n`.
pub fn transmit(h: &ComplexMatrix, x: &[Complex64], noise: &[Complex64]) -> Result<Vec<Complex64>> {
    if noise.len() != h.rows() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: noise.len(),
        });
    }
    let mut r = h.mul_vec(x)?;
    for (ri, ni) in r.iter_mut().zip(noise) {
        *ri += ni;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{condition_number, gram, svd};
    use crate::rng::RngStream;

    fn stream(i: u64) -> rand_chacha::ChaCha8Rng {
        RngStream::for_experiment(2024, "channel-tests", i).rng()
    }

    #[test]
    fn gaussian_entries_have_unit_power_and_zero_mean() {
        // 62_500 draws of 4x4 = 10^6 entries.
        let mut rng = stream(0);
        let (mut power, mut mean) = (0.0, Complex64::new(0.0, 0.0));
        let mut count = 0usize;
        for _ in 0..62_500 {
            let h = sample_standard_gaussian(4, &mut rng);
            for z in h.as_slice() {
                power += z.norm_sqr();
                mean += z;
                count += 1;
            }
        }
        let power = power / count as f64;
        let mean = mean / count as f64;
        assert!((0.995..=1.005).contains(&power), "{power}");
        assert!(mean.norm() <= 0.005, "{mean}");
    }

    #[test]
    fn gaussian_sampling_is_reproducible() {
        let a = sample_standard_gaussian(4, &mut stream(3));
        let b = sample_standard_gaussian(4, &mut stream(3));
        assert_eq!(a, b);
    }

    #[test]
    fn normalize_examples() {
        let r = normalize(&ComplexMatrix::identity(2)).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        assert!((r.matrix()[(0, 0)].re - s2).abs() < 1e-15);
        assert!((r.matrix().frobenius_norm_sqr() - 4.0).abs() < 1e-12);
        assert_eq!(r.provenance(), Provenance::Normalized);

        let again = normalize(r.matrix()).unwrap();
        assert!(again.matrix().sub(r.matrix()).unwrap().frobenius_norm() <= 1e-12);

        let h = normalize(&sample_standard_gaussian(4, &mut stream(1))).unwrap();
        let from_svd = svd(h.matrix()).unwrap().spectrum.sum_of_squares();
        assert!((from_svd - 16.0).abs() <= 1e-8 * 16.0);
        assert!((h.spectrum().sum_of_squares() - 16.0).abs() <= 1e-8 * 16.0);
    }

    #[test]
    fn normalize_rejects_zero_channel() {
        assert!(matches!(
            normalize(&ComplexMatrix::zeros(3, 3)),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn cached_spectrum_matches_svd() {
        let h = normalize(&sample_standard_gaussian(6, &mut stream(9))).unwrap();
        let direct = svd(h.matrix()).unwrap().spectrum;
        for (a, b) in h.spectrum().values().iter().zip(direct.values()) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn zero_floor_accepts_first_draw() {
        let floored = sample_floored(4, 0.0, &mut stream(5), 1).unwrap();
        let first = normalize(&sample_standard_gaussian(4, &mut stream(5))).unwrap();
        assert_eq!(floored.matrix(), first.matrix());
        assert_eq!(floored.provenance(), Provenance::Floored { sigma_min: 0.0 });
    }

    #[test]
    fn floor_is_respected() {
        let mut rng = stream(6);
        for _ in 0..50 {
            let h = sample_floored(4, 0.3, &mut rng, DEFAULT_MAX_ATTEMPTS).unwrap();
            assert!(h.sigma_min() >= 0.3);
            assert!((h.spectrum().sum_of_squares() - 16.0).abs() <= 1e-8 * 16.0);
        }
    }

    #[test]
    fn impossible_floor_exhausts() {
        // sigma_N <= sqrt(sum sigma^2 / N) = 2 for normalized 4x4 channels.
        let err = sample_floored(4, 2.5, &mut stream(7), 100).unwrap_err();
        assert_eq!(
            err,
            Error::SamplingExhausted {
                sigma_min: 2.5,
                attempts: 100
            }
        );
    }

    #[test]
    fn synthesized_spectrum_examples() {
        let h = synthesize_spectrum(4, 1.0, 0.7, &mut stream(10)).unwrap();
        assert!((condition_number(h.matrix()).unwrap() - 1.0).abs() <= 1e-9);
        for v in h.spectrum().values() {
            assert!((v - 0.7).abs() <= 1e-12);
        }

        let h = synthesize_spectrum(4, 15.0, 0.1, &mut stream(11)).unwrap();
        let s = h.spectrum();
        assert!((s.first() - 1.5).abs() <= 1e-12);
        assert!((s.last() - 0.1).abs() <= 1e-12);
        assert!((condition_number(h.matrix()).unwrap() - 15.0).abs() <= 15.0 * 1e-9);

        assert!(matches!(
            synthesize_spectrum(4, 0.5, 0.1, &mut stream(12)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(synthesize_spectrum(1, 2.0, 0.1, &mut stream(12)).is_err());
    }

    #[test]
    fn haar_factor_is_unitary() {
        let u = haar_unitary(8, &mut stream(13));
        assert!(gram(&u).distance_from_identity() <= 1e-10);
    }

    #[test]
    fn noise_examples() {
        let zero = sample_noise(4, NoiseModel::noiseless(), &mut stream(14));
        assert!(zero.iter().all(|z| z.norm() == 0.0));

        let noise = NoiseModel::new(0.5).unwrap();
        let mut rng = stream(15);
        let mut acc = 0.0;
        for _ in 0..250_000 {
            acc += sample_noise(4, noise, &mut rng)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>();
        }
        let mean = acc / 1e6;
        assert!((0.4975..=0.5025).contains(&mean), "{mean}");

        assert_eq!(
            sample_noise(4, noise, &mut stream(16)),
            sample_noise(4, noise, &mut stream(16))
        );
        assert!(NoiseModel::new(-1.0).is_err());
        assert!(NoiseModel::new(f64::NAN).is_err());
    }

    #[test]
    fn noise_scales_with_variance() {
        let unit = sample_noise(3, NoiseModel::new(1.0).unwrap(), &mut stream(17));
        let scaled = sample_noise(3, NoiseModel::new(0.25).unwrap(), &mut stream(17));
        for (u, s) in unit.iter().zip(&scaled) {
            assert!((u * 0.5 - s).norm() < 1e-15);
        }
    }

    #[test]
    fn transmit_examples() {
        let x = vec![Complex64::new(1.0, 0.5), Complex64::new(-1.0, 2.0)];
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        assert_eq!(transmit(&ComplexMatrix::identity(2), &x, &zero).unwrap(), x);

        let ones = vec![Complex64::new(1.0, 0.0); 2];
        let r = transmit(&ComplexMatrix::from_diagonal(&[2.0, 1.0]), &ones, &zero).unwrap();
        assert_eq!(r, vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]);

        assert!(matches!(
            transmit(&ComplexMatrix::identity(2), &x, &zero[..1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
