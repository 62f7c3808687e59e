//! Linear receiver chain: QPSK mapping, ZF and MMSE filtering matrices,
//! hard decisions and bit-error accounting.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::NoiseModel;
use crate::error::{Error, Result};
use crate::linalg::{gram, inverse, ComplexMatrix};

/// Bits carried by QPSK symbols, two per symbol: `(b_I, b_Q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBlock(Vec<u8>);

impl BitBlock {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.len() % 2 != 0 {
            return Err(Error::Framing(bits.len()));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("bits must be 0 or 1".into()));
        }
        Ok(Self(bits))
    }

    pub fn random<R: Rng + ?Sized>(symbols: usize, rng: &mut R) -> Self {
        Self((0..2 * symbols).map(|_| u8::from(rng.random::<bool>())).collect())
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbol_count(&self) -> usize {
        self.0.len() / 2
    }
}

/// Per-axis mapping `(b_I, b_Q) -> ((1 - 2 b_I) + j (1 - 2 b_Q)) / sqrt(2)`.
pub fn qpsk_modulate(bits: &BitBlock) -> Vec<Complex64> {
    bits.0
        .chunks_exact(2)
        .map(|pair| {
            let re = 1.0 - 2.0 * f64::from(pair[0]);
            let im = 1.0 - 2.0 * f64::from(pair[1]);
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect()
}

/// Sign decisions; zero decides bit 0.
pub fn qpsk_slice(y: &[Complex64]) -> BitBlock {
    BitBlock(
        y.iter()
            .flat_map(|z| [u8::from(z.re < 0.0), u8::from(z.im < 0.0)])
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    ZeroForcing,
    Mmse { noise_variance: f64 },
}

impl FilterKind {
    /// Regularisation added to the Gram matrix (0 for ZF).
    pub fn noise_variance(&self) -> f64 {
        match *self {
            FilterKind::ZeroForcing => 0.0,
            FilterKind::Mmse { noise_variance } => noise_variance,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FilterKind::ZeroForcing => "zf",
            FilterKind::Mmse { .. } => "mmse",
        }
    }
}

/// A linear detector `W` applied to the received vector.
#[derive(Debug, Clone)]
pub struct FilterMatrix {
    pub kind: FilterKind,
    pub matrix: ComplexMatrix,
}

impl FilterMatrix {
    pub fn apply(&self, r: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matrix.mul_vec(r)
    }

    pub fn equalize_and_slice(&self, r: &[Complex64]) -> Result<BitBlock> {
        Ok(qpsk_slice(&self.apply(r)?))
    }
}

/// `(H^H H + shift I)^{-1} H^H`, formed through the Gram matrix.
fn regularized_pseudo_inverse(h: &ComplexMatrix, shift: f64) -> Result<ComplexMatrix> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let g = gram(h).add_scaled_identity(shift)?;
    inverse(&g)?.matmul(&h.hermitian())
}

/// `W_zf = (H^H H)^{-1} H^H`.
pub fn zf_filter(h: &ComplexMatrix) -> Result<FilterMatrix> {
    Ok(FilterMatrix {
        kind: FilterKind::ZeroForcing,
        matrix: regularized_pseudo_inverse(h, 0.0)?,
    })
}

/// `W_mmse = (H^H H + sigma_n^2 I)^{-1} H^H`.
pub fn mmse_filter(h: &ComplexMatrix, noise: NoiseModel) -> Result<FilterMatrix> {
    Ok(FilterMatrix {
        kind: FilterKind::Mmse {
            noise_variance: noise.variance(),
        },
        matrix: regularized_pseudo_inverse(h, noise.variance())?,
    })
}

pub fn equalize_and_slice(w: &FilterMatrix, r: &[Complex64]) -> Result<BitBlock> {
    w.equalize_and_slice(r)
}

/// Hamming distance between two equal-length blocks.
pub fn count_bit_errors(sent: &BitBlock, received: &BitBlock) -> Result<usize> {
    if sent.len() != received.len() {
        return Err(Error::DimensionMismatch {
            expected: sent.len(),
            found: received.len(),
        });
    }
    Ok(sent.0.iter().zip(&received.0).filter(|(a, b)| a != b).count())
}
