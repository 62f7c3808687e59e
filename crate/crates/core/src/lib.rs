//! Analysis and simulation of linear zero-forcing and MMSE detectors for
//! square MIMO channels.
//!
//! The crate is organised bottom-up: [`linalg`] provides complex matrices and
//! singular values, [`channel`] draws Rayleigh channels and noise, [`detection`]
//! builds the two receive filters, [`analysis`] holds the closed-form
//! conditioning and SNR results, and [`experiments`] runs the seeded Monte
//! Carlo sweeps that produce result tables.

pub mod analysis;
pub mod channel;
pub mod detection;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod props;
pub mod rng;
pub mod stats;

pub use analysis::{
    cond_ratio_approx, cond_ratio_exact, edelman_tail, gain_db, snr_mmse, snr_zf, weyl_lower_bound, CondRatioReport,
};
pub use channel::{ChannelRealization, NoiseModel, Provenance};
pub use detection::{BitBlock, FilterKind, FilterMatrix};
pub use error::{Error, Result};
pub use experiments::{ResultTable, SimConfig, SnrConvention};
pub use linalg::{ComplexMatrix, Spectrum, SvdResult};
pub use num_complex::Complex64;
pub use rng::RngStream;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
