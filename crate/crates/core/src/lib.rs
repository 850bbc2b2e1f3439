//! QAM-FBMC waveform toolkit.
//!
//! The transceiver is modelled in stacked-matrix form: one receive window of
//! `N = L·M` samples is a linear map of the `2L` data blocks that overlap it.
//! On top of that model the crate synthesizes matched and MMSE receiver
//! filters, evaluates prototype filters by their self-SINR, searches for new
//! prototypes with a constrained pattern search, and runs Monte Carlo BER and
//! PSD experiments.
//!
//! Module map:
//!
//! * [`filter`]: configuration, prototype filters and the built-in filter bank
//! * [`system`]: stacked pulse-shaping matrices and the streaming transmitter
//! * [`channel`]: convolution matrices, EPA/EVA fading and AWGN
//! * [`receivers`]: matched, MMSE and matched+FDE receivers
//! * [`metrics`]: self-SINR, time dispersion, design constraints, PSD
//! * [`optimizer`]: generalized pattern search over frequency coefficients
//! * [`sim`]: QAM mapping, BER runs, SINR sweeps and PSD export

pub mod channel;
mod config;
mod error;
pub mod filter;
pub mod kv;
pub mod metrics;
pub mod optimizer;
pub mod qam;
pub mod receivers;
pub mod sim;
pub mod svg;
pub mod system;

pub use config::FbmcConfig;
pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Complex>;

/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex>;

/// Converts an SNR in dB into the linear noise variance for the given data
/// power (`SNR = σ_d² / σ_n²`). `+∞` maps to a noiseless link.
pub fn noise_variance_from_snr_db(snr_db: f64, data_power: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        data_power * 10f64.powf(-snr_db / 10.0)
    }
}

/// Linear power ratio to dB; `0` maps to `-∞` and `∞` to `+∞`.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
