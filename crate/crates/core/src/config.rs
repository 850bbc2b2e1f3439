use crate::{Error, Result};

/// System dimensions and power parameters of a QAM-FBMC link.
///
/// `fft_size` is always `overlap_factor * num_subcarriers`; construct through
/// [`FbmcConfig::new`] so the invariants hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbmcConfig {
    num_subcarriers: usize,
    overlap_factor: usize,
    num_freq_taps: usize,
    data_power: f64,
    subcarrier_spacing: f64,
}

impl FbmcConfig {
    pub const DEFAULT_SUBCARRIER_SPACING: f64 = 15e3;

    pub fn new(num_subcarriers: usize, overlap_factor: usize, num_freq_taps: usize) -> Result<Self> {
        if num_subcarriers == 0 || overlap_factor == 0 || num_freq_taps == 0 {
            return Err(Error::Config(format!(
                "M, L and K must be positive (got M={num_subcarriers}, L={overlap_factor}, K={num_freq_taps})"
            )));
        }
        let n = num_subcarriers * overlap_factor;
        if num_freq_taps > n {
            return Err(Error::Dimension(format!("K={num_freq_taps} exceeds N={n}")));
        }
        Ok(Self {
            num_subcarriers,
            overlap_factor,
            num_freq_taps,
            data_power: 1.0,
            subcarrier_spacing: Self::DEFAULT_SUBCARRIER_SPACING,
        })
    }

    /// The simulation setup used throughout: M = 128, L = 4, K = 15, σ_d² = 1.
    pub fn standard() -> Self {
        Self::new(128, 4, 15).expect("valid constants")
    }

    pub fn with_data_power(mut self, data_power: f64) -> Result<Self> {
        if !(data_power > 0.0 && data_power.is_finite()) {
            return Err(Error::Config(format!("data power must be positive, got {data_power}")));
        }
        self.data_power = data_power;
        Ok(self)
    }

    pub fn with_subcarrier_spacing(mut self, spacing_hz: f64) -> Result<Self> {
        if !(spacing_hz > 0.0 && spacing_hz.is_finite()) {
            return Err(Error::Config(format!("subcarrier spacing must be positive, got {spacing_hz}")));
        }
        self.subcarrier_spacing = spacing_hz;
        Ok(self)
    }

    pub fn with_num_freq_taps(self, k: usize) -> Result<Self> {
        Self::new(self.num_subcarriers, self.overlap_factor, k).map(|c| Self {
            data_power: self.data_power,
            subcarrier_spacing: self.subcarrier_spacing,
            ..c
        })
    }

    /// M
    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    /// L
    pub fn overlap_factor(&self) -> usize {
        self.overlap_factor
    }

    /// N = L·M
    pub fn fft_size(&self) -> usize {
        self.num_subcarriers * self.overlap_factor
    }

    /// K
    pub fn num_freq_taps(&self) -> usize {
        self.num_freq_taps
    }

    /// σ_d²
    pub fn data_power(&self) -> f64 {
        self.data_power
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.subcarrier_spacing
    }

    /// Sample rate in Hz, `M · Δf`.
    pub fn sample_rate(&self) -> f64 {
        self.num_subcarriers as f64 * self.subcarrier_spacing
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let c = FbmcConfig::standard();
        assert_eq!(c.fft_size(), 512);
        assert_eq!(c.sample_rate(), 1.92e6);
        assert_eq!(c.data_power(), 1.0);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(FbmcConfig::new(0, 4, 1).is_err());
        assert!(matches!(FbmcConfig::new(4, 1, 5), Err(Error::Dimension(_))));
        assert!(FbmcConfig::standard().with_data_power(0.0).is_err());
        assert!(FbmcConfig::standard().with_num_freq_taps(513).is_err());
    }
}
