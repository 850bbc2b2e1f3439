//! Stacked-matrix transmit model and the streaming overlap-and-sum
//! transmitter it must agree with.
//!
//! A receive window `k` covers samples `kM … kM+N-1` of the transmitted
//! stream. The stacked vector `x̄[k]` additionally includes the `M` samples
//! before the window (rows `n = -M … -1`) so that a channel with up to `M`
//! taps of memory can be expressed as a square convolution matrix. Data block
//! `k+l` starts at row `n = lM`, and carries a full copy of the prototype
//! shifted by `lM`:
//!
//! ```text
//! g_m^(l)[n] = p0[n - lM] · e^{j2πm(n - lM)/M}   on the rows where 0 <= n - lM < N
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::{CMatrix, CVector, Complex, Error, FbmcConfig, Result};
use crate::filter::PrototypeFilter;

/// Block offsets `l = -L … L-1` covered by one stacked data vector.
pub fn block_offsets(overlap: usize) -> std::ops::Range<isize> {
    -(overlap as isize)..overlap as isize
}

/// Column `g_m^(l)` of the stacked pulse-shaping matrix (length `M+N`,
/// row `n + M` holds sample `n`).
pub fn build_modulation_column(m: usize, l: isize, p0: &[Complex], config: &FbmcConfig) -> Result<CVector> {
    let (mm, ll, n) = (config.num_subcarriers(), config.overlap_factor() as isize, config.fft_size());
    if m >= mm {
        return Err(Error::Index(format!("subcarrier {m} not in 0..{mm}")));
    }
    if l < -ll || l >= ll {
        return Err(Error::Index(format!("block offset {l} not in {}..{ll}", -ll)));
    }
    if p0.len() != n {
        return Err(Error::Dimension(format!("prototype has {} samples, expected N={n}", p0.len())));
    }
    let mut col = CVector::zeros(mm + n);
    fill_column(col.as_mut_slice(), m, l, p0, mm);
    Ok(col)
}

fn fill_column(col: &mut [Complex], m: usize, l: isize, p0: &[Complex], mm: usize) {
    let n = p0.len() as isize;
    let shift = l * mm as isize;
    for (row, out) in col.iter_mut().enumerate() {
        let s = row as isize - mm as isize - shift;
        if (0..n).contains(&s) {
            let phase = 2.0 * PI * ((m * s as usize) % mm) as f64 / mm as f64;
            *out = p0[s as usize] * Complex::from_polar(1.0, phase);
        }
    }
}

/// The matrices defining one receive window as a linear system.
#[derive(Debug, Clone)]
pub struct StackedModel {
    config: FbmcConfig,
    prototype: Vec<Complex>,
    gbar: CMatrix,
}

impl StackedModel {
    /// Builds `Ḡ_f` from a prototype filter. The prototype is scaled to unit
    /// energy first.
    pub fn new(filter: &PrototypeFilter, config: &FbmcConfig) -> Result<Self> {
        if filter.fft_size() != config.fft_size() {
            return Err(Error::Dimension(format!(
                "filter has N={}, config has N={}",
                filter.fft_size(),
                config.fft_size()
            )));
        }
        Self::from_samples(filter.unit_energy_samples()?, config)
    }

    /// Builds the model from explicit time samples, used as given.
    pub fn from_samples(prototype: Vec<Complex>, config: &FbmcConfig) -> Result<Self> {
        let (m, n) = (config.num_subcarriers(), config.fft_size());
        if prototype.len() != n {
            return Err(Error::Dimension(format!(
                "prototype has {} samples, expected N={n}",
                prototype.len()
            )));
        }
        let mut gbar = CMatrix::zeros(m + n, 2 * n);
        for (b, l) in block_offsets(config.overlap_factor()).enumerate() {
            for sub in 0..m {
                let mut col = gbar.column_mut(b * m + sub);
                fill_column(col.as_mut_slice(), sub, l, &prototype, m);
            }
        }
        Ok(Self {
            config: *config,
            prototype,
            gbar,
        })
    }

    pub fn config(&self) -> &FbmcConfig {
        &self.config
    }

    /// The (unit-energy) prototype the model was built from.
    pub fn prototype(&self) -> &[Complex] {
        &self.prototype
    }

    /// `Ḡ_f`, size `(M+N) × 2N`.
    pub fn gbar(&self) -> &CMatrix {
        &self.gbar
    }

    /// Column block `G_f^(l)` (`M` columns).
    pub fn block(&self, l: isize) -> CMatrix {
        let (m, ll) = (self.config.num_subcarriers(), self.config.overlap_factor() as isize);
        assert!((-ll..ll).contains(&l), "block offset {l} out of range");
        let start = (l + ll) as usize * m;
        self.gbar.columns(start, m).into_owned()
    }

    /// `T = [0_{N×M} | I_N]`.
    pub fn slice_matrix(&self) -> CMatrix {
        let (m, n) = (self.config.num_subcarriers(), self.config.fft_size());
        let mut t = CMatrix::zeros(n, m + n);
        for i in 0..n {
            t[(i, m + i)] = Complex::new(1.0, 0.0);
        }
        t
    }

    /// `S`, the `M × 2N` extractor of the in-window block `d[k]`.
    pub fn extractor_matrix(&self) -> CMatrix {
        let (m, n) = (self.config.num_subcarriers(), self.config.fft_size());
        let mut s = CMatrix::zeros(m, 2 * n);
        for i in 0..m {
            s[(i, n + i)] = Complex::new(1.0, 0.0);
        }
        s
    }

    /// `x̄[k] = Ḡ_f · d̄[k]`.
    pub fn transmit_window(&self, data: &StackedDataVector) -> Result<CVector> {
        if data.len() != self.gbar.ncols() {
            return Err(Error::Dimension(format!(
                "stacked data has length {}, expected {}",
                data.len(),
                self.gbar.ncols()
            )));
        }
        Ok(&self.gbar * data.as_vector())
    }
}

/// `d̄[k] = [d[k-L]; …; d[k]; …; d[k+L-1]]`, `2L` blocks of `M` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedDataVector(CVector);

impl StackedDataVector {
    pub fn new(data: CVector, config: &FbmcConfig) -> Result<Self> {
        if data.len() != 2 * config.fft_size() {
            return Err(Error::Dimension(format!(
                "stacked data needs 2N={} entries, got {}",
                2 * config.fft_size(),
                data.len()
            )));
        }
        Ok(Self(data))
    }

    /// Stacks `2L` consecutive blocks of `M` symbols.
    pub fn from_blocks(blocks: &[Vec<Complex>], config: &FbmcConfig) -> Result<Self> {
        let (m, l) = (config.num_subcarriers(), config.overlap_factor());
        if blocks.len() != 2 * l || blocks.iter().any(|b| b.len() != m) {
            return Err(Error::Dimension(format!("need {} blocks of {m} symbols", 2 * l)));
        }
        Ok(Self(CVector::from_iterator(2 * l * m, blocks.iter().flatten().copied())))
    }

    /// The stacked vector for window `k` of a frame, with blocks outside the
    /// frame treated as zero.
    pub fn from_frame(frame: &[Vec<Complex>], k: usize, config: &FbmcConfig) -> Self {
        let (m, l) = (config.num_subcarriers(), config.overlap_factor() as isize);
        let mut v = CVector::zeros(2 * config.fft_size());
        for (b, off) in (-l..l).enumerate() {
            let idx = k as isize + off;
            if idx >= 0 && (idx as usize) < frame.len() {
                v.rows_mut(b * m, m).copy_from_slice(&frame[idx as usize]);
            }
        }
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    /// `d[k]`, the block at offset `N`.
    pub fn center_block(&self, config: &FbmcConfig) -> &[Complex] {
        let (m, n) = (config.num_subcarriers(), config.fft_size());
        &self.0.as_slice()[n..n + m]
    }
}

/// Overlap-and-sum FBMC synthesis with a reusable FFT plan.
#[derive(Clone)]
pub struct StreamingModulator {
    config: FbmcConfig,
    prototype: Vec<Complex>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for StreamingModulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StreamingModulator")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl StreamingModulator {
    pub fn new(prototype: &[Complex], config: &FbmcConfig) -> Result<Self> {
        if prototype.len() != config.fft_size() {
            return Err(Error::Dimension(format!(
                "prototype has {} samples, expected N={}",
                prototype.len(),
                config.fft_size()
            )));
        }
        let ifft = FftPlanner::new().plan_fft_inverse(config.num_subcarriers());
        Ok(Self {
            config: *config,
            prototype: prototype.to_vec(),
            ifft,
        })
    }

    /// Output length for `frames` data blocks: `(F-1)·M + N`.
    pub fn output_len(&self, frames: usize) -> usize {
        (frames.max(1) - 1) * self.config.num_subcarriers() + self.config.fft_size()
    }

    /// Modulates blocks `d[0 … F-1]` into one sample stream. Block `k` is
    /// placed at offset `kM`.
    pub fn modulate(&self, symbols: &[Vec<Complex>]) -> Result<Vec<Complex>> {
        let (m, n) = (self.config.num_subcarriers(), self.config.fft_size());
        if symbols.is_empty() {
            return Err(Error::Dimension("need at least one data block".into()));
        }
        let mut out = vec![Complex::new(0.0, 0.0); self.output_len(symbols.len())];
        let mut tone = vec![Complex::new(0.0, 0.0); m];
        for (k, block) in symbols.iter().enumerate() {
            if block.len() != m {
                return Err(Error::Dimension(format!(
                    "data block {k} has {} symbols, expected M={m}",
                    block.len()
                )));
            }
            // Subcarriers sit every L bins of an N-point IDFT, so the IDFT
            // output is the M-point IDFT repeated L times.
            tone.copy_from_slice(block);
            self.ifft.process(&mut tone);
            let base = k * m;
            for s in 0..n {
                out[base + s] += self.prototype[s] * tone[s % m];
            }
        }
        Ok(out)
    }
}

/// Convenience wrapper around [`StreamingModulator`].
pub fn streaming_transmit(symbols: &[Vec<Complex>], prototype: &[Complex], config: &FbmcConfig) -> Result<Vec<Complex>> {
    StreamingModulator::new(prototype, config)?.modulate(symbols)
}

/// Samples of the stream that make up `x̄[k]` (rows `n = -M … N-1` relative
/// to block `k`). Requires `k >= 1`.
pub fn stacked_window<'a>(stream: &'a [Complex], k: usize, config: &FbmcConfig) -> Option<&'a [Complex]> {
    let (m, n) = (config.num_subcarriers(), config.fft_size());
    let start = (k * m).checked_sub(m)?;
    stream.get(start..start + m + n)
}

/// Receive window `k`: samples `kM … kM+N-1`.
pub fn receive_window<'a>(stream: &'a [Complex], k: usize, config: &FbmcConfig) -> Option<&'a [Complex]> {
    let (m, n) = (config.num_subcarriers(), config.fft_size());
    stream.get(k * m..k * m + n)
}
