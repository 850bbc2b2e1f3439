//! Filter and receiver figures of merit.

use std::fmt::Write as _;

use rand::Rng;
use rustfft::FftPlanner;

use crate::channel::{add_awgn_in_place, ChannelRealization};
use crate::filter::PrototypeFilter;
use crate::qam::{random_symbols, QamOrder};
use crate::receivers::{
    self, synthesize_matched, synthesize_mmse_for_channel, EffectiveChannel, ReceiverFilter, ReceiverKind,
};
use crate::system::{block_offsets, receive_window, StackedModel, StreamingModulator};
use crate::{to_db, CMatrix, Complex, Error, FbmcConfig, Result};

/// Interference-plus-noise below this fraction of the desired power is
/// treated as exactly zero (SINR reported as `+∞`).
pub const ORTHOGONALITY_FLOOR: f64 = 1e-20;

/// Receiver family, without the noise level it is synthesized for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReceiverType {
    Matched,
    Mmse,
}

impl ReceiverType {
    pub fn name(self) -> &'static str {
        match self {
            ReceiverType::Matched => "matched",
            ReceiverType::Mmse => "mmse",
        }
    }
}

impl std::str::FromStr for ReceiverType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "matched" | "mf" => Ok(Self::Matched),
            "mmse" => Ok(Self::Mmse),
            _ => Err(Error::Config(format!("unknown receiver `{s}` (matched|mmse)"))),
        }
    }
}

/// Per-subcarrier and average self-SINR.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSinrReport {
    pub per_subcarrier: Vec<f64>,
    pub noise_var: f64,
    pub receiver: ReceiverKind,
}

impl SelfSinrReport {
    /// Mean of the linear per-subcarrier ratios.
    pub fn average_linear(&self) -> f64 {
        self.per_subcarrier.iter().sum::<f64>() / self.per_subcarrier.len() as f64
    }

    pub fn average_db(&self) -> f64 {
        to_db(self.average_linear())
    }

    /// One row per subcarrier and a closing `mean` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subcarrier,sinr_linear,sinr_db\n");
        for (i, s) in self.per_subcarrier.iter().enumerate() {
            let _ = writeln!(out, "{i},{s:.12e},{:.6}", to_db(*s));
        }
        let _ = writeln!(out, "mean,{:.12e},{:.6}", self.average_linear(), self.average_db());
        out
    }
}

fn ratio(desired: f64, impairment: f64) -> f64 {
    if impairment <= ORTHOGONALITY_FLOOR * desired {
        f64::INFINITY
    } else {
        desired / impairment
    }
}

/// Self-SINR of an arbitrary receiver on an arbitrary effective channel:
/// for subcarrier `i`, `|R[i, i+N]|²` over the remaining row energy of
/// `R = Q_f^H H_eff` plus `[Q_f^H Q_f]_(i,i) σ_n²`.
pub fn self_sinr(filter: &ReceiverFilter, heff: &EffectiveChannel, noise_var: f64) -> Result<SelfSinrReport> {
    let resp = filter.response(heff)?;
    let n = heff.window_len();
    let q = filter.matrix();
    let per_subcarrier = (0..filter.num_subcarriers())
        .map(|i| {
            let desired = resp[(i, i + n)].norm_sqr();
            let interference: f64 = resp
                .row(i)
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i + n)
                .map(|(_, v)| v.norm_sqr())
                .sum();
            let noise = q.column(i).norm_squared() * noise_var;
            ratio(desired, interference + noise)
        })
        .collect();
    Ok(SelfSinrReport {
        per_subcarrier,
        noise_var,
        receiver: filter.kind(),
    })
}

/// Self-SINR over AWGN for a receiver of the form `Q_f[n,i] =
/// w[n]·e^{j2πin/M}`. All subcarriers share the same ratio.
///
/// Row `i` of `Q_f^H H_eff` restricted to block `l` is the `M`-point DFT of
/// the residue-folded product `w*·p_l`, so the cost is `2L` small FFTs.
pub fn prototype_self_sinr(w: &[Complex], prototype: &[Complex], config: &FbmcConfig, noise_var: f64) -> Result<f64> {
    let (m, n) = (config.num_subcarriers(), config.fft_size());
    if w.len() != n || prototype.len() != n {
        return Err(Error::Dimension(format!("receive and transmit prototypes need N={n} samples")));
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut desired = 0.0;
    let mut interference = 0.0;
    let mut folded = vec![Complex::new(0.0, 0.0); m];
    for l in block_offsets(config.overlap_factor()) {
        folded.iter_mut().for_each(|v| *v = Complex::new(0.0, 0.0));
        for (t, wt) in w.iter().enumerate() {
            let s = t as isize - l * m as isize;
            if (0..n as isize).contains(&s) {
                folded[t % m] += wt.conj() * prototype[s as usize];
            }
        }
        // forward FFT gives Σ_r f[r] e^{-j2πdr/M}; the ±d pairing does not
        // change the total energy.
        fft.process(&mut folded);
        for (d, v) in folded.iter().enumerate() {
            if l == 0 && d == 0 {
                desired = v.norm_sqr();
            } else {
                interference += v.norm_sqr();
            }
        }
    }
    let noise = w.iter().map(|v| v.norm_sqr()).sum::<f64>() * noise_var;
    Ok(ratio(desired, interference + noise))
}

/// Self-SINR (linear) of a unit-energy prototype over AWGN with the given
/// receiver family.
pub fn awgn_self_sinr(
    prototype: &[Complex],
    config: &FbmcConfig,
    receiver: ReceiverType,
    noise_var: f64,
) -> Result<f64> {
    match receiver {
        ReceiverType::Matched => prototype_self_sinr(prototype, prototype, config, noise_var),
        ReceiverType::Mmse => {
            let (w, _) = receivers::mmse_receive_prototype(prototype, config, noise_var / config.data_power())?;
            prototype_self_sinr(&w, prototype, config, noise_var)
        }
    }
}

/// `σ_d² ‖Q_f^H H_eff − S‖_F² + σ_n² ‖Q_f‖_F²`, the expected squared symbol
/// error of a linear receiver.
pub fn analytic_mse(qf: &CMatrix, heff: &EffectiveChannel, noise_var: f64, data_power: f64) -> f64 {
    let mut resp = qf.ad_mul(heff.matrix());
    let n = heff.window_len();
    for i in 0..qf.ncols() {
        resp[(i, n + i)] -= Complex::new(1.0, 0.0);
    }
    data_power * resp.norm_squared() + noise_var * qf.norm_squared()
}

/// Monte Carlo measurement of the average SINR.
///
/// Random 16-QAM frames are sent through the streaming transmitter, the
/// channel and AWGN, then detected window by window. Per subcarrier the
/// estimate is split into a gain `a = E[d̃ d*]/E|d|²` and the residual
/// `d̃ − a·d`; the ratio `|a|² σ_d² / E|d̃ − a d|²` is averaged over
/// subcarriers in the linear domain.
pub fn empirical_sinr<R: Rng + ?Sized>(
    filter: &PrototypeFilter,
    config: &FbmcConfig,
    receiver: ReceiverType,
    channel: &ChannelRealization,
    noise_var: f64,
    frames: usize,
    rng: &mut R,
) -> Result<f64> {
    const WINDOWS_PER_FRAME: usize = 16;
    if frames == 0 {
        return Err(Error::Config("need at least one frame".into()));
    }
    let model = StackedModel::new(filter, config)?;
    let rx = match receiver {
        ReceiverType::Matched => synthesize_matched(&model),
        ReceiverType::Mmse => synthesize_mmse_for_channel(&model, channel, noise_var, config.data_power())?,
    };
    let modulator = StreamingModulator::new(model.prototype(), config)?;
    let (m, l) = (config.num_subcarriers(), config.overlap_factor());
    let blocks = WINDOWS_PER_FRAME + 2 * l;
    let scale = config.data_power().sqrt();

    let mut cross = vec![Complex::new(0.0, 0.0); m];
    let mut sent_power = vec![0.0; m];
    let mut pairs: Vec<(Vec<Complex>, Vec<Complex>)> = Vec::with_capacity(frames * WINDOWS_PER_FRAME);
    for _ in 0..frames {
        let symbols: Vec<Vec<Complex>> = (0..blocks)
            .map(|_| random_symbols(QamOrder::Qam16, m, rng).into_iter().map(|s| s * scale).collect())
            .collect();
        let mut stream = channel.apply(&modulator.modulate(&symbols)?);
        add_awgn_in_place(&mut stream, noise_var, rng);
        for k in l..blocks - l {
            let est = rx.detect(receive_window(&stream, k, config).expect("interior window"))?;
            for i in 0..m {
                cross[i] += est[i] * symbols[k][i].conj();
                sent_power[i] += symbols[k][i].norm_sqr();
            }
            pairs.push((est, symbols[k].clone()));
        }
    }
    let gains: Vec<Complex> = cross.iter().zip(&sent_power).map(|(c, p)| c / *p).collect();
    let mut distortion = vec![0.0; m];
    for (est, sent) in &pairs {
        for i in 0..m {
            distortion[i] += (est[i] - gains[i] * sent[i]).norm_sqr();
        }
    }
    let count = pairs.len() as f64;
    let mean: f64 = (0..m)
        .map(|i| ratio(gains[i].norm_sqr() * config.data_power(), distortion[i] / count))
        .sum::<f64>()
        / m as f64;
    Ok(to_db(mean))
}

/// Time dispersion of a prototype: with `|p0|²` normalized to unit sum and
/// center of mass `c`, `σ_t = sqrt(Σ (n − c)² |p0[n]|²) / N`.
pub fn time_dispersion(p0: &[Complex]) -> Result<f64> {
    let energy: f64 = p0.iter().map(|s| s.norm_sqr()).sum();
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::ZeroFilter);
    }
    let weights: Vec<f64> = p0.iter().map(|s| s.norm_sqr() / energy).collect();
    let center: f64 = weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
    let spread: f64 = weights
        .iter()
        .enumerate()
        .map(|(n, w)| (n as f64 - center).powi(2) * w)
        .sum();
    Ok(spread.sqrt() / p0.len() as f64)
}

/// Spectral-confinement constraint values of a coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintValues {
    /// `|q_0 + 2 Σ Re q_k|`, the time filter's edge value.
    pub c0: f64,
    /// `|Σ k Im q_k|`
    pub c1: f64,
    /// `|Σ k² Re q_k|`
    pub c2: f64,
}

pub fn constraint_values(q: &[Complex]) -> ConstraintValues {
    let Some(q0) = q.first() else {
        return ConstraintValues { c0: 0.0, c1: 0.0, c2: 0.0 };
    };
    let tail = q.iter().enumerate().skip(1);
    ConstraintValues {
        c0: (q0.re + 2.0 * tail.clone().map(|(_, v)| v.re).sum::<f64>()).abs(),
        c1: tail.clone().map(|(k, v)| k as f64 * v.im).sum::<f64>().abs(),
        c2: tail.map(|(k, v)| (k * k) as f64 * v.re).sum::<f64>().abs(),
    }
}

/// Power spectral density of a single pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    /// Frequency in units of the subcarrier spacing, ascending, 0 at DC.
    pub freq: Vec<f64>,
    /// Power normalized to a 0 dB peak.
    pub power_db: Vec<f64>,
}

/// Lowest reported level; exact spectral zeros are clamped here.
pub const PSD_FLOOR_DB: f64 = -400.0;

impl Psd {
    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq,power_db\n");
        for (f, p) in self.freq.iter().zip(&self.power_db) {
            let _ = writeln!(out, "{f:.9},{p:.6}");
        }
        out
    }

    /// Highest level at `|f| >= offset` subcarrier spacings.
    pub fn max_beyond(&self, offset: f64) -> f64 {
        self.freq
            .iter()
            .zip(&self.power_db)
            .filter(|(f, _)| f.abs() >= offset)
            .map(|(_, p)| *p)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `|DFT_nfft(p0)|²`, zero padded, peak-normalized. The sample rate is taken
/// as `M` samples per symbol, so bin spacing is `M / nfft` subcarriers.
pub fn psd(p0: &[Complex], num_subcarriers: usize, nfft: usize) -> Result<Psd> {
    if p0.is_empty() || nfft < p0.len() {
        return Err(Error::Dimension(format!(
            "nfft={nfft} must be at least the filter length {}",
            p0.len()
        )));
    }
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    buf[..p0.len()].copy_from_slice(p0);
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let power: Vec<f64> = buf.iter().map(|v| v.norm_sqr()).collect();
    let peak = power.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::ZeroFilter);
    }
    let half = nfft / 2;
    let step = num_subcarriers as f64 / nfft as f64;
    let (freq, power_db) = (0..nfft)
        .map(|i| {
            let bin = (i + nfft - half) % nfft;
            let db = (10.0 * (power[bin] / peak).log10()).max(PSD_FLOOR_DB);
            ((i as f64 - half as f64) * step, db)
        })
        .unzip();
    Ok(Psd { freq, power_db })
}

/// Least-squares slope of `log10(amplitude)` against `log10(f)` through the
/// local maxima of the positive-frequency PSD inside `[lo, hi]`.
pub fn falloff_slope(psd: &Psd, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Config(format!("fit range [{lo}, {hi}] must be positive and non-empty")));
    }
    let p = &psd.power_db;
    let points: Vec<(f64, f64)> = (1..p.len().saturating_sub(1))
        .filter(|&i| psd.freq[i] >= lo && psd.freq[i] <= hi)
        .filter(|&i| p[i] > p[i - 1] && p[i] >= p[i + 1] && p[i] > PSD_FLOOR_DB)
        .map(|i| (psd.freq[i].log10(), p[i] / 20.0))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            found: points.len(),
        });
    }
    let count = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / count;
    let my = points.iter().map(|p| p.1).sum::<f64>() / count;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
