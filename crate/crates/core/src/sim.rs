//! Monte Carlo BER runs, self-SINR sweeps and PSD export.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{add_awgn_in_place, convolve_truncated, draw_fading_realization, ChannelRealization, FadingProfile};
use crate::filter::{resolve_filter, PrototypeFilter};
use crate::kv::KvFile;
use crate::metrics::{awgn_self_sinr, psd, Psd, ReceiverType};
use crate::qam::{bit_errors, random_words, QamOrder};
use crate::receivers::{synthesize_matched, synthesize_mmse_awgn, synthesize_mmse_for_channel, FdeEqualizer, ReceiverFilter};
use crate::svg::{LinePlot, Series};
use crate::system::{receive_window, StackedModel, StreamingModulator};
use crate::{noise_variance_from_snr_db, to_db, Complex, Error, FbmcConfig, Result};

/// Environment variable overriding the number of worker threads.
pub const WORKERS_ENV: &str = "FBMC_WORKERS";

/// Worker count requested through [`WORKERS_ENV`], if any.
pub fn requested_workers() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

/// Runs `f` on a pool sized by [`WORKERS_ENV`] (or the default pool).
#[cfg(feature = "parallel")]
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match requested_workers()? {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}"))),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    requested_workers()?;
    Ok(f())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BerReceiver {
    /// Matched filter behind a single-tap frequency-domain MMSE equalizer.
    MatchedFde,
    Mmse,
}

impl BerReceiver {
    pub fn name(self) -> &'static str {
        match self {
            BerReceiver::MatchedFde => "matched+fde",
            BerReceiver::Mmse => "mmse",
        }
    }
}

impl std::str::FromStr for BerReceiver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "matched" | "matched+fde" | "mf" | "fde" => Ok(Self::MatchedFde),
            "mmse" => Ok(Self::Mmse),
            _ => Err(Error::Config(format!("unknown receiver `{s}` (matched+fde|mmse)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Awgn,
    Fading(FadingProfile),
}

impl ChannelSpec {
    /// `awgn`, `epa`, `eva` or a profile file.
    pub fn resolve(spec: &str) -> Result<Self> {
        if spec.eq_ignore_ascii_case("awgn") {
            Ok(Self::Awgn)
        } else {
            FadingProfile::resolve(spec).map(Self::Fading)
        }
    }

    pub fn name(&self) -> &str {
        match self {
            ChannelSpec::Awgn => "AWGN",
            ChannelSpec::Fading(p) => p.name(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub config: FbmcConfig,
    pub filter: PrototypeFilter,
    pub receiver: BerReceiver,
    pub channel: ChannelSpec,
    pub modulation: QamOrder,
    pub snr_grid_db: Vec<f64>,
    pub frames: usize,
    /// Data blocks per frame, edge blocks included.
    pub symbols_per_frame: usize,
    pub rng_seed: u64,
    pub output_dir: Option<PathBuf>,
}

const EXPERIMENT_KEYS: &[&str] = &[
    "m",
    "l",
    "k",
    "subcarrier_spacing_hz",
    "filter",
    "receiver",
    "channel",
    "modulation",
    "snr_db",
    "frames",
    "symbols_per_frame",
    "seed",
    "output_dir",
];

/// Resolves `value` against `base` when it names an existing relative file.
fn local_path(base: &Path, value: &str) -> String {
    let p = Path::new(value);
    if p.is_relative() && base.join(p).exists() {
        base.join(p).to_string_lossy().into_owned()
    } else {
        value.to_string()
    }
}

fn config_from_kv(kv: &KvFile) -> Result<FbmcConfig> {
    let cfg = FbmcConfig::new(kv.get_or("m", 128)?, kv.get_or("l", 4)?, kv.get_or("k", 15)?)?;
    match kv.get::<f64>("subcarrier_spacing_hz")? {
        Some(df) => cfg.with_subcarrier_spacing(df),
        None => Ok(cfg),
    }
}

fn reject_unknown(kv: &KvFile, known: &[&str]) -> Result<()> {
    let unknown = kv.unknown_keys(known);
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))))
    }
}

impl ExperimentSpec {
    /// AWGN, MMSE, 16-QAM, one frame of `2L + 16` blocks, seed 1.
    pub fn new(config: FbmcConfig, filter: PrototypeFilter) -> Self {
        let blocks = 2 * config.overlap_factor() + 16;
        Self {
            config,
            filter,
            receiver: BerReceiver::Mmse,
            channel: ChannelSpec::Awgn,
            modulation: QamOrder::Qam16,
            snr_grid_db: vec![10.0],
            frames: 1,
            symbols_per_frame: blocks,
            rng_seed: 1,
            output_dir: None,
        }
    }

    pub fn from_kv(kv: &KvFile, base: &Path) -> Result<Self> {
        reject_unknown(kv, EXPERIMENT_KEYS)?;
        let config = config_from_kv(kv)?;
        let filter_name = kv.raw("filter").ok_or_else(|| Error::Config("missing `filter`".into()))?;
        let filter = resolve_filter(&local_path(base, filter_name), &config)?;
        let mut spec = Self::new(config, filter);
        spec.receiver = kv.get_or("receiver", spec.receiver)?;
        if let Some(c) = kv.raw("channel") {
            spec.channel = ChannelSpec::resolve(&local_path(base, c))?;
        }
        spec.modulation = kv.get_or("modulation", spec.modulation)?;
        spec.snr_grid_db = kv
            .get_f64_list("snr_db")?
            .ok_or_else(|| Error::Config("missing `snr_db`".into()))?;
        spec.frames = kv.get_or("frames", spec.frames)?;
        spec.symbols_per_frame = kv.get_or("symbols_per_frame", spec.symbols_per_frame)?;
        spec.rng_seed = kv.get_or("seed", spec.rng_seed)?;
        spec.output_dir = kv.raw("output_dir").map(|d| base.join(d));
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.config.overlap_factor();
        if self.frames == 0 {
            return Err(Error::Config("frames must be at least 1".into()));
        }
        if self.symbols_per_frame <= 2 * l {
            return Err(Error::Config(format!(
                "symbols_per_frame={} leaves no interior window (need > 2L = {})",
                self.symbols_per_frame,
                2 * l
            )));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| s.is_nan()) {
            return Err(Error::Config("snr_db needs at least one number".into()));
        }
        if self.filter.fft_size() != self.config.fft_size() {
            return Err(Error::Dimension(format!(
                "filter has N={}, configuration N={}",
                self.filter.fft_size(),
                self.config.fft_size()
            )));
        }
        Ok(())
    }
}

/// Windows counted for BER: the first and last `L` see zero-padded blocks.
pub fn interior_windows(symbols_per_frame: usize, overlap: usize) -> Range<usize> {
    overlap..symbols_per_frame.saturating_sub(overlap).max(overlap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerResult {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub ber: f64,
    /// 95% normal-approximation half width.
    pub confidence_halfwidth: f64,
}

impl BerResult {
    pub fn new(snr_db: f64, bit_errors: u64, bits_total: u64) -> Self {
        let ber = if bits_total == 0 { 0.0 } else { bit_errors as f64 / bits_total as f64 };
        let mut r = Self {
            snr_db,
            bit_errors,
            bits_total,
            ber,
            confidence_halfwidth: 0.0,
        };
        r.confidence_halfwidth = 1.96 * r.standard_error();
        r
    }

    pub fn standard_error(&self) -> f64 {
        if self.bits_total == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bits_total as f64).sqrt()
    }
}

pub fn ber_csv(results: &[BerResult]) -> String {
    let mut out = String::from("snr_db,bit_errors,bits_total,ber,ci95_halfwidth\n");
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{:.9e},{:.3e}",
            r.snr_db, r.bit_errors, r.bits_total, r.ber, r.confidence_halfwidth
        );
    }
    out
}

pub fn ber_svg(label: &str, results: &[BerResult]) -> String {
    let points = results
        .iter()
        .filter(|r| r.ber > 0.0)
        .map(|r| (r.snr_db, r.ber.log10()))
        .collect();
    LinePlot::new("Bit error rate", "SNR (dB)", "log10 BER")
        .with_series(Series::new(label, points))
        .render()
}

/// RNG for one frame: the stream index packs the SNR index and frame index
/// so every (seed, SNR point, frame) triple is independent and reproducible.
pub fn frame_rng(seed: u64, snr_index: usize, frame: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 40) | frame as u64);
    rng
}

enum Detector {
    Linear(ReceiverFilter),
    Fde(FdeEqualizer, ReceiverFilter),
}

impl Detector {
    fn detect(&self, y: &[Complex]) -> Result<Vec<Complex>> {
        match self {
            Detector::Linear(q) => q.detect(y),
            Detector::Fde(eq, q) => q.detect(&eq.equalize(y)?),
        }
    }
}

struct Link<'a> {
    spec: &'a ExperimentSpec,
    model: StackedModel,
    modulator: StreamingModulator,
    matched: ReceiverFilter,
}

impl Link<'_> {
    fn detector(&self, channel: &ChannelRealization, noise_var: f64, awgn_mmse: Option<&ReceiverFilter>) -> Result<Detector> {
        let sd = self.spec.config.data_power();
        Ok(match self.spec.receiver {
            BerReceiver::Mmse => match awgn_mmse {
                Some(q) => Detector::Linear(q.clone()),
                None => Detector::Linear(synthesize_mmse_for_channel(&self.model, channel, noise_var, sd)?),
            },
            BerReceiver::MatchedFde => Detector::Fde(
                FdeEqualizer::new(channel.taps(), self.spec.config.fft_size(), noise_var, sd)?,
                self.matched.clone(),
            ),
        })
    }

    /// Desired-symbol gain per subcarrier: the detector applied to the
    /// channel-filtered centre-block column.
    fn desired_gains(&self, detector: &Detector, channel: &ChannelRealization) -> Result<Vec<Complex>> {
        let cfg = &self.spec.config;
        let (m, n) = (cfg.num_subcarriers(), cfg.fft_size());
        let g = self.model.gbar();
        (0..m)
            .map(|i| {
                let col = convolve_truncated(channel.taps(), g.column(n + i).as_slice());
                Ok(detector.detect(&col[m..])?[i])
            })
            .collect()
    }

    fn run_frame(&self, snr_index: usize, frame: usize, noise_var: f64, awgn_mmse: Option<&ReceiverFilter>) -> Result<(u64, u64)> {
        let spec = self.spec;
        let cfg = &spec.config;
        let (m, l) = (cfg.num_subcarriers(), cfg.overlap_factor());
        let mut rng = frame_rng(spec.rng_seed, snr_index, frame);
        let channel = match &spec.channel {
            ChannelSpec::Awgn => ChannelRealization::identity(),
            ChannelSpec::Fading(p) => draw_fading_realization(p, cfg.sample_rate(), &mut rng)?,
        };
        let amplitude = cfg.data_power().sqrt();
        let words: Vec<Vec<usize>> = (0..spec.symbols_per_frame)
            .map(|_| random_words(spec.modulation, m, &mut rng))
            .collect();
        let symbols: Vec<Vec<Complex>> = words
            .iter()
            .map(|b| b.iter().map(|w| spec.modulation.map(*w) * amplitude).collect())
            .collect();
        let mut stream = channel.apply(&self.modulator.modulate(&symbols)?);
        add_awgn_in_place(&mut stream, noise_var, &mut rng);

        let detector = self.detector(&channel, noise_var, awgn_mmse)?;
        let gains = self.desired_gains(&detector, &channel)?;
        let mut errors = 0u64;
        let mut bits = 0u64;
        for k in interior_windows(spec.symbols_per_frame, l) {
            let y = receive_window(&stream, k, cfg).expect("interior window lies inside the frame");
            let est = detector.detect(y)?;
            for i in 0..m {
                let z = est[i] / (gains[i] * amplitude);
                let z = if z.is_finite() { z } else { Complex::new(0.0, 0.0) };
                errors += bit_errors(spec.modulation.demap(z), words[k][i]) as u64;
                bits += spec.modulation.bits_per_symbol() as u64;
            }
        }
        Ok((errors, bits))
    }
}

fn sum_frames(frames: usize, f: impl Fn(usize) -> Result<(u64, u64)> + Sync) -> Result<(u64, u64)> {
    let add = |a: Result<(u64, u64)>, b: Result<(u64, u64)>| -> Result<(u64, u64)> {
        let (a, b) = (a?, b?);
        Ok((a.0 + b.0, a.1 + b.1))
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..frames).into_par_iter().map(&f).reduce(|| Ok((0, 0)), add)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..frames).map(&f).fold(Ok((0, 0)), add)
    }
}

/// Uncoded hard-decision BER for every grid point. Each frame draws its own
/// block-fading channel, data and noise; the receiver knows the channel.
/// Estimates are divided by the desired-symbol gain before slicing.
pub fn run_ber(spec: &ExperimentSpec) -> Result<Vec<BerResult>> {
    spec.validate()?;
    let model = StackedModel::new(&spec.filter, &spec.config)?;
    let link = Link {
        spec,
        modulator: StreamingModulator::new(model.prototype(), &spec.config)?,
        matched: synthesize_matched(&model),
        model,
    };
    spec.snr_grid_db
        .iter()
        .enumerate()
        .map(|(si, &snr)| {
            let noise_var = noise_variance_from_snr_db(snr, spec.config.data_power());
            let awgn_mmse = match (&spec.channel, spec.receiver) {
                (ChannelSpec::Awgn, BerReceiver::Mmse) => {
                    Some(synthesize_mmse_awgn(&link.model, noise_var, spec.config.data_power())?)
                }
                _ => None,
            };
            let (errors, bits) = sum_frames(spec.frames, |f| link.run_frame(si, f, noise_var, awgn_mmse.as_ref()))?;
            Ok(BerResult::new(snr, errors, bits))
        })
        .collect()
}

/// Writes `ber.csv` and `ber.svg` into the spec's output directory.
pub fn persist_ber(spec: &ExperimentSpec, results: &[BerResult]) -> Result<Vec<PathBuf>> {
    let Some(dir) = &spec.output_dir else {
        return Ok(Vec::new());
    };
    let label = format!("{} {} {} {}", spec.filter.label(), spec.receiver.name(), spec.channel.name(), spec.modulation);
    write_files(dir, &[("ber.csv", ber_csv(results)), ("ber.svg", ber_svg(&label, results))])
}

pub(crate) fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files
        .iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrPoint {
    pub filter: String,
    pub receiver: ReceiverType,
    pub snr_db: f64,
    pub sinr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SinrSweep {
    pub points: Vec<SinrPoint>,
}

impl SinrSweep {
    pub fn get(&self, filter: &str, receiver: ReceiverType, snr_db: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.filter == filter && p.receiver == receiver && p.snr_db == snr_db)
            .map(|p| p.sinr_db)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("filter,receiver,snr_db,sinr_db\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{:.6}", p.filter, p.receiver.name(), p.snr_db, p.sinr_db);
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let mut plot = LinePlot::new("Self-SINR over AWGN", "SNR (dB)", "self-SINR (dB)");
        let mut keys: Vec<(&str, ReceiverType)> = Vec::new();
        for p in &self.points {
            if !keys.contains(&(p.filter.as_str(), p.receiver)) {
                keys.push((p.filter.as_str(), p.receiver));
            }
        }
        for (f, r) in keys {
            let pts = self
                .points
                .iter()
                .filter(|p| p.filter == f && p.receiver == r && p.snr_db.is_finite())
                .map(|p| (p.snr_db, p.sinr_db))
                .collect();
            plot = plot.with_series(Series::new(format!("{f} {}", r.name()), pts));
        }
        plot.render()
    }
}

/// Analytic AWGN self-SINR of every (filter, receiver) pair on the grid.
pub fn run_sinr_sweep(
    filters: &[PrototypeFilter],
    receivers: &[ReceiverType],
    snr_grid_db: &[f64],
    config: &FbmcConfig,
) -> Result<SinrSweep> {
    let mut points = Vec::new();
    for f in filters {
        let p = StackedModel::new(f, config)?.prototype().to_vec();
        for &r in receivers {
            for &snr in snr_grid_db {
                let noise_var = noise_variance_from_snr_db(snr, config.data_power());
                points.push(SinrPoint {
                    filter: f.label().to_string(),
                    receiver: r,
                    snr_db: snr,
                    sinr_db: to_db(awgn_self_sinr(&p, config, r, noise_var)?),
                });
            }
        }
    }
    Ok(SinrSweep { points })
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub config: FbmcConfig,
    pub filters: Vec<PrototypeFilter>,
    pub receivers: Vec<ReceiverType>,
    pub snr_grid_db: Vec<f64>,
    pub output_dir: Option<PathBuf>,
}

impl SweepSpec {
    pub fn from_kv(kv: &KvFile, base: &Path) -> Result<Self> {
        reject_unknown(kv, &["m", "l", "k", "filters", "receivers", "snr_db", "output_dir"])?;
        let config = config_from_kv(kv)?;
        Ok(Self {
            filters: filter_list(kv, base, &config)?,
            receivers: kv
                .raw("receivers")
                .unwrap_or("mmse")
                .split(',')
                .map(|r| r.trim().parse())
                .collect::<Result<_>>()?,
            snr_grid_db: kv
                .get_f64_list("snr_db")?
                .ok_or_else(|| Error::Config("missing `snr_db`".into()))?,
            output_dir: kv.raw("output_dir").map(|d| base.join(d)),
            config,
        })
    }

    pub fn run(&self) -> Result<SinrSweep> {
        run_sinr_sweep(&self.filters, &self.receivers, &self.snr_grid_db, &self.config)
    }
}

fn filter_list(kv: &KvFile, base: &Path, config: &FbmcConfig) -> Result<Vec<PrototypeFilter>> {
    kv.raw("filters")
        .unwrap_or("G15,G30,G50,Ginf")
        .split(',')
        .map(|f| resolve_filter(&local_path(base, f.trim()), config))
        .collect()
}

/// Label used for the OFDM reference curve.
pub const OFDM_LABEL: &str = "OFDM";

#[derive(Debug, Clone)]
pub struct PsdExport {
    pub curves: Vec<(String, Psd)>,
}

/// PSD of each filter plus a rectangular pulse of length `M` (plain OFDM),
/// all on the same `nfft` grid.
pub fn export_psd(filters: &[PrototypeFilter], config: &FbmcConfig, nfft: usize) -> Result<PsdExport> {
    let m = config.num_subcarriers();
    let mut curves = filters
        .iter()
        .map(|f| Ok((f.label().to_string(), psd(f.time_samples(), m, nfft)?)))
        .collect::<Result<Vec<_>>>()?;
    let rect = vec![Complex::new(1.0, 0.0); m];
    curves.push((OFDM_LABEL.to_string(), psd(&rect, m, nfft)?));
    Ok(PsdExport { curves })
}

impl PsdExport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq");
        for (name, _) in &self.curves {
            let _ = write!(out, ",{name}");
        }
        out.push('\n');
        let Some((_, first)) = self.curves.first() else {
            return out;
        };
        for (i, f) in first.freq.iter().enumerate() {
            let _ = write!(out, "{f:.9}");
            for (_, c) in &self.curves {
                let _ = write!(out, ",{:.6}", c.power_db[i]);
            }
            out.push('\n');
        }
        out
    }

    /// Plot of `|f| <= span` subcarrier spacings.
    pub fn to_svg(&self, span: f64) -> String {
        let mut plot = LinePlot::new("Power spectral density", "frequency (subcarrier spacings)", "PSD (dB)")
            .with_y_range(-160.0, 0.0);
        for (name, c) in &self.curves {
            let pts = c
                .freq
                .iter()
                .zip(&c.power_db)
                .filter(|(f, _)| f.abs() <= span)
                .map(|(f, p)| (*f, *p))
                .collect();
            plot = plot.with_series(Series::new(name.clone(), pts));
        }
        plot.render()
    }
}

#[derive(Debug, Clone)]
pub struct PsdSpec {
    pub config: FbmcConfig,
    pub filters: Vec<PrototypeFilter>,
    pub nfft: usize,
    pub span: f64,
    pub output_dir: Option<PathBuf>,
}

impl PsdSpec {
    /// `nfft` defaults to `64·N`.
    pub fn from_kv(kv: &KvFile, base: &Path) -> Result<Self> {
        reject_unknown(kv, &["m", "l", "k", "filters", "nfft", "span", "output_dir"])?;
        let config = config_from_kv(kv)?;
        Ok(Self {
            filters: filter_list(kv, base, &config)?,
            nfft: kv.get_or("nfft", 64 * config.fft_size())?,
            span: kv.get_or("span", 16.0)?,
            output_dir: kv.raw("output_dir").map(|d| base.join(d)),
            config,
        })
    }

    pub fn run(&self) -> Result<PsdExport> {
        export_psd(&self.filters, &self.config, self.nfft)
    }
}

/// Writes `name.csv` and `name.svg`.
pub fn persist_pair(dir: &Path, name: &str, csv: String, svg: String) -> Result<Vec<PathBuf>> {
    write_files(dir, &[(&format!("{name}.csv"), csv), (&format!("{name}.svg"), svg)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{builtin_filter, BuiltinFilter};

    fn ofdm_spec(m: usize) -> ExperimentSpec {
        let cfg = FbmcConfig::new(m, 1, 1).unwrap();
        let mut spec = ExperimentSpec::new(cfg, PrototypeFilter::rectangular(m).unwrap());
        spec.receiver = BerReceiver::MatchedFde;
        spec.symbols_per_frame = 10;
        spec
    }

    #[test]
    fn interior_window_count() {
        assert_eq!(interior_windows(24, 4).len(), 16);
        assert_eq!(interior_windows(9, 4).len(), 1);
        assert_eq!(interior_windows(8, 4).len(), 0);
    }

    #[test]
    fn noiseless_ofdm_loopback_is_error_free() {
        let mut spec = ofdm_spec(16);
        spec.snr_grid_db = vec![f64::INFINITY];
        spec.frames = 3;
        for rx in [BerReceiver::MatchedFde, BerReceiver::Mmse] {
            spec.receiver = rx;
            let r = run_ber(&spec).unwrap();
            assert_eq!(r[0].bit_errors, 0);
            assert_eq!(r[0].bits_total, 3 * 8 * 16 * 4);
        }
    }

    #[test]
    fn ber_is_deterministic_and_seed_sensitive() {
        let cfg = FbmcConfig::new(16, 4, 15).unwrap();
        let mut spec = ExperimentSpec::new(cfg, builtin_filter(BuiltinFilter::G30, &cfg));
        spec.snr_grid_db = vec![8.0, 12.0];
        spec.frames = 4;
        spec.channel = ChannelSpec::Fading(FadingProfile::eva());
        let a = ber_csv(&run_ber(&spec).unwrap());
        assert_eq!(a, ber_csv(&run_ber(&spec).unwrap()));
        spec.rng_seed = 2;
        assert_ne!(a, ber_csv(&run_ber(&spec).unwrap()));
    }

    #[test]
    fn validation() {
        let mut spec = ofdm_spec(16);
        spec.symbols_per_frame = 2;
        assert!(run_ber(&spec).is_err());
        spec.symbols_per_frame = 3;
        spec.frames = 0;
        assert!(run_ber(&spec).is_err());
        let kv = KvFile::parse("filter = G30\nsnr_db = 10, 20\nframes = 2\nchannel = epa\nmodulation = 64qam\nm = 16\n").unwrap();
        let s = ExperimentSpec::from_kv(&kv, Path::new(".")).unwrap();
        assert_eq!(s.snr_grid_db, vec![10.0, 20.0]);
        assert_eq!(s.channel.name(), "EPA");
        assert_eq!(s.modulation, QamOrder::Qam64);
        let bad = KvFile::parse("filter = G30\nsnr_db = 10\nframs = 2\n").unwrap();
        assert!(ExperimentSpec::from_kv(&bad, Path::new(".")).is_err());
        let bad = KvFile::parse("filter = nosuchfile\nsnr_db = 10\n").unwrap();
        assert!(ExperimentSpec::from_kv(&bad, Path::new(".")).is_err());
    }

    #[test]
    fn confidence_interval() {
        let r = BerResult::new(10.0, 100, 10_000);
        assert_eq!(r.ber, 0.01);
        assert!((r.confidence_halfwidth - 1.96 * (0.01f64 * 0.99 / 1e4).sqrt()).abs() < 1e-15);
        assert_eq!(BerResult::new(0.0, 0, 0).ber, 0.0);
    }

    #[test]
    fn sweep_and_psd_outputs() {
        let cfg = FbmcConfig::new(16, 4, 15).unwrap();
        let filters: Vec<_> = BuiltinFilter::ALL.iter().map(|b| builtin_filter(*b, &cfg)).collect();
        let sweep = run_sinr_sweep(&filters, &[ReceiverType::Mmse, ReceiverType::Matched], &[15.0, f64::INFINITY], &cfg).unwrap();
        assert_eq!(sweep.points.len(), 16);
        assert_eq!(sweep.to_csv().lines().count(), 17);
        assert!(sweep.get("G30", ReceiverType::Mmse, 15.0).is_some());
        assert_eq!(sweep.to_svg().matches("<polyline").count(), 8);
        let export = export_psd(&filters, &cfg, 1024).unwrap();
        assert_eq!(export.curves.len(), 5);
        let csv = export.to_csv();
        assert_eq!(csv.lines().count(), 1 + 1024);
        assert!(csv.starts_with("freq,G15,G30,G50,Ginf,OFDM\n"));
    }

    #[test]
    fn frame_streams_differ() {
        use rand::Rng;
        let a: u64 = frame_rng(1, 0, 0).random();
        let b: u64 = frame_rng(1, 0, 1).random();
        let c: u64 = frame_rng(1, 1, 0).random();
        assert!(a != b && a != c && b != c);
        assert_eq!(a, frame_rng(1, 0, 0).random::<u64>());
    }
}
