//! Plain-Rust side of the demo; the exported wrappers only convert errors.

use fbmc_core::filter::{builtin_filter, BuiltinFilter, PrototypeFilter};
use fbmc_core::metrics::{awgn_self_sinr, constraint_values, psd, time_dispersion, ReceiverType};
use fbmc_core::optimizer::{DesignProblem, Tolerances};
use fbmc_core::system::StackedModel;
use fbmc_core::{noise_variance_from_snr_db, to_db, Complex, FbmcConfig};

pub type DemoResult<T> = Result<T, String>;

fn config(m: usize, l: usize) -> DemoResult<FbmcConfig> {
    FbmcConfig::new(m, l, 1).map_err(|e| e.to_string())
}

/// A built-in name, `ofdm`, or real coefficients separated by commas or
/// spaces. `ofdm` is a rectangle one symbol (`M` samples) long.
pub fn parse_filter(text: &str, cfg: &FbmcConfig) -> DemoResult<PrototypeFilter> {
    let text = text.trim();
    if let Ok(b) = text.parse::<BuiltinFilter>() {
        return Ok(builtin_filter(b, cfg));
    }
    if text.eq_ignore_ascii_case("ofdm") || text.eq_ignore_ascii_case("rect") {
        return PrototypeFilter::rectangular(cfg.fft_size()).map_err(|e| e.to_string());
    }
    let coeffs = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect::<DemoResult<Vec<f64>>>()?;
    if coeffs.is_empty() {
        return Err("enter a filter name or at least one coefficient".into());
    }
    PrototypeFilter::from_real(&coeffs, cfg.fft_size(), "custom").map_err(|e| e.to_string())
}

fn interleave(points: impl Iterator<Item = (f64, f64)>) -> Vec<f64> {
    points.flat_map(|(x, y)| [x, y]).collect()
}

fn pulse_for_psd(filter: &PrototypeFilter, text: &str, m: usize) -> Vec<Complex> {
    if text.trim().eq_ignore_ascii_case("ofdm") {
        vec![Complex::new(1.0, 0.0); m]
    } else {
        filter.time_samples().to_vec()
    }
}

/// `[f0, p0, f1, p1, …]` for `|f| <= span` subcarrier spacings.
pub fn psd_points(filter: &str, m: usize, l: usize, span: f64) -> DemoResult<Vec<f64>> {
    let cfg = config(m, l)?;
    let f = parse_filter(filter, &cfg)?;
    let spectrum = psd(&pulse_for_psd(&f, filter, m), m, 16 * cfg.fft_size()).map_err(|e| e.to_string())?;
    Ok(interleave(
        spectrum
            .freq
            .iter()
            .zip(&spectrum.power_db)
            .filter(|(x, _)| x.abs() <= span)
            .map(|(x, y)| (*x, *y)),
    ))
}

/// `[snr0, sinr0, snr1, sinr1, …]` over `lo..=hi` in `step` dB.
pub fn sinr_points(filter: &str, receiver: &str, m: usize, l: usize, lo: f64, hi: f64, step: f64) -> DemoResult<Vec<f64>> {
    if !(step > 0.0 && hi >= lo) {
        return Err("need lo <= hi and a positive step".into());
    }
    let cfg = config(m, l)?;
    let rx: ReceiverType = receiver.parse().map_err(|e: fbmc_core::Error| e.to_string())?;
    let f = parse_filter(filter, &cfg)?;
    let model = StackedModel::new(&f, &cfg).map_err(|e| e.to_string())?;
    let count = ((hi - lo) / step).floor() as usize + 1;
    (0..count)
        .map(|i| {
            let snr = lo + i as f64 * step;
            let v = awgn_self_sinr(model.prototype(), &cfg, rx, noise_variance_from_snr_db(snr, 1.0))
                .map_err(|e| e.to_string())?;
            Ok((snr, to_db(v)))
        })
        .collect::<DemoResult<Vec<_>>>()
        .map(|p| interleave(p.into_iter()))
}

/// Everything the filter explorer panel shows.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSummary {
    pub time: Vec<f64>,
    pub sigma_t: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub feasible: bool,
    pub noiseless_sinr_db: f64,
    pub matched_sir_db: f64,
}

pub fn summarize(filter: &str, m: usize, l: usize) -> DemoResult<FilterSummary> {
    let f = parse_filter(filter, &config(m, l)?)?;
    let cfg = FbmcConfig::new(m, l, f.num_taps()).map_err(|e| e.to_string())?;
    let c = constraint_values(f.coeffs());
    let model = StackedModel::new(&f, &cfg).map_err(|e| e.to_string())?;
    let sinr = |rx| awgn_self_sinr(model.prototype(), &cfg, rx, 0.0).map(to_db).map_err(|e| e.to_string());
    let problem = DesignProblem::new(cfg, f64::INFINITY)
        .and_then(|p| p.with_tolerances(Tolerances::default()))
        .map_err(|e| e.to_string())?;
    Ok(FilterSummary {
        time: f.time_samples().iter().map(|s| s.re).collect(),
        sigma_t: time_dispersion(f.time_samples()).map_err(|e| e.to_string())?,
        c0: c.c0,
        c1: c.c1,
        c2: c.c2,
        feasible: problem.is_feasible(f.coeffs()),
        noiseless_sinr_db: sinr(ReceiverType::Mmse)?,
        matched_sir_db: sinr(ReceiverType::Matched)?,
    })
}
