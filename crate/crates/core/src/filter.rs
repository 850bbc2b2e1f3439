//! Prototype filters parameterized by one-sided frequency coefficients.
//!
//! A prototype is described by `K` coefficients `q_0 … q_{K-1}`; the negative
//! half of the spectrum is implied by conjugate symmetry `q_{-k} = q_k*` and is
//! never stored. The length-`N` time filter is
//!
//! ```text
//! p0[n] = q_0 + 2 Σ_{k=1}^{K-1} Re(q_k · e^{j2πkn/N}),   n = 0 … N-1
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::kv::strip_comment;
use crate::{Complex, Error, FbmcConfig, Result};

/// Synthesizes the `N`-sample time-domain prototype from one-sided
/// coefficients.
pub fn synthesize_time_filter(coeffs: &[Complex], n: usize) -> Result<Vec<Complex>> {
    if coeffs.is_empty() || n == 0 {
        return Err(Error::Dimension("need K >= 1 and N >= 1".into()));
    }
    if coeffs.len() > n {
        return Err(Error::Dimension(format!("K={} exceeds N={n}", coeffs.len())));
    }
    let q0 = coeffs[0];
    Ok((0..n)
        .map(|i| {
            let tail: f64 = coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, q)| {
                    // reduce k·n mod N first to keep the phase argument small
                    let phase = 2.0 * PI * ((k * i) % n) as f64 / n as f64;
                    (q * Complex::from_polar(1.0, phase)).re
                })
                .sum();
            q0 + 2.0 * tail
        })
        .collect())
}

/// Frequency coefficients plus the time filter synthesized from them.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeFilter {
    coeffs: Vec<Complex>,
    time_samples: Vec<Complex>,
    label: String,
}

impl PrototypeFilter {
    pub fn new(coeffs: Vec<Complex>, fft_size: usize, label: impl Into<String>) -> Result<Self> {
        let time_samples = synthesize_time_filter(&coeffs, fft_size)?;
        Ok(Self {
            coeffs,
            time_samples,
            label: label.into(),
        })
    }

    pub fn from_real(coeffs: &[f64], fft_size: usize, label: impl Into<String>) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, 0.0)).collect(), fft_size, label)
    }

    /// The flat filter `q = [1]`, i.e. a rectangular pulse of `fft_size`
    /// samples. With `L = 1` this is plain CP-free OFDM.
    pub fn rectangular(fft_size: usize) -> Result<Self> {
        Self::from_real(&[1.0], fft_size, "rect")
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn time_samples(&self) -> &[Complex] {
        &self.time_samples
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn num_taps(&self) -> usize {
        self.coeffs.len()
    }

    pub fn fft_size(&self) -> usize {
        self.time_samples.len()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|q| q.im == 0.0)
    }

    /// Same coefficients, resynthesized for another spectrum size.
    pub fn resized(&self, fft_size: usize) -> Result<Self> {
        Self::new(self.coeffs.clone(), fft_size, self.label.clone())
    }

    pub fn energy(&self) -> f64 {
        self.time_samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Time samples scaled to unit energy, the normalization the stacked model
    /// uses so that `σ_d²/σ_n²` is the per-sample SNR.
    pub fn unit_energy_samples(&self) -> Result<Vec<Complex>> {
        normalize_energy(&self.time_samples)
    }
}

pub(crate) fn normalize_energy(samples: &[Complex]) -> Result<Vec<Complex>> {
    let energy: f64 = samples.iter().map(|s| s.norm_sqr()).sum();
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::ZeroFilter);
    }
    let scale = energy.sqrt().recip();
    Ok(samples.iter().map(|s| s * scale).collect())
}

/// The four published prototype filters (K = 15, L = 4, real coefficients),
/// each designed for the MMSE receiver at the target SNR in its name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinFilter {
    G15,
    G30,
    G50,
    Ginf,
}

const G15_COEFFS: [f64; 15] = [
    1.0000, -0.8660, 0.6662, -0.3932, 0.0066, 0.2122, -0.2680, 0.1702, -0.0050, -0.1571, 0.1871,
    -0.0910, 0.0091, 0.1623, -0.1315,
];
const G30_COEFFS: [f64; 15] = [
    1.0000, -0.9591, 0.7533, -0.3915, 0.0844, 0.2388, -0.4369, 0.2274, -0.0648, -0.0774, 0.2961,
    -0.2442, 0.1152, -0.0077, -0.0317,
];
const G50_COEFFS: [f64; 15] = [
    1.0000, -0.9988, 0.7628, -0.3597, 0.1029, 0.1849, -0.3509, 0.2325, -0.1383, -0.0504, 0.3059,
    -0.2552, 0.1836, -0.2207, 0.1033,
];
const GINF_COEFFS: [f64; 15] = [
    1.0000, -0.9655, 0.7616, -0.4422, 0.1859, 0.0610, -0.1987, 0.1965, -0.1652, -0.0025, 0.1745,
    -0.1267, 0.1106, -0.1760, 0.0889,
];

impl BuiltinFilter {
    pub const ALL: [BuiltinFilter; 4] = [Self::G15, Self::G30, Self::G50, Self::Ginf];

    pub fn name(self) -> &'static str {
        match self {
            Self::G15 => "G15",
            Self::G30 => "G30",
            Self::G50 => "G50",
            Self::Ginf => "Ginf",
        }
    }

    /// Coefficients exactly as published (4 decimals).
    pub fn coeffs(self) -> &'static [f64; 15] {
        match self {
            Self::G15 => &G15_COEFFS,
            Self::G30 => &G30_COEFFS,
            Self::G50 => &G50_COEFFS,
            Self::Ginf => &GINF_COEFFS,
        }
    }

    /// SNR the filter was designed for, `+∞` for Ginf.
    pub fn target_snr_db(self) -> f64 {
        match self {
            Self::G15 => 15.0,
            Self::G30 => 30.0,
            Self::G50 => 50.0,
            Self::Ginf => f64::INFINITY,
        }
    }
}

impl fmt::Display for BuiltinFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().trim_start_matches("type").trim() {
            "g15" => Ok(Self::G15),
            "g30" => Ok(Self::G30),
            "g50" => Ok(Self::G50),
            "ginf" => Ok(Self::Ginf),
            _ => Err(Error::Config(format!("unknown built-in filter `{s}`"))),
        }
    }
}

/// Returns a built-in filter synthesized for `config`'s spectrum size.
pub fn builtin_filter(which: BuiltinFilter, config: &FbmcConfig) -> PrototypeFilter {
    PrototypeFilter::from_real(which.coeffs(), config.fft_size(), which.name())
        .expect("15 taps fit any N >= 15")
}

/// Parses a coefficient file: one `re im` pair per line, `#` comments.
pub fn parse_filter_coeffs(text: &str, fft_size: usize, label: &str) -> Result<PrototypeFilter> {
    let mut coeffs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(bad(format!("expected `re im`, found `{line}`")));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("`{s}` is not a finite number")))
        };
        coeffs.push(Complex::new(parse(fields[0])?, parse(fields[1])?));
    }
    if coeffs.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: "no coefficients found".into(),
        });
    }
    PrototypeFilter::new(coeffs, fft_size, label)
}

/// Loads a user-supplied coefficient file (see [`parse_filter_coeffs`]).
pub fn load_filter_coeffs(path: impl AsRef<Path>, fft_size: usize) -> Result<PrototypeFilter> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "file".into());
    parse_filter_coeffs(&text, fft_size, &label)
}

/// Renders coefficients in the coefficient-file format.
pub fn format_filter_coeffs(filter: &PrototypeFilter) -> String {
    let mut out = format!("# {} (K = {})\n", filter.label(), filter.num_taps());
    for q in filter.coeffs() {
        out.push_str(&format!("{:.17e} {:.17e}\n", q.re, q.im));
    }
    out
}

/// Resolves a filter argument: a built-in name, `rect`, or a path to a
/// coefficient file.
pub fn resolve_filter(spec: &str, config: &FbmcConfig) -> Result<PrototypeFilter> {
    if let Ok(b) = spec.parse::<BuiltinFilter>() {
        return Ok(builtin_filter(b, config));
    }
    if spec.eq_ignore_ascii_case("rect") || spec.eq_ignore_ascii_case("ofdm") {
        return PrototypeFilter::rectangular(config.fft_size());
    }
    load_filter_coeffs(spec, config.fft_size())
}
