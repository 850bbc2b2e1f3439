//! Multipath channels, their convolution matrices, and AWGN.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::kv::strip_comment;
use crate::{CMatrix, Complex, Error, Result};

/// Lower-triangular banded Toeplitz matrix of size `size × size` whose
/// column `c` is the tap vector shifted down by `c` (linear convolution,
/// samples shifted past the bottom are dropped).
pub fn build_channel_matrix(taps: &[Complex], size: usize) -> Result<CMatrix> {
    if taps.is_empty() || taps.len() > size {
        return Err(Error::Dimension(format!(
            "channel has {} taps, matrix size is {size}",
            taps.len()
        )));
    }
    let mut h = CMatrix::zeros(size, size);
    for c in 0..size {
        for (t, tap) in taps.iter().enumerate().take(size - c) {
            h[(c + t, c)] = *tap;
        }
    }
    Ok(h)
}

/// Linear convolution of `x` with `taps`, truncated to `x.len()` samples.
pub fn convolve_truncated(taps: &[Complex], x: &[Complex]) -> Vec<Complex> {
    let mut y = vec![Complex::new(0.0, 0.0); x.len()];
    for (i, out) in y.iter_mut().enumerate() {
        for (t, tap) in taps.iter().enumerate().take(i + 1) {
            *out += tap * x[i - t];
        }
    }
    y
}

/// One block-fading channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: Vec<Complex>,
    label: String,
}

impl ChannelRealization {
    pub fn new(taps: Vec<Complex>, label: impl Into<String>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Dimension("channel needs at least one tap".into()));
        }
        Ok(Self {
            taps,
            label: label.into(),
        })
    }

    /// The distortion-free channel `h = [1]`.
    pub fn identity() -> Self {
        Self {
            taps: vec![Complex::new(1.0, 0.0)],
            label: "AWGN".into(),
        }
    }

    pub fn taps(&self) -> &[Complex] {
        &self.taps
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_identity(&self) -> bool {
        self.taps.len() == 1 && self.taps[0] == Complex::new(1.0, 0.0)
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }

    /// Convolution matrix `H` of the given size (`N+M` for the stacked model).
    pub fn matrix(&self, size: usize) -> Result<CMatrix> {
        build_channel_matrix(&self.taps, size)
    }

    /// Passes a sample stream through the channel (truncated to its length).
    pub fn apply(&self, x: &[Complex]) -> Vec<Complex> {
        convolve_truncated(&self.taps, x)
    }
}

/// A tapped-delay-line power-delay profile.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingProfile {
    name: String,
    delays_s: Vec<f64>,
    powers_db: Vec<f64>,
}

const EPA_TEXT: &str = include_str!("../profiles/epa.txt");
const EVA_TEXT: &str = include_str!("../profiles/eva.txt");

impl FadingProfile {
    pub fn new(name: impl Into<String>, delays_s: Vec<f64>, powers_db: Vec<f64>) -> Result<Self> {
        if delays_s.is_empty() || delays_s.len() != powers_db.len() {
            return Err(Error::Config("profile needs matching, non-empty delay and power lists".into()));
        }
        if delays_s[0] < 0.0 || delays_s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("tap delays must be nonnegative and strictly increasing".into()));
        }
        if powers_db.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("tap powers must be finite".into()));
        }
        Ok(Self {
            name: name.into(),
            delays_s,
            powers_db,
        })
    }

    /// Parses `delay_ns power_db` lines.
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let mut delays = Vec::new();
        let mut powers = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse { line: idx + 1, message };
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|f| f.parse::<f64>().map_err(|e| bad(format!("`{f}`: {e}"))))
                .collect::<Result<_>>()?;
            let [delay_ns, power_db] = fields[..] else {
                return Err(bad(format!("expected `delay_ns power_db`, found `{line}`")));
            };
            delays.push(delay_ns * 1e-9);
            powers.push(power_db);
        }
        Self::new(name, delays, powers)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "profile".into());
        Self::parse(&text, &name)
    }

    pub fn epa() -> Self {
        Self::parse(EPA_TEXT, "EPA").expect("bundled profile parses")
    }

    pub fn eva() -> Self {
        Self::parse(EVA_TEXT, "EVA").expect("bundled profile parses")
    }

    /// `epa`, `eva`, or a path to a profile file.
    pub fn resolve(spec: &str) -> Result<Self> {
        match spec.to_ascii_lowercase().as_str() {
            "epa" => Ok(Self::epa()),
            "eva" => Ok(Self::eva()),
            _ => Self::load(spec),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn delays_s(&self) -> &[f64] {
        &self.delays_s
    }

    pub fn powers_db(&self) -> &[f64] {
        &self.powers_db
    }

    /// Tap powers in linear scale, normalized to unit sum.
    pub fn normalized_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.powers_db.iter().map(|p| 10f64.powf(p / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / total).collect()
    }

    /// Each tap rounded to the nearest sample period.
    pub fn quantized_delays(&self, sample_rate: f64) -> Vec<usize> {
        self.delays_s
            .iter()
            .map(|d| (d * sample_rate).round() as usize)
            .collect()
    }

    /// Number of taps `L_c` after quantization at `sample_rate`.
    pub fn num_taps(&self, sample_rate: f64) -> usize {
        self.quantized_delays(sample_rate).into_iter().max().unwrap_or(0) + 1
    }
}

/// Circular complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re * s, im * s)
}

/// Draws a Rayleigh block-fading realization. Every profile tap gets an
/// independent `CN(0, p_i)` gain with the powers normalized to unit sum;
/// taps that round to the same sample are summed.
pub fn draw_fading_realization<R: Rng + ?Sized>(
    profile: &FadingProfile,
    sample_rate: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::Config(format!("sample rate must be positive, got {sample_rate}")));
    }
    let delays = profile.quantized_delays(sample_rate);
    let mut taps = vec![Complex::new(0.0, 0.0); profile.num_taps(sample_rate)];
    for (d, p) in delays.into_iter().zip(profile.normalized_powers()) {
        taps[d] += complex_gaussian(rng, p);
    }
    ChannelRealization::new(taps, profile.name())
}

/// Adds i.i.d. `CN(0, σ_n²)` noise in place.
pub fn add_awgn_in_place<R: Rng + ?Sized>(x: &mut [Complex], noise_var: f64, rng: &mut R) {
    if noise_var == 0.0 {
        return;
    }
    for v in x.iter_mut() {
        *v += complex_gaussian(rng, noise_var);
    }
}

/// Returns `x` plus i.i.d. `CN(0, σ_n²)` noise.
pub fn add_awgn<R: Rng + ?Sized>(x: &[Complex], noise_var: f64, rng: &mut R) -> Result<Vec<Complex>> {
    if !(noise_var >= 0.0) {
        return Err(Error::Config(format!("noise variance must be nonnegative, got {noise_var}")));
    }
    let mut y = x.to_vec();
    add_awgn_in_place(&mut y, noise_var, rng);
    Ok(y)
}
