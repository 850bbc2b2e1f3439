//! Receiver filter synthesis and detection.
//!
//! A receiver is an `N × M` matrix `Q_f`; detection applies `Q_f^H` to a
//! receive window. The MMSE filter solves
//!
//! ```text
//! (H_eff H_eff^H + (σ_n²/σ_d²) I) Q_f = H_eff S^H
//! ```
//!
//! through a Cholesky factorization. Two structured shortcuts avoid forming
//! `H_eff H_eff^H` densely: for a known tap vector the Gram matrix is
//! assembled from the sparse `Ḡ_f Ḡ_f^H`, and for the AWGN channel the whole
//! system splits into `M` independent `L × L` solves whose solution is a
//! single modulated receive prototype.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Cholesky;
use rustfft::{Fft, FftPlanner};

use crate::channel::{convolve_truncated, ChannelRealization};
use crate::system::{block_offsets, StackedModel};
use crate::{CMatrix, CVector, Complex, Error, FbmcConfig, Result};

/// Largest condition estimate accepted before regularizing.
pub const MAX_CONDITION: f64 = 1e12;

/// `H_eff = T·H·Ḡ_f`, size `N × 2N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    heff: CMatrix,
    num_subcarriers: usize,
}

impl EffectiveChannel {
    pub fn matrix(&self) -> &CMatrix {
        &self.heff
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    /// N
    pub fn window_len(&self) -> usize {
        self.heff.nrows()
    }

    /// `H_eff · S^H`, the columns carrying the in-window block.
    pub fn desired_columns(&self) -> CMatrix {
        self.heff
            .columns(self.heff.nrows(), self.num_subcarriers)
            .into_owned()
    }

    /// `H_eff · d̄`.
    pub fn apply(&self, data: &CVector) -> CVector {
        &self.heff * data
    }
}

/// `T·H·Ḡ_f` for an arbitrary `(N+M) × (N+M)` channel matrix.
pub fn effective_channel(model: &StackedModel, h: &CMatrix) -> Result<EffectiveChannel> {
    let cfg = model.config();
    let (m, n) = (cfg.num_subcarriers(), cfg.fft_size());
    if h.shape() != (m + n, m + n) {
        return Err(Error::Dimension(format!(
            "channel matrix is {:?}, expected {}x{}",
            h.shape(),
            m + n,
            m + n
        )));
    }
    Ok(EffectiveChannel {
        heff: h.rows(m, n) * model.gbar(),
        num_subcarriers: m,
    })
}

/// `T·H·Ḡ_f` computed by convolving each column of `Ḡ_f` with the taps.
pub fn effective_channel_for_taps(model: &StackedModel, channel: &ChannelRealization) -> Result<EffectiveChannel> {
    let cfg = model.config();
    let (m, n) = (cfg.num_subcarriers(), cfg.fft_size());
    if channel.taps().len() > m + n {
        return Err(Error::Dimension(format!(
            "channel has {} taps, at most N+M={} supported",
            channel.taps().len(),
            m + n
        )));
    }
    let g = model.gbar();
    let mut heff = CMatrix::zeros(n, 2 * n);
    for c in 0..2 * n {
        let y = convolve_truncated(channel.taps(), g.column(c).as_slice());
        heff.column_mut(c).copy_from_slice(&y[m..]);
    }
    Ok(EffectiveChannel { heff, num_subcarriers: m })
}

/// How a receiver filter was synthesized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReceiverKind {
    Matched,
    Mmse { noise_var: f64, data_power: f64 },
}

impl ReceiverKind {
    pub fn name(&self) -> &'static str {
        match self {
            ReceiverKind::Matched => "matched",
            ReceiverKind::Mmse { .. } => "mmse",
        }
    }
}

/// An `N × M` receiver matrix `Q_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverFilter {
    qf: CMatrix,
    kind: ReceiverKind,
    ridge: f64,
}

impl ReceiverFilter {
    pub fn new(qf: CMatrix, kind: ReceiverKind) -> Self {
        Self { qf, kind, ridge: 0.0 }
    }

    /// Builds `Q_f[n, m] = w[n]·e^{j2πmn/M}` from a receive prototype `w`.
    pub fn from_prototype(w: &[Complex], num_subcarriers: usize, kind: ReceiverKind) -> Self {
        let m = num_subcarriers;
        let qf = CMatrix::from_fn(w.len(), m, |row, col| {
            let phase = 2.0 * PI * ((row * col) % m) as f64 / m as f64;
            w[row] * Complex::from_polar(1.0, phase)
        });
        Self::new(qf, kind)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.qf
    }

    pub fn kind(&self) -> ReceiverKind {
        self.kind
    }

    /// Diagonal loading that had to be added to keep the solve well
    /// conditioned (zero when none was needed).
    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn num_subcarriers(&self) -> usize {
        self.qf.ncols()
    }

    /// `Q_f^H · y`, soft estimates of the `M` in-window symbols.
    pub fn detect(&self, y: &[Complex]) -> Result<Vec<Complex>> {
        if y.len() != self.qf.nrows() {
            return Err(Error::Dimension(format!(
                "window has {} samples, filter expects {}",
                y.len(),
                self.qf.nrows()
            )));
        }
        let y = nalgebra::DVectorView::from_slice(y, y.len());
        Ok(self.qf.ad_mul(&y).as_slice().to_vec())
    }

    /// `Q_f^H · H_eff`, the `M × 2N` symbol-to-estimate map.
    pub fn response(&self, heff: &EffectiveChannel) -> Result<CMatrix> {
        if heff.window_len() != self.qf.nrows() {
            return Err(Error::Dimension("receiver and effective channel disagree on N".into()));
        }
        Ok(self.qf.ad_mul(heff.matrix()))
    }
}

/// See [`ReceiverFilter::detect`].
pub fn detect_window(filter: &ReceiverFilter, y: &[Complex]) -> Result<Vec<Complex>> {
    filter.detect(y)
}

/// `Q_f = T·G_f^(0)`.
pub fn synthesize_matched(model: &StackedModel) -> ReceiverFilter {
    let m = model.config().num_subcarriers();
    let block = model.block(0);
    ReceiverFilter::new(block.rows(m, model.config().fft_size()).into_owned(), ReceiverKind::Matched)
}

fn check_powers(noise_var: f64, data_power: f64) -> Result<()> {
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(Error::Config(format!("noise variance must be finite and >= 0, got {noise_var}")));
    }
    if !(data_power > 0.0 && data_power.is_finite()) {
        return Err(Error::Config(format!("data power must be positive, got {data_power}")));
    }
    Ok(())
}

/// MMSE filter for an arbitrary effective channel, forming `H_eff H_eff^H`
/// densely.
pub fn synthesize_mmse(heff: &EffectiveChannel, noise_var: f64, data_power: f64) -> Result<ReceiverFilter> {
    check_powers(noise_var, data_power)?;
    let gram = heff.matrix() * heff.matrix().adjoint();
    let (qf, ridge) = solve_regularized(gram, &heff.desired_columns(), noise_var / data_power)?;
    Ok(ReceiverFilter {
        qf,
        kind: ReceiverKind::Mmse { noise_var, data_power },
        ridge,
    })
}

/// MMSE filter for a stacked model behind a tap-delay channel. Equivalent to
/// [`synthesize_mmse`] on [`effective_channel_for_taps`] but assembles the
/// Gram matrix from the sparse structure of `Ḡ_f Ḡ_f^H`.
pub fn synthesize_mmse_for_channel(
    model: &StackedModel,
    channel: &ChannelRealization,
    noise_var: f64,
    data_power: f64,
) -> Result<ReceiverFilter> {
    check_powers(noise_var, data_power)?;
    let cfg = model.config();
    let (m, n) = (cfg.num_subcarriers(), cfg.fft_size());
    if channel.taps().len() > m + 1 {
        return Err(Error::Dimension(format!(
            "channel memory of {} taps exceeds M+1={}",
            channel.taps().len(),
            m + 1
        )));
    }
    let gram = structured_gram(model, channel.taps());
    let mut rhs = CMatrix::zeros(n, m);
    let g = model.gbar();
    for sub in 0..m {
        let y = convolve_truncated(channel.taps(), g.column(n + sub).as_slice());
        rhs.column_mut(sub).copy_from_slice(&y[m..]);
    }
    let (qf, ridge) = solve_regularized(gram, &rhs, noise_var / data_power)?;
    Ok(ReceiverFilter {
        qf,
        kind: ReceiverKind::Mmse { noise_var, data_power },
        ridge,
    })
}

/// `T·H·(Ḡ_f Ḡ_f^H)·H^H·T^H`. Entry `(a, b)` of `Ḡ_f Ḡ_f^H` is nonzero only
/// when `a ≡ b (mod M)`, where it equals `M · Σ_l p_l[a] p_l[b]*` with `p_l`
/// the prototype copy of block `l`.
fn structured_gram(model: &StackedModel, taps: &[Complex]) -> CMatrix {
    let cfg = model.config();
    let (m, n, ll) = (cfg.num_subcarriers(), cfg.fft_size(), cfg.overlap_factor());
    let rows = m + n;
    let p = model.prototype();
    // shifted[l][row] = p0[row - M - lM] when inside the support
    let shifted: Vec<Vec<Complex>> = block_offsets(ll)
        .map(|l| {
            (0..rows)
                .map(|r| {
                    let s = r as isize - m as isize - l * m as isize;
                    if (0..n as isize).contains(&s) {
                        p[s as usize]
                    } else {
                        Complex::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    let gg = |a: usize, b: usize| -> Complex {
        shifted.iter().map(|s| s[a] * s[b].conj()).sum::<Complex>() * m as f64
    };
    let mut gram = CMatrix::zeros(n, n);
    for i in 0..n {
        for (t, ht) in taps.iter().enumerate() {
            let Some(a) = (i + m).checked_sub(t) else { continue };
            // columns b of Ḡḡ^H in row a: same residue mod M
            let mut b = a % m;
            while b < rows {
                let v = ht * gg(a, b);
                if v != Complex::new(0.0, 0.0) {
                    for (u, hu) in taps.iter().enumerate() {
                        let j = b + u;
                        if j >= m && j < m + n {
                            gram[(i, j - m)] += v * hu.conj();
                        }
                    }
                }
                b += m;
            }
        }
    }
    gram
}

/// Receive prototype `w` of the AWGN MMSE filter: `Q_f[n, i] =
/// w[n]·e^{j2πin/M}`. Samples `r, r+M, …, r+(L-1)M` form an independent
/// `L × L` system for each residue `r`.
pub fn mmse_receive_prototype(prototype: &[Complex], config: &FbmcConfig, ratio: f64) -> Result<(Vec<Complex>, f64)> {
    let (m, n, ll) = (config.num_subcarriers(), config.fft_size(), config.overlap_factor());
    if prototype.len() != n {
        return Err(Error::Dimension(format!("prototype has {} samples, expected {n}", prototype.len())));
    }
    let mut w = vec![Complex::new(0.0, 0.0); n];
    let mut max_ridge = 0.0f64;
    let pick = |j: isize, l: isize, r: usize| -> Complex {
        let s = r as isize + (j - l) * m as isize;
        if (0..n as isize).contains(&s) {
            prototype[s as usize]
        } else {
            Complex::new(0.0, 0.0)
        }
    };
    for r in 0..m {
        let gram = CMatrix::from_fn(ll, ll, |j, k| {
            block_offsets(ll)
                .map(|l| pick(j as isize, l, r) * pick(k as isize, l, r).conj())
                .sum::<Complex>()
                * m as f64
        });
        let rhs = CMatrix::from_fn(ll, 1, |j, _| prototype[r + j * m]);
        let (sol, ridge) = solve_regularized(gram, &rhs, ratio)?;
        max_ridge = max_ridge.max(ridge);
        for j in 0..ll {
            w[r + j * m] = sol[(j, 0)];
        }
    }
    Ok((w, max_ridge))
}

/// AWGN MMSE filter via [`mmse_receive_prototype`].
pub fn synthesize_mmse_awgn(model: &StackedModel, noise_var: f64, data_power: f64) -> Result<ReceiverFilter> {
    check_powers(noise_var, data_power)?;
    let cfg = model.config();
    let (w, ridge) = mmse_receive_prototype(model.prototype(), cfg, noise_var / data_power)?;
    let mut f = ReceiverFilter::from_prototype(&w, cfg.num_subcarriers(), ReceiverKind::Mmse { noise_var, data_power });
    f.ridge = ridge;
    Ok(f)
}

/// Solves `(gram + ratio·I) X = rhs` by Cholesky. If the factorization fails
/// or its condition estimate exceeds [`MAX_CONDITION`], retries once with a
/// ridge of `1e-12 · trace/n`. Returns the solution and the ridge used.
pub fn solve_regularized(mut gram: CMatrix, rhs: &CMatrix, ratio: f64) -> Result<(CMatrix, f64)> {
    let n = gram.nrows();
    for i in 0..n {
        gram[(i, i)] += ratio;
    }
    if let Some(chol) = Cholesky::new(gram.clone()) {
        if condition_estimate(&chol) <= MAX_CONDITION {
            return Ok((chol.solve(rhs), 0.0));
        }
    }
    let trace: f64 = (0..n).map(|i| gram[(i, i)].re).sum();
    let ridge = 1e-12 * trace / n as f64;
    for i in 0..n {
        gram[(i, i)] += ridge;
    }
    match Cholesky::new(gram) {
        Some(chol) => {
            let condition = condition_estimate(&chol);
            if condition > MAX_CONDITION {
                Err(Error::Singular { condition })
            } else {
                Ok((chol.solve(rhs), ridge))
            }
        }
        None => Err(Error::Singular { condition: f64::INFINITY }),
    }
}

/// `(max L_ii / min L_ii)²`, a cheap lower bound on the 2-norm condition
/// number of a Cholesky-factored matrix.
fn condition_estimate(chol: &Cholesky<Complex, nalgebra::Dyn>) -> f64 {
    let l = chol.l_dirty();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..l.nrows() {
        let d = l[(i, i)].re.abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        (hi / lo).powi(2)
    }
}

/// Single-tap MMSE equalizer in the `N`-point frequency domain.
#[derive(Clone)]
pub struct FdeEqualizer {
    weights: Vec<Complex>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FdeEqualizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FdeEqualizer").field("len", &self.weights.len()).finish()
    }
}

impl FdeEqualizer {
    /// Per-bin weight `H_f[i]* / (|H_f[i]|² + σ_n²/σ_d²)`.
    pub fn new(taps: &[Complex], fft_size: usize, noise_var: f64, data_power: f64) -> Result<Self> {
        check_powers(noise_var, data_power)?;
        if taps.is_empty() || taps.len() > fft_size {
            return Err(Error::Dimension(format!("{} taps do not fit N={fft_size}", taps.len())));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(fft_size);
        let ifft = planner.plan_fft_inverse(fft_size);
        let mut hf = vec![Complex::new(0.0, 0.0); fft_size];
        hf[..taps.len()].copy_from_slice(taps);
        fft.process(&mut hf);
        let ratio = noise_var / data_power;
        let weights = hf
            .iter()
            .map(|h| {
                let denom = h.norm_sqr() + ratio;
                if denom == 0.0 {
                    Complex::new(0.0, 0.0)
                } else {
                    h.conj() / denom
                }
            })
            .collect();
        Ok(Self { weights, fft, ifft })
    }

    pub fn weights(&self) -> &[Complex] {
        &self.weights
    }

    pub fn equalize(&self, y: &[Complex]) -> Result<Vec<Complex>> {
        let n = self.weights.len();
        if y.len() != n {
            return Err(Error::Dimension(format!("window has {} samples, expected {n}", y.len())));
        }
        let mut buf = y.to_vec();
        self.fft.process(&mut buf);
        for (b, w) in buf.iter_mut().zip(&self.weights) {
            *b *= w;
        }
        self.ifft.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|b| *b *= scale);
        Ok(buf)
    }
}

/// Frequency-domain equalization of the window followed by matched
/// detection.
pub fn matched_with_fde(
    model: &StackedModel,
    taps: &[Complex],
    noise_var: f64,
    data_power: f64,
    y: &[Complex],
) -> Result<Vec<Complex>> {
    let eq = FdeEqualizer::new(taps, model.config().fft_size(), noise_var, data_power)?;
    synthesize_matched(model).detect(&eq.equalize(y)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::filter::{builtin_filter, BuiltinFilter, PrototypeFilter};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn small_model(filter: BuiltinFilter) -> StackedModel {
        let cfg = FbmcConfig::new(16, 4, 15).unwrap();
        StackedModel::new(&builtin_filter(filter, &cfg), &cfg).unwrap()
    }

    fn ofdm_model(m: usize) -> StackedModel {
        let cfg = FbmcConfig::new(m, 1, 1).unwrap();
        StackedModel::new(&PrototypeFilter::rectangular(m).unwrap(), &cfg).unwrap()
    }

    #[test]
    fn identity_and_scaled_channels() {
        let model = small_model(BuiltinFilter::G30);
        let cfg = model.config();
        let size = cfg.fft_size() + cfg.num_subcarriers();
        let eye = effective_channel(&model, &CMatrix::identity(size, size)).unwrap();
        let direct = model.slice_matrix() * model.gbar();
        assert!(max_abs(&(eye.matrix() - &direct)) < 1e-15);
        let alpha = Complex::new(0.3, -1.2);
        let scaled = effective_channel(&model, &(CMatrix::identity(size, size) * alpha)).unwrap();
        assert!(max_abs(&(scaled.matrix() - &direct * alpha)) < 1e-14);
        assert!(effective_channel(&model, &CMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn tap_route_matches_matrix_route() {
        let model = small_model(BuiltinFilter::G15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = ChannelRealization::new((0..2).map(|_| complex_gaussian(&mut rng, 0.5)).collect(), "x").unwrap();
        let size = model.config().fft_size() + model.config().num_subcarriers();
        let a = effective_channel(&model, &ch.matrix(size).unwrap()).unwrap();
        let b = effective_channel_for_taps(&model, &ch).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-13);
    }

    #[test]
    fn matched_filter_definition() {
        let model = small_model(BuiltinFilter::G30);
        let mf = synthesize_matched(&model);
        let (m, n) = (model.config().num_subcarriers(), model.config().fft_size());
        for sub in [0, 3, m - 1] {
            let col = crate::system::build_modulation_column(sub, 0, model.prototype(), model.config()).unwrap();
            assert_eq!(mf.matrix().column(sub).into_owned(), col.rows(m, n).into_owned());
        }
        // modulation preserves the per-column energy ‖p0‖² (= 1 after normalization)
        let gram = mf.matrix().ad_mul(mf.matrix());
        for i in 0..m {
            assert!((gram[(i, i)].re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ofdm_matched_is_orthogonal() {
        let model = ofdm_model(8);
        let heff = effective_channel_for_taps(&model, &ChannelRealization::identity()).unwrap();
        let resp = synthesize_matched(&model).response(&heff).unwrap();
        let desired = resp.columns(8, 8).into_owned();
        assert!(max_abs(&(desired - CMatrix::identity(8, 8))) < 1e-12);
        assert!(max_abs(&resp.columns(0, 8).into_owned()) < 1e-15);
    }

    #[test]
    fn mmse_with_unitary_rows_is_matched_direction() {
        // With L = 1 and a unit-energy rectangle, H_eff H_eff^H = I.
        let model = ofdm_model(8);
        let heff = effective_channel_for_taps(&model, &ChannelRealization::identity()).unwrap();
        let gram = heff.matrix() * heff.matrix().adjoint();
        assert!(max_abs(&(gram - CMatrix::identity(8, 8))) < 1e-12);
        let q = synthesize_mmse(&heff, 0.0, 1.0).unwrap();
        assert!(max_abs(&(q.matrix() - heff.desired_columns())) < 1e-12);
        assert_eq!(q.ridge(), 0.0);
    }

    #[test]
    fn mmse_large_noise_limit() {
        let model = small_model(BuiltinFilter::G30);
        let heff = effective_channel_for_taps(&model, &ChannelRealization::identity()).unwrap();
        let noise_var = 1e8;
        let q = synthesize_mmse(&heff, noise_var, 1.0).unwrap();
        let limit = heff.desired_columns() / Complex::new(noise_var, 0.0);
        let rel = max_abs(&(q.matrix() - &limit)) / max_abs(&limit);
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn normal_equation_residual() {
        let model = small_model(BuiltinFilter::G50);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = ChannelRealization::new((0..3).map(|_| complex_gaussian(&mut rng, 0.33)).collect(), "x").unwrap();
        let heff = effective_channel_for_taps(&model, &ch).unwrap();
        for noise_var in [0.0, 1e-3, 0.5] {
            let q = synthesize_mmse(&heff, noise_var, 1.0).unwrap();
            let n = heff.window_len();
            let lhs = (heff.matrix() * heff.matrix().adjoint() + CMatrix::identity(n, n) * Complex::new(noise_var, 0.0)) * q.matrix();
            let rhs = heff.desired_columns();
            assert!((lhs - &rhs).norm() < 1e-8 * rhs.norm());
        }
    }

    #[test]
    fn only_the_ratio_matters() {
        let model = small_model(BuiltinFilter::G15);
        let heff = effective_channel_for_taps(&model, &ChannelRealization::identity()).unwrap();
        let a = synthesize_mmse(&heff, 0.01, 1.0).unwrap();
        let b = synthesize_mmse(&heff, 0.04, 4.0).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-10 * max_abs(a.matrix()));
        assert!(synthesize_mmse(&heff, -1.0, 1.0).is_err());
        assert!(synthesize_mmse(&heff, 1.0, 0.0).is_err());
    }

    #[test]
    fn structured_routes_agree_with_dense() {
        let model = small_model(BuiltinFilter::Ginf);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for taps in [1usize, 2, 6] {
            let ch = if taps == 1 {
                ChannelRealization::identity()
            } else {
                ChannelRealization::new((0..taps).map(|_| complex_gaussian(&mut rng, 1.0 / taps as f64)).collect(), "x").unwrap()
            };
            let heff = effective_channel_for_taps(&model, &ch).unwrap();
            for noise_var in [0.0, 1e-2] {
                let dense = synthesize_mmse(&heff, noise_var, 1.0).unwrap();
                let fast = synthesize_mmse_for_channel(&model, &ch, noise_var, 1.0).unwrap();
                let scale = max_abs(dense.matrix());
                assert!(max_abs(&(dense.matrix() - fast.matrix())) < 1e-9 * scale, "taps={taps}");
                if taps == 1 {
                    let awgn = synthesize_mmse_awgn(&model, noise_var, 1.0).unwrap();
                    assert!(max_abs(&(dense.matrix() - awgn.matrix())) < 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn detection() {
        let model = small_model(BuiltinFilter::G30);
        let mf = synthesize_matched(&model);
        let n = model.config().fft_size();
        assert!(mf.detect(&vec![Complex::new(0.0, 0.0); n]).unwrap().iter().all(|v| v.norm() == 0.0));
        assert!(detect_window(&mf, &vec![Complex::new(0.0, 0.0); n - 1]).is_err());
    }

    #[test]
    fn ofdm_mmse_recovers_symbols() {
        let model = ofdm_model(16);
        let cfg = *model.config();
        let heff = effective_channel_for_taps(&model, &ChannelRealization::identity()).unwrap();
        let q = synthesize_mmse(&heff, 1e-9, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = CVector::from_iterator(2 * cfg.fft_size(), (0..32).map(|_| complex_gaussian(&mut rng, 1.0)));
        let y = heff.apply(&d);
        let est = q.detect(y.as_slice()).unwrap();
        for (e, want) in est.iter().zip(d.rows(16, 16).iter()) {
            assert!((e - want).norm() < 1e-6);
        }
    }

    #[test]
    fn fde_weights() {
        let one = [Complex::new(1.0, 0.0)];
        let eq = FdeEqualizer::new(&one, 8, 0.0, 1.0).unwrap();
        assert!(eq.weights().iter().all(|w| (w - Complex::new(1.0, 0.0)).norm() < 1e-15));
        let eq = FdeEqualizer::new(&one, 8, 1.0, 1.0).unwrap();
        assert!(eq.weights().iter().all(|w| (w - Complex::new(0.5, 0.0)).norm() < 1e-15));
        let y: Vec<Complex> = (0..8).map(|i| Complex::new(i as f64, 1.0)).collect();
        for (a, b) in eq.equalize(&y).unwrap().iter().zip(&y) {
            assert!((a - b * 0.5).norm() < 1e-12);
        }
    }

    #[test]
    fn fde_with_identity_channel_is_plain_matched() {
        let model = small_model(BuiltinFilter::G30);
        let n = model.config().fft_size();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let y: Vec<Complex> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let a = matched_with_fde(&model, &[Complex::new(1.0, 0.0)], 0.0, 1.0, &y).unwrap();
        let b = synthesize_matched(&model).detect(&y).unwrap();
        for (x, z) in a.iter().zip(&b) {
            assert!((x - z).norm() < 1e-12);
        }
    }

    #[test]
    fn fde_residual_shrinks_with_delay_spread() {
        // CP-free OFDM: the FDE assumes circular convolution, so the linear
        // channel leaves a residual proportional to the echo strength.
        let model = ofdm_model(32);
        let cfg = *model.config();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = CVector::from_iterator(2 * cfg.fft_size(), (0..64).map(|_| complex_gaussian(&mut rng, 1.0)));
        let want: Vec<Complex> = d.rows(32, 32).iter().copied().collect();
        let mut last = f64::INFINITY;
        for echo in [0.5, 0.1, 0.02] {
            let taps = vec![Complex::new(1.0, 0.0), Complex::new(echo, 0.0)];
            let ch = ChannelRealization::new(taps.clone(), "two").unwrap();
            let y = effective_channel_for_taps(&model, &ch).unwrap().apply(&d);
            let est = matched_with_fde(&model, &taps, 0.0, 1.0, y.as_slice()).unwrap();
            let err: f64 = est.iter().zip(&want).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 32.0;
            assert!(err < last, "{err} !< {last}");
            assert!(err > 0.0);
            last = err;
        }
        assert!(last < 1e-2);
    }
}
