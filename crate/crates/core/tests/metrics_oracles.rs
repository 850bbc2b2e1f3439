use fbmc_core::channel::ChannelRealization;
use fbmc_core::filter::{builtin_filter, BuiltinFilter, PrototypeFilter};
use fbmc_core::metrics::{awgn_self_sinr, empirical_sinr, falloff_slope, psd, self_sinr, ReceiverType};
use fbmc_core::receivers::{effective_channel_for_taps, synthesize_matched};
use fbmc_core::sim::export_psd;
use fbmc_core::system::StackedModel;
use fbmc_core::{noise_variance_from_snr_db, to_db, FbmcConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn analytic_db(filter: &PrototypeFilter, cfg: &FbmcConfig, rx: ReceiverType, snr_db: f64) -> f64 {
    let model = StackedModel::new(filter, cfg).unwrap();
    to_db(awgn_self_sinr(model.prototype(), cfg, rx, noise_variance_from_snr_db(snr_db, 1.0)).unwrap())
}

#[test]
fn monte_carlo_matches_analytic_g30_mmse() {
    let cfg = FbmcConfig::standard();
    let f = builtin_filter(BuiltinFilter::G30, &cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // 49 frames · 16 windows · 128 subcarriers ≈ 1e5 symbols
    let measured = empirical_sinr(&f, &cfg, ReceiverType::Mmse, &ChannelRealization::identity(), 1e-3, 49, &mut rng).unwrap();
    let expect = analytic_db(&f, &cfg, ReceiverType::Mmse, 30.0);
    assert!((measured - expect).abs() < 0.3, "{measured} vs {expect}");
}

#[test]
fn monte_carlo_matches_analytic_when_noise_dominates() {
    let cfg = FbmcConfig::new(64, 4, 15).unwrap();
    let f = builtin_filter(BuiltinFilter::G15, &cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let measured = empirical_sinr(&f, &cfg, ReceiverType::Mmse, &ChannelRealization::identity(), 100.0, 100, &mut rng).unwrap();
    let expect = analytic_db(&f, &cfg, ReceiverType::Mmse, -20.0);
    assert!((measured - expect).abs() < 0.3, "{measured} vs {expect}");
}

#[test]
fn orthogonal_link_measures_the_snr() {
    let cfg = FbmcConfig::new(64, 1, 1).unwrap();
    let f = PrototypeFilter::rectangular(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let measured = empirical_sinr(&f, &cfg, ReceiverType::Matched, &ChannelRealization::identity(), 1e-3, 100, &mut rng).unwrap();
    assert!((measured - 30.0).abs() < 0.3, "{measured}");
}

#[test]
fn matched_self_sir_is_finite_for_published_filters() {
    let cfg = FbmcConfig::new(32, 4, 15).unwrap();
    for b in BuiltinFilter::ALL {
        let model = StackedModel::new(&builtin_filter(b, &cfg), &cfg).unwrap();
        let heff = effective_channel_for_taps(&model, &ChannelRealization::identity()).unwrap();
        let r = self_sinr(&synthesize_matched(&model), &heff, 0.0).unwrap();
        assert!(r.average_db().is_finite() && r.average_db() > 0.0, "{b}");
    }
}

#[test]
fn published_filters_beat_ofdm_out_of_band() {
    let cfg = FbmcConfig::standard();
    let filters: Vec<_> = BuiltinFilter::ALL.iter().map(|b| builtin_filter(*b, &cfg)).collect();
    let export = export_psd(&filters, &cfg, 16 * cfg.fft_size()).unwrap();
    let (_, ofdm) = export.curves.last().unwrap();
    for (name, c) in &export.curves[..4] {
        assert!(c.max_beyond(5.0) < ofdm.max_beyond(5.0) - 30.0, "{name}");
        let at10 = |p: &fbmc_core::metrics::Psd| p.max_beyond(10.0);
        assert!(at10(c) < at10(ofdm), "{name}");
    }
    // main lobes practically coincide
    let first = &export.curves[0].1;
    for (_, c) in &export.curves[1..4] {
        for i in 0..c.len() {
            if c.freq[i].abs() <= 0.75 {
                assert!((c.power_db[i] - first.power_db[i]).abs() < 3.0);
            }
        }
    }
}

#[test]
fn falloff_separates_ofdm_from_published_filters_near_the_main_lobe() {
    let cfg = FbmcConfig::standard();
    let nfft = 64 * cfg.fft_size();
    let rect = psd(&vec![fbmc_core::Complex::new(1.0, 0.0); 128], 128, nfft).unwrap();
    let ofdm = falloff_slope(&rect, 3.75, 7.5).unwrap();
    for b in BuiltinFilter::ALL {
        let p = psd(builtin_filter(b, &cfg).time_samples(), 128, nfft).unwrap();
        assert!(falloff_slope(&p, 3.75, 7.5).unwrap() < ofdm - 4.0, "{b}");
    }
}
