use fbmc_core::channel::FadingProfile;
use fbmc_core::filter::{builtin_filter, BuiltinFilter, PrototypeFilter};
use fbmc_core::qam::QamOrder;
use fbmc_core::sim::{ber_csv, persist_ber, run_ber, BerReceiver, ChannelSpec, ExperimentSpec};
use fbmc_core::FbmcConfig;

#[test]
fn noiseless_g30_mmse_is_practically_error_free() {
    let cfg = FbmcConfig::standard();
    let mut spec = ExperimentSpec::new(cfg, builtin_filter(BuiltinFilter::G30, &cfg));
    spec.snr_grid_db = vec![f64::INFINITY];
    spec.symbols_per_frame = 2 * 4 + 100;
    spec.frames = 20;
    let r = run_ber(&spec).unwrap();
    assert!(r[0].bits_total >= 1_000_000);
    assert!(r[0].ber <= 1e-5, "{}", r[0].ber);
}

#[test]
fn ber_falls_with_snr() {
    let cfg = FbmcConfig::new(32, 4, 15).unwrap();
    let mut spec = ExperimentSpec::new(cfg, builtin_filter(BuiltinFilter::G15, &cfg));
    spec.snr_grid_db = vec![0.0, 5.0, 10.0, 15.0];
    spec.frames = 40;
    let r = run_ber(&spec).unwrap();
    for w in r.windows(2) {
        let se = w[0].standard_error().hypot(w[1].standard_error());
        assert!(w[1].ber <= w[0].ber + 3.0 * se);
    }
    assert!(r[3].ber < r[0].ber);
}

#[test]
fn mmse_never_loses_to_matched_on_fading() {
    let cfg = FbmcConfig::new(32, 4, 15).unwrap().with_subcarrier_spacing(15e3 * 4.0).unwrap();
    for b in [BuiltinFilter::G15, BuiltinFilter::Ginf] {
        let mut results = Vec::new();
        for rx in [BerReceiver::Mmse, BerReceiver::MatchedFde] {
            let mut spec = ExperimentSpec::new(cfg, builtin_filter(b, &cfg));
            spec.receiver = rx;
            spec.channel = ChannelSpec::Fading(FadingProfile::eva());
            spec.snr_grid_db = vec![10.0, 20.0];
            spec.frames = 60;
            results.push(run_ber(&spec).unwrap());
        }
        for (a, m) in results[0].iter().zip(&results[1]) {
            let se = a.standard_error().hypot(m.standard_error());
            assert!(a.ber <= m.ber + 3.0 * se, "{b} {} dB: {} vs {}", a.snr_db, a.ber, m.ber);
        }
    }
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = FbmcConfig::new(16, 1, 1).unwrap();
    let mut spec = ExperimentSpec::new(cfg, PrototypeFilter::rectangular(16).unwrap());
    spec.modulation = QamOrder::Qam64;
    spec.snr_grid_db = vec![10.0, 20.0];
    spec.frames = 5;
    spec.output_dir = Some(dir.path().join("out"));
    let first = run_ber(&spec).unwrap();
    let paths = persist_ber(&spec, &first).unwrap();
    assert_eq!(paths.len(), 2);
    let csv = std::fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(csv, ber_csv(&run_ber(&spec).unwrap()));
    assert!(csv.starts_with("snr_db,bit_errors,bits_total,ber,ci95_halfwidth\n"));
    assert!(std::fs::read_to_string(&paths[1]).unwrap().starts_with("<svg"));
}
