use freqbeam::correlation::{BeatModel, CurveKind, CurveSource, G2Curve};
use freqbeam::estimation::{
    fit_beating, normalize_histogram, raw_visibility, FitOptions, ModelGrid, NormalizedHistogram,
    SignalShape,
};
use freqbeam::fbs::FbsParams;
use freqbeam::montecarlo::{
    simulate_histogram, synthetic_histogram, CorrelationMode, ExperimentConfig,
};
use freqbeam::{Error, TWO_PI};

const LW: f64 = TWO_PI * 270e6;

fn noiseless(truth: &BeatModel, jitter: f64) -> NormalizedHistogram {
    let bin = 100e-12;
    let tau: Vec<f64> = (0..200).map(|i| (i as f64 - 99.5) * bin).collect();
    let grid = ModelGrid::new(&tau, bin, 10e-9, jitter);
    let p = [
        truth.amplitude,
        truth.linewidth,
        truth.detuning,
        truth.visibility,
        truth.offset,
        truth.background,
    ];
    let (sig, reference) = grid.evaluate(&p, SignalShape::cross(0.5));
    // Exact values standing in for a very long acquisition.
    let scale = 1e6;
    let ratio = 4.0;
    let err = |v: &[f64], k: f64| v.iter().map(|x| (x * k).max(1.0).sqrt() / k).collect::<Vec<_>>();
    let counts = |v: &[f64], k: f64| v.iter().map(|x| (x * k).round() as u64).collect::<Vec<_>>();
    NormalizedHistogram {
        errors: err(&sig, scale),
        fit_errors: err(&sig, scale),
        reference_errors: err(&reference, scale * ratio),
        reference_fit_errors: err(&reference, scale * ratio),
        in_sync_counts: counts(&sig, scale),
        normalization_counts: counts(&reference, scale * ratio),
        curve: G2Curve::new(tau, sig, CurveKind::CrossRb, CurveSource::Measured),
        reference,
        scale,
        scale_error: 0.0,
        tau_bin: bin,
        window_length: 10e-9,
        mode: CorrelationMode::Cross,
        window_ratio: ratio,
    }
}

#[test]
fn exact_model_recovered() {
    let truth = BeatModel {
        amplitude: 1.05,
        linewidth: LW,
        detuning: TWO_PI * 300e6,
        visibility: 0.95,
        offset: 7e-12,
        background: 0.01,
    };
    let data = noiseless(&truth, 0.0);
    let fit = fit_beating(&data, &FitOptions::default()).unwrap();
    let m = fit.model;
    for (got, want) in [
        (m.amplitude, truth.amplitude),
        (m.linewidth, truth.linewidth),
        (m.detuning, truth.detuning),
        (m.visibility, truth.visibility),
        (m.background, truth.background),
    ] {
        assert!(((got - want) / want).abs() < 1e-6, "{got} vs {want}: {fit:?}");
    }
    assert!((m.offset - truth.offset).abs() < 1e-6 * 1e-9);
    for w in fit.chi2_history.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn exact_model_with_jitter_convolution() {
    let truth = BeatModel {
        amplitude: 1.0,
        linewidth: LW,
        detuning: TWO_PI * 600e6,
        visibility: 0.9,
        offset: 0.0,
        background: 0.02,
    };
    let data = noiseless(&truth, 40e-12);
    let opts = FitOptions {
        jitter_sigma: 40e-12,
        ..FitOptions::default()
    };
    let fit = fit_beating(&data, &opts).unwrap();
    assert!((fit.model.visibility - 0.9).abs() < 1e-6, "{fit:?}");
    assert!(fit.flags.iter().any(|f| f == "model_convolved_with_jitter"));
}

#[test]
fn zero_detuning_is_flagged() {
    let truth = BeatModel {
        amplitude: 1.0,
        linewidth: LW,
        detuning: 0.0,
        visibility: 0.92,
        offset: 0.0,
        background: 0.01,
    };
    let fit = fit_beating(&noiseless(&truth, 0.0), &FitOptions::default()).unwrap();
    assert!(fit.flags.iter().any(|f| f == "detuning_unresolved_fixed_zero"));
    assert_eq!(fit.model.detuning, 0.0);
    assert!(fit.estimate("detuning").unwrap().sigma.is_nan());
    assert!((fit.model.visibility - 0.92).abs() < 1e-6);
}

#[test]
fn too_few_bins_rejected() {
    let cfg = ExperimentConfig {
        tau_range: 2e-9,
        ..ExperimentConfig::default()
    };
    let h = synthetic_histogram(&cfg, CorrelationMode::Cross, 1).unwrap();
    let data = normalize_histogram(&h).unwrap();
    assert!(fit_beating(&data, &FitOptions::default()).is_err());
}

#[test]
fn empty_normalization_is_an_error() {
    let cfg = ExperimentConfig::default();
    let mut h = synthetic_histogram(&cfg, CorrelationMode::Cross, 1).unwrap();
    h.normalization.iter_mut().for_each(|c| *c = 0);
    assert!(matches!(normalize_histogram(&h), Err(Error::Normalization(_))));
}

#[test]
fn raw_visibility_edge_cases() {
    let mut cfg = ExperimentConfig {
        dark_rate_r: 0.0,
        dark_rate_b: 0.0,
        duration: 600.0,
        ..ExperimentConfig::default()
    };
    // Ideal null: no in-sync counts at τ ≈ 0.
    let h = simulate_histogram(&cfg, CorrelationMode::Cross).unwrap();
    let data = normalize_histogram(&h).unwrap();
    let raw = raw_visibility(&data, SignalShape::cross(0.5)).unwrap();
    assert_eq!(raw.on_counts, 0);
    assert_eq!(raw.alpha, 1.0);

    // No interference: on-counts are half the per-window off-counts.
    cfg.visibility = 0.0;
    cfg.duration = 3600.0 * 4.0;
    let h = simulate_histogram(&cfg, CorrelationMode::Cross).unwrap();
    let raw = raw_visibility(&normalize_histogram(&h).unwrap(), SignalShape::cross(0.5)).unwrap();
    assert!(raw.alpha.abs() < 3.0 * raw.sigma, "{raw:?}");

    let mut h = h;
    let mid = h.n_bins() / 2;
    h.normalization[mid] = 0;
    h.normalization[mid - 1] = 0;
    assert!(normalize_histogram(&h).is_err());
}

#[test]
fn pumps_off_normalizes_to_unit_peak_exponential() {
    let cfg = ExperimentConfig {
        fbs: FbsParams {
            strength: 0.0,
            ..ExperimentConfig::default().fbs
        },
        ..ExperimentConfig::default()
    };
    let h = simulate_histogram(&cfg, CorrelationMode::Cross).unwrap();
    let data = normalize_histogram(&h).unwrap();
    let [a, b] = data.central_bins();
    let peak = 0.5 * (data.reference[a] + data.reference[b]);
    assert!((peak - 1.0).abs() < 1e-12);
    // Strength 0 leaves every pair in the cross sector: shape (1, 0).
    let fit = fit_beating(
        &data,
        &FitOptions {
            shape: Some(SignalShape::cross(0.0)),
            jitter_sigma: cfg.jitter_sigma,
            ..FitOptions::default()
        },
    )
    .unwrap();
    assert!(
        (0.5..=1.5).contains(&fit.reduced_chi2),
        "chi2/dof {}",
        fit.reduced_chi2
    );
    assert!(fit.flags.iter().any(|f| f == "no_interference_term"));
    let lw = fit.estimate("linewidth").unwrap();
    assert!((lw.value - LW).abs() < 3.0 * lw.sigma, "{lw:?}");
}

#[test]
fn simulated_table_row_recovers_visibility() {
    let mut cfg = ExperimentConfig {
        visibility: 0.95,
        ..ExperimentConfig::default()
    };
    cfg.set_detuning(TWO_PI * 300e6);
    let h = simulate_histogram(&cfg, CorrelationMode::Cross).unwrap();
    let data = normalize_histogram(&h).unwrap();
    let fit = fit_beating(
        &data,
        &FitOptions {
            jitter_sigma: cfg.jitter_sigma,
            ..FitOptions::default()
        },
    )
    .unwrap();
    let a = fit.visibility();
    assert!((a.value - 0.95).abs() < 2.0 * a.sigma.max(0.01));
    assert!(a.sigma > 0.01 && a.sigma < 0.08, "{a:?}");
    let det = fit.estimate("detuning").unwrap();
    assert!((det.value - TWO_PI * 300e6).abs() < 3.0 * det.sigma, "{det:?}");
}
