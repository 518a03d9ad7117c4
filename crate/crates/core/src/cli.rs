//! Command-line front end. Every subcommand writes its artifacts plus a
//! `manifest.json` into `--out-dir`; all files carry the configuration hash.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::config::{render, KeyValues};
use crate::correlation::{
    convolve_jitter, default_tau_axis, g2_cross_analytic, g2_numeric, g2_pumps_off_analytic,
    tau_axis, CurveKind, CurveSource, G2Curve,
};
use crate::error::{Error, Result};
use crate::estimation::{
    fit_beating, normalize_histogram, FitOptions, FitResult, ModelGrid, NormalizedHistogram,
    SignalShape,
};
use crate::fbs::{apply_fbs_two_photon, FbsParams, Sector, TwoPhotonState};
use crate::io::{self, fmt_f64, Metadata};
use crate::manifest::{sha256_hex, RunManifest};
use crate::montecarlo::{
    histogram_from_events, simulate_autocorrelation, simulate_run, synthetic_histogram,
    with_threads, CorrelationHistogram, CorrelationMode, ExperimentConfig,
};
use crate::phasematch::{
    pump_separation_from_fsr, sideband_suppression, suppression_ratio, DispersionProfile,
    ProcessPlacement,
};
use crate::spectral::{apply_envelope_offset, build_ring_jsa, FrequencyGrid, ResonatorSpec};
use crate::TWO_PI;

#[derive(Debug, Parser)]
#[command(name = "freqbeam", version, about = "Frequency-domain two-photon interference toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` configuration file (SI units).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Physics overrides applied on top of the configuration file.
#[derive(Debug, Args, Default, Clone)]
pub struct Physics {
    /// Resonance linewidth Δω/2π, Hz.
    #[arg(long)]
    pub linewidth_hz: Option<f64>,
    /// Splitter detuning ΔΩ/2π, Hz.
    #[arg(long, allow_hyphen_values = true)]
    pub detuning_hz: Option<f64>,
    /// Splitter ideality α.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Splitter strength γPL.
    #[arg(long)]
    pub strength: Option<f64>,
    /// Integration time, s.
    #[arg(long)]
    pub duration_s: Option<f64>,
    /// Combined two-detector timing jitter (standard deviation), s.
    #[arg(long)]
    pub jitter_s: Option<f64>,
    /// Histogram bin width, s.
    #[arg(long)]
    pub tau_bin_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Cross,
    Auto,
}

impl From<ModeArg> for CorrelationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Cross => CorrelationMode::Cross,
            ModeArg::Auto => CorrelationMode::Auto,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase-matching report and recommended pump frequencies.
    Design(DesignArgs),
    /// Closed-form (and optionally numeric) G² curves.
    Analytic(AnalyticArgs),
    /// Monte Carlo coincidence acquisition.
    Simulate(SimulateArgs),
    /// Visibility fit of a stored histogram.
    Fit(FitArgs),
    /// Visibility table over standard detunings, rebuilt from event logs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Resonator free spectral range, Hz.
    #[arg(long)]
    pub fsr: Option<f64>,
    /// Resonance offset m of the photons from the source pump.
    #[arg(long)]
    pub m: Option<i32>,
    /// Offset D/2π of the photon and pump bands from the zero-dispersion point, Hz.
    #[arg(long, allow_hyphen_values = true)]
    pub band_offset: Option<f64>,
    /// Fiber length, m.
    #[arg(long)]
    pub length: Option<f64>,
    /// γP, 1/m. Defaults to a balanced splitter at the given length.
    #[arg(long)]
    pub gamma_power: Option<f64>,
    /// β₂ at the reference frequency, s²/m.
    #[arg(long, allow_hyphen_values = true)]
    pub beta2: Option<f64>,
    /// β₃ at the reference frequency, s³/m.
    #[arg(long, allow_hyphen_values = true)]
    pub beta3: Option<f64>,
    /// β₄ at the reference frequency, s⁴/m.
    #[arg(long, allow_hyphen_values = true)]
    pub beta4: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    /// Resonance linewidth Δω/2π, Hz; defaults to 270 MHz.
    #[arg(long)]
    pub linewidth_hz: Option<f64>,
    /// One curve per value; defaults to 0, 300 MHz, 600 MHz and 5 GHz.
    #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
    pub detuning_hz: Vec<f64>,
    /// Splitter ideality α; defaults to 1.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Combined timing jitter (standard deviation) to convolve with, s.
    #[arg(long)]
    pub jitter_s: Option<f64>,
    /// Half range of the delay axis, s.
    #[arg(long)]
    pub tau_range_s: Option<f64>,
    /// Delay step, s.
    #[arg(long)]
    pub tau_step_s: Option<f64>,
    /// Also propagate the ring JSA through the splitter numerically.
    #[arg(long)]
    pub numeric: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub physics: Physics,
    /// `cross` correlates the red and blue ports; `auto` splits the blue port.
    #[arg(long, value_enum, default_value = "cross")]
    pub mode: ModeArg,
    /// Poisson draws of the expected histogram instead of an event simulation.
    #[arg(long)]
    pub synthetic: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub physics: Physics,
    /// Histogram CSV written by `simulate`.
    #[arg(long)]
    pub histogram: PathBuf,
    /// Pins ΔΩ/2π instead of estimating it, Hz.
    #[arg(long, allow_hyphen_values = true)]
    pub fix_detuning_hz: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub physics: Physics,
    /// Rebuild the report from the event logs stored in this directory.
    #[arg(long)]
    pub from: Option<PathBuf>,
    /// Rows as `detuning_hz:alpha`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rows: Vec<String>,
    /// Skip the blue-port autocorrelation row.
    #[arg(long)]
    pub no_auto: bool,
    /// Splitter ideality of the autocorrelation row.
    #[arg(long, default_value_t = 0.93)]
    pub auto_alpha: f64,
    /// Integration time of the autocorrelation row, s. Two detectors behind a
    /// tap collect far fewer same-port pairs than the cross rows.
    #[arg(long, default_value_t = 86400.0)]
    pub auto_duration_s: f64,
}

/// Table rows used when `--rows` is absent: (ΔΩ/2π in Hz, α).
pub const STANDARD_ROWS: [(f64, f64); 4] = [(0.0, 0.92), (300e6, 0.95), (600e6, 0.90), (5e9, 0.95)];
pub const STANDARD_DETUNINGS_HZ: [f64; 4] = [0.0, 300e6, 600e6, 5e9];

/// Parses `args`, runs the subcommand and returns the process exit code:
/// 0 on success, 2 for configuration errors, 3 for numerical failures.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() || matches!(e, Error::Io(_)) {
        2
    } else {
        3
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let go = || match &cli.command {
        Command::Design(a) => cmd_design(&cli.common, a),
        Command::Analytic(a) => cmd_analytic(&cli.common, a),
        Command::Simulate(a) => cmd_simulate(&cli.common, a),
        Command::Fit(a) => cmd_fit(&cli.common, a),
        Command::Report(a) => cmd_report(&cli.common, a),
    };
    match cli.common.threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => with_threads(n, go)?,
        None => go(),
    }
}

/// Collects outputs under one directory and records their digests.
struct Sink {
    dir: PathBuf,
    manifest: RunManifest,
    provenance: Metadata,
}

impl Sink {
    fn new(dir: &Path, manifest: RunManifest) -> Self {
        let provenance = manifest.provenance();
        Self {
            dir: dir.to_path_buf(),
            manifest,
            provenance,
        }
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        io::write_file(&self.dir.join(name), contents)?;
        self.manifest.record_output(Path::new(name), contents.as_bytes());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
        text.push('\n');
        self.text(name, &text)
    }

    fn curve(&mut self, stem: &str, curve: &G2Curve) -> Result<()> {
        let meta = self.provenance.clone();
        self.text(&format!("{stem}.csv"), &io::write_curve_csv(curve, &meta))?;
        self.json(&format!("{stem}.json"), &io::curve_json(curve, &meta))
    }

    fn finish(self) -> Result<()> {
        self.manifest.write(&self.dir.join("manifest.json"))
    }
}

fn load_key_values(common: &Common) -> Result<(KeyValues, Vec<PathBuf>)> {
    match &common.config {
        Some(path) => Ok((KeyValues::load(path)?, vec![path.clone()])),
        None => Ok((KeyValues::default(), Vec::new())),
    }
}

fn apply_physics(kv: &mut KeyValues, p: &Physics, seed: Option<u64>) {
    let mut put = |k: &str, v: Option<f64>| {
        if let Some(v) = v {
            kv.set(k, format!("{v:e}"));
        }
    };
    put("source_linewidth", p.linewidth_hz.map(|f| TWO_PI * f));
    put("visibility", p.alpha);
    put("fbs_strength", p.strength);
    put("duration", p.duration_s);
    put("jitter_sigma", p.jitter_s);
    put("tau_bin", p.tau_bin_s);
    if let Some(d) = p.detuning_hz {
        kv.remove("fbs_pump_separation");
        kv.set("detuning", format!("{:e}", TWO_PI * d));
    }
    if let Some(s) = seed {
        kv.set("seed", s.to_string());
    }
}

fn resolve_experiment(common: &Common, physics: &Physics) -> Result<(ExperimentConfig, Vec<PathBuf>)> {
    let (mut kv, inputs) = load_key_values(common)?;
    apply_physics(&mut kv, physics, common.seed);
    Ok((ExperimentConfig::from_key_values(&kv)?, inputs))
}

fn mode_label(mode: CorrelationMode) -> &'static str {
    match mode {
        CorrelationMode::Cross => "cross",
        CorrelationMode::Auto => "auto",
    }
}

fn parse_mode(s: &str) -> Result<CorrelationMode> {
    match s {
        "cross" => Ok(CorrelationMode::Cross),
        "auto" => Ok(CorrelationMode::Auto),
        _ => Err(Error::Config(format!("unknown correlation mode `{s}`"))),
    }
}

fn fit_options(cfg: &ExperimentConfig, mode: CorrelationMode) -> Result<FitOptions> {
    let efficiency = cfg.splitter()?.efficiency();
    Ok(FitOptions {
        shape: Some(SignalShape::for_mode(mode, efficiency)),
        jitter_sigma: cfg.jitter_sigma,
        ..FitOptions::default()
    })
}

// ---- design ----

const DESIGN_KEYS: &[&str] = &[
    "fsr",
    "m",
    "band_offset",
    "length",
    "gamma_power",
    "beta2",
    "beta3",
    "beta4",
    "reference_frequency",
];

fn cmd_design(common: &Common, a: &DesignArgs) -> Result<()> {
    let (mut kv, inputs) = load_key_values(common)?;
    kv.reject_unknown(DESIGN_KEYS)?;
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            kv.set(k, v);
        }
    };
    put("fsr", a.fsr.map(|v| format!("{v:e}")));
    put("m", a.m.map(|v| v.to_string()));
    put("band_offset", a.band_offset.map(|v| format!("{v:e}")));
    put("length", a.length.map(|v| format!("{v:e}")));
    put("gamma_power", a.gamma_power.map(|v| format!("{v:e}")));
    put("beta2", a.beta2.map(|v| format!("{v:e}")));
    put("beta3", a.beta3.map(|v| format!("{v:e}")));
    put("beta4", a.beta4.map(|v| format!("{v:e}")));

    let illustrative = DispersionProfile::illustrative();
    let fsr: f64 = kv.get("fsr")?.unwrap_or(ResonatorSpec::default().fsr);
    let m: i32 = kv.get("m")?.unwrap_or(ResonatorSpec::default().signal_index);
    let band_offset: f64 = kv.get("band_offset")?.unwrap_or(1e12);
    let length: f64 = kv.get("length")?.unwrap_or(FbsParams::default().length);
    let gamma_power: f64 = kv
        .get("gamma_power")?
        .unwrap_or(crate::fbs::BALANCED_STRENGTH / length);
    let profile = DispersionProfile {
        reference_frequency: kv
            .get("reference_frequency")?
            .unwrap_or(illustrative.reference_frequency),
        beta2: kv.get("beta2")?.unwrap_or(illustrative.beta2),
        beta3: kv.get("beta3")?.unwrap_or(illustrative.beta3),
        beta4: kv.get("beta4")?.unwrap_or(illustrative.beta4),
    };
    let placeholder = profile == illustrative;

    let separation = pump_separation_from_fsr(fsr, m)?;
    let placement = ProcessPlacement::symmetric(TWO_PI * band_offset, separation, length, gamma_power);
    let reports = sideband_suppression(&profile, &placement)?;
    let f = placement.frequencies();
    let abs_hz = |x: f64| (profile.reference_frequency + x) / TWO_PI;

    let config = vec![
        ("fsr".to_owned(), format!("{fsr:e}")),
        ("m".to_owned(), m.to_string()),
        ("band_offset".to_owned(), format!("{band_offset:e}")),
        ("length".to_owned(), format!("{length:e}")),
        ("gamma_power".to_owned(), format!("{gamma_power:e}")),
        ("reference_frequency".to_owned(), format!("{:e}", profile.reference_frequency)),
        ("beta2".to_owned(), format!("{:e}", profile.beta2)),
        ("beta3".to_owned(), format!("{:e}", profile.beta3)),
        ("beta4".to_owned(), format!("{:e}", profile.beta4)),
    ];
    let mut manifest = RunManifest::new("design", config, None);
    manifest.inputs = inputs;
    let mut sink = Sink::new(&common.out_dir, manifest);

    let summary: Vec<(&str, String)> = vec![
        ("pump_separation_hz", fmt_f64(separation / TWO_PI)),
        ("red_frequency_hz", fmt_f64(abs_hz(f.red))),
        ("blue_frequency_hz", fmt_f64(abs_hz(f.blue))),
        ("pump1_frequency_hz", fmt_f64(abs_hz(f.pump1))),
        ("pump2_frequency_hz", fmt_f64(abs_hz(f.pump2))),
        ("target_delta_beta_rad_per_m", fmt_f64(reports[0].delta_beta)),
        ("suppression_ratio", fmt_f64(suppression_ratio(&reports))),
        (
            "dispersion_profile",
            if placeholder { "illustrative_placeholder" } else { "user_supplied" }.into(),
        ),
    ];
    let meta = sink.provenance.clone();
    sink.text("design.csv", &io::write_design_csv(&reports, &meta))?;
    let mut design = io::design_json(&reports, &meta);
    for (k, v) in &summary {
        design[*k] = Value::String(v.clone());
    }
    sink.json("design.json", &design)?;
    let text = render(&summary);
    sink.text("design.txt", &text)?;
    print!("{text}");
    println!("pump separation: {:.3} GHz", separation / TWO_PI / 1e9);
    for r in &reports {
        println!(
            "{:<14} delta_beta {:>12.4e} rad/m  efficiency {:.6}",
            r.kind.label(),
            r.delta_beta,
            r.efficiency
        );
    }
    sink.finish()
}

// ---- analytic ----

fn detuning_label(hz: f64) -> String {
    format!("{}mhz", (hz / 1e6).round() as i64)
}

fn cmd_analytic(common: &Common, a: &AnalyticArgs) -> Result<()> {
    let linewidth_hz = a.linewidth_hz.unwrap_or(270e6);
    let alpha = a.alpha.unwrap_or(1.0);
    let jitter = a.jitter_s.unwrap_or(0.0);
    let detunings: Vec<f64> = if a.detuning_hz.is_empty() {
        STANDARD_DETUNINGS_HZ.to_vec()
    } else {
        a.detuning_hz.clone()
    };
    let tau = match (a.tau_range_s, a.tau_step_s) {
        (None, None) => default_tau_axis(),
        (r, s) => tau_axis(
            r.unwrap_or(crate::correlation::DEFAULT_TAU_HALF_RANGE),
            s.unwrap_or(crate::correlation::DEFAULT_TAU_SPACING),
        )?,
    };
    let lw = TWO_PI * linewidth_hz;
    let mut config = vec![
        ("linewidth_hz".to_owned(), format!("{linewidth_hz:e}")),
        ("alpha".to_owned(), format!("{alpha:e}")),
        ("jitter_s".to_owned(), format!("{jitter:e}")),
        ("tau_first_s".to_owned(), format!("{:e}", tau[0])),
        ("tau_points".to_owned(), tau.len().to_string()),
        ("numeric".to_owned(), a.numeric.to_string()),
    ];
    for d in &detunings {
        config.push(("detuning_hz".to_owned(), format!("{d:e}")));
    }
    let mut sink = Sink::new(&common.out_dir, RunManifest::new("analytic", config, None));
    let smear = |c: G2Curve| -> Result<G2Curve> {
        if jitter > 0.0 {
            convolve_jitter(&c, jitter)
        } else {
            Ok(c)
        }
    };

    sink.curve("g2_pumps_off", &smear(g2_pumps_off_analytic(lw, &tau)?)?)?;
    for &d in &detunings {
        let label = detuning_label(d);
        let curve = smear(g2_cross_analytic(lw, TWO_PI * d, alpha, &tau)?)?;
        println!(
            "detuning {label}: G2(0) = {:.6}",
            curve.value_at_zero().unwrap_or(f64::NAN)
        );
        sink.curve(&format!("g2_cross_{label}"), &curve)?;
        if a.numeric {
            let spec = ResonatorSpec {
                linewidth: lw,
                ..ResonatorSpec::default()
            };
            let offset = TWO_PI * d;
            let jsa = build_ring_jsa(&spec, FrequencyGrid::correlation_grade(lw, offset)?)?;
            let state = TwoPhotonState::from_jsa(&apply_envelope_offset(&jsa, offset)?)?;
            let out = apply_fbs_two_photon(&state, &FbsParams::default())?;
            let curve = smear(g2_numeric(&out, Sector::Cross, &tau)?)?;
            sink.curve(&format!("g2_cross_numeric_{label}"), &curve)?;
        }
    }
    sink.finish()
}

// ---- simulate ----

fn cmd_simulate(common: &Common, a: &SimulateArgs) -> Result<()> {
    let (cfg, inputs) = resolve_experiment(common, &a.physics)?;
    let mode: CorrelationMode = a.mode.into();
    let mut config = cfg.entries();
    config.push(("mode".to_owned(), mode_label(mode).to_owned()));
    config.push(("synthetic".to_owned(), a.synthetic.to_string()));
    let mut manifest = RunManifest::new("simulate", config, Some(cfg.seed));
    manifest.inputs = inputs;
    let mut sink = Sink::new(&common.out_dir, manifest);
    sink.text("config.txt", &cfg.to_key_values())?;

    let hist = if a.synthetic {
        synthetic_histogram(&cfg, mode, cfg.seed)?
    } else {
        let out = match mode {
            CorrelationMode::Cross => simulate_run(&cfg)?,
            CorrelationMode::Auto => simulate_autocorrelation(&cfg)?,
        };
        let meta = sink.provenance.clone();
        sink.text("events.txt", &io::write_events(&out.events, &meta))?;
        if mode == CorrelationMode::Auto {
            sink.text("reference_events.txt", &io::write_events(&out.reference_events, &meta))?;
        }
        println!("pairs generated: {}  clicks: {}", out.pairs_generated, out.clicks);
        out.histogram
    };
    write_histogram(&mut sink, "histogram", &hist)?;
    let coherence = 1.0 / cfg.linewidth();
    println!(
        "normalization counts within 1/linewidth: {}  in-sync: {}",
        hist.counts_within(&hist.normalization, coherence),
        hist.counts_within(&hist.in_sync, coherence)
    );
    sink.finish()
}

fn write_histogram(sink: &mut Sink, stem: &str, hist: &CorrelationHistogram) -> Result<()> {
    let meta = sink.provenance.clone();
    sink.text(&format!("{stem}.csv"), &io::write_histogram_csv(hist, &meta))?;
    sink.json(&format!("{stem}.json"), &io::histogram_json(hist, &meta))
}

// ---- fit ----

fn cmd_fit(common: &Common, a: &FitArgs) -> Result<()> {
    let (cfg, mut inputs) = resolve_experiment(common, &a.physics)?;
    let text = std::fs::read_to_string(&a.histogram)?;
    let (hist, _) = io::read_histogram_csv(&text)?;
    inputs.push(a.histogram.clone());
    let data = normalize_histogram(&hist)?;
    let mut opts = fit_options(&cfg, data.mode)?;
    opts.fix_detuning = a.fix_detuning_hz.map(|d| TWO_PI * d);

    let mut config = cfg.entries();
    config.push(("histogram_sha256".to_owned(), sha256_hex(text.as_bytes())));
    if let Some(d) = a.fix_detuning_hz {
        config.push(("fix_detuning_hz".to_owned(), format!("{d:e}")));
    }
    let mut manifest = RunManifest::new("fit", config, None);
    manifest.inputs = inputs;
    let mut sink = Sink::new(&common.out_dir, manifest);

    let fit = fit_beating(&data, &opts)?;
    write_fit(&mut sink, "", &data, &fit, &[])?;
    print!("{}", io::write_fit_text(&fit, &Vec::new()));
    sink.finish()
}

/// Fit text/CSV/JSON plus the measured and model curves.
fn write_fit(
    sink: &mut Sink,
    prefix: &str,
    data: &NormalizedHistogram,
    fit: &FitResult,
    extra: &[(String, String)],
) -> Result<()> {
    let mut meta = sink.provenance.clone();
    meta.extend(extra.iter().cloned());
    sink.text(&format!("{prefix}fit.txt"), &io::write_fit_text(fit, &meta))?;
    let keys: Vec<&str> = meta.iter().map(|(k, _)| k.as_str()).collect();
    let csv = format!("{}\n{}\n", io::fit_csv_header(&keys), io::fit_csv_row(fit, &meta));
    sink.text(&format!("{prefix}fit.csv"), &csv)?;
    sink.json(&format!("{prefix}fit.json"), &io::fit_json(fit, &meta))?;
    sink.curve(&format!("{prefix}g2_measured"), &data.curve)?;
    sink.curve(&format!("{prefix}g2_model"), &model_curve(data, fit))?;
    Ok(())
}

fn model_curve(data: &NormalizedHistogram, fit: &FitResult) -> G2Curve {
    let m = &fit.model;
    let grid = ModelGrid::new(data.tau(), data.tau_bin, data.window_length, fit.jitter_sigma);
    let params = [m.amplitude, m.linewidth, m.detuning, m.visibility, m.offset, m.background];
    let (signal, _) = grid.evaluate(&params, fit.shape);
    let kind = match data.mode {
        CorrelationMode::Cross => CurveKind::CrossRb,
        CorrelationMode::Auto => CurveKind::AutoBb,
    };
    let mut curve = G2Curve::new(data.tau().to_vec(), signal, kind, CurveSource::Analytic);
    for (name, v) in crate::estimation::PARAMETER_NAMES.iter().zip(params) {
        curve.parameters.push(((*name).to_owned(), v));
    }
    curve
}

// ---- report ----

#[derive(Debug, Clone)]
struct Row {
    dir: String,
    mode: CorrelationMode,
    cfg: ExperimentConfig,
}

fn parse_rows(a: &ReportArgs) -> Result<Vec<(f64, f64)>> {
    if a.rows.is_empty() {
        return Ok(STANDARD_ROWS.to_vec());
    }
    a.rows
        .iter()
        .map(|r| {
            let (d, al) = r
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("row `{r}` is not `detuning_hz:alpha`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("cannot parse `{s}` in row `{r}`")))
            };
            Ok((parse(d)?, parse(al)?))
        })
        .collect()
}

fn planned_rows(common: &Common, a: &ReportArgs) -> Result<(Vec<Row>, Vec<PathBuf>)> {
    let (base, inputs) = resolve_experiment(common, &a.physics)?;
    let mut rows = Vec::new();
    let mut push = |mode: CorrelationMode, hz: f64, alpha: f64| -> Result<()> {
        let mut cfg = base.clone();
        if mode == CorrelationMode::Auto {
            cfg.duration = a.auto_duration_s;
        }
        cfg.set_detuning(TWO_PI * hz);
        cfg.visibility = alpha;
        // Independent streams per row.
        cfg.seed = base.seed.wrapping_add(rows.len() as u64);
        cfg.validate()?;
        let dir = format!("row_{}_{}_{}", rows.len(), mode_label(mode), detuning_label(hz));
        rows.push(Row { dir, mode, cfg });
        Ok(())
    };
    for (hz, alpha) in parse_rows(a)? {
        push(CorrelationMode::Cross, hz, alpha)?;
    }
    if !a.no_auto {
        push(CorrelationMode::Auto, 0.0, a.auto_alpha)?;
    }
    Ok((rows, inputs))
}

fn stored_rows(dir: &Path) -> Result<Vec<Row>> {
    let mut names: Vec<String> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("row_"))
        .collect();
    names.sort_by_key(|n| {
        n.split('_')
            .nth(1)
            .and_then(|i| i.parse::<usize>().ok())
            .unwrap_or(usize::MAX)
    });
    if names.is_empty() {
        return Err(Error::Config(format!("no row directories in {}", dir.display())));
    }
    names
        .into_iter()
        .map(|name| {
            let kv = KeyValues::load(&dir.join(&name).join("row.txt"))?;
            let mode = parse_mode(kv.get_raw("mode").unwrap_or(""))?;
            let cfg = ExperimentConfig::load(&dir.join(&name).join("config.txt"))?;
            Ok(Row { dir: name, mode, cfg })
        })
        .collect()
}

fn report_manifest(rows: &[Row]) -> RunManifest {
    let mut config = Vec::new();
    for r in rows {
        config.push((format!("{}.mode", r.dir), mode_label(r.mode).to_owned()));
        for (k, v) in r.cfg.entries() {
            config.push((format!("{}.{k}", r.dir), v));
        }
    }
    RunManifest::new("report", config, None)
}

fn cmd_report(common: &Common, a: &ReportArgs) -> Result<()> {
    let (rows, source_dir, inputs) = match &a.from {
        Some(dir) => (stored_rows(dir)?, dir.clone(), vec![dir.clone()]),
        None => {
            let (rows, inputs) = planned_rows(common, a)?;
            (rows, common.out_dir.clone(), inputs)
        }
    };
    let mut manifest = report_manifest(&rows);
    manifest.inputs = inputs;
    let mut sink = Sink::new(&common.out_dir, manifest);
    let meta = sink.provenance.clone();

    if a.from.is_none() {
        for row in &rows {
            eprintln!("simulating {}", row.dir);
            let out = match row.mode {
                CorrelationMode::Cross => simulate_run(&row.cfg)?,
                CorrelationMode::Auto => simulate_autocorrelation(&row.cfg)?,
            };
            let d = &row.dir;
            sink.text(&format!("{d}/config.txt"), &row.cfg.to_key_values())?;
            sink.text(
                &format!("{d}/row.txt"),
                &render(&[("mode", mode_label(row.mode).to_owned())]),
            )?;
            sink.text(&format!("{d}/events.txt"), &io::write_events(&out.events, &meta))?;
            if row.mode == CorrelationMode::Auto {
                sink.text(
                    &format!("{d}/reference_events.txt"),
                    &io::write_events(&out.reference_events, &meta),
                )?;
            }
        }
    }

    let mut table = Vec::new();
    for row in &rows {
        let read = |name: &str| -> Result<Vec<crate::montecarlo::Event>> {
            let path = source_dir.join(&row.dir).join(name);
            Ok(io::read_events(&std::fs::read_to_string(path)?)?.0)
        };
        let events = read("events.txt")?;
        let reference = match row.mode {
            CorrelationMode::Auto => read("reference_events.txt")?,
            CorrelationMode::Cross => Vec::new(),
        };
        let hist = histogram_from_events(&row.cfg, row.mode, &events, &reference)?;
        let data = normalize_histogram(&hist)?;
        let fit = fit_beating(&data, &fit_options(&row.cfg, row.mode)?)?;
        let prefix = format!("{}/", row.dir);
        write_histogram(&mut sink, &format!("{prefix}histogram"), &hist)?;
        write_fit(&mut sink, &prefix, &data, &fit, &[])?;
        table.push(TableRow::new(row, &fit));
    }

    let header = TableRow::HEADER.join(",");
    let mut csv = String::new();
    for (k, v) in &meta {
        csv.push_str(&format!("# {k} {v}\n"));
    }
    csv.push_str(&header);
    csv.push('\n');
    for t in &table {
        csv.push_str(&t.csv());
        csv.push('\n');
    }
    sink.text("report.csv", &csv)?;
    let rows_json: Vec<Value> = table.iter().map(TableRow::json).collect();
    let meta_json: serde_json::Map<String, Value> =
        meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    sink.json("report.json", &json!({ "metadata": meta_json, "rows": rows_json }))?;

    println!(
        "{:<6} {:>14} {:>8} {:>18} {:>18} {:>10}",
        "mode", "detuning_MHz", "alpha", "alpha_r", "alpha_f", "peak_g2"
    );
    for t in &table {
        println!("{}", t.pretty());
    }
    sink.finish()
}

struct TableRow {
    mode: CorrelationMode,
    detuning_hz: f64,
    alpha_model: f64,
    alpha_r: (f64, f64),
    alpha_f: (f64, f64),
    fitted_detuning_hz: (f64, f64),
    reduced_chi2: f64,
    flags: String,
}

impl TableRow {
    const HEADER: [&'static str; 13] = [
        "mode",
        "detuning_hz",
        "alpha_model",
        "alpha_r",
        "alpha_r_sigma",
        "alpha_f",
        "alpha_f_sigma",
        "fitted_detuning_hz",
        "fitted_detuning_sigma_hz",
        "bunching_peak",
        "bunching_peak_sigma",
        "reduced_chi2",
        "flags",
    ];

    fn new(row: &Row, fit: &FitResult) -> Self {
        let raw = fit.raw.map_or((f64::NAN, f64::NAN), |r| (r.alpha, r.sigma));
        let v = fit.visibility();
        let d = fit.estimate("detuning").expect("detuning is a fit parameter");
        Self {
            mode: row.mode,
            detuning_hz: row.cfg.detuning() / TWO_PI,
            alpha_model: row.cfg.visibility,
            alpha_r: raw,
            alpha_f: (v.value, v.sigma),
            fitted_detuning_hz: (d.value / TWO_PI, d.sigma / TWO_PI),
            reduced_chi2: fit.reduced_chi2,
            flags: fit.flags.join(";"),
        }
    }

    /// Fitted same-port peak `1 + α` relative to the incoherent reference.
    fn peak(&self) -> (f64, f64) {
        match self.mode {
            CorrelationMode::Auto => (1.0 + self.alpha_f.0, self.alpha_f.1),
            CorrelationMode::Cross => (f64::NAN, f64::NAN),
        }
    }

    fn csv(&self) -> String {
        let p = self.peak();
        [
            mode_label(self.mode).to_owned(),
            fmt_f64(self.detuning_hz),
            fmt_f64(self.alpha_model),
            fmt_f64(self.alpha_r.0),
            fmt_f64(self.alpha_r.1),
            fmt_f64(self.alpha_f.0),
            fmt_f64(self.alpha_f.1),
            fmt_f64(self.fitted_detuning_hz.0),
            fmt_f64(self.fitted_detuning_hz.1),
            fmt_f64(p.0),
            fmt_f64(p.1),
            fmt_f64(self.reduced_chi2),
            self.flags.clone(),
        ]
        .join(",")
    }

    fn json(&self) -> Value {
        let n = |x: f64| serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        let p = self.peak();
        json!({
            "mode": mode_label(self.mode),
            "detuning_hz": n(self.detuning_hz),
            "alpha_model": n(self.alpha_model),
            "alpha_r": n(self.alpha_r.0),
            "alpha_r_sigma": n(self.alpha_r.1),
            "alpha_f": n(self.alpha_f.0),
            "alpha_f_sigma": n(self.alpha_f.1),
            "fitted_detuning_hz": n(self.fitted_detuning_hz.0),
            "fitted_detuning_sigma_hz": n(self.fitted_detuning_hz.1),
            "bunching_peak": n(p.0),
            "bunching_peak_sigma": n(p.1),
            "reduced_chi2": n(self.reduced_chi2),
            "flags": self.flags.split(';').filter(|s| !s.is_empty()).collect::<Vec<_>>(),
        })
    }

    fn pretty(&self) -> String {
        let p = self.peak();
        let peak = if p.0.is_nan() {
            "-".to_owned()
        } else {
            format!("{:.3}", p.0)
        };
        format!(
            "{:<6} {:>14.1} {:>8.3} {:>9.3} ± {:<6.3} {:>9.3} ± {:<6.3} {:>10}",
            mode_label(self.mode),
            self.detuning_hz / 1e6,
            self.alpha_model,
            self.alpha_r.0,
            self.alpha_r.1,
            self.alpha_f.0,
            self.alpha_f.1,
            peak
        )
    }
}
