//! Text, CSV and JSON formats for every artifact the tools exchange.
//!
//! Floats are written with 17 significant digits so a write/read cycle is
//! exact. Metadata travels in leading `# key value` lines that readers skip
//! unless they need the value.

use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::correlation::{CurveKind, CurveSource, G2Curve};
use crate::error::{Error, Result};
use crate::estimation::{FitResult, PARAMETER_NAMES};
use crate::fbs::{Arm, TwoPhotonState};
use crate::montecarlo::{Channel, CorrelationHistogram, Event, NormalizationSource};
use crate::phasematch::ProcessReport;
use crate::spectral::{EnergyConstraint, FrequencyGrid, JointSpectralAmplitude};

/// Ordered `# key value` header lines, e.g. the manifest hash and seed.
pub type Metadata = Vec<(String, String)>;

/// Round-trip float formatting.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn json_f64s(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| json_f64(x)).collect())
}

fn metadata_json(meta: &Metadata) -> Value {
    Value::Object(
        meta.iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect(),
    )
}

fn push_meta(out: &mut String, meta: &Metadata) {
    for (k, v) in meta {
        out.push_str(&format!("# {k} {v}\n"));
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    write_file(path, &text)
}

/// Splits a document into `# key value` header entries and numbered data lines.
struct Document<'a> {
    header: Vec<(usize, &'a str, &'a str)>,
    rows: Vec<(usize, &'a str)>,
}

impl<'a> Document<'a> {
    fn parse(text: &'a str) -> Self {
        let mut header = Vec::new();
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                let (k, v) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                header.push((i + 1, k, v.trim()));
            } else {
                rows.push((i + 1, line));
            }
        }
        Self { header, rows }
    }

    fn get(&self, key: &str) -> Option<&'a str> {
        self.header.iter().find(|h| h.1 == key).map(|h| h.2)
    }

    fn all(&self, key: &str) -> impl Iterator<Item = &'a str> + '_ {
        let key = key.to_owned();
        self.header.iter().filter(move |h| h.1 == key).map(|h| h.2)
    }

    fn require<T: std::str::FromStr>(&self, what: &'static str, key: &str) -> Result<T> {
        let raw = self.get(key).ok_or_else(|| Error::Parse {
            what,
            line: 0,
            reason: format!("missing header `{key}`"),
        })?;
        raw.parse().map_err(|_| Error::Parse {
            what,
            line: self.header.iter().find(|h| h.1 == key).map_or(0, |h| h.0),
            reason: format!("bad value `{raw}` for `{key}`"),
        })
    }

    /// Keeps caller metadata, dropping the keys the format itself owns.
    fn metadata(&self, owned: &[&str]) -> Metadata {
        self.header
            .iter()
            .filter(|h| !owned.contains(&h.1))
            .map(|h| (h.1.to_owned(), h.2.to_owned()))
            .collect()
    }
}

fn field<T: std::str::FromStr>(what: &'static str, line: usize, raw: Option<&str>) -> Result<T> {
    let raw = raw.ok_or_else(|| Error::Parse {
        what,
        line,
        reason: "missing column".into(),
    })?;
    raw.trim().parse().map_err(|_| Error::Parse {
        what,
        line,
        reason: format!("cannot parse `{raw}`"),
    })
}

// ---- joint spectral amplitude ----

const JSA_KEYS: [&str; 6] = [
    "center_rad_s",
    "span_rad_s",
    "n_points",
    "pump_frequency_rad_s",
    "envelope_offset_rad_s",
    "columns",
];

fn grid_header(out: &mut String, grid: &FrequencyGrid) {
    out.push_str(&format!("# center_rad_s {}\n", fmt_f64(grid.center)));
    out.push_str(&format!("# span_rad_s {}\n", fmt_f64(grid.span)));
    out.push_str(&format!("# n_points {}\n", grid.n_points));
}

fn read_grid(doc: &Document, what: &'static str) -> Result<FrequencyGrid> {
    FrequencyGrid::new(
        doc.require(what, "center_rad_s")?,
        doc.require(what, "span_rad_s")?,
        doc.require(what, "n_points")?,
    )
}

fn push_amplitude_rows(out: &mut String, grid: &FrequencyGrid, amplitude: &[Complex64]) {
    for (i, a) in amplitude.iter().enumerate() {
        out.push_str(&format!(
            "{} {} {}\n",
            fmt_f64(grid.detuning(i)),
            fmt_f64(a.re),
            fmt_f64(a.im)
        ));
    }
}

fn parse_amplitude_row(what: &'static str, line: usize, text: &str) -> Result<Complex64> {
    let mut cols = text.split_whitespace();
    let _nu: f64 = field(what, line, cols.next())?;
    let re = field(what, line, cols.next())?;
    let im = field(what, line, cols.next())?;
    Ok(Complex64::new(re, im))
}

pub fn write_jsa(jsa: &JointSpectralAmplitude, meta: &Metadata) -> String {
    let mut out = String::new();
    grid_header(&mut out, &jsa.grid);
    out.push_str(&format!(
        "# pump_frequency_rad_s {}\n",
        fmt_f64(jsa.constraint.pump_frequency)
    ));
    out.push_str(&format!("# envelope_offset_rad_s {}\n", fmt_f64(jsa.envelope_offset)));
    push_meta(&mut out, meta);
    out.push_str("# columns nu_rad_s re im\n");
    push_amplitude_rows(&mut out, &jsa.grid, &jsa.amplitude);
    out
}

pub fn read_jsa(text: &str) -> Result<(JointSpectralAmplitude, Metadata)> {
    const WHAT: &str = "JSA file";
    let doc = Document::parse(text);
    let grid = read_grid(&doc, WHAT)?;
    if doc.rows.len() != grid.n_points {
        return Err(Error::Parse {
            what: WHAT,
            line: doc.rows.last().map_or(0, |r| r.0),
            reason: format!("{} rows for {} points", doc.rows.len(), grid.n_points),
        });
    }
    let amplitude = doc
        .rows
        .iter()
        .map(|&(line, text)| parse_amplitude_row(WHAT, line, text))
        .collect::<Result<Vec<_>>>()?;
    let mut jsa = JointSpectralAmplitude::from_samples(grid, amplitude)?;
    if doc.get("pump_frequency_rad_s").is_some() {
        jsa.constraint = EnergyConstraint {
            pump_frequency: doc.require(WHAT, "pump_frequency_rad_s")?,
        };
    }
    if doc.get("envelope_offset_rad_s").is_some() {
        jsa.envelope_offset = doc.require(WHAT, "envelope_offset_rad_s")?;
    }
    Ok((jsa, doc.metadata(&JSA_KEYS)))
}

// ---- two-photon state ----

const COMPONENTS: [(&str, Arm, Arm); 4] = [
    ("rr", Arm::Red, Arm::Red),
    ("rb", Arm::Red, Arm::Blue),
    ("br", Arm::Blue, Arm::Red),
    ("bb", Arm::Blue, Arm::Blue),
];

/// One block per ordered arm pair, each introduced by `# component <label>`.
pub fn write_two_photon(state: &TwoPhotonState, meta: &Metadata) -> String {
    let mut out = String::new();
    grid_header(&mut out, &state.grid);
    out.push_str(&format!("# envelope_offset_rad_s {}\n", fmt_f64(state.envelope_offset)));
    out.push_str(&format!("# reference_peak {}\n", fmt_f64(state.reference_peak)));
    push_meta(&mut out, meta);
    out.push_str("# columns nu_rad_s re im\n");
    for (label, a, b) in COMPONENTS {
        out.push_str(&format!("# component {label}\n"));
        push_amplitude_rows(&mut out, &state.grid, state.component(a, b));
    }
    out
}

pub fn read_two_photon(text: &str) -> Result<TwoPhotonState> {
    const WHAT: &str = "two-photon file";
    let doc = Document::parse(text);
    let grid = read_grid(&doc, WHAT)?;
    let mut blocks: Vec<(usize, &str)> = doc
        .header
        .iter()
        .filter(|h| h.1 == "component")
        .map(|h| (h.0, h.2))
        .collect();
    blocks.sort();
    if blocks.len() != 4 {
        return Err(Error::Parse {
            what: WHAT,
            line: 0,
            reason: format!("expected 4 component blocks, found {}", blocks.len()),
        });
    }
    let mut psi: [[Vec<Complex64>; 2]; 2] = Default::default();
    for (k, &(start, label)) in blocks.iter().enumerate() {
        let end = blocks.get(k + 1).map_or(usize::MAX, |b| b.0);
        let (_, a, b) = COMPONENTS
            .iter()
            .find(|c| c.0 == label)
            .copied()
            .ok_or_else(|| Error::Parse {
                what: WHAT,
                line: start,
                reason: format!("unknown component `{label}`"),
            })?;
        let values = doc
            .rows
            .iter()
            .filter(|r| r.0 > start && r.0 < end)
            .map(|&(line, text)| parse_amplitude_row(WHAT, line, text))
            .collect::<Result<Vec<_>>>()?;
        psi[a.index()][b.index()] = values;
    }
    TwoPhotonState::from_components(
        grid,
        doc.require(WHAT, "envelope_offset_rad_s")?,
        psi,
        doc.require(WHAT, "reference_peak")?,
    )
}

// ---- correlation curves ----

const CURVE_HEADER: &str = "tau_s,value,kind,source";

pub fn write_curve_csv(curve: &G2Curve, meta: &Metadata) -> String {
    let mut out = String::new();
    push_meta(&mut out, meta);
    for (name, value) in &curve.parameters {
        out.push_str(&format!("# parameter {name} {}\n", fmt_f64(*value)));
    }
    for w in &curve.warnings {
        out.push_str(&format!("# warning {w}\n"));
    }
    out.push_str(CURVE_HEADER);
    out.push('\n');
    let (kind, source) = (curve.kind.label(), curve.source.label());
    for (t, v) in curve.tau.iter().zip(&curve.values) {
        out.push_str(&format!("{},{},{kind},{source}\n", fmt_f64(*t), fmt_f64(*v)));
    }
    out
}

pub fn read_curve_csv(text: &str) -> Result<(G2Curve, Metadata)> {
    const WHAT: &str = "curve CSV";
    let doc = Document::parse(text);
    let mut rows = doc.rows.iter();
    match rows.next() {
        Some(&(_, h)) if h == CURVE_HEADER => {}
        other => {
            return Err(Error::Parse {
                what: WHAT,
                line: other.map_or(0, |r| r.0),
                reason: format!("expected header `{CURVE_HEADER}`"),
            })
        }
    }
    let (mut tau, mut values) = (Vec::new(), Vec::new());
    let mut labels: Option<(CurveKind, CurveSource)> = None;
    for &(line, text) in rows {
        let mut cols = text.split(',');
        tau.push(field(WHAT, line, cols.next())?);
        values.push(field(WHAT, line, cols.next())?);
        let bad = |reason: &str| Error::Parse {
            what: WHAT,
            line,
            reason: reason.into(),
        };
        let kind = cols.next().and_then(CurveKind::from_label).ok_or_else(|| bad("unknown kind"))?;
        let source = cols
            .next()
            .and_then(CurveSource::from_label)
            .ok_or_else(|| bad("unknown source"))?;
        match labels {
            None => labels = Some((kind, source)),
            Some(l) if l != (kind, source) => return Err(bad("kind or source changes within the file")),
            _ => {}
        }
    }
    let (kind, source) = labels.ok_or_else(|| Error::Parse {
        what: WHAT,
        line: 0,
        reason: "no data rows".into(),
    })?;
    let mut curve = G2Curve::new(tau, values, kind, source);
    for p in doc.all("parameter") {
        let (name, v) = p.split_once(' ').unwrap_or((p, ""));
        curve.parameters.push((name.to_owned(), field(WHAT, 0, Some(v))?));
    }
    curve.warnings = doc.all("warning").map(str::to_owned).collect();
    Ok((curve, doc.metadata(&["parameter", "warning"])))
}

pub fn curve_json(curve: &G2Curve, meta: &Metadata) -> Value {
    let params: Map<String, Value> = curve
        .parameters
        .iter()
        .map(|(k, v)| (k.clone(), json_f64(*v)))
        .collect();
    json!({
        "metadata": metadata_json(meta),
        "kind": curve.kind.label(),
        "source": curve.source.label(),
        "parameters": params,
        "warnings": curve.warnings,
        "tau_s": json_f64s(&curve.tau),
        "value": json_f64s(&curve.values),
    })
}

// ---- coincidence histograms ----

const HISTOGRAM_HEADER: &str = "tau_s,count,error,partition";
const HISTOGRAM_KEYS: [&str; 6] = [
    "tau_bin_s",
    "window_length_s",
    "sync_windows",
    "normalization_windows",
    "normalization_source",
    "warning",
];

pub fn write_histogram_csv(hist: &CorrelationHistogram, meta: &Metadata) -> String {
    let mut out = String::new();
    push_meta(&mut out, meta);
    out.push_str(&format!("# tau_bin_s {}\n", fmt_f64(hist.tau_bin)));
    out.push_str(&format!("# window_length_s {}\n", fmt_f64(hist.window_length)));
    out.push_str(&format!("# sync_windows {}\n", hist.sync_windows));
    out.push_str(&format!("# normalization_windows {}\n", hist.normalization_windows));
    out.push_str(&format!(
        "# normalization_source {}\n",
        hist.normalization_source.label()
    ));
    for w in &hist.warnings {
        out.push_str(&format!("# warning {w}\n"));
    }
    out.push_str(HISTOGRAM_HEADER);
    out.push('\n');
    let norm_label = hist.normalization_source.label();
    for (counts, label) in [(&hist.in_sync, "in_sync"), (&hist.normalization, norm_label)] {
        for (i, &c) in counts.iter().enumerate() {
            out.push_str(&format!(
                "{},{c},{},{label}\n",
                fmt_f64(hist.bin_center(i)),
                fmt_f64((c as f64).sqrt())
            ));
        }
    }
    out
}

pub fn read_histogram_csv(text: &str) -> Result<(CorrelationHistogram, Metadata)> {
    const WHAT: &str = "histogram CSV";
    let doc = Document::parse(text);
    let source_label: String = doc.require(WHAT, "normalization_source")?;
    let source = NormalizationSource::from_label(&source_label).ok_or_else(|| Error::Parse {
        what: WHAT,
        line: 0,
        reason: format!("unknown normalization source `{source_label}`"),
    })?;
    let tau_bin: f64 = doc.require(WHAT, "tau_bin_s")?;
    let mut in_sync = Vec::new();
    let mut normalization = Vec::new();
    let mut tau_first = None;
    for (k, &(line, text)) in doc.rows.iter().enumerate() {
        if k == 0 {
            if text != HISTOGRAM_HEADER {
                return Err(Error::Parse {
                    what: WHAT,
                    line,
                    reason: format!("expected header `{HISTOGRAM_HEADER}`"),
                });
            }
            continue;
        }
        let mut cols = text.split(',');
        let tau: f64 = field(WHAT, line, cols.next())?;
        let count: u64 = field(WHAT, line, cols.next())?;
        let _err: f64 = field(WHAT, line, cols.next())?;
        match cols.next() {
            Some("in_sync") => {
                tau_first.get_or_insert(tau);
                in_sync.push(count);
            }
            Some(p) if p == source.label() => normalization.push(count),
            other => {
                return Err(Error::Parse {
                    what: WHAT,
                    line,
                    reason: format!("unexpected partition {other:?}"),
                })
            }
        }
    }
    if in_sync.is_empty() || in_sync.len() != normalization.len() || in_sync.len() % 2 != 0 {
        return Err(Error::Parse {
            what: WHAT,
            line: 0,
            reason: format!(
                "partitions hold {} and {} bins; need equal even counts",
                in_sync.len(),
                normalization.len()
            ),
        });
    }
    let expected_first = -((in_sync.len() / 2) as f64 - 0.5) * tau_bin;
    if let Some(t) = tau_first {
        if (t - expected_first).abs() > 1e-6 * tau_bin {
            return Err(Error::Parse {
                what: WHAT,
                line: 0,
                reason: "bins are not centered on the τ = 0 edge".into(),
            });
        }
    }
    let hist = CorrelationHistogram {
        tau_bin,
        window_length: doc.require(WHAT, "window_length_s")?,
        in_sync,
        normalization,
        normalization_source: source,
        sync_windows: doc.require(WHAT, "sync_windows")?,
        normalization_windows: doc.require(WHAT, "normalization_windows")?,
        warnings: doc.all("warning").map(str::to_owned).collect(),
    };
    Ok((hist, doc.metadata(&HISTOGRAM_KEYS)))
}

pub fn histogram_json(hist: &CorrelationHistogram, meta: &Metadata) -> Value {
    let counts = |v: &[u64]| Value::Array(v.iter().map(|&c| json!(c)).collect());
    json!({
        "metadata": metadata_json(meta),
        "tau_bin_s": json_f64(hist.tau_bin),
        "window_length_s": json_f64(hist.window_length),
        "sync_windows": hist.sync_windows,
        "normalization_windows": hist.normalization_windows,
        "normalization_source": hist.normalization_source.label(),
        "warnings": hist.warnings,
        "tau_s": json_f64s(&hist.centers()),
        "in_sync": counts(&hist.in_sync),
        "normalization": counts(&hist.normalization),
    })
}

// ---- event logs ----

pub fn write_events(events: &[Event], meta: &Metadata) -> String {
    let mut out = String::with_capacity(events.len() * 40);
    push_meta(&mut out, meta);
    out.push_str("# columns time_s channel window_id\n");
    for e in events {
        out.push_str(&format!("{} {} {}\n", fmt_f64(e.time), e.channel.label(), e.window_id));
    }
    out
}

pub fn read_events(text: &str) -> Result<(Vec<Event>, Metadata)> {
    const WHAT: &str = "event log";
    let doc = Document::parse(text);
    let events = doc
        .rows
        .iter()
        .map(|&(line, text)| {
            let mut cols = text.split_whitespace();
            let time = field(WHAT, line, cols.next())?;
            let channel = cols.next().and_then(Channel::from_label).ok_or(Error::Parse {
                what: WHAT,
                line,
                reason: "unknown channel".into(),
            })?;
            let window_id = field(WHAT, line, cols.next())?;
            Ok(Event {
                time,
                channel,
                window_id,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((events, doc.metadata(&["columns"])))
}

// ---- phase-matching design ----

const DESIGN_HEADER: &str = "process,input_rad_s,output_rad_s,delta_beta_rad_per_m,efficiency,matched";

pub fn write_design_csv(reports: &[ProcessReport], meta: &Metadata) -> String {
    let mut out = String::new();
    push_meta(&mut out, meta);
    out.push_str(DESIGN_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.kind.label(),
            fmt_f64(r.input),
            fmt_f64(r.output),
            fmt_f64(r.delta_beta),
            fmt_f64(r.efficiency),
            r.matched
        ));
    }
    out
}

pub fn design_json(reports: &[ProcessReport], meta: &Metadata) -> Value {
    let rows: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "process": r.kind.label(),
                "input_rad_s": json_f64(r.input),
                "output_rad_s": json_f64(r.output),
                "delta_beta_rad_per_m": json_f64(r.delta_beta),
                "efficiency": json_f64(r.efficiency),
                "matched": r.matched,
            })
        })
        .collect();
    json!({ "metadata": metadata_json(meta), "processes": rows })
}

// ---- fit results ----

/// Flat `(key, value)` view of a fit, shared by the text, CSV and JSON forms.
pub fn fit_fields(fit: &FitResult) -> Vec<(String, String)> {
    let mut f = Vec::new();
    let mut put = |k: &str, v: String| f.push((k.to_owned(), v));
    for (name, e) in PARAMETER_NAMES.iter().zip(&fit.estimates) {
        put(name, fmt_f64(e.value));
        put(&format!("{name}_sigma"), fmt_f64(e.sigma));
    }
    let raw = fit.raw;
    put("raw_visibility", fmt_f64(raw.map_or(f64::NAN, |r| r.alpha)));
    put("raw_visibility_sigma", fmt_f64(raw.map_or(f64::NAN, |r| r.sigma)));
    put("raw_on_counts", raw.map_or("nan".into(), |r| r.on_counts.to_string()));
    put("raw_off_counts", raw.map_or("nan".into(), |r| r.off_counts.to_string()));
    put("chi2", fmt_f64(fit.chi2));
    put("dof", fit.dof.to_string());
    put("reduced_chi2", fmt_f64(fit.reduced_chi2));
    put("iterations", fit.iterations.to_string());
    put("final_damping", fmt_f64(fit.final_damping));
    put("gradient_norm", fmt_f64(fit.gradient_norm));
    put("alpha_detuning_correlation", fmt_f64(fit.alpha_detuning_correlation));
    put("shape_base", fmt_f64(fit.shape.base));
    put("shape_beat", fmt_f64(fit.shape.beat));
    put("jitter_sigma_s", fmt_f64(fit.jitter_sigma));
    put("fit_half_range_s", fmt_f64(fit.fit_half_range));
    put("bins_used", fit.bins_used.to_string());
    put(
        "flags",
        if fit.flags.is_empty() {
            "none".into()
        } else {
            fit.flags.join(";")
        },
    );
    f
}

/// `key = value` text with provenance first.
pub fn write_fit_text(fit: &FitResult, meta: &Metadata) -> String {
    let mut out = String::new();
    for (k, v) in meta.iter().chain(&fit_fields(fit)) {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}

pub fn fit_csv_header(meta_keys: &[&str]) -> String {
    let fields: Vec<String> = meta_keys
        .iter()
        .map(|s| s.to_string())
        .chain(fit_fields_names())
        .collect();
    fields.join(",")
}

fn fit_fields_names() -> Vec<String> {
    let mut names = Vec::new();
    for name in PARAMETER_NAMES {
        names.push(name.to_owned());
        names.push(format!("{name}_sigma"));
    }
    for n in [
        "raw_visibility",
        "raw_visibility_sigma",
        "raw_on_counts",
        "raw_off_counts",
        "chi2",
        "dof",
        "reduced_chi2",
        "iterations",
        "final_damping",
        "gradient_norm",
        "alpha_detuning_correlation",
        "shape_base",
        "shape_beat",
        "jitter_sigma_s",
        "fit_half_range_s",
        "bins_used",
        "flags",
    ] {
        names.push(n.to_owned());
    }
    names
}

/// One CSV row whose columns follow [`fit_csv_header`] with the same keys.
pub fn fit_csv_row(fit: &FitResult, meta: &Metadata) -> String {
    meta.iter()
        .chain(&fit_fields(fit))
        .map(|(_, v)| csv_escape(v))
        .collect::<Vec<_>>()
        .join(",")
}

fn csv_escape(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_owned()
    }
}

pub fn fit_json(fit: &FitResult, meta: &Metadata) -> Value {
    let mut obj = Map::new();
    obj.insert("metadata".into(), metadata_json(meta));
    for (k, v) in fit_fields(fit) {
        let value = match k.as_str() {
            "flags" => json!(fit.flags),
            _ => v
                .parse::<f64>()
                .map(json_f64)
                .unwrap_or(Value::String(v.clone())),
        };
        obj.insert(k, value);
    }
    obj.insert("chi2_history".into(), json_f64s(&fit.chi2_history));
    Value::Object(obj)
}

/// Reads `key = value` fit text back as strings, sorted by key.
pub fn read_fit_text(text: &str) -> Result<Metadata> {
    let kv = crate::config::KeyValues::parse(text)?;
    Ok(kv
        .keys()
        .map(|k| (k.to_owned(), kv.get_raw(k).unwrap_or_default().to_owned()))
        .collect())
}
