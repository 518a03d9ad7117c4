use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::histogram::{CorrelationHistogram, NormalizationSource};
use crate::error::Result;
use crate::fbs::SplitterAmplitudes;

/// Pump periods simulated per independent RNG stream. Results do not depend
/// on how chunks are scheduled across threads.
pub const CHUNK_PERIODS: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Red,
    Blue,
    /// Blue-port detectors behind a 50:50 tap (autocorrelation mode).
    Blue1,
    Blue2,
}

impl Channel {
    pub fn label(self) -> &'static str {
        match self {
            Channel::Red => "R",
            Channel::Blue => "B",
            Channel::Blue1 => "B1",
            Channel::Blue2 => "B2",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "R" => Some(Channel::Red),
            "B" => Some(Channel::Blue),
            "B1" => Some(Channel::Blue1),
            "B2" => Some(Channel::Blue2),
            _ => None,
        }
    }
}

/// One detector click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub channel: Channel,
    pub window_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMode {
    /// Red versus blue port, normalized by unsynchronized windows.
    Cross,
    /// Two detectors on the blue port, normalized by an incoherent reference.
    Auto,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub histogram: CorrelationHistogram,
    /// Clicks in windows holding at least two clicks, in time order.
    pub events: Vec<Event>,
    /// Event log of the incoherent reference acquisition (auto mode only).
    pub reference_events: Vec<Event>,
    pub pairs_generated: u64,
    pub clicks: u64,
}

/// Outcome probabilities (cross, both red, both blue) for a pair with delay τ
/// passing a splitter with ideality α.
pub fn outcome_probabilities(
    amps: &SplitterAmplitudes,
    alpha: f64,
    detuning: f64,
    tau: f64,
) -> (f64, f64, f64) {
    let t = amps.transmit.norm_sqr();
    let c = amps.convert.norm_sqr();
    let beat = alpha * (detuning * tau).cos();
    let cross = (t * t + c * c - 2.0 * t * c * beat).max(0.0);
    let bunched = (t * c * (1.0 + beat)).max(0.0);
    (cross, bunched, bunched)
}

struct Chunk {
    hist: CorrelationHistogram,
    events: Vec<Event>,
    pairs: u64,
    clicks: u64,
}

struct ChunkPlan<'a> {
    cfg: &'a ExperimentConfig,
    amps: SplitterAmplitudes,
    mode: CorrelationMode,
    alpha: f64,
    keep_events: bool,
    stream_tag: u64,
}

impl ChunkPlan<'_> {
    fn run(&self, chunk: u64, total_periods: u64) -> Result<Chunk> {
        let cfg = self.cfg;
        let first_period = chunk * CHUNK_PERIODS;
        let n_periods = CHUNK_PERIODS.min(total_periods - first_period);
        let duration = n_periods as f64 * cfg.window_period;
        let slots = cfg.slots_per_period();

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(chunk * 4 + self.stream_tag);

        let det_sigma = cfg.jitter_sigma / std::f64::consts::SQRT_2;
        let jitter = Normal::new(0.0, det_sigma).expect("validated jitter");
        let delay = Exp::new(cfg.linewidth()).expect("validated linewidth");
        let detuning = cfg.detuning();
        let auto = self.mode == CorrelationMode::Auto;

        let mut raw: Vec<(f64, Channel)> = Vec::new();
        let pairs = poisson(&mut rng, cfg.total_pair_rate() * duration);
        for _ in 0..pairs {
            let t0 = rng.random::<f64>() * duration;
            let tau = {
                let d: f64 = delay.sample(&mut rng);
                if rng.random::<bool>() {
                    d
                } else {
                    -d
                }
            };
            let phase = t0 - (t0 / cfg.window_period).floor() * cfg.window_period;
            let synced = phase < cfg.window_length;
            let (red, blue) = if synced {
                let (p_cross, p_rr, _) =
                    outcome_probabilities(&self.amps, self.alpha, detuning, tau);
                let u = rng.random::<f64>();
                if u < p_cross {
                    (Some(t0 + tau), Some(t0))
                } else if u < p_cross + p_rr {
                    raw_push(&mut raw, &mut rng, cfg, auto, &jitter, t0, true, duration);
                    (Some(t0 + tau), None)
                } else {
                    raw_push(&mut raw, &mut rng, cfg, auto, &jitter, t0, false, duration);
                    (None, Some(t0 + tau))
                }
            } else {
                (Some(t0 + tau), Some(t0))
            };
            if let Some(t) = red {
                raw_push(&mut raw, &mut rng, cfg, auto, &jitter, t, true, duration);
            }
            if let Some(t) = blue {
                raw_push(&mut raw, &mut rng, cfg, auto, &jitter, t, false, duration);
            }
        }

        let mut dark = |rate: f64, channel: Channel, raw: &mut Vec<(f64, Channel)>| {
            for _ in 0..poisson(&mut rng, rate * duration) {
                raw.push((rng.random::<f64>() * duration, channel));
            }
        };
        dark(cfg.dark_rate_r, Channel::Red, &mut raw);
        if auto {
            dark(cfg.dark_rate_b, Channel::Blue1, &mut raw);
            dark(cfg.dark_rate_b, Channel::Blue2, &mut raw);
        } else {
            dark(cfg.dark_rate_b, Channel::Blue, &mut raw);
        }

        // Assign windows; clicks in dead time between windows are dropped.
        let mut clicks: Vec<(u64, f64, Channel)> = raw
            .into_iter()
            .filter_map(|(t, ch)| {
                let p = (t / cfg.window_period).floor();
                let slot = ((t - p * cfg.window_period) / cfg.window_length).floor() as u64;
                (slot < slots).then(|| (p as u64 * slots + slot, t, ch))
            })
            .collect();
        let n_clicks = clicks.len() as u64;
        clicks.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

        let mut hist = empty_histogram(cfg, self.mode);
        let mut events = Vec::new();
        let chunk_start = first_period as f64 * cfg.window_period;
        let window_offset = first_period * slots;
        for group in clicks.chunk_by(|a, b| a.0 == b.0) {
            if group.len() < 2 {
                continue;
            }
            // Absolute times so that a stored event log rebuilds the same histogram.
            let group: Vec<Event> = group
                .iter()
                .map(|&(w, t, channel)| Event {
                    time: chunk_start + t,
                    channel,
                    window_id: window_offset + w,
                })
                .collect();
            accumulate_window(&mut hist, &group, slots, self.mode);
            if self.keep_events {
                events.extend(group);
            }
        }
        Ok(Chunk {
            hist,
            events,
            pairs,
            clicks: n_clicks,
        })
    }
}

fn empty_histogram(cfg: &ExperimentConfig, mode: CorrelationMode) -> CorrelationHistogram {
    let source = match mode {
        CorrelationMode::Cross => NormalizationSource::OffSync,
        CorrelationMode::Auto => NormalizationSource::Reference,
    };
    CorrelationHistogram::empty(cfg.tau_bin, cfg.tau_range, cfg.window_length, source)
}

/// Adds every start/stop pair of one window to the histogram.
fn accumulate_window(hist: &mut CorrelationHistogram, group: &[Event], slots: u64, mode: CorrelationMode) {
    let (first_ch, second_ch) = match mode {
        CorrelationMode::Auto => (Channel::Blue1, Channel::Blue2),
        CorrelationMode::Cross => (Channel::Red, Channel::Blue),
    };
    let synced = group[0].window_id.is_multiple_of(slots);
    for a in group.iter().filter(|c| c.channel == first_ch) {
        for b in group.iter().filter(|c| c.channel == second_ch) {
            if let Some(bin) = hist.bin_of(a.time - b.time) {
                if synced {
                    hist.in_sync[bin] += 1;
                } else {
                    hist.normalization[bin] += 1;
                }
            }
        }
    }
}

/// Rebuilds the histogram of a run from its stored event log. In auto mode the
/// normalization partition comes from the log of the reference acquisition.
pub fn histogram_from_events(
    cfg: &ExperimentConfig,
    mode: CorrelationMode,
    events: &[Event],
    reference_events: &[Event],
) -> Result<CorrelationHistogram> {
    cfg.validate()?;
    let slots = cfg.slots_per_period();
    let periods = cfg.periods();
    let fill = |events: &[Event]| {
        let mut hist = empty_histogram(cfg, mode);
        let mut sorted = events.to_vec();
        sorted.sort_by(|a, b| a.window_id.cmp(&b.window_id).then(a.time.total_cmp(&b.time)));
        for group in sorted.chunk_by(|a, b| a.window_id == b.window_id) {
            if group.len() >= 2 {
                accumulate_window(&mut hist, group, slots, mode);
            }
        }
        hist
    };
    let mut hist = fill(events);
    hist.sync_windows = periods;
    match mode {
        CorrelationMode::Cross => hist.normalization_windows = periods * (slots - 1),
        CorrelationMode::Auto => {
            hist.normalization = fill(reference_events).in_sync;
            hist.normalization_windows = periods;
        }
    }
    Ok(hist)
}

#[allow(clippy::too_many_arguments)]
fn raw_push(
    raw: &mut Vec<(f64, Channel)>,
    rng: &mut ChaCha8Rng,
    cfg: &ExperimentConfig,
    auto: bool,
    jitter: &Normal<f64>,
    t: f64,
    red: bool,
    duration: f64,
) {
    let eta = if red {
        cfg.detection_efficiency_r
    } else {
        cfg.detection_efficiency_b
    };
    if rng.random::<f64>() >= eta {
        return;
    }
    let channel = match (red, auto) {
        (true, _) => Channel::Red,
        (false, false) => Channel::Blue,
        (false, true) => {
            if rng.random::<bool>() {
                Channel::Blue1
            } else {
                Channel::Blue2
            }
        }
    };
    let t = t + jitter.sample(rng);
    if (0.0..duration).contains(&t) {
        raw.push((t, channel));
    }
}

pub(crate) fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

fn run_plan(plan: &ChunkPlan, total_periods: u64) -> Result<Vec<Chunk>> {
    let n_chunks = total_periods.div_ceil(CHUNK_PERIODS);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| plan.run(c, total_periods))
        .collect()
}

fn simulate(cfg: &ExperimentConfig, mode: CorrelationMode, keep_events: bool) -> Result<SimulationOutput> {
    cfg.validate()?;
    let amps = cfg.splitter()?;
    let total_periods = cfg.periods();
    let slots = cfg.slots_per_period();
    let plan = ChunkPlan {
        cfg,
        amps,
        mode,
        alpha: cfg.visibility,
        keep_events,
        stream_tag: 0,
    };
    let chunks = run_plan(&plan, total_periods)?;

    let mut histogram = empty_histogram(cfg, mode);
    let mut events = Vec::new();
    let mut reference_events = Vec::new();
    let (mut pairs, mut clicks) = (0, 0);
    for chunk in chunks {
        histogram.merge(&chunk.hist)?;
        events.extend(chunk.events);
        pairs += chunk.pairs;
        clicks += chunk.clicks;
    }
    histogram.sync_windows = total_periods;

    match mode {
        CorrelationMode::Cross => {
            histogram.normalization_windows = total_periods * (slots - 1);
            if slots < 2 {
                histogram
                    .warnings
                    .push("no unsynchronized windows; normalization partition is empty".into());
            }
        }
        CorrelationMode::Auto => {
            // Same acquisition with the interference switched off.
            let reference = ChunkPlan {
                alpha: 0.0,
                stream_tag: 1,
                ..plan
            };
            histogram.normalization = vec![0; histogram.n_bins()];
            for chunk in run_plan(&reference, total_periods)? {
                reference_events.extend(chunk.events);
                for (a, b) in histogram.normalization.iter_mut().zip(&chunk.hist.in_sync) {
                    *a += b;
                }
            }
            histogram.normalization_windows = total_periods;
        }
    }
    Ok(SimulationOutput {
        histogram,
        events,
        reference_events,
        pairs_generated: pairs,
        clicks,
    })
}

/// Simulates a cross-correlation acquisition (red versus blue port).
pub fn simulate_run(cfg: &ExperimentConfig) -> Result<SimulationOutput> {
    simulate(cfg, CorrelationMode::Cross, true)
}

/// Simulates a blue-port autocorrelation acquisition with a 50:50 tap.
pub fn simulate_autocorrelation(cfg: &ExperimentConfig) -> Result<SimulationOutput> {
    simulate(cfg, CorrelationMode::Auto, true)
}

/// Same as the `simulate_*` functions, without retaining the event log.
pub fn simulate_histogram(cfg: &ExperimentConfig, mode: CorrelationMode) -> Result<CorrelationHistogram> {
    simulate(cfg, mode, false).map(|o| o.histogram)
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbs::{splitter_amplitudes, FbsParams};

    fn short(duration: f64) -> ExperimentConfig {
        ExperimentConfig {
            duration,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let amps = splitter_amplitudes(&FbsParams::default()).unwrap();
        for &tau in &[0.0, 1e-10, 3e-9] {
            let (c, r, b) = outcome_probabilities(&amps, 0.9, 2e9, tau);
            assert!((c + r + b - 1.0).abs() < 1e-12);
        }
        let (c, _, _) = outcome_probabilities(&amps, 1.0, 0.0, 0.0);
        assert!(c < 1e-15);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = short(2.0);
        let a = simulate_run(&cfg).unwrap();
        let b = simulate_run(&cfg).unwrap();
        assert_eq!(a.histogram, b.histogram);
        assert_eq!(a.events, b.events);
        let other = simulate_run(&ExperimentConfig { seed: 2, ..cfg }).unwrap();
        assert_ne!(a.histogram, other.histogram);
    }

    #[test]
    fn events_sorted_and_windowed() {
        let out = simulate_run(&short(1.0)).unwrap();
        assert!(!out.events.is_empty());
        let cfg = short(1.0);
        for w in out.events.windows(2) {
            assert!((w[0].window_id, w[0].time) <= (w[1].window_id, w[1].time));
        }
        for e in &out.events {
            let slot = (e.time / cfg.window_length).floor() as u64;
            assert_eq!(slot, e.window_id, "{e:?}");
        }
    }

    #[test]
    fn event_log_rebuilds_histogram() {
        let cfg = short(5.0);
        let out = simulate_run(&cfg).unwrap();
        let h = histogram_from_events(&cfg, CorrelationMode::Cross, &out.events, &[]).unwrap();
        assert_eq!(h, out.histogram);
        let out = simulate_autocorrelation(&cfg).unwrap();
        let h = histogram_from_events(&cfg, CorrelationMode::Auto, &out.events, &out.reference_events)
            .unwrap();
        assert_eq!(h, out.histogram);
    }

    #[test]
    fn dip_at_zero_delay() {
        let cfg = short(600.0);
        let h = simulate_run(&cfg).unwrap().histogram;
        let mid = h.n_bins() / 2;
        let on: u64 = h.in_sync[mid - 1] + h.in_sync[mid];
        let off: u64 = h.normalization[mid - 1] + h.normalization[mid];
        assert!(off > 20, "{off}");
        assert!((on as f64) < 0.3 * off as f64 / 4.0 + 3.0, "on {on} off {off}");
    }
}
