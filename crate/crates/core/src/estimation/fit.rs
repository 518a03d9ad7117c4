use nalgebra::{DMatrix, DVector};

use super::normalize::{raw_visibility, NormalizedHistogram, RawVisibility, SignalShape};
use crate::correlation::BeatModel;
use crate::error::{Error, Result};

pub const PARAMETER_NAMES: [&str; 6] = [
    "amplitude",
    "linewidth",
    "detuning",
    "visibility",
    "offset",
    "background",
];
const A: usize = 0;
const LW: usize = 1;
const DET: usize = 2;
const ALPHA: usize = 3;
const T0: usize = 4;
const BG: usize = 5;

pub const MAX_ITERATIONS: usize = 200;
pub const PARAMETER_TOLERANCE: f64 = 1e-8;
/// Minimum χ² improvement for a floating beat frequency to be preferred
/// over ΔΩ = 0 at a single trial frequency. The scan over many frequencies
/// raises it by 2 ln N, see [`detuning_threshold`].
pub const DETUNING_CHI2_THRESHOLD: f64 = 9.0;
const MIN_FIT_BINS: usize = 50;
/// Default fit window in units of 1/Δω; beyond it bins hold well under one
/// count at the calibrated rate.
pub const DEFAULT_FIT_HALF_RANGE_LINEWIDTHS: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Defaults to a balanced splitter for the data's correlation mode.
    pub shape: Option<SignalShape>,
    /// Known jitter; the model is convolved with it when positive.
    pub jitter_sigma: f64,
    pub initial: Option<BeatModel>,
    /// Pins ΔΩ instead of estimating it.
    pub fix_detuning: Option<f64>,
    /// Bins with |τ| above this are ignored; defaults to
    /// [`DEFAULT_FIT_HALF_RANGE_LINEWIDTHS`]/Δω of the initial estimate.
    pub fit_half_range: Option<f64>,
    /// Refines count weights with model variances (Poisson likelihood).
    pub poisson_refinement: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            shape: None,
            jitter_sigma: 0.0,
            initial: None,
            fix_detuning: None,
            fit_half_range: None,
            poisson_refinement: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// 1σ; NaN for parameters held fixed.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: BeatModel,
    /// In [`PARAMETER_NAMES`] order.
    pub estimates: [Estimate; 6],
    /// Pearson χ² at the estimate (count-weighted when refinement is off).
    pub chi2: f64,
    pub dof: usize,
    pub reduced_chi2: f64,
    pub iterations: usize,
    pub final_damping: f64,
    pub gradient_norm: f64,
    pub chi2_history: Vec<f64>,
    /// Correlation coefficient between α and ΔΩ; NaN when ΔΩ is fixed.
    pub alpha_detuning_correlation: f64,
    pub raw: Option<RawVisibility>,
    pub shape: SignalShape,
    pub jitter_sigma: f64,
    pub fit_half_range: f64,
    pub bins_used: usize,
    /// Estimator decisions and anomalies, machine-readable tags.
    pub flags: Vec<String>,
}

impl FitResult {
    pub fn estimate(&self, name: &str) -> Option<Estimate> {
        PARAMETER_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.estimates[i])
    }

    pub fn visibility(&self) -> Estimate {
        self.estimates[ALPHA]
    }
}

/// Evaluates the joint signal/reference model on histogram bins.
///
/// The envelope `A e^{−Δω|τ−t₀|}` times the window acceptance is sampled on a
/// sub-bin grid, optionally convolved with the jitter, then bin-averaged.
#[derive(Debug, Clone)]
pub struct ModelGrid {
    edges_start: f64,
    n_bins: usize,
    per_bin: usize,
    step: f64,
    pad: usize,
    kernel: Vec<f64>,
    window_length: f64,
    centers: Vec<f64>,
}

impl ModelGrid {
    pub fn new(centers: &[f64], tau_bin: f64, window_length: f64, jitter_sigma: f64) -> Self {
        let mut per_bin = 8usize;
        if jitter_sigma > 0.0 {
            per_bin = per_bin.max((3.0 * tau_bin / jitter_sigma).ceil() as usize);
        }
        let step = tau_bin / per_bin as f64;
        let (pad, kernel) = if jitter_sigma > 0.0 {
            let pad = (8.0 * jitter_sigma / step).ceil() as usize;
            let mut k: Vec<f64> = (-(pad as isize)..=pad as isize)
                .map(|j| (-0.5 * (j as f64 * step / jitter_sigma).powi(2)).exp())
                .collect();
            let total: f64 = k.iter().sum();
            k.iter_mut().for_each(|w| *w /= total);
            (pad, k)
        } else {
            (0, vec![1.0])
        };
        Self {
            edges_start: centers[0] - 0.5 * tau_bin,
            n_bins: centers.len(),
            per_bin,
            step,
            pad,
            kernel,
            window_length,
            centers: centers.to_vec(),
        }
    }

    fn acceptance(&self, tau: f64) -> f64 {
        if self.window_length > 0.0 {
            (1.0 - tau.abs() / self.window_length).max(0.0)
        } else {
            1.0
        }
    }

    /// (signal, reference) per bin.
    pub fn evaluate(&self, p: &[f64; 6], shape: SignalShape) -> (Vec<f64>, Vec<f64>) {
        let n_fine = self.n_bins * self.per_bin + 2 * self.pad;
        let start = self.edges_start - self.pad as f64 * self.step;
        let mut env = Vec::with_capacity(n_fine);
        let mut sig = Vec::with_capacity(n_fine);
        for k in 0..n_fine {
            let tau = start + (k as f64 + 0.5) * self.step;
            let u = tau - p[T0];
            let e = p[A] * (-p[LW] * u.abs()).exp() * self.acceptance(tau);
            env.push(e);
            sig.push(e * (shape.base + shape.beat * p[ALPHA] * (p[DET] * u).cos()));
        }
        let smooth = |v: &[f64]| -> Vec<f64> {
            if self.pad == 0 {
                return v.to_vec();
            }
            (self.pad..n_fine - self.pad)
                .map(|i| {
                    self.kernel
                        .iter()
                        .enumerate()
                        .map(|(j, w)| w * v[i + j - self.pad])
                        .sum()
                })
                .collect()
        };
        let (env, sig) = (smooth(&env), smooth(&sig));
        let bin_mean = |v: &[f64]| -> Vec<f64> {
            v.chunks(self.per_bin)
                .zip(&self.centers)
                .map(|(c, &tau)| c.iter().sum::<f64>() / self.per_bin as f64 + p[BG] * self.acceptance(tau))
                .collect()
        };
        (bin_mean(&sig), bin_mean(&env))
    }
}

fn to_array(m: &BeatModel) -> [f64; 6] {
    [
        m.amplitude,
        m.linewidth,
        m.detuning,
        m.visibility,
        m.offset,
        m.background,
    ]
}

fn to_model(p: &[f64; 6]) -> BeatModel {
    BeatModel {
        amplitude: p[A],
        linewidth: p[LW],
        detuning: p[DET],
        visibility: p[ALPHA],
        offset: p[T0],
        background: p[BG],
    }
}

/// Variance floor for model-weighted residuals, in counts.
const MODEL_VARIANCE_FLOOR: f64 = 1e-2;
const MAX_REWEIGHTS: usize = 20;

#[derive(Clone)]
struct Problem<'a> {
    grid: ModelGrid,
    shape: SignalShape,
    data: &'a NormalizedHistogram,
    range: std::ops::Range<usize>,
    weights_sig: Vec<f64>,
    weights_ref: Vec<f64>,
}

impl<'a> Problem<'a> {
    /// Starts with count-based weights `1/√max(N, 1)`.
    fn new(
        data: &'a NormalizedHistogram,
        shape: SignalShape,
        range: std::ops::Range<usize>,
        jitter_sigma: f64,
    ) -> Self {
        Self {
            grid: ModelGrid::new(
                &data.curve.tau[range.clone()],
                data.tau_bin,
                data.window_length,
                jitter_sigma,
            ),
            shape,
            data,
            weights_sig: data.fit_errors[range.clone()].iter().map(|e| 1.0 / e).collect(),
            weights_ref: data.reference_fit_errors[range.clone()]
                .iter()
                .map(|e| 1.0 / e)
                .collect(),
            range,
        }
    }

    /// Switches to model variances evaluated at `p`; iterating this to a
    /// fixed point gives the Poisson maximum-likelihood estimate.
    fn reweight(&mut self, p: &[f64; 6]) {
        let (s, r) = self.grid.evaluate(p, self.shape);
        let to_counts = [self.data.scale, self.data.scale * self.data.window_ratio];
        let w = |m: f64, k: f64| k / (m * k).max(MODEL_VARIANCE_FLOOR).sqrt();
        self.weights_sig = s.iter().map(|&m| w(m, to_counts[0])).collect();
        self.weights_ref = r.iter().map(|&m| w(m, to_counts[1])).collect();
    }

    fn residuals(&self, p: &[f64; 6]) -> DVector<f64> {
        let (s, r) = self.grid.evaluate(p, self.shape);
        let n = s.len();
        let lo = self.range.start;
        DVector::from_fn(2 * n, |i, _| {
            if i < n {
                (self.data.curve.values[lo + i] - s[i]) * self.weights_sig[i]
            } else {
                let j = i - n;
                (self.data.reference[lo + j] - r[j]) * self.weights_ref[j]
            }
        })
    }

    fn chi2(&self, p: &[f64; 6]) -> f64 {
        self.residuals(p).norm_squared()
    }

    fn step_size(p: &[f64; 6], i: usize) -> f64 {
        1e-6 * match i {
            A => p[A].abs().max(1e-3),
            LW => p[LW],
            DET => p[DET].abs().max(p[LW]),
            ALPHA => 1.0,
            T0 => 1.0 / p[LW],
            _ => p[BG].abs().max(1e-3 * p[A].abs()).max(1e-9),
        }
    }

    /// Jacobian of the model (not the residuals) w.r.t. the free parameters,
    /// in whitened units.
    fn jacobian(&self, p: &[f64; 6], free: &[usize]) -> DMatrix<f64> {
        let n = 2 * self.range.len();
        let mut j = DMatrix::zeros(n, free.len());
        for (col, &i) in free.iter().enumerate() {
            let h = Self::step_size(p, i);
            let (mut lo, mut hi) = (*p, *p);
            lo[i] -= h;
            hi[i] += h;
            let d = (self.residuals(&lo) - self.residuals(&hi)) / (2.0 * h);
            j.set_column(col, &d);
        }
        j
    }
}

fn clamp(p: &mut [f64; 6], floor_lw: f64, det_max: f64) {
    p[ALPHA] = p[ALPHA].clamp(0.0, 1.0);
    p[DET] = p[DET].clamp(-det_max, det_max);
    p[LW] = p[LW].max(floor_lw);
    p[A] = p[A].max(0.0);
}

struct Outcome {
    p: [f64; 6],
    chi2: f64,
    iterations: usize,
    damping: f64,
    gradient_norm: f64,
    history: Vec<f64>,
    covariance: Option<DMatrix<f64>>,
    free: Vec<usize>,
    converged: bool,
}

fn levenberg_marquardt(problem: &Problem, start: [f64; 6], free: Vec<usize>) -> Outcome {
    let floor_lw = 1e-3 * start[LW];
    let det_max = nyquist(problem);
    let mut p = start;
    clamp(&mut p, floor_lw, det_max);
    let mut chi2 = problem.chi2(&p);
    let mut history = vec![chi2];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let j = problem.jacobian(&p, &free);
        let r = problem.residuals(&p);
        let jtj_full = j.transpose() * &j;
        let jtr_full = j.transpose() * &r;
        // Parameters resting on a bound with the gradient pointing outward
        // stay put for this step.
        let active: Vec<usize> = (0..free.len())
            .filter(|&k| {
                let i = free[k];
                let g = jtr_full[k];
                let at_upper = match i {
                    ALPHA => p[i] >= 1.0 && g > 0.0,
                    DET => p[i] >= det_max && g > 0.0,
                    _ => false,
                };
                let at_lower = match i {
                    ALPHA | A => p[i] <= 0.0 && g < 0.0,
                    DET => p[i] <= -det_max && g < 0.0,
                    LW => p[i] <= floor_lw && g < 0.0,
                    _ => false,
                };
                !(at_upper || at_lower)
            })
            .collect();
        if active.is_empty() {
            converged = true;
            break;
        }
        let jtj = DMatrix::from_fn(active.len(), active.len(), |a, b| jtj_full[(active[a], active[b])]);
        let jtr = DVector::from_fn(active.len(), |a, _| jtr_full[active[a]]);
        let mut accepted = false;
        while lambda < 1e12 {
            let mut lhs = jtj.clone();
            for k in 0..active.len() {
                lhs[(k, k)] += lambda * jtj[(k, k)].max(1e-30);
            }
            let Some(delta) = lhs.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p;
            for (k, &a) in active.iter().enumerate() {
                trial[free[a]] += delta[k];
            }
            clamp(&mut trial, floor_lw, det_max);
            let trial_chi2 = problem.chi2(&trial);
            if trial_chi2.is_finite() && trial_chi2 <= chi2 {
                let rel = free
                    .iter()
                    .map(|&i| {
                        let scale = match i {
                            ALPHA => 1.0,
                            T0 => 1.0 / p[LW],
                            DET => p[DET].abs().max(p[LW]),
                            BG => p[BG].abs().max(1e-3 * p[A]),
                            _ => p[i].abs().max(1e-12),
                        };
                        (trial[i] - p[i]).abs() / scale
                    })
                    .fold(0.0, f64::max);
                p = trial;
                chi2 = trial_chi2;
                history.push(chi2);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < PARAMETER_TOLERANCE {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: a stationary point.
            converged = true;
        }
        if converged {
            break;
        }
    }

    let j = problem.jacobian(&p, &free);
    let r = problem.residuals(&p);
    let gradient_norm = (j.transpose() * &r).norm();
    let covariance = (j.transpose() * &j).try_inverse();
    Outcome {
        p,
        chi2,
        iterations,
        damping: lambda,
        gradient_norm,
        history,
        covariance,
        free,
        converged,
    }
}

/// Solves one branch: count-weighted fit, then up to `reweights` rounds of
/// model reweighting. Iterated to a fixed point this is the Poisson
/// likelihood estimate; rounds stop once no parameter moves by more than
/// 1e-3 of its uncertainty.
fn solve(base: &Problem, start: [f64; 6], free: Vec<usize>, reweights: usize) -> Outcome {
    let mut problem = base.clone();
    let mut outcome = levenberg_marquardt(&problem, start, free.clone());
    if reweights == 0 {
        return outcome;
    }
    for _ in 0..reweights {
        problem.reweight(&outcome.p);
        let next = levenberg_marquardt(&problem, outcome.p, free.clone());
        let settled = next.covariance.as_ref().is_some_and(|cov| {
            free.iter()
                .enumerate()
                .all(|(k, &i)| (next.p[i] - outcome.p[i]).abs() <= 1e-3 * cov[(k, k)].max(0.0).sqrt())
        });
        outcome = next;
        if settled {
            break;
        }
    }
    // Report χ² with weights at the final estimate (Pearson statistic).
    problem.reweight(&outcome.p);
    outcome.chi2 = problem.chi2(&outcome.p);
    outcome
}

/// Weighted least-squares fit of the beating model to normalized data.
///
/// The in-sync curve follows `A e^{−Δω|τ−t₀|}(base + beat·α cos ΔΩ(τ−t₀)) + B`
/// and the normalization partition `A e^{−Δω|τ−t₀|} + B`; both are fitted
/// together, so A is pinned by the reference even where α and A would
/// otherwise trade off. Without a pinned ΔΩ the fit is run with ΔΩ = 0 and
/// from the strongest beat frequencies of a scan, keeping a floating ΔΩ only
/// if it lowers χ² by more than [`detuning_threshold`].
pub fn fit_beating(data: &NormalizedHistogram, options: &FitOptions) -> Result<FitResult> {
    let shape = options
        .shape
        .unwrap_or_else(|| SignalShape::for_mode(data.mode, 0.5));
    let raw = raw_visibility(data, shape).ok();
    let mut start = match &options.initial {
        Some(m) => {
            m.validate()?;
            to_array(m)
        }
        None => initial_guess(data, raw.as_ref()),
    };

    let half = options
        .fit_half_range
        .unwrap_or(DEFAULT_FIT_HALF_RANGE_LINEWIDTHS / start[LW]);
    let inside: Vec<usize> = (0..data.curve.tau.len())
        .filter(|&i| data.curve.tau[i].abs() <= half)
        .collect();
    let usable = inside.iter().filter(|&&i| data.fit_errors[i] > 0.0).count();
    if usable < MIN_FIT_BINS {
        return Err(Error::invalid(
            "histogram",
            format!("fit needs at least {MIN_FIT_BINS} bins with nonzero errors, got {usable}"),
        ));
    }
    let range = inside[0]..inside[inside.len() - 1] + 1;
    let bins_used = range.len();
    let problem = Problem::new(data, shape, range, options.jitter_sigma);

    let mut flags = vec!["raw_window=central_2_bins".to_owned()];
    flags.push(if options.poisson_refinement {
        "weights=model_poisson_after_max_count_1".into()
    } else {
        "weights=max_count_1".into()
    });
    if options.jitter_sigma > 0.0 {
        flags.push("model_convolved_with_jitter".into());
    }

    let (screen, refine) = if options.poisson_refinement {
        (1, MAX_REWEIGHTS)
    } else {
        (0, 0)
    };
    // Without a beat term α and ΔΩ do not enter the model.
    let identifiable = |i: &usize| shape.beat != 0.0 || (*i != ALPHA && *i != DET);
    if shape.beat == 0.0 {
        flags.push("no_interference_term".into());
        start[ALPHA] = 0.0;
    }
    let free_all: Vec<usize> = (0..6).filter(identifiable).collect();
    let free_fixed: Vec<usize> = (0..6).filter(|&i| i != DET).filter(identifiable).collect();

    let outcome = if let Some(det) = options.fix_detuning {
        start[DET] = det;
        flags.push("detuning_fixed_by_caller".into());
        solve(&problem, start, free_fixed, refine)
    } else if shape.beat == 0.0 || options.initial.is_some() && start[DET] != 0.0 {
        solve(&problem, start, free_all, refine)
    } else {
        // Screen each branch with a single reweight, then refine the winner.
        start[DET] = 0.0;
        let null = solve(&problem, start, free_fixed.clone(), screen);
        let mut scan = problem.clone();
        if screen > 0 {
            scan.reweight(&null.p);
        }
        let mut best: Option<Outcome> = None;
        for omega in beat_candidates(&scan, &null.p) {
            let mut s = null.p;
            s[DET] = omega;
            s[ALPHA] = start[ALPHA].max(0.3);
            let o = solve(&problem, s, free_all.clone(), screen);
            if o.p[DET].abs() > 0.0 && best.as_ref().is_none_or(|b| o.chi2 < b.chi2) {
                best = Some(o);
            }
        }
        match best {
            Some(b) if null.chi2 - b.chi2 > detuning_threshold(&problem, null.p[LW]) => {
                solve(&problem, b.p, free_all, refine)
            }
            _ => {
                flags.push("detuning_unresolved_fixed_zero".into());
                flags.push("alpha_detuning_degenerate".into());
                solve(&problem, null.p, free_fixed, refine)
            }
        }
    };

    let mut p = outcome.p;
    p[DET] = p[DET].abs();
    let mut estimates = [Estimate {
        value: 0.0,
        sigma: f64::NAN,
    }; 6];
    for i in 0..6 {
        estimates[i].value = p[i];
    }
    let mut correlation = f64::NAN;
    match &outcome.covariance {
        Some(cov) => {
            for (k, &i) in outcome.free.iter().enumerate() {
                estimates[i].sigma = cov[(k, k)].max(0.0).sqrt();
            }
            let pos = |i: usize| outcome.free.iter().position(|&f| f == i);
            if let (Some(a), Some(d)) = (pos(ALPHA), pos(DET)) {
                correlation = cov[(a, d)] / (cov[(a, a)] * cov[(d, d)]).sqrt();
            }
        }
        None => flags.push("covariance_singular".into()),
    }
    if p[ALPHA] <= 0.0 || p[ALPHA] >= 1.0 {
        flags.push("visibility_clamped".into());
    }
    if p[BG] < 0.0 {
        flags.push("background_negative".into());
    }

    let dof = (2 * bins_used).saturating_sub(outcome.free.len()).max(1);
    if !outcome.converged {
        return Err(Error::NoConvergence {
            iterations: outcome.iterations,
            reduced_chi2: outcome.chi2 / dof as f64,
            best: p.to_vec(),
        });
    }
    Ok(FitResult {
        model: to_model(&p),
        estimates,
        chi2: outcome.chi2,
        dof,
        reduced_chi2: outcome.chi2 / dof as f64,
        iterations: outcome.iterations,
        final_damping: outcome.damping,
        gradient_norm: outcome.gradient_norm,
        chi2_history: outcome.history,
        alpha_detuning_correlation: correlation,
        raw,
        shape,
        jitter_sigma: options.jitter_sigma,
        fit_half_range: half,
        bins_used,
        flags,
    })
}

/// Background from the outer bins, t₀ from the reference centroid, Δω from
/// the log-slope of the tails, A from the central bins, α from the raw
/// visibility.
fn initial_guess(data: &NormalizedHistogram, raw: Option<&RawVisibility>) -> [f64; 6] {
    let tau = &data.curve.tau;
    let half = tau.last().copied().unwrap_or(1.0).abs();
    let acc = |t: f64| {
        if data.window_length > 0.0 {
            (1.0 - t.abs() / data.window_length).max(1e-3)
        } else {
            1.0
        }
    };
    let outer: Vec<f64> = tau
        .iter()
        .zip(&data.reference)
        .filter(|(t, _)| t.abs() > 0.6 * half)
        .map(|(t, r)| r / acc(*t))
        .collect();
    let bg = if outer.is_empty() {
        0.0
    } else {
        (outer.iter().sum::<f64>() / outer.len() as f64).max(0.0)
    };

    let excess: Vec<f64> = tau
        .iter()
        .zip(&data.reference)
        .map(|(t, r)| (r - bg * acc(*t)).max(0.0))
        .collect();
    let peak = excess.iter().cloned().fold(0.0, f64::max).max(1e-12);
    let (mut num, mut den) = (0.0, 0.0);
    for (t, e) in tau.iter().zip(&excess) {
        if *e > 0.2 * peak {
            num += t * e;
            den += e;
        }
    }
    let t0 = if den > 0.0 { (num / den).clamp(-data.tau_bin, data.tau_bin) } else { 0.0 };

    // Weighted regression of ln(excess) on |τ − t₀|.
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((t, e), err) in tau.iter().zip(&excess).zip(&data.reference_fit_errors) {
        let x = (t - t0).abs();
        if *e > 0.05 * peak && x > data.tau_bin {
            let w = (e / err).powi(2);
            let y = e.ln();
            sw += w;
            sx += w * x;
            sy += w * y;
            sxx += w * x * x;
            sxy += w * x * y;
        }
    }
    let slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    let linewidth = if slope.is_finite() && slope < 0.0 {
        -slope
    } else {
        1.0 / (10.0 * data.tau_bin)
    };

    let [a, b] = data.central_bins();
    let central = 0.5 * (excess[a] + excess[b]);
    let x = linewidth * data.tau_bin;
    let bin_avg = if x > 1e-9 { (1.0 - (-x).exp()) / x } else { 1.0 };
    let amplitude = (central / bin_avg).max(1e-12);
    let alpha = raw.map(|r| r.alpha.clamp(0.0, 1.0)).unwrap_or(0.5);
    [amplitude, linewidth, 0.0, alpha, t0, bg]
}

/// Beat frequencies ranked by the χ² reduction of a linear α fit with every
/// other parameter held at the ΔΩ = 0 solution, using that fit's weights.
/// Highest beat frequency the binning resolves.
fn nyquist(problem: &Problem) -> f64 {
    std::f64::consts::PI / problem.data.tau_bin
}

/// Look-elsewhere corrected Δχ² threshold: the scan covers about
/// (Nyquist / Δω) independent frequencies.
fn detuning_threshold(problem: &Problem, linewidth: f64) -> f64 {
    let trials = (nyquist(problem) / linewidth).max(1.0);
    DETUNING_CHI2_THRESHOLD + 2.0 * trials.ln()
}

fn beat_candidates(problem: &Problem, null: &[f64; 6]) -> Vec<f64> {
    let lo = problem.range.start;
    let n = problem.range.len();
    let mut base = *null;
    base[ALPHA] = 0.0;
    let (flat, _) = problem.grid.evaluate(&base, problem.shape);
    let lw = null[LW];
    let hi = nyquist(problem);
    let step = 0.05 * lw;
    let mut scores = Vec::new();
    let mut omega = 0.1 * lw;
    while omega <= hi {
        let mut p = base;
        p[DET] = omega;
        p[ALPHA] = 1.0;
        let (full, _) = problem.grid.evaluate(&p, problem.shape);
        let (mut rb, mut bb) = (0.0, 0.0);
        for i in 0..n {
            let w2 = problem.weights_sig[i].powi(2);
            let beat = full[i] - flat[i];
            rb += w2 * (problem.data.curve.values[lo + i] - flat[i]) * beat;
            bb += w2 * beat * beat;
        }
        let alpha = if bb > 0.0 { (rb / bb).clamp(0.0, 1.0) } else { 0.0 };
        // χ²(0) − χ²(α) for the one-parameter linear model.
        scores.push((omega, 2.0 * alpha * rb - alpha * alpha * bb));
        omega += step;
    }
    let mut peaks: Vec<(f64, f64)> = (1..scores.len().saturating_sub(1))
        .filter(|&k| scores[k].1 > 0.0 && scores[k].1 >= scores[k - 1].1 && scores[k].1 > scores[k + 1].1)
        .map(|k| scores[k])
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.into_iter().take(3).map(|(w, _)| w).collect()
}
