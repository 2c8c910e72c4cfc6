//! Beat tracking for constant-tempo material.
//!
//! The pipeline is: Hann-windowed STFT, half-wave rectified spectral flux,
//! adaptive-threshold peak picking, sample-level onset refinement on the
//! energy envelope, then a grid pass that drops spurious onsets and fills
//! single missed beats.

use std::collections::VecDeque;

use realfft::RealFftPlanner;
use thiserror::Error;

use crate::audio::AudioBuffer;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackerError {
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("AudioTooShort: {samples} samples, need at least {window}")]
    AudioTooShort { samples: usize, window: usize },
    #[error("TooFewOnsets: found {found}, need at least 4")]
    TooFewOnsets { found: usize },
    #[error("UnstableTempo: discarded {discarded} of {total} inter-onset intervals")]
    UnstableTempo { discarded: usize, total: usize },
    #[error("TooFewBeats: found {found}, need at least {needed}")]
    TooFewBeats { found: usize, needed: usize },
}

impl TrackerError {
    pub fn name(&self) -> &'static str {
        match self {
            TrackerError::InvalidParams(_) => "InvalidParams",
            TrackerError::AudioTooShort { .. } => "AudioTooShort",
            TrackerError::TooFewOnsets { .. } => "TooFewOnsets",
            TrackerError::UnstableTempo { .. } => "UnstableTempo",
            TrackerError::TooFewBeats { .. } => "TooFewBeats",
        }
    }
}

/// Median of a non-empty slice; `NaN`s are not expected.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// STFT window length in samples; a power of two.
    pub window: usize,
    pub hop: usize,
    /// Onsets must rise above mean + k·stddev of the flux in a centered window.
    pub threshold_k: f64,
    pub threshold_window_s: f64,
    /// Frames on each side a peak must dominate.
    pub peak_radius: usize,
    pub min_onset_spacing_s: f64,
    /// Largest relative deviation of an inter-onset interval from the expected one.
    pub ioi_tolerance: f64,
    /// Fraction of intervals that may be discarded before the tempo counts as unstable.
    pub max_discard_ratio: f64,
    /// Refine frame-resolution onsets to the sample-level envelope rise.
    pub refine: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            window: 2048,
            hop: 512,
            threshold_k: 1.5,
            threshold_window_s: 1.0,
            peak_radius: 3,
            min_onset_spacing_s: 0.050,
            ioi_tolerance: 0.30,
            max_discard_ratio: 0.20,
            refine: true,
        }
    }
}

/// Spectral-flux novelty curve. Frame `i` is centred at `frame_times_s[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OnsetFunction {
    pub frame_times_s: Vec<f64>,
    pub flux: Vec<f64>,
    pub hop_s: f64,
}

impl OnsetFunction {
    pub fn len(&self) -> usize {
        self.flux.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flux.is_empty()
    }

    /// Time of the largest flux value.
    pub fn argmax_time(&self) -> Option<f64> {
        let (i, _) = self
            .flux
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        Some(self.frame_times_s[i])
    }
}

/// Strictly increasing beat instants in `[0, source_duration_s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatGrid {
    beat_times_s: Vec<f64>,
    source_duration_s: f64,
}

impl BeatGrid {
    pub fn new(beat_times_s: Vec<f64>, source_duration_s: f64) -> Result<Self, TrackerError> {
        if beat_times_s.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(TrackerError::InvalidParams("beat times must be strictly increasing".into()));
        }
        if beat_times_s.iter().any(|&t| !(0.0..=source_duration_s).contains(&t)) {
            return Err(TrackerError::InvalidParams("beat time outside the source".into()));
        }
        Ok(BeatGrid { beat_times_s, source_duration_s })
    }

    pub fn times(&self) -> &[f64] {
        &self.beat_times_s
    }

    pub fn len(&self) -> usize {
        self.beat_times_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beat_times_s.is_empty()
    }

    pub fn source_duration_s(&self) -> f64 {
        self.source_duration_s
    }

    pub fn intervals(&self) -> Vec<f64> {
        self.beat_times_s.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn validate_stft(window: usize, hop: usize) -> Result<(), TrackerError> {
    if !window.is_power_of_two() || window < 4 {
        return Err(TrackerError::InvalidParams(format!("window {window} is not a power of two")));
    }
    if hop == 0 || hop > window {
        return Err(TrackerError::InvalidParams(format!("hop {hop} must be in 1..={window}")));
    }
    Ok(())
}

/// Half-wave rectified spectral flux of the mono downmix.
///
/// The signal is zero-padded by one window on each side so that an onset at
/// the very first sample still produces a rise; frame times are frame
/// centres and the first may be negative. The first frame's flux is zero.
pub fn spectral_flux(audio: &AudioBuffer, window: usize, hop: usize) -> Result<OnsetFunction, TrackerError> {
    validate_stft(window, hop)?;
    if audio.len() < window {
        return Err(TrackerError::AudioTooShort { samples: audio.len(), window });
    }
    let mono = audio.to_mono();
    let sr = audio.sample_rate() as f64;
    let mut padded = vec![0.0f32; window];
    padded.extend_from_slice(&mono);
    padded.resize(padded.len() + window, 0.0);

    let hann: Vec<f32> = (0..window)
        .map(|n| {
            let s = (std::f64::consts::PI * n as f64 / window as f64).sin();
            (s * s) as f32
        })
        .collect();
    let fft = RealFftPlanner::<f32>::new().plan_fft_forward(window);
    let bins = window / 2 + 1;
    let mut input = fft.make_input_vec();
    let mut spectrum = fft.make_output_vec();
    let mut scratch = fft.make_scratch_vec();
    let mut prev = vec![0.0f32; bins];
    let mut cur = vec![0.0f32; bins];
    let mut prev_silent = true;
    // First non-zero sample at or after the current frame start.
    let mut next_sound = 0usize;

    let frames = (padded.len() - window) / hop + 1;
    let mut frame_times_s = Vec::with_capacity(frames);
    let mut flux = Vec::with_capacity(frames);
    for t in 0..frames {
        let start = t * hop;
        frame_times_s.push((start as f64 - window as f64 / 2.0) / sr);
        next_sound = next_sound.max(start);
        while next_sound < start + window && padded[next_sound] == 0.0 {
            next_sound += 1;
        }
        if next_sound >= start + window {
            // A silent frame never rises above its predecessor.
            flux.push(0.0);
            if !prev_silent {
                prev.iter_mut().for_each(|m| *m = 0.0);
                prev_silent = true;
            }
            continue;
        }
        let frame = &padded[start..start + window];
        for ((b, &x), &w) in input.iter_mut().zip(frame).zip(&hann) {
            *b = x * w;
        }
        fft.process_with_scratch(&mut input, &mut spectrum, &mut scratch)
            .expect("buffer sizes come from the plan");
        for (m, c) in cur.iter_mut().zip(&spectrum) {
            *m = (c.re * c.re + c.im * c.im).sqrt();
        }
        let value = if t == 0 {
            0.0
        } else {
            cur.iter()
                .zip(&prev)
                .map(|(&c, &p)| (c - p).max(0.0) as f64)
                .sum()
        };
        flux.push(value);
        std::mem::swap(&mut prev, &mut cur);
        prev_silent = false;
    }
    Ok(OnsetFunction { frame_times_s, flux, hop_s: hop as f64 / sr })
}

/// Frame times of flux peaks.
///
/// A peak dominates its `peak_radius` neighbours on both sides and exceeds
/// the local mean plus `threshold_k` standard deviations. Peaks closer than
/// `min_onset_spacing_s` keep only the larger one.
pub fn pick_onsets(onset: &OnsetFunction, config: &TrackerConfig) -> Vec<f64> {
    let f = &onset.flux;
    let n = f.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sum = vec![0.0f64; n + 1];
    let mut sq = vec![0.0f64; n + 1];
    for i in 0..n {
        sum[i + 1] = sum[i] + f[i];
        sq[i + 1] = sq[i] + f[i] * f[i];
    }
    let half = ((config.threshold_window_s / 2.0) / onset.hop_s).round() as usize;
    let r = config.peak_radius;

    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let v = f[i];
            if v <= 0.0 {
                return false;
            }
            let lo = i.saturating_sub(r);
            let hi = (i + r).min(n - 1);
            // Strict on the left so plateaus yield their first frame only.
            if (lo..i).any(|j| f[j] >= v) || (i + 1..=hi).any(|j| f[j] > v) {
                return false;
            }
            let a = i.saturating_sub(half);
            let b = (i + half + 1).min(n);
            let count = (b - a) as f64;
            let mean = (sum[b] - sum[a]) / count;
            let var = ((sq[b] - sq[a]) / count - mean * mean).max(0.0);
            v > mean + config.threshold_k * var.sqrt()
        })
        .collect();

    candidates.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for c in candidates {
        let t = onset.frame_times_s[c];
        if kept
            .iter()
            .all(|&k| (onset.frame_times_s[k] - t).abs() >= config.min_onset_spacing_s)
        {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept.into_iter().map(|i| onset.frame_times_s[i]).collect()
}

/// Moves each onset to the half-maximum rise of the local energy envelope.
///
/// The search region spans half an STFT window either side of the frame
/// estimate. The envelope is a centred 1 ms moving average of the squared
/// downmix; the crossing is linearly interpolated between samples.
pub fn refine_onsets(audio: &AudioBuffer, onsets: &[f64], window: usize) -> Vec<f64> {
    let mono = audio.to_mono();
    let n = mono.len();
    if n == 0 {
        return Vec::new();
    }
    let sr = audio.sample_rate() as f64;
    let box_len = ((sr / 1000.0).round() as usize).max(1);
    let half_box = box_len / 2;
    let reach = window / 2;

    let mut refined: Vec<f64> = Vec::with_capacity(onsets.len());
    for &t in onsets {
        let centre = (t * sr).round().clamp(0.0, (n - 1) as f64) as usize;
        let lo = centre.saturating_sub(reach);
        let hi = (centre + reach).min(n - 1);
        // Envelope over [lo, hi] via prefix sums of x².
        let a = lo.saturating_sub(half_box);
        let b = (hi + box_len - half_box).min(n);
        let mut prefix = Vec::with_capacity(b - a + 1);
        prefix.push(0.0f64);
        for &x in &mono[a..b] {
            let last = *prefix.last().unwrap();
            prefix.push(last + (x as f64) * (x as f64));
        }
        let env = |i: usize| {
            let s = i.saturating_sub(half_box).max(a);
            let e = (i + box_len - half_box).min(b);
            (prefix[e - a] - prefix[s - a]) / box_len as f64
        };
        let (peak_idx, peak) = (lo..=hi)
            .map(|i| (i, env(i)))
            .fold((lo, 0.0f64), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let time = if peak <= 0.0 {
            t.max(0.0)
        } else {
            let level = peak / 2.0;
            let mut i = peak_idx;
            while i > lo && env(i - 1) >= level {
                i -= 1;
            }
            if i == lo {
                lo as f64 / sr
            } else {
                let (e0, e1) = (env(i - 1), env(i));
                let frac = if e1 > e0 { (level - e0) / (e1 - e0) } else { 0.0 };
                ((i - 1) as f64 + frac) / sr
            }
        };
        if refined.last().is_none_or(|&prev| time > prev) {
            refined.push(time);
        }
    }
    refined
}

/// Builds a clean beat grid from onset times.
///
/// The expected interval starts at the median inter-onset interval, or
/// `60 / hint` when a tempo hint is given, and then tracks the median of the
/// last eight accepted intervals. Onsets arriving too early are dropped; a
/// gap of about `n` intervals gets `n - 1` evenly spaced beats inserted.
pub fn build_beat_grid(
    onsets: &[f64],
    expected_tempo_hint: Option<f64>,
    source_duration_s: f64,
    config: &TrackerConfig,
) -> Result<BeatGrid, TrackerError> {
    if onsets.len() < 4 {
        return Err(TrackerError::TooFewOnsets { found: onsets.len() });
    }
    let iois: Vec<f64> = onsets.windows(2).map(|w| w[1] - w[0]).collect();
    let mut expected = match expected_tempo_hint {
        Some(bpm) if bpm > 0.0 => 60.0 / bpm,
        Some(bpm) => return Err(TrackerError::InvalidParams(format!("tempo hint {bpm} bpm"))),
        None => median(&iois),
    };
    let tol = config.ioi_tolerance;
    let mut recent: VecDeque<f64> = VecDeque::with_capacity(8);
    let mut beats = vec![onsets[0].clamp(0.0, source_duration_s)];
    let mut discarded = 0usize;

    for &t in &onsets[1..] {
        let last = *beats.last().unwrap();
        let t = t.min(source_duration_s);
        let ratio = (t - last) / expected;
        let whole = ratio.round();
        if (ratio - 1.0).abs() <= tol {
            recent.push_back(t - last);
        } else if ratio < 1.0 - tol {
            discarded += 1;
            continue;
        } else if whole >= 2.0 && (ratio - whole).abs() <= tol {
            let step = (t - last) / whole;
            for m in 1..whole as usize {
                beats.push(last + m as f64 * step);
            }
            recent.push_back(step);
        } else {
            // Irregular gap: keep the onset as a new anchor, drop the interval.
            discarded += 1;
        }
        if recent.len() > 8 {
            recent.pop_front();
        }
        if !recent.is_empty() {
            expected = median(recent.make_contiguous());
        }
        beats.push(t);
    }

    let total = iois.len();
    if discarded as f64 > config.max_discard_ratio * total as f64 {
        return Err(TrackerError::UnstableTempo { discarded, total });
    }
    BeatGrid::new(beats, source_duration_s)
}

/// `60 / median(inter-beat interval)`.
pub fn estimate_reference_tempo(grid: &BeatGrid) -> Result<f64, TrackerError> {
    if grid.len() < 4 {
        return Err(TrackerError::TooFewBeats { found: grid.len(), needed: 4 });
    }
    Ok(60.0 / median(&grid.intervals()))
}

/// Everything the tracker computed for one input.
#[derive(Debug, Clone)]
pub struct BeatTracking {
    pub onset_function: OnsetFunction,
    pub onsets_s: Vec<f64>,
    pub grid: BeatGrid,
}

/// Runs the full tracker on `audio`.
pub fn track_beats(
    audio: &AudioBuffer,
    tempo_hint: Option<f64>,
    config: &TrackerConfig,
) -> Result<BeatTracking, TrackerError> {
    let onset_function = spectral_flux(audio, config.window, config.hop)?;
    let coarse = pick_onsets(&onset_function, config);
    let onsets_s = if config.refine {
        refine_onsets(audio, &coarse, config.window)
    } else {
        coarse
    };
    let grid = build_beat_grid(&onsets_s, tempo_hint, audio.duration_s(), config)?;
    Ok(BeatTracking { onset_function, onsets_s, grid })
}
