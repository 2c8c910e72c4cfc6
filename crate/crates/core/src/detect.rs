//! Blind detection of tempo modulation.
//!
//! The warden tracks beats, measures per-beat tempo and looks for two
//! fingerprints: many beats off the median tempo, and those deviations
//! clustering at a single magnitude (the symmetric ±Δ levels).

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::extract::{unit_tempi, ExtractError};
use crate::tracker::{median, track_beats, TrackerConfig, TrackerError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("TooFewBeats: found {found}, need at least {needed}")]
    TooFewBeats { found: usize, needed: usize },
    #[error("EmptySet: {0} set is empty")]
    EmptySet(&'static str),
    #[error(transparent)]
    Tracker(#[from] TrackerError),
}

impl DetectError {
    pub fn name(&self) -> &'static str {
        match self {
            DetectError::TooFewBeats { .. } => "TooFewBeats",
            DetectError::EmptySet(_) => "EmptySet",
            DetectError::Tracker(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Relative distance from the median tempo beyond which a unit deviates.
    pub deviation_gate: f64,
    /// Deviation ratio at which the ratio term saturates to 1.
    pub ratio_saturation: f64,
    /// Relative band around the estimated delta counted as the same level.
    pub level_tolerance: f64,
    pub stego_threshold: f64,
    pub clean_threshold: f64,
    pub min_beats: usize,
    pub histogram_bin_bpm: f64,
    pub tracker: TrackerConfig,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            deviation_gate: 0.0025,
            ratio_saturation: 0.2,
            level_tolerance: 0.2,
            stego_threshold: 0.6,
            clean_threshold: 0.3,
            min_beats: 16,
            histogram_bin_bpm: 0.25,
            tracker: TrackerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Clean,
    Stego,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Clean => "CLEAN",
            Verdict::Stego => "STEGO",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub verdict: Verdict,
    pub score: f64,
    pub estimated_delta_bpm: Option<f64>,
    pub deviation_ratio: f64,
    /// Fraction of deviating units within the level tolerance of the estimated delta.
    pub level_consistency: f64,
    pub median_tempo_bpm: f64,
    pub units: usize,
    /// `(bin_start_bpm, count)` pairs, ascending.
    pub histogram: Vec<(f64, usize)>,
}

impl DetectionReport {
    /// Key/value lines followed by the histogram as `bin_start,count` rows.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verdict={}", self.verdict);
        let _ = writeln!(out, "score={:.6}", self.score);
        match self.estimated_delta_bpm {
            Some(d) => {
                let _ = writeln!(out, "estimated_delta_bpm={d:.4}");
            }
            None => out.push_str("estimated_delta_bpm=none\n"),
        }
        let _ = writeln!(out, "deviation_ratio={:.6}", self.deviation_ratio);
        let _ = writeln!(out, "level_consistency={:.6}", self.level_consistency);
        let _ = writeln!(out, "median_tempo_bpm={:.4}", self.median_tempo_bpm);
        let _ = writeln!(out, "units={}", self.units);
        out.push_str("[histogram]\nbin_start,count\n");
        for (start, count) in &self.histogram {
            let _ = writeln!(out, "{start:.4},{count}");
        }
        out
    }
}

fn histogram(values: &[f64], bin: f64) -> Vec<(f64, usize)> {
    let Some(lo) = values.iter().cloned().reduce(f64::min) else {
        return Vec::new();
    };
    let first = (lo / bin).floor();
    let mut counts: Vec<usize> = Vec::new();
    for &v in values {
        let i = ((v / bin).floor() - first) as usize;
        if counts.len() <= i {
            counts.resize(i + 1, 0);
        }
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| ((first + i as f64) * bin, c))
        .collect()
}

/// Scores per-beat tempi; the statistic behind [`detect`].
pub fn score_tempi(tempi: &[f64], config: &DetectorConfig) -> DetectionReport {
    let m = median(tempi);
    let deviations: Vec<f64> = tempi
        .iter()
        .map(|t| (t - m).abs())
        .filter(|&d| d > config.deviation_gate * m)
        .collect();
    let deviation_ratio = deviations.len() as f64 / tempi.len() as f64;
    let estimated_delta_bpm = (!deviations.is_empty()).then(|| median(&deviations));
    let level_consistency = match estimated_delta_bpm {
        Some(d) => {
            deviations
                .iter()
                .filter(|&&x| (x - d).abs() <= config.level_tolerance * d)
                .count() as f64
                / deviations.len() as f64
        }
        None => 0.0,
    };
    let score = (0.5 * (deviation_ratio / config.ratio_saturation).min(1.0) + 0.5 * level_consistency).clamp(0.0, 1.0);
    let verdict = if score >= config.stego_threshold {
        Verdict::Stego
    } else if score <= config.clean_threshold {
        Verdict::Clean
    } else {
        Verdict::Inconclusive
    };
    DetectionReport {
        verdict,
        score,
        estimated_delta_bpm,
        deviation_ratio,
        level_consistency,
        median_tempo_bpm: m,
        units: tempi.len(),
        histogram: histogram(tempi, config.histogram_bin_bpm),
    }
}

/// Decides whether `audio` carries tempo modulation, without any key.
pub fn detect(audio: &AudioBuffer, config: &DetectorConfig) -> Result<DetectionReport, DetectError> {
    let grid = match track_beats(audio, None, &config.tracker) {
        Ok(t) => t.grid,
        Err(TrackerError::TooFewOnsets { found }) => {
            return Err(DetectError::TooFewBeats { found, needed: config.min_beats })
        }
        Err(e) => return Err(e.into()),
    };
    if grid.len() < config.min_beats {
        return Err(DetectError::TooFewBeats { found: grid.len(), needed: config.min_beats });
    }
    let tempi: Vec<f64> = match unit_tempi(&grid, 1) {
        Ok(u) => u.into_iter().map(|u| u.tempo_bpm).collect(),
        Err(ExtractError::TooFewBeats { found, .. }) => {
            return Err(DetectError::TooFewBeats { found, needed: config.min_beats })
        }
        Err(e) => unreachable!("unit grouping with phi=1: {e}"),
    };
    Ok(score_tempi(&tempi, config))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(false_positive_rate, true_positive_rate)` from (0, 0) to (1, 1).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC over every distinct score threshold, with trapezoidal area.
pub fn roc_from_scores(clean: &[f64], stego: &[f64]) -> Result<RocCurve, DetectError> {
    if clean.is_empty() {
        return Err(DetectError::EmptySet("clean"));
    }
    if stego.is_empty() {
        return Err(DetectError::EmptySet("stego"));
    }
    let mut thresholds: Vec<f64> = clean.iter().chain(stego).cloned().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let rate = |set: &[f64], t: f64| set.iter().filter(|&&s| s >= t).count() as f64 / set.len() as f64;
    let mut points = vec![(0.0, 0.0)];
    points.extend(thresholds.iter().map(|&t| (rate(clean, t), rate(stego, t))));
    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}

/// Runs [`detect`] over both sets and summarises separability.
pub fn batch_evaluate(
    clean: &[AudioBuffer],
    stego: &[AudioBuffer],
    config: &DetectorConfig,
) -> Result<(RocCurve, Vec<DetectionReport>, Vec<DetectionReport>), DetectError> {
    if clean.is_empty() {
        return Err(DetectError::EmptySet("clean"));
    }
    if stego.is_empty() {
        return Err(DetectError::EmptySet("stego"));
    }
    let run = |set: &[AudioBuffer]| set.iter().map(|a| detect(a, config)).collect::<Result<Vec<_>, _>>();
    let clean_reports = run(clean)?;
    let stego_reports = run(stego)?;
    let scores = |r: &[DetectionReport]| r.iter().map(|r| r.score).collect::<Vec<_>>();
    let roc = roc_from_scores(&scores(&clean_reports), &scores(&stego_reports))?;
    Ok((roc, clean_reports, stego_reports))
}
