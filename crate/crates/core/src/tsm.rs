//! Time-scale modification by band-limited resampling.
//!
//! Playing a segment `factor` times faster shortens it to
//! `round(len / factor)` samples and shifts its pitch by the same factor.
//! Interpolation uses a Kaiser-windowed sinc with 16 zero crossings per side,
//! so every output sample draws on at least 32 input taps. When speeding up,
//! the kernel is widened to low-pass at the new Nyquist rate.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::codec::Symbol;
use crate::embed::EmbedParams;

const ZERO_CROSSINGS: usize = 16;
const TABLE_RESOLUTION: usize = 512;
const KAISER_BETA: f64 = 8.6;

/// Speed factors inside this band stay within a 1% tempo change.
pub const INAUDIBLE_BAND: (f64, f64) = (0.99, 1.01);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TsmError {
    #[error("EmptySegment: cannot stretch an empty segment")]
    EmptySegment,
    #[error("InvalidFactor: speed factor {0} must be positive and finite")]
    InvalidFactor(f64),
}

impl TsmError {
    pub fn name(&self) -> &'static str {
        match self {
            TsmError::EmptySegment => "EmptySegment",
            TsmError::InvalidFactor(_) => "InvalidFactor",
        }
    }
}

/// Ratio of output tempo to input tempo.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpeedFactor(f64);

impl SpeedFactor {
    pub const UNITY: SpeedFactor = SpeedFactor(1.0);

    pub fn new(value: f64) -> Result<Self, TsmError> {
        if value > 0.0 && value.is_finite() {
            Ok(SpeedFactor(value))
        } else {
            Err(TsmError::InvalidFactor(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_unity(self) -> bool {
        self.0 == 1.0
    }

    /// True outside the 1% band in which tempo changes went unnoticed by listeners.
    pub fn exceeds_inaudible_band(self) -> bool {
        self.0 < INAUDIBLE_BAND.0 || self.0 > INAUDIBLE_BAND.1
    }

    /// Samples produced from `input_len` samples, rounded half-up.
    pub fn output_len(self, input_len: usize) -> usize {
        (input_len as f64 / self.0 + 0.5).floor() as usize
    }
}

/// `(X + sΔ) / X` for symbol sign `s`.
pub fn speed_factor(params: &EmbedParams, symbol: Symbol) -> SpeedFactor {
    match symbol {
        Symbol::Zero => SpeedFactor::UNITY,
        s => SpeedFactor((params.reference_tempo + s.sign() * params.delta) / params.reference_tempo),
    }
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..64 {
        term *= (half / k as f64).powi(2);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Windowed sinc sampled on `[0, ZERO_CROSSINGS]` at `TABLE_RESOLUTION` points per unit.
fn kernel_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = ZERO_CROSSINGS * TABLE_RESOLUTION;
        let norm = bessel_i0(KAISER_BETA);
        (0..=n + 1)
            .map(|i| {
                let u = i as f64 / TABLE_RESOLUTION as f64;
                let r = u / ZERO_CROSSINGS as f64;
                if r >= 1.0 {
                    return 0.0;
                }
                let sinc = if u == 0.0 {
                    1.0
                } else {
                    let a = std::f64::consts::PI * u;
                    a.sin() / a
                };
                sinc * bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / norm
            })
            .collect()
    })
}

#[inline]
fn kernel(table: &[f64], u: f64) -> f64 {
    let pos = u.abs() * TABLE_RESOLUTION as f64;
    let idx = pos as usize;
    if idx >= ZERO_CROSSINGS * TABLE_RESOLUTION {
        return 0.0;
    }
    let frac = pos - idx as f64;
    table[idx] + (table[idx + 1] - table[idx]) * frac
}

/// Interpolation filters for fractional positions `k / PHASES`, `k = 0..=PHASES`.
/// Each filter has `2 * radius + 1` taps for input offsets `-radius..=radius`
/// around the integer part and sums to one.
struct FilterBank {
    radius: usize,
    taps: usize,
    coeffs: Vec<f32>,
}

const PHASES: usize = 512;

impl FilterBank {
    fn new(cutoff: f64) -> Self {
        let table = kernel_table();
        let radius = (ZERO_CROSSINGS as f64 / cutoff).ceil() as usize;
        let taps = 2 * radius + 1;
        let mut coeffs = Vec::with_capacity((PHASES + 1) * taps);
        for k in 0..=PHASES {
            let frac = k as f64 / PHASES as f64;
            // Tap m reads input index base + m - radius, at distance frac - (m - radius).
            let w: Vec<f64> = (0..taps)
                .map(|m| kernel(table, (frac - (m as f64 - radius as f64)) * cutoff))
                .collect();
            let sum: f64 = w.iter().sum();
            coeffs.extend(w.iter().map(|x| (x / sum) as f32));
        }
        FilterBank { radius, taps, coeffs }
    }

    /// Shared bank for `factor`; embedding reuses the same two factors for every unit.
    fn for_factor(factor: f64) -> Arc<FilterBank> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<FilterBank>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = factor.to_bits();
        if let Some(bank) = cache.lock().unwrap().get(&key) {
            return Arc::clone(bank);
        }
        let bank = Arc::new(FilterBank::new(factor.recip().min(1.0)));
        let mut map = cache.lock().unwrap();
        if map.len() >= 16 {
            map.clear();
        }
        map.insert(key, Arc::clone(&bank));
        bank
    }

    fn phase(&self, k: usize) -> &[f32] {
        &self.coeffs[k * self.taps..(k + 1) * self.taps]
    }
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0.0f32; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f32 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f32>() + tail
}

/// Resamples one channel, reading input position `j * factor` for output sample `j`.
/// Samples outside the input are treated as zero.
fn resample(input: &[f32], factor: f64, out_len: usize) -> Vec<f32> {
    let bank = FilterBank::for_factor(factor);
    let r = bank.radius;
    let mut padded = vec![0.0f32; input.len() + 2 * r + 2];
    padded[r..r + input.len()].copy_from_slice(input);
    // Non-zero samples before each index, so silent windows cost nothing.
    let mut sound = Vec::with_capacity(padded.len() + 1);
    sound.push(0u32);
    for &x in &padded {
        sound.push(sound.last().unwrap() + (x != 0.0) as u32);
    }
    (0..out_len)
        .map(|j| {
            let p = j as f64 * factor;
            let base = p.floor();
            if sound[base as usize + bank.taps] == sound[base as usize] {
                return 0.0;
            }
            let pos = (p - base) * PHASES as f64;
            let k = (pos as usize).min(PHASES - 1);
            let a = (pos - k as f64) as f32;
            // padded[base + r + m - r] == input[base + m - r]
            let window = &padded[base as usize..base as usize + bank.taps];
            let lo = dot(window, bank.phase(k));
            let hi = dot(window, bank.phase(k + 1));
            lo + (hi - lo) * a
        })
        .collect()
}

/// Stretches one channel; callers handle the empty case.
pub(crate) fn stretch_samples(samples: &[f32], factor: SpeedFactor) -> Vec<f32> {
    if factor.is_unity() {
        return samples.to_vec();
    }
    resample(samples, factor.value(), factor.output_len(samples.len()))
}

/// Stretches every channel of `segment` by `factor`. A unity factor returns
/// an exact copy.
pub fn stretch(segment: &AudioBuffer, factor: SpeedFactor) -> Result<AudioBuffer, TsmError> {
    if segment.is_empty() {
        return Err(TsmError::EmptySegment);
    }
    if factor.is_unity() {
        return Ok(segment.clone());
    }
    let channels = segment.channels().iter().map(|c| stretch_samples(c, factor)).collect();
    Ok(AudioBuffer::new(segment.sample_rate(), channels).expect("channel layout preserved"))
}
