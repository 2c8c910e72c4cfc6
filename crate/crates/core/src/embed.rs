//! Tempo planning and steganogram synthesis.
//!
//! Each symbol occupies one unit of `phi` beats of the cover, starting at the
//! first beat. The unit's source audio is played at `X + Δ`, `X - Δ` or `X`
//! bpm for plus, minus and zero respectively; everything outside the plan is
//! copied through untouched.

use std::fmt;

use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::codec::{encode_text_with, CodeTable, CodecError, Symbol, SymbolStream};
use crate::tsm::{speed_factor, stretch_samples, TsmError};

/// Largest accepted Δ/X; the resampler is specified for factors in [0.9, 1.1].
pub const MAX_DELTA_RATIO: f64 = 0.10;

/// Δ/X up to which no listener noticed the modulation.
pub const AUDIBILITY_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("InsufficientCapacity: message needs {needed} units, cover holds {available}")]
    InsufficientCapacity { needed: usize, available: usize },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Tsm(#[from] TsmError),
}

impl EmbedError {
    pub fn name(&self) -> &'static str {
        match self {
            EmbedError::InvalidParams(_) => "InvalidParams",
            EmbedError::InsufficientCapacity { .. } => "InsufficientCapacity",
            EmbedError::Codec(e) => e.name(),
            EmbedError::Tsm(e) => e.name(),
        }
    }
}

/// The stego key shared between sender and receiver, plus where the message starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedParams {
    /// Cover tempo X in bpm; encodes `Zero`.
    pub reference_tempo: f64,
    /// Tempo offset Δ in bpm for `Plus` and `Minus`.
    pub delta: f64,
    /// Beats per unit.
    pub phi: u32,
    /// Time of the first beat in the cover, in seconds.
    pub first_beat_offset: f64,
}

impl EmbedParams {
    pub fn new(reference_tempo: f64, delta: f64, phi: u32) -> Self {
        EmbedParams { reference_tempo, delta, phi, first_beat_offset: 0.0 }
    }

    pub fn with_offset(mut self, first_beat_offset: f64) -> Self {
        self.first_beat_offset = first_beat_offset;
        self
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: String| Err(EmbedError::InvalidParams(m));
        let x = self.reference_tempo;
        if !(40.0..=300.0).contains(&x) {
            return bad(format!("reference tempo {x} bpm outside [40, 300]"));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return bad(format!("delta {} bpm must be positive", self.delta));
        }
        if self.delta_ratio() - MAX_DELTA_RATIO > 1e-12 {
            return bad(format!(
                "delta {} bpm is {:.1}% of the reference tempo, above the 10% cap",
                self.delta,
                self.delta_ratio() * 100.0
            ));
        }
        if self.phi == 0 {
            return bad("phi must be at least one beat".into());
        }
        if !(self.first_beat_offset >= 0.0 && self.first_beat_offset.is_finite()) {
            return bad(format!("first beat offset {} s", self.first_beat_offset));
        }
        Ok(())
    }

    /// Δ / X.
    pub fn delta_ratio(&self) -> f64 {
        self.delta / self.reference_tempo
    }

    /// True when Δ/X exceeds 1%, the largest change no listener noticed.
    pub fn exceeds_audibility_margin(&self) -> bool {
        // Slack absorbs rounding in Δ/X so that e.g. Δ=1.1, X=110 sits on the boundary.
        self.delta_ratio() - AUDIBILITY_MARGIN > 1e-12
    }

    pub fn warnings(&self) -> Vec<EmbedWarning> {
        if self.exceeds_audibility_margin() {
            vec![EmbedWarning::AudibleTempoChange { ratio: self.delta_ratio() }]
        } else {
            Vec::new()
        }
    }

    /// Seconds of cover consumed by one unit at the reference tempo.
    pub fn unit_duration_s(&self) -> f64 {
        self.phi as f64 * 60.0 / self.reference_tempo
    }

    pub fn tempo_for(&self, symbol: Symbol) -> f64 {
        self.reference_tempo + symbol.sign() * self.delta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbedWarning {
    AudibleTempoChange { ratio: f64 },
}

impl fmt::Display for EmbedWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedWarning::AudibleTempoChange { ratio } => write!(
                f,
                "tempo change of {:.2}% exceeds the 1% margin and may be audible",
                ratio * 100.0
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedUnit {
    pub symbol: Symbol,
    pub tempo_bpm: f64,
    pub source_start_s: f64,
    pub source_end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TempoPlan {
    pub units: Vec<PlannedUnit>,
}

impl TempoPlan {
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Source interval covered by the plan, if any.
    pub fn span_s(&self) -> Option<(f64, f64)> {
        Some((self.units.first()?.source_start_s, self.units.last()?.source_end_s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capacity {
    pub units: usize,
    /// Rough character count assuming five units per character.
    pub estimated_chars: usize,
}

impl Capacity {
    fn from_units(units: usize) -> Self {
        Capacity { units, estimated_chars: units / 5 }
    }
}

/// Whole units that fit between the first beat and the end of the cover.
pub fn capacity(params: &EmbedParams, cover_duration_s: f64) -> Capacity {
    let usable = cover_duration_s - params.first_beat_offset;
    let units = (usable * params.reference_tempo / (60.0 * params.phi as f64) + 1e-9).floor();
    Capacity::from_units(if units > 0.0 { units as usize } else { 0 })
}

fn build_plan(stream: &SymbolStream, params: &EmbedParams, available: usize) -> Result<TempoPlan, EmbedError> {
    if stream.len() > available {
        return Err(EmbedError::InsufficientCapacity { needed: stream.len(), available });
    }
    let unit = params.unit_duration_s();
    let units = stream
        .iter()
        .enumerate()
        .map(|(k, &symbol)| PlannedUnit {
            symbol,
            tempo_bpm: params.tempo_for(symbol),
            source_start_s: params.first_beat_offset + k as f64 * unit,
            source_end_s: params.first_beat_offset + (k + 1) as f64 * unit,
        })
        .collect();
    Ok(TempoPlan { units })
}

/// Lays `stream` out over consecutive units of the cover.
pub fn plan(stream: &SymbolStream, params: &EmbedParams, cover_duration_s: f64) -> Result<TempoPlan, EmbedError> {
    params.validate()?;
    build_plan(stream, params, capacity(params, cover_duration_s).units)
}

fn boundary_sample(params: &EmbedParams, k: usize, sample_rate: u32) -> usize {
    ((params.first_beat_offset + k as f64 * params.unit_duration_s()) * sample_rate as f64).round() as usize
}

/// Units whose sample range fits inside a cover of `len` samples.
pub fn capacity_in_samples(params: &EmbedParams, len: usize, sample_rate: u32) -> Capacity {
    let approx = capacity(params, (len as f64 + 0.5) / sample_rate as f64).units;
    let mut k = approx + 1;
    while k > 0 && boundary_sample(params, k, sample_rate) > len {
        k -= 1;
    }
    Capacity::from_units(k)
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub stego: AudioBuffer,
    pub plan: TempoPlan,
    pub symbols: SymbolStream,
    pub warnings: Vec<EmbedWarning>,
    /// Capacity of the cover in units.
    pub capacity: Capacity,
}

/// Encodes `message` with the standard table and embeds it into `cover`.
pub fn embed(cover: &AudioBuffer, message: &str, params: &EmbedParams) -> Result<Embedding, EmbedError> {
    embed_with(cover, message, params, CodeTable::standard(), false)
}

pub fn embed_with(
    cover: &AudioBuffer,
    message: &str,
    params: &EmbedParams,
    table: &CodeTable,
    lenient: bool,
) -> Result<Embedding, EmbedError> {
    params.validate()?;
    let encoded = encode_text_with(message, table, lenient)?;
    embed_symbols(cover, &encoded.stream, params)
}

/// Embeds an already encoded stream.
pub fn embed_symbols(cover: &AudioBuffer, stream: &SymbolStream, params: &EmbedParams) -> Result<Embedding, EmbedError> {
    params.validate()?;
    let warnings = params.warnings();
    for w in &warnings {
        log::warn!("{w}");
    }
    let sr = cover.sample_rate();
    let cap = capacity_in_samples(params, cover.len(), sr);
    let plan = build_plan(stream, params, cap.units)?;
    if plan.is_empty() {
        return Ok(Embedding { stego: cover.clone(), plan, symbols: stream.clone(), warnings, capacity: cap });
    }

    let bounds: Vec<usize> = (0..=plan.len()).map(|k| boundary_sample(params, k, sr)).collect();
    let mut out: Vec<Vec<f32>> = cover.channels().iter().map(|c| c[..bounds[0]].to_vec()).collect();
    for (unit, w) in plan.units.iter().zip(bounds.windows(2)) {
        if w[0] == w[1] {
            return Err(TsmError::EmptySegment.into());
        }
        let factor = speed_factor(params, unit.symbol);
        for (dst, src) in out.iter_mut().zip(cover.channels()) {
            dst.extend_from_slice(&stretch_samples(&src[w[0]..w[1]], factor));
        }
    }
    let tail = bounds[plan.len()];
    for (dst, src) in out.iter_mut().zip(cover.channels()) {
        dst.extend_from_slice(&src[tail..]);
    }
    let stego = AudioBuffer::new(sr, out).expect("channel layout preserved");
    Ok(Embedding { stego, plan, symbols: stream.clone(), warnings, capacity: cap })
}
