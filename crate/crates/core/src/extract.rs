//! Message recovery from a tempo-modulated track.

use std::fmt::Write as _;

use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::codec::{decode_symbols, CodeTable, CodecError, Symbol, SymbolStream};
use crate::tracker::{estimate_reference_tempo, track_beats, BeatGrid, TrackerConfig, TrackerError};

/// Consecutive zero units that end a message; a valid stream never has more than two.
pub const TERMINATOR_ZEROS: usize = 3;

pub const TEMPO_TRACK_CSV_HEADER: &str = "unit_index,start_time_s,tempo_bpm,symbol";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("TooFewBeats: found {found}, need at least {needed}")]
    TooFewBeats { found: usize, needed: usize },
    #[error("NoMessage: every unit is at the reference tempo")]
    NoMessage,
    #[error(transparent)]
    Tracker(#[from] TrackerError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

impl ExtractError {
    pub fn name(&self) -> &'static str {
        match self {
            ExtractError::InvalidParams(_) => "InvalidParams",
            ExtractError::TooFewBeats { .. } => "TooFewBeats",
            ExtractError::NoMessage => "NoMessage",
            ExtractError::Tracker(e) => e.name(),
            ExtractError::Codec(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTempo {
    pub start_s: f64,
    pub tempo_bpm: f64,
}

/// Local tempo of each complete group of `phi` beats, anchored at the first beat.
pub fn unit_tempi(grid: &BeatGrid, phi: u32) -> Result<Vec<UnitTempo>, ExtractError> {
    if phi == 0 {
        return Err(ExtractError::InvalidParams("phi must be at least one beat".into()));
    }
    let phi = phi as usize;
    let t = grid.times();
    if t.len() < phi + 1 {
        return Err(ExtractError::TooFewBeats { found: t.len(), needed: phi + 1 });
    }
    Ok((0..(t.len() - 1) / phi)
        .map(|k| {
            let (a, b) = (t[k * phi], t[(k + 1) * phi]);
            UnitTempo { start_s: a, tempo_bpm: 60.0 * phi as f64 / (b - a) }
        })
        .collect())
}

/// Three-level decision with a dead zone of width `delta` centred on `x_ref`.
/// Boundaries belong to the outer levels.
pub fn classify_tempo(tempo_bpm: f64, x_ref: f64, delta: f64) -> Symbol {
    if tempo_bpm >= x_ref + delta / 2.0 {
        Symbol::Plus
    } else if tempo_bpm <= x_ref - delta / 2.0 {
        Symbol::Minus
    } else {
        Symbol::Zero
    }
}

pub fn classify(tempi: &[f64], x_ref: f64, delta: f64) -> SymbolStream {
    tempi.iter().map(|&t| classify_tempo(t, x_ref, delta)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackUnit {
    pub index: usize,
    pub start_s: f64,
    pub tempo_bpm: f64,
    pub symbol: Symbol,
}

/// Per-unit tempo and symbol, as recovered by the receiver.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TempoTrack {
    pub units: Vec<TrackUnit>,
}

impl TempoTrack {
    pub fn from_tempi(tempi: &[UnitTempo], x_ref: f64, delta: f64) -> Self {
        TempoTrack {
            units: tempi
                .iter()
                .enumerate()
                .map(|(index, u)| TrackUnit {
                    index,
                    start_s: u.start_s,
                    tempo_bpm: u.tempo_bpm,
                    symbol: classify_tempo(u.tempo_bpm, x_ref, delta),
                })
                .collect(),
        }
    }

    pub fn symbols(&self) -> SymbolStream {
        self.units.iter().map(|u| u.symbol).collect()
    }

    /// `unit_index,start_time_s,tempo_bpm,symbol` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.units.len() + 1));
        out.push_str(TEMPO_TRACK_CSV_HEADER);
        out.push('\n');
        for u in &self.units {
            let _ = writeln!(out, "{},{:.6},{:.4},{}", u.index, u.start_s, u.tempo_bpm, u.symbol);
        }
        out
    }
}

/// Drops leading zeros and cuts at the first run of [`TERMINATOR_ZEROS`] zeros.
/// Returns `None` when no non-zero symbol exists.
pub fn trim_message(stream: &SymbolStream) -> Option<SymbolStream> {
    let s = stream.symbols();
    let start = s.iter().position(|x| !x.is_zero())?;
    let mut end = s.len();
    let mut run = 0;
    for (i, sym) in s.iter().enumerate().skip(start) {
        if sym.is_zero() {
            run += 1;
            if run == TERMINATOR_ZEROS {
                end = i + 1 - run;
                break;
            }
        } else {
            run = 0;
        }
    }
    let mut body = s[start..end].to_vec();
    while body.last().is_some_and(|x| x.is_zero()) {
        body.pop();
    }
    Some(SymbolStream(body))
}

/// Receiver settings: the shared key plus tracker tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractConfig {
    pub phi: u32,
    pub delta: f64,
    /// Reference tempo; estimated from the beat grid when absent.
    pub reference_tempo: Option<f64>,
    pub strict: bool,
    pub tracker: TrackerConfig,
}

impl ExtractConfig {
    pub fn new(phi: u32, delta: f64) -> Self {
        ExtractConfig { phi, delta, reference_tempo: None, strict: true, tracker: TrackerConfig::default() }
    }

    pub fn with_reference_tempo(mut self, x: f64) -> Self {
        self.reference_tempo = Some(x);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub message: String,
    pub track: TempoTrack,
    pub grid: BeatGrid,
    pub reference_tempo: f64,
    pub reference_tempo_estimated: bool,
    /// The trimmed stream handed to the decoder.
    pub symbols: SymbolStream,
}

/// Recovers the hidden message using the standard table.
pub fn extract(audio: &AudioBuffer, config: &ExtractConfig) -> Result<Extraction, ExtractError> {
    extract_with(audio, config, CodeTable::standard())
}

pub fn extract_with(audio: &AudioBuffer, config: &ExtractConfig, table: &CodeTable) -> Result<Extraction, ExtractError> {
    if config.delta.is_nan() || config.delta <= 0.0 {
        return Err(ExtractError::InvalidParams(format!("delta {} bpm must be positive", config.delta)));
    }
    if config.phi == 0 {
        return Err(ExtractError::InvalidParams("phi must be at least one beat".into()));
    }
    let tracking = track_beats(audio, config.reference_tempo, &config.tracker)?;
    let grid = tracking.grid;
    let (x_ref, estimated) = match config.reference_tempo {
        Some(x) => (x, false),
        None => {
            let x = estimate_reference_tempo(&grid)?;
            log::info!("estimated reference tempo {x:.3} bpm from {} beats", grid.len());
            (x, true)
        }
    };
    let tempi = unit_tempi(&grid, config.phi)?;
    let track = TempoTrack::from_tempi(&tempi, x_ref, config.delta);
    let symbols = trim_message(&track.symbols()).ok_or(ExtractError::NoMessage)?;
    let message = decode_symbols(&symbols, table, config.strict)?;
    Ok(Extraction { message, track, grid, reference_tempo: x_ref, reference_tempo_estimated: estimated, symbols })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Symbol::{Minus as M, Plus as P, Zero as Z};

    #[test]
    fn constant_intervals() {
        let g = BeatGrid::new(vec![0.0, 0.5, 1.0], 1.0).unwrap();
        let t = unit_tempi(&g, 1).unwrap();
        assert_eq!(t.iter().map(|u| u.tempo_bpm).collect::<Vec<_>>(), vec![120.0, 120.0]);
    }

    #[test]
    fn faster_second_unit() {
        let g = BeatGrid::new(vec![0.0, 0.5, 0.9959], 1.0).unwrap();
        let t = unit_tempi(&g, 1).unwrap();
        assert!((t[0].tempo_bpm - 120.0).abs() < 1e-9);
        assert!((t[1].tempo_bpm - 121.0).abs() < 0.05, "{}", t[1].tempo_bpm);
    }

    #[test]
    fn needs_phi_plus_one_beats() {
        let g = BeatGrid::new(vec![0.0, 0.5, 1.0], 1.0).unwrap();
        assert_eq!(unit_tempi(&g, 3), Err(ExtractError::TooFewBeats { found: 3, needed: 4 }));
    }

    #[test]
    fn trailing_partial_unit_dropped() {
        let g = BeatGrid::new((0..8).map(|k| k as f64 * 0.5).collect(), 4.0).unwrap();
        let t = unit_tempi(&g, 3).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].start_s, 1.5);
    }

    #[test]
    fn dead_zone() {
        assert_eq!(classify_tempo(121.0, 120.0, 1.0), P);
        assert_eq!(classify_tempo(120.4, 120.0, 1.0), Z);
        assert_eq!(classify_tempo(119.5, 120.0, 1.0), M);
        assert_eq!(classify_tempo(120.5, 120.0, 1.0), P);
    }

    #[test]
    fn trimming() {
        let s = |t: &str| SymbolStream::from_text_form(t).unwrap();
        assert_eq!(trim_message(&s("00+0-00+000-+")), Some(s("+0-00+")));
        assert_eq!(trim_message(&s("+00-00")), Some(s("+00-")));
        assert_eq!(trim_message(&s("0000")), None);
        assert_eq!(trim_message(&s("")), None);
    }

    #[test]
    fn csv_format() {
        let tempi = [UnitTempo { start_s: 0.0, tempo_bpm: 121.0 }, UnitTempo { start_s: 0.4959, tempo_bpm: 120.0 }];
        let csv = TempoTrack::from_tempi(&tempi, 120.0, 1.0).to_csv();
        assert_eq!(
            csv,
            "unit_index,start_time_s,tempo_bpm,symbol\n0,0.000000,121.0000,+\n1,0.495900,120.0000,0\n"
        );
    }
}
