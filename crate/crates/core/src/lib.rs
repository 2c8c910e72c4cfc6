//! Hide text in the tempo of constant-bpm audio, recover it, and detect it.
//!
//! A message is encoded with a three-valued Morse code ([`codec`]). Every
//! symbol occupies `phi` beats of the cover and is realised by playing those
//! beats at the reference tempo plus, minus, or exactly at the reference
//! ([`embed`], backed by [`tsm`]). The receiver tracks beats ([`tracker`]),
//! measures per-unit tempo and decodes ([`extract`]); a warden without the
//! key can still score a track for modulation ([`detect`]).
//!
//! ```no_run
//! use tempo_steg::{audio, embed, extract};
//!
//! let cover = audio::synth_click_track(120.0, 240, 44100)?;
//! let params = embed::EmbedParams::new(120.0, 1.0, 1);
//! let stego = embed::embed(&cover, "steganography is a dancer!", &params)?.stego;
//! let found = extract::extract(&stego, &extract::ExtractConfig::new(1, 1.0))?;
//! assert_eq!(found.message, "steganography is a dancer!");
//! # Ok::<(), tempo_steg::Error>(())
//! ```

pub mod audio;
pub mod cli;
pub mod codec;
pub mod detect;
pub mod embed;
pub mod extract;
pub mod tracker;
pub mod tsm;

pub use audio::{read_wav, synth_click_track, write_wav, AudioBuffer, ClickTrack};
pub use codec::{decode_symbols, encode_text, CodeTable, Symbol, SymbolStream};
pub use detect::{detect, DetectionReport, DetectorConfig, Verdict};
pub use embed::{embed, EmbedParams, Embedding, TempoPlan};
pub use extract::{extract, ExtractConfig, Extraction, TempoTrack};
pub use tracker::{track_beats, BeatGrid, TrackerConfig};
pub use tsm::{stretch, SpeedFactor};

use thiserror::Error;

/// Any error raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Audio(#[from] audio::AudioError),
    #[error(transparent)]
    Codec(#[from] codec::CodecError),
    #[error(transparent)]
    Tsm(#[from] tsm::TsmError),
    #[error(transparent)]
    Embed(#[from] embed::EmbedError),
    #[error(transparent)]
    Tracker(#[from] tracker::TrackerError),
    #[error(transparent)]
    Extract(#[from] extract::ExtractError),
    #[error(transparent)]
    Detect(#[from] detect::DetectError),
}

impl Error {
    /// Name of the underlying error variant, e.g. `InsufficientCapacity`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Audio(e) => e.name(),
            Error::Codec(e) => e.name(),
            Error::Tsm(e) => e.name(),
            Error::Embed(e) => e.name(),
            Error::Tracker(e) => e.name(),
            Error::Extract(e) => e.name(),
            Error::Detect(e) => e.name(),
        }
    }
}
