//! Write a constant-tempo click track to a WAV file and read it back.
//!
//! `cargo run --example click_cover -- cover.wav 128`

use tempo_steg::{read_wav, write_wav, ClickTrack};

fn main() -> Result<(), tempo_steg::Error> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "cover.wav".to_string());
    let tempo: f64 = args.next().and_then(|t| t.parse().ok()).unwrap_or(120.0);

    let mut track = ClickTrack::new(tempo, 64, 44100);
    track.offset_s = 0.25;
    track.click_freq_hz = 1500.0;
    let audio = track.render()?;
    write_wav(&audio, &path)?;

    let back = read_wav(&path)?;
    println!(
        "{path}: {} beats at {tempo} bpm, {} samples @ {} Hz ({:.2} s), peak {:.3}",
        track.beats,
        back.len(),
        back.sample_rate(),
        back.duration_s(),
        back.peak()
    );
    Ok(())
}
