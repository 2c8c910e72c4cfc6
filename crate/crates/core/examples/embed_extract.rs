//! Hide a sentence in a 120 bpm click track and read it back blind.
//!
//! Run with `cargo run --release --example embed_extract`.

use std::time::Instant;

use tempo_steg::codec::encode_text;
use tempo_steg::{embed, extract, synth_click_track, CodeTable, EmbedParams, ExtractConfig};

fn main() -> Result<(), tempo_steg::Error> {
    let message = "steganography is a dancer!";
    let params = EmbedParams::new(120.0, 1.0, 1);

    let units = encode_text(message, CodeTable::standard())?.len();
    // Enough reference-tempo beats after the message for the median to settle on X.
    let beats = units * 3;
    let cover = synth_click_track(params.reference_tempo, beats, 44100)?;
    println!("message: {message:?} ({units} units), cover: {beats} beats, {:.1} s", cover.duration_s());

    let start = Instant::now();
    let stego = embed(&cover, message, &params)?;
    println!("plan: {} units, symbols {}", stego.plan.len(), stego.symbols);

    let found = extract(&stego.stego, &ExtractConfig::new(params.phi, params.delta))?;
    println!(
        "estimated reference tempo {:.3} bpm from {} beats",
        found.reference_tempo,
        found.grid.len()
    );
    println!("recovered: {:?} in {:.2?}", found.message, start.elapsed());
    assert_eq!(found.message, message);
    Ok(())
}
