//! Embed with two beats per symbol and print the receiver's tempo track as CSV.

use tempo_steg::{embed, extract, synth_click_track, EmbedParams, ExtractConfig};

fn main() -> Result<(), tempo_steg::Error> {
    let params = EmbedParams::new(128.0, 2.0, 2);
    let cover = synth_click_track(128.0, 96, 48000)?;
    let stego = embed(&cover, "sos", &params)?;

    let config = ExtractConfig::new(params.phi, params.delta).with_reference_tempo(params.reference_tempo);
    let found = extract(&stego.stego, &config)?;
    print!("{}", found.track.to_csv());
    eprintln!("message: {:?}, symbols {}", found.message, found.symbols);
    Ok(())
}
