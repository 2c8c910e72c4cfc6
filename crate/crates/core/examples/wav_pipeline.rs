//! File-based round trip: cover WAV -> stego WAV -> message, as the CLI does it.

use tempo_steg::embed::capacity_in_samples;
use tempo_steg::{embed, extract, read_wav, synth_click_track, write_wav, EmbedParams, ExtractConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("tempo-steg-example");
    std::fs::create_dir_all(&dir)?;
    let (cover_path, stego_path) = (dir.join("cover.wav"), dir.join("stego.wav"));

    write_wav(&synth_click_track(110.0, 150, 48000)?, &cover_path)?;
    let cover = read_wav(&cover_path)?;
    let params = EmbedParams::new(110.0, 1.0, 1);
    let cap = capacity_in_samples(&params, cover.len(), cover.sample_rate());
    println!("capacity: {} units (~{} characters)", cap.units, cap.estimated_chars);

    let result = embed(&cover, "meet at dawn", &params)?;
    write_wav(&result.stego, &stego_path)?;
    println!("wrote {} ({} units used)", stego_path.display(), result.plan.len());

    // 16-bit quantization of the stego file does not disturb the tempo channel.
    let found = extract(&read_wav(&stego_path)?, &ExtractConfig::new(1, 1.0))?;
    println!("recovered {:?} at estimated {:.3} bpm", found.message, found.reference_tempo);
    Ok(())
}
