//! Encode text to the +/-/0 symbol form and back.
//!
//! `cargo run --example codec_roundtrip -- "sos at sea"`

use tempo_steg::codec::{decode_symbols, encode_text_with, CodeTable};

fn main() -> Result<(), tempo_steg::Error> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "Hello, World!".to_string());
    let table = CodeTable::standard();

    let encoded = encode_text_with(&text, table, true)?;
    for (ch, pos) in &encoded.skipped {
        println!("skipped {ch:?} at {pos}");
    }
    let stream = encoded.stream;
    println!("text:    {text:?}");
    println!("symbols: {stream}");
    println!(
        "units:   {} ({} plus, {} minus, {} zero)",
        stream.len(),
        stream.count(tempo_steg::Symbol::Plus),
        stream.count(tempo_steg::Symbol::Minus),
        stream.count(tempo_steg::Symbol::Zero)
    );
    println!("decoded: {:?}", decode_symbols(&stream, table, true)?);
    Ok(())
}
