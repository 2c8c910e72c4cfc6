//! Play a 1 kHz tone 1/120 faster: it gets shorter and its pitch rises.

use tempo_steg::{stretch, AudioBuffer, SpeedFactor};

fn dominant_hz(x: &[f32], sr: f64, lo: f64, hi: f64, step: f64) -> f64 {
    let mut best = (0.0, lo);
    let mut f = lo;
    while f <= hi {
        let w = 2.0 * std::f64::consts::PI * f / sr;
        let (re, im) = x.iter().enumerate().fold((0.0, 0.0), |(re, im), (i, &v)| {
            let (s, c) = (w * i as f64).sin_cos();
            (re + v as f64 * c, im - v as f64 * s)
        });
        if re * re + im * im > best.0 {
            best = (re * re + im * im, f);
        }
        f += step;
    }
    best.1
}

fn main() -> Result<(), tempo_steg::Error> {
    let sr = 44100;
    let tone: Vec<f32> = (0..sr)
        .map(|i| (0.5 * (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / sr as f64).sin()) as f32)
        .collect();
    let input = AudioBuffer::mono(sr as u32, tone)?;

    for factor in [119.0 / 120.0, 121.0 / 120.0] {
        let f = SpeedFactor::new(factor)?;
        let out = stretch(&input, f)?;
        let hz = dominant_hz(out.channel(0), sr as f64, 980.0, 1020.0, 0.05);
        println!(
            "factor {factor:.5}: {} -> {} samples, pitch {hz:.2} Hz (expected {:.2}), audible band exceeded: {}",
            input.len(),
            out.len(),
            1000.0 * factor,
            f.exceeds_inaudible_band()
        );
    }
    Ok(())
}
