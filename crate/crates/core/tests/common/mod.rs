#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use tempo_steg::codec::encode_text;
use tempo_steg::{AudioBuffer, CodeTable, Symbol};

/// Every character the table can encode, in table order.
pub fn alphabet() -> Vec<char> {
    CodeTable::standard().entries().map(|(c, _)| c).collect()
}

/// Random message of `len` characters: table characters separated by single spaces,
/// never starting or ending with a space.
pub fn random_message<R: Rng>(rng: &mut R, len: usize) -> String {
    let chars = alphabet();
    let mut out = String::with_capacity(len);
    for i in 0..len {
        let last = i + 1 == len;
        let prev_space = out.ends_with(' ');
        if i > 0 && !last && !prev_space && rng.gen_bool(0.18) {
            out.push(' ');
        } else {
            out.push(*chars.choose(rng).unwrap());
        }
    }
    out
}

/// Random message whose encoding is exactly `units` symbols long.
pub fn message_with_units<R: Rng>(rng: &mut R, units: usize) -> String {
    loop {
        let mut msg = String::new();
        let mut best = None;
        while msg.chars().count() < units {
            let len = msg.chars().count();
            msg = random_message(rng, len + 1);
            let n = encode_text(&msg, CodeTable::standard()).unwrap().len();
            if n == units {
                best = Some(msg.clone());
                break;
            }
            if n > units {
                break;
            }
        }
        if let Some(m) = best {
            return m;
        }
    }
}

/// Cover beats for a blind round trip: room for the message plus enough
/// reference-tempo beats that the median inter-beat interval sits at X.
pub fn cover_beats_for(message: &str, phi: u32) -> usize {
    let stream = encode_text(message, CodeTable::standard()).unwrap();
    let phi = phi as usize;
    let plus = stream.count(Symbol::Plus);
    let minus = stream.count(Symbol::Minus);
    (stream.len() * phi).max(2 * plus.max(minus) * phi) + 4 * phi + 2
}

/// Click onsets located directly on the waveform: the first sample whose
/// magnitude reaches `fraction` of the global peak after at least `quiet_ms`
/// of sub-threshold signal. Returns sample indices.
pub fn envelope_onsets(audio: &AudioBuffer, fraction: f32, quiet_ms: f64) -> Vec<usize> {
    let x = audio.to_mono();
    let peak = x.iter().fold(0.0f32, |m, v| m.max(v.abs()));
    let thr = peak * fraction;
    let quiet = (quiet_ms / 1000.0 * audio.sample_rate() as f64) as usize;
    let mut onsets = Vec::new();
    let mut below = quiet;
    for (i, v) in x.iter().enumerate() {
        if v.abs() >= thr {
            if below >= quiet {
                onsets.push(i);
            }
            below = 0;
        } else {
            below += 1;
        }
    }
    onsets
}

/// Tempo of each group of `phi` consecutive onset intervals.
pub fn grouped_tempi(onsets: &[usize], sample_rate: u32, phi: usize) -> Vec<f64> {
    (0..)
        .take_while(|k| (k + 1) * phi < onsets.len())
        .map(|k| {
            let span = onsets[(k + 1) * phi] - onsets[k * phi];
            60.0 * phi as f64 * sample_rate as f64 / span as f64
        })
        .collect()
}

/// Peak of the Hann-tapered DFT magnitude over the FFT bins `k * sr / n`
/// between `lo_hz` and `hi_hz`, evaluated directly. Returns `(peak_hz, bin_hz)`.
pub fn dft_peak_hz(samples: &[f32], sample_rate: u32, lo_hz: f64, hi_hz: f64) -> (f64, f64) {
    let sr = sample_rate as f64;
    let n = samples.len() as f64;
    let bin = sr / n;
    let tapered: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(i, &s)| s as f64 * (0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n).cos()))
        .collect();
    let mut best = (0.0, 0.0);
    for k in (lo_hz / bin).floor() as usize..=(hi_hz / bin).ceil() as usize {
        let w = 2.0 * std::f64::consts::PI * k as f64 / n;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (i, v) in tapered.iter().enumerate() {
            let (s, c) = (w * i as f64).sin_cos();
            re += v * c;
            im -= v * s;
        }
        let mag = re * re + im * im;
        if mag > best.0 {
            best = (mag, k as f64 * bin);
        }
    }
    (best.1, bin)
}

pub fn tone(freq_hz: f64, seconds: f64, sample_rate: u32, amplitude: f32) -> AudioBuffer {
    let n = (seconds * sample_rate as f64).round() as usize;
    let s = (0..n)
        .map(|i| amplitude * (2.0 * std::f64::consts::PI * freq_hz * i as f64 / sample_rate as f64).sin() as f32)
        .collect();
    AudioBuffer::mono(sample_rate, s).unwrap()
}

/// Embeds `message` into a click cover sized by [`cover_beats_for`] and
/// extracts it again, blind to the reference tempo unless `known_tempo`.
pub fn round_trip(
    message: &str,
    x: f64,
    delta: f64,
    phi: u32,
    sample_rate: u32,
    known_tempo: bool,
) -> Result<tempo_steg::Extraction, tempo_steg::Error> {
    use tempo_steg::{embed, extract, synth_click_track, EmbedParams, ExtractConfig};
    let cover = synth_click_track(x, cover_beats_for(message, phi), sample_rate)?;
    let stego = embed(&cover, message, &EmbedParams::new(x, delta, phi))?.stego;
    let mut config = ExtractConfig::new(phi, delta);
    if known_tempo {
        config = config.with_reference_tempo(x);
    }
    Ok(extract(&stego, &config)?)
}
