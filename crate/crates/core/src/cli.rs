//! The `tempo-steg` command line.
//!
//! Exit status is 0 on success, 1 when the toolkit reports an error (its
//! name goes to stderr) and 2 for usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::audio::{read_wav, write_wav, ClickTrack};
use crate::codec::{decode_symbols, encode_text_with, CodeTable, SymbolStream};
use crate::detect::{detect, DetectorConfig};
use crate::embed::{embed_with, EmbedParams};
use crate::extract::{extract, unit_tempi, ExtractConfig};
use crate::tracker::{estimate_reference_tempo, track_beats, TrackerConfig};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "tempo-steg", version, about = "Hide and find text in the tempo of constant-bpm audio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a constant-tempo click-track cover.
    GenCover(GenCoverArgs),
    /// Embed a message into a cover.
    Encode(EncodeArgs),
    /// Extract a message from a steganogram.
    Decode(DecodeArgs),
    /// Score a track for tempo modulation without the key.
    Detect(DetectArgs),
    /// Write per-unit tempi of a track as CSV.
    Analyze(AnalyzeArgs),
    /// Convert between text and the +/-/0 symbol form on stdin/stdout.
    Codec(CodecArgs),
}

#[derive(Debug, Args)]
struct GenCoverArgs {
    #[arg(long)]
    tempo: f64,
    #[arg(long)]
    beats: usize,
    #[arg(long, default_value_t = 44100)]
    rate: u32,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    click_ms: f64,
    #[arg(long, default_value_t = 1000.0)]
    click_freq: f64,
    /// Silence before the first click, in seconds.
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Reference tempo of the cover in bpm.
    #[arg(long)]
    tempo: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    phi: u32,
    /// Time of the cover's first beat, in seconds.
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
    #[arg(short, long)]
    message: String,
    /// Skip characters missing from the code table instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    phi: u32,
    /// Reference tempo; estimated from the beat grid when omitted.
    #[arg(long)]
    tempo: Option<f64>,
    /// Also write the tempo track as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Treat zero runs longer than a word gap as a space.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Report destination; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0025)]
    gate: f64,
    #[arg(long, default_value_t = 0.6)]
    stego_threshold: f64,
    #[arg(long, default_value_t = 0.3)]
    clean_threshold: f64,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    phi: u32,
    /// Expected tempo used to seed the beat grid.
    #[arg(long)]
    tempo: Option<f64>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct CodecMode {
    #[arg(long)]
    encode: bool,
    #[arg(long)]
    decode: bool,
}

#[derive(Debug, Args)]
struct CodecArgs {
    #[command(flatten)]
    mode: CodecMode,
    #[arg(long)]
    lenient: bool,
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::GenCover(a) => gen_cover(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Detect(a) => detect_cmd(a),
        Command::Analyze(a) => analyze(a),
        Command::Codec(a) => codec(a),
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| crate::audio::AudioError::Io(e).into()),
        None => {
            let _ = io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn gen_cover(a: GenCoverArgs) -> Result<(), Error> {
    let mut track = ClickTrack::new(a.tempo, a.beats, a.rate);
    track.click_ms = a.click_ms;
    track.click_freq_hz = a.click_freq;
    track.offset_s = a.offset;
    let audio = track.render()?;
    write_wav(&audio, &a.output)?;
    println!("samples={}", audio.len());
    println!("duration_s={:.6}", audio.duration_s());
    Ok(())
}

fn encode(a: EncodeArgs) -> Result<(), Error> {
    let params = EmbedParams::new(a.tempo, a.delta, a.phi).with_offset(a.offset);
    params.validate().map_err(Error::from)?;
    let cover = read_wav(&a.input)?;
    let result = embed_with(&cover, &a.message, &params, CodeTable::standard(), a.lenient)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    write_wav(&result.stego, &a.output)?;
    let mut s = String::new();
    let _ = writeln!(s, "capacity_units={}", result.capacity.units);
    let _ = writeln!(s, "capacity_chars={}", result.capacity.estimated_chars);
    let _ = writeln!(s, "message_units={}", result.plan.len());
    let _ = writeln!(s, "symbols={}", result.symbols);
    if let Some((start, end)) = result.plan.span_s() {
        let _ = writeln!(s, "plan_start_s={start:.6}");
        let _ = writeln!(s, "plan_end_s={end:.6}");
    }
    let _ = writeln!(s, "output_samples={}", result.stego.len());
    print!("{s}");
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<(), Error> {
    let mut config = ExtractConfig::new(a.phi, a.delta);
    config.reference_tempo = a.tempo;
    config.strict = !a.lenient;
    let audio = read_wav(&a.input)?;
    let result = extract(&audio, &config)?;
    eprintln!(
        "reference tempo {:.3} bpm ({})",
        result.reference_tempo,
        if result.reference_tempo_estimated { "estimated" } else { "given" }
    );
    if let Some(path) = &a.csv {
        write_out(Some(path), &result.track.to_csv())?;
    }
    println!("{}", result.message);
    Ok(())
}

fn detect_cmd(a: DetectArgs) -> Result<(), Error> {
    let config = DetectorConfig {
        deviation_gate: a.gate,
        stego_threshold: a.stego_threshold,
        clean_threshold: a.clean_threshold,
        ..DetectorConfig::default()
    };
    let audio = read_wav(&a.input)?;
    let report = detect(&audio, &config)?;
    write_out(a.output.as_ref(), &report.to_report())
}

fn analyze(a: AnalyzeArgs) -> Result<(), Error> {
    let audio = read_wav(&a.input)?;
    let tracking = track_beats(&audio, a.tempo, &TrackerConfig::default())?;
    let tempi = unit_tempi(&tracking.grid, a.phi)?;
    if let Ok(x) = estimate_reference_tempo(&tracking.grid) {
        eprintln!("beats={} reference_tempo_bpm={x:.3}", tracking.grid.len());
    }
    let mut csv = String::from("unit_index,start_time_s,tempo_bpm\n");
    for (i, u) in tempi.iter().enumerate() {
        let _ = writeln!(csv, "{i},{:.6},{:.4}", u.start_s, u.tempo_bpm);
    }
    write_out(a.output.as_ref(), &csv)
}

fn codec(a: CodecArgs) -> Result<(), Error> {
    let mut input = String::new();
    io::stdin()
        .read_to_string(&mut input)
        .map_err(crate::audio::AudioError::Io)?;
    let table = CodeTable::standard();
    let output = if a.mode.encode {
        let encoded = encode_text_with(input.trim_end_matches(['\n', '\r']), table, a.lenient)?;
        for (ch, pos) in &encoded.skipped {
            eprintln!("warning: skipped unsupported character {ch:?} at position {pos}");
        }
        encoded.stream.to_text_form()
    } else {
        let stream = SymbolStream::from_text_form(input.trim())?;
        decode_symbols(&stream, table, !a.lenient)?
    };
    println!("{output}");
    Ok(())
}
