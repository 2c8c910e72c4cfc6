//! PCM buffers, WAV I/O and synthetic click-track covers.

use std::borrow::Cow;
use std::f64::consts::PI;
use std::path::Path;

use thiserror::Error;

/// Sample rates accepted for WAV files.
pub const FILE_SAMPLE_RATES: [u32; 2] = [44100, 48000];

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
    #[error("UnsupportedFormat: {0}")]
    UnsupportedFormat(String),
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
}

impl AudioError {
    pub fn name(&self) -> &'static str {
        match self {
            AudioError::Io(_) => "IoError",
            AudioError::UnsupportedFormat(_) => "UnsupportedFormat",
            AudioError::InvalidParams(_) => "InvalidParams",
        }
    }
}

/// Real-valued PCM audio, one `Vec` per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    sample_rate: u32,
    channels: Vec<Vec<f32>>,
}

impl AudioBuffer {
    /// Builds a buffer from per-channel sample vectors.
    pub fn new(sample_rate: u32, channels: Vec<Vec<f32>>) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidParams("sample rate must be positive".into()));
        }
        if !(1..=2).contains(&channels.len()) {
            return Err(AudioError::InvalidParams(format!(
                "{} channels, expected 1 or 2",
                channels.len()
            )));
        }
        if channels.iter().any(|c| c.len() != channels[0].len()) {
            return Err(AudioError::InvalidParams("channel lengths differ".into()));
        }
        Ok(AudioBuffer { sample_rate, channels })
    }

    pub fn mono(sample_rate: u32, samples: Vec<f32>) -> Result<Self, AudioError> {
        Self::new(sample_rate, vec![samples])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, index: usize) -> &[f32] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f32>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f32>> {
        self.channels
    }

    /// Average of all channels; borrows when the buffer is already mono.
    pub fn to_mono(&self) -> Cow<'_, [f32]> {
        if self.channels.len() == 1 {
            return Cow::Borrowed(&self.channels[0]);
        }
        let n = self.channels.len() as f32;
        (0..self.len())
            .map(|i| self.channels.iter().map(|c| c[i]).sum::<f32>() / n)
            .collect()
    }

    /// Copies samples `[start, end)` of every channel.
    pub fn slice(&self, start: usize, end: usize) -> AudioBuffer {
        AudioBuffer {
            sample_rate: self.sample_rate,
            channels: self.channels.iter().map(|c| c[start..end].to_vec()).collect(),
        }
    }

    pub fn peak(&self) -> f32 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f32, |m, &x| m.max(x.abs()))
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f32) -> AudioBuffer {
        AudioBuffer {
            sample_rate: self.sample_rate,
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|x| x * gain).collect())
                .collect(),
        }
    }

    /// Appends `samples` of silence to every channel.
    pub fn padded(&self, samples: usize) -> AudioBuffer {
        let mut out = self.clone();
        for c in &mut out.channels {
            c.resize(c.len() + samples, 0.0);
        }
        out
    }
}

fn check_file_rate(rate: u32) -> Result<(), AudioError> {
    if FILE_SAMPLE_RATES.contains(&rate) {
        Ok(())
    } else {
        Err(AudioError::UnsupportedFormat(format!("sample rate {rate} Hz")))
    }
}

fn map_hound(err: hound::Error) -> AudioError {
    match err {
        hound::Error::IoError(e) => AudioError::Io(e),
        other => AudioError::UnsupportedFormat(other.to_string()),
    }
}

/// Reads a 16- or 24-bit integer PCM WAV file, mono or stereo.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, AudioError> {
    let reader = hound::WavReader::open(path).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(AudioError::UnsupportedFormat("floating-point PCM".into()));
    }
    let scale = match spec.bits_per_sample {
        16 => 32768.0f32,
        24 => 8_388_608.0f32,
        bits => return Err(AudioError::UnsupportedFormat(format!("{bits}-bit PCM"))),
    };
    let channels = spec.channels as usize;
    if !(1..=2).contains(&channels) {
        return Err(AudioError::UnsupportedFormat(format!("{channels} channels")));
    }
    check_file_rate(spec.sample_rate)?;

    let mut data = vec![Vec::with_capacity(reader.len() as usize / channels); channels];
    for (i, s) in reader.into_samples::<i32>().enumerate() {
        data[i % channels].push(s.map_err(map_hound)? as f32 / scale);
    }
    // A truncated final frame would leave channels uneven.
    let frames = data.iter().map(Vec::len).min().unwrap_or(0);
    data.iter_mut().for_each(|c| c.truncate(frames));
    AudioBuffer::new(spec.sample_rate, data)
}

/// Converts an amplitude in [-1, 1] to a 16-bit sample, clamping at the rails.
pub fn quantize_i16(x: f32) -> i16 {
    (x as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Writes 16-bit PCM.
pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>) -> Result<(), AudioError> {
    check_file_rate(buffer.sample_rate)?;
    let spec = hound::WavSpec {
        channels: buffer.num_channels() as u16,
        sample_rate: buffer.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(map_hound)?;
    for i in 0..buffer.len() {
        for c in &buffer.channels {
            writer.write_sample(quantize_i16(c[i])).map_err(map_hound)?;
        }
    }
    writer.finalize().map_err(map_hound)
}

/// Constant-tempo metronome cover: one sine burst per beat.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickTrack {
    pub tempo_bpm: f64,
    pub beats: usize,
    pub sample_rate: u32,
    pub click_ms: f64,
    pub click_freq_hz: f64,
    pub amplitude: f32,
    /// Silence before the first click, in seconds.
    pub offset_s: f64,
}

impl ClickTrack {
    pub fn new(tempo_bpm: f64, beats: usize, sample_rate: u32) -> Self {
        ClickTrack {
            tempo_bpm,
            beats,
            sample_rate,
            click_ms: 10.0,
            click_freq_hz: 1000.0,
            amplitude: 0.8,
            offset_s: 0.0,
        }
    }

    pub fn beat_period_s(&self) -> f64 {
        60.0 / self.tempo_bpm
    }

    /// Sample index at which beat `k` starts.
    pub fn beat_sample(&self, k: usize) -> usize {
        ((self.offset_s + k as f64 * self.beat_period_s()) * self.sample_rate as f64).round() as usize
    }

    fn validate(&self) -> Result<(), AudioError> {
        let bad = |m: String| Err(AudioError::InvalidParams(m));
        if !(40.0..=300.0).contains(&self.tempo_bpm) {
            return bad(format!("tempo {} bpm outside [40, 300]", self.tempo_bpm));
        }
        if self.beats == 0 {
            return bad("beats must be positive".into());
        }
        if self.sample_rate == 0 {
            return bad("sample rate must be positive".into());
        }
        if !(self.click_ms > 0.0 && self.click_ms / 1000.0 < self.beat_period_s()) {
            return bad(format!("click length {} ms must be shorter than the beat period", self.click_ms));
        }
        if !(self.click_freq_hz > 0.0 && self.click_freq_hz < self.sample_rate as f64 / 2.0) {
            return bad(format!("click frequency {} Hz", self.click_freq_hz));
        }
        if !(self.offset_s >= 0.0 && self.offset_s.is_finite()) {
            return bad(format!("offset {} s", self.offset_s));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return bad(format!("amplitude {}", self.amplitude));
        }
        Ok(())
    }

    pub fn render(&self) -> Result<AudioBuffer, AudioError> {
        self.validate()?;
        let sr = self.sample_rate as f64;
        let total = self.beat_sample(self.beats);
        let click_len = (self.click_ms / 1000.0 * sr).round() as usize;
        let fade = (sr / 1000.0).max(1.0);
        let burst: Vec<f32> = (0..click_len)
            .map(|n| {
                let n_f = n as f64;
                let env = (n_f / fade).min((click_len - n) as f64 / fade).min(1.0);
                (env * (2.0 * PI * self.click_freq_hz * n_f / sr).sin()) as f32 * self.amplitude
            })
            .collect();

        let mut samples = vec![0.0f32; total];
        for k in 0..self.beats {
            let start = self.beat_sample(k);
            let end = (start + click_len).min(total);
            samples[start..end].copy_from_slice(&burst[..end - start]);
        }
        AudioBuffer::mono(self.sample_rate, samples)
    }
}

/// Click track with the default 10 ms, 1 kHz burst.
pub fn synth_click_track(tempo_bpm: f64, beats: usize, sample_rate: u32) -> Result<AudioBuffer, AudioError> {
    ClickTrack::new(tempo_bpm, beats, sample_rate).render()
}
