mod common;

use proptest::prelude::*;
use tempo_steg::audio::{read_wav, write_wav, AudioBuffer, AudioError, ClickTrack};

fn write_i16(path: &std::path::Path, rate: u32, channels: u16, samples: &[i16]) {
    let spec = hound::WavSpec { channels, sample_rate: rate, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in samples {
        w.write_sample(s).unwrap();
    }
    w.finalize().unwrap();
}

#[test]
fn sixteen_bit_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.wav");
    write_i16(&p, 44100, 1, &[16384, -32768, 0]);
    let b = read_wav(&p).unwrap();
    assert_eq!(b.sample_rate(), 44100);
    assert_eq!(b.channel(0), &[0.5, -1.0, 0.0]);
}

#[test]
fn twenty_four_bit_and_stereo() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("b.wav");
    let spec = hound::WavSpec { channels: 2, sample_rate: 48000, bits_per_sample: 24, sample_format: hound::SampleFormat::Int };
    let mut w = hound::WavWriter::create(&p, spec).unwrap();
    for s in [4_194_304i32, -4_194_304, 0, 8_388_607] {
        w.write_sample(s).unwrap();
    }
    w.finalize().unwrap();
    let b = read_wav(&p).unwrap();
    assert_eq!(b.num_channels(), 2);
    assert_eq!(b.channel(0), &[0.5, 0.0]);
    assert_eq!(b.channel(1)[0], -0.5);
}

#[test]
fn empty_data_chunk() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.wav");
    write_i16(&p, 48000, 1, &[]);
    let b = read_wav(&p).unwrap();
    assert!(b.is_empty());
}

#[test]
fn float_wav_is_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.wav");
    let spec = hound::WavSpec { channels: 1, sample_rate: 44100, bits_per_sample: 32, sample_format: hound::SampleFormat::Float };
    let mut w = hound::WavWriter::create(&p, spec).unwrap();
    w.write_sample(0.25f32).unwrap();
    w.finalize().unwrap();
    assert!(matches!(read_wav(&p), Err(AudioError::UnsupportedFormat(_))));
}

#[test]
fn other_rates_and_layouts_are_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.wav");
    write_i16(&p, 22050, 1, &[0, 1]);
    assert!(matches!(read_wav(&p), Err(AudioError::UnsupportedFormat(_))));
    let p = dir.path().join("c.wav");
    write_i16(&p, 44100, 3, &[0, 1, 2]);
    assert!(matches!(read_wav(&p), Err(AudioError::UnsupportedFormat(_))));
    let p = dir.path().join("g.wav");
    std::fs::write(&p, b"not a wav file at all").unwrap();
    assert!(read_wav(&p).is_err());
}

#[test]
fn missing_and_unwritable_paths() {
    assert!(matches!(read_wav("/nonexistent/in.wav"), Err(AudioError::Io(_))));
    let b = AudioBuffer::mono(44100, vec![0.0; 10]).unwrap();
    let err = write_wav(&b, "/nonexistent/dir/out.wav").unwrap_err();
    assert_eq!(err.name(), "IoError");
}

#[test]
fn full_scale_is_clamped() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("clip.wav");
    write_wav(&AudioBuffer::mono(44100, vec![1.0, -1.0, 1.5]).unwrap(), &p).unwrap();
    let raw: Vec<i16> = hound::WavReader::open(&p).unwrap().into_samples().map(Result::unwrap).collect();
    assert_eq!(raw, vec![32767, -32768, 32767]);
}

#[test]
fn thousand_sample_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("rt.wav");
    let s: Vec<f32> = (0..1000).map(|i| ((i as f32) * 0.37).sin() * 0.9).collect();
    let b = AudioBuffer::mono(44100, s).unwrap();
    write_wav(&b, &p).unwrap();
    let back = read_wav(&p).unwrap();
    let err = b.channel(0).iter().zip(back.channel(0)).map(|(a, b)| (a - b).abs()).fold(0.0, f32::max);
    assert!(err <= 1.0 / 32768.0, "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn round_trip_within_one_lsb(
        stereo in any::<bool>(),
        rate in prop_oneof![Just(44100u32), Just(48000u32)],
        data in proptest::collection::vec(-1.0f32..=1.0, 0..400),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.wav");
        let chans = if stereo { vec![data.clone(), data.iter().map(|x| -x).collect()] } else { vec![data] };
        let b = AudioBuffer::new(rate, chans).unwrap();
        write_wav(&b, &p).unwrap();
        let back = read_wav(&p).unwrap();
        prop_assert_eq!(back.sample_rate(), rate);
        prop_assert_eq!(back.num_channels(), b.num_channels());
        prop_assert_eq!(back.len(), b.len());
        for (c0, c1) in b.channels().iter().zip(back.channels()) {
            for (x, y) in c0.iter().zip(c1) {
                prop_assert!((x - y).abs() <= 1.0 / 32768.0);
            }
        }
    }
}

#[test]
fn click_onsets_land_on_the_beat_grid() {
    for &(tempo, rate) in &[(120.0, 44100u32), (128.0, 48000), (97.5, 44100), (300.0, 48000), (40.0, 44100)] {
        let track = ClickTrack::new(tempo, 12, rate);
        let audio = track.render().unwrap();
        assert_eq!(audio.len(), (12.0 * 60.0 / tempo * rate as f64).round() as usize);
        let onsets = common::envelope_onsets(&audio, 0.05, 20.0);
        assert_eq!(onsets.len(), 12);
        for (k, &s) in onsets.iter().enumerate() {
            let err_s = s as f64 / rate as f64 - k as f64 * 60.0 / tempo;
            assert!(err_s.abs() <= 0.001, "tempo {tempo} beat {k}: {err_s}");
        }
    }
}

#[test]
fn click_offset_shifts_every_beat() {
    let mut t = ClickTrack::new(120.0, 4, 44100);
    t.offset_s = 0.25;
    let audio = t.render().unwrap();
    assert_eq!(audio.len(), (2.25 * 44100.0) as usize);
    let onsets = common::envelope_onsets(&audio, 0.05, 20.0);
    assert_eq!(onsets.len(), 4);
    assert!((onsets[0] as f64 / 44100.0 - 0.25).abs() < 0.001);
}
