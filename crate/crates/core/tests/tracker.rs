mod common;

use tempo_steg::tracker::{
    build_beat_grid, estimate_reference_tempo, spectral_flux, track_beats, TrackerConfig, TrackerError,
};
use tempo_steg::{synth_click_track, AudioBuffer, ClickTrack};

fn assert_tracks(audio: &AudioBuffer, tempo: f64, beats: usize, offset_s: f64) {
    let tr = track_beats(audio, None, &TrackerConfig::default()).unwrap();
    let grid = &tr.grid;
    assert_eq!(grid.len(), beats, "tempo {tempo}: beat count");
    let x = estimate_reference_tempo(grid).unwrap();
    assert!((x - tempo).abs() <= 0.1, "tempo {tempo}: estimated {x}");
    for (k, &t) in grid.times().iter().enumerate() {
        let truth = offset_s + k as f64 * 60.0 / tempo;
        assert!((t - truth).abs() <= 0.012, "tempo {tempo} beat {k}: {t} vs {truth}");
    }
}

#[test]
fn constant_tempo_click_tracks() {
    for rate in [44100u32, 48000] {
        for tempo in (100..=150).step_by(5) {
            let tempo = tempo as f64;
            let audio = synth_click_track(tempo, 32, rate).unwrap();
            assert_tracks(&audio, tempo, 32, 0.0);
        }
    }
}

#[test]
fn fractional_tempi_and_offsets() {
    for &(tempo, offset) in &[(97.3, 0.137), (123.45, 0.5), (141.7, 1.25)] {
        let mut t = ClickTrack::new(tempo, 24, 44100);
        t.offset_s = offset;
        assert_tracks(&t.render().unwrap(), tempo, 24, offset);
    }
}

#[test]
fn shifting_the_input_shifts_the_beats() {
    let audio = synth_click_track(120.0, 20, 44100).unwrap();
    let base = track_beats(&audio, None, &TrackerConfig::default()).unwrap().grid;
    let shift = 12_345;
    let mut s = vec![0.0f32; shift];
    s.extend_from_slice(audio.channel(0));
    let moved = track_beats(&AudioBuffer::mono(44100, s).unwrap(), None, &TrackerConfig::default()).unwrap().grid;
    assert_eq!(base.len(), moved.len());
    let dt = shift as f64 / 44100.0;
    for (a, b) in base.times().iter().zip(moved.times()) {
        assert!((b - a - dt).abs() < 0.001, "{a} {b}");
    }
}

#[test]
fn gain_and_polarity_do_not_matter() {
    let audio = synth_click_track(130.0, 20, 48000).unwrap();
    let base = track_beats(&audio, None, &TrackerConfig::default()).unwrap().grid;
    for gain in [0.05f32, -1.0, 1.2] {
        let g = track_beats(&audio.scaled(gain), None, &TrackerConfig::default()).unwrap().grid;
        assert_eq!(base.len(), g.len());
        for (a, b) in base.times().iter().zip(g.times()) {
            assert!((a - b).abs() < 0.001, "gain {gain}: {a} {b}");
        }
    }
}

#[test]
fn tempo_hint_gives_the_same_grid() {
    let audio = synth_click_track(110.0, 20, 44100).unwrap();
    let a = track_beats(&audio, None, &TrackerConfig::default()).unwrap().grid;
    let b = track_beats(&audio, Some(110.0), &TrackerConfig::default()).unwrap().grid;
    assert_eq!(a, b);
}

#[test]
fn flux_peaks_at_an_isolated_click() {
    let mut s = vec![0.0f32; 44100];
    let click = common::tone(1000.0, 0.01, 44100, 0.8);
    s[22050..22050 + click.len()].copy_from_slice(click.channel(0));
    let f = spectral_flux(&AudioBuffer::mono(44100, s).unwrap(), 2048, 512).unwrap();
    let t = f.argmax_time().unwrap();
    assert!((t - 0.5).abs() <= 2048.0 / 44100.0, "{t}");
    assert_eq!(f.flux[0], 0.0);
}

#[test]
fn error_cases() {
    let cfg = TrackerConfig::default();
    let short = AudioBuffer::mono(44100, vec![0.0; 100]).unwrap();
    assert!(matches!(track_beats(&short, None, &cfg), Err(TrackerError::AudioTooShort { .. })));
    let silence = AudioBuffer::mono(44100, vec![0.0; 44100 * 3]).unwrap();
    assert!(matches!(track_beats(&silence, None, &cfg), Err(TrackerError::TooFewOnsets { .. })));
    let few = synth_click_track(120.0, 3, 44100).unwrap();
    assert!(matches!(track_beats(&few, None, &cfg), Err(TrackerError::TooFewOnsets { found: 3 })));
    assert!(matches!(
        spectral_flux(&few, 1000, 512),
        Err(TrackerError::InvalidParams(_))
    ));
}

#[test]
fn grid_fills_missed_beats_and_drops_spurious_onsets() {
    let cfg = TrackerConfig::default();
    let mut onsets: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
    onsets.retain(|&t| t != 3.0 && t != 6.0 && t != 6.5);
    onsets.push(4.1);
    onsets.sort_by(f64::total_cmp);
    let grid = build_beat_grid(&onsets, None, 10.0, &cfg).unwrap();
    assert_eq!(grid.len(), 20);
    for (k, &t) in grid.times().iter().enumerate() {
        assert!((t - k as f64 * 0.5).abs() < 1e-9);
    }
}

#[test]
fn irregular_onsets_are_unstable() {
    let onsets = [0.0, 0.5, 1.0, 1.5, 2.25, 3.0, 3.5, 4.25, 4.75, 5.5, 6.0, 6.75];
    assert!(matches!(
        build_beat_grid(&onsets, None, 8.0, &TrackerConfig::default()),
        Err(TrackerError::UnstableTempo { .. })
    ));
    assert!(matches!(
        build_beat_grid(&onsets, Some(-5.0), 8.0, &TrackerConfig::default()),
        Err(TrackerError::InvalidParams(_))
    ));
}
