mod common;

use proptest::prelude::*;
use tempo_steg::codec::normalize_message;
use tempo_steg::extract::{classify_tempo, trim_message, unit_tempi, ExtractError, TEMPO_TRACK_CSV_HEADER};
use tempo_steg::tracker::BeatGrid;
use tempo_steg::{extract, synth_click_track, ExtractConfig, Symbol, SymbolStream};

#[test]
fn blind_round_trips() {
    for &(msg, x, delta, phi, rate) in &[
        ("sos", 128.0, 1.0, 1, 44100u32),
        ("sos", 128.0, 2.0, 2, 48000),
        ("hello world", 120.0, 1.0, 1, 44100),
        ("the quick brown fox", 100.0, 2.0, 3, 44100),
        ("1+1=2?", 150.0, 1.0, 2, 48000),
    ] {
        let got = common::round_trip(msg, x, delta, phi, rate, false).unwrap();
        assert_eq!(got.message, msg, "X={x} Δ={delta} Φ={phi}");
        assert!(got.reference_tempo_estimated);
        assert!((got.reference_tempo - x).abs() < 0.1);
    }
}

#[test]
fn keyed_round_trip() {
    let got = common::round_trip("Keyed Tempo", 110.0, 1.0, 1, 44100, true).unwrap();
    assert_eq!(got.message, normalize_message("Keyed Tempo"));
    assert!(!got.reference_tempo_estimated);
    assert_eq!(got.reference_tempo, 110.0);
}

#[test]
fn tempo_track_csv() {
    let got = common::round_trip("et", 120.0, 1.0, 1, 44100, false).unwrap();
    let csv = got.track.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TEMPO_TRACK_CSV_HEADER));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[3], "+");
    assert!((first[2].parse::<f64>().unwrap() - 121.0).abs() < 0.1);
    assert_eq!(csv.lines().count(), got.track.units.len() + 1);
}

#[test]
fn clean_cover_has_no_message() {
    let cover = synth_click_track(120.0, 30, 44100).unwrap();
    assert!(matches!(extract(&cover, &ExtractConfig::new(1, 1.0)), Err(ExtractError::NoMessage)));
}

#[test]
fn invalid_keys() {
    let cover = synth_click_track(120.0, 30, 44100).unwrap();
    assert!(matches!(extract(&cover, &ExtractConfig::new(0, 1.0)), Err(ExtractError::InvalidParams(_))));
    assert!(matches!(extract(&cover, &ExtractConfig::new(1, 0.0)), Err(ExtractError::InvalidParams(_))));
    let short = synth_click_track(120.0, 6, 44100).unwrap();
    assert!(matches!(extract(&short, &ExtractConfig::new(8, 1.0)), Err(ExtractError::TooFewBeats { .. })));
}

#[test]
fn unit_tempi_group_phi_beats() {
    let times: Vec<f64> = (0..7).map(|k| k as f64 * 0.5).collect();
    let grid = BeatGrid::new(times, 4.0).unwrap();
    let units = unit_tempi(&grid, 3).unwrap();
    assert_eq!(units.len(), 2);
    assert!((units[1].tempo_bpm - 120.0).abs() < 1e-9);
    assert_eq!(units[1].start_s, 1.5);
}

#[test]
fn trimming() {
    let s: SymbolStream = "00+0-000+".parse().unwrap();
    assert_eq!(trim_message(&s).unwrap().to_text_form(), "+0-");
    assert!(trim_message(&"0000".parse().unwrap()).is_none());
    assert_eq!(trim_message(&"+00-".parse().unwrap()).unwrap().to_text_form(), "+00-");
}

proptest! {
    #[test]
    fn dead_zone_is_monotone(x in 60.0f64..200.0, delta in 0.1f64..10.0, a in -20.0f64..20.0, b in -20.0f64..20.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let rank = |s: Symbol| s.sign();
        prop_assert!(rank(classify_tempo(x + lo, x, delta)) <= rank(classify_tempo(x + hi, x, delta)));
    }

    #[test]
    fn dead_zone_recovers_exact_levels(x in 60.0f64..200.0, delta in 0.1f64..10.0, noise in -0.49f64..0.49) {
        let n = noise * delta;
        prop_assert_eq!(classify_tempo(x + delta + n, x, delta), Symbol::Plus);
        prop_assert_eq!(classify_tempo(x - delta + n, x, delta), Symbol::Minus);
        prop_assert_eq!(classify_tempo(x + n, x, delta), Symbol::Zero);
    }
}

proptest! {
    #[test]
    fn widening_the_dead_zone_never_creates_symbols(x in 60.0f64..200.0, d1 in 0.1f64..10.0, extra in 0.0f64..10.0, t in -20.0f64..20.0) {
        if classify_tempo(x + t, x, d1) == Symbol::Zero {
            prop_assert_eq!(classify_tempo(x + t, x, d1 + extra), Symbol::Zero);
        }
    }
}
