//! Score clean and tempo-modulated click tracks without the key and report
//! how well the two sets separate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempo_steg::detect::batch_evaluate;
use tempo_steg::{embed, ClickTrack, DetectorConfig, EmbedParams};

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

fn main() -> Result<(), tempo_steg::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut clean, mut stego) = (Vec::new(), Vec::new());
    for _ in 0..12 {
        let mut track = ClickTrack::new(120.0, 120, 44100);
        track.offset_s = rng.gen_range(0.0..0.4);
        track.click_freq_hz = rng.gen_range(700.0..1800.0);
        let cover = track.render()?;
        let msg: String = (0..8).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char).collect();
        let params = EmbedParams::new(120.0, 1.0, 1).with_offset(track.beat_sample(0) as f64 / 44100.0);
        stego.push(embed(&cover, &msg, &params)?.stego);
        clean.push(cover);
    }

    let (roc, clean_reports, stego_reports) = batch_evaluate(&clean, &stego, &DetectorConfig::default())?;
    for (name, reports) in [("clean", &clean_reports), ("stego", &stego_reports)] {
        for r in reports.iter() {
            println!(
                "{name}: {:<12} score {:.3} deviating {:.3} delta {}",
                r.verdict.to_string(),
                r.score,
                r.deviation_ratio,
                r.estimated_delta_bpm.map_or("-".to_string(), |d| format!("{d:.2} bpm"))
            );
        }
    }
    println!("AUC {:.3} over {} ROC points", roc.auc, roc.points.len());
    println!("\n{}", stego_reports[0].to_report());
    Ok(())
}
