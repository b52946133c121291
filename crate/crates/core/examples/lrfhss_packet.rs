//! Builds a few LR-FHSS packets, finds their collisions and decodes them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ntnsim::lrfhss::{decode_at_gateway, detect_collisions, generate_hop_sequence, time_on_air, LrFhssConfig, TransmissionRecord, UnitOutcome};

fn main() -> ntnsim::Result<()> {
    // A narrow band makes collisions visible with only a handful of packets.
    let cfg = LrFhssConfig {
        n_channels: 4,
        ..LrFhssConfig::default()
    };
    println!(
        "{} headers + {} fragments, {:.3} s on air, decodes with {} fragments",
        cfg.n_header_copies,
        cfg.fragments(),
        time_on_air(&cfg),
        cfg.decode_threshold()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tx: Vec<TransmissionRecord> = [0.0, 0.3, 0.9, 1.2, 5.0]
        .iter()
        .enumerate()
        .map(|(i, &t)| Ok(TransmissionRecord::new(i as u32, t, &generate_hop_sequence(&cfg, &mut rng)?, &cfg)))
        .collect::<ntnsim::Result<_>>()?;

    let collided = detect_collisions(&tx, |_, _| true);
    for (rec, flags) in tx.iter().zip(&collided) {
        let outcomes: Vec<UnitOutcome> = flags.iter().map(|&c| UnitOutcome::new(false, c)).collect();
        let marks: String = flags.iter().map(|&c| if c { 'x' } else { '.' }).collect();
        println!(
            "device {} at {:.1} s: channels {:?} collisions {marks} -> {}",
            rec.device_id,
            rec.start_s,
            rec.units.iter().map(|u| u.channel).collect::<Vec<_>>(),
            if decode_at_gateway(&outcomes, &cfg) { "decoded" } else { "lost" }
        );
    }
    Ok(())
}
