//! Mean received power and erasure odds for each gateway kind versus range.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ntnsim::channel::{shadowed_rice_params, ChannelModel, LinkKind};
use ntnsim::geometry::{haps_distance, haps_elevation, HapsConfig, Position, RegionConfig};

fn main() -> ntnsim::Result<()> {
    let ch = ChannelModel::default();
    let sens = ch.link.sensitivity_dbm;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws = 20_000;

    println!("terrestrial");
    for km in [1.0, 5.0, 10.0, 20.0, 40.0] {
        let d = km * 1e3;
        let lost = (0..draws)
            .filter(|_| ch.received_power_dbm(LinkKind::Terrestrial, d, None, &mut rng).unwrap() < sens)
            .count();
        println!(
            "  {km:>5.1} km  mean {:>7.1} dBm  erasure {:.3}",
            ch.mean_received_power_dbm(LinkKind::Terrestrial, d)?,
            lost as f64 / draws as f64
        );
    }

    println!("HAPS");
    let region = RegionConfig::default();
    let haps = HapsConfig::default();
    for km in [0.0, 20.0, 40.0, 60.0, 80.0] {
        let dev = Position::new(km * 1e3, 0.0);
        let (d, alpha) = (haps_distance(&dev, &haps), haps_elevation(&dev, &haps, &region));
        let lost = (0..draws)
            .filter(|_| ch.received_power_dbm(LinkKind::Haps, d, Some(alpha), &mut rng).unwrap() < sens)
            .count();
        let p = shadowed_rice_params(alpha)?;
        println!(
            "  {km:>5.1} km  elev {:>5.1} deg  mean {:>7.1} dBm  fading k={:.2} theta={:.3}  erasure {:.4}",
            alpha.to_degrees(),
            ch.mean_received_power_dbm(LinkKind::Haps, d)?,
            p.k,
            p.theta,
            lost as f64 / draws as f64
        );
    }
    Ok(())
}
