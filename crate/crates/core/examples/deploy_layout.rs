//! Draws devices and a terrestrial layout, then prints what a HAPS sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ntnsim::geometry::{deploy_basestations, deploy_devices, guard_bs_count, haps_distance, haps_elevation, HapsConfig, RegionConfig};

fn main() -> ntnsim::Result<()> {
    let region = RegionConfig::default();
    let haps = HapsConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    for m in [5, 10, 20] {
        println!("TN({m}) needs {} guard base stations", guard_bs_count(m, &region));
    }
    let layout = deploy_basestations(10, &region, 100_000, &mut rng)?;
    let closest = layout
        .inner
        .iter()
        .flat_map(|a| layout.iter().filter(move |b| *b != a).map(move |b| a.distance_to(b)))
        .fold(f64::INFINITY, f64::min);
    println!("placed {} inner + {} guard, closest pair {:.1} km", layout.inner.len(), layout.guard.len(), closest / 1e3);

    let devices = deploy_devices(5, &region, &mut rng)?;
    println!("{:>10} {:>12} {:>10}", "range_km", "haps_km", "elev_deg");
    for d in &devices {
        println!(
            "{:>10.2} {:>12.2} {:>10.2}",
            d.range() / 1e3,
            haps_distance(d, &haps) / 1e3,
            haps_elevation(d, &haps, &region).to_degrees()
        );
    }
    Ok(())
}
