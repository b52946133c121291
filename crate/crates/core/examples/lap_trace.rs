//! Samples LEO pass durations and prints one pass as CSV on stdout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ntnsim::orbit::{derive_constants, lap_cdf, sample_lap, write_lap_trace, OrbitConfig};

fn main() -> ntnsim::Result<()> {
    let d = derive_constants(&OrbitConfig::default());
    eprintln!("longest pass T_m = {:.2} s", d.max_lap_s);
    for q in [100.0, 200.0, 300.0, 400.0, 440.0] {
        eprintln!("P(lap <= {q:>3} s) = {:.4}", lap_cdf(q, &d));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lap = sample_lap(&d, &mut rng)?;
    eprintln!("pass of {:.1} s at azimuth {:.1} deg", lap.duration_s, lap.azimuth_rad.to_degrees());
    write_lap_trace(std::io::stdout().lock(), &lap, &d, 10.0)
}
