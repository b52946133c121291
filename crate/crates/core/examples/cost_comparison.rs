//! Twenty-year discounted cost of each deployment and where they cross.

use ntnsim::cost::{cost_report, crossover_devices, npv_total, CostConfig, CROSSOVER_SEARCH_CAP};

fn main() -> ntnsim::Result<()> {
    let cfg = CostConfig::default();
    println!("HAPS total ${:.0}", npv_total(&cfg.haps(), 0, 0));
    for m in [10, 20] {
        println!("TN({m}) total ${:.0}", npv_total(&cfg.terrestrial(), 0, m));
    }
    match crossover_devices(&cfg.leo(), &cfg.haps(), 0, CROSSOVER_SEARCH_CAP) {
        Some(n) => println!("LEO costs more than HAPS from N = {n}"),
        None => println!("LEO never costs more than HAPS"),
    }

    let devices: Vec<u64> = (0..=20_000).step_by(5_000).collect();
    let report = cost_report(&cfg, &devices, &[10, 20]);
    report.write_csv(std::io::stdout().lock())
}
