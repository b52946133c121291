//! Packet success probability against the number of devices.

use ntnsim::runner::{run_success_experiment, MetricMode, ScenarioSpec, SimConfig};

fn main() -> ntnsim::Result<()> {
    let cfg = SimConfig::default();
    let sweep = [100, 1000, 3000];
    println!("{:<12} {}", "scenario", sweep.map(|n| format!("{n:>14}")).join(""));
    for s in ["LEO", "HAPS", "TN(20)", "HAPS+TN(20)"] {
        let spec = ScenarioSpec {
            scenario: s.parse()?,
            n_devices: sweep[0],
            n_runs: 10,
            duration_s: 1800.0,
            mode: MetricMode::Success,
            master_seed: 9,
        };
        let out = run_success_experiment(&cfg, &spec, &sweep)?;
        let cells: String = out.points.iter().map(|p| format!("{:>8.3}+-{:.3}", p.mean, p.ci95)).collect();
        println!("{s:<12} {cells}");
    }
    Ok(())
}
