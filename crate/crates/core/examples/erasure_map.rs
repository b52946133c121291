//! Small erasure campaign: per-scenario mean, radial profile and heatmap.

use ntnsim::runner::{run_erasure_experiment, MetricMode, ScenarioSpec, SimConfig};

fn main() -> ntnsim::Result<()> {
    let cfg = SimConfig::default();
    for s in ["LEO", "HAPS", "TN(10)", "HAPS+TN(10)"] {
        let spec = ScenarioSpec {
            scenario: s.parse()?,
            n_devices: 200,
            n_runs: 20,
            duration_s: 2.0 * 3600.0,
            mode: MetricMode::Erasure,
            master_seed: 5,
        };
        let out = run_erasure_experiment(&cfg, &spec)?;
        let rings: Vec<String> = out
            .profile
            .rings()
            .iter()
            .map(|r| r.mean.map_or("-".into(), |m| format!("{m:.3}")))
            .collect();
        println!(
            "{s:<12} mean {:.4}  IQR {:.4}  {} heatmap cells  rings {}",
            out.mean_erasure,
            out.summary.iqr(),
            out.heatmap.non_empty().count(),
            rings.join(" ")
        );
    }
    Ok(())
}
