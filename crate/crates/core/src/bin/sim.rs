use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

use ntnsim::runner::export::{export_cost, export_erasure, export_success, write_csv_file, write_summary};
use ntnsim::runner::seed::entropy_seed;
use ntnsim::runner::{
    run_cost_report, run_erasure_experiment, run_success_experiment, write_orbit_trace, Metadata, MetricMode,
    Scenario, ScenarioSpec, SimConfig,
};
use ntnsim::Result;

#[derive(Parser)]
#[command(name = "sim", version, about = "HAPS / LEO / terrestrial IoT uplink simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Network-level erasure maps, radial profiles and violin data.
    Erasure(Common),
    /// LR-FHSS packet success over a device-count sweep.
    Success {
        #[command(flatten)]
        common: Common,
        /// Comma-separated device counts; overrides `success_devices`.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<usize>>,
    },
    /// Discounted cost curves and crossover table.
    Cost(Common),
    /// Satellite track over randomly drawn laps.
    OrbitTrace {
        #[command(flatten)]
        common: Common,
        /// Sampling step in seconds.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Print every configuration key with its default value.
    Defaults,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario such as `HAPS`, `TN(20)` or `LEO+HAPS+TN(10)`; repeatable.
    #[arg(long)]
    scenario: Vec<Scenario>,
    #[arg(long)]
    devices: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    /// Simulated time per run, hours.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Reuse one base-station layout for every run.
    #[arg(long)]
    fixed_layout: bool,
}

impl Common {
    fn load(&self) -> Result<(SimConfig, u64)> {
        let mut cfg = match &self.config {
            Some(p) => SimConfig::load(p)?,
            None => SimConfig::default(),
        };
        let r = &mut cfg.run;
        r.n_devices = self.devices.unwrap_or(r.n_devices);
        r.n_runs = self.runs.unwrap_or(r.n_runs);
        r.duration_s = self.duration.map_or(r.duration_s, |h| h * 3600.0);
        r.workers = self.workers.or(r.workers);
        r.fixed_layout |= self.fixed_layout;
        r.seed = self.seed.or(r.seed);
        cfg.validate()?;
        let seed = match cfg.run.seed {
            Some(s) => s,
            None => {
                let s = entropy_seed();
                info!("no seed given, using {s}");
                cfg.run.seed = Some(s);
                s
            }
        };
        Ok((cfg, seed))
    }

    fn scenarios(&self, fallback: &[&str]) -> Vec<Scenario> {
        if self.scenario.is_empty() {
            fallback.iter().map(|s| s.parse().expect("built-in scenario")).collect()
        } else {
            self.scenario.clone()
        }
    }

    fn spec(&self, cfg: &SimConfig, scenario: Scenario, mode: MetricMode, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            scenario,
            n_devices: cfg.run.n_devices,
            n_runs: cfg.run.n_runs,
            duration_s: cfg.run.duration_s,
            mode,
            master_seed: seed,
        }
    }
}

const ALL_SCENARIOS: [&str; 7] = ["TN(10)", "HAPS", "LEO", "HAPS+TN(10)", "LEO+TN(10)", "LEO+HAPS", "LEO+HAPS+TN(10)"];

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Erasure(c) => {
            let (cfg, seed) = c.load()?;
            let mut results = Vec::new();
            for sc in c.scenarios(&ALL_SCENARIOS) {
                let out = run_erasure_experiment(&cfg, &c.spec(&cfg, sc, MetricMode::Erasure, seed))?;
                let meta = Metadata::new("erasure", Some(sc.to_string()), seed, cfg.hash());
                for p in export_erasure(&c.out_dir, &meta, &out)? {
                    info!("wrote {}", p.display());
                }
                println!("{sc}: mean erasure {:.4} (se {:.4})", out.mean_erasure, out.std_error);
                results.push(json!({
                    "scenario": sc.to_string(),
                    "mean_erasure": out.mean_erasure,
                    "std_error": out.std_error,
                    "median": out.summary.median,
                    "q1": out.summary.q1,
                    "q3": out.summary.q3,
                    "radial_means": out.profile.rings().iter().map(|r| r.mean).collect::<Vec<_>>(),
                }));
            }
            let meta = Metadata::new("erasure", None, seed, cfg.hash());
            write_summary(&c.out_dir, &meta, results)?;
        }
        Command::Success { common: c, sweep } => {
            let (cfg, seed) = c.load()?;
            let sweep = sweep.unwrap_or_else(|| cfg.run.success_devices.clone());
            let mut results = Vec::new();
            for sc in c.scenarios(&["TN(20)", "HAPS", "LEO", "HAPS+TN(20)", "LEO+TN(20)"]) {
                let out = run_success_experiment(&cfg, &c.spec(&cfg, sc, MetricMode::Success, seed), &sweep)?;
                let meta = Metadata::new("success", Some(sc.to_string()), seed, cfg.hash());
                info!("wrote {}", export_success(&c.out_dir, &meta, &out)?.display());
                for p in &out.points {
                    println!("{sc} N={}: success {:.4} +- {:.4}", p.n_devices, p.mean, p.ci95);
                }
                results.push(json!({ "scenario": sc.to_string(), "points": out.points, "dedup": out.dedup }));
            }
            let meta = Metadata::new("success", None, seed, cfg.hash());
            write_summary(&c.out_dir, &meta, results)?;
        }
        Command::Cost(c) => {
            let (cfg, seed) = c.load()?;
            let report = run_cost_report(&cfg);
            let meta = Metadata::new("cost", None, seed, cfg.hash());
            export_cost(&c.out_dir, &meta, &report)?;
            for x in &report.crossovers {
                match x.n_devices {
                    Some(n) => println!("{} reaches {} at N = {n}", x.a, x.b),
                    None => println!("{} stays below {}", x.a, x.b),
                }
            }
            write_summary(&c.out_dir, &meta, json!({ "crossovers": report.crossovers }))?;
        }
        Command::OrbitTrace { common: c, step } => {
            let (cfg, seed) = c.load()?;
            let meta = Metadata::new("orbit-trace", Some("LEO".into()), seed, cfg.hash());
            let mut rows = 0;
            let path = write_csv_file(&c.out_dir, "orbit_trace.csv", &meta, |w| {
                rows = write_orbit_trace(&cfg, seed, cfg.run.duration_s, step, w)?;
                Ok(())
            })?;
            println!("{rows} samples written to {}", path.display());
            write_summary(&c.out_dir, &meta, json!({ "samples": rows }))?;
        }
        Command::Defaults => print!("{}", SimConfig::default().to_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
