use std::io::Write;

use log::debug;
use rayon::prelude::*;
use serde::Serialize;

use super::config::SimConfig;
use super::scenario::{Scenario, ScenarioSpec};
use super::seed::{fading_key, run_rng, Purpose};
use crate::cost::{cost_report, CostReport};
use crate::error::{Error, Result};
use crate::geometry::{deploy_basestations, deploy_devices, BasestationLayout, Position};
use crate::lrfhss::{
    schedule_traffic, simulate_erasure, simulate_success, LinkEnvironment, RunInputs, TransmissionRecord,
};
use crate::metrics::{
    distribution_summary, success_statistics, DistributionSummary, ErasureSample, HeatmapGrid, RadialProfile,
    SuccessPoint,
};
use crate::network::Gateway;
use crate::orbit::{derive_constants, satellite_state, LapSchedule};

/// Everything drawn at random for one run.
#[derive(Debug, Clone)]
pub struct RunWorld {
    pub devices: Vec<Position>,
    pub gateways: Vec<Gateway>,
    pub records: Vec<TransmissionRecord>,
    pub laps: Option<LapSchedule>,
    pub fading_key: u64,
}

/// Draws run `run` of `scenario`. Each ingredient has its own stream, so the
/// same run index sees the same devices, traffic and base stations in every
/// scenario that shares them.
pub fn draw_run(cfg: &SimConfig, scenario: Scenario, n_devices: usize, master_seed: u64, run: u64) -> Result<RunWorld> {
    let devices = deploy_devices(n_devices, &cfg.region, &mut run_rng(master_seed, run, Purpose::Devices))?;
    let layout = if scenario.terrestrial_bs > 0 {
        let layout_run = if cfg.run.fixed_layout { 0 } else { run };
        deploy_basestations(
            scenario.terrestrial_bs,
            &cfg.region,
            cfg.run.placement_attempts,
            &mut run_rng(master_seed, layout_run, Purpose::Layout),
        )?
    } else {
        BasestationLayout::default()
    };
    let laps = if scenario.leo {
        let d = derive_constants(&cfg.orbit);
        Some(LapSchedule::generate(
            &d,
            cfg.run.duration_s,
            &mut run_rng(master_seed, run, Purpose::Orbit),
        )?)
    } else {
        None
    };
    let records = schedule_traffic(
        n_devices,
        cfg.run.duration_s,
        cfg.run.mean_interval_s,
        &cfg.lrfhss,
        &mut run_rng(master_seed, run, Purpose::Traffic),
    )?;
    let set = scenario.gateway_set(layout, cfg.haps);
    set.validate()?;
    Ok(RunWorld {
        devices,
        gateways: set.gateways(),
        records,
        laps,
        fading_key: fading_key(master_seed, run),
    })
}

impl RunWorld {
    pub fn inputs<'a>(&'a self, cfg: &'a SimConfig) -> RunInputs<'a> {
        RunInputs {
            devices: &self.devices,
            gateways: &self.gateways,
            records: &self.records,
            env: LinkEnvironment {
                channel: &cfg.channel,
                region: &cfg.region,
                haps: cfg.haps,
                laps: self.laps.as_ref(),
                fading_key: self.fading_key,
            },
            lrfhss: &cfg.lrfhss,
        }
    }
}

fn worker_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Domain(format!("worker pool: {e}")))
}

/// Runs `task` for every run index on the pool and feeds the results to
/// `fold` in run order.
fn for_each_run<T, F, G>(pool: &rayon::ThreadPool, n_runs: usize, task: F, mut fold: G) -> Result<()>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
    G: FnMut(T),
{
    let batch = (pool.current_num_threads() * 4).max(16);
    let mut start = 0;
    while start < n_runs {
        let end = (start + batch).min(n_runs);
        let out: Vec<T> = pool.install(|| {
            (start as u64..end as u64)
                .into_par_iter()
                .map(&task)
                .collect::<Result<Vec<_>>>()
        })?;
        out.into_iter().for_each(&mut fold);
        start = end;
    }
    Ok(())
}

fn std_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct ErasureOutcome {
    pub scenario: Scenario,
    pub n_devices: usize,
    pub n_runs: usize,
    /// Mean over all (device, run) samples.
    pub mean_erasure: f64,
    /// Standard error of the per-run mean erasure.
    pub std_error: f64,
    pub run_means: Vec<f64>,
    #[serde(skip)]
    pub heatmap: HeatmapGrid,
    #[serde(skip)]
    pub profile: RadialProfile,
    pub summary: DistributionSummary,
}

/// Network-level erasure with collisions off: fresh devices, base stations
/// and laps per run.
pub fn run_erasure_experiment(cfg: &SimConfig, spec: &ScenarioSpec) -> Result<ErasureOutcome> {
    spec.validate()?;
    let mut cfg = cfg.clone();
    cfg.run.duration_s = spec.duration_s;
    let cfg = &cfg;
    let pool = worker_pool(cfg.run.workers)?;
    let mut heatmap = HeatmapGrid::new(cfg.region.radius_m, cfg.run.heatmap_bin_m)?;
    let mut profile = RadialProfile::new(cfg.run.radial_rings, cfg.region.radius_m)?;
    let mut values = Vec::new();
    let mut run_means = Vec::with_capacity(spec.n_runs);
    for_each_run(
        &pool,
        spec.n_runs,
        |run| {
            let world = draw_run(cfg, spec.scenario, spec.n_devices, spec.master_seed, run)?;
            let per_device = simulate_erasure(&world.inputs(cfg));
            Ok(per_device.iter().filter_map(ErasureSample::from_device).collect::<Vec<_>>())
        },
        |samples| {
            if samples.is_empty() {
                return;
            }
            let mut sum = 0.0;
            for s in &samples {
                heatmap.add(s);
                profile.add(s);
                values.push(s.mean_erasure);
                sum += s.mean_erasure;
            }
            run_means.push(sum / samples.len() as f64);
        },
    )?;
    if values.is_empty() {
        return Err(Error::EmptyInput("no device transmitted in any run"));
    }
    let summary = distribution_summary(&values, cfg.run.violin_bins, (0.0, 1.0))?;
    debug!("{} erasure: mean {:.4} over {} samples", spec.scenario, summary.mean, values.len());
    Ok(ErasureOutcome {
        scenario: spec.scenario,
        n_devices: spec.n_devices,
        n_runs: spec.n_runs,
        mean_erasure: summary.mean,
        std_error: std_error(&run_means),
        run_means,
        heatmap,
        profile,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DedupStats {
    pub n_devices: usize,
    pub packets: u64,
    pub decoded: u64,
    /// Gateway receptions of decoded packets, duplicates included.
    pub gateway_decodes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuccessOutcome {
    pub scenario: Scenario,
    pub n_runs: usize,
    pub points: Vec<SuccessPoint>,
    pub dedup: Vec<DedupStats>,
}

/// Packet success with erasure and collisions for every device count in
/// `sweep`.
pub fn run_success_experiment(cfg: &SimConfig, spec: &ScenarioSpec, sweep: &[usize]) -> Result<SuccessOutcome> {
    if sweep.is_empty() {
        return Err(Error::EmptyInput("device sweep"));
    }
    let mut cfg = cfg.clone();
    cfg.run.duration_s = spec.duration_s;
    let cfg = &cfg;
    let pool = worker_pool(cfg.run.workers)?;
    let mut points = Vec::with_capacity(sweep.len());
    let mut dedup = Vec::with_capacity(sweep.len());
    for &n in sweep {
        let point_spec = ScenarioSpec {
            n_devices: n,
            ..spec.clone()
        };
        point_spec.validate()?;
        let mut means = Vec::with_capacity(spec.n_runs);
        let mut stats = DedupStats {
            n_devices: n,
            packets: 0,
            decoded: 0,
            gateway_decodes: 0,
        };
        for_each_run(
            &pool,
            spec.n_runs,
            |run| {
                let world = draw_run(cfg, spec.scenario, n, spec.master_seed, run)?;
                Ok(simulate_success(&world.inputs(cfg), cfg.run.collision_model()))
            },
            |tally| {
                stats.packets += tally.packets;
                stats.decoded += tally.decoded;
                stats.gateway_decodes += tally.gateway_decodes;
                if let Some(m) = tally.mean_device_success() {
                    means.push(m);
                }
            },
        )?;
        if means.is_empty() {
            return Err(Error::EmptyInput("no packets to measure"));
        }
        let p = success_statistics(n, &means)?;
        debug!("{} N={n}: success {:.4} +- {:.4}", spec.scenario, p.mean, p.ci95);
        points.push(p);
        dedup.push(stats);
    }
    Ok(SuccessOutcome {
        scenario: spec.scenario,
        n_runs: spec.n_runs,
        points,
        dedup,
    })
}

/// Cost curves over `0..=cost_devices_max` in `cost_devices_step` steps.
pub fn run_cost_report(cfg: &SimConfig) -> CostReport {
    let step = cfg.run.cost_devices_step.max(1);
    let grid: Vec<u64> = (0..=cfg.run.cost_devices_max / step).map(|i| i * step).collect();
    cost_report(&cfg.cost, &grid, &cfg.run.cost_bs_counts)
}

/// Samples laps over `duration_s` and writes the satellite track every
/// `step_s`: `(t_s, lap, elevation_origin_deg, x_m, y_m, z_m)`.
pub fn write_orbit_trace<W: Write>(cfg: &SimConfig, master_seed: u64, duration_s: f64, step_s: f64, out: W) -> Result<usize> {
    if !(step_s > 0.0) || !(duration_s > 0.0) {
        return Err(Error::Domain("trace step and duration must be > 0".into()));
    }
    cfg.orbit.validate()?;
    let d = derive_constants(&cfg.orbit);
    let laps = LapSchedule::generate(&d, duration_s, &mut run_rng(master_seed, 0, Purpose::Orbit))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_s", "lap", "elevation_origin_deg", "x_m", "y_m", "z_m"])?;
    let mut count = 0;
    let steps = (duration_s / step_s).floor() as usize;
    let mut lap_iter = laps.laps().enumerate().peekable();
    for i in 0..=steps {
        let t = i as f64 * step_s;
        while let Some((_, (start, lap))) = lap_iter.peek() {
            if t < start + lap.duration_s {
                break;
            }
            lap_iter.next();
        }
        let Some(&(idx, (start, lap))) = lap_iter.peek() else {
            break;
        };
        let s = satellite_state(t - start, lap, &d);
        w.write_record(&[
            format!("{t:.3}"),
            idx.to_string(),
            format!("{:.6}", s.elevation_origin_rad.to_degrees()),
            format!("{:.3}", s.x_m),
            format!("{:.3}", s.y_m),
            format!("{:.3}", s.z_m),
        ])?;
        count += 1;
    }
    w.flush()?;
    Ok(count)
}
