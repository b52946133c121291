//! Reductions of per-unit and per-packet outcomes into plot-ready statistics.
//!
//! Accumulators here are merged in a fixed order by the runner, so results do
//! not depend on how many workers produced the per-run partials.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::lrfhss::DeviceErasure;

const Z95: f64 = 1.959_963_984_540_054;

/// Fraction of erased units.
pub fn erasure_probability(flags: &[bool]) -> Result<f64> {
    if flags.is_empty() {
        return Err(Error::EmptyInput("erasure flags"));
    }
    Ok(flags.iter().filter(|&&e| e).count() as f64 / flags.len() as f64)
}

/// Network-level erasure from `[gateway][unit]` flags: a unit is lost only if
/// every gateway erased it.
pub fn network_erasure_probability(per_gateway: &[Vec<bool>]) -> Result<f64> {
    let Some(first) = per_gateway.first() else {
        return Err(Error::EmptyInput("gateways"));
    };
    if per_gateway.iter().any(|g| g.len() != first.len()) {
        return Err(Error::Domain("gateways disagree on unit count".into()));
    }
    let lost: Vec<bool> = (0..first.len())
        .map(|u| per_gateway.iter().all(|g| g[u]))
        .collect();
    erasure_probability(&lost)
}

/// Mean erasure of one device in one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErasureSample {
    pub position: Position,
    pub mean_erasure: f64,
}

impl ErasureSample {
    /// `None` for a device that sent nothing.
    pub fn from_device(d: &DeviceErasure) -> Option<Self> {
        d.mean().map(|mean_erasure| Self {
            position: d.position,
            mean_erasure,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }

    fn std_dev(&self) -> Option<f64> {
        if self.n < 2 {
            return None;
        }
        let n = self.n as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        Some(var.max(0.0).sqrt())
    }

    fn std_error(&self) -> Option<f64> {
        self.std_dev().map(|s| s / (self.n as f64).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingStat {
    pub inner_m: f64,
    pub outer_m: f64,
    pub n: u64,
    /// `None` when no sample fell in the ring.
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
}

/// Equal-width radial rings over `[0, radius_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    radius_m: f64,
    rings: Vec<Moments>,
}

impl RadialProfile {
    pub fn new(n_rings: usize, radius_m: f64) -> Result<Self> {
        if n_rings == 0 {
            return Err(Error::Domain("n_rings must be at least 1".into()));
        }
        if !(radius_m > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {radius_m}")));
        }
        Ok(Self {
            radius_m,
            rings: vec![Moments::default(); n_rings],
        })
    }

    pub fn add(&mut self, s: &ErasureSample) {
        let n = self.rings.len();
        let i = ((s.position.range() / self.radius_m) * n as f64) as usize;
        self.rings[i.min(n - 1)].add(s.mean_erasure);
    }

    pub fn merge(&mut self, o: &RadialProfile) {
        for (a, b) in self.rings.iter_mut().zip(&o.rings) {
            a.merge(b);
        }
    }

    pub fn rings(&self) -> Vec<RingStat> {
        let w = self.radius_m / self.rings.len() as f64;
        self.rings
            .iter()
            .enumerate()
            .map(|(i, m)| RingStat {
                inner_m: i as f64 * w,
                outer_m: (i + 1) as f64 * w,
                n: m.n,
                mean: m.mean(),
                std_error: m.std_error(),
            })
            .collect()
    }

    /// Largest minus smallest populated ring mean.
    pub fn spread(&self) -> Option<f64> {
        let means: Vec<f64> = self.rings.iter().filter_map(Moments::mean).collect();
        let max = means.iter().cloned().reduce(f64::max)?;
        let min = means.iter().cloned().reduce(f64::min)?;
        Some(max - min)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ring_inner_m", "ring_outer_m", "n", "mean_erasure", "std_error"])?;
        for r in self.rings() {
            w.write_record(&[
                r.inner_m.to_string(),
                r.outer_m.to_string(),
                r.n.to_string(),
                opt(r.mean),
                opt(r.std_error),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn radial_profile(samples: &[ErasureSample], n_rings: usize, radius_m: f64) -> Result<Vec<RingStat>> {
    let mut p = RadialProfile::new(n_rings, radius_m)?;
    samples.iter().for_each(|s| p.add(s));
    Ok(p.rings())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatmapCell {
    pub x_center_m: f64,
    pub y_center_m: f64,
    pub n: u64,
    pub sum: f64,
    /// Bin centre lies outside the deployment disk.
    pub outside_disk: bool,
}

impl HeatmapCell {
    pub fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

/// Square bins over `[-R, R]^2`, row-major from the lower-left corner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapGrid {
    pub radius_m: f64,
    pub bin_size_m: f64,
    pub bins_per_side: usize,
    pub cells: Vec<HeatmapCell>,
}

impl HeatmapGrid {
    pub fn new(radius_m: f64, bin_size_m: f64) -> Result<Self> {
        if !(bin_size_m > 0.0) || !(radius_m > 0.0) {
            return Err(Error::Domain(format!(
                "heatmap needs positive radius and bin size, got {radius_m} and {bin_size_m}"
            )));
        }
        let side = ((2.0 * radius_m / bin_size_m).ceil() as usize).max(1);
        let mut cells = Vec::with_capacity(side * side);
        for iy in 0..side {
            for ix in 0..side {
                let x = -radius_m + (ix as f64 + 0.5) * bin_size_m;
                let y = -radius_m + (iy as f64 + 0.5) * bin_size_m;
                cells.push(HeatmapCell {
                    x_center_m: x,
                    y_center_m: y,
                    n: 0,
                    sum: 0.0,
                    outside_disk: x.hypot(y) > radius_m,
                });
            }
        }
        Ok(Self {
            radius_m,
            bin_size_m,
            bins_per_side: side,
            cells,
        })
    }

    fn index(&self, p: &Position) -> usize {
        let clamp = |v: f64| {
            let i = ((v + self.radius_m) / self.bin_size_m).floor();
            (i.max(0.0) as usize).min(self.bins_per_side - 1)
        };
        clamp(p.y_m) * self.bins_per_side + clamp(p.x_m)
    }

    pub fn add(&mut self, s: &ErasureSample) {
        let i = self.index(&s.position);
        let c = &mut self.cells[i];
        c.n += 1;
        c.sum += s.mean_erasure;
    }

    pub fn merge(&mut self, o: &HeatmapGrid) {
        for (a, b) in self.cells.iter_mut().zip(&o.cells) {
            a.n += b.n;
            a.sum += b.sum;
        }
    }

    pub fn non_empty(&self) -> impl Iterator<Item = &HeatmapCell> {
        self.cells.iter().filter(|c| c.n > 0)
    }

    /// Count-weighted mean over bins.
    pub fn weighted_mean(&self) -> Option<f64> {
        let n: u64 = self.cells.iter().map(|c| c.n).sum();
        let s: f64 = self.cells.iter().map(|c| c.sum).sum();
        (n > 0).then(|| s / n as f64)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x_bin_m", "y_bin_m", "mean_erasure", "n"])?;
        for c in &self.cells {
            if c.outside_disk && c.n == 0 {
                continue;
            }
            w.write_record(&[
                c.x_center_m.to_string(),
                c.y_center_m.to_string(),
                opt(c.mean()),
                c.n.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn build_heatmap(samples: &[ErasureSample], bin_size_m: f64, radius_m: f64) -> Result<HeatmapGrid> {
    let mut g = HeatmapGrid::new(radius_m, bin_size_m)?;
    samples.iter().for_each(|s| g.add(s));
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessPoint {
    pub n_devices: usize,
    pub runs: usize,
    pub mean: f64,
    /// Half-width of the normal-approximation 95% interval; zero for one run.
    pub ci95: f64,
}

/// Mean over runs of per-run device-averaged success.
pub fn success_statistics(n_devices: usize, run_means: &[f64]) -> Result<SuccessPoint> {
    if run_means.is_empty() {
        return Err(Error::EmptyInput("success runs"));
    }
    let mut m = Moments::default();
    run_means.iter().for_each(|&x| m.add(x));
    Ok(SuccessPoint {
        n_devices,
        runs: run_means.len(),
        mean: m.mean().unwrap_or(0.0),
        ci95: m.std_error().map_or(0.0, |se| Z95 * se),
    })
}

pub fn write_success_csv<W: Write>(points: &[SuccessPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_devices", "mean", "ci95", "runs"])?;
    for p in points {
        w.write_record(&[
            p.n_devices.to_string(),
            p.mean.to_string(),
            p.ci95.to_string(),
            p.runs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// Normalised so the histogram integrates to one.
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub histogram: Vec<HistogramBin>,
}

impl DistributionSummary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["statistic", "lo", "hi", "value"])?;
        for (k, v) in [
            ("n", self.n as f64),
            ("mean", self.mean),
            ("min", self.min),
            ("q1", self.q1),
            ("median", self.median),
            ("q3", self.q3),
            ("max", self.max),
        ] {
            w.write_record(&[k.to_string(), String::new(), String::new(), v.to_string()])?;
        }
        for b in &self.histogram {
            w.write_record(&[
                "density".to_string(),
                b.lo.to_string(),
                b.hi.to_string(),
                b.density.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Linear-interpolation quantile of sorted data; the median of an even sample
/// is the midpoint of the two central values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quantiles, mean and a fixed-bin density histogram over `range`.
pub fn distribution_summary(samples: &[f64], n_bins: usize, range: (f64, f64)) -> Result<DistributionSummary> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("distribution samples"));
    }
    if n_bins == 0 || !(range.1 > range.0) {
        return Err(Error::Domain(format!("bad histogram: {n_bins} bins over {range:?}")));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let width = (range.1 - range.0) / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &x in &sorted {
        let i = ((x - range.0) / width).floor();
        counts[(i.max(0.0) as usize).min(n_bins - 1)] += 1;
    }
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistogramBin {
            lo: range.0 + i as f64 * width,
            hi: range.0 + (i + 1) as f64 * width,
            count,
            density: count as f64 / (n as f64 * width),
        })
        .collect();
    Ok(DistributionSummary {
        n,
        mean: sorted.iter().sum::<f64>() / n as f64,
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[n - 1],
        histogram,
    })
}
