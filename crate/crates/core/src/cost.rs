//! Discounted total cost of ownership for the three connectivity options.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Yearly price per device as a function of fleet size. Tiers are
/// `(min_devices, usd_per_device)`; the tier with the largest threshold not
/// above `N` applies to every device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceTable {
    pub tiers: Vec<(u64, f64)>,
}

impl PriceTable {
    pub fn flat(usd_per_device: f64) -> Self {
        Self {
            tiers: vec![(0, usd_per_device)],
        }
    }

    pub fn price(&self, n_devices: u64) -> f64 {
        self.tiers
            .iter()
            .filter(|(min, _)| *min <= n_devices)
            .max_by_key(|(min, _)| *min)
            .map_or(0.0, |(_, p)| *p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpexModel {
    Fixed(f64),
    PerDevice(PriceTable),
    PerBasestation(f64),
}

impl OpexModel {
    pub fn yearly(&self, n_devices: u64, n_bs: u64) -> f64 {
        match self {
            OpexModel::Fixed(v) => *v,
            OpexModel::PerDevice(t) => t.price(n_devices) * n_devices as f64,
            OpexModel::PerBasestation(v) => v * n_bs as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub capex_usd: f64,
    pub opex: OpexModel,
    pub discount_rate: f64,
    pub horizon_years: u32,
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.discount_rate >= 0.0) || !self.capex_usd.is_finite() {
            return Err(Error::Domain(format!(
                "discount rate must be non-negative and CAPEX finite, got {} and {}",
                self.discount_rate, self.capex_usd
            )));
        }
        Ok(())
    }
}

/// Cost parameters of the three architectures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostConfig {
    pub haps_capex_usd: f64,
    pub haps_opex_usd: f64,
    pub leo_price: PriceTable,
    pub tower_lease_usd: f64,
    pub discount_rate: f64,
    pub horizon_years: u32,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            haps_capex_usd: 4.0e6,
            haps_opex_usd: 30_000.0,
            leo_price: PriceTable::flat(24.0),
            tower_lease_usd: 12_600.0,
            discount_rate: 0.05,
            horizon_years: 20,
        }
    }
}

impl CostConfig {
    fn model(&self, capex_usd: f64, opex: OpexModel) -> CostModel {
        CostModel {
            capex_usd,
            opex,
            discount_rate: self.discount_rate,
            horizon_years: self.horizon_years,
        }
    }

    pub fn haps(&self) -> CostModel {
        self.model(self.haps_capex_usd, OpexModel::Fixed(self.haps_opex_usd))
    }

    pub fn leo(&self) -> CostModel {
        self.model(0.0, OpexModel::PerDevice(self.leo_price.clone()))
    }

    pub fn terrestrial(&self) -> CostModel {
        self.model(0.0, OpexModel::PerBasestation(self.tower_lease_usd))
    }
}

/// `sum_{n=1..years} (1 + sigma)^-n`.
pub fn annuity_factor(sigma: f64, years: u32) -> f64 {
    let d = 1.0 + sigma;
    (1..=years).map(|n| d.powi(-(n as i32))).sum()
}

pub fn npv_total(model: &CostModel, n_devices: u64, n_bs: u64) -> f64 {
    model.capex_usd
        + model.opex.yearly(n_devices, n_bs) * annuity_factor(model.discount_rate, model.horizon_years)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioCosts {
    pub haps: f64,
    pub leo: f64,
    pub terrestrial: f64,
}

pub fn scenario_costs(cfg: &CostConfig, n_devices: u64, n_bs: u64) -> ScenarioCosts {
    ScenarioCosts {
        haps: npv_total(&cfg.haps(), n_devices, n_bs),
        leo: npv_total(&cfg.leo(), n_devices, n_bs),
        terrestrial: npv_total(&cfg.terrestrial(), n_devices, n_bs),
    }
}

pub const CROSSOVER_SEARCH_CAP: u64 = 100_000_000;

/// Smallest device count at which `a` costs at least as much as `b`, with
/// both evaluated at `n_bs` base stations. Identical models cross at 0.
pub fn crossover_devices(a: &CostModel, b: &CostModel, n_bs: u64, cap: u64) -> Option<u64> {
    let reached = |n: u64| npv_total(a, n, n_bs) >= npv_total(b, n, n_bs);
    if reached(0) {
        return Some(0);
    }
    if !reached(cap) {
        return None;
    }
    // Costs are monotone in N, so the predicate flips once.
    let (mut lo, mut hi) = (0, cap);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossover {
    pub a: String,
    pub b: String,
    pub n_devices: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub n_devices: u64,
    pub haps: f64,
    pub leo: f64,
    /// One entry per requested terrestrial size.
    pub terrestrial: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub bs_counts: Vec<u64>,
    pub horizon_years: u32,
    pub rows: Vec<CostRow>,
    pub crossovers: Vec<Crossover>,
}

/// Cost curves over `devices` plus pairwise crossovers against LEO.
pub fn cost_report(cfg: &CostConfig, devices: &[u64], bs_counts: &[u64]) -> CostReport {
    let (haps, leo, tn) = (cfg.haps(), cfg.leo(), cfg.terrestrial());
    let rows = devices
        .iter()
        .map(|&n| CostRow {
            n_devices: n,
            haps: npv_total(&haps, n, 0),
            leo: npv_total(&leo, n, 0),
            terrestrial: bs_counts.iter().map(|&m| npv_total(&tn, n, m)).collect(),
        })
        .collect();
    let mut crossovers = vec![Crossover {
        a: "LEO".into(),
        b: "HAPS".into(),
        n_devices: crossover_devices(&leo, &haps, 0, CROSSOVER_SEARCH_CAP),
    }];
    for &m in bs_counts {
        crossovers.push(Crossover {
            a: "LEO".into(),
            b: format!("TN({m})"),
            n_devices: crossover_devices(&leo, &tn, m, CROSSOVER_SEARCH_CAP),
        });
    }
    CostReport {
        bs_counts: bs_counts.to_vec(),
        horizon_years: cfg.horizon_years,
        rows,
        crossovers,
    }
}

fn cents(x: f64) -> String {
    format!("{x:.2}")
}

impl CostReport {
    /// Total NPV columns followed by the same values spread over the horizon.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n_devices".to_string(), "cost_haps".into(), "cost_leo".into()];
        header.extend(self.bs_counts.iter().map(|m| format!("cost_terrestrial_{m}")));
        header.extend(["annual_haps".to_string(), "annual_leo".into()]);
        header.extend(self.bs_counts.iter().map(|m| format!("annual_terrestrial_{m}")));
        w.write_record(&header)?;
        let years = f64::from(self.horizon_years.max(1));
        for r in &self.rows {
            let totals: Vec<f64> = [r.haps, r.leo].into_iter().chain(r.terrestrial.iter().copied()).collect();
            let mut rec = vec![r.n_devices.to_string()];
            rec.extend(totals.iter().map(|&v| cents(v)));
            rec.extend(totals.iter().map(|&v| cents(v / years)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
