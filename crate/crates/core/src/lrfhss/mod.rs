//! LR-FHSS uplink over unslotted ALOHA.
//!
//! A packet is three header replicas followed by `f` payload fragments, each
//! sent on its own pseudo-random narrow channel. A gateway decodes a packet
//! when it receives at least one header and `ceil(f * CR)` fragments; a unit
//! is received when its power clears the sensitivity and no other unit
//! overlaps it in time on the same channel.

mod collision;
mod decode;
mod link;
mod sim;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use collision::{detect_collisions, OverlapIndex};
pub use decode::{decode_at_gateway, decode_packet, PacketDecision, UnitOutcome};
pub use link::{evaluate_links, LinkEnvironment, LinkSample, LinkState};
pub use sim::{
    simulate_erasure, simulate_success, write_trace, CollisionModel, DeviceErasure,
    DeviceSuccess, RunInputs, SuccessTally,
};

/// Coding rate as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CodingRate {
    num: u32,
    den: u32,
}

impl CodingRate {
    pub const ONE_THIRD: CodingRate = CodingRate { num: 1, den: 3 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 || num > den {
            return Err(Error::config(
                "coding_rate",
                format!("{num}/{den} must lie in (0, 1]"),
            ));
        }
        Ok(Self { num, den })
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `ceil(n * CR)` in exact integer arithmetic.
    pub fn ceil_fraction_of(&self, n: usize) -> usize {
        (n * self.num as usize).div_ceil(self.den as usize)
    }
}

impl fmt::Display for CodingRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for CodingRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("coding_rate", format!("expected `n/d`, got `{s}`"));
        match s.trim().split_once('/') {
            Some((n, d)) => CodingRate::new(
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            ),
            None if s.trim() == "1" => CodingRate::new(1, 1),
            None => Err(bad()),
        }
    }
}

impl TryFrom<String> for CodingRate {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CodingRate> for String {
    fn from(cr: CodingRate) -> String {
        cr.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrFhssConfig {
    pub n_channels: u16,
    pub n_header_copies: usize,
    pub header_duration_s: f64,
    pub fragment_duration_s: f64,
    pub coding_rate: CodingRate,
    pub payload_bytes: usize,
    /// Physical channel width; informational only.
    pub channel_width_hz: f64,
}

impl Default for LrFhssConfig {
    fn default() -> Self {
        Self {
            n_channels: 35,
            n_header_copies: 3,
            header_duration_s: 0.233_472,
            fragment_duration_s: 0.1024,
            coding_rate: CodingRate::ONE_THIRD,
            payload_bytes: 10,
            channel_width_hz: 488.0,
        }
    }
}

impl LrFhssConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_channels == 0 {
            return Err(Error::config("n_channels", "must be >= 1"));
        }
        if self.n_header_copies == 0 {
            return Err(Error::config("n_header_copies", "must be >= 1"));
        }
        if !(self.header_duration_s > 0.0 && self.fragment_duration_s > 0.0) {
            return Err(Error::config("header_duration_s", "unit durations must be > 0"));
        }
        Ok(())
    }

    pub fn fragments(&self) -> usize {
        fragment_count(self.payload_bytes, self.coding_rate)
    }

    pub fn units_per_packet(&self) -> usize {
        self.n_header_copies + self.fragments()
    }

    /// Received fragments needed to rebuild the payload.
    pub fn decode_threshold(&self) -> usize {
        self.coding_rate.ceil_fraction_of(self.fragments())
    }
}

/// Number of payload fragments `ceil((b + 3) / (6 CR))`.
pub fn fragment_count(payload_bytes: usize, cr: CodingRate) -> usize {
    ((payload_bytes + 3) * cr.den as usize).div_ceil(6 * cr.num as usize)
}

pub fn time_on_air(cfg: &LrFhssConfig) -> f64 {
    cfg.n_header_copies as f64 * cfg.header_duration_s
        + cfg.fragments() as f64 * cfg.fragment_duration_s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Header,
    Fragment,
}

impl UnitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            UnitKind::Header => "header",
            UnitKind::Fragment => "fragment",
        }
    }
}

/// One header or fragment on the air.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Unit {
    pub kind: UnitKind,
    pub channel: u16,
    pub start_s: f64,
    pub duration_s: f64,
}

impl Unit {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.duration_s
    }

    /// Nonzero overlap in time on the same channel.
    pub fn overlaps(&self, other: &Unit) -> bool {
        self.channel == other.channel
            && self.start_s < other.end_s()
            && other.start_s < self.end_s()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissionRecord {
    pub device_id: u32,
    pub start_s: f64,
    /// Headers first, then fragments, back to back.
    pub units: Vec<Unit>,
}

impl TransmissionRecord {
    /// Lays out units back to back from `start_s` on the given channels.
    pub fn new(device_id: u32, start_s: f64, hops: &[u16], cfg: &LrFhssConfig) -> Self {
        let mut t = start_s;
        let units = hops
            .iter()
            .enumerate()
            .map(|(i, &channel)| {
                let (kind, duration_s) = if i < cfg.n_header_copies {
                    (UnitKind::Header, cfg.header_duration_s)
                } else {
                    (UnitKind::Fragment, cfg.fragment_duration_s)
                };
                let unit = Unit {
                    kind,
                    channel,
                    start_s: t,
                    duration_s,
                };
                t += duration_s;
                unit
            })
            .collect();
        Self {
            device_id,
            start_s,
            units,
        }
    }

    pub fn end_s(&self) -> f64 {
        self.units.last().map_or(self.start_s, Unit::end_s)
    }
}

/// Channel indices for one packet: header replicas first, each on a channel
/// different from the previous replica, then i.i.d. fragment channels.
pub fn generate_hop_sequence<R: Rng + ?Sized>(cfg: &LrFhssConfig, rng: &mut R) -> Result<Vec<u16>> {
    let n = cfg.n_channels;
    if cfg.n_header_copies > 1 && (n as usize) < cfg.n_header_copies {
        return Err(Error::config(
            "n_channels",
            format!(
                "{n} channels cannot carry {} distinct header replicas",
                cfg.n_header_copies
            ),
        ));
    }
    let mut hops = Vec::with_capacity(cfg.units_per_packet());
    for i in 0..cfg.n_header_copies {
        let mut ch = rng.random_range(0..n);
        if i > 0 {
            while ch == hops[i - 1] {
                ch = rng.random_range(0..n);
            }
        }
        hops.push(ch);
    }
    for _ in 0..cfg.fragments() {
        hops.push(rng.random_range(0..n));
    }
    Ok(hops)
}

/// Poisson traffic per device over `[0, horizon_s)`: exponential gaps with
/// mean `mean_interval_s`, the next arrival drawn after the previous packet
/// ends. Records come grouped by device, in time order.
pub fn schedule_traffic<R: Rng + ?Sized>(
    n_devices: usize,
    horizon_s: f64,
    mean_interval_s: f64,
    cfg: &LrFhssConfig,
    rng: &mut R,
) -> Result<Vec<TransmissionRecord>> {
    if !(horizon_s > 0.0) {
        return Err(Error::config("duration", "horizon must be > 0"));
    }
    if !(mean_interval_s > 0.0) {
        return Err(Error::config("mean_interval_s", "must be > 0"));
    }
    if mean_interval_s.is_infinite() {
        return Ok(Vec::new());
    }
    let gap = Exp::new(1.0 / mean_interval_s).expect("positive rate");
    let toa = time_on_air(cfg);
    let expected = (n_devices as f64 * horizon_s / (mean_interval_s + toa)).ceil() as usize;
    let mut out = Vec::with_capacity(expected + expected / 8 + 1);
    for device in 0..n_devices {
        let mut t = gap.sample(rng);
        while t < horizon_s {
            let hops = generate_hop_sequence(cfg, rng)?;
            out.push(TransmissionRecord::new(device as u32, t, &hops, cfg));
            t += toa + gap.sample(rng);
        }
    }
    Ok(out)
}
