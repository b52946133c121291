use std::io::Write;

use serde::{Deserialize, Serialize};

use super::collision::OverlapIndex;
use super::decode::UnitOutcome;
use super::link::{LinkEnvironment, LinkState};
use super::{LrFhssConfig, TransmissionRecord};
use crate::error::Result;
use crate::geometry::Position;
use crate::network::Gateway;
use crate::runner::seed::unit_id;

/// Which overlapping units destroy each other at a gateway.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionModel {
    /// No collisions; erasure only.
    Disabled,
    /// Any overlap on the same channel destroys both units, whatever the
    /// collider's power at the gateway.
    #[default]
    Overlap,
    /// An overlapping unit destroys the other only if its own power at that
    /// gateway clears the sensitivity.
    ColliderAboveSensitivity,
}

/// Everything one run needs once deployment and traffic are drawn.
#[derive(Debug, Clone, Copy)]
pub struct RunInputs<'a> {
    pub devices: &'a [Position],
    pub gateways: &'a [Gateway],
    /// Transmissions, ideally grouped by device.
    pub records: &'a [TransmissionRecord],
    pub env: LinkEnvironment<'a>,
    pub lrfhss: &'a LrFhssConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceErasure {
    pub device_id: u32,
    pub position: Position,
    pub units: u64,
    /// Units lost at every gateway.
    pub erased: u64,
}

impl DeviceErasure {
    pub fn mean(&self) -> Option<f64> {
        (self.units > 0).then(|| self.erased as f64 / self.units as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DeviceSuccess {
    pub packets: u64,
    pub decoded: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SuccessTally {
    pub per_device: Vec<DeviceSuccess>,
    pub packets: u64,
    /// Packets decoded by at least one gateway.
    pub decoded: u64,
    /// Sum over packets of the gateways that decoded them (before dedup).
    pub gateway_decodes: u64,
}

impl SuccessTally {
    /// Mean over transmitting devices of their packet success ratio.
    pub fn mean_device_success(&self) -> Option<f64> {
        let (sum, n) = self
            .per_device
            .iter()
            .filter(|d| d.packets > 0)
            .fold((0.0, 0usize), |(s, n), d| {
                (s + d.decoded as f64 / d.packets as f64, n + 1)
            });
        (n > 0).then(|| sum / n as f64)
    }
}

/// Link states of one device towards every gateway.
struct DeviceLinks {
    device: u32,
    /// `(gateway index, state)`, most promising gateway first.
    ordered: Vec<(usize, LinkState)>,
}

impl DeviceLinks {
    fn new(inputs: &RunInputs<'_>, device: u32) -> Self {
        let pos = &inputs.devices[device as usize];
        let ordered = inputs
            .gateways
            .iter()
            .enumerate()
            .map(|(g, gw)| (g, inputs.env.link_state(pos, gw)))
            .collect();
        Self { device, ordered }
    }

    fn sorted(inputs: &RunInputs<'_>, device: u32) -> Self {
        let mut links = Self::new(inputs, device);
        // Dynamic (LEO) links first, then strongest static mean power.
        links.ordered.sort_by(|a, b| {
            let ka = a.1.static_mean_dbm().unwrap_or(f64::INFINITY);
            let kb = b.1.static_mean_dbm().unwrap_or(f64::INFINITY);
            kb.total_cmp(&ka).then(a.0.cmp(&b.0))
        });
        links
    }
}

fn for_each_device_group<'a>(
    records: &'a [TransmissionRecord],
) -> impl Iterator<Item = (u32, std::ops::Range<usize>)> + 'a {
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= records.len() {
            return None;
        }
        let dev = records[start].device_id;
        let end = start
            + records[start..]
                .iter()
                .take_while(|r| r.device_id == dev)
                .count();
        let range = start..end;
        start = end;
        Some((dev, range))
    })
}

/// Network-level erasure per device: a unit counts as erased only when its
/// power is below the sensitivity at every gateway. Collisions are ignored.
pub fn simulate_erasure(inputs: &RunInputs<'_>) -> Vec<DeviceErasure> {
    let mut out: Vec<DeviceErasure> = inputs
        .devices
        .iter()
        .enumerate()
        .map(|(i, p)| DeviceErasure {
            device_id: i as u32,
            position: *p,
            units: 0,
            erased: 0,
        })
        .collect();
    let env = &inputs.env;
    for (dev, range) in for_each_device_group(inputs.records) {
        let links = DeviceLinks::sorted(inputs, dev);
        let pos = &inputs.devices[dev as usize];
        let acc = &mut out[dev as usize];
        for p in range {
            for (u, unit) in inputs.records[p].units.iter().enumerate() {
                let id = unit_id(p, u);
                let lost = links.ordered.iter().all(|(g, state)| {
                    env.is_erased(state, pos, &inputs.gateways[*g], unit, id)
                });
                acc.units += 1;
                acc.erased += lost as u64;
            }
        }
    }
    out
}

struct SuccessEvaluator<'a, 'b> {
    inputs: &'b RunInputs<'a>,
    index: OverlapIndex,
    model: CollisionModel,
}

impl SuccessEvaluator<'_, '_> {
    fn erased(&self, state: &LinkState, packet: usize, unit: usize, g: usize) -> bool {
        let rec = &self.inputs.records[packet];
        self.inputs.env.is_erased(
            state,
            &self.inputs.devices[rec.device_id as usize],
            &self.inputs.gateways[g],
            &rec.units[unit],
            unit_id(packet, unit),
        )
    }

    fn collided(&self, packet: usize, unit: usize, g: usize) -> bool {
        match self.model {
            CollisionModel::Disabled => false,
            CollisionModel::Overlap => self.index.has_overlap(packet, unit),
            CollisionModel::ColliderAboveSensitivity => {
                let gw = &self.inputs.gateways[g];
                self.index.neighbors(packet, unit).iter().any(|&v| {
                    let (q, w) = self.index.owner(v as usize);
                    let dev = &self.inputs.devices[self.inputs.records[q].device_id as usize];
                    let state = self.inputs.env.link_state(dev, gw);
                    !self.erased(&state, q, w, g)
                })
            }
        }
    }

    fn outcome(&self, state: &LinkState, packet: usize, unit: usize, g: usize) -> UnitOutcome {
        let erased = self.erased(state, packet, unit, g);
        UnitOutcome::new(erased, self.collided(packet, unit, g))
    }

    fn received(&self, state: &LinkState, packet: usize, unit: usize, g: usize) -> bool {
        // Pure overlap is a lookup, so test it before drawing fading.
        if self.model == CollisionModel::Overlap {
            return !self.collided(packet, unit, g) && !self.erased(state, packet, unit, g);
        }
        !self.erased(state, packet, unit, g) && !self.collided(packet, unit, g)
    }

    /// Decode rule at one gateway, stopping as soon as the answer is known.
    fn decodes(&self, state: &LinkState, packet: usize, g: usize) -> bool {
        let cfg = self.inputs.lrfhss;
        let n = self.inputs.records[packet].units.len();
        let headers = cfg.n_header_copies.min(n);
        if !(0..headers).any(|u| self.received(state, packet, u, g)) {
            return false;
        }
        let needed = cfg.coding_rate.ceil_fraction_of(n - headers);
        let mut got = 0;
        for u in headers..n {
            if got >= needed {
                break;
            }
            if got + (n - u) < needed {
                return false;
            }
            got += self.received(state, packet, u, g) as usize;
        }
        got >= needed
    }

    /// Under pure overlap collisions, a packet whose surviving units cannot
    /// meet the decode rule fails at every gateway.
    fn hopeless(&self, packet: usize) -> bool {
        if self.model != CollisionModel::Overlap {
            return false;
        }
        let cfg = self.inputs.lrfhss;
        let n = self.inputs.records[packet].units.len();
        let headers = cfg.n_header_copies.min(n);
        let free = |u: usize| !self.index.has_overlap(packet, u);
        let header_free = (0..headers).any(free);
        let fragments_free = (headers..n).filter(|&u| free(u)).count();
        !header_free || fragments_free < cfg.coding_rate.ceil_fraction_of(n - headers)
    }
}

/// Packet success with erasure, collisions and multi-gateway dedup.
pub fn simulate_success(inputs: &RunInputs<'_>, model: CollisionModel) -> SuccessTally {
    let eval = SuccessEvaluator {
        inputs,
        index: OverlapIndex::build(inputs.records),
        model,
    };
    let mut tally = SuccessTally {
        per_device: vec![DeviceSuccess::default(); inputs.devices.len()],
        ..Default::default()
    };
    for (dev, range) in for_each_device_group(inputs.records) {
        let links = DeviceLinks::new(inputs, dev);
        for p in range {
            let decodes = if eval.hopeless(p) {
                0
            } else {
                links
                    .ordered
                    .iter()
                    .filter(|(g, state)| eval.decodes(state, p, *g))
                    .count() as u64
            };
            let acc = &mut tally.per_device[links.device as usize];
            acc.packets += 1;
            acc.decoded += (decodes > 0) as u64;
            tally.packets += 1;
            tally.decoded += (decodes > 0) as u64;
            tally.gateway_decodes += decodes;
        }
    }
    tally
}

/// Writes every unit outcome at every gateway as CSV rows
/// `(device_id, packet_start_s, gateway_id, unit_index, kind, channel,
/// erased, collided, received)`.
pub fn write_trace<W: Write>(inputs: &RunInputs<'_>, model: CollisionModel, out: W) -> Result<()> {
    let eval = SuccessEvaluator {
        inputs,
        index: OverlapIndex::build(inputs.records),
        model,
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "device_id",
        "packet_start_s",
        "gateway_id",
        "unit_index",
        "kind",
        "channel",
        "erased",
        "collided",
        "received",
    ])?;
    for (p, rec) in inputs.records.iter().enumerate() {
        let dev = &inputs.devices[rec.device_id as usize];
        for (g, gw) in inputs.gateways.iter().enumerate() {
            let state = inputs.env.link_state(dev, gw);
            for (u, unit) in rec.units.iter().enumerate() {
                let o = eval.outcome(&state, p, u, g);
                w.write_record(&[
                    rec.device_id.to_string(),
                    format!("{:.6}", rec.start_s),
                    gw.id.to_string(),
                    u.to_string(),
                    unit.kind.as_str().to_string(),
                    unit.channel.to_string(),
                    (o.erased as u8).to_string(),
                    (o.collided as u8).to_string(),
                    (o.received as u8).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{decode_packet, evaluate_links, schedule_traffic};
    use super::*;
    use crate::channel::ChannelModel;
    use crate::geometry::{deploy_basestations, deploy_devices, HapsConfig, RegionConfig};
    use crate::network::GatewaySet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct World {
        devices: Vec<Position>,
        records: Vec<TransmissionRecord>,
        set: GatewaySet,
        channel: ChannelModel,
        region: RegionConfig,
        cfg: LrFhssConfig,
    }

    fn world(n: usize, interval: f64, m: usize, haps: bool) -> World {
        let region = RegionConfig::default();
        let cfg = LrFhssConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64 + m as u64);
        let devices = deploy_devices(n, &region, &mut rng).unwrap();
        let records = schedule_traffic(n, 3600.0, interval, &cfg, &mut rng).unwrap();
        let terrestrial = deploy_basestations(m, &region, 10_000, &mut rng).unwrap();
        World {
            devices,
            records,
            set: GatewaySet {
                terrestrial,
                haps: haps.then(HapsConfig::default),
                leo: false,
            },
            channel: ChannelModel::default(),
            region,
            cfg,
        }
    }

    impl World {
        fn run<T>(&self, set: &GatewaySet, f: impl FnOnce(&RunInputs<'_>) -> T) -> T {
            let gateways = set.gateways();
            let inputs = RunInputs {
                devices: &self.devices,
                gateways: &gateways,
                records: &self.records,
                env: LinkEnvironment {
                    channel: &self.channel,
                    region: &self.region,
                    haps: HapsConfig::default(),
                    laps: None,
                    fading_key: 1234,
                },
                lrfhss: &self.cfg,
            };
            f(&inputs)
        }
    }

    #[test]
    fn success_matches_exhaustive_decode() {
        let w = world(60, 30.0, 2, true);
        for model in [
            CollisionModel::Disabled,
            CollisionModel::Overlap,
            CollisionModel::ColliderAboveSensitivity,
        ] {
            w.run(&w.set, |inputs| {
                let fast = simulate_success(inputs, model);
                // Reference: evaluate every unit at every gateway.
                let erased: Vec<Vec<Vec<bool>>> = w
                    .records
                    .iter()
                    .enumerate()
                    .map(|(p, r)| {
                        evaluate_links(r, p, &w.devices[r.device_id as usize], inputs.gateways, &inputs.env)
                    })
                    .collect();
                let collided: Vec<Vec<Vec<bool>>> = (0..inputs.gateways.len())
                    .map(|g| match model {
                        CollisionModel::Disabled => {
                            w.records.iter().map(|r| vec![false; r.units.len()]).collect()
                        }
                        CollisionModel::Overlap => super::super::detect_collisions(&w.records, |_, _| true),
                        CollisionModel::ColliderAboveSensitivity => {
                            super::super::detect_collisions(&w.records, |q, u| !erased[q][g][u])
                        }
                    })
                    .collect();
                let mut decoded = 0;
                let mut dup = 0;
                for p in 0..w.records.len() {
                    let per_gw: Vec<Vec<UnitOutcome>> = (0..inputs.gateways.len())
                        .map(|g| {
                            (0..w.records[p].units.len())
                                .map(|u| UnitOutcome::new(erased[p][g][u], collided[g][p][u]))
                                .collect()
                        })
                        .collect();
                    let d = decode_packet(&per_gw, &w.cfg);
                    decoded += d.network_decoded as u64;
                    dup += d.duplicates() as u64;
                }
                assert_eq!(fast.packets, w.records.len() as u64);
                assert_eq!(fast.decoded, decoded, "{model:?}");
                assert_eq!(fast.gateway_decodes, dup, "{model:?}");
            });
        }
    }

    #[test]
    fn low_load_without_erasure_almost_always_succeeds() {
        let mut w = world(20, 900.0, 0, true);
        w.channel.link.sensitivity_dbm = -1000.0;
        let tally = w.run(&w.set, |i| simulate_success(i, CollisionModel::Overlap));
        assert!(tally.packets > 0);
        assert!(tally.decoded as f64 / tally.packets as f64 > 0.99);
    }

    #[test]
    fn adding_gateways_never_loses_packets() {
        let w = world(300, 20.0, 3, false);
        let with_haps = GatewaySet {
            haps: Some(HapsConfig::default()),
            ..w.set.clone()
        };
        for model in [CollisionModel::Overlap, CollisionModel::ColliderAboveSensitivity] {
            let a = w.run(&w.set, |i| simulate_success(i, model));
            let b = w.run(&with_haps, |i| simulate_success(i, model));
            for (x, y) in a.per_device.iter().zip(&b.per_device) {
                assert!(y.decoded >= x.decoded);
            }
        }
        let ea = w.run(&w.set, simulate_erasure);
        let eb = w.run(&with_haps, simulate_erasure);
        for (x, y) in ea.iter().zip(&eb) {
            assert!(y.erased <= x.erased);
            assert_eq!(x.units, y.units);
        }
    }

    #[test]
    fn erasure_counts_every_unit() {
        let w = world(40, 300.0, 1, true);
        let out = w.run(&w.set, simulate_erasure);
        let units: u64 = out.iter().map(|d| d.units).sum();
        assert_eq!(units, w.records.len() as u64 * 10);
        assert!(out.iter().all(|d| d.erased <= d.units));
    }

    #[test]
    fn trace_has_a_row_per_unit_and_gateway() {
        let w = world(5, 600.0, 1, true);
        let mut buf = Vec::new();
        w.run(&w.set, |i| write_trace(i, CollisionModel::Overlap, &mut buf)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let gws = w.set.gateways().len();
        assert_eq!(text.lines().count(), 1 + w.records.len() * gws * 10);
        assert!(text.starts_with("device_id,packet_start_s,gateway_id,unit_index,kind,channel,erased,collided,received"));
    }
}
