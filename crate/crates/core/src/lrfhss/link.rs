use serde::Serialize;

use super::{TransmissionRecord, Unit};
use crate::channel::{sample_ntn_fading, sample_shadow_fading_db, ChannelModel, LinkKind, NtnFadingParams};
use crate::geometry::{haps_distance, haps_elevation, terrestrial_distance, HapsConfig, Position, RegionConfig};
use crate::network::{Gateway, GatewayKind};
use crate::orbit::{device_elevation_and_distance, LapSchedule};
use crate::runner::seed::{unit_id, unit_rng};

/// Per-run context for turning a (device, gateway, unit) triple into a
/// received power.
#[derive(Debug, Clone, Copy)]
pub struct LinkEnvironment<'a> {
    pub channel: &'a ChannelModel,
    pub region: &'a RegionConfig,
    pub haps: HapsConfig,
    /// Required when a LEO gateway is present.
    pub laps: Option<&'a LapSchedule>,
    /// Root of the counter-based fading draws for this run.
    pub fading_key: u64,
}

/// The part of a link that does not change while a device transmits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LinkState {
    Terrestrial {
        distance_m: f64,
        mean_dbm: f64,
    },
    Haps {
        distance_m: f64,
        elevation_rad: f64,
        mean_dbm: f64,
        fading: NtnFadingParams,
    },
    /// Geometry follows the satellite and is evaluated per unit.
    Leo,
}

impl LinkState {
    /// Deterministic received power where it is static; used to order
    /// gateways from most to least promising.
    pub fn static_mean_dbm(&self) -> Option<f64> {
        match self {
            LinkState::Terrestrial { mean_dbm, .. } | LinkState::Haps { mean_dbm, .. } => {
                Some(*mean_dbm)
            }
            LinkState::Leo => None,
        }
    }
}

/// Received-power evaluation of one unit at one gateway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkSample {
    pub distance_m: f64,
    pub elevation_rad: Option<f64>,
    pub pathloss_db: f64,
    /// Shadowing (terrestrial) or fading power gain (NTN), dB.
    pub fading_db: f64,
    pub rx_power_dbm: f64,
    pub erased: bool,
}

// Devices sit on the ground; a base station on top of one is 1 m away.
const MIN_DISTANCE_M: f64 = 1.0;

impl LinkEnvironment<'_> {
    pub fn link_state(&self, dev: &Position, gw: &Gateway) -> LinkState {
        match gw.kind {
            GatewayKind::Terrestrial { position, .. } => {
                let distance_m = terrestrial_distance(dev, &position).max(MIN_DISTANCE_M);
                LinkState::Terrestrial {
                    distance_m,
                    mean_dbm: self
                        .channel
                        .mean_received_power_dbm(LinkKind::Terrestrial, distance_m)
                        .expect("positive distance"),
                }
            }
            GatewayKind::Haps => {
                let distance_m = haps_distance(dev, &self.haps);
                let elevation_rad = haps_elevation(dev, &self.haps, self.region);
                LinkState::Haps {
                    distance_m,
                    elevation_rad,
                    mean_dbm: self
                        .channel
                        .mean_received_power_dbm(LinkKind::Haps, distance_m)
                        .expect("positive distance"),
                    fading: self
                        .channel
                        .ntn_fading(elevation_rad)
                        .expect("fading floor validated"),
                }
            }
            GatewayKind::Leo => LinkState::Leo,
        }
    }

    /// Evaluates one unit. `unit_id` keys the fading draw together with the
    /// gateway, so repeated calls return the same sample.
    pub fn sample(&self, state: &LinkState, dev: &Position, gw: &Gateway, unit: &Unit, unit_id: u64) -> LinkSample {
        let gamma = self.channel.link.sensitivity_dbm;
        let mut rng = unit_rng(self.fading_key, gw.key, unit_id);
        let finish = |distance_m: f64, elevation_rad: Option<f64>, mean_dbm: f64, fading_db: f64| {
            let rx_power_dbm = mean_dbm + fading_db;
            LinkSample {
                distance_m,
                elevation_rad,
                pathloss_db: self.gains_dbm(gw.kind.link_kind()) - mean_dbm,
                fading_db,
                rx_power_dbm,
                erased: !(rx_power_dbm >= gamma),
            }
        };
        match *state {
            LinkState::Terrestrial { distance_m, mean_dbm } => {
                let shadow = sample_shadow_fading_db(&self.channel.terrestrial, &mut rng);
                finish(distance_m, None, mean_dbm, shadow)
            }
            LinkState::Haps {
                distance_m,
                elevation_rad,
                mean_dbm,
                ref fading,
            } => {
                let gain = sample_ntn_fading(fading, &mut rng);
                finish(distance_m, Some(elevation_rad), mean_dbm, 10.0 * gain.log10())
            }
            LinkState::Leo => {
                let laps = self.laps.expect("LEO gateway requires a lap schedule");
                let sat = laps.state_at(unit.start_s);
                let (elevation_rad, distance_m) = device_elevation_and_distance(dev, &sat);
                let mean_dbm = self
                    .channel
                    .mean_received_power_dbm(LinkKind::Leo, distance_m.max(MIN_DISTANCE_M))
                    .expect("positive distance");
                if elevation_rad <= 0.0 {
                    return finish(distance_m, Some(elevation_rad), mean_dbm, f64::NEG_INFINITY);
                }
                let fading = self
                    .channel
                    .ntn_fading(elevation_rad)
                    .expect("fading floor validated");
                let gain = sample_ntn_fading(&fading, &mut rng);
                finish(distance_m, Some(elevation_rad), mean_dbm, 10.0 * gain.log10())
            }
        }
    }

    /// Same verdict as `sample(..).erased`, without assembling the sample.
    pub fn is_erased(&self, state: &LinkState, dev: &Position, gw: &Gateway, unit: &Unit, unit_id: u64) -> bool {
        if let LinkState::Terrestrial { mean_dbm, .. } = *state {
            let mut rng = unit_rng(self.fading_key, gw.key, unit_id);
            let shadow = sample_shadow_fading_db(&self.channel.terrestrial, &mut rng);
            return !(mean_dbm + shadow >= self.channel.link.sensitivity_dbm);
        }
        self.sample(state, dev, gw, unit, unit_id).erased
    }

    fn gains_dbm(&self, kind: LinkKind) -> f64 {
        let l = &self.channel.link;
        let rx = match kind {
            LinkKind::Terrestrial => l.rx_gain_terrestrial_dbi,
            LinkKind::Haps => l.rx_gain_haps_dbi,
            LinkKind::Leo => l.rx_gain_sat_dbi,
        };
        l.tx_power_dbm + l.tx_gain_dbi + rx
    }
}

/// Erasure flags of every unit of `tx` at every gateway, indexed
/// `[gateway][unit]`. `packet` is the record's index within its run.
pub fn evaluate_links(
    tx: &TransmissionRecord,
    packet: usize,
    dev: &Position,
    gateways: &[Gateway],
    env: &LinkEnvironment<'_>,
) -> Vec<Vec<bool>> {
    gateways
        .iter()
        .map(|gw| {
            let state = env.link_state(dev, gw);
            tx.units
                .iter()
                .enumerate()
                .map(|(u, unit)| env.is_erased(&state, dev, gw, unit, unit_id(packet, u)))
                .collect()
        })
        .collect()
}
