//! Flat `key = value` configuration.
//!
//! Every model parameter has a key; values are given in the unit named by the
//! key suffix (`_km`, `_deg`, `_ms`, ...) and converted to SI on load. Keys
//! that are absent keep their defaults.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::ChannelModel;
use crate::cost::CostConfig;
use crate::error::{Error, Result};
use crate::geometry::{HapsConfig, RegionConfig, DEFAULT_PLACEMENT_ATTEMPTS};
use crate::lrfhss::{CollisionModel, LrFhssConfig};
use crate::orbit::OrbitConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunControl {
    pub n_devices: usize,
    pub n_runs: usize,
    pub duration_s: f64,
    /// Mean time between a device's packets.
    pub mean_interval_s: f64,
    /// `None` draws a seed from OS entropy.
    pub seed: Option<u64>,
    /// `None` uses every available core.
    pub workers: Option<usize>,
    /// Reuse one base-station layout for every run.
    pub fixed_layout: bool,
    /// Count an overlap as destructive at a gateway only when the colliding
    /// unit itself clears the sensitivity there.
    pub collision_requires_collider_above_gamma: bool,
    pub placement_attempts: usize,
    pub heatmap_bin_m: f64,
    pub radial_rings: usize,
    pub violin_bins: usize,
    /// Device counts swept by the success experiment.
    pub success_devices: Vec<usize>,
    pub cost_devices_max: u64,
    pub cost_devices_step: u64,
    pub cost_bs_counts: Vec<u64>,
}

impl RunControl {
    pub fn collision_model(&self) -> CollisionModel {
        if self.collision_requires_collider_above_gamma {
            CollisionModel::ColliderAboveSensitivity
        } else {
            CollisionModel::Overlap
        }
    }
}

impl Default for RunControl {
    fn default() -> Self {
        Self {
            n_devices: 1000,
            n_runs: 5000,
            duration_s: 24.0 * 3600.0,
            mean_interval_s: 15.0 * 60.0,
            seed: None,
            workers: None,
            fixed_layout: false,
            collision_requires_collider_above_gamma: false,
            placement_attempts: DEFAULT_PLACEMENT_ATTEMPTS,
            heatmap_bin_m: 5e3,
            radial_rings: 8,
            violin_bins: 50,
            success_devices: vec![100, 1000, 5000, 10_000],
            cost_devices_max: 20_000,
            cost_devices_step: 500,
            cost_bs_counts: vec![10, 20],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimConfig {
    pub region: RegionConfig,
    pub haps: HapsConfig,
    pub orbit: OrbitConfig,
    pub channel: ChannelModel,
    pub lrfhss: LrFhssConfig,
    pub cost: CostConfig,
    pub run: RunControl,
}

trait ConfigValue {
    fn set(&mut self, v: toml::Value) -> std::result::Result<(), String>;
    fn get(&self) -> Option<toml::Value>;
}

impl<T: Serialize + DeserializeOwned> ConfigValue for T {
    fn set(&mut self, v: toml::Value) -> std::result::Result<(), String> {
        *self = v.try_into().map_err(|e: toml::de::Error| e.message().to_string())?;
        Ok(())
    }

    fn get(&self) -> Option<toml::Value> {
        toml::Value::try_from(self).ok()
    }
}

enum Slot<'a> {
    /// File value times the factor gives the stored SI value.
    Scaled(&'a mut f64, f64),
    Degrees(&'a mut f64),
    Value(&'a mut dyn ConfigValue),
}

struct Key {
    name: &'static str,
    doc: &'static str,
}

const fn key(name: &'static str, doc: &'static str) -> Key {
    Key { name, doc }
}

impl SimConfig {
    fn visit(&mut self, f: &mut dyn FnMut(Key, Slot<'_>)) {
        use Slot::*;
        let r = &mut self.region;
        f(key("region_radius_km", "radius of the device disk"), Scaled(&mut r.radius_m, 1e3));
        f(key("guard_radius_km", "width of the guard annulus"), Scaled(&mut r.guard_radius_m, 1e3));
        f(key("min_bs_separation_km", "minimum distance between base stations"), Scaled(&mut r.min_bs_separation_m, 1e3));
        f(key("earth_radius_km", "Earth radius used by HAPS geometry"), Scaled(&mut r.earth_radius_m, 1e3));
        f(key("haps_altitude_km", "HAPS altitude above the region centre"), Scaled(&mut self.haps.altitude_m, 1e3));

        let o = &mut self.orbit;
        f(key("leo_altitude_km", "LEO orbit altitude"), Scaled(&mut o.altitude_m, 1e3));
        f(key("leo_inclination_deg", "LEO orbit inclination"), Degrees(&mut o.inclination_rad));
        f(key("leo_min_elevation_deg", "elevation at which a lap starts and ends"), Degrees(&mut o.min_elevation_rad));
        f(key("orbit_earth_radius_km", "Earth radius used by orbit geometry"), Scaled(&mut o.earth_radius_m, 1e3));
        f(key("earth_mu_m3_s2", "standard gravitational parameter"), Scaled(&mut o.mu_m3_s2, 1.0));
        f(key("sidereal_day_s", "Earth rotation period"), Scaled(&mut o.sidereal_day_s, 1.0));
        f(key("central_angle_form", "symmetric | as_printed"), Value(&mut o.central_angle_form));
        f(key("leo_range_mode", "altitude | exact_slant"), Value(&mut o.range_mode));

        let l = &mut self.channel.link;
        f(key("tx_power_dbm", "device transmit power"), Scaled(&mut l.tx_power_dbm, 1.0));
        f(key("carrier_mhz", "carrier frequency"), Scaled(&mut l.carrier_hz, 1e6));
        f(key("tx_gain_dbi", "device antenna gain"), Scaled(&mut l.tx_gain_dbi, 1.0));
        f(key("haps_rx_gain_dbi", "HAPS receive antenna gain"), Scaled(&mut l.rx_gain_haps_dbi, 1.0));
        f(key("sat_rx_gain_dbi", "satellite receive antenna gain"), Scaled(&mut l.rx_gain_sat_dbi, 1.0));
        f(key("bs_rx_gain_dbi", "base station receive antenna gain"), Scaled(&mut l.rx_gain_terrestrial_dbi, 1.0));
        f(key("sensitivity_dbm", "receiver sensitivity"), Scaled(&mut l.sensitivity_dbm, 1.0));
        let t = &mut self.channel.terrestrial;
        f(key("tn_ref_distance_m", "terrestrial path loss reference distance"), Scaled(&mut t.ref_distance_m, 1.0));
        f(key("tn_pathloss_ref_db", "terrestrial path loss at the reference distance"), Scaled(&mut t.pathloss_at_ref_db, 1.0));
        f(key("tn_pathloss_exponent", "terrestrial path loss exponent"), Scaled(&mut t.exponent, 1.0));
        f(key("tn_shadowing_db", "log-normal shadowing standard deviation"), Scaled(&mut t.shadow_sigma_db, 1.0));
        f(key("ntn_fading_floor_deg", "NTN fading parameters are held below this elevation"), Scaled(&mut self.channel.fading_floor_deg, 1.0));

        let m = &mut self.lrfhss;
        f(key("lrfhss_channels", "hopping channels"), Value(&mut m.n_channels));
        f(key("header_copies", "header replicas per packet"), Value(&mut m.n_header_copies));
        f(key("header_duration_ms", "header airtime"), Scaled(&mut m.header_duration_s, 1e-3));
        f(key("fragment_duration_ms", "fragment airtime"), Scaled(&mut m.fragment_duration_s, 1e-3));
        f(key("coding_rate", "fraction of fragments needed, as n/d"), Value(&mut m.coding_rate));
        f(key("payload_bytes", "application payload"), Value(&mut m.payload_bytes));
        f(key("channel_width_hz", "physical channel width"), Scaled(&mut m.channel_width_hz, 1.0));

        let c = &mut self.run;
        f(key("mean_interval_min", "mean time between a device's packets"), Scaled(&mut c.mean_interval_s, 60.0));
        f(key("devices", "devices per run"), Value(&mut c.n_devices));
        f(key("runs", "Monte Carlo runs"), Value(&mut c.n_runs));
        f(key("duration_h", "simulated time per run"), Scaled(&mut c.duration_s, 3600.0));
        f(key("seed", "master seed; omit for a random one"), Value(&mut c.seed));
        f(key("workers", "worker threads; omit for all cores"), Value(&mut c.workers));
        f(key("fixed_layout", "reuse one base-station layout for all runs"), Value(&mut c.fixed_layout));
        f(
            key("collision_requires_collider_above_gamma", "overlaps only destroy units when the collider reaches the gateway"),
            Value(&mut c.collision_requires_collider_above_gamma),
        );
        f(key("placement_attempts", "rejection-sampling attempts per base station"), Value(&mut c.placement_attempts));
        f(key("heatmap_bin_km", "heatmap bin side"), Scaled(&mut c.heatmap_bin_m, 1e3));
        f(key("radial_rings", "rings in the radial profile"), Value(&mut c.radial_rings));
        f(key("violin_bins", "histogram bins of the erasure distribution"), Value(&mut c.violin_bins));
        f(key("success_devices", "device counts swept by the success experiment"), Value(&mut c.success_devices));
        f(key("cost_devices_max", "largest device count in the cost sweep"), Value(&mut c.cost_devices_max));
        f(key("cost_devices_step", "device step of the cost sweep"), Value(&mut c.cost_devices_step));
        f(key("cost_bs_counts", "terrestrial sizes in the cost sweep"), Value(&mut c.cost_bs_counts));

        let k = &mut self.cost;
        f(key("haps_capex_usd", "HAPS deployment cost"), Scaled(&mut k.haps_capex_usd, 1.0));
        f(key("haps_opex_usd", "HAPS yearly operating cost"), Scaled(&mut k.haps_opex_usd, 1.0));
        f(key("leo_price_tiers", "yearly USD per device as [[min_devices, price], ...]"), Value(&mut k.leo_price));
        f(key("tower_lease_usd", "yearly lease per base station"), Scaled(&mut k.tower_lease_usd, 1.0));
        f(key("discount_rate", "yearly discount rate"), Scaled(&mut k.discount_rate, 1.0));
        f(key("horizon_years", "cost horizon"), Value(&mut k.horizon_years));
    }

    pub fn keys() -> Vec<(&'static str, &'static str)> {
        let mut out = Vec::new();
        SimConfig::default().visit(&mut |k, _| out.push((k.name, k.doc)));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config {
            key: String::new(),
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().to_string(),
        })?;
        let mut cfg = SimConfig::default();
        let mut seen = Vec::new();
        let mut failure = None;
        cfg.visit(&mut |k, slot| {
            let Some(v) = table.get(k.name).cloned() else {
                return;
            };
            seen.push(k.name);
            if failure.is_some() {
                return;
            }
            let res = match slot {
                Slot::Scaled(x, f) => number(&v).map(|n| *x = n * f),
                Slot::Degrees(x) => number(&v).map(|n| *x = n.to_radians()),
                Slot::Value(x) => x.set(v),
            };
            if let Err(message) = res {
                failure = Some(config_error(text, k.name, message));
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if let Some(unknown) = table.keys().find(|k| !seen.contains(&k.as_str())) {
            return Err(config_error(text, unknown, "unknown key".into()));
        }
        cfg.validate().map_err(|e| match e {
            Error::Config { key, message, .. } => {
                let line = find_key_line(text, &key);
                Error::Config { key, line, message }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        self.orbit.validate()?;
        self.channel.validate()?;
        self.lrfhss.validate()?;
        let r = &self.run;
        if r.n_runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        if !(r.duration_s > 0.0) {
            return Err(Error::config("duration_h", "must be > 0"));
        }
        if !(r.mean_interval_s > 0.0) {
            return Err(Error::config("mean_interval_min", "must be > 0"));
        }
        if !(r.heatmap_bin_m > 0.0) {
            return Err(Error::config("heatmap_bin_km", "must be > 0"));
        }
        if r.radial_rings == 0 || r.violin_bins == 0 {
            return Err(Error::config("radial_rings", "rings and violin bins must be at least 1"));
        }
        if r.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if r.cost_devices_step == 0 {
            return Err(Error::config("cost_devices_step", "must be at least 1"));
        }
        if !(self.haps.altitude_m > 0.0) {
            return Err(Error::config("haps_altitude_km", "must be > 0"));
        }
        if !(self.cost.discount_rate >= 0.0) {
            return Err(Error::config("discount_rate", "must be >= 0"));
        }
        if self.cost.leo_price.tiers.is_empty() {
            return Err(Error::config("leo_price_tiers", "needs at least one tier"));
        }
        Ok(())
    }

    /// Every key with its current value, in file units.
    pub fn to_text(&self) -> String {
        let mut copy = self.clone();
        let mut out = String::new();
        copy.visit(&mut |k, slot| {
            let v = match slot {
                Slot::Scaled(x, f) => Some(toml::Value::Float(tidy(*x / f))),
                Slot::Degrees(x) => Some(toml::Value::Float(tidy(x.to_degrees()))),
                Slot::Value(x) => x.get(),
            };
            let _ = writeln!(out, "# {}", k.doc);
            match v {
                Some(v) => {
                    let _ = writeln!(out, "{} = {}", k.name, v);
                }
                None => {
                    let _ = writeln!(out, "# {} =", k.name);
                }
            }
        });
        out
    }

    /// SHA-256 over the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&json))
    }
}

fn number(v: &toml::Value) -> std::result::Result<f64, String> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(format!("expected a number, found {}", other.type_str())),
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn find_key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        l.trim_start()
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn config_error(text: &str, key: &str, message: String) -> Error {
    Error::Config {
        key: key.to_string(),
        line: find_key_line(text, key),
        message,
    }
}

/// Drops unit-conversion noise such as `59.99999999999999`.
fn tidy(x: f64) -> f64 {
    format!("{x:.14e}").parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(SimConfig::parse("").unwrap(), SimConfig::default());
    }

    #[test]
    fn units_are_converted() {
        let cfg = SimConfig::parse("region_radius_km = 40\nleo_inclination_deg = 90\nheader_duration_ms = 200\ncoding_rate = \"2/3\"").unwrap();
        assert_eq!(cfg.region.radius_m, 40e3);
        assert!((cfg.orbit.inclination_rad - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((cfg.lrfhss.header_duration_s - 0.2).abs() < 1e-15);
        assert_eq!(cfg.lrfhss.coding_rate.to_string(), "2/3");
    }

    #[test]
    fn round_trips_through_text() {
        let mut cfg = SimConfig::default();
        cfg.run.seed = Some(7);
        cfg.run.success_devices = vec![5, 6];
        cfg.run.collision_requires_collider_above_gamma = true;
        let back = SimConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back.hash(), SimConfig::parse(&back.to_text()).unwrap().hash());
        assert_eq!(back.run, cfg.run);
        assert!((back.orbit.inclination_rad - cfg.orbit.inclination_rad).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_carry_key_and_line() {
        let err = SimConfig::parse("devices = 10\n\nbogus = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, line: Some(3), .. } if key == "bogus"));
        let err = SimConfig::parse("runs = \"many\"").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, line: Some(1), .. } if key == "runs"));
        let err = SimConfig::parse("runs = 0").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(1), .. }));
        let err = SimConfig::parse("devices = = 3").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(1), .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn hash_tracks_content() {
        let a = SimConfig::default();
        let mut b = a.clone();
        b.run.n_runs += 1;
        assert_eq!(a.hash().len(), 64);
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn every_key_is_documented_once() {
        let keys = SimConfig::keys();
        let mut names: Vec<_> = keys.iter().map(|k| k.0).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), keys.len());
        assert!(keys.iter().all(|k| !k.1.is_empty()));
    }
}
