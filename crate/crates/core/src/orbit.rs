//! Single-visible-satellite pass model.
//!
//! One satellite is always in view of the region centre. Each pass ("lap")
//! lasts a random time `t_c <= T_m` drawn from the closed-form lap-duration
//! law, and crosses the sky along azimuth `psi`. Laps follow each other
//! back to back.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Position, EARTH_RADIUS_M};

/// Earth's gravitational parameter, m^3/s^2.
pub const MU_EARTH: f64 = 3.986004418e14;
/// Sidereal day, s.
pub const SIDEREAL_DAY_S: f64 = 86164.1;

/// Which central-angle law drives the pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralAngleForm {
    /// `2 w |t - t_c/2| + gamma_0 - w t_c`: symmetric pass, elevation
    /// `alpha_0` at both ends.
    #[default]
    Symmetric,
    /// `|w t / 2 - w t_c| + gamma_0 - w t_c`, kept for comparison runs.
    AsPrinted,
}

/// Distance between the region centre and the satellite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeMode {
    /// Constant range `h_S` on a hemisphere over the centre.
    #[default]
    Altitude,
    /// True slant range `sqrt(r_S^2 - R_e^2 cos^2 a) - R_e sin a`.
    ExactSlant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    pub altitude_m: f64,
    pub inclination_rad: f64,
    pub min_elevation_rad: f64,
    pub earth_radius_m: f64,
    pub mu_m3_s2: f64,
    pub sidereal_day_s: f64,
    pub central_angle_form: CentralAngleForm,
    pub range_mode: RangeMode,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            altitude_m: 750e3,
            inclination_rad: 60f64.to_radians(),
            min_elevation_rad: 20f64.to_radians(),
            earth_radius_m: EARTH_RADIUS_M,
            mu_m3_s2: MU_EARTH,
            sidereal_day_s: SIDEREAL_DAY_S,
            central_angle_form: CentralAngleForm::default(),
            range_mode: RangeMode::default(),
        }
    }
}

impl OrbitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_m > 0.0) {
            return Err(Error::config("sat_altitude_m", "must be > 0"));
        }
        if !(self.min_elevation_rad > 0.0 && self.min_elevation_rad < FRAC_PI_2) {
            return Err(Error::config("min_elevation_deg", "must lie in (0, 90)"));
        }
        if !(self.earth_radius_m > 0.0 && self.mu_m3_s2 > 0.0 && self.sidereal_day_s > 0.0) {
            return Err(Error::config("earth_radius_m", "earth constants must be > 0"));
        }
        Ok(())
    }
}

/// Constants derived once per orbit configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitDerived {
    /// Orbital angular rate `sqrt(mu / r_S^3)`, rad/s.
    pub omega_sat: f64,
    /// Earth rotation rate `2 pi / T_s`, rad/s.
    pub omega_earth: f64,
    /// Effective pass rate `(omega_sat - omega_earth cos i) / 2`, rad/s.
    pub omega: f64,
    /// Earth central angle at the minimum elevation, rad.
    pub gamma0: f64,
    /// Longest possible lap `gamma0 / omega`, s.
    pub max_lap_s: f64,
    /// Orbit radius `h_S + R_e`, m.
    pub orbit_radius_m: f64,
    pub altitude_m: f64,
    pub earth_radius_m: f64,
    pub min_elevation_rad: f64,
    pub central_angle_form: CentralAngleForm,
    pub range_mode: RangeMode,
}

pub fn derive_constants(cfg: &OrbitConfig) -> OrbitDerived {
    let r_s = cfg.altitude_m + cfg.earth_radius_m;
    let omega_sat = (cfg.mu_m3_s2 / (r_s * r_s * r_s)).sqrt();
    let omega_earth = 2.0 * PI / cfg.sidereal_day_s;
    let omega = (omega_sat - omega_earth * cfg.inclination_rad.cos()) / 2.0;
    let gamma0 = ((cfg.earth_radius_m / r_s) * cfg.min_elevation_rad.cos())
        .clamp(-1.0, 1.0)
        .acos()
        - cfg.min_elevation_rad;
    let gamma0 = gamma0.max(0.0);
    OrbitDerived {
        omega_sat,
        omega_earth,
        omega,
        gamma0,
        max_lap_s: gamma0 / omega,
        orbit_radius_m: r_s,
        altitude_m: cfg.altitude_m,
        earth_radius_m: cfg.earth_radius_m,
        min_elevation_rad: cfg.min_elevation_rad,
        central_angle_form: cfg.central_angle_form,
        range_mode: cfg.range_mode,
    }
}

/// Lap-duration density, 1/s. Diverges at `t_c = T_m` (returns `+inf`);
/// integrate it rather than sampling it pointwise there.
pub fn lap_pdf(tc: f64, d: &OrbitDerived) -> f64 {
    if !(tc > 0.0 && tc <= d.max_lap_s) {
        return 0.0;
    }
    let wt = d.omega * tc;
    let cg = d.gamma0.cos();
    // cos^2(wt) - cos^2(gamma0), factored to stay accurate near T_m.
    let gap = (d.gamma0 + wt).sin() * (d.gamma0 - wt).sin();
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    d.omega * cg * wt.tan() / (d.gamma0 * gap.sqrt())
}

/// Closed-form lap-duration CDF `1 - acos(cos gamma0 / cos(w t)) / gamma0`.
pub fn lap_cdf(tc: f64, d: &OrbitDerived) -> f64 {
    if tc <= 0.0 {
        return 0.0;
    }
    if tc >= d.max_lap_s {
        return 1.0;
    }
    let ratio = (d.gamma0.cos() / (d.omega * tc).cos()).clamp(-1.0, 1.0);
    1.0 - ratio.acos() / d.gamma0
}

/// Inverse of [`lap_cdf`].
pub fn lap_quantile(u: f64, d: &OrbitDerived) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let c = (d.gamma0.cos() / (d.gamma0 * (1.0 - u)).cos()).clamp(-1.0, 1.0);
    (c.acos() / d.omega).min(d.max_lap_s)
}

/// Draws a lap duration by inverting the CDF.
pub fn sample_lap_duration<R: Rng + ?Sized>(d: &OrbitDerived, rng: &mut R) -> Result<f64> {
    if !(d.max_lap_s > 0.0) {
        return Err(Error::Domain("maximum lap duration is zero".into()));
    }
    // Open interval (0, 1); a zero-length lap would stall the schedule.
    let u = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    Ok(lap_quantile(u, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LapSample {
    pub duration_s: f64,
    /// Azimuth of the pass seen from the region centre, in `[0, 2 pi)`.
    pub azimuth_rad: f64,
}

pub fn sample_lap<R: Rng + ?Sized>(d: &OrbitDerived, rng: &mut R) -> Result<LapSample> {
    let duration_s = sample_lap_duration(d, rng)?;
    let azimuth_rad = rng.random::<f64>() * 2.0 * PI;
    Ok(LapSample {
        duration_s,
        azimuth_rad,
    })
}

/// Earth central angle between the sub-satellite point and the region
/// centre at time `t` into the lap.
pub fn central_angle(t: f64, lap: &LapSample, d: &OrbitDerived) -> f64 {
    let w = d.omega;
    let tc = lap.duration_s;
    let theta = match d.central_angle_form {
        CentralAngleForm::Symmetric => 2.0 * w * (t - tc / 2.0).abs() + d.gamma0 - w * tc,
        CentralAngleForm::AsPrinted => (w * t / 2.0 - w * tc).abs() + d.gamma0 - w * tc,
    };
    theta.max(0.0)
}

/// Elevation of the satellite seen from the region centre, in `(0, pi/2]`.
pub fn elevation_at_origin(t: f64, lap: &LapSample, d: &OrbitDerived) -> f64 {
    elevation_from_central_angle(central_angle(t, lap, d), d)
}

pub fn elevation_from_central_angle(theta: f64, d: &OrbitDerived) -> f64 {
    let r_s = d.orbit_radius_m;
    (r_s * theta.cos() - d.earth_radius_m).atan2(r_s * theta.sin())
}

/// Satellite position relative to the region centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SatelliteState {
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub elevation_origin_rad: f64,
}

impl SatelliteState {
    pub fn range(&self) -> f64 {
        (self.x_m * self.x_m + self.y_m * self.y_m + self.z_m * self.z_m).sqrt()
    }
}

pub fn satellite_state(t: f64, lap: &LapSample, d: &OrbitDerived) -> SatelliteState {
    let alpha = elevation_at_origin(t, lap, d);
    let range = match d.range_mode {
        RangeMode::Altitude => d.altitude_m,
        RangeMode::ExactSlant => slant_range(alpha, d),
    };
    let (sin_a, cos_a) = alpha.sin_cos();
    let (sin_p, cos_p) = lap.azimuth_rad.sin_cos();
    SatelliteState {
        x_m: range * cos_a * cos_p,
        y_m: range * cos_a * sin_p,
        z_m: range * sin_a,
        elevation_origin_rad: alpha,
    }
}

/// Slant range from a ground point to the satellite at elevation `alpha`.
pub fn slant_range(alpha: f64, d: &OrbitDerived) -> f64 {
    let re = d.earth_radius_m;
    let r_s = d.orbit_radius_m;
    (r_s * r_s - re * re * alpha.cos().powi(2)).sqrt() - re * alpha.sin()
}

/// Elevation (rad) and distance (m) from a ground device to the satellite.
pub fn device_elevation_and_distance(dev: &Position, sat: &SatelliteState) -> (f64, f64) {
    let dx = sat.x_m - dev.x_m;
    let dy = sat.y_m - dev.y_m;
    let ground = dx.hypot(dy);
    let elevation = sat.z_m.atan2(ground);
    let distance = (ground * ground + sat.z_m * sat.z_m).sqrt();
    (elevation, distance)
}

/// Back-to-back laps covering a simulation horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct LapSchedule {
    starts: Vec<f64>,
    laps: Vec<LapSample>,
    derived: OrbitDerived,
}

impl LapSchedule {
    /// Generates laps until their summed duration reaches `horizon_s`; the
    /// last lap runs past the horizon and is truncated by the caller's
    /// time range.
    pub fn generate<R: Rng + ?Sized>(
        derived: &OrbitDerived,
        horizon_s: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut starts = Vec::new();
        let mut laps = Vec::new();
        let mut t = 0.0;
        loop {
            let lap = sample_lap(derived, rng)?;
            starts.push(t);
            laps.push(lap);
            t += lap.duration_s;
            if t >= horizon_s {
                break;
            }
        }
        Ok(Self {
            starts,
            laps,
            derived: *derived,
        })
    }

    pub fn laps(&self) -> impl Iterator<Item = (f64, &LapSample)> {
        self.starts.iter().copied().zip(self.laps.iter())
    }

    /// End of the last lap.
    pub fn covered_until(&self) -> f64 {
        self.starts.last().copied().unwrap_or(0.0) + self.laps.last().map_or(0.0, |l| l.duration_s)
    }

    pub fn state_at(&self, t: f64) -> SatelliteState {
        let idx = self.starts.partition_point(|&s| s <= t).saturating_sub(1);
        let lap = &self.laps[idx];
        let local = (t - self.starts[idx]).clamp(0.0, lap.duration_s);
        satellite_state(local, lap, &self.derived)
    }
}

/// Writes `(t_s, elevation_origin_deg, xc_m, yc_m, zc_m)` rows for one lap.
pub fn write_lap_trace<W: Write>(
    out: W,
    lap: &LapSample,
    d: &OrbitDerived,
    step_s: f64,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_s", "elevation_origin_deg", "xc_m", "yc_m", "zc_m"])?;
    let steps = (lap.duration_s / step_s).ceil() as usize;
    for i in 0..=steps {
        let t = (i as f64 * step_s).min(lap.duration_s);
        let s = satellite_state(t, lap, d);
        w.write_record(&[
            format!("{t:.3}"),
            format!("{:.6}", s.elevation_origin_rad.to_degrees()),
            format!("{:.3}", s.x_m),
            format!("{:.3}", s.y_m),
            format!("{:.3}", s.z_m),
        ])?;
    }
    w.flush()?;
    Ok(())
}
