//! Spatial deployment: devices in a disk, terrestrial base stations in the
//! disk plus a guard annulus, and the HAPS hovering above the disk centre.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean equatorial radius of the Earth, m.
pub const EARTH_RADIUS_M: f64 = 6.3781e6;

/// Default rejection-sampling budget per base station.
pub const DEFAULT_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    /// Radius of the disk holding the devices, m.
    pub radius_m: f64,
    /// Width of the guard annulus around the disk, m.
    pub guard_radius_m: f64,
    /// Minimum distance between any two base stations, m.
    pub min_bs_separation_m: f64,
    pub earth_radius_m: f64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            radius_m: 80e3,
            guard_radius_m: 240e3,
            min_bs_separation_m: 20e3,
            earth_radius_m: EARTH_RADIUS_M,
        }
    }
}

impl RegionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m > 0.0) {
            return Err(Error::config("radius_m", "must be > 0"));
        }
        if !(self.guard_radius_m >= 0.0) {
            return Err(Error::config("guard_radius_m", "must be >= 0"));
        }
        if !(self.min_bs_separation_m >= 0.0) {
            return Err(Error::config("min_bs_separation_m", "must be >= 0"));
        }
        if !(self.earth_radius_m > 0.0) {
            return Err(Error::config("earth_radius_m", "must be > 0"));
        }
        Ok(())
    }

    pub fn outer_radius_m(&self) -> f64 {
        self.radius_m + self.guard_radius_m
    }
}

/// A point on the ground plane (z = 0), metres from the region centre.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x_m: f64,
    pub y_m: f64,
}

pub type DevicePosition = Position;

impl Position {
    pub const ORIGIN: Position = Position { x_m: 0.0, y_m: 0.0 };

    pub fn new(x_m: f64, y_m: f64) -> Self {
        Self { x_m, y_m }
    }

    /// Squared ground range from the region centre.
    pub fn range_sq(&self) -> f64 {
        self.x_m * self.x_m + self.y_m * self.y_m
    }

    /// Ground range from the region centre.
    pub fn range(&self) -> f64 {
        self.x_m.hypot(self.y_m)
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        (self.x_m - other.x_m).hypot(self.y_m - other.y_m)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BasestationLayout {
    /// Base stations inside the device disk.
    pub inner: Vec<Position>,
    /// Base stations in the guard annulus `(R, R + R_g]`.
    pub guard: Vec<Position>,
}

impl BasestationLayout {
    pub fn len(&self) -> usize {
        self.inner.len() + self.guard.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inner base stations first, then guard ones.
    pub fn iter(&self) -> impl Iterator<Item = &Position> {
        self.inner.iter().chain(self.guard.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HapsConfig {
    /// Altitude above the region centre, m.
    pub altitude_m: f64,
}

impl Default for HapsConfig {
    fn default() -> Self {
        Self { altitude_m: 30e3 }
    }
}

/// Draws `n` devices uniformly (in area) over the disk of radius `R`.
pub fn deploy_devices<R: Rng + ?Sized>(
    n: usize,
    region: &RegionConfig,
    rng: &mut R,
) -> Result<Vec<Position>> {
    if n == 0 {
        return Err(Error::Domain("device count must be at least 1".into()));
    }
    Ok((0..n)
        .map(|_| sample_annulus(0.0, region.radius_m, rng))
        .collect())
}

/// Number of guard-annulus base stations that keeps the inner density:
/// `round(M (R_g/R) (2 + R_g/R))`.
pub fn guard_bs_count(m: usize, region: &RegionConfig) -> usize {
    let ratio = region.guard_radius_m / region.radius_m;
    (m as f64 * ratio * (2.0 + ratio)).round() as usize
}

/// Places `m` inner and `guard_bs_count(m)` guard base stations by rejection
/// sampling, keeping every pair at least `min_bs_separation_m` apart.
pub fn deploy_basestations<R: Rng + ?Sized>(
    m: usize,
    region: &RegionConfig,
    max_attempts: usize,
    rng: &mut R,
) -> Result<BasestationLayout> {
    let m_guard = guard_bs_count(m, region);
    let requested = m + m_guard;
    let min_sq = region.min_bs_separation_m * region.min_bs_separation_m;
    let mut placed: Vec<Position> = Vec::with_capacity(requested);

    let place = |inner_r: f64, outer_r: f64, placed: &mut Vec<Position>, rng: &mut R| {
        for _ in 0..max_attempts {
            let candidate = sample_annulus(inner_r, outer_r, rng);
            let clear = placed.iter().all(|p| {
                let dx = p.x_m - candidate.x_m;
                let dy = p.y_m - candidate.y_m;
                dx * dx + dy * dy >= min_sq
            });
            if clear {
                placed.push(candidate);
                return Ok(());
            }
        }
        Err(Error::InfeasiblePlacement {
            placed: placed.len(),
            requested,
            attempts: max_attempts,
        })
    };

    for _ in 0..m {
        place(0.0, region.radius_m, &mut placed, rng)?;
    }
    for _ in 0..m_guard {
        place(region.radius_m, region.outer_radius_m(), &mut placed, rng)?;
    }

    let guard = placed.split_off(m);
    Ok(BasestationLayout {
        inner: placed,
        guard,
    })
}

/// Uniform point in the annulus `inner_r < r <= outer_r` (a disk when
/// `inner_r == 0`).
fn sample_annulus<R: Rng + ?Sized>(inner_r: f64, outer_r: f64, rng: &mut R) -> Position {
    // 1 - u lies in (0, 1], which keeps r strictly above inner_r.
    let u = 1.0 - rng.random::<f64>();
    let r = (inner_r * inner_r + u * (outer_r * outer_r - inner_r * inner_r)).sqrt();
    let phi = rng.random::<f64>() * 2.0 * PI;
    Position::new(r * phi.cos(), r * phi.sin())
}

pub fn haps_distance(dev: &Position, haps: &HapsConfig) -> f64 {
    (dev.range_sq() + haps.altitude_m * haps.altitude_m).sqrt()
}

/// Elevation of the HAPS seen from `dev`, radians.
///
/// This is the spherical-earth expression
/// `asin((h R_e - rho^2) / sqrt((rho^2 + R_e^2)(rho^2 + h^2)))`, evaluated
/// as written; at the nadir it is exactly `pi/2`.
pub fn haps_elevation(dev: &Position, haps: &HapsConfig, region: &RegionConfig) -> f64 {
    let rho_sq = dev.range_sq();
    let h = haps.altitude_m;
    let re = region.earth_radius_m;
    let num = h * re - rho_sq;
    let den = ((rho_sq + re * re) * (rho_sq + h * h)).sqrt();
    (num / den).clamp(-1.0, 1.0).asin()
}

pub fn terrestrial_distance(dev: &Position, bs: &Position) -> f64 {
    dev.distance_to(bs)
}
