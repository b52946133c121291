//! Link budget and fading.
//!
//! Terrestrial links use a log-distance path loss with Gaussian shadowing
//! (in dB). HAPS and LEO links use free-space loss with a shadowed-Rice
//! power gain, approximated by a gamma law whose shape and scale follow an
//! empirical cubic fit in the elevation angle.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetConfig {
    pub tx_power_dbm: f64,
    pub carrier_hz: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_haps_dbi: f64,
    pub rx_gain_sat_dbi: f64,
    pub rx_gain_terrestrial_dbi: f64,
    /// Receiver sensitivity; anything weaker is erased.
    pub sensitivity_dbm: f64,
}

impl Default for LinkBudgetConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 14.0,
            carrier_hz: 868e6,
            tx_gain_dbi: 0.0,
            rx_gain_haps_dbi: 6.0,
            rx_gain_sat_dbi: 13.5,
            rx_gain_terrestrial_dbi: 6.0,
            sensitivity_dbm: -132.0,
        }
    }
}

impl LinkBudgetConfig {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0) {
            return Err(Error::config("carrier_hz", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerrestrialChannelConfig {
    pub ref_distance_m: f64,
    /// Path loss at the reference distance, dB.
    pub pathloss_at_ref_db: f64,
    pub exponent: f64,
    /// Standard deviation of the log-normal shadowing, dB.
    pub shadow_sigma_db: f64,
}

impl Default for TerrestrialChannelConfig {
    fn default() -> Self {
        Self {
            ref_distance_m: 1e3,
            pathloss_at_ref_db: 128.96,
            exponent: 2.32,
            shadow_sigma_db: 7.8,
        }
    }
}

impl TerrestrialChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.exponent > 0.0) {
            return Err(Error::config("pathloss_exponent", "must be > 0"));
        }
        if !(self.shadow_sigma_db >= 0.0) {
            return Err(Error::config("shadow_sigma_db", "must be >= 0"));
        }
        if !(self.ref_distance_m > 0.0) {
            return Err(Error::config("ref_distance_m", "must be > 0"));
        }
        Ok(())
    }
}

/// Shadowed-Rice parameters and their gamma approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NtnFadingParams {
    pub b0: f64,
    pub m: f64,
    pub omega: f64,
    /// Gamma shape.
    pub k: f64,
    /// Gamma scale.
    pub theta: f64,
}

impl NtnFadingParams {
    /// Moment-matched gamma shape and scale; no range checks.
    pub fn from_shadowed_rice(b0: f64, m: f64, omega: f64) -> Self {
        let mean = 2.0 * b0 + omega;
        let second = 4.0 * m * b0 * b0 + 4.0 * m * b0 * omega + omega * omega;
        Self {
            b0,
            m,
            omega,
            k: m * mean * mean / second,
            theta: second / (m * mean),
        }
    }

    /// Mean power gain `k theta = 2 b0 + Omega`.
    pub fn mean(&self) -> f64 {
        2.0 * self.b0 + self.omega
    }

    fn check(self, elevation_deg: f64) -> Result<Self> {
        for (name, value) in [
            ("b0", self.b0),
            ("m", self.m),
            ("omega", self.omega),
            ("k", self.k),
            ("theta", self.theta),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::ParameterOutOfRange {
                    name,
                    value,
                    elevation_deg,
                });
            }
        }
        Ok(self)
    }
}

/// Lowest elevation of the empirical fit, degrees.
pub const FIT_MIN_ELEVATION_DEG: f64 = 10.0;

/// Empirical cubics `(b0, m, Omega)` with the elevation in degrees.
pub fn shadowed_rice_polynomials(alpha_deg: f64) -> (f64, f64, f64) {
    let a = alpha_deg;
    let cubic = |c3: f64, c2: f64, c1: f64, c0: f64| ((c3 * a + c2) * a + c1) * a + c0;
    (
        cubic(-4.7943e-8, 5.5784e-6, -2.1344e-4, 3.2710e-2),
        cubic(6.3739e-5, 5.8533e-4, -1.5973e-1, 3.5156),
        cubic(1.4428e-5, -2.3798e-3, 1.2702e-1, -1.4864),
    )
}

/// Fading parameters at elevation `alpha` (radians). Elevations below the
/// fit range are clamped to 10 degrees; above 90 to 90.
///
/// The Omega cubic is negative below roughly 16.07 degrees, so elevations
/// under that return [`Error::ParameterOutOfRange`].
pub fn shadowed_rice_params(alpha: f64) -> Result<NtnFadingParams> {
    let deg = alpha.to_degrees().clamp(FIT_MIN_ELEVATION_DEG, 90.0);
    let (b0, m, omega) = shadowed_rice_polynomials(deg);
    NtnFadingParams::from_shadowed_rice(b0, m, omega).check(deg)
}

/// One gamma-distributed power gain (linear).
pub fn sample_ntn_fading<R: Rng + ?Sized>(params: &NtnFadingParams, rng: &mut R) -> f64 {
    Gamma::new(params.k, params.theta)
        .map(|g| g.sample(rng))
        .unwrap_or(0.0)
}

/// One zero-mean Gaussian shadowing draw, dB.
pub fn sample_shadow_fading_db<R: Rng + ?Sized>(cfg: &TerrestrialChannelConfig, rng: &mut R) -> f64 {
    if cfg.shadow_sigma_db == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, cfg.shadow_sigma_db)
        .expect("validated sigma")
        .sample(rng)
}

pub fn terrestrial_pathloss_db(d: f64, cfg: &TerrestrialChannelConfig) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("terrestrial distance {d} m must be > 0")));
    }
    Ok(cfg.pathloss_at_ref_db + 10.0 * cfg.exponent * (d / cfg.ref_distance_m).log10())
}

/// Free-space loss `20 log10(4 pi d / lambda)`, antenna gains excluded.
pub fn fspl_db(d: f64, cfg: &LinkBudgetConfig) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("distance {d} m must be > 0")));
    }
    Ok(20.0 * (4.0 * PI * d / cfg.wavelength_m()).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Terrestrial,
    Haps,
    Leo,
}

/// Everything needed to turn a link geometry into a received power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub link: LinkBudgetConfig,
    pub terrestrial: TerrestrialChannelConfig,
    /// Elevation below which NTN fading uses the parameters at this
    /// elevation, degrees. Must sit where the fit is positive (> 16.07).
    pub fading_floor_deg: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            link: LinkBudgetConfig::default(),
            terrestrial: TerrestrialChannelConfig::default(),
            fading_floor_deg: 17.0,
        }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.terrestrial.validate()?;
        shadowed_rice_params(self.fading_floor_deg.to_radians())
            .map_err(|e| Error::config("fading_floor_deg", e.to_string()))?;
        Ok(())
    }

    /// Fading parameters used in simulation, with the elevation floored at
    /// `fading_floor_deg`.
    pub fn ntn_fading(&self, alpha: f64) -> Result<NtnFadingParams> {
        shadowed_rice_params(alpha.max(self.fading_floor_deg.to_radians()))
    }

    /// Received power without the random term, dBm.
    pub fn mean_received_power_dbm(&self, kind: LinkKind, d: f64) -> Result<f64> {
        let l = &self.link;
        Ok(match kind {
            LinkKind::Terrestrial => {
                l.tx_power_dbm + l.tx_gain_dbi + l.rx_gain_terrestrial_dbi
                    - terrestrial_pathloss_db(d, &self.terrestrial)?
            }
            LinkKind::Haps => l.tx_power_dbm + l.tx_gain_dbi + l.rx_gain_haps_dbi - fspl_db(d, l)?,
            LinkKind::Leo => l.tx_power_dbm + l.tx_gain_dbi + l.rx_gain_sat_dbi - fspl_db(d, l)?,
        })
    }

    /// Received power of one transmission unit, dBm. `alpha` is the
    /// elevation in radians and is required for HAPS and LEO links.
    pub fn received_power_dbm<R: Rng + ?Sized>(
        &self,
        kind: LinkKind,
        d: f64,
        alpha: Option<f64>,
        rng: &mut R,
    ) -> Result<f64> {
        let mean = self.mean_received_power_dbm(kind, d)?;
        match kind {
            LinkKind::Terrestrial => Ok(mean + sample_shadow_fading_db(&self.terrestrial, rng)),
            LinkKind::Haps | LinkKind::Leo => {
                let alpha = alpha
                    .ok_or_else(|| Error::Domain("elevation required for NTN link".into()))?;
                let params = self.ntn_fading(alpha)?;
                Ok(mean + 10.0 * sample_ntn_fading(&params, rng).log10())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn terrestrial_pathloss_examples() {
        let cfg = TerrestrialChannelConfig::default();
        assert!(close(terrestrial_pathloss_db(1e3, &cfg).unwrap(), 128.96, 1e-12));
        assert!(close(terrestrial_pathloss_db(10e3, &cfg).unwrap(), 152.16, 1e-9));
        assert!(close(terrestrial_pathloss_db(100.0, &cfg).unwrap(), 105.76, 1e-9));
        assert!(terrestrial_pathloss_db(0.0, &cfg).is_err());
        assert!(terrestrial_pathloss_db(-5.0, &cfg).is_err());
    }

    #[test]
    fn fspl_examples() {
        let cfg = LinkBudgetConfig::default();
        assert!(close(fspl_db(30e3, &cfg).unwrap(), 120.7546, 1e-3));
        assert!(close(fspl_db(750e3, &cfg).unwrap(), 148.7134, 1e-3));
        let unit = cfg.wavelength_m() / (4.0 * PI);
        assert!(close(fspl_db(unit, &cfg).unwrap(), 0.0, 1e-12));
        assert!(fspl_db(0.0, &cfg).is_err());
    }

    #[test]
    fn fading_params_at_zenith() {
        let p = shadowed_rice_params(90f64.to_radians()).unwrap();
        assert!(close(p.b0, 0.023_735, 1e-6));
        assert!(close(p.m, 40.346_804, 1e-6));
        assert!(close(p.omega, 1.187_032, 1e-6));
        assert!(close(p.k, 10.168_542, 1e-5));
        assert!(close(p.theta, 0.121_404, 1e-6));
    }

    #[test]
    fn gamma_identity_on_degree_grid() {
        for deg in 10..=90 {
            let (b0, m, omega) = shadowed_rice_polynomials(deg as f64);
            let p = NtnFadingParams::from_shadowed_rice(b0, m, omega);
            let rel = (p.k * p.theta - p.mean()).abs() / p.mean().abs();
            assert!(rel < 1e-12, "deg {deg}: {rel}");
        }
    }

    #[test]
    fn low_elevations_fall_outside_the_fit() {
        assert!(matches!(
            shadowed_rice_params(12f64.to_radians()),
            Err(Error::ParameterOutOfRange { name: "omega", .. })
        ));
        // Clamped to 10 degrees, which is also invalid.
        assert!(shadowed_rice_params(2f64.to_radians()).is_err());
        assert!(shadowed_rice_params(17f64.to_radians()).is_ok());
    }

    #[test]
    fn mean_power_grows_with_elevation() {
        let low = shadowed_rice_params(20f64.to_radians()).unwrap();
        let high = shadowed_rice_params(90f64.to_radians()).unwrap();
        assert!(high.mean() > low.mean());
    }

    #[test]
    fn gamma_moments() {
        let p = shadowed_rice_params(90f64.to_radians()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_ntn_fading(&p, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean / p.mean() - 1.0).abs() < 0.01);
        assert!((var / (p.k * p.theta * p.theta) - 1.0).abs() < 0.02);
    }

    #[test]
    fn tiny_scale_gives_tiny_gain() {
        let p = NtnFadingParams {
            b0: 1.0,
            m: 1.0,
            omega: 1.0,
            k: 2.0,
            theta: 1e-300,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_ntn_fading(&p, &mut rng) < 1e-290);
    }

    #[test]
    fn shadowing_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let zero = TerrestrialChannelConfig {
            shadow_sigma_db: 0.0,
            ..Default::default()
        };
        assert_eq!(sample_shadow_fading_db(&zero, &mut rng), 0.0);
        let cfg = TerrestrialChannelConfig::default();
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_shadow_fading_db(&cfg, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!(mean.abs() < 0.03);
        assert!((sd - 7.8).abs() < 0.05);
    }

    #[test]
    fn deterministic_link_budgets() {
        let ch = ChannelModel::default();
        let haps = ch.mean_received_power_dbm(LinkKind::Haps, 30e3).unwrap();
        let leo = ch.mean_received_power_dbm(LinkKind::Leo, 750e3).unwrap();
        let terr = ch.mean_received_power_dbm(LinkKind::Terrestrial, 10e3).unwrap();
        assert!(close(haps, -100.7546, 1e-3));
        assert!(close(leo, -121.2134, 1e-3));
        assert!(close(terr, -132.16, 1e-9));
    }

    #[test]
    fn ntn_power_requires_elevation() {
        let ch = ChannelModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(ch.received_power_dbm(LinkKind::Leo, 750e3, None, &mut rng).is_err());
        assert!(ch
            .received_power_dbm(LinkKind::Terrestrial, 10e3, None, &mut rng)
            .is_ok());
    }

    #[test]
    fn received_power_is_reproducible() {
        let ch = ChannelModel::default();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ch.received_power_dbm(LinkKind::Haps, 50e3, Some(0.6), &mut rng)
                .unwrap()
        };
        assert_eq!(draw(3), draw(3));
    }

    #[test]
    fn mean_power_strictly_decreasing_in_distance() {
        let ch = ChannelModel::default();
        for kind in [LinkKind::Terrestrial, LinkKind::Haps, LinkKind::Leo] {
            let mut prev = f64::INFINITY;
            for i in 1..200 {
                let p = ch.mean_received_power_dbm(kind, i as f64 * 5e3).unwrap();
                assert!(p < prev);
                prev = p;
            }
        }
    }

    #[test]
    fn terrestrial_erasure_matches_gaussian_tail() {
        use statrs::distribution::{ContinuousCDF, Normal as StatNormal};
        let ch = ChannelModel::default();
        let mu = ch.mean_received_power_dbm(LinkKind::Terrestrial, 10e3).unwrap();
        let expected = StatNormal::new(mu, 7.8)
            .unwrap()
            .cdf(ch.link.sensitivity_dbm);
        assert!(close(expected, 0.508_18, 1e-4));
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 1_000_000;
        let erased = (0..n)
            .filter(|_| {
                ch.received_power_dbm(LinkKind::Terrestrial, 10e3, None, &mut rng)
                    .unwrap()
                    < ch.link.sensitivity_dbm
            })
            .count();
        assert!(close(erased as f64 / n as f64, expected, 0.005));
    }
}
