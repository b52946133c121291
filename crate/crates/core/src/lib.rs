//! Monte Carlo simulation and cost analysis of IoT uplink connectivity through
//! a stratospheric platform (HAPS), a single visible LEO satellite and
//! terrestrial LoRaWAN gateways, alone or combined.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: device and base-station deployment, HAPS range and elevation.
//! - [`orbit`]: satellite lap durations, pass geometry and per-device elevation.
//! - [`channel`]: log-normal terrestrial and free-space/shadowed-Rice NTN links.
//! - [`lrfhss`]: LR-FHSS traffic, hop sequences, collisions, erasure and decoding.
//! - [`metrics`]: erasure maps, radial profiles, violin summaries, success curves.
//! - [`cost`]: discounted total cost of HAPS, LEO service and tower leasing.
//! - [`runner`]: configuration, scenarios, seeded parallel campaigns and CSV export.
//!
//! Units are SI throughout (metres, seconds, radians, hertz); powers and
//! losses are in dB/dBm. Degrees appear only in configuration files, CSV
//! output and the empirical fading fit.

pub mod channel;
pub mod cost;
pub mod error;
pub mod geometry;
pub mod lrfhss;
pub mod metrics;
pub mod network;
pub mod orbit;
pub mod runner;

pub use error::{Error, Result};

/// Speed of light used for the wavelength, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
