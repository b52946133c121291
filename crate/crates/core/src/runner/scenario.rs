use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BasestationLayout, HapsConfig};
use crate::network::GatewaySet;

/// A combination of gateway kinds, written like `LEO+HAPS+TN(20)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Scenario {
    /// Base stations inside the device disk; zero for none.
    pub terrestrial_bs: usize,
    pub haps: bool,
    pub leo: bool,
}

impl Scenario {
    pub const HAPS: Scenario = Scenario {
        terrestrial_bs: 0,
        haps: true,
        leo: false,
    };
    pub const LEO: Scenario = Scenario {
        terrestrial_bs: 0,
        haps: false,
        leo: true,
    };

    pub fn tn(m: usize) -> Scenario {
        Scenario {
            terrestrial_bs: m,
            haps: false,
            leo: false,
        }
    }

    pub fn with_tn(self, m: usize) -> Scenario {
        Scenario {
            terrestrial_bs: m,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.terrestrial_bs == 0 && !self.haps && !self.leo {
            return Err(Error::config("scenario", "no gateway in scenario"));
        }
        Ok(())
    }

    pub fn gateway_set(&self, terrestrial: BasestationLayout, haps: HapsConfig) -> GatewaySet {
        GatewaySet {
            terrestrial,
            haps: self.haps.then_some(haps),
            leo: self.leo,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.leo {
            parts.push("LEO".to_string());
        }
        if self.haps {
            parts.push("HAPS".to_string());
        }
        if self.terrestrial_bs > 0 {
            parts.push(format!("TN({})", self.terrestrial_bs));
        }
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::config("scenario", msg);
        let mut sc = Scenario {
            terrestrial_bs: 0,
            haps: false,
            leo: false,
        };
        let mut tn_seen = false;
        for part in s.split('+').map(str::trim) {
            let upper = part.to_ascii_uppercase();
            let dup = match upper.as_str() {
                "LEO" => std::mem::replace(&mut sc.leo, true),
                "HAPS" => std::mem::replace(&mut sc.haps, true),
                _ => {
                    let m = upper
                        .strip_prefix("TN(")
                        .and_then(|r| r.strip_suffix(')'))
                        .ok_or_else(|| bad(format!("unknown component `{part}` in `{s}`")))?;
                    let m: usize = m
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad base-station count in `{part}`")))?;
                    if m == 0 {
                        return Err(bad("TN(0) has no base stations".into()));
                    }
                    sc.terrestrial_bs = m;
                    std::mem::replace(&mut tn_seen, true)
                }
            };
            if dup {
                return Err(bad(format!("`{part}` repeated in `{s}`")));
            }
        }
        sc.validate()?;
        Ok(sc)
    }
}

impl TryFrom<String> for Scenario {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Scenario> for String {
    fn from(s: Scenario) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    Erasure,
    Success,
    #[default]
    Both,
}

/// One experiment: where, how many, how long, and which seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub n_devices: usize,
    pub n_runs: usize,
    pub duration_s: f64,
    pub mode: MetricMode,
    pub master_seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::config("duration_h", "must be > 0"));
        }
        if self.n_devices == 0 {
            return Err(Error::config("devices", "must be at least 1"));
        }
        Ok(())
    }
}
