//! The receivers of one scenario.

use serde::Serialize;

use crate::channel::LinkKind;
use crate::error::{Error, Result};
use crate::geometry::{BasestationLayout, HapsConfig, Position};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GatewayKind {
    Terrestrial { position: Position, guard: bool },
    Haps,
    Leo,
}

impl GatewayKind {
    pub fn link_kind(&self) -> LinkKind {
        match self {
            GatewayKind::Terrestrial { .. } => LinkKind::Terrestrial,
            GatewayKind::Haps => LinkKind::Haps,
            GatewayKind::Leo => LinkKind::Leo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gateway {
    /// Index within the owning [`GatewaySet`].
    pub id: usize,
    /// Stable key for random-stream derivation. It depends only on the
    /// gateway's role (LEO, HAPS, n-th inner or guard BS), so the same
    /// receiver draws the same fading in every scenario it appears in.
    pub key: u64,
    pub kind: GatewayKind,
}

const KEY_LEO: u64 = 1;
const KEY_HAPS: u64 = 2;
const KEY_INNER_BASE: u64 = 1 << 20;
const KEY_GUARD_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GatewaySet {
    pub terrestrial: BasestationLayout,
    pub haps: Option<HapsConfig>,
    pub leo: bool,
}

impl GatewaySet {
    pub fn validate(&self) -> Result<()> {
        if self.terrestrial.is_empty() && self.haps.is_none() && !self.leo {
            return Err(Error::config("scenario", "no gateway present"));
        }
        Ok(())
    }

    /// All receivers: LEO, then HAPS, then inner and guard base stations.
    pub fn gateways(&self) -> Vec<Gateway> {
        let mut out = Vec::with_capacity(self.terrestrial.len() + 2);
        if self.leo {
            out.push((KEY_LEO, GatewayKind::Leo));
        }
        if self.haps.is_some() {
            out.push((KEY_HAPS, GatewayKind::Haps));
        }
        for (i, p) in self.terrestrial.inner.iter().enumerate() {
            out.push((
                KEY_INNER_BASE + i as u64,
                GatewayKind::Terrestrial {
                    position: *p,
                    guard: false,
                },
            ));
        }
        for (i, p) in self.terrestrial.guard.iter().enumerate() {
            out.push((
                KEY_GUARD_BASE + i as u64,
                GatewayKind::Terrestrial {
                    position: *p,
                    guard: true,
                },
            ));
        }
        out.into_iter()
            .enumerate()
            .map(|(id, (key, kind))| Gateway { id, key, kind })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_set_rejected() {
        assert!(GatewaySet::default().validate().is_err());
    }

    #[test]
    fn keys_are_role_based() {
        let layout = BasestationLayout {
            inner: vec![Position::new(1.0, 2.0)],
            guard: vec![Position::new(90e3, 0.0)],
        };
        let tn = GatewaySet {
            terrestrial: layout.clone(),
            ..Default::default()
        };
        let hybrid = GatewaySet {
            terrestrial: layout,
            haps: Some(HapsConfig::default()),
            leo: true,
        };
        let tn_keys: Vec<_> = tn.gateways().iter().map(|g| g.key).collect();
        let hybrid_keys: Vec<_> = hybrid.gateways().iter().map(|g| g.key).collect();
        assert_eq!(hybrid_keys[..2], [KEY_LEO, KEY_HAPS]);
        assert_eq!(hybrid_keys[2..], tn_keys[..]);
        assert!(hybrid.gateways().iter().enumerate().all(|(i, g)| g.id == i));
    }
}
