use serde::Serialize;

use super::LrFhssConfig;

/// Fate of one header or fragment at one gateway.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct UnitOutcome {
    /// Received power below the sensitivity.
    pub erased: bool,
    /// Overlapped by another unit on the same channel.
    pub collided: bool,
    pub received: bool,
}

impl UnitOutcome {
    pub fn new(erased: bool, collided: bool) -> Self {
        Self {
            erased,
            collided,
            received: !erased && !collided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PacketDecision {
    pub per_gateway_decoded: Vec<bool>,
    pub network_decoded: bool,
}

impl PacketDecision {
    /// Gateways that decoded the packet; the network server keeps one copy.
    pub fn duplicates(&self) -> usize {
        self.per_gateway_decoded.iter().filter(|&&d| d).count()
    }
}

/// Header-plus-enough-fragments rule at one gateway. `outcomes` lists the
/// headers first, then the fragments.
pub fn decode_at_gateway(outcomes: &[UnitOutcome], cfg: &LrFhssConfig) -> bool {
    let split = cfg.n_header_copies.min(outcomes.len());
    let (headers, fragments) = outcomes.split_at(split);
    let header_ok = headers.iter().any(|o| o.received);
    let needed = cfg.coding_rate.ceil_fraction_of(fragments.len());
    header_ok && fragments.iter().filter(|o| o.received).count() >= needed
}

/// Per-gateway decisions and their union.
pub fn decode_packet(per_gateway: &[Vec<UnitOutcome>], cfg: &LrFhssConfig) -> PacketDecision {
    let per_gateway_decoded: Vec<bool> = per_gateway
        .iter()
        .map(|o| decode_at_gateway(o, cfg))
        .collect();
    let network_decoded = per_gateway_decoded.iter().any(|&d| d);
    PacketDecision {
        per_gateway_decoded,
        network_decoded,
    }
}
