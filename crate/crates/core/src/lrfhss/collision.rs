use super::TransmissionRecord;

/// For every unit of a batch of transmissions, the other units that overlap
/// it in time on the same channel.
///
/// Units are addressed either as `(packet, unit)` pairs or by a flat index
/// (packets laid out in order, units in order within each packet).
#[derive(Debug, Clone, Default)]
pub struct OverlapIndex {
    packet_offsets: Vec<u32>,
    owners: Vec<(u32, u16)>,
    adjacency_offsets: Vec<u32>,
    adjacency: Vec<u32>,
}

impl OverlapIndex {
    pub fn build(records: &[TransmissionRecord]) -> Self {
        let mut packet_offsets = Vec::with_capacity(records.len() + 1);
        let mut owners = Vec::new();
        let mut spans = Vec::new();
        for (p, rec) in records.iter().enumerate() {
            packet_offsets.push(owners.len() as u32);
            for (u, unit) in rec.units.iter().enumerate() {
                spans.push((unit.channel, unit.start_s, unit.end_s(), owners.len() as u32));
                owners.push((p as u32, u as u16));
            }
        }
        packet_offsets.push(owners.len() as u32);

        spans.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.3.cmp(&b.3)));
        let mut pairs = Vec::new();
        for i in 0..spans.len() {
            let (ch, _, end, id) = spans[i];
            // Later starts on the same channel overlap while they begin
            // before this unit ends.
            for other in &spans[i + 1..] {
                if other.0 != ch || other.1 >= end {
                    break;
                }
                pairs.push((id, other.3));
            }
        }

        let mut degree = vec![0u32; owners.len() + 1];
        for &(a, b) in &pairs {
            degree[a as usize + 1] += 1;
            degree[b as usize + 1] += 1;
        }
        for i in 1..degree.len() {
            degree[i] += degree[i - 1];
        }
        let adjacency_offsets = degree.clone();
        let mut fill = degree;
        let mut adjacency = vec![0u32; pairs.len() * 2];
        for &(a, b) in &pairs {
            adjacency[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            adjacency[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }

        Self {
            packet_offsets,
            owners,
            adjacency_offsets,
            adjacency,
        }
    }

    pub fn unit_count(&self) -> usize {
        self.owners.len()
    }

    pub fn flat(&self, packet: usize, unit: usize) -> usize {
        self.packet_offsets[packet] as usize + unit
    }

    /// `(packet, unit)` of a flat index.
    pub fn owner(&self, flat: usize) -> (usize, usize) {
        let (p, u) = self.owners[flat];
        (p as usize, u as usize)
    }

    /// Flat indices of the units overlapping `(packet, unit)`.
    pub fn neighbors(&self, packet: usize, unit: usize) -> &[u32] {
        let f = self.flat(packet, unit);
        &self.adjacency[self.adjacency_offsets[f] as usize..self.adjacency_offsets[f + 1] as usize]
    }

    pub fn has_overlap(&self, packet: usize, unit: usize) -> bool {
        !self.neighbors(packet, unit).is_empty()
    }
}

/// Collision flags for every unit of every transmission.
///
/// A unit is collided when another unit that counts as a collider overlaps
/// it. `is_collider(packet, unit)` picks the colliders; pass `|_, _| true`
/// when overlap alone destroys both units.
pub fn detect_collisions<F>(all_tx: &[TransmissionRecord], is_collider: F) -> Vec<Vec<bool>>
where
    F: Fn(usize, usize) -> bool,
{
    let index = OverlapIndex::build(all_tx);
    all_tx
        .iter()
        .enumerate()
        .map(|(p, rec)| {
            (0..rec.units.len())
                .map(|u| {
                    index.neighbors(p, u).iter().any(|&v| {
                        let (q, w) = index.owner(v as usize);
                        is_collider(q, w)
                    })
                })
                .collect()
        })
        .collect()
}
