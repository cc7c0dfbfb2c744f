use super::packet::{DEFAULT_PAYLOAD_BYTES, HEADER_BYTES};
use super::SimTime;
use crate::NetsimError;

pub const DEFAULT_BANDWIDTH_BPS: u64 = 1_000_000_000;
pub const DEFAULT_ACCESS_DELAY: SimTime = SimTime::from_millis(1);
pub const DEFAULT_BOTTLENECK_DELAY: SimTime = SimTime::from_millis(4);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkSpec {
    pub bandwidth_bps: u64,
    pub prop_delay: SimTime,
}

/// Senders S1..Sn and receivers D1..Dn hung off two routers joined by a
/// single bottleneck.
///
/// Flow `i` uses access link `i` on both sides. Every link is
/// full-duplex. Data queues at two places: the sender's egress toward
/// its router and the bottleneck egress; both are drop-tail with room
/// for `buffer` packets.
#[derive(Debug, Clone, PartialEq)]
pub struct DumbbellTopology {
    pub access: Vec<LinkSpec>,
    pub bottleneck: LinkSpec,
    pub buffer: usize,
    /// Packet error rate on the forward bottleneck.
    pub per: f64,
    pub payload_bytes: u32,
}

pub fn build_dumbbell(
    n_flows: usize,
    buffer: usize,
    per: f64,
    access_delays: &[SimTime],
) -> Result<DumbbellTopology, NetsimError> {
    if n_flows == 0 {
        return Err(NetsimError::NoFlows);
    }
    if buffer == 0 {
        return Err(NetsimError::ZeroBuffer);
    }
    if !(0.0..=1.0).contains(&per) {
        return Err(NetsimError::InvalidPer(per));
    }
    if access_delays.len() != n_flows {
        return Err(NetsimError::DelayCountMismatch { flows: n_flows, delays: access_delays.len() });
    }
    Ok(DumbbellTopology {
        access: access_delays
            .iter()
            .map(|&prop_delay| LinkSpec { bandwidth_bps: DEFAULT_BANDWIDTH_BPS, prop_delay })
            .collect(),
        bottleneck: LinkSpec { bandwidth_bps: DEFAULT_BANDWIDTH_BPS, prop_delay: DEFAULT_BOTTLENECK_DELAY },
        buffer,
        per,
        payload_bytes: DEFAULT_PAYLOAD_BYTES,
    })
}

impl DumbbellTopology {
    /// Sets every link, access and bottleneck, to `bandwidth_bps`.
    pub fn with_bandwidth(mut self, bandwidth_bps: u64) -> Result<Self, NetsimError> {
        if bandwidth_bps == 0 {
            return Err(NetsimError::ZeroBandwidth);
        }
        for link in &mut self.access {
            link.bandwidth_bps = bandwidth_bps;
        }
        self.bottleneck.bandwidth_bps = bandwidth_bps;
        Ok(self)
    }

    pub fn with_bottleneck_delay(mut self, delay: SimTime) -> Self {
        self.bottleneck.prop_delay = delay;
        self
    }

    pub fn with_payload(mut self, payload_bytes: u32) -> Self {
        self.payload_bytes = payload_bytes;
        self
    }

    pub fn n_flows(&self) -> usize {
        self.access.len()
    }

    /// Round-trip propagation delay of flow `flow`.
    pub fn base_rtt(&self, flow: usize) -> SimTime {
        let one_way = self.access[flow].prop_delay + self.bottleneck.prop_delay + self.access[flow].prop_delay;
        one_way + one_way
    }

    /// Bandwidth-delay product of flow `flow` in full-size data packets.
    pub fn bdp_packets(&self, flow: usize) -> f64 {
        let bits = self.bottleneck.bandwidth_bps as f64 * self.base_rtt(flow).as_secs_f64();
        bits / (8.0 * f64::from(self.payload_bytes + HEADER_BYTES))
    }
}
