use super::SimTime;

/// Payload bytes per data segment.
pub const DEFAULT_PAYLOAD_BYTES: u32 = 1000;
/// TCP/IP header bytes added to each data segment.
pub const HEADER_BYTES: u32 = 40;
pub const ACK_BYTES: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Data,
    Ack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub flow: usize,
    /// Segment number for data; next expected segment for ACKs.
    pub seq: u64,
    pub kind: PacketKind,
    /// Bytes on the wire.
    pub size: u32,
    pub sent_at: SimTime,
    /// For ACKs, `sent_at` of the data segment that triggered it.
    pub echo: SimTime,
}

impl Packet {
    pub fn data(flow: usize, seq: u64, payload: u32, sent_at: SimTime) -> Self {
        Packet { flow, seq, kind: PacketKind::Data, size: payload + HEADER_BYTES, sent_at, echo: SimTime::ZERO }
    }

    pub fn ack(flow: usize, next_expected: u64, echo: SimTime, sent_at: SimTime) -> Self {
        Packet { flow, seq: next_expected, kind: PacketKind::Ack, size: ACK_BYTES, sent_at, echo }
    }

    pub fn is_data(&self) -> bool {
        self.kind == PacketKind::Data
    }
}
