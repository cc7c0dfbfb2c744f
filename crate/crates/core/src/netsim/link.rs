use super::{DropTailQueue, Enqueue, Packet, SimTime};

/// Point-to-point link with an unbounded FIFO in front of it.
///
/// Packets are serialized back to back: a transmission starts no earlier
/// than `busy_until`, and reaches the far end after serialization plus
/// propagation delay.
#[derive(Debug, Clone)]
pub struct Link {
    pub bandwidth_bps: u64,
    pub prop_delay: SimTime,
    busy_until: SimTime,
}

impl Link {
    pub fn new(bandwidth_bps: u64, prop_delay: SimTime) -> Self {
        Self { bandwidth_bps, prop_delay, busy_until: SimTime::ZERO }
    }

    /// Sends `size` bytes handed over at `now`; returns the arrival time at
    /// the far end.
    pub fn transmit(&mut self, now: SimTime, size: u32) -> SimTime {
        let start = now.max(self.busy_until);
        self.busy_until = start + SimTime::serialization(size, self.bandwidth_bps);
        self.busy_until + self.prop_delay
    }

    pub fn busy_until(&self) -> SimTime {
        self.busy_until
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Offer {
    /// The link was idle; transmission completes at the given time.
    Started(SimTime),
    Queued,
    Dropped(Packet),
}

/// Link fed by a drop-tail queue, driven by explicit transmit-complete
/// events. The packet on the wire does not count against the queue.
#[derive(Debug, Clone)]
pub struct QueuedLink {
    pub bandwidth_bps: u64,
    pub prop_delay: SimTime,
    queue: DropTailQueue,
    in_service: Option<Packet>,
    last_end: Option<SimTime>,
    min_spacing_ok: bool,
    departures: u64,
}

impl QueuedLink {
    pub fn new(bandwidth_bps: u64, prop_delay: SimTime, capacity: usize) -> Self {
        Self {
            bandwidth_bps,
            prop_delay,
            queue: DropTailQueue::new(capacity),
            in_service: None,
            last_end: None,
            min_spacing_ok: true,
            departures: 0,
        }
    }

    pub fn offer(&mut self, now: SimTime, packet: Packet) -> Offer {
        if self.in_service.is_none() {
            return Offer::Started(self.start(now, packet));
        }
        match self.queue.enqueue(packet) {
            Enqueue::Accepted => Offer::Queued,
            Enqueue::Dropped(p) => Offer::Dropped(p),
        }
    }

    /// Finishes the transmission in progress. Returns the departed packet
    /// and, if another one was waiting, its completion time.
    pub fn complete(&mut self, now: SimTime) -> (Packet, Option<SimTime>) {
        let done = self.in_service.take().expect("transmit completion on an idle link");
        self.departures += 1;
        let next = self.queue.dequeue().map(|p| self.start(now, p));
        (done, next)
    }

    fn start(&mut self, now: SimTime, packet: Packet) -> SimTime {
        let ser = SimTime::serialization(packet.size, self.bandwidth_bps);
        if let Some(prev_end) = self.last_end {
            if now < prev_end {
                self.min_spacing_ok = false;
            }
        }
        self.last_end = Some(now + ser);
        self.in_service = Some(packet);
        now + ser
    }

    pub fn queue(&self) -> &DropTailQueue {
        &self.queue
    }

    pub fn in_service(&self) -> Option<&Packet> {
        self.in_service.as_ref()
    }

    /// Waiting packets, excluding the one on the wire.
    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn departures(&self) -> u64 {
        self.departures
    }

    /// False if a transmission ever started before the previous one had
    /// been fully clocked out.
    pub fn serialization_respected(&self) -> bool {
        self.min_spacing_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn back_to_back_serialization() {
        let mut link = Link::new(1_000_000_000, SimTime::from_millis(1));
        let a = link.transmit(SimTime::ZERO, 1040);
        let b = link.transmit(SimTime::ZERO, 1040);
        assert_eq!(a, SimTime::from_nanos(8_320 + 1_000_000));
        assert_eq!(b - a, SimTime::from_nanos(8_320));
        // idle link starts immediately
        let c = link.transmit(SimTime::from_secs(1), 40);
        assert_eq!(c, SimTime::from_secs(1) + SimTime::from_nanos(320) + SimTime::from_millis(1));
    }

    #[test]
    fn queued_link_drops_when_waiting_room_is_full() {
        let mut link = QueuedLink::new(1_000_000_000, SimTime::from_millis(4), 2);
        let p = |s| Packet::data(0, s, 1000, SimTime::ZERO);
        assert_eq!(link.offer(SimTime::ZERO, p(0)), Offer::Started(SimTime::from_nanos(8_320)));
        assert_eq!(link.offer(SimTime::ZERO, p(1)), Offer::Queued);
        assert_eq!(link.offer(SimTime::ZERO, p(2)), Offer::Queued);
        assert_eq!(link.offer(SimTime::ZERO, p(3)), Offer::Dropped(p(3)));
        let (done, next) = link.complete(SimTime::from_nanos(8_320));
        assert_eq!(done.seq, 0);
        assert_eq!(next, Some(SimTime::from_nanos(16_640)));
        assert_eq!(link.queue_len(), 1);
        assert!(link.serialization_respected());
    }
}
