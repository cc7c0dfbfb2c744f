use std::collections::VecDeque;

use super::Packet;

/// FIFO that discards arrivals once `capacity` packets are waiting.
#[derive(Debug, Clone)]
pub struct DropTailQueue {
    capacity: usize,
    packets: VecDeque<Packet>,
    max_len: usize,
    drops: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enqueue {
    Accepted,
    Dropped(Packet),
}

impl DropTailQueue {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, packets: VecDeque::with_capacity(capacity.min(4096)), max_len: 0, drops: 0 }
    }

    pub fn enqueue(&mut self, packet: Packet) -> Enqueue {
        if self.packets.len() >= self.capacity {
            self.drops += 1;
            return Enqueue::Dropped(packet);
        }
        self.packets.push_back(packet);
        self.max_len = self.max_len.max(self.packets.len());
        Enqueue::Accepted
    }

    pub fn dequeue(&mut self) -> Option<Packet> {
        self.packets.pop_front()
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Longest the queue has ever been.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn drops(&self) -> u64 {
        self.drops
    }

    pub fn iter(&self) -> impl Iterator<Item = &Packet> {
        self.packets.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::SimTime;

    fn pkt(flow: usize, seq: u64) -> Packet {
        Packet::data(flow, seq, 1000, SimTime::ZERO)
    }

    #[test]
    fn accepts_until_full() {
        let mut q = DropTailQueue::new(5);
        for i in 0..4 {
            assert_eq!(q.enqueue(pkt(0, i)), Enqueue::Accepted);
        }
        assert_eq!(q.len(), 4);
        assert_eq!(q.enqueue(pkt(0, 4)), Enqueue::Accepted);
        assert_eq!(q.enqueue(pkt(0, 5)), Enqueue::Dropped(pkt(0, 5)));
        assert_eq!(q.len(), 5);
        assert_eq!(q.drops(), 1);
        assert_eq!(q.max_len(), 5);
    }

    #[test]
    fn preserves_fifo_order_across_flows() {
        let mut q = DropTailQueue::new(10);
        let order = [(0, 1), (1, 7), (0, 2), (2, 3), (1, 8)];
        for (f, s) in order {
            q.enqueue(pkt(f, s));
        }
        let out: Vec<_> = std::iter::from_fn(|| q.dequeue()).map(|p| (p.flow, p.seq)).collect();
        assert_eq!(out, order.map(|(f, s)| (f, s)).to_vec());
    }
}
