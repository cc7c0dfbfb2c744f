use rand::Rng;

use super::Packet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corruption {
    Kept(Packet),
    Dropped(Packet),
}

/// Independent Bernoulli loss with probability `per`.
pub fn maybe_corrupt<R: Rng + ?Sized>(packet: Packet, per: f64, rng: &mut R) -> Corruption {
    if per > 0.0 && rng.gen_bool(per) {
        Corruption::Dropped(packet)
    } else {
        Corruption::Kept(packet)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::SimTime;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn drops(per: f64, n: usize, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Packet::data(0, 0, 1000, SimTime::ZERO);
        (0..n).filter(|_| matches!(maybe_corrupt(p, per, &mut rng), Corruption::Dropped(_))).count()
    }

    #[test]
    fn extremes() {
        assert_eq!(drops(0.0, 10_000, 1), 0);
        assert_eq!(drops(1.0, 10_000, 1), 10_000);
    }

    #[test]
    fn seeded_stream_is_reproducible() {
        assert_eq!(drops(0.01, 50_000, 9), drops(0.01, 50_000, 9));
    }
}
