use std::fmt;
use std::ops::{Add, AddAssign, Sub};

/// Simulation time in integer nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us * 1_000)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000_000)
    }

    /// Rounds to the nearest nanosecond.
    pub fn from_secs_f64(s: f64) -> Self {
        assert!(s >= 0.0 && s.is_finite(), "time must be finite and non-negative, got {s}");
        SimTime((s * 1e9).round() as u64)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    /// Time to clock `bytes` onto a link of `bandwidth_bps`, rounded up.
    pub fn serialization(bytes: u32, bandwidth_bps: u64) -> SimTime {
        let bits = u128::from(bytes) * 8 * 1_000_000_000;
        SimTime(bits.div_ceil(u128::from(bandwidth_bps)) as u64)
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}", self.as_secs_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_of_a_data_packet_at_one_gigabit() {
        assert_eq!(SimTime::serialization(1040, 1_000_000_000), SimTime::from_nanos(8_320));
        assert_eq!(SimTime::serialization(40, 1_000_000_000), SimTime::from_nanos(320));
        // rounds up
        assert_eq!(SimTime::serialization(1, 3_000_000_000), SimTime::from_nanos(3));
    }

    #[test]
    fn seconds_conversion() {
        assert_eq!(SimTime::from_secs_f64(0.012), SimTime::from_millis(12));
        assert_eq!(SimTime::from_millis(1500).as_secs_f64(), 1.5);
    }
}
