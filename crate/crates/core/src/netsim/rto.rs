use super::SimTime;

pub const MIN_RTO: SimTime = SimTime::from_millis(200);
pub const MAX_RTO: SimTime = SimTime::from_secs(60);
pub const INITIAL_RTO: SimTime = SimTime::from_secs(1);

/// Smoothed RTT / RTT variance estimator with exponential backoff.
#[derive(Debug, Clone)]
pub struct RtoEstimator {
    srtt: Option<i64>,
    rttvar: i64,
    base: SimTime,
    backoff: u32,
    min_rtt: Option<SimTime>,
}

impl Default for RtoEstimator {
    fn default() -> Self {
        Self { srtt: None, rttvar: 0, base: INITIAL_RTO, backoff: 0, min_rtt: None }
    }
}

impl RtoEstimator {
    pub fn on_sample(&mut self, rtt: SimTime) {
        let r = rtt.as_nanos() as i64;
        match self.srtt {
            None => {
                self.srtt = Some(r);
                self.rttvar = r / 2;
            }
            Some(srtt) => {
                self.rttvar += ((srtt - r).abs() - self.rttvar) / 4;
                self.srtt = Some(srtt + (r - srtt) / 8);
            }
        }
        let raw = self.srtt.unwrap_or(r) + 4 * self.rttvar;
        self.base = SimTime(raw.max(0) as u64).clamp(MIN_RTO, MAX_RTO);
        self.backoff = 0;
        self.min_rtt = Some(self.min_rtt.map_or(rtt, |m| m.min(rtt)));
    }

    /// Current timeout including backoff.
    pub fn rto(&self) -> SimTime {
        let factor = 1u64.checked_shl(self.backoff).unwrap_or(u64::MAX);
        SimTime(self.base.as_nanos().saturating_mul(factor)).min(MAX_RTO)
    }

    pub fn back_off(&mut self) {
        if self.rto() < MAX_RTO {
            self.backoff += 1;
        }
    }

    pub fn srtt(&self) -> Option<SimTime> {
        self.srtt.map(|s| SimTime(s as u64))
    }

    pub fn min_rtt(&self) -> Option<SimTime> {
        self.min_rtt
    }
}
