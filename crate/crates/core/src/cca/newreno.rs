use super::{CongestionControl, ControllerState, Phase, TimeoutThreshold, MIN_CWND_AFTER_LOSS};

/// Classic AIMD: +1 per ACK in slow start, +1/cwnd per ACK in congestion
/// avoidance, halve on a triple duplicate ACK.
#[derive(Debug, Clone)]
pub struct NewReno {
    initial_cwnd: u32,
    state: ControllerState,
    timeout_threshold: TimeoutThreshold,
}

impl NewReno {
    pub fn new(initial_cwnd: u32) -> Self {
        Self {
            initial_cwnd,
            state: ControllerState::initial(initial_cwnd),
            timeout_threshold: TimeoutThreshold::default(),
        }
    }

    pub fn with_timeout_threshold(mut self, rule: TimeoutThreshold) -> Self {
        self.timeout_threshold = rule;
        self
    }

    pub fn from_state(initial_cwnd: u32, state: ControllerState) -> Self {
        Self { state, ..Self::new(initial_cwnd) }
    }
}

impl CongestionControl for NewReno {
    fn name(&self) -> &'static str {
        "newreno"
    }

    fn on_ack(&mut self, _acked_segments: u64, _now: f64) {
        let st = &mut self.state;
        match st.phase {
            Phase::FastRecovery => {}
            Phase::SlowStart => {
                st.cwnd += 1.0;
                if st.cwnd >= st.ssthresh {
                    st.phase = Phase::CongestionAvoidance;
                }
            }
            Phase::CongestionAvoidance => st.cwnd += 1.0 / st.cwnd,
        }
    }

    fn on_triple_dup_ack(&mut self, _now: f64) {
        let st = &mut self.state;
        st.cwnd_loss = Some(st.cwnd);
        st.cwnd = (st.cwnd * 0.5).max(MIN_CWND_AFTER_LOSS);
        st.ssthresh = st.cwnd;
        st.cwnd_degraded = Some(st.cwnd);
        st.phase = Phase::FastRecovery;
    }

    fn on_timeout(&mut self, _now: f64) {
        let st = &mut self.state;
        st.ssthresh = self.timeout_threshold.apply(st.cwnd, st.ssthresh);
        st.cwnd = f64::from(self.initial_cwnd);
        st.phase = Phase::for_window(st.cwnd, st.ssthresh);
    }

    fn on_recovery_exit(&mut self, _now: f64) {
        let st = &mut self.state;
        if st.phase == Phase::FastRecovery {
            st.phase = Phase::for_window(st.cwnd, st.ssthresh);
        }
    }

    fn state(&self) -> ControllerState {
        self.state
    }
}
