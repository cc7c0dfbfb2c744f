use super::{CongestionControl, ControllerState, Phase, TimeoutThreshold, MIN_CWND_AFTER_LOSS};
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicParams {
    /// Scaling constant of the cubic curve, segments / s^3.
    pub c: f64,
    /// Fraction of the window released on a loss.
    pub beta: f64,
}

impl Default for CubicParams {
    fn default() -> Self {
        Self { c: 0.4, beta: 0.3 }
    }
}

impl CubicParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(ConfigError::invalid("cubic_c", self.c, "must be a positive finite value"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(ConfigError::invalid("cubic_beta", self.beta, "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Seconds needed to climb from `start` back to `w_max`.
    pub fn inflection_delay(&self, w_max: f64, start: f64) -> f64 {
        ((w_max - start).max(0.0) / self.c).cbrt()
    }

    /// `C * (t - K)^3 + w_max`.
    pub fn window(&self, elapsed: f64, k: f64, w_max: f64) -> f64 {
        self.c * (elapsed - k).powi(3) + w_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Epoch {
    start: f64,
    k: f64,
}

/// Cubic window growth keyed on the time since the last loss, never
/// below a shadow NewReno window started at the same point.
#[derive(Debug, Clone)]
pub struct Cubic {
    params: CubicParams,
    initial_cwnd: u32,
    state: ControllerState,
    timeout_threshold: TimeoutThreshold,
    w_max: f64,
    epoch: Option<Epoch>,
    reno_cwnd: f64,
}

impl Cubic {
    pub fn new(params: CubicParams, initial_cwnd: u32) -> Self {
        let state = ControllerState::initial(initial_cwnd);
        Self {
            params,
            initial_cwnd,
            state,
            timeout_threshold: TimeoutThreshold::default(),
            w_max: 0.0,
            epoch: None,
            reno_cwnd: state.cwnd,
        }
    }

    pub fn with_timeout_threshold(mut self, rule: TimeoutThreshold) -> Self {
        self.timeout_threshold = rule;
        self
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    /// Inflection delay of the current epoch, if one has started.
    pub fn k(&self) -> Option<f64> {
        self.epoch.map(|e| e.k)
    }

    /// Target window `elapsed` seconds into the current epoch.
    pub fn target(&self, elapsed: f64) -> Option<f64> {
        self.epoch.map(|e| self.params.window(elapsed, e.k, self.w_max))
    }

    fn start_epoch(&mut self, now: f64) {
        let cwnd = self.state.cwnd;
        if cwnd >= self.w_max {
            self.w_max = cwnd;
        }
        self.epoch = Some(Epoch { start: now, k: self.params.inflection_delay(self.w_max, cwnd) });
        self.reno_cwnd = cwnd;
    }
}

impl CongestionControl for Cubic {
    fn name(&self) -> &'static str {
        "cubic"
    }

    fn on_ack(&mut self, _acked_segments: u64, now: f64) {
        match self.state.phase {
            Phase::FastRecovery => {}
            Phase::SlowStart => {
                self.state.cwnd += 1.0;
                if self.state.cwnd >= self.state.ssthresh {
                    self.state.phase = Phase::CongestionAvoidance;
                }
            }
            Phase::CongestionAvoidance => {
                if self.epoch.is_none() {
                    self.start_epoch(now);
                }
                let epoch = self.epoch.expect("epoch started above");
                let cwnd = self.state.cwnd;
                let target = self
                    .params
                    .window(now - epoch.start, epoch.k, self.w_max)
                    .clamp(cwnd, 1.5 * cwnd);
                let mut next = if target > cwnd { cwnd + (target - cwnd) / cwnd } else { cwnd + 0.01 / cwnd };
                self.reno_cwnd += 1.0 / self.reno_cwnd;
                if self.reno_cwnd > next {
                    next = self.reno_cwnd;
                }
                self.state.cwnd = next;
            }
        }
    }

    fn on_triple_dup_ack(&mut self, now: f64) {
        let st = &mut self.state;
        st.cwnd_loss = Some(st.cwnd);
        self.w_max = st.cwnd;
        st.cwnd = (st.cwnd * (1.0 - self.params.beta)).max(MIN_CWND_AFTER_LOSS);
        st.ssthresh = st.cwnd;
        st.cwnd_degraded = Some(st.cwnd);
        st.phase = Phase::FastRecovery;
        self.start_epoch(now);
    }

    fn on_timeout(&mut self, _now: f64) {
        let st = &mut self.state;
        self.w_max = st.cwnd;
        st.ssthresh = self.timeout_threshold.apply(st.cwnd, st.ssthresh);
        st.cwnd = f64::from(self.initial_cwnd);
        st.phase = Phase::for_window(st.cwnd, st.ssthresh);
        self.epoch = None;
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

#[cfg(test)]
mod tests {
    use super::*;

    fn after_loss_from(w: f64, at: f64) -> Cubic {
        let mut cc = Cubic::new(CubicParams::default(), 2);
        cc.state = ControllerState { cwnd: w, ssthresh: w, phase: Phase::CongestionAvoidance, ..cc.state };
        cc.on_triple_dup_ack(at);
        cc
    }

    #[test]
    fn loss_releases_beta_fraction() {
        let cc = after_loss_from(100.0, 5.0);
        assert!((cc.cwnd() - 70.0).abs() < 1e-12);
        assert_eq!(cc.w_max(), 100.0);
        assert!((cc.target(0.0).unwrap() - 70.0).abs() < 1e-9);
    }

    #[test]
    fn inflection_delay_for_default_constants() {
        let cc = after_loss_from(100.0, 0.0);
        // cbrt(100 * 0.3 / 0.4) = cbrt(75)
        assert!((cc.k().unwrap() - 4.217_163_326_508_746).abs() < 1e-12);
        let k = cc.k().unwrap();
        assert!((cc.target(k).unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn concave_then_convex_growth() {
        let mut cc = after_loss_from(100.0, 0.0);
        cc.on_recovery_exit(0.01);
        assert_eq!(cc.phase(), Phase::CongestionAvoidance);
        let mut t = 0.01;
        let mut last = cc.cwnd();
        while t < 8.0 {
            cc.on_ack(1, t);
            assert!(cc.cwnd() >= last);
            last = cc.cwnd();
            t += 0.001;
        }
        assert!(cc.cwnd() > 100.0);
    }

    #[test]
    fn reno_floor_applies() {
        // with a tiny C the cubic curve is nearly flat; the shadow window wins
        let params = CubicParams { c: 1e-9, beta: 0.3 };
        let mut cc = Cubic::new(params, 2);
        cc.state = ControllerState { cwnd: 10.0, ssthresh: 10.0, phase: Phase::CongestionAvoidance, ..cc.state };
        cc.on_triple_dup_ack(0.0);
        cc.on_recovery_exit(0.0);
        let mut reno = 7.0f64;
        for i in 0..200 {
            cc.on_ack(1, 0.001 * f64::from(i));
            reno += 1.0 / reno;
        }
        assert!((cc.cwnd() - reno).abs() < 1e-9);
    }

    #[test]
    fn timeout_restarts_slow_start() {
        let mut cc = after_loss_from(100.0, 0.0);
        cc.on_timeout(1.0);
        assert_eq!(cc.cwnd(), 2.0);
        assert_eq!(cc.phase(), Phase::SlowStart);
        assert!(cc.k().is_none());
    }

    #[test]
    fn rejects_bad_constants() {
        assert!(CubicParams { c: 0.0, beta: 0.3 }.validate().is_err());
        assert!(CubicParams { c: 0.4, beta: 1.0 }.validate().is_err());
        assert!(CubicParams::default().validate().is_ok());
    }
}
