//! Agile-SD: loss-based congestion avoidance with an agility factor.
//!
//! After a loss the window is reduced by `beta1` (loss seen in slow start)
//! or `beta2` (loss seen in congestion avoidance). The congestion
//! avoidance increment is `lambda / cwnd` per ACK, where `lambda` scales
//! with how far the window still is from the point of the last loss. Far
//! from that point growth is up to `lambda_max` times faster than
//! NewReno; close to it growth falls back to NewReno's `1 / cwnd`.

use super::{CongestionControl, ControllerState, Phase, TimeoutThreshold, DEFAULT_INITIAL_CWND, MIN_CWND_AFTER_LOSS};
use crate::error::ConfigError;

/// How ssthresh is derived from the reduced window after a triple
/// duplicate ACK.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossThreshold {
    /// `ssthresh = cwnd - 1`, which keeps the flow out of slow start.
    #[default]
    BelowWindow,
    /// `ssthresh = cwnd`, the NewReno convention.
    AtWindow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgileParams {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Decrease factor for a loss detected in slow start.
    pub beta1: f64,
    /// Decrease factor for a loss detected in congestion avoidance.
    pub beta2: f64,
    pub initial_cwnd: u32,
    pub loss_threshold: LossThreshold,
}

impl Default for AgileParams {
    fn default() -> Self {
        Self {
            lambda_min: 1.0,
            lambda_max: 3.0,
            beta1: 0.90,
            beta2: 0.95,
            initial_cwnd: DEFAULT_INITIAL_CWND,
            loss_threshold: LossThreshold::BelowWindow,
        }
    }
}

impl AgileParams {
    /// The degenerate setting that turns Agile-SD into NewReno: no
    /// agility, halving on every loss and `ssthresh = cwnd`. It breaks the
    /// `beta1 < beta2` rule on purpose and therefore bypasses
    /// [`AgileParams::validate`].
    pub fn newreno_equivalent(initial_cwnd: u32) -> Self {
        Self {
            lambda_min: 1.0,
            lambda_max: 1.0,
            beta1: 0.5,
            beta2: 0.5,
            initial_cwnd,
            loss_threshold: LossThreshold::AtWindow,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lambda_min != 1.0 {
            return Err(ConfigError::invalid("lambda_min", self.lambda_min, "must be exactly 1"));
        }
        if !(self.lambda_max >= 1.0 && self.lambda_max.is_finite()) {
            return Err(ConfigError::invalid("lambda_max", self.lambda_max, "must be a finite value >= 1"));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return Err(ConfigError::invalid("beta1", self.beta1, "must lie in (0, 1)"));
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(ConfigError::invalid("beta2", self.beta2, "must lie in (0, 1)"));
        }
        if self.beta1 >= self.beta2 {
            return Err(ConfigError::invalid("beta1", self.beta1, "must be smaller than beta2"));
        }
        if self.initial_cwnd < 1 {
            return Err(ConfigError::invalid("initial_cwnd", self.initial_cwnd, "must be >= 1"));
        }
        Ok(())
    }
}

/// Window released by the last loss: `max(cwnd_loss - cwnd_degraded, 1)`.
pub fn gap_total(cwnd_loss: f64, cwnd_degraded: f64) -> f64 {
    (cwnd_loss - cwnd_degraded).max(1.0)
}

/// Remaining distance to the last loss point: `max(cwnd_loss - cwnd, 1)`.
pub fn gap_current(cwnd_loss: f64, cwnd: f64) -> f64 {
    (cwnd_loss - cwnd).max(1.0)
}

/// `max(lambda_max * gap_current / gap_total, lambda_min)`, capped at
/// `lambda_max` for the case `gap_current > gap_total`.
pub fn agility_factor(params: &AgileParams, gap_current: f64, gap_total: f64) -> f64 {
    (params.lambda_max * gap_current / gap_total)
        .max(params.lambda_min)
        .min(params.lambda_max)
}

/// Time to climb back to the loss point when cycle `i` lasts `rtt / lambda_i`.
///
/// With every factor at 1 this is the classic `k * rtt` epoch.
pub fn epoch_time(rtt: f64, lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|lambda| rtt / lambda).sum()
}

#[derive(Debug, Clone)]
pub struct AgileSd {
    params: AgileParams,
    state: ControllerState,
    timeout_threshold: TimeoutThreshold,
    last_lambda: Option<f64>,
}

impl AgileSd {
    pub fn new(params: AgileParams) -> Self {
        Self {
            params,
            state: ControllerState::initial(params.initial_cwnd),
            timeout_threshold: TimeoutThreshold::default(),
            last_lambda: None,
        }
    }

    pub fn with_timeout_threshold(mut self, rule: TimeoutThreshold) -> Self {
        self.timeout_threshold = rule;
        self
    }

    /// Start from an arbitrary state, e.g. to probe a single transition.
    pub fn from_state(params: AgileParams, state: ControllerState) -> Self {
        Self { state, ..Self::new(params) }
    }

    pub fn params(&self) -> &AgileParams {
        &self.params
    }

    /// Agility factor the next congestion-avoidance ACK would use. Before
    /// the first loss both gaps count as 1, so this is `lambda_max`.
    pub fn current_lambda(&self) -> f64 {
        let (current, total) = match (self.state.cwnd_loss, self.state.cwnd_degraded) {
            (Some(loss), Some(degraded)) => (gap_current(loss, self.state.cwnd), gap_total(loss, degraded)),
            _ => (1.0, 1.0),
        };
        agility_factor(&self.params, current, total)
    }
}

impl CongestionControl for AgileSd {
    fn name(&self) -> &'static str {
        "agile-sd"
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
            Phase::CongestionAvoidance => {
                let lambda = self.current_lambda();
                let st = &mut self.state;
                st.cwnd += lambda / st.cwnd;
                self.last_lambda = Some(lambda);
            }
        }
    }

    fn on_triple_dup_ack(&mut self, _now: f64) {
        let st = &mut self.state;
        st.cwnd_loss = Some(st.cwnd);
        let beta = if st.phase == Phase::SlowStart { self.params.beta1 } else { self.params.beta2 };
        st.cwnd = (st.cwnd * beta).max(MIN_CWND_AFTER_LOSS);
        st.ssthresh = match self.params.loss_threshold {
            LossThreshold::BelowWindow => st.cwnd - 1.0,
            LossThreshold::AtWindow => st.cwnd,
        };
        st.cwnd_degraded = Some(st.cwnd);
        st.phase = Phase::FastRecovery;
    }

    fn on_timeout(&mut self, _now: f64) {
        let st = &mut self.state;
        let before = st.cwnd;
        st.ssthresh = self.timeout_threshold.apply(before, st.ssthresh);
        st.cwnd = f64::from(self.params.initial_cwnd);
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

    fn agility(&self) -> Option<f64> {
        self.last_lambda
    }
}
