use crate::MetricsError;

/// Jain's fairness index `(sum x)^2 / (n * sum x^2)`.
pub fn jain_fairness(throughputs: &[f64]) -> Result<f64, MetricsError> {
    if throughputs.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    if let Some(&bad) = throughputs.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(MetricsError::InvalidSample(bad));
    }
    let sum: f64 = throughputs.iter().sum();
    let sum_sq: f64 = throughputs.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Err(MetricsError::AllZero);
    }
    Ok(sum * sum / (throughputs.len() as f64 * sum_sq))
}

/// Bits per second over `active_time` seconds.
pub fn average_throughput(delivered_bytes: u64, active_time: f64) -> Result<f64, MetricsError> {
    if !(active_time > 0.0) {
        return Err(MetricsError::ZeroActiveTime);
    }
    Ok(delivered_bytes as f64 * 8.0 / active_time)
}

/// Fraction of sent packets that were dropped, by queues or corruption.
pub fn loss_ratio(dropped: u64, sent: u64) -> Result<f64, MetricsError> {
    if sent == 0 {
        return Err(MetricsError::NothingSent);
    }
    Ok(dropped as f64 / sent as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fairness_examples() {
        assert_eq!(jain_fairness(&[7.5, 7.5, 7.5]).unwrap(), 1.0);
        assert_eq!(jain_fairness(&[1.0, 0.0]).unwrap(), 0.5);
        // (8)^2 / (3 * 24)
        assert!((jain_fairness(&[4.0, 2.0, 2.0]).unwrap() - 64.0 / 72.0).abs() < 1e-12);
    }

    #[test]
    fn fairness_errors() {
        assert_eq!(jain_fairness(&[]), Err(MetricsError::EmptySample));
        assert_eq!(jain_fairness(&[0.0, 0.0]), Err(MetricsError::AllZero));
        assert!(matches!(jain_fairness(&[1.0, -1.0]), Err(MetricsError::InvalidSample(_))));
    }

    #[test]
    fn throughput_examples() {
        assert_eq!(average_throughput(12_500_000_000, 100.0).unwrap(), 1e9);
        assert_eq!(average_throughput(0, 100.0).unwrap(), 0.0);
        assert_eq!(average_throughput(6_250_000_000, 100.0).unwrap(), 5e8);
        assert_eq!(average_throughput(1, 0.0), Err(MetricsError::ZeroActiveTime));
    }

    #[test]
    fn loss_ratio_examples() {
        assert_eq!(loss_ratio(0, 1_000_000).unwrap(), 0.0);
        assert_eq!(loss_ratio(5000, 1_000_000).unwrap(), 0.005);
        assert_eq!(loss_ratio(1, 1).unwrap(), 1.0);
        assert_eq!(loss_ratio(0, 0), Err(MetricsError::NothingSent));
    }

    proptest! {
        #[test]
        fn fairness_is_scale_invariant(xs in prop::collection::vec(0.0f64..1e9, 1..16), k in 1e-3f64..1e3) {
            prop_assume!(xs.iter().any(|&x| x > 0.0));
            let scaled: Vec<f64> = xs.iter().map(|x| x * k).collect();
            let a = jain_fairness(&xs).unwrap();
            let b = jain_fairness(&scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn fairness_lower_bound(xs in prop::collection::vec(0.0f64..1e9, 1..16)) {
            prop_assume!(xs.iter().any(|&x| x > 0.0));
            let n = xs.len() as f64;
            let j = jain_fairness(&xs).unwrap();
            prop_assert!(j >= 1.0 / n - 1e-12 && j <= 1.0 + 1e-12);
            let nonzero = xs.iter().filter(|&&x| x > 0.0).count();
            if nonzero == 1 {
                prop_assert!((j - 1.0 / n).abs() < 1e-12);
            }
        }

        #[test]
        fn single_nonzero_flow_hits_the_floor(n in 1usize..20, idx in 0usize..20, x in 1e-3f64..1e9) {
            let idx = idx % n;
            let mut xs = vec![0.0; n];
            xs[idx] = x;
            prop_assert!((jain_fairness(&xs).unwrap() - 1.0 / n as f64).abs() < 1e-12);
        }
    }
}
