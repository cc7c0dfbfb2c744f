//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion reports one PASS/FAIL line even when an earlier one fails;
//! the process exits non-zero if any criterion fails.
//!
//! Criteria 5, 6 and 7 simulate 100 s at 1 Gbps and take several minutes.

use std::process::ExitCode;
use std::time::Instant;

use agile_sim::cca::*;
use agile_sim::experiments::*;
use agile_sim::netsim::{maybe_corrupt, Corruption, Packet, SimTime, TraceMode, DEFAULT_PAYLOAD_BYTES};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, n: u32, name: &str, f: impl FnOnce() -> Outcome) {
        let started = Instant::now();
        let outcome = f();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} [{name}]: PASS ({detail}; {secs:.1}s)"),
            Err(detail) => {
                self.failed += 1;
                println!("criterion {n} [{name}]: FAIL ({detail}; {secs:.1}s)");
            }
        }
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(x: f64, reference: f64) -> f64 {
    ((x - reference) / reference).abs()
}

fn epoch_model() -> Outcome {
    let agile = epoch_time(0.020, &[4.0, 3.0, 2.0, 1.0]);
    let plain = epoch_time(0.020, &[1.0; 4]);
    // 20 ms * (1/4 + 1/3 + 1/2 + 1) = 20 ms * 25/12
    ensure(rel_err(agile, 0.020 * 25.0 / 12.0) <= 1e-9, || format!("agile epoch {agile}"))?;
    ensure(rel_err(plain, 0.080) <= 1e-9, || format!("standard epoch {plain}"))?;
    let shrink = 1.0 - agile / plain;
    ensure((shrink - 0.48).abs() <= 0.01, || format!("shrink {shrink}"))?;
    Ok(format!("{:.3} ms vs {:.3} ms, shrunk by {:.2}%", agile * 1e3, plain * 1e3, shrink * 100.0))
}

/// Mostly ACKs with occasional losses, recovery exits and timeouts.
fn synthetic_log(n: usize, seed: u64) -> Vec<ControllerEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut now = 0.0;
    let mut in_recovery = false;
    (0..n)
        .map(|_| {
            now += rng.gen_range(0.0..1e-3);
            let roll: f64 = rng.gen();
            if in_recovery && roll < 0.05 {
                in_recovery = false;
                ControllerEvent::recovery_exit(now)
            } else if roll < 0.002 {
                in_recovery = true;
                ControllerEvent::triple_dup(now)
            } else if roll < 0.0025 {
                in_recovery = false;
                ControllerEvent::timeout(now)
            } else {
                ControllerEvent::ack(now)
            }
        })
        .collect()
}

fn newreno_equivalence() -> Outcome {
    let log = synthetic_log(100_000, 2016);
    let mut agile = AgileSd::new(AgileParams::newreno_equivalent(DEFAULT_INITIAL_CWND));
    let mut reno = NewReno::new(DEFAULT_INITIAL_CWND);
    let mut worst = 0.0f64;
    let mut losses = 0;
    for (i, ev) in log.iter().enumerate() {
        agile.apply(ev);
        reno.apply(ev);
        losses += usize::from(matches!(ev.kind, EventKind::TripleDupAck));
        let (a, r) = (agile.state(), reno.state());
        let diff = (a.cwnd - r.cwnd).abs();
        worst = worst.max(diff);
        let same = diff <= 1e-12 && a.ssthresh == r.ssthresh && a.phase == r.phase;
        ensure(same, || format!("diverged at event {i}: {a:?} vs {r:?}"))?;
    }
    ensure(losses > 50, || format!("log only had {losses} losses"))?;
    Ok(format!("{} events, {losses} losses, max deviation {worst:e}", log.len()))
}

fn ca_state() -> impl Strategy<Value = ControllerState> {
    (2.0f64..1e5, 0.5f64..1.0, 0.0f64..1.2).prop_map(|(loss, beta, progress)| {
        let degraded = (loss * beta).max(2.0);
        let cwnd = degraded + (loss - degraded) * progress;
        ControllerState {
            cwnd: cwnd.max(2.0),
            ssthresh: degraded - 1.0,
            cwnd_loss: Some(loss),
            cwnd_degraded: Some(degraded),
            phase: Phase::CongestionAvoidance,
        }
    })
}

fn per_step_bounds() -> Outcome {
    let params = AgileParams::default();
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 10_000, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let strategy = (ca_state(), prop::collection::vec(0u8..100, 1..200));
    let steps = std::cell::Cell::new(0u64);
    runner
        .run(&strategy, |(state, stream)| {
            let mut cc = AgileSd::from_state(params, state);
            for roll in stream {
                if roll < 2 {
                    cc.on_triple_dup_ack(0.0);
                    cc.on_recovery_exit(0.0);
                    continue;
                }
                if cc.phase() != Phase::CongestionAvoidance {
                    cc.on_ack(1, 0.0);
                    continue;
                }
                let before = cc.cwnd();
                let lambda = cc.current_lambda();
                cc.on_ack(1, 0.0);
                let delta = cc.cwnd() - before;
                // the observed increment is rounded once when added to cwnd
                let slack = before * f64::EPSILON;
                prop_assert!((params.lambda_min..=params.lambda_max).contains(&lambda), "lambda {}", lambda);
                prop_assert_eq!(cc.agility(), Some(lambda));
                prop_assert!(delta >= params.lambda_min / before - slack, "{} at cwnd {}", delta, before);
                prop_assert!(delta <= params.lambda_max / before + slack, "{} at cwnd {}", delta, before);
                steps.set(steps.get() + 1);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("10000 streams, {} congestion-avoidance steps", steps.get()))
}

fn loss_postconditions() -> Outcome {
    let params = AgileParams::default();
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 10_000, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let state = (
        3.0f64..1e5,
        prop::option::of(1.0f64..1e5),
        prop::option::of(1.0f64..1e5),
        prop::bool::ANY,
        1.0f64..1e5,
    )
        .prop_map(|(cwnd, loss, degraded, slow_start, ssthresh)| ControllerState {
            cwnd,
            ssthresh,
            cwnd_loss: loss,
            cwnd_degraded: degraded,
            phase: if slow_start { Phase::SlowStart } else { Phase::CongestionAvoidance },
        });
    runner
        .run(&state, |st| {
            let mut cc = AgileSd::from_state(params, st);
            cc.on_triple_dup_ack(0.0);
            let after = cc.state();
            let beta = if st.phase == Phase::SlowStart { 0.90 } else { 0.95 };
            prop_assert_eq!(after.cwnd, st.cwnd * beta);
            prop_assert_eq!(after.ssthresh, after.cwnd - 1.0);
            prop_assert_eq!(after.cwnd_loss, Some(st.cwnd));
            prop_assert_eq!(after.cwnd_degraded, Some(after.cwnd));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("10000 random states".to_string())
}

/// Runs a scenario, checking conservation on the way.
fn simulate(spec: &ScenarioSpec, conservation: &mut (usize, Vec<String>)) -> Result<ScenarioRun, String> {
    let run = run_scenario(spec).map_err(|e| e.to_string())?;
    conservation.0 += 1;
    for f in run.result.flows.iter().filter(|f| !f.conserved()) {
        conservation.1.push(format!("{} buffer {} per {}: {f:?}", spec.kind, spec.buffer, spec.per));
    }
    Ok(run)
}

fn full_sweep(conservation: &mut (usize, Vec<String>)) -> Result<Vec<MetricsReport>, String> {
    let base = ScenarioSpec::default();
    let points = sweep_points(&base, &[5, 25, 100, 250, 500], &[0.0, 1e-5, 1e-4], &CcaKind::ALL);
    points.iter().map(|p| simulate(&point_spec(&base, p), conservation).map(|r| r.report)).collect()
}

fn find<'a>(reports: &'a [MetricsReport], cca: CcaKind, buffer: usize, per: f64) -> &'a MetricsReport {
    reports
        .iter()
        .find(|r| r.flows[0].cca == cca && r.buffer == buffer && r.per == per)
        .expect("point is part of the sweep")
}

fn single_flow_utilization(reports: &[MetricsReport]) -> Outcome {
    let large = find(reports, CcaKind::AgileSd, 500, 0.0).utilization;
    let agile = find(reports, CcaKind::AgileSd, 5, 0.0).utilization;
    let cubic = find(reports, CcaKind::Cubic, 5, 0.0).utilization;
    let detail = format!(
        "buffer 500: agile-sd {:.2}%; buffer 5: agile-sd {:.2}% vs cubic {:.2}%",
        large * 100.0,
        agile * 100.0,
        cubic * 100.0
    );
    ensure(large >= 0.90 && agile >= cubic - 0.05, || detail.clone())?;
    Ok(detail)
}

fn loss_ceiling(reports: &[MetricsReport]) -> Outcome {
    let worst = reports
        .iter()
        .max_by(|a, b| a.loss_ratio.total_cmp(&b.loss_ratio))
        .ok_or_else(|| "no runs".to_string())?;
    let detail = format!(
        "{} runs, worst {:.4}% ({} buffer {} per {})",
        reports.len(),
        worst.loss_ratio * 100.0,
        worst.flows[0].cca,
        worst.buffer,
        worst.per
    );
    ensure(reports.len() == 45 && worst.loss_ratio < 0.01, || detail.clone())?;
    Ok(detail)
}

fn fairness(conservation: &mut (usize, Vec<String>)) -> Outcome {
    let unit = |xs: &[f64], expected: f64| -> Result<(), String> {
        let j = jain_fairness(xs).map_err(|e| e.to_string())?;
        ensure((j - expected).abs() <= 1e-12, || format!("jain({xs:?}) = {j}"))
    };
    unit(&[3.5, 3.5, 3.5], 1.0)?;
    unit(&[1.0, 0.0], 0.5)?;
    unit(&[4.0, 2.0, 2.0], 8.0 / 9.0)?;
    let spec = ScenarioSpec { kind: ScenarioKind::SynchronousMulti, n_flows: 5, ..ScenarioSpec::default() };
    let run = simulate(&spec, conservation)?;
    let shares: Vec<String> = run.report.flows.iter().map(|f| format!("{:.0}", f.throughput_bps / 1e6)).collect();
    let detail = format!("5 synchronous agile-sd flows: JFI {:.4}, Mbps [{}]", run.report.jfi, shares.join(", "));
    ensure(run.report.jfi >= 0.85, || detail.clone())?;
    Ok(detail)
}

fn determinism(conservation: &mut (usize, Vec<String>)) -> Outcome {
    let spec = ScenarioSpec {
        kind: ScenarioKind::SequentialMulti,
        ccas: vec![CcaKind::AgileSd, CcaKind::Cubic, CcaKind::NewReno, CcaKind::AgileSd, CcaKind::Cubic],
        buffer: 25,
        per: 1e-4,
        bandwidth_bps: 100_000_000,
        duration: 10.0,
        seed: 99,
        trace: TraceMode::Sampled(SimTime::from_millis(10)),
        ..ScenarioSpec::default()
    };
    let artifacts = |conservation: &mut (usize, Vec<String>)| -> Result<(Vec<u8>, Vec<u8>), String> {
        let run = simulate(&spec, conservation)?;
        let mut metrics = Vec::new();
        let mut trace = Vec::new();
        write_metrics_csv(&mut metrics, std::slice::from_ref(&run.report)).map_err(|e| e.to_string())?;
        agile_sim::netsim::write_trace_csv(&mut trace, &run.result.trace).map_err(|e| e.to_string())?;
        Ok((metrics, trace))
    };
    let first = artifacts(conservation)?;
    let second = artifacts(conservation)?;
    ensure(first == second, || "repeated run produced different CSV bytes".to_string())?;
    let (runs, broken) = conservation;
    ensure(broken.is_empty(), || format!("conservation broken: {}", broken.join("; ")))?;
    Ok(format!(
        "conservation exact on {runs} runs; metrics ({} B) and trace ({} B) CSVs byte-identical",
        first.0.len(),
        first.1.len()
    ))
}

fn binomial_errors() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ScenarioSpec::default().seed);
    let pkt = Packet::data(0, 0, DEFAULT_PAYLOAD_BYTES, SimTime::ZERO);
    let drops =
        (0..1_000_000).filter(|_| matches!(maybe_corrupt(pkt, 1e-4, &mut rng), Corruption::Dropped(_))).count();
    let detail = format!("{drops} drops in 10^6 packets");
    ensure((70..=130).contains(&drops), || detail.clone())?;
    Ok(detail)
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };
    let mut conservation = (0usize, Vec::new());
    report.check(1, "epoch-time model", epoch_model);
    report.check(2, "NewReno oracle equivalence", newreno_equivalence);
    report.check(3, "per-step bounds", per_step_bounds);
    report.check(4, "loss-reaction postconditions", loss_postconditions);
    report.check(9, "binomial PER", binomial_errors);
    let started = Instant::now();
    let sweep = full_sweep(&mut conservation);
    println!("(full-scale sweep: {:.0}s)", started.elapsed().as_secs_f64());
    match &sweep {
        Ok(reports) => {
            report.check(5, "single-flow utilization", || single_flow_utilization(reports));
            report.check(6, "loss-ratio ceiling", || loss_ceiling(reports));
        }
        Err(e) => {
            report.check(5, "single-flow utilization", || Err(e.clone()));
            report.check(6, "loss-ratio ceiling", || Err(e.clone()));
        }
    }
    report.check(7, "fairness", || fairness(&mut conservation));
    report.check(8, "conservation and determinism", || determinism(&mut conservation));
    if report.failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", report.failed);
        ExitCode::FAILURE
    }
}
