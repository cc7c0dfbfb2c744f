use std::sync::Mutex;
use std::thread;

use super::scenario::{run_scenario, MetricsReport, ScenarioKind, ScenarioSpec};
use crate::cca::CcaKind;
use crate::Error;

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub buffer: usize,
    pub per: f64,
    /// The algorithms of the run: one entry for homogeneous runs, the
    /// whole pairing for inter-fairness.
    pub ccas: Vec<CcaKind>,
}

/// Seed for one sweep point, a function of the point's parameters only so
/// that reordering the sweep leaves every row unchanged.
pub fn derive_seed(master: u64, point: &SweepPoint) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ point.buffer as u64);
    h = splitmix64(h ^ point.per.to_bits());
    for cca in &point.ccas {
        h = splitmix64(h ^ (*cca as u64 + 1));
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Cartesian product of `buffers x pers x ccas`, in that nesting order.
///
/// Inter-fairness bases treat `ccas` as a single pairing rather than a
/// dimension.
pub fn sweep_points(base: &ScenarioSpec, buffers: &[usize], pers: &[f64], ccas: &[CcaKind]) -> Vec<SweepPoint> {
    let groups: Vec<Vec<CcaKind>> = if base.kind == ScenarioKind::InterFairness {
        vec![ccas.to_vec()]
    } else {
        ccas.iter().map(|&c| vec![c]).collect()
    };
    let mut points = Vec::with_capacity(buffers.len() * pers.len() * groups.len());
    for &buffer in buffers {
        for &per in pers {
            for group in &groups {
                points.push(SweepPoint { buffer, per, ccas: group.clone() });
            }
        }
    }
    points
}

pub fn point_spec(base: &ScenarioSpec, point: &SweepPoint) -> ScenarioSpec {
    ScenarioSpec {
        buffer: point.buffer,
        per: point.per,
        ccas: point.ccas.clone(),
        seed: derive_seed(base.seed, point),
        ..base.clone()
    }
}

/// Runs every point, `workers` at a time, and returns reports in point order.
pub fn run_points(base: &ScenarioSpec, points: &[SweepPoint], workers: usize) -> Result<Vec<MetricsReport>, Error> {
    let workers = workers.clamp(1, points.len().max(1));
    let next = Mutex::new(0usize);
    let slots: Vec<Mutex<Option<Result<MetricsReport, Error>>>> = points.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = {
                    let mut n = next.lock().expect("sweep index lock");
                    let i = *n;
                    *n += 1;
                    i
                };
                let Some(point) = points.get(i) else { break };
                let outcome = run_scenario(&point_spec(base, point)).map(|run| run.report);
                *slots[i].lock().expect("sweep slot lock") = Some(outcome);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("sweep slot lock").expect("every point ran"))
        .collect()
}

/// Runs the full grid with as many workers as the machine offers.
pub fn sweep(base: &ScenarioSpec, buffers: &[usize], pers: &[f64], ccas: &[CcaKind]) -> Result<Vec<MetricsReport>, Error> {
    let points = sweep_points(base, buffers, pers, ccas);
    let workers = thread::available_parallelism().map_or(1, |n| n.get());
    run_points(base, &points, workers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let base = ScenarioSpec::default();
        let points = sweep_points(&base, &[5, 25, 100, 250, 500], &[0.0, 1e-5, 1e-4], &CcaKind::ALL);
        assert_eq!(points.len(), 45);
        assert_eq!(points[0], SweepPoint { buffer: 5, per: 0.0, ccas: vec![CcaKind::AgileSd] });
        let inter = ScenarioSpec { kind: ScenarioKind::InterFairness, ..base };
        let points = sweep_points(&inter, &[5, 500], &[0.0], &[CcaKind::AgileSd, CcaKind::Cubic]);
        assert_eq!(points.len(), 2);
        assert_eq!(points[1].ccas.len(), 2);
    }

    #[test]
    fn seeds_depend_on_parameters_only() {
        let a = SweepPoint { buffer: 5, per: 1e-4, ccas: vec![CcaKind::Cubic] };
        let b = SweepPoint { buffer: 25, ..a.clone() };
        let c = SweepPoint { ccas: vec![CcaKind::AgileSd], ..a.clone() };
        assert_eq!(derive_seed(7, &a), derive_seed(7, &a.clone()));
        assert_ne!(derive_seed(7, &a), derive_seed(7, &b));
        assert_ne!(derive_seed(7, &a), derive_seed(7, &c));
        assert_ne!(derive_seed(7, &a), derive_seed(8, &a));
    }

    #[test]
    fn single_point_sweep() {
        let base = ScenarioSpec { duration: 0.5, bandwidth_bps: 50_000_000, ..ScenarioSpec::default() };
        let rows = sweep(&base, &[20], &[0.0], &[CcaKind::NewReno]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].buffer, 20);
    }
}
