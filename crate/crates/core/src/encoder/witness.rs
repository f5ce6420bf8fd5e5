use std::collections::BTreeMap;

use num_traits::Signed;

use super::{MachineError, RunTrace, TwoCounterMachine};
use crate::model::{CarId, CarState, Extent, LaneInterval, SensorConfig, TrafficSnapshot, View};
use crate::rational::{int, zero, Rational};
use crate::scenario::Scenario;

/// Where the counter cars go.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Layout {
    /// Counter `i` car `x` at `base + (2i - 1)k + (2x - 1)u`, inside the
    /// counter's own segment.
    #[default]
    Corrected,
    /// The printed offsets `base + 3k + (2x + 1)u` for counter one and the
    /// same pattern `2k` further for counter two. The last car of a maximal
    /// counter then overlaps the closing claim.
    Literal,
}

/// The model built from a run, observed by the unlisted car `E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub snapshot: TrafficSnapshot,
    pub view: View,
    pub sensors: SensorConfig,
}

impl Witness {
    pub fn scenario(&self) -> Scenario {
        Scenario {
            snapshot: self.snapshot.clone(),
            sensors: self.sensors.clone(),
            view: Some(self.view.clone()),
        }
    }
}

pub const OBSERVER: &str = "E";

/// Rear of marker or delimiter car `e` of configuration `d`.
pub fn marker_position(k: &Rational, d: usize, e: u32) -> Rational {
    let base = k * int(5 * d as i64);
    match e {
        0..=2 => base + k * int(e as i64) / int(3),
        4 => base + k * int(2),
        6 => base + k * int(4),
        _ => panic!("no marker or delimiter car {e}"),
    }
}

/// Size of a counter car when counters reach `max`.
pub fn counter_unit(k: &Rational, max: u64) -> Rational {
    k / int(1 + 2 * max as i64)
}

/// Rear of car `x` (from 1) of `counter` in configuration `d`.
pub fn counter_position(layout: Layout, k: &Rational, max: u64, d: usize, counter: u8, x: u64) -> Rational {
    let base = k * int(5 * d as i64);
    let u = counter_unit(k, max);
    let x = x as i64;
    match layout {
        Layout::Corrected => base + k * int(2 * counter as i64 - 1) + u * int(2 * x - 1),
        Layout::Literal => base + k * int(3 + 2 * (counter as i64 - 1)) + u * int(2 * x + 1),
    }
}

fn car(res: u32, clm: Option<u32>, pos: Rational) -> CarState {
    CarState::new([res], clm, pos, zero(), zero())
}

fn build(m: &TwoCounterMachine, trace: &RunTrace, k: &Rational, layout: Layout) -> Result<Witness, MachineError> {
    if !k.is_positive() {
        return Err(MachineError::BadK);
    }
    let lanes = m.lanes();
    let max = trace.max_counter();
    let unit = counter_unit(k, max);
    let third = k / int(3);
    let mut cars = BTreeMap::new();
    let mut sizes = vec![];
    for (d, conf) in trace.configs.iter().enumerate() {
        let i = lanes[&conf.state];
        for e in 0..3u32 {
            let clm = (e != 1).then_some(i);
            let res = if e == 1 { i } else { i + 1 };
            let id = CarId(format!("C_{d}_{e}"));
            cars.insert(id.clone(), car(res, clm, marker_position(k, d, e)));
            sizes.push((id, third.clone()));
        }
        for e in [4, 6] {
            let id = CarId(format!("C_{d}_{e}"));
            cars.insert(id.clone(), car(i + 1, Some(i), marker_position(k, d, e)));
            sizes.push((id, k.clone()));
        }
        for counter in [1u8, 2] {
            let tag = if counter == 1 { 3 } else { 5 };
            for x in 1..=conf.counter(counter) {
                let id = CarId(format!("C_{d}_{tag}_{x}"));
                cars.insert(id.clone(), car(i, None, counter_position(layout, k, max, d, counter, x)));
                sizes.push((id, unit.clone()));
            }
        }
    }
    let max_lane = m.states.len() as u32;
    let snapshot = TrafficSnapshot::new(max_lane, cars).expect("witness cars hold one lane each");
    let sensors = sizes
        .into_iter()
        .try_fold(SensorConfig::default(), |cfg, (id, len)| cfg.with_entry(OBSERVER, id, len))
        .expect("positive sizes");
    let length = k * int(5 * trace.configs.len() as i64);
    let view = View::new(
        LaneInterval::new(0, max_lane).expect("ordered lanes"),
        Extent::new(zero(), length).expect("positive length"),
        OBSERVER,
    );
    Ok(Witness {
        snapshot,
        view,
        sensors,
    })
}

/// The model of a halting run.
pub fn build_witness_model(
    m: &TwoCounterMachine,
    trace: &RunTrace,
    k: &Rational,
    layout: Layout,
) -> Result<Witness, MachineError> {
    if trace.last().state != m.final_state {
        return Err(MachineError::NotHalting);
    }
    build(m, trace, k, layout)
}

/// The same construction over the first `max_steps` steps of any run.
pub fn build_bounded_witness(
    m: &TwoCounterMachine,
    max_steps: usize,
    k: &Rational,
) -> Result<(RunTrace, Witness), MachineError> {
    let trace = m.simulate(max_steps)?;
    let w = build(m, &trace, k, Layout::Corrected)?;
    Ok((trace, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::run_machine;
    use crate::model::Measure;
    use crate::encoder::tests::{one_inc, self_loop};

    #[test]
    fn positions() {
        let k = int(3);
        assert_eq!(marker_position(&k, 0, 1), int(1));
        assert_eq!(marker_position(&k, 1, 6), int(27));
        assert_eq!(counter_position(Layout::Literal, &k, 1, 1, 1, 1), int(27));
        assert_eq!(counter_position(Layout::Corrected, &k, 1, 1, 1, 1), int(19));
    }

    #[test]
    fn one_increment() {
        let t = run_machine(&one_inc(), 5).unwrap();
        let w = build_witness_model(&one_inc(), &t, &int(3), Layout::Corrected).unwrap();
        assert!(w.snapshot.is_sane());
        assert_eq!(w.snapshot.cars().len(), 11);
        assert_eq!(w.view.extent.measure(), int(30));
        let c = w.snapshot.car(&"C_1_3_1".into()).unwrap();
        assert_eq!(c.pos, int(19));
        assert_eq!(c.res.iter().copied().collect::<Vec<_>>(), vec![1]);
        let first = run_machine(&one_inc(), 0);
        assert!(first.is_err());
        let t0 = one_inc().simulate(0).unwrap();
        assert_eq!(build_witness_model(&one_inc(), &t0, &int(3), Layout::Corrected), Err(MachineError::NotHalting));
    }

    #[test]
    fn bounded_runs() {
        let (t, w) = build_bounded_witness(&self_loop(), 4, &int(3)).unwrap();
        assert_eq!(t.configs.len(), 5);
        assert!(w.snapshot.is_sane());
    }

    #[test]
    fn mutex_depends_on_the_layout() {
        use crate::semantics::{eval, EvalOptions, Valuation};
        let t = run_machine(&one_inc(), 5).unwrap();
        let f = crate::encoder::formula::mutex();
        let nu = Valuation::new(OBSERVER);
        let opts = EvalOptions::default();
        let good = build_witness_model(&one_inc(), &t, &int(3), Layout::Corrected).unwrap();
        let v = eval(&good.snapshot, &good.view, &nu, &f, &good.sensors, &opts).unwrap();
        assert!(v.value && v.complete);
        let bad = build_witness_model(&one_inc(), &t, &int(3), Layout::Literal).unwrap();
        let v = eval(&bad.snapshot, &bad.view, &nu, &f, &bad.sensors, &opts).unwrap();
        assert!(!v.value && v.complete);
    }
}
