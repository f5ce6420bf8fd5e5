//! Traffic snapshots, views, sensors and transitions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod sensor;
mod snapshot;
mod transition;
mod view;

pub use sensor::{SensorConfig, SensorRule};
pub use snapshot::{CarState, SanityViolation, TrafficSnapshot};
pub use transition::{apply_evolution, apply_transition, move_view, Evolution, EvolutionStep, TransitionLabel};
pub(crate) use transition::apply_evolution_visible;
pub use view::{Extent, LaneInterval, Measure, View};

/// Lane index; lanes of a snapshot are `0..=max_lane`.
pub type Lane = u32;

/// Symbolic car identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CarId(pub String);

impl CarId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CarId {
    fn from(s: &str) -> Self {
        CarId(s.to_string())
    }
}

impl From<String> for CarId {
    fn from(s: String) -> Self {
        CarId(s)
    }
}

impl From<&CarId> for CarId {
    fn from(c: &CarId) -> Self {
        c.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown car `{0}`")]
    UnknownCar(CarId),
    #[error("guard of {label} failed: {reason}")]
    GuardFailed { label: String, reason: String },
    #[error("not a subinterval: {0}")]
    NotASubinterval(String),
    #[error("chop point {point} outside of {extent}")]
    ChopPointOutOfRange { point: String, extent: String },
    #[error("car `{car}` uses lane {lane} but the highest lane is {max_lane}")]
    LaneOutOfRange { car: CarId, lane: Lane, max_lane: Lane },
    #[error("a snapshot needs at least two lanes, highest lane given is {0}")]
    TooFewLanes(Lane),
    #[error("car `{0}` reserves two non-adjacent lanes")]
    NonAdjacentReservation(CarId),
    #[error("extent [{lo},{hi}] is not ordered")]
    BadExtent { lo: String, hi: String },
    #[error("lane interval [{lo}..{hi}] is not ordered")]
    BadLaneInterval { lo: Lane, hi: Lane },
    #[error("negative duration")]
    NegativeDuration,
    #[error("bad evolution: {0}")]
    BadEvolution(String),
    #[error("sensor lengths must be positive")]
    NonPositiveSensor,
    #[error("bad transition label `{0}`")]
    BadLabel(String),
}

/// The parts of a view that a car occupies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derived {
    pub res: BTreeSet<Lane>,
    pub clm: BTreeSet<Lane>,
    pub len: Option<Extent>,
}

/// `res_V`, `clm_V` and `len_V` of `car`; unlisted cars occupy nothing.
pub fn derived_functions(ts: &TrafficSnapshot, v: &View, sensors: &SensorConfig, car: &CarId) -> Derived {
    let Some(state) = ts.car(car) else {
        return Derived {
            res: BTreeSet::new(),
            clm: BTreeSet::new(),
            len: None,
        };
    };
    let lanes = v.lanes.to_set();
    let size = sensors.length(&v.owner, car, ts);
    let body = Extent::new(state.pos.clone(), &state.pos + size).expect("sensor lengths are positive");
    Derived {
        res: state.res.intersection(&lanes).copied().collect(),
        clm: state.clm.intersection(&lanes).copied().collect(),
        len: body.intersect(&v.extent),
    }
}

/// The highway situation used throughout the documentation.
pub mod fixtures {
    use std::collections::BTreeMap;

    use super::*;
    use crate::rational::{int, ratio};

    /// Four cars on lanes 1 to 3: A changes from lane 1 to 2, B drives on 1,
    /// C on 3, and E on 2 while claiming lane 1.
    pub fn sample_snapshot() -> TrafficSnapshot {
        let mut cars = BTreeMap::new();
        cars.insert(CarId::from("A"), CarState::new([1, 2], [], int(28), int(8), int(0)));
        cars.insert(CarId::from("B"), CarState::new([1], [], ratio(7, 2), int(14), int(0)));
        cars.insert(CarId::from("C"), CarState::new([3], [], int(2), int(4), int(0)));
        cars.insert(CarId::from("E"), CarState::new([2], [1], int(14), int(11), int(0)));
        TrafficSnapshot::new(3, cars).expect("fixture is well formed")
    }

    /// E's view on the two lower lanes.
    pub fn sample_view() -> View {
        View::new(
            LaneInterval::new(1, 2).unwrap(),
            Extent::from_ints(12, 42).unwrap(),
            "E",
        )
    }

    /// E perceives A, B, C and itself with lengths 10, 11.5, 7 and 13.
    pub fn sample_sensors() -> SensorConfig {
        [("A", int(10)), ("B", ratio(23, 2)), ("C", int(7)), ("E", int(13))]
            .into_iter()
            .try_fold(SensorConfig::default(), |cfg, (car, len)| cfg.with_entry("E", car, len))
            .expect("positive lengths")
    }
}
