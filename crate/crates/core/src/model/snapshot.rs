use std::collections::{BTreeMap, BTreeSet};

use super::{CarId, Lane, ModelError};
use crate::rational::Rational;

/// Reservations, claims and kinematics of one car.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CarState {
    pub res: BTreeSet<Lane>,
    pub clm: BTreeSet<Lane>,
    pub pos: Rational,
    pub spd: Rational,
    pub acc: Rational,
}

impl CarState {
    pub fn new(res: impl IntoIterator<Item = Lane>, clm: impl IntoIterator<Item = Lane>, pos: Rational, spd: Rational, acc: Rational) -> Self {
        CarState {
            res: res.into_iter().collect(),
            clm: clm.into_iter().collect(),
            pos,
            spd,
            acc,
        }
    }
}

/// Global state of the highway at one instant.
///
/// Lanes are `0..=max_lane`. Only finitely many cars are listed; every other
/// identifier is treated as a car outside of every view.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TrafficSnapshot {
    max_lane: Lane,
    cars: BTreeMap<CarId, CarState>,
}

/// One failed sanity condition for one car.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SanityViolation {
    pub car: CarId,
    /// Index of the failed condition, 1 to 5.
    pub condition: u8,
    pub message: String,
}

impl TrafficSnapshot {
    /// Structural constructor: at least two lanes, lane indices in range and
    /// double reservations on adjacent lanes only.
    pub fn new(max_lane: Lane, cars: BTreeMap<CarId, CarState>) -> Result<Self, ModelError> {
        let ts = Self::new_permissive(max_lane, cars)?;
        for (id, car) in &ts.cars {
            if car.res.len() == 2 {
                let lo = *car.res.first().unwrap();
                let hi = *car.res.last().unwrap();
                if hi != lo + 1 {
                    return Err(ModelError::NonAdjacentReservation(id.clone()));
                }
            }
        }
        Ok(ts)
    }

    /// Like [`TrafficSnapshot::new`] but admits double reservations on
    /// non-adjacent lanes.
    pub fn new_permissive(max_lane: Lane, cars: BTreeMap<CarId, CarState>) -> Result<Self, ModelError> {
        if max_lane < 1 {
            return Err(ModelError::TooFewLanes(max_lane));
        }
        for (id, car) in &cars {
            if let Some(&lane) = car.res.iter().chain(&car.clm).find(|&&l| l > max_lane) {
                return Err(ModelError::LaneOutOfRange {
                    car: id.clone(),
                    lane,
                    max_lane,
                });
            }
        }
        Ok(TrafficSnapshot { max_lane, cars })
    }

    pub fn max_lane(&self) -> Lane {
        self.max_lane
    }

    pub fn lanes(&self) -> impl Iterator<Item = Lane> {
        0..=self.max_lane
    }

    pub fn cars(&self) -> &BTreeMap<CarId, CarState> {
        &self.cars
    }

    pub fn car(&self, id: &CarId) -> Option<&CarState> {
        self.cars.get(id)
    }

    pub(crate) fn car_or_err(&self, id: &CarId) -> Result<&CarState, ModelError> {
        self.cars.get(id).ok_or_else(|| ModelError::UnknownCar(id.clone()))
    }

    pub(crate) fn with_car(&self, id: &CarId, car: CarState) -> TrafficSnapshot {
        let mut next = self.clone();
        next.cars.insert(id.clone(), car);
        next
    }

    pub(crate) fn cars_mut(&mut self) -> impl Iterator<Item = &mut CarState> {
        self.cars.values_mut()
    }

    /// Conditions 1 to 5 of the snapshot sanity rules, checked per car.
    /// The finiteness condition holds for every finite car map.
    pub fn check_sanity(&self) -> Vec<SanityViolation> {
        let mut out = Vec::new();
        for (id, car) in &self.cars {
            let mut fail = |condition: u8, message: String| {
                out.push(SanityViolation {
                    car: id.clone(),
                    condition,
                    message,
                })
            };
            let (nr, nc) = (car.res.len(), car.clm.len());
            if !car.res.is_disjoint(&car.clm) {
                fail(1, "reservation and claim overlap".into());
            }
            if !(1..=2).contains(&nr) {
                fail(2, format!("{nr} reservations"));
            }
            if nc > 1 {
                fail(3, format!("{nc} claims"));
            }
            if !(1..=2).contains(&(nr + nc)) {
                fail(4, format!("{} reserved or claimed lanes", nr + nc));
            }
            if nc > 0 {
                let union: BTreeSet<Lane> = car.res.union(&car.clm).copied().collect();
                let adjacent = union.len() == 2 && union.last().unwrap() - union.first().unwrap() == 1;
                if !adjacent {
                    fail(5, "claim is not adjacent to the reservation".into());
                }
            }
        }
        out
    }

    pub fn is_sane(&self) -> bool {
        self.check_sanity().is_empty()
    }
}
