use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};

use super::{CarId, Lane, ModelError, TrafficSnapshot, View};
use crate::rational::{self, Rational};

/// The six kinds of snapshot change.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TransitionLabel {
    Claim { car: CarId, lane: Lane },
    WithdrawClaim { car: CarId },
    Reserve { car: CarId },
    WithdrawReserve { car: CarId, lane: Lane },
    Time(Rational),
    SetAcc { car: CarId, acc: Rational },
}

impl TransitionLabel {
    pub fn car(&self) -> Option<&CarId> {
        match self {
            TransitionLabel::Claim { car, .. }
            | TransitionLabel::WithdrawClaim { car }
            | TransitionLabel::Reserve { car }
            | TransitionLabel::WithdrawReserve { car, .. }
            | TransitionLabel::SetAcc { car, .. } => Some(car),
            TransitionLabel::Time(_) => None,
        }
    }
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Claim { car, lane } => write!(f, "c({car},{lane})"),
            TransitionLabel::WithdrawClaim { car } => write!(f, "wd_c({car})"),
            TransitionLabel::Reserve { car } => write!(f, "r({car})"),
            TransitionLabel::WithdrawReserve { car, lane } => write!(f, "wd_r({car},{lane})"),
            TransitionLabel::Time(t) => write!(f, "t({})", rational::Show(t)),
            TransitionLabel::SetAcc { car, acc } => write!(f, "acc({car},{})", rational::Show(acc)),
        }
    }
}

impl FromStr for TransitionLabel {
    type Err = ModelError;

    /// `c(E,1)`, `wd_c(E)`, `r(E)`, `wd_r(E,1)`, `t(2)`, `acc(E,-1/2)`.
    fn from_str(s: &str) -> Result<Self, ModelError> {
        let bad = || ModelError::BadLabel(s.to_string());
        let s = s.trim();
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let car = |i: usize| -> Result<CarId, ModelError> {
            args.get(i).filter(|a| !a.is_empty()).map(|a| CarId::from(*a)).ok_or_else(bad)
        };
        let lane = |i: usize| -> Result<Lane, ModelError> { args.get(i).and_then(|a| a.parse().ok()).ok_or_else(bad) };
        let num = |i: usize| -> Result<Rational, ModelError> {
            args.get(i).and_then(|a| rational::parse(a).ok()).ok_or_else(bad)
        };
        let label = match (head.trim(), args.len()) {
            ("c", 2) => TransitionLabel::Claim { car: car(0)?, lane: lane(1)? },
            ("wd_c", 1) => TransitionLabel::WithdrawClaim { car: car(0)? },
            ("r", 1) => TransitionLabel::Reserve { car: car(0)? },
            ("wd_r", 2) => TransitionLabel::WithdrawReserve { car: car(0)?, lane: lane(1)? },
            ("t", 1) => TransitionLabel::Time(num(0)?),
            ("acc", 2) => TransitionLabel::SetAcc { car: car(0)?, acc: num(1)? },
            _ => return Err(bad()),
        };
        Ok(label)
    }
}

/// One step of an evolution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EvolutionStep {
    Time(Rational),
    SetAcc { car: CarId, acc: Rational },
}

impl EvolutionStep {
    pub fn to_label(&self) -> TransitionLabel {
        match self {
            EvolutionStep::Time(t) => TransitionLabel::Time(t.clone()),
            EvolutionStep::SetAcc { car, acc } => TransitionLabel::SetAcc {
                car: car.clone(),
                acc: acc.clone(),
            },
        }
    }
}

/// A sequence of time passages and acceleration changes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Evolution {
    steps: Vec<EvolutionStep>,
}

impl Evolution {
    /// At least one time step; all durations non-negative.
    pub fn new(steps: Vec<EvolutionStep>) -> Result<Self, ModelError> {
        if !steps.iter().any(|s| matches!(s, EvolutionStep::Time(_))) {
            return Err(ModelError::BadEvolution("no time step".into()));
        }
        if steps.iter().any(|s| matches!(s, EvolutionStep::Time(t) if t.is_negative())) {
            return Err(ModelError::NegativeDuration);
        }
        Ok(Evolution { steps })
    }

    pub fn wait(t: Rational) -> Result<Self, ModelError> {
        Evolution::new(vec![EvolutionStep::Time(t)])
    }

    pub fn from_labels(labels: &[TransitionLabel]) -> Result<Self, ModelError> {
        let steps = labels
            .iter()
            .map(|l| match l {
                TransitionLabel::Time(t) => Ok(EvolutionStep::Time(t.clone())),
                TransitionLabel::SetAcc { car, acc } => Ok(EvolutionStep::SetAcc {
                    car: car.clone(),
                    acc: acc.clone(),
                }),
                other => Err(ModelError::BadEvolution(format!("{other} is not an evolution step"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Evolution::new(steps)
    }

    pub fn steps(&self) -> &[EvolutionStep] {
        &self.steps
    }

    pub fn total_time(&self) -> Rational {
        self.steps
            .iter()
            .filter_map(|s| match s {
                EvolutionStep::Time(t) => Some(t.clone()),
                EvolutionStep::SetAcc { .. } => None,
            })
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn then(&self, next: &Evolution) -> Evolution {
        let mut steps = self.steps.clone();
        steps.extend(next.steps.iter().cloned());
        Evolution { steps }
    }
}

fn guard(label: &TransitionLabel, reason: &str) -> ModelError {
    ModelError::GuardFailed {
        label: label.to_string(),
        reason: reason.to_string(),
    }
}

/// The unique successor of `ts` under `label`, if the rule's guard holds.
pub fn apply_transition(ts: &TrafficSnapshot, label: &TransitionLabel) -> Result<TrafficSnapshot, ModelError> {
    match label {
        TransitionLabel::Claim { car, lane } => {
            let state = ts.car_or_err(car)?;
            if !state.clm.is_empty() {
                return Err(guard(label, "car already claims a lane"));
            }
            if state.res.len() != 1 {
                return Err(guard(label, "car does not hold exactly one reservation"));
            }
            if *lane > ts.max_lane() {
                return Err(guard(label, "lane out of range"));
            }
            let adjacent = state.res.contains(&(lane + 1)) || (*lane > 0 && state.res.contains(&(lane - 1)));
            if !adjacent {
                return Err(guard(label, "lane is not adjacent to the reservation"));
            }
            let mut next = state.clone();
            next.clm = [*lane].into_iter().collect();
            Ok(ts.with_car(car, next))
        }
        TransitionLabel::WithdrawClaim { car } => {
            let mut next = ts.car_or_err(car)?.clone();
            next.clm.clear();
            Ok(ts.with_car(car, next))
        }
        TransitionLabel::Reserve { car } => {
            let mut next = ts.car_or_err(car)?.clone();
            let claimed = std::mem::take(&mut next.clm);
            next.res.extend(claimed);
            Ok(ts.with_car(car, next))
        }
        TransitionLabel::WithdrawReserve { car, lane } => {
            let state = ts.car_or_err(car)?;
            if state.res.len() != 2 {
                return Err(guard(label, "car does not hold two reservations"));
            }
            if !state.res.contains(lane) {
                return Err(guard(label, "lane is not reserved by the car"));
            }
            let mut next = state.clone();
            next.res = [*lane].into_iter().collect();
            Ok(ts.with_car(car, next))
        }
        TransitionLabel::Time(t) => {
            if t.is_negative() {
                return Err(ModelError::NegativeDuration);
            }
            let mut next = ts.clone();
            let half_t2 = rational::half() * t * t;
            for car in next.cars_mut() {
                car.pos = &car.pos + &car.spd * t + &car.acc * &half_t2;
                car.spd = &car.spd + &car.acc * t;
            }
            Ok(next)
        }
        TransitionLabel::SetAcc { car, acc } => {
            let mut next = ts.car_or_err(car)?.clone();
            next.acc = acc.clone();
            Ok(ts.with_car(car, next))
        }
    }
}

/// Left-to-right composition of the evolution's steps.
pub fn apply_evolution(ts: &TrafficSnapshot, ev: &Evolution) -> Result<TrafficSnapshot, ModelError> {
    ev.steps()
        .iter()
        .try_fold(ts.clone(), |acc, step| apply_transition(&acc, &step.to_label()))
}

/// Applies an evolution, ignoring acceleration changes of unlisted cars
/// (they are outside every view, so the change is unobservable).
pub(crate) fn apply_evolution_visible(ts: &TrafficSnapshot, ev: &Evolution) -> TrafficSnapshot {
    let mut cur = ts.clone();
    for step in ev.steps() {
        if let EvolutionStep::SetAcc { car, .. } = step {
            if ts.car(car).is_none() {
                continue;
            }
        }
        cur = apply_transition(&cur, &step.to_label()).expect("evolution steps on listed cars always apply");
    }
    cur
}

/// Shifts the view by the owner's change in position between two snapshots.
pub fn move_view(from: &TrafficSnapshot, to: &TrafficSnapshot, v: &View) -> Result<View, ModelError> {
    let before = from.car_or_err(&v.owner)?;
    let after = to.car_or_err(&v.owner)?;
    let shift = &after.pos - &before.pos;
    Ok(View {
        extent: v.extent.shift(&shift),
        ..v.clone()
    })
}
