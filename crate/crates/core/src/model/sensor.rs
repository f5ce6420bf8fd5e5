use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::{CarId, ModelError, TrafficSnapshot};
use crate::rational::{self, Rational};

/// How an observer perceives cars that have no explicit table entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SensorRule {
    /// A fixed length for every car.
    Fixed(Rational),
    /// Physical size plus braking distance `spd² / (2·decel)`.
    Braking { size: Rational, decel: Rational },
}

impl SensorRule {
    fn validate(&self) -> Result<(), ModelError> {
        let ok = match self {
            SensorRule::Fixed(len) => len.is_positive(),
            SensorRule::Braking { size, decel } => size.is_positive() && decel.is_positive(),
        };
        ok.then_some(()).ok_or(ModelError::NonPositiveSensor)
    }

    fn apply(&self, ts: &TrafficSnapshot, car: &CarId) -> Rational {
        match self {
            SensorRule::Fixed(len) => len.clone(),
            SensorRule::Braking { size, decel } => {
                let spd = ts.car(car).map(|c| c.spd.clone()).unwrap_or_else(Rational::zero);
                size + &spd * &spd / (rational::int(2) * decel)
            }
        }
    }
}

/// The sensor function: the length of `observed` as perceived by `observer`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SensorConfig {
    table: BTreeMap<(CarId, CarId), Rational>,
    observer_rules: BTreeMap<CarId, SensorRule>,
    fallback: SensorRule,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            table: BTreeMap::new(),
            observer_rules: BTreeMap::new(),
            fallback: SensorRule::Fixed(rational::one()),
        }
    }
}

impl SensorConfig {
    pub fn new(fallback: SensorRule) -> Result<Self, ModelError> {
        fallback.validate()?;
        Ok(SensorConfig {
            fallback,
            ..Default::default()
        })
    }

    pub fn with_entry(mut self, observer: impl Into<CarId>, observed: impl Into<CarId>, len: Rational) -> Result<Self, ModelError> {
        if !len.is_positive() {
            return Err(ModelError::NonPositiveSensor);
        }
        self.table.insert((observer.into(), observed.into()), len);
        Ok(self)
    }

    pub fn with_observer_rule(mut self, observer: impl Into<CarId>, rule: SensorRule) -> Result<Self, ModelError> {
        rule.validate()?;
        self.observer_rules.insert(observer.into(), rule);
        Ok(self)
    }

    pub fn table(&self) -> &BTreeMap<(CarId, CarId), Rational> {
        &self.table
    }

    pub fn observer_rules(&self) -> &BTreeMap<CarId, SensorRule> {
        &self.observer_rules
    }

    pub fn fallback(&self) -> &SensorRule {
        &self.fallback
    }

    /// Table entry, then the observer's rule, then the fallback rule.
    pub fn length(&self, observer: &CarId, observed: &CarId, ts: &TrafficSnapshot) -> Rational {
        if let Some(len) = self.table.get(&(observer.clone(), observed.clone())) {
            return len.clone();
        }
        self.observer_rules
            .get(observer)
            .unwrap_or(&self.fallback)
            .apply(ts, observed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::sample_snapshot;
    use crate::rational::{int, ratio};

    #[test]
    fn lookup_order() {
        let ts = sample_snapshot();
        let cfg = SensorConfig::new(SensorRule::Fixed(int(2)))
            .unwrap()
            .with_entry("E", "A", int(10))
            .unwrap()
            .with_observer_rule("A", SensorRule::Braking { size: int(4), decel: int(8) })
            .unwrap();
        assert_eq!(cfg.length(&"E".into(), &"A".into(), &ts), int(10));
        assert_eq!(cfg.length(&"E".into(), &"B".into(), &ts), int(2));
        // 4 + 14² / 16
        assert_eq!(cfg.length(&"A".into(), &"B".into(), &ts), int(4) + ratio(196, 16));
    }

    #[test]
    fn rejects_non_positive_lengths() {
        assert!(SensorConfig::new(SensorRule::Fixed(int(0))).is_err());
        assert!(SensorConfig::default().with_entry("E", "A", int(-1)).is_err());
        assert!(SensorConfig::default()
            .with_observer_rule("E", SensorRule::Braking { size: int(1), decel: int(0) })
            .is_err());
    }
}
