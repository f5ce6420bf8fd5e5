//! JSON files for snapshots, views, sensors, valuations and evolutions.
//!
//! Rationals are written as strings (`"7/2"`, `"3.5"`) or JSON numbers.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::model::{
    CarId, CarState, Evolution, EvolutionStep, Extent, Lane, LaneInterval, ModelError, SensorConfig, SensorRule,
    TrafficSnapshot, View,
};
use crate::rational::{self, Rational};
use crate::semantics::{EvalError, Valuation, Value};
use crate::syntax::{Sort, Var};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Invalid(String),
}

/// A rational in JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Num(pub Rational);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational::format(&self.0))
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as a number or a string such as \"7/2\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                rational::parse(v).map(Num).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(rational::int(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                i64::try_from(v).map(|v| Num(rational::int(v))).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                rational::parse(&v.to_string()).map(Num).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

fn zero_num() -> Num {
    Num(rational::zero())
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CarJson {
    pub res: Vec<Lane>,
    #[serde(default)]
    pub clm: Vec<Lane>,
    pub pos: Num,
    #[serde(default = "zero_num")]
    pub spd: Num,
    #[serde(default = "zero_num")]
    pub acc: Num,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SnapshotJson {
    pub max_lane: Lane,
    pub cars: BTreeMap<String, CarJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ViewJson {
    /// `[lo, hi]`, or `[]` for the empty lane set.
    pub lanes: Vec<Lane>,
    pub extent: [Num; 2],
    pub owner: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleJson {
    Fixed(Num),
    Braking { size: Num, decel: Num },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SensorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<RuleJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub observers: BTreeMap<String, RuleJson>,
    /// `table[observer][observed]`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub table: BTreeMap<String, BTreeMap<String, Num>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    #[serde(flatten)]
    pub snapshot: SnapshotJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensors: Option<SensorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view: Option<ViewJson>,
}

/// A snapshot together with the sensor function and an optional view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub snapshot: TrafficSnapshot,
    pub sensors: SensorConfig,
    pub view: Option<View>,
}

impl SnapshotJson {
    pub fn from_snapshot(ts: &TrafficSnapshot) -> Self {
        SnapshotJson {
            max_lane: ts.max_lane(),
            cars: ts
                .cars()
                .iter()
                .map(|(id, c)| {
                    (
                        id.0.clone(),
                        CarJson {
                            res: c.res.iter().copied().collect(),
                            clm: c.clm.iter().copied().collect(),
                            pos: Num(c.pos.clone()),
                            spd: Num(c.spd.clone()),
                            acc: Num(c.acc.clone()),
                        },
                    )
                })
                .collect(),
        }
    }

    /// Builds the snapshot; insane snapshots are accepted so that they can
    /// be reported.
    pub fn to_snapshot(&self) -> Result<TrafficSnapshot, ModelError> {
        let cars = self
            .cars
            .iter()
            .map(|(id, c)| {
                (
                    CarId(id.clone()),
                    CarState::new(
                        c.res.iter().copied(),
                        c.clm.iter().copied(),
                        c.pos.0.clone(),
                        c.spd.0.clone(),
                        c.acc.0.clone(),
                    ),
                )
            })
            .collect();
        TrafficSnapshot::new_permissive(self.max_lane, cars)
    }
}

impl ViewJson {
    pub fn from_view(v: &View) -> Self {
        ViewJson {
            lanes: v.lanes.bounds().map(|(lo, hi)| vec![lo, hi]).unwrap_or_default(),
            extent: [Num(v.extent.lo().clone()), Num(v.extent.hi().clone())],
            owner: v.owner.0.clone(),
        }
    }

    pub fn to_view(&self) -> Result<View, ScenarioError> {
        let lanes = match self.lanes.as_slice() {
            [] => LaneInterval::default(),
            [n] => LaneInterval::single(*n),
            [lo, hi] => LaneInterval::new(*lo, *hi)?,
            _ => return Err(ScenarioError::Invalid("view lanes must be [], [n] or [lo, hi]".into())),
        };
        let extent = Extent::new(self.extent[0].0.clone(), self.extent[1].0.clone())?;
        Ok(View::new(lanes, extent, self.owner.as_str()))
    }
}

impl RuleJson {
    fn to_rule(&self) -> SensorRule {
        match self {
            RuleJson::Fixed(n) => SensorRule::Fixed(n.0.clone()),
            RuleJson::Braking { size, decel } => SensorRule::Braking {
                size: size.0.clone(),
                decel: decel.0.clone(),
            },
        }
    }

    fn from_rule(r: &SensorRule) -> Self {
        match r {
            SensorRule::Fixed(q) => RuleJson::Fixed(Num(q.clone())),
            SensorRule::Braking { size, decel } => RuleJson::Braking {
                size: Num(size.clone()),
                decel: Num(decel.clone()),
            },
        }
    }
}

impl SensorJson {
    pub fn to_config(&self) -> Result<SensorConfig, ModelError> {
        let mut cfg = match &self.default {
            Some(r) => SensorConfig::new(r.to_rule())?,
            None => SensorConfig::default(),
        };
        for (obs, r) in &self.observers {
            cfg = cfg.with_observer_rule(obs.as_str(), r.to_rule())?;
        }
        for (obs, row) in &self.table {
            for (seen, len) in row {
                cfg = cfg.with_entry(obs.as_str(), seen.as_str(), len.0.clone())?;
            }
        }
        Ok(cfg)
    }

    pub fn from_config(cfg: &SensorConfig) -> Self {
        let mut table: BTreeMap<String, BTreeMap<String, Num>> = BTreeMap::new();
        for ((obs, seen), len) in cfg.table() {
            table.entry(obs.0.clone()).or_default().insert(seen.0.clone(), Num(len.clone()));
        }
        SensorJson {
            default: Some(RuleJson::from_rule(cfg.fallback())),
            observers: cfg
                .observer_rules()
                .iter()
                .map(|(c, r)| (c.0.clone(), RuleJson::from_rule(r)))
                .collect(),
            table,
        }
    }
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let raw: ScenarioJson = serde_json::from_str(text)?;
        Scenario::from_raw(&raw)
    }

    pub fn from_raw(raw: &ScenarioJson) -> Result<Self, ScenarioError> {
        Ok(Scenario {
            snapshot: raw.snapshot.to_snapshot()?,
            sensors: raw.sensors.as_ref().map(SensorJson::to_config).transpose()?.unwrap_or_default(),
            view: raw.view.as_ref().map(ViewJson::to_view).transpose()?,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Scenario::from_json_str(&read(path)?)
    }

    pub fn to_raw(&self) -> ScenarioJson {
        ScenarioJson {
            snapshot: SnapshotJson::from_snapshot(&self.snapshot),
            sensors: Some(SensorJson::from_config(&self.sensors)),
            view: self.view.as_ref().map(ViewJson::from_view),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("scenario serializes")
    }

    pub fn view_or_err(&self) -> Result<&View, ScenarioError> {
        self.view
            .as_ref()
            .ok_or_else(|| ScenarioError::Invalid("the scenario has no view".into()))
    }
}

pub(crate) fn read(path: impl AsRef<Path>) -> Result<String, ScenarioError> {
    let p = path.as_ref();
    std::fs::read_to_string(p).map_err(|source| ScenarioError::Io {
        path: p.display().to_string(),
        source,
    })
}

/// Valuation bindings written as `{"c:car": "E", "x:real": "3/2", "n:lane": 2}`.
pub type ValuationJson = BTreeMap<String, serde_json::Value>;

pub fn parse_binding(key: &str, value: &serde_json::Value) -> Result<(Var, Value), ScenarioError> {
    let (name, sort) = key
        .split_once(':')
        .ok_or_else(|| ScenarioError::Invalid(format!("binding `{key}` must be written name:sort")))?;
    let sort: Sort = sort.parse().map_err(|_| ScenarioError::Invalid(format!("unknown sort in `{key}`")))?;
    let text = match value {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        other => return Err(ScenarioError::Invalid(format!("bad value {other} for `{key}`"))),
    };
    let value = match sort {
        Sort::Car => Value::Car(CarId(text)),
        Sort::Real => Value::Real(rational::parse(&text).map_err(|e| ScenarioError::Invalid(e.to_string()))?),
        Sort::Lane => Value::Lane(
            text.parse()
                .map_err(|_| ScenarioError::Invalid(format!("bad lane `{text}` for `{key}`")))?,
        ),
    };
    Ok((Var::new(name.trim(), sort), value))
}

pub fn valuation_from_json(ego: impl Into<CarId>, json: &ValuationJson) -> Result<Valuation, ScenarioError> {
    let mut nu = Valuation::new(ego);
    for (k, v) in json {
        let (var, value) = parse_binding(k, v)?;
        nu = nu.bind(var, value)?;
    }
    Ok(nu)
}

pub fn valuation_to_json(nu: &Valuation) -> ValuationJson {
    nu.vars()
        .iter()
        .map(|(var, value)| {
            let v = match value {
                Value::Car(c) => serde_json::Value::String(c.0.clone()),
                Value::Real(q) => serde_json::Value::String(rational::format(q)),
                Value::Lane(n) => serde_json::Value::from(*n),
            };
            (format!("{}:{}", var.name, var.sort), v)
        })
        .collect()
}

/// An evolution step: `{"time": "2"}` or `{"acc": {"car": "E", "value": "-1"}}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StepJson {
    Time(Num),
    Acc { car: String, value: Num },
}

pub fn evolution_from_json(steps: &[StepJson]) -> Result<Evolution, ModelError> {
    Evolution::new(
        steps
            .iter()
            .map(|s| match s {
                StepJson::Time(t) => EvolutionStep::Time(t.0.clone()),
                StepJson::Acc { car, value } => EvolutionStep::SetAcc {
                    car: CarId(car.clone()),
                    acc: value.0.clone(),
                },
            })
            .collect(),
    )
}

pub fn evolution_to_json(ev: &Evolution) -> Vec<StepJson> {
    ev.steps()
        .iter()
        .map(|s| match s {
            EvolutionStep::Time(t) => StepJson::Time(Num(t.clone())),
            EvolutionStep::SetAcc { car, acc } => StepJson::Acc {
                car: car.0.clone(),
                value: Num(acc.clone()),
            },
        })
        .collect()
}
