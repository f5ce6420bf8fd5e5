use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::check::open_assumptions;
use super::{Dir, Judgment, ProofScript, Source};
use crate::model::{Evolution, SensorConfig, TrafficSnapshot, View};
use crate::scenario::{
    evolution_from_json, evolution_to_json, parse_binding, valuation_to_json, ScenarioError, SensorJson, SnapshotJson,
    StepJson, ValuationJson, ViewJson,
};
use crate::semantics::{eval, successors, EvalError, EvalOptions, Valuation, Value, Verdict};
use crate::syntax::Var;

/// Concrete snapshots, views and values for the labels and variables of a
/// script. `ego` is always interpreted as the owner of the view at hand.
#[derive(Clone, Debug)]
pub struct Binding {
    pub snapshots: BTreeMap<String, TrafficSnapshot>,
    pub views: BTreeMap<String, View>,
    pub values: BTreeMap<Var, Value>,
    pub sensors: SensorConfig,
    pub options: EvalOptions,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingJson {
    pub snapshots: BTreeMap<String, SnapshotJson>,
    pub views: BTreeMap<String, ViewJson>,
    #[serde(default)]
    pub valuation: ValuationJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensors: Option<SensorJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tau_witnesses: Vec<Vec<StepJson>>,
}

impl BindingJson {
    pub fn to_binding(&self) -> Result<Binding, ScenarioError> {
        let snapshots = self
            .snapshots
            .iter()
            .map(|(k, s)| Ok((k.clone(), s.to_snapshot()?)))
            .collect::<Result<_, ScenarioError>>()?;
        let views = self
            .views
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.to_view()?)))
            .collect::<Result<_, ScenarioError>>()?;
        let values = self
            .valuation
            .iter()
            .map(|(k, v)| parse_binding(k, v))
            .collect::<Result<_, _>>()?;
        let sensors = match &self.sensors {
            Some(s) => s.to_config()?,
            None => SensorConfig::default(),
        };
        let tau_witnesses = self
            .tau_witnesses
            .iter()
            .map(|steps| evolution_from_json(steps))
            .collect::<Result<_, _>>()?;
        Ok(Binding {
            snapshots,
            views,
            values,
            sensors,
            options: EvalOptions {
                tau_witnesses,
                ..EvalOptions::default()
            },
        })
    }

    pub fn from_binding(b: &Binding) -> BindingJson {
        let mut nu = Valuation::new("_");
        for (k, v) in &b.values {
            nu = nu.with(k, v.clone());
        }
        BindingJson {
            snapshots: b.snapshots.iter().map(|(k, s)| (k.clone(), SnapshotJson::from_snapshot(s))).collect(),
            views: b.views.iter().map(|(k, v)| (k.clone(), ViewJson::from_view(v))).collect(),
            valuation: valuation_to_json(&nu),
            sensors: Some(SensorJson::from_config(&b.sensors)),
            tau_witnesses: b.options.tau_witnesses.iter().map(evolution_to_json).collect(),
        }
    }
}

impl Binding {
    pub fn new(sensors: SensorConfig) -> Self {
        Binding {
            snapshots: BTreeMap::new(),
            views: BTreeMap::new(),
            values: BTreeMap::new(),
            sensors,
            options: EvalOptions::default(),
        }
    }

    pub fn snapshot(mut self, name: &str, ts: TrafficSnapshot) -> Self {
        self.snapshots.insert(name.into(), ts);
        self
    }

    pub fn view(mut self, name: &str, v: View) -> Self {
        self.views.insert(name.into(), v);
        self
    }

    pub fn value(mut self, x: Var, value: Value) -> Self {
        self.values.insert(x, value);
        self
    }

    pub fn with_tau(mut self, witnesses: Vec<Evolution>) -> Self {
        self.options.tau_witnesses = witnesses;
        self
    }

    fn valuation(&self, owner: &View) -> Result<Valuation, EvalError> {
        let mut nu = Valuation::new(owner.owner.clone());
        for (k, v) in &self.values {
            nu = nu.bind(k.clone(), v.clone())?;
        }
        Ok(nu)
    }

    fn resolve(&self, snap: &str, view: &str) -> Option<(&TrafficSnapshot, &View)> {
        Some((self.snapshots.get(snap)?, self.views.get(view)?))
    }

    /// Truth of a judgment; `None` when a label is not bound.
    pub fn judge(&self, j: &Judgment) -> Result<Option<Verdict>, EvalError> {
        match j {
            Judgment::Holds { label, formula } => {
                let Some((ts, v)) = self.resolve(&label.snapshot, &label.view) else {
                    return Ok(None);
                };
                eval(ts, v, &self.valuation(v)?, formula, &self.sensors, &self.options).map(Some)
            }
            Judgment::Trans { from, modality, to } => {
                let (Some((ts, v)), Some((ts2, v2))) =
                    (self.resolve(&from.snapshot, &from.view), self.resolve(&to.snapshot, &to.view))
                else {
                    return Ok(None);
                };
                let next = successors(ts, v, modality, &self.valuation(v)?, &self.options)?;
                let hit = next.iter().any(|(t, w)| t == ts2 && w == v2);
                let complete = hit || *modality != crate::syntax::Modality::Tau;
                Ok(Some(Verdict { value: hit, complete }))
            }
            Judgment::Chop {
                dir,
                first,
                second,
                whole,
            } => {
                let (Some(a), Some(b), Some(w)) = (self.views.get(first), self.views.get(second), self.views.get(whole))
                else {
                    return Ok(None);
                };
                Ok(Some(Verdict::exact(match dir {
                    Dir::H => View::is_hchop(a, b, w),
                    Dir::V => View::is_vchop(a, b, w),
                })))
            }
            Judgment::Decomposable { dir, view } => {
                let Some(v) = self.views.get(view) else {
                    return Ok(None);
                };
                Ok(Some(Verdict::exact(match dir {
                    Dir::H => true,
                    Dir::V => !v.chop_v_all().is_empty(),
                })))
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("assumption `{name}` does not hold under the binding")]
    BindingInvalid { name: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditFailure {
    pub node: String,
    pub judgment: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    /// Nodes whose conclusion was evaluated.
    pub checked: usize,
    /// Nodes with an unbound label, a failing open hypothesis or an
    /// inconclusive verdict.
    pub skipped: usize,
    pub failures: Vec<AuditFailure>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Evaluates every node whose open assumptions hold under the binding and
/// reports the nodes whose conclusion is then false. The script need not be
/// accepted by the checker.
pub fn semantic_audit(p: &ProofScript, b: &Binding) -> Result<AuditReport, AuditError> {
    for a in p.assumptions.values() {
        if a.source == Source::Gamma || a.source == Source::Delta {
            let v = b.judge(&a.judgment)?;
            if !v.is_some_and(|v| v.value) {
                return Err(AuditError::BindingInvalid { name: a.name.clone() });
            }
        }
    }
    let opens = open_assumptions(p);
    let mut hyp_cache: BTreeMap<String, bool> = BTreeMap::new();
    let mut report = AuditReport::default();
    for (name, node) in &p.nodes {
        let mut live = true;
        for o in opens.get(name).map(Vec::as_slice).unwrap_or(&[]) {
            let ok = match hyp_cache.get(&o.name) {
                Some(ok) => *ok,
                None => {
                    let ok = b.judge(&o.judgment)?.is_some_and(|v| v.value);
                    hyp_cache.insert(o.name.clone(), ok);
                    ok
                }
            };
            if !ok {
                live = false;
                break;
            }
        }
        let verdict = if live { b.judge(&node.conclusion)? } else { None };
        match verdict {
            Some(v) if v.value => report.checked += 1,
            Some(v) if v.complete => {
                report.checked += 1;
                report.failures.push(AuditFailure {
                    node: name.clone(),
                    judgment: node.conclusion.to_string(),
                });
            }
            _ => report.skipped += 1,
        }
    }
    Ok(report)
}
