//! Satisfaction of formulas on a snapshot, a view and a valuation.
//!
//! Horizontal chops range over a finite set of candidate points, real
//! quantifiers over a finite sample and `[tau]` over the evolutions listed
//! in [`EvalOptions`]. The [`Verdict`] records whether the answer is exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{
    apply_evolution_visible, apply_transition, CarId, Evolution, Lane, ModelError, TrafficSnapshot,
    TransitionLabel, View,
};
use crate::rational::Rational;
use crate::syntax::{Modality, Sort, Term, Var};

mod eval;

pub use eval::{chop_candidates, eval};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Car(CarId),
    Real(Rational),
    Lane(Lane),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Car(_) => Sort::Car,
            Value::Real(_) => Sort::Real,
            Value::Lane(_) => Sort::Lane,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Car(c) => write!(f, "{c}"),
            Value::Real(q) => write!(f, "{}", crate::rational::Show(q)),
            Value::Lane(n) => write!(f, "#{n}"),
        }
    }
}

/// Interpretation of `ego` and of variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Valuation {
    ego: CarId,
    vars: BTreeMap<Var, Value>,
}

impl Valuation {
    pub fn new(ego: impl Into<CarId>) -> Self {
        Valuation {
            ego: ego.into(),
            vars: BTreeMap::new(),
        }
    }

    pub fn ego(&self) -> &CarId {
        &self.ego
    }

    pub fn vars(&self) -> &BTreeMap<Var, Value> {
        &self.vars
    }

    pub fn get(&self, v: &Var) -> Option<&Value> {
        self.vars.get(v)
    }

    /// `ν ⊕ {x ↦ value}`; panics if the sorts differ.
    pub fn with(&self, x: &Var, value: Value) -> Valuation {
        assert_eq!(x.sort, value.sort(), "valuation must respect sorts");
        let mut next = self.clone();
        next.vars.insert(x.clone(), value);
        next
    }

    pub fn bind(mut self, x: Var, value: Value) -> Result<Valuation, EvalError> {
        if x.sort != value.sort() {
            return Err(EvalError::SortMismatch {
                var: x.name.clone(),
                value: value.to_string(),
            });
        }
        self.vars.insert(x, value);
        Ok(self)
    }

    pub fn car(&self, t: &Term) -> Result<CarId, EvalError> {
        match t {
            Term::Ego => Ok(self.ego.clone()),
            Term::Var(v) => match self.vars.get(v) {
                Some(Value::Car(c)) => Ok(c.clone()),
                Some(other) => Err(EvalError::SortMismatch {
                    var: v.name.clone(),
                    value: other.to_string(),
                }),
                None => Err(EvalError::UnboundVariable(v.name.clone())),
            },
            other => Err(EvalError::NotACar(other.to_string())),
        }
    }
}

/// Bounds for the parts of the semantics that range over infinite sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Evolutions considered by `[tau]`.
    pub tau_witnesses: Vec<Evolution>,
    /// Extra values tried for real-sorted quantifiers.
    pub real_grid: Vec<Rational>,
    /// Rounds of `± d` closure for chop candidates; `None` uses the chop
    /// nesting depth of the formula.
    pub chop_closure_depth: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Verdict {
    pub value: bool,
    /// False when the value depends on the bounds of [`EvalOptions`].
    pub complete: bool,
}

impl Verdict {
    pub const TRUE: Verdict = Verdict {
        value: true,
        complete: true,
    };
    pub const FALSE: Verdict = Verdict {
        value: false,
        complete: true,
    };

    pub fn exact(value: bool) -> Verdict {
        Verdict { value, complete: true }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)?;
        if !self.complete {
            f.write_str(" (bounded)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("valuation maps ego to `{ego}` but the view belongs to `{owner}`")]
    EgoMismatch { ego: CarId, owner: CarId },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("value {value} does not fit the sort of `{var}`")]
    SortMismatch { var: String, value: String },
    #[error("`{0}` does not denote a car")]
    NotACar(String),
    #[error("ill-sorted term `{0}`")]
    IllSorted(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Value of a term on a view.
pub fn eval_term(v: &View, nu: &Valuation, t: &Term) -> Result<Value, EvalError> {
    use crate::model::Measure;
    Ok(match t {
        Term::LaneConst(n) => Value::Lane(*n),
        Term::RealConst(q) => Value::Real(q.clone()),
        Term::Ego => Value::Car(nu.ego.clone()),
        Term::Var(x) => nu
            .get(x)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(x.name.clone()))?,
        Term::Length => Value::Real(v.extent.measure()),
        Term::Width => Value::Real(crate::rational::int(v.lanes.measure() as i64)),
        Term::Plus(a, b) => match (eval_term(v, nu, a)?, eval_term(v, nu, b)?) {
            (Value::Real(x), Value::Real(y)) => Value::Real(x + y),
            (Value::Lane(x), Value::Lane(y)) => Value::Lane(x + y),
            _ => return Err(EvalError::IllSorted(t.to_string())),
        },
    })
}

/// Snapshots reachable by one transition of the modality's kind, paired
/// with the (possibly moved) view.
///
/// A car not listed in the snapshot stands for a car outside of the view
/// holding one reservation and no claim: reserving and withdrawing a claim
/// leave the snapshot unchanged in view, claiming is possible but invisible,
/// and withdrawing a reservation is impossible.
pub fn successors(
    ts: &TrafficSnapshot,
    v: &View,
    modality: &Modality,
    nu: &Valuation,
    opts: &EvalOptions,
) -> Result<Vec<(TrafficSnapshot, View)>, EvalError> {
    let car = match modality.car() {
        Some(t) => Some(nu.car(t)?),
        None => None,
    };
    let unchanged = || vec![(ts.clone(), v.clone())];
    let out = match (modality, car) {
        (Modality::Tau, _) => opts
            .tau_witnesses
            .iter()
            .map(|ev| tau_successor(ts, v, ev))
            .collect(),
        (m, Some(c)) if ts.car(&c).is_none() => match m {
            Modality::WithdrawReserve(_) => vec![],
            _ => unchanged(),
        },
        (Modality::Reserve(_), Some(car)) => vec![(apply_transition(ts, &TransitionLabel::Reserve { car })?, v.clone())],
        (Modality::WithdrawClaim(_), Some(car)) => {
            vec![(apply_transition(ts, &TransitionLabel::WithdrawClaim { car })?, v.clone())]
        }
        (Modality::Claim(_), Some(car)) => ts
            .lanes()
            .filter_map(|lane| apply_transition(ts, &TransitionLabel::Claim { car: car.clone(), lane }).ok())
            .map(|next| (next, v.clone()))
            .collect(),
        (Modality::WithdrawReserve(_), Some(car)) => {
            let lanes: Vec<Lane> = ts.car(&car).map(|s| s.res.iter().copied().collect()).unwrap_or_default();
            lanes
                .into_iter()
                .filter_map(|lane| {
                    apply_transition(ts, &TransitionLabel::WithdrawReserve { car: car.clone(), lane }).ok()
                })
                .map(|next| (next, v.clone()))
                .collect()
        }
        (_, None) => unreachable!("discrete modalities name a car"),
    };
    Ok(out)
}

/// The snapshot after `ev` and the view moved along with its owner.
pub fn tau_successor(ts: &TrafficSnapshot, v: &View, ev: &Evolution) -> (TrafficSnapshot, View) {
    let next = apply_evolution_visible(ts, ev);
    let view = crate::model::move_view(ts, &next, v).unwrap_or_else(|_| v.clone());
    (next, view)
}

/// Car identifiers that occur in no snapshot and no valuation.
pub(crate) fn fresh_cars(taken: &BTreeSet<CarId>, count: usize) -> Vec<CarId> {
    (1..)
        .map(|i| CarId(format!("_fresh{i}")))
        .filter(|c| !taken.contains(c))
        .take(count)
        .collect()
}
