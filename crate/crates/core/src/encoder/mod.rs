//! Two-counter machines, their runs, the formula `halt(C)` that is
//! satisfiable exactly when the machine halts, and the model built from a
//! halting run.
//!
//! State `q` is encoded by the number of lanes below a configuration: the
//! initial state sits on lane 0 and the other states follow in the order of
//! the machine file. A configuration occupies `5k` of the extent: the marker,
//! counter one, a claim, counter two and a closing claim, each of length `k`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Lane;

mod formula;
mod witness;

pub use formula::{encode_halt, Encoding};
pub use witness::{
    build_bounded_witness, build_witness_model, counter_position, counter_unit, marker_position, Layout, Witness, OBSERVER,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Inc,
    Dec,
}

/// `from →c+ to`, or `from →c− to_zero, to` where `to_zero` is taken on an
/// empty counter and `to` after decrementing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instruction {
    pub from: String,
    pub op: Op,
    pub counter: u8,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to_zero: Option<String>,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            Op::Inc => write!(f, "{} -c{}+-> {}", self.from, self.counter, self.to),
            Op::Dec => write!(
                f,
                "{} -c{}--> {},{}",
                self.from,
                self.counter,
                self.to_zero.as_deref().unwrap_or("?"),
                self.to
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoCounterMachine {
    pub states: Vec<String>,
    pub initial: String,
    #[serde(rename = "final")]
    pub final_state: String,
    pub instructions: Vec<Instruction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` is listed twice")]
    DuplicateState(String),
    #[error("state `{0}` has more than one instruction")]
    Nondeterministic(String),
    #[error("the final state `{0}` has an outgoing instruction")]
    FinalHasInstruction(String),
    #[error("counter {0} does not exist")]
    BadCounter(u8),
    #[error("instruction `{0}` is malformed: {1}")]
    Malformed(String, &'static str),
    #[error("no halting run within {0} steps")]
    Timeout(usize),
    #[error("state `{0}` has no instruction")]
    Stuck(String),
    #[error("k must be positive")]
    BadK,
    #[error("the trace does not end in the final state")]
    NotHalting,
    #[error("malformed machine file: {0}")]
    Json(String),
}

/// `(state, c1, c2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Config {
    pub state: String,
    pub c1: u64,
    pub c2: u64,
}

impl Config {
    pub fn new(state: impl Into<String>, c1: u64, c2: u64) -> Self {
        Config {
            state: state.into(),
            c1,
            c2,
        }
    }

    pub fn counter(&self, i: u8) -> u64 {
        if i == 1 {
            self.c1
        } else {
            self.c2
        }
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.state, self.c1, self.c2)
    }
}

/// Configurations from `(q0, 0, 0)`; `steps[n]` leads from `configs[n]` to
/// `configs[n + 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunTrace {
    pub configs: Vec<Config>,
    pub steps: Vec<usize>,
}

impl RunTrace {
    pub fn max_counter(&self) -> u64 {
        self.configs.iter().map(|c| c.c1.max(c.c2)).max().unwrap_or(0)
    }

    pub fn last(&self) -> &Config {
        self.configs.last().expect("a trace has a first configuration")
    }
}

impl TwoCounterMachine {
    pub fn from_json_str(text: &str) -> Result<Self, MachineError> {
        let m: TwoCounterMachine = serde_json::from_str(text).map_err(|e| MachineError::Json(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MachineError> {
        let mut seen = BTreeSet::new();
        for s in &self.states {
            if !seen.insert(s) {
                return Err(MachineError::DuplicateState(s.clone()));
            }
        }
        let known = |s: &String| {
            if seen.contains(s) {
                Ok(())
            } else {
                Err(MachineError::UnknownState(s.clone()))
            }
        };
        known(&self.initial)?;
        known(&self.final_state)?;
        let mut sources = BTreeSet::new();
        for ins in &self.instructions {
            known(&ins.from)?;
            known(&ins.to)?;
            if ins.counter != 1 && ins.counter != 2 {
                return Err(MachineError::BadCounter(ins.counter));
            }
            match (ins.op, &ins.to_zero) {
                (Op::Inc, Some(_)) => return Err(MachineError::Malformed(ins.to_string(), "increment with to_zero")),
                (Op::Dec, None) => return Err(MachineError::Malformed(ins.to_string(), "decrement without to_zero")),
                (Op::Dec, Some(z)) => known(z)?,
                _ => {}
            }
            if ins.from == self.final_state {
                return Err(MachineError::FinalHasInstruction(ins.from.clone()));
            }
            if !sources.insert(&ins.from) {
                return Err(MachineError::Nondeterministic(ins.from.clone()));
            }
        }
        Ok(())
    }

    /// Lane of each state: the initial state first, then the others in order.
    pub fn lanes(&self) -> BTreeMap<String, Lane> {
        std::iter::once(&self.initial)
            .chain(self.states.iter().filter(|s| **s != self.initial))
            .enumerate()
            .map(|(i, s)| (s.clone(), i as Lane))
            .collect()
    }

    pub fn lane(&self, state: &str) -> Lane {
        self.lanes()[state]
    }

    fn instruction(&self, state: &str) -> Option<(usize, &Instruction)> {
        self.instructions.iter().enumerate().find(|(_, i)| i.from == state)
    }

    /// Applies the instruction of the current state.
    pub fn step(&self, c: &Config) -> Result<(usize, Config), MachineError> {
        let (n, ins) = self.instruction(&c.state).ok_or_else(|| MachineError::Stuck(c.state.clone()))?;
        let bump = |c: &Config, delta: i64, to: &str| {
            let (mut c1, mut c2) = (c.c1, c.c2);
            let slot = if ins.counter == 1 { &mut c1 } else { &mut c2 };
            *slot = (*slot as i64 + delta) as u64;
            Config::new(to, c1, c2)
        };
        let next = match ins.op {
            Op::Inc => bump(c, 1, &ins.to),
            Op::Dec if c.counter(ins.counter) == 0 => bump(c, 0, ins.to_zero.as_deref().expect("validated")),
            Op::Dec => bump(c, -1, &ins.to),
        };
        Ok((n, next))
    }

    /// Runs from `(q0, 0, 0)` for at most `max_steps` steps and returns the
    /// trace so far; it stops early in the final state.
    pub fn simulate(&self, max_steps: usize) -> Result<RunTrace, MachineError> {
        let mut trace = RunTrace {
            configs: vec![Config::new(self.initial.clone(), 0, 0)],
            steps: vec![],
        };
        while trace.last().state != self.final_state && trace.steps.len() < max_steps {
            let (n, next) = self.step(trace.last())?;
            trace.steps.push(n);
            trace.configs.push(next);
        }
        Ok(trace)
    }
}

/// The halting run of `m`, if it ends within `max_steps` steps.
pub fn run_machine(m: &TwoCounterMachine, max_steps: usize) -> Result<RunTrace, MachineError> {
    let trace = m.simulate(max_steps)?;
    if trace.last().state == m.final_state {
        Ok(trace)
    } else {
        Err(MachineError::Timeout(max_steps))
    }
}
