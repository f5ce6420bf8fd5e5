//! Labelled natural deduction: proof scripts, a rule checker and a
//! semantic audit of derivations against concrete models.
//!
//! A script is line oriented:
//!
//! ```text
//! var c:car
//! label S V
//! label S' V
//! assume-rel T: S,V -[r(c)]-> S',V
//! assume G: S,V |- re(c)
//! hyp h [1]: S,V |- cl(c)
//! node n: rule=r-act1 premises=[h, T] conclude S',V |- re(c)
//! goal n
//! ```
//!
//! `assume` and `assume-rel` lines form the assumption sets; `hyp` lines
//! declare hypotheses that rules discharge by their index. Judgments are
//! `S,V |- φ`, transitions `S,V -[m]-> S',V'`, chop relations
//! `hchop(V1,V2,V)` and `vchop(V1,V2,V)` (first view lower or left), and
//! decomposability `exists hchop(V)` / `exists vchop(V)`. Nodes may carry
//! `with={…}`: the instantiating term of a quantifier rule or the two
//! eigen-views of an elimination rule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{equivalent, Formula, Modality, SortContext};

mod audit;
mod check;
mod script;

pub use audit::{semantic_audit, AuditError, AuditFailure, AuditReport, Binding, BindingJson};
pub use check::{check_script, RULES};
pub use script::parse_script;

/// Direction of a chop relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    H,
    V,
}

impl Dir {
    pub fn keyword(self) -> &'static str {
        match self {
            Dir::H => "hchop",
            Dir::V => "vchop",
        }
    }
}

/// `snapshot, view`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub snapshot: String,
    pub view: String,
}

impl Label {
    pub fn new(snapshot: impl Into<String>, view: impl Into<String>) -> Self {
        Label {
            snapshot: snapshot.into(),
            view: view.into(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.snapshot, self.view)
    }
}

/// Labelled and relational formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Judgment {
    Holds { label: Label, formula: Formula },
    Trans { from: Label, modality: Modality, to: Label },
    Chop { dir: Dir, first: String, second: String, whole: String },
    Decomposable { dir: Dir, view: String },
}

impl Judgment {
    pub fn holds(snapshot: &str, view: &str, formula: Formula) -> Judgment {
        Judgment::Holds {
            label: Label::new(snapshot, view),
            formula,
        }
    }

    pub fn views(&self) -> Vec<&str> {
        match self {
            Judgment::Holds { label, .. } => vec![&label.view],
            Judgment::Trans { from, to, .. } => vec![&from.view, &to.view],
            Judgment::Chop {
                first, second, whole, ..
            } => vec![first, second, whole],
            Judgment::Decomposable { view, .. } => vec![view],
        }
    }

    pub fn snapshots(&self) -> Vec<&str> {
        match self {
            Judgment::Holds { label, .. } => vec![&label.snapshot],
            Judgment::Trans { from, to, .. } => vec![&from.snapshot, &to.snapshot],
            _ => vec![],
        }
    }

    pub fn mentions_view(&self, v: &str) -> bool {
        self.views().contains(&v)
    }

    pub fn mentions_snapshot(&self, s: &str) -> bool {
        self.snapshots().contains(&s)
    }

    /// Equality of judgments, with formulas compared up to expansion,
    /// renaming of bound variables and association of chops.
    pub fn matches(&self, other: &Judgment) -> bool {
        match (self, other) {
            (Judgment::Holds { label: a, formula: f }, Judgment::Holds { label: b, formula: g }) => {
                a == b && (f == g || equivalent(f, g))
            }
            _ => self == other,
        }
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Judgment::Holds { label, formula } => write!(f, "{label} |- {formula}"),
            Judgment::Trans { from, modality, to } => write!(f, "{from} -[{modality}]-> {to}"),
            Judgment::Chop {
                dir,
                first,
                second,
                whole,
            } => write!(f, "{}({first},{second},{whole})", dir.keyword()),
            Judgment::Decomposable { dir, view } => write!(f, "exists {}({view})", dir.keyword()),
        }
    }
}

/// Where an assumption comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    /// Labelled assumption (Γ).
    Gamma,
    /// Relational assumption (Δ).
    Delta,
    /// Hypothesis discharged by index.
    Hyp(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assumption {
    pub name: String,
    pub source: Source,
    pub judgment: Judgment,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub rule: String,
    pub premises: Vec<String>,
    pub discharge: Vec<u32>,
    pub with: Option<String>,
    pub conclusion: Judgment,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ProofScript {
    pub vars: SortContext,
    pub snapshots: BTreeSet<String>,
    pub views: BTreeSet<String>,
    pub assumptions: BTreeMap<String, Assumption>,
    pub nodes: BTreeMap<String, Node>,
    pub goal: String,
}

impl ProofScript {
    pub fn gamma(&self) -> impl Iterator<Item = &Assumption> {
        self.assumptions.values().filter(|a| a.source == Source::Gamma)
    }

    pub fn delta(&self) -> impl Iterator<Item = &Assumption> {
        self.assumptions.values().filter(|a| a.source == Source::Delta)
    }

    /// The conclusion of the goal node.
    pub fn goal_judgment(&self) -> Option<&Judgment> {
        self.nodes.get(&self.goal).map(|n| &n.conclusion)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckErrorKind {
    UnknownRule(String),
    ShapeMismatch(String),
    SideConditionViolated { which: String, detail: String },
    FreshnessViolation { name: String, detail: String },
    BadDischarge { index: u32, detail: String },
    UnjustifiedLeaf(String),
    UndeclaredLabel(String),
    Cycle(String),
}

impl CheckErrorKind {
    pub fn code(&self) -> &'static str {
        match self {
            CheckErrorKind::UnknownRule(_) => "UnknownRule",
            CheckErrorKind::ShapeMismatch(_) => "ShapeMismatch",
            CheckErrorKind::SideConditionViolated { .. } => "SideConditionViolated",
            CheckErrorKind::FreshnessViolation { .. } => "FreshnessViolation",
            CheckErrorKind::BadDischarge { .. } => "BadDischarge",
            CheckErrorKind::UnjustifiedLeaf(_) => "UnjustifiedLeaf",
            CheckErrorKind::UndeclaredLabel(_) => "UndeclaredLabel",
            CheckErrorKind::Cycle(_) => "Cycle",
        }
    }
}

impl fmt::Display for CheckErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckErrorKind::UnknownRule(r) => write!(f, "unknown rule `{r}`"),
            CheckErrorKind::ShapeMismatch(m) => write!(f, "shape mismatch: {m}"),
            CheckErrorKind::SideConditionViolated { which, detail } => {
                write!(f, "side condition {which} violated: {detail}")
            }
            CheckErrorKind::FreshnessViolation { name, detail } => write!(f, "`{name}` is not fresh: {detail}"),
            CheckErrorKind::BadDischarge { index, detail } => write!(f, "bad discharge of [{index}]: {detail}"),
            CheckErrorKind::UnjustifiedLeaf(l) => write!(f, "leaf `{l}` is neither an assumption nor a live hypothesis"),
            CheckErrorKind::UndeclaredLabel(l) => write!(f, "label `{l}` is not declared"),
            CheckErrorKind::Cycle(n) => write!(f, "node `{n}` depends on itself"),
        }
    }
}

/// A rejected derivation: the path runs from the goal to the failing node.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}: {kind}", path.join(" / "))]
pub struct CheckError {
    pub path: Vec<String>,
    pub kind: CheckErrorKind,
}

impl CheckError {
    pub fn node(&self) -> &str {
        self.path.last().map(String::as_str).unwrap_or("")
    }
}
