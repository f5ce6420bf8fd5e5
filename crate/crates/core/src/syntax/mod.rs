//! Formulas and terms, their concrete syntax, derived-form expansion and the
//! syntactic predicates used by the proof system.
//!
//! Concrete syntax at a glance:
//!
//! ```text
//! bot  top  free  re(c)  cl(c)  l = 5  w = 1  x != y  l < 3  w > 1
//! not F   F and F   F or F   F -> F   F <-> F
//! forall c:car. F    exists x:real. F    exists n:lane. F
//! F ~ G              horizontal chop, F on the left part
//! F || G             vertical chop, F on the lower lanes
//! F ^ t              F and l = t
//! [r(c)] [c(c)] [wd_r(c)] [wd_c(c)] [tau]    boxes, <..> for diamonds
//! somewhere F   everywhere F   <l> F   [l] F
//! ```
//!
//! Lane constants are written `#n`; an integer literal compared against a
//! lane-sorted term is read as a lane constant as well.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::Lane;
use crate::rational::Rational;

mod analysis;
mod expand;
mod parse;
mod print;

pub use analysis::{
    chop_depth, dri, dri_term, equivalent, free_vars, hcf, hri, hri_term, is_core, substitute, term_free_vars, vcf, vri,
    vri_term,
};
pub use expand::expand;
pub use parse::{parse_formula, parse_formula_in, parse_term_in};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Car,
    Real,
    Lane,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Car => "car",
            Sort::Real => "real",
            Sort::Lane => "lane",
        })
    }
}

impl std::str::FromStr for Sort {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, SyntaxError> {
        match s {
            "car" => Ok(Sort::Car),
            "real" => Ok(Sort::Real),
            "lane" => Ok(Sort::Lane),
            other => Err(SyntaxError::Sort(format!("unknown sort `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Var { name: name.into(), sort }
    }

    pub fn car(name: impl Into<String>) -> Self {
        Var::new(name, Sort::Car)
    }

    pub fn real(name: impl Into<String>) -> Self {
        Var::new(name, Sort::Real)
    }

    pub fn lane(name: impl Into<String>) -> Self {
        Var::new(name, Sort::Lane)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    LaneConst(Lane),
    RealConst(Rational),
    Ego,
    Var(Var),
    /// `l`, the length of the view's extent.
    Length,
    /// `w`, the number of lanes of the view.
    Width,
    Plus(Box<Term>, Box<Term>),
}

impl Term {
    pub fn real(q: Rational) -> Term {
        Term::RealConst(q)
    }

    pub fn int(n: i64) -> Term {
        Term::RealConst(crate::rational::int(n))
    }

    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn plus(a: Term, b: Term) -> Term {
        Term::Plus(Box::new(a), Box::new(b))
    }

    /// Sort of a well-sorted term.
    pub fn sort(&self) -> Sort {
        match self {
            Term::LaneConst(_) => Sort::Lane,
            Term::RealConst(_) | Term::Length | Term::Width => Sort::Real,
            Term::Ego => Sort::Car,
            Term::Var(v) => v.sort,
            Term::Plus(a, _) => a.sort(),
        }
    }

    /// Checks the sort discipline of `+`.
    pub fn check_sorts(&self) -> Result<Sort, SyntaxError> {
        match self {
            Term::Plus(a, b) => {
                let (sa, sb) = (a.check_sorts()?, b.check_sorts()?);
                if sa == Sort::Car || sb == Sort::Car {
                    return Err(SyntaxError::Sort(format!("`{self}` adds car terms")));
                }
                if sa != sb {
                    return Err(SyntaxError::Sort(format!("`{self}` adds a {sa} term to a {sb} term")));
                }
                Ok(sa)
            }
            t => Ok(t.sort()),
        }
    }

    pub fn contains_length(&self) -> bool {
        match self {
            Term::Length => true,
            Term::Plus(a, b) => a.contains_length() || b.contains_length(),
            _ => false,
        }
    }

    pub fn contains_width(&self) -> bool {
        match self {
            Term::Width => true,
            Term::Plus(a, b) => a.contains_width() || b.contains_width(),
            _ => false,
        }
    }
}

/// The transition kinds of the box modalities.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Modality {
    Reserve(Term),
    Claim(Term),
    WithdrawClaim(Term),
    WithdrawReserve(Term),
    Tau,
}

impl Modality {
    pub fn car(&self) -> Option<&Term> {
        match self {
            Modality::Reserve(c) | Modality::Claim(c) | Modality::WithdrawClaim(c) | Modality::WithdrawReserve(c) => {
                Some(c)
            }
            Modality::Tau => None,
        }
    }

    pub fn map_car(&self, f: impl FnOnce(&Term) -> Term) -> Modality {
        match self {
            Modality::Reserve(c) => Modality::Reserve(f(c)),
            Modality::Claim(c) => Modality::Claim(f(c)),
            Modality::WithdrawClaim(c) => Modality::WithdrawClaim(f(c)),
            Modality::WithdrawReserve(c) => Modality::WithdrawReserve(f(c)),
            Modality::Tau => Modality::Tau,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            Modality::Reserve(_) => "r",
            Modality::Claim(_) => "c",
            Modality::WithdrawClaim(_) => "wd_c",
            Modality::WithdrawReserve(_) => "wd_r",
            Modality::Tau => "tau",
        }
    }
}

type B = Box<Formula>;

/// EMLSL formulas. The first block of variants is the core language; the
/// rest are abbreviations removed by [`expand`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Bot,
    Eq(Term, Term),
    Re(Term),
    Cl(Term),
    Implies(B, B),
    Forall(Var, B),
    ChopH(B, B),
    ChopV { lower: B, upper: B },
    BoxM(Modality, B),

    Top,
    Not(B),
    And(B, B),
    Or(B, B),
    Iff(B, B),
    Exists(Var, B),
    Neq(Term, Term),
    Free,
    Somewhere(B),
    Everywhere(B),
    DiamondL(B),
    BoxL(B),
    DiamondM(Modality, B),
    LengthLt(Term),
    LengthGt(Term),
    WidthLt(Term),
    WidthGt(Term),
    /// `φ^t`, short for `φ ∧ ℓ = t`.
    Restrict(B, Term),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn length_is(t: Term) -> Formula {
        Formula::Eq(Term::Length, t)
    }

    pub fn width_is(t: Term) -> Formula {
        Formula::Eq(Term::Width, t)
    }

    pub fn re(c: Term) -> Formula {
        Formula::Re(c)
    }

    pub fn cl(c: Term) -> Formula {
        Formula::Cl(c)
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn hchop(a: Formula, b: Formula) -> Formula {
        Formula::ChopH(Box::new(a), Box::new(b))
    }

    pub fn vchop(lower: Formula, upper: Formula) -> Formula {
        Formula::ChopV {
            lower: Box::new(lower),
            upper: Box::new(upper),
        }
    }

    pub fn boxm(m: Modality, a: Formula) -> Formula {
        Formula::BoxM(m, Box::new(a))
    }

    pub fn diamond(m: Modality, a: Formula) -> Formula {
        Formula::DiamondM(m, Box::new(a))
    }

    pub fn somewhere(a: Formula) -> Formula {
        Formula::Somewhere(Box::new(a))
    }

    pub fn everywhere(a: Formula) -> Formula {
        Formula::Everywhere(Box::new(a))
    }

    pub fn diamond_l(a: Formula) -> Formula {
        Formula::DiamondL(Box::new(a))
    }

    pub fn box_l(a: Formula) -> Formula {
        Formula::BoxL(Box::new(a))
    }

    pub fn restrict(a: Formula, t: Term) -> Formula {
        Formula::Restrict(Box::new(a), t)
    }

    /// Left-nested horizontal chop of all parts; `top` when empty.
    pub fn hchain(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::hchop).unwrap_or(Formula::Top)
    }

    /// Left-nested vertical chop, lowest lane first; `top` when empty.
    pub fn vchain(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::vchop).unwrap_or(Formula::Top)
    }

    /// Left-nested conjunction; `top` when empty.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; `bot` when empty.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::or).unwrap_or(Formula::Bot)
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            Bot | Top | Free | Eq(..) | Neq(..) | Re(_) | Cl(_) | LengthLt(_) | LengthGt(_) | WidthLt(_)
            | WidthGt(_) => vec![],
            Implies(a, b) | And(a, b) | Or(a, b) | Iff(a, b) | ChopH(a, b) => vec![a, b],
            ChopV { lower, upper } => vec![lower, upper],
            Forall(_, a) | Exists(_, a) | BoxM(_, a) | DiamondM(_, a) | Not(a) | Somewhere(a) | Everywhere(a)
            | DiamondL(a) | BoxL(a) | Restrict(a, _) => vec![a],
        }
    }

    /// Terms occurring directly in this node (not in subformulas).
    pub fn own_terms(&self) -> Vec<&Term> {
        use Formula::*;
        match self {
            Eq(a, b) | Neq(a, b) => vec![a, b],
            Re(c) | Cl(c) | LengthLt(c) | LengthGt(c) | WidthLt(c) | WidthGt(c) | Restrict(_, c) => vec![c],
            BoxM(m, _) | DiamondM(m, _) => m.car().into_iter().collect(),
            _ => vec![],
        }
    }

    /// Checks the sort discipline of equalities, atoms, modalities and `+`.
    pub fn check_sorts(&self) -> Result<(), SyntaxError> {
        use Formula::*;
        match self {
            Eq(a, b) | Neq(a, b) => {
                let (sa, sb) = (a.check_sorts()?, b.check_sorts()?);
                if sa != sb {
                    return Err(SyntaxError::Sort(format!("`{a}` is a {sa} term but `{b}` is a {sb} term")));
                }
            }
            Re(c) | Cl(c) => expect_car(c)?,
            BoxM(m, _) | DiamondM(m, _) => {
                if let Some(c) = m.car() {
                    expect_car(c)?;
                }
            }
            LengthLt(t) | LengthGt(t) | WidthLt(t) | WidthGt(t) | Restrict(_, t) => {
                let s = t.check_sorts()?;
                if s != Sort::Real {
                    return Err(SyntaxError::Sort(format!("`{t}` is a {s} term, expected real")));
                }
            }
            _ => {}
        }
        self.children().into_iter().try_for_each(Formula::check_sorts)
    }
}

fn expect_car(c: &Term) -> Result<(), SyntaxError> {
    match c {
        Term::Ego => Ok(()),
        Term::Var(v) if v.sort == Sort::Car => Ok(()),
        other => Err(SyntaxError::Sort(format!("`{other}` is not a car variable or ego"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("sort error: {0}")]
    Sort(String),
    #[error("cannot substitute a {found} term for the {expected} variable `{var}`")]
    SortMismatch { var: String, expected: Sort, found: Sort },
}

/// Declared sorts of free variables, used by the parser.
pub type SortContext = std::collections::BTreeMap<String, Sort>;

/// The sort context that makes `parse_formula_in(f.to_string(), ctx)` return `f`.
pub fn context_of(f: &Formula) -> SortContext {
    free_vars(f).into_iter().map(|v| (v.name, v.sort)).collect()
}

pub(crate) fn var_names(f: &Formula, out: &mut BTreeSet<String>) {
    fn term_names(t: &Term, out: &mut BTreeSet<String>) {
        match t {
            Term::Var(v) => {
                out.insert(v.name.clone());
            }
            Term::Plus(a, b) => {
                term_names(a, out);
                term_names(b, out);
            }
            _ => {}
        }
    }
    if let Formula::Forall(v, _) | Formula::Exists(v, _) = f {
        out.insert(v.name.clone());
    }
    for t in f.own_terms() {
        term_names(t, out);
    }
    for c in f.children() {
        var_names(c, out);
    }
}
