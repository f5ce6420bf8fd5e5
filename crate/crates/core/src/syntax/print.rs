use std::fmt::{self, Write};

use super::{Formula, Modality, Term};
use crate::rational;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::LaneConst(n) => write!(f, "#{n}"),
            Term::RealConst(q) => f.write_str(&rational::format(q)),
            Term::Ego => f.write_str("ego"),
            Term::Var(v) => f.write_str(&v.name),
            Term::Length => f.write_str("l"),
            Term::Width => f.write_str("w"),
            Term::Plus(a, b) => {
                write!(f, "{a} + ")?;
                if matches!(**b, Term::Plus(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.car() {
            Some(c) => write!(f, "{}({c})", self.keyword()),
            None => f.write_str(self.keyword()),
        }
    }
}

const QUANT: u8 = 0;
const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const VCHOP: u8 = 5;
const HCHOP: u8 = 6;
const RESTRICT: u8 = 7;
const UNARY: u8 = 8;
const ATOM: u8 = 9;

fn prec(f: &Formula) -> u8 {
    use Formula::*;
    match f {
        Forall(..) | Exists(..) => QUANT,
        Iff(..) => IFF,
        Implies(..) => IMPLIES,
        Or(..) => OR,
        And(..) => AND,
        ChopV { .. } => VCHOP,
        ChopH(..) => HCHOP,
        Restrict(..) => RESTRICT,
        Not(_) | BoxM(..) | DiamondM(..) | Somewhere(_) | Everywhere(_) | DiamondL(_) | BoxL(_) => UNARY,
        _ => ATOM,
    }
}

fn child(out: &mut String, f: &Formula, min: u8) {
    if prec(f) < min {
        out.push('(');
        write_formula(out, f);
        out.push(')');
    } else {
        write_formula(out, f);
    }
}

fn binary(out: &mut String, a: &Formula, op: &str, b: &Formula, left_min: u8, right_min: u8) {
    child(out, a, left_min);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    child(out, b, right_min);
}

fn unary(out: &mut String, prefix: &str, a: &Formula) {
    out.push_str(prefix);
    out.push(' ');
    child(out, a, UNARY);
}

fn write_formula(out: &mut String, f: &Formula) {
    use Formula::*;
    match f {
        Bot => out.push_str("bot"),
        Top => out.push_str("top"),
        Free => out.push_str("free"),
        Eq(a, b) => write!(out, "{a} = {b}").unwrap(),
        Neq(a, b) => write!(out, "{a} != {b}").unwrap(),
        LengthLt(t) => write!(out, "l < {t}").unwrap(),
        LengthGt(t) => write!(out, "l > {t}").unwrap(),
        WidthLt(t) => write!(out, "w < {t}").unwrap(),
        WidthGt(t) => write!(out, "w > {t}").unwrap(),
        Re(c) => write!(out, "re({c})").unwrap(),
        Cl(c) => write!(out, "cl({c})").unwrap(),
        Implies(a, b) => binary(out, a, "->", b, IMPLIES + 1, IMPLIES),
        Iff(a, b) => binary(out, a, "<->", b, IFF + 1, IFF + 1),
        Or(a, b) => binary(out, a, "or", b, OR, OR + 1),
        And(a, b) => binary(out, a, "and", b, AND, AND + 1),
        ChopV { lower, upper } => binary(out, lower, "||", upper, VCHOP, VCHOP + 1),
        ChopH(a, b) => binary(out, a, "~", b, HCHOP, HCHOP + 1),
        Forall(v, body) | Exists(v, body) => {
            let q = if matches!(f, Forall(..)) { "forall" } else { "exists" };
            write!(out, "{q} {}:{}. ", v.name, v.sort).unwrap();
            child(out, body, QUANT);
        }
        Restrict(a, t) => {
            child(out, a, RESTRICT);
            write!(out, " ^ {t}").unwrap();
        }
        Not(a) => unary(out, "not", a),
        BoxM(m, a) => unary(out, &format!("[{m}]"), a),
        DiamondM(m, a) => unary(out, &format!("<{m}>"), a),
        Somewhere(a) => unary(out, "somewhere", a),
        Everywhere(a) => unary(out, "everywhere", a),
        DiamondL(a) => unary(out, "<l>", a),
        BoxL(a) => unary(out, "[l]", a),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_formula(&mut out, self);
        f.write_str(&out)
    }
}
