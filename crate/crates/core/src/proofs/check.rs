use std::collections::BTreeSet;

use num_traits::Signed;

use super::{CheckError, CheckErrorKind as K, Dir, Judgment, Label, Node, ProofScript, Source};
use crate::rational::Rational;
use crate::syntax::{
    context_of, dri, equivalent, free_vars, hcf, hri, hri_term, parse_term_in, substitute, vcf, vri, vri_term,
    Formula, Modality, Term, Var,
};

/// Rule names understood by the checker.
pub const RULES: &[&str] = &[
    "top-I", "refl", "bot-E", "imp-I", "imp-E", "not-I", "not-E", "raa", "and-I", "and-E1", "and-E2", "or-I1",
    "or-I2", "or-E", "iff-I", "iff-E1", "iff-E2", "equiv", "forall-I", "forall-E", "exists-I", "exists-E",
    "hchop-I", "hchop-E", "vchop-I", "vchop-E", "hdec", "vdec", "hexists-E", "vexists-E", "RH", "RV", "RD", "HD",
    "VD", "H+I", "H+E", "V+I", "V+E", "box-I", "box-E", "r-stab", "c-stab", "wd_r-stab", "wd_c-stab",
    "r-stab-back", "c-stab-back", "wd_r-stab-back", "wd_c-stab-back", "r-act1", "r-act2", "c-act", "wd_r-act",
    "wd_c-act", "r-back", "c-back", "wd_r-back",
];

#[derive(Clone, Debug)]
pub(crate) struct Open {
    pub name: String,
    pub judgment: Judgment,
    pub index: Option<u32>,
    pub path: Vec<String>,
}

/// Bookkeeping a rule instance asks of the checker.
#[derive(Default)]
struct Shape {
    /// Per premise, the judgments hypotheses discharged there must match.
    discharge: Vec<Vec<Judgment>>,
    fresh: Vec<Fresh>,
}

enum Eigen {
    Snapshot(String),
    View(String),
    Var(Var),
}

struct Fresh {
    eigen: Eigen,
    /// Premises whose own judgment must avoid the eigen-entity.
    majors: Vec<usize>,
    /// Premises whose remaining open assumptions must avoid it.
    minors: Vec<usize>,
}

impl Eigen {
    fn name(&self) -> String {
        match self {
            Eigen::Snapshot(s) | Eigen::View(s) => s.clone(),
            Eigen::Var(v) => v.name.clone(),
        }
    }

    fn occurs_in(&self, j: &Judgment) -> bool {
        match self {
            Eigen::Snapshot(s) => j.mentions_snapshot(s),
            Eigen::View(v) => j.mentions_view(v),
            Eigen::Var(x) => match j {
                Judgment::Holds { formula, .. } => free_vars(formula).contains(x),
                Judgment::Trans { modality, .. } => matches!(modality.car(), Some(Term::Var(y)) if y == x),
                _ => false,
            },
        }
    }
}

type R<T> = Result<T, K>;

fn mismatch<T>(msg: impl Into<String>) -> R<T> {
    Err(K::ShapeMismatch(msg.into()))
}

fn side<T>(which: &str, detail: impl Into<String>) -> R<T> {
    Err(K::SideConditionViolated {
        which: which.into(),
        detail: detail.into(),
    })
}

fn same(a: &Formula, b: &Formula) -> bool {
    a == b || equivalent(a, b)
}

fn expect(actual: &Formula, expected: &Formula, what: &str) -> R<()> {
    if same(actual, expected) {
        Ok(())
    } else {
        mismatch(format!("{what}: expected `{expected}`, found `{actual}`"))
    }
}

fn holds(j: &Judgment, what: &str) -> R<(Label, Formula)> {
    match j {
        Judgment::Holds { label, formula } => Ok((label.clone(), formula.clone())),
        other => mismatch(format!("{what} must be a labelled formula, found `{other}`")),
    }
}

fn at(l: &Label, expected: &Label, what: &str) -> R<()> {
    if l == expected {
        Ok(())
    } else {
        mismatch(format!("{what} is labelled {l}, expected {expected}"))
    }
}

fn trans(j: &Judgment, what: &str) -> R<(Label, Modality, Label)> {
    match j {
        Judgment::Trans { from, modality, to } => Ok((from.clone(), modality.clone(), to.clone())),
        other => mismatch(format!("{what} must be a transition, found `{other}`")),
    }
}

fn chop_rel(j: &Judgment, dir: Dir, what: &str) -> R<(String, String, String)> {
    match j {
        Judgment::Chop {
            dir: d,
            first,
            second,
            whole,
        } if *d == dir => Ok((first.clone(), second.clone(), whole.clone())),
        other => mismatch(format!("{what} must be a {} relation, found `{other}`", dir.keyword())),
    }
}

fn as_not(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::Not(a) => Some(a),
        Formula::Implies(a, b) if **b == Formula::Bot => Some(a),
        _ => None,
    }
}

fn as_binary(f: &Formula, op: &str) -> Option<(Formula, Formula)> {
    match (op, f) {
        ("->", Formula::Implies(a, b)) => Some(((**a).clone(), (**b).clone())),
        ("and", Formula::And(a, b)) | ("or", Formula::Or(a, b)) | ("<->", Formula::Iff(a, b)) => {
            Some(((**a).clone(), (**b).clone()))
        }
        ("~", Formula::ChopH(a, b)) => Some(((**a).clone(), (**b).clone())),
        ("||", Formula::ChopV { lower, upper }) => Some(((**lower).clone(), (**upper).clone())),
        _ => None,
    }
}

fn binary(f: &Formula, op: &str, what: &str) -> R<(Formula, Formula)> {
    as_binary(f, op).ok_or_else(|| K::ShapeMismatch(format!("{what} must have the form `A {op} B`, found `{f}`")))
}

fn chop_op(dir: Dir) -> &'static str {
    match dir {
        Dir::H => "~",
        Dir::V => "||",
    }
}

fn measure(dir: Dir) -> Term {
    match dir {
        Dir::H => Term::Length,
        Dir::V => Term::Width,
    }
}

fn measure_eq(f: &Formula, m: &Term) -> Option<Term> {
    match f {
        Formula::Eq(a, b) if a == m => Some(b.clone()),
        Formula::Eq(a, b) if b == m => Some(a.clone()),
        _ => None,
    }
}

fn rigid_term(dir: Dir, t: &Term) -> bool {
    match dir {
        Dir::H => hri_term(t),
        Dir::V => vri_term(t),
    }
}

fn rigid(dir: Dir, f: &Formula) -> bool {
    match dir {
        Dir::H => hri(f),
        Dir::V => vri(f),
    }
}

fn const_value(t: &Term) -> Option<Rational> {
    match t {
        Term::RealConst(q) => Some(q.clone()),
        Term::Plus(a, b) => Some(const_value(a)? + const_value(b)?),
        _ => None,
    }
}

struct Ctx<'a> {
    node: &'a Node,
    prem: Vec<&'a Judgment>,
    vars: &'a crate::syntax::SortContext,
}

impl Ctx<'_> {
    fn arity(&self, n: usize) -> R<()> {
        if self.prem.len() == n {
            Ok(())
        } else {
            mismatch(format!("`{}` takes {n} premises, {} given", self.node.rule, self.prem.len()))
        }
    }

    fn concl(&self) -> &Judgment {
        &self.node.conclusion
    }

    fn concl_holds(&self) -> R<(Label, Formula)> {
        holds(self.concl(), "the conclusion")
    }

    fn p(&self, i: usize, what: &str) -> R<(Label, Formula)> {
        holds(self.prem[i], what)
    }

    fn same_as_conclusion(&self, i: usize) -> R<()> {
        if self.prem[i].matches(self.concl()) {
            Ok(())
        } else {
            mismatch(format!("premise {} must equal the conclusion `{}`", i + 1, self.concl()))
        }
    }

    fn with_term(&self, extra: &Formula) -> R<Term> {
        let text = self
            .node
            .with
            .as_deref()
            .ok_or_else(|| K::ShapeMismatch(format!("`{}` needs with={{term}}", self.node.rule)))?;
        let mut vars = context_of(extra);
        vars.extend(self.vars.iter().map(|(k, v)| (k.clone(), *v)));
        parse_term_in(text, &vars).map_err(|e| K::ShapeMismatch(format!("bad term `{text}`: {e}")))
    }

    fn with_views(&self) -> R<(String, String)> {
        let text = self.node.with.as_deref().unwrap_or("");
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [a, b] if !a.is_empty() && !b.is_empty() && a != b => Ok((a.to_string(), b.to_string())),
            _ => mismatch(format!("`{}` needs with={{V1,V2}} naming two distinct views", self.node.rule)),
        }
    }
}

fn substituted(body: &Formula, x: &Var, s: &Term) -> R<Formula> {
    substitute(body, x, s).map_err(|e| K::ShapeMismatch(e.to_string()))
}

fn instance_side_conditions(body: &Formula, x: &Var, s: &Term) -> R<()> {
    if s.sort() != x.sort || s.check_sorts().is_err() {
        return side("sort", format!("`{s}` does not have sort {}", x.sort));
    }
    let ok = (hcf(body) && vri_term(s))
        || (vcf(body) && hri_term(s))
        || (hcf(body) && vcf(body))
        || (hri_term(s) && vri_term(s));
    if ok {
        Ok(())
    } else {
        side(
            "instantiation",
            format!("`{s}` is not rigid enough for the chops in `{body}`"),
        )
    }
}

fn rule_prop(c: &Ctx) -> R<Shape> {
    let rule = c.node.rule.as_str();
    let mut shape = Shape::default();
    match rule {
        "top-I" => {
            c.arity(0)?;
            let (_, f) = c.concl_holds()?;
            expect(&f, &Formula::Top, "the conclusion")?;
        }
        "refl" => {
            c.arity(0)?;
            match c.concl_holds()?.1 {
                Formula::Eq(a, b) if a == b => {}
                f => return mismatch(format!("`refl` concludes `t = t`, found `{f}`")),
            }
        }
        "bot-E" => {
            c.arity(1)?;
            expect(&c.p(0, "the premise")?.1, &Formula::Bot, "the premise")?;
            c.concl_holds()?;
        }
        "imp-I" => {
            c.arity(1)?;
            let (l, f) = c.concl_holds()?;
            let (a, b) = binary(&f, "->", "the conclusion")?;
            let (l0, f0) = c.p(0, "the premise")?;
            at(&l0, &l, "the premise")?;
            expect(&f0, &b, "the premise")?;
            shape.discharge = vec![vec![Judgment::Holds { label: l, formula: a }]];
        }
        "imp-E" => {
            c.arity(2)?;
            let (l, f) = c.concl_holds()?;
            let (l0, f0) = c.p(0, "the implication")?;
            let (a, b) = binary(&f0, "->", "the first premise")?;
            let (l1, f1) = c.p(1, "the antecedent")?;
            at(&l0, &l, "the implication")?;
            at(&l1, &l, "the antecedent")?;
            expect(&f1, &a, "the antecedent")?;
            expect(&f, &b, "the conclusion")?;
        }
        "not-I" => {
            c.arity(1)?;
            let (l, f) = c.concl_holds()?;
            let a = as_not(&f).ok_or_else(|| K::ShapeMismatch(format!("`not-I` concludes a negation, found `{f}`")))?;
            expect(&c.p(0, "the premise")?.1, &Formula::Bot, "the premise")?;
            shape.discharge = vec![vec![Judgment::Holds {
                label: l,
                formula: a.clone(),
            }]];
        }
        "not-E" => {
            c.arity(2)?;
            let (l0, f0) = c.p(0, "the first premise")?;
            let (l1, f1) = c.p(1, "the second premise")?;
            at(&l1, &l0, "the negation")?;
            expect(&f1, &Formula::not(f0), "the negation")?;
            expect(&c.concl_holds()?.1, &Formula::Bot, "the conclusion")?;
        }
        "raa" => {
            c.arity(1)?;
            let (l, f) = c.concl_holds()?;
            expect(&c.p(0, "the premise")?.1, &Formula::Bot, "the premise")?;
            shape.discharge = vec![vec![Judgment::Holds {
                label: l,
                formula: Formula::not(f),
            }]];
        }
        "and-I" => {
            c.arity(2)?;
            let (l, f) = c.concl_holds()?;
            let (a, b) = binary(&f, "and", "the conclusion")?;
            for (i, g) in [a, b].iter().enumerate() {
                let (li, fi) = c.p(i, "a conjunct")?;
                at(&li, &l, "a conjunct")?;
                expect(&fi, g, "a conjunct")?;
            }
        }
        "and-E1" | "and-E2" | "iff-E1" | "iff-E2" => {
            c.arity(1)?;
            let (l, f) = c.concl_holds()?;
            let (l0, f0) = c.p(0, "the premise")?;
            at(&l0, &l, "the premise")?;
            let op = if rule.starts_with("and") { "and" } else { "<->" };
            let (a, b) = binary(&f0, op, "the premise")?;
            let want = match rule {
                "and-E1" => a,
                "and-E2" => b,
                "iff-E1" => Formula::implies(a, b),
                _ => Formula::implies(b, a),
            };
            expect(&f, &want, "the conclusion")?;
        }
        "or-I1" | "or-I2" => {
            c.arity(1)?;
            let (l, f) = c.concl_holds()?;
            let (a, b) = binary(&f, "or", "the conclusion")?;
            let (l0, f0) = c.p(0, "the premise")?;
            at(&l0, &l, "the premise")?;
            expect(&f0, if rule == "or-I1" { &a } else { &b }, "the premise")?;
        }
        "or-E" => {
            c.arity(3)?;
            let (l, f) = c.p(0, "the disjunction")?;
            let (a, b) = binary(&f, "or", "the first premise")?;
            c.same_as_conclusion(1)?;
            c.same_as_conclusion(2)?;
            shape.discharge = vec![
                vec![],
                vec![Judgment::Holds {
                    label: l.clone(),
                    formula: a,
                }],
                vec![Judgment::Holds { label: l, formula: b }],
            ];
        }
        "iff-I" => {
            c.arity(2)?;
            let (l, f) = c.concl_holds()?;
            let (a, b) = binary(&f, "<->", "the conclusion")?;
            for (i, g) in [Formula::implies(a.clone(), b.clone()), Formula::implies(b, a)].iter().enumerate() {
                let (li, fi) = c.p(i, "a direction")?;
                at(&li, &l, "a direction")?;
                expect(&fi, g, "a direction")?;
            }
        }
        "equiv" => {
            c.arity(1)?;
            let (l, f) = c.concl_holds()?;
            let (l0, f0) = c.p(0, "the premise")?;
            at(&l0, &l, "the premise")?;
            if !equivalent(&f0, &f) {
                return side("equivalence", format!("`{f0}` and `{f}` are not equivalent"));
            }
        }
        _ => unreachable!(),
    }
    Ok(shape)
}

fn rule_quant(c: &Ctx) -> R<Shape> {
    let rule = c.node.rule.as_str();
    let mut shape = Shape::default();
    match rule {
        "forall-E" | "exists-I" => {
            c.arity(1)?;
            let (l, f) = c.concl_holds()?;
            let (l0, f0) = c.p(0, "the premise")?;
            at(&l0, &l, "the premise")?;
            let (quantified, instance) = if rule == "forall-E" { (&f0, &f) } else { (&f, &f0) };
            let (x, body) = match (rule, quantified) {
                ("forall-E", Formula::Forall(x, b)) | ("exists-I", Formula::Exists(x, b)) => (x.clone(), (**b).clone()),
                (_, g) => return mismatch(format!("`{rule}` needs a quantified formula, found `{g}`")),
            };
            let s = c.with_term(&body)?;
            instance_side_conditions(&body, &x, &s)?;
            expect(instance, &substituted(&body, &x, &s)?, "the instance")?;
        }
        "forall-I" => {
            c.arity(1)?;
            let (l, f) = c.concl_holds()?;
            let Formula::Forall(x, body) = &f else {
                return mismatch(format!("`forall-I` concludes a universal formula, found `{f}`"));
            };
            let y = eigen_var(c, body, x)?;
            let (l0, f0) = c.p(0, "the premise")?;
            at(&l0, &l, "the premise")?;
            expect(&f0, &substituted(body, x, &Term::Var(y.clone()))?, "the premise")?;
            if &y != x && free_vars(&f).contains(&y) {
                return Err(K::FreshnessViolation {
                    name: y.name,
                    detail: "occurs free in the conclusion".into(),
                });
            }
            shape.fresh.push(Fresh {
                eigen: Eigen::Var(y),
                majors: vec![],
                minors: vec![0],
            });
        }
        "exists-E" => {
            c.arity(2)?;
            let (l0, f0) = c.p(0, "the existential")?;
            let Formula::Exists(x, body) = &f0 else {
                return mismatch(format!("`exists-E` needs an existential premise, found `{f0}`"));
            };
            let y = eigen_var(c, body, x)?;
            c.same_as_conclusion(1)?;
            shape.discharge = vec![
                vec![],
                vec![Judgment::Holds {
                    label: l0,
                    formula: substituted(body, x, &Term::Var(y.clone()))?,
                }],
            ];
            if &y != x && free_vars(&f0).contains(&y) {
                return Err(K::FreshnessViolation {
                    name: y.name,
                    detail: "occurs free in the existential premise".into(),
                });
            }
            shape.fresh.push(Fresh {
                eigen: Eigen::Var(y),
                majors: vec![],
                minors: vec![1],
            });
        }
        _ => unreachable!(),
    }
    Ok(shape)
}

fn eigen_var(c: &Ctx, body: &Formula, x: &Var) -> R<Var> {
    match c.with_term(body)? {
        Term::Var(y) if y.sort == x.sort => Ok(y),
        t => mismatch(format!("the eigenvariable must be a variable of sort {}, found `{t}`", x.sort)),
    }
}

fn rule_spatial(c: &Ctx) -> R<Shape> {
    let rule = c.node.rule.as_str();
    let dir = if rule.starts_with('h') || rule.starts_with('H') || rule == "RH" {
        Dir::H
    } else {
        Dir::V
    };
    let mut shape = Shape::default();
    match rule {
        "hchop-I" | "vchop-I" => {
            c.arity(3)?;
            let (l, f) = c.concl_holds()?;
            let (a, b) = binary(&f, chop_op(dir), "the conclusion")?;
            let (v1, v2, v) = chop_rel(c.prem[2], dir, "the third premise")?;
            if v != l.view {
                return mismatch(format!("the relation decomposes {v}, not {}", l.view));
            }
            for (i, (g, view)) in [(a, v1), (b, v2)].into_iter().enumerate() {
                let (li, fi) = c.p(i, "a part")?;
                at(&li, &Label::new(l.snapshot.clone(), view), "a part")?;
                expect(&fi, &g, "a part")?;
            }
        }
        "hchop-E" | "vchop-E" => {
            if c.prem.len() < 2 {
                return mismatch(format!("`{rule}` takes a chop and at least one subderivation"));
            }
            let (l, f) = c.p(0, "the chop")?;
            let (a, b) = binary(&f, chop_op(dir), "the first premise")?;
            let (v1, v2) = c.with_views()?;
            let hyps = vec![
                Judgment::holds(&l.snapshot, &v1, a),
                Judgment::holds(&l.snapshot, &v2, b),
                chop_judgment(dir, &v1, &v2, &l.view),
            ];
            shape.discharge.push(vec![]);
            for i in 1..c.prem.len() {
                c.same_as_conclusion(i)?;
                shape.discharge.push(hyps.clone());
            }
            eigen_views(&mut shape, &v1, &v2, c.prem.len());
        }
        "hdec" | "vdec" => {
            c.arity(0)?;
            match c.concl() {
                Judgment::Decomposable { dir: d, .. } if *d == dir => {}
                j => return mismatch(format!("`{rule}` concludes `exists {}(V)`, found `{j}`", dir.keyword())),
            }
        }
        "hexists-E" | "vexists-E" => {
            c.arity(2)?;
            let view = match c.prem[0] {
                Judgment::Decomposable { dir: d, view } if *d == dir => view.clone(),
                j => return mismatch(format!("the first premise must be `exists {}(V)`, found `{j}`", dir.keyword())),
            };
            c.same_as_conclusion(1)?;
            let (v1, v2) = c.with_views()?;
            shape.discharge = vec![vec![], vec![chop_judgment(dir, &v1, &v2, &view)]];
            eigen_views(&mut shape, &v1, &v2, 2);
        }
        "RH" | "RV" => {
            c.arity(2)?;
            let (l, f) = c.concl_holds()?;
            let (l0, f0) = c.p(0, "the formula")?;
            let (v1, v2, v) = chop_rel(c.prem[1], dir, "the second premise")?;
            let pairs = [(&v, &v1), (&v, &v2), (&v1, &v), (&v2, &v)];
            if !pairs.iter().any(|(from, to)| **from == l0.view && **to == l.view) {
                return mismatch(format!(
                    "`{rule}` moves between {v} and its parts {v1}, {v2}; found {} to {}",
                    l0.view, l.view
                ));
            }
            expect(&f, &f0, "the conclusion")?;
            if !rigid(dir, &f0) {
                let which = if dir == Dir::H { "hri" } else { "vri" };
                return side(which, format!("`{f0}` is not rigid"));
            }
        }
        "RD" => {
            c.arity(1)?;
            let (l, f) = c.concl_holds()?;
            let (l0, f0) = c.p(0, "the premise")?;
            if l0.view != l.view {
                return mismatch("`RD` keeps the view");
            }
            expect(&f, &f0, "the conclusion")?;
            if !dri(&f0) {
                return side("dri", format!("`{f0}` is not dynamically rigid"));
            }
        }
        "HD" | "VD" => {
            c.arity(5)?;
            let m = measure(dir);
            let (l, f) = c.concl_holds()?;
            let (l0, f0) = c.p(0, "the formula")?;
            let (l1, f1) = c.p(1, "the first measure")?;
            let (l2, f2) = c.p(2, "the second measure")?;
            let (a1, a2, a) = chop_rel(c.prem[3], dir, "the fourth premise")?;
            let (b1, b2, b) = chop_rel(c.prem[4], dir, "the fifth premise")?;
            if a != b {
                return mismatch(format!("the two relations decompose {a} and {b}"));
            }
            for li in [&l0, &l1, &l2] {
                if li.snapshot != l.snapshot {
                    return mismatch("all premises share the snapshot of the conclusion");
                }
            }
            let views = (l0.view.as_str(), l1.view.as_str(), l2.view.as_str(), l.view.as_str());
            let first = (a1.as_str(), a2.as_str(), b2.as_str(), b1.as_str());
            let second = (a2.as_str(), a1.as_str(), b1.as_str(), b2.as_str());
            if views != first && views != second {
                return mismatch(format!("`{rule}` views do not line up with the two decompositions"));
            }
            let s1 = measure_eq(&f1, &m).ok_or_else(|| K::ShapeMismatch(format!("expected `{m} = s`, found `{f1}`")))?;
            let s2 = measure_eq(&f2, &m).ok_or_else(|| K::ShapeMismatch(format!("expected `{m} = s`, found `{f2}`")))?;
            if s1 != s2 {
                return mismatch(format!("the measures `{s1}` and `{s2}` differ"));
            }
            let which = if dir == Dir::H { "hri" } else { "vri" };
            let rigid_ok = match dir {
                Dir::H => hri_term(&s1),
                Dir::V => vri_term(&s1),
            };
            if !rigid_ok {
                return side(which, format!("`{s1}` is not rigid"));
            }
            expect(&f, &f0, "the conclusion")?;
        }
        "H+I" | "V+I" => {
            c.arity(3)?;
            let m = measure(dir);
            let (l, f) = c.concl_holds()?;
            let (v1, v2, v) = chop_rel(c.prem[2], dir, "the third premise")?;
            if v != l.view {
                return mismatch(format!("the relation decomposes {v}, not {}", l.view));
            }
            let mut parts = vec![];
            for (i, view) in [v1, v2].into_iter().enumerate() {
                let (li, fi) = c.p(i, "a part")?;
                at(&li, &Label::new(l.snapshot.clone(), view), "a part")?;
                let s = measure_eq(&fi, &m).ok_or_else(|| K::ShapeMismatch(format!("expected `{m} = s`, found `{fi}`")))?;
                if !rigid_term(dir, &s) {
                    return side(if dir == Dir::H { "hri" } else { "vri" }, format!("`{s}` is not rigid"));
                }
                parts.push(s);
            }
            let sum = Term::plus(parts[0].clone(), parts[1].clone());
            expect(&f, &Formula::eq(m, sum), "the conclusion")?;
        }
        "H+E" | "V+E" => {
            c.arity(2)?;
            let m = measure(dir);
            let (l, f) = c.p(0, "the sum")?;
            let (s, t) = match measure_eq(&f, &m) {
                Some(Term::Plus(s, t)) => (*s, *t),
                _ => return mismatch(format!("expected `{m} = s + t`, found `{f}`")),
            };
            for u in [&s, &t] {
                let ok = match (dir, const_value(u)) {
                    (Dir::H, Some(q)) => !q.is_negative(),
                    (Dir::V, Some(q)) => q.is_integer() && !q.is_negative(),
                    _ => false,
                };
                if !ok {
                    let want = if dir == Dir::H { "a nonnegative constant" } else { "a natural constant" };
                    return side("summand", format!("`{u}` is not {want}"));
                }
            }
            c.same_as_conclusion(1)?;
            let (v1, v2) = c.with_views()?;
            shape.discharge = vec![
                vec![],
                vec![
                    Judgment::holds(&l.snapshot, &v1, Formula::eq(m.clone(), s)),
                    Judgment::holds(&l.snapshot, &v2, Formula::eq(m, t)),
                    chop_judgment(dir, &v1, &v2, &l.view),
                ],
            ];
            eigen_views(&mut shape, &v1, &v2, 2);
        }
        _ => unreachable!(),
    }
    Ok(shape)
}

fn chop_judgment(dir: Dir, first: &str, second: &str, whole: &str) -> Judgment {
    Judgment::Chop {
        dir,
        first: first.into(),
        second: second.into(),
        whole: whole.into(),
    }
}

fn eigen_views(shape: &mut Shape, v1: &str, v2: &str, premises: usize) {
    for v in [v1, v2] {
        shape.fresh.push(Fresh {
            eigen: Eigen::View(v.to_string()),
            majors: vec![0],
            minors: (1..premises).collect(),
        });
    }
}

fn rule_box(c: &Ctx) -> R<Shape> {
    let mut shape = Shape::default();
    match c.node.rule.as_str() {
        "box-E" => {
            c.arity(2)?;
            let (from, m, to) = trans(c.prem[0], "the first premise")?;
            let (l1, f1) = c.p(1, "the box")?;
            at(&l1, &from, "the box")?;
            let Formula::BoxM(m1, body) = &f1 else {
                return mismatch(format!("the second premise must be a box formula, found `{f1}`"));
            };
            if *m1 != m {
                return mismatch(format!("the box [{m1}] does not match the transition {m}"));
            }
            let (l, f) = c.concl_holds()?;
            at(&l, &to, "the conclusion")?;
            expect(&f, body, "the conclusion")?;
        }
        "box-I" => {
            c.arity(1)?;
            let (l, f) = c.concl_holds()?;
            let Formula::BoxM(m, body) = &f else {
                return mismatch(format!("`box-I` concludes a box formula, found `{f}`"));
            };
            let (l0, f0) = c.p(0, "the premise")?;
            expect(&f0, body, "the premise")?;
            if *m != Modality::Tau && l0.view != l.view {
                return mismatch("discrete transitions keep the view");
            }
            if l0.snapshot == l.snapshot {
                return Err(K::FreshnessViolation {
                    name: l0.snapshot,
                    detail: "the reached snapshot must differ from the origin".into(),
                });
            }
            shape.discharge = vec![vec![Judgment::Trans {
                from: l.clone(),
                modality: m.clone(),
                to: l0.clone(),
            }]];
            shape.fresh.push(Fresh {
                eigen: Eigen::Snapshot(l0.snapshot.clone()),
                majors: vec![],
                minors: vec![0],
            });
            if *m == Modality::Tau && l0.view != l.view {
                shape.fresh.push(Fresh {
                    eigen: Eigen::View(l0.view.clone()),
                    majors: vec![],
                    minors: vec![0],
                });
            }
        }
        _ => unreachable!(),
    }
    Ok(shape)
}

fn first_car(f: &Formula) -> Option<Term> {
    match f {
        Formula::Re(c) | Formula::Cl(c) => Some(c.clone()),
        _ => f.children().into_iter().find_map(first_car),
    }
}

fn car_relation(f: &Formula, c: &Term, d: &Term, equal: bool) -> bool {
    let (a, b) = if equal {
        (Formula::eq(c.clone(), d.clone()), Formula::eq(d.clone(), c.clone()))
    } else {
        (
            Formula::Neq(c.clone(), d.clone()),
            Formula::Neq(d.clone(), c.clone()),
        )
    };
    same(f, &a) || same(f, &b)
}

/// Checks the transition premise at `i` and the optional `c = d` / `c ≠ d`
/// premise at `i + 1`; returns the transition.
fn transition_with_car(c: &Ctx, i: usize, kind: &str, car: &Term, equal: bool) -> R<(Label, Label)> {
    let (from, m, to) = trans(c.prem[i], "the transition premise")?;
    if m.keyword() != kind {
        return mismatch(format!("`{}` needs a {kind}(…) transition, found {m}", c.node.rule));
    }
    let d = m.car().expect("discrete transition").clone();
    match c.prem.get(i + 1) {
        Some(j) => {
            let (l, f) = holds(j, "the car premise")?;
            if l.view != from.view || (l.snapshot != from.snapshot && l.snapshot != to.snapshot) {
                return mismatch(format!("the car premise is labelled {l}, not at the transition"));
            }
            if !car_relation(&f, car, &d, equal) {
                let want = if equal { "=" } else { "!=" };
                return mismatch(format!("expected `{car} {want} {d}`, found `{f}`"));
            }
        }
        None if equal && *car == d => {}
        None => {
            let want = if equal { "=" } else { "!=" };
            return mismatch(format!("missing premise `{car} {want} {d}`"));
        }
    }
    if c.prem.len() > i + 2 {
        return mismatch(format!("`{}` takes at most {} premises", c.node.rule, i + 2));
    }
    Ok((from, to))
}

fn rule_dynamic(c: &Ctx) -> R<Shape> {
    let rule = c.node.rule.as_str();
    let (l, f) = c.concl_holds()?;
    if let Some(kind) = rule.strip_suffix("-stab").or_else(|| rule.strip_suffix("-stab-back")) {
        let back = rule.ends_with("-back");
        if c.prem.len() != 3 {
            return mismatch(format!("`{rule}` takes 3 premises, {} given", c.prem.len()));
        }
        let (l0, f0) = c.p(0, "the atom")?;
        let car = match &f0 {
            Formula::Re(x) | Formula::Cl(x) => x.clone(),
            g => return mismatch(format!("stability applies to `re(c)` or `cl(c)`, found `{g}`")),
        };
        let (from, to) = transition_with_car(c, 1, kind, &car, false)?;
        let (src, dst) = if back { (&to, &from) } else { (&from, &to) };
        at(&l0, src, "the atom")?;
        at(&l, dst, "the conclusion")?;
        if f != f0 {
            return mismatch(format!("the conclusion must repeat `{f0}`"));
        }
        return Ok(Shape::default());
    }

    let car = first_car(&f).ok_or_else(|| K::ShapeMismatch("the conclusion names no car".into()))?;
    let n = || Formula::and(Formula::not(Formula::or(Formula::re(car.clone()), Formula::cl(car.clone()))), Formula::width_is(Term::int(1)));
    let re = || Formula::re(car.clone());
    let cl = || Formula::cl(car.clone());
    let w1 = || Formula::width_is(Term::int(1));
    let (kind, back, pre, post): (&str, bool, Option<Formula>, Formula) = match rule {
        "r-act1" => ("r", false, Some(cl()), re()),
        "r-act2" => ("r", false, Some(re()), re()),
        "c-act" => (
            "c",
            false,
            Some(Formula::vchain([n(), re(), n()])),
            Formula::or(Formula::vchain([cl(), re(), n()]), Formula::vchain([n(), re(), cl()])),
        ),
        "wd_r-act" => (
            "wd_r",
            false,
            Some(Formula::vchop(re(), re())),
            Formula::or(Formula::vchop(re(), Formula::not(re())), Formula::vchop(Formula::not(re()), re())),
        ),
        "wd_c-act" => ("wd_c", false, None, Formula::not(cl())),
        "r-back" => ("r", true, Some(re()), Formula::or(re(), cl())),
        "c-back" => ("c", true, Some(cl()), Formula::not(cl())),
        "wd_r-back" => (
            "wd_r",
            true,
            Some(Formula::vchain([w1(), re(), w1()])),
            Formula::or(Formula::vchain([re(), re(), w1()]), Formula::vchain([w1(), re(), re()])),
        ),
        _ => unreachable!(),
    };
    let t = usize::from(pre.is_some());
    if c.prem.len() < t + 1 {
        return mismatch(format!("`{rule}` takes {} or {} premises", t + 1, t + 2));
    }
    let (from, to) = transition_with_car(c, t, kind, &car, true)?;
    let (src, dst) = if back { (&to, &from) } else { (&from, &to) };
    if let Some(pre) = pre {
        let (l0, f0) = c.p(0, "the premise")?;
        at(&l0, src, "the premise")?;
        expect(&f0, &pre, "the premise")?;
    }
    at(&l, dst, "the conclusion")?;
    expect(&f, &post, "the conclusion")?;
    Ok(Shape::default())
}

fn apply_rule(c: &Ctx) -> R<Shape> {
    match c.node.rule.as_str() {
        "top-I" | "refl" | "bot-E" | "imp-I" | "imp-E" | "not-I" | "not-E" | "raa" | "and-I" | "and-E1" | "and-E2"
        | "or-I1" | "or-I2" | "or-E" | "iff-I" | "iff-E1" | "iff-E2" | "equiv" => rule_prop(c),
        "forall-I" | "forall-E" | "exists-I" | "exists-E" => rule_quant(c),
        "hchop-I" | "hchop-E" | "vchop-I" | "vchop-E" | "hdec" | "vdec" | "hexists-E" | "vexists-E" | "RH" | "RV"
        | "RD" | "HD" | "VD" | "H+I" | "H+E" | "V+I" | "V+E" => rule_spatial(c),
        "box-I" | "box-E" => rule_box(c),
        r if RULES.contains(&r) => rule_dynamic(c),
        r => Err(K::UnknownRule(r.to_string())),
    }
}

struct Checker<'a> {
    script: &'a ProofScript,
    stack: Vec<String>,
}

fn fail<T>(path: &[String], kind: K) -> Result<T, CheckError> {
    Err(CheckError {
        path: path.to_vec(),
        kind,
    })
}

impl Checker<'_> {
    fn labels_declared(&self, j: &Judgment, path: &[String]) -> Result<(), CheckError> {
        for s in j.snapshots() {
            if !self.script.snapshots.contains(s) {
                return fail(path, K::UndeclaredLabel(s.to_string()));
            }
        }
        for v in j.views() {
            if !self.script.views.contains(v) {
                return fail(path, K::UndeclaredLabel(v.to_string()));
            }
        }
        Ok(())
    }

    fn visit(&mut self, name: &str, path: &mut Vec<String>) -> Result<(Judgment, Vec<Open>), CheckError> {
        path.push(name.to_string());
        let out = self.visit_inner(name, path);
        path.pop();
        out
    }

    fn visit_inner(&mut self, name: &str, path: &mut Vec<String>) -> Result<(Judgment, Vec<Open>), CheckError> {
        if let Some(a) = self.script.assumptions.get(name) {
            self.labels_declared(&a.judgment, path)?;
            let index = match a.source {
                Source::Hyp(i) => Some(i),
                _ => None,
            };
            let open = Open {
                name: name.to_string(),
                judgment: a.judgment.clone(),
                index,
                path: path.clone(),
            };
            return Ok((a.judgment.clone(), vec![open]));
        }
        let Some(node) = self.script.nodes.get(name) else {
            return fail(path, K::UnjustifiedLeaf(name.to_string()));
        };
        if self.stack.iter().any(|n| n == name) {
            return fail(path, K::Cycle(name.to_string()));
        }
        self.stack.push(name.to_string());
        let mut premises = vec![];
        for p in &node.premises {
            premises.push(self.visit(p, path)?);
        }
        self.stack.pop();
        self.labels_declared(&node.conclusion, path)?;

        let ctx = Ctx {
            node,
            prem: premises.iter().map(|(j, _)| j).collect(),
            vars: &self.script.vars,
        };
        let shape = apply_rule(&ctx).or_else(|k| fail(path, k))?;

        let mut opens: Vec<Vec<Open>> = premises.iter().map(|(_, o)| o.clone()).collect();
        let mut seen = BTreeSet::new();
        for &idx in &node.discharge {
            if !seen.insert(idx) {
                return fail(path, K::BadDischarge { index: idx, detail: "listed twice".into() });
            }
            let declared = self.script.assumptions.values().any(|a| a.source == Source::Hyp(idx));
            if !declared {
                return fail(path, K::BadDischarge { index: idx, detail: "no hypothesis has this index".into() });
            }
            let mut removed = false;
            for (i, open) in opens.iter_mut().enumerate() {
                let allowed = shape.discharge.get(i).map(Vec::as_slice).unwrap_or(&[]);
                if allowed.is_empty() {
                    continue;
                }
                let mut kept = vec![];
                for o in open.drain(..) {
                    if o.index != Some(idx) {
                        kept.push(o);
                    } else if allowed.iter().any(|j| j.matches(&o.judgment)) {
                        removed = true;
                    } else {
                        return fail(
                            path,
                            K::BadDischarge {
                                index: idx,
                                detail: format!("hypothesis `{}` ({}) cannot be discharged here", o.name, o.judgment),
                            },
                        );
                    }
                }
                *open = kept;
            }
            if !removed {
                return fail(path, K::BadDischarge { index: idx, detail: "discharges no open hypothesis".into() });
            }
        }

        for fr in &shape.fresh {
            let clash = |j: &Judgment| fr.eigen.occurs_in(j);
            if clash(&node.conclusion) {
                return fail(
                    path,
                    K::FreshnessViolation {
                        name: fr.eigen.name(),
                        detail: "occurs in the conclusion".into(),
                    },
                );
            }
            for &m in &fr.majors {
                if clash(ctx.prem[m]) {
                    return fail(
                        path,
                        K::FreshnessViolation {
                            name: fr.eigen.name(),
                            detail: format!("occurs in premise {}", m + 1),
                        },
                    );
                }
            }
            for &m in &fr.minors {
                if let Some(o) = opens[m].iter().find(|o| clash(&o.judgment)) {
                    return fail(
                        path,
                        K::FreshnessViolation {
                            name: fr.eigen.name(),
                            detail: format!("occurs in the open assumption `{}`", o.name),
                        },
                    );
                }
            }
        }

        Ok((node.conclusion.clone(), opens.into_iter().flatten().collect()))
    }
}

/// Checks every node reachable from the goal. The goal must not depend on
/// undischarged hypotheses.
pub fn check_script(p: &ProofScript) -> Result<(), CheckError> {
    for a in p.assumptions.values() {
        let checker = Checker { script: p, stack: vec![] };
        checker.labels_declared(&a.judgment, std::slice::from_ref(&a.name))?;
    }
    let mut checker = Checker { script: p, stack: vec![] };
    let mut path = vec![];
    if !p.nodes.contains_key(&p.goal) {
        return fail(&[p.goal.clone()], K::UnjustifiedLeaf(p.goal.clone()));
    }
    let (_, open) = checker.visit(&p.goal, &mut path)?;
    if let Some(o) = open.iter().find(|o| o.index.is_some()) {
        return fail(&o.path, K::UnjustifiedLeaf(o.name.clone()));
    }
    Ok(())
}

/// Open assumptions of each node, for the audit.
pub(crate) fn open_assumptions(p: &ProofScript) -> std::collections::BTreeMap<String, Vec<Open>> {
    fn go(
        p: &ProofScript,
        name: &str,
        out: &mut std::collections::BTreeMap<String, Vec<Open>>,
        stack: &mut Vec<String>,
    ) -> Vec<Open> {
        if let Some(a) = p.assumptions.get(name) {
            let index = match a.source {
                Source::Hyp(i) => Some(i),
                _ => None,
            };
            return vec![Open {
                name: name.into(),
                judgment: a.judgment.clone(),
                index,
                path: vec![],
            }];
        }
        if let Some(o) = out.get(name) {
            return o.clone();
        }
        let Some(node) = p.nodes.get(name) else {
            return vec![];
        };
        if stack.iter().any(|s| s == name) {
            return vec![];
        }
        stack.push(name.into());
        let mut open = vec![];
        for q in &node.premises {
            open.extend(go(p, q, out, stack));
        }
        stack.pop();
        open.retain(|o| !o.index.is_some_and(|i| node.discharge.contains(&i)));
        out.insert(name.into(), open.clone());
        open
    }
    let mut out = std::collections::BTreeMap::new();
    for name in p.nodes.keys() {
        go(p, name, &mut out, &mut vec![]);
    }
    out
}
