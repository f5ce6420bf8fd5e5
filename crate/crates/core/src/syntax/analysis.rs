use std::collections::BTreeSet;

use super::{expand, var_names, Formula, SyntaxError, Term, Var};

/// True iff `f` uses only the core connectives.
pub fn is_core(f: &Formula) -> bool {
    use Formula::*;
    let here = matches!(
        f,
        Bot | Eq(..) | Re(_) | Cl(_) | Implies(..) | Forall(..) | ChopH(..) | ChopV { .. } | BoxM(..)
    );
    here && f.children().into_iter().all(is_core)
}

fn term_vars(t: &Term, bound: &[String], out: &mut BTreeSet<Var>) {
    match t {
        Term::Var(v) if !bound.contains(&v.name) => {
            out.insert(v.clone());
        }
        Term::Plus(a, b) => {
            term_vars(a, bound, out);
            term_vars(b, bound, out);
        }
        _ => {}
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<Var>) {
    for t in f.own_terms() {
        term_vars(t, bound, out);
    }
    match f {
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            bound.push(v.name.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        _ => {
            for c in f.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

pub fn free_vars(f: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect_free(f, &mut vec![], &mut out);
    out
}

pub fn term_free_vars(t: &Term) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    term_vars(t, &[], &mut out);
    out
}

fn core(f: &Formula) -> std::borrow::Cow<'_, Formula> {
    if is_core(f) {
        std::borrow::Cow::Borrowed(f)
    } else {
        std::borrow::Cow::Owned(expand(f))
    }
}

fn any_node(f: &Formula, p: &dyn Fn(&Formula) -> bool) -> bool {
    p(f) || f.children().into_iter().any(|c| any_node(c, p))
}

/// No horizontal chop, after expansion.
pub fn hcf(f: &Formula) -> bool {
    !any_node(&core(f), &|g| matches!(g, Formula::ChopH(..)))
}

/// No vertical chop, after expansion.
pub fn vcf(f: &Formula) -> bool {
    !any_node(&core(f), &|g| matches!(g, Formula::ChopV { .. }))
}

/// Dynamically rigid: no `re` or `cl` atom.
pub fn dri(f: &Formula) -> bool {
    !any_node(&core(f), &|g| matches!(g, Formula::Re(_) | Formula::Cl(_)))
}

fn mentions(f: &Formula, p: fn(&Term) -> bool) -> bool {
    any_node(&core(f), &|g| g.own_terms().into_iter().any(p))
}

/// Horizontally rigid: dynamically rigid and no `l`.
pub fn hri(f: &Formula) -> bool {
    dri(f) && !mentions(f, Term::contains_length)
}

/// Vertically rigid: dynamically rigid and no `w`.
pub fn vri(f: &Formula) -> bool {
    dri(f) && !mentions(f, Term::contains_width)
}

pub fn dri_term(_t: &Term) -> bool {
    true
}

pub fn hri_term(t: &Term) -> bool {
    !t.contains_length()
}

pub fn vri_term(t: &Term) -> bool {
    !t.contains_width()
}

/// Maximal nesting of chops in the expanded formula.
pub fn chop_depth(f: &Formula) -> usize {
    fn go(f: &Formula) -> usize {
        let inner = f.children().into_iter().map(go).max().unwrap_or(0);
        match f {
            Formula::ChopH(..) | Formula::ChopV { .. } => inner + 1,
            _ => inner,
        }
    }
    go(&core(f))
}

fn subst_term(t: &Term, x: &Var, s: &Term) -> Term {
    match t {
        Term::Var(v) if v == x => s.clone(),
        Term::Plus(a, b) => Term::plus(subst_term(a, x, s), subst_term(b, x, s)),
        other => other.clone(),
    }
}

fn rename_term(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::Var(v) if v.name == from => Term::Var(Var::new(to, v.sort)),
        Term::Plus(a, b) => Term::plus(rename_term(a, from, to), rename_term(b, from, to)),
        other => other.clone(),
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("infinitely many names")
}

/// Applies `g` to every term of `f`'s own node and rebuilds with new children.
fn map_node(f: &Formula, t: &dyn Fn(&Term) -> Term, c: &mut dyn FnMut(&Formula) -> Formula) -> Formula {
    use Formula::*;
    let mut b = |g: &Formula| Box::new(c(g));
    match f {
        Bot | Top | Free => f.clone(),
        Eq(x, y) => Eq(t(x), t(y)),
        Neq(x, y) => Neq(t(x), t(y)),
        Re(x) => Re(t(x)),
        Cl(x) => Cl(t(x)),
        LengthLt(x) => LengthLt(t(x)),
        LengthGt(x) => LengthGt(t(x)),
        WidthLt(x) => WidthLt(t(x)),
        WidthGt(x) => WidthGt(t(x)),
        Implies(x, y) => Implies(b(x), b(y)),
        And(x, y) => And(b(x), b(y)),
        Or(x, y) => Or(b(x), b(y)),
        Iff(x, y) => Iff(b(x), b(y)),
        ChopH(x, y) => ChopH(b(x), b(y)),
        ChopV { lower, upper } => ChopV {
            lower: b(lower),
            upper: b(upper),
        },
        Forall(v, x) => Forall(v.clone(), b(x)),
        Exists(v, x) => Exists(v.clone(), b(x)),
        BoxM(m, x) => BoxM(m.map_car(|y| t(y)), b(x)),
        DiamondM(m, x) => DiamondM(m.map_car(|y| t(y)), b(x)),
        Not(x) => Not(b(x)),
        Somewhere(x) => Somewhere(b(x)),
        Everywhere(x) => Everywhere(b(x)),
        DiamondL(x) => DiamondL(b(x)),
        BoxL(x) => BoxL(b(x)),
        Restrict(x, r) => Restrict(b(x), t(r)),
    }
}

fn rename_free(f: &Formula, from: &str, to: &str) -> Formula {
    match f {
        Formula::Forall(v, _) | Formula::Exists(v, _) if v.name == from => f.clone(),
        _ => map_node(f, &|t| rename_term(t, from, to), &mut |g| rename_free(g, from, to)),
    }
}

fn subst(f: &Formula, x: &Var, s: &Term, s_names: &BTreeSet<String>) -> Formula {
    match f {
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            if v.name == x.name {
                return f.clone();
            }
            let (v, body) = if s_names.contains(&v.name) && free_vars(body).contains(x) {
                let mut avoid = s_names.clone();
                var_names(body, &mut avoid);
                avoid.insert(x.name.clone());
                let fresh = fresh_name(&v.name, &avoid);
                (Var::new(fresh.clone(), v.sort), rename_free(body, &v.name, &fresh))
            } else {
                (v.clone(), (**body).clone())
            };
            let body = Box::new(subst(&body, x, s, s_names));
            if matches!(f, Formula::Forall(..)) {
                Formula::Forall(v, body)
            } else {
                Formula::Exists(v, body)
            }
        }
        _ => map_node(f, &|t| subst_term(t, x, s), &mut |g| subst(g, x, s, s_names)),
    }
}

/// Capture-avoiding `f[x := s]`.
pub fn substitute(f: &Formula, x: &Var, s: &Term) -> Result<Formula, SyntaxError> {
    let found = s.check_sorts()?;
    if found != x.sort {
        return Err(SyntaxError::SortMismatch {
            var: x.name.clone(),
            expected: x.sort,
            found,
        });
    }
    let s_names = term_free_vars(s).into_iter().map(|v| v.name).collect();
    Ok(subst(f, x, s, &s_names))
}

fn flatten_h<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::ChopH(a, b) => {
            flatten_h(a, out);
            flatten_h(b, out);
        }
        other => out.push(other),
    }
}

fn flatten_v<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::ChopV { lower, upper } => {
            flatten_v(lower, out);
            flatten_v(upper, out);
        }
        other => out.push(other),
    }
}

/// Canonical representative: bound variables renamed by depth, chops
/// re-associated to the left.
fn normalize(f: &Formula, depth: usize, env: &mut Vec<(String, String)>) -> Formula {
    let rn = |t: &Term, env: &Vec<(String, String)>| -> Term {
        fn go(t: &Term, env: &Vec<(String, String)>) -> Term {
            match t {
                Term::Var(v) => match env.iter().rev().find(|(from, _)| *from == v.name) {
                    Some((_, to)) => Term::Var(Var::new(to.clone(), v.sort)),
                    None => t.clone(),
                },
                Term::Plus(a, b) => Term::plus(go(a, env), go(b, env)),
                other => other.clone(),
            }
        }
        go(t, env)
    };
    match f {
        Formula::Forall(v, body) => {
            let canon = format!("#{depth}");
            env.push((v.name.clone(), canon.clone()));
            let body = normalize(body, depth + 1, env);
            env.pop();
            Formula::Forall(Var::new(canon, v.sort), Box::new(body))
        }
        Formula::ChopH(..) => {
            let mut parts = vec![];
            flatten_h(f, &mut parts);
            Formula::hchain(parts.into_iter().map(|p| normalize(p, depth, env)))
        }
        Formula::ChopV { .. } => {
            let mut parts = vec![];
            flatten_v(f, &mut parts);
            Formula::vchain(parts.into_iter().map(|p| normalize(p, depth, env)))
        }
        _ => {
            let snapshot = env.clone();
            map_node(f, &|t| rn(t, &snapshot), &mut |g| normalize(g, depth, env))
        }
    }
}

/// Equality up to abbreviations, renaming of bound variables and
/// re-association of chops.
pub fn equivalent(a: &Formula, b: &Formula) -> bool {
    if a == b {
        return true;
    }
    let na = normalize(&core(a), 0, &mut vec![]);
    let nb = normalize(&core(b), 0, &mut vec![]);
    na == nb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_formula_in, Sort, SortContext};

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn chop_freeness() {
        assert!(vcf(&p("re(c)")));
        assert!(!vcf(&p("re(c) || re(d)")));
        assert!(vcf(&p("re(c) ~ re(d)")));
        assert!(!hcf(&p("re(c) ~ re(d)")));
        assert!(!hcf(&p("free")));
        assert!(!vcf(&p("somewhere re(c)")));
    }

    #[test]
    fn rigidity() {
        assert!(hri_term(&Term::Width));
        assert!(!hri_term(&Term::Length));
        assert!(!dri(&p("re(c)")));
        assert!(vri(&p("l = 5")));
        assert!(!hri(&p("l = 5")));
        assert!(!hri(&p("l < 5")));
        assert!(hri(&p("w = 1 ~ top")));
        assert!(!vri(&p("w = 1 ~ top")));
        assert!(!dri(&p("free")));
    }

    #[test]
    fn substitution() {
        let x = Var::real("x");
        let f = p("forall x:real. x = x");
        assert_eq!(substitute(&f, &Var::real("y"), &Term::int(3)).unwrap(), f);
        assert_eq!(substitute(&p("x = l"), &x, &Term::int(5)).unwrap(), p("5 = l"));
        assert_eq!(substitute(&f, &x, &Term::int(5)).unwrap(), f);
        assert!(matches!(
            substitute(&p("x = l"), &x, &Term::Ego),
            Err(SyntaxError::SortMismatch { .. })
        ));
    }

    #[test]
    fn substitution_avoids_capture() {
        let ctx: SortContext = [("x".to_string(), Sort::Real), ("y".to_string(), Sort::Real)].into_iter().collect();
        let f = parse_formula_in("forall y:real. x = y", &ctx).unwrap();
        let g = substitute(&f, &Var::real("x"), &Term::Var(Var::real("y"))).unwrap();
        let Formula::Forall(v, body) = &g else { panic!() };
        assert_ne!(v.name, "y");
        assert_eq!(**body, Formula::Eq(Term::Var(Var::real("y")), Term::Var(v.clone())));
    }

    #[test]
    fn equivalence() {
        assert!(equivalent(&p("forall c:car. re(c)"), &p("forall d:car. re(d)")));
        assert!(equivalent(&p("(re(a) ~ re(b)) ~ re(c)"), &p("re(a) ~ (re(b) ~ re(c))")));
        assert!(equivalent(&p("not re(a)"), &p("re(a) -> bot")));
        assert!(!equivalent(&p("re(a) ~ re(b)"), &p("re(b) ~ re(a)")));
        assert!(!equivalent(&p("forall c:car. re(c)"), &p("forall c:car. re(d)")));
    }

    #[test]
    fn depth() {
        assert_eq!(chop_depth(&p("re(c)")), 0);
        assert_eq!(chop_depth(&p("re(c) ~ (re(d) || top)")), 2);
        assert_eq!(chop_depth(&p("somewhere re(c)")), 4);
    }

    #[test]
    fn free_variables() {
        let f = p("forall c:car. re(c) and cl(d)");
        assert_eq!(free_vars(&f), [Var::car("d")].into_iter().collect());
    }
}
