use num_traits::Zero;

use super::{Formula, Term, Var};

fn bx(f: Formula) -> Box<Formula> {
    Box::new(f)
}

fn not(f: Formula) -> Formula {
    Formula::Implies(bx(f), bx(Formula::Bot))
}

fn top() -> Formula {
    not(Formula::Bot)
}

fn and(a: Formula, b: Formula) -> Formula {
    not(Formula::Implies(bx(a), bx(not(b))))
}

fn hchop(a: Formula, b: Formula) -> Formula {
    Formula::ChopH(bx(a), bx(b))
}

fn vchop(lower: Formula, upper: Formula) -> Formula {
    Formula::ChopV {
        lower: bx(lower),
        upper: bx(upper),
    }
}

fn somewhere(a: Formula) -> Formula {
    hchop(hchop(top(), vchop(vchop(top(), a), top())), top())
}

fn diamond_l(a: Formula) -> Formula {
    hchop(hchop(top(), a), top())
}

fn is_zero(t: &Term) -> bool {
    matches!(t, Term::RealConst(q) if q.is_zero())
}

/// `ℓ > r`, resp. `ω > r` via the given chop.
fn greater(measure: Term, r: Term, chop: fn(Formula, Formula) -> Formula) -> Formula {
    let eq = Formula::Eq(measure, r.clone());
    if is_zero(&r) {
        not(eq)
    } else {
        and(chop(eq.clone(), top()), not(eq))
    }
}

/// Rewrites every abbreviation into the core language.
pub fn expand(f: &Formula) -> Formula {
    use Formula::*;
    let e = |g: &Formula| expand(g);
    match f {
        Bot => Bot,
        Eq(a, b) => Eq(a.clone(), b.clone()),
        Re(c) => Re(c.clone()),
        Cl(c) => Cl(c.clone()),
        Implies(a, b) => Implies(bx(e(a)), bx(e(b))),
        Forall(v, a) => Forall(v.clone(), bx(e(a))),
        ChopH(a, b) => hchop(e(a), e(b)),
        ChopV { lower, upper } => vchop(e(lower), e(upper)),
        BoxM(m, a) => BoxM(m.clone(), bx(e(a))),

        Top => top(),
        Not(a) => not(e(a)),
        And(a, b) => and(e(a), e(b)),
        Or(a, b) => Implies(bx(not(e(a))), bx(e(b))),
        Iff(a, b) => {
            let (a, b) = (e(a), e(b));
            and(Implies(bx(a.clone()), bx(b.clone())), Implies(bx(b), bx(a)))
        }
        Exists(v, a) => not(Forall(v.clone(), bx(not(e(a))))),
        Neq(a, b) => not(Eq(a.clone(), b.clone())),
        Free => {
            let c = Term::Var(Var::car("c"));
            let body = and(not(Cl(c.clone())), not(Re(c)));
            let nowhere = not(diamond_l(not(body)));
            and(
                and(greater(Term::Length, Term::int(0), hchop), Eq(Term::Width, Term::int(1))),
                Forall(Var::car("c"), bx(nowhere)),
            )
        }
        Somewhere(a) => somewhere(e(a)),
        Everywhere(a) => not(somewhere(not(e(a)))),
        DiamondL(a) => diamond_l(e(a)),
        BoxL(a) => not(diamond_l(not(e(a)))),
        DiamondM(m, a) => not(BoxM(m.clone(), bx(not(e(a))))),
        LengthLt(r) => not(hchop(Eq(Term::Length, r.clone()), top())),
        LengthGt(r) => greater(Term::Length, r.clone(), hchop),
        WidthLt(r) => not(vchop(Eq(Term::Width, r.clone()), top())),
        WidthGt(r) => greater(Term::Width, r.clone(), vchop),
        Restrict(a, r) => and(e(a), Eq(Term::Length, r.clone())),
    }
}
