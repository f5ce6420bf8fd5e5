use num_traits::Signed;

use super::{Instruction, MachineError, Op, TwoCounterMachine};
use crate::model::Lane;
use crate::rational::{int, Rational};
use crate::syntax::{Formula, Term, Var};

fn ex_re() -> Formula {
    Formula::exists(Var::car("c"), Formula::re(Term::var(&Var::car("c"))))
}

fn ex_cl() -> Formula {
    Formula::exists(Var::car("c"), Formula::cl(Term::var(&Var::car("c"))))
}

fn len(q: Rational) -> Formula {
    Formula::length_is(Term::real(q))
}

fn width(n: Lane) -> Formula {
    Formula::width_is(Term::int(n as i64))
}

fn no_claims() -> Formula {
    Formula::everywhere(Formula::not(ex_cl()))
}

/// `w = i || d || top`: `d` on the lane above the `i` lowest ones.
fn at_lane(i: Lane, d: Formula) -> Formula {
    Formula::vchain([width(i), d, Formula::Top])
}

/// `¬(a ~ ¬b)`.
fn leads_to(a: Formula, b: Formula) -> Formula {
    Formula::not(Formula::hchop(a, Formula::not(b)))
}

pub fn marker() -> Formula {
    Formula::hchain([ex_cl(), ex_re(), ex_cl()])
}

/// The formula pieces of `halt(C)` for one machine and one `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoding {
    pub k: Rational,
    pub init: Formula,
    pub periodic: Formula,
    pub mutex: Formula,
    /// One conjunction `F(i)` per instruction, guarded by `[l]` in the result.
    pub groups: Vec<(Instruction, Vec<Formula>)>,
    pub reach_final: Formula,
}

impl Encoding {
    pub fn new(m: &TwoCounterMachine, k: Rational) -> Result<Self, MachineError> {
        if !k.is_positive() {
            return Err(MachineError::BadK);
        }
        m.validate()?;
        let e = Schema { k: k.clone() };
        let lanes = m.lanes();
        let groups = m
            .instructions
            .iter()
            .map(|ins| (ins.clone(), e.instruction(ins, &lanes)))
            .collect();
        Ok(Encoding {
            init: e.init(),
            periodic: e.periodic(),
            mutex: mutex(),
            groups,
            reach_final: Formula::diamond_l(at_lane(lanes[&m.final_state], ex_cl())),
            k,
        })
    }

    pub fn formula(&self) -> Formula {
        let mut parts = vec![self.init.clone(), self.periodic.clone(), self.mutex.clone()];
        parts.extend(self.groups.iter().map(|(_, fs)| Formula::box_l(Formula::conj(fs.iter().cloned()))));
        parts.push(self.reach_final.clone());
        Formula::conj(parts)
    }
}

/// `halt(C)` for the machine and segment length `k`.
pub fn encode_halt(m: &TwoCounterMachine, k: Rational) -> Result<Formula, MachineError> {
    Ok(Encoding::new(m, k)?.formula())
}

pub(crate) fn mutex() -> Formula {
    let (c, d) = (Var::car("c"), Var::car("d"));
    let (tc, td) = (Term::var(&c), Term::var(&d));
    let body = Formula::and(
        Formula::implies(Formula::cl(tc.clone()), Formula::not(Formula::re(td.clone()))),
        Formula::implies(Formula::re(tc), Formula::not(Formula::cl(td))),
    );
    Formula::forall(c, Formula::forall(d, Formula::everywhere(body)))
}

struct Schema {
    k: Rational,
}

impl Schema {
    fn k(&self, n: i64) -> Rational {
        &self.k * int(n)
    }

    fn fit(&self, f: Formula) -> Formula {
        Formula::restrict(f, Term::real(self.k.clone()))
    }

    fn lt_k(&self) -> Formula {
        Formula::LengthLt(Term::real(self.k.clone()))
    }

    fn init(&self) -> Formula {
        let config = Formula::hchain([
            self.fit(marker()),
            self.fit(Formula::Free),
            self.fit(ex_cl()),
            self.fit(Formula::Free),
            self.fit(ex_cl()),
        ]);
        Formula::hchop(Formula::vchain([width(0), config, no_claims()]), Formula::Top)
    }

    fn per(&self, d: Formula) -> Formula {
        let framed = Formula::vchain([no_claims(), d, no_claims()]);
        Formula::everywhere(Formula::implies(
            Formula::hchop(framed.clone(), len(self.k(5))),
            Formula::hchop(len(self.k(5)), framed),
        ))
    }

    fn periodic(&self) -> Formula {
        let gaps = Formula::box_l(Formula::implies(
            Formula::LengthGt(Term::int(0)),
            Formula::hchain([Formula::Top, Formula::or(Formula::Free, ex_re()), Formula::Top]),
        ));
        Formula::conj([
            self.per(self.fit(Formula::and(gaps, width(1)))),
            self.per(self.fit(ex_cl())),
            self.per(self.fit(marker())),
        ])
    }

    /// The marker, then everything before the counter's segment.
    fn prefix(&self, counter: u8) -> Vec<Formula> {
        let mut p = vec![self.fit(marker())];
        if counter == 2 {
            p.push(len(self.k(2)));
        }
        p
    }

    fn chain(&self, counter: u8, rest: impl IntoIterator<Item = Formula>) -> Formula {
        let mut p = self.prefix(counter);
        p.extend(rest);
        Formula::hchain(p)
    }

    /// Inside the counter's segment, `atom` followed by `after` within `5k`.
    fn point(&self, counter: u8, atom: Formula, after: Formula) -> Formula {
        self.chain(counter, [self.lt_k(), atom, Formula::and(after, len(self.k(5)))])
    }

    fn guard(d: Formula, guard: Option<&Formula>) -> Formula {
        match guard {
            Some(g) => Formula::and(g.clone(), d),
            None => d,
        }
    }

    /// Points with `atom` followed by `after` reappear `5k` later on lane `j`.
    fn copy(&self, i: Lane, j: Lane, counter: u8, atom: Formula, after: Formula, then: Formula, guard: Option<&Formula>) -> Formula {
        let d = Self::guard(self.point(counter, atom, after), guard);
        leads_to(
            at_lane(i, d),
            at_lane(j, Formula::or(len(int(0)), Formula::hchop(then, Formula::Top))),
        )
    }

    fn copy_reservations(&self, i: Lane, j: Lane, counter: u8, guard: Option<&Formula>) -> Formula {
        self.copy(i, j, counter, ex_re(), Formula::hchop(ex_re(), Formula::Top), ex_re(), guard)
    }

    fn copy_free(&self, i: Lane, j: Lane, counter: u8, guard: Option<&Formula>) -> Formula {
        self.copy(i, j, counter, Formula::Free, Formula::hchop(Formula::Free, Formula::Top), Formula::Free, guard)
    }

    fn empty_counter(&self, counter: u8) -> Formula {
        self.chain(counter, [self.fit(Formula::Free), Formula::Top])
    }

    fn nonempty_counter(&self, counter: u8) -> Formula {
        self.chain(counter, [self.lt_k(), ex_re(), Formula::Top])
    }

    fn instruction(&self, ins: &Instruction, lanes: &std::collections::BTreeMap<String, Lane>) -> Vec<Formula> {
        let (c, other) = if ins.counter == 1 { (1, 2) } else { (2, 1) };
        let i = lanes[&ins.from];
        let j = lanes[&ins.to];
        match ins.op {
            Op::Inc => vec![
                self.copy_reservations(i, j, c, None),
                // free space followed by a reservation of the same counter
                self.copy(
                    i,
                    j,
                    c,
                    Formula::Free,
                    Formula::hchain([Formula::Free, ex_re(), Formula::Top]),
                    Formula::Free,
                    None,
                ),
                Formula::implies(
                    at_lane(i, self.chain(c, [self.fit(Formula::Free), len(self.k(5))])),
                    at_lane(
                        j,
                        Formula::hchop(Formula::Top, self.fit(Formula::hchain([Formula::Free, ex_re(), Formula::Free]))),
                    ),
                ),
                Formula::implies(
                    at_lane(
                        i,
                        self.chain(
                            c,
                            [
                                self.lt_k(),
                                ex_re(),
                                Formula::and(Formula::hchain([Formula::Free, ex_cl(), Formula::Top]), len(self.k(6))),
                            ],
                        ),
                    ),
                    at_lane(
                        j,
                        Formula::hchop(
                            Formula::Top,
                            self.fit(Formula::hchain([Formula::Free, ex_re(), Formula::Free, ex_cl()])),
                        ),
                    ),
                ),
                self.copy_reservations(i, j, other, None),
                self.copy_free(i, j, other, None),
            ],
            Op::Dec => {
                let z = lanes[ins.to_zero.as_ref().expect("validated")];
                let empty = self.empty_counter(c);
                let nonempty = self.nonempty_counter(c);
                vec![
                    Formula::implies(
                        at_lane(i, self.chain(c, [self.fit(Formula::Free), len(self.k(5))])),
                        at_lane(z, Formula::hchop(Formula::Top, self.fit(Formula::Free))),
                    ),
                    self.copy_reservations(i, z, other, Some(&empty)),
                    self.copy_free(i, z, other, Some(&empty)),
                    // every reservation but the last one stays
                    self.copy(
                        i,
                        j,
                        c,
                        ex_re(),
                        Formula::hchain([ex_re(), Formula::Free, ex_re(), Formula::Top]),
                        ex_re(),
                        None,
                    ),
                    // the last one turns into free space
                    self.copy(
                        i,
                        j,
                        c,
                        ex_re(),
                        Formula::hchain([ex_re(), Formula::Free, ex_cl(), Formula::Top]),
                        Formula::Free,
                        None,
                    ),
                    self.copy_free(i, j, c, Some(&nonempty)),
                    self.copy_reservations(i, j, other, Some(&nonempty)),
                    self.copy_free(i, j, other, Some(&nonempty)),
                ]
            }
        }
    }
}
