//! A direct evaluator that shares no code with the library's semantics: it
//! tries every chop point on a fixed grid and every lane split, and reads
//! occupancy straight off car positions and sensor lengths.

use std::collections::BTreeMap;

use emlsl::model::{CarId, SensorConfig, TrafficSnapshot};
use emlsl::rational::{int, ratio, Rational};
use emlsl::syntax::{Formula, Sort, Term, Var};
use num_traits::Signed;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Val {
    Car(CarId),
    Num(Rational),
    Lane(u32),
}

/// A rectangle: lanes `lo..=hi` (or none) times `[a, b]`.
#[derive(Clone, Debug)]
struct Rect {
    lanes: Option<(u32, u32)>,
    a: Rational,
    b: Rational,
}

pub struct Brute<'a> {
    ts: &'a TrafficSnapshot,
    owner: CarId,
    step: Rational,
    domain: Vec<CarId>,
    bodies: BTreeMap<CarId, (Rational, Rational)>,
}

fn binders(f: &Formula) -> usize {
    let own = match f {
        Formula::Forall(v, _) | Formula::Exists(v, _) if v.sort == Sort::Car => 1,
        _ => 0,
    };
    own + f.children().into_iter().map(binders).sum::<usize>()
}

impl<'a> Brute<'a> {
    /// Chop points are multiples of `step` from the left end of each
    /// extent; the car domain adds one unseen car per car binder of `f`.
    pub fn new(ts: &'a TrafficSnapshot, sensors: &SensorConfig, owner: &CarId, f: &Formula, step: Rational) -> Self {
        let mut domain: Vec<CarId> = ts.cars().keys().cloned().collect();
        if !domain.contains(owner) {
            domain.push(owner.clone());
        }
        for i in 0..binders(f) {
            domain.push(CarId(format!("unseen{i}")));
        }
        let bodies = ts
            .cars()
            .iter()
            .map(|(id, c)| (id.clone(), (c.pos.clone(), &c.pos + sensors.length(owner, id, ts))))
            .collect();
        Brute {
            ts,
            owner: owner.clone(),
            step,
            domain,
            bodies,
        }
    }

    pub fn holds(&self, f: &Formula, lanes: Option<(u32, u32)>, a: &Rational, b: &Rational) -> bool {
        let r = Rect {
            lanes,
            a: a.clone(),
            b: b.clone(),
        };
        self.sat(f, &BTreeMap::new(), &r)
    }

    fn points(&self, r: &Rect) -> Vec<Rational> {
        let mut out = vec![];
        let mut p = r.a.clone();
        while p <= r.b {
            out.push(p.clone());
            p += &self.step;
        }
        if out.last() != Some(&r.b) {
            out.push(r.b.clone());
        }
        out
    }

    fn splits(lanes: Option<(u32, u32)>) -> Vec<(Option<(u32, u32)>, Option<(u32, u32)>)> {
        match lanes {
            None => vec![(None, None)],
            Some((lo, hi)) => {
                let mut out = vec![];
                for cut in lo..=hi + 1 {
                    let lower = (cut > lo).then(|| (lo, cut - 1));
                    let upper = (cut <= hi).then_some((cut, hi));
                    out.push((lower, upper));
                }
                out
            }
        }
    }

    fn width(r: &Rect) -> i64 {
        r.lanes.map(|(lo, hi)| i64::from(hi - lo + 1)).unwrap_or(0)
    }

    fn term(&self, t: &Term, env: &BTreeMap<Var, Val>, r: &Rect) -> Val {
        match t {
            Term::LaneConst(n) => Val::Lane(*n),
            Term::RealConst(q) => Val::Num(q.clone()),
            Term::Ego => Val::Car(self.owner.clone()),
            Term::Var(v) => env.get(v).cloned().unwrap_or_else(|| panic!("unbound {v:?}")),
            Term::Length => Val::Num(&r.b - &r.a),
            Term::Width => Val::Num(int(Self::width(r))),
            Term::Plus(x, y) => match (self.term(x, env, r), self.term(y, env, r)) {
                (Val::Num(p), Val::Num(q)) => Val::Num(p + q),
                other => panic!("ill-sorted sum {other:?}"),
            },
        }
    }

    fn num(&self, t: &Term, env: &BTreeMap<Var, Val>, r: &Rect) -> Rational {
        match self.term(t, env, r) {
            Val::Num(q) => q,
            v => panic!("expected a number, found {v:?}"),
        }
    }

    /// The car's body covers the whole extent on the single lane.
    fn occupies(&self, car: &CarId, claim: bool, r: &Rect) -> bool {
        let Some((lane, hi)) = r.lanes else { return false };
        if lane != hi || r.b <= r.a {
            return false;
        }
        let Some(state) = self.ts.car(car) else { return false };
        let set = if claim { &state.clm } else { &state.res };
        let (p, q) = &self.bodies[car];
        set.contains(&lane) && *p <= r.a && r.b <= *q
    }

    fn sat(&self, f: &Formula, env: &BTreeMap<Var, Val>, r: &Rect) -> bool {
        use Formula::*;
        match f {
            Bot => false,
            Top => true,
            Not(a) => !self.sat(a, env, r),
            And(a, b) => self.sat(a, env, r) && self.sat(b, env, r),
            Or(a, b) => self.sat(a, env, r) || self.sat(b, env, r),
            Implies(a, b) => !self.sat(a, env, r) || self.sat(b, env, r),
            Iff(a, b) => self.sat(a, env, r) == self.sat(b, env, r),
            Eq(a, b) => self.term(a, env, r) == self.term(b, env, r),
            Neq(a, b) => self.term(a, env, r) != self.term(b, env, r),
            Re(c) | Cl(c) => match self.term(c, env, r) {
                Val::Car(id) => self.occupies(&id, matches!(f, Cl(_)), r),
                v => panic!("expected a car, found {v:?}"),
            },
            Free => free_geometric(self.ts, &self.bodies, r.lanes, &r.a, &r.b),
            LengthLt(t) => {
                let q = self.num(t, env, r);
                q.is_negative() || &r.b - &r.a < q
            }
            LengthGt(t) => &r.b - &r.a > self.num(t, env, r),
            WidthLt(t) => {
                let q = self.num(t, env, r);
                q.is_negative() || int(Self::width(r)) < q
            }
            WidthGt(t) => int(Self::width(r)) > self.num(t, env, r),
            Restrict(a, t) => self.sat(a, env, r) && &r.b - &r.a == self.num(t, env, r),
            Forall(x, b) => self.domain_of(x).into_iter().all(|v| self.sat(b, &bind(env, x, v), r)),
            Exists(x, b) => self.domain_of(x).into_iter().any(|v| self.sat(b, &bind(env, x, v), r)),
            ChopH(a, b) => self.points(r).into_iter().any(|s| {
                self.sat(a, env, &Rect { b: s.clone(), ..r.clone() }) && self.sat(b, env, &Rect { a: s, ..r.clone() })
            }),
            ChopV { lower, upper } => Self::splits(r.lanes).into_iter().any(|(lo, up)| {
                self.sat(lower, env, &Rect { lanes: lo, ..r.clone() }) && self.sat(upper, env, &Rect { lanes: up, ..r.clone() })
            }),
            Somewhere(a) => self.subrects(r, true).iter().any(|s| self.sat(a, env, s)),
            Everywhere(a) => self.subrects(r, true).iter().all(|s| self.sat(a, env, s)),
            DiamondL(a) => self.subrects(r, false).iter().any(|s| self.sat(a, env, s)),
            BoxL(a) => self.subrects(r, false).iter().all(|s| self.sat(a, env, s)),
            BoxM(..) | DiamondM(..) => panic!("the brute-force oracle has no transitions"),
        }
    }

    fn domain_of(&self, x: &Var) -> Vec<Val> {
        match x.sort {
            Sort::Car => self.domain.iter().cloned().map(Val::Car).collect(),
            Sort::Lane => (0..=self.ts.max_lane()).map(Val::Lane).collect(),
            Sort::Real => panic!("real quantifiers are outside the oracle's fragment"),
        }
    }

    /// Sub-extents on the grid, with every lane sub-interval (and the empty
    /// lane set) when `lanes` is set.
    fn subrects(&self, r: &Rect, lanes: bool) -> Vec<Rect> {
        let pts = self.points(r);
        let lane_sets: Vec<Option<(u32, u32)>> = match (lanes, r.lanes) {
            (false, l) => vec![l],
            (true, None) => vec![None],
            (true, Some((lo, hi))) => {
                let mut v = vec![None];
                for i in lo..=hi {
                    for j in i..=hi {
                        v.push(Some((i, j)));
                    }
                }
                v
            }
        };
        let mut out = vec![];
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i..] {
                for l in &lane_sets {
                    out.push(Rect {
                        lanes: *l,
                        a: p.clone(),
                        b: q.clone(),
                    });
                }
            }
        }
        out
    }
}

fn bind(env: &BTreeMap<Var, Val>, x: &Var, v: Val) -> BTreeMap<Var, Val> {
    let mut e = env.clone();
    e.insert(x.clone(), v);
    e
}

/// Free: one lane, positive length, and no reserving or claiming car whose
/// body overlaps the open extent.
fn free_geometric(
    ts: &TrafficSnapshot,
    bodies: &BTreeMap<CarId, (Rational, Rational)>,
    lanes: Option<(u32, u32)>,
    a: &Rational,
    b: &Rational,
) -> bool {
    let Some((lane, hi)) = lanes else { return false };
    if lane != hi || b <= a {
        return false;
    }
    ts.cars().iter().all(|(id, c)| {
        let (p, q) = &bodies[id];
        let on_lane = c.res.contains(&lane) || c.clm.contains(&lane);
        let overlap = p.max(a) < q.min(b);
        !(on_lane && overlap)
    })
}

/// [`free_geometric`] for a view owned by `owner`.
pub fn free_oracle(
    ts: &TrafficSnapshot,
    sensors: &SensorConfig,
    owner: &CarId,
    lanes: Option<(u32, u32)>,
    a: &Rational,
    b: &Rational,
) -> bool {
    let bodies = ts
        .cars()
        .iter()
        .map(|(id, c)| (id.clone(), (c.pos.clone(), &c.pos + sensors.length(owner, id, ts))))
        .collect();
    free_geometric(ts, &bodies, lanes, a, b)
}

pub fn grid_step() -> Rational {
    ratio(1, 16)
}
