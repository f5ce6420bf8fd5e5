use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use num_traits::{Signed, Zero};

use super::{fresh_cars, successors, EvalError, EvalOptions, Valuation, Value, Verdict};
use crate::model::{CarId, Extent, Lane, Measure, SensorConfig, TrafficSnapshot, View};
use crate::rational::{self, Rational};
use crate::syntax::{chop_depth, expand, is_core, Formula, Modality, Sort, Term};

struct CarInfo {
    res: BTreeSet<Lane>,
    clm: BTreeSet<Lane>,
    body: Extent,
}

struct SnapInfo {
    ts: TrafficSnapshot,
    cars: HashMap<CarId, CarInfo>,
    endpoints: Vec<Rational>,
}

type ViewKey = (Option<(Lane, Lane)>, Rational, Rational);

fn view_key(v: &View) -> ViewKey {
    (v.lanes.bounds(), v.extent.lo().clone(), v.extent.hi().clone())
}

struct Evaluator<'a> {
    sensors: &'a SensorConfig,
    opts: &'a EvalOptions,
    owner: CarId,
    snaps: Vec<SnapInfo>,
    snap_ids: HashMap<TrafficSnapshot, usize>,
    ctxs: Vec<(usize, Rc<Valuation>)>,
    ctx_ids: HashMap<(usize, Rc<Valuation>), usize>,
    memo: HashMap<(usize, usize, ViewKey), Verdict>,
    depths: HashMap<usize, usize>,
    lengths: HashMap<(usize, usize), Rc<Vec<Rational>>>,
    car_domain: Vec<CarId>,
    real_domain: Vec<Rational>,
    max_lane: Lane,
}

fn and(a: Verdict, b: Verdict) -> Verdict {
    let value = a.value && b.value;
    let complete = if value {
        a.complete && b.complete
    } else {
        (!a.value && a.complete) || (!b.value && b.complete) || (a.complete && b.complete)
    };
    Verdict { value, complete }
}

/// Running existential over a finite set of witnesses.
#[derive(Default)]
struct Search {
    found: bool,
    found_complete: bool,
    all_complete: bool,
}

impl Search {
    fn new() -> Self {
        Search {
            found: false,
            found_complete: false,
            all_complete: true,
        }
    }

    /// Returns true once the search is settled.
    fn add(&mut self, v: Verdict) -> bool {
        if v.value {
            self.found = true;
            self.found_complete |= v.complete;
        }
        self.all_complete &= v.complete;
        self.found_complete
    }

    fn verdict(&self, domain_exact: bool) -> Verdict {
        if self.found {
            Verdict {
                value: true,
                complete: self.found_complete,
            }
        } else {
            Verdict {
                value: false,
                complete: self.all_complete && domain_exact,
            }
        }
    }
}

/// Coefficient of `l` and the remaining constant of a real term, when every
/// variable in it is bound by `nu`.
fn linear(t: &Term, nu: &Valuation) -> Option<(i64, Rational)> {
    match t {
        Term::Length => Some((1, Rational::zero())),
        Term::RealConst(q) => Some((0, q.clone())),
        Term::Var(v) => match nu.get(v) {
            Some(Value::Real(q)) => Some((0, q.clone())),
            _ => None,
        },
        Term::Plus(a, b) => {
            let (ka, ca) = linear(a, nu)?;
            let (kb, cb) = linear(b, nu)?;
            Some((ka + kb, ca + cb))
        }
        _ => None,
    }
}

/// Lengths forced by equations `… l … = …` below `f`.
fn forced_lengths(f: &Formula, nu: &Valuation, out: &mut BTreeSet<Rational>) {
    if let Formula::Eq(a, b) = f {
        if let (Some((ka, ca)), Some((kb, cb))) = (linear(a, nu), linear(b, nu)) {
            if ka != kb {
                let d = (cb - ca) / rational::int(ka - kb);
                if d.is_positive() {
                    out.insert(d);
                }
            }
        }
    }
    for c in f.children() {
        forced_lengths(c, nu, out);
    }
}

fn real_constants(f: &Formula, out: &mut BTreeSet<Rational>) {
    fn term(t: &Term, out: &mut BTreeSet<Rational>) {
        match t {
            Term::RealConst(q) => {
                out.insert(q.clone());
            }
            Term::Plus(a, b) => {
                term(a, out);
                term(b, out);
            }
            _ => {}
        }
    }
    for t in f.own_terms() {
        term(t, out);
    }
    for c in f.children() {
        real_constants(c, out);
    }
}

fn count_car_binders(f: &Formula) -> usize {
    let here = usize::from(matches!(f, Formula::Forall(v, _) if v.sort == Sort::Car));
    here + f.children().into_iter().map(count_car_binders).sum::<usize>()
}

/// `{r, t}`, the clipped car endpoints, closed `depth` times under `± d`,
/// then refined by midpoints.
fn candidates_in(extent: &Extent, endpoints: &[Rational], lengths: &[Rational], depth: usize) -> Vec<Rational> {
    let (r, t) = (extent.lo(), extent.hi());
    let mut set: BTreeSet<Rational> = [r.clone(), t.clone()].into_iter().collect();
    set.extend(endpoints.iter().filter(|p| extent.contains(p)).cloned());
    for _ in 0..depth {
        let mut next = set.clone();
        for p in &set {
            for d in lengths {
                for q in [p + d, p - d] {
                    if extent.contains(&q) {
                        next.insert(q);
                    }
                }
            }
        }
        if next.len() == set.len() {
            break;
        }
        set = next;
    }
    let points: Vec<Rational> = set.into_iter().collect();
    let mut out = Vec::with_capacity(points.len() * 2);
    for w in points.windows(2) {
        out.push(w[0].clone());
        out.push((&w[0] + &w[1]) * rational::half());
    }
    out.extend(points.last().cloned());
    out
}

impl<'a> Evaluator<'a> {
    fn new(ts: &TrafficSnapshot, v: &View, nu: &Valuation, f: &Formula, sensors: &'a SensorConfig, opts: &'a EvalOptions) -> Self {
        let mut taken: BTreeSet<CarId> = ts.cars().keys().cloned().collect();
        taken.insert(nu.ego().clone());
        taken.extend(nu.vars().values().filter_map(|x| match x {
            Value::Car(c) => Some(c.clone()),
            _ => None,
        }));
        let mut car_domain: Vec<CarId> = taken.iter().cloned().collect();
        car_domain.extend(fresh_cars(&taken, count_car_binders(f)));

        let mut ev = Evaluator {
            sensors,
            opts,
            owner: v.owner.clone(),
            snaps: vec![],
            snap_ids: HashMap::new(),
            ctxs: vec![],
            ctx_ids: HashMap::new(),
            memo: HashMap::new(),
            depths: HashMap::new(),
            lengths: HashMap::new(),
            car_domain,
            real_domain: vec![],
            max_lane: ts.max_lane(),
        };

        let snap = ev.snapshot(ts);
        let mut lengths = BTreeSet::new();
        forced_lengths(f, nu, &mut lengths);
        let lengths: Vec<Rational> = lengths.into_iter().collect();
        let depth = opts.chop_closure_depth.unwrap_or_else(|| chop_depth(f));
        let top = candidates_in(&v.extent, &ev.snaps[snap].endpoints, &lengths, depth);
        let mut reals: BTreeSet<Rational> = BTreeSet::new();
        for p in &top {
            for q in &top {
                reals.insert(p - q);
            }
        }
        reals.extend(opts.real_grid.iter().cloned());
        real_constants(f, &mut reals);
        reals.extend((0..=i64::from(ts.max_lane()) + 1).map(rational::int));
        ev.real_domain = reals.into_iter().collect();
        ev
    }

    fn snapshot(&mut self, ts: &TrafficSnapshot) -> usize {
        if let Some(&id) = self.snap_ids.get(ts) {
            return id;
        }
        let mut cars = HashMap::new();
        let mut endpoints = BTreeSet::new();
        for (id, state) in ts.cars() {
            let len = self.sensors.length(&self.owner, id, ts);
            let body = Extent::new(state.pos.clone(), &state.pos + len).expect("sensor lengths are positive");
            endpoints.insert(body.lo().clone());
            endpoints.insert(body.hi().clone());
            cars.insert(
                id.clone(),
                CarInfo {
                    res: state.res.clone(),
                    clm: state.clm.clone(),
                    body,
                },
            );
        }
        let id = self.snaps.len();
        self.snaps.push(SnapInfo {
            ts: ts.clone(),
            cars,
            endpoints: endpoints.into_iter().collect(),
        });
        self.snap_ids.insert(ts.clone(), id);
        id
    }

    fn context(&mut self, snap: usize, nu: Rc<Valuation>) -> usize {
        let key = (snap, nu);
        if let Some(&id) = self.ctx_ids.get(&key) {
            return id;
        }
        let id = self.ctxs.len();
        self.ctxs.push(key.clone());
        self.ctx_ids.insert(key, id);
        id
    }

    fn depth(&mut self, f: &Formula) -> usize {
        if let Some(d) = self.opts.chop_closure_depth {
            return d;
        }
        let key = f as *const Formula as usize;
        *self.depths.entry(key).or_insert_with(|| chop_depth(f))
    }

    fn lengths(&mut self, f: &Formula, ctx: usize) -> Rc<Vec<Rational>> {
        let key = (f as *const Formula as usize, ctx);
        if let Some(l) = self.lengths.get(&key) {
            return l.clone();
        }
        let mut set = BTreeSet::new();
        forced_lengths(f, &self.ctxs[ctx].1, &mut set);
        let l = Rc::new(set.into_iter().collect::<Vec<_>>());
        self.lengths.insert(key, l.clone());
        l
    }

    fn atom(&self, ctx: usize, v: &View, c: &Term, claim: bool) -> Result<Verdict, EvalError> {
        let (snap, nu) = &self.ctxs[ctx];
        let car = nu.car(c)?;
        let Some((lane, _)) = v.lanes.bounds().filter(|(lo, hi)| lo == hi) else {
            return Ok(Verdict::FALSE);
        };
        if !v.extent.measure().is_positive() {
            return Ok(Verdict::FALSE);
        }
        let Some(info) = self.snaps[*snap].cars.get(&car) else {
            return Ok(Verdict::FALSE);
        };
        let lanes = if claim { &info.clm } else { &info.res };
        Ok(Verdict::exact(lanes.contains(&lane) && v.extent.is_subinterval_of(&info.body)))
    }

    fn eval(&mut self, f: &Formula, ctx: usize, v: &View) -> Result<Verdict, EvalError> {
        match f {
            Formula::Bot => return Ok(Verdict::FALSE),
            Formula::Eq(a, b) => {
                let nu = &self.ctxs[ctx].1;
                let x = super::eval_term(v, nu, a)?;
                let y = super::eval_term(v, nu, b)?;
                return Ok(Verdict::exact(x == y));
            }
            Formula::Re(c) => return self.atom(ctx, v, c, false),
            Formula::Cl(c) => return self.atom(ctx, v, c, true),
            Formula::Implies(..) => return self.eval_compound(f, ctx, v),
            _ => {}
        }
        let key = (f as *const Formula as usize, ctx, view_key(v));
        if let Some(r) = self.memo.get(&key) {
            return Ok(*r);
        }
        let r = self.eval_compound(f, ctx, v)?;
        self.memo.insert(key, r);
        Ok(r)
    }

    fn eval_compound(&mut self, f: &Formula, ctx: usize, v: &View) -> Result<Verdict, EvalError> {
        match f {
            Formula::Implies(a, b) => {
                let va = self.eval(a, ctx, v)?;
                if !va.value && va.complete {
                    return Ok(Verdict::TRUE);
                }
                let vb = self.eval(b, ctx, v)?;
                let value = !va.value || vb.value;
                let complete = if value {
                    (!va.value && va.complete) || (vb.value && vb.complete)
                } else {
                    va.complete && vb.complete
                };
                Ok(Verdict { value, complete })
            }
            Formula::Forall(x, body) => {
                let (snap, nu) = self.ctxs[ctx].clone();
                let (domain, exact): (Vec<Value>, bool) = match x.sort {
                    Sort::Car => (self.car_domain.iter().cloned().map(Value::Car).collect(), true),
                    Sort::Lane => ((0..=self.max_lane).map(Value::Lane).collect(), true),
                    Sort::Real => (self.real_domain.iter().cloned().map(Value::Real).collect(), false),
                };
                let mut search = Search::new();
                for val in domain {
                    let inner = self.context(snap, Rc::new(nu.with(x, val)));
                    let r = self.eval(body, inner, v)?;
                    let negated = Verdict {
                        value: !r.value,
                        complete: r.complete,
                    };
                    if search.add(negated) {
                        break;
                    }
                }
                let ex = search.verdict(exact);
                Ok(Verdict {
                    value: !ex.value,
                    complete: ex.complete,
                })
            }
            Formula::ChopH(a, b) => {
                let depth = self.depth(f);
                let lengths = self.lengths(f, ctx);
                let snap = self.ctxs[ctx].0;
                let points = candidates_in(&v.extent, &self.snaps[snap].endpoints, &lengths, depth);
                let mut search = Search::new();
                for s in points {
                    let (left, right) = v.chop_h(&s).expect("candidates lie in the extent");
                    let r = self.pair(a, &left, b, &right, ctx)?;
                    if search.add(r) {
                        break;
                    }
                }
                Ok(search.verdict(true))
            }
            Formula::ChopV { lower, upper } => {
                let mut search = Search::new();
                for (lo, up) in v.chop_v_all() {
                    let r = self.pair(lower, &lo, upper, &up, ctx)?;
                    if search.add(r) {
                        break;
                    }
                }
                Ok(search.verdict(true))
            }
            Formula::BoxM(m, body) => {
                let (snap, nu) = self.ctxs[ctx].clone();
                let ts = self.snaps[snap].ts.clone();
                let next = successors(&ts, v, m, &nu, self.opts)?;
                let mut search = Search::new();
                for (ts2, v2) in next {
                    let s2 = self.snapshot(&ts2);
                    let inner = self.context(s2, nu.clone());
                    let r = self.eval(body, inner, &v2)?;
                    if search.add(Verdict {
                        value: !r.value,
                        complete: r.complete,
                    }) {
                        break;
                    }
                }
                let ex = search.verdict(true);
                let mut out = Verdict {
                    value: !ex.value,
                    complete: ex.complete,
                };
                if matches!(m, Modality::Tau) && out.value {
                    out.complete = false;
                }
                Ok(out)
            }
            other => unreachable!("not a core formula: {other}"),
        }
    }

    fn pair(&mut self, a: &Formula, va: &View, b: &Formula, vb: &View, ctx: usize) -> Result<Verdict, EvalError> {
        let ra = self.eval(a, ctx, va)?;
        if !ra.value && ra.complete {
            return Ok(Verdict::FALSE);
        }
        let rb = self.eval(b, ctx, vb)?;
        Ok(and(ra, rb))
    }
}

/// Decides `ts, v, nu ⊨ f` within the bounds of `opts`.
pub fn eval(
    ts: &TrafficSnapshot,
    v: &View,
    nu: &Valuation,
    f: &Formula,
    sensors: &SensorConfig,
    opts: &EvalOptions,
) -> Result<Verdict, EvalError> {
    if nu.ego() != &v.owner {
        return Err(EvalError::EgoMismatch {
            ego: nu.ego().clone(),
            owner: v.owner.clone(),
        });
    }
    let expanded;
    let core = if is_core(f) {
        f
    } else {
        expanded = expand(f);
        &expanded
    };
    let mut ev = Evaluator::new(ts, v, nu, core, sensors, opts);
    let snap = ev.snapshot(ts);
    let ctx = ev.context(snap, Rc::new(nu.clone()));
    ev.eval(core, ctx, v)
}

/// The chop points tried for a horizontal chop of `f` on `v`.
pub fn chop_candidates(
    ts: &TrafficSnapshot,
    v: &View,
    f: &Formula,
    sensors: &SensorConfig,
    nu: &Valuation,
    opts: &EvalOptions,
) -> Vec<Rational> {
    let core = expand(f);
    let mut lengths = BTreeSet::new();
    forced_lengths(&core, nu, &mut lengths);
    let lengths: Vec<Rational> = lengths.into_iter().collect();
    let depth = opts.chop_closure_depth.unwrap_or_else(|| chop_depth(&core));
    let mut endpoints = BTreeSet::new();
    for (id, state) in ts.cars() {
        let len = sensors.length(&v.owner, id, ts);
        endpoints.insert(state.pos.clone());
        endpoints.insert(&state.pos + len);
    }
    let endpoints: Vec<Rational> = endpoints.into_iter().collect();
    candidates_in(&v.extent, &endpoints, &lengths, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{Evolution, LaneInterval};
    use crate::rational::int;
    use crate::syntax::parse_formula;

    fn check(ts: &TrafficSnapshot, v: &View, s: &str) -> Verdict {
        let f = parse_formula(s).unwrap();
        eval(ts, v, &Valuation::new(v.owner.clone()), &f, &sample_sensors(), &EvalOptions::default()).unwrap()
    }

    fn view(lo: Lane, hi: Lane, r: i64, t: i64) -> View {
        View::new(LaneInterval::new(lo, hi).unwrap(), Extent::from_ints(r, t).unwrap(), "E")
    }

    #[test]
    fn reservation_atom() {
        let ts = sample_snapshot();
        assert_eq!(check(&ts, &view(2, 2, 14, 27), "re(ego)"), Verdict::TRUE);
        assert_eq!(check(&ts, &view(1, 1, 14, 27), "cl(ego)"), Verdict::TRUE);
        assert_eq!(check(&ts, &view(1, 1, 14, 27), "re(ego)"), Verdict::FALSE);
        assert_eq!(check(&ts, &view(2, 2, 14, 28), "re(ego)"), Verdict::FALSE);
        assert_eq!(check(&ts, &view(1, 2, 14, 27), "re(ego)"), Verdict::FALSE);
        assert_eq!(check(&ts, &view(2, 2, 14, 14), "re(ego)"), Verdict::FALSE);
    }

    #[test]
    fn free_space() {
        let ts = sample_snapshot();
        assert_eq!(check(&ts, &view(1, 1, 27, 28), "free"), Verdict::TRUE);
        assert_eq!(check(&ts, &view(1, 1, 38, 42), "free"), Verdict::TRUE);
        assert_eq!(check(&ts, &view(3, 3, 12, 42), "free"), Verdict::TRUE);
        assert_eq!(check(&ts, &view(1, 1, 15, 28), "free"), Verdict::FALSE);
        assert_eq!(check(&ts, &view(1, 1, 26, 28), "free"), Verdict::FALSE);
        assert_eq!(check(&ts, &view(1, 1, 27, 29), "free"), Verdict::FALSE);
        assert_eq!(check(&ts, &view(1, 2, 27, 28), "free"), Verdict::FALSE);
        assert_eq!(check(&ts, &view(1, 1, 27, 27), "free"), Verdict::FALSE);
    }

    #[test]
    fn chops_on_the_example() {
        let ts = sample_snapshot();
        let v = sample_view();
        assert!(check(&ts, &v, "somewhere re(ego)").value);
        assert!(check(&ts, &v, "somewhere (re(ego) ~ free)").value);
        assert!(check(&ts, &v, "l = 2 ~ (top || re(ego)) ~ top").value);
        assert!(!check(&ts, &v, "(top || re(ego)) ~ top").value);
        assert!(!check(&ts, &v, "(re(ego) || top) ~ top").value);
        assert!(check(&ts, &v, "exists c:car. somewhere (cl(ego) ~ free ~ re(c))").value);
        assert!(!check(&ts, &v, "somewhere (re(ego) and cl(ego))").value);
        assert!(check(&ts, &v, "l = 30 and w = 2").value);
        assert!(check(&ts, &v, "l = 10 ~ l = 20").value);
        assert!(!check(&ts, &v, "l = 10 ~ l = 21").value);
        assert!(check(&ts, &v, "<l> (l = 3 and (top || re(ego)))").value);
    }

    #[test]
    fn discrete_boxes() {
        let ts = sample_snapshot();
        let v = view(1, 1, 14, 27);
        assert_eq!(check(&ts, &v, "[c(ego)] bot"), Verdict::TRUE);
        assert_eq!(check(&ts, &v, "[r(ego)] re(ego)"), Verdict::TRUE);
        assert_eq!(check(&ts, &v, "[wd_c(ego)] cl(ego)"), Verdict::FALSE);
        assert_eq!(check(&ts, &view(2, 2, 14, 27), "[wd_r(ego)] bot"), Verdict::TRUE);
    }

    #[test]
    fn tau_is_bounded() {
        let ts = sample_snapshot();
        let v = view(2, 2, 14, 27);
        let f = parse_formula("[tau] re(ego)").unwrap();
        let nu = Valuation::new("E");
        let opts = EvalOptions {
            tau_witnesses: vec![Evolution::wait(int(2)).unwrap()],
            ..Default::default()
        };
        let r = eval(&ts, &v, &nu, &f, &sample_sensors(), &opts).unwrap();
        assert_eq!(r, Verdict { value: true, complete: false });
        let g = parse_formula("<tau> re(ego)").unwrap();
        assert_eq!(eval(&ts, &v, &nu, &g, &sample_sensors(), &opts).unwrap(), Verdict::TRUE);
    }

    #[test]
    fn quantifiers() {
        let ts = sample_snapshot();
        let v = sample_view();
        assert_eq!(check(&ts, &v, "exists n:lane. forall c:car. c = c"), Verdict::TRUE);
        assert_eq!(check(&ts, &v, "exists c:car. exists d:car. c != d"), Verdict::TRUE);
        assert_eq!(check(&ts, &v, "exists c:car. somewhere re(c) and c != ego"), Verdict::TRUE);
        let r = check(&ts, &v, "exists x:real. l = x");
        assert_eq!(r, Verdict::TRUE);
        let r = check(&ts, &v, "forall x:real. l = x");
        assert_eq!(r, Verdict::FALSE);
        let r = check(&ts, &v, "forall x:real. x = x");
        assert_eq!(r, Verdict { value: true, complete: false });
    }

    #[test]
    fn ego_mismatch() {
        let f = parse_formula("top").unwrap();
        let err = eval(&sample_snapshot(), &sample_view(), &Valuation::new("A"), &f, &sample_sensors(), &EvalOptions::default());
        assert!(matches!(err, Err(EvalError::EgoMismatch { .. })));
    }

    #[test]
    fn candidate_points() {
        let ts = sample_snapshot();
        let nu = Valuation::new("E");
        let opts = EvalOptions::default();
        let empty = TrafficSnapshot::new(1, Default::default()).unwrap();
        let v0 = view(0, 0, 0, 20);
        assert_eq!(
            chop_candidates(&empty, &v0, &Formula::Bot, &sample_sensors(), &nu, &opts),
            vec![int(0), int(10), int(20)]
        );
        let c = chop_candidates(&ts, &sample_view(), &parse_formula("top ~ top").unwrap(), &sample_sensors(), &nu, &opts);
        for p in [12, 14, 15, 27, 28, 38, 42] {
            assert!(c.contains(&int(p)), "{p}");
        }
        let five = parse_formula("l = 5").unwrap();
        let opts1 = EvalOptions {
            chop_closure_depth: Some(1),
            ..Default::default()
        };
        let c = chop_candidates(&empty, &v0, &five, &sample_sensors(), &nu, &opts1);
        assert!(c.contains(&int(5)) && c.contains(&int(15)));
    }
}
