//! Seeded property suites shared by the integration tests and the
//! acceptance harness. Each returns a one-line summary or the first
//! counterexample.

use emlsl::encoder::{encode_halt, TwoCounterMachine};
use emlsl::gen::{FormulaConfig, Gen};
use emlsl::model::{apply_transition, CarId, SensorConfig, Extent, LaneInterval, Measure, TrafficSnapshot, TransitionLabel, View};
use emlsl::proofs::{semantic_audit, Binding};
use emlsl::rational::{int, ratio, Rational};
use emlsl::semantics::{eval, EvalOptions, Valuation, Value};
use emlsl::syntax::{chop_depth, dri, hri, parse_formula, vri, Formula, Var};
use rand::seq::SliceRandom;
use rand::Rng;

use super::oracle::{free_oracle, grid_step, Brute};
use super::{example_script, example_text};

pub type Outcome = Result<String, String>;

const KINDS: [&str; 6] = ["c", "wd_c", "r", "wd_r", "t", "acc"];

fn opts() -> EvalOptions {
    EvalOptions::default()
}

/// Every enabled transition of every kind keeps a sane snapshot sane.
pub fn sanity_preservation(snapshots: usize, seed: u64) -> Outcome {
    let mut g = Gen::new(seed);
    let mut steps = 0;
    for _ in 0..snapshots {
        let max_lane = g.rng().gen_range(1..=3);
        let ts = g.snapshot(5, max_lane);
        for kind in KINDS {
            let Some(label) = g.transition(&ts, kind) else { continue };
            let next = apply_transition(&ts, &label).map_err(|e| format!("{label} failed: {e}"))?;
            let bad = next.check_sanity();
            if !bad.is_empty() {
                return Err(format!("{label} on {ts:?} broke sanity: {bad:?}"));
            }
            steps += 1;
        }
    }
    Ok(format!("{snapshots} snapshots, {steps} transitions"))
}

fn rigid_config(no_length: bool, no_width: bool) -> FormulaConfig {
    FormulaConfig {
        depth: 4,
        max_chop_depth: 4,
        spatial_atoms: false,
        length: !no_length,
        width: !no_width,
        boxes: vec!["r", "wd_c"],
        ..FormulaConfig::default()
    }
}

fn verdict(ts: &TrafficSnapshot, v: &View, f: &Formula) -> Result<bool, String> {
    let r = eval(ts, v, &Valuation::new(v.owner.clone()), f, &SensorConfig::default(), &opts()).map_err(|e| e.to_string())?;
    if !r.complete {
        return Err(format!("incomplete verdict for `{f}`"));
    }
    Ok(r.value)
}

/// Dynamically rigid formulas agree on any two snapshots over one view.
pub fn rigidity_dynamic(instances: usize, seed: u64) -> Outcome {
    let mut g = Gen::new(seed);
    let cfg = rigid_config(false, false);
    for _ in 0..instances {
        let f = g.formula(&cfg);
        assert!(dri(&f), "generator produced a non-dri formula `{f}`");
        let max_lane = g.rng().gen_range(1..=3);
        let (a, b) = (g.snapshot(4, max_lane), g.snapshot(4, max_lane));
        let v = g.view(&a);
        if verdict(&a, &v, &f)? != verdict(&b, &v, &f)? {
            return Err(format!("`{f}` differs on {v} between {a:?} and {b:?}"));
        }
    }
    Ok(format!("{instances} dri instances"))
}

/// Horizontally rigid formulas agree on a view and both parts of any
/// horizontal chop.
pub fn rigidity_horizontal(instances: usize, seed: u64) -> Outcome {
    let mut g = Gen::new(seed);
    let cfg = rigid_config(true, false);
    for _ in 0..instances {
        let f = g.formula(&cfg);
        assert!(hri(&f), "generator produced a non-hri formula `{f}`");
        let max_lane = g_lane(&mut g);
        let ts = g.snapshot(4, max_lane);
        let v = g.view(&ts);
        let (lo, len) = (v.extent.lo().clone(), v.extent.measure());
        let s = lo + len * ratio(g.rng().gen_range(0..=8), 8);
        let (left, right) = v.chop_h(&s).expect("point in extent");
        let whole = verdict(&ts, &v, &f)?;
        for part in [&left, &right] {
            if verdict(&ts, part, &f)? != whole {
                return Err(format!("`{f}` differs between {v} and {part}"));
            }
        }
    }
    Ok(format!("{instances} hri instances"))
}

/// Vertically rigid formulas agree on a view and both parts of any
/// vertical chop.
pub fn rigidity_vertical(instances: usize, seed: u64) -> Outcome {
    let mut g = Gen::new(seed);
    let cfg = rigid_config(false, true);
    for _ in 0..instances {
        let f = g.formula(&cfg);
        assert!(vri(&f), "generator produced a non-vri formula `{f}`");
        let max_lane = g_lane(&mut g);
        let ts = g.snapshot(4, max_lane);
        let v = g.view(&ts);
        let chops = v.chop_v_all();
        let (lower, upper) = chops.choose(g.rng()).expect("at least one chop").clone();
        let whole = verdict(&ts, &v, &f)?;
        for part in [&lower, &upper] {
            if verdict(&ts, part, &f)? != whole {
                return Err(format!("`{f}` differs between {v} and {part}"));
            }
        }
    }
    Ok(format!("{instances} vri instances"))
}

fn g_lane(g: &mut Gen) -> u32 {
    g.rng().gen_range(1..=3)
}

/// A short view next to some car, so that chops meet car boundaries.
fn small_view(g: &mut Gen, ts: &TrafficSnapshot) -> View {
    let anchor = ts
        .cars()
        .values()
        .map(|c| c.pos.clone())
        .collect::<Vec<_>>()
        .choose(g.rng())
        .cloned()
        .unwrap_or_else(|| int(10));
    let lo = anchor + ratio(g.rng().gen_range(-4..=4), 2);
    let hi = &lo + ratio(g.rng().gen_range(0..=6), 2);
    let lanes = g.lanes(ts.max_lane());
    let owner = ts.cars().keys().cloned().collect::<Vec<_>>().choose(g.rng()).cloned().unwrap_or_else(|| "E".into());
    View::new(lanes, Extent::new(lo, hi).expect("ordered"), owner)
}

/// A chop of two small formulas, optionally negated, of chop depth at most 3.
fn chopped(g: &mut Gen, cfg: &FormulaConfig) -> Formula {
    loop {
        let (a, b) = (g.formula(cfg), g.formula(cfg));
        let f = match g.rng().gen_range(0..4) {
            0 => Formula::vchop(a, b),
            1 => Formula::not(Formula::hchop(a, b)),
            _ => Formula::hchop(a, b),
        };
        if chop_depth(&f) <= 3 {
            return f;
        }
    }
}

/// The evaluator agrees with brute-force enumeration of chop points.
pub fn chop_oracle(instances: usize, seed: u64) -> Outcome {
    let mut g = Gen::new(seed);
    let cfg = FormulaConfig {
        depth: 2,
        max_chop_depth: 2,
        ..FormulaConfig::default()
    };
    let mut truths = 0;
    for _ in 0..instances {
        let max_lane = g_lane(&mut g);
        let ts = g.snapshot(5, max_lane);
        let sensors = g.sensors(&ts);
        let v = small_view(&mut g, &ts);
        let f = chopped(&mut g, &cfg);
        let r = eval(&ts, &v, &Valuation::new(v.owner.clone()), &f, &sensors, &opts()).map_err(|e| e.to_string())?;
        let brute = Brute::new(&ts, &sensors, &v.owner, &f, grid_step());
        let expected = brute.holds(&f, v.lanes.bounds(), v.extent.lo(), v.extent.hi());
        if !r.complete || r.value != expected {
            return Err(format!("`{f}` on {v}: eval {r}, brute force {expected}; snapshot {ts:?}"));
        }
        truths += usize::from(expected);
    }
    Ok(format!("{instances} formulas, {truths} true"))
}

/// `free` agrees with the geometric reading on random views.
pub fn free_geometry(instances: usize, seed: u64) -> Outcome {
    let mut g = Gen::new(seed);
    let free = parse_formula("free").unwrap();
    let mut truths = 0;
    for _ in 0..instances {
        let max_lane = g_lane(&mut g);
        let ts = g.snapshot(5, max_lane);
        let sensors = g.sensors(&ts);
        let mut v = if g.rng().gen_bool(0.5) { small_view(&mut g, &ts) } else { g.view(&ts) };
        if g.rng().gen_bool(0.7) {
            v.lanes = LaneInterval::single(g.rng().gen_range(0..=ts.max_lane()));
        }
        let r = eval(&ts, &v, &Valuation::new(v.owner.clone()), &free, &sensors, &opts()).map_err(|e| e.to_string())?;
        let expected = free_oracle(&ts, &sensors, &v.owner, v.lanes.bounds(), v.extent.lo(), v.extent.hi());
        if !r.complete || r.value != expected {
            return Err(format!("free on {v}: eval {r}, geometry {expected}; snapshot {ts:?}"));
        }
        truths += usize::from(expected);
    }
    Ok(format!("{instances} views, {truths} free"))
}

/// Printing then parsing gives back the same tree, for random formulas and
/// for the halting formulas of the bundled machines.
pub fn round_trip(instances: usize, seed: u64) -> Outcome {
    let mut g = Gen::new(seed);
    let cfg = FormulaConfig::full();
    let check = |f: &Formula| -> Result<(), String> {
        let text = f.to_string();
        match parse_formula(&text) {
            Ok(back) if &back == f => Ok(()),
            Ok(back) => Err(format!("`{text}` reads back as `{back}`")),
            Err(e) => Err(format!("`{text}` does not parse: {e}")),
        }
    };
    for _ in 0..instances {
        check(&g.formula(&cfg))?;
    }
    let mut encoded = 0;
    for name in ["one_inc.json", "self_loop.json", "inc_dec.json"] {
        let m = TwoCounterMachine::from_json_str(&example_text(name)).map_err(|e| e.to_string())?;
        for k in [int(3), int(1), ratio(3, 2)] {
            check(&encode_halt(&m, k).map_err(|e| e.to_string())?)?;
            encoded += 1;
        }
    }
    Ok(format!("{instances} formulas, {encoded} encodings"))
}

/// A view on one of `car`'s lanes inside its body, or a random one.
fn view_near(g: &mut Gen, ts: &TrafficSnapshot, sensors: &SensorConfig, car: &CarId) -> View {
    let owner = ts.cars().keys().cloned().collect::<Vec<_>>().choose(g.rng()).cloned().unwrap_or_else(|| car.clone());
    let state = ts.car(car).expect("listed");
    if g.rng().gen_bool(0.6) {
        let lanes: Vec<u32> = state.res.iter().chain(&state.clm).copied().collect();
        let lane = *lanes.choose(g.rng()).expect("a reservation");
        let len = sensors.length(&owner, car, ts);
        let a = &state.pos + &len * ratio(g.rng().gen_range(0..=3), 8);
        let b = &state.pos + &len * ratio(g.rng().gen_range(4..=9), 8);
        View::new(LaneInterval::single(lane), Extent::new(a, b).expect("ordered"), owner)
    } else {
        let mut v = g.view(ts);
        v.owner = owner;
        v
    }
}

/// Random bindings that satisfy the relational assumption of the
/// reservation script.
pub fn audit_reservation(bindings: usize, seed: u64) -> Outcome {
    let mut g = Gen::new(seed);
    let script = example_script("reservation.proof");
    let (mut checked, mut skipped) = (0, 0);
    let mut n = 0;
    while n < bindings {
        let max_lane = g_lane(&mut g);
        let ts = g.snapshot(4, max_lane);
        let Some(car) = ts.cars().keys().cloned().collect::<Vec<_>>().choose(g.rng()).cloned() else { continue };
        let after = apply_transition(&ts, &TransitionLabel::Reserve { car: car.clone() }).map_err(|e| e.to_string())?;
        let sensors = g.sensors(&ts);
        let v = view_near(&mut g, &ts, &sensors, &car);
        let b = Binding::new(sensors)
            .snapshot("S", ts.clone())
            .snapshot("S'", after)
            .view("V", v.clone())
            .value(Var::car("c"), Value::Car(car.clone()));
        let report = semantic_audit(&script, &b).map_err(|e| format!("binding for {car} on {v}: {e}"))?;
        if !report.passed() {
            return Err(format!("audit failed for {car} on {v}: {:?}", report.failures));
        }
        checked += report.checked;
        skipped += report.skipped;
        n += 1;
    }
    Ok(format!("{bindings} bindings, {checked} node checks, {skipped} skipped"))
}

/// Random views, vertical chops and lengths for the length/width script.
pub fn audit_length_width(bindings: usize, seed: u64) -> Outcome {
    let mut g = Gen::new(seed);
    let script = example_script("length_width.proof");
    let (mut checked, mut skipped) = (0, 0);
    for _ in 0..bindings {
        let max_lane = g_lane(&mut g);
        let ts = g.snapshot(4, max_lane);
        let v = g.view(&ts);
        let (v1, v2) = v.chop_v_all().choose(g.rng()).expect("at least one chop").clone();
        let x: Rational = if g.rng().gen_bool(0.7) { v.extent.measure() } else { g.rational(0, 20, 2) };
        let b = Binding::new(g.sensors(&ts))
            .snapshot("S", ts)
            .view("V", v.clone())
            .view("V1", v1)
            .view("V2", v2)
            .value(Var::real("x"), Value::Real(x.clone()));
        let report = semantic_audit(&script, &b).map_err(|e| e.to_string())?;
        if !report.passed() {
            return Err(format!("audit failed on {v} with x = {x}: {:?}", report.failures));
        }
        checked += report.checked;
        skipped += report.skipped;
    }
    Ok(format!("{bindings} bindings, {checked} node checks, {skipped} skipped"))
}
