//! Expected shape of a witness model, computed from the segment layout
//! with plain arithmetic.

use emlsl::encoder::{Config, TwoCounterMachine};
use emlsl::model::{Extent, LaneInterval, View};
use emlsl::rational::{int, Rational};
use emlsl::syntax::{Formula, Term, Var};

fn some(claim: bool) -> Formula {
    let c = Var::car("c");
    let atom = if claim { Formula::cl(Term::var(&c)) } else { Formula::re(Term::var(&c)) };
    Formula::exists(c, atom)
}

fn sized(f: Formula, len: &Rational) -> Formula {
    Formula::and(f, Formula::length_is(Term::real(len.clone())))
}

/// One counter segment of length `k` holding `n` cars of length `u`, the
/// `x`-th starting at `(2x - 1) u`.
fn counter(k: &Rational, u: &Rational, n: u64) -> Vec<Formula> {
    let mut parts = vec![];
    for _ in 0..n {
        parts.push(sized(Formula::Free, u));
        parts.push(sized(some(false), u));
    }
    let rest = k - u * int(2 * n as i64);
    parts.push(sized(Formula::Free, &rest));
    parts
}

/// The full segment of one configuration on its state lane: marker, first
/// counter, claim, second counter, claim.
pub fn segment_pattern(k: &Rational, max: u64, c: &Config) -> Formula {
    let third = k / int(3);
    let u = k / int(1 + 2 * max as i64);
    let mut parts = vec![sized(some(true), &third), sized(some(false), &third), sized(some(true), &third)];
    parts.extend(counter(k, &u, c.c1));
    parts.push(sized(some(true), k));
    parts.extend(counter(k, &u, c.c2));
    parts.push(sized(some(true), k));
    Formula::hchain(parts)
}

/// The state lane of configuration `d`, restricted to its segment.
pub fn segment_view(m: &TwoCounterMachine, k: &Rational, d: usize, c: &Config) -> View {
    let lo = k * int(5 * d as i64);
    let hi = &lo + k * int(5);
    let lane = m.lane(&c.state);
    View::new(LaneInterval::single(lane), Extent::new(lo, hi).unwrap(), "E")
}

/// Start of the `x`-th counter car of counter `i` in configuration `d` on
/// the corrected layout.
pub fn corrected_position(k: &Rational, max: u64, d: usize, i: u8, x: u64) -> Rational {
    let u = k / int(1 + 2 * max as i64);
    k * int(5 * d as i64) + k * int(2 * i as i64 - 1) + u * int(2 * x as i64 - 1)
}

fn run_witness(machine: &str, k: &str, extra: &[&str]) -> Result<emlsl::scenario::Scenario, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("witness.json");
    let path = super::example_path(machine);
    let mut argv = vec!["emlsl", "witness-2cm", path.as_str(), k, "-o", out.to_str().unwrap()];
    argv.extend_from_slice(extra);
    let (code, _, err) = emlsl::cli::run_captured(argv);
    if code != 0 {
        return Err(format!("witness-2cm exited with {code}: {err}"));
    }
    emlsl::scenario::Scenario::load(&out).map_err(|e| e.to_string())
}

fn holds(sc: &emlsl::scenario::Scenario, v: &View, f: &Formula) -> Result<emlsl::semantics::Verdict, String> {
    let nu = emlsl::semantics::Valuation::new(v.owner.clone());
    emlsl::semantics::eval(&sc.snapshot, v, &nu, f, &sc.sensors, &Default::default()).map_err(|e| e.to_string())
}

/// The one-increment machine at k = 3: sane witness, complete mutex, and
/// the expected segment layout and car positions in both configurations.
pub fn one_increment() -> super::props::Outcome {
    let k = int(3);
    let m = TwoCounterMachine::from_json_str(&super::example_text("one_inc.json")).map_err(|e| e.to_string())?;
    let sc = run_witness("one_inc.json", "3", &[])?;
    let bad = sc.snapshot.check_sanity();
    if !bad.is_empty() {
        return Err(format!("witness is not sane: {bad:?}"));
    }
    let whole = sc.view.clone().ok_or("witness has no view")?;
    let mutex = emlsl::encoder::Encoding::new(&m, k.clone()).map_err(|e| e.to_string())?.mutex;
    let r = holds(&sc, &whole, &mutex)?;
    if !(r.value && r.complete) {
        return Err(format!("mutex is {r}"));
    }
    let configs = [Config::new("q0", 0, 0), Config::new("qf", 1, 0)];
    for (d, c) in configs.iter().enumerate() {
        let v = segment_view(&m, &k, d, c);
        let r = holds(&sc, &v, &segment_pattern(&k, 1, c))?;
        if !(r.value && r.complete) {
            return Err(format!("configuration {d} layout on {v} is {r}"));
        }
    }
    let car = sc.snapshot.car(&"C_1_3_1".into()).ok_or("counter car C_1_3_1 is missing")?;
    let want = corrected_position(&k, 1, 1, 1, 1);
    if car.pos != want || !car.res.contains(&m.lane("qf")) {
        return Err(format!("counter car at {} on {:?}, expected {want} on lane {}", car.pos, car.res, m.lane("qf")));
    }
    Ok(format!("{} cars, mutex {r}, both segments match", sc.snapshot.cars().len()))
}

/// The self-loop never halts: the bounded witness carries no claim on the
/// final state's lane.
pub fn self_loop_bounded() -> super::props::Outcome {
    let m = TwoCounterMachine::from_json_str(&super::example_text("self_loop.json")).map_err(|e| e.to_string())?;
    let sc = run_witness("self_loop.json", "3", &["--max-steps", "4"])?;
    let whole = sc.view.clone().ok_or("witness has no view")?;
    let reach = emlsl::encoder::Encoding::new(&m, int(3)).map_err(|e| e.to_string())?.reach_final;
    let r = holds(&sc, &whole, &Formula::not(reach))?;
    if !(r.value && r.complete) {
        return Err(format!("negated final conjunct is {r}"));
    }
    Ok(format!("{} cars, no claim on lane {}", sc.snapshot.cars().len(), m.lane(&m.final_state)))
}
