mod common;

use std::time::{Duration, Instant};

use common::mutants::MUTANTS;
use common::props::{self, Outcome};
use common::{example_path, example_script, mutate, witness};
use emlsl::model::{apply_transition, derived_functions, Extent, TransitionLabel};
use emlsl::proofs::{check_script, parse_script};
use emlsl::scenario::Scenario;

fn highway() -> Result<Scenario, String> {
    Scenario::load(example_path("highway.json")).map_err(|e| e.to_string())
}

fn view_functions() -> Outcome {
    let sc = highway()?;
    let v = sc.view.as_ref().ok_or("no view")?;
    let want = [("A", Some((28, 38))), ("B", Some((12, 15))), ("C", None), ("E", Some((14, 27)))];
    for (car, ext) in want {
        let got = derived_functions(&sc.snapshot, v, &sc.sensors, &car.into()).len;
        let ext = ext.map(|(a, b)| Extent::from_ints(a, b).unwrap());
        if got != ext {
            return Err(format!("len_V({car}) = {got:?}, expected {ext:?}"));
        }
    }
    let e = derived_functions(&sc.snapshot, v, &sc.sensors, &"E".into());
    if e.res.iter().copied().collect::<Vec<_>>() != [2] || e.clm.iter().copied().collect::<Vec<_>>() != [1] {
        return Err(format!("res_V(E) = {:?}, clm_V(E) = {:?}", e.res, e.clm));
    }
    Ok("len_V of A, B, C, E exact; res_V(E) = {2}, clm_V(E) = {1}".into())
}

fn guards() -> Outcome {
    let ts = highway()?.snapshot;
    for lane in 0..=ts.max_lane() + 1 {
        if apply_transition(&ts, &TransitionLabel::Claim { car: "E".into(), lane }).is_ok() {
            return Err(format!("c(E,{lane}) was enabled"));
        }
    }
    let next = apply_transition(&ts, &TransitionLabel::Reserve { car: "E".into() }).map_err(|e| e.to_string())?;
    let e = next.car(&"E".into()).ok_or("E vanished")?;
    if e.res.iter().copied().collect::<Vec<_>>() != [1, 2] || !e.clm.is_empty() {
        return Err(format!("after r(E): res {:?}, clm {:?}", e.res, e.clm));
    }
    Ok("claims by E rejected; r(E) gives res {1,2}, clm {}".into())
}

fn proof_suite() -> Outcome {
    for name in ["reservation.proof", "length_width.proof"] {
        check_script(&example_script(name)).map_err(|e| format!("{name} rejected: {e}"))?;
    }
    for m in MUTANTS {
        let script = parse_script(&mutate(m)).map_err(|e| format!("{}: {e}", m.name))?;
        match check_script(&script) {
            Ok(()) => return Err(format!("mutant `{}` accepted", m.name)),
            Err(e) if e.kind.code() != m.code || e.path != m.path => {
                return Err(format!("mutant `{}`: got {e}, expected {} at {:?}", m.name, m.code, m.path))
            }
            Err(_) => {}
        }
    }
    Ok(format!("2 golden scripts accepted, {} mutants rejected at the expected node", MUTANTS.len()))
}

fn audits() -> Outcome {
    let a = props::audit_reservation(100, 1)?;
    let b = props::audit_length_width(100, 2)?;
    Ok(format!("reservation: {a}; length/width: {b}"))
}

fn reduction() -> Outcome {
    let a = witness::one_increment()?;
    let b = witness::self_loop_bounded()?;
    Ok(format!("one increment: {a}; self loop: {b}"))
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("view functions on the sample scenario", 1, view_functions),
        ("transition guards on the sample scenario", 1, guards),
        ("transitions preserve sanity", 30, || props::sanity_preservation(1000, 3)),
        ("rigidity", 60, || {
            Ok(format!(
                "dynamic: {}; horizontal: {}; vertical: {}",
                props::rigidity_dynamic(500, 4)?,
                props::rigidity_horizontal(500, 5)?,
                props::rigidity_vertical(500, 6)?
            ))
        }),
        ("chops against brute force", 120, || props::chop_oracle(200, 7)),
        ("free against geometry", 30, || props::free_geometry(500, 8)),
        ("proof checker golden and mutation suite", 10, proof_suite),
        ("soundness audit", 120, audits),
        ("two-counter reduction", 10, reduction),
        ("print/parse round trip", 10, || props::round_trip(1000, 9)),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let verdict = match result {
            Ok(detail) if took <= Duration::from_secs(*limit) => ("PASS", detail),
            Ok(detail) => ("FAIL", format!("{detail}; over the {limit} s limit")),
            Err(e) => ("FAIL", e),
        };
        if verdict.0 == "FAIL" {
            failed += 1;
        }
        println!("criterion {}: {} {name} ({}, {:.2?})", i + 1, verdict.0, verdict.1, took);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
