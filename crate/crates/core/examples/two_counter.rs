//! Runs a small two-counter machine, prints its halting formula and builds
//! the witness model of the run.

use emlsl::encoder::{build_witness_model, encode_halt, run_machine, Encoding, Layout, TwoCounterMachine};
use emlsl::rational::int;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/inc_dec.json");
    let m = TwoCounterMachine::from_json_str(&std::fs::read_to_string(path).unwrap()).expect("machine is valid");
    let trace = run_machine(&m, 100).expect("machine halts");
    for (i, c) in trace.configs.iter().enumerate() {
        println!("config {i}: {} c1={} c2={}", c.state, c.c1, c.c2);
    }
    let k = int(3);
    let enc = Encoding::new(&m, k.clone()).unwrap();
    for (instr, group) in &enc.groups {
        println!("{instr}: {} formulas", group.len());
    }
    let halt = encode_halt(&m, k.clone()).unwrap();
    println!("halt formula: {} characters", halt.to_string().len());
    let w = build_witness_model(&m, &trace, &k, Layout::Corrected).unwrap();
    println!("witness: {} cars on view {}, sane={}", w.snapshot.cars().len(), w.view, w.snapshot.is_sane());
}
