//! The four-car highway: loads the scenario file and prints what E's view
//! sees of every car.

use emlsl::model::derived_functions;
use emlsl::scenario::Scenario;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/highway.json");
    let sc = Scenario::load(path).expect("scenario loads");
    let view = sc.view.as_ref().expect("scenario has a view");
    println!("view {view}");
    for car in sc.snapshot.cars().keys() {
        let d = derived_functions(&sc.snapshot, view, &sc.sensors, car);
        let len = d.len.map(|e| e.to_string()).unwrap_or_else(|| "-".into());
        println!("{car}: res_V={:?} clm_V={:?} len_V={len}", d.res, d.clm);
    }
}
