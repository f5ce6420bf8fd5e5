//! Walks E through a lane change and checks sanity after every step.

use emlsl::model::fixtures::sample_snapshot;
use emlsl::model::{apply_transition, TransitionLabel};

fn main() {
    let mut ts = sample_snapshot();
    let labels = ["wd_c(E)", "c(E,3)", "r(E)", "t(1)", "wd_r(E,3)", "acc(E,-2)", "t(1/2)", "c(E,1)"];
    for text in labels {
        let label: TransitionLabel = text.parse().expect("label parses");
        match apply_transition(&ts, &label) {
            Ok(next) => {
                let e = next.car(&"E".into()).expect("E is listed");
                println!("{label:<10} res={:?} clm={:?} pos={} sane={}", e.res, e.clm, e.pos, next.is_sane());
                ts = next;
            }
            Err(err) => println!("{label:<10} rejected: {err}"),
        }
    }
    // a claim while already claiming is refused
    let refused = apply_transition(&sample_snapshot(), &"c(E,3)".parse().unwrap());
    println!("c(E,3) on the initial snapshot: {}", refused.unwrap_err());
}
