//! Evaluates spatial formulas on the example view and reports whether the
//! verdict depends on sampling bounds.

use emlsl::model::fixtures::{sample_sensors, sample_snapshot, sample_view};
use emlsl::model::{Extent, LaneInterval, View};
use emlsl::semantics::{eval, EvalOptions, Valuation};
use emlsl::syntax::parse_formula;

fn main() {
    let ts = sample_snapshot();
    let sensors = sample_sensors();
    let opts = EvalOptions::default();
    let views = [
        ("E's view", sample_view()),
        ("lane 2 under E", View::new(LaneInterval::single(2), Extent::from_ints(14, 27).unwrap(), "E")),
        ("ahead on lane 3", View::new(LaneInterval::single(3), Extent::from_ints(12, 42).unwrap(), "E")),
    ];
    let formulas = [
        "re(ego)",
        "somewhere re(ego)",
        "somewhere cl(ego)",
        "free",
        "exists c:car. somewhere (re(c) and re(ego))",
        "(cl(ego) || re(ego)) ~ top",
        "forall x:real. l = x -> l > 1",
    ];
    for (name, v) in &views {
        println!("{name}: {v}");
        let nu = Valuation::new(v.owner.clone());
        for text in formulas {
            let f = parse_formula(text).expect("formula parses");
            let verdict = eval(&ts, v, &nu, &f, &sensors, &opts).expect("evaluates");
            println!("  {verdict:<16} {f}");
        }
    }
}
