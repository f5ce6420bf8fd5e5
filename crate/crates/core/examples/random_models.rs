//! Seeded generation of snapshots, views, transitions and formulas.

use emlsl::gen::{FormulaConfig, Gen};
use emlsl::semantics::{eval, EvalOptions, Valuation};

fn main() {
    let mut g = Gen::new(2024);
    let cfg = FormulaConfig {
        depth: 3,
        ..FormulaConfig::default()
    };
    for _ in 0..5 {
        let ts = g.snapshot(3, 2);
        let sensors = g.sensors(&ts);
        let v = g.view(&ts);
        let f = g.formula(&cfg);
        let nu = Valuation::new(v.owner.clone());
        let verdict = eval(&ts, &v, &nu, &f, &sensors, &EvalOptions::default()).unwrap();
        let step = g.transition(&ts, "r").map(|l| l.to_string()).unwrap_or_else(|| "-".into());
        println!("{} cars, view {v}, reserve step {step}\n  {f}\n  => {verdict}", ts.cars().len());
    }
}
