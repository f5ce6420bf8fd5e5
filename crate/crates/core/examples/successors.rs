//! Enumerates the successors of the example under each box modality,
//! including one explicit evolution for `[tau]`.

use emlsl::model::fixtures::{sample_snapshot, sample_view};
use emlsl::model::Evolution;
use emlsl::rational::int;
use emlsl::semantics::{successors, EvalOptions, Valuation};
use emlsl::syntax::{Modality, Term};

fn main() {
    let ts = sample_snapshot();
    let v = sample_view();
    let nu = Valuation::new("E");
    let opts = EvalOptions {
        tau_witnesses: vec![Evolution::wait(int(1)).unwrap()],
        ..EvalOptions::default()
    };
    let car = |name: &str| Term::Var(emlsl::syntax::Var::car(name));
    let nu = nu.with(&emlsl::syntax::Var::car("a"), emlsl::semantics::Value::Car("A".into()));
    let modalities = [
        Modality::Reserve(Term::Ego),
        Modality::WithdrawClaim(Term::Ego),
        Modality::Claim(car("a")),
        Modality::WithdrawReserve(car("a")),
        Modality::Tau,
    ];
    for m in &modalities {
        let next = successors(&ts, &v, m, &nu, &opts).expect("successors");
        println!("[{m}] has {} successor(s)", next.len());
        for (s, w) in next {
            for (id, c) in s.cars() {
                println!("    {id}: res={:?} clm={:?} pos={}", c.res, c.clm, c.pos);
            }
            println!("    view {w}");
        }
    }
}
