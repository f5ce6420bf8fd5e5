mod common;

use common::props;
use emlsl::model::TransitionLabel;
use emlsl::rational;
use proptest::prelude::*;

fn pass(r: props::Outcome) {
    if let Err(e) = r {
        panic!("{e}");
    }
}

#[test]
fn transitions_preserve_sanity() {
    pass(props::sanity_preservation(1000, 11));
}

#[test]
fn dynamic_rigidity() {
    pass(props::rigidity_dynamic(500, 12));
}

#[test]
fn horizontal_rigidity() {
    pass(props::rigidity_horizontal(500, 13));
}

#[test]
fn vertical_rigidity() {
    pass(props::rigidity_vertical(500, 14));
}

#[test]
fn chops_match_brute_force() {
    pass(props::chop_oracle(200, 15));
}

#[test]
fn free_matches_geometry() {
    pass(props::free_geometry(500, 16));
}

#[test]
fn print_parse_round_trip() {
    pass(props::round_trip(1000, 17));
}

proptest! {
    #[test]
    fn rationals_round_trip(n in -10_000i64..10_000, d in 1i64..500) {
        let q = rational::ratio(n, d);
        prop_assert_eq!(rational::parse(&rational::format(&q)).unwrap(), q);
    }

    #[test]
    fn labels_round_trip(car in "[A-Z][a-z0-9]{0,3}", lane in 0u32..6, n in 0i64..50, d in 1i64..9, kind in 0usize..6) {
        let q = rational::ratio(n, d);
        let label = match kind {
            0 => TransitionLabel::Claim { car: car.as_str().into(), lane },
            1 => TransitionLabel::WithdrawClaim { car: car.as_str().into() },
            2 => TransitionLabel::Reserve { car: car.as_str().into() },
            3 => TransitionLabel::WithdrawReserve { car: car.as_str().into(), lane },
            4 => TransitionLabel::Time(q),
            _ => TransitionLabel::SetAcc { car: car.as_str().into(), acc: -q },
        };
        prop_assert_eq!(label.to_string().parse::<TransitionLabel>().unwrap(), label);
    }

    #[test]
    fn generated_snapshots_are_sane(seed in any::<u64>()) {
        let mut g = emlsl::gen::Gen::new(seed);
        let ts = g.snapshot(6, 3);
        prop_assert!(ts.check_sanity().is_empty());
    }
}
