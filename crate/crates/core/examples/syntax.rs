//! Parsing, printing and expansion of formulas, with the rigidity classes.

use emlsl::syntax::{chop_depth, dri, expand, hri, parse_formula, vri};

fn main() {
    let inputs = [
        "exists c:car. somewhere (re(c) and cl(ego))",
        "l < 2 || w = 1",
        "forall n:lane. [r(ego)] (free ^ 3 ~ top)",
        "(re(ego) || cl(ego)) ~ <c(ego)> top",
    ];
    for text in inputs {
        let f = parse_formula(text).expect("parses");
        let again = parse_formula(&f.to_string()).expect("printed text parses");
        assert_eq!(f, again);
        println!("{f}");
        println!("  core:  {}", expand(&f));
        println!("  chop depth {}, dri {}, hri {}, vri {}", chop_depth(&f), dri(&f), hri(&f), vri(&f));
    }
}
