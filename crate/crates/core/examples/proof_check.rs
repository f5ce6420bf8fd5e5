//! Checks the two bundled derivations and shows how a broken one is
//! reported: an error kind plus the path from the goal to the bad node.

use emlsl::proofs::{check_script, parse_script};

fn main() {
    for name in ["reservation.proof", "length_width.proof"] {
        let path = format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"));
        let text = std::fs::read_to_string(&path).expect("script exists");
        let script = parse_script(&text).expect("script parses");
        match check_script(&script) {
            Ok(()) => println!("{name}: accepted, goal {}", script.goal_judgment().unwrap()),
            Err(e) => println!("{name}: rejected: {e}"),
        }
        let broken = text.replacen("rule=r-act1", "rule=r-act2", 1).replacen("rule=vchop-I", "rule=hchop-I", 1);
        let script = parse_script(&broken).expect("script parses");
        match check_script(&script) {
            Ok(()) => println!("  mutant accepted"),
            Err(e) => println!("  mutant rejected with {} at {}", e.kind.code(), e.path.join(" / ")),
        }
    }
}
