//! Replays a derivation on a concrete model: every node whose hypotheses
//! hold must have a true conclusion.

use emlsl::proofs::{parse_script, semantic_audit, BindingJson};

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples");
    let script = parse_script(&std::fs::read_to_string(format!("{dir}/reservation.proof")).unwrap()).unwrap();
    let raw: BindingJson =
        serde_json::from_str(&std::fs::read_to_string(format!("{dir}/reservation.binding.json")).unwrap()).unwrap();
    let binding = raw.to_binding().expect("binding is well formed");
    let report = semantic_audit(&script, &binding).expect("Delta holds");
    println!("checked {} nodes, skipped {}, failures {:?}", report.checked, report.skipped, report.failures);

    let corrupt = parse_script(
        &std::fs::read_to_string(format!("{dir}/reservation.proof"))
            .unwrap()
            .replace("conclude S',V |- re(c)\n", "conclude S',V |- cl(c)\n"),
    )
    .unwrap();
    let report = semantic_audit(&corrupt, &binding).unwrap();
    for f in &report.failures {
        println!("corrupted node {} is false: {}", f.node, f.judgment);
    }
}
