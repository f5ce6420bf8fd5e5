#![allow(dead_code)]

pub mod mutants;
pub mod props;
pub mod witness;
pub mod oracle;

use emlsl::proofs::{parse_script, ProofScript};

pub fn example_path(name: &str) -> String {
    format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn example_text(name: &str) -> String {
    std::fs::read_to_string(example_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn example_script(name: &str) -> ProofScript {
    parse_script(&example_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The script with the mutant's edit applied; panics if the edit is a no-op.
pub fn mutate(m: &mutants::Mutant) -> String {
    let text = example_text(m.script);
    assert!(text.contains(m.find), "mutant `{}` does not apply", m.name);
    text.replacen(m.find, m.replace, 1)
}
