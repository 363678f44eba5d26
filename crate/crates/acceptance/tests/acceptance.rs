//! Prints one PASS/FAIL line per acceptance criterion. The target fails if a
//! criterion fails for a reason outside `KNOWN_DEVIATIONS`, or if a listed
//! deviation stops failing.

use elastospec_acceptance::{Suite, KNOWN_DEVIATIONS};

fn main() {
    let suite = Suite::new();
    let mut unexpected = Vec::new();
    let mut seen = Vec::new();
    for id in 1..=8 {
        let outcome = suite.run(id);
        println!("{outcome}");
        if !outcome.only_known_failures() {
            unexpected.push(id);
        }
        seen.extend(outcome.failures().map(|c| (id, c.name.clone())));
    }
    let stale: Vec<_> = KNOWN_DEVIATIONS
        .iter()
        .filter(|(id, name)| !seen.iter().any(|(i, n)| i == id && n == name))
        .collect();
    let passed = 8 - seen.iter().map(|s| s.0).collect::<std::collections::BTreeSet<_>>().len();
    println!("acceptance: {passed}/8 criteria pass; known deviations: {}", KNOWN_DEVIATIONS.len());
    if !unexpected.is_empty() || !stale.is_empty() {
        eprintln!("unexpected failures in criteria {unexpected:?}; deviations no longer failing: {stale:?}");
        std::process::exit(1);
    }
}
