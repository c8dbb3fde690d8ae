//! Runs every suite with the default config, prints one line per
//! acceptance criterion, and checks determinism by a second run.

use std::collections::BTreeMap;

use aniso_hardy_cli::{run, ExperimentConfig};

/// Runtime limits in seconds per criterion.
const LIMITS: [(u32, f64); 13] = [
    (1, 10.0),
    (2, 30.0),
    (3, 60.0),
    (4, 60.0),
    (5, 60.0),
    (6, 180.0),
    (7, 300.0),
    (8, 120.0),
    (9, 120.0),
    (10, 120.0),
    (11, 120.0),
    (12, 180.0),
    (13, 30.0),
];

#[test]
fn acceptance_criteria() {
    let cfg = ExperimentConfig::default();
    let first = run(&cfg).expect("suites run");
    let mut outcomes: BTreeMap<u32, (String, bool, f64)> = BTreeMap::new();
    for s in &first.suites {
        for c in &s.criteria {
            outcomes.insert(c.id, (c.title.clone(), c.passed, s.seconds[&c.id]));
        }
    }
    let mut failed = Vec::new();
    for (id, limit) in LIMITS {
        let (title, passed, secs) = outcomes.get(&id).cloned().unwrap_or(("missing".into(), false, f64::NAN));
        let ok = passed && secs < limit;
        println!("criterion {id:>2}: {} {title} ({secs:.1} s, limit {limit} s)", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(id);
        }
    }

    let second = run(&cfg).expect("suites run");
    let (a, b) = (first.payload(cfg.seed, Some(&cfg)).unwrap(), second.payload(cfg.seed, Some(&cfg)).unwrap());
    let same = a == b;
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    println!("criterion 14: {} byte-identical payloads over {} files{}", if same { "PASS" } else { "FAIL" }, a.len(), if same { String::new() } else { format!(", differing {differing:?}") });
    if !same {
        failed.push(14);
    }
    assert!(failed.is_empty(), "failing criteria {failed:?}");
}
