//! Inputs shared by the benchmarks.

use std::fmt::Write as _;

pub const AIRPORT: &str = include_str!("../../../fixtures/airport.tm");

/// A document with `width` parallel exclusive branches of `depth` events
/// each, between a common start and end. Runs: `width`.
pub fn branching_document(width: usize, depth: usize) -> String {
    let mut s = String::from("model wide {\n  thimac t \"T\" { stages: create; }\n}\n");
    s.push_str("subdiagram S \"S\" { stages: t.create; }\n");
    let mut names = vec!["A".to_string(), "Z".to_string()];
    for b in 0..width {
        for d in 0..depth {
            names.push(format!("B{b}_{d}"));
        }
    }
    for n in &names {
        let _ = writeln!(s, "event {n} = S;");
    }
    s.push_str("chronology C {\n");
    for b in 0..width {
        let chain: Vec<String> = (0..depth).map(|d| format!("B{b}_{d}")).collect();
        let _ = writeln!(s, "  A -> {} -> Z;", chain.join(" -> "));
    }
    let firsts: Vec<String> = (0..width).map(|b| format!("B{b}_0")).collect();
    let _ = writeln!(s, "  exclusive branch {{ {} }};", firsts.join(" | "));
    s.push_str("}\n");
    s
}
