// Cross-check every exact solver against exhaustive enumeration on small
// random instances.

use fairclust::oracle::{oracle_equivalence, EquivalenceReport};
use fairclust::search::SolveOptions;

pub fn run_example() -> EquivalenceReport {
    let report = oracle_equivalence(7, 40, 1e-9, &SolveOptions::default()).unwrap();
    println!("{} cases, {} comparisons, {} mismatches", report.cases, report.comparisons, report.mismatches.len());
    for m in &report.mismatches {
        println!("  {m}");
    }
    report
}

#[allow(dead_code)]
fn main() {
    run_example();
}
