// Socially fair clustering balances average costs, not cluster makeup: its
// optimum can leave a cluster with a single color.

use std::collections::BTreeMap;

use fairclust::clustering::ObjectiveKind;
use fairclust::fairness::{group_averages, solve_fair, Notion, SfSpec};
use fairclust::generators::{generate_figure_instance, FigureId, FigureParams};
use fairclust::search::SolveOptions;

/// Color counts (by name) of every SF cluster.
pub fn run_example() -> Vec<BTreeMap<String, usize>> {
    let inst = generate_figure_instance(FigureId::Fig3Sf, &FigureParams::default()).unwrap();
    let spec = SfSpec::for_objective(ObjectiveKind::KMedian).unwrap();
    let rep = solve_fair(&inst, 2, ObjectiveKind::KMedian, &Notion::Sf(spec), &SolveOptions::default()).unwrap();
    println!("SF value {:.3}", rep.criterion.as_ref().unwrap().value);
    println!("group averages {:?}", group_averages(&inst, &rep.clustering, &spec));

    let mut compositions = Vec::new();
    for (center, counts) in rep.clustering.color_counts(&inst) {
        let named: BTreeMap<String, usize> =
            counts.iter().enumerate().map(|(h, &c)| (inst.color_name(h).to_string(), c)).collect();
        println!("cluster at {center}: {named:?}");
        compositions.push(named);
    }
    compositions
}

#[allow(dead_code)]
fn main() {
    run_example();
}
