// Per-cluster linear classifiers: the agnostic clusters are each linearly
// separable, balanced ones are not.

use std::collections::BTreeMap;

use fairclust::audit::{per_cluster_separability, ClusterSeparability};
use fairclust::clustering::ObjectiveKind;
use fairclust::fairness::{solve_fair, CmBounds, Notion};
use fairclust::generators::{generate_figure_instance, FigureId, FigureParams};
use fairclust::search::SolveOptions;
use fairclust::solver::solve_exact;

pub type Separability = BTreeMap<usize, ClusterSeparability>;

/// `(agnostic, cm)` separability per cluster.
pub fn run_example() -> (Separability, Separability) {
    let inst = generate_figure_instance(FigureId::Fig7Classifier, &FigureParams::default()).unwrap();
    let opts = SolveOptions::default();
    let agnostic = solve_exact(&inst, 3, ObjectiveKind::KMedian, None, &opts).unwrap();
    let cm = Notion::Cm(CmBounds::uniform(&inst, 0.5, 0.5).unwrap());
    let fair = solve_fair(&inst, 3, ObjectiveKind::KMedian, &cm, &opts).unwrap();

    let a = per_cluster_separability(&inst, &agnostic.clustering).unwrap();
    let f = per_cluster_separability(&inst, &fair.clustering).unwrap();
    for (name, sep) in [("agnostic", &a), ("cm", &f)] {
        for (center, s) in sep {
            println!("{name:<8} cluster {center:>2}: size {}, separable {}", s.size, s.separable);
        }
    }
    (a, f)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
