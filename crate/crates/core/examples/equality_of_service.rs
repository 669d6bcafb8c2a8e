// Equality of service can be met by serving everyone equally badly: the
// EQ-constrained k-center optimum sends all five points to the middle one.

use fairclust::clustering::{Clustering, ObjectiveKind};
use fairclust::fairness::{check_eq, EqSpec, Notion};
use fairclust::generators::{generate_figure_instance, FigureId, FigureParams};
use fairclust::search::SolveOptions;
use fairclust::fairness::solve_fair;
use fairclust::solver::solve_exact;

/// `(eq optimum, agnostic optimum, per-point distances under each)`.
pub fn run_example() -> (Clustering, Clustering, Vec<(f64, f64)>) {
    let inst = generate_figure_instance(FigureId::Fig2Eq, &FigureParams::default()).unwrap();
    let opts = SolveOptions::default();
    let spec = EqSpec::new(1.0).unwrap();
    let eq = solve_fair(&inst, 3, ObjectiveKind::KCenter, &Notion::Eq(spec), &opts).unwrap();
    let agnostic = solve_exact(&inst, 3, ObjectiveKind::KCenter, None, &opts).unwrap();
    assert!(check_eq(&inst, &eq.clustering, &spec).unwrap().is_empty());

    let pairs: Vec<(f64, f64)> = eq
        .clustering
        .distances(&inst)
        .into_iter()
        .zip(agnostic.clustering.distances(&inst))
        .collect();
    println!("EQ centers {:?}, cost {:.3}", eq.clustering.centers(), eq.objective_value);
    println!("agnostic centers {:?}, cost {:.3}", agnostic.clustering.centers(), agnostic.objective_value);
    for (j, (e, a)) in pairs.iter().enumerate() {
        println!("point {}: d_eq = {e:.3}, d_agnostic = {a:.3}", j + 1);
    }
    (eq.clustering, agnostic.clustering, pairs)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
