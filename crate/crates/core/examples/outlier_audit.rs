// Fair clusterings shift who looks like an outlier.
//
// Balanced clusters drag a whole blue stack far from its center, so it is
// flagged only under CM. Equality of service instead pulls a small, far
// stack into the same regime as everyone else, hiding it.

use fairclust::audit::{outlier_confusion, OutlierConfusion, OutlierRule};
use fairclust::clustering::ObjectiveKind;
use fairclust::fairness::{check_eq, solve_fair, CmBounds, EqSpec, Notion};
use fairclust::generators::{generate_figure_instance, FigureId, FigureParams};
use fairclust::search::SolveOptions;
use fairclust::solver::solve_exact;

pub struct OutlierExample {
    pub cm: OutlierConfusion,
    pub eq: OutlierConfusion,
    pub eq_violations: usize,
}

pub fn run_example() -> OutlierExample {
    let opts = SolveOptions::default();

    let inst = generate_figure_instance(FigureId::Fig5OutlierCm, &FigureParams::default()).unwrap();
    let cm = Notion::Cm(CmBounds::uniform(&inst, 0.5, 0.5).unwrap());
    let fair = solve_fair(&inst, 3, ObjectiveKind::KMedian, &cm, &opts).unwrap();
    let agnostic = solve_exact(&inst, 3, ObjectiveKind::KMedian, None, &opts).unwrap();
    let rule = OutlierRule::MultipleOfMedian { m: 10.0 };
    let cm_conf = outlier_confusion(&inst, &fair.clustering, &agnostic.clustering, &rule).unwrap();
    println!("CM: {} false positives, {} false negatives", cm_conf.false_positives(), cm_conf.false_negatives());
    for (g, c) in &cm_conf.per_group {
        println!("  {g}: flagged under CM {:?}", c.flagged_fair);
    }

    let inst = generate_figure_instance(FigureId::Fig6OutlierEq, &FigureParams::default()).unwrap();
    let slack = inst.metadata()["alpha"].as_f64().unwrap();
    let spec = EqSpec::new(slack).unwrap();
    let fair = solve_fair(&inst, 2, ObjectiveKind::KMedian, &Notion::Eq(spec), &opts).unwrap();
    let agnostic = solve_exact(&inst, 2, ObjectiveKind::KMedian, None, &opts).unwrap();
    let rule = OutlierRule::ClusterRelative { m: slack };
    let eq_conf = outlier_confusion(&inst, &fair.clustering, &agnostic.clustering, &rule).unwrap();
    let eq_violations = check_eq(&inst, &fair.clustering, &spec).unwrap().len();
    println!(
        "EQ (alpha = {slack:.3}): {} false positives, {} false negatives, {eq_violations} EQ violations",
        eq_conf.false_positives(),
        eq_conf.false_negatives()
    );

    OutlierExample { cm: cm_conf, eq: eq_conf, eq_violations }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
