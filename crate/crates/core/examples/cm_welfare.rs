// Balanced clusters can make *both* groups worse off. Under a utility that
// only counts distance, the CM optimum lowers every group's welfare, and
// the loss grows with the separation between the stacks.

use fairclust::clustering::ObjectiveKind;
use fairclust::fairness::{CmBounds, Notion};
use fairclust::generators::{generate_figure_instance, FigureId, FigureParams};
use fairclust::welfare::{compare_notions, CompareNotion, CompareOptions, DistanceTerm, OutcomeTerm, UtilityModel};

/// `(s, per-group welfare gap agnostic − CM)` for a few separations.
pub fn run_example() -> Vec<(f64, Vec<(String, f64)>)> {
    let model = UtilityModel::new(DistanceTerm::Negated, OutcomeTerm::Constant { value: 0.0 }, [1.0, 0.0]).unwrap();
    let mut gaps = Vec::new();
    for s in [10.0, 20.0, 40.0] {
        let params = FigureParams { s: Some(s), ..Default::default() };
        let inst = generate_figure_instance(FigureId::Fig1Cm, &params).unwrap();
        let cm = CompareNotion::Fair(Notion::Cm(CmBounds::uniform(&inst, 0.5, 0.5).unwrap()));
        let cmp = compare_notions(
            &inst,
            3,
            ObjectiveKind::KMedian,
            &model,
            &[CompareNotion::Agnostic, cm],
            &CompareOptions::default(),
        )
        .unwrap();
        let (agnostic, fair) = (cmp.row("agnostic").unwrap(), cmp.row("cm").unwrap());
        let gap: Vec<(String, f64)> = agnostic
            .group_welfare
            .iter()
            .map(|(g, u)| (g.clone(), u - fair.group_welfare[g]))
            .collect();
        println!("s = {s:>4}: pof = {:.3}, degraded = {:?}, gaps = {gap:?}", fair.pof, fair.degraded_groups);
        gaps.push((s, gap));
    }
    gaps
}

#[allow(dead_code)]
fn main() {
    run_example();
}
