// Group-level notions (CM, SF) cannot guarantee good per-group welfare:
// on the separation instance both cap each group's average utility at 2r,
// while the welfare-centric optimum gives every group at least 3r.

use fairclust::clustering::ObjectiveKind;
use fairclust::fairness::{CmBounds, Notion, SfSpec};
use fairclust::generators::{generate_figure_instance, FigureId, FigureParams};
use fairclust::welfare::{compare_notions, theorem1_model, CompareNotion, CompareOptions, Comparison};

pub fn run_example() -> Comparison {
    let r = 1.0;
    let params = FigureParams { r: Some(r), ..Default::default() };
    let inst = generate_figure_instance(FigureId::Thm1, &params).expect("valid params");
    let model = theorem1_model(r).expect("r > 0");
    let notions = [
        CompareNotion::Agnostic,
        CompareNotion::Fair(Notion::Cm(CmBounds::uniform(&inst, 0.5, 0.5).unwrap())),
        CompareNotion::Fair(Notion::Sf(SfSpec::new(1).unwrap())),
        CompareNotion::Wc,
    ];
    let cmp = compare_notions(&inst, 4, ObjectiveKind::KMedian, &model, &notions, &CompareOptions::default())
        .expect("all notions feasible");

    println!("{:<10} {:>8} {:>8} {:>8}", "notion", "cost", "U_red", "U_blue");
    for row in &cmp.rows {
        println!(
            "{:<10} {:>8.3} {:>8.3} {:>8.3}",
            row.notion, row.objective_value, row.group_welfare["red"], row.group_welfare["blue"]
        );
    }
    cmp
}

#[allow(dead_code)]
fn main() {
    run_example();
}
