// Price of fairness for each notion on one instance, overall and per group.

use fairclust::clustering::ObjectiveKind;
use fairclust::fairness::{price_of_fairness, CmBounds, EqSpec, Notion, PofReport, SfSpec};
use fairclust::generators::{generate_figure_instance, FigureId, FigureParams};
use fairclust::search::SolveOptions;

pub fn run_example() -> Vec<PofReport> {
    let inst = generate_figure_instance(FigureId::Fig2Eq, &FigureParams::default()).unwrap();
    let notions = [
        Notion::Cm(CmBounds::uniform(&inst, 0.4, 0.6).unwrap()),
        Notion::Eq(EqSpec::new(2.0).unwrap()),
        Notion::Sf(SfSpec::new(1).unwrap()),
    ];
    let mut reports = Vec::new();
    for n in &notions {
        match price_of_fairness(&inst, 3, ObjectiveKind::KMedian, n, &SolveOptions::default()) {
            Ok(rep) => {
                let groups: Vec<String> = rep.per_group.iter().map(|(g, d)| format!("{g} x{:.2}", d.ratio)).collect();
                println!("{:<3} overall x{:.3}  {}", rep.notion, rep.overall, groups.join(", "));
                reports.push(rep);
            }
            Err(e) => println!("{:<3} {e}", n.name()),
        }
    }
    reports
}

#[allow(dead_code)]
fn main() {
    run_example();
}
