// Equally good CM solutions can hurt opposite groups. Listing every
// co-optimal clustering exposes the choice a single solver run hides.

use fairclust::clustering::{evaluate_cost, ObjectiveKind};
use fairclust::fairness::{enumerate_optima, group_degradation, CmBounds, Notion};
use fairclust::generators::{generate_figure_instance, FigureId, FigureParams};
use fairclust::search::SolveOptions;
use fairclust::solver::solve_exact;

pub struct Optimum {
    pub cost: f64,
    pub red_ratio: f64,
    pub blue_ratio: f64,
}

pub fn run_example() -> Vec<Optimum> {
    let inst = generate_figure_instance(FigureId::Fig4Degradation, &FigureParams::default()).unwrap();
    let objective = ObjectiveKind::KMedian;
    let opts = SolveOptions::default();
    let cm = Notion::Cm(CmBounds::uniform(&inst, 0.5, 0.5).unwrap());
    let agnostic = solve_exact(&inst, 2, objective, None, &opts).unwrap().clustering;
    let optima = enumerate_optima(&inst, 2, objective, Some(&cm), 1e-9, &opts).unwrap();

    let mut out = Vec::new();
    for c in &optima {
        let deg = group_degradation(&inst, objective, c, &agnostic);
        let o = Optimum {
            cost: evaluate_cost(&inst, c, objective).unwrap(),
            red_ratio: deg["red"].ratio,
            blue_ratio: deg["blue"].ratio,
        };
        println!("centers {:?}: cost {:.3}, red x{:.2}, blue x{:.2}", c.centers(), o.cost, o.red_ratio, o.blue_ratio);
        out.push(o);
    }
    out
}

#[allow(dead_code)]
fn main() {
    run_example();
}
