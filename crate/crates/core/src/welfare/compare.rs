use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::model::{welfare, UtilityModel};
use super::wc::solve_welfare_centric;
use crate::clustering::{cost_unchecked, group_costs, Clustering, ObjectiveKind};
use crate::error::Result;
use crate::fairness::{enumerate_optima, sf_objective, solve_fair, Notion, SfSpec};
use crate::instance::{Instance, DIST_TOL};
use crate::search::SolveOptions;
use crate::solver::{ratio, serialize_real, solve_exact};

/// A row source in a notion comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum CompareNotion {
    Agnostic,
    Fair(Notion),
    Wc,
}

impl CompareNotion {
    pub fn name(&self) -> &'static str {
        match self {
            CompareNotion::Agnostic => "agnostic",
            CompareNotion::Fair(n) => n.name(),
            CompareNotion::Wc => "wc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub solve: SolveOptions,
    /// One row per optimum (within `tol`) for agnostic and fair notions.
    pub enumerate_optima: bool,
    pub tol: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { solve: SolveOptions::default(), enumerate_optima: false, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub notion: String,
    /// Index among the notion's enumerated optima (0 otherwise).
    pub variant: usize,
    pub objective_value: f64,
    /// Worst group-average cost; absent for k-center.
    pub sf_value: Option<f64>,
    /// Objective value relative to the agnostic optimum.
    #[serde(serialize_with = "serialize_real")]
    pub pof: f64,
    pub group_costs: BTreeMap<String, f64>,
    pub total_welfare: f64,
    pub group_welfare: BTreeMap<String, f64>,
    pub min_group_welfare: f64,
    /// Groups whose average welfare is below the agnostic row's.
    pub degraded_groups: Vec<String>,
    pub clustering: Clustering,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub objective: ObjectiveKind,
    pub k: usize,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, notion: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.notion == notion)
    }
}

fn solutions(
    instance: &Instance,
    k: usize,
    objective: ObjectiveKind,
    model: &UtilityModel,
    notion: &CompareNotion,
    opts: &CompareOptions,
) -> Result<Vec<Clustering>> {
    let fair = match notion {
        CompareNotion::Wc => return Ok(vec![solve_welfare_centric(instance, k, model, &opts.solve)?.clustering]),
        CompareNotion::Agnostic => None,
        CompareNotion::Fair(n) => Some(n),
    };
    if opts.enumerate_optima {
        return enumerate_optima(instance, k, objective, fair, opts.tol, &opts.solve);
    }
    let rep = match fair {
        None => solve_exact(instance, k, objective, None, &opts.solve)?,
        Some(n) => solve_fair(instance, k, objective, n, &opts.solve)?,
    };
    Ok(vec![rep.clustering])
}

/// Solve the instance under each notion and tabulate cost, fairness and
/// welfare side by side.
pub fn compare_notions(
    instance: &Instance,
    k: usize,
    objective: ObjectiveKind,
    model: &UtilityModel,
    notions: &[CompareNotion],
    opts: &CompareOptions,
) -> Result<Comparison> {
    model.validate(instance)?;
    let reference = solve_exact(instance, k, objective, None, &opts.solve)?;
    let reference_welfare = welfare(model, instance, &reference.clustering)?;
    let sf = SfSpec::for_objective(objective).ok();

    let per_notion: Vec<Vec<Clustering>> = notions
        .par_iter()
        .map(|n| solutions(instance, k, objective, model, n, opts))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (notion, sols) in notions.iter().zip(per_notion) {
        for (variant, clustering) in sols.into_iter().enumerate() {
            let objective_value = cost_unchecked(instance, clustering.assignment(), objective);
            let w = welfare(model, instance, &clustering)?;
            let degraded_groups = w
                .per_group
                .iter()
                .filter(|(g, u)| **u < reference_welfare.per_group[*g] - DIST_TOL)
                .map(|(g, _)| g.clone())
                .collect();
            rows.push(ComparisonRow {
                notion: notion.name().into(),
                variant,
                objective_value,
                sf_value: sf.map(|s| sf_objective(instance, &clustering, &s)),
                pof: ratio(objective_value, reference.objective_value),
                group_costs: group_costs(instance, &clustering, objective)
                    .into_iter()
                    .enumerate()
                    .map(|(h, c)| (instance.color_name(h).to_string(), c))
                    .collect(),
                total_welfare: w.total,
                group_welfare: w.per_group,
                min_group_welfare: w.min_group,
                degraded_groups,
                clustering,
            });
        }
    }
    Ok(Comparison { objective, k, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::CmBounds;
    use crate::instance::{build_instance, Geometry};
    use crate::welfare::theorem1_model;

    fn inst() -> Instance {
        build_instance(
            Geometry::Coords([0.0, 1.0, 6.0, 7.0].iter().map(|&x| vec![x]).collect()),
            ["r", "r", "b", "b"].iter().map(|c| c.to_string()).collect(),
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn agnostic_only_has_no_flags() {
        let inst = inst();
        let m = theorem1_model(1.0).unwrap();
        let cmp = compare_notions(&inst, 2, ObjectiveKind::KMedian, &m, &[CompareNotion::Agnostic], &Default::default())
            .unwrap();
        assert_eq!(cmp.rows.len(), 1);
        assert!(cmp.rows[0].degraded_groups.is_empty());
        assert_eq!(cmp.rows[0].pof, 1.0);
    }

    #[test]
    fn wc_row_dominates_min_welfare() {
        let inst = inst();
        let m = theorem1_model(1.0).unwrap();
        let notions = [
            CompareNotion::Agnostic,
            CompareNotion::Fair(Notion::Cm(CmBounds::uniform(&inst, 0.5, 0.5).unwrap())),
            CompareNotion::Fair(Notion::Sf(SfSpec::new(1).unwrap())),
            CompareNotion::Wc,
        ];
        let cmp = compare_notions(&inst, 2, ObjectiveKind::KMedian, &m, &notions, &Default::default()).unwrap();
        let wc = cmp.row("wc").unwrap().min_group_welfare;
        assert!(cmp.rows.iter().all(|r| r.min_group_welfare <= wc + 1e-9));
    }
}
