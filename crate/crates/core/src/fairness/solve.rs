use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::Serialize;

use super::check::{check_eq, sf_objective};
use super::{Constraint, Notion, SfSpec};
use crate::clustering::{cost_unchecked, group_costs, nearest_assignment, Clustering, ObjectiveKind};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::search::{Budget, SearchStats, SolveOptions, IMPROVE_EPS};
use crate::solver::{check_k, minimize_over_center_sets, ratio, serialize_real, solve_exact, Criterion, SolveReport};

fn check_sf(objective: ObjectiveKind, spec: &SfSpec) -> Result<()> {
    let expected = SfSpec::for_objective(objective)?;
    if expected != *spec {
        return Err(Error::InvalidParams(format!(
            "SF power {} does not match objective {}",
            spec.p(),
            objective.name()
        )));
    }
    Ok(())
}

/// Optimal clustering under a fairness notion: CM and EQ minimize the
/// objective subject to the constraint, SF minimizes the worst group's
/// average cost.
pub fn solve_fair(
    instance: &Instance,
    k: usize,
    objective: ObjectiveKind,
    notion: &Notion,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let Notion::Sf(spec) = notion else {
        return solve_exact(instance, k, objective, notion.constraint().as_ref(), opts);
    };
    check_sf(objective, spec)?;
    check_k(instance, k)?;
    let start = Instant::now();
    let mut budget = Budget::new(opts.budget_nodes);
    // the SF terms are each minimized by nearest assignment for fixed centers
    let (best, n_sets) = minimize_over_center_sets(
        instance,
        k,
        false,
        &mut budget,
        &|_| f64::NEG_INFINITY,
        &mut |set, budget| {
            budget.tick(1)?;
            let c = nearest_assignment(instance, set)?;
            Ok(Some((sf_objective(instance, &c, spec), c.assignment().to_vec())))
        },
    )?;
    let best = best.ok_or(Error::Infeasible)?;
    Ok(SolveReport {
        notion: "sf".into(),
        objective,
        objective_value: cost_unchecked(instance, best.clustering.assignment(), objective),
        clustering: best.clustering,
        criterion: Some(Criterion { name: "sf_value".into(), value: best.value }),
        optimal: true,
        achieved_ratio: Some(1.0),
        search_stats: SearchStats { nodes: budget.used(), center_sets: n_sets, wall_time: start.elapsed() },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDegradation {
    pub fair_cost: f64,
    pub agnostic_cost: f64,
    #[serde(serialize_with = "serialize_real")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SfRatio {
    pub fair_sf: f64,
    pub agnostic_sf: f64,
    #[serde(serialize_with = "serialize_real")]
    pub ratio: f64,
}

pub const PER_GROUP_DEFINITION: &str = "per-group ratio = (sum over the group's points of d^p under the fair \
     clustering) / (same sum under the agnostic optimum); an operational definition, not a standard one";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PofReport {
    pub notion: String,
    pub objective: ObjectiveKind,
    pub fair_cost: f64,
    pub agnostic_cost: f64,
    /// Objective cost of the fair optimum over the agnostic optimum.
    #[serde(serialize_with = "serialize_real")]
    pub overall: f64,
    /// Only for SF: SF value of the SF optimum over that of the agnostic optimum.
    pub sf_ratio: Option<SfRatio>,
    pub per_group: BTreeMap<String, GroupDegradation>,
    pub per_group_definition: &'static str,
    pub fair: Clustering,
    pub agnostic: Clustering,
}

/// Per-color cost under `fair` relative to `agnostic`, with the objective's power.
pub fn group_degradation(
    instance: &Instance,
    objective: ObjectiveKind,
    fair: &Clustering,
    agnostic: &Clustering,
) -> BTreeMap<String, GroupDegradation> {
    let f = group_costs(instance, fair, objective);
    let a = group_costs(instance, agnostic, objective);
    (0..instance.n_colors())
        .map(|h| {
            let g = GroupDegradation { fair_cost: f[h], agnostic_cost: a[h], ratio: ratio(f[h], a[h]) };
            (instance.color_name(h).to_string(), g)
        })
        .collect()
}

/// Assemble a report for an already-computed pair of solutions.
pub fn pof_from_solutions(
    instance: &Instance,
    objective: ObjectiveKind,
    notion: &Notion,
    fair: &Clustering,
    agnostic: &Clustering,
) -> PofReport {
    let fair_cost = cost_unchecked(instance, fair.assignment(), objective);
    let agnostic_cost = cost_unchecked(instance, agnostic.assignment(), objective);
    let sf_ratio = match notion {
        Notion::Sf(spec) => {
            let fair_sf = sf_objective(instance, fair, spec);
            let agnostic_sf = sf_objective(instance, agnostic, spec);
            Some(SfRatio { fair_sf, agnostic_sf, ratio: ratio(fair_sf, agnostic_sf) })
        }
        _ => None,
    };
    PofReport {
        notion: notion.name().into(),
        objective,
        fair_cost,
        agnostic_cost,
        overall: ratio(fair_cost, agnostic_cost),
        sf_ratio,
        per_group: group_degradation(instance, objective, fair, agnostic),
        per_group_definition: PER_GROUP_DEFINITION,
        fair: fair.clone(),
        agnostic: agnostic.clone(),
    }
}

pub fn price_of_fairness(
    instance: &Instance,
    k: usize,
    objective: ObjectiveKind,
    notion: &Notion,
    opts: &SolveOptions,
) -> Result<PofReport> {
    let agnostic = solve_exact(instance, k, objective, None, opts)?;
    let fair = solve_fair(instance, k, objective, notion, opts)?;
    Ok(pof_from_solutions(instance, objective, notion, &fair.clustering, &agnostic.clustering))
}

/// Every notion-respecting clustering with at most `k` centers whose value
/// (objective, or SF value for SF) is within `tol` of the optimum, one per
/// distinct assignment, in canonical order.
pub fn enumerate_optima(
    instance: &Instance,
    k: usize,
    objective: ObjectiveKind,
    notion: Option<&Notion>,
    tol: f64,
    opts: &SolveOptions,
) -> Result<Vec<Clustering>> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be nonnegative, got {tol}")));
    }
    let optimum = match notion {
        Some(n) => solve_fair(instance, k, objective, n, opts),
        None => solve_exact(instance, k, objective, None, opts),
    };
    let optimum = match optimum {
        Ok(r) => r.criterion.map_or(r.objective_value, |c| c.value),
        Err(Error::Infeasible) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let cap = optimum + tol + IMPROVE_EPS;
    let mut budget = Budget::new(opts.budget_nodes);
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();

    if let Some(Notion::Sf(spec)) = notion {
        let candidates = instance.candidates();
        let mut chosen = Vec::new();
        subsets(&candidates, k, 0, &mut chosen, &mut budget, &mut |set| {
            let c = nearest_assignment(instance, set)?;
            if sf_objective(instance, &c, spec) <= cap {
                found.insert(c.assignment().to_vec());
            }
            Ok(())
        })?;
    } else {
        let constraint = notion.and_then(Notion::constraint);
        assignments_within(instance, k, objective, constraint.as_ref(), cap, &mut budget, &mut found)?;
    }
    let mut out: Vec<Clustering> = found.into_iter().map(Clustering::from_assignment).collect();
    out.sort_by(|a, b| a.canonical_cmp(b));
    Ok(out)
}

fn subsets(
    items: &[usize],
    k: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    budget: &mut Budget,
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if !chosen.is_empty() {
        budget.tick(1)?;
        visit(chosen)?;
    }
    if chosen.len() == k {
        return Ok(());
    }
    for i in from..items.len() {
        chosen.push(items[i]);
        subsets(items, k, i + 1, chosen, budget, visit)?;
        chosen.pop();
    }
    Ok(())
}

/// Depth-first over all assignments with at most `k` distinct centers,
/// pruned by cost; constraints are checked at the leaves.
fn assignments_within(
    instance: &Instance,
    k: usize,
    objective: ObjectiveKind,
    constraint: Option<&Constraint>,
    cap: f64,
    budget: &mut Budget,
    found: &mut BTreeSet<Vec<usize>>,
) -> Result<()> {
    let n = instance.n();
    let candidates = instance.candidates();
    // best possible contribution of points j.. (combined)
    let mut suffix = vec![0.0; n + 1];
    for j in (0..n).rev() {
        let d = candidates.iter().map(|&c| instance.distance(j, c)).fold(f64::INFINITY, f64::min);
        suffix[j] = objective.combine(suffix[j + 1], objective.point_cost(d));
    }

    struct Walk<'a> {
        instance: &'a Instance,
        candidates: Vec<usize>,
        k: usize,
        objective: ObjectiveKind,
        constraint: Option<&'a Constraint>,
        cap: f64,
        suffix: Vec<f64>,
        assignment: Vec<usize>,
        uses: BTreeMap<usize, usize>,
    }

    impl Walk<'_> {
        fn leaf_ok(&self) -> Result<bool> {
            Ok(match self.constraint {
                None => true,
                Some(Constraint::Cm(bounds)) => Clustering::from_assignment(self.assignment.clone())
                    .color_counts(self.instance)
                    .values()
                    .all(|row| bounds.admits(row)),
                Some(Constraint::Eq(spec)) => {
                    check_eq(self.instance, &Clustering::from_assignment(self.assignment.clone()), spec)?.is_empty()
                }
            })
        }

        fn go(&mut self, j: usize, acc: f64, budget: &mut Budget, found: &mut BTreeSet<Vec<usize>>) -> Result<()> {
            budget.tick(1)?;
            if self.objective.combine(acc, self.suffix[j]) > self.cap {
                return Ok(());
            }
            if j == self.assignment.len() {
                if self.leaf_ok()? {
                    found.insert(self.assignment.clone());
                }
                return Ok(());
            }
            for ci in 0..self.candidates.len() {
                let c = self.candidates[ci];
                let fresh = !self.uses.contains_key(&c);
                if fresh && self.uses.len() == self.k {
                    continue;
                }
                let next = self.objective.combine(acc, self.objective.point_cost(self.instance.distance(j, c)));
                self.assignment[j] = c;
                *self.uses.entry(c).or_default() += 1;
                let r = self.go(j + 1, next, budget, found);
                let e = self.uses.get_mut(&c).expect("just inserted");
                *e -= 1;
                if *e == 0 {
                    self.uses.remove(&c);
                }
                r?;
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        instance,
        candidates,
        k,
        objective,
        constraint,
        cap,
        suffix,
        assignment: vec![0; n],
        uses: BTreeMap::new(),
    };
    walk.go(0, 0.0, budget, found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::CmBounds;
    use crate::instance::{build_instance, Geometry};

    fn line(xs: &[f64], colors: &[&str]) -> Instance {
        build_instance(
            Geometry::Coords(xs.iter().map(|&x| vec![x]).collect()),
            colors.iter().map(|c| c.to_string()).collect(),
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn loose_bounds_cost_nothing() {
        let inst = line(&[0.0, 1.0, 5.0, 6.0, 9.0], &["r", "r", "b", "b", "r"]);
        let notion = Notion::Cm(CmBounds::uniform(&inst, 0.0, 1.0).unwrap());
        let pof = price_of_fairness(&inst, 2, ObjectiveKind::KMedian, &notion, &SolveOptions::default()).unwrap();
        assert_eq!(pof.overall, 1.0);
        assert!(pof.per_group.values().all(|g| g.ratio == 1.0));
    }

    #[test]
    fn one_point_per_color_single_cluster() {
        let inst = line(&[0.0, 2.0], &["r", "b"]);
        let notion = Notion::Cm(CmBounds::uniform(&inst, 0.5, 0.5).unwrap());
        let rep = solve_fair(&inst, 1, ObjectiveKind::KMedian, &notion, &SolveOptions::default()).unwrap();
        assert_eq!(rep.clustering.centers().len(), 1);
        assert_eq!(rep.objective_value, 2.0);
    }

    #[test]
    fn sf_must_match_objective() {
        let inst = line(&[0.0, 2.0], &["r", "b"]);
        let notion = Notion::Sf(SfSpec::new(2).unwrap());
        assert!(solve_fair(&inst, 1, ObjectiveKind::KMedian, &notion, &SolveOptions::default()).is_err());
    }

    #[test]
    fn sf_balances_groups() {
        // two reds near 0, one blue far right; with one center SF moves toward blue
        let inst = line(&[0.0, 0.0, 6.0, 10.0], &["r", "r", "b", "b"]);
        let notion = Notion::Sf(SfSpec::new(1).unwrap());
        let rep = solve_fair(&inst, 1, ObjectiveKind::KMedian, &notion, &SolveOptions::default()).unwrap();
        let agn = solve_exact(&inst, 1, ObjectiveKind::KMedian, None, &SolveOptions::default()).unwrap();
        let spec = SfSpec::new(1).unwrap();
        assert!(rep.criterion.unwrap().value <= sf_objective(&inst, &agn.clustering, &spec) + 1e-9);
    }

    #[test]
    fn unique_optimum_is_listed_once() {
        let inst = line(&[0.0, 1.0, 10.0, 12.0], &["r", "b", "r", "b"]);
        let list = enumerate_optima(&inst, 1, ObjectiveKind::KCenter, None, 0.0, &SolveOptions::default()).unwrap();
        assert_eq!(list.len(), 1);
    }

    #[test]
    fn infinite_tolerance_lists_everything() {
        let inst = line(&[0.0, 1.0, 3.0], &["r", "b", "r"]);
        let list =
            enumerate_optima(&inst, 2, ObjectiveKind::KMedian, None, f64::INFINITY, &SolveOptions::default()).unwrap();
        // assignments of 3 points into 3 candidates using at most 2 distinct: 27 - 6
        assert_eq!(list.len(), 21);
    }

    #[test]
    fn inf_ratio_serializes_as_string() {
        let g = GroupDegradation { fair_cost: 1.0, agnostic_cost: 0.0, ratio: ratio(1.0, 0.0) };
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"inf\""), "{text}");
    }
}
