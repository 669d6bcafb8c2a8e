//! Welfare-centric clustering: maximize the smallest group-average utility.
//!
//! Diversity couples the points of a cluster, so assignments are searched
//! per center set over cluster-by-color count matrices. Once the matrix is
//! fixed every cluster's outcome value is fixed too, and what remains is one
//! transportation problem per color over stacks of interchangeable points.

use std::collections::HashMap;
use std::time::Instant;

use super::model::{welfare, UtilityModel};
use crate::clustering::{cost_unchecked, ObjectiveKind};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::search::{
    for_each_count_matrix, realize, stacks, stacks_by_color, Budget, SearchStats, SolveOptions, Stack, IMPROVE_EPS,
};
use crate::solver::{check_k, minimize_over_center_sets, Criterion, SolveReport};
use crate::transport;

/// Clustering with at most `k` centers maximizing `min_h U_h`. The report's
/// objective value is the k-median cost of that clustering.
pub fn solve_welfare_centric(
    instance: &Instance,
    k: usize,
    model: &UtilityModel,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    check_k(instance, k)?;
    model.validate(instance)?;
    let start = Instant::now();
    let override_ids: HashMap<usize, usize> = model.overrides.keys().enumerate().map(|(i, &j)| (j, i + 1)).collect();
    let stacks = stacks(instance, |j| override_ids.get(&j).copied().unwrap_or(0));
    let by_color = stacks_by_color(&stacks, instance.n_colors());
    let search = WcSearch { instance, model, stacks: &stacks, by_color: &by_color };

    let mut budget = Budget::new(opts.budget_nodes);
    let (best, n_sets) = minimize_over_center_sets(
        instance,
        k,
        true,
        &mut budget,
        &|set| -search.upper_bound(set),
        &mut |set, budget| Ok(search.best_for_set(set, budget)?.map(|(v, a)| (-v, a))),
    )?;
    let best = best.ok_or(Error::Infeasible)?;
    let value = welfare(model, instance, &best.clustering)?.min_group;
    Ok(SolveReport {
        notion: "wc".into(),
        objective: ObjectiveKind::KMedian,
        objective_value: cost_unchecked(instance, best.clustering.assignment(), ObjectiveKind::KMedian),
        clustering: best.clustering,
        criterion: Some(Criterion { name: "min_group_welfare".into(), value }),
        optimal: true,
        achieved_ratio: Some(1.0),
        search_stats: SearchStats { nodes: budget.used(), center_sets: n_sets, wall_time: start.elapsed() },
    })
}

struct WcSearch<'a> {
    instance: &'a Instance,
    model: &'a UtilityModel,
    stacks: &'a [Stack],
    by_color: &'a [Vec<usize>],
}

impl WcSearch<'_> {
    /// min over groups of the average of each point's best utility within
    /// `set`, the outcome term at its most favorable value.
    fn upper_bound(&self, set: &[usize]) -> f64 {
        let inst = self.instance;
        let mut sums = vec![0.0; inst.n_colors()];
        for j in 0..inst.n() {
            let m = self.model.for_point(j);
            let best = set
                .iter()
                .map(|&c| m.upper_at(inst, c, inst.distance(j, c)).unwrap_or(f64::INFINITY))
                .fold(f64::NEG_INFINITY, f64::max);
            sums[inst.color(j)] += best;
        }
        sums.iter()
            .zip(inst.color_sizes())
            .map(|(s, n)| s / n as f64)
            .fold(f64::INFINITY, f64::min)
    }

    fn supplies(&self, h: usize) -> Vec<u32> {
        self.by_color[h].iter().map(|&s| self.stacks[s].size()).collect()
    }

    /// Negated utility of shipping one point of each stack of color `h` to
    /// each cluster. With `rows` the cluster compositions fix the outcome
    /// term; without, only the weighted distance term is counted.
    fn costs(&self, h: usize, set: &[usize], rows: Option<&[Vec<usize>]>) -> Result<Vec<Vec<f64>>> {
        let inst = self.instance;
        self.by_color[h]
            .iter()
            .map(|&s| {
                let rep = self.stacks[s].rep();
                let m = self.model.for_point(rep);
                set.iter()
                    .enumerate()
                    .map(|(i, &c)| {
                        let d = inst.distance(rep, c);
                        Ok(match rows {
                            None => -m.weights[0] * m.distance_term.eval(d),
                            Some(rows) => -m.combine(d, m.outcome_term.eval(inst, c, &rows[i])?),
                        })
                    })
                    .collect()
            })
            .collect()
    }

    fn best_for_set(&self, set: &[usize], budget: &mut Budget) -> Result<Option<(f64, Vec<usize>)>> {
        let inst = self.instance;
        let colors = inst.n_colors();
        let sizes = inst.color_sizes();
        let supplies: Vec<Vec<u32>> = (0..colors).map(|h| self.supplies(h)).collect();
        let generic = self.model.has_overrides();
        let dist_costs: Vec<Vec<Vec<f64>>> = if generic {
            Vec::new()
        } else {
            (0..colors).map(|h| self.costs(h, set, None)).collect::<Result<_>>()?
        };
        let base = &self.model.base;

        let mut memo: HashMap<(usize, Vec<u32>), f64> = HashMap::new();
        let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
        for_each_count_matrix(&sizes, set.len(), &|_| true, budget, &mut |rows| {
            let mut worst = f64::INFINITY;
            let outcomes: Vec<f64> = if generic {
                Vec::new()
            } else {
                set.iter()
                    .zip(rows)
                    .map(|(&c, row)| base.outcome_term.eval(inst, c, row))
                    .collect::<Result<_>>()?
            };
            for h in 0..colors {
                let column: Vec<u32> = rows.iter().map(|r| r[h] as u32).collect();
                let total = if generic {
                    let cost = self.costs(h, set, Some(rows))?;
                    -transport::min_cost(&supplies[h], &column, &cost).expect("balanced").value
                } else {
                    let dist = *memo.entry((h, column.clone())).or_insert_with(|| {
                        -transport::min_cost(&supplies[h], &column, &dist_costs[h]).expect("balanced").value
                    });
                    let outcome: f64 = rows.iter().zip(&outcomes).map(|(r, o)| r[h] as f64 * o).sum();
                    dist + base.weights[1] * outcome
                };
                worst = worst.min(total / sizes[h] as f64);
            }
            if best.as_ref().is_none_or(|(b, _)| worst > b + IMPROVE_EPS) {
                best = Some((worst, rows.to_vec()));
            }
            Ok(())
        })?;

        let Some((value, rows)) = best else {
            return Ok(None);
        };
        let mut shipments = vec![Vec::new(); self.stacks.len()];
        for h in 0..colors {
            let column: Vec<u32> = rows.iter().map(|r| r[h] as u32).collect();
            let cost = if generic { self.costs(h, set, Some(&rows))? } else { dist_costs[h].clone() };
            let plan = transport::min_cost(&supplies[h], &column, &cost).expect("balanced");
            for (row, &s) in plan.flow.into_iter().zip(&self.by_color[h]) {
                shipments[s] = row;
            }
        }
        Ok(Some((value, realize(inst.n(), self.stacks, set, &shipments))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{build_instance, Geometry};
    use crate::welfare::{theorem1_model, DistanceTerm, OutcomeTerm, PointModel};

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
    fn shared_center_trivial() {
        let inst = line(&[0.0, 0.0], &["r", "b"]);
        let rep = solve_welfare_centric(&inst, 1, &theorem1_model(1.0).unwrap(), &SolveOptions::default()).unwrap();
        // distance 0 and a perfectly diverse cluster: 3 + 3
        assert_eq!(rep.criterion.unwrap().value, 6.0);
    }

    #[test]
    fn diversity_pulls_groups_together() {
        // with one extra center, mixing both colors beats two pure clusters
        let inst = line(&[0.0, 0.5, 10.0], &["r", "b", "b"]);
        let m = theorem1_model(1.0).unwrap();
        let rep = solve_welfare_centric(&inst, 2, &m, &SolveOptions::default()).unwrap();
        let w = welfare(&m, &inst, &rep.clustering).unwrap();
        assert!((w.min_group - rep.criterion.as_ref().unwrap().value).abs() < 1e-12);
        assert_eq!(rep.clustering.center_of(0), rep.clustering.center_of(1));
    }

    #[test]
    fn overrides_take_the_generic_path() {
        let inst = line(&[0.0, 1.0, 4.0, 5.0], &["r", "b", "r", "b"]);
        let base = theorem1_model(1.0).unwrap();
        let m = base
            .clone()
            .with_override(
                2,
                PointModel {
                    distance_term: DistanceTerm::Negated,
                    outcome_term: OutcomeTerm::Constant { value: 0.0 },
                    weights: [1.0, 0.0],
                },
            )
            .unwrap();
        let rep = solve_welfare_centric(&inst, 2, &m, &SolveOptions::default()).unwrap();
        let w = welfare(&m, &inst, &rep.clustering).unwrap();
        assert!((w.min_group - rep.criterion.unwrap().value).abs() < 1e-12);
    }
}
