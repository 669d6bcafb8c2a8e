//! Exact desk-scale solvers: enumerate every admissible center set (up to
//! interchangeable candidates) and, per set, compute the best
//! constraint-respecting assignment.
//!
//! Per-set assignment:
//! - unconstrained: nearest center.
//! - CM: branch over cluster-by-color count matrices that satisfy the bounds,
//!   then one min-cost (or bottleneck, for k-center) transportation problem
//!   per color moves stacks of interchangeable points into the clusters.
//! - EQ: the constraint `x_j ≤ α x_m` is closed under componentwise minimum,
//!   so the least feasible vector of assigned distances exists and is found
//!   by monotone propagation; it minimizes all three objectives at once.

use std::collections::HashMap;
use std::time::Instant;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::clustering::{cost_unchecked, nearest_assignment, Clustering, ObjectiveKind};
use crate::error::{Error, Result};
use crate::fairness::{CmBounds, Constraint};
use crate::instance::{Instance, DIST_TOL};
use crate::search::{
    center_sets, for_each_count_matrix, realize, stacks, stacks_by_color, Budget, SearchStats,
    SolveOptions, Stack, IMPROVE_EPS,
};
use crate::transport;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
}

/// Outcome of an exact solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub notion: String,
    pub objective: ObjectiveKind,
    pub clustering: Clustering,
    /// Clustering cost under `objective`.
    pub objective_value: f64,
    /// The quantity actually optimized when it is not the objective
    /// (SF value, minimum group welfare).
    pub criterion: Option<Criterion>,
    pub optimal: bool,
    pub achieved_ratio: Option<f64>,
    pub search_stats: SearchStats,
}

impl Serialize for Clustering {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Clustering", 2)?;
        st.serialize_field("centers", self.centers())?;
        let map: std::collections::BTreeMap<usize, usize> =
            self.assignment().iter().copied().enumerate().collect();
        st.serialize_field("assignment", &map)?;
        st.end()
    }
}

impl Serialize for SolveReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("SolveReport", 8)?;
        st.serialize_field("notion", &self.notion)?;
        st.serialize_field("objective", &self.objective)?;
        st.serialize_field("clustering", &self.clustering)?;
        st.serialize_field("objective_value", &self.objective_value)?;
        st.serialize_field("criterion", &self.criterion)?;
        st.serialize_field("optimal", &self.optimal)?;
        st.serialize_field("achieved_ratio", &self.achieved_ratio.map(RealRepr))?;
        st.serialize_field("search_stats", &self.search_stats)?;
        st.end()
    }
}

struct RealRepr(f64);

impl Serialize for RealRepr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_real(&self.0, s)
    }
}

impl SolveReport {
    /// Record `objective_value / optimum` against a known optimum.
    pub fn with_reference(mut self, optimum: f64) -> Self {
        self.achieved_ratio = Some(ratio(self.objective_value, optimum));
        self
    }
}

/// Serialize non-finite reals as `"inf"`, `"-inf"` or `"nan"` (JSON has no
/// literal for them).
pub(crate) fn serialize_real<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den.abs() <= DIST_TOL {
        if num.abs() <= DIST_TOL {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

pub(crate) fn check_k(instance: &Instance, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    if instance.candidates().is_empty() {
        return Err(Error::InvalidParams("instance has no candidate centers".into()));
    }
    Ok(())
}

/// Best (minimum) value over all center sets; ties resolved by the
/// canonical order of the normalized clustering.
pub(crate) struct Incumbent {
    pub value: f64,
    pub clustering: Clustering,
}

impl Incumbent {
    pub fn offer(slot: &mut Option<Incumbent>, value: f64, assignment: Vec<usize>) {
        let clustering = Clustering::from_assignment(assignment);
        let replace = match slot {
            None => true,
            Some(best) => {
                value < best.value - IMPROVE_EPS
                    || (value <= best.value + IMPROVE_EPS
                        && clustering.canonical_cmp(&best.clustering).is_lt())
            }
        };
        if replace {
            *slot = Some(Incumbent { value, clustering });
        }
    }
}

pub(crate) fn minimize_over_center_sets(
    instance: &Instance,
    k: usize,
    colocated: bool,
    budget: &mut Budget,
    lower_bound: &dyn Fn(&[usize]) -> f64,
    per_set: &mut dyn FnMut(&[usize], &mut Budget) -> Result<Option<(f64, Vec<usize>)>>,
) -> Result<(Option<Incumbent>, u64)> {
    let sets = center_sets(instance, k, colocated, budget)?;
    let mut best: Option<Incumbent> = None;
    for set in &sets {
        if let Some(b) = &best {
            if lower_bound(set) > b.value + IMPROVE_EPS {
                continue;
            }
        }
        if let Some((value, assignment)) = per_set(set, budget)? {
            Incumbent::offer(&mut best, value, assignment);
        }
    }
    Ok((best, sets.len() as u64))
}

/// Cost with every point at its nearest center of `set`.
pub(crate) fn nearest_bound(instance: &Instance, objective: ObjectiveKind, set: &[usize]) -> f64 {
    (0..instance.n())
        .map(|j| {
            let d = set.iter().map(|&c| instance.distance(j, c)).fold(f64::INFINITY, f64::min);
            objective.point_cost(d)
        })
        .fold(0.0, |acc, x| objective.combine(acc, x))
}

/// Globally optimal clustering with at most `k` centers, optionally subject
/// to a hard fairness constraint.
pub fn solve_exact(
    instance: &Instance,
    k: usize,
    objective: ObjectiveKind,
    constraint: Option<&Constraint>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    check_k(instance, k)?;
    if let Some(Constraint::Cm(b)) = constraint {
        b.check_colors(instance)?;
    }
    if let Some(Constraint::Eq(_)) = constraint {
        if instance.similarity_sets().is_none() {
            return Err(Error::MissingSimilaritySets);
        }
    }
    let start = Instant::now();
    let mut budget = Budget::new(opts.budget_nodes);
    let mut engine = AssignEngine::new(instance, objective, constraint);
    let (best, n_sets) = minimize_over_center_sets(
        instance,
        k,
        false,
        &mut budget,
        &|set| nearest_bound(instance, objective, set),
        &mut |set, budget| engine.assign(set, budget),
    )?;
    let best = best.ok_or(Error::Infeasible)?;
    let notion = match constraint {
        None => "agnostic",
        Some(Constraint::Cm(_)) => "cm",
        Some(Constraint::Eq(_)) => "eq",
    };
    Ok(SolveReport {
        notion: notion.into(),
        objective,
        objective_value: cost_unchecked(instance, best.clustering.assignment(), objective),
        clustering: best.clustering,
        criterion: None,
        optimal: true,
        achieved_ratio: Some(1.0),
        search_stats: SearchStats {
            nodes: budget.used(),
            center_sets: n_sets,
            wall_time: start.elapsed(),
        },
    })
}

/// Best assignment for a fixed set of centers. The returned clustering keeps
/// every given center, including ones left empty.
pub fn optimal_assignment(
    instance: &Instance,
    centers: &[usize],
    objective: ObjectiveKind,
    constraint: Option<&Constraint>,
    opts: &SolveOptions,
) -> Result<Clustering> {
    if centers.is_empty() {
        return Err(Error::InvalidParams("at least one center is required".into()));
    }
    let mut sorted = centers.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&c) = sorted.iter().find(|&&c| c >= instance.n_sites_total()) {
        return Err(Error::InvalidClustering(format!("unknown center {c}")));
    }
    if let Some(Constraint::Cm(b)) = constraint {
        b.check_colors(instance)?;
    }
    let mut budget = Budget::new(opts.budget_nodes);
    let mut engine = AssignEngine::new(instance, objective, constraint);
    match engine.assign(&sorted, &mut budget)? {
        Some((_, assignment)) => Ok(Clustering::new(sorted, assignment)),
        None => Err(Error::Infeasible),
    }
}

/// Per-center-set assignment solver for one (objective, constraint) pair.
pub(crate) struct AssignEngine<'a> {
    instance: &'a Instance,
    objective: ObjectiveKind,
    mode: Mode<'a>,
}

enum Mode<'a> {
    Nearest,
    Cm { bounds: &'a CmBounds, stacks: Vec<Stack>, by_color: Vec<Vec<usize>> },
    Eq { alpha: f64, sets: &'a [Vec<usize>] },
}

impl<'a> AssignEngine<'a> {
    pub fn new(instance: &'a Instance, objective: ObjectiveKind, constraint: Option<&'a Constraint>) -> Self {
        let mode = match constraint {
            None => Mode::Nearest,
            Some(Constraint::Cm(bounds)) => {
                let stacks = stacks(instance, |_| 0);
                let by_color = stacks_by_color(&stacks, instance.n_colors());
                Mode::Cm { bounds, stacks, by_color }
            }
            Some(Constraint::Eq(spec)) => Mode::Eq {
                alpha: spec.alpha(),
                sets: instance.similarity_sets().unwrap_or(&[]),
            },
        };
        Self { instance, objective, mode }
    }

    pub fn assign(&mut self, set: &[usize], budget: &mut Budget) -> Result<Option<(f64, Vec<usize>)>> {
        budget.tick(1)?;
        let assignment = match &self.mode {
            Mode::Nearest => Some(nearest_assignment(self.instance, set)?.assignment().to_vec()),
            Mode::Eq { alpha, sets } => eq_least_assignment(self.instance, set, *alpha, sets, budget)?,
            Mode::Cm { bounds, stacks, by_color } => {
                cm_assignment(self.instance, set, self.objective, bounds, stacks, by_color, budget)?
            }
        };
        Ok(assignment.map(|a| (cost_unchecked(self.instance, &a, self.objective), a)))
    }
}

/// Least feasible EQ distance vector for fixed centers, realized with the
/// lowest-id center at each chosen distance.
pub(crate) fn eq_least_assignment(
    instance: &Instance,
    centers: &[usize],
    alpha: f64,
    sets: &[Vec<usize>],
    budget: &mut Budget,
) -> Result<Option<Vec<usize>>> {
    let n = instance.n();
    let domains: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut d: Vec<f64> = centers.iter().map(|&c| instance.distance(j, c)).collect();
            d.sort_by(f64::total_cmp);
            d
        })
        .collect();
    let mut level = vec![0usize; n];
    let mut queue: Vec<usize> = (0..n).rev().collect();
    let mut queued = vec![true; n];
    while let Some(j) = queue.pop() {
        queued[j] = false;
        let xj = domains[j][level[j]];
        for &m in &sets[j] {
            if xj <= alpha * domains[m][level[m]] + DIST_TOL {
                continue;
            }
            budget.tick(1)?;
            let dom = &domains[m];
            match (level[m]..dom.len()).find(|&t| xj <= alpha * dom[t] + DIST_TOL) {
                Some(t) => level[m] = t,
                None => return Ok(None),
            }
            if !queued[m] {
                queued[m] = true;
                queue.push(m);
            }
        }
    }
    Ok(Some(
        (0..n)
            .map(|j| {
                let target = domains[j][level[j]];
                *centers
                    .iter()
                    .find(|&&c| instance.distance(j, c) == target)
                    .expect("target distance comes from a center")
            })
            .collect(),
    ))
}

fn color_plan(objective: ObjectiveKind, supplies: &[u32], demands: &[u32], cost: &[Vec<f64>]) -> Option<transport::Plan> {
    match objective {
        ObjectiveKind::KCenter => transport::bottleneck(supplies, demands, cost),
        ObjectiveKind::KMedian | ObjectiveKind::KMeans => transport::min_cost(supplies, demands, cost),
    }
}

fn cm_assignment(
    instance: &Instance,
    centers: &[usize],
    objective: ObjectiveKind,
    bounds: &CmBounds,
    stacks: &[Stack],
    by_color: &[Vec<usize>],
    budget: &mut Budget,
) -> Result<Option<Vec<usize>>> {
    let colors = instance.n_colors();
    let supplies: Vec<Vec<u32>> = by_color
        .iter()
        .map(|ss| ss.iter().map(|&s| stacks[s].size()).collect())
        .collect();
    let costs: Vec<Vec<Vec<f64>>> = by_color
        .iter()
        .map(|ss| {
            ss.iter()
                .map(|&s| {
                    centers
                        .iter()
                        .map(|&c| objective.point_cost(instance.distance(stacks[s].rep(), c)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let color_sizes = instance.color_sizes();

    let mut memo: HashMap<(usize, Vec<u32>), f64> = HashMap::new();
    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    for_each_count_matrix(&color_sizes, centers.len(), &|row| bounds.admits(row), budget, &mut |rows| {
        let mut total = 0.0;
        for h in 0..colors {
            let column: Vec<u32> = rows.iter().map(|r| r[h] as u32).collect();
            let v = *memo.entry((h, column.clone())).or_insert_with(|| {
                color_plan(objective, &supplies[h], &column, &costs[h]).map_or(f64::INFINITY, |p| p.value)
            });
            total = objective.combine(total, v);
        }
        if best.as_ref().is_none_or(|(b, _)| total < b - IMPROVE_EPS) {
            best = Some((total, rows.to_vec()));
        }
        Ok(())
    })?;

    let Some((_, rows)) = best else {
        return Ok(None);
    };
    let mut shipments = vec![Vec::new(); stacks.len()];
    for h in 0..colors {
        let column: Vec<u32> = rows.iter().map(|r| r[h] as u32).collect();
        let plan = color_plan(objective, &supplies[h], &column, &costs[h]).expect("plan exists for best matrix");
        for (row, &s) in plan.flow.into_iter().zip(&by_color[h]) {
            shipments[s] = row;
        }
    }
    Ok(Some(realize(instance.n(), stacks, centers, &shipments)))
}
