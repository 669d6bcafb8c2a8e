//! Shared machinery for the exact solvers: node budget, enumeration of
//! candidate center sets, stacks of interchangeable points, and the
//! cluster-by-color count matrices that constrained searches branch over.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;

pub const DEFAULT_BUDGET_NODES: u64 = 200_000_000;

/// Strict-improvement margin when comparing objective values.
pub(crate) const IMPROVE_EPS: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub budget_nodes: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { budget_nodes: DEFAULT_BUDGET_NODES }
    }
}

impl SolveOptions {
    pub fn with_budget(budget_nodes: u64) -> Self {
        Self { budget_nodes }
    }
}

#[derive(Debug)]
pub(crate) struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Self { limit, used: 0 }
    }

    #[inline]
    pub fn tick(&mut self, n: u64) -> Result<()> {
        self.used += n;
        if self.used > self.limit {
            return Err(Error::BudgetExceeded { nodes: self.used, limit: self.limit });
        }
        Ok(())
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub center_sets: u64,
    #[serde(skip)]
    pub wall_time: std::time::Duration,
}

/// Every admissible center set of size `1..=k`, sorted by (size, ids).
///
/// Candidates at the same location with the same outcome label are
/// interchangeable, so only one representative choice is produced per
/// multiset of such classes. With `colocated == false` each class is used at
/// most once.
pub(crate) fn center_sets(
    instance: &Instance,
    k: usize,
    colocated: bool,
    budget: &mut Budget,
) -> Result<Vec<Vec<usize>>> {
    let mut classes: BTreeMap<(usize, Option<u64>), Vec<usize>> = BTreeMap::new();
    for c in instance.candidates() {
        let label = instance.outcome_label(c).map(f64::to_bits);
        classes.entry((instance.site(c), label)).or_default().push(c);
    }
    let mut classes: Vec<Vec<usize>> = classes.into_values().collect();
    classes.sort();

    let mut out = Vec::new();
    let mut picked = vec![0usize; classes.len()];
    fn rec(
        idx: usize,
        left: usize,
        classes: &[Vec<usize>],
        colocated: bool,
        picked: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        budget: &mut Budget,
    ) -> Result<()> {
        if idx == classes.len() {
            if picked.iter().any(|&m| m > 0) {
                budget.tick(1)?;
                let mut set: Vec<usize> = picked
                    .iter()
                    .zip(classes)
                    .flat_map(|(&m, class)| class[..m].iter().copied())
                    .collect();
                set.sort_unstable();
                out.push(set);
            }
            return Ok(());
        }
        let cap = if colocated { classes[idx].len() } else { 1 };
        for m in 0..=cap.min(left) {
            picked[idx] = m;
            rec(idx + 1, left - m, classes, colocated, picked, out, budget)?;
        }
        picked[idx] = 0;
        Ok(())
    }
    rec(0, k, &classes, colocated, &mut picked, &mut out, budget)?;
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(out)
}

/// A set of points that share location and color (plus any extra key the
/// caller needs, such as a per-point utility override).
#[derive(Debug, Clone)]
pub(crate) struct Stack {
    pub color: usize,
    pub members: Vec<usize>,
}

impl Stack {
    pub fn rep(&self) -> usize {
        self.members[0]
    }

    pub fn size(&self) -> u32 {
        self.members.len() as u32
    }
}

pub(crate) fn stacks(instance: &Instance, extra: impl Fn(usize) -> usize) -> Vec<Stack> {
    let mut groups: BTreeMap<(usize, usize, usize), Vec<usize>> = BTreeMap::new();
    for j in 0..instance.n() {
        groups.entry((instance.site(j), instance.color(j), extra(j))).or_default().push(j);
    }
    let mut out: Vec<Stack> = groups
        .into_iter()
        .map(|((_, color, _), members)| Stack { color, members })
        .collect();
    out.sort_by_key(|s| s.members[0]);
    out
}

/// Stacks of each color, as indices into `stacks`.
pub(crate) fn stacks_by_color(stacks: &[Stack], n_colors: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n_colors];
    for (s, stack) in stacks.iter().enumerate() {
        out[stack.color].push(s);
    }
    out
}

/// Turn per-stack shipments into a point assignment. Within a stack, lower
/// point ids go to lower-indexed centers.
pub(crate) fn realize(
    n: usize,
    stacks: &[Stack],
    centers: &[usize],
    shipments: &[Vec<u32>],
) -> Vec<usize> {
    let mut assignment = vec![usize::MAX; n];
    for (stack, ship) in stacks.iter().zip(shipments) {
        let mut members = stack.members.iter();
        for (i, &count) in ship.iter().enumerate() {
            for _ in 0..count {
                assignment[*members.next().expect("shipment within stack size")] = centers[i];
            }
        }
    }
    debug_assert!(assignment.iter().all(|&c| c != usize::MAX));
    assignment
}

/// Enumerate cluster-by-color count matrices `rows[i][h]` whose columns sum
/// to `color_sizes[h]` and whose rows all pass `admits`.
pub(crate) fn for_each_count_matrix(
    color_sizes: &[usize],
    clusters: usize,
    admits: &dyn Fn(&[usize]) -> bool,
    budget: &mut Budget,
    leaf: &mut dyn FnMut(&[Vec<usize>]) -> Result<()>,
) -> Result<()> {
    let colors = color_sizes.len();
    let mut rows = vec![vec![0usize; colors]; clusters];
    let mut remaining = color_sizes.to_vec();

    fn rec(
        i: usize,
        rows: &mut Vec<Vec<usize>>,
        remaining: &mut Vec<usize>,
        admits: &dyn Fn(&[usize]) -> bool,
        budget: &mut Budget,
        leaf: &mut dyn FnMut(&[Vec<usize>]) -> Result<()>,
    ) -> Result<()> {
        let clusters = rows.len();
        budget.tick(1)?;
        if i + 1 == clusters {
            rows[i].copy_from_slice(remaining);
            if admits(&rows[i]) {
                leaf(rows)?;
            }
            return Ok(());
        }
        // odometer over rows[i][h] in 0..=remaining[h]
        let colors = remaining.len();
        let mut row = vec![0usize; colors];
        loop {
            if admits(&row) {
                rows[i].copy_from_slice(&row);
                for h in 0..colors {
                    remaining[h] -= row[h];
                }
                let r = rec(i + 1, rows, remaining, admits, budget, leaf);
                for h in 0..colors {
                    remaining[h] += row[h];
                }
                r?;
            }
            let mut h = 0;
            loop {
                if h == colors {
                    return Ok(());
                }
                if row[h] < remaining[h] {
                    row[h] += 1;
                    break;
                }
                row[h] = 0;
                h += 1;
            }
        }
    }
    if clusters == 0 {
        return Ok(());
    }
    rec(0, &mut rows, &mut remaining, admits, budget, leaf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{build_instance, Geometry};

    #[test]
    fn center_sets_are_canonically_ordered() {
        let inst = build_instance(
            Geometry::Coords(vec![vec![0.0], vec![1.0], vec![2.0]]),
            vec!["a".into(), "b".into(), "a".into()],
            None,
            None,
        )
        .unwrap();
        let sets = center_sets(&inst, 2, false, &mut Budget::new(100)).unwrap();
        assert_eq!(sets, vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn coinciding_candidates_collapse() {
        let inst = build_instance(
            Geometry::Coords(vec![vec![0.0], vec![0.0], vec![5.0]]),
            vec!["a".into(), "a".into(), "b".into()],
            None,
            None,
        )
        .unwrap();
        let plain = center_sets(&inst, 2, false, &mut Budget::new(100)).unwrap();
        assert_eq!(plain, vec![vec![0], vec![2], vec![0, 2]]);
        let multi = center_sets(&inst, 2, true, &mut Budget::new(100)).unwrap();
        assert_eq!(multi, vec![vec![0], vec![2], vec![0, 1], vec![0, 2]]);
    }

    #[test]
    fn count_matrices_cover_all_compositions() {
        let mut seen = 0;
        for_each_count_matrix(&[2, 1], 2, &|_| true, &mut Budget::new(1000), &mut |rows| {
            assert_eq!(rows[0][0] + rows[1][0], 2);
            assert_eq!(rows[0][1] + rows[1][1], 1);
            seen += 1;
            Ok(())
        })
        .unwrap();
        // 3 ways for the first color times 2 for the second
        assert_eq!(seen, 6);
    }

    #[test]
    fn budget_trips() {
        let err = for_each_count_matrix(&[10, 10], 4, &|_| true, &mut Budget::new(50), &mut |_| Ok(()))
            .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
