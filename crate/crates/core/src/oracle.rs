//! Naive exhaustive reference: every center set of size at most `k` times
//! every assignment into it, evaluated from raw distances. Shares no search
//! or evaluation code with the solvers, so agreement between the two is
//! meaningful. Only usable for a handful of points.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clustering::ObjectiveKind;
use crate::error::{Error, Result};
use crate::fairness::{solve_fair, CmBounds, EqSpec, Notion, SfSpec};
use crate::instance::{Geometry, Instance, InstanceBuilder};
use crate::search::SolveOptions;
use crate::solver::solve_exact;
use crate::welfare::{solve_welfare_centric, theorem1_model, DistanceTerm, OutcomeTerm, UtilityModel};

/// What the enumerator should optimize.
#[derive(Debug, Clone)]
pub enum OracleTarget {
    Agnostic,
    Cm(CmBounds),
    Eq(EqSpec),
    Sf(SfSpec),
    /// Maximize the minimum group-average utility.
    Wc(UtilityModel),
}

/// Hard cap on enumerated (center set, assignment) pairs.
pub const ORACLE_LIMIT: u64 = 50_000_000;

/// Optimal value for each target (`None` when infeasible), computed in one
/// sweep over all clusterings with at most `k` centers.
pub fn brute_force(
    instance: &Instance,
    k: usize,
    objective: ObjectiveKind,
    targets: &[OracleTarget],
) -> Result<Vec<Option<f64>>> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    let n = instance.n();
    let cands = instance.candidates();
    let colors: Vec<usize> = (0..n).map(|j| instance.color(j)).collect();
    let n_colors = instance.n_colors();
    let mut group_size = vec![0usize; n_colors];
    for &c in &colors {
        group_size[c] += 1;
    }
    let d = |j: usize, c: usize| instance.distance(j, c);

    let mut best: Vec<Option<f64>> = vec![None; targets.len()];
    let mut visited = 0u64;

    fn subsets(cands: &[usize], k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == k {
            return;
        }
        for i in from..cands.len() {
            cur.push(cands[i]);
            subsets(cands, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut all_sets = Vec::new();
    subsets(&cands, k, 0, &mut Vec::new(), &mut all_sets);

    for set in &all_sets {
        let s = set.len();
        let mut digits = vec![0usize; n];
        loop {
            visited += 1;
            if visited > ORACLE_LIMIT {
                return Err(Error::BudgetExceeded { nodes: visited, limit: ORACLE_LIMIT });
            }
            let phi: Vec<usize> = digits.iter().map(|&i| set[i]).collect();
            for (t, target) in targets.iter().enumerate() {
                let value = match target {
                    OracleTarget::Agnostic => Some(cost(&phi, objective, &d)),
                    OracleTarget::Cm(bounds) => {
                        cm_ok(&digits, s, &colors, n_colors, bounds).then(|| cost(&phi, objective, &d))
                    }
                    OracleTarget::Eq(spec) => eq_ok(instance, &phi, spec, &d).then(|| cost(&phi, objective, &d)),
                    OracleTarget::Sf(spec) => {
                        let mut sums = vec![0.0; n_colors];
                        for (j, &c) in phi.iter().enumerate() {
                            let x = d(j, c);
                            sums[colors[j]] += if spec.p() == 2 { x * x } else { x };
                        }
                        Some((0..n_colors).map(|h| sums[h] / group_size[h] as f64).fold(0.0, f64::max))
                    }
                    OracleTarget::Wc(model) => {
                        // stored negated so that smaller is better throughout
                        Some(-min_group_welfare(instance, model, &digits, set, &colors, n_colors, &group_size)?)
                    }
                };
                if let Some(v) = value {
                    if best[t].is_none_or(|b| v < b) {
                        best[t] = Some(v);
                    }
                }
            }
            // odometer
            let mut i = 0;
            while i < n {
                digits[i] += 1;
                if digits[i] < s {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok(targets
        .iter()
        .zip(best)
        .map(|(t, v)| match t {
            OracleTarget::Wc(_) => v.map(|x| -x),
            _ => v,
        })
        .collect())
}

fn cost(phi: &[usize], objective: ObjectiveKind, d: &dyn Fn(usize, usize) -> f64) -> f64 {
    let mut acc: f64 = 0.0;
    for (j, &c) in phi.iter().enumerate() {
        let x = d(j, c);
        match objective {
            ObjectiveKind::KCenter => acc = acc.max(x),
            ObjectiveKind::KMedian => acc += x,
            ObjectiveKind::KMeans => acc += x * x,
        }
    }
    acc
}

fn cm_ok(digits: &[usize], s: usize, colors: &[usize], n_colors: usize, bounds: &CmBounds) -> bool {
    let mut counts = vec![vec![0usize; n_colors]; s];
    for (j, &i) in digits.iter().enumerate() {
        counts[i][colors[j]] += 1;
    }
    counts.iter().all(|row| {
        let size: usize = row.iter().sum();
        row.iter().enumerate().all(|(h, &c)| {
            let (c, size) = (c as f64, size as f64);
            bounds.lower(h) * size <= c + 1e-12 && c <= bounds.upper(h) * size + 1e-12
        })
    })
}

fn eq_ok(instance: &Instance, phi: &[usize], spec: &EqSpec, d: &dyn Fn(usize, usize) -> f64) -> bool {
    let sets = instance.similarity_sets().expect("EQ target needs similarity sets");
    (0..phi.len()).all(|j| {
        let floor = sets[j].iter().map(|&m| d(m, phi[m])).fold(f64::INFINITY, f64::min);
        d(j, phi[j]) <= spec.alpha() * floor + 1e-9
    })
}

fn min_group_welfare(
    instance: &Instance,
    model: &UtilityModel,
    digits: &[usize],
    set: &[usize],
    colors: &[usize],
    n_colors: usize,
    group_size: &[usize],
) -> Result<f64> {
    let mut counts = vec![vec![0usize; n_colors]; set.len()];
    for (j, &i) in digits.iter().enumerate() {
        counts[i][colors[j]] += 1;
    }
    let mut sums = vec![0.0; n_colors];
    for (j, &i) in digits.iter().enumerate() {
        let m = model.for_point(j);
        let center = set[i];
        let dist = instance.distance(j, center);
        let dist_term = match m.distance_term {
            DistanceTerm::Linear { offset } => offset - dist,
            DistanceTerm::Negated => -dist,
        };
        let row = &counts[i];
        let outcome = match m.outcome_term {
            OutcomeTerm::Constant { value } => value,
            OutcomeTerm::CenterLabel => {
                instance.outcome_label(center).ok_or(Error::MissingOutcomeLabels(center))?
            }
            OutcomeTerm::DiversityRatio => {
                let mut best = f64::INFINITY;
                for a in 0..n_colors {
                    for b in 0..n_colors {
                        if a != b {
                            let r = if row[b] == 0 { f64::INFINITY } else { row[a] as f64 / row[b] as f64 };
                            best = best.min(r);
                        }
                    }
                }
                if n_colors < 2 {
                    1.0
                } else if row.contains(&0) {
                    0.0
                } else {
                    best
                }
            }
        };
        sums[colors[j]] += m.weights[0] * dist_term + m.weights[1] * outcome;
    }
    Ok((0..n_colors).map(|h| sums[h] / group_size[h] as f64).fold(f64::INFINITY, f64::min))
}

/// A small random two-color instance on an integer grid (so ties are
/// common), with similarity sets and outcome labels.
pub fn random_instance(rng: &mut impl Rng, n: usize) -> Result<Instance> {
    let n = n.max(2);
    let coords: Vec<Vec<f64>> =
        (0..n).map(|_| vec![rng.gen_range(0..6) as f64, rng.gen_range(0..6) as f64]).collect();
    let mut colors: Vec<String> = (0..n).map(|_| if rng.gen_bool(0.5) { "red" } else { "blue" }.into()).collect();
    colors[0] = "red".into();
    colors[1] = "blue".into();
    colors.shuffle(rng);
    let sets: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            let mut s: Vec<usize> = (0..n).filter(|&m| m == j || rng.gen_bool(0.3)).collect();
            if rng.gen_bool(0.2) && s.len() > 1 {
                s.retain(|&m| m != j);
            }
            s
        })
        .collect();
    let labels = (0..n).map(|j| (j, rng.gen_range(0..3) as f64)).collect();
    InstanceBuilder::new(Geometry::Coords(coords), colors)
        .similarity_sets(sets)
        .outcome_labels(labels)
        .build()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub seed: u64,
    pub cases: usize,
    pub comparisons: usize,
    pub mismatches: Vec<String>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())),
        _ => false,
    }
}

/// Compare every exact solver against [`brute_force`] on `cases` random
/// instances drawn from `seed` (n ≤ 8, k ≤ 3, two colors).
pub fn oracle_equivalence(seed: u64, cases: usize, tol: f64, opts: &SolveOptions) -> Result<EquivalenceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EquivalenceReport { seed, cases, ..Default::default() };
    let objectives = [ObjectiveKind::KCenter, ObjectiveKind::KMedian, ObjectiveKind::KMeans];
    for case in 0..cases {
        let n = rng.gen_range(2..=8);
        let k = rng.gen_range(1..=3);
        let objective = objectives[case % 3];
        let inst = random_instance(&mut rng, n)?;
        let lo = [0.0, 0.25, 0.4][rng.gen_range(0..3)];
        let hi = [1.0, 0.75, 0.6][rng.gen_range(0..3)];
        let bounds = CmBounds::uniform(&inst, lo, hi)?;
        let eq = EqSpec::new([1.0, 1.5, 2.0][rng.gen_range(0..3)])?;
        let model = if rng.gen_bool(0.5) {
            theorem1_model(1.0)?
        } else {
            UtilityModel::new(DistanceTerm::Negated, OutcomeTerm::CenterLabel, [1.0, rng.gen_range(1..4) as f64])?
        };

        let mut targets = vec![
            OracleTarget::Agnostic,
            OracleTarget::Cm(bounds.clone()),
            OracleTarget::Eq(eq),
            OracleTarget::Wc(model.clone()),
        ];
        let sf = SfSpec::for_objective(objective).ok();
        if let Some(s) = sf {
            targets.push(OracleTarget::Sf(s));
        }
        let want = brute_force(&inst, k, objective, &targets)?;

        let value = |r: Result<crate::solver::SolveReport>, by_criterion: bool| -> Result<Option<f64>> {
            match r {
                Ok(rep) => Ok(Some(if by_criterion {
                    rep.criterion.expect("criterion").value
                } else {
                    rep.objective_value
                })),
                Err(Error::Infeasible) => Ok(None),
                Err(e) => Err(e),
            }
        };
        let mut got = vec![
            value(solve_exact(&inst, k, objective, None, opts), false)?,
            value(solve_fair(&inst, k, objective, &Notion::Cm(bounds), opts), false)?,
            value(solve_fair(&inst, k, objective, &Notion::Eq(eq), opts), false)?,
            value(solve_welfare_centric(&inst, k, &model, opts), true)?,
        ];
        if let Some(s) = sf {
            got.push(value(solve_fair(&inst, k, objective, &Notion::Sf(s), opts), true)?);
        }
        for ((t, w), g) in targets.iter().zip(&want).zip(&got) {
            report.comparisons += 1;
            if !close(*w, *g, tol) {
                let name = match t {
                    OracleTarget::Agnostic => "agnostic",
                    OracleTarget::Cm(_) => "cm",
                    OracleTarget::Eq(_) => "eq",
                    OracleTarget::Sf(_) => "sf",
                    OracleTarget::Wc(_) => "wc",
                };
                report.mismatches.push(format!(
                    "case {case} (n={n}, k={k}, {}): {name} solver {g:?} vs enumeration {w:?}",
                    objective.name()
                ));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::build_instance;

    #[test]
    fn enumerator_on_a_line() {
        let inst = build_instance(
            Geometry::Coords([0.0, 1.0, 10.0, 11.0].iter().map(|&x| vec![x]).collect()),
            ["r", "b", "r", "b"].iter().map(|s| s.to_string()).collect(),
            None,
            None,
        )
        .unwrap();
        let v = brute_force(&inst, 2, ObjectiveKind::KMedian, &[OracleTarget::Agnostic]).unwrap();
        assert_eq!(v, vec![Some(2.0)]);
    }

    #[test]
    fn tiny_agreement() {
        let r = oracle_equivalence(7, 12, 1e-9, &SolveOptions::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.mismatches);
    }
}
