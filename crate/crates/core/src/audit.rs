//! Downstream effects of a clustering: distance-based outlier flagging and
//! per-cluster linear separability of class labels.

use std::collections::{BTreeMap, BTreeSet};

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::instance::{ClassLabel, Instance, DIST_TOL};

/// Margin required on each side of a separating hyperplane.
pub const SEPARATION_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutlierRule {
    /// Flag `d(j, φ(j)) > tau`.
    AbsoluteThreshold { tau: f64 },
    /// Flag `d > m · median`, the median taken over all nonzero assigned
    /// distances of the clustering.
    MultipleOfMedian { m: f64 },
    /// Flag `d > m · median` of the assigned distances in the point's own
    /// cluster.
    ClusterRelative { m: f64 },
}

impl OutlierRule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            OutlierRule::AbsoluteThreshold { tau } => tau > 0.0 && tau.is_finite(),
            OutlierRule::MultipleOfMedian { m } | OutlierRule::ClusterRelative { m } => m > 1.0 && m.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("outlier rule needs tau > 0 or m > 1, got {self:?}")))
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// Points whose distance to their assigned center breaches `rule`.
pub fn flag_outliers(instance: &Instance, clustering: &Clustering, rule: &OutlierRule) -> Result<BTreeSet<usize>> {
    rule.validate()?;
    clustering.validate(instance)?;
    let dist = clustering.distances(instance);
    let limits: Vec<f64> = match *rule {
        OutlierRule::AbsoluteThreshold { tau } => vec![tau; dist.len()],
        OutlierRule::MultipleOfMedian { m } => {
            let mut nonzero: Vec<f64> = dist.iter().copied().filter(|&d| d > DIST_TOL).collect();
            vec![m * median(&mut nonzero); dist.len()]
        }
        OutlierRule::ClusterRelative { m } => {
            let mut per_center: BTreeMap<usize, f64> = BTreeMap::new();
            for (center, members) in clustering.clusters() {
                let mut ds: Vec<f64> = members.iter().map(|&j| dist[j]).collect();
                per_center.insert(center, m * median(&mut ds));
            }
            (0..dist.len()).map(|j| per_center[&clustering.center_of(j)]).collect()
        }
    };
    Ok((0..dist.len()).filter(|&j| dist[j] > limits[j] + DIST_TOL).collect())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GroupConfusion {
    pub flagged_fair: BTreeSet<usize>,
    pub flagged_agnostic: BTreeSet<usize>,
    /// Flagged under the fair clustering only.
    pub false_positives: BTreeSet<usize>,
    /// Flagged under the agnostic clustering only.
    pub false_negatives: BTreeSet<usize>,
}

pub const CONFUSION_REFERENCE: &str = "agnostic clustering's flagging is the reference";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierConfusion {
    pub rule: OutlierRule,
    pub reference: &'static str,
    pub per_group: BTreeMap<String, GroupConfusion>,
}

impl OutlierConfusion {
    pub fn false_positives(&self) -> usize {
        self.per_group.values().map(|g| g.false_positives.len()).sum()
    }

    pub fn false_negatives(&self) -> usize {
        self.per_group.values().map(|g| g.false_negatives.len()).sum()
    }
}

/// Per-group comparison of the flagging under `fair` against `agnostic`.
pub fn outlier_confusion(
    instance: &Instance,
    fair: &Clustering,
    agnostic: &Clustering,
    rule: &OutlierRule,
) -> Result<OutlierConfusion> {
    let under_fair = flag_outliers(instance, fair, rule)?;
    let under_agnostic = flag_outliers(instance, agnostic, rule)?;
    let mut per_group: BTreeMap<String, GroupConfusion> = instance
        .color_names()
        .iter()
        .map(|c| (c.clone(), GroupConfusion::default()))
        .collect();
    for j in 0..instance.n() {
        let g = per_group.get_mut(instance.color_name(instance.color(j))).expect("known color");
        let (f, a) = (under_fair.contains(&j), under_agnostic.contains(&j));
        if f {
            g.flagged_fair.insert(j);
        }
        if a {
            g.flagged_agnostic.insert(j);
        }
        if f && !a {
            g.false_positives.insert(j);
        }
        if a && !f {
            g.false_negatives.insert(j);
        }
    }
    Ok(OutlierConfusion { rule: *rule, reference: CONFUSION_REFERENCE, per_group })
}

/// `w · x + b = 0`, with positive points on the positive side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperplane {
    pub w: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSeparability {
    pub size: usize,
    pub separable: bool,
    pub witness: Option<Hyperplane>,
}

/// A hyperplane with `y_i (w · x_i + b) ≥ margin` for every point, if one
/// exists.
pub fn separating_hyperplane(points: &[&[f64]], labels: &[ClassLabel]) -> Option<Hyperplane> {
    let dim = points.first().map_or(0, |p| p.len());
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let free = (f64::NEG_INFINITY, f64::INFINITY);
    let w: Vec<_> = (0..dim).map(|_| lp.add_var(0.0, free)).collect();
    let b = lp.add_var(0.0, free);
    for (x, label) in points.iter().zip(labels) {
        let y = label.sign();
        let mut terms: Vec<_> = w.iter().zip(x.iter()).map(|(&v, &xi)| (v, y * xi)).collect();
        terms.push((b, y));
        lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, SEPARATION_MARGIN);
    }
    let solution = lp.solve().ok()?;
    Some(Hyperplane { w: w.iter().map(|&v| solution[v]).collect(), b: solution[b] })
}

/// Whether each cluster's class labels can be split by a hyperplane.
pub fn per_cluster_separability(
    instance: &Instance,
    clustering: &Clustering,
) -> Result<BTreeMap<usize, ClusterSeparability>> {
    let labels = instance.class_labels().ok_or(Error::MissingClassLabels)?;
    let coords = instance.coords().ok_or(Error::RequiresCoordinates)?;
    clustering.validate(instance)?;
    Ok(clustering
        .clusters()
        .into_iter()
        .map(|(center, members)| {
            let pts: Vec<&[f64]> = members.iter().map(|&j| coords[j].as_slice()).collect();
            let ls: Vec<ClassLabel> = members.iter().map(|&j| labels[j]).collect();
            let witness = separating_hyperplane(&pts, &ls);
            (center, ClusterSeparability { size: members.len(), separable: witness.is_some(), witness })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{build_instance, Geometry, InstanceBuilder};
    use proptest::prelude::*;

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
    fn nothing_flagged_at_centers() {
        let inst = line(&[0.0, 1.0, 5.0], &["r", "b", "r"]);
        let c = Clustering::from_assignment(vec![0, 1, 2]);
        for rule in [
            OutlierRule::AbsoluteThreshold { tau: 0.5 },
            OutlierRule::MultipleOfMedian { m: 2.0 },
            OutlierRule::ClusterRelative { m: 2.0 },
        ] {
            assert!(flag_outliers(&inst, &c, &rule).unwrap().is_empty());
        }
    }

    #[test]
    fn median_rule_flags_far_points() {
        let inst = line(&[0.0, 1.0, 1.0, 1.0, 30.0], &["r", "b", "r", "b", "b"]);
        let c = Clustering::from_assignment(vec![0, 0, 0, 0, 0]);
        let flagged = flag_outliers(&inst, &c, &OutlierRule::MultipleOfMedian { m: 10.0 }).unwrap();
        assert_eq!(flagged.into_iter().collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    fn rules_are_validated() {
        let inst = line(&[0.0], &["r"]);
        let c = Clustering::from_assignment(vec![0]);
        assert!(flag_outliers(&inst, &c, &OutlierRule::AbsoluteThreshold { tau: 0.0 }).is_err());
        assert!(flag_outliers(&inst, &c, &OutlierRule::MultipleOfMedian { m: 1.0 }).is_err());
    }

    #[test]
    fn identical_clusterings_have_no_confusion() {
        let inst = line(&[0.0, 1.0, 9.0], &["r", "b", "b"]);
        let c = Clustering::from_assignment(vec![0, 0, 0]);
        let conf = outlier_confusion(&inst, &c, &c, &OutlierRule::AbsoluteThreshold { tau: 2.0 }).unwrap();
        assert_eq!(conf.false_positives() + conf.false_negatives(), 0);
        assert_eq!(conf.per_group["b"].flagged_fair.len(), 1);
    }

    #[test]
    fn single_point_cluster_is_separable() {
        assert!(separating_hyperplane(&[&[1.0, 2.0]], &[ClassLabel::Neg]).is_some());
    }

    #[test]
    fn xor_is_not_separable() {
        let pts: [&[f64]; 4] = [&[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]];
        let labels = [ClassLabel::Pos, ClassLabel::Pos, ClassLabel::Neg, ClassLabel::Neg];
        assert!(separating_hyperplane(&pts, &labels).is_none());
    }

    #[test]
    fn witness_separates() {
        let pts: [&[f64]; 3] = [&[0.0, 0.0], &[3.0, 1.0], &[4.0, 0.0]];
        let labels = [ClassLabel::Pos, ClassLabel::Neg, ClassLabel::Neg];
        let h = separating_hyperplane(&pts, &labels).unwrap();
        for (x, l) in pts.iter().zip(labels) {
            let v: f64 = h.w.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + h.b;
            assert!(l.sign() * v > 0.0);
        }
    }

    #[test]
    fn separability_needs_labels_and_coordinates() {
        let inst = line(&[0.0, 1.0], &["r", "b"]);
        let c = Clustering::from_assignment(vec![0, 0]);
        assert!(matches!(per_cluster_separability(&inst, &c), Err(Error::MissingClassLabels)));
        let m = InstanceBuilder::new(Geometry::Matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]]), vec!["r".into(), "b".into()])
            .class_labels(vec![ClassLabel::Pos, ClassLabel::Neg])
            .build()
            .unwrap();
        assert!(matches!(per_cluster_separability(&m, &c), Err(Error::RequiresCoordinates)));
    }

    /// Convex hulls of at most three labeled points in the plane intersect
    /// iff a lone point of one class lies on the closed segment (or point)
    /// of the other class.
    fn hulls_disjoint(pts: &[[i32; 2]], labels: &[bool]) -> bool {
        let pos: Vec<[i32; 2]> = pts.iter().zip(labels).filter(|(_, &l)| l).map(|(p, _)| *p).collect();
        let neg: Vec<[i32; 2]> = pts.iter().zip(labels).filter(|(_, &l)| !l).map(|(p, _)| *p).collect();
        let on_segment = |p: [i32; 2], a: [i32; 2], b: [i32; 2]| {
            let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            cross == 0
                && p[0] >= a[0].min(b[0])
                && p[0] <= a[0].max(b[0])
                && p[1] >= a[1].min(b[1])
                && p[1] <= a[1].max(b[1])
        };
        let (lone, rest) = match (pos.len(), neg.len()) {
            (0, _) | (_, 0) => return true,
            (1, _) => (pos[0], neg),
            (_, 1) => (neg[0], pos),
            _ => unreachable!("at most three points"),
        };
        match rest.len() {
            1 => lone != rest[0],
            _ => !on_segment(lone, rest[0], rest[1]),
        }
    }

    proptest! {
        #[test]
        fn lp_matches_hull_oracle(
            pts in proptest::collection::vec([-3i32..4, -3i32..4], 1..=3),
            labels in proptest::collection::vec(any::<bool>(), 3),
        ) {
            let labels = &labels[..pts.len()];
            let coords: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] as f64, p[1] as f64]).collect();
            let refs: Vec<&[f64]> = coords.iter().map(|c| c.as_slice()).collect();
            let ls: Vec<ClassLabel> = labels.iter().map(|&l| if l { ClassLabel::Pos } else { ClassLabel::Neg }).collect();
            prop_assert_eq!(separating_hyperplane(&refs, &ls).is_some(), hulls_disjoint(&pts, labels));
        }

        #[test]
        fn flagging_is_monotone(
            xs in proptest::collection::vec(0.0f64..50.0, 2..8),
            m1 in 1.01f64..5.0,
            extra in 0.0f64..5.0,
        ) {
            let colors: Vec<&str> = (0..xs.len()).map(|i| if i % 2 == 0 { "r" } else { "b" }).collect();
            let inst = line(&xs, &colors);
            let c = crate::clustering::nearest_assignment(&inst, &[0]).unwrap();
            for (lo, hi) in [
                (OutlierRule::MultipleOfMedian { m: m1 }, OutlierRule::MultipleOfMedian { m: m1 + extra }),
                (OutlierRule::ClusterRelative { m: m1 }, OutlierRule::ClusterRelative { m: m1 + extra }),
                (OutlierRule::AbsoluteThreshold { tau: m1 }, OutlierRule::AbsoluteThreshold { tau: m1 + extra }),
            ] {
                let a = flag_outliers(&inst, &c, &lo).unwrap();
                let b = flag_outliers(&inst, &c, &hi).unwrap();
                prop_assert!(b.is_subset(&a));
            }
        }
    }
}
