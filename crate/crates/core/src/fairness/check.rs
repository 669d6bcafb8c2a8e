use serde::Serialize;

use super::{CmBounds, EqSpec, SfSpec};
use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::instance::{Instance, DIST_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Lower,
    Upper,
}

/// A cluster whose count of one color falls outside `[l_h |C|, u_h |C|]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmViolation {
    pub center: usize,
    pub color: String,
    pub count: usize,
    pub cluster_size: usize,
    pub side: BoundSide,
    /// The violated bound in points, `l_h |C|` or `u_h |C|`.
    pub bound: f64,
}

/// A point assigned farther than α times the closest similar point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqViolation {
    pub point: usize,
    pub distance: f64,
    pub alpha: f64,
    /// `min_{j' ∈ S_j} d(j', φ(j'))`
    pub similar_min: f64,
    pub similar_argmin: usize,
}

pub fn check_cm(instance: &Instance, clustering: &Clustering, bounds: &CmBounds) -> Result<Vec<CmViolation>> {
    bounds.check_colors(instance)?;
    let mut out = Vec::new();
    for (center, counts) in clustering.color_counts(instance) {
        let size: usize = counts.iter().sum();
        if bounds.admits(&counts) {
            continue;
        }
        for (h, &count) in counts.iter().enumerate() {
            let lo = bounds.lower(h) * size as f64;
            let hi = bounds.upper(h) * size as f64;
            let (side, bound) = if (count as f64) + 1e-12 < lo {
                (BoundSide::Lower, lo)
            } else if (count as f64) > hi + 1e-12 {
                (BoundSide::Upper, hi)
            } else {
                continue;
            };
            out.push(CmViolation {
                center,
                color: instance.color_name(h).to_string(),
                count,
                cluster_size: size,
                side,
                bound,
            });
        }
    }
    Ok(out)
}

pub fn check_eq(instance: &Instance, clustering: &Clustering, spec: &EqSpec) -> Result<Vec<EqViolation>> {
    let sets = instance.similarity_sets().ok_or(Error::MissingSimilaritySets)?;
    let dist = clustering.distances(instance);
    let mut out = Vec::new();
    for (j, set) in sets.iter().enumerate() {
        let (similar_argmin, similar_min) = set
            .iter()
            .map(|&m| (m, dist[m]))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("similarity sets are nonempty");
        if dist[j] > spec.alpha() * similar_min + DIST_TOL {
            out.push(EqViolation { point: j, distance: dist[j], alpha: spec.alpha(), similar_min, similar_argmin });
        }
    }
    Ok(out)
}

/// Per-color average of `d^p`.
pub fn group_averages(instance: &Instance, clustering: &Clustering, spec: &SfSpec) -> Vec<f64> {
    let mut sums = vec![0.0; instance.n_colors()];
    for (j, d) in clustering.distances(instance).into_iter().enumerate() {
        sums[instance.color(j)] += spec.point_cost(d);
    }
    sums.iter()
        .zip(instance.color_sizes())
        .map(|(s, n)| s / n as f64)
        .collect()
}

/// `max_h (1/|P^h|) Σ_{j ∈ P^h} d^p(j, φ(j))`.
pub fn sf_objective(instance: &Instance, clustering: &Clustering, spec: &SfSpec) -> f64 {
    group_averages(instance, clustering, spec).into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{build_instance, Geometry, InstanceBuilder};

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
    fn balanced_cluster_passes() {
        let inst = line(&[0.0, 1.0, 2.0, 3.0], &["r", "b", "r", "b"]);
        let c = Clustering::from_assignment(vec![0, 0, 0, 0]);
        let b = CmBounds::uniform(&inst, 0.5, 0.5).unwrap();
        assert!(check_cm(&inst, &c, &b).unwrap().is_empty());
    }

    #[test]
    fn monochrome_clusters_violate() {
        let inst = line(&[0.0, 1.0, 2.0, 3.0], &["r", "r", "b", "b"]);
        let c = Clustering::from_assignment(vec![0, 0, 2, 2]);
        let b = CmBounds::uniform(&inst, 0.5, 0.5).unwrap();
        let v = check_cm(&inst, &c, &b).unwrap();
        // each cluster breaks one lower and one upper bound
        assert_eq!(v.len(), 4);
        assert!(v.iter().any(|x| x.side == BoundSide::Lower && x.count == 0 && x.bound == 1.0));
    }

    #[test]
    fn empty_cluster_passes() {
        let inst = line(&[0.0, 1.0], &["r", "b"]);
        let c = Clustering::new(vec![0, 1], vec![0, 0]);
        let b = CmBounds::uniform(&inst, 0.5, 0.5).unwrap();
        assert!(check_cm(&inst, &c, &b).unwrap().is_empty());
    }

    #[test]
    fn singleton_similarity_never_violates() {
        let inst = InstanceBuilder::new(
            Geometry::Coords(vec![vec![0.0], vec![5.0], vec![7.0]]),
            vec!["r".into(), "b".into(), "r".into()],
        )
        .similarity_sets(vec![vec![0], vec![1], vec![2]])
        .build()
        .unwrap();
        let c = Clustering::from_assignment(vec![0, 0, 0]);
        assert!(check_eq(&inst, &c, &EqSpec::new(1.0).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn eq_reports_both_sides() {
        let inst = InstanceBuilder::new(
            Geometry::Coords(vec![vec![0.0], vec![1.0], vec![4.0]]),
            vec!["r".into(), "b".into(), "r".into()],
        )
        .similarity_sets(vec![vec![0, 2], vec![1], vec![0, 2]])
        .build()
        .unwrap();
        let c = Clustering::from_assignment(vec![0, 0, 0]);
        let v = check_eq(&inst, &c, &EqSpec::new(2.0).unwrap()).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].point, v[0].distance, v[0].similar_min), (2, 4.0, 0.0));
    }

    #[test]
    fn missing_similarity_sets() {
        let inst = line(&[0.0], &["r"]);
        let c = Clustering::from_assignment(vec![0]);
        assert!(matches!(
            check_eq(&inst, &c, &EqSpec::new(1.0).unwrap()),
            Err(Error::MissingSimilaritySets)
        ));
    }

    #[test]
    fn sf_is_worst_group_average() {
        // red: distances 0, 4 (avg 2); blue: 5 (avg 5)
        let inst = line(&[0.0, 5.0, 4.0], &["r", "b", "r"]);
        let c = Clustering::from_assignment(vec![0, 0, 0]);
        assert_eq!(sf_objective(&inst, &c, &SfSpec::new(1).unwrap()), 5.0);
        assert_eq!(sf_objective(&inst, &c, &SfSpec::new(2).unwrap()), 25.0);
        let own = Clustering::from_assignment(vec![0, 1, 2]);
        assert_eq!(sf_objective(&inst, &own, &SfSpec::new(1).unwrap()), 0.0);
    }
}
