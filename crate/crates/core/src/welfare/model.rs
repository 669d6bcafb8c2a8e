use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::instance::Instance;

/// Decreasing function of the assigned distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistanceTerm {
    /// `offset − d`
    Linear { offset: f64 },
    /// `−d`
    Negated,
}

impl DistanceTerm {
    pub fn eval(&self, d: f64) -> f64 {
        match self {
            DistanceTerm::Linear { offset } => offset - d,
            DistanceTerm::Negated => -d,
        }
    }
}

/// Value a point draws from the cluster it is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeTerm {
    /// The outcome label attached to the cluster's center.
    CenterLabel,
    /// Smallest ratio between the counts of two colors in the cluster.
    DiversityRatio,
    Constant { value: f64 },
}

/// Diversity of a cluster with the given color counts: the minimum over
/// ordered color pairs of `count_a / count_b`. A missing color gives 0; an
/// instance with a single color gives 1.
pub fn diversity(counts: &[usize]) -> f64 {
    if counts.len() < 2 {
        return 1.0;
    }
    let lo = *counts.iter().min().expect("nonempty");
    let hi = *counts.iter().max().expect("nonempty");
    if lo == 0 {
        0.0
    } else {
        lo as f64 / hi as f64
    }
}

impl OutcomeTerm {
    pub fn eval(&self, instance: &Instance, center: usize, counts: &[usize]) -> Result<f64> {
        match self {
            OutcomeTerm::CenterLabel => instance.outcome_label(center).ok_or(Error::MissingOutcomeLabels(center)),
            OutcomeTerm::DiversityRatio => Ok(diversity(counts)),
            OutcomeTerm::Constant { value } => Ok(*value),
        }
    }

    /// Largest value the term can take for clusters centered at `center`.
    pub(crate) fn max_at(&self, instance: &Instance, center: usize) -> Result<f64> {
        match self {
            OutcomeTerm::DiversityRatio => Ok(1.0),
            other => other.eval(instance, center, &[]),
        }
    }

    pub(crate) fn min_at(&self, instance: &Instance, center: usize) -> Result<f64> {
        match self {
            OutcomeTerm::DiversityRatio => Ok(0.0),
            other => other.eval(instance, center, &[]),
        }
    }
}

/// `f_j(d, L) = w_d · distance_term(d) + w_o · outcome_term(L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointModel {
    pub distance_term: DistanceTerm,
    pub outcome_term: OutcomeTerm,
    pub weights: [f64; 2],
}

impl PointModel {
    pub fn combine(&self, d: f64, outcome: f64) -> f64 {
        self.weights[0] * self.distance_term.eval(d) + self.weights[1] * outcome
    }

    fn validate(&self) -> Result<()> {
        let [wd, wo] = self.weights;
        if !(wd >= 0.0 && wd.is_finite() && wo.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "utility weights must be finite with a nonnegative distance weight, got [{wd}, {wo}]"
            )));
        }
        let finite = match (self.distance_term, self.outcome_term) {
            (DistanceTerm::Linear { offset }, _) if !offset.is_finite() => false,
            (_, OutcomeTerm::Constant { value }) if !value.is_finite() => false,
            _ => true,
        };
        if !finite {
            return Err(Error::InvalidParams("utility parameters must be finite".into()));
        }
        Ok(())
    }

    /// Best utility the point can reach at distance `d` from `center`.
    pub(crate) fn upper_at(&self, instance: &Instance, center: usize, d: f64) -> Result<f64> {
        let o = if self.weights[1] >= 0.0 {
            self.outcome_term.max_at(instance, center)?
        } else {
            self.outcome_term.min_at(instance, center)?
        };
        Ok(self.combine(d, o))
    }
}

/// Utility model with optional per-point overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityModel {
    #[serde(flatten)]
    pub base: PointModel,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<usize, PointModel>,
}

impl UtilityModel {
    pub fn new(distance_term: DistanceTerm, outcome_term: OutcomeTerm, weights: [f64; 2]) -> Result<Self> {
        let model = Self { base: PointModel { distance_term, outcome_term, weights }, overrides: BTreeMap::new() };
        model.base.validate()?;
        Ok(model)
    }

    pub fn with_override(mut self, point: usize, model: PointModel) -> Result<Self> {
        model.validate()?;
        self.overrides.insert(point, model);
        Ok(self)
    }

    pub fn for_point(&self, j: usize) -> &PointModel {
        self.overrides.get(&j).unwrap_or(&self.base)
    }

    /// Parameter checks plus, for center labels, label presence on every
    /// candidate center.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        self.base.validate()?;
        for (&j, m) in &self.overrides {
            if j >= instance.n() {
                return Err(Error::InvalidParams(format!("utility override for unknown point {j}")));
            }
            m.validate()?;
        }
        let needs_labels = std::iter::once(&self.base)
            .chain(self.overrides.values())
            .any(|m| m.outcome_term == OutcomeTerm::CenterLabel);
        if needs_labels {
            if let Some(c) = instance.candidates().into_iter().find(|&c| instance.outcome_label(c).is_none()) {
                return Err(Error::MissingOutcomeLabels(c));
            }
        }
        Ok(())
    }

    pub(crate) fn has_overrides(&self) -> bool {
        !self.overrides.is_empty()
    }
}

/// Utility used in the separation argument between CM/SF and welfare:
/// `(3r − d) + 3r · diversity`.
pub fn theorem1_model(r: f64) -> Result<UtilityModel> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParams(format!("r must be positive, got {r}")));
    }
    UtilityModel::new(DistanceTerm::Linear { offset: 3.0 * r }, OutcomeTerm::DiversityRatio, [1.0, 3.0 * r])
}

/// `u_j` for point `j` under `clustering`.
pub fn point_utility(model: &UtilityModel, instance: &Instance, clustering: &Clustering, j: usize) -> Result<f64> {
    let center = clustering.center_of(j);
    let counts = clustering.color_counts(instance).remove(&center).expect("assigned center has a cluster");
    utility_with_counts(model, instance, center, &counts, j)
}

pub(crate) fn utility_with_counts(
    model: &UtilityModel,
    instance: &Instance,
    center: usize,
    counts: &[usize],
    j: usize,
) -> Result<f64> {
    let m = model.for_point(j);
    let o = m.outcome_term.eval(instance, center, counts)?;
    Ok(m.combine(instance.distance(j, center), o))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelfareReport {
    pub utilities: Vec<f64>,
    /// `U = Σ_j u_j`
    pub total: f64,
    /// `U_h`, the average utility within each color.
    pub per_group: BTreeMap<String, f64>,
    pub min_group: f64,
}

pub fn welfare(model: &UtilityModel, instance: &Instance, clustering: &Clustering) -> Result<WelfareReport> {
    clustering.validate(instance)?;
    let counts = clustering.color_counts(instance);
    let utilities = (0..instance.n())
        .map(|j| {
            let c = clustering.center_of(j);
            utility_with_counts(model, instance, c, &counts[&c], j)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut sums = vec![0.0; instance.n_colors()];
    for (j, u) in utilities.iter().enumerate() {
        sums[instance.color(j)] += u;
    }
    let averages: Vec<f64> = sums.iter().zip(instance.color_sizes()).map(|(s, n)| s / n as f64).collect();
    Ok(WelfareReport {
        total: utilities.iter().sum(),
        utilities,
        min_group: averages.iter().copied().fold(f64::INFINITY, f64::min),
        per_group: averages.into_iter().enumerate().map(|(h, a)| (instance.color_name(h).to_string(), a)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn theorem1_single_color_cluster() {
        let inst = line(&[0.0, 1.0, 10.0], &["r", "r", "b"]);
        let c = Clustering::from_assignment(vec![0, 0, 2]);
        let m = theorem1_model(1.0).unwrap();
        assert_eq!(point_utility(&m, &inst, &c, 1).unwrap(), 2.0);
    }

    #[test]
    fn theorem1_balanced_cluster() {
        let inst = line(&[0.0, 2.0], &["r", "b"]);
        let c = Clustering::from_assignment(vec![0, 0]);
        let m = theorem1_model(1.0).unwrap();
        assert_eq!(point_utility(&m, &inst, &c, 1).unwrap(), 4.0);
    }

    #[test]
    fn diversity_values() {
        assert_eq!(diversity(&[2, 2]), 1.0);
        assert_eq!(diversity(&[3, 0]), 0.0);
        assert!((diversity(&[1, 3]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(diversity(&[5]), 1.0);
        assert_eq!(diversity(&[2, 4, 0]), 0.0);
    }

    #[test]
    fn negated_distance_at_center_is_zero() {
        let inst = line(&[0.0, 3.0], &["r", "b"]);
        let c = Clustering::from_assignment(vec![0, 1]);
        let m = UtilityModel::new(DistanceTerm::Negated, OutcomeTerm::Constant { value: 0.0 }, [1.0, 1.0]).unwrap();
        assert_eq!(point_utility(&m, &inst, &c, 0).unwrap(), 0.0);
    }

    #[test]
    fn constant_utilities_aggregate() {
        let inst = line(&[0.0, 3.0, 4.0], &["r", "b", "b"]);
        let c = Clustering::from_assignment(vec![0, 1, 2]);
        let m = UtilityModel::new(DistanceTerm::Negated, OutcomeTerm::Constant { value: 2.5 }, [1.0, 1.0]).unwrap();
        let w = welfare(&m, &inst, &c).unwrap();
        assert_eq!(w.total, 7.5);
        assert!(w.per_group.values().all(|&u| u == 2.5));
        assert_eq!(w.min_group, 2.5);
    }

    #[test]
    fn missing_labels_are_reported() {
        let inst = line(&[0.0, 3.0], &["r", "b"]);
        let c = Clustering::from_assignment(vec![0, 0]);
        let m = UtilityModel::new(DistanceTerm::Negated, OutcomeTerm::CenterLabel, [1.0, 1.0]).unwrap();
        assert!(matches!(point_utility(&m, &inst, &c, 1), Err(Error::MissingOutcomeLabels(0))));
        assert!(m.validate(&inst).is_err());
    }

    #[test]
    fn overrides_apply_per_point() {
        let inst = line(&[0.0, 3.0], &["r", "b"]);
        let c = Clustering::from_assignment(vec![0, 0]);
        let m = UtilityModel::new(DistanceTerm::Negated, OutcomeTerm::Constant { value: 0.0 }, [1.0, 1.0])
            .unwrap()
            .with_override(
                1,
                PointModel {
                    distance_term: DistanceTerm::Linear { offset: 10.0 },
                    outcome_term: OutcomeTerm::Constant { value: 0.0 },
                    weights: [2.0, 0.0],
                },
            )
            .unwrap();
        assert_eq!(point_utility(&m, &inst, &c, 1).unwrap(), 14.0);
    }

    #[test]
    fn model_json_round_trip() {
        let m = theorem1_model(2.0).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"distance_term\""));
        assert!(text.contains("\"weights\""));
        let back: UtilityModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let with_override: UtilityModel = serde_json::from_str(
            r#"{"distance_term":{"kind":"negated"},"outcome_term":{"kind":"constant","value":1},
                "weights":[1,1],"overrides":{"3":{"distance_term":{"kind":"negated"},
                "outcome_term":{"kind":"diversity_ratio"},"weights":[0.5,2]}}}"#,
        )
        .unwrap();
        assert_eq!(with_override.for_point(3).weights, [0.5, 2.0]);
    }

    #[test]
    fn negative_distance_weight_rejected() {
        assert!(UtilityModel::new(DistanceTerm::Negated, OutcomeTerm::DiversityRatio, [-1.0, 0.0]).is_err());
        assert!(theorem1_model(0.0).is_err());
    }
}
