use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::ObjectiveKind;
use crate::error::{Error, Result};
use crate::instance::Instance;

const COUNT_SLACK: f64 = 1e-12;

/// Proportional color-mixing bounds `l_h |C_i| ≤ |C_i^h| ≤ u_h |C_i|`,
/// indexed by the instance's color index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl CmBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidParams("lower and upper bounds differ in length".into()));
        }
        for (h, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !(0.0..=1.0).contains(&l) || !(0.0..=1.0).contains(&u) || l > u {
                return Err(Error::InvalidParams(format!(
                    "color {h}: need 0 <= l <= u <= 1, got l = {l}, u = {u}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Same `[l, u]` for every color of the instance.
    pub fn uniform(instance: &Instance, l: f64, u: f64) -> Result<Self> {
        Self::new(vec![l; instance.n_colors()], vec![u; instance.n_colors()])
    }

    /// Bounds given by color name; every color of the instance must appear.
    pub fn from_named(instance: &Instance, bounds: &BTreeMap<String, [f64; 2]>) -> Result<Self> {
        let mut lower = Vec::with_capacity(instance.n_colors());
        let mut upper = Vec::with_capacity(instance.n_colors());
        for name in instance.color_names() {
            let [l, u] = bounds
                .get(name)
                .ok_or_else(|| Error::InvalidParams(format!("no CM bounds for color `{name}`")))?;
            lower.push(*l);
            upper.push(*u);
        }
        if let Some(extra) = bounds.keys().find(|c| instance.color_index(c).is_none()) {
            return Err(Error::InvalidParams(format!("CM bounds name unknown color `{extra}`")));
        }
        Self::new(lower, upper)
    }

    pub fn lower(&self, h: usize) -> f64 {
        self.lower[h]
    }

    pub fn upper(&self, h: usize) -> f64 {
        self.upper[h]
    }

    pub fn n_colors(&self) -> usize {
        self.lower.len()
    }

    /// Whether a cluster with these color counts satisfies every bound.
    pub fn admits(&self, counts: &[usize]) -> bool {
        let size = counts.iter().sum::<usize>() as f64;
        counts.iter().enumerate().all(|(h, &c)| {
            let c = c as f64;
            self.lower[h] * size <= c + COUNT_SLACK && c <= self.upper[h] * size + COUNT_SLACK
        })
    }

    pub(crate) fn check_colors(&self, instance: &Instance) -> Result<()> {
        if self.n_colors() != instance.n_colors() {
            return Err(Error::InvalidParams(format!(
                "CM bounds cover {} colors, instance has {}",
                self.n_colors(),
                instance.n_colors()
            )));
        }
        Ok(())
    }
}

/// α-equitable distance fairness over the instance's similarity sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqSpec {
    alpha: f64,
}

impl EqSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::InvalidParams(format!("EQ needs a finite alpha >= 1, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Socially fair objective with distance power `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SfSpec {
    p: u32,
}

impl SfSpec {
    pub fn new(p: u32) -> Result<Self> {
        if p != 1 && p != 2 {
            return Err(Error::InvalidParams(format!("SF power must be 1 or 2, got {p}")));
        }
        Ok(Self { p })
    }

    /// Power matching the objective: 1 for k-median, 2 for k-means.
    pub fn for_objective(objective: ObjectiveKind) -> Result<Self> {
        match objective {
            ObjectiveKind::KMedian => Self::new(1),
            ObjectiveKind::KMeans => Self::new(2),
            ObjectiveKind::KCenter => Err(Error::InvalidParams(
                "the socially fair objective is defined for k-median and k-means only".into(),
            )),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub(crate) fn point_cost(&self, d: f64) -> f64 {
        if self.p == 2 {
            d * d
        } else {
            d
        }
    }
}

/// Hard constraints on the assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Cm(CmBounds),
    Eq(EqSpec),
}

/// A fairness notion: a hard constraint or the SF objective.
#[derive(Debug, Clone, PartialEq)]
pub enum Notion {
    Cm(CmBounds),
    Eq(EqSpec),
    Sf(SfSpec),
}

impl Notion {
    pub fn name(&self) -> &'static str {
        match self {
            Notion::Cm(_) => "cm",
            Notion::Eq(_) => "eq",
            Notion::Sf(_) => "sf",
        }
    }

    pub fn constraint(&self) -> Option<Constraint> {
        match self {
            Notion::Cm(b) => Some(Constraint::Cm(b.clone())),
            Notion::Eq(e) => Some(Constraint::Eq(*e)),
            Notion::Sf(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_are_validated() {
        assert!(CmBounds::new(vec![0.6], vec![0.5]).is_err());
        assert!(CmBounds::new(vec![-0.1], vec![0.5]).is_err());
        assert!(CmBounds::new(vec![0.0], vec![1.1]).is_err());
        assert!(CmBounds::new(vec![0.5], vec![0.5]).is_ok());
    }

    #[test]
    fn admits_balanced_and_empty_clusters() {
        let b = CmBounds::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert!(b.admits(&[2, 2]));
        assert!(b.admits(&[0, 0]));
        assert!(!b.admits(&[3, 1]));
        let loose = CmBounds::new(vec![0.25, 0.25], vec![0.75, 0.75]).unwrap();
        assert!(loose.admits(&[3, 1]));
        assert!(!loose.admits(&[4, 1]));
    }

    #[test]
    fn eq_alpha_at_least_one() {
        assert!(EqSpec::new(0.5).is_err());
        assert!(EqSpec::new(f64::INFINITY).is_err());
        assert!(EqSpec::new(1.0).is_ok());
    }

    #[test]
    fn sf_power_follows_objective() {
        assert_eq!(SfSpec::for_objective(ObjectiveKind::KMedian).unwrap().p(), 1);
        assert_eq!(SfSpec::for_objective(ObjectiveKind::KMeans).unwrap().p(), 2);
        assert!(SfSpec::for_objective(ObjectiveKind::KCenter).is_err());
        assert!(SfSpec::new(3).is_err());
    }
}
