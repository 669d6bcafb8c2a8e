use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    KCenter,
    KMedian,
    KMeans,
}

impl ObjectiveKind {
    /// Distance power used when aggregating: 2 for k-means, 1 otherwise.
    pub fn power(self) -> u32 {
        match self {
            ObjectiveKind::KMeans => 2,
            ObjectiveKind::KCenter | ObjectiveKind::KMedian => 1,
        }
    }

    /// Per-point contribution `d^p`.
    #[inline]
    pub fn point_cost(self, d: f64) -> f64 {
        match self {
            ObjectiveKind::KMeans => d * d,
            ObjectiveKind::KCenter | ObjectiveKind::KMedian => d,
        }
    }

    /// Fold per-point contributions (max for k-center, sum otherwise).
    #[inline]
    pub fn combine(self, acc: f64, x: f64) -> f64 {
        match self {
            ObjectiveKind::KCenter => acc.max(x),
            ObjectiveKind::KMedian | ObjectiveKind::KMeans => acc + x,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::KCenter => "k_center",
            ObjectiveKind::KMedian => "k_median",
            ObjectiveKind::KMeans => "k_means",
        }
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "k_center" | "kcenter" => Ok(ObjectiveKind::KCenter),
            "k_median" | "kmedian" => Ok(ObjectiveKind::KMedian),
            "k_means" | "kmeans" => Ok(ObjectiveKind::KMeans),
            other => Err(Error::InvalidParams(format!("unknown objective `{other}`"))),
        }
    }
}

/// A set of centers together with a total assignment of points to them.
///
/// `centers` is kept sorted and free of duplicates. Centers with no assigned
/// point are allowed; [`Clustering::normalized`] drops them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    centers: Vec<usize>,
    assignment: Vec<usize>,
}

impl Clustering {
    pub fn new(mut centers: Vec<usize>, assignment: Vec<usize>) -> Self {
        centers.sort_unstable();
        centers.dedup();
        Self { centers, assignment }
    }

    /// Centers taken to be exactly the assigned ones.
    pub fn from_assignment(assignment: Vec<usize>) -> Self {
        Self::new(assignment.clone(), assignment)
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn center_of(&self, j: usize) -> usize {
        self.assignment[j]
    }

    pub fn normalized(&self) -> Clustering {
        Clustering::from_assignment(self.assignment.clone())
    }

    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.assignment.len() != instance.n() {
            return Err(Error::InvalidClustering(format!(
                "assignment covers {} points, instance has {}",
                self.assignment.len(),
                instance.n()
            )));
        }
        if let Some(&c) = self.centers.iter().find(|&&c| !instance.is_candidate(c)) {
            return Err(Error::InvalidClustering(format!("{c} is not a candidate center")));
        }
        if let Some((j, &c)) = self
            .assignment
            .iter()
            .enumerate()
            .find(|(_, c)| self.centers.binary_search(c).is_err())
        {
            return Err(Error::InvalidClustering(format!(
                "point {j} assigned to {c}, which is not a center"
            )));
        }
        Ok(())
    }

    pub fn validate_k(&self, instance: &Instance, k: usize) -> Result<()> {
        self.validate(instance)?;
        if self.centers.len() > k {
            return Err(Error::InvalidClustering(format!(
                "{} centers exceed k = {k}",
                self.centers.len()
            )));
        }
        Ok(())
    }

    /// Clusters `C_i`, keyed by center; empty clusters included.
    pub fn clusters(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> =
            self.centers.iter().map(|&c| (c, Vec::new())).collect();
        for (j, &c) in self.assignment.iter().enumerate() {
            out.entry(c).or_default().push(j);
        }
        out
    }

    /// Color counts `|C_i^h|` per center.
    pub fn color_counts(&self, instance: &Instance) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = self
            .centers
            .iter()
            .map(|&c| (c, vec![0; instance.n_colors()]))
            .collect();
        for (j, &c) in self.assignment.iter().enumerate() {
            out.entry(c).or_insert_with(|| vec![0; instance.n_colors()])[instance.color(j)] += 1;
        }
        out
    }

    /// Assigned distance `d(j, φ(j))` for every point.
    pub fn distances(&self, instance: &Instance) -> Vec<f64> {
        self.assignment
            .iter()
            .enumerate()
            .map(|(j, &c)| instance.distance(j, c))
            .collect()
    }

    /// Ordering used for deterministic tie-breaking: fewer centers first, then
    /// lexicographic by center identifiers, then by assignment.
    pub fn canonical_cmp(&self, other: &Clustering) -> std::cmp::Ordering {
        (self.centers.len(), &self.centers, &self.assignment).cmp(&(
            other.centers.len(),
            &other.centers,
            &other.assignment,
        ))
    }

    pub fn to_file(&self, objective: ObjectiveKind, value: f64) -> ClusteringFile {
        ClusteringFile {
            centers: self.centers.clone(),
            assignment: self.assignment.iter().copied().enumerate().collect(),
            objective,
            value,
        }
    }

    pub fn write(&self, path: impl AsRef<Path>, objective: ObjectiveKind, value: f64) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&self.to_file(objective, value))?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// On-disk clustering document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringFile {
    pub centers: Vec<usize>,
    pub assignment: BTreeMap<usize, usize>,
    pub objective: ObjectiveKind,
    pub value: f64,
}

impl ClusteringFile {
    pub fn into_clustering(self) -> Result<Clustering> {
        if self.assignment.keys().enumerate().any(|(i, &p)| i != p) {
            return Err(Error::InvalidClustering("assignment must cover points 0..n".into()));
        }
        Ok(Clustering::new(self.centers, self.assignment.into_values().collect()))
    }
}

/// Clustering cost under one of the three centroid objectives.
pub fn evaluate_cost(instance: &Instance, clustering: &Clustering, objective: ObjectiveKind) -> Result<f64> {
    clustering.validate(instance)?;
    Ok(cost_unchecked(instance, clustering.assignment(), objective))
}

pub(crate) fn cost_unchecked(instance: &Instance, assignment: &[usize], objective: ObjectiveKind) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(j, &c)| objective.point_cost(instance.distance(j, c)))
        .fold(0.0, |acc, x| objective.combine(acc, x))
}

/// Per-color `Σ_{j ∈ P^h} d^p(j, φ(j))` with the objective's power.
pub fn group_costs(instance: &Instance, clustering: &Clustering, objective: ObjectiveKind) -> Vec<f64> {
    let mut out = vec![0.0; instance.n_colors()];
    for (j, &c) in clustering.assignment().iter().enumerate() {
        let d = instance.distance(j, c);
        out[instance.color(j)] += match objective.power() {
            2 => d * d,
            _ => d,
        };
    }
    out
}

/// Assign each point to its closest center, ties to the lowest identifier.
pub fn nearest_assignment(instance: &Instance, centers: &[usize]) -> Result<Clustering> {
    if centers.is_empty() {
        return Err(Error::InvalidParams("at least one center is required".into()));
    }
    if let Some(&c) = centers.iter().find(|&&c| c >= instance.n_sites_total()) {
        return Err(Error::InvalidClustering(format!("unknown center {c}")));
    }
    let mut sorted = centers.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let assignment = (0..instance.n()).map(|j| nearest(instance, j, &sorted)).collect();
    Ok(Clustering::new(sorted, assignment))
}

/// Closest center among `sorted` (ascending ids); the first minimum wins.
pub(crate) fn nearest(instance: &Instance, j: usize, sorted: &[usize]) -> usize {
    let mut best = sorted[0];
    let mut best_d = instance.distance(j, best);
    for &c in &sorted[1..] {
        let d = instance.distance(j, c);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}
