//! Clustering instances: points with a metric, group colors, and the optional
//! side information used by the fairness notions (similarity sets), the
//! utility model (outcome labels), and the downstream audits (class labels).
//!
//! Points are identified by `0..n`. An instance may additionally carry
//! uncolored candidate facilities with identifiers `n..n+m`; when present they
//! are the only admissible centers, otherwise centers are drawn from the
//! points themselves.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for all distance comparisons.
pub const DIST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// One coordinate vector per site (points first, then facilities).
    Coords(Vec<Vec<f64>>),
    /// Symmetric distance matrix over all sites.
    Matrix(Vec<Vec<f64>>),
}

impl Geometry {
    fn len(&self) -> usize {
        match self {
            Geometry::Coords(c) => c.len(),
            Geometry::Matrix(m) => m.len(),
        }
    }
}

/// Binary class label carried by a point for the per-cluster classifier audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "+")]
    Pos,
    #[serde(rename = "-")]
    Neg,
}

impl ClassLabel {
    pub fn sign(self) -> f64 {
        match self {
            ClassLabel::Pos => 1.0,
            ClassLabel::Neg => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    geometry: Geometry,
    dist: Vec<f64>,
    n_points: usize,
    n_facilities: usize,
    colors: Vec<usize>,
    color_names: Vec<String>,
    similarity_sets: Option<Vec<Vec<usize>>>,
    outcome_labels: Option<BTreeMap<usize, f64>>,
    class_labels: Option<Vec<ClassLabel>>,
    metadata: serde_json::Map<String, serde_json::Value>,
    site_of: Vec<usize>,
}

/// Validating constructor for [`Instance`].
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    geometry: Geometry,
    colors: Vec<String>,
    facility_count: usize,
    similarity_sets: Option<Vec<Vec<usize>>>,
    outcome_labels: Option<BTreeMap<usize, f64>>,
    class_labels: Option<Vec<ClassLabel>>,
    metadata: serde_json::Map<String, serde_json::Value>,
    check_triangle: bool,
}

impl InstanceBuilder {
    pub fn new(geometry: Geometry, colors: Vec<String>) -> Self {
        Self {
            geometry,
            colors,
            facility_count: 0,
            similarity_sets: None,
            outcome_labels: None,
            class_labels: None,
            metadata: serde_json::Map::new(),
            check_triangle: true,
        }
    }

    pub fn facilities(mut self, count: usize) -> Self {
        self.facility_count = count;
        self
    }

    pub fn similarity_sets(mut self, sets: Vec<Vec<usize>>) -> Self {
        self.similarity_sets = Some(sets);
        self
    }

    pub fn outcome_labels(mut self, labels: BTreeMap<usize, f64>) -> Self {
        self.outcome_labels = Some(labels);
        self
    }

    pub fn class_labels(mut self, labels: Vec<ClassLabel>) -> Self {
        self.class_labels = Some(labels);
        self
    }

    pub fn metadata(mut self, key: &str, value: serde_json::Value) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }

    /// Skip the triangle-inequality check (adversarial test matrices only).
    pub fn unchecked_triangle(mut self) -> Self {
        self.check_triangle = false;
        self
    }

    pub fn build(self) -> Result<Instance> {
        let total = self.geometry.len();
        if total <= self.facility_count {
            return Err(Error::InvalidParams("instance needs at least one point".into()));
        }
        let n = total - self.facility_count;
        if self.colors.len() < n {
            return Err(Error::ColorMissing(self.colors.len()));
        }
        if self.colors.len() > n {
            return Err(Error::InvalidParams(format!(
                "{} colors for {} points",
                self.colors.len(),
                n
            )));
        }
        if let Some(j) = self.colors.iter().position(|c| c.is_empty()) {
            return Err(Error::ColorMissing(j));
        }

        let dist = materialize(&self.geometry)?;
        validate_metric(&dist, total, self.check_triangle)?;

        if let Some(sets) = &self.similarity_sets {
            if sets.len() != n {
                return Err(Error::InvalidParams(format!(
                    "{} similarity sets for {} points",
                    sets.len(),
                    n
                )));
            }
            for (j, s) in sets.iter().enumerate() {
                if s.is_empty() {
                    return Err(Error::InvalidParams(format!("similarity set of {j} is empty")));
                }
                if let Some(bad) = s.iter().find(|&&x| x >= n) {
                    return Err(Error::InvalidParams(format!(
                        "similarity set of {j} names unknown point {bad}"
                    )));
                }
            }
        }
        if let Some(labels) = &self.outcome_labels {
            if let Some(bad) = labels.keys().find(|&&c| c >= total) {
                return Err(Error::InvalidParams(format!("outcome label for unknown center {bad}")));
            }
        }
        if let Some(labels) = &self.class_labels {
            if labels.len() != n {
                return Err(Error::InvalidParams(format!(
                    "{} class labels for {} points",
                    labels.len(),
                    n
                )));
            }
        }

        let mut color_names: Vec<String> = self.colors.clone();
        color_names.sort();
        color_names.dedup();
        let colors = self
            .colors
            .iter()
            .map(|c| color_names.binary_search(c).expect("color present"))
            .collect();

        let site_of = compute_sites(&dist, total);

        Ok(Instance {
            geometry: self.geometry,
            dist,
            n_points: n,
            n_facilities: self.facility_count,
            colors,
            color_names,
            similarity_sets: self.similarity_sets.map(|sets| {
                sets.into_iter()
                    .map(|mut s| {
                        s.sort_unstable();
                        s.dedup();
                        s
                    })
                    .collect()
            }),
            outcome_labels: self.outcome_labels,
            class_labels: self.class_labels,
            metadata: self.metadata,
            site_of,
        })
    }
}

/// Build and validate an instance from its geometry, colors and optional side data.
pub fn build_instance(
    geometry: Geometry,
    colors: Vec<String>,
    similarity_sets: Option<Vec<Vec<usize>>>,
    outcome_labels: Option<BTreeMap<usize, f64>>,
) -> Result<Instance> {
    let mut b = InstanceBuilder::new(geometry, colors);
    if let Some(s) = similarity_sets {
        b = b.similarity_sets(s);
    }
    if let Some(l) = outcome_labels {
        b = b.outcome_labels(l);
    }
    b.build()
}

fn materialize(geometry: &Geometry) -> Result<Vec<f64>> {
    let total = geometry.len();
    let mut dist = vec![0.0; total * total];
    match geometry {
        Geometry::Coords(coords) => {
            let dim = coords.first().map_or(0, Vec::len);
            if coords.iter().any(|c| c.len() != dim) {
                return Err(Error::InvalidParams("coordinate vectors differ in length".into()));
            }
            if coords.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParams("non-finite coordinate".into()));
            }
            for i in 0..total {
                for j in (i + 1)..total {
                    let d = coords[i]
                        .iter()
                        .zip(&coords[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    dist[i * total + j] = d;
                    dist[j * total + i] = d;
                }
            }
        }
        Geometry::Matrix(rows) => {
            for (i, row) in rows.iter().enumerate() {
                if row.len() != total {
                    return Err(Error::InvalidParams(format!(
                        "matrix row {i} has {} entries, expected {total}",
                        row.len()
                    )));
                }
                dist[i * total..(i + 1) * total].copy_from_slice(row);
            }
        }
    }
    Ok(dist)
}

fn validate_metric(dist: &[f64], total: usize, check_triangle: bool) -> Result<()> {
    for i in 0..total {
        if dist[i * total + i].abs() > DIST_TOL {
            return Err(Error::MetricViolation(format!("d({i},{i}) is nonzero")));
        }
        for j in 0..total {
            let d = dist[i * total + j];
            if !d.is_finite() || d < 0.0 {
                return Err(Error::MetricViolation(format!("d({i},{j}) = {d} is not a nonnegative real")));
            }
            if (d - dist[j * total + i]).abs() > DIST_TOL {
                return Err(Error::MetricViolation(format!("d({i},{j}) != d({j},{i})")));
            }
        }
    }
    if check_triangle {
        for i in 0..total {
            for j in 0..total {
                for m in 0..total {
                    let direct = dist[i * total + j];
                    let via = dist[i * total + m] + dist[m * total + j];
                    if direct > via + DIST_TOL {
                        return Err(Error::MetricViolation(format!(
                            "triangle inequality: d({i},{j}) = {direct} > d({i},{m}) + d({m},{j}) = {via}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

// Sites are classes of coinciding locations: zero distance and identical rows.
fn compute_sites(dist: &[f64], total: usize) -> Vec<usize> {
    let mut site_of = vec![usize::MAX; total];
    let mut next = 0;
    for i in 0..total {
        if site_of[i] != usize::MAX {
            continue;
        }
        site_of[i] = next;
        for j in (i + 1)..total {
            if site_of[j] == usize::MAX
                && dist[i * total + j] <= DIST_TOL
                && (0..total).all(|m| (dist[i * total + m] - dist[j * total + m]).abs() <= DIST_TOL)
            {
                site_of[j] = next;
            }
        }
        next += 1;
    }
    site_of
}

impl Instance {
    /// Number of (colored) points.
    pub fn n(&self) -> usize {
        self.n_points
    }

    pub fn n_facilities(&self) -> usize {
        self.n_facilities
    }

    /// Points plus facilities.
    pub fn n_sites_total(&self) -> usize {
        self.n_points + self.n_facilities
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n_sites_total() + b]
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        match &self.geometry {
            Geometry::Coords(c) => Some(c),
            Geometry::Matrix(_) => None,
        }
    }

    /// Full distance matrix over points and facilities.
    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        let t = self.n_sites_total();
        self.dist.chunks(t).map(<[f64]>::to_vec).collect()
    }

    /// Identifiers eligible to act as centers.
    pub fn candidates(&self) -> Vec<usize> {
        if self.n_facilities > 0 {
            (self.n_points..self.n_sites_total()).collect()
        } else {
            (0..self.n_points).collect()
        }
    }

    pub fn is_candidate(&self, id: usize) -> bool {
        if self.n_facilities > 0 {
            (self.n_points..self.n_sites_total()).contains(&id)
        } else {
            id < self.n_points
        }
    }

    /// Coinciding-location class of a point or facility.
    pub fn site(&self, id: usize) -> usize {
        self.site_of[id]
    }

    pub fn color(&self, j: usize) -> usize {
        self.colors[j]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn color_names(&self) -> &[String] {
        &self.color_names
    }

    pub fn color_name(&self, h: usize) -> &str {
        &self.color_names[h]
    }

    pub fn color_index(&self, name: &str) -> Option<usize> {
        self.color_names.iter().position(|c| c == name)
    }

    pub fn n_colors(&self) -> usize {
        self.color_names.len()
    }

    /// Number of points per color, `|P^h|`.
    pub fn color_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_colors()];
        for &c in &self.colors {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn similarity_sets(&self) -> Option<&[Vec<usize>]> {
        self.similarity_sets.as_deref()
    }

    pub fn outcome_labels(&self) -> Option<&BTreeMap<usize, f64>> {
        self.outcome_labels.as_ref()
    }

    pub fn outcome_label(&self, center: usize) -> Option<f64> {
        self.outcome_labels.as_ref().and_then(|l| l.get(&center).copied())
    }

    pub fn class_labels(&self) -> Option<&[ClassLabel]> {
        self.class_labels.as_deref()
    }

    pub fn metadata(&self) -> &serde_json::Map<String, serde_json::Value> {
        &self.metadata
    }

    /// Same instance with every distance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Instance> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParams("scale factor must be positive".into()));
        }
        let geometry = match &self.geometry {
            Geometry::Coords(c) => {
                Geometry::Coords(c.iter().map(|v| v.iter().map(|x| x * factor).collect()).collect())
            }
            Geometry::Matrix(m) => {
                Geometry::Matrix(m.iter().map(|v| v.iter().map(|x| x * factor).collect()).collect())
            }
        };
        let mut file = self.to_file();
        match geometry {
            Geometry::Coords(c) => file.coords = Some(c),
            Geometry::Matrix(m) => file.matrix = Some(m),
        }
        Instance::from_file(file)
    }

    pub fn to_file(&self) -> InstanceFile {
        let (coords, matrix) = match &self.geometry {
            Geometry::Coords(c) => (Some(c.clone()), None),
            Geometry::Matrix(m) => (None, Some(m.clone())),
        };
        InstanceFile {
            points: (0..self.n_points).collect(),
            coords,
            matrix,
            facility_count: self.n_facilities,
            colors: self.colors.iter().map(|&c| self.color_names[c].clone()).collect(),
            similarity_sets: self.similarity_sets.clone(),
            outcome_labels: self.outcome_labels.clone(),
            class_labels: self.class_labels.clone(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn from_file(file: InstanceFile) -> Result<Instance> {
        let geometry = match (file.coords, file.matrix) {
            (Some(c), None) => Geometry::Coords(c),
            (None, Some(m)) => Geometry::Matrix(m),
            _ => {
                return Err(Error::InvalidParams(
                    "instance needs exactly one of `coords` or `matrix`".into(),
                ))
            }
        };
        if file.points.iter().enumerate().any(|(i, &p)| i != p) {
            return Err(Error::InvalidParams("points must be listed as 0..n in order".into()));
        }
        if file.points.len() != file.colors.len() {
            return Err(Error::ColorMissing(file.colors.len().min(file.points.len())));
        }
        let mut b = InstanceBuilder::new(geometry, file.colors).facilities(file.facility_count);
        if let Some(s) = file.similarity_sets {
            b = b.similarity_sets(s);
        }
        if let Some(l) = file.outcome_labels {
            b = b.outcome_labels(l);
        }
        if let Some(l) = file.class_labels {
            b = b.class_labels(l);
        }
        b.metadata = file.metadata;
        b.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        Instance::from_file(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Instance> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// On-disk instance document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub points: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub facility_count: usize,
    pub colors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity_sets: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome_labels: Option<BTreeMap<usize, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_labels: Option<Vec<ClassLabel>>,
    #[serde(default)]
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Geometry {
        Geometry::Coords(xs.iter().map(|&x| vec![x]).collect())
    }

    fn colors(n: usize) -> Vec<String> {
        (0..n).map(|i| if i % 2 == 0 { "red" } else { "blue" }.to_string()).collect()
    }

    #[test]
    fn collinear_points_materialize_matrix() {
        let inst = build_instance(line(&[0.0, 1.0, 2.0]), colors(3), None, None).unwrap();
        assert_eq!(
            inst.distance_matrix(),
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]
        );
    }

    #[test]
    fn triangle_breach_is_rejected() {
        let m = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let err = build_instance(Geometry::Matrix(m.clone()), colors(3), None, None).unwrap_err();
        assert!(matches!(err, Error::MetricViolation(_)));
        // the check can be switched off for adversarial matrices
        InstanceBuilder::new(Geometry::Matrix(m), colors(3))
            .unchecked_triangle()
            .build()
            .unwrap();
    }

    #[test]
    fn asymmetric_and_negative_matrices_are_rejected() {
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(matches!(
            build_instance(Geometry::Matrix(asym), colors(2), None, None),
            Err(Error::MetricViolation(_))
        ));
        let neg = vec![vec![0.0, -1.0], vec![-1.0, 0.0]];
        assert!(matches!(
            build_instance(Geometry::Matrix(neg), colors(2), None, None),
            Err(Error::MetricViolation(_))
        ));
    }

    #[test]
    fn missing_color_is_rejected() {
        let err = build_instance(line(&[0.0, 1.0]), vec!["red".into()], None, None).unwrap_err();
        assert!(matches!(err, Error::ColorMissing(1)));
        let err = build_instance(line(&[0.0, 1.0]), vec!["red".into(), String::new()], None, None)
            .unwrap_err();
        assert!(matches!(err, Error::ColorMissing(1)));
    }

    #[test]
    fn empty_similarity_set_is_rejected() {
        let err = build_instance(line(&[0.0, 1.0]), colors(2), Some(vec![vec![0], vec![]]), None)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidParams(_)));
    }

    #[test]
    fn coinciding_points_share_a_site() {
        let inst = build_instance(line(&[0.0, 0.0, 3.0, 0.0]), colors(4), None, None).unwrap();
        assert_eq!(inst.site(0), inst.site(1));
        assert_eq!(inst.site(0), inst.site(3));
        assert_ne!(inst.site(0), inst.site(2));
    }

    #[test]
    fn facilities_are_the_only_candidates() {
        let inst = InstanceBuilder::new(line(&[0.0, 1.0, 0.5]), colors(2))
            .facilities(1)
            .build()
            .unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.candidates(), vec![2]);
        assert!(!inst.is_candidate(0));
    }

    #[test]
    fn json_round_trip_is_value_identical() {
        let mut labels = BTreeMap::new();
        labels.insert(1, 2.5);
        let inst = InstanceBuilder::new(line(&[0.0, 1.0, 4.0]), colors(3))
            .similarity_sets(vec![vec![0, 1], vec![1], vec![2, 0]])
            .outcome_labels(labels)
            .class_labels(vec![ClassLabel::Pos, ClassLabel::Neg, ClassLabel::Pos])
            .metadata("figure", serde_json::json!("test"))
            .build()
            .unwrap();
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), text);
    }
}
