//! Small hand-built instances that each exhibit one qualitative contrast
//! between fair and agnostic clustering.
//!
//! Every generator is a pure function of its parameters. Coinciding points
//! are separate points at identical coordinates. Metadata records the figure,
//! the resolved parameters and the suggested `k` and objective.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::clustering::ObjectiveKind;
use crate::error::{Error, Result};
use crate::instance::{ClassLabel, Geometry, Instance, InstanceBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", try_from = "String")]
pub enum FigureId {
    Fig1Cm,
    Fig2Eq,
    Fig3Sf,
    Fig4Degradation,
    Fig5OutlierCm,
    Fig6OutlierEq,
    Fig7Classifier,
    Thm1,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig1Cm,
        FigureId::Fig2Eq,
        FigureId::Fig3Sf,
        FigureId::Fig4Degradation,
        FigureId::Fig5OutlierCm,
        FigureId::Fig6OutlierEq,
        FigureId::Fig7Classifier,
        FigureId::Thm1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1Cm => "fig1_cm",
            FigureId::Fig2Eq => "fig2_eq",
            FigureId::Fig3Sf => "fig3_sf",
            FigureId::Fig4Degradation => "fig4_degradation",
            FigureId::Fig5OutlierCm => "fig5_outlier_cm",
            FigureId::Fig6OutlierEq => "fig6_outlier_eq",
            FigureId::Fig7Classifier => "fig7_classifier",
            FigureId::Thm1 => "thm1",
        }
    }

    /// Number of centers the instance is built for.
    pub fn default_k(self) -> usize {
        match self {
            FigureId::Fig3Sf | FigureId::Fig4Degradation | FigureId::Fig6OutlierEq => 2,
            FigureId::Thm1 => 4,
            _ => 3,
        }
    }

    pub fn default_objective(self) -> ObjectiveKind {
        match self {
            FigureId::Fig2Eq => ObjectiveKind::KCenter,
            _ => ObjectiveKind::KMedian,
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == key || f.name().split('_').next() == Some(key.as_str()))
            .ok_or_else(|| Error::InvalidParams(format!("unknown figure `{s}`")))
    }
}

impl TryFrom<String> for FigureId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Scale parameters; every field is optional and falls back to a
/// per-figure default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureParams {
    /// Unit distance (thm1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Total number of points (fig5, fig6).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Points per stack (thm1, fig1, fig3).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub big_r: Option<f64>,
    #[serde(rename = "Rp", skip_serializing_if = "Option::is_none")]
    pub r_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    /// Separation between stacks (fig1, fig2, fig3, fig7).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")))
    }
}

fn at_least_one(name: &str, v: usize) -> Result<usize> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(Error::InvalidParams(format!("{name} must be at least 1")))
    }
}

fn need(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParams(msg.into()))
    }
}

/// `frac · n` as an exact positive integer.
fn portion(name: &str, frac: f64, n: usize) -> Result<usize> {
    let x = frac * n as f64;
    let rounded = x.round();
    need(
        (x - rounded).abs() < 1e-9 && rounded >= 1.0,
        format!("{name} = {x} must be a positive integer"),
    )?;
    Ok(rounded as usize)
}

struct Layout {
    coords: Vec<Vec<f64>>,
    colors: Vec<String>,
}

impl Layout {
    fn new() -> Self {
        Self { coords: Vec::new(), colors: Vec::new() }
    }

    fn stack(&mut self, at: &[f64], count: usize, color: &str) -> std::ops::Range<usize> {
        let start = self.coords.len();
        for _ in 0..count {
            self.coords.push(at.to_vec());
            self.colors.push(color.to_string());
        }
        start..self.coords.len()
    }

    fn builder(self, facilities: Vec<Vec<f64>>) -> InstanceBuilder {
        let n_fac = facilities.len();
        let mut coords = self.coords;
        coords.extend(facilities);
        InstanceBuilder::new(Geometry::Coords(coords), self.colors).facilities(n_fac)
    }
}

fn finish(figure: FigureId, params: serde_json::Value, builder: InstanceBuilder) -> Result<Instance> {
    builder
        .metadata("figure", json!(figure.name()))
        .metadata("params", params)
        .metadata("k", json!(figure.default_k()))
        .metadata("objective", json!(figure.default_objective().name()))
        .build()
}

/// Build the instance for `figure`, validating the parameter inequalities
/// the construction relies on.
pub fn generate_figure_instance(figure: FigureId, params: &FigureParams) -> Result<Instance> {
    match figure {
        FigureId::Thm1 => thm1(params),
        FigureId::Fig1Cm => fig1(params),
        FigureId::Fig2Eq => fig2(params),
        FigureId::Fig3Sf => fig3(params),
        FigureId::Fig4Degradation => fig4(params),
        FigureId::Fig5OutlierCm => fig5(params),
        FigureId::Fig6OutlierEq => fig6(params),
        FigureId::Fig7Classifier => fig7(params),
    }
}

/// Two regions far apart, each holding one red and one blue stack, with
/// candidate facilities (the only admissible centers) next to each stack and
/// between them. In the first region a shared facility is 7r from both
/// stacks, in the second 2r.
fn thm1(p: &FigureParams) -> Result<Instance> {
    let r = positive("r", p.r.unwrap_or(1.0))?;
    let m = at_least_one("m", p.m.unwrap_or(2))?;
    let far = 100.0 * r;
    let mut l = Layout::new();
    l.stack(&[0.0], m, "red");
    l.stack(&[14.0 * r], m, "blue");
    l.stack(&[far], m, "red");
    l.stack(&[far + 4.0 * r], m, "blue");
    let facilities = [-r, 7.0 * r, 15.0 * r, far - r, far + 2.0 * r, far + 5.0 * r]
        .iter()
        .map(|&x| vec![x])
        .collect();
    let builder = l.builder(facilities).metadata("region_gap", json!(far));
    finish(FigureId::Thm1, json!({"r": r, "m": m}), builder)
}

/// Blue stacks at both ends, a red stack of twice the size in the middle.
/// Facilities sit `eps` off every stack and at the two midpoints.
fn fig1(p: &FigureParams) -> Result<Instance> {
    let s = positive("s", p.s.unwrap_or(10.0))?;
    let eps = positive("eps", p.eps.unwrap_or(1.0))?;
    let m = at_least_one("m", p.m.unwrap_or(2))?;
    need(s > 2.0 * eps, format!("fig1 needs s > 2 eps, got s = {s}, eps = {eps}"))?;
    let mut l = Layout::new();
    l.stack(&[0.0, 0.0], m, "blue");
    l.stack(&[s, 0.0], 2 * m, "red");
    l.stack(&[2.0 * s, 0.0], m, "blue");
    let facilities = vec![
        vec![-eps, 0.0],
        vec![s, eps],
        vec![2.0 * s + eps, 0.0],
        vec![s / 2.0, 0.0],
        vec![1.5 * s, 0.0],
    ];
    finish(FigureId::Fig1Cm, json!({"s": s, "eps": eps, "m": m}), l.builder(facilities))
}

/// Two tight pairs of mutually similar points on either side of a middle
/// point, all at the same distance from it.
fn fig2(p: &FigureParams) -> Result<Instance> {
    let s = positive("s", p.s.unwrap_or(10.0))?;
    let eps = positive("eps", p.eps.unwrap_or(1.0))?;
    need(eps < s, format!("fig2 needs eps < s, got eps = {eps}, s = {s}"))?;
    let coords = vec![
        vec![-s, eps / 2.0],
        vec![-s, -eps / 2.0],
        vec![0.0, 0.0],
        vec![s, eps / 2.0],
        vec![s, -eps / 2.0],
    ];
    let colors = ["red", "blue", "red", "blue", "red"].map(String::from).to_vec();
    let sets = vec![vec![0, 1], vec![0, 1], vec![2], vec![3, 4], vec![3, 4]];
    let builder = InstanceBuilder::new(Geometry::Coords(coords), colors)
        .similarity_sets(sets)
        .metadata("alpha", json!(1.0));
    finish(FigureId::Fig2Eq, json!({"s": s, "eps": eps}), builder)
}

/// Two blue stacks on top, carrying a high outcome label, and two red points
/// below them. The top centers are the desirable ones.
fn fig3(p: &FigureParams) -> Result<Instance> {
    let s = positive("s", p.s.unwrap_or(4.0))?;
    let eps = positive("eps", p.eps.unwrap_or(0.5))?;
    let h = positive("r", p.r.unwrap_or(3.0))?;
    let m = at_least_one("m", p.m.unwrap_or(4))?;
    need(eps < s / 4.0, format!("fig3 needs eps < s/4, got eps = {eps}, s = {s}"))?;
    need(m >= 2, "fig3 needs at least 2 points per top stack")?;
    let mut l = Layout::new();
    let top_left = l.stack(&[0.0, 0.0], m, "blue");
    let top_right = l.stack(&[s, 0.0], m, "blue");
    let bottom = [l.stack(&[s / 2.0 - eps, -h], 1, "red"), l.stack(&[s / 2.0 + eps, -h], 1, "red")];
    let mut labels = BTreeMap::new();
    for j in top_left.chain(top_right) {
        labels.insert(j, 1.0);
    }
    for j in bottom.into_iter().flatten() {
        labels.insert(j, 0.0);
    }
    let builder = l.builder(Vec::new()).outcome_labels(labels);
    finish(FigureId::Fig3Sf, json!({"s": s, "eps": eps, "r": h, "m": m}), builder)
}

/// Two mirrored triads: two reds and a blue, two blues and a red. Points in
/// a triad are `eps` apart, everything else `R`.
fn fig4(p: &FigureParams) -> Result<Instance> {
    let eps = positive("eps", p.eps.unwrap_or(0.1))?;
    let big_r = positive("R", p.big_r.unwrap_or(10.0))?;
    need(big_r >= 10.0 * eps, format!("fig4 needs R >= 10 eps, got R = {big_r}, eps = {eps}"))?;
    let triad = |j: usize| j / 3;
    let matrix = (0..6)
        .map(|a| {
            (0..6)
                .map(|b| match (a == b, triad(a) == triad(b)) {
                    (true, _) => 0.0,
                    (false, true) => eps,
                    (false, false) => big_r,
                })
                .collect()
        })
        .collect();
    let colors = ["red", "red", "blue", "blue", "blue", "red"].map(String::from).to_vec();
    let builder = InstanceBuilder::new(Geometry::Matrix(matrix), colors);
    finish(FigureId::Fig4Degradation, json!({"eps": eps, "R": big_r}), builder)
}

/// On a line: a red stack at −r2, a blue and a red stack at 0 and r1, and a
/// blue stack far to the right at r1 + R.
fn fig5(p: &FigureParams) -> Result<Instance> {
    let n = at_least_one("n", p.n.unwrap_or(20))?;
    let c = p.c.unwrap_or(0.4);
    let r1 = positive("r1", p.r1.unwrap_or(1.0))?;
    let r2 = positive("r2", p.r2.unwrap_or(1.0))?;
    let big_r = positive("R", p.big_r.unwrap_or(100.0))?;
    need(c > 0.0 && c < 0.5, format!("fig5 needs 0 < c < 1/2, got {c}"))?;
    need(r2 >= r1, format!("fig5 needs r2 >= r1, got r1 = {r1}, r2 = {r2}"))?;
    need(
        big_r >= 10.0 * (r1 + r2),
        format!("fig5 needs R >= 10 (r1 + r2), got R = {big_r}"),
    )?;
    let side = portion("c n / 2", c / 2.0, n)?;
    let middle = portion("(1 - c) n / 2", (1.0 - c) / 2.0, n)?;
    let mut l = Layout::new();
    l.stack(&[-r2], side, "red");
    l.stack(&[0.0], middle, "blue");
    l.stack(&[r1], middle, "red");
    l.stack(&[r1 + big_r], side, "blue");
    let params = json!({"n": n, "c": c, "r1": r1, "r2": r2, "R": big_r});
    finish(FigureId::Fig5OutlierCm, params, l.builder(Vec::new()).metadata("outlier_m", json!(10.0)))
}

/// Stacks A = (0, 0) and B = (R, 0) of (1 − ε)/2 · n points each and a small
/// stack T = (R, R′) of ε n points; every point is similar to every other.
fn fig6(p: &FigureParams) -> Result<Instance> {
    let n = at_least_one("n", p.n.unwrap_or(20))?;
    let eps = p.eps.unwrap_or(0.1);
    let big_r = positive("R", p.big_r.unwrap_or(10.0))?;
    let r_prime = positive("Rp", p.r_prime.unwrap_or(2.0))?;
    need(eps > 0.0 && eps < 1.0, format!("fig6 needs 0 < eps < 1, got {eps}"))?;
    need(r_prime < big_r, format!("fig6 needs Rp < R, got Rp = {r_prime}, R = {big_r}"))?;
    let side = portion("(1 - eps) n / 2", (1.0 - eps) / 2.0, n)?;
    let small = portion("eps n", eps, n)?;
    let mut l = Layout::new();
    l.stack(&[0.0, 0.0], side, "blue");
    l.stack(&[big_r, 0.0], side, "blue");
    l.stack(&[big_r, r_prime], small, "red");
    let total = 2 * side + small;
    let everyone: Vec<usize> = (0..total).collect();
    let builder = l
        .builder(Vec::new())
        .similarity_sets(vec![everyone; total])
        .metadata("alpha", json!(1.0 + r_prime / big_r))
        .metadata("outlier_m", json!(1.0 + r_prime / big_r));
    let params = json!({"n": n, "eps": eps, "R": big_r, "Rp": r_prime});
    finish(FigureId::Fig6OutlierEq, params, builder)
}

/// Labeled vertical pairs of points along a line: a red group P, a blue
/// group B, and a red group Q. Each of P, B, Q is linearly separable on
/// its own, but P together with B's positive end is not.
fn fig7(p: &FigureParams) -> Result<Instance> {
    let s = positive("s", p.s.unwrap_or(1.0))?;
    let mut coords = Vec::new();
    let mut colors = Vec::new();
    let mut labels = Vec::new();
    let groups: [(&str, &[(f64, ClassLabel)]); 3] = [
        ("red", &[(-1.0, ClassLabel::Pos), (1.0, ClassLabel::Neg)]),
        (
            "blue",
            &[(8.0, ClassLabel::Pos), (9.0, ClassLabel::Pos), (11.0, ClassLabel::Neg), (12.0, ClassLabel::Neg)],
        ),
        ("red", &[(21.0, ClassLabel::Neg), (23.0, ClassLabel::Pos)]),
    ];
    for (color, spots) in groups {
        for &(x, label) in spots {
            for y in [0.0, 1.0] {
                coords.push(vec![x * s, y * s]);
                colors.push(color.to_string());
                labels.push(label);
            }
        }
    }
    let builder = InstanceBuilder::new(Geometry::Coords(coords), colors).class_labels(labels);
    finish(FigureId::Fig7Classifier, json!({"s": s}), builder)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_figure_builds_with_defaults() {
        for f in FigureId::ALL {
            let inst = generate_figure_instance(f, &FigureParams::default()).unwrap();
            assert_eq!(inst.metadata()["figure"], json!(f.name()));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for f in FigureId::ALL {
            let a = generate_figure_instance(f, &FigureParams::default()).unwrap().to_json();
            let b = generate_figure_instance(f, &FigureParams::default()).unwrap().to_json();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn fig6_stack_sizes() {
        let p = FigureParams { n: Some(20), eps: Some(0.1), big_r: Some(10.0), r_prime: Some(2.0), ..Default::default() };
        let inst = generate_figure_instance(FigureId::Fig6OutlierEq, &p).unwrap();
        assert_eq!(inst.n(), 20);
        let sizes = inst.color_sizes();
        assert_eq!(sizes[inst.color_index("red").unwrap()], 2);
        assert_eq!(inst.distance(0, 9), 10.0);
        assert_eq!(inst.distance(9, 18), 2.0);
    }

    #[test]
    fn fig5_stack_sizes() {
        let p = FigureParams { n: Some(20), c: Some(0.4), r1: Some(1.0), r2: Some(1.0), big_r: Some(100.0), ..Default::default() };
        let inst = generate_figure_instance(FigureId::Fig5OutlierCm, &p).unwrap();
        let xs: Vec<f64> = inst.coords().unwrap().iter().map(|c| c[0]).collect();
        let count = |x: f64| xs.iter().filter(|&&v| v == x).count();
        assert_eq!((count(-1.0), count(0.0), count(1.0), count(101.0)), (4, 6, 6, 4));
    }

    #[test]
    fn violated_inequalities_are_rejected() {
        let bad = [
            (FigureId::Fig5OutlierCm, FigureParams { c: Some(0.6), ..Default::default() }),
            (FigureId::Fig5OutlierCm, FigureParams { r1: Some(2.0), r2: Some(1.0), ..Default::default() }),
            (FigureId::Fig6OutlierEq, FigureParams { r_prime: Some(20.0), ..Default::default() }),
            (FigureId::Fig6OutlierEq, FigureParams { n: Some(7), ..Default::default() }),
            (FigureId::Fig4Degradation, FigureParams { eps: Some(5.0), ..Default::default() }),
            (FigureId::Thm1, FigureParams { r: Some(-1.0), ..Default::default() }),
            (FigureId::Fig1Cm, FigureParams { s: Some(1.0), ..Default::default() }),
        ];
        for (f, p) in bad {
            assert!(matches!(generate_figure_instance(f, &p), Err(Error::InvalidParams(_))), "{f}");
        }
    }

    #[test]
    fn figure_names_parse() {
        assert_eq!("fig4".parse::<FigureId>().unwrap(), FigureId::Fig4Degradation);
        assert_eq!("fig6_outlier_eq".parse::<FigureId>().unwrap(), FigureId::Fig6OutlierEq);
        assert_eq!("thm1".parse::<FigureId>().unwrap(), FigureId::Thm1);
        assert!("fig9".parse::<FigureId>().is_err());
    }
}
