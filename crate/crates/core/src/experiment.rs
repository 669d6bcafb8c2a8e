//! File-driven experiment runs: a JSON config names an instance, the
//! notions to solve, the utility model and the outlier rule; runs write JSON
//! reports (the source of truth), CSV projections, an SVG chart and a
//! manifest.
//!
//! Reports are byte-identical across runs of the same config. Wall times go
//! to `manifest.json` only.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audit::{flag_outliers, outlier_confusion, per_cluster_separability, ClusterSeparability, OutlierConfusion, OutlierRule};
use crate::clustering::{Clustering, ObjectiveKind};
use crate::error::{Error, Result};
use crate::fairness::{solve_fair, CmBounds, EqSpec, Notion, SfSpec};
use crate::generators::{generate_figure_instance, FigureId, FigureParams};
use crate::instance::Instance;
use crate::search::{SolveOptions, DEFAULT_BUDGET_NODES};
use crate::solver::{solve_exact, SolveReport};
use crate::welfare::{compare_notions, theorem1_model, CompareNotion, CompareOptions, Comparison, UtilityModel};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "FAIRCLUST_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSource {
    File { file: PathBuf },
    Generator {
        generator: FigureId,
        #[serde(default)]
        params: FigureParams,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "notion", rename_all = "snake_case", deny_unknown_fields)]
pub enum NotionConfig {
    Agnostic,
    /// Bounds by color name, or one `[lower, upper]` for every color; with
    /// neither, every color is held at its overall share.
    Cm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<BTreeMap<String, [f64; 2]>>,
    },
    /// `alpha` defaults to the instance's `alpha` metadata, else 1.
    Eq {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
    },
    /// `p` defaults to the objective's power.
    Sf {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<u32>,
    },
    Wc,
}

impl NotionConfig {
    pub fn name(&self) -> &'static str {
        match self {
            NotionConfig::Agnostic => "agnostic",
            NotionConfig::Cm { .. } => "cm",
            NotionConfig::Eq { .. } => "eq",
            NotionConfig::Sf { .. } => "sf",
            NotionConfig::Wc => "wc",
        }
    }

    pub fn resolve(&self, instance: &Instance, objective: ObjectiveKind) -> Result<CompareNotion> {
        Ok(match self {
            NotionConfig::Agnostic => CompareNotion::Agnostic,
            NotionConfig::Wc => CompareNotion::Wc,
            NotionConfig::Cm { lower, upper, bounds } => {
                let b = match (bounds, lower, upper) {
                    (Some(named), None, None) => CmBounds::from_named(instance, named)?,
                    (None, Some(l), Some(u)) => CmBounds::uniform(instance, *l, *u)?,
                    (None, None, None) => {
                        let n = instance.n() as f64;
                        let share: Vec<f64> = instance.color_sizes().iter().map(|&s| s as f64 / n).collect();
                        CmBounds::new(share.clone(), share)?
                    }
                    _ => {
                        return Err(Error::InvalidParams(
                            "cm takes either `bounds` or both `lower` and `upper`".into(),
                        ))
                    }
                };
                CompareNotion::Fair(Notion::Cm(b))
            }
            NotionConfig::Eq { alpha } => {
                let a = alpha
                    .or_else(|| instance.metadata().get("alpha").and_then(|v| v.as_f64()))
                    .unwrap_or(1.0);
                CompareNotion::Fair(Notion::Eq(EqSpec::new(a)?))
            }
            NotionConfig::Sf { p } => CompareNotion::Fair(Notion::Sf(match p {
                Some(p) => SfSpec::new(*p)?,
                None => SfSpec::for_objective(objective)?,
            })),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelConfig {
    /// `{"preset": "theorem1", "r": 1.0}`
    Preset { preset: String, r: f64 },
    Model(UtilityModel),
}

impl ModelConfig {
    pub fn resolve(&self) -> Result<UtilityModel> {
        match self {
            ModelConfig::Preset { preset, r } if preset == "theorem1" => theorem1_model(*r),
            ModelConfig::Preset { preset, .. } => Err(Error::InvalidParams(format!("unknown model preset `{preset}`"))),
            ModelConfig::Model(m) => Ok(m.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    /// Defaults to the instance's `k` metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Defaults to the instance's `objective` metadata, else k-median.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveKind>,
    #[serde(default = "default_notions")]
    pub notions: Vec<NotionConfig>,
    /// Defaults to the separation-instance model with r = 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outlier_rule: Option<OutlierRule>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget_nodes: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub enumerate_optima: bool,
}

fn default_notions() -> Vec<NotionConfig> {
    vec![NotionConfig::Agnostic]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET_NODES
}

fn default_tol() -> f64 {
    1e-9
}

impl ExperimentConfig {
    /// Config for a generated instance with everything else defaulted.
    pub fn for_figure(figure: FigureId, params: FigureParams, notions: Vec<NotionConfig>) -> Self {
        Self {
            instance: InstanceSource::Generator { generator: figure, params },
            k: None,
            objective: None,
            notions,
            model: None,
            outlier_rule: None,
            output_dir: default_output_dir(),
            seed: 0,
            budget_nodes: default_budget(),
            tol: default_tol(),
            enumerate_optima: false,
        }
    }

    /// Reads a config; a relative instance file is taken relative to the
    /// config's directory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut config: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if let InstanceSource::File { file } = &mut config.instance {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        Ok(config)
    }

    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }

    pub fn load_instance(&self) -> Result<Instance> {
        match &self.instance {
            InstanceSource::File { file } => Instance::read(file),
            InstanceSource::Generator { generator, params } => generate_figure_instance(*generator, params),
        }
    }

    pub fn resolve_k(&self, instance: &Instance) -> Result<usize> {
        let k = self
            .k
            .or_else(|| instance.metadata().get("k").and_then(|v| v.as_u64()).map(|k| k as usize))
            .ok_or_else(|| Error::InvalidParams("config does not set k and the instance suggests none".into()))?;
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        Ok(k)
    }

    pub fn resolve_objective(&self, instance: &Instance) -> Result<ObjectiveKind> {
        match self.objective {
            Some(o) => Ok(o),
            None => match instance.metadata().get("objective").and_then(|v| v.as_str()) {
                Some(s) => s.parse(),
                None => Ok(ObjectiveKind::KMedian),
            },
        }
    }

    pub fn resolve_model(&self) -> Result<UtilityModel> {
        self.model.as_ref().map_or_else(|| theorem1_model(1.0), ModelConfig::resolve)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions::with_budget(self.budget_nodes)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidParams(format!("tol must be nonnegative, got {}", self.tol)));
        }
        if self.notions.is_empty() {
            return Err(Error::InvalidParams("no notions requested".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub command: String,
    pub threads: usize,
    pub stages: Vec<StageTime>,
    pub files: Vec<String>,
}

/// Files written by a run, manifest last.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub manifest: RunManifest,
}

/// Worker pool honoring `FAIRCLUST_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::InvalidParams(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

struct Run<'a> {
    config: &'a ExperimentConfig,
    command: &'static str,
    dir: PathBuf,
    stages: Vec<StageTime>,
    files: Vec<PathBuf>,
    threads: usize,
}

impl<'a> Run<'a> {
    fn new(config: &'a ExperimentConfig, command: &'static str, threads: usize) -> Result<Self> {
        config.validate()?;
        std::fs::create_dir_all(&config.output_dir)?;
        Ok(Self { config, command, dir: config.output_dir.clone(), stages: Vec::new(), files: Vec::new(), threads })
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.stages.push(StageTime { stage: stage.into(), wall_ms: start.elapsed().as_secs_f64() * 1e3 });
        Ok(out)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: String) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, body)?;
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self) -> Result<RunOutput> {
        let manifest = RunManifest {
            config_hash: self.config.hash(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.into(),
            threads: self.threads,
            stages: self.stages.clone(),
            files: self
                .files
                .iter()
                .map(|p| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()))
                .collect(),
        };
        let path = self.dir.join("manifest.json");
        write_json(&path, &manifest)?;
        self.files.push(path);
        Ok(RunOutput { files: self.files, manifest })
    }
}

struct Prepared {
    instance: Instance,
    k: usize,
    objective: ObjectiveKind,
    notions: Vec<CompareNotion>,
}

fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let instance = config.load_instance()?;
    let k = config.resolve_k(&instance)?;
    let objective = config.resolve_objective(&instance)?;
    let notions = config
        .notions
        .iter()
        .map(|n| n.resolve(&instance, objective))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared { instance, k, objective, notions })
}

fn solve_one(
    p: &Prepared,
    notion: &CompareNotion,
    model: Option<&UtilityModel>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    match notion {
        CompareNotion::Agnostic => solve_exact(&p.instance, p.k, p.objective, None, opts),
        CompareNotion::Fair(n) => solve_fair(&p.instance, p.k, p.objective, n, opts),
        CompareNotion::Wc => {
            let model = model.ok_or_else(|| Error::InvalidParams("wc needs a utility model".into()))?;
            crate::welfare::solve_welfare_centric(&p.instance, p.k, model, opts)
        }
    }
}

/// Solve every configured notion; writes `solve_<notion>.json` and
/// `clustering_<notion>.json` per notion.
pub fn run_solve(config: &ExperimentConfig) -> Result<RunOutput> {
    let pool = thread_pool()?;
    let mut run = Run::new(config, "solve", pool.current_num_threads())?;
    let p = run.timed("load", || prepare(config))?;
    let model = if p.notions.contains(&CompareNotion::Wc) { Some(config.resolve_model()?) } else { None };
    let opts = config.solve_options();
    let reports = run.timed("solve", || {
        pool.install(|| {
            p.notions
                .par_iter()
                .map(|n| solve_one(&p, n, model.as_ref(), &opts))
                .collect::<Result<Vec<_>>>()
        })
    })?;
    for (cfg, rep) in config.notions.iter().zip(&reports) {
        run.json(&format!("solve_{}.json", cfg.name()), rep)?;
        let value = rep.objective_value;
        run.json(&format!("clustering_{}.json", cfg.name()), &rep.clustering.to_file(p.objective, value))?;
    }
    run.finish()
}

/// CSV projection of a comparison table.
pub fn comparison_csv(cmp: &Comparison) -> Result<String> {
    let groups: Vec<String> = cmp.rows.first().map(|r| r.group_welfare.keys().cloned().collect()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["notion".to_string(), "variant".into(), "objective_value".into(), "sf_value".into(), "pof".into(), "total_welfare".into()];
    header.extend(groups.iter().map(|g| format!("welfare_{g}")));
    header.push("min_group_welfare".into());
    header.extend(groups.iter().map(|g| format!("cost_{g}")));
    header.push("degraded_groups".into());
    w.write_record(&header).map_err(csv_error)?;
    for r in &cmp.rows {
        let mut rec = vec![
            r.notion.clone(),
            r.variant.to_string(),
            r.objective_value.to_string(),
            r.sf_value.map_or_else(String::new, |v| v.to_string()),
            r.pof.to_string(),
            r.total_welfare.to_string(),
        ];
        rec.extend(groups.iter().map(|g| r.group_welfare[g].to_string()));
        rec.push(r.min_group_welfare.to_string());
        rec.extend(groups.iter().map(|g| r.group_costs[g].to_string()));
        rec.push(r.degraded_groups.join(";"));
        w.write_record(&rec).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParams(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidParams(format!("csv: {e}"))
}

/// Grouped bar chart of `U_h` per comparison row.
pub fn welfare_svg(cmp: &Comparison) -> String {
    const PALETTE: [&str; 6] = ["#c0392b", "#2c6fbb", "#27ae60", "#8e44ad", "#d68910", "#566573"];
    let groups: Vec<String> = cmp.rows.first().map(|r| r.group_welfare.keys().cloned().collect()).unwrap_or_default();
    let values = cmp.rows.iter().flat_map(|r| r.group_welfare.values().copied());
    let (lo, hi) = values.fold((0.0f64, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    let span = if hi - lo > 0.0 { hi - lo } else { 1.0 };
    let (width, height, margin) = (120.0 + 90.0 * cmp.rows.len() as f64, 320.0, 40.0);
    let plot_h = height - 2.0 * margin;
    let y = |v: f64| margin + (hi - v) / span * plot_h;
    let bar_w = 60.0 / groups.len().max(1) as f64;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    svg.push_str(&format!(
        "<line x1=\"{margin}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        y(0.0),
        width - 10.0,
        y(0.0)
    ));
    for (i, row) in cmp.rows.iter().enumerate() {
        let x0 = margin + 20.0 + 90.0 * i as f64;
        for (g, name) in groups.iter().enumerate() {
            let v = row.group_welfare[name];
            let (top, bottom) = if v >= 0.0 { (y(v), y(0.0)) } else { (y(0.0), y(v)) };
            svg.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{top:.2}\" width=\"{bar_w:.2}\" height=\"{:.2}\" fill=\"{}\"><title>{name}: {v}</title></rect>\n",
                x0 + bar_w * g as f64,
                bottom - top,
                PALETTE[g % PALETTE.len()]
            ));
        }
        let label = if row.variant > 0 { format!("{}#{}", row.notion, row.variant) } else { row.notion.clone() };
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{label}</text>\n",
            x0 + 30.0,
            height - 12.0
        ));
    }
    for (g, name) in groups.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"16\" fill=\"{}\">U_{name}</text>\n",
            margin + 70.0 * g as f64,
            PALETTE[g % PALETTE.len()]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Welfare comparison across the configured notions; writes
/// `comparison.json`, `comparison.csv` and `welfare.svg`.
pub fn run_compare(config: &ExperimentConfig) -> Result<(RunOutput, Comparison)> {
    let pool = thread_pool()?;
    let mut run = Run::new(config, "compare", pool.current_num_threads())?;
    let p = run.timed("load", || prepare(config))?;
    let model = config.resolve_model()?;
    let opts = CompareOptions { solve: config.solve_options(), enumerate_optima: config.enumerate_optima, tol: config.tol };
    let cmp = run.timed("compare", || {
        pool.install(|| compare_notions(&p.instance, p.k, p.objective, &model, &p.notions, &opts))
    })?;
    run.json("comparison.json", &cmp)?;
    run.text("comparison.csv", comparison_csv(&cmp)?)?;
    run.text("welfare.svg", welfare_svg(&cmp))?;
    Ok((run.finish()?, cmp))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlaggedSets {
    pub fair: Vec<usize>,
    pub agnostic: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityPair {
    pub fair: BTreeMap<usize, ClusterSeparability>,
    pub agnostic: BTreeMap<usize, ClusterSeparability>,
}

/// Audit of one fair notion against the agnostic optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub notion: String,
    pub fair: Clustering,
    pub agnostic: Clustering,
    pub rule: Option<OutlierRule>,
    pub flagged: Option<FlaggedSets>,
    pub confusion: Option<OutlierConfusion>,
    /// Present when the instance carries class labels and coordinates.
    pub separability: Option<SeparabilityPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub k: usize,
    pub objective: ObjectiveKind,
    pub entries: Vec<AuditEntry>,
}

/// Outlier and separability audit of every non-agnostic notion; writes
/// `audit.json` and `audit.csv`.
pub fn run_audit(config: &ExperimentConfig) -> Result<(RunOutput, AuditReport)> {
    let pool = thread_pool()?;
    let mut run = Run::new(config, "audit", pool.current_num_threads())?;
    let p = run.timed("load", || prepare(config))?;
    if let Some(rule) = &config.outlier_rule {
        rule.validate()?;
    }
    let opts = config.solve_options();
    let model = if p.notions.contains(&CompareNotion::Wc) { Some(config.resolve_model()?) } else { None };
    let fair_notions: Vec<&CompareNotion> = p.notions.iter().filter(|n| **n != CompareNotion::Agnostic).collect();
    if fair_notions.is_empty() {
        return Err(Error::InvalidParams("audit needs at least one non-agnostic notion".into()));
    }
    let (agnostic, fair) = run.timed("solve", || {
        pool.install(|| {
            let agnostic = solve_exact(&p.instance, p.k, p.objective, None, &opts)?;
            let fair = fair_notions
                .par_iter()
                .map(|n| solve_one(&p, n, model.as_ref(), &opts))
                .collect::<Result<Vec<_>>>()?;
            Ok((agnostic, fair))
        })
    })?;
    let labelled = p.instance.class_labels().is_some() && p.instance.coords().is_some();
    let entries = run.timed("audit", || {
        fair.iter()
            .zip(&fair_notions)
            .map(|(rep, notion)| {
                let (flagged, confusion) = match &config.outlier_rule {
                    Some(rule) => (
                        Some(FlaggedSets {
                            fair: flag_outliers(&p.instance, &rep.clustering, rule)?.into_iter().collect(),
                            agnostic: flag_outliers(&p.instance, &agnostic.clustering, rule)?.into_iter().collect(),
                        }),
                        Some(outlier_confusion(&p.instance, &rep.clustering, &agnostic.clustering, rule)?),
                    ),
                    None => (None, None),
                };
                let separability = if labelled {
                    Some(SeparabilityPair {
                        fair: per_cluster_separability(&p.instance, &rep.clustering)?,
                        agnostic: per_cluster_separability(&p.instance, &agnostic.clustering)?,
                    })
                } else {
                    None
                };
                Ok(AuditEntry {
                    notion: notion.name().into(),
                    fair: rep.clustering.clone(),
                    agnostic: agnostic.clustering.clone(),
                    rule: config.outlier_rule,
                    flagged,
                    confusion,
                    separability,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let report = AuditReport { k: p.k, objective: p.objective, entries };
    run.json("audit.json", &report)?;
    run.text("audit.csv", audit_csv(&report)?)?;
    Ok((run.finish()?, report))
}

fn audit_csv(report: &AuditReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["notion", "group", "flagged_fair", "flagged_agnostic", "false_positives", "false_negatives"])
        .map_err(csv_error)?;
    for e in &report.entries {
        if let Some(conf) = &e.confusion {
            for (g, c) in &conf.per_group {
                w.write_record([
                    e.notion.clone(),
                    g.clone(),
                    c.flagged_fair.len().to_string(),
                    c.flagged_agnostic.len().to_string(),
                    c.false_positives.len().to_string(),
                    c.false_negatives.len().to_string(),
                ])
                .map_err(csv_error)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParams(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_round_trip() {
        let text = r#"{
            "instance": {"generator": "thm1", "params": {"r": 1.0}},
            "k": 4,
            "objective": "k_median",
            "notions": [{"notion": "cm", "lower": 0.5, "upper": 0.5}, {"notion": "sf"}, {"notion": "wc"}],
            "model": {"preset": "theorem1", "r": 1.0},
            "outlier_rule": {"kind": "multiple_of_median", "m": 10.0}
        }"#;
        let c: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.notions.len(), 3);
        let again: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(again, c);
        assert_eq!(c.hash(), again.hash());
    }

    #[test]
    fn unknown_notion_is_rejected() {
        let text = r#"{"instance": {"generator": "fig4"}, "notions": [{"notion": "dp"}]}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
    }

    #[test]
    fn default_cm_uses_overall_shares() {
        let inst = generate_figure_instance(FigureId::Fig4Degradation, &FigureParams::default()).unwrap();
        let n = NotionConfig::Cm { lower: None, upper: None, bounds: None }.resolve(&inst, ObjectiveKind::KMedian).unwrap();
        let CompareNotion::Fair(Notion::Cm(b)) = n else { panic!("expected cm") };
        assert_eq!((b.lower(0), b.upper(0)), (0.5, 0.5));
    }

    #[test]
    fn zero_k_is_invalid() {
        let mut c = ExperimentConfig::for_figure(FigureId::Fig4Degradation, FigureParams::default(), default_notions());
        c.k = Some(0);
        let inst = c.load_instance().unwrap();
        assert!(matches!(c.resolve_k(&inst), Err(Error::InvalidParams(_))));
    }
}
