// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end analyses: matrices, consistency against station geography,
//! clustering, and the change-point set metric comparison.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::changepoint::{Attribute, DetectionParams};
use crate::clustering::{eigengap_k, hierarchical_cluster, spectral_cluster, ClusterAssignment, Dendrogram, Linkage};
use crate::error::{Error, Result};
use crate::geo::{geo_distance_matrix, StationMetadata};
use crate::ingest::ingest;
use crate::matrices::{
    alignment_matrix, consistency_matrix, matrix_norm, normalized_distance_matrix, to_affinity,
    unscaled_distance_matrix, LabeledSquareMatrix, MatrixKind,
};
use crate::series::TimeSeries;
use crate::set_metrics::{hausdorff, mj_semi_metric, modified_hausdorff};
use crate::stepfn::{embed_with_change_points, lp_distance, lp_norm, Embedding, PNorm};
use crate::synthetic::{regime_suite, SUITE_SEED};

const DEFAULT_K_MAX: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KChoice {
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub p: PNorm,
    pub detection: DetectionParams,
    pub linkage: Linkage,
    pub k: KChoice,
    pub series: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            p: PNorm::ONE,
            detection: DetectionParams::default(),
            linkage: Linkage::default(),
            k: KChoice::Auto,
            series: None,
            metadata: None,
            out: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    /// Sets one option by name. Accepts `snake_case` and `kebab-case` keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let num = |what: &str| Error::Config(format!("cannot parse {what} = `{value}`"));
        match key.trim().replace('-', "_").as_str() {
            "attribute" => self.detection.attribute = value.parse::<Attribute>()?,
            "p" => self.p = value.parse()?,
            "significance" => self.detection.significance = value.parse().map_err(|_| num("significance"))?,
            "min_segment" => self.detection.min_segment = value.parse().map_err(|_| num("min_segment"))?,
            "permutations" => self.detection.permutations = value.parse().map_err(|_| num("permutations"))?,
            "linkage" => self.linkage = value.parse()?,
            "k" => {
                self.k = if value.eq_ignore_ascii_case("auto") {
                    KChoice::Auto
                } else {
                    KChoice::Fixed(value.parse().map_err(|_| num("k"))?)
                }
            }
            "seed" => self.detection.seed = value.parse().map_err(|_| num("seed"))?,
            "series" => self.series = Some(PathBuf::from(value)),
            "metadata" => self.metadata = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            other => return Err(Error::Config(format!("unknown option `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_kv_text(&text)?;
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.detection.seed
    }

    pub fn validate(&self) -> Result<()> {
        self.detection.validate()?;
        if self.k == KChoice::Fixed(0) {
            return Err(Error::Config("k must be >= 1".into()));
        }
        Ok(())
    }
}

/// Embeds every series in parallel; results keep input order.
pub fn embed_all(series: &[TimeSeries], params: &DetectionParams) -> Result<Vec<Embedding>> {
    series.par_iter().map(|s| embed_with_change_points(s, params).map_err(|e| label_error(s.id(), e))).collect()
}

fn label_error(label: &str, e: Error) -> Error {
    match e {
        Error::ZeroFunction { .. } => Error::ZeroFunction { label: label.to_string() },
        Error::SeriesTooShort { len, needed, .. } => Error::SeriesTooShort { id: label.to_string(), len, needed },
        Error::InvalidParams(m) => Error::InvalidParams(format!("series `{label}`: {m}")),
        Error::DegenerateSegment { start, end } => {
            Error::InvalidParams(format!("series `{label}`: degenerate segment [{start}, {end})"))
        }
        other => other,
    }
}

/// A matrix together with its clustering outputs.
#[derive(Clone, Debug)]
pub struct ClusteredMatrix {
    pub name: String,
    pub matrix: LabeledSquareMatrix,
    pub dendrogram: Dendrogram,
    pub k: usize,
    pub hierarchical: ClusterAssignment,
    pub spectral: ClusterAssignment,
}

pub fn cluster_matrix(
    name: &str,
    matrix: LabeledSquareMatrix,
    linkage: Linkage,
    k: KChoice,
    seed: u64,
) -> Result<ClusteredMatrix> {
    let dendrogram = hierarchical_cluster(&matrix.to_dissimilarity()?, linkage)?;
    let similarity = matrix.to_similarity()?;
    let n = matrix.n();
    let k = match k {
        KChoice::Fixed(k) if k > n => return Err(Error::BadK { k, n }),
        KChoice::Fixed(k) => k,
        KChoice::Auto => eigengap_k(&similarity, DEFAULT_K_MAX.min(n - 1))?,
    };
    let hierarchical = dendrogram.cut(k)?;
    let spectral = spectral_cluster(&similarity, k, seed)?;
    Ok(ClusteredMatrix { name: name.to_string(), matrix, dendrogram, k, hierarchical, spectral })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesSummary {
    pub id: String,
    pub magnitude: f64,
    pub change_points: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConsistencyNorms {
    pub unscaled: f64,
    pub normalized: f64,
    pub alignment: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixSummary {
    pub name: String,
    pub kind: MatrixKind,
    pub k: usize,
    pub last_merged_leaf: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisSummary {
    pub n: usize,
    pub length: usize,
    pub attribute: Attribute,
    pub p: String,
    pub linkage: Linkage,
    pub significance: f64,
    pub min_segment: usize,
    pub permutations: usize,
    pub seed: u64,
    pub series: Vec<SeriesSummary>,
    pub consistency_norms: Option<ConsistencyNorms>,
    pub matrices: Vec<MatrixSummary>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub embeddings: Vec<Embedding>,
    pub matrices: Vec<ClusteredMatrix>,
    pub summary: AnalysisSummary,
}

impl Analysis {
    pub fn matrix(&self, name: &str) -> Option<&ClusteredMatrix> {
        self.matrices.iter().find(|m| m.name == name)
    }
}

/// Distance, alignment and affinity matrices of the collection and, when
/// stations are given, their consistency with geographic affinity.
pub fn analyze(
    series: &[TimeSeries],
    stations: Option<&[StationMetadata]>,
    config: &PipelineConfig,
) -> Result<Analysis> {
    config.validate()?;
    let embeddings = embed_all(series, &config.detection)?;
    let labels: Vec<String> = series.iter().map(|s| s.id().to_string()).collect();
    let fs: Vec<_> = embeddings.iter().map(|e| e.function.clone()).collect();

    let d_us = unscaled_distance_matrix(&labels, &fs, config.p)?;
    let d_norm = normalized_distance_matrix(&labels, &fs, config.p)?;
    let omega = alignment_matrix(&labels, &fs)?;
    let a_us = to_affinity(&d_us)?;
    let a_norm = to_affinity(&d_norm)?;

    let mut named = vec![
        ("D_us", d_us),
        ("D_norm", d_norm),
        ("Omega", omega.clone()),
        ("A_us", a_us.clone()),
        ("A_norm", a_norm.clone()),
    ];
    let mut norms = None;
    if let Some(stations) = stations {
        let ids: Vec<&str> = stations.iter().map(StationMetadata::id).collect();
        if ids != labels.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::IdMismatch("station metadata must follow series order".into()));
        }
        let g = geo_distance_matrix(stations)?;
        let a_g = to_affinity(&g)?;
        let con_us = consistency_matrix(&a_us, &a_g)?;
        let con_norm = consistency_matrix(&a_norm, &a_g)?;
        let con_omega = consistency_matrix(&omega, &a_g)?;
        norms = Some(ConsistencyNorms {
            unscaled: matrix_norm(&con_us),
            normalized: matrix_norm(&con_norm),
            alignment: matrix_norm(&con_omega),
        });
        named.extend([("G", g), ("A_G", a_g), ("Con_us", con_us), ("Con_norm", con_norm), ("Con_Omega", con_omega)]);
    }

    let matrices = named
        .into_iter()
        .map(|(name, m)| cluster_matrix(name, m, config.linkage, config.k, config.seed()))
        .collect::<Result<Vec<_>>>()?;

    let summary = AnalysisSummary {
        n: series.len(),
        length: series[0].len(),
        attribute: config.detection.attribute,
        p: config.p.to_string(),
        linkage: config.linkage,
        significance: config.detection.significance,
        min_segment: config.detection.min_segment,
        permutations: config.detection.permutations,
        seed: config.seed(),
        series: series
            .iter()
            .zip(&embeddings)
            .map(|(s, e)| SeriesSummary {
                id: s.id().to_string(),
                magnitude: lp_norm(&e.function, config.p),
                change_points: e.change_points.points().to_vec(),
            })
            .collect(),
        consistency_norms: norms,
        matrices: matrices
            .iter()
            .map(|m| MatrixSummary {
                name: m.name.clone(),
                kind: m.matrix.kind(),
                k: m.k,
                last_merged_leaf: m.dendrogram.last_merged_leaf().map(|i| m.matrix.labels()[i].clone()),
            })
            .collect(),
        warnings: Vec::new(),
    };
    Ok(Analysis { embeddings, matrices, summary })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `<name>.csv`, `<name>.nwk`, `<name>.hierarchical.csv` and
/// `<name>.spectral.csv`.
pub fn write_clustered(dir: &Path, m: &ClusteredMatrix) -> Result<()> {
    m.matrix.save(dir.join(format!("{}.csv", m.name)))?;
    write_file(&dir.join(format!("{}.nwk", m.name)), (m.dendrogram.to_newick() + "\n").as_bytes())?;
    let mut buf = Vec::new();
    m.hierarchical.write_csv(&mut buf)?;
    write_file(&dir.join(format!("{}.hierarchical.csv", m.name)), &buf)?;
    let mut buf = Vec::new();
    m.spectral.write_csv(&mut buf)?;
    write_file(&dir.join(format!("{}.spectral.csv", m.name)), &buf)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    write_file(path, text.as_bytes())
}

/// Ingests the configured inputs, runs [`analyze`] and writes every matrix,
/// dendrogram, assignment and `summary.json` to `config.out`.
pub fn run_analysis(config: &PipelineConfig) -> Result<AnalysisSummary> {
    let series_path = config.series.as_deref().ok_or_else(|| Error::Config("no series CSV given".into()))?;
    let input = ingest(series_path, config.metadata.as_deref())?;
    let mut analysis = analyze(&input.series, input.stations.as_deref(), config)?;
    analysis.summary.warnings = input.warnings;

    std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    for m in &analysis.matrices {
        write_clustered(&config.out, m)?;
    }
    write_json(&config.out.join("summary.json"), &analysis.summary)?;
    Ok(analysis.summary)
}

/// Change-point set metrics next to the `L^p` metric on the same series.
#[derive(Clone, Debug)]
pub struct MetricComparison {
    pub embeddings: Vec<Embedding>,
    pub hausdorff: ClusteredMatrix,
    pub modified_hausdorff: ClusteredMatrix,
    pub mj: ClusteredMatrix,
    pub lp: ClusteredMatrix,
}

impl MetricComparison {
    pub fn all(&self) -> [&ClusteredMatrix; 4] {
        [&self.hausdorff, &self.modified_hausdorff, &self.mj, &self.lp]
    }
}

pub fn compare_series(series: &[TimeSeries], config: &PipelineConfig) -> Result<MetricComparison> {
    config.validate()?;
    if series.len() < 2 {
        return Err(Error::InvalidMatrix(format!("pairwise comparison needs at least 2 series, got {}", series.len())));
    }
    let embeddings = embed_all(series, &config.detection)?;
    let labels: Vec<String> = series.iter().map(|s| s.id().to_string()).collect();
    if let Some(i) = embeddings.iter().position(|e| e.change_points.is_empty()) {
        return Err(Error::InvalidParams(format!(
            "series `{}` has no detected change points; set metrics are undefined",
            labels[i]
        )));
    }
    let sets: Vec<&[usize]> = embeddings.iter().map(|e| e.change_points.points()).collect();
    let set_matrix = |f: fn(&[usize], &[usize]) -> Result<f64>| {
        LabeledSquareMatrix::from_pairs(labels.clone(), MatrixKind::Distance, 0.0, |i, j| f(sets[i], sets[j]))
    };
    let d_h = set_matrix(hausdorff)?;
    let d_mh = set_matrix(modified_hausdorff)?;
    let d_mj = set_matrix(|s, t| mj_semi_metric(s, t, 1.0))?;
    let d_p = LabeledSquareMatrix::from_pairs(labels.clone(), MatrixKind::Distance, 0.0, |i, j| {
        lp_distance(&embeddings[i].function, &embeddings[j].function, config.p)
    })?;
    let cluster = |name: &str, m| cluster_matrix(name, m, config.linkage, config.k, config.seed());
    Ok(MetricComparison {
        hausdorff: cluster("hausdorff", d_h)?,
        modified_hausdorff: cluster("modified_hausdorff", d_mh)?,
        mj: cluster("mj1", d_mj)?,
        lp: cluster("lp", d_p)?,
        embeddings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonSummary {
    pub source: String,
    pub p: String,
    pub linkage: Linkage,
    pub series: Vec<SeriesSummary>,
    /// Leaf labels of the first two merges of each dendrogram.
    pub first_merges: Vec<(String, Vec<Vec<String>>)>,
}

/// Runs [`compare_series`] on the configured series, or on the built-in
/// ten-series suite when none is given, and writes the four matrices and
/// dendrograms to `config.out`.
pub fn compare_metrics(config: &PipelineConfig) -> Result<ComparisonSummary> {
    let (series, source) = match &config.series {
        Some(p) => (ingest(p, None)?.series, p.display().to_string()),
        None => (regime_suite(SUITE_SEED)?, format!("ten-series suite (seed {SUITE_SEED})")),
    };
    let cmp = compare_series(&series, config)?;
    std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    for m in cmp.all() {
        write_clustered(&config.out, m)?;
    }
    let summary = ComparisonSummary {
        source,
        p: config.p.to_string(),
        linkage: config.linkage,
        series: series
            .iter()
            .zip(&cmp.embeddings)
            .map(|(s, e)| SeriesSummary {
                id: s.id().to_string(),
                magnitude: lp_norm(&e.function, config.p),
                change_points: e.change_points.points().to_vec(),
            })
            .collect(),
        first_merges: cmp
            .all()
            .iter()
            .map(|m| {
                let labels = m.matrix.labels();
                let merges = (0..m.dendrogram.merges().len().min(2))
                    .map(|i| m.dendrogram.merge_members(i).into_iter().map(|l| labels[l].clone()).collect())
                    .collect();
                (m.name.clone(), merges)
            })
            .collect(),
    };
    write_json(&config.out.join("summary.json"), &summary)?;
    Ok(summary)
}
