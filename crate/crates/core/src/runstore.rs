//! Staged working directories and immutable, checksummed run bundles.
//!
//! A [`Workdir`] accumulates stage outputs between CLI invocations. Publishing
//! copies them into `<out>/<run_id>/` together with the dashboard API bundle
//! and a manifest listing every artifact's size and SHA-256. The run directory
//! is assembled under a temporary name and renamed into place, so a reader
//! never sees a half-written run; an existing run directory is never touched.
//!
//! The run id is the SHA-256 (first 16 hex digits) of the canonical JSON of
//! the configuration and the input checksums.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::alignment::{csv_field, Program};
use crate::catalog::{facet_values, parse_framework, ColumnMap, FacetValues, FrameworkCatalog};
use crate::embed::{EmbeddingSet, ProviderConfig};
use crate::pipeline::{self, parse_programs, Analytics, PipelineConfig};
use crate::topics::{KeywordScore, TopicAssignment, TopicKeywords, TopicModel};
use crate::validation::LabeledPairSet;
use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RunStoreError {
    #[error("stage `{missing}` has not been run in {workdir}")]
    PartialRun { missing: &'static str, workdir: PathBuf },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest schema version {found} is not supported (expected {SCHEMA_VERSION})")]
    SchemaVersionUnsupported { found: u32 },
    #[error("artifact {path} does not match its manifest checksum")]
    ChecksumMismatch { path: String },
    #[error("artifact {path} is unreadable: {reason}")]
    Corrupt { path: String, reason: String },
    #[error("run has no learning outcomes")]
    EmptyRun,
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunStoreError + '_ {
    move |source| RunStoreError::IoFailure {
        path: path.to_path_buf(),
        source,
    }
}

fn corrupt(path: &str, reason: impl ToString) -> RunStoreError {
    RunStoreError::Corrupt {
        path: path.to_string(),
        reason: reason.to_string(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a sibling temp file and a rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunStoreError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn read(path: &Path) -> Result<Vec<u8>, RunStoreError> {
    fs::read(path).map_err(io_err(path))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("in-memory values serialize");
    v.push(b'\n');
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Embed,
    Fit,
    Analyze,
    Validate,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Ingest, Stage::Embed, Stage::Fit, Stage::Analyze, Stage::Validate];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Embed => "embed",
            Stage::Fit => "fit",
            Stage::Analyze => "analyze",
            Stage::Validate => "validate",
        }
    }

    /// Files a stage leaves in the working directory (relative paths).
    fn files(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest => &["catalog.csv", "programs.toml"],
            Stage::Embed => &["embeddings.bin"],
            Stage::Fit => &["topics.csv", "keywords.csv", "topic_model.json"],
            Stage::Analyze => &[
                "matrix_subjects.csv",
                "distributions.csv",
                "reports/cross_subject_topics.json",
                "reports/spirality.json",
                "reports/dendrogram.json",
            ],
            Stage::Validate => &["reports/consistency.json", "reports/expert_eval.json"],
        }
    }
}

/// SHA-256 of everything read from outside the working directory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputChecksums {
    /// Canonical catalog CSV, so column naming and row quoting do not matter.
    pub catalog: String,
    pub programs: String,
    /// Precomputed vector cache, when the file embedder is used.
    pub embeddings: Option<String>,
    pub labels: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct WorkState {
    config: PipelineConfig,
    inputs: InputChecksums,
    stages: Vec<Stage>,
}

/// Intermediate outputs of the staged CLI.
#[derive(Debug, Clone)]
pub struct Workdir {
    root: PathBuf,
}

impl Workdir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workdir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn state(&self) -> Result<Option<WorkState>, RunStoreError> {
        let p = self.path("state.json");
        if !p.exists() {
            return Ok(None);
        }
        serde_json::from_slice(&read(&p)?)
            .map(Some)
            .map_err(|e| corrupt("state.json", e))
    }

    /// Stored configuration (default before ingest).
    pub fn config(&self) -> Result<PipelineConfig, RunStoreError> {
        Ok(self.state()?.map(|s| s.config).unwrap_or_default())
    }

    pub fn completed(&self) -> Result<Vec<Stage>, RunStoreError> {
        Ok(self.state()?.map(|s| s.stages).unwrap_or_default())
    }

    fn require(&self, needed: &[Stage]) -> Result<WorkState, RunStoreError> {
        let state = self.state()?;
        let done = state.as_ref().map(|s| s.stages.as_slice()).unwrap_or_default();
        if let Some(missing) = needed.iter().find(|s| !done.contains(s)) {
            return Err(RunStoreError::PartialRun {
                missing: missing.as_str(),
                workdir: self.root.clone(),
            });
        }
        Ok(state.expect("at least one stage required"))
    }

    /// Marks `stage` done and drops every later stage, whose outputs are now stale.
    fn complete(&self, mut state: WorkState, stage: Stage) -> Result<(), RunStoreError> {
        for later in Stage::ALL.iter().filter(|s| **s > stage) {
            for f in later.files() {
                let p = self.path(f);
                if p.exists() {
                    fs::remove_file(&p).map_err(io_err(&p))?;
                }
            }
        }
        state.stages.retain(|s| *s < stage);
        state.stages.push(stage);
        write_atomic(&self.path("state.json"), &to_json(&state))
    }

    pub fn ingest(&self, catalog: &FrameworkCatalog, programs_toml: &str) -> Result<()> {
        parse_programs(programs_toml)?;
        let mut csv = Vec::new();
        catalog.write_csv(&mut csv)?;
        fs::create_dir_all(&self.root).map_err(io_err(&self.root))?;
        write_atomic(&self.path("catalog.csv"), &csv)?;
        write_atomic(&self.path("programs.toml"), programs_toml.as_bytes())?;
        let state = WorkState {
            config: self.config()?,
            inputs: InputChecksums {
                catalog: sha256_hex(&csv),
                programs: sha256_hex(programs_toml.as_bytes()),
                embeddings: None,
                labels: None,
            },
            stages: Vec::new(),
        };
        Ok(self.complete(state, Stage::Ingest)?)
    }

    pub fn load_catalog(&self) -> Result<FrameworkCatalog> {
        self.require(&[Stage::Ingest])?;
        let p = self.path("catalog.csv");
        Ok(parse_framework(read(&p)?.as_slice(), &ColumnMap::default())?)
    }

    /// Runs text preparation and embedding with `cfg`'s embedding settings.
    pub fn embed(&self, cfg: &PipelineConfig, embeddings_path: Option<&Path>) -> Result<EmbeddingSet> {
        let mut state = self.require(&[Stage::Ingest])?;
        let catalog = self.load_catalog()?;
        let (_, emb) = pipeline::embed_catalog(&catalog, cfg, embeddings_path)?;
        state.inputs.embeddings = match embeddings_path.filter(|_| cfg.embedder == pipeline::EmbedderKind::File) {
            Some(p) => Some(sha256_hex(&read(p)?)),
            None => None,
        };
        state.config.embedder = cfg.embedder;
        state.config.dim = cfg.dim;
        state.config.embed_seed = cfg.embed_seed;
        state.config.stopwords = cfg.stopwords.clone();
        write_atomic(&self.path("embeddings.bin"), &emb.to_bytes())?;
        self.complete(state, Stage::Embed)?;
        Ok(emb)
    }

    fn load_embeddings(&self, state: &WorkState) -> Result<EmbeddingSet> {
        let tag = ProviderConfig::hash(state.config.dim, state.config.embed_seed).tag();
        let tag = match state.config.embedder {
            pipeline::EmbedderKind::Hash => tag,
            pipeline::EmbedderKind::File => "precomputed".to_string(),
        };
        let bytes = read(&self.path("embeddings.bin"))?;
        Ok(EmbeddingSet::from_bytes(&bytes, &tag)?)
    }

    /// Fits the topic model with `cfg`'s topic settings.
    pub fn fit(&self, cfg: &PipelineConfig) -> Result<TopicModel> {
        let mut state = self.require(&[Stage::Ingest, Stage::Embed])?;
        let catalog = self.load_catalog()?;
        let emb = self.load_embeddings(&state)?;
        state.config.topics = cfg.topics.clone();
        state.config.top_k_keywords = cfg.top_k_keywords;
        let docs = pipeline::prepare_docs(&catalog, &state.config)?;
        let (model, keywords) = pipeline::fit_topics(&emb, &docs, &state.config)?;
        write_atomic(&self.path("topics.csv"), topics_csv(&model.assignment, &keywords).as_bytes())?;
        write_atomic(&self.path("keywords.csv"), keywords_csv(&keywords).as_bytes())?;
        write_atomic(&self.path("topic_model.json"), &to_json(&TopicModelDoc::from(&model)))?;
        self.complete(state, Stage::Fit)?;
        Ok(model)
    }

    fn load_topics(&self, catalog: &FrameworkCatalog) -> Result<(TopicAssignment, TopicKeywords)> {
        let topics = String::from_utf8(read(&self.path("topics.csv"))?).map_err(|e| corrupt("topics.csv", e))?;
        let keywords =
            String::from_utf8(read(&self.path("keywords.csv"))?).map_err(|e| corrupt("keywords.csv", e))?;
        Ok((parse_topics_csv(&topics, catalog)?, parse_keywords_csv(&keywords)?))
    }

    pub fn analyze(&self, cfg: &PipelineConfig) -> Result<Analytics> {
        let mut state = self.require(&[Stage::Ingest, Stage::Embed, Stage::Fit])?;
        state.config.min_cross_subjects = cfg.min_cross_subjects;
        state.config.exclude_same_standard = cfg.exclude_same_standard;
        let catalog = self.load_catalog()?;
        let (assignment, keywords) = self.load_topics(&catalog)?;
        let analytics = pipeline::analyze(&catalog, &assignment, &keywords, &state.config)?;
        write_atomic(&self.path("matrix_subjects.csv"), analytics.subject_matrix.to_csv().as_bytes())?;
        write_atomic(&self.path("distributions.csv"), analytics.distribution.to_csv().as_bytes())?;
        write_atomic(&self.path("reports/cross_subject_topics.json"), &to_json(&analytics.cross_topics))?;
        write_atomic(&self.path("reports/spirality.json"), &to_json(&analytics.spirality))?;
        write_atomic(&self.path("reports/dendrogram.json"), &to_json(&analytics.dendrogram))?;
        self.complete(state, Stage::Analyze)?;
        Ok(analytics)
    }

    /// Framework consistency, plus expert agreement when a label file
    /// (`code_a,code_b,label[,rater]`) is given.
    pub fn validate(&self, labels_csv: Option<&[u8]>) -> Result<pipeline::ValidationReports> {
        let mut state = self.require(&[Stage::Ingest, Stage::Embed, Stage::Fit, Stage::Analyze])?;
        let catalog = self.load_catalog()?;
        let (assignment, _) = self.load_topics(&catalog)?;
        let matches = crate::alignment::build_matches(&assignment, &catalog)?;
        let labels = labels_csv.map(LabeledPairSet::from_csv).transpose()?;
        let reports = pipeline::validate(&catalog, &matches, labels.as_ref())?;
        state.inputs.labels = labels_csv.map(sha256_hex);
        let consistency: BTreeMap<&str, _> = std::iter::once(("standard", Some(&reports.standard)))
            .chain(std::iter::once(("strand", reports.strand.as_ref())))
            .collect();
        write_atomic(&self.path("reports/consistency.json"), &to_json(&consistency))?;
        write_atomic(&self.path("reports/expert_eval.json"), &to_json(&reports.expert))?;
        self.complete(state, Stage::Validate)?;
        Ok(reports)
    }
}

/// Runs every stage into `workdir`.
pub fn run_all(
    workdir: &Workdir,
    catalog: &FrameworkCatalog,
    programs_toml: &str,
    cfg: &PipelineConfig,
    embeddings_path: Option<&Path>,
    labels_csv: Option<&[u8]>,
) -> Result<()> {
    workdir.ingest(catalog, programs_toml)?;
    workdir.embed(cfg, embeddings_path)?;
    workdir.fit(cfg)?;
    workdir.analyze(cfg)?;
    workdir.validate(labels_csv)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TopicModelDoc {
    effective_reduced_dim: usize,
    effective_k: usize,
    n_topics: usize,
    n_outliers: usize,
    seed: u64,
    inertia: f64,
    inertia_trace: Vec<f64>,
    /// Kept-topic centroids in reduced space, indexed by topic id.
    centroids: Vec<Vec<f64>>,
    pca: Option<crate::topics::PcaModel>,
}

impl From<&TopicModel> for TopicModelDoc {
    fn from(m: &TopicModel) -> Self {
        TopicModelDoc {
            effective_reduced_dim: m.effective_reduced_dim,
            effective_k: m.effective_k,
            n_topics: m.assignment.k(),
            n_outliers: m.assignment.outlier_count(),
            seed: m.assignment.seed,
            inertia: m.assignment.inertia,
            inertia_trace: m.inertia_trace.clone(),
            centroids: m.assignment.centroids.clone(),
            pca: m.pca.clone(),
        }
    }
}

fn topics_csv(assignment: &TopicAssignment, keywords: &TopicKeywords) -> String {
    let mut out = String::from("lo_code,topic_id,keywords\n");
    for (code, &t) in assignment.ids().iter().zip(assignment.topics()) {
        let kw = keywords.terms(t).join(" ");
        out.push_str(&format!("{},{t},{}\n", csv_field(code), csv_field(&kw)));
    }
    out
}

fn keywords_csv(keywords: &TopicKeywords) -> String {
    let mut out = String::from("topic_id,rank,term,score\n");
    for (t, terms) in &keywords.topics {
        for (rank, k) in terms.iter().enumerate() {
            out.push_str(&format!("{t},{},{},{}\n", rank + 1, csv_field(&k.term), k.score));
        }
    }
    out
}

fn csv_records(src: &str, file: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>, RunStoreError> {
    let mut rdr = csv::Reader::from_reader(src.as_bytes());
    let got = rdr.headers().map_err(|e| corrupt(file, e))?;
    if got.iter().ne(header.iter().copied()) {
        return Err(corrupt(file, format!("unexpected header {got:?}")));
    }
    rdr.records().map(|r| r.map_err(|e| corrupt(file, e))).collect()
}

fn parse_topics_csv(src: &str, catalog: &FrameworkCatalog) -> Result<TopicAssignment, RunStoreError> {
    let file = "topics.csv";
    let mut ids = Vec::new();
    let mut topics = Vec::new();
    for rec in csv_records(src, file, &["lo_code", "topic_id", "keywords"])? {
        ids.push(rec[0].to_string());
        topics.push(rec[1].parse::<i32>().map_err(|e| corrupt(file, e))?);
    }
    if ids.len() != catalog.len() || ids.iter().zip(catalog.los()).any(|(id, lo)| *id != lo.code) {
        return Err(corrupt(file, "rows do not follow the catalog"));
    }
    Ok(TopicAssignment::from_labels(ids, topics))
}

fn parse_keywords_csv(src: &str) -> Result<TopicKeywords, RunStoreError> {
    let file = "keywords.csv";
    let mut kw = TopicKeywords::default();
    for rec in csv_records(src, file, &["topic_id", "rank", "term", "score"])? {
        let t: i32 = rec[0].parse().map_err(|e| corrupt(file, e))?;
        let score: f64 = rec[3].parse().map_err(|e| corrupt(file, e))?;
        kw.topics.entry(t).or_default().push(KeywordScore {
            term: rec[2].to_string(),
            score,
        });
    }
    Ok(kw)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub reduced_dim: usize,
    pub k: usize,
    pub n_topics: usize,
    pub n_outliers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub run_id: String,
    /// RFC 3339; honours `SOURCE_DATE_EPOCH`. Not part of the run id.
    pub created_at: String,
    pub generator: String,
    pub config: PipelineConfig,
    pub inputs: InputChecksums,
    pub effective: EffectiveParams,
    pub artifacts: Vec<Artifact>,
}

pub fn compute_run_id(config: &PipelineConfig, inputs: &InputChecksums) -> String {
    // serde_json writes struct fields in declaration order and maps sorted,
    // which makes this encoding canonical for these types
    let canonical = serde_json::to_vec(&serde_json::json!({ "config": config, "inputs": inputs }))
        .expect("config serializes");
    sha256_hex(&canonical)[..16].to_string()
}

fn created_at() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Files under `dir`, relative, `/`-separated, sorted.
fn list_files(dir: &Path) -> Result<Vec<String>, RunStoreError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(io_err(&d))? {
            let entry = entry.map_err(io_err(&d))?;
            let p = entry.path();
            if entry.file_type().map_err(io_err(&p))?.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).expect("under dir");
                out.push(rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Publishes a fully staged working directory as `<out_root>/<run_id>/`.
/// Re-publishing identical inputs returns the existing run untouched.
pub fn publish_run(workdir: &Workdir, out_root: &Path) -> Result<RunManifest> {
    publish_inner(workdir, out_root, None)
}

fn publish_inner(workdir: &Workdir, out_root: &Path, fail_after: Option<usize>) -> Result<RunManifest> {
    let state = workdir.require(&Stage::ALL)?;
    let run_id = compute_run_id(&state.config, &state.inputs);
    let target = out_root.join(&run_id);
    if target.join("manifest.json").exists() {
        log::info!("run {run_id} already published at {}", target.display());
        return Ok(load_run(&target)?.manifest.expect("loaded from a manifest"));
    }
    fs::create_dir_all(out_root).map_err(io_err(out_root))?;
    let tmp = out_root.join(format!(".tmp-{run_id}-{}", std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(io_err(&tmp))?;
    }
    let mut written = 0usize;
    for stage in Stage::ALL {
        for f in stage.files() {
            if fail_after == Some(written) {
                return Err(RunStoreError::IoFailure {
                    path: tmp.join(f),
                    source: std::io::Error::other("injected failure"),
                }
                .into());
            }
            let bytes = read(&workdir.path(f))?;
            write_atomic(&tmp.join(f), &bytes)?;
            written += 1;
        }
    }

    let model: TopicModelDoc =
        serde_json::from_slice(&read(&tmp.join("topic_model.json"))?).map_err(|e| corrupt("topic_model.json", e))?;
    let snapshot = assemble_snapshot(&tmp, run_id.clone(), state.config.clone())?;
    crate::service::bundle::write_bundle(&snapshot, &tmp.join("api_bundle"))?;

    let mut artifacts = Vec::new();
    for rel in list_files(&tmp)? {
        let bytes = read(&tmp.join(&rel))?;
        artifacts.push(Artifact {
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
            path: rel,
        });
    }
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        run_id: run_id.clone(),
        created_at: created_at(),
        generator: format!("loalign {}", env!("CARGO_PKG_VERSION")),
        config: state.config,
        inputs: state.inputs,
        effective: EffectiveParams {
            reduced_dim: model.effective_reduced_dim,
            k: model.effective_k,
            n_topics: model.n_topics,
            n_outliers: model.n_outliers,
        },
        artifacts,
    };
    write_atomic(&tmp.join("manifest.json"), &to_json(&manifest))?;
    match fs::rename(&tmp, &target) {
        Ok(()) => Ok(manifest),
        // a concurrent publisher of the same inputs won the race
        Err(_) if target.join("manifest.json").exists() => {
            let _ = fs::remove_dir_all(&tmp);
            Ok(load_run(&target)?.manifest.expect("loaded from a manifest"))
        }
        Err(e) => Err(RunStoreError::IoFailure { path: target, source: e }.into()),
    }
}

/// A loaded run: the stored topic assignment with every analytic recomputed.
#[derive(Debug, Clone)]
pub struct RunSnapshot {
    pub run_id: String,
    pub config: PipelineConfig,
    pub catalog: FrameworkCatalog,
    pub assignment: TopicAssignment,
    pub keywords: TopicKeywords,
    pub programs: BTreeMap<String, Program>,
    pub analytics: Analytics,
    pub facets: FacetValues,
    /// Set for published runs.
    pub manifest: Option<RunManifest>,
}

impl RunSnapshot {
    /// Builds a snapshot from an assignment held in memory (nothing is
    /// verified against disk). Analytics are computed here.
    pub fn from_parts(
        run_id: impl Into<String>,
        config: PipelineConfig,
        catalog: FrameworkCatalog,
        assignment: TopicAssignment,
        keywords: TopicKeywords,
        programs: BTreeMap<String, Program>,
    ) -> Result<Self> {
        if catalog.is_empty() {
            return Err(RunStoreError::EmptyRun.into());
        }
        let analytics = pipeline::analyze(&catalog, &assignment, &keywords, &config)?;
        Ok(RunSnapshot {
            run_id: run_id.into(),
            config,
            facets: facet_values(&catalog),
            catalog,
            assignment,
            keywords,
            programs,
            analytics,
            manifest: None,
        })
    }
}

fn assemble_snapshot(dir: &Path, run_id: String, config: PipelineConfig) -> Result<RunSnapshot> {
    let catalog = parse_framework(read(&dir.join("catalog.csv"))?.as_slice(), &ColumnMap::default())?;
    if catalog.is_empty() {
        return Err(RunStoreError::EmptyRun.into());
    }
    let wd = Workdir::new(dir);
    let (assignment, keywords) = wd.load_topics(&catalog)?;
    let programs_src =
        String::from_utf8(read(&dir.join("programs.toml"))?).map_err(|e| corrupt("programs.toml", e))?;
    let programs = parse_programs(&programs_src)?;
    let snap = RunSnapshot::from_parts(run_id, config, catalog, assignment, keywords, programs)?;
    let stored = read(&dir.join("matrix_subjects.csv"))?;
    if stored != snap.analytics.subject_matrix.to_csv().as_bytes() {
        return Err(corrupt("matrix_subjects.csv", "does not match the topic assignment").into());
    }
    Ok(snap)
}

/// Loads and verifies a published run. `path` is the run directory or its
/// `manifest.json`.
pub fn load_run(path: &Path) -> Result<RunSnapshot> {
    let (dir, manifest_path) = if path.is_dir() {
        (path.to_path_buf(), path.join("manifest.json"))
    } else {
        (path.parent().unwrap_or(Path::new(".")).to_path_buf(), path.to_path_buf())
    };
    let raw = read(&manifest_path)?;
    #[derive(Deserialize)]
    struct Version {
        schema_version: u32,
    }
    let v: Version = serde_json::from_slice(&raw).map_err(|e| corrupt("manifest.json", e))?;
    if v.schema_version != SCHEMA_VERSION {
        return Err(RunStoreError::SchemaVersionUnsupported { found: v.schema_version }.into());
    }
    let manifest: RunManifest = serde_json::from_slice(&raw).map_err(|e| corrupt("manifest.json", e))?;
    for a in &manifest.artifacts {
        let p = dir.join(&a.path);
        let bytes = fs::read(&p).map_err(|_| RunStoreError::ChecksumMismatch { path: a.path.clone() })?;
        if bytes.len() as u64 != a.bytes || sha256_hex(&bytes) != a.sha256 {
            return Err(RunStoreError::ChecksumMismatch { path: a.path.clone() }.into());
        }
    }
    let mut snap = assemble_snapshot(&dir, manifest.run_id.clone(), manifest.config.clone())?;
    snap.manifest = Some(manifest);
    Ok(snap)
}

/// Writes the static dashboard bundle (one JSON file per API response).
/// Re-exporting the same snapshot produces byte-identical files.
pub fn export_dashboard_bundle(snapshot: &RunSnapshot, path: &Path) -> Result<Vec<String>> {
    if snapshot.catalog.is_empty() {
        return Err(RunStoreError::EmptyRun.into());
    }
    Ok(crate::service::bundle::write_bundle(snapshot, path)?)
}

/// Convenience for callers that hold an in-memory analysis: stage it in a
/// scratch working directory under `out_root` and publish.
pub fn publish_analysis(
    out_root: &Path,
    catalog: &FrameworkCatalog,
    programs_toml: &str,
    cfg: &PipelineConfig,
    embeddings_path: Option<&Path>,
    labels_csv: Option<&[u8]>,
) -> Result<RunManifest> {
    let scratch = out_root.join(format!(".work-{}", std::process::id()));
    let wd = Workdir::new(&scratch);
    let result = run_all(&wd, catalog, programs_toml, cfg, embeddings_path, labels_csv)
        .and_then(|()| publish_run(&wd, out_root));
    let _ = fs::remove_dir_all(&scratch);
    result
}
