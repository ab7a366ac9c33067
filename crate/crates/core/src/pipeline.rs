//! Stage functions and the one-shot pipeline.
//!
//! Every stage is a pure function of its inputs and the [`PipelineConfig`];
//! the staged CLI persists the intermediate results between calls through
//! [`crate::runstore::Workdir`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alignment::{
    build_matches, cross_subject_topics, hclust_subjects, spirality_report, subject_matrix,
    topic_distribution, AlignError, AlignmentMatrix, CrossTopic, Dendrogram, MatchOptions,
    MatchSet, Program, ProgramEntry, Scope, SpiralEntry, TopicDistribution,
};
use crate::catalog::FrameworkCatalog;
use crate::embed::{embed_batch, EmbeddingSet, ProviderConfig, DEFAULT_DIM};
use crate::textprep::{default_stopwords, tokenize_catalog, TokenizedDoc, STOPWORDS_EN_VERSION};
use crate::topics::{
    ctfidf_keywords, fit_topic_model, TopicAssignment, TopicConfig, TopicError, TopicKeywords,
    TopicModel,
};
use crate::validation::{
    expert_eval, framework_consistency, ConsistencyLevel, ConsistencyReport, LabeledPairSet,
    PairEvalReport, ValidationError,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    /// Seeded feature hashing; needs nothing but the text.
    Hash,
    /// Vectors read from a cache file keyed by LO code.
    File,
}

/// Everything that influences results. Serialized into the run manifest and
/// hashed into the run id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub embedder: EmbedderKind,
    pub dim: usize,
    pub embed_seed: u64,
    pub stopwords: String,
    pub topics: TopicConfig,
    pub top_k_keywords: usize,
    pub min_cross_subjects: usize,
    pub exclude_same_standard: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            embedder: EmbedderKind::Hash,
            dim: DEFAULT_DIM,
            embed_seed: 0,
            stopwords: STOPWORDS_EN_VERSION.to_string(),
            topics: TopicConfig::default(),
            top_k_keywords: 10,
            min_cross_subjects: 4,
            exclude_same_standard: false,
        }
    }
}

impl PipelineConfig {
    /// Default configuration with one seed for both embedding and clustering.
    pub fn seeded(seed: u64) -> Self {
        let mut cfg = PipelineConfig::default();
        cfg.set_seed(seed);
        cfg
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.embed_seed = seed;
        self.topics.kmeans.seed = seed;
    }

    pub fn match_options(&self) -> MatchOptions {
        MatchOptions {
            exclude_same_standard: self.exclude_same_standard,
        }
    }

    pub fn provider(&self, embeddings_path: Option<&Path>) -> Result<ProviderConfig> {
        match self.embedder {
            EmbedderKind::Hash => Ok(ProviderConfig::hash(self.dim, self.embed_seed)),
            EmbedderKind::File => embeddings_path
                .map(|p| ProviderConfig::precomputed(p, self.dim))
                .ok_or_else(|| Error::Config("the file embedder needs an embeddings path".into())),
        }
    }

    fn stopword_language(&self) -> &str {
        // versioned tags look like `en-v1`
        self.stopwords.split('-').next().unwrap_or_default()
    }
}

pub fn prepare_docs(catalog: &FrameworkCatalog, cfg: &PipelineConfig) -> Result<Vec<TokenizedDoc>> {
    if cfg.stopwords != STOPWORDS_EN_VERSION {
        return Err(Error::Config(format!(
            "unknown stop-word list `{}` (available: {STOPWORDS_EN_VERSION})",
            cfg.stopwords
        )));
    }
    let sw = default_stopwords(cfg.stopword_language())?;
    Ok(tokenize_catalog(catalog, &sw))
}

pub fn embed_catalog(
    catalog: &FrameworkCatalog,
    cfg: &PipelineConfig,
    embeddings_path: Option<&Path>,
) -> Result<(Vec<TokenizedDoc>, EmbeddingSet)> {
    let docs = prepare_docs(catalog, cfg)?;
    let emb = embed_batch(&docs, &cfg.provider(embeddings_path)?)?;
    Ok((docs, emb))
}

/// Topic model plus keywords. A model without any non-outlier topic gets an
/// empty keyword table rather than an error.
pub fn fit_topics(
    emb: &EmbeddingSet,
    docs: &[TokenizedDoc],
    cfg: &PipelineConfig,
) -> Result<(TopicModel, TopicKeywords)> {
    let model = fit_topic_model(emb, &cfg.topics)?;
    let keywords = match ctfidf_keywords(&model.assignment, docs, cfg.top_k_keywords) {
        Ok(k) => k,
        Err(TopicError::NoTopics) => TopicKeywords::default(),
        Err(e) => return Err(e.into()),
    };
    Ok((model, keywords))
}

/// Curriculum analytics over one topic assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Analytics {
    pub matches: MatchSet,
    pub subject_matrix: AlignmentMatrix,
    /// `None` for single-subject catalogs.
    pub dendrogram: Option<Dendrogram>,
    pub distribution: TopicDistribution,
    pub cross_topics: Vec<CrossTopic>,
    pub spirality: BTreeMap<String, Vec<SpiralEntry>>,
}

pub fn analyze(
    catalog: &FrameworkCatalog,
    assignment: &TopicAssignment,
    keywords: &TopicKeywords,
    cfg: &PipelineConfig,
) -> Result<Analytics> {
    let matches = build_matches(assignment, catalog)?;
    let matrix = subject_matrix(&matches, catalog, &Scope::all(), cfg.match_options())?;
    let dendrogram = match hclust_subjects(&matrix) {
        Ok(d) => Some(d),
        Err(AlignError::TooFewSubjects(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let distribution = topic_distribution(&matches, catalog, keywords);
    let cross_topics = cross_subject_topics(&distribution, cfg.min_cross_subjects);
    let spirality = catalog
        .subjects()
        .map(|s| Ok((s.to_string(), spirality_report(&distribution, catalog, s)?)))
        .collect::<Result<_, AlignError>>()?;
    Ok(Analytics {
        matches,
        subject_matrix: matrix,
        dendrogram,
        distribution,
        cross_topics,
        spirality,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReports {
    pub standard: ConsistencyReport,
    /// `None` when the catalog carries no strand labels.
    pub strand: Option<ConsistencyReport>,
    pub expert: Option<PairEvalReport>,
}

pub fn validate(
    catalog: &FrameworkCatalog,
    matches: &MatchSet,
    labels: Option<&LabeledPairSet>,
) -> Result<ValidationReports> {
    let standard = framework_consistency(matches, catalog, ConsistencyLevel::Standard)?;
    let strand = match framework_consistency(matches, catalog, ConsistencyLevel::Strand) {
        Ok(r) => Some(r),
        Err(ValidationError::MissingStrandLabels) => None,
        Err(e) => return Err(e.into()),
    };
    let expert = labels.map(|l| expert_eval(matches, catalog, l)).transpose()?;
    Ok(ValidationReports {
        standard,
        strand,
        expert,
    })
}

/// Results of every stage.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub catalog: FrameworkCatalog,
    pub docs: Vec<TokenizedDoc>,
    pub embeddings: EmbeddingSet,
    pub model: TopicModel,
    pub keywords: TopicKeywords,
    pub analytics: Analytics,
    pub validation: ValidationReports,
}

pub fn run_pipeline(
    catalog: FrameworkCatalog,
    cfg: &PipelineConfig,
    embeddings_path: Option<&Path>,
    labels: Option<&LabeledPairSet>,
) -> Result<Analysis> {
    let (docs, embeddings) = embed_catalog(&catalog, cfg, embeddings_path)?;
    let (model, keywords) = fit_topics(&embeddings, &docs, cfg)?;
    let analytics = analyze(&catalog, &model.assignment, &keywords, cfg)?;
    let validation = validate(&catalog, &analytics.matches, labels)?;
    Ok(Analysis {
        catalog,
        docs,
        embeddings,
        model,
        keywords,
        analytics,
        validation,
    })
}

/// Parses named programs:
///
/// ```toml
/// [programs.sciences]
/// BIO = "9-12"
/// SCI = "1-8"
/// PHY = 11
/// ```
///
/// Program names are restricted to `[A-Za-z0-9_-]` so they can appear in
/// URLs and file names unescaped.
pub fn parse_programs(src: &str) -> Result<BTreeMap<String, Program>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct File {
        #[serde(default)]
        programs: BTreeMap<String, BTreeMap<String, toml::Value>>,
    }
    let bad = |msg: String| Error::Config(format!("programs: {msg}"));
    let file: File = toml::from_str(src).map_err(|e| bad(e.to_string()))?;
    let mut out = BTreeMap::new();
    for (name, subjects) in file.programs {
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(bad(format!("invalid program name `{name}`")));
        }
        let mut entries = Vec::new();
        for (subject, value) in subjects {
            let grades = match &value {
                toml::Value::Integer(g) => parse_grade(&g.to_string()).map(|g| g..=g),
                toml::Value::String(s) => parse_grade_range(s),
                _ => None,
            }
            .ok_or_else(|| bad(format!("{name}.{subject}: expected a grade or \"lo-hi\", got {value}")))?;
            entries.push(ProgramEntry { subject, grades });
        }
        out.insert(name.clone(), Program { name, entries });
    }
    Ok(out)
}

fn parse_grade(s: &str) -> Option<u8> {
    s.trim().parse().ok().filter(|g| (1..=12).contains(g))
}

fn parse_grade_range(s: &str) -> Option<std::ops::RangeInclusive<u8>> {
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (parse_grade(a)?, parse_grade(b)?),
        None => {
            let g = parse_grade(s)?;
            (g, g)
        }
    };
    (lo <= hi).then_some(lo..=hi)
}
