//! Topic modeling: reduce the embeddings, cluster them, turn clusters into
//! topics (small clusters become the outlier topic `-1`) and label each topic
//! with c-TF-IDF keywords.

mod ctfidf;
mod kmeans;
mod pca;

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::EmbeddingSet;

pub use ctfidf::{ctfidf_keywords, KeywordScore, TopicKeywords};
pub use kmeans::{assign as nearest_centroids, kmeans_fit, KMeansParams, KMeansResult};
pub use pca::{fit_pca, inverse_transform, transform, PcaModel};

pub const OUTLIER: i32 = -1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopicError {
    #[error("input has zero variance")]
    DegenerateInput,
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("reduced dimension {d} out of range for {n} samples of dimension {dim}")]
    BadDimension { d: usize, n: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("k = {k} out of range for {n} points")]
    BadK { k: usize, n: usize },
    #[error("no non-outlier topics")]
    NoTopics,
}

/// Default topic count: roughly 18 outcomes per topic.
pub fn default_k(n: usize) -> usize {
    ((n as f64 / 18.0).round() as usize).max(1)
}

/// Maps raw cluster labels to topic ids. Clusters smaller than
/// `min_topic_size` become [`OUTLIER`]; the rest are renumbered `0..k'` by
/// decreasing size, ties to the lower original label.
///
/// Returns the per-point topic and, for each new topic id, its original label.
pub fn renumber_clusters(labels: &[usize], min_topic_size: usize) -> (Vec<i32>, Vec<usize>) {
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        *sizes.entry(l).or_insert(0) += 1;
    }
    let mut kept: Vec<(usize, usize)> = sizes
        .into_iter()
        .filter(|&(_, s)| s >= min_topic_size)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let remap: HashMap<usize, i32> = kept
        .iter()
        .enumerate()
        .map(|(new, &(old, _))| (old, new as i32))
        .collect();
    let topics = labels
        .iter()
        .map(|l| remap.get(l).copied().unwrap_or(OUTLIER))
        .collect();
    (topics, kept.into_iter().map(|(old, _)| old).collect())
}

/// Topic of every outcome, plus the clustering state that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicAssignment {
    ids: Vec<String>,
    topics: Vec<i32>,
    index: HashMap<String, usize>,
    members: BTreeMap<i32, Vec<usize>>,
    /// Centroids of the non-outlier topics in reduced space, by topic id.
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub seed: u64,
}

impl TopicAssignment {
    /// Builds an assignment from explicit topic ids (any negative id means
    /// outlier). No clustering metadata is attached.
    pub fn from_labels(ids: Vec<String>, topics: Vec<i32>) -> Self {
        assert_eq!(ids.len(), topics.len(), "one topic per id");
        let topics = topics.into_iter().map(|t| t.max(OUTLIER)).collect();
        let mut a = TopicAssignment {
            ids,
            topics,
            index: HashMap::new(),
            members: BTreeMap::new(),
            centroids: Vec::new(),
            inertia: 0.0,
            seed: 0,
        };
        a.reindex();
        a
    }

    fn reindex(&mut self) {
        self.index = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        self.members.clear();
        for (i, &t) in self.topics.iter().enumerate() {
            if t >= 0 {
                self.members.entry(t).or_default().push(i);
            }
        }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn topics(&self) -> &[i32] {
        &self.topics
    }

    pub fn topic_of(&self, code: &str) -> Option<i32> {
        self.index.get(code).map(|&i| self.topics[i])
    }

    /// Number of non-outlier topics.
    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = i32> + '_ {
        self.members.keys().copied()
    }

    /// Positions (into [`Self::ids`]) of a topic's members, ascending.
    pub fn members(&self, topic: i32) -> &[usize] {
        self.members.get(&topic).map_or(&[], Vec::as_slice)
    }

    pub fn outlier_count(&self) -> usize {
        self.topics.iter().filter(|&&t| t < 0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicConfig {
    pub reduced_dim: usize,
    /// `None` uses [`default_k`].
    pub k: Option<usize>,
    pub min_topic_size: usize,
    pub kmeans: KMeansParams,
}

impl Default for TopicConfig {
    fn default() -> Self {
        TopicConfig {
            reduced_dim: 5,
            k: None,
            min_topic_size: 2,
            kmeans: KMeansParams::default(),
        }
    }
}

/// Everything the topic stage produces.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub pca: Option<PcaModel>,
    pub effective_reduced_dim: usize,
    pub effective_k: usize,
    pub assignment: TopicAssignment,
    pub inertia_trace: Vec<f64>,
}

/// Reduces and clusters an embedding set. Zero-vector rows carry no content
/// and go straight to the outlier topic. The reduced dimension and k are
/// capped by the number of usable rows.
pub fn fit_topic_model(emb: &EmbeddingSet, cfg: &TopicConfig) -> Result<TopicModel, TopicError> {
    let usable: Vec<usize> = (0..emb.len()).filter(|&i| !emb.is_zero(i)).collect();
    let n = usable.len();
    let mut topics = vec![OUTLIER; emb.len()];
    let outliers_only = |inertia_trace| TopicModel {
        pca: None,
        effective_reduced_dim: 0,
        effective_k: 0,
        assignment: TopicAssignment::from_labels(emb.ids().to_vec(), vec![OUTLIER; emb.len()]),
        inertia_trace,
    };
    if n < 2 {
        return Ok(outliers_only(Vec::new()));
    }

    let x = DMatrix::from_fn(n, emb.dim(), |r, c| f64::from(emb.row(usable[r])[c]));
    let d = cfg.reduced_dim.min(n - 1).min(emb.dim()).max(1);
    let (pca, reduced) = match fit_pca(&x, d) {
        Ok(model) => {
            let y = transform(&model, &x)?;
            (Some(model), y)
        }
        // every usable row identical: one point cloud, nothing to reduce
        Err(TopicError::DegenerateInput) => (None, DMatrix::zeros(n, 1)),
        Err(e) => return Err(e),
    };
    let k = cfg.k.unwrap_or_else(|| default_k(n)).clamp(1, n);
    let km = kmeans_fit(&reduced, k, &cfg.kmeans)?;
    let (renumbered, originals) = renumber_clusters(&km.labels, cfg.min_topic_size);
    for (pos, &row) in usable.iter().enumerate() {
        topics[row] = renumbered[pos];
    }
    let mut assignment = TopicAssignment::from_labels(emb.ids().to_vec(), topics);
    assignment.centroids = originals.iter().map(|&o| km.centroids[o].clone()).collect();
    assignment.inertia = km.inertia;
    assignment.seed = cfg.kmeans.seed;
    log::debug!(
        "topics: n={n} d={} k={k} kept={} outliers={} inertia={}",
        reduced.ncols(),
        assignment.k(),
        assignment.outlier_count(),
        km.inertia
    );
    Ok(TopicModel {
        effective_reduced_dim: reduced.ncols(),
        pca,
        effective_k: k,
        assignment,
        inertia_trace: km.trace,
    })
}
