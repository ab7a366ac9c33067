//! Class-based TF-IDF topic labels.
//!
//! All member documents of a topic are pooled into one class. A term's weight
//! in class `c` is `tf(t,c) * ln(1 + A / f(t))` where `tf` is the in-class
//! count, `f` the count over all classes and `A` the mean token count per
//! class. Outlier documents form no class.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{TopicAssignment, TopicError};
use crate::textprep::TokenizedDoc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordScore {
    pub term: String,
    pub score: f64,
}

/// Top terms per topic, best first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopicKeywords {
    pub topics: BTreeMap<i32, Vec<KeywordScore>>,
}

impl TopicKeywords {
    pub fn terms(&self, topic: i32) -> Vec<&str> {
        self.topics
            .get(&topic)
            .map(|v| v.iter().map(|k| k.term.as_str()).collect())
            .unwrap_or_default()
    }

    /// Short display label from the first `n` terms.
    pub fn label(&self, topic: i32, n: usize) -> String {
        self.terms(topic).into_iter().take(n).collect::<Vec<_>>().join(", ")
    }
}

/// Per-class term counts (`BTreeMap` so iteration order is fixed).
fn class_term_counts(
    assignment: &TopicAssignment,
    docs: &[TokenizedDoc],
) -> BTreeMap<i32, BTreeMap<String, u64>> {
    let mut classes: BTreeMap<i32, BTreeMap<String, u64>> = BTreeMap::new();
    for t in assignment.topic_ids() {
        classes.entry(t).or_default();
    }
    for doc in docs {
        let Some(topic) = assignment.topic_of(&doc.lo_code) else {
            continue;
        };
        if topic < 0 {
            continue;
        }
        let counts = classes.entry(topic).or_default();
        for tok in &doc.tokens {
            *counts.entry(tok.clone()).or_insert(0) += 1;
        }
    }
    classes
}

pub fn ctfidf_keywords(
    assignment: &TopicAssignment,
    docs: &[TokenizedDoc],
    top_k: usize,
) -> Result<TopicKeywords, TopicError> {
    let classes = class_term_counts(assignment, docs);
    if classes.is_empty() {
        return Err(TopicError::NoTopics);
    }
    let mut total_freq: HashMap<&str, u64> = HashMap::new();
    let mut total_tokens = 0u64;
    for counts in classes.values() {
        for (term, &c) in counts {
            *total_freq.entry(term.as_str()).or_insert(0) += c;
            total_tokens += c;
        }
    }
    let avg = total_tokens as f64 / classes.len() as f64;

    let mut out = TopicKeywords::default();
    for (&topic, counts) in &classes {
        let mut scored: Vec<KeywordScore> = counts
            .iter()
            .map(|(term, &tf)| {
                let f = total_freq[term.as_str()] as f64;
                KeywordScore {
                    term: term.clone(),
                    score: tf as f64 * (1.0 + avg / f).ln(),
                }
            })
            .collect();
        scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.term.cmp(&b.term)));
        scored.truncate(top_k);
        out.topics.insert(topic, scored);
    }
    Ok(out)
}
