//! Matched LO pairs and the curriculum analytics derived from them.
//!
//! Two outcomes match iff they share a non-outlier topic. Matches are kept
//! as topic → member lists; pairs are only materialized on demand.

mod dendrogram;
mod distribution;
mod matrix;
mod pairs;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::catalog::FrameworkCatalog;
use crate::topics::TopicAssignment;

pub use dendrogram::{hclust_subjects, subject_distance, Dendrogram, Merge};
pub use distribution::{
    cross_subject_topics, spirality_report, topic_distribution, CrossTopic, SpiralEntry,
    TopicDistribution,
};
pub use matrix::{grade_matrix, subject_matrix, AlignmentMatrix, MatchOptions, Pct, Program, ProgramEntry, Scope};
pub(crate) use matrix::csv_field;
pub use pairs::{lo_pairs, shared_topics, LoPair, SharedTopic};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlignError {
    #[error("LO `{0}` has no topic assignment")]
    CoverageGap(String),
    #[error("no subjects in scope")]
    EmptyScope,
    #[error("unknown subject `{0}`")]
    UnknownSubject(String),
    #[error("need at least 2 subjects to cluster, got {0}")]
    TooFewSubjects(usize),
}

/// Topic membership over one catalog. Indices refer to `catalog.los()`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    codes: Vec<String>,
    topic: Vec<i32>,
    members: BTreeMap<i32, Vec<usize>>,
}

impl MatchSet {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Topic of catalog entry `i` (`-1` for outliers).
    pub fn topic(&self, i: usize) -> i32 {
        self.topic[i]
    }

    pub fn topics(&self) -> &[i32] {
        &self.topic
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = i32> + '_ {
        self.members.keys().copied()
    }

    pub fn members(&self, topic: i32) -> &[usize] {
        self.members.get(&topic).map_or(&[], Vec::as_slice)
    }

    /// Catalog indices matched with entry `i`, ascending, never `i` itself.
    pub fn matches_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let t = self.topic[i];
        let members: &[usize] = if t >= 0 { self.members(t) } else { &[] };
        members.iter().copied().filter(move |&j| j != i)
    }

    pub fn is_match(&self, i: usize, j: usize) -> bool {
        i != j && self.topic[i] >= 0 && self.topic[i] == self.topic[j]
    }

    pub fn code(&self, i: usize) -> &str {
        &self.codes[i]
    }
}

pub fn build_matches(
    assignment: &TopicAssignment,
    catalog: &FrameworkCatalog,
) -> Result<MatchSet, AlignError> {
    let mut topic = Vec::with_capacity(catalog.len());
    let mut members: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, lo) in catalog.los().iter().enumerate() {
        let t = assignment
            .topic_of(&lo.code)
            .ok_or_else(|| AlignError::CoverageGap(lo.code.clone()))?;
        if t >= 0 {
            members.entry(t).or_default().push(i);
        }
        topic.push(t);
    }
    Ok(MatchSet {
        codes: catalog.los().iter().map(|lo| lo.code.clone()).collect(),
        topic,
        members,
    })
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::catalog::{FrameworkCatalog, LearningOutcome, Stream, SubjectType};
    use crate::topics::TopicAssignment;

    pub fn lo(code: &str, grade: u8) -> LearningOutcome {
        LearningOutcome {
            code: code.into(),
            text: format!("text of {code}"),
            subject: code.split('.').next().unwrap().into(),
            subject_name: String::new(),
            subject_type: SubjectType::Unspecified,
            grade,
            stream: Stream::Unspecified,
            cycle: None,
            domain_label: String::new(),
            strand_label: String::new(),
            standard_label: String::new(),
            standard_key: String::new(),
        }
    }

    /// (code, grade, topic) triples → catalog + assignment.
    pub fn fixture(rows: &[(&str, u8, i32)]) -> (FrameworkCatalog, TopicAssignment) {
        let cat = FrameworkCatalog::from_los(rows.iter().map(|r| lo(r.0, r.1)).collect()).unwrap();
        let asg = TopicAssignment::from_labels(
            rows.iter().map(|r| r.0.to_string()).collect(),
            rows.iter().map(|r| r.2).collect(),
        );
        (cat, asg)
    }
}
