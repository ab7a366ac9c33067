use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{AlignError, MatchSet};
use crate::catalog::FrameworkCatalog;
use crate::topics::TopicKeywords;

/// LO counts per topic, subject and grade. Outliers are not counted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TopicDistribution {
    pub counts: BTreeMap<i32, BTreeMap<String, BTreeMap<u8, u32>>>,
    /// Top-3 keywords per topic, comma separated.
    pub labels: BTreeMap<i32, String>,
}

impl TopicDistribution {
    pub fn topic_size(&self, topic: i32) -> u32 {
        self.counts
            .get(&topic)
            .map_or(0, |s| s.values().flat_map(|g| g.values()).sum())
    }

    pub fn subject_support(&self, topic: i32) -> usize {
        self.counts.get(&topic).map_or(0, |s| {
            s.values().filter(|g| g.values().any(|&c| c > 0)).count()
        })
    }

    pub fn total(&self) -> u32 {
        self.counts.keys().map(|&t| self.topic_size(t)).sum()
    }

    /// Long-form CSV: `topic_id,keywords,subject,grade,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("topic_id,keywords,subject,grade,count\n");
        for (topic, subjects) in &self.counts {
            let label = super::matrix::csv_field(self.labels.get(topic).map_or("", String::as_str));
            for (subject, grades) in subjects {
                for (grade, count) in grades {
                    out.push_str(&format!(
                        "{topic},{label},{},{grade},{count}\n",
                        super::matrix::csv_field(subject)
                    ));
                }
            }
        }
        out
    }
}

pub fn topic_distribution(
    ms: &MatchSet,
    catalog: &FrameworkCatalog,
    keywords: &TopicKeywords,
) -> TopicDistribution {
    let mut dist = TopicDistribution::default();
    for (i, lo) in catalog.los().iter().enumerate() {
        let t = ms.topic(i);
        if t < 0 {
            continue;
        }
        *dist
            .counts
            .entry(t)
            .or_default()
            .entry(lo.subject.clone())
            .or_default()
            .entry(lo.grade)
            .or_insert(0) += 1;
    }
    for &t in dist.counts.keys() {
        dist.labels.insert(t, keywords.label(t, 3));
    }
    dist
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossTopic {
    pub topic: i32,
    pub support: usize,
    pub size: u32,
}

/// Topics present in at least `min_subjects` subjects, widest support first,
/// then larger topics, then lower id.
pub fn cross_subject_topics(dist: &TopicDistribution, min_subjects: usize) -> Vec<CrossTopic> {
    let mut out: Vec<CrossTopic> = dist
        .counts
        .keys()
        .map(|&topic| CrossTopic {
            topic,
            support: dist.subject_support(topic),
            size: dist.topic_size(topic),
        })
        .filter(|c| c.support >= min_subjects)
        .collect();
    out.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then(b.size.cmp(&a.size))
            .then(a.topic.cmp(&b.topic))
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpiralEntry {
    pub topic: i32,
    pub grades: Vec<u8>,
    /// Grades strictly between the first and last covered grade that the
    /// topic skips.
    pub gaps: Vec<u8>,
}

impl SpiralEntry {
    pub fn coverage(&self) -> usize {
        self.grades.len()
    }
}

/// Grade coverage of every topic that touches `subject`.
pub fn spirality_report(
    dist: &TopicDistribution,
    catalog: &FrameworkCatalog,
    subject: &str,
) -> Result<Vec<SpiralEntry>, AlignError> {
    if !catalog.has_subject(subject) {
        return Err(AlignError::UnknownSubject(subject.to_string()));
    }
    let mut out = Vec::new();
    for (&topic, subjects) in &dist.counts {
        let Some(grades) = subjects.get(subject) else {
            continue;
        };
        let present: BTreeSet<u8> = grades.iter().filter(|(_, &c)| c > 0).map(|(&g, _)| g).collect();
        let (Some(&lo), Some(&hi)) = (present.first(), present.last()) else {
            continue;
        };
        let gaps = (lo..=hi).filter(|g| !present.contains(g)).collect();
        out.push(SpiralEntry {
            topic,
            grades: present.into_iter().collect(),
            gaps,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::build_matches;
    use super::super::test_support::fixture;
    use super::*;

    #[test]
    fn counts_by_construction() {
        let (cat, asg) = fixture(&[
            ("A.1.1", 1, 0),
            ("A.1.2", 1, 0),
            ("A.1.3", 1, 0),
            ("B.1.1", 2, 0),
            ("B.1.2", 2, 0),
            ("B.1.3", 2, 0),
            ("B.1.4", 2, -1),
        ]);
        let ms = build_matches(&asg, &cat).unwrap();
        let d = topic_distribution(&ms, &cat, &TopicKeywords::default());
        assert_eq!(d.counts[&0]["A"][&1], 3);
        assert_eq!(d.counts[&0]["B"][&2], 3);
        assert_eq!(d.total(), 6);
        assert!(!d.counts.contains_key(&-1));
        assert_eq!(d.to_csv(), "topic_id,keywords,subject,grade,count\n0,,A,1,3\n0,,B,2,3\n");
    }

    #[test]
    fn cross_subject_boundary() {
        let mut rows = vec![];
        let codes: Vec<String> = (0..7).map(|i| format!("{}.1.{i}", ["A", "B", "C", "D"][i % 4])).collect();
        for c in &codes {
            rows.push((c.as_str(), 1u8, 0));
        }
        let codes3: Vec<String> = (0..3).map(|i| format!("{}.2.{i}", ["A", "B", "C"][i])).collect();
        for c in &codes3 {
            rows.push((c.as_str(), 1u8, 1));
        }
        let (cat, asg) = fixture(&rows);
        let ms = build_matches(&asg, &cat).unwrap();
        let d = topic_distribution(&ms, &cat, &TopicKeywords::default());
        let cross = cross_subject_topics(&d, 4);
        assert_eq!(cross, vec![CrossTopic { topic: 0, support: 4, size: 7 }]);
        assert_eq!(cross_subject_topics(&d, 3).len(), 2);
    }

    #[test]
    fn spiral_gaps() {
        let (cat, asg) = fixture(&[
            ("A.1.1", 3, 0),
            ("A.1.2", 4, 0),
            ("A.1.3", 6, 0),
            ("A.1.4", 9, 1),
            ("A.1.5", 9, 1),
            ("B.1.1", 2, 0),
        ]);
        let ms = build_matches(&asg, &cat).unwrap();
        let d = topic_distribution(&ms, &cat, &TopicKeywords::default());
        let r = spirality_report(&d, &cat, "A").unwrap();
        assert_eq!(r[0], SpiralEntry { topic: 0, grades: vec![3, 4, 6], gaps: vec![5] });
        assert_eq!(r[1], SpiralEntry { topic: 1, grades: vec![9], gaps: vec![] });
        assert_eq!(spirality_report(&d, &cat, "Z"), Err(AlignError::UnknownSubject("Z".into())));
    }
}
