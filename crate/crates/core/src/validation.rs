//! Agreement of detected matches with the framework hierarchy and with
//! expert-labeled pairs.
//!
//! Framework consistency is LO-level: an outcome is consistent when at least
//! one of its matches sits in the same group (standard key, or subject plus
//! strand label). Outcomes whose group has a single member cannot be
//! consistent and are left out of the denominator.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use crate::alignment::MatchSet;
use crate::catalog::FrameworkCatalog;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("strand labels are empty; strand-level consistency is unavailable")]
    MissingStrandLabels,
    #[error("unknown LO code `{0}`")]
    UnknownCode(String),
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("row {row}: duplicate pair {a} / {b}")]
    DuplicatePair { row: usize, a: String, b: String },
    #[error("row {row}: label must be `related` or `unrelated`, got `{value}`")]
    BadLabel { row: usize, value: String },
    #[error("label file: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ConsistencyLevel {
    Standard,
    Strand,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SubjectConsistency {
    pub n_eligible: usize,
    pub n_consistent: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub level: ConsistencyLevel,
    pub n_eligible: usize,
    pub n_consistent: usize,
    pub accuracy: f64,
    pub per_subject: BTreeMap<String, SubjectConsistency>,
    pub definition: &'static str,
}

const CONSISTENCY_DEFINITION: &str = "accuracy = n_consistent / n_eligible; an LO is eligible when its \
     group (standard key or subject+strand) has at least 2 LOs, and consistent when at least one \
     LO sharing its topic belongs to the same group";

fn group_keys(catalog: &FrameworkCatalog, level: ConsistencyLevel) -> Result<Vec<String>, ValidationError> {
    match level {
        ConsistencyLevel::Standard => Ok(catalog.los().iter().map(|lo| lo.standard_key.clone()).collect()),
        ConsistencyLevel::Strand => {
            if !catalog.is_empty() && catalog.los().iter().all(|lo| lo.strand_label.is_empty()) {
                return Err(ValidationError::MissingStrandLabels);
            }
            Ok(catalog
                .los()
                .iter()
                .map(|lo| format!("{}\u{1f}{}", lo.subject, lo.strand_label))
                .collect())
        }
    }
}

pub fn framework_consistency(
    ms: &MatchSet,
    catalog: &FrameworkCatalog,
    level: ConsistencyLevel,
) -> Result<ConsistencyReport, ValidationError> {
    let keys = group_keys(catalog, level)?;
    let mut group_size: HashMap<&str, usize> = HashMap::new();
    let mut group_topic: HashMap<(&str, i32), usize> = HashMap::new();
    for (i, key) in keys.iter().enumerate() {
        *group_size.entry(key).or_insert(0) += 1;
        if ms.topic(i) >= 0 {
            *group_topic.entry((key, ms.topic(i))).or_insert(0) += 1;
        }
    }
    let mut per_subject: BTreeMap<String, SubjectConsistency> = BTreeMap::new();
    let (mut n_eligible, mut n_consistent) = (0, 0);
    for (i, lo) in catalog.los().iter().enumerate() {
        let key = keys[i].as_str();
        // unlabeled strands form no group
        if level == ConsistencyLevel::Strand && lo.strand_label.is_empty() {
            continue;
        }
        if group_size[key] < 2 {
            continue;
        }
        let t = ms.topic(i);
        let consistent = t >= 0 && group_topic[&(key, t)] >= 2;
        let entry = per_subject.entry(lo.subject.clone()).or_default();
        entry.n_eligible += 1;
        n_eligible += 1;
        if consistent {
            entry.n_consistent += 1;
            n_consistent += 1;
        }
    }
    Ok(ConsistencyReport {
        level,
        n_eligible,
        n_consistent,
        accuracy: if n_eligible == 0 { 0.0 } else { n_consistent as f64 / n_eligible as f64 },
        per_subject,
        definition: CONSISTENCY_DEFINITION,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledPair {
    pub code_a: String,
    pub code_b: String,
    pub related: bool,
    pub rater: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LabeledPairSet {
    pub rows: Vec<LabeledPair>,
}

impl LabeledPairSet {
    pub fn new(rows: Vec<LabeledPair>) -> Result<Self, ValidationError> {
        let mut seen = HashSet::new();
        for (i, r) in rows.iter().enumerate() {
            let key = if r.code_a <= r.code_b {
                (r.code_a.as_str(), r.code_b.as_str())
            } else {
                (r.code_b.as_str(), r.code_a.as_str())
            };
            if !seen.insert(key) {
                return Err(ValidationError::DuplicatePair {
                    row: i + 1,
                    a: r.code_a.clone(),
                    b: r.code_b.clone(),
                });
            }
        }
        Ok(LabeledPairSet { rows })
    }

    /// Reads `code_a,code_b,label[,rater]` with a header row.
    pub fn from_csv<R: Read>(src: R) -> Result<Self, ValidationError> {
        let csv_err = |e: csv::Error| ValidationError::Csv(e.to_string());
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(src);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| ValidationError::Csv(format!("missing column `{name}`")))
        };
        let (ca, cb, cl) = (col("code_a")?, col("code_b")?, col("label")?);
        let cr = headers.iter().position(|h| h.trim() == "rater");
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let get = |c: usize| rec.get(c).unwrap_or("").trim().to_string();
            let label = get(cl);
            let related = match label.to_ascii_lowercase().as_str() {
                "related" | "1" | "true" | "yes" => true,
                "unrelated" | "non-related" | "0" | "false" | "no" => false,
                _ => return Err(ValidationError::BadLabel { row: i + 1, value: label }),
            };
            rows.push(LabeledPair {
                code_a: get(ca),
                code_b: get(cb),
                related,
                rater: cr.map(get).filter(|r| !r.is_empty()),
            });
        }
        LabeledPairSet::new(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEvalReport {
    pub n_pairs: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

/// Scores "same non-outlier topic" as the prediction for each labeled pair.
pub fn expert_eval(
    ms: &MatchSet,
    catalog: &FrameworkCatalog,
    labels: &LabeledPairSet,
) -> Result<PairEvalReport, ValidationError> {
    if labels.rows.is_empty() {
        return Err(ValidationError::EmptyLabelSet);
    }
    let idx = |code: &str| {
        catalog
            .index_of(code)
            .ok_or_else(|| ValidationError::UnknownCode(code.to_string()))
    };
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for row in &labels.rows {
        let (a, b) = (idx(&row.code_a)?, idx(&row.code_b)?);
        let predicted = ms.is_match(a, b);
        match (predicted, row.related) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let n_pairs = labels.rows.len();
    Ok(PairEvalReport {
        n_pairs,
        n_correct: tp + tn,
        accuracy: (tp + tn) as f64 / n_pairs as f64,
        tp,
        fp,
        tn,
        fn_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::build_matches;
    use crate::catalog::{FrameworkCatalog, LearningOutcome, Stream, SubjectType};
    use crate::topics::TopicAssignment;
    use proptest::prelude::*;

    fn lo(code: &str, strand: &str) -> LearningOutcome {
        LearningOutcome {
            code: code.into(),
            text: "t".into(),
            subject: code.split('.').next().unwrap().into(),
            subject_name: String::new(),
            subject_type: SubjectType::Unspecified,
            grade: 1,
            stream: Stream::Unspecified,
            cycle: None,
            domain_label: String::new(),
            strand_label: strand.into(),
            standard_label: String::new(),
            standard_key: String::new(),
        }
    }

    fn setup(rows: &[(&str, i32)]) -> (FrameworkCatalog, MatchSet) {
        let cat = FrameworkCatalog::from_los(rows.iter().map(|r| lo(r.0, "")).collect()).unwrap();
        let asg = TopicAssignment::from_labels(
            rows.iter().map(|r| r.0.to_string()).collect(),
            rows.iter().map(|r| r.1).collect(),
        );
        let ms = build_matches(&asg, &cat).unwrap();
        (cat, ms)
    }

    #[test]
    fn perfect_and_outlier_extremes() {
        let (cat, ms) = setup(&[("A.1.1", 0), ("A.1.2", 0), ("A.2.1", 1), ("A.2.2", 1), ("A.3.1", 2)]);
        let r = framework_consistency(&ms, &cat, ConsistencyLevel::Standard).unwrap();
        assert_eq!((r.n_eligible, r.n_consistent, r.accuracy), (4, 4, 1.0));

        let (cat, ms) = setup(&[("A.1.1", -1), ("A.1.2", -1), ("A.2.1", -1), ("A.2.2", -1), ("A.3.1", -1)]);
        let r = framework_consistency(&ms, &cat, ConsistencyLevel::Standard).unwrap();
        assert_eq!((r.n_eligible, r.n_consistent, r.accuracy), (4, 0, 0.0));
    }

    #[test]
    fn strand_level_needs_labels() {
        let (cat, ms) = setup(&[("A.1.1", 0), ("A.1.2", 0)]);
        assert_eq!(
            framework_consistency(&ms, &cat, ConsistencyLevel::Strand),
            Err(ValidationError::MissingStrandLabels)
        );
        let cat = FrameworkCatalog::from_los(vec![lo("A.1.1", "s1"), lo("A.2.1", "s1"), lo("A.3.1", "s2")]).unwrap();
        let asg = TopicAssignment::from_labels(vec!["A.1.1".into(), "A.2.1".into(), "A.3.1".into()], vec![0, 0, 0]);
        let ms = build_matches(&asg, &cat).unwrap();
        let r = framework_consistency(&ms, &cat, ConsistencyLevel::Strand).unwrap();
        assert_eq!((r.n_eligible, r.n_consistent), (2, 2));
        let r = framework_consistency(&ms, &cat, ConsistencyLevel::Standard).unwrap();
        assert_eq!(r.n_eligible, 0);
    }

    #[test]
    fn expert_eval_counts() {
        let (cat, ms) = setup(&[("A.1.1", 0), ("A.1.2", 0), ("B.1.1", 1), ("B.1.2", -1)]);
        let labels = LabeledPairSet::from_csv(
            "code_a,code_b,label,rater\nA.1.1,A.1.2,related,r1\nA.1.1,B.1.1,unrelated,\nB.1.1,B.1.2,related,r2\nA.1.2,B.1.1,related,\n"
                .as_bytes(),
        )
        .unwrap();
        let r = expert_eval(&ms, &cat, &labels).unwrap();
        assert_eq!((r.tp, r.fp, r.tn, r.fn_), (1, 0, 1, 2));
        assert_eq!(r.accuracy, 0.5);

        let exact = LabeledPairSet::new(vec![
            LabeledPair { code_a: "A.1.1".into(), code_b: "A.1.2".into(), related: true, rater: None },
            LabeledPair { code_a: "A.1.1".into(), code_b: "B.1.2".into(), related: false, rater: None },
        ])
        .unwrap();
        let r = expert_eval(&ms, &cat, &exact).unwrap();
        assert_eq!((r.accuracy, r.fp, r.fn_), (1.0, 0, 0));

        assert_eq!(
            expert_eval(&ms, &cat, &LabeledPairSet::default()),
            Err(ValidationError::EmptyLabelSet)
        );
        let unknown = LabeledPairSet::new(vec![LabeledPair {
            code_a: "Z.1.1".into(),
            code_b: "A.1.1".into(),
            related: true,
            rater: None,
        }])
        .unwrap();
        assert_eq!(expert_eval(&ms, &cat, &unknown), Err(ValidationError::UnknownCode("Z.1.1".into())));
    }

    #[test]
    fn expert_accuracy_at_scale() {
        // 40 outcomes alternating between two topics; 570 labeled pairs of
        // which the first 400 agree with the topic prediction
        let rows: Vec<(String, u8, i32)> = (0..40).map(|i| (format!("A.1.{i:02}"), 1, i % 2)).collect();
        let cat = FrameworkCatalog::from_los(rows.iter().map(|r| crate::alignment::test_support::lo(&r.0, r.1)).collect())
            .unwrap();
        let asg = TopicAssignment::from_labels(rows.iter().map(|r| r.0.clone()).collect(), rows.iter().map(|r| r.2).collect());
        let ms = build_matches(&asg, &cat).unwrap();
        let pairs: Vec<(usize, usize)> = (0..40).flat_map(|i| (i + 1..40).map(move |j| (i, j))).take(570).collect();
        let labeled = pairs
            .iter()
            .enumerate()
            .map(|(n, &(i, j))| LabeledPair {
                code_a: rows[i].0.clone(),
                code_b: rows[j].0.clone(),
                related: (rows[i].2 == rows[j].2) == (n < 400),
                rater: None,
            })
            .collect();
        let r = expert_eval(&ms, &cat, &LabeledPairSet::new(labeled).unwrap()).unwrap();
        assert_eq!((r.n_pairs, r.n_correct), (570, 400));
        assert_eq!(r.tp + r.fp + r.tn + r.fn_, 570);
        assert_eq!(format!("{:.4}", r.accuracy), "0.7018");
    }

    #[test]
    fn duplicate_unordered_pairs_rejected() {
        let err = LabeledPairSet::from_csv("code_a,code_b,label\nA.1.1,A.1.2,related\nA.1.2,A.1.1,unrelated\n".as_bytes());
        assert!(matches!(err, Err(ValidationError::DuplicatePair { row: 2, .. })));
    }

    fn brute_force(cat: &FrameworkCatalog, ms: &MatchSet) -> (usize, usize) {
        let n = cat.len();
        let (mut elig, mut cons) = (0, 0);
        for i in 0..n {
            let key = &cat.los()[i].standard_key;
            let peers = (0..n).filter(|&j| j != i && &cat.los()[j].standard_key == key).count();
            if peers == 0 {
                continue;
            }
            elig += 1;
            if (0..n).any(|j| ms.is_match(i, j) && &cat.los()[j].standard_key == key) {
                cons += 1;
            }
        }
        (elig, cons)
    }

    proptest! {
        #[test]
        fn merging_topics_never_lowers_consistency(
            rows in prop::collection::vec((0u8..6, -1i32..5), 1..60),
            merge in (0i32..5, 0i32..5),
        ) {
            let codes: Vec<String> = rows.iter().enumerate().map(|(i, (s, _))| format!("A.{s}.{i}")).collect();
            let pairs: Vec<(&str, i32)> = codes.iter().zip(&rows).map(|(c, (_, t))| (c.as_str(), *t)).collect();
            let (cat, ms) = setup(&pairs);
            let before = framework_consistency(&ms, &cat, ConsistencyLevel::Standard).unwrap();
            prop_assert_eq!((before.n_eligible, before.n_consistent), brute_force(&cat, &ms));

            let merged: Vec<(&str, i32)> = pairs.iter()
                .map(|&(c, t)| (c, if t == merge.1 { merge.0 } else { t }))
                .collect();
            let (cat2, ms2) = setup(&merged);
            let after = framework_consistency(&ms2, &cat2, ConsistencyLevel::Standard).unwrap();
            prop_assert_eq!(after.n_eligible, before.n_eligible);
            prop_assert!(after.n_consistent >= before.n_consistent);
        }

        #[test]
        fn confusion_sums(labels in prop::collection::vec((0usize..8, 0usize..8, any::<bool>()), 1..30)) {
            let codes: Vec<String> = (0..8).map(|i| format!("A.1.{i}")).collect();
            let pairs: Vec<(&str, i32)> = codes.iter().enumerate().map(|(i, c)| (c.as_str(), (i % 3) as i32 - 1)).collect();
            let (cat, ms) = setup(&pairs);
            let mut seen = HashSet::new();
            let rows: Vec<LabeledPair> = labels.into_iter()
                .filter(|(a, b, _)| seen.insert((*a.min(b), *a.max(b))))
                .map(|(a, b, r)| LabeledPair { code_a: codes[a].clone(), code_b: codes[b].clone(), related: r, rater: None })
                .collect();
            let set = LabeledPairSet::new(rows).unwrap();
            let r = expert_eval(&ms, &cat, &set).unwrap();
            prop_assert_eq!(r.tp + r.fp + r.tn + r.fn_, r.n_pairs);
            prop_assert!((r.accuracy - (r.tp + r.tn) as f64 / r.n_pairs as f64).abs() < 1e-15);
        }
    }
}
