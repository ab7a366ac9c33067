//! Independent reference implementations shared by the integration tests.
//!
//! Everything here is written from the definitions, pair by pair, without
//! touching the library's indices or counting shortcuts.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use loalign::catalog::{FrameworkCatalog, LearningOutcome, Stream, SubjectType};
use loalign::synth::cycle_of;
use loalign::textprep::TokenizedDoc;
use loalign::topics::TopicAssignment;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adjusted Rand index between two labelings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[i64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut joint: HashMap<(usize, i64), u64> = HashMap::new();
    let mut ra: HashMap<usize, u64> = HashMap::new();
    let mut rb: HashMap<i64, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ra.entry(x).or_default() += 1;
        *rb.entry(y).or_default() += 1;
    }
    let c2 = |v: u64| (v * v.saturating_sub(1) / 2) as f64;
    let index: f64 = joint.values().map(|&v| c2(v)).sum();
    let sa: f64 = ra.values().map(|&v| c2(v)).sum();
    let sb: f64 = rb.values().map(|&v| c2(v)).sum();
    let expected = sa * sb / c2(a.len() as u64);
    let max = (sa + sb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

fn topic_of(asg: &TopicAssignment, lo: &LearningOutcome) -> i32 {
    asg.topic_of(&lo.code).expect("assignment covers catalog")
}

/// Does `x` share a (non-outlier) topic with some other outcome satisfying `pred`?
fn matches_any(
    catalog: &FrameworkCatalog,
    asg: &TopicAssignment,
    x: usize,
    exclude_same_standard: bool,
    pred: impl Fn(&LearningOutcome) -> bool,
) -> bool {
    let los = catalog.los();
    let tx = topic_of(asg, &los[x]);
    if tx < 0 {
        return false;
    }
    (0..los.len()).any(|y| {
        y != x
            && pred(&los[y])
            && topic_of(asg, &los[y]) == tx
            && !(exclude_same_standard && los[y].standard_key == los[x].standard_key)
    })
}

/// `(numerator, denominator)` per ordered subject pair.
pub fn subject_matrix_oracle(
    catalog: &FrameworkCatalog,
    asg: &TopicAssignment,
    exclude_same_standard: bool,
) -> BTreeMap<(String, String), (u32, u32)> {
    let mut subjects: Vec<String> = catalog.los().iter().map(|lo| lo.subject.clone()).collect();
    subjects.sort();
    subjects.dedup();
    let mut out = BTreeMap::new();
    for a in &subjects {
        for b in &subjects {
            let rows: Vec<usize> = (0..catalog.len()).filter(|&i| &catalog.los()[i].subject == a).collect();
            let hits = rows
                .iter()
                .filter(|&&x| matches_any(catalog, asg, x, exclude_same_standard, |lo| &lo.subject == b))
                .count();
            out.insert((a.clone(), b.clone()), (hits as u32, rows.len() as u32));
        }
    }
    out
}

/// 12×12 grid for an ordered subject pair; `None` where either side is empty.
pub fn grade_matrix_oracle(
    catalog: &FrameworkCatalog,
    asg: &TopicAssignment,
    a: &str,
    b: &str,
    exclude_same_standard: bool,
) -> Vec<Vec<Option<(u32, u32)>>> {
    let los = catalog.los();
    (1..=12u8)
        .map(|g1| {
            (1..=12u8)
                .map(|g2| {
                    let rows: Vec<usize> =
                        (0..los.len()).filter(|&i| los[i].subject == a && los[i].grade == g1).collect();
                    let cols = los.iter().filter(|lo| lo.subject == b && lo.grade == g2).count();
                    if rows.is_empty() || cols == 0 {
                        return None;
                    }
                    let hits = rows
                        .iter()
                        .filter(|&&x| {
                            matches_any(catalog, asg, x, exclude_same_standard, |lo| {
                                lo.subject == b && lo.grade == g2
                            })
                        })
                        .count();
                    Some((hits as u32, rows.len() as u32))
                })
                .collect()
        })
        .collect()
}

/// `(consistent, eligible)` at the standard level.
pub fn standard_consistency_oracle(catalog: &FrameworkCatalog, asg: &TopicAssignment) -> (usize, usize) {
    let los = catalog.los();
    let (mut consistent, mut eligible) = (0, 0);
    for x in 0..los.len() {
        let same_std = |lo: &LearningOutcome| lo.standard_key == los[x].standard_key;
        if !(0..los.len()).any(|y| y != x && same_std(&los[y])) {
            continue;
        }
        eligible += 1;
        if matches_any(catalog, asg, x, false, same_std) {
            consistent += 1;
        }
    }
    (consistent, eligible)
}

/// Every c-TF-IDF score, `W(t, c) = tf(t, c) * ln(1 + A / f(t))`, where `A`
/// is the mean token count per topic and `f(t)` the term's total frequency.
pub fn ctfidf_oracle(asg: &TopicAssignment, docs: &[TokenizedDoc]) -> BTreeMap<(i32, String), f64> {
    let mut topics: Vec<i32> = asg.topics().iter().copied().filter(|&t| t >= 0).collect();
    topics.sort();
    topics.dedup();
    let in_topic = |doc: &TokenizedDoc| asg.topic_of(&doc.lo_code).filter(|&t| t >= 0);
    let total_tokens: usize = docs.iter().filter(|d| in_topic(d).is_some()).map(|d| d.tokens.len()).sum();
    let avg = total_tokens as f64 / topics.len() as f64;
    let mut out = BTreeMap::new();
    for &t in &topics {
        for doc in docs.iter().filter(|d| in_topic(d) == Some(t)) {
            for term in &doc.tokens {
                if out.contains_key(&(t, term.clone())) {
                    continue;
                }
                let count_in = |pred: &dyn Fn(&TokenizedDoc) -> bool| -> usize {
                    docs.iter()
                        .filter(|d| pred(d))
                        .map(|d| d.tokens.iter().filter(|x| *x == term).count())
                        .sum()
                };
                let tf = count_in(&|d| in_topic(d) == Some(t)) as f64;
                let f = count_in(&|d| in_topic(d).is_some()) as f64;
                out.insert((t, term.clone()), tf * (1.0 + avg / f).ln());
            }
        }
    }
    out
}

fn plain_lo(code: String, subject: &str, grade: u8, text: String) -> LearningOutcome {
    LearningOutcome {
        code,
        text,
        subject: subject.to_string(),
        subject_name: String::new(),
        subject_type: SubjectType::Unspecified,
        grade,
        stream: Stream::Main,
        cycle: Some(cycle_of(grade)),
        domain_label: String::new(),
        strand_label: String::new(),
        standard_label: String::new(),
        standard_key: String::new(),
    }
}

/// Small random catalog with random topics (outliers included) and
/// random token lists drawn from a tiny vocabulary so terms collide.
pub fn random_case(seed: u64, max_n: usize) -> (FrameworkCatalog, TopicAssignment, Vec<TokenizedDoc>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_n);
    let n_subjects = rng.random_range(1..=5usize);
    let n_topics = rng.random_range(1..=8i32);
    let n_standards = rng.random_range(1..=6usize);
    let vocab: Vec<String> = (0..12).map(|i| format!("w{i}")).collect();
    let mut los = Vec::with_capacity(n);
    let mut topics = Vec::with_capacity(n);
    let mut docs = Vec::with_capacity(n);
    for i in 0..n {
        let subject = ["MAT", "SCI", "ENG", "ART", "HIS"][rng.random_range(0..n_subjects)];
        let grade = rng.random_range(1..=12u8);
        let std = rng.random_range(0..n_standards);
        let code = format!("{subject}.1.{std}.{i:04}");
        let tokens: Vec<String> = (0..rng.random_range(0..6))
            .map(|_| vocab[rng.random_range(0..vocab.len())].clone())
            .collect();
        let topic = if rng.random_bool(0.15) { -1 } else { rng.random_range(0..n_topics) };
        docs.push(TokenizedDoc {
            lo_code: code.clone(),
            tokens: tokens.clone(),
        });
        los.push(plain_lo(code.clone(), subject, grade, tokens.join(" ")));
        topics.push(topic);
    }
    let catalog = FrameworkCatalog::from_los(los).expect("unique codes");
    let asg = TopicAssignment::from_labels(catalog.los().iter().map(|lo| lo.code.clone()).collect(), topics);
    (catalog, asg, docs)
}

pub fn write_catalog_csv(catalog: &FrameworkCatalog, path: &Path) {
    let mut buf = Vec::new();
    catalog.write_csv(&mut buf).expect("catalog serializes");
    std::fs::write(path, buf).expect("write catalog");
}

/// Relative path → bytes for every file under `root`.
pub fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).expect("readable dir").map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
