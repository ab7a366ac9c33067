//! Synthetic catalogs with planted structure, for fixtures, benchmarks and
//! recovery checks.
//!
//! A planted corpus is a set of topic templates. Every outcome of a template
//! carries the template's core words plus a few words of its own, so any two
//! outcomes of one template share `core_words / (core_words + noise_words)`
//! of their tokens. Outcomes are laid out in slots of `slot_size` outcomes
//! that share a subject, a grade and a standard key.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{FrameworkCatalog, LearningOutcome, Stream, KNOWN_SUBJECTS};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub n_subjects: usize,
    pub n_templates: usize,
    /// How many templates span at least four subjects.
    pub n_cross_subject: usize,
    pub slots_per_template: usize,
    pub slot_size: usize,
    pub core_words: usize,
    pub noise_words: usize,
    pub seed: u64,
}

impl Default for PlantedSpec {
    /// 12 subjects, grades 1-12, 30 templates of 18 outcomes (540 total),
    /// 80% token overlap within a template.
    fn default() -> Self {
        PlantedSpec {
            n_subjects: 12,
            n_templates: 30,
            n_cross_subject: 5,
            slots_per_template: 6,
            slot_size: 3,
            core_words: 8,
            noise_words: 2,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub catalog: FrameworkCatalog,
    /// Template index of every catalog entry.
    pub template_of: Vec<usize>,
    /// Templates that span four or more subjects.
    pub cross_subject: BTreeSet<usize>,
}

const SYLLABLES: [&str; 20] = [
    "ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "ze", "bu", "da", "fe", "gi", "ho", "ju", "pa",
    "qe", "xi", "yo", "wu",
];

/// Distinct pronounceable pseudo-words (never stop words or numbers).
fn word_source() -> impl FnMut(&mut ChaCha8Rng) -> String {
    let mut used = BTreeSet::new();
    move |rng: &mut ChaCha8Rng| loop {
        let n = rng.random_range(3..=4);
        let w: String = (0..n)
            .map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())])
            .collect();
        if used.insert(w.clone()) {
            return w;
        }
    }
}

pub fn cycle_of(grade: u8) -> u8 {
    match grade {
        1..=4 => 1,
        5..=8 => 2,
        _ => 3,
    }
}

struct Slot {
    template: usize,
    subject: &'static str,
    grade: u8,
    stream: Stream,
    texts: Vec<String>,
}

fn planted_slots(spec: &PlantedSpec, rng: &mut ChaCha8Rng) -> (Vec<Slot>, BTreeSet<usize>) {
    assert!(spec.n_subjects >= 4 && spec.n_subjects <= KNOWN_SUBJECTS.len());
    assert!(spec.n_cross_subject <= spec.n_templates);
    assert!(spec.slots_per_template >= 4, "cross-subject templates need four slots");
    let mut next_word = word_source();
    let subjects: Vec<&'static str> = KNOWN_SUBJECTS[..spec.n_subjects].iter().map(|s| s.0).collect();
    let mut slots = Vec::new();
    let mut cross_subject = BTreeSet::new();
    for t in 0..spec.n_templates {
        let core: Vec<String> = (0..spec.core_words).map(|_| next_word(rng)).collect();
        // cross-subject templates put every slot in its own subject, the rest
        // stay within one to three subjects
        let span = if t < spec.n_cross_subject {
            cross_subject.insert(t);
            spec.slots_per_template.min(subjects.len())
        } else {
            rng.random_range(1..=3)
        };
        let mut pool = subjects.clone();
        pool.shuffle(rng);
        let start_grade: u8 = rng.random_range(1..=12);
        for s in 0..spec.slots_per_template {
            let grade = (start_grade as usize + s - 1) % 12 + 1;
            let grade = grade as u8;
            let stream = if grade < 5 || rng.random_bool(0.7) { Stream::Main } else { Stream::Elite };
            let texts = (0..spec.slot_size)
                .map(|_| {
                    let mut words = core.clone();
                    words.extend((0..spec.noise_words).map(|_| next_word(rng)));
                    words.shuffle(rng);
                    format!("Students {} the {}", words[0], words[1..].join(" "))
                })
                .collect();
            slots.push(Slot {
                template: t,
                subject: pool[s % span],
                grade,
                stream,
                texts,
            });
        }
    }
    (slots, cross_subject)
}

/// Lays slots out as outcomes. `groups[g]` lists `(slot, member)` pairs that
/// form standard `g`.
fn assemble(
    slots: &[Slot],
    groups: &[Vec<(usize, usize)>],
    cross_subject: BTreeSet<usize>,
    rng: &mut ChaCha8Rng,
) -> PlantedCorpus {
    let mut per_subject: std::collections::BTreeMap<&str, u32> = Default::default();
    let mut rows = Vec::new();
    let mut serial = 0u32;
    for group in groups {
        let subject = slots[group[0].0].subject;
        let sn = per_subject.entry(subject).or_insert(0);
        *sn += 1;
        for &(s, m) in group {
            let slot = &slots[s];
            debug_assert_eq!(slot.subject, subject);
            serial += 1;
            let lo = LearningOutcome {
                code: format!("{subject}.1.{sn:03}.{serial:04}"),
                text: slot.texts[m].clone(),
                subject: subject.to_string(),
                subject_name: String::new(),
                subject_type: crate::catalog::SubjectType::Unspecified,
                grade: slot.grade,
                stream: slot.stream,
                cycle: Some(cycle_of(slot.grade)),
                domain_label: String::new(),
                strand_label: format!("strand {}", slot.template % 5),
                standard_label: format!("standard {sn}"),
                standard_key: String::new(),
            };
            rows.push((lo, slot.template));
        }
    }
    // shuffle row order so nothing downstream can lean on file order
    rows.shuffle(rng);
    let template_of = rows.iter().map(|r| r.1).collect();
    let mut catalog = FrameworkCatalog::from_los(rows.into_iter().map(|r| r.0).collect())
        .expect("generated codes are unique");
    fill_subject_metadata(&mut catalog);
    PlantedCorpus {
        catalog,
        template_of,
        cross_subject,
    }
}

/// Every standard is one slot: its outcomes share a template, subject and grade.
pub fn planted_corpus(spec: &PlantedSpec) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (slots, cross) = planted_slots(spec, &mut rng);
    let groups: Vec<Vec<(usize, usize)>> = slots
        .iter()
        .enumerate()
        .map(|(s, slot)| (0..slot.texts.len()).map(|m| (s, m)).collect())
        .collect();
    assemble(&slots, &groups, cross, &mut rng)
}

/// Like [`planted_corpus`], but about `scattered` of the standards are
/// rebuilt so that each of their members comes from a different template.
/// Members of a scattered standard therefore never share a topic when topics
/// are recovered exactly, while intact standards always do.
///
/// Returns the corpus and the number of outcomes in scattered standards.
pub fn corrupted_corpus(spec: &PlantedSpec, scattered: f64) -> (PlantedCorpus, usize) {
    assert!((0.0..=1.0).contains(&scattered));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (slots, cross) = planted_slots(spec, &mut rng);
    let size = spec.slot_size;
    // scatter in blocks of `size` same-subject slots from distinct templates;
    // a block's member j forms a new standard with member j of the others
    let mut target = (scattered * slots.len() as f64).round() as usize / size * size;
    let mut by_subject: std::collections::BTreeMap<&str, Vec<usize>> = Default::default();
    for (i, s) in slots.iter().enumerate() {
        by_subject.entry(s.subject).or_default().push(i);
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut in_block = vec![false; slots.len()];
    let mut subjects: Vec<&str> = by_subject.keys().copied().collect();
    subjects.shuffle(&mut rng);
    'outer: while target > 0 {
        let mut progressed = false;
        for subj in &subjects {
            if target == 0 {
                break 'outer;
            }
            let mut block: Vec<usize> = Vec::new();
            for &i in &by_subject[subj] {
                if !in_block[i] && block.iter().all(|&b| slots[b].template != slots[i].template) {
                    block.push(i);
                    if block.len() == size {
                        break;
                    }
                }
            }
            if block.len() == size {
                block.iter().for_each(|&i| in_block[i] = true);
                blocks.push(block);
                target -= size;
                progressed = true;
            }
        }
        assert!(progressed, "not enough distinct-template slots to scatter");
    }
    let mut groups: Vec<Vec<(usize, usize)>> = slots
        .iter()
        .enumerate()
        .filter(|(i, _)| !in_block[*i])
        .map(|(s, slot)| (0..slot.texts.len()).map(|m| (s, m)).collect())
        .collect();
    for block in &blocks {
        for j in 0..size {
            groups.push(block.iter().map(|&s| (s, j)).collect());
        }
    }
    let n_scattered = blocks.len() * size * size;
    (assemble(&slots, &groups, cross, &mut rng), n_scattered)
}

fn fill_subject_metadata(catalog: &mut FrameworkCatalog) {
    let los = catalog
        .los()
        .iter()
        .cloned()
        .map(|mut lo| {
            if let Some((_, name, ty)) = KNOWN_SUBJECTS.iter().find(|s| s.0 == lo.subject) {
                lo.subject_name = name.to_string();
                lo.subject_type = *ty;
            }
            lo
        })
        .collect();
    *catalog = FrameworkCatalog::from_los(los).expect("metadata does not touch codes");
}

/// Unstructured catalog of `n` outcomes spread over the known subjects.
pub fn bulk_catalog(n: usize, seed: u64) -> FrameworkCatalog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next_word = word_source();
    let vocab: Vec<String> = (0..2000).map(|_| next_word(&mut rng)).collect();
    let los = (0..n)
        .map(|i| {
            let (subject, name, ty) = KNOWN_SUBJECTS[i % KNOWN_SUBJECTS.len()];
            let grade = (i / KNOWN_SUBJECTS.len() % 12) as u8 + 1;
            let words: Vec<&str> = (0..8).map(|_| vocab[rng.random_range(0..vocab.len())].as_str()).collect();
            LearningOutcome {
                code: format!("{subject}.{}.{grade:02}.{:02}.{i:05}", cycle_of(grade), i % 7),
                text: words.join(" "),
                subject: subject.to_string(),
                subject_name: name.to_string(),
                subject_type: ty,
                grade,
                stream: Stream::Main,
                cycle: Some(cycle_of(grade)),
                domain_label: String::new(),
                strand_label: String::new(),
                standard_label: String::new(),
                standard_key: String::new(),
            }
        })
        .collect();
    FrameworkCatalog::from_los(los).expect("generated codes are unique")
}

/// Two subjects with a hand-assigned topic layout:
///
/// ```text
/// A: topics 0, 0, 1, outlier      B: topics 0, 2, 2
/// ```
///
/// Two of A's four outcomes find a partner in B, one of B's three finds one
/// in A, so the subject matrix is 50.00 / 33.33 off the diagonal.
pub fn asymmetric_fixture() -> (FrameworkCatalog, crate::topics::TopicAssignment) {
    let rows: [(&str, u8, &str, i32); 7] = [
        ("A.1.1.01.001", 5, "Describe the water cycle and evaporation", 0),
        ("A.1.1.01.002", 6, "Explain evaporation and condensation in the water cycle", 0),
        ("A.1.1.02.001", 7, "Compare fractions using number lines", 1),
        ("A.1.1.03.001", 8, "Recite a poem with expression", -1),
        ("B.1.1.01.001", 5, "Model condensation in the water cycle", 0),
        ("B.1.1.02.001", 6, "Identify rhythm patterns in music", 2),
        ("B.1.1.02.002", 7, "Compose rhythm patterns for percussion", 2),
    ];
    let los = rows
        .iter()
        .map(|&(code, grade, text, _)| LearningOutcome {
            code: code.into(),
            text: text.into(),
            subject: code[..1].into(),
            subject_name: format!("Subject {}", &code[..1]),
            subject_type: crate::catalog::SubjectType::Unspecified,
            grade,
            stream: Stream::Main,
            cycle: Some(cycle_of(grade)),
            domain_label: String::new(),
            strand_label: String::new(),
            standard_label: String::new(),
            standard_key: String::new(),
        })
        .collect();
    let catalog = FrameworkCatalog::from_los(los).expect("fixture codes are unique");
    let topic_of = |code: &str| rows.iter().find(|r| r.0 == code).expect("fixture row").3;
    let ids: Vec<String> = catalog.los().iter().map(|lo| lo.code.clone()).collect();
    let topics = ids.iter().map(|c| topic_of(c)).collect();
    (catalog, crate::topics::TopicAssignment::from_labels(ids, topics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::{default_stopwords, tokenize_catalog};

    #[test]
    fn planted_shape() {
        let spec = PlantedSpec::default();
        let c = planted_corpus(&spec);
        assert_eq!(c.catalog.len(), 540);
        assert_eq!(c.catalog.subjects().count(), 12);
        assert_eq!(c.cross_subject.len(), 5);
        for t in 0..spec.n_templates {
            let subjects: BTreeSet<&str> = c
                .template_of
                .iter()
                .zip(c.catalog.los())
                .filter(|(&x, _)| x == t)
                .map(|(_, lo)| lo.subject.as_str())
                .collect();
            assert_eq!(subjects.len() >= 4, c.cross_subject.contains(&t), "template {t}");
        }
        // every standard holds one slot of a single template
        for members in c.catalog.standards().values() {
            assert_eq!(members.len(), spec.slot_size);
            assert!(members.iter().all(|&i| c.template_of[i] == c.template_of[members[0]]));
        }
        assert_eq!(planted_corpus(&spec).catalog, c.catalog);
    }

    #[test]
    fn corruption_rate() {
        let spec = PlantedSpec::default();
        let (c, n_scattered) = corrupted_corpus(&spec, 0.10);
        assert_eq!(n_scattered, 54);
        let mut scattered = 0;
        for members in c.catalog.standards().values() {
            let templates: BTreeSet<usize> = members.iter().map(|&i| c.template_of[i]).collect();
            if templates.len() == members.len() {
                scattered += members.len();
            } else {
                assert_eq!(templates.len(), 1);
            }
        }
        assert_eq!(scattered, n_scattered);
        assert_eq!(c.catalog.len(), 540);
    }

    #[test]
    fn token_overlap_within_templates() {
        let c = planted_corpus(&PlantedSpec::default());
        let docs = tokenize_catalog(&c.catalog, &default_stopwords("en").unwrap());
        for i in 0..docs.len() {
            for j in i + 1..docs.len() {
                if c.template_of[i] != c.template_of[j] {
                    continue;
                }
                let a: BTreeSet<&String> = docs[i].tokens.iter().collect();
                let b: BTreeSet<&String> = docs[j].tokens.iter().collect();
                let shared = a.intersection(&b).count() as f64;
                assert!(shared / a.len().max(b.len()) as f64 >= 0.7);
            }
        }
    }

    #[test]
    fn bulk_size() {
        let c = bulk_catalog(7431, 1);
        assert_eq!(c.len(), 7431);
    }
}
