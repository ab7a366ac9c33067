//! Directed matching percentages.
//!
//! `cell(A, B) = 100 * |{lo in A : lo matches some LO of B}| / |A|`. The
//! numerator counts outcomes, not pairs, so cells stay within [0, 100], and
//! the matrix is not symmetric. On the diagonal an outcome must match a
//! different outcome of the same subject.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Serialize, Serializer};

use super::{AlignError, MatchSet};
use crate::catalog::{FrameworkCatalog, LearningOutcome, Stream};

/// An exact ratio rendered as a percentage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pct {
    pub num: u32,
    pub den: u32,
}

impl Pct {
    pub fn new(num: u32, den: u32) -> Self {
        assert!(den > 0 && num <= den, "percentage {num}/{den} out of range");
        Pct { num, den }
    }

    pub fn value(self) -> f64 {
        100.0 * f64::from(self.num) / f64::from(self.den)
    }

    /// Percentage in hundredths, rounded half-to-even from the exact ratio.
    pub fn hundredths(self) -> u64 {
        let scaled = 10_000 * u64::from(self.num);
        let den = u64::from(self.den);
        let (q, r) = (scaled / den, scaled % den);
        match (2 * r).cmp(&den) {
            std::cmp::Ordering::Greater => q + 1,
            std::cmp::Ordering::Equal => q + (q & 1),
            std::cmp::Ordering::Less => q,
        }
    }
}

impl fmt::Display for Pct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hundredths();
        write!(f, "{}.{:02}", h / 100, h % 100)
    }
}

impl Serialize for Pct {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(self.to_string())
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `None` marks a row or column with no outcomes.
    pub cells: Vec<Vec<Option<Pct>>>,
}

impl AlignmentMatrix {
    pub fn cell(&self, row: &str, col: &str) -> Option<Pct> {
        let r = self.row_labels.iter().position(|l| l == row)?;
        let c = self.col_labels.iter().position(|l| l == col)?;
        self.cells[r][c]
    }

    pub fn is_empty(&self) -> bool {
        self.row_labels.is_empty()
    }

    /// CSV with a header row and a leading label column; absent cells are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for c in &self.col_labels {
            out.push(',');
            out.push_str(&csv_field(c));
        }
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&self.cells) {
            out.push_str(&csv_field(label));
            for cell in row {
                out.push(',');
                if let Some(p) = cell {
                    out.push_str(&p.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgramEntry {
    pub subject: String,
    pub grades: RangeInclusive<u8>,
}

/// A named group of subjects, each over a grade range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Program {
    pub name: String,
    pub entries: Vec<ProgramEntry>,
}

impl Program {
    pub fn contains(&self, lo: &LearningOutcome) -> bool {
        self.entries
            .iter()
            .any(|e| e.subject == lo.subject && e.grades.contains(&lo.grade))
    }
}

/// Which outcomes take part in an analysis. Empty filters admit everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scope {
    pub cycles: Option<BTreeSet<u8>>,
    pub streams: Option<BTreeSet<Stream>>,
    pub grades: Option<BTreeSet<u8>>,
    pub program: Option<Program>,
}

impl Scope {
    pub fn all() -> Self {
        Scope::default()
    }

    pub fn contains(&self, lo: &LearningOutcome) -> bool {
        self.cycles
            .as_ref()
            .is_none_or(|s| lo.cycle.is_some_and(|c| s.contains(&c)))
            && self.streams.as_ref().is_none_or(|s| s.contains(&lo.stream))
            && self.grades.as_ref().is_none_or(|s| s.contains(&lo.grade))
            && self.program.as_ref().is_none_or(|p| p.contains(lo))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchOptions {
    /// Ignore matches between outcomes of the same standard.
    pub exclude_same_standard: bool,
}

/// Per-topic member counts keyed by an arbitrary group, plus the optional
/// same-standard breakdown used to discount matches.
struct TopicCounts<'a, K> {
    by_group: HashMap<(i32, K), u32>,
    by_group_std: HashMap<(i32, K, &'a str), u32>,
}

impl<'a, K: std::hash::Hash + Eq + Clone> TopicCounts<'a, K> {
    fn build(
        ms: &MatchSet,
        catalog: &'a FrameworkCatalog,
        keep: impl Fn(usize) -> bool,
        key: impl Fn(&'a LearningOutcome) -> K,
    ) -> Self {
        let mut by_group = HashMap::new();
        let mut by_group_std = HashMap::new();
        for (i, lo) in catalog.los().iter().enumerate() {
            let t = ms.topic(i);
            if t < 0 || !keep(i) {
                continue;
            }
            let k = key(lo);
            *by_group.entry((t, k.clone())).or_insert(0) += 1;
            *by_group_std
                .entry((t, k, lo.standard_key.as_str()))
                .or_insert(0) += 1;
        }
        TopicCounts { by_group, by_group_std }
    }

    /// Does outcome `lo` (topic `t`, itself counted in group `own` iff
    /// `self_in_group`) have a match in group `target`?
    fn has_match(&self, t: i32, lo: &LearningOutcome, target: &K, self_in_group: bool, opts: MatchOptions) -> bool {
        let own = u32::from(self_in_group);
        let mut n = self.by_group.get(&(t, target.clone())).copied().unwrap_or(0) - own;
        if opts.exclude_same_standard {
            let same = self
                .by_group_std
                .get(&(t, target.clone(), lo.standard_key.as_str()))
                .copied()
                .unwrap_or(0);
            n -= same - own.min(same);
        }
        n > 0
    }
}

pub fn subject_matrix(
    ms: &MatchSet,
    catalog: &FrameworkCatalog,
    scope: &Scope,
    opts: MatchOptions,
) -> Result<AlignmentMatrix, AlignError> {
    let in_scope: Vec<bool> = catalog.los().iter().map(|lo| scope.contains(lo)).collect();
    let mut sizes: BTreeMap<&str, u32> = BTreeMap::new();
    for (lo, _) in catalog.los().iter().zip(&in_scope).filter(|(_, &k)| k) {
        *sizes.entry(lo.subject.as_str()).or_insert(0) += 1;
    }
    if sizes.is_empty() {
        return Err(AlignError::EmptyScope);
    }
    let subjects: Vec<&str> = sizes.keys().copied().collect();
    let col: HashMap<&str, usize> = subjects.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let counts = TopicCounts::build(ms, catalog, |i| in_scope[i], |lo| lo.subject.as_str());

    let mut numer = vec![vec![0u32; subjects.len()]; subjects.len()];
    for (i, lo) in catalog.los().iter().enumerate() {
        let t = ms.topic(i);
        if !in_scope[i] || t < 0 {
            continue;
        }
        let r = col[lo.subject.as_str()];
        for (c, target) in subjects.iter().enumerate() {
            if counts.has_match(t, lo, target, *target == lo.subject, opts) {
                numer[r][c] += 1;
            }
        }
    }
    let cells = subjects
        .iter()
        .enumerate()
        .map(|(r, s)| {
            (0..subjects.len())
                .map(|c| Some(Pct::new(numer[r][c], sizes[s])))
                .collect()
        })
        .collect();
    let labels: Vec<String> = subjects.iter().map(|s| s.to_string()).collect();
    Ok(AlignmentMatrix {
        row_labels: labels.clone(),
        col_labels: labels,
        cells,
    })
}

/// Grade-by-grade drill-down for one ordered subject pair over grades 1-12.
pub fn grade_matrix(
    ms: &MatchSet,
    catalog: &FrameworkCatalog,
    subject_a: &str,
    subject_b: &str,
    opts: MatchOptions,
) -> Result<AlignmentMatrix, AlignError> {
    for s in [subject_a, subject_b] {
        if !catalog.has_subject(s) {
            return Err(AlignError::UnknownSubject(s.to_string()));
        }
    }
    let counts = TopicCounts::build(
        ms,
        catalog,
        |i| catalog.los()[i].subject == subject_b,
        |lo| lo.grade,
    );
    let grades = 1..=12u8;
    let mut cells = Vec::with_capacity(12);
    for g1 in grades.clone() {
        let rows = catalog.indices_of_subject_grade(subject_a, g1);
        let row = grades
            .clone()
            .map(|g2| {
                if rows.is_empty() || catalog.indices_of_subject_grade(subject_b, g2).is_empty() {
                    return None;
                }
                let hits = rows
                    .iter()
                    .filter(|&&i| {
                        let t = ms.topic(i);
                        let lo = &catalog.los()[i];
                        let self_in = subject_a == subject_b && g1 == g2;
                        t >= 0 && counts.has_match(t, lo, &g2, self_in, opts)
                    })
                    .count();
                Some(Pct::new(hits as u32, rows.len() as u32))
            })
            .collect();
        cells.push(row);
    }
    let labels: Vec<String> = grades.map(|g| g.to_string()).collect();
    Ok(AlignmentMatrix {
        row_labels: labels.clone(),
        col_labels: labels,
        cells,
    })
}
