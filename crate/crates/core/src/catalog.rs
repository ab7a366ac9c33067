//! Curriculum framework catalog: LO code parsing, CSV ingestion and the
//! counting/filtering primitives every analytic builds on.
//!
//! Codes look like `CCI.1.2.02.003`: an alphabetic subject token followed by
//! numeric segments. Two outcomes belong to the same standard iff their codes
//! agree on every segment except the last, so the standard key is simply the
//! code with its final segment removed (zero padding kept verbatim).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("duplicate LO code `{code}` at row {row}")]
    DuplicateCode { code: String, row: usize },
    #[error("row {row}: grade must be an integer in 1..=12")]
    BadGrade { row: usize },
    #[error("row {row}: empty outcome text")]
    EmptyText { row: usize },
    #[error("malformed LO code `{0}`")]
    MalformedCode(String),
    #[error("row {row}: bad value `{value}` in column `{column}`")]
    BadField {
        row: usize,
        column: String,
        value: String,
    },
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for CatalogError {
    fn from(e: csv::Error) -> Self {
        CatalogError::Csv(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SubjectType {
    GroupA,
    GroupB,
    Applied,
    Unspecified,
}

impl SubjectType {
    pub fn as_str(self) -> &'static str {
        match self {
            SubjectType::GroupA => "Group A",
            SubjectType::GroupB => "Group B",
            SubjectType::Applied => "Applied",
            SubjectType::Unspecified => "",
        }
    }
}

impl FromStr for SubjectType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let norm: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .flat_map(char::to_lowercase)
            .collect();
        match norm.as_str() {
            "" | "unspecified" => Ok(SubjectType::Unspecified),
            "groupa" | "a" => Ok(SubjectType::GroupA),
            "groupb" | "b" => Ok(SubjectType::GroupB),
            "applied" => Ok(SubjectType::Applied),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stream {
    Main,
    Elite,
    Advanced,
    General,
    Applied,
    Academic,
    Unspecified,
}

impl Stream {
    pub const ALL: [Stream; 7] = [
        Stream::Main,
        Stream::Elite,
        Stream::Advanced,
        Stream::General,
        Stream::Applied,
        Stream::Academic,
        Stream::Unspecified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stream::Main => "Main",
            Stream::Elite => "Elite",
            Stream::Advanced => "Advanced",
            Stream::General => "General",
            Stream::Applied => "Applied",
            Stream::Academic => "Academic",
            Stream::Unspecified => "Unspecified",
        }
    }
}

impl fmt::Display for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stream {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let t = s.trim();
        if t.is_empty() {
            return Ok(Stream::Unspecified);
        }
        Stream::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(t))
            .ok_or(())
    }
}

/// Subjects of the 1-12 framework: abbreviation, name, type.
pub const KNOWN_SUBJECTS: &[(&str, &str, SubjectType)] = &[
    ("BIO", "Biology", SubjectType::GroupA),
    ("BUS", "Business Studies", SubjectType::GroupB),
    ("CHM", "Chemistry", SubjectType::GroupA),
    ("CCI", "Computing, Creative Design and Innovation", SubjectType::GroupB),
    ("HSC", "Health Science", SubjectType::GroupB),
    ("ISL", "Islamic study", SubjectType::GroupA),
    ("MAT", "Mathematics", SubjectType::GroupA),
    ("MSA", "Music", SubjectType::GroupA),
    ("MOR", "Moral Study", SubjectType::GroupA),
    ("PHE", "Physical Education", SubjectType::GroupB),
    ("PHY", "Physics", SubjectType::GroupA),
    ("SCI", "Integrated Science", SubjectType::GroupA),
    ("SST", "Social Study", SubjectType::GroupA),
    ("TTL", "Applied Travel, Tourism, and Leisure", SubjectType::Applied),
    ("VAS", "Visual Art", SubjectType::GroupA),
];

fn known_subject(abbr: &str) -> Option<(&'static str, SubjectType)> {
    KNOWN_SUBJECTS
        .iter()
        .find(|(a, _, _)| *a == abbr)
        .map(|(_, name, ty)| (*name, *ty))
}

/// Decomposed LO code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoCode {
    pub subject: String,
    pub segments: Vec<u64>,
    pub standard_key: String,
    pub serial: u64,
}

pub fn parse_lo_code(code: &str) -> Result<LoCode, CatalogError> {
    let malformed = || CatalogError::MalformedCode(code.to_string());
    let mut parts = code.split('.');
    let subject = parts.next().ok_or_else(malformed)?;
    if subject.is_empty() || !subject.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(malformed());
    }
    let mut segments = Vec::new();
    for seg in parts {
        if seg.is_empty() || !seg.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        segments.push(seg.parse::<u64>().map_err(|_| malformed())?);
    }
    if segments.len() < 2 {
        return Err(malformed());
    }
    let cut = code.rfind('.').expect("at least two segments");
    Ok(LoCode {
        subject: subject.to_string(),
        serial: *segments.last().expect("non-empty"),
        segments,
        standard_key: code[..cut].to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningOutcome {
    pub code: String,
    pub text: String,
    pub subject: String,
    pub subject_name: String,
    pub subject_type: SubjectType,
    pub grade: u8,
    pub stream: Stream,
    pub cycle: Option<u8>,
    pub domain_label: String,
    pub strand_label: String,
    pub standard_label: String,
    pub standard_key: String,
}

/// Canonical column name → header used in the file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub code: String,
    pub text: String,
    pub subject: String,
    pub subject_name: String,
    pub subject_type: String,
    pub grade: String,
    pub stream: String,
    pub cycle: String,
    pub domain: String,
    pub strand: String,
    pub standard: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            code: "code".into(),
            text: "text".into(),
            subject: "subject".into(),
            subject_name: "subject_name".into(),
            subject_type: "subject_type".into(),
            grade: "grade".into(),
            stream: "stream".into(),
            cycle: "cycle".into(),
            domain: "domain".into(),
            strand: "strand".into(),
            standard: "standard".into(),
        }
    }
}

pub const CANONICAL_COLUMNS: [&str; 11] = [
    "code",
    "text",
    "subject",
    "subject_name",
    "subject_type",
    "grade",
    "stream",
    "cycle",
    "domain",
    "strand",
    "standard",
];

/// Immutable, indexed collection of learning outcomes in file order.
#[derive(Debug, Clone, Default)]
pub struct FrameworkCatalog {
    los: Vec<LearningOutcome>,
    by_code: HashMap<String, usize>,
    by_subject: BTreeMap<String, Vec<usize>>,
    by_subject_grade: BTreeMap<(String, u8), Vec<usize>>,
    by_standard: BTreeMap<String, Vec<usize>>,
}

impl PartialEq for FrameworkCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.los == other.los
    }
}

impl FrameworkCatalog {
    /// Builds the indices. `standard_key` is re-derived from each code, so
    /// callers may leave it empty.
    pub fn from_los(mut los: Vec<LearningOutcome>) -> Result<Self, CatalogError> {
        let mut cat = FrameworkCatalog::default();
        for (i, lo) in los.iter_mut().enumerate() {
            let parsed = parse_lo_code(&lo.code)?;
            if !(1..=12).contains(&lo.grade) {
                return Err(CatalogError::BadGrade { row: i + 1 });
            }
            lo.standard_key = parsed.standard_key;
            if cat.by_code.insert(lo.code.clone(), i).is_some() {
                return Err(CatalogError::DuplicateCode {
                    code: lo.code.clone(),
                    row: i + 1,
                });
            }
            cat.by_subject.entry(lo.subject.clone()).or_default().push(i);
            cat.by_subject_grade
                .entry((lo.subject.clone(), lo.grade))
                .or_default()
                .push(i);
            cat.by_standard
                .entry(lo.standard_key.clone())
                .or_default()
                .push(i);
        }
        cat.los = los;
        Ok(cat)
    }

    pub fn los(&self) -> &[LearningOutcome] {
        &self.los
    }

    pub fn len(&self) -> usize {
        self.los.len()
    }

    pub fn is_empty(&self) -> bool {
        self.los.is_empty()
    }

    pub fn get(&self, code: &str) -> Option<&LearningOutcome> {
        self.index_of(code).map(|i| &self.los[i])
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.by_code.get(code).copied()
    }

    /// Subject abbreviations, sorted.
    pub fn subjects(&self) -> impl Iterator<Item = &str> {
        self.by_subject.keys().map(String::as_str)
    }

    pub fn has_subject(&self, subject: &str) -> bool {
        self.by_subject.contains_key(subject)
    }

    pub fn indices_of_subject(&self, subject: &str) -> &[usize] {
        self.by_subject.get(subject).map_or(&[], Vec::as_slice)
    }

    pub fn indices_of_subject_grade(&self, subject: &str, grade: u8) -> &[usize] {
        self.by_subject_grade
            .get(&(subject.to_string(), grade))
            .map_or(&[], Vec::as_slice)
    }

    pub fn standards(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.by_standard
    }

    pub fn subject_grade_index(&self) -> &BTreeMap<(String, u8), Vec<usize>> {
        &self.by_subject_grade
    }

    /// Sub-catalog of the outcomes satisfying `keep`, order preserved.
    pub fn filter(&self, mut keep: impl FnMut(&LearningOutcome) -> bool) -> FrameworkCatalog {
        let los = self.los.iter().filter(|lo| keep(lo)).cloned().collect();
        FrameworkCatalog::from_los(los).expect("subset of a valid catalog is valid")
    }

    /// Writes the catalog back out with the canonical header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CatalogError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CANONICAL_COLUMNS)?;
        for lo in &self.los {
            let grade = lo.grade.to_string();
            let cycle = lo.cycle.map(|c| c.to_string()).unwrap_or_default();
            let stream = match lo.stream {
                Stream::Unspecified => "",
                s => s.as_str(),
            };
            w.write_record([
                lo.code.as_str(),
                &lo.text,
                &lo.subject,
                &lo.subject_name,
                lo.subject_type.as_str(),
                &grade,
                stream,
                &cycle,
                &lo.domain_label,
                &lo.strand_label,
                &lo.standard_label,
            ])?;
        }
        w.flush().map_err(|e| CatalogError::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Reads a framework CSV (header row required).
pub fn parse_framework<R: Read>(
    source: R,
    schema: &ColumnMap,
) -> Result<FrameworkCatalog, CatalogError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let required = |canon: &str, name: &str| {
        find(name).ok_or_else(|| CatalogError::MissingColumn(canon.to_string()))
    };
    let c_code = required("code", &schema.code)?;
    let c_text = required("text", &schema.text)?;
    let c_subject = required("subject", &schema.subject)?;
    let c_grade = required("grade", &schema.grade)?;
    let c_subject_name = find(&schema.subject_name);
    let c_subject_type = find(&schema.subject_type);
    let c_stream = find(&schema.stream);
    let c_cycle = find(&schema.cycle);
    let c_domain = find(&schema.domain);
    let c_strand = find(&schema.strand);
    let c_standard = find(&schema.standard);

    let mut los = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let field = |c: usize| rec.get(c).unwrap_or("").trim();
        let opt = |c: Option<usize>| c.map(&field).unwrap_or("");
        let bad = |column: &str, value: &str| CatalogError::BadField {
            row,
            column: column.to_string(),
            value: value.to_string(),
        };

        let code = field(c_code).to_string();
        let parsed = parse_lo_code(&code)?;
        if seen.insert(code.clone(), row).is_some() {
            return Err(CatalogError::DuplicateCode { code, row });
        }
        let text = field(c_text).to_string();
        if text.is_empty() {
            return Err(CatalogError::EmptyText { row });
        }
        let grade = field(c_grade)
            .parse::<u8>()
            .ok()
            .filter(|g| (1..=12).contains(g))
            .ok_or(CatalogError::BadGrade { row })?;
        let subject = field(c_subject).to_string();
        let known = known_subject(&subject);

        let raw_type = opt(c_subject_type);
        let mut subject_type: SubjectType =
            raw_type.parse().map_err(|_| bad("subject_type", raw_type))?;
        if subject_type == SubjectType::Unspecified {
            subject_type = known.map_or(SubjectType::Unspecified, |k| k.1);
        }
        let mut subject_name = opt(c_subject_name).to_string();
        if subject_name.is_empty() {
            subject_name = known.map_or_else(String::new, |k| k.0.to_string());
        }
        let raw_stream = opt(c_stream);
        let stream = raw_stream.parse().map_err(|_| bad("stream", raw_stream))?;
        let raw_cycle = opt(c_cycle);
        let cycle = if raw_cycle.is_empty() || raw_cycle.eq_ignore_ascii_case("unspecified") {
            None
        } else {
            Some(
                raw_cycle
                    .parse::<u8>()
                    .ok()
                    .filter(|c| (1..=3).contains(c))
                    .ok_or_else(|| bad("cycle", raw_cycle))?,
            )
        };

        los.push(LearningOutcome {
            code,
            text,
            subject,
            subject_name,
            subject_type,
            grade,
            stream,
            cycle,
            domain_label: opt(c_domain).to_string(),
            strand_label: opt(c_strand).to_string(),
            standard_label: opt(c_standard).to_string(),
            standard_key: parsed.standard_key,
        });
    }
    FrameworkCatalog::from_los(los)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogStats {
    pub n_los: usize,
    pub n_subjects: usize,
    pub n_standards: usize,
    pub ordered_pair_count: u64,
    pub per_subject_counts: BTreeMap<String, usize>,
}

pub fn catalog_stats(catalog: &FrameworkCatalog) -> CatalogStats {
    let n = catalog.len() as u64;
    CatalogStats {
        n_los: catalog.len(),
        n_subjects: catalog.by_subject.len(),
        n_standards: catalog.by_standard.len(),
        ordered_pair_count: n * n.saturating_sub(1),
        per_subject_counts: catalog
            .by_subject
            .iter()
            .map(|(s, v)| (s.clone(), v.len()))
            .collect(),
    }
}

/// Distinct values present in the catalog, for building filter menus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FacetValues {
    pub cycles: BTreeSet<u8>,
    pub streams: BTreeSet<Stream>,
    pub subjects: BTreeSet<String>,
    pub grades: BTreeSet<u8>,
}

pub fn facet_values(catalog: &FrameworkCatalog) -> FacetValues {
    let mut f = FacetValues::default();
    for lo in catalog.los() {
        if let Some(c) = lo.cycle {
            f.cycles.insert(c);
        }
        f.streams.insert(lo.stream);
        f.subjects.insert(lo.subject.clone());
        f.grades.insert(lo.grade);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const THREE: &str = "code,text,subject,grade\n\
        CCI.1.2.02.003,Design algorithms to solve problems,CCI,5\n\
        CCI.1.2.02.002,Build simulations of phenomena,CCI,5\n\
        SCI.1.1.02.014,Use models and simulations to describe phenomena,SCI,6\n";

    fn parse(s: &str) -> Result<FrameworkCatalog, CatalogError> {
        parse_framework(s.as_bytes(), &ColumnMap::default())
    }

    #[test]
    fn parses_lo_codes() {
        let c = parse_lo_code("CCI.1.2.02.003").unwrap();
        assert_eq!(c.subject, "CCI");
        assert_eq!(c.segments, vec![1, 2, 2, 3]);
        assert_eq!(c.standard_key, "CCI.1.2.02");
        assert_eq!(c.serial, 3);

        let c = parse_lo_code("SCI.1.1.02.014").unwrap();
        assert_eq!(c.subject, "SCI");
        assert_eq!(c.standard_key, "SCI.1.1.02");
        assert_eq!(c.serial, 14);
    }

    #[test]
    fn rejects_malformed_codes() {
        for bad in ["CCI..003", "", "CCI", "CCI.1", ".1.2", "1.2.3", "CCI.1.x", "CCI.1.2."] {
            assert_eq!(
                parse_lo_code(bad),
                Err(CatalogError::MalformedCode(bad.to_string())),
                "{bad}"
            );
        }
    }

    #[test]
    fn three_row_catalog() {
        let cat = parse(THREE).unwrap();
        assert_eq!(cat.len(), 3);
        let stats = catalog_stats(&cat);
        assert_eq!(stats.n_subjects, 2);
        assert_eq!(stats.n_standards, 2);
        assert_eq!(stats.ordered_pair_count, 6);
        assert_eq!(cat.los()[0].code, "CCI.1.2.02.003");
        assert_eq!(cat.los()[1].standard_key, "CCI.1.2.02");
        // filled from the known-subject table
        assert_eq!(cat.los()[2].subject_name, "Integrated Science");
        assert_eq!(cat.los()[0].subject_type, SubjectType::GroupB);
        assert_eq!(cat.los()[0].stream, Stream::Unspecified);
        assert_eq!(cat.los()[0].cycle, None);
    }

    #[test]
    fn header_only_is_empty() {
        let cat = parse("code,text,subject,grade\n").unwrap();
        assert!(cat.is_empty());
        let s = catalog_stats(&cat);
        assert_eq!((s.n_los, s.n_subjects, s.n_standards, s.ordered_pair_count), (0, 0, 0, 0));
    }

    #[test]
    fn duplicate_code_rejected() {
        let src = "code,text,subject,grade\n\
            CCI.1.2.02.003,a,CCI,5\n\
            CCI.1.2.02.003,b,CCI,5\n";
        assert_eq!(
            parse(src).unwrap_err(),
            CatalogError::DuplicateCode {
                code: "CCI.1.2.02.003".into(),
                row: 2
            }
        );
    }

    #[test]
    fn row_errors() {
        assert_eq!(
            parse("code,text,grade\n").unwrap_err(),
            CatalogError::MissingColumn("subject".into())
        );
        assert_eq!(
            parse("code,text,subject,grade\nCCI.1.1,x,CCI,13\n").unwrap_err(),
            CatalogError::BadGrade { row: 1 }
        );
        assert_eq!(
            parse("code,text,subject,grade\nCCI.1.1,x,CCI,five\n").unwrap_err(),
            CatalogError::BadGrade { row: 1 }
        );
        assert_eq!(
            parse("code,text,subject,grade\nCCI.1.1,  ,CCI,3\n").unwrap_err(),
            CatalogError::EmptyText { row: 1 }
        );
        assert!(matches!(
            parse("code,text,subject,grade,stream\nCCI.1.1,x,CCI,3,Nope\n").unwrap_err(),
            CatalogError::BadField { row: 1, .. }
        ));
    }

    #[test]
    fn column_mapping_override() {
        let src = "LO Code,Statement,Subj,Grade Level\nMAT.2.1.01.001,Count to ten,MAT,1\n";
        let schema = ColumnMap {
            code: "LO Code".into(),
            text: "Statement".into(),
            subject: "Subj".into(),
            grade: "Grade Level".into(),
            ..ColumnMap::default()
        };
        let cat = parse_framework(src.as_bytes(), &schema).unwrap();
        assert_eq!(cat.los()[0].grade, 1);
        assert_eq!(cat.los()[0].subject_name, "Mathematics");
    }

    #[test]
    fn stats_for_7431() {
        // 7431 * 7430
        let n: u64 = 7431;
        assert_eq!(n * (n - 1), 55_212_330);
    }

    fn arb_lo() -> impl Strategy<Value = LearningOutcome> {
        (
            prop::sample::select(vec!["BIO", "CCI", "MAT", "XYZ"]),
            prop::collection::vec(0u32..30, 1..4),
            0u32..1000,
            "[a-zA-Z ,\"é]{1,30}",
            1u8..=12,
            prop::sample::select(Stream::ALL.to_vec()),
            prop::option::of(1u8..=3),
            "[a-z ]{0,8}",
        )
            .prop_map(|(subj, segs, serial, text, grade, stream, cycle, strand)| {
                let mut code = subj.to_string();
                for s in segs {
                    code.push_str(&format!(".{s:02}"));
                }
                code.push_str(&format!(".{serial:03}"));
                LearningOutcome {
                    code,
                    text: format!("x{}", text.trim()),
                    subject: subj.to_string(),
                    subject_name: format!("{subj} name"),
                    subject_type: SubjectType::GroupA,
                    grade,
                    stream,
                    cycle,
                    domain_label: String::new(),
                    strand_label: strand.trim().to_string(),
                    standard_label: String::new(),
                    standard_key: String::new(),
                }
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip(los in prop::collection::vec(arb_lo(), 0..20)) {
            let mut uniq = Vec::new();
            let mut seen = BTreeSet::new();
            for lo in los {
                if seen.insert(lo.code.clone()) { uniq.push(lo); }
            }
            let cat = FrameworkCatalog::from_los(uniq).unwrap();
            let mut buf = Vec::new();
            cat.write_csv(&mut buf).unwrap();
            let back = parse_framework(buf.as_slice(), &ColumnMap::default()).unwrap();
            prop_assert_eq!(back.los(), cat.los());
        }

        #[test]
        fn same_standard_iff_prefix_equal(
            a in prop::collection::vec(0u8..4, 2..5),
            b in prop::collection::vec(0u8..4, 2..5),
        ) {
            let code = |v: &[u8]| {
                let mut s = "ABC".to_string();
                for x in v { s.push_str(&format!(".{x:02}")); }
                s
            };
            let (ca, cb) = (code(&a), code(&b));
            prop_assume!(ca != cb);
            let (pa, pb) = (parse_lo_code(&ca).unwrap(), parse_lo_code(&cb).unwrap());
            let prefix_equal = a.len() == b.len() && a[..a.len() - 1] == b[..b.len() - 1];
            prop_assert_eq!(pa.standard_key == pb.standard_key, prefix_equal);
        }

        #[test]
        fn stats_match_recount(los in prop::collection::vec(arb_lo(), 0..30)) {
            let mut uniq = Vec::new();
            let mut seen = BTreeSet::new();
            for lo in los {
                if seen.insert(lo.code.clone()) { uniq.push(lo); }
            }
            let cat = FrameworkCatalog::from_los(uniq.clone()).unwrap();
            let s = catalog_stats(&cat);
            let subjects: BTreeSet<_> = uniq.iter().map(|l| l.subject.clone()).collect();
            let standards: BTreeSet<_> = cat.los().iter().map(|l| l.standard_key.clone()).collect();
            prop_assert_eq!(s.n_los, uniq.len());
            prop_assert_eq!(s.n_subjects, subjects.len());
            prop_assert_eq!(s.n_standards, standards.len());
            prop_assert_eq!(s.per_subject_counts.values().sum::<usize>(), uniq.len());
            let sg: usize = cat.subject_grade_index().values().map(Vec::len).sum();
            prop_assert_eq!(sg, uniq.len());
            let n = uniq.len() as u64;
            prop_assert_eq!(s.ordered_pair_count, n * n.saturating_sub(1));
        }
    }
}
