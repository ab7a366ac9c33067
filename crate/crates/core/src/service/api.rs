//! Read-only JSON API over one run snapshot.
//!
//! [`respond`] is a pure function of the snapshot and the request target; the
//! HTTP server and the static bundle writer both go through it, which is what
//! keeps served bodies and bundle files byte-identical.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::alignment::{
    grade_matrix, hclust_subjects, lo_pairs, shared_topics, subject_matrix, AlignError, Merge, Pct,
    Scope,
};
use crate::catalog::{LearningOutcome, Stream};
use crate::runstore::RunSnapshot;

pub const PREFIX: &str = "/api/v1";
pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const MAX_PAGE_SIZE: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiResponse {
    pub status: u16,
    /// Compact JSON.
    pub body: Vec<u8>,
}

impl ApiResponse {
    fn ok<T: Serialize>(value: &T) -> Self {
        ApiResponse {
            status: 200,
            body: serde_json::to_vec(value).expect("response types serialize"),
        }
    }
}

/// A request that cannot be answered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApiError {
    /// 400: the query or path could not be parsed.
    Malformed(String),
    /// 404: no such route or LO code.
    NotFound(String),
    /// 405: only GET and HEAD are served.
    Method(String),
    /// 422: well-formed but unknown subject, topic or filter value.
    Unknown(String),
}

impl ApiError {
    pub fn status(&self) -> u16 {
        match self {
            ApiError::Malformed(_) => 400,
            ApiError::NotFound(_) => 404,
            ApiError::Method(_) => 405,
            ApiError::Unknown(_) => 422,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ApiError::Malformed(_) => "malformed_request",
            ApiError::NotFound(_) => "not_found",
            ApiError::Method(_) => "method_not_allowed",
            ApiError::Unknown(_) => "unknown_value",
        }
    }

    fn message(&self) -> &str {
        match self {
            ApiError::Malformed(m) | ApiError::NotFound(m) | ApiError::Method(m) | ApiError::Unknown(m) => m,
        }
    }
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    run_id: &'a str,
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    status: u16,
    kind: &'a str,
    message: &'a str,
}

/// Answers `method target`, where `target` is the path plus optional query.
pub fn respond(snap: &RunSnapshot, method: &str, target: &str) -> ApiResponse {
    match route(snap, method, target) {
        Ok(r) => r,
        Err(e) => ApiResponse {
            status: e.status(),
            body: serde_json::to_vec(&ErrorDoc {
                run_id: &snap.run_id,
                error: ErrorBody {
                    status: e.status(),
                    kind: e.kind(),
                    message: e.message(),
                },
            })
            .expect("error document serializes"),
        },
    }
}

/// Query parameters of one request. Empty values count as absent.
struct Query {
    params: BTreeMap<String, String>,
}

impl Query {
    fn parse(raw: &str, allowed: &[&str]) -> Result<Self, ApiError> {
        let mut params = BTreeMap::new();
        for (k, v) in form_urlencoded::parse(raw.as_bytes()) {
            if !allowed.contains(&k.as_ref()) {
                return Err(ApiError::Malformed(format!("unexpected query parameter `{k}`")));
            }
            if params.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ApiError::Malformed(format!("query parameter `{k}` given twice")));
            }
        }
        params.retain(|_, v| !v.trim().is_empty());
        Ok(Query { params })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(|v| v.trim())
    }

    fn int<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ApiError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| ApiError::Malformed(format!("`{key}` must be an integer, got `{v}`")))
            })
            .transpose()
    }
}

fn route(snap: &RunSnapshot, method: &str, target: &str) -> Result<ApiResponse, ApiError> {
    if method != "GET" && method != "HEAD" {
        return Err(ApiError::Method(format!("{method} is not supported; the API is read-only")));
    }
    let (path, query) = target.split_once('?').unwrap_or((target, ""));
    let not_found = || ApiError::NotFound(format!("no route for `{path}`"));
    let rest = path
        .strip_prefix(PREFIX)
        .and_then(|r| r.strip_prefix('/'))
        .ok_or_else(not_found)?;
    let segments: Vec<String> = rest
        .trim_end_matches('/')
        .split('/')
        .map(|s| percent_encoding::percent_decode_str(s).decode_utf8_lossy().into_owned())
        .collect();
    let segs: Vec<&str> = segments.iter().map(String::as_str).collect();
    match segs.as_slice() {
        ["filters"] => {
            Query::parse(query, &[])?;
            Ok(ApiResponse::ok(&filters(snap)))
        }
        ["heatmap"] => heatmap(snap, &Query::parse(query, &["cycle", "stream", "program"])?),
        ["pairs", a, b, "grades"] => {
            Query::parse(query, &[])?;
            pair_grades(snap, a, b)
        }
        ["pairs", a, b, "topics"] => {
            Query::parse(query, &[])?;
            pair_topics(snap, a, b)
        }
        ["pairs", a, b, "los"] => pair_los(
            snap,
            a,
            b,
            &Query::parse(query, &["topic", "grade", "min_match_pct", "page", "page_size"])?,
        ),
        ["topics", id] => {
            Query::parse(query, &[])?;
            topic_detail(snap, id)
        }
        ["los", code, "matches"] => {
            Query::parse(query, &[])?;
            lo_matches(snap, code)
        }
        _ => Err(not_found()),
    }
}

#[derive(Serialize)]
struct SubjectInfo<'a> {
    code: &'a str,
    name: &'a str,
    #[serde(rename = "type")]
    subject_type: &'a str,
    n_los: usize,
    grades: BTreeSet<u8>,
}

#[derive(Serialize)]
struct ProgramInfo<'a> {
    name: &'a str,
    entries: Vec<ProgramEntryInfo<'a>>,
}

#[derive(Serialize)]
struct ProgramEntryInfo<'a> {
    subject: &'a str,
    grade_min: u8,
    grade_max: u8,
}

#[derive(Serialize)]
struct Filters<'a> {
    run_id: &'a str,
    cycles: &'a BTreeSet<u8>,
    streams: &'a BTreeSet<Stream>,
    programs: Vec<ProgramInfo<'a>>,
    subjects: Vec<SubjectInfo<'a>>,
    grades: &'a BTreeSet<u8>,
    n_los: usize,
    n_topics: usize,
}

fn filters(snap: &RunSnapshot) -> Filters<'_> {
    let cat = &snap.catalog;
    let subjects = cat
        .subjects()
        .map(|s| {
            let idx = cat.indices_of_subject(s);
            let first = &cat.los()[idx[0]];
            SubjectInfo {
                code: s,
                name: &first.subject_name,
                subject_type: first.subject_type.as_str(),
                n_los: idx.len(),
                grades: idx.iter().map(|&i| cat.los()[i].grade).collect(),
            }
        })
        .collect();
    let programs = snap
        .programs
        .values()
        .map(|p| ProgramInfo {
            name: &p.name,
            entries: p
                .entries
                .iter()
                .map(|e| ProgramEntryInfo {
                    subject: &e.subject,
                    grade_min: *e.grades.start(),
                    grade_max: *e.grades.end(),
                })
                .collect(),
        })
        .collect();
    Filters {
        run_id: &snap.run_id,
        cycles: &snap.facets.cycles,
        streams: &snap.facets.streams,
        programs,
        subjects,
        grades: &snap.facets.grades,
        n_los: cat.len(),
        n_topics: snap.assignment.k(),
    }
}

#[derive(Serialize)]
struct HeatmapFilter<'a> {
    cycle: Option<u8>,
    stream: Option<Stream>,
    program: Option<&'a str>,
}

#[derive(Serialize)]
struct Heatmap<'a> {
    run_id: &'a str,
    filter: HeatmapFilter<'a>,
    /// Row `r`, column `c`: share of row subject's outcomes matched in the column subject.
    labels: Vec<String>,
    cells: Vec<Vec<Option<Pct>>>,
    n_los: Vec<usize>,
    /// Dendrogram leaf order over `labels` (identity below two subjects).
    leaf_order: Vec<String>,
    merges: Vec<Merge>,
}

fn heatmap(snap: &RunSnapshot, q: &Query) -> Result<ApiResponse, ApiError> {
    let mut scope = Scope::all();
    let mut filter = HeatmapFilter {
        cycle: None,
        stream: None,
        program: None,
    };
    if let Some(c) = q.int::<u8>("cycle")? {
        if !snap.facets.cycles.contains(&c) {
            return Err(ApiError::Unknown(format!("unknown cycle {c}")));
        }
        scope.cycles = Some([c].into());
        filter.cycle = Some(c);
    }
    if let Some(s) = q.get("stream") {
        let stream = s
            .parse::<Stream>()
            .ok()
            .filter(|st| snap.facets.streams.contains(st))
            .ok_or_else(|| ApiError::Unknown(format!("unknown stream `{s}`")))?;
        scope.streams = Some([stream].into());
        filter.stream = Some(stream);
    }
    if let Some(p) = q.get("program") {
        let (name, program) = snap
            .programs
            .get_key_value(p)
            .ok_or_else(|| ApiError::Unknown(format!("unknown program `{p}`")))?;
        scope.program = Some(program.clone());
        filter.program = Some(name);
    }
    let cfg = snap.config.match_options();
    let (matrix, n_los) = match subject_matrix(&snap.analytics.matches, &snap.catalog, &scope, cfg) {
        Ok(m) => {
            let n = m
                .row_labels
                .iter()
                .map(|s| {
                    snap.catalog
                        .indices_of_subject(s)
                        .iter()
                        .filter(|&&i| scope.contains(&snap.catalog.los()[i]))
                        .count()
                })
                .collect();
            (Some(m), n)
        }
        Err(AlignError::EmptyScope) => (None, Vec::new()),
        Err(e) => unreachable!("subject matrix over a valid scope: {e}"),
    };
    let body = match matrix {
        Some(m) => {
            let (leaf_order, merges) = match hclust_subjects(&m) {
                Ok(d) => (d.leaf_order, d.merges),
                Err(_) => (m.row_labels.clone(), Vec::new()),
            };
            Heatmap {
                run_id: &snap.run_id,
                filter,
                labels: m.row_labels,
                cells: m.cells,
                n_los,
                leaf_order,
                merges,
            }
        }
        None => Heatmap {
            run_id: &snap.run_id,
            filter,
            labels: Vec::new(),
            cells: Vec::new(),
            n_los,
            leaf_order: Vec::new(),
            merges: Vec::new(),
        },
    };
    Ok(ApiResponse::ok(&body))
}

fn check_subjects(snap: &RunSnapshot, a: &str, b: &str) -> Result<(), ApiError> {
    for s in [a, b] {
        if !snap.catalog.has_subject(s) {
            return Err(ApiError::Unknown(format!("unknown subject `{s}`")));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PairGrades<'a> {
    run_id: &'a str,
    subject_a: &'a str,
    subject_b: &'a str,
    /// Row grade of A, column grade of B; null where either grade is absent.
    grades: Vec<u8>,
    cells: Vec<Vec<Option<Pct>>>,
}

fn pair_grades(snap: &RunSnapshot, a: &str, b: &str) -> Result<ApiResponse, ApiError> {
    check_subjects(snap, a, b)?;
    let m = grade_matrix(&snap.analytics.matches, &snap.catalog, a, b, snap.config.match_options())
        .map_err(|e| ApiError::Unknown(e.to_string()))?;
    Ok(ApiResponse::ok(&PairGrades {
        run_id: &snap.run_id,
        subject_a: a,
        subject_b: b,
        grades: (1..=12).collect(),
        cells: m.cells,
    }))
}

#[derive(Serialize)]
struct TopicCount<'a> {
    topic: i32,
    keywords: Vec<&'a str>,
    count: u32,
    count_a: u32,
    count_b: u32,
}

#[derive(Serialize)]
struct PairTopics<'a> {
    run_id: &'a str,
    subject_a: &'a str,
    subject_b: &'a str,
    topics: Vec<TopicCount<'a>>,
}

fn pair_topics(snap: &RunSnapshot, a: &str, b: &str) -> Result<ApiResponse, ApiError> {
    check_subjects(snap, a, b)?;
    let topics = shared_topics(&snap.analytics.matches, &snap.catalog, a, b)
        .into_iter()
        .map(|s| TopicCount {
            topic: s.topic,
            keywords: snap.keywords.terms(s.topic),
            count: s.count,
            count_a: s.count_a,
            count_b: s.count_b,
        })
        .collect();
    Ok(ApiResponse::ok(&PairTopics {
        run_id: &snap.run_id,
        subject_a: a,
        subject_b: b,
        topics,
    }))
}

#[derive(Serialize)]
struct LoRef<'a> {
    code: &'a str,
    grade: u8,
    text: &'a str,
}

impl<'a> From<&'a LearningOutcome> for LoRef<'a> {
    fn from(lo: &'a LearningOutcome) -> Self {
        LoRef {
            code: &lo.code,
            grade: lo.grade,
            text: &lo.text,
        }
    }
}

#[derive(Serialize)]
struct PairRow<'a> {
    a: LoRef<'a>,
    b: LoRef<'a>,
    topic: i32,
    keywords: Vec<&'a str>,
    /// Grade-pair cell of the drill-down this row belongs to.
    match_pct: Option<Pct>,
}

#[derive(Serialize)]
struct PairLosFilter {
    topic: Option<i32>,
    grade: Option<u8>,
    min_match_pct: Option<f64>,
}

#[derive(Serialize)]
struct PairLos<'a> {
    run_id: &'a str,
    subject_a: &'a str,
    subject_b: &'a str,
    filter: PairLosFilter,
    page: usize,
    page_size: usize,
    total: usize,
    pages: usize,
    rows: &'a [PairRow<'a>],
}

/// The complete, unpaged row list for a pair under the given filters.
fn pair_rows<'s>(
    snap: &'s RunSnapshot,
    a: &str,
    b: &str,
    filter: &PairLosFilter,
) -> Result<Vec<PairRow<'s>>, ApiError> {
    let ms = &snap.analytics.matches;
    let cat = &snap.catalog;
    let gm = grade_matrix(ms, cat, a, b, snap.config.match_options()).map_err(|e| ApiError::Unknown(e.to_string()))?;
    let rows = lo_pairs(ms, cat, a, b)
        .into_iter()
        .filter(|p| filter.topic.is_none_or(|t| t == p.topic))
        .filter(|p| filter.grade.is_none_or(|g| cat.los()[p.a].grade == g))
        .map(|p| {
            let (la, lb) = (&cat.los()[p.a], &cat.los()[p.b]);
            PairRow {
                a: la.into(),
                b: lb.into(),
                topic: p.topic,
                keywords: snap.keywords.terms(p.topic),
                match_pct: gm.cells[usize::from(la.grade) - 1][usize::from(lb.grade) - 1],
            }
        })
        .filter(|r| {
            filter
                .min_match_pct
                .is_none_or(|m| r.match_pct.is_some_and(|p| p.value() >= m))
        })
        .collect();
    Ok(rows)
}

fn pair_los(snap: &RunSnapshot, a: &str, b: &str, q: &Query) -> Result<ApiResponse, ApiError> {
    check_subjects(snap, a, b)?;
    let topic = q.int::<i32>("topic")?;
    if let Some(t) = topic {
        if t < 0 || snap.analytics.matches.members(t).is_empty() {
            return Err(ApiError::Unknown(format!("unknown topic {t}")));
        }
    }
    let grade = q.int::<u8>("grade")?;
    if let Some(g) = grade {
        if !(1..=12).contains(&g) {
            return Err(ApiError::Unknown(format!("unknown grade {g}")));
        }
    }
    let min_match_pct = q
        .get("min_match_pct")
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| ApiError::Malformed(format!("`min_match_pct` must be a number, got `{v}`")))
        })
        .transpose()?;
    if let Some(m) = min_match_pct {
        if !(0.0..=100.0).contains(&m) {
            return Err(ApiError::Unknown(format!("min_match_pct {m} is outside 0-100")));
        }
    }
    let page = q.int::<usize>("page")?.unwrap_or(1);
    let page_size = q.int::<usize>("page_size")?.unwrap_or(DEFAULT_PAGE_SIZE);
    if page == 0 || page_size == 0 {
        return Err(ApiError::Malformed("`page` and `page_size` start at 1".into()));
    }
    if page_size > MAX_PAGE_SIZE {
        return Err(ApiError::Unknown(format!("page_size {page_size} exceeds {MAX_PAGE_SIZE}")));
    }
    let filter = PairLosFilter {
        topic,
        grade,
        min_match_pct,
    };
    let rows = pair_rows(snap, a, b, &filter)?;
    let total = rows.len();
    let start = (page - 1).saturating_mul(page_size).min(total);
    let end = start.saturating_add(page_size).min(total);
    Ok(ApiResponse::ok(&PairLos {
        run_id: &snap.run_id,
        subject_a: a,
        subject_b: b,
        filter,
        page,
        page_size,
        total,
        pages: total.div_ceil(page_size),
        rows: &rows[start..end],
    }))
}

#[derive(Serialize)]
struct KeywordDoc<'a> {
    term: &'a str,
    score: f64,
}

#[derive(Serialize)]
struct CellCount<'a> {
    subject: &'a str,
    grade: u8,
    count: u32,
}

#[derive(Serialize)]
struct TopicDetail<'a> {
    run_id: &'a str,
    topic: i32,
    size: u32,
    n_subjects: usize,
    keywords: Vec<KeywordDoc<'a>>,
    counts: Vec<CellCount<'a>>,
}

fn topic_detail(snap: &RunSnapshot, id: &str) -> Result<ApiResponse, ApiError> {
    let t: i32 = id
        .parse()
        .map_err(|_| ApiError::Malformed(format!("topic id must be an integer, got `{id}`")))?;
    let dist = &snap.analytics.distribution;
    let by_subject = dist
        .counts
        .get(&t)
        .ok_or_else(|| ApiError::Unknown(format!("unknown topic {t}")))?;
    let counts = by_subject
        .iter()
        .flat_map(|(s, grades)| {
            grades.iter().map(move |(&g, &c)| CellCount {
                subject: s,
                grade: g,
                count: c,
            })
        })
        .collect();
    let keywords = snap
        .keywords
        .topics
        .get(&t)
        .map(|v| v.iter().map(|k| KeywordDoc { term: &k.term, score: k.score }).collect())
        .unwrap_or_default();
    Ok(ApiResponse::ok(&TopicDetail {
        run_id: &snap.run_id,
        topic: t,
        size: dist.topic_size(t),
        n_subjects: dist.subject_support(t),
        keywords,
        counts,
    }))
}

#[derive(Serialize)]
struct MatchRef<'a> {
    code: &'a str,
    subject: &'a str,
    grade: u8,
    text: &'a str,
}

#[derive(Serialize)]
struct LoMatches<'a> {
    run_id: &'a str,
    code: &'a str,
    subject: &'a str,
    grade: u8,
    text: &'a str,
    /// `null` for outliers, which have no matches.
    topic: Option<i32>,
    keywords: Vec<&'a str>,
    matches: Vec<MatchRef<'a>>,
}

fn lo_matches(snap: &RunSnapshot, code: &str) -> Result<ApiResponse, ApiError> {
    let cat = &snap.catalog;
    let i = cat
        .index_of(code)
        .ok_or_else(|| ApiError::NotFound(format!("unknown LO code `{code}`")))?;
    let lo = &cat.los()[i];
    let t = snap.analytics.matches.topic(i);
    let matches = snap
        .analytics
        .matches
        .matches_of(i)
        .map(|j| {
            let m = &cat.los()[j];
            MatchRef {
                code: &m.code,
                subject: &m.subject,
                grade: m.grade,
                text: &m.text,
            }
        })
        .collect();
    Ok(ApiResponse::ok(&LoMatches {
        run_id: &snap.run_id,
        code: &lo.code,
        subject: &lo.subject,
        grade: lo.grade,
        text: &lo.text,
        topic: (t >= 0).then_some(t),
        keywords: snap.keywords.terms(t),
        matches,
    }))
}
