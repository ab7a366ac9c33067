//! Static export of the API: one file per response, for hosting the
//! dashboard without a server.
//!
//! | target                                       | file                               |
//! |----------------------------------------------|------------------------------------|
//! | `/api/v1/filters`                            | `filters.json`                     |
//! | `/api/v1/heatmap`                            | `heatmap.json`                     |
//! | `/api/v1/heatmap?cycle=C` (one facet at a time) | `heatmap/cycle-C.json`          |
//! | `/api/v1/pairs/A/B/grades`                   | `pairs/A/B/grades.json`            |
//! | `/api/v1/pairs/A/B/topics`                   | `pairs/A/B/topics.json`            |
//! | `/api/v1/pairs/A/B/los?page=N`               | `pairs/A/B/los/page-N.json`        |
//! | `/api/v1/pairs/A/B/los?topic=T&page=N`       | `pairs/A/B/los/topic-T/page-N.json`|
//! | `/api/v1/topics/T`                           | `topics/T.json`                    |
//! | `/api/v1/los/CODE/matches`                   | `los/CODE.json`                    |
//!
//! `index.json` maps every target to its file. Filter combinations and
//! non-default page sizes are only available from the live server.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::api::{respond, PREFIX};
use crate::alignment::shared_topics;
use crate::runstore::{io_err, RunSnapshot, RunStoreError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleRoute {
    pub target: String,
    pub file: String,
}

fn push(out: &mut Vec<BundleRoute>, target: String, file: String) {
    out.push(BundleRoute {
        target: format!("{PREFIX}{target}"),
        file,
    });
}

fn page_count(snap: &RunSnapshot, target: &str) -> usize {
    let r = respond(snap, "GET", target);
    debug_assert_eq!(r.status, 200, "{target}");
    #[derive(serde::Deserialize)]
    struct Pages {
        pages: usize,
    }
    serde_json::from_slice::<Pages>(&r.body).map_or(1, |p| p.pages.max(1))
}

/// Every route the bundle covers, in a fixed order.
pub fn bundle_routes(snap: &RunSnapshot) -> Vec<BundleRoute> {
    let mut out = Vec::new();
    push(&mut out, "/filters".into(), "filters.json".into());
    push(&mut out, "/heatmap".into(), "heatmap.json".into());
    for c in &snap.facets.cycles {
        push(&mut out, format!("/heatmap?cycle={c}"), format!("heatmap/cycle-{c}.json"));
    }
    for s in &snap.facets.streams {
        push(&mut out, format!("/heatmap?stream={s}"), format!("heatmap/stream-{s}.json"));
    }
    for p in snap.programs.keys() {
        push(&mut out, format!("/heatmap?program={p}"), format!("heatmap/program-{p}.json"));
    }
    let subjects: Vec<&str> = snap.catalog.subjects().collect();
    for a in &subjects {
        for b in &subjects {
            let base = format!("/pairs/{a}/{b}");
            let dir = format!("pairs/{a}/{b}");
            push(&mut out, format!("{base}/grades"), format!("{dir}/grades.json"));
            push(&mut out, format!("{base}/topics"), format!("{dir}/topics.json"));
            let pages = page_count(snap, &format!("{PREFIX}{base}/los"));
            for n in 1..=pages {
                push(&mut out, format!("{base}/los?page={n}"), format!("{dir}/los/page-{n}.json"));
            }
            for st in shared_topics(&snap.analytics.matches, &snap.catalog, a, b) {
                let t = st.topic;
                let pages = page_count(snap, &format!("{PREFIX}{base}/los?topic={t}"));
                for n in 1..=pages {
                    push(
                        &mut out,
                        format!("{base}/los?topic={t}&page={n}"),
                        format!("{dir}/los/topic-{t}/page-{n}.json"),
                    );
                }
            }
        }
    }
    for t in snap.analytics.distribution.counts.keys() {
        push(&mut out, format!("/topics/{t}"), format!("topics/{t}.json"));
    }
    for lo in snap.catalog.los() {
        push(&mut out, format!("/los/{}/matches", lo.code), format!("los/{}.json", lo.code));
    }
    out
}

#[derive(Serialize)]
struct Index<'a> {
    run_id: &'a str,
    routes: BTreeMap<&'a str, &'a str>,
}

/// Writes the bundle under `dir` and returns the written files (relative).
pub fn write_bundle(snap: &RunSnapshot, dir: &Path) -> Result<Vec<String>, RunStoreError> {
    let routes = bundle_routes(snap);
    let mut files = Vec::with_capacity(routes.len() + 1);
    for r in &routes {
        let resp = respond(snap, "GET", &r.target);
        debug_assert_eq!(resp.status, 200, "{}", r.target);
        let path = dir.join(&r.file);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, &resp.body).map_err(io_err(&path))?;
        files.push(r.file.clone());
    }
    let index = Index {
        run_id: &snap.run_id,
        routes: routes.iter().map(|r| (r.target.as_str(), r.file.as_str())).collect(),
    };
    let path = dir.join("index.json");
    fs::write(&path, serde_json::to_vec(&index).expect("index serializes")).map_err(io_err(&path))?;
    files.push("index.json".into());
    Ok(files)
}
