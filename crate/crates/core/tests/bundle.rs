mod common;

use std::collections::BTreeSet;

use loalign::pipeline::{parse_programs, PipelineConfig};
use loalign::runstore::{export_dashboard_bundle, RunSnapshot};
use loalign::synth::asymmetric_fixture;
use loalign::textprep::{default_stopwords, tokenize_catalog};
use loalign::topics::ctfidf_keywords;
use serde_json::Value;

fn snapshot() -> RunSnapshot {
    let (cat, asg) = asymmetric_fixture();
    let docs = tokenize_catalog(&cat, &default_stopwords("en").unwrap());
    let kw = ctfidf_keywords(&asg, &docs, 5).unwrap();
    let programs = parse_programs("[programs.arts]\nB = \"5-7\"\n").unwrap();
    RunSnapshot::from_parts("fixture", PipelineConfig::default(), cat, asg, kw, programs).unwrap()
}

#[test]
fn two_subject_bundle_layout_and_contents() {
    let snap = snapshot();
    let tmp = tempfile::tempdir().unwrap();
    let written: BTreeSet<String> = export_dashboard_bundle(&snap, tmp.path()).unwrap().into_iter().collect();
    let tree = common::read_tree(tmp.path());
    assert_eq!(written, tree.keys().cloned().collect());

    let mut expected: BTreeSet<String> = [
        "index.json",
        "filters.json",
        "heatmap.json",
        "heatmap/cycle-2.json",
        "heatmap/stream-Main.json",
        "heatmap/program-arts.json",
        "topics/0.json",
        "topics/1.json",
        "topics/2.json",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    for (a, b) in [("A", "A"), ("A", "B"), ("B", "A"), ("B", "B")] {
        for f in ["grades.json", "topics.json", "los/page-1.json"] {
            expected.insert(format!("pairs/{a}/{b}/{f}"));
        }
    }
    // shared topics per pair: A/A 0, A/B 0, B/A 0, B/B 2
    for (a, b, t) in [("A", "A", 0), ("A", "B", 0), ("B", "A", 0), ("B", "B", 2)] {
        expected.insert(format!("pairs/{a}/{b}/los/topic-{t}/page-1.json"));
    }
    for lo in snap.catalog.los() {
        expected.insert(format!("los/{}.json", lo.code));
    }
    assert_eq!(written, expected);

    let heatmap = String::from_utf8(tree["heatmap.json"].clone()).unwrap();
    assert!(heatmap.contains(r#""cells":[[50.00,50.00],[33.33,66.67]]"#), "{heatmap}");

    let rows: Value = serde_json::from_slice(&tree["pairs/A/B/los/page-1.json"]).unwrap();
    let pairs: Vec<(&str, &str)> = rows["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["a"]["code"].as_str().unwrap(), r["b"]["code"].as_str().unwrap()))
        .collect();
    assert_eq!(pairs, [("A.1.1.01.001", "B.1.1.01.001"), ("A.1.1.01.002", "B.1.1.01.001")]);
    assert_eq!(rows["total"], 2);

    let outlier: Value = serde_json::from_slice(&tree["los/A.1.1.03.001.json"]).unwrap();
    assert!(outlier["topic"].is_null());
    assert_eq!(outlier["matches"].as_array().unwrap().len(), 0);

    let index: Value = serde_json::from_slice(&tree["index.json"]).unwrap();
    assert_eq!(index["run_id"], "fixture");
    assert_eq!(index["routes"]["/api/v1/pairs/A/B/los?page=1"], "pairs/A/B/los/page-1.json");
    assert_eq!(index["routes"].as_object().unwrap().len(), expected.len() - 1);
}

#[test]
fn program_heatmap_only_covers_program_subjects() {
    let snap = snapshot();
    let tmp = tempfile::tempdir().unwrap();
    export_dashboard_bundle(&snap, tmp.path()).unwrap();
    let v: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("heatmap/program-arts.json")).unwrap()).unwrap();
    assert_eq!(v["labels"], serde_json::json!(["B"]));
    // B grades 5-7 are all of B: diagonal is 2 of 3
    let raw = std::fs::read_to_string(tmp.path().join("heatmap/program-arts.json")).unwrap();
    assert!(raw.contains(r#""cells":[[66.67]]"#), "{raw}");
}
