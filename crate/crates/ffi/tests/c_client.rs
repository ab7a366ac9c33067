//! Compiles and runs a small C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "loalign.h"

int main(int argc, char **argv) {
    if (argc < 2) return 64;
    LoCatalog *cat = NULL;
    if (lo_catalog_load(argv[1], &cat) != LO_STATUS_OK) {
        fprintf(stderr, "load: %s\n", lo_last_error());
        return 1;
    }
    printf("n=%zu pairs=%llu\n", lo_catalog_len(cat), (unsigned long long)lo_catalog_pair_count(cat));

    LoAnalysis *an = NULL;
    if (lo_analysis_run(cat, NULL, &an) != LO_STATUS_OK) {
        fprintf(stderr, "run: %s\n", lo_last_error());
        return 2;
    }
    char *csv = NULL;
    if (lo_analysis_matrix_csv(an, &csv) != LO_STATUS_OK) return 3;
    printf("%s", csv);
    lo_string_free(csv);

    if (lo_catalog_load(NULL, &cat) != LO_STATUS_NULL_ARGUMENT) return 4;
    if (lo_last_error() == NULL) return 5;

    lo_analysis_free(an);
    lo_catalog_free(cat);
    printf("version %s\n", lo_version());
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test-binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libloalign_ffi.a");
    assert!(lib.is_file(), "static library not built at {}", lib.display());

    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("client.c");
    let exe = tmp.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .expect("C compiler available");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let (cat, _) = loalign::synth::asymmetric_fixture();
    let csv = tmp.path().join("catalog.csv");
    let mut buf = Vec::new();
    cat.write_csv(&mut buf).unwrap();
    std::fs::write(&csv, buf).unwrap();

    let run = Command::new(&exe).arg(&csv).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.starts_with("n=7 pairs=42\n"), "{stdout}");
    assert!(stdout.contains("version 0.1.0"), "{stdout}");
}
