//! Compiles a small C program against the generated header and static library.

use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let lib_dir = tmp.parent().unwrap().join(if cfg!(debug_assertions) { "debug" } else { "release" });
    let lib = lib_dir.join("libmeaning_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let src = tmp.join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "meaning.h"
int main(int argc, char **argv) {
    MeaningScenario *scn = NULL;
    if (meaning_scenario_from_path(argv[1], &scn) != MEANING_STATUS_OK) return 10;
    size_t n = 0;
    if (meaning_scenario_language_size(scn, NULL, &n) != MEANING_STATUS_OK) return 11;
    MeaningScenario *bad = NULL;
    if (meaning_scenario_from_yaml("states: [", &bad) != MEANING_STATUS_PARSE) return 12;
    if (meaning_last_error() == NULL) return 13;
    meaning_scenario_free(scn);
    printf("%zu\n", n);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe)
        .arg(manifest.join("../core/scenarios/v3.yaml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "6");
}
