//! Compiles a small C program against the generated header and the static
//! library, then runs it. Skipped when no C compiler is installed.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "ctapf.h"

int main(void) {
    const char *json = "{\"map\": {\"width\": 3, \"height\": 3, \"obstacles\": []},"
                       " \"agents\": [[0,0]], \"tasks\": [{\"start\": [2,0], \"goal\": [2,2]}]}";
    CtapfProblem *p = NULL;
    if (ctapf_problem_from_json(json, &p) != CTAPF_STATUS_OK) return 10;
    CtapfSolution *s = NULL;
    if (ctapf_solve(p, CTAPF_SOLVER_TCBS, 0, 0, &s) != CTAPF_STATUS_OK) return 11;
    printf("%llu\n", (unsigned long long)ctapf_solution_total_cost(s));
    ctapf_solution_free(s);
    CtapfProblem *bad = NULL;
    if (ctapf_problem_from_json("[]", &bad) != CTAPF_STATUS_FORMAT || bad != NULL) return 12;
    if (ctapf_last_error() == NULL) return 13;
    ctapf_problem_free(p);
    return 0;
}
"#;

fn compiler() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .map(str::to_string)
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // Test binaries live in <target>/<profile>/deps; the library one level up.
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libctapf_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "4");
}
