use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// Directory holding the built static library (`target/<profile>`).
fn lib_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_parses_as_c() {
    let header = crate_dir().join("include/lefrac.h");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
        .unwrap();
    assert!(status.success());
}

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "lefrac.h"

int main(void) {
    LefracParams p = { 15, 1, 7, 1, 10, 0.8 };
    double u, v, d;
    bool exists;
    if (lefrac_equilibrium(&p, &u, &v) != LEFRAC_STATUS_OK || u != 3.0 || v != 10.0) return 10;
    if (lefrac_critical_order(&p, &d, &exists) != LEFRAC_STATUS_OK || !exists || fabs(d - 0.990177) > 1e-4) return 11;
    if (lefrac_gamma(-1.0, &d) != LEFRAC_STATUS_INVALID_ARGUMENT || lefrac_last_error() == NULL) return 12;

    const char *cfg = "{ \"params\": { \"a\": 15, \"b\": 1, \"sigma\": 7, \"d1\": 1, \"d2\": 10, \"delta\": 0.8 },"
                      "  \"geometry\": { \"dim\": 1, \"lengths\": [20], \"counts\": [41] },"
                      "  \"time\": { \"t_end\": 1, \"dt\": 0.01 }, \"ic\": { \"kind\": \"sinusoidal\" } }";
    char *report = NULL;
    if (lefrac_analyze_json(cfg, &report) != LEFRAC_STATUS_OK || strstr(report, "\"Stable\"") == NULL) return 13;
    lefrac_string_free(report);

    LefracSim *sim = NULL;
    uint64_t seed = 3;
    if (lefrac_sim_new(cfg, &seed, &sim) != LEFRAC_STATUS_OK) return 14;
    if (lefrac_sim_step(sim, 100) != LEFRAC_STATUS_OK) return 15;
    double t, fu[41], fv[41];
    size_t steps, nodes;
    if (lefrac_sim_info(sim, &t, &steps, &nodes) != LEFRAC_STATUS_OK || steps != 100 || nodes != 41) return 16;
    if (lefrac_sim_copy_fields(sim, fu, fv, 41) != LEFRAC_STATUS_OK) return 17;
    lefrac_sim_free(sim);
    printf("%.6f %.6f\n", fu[20], fv[20]);
    return 0;
}
"#;

fn link_libs() -> &'static [&'static str] {
    &["-lpthread", "-ldl", "-lm"]
}

#[test]
fn c_program_links_against_static_library() {
    let lib = lib_dir().join("liblefrac_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = tmp.path().join("main");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(crate_dir().join("include"))
        .arg(&src)
        .arg(&lib)
        .args(link_libs())
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(Path::new(&exe)).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let printed = String::from_utf8(run.stdout).unwrap();
    let vals: Vec<f64> = printed.split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert!(vals.len() == 2 && vals.iter().all(|x| x.is_finite() && *x > 0.0));
}
