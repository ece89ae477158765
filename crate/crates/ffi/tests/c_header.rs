//! Compiles a C program against the generated header and the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "marketgen.h"

int main(void) {
    MgCatalog *catalog = NULL;
    MgScene *scene = NULL;
    MgGrid *grid = NULL;
    MgEpisodes *eps = NULL;
    MgReport *report = NULL;
    MgRobot robot = mg_robot_default();
    MgAgent oracle = { false, 0.0, 1.0, 0 };
    double sr = 0.0, spl = 0.0;

    if (mg_scene_generate(NULL, NULL, 0, &scene) != MG_STATUS_NULL_POINTER) return 10;
    if (strlen(mg_last_error()) == 0) return 11;
    if (mg_catalog_synth(3, 200, 30, &catalog) != MG_STATUS_OK) return 12;
    if (mg_scene_generate(NULL, catalog, 3, &scene) != MG_STATUS_OK) return 13;
    if (mg_grid_rasterize(scene, mg_default_cell_size(), robot.radius, &grid) != MG_STATUS_OK) return 14;
    if (mg_episodes_sample(scene, grid, MG_TRACK_IN_AISLE_COLLECTION, 3, 1, robot, &eps) != MG_STATUS_OK) return 15;
    if (mg_evaluate(scene, grid, eps, oracle, robot, &report) != MG_STATUS_OK) return 16;
    if (mg_report_sr(report, MG_TRACK_IN_AISLE_COLLECTION, &sr) != MG_STATUS_OK || sr != 1.0) return 17;
    if (mg_report_spl(report, MG_TRACK_IN_AISLE_COLLECTION, &spl) != MG_STATUS_OK || spl != 1.0) return 18;
    printf("episodes=%zu sr=%.3f spl=%.3f\n", mg_episodes_count(eps), sr, spl);

    mg_report_free(report);
    mg_episodes_free(eps);
    mg_grid_free(grid);
    mg_scene_free(scene);
    mg_catalog_free(catalog);
    return 0;
}
"#;

fn profile_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc")
        .arg("--version")
        .output()
        .is_ok_and(|o| o.status.success())
}

#[test]
fn header_compiles_as_c_and_cxx() {
    if !have_cc() {
        eprintln!("no C compiler on PATH; skipping");
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(
        &src,
        "#include \"marketgen.h\"\nint main(void) { return mg_last_error() == 0; }\n",
    )
    .unwrap();
    for lang in ["c", "c++"] {
        let out = Command::new("cc")
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg("-I")
            .arg(&include)
            .arg(&src)
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_runs_the_pipeline() {
    let lib = profile_dir().join("libmarketgen_ffi.a");
    if !have_cc() || !lib.is_file() {
        eprintln!("no C compiler or static library at {}; skipping", lib.display());
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("prog.c");
    let bin = dir.path().join("prog");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror"])
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "link failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(
        String::from_utf8_lossy(&run.stdout).trim(),
        "episodes=3 sr=1.000 spl=1.000"
    );
}
