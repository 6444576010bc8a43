//! End-to-end runs of the `centromesh` binary: exit codes, file outputs,
//! determinism, and the seed precedence chain.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_centromesh"));
    cmd.env_remove("CENTROMESH_SEED");
    cmd
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("cfg.json");
    fs::write(&path, body).unwrap();
    path
}

fn base_config(out_dir: &Path) -> String {
    format!(
        r#"{{
  "grid": {{ "nx": 3, "ny": 3, "nz": 4, "hx": 0.5, "hy": 0.3333333333333333, "hz": 0.25 }},
  "bc": {{
    "x_min": {{ "type": "neumann", "value": {{ "random": {{ "min": -1.0, "max": 1.0 }} }} }},
    "y_min": {{ "type": "neumann", "value": {{ "constant": 0.5 }} }},
    "x_max": {{ "value": {{ "constant": 2.0 }} }},
    "y_max": {{ "value": {{ "constant": 2.0 }} }},
    "z_min": {{ "value": {{ "table": [
      {{ "i": 0, "j": 0, "k": 0, "value": 1.0 }}, {{ "i": 1, "j": 0, "k": 0, "value": 1.0 }},
      {{ "i": 2, "j": 0, "k": 0, "value": 1.0 }}, {{ "i": 0, "j": 1, "k": 0, "value": 1.0 }},
      {{ "i": 1, "j": 1, "k": 0, "value": 1.0 }}, {{ "i": 2, "j": 1, "k": 0, "value": 1.0 }},
      {{ "i": 0, "j": 2, "k": 0, "value": 1.0 }}, {{ "i": 1, "j": 2, "k": 0, "value": 1.0 }},
      {{ "i": 2, "j": 2, "k": 0, "value": 1.0 }}
    ] }} }},
    "z_max": {{ "value": {{ "constant": 1.0 }} }}
  }},
  "rho": {{ "random": {{ "min": -2.0, "max": 2.0 }} }},
  "seed": 7,
  "out_dir": "{}",
  "bench_sizes": [64, 128]
}}"#,
        out_dir.display()
    )
}

fn report_field(out_dir: &Path, key: &str) -> serde_json::Value {
    let text = fs::read_to_string(out_dir.join("report.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json[key].clone()
}

#[test]
fn paper_example_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let output = bin()
            .args(["paper-example", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "{output:?}");
    }
    for name in [
        "A_centrosymmetric.mtx",
        "A_centrosymmetric.csv",
        "A_classical.mtx",
        "A_classical.csv",
        "verdicts.json",
    ] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs between reruns");
    }
    let verdicts: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_a.join("verdicts.json")).unwrap()).unwrap();
    assert_eq!(verdicts["centrosymmetric"]["centrosymmetric"], true);
    assert_eq!(verdicts["classical"]["centrosymmetric"], false);
    assert_eq!(verdicts["n_total"], 36);
    assert_eq!(verdicts["n_half"], 18);
}

#[test]
fn paper_example_dumps_interior_rows() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args([
            "paper-example",
            "--out",
            dir.path().to_str().unwrap(),
            "--dump-rows",
            "interior",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    let interior: Vec<&str> = stdout.lines().filter(|l| l.starts_with("row ")).collect();
    assert_eq!(interior.len(), 2, "{stdout}");
    for line in interior {
        assert!(line.contains(":-58"), "{line}");
        assert!(line.contains("stencil/0 folds"), "{line}");
    }

    let output = bin()
        .args([
            "paper-example",
            "--out",
            dir.path().to_str().unwrap(),
            "--dump-rows",
            "all",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("row ")).count(), 36);
}

#[test]
fn solve_writes_solution_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write_config(dir.path(), &base_config(&out));
    let output = bin()
        .args(["solve", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let solution = fs::read_to_string(out.join("solution.txt")).unwrap();
    assert_eq!(solution.lines().count(), 36);
    assert_eq!(report_field(&out, "solver"), "centro");
    assert_eq!(report_field(&out, "rank"), 36);
    assert_eq!(report_field(&out, "seed"), 7);
    assert_eq!(report_field(&out, "pass"), true);
    assert_eq!(report_field(&out, "storage_ratio"), 2.0);
    let residual = report_field(&out, "relative_residual").as_f64().unwrap();
    assert!(residual <= 1e-10, "residual {residual}");
}

#[test]
fn solve_seed_precedence_flag_env_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write_config(dir.path(), &base_config(&out));
    let cfg_arg = cfg.to_str().unwrap();
    let out_arg = |suffix: &str| dir.path().join(suffix);

    // Config seed.
    let o1 = bin()
        .args(["solve", "--config", cfg_arg, "--out"])
        .arg(out_arg("c"))
        .output()
        .unwrap();
    assert_eq!(o1.status.code(), Some(0));
    assert_eq!(report_field(&out_arg("c"), "seed"), 7);

    // Environment beats config.
    let o2 = bin()
        .args(["solve", "--config", cfg_arg, "--out"])
        .arg(out_arg("e"))
        .env("CENTROMESH_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(o2.status.code(), Some(0));
    assert_eq!(report_field(&out_arg("e"), "seed"), 99);

    // Flag beats environment.
    let o3 = bin()
        .args(["solve", "--config", cfg_arg, "--seed", "123", "--out"])
        .arg(out_arg("f"))
        .env("CENTROMESH_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(o3.status.code(), Some(0));
    assert_eq!(report_field(&out_arg("f"), "seed"), 123);

    // Same seed, same bytes; different seed, different solution.
    let o4 = bin()
        .args(["solve", "--config", cfg_arg, "--seed", "123", "--out"])
        .arg(out_arg("f2"))
        .output()
        .unwrap();
    assert_eq!(o4.status.code(), Some(0));
    let sol_f = fs::read(out_arg("f").join("solution.txt")).unwrap();
    let sol_f2 = fs::read(out_arg("f2").join("solution.txt")).unwrap();
    let sol_c = fs::read(out_arg("c").join("solution.txt")).unwrap();
    assert_eq!(sol_f, sol_f2);
    assert_ne!(sol_f, sol_c);
    let bad_env = bin()
        .args(["solve", "--config", cfg_arg])
        .env("CENTROMESH_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn solve_with_dense_solver_and_blocks_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write_config(dir.path(), &base_config(&out));
    let output = bin()
        .args([
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--solver",
            "dense",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    assert_eq!(report_field(&out, "solver"), "dense");

    let output = bin()
        .args([
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--export-blocks",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(out.join("A.B.mtx").is_file());
    assert!(out.join("A.C.mtx").is_file());
}

#[test]
fn centro_solver_rejects_classically_numbered_systems() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg_text =
        base_config(&out).replacen("\"grid\":", "\"numbering\": \"classical\",\n  \"grid\":", 1);
    let cfg = write_config(dir.path(), &cfg_text);
    let output = bin()
        .args(["solve", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "{output:?}");
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("not centrosymmetric"), "{stderr}");
}

#[test]
fn check_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["paper-example", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));

    let centro = dir.path().join("A_centrosymmetric.mtx");
    let classical = dir.path().join("A_classical.mtx");
    let ok: Output = bin()
        .args(["check", "--matrix", centro.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let fail = bin()
        .args(["check", "--matrix", classical.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(1));
    let loose = bin()
        .args([
            "check",
            "--matrix",
            classical.to_str().unwrap(),
            "--tol",
            "100",
        ])
        .output()
        .unwrap();
    assert_eq!(loose.status.code(), Some(0));

    // Odd rank is an input-domain error, not a verdict.
    let odd = dir.path().join("odd.mtx");
    fs::write(
        &odd,
        "%%MatrixMarket matrix coordinate real general\n3 3 1\n1 1 1\n",
    )
    .unwrap();
    let odd_out = bin()
        .args(["check", "--matrix", odd.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(odd_out.status.code(), Some(2));
}

#[test]
fn bench_reports_the_storage_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let cfg = write_config(dir.path(), &base_config(&out));
    let output = bin()
        .args([
            "bench",
            "--config",
            cfg.to_str().unwrap(),
            "--sizes",
            "64,128",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("n_prime,nx,ny,nz,seed,dense_seconds,centro_seconds,time_ratio"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[10], "2", "storage ratio must be exactly 2.0: {row}");
    }
}

#[test]
fn mesh_dump_emits_the_node_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mesh");
    let cfg = write_config(dir.path(), &base_config(&out));
    let output = bin()
        .args(["mesh-dump", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let csv = fs::read_to_string(out.join("mesh.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "index,i,j,k,x,y,z,mirror_index");
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 36);
    // Mirroring is an involution and pairs complementary indices.
    for row in &rows {
        let index: usize = row[0].parse().unwrap();
        let mirror: usize = row[7].parse().unwrap();
        assert_eq!(index + mirror, 35);
        let back: usize = rows[mirror][7].parse().unwrap();
        assert_eq!(back, index);
    }
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin()
        .args(["solve", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let bad_json = write_config(dir.path(), "{ not json");
    let o = bin()
        .args(["solve", "--config", bad_json.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    let unknown_field = write_config(
        dir.path(),
        r#"{ "grid": { "nx": 3, "ny": 3, "nz": 4, "hx": 1, "hy": 1, "hz": 1 }, "typo": 1 }"#,
    );
    let o = bin()
        .args(["solve", "--config", unknown_field.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    let odd_nz = write_config(
        dir.path(),
        r#"{ "grid": { "nx": 3, "ny": 3, "nz": 5, "hx": 1, "hy": 1, "hz": 1 } }"#,
    );
    let o = bin()
        .args(["solve", "--config", odd_nz.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("odd"), "{stderr}");

    let asymmetric = write_config(
        dir.path(),
        r#"{ "grid": { "nx": 3, "ny": 3, "nz": 4, "hx": 1, "hy": 1, "hz": 1 },
            "bc": { "z_min": { "type": "neumann" } } }"#,
    );
    let o = bin()
        .args(["solve", "--config", asymmetric.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn all_neumann_solve_fails_numerically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{ "grid": {{ "nx": 3, "ny": 3, "nz": 4, "hx": 1, "hy": 1, "hz": 1 }},
                "bc": {{
                  "x_min": {{ "type": "neumann" }}, "x_max": {{ "type": "neumann" }},
                  "y_min": {{ "type": "neumann" }}, "y_max": {{ "type": "neumann" }},
                  "z_min": {{ "type": "neumann" }}, "z_max": {{ "type": "neumann" }}
                }},
                "out_dir": "{}" }}"#,
            out.display()
        ),
    );
    let o = bin()
        .args(["solve", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{o:?}");
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("singular"), "{stderr}");
}
