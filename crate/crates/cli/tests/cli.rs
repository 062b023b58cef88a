use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn instab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_instab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn table_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = instab(&[
        "table",
        "--scenario",
        "s1",
        "--iterations",
        "2",
        "--k-max",
        "6",
        "--bootstraps",
        "5",
        "--methods",
        "gap,model-free-normalized",
        "--out",
        out,
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let csv = lines(&dir.path().join("table.csv"));
    assert_eq!(csv.len(), 3);
    assert!(csv[0].starts_with("scenario,method,iterations,errors,2,3,"));
    assert!(csv[0].ends_with(",19,20+"));
    for row in &csv[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        let total: usize = cells[4..].iter().map(|c| c.parse::<usize>().unwrap()).sum();
        let errors: usize = cells[3].parse().unwrap();
        assert_eq!(total + errors, 2);
    }
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("table.json")).unwrap()).unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), 4);
    assert_eq!(json["config"]["iterations"], 2);
}

#[test]
fn csv_format_skips_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = instab(&[
        "table",
        "--scenario",
        "s1",
        "--iterations",
        "1",
        "--k-max",
        "4",
        "--methods",
        "jump",
        "--format",
        "csv",
        "--out",
        out,
    ]);
    assert_eq!(code(&run), 0);
    assert!(dir.path().join("table.csv").exists());
    assert!(!dir.path().join("table.json").exists());
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "iterations = 5\nk_max = 5\nmethods = [\"slope\"]\nscenarios = [\"elongated-3\"]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let run = instab(&[
        "table",
        "--config",
        cfg.to_str().unwrap(),
        "--iterations",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let csv = lines(&out.join("table.csv"));
    assert!(csv[1].starts_with("elongated-3,slope,1,0,"));
}

#[test]
fn select_runs_every_method_on_user_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("points.csv");
    let mut text = String::from("x,y\n");
    for (cx, cy) in [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)] {
        for i in 0..15 {
            let dx = (i % 4) as f64 * 0.1;
            let dy = (i / 4) as f64 * 0.1;
            text.push_str(&format!("{},{}\n", cx + dx, cy + dy));
        }
    }
    fs::write(&data, text).unwrap();
    let run = instab(&[
        "select",
        "--data",
        data.to_str().unwrap(),
        "--k-max",
        "6",
        "--bootstraps",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let rows = lines(&dir.path().join("selection.csv"));
    assert_eq!(rows[0], "method,k_hat,error");
    assert_eq!(rows.len(), 9);
    let normalized = rows.iter().find(|r| r.starts_with("model-based-normalized,")).unwrap();
    assert_eq!(normalized, "model-based-normalized,3,");
}

#[test]
fn path_chance_jump_and_converge_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        code(&instab(&[
            "path",
            "--scenario",
            "s1",
            "--k-min",
            "2",
            "--k-max",
            "2",
            "--bootstraps",
            "4",
            "--out",
            out
        ])),
        0
    );
    let paths = lines(&dir.path().join("paths.csv"));
    assert_eq!(paths[0], "k,method,raw_mean,normalized_mean,raw_sd,degenerate_count");
    assert_eq!(paths.len(), 3);

    assert_eq!(
        code(&instab(&["chance-curve", "--k-max", "4", "--draws", "3", "--out", out])),
        0
    );
    let chance = lines(&dir.path().join("chance_curve.csv"));
    assert_eq!(chance[0], "k,kind,index,value");
    assert_eq!(chance.len(), 1 + 3 * (3 + 5));

    assert_eq!(
        code(&instab(&[
            "jump-paths",
            "--scenario",
            "s1",
            "--iterations",
            "1",
            "--k-max",
            "4",
            "--out",
            out
        ])),
        0
    );
    let jump = lines(&dir.path().join("jump_paths.csv"));
    assert_eq!(jump[0], "kind,iteration,k,distortion,jump,degenerate");
    assert_eq!(jump.iter().filter(|l| l.starts_with("path,")).count(), 3);

    assert_eq!(
        code(&instab(&["converge", "--scenario", "s1", "--b-max", "1", "--out", out])),
        0
    );
    let conv = lines(&dir.path().join("convergence.csv"));
    assert_eq!(
        conv,
        [
            "b,mode,running_mean,difference",
            "1,model-based,0,0",
            "1,model-free,0,0"
        ]
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&instab(&["--help"])), 0);
    assert_eq!(code(&instab(&["table", "--methods", "silhouette", "--out", out])), 1);
    assert_eq!(code(&instab(&["table", "--iterations", "0", "--out", out])), 1);
    assert_eq!(code(&instab(&["table", "--bogus-flag"])), 1);
    assert_eq!(code(&instab(&["table", "--config", "/does/not/exist.toml"])), 1);
    assert_eq!(
        code(&instab(&["select", "--data", "/does/not/exist.csv", "--out", out])),
        2
    );

    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "1,2\n3\n4,5\n").unwrap();
    assert_eq!(
        code(&instab(&["select", "--data", ragged.to_str().unwrap(), "--out", out])),
        2
    );
}
