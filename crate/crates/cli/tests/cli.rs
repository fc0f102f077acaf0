use std::path::Path;
use std::process::{Command, Output};

fn zani(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zani"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("ZANI_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path());
    stdout(&zani(&[
        "--seed", "3", "--out", out, "simulate", "--theta", "0.2,0.5,0.3", "--zeta", "0.1,0.2,0.3",
        "--n", "80", "--trials", "10",
    ]));
    let data = std::fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert!(data.starts_with("y1,y2,y3\n"));
    assert_eq!(csv_rows(&data).len(), 80);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("data.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["metadata"]["seed"], 3);
    assert_eq!(meta["trials"], 10);

    let data_path = dir.path().join("data.csv");
    let table = stdout(&zani(&[
        "--seed", "3", "--out", out, "fit", "--data", p(&data_path), "--model", "zanim",
        "--iterations", "300", "--burn-in", "100", "--thin", "2",
    ]));
    assert!(table.contains("theta_1"));
    let draws = std::fs::read_to_string(dir.path().join("draws.csv")).unwrap();
    assert!(draws.starts_with("# tool: zani"));
    assert!(draws.contains("# config_hash: sha256:"));
    let header = draws.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "iteration,theta_1,theta_2,theta_3,zeta_1,zeta_2,zeta_3");
    assert_eq!(csv_rows(&draws).len(), 100);
    let loglik = std::fs::read_to_string(dir.path().join("loglik.csv")).unwrap();
    assert_eq!(csv_rows(&loglik)[0].len(), 80);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summary"].as_array().unwrap().len(), 6);
    assert!(summary["elpd"]["elpd"].as_f64().unwrap().is_finite());
}

#[test]
fn simulated_means_match_the_moments() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&zani(&[
        "--seed", "11", "--out", p(dir.path()), "simulate", "--theta", "0.05,0.70,0.25",
        "--zeta", "0.05,0.15,0.10", "--n", "500", "--trials", "30",
    ]));
    let rows = csv_rows(&std::fs::read_to_string(dir.path().join("data.csv")).unwrap());
    let mean = [2.320, 18.496, 9.161];
    let var = [14.326, 69.178, 50.409];
    for j in 0..3 {
        let m = rows.iter().map(|r| r[j].parse::<f64>().unwrap()).sum::<f64>() / 500.0;
        let se = (var[j] / 500.0f64).sqrt();
        assert!((m - mean[j]).abs() < 3.0 * se, "column {j}: {m}");
    }
}

#[test]
fn certain_zeros_give_an_all_zero_dataset() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&zani(&[
        "--out", p(dir.path()), "simulate", "--theta", "0.5,0.5", "--zeta", "1,1", "--n", "5",
        "--trials", "4",
    ]));
    let data = std::fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert_eq!(data, "y1,y2\n0,0\n0,0\n0,0\n0,0\n0,0\n");
}

#[test]
fn baseline_fit_omits_zeta() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("counts.csv");
    std::fs::write(&data, "a,b,c\n1,2,3\n2,2,2\n4,1,1\n").unwrap();
    stdout(&zani(&[
        "--out", p(dir.path()), "fit", "--data", p(&data), "--model", "multinomial",
        "--iterations", "200", "--burn-in", "50", "--thin", "1",
    ]));
    let draws = std::fs::read_to_string(dir.path().join("draws.csv")).unwrap();
    assert!(!draws.contains("zeta"));
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(!summary.contains("zeta_1"));
}

#[test]
fn bad_dataset_cells_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(&data, "y1,y2\n1,2\n3,x\n").unwrap();
    let o = zani(&["--out", p(dir.path()), "fit", "--data", p(&data), "--model", "zanim"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 2, column 2"), "{}", stderr(&o));
}

#[test]
fn bad_parameters_exit_with_2() {
    let o = zani(&["eval", "moments", "--theta", "0.5,0.6", "--zeta", "0,0", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("theta"));
    let o = zani(&["eval", "moments", "--alpha", "1,2", "--zeta", "0,1.5", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("zeta[2]"));
}

#[test]
fn out_of_support_k_exits_with_2() {
    let o = zani(&["eval", "marginal", "--alpha", "1,2", "--zeta", "0.1,0.1", "--trials", "3", "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn paper_scale_needs_confirmation() {
    let dir = tempfile::tempdir().unwrap();
    let o = zani(&["--out", p(dir.path()), "study", "sampler-comparison", "--scale", "paper"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--confirm"), "{}", stderr(&o));
}

#[test]
fn unknown_flags_exit_with_2() {
    assert_eq!(zani(&["fit", "--bogus"]).status.code(), Some(2));
}

#[test]
fn pmf_of_all_zero_vector() {
    let text = stdout(&zani(&[
        "eval", "pmf", "--theta", "0.2,0.3,0.5", "--zeta", "0.5,0.5,0.5", "--y", "0,0,0", "--trials", "4",
    ]));
    let row = &csv_rows(&text)[0];
    assert!((row[1].parse::<f64>().unwrap() - 0.125).abs() < 1e-12);
}

#[test]
fn marginal_grid_sums_to_one() {
    let text = stdout(&zani(&[
        "eval", "marginal", "--alpha", "2,28,10", "--zeta", "0.05,0.15,0.10", "--trials", "30",
    ]));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3 * 31);
    for j in 1..=3 {
        let total: f64 = rows
            .iter()
            .filter(|r| r[0] == j.to_string())
            .map(|r| r[2].parse::<f64>().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-10, "category {j}: {total}");
    }
}

#[test]
fn moments_reproduce_the_reference_table() {
    let text = stdout(&zani(&[
        "eval", "moments", "--theta", "0.05,0.70,0.25", "--zeta", "0.05,0.15,0.10", "--trials", "30",
    ]));
    let rows = csv_rows(&text);
    let get = |stat: &str, j: &str, h: &str| -> f64 {
        rows.iter()
            .find(|r| r[0] == stat && r[1] == j && r[2] == h)
            .unwrap()[3]
            .parse()
            .unwrap()
    };
    assert!((get("mean", "2", "") - 18.496).abs() < 1e-3);
    assert!((get("dispersion_index", "1", "") - 6.174).abs() < 1e-3);
    assert!((get("zero_inflation_index", "3", "") - 0.749).abs() < 1e-3);
    assert!((get("covariance", "2", "3") + 52.346).abs() < 1e-3);
}

#[test]
fn mgf_at_zero_is_one() {
    let text = stdout(&zani(&[
        "eval", "mgf", "--theta", "0.5,0.5", "--zeta", "0.2,0.3", "--t", "0,0", "--trials", "7",
    ]));
    let row = &csv_rows(&text)[0];
    assert!(row[0].parse::<f64>().unwrap().abs() < 1e-12);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_zani"))
        .args(["simulate", "--alpha", "1,1", "--zeta", "0.1,0.1", "--n", "3", "--trials", "2"])
        .env("ZANI_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("data.csv").exists());
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    std::fs::write(&data, "y1,y2\n1,2\n0,3\n2,0\n").unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "model = \"zanidm\"\ndata = {:?}\n[mcmc]\niterations = 120\nburn_in = 20\nthin = 1\nalpha_sampler = \"mh-rw\"\n",
            p(&data)
        ),
    )
    .unwrap();
    stdout(&zani(&["--config", p(&cfg), "--out", p(dir.path()), "fit", "--thin", "2"]));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["iterations"], 120);
    assert_eq!(summary["config"]["thin"], 2);
    assert_eq!(summary["config"]["alpha_sampler"], "mh-rw");
    assert_eq!(summary["draws"], 50);
}
