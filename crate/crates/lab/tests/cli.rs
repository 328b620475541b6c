use std::process::{Command, Output};

fn typnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_typnet")).args(args).output().unwrap()
}

fn json(out: &[u8]) -> serde_json::Value {
    serde_json::from_slice(out).unwrap()
}

#[test]
fn bounds_prints_a_report() {
    let out =
        typnet(&["bounds", "fc", "--d0", "3", "--teacher", "2,1", "--student", "5,1", "--q", "3", "--eps", "0.1"]);
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert!((v["c_hat"].as_f64().unwrap() - 14.0 * 3f64.ln()).abs() < 1e-9);
    assert_eq!(v["n_required"], 265);
    let out = typnet(&[
        "bounds",
        "scn",
        "--teacher",
        "1,1",
        "--student",
        "1,2",
        "--kernels",
        "2",
        "--input-len",
        "2",
        "--q",
        "3",
    ]);
    // Teacher head width 1: (1 + 1) + 2*1*1 + 2*2.
    let v = json(&out.stdout);
    assert_eq!(v["inputs"]["PC"], 8.0);
    assert!((v["c_hat"].as_f64().unwrap() - 8.0 * 3f64.ln()).abs() < 1e-9);
}

#[test]
fn failures_map_to_exit_codes() {
    let out = typnet(&[
        "bounds",
        "fc",
        "--d0",
        "3",
        "--teacher",
        "2,1",
        "--student",
        "5,1",
        "--q",
        "3",
        "--eps",
        "0.1",
        "--delta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = json(&out.stderr);
    assert_eq!(err["error"], "validation");
    assert!(err["message"].as_str().unwrap().contains("(0, 1/5)"));

    let out = typnet(&["gnc", "--preset", "tiny-fc-line", "--n-train", "30", "--max-draws", "1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out.stderr)["error"], "budget");

    let out = typnet(&["gnc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gnc_is_reproducible_and_saves_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.csv");
    let args = ["gnc", "--preset", "tiny-fc-line", "--n-train", "12", "--seed", "5", "--workers", "2"];
    let a = typnet(&[&args[..], &["--save-data", data.to_str().unwrap()]].concat());
    assert!(a.status.success());
    let b = typnet(&args.iter().map(|s| if *s == "2" { "1" } else { s }).collect::<Vec<_>>());
    assert_eq!(a.stdout, b.stdout);
    let rec = json(&a.stdout);
    assert_eq!(rec["T"], rec["n_draws"]);
    assert_eq!(rec["estimate"], 0.0);
    let (set, meta) = typnet::formats::read_labeled_set(&data).unwrap();
    assert_eq!((set.len(), meta.seed), (12, Some(5)));
}

#[test]
fn oracle_and_experiment_commands() {
    let out = typnet(&["oracle", "--preset", "tiny-fc"]);
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert_eq!(v["M"], 7);
    assert!(v["p_hat_exact"].as_f64().unwrap() >= v["p_tilde_exact"].as_f64().unwrap());

    let dir = tempfile::tempdir().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/solve-teacher-resnet18.json");
    let out = typnet(&["experiment", "run", cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["solve-teacher.csv", "solve-teacher.json", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(json(&out.stdout)["kind"], "solve-teacher");
}
