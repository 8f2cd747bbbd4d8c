use std::process::{Command, Output};

fn tsqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsqc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = tsqc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn run_without_attack_decodes() {
    let text = stdout(&["run", "--alpha", "0.1", "--bit", "1", "--seed", "3"]);
    assert!(text.contains("sent bit 1, decoded bit 1"), "{text}");
    assert_eq!(text.matches("-> PASS").count(), 3);
    assert!(text.contains("no breach detected"));
}

#[test]
fn run_names_first_breach_stage() {
    let kv = stdout(&[
        "run",
        "--alpha",
        "0.05",
        "--g",
        "0.05",
        "--beta",
        "0.1",
        "--replace",
        "false",
        "--format",
        "kv",
    ]);
    assert!(kv.contains("breach_detected=true"));
    assert!(kv.contains("breach_stage=2\n"));
    assert!(kv.contains("final_good=625\n"));
    let text = stdout(&[
        "run",
        "--alpha",
        "0.05",
        "--g",
        "0.05",
        "--beta",
        "0.1",
        "--replace",
        "false",
    ]);
    assert!(text.contains("breach detected at stage 2 (bob)"));
}

#[test]
fn run_is_reproducible() {
    let args = [
        "run",
        "--seed",
        "42",
        "--beta",
        "0.1",
        "--tomography",
        "ml",
        "--split",
        "binomial",
        "--format",
        "kv",
    ];
    let a = tsqc(&args);
    let b = tsqc(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn table1_defaults() {
    let t = rows(&stdout(&["table1"]));
    assert_eq!(t[0][0], "alpha");
    assert_eq!(t[0][1], "beta_0.01");
    assert_eq!(t[0][10], "beta_0.1");
    assert_eq!(t.len(), 11);
    let cell: f64 = t[1][1].parse().unwrap();
    assert!((cell - 0.951).abs() < 1e-3);
    let row7 = &t[7];
    assert_eq!(row7[0], "0.07");
    assert_eq!(row7[1..].iter().filter(|c| !c.is_empty()).count(), 1);
    assert!((row7[1].parse::<f64>().unwrap() - 0.788).abs() < 1e-3);
}

#[test]
fn table1_rejects_g_one_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = tsqc(&["table1", "--g", "1.0", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!path.exists());
    assert!(out.stdout.is_empty());
}

#[test]
fn snr_curve_csv() {
    let t = rows(&stdout(&[
        "snr",
        "--alpha-min",
        "0.01",
        "--alpha-max",
        "0.5",
        "--steps",
        "50",
    ]));
    assert_eq!(t[0], ["alpha", "snr"]);
    let pts: Vec<(f64, f64)> = t[1..]
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(pts.len(), 50);
    assert!(pts.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn snr_curve_near_critical_fraction() {
    // 0.001 spacing; on a 0.01 grid the nearest point (0.21) sits 0.027 below 1
    let t = rows(&stdout(&[
        "snr",
        "--alpha-min",
        "0.01",
        "--alpha-max",
        "0.5",
        "--steps",
        "491",
    ]));
    let pts: Vec<(f64, f64)> = t[1..]
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    let nearest = pts
        .iter()
        .min_by(|a, b| (a.0 - 0.2062).abs().total_cmp(&(b.0 - 0.2062).abs()))
        .unwrap();
    assert!((nearest.1 - 1.0).abs() < 0.02, "{nearest:?}");
}

#[test]
fn snr_general_value() {
    let t = rows(&stdout(&[
        "snr", "--a1", "0.2", "--a2", "0.25", "--a3", "0.34",
    ]));
    assert_eq!(t[0], ["a1", "a2", "a3", "snr"]);
    let v: f64 = t[1][3].parse().unwrap();
    assert!((v - 0.6556).abs() < 5e-4);
}

#[test]
fn classify_commands() {
    assert_eq!(
        stdout(&["classify", "--kind", "bb84"]),
        "1-1-1 (no threshold property)\n"
    );
    assert!(
        stdout(&["classify", "--kind", "tsqc", "--p", "5", "--n", "30"]).starts_with("5-20-30\n")
    );
    let out = tsqc(&["classify", "--kind", "tsqc", "--p", "5", "--n", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn experiment_sweep_without_replacement() {
    let csv = stdout(&[
        "experiment",
        "--beta",
        "0.05",
        "--replace",
        "false",
        "--trials",
        "40",
        "--sweep",
        "beta",
        "--sweep-values",
        "0.05,0.1,0.15,0.2,0.25,0.3",
        "--seed",
        "9",
    ]);
    let t = rows(&csv);
    assert_eq!(
        t[0].join(","),
        "cell,detection_rate,detection_ci,decode_accuracy,mean_final_snr,eve_success_rate,trials"
    );
    let rates: Vec<f64> = t[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(rates.len(), 6);
    assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{rates:?}");
    assert_eq!(t[1][0], "beta=0.05");
}

#[test]
fn experiment_single_trial_has_empty_interval() {
    let t = rows(&stdout(&["experiment", "--trials", "1"]));
    assert_eq!(t[1][2], "");
    assert_eq!(t[1][4], "");
    assert_eq!(t[1][6], "1");
}

#[test]
fn experiment_is_byte_stable() {
    let args = [
        "experiment",
        "--trials",
        "200",
        "--beta",
        "0.1",
        "--tomography",
        "ml",
        "--seed",
        "5",
    ];
    assert_eq!(tsqc(&args).stdout, tsqc(&args).stdout);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("session.conf");
    std::fs::write(
        &cfg,
        "# stealth attack\nalpha = 0.1\nbeta = 0.2\nreplace = true\nformat = kv\nseed = 11\n",
    )
    .unwrap();
    let base = stdout(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(base.contains("stage2.expected=900.000\n"));
    assert!(base.contains("breach_detected=false"));
    let over = stdout(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--replace",
        "false",
    ]);
    assert!(over.contains("breach_detected=true"));

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(
        tsqc(&["run", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    let missing = dir.path().join("absent.conf");
    assert_eq!(
        tsqc(&["run", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn out_file_and_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snr.csv");
    let out = tsqc(&["snr", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        stdout(&["snr", "--out", "-"])
    );
}

#[test]
fn unwritable_output_is_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("no/such/dir/out.csv");
    assert_eq!(
        tsqc(&["snr", "--out", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn worked_example_csv() {
    let t = rows(&stdout(&[
        "worked-example",
        "--trials",
        "2000",
        "--seed",
        "1",
    ]));
    assert_eq!(t.len(), 4);
    assert_eq!(&t[1][..6], ["1", "20", "80", "20", "20", "0"]);
    assert_eq!(&t[2][..6], ["2", "25", "60", "40", "20", "5"]);
    assert_eq!(&t[3][4..7], ["20", "14", "1.42857"]);
}

#[test]
fn unknown_subcommand_is_config_error() {
    assert_eq!(tsqc(&["teleport"]).status.code(), Some(1));
}
