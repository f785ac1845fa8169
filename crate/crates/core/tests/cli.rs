use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_privfunnel"))
}

#[test]
fn validate_example1_passes() {
    let out = bin()
        .args(["validate-example1", "--eps", "0.01,0.05"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 3);
    assert!(stdout.starts_with("epsilon,utility_algorithm1"));
}

#[test]
fn validate_example1_rejects_bad_input() {
    for eps in ["0.5", "abc", "-0.01"] {
        let out = bin()
            .args(["validate-example1", "--eps", eps])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(2), "eps {eps}");
    }
}

#[test]
fn gen_writes_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("joint.txt");
    let run = |p: &std::path::Path| {
        bin()
            .args(["gen", "--s", "4", "--x", "7", "--seed", "12", "--out"])
            .arg(p)
            .status()
            .unwrap()
    };
    assert!(run(&path).success());
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(' ').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == 7));
    let total: f64 = rows.iter().flatten().sum();
    assert!((total - 1.0).abs() < 1e-12);

    let again = dir.path().join("again.txt");
    assert!(run(&again).success());
    assert_eq!(text, fs::read_to_string(&again).unwrap());
}

#[test]
fn sweep_writes_csv_and_reports_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    let rows = dir.path().join("out.csv");
    fs::write(
        &cfg,
        format!(
            "s_size = 2\nx_size = 3\nnum_instances = 2\nseed = 1\nepsilons = 0.02,0.06\n\
             refinement = 2\nrefinement_last = 4\nepsilon_end = 0.3\noutput = {}\n",
            rows.display()
        ),
    )
    .unwrap();
    let status = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(&rows).unwrap().lines().count(),
        1 + 2 * 3 * 2 * 2
    );
    assert!(dir.path().join("out_mean.csv").exists());

    fs::write(&cfg, "delta = 2\n").unwrap();
    let status = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args(["sweep", "--config"])
        .arg(dir.path().join("missing.cfg"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    assert_eq!(bin().arg("bogus").status().unwrap().code(), Some(2));
}
