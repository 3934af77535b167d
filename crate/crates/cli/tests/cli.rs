use std::fs;
use std::path::Path;
use std::process::Command;

fn diqft(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_diqft"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_into(dir: &Path, args: &[&str]) -> std::process::Output {
    let mut all = args.to_vec();
    all.extend(["--out-dir", dir.to_str().unwrap()]);
    diqft(&all)
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn every_command_is_byte_for_byte_reproducible() {
    let runs: [&[&str]; 6] = [
        &["fidelity", "--q-range", "8-9", "--thresholds", "2,4,exact"],
        &["epr"],
        &["eta", "--protocol", "teledata"],
        &["epsilon"],
        &["gamma", "--gamma-denominator", "all-cp"],
        &[
            "verify",
            "--p-range",
            "1-3",
            "--q-range",
            "1-2",
            "--seeds",
            "2",
        ],
    ];
    for args in runs {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert!(run_into(a.path(), args).status.success(), "{args:?}");
        assert!(run_into(b.path(), args).status.success(), "{args:?}");
        let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
        assert!(!sa.is_empty());
        assert_eq!(sa, sb, "{args:?}");
    }
}

#[test]
fn seed_changes_simulated_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["fidelity", "--q-range", "6", "--thresholds", "2"];
    run_into(a.path(), &args);
    run_into(b.path(), &[&args[..], &["--seed", "7"]].concat());
    assert_ne!(snapshot(a.path()), snapshot(b.path()));
}

#[test]
fn config_file_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        "p_range = [2, 3]\nq_range = \"4-5\"\nthresholds = [\"exact\", 2]\ngamma_denominator = \"all-cp\"\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = diqft(&[
        "gamma",
        "--config",
        cfg.to_str().unwrap(),
        "--q-range",
        "4",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let text = fs::read_to_string(out.join("gamma_heatmap.csv")).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(
        lines[0],
        "qubits_per_node,nodes,gamma_unbounded,gamma_t2,denominator_mode"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("4,2,") && lines[1].ends_with(",all-cp"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // configuration errors
    assert_eq!(
        run_into(dir.path(), &["epr", "--p-range", "5-2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run_into(dir.path(), &["epr", "--thresholds", "0"])
            .status
            .code(),
        Some(2)
    );
    let over = run_into(dir.path(), &["fidelity", "--q-range", "23"]);
    assert_eq!(over.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&over.stderr).contains("max-qubits"));
    let bad_file = dir.path().join("bad.toml");
    fs::write(&bad_file, "frobnicate = 1\n").unwrap();
    assert_eq!(
        run_into(dir.path(), &["eta", "--config", bad_file.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    // verification failure
    let fault = run_into(
        dir.path(),
        &[
            "verify",
            "--p-range",
            "2",
            "--q-range",
            "3",
            "--thresholds",
            "exact",
            "--seeds",
            "1",
            "--inject-fault",
        ],
    );
    assert_eq!(fault.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fault.stderr).contains("FAIL P=2 Q=3"));
    // success
    assert_eq!(
        run_into(dir.path(), &["epsilon", "--p-range", "1-2"])
            .status
            .code(),
        Some(0)
    );
}
