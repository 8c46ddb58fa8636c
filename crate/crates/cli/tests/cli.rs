use std::path::PathBuf;
use std::process::{Command, Output};

fn varqte(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varqte"))
        .args(args)
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("varqte-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn preset_prints_loadable_json() {
    let o = varqte(&["preset", "hydrogen"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["evolution"], "imag");
    assert_eq!(v["ode"], "argmin");
    assert_eq!(v["hamiltonian"]["preset"], "hydrogen");

    let dir = scratch("preset");
    let path = dir.join("h.json");
    std::fs::write(&path, stdout(&o)).unwrap();
    let o = varqte(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn unknown_preset_is_a_config_error() {
    assert_eq!(varqte(&["preset", "heisenberg"]).status.code(), Some(2));
    assert_eq!(
        varqte(&["run", "--preset", "heisenberg"]).status.code(),
        Some(2)
    );
    assert_eq!(varqte(&["run"]).status.code(), Some(2));
    assert_eq!(
        varqte(&[
            "run",
            "--preset",
            "ising",
            "--steps",
            "10",
            "--rel-tol",
            "1e-6"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        varqte(&["run", "--preset", "ising", "--t-final", "-1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn euler_run_to_stdout() {
    let o = varqte(&["run", "--preset", "illustrative", "--steps", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 21);
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header.len(), 1 + 8 + 14);
    assert_eq!(header[0], "t");
    let (zi, ci) = (
        header.iter().position(|h| *h == "zeta").unwrap(),
        header.iter().position(|h| *h == "chi").unwrap(),
    );
    for row in &lines[1..] {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), header.len());
        assert_eq!((f[zi], f[ci]), ("", ""));
    }
    let last_t: f64 = lines[20].split(',').next().unwrap().parse().unwrap();
    assert!((last_t - 1.0).abs() < 1e-12);
}

#[test]
fn imaginary_run_writes_csv_and_manifest() {
    let dir = scratch("imag");
    let csv = dir.join("run.csv");
    let o = varqte(&[
        "run",
        "--preset",
        "hydrogen",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let zi = header.iter().position(|h| *h == "zeta").unwrap();
    for row in text.lines().skip(1) {
        assert!(!row.split(',').nth(zi).unwrap().is_empty());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("run.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["seed"], 7);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn reruns_are_byte_identical() {
    let args = |seed: &'static str| {
        [
            "run",
            "--preset",
            "ising",
            "--evolution",
            "real",
            "--steps",
            "25",
            "--seed",
            seed,
        ]
    };
    let a = varqte(&args("3"));
    let b = varqte(&args("3"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = varqte(&args("4"));
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn unwritable_output_is_an_io_failure() {
    let o = varqte(&[
        "run",
        "--preset",
        "hydrogen",
        "--steps",
        "2",
        "--out",
        "/dev/null/run.csv",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validate_reports_duplicate_parameter() {
    let dir = scratch("dup");
    let path = dir.join("dup.json");
    std::fs::write(
        &path,
        r#"{
            "hamiltonian": {"pauli": "1.0 ZZ"},
            "ansatz": {"n_qubits": 2, "gates": [
                {"gate": "ry", "qubit": 0, "param": 0},
                {"gate": "ry", "qubit": 1, "param": 0}
            ]},
            "initial": {"params": [0.0]},
            "evolution": "real",
            "ode": "standard"
        }"#,
    )
    .unwrap();
    let o = varqte(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert!(text.contains("FAIL ansatz_invariants"), "{text}");
    assert!(
        text.contains("parameter 0 is used by both gate 0 and gate 1"),
        "{text}"
    );

    let o = varqte(&["validate", "--config", path.to_str().unwrap(), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"][0]["passed"], false);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = scratch("bad");
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"hamiltonian": {"preset": "ising"}, "bogus": 1}"#).unwrap();
    assert_eq!(
        varqte(&["run", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        varqte(&[
            "run",
            "--config",
            dir.join("missing.json").to_str().unwrap()
        ])
        .status
        .code(),
        Some(2)
    );
    std::fs::remove_dir_all(dir).unwrap();
}
