use varqte::experiment::{
    csv_header, manifest_path, preset, run, run_to_files, RunManifest, RunStatus,
};
use varqte::{EvolutionKind, OdeKind, SolverKind};

fn euler(name: &str, kind: EvolutionKind, n: usize) -> varqte::EvolutionConfig {
    let mut cfg = preset(name).unwrap();
    cfg.evolution = kind;
    cfg.solver = SolverKind::Euler { n_steps: n };
    cfg
}

#[test]
fn euler_rows_are_accepted_steps_only() {
    let out = run(&euler("illustrative", EvolutionKind::Real, 40)).unwrap();
    assert_eq!(out.rows.len(), 40);
    for (k, row) in out.rows.iter().enumerate() {
        assert!((row.t - (k + 1) as f64 / 40.0).abs() < 1e-12);
        assert!((row.step_size - 0.025).abs() < 1e-15);
        assert!(row.zeta.is_none() && row.chi.is_none());
        assert!(row.fidelity_bound_rigorous <= row.fidelity_bound_paper);
    }
}

#[test]
fn epsilon_is_monotone_and_clipped() {
    for (name, kind) in [
        ("illustrative", EvolutionKind::Real),
        ("ising", EvolutionKind::Imag),
    ] {
        let mut cfg = preset(name).unwrap();
        cfg.evolution = kind;
        let out = run(&cfg).unwrap();
        let mut prev = 0.0;
        for row in &out.rows {
            assert!(row.epsilon >= prev, "{name}: ε decreased at t = {}", row.t);
            assert!(row.epsilon_clipped <= std::f64::consts::SQRT_2);
            assert_eq!(
                row.epsilon_clipped,
                row.epsilon.min(std::f64::consts::SQRT_2)
            );
            prev = row.epsilon;
        }
    }
}

#[test]
fn imaginary_time_bound_fields_present() {
    let out = run(&euler("hydrogen", EvolutionKind::Imag, 10)).unwrap();
    for row in &out.rows {
        let (z, x) = (row.zeta.unwrap(), row.chi.unwrap());
        assert!(z >= 0.0 && x.is_finite());
    }
}

#[test]
fn variational_energy_descends_in_imaginary_time() {
    for name in ["illustrative", "ising", "hydrogen"] {
        let mut cfg = preset(name).unwrap();
        cfg.evolution = EvolutionKind::Imag;
        cfg.ode = OdeKind::Standard;
        let out = run(&cfg).unwrap();
        for pair in out.rows.windows(2) {
            assert!(
                pair[1].energy_prepared <= pair[0].energy_prepared + 1e-7,
                "{name} at t = {}",
                pair[1].t
            );
        }
    }
}

#[test]
fn reference_energy_conserved_in_real_time() {
    // The reference trajectory used for scoring is unitary.
    let mut cfg = preset("hydrogen").unwrap();
    cfg.evolution = EvolutionKind::Real;
    cfg.ode = OdeKind::Standard;
    let out = run(&cfg).unwrap();
    let e0 = out.rows[0].energy_exact;
    for row in &out.rows {
        assert!((row.energy_exact - e0).abs() < 1e-10);
    }
}

#[test]
fn files_and_manifest() {
    let dir = std::env::temp_dir().join(format!("varqte-exp-{}", std::process::id()));
    let csv = dir.join("nested").join("hyd.csv");
    let out = run_to_files(&euler("hydrogen", EvolutionKind::Imag, 5), &csv).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), csv_header(out.n_params).join(","));
    assert_eq!(lines.count(), 5);
    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(manifest_path(&csv)).unwrap()).unwrap();
    assert_eq!(manifest.status, RunStatus::Ok);
    assert_eq!(manifest.summary.steps_accepted, 5);
    assert_eq!(manifest.seed, 7);
    assert_eq!(manifest.initial_params, out.manifest.initial_params);
    assert!((manifest.ground_energy - (-1.1455990)).abs() < 1e-6);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_errors_are_reported_before_running() {
    let mut cfg = preset("ising").unwrap();
    cfg.solver = SolverKind::Euler { n_steps: 0 };
    assert!(run(&cfg).is_err());
    let mut cfg = preset("ising").unwrap();
    cfg.solver = SolverKind::Rk54 {
        rel_tol: -1.0,
        abs_tol: 1e-8,
    };
    assert!(run(&cfg).is_err());
}
