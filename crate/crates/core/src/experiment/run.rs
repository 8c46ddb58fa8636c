use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::output::{write_csv, CsvRow};
use super::EvolutionConfig;
use crate::bounds::{clip_report, fidelity_bound_rigorous, fidelity_bound_unsquared};
use crate::error::{Error, Result};
use crate::evolution::{integrate_joint, BoundSettings, JointSystem, StepRecord};
use crate::oracle::{bures, fidelity, ExactEvolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
    pub flagged_evals: usize,
    pub final_t: f64,
    pub final_epsilon: f64,
    pub final_epsilon_clipped: f64,
    pub final_bures: f64,
    pub final_energy_prepared: f64,
    pub final_energy_exact: f64,
    pub max_e_norm: f64,
    pub wall_time_s: f64,
}

/// JSON sidecar describing a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: EvolutionConfig,
    pub seed: u64,
    pub initial_params: Vec<f64>,
    pub h_norm: f64,
    pub ground_energy: f64,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub summary: RunSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub n_params: usize,
    pub rows: Vec<CsvRow>,
    pub records: Vec<StepRecord>,
    pub manifest: RunManifest,
    pub failure: Option<Error>,
}

/// Integrates the configured system and scores every accepted step against exact evolution.
///
/// Configuration problems are returned as `Err`; an aborted integration
/// still yields the rows produced so far, with `failure` set.
pub fn run(config: &EvolutionConfig) -> Result<RunOutput> {
    let started = Instant::now();
    config.check()?;
    let h = config.hamiltonian.resolve()?;
    let ansatz = config.ansatz.build()?;
    let omega0 = config
        .initial
        .resolve(ansatz.n_qubits(), ansatz.n_params())?;
    let system = JointSystem {
        ansatz: ansatz.clone(),
        h: h.clone(),
        kind: config.evolution,
        ode: config.ode,
        solver: config.linear_solver,
        bounds: BoundSettings {
            fd_delta: config.fd_delta,
            grid_points: config.grid_points,
            h_norm: h.spectral_norm(config.norm_mode)?,
        },
    };
    let exact = ExactEvolver::new(&h)?;
    let psi0 = ansatz.prepare(&omega0)?;

    let traj = integrate_joint(&system, &omega0, config.t_final, config.solver)?;
    let mut failure = traj.failure;
    let mut rows = Vec::with_capacity(traj.records.len());
    for r in &traj.records {
        let row = score(&system, &exact, &psi0, r);
        match row {
            Ok(row) => rows.push(row),
            Err(e) => {
                failure.get_or_insert(e);
                break;
            }
        }
    }
    let records = traj.records[..rows.len()].to_vec();

    let last = rows.last();
    let summary = RunSummary {
        steps_accepted: rows.len(),
        steps_rejected: traj.stats.rejected,
        rhs_evals: traj.stats.rhs_evals,
        flagged_evals: traj.flagged_evals,
        final_t: last.map_or(0.0, |r| r.t),
        final_epsilon: last.map_or(0.0, |r| r.epsilon),
        final_epsilon_clipped: last.map_or(0.0, |r| r.epsilon_clipped),
        final_bures: last.map_or(0.0, |r| r.bures_actual),
        final_energy_prepared: last.map_or(f64::NAN, |r| r.energy_prepared),
        final_energy_exact: last.map_or(f64::NAN, |r| r.energy_exact),
        max_e_norm: rows.iter().map(|r| r.e_norm).fold(0.0, f64::max),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        seed: config.initial.seed,
        initial_params: omega0,
        h_norm: system.bounds.h_norm,
        ground_energy: exact.ground_energy(),
        status: if failure.is_some() {
            RunStatus::Failed
        } else {
            RunStatus::Ok
        },
        failure: failure.as_ref().map(|e| e.to_string()),
        summary,
        csv: None,
    };
    Ok(RunOutput {
        n_params: ansatz.n_params(),
        rows,
        records,
        manifest,
        failure,
    })
}

fn score(
    system: &JointSystem,
    exact: &ExactEvolver,
    psi0: &crate::pauli::Statevector,
    r: &StepRecord,
) -> Result<CsvRow> {
    let psi = system.ansatz.prepare(&r.omega)?;
    let psi_exact = exact.evolve(psi0, r.t, system.kind)?;
    let eps = r.epsilon;
    Ok(CsvRow {
        t: r.t,
        omega: r.omega.clone(),
        e_norm: r.eval.e_norm,
        epsilon: eps,
        epsilon_clipped: clip_report(eps),
        zeta: r.eval.bound.map(|b| b.zeta),
        chi: r.eval.bound.map(|b| b.chi),
        energy_prepared: r.eval.energy,
        energy_exact: exact.energy(&psi_exact)?,
        variance_prepared: r.eval.variance,
        bures_actual: bures(&psi, &psi_exact)?,
        fidelity_actual: fidelity(&psi, &psi_exact)?,
        fidelity_bound_rigorous: fidelity_bound_rigorous(eps),
        fidelity_bound_paper: fidelity_bound_unsquared(eps),
        step_size: r.step,
        fq_condition: r.eval.fq_condition,
    })
}

/// Sidecar path: `run.csv` becomes `run.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Runs and writes the CSV plus its manifest. Rows produced before an
/// integration failure are still written.
pub fn run_to_files(config: &EvolutionConfig, csv_path: &Path) -> Result<RunOutput> {
    let mut out = run(config)?;
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(
        BufWriter::new(File::create(csv_path)?),
        out.n_params,
        &out.rows,
    )?;
    out.manifest.csv = Some(csv_path.to_path_buf());
    let json = serde_json::to_string_pretty(&out.manifest)?;
    std::fs::write(manifest_path(csv_path), json + "\n")?;
    Ok(out)
}
