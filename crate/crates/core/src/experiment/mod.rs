//! Experiment configuration, the three reference presets, run orchestration
//! and self-validation.

mod output;
mod run;
pub mod validate;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::ansatz::{initial_parameters, AnsatzSpec, InitialPreset};
use crate::error::{Error, Result};
use crate::evolution::{OdeKind, SolverKind, SolverSettings};
use crate::mclachlan::EvolutionKind;
use crate::pauli::{NormMode, PauliSum};

pub use output::{csv_header, write_csv, CsvRow};
pub use run::{manifest_path, run, run_to_files, RunManifest, RunOutput, RunStatus, RunSummary};
pub use validate::{validate, Check, ValidationReport};

pub const DEFAULT_SEED: u64 = 7;
pub const PRESET_NAMES: [&str; 3] = ["illustrative", "ising", "hydrogen"];

/// Hamiltonian given by preset name or by inline Pauli text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianSpec {
    Preset { preset: String },
    Pauli { pauli: PauliSum },
}

impl HamiltonianSpec {
    pub fn resolve(&self) -> Result<PauliSum> {
        match self {
            Self::Preset { preset } => preset_hamiltonian(preset),
            Self::Pauli { pauli } => Ok(pauli.clone()),
        }
    }
}

/// Initial parameters: a named recipe or an explicit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<InitialPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl InitialSpec {
    pub fn resolve(&self, n_qubits: usize, n_params: usize) -> Result<Vec<f64>> {
        let params = match (&self.recipe, &self.params) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "initial: give either `recipe` or `params`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "initial: `recipe` or `params` is required".into(),
                ))
            }
            (Some(r), None) => initial_parameters(*r, n_qubits, self.seed)?,
            (None, Some(p)) => p.clone(),
        };
        if params.len() != n_params {
            return Err(Error::Config(format!(
                "initial parameters have length {}, the ansatz has {n_params}",
                params.len()
            )));
        }
        Ok(params)
    }
}

/// One complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub hamiltonian: HamiltonianSpec,
    pub ansatz: AnsatzSpec,
    pub initial: InitialSpec,
    pub evolution: EvolutionKind,
    pub ode: OdeKind,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_fd_delta")]
    pub fd_delta: f64,
    #[serde(default)]
    pub norm_mode: NormMode,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub linear_solver: SolverSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_t_final() -> f64 {
    1.0
}

fn default_fd_delta() -> f64 {
    crate::bounds::DEFAULT_FD_DELTA
}

fn default_grid_points() -> usize {
    crate::bounds::DEFAULT_GRID_POINTS
}

impl EvolutionConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks everything that can be checked without running.
    pub fn check(&self) -> Result<()> {
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::Config(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.fd_delta > 0.0) || !self.fd_delta.is_finite() {
            return Err(Error::Config(format!(
                "fd_delta must be positive, got {}",
                self.fd_delta
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::Config("grid_points must be at least 2".into()));
        }
        self.solver.validate()?;
        self.linear_solver.validate()?;
        let h = self.hamiltonian.resolve()?;
        let ansatz = self.ansatz.build()?;
        if h.n_qubits() != ansatz.n_qubits() {
            return Err(Error::Config(format!(
                "Hamiltonian acts on {} qubits, the ansatz on {}",
                h.n_qubits(),
                ansatz.n_qubits()
            )));
        }
        self.initial.resolve(ansatz.n_qubits(), ansatz.n_params())?;
        Ok(())
    }
}

/// The Hamiltonian of a named preset.
pub fn preset_hamiltonian(name: &str) -> Result<PauliSum> {
    match name {
        "illustrative" => PauliSum::from_pairs(&[(1.0, "ZX"), (1.0, "XZ"), (3.0, "ZZ")]),
        "ising" => {
            // Open chain of three spins, H = −J Σ Z_iZ_{i+1} − Jg Σ X_j.
            let (j, g) = (-0.5, -0.5);
            PauliSum::from_pairs(&[
                (-j, "IZZ"),
                (-j, "ZZI"),
                (-j * g, "IIX"),
                (-j * g, "IXI"),
                (-j * g, "XII"),
            ])
        }
        "hydrogen" => PauliSum::from_pairs(&[
            (0.2252, "II"),
            (0.5716, "ZZ"),
            (0.3435, "IZ"),
            (-0.4347, "ZI"),
            (0.0910, "YY"),
            (0.0910, "XX"),
        ]),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Fully populated configuration for a named preset.
pub fn preset(name: &str) -> Result<EvolutionConfig> {
    let (n_qubits, recipe, evolution, ode) = match name {
        "illustrative" => (
            2,
            InitialPreset::Illustrative,
            EvolutionKind::Real,
            OdeKind::Standard,
        ),
        "ising" => (
            3,
            InitialPreset::Ising,
            EvolutionKind::Imag,
            OdeKind::Standard,
        ),
        "hydrogen" => (
            2,
            InitialPreset::Hydrogen,
            EvolutionKind::Imag,
            OdeKind::Argmin,
        ),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(EvolutionConfig {
        hamiltonian: HamiltonianSpec::Preset {
            preset: name.to_string(),
        },
        ansatz: AnsatzSpec::efficient_su2(n_qubits),
        initial: InitialSpec {
            recipe: Some(recipe),
            params: None,
            seed: DEFAULT_SEED,
        },
        evolution,
        ode,
        solver: SolverKind::default(),
        t_final: default_t_final(),
        fd_delta: default_fd_delta(),
        norm_mode: NormMode::Exact,
        grid_points: default_grid_points(),
        linear_solver: SolverSettings::default(),
        output: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_consistent() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.check().unwrap();
            let back = EvolutionConfig::from_json(&cfg.to_json().unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
        assert!(matches!(preset("heisenberg"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn hydrogen_terms_exact() {
        let h = preset_hamiltonian("hydrogen").unwrap();
        let text = h.to_string();
        for needle in [
            "0.2252 II",
            "0.5716 ZZ",
            "0.3435 IZ",
            "-0.4347 ZI",
            "0.091 YY",
            "0.091 XX",
        ] {
            assert!(text.contains(needle), "{needle} missing from {text}");
        }
        assert_eq!(h.terms().len(), 6);
    }

    #[test]
    fn inline_hamiltonian() {
        let json = r#"{
            "hamiltonian": {"pauli": "1.0 ZZ; 0.5 XI"},
            "ansatz": {"n_qubits": 2},
            "initial": {"params": [0, 0, 0, 0, 0, 0, 0, 0]},
            "evolution": "real",
            "ode": "standard",
            "solver": {"kind": "euler", "n_steps": 10}
        }"#;
        let cfg = EvolutionConfig::from_json(json).unwrap();
        cfg.check().unwrap();
        assert_eq!(cfg.t_final, 1.0);
        assert_eq!(cfg.grid_points, 10_001);
        assert_eq!(cfg.hamiltonian.resolve().unwrap().terms().len(), 2);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = preset("hydrogen").unwrap();
        cfg.t_final = 0.0;
        assert!(cfg.check().is_err());
        let mut cfg = preset("hydrogen").unwrap();
        cfg.ansatz = AnsatzSpec::efficient_su2(3);
        assert!(cfg.check().is_err());
        let mut cfg = preset("ising").unwrap();
        cfg.initial.params = Some(vec![0.0; 12]);
        assert!(cfg.check().is_err());
        assert!(EvolutionConfig::from_json(r#"{"hamiltonian": {"preset": "ising"}}"#).is_err());
    }
}
