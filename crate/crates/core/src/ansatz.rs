//! Parameterized circuits built from RY, RZ and CX gates.
//!
//! Rotations follow `R_σ(θ) = exp(−iθσ/2)`, so the derivative of a rotation
//! is `−(i/2)σ R_σ(θ)`; derivative states are obtained by inserting that
//! factor right after the differentiated gate.
//!
//! The EfficientSU2 layout (one repetition, full entanglement) is
//! `[RY all][RZ all][CX(i,j) for i<j][RY all][RZ all]` with parameters
//! numbered layer-major then qubit-major: for `n` qubits the first RY layer
//! holds `0..n`, the first RZ layer `n..2n`, the second RY layer `2n..3n`
//! and the final RZ layer `3n..4n`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliWord, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Gate {
    Ry { qubit: usize, param: usize },
    Rz { qubit: usize, param: usize },
    Cx { control: usize, target: usize },
}

impl Gate {
    pub fn param_index(&self) -> Option<usize> {
        match *self {
            Gate::Ry { param, .. } | Gate::Rz { param, .. } => Some(param),
            Gate::Cx { .. } => None,
        }
    }

    /// Generator `σ` of a rotation gate as a full-register Pauli word.
    pub fn generator(&self, n_qubits: usize) -> Option<PauliWord> {
        match *self {
            Gate::Ry { qubit, .. } => Some(PauliWord::single(n_qubits, qubit, Pauli::Y)),
            Gate::Rz { qubit, .. } => Some(PauliWord::single(n_qubits, qubit, Pauli::Z)),
            Gate::Cx { .. } => None,
        }
    }

    fn max_qubit(&self) -> usize {
        match *self {
            Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => qubit,
            Gate::Cx { control, target } => control.max(target),
        }
    }

    /// Applies the gate (or its inverse) in place, reading its angle from `params`.
    pub fn apply(&self, params: &[f64], state: &mut Statevector, inverse: bool) {
        let angle = self.param_index().map_or(0.0, |p| params[p]);
        self.apply_angle(angle, state, inverse);
    }

    /// Applies the gate with an explicit rotation angle (ignored for CX).
    pub fn apply_angle(&self, angle: f64, state: &mut Statevector, inverse: bool) {
        let half = if inverse { -0.5 * angle } else { 0.5 * angle };
        let amps = state.amplitudes_mut();
        match *self {
            Gate::Ry { qubit, .. } => {
                let (s, c) = half.sin_cos();
                let bit = 1usize << qubit;
                for idx in 0..amps.len() {
                    if idx & bit == 0 {
                        let a0 = amps[idx];
                        let a1 = amps[idx | bit];
                        amps[idx] = a0 * c - a1 * s;
                        amps[idx | bit] = a0 * s + a1 * c;
                    }
                }
            }
            Gate::Rz { qubit, .. } => {
                let p0 = Complex64::from_polar(1.0, -half);
                let p1 = Complex64::from_polar(1.0, half);
                let bit = 1usize << qubit;
                for (idx, a) in amps.iter_mut().enumerate() {
                    *a *= if idx & bit == 0 { p0 } else { p1 };
                }
            }
            Gate::Cx { control, target } => {
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for idx in 0..amps.len() {
                    if idx & cbit != 0 && idx & tbit == 0 {
                        amps.swap(idx, idx | tbit);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
    /// `param_gate[j]` is the position in `gates` of the rotation owning parameter `j`.
    param_gate: Vec<usize>,
}

impl Ansatz {
    /// Validates that every parameter index `0..k` is used by exactly one rotation.
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidAnsatz("n_qubits must be positive".into()));
        }
        let mut owners: Vec<Option<usize>> = Vec::new();
        for (pos, g) in gates.iter().enumerate() {
            if g.max_qubit() >= n_qubits {
                return Err(Error::InvalidAnsatz(format!(
                    "gate {pos} acts on qubit {} but the register has {n_qubits}",
                    g.max_qubit()
                )));
            }
            if let Gate::Cx { control, target } = g {
                if control == target {
                    return Err(Error::InvalidAnsatz(format!(
                        "gate {pos}: CX control and target are both {control}"
                    )));
                }
            }
            if let Some(p) = g.param_index() {
                if owners.len() <= p {
                    owners.resize(p + 1, None);
                }
                if let Some(prev) = owners[p] {
                    return Err(Error::InvalidAnsatz(format!(
                        "parameter {p} is used by both gate {prev} and gate {pos}"
                    )));
                }
                owners[p] = Some(pos);
            }
        }
        let param_gate = owners
            .iter()
            .enumerate()
            .map(|(p, o)| {
                o.ok_or_else(|| {
                    Error::InvalidAnsatz(format!("parameter {p} is not used by any gate"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_qubits,
            n_params: param_gate.len(),
            gates,
            param_gate,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Position in the gate list of the rotation carrying parameter `j`.
    pub fn gate_of_param(&self, j: usize) -> Result<usize> {
        self.param_gate
            .get(j)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: j,
                len: self.n_params,
            })
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::DimensionMismatch {
                expected: self.n_params,
                actual: params.len(),
            });
        }
        if let Some(bad) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {bad}")));
        }
        Ok(())
    }

    /// Applies `gates[range]` to `state` in circuit order (or the inverse, in reverse).
    pub fn apply_range(
        &self,
        params: &[f64],
        range: std::ops::Range<usize>,
        state: &mut Statevector,
        inverse: bool,
    ) {
        if inverse {
            for g in self.gates[range].iter().rev() {
                g.apply(params, state, true);
            }
        } else {
            for g in &self.gates[range] {
                g.apply(params, state, false);
            }
        }
    }

    /// `|ψ_ω> = Π U_p(ω_p) |0...0>`.
    pub fn prepare(&self, params: &[f64]) -> Result<Statevector> {
        self.check_params(params)?;
        let mut st = Statevector::zero_state(self.n_qubits);
        self.apply_range(params, 0..self.gates.len(), &mut st, false);
        Ok(st)
    }

    /// `∂|ψ_ω>/∂ω_j`, unnormalised (norm 1/2).
    pub fn derivative_state(&self, params: &[f64], j: usize) -> Result<Statevector> {
        self.check_params(params)?;
        let pos = self.gate_of_param(j)?;
        let mut st = Statevector::zero_state(self.n_qubits);
        self.apply_range(params, 0..pos + 1, &mut st, false);
        let sigma = self.gates[pos]
            .generator(self.n_qubits)
            .expect("parameter owners are rotations");
        let mut st = sigma.apply(&st)?.scaled(Complex64::new(0.0, -0.5));
        self.apply_range(params, pos + 1..self.gates.len(), &mut st, false);
        Ok(st)
    }

    /// `∂|ψ_ω>/∂ω_j` for every `j`.
    pub fn derivative_states(&self, params: &[f64]) -> Result<Vec<Statevector>> {
        (0..self.n_params)
            .map(|j| self.derivative_state(params, j))
            .collect()
    }

    /// EfficientSU2 with full entanglement; only one repetition is supported.
    pub fn efficient_su2(n_qubits: usize, reps: usize) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::InvalidAnsatz(format!(
                "EfficientSU2 needs at least 2 qubits, got {n_qubits}"
            )));
        }
        if reps != 1 {
            return Err(Error::InvalidAnsatz(format!(
                "EfficientSU2 supports reps = 1 only, got {reps}"
            )));
        }
        let n = n_qubits;
        let mut gates = Vec::new();
        let rotation_layer = |gates: &mut Vec<Gate>, layer: usize, ry: bool| {
            for q in 0..n {
                let param = layer * n + q;
                gates.push(if ry {
                    Gate::Ry { qubit: q, param }
                } else {
                    Gate::Rz { qubit: q, param }
                });
            }
        };
        rotation_layer(&mut gates, 0, true);
        rotation_layer(&mut gates, 1, false);
        for i in 0..n {
            for j in i + 1..n {
                gates.push(Gate::Cx {
                    control: i,
                    target: j,
                });
            }
        }
        rotation_layer(&mut gates, 2, true);
        rotation_layer(&mut gates, 3, false);
        Self::new(n, gates)
    }
}

/// JSON description of an ansatz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_layout")]
    pub layout: String,
    /// Explicit gate list; overrides the EfficientSU2 layout when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gates: Option<Vec<Gate>>,
}

fn default_reps() -> usize {
    1
}

fn default_layout() -> String {
    "full".to_string()
}

impl AnsatzSpec {
    pub fn efficient_su2(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            reps: 1,
            layout: default_layout(),
            gates: None,
        }
    }

    pub fn build(&self) -> Result<Ansatz> {
        match &self.gates {
            Some(gates) => Ansatz::new(self.n_qubits, gates.clone()),
            None => {
                if self.layout != "full" {
                    return Err(Error::InvalidAnsatz(format!(
                        "unsupported entanglement layout `{}`",
                        self.layout
                    )));
                }
                Ansatz::efficient_su2(self.n_qubits, self.reps)
            }
        }
    }
}

/// Initial-parameter recipes for the three reference experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialPreset {
    /// Second RY layer at π/2, everything else 0: `|+...+>`.
    Illustrative,
    /// Final RZ layer drawn from (0, π/2], everything else 0: `e^{-iγ}|0...0>`.
    Ising,
    /// Same recipe as `Illustrative`.
    Hydrogen,
}

impl std::str::FromStr for InitialPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "illustrative" => Ok(Self::Illustrative),
            "ising" => Ok(Self::Ising),
            "hydrogen" => Ok(Self::Hydrogen),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

/// Builds initial parameters for an EfficientSU2 ansatz on `n_qubits` qubits.
pub fn initial_parameters(preset: InitialPreset, n_qubits: usize, seed: u64) -> Result<Vec<f64>> {
    if n_qubits < 2 {
        return Err(Error::InvalidAnsatz(format!(
            "presets target EfficientSU2 on >= 2 qubits, got {n_qubits}"
        )));
    }
    let n = n_qubits;
    let mut params = vec![0.0; 4 * n];
    match preset {
        InitialPreset::Illustrative | InitialPreset::Hydrogen => {
            params[2 * n..3 * n].fill(FRAC_PI_2);
        }
        InitialPreset::Ising => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for p in &mut params[3 * n..4 * n] {
                // 1 - U[0,1) lies in (0, 1].
                let u: f64 = rng.random();
                *p = (1.0 - u) * FRAC_PI_2;
            }
        }
    }
    Ok(params)
}
