//! McLachlan quantities at a single parameter point: the Fubini–Study metric,
//! the energy-gradient vector `C`, the phase-fix overlaps and the energy moments.
//!
//! The primary path forms inner products of exact derivative statevectors.
//! [`ancilla`] re-derives the same quantities from simulated
//! ancilla-interference circuits and exists to cross-check the primary path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::pauli::{PauliSum, Statevector};

/// Real or imaginary time evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionKind {
    Real,
    #[serde(alias = "imaginary")]
    Imag,
}

impl std::str::FromStr for EvolutionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Self::Real),
            "imag" | "imaginary" => Ok(Self::Imag),
            other => Err(Error::Config(format!("unknown evolution kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for EvolutionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Real => "real",
            Self::Imag => "imag",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McLachlanTerms {
    /// `Re(<∂_iψ|∂_jψ> − <∂_iψ|ψ><ψ|∂_jψ>)`, symmetrised.
    pub fq: DMatrix<f64>,
    /// `C_i = <∂_iψ|H|ψ>`.
    pub c: Vec<Complex64>,
    /// `<∂_iψ|ψ>`, purely imaginary for normalised states.
    pub overlap: Vec<Complex64>,
    pub energy: f64,
    /// `<ψ|H²|ψ>`.
    pub h2: f64,
    /// `h2 − energy²`, evaluated as `‖(H − E)|ψ>‖²`.
    pub variance: f64,
    /// Explicit residual vectors, when the terms came from statevectors.
    pub tangent: Option<Tangent>,
}

/// Projected derivative states and the centred Hamiltonian image, stored as
/// real vectors `[Re; Im]` so that `Re<a|b>` is a plain dot product.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    /// Column `j` is `|∂_jψ> − |ψ><ψ|∂_jψ>`.
    pub g: DMatrix<f64>,
    /// `(H − E)|ψ>`.
    pub centred: DVector<f64>,
}

fn stack(v: &Statevector) -> DVector<f64> {
    let a = v.amplitudes();
    let d = a.len();
    DVector::from_fn(2 * d, |r, _| if r < d { a[r].re } else { a[r - d].im })
}

impl Tangent {
    /// Target residual for the kind: `i(H − E)|ψ>` (real) or `(H − E)|ψ>` (imaginary).
    pub fn residual(&self, kind: EvolutionKind) -> DVector<f64> {
        match kind {
            EvolutionKind::Imag => self.centred.clone(),
            EvolutionKind::Real => {
                let d = self.centred.len() / 2;
                DVector::from_fn(2 * d, |r, _| {
                    if r < d {
                        -self.centred[r + d]
                    } else {
                        self.centred[r - d]
                    }
                })
            }
        }
    }

    /// The gradient-error vector `Σ_j ω̇_j|d_j> + residual`.
    pub fn error_vector(&self, omega_dot: &[f64], kind: EvolutionKind) -> DVector<f64> {
        &self.g * DVector::from_column_slice(omega_dot) + self.residual(kind)
    }

    /// Magnitude of the summands entering [`Tangent::error_vector`], the scale of its rounding error.
    pub fn error_scale(&self, omega_dot: &[f64]) -> f64 {
        let cols: f64 = omega_dot
            .iter()
            .enumerate()
            .map(|(j, w)| w.abs() * self.g.column(j).norm())
            .sum();
        cols + self.centred.norm()
    }
}

impl McLachlanTerms {
    pub fn n_params(&self) -> usize {
        self.c.len()
    }

    /// Right-hand side of the real-time linear system, `Im(C_i − <∂_iψ|ψ> E)`.
    pub fn real_rhs(&self) -> Vec<f64> {
        self.c
            .iter()
            .zip(&self.overlap)
            .map(|(c, o)| (c - o * self.energy).im)
            .collect()
    }

    /// Right-hand side of the imaginary-time linear system, `−Re(C_i)`.
    pub fn imag_rhs(&self) -> Vec<f64> {
        self.c.iter().map(|c| -c.re).collect()
    }

    pub fn rhs(&self, kind: EvolutionKind) -> Vec<f64> {
        match kind {
            EvolutionKind::Real => self.real_rhs(),
            EvolutionKind::Imag => self.imag_rhs(),
        }
    }
}

/// Evaluates every McLachlan quantity at `params`.
pub fn evaluate_terms(ansatz: &Ansatz, params: &[f64], h: &PauliSum) -> Result<McLachlanTerms> {
    if h.n_qubits() != ansatz.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: ansatz.n_qubits(),
            actual: h.n_qubits(),
        });
    }
    let psi = ansatz.prepare(params)?;
    let dpsi = ansatz.derivative_states(params)?;
    terms_from_states(&psi, &dpsi, h)
}

/// Assembles the terms from a prepared state and its parameter derivatives.
pub fn terms_from_states(
    psi: &Statevector,
    dpsi: &[Statevector],
    h: &PauliSum,
) -> Result<McLachlanTerms> {
    let k = dpsi.len();
    let hpsi = h.apply(psi)?;
    let e = psi.inner(&hpsi)?;
    if e.im.abs() > crate::pauli::REAL_RESIDUE_TOL * (1.0 + e.re.abs()) {
        return Err(Error::Inconsistent(format!(
            "energy has imaginary residue {:e}",
            e.im
        )));
    }
    let energy = e.re;
    let h2 = hpsi.norm_sqr();
    let mut centred = hpsi.clone();
    centred.add_scaled(Complex64::new(-energy, 0.0), psi)?;
    let variance = centred.norm_sqr();

    let mut c = Vec::with_capacity(k);
    let mut overlap = Vec::with_capacity(k);
    for d in dpsi {
        c.push(d.inner(&hpsi)?);
        overlap.push(d.inner(psi)?);
    }

    let mut fq = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let g = dpsi[i].inner(&dpsi[j])? - overlap[i] * overlap[j].conj();
            fq[(i, j)] = g.re;
            fq[(j, i)] = g.re;
        }
    }
    let fq = (&fq + fq.transpose()) * 0.5;

    let mut g = DMatrix::zeros(2 * psi.dim(), k);
    for (j, d) in dpsi.iter().enumerate() {
        let mut proj = d.clone();
        proj.add_scaled(-overlap[j].conj(), psi)?;
        g.set_column(j, &stack(&proj));
    }

    Ok(McLachlanTerms {
        fq,
        c,
        overlap,
        energy,
        h2,
        variance,
        tangent: Some(Tangent {
            g,
            centred: stack(&centred),
        }),
    })
}

pub mod ancilla {
    //! Ancilla-interference circuits evaluating `Re(e^{iα}<ψ|U†V|ψ>)` and
    //! `Re(e^{iα}<ψ|U†HV|ψ>)`, simulated exactly on an `n+1` qubit register.
    //!
    //! The working qubit starts in `(|0> + e^{iα}|1>)/√2`; `U` is applied
    //! controlled on `|0>`, `V` controlled on `|1>`, then a Hadamard on the
    //! working qubit. Measuring `Z` (or `Z ⊗ H`) yields the real part above.

    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    use nalgebra::DMatrix;
    use num_complex::Complex64;

    use super::McLachlanTerms;
    use crate::ansatz::{Ansatz, Gate};
    use crate::error::{Error, Result};
    use crate::pauli::{PauliSum, PauliWord, Statevector};

    /// One step of a controlled operand.
    #[derive(Debug, Clone, PartialEq)]
    pub enum CircuitOp {
        Gate {
            gate: Gate,
            angle: f64,
            inverse: bool,
        },
        Word(PauliWord),
    }

    impl CircuitOp {
        fn apply(&self, state: &mut Statevector) -> Result<()> {
            match self {
                CircuitOp::Gate {
                    gate,
                    angle,
                    inverse,
                } => {
                    gate.apply_angle(*angle, state, *inverse);
                    Ok(())
                }
                CircuitOp::Word(w) => {
                    *state = w.apply(state)?;
                    Ok(())
                }
            }
        }
    }

    /// The gates `range` of `ansatz` as operand steps (reversed and inverted if `inverse`).
    pub fn gate_ops(
        ansatz: &Ansatz,
        params: &[f64],
        range: std::ops::Range<usize>,
        inverse: bool,
    ) -> Vec<CircuitOp> {
        let to_op = |g: &Gate| CircuitOp::Gate {
            gate: *g,
            angle: g.param_index().map_or(0.0, |p| params[p]),
            inverse,
        };
        let gates = &ansatz.gates()[range];
        if inverse {
            gates.iter().rev().map(to_op).collect()
        } else {
            gates.iter().map(to_op).collect()
        }
    }

    /// What is measured on the system register alongside `Z` on the ancilla.
    #[derive(Debug, Clone, Copy)]
    pub enum Observable<'a> {
        Identity,
        Hamiltonian(&'a PauliSum),
    }

    pub fn circuit_value(
        observable: Observable<'_>,
        u: &[CircuitOp],
        v: &[CircuitOp],
        psi_in: &Statevector,
        alpha: f64,
    ) -> Result<f64> {
        let n = psi_in.n_qubits();
        let dim = psi_in.dim();
        if let Observable::Hamiltonian(h) = observable {
            if h.n_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: h.n_qubits(),
                });
            }
        }

        // Working qubit is the most significant bit of the joint register.
        let phase = Complex64::from_polar(1.0, alpha);
        let mut joint = Vec::with_capacity(2 * dim);
        joint.extend(psi_in.amplitudes().iter().map(|a| a * FRAC_1_SQRT_2));
        joint.extend(
            psi_in
                .amplitudes()
                .iter()
                .map(|a| a * phase * FRAC_1_SQRT_2),
        );
        let joint = Statevector::new(joint)?;

        let (lo, hi) = joint.amplitudes().split_at(dim);
        let mut branch0 = Statevector::new(lo.to_vec())?;
        let mut branch1 = Statevector::new(hi.to_vec())?;
        for op in u {
            op.apply(&mut branch0)?;
        }
        for op in v {
            op.apply(&mut branch1)?;
        }

        // Hadamard on the working qubit.
        let mut plus = branch0.clone();
        plus.add_scaled(Complex64::new(1.0, 0.0), &branch1)?;
        let mut minus = branch0;
        minus.add_scaled(Complex64::new(-1.0, 0.0), &branch1)?;
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let plus = plus.scaled(s);
        let minus = minus.scaled(s);

        Ok(match observable {
            Observable::Identity => plus.norm_sqr() - minus.norm_sqr(),
            Observable::Hamiltonian(h) => h.expectation(&plus)? - h.expectation(&minus)?,
        })
    }

    fn generator_op(ansatz: &Ansatz, pos: usize) -> CircuitOp {
        CircuitOp::Word(
            ansatz.gates()[pos]
                .generator(ansatz.n_qubits())
                .expect("parameter owners are rotations"),
        )
    }

    /// McLachlan terms assembled purely from ancilla-circuit values.
    pub fn evaluate_terms(ansatz: &Ansatz, params: &[f64], h: &PauliSum) -> Result<McLachlanTerms> {
        let k = ansatz.n_params();
        let n_gates = ansatz.gates().len();
        let psi = ansatz.prepare(params)?;
        let positions: Vec<usize> = (0..k)
            .map(|j| ansatz.gate_of_param(j))
            .collect::<Result<_>>()?;

        // φ_j: state right after the gate carrying parameter j.
        let prefix_state = |pos: usize| {
            let mut st = Statevector::zero_state(ansatz.n_qubits());
            ansatz.apply_range(params, 0..pos + 1, &mut st, false);
            st
        };
        let phis: Vec<Statevector> = positions.iter().map(|&p| prefix_state(p)).collect();

        // <∂_iψ|ψ> = (i/2)<φ_i|σ_i|φ_i>
        let mut sigma_exp = Vec::with_capacity(k);
        for (i, &pos) in positions.iter().enumerate() {
            let a = circuit_value(
                Observable::Identity,
                &[],
                &[generator_op(ansatz, pos)],
                &phis[i],
                0.0,
            )?;
            sigma_exp.push(a);
        }
        let overlap: Vec<Complex64> = sigma_exp
            .iter()
            .map(|a| Complex64::new(0.0, 0.5 * a))
            .collect();

        // <∂_iψ|∂_jψ> = ¼<φ_j|Mσ_iM†σ_j|φ_j>, M = gates after pos_i through pos_j.
        let mut fq = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let (a, b) = if positions[i] <= positions[j] {
                    (i, j)
                } else {
                    (j, i)
                };
                if a == b {
                    let sig = generator_op(ansatz, positions[a]);
                    let v = circuit_value(
                        Observable::Identity,
                        std::slice::from_ref(&sig),
                        std::slice::from_ref(&sig),
                        &phis[a],
                        0.0,
                    )?;
                    fq[(i, j)] = 0.25 * v - 0.25 * sigma_exp[a] * sigma_exp[a];
                    continue;
                }
                let mid = positions[a] + 1..positions[b] + 1;
                let mut u = gate_ops(ansatz, params, mid.clone(), true);
                u.push(generator_op(ansatz, positions[a]));
                u.extend(gate_ops(ansatz, params, mid, false));
                let v = [generator_op(ansatz, positions[b])];
                let val = circuit_value(Observable::Identity, &u, &v, &phis[b], 0.0)?;
                fq[(i, j)] = 0.25 * val - 0.25 * sigma_exp[a] * sigma_exp[b];
            }
        }

        // ⟨ψ|H|∂_iψ⟩ = −(i/2)⟨ψ|H R_iσ_iR_i†|ψ⟩, R_i = gates after pos_i.
        let mut c = Vec::with_capacity(k);
        for &pos in &positions {
            let suffix = pos + 1..n_gates;
            let mut v = gate_ops(ansatz, params, suffix.clone(), true);
            v.push(generator_op(ansatz, pos));
            v.extend(gate_ops(ansatz, params, suffix, false));
            let re = 0.5 * circuit_value(Observable::Hamiltonian(h), &[], &v, &psi, -FRAC_PI_2)?;
            let im = 0.5 * circuit_value(Observable::Hamiltonian(h), &[], &v, &psi, 0.0)?;
            c.push(Complex64::new(re, im));
        }

        let energy = h.expectation(&psi)?;
        let h2 = h.expectation_squared(&psi)?;
        Ok(McLachlanTerms {
            fq,
            c,
            overlap,
            energy,
            h2,
            variance: h2 - energy * energy,
            tangent: None,
        })
    }
}
