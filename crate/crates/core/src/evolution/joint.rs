//! The joint system `(ω, ε)`: parameters follow the chosen ODE and the
//! error bound is integrated alongside them so step-size control sees both.

use serde::{Deserialize, Serialize};

use super::integrate::{euler, rk54, IntegrationStats, Rk54Options};
use super::{
    error_norm_sq, error_norm_sq_raw, residual_norm_sq, solve_argmin, solve_standard, OdeKind,
    SolverSettings, ERROR_NORM_CLAMP,
};
use crate::ansatz::Ansatz;
use crate::bounds::{
    qite_increment_from_norm, BoundIncrement, DEFAULT_FD_DELTA, DEFAULT_GRID_POINTS,
};
use crate::error::{Error, Result};
use crate::mclachlan::{evaluate_terms, EvolutionKind};
use crate::pauli::{NormMode, PauliSum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSettings {
    /// Finite-difference step for the imaginary-time rate.
    pub fd_delta: f64,
    pub grid_points: usize,
    /// `‖H‖_∞` or an upper bound on it.
    pub h_norm: f64,
}

impl BoundSettings {
    pub fn new(h: &PauliSum, mode: NormMode) -> Result<Self> {
        Ok(Self {
            fd_delta: DEFAULT_FD_DELTA,
            grid_points: DEFAULT_GRID_POINTS,
            h_norm: h.spectral_norm(mode)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SolverKind {
    Euler { n_steps: usize },
    Rk54 { rel_tol: f64, abs_tol: f64 },
}

impl Default for SolverKind {
    fn default() -> Self {
        Self::Rk54 {
            rel_tol: 1e-6,
            abs_tol: 1e-8,
        }
    }
}

impl SolverKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Euler { n_steps: 0 } => {
                Err(Error::Config("euler n_steps must be at least 1".into()))
            }
            Self::Rk54 { rel_tol, abs_tol } if !(rel_tol > 0.0 && abs_tol > 0.0) => {
                Err(Error::Config("rk54 tolerances must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Euler { .. } => "euler",
            Self::Rk54 { .. } => "rk54",
        }
    }
}

/// Everything computed at one `(ω, ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEval {
    pub omega_dot: Vec<f64>,
    /// `ε̇`, never negative.
    pub rate: f64,
    pub e_norm_sq: f64,
    pub e_norm: f64,
    /// Unfloored `‖e‖²` at the least-squares velocity.
    pub standard_e_norm_sq: f64,
    /// Unfloored `‖e‖²` at the minimising velocity (when computed).
    pub argmin_e_norm_sq: Option<f64>,
    pub argmin_converged: Option<bool>,
    pub bound: Option<BoundIncrement>,
    pub energy: f64,
    pub variance: f64,
    pub fq_condition: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct JointSystem {
    pub ansatz: Ansatz,
    pub h: PauliSum,
    pub kind: EvolutionKind,
    pub ode: OdeKind,
    pub solver: SolverSettings,
    pub bounds: BoundSettings,
}

impl JointSystem {
    pub fn new(ansatz: Ansatz, h: PauliSum, kind: EvolutionKind, ode: OdeKind) -> Result<Self> {
        if ansatz.n_qubits() != h.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: ansatz.n_qubits(),
                actual: h.n_qubits(),
            });
        }
        let bounds = BoundSettings::new(&h, NormMode::Exact)?;
        Ok(Self {
            ansatz,
            h,
            kind,
            ode,
            solver: SolverSettings::default(),
            bounds,
        })
    }

    pub fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    /// Evaluates the velocity and bound rate. With `both_solvers` the
    /// minimising velocity is also computed for standard runs, for diagnostics.
    pub fn evaluate(&self, omega: &[f64], eps: f64, both_solvers: bool) -> Result<JointEval> {
        if !(eps >= 0.0) {
            return Err(Error::Inconsistent(format!("bound ε = {eps} is negative")));
        }
        let terms = evaluate_terms(&self.ansatz, omega, &self.h)?;
        let kind = self.kind;
        let (omega_dot, condition, standard_e, argmin_e, argmin_converged) = match self.ode {
            OdeKind::Standard => {
                let ls = solve_standard(&terms, kind, &self.solver)?;
                let std_e = residual_norm_sq(&terms, &ls.omega_dot, kind)?;
                let (am_e, am_c) = if both_solvers {
                    let am = solve_argmin(&terms, kind, &self.solver)?;
                    (Some(am.objective), Some(am.converged))
                } else {
                    (None, None)
                };
                (ls.omega_dot, ls.condition, std_e, am_e, am_c)
            }
            OdeKind::Argmin => {
                let am = solve_argmin(&terms, kind, &self.solver)?;
                (
                    am.omega_dot,
                    am.condition,
                    am.standard_objective,
                    Some(am.objective),
                    Some(am.converged),
                )
            }
        };
        let raw = error_norm_sq_raw(&terms, &omega_dot, kind)?;
        let e_norm_sq = error_norm_sq(&terms, &omega_dot, kind)?;
        let e_norm = e_norm_sq.sqrt();
        let mut flagged = terms.tangent.is_none() && raw < -ERROR_NORM_CLAMP;
        let (rate, bound) = match kind {
            EvolutionKind::Real => (e_norm, None),
            EvolutionKind::Imag => {
                let inc = qite_increment_from_norm(
                    e_norm,
                    &terms,
                    eps,
                    self.bounds.fd_delta,
                    self.bounds.h_norm,
                    self.bounds.grid_points,
                );
                flagged |= inc.flagged;
                (inc.rate, Some(inc))
            }
        };
        Ok(JointEval {
            omega_dot,
            rate,
            e_norm_sq,
            e_norm,
            standard_e_norm_sq: standard_e,
            argmin_e_norm_sq: argmin_e,
            argmin_converged,
            bound,
            energy: terms.energy,
            variance: terms.variance,
            fq_condition: condition,
            flagged,
        })
    }

    /// `f̃(ω, ε) = (ω̇, ε̇)` over the packed state `[ω..., ε]`.
    pub fn joint_rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
        let k = self.n_params();
        if y.len() != k + 1 {
            return Err(Error::DimensionMismatch {
                expected: k + 1,
                actual: y.len(),
            });
        }
        let ev = self.evaluate(&y[..k], y[k], false)?;
        let mut out = ev.omega_dot;
        out.push(ev.rate);
        Ok(out)
    }
}

/// One accepted step with the diagnostics evaluated at its end point.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub omega: Vec<f64>,
    /// Unclipped bound.
    pub epsilon: f64,
    pub step: f64,
    pub eval: JointEval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    pub records: Vec<StepRecord>,
    pub failure: Option<Error>,
    pub stats: IntegrationStats,
    /// Right-hand-side evaluations whose bound terms were flagged.
    pub flagged_evals: usize,
}

/// Integrates the joint system from `(ω0, ε = 0)` to `t_final`.
pub fn integrate_joint(
    system: &JointSystem,
    omega0: &[f64],
    t_final: f64,
    solver: SolverKind,
) -> Result<JointTrajectory> {
    solver.validate()?;
    if omega0.len() != system.n_params() {
        return Err(Error::DimensionMismatch {
            expected: system.n_params(),
            actual: omega0.len(),
        });
    }
    let mut y0 = omega0.to_vec();
    y0.push(0.0);
    let mut flagged_evals = 0usize;
    let rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let k = system.n_params();
        let ev = system.evaluate(&y[..k], y[k].max(0.0), false)?;
        if ev.flagged {
            flagged_evals += 1;
        }
        let mut out = ev.omega_dot;
        out.push(ev.rate);
        Ok(out)
    };
    let out = match solver {
        SolverKind::Euler { n_steps } => euler(rhs, &y0, t_final, n_steps)?,
        SolverKind::Rk54 { rel_tol, abs_tol } => {
            // The negative fifth-order weight can dip ε slightly when its rate jumps.
            let opts = Rk54Options {
                nondecreasing: Some(system.n_params()),
                ..Rk54Options::new(rel_tol, abs_tol)
            };
            rk54(rhs, &y0, t_final, opts)?
        }
    };
    let k = system.n_params();
    let mut records = Vec::with_capacity(out.points.len());
    let mut failure = out.failure;
    for (idx, p) in out.points.iter().enumerate() {
        let eps = p.y[k];
        match system.evaluate(&p.y[..k], eps.max(0.0), true) {
            Ok(eval) => records.push(StepRecord {
                t: p.t,
                omega: p.y[..k].to_vec(),
                epsilon: eps,
                step: p.step,
                eval,
            }),
            Err(e) => {
                failure.get_or_insert(Error::Integration {
                    step: idx,
                    t: p.t,
                    reason: e.to_string(),
                });
                break;
            }
        }
    }
    Ok(JointTrajectory {
        records,
        failure,
        stats: out.stats,
        flagged_evals,
    })
}
