//! Parameter dynamics: the gradient-error functional, the two ways of
//! choosing `ω̇` (linear-system solve or direct minimisation of the error),
//! the integrators, and the joint parameter + bound system.
//!
//! Both evolution kinds share one quadratic form,
//! `‖e‖² = Var(H) + ω̇ᵀFω̇ − 2ω̇·b`, with `b` the kind's linear-system
//! right-hand side (`Im(C − <∂ψ|ψ>E)` for real time, `−Re C` for imaginary).

pub mod integrate;
pub mod joint;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::mclachlan::{evaluate_terms, EvolutionKind, McLachlanTerms, Tangent};
use crate::pauli::PauliSum;

pub use integrate::{
    euler, rk54, rk54_fixed, Integration, IntegrationStats, OdePoint, Rk54Options,
};
pub use joint::{
    integrate_joint, BoundSettings, JointEval, JointSystem, JointTrajectory, SolverKind, StepRecord,
};

/// Negative quadratic-form values above `-ERROR_NORM_CLAMP` clamp to zero silently.
pub const ERROR_NORM_CLAMP: f64 = 1e-9;
/// Quadratic-form values below this mean the terms bundle is inconsistent.
pub const ERROR_NORM_INCONSISTENT: f64 = -1e-6;
/// A residual vector shorter than this multiple of its summands' magnitude is rounding noise.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OdeKind {
    /// Solve `F ω̇ = b` by truncated-SVD least squares.
    Standard,
    /// Minimise `‖e‖²` directly, starting from the least-squares solution.
    Argmin,
}

impl std::str::FromStr for OdeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "argmin" => Ok(Self::Argmin),
            other => Err(Error::Config(format!("unknown ODE kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Singular values below `cutoff · σ_max` are discarded.
    pub lstsq_cutoff: f64,
    pub argmin_budget: usize,
    /// Relative residual at which the argmin refinement stops.
    pub argmin_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            lstsq_cutoff: 1e-8,
            argmin_budget: 100,
            argmin_tol: 1e-14,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.lstsq_cutoff > 0.0) {
            return Err(Error::Config("lstsq_cutoff must be positive".into()));
        }
        if self.argmin_budget == 0 {
            return Err(Error::Config("argmin_budget must be at least 1".into()));
        }
        if !(self.argmin_tol > 0.0) {
            return Err(Error::Config("argmin_tol must be positive".into()));
        }
        Ok(())
    }
}

fn check_len(terms: &McLachlanTerms, v: &[f64]) -> Result<()> {
    if v.len() != terms.n_params() {
        return Err(Error::DimensionMismatch {
            expected: terms.n_params(),
            actual: v.len(),
        });
    }
    Ok(())
}

/// `Var + ω̇ᵀFω̇ − 2ω̇·b` without clamping.
pub fn error_norm_sq_raw(
    terms: &McLachlanTerms,
    omega_dot: &[f64],
    kind: EvolutionKind,
) -> Result<f64> {
    check_len(terms, omega_dot)?;
    let b = terms.rhs(kind);
    let w = DVector::from_column_slice(omega_dot);
    let quad = w.dot(&(&terms.fq * &w));
    let lin: f64 = omega_dot.iter().zip(&b).map(|(x, y)| x * y).sum();
    Ok(terms.variance + quad - 2.0 * lin)
}

/// `‖e‖²` from the explicit residual vector when available, else the quadratic form.
/// No clamping or flooring is applied.
pub fn residual_norm_sq(
    terms: &McLachlanTerms,
    omega_dot: &[f64],
    kind: EvolutionKind,
) -> Result<f64> {
    check_len(terms, omega_dot)?;
    match &terms.tangent {
        Some(t) => Ok(t.error_vector(omega_dot, kind).norm_squared()),
        None => error_norm_sq_raw(terms, omega_dot, kind),
    }
}

/// Squared gradient-error norm `‖e_t‖²` for the given parameter velocity.
///
/// With residual vectors present the norm is taken of the assembled vector,
/// which is non-negative by construction and does not square the rounding
/// error the way the expanded quadratic form does.
pub fn error_norm_sq(
    terms: &McLachlanTerms,
    omega_dot: &[f64],
    kind: EvolutionKind,
) -> Result<f64> {
    check_len(terms, omega_dot)?;
    if let Some(t) = &terms.tangent {
        let n = t.error_vector(omega_dot, kind).norm();
        if !n.is_finite() {
            return Err(Error::NonFinite("gradient error norm".into()));
        }
        return Ok(if n <= ROUNDOFF_FLOOR * t.error_scale(omega_dot) {
            0.0
        } else {
            n * n
        });
    }
    let v = error_norm_sq_raw(terms, omega_dot, kind)?;
    if !v.is_finite() {
        return Err(Error::NonFinite("gradient error norm".into()));
    }
    if v < ERROR_NORM_INCONSISTENT {
        return Err(Error::Inconsistent(format!(
            "squared gradient error {v:e} is negative"
        )));
    }
    Ok(v.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolve {
    pub omega_dot: Vec<f64>,
    /// `σ_max / σ_min` of the metric (infinite when singular).
    pub condition: f64,
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `F x = b` with a relative singular-value cutoff.
pub fn lstsq(fq: &DMatrix<f64>, b: &[f64], cutoff: f64) -> Result<LinearSolve> {
    let n = fq.nrows();
    if b.len() != n || fq.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    let svd = fq.clone().svd(true, true);
    let s = &svd.singular_values;
    let s_max = s.iter().cloned().fold(0.0, f64::max);
    let s_min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let bv = DVector::from_column_slice(b);
    let ub = u.transpose() * bv;
    let thr = cutoff * s_max;
    let mut y = DVector::zeros(n);
    let mut rank = 0;
    for k in 0..s.len() {
        if s[k] > thr && s[k] > 0.0 {
            y[k] = ub[k] / s[k];
            rank += 1;
        }
    }
    let x = v_t.transpose() * y;
    Ok(LinearSolve {
        omega_dot: x.iter().copied().collect(),
        condition,
        rank,
    })
}

/// `ω̇` from the linear system `F ω̇ = b`.
pub fn solve_standard(
    terms: &McLachlanTerms,
    kind: EvolutionKind,
    settings: &SolverSettings,
) -> Result<LinearSolve> {
    lstsq(&terms.fq, &terms.rhs(kind), settings.lstsq_cutoff)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArgminSolve {
    pub omega_dot: Vec<f64>,
    pub condition: f64,
    /// Unfloored `‖e‖²` at the returned point.
    pub objective: f64,
    /// Unfloored `‖e‖²` at the least-squares starting point.
    pub standard_objective: f64,
    pub standard_omega_dot: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `‖e‖²(ω̇)` starting from the least-squares solution of `F ω̇ = b`.
///
/// With residual vectors available this is the linear least-squares problem
/// `min ‖G ω̇ + r‖` solved through the SVD of `G` (whose condition number is
/// the square root of that of `F`) plus iterative refinement. Otherwise the
/// quadratic is refined with Tikhonov-damped Newton steps and exact line
/// searches. Either way the starting point is returned unless it is beaten,
/// so the result never does worse than the least-squares velocity.
pub fn solve_argmin(
    terms: &McLachlanTerms,
    kind: EvolutionKind,
    settings: &SolverSettings,
) -> Result<ArgminSolve> {
    let start = solve_standard(terms, kind, settings)?;
    let f0 = residual_norm_sq(terms, &start.omega_dot, kind)?;
    let (x, fx, iterations, converged) = match &terms.tangent {
        Some(t) => refine_tall(t, kind, settings, &start.omega_dot, f0)?,
        None => refine_quadratic(terms, kind, settings, &start.omega_dot, f0)?,
    };
    Ok(ArgminSolve {
        omega_dot: x,
        condition: start.condition,
        objective: fx,
        standard_objective: f0,
        standard_omega_dot: start.omega_dot,
        iterations,
        converged,
    })
}

fn refine_tall(
    t: &Tangent,
    kind: EvolutionKind,
    settings: &SolverSettings,
    start: &[f64],
    f0: f64,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    let target = -t.residual(kind);
    let svd = t.g.clone().svd(true, true);
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    // σ(G)² = σ(F): this keeps exactly the directions the F-cutoff keeps.
    let eps = if s_max > 0.0 {
        settings.lstsq_cutoff.sqrt() * s_max
    } else {
        0.0
    };
    let solve = |rhs: &DVector<f64>| -> Result<DVector<f64>> {
        svd.solve(rhs, eps)
            .map_err(|e| Error::Inconsistent(e.to_string()))
    };
    let objective = |x: &DVector<f64>| (&t.g * x - &target).norm_squared();

    let mut x = if s_max > 0.0 {
        solve(&target)?
    } else {
        DVector::zeros(t.g.ncols())
    };
    let mut fx = objective(&x);
    let mut iterations = 0;
    let mut converged = s_max == 0.0;
    while !converged && iterations < settings.argmin_budget {
        iterations += 1;
        let dx = solve(&(&target - &t.g * &x))?;
        let cand = &x + &dx;
        let fc = objective(&cand);
        if fc < fx {
            x = cand;
            fx = fc;
        }
        if fc >= fx || dx.norm() <= settings.argmin_tol * x.norm().max(1.0) {
            converged = true;
        }
    }
    if fx < f0 {
        Ok((x.iter().copied().collect(), fx, iterations, converged))
    } else {
        Ok((start.to_vec(), f0, iterations, converged))
    }
}

fn refine_quadratic(
    terms: &McLachlanTerms,
    kind: EvolutionKind,
    settings: &SolverSettings,
    start: &[f64],
    f0: f64,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    let b = DVector::from_vec(terms.rhs(kind));
    let fq = &terms.fq;

    let eig = fq.clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let reg2 = (settings.lstsq_cutoff * lam_max).powi(2);

    let mut x = DVector::from_column_slice(start);
    let mut fx = f0;
    let mut iterations = 0;
    let mut converged = false;
    let b_norm = b.norm();

    while iterations < settings.argmin_budget {
        let r = &b - fq * &x;
        if r.norm() <= settings.argmin_tol * (b_norm + lam_max * x.norm()) || lam_max == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;
        let proj = eig.eigenvectors.transpose() * &r;
        let scaled = DVector::from_iterator(
            proj.len(),
            proj.iter().zip(eig.eigenvalues.iter()).map(|(p, &l)| {
                let d = l * l + reg2;
                if d > 0.0 && l > 0.0 {
                    p * l / d
                } else {
                    0.0
                }
            }),
        );
        let dir = &eig.eigenvectors * scaled;
        let curv = dir.dot(&(fq * &dir));
        let slope = dir.dot(&r);
        if !(curv > 0.0) || slope == 0.0 {
            converged = true;
            break;
        }
        let cand = &x + dir * (slope / curv);
        let fc = error_norm_sq_raw(terms, cand.as_slice(), kind)?;
        if fc < fx {
            x = cand;
            fx = fc;
        } else {
            // No further decrease representable at this precision.
            converged = true;
            break;
        }
    }
    Ok((x.iter().copied().collect(), fx, iterations, converged))
}

/// Standard-ODE velocity at `params`.
pub fn rhs_standard(
    ansatz: &Ansatz,
    params: &[f64],
    h: &PauliSum,
    kind: EvolutionKind,
    settings: &SolverSettings,
) -> Result<Vec<f64>> {
    let terms = evaluate_terms(ansatz, params, h)?;
    Ok(solve_standard(&terms, kind, settings)?.omega_dot)
}

/// Argmin-ODE velocity at `params`.
pub fn rhs_argmin(
    ansatz: &Ansatz,
    params: &[f64],
    h: &PauliSum,
    kind: EvolutionKind,
    settings: &SolverSettings,
) -> Result<Vec<f64>> {
    let terms = evaluate_terms(ansatz, params, h)?;
    Ok(solve_argmin(&terms, kind, settings)?.omega_dot)
}
