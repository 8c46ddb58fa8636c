//! Bures-distance error bounds for variational time evolution.
//!
//! Real time: the bound grows at the gradient-error norm, `ε̇ = ‖e_t‖`.
//!
//! Imaginary time: one step of length `δ` maps `ε` to
//! `δ‖e_t‖ + δζ + √(2 + 2δζ − 2χ)`, where `ζ` bounds the energy mismatch
//! between prepared and exact state and `χ` bounds the overlap of the two
//! states after one linearised step. The rate fed to the integrator is the
//! forward difference of that map at a fixed `δ`.
//!
//! `ζ` and `χ` are one-dimensional optimisations over a mixing parameter and
//! are solved by a uniform grid followed by local refinement.

use crate::error::Result;
use crate::evolution::error_norm_sq;
use crate::mclachlan::{EvolutionKind, McLachlanTerms};

pub const DEFAULT_GRID_POINTS: usize = 10_001;
pub const DEFAULT_FD_DELTA: f64 = 1e-4;

/// Radicands and rates below `−CLAMP_TOL` are flagged rather than silently clamped.
pub const CLAMP_TOL: f64 = 1e-9;

/// Feasibility guard on the normalisation `c_α` in `χ`.
const C_ALPHA_MIN: f64 = 1e-12;

const GOLDEN_ITERS: usize = 80;
const BISECT_ITERS: usize = 64;

pub fn clip_report(eps: f64) -> f64 {
    eps.clamp(0.0, std::f64::consts::SQRT_2)
}

/// Fidelity lower bound `(1 − ε²/2)²`, which follows from `B² = 2 − 2|<ψ|φ>|`.
pub fn fidelity_bound_rigorous(eps: f64) -> f64 {
    let overlap = (1.0 - 0.5 * eps * eps).max(0.0);
    overlap * overlap
}

/// The unsquared form `1 − ε²/2`, clipped at zero.
pub fn fidelity_bound_unsquared(eps: f64) -> f64 {
    (1.0 - 0.5 * eps * eps).max(0.0)
}

/// Real-time bound rate `‖e_t‖₂`.
pub fn qrte_rate(terms: &McLachlanTerms, omega_dot: &[f64]) -> Result<f64> {
    Ok(error_norm_sq(terms, omega_dot, EvolutionKind::Real)?.sqrt())
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = (usize, f64)> {
    let n = points.max(2);
    let span = hi - lo;
    (0..n).map(move |k| {
        let a = if k == n - 1 {
            hi
        } else {
            lo + span * (k as f64) / ((n - 1) as f64)
        };
        (k, a)
    })
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Energy-difference bound: `|E^ω − E*| ≤ ζ` whenever the Bures distance is at most `ε`.
pub fn zeta(terms: &McLachlanTerms, eps: f64, h_norm: f64, grid_points: usize) -> f64 {
    let eps = eps.max(0.0);
    let e = terms.energy;
    let sd = terms.variance.max(0.0).sqrt();
    let a_max = (0.5 * eps * eps).min(1.0);
    let objective = |a: f64| (a * e - (a * (2.0 - a)).max(0.0).sqrt() * sd).abs();

    let mut best = objective(0.0);
    if a_max > 0.0 {
        let mut best_a = 0.0;
        let mut best_k = 0;
        let mut pts = Vec::with_capacity(grid_points.max(2));
        for (k, a) in grid(0.0, a_max, grid_points) {
            pts.push(a);
            let v = objective(a);
            if v > best {
                best = v;
                best_a = a;
                best_k = k;
            }
        }
        let lo = if best_k > 0 { pts[best_k - 1] } else { best_a };
        let hi = if best_k + 1 < pts.len() {
            pts[best_k + 1]
        } else {
            best_a
        };
        if hi > lo {
            let (_, v) = golden_max(objective, lo, hi);
            best = best.max(v);
        }
    }
    eps * eps * h_norm + 2.0 * best
}

/// Overlap bound `χ` after one linearised imaginary-time step of length `delta`.
///
/// Uses the algebraically equivalent forms
/// `c_α² = (1 − |α| + αE)² + α²Var` and
/// `(1+2δE)(1−|α|+αE) − 2δ((1−|α|)E + α<H²>) = 1 − |α| + α(E − 2δVar)`,
/// which keep the `α = 0` objective at exactly 1 in floating point.
pub fn chi(terms: &McLachlanTerms, eps: f64, delta: f64, grid_points: usize) -> f64 {
    let eps = eps.max(0.0);
    // At ε = 0 the constraint pins the exact state to the prepared one.
    if eps == 0.0 {
        return 1.0;
    }
    let e = terms.energy;
    let var = terms.variance.max(0.0);
    let floor = 1.0 - 0.5 * eps * eps;
    let slope = e - 2.0 * delta * var;

    let eval = |a: f64| -> Option<f64> {
        let base = 1.0 - a.abs();
        let ov = base + a * e;
        let c = (ov * ov + a * a * var).sqrt();
        if c <= C_ALPHA_MIN || ov.abs() < c * floor {
            return None;
        }
        Some((base + a * slope).abs() / c)
    };

    let pts: Vec<f64> = grid(-1.0, 1.0, grid_points).map(|(_, a)| a).collect();
    let vals: Vec<Option<f64>> = pts.iter().map(|&a| eval(a)).collect();

    let mut best = eval(0.0).expect("α = 0 is always feasible");
    let mut best_k: Option<usize> = None;
    for (k, v) in vals.iter().enumerate() {
        if let Some(v) = v {
            if *v < best {
                best = *v;
                best_k = Some(k);
            }
        }
    }

    // Constraint boundaries between adjacent grid points.
    for k in 0..pts.len() - 1 {
        let (fa, fb) = (vals[k].is_some(), vals[k + 1].is_some());
        if fa == fb {
            continue;
        }
        let (mut inside, mut outside) = if fa {
            (pts[k], pts[k + 1])
        } else {
            (pts[k + 1], pts[k])
        };
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (inside + outside);
            if eval(mid).is_some() {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        if let Some(v) = eval(inside) {
            best = best.min(v);
        }
    }

    // Interior refinement around the best grid point.
    if let Some(k) = best_k {
        if k > 0 && k + 1 < pts.len() && vals[k - 1].is_some() && vals[k + 1].is_some() {
            let neg = |a: f64| eval(a).map_or(f64::NEG_INFINITY, |v| -v);
            let (_, v) = golden_max(neg, pts[k - 1], pts[k + 1]);
            if v.is_finite() {
                best = best.min(-v);
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundIncrement {
    pub grad_error_norm: f64,
    pub zeta: f64,
    pub chi: f64,
    pub epsilon_next: f64,
    /// Forward-difference rate, clamped at zero.
    pub rate: f64,
    pub raw_rate: f64,
    /// Set when the radicand dipped below `−CLAMP_TOL` or the raw rate was negative.
    pub flagged: bool,
}

/// Imaginary-time increment from a known gradient-error norm.
pub fn qite_increment_from_norm(
    grad_error_norm: f64,
    terms: &McLachlanTerms,
    eps: f64,
    delta: f64,
    h_norm: f64,
    grid_points: usize,
) -> BoundIncrement {
    let z = zeta(terms, eps, h_norm, grid_points);
    let x = chi(terms, eps, delta, grid_points);
    let radicand = 2.0 + 2.0 * delta * z - 2.0 * x;
    let mut flagged = radicand < -CLAMP_TOL;
    let epsilon_next = delta * grad_error_norm + delta * z + radicand.max(0.0).sqrt();
    let raw_rate = (epsilon_next - eps) / delta;
    if raw_rate < 0.0 {
        flagged = true;
    }
    BoundIncrement {
        grad_error_norm,
        zeta: z,
        chi: x,
        epsilon_next,
        rate: raw_rate.max(0.0),
        raw_rate,
        flagged,
    }
}

pub fn qite_increment(
    terms: &McLachlanTerms,
    omega_dot: &[f64],
    eps: f64,
    delta: f64,
    h_norm: f64,
    grid_points: usize,
) -> Result<BoundIncrement> {
    let e = error_norm_sq(terms, omega_dot, EvolutionKind::Imag)?.sqrt();
    Ok(qite_increment_from_norm(
        e,
        terms,
        eps,
        delta,
        h_norm,
        grid_points,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn terms(energy: f64, h2: f64) -> McLachlanTerms {
        McLachlanTerms {
            fq: DMatrix::zeros(1, 1),
            c: vec![Complex64::new(0.0, 0.0)],
            overlap: vec![Complex64::new(0.0, 0.0)],
            energy,
            h2,
            variance: h2 - energy * energy,
            tangent: None,
        }
    }

    #[test]
    fn clip_and_fidelity() {
        let s2 = std::f64::consts::SQRT_2;
        assert_eq!(clip_report(0.3), 0.3);
        assert_eq!(clip_report(5.0), s2);
        assert_eq!(clip_report(s2), s2);
        assert_eq!(fidelity_bound_rigorous(0.0), 1.0);
        assert!(fidelity_bound_rigorous(s2).abs() < 1e-15);
        assert_eq!(fidelity_bound_rigorous(1.0), 0.25);
        assert_eq!(fidelity_bound_unsquared(1.0), 0.5);
        assert_eq!(fidelity_bound_unsquared(3.0), 0.0);
    }

    #[test]
    fn zeta_at_zero_eps() {
        assert_eq!(zeta(&terms(0.4, 0.5), 0.0, 3.0, DEFAULT_GRID_POINTS), 0.0);
    }

    #[test]
    fn zeta_zero_variance_closed_form() {
        // Var = 0, E = 1, ε = 1, ‖H‖ = 1: 1 + 2·max_{α∈[0,1/2]} α = 2.
        let z = zeta(&terms(1.0, 1.0), 1.0, 1.0, DEFAULT_GRID_POINTS);
        assert!((z - 2.0).abs() < 1e-12, "{z}");
    }

    #[test]
    fn zeta_monotone_in_eps() {
        let t = terms(-0.7, 1.3);
        let mut prev = 0.0;
        for k in 0..200 {
            let eps = 0.01 * k as f64;
            let z = zeta(&t, eps, 2.0, DEFAULT_GRID_POINTS);
            assert!(z >= prev - 1e-12, "eps {eps}: {z} < {prev}");
            prev = z;
        }
    }

    #[test]
    fn chi_edge_values() {
        let t = terms(0.3, 0.8);
        assert_eq!(chi(&t, 0.0, 0.0, DEFAULT_GRID_POINTS), 1.0);
        assert_eq!(chi(&t, 0.0, 1e-4, DEFAULT_GRID_POINTS), 1.0);
        for eps in [0.1, 0.5, 1.0, 1.4, 2.0] {
            let x = chi(&t, eps, 1e-4, DEFAULT_GRID_POINTS);
            assert!(x <= 1.0 + 2e-4 * 0.3 + 1e-9);
            assert!(x >= 0.0);
        }
    }

    #[test]
    fn chi_matches_overlap_floor_at_zero_delta() {
        // With δ = 0 the objective is the overlap itself, so the minimum sits on
        // the constraint boundary |overlap| = 1 − ε²/2.
        let t = terms(0.3, 0.8);
        for eps in [0.05, 0.3, 0.9] {
            let x = chi(&t, eps, 0.0, DEFAULT_GRID_POINTS);
            assert!(
                (x - (1.0 - 0.5 * eps * eps)).abs() < 1e-12,
                "eps {eps}: {x}"
            );
        }
    }

    #[test]
    fn exact_representation_has_zero_rate() {
        let t = terms(0.3, 0.8);
        let inc = qite_increment_from_norm(0.0, &t, 0.0, 1e-4, 2.0, DEFAULT_GRID_POINTS);
        assert_eq!(inc.epsilon_next, 0.0);
        assert_eq!(inc.rate, 0.0);
        assert_eq!(inc.zeta, 0.0);
        assert_eq!(inc.chi, 1.0);
    }
}
