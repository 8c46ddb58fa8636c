//! Exact evolution from the eigendecomposition, plus the Bures distance and
//! fidelity used to score variational states against it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mclachlan::EvolutionKind;
use crate::pauli::{HermitianEigen, PauliSum, Statevector};

/// Exact propagator for one Hamiltonian; the eigendecomposition is computed once.
#[derive(Debug, Clone)]
pub struct ExactEvolver {
    eigen: HermitianEigen,
    h: PauliSum,
}

impl ExactEvolver {
    pub fn new(h: &PauliSum) -> Result<Self> {
        Ok(Self {
            eigen: HermitianEigen::new(h)?,
            h: h.clone(),
        })
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.h
    }

    /// `e^{-iHt}|ψ0>` or the normalised `e^{-Ht}|ψ0>`.
    pub fn evolve(&self, psi0: &Statevector, t: f64, kind: EvolutionKind) -> Result<Statevector> {
        if !t.is_finite() {
            return Err(Error::NonFinite("evolution time".into()));
        }
        match kind {
            EvolutionKind::Real => self.eigen.apply_exp(Complex64::new(0.0, -t), 0.0, psi0),
            EvolutionKind::Imag => {
                // Shifting by the lowest eigenvalue keeps every factor ≤ 1 for t ≥ 0.
                let shift = self.eigen.ground_energy();
                let raw = self.eigen.apply_exp(Complex64::new(-t, 0.0), shift, psi0)?;
                if raw.norm() <= f64::MIN_POSITIVE {
                    return Err(Error::Inconsistent(format!(
                        "imaginary-time state vanished at t = {t}"
                    )));
                }
                raw.normalized()
            }
        }
    }

    pub fn energy(&self, psi: &Statevector) -> Result<f64> {
        self.h.expectation(psi)
    }

    pub fn ground_state(&self) -> Result<Statevector> {
        self.eigen.ground_state()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigen.ground_energy()
    }
}

pub fn exact_evolve(
    h: &PauliSum,
    psi0: &Statevector,
    t: f64,
    kind: EvolutionKind,
) -> Result<Statevector> {
    ExactEvolver::new(h)?.evolve(psi0, t, kind)
}

/// Bures distance `√(‖ψ‖² + ‖φ‖² − 2|<ψ|φ>|)`; reduces to `√(2 − 2|<ψ|φ>|)` for unit vectors.
///
/// Evaluated as `min_θ ‖ψ − e^{iθ}φ‖` so nearly equal states do not lose
/// half their digits to cancellation.
pub fn bures(psi: &Statevector, phi: &Statevector) -> Result<f64> {
    let z = psi.inner(phi)?;
    let phase = if z.norm() > 0.0 {
        z.conj() / z.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let d: f64 = psi
        .amplitudes()
        .iter()
        .zip(phi.amplitudes())
        .map(|(a, b)| (a - phase * b).norm_sqr())
        .sum();
    Ok(d.sqrt())
}

/// `|<ψ|φ>|²`, clamped to `[0, 1]`.
pub fn fidelity(psi: &Statevector, phi: &Statevector) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr().clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_time_is_identity() {
        let h = PauliSum::from_pairs(&[(1.0, "ZX"), (1.0, "XZ"), (3.0, "ZZ")]).unwrap();
        let psi = Statevector::plus_state(2);
        for kind in [EvolutionKind::Real, EvolutionKind::Imag] {
            let out = exact_evolve(&h, &psi, 0.0, kind).unwrap();
            assert!(bures(&out, &psi).unwrap() < 1e-12);
            assert!((out.inner(&psi).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn imaginary_two_level_closed_form() {
        let h = PauliSum::from_pairs(&[(1.0, "Z")]).unwrap();
        let out = exact_evolve(&h, &Statevector::plus_state(1), 1.0, EvolutionKind::Imag).unwrap();
        let norm = (E.powi(-2) + E.powi(2)).sqrt();
        let a = out.amplitudes();
        assert!((a[0] - c(E.recip() / norm, 0.0)).norm() < 1e-12);
        assert!((a[1] - c(E / norm, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn long_imaginary_time_reaches_ground_state() {
        let h = PauliSum::from_pairs(&[(1.0, "ZX"), (1.0, "XZ"), (3.0, "ZZ")]).unwrap();
        let ev = ExactEvolver::new(&h).unwrap();
        let out = ev
            .evolve(&Statevector::plus_state(2), 10.0, EvolutionKind::Imag)
            .unwrap();
        assert!(fidelity(&out, &ev.ground_state().unwrap()).unwrap() >= 1.0 - 1e-6);
    }

    #[test]
    fn bures_examples() {
        let z0 = Statevector::basis(1, 0);
        let z1 = Statevector::basis(1, 1);
        let plus = Statevector::plus_state(1);
        assert_eq!(bures(&z0, &z0).unwrap(), 0.0);
        assert!((bures(&z0, &z1).unwrap() - SQRT_2).abs() < 1e-15);
        assert!((bures(&z0, &plus).unwrap() - (2.0 - SQRT_2).sqrt()).abs() < 1e-12);
        let phased = plus.scaled(Complex64::from_polar(1.0, 0.7));
        assert!(bures(&plus, &phased).unwrap() < 1e-12);
        assert!(bures(&z0, &Statevector::zero_state(2)).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let z0 = Statevector::basis(1, 0);
        let z1 = Statevector::basis(1, 1);
        assert_eq!(fidelity(&z0, &z0).unwrap(), 1.0);
        assert_eq!(fidelity(&z0, &z1).unwrap(), 0.0);
    }
}
