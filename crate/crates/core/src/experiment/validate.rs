//! Self-test of a configuration: finite-difference and ancilla-circuit
//! cross-checks of every quantity the integrator consumes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvolutionConfig;
use crate::ansatz::{Ansatz, InitialPreset};
use crate::mclachlan::{ancilla, evaluate_terms};
use crate::oracle::bures;
use crate::pauli::{PauliSum, Statevector};

/// Random parameter points examined per check.
pub const SAMPLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest deviation observed, when the check is quantitative.
    pub max_deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn measured(name: &str, dev: f64, tol: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: dev <= tol,
            max_deviation: Some(dev),
            tolerance: Some(tol),
            detail: detail.into(),
        }
    }

    fn failed(name: &str, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            max_deviation: None,
            tolerance: None,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            match (c.max_deviation, c.tolerance) {
                (Some(d), Some(t)) => writeln!(
                    f,
                    "{verdict} {:<24} max_dev={d:.3e} tol={t:.0e} {}",
                    c.name, c.detail
                )?,
                _ => writeln!(f, "{verdict} {:<24} {}", c.name, c.detail)?,
            }
        }
        Ok(())
    }
}

fn max_abs_diff(a: &Statevector, b: &Statevector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn random_points(ansatz: &Ansatz, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..SAMPLES)
        .map(|_| {
            (0..ansatz.n_params())
                .map(|_| rng.random_range(-PI..PI))
                .collect()
        })
        .collect()
}

fn shifted(w: &[f64], j: usize, d: f64) -> Vec<f64> {
    let mut v = w.to_vec();
    v[j] += d;
    v
}

fn check_hermitian(h: &PauliSum) -> Check {
    match h.to_dense() {
        Ok(m) => {
            let dev = (&m - m.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            Check::measured("hamiltonian_hermitian", dev, 1e-12, "max |M − M†|")
        }
        Err(e) => Check::failed("hamiltonian_hermitian", e.to_string()),
    }
}

fn check_initial_state(cfg: &EvolutionConfig, ansatz: &Ansatz, omega0: &[f64]) -> Option<Check> {
    let n = ansatz.n_qubits();
    let (target, label) = match cfg.initial.recipe? {
        InitialPreset::Illustrative | InitialPreset::Hydrogen => {
            (Statevector::plus_state(n), "|+...+>")
        }
        InitialPreset::Ising => (Statevector::zero_state(n), "|0...0>"),
    };
    Some(
        match ansatz.prepare(omega0).and_then(|psi| bures(&psi, &target)) {
            Ok(b) => Check::measured(
                "initial_state",
                b,
                1e-10,
                format!("Bures distance to {label}"),
            ),
            Err(e) => Check::failed("initial_state", e.to_string()),
        },
    )
}

fn check_prepare_norm(ansatz: &Ansatz, points: &[Vec<f64>]) -> crate::Result<Check> {
    let mut dev: f64 = 0.0;
    for w in points {
        dev = dev.max((ansatz.prepare(w)?.norm() - 1.0).abs());
    }
    Ok(Check::measured("prepare_norm", dev, 1e-10, "| ‖ψ‖ − 1 |"))
}

fn check_derivatives(ansatz: &Ansatz, points: &[Vec<f64>]) -> crate::Result<Check> {
    const H: f64 = 1e-6;
    let mut dev: f64 = 0.0;
    for w in points {
        for j in 0..ansatz.n_params() {
            let plus = ansatz.prepare(&shifted(w, j, H))?;
            let minus = ansatz.prepare(&shifted(w, j, -H))?;
            let mut fd = plus;
            fd.add_scaled(Complex64::new(-1.0, 0.0), &minus)?;
            let fd = fd.scaled(Complex64::new(0.5 / H, 0.0));
            dev = dev.max(max_abs_diff(&fd, &ansatz.derivative_state(w, j)?));
        }
    }
    Ok(Check::measured(
        "derivative_fd",
        dev,
        1e-8,
        "analytic ∂ψ vs central difference, h = 1e-6",
    ))
}

fn check_terms(
    ansatz: &Ansatz,
    h: &PauliSum,
    points: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> crate::Result<Vec<Check>> {
    const DELTA: f64 = 1e-4;
    const GRAD_STEP: f64 = 1e-5;
    let k = ansatz.n_params();
    let (mut metric, mut grad, mut anc, mut psd, mut overlap_re, mut var): (
        f64,
        f64,
        f64,
        f64,
        f64,
        f64,
    ) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for w in points {
        let t = evaluate_terms(ansatz, w, h)?;
        let psi = ansatz.prepare(w)?;

        // 1 − |<ψ(ω)|ψ(ω ± δv)>|² = δ² vᵀFv + O(δ³); the symmetric average cancels the odd term.
        let v: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v: Vec<f64> = v.iter().map(|x| x / norm).collect();
        let infid = |s: f64| -> crate::Result<f64> {
            let moved: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a + s * b).collect();
            Ok(1.0 - psi.inner(&ansatz.prepare(&moved)?)?.norm_sqr())
        };
        let est = (infid(DELTA)? + infid(-DELTA)?) / (2.0 * DELTA * DELTA);
        let vv = nalgebra::DVector::from_column_slice(&v);
        metric = metric.max((est - vv.dot(&(&t.fq * &vv))).abs());

        for j in 0..k {
            let ep = h.expectation(&ansatz.prepare(&shifted(w, j, GRAD_STEP))?)?;
            let em = h.expectation(&ansatz.prepare(&shifted(w, j, -GRAD_STEP))?)?;
            grad = grad.max((t.c[j].re - 0.25 * (ep - em) / GRAD_STEP).abs());
            overlap_re = overlap_re.max(t.overlap[j].re.abs());
        }

        let a = ancilla::evaluate_terms(ansatz, w, h)?;
        let mut d = (&a.fq - &t.fq).amax();
        for j in 0..k {
            d = d
                .max((a.c[j] - t.c[j]).norm())
                .max((a.overlap[j] - t.overlap[j]).norm());
        }
        anc = anc.max(d);

        let min_eig = t.fq.clone().symmetric_eigen().eigenvalues.min();
        psd = psd.max(-min_eig);
        var = var.max(-t.variance);
    }
    Ok(vec![
        Check::measured(
            "metric_fd",
            metric,
            1e-5,
            "vᵀFv vs symmetric fidelity difference, δ = 1e-4",
        ),
        Check::measured(
            "energy_gradient_fd",
            grad,
            1e-8,
            "Re C vs ½ ∂E central difference",
        ),
        Check::measured("overlap_imaginary", overlap_re, 1e-10, "|Re <∂ψ|ψ>|"),
        Check::measured(
            "ancilla_vs_analytic",
            anc,
            1e-10,
            "circuit path vs statevector path",
        ),
        Check::measured("metric_psd", psd, 1e-9, "−min eigenvalue of F"),
        Check::measured("variance_nonnegative", var, 1e-9, "−Var(H)"),
    ])
}

/// Runs every check; never fails, problems become failing checks.
/// The same config and seed give the same report.
pub fn validate(cfg: &EvolutionConfig) -> ValidationReport {
    let seed = cfg.initial.seed;
    let mut checks = Vec::new();
    let ansatz = match cfg.ansatz.build() {
        Ok(a) => {
            checks.push(Check {
                name: "ansatz_invariants".into(),
                passed: true,
                max_deviation: None,
                tolerance: None,
                detail: format!("{} qubits, {} parameters", a.n_qubits(), a.n_params()),
            });
            Some(a)
        }
        Err(e) => {
            checks.push(Check::failed("ansatz_invariants", e.to_string()));
            None
        }
    };
    let h = match cfg.hamiltonian.resolve() {
        Ok(h) => {
            checks.push(check_hermitian(&h));
            Some(h)
        }
        Err(e) => {
            checks.push(Check::failed("hamiltonian", e.to_string()));
            None
        }
    };
    let (Some(ansatz), Some(h)) = (ansatz, h) else {
        return ValidationReport { seed, checks };
    };
    if ansatz.n_qubits() != h.n_qubits() {
        checks.push(Check::failed(
            "dimensions",
            format!(
                "Hamiltonian on {} qubits, ansatz on {}",
                h.n_qubits(),
                ansatz.n_qubits()
            ),
        ));
        return ValidationReport { seed, checks };
    }
    match cfg.initial.resolve(ansatz.n_qubits(), ansatz.n_params()) {
        Ok(omega0) => checks.extend(check_initial_state(cfg, &ansatz, &omega0)),
        Err(e) => checks.push(Check::failed("initial_state", e.to_string())),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = random_points(&ansatz, &mut rng);
    let numeric = check_prepare_norm(&ansatz, &points).and_then(|norm| {
        let deriv = check_derivatives(&ansatz, &points)?;
        let mut v = vec![norm, deriv];
        v.extend(check_terms(&ansatz, &h, &points, &mut rng)?);
        Ok(v)
    });
    match numeric {
        Ok(v) => checks.extend(v),
        Err(e) => checks.push(Check::failed("numerics", e.to_string())),
    }
    ValidationReport { seed, checks }
}
