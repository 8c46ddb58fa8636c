//! Independent oracles shared by the integration tests: dense matrices,
//! finite differences and random instances.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varqte::evolution::{euler, rk54, Rk54Options};
use varqte::pauli::PauliTerm;
use varqte::{Ansatz, PauliSum, PauliWord, Statevector};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Single-qubit Pauli matrices written out by hand.
pub fn pauli_matrix(p: char) -> DMatrix<Complex64> {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match p {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("bad Pauli {p}"),
    }
}

/// Kronecker product of the characters left to right.
pub fn dense_word(word: &str) -> DMatrix<Complex64> {
    word.chars()
        .fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |m, p| {
            m.kronecker(&pauli_matrix(p))
        })
}

pub fn dense_sum(terms: &[(f64, String)]) -> DMatrix<Complex64> {
    let n = terms[0].1.len();
    let mut m = DMatrix::zeros(1 << n, 1 << n);
    for (coef, w) in terms {
        m += dense_word(w) * c(*coef, 0.0);
    }
    m
}

pub fn random_word(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n)
        .map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)])
        .collect()
}

pub fn random_terms(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(f64, String)> {
    (0..count)
        .map(|_| (rng.random_range(-2.0..2.0), random_word(rng, n)))
        .collect()
}

pub fn to_sum(n: usize, terms: &[(f64, String)]) -> PauliSum {
    PauliSum::new(
        n,
        terms
            .iter()
            .map(|(coef, w)| PauliTerm {
                coefficient: *coef,
                word: w.parse::<PauliWord>().unwrap(),
            })
            .collect(),
    )
    .unwrap()
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Statevector {
    let amps: Vec<Complex64> = (0..1 << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Statevector::new(amps).unwrap().normalized().unwrap()
}

pub fn random_params(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}

pub fn vec_of(s: &Statevector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn dense_expectation(m: &DMatrix<Complex64>, s: &Statevector) -> Complex64 {
    let v = vec_of(s);
    v.dotc(&(m * &v))
}

/// `(ψ(ω + h e_j) − ψ(ω − h e_j)) / 2h`.
pub fn fd_derivative(a: &Ansatz, w: &[f64], j: usize, h: f64) -> DVector<Complex64> {
    let mut p = w.to_vec();
    p[j] += h;
    let plus = vec_of(&a.prepare(&p).unwrap());
    p[j] -= 2.0 * h;
    let minus = vec_of(&a.prepare(&p).unwrap());
    (plus - minus) / c(2.0 * h, 0.0)
}

/// `vᵀ F v` from the symmetric second-order fidelity expansion.
pub fn fd_metric(a: &Ansatz, w: &[f64], v: &[f64], delta: f64) -> f64 {
    let psi = a.prepare(w).unwrap();
    let infid = |s: f64| {
        let moved: Vec<f64> = w.iter().zip(v).map(|(x, d)| x + s * d).collect();
        1.0 - psi.inner(&a.prepare(&moved).unwrap()).unwrap().norm_sqr()
    };
    (infid(delta) + infid(-delta)) / (2.0 * delta * delta)
}

/// `½ ∂E/∂ω_j` by central difference.
pub fn fd_half_energy_gradient(a: &Ansatz, w: &[f64], h_op: &PauliSum, j: usize, step: f64) -> f64 {
    let mut p = w.to_vec();
    p[j] += step;
    let ep = h_op.expectation(&a.prepare(&p).unwrap()).unwrap();
    p[j] -= 2.0 * step;
    let em = h_op.expectation(&a.prepare(&p).unwrap()).unwrap();
    0.25 * (ep - em) / step
}

/// `‖Σ_j ω̇_j (|∂_jψ> − |ψ><ψ|∂_jψ>) + s (H − E)|ψ>‖²` built from dense
/// vectors, with `s = i` for real time and `1` for imaginary time.
pub fn dense_error_norm_sq(
    a: &Ansatz,
    w: &[f64],
    h_op: &PauliSum,
    omega_dot: &[f64],
    real: bool,
) -> f64 {
    let psi = vec_of(&a.prepare(w).unwrap());
    let m = h_op.to_dense().unwrap();
    let hpsi = &m * &psi;
    let e = psi.dotc(&hpsi);
    let mut err = (hpsi - &psi * e) * if real { c(0.0, 1.0) } else { c(1.0, 0.0) };
    for (j, wd) in omega_dot.iter().enumerate() {
        let d = vec_of(&a.derivative_state(w, j).unwrap());
        let proj = &d - &psi * psi.dotc(&d);
        err += proj * c(*wd, 0.0);
    }
    err.norm_squared()
}

pub fn preset_ansatz(n: usize) -> Ansatz {
    Ansatz::efficient_su2(n, 1).unwrap()
}

/// Least-squares slope of `log y` against `log x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

pub fn decay(_: f64, y: &[f64]) -> varqte::Result<Vec<f64>> {
    Ok(vec![-y[0]])
}

/// Observed order of adaptive RK54 on `ẏ = −y`, `T = 1`, from the error
/// against step count across tolerances 1e-6 … 1e-10.
pub fn scalar_rk54_order() -> (f64, Vec<(f64, usize, f64)>) {
    let mut rows = Vec::new();
    for k in 6..=10 {
        let tol = 10f64.powi(-k);
        let out = rk54(decay, &[1.0], 1.0, Rk54Options::new(tol, tol)).unwrap();
        let err = (out.final_y().unwrap()[0] - (-1f64).exp()).abs();
        rows.push((tol, out.stats.accepted, err));
    }
    let steps: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.2).collect();
    (-slope(&steps, &errs), rows)
}

/// Ratio of Euler global errors on `ẏ = −y`, `T = 1`, at `n` and `2n` steps.
pub fn scalar_euler_halving_ratio(n: usize) -> f64 {
    let err = |n: usize| {
        (euler(decay, &[1.0], 1.0, n).unwrap().final_y().unwrap()[0] - (-1f64).exp()).abs()
    };
    err(n) / err(2 * n)
}
