//! Statevectors, Pauli strings and dense Hermitian operators.
//!
//! Qubit ordering follows the little-endian convention: qubit `q` is bit `q`
//! of a basis index, and the leftmost character of a Pauli word acts on the
//! highest qubit. With that choice a word `P_{n-1} ... P_1 P_0` is exactly the
//! Kronecker product `P_{n-1} ⊗ ... ⊗ P_0`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register `to_dense` will materialise.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Imaginary residue tolerated on quantities that must be real.
pub const REAL_RESIDUE_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amps: Vec<Complex64>,
    n_qubits: usize,
}

impl Statevector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Parse(format!(
                "statevector length {len} is not a power of two"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        Ok(Self { amps, n_qubits })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Self { amps, n_qubits }
    }

    /// `|+>^{⊗n}`.
    pub fn plus_state(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            amps: vec![a; dim],
            n_qubits,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn check_same_dim(&self, other: &Statevector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        self.check_same_dim(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, factor: Complex64) -> Statevector {
        Statevector {
            amps: self.amps.iter().map(|a| a * factor).collect(),
            n_qubits: self.n_qubits,
        }
    }

    /// Returns the state divided by its norm; errors on a (numerically) zero vector.
    pub fn normalized(&self) -> Result<Statevector> {
        let n = self.norm();
        if !(n > f64::MIN_POSITIVE) || !n.is_finite() {
            return Err(Error::Inconsistent(format!(
                "cannot normalize a vector of norm {n}"
            )));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// `self + factor * other`.
    pub fn add_scaled(&mut self, factor: Complex64, other: &Statevector) -> Result<()> {
        self.check_same_dim(other)?;
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amps)
    }

    pub fn from_dvector(v: &DVector<Complex64>) -> Result<Self> {
        Self::new(v.iter().copied().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::Parse(format!("invalid Pauli character `{other}`"))),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> DMatrix<Complex64> {
        match self {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }
}

/// A tensor product of single-qubit Paulis, stored as bit masks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliWord {
    n_qubits: usize,
    /// Qubits carrying X or Y (bit flips).
    x_mask: usize,
    /// Qubits carrying Z or Y (phase flips).
    z_mask: usize,
}

impl PauliWord {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            x_mask: 0,
            z_mask: 0,
        }
    }

    /// Single Pauli `p` on qubit `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        let mut w = Self::identity(n_qubits);
        w.set(qubit, p);
        w
    }

    fn set(&mut self, qubit: usize, p: Pauli) {
        let bit = 1usize << qubit;
        self.x_mask &= !bit;
        self.z_mask &= !bit;
        match p {
            Pauli::I => {}
            Pauli::X => self.x_mask |= bit,
            Pauli::Y => {
                self.x_mask |= bit;
                self.z_mask |= bit;
            }
            Pauli::Z => self.z_mask |= bit,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Pauli acting on `qubit`.
    pub fn get(&self, qubit: usize) -> Pauli {
        let bit = 1usize << qubit;
        match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// Applies the word to `state` by index arithmetic.
    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: state.n_qubits(),
            });
        }
        // Y = iXZ, so the word is i^{#Y} X^x Z^z.
        let global = I.powu(self.y_count());
        let src = state.amplitudes();
        let mut out = vec![ZERO; src.len()];
        for (idx, amp) in src.iter().enumerate() {
            let sign = if (idx & self.z_mask).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            out[idx ^ self.x_mask] = amp * global * sign;
        }
        Statevector::new(out)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, ONE);
        for q in (0..self.n_qubits).rev() {
            m = m.kronecker(&self.get(q).matrix());
        }
        m
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.is_empty() {
            return Err(Error::Parse("empty Pauli word".into()));
        }
        let n = chars.len();
        let mut w = PauliWord::identity(n);
        for (pos, c) in chars.iter().enumerate() {
            w.set(n - 1 - pos, Pauli::from_char(*c)?);
        }
        Ok(w)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.n_qubits).rev() {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub word: PauliWord,
}

/// Hamiltonian as a real-weighted sum of Pauli words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Parse("a Pauli sum needs at least one qubit".into()));
        }
        for t in &terms {
            if t.word.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    actual: t.word.n_qubits(),
                });
            }
            if !t.coefficient.is_finite() {
                return Err(Error::NonFinite(format!("coefficient of {}", t.word)));
            }
        }
        Ok(Self { n_qubits, terms })
    }

    /// The zero operator.
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    /// Convenience constructor from `(coefficient, word)` pairs.
    pub fn from_pairs(pairs: &[(f64, &str)]) -> Result<Self> {
        let mut terms = Vec::with_capacity(pairs.len());
        for (c, w) in pairs {
            terms.push(PauliTerm {
                coefficient: *c,
                word: w.parse()?,
            });
        }
        let n = terms
            .first()
            .map(|t| t.word.n_qubits())
            .ok_or_else(|| Error::Parse("no terms".into()))?;
        Self::new(n, terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// `H + shift·I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.push(PauliTerm {
            coefficient: shift,
            word: PauliWord::identity(self.n_qubits),
        });
        Self {
            n_qubits: self.n_qubits,
            terms,
        }
    }

    fn check_state(&self, state: &Statevector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: state.n_qubits(),
            });
        }
        Ok(())
    }

    /// `H|ψ>` accumulated term by term.
    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        self.check_state(state)?;
        let mut out = Statevector::new(vec![ZERO; state.dim()])?;
        for t in &self.terms {
            let p = t.word.apply(state)?;
            out.add_scaled(Complex64::new(t.coefficient, 0.0), &p)?;
        }
        Ok(out)
    }

    /// `<ψ|H|ψ>`; the imaginary residue must stay below [`REAL_RESIDUE_TOL`].
    pub fn expectation(&self, state: &Statevector) -> Result<f64> {
        let hpsi = self.apply(state)?;
        let v = state.inner(&hpsi)?;
        if v.im.abs() > REAL_RESIDUE_TOL * (1.0 + v.re.abs()) {
            return Err(Error::Inconsistent(format!(
                "expectation has imaginary residue {:e}",
                v.im
            )));
        }
        Ok(v.re)
    }

    /// `<ψ|H²|ψ> = ‖H|ψ>‖²`.
    pub fn expectation_squared(&self, state: &Statevector) -> Result<f64> {
        Ok(self.apply(state)?.norm_sqr())
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooLarge {
                n_qubits: self.n_qubits,
                limit: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for t in &self.terms {
            m += t.word.to_dense() * Complex64::new(t.coefficient, 0.0);
        }
        Ok(m)
    }

    /// `Σ|c_k|`, an upper bound on the spectral norm.
    pub fn coefficient_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    pub fn spectral_norm(&self, mode: NormMode) -> Result<f64> {
        match mode {
            NormMode::CoefficientBound => Ok(self.coefficient_bound()),
            NormMode::Exact => Ok(HermitianEigen::new(self)?.spectral_norm()),
        }
    }
}

impl FromStr for PauliSum {
    type Err = Error;

    /// Parses lines of `<coeff> <word>`; blank lines and `#` comments are skipped.
    /// Terms may also be separated by `;` or `,` on one line.
    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for raw in s.split(['\n', ';', ',']) {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(c), Some(w), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!(
                    "expected `<coeff> <word>`, got `{line}`"
                )));
            };
            let coefficient: f64 = c
                .parse()
                .map_err(|_| Error::Parse(format!("invalid coefficient `{c}`")))?;
            terms.push(PauliTerm {
                coefficient,
                word: w.parse()?,
            });
        }
        let n = terms
            .first()
            .map(|t| t.word.n_qubits())
            .ok_or_else(|| Error::Parse("Pauli sum has no terms".into()))?;
        Self::new(n, terms)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} {}", t.coefficient, t.word)?;
        }
        Ok(())
    }
}

impl TryFrom<String> for PauliSum {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PauliSum> for String {
    fn from(h: PauliSum) -> String {
        h.to_string()
    }
}

/// How `‖H‖_∞` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    #[default]
    Exact,
    CoefficientBound,
}

/// Eigendecomposition of a Hermitian Pauli sum, ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    values: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

impl HermitianEigen {
    pub fn new(h: &PauliSum) -> Result<Self> {
        let m = h.to_dense()?;
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
        let vectors = DMatrix::from_columns(
            &order
                .iter()
                .map(|&k| eig.eigenvectors.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        Ok(Self { values, vectors })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn ground_energy(&self) -> f64 {
        self.values[0]
    }

    pub fn ground_state(&self) -> Result<Statevector> {
        Statevector::from_dvector(&self.vectors.column(0).into_owned())
    }

    /// `exp(scale·(H − shift))|ψ>` through the eigenbasis.
    pub fn apply_exp(
        &self,
        scale: Complex64,
        shift: f64,
        state: &Statevector,
    ) -> Result<Statevector> {
        if !(scale.re.is_finite() && scale.im.is_finite()) {
            return Err(Error::NonFinite("exponential scale".into()));
        }
        let dim = self.values.len();
        if state.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: state.dim(),
            });
        }
        let psi = state.to_dvector();
        let mut coeffs = self.vectors.adjoint() * psi;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= (scale * (self.values[k] - shift)).exp();
        }
        Statevector::from_dvector(&(&self.vectors * coeffs))
    }
}

/// `exp(scale·H)|ψ>` by eigendecomposition; no renormalisation.
pub fn herm_expm_apply(h: &PauliSum, scale: Complex64, state: &Statevector) -> Result<Statevector> {
    if !(scale.re.is_finite() && scale.im.is_finite()) {
        return Err(Error::NonFinite("exponential scale".into()));
    }
    HermitianEigen::new(h)?.apply_exp(scale, 0.0, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_abs_diff(a: &Statevector, b: &Statevector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn dense_z_is_diag() {
        let h = PauliSum::from_pairs(&[(1.0, "Z")]).unwrap();
        let m = h.to_dense().unwrap();
        assert_eq!(m[(0, 0)], c(1.0, 0.0));
        assert_eq!(m[(1, 1)], c(-1.0, 0.0));
        assert_eq!(m[(0, 1)], ZERO);
    }

    #[test]
    fn dense_identity_word() {
        let h = PauliSum::from_pairs(&[(0.5, "II")]).unwrap();
        let m = h.to_dense().unwrap();
        assert_eq!(m, DMatrix::identity(4, 4) * c(0.5, 0.0));
    }

    #[test]
    fn dense_size_guard() {
        let word = "Z".repeat(13);
        let h = PauliSum::from_pairs(&[(1.0, word.as_str())]).unwrap();
        assert!(matches!(h.to_dense(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn word_ordering_is_little_endian() {
        // "ZI": Z on qubit 1, the most significant bit.
        let w: PauliWord = "ZI".parse().unwrap();
        assert_eq!(w.get(1), Pauli::Z);
        assert_eq!(w.get(0), Pauli::I);
        let out = w.apply(&Statevector::basis(2, 0b10)).unwrap();
        assert_eq!(out.amplitudes()[0b10], c(-1.0, 0.0));
    }

    #[test]
    fn single_qubit_actions() {
        let x: PauliWord = "X".parse().unwrap();
        let y: PauliWord = "Y".parse().unwrap();
        let zero = Statevector::zero_state(1);
        assert_eq!(x.apply(&zero).unwrap(), Statevector::basis(1, 1));
        assert_eq!(y.apply(&zero).unwrap().amplitudes(), &[ZERO, c(0.0, 1.0)]);
        let zz: PauliWord = "ZZ".parse().unwrap();
        let s01 = Statevector::basis(2, 0b01);
        assert_eq!(zz.apply(&s01).unwrap().amplitudes()[1], c(-1.0, 0.0));
    }

    #[test]
    fn length_mismatch_rejected() {
        let zz: PauliWord = "ZZ".parse().unwrap();
        assert!(zz.apply(&Statevector::zero_state(1)).is_err());
    }

    #[test]
    fn word_application_matches_dense() {
        for w in ["XYZ", "YYI", "ZXY", "IIY"] {
            let word: PauliWord = w.parse().unwrap();
            let amps: Vec<Complex64> = (0..8)
                .map(|k| c(k as f64 * 0.1, 1.0 - k as f64 * 0.2))
                .collect();
            let st = Statevector::new(amps).unwrap();
            let via_word = word.apply(&st).unwrap();
            let via_dense =
                Statevector::from_dvector(&(word.to_dense() * st.to_dvector())).unwrap();
            assert!(max_abs_diff(&via_word, &via_dense) < 1e-14, "{w}");
        }
    }

    #[test]
    fn expectation_examples() {
        let x = PauliSum::from_pairs(&[(1.0, "X")]).unwrap();
        assert_abs_diff_eq!(
            x.expectation(&Statevector::plus_state(1)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        let z = PauliSum::from_pairs(&[(1.0, "Z")]).unwrap();
        assert_abs_diff_eq!(
            z.expectation(&Statevector::zero_state(1)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        // Z² = I on any state.
        let st = Statevector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert_abs_diff_eq!(z.expectation_squared(&st).unwrap(), 1.0, epsilon = 1e-14);
        let empty = PauliSum::zero(2);
        assert_eq!(
            empty
                .expectation_squared(&Statevector::plus_state(2))
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn spectral_norm_modes() {
        let z = PauliSum::from_pairs(&[(1.0, "Z")]).unwrap();
        assert_abs_diff_eq!(
            z.spectral_norm(NormMode::Exact).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(z.spectral_norm(NormMode::CoefficientBound).unwrap(), 1.0);
        let ii = PauliSum::from_pairs(&[(2.0, "II")]).unwrap();
        assert_abs_diff_eq!(
            ii.spectral_norm(NormMode::Exact).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let ill = PauliSum::from_pairs(&[(1.0, "ZX"), (1.0, "XZ"), (3.0, "ZZ")]).unwrap();
        assert_eq!(ill.spectral_norm(NormMode::CoefficientBound).unwrap(), 5.0);
    }

    #[test]
    fn expm_zero_scale_is_identity() {
        let h = PauliSum::from_pairs(&[(1.0, "ZX"), (0.3, "YY")]).unwrap();
        let st = Statevector::plus_state(2);
        let out = herm_expm_apply(&h, ZERO, &st).unwrap();
        assert!(max_abs_diff(&out, &st) < 1e-14);
    }

    #[test]
    fn expm_z_phase_closed_form() {
        // exp(-iπ/2 Z)|+> = (e^{-iπ/2}|0> + e^{iπ/2}|1>)/√2.
        let h = PauliSum::from_pairs(&[(1.0, "Z")]).unwrap();
        let out = herm_expm_apply(
            &h,
            c(0.0, -std::f64::consts::FRAC_PI_2),
            &Statevector::plus_state(1),
        )
        .unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expected = Statevector::new(vec![c(0.0, -r), c(0.0, r)]).unwrap();
        assert!(max_abs_diff(&out, &expected) < 1e-14);
    }

    #[test]
    fn expm_imaginary_damps_to_ground() {
        let h = PauliSum::from_pairs(&[(1.0, "Z")]).unwrap();
        let out = herm_expm_apply(&h, c(-30.0, 0.0), &Statevector::plus_state(1))
            .unwrap()
            .normalized()
            .unwrap();
        assert!((out.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expm_rejects_nonfinite_scale() {
        let h = PauliSum::from_pairs(&[(1.0, "Z")]).unwrap();
        assert!(herm_expm_apply(&h, c(f64::NAN, 0.0), &Statevector::plus_state(1)).is_err());
    }

    #[test]
    fn parse_and_display_roundtrip() {
        let h: PauliSum = "0.5716 ZZ\n0.3435 IZ # comment\n\n-0.4347 ZI"
            .parse()
            .unwrap();
        assert_eq!(h.terms().len(), 3);
        let back: PauliSum = h.to_string().parse().unwrap();
        assert_eq!(back, h);
        assert!("1.0 ZQ".parse::<PauliSum>().is_err());
        assert!("1.0 ZZ\n1.0 Z".parse::<PauliSum>().is_err());
        assert!("abc ZZ".parse::<PauliSum>().is_err());
    }
}
