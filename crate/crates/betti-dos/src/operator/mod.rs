//! Pauli-string algebra and the operators the pipeline is built from.
//!
//! A canonical string over masks `(x, z)` is `W(x,z) = i^{|x AND z|} X^x Z^z`,
//! which is Hermitian, so Hermitian operators are real combinations of
//! canonical strings. Sums store real coefficients keyed by `(x_mask, z_mask)`
//! in ascending order; that key order is the one canonical term order used
//! everywhere (exports, circuit synthesis, basis construction).

use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

pub mod dense;

/// `(x_mask, z_mask)` of a canonical string; bit `q` acts on qubit `q + 1`.
pub type Key = (u32, u32);

/// Identity key.
pub const IDENTITY: Key = (0, 0);

/// Coefficients with magnitude at or below this are dropped from sums.
pub const PRUNE_TOL: f64 = 1e-12;

pub(crate) const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("dense operations support at most {max} qubits, got {n}")]
    TooManyQubits { n: usize, max: usize },
    #[error("operator is not Hermitian: residual imaginary weight {0:.3e}")]
    NotHermitian(f64),
}

#[inline]
fn y_count(x: u32, z: u32) -> u32 {
    (x & z).count_ones()
}

/// Number of Y factors in the canonical string; parity decides the
/// involution class used by the compilation stage.
#[inline]
pub fn key_y_count(key: Key) -> u32 {
    y_count(key.0, key.1)
}

/// Phase exponent `m` in `W(x1,z1) W(x2,z2) = i^m W(x1^x2, z1^z2)`.
#[inline]
pub(crate) fn product_phase_exp(x1: u32, z1: u32, x2: u32, z2: u32) -> u8 {
    let y1 = y_count(x1, z1) as i64;
    let y2 = y_count(x2, z2) as i64;
    let y3 = y_count(x1 ^ x2, z1 ^ z2) as i64;
    let swaps = 2 * (z1 & x2).count_ones() as i64;
    (y1 + y2 + swaps - y3).rem_euclid(4) as u8
}

/// Two canonical strings commute iff the symplectic form vanishes mod 2.
#[inline]
pub fn keys_commute(a: Key, b: Key) -> bool {
    ((a.0 & b.1).count_ones() + (a.1 & b.0).count_ones()) % 2 == 0
}

/// Pauli label with qubit 1 leftmost: per qubit I, X, Z or Y.
pub fn key_label(key: Key, n: usize) -> String {
    (0..n)
        .map(|q| match ((key.0 >> q) & 1, (key.1 >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        })
        .collect()
}

/// Parses a label produced by [`key_label`].
pub fn key_from_label(label: &str) -> Option<Key> {
    let mut x = 0u32;
    let mut z = 0u32;
    for (q, c) in label.chars().enumerate() {
        if q >= 32 {
            return None;
        }
        match c {
            'I' => {}
            'X' => x |= 1 << q,
            'Z' => z |= 1 << q,
            'Y' => {
                x |= 1 << q;
                z |= 1 << q;
            }
            _ => return None,
        }
    }
    Some((x, z))
}

/// Unit phase attached to a single Pauli string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Phase {
    #[default]
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exp(exp: u8) -> Self {
        match exp % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exp(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn value(self) -> Complex64 {
        I_POW[self.exp() as usize]
    }

    pub fn times(self, other: Phase) -> Phase {
        Phase::from_exp(self.exp() + other.exp())
    }
}

/// A phase times a canonical string: `phase * W(x_mask, z_mask)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliString {
    pub x_mask: u32,
    pub z_mask: u32,
    pub phase: Phase,
}

impl PauliString {
    pub fn new(x_mask: u32, z_mask: u32) -> Self {
        PauliString {
            x_mask,
            z_mask,
            phase: Phase::PlusOne,
        }
    }

    pub fn key(&self) -> Key {
        (self.x_mask, self.z_mask)
    }

    pub fn multiply(&self, other: &PauliString) -> PauliString {
        let m = product_phase_exp(self.x_mask, self.z_mask, other.x_mask, other.z_mask);
        PauliString {
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
            phase: self.phase.times(other.phase).times(Phase::from_exp(m)),
        }
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        keys_commute(self.key(), other.key())
    }

    pub fn label(&self, n: usize) -> String {
        key_label(self.key(), n)
    }
}

/// Hermitian operator: real coefficients over canonical strings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PauliSum {
    terms: BTreeMap<Key, f64>,
}

impl PauliSum {
    pub fn new() -> Self {
        PauliSum::default()
    }

    pub fn identity(coeff: f64) -> Self {
        let mut s = PauliSum::new();
        s.add_term(IDENTITY, coeff);
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (Key, f64)>>(terms: I) -> Self {
        let mut s = PauliSum::new();
        for (k, c) in terms {
            s.add_term(k, c);
        }
        s
    }

    pub fn add_term(&mut self, key: Key, coeff: f64) {
        let entry = self.terms.entry(key).or_insert(0.0);
        *entry += coeff;
        if entry.abs() <= PRUNE_TOL {
            self.terms.remove(&key);
        }
    }

    /// Adds `factor * other` term by term.
    pub fn add_scaled(&mut self, other: &PauliSum, factor: f64) {
        for (&k, &c) in &other.terms {
            self.add_term(k, factor * c);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.terms.retain(|_, c| {
            *c *= factor;
            c.abs() > PRUNE_TOL
        });
    }

    pub fn coeff(&self, key: Key) -> f64 {
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn identity_coeff(&self) -> f64 {
        self.coeff(IDENTITY)
    }

    /// Terms in ascending key order.
    pub fn terms(&self) -> impl Iterator<Item = (Key, f64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn keys(&self) -> impl Iterator<Item = Key> + '_ {
        self.terms.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn non_identity_len(&self) -> usize {
        self.len() - usize::from(self.terms.contains_key(&IDENTITY))
    }

    /// Copy without the identity component.
    pub fn without_identity(&self) -> PauliSum {
        let mut s = self.clone();
        s.terms.remove(&IDENTITY);
        s
    }

    /// Trace inner product up to the common `2^n` factor:
    /// `tr(A B) / 2^n = sum of coefficient products over shared keys`.
    pub fn dot(&self, other: &PauliSum) -> f64 {
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .terms
            .iter()
            .filter_map(|(k, c)| big.terms.get(k).map(|d| c * d))
            .sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Largest qubit index touched plus one; 0 for the zero operator.
    pub fn support_width(&self) -> usize {
        self.terms
            .keys()
            .map(|&(x, z)| 32 - (x | z).leading_zeros() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Lines of `signed coefficient, space, label`, in canonical term order.
    pub fn export_text(&self, n: usize) -> String {
        let mut out = String::new();
        for (&k, &c) in &self.terms {
            out.push_str(&format!("{:+.12} {}\n", c, key_label(k, n)));
        }
        out
    }
}

/// Intermediate products pick up complex coefficients; only the final
/// Hermitian combination is exposed.
#[derive(Clone, Debug, Default)]
pub(crate) struct ComplexSum {
    terms: BTreeMap<Key, Complex64>,
}

impl ComplexSum {
    const MUL_PRUNE: f64 = 1e-14;

    pub(crate) fn from_real(sum: &PauliSum) -> Self {
        ComplexSum {
            terms: sum
                .terms
                .iter()
                .map(|(&k, &c)| (k, Complex64::new(c, 0.0)))
                .collect(),
        }
    }

    pub(crate) fn multiply(&self, other: &ComplexSum) -> ComplexSum {
        let mut out: BTreeMap<Key, Complex64> = BTreeMap::new();
        for (&(x1, z1), &c1) in &self.terms {
            for (&(x2, z2), &c2) in &other.terms {
                let m = product_phase_exp(x1, z1, x2, z2);
                let key = (x1 ^ x2, z1 ^ z2);
                let contrib = c1 * c2 * I_POW[m as usize];
                let entry = out.entry(key).or_insert(Complex64::new(0.0, 0.0));
                *entry += contrib;
            }
        }
        out.retain(|_, c| c.norm() > Self::MUL_PRUNE);
        ComplexSum { terms: out }
    }

    /// Collapses to a real-coefficient sum, checking that imaginary parts are
    /// numerical noise.
    pub(crate) fn into_hermitian(self, tol: f64) -> Result<PauliSum, OperatorError> {
        let mut max_imag: f64 = 0.0;
        let mut sum = PauliSum::new();
        for (k, c) in self.terms {
            max_imag = max_imag.max(c.im.abs());
            sum.add_term(k, c.re);
        }
        if max_imag > tol {
            return Err(OperatorError::NotHermitian(max_imag));
        }
        Ok(sum)
    }
}

/// The n-term hopping operator: one term per vertex, `X` on its qubit and
/// `Z` on every lower qubit, all with coefficient 1. Squares to n times a
/// structure whose diagonal projector sandwich yields the Laplacian.
pub fn boundary_operator(n: usize) -> PauliSum {
    assert!(n >= 1 && n <= 32, "vertex count out of range");
    PauliSum::from_terms((0..n).map(|i| {
        let x = 1u32 << i;
        let z = (1u32 << i) - 1;
        ((x, z), 1.0)
    }))
}

/// Projector onto a set of computational-basis states as a sum of Z-strings:
/// the coefficient of `Z^z` is the Walsh-Hadamard transform of the indicator,
/// `2^{-n} * sum_{b in S} (-1)^{|b AND z|}`.
pub fn diagonal_projector(n: usize, states: &[u32]) -> PauliSum {
    assert!(n >= 1 && n <= 24, "projector width out of range");
    let size = 1usize << n;
    let mut f = vec![0.0f64; size];
    for &b in states {
        f[b as usize] += 1.0;
    }
    let mut half = 1;
    while half < size {
        for start in (0..size).step_by(half * 2) {
            for i in start..start + half {
                let (a, b) = (f[i], f[i + half]);
                f[i] = a + b;
                f[i + half] = a - b;
            }
        }
        half *= 2;
    }
    let scale = 1.0 / size as f64;
    PauliSum::from_terms(
        f.iter()
            .enumerate()
            .filter(|(_, &c)| c.abs() * scale > PRUNE_TOL)
            .map(|(z, &c)| ((0u32, z as u32), c * scale)),
    )
}

/// Projector onto every simplex state of the complex.
pub fn complex_projector(cx: &crate::complex::SimplicialComplex) -> PauliSum {
    diagonal_projector(cx.n_vertices(), &cx.all_masks())
}

/// Projector onto the order-k simplex states.
pub fn order_projector(cx: &crate::complex::SimplicialComplex, k: usize) -> PauliSum {
    diagonal_projector(cx.n_vertices(), &cx.simplices_of_order(k))
}

/// The order-k combinatorial Laplacian as a Pauli sum:
/// `P_k B P B P_k` with `P` the complex projector, `P_k` its order-k block
/// and `B` the hopping operator. The result is Hermitian with real
/// coefficients; it is the zero sum when the block is annihilated.
pub fn laplacian(cx: &crate::complex::SimplicialComplex, k: usize) -> PauliSum {
    let n = cx.n_vertices();
    let pk = ComplexSum::from_real(&order_projector(cx, k));
    let pg = ComplexSum::from_real(&complex_projector(cx));
    let b = ComplexSum::from_real(&boundary_operator(n));
    let product = pk.multiply(&b).multiply(&pg).multiply(&b).multiply(&pk);
    product
        .into_hermitian(1e-9)
        .expect("projector sandwich of Hermitian factors stays Hermitian")
}
