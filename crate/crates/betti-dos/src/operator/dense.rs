//! Dense reference evaluation: matrices, spectra, Betti numbers and trace
//! signals computed by eigendecomposition. This is the ground truth the
//! sampled pipeline is checked against; it scales as `4^n` and is capped
//! accordingly.

use super::{OperatorError, PauliSum, I_POW};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Width cap for dense eigendecompositions.
pub const MAX_DENSE_QUBITS: usize = 14;

/// Eigenvalues at or below this count toward the kernel.
pub const RANK_TOL: f64 = 1e-9;

pub(crate) fn dense_of_terms<I: IntoIterator<Item = ((u32, u32), Complex64)>>(
    terms: I,
    n: usize,
) -> DMatrix<Complex64> {
    let size = 1usize << n;
    let mut m = DMatrix::zeros(size, size);
    for ((x, z), c) in terms {
        let phased = c * I_POW[((x & z).count_ones() % 4) as usize];
        for b in 0..size {
            let sign = if (b as u32 & z).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            m[(b ^ x as usize, b)] += phased * sign;
        }
    }
    m
}

/// Dense matrix of a Hermitian sum on `n` qubits.
pub fn to_dense(sum: &PauliSum, n: usize) -> DMatrix<Complex64> {
    assert!(n <= MAX_DENSE_QUBITS, "dense width cap exceeded");
    assert!(sum.support_width() <= n, "sum acts outside the register");
    dense_of_terms(sum.terms().map(|(k, c)| (k, Complex64::new(c, 0.0))), n)
}

fn check_width(sum: &PauliSum, n: usize) -> Result<(), OperatorError> {
    if n > MAX_DENSE_QUBITS {
        return Err(OperatorError::TooManyQubits {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    assert!(sum.support_width() <= n, "sum acts outside the register");
    Ok(())
}

fn sorted_eigen(m: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let size = m.nrows();
    if size == 0 {
        return (Vec::new(), m);
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(size, size);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// All `2^n` eigenvalues, ascending.
pub fn exact_spectrum(sum: &PauliSum, n: usize) -> Result<Vec<f64>, OperatorError> {
    check_width(sum, n)?;
    Ok(sorted_eigen(to_dense(sum, n)).0)
}

/// Eigenvalues of the principal submatrix on the given basis states,
/// ascending. For a projector-bracketed operator this carries its whole
/// nonzero spectrum.
pub fn block_spectrum(
    sum: &PauliSum,
    n: usize,
    basis: &[u32],
) -> Result<Vec<f64>, OperatorError> {
    check_width(sum, n)?;
    let dense = to_dense(sum, n);
    let d = basis.len();
    let mut block = DMatrix::zeros(d, d);
    for (r, &br) in basis.iter().enumerate() {
        for (c, &bc) in basis.iter().enumerate() {
            block[(r, c)] = dense[(br as usize, bc as usize)];
        }
    }
    Ok(sorted_eigen(block).0)
}

/// Number of eigenvalues above the kernel tolerance.
pub fn rank_of_spectrum(spectrum: &[f64]) -> usize {
    spectrum.iter().filter(|&&v| v > RANK_TOL).count()
}

/// Order-k Betti number by exact kernel counting on the Laplacian block.
pub fn exact_betti(
    cx: &crate::complex::SimplicialComplex,
    k: usize,
) -> Result<usize, OperatorError> {
    let lap = super::laplacian(cx, k);
    let basis = cx.simplices_of_order(k);
    let spectrum = block_spectrum(&lap, cx.n_vertices(), &basis)?;
    Ok(basis.len() - rank_of_spectrum(&spectrum))
}

/// Eigendecomposition packaged for signal evaluation: full trace signals,
/// per-basis-state diagonal signals and arbitrary matrix elements of
/// `exp(-iHt)`.
pub struct EigenSystem {
    pub n: usize,
    /// Ascending eigenvalues, all `2^n` of them.
    pub eigenvalues: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl EigenSystem {
    pub fn new(sum: &PauliSum, n: usize) -> Result<Self, OperatorError> {
        check_width(sum, n)?;
        let (eigenvalues, vectors) = sorted_eigen(to_dense(sum, n));
        Ok(EigenSystem {
            n,
            eigenvalues,
            vectors,
        })
    }

    /// `tr exp(-iHt)` over the full register.
    pub fn trace_signal(&self, t: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * t))
            .sum()
    }

    /// `<a| exp(-iHt) |b>`.
    pub fn matrix_element(&self, a: u32, b: u32, t: f64) -> Complex64 {
        (0..self.eigenvalues.len())
            .map(|nu| {
                self.vectors[(a as usize, nu)]
                    * self.vectors[(b as usize, nu)].conj()
                    * Complex64::from_polar(1.0, -self.eigenvalues[nu] * t)
            })
            .sum()
    }

    /// `<b| exp(-iHt) |b>`.
    pub fn diagonal_signal(&self, b: u32, t: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(nu, &l)| {
                self.vectors[(b as usize, nu)].norm_sqr() * Complex64::from_polar(1.0, -l * t)
            })
            .sum()
    }

    pub fn rank(&self) -> usize {
        rank_of_spectrum(&self.eigenvalues)
    }
}

/// `tr exp(-iHt)` at each requested time, over the full `2^n` register.
pub fn exact_trace_signal(
    sum: &PauliSum,
    n: usize,
    times: &[f64],
) -> Result<Vec<Complex64>, OperatorError> {
    let eig = EigenSystem::new(sum, n)?;
    Ok(times.iter().map(|&t| eig.trace_signal(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::SimplicialComplex;
    use crate::operator::laplacian;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn two_disjoint_edges_have_two_components() {
        let cx = SimplicialComplex::from_maximal(4, &[&[1, 2], &[3, 4]]).unwrap();
        assert_eq!(exact_betti(&cx, 0).unwrap(), 2);
    }

    #[test]
    fn filled_triangle_has_no_loop() {
        let cx = SimplicialComplex::from_maximal(3, &[&[1, 2, 3]]).unwrap();
        assert_eq!(exact_betti(&cx, 0).unwrap(), 1);
        assert_eq!(exact_betti(&cx, 1).unwrap(), 0);
    }

    #[test]
    fn five_edge_graph_block_spectrum_and_loops() {
        let cx =
            SimplicialComplex::from_maximal(4, &[&[1, 3], &[1, 4], &[2, 3], &[2, 4], &[3, 4]])
                .unwrap();
        let lap = laplacian(&cx, 1);
        let spec = block_spectrum(&lap, 4, &cx.simplices_of_order(1)).unwrap();
        let expected = [0.0, 0.0, 2.0, 4.0, 4.0];
        assert_eq!(spec.len(), expected.len());
        for (got, want) in spec.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
        assert_eq!(rank_of_spectrum(&spec), 3);
        assert_eq!(exact_betti(&cx, 1).unwrap(), 2);
    }

    #[test]
    fn trace_signal_of_five_edge_graph() {
        let cx =
            SimplicialComplex::from_maximal(4, &[&[1, 3], &[1, 4], &[2, 3], &[2, 4], &[3, 4]])
                .unwrap();
        let lap = laplacian(&cx, 1);
        let sig = exact_trace_signal(&lap, 4, &[0.0, PI / 2.0, PI]).unwrap();
        assert_abs_diff_eq!(sig[0].re, 16.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sig[0].im, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sig[1].re, 14.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sig[1].im, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sig[2].re, 16.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sig[2].im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn diagonal_signals_sum_to_trace_signal() {
        let cx = SimplicialComplex::from_maximal(3, &[&[1, 2, 3]]).unwrap();
        let lap = laplacian(&cx, 1);
        let eig = EigenSystem::new(&lap, 3).unwrap();
        for &t in &[0.3, 1.7, 4.0] {
            let total: num_complex::Complex64 =
                (0..8).map(|b| eig.diagonal_signal(b, t)).sum();
            let direct = eig.trace_signal(t);
            assert!((total - direct).norm() < 1e-9);
        }
    }

    #[test]
    fn matrix_elements_form_unitary_rows() {
        let cx = SimplicialComplex::from_maximal(3, &[&[1, 2], &[2, 3]]).unwrap();
        let lap = laplacian(&cx, 0);
        let eig = EigenSystem::new(&lap, 3).unwrap();
        let t = 0.9;
        for a in 0..8u32 {
            let row_norm: f64 = (0..8u32)
                .map(|b| eig.matrix_element(a, b, t).norm_sqr())
                .sum();
            assert_abs_diff_eq!(row_norm, 1.0, epsilon = 1e-9);
            let diag = eig.matrix_element(a, a, t);
            assert!((diag - eig.diagonal_signal(a, t)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_operator_spectrum_is_flat() {
        let zero = PauliSum::new();
        let spec = exact_spectrum(&zero, 2).unwrap();
        assert_eq!(spec, vec![0.0; 4]);
        assert_eq!(rank_of_spectrum(&spec), 0);
    }
}
