//! Compile a projected Laplacian into a commuting core: Lie closure,
//! involution split, frame optimization, and the isospectrality check.

use betti_dos::cartan::{cartan_split_of, khk_optimize, KhkOptions};
use betti_dos::operator::dense::exact_spectrum;
use betti_dos::operator::{key_label, laplacian};
use betti_dos::samples::two_loops;

fn main() {
    let cx = two_loops();
    let n = cx.n_vertices();
    let lap = laplacian(&cx, 1);
    println!("operator: {} Pauli terms", lap.len());

    let split = cartan_split_of(&lap, 4096).unwrap();
    println!(
        "closure dim {}, antisymmetric side {}, symmetric side {}",
        split.basis.dim(),
        split.k_indices.len(),
        split.m_indices.len()
    );

    let khk = khk_optimize(&lap, &split, &KhkOptions::default()).unwrap();
    println!(
        "optimized in {} iterations ({} restarts), residual {:.3e}",
        khk.iterations, khk.restarts_used, khk.residual
    );
    println!("core ({} terms):", khk.h_sum.len());
    for (key, coeff) in khk.h_sum.terms() {
        println!("  {:+.6} {}", coeff, key_label(key, n));
    }

    // conjugation preserves the spectrum
    let direct = exact_spectrum(&lap, n).unwrap();
    let core = exact_spectrum(&khk.h_sum, n).unwrap();
    let deviation = direct
        .iter()
        .zip(&core)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("max spectral deviation from the full operator {deviation:.2e}");
}
