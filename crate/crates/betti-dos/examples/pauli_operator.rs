//! Pauli-string form of the projected Laplacian and of the hopping operator
//! it is built from.

use betti_dos::operator::dense::to_dense;
use betti_dos::operator::{boundary_operator, key_label, key_y_count, laplacian};
use betti_dos::samples::two_components;
use num_complex::Complex64;

fn main() {
    let cx = two_components();
    let n = cx.n_vertices();

    let b = boundary_operator(n);
    println!("hopping operator on {n} qubits, {} strings:", b.len());
    for (key, coeff) in b.terms() {
        println!("  {:+.1} {}", coeff, key_label(key, n));
    }
    // n anticommuting involutory strings square to n times the identity
    let dense = to_dense(&b, n);
    let square = &dense * &dense;
    let corner = square[(0, 0)];
    let expected = Complex64::new(n as f64, 0.0);
    println!("B^2 diagonal entry {corner} (expected {expected})");

    let lap = laplacian(&cx, 0);
    println!(
        "\norder-0 Laplacian: {} terms ({} non-identity), identity weight {:.4}",
        lap.len(),
        lap.non_identity_len(),
        lap.identity_coeff()
    );
    let mut shown = 0;
    for (key, coeff) in lap.terms() {
        if shown == 8 {
            println!("  ...");
            break;
        }
        println!("  {:+.4} {}", coeff, key_label(key, n));
        shown += 1;
    }
    // every string carries an even number of Y factors, so the dense form
    // is real-symmetric
    assert!(lap.keys().all(|key| key_y_count(key) % 2 == 0));
    println!("all strings have an even Y count");
}
