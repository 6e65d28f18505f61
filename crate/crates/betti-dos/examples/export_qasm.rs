//! Print the compiled evolution of a reference operator as OpenQASM 2.0.

use betti_dos::cartan::{cartan_split_of, khk_optimize, KhkOptions};
use betti_dos::circuit::synthesize_evolution;
use betti_dos::operator::laplacian;
use betti_dos::samples::filled_triangle;

fn main() {
    let cx = filled_triangle();
    let n = cx.n_vertices();
    let lap = laplacian(&cx, 1);
    let split = cartan_split_of(&lap, 4096).unwrap();
    let khk = khk_optimize(&lap, &split, &KhkOptions::default()).unwrap();
    let circuit = synthesize_evolution(&khk.h_sum, n, 1.0).unwrap();
    println!("{}", circuit.to_qasm());
}
