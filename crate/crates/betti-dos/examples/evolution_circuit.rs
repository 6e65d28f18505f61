//! Gate counts of the compiled fixed-depth evolution versus a first-order
//! product formula whose depth grows with the step count.

use betti_dos::cartan::{cartan_split_of, khk_optimize, KhkOptions};
use betti_dos::circuit::{synthesize_evolution, synthesize_trotter};
use betti_dos::operator::laplacian;
use betti_dos::samples::two_loops;

fn main() {
    let cx = two_loops();
    let n = cx.n_vertices();
    let lap = laplacian(&cx, 1);
    let split = cartan_split_of(&lap, 4096).unwrap();
    let khk = khk_optimize(&lap, &split, &KhkOptions::default()).unwrap();

    println!("compiled evolution (depth independent of time):");
    for t in [0.1, 1.0, 5.0, 25.0] {
        let circuit = synthesize_evolution(&khk.h_sum, n, t).unwrap();
        println!(
            "  t {t:>5}: {} gates, {} CNOTs",
            circuit.gate_count(),
            circuit.cnot_count()
        );
    }

    println!("product formula at t = 1 (depth linear in steps):");
    for steps in [1, 2, 4, 8] {
        let circuit = synthesize_trotter(&lap, n, 1.0, steps).unwrap();
        println!(
            "  {steps} step(s): {} gates, {} CNOTs",
            circuit.gate_count(),
            circuit.cnot_count()
        );
    }
}
