//! Exact Betti numbers of the three reference complexes by dense
//! diagonalization of the simplex-space block.

use betti_dos::operator::dense::{block_spectrum, exact_betti, rank_of_spectrum};
use betti_dos::operator::laplacian;
use betti_dos::samples::{filled_triangle, two_components, two_loops};

fn main() {
    for (name, cx) in [
        ("two components", two_components()),
        ("filled triangle", filled_triangle()),
        ("loop pair", two_loops()),
    ] {
        let n = cx.n_vertices();
        println!("{name} ({n} vertices)");
        for k in 0..n {
            let s_k = cx.s_count(k);
            if s_k == 0 {
                continue;
            }
            let lap = laplacian(&cx, k);
            let block = block_spectrum(&lap, n, &cx.simplices_of_order(k)).unwrap();
            let rank = rank_of_spectrum(&block);
            let beta = exact_betti(&cx, k).unwrap();
            let eigs: Vec<String> = block.iter().map(|v| format!("{v:.2}")).collect();
            println!(
                "  k={k}: |S_k| {s_k}, eigenvalues [{}], rank {rank}, beta {beta}",
                eigs.join(", ")
            );
        }
    }
}
