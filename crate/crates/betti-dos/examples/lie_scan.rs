//! Mean Lie-closure dimension over every clique complex on four labelled
//! vertices, grouped by edge count and homology order. Dimensions grow
//! toward the crowded low-order corner of the table and vanish for orders
//! with no simplices.

use betti_dos::cartan::lie_dim_scan;
use std::collections::BTreeMap;

fn main() {
    let n = 4;
    let mut table: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for k in 0..n {
        for row in lie_dim_scan(n, k, 4096).unwrap() {
            table.insert((row.edges, row.k), (row.mean_dim, row.count));
        }
    }

    print!("edges\\k ");
    for k in 0..n {
        print!("{k:>8}");
    }
    println!("   graphs");
    for edges in 0..=6 {
        print!("{edges:>7} ");
        let mut count = 0;
        for k in 0..n {
            let (dim, c) = table[&(edges, k)];
            count = c;
            print!("{dim:>8.1}");
        }
        println!("   {count:>6}");
    }
}
