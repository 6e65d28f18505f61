//! Build filtered complexes from a small point cloud and watch the simplex
//! counts change with the scale parameter.

use betti_dos::complex::{build_vietoris_rips, Metric, PointCloud};

fn main() {
    // four corners of a unit square plus its center
    let cloud = PointCloud::new(vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 1.0],
        vec![0.5, 0.5],
    ])
    .unwrap();

    for epsilon in [0.5, 0.75, 1.1, 1.5] {
        let cx = build_vietoris_rips(&cloud, Metric::Euclidean, epsilon, None).unwrap();
        let counts: Vec<usize> = (0..cloud.len()).map(|k| cx.s_count(k)).collect();
        println!("epsilon {epsilon:>4}: simplices per order {counts:?}");
    }

    // at 0.75 the center connects to every corner but the sides are too long,
    // so the complex is a 4-star: one component, no loops
    let star = build_vietoris_rips(&cloud, Metric::Euclidean, 0.75, None).unwrap();
    println!(
        "star: {} vertices, {} edges, {} triangles",
        star.s_count(0),
        star.s_count(1),
        star.s_count(2)
    );

    // the same cloud under the manhattan metric connects the sides sooner
    let taxi = build_vietoris_rips(&cloud, Metric::Manhattan, 1.05, None).unwrap();
    println!(
        "manhattan at 1.05: {} edges, {} triangles",
        taxi.s_count(1),
        taxi.s_count(2)
    );
}
