//! The two overlap tests agree analytically and converge with shots.

use betti_dos::circuit::{
    destructive_swap_probability, mirror_probability, Circuit, Gate, NoiseModel, ShotSpec,
};

fn ghz_pair(n: usize) -> (Circuit, Circuit) {
    let mut a = Circuit::new(n);
    a.push(Gate::H(0)).unwrap();
    for q in 1..n {
        a.push(Gate::CNOT {
            control: 0,
            target: q,
        })
        .unwrap();
    }
    let mut b = Circuit::new(n);
    b.push(Gate::H(0)).unwrap();
    b.push(Gate::S(0)).unwrap();
    for q in 1..n {
        b.push(Gate::CNOT {
            control: 0,
            target: q,
        })
        .unwrap();
    }
    (a, b)
}

fn main() {
    let (a, b) = ghz_pair(3);
    let empty = Circuit::new(3);

    let mirror = mirror_probability(&a, &empty, &b, None, ShotSpec::Analytic, 0).unwrap();
    let swap = destructive_swap_probability(&a, &b, None, ShotSpec::Analytic, 0).unwrap();
    println!(
        "analytic |<b|a>|^2: mirror {:.6}, swap {:.6}",
        mirror.probability, swap.probability
    );

    println!("sampled mirror estimates:");
    for shots in [100u64, 1_000, 10_000, 100_000] {
        let est = mirror_probability(&a, &empty, &b, None, ShotSpec::Shots(shots), 7).unwrap();
        println!(
            "  {shots:>6} shots: {:.4} +- {:.4}",
            est.probability, est.std_error
        );
    }

    // depolarizing noise pushes the return probability toward the uniform
    // mixture, so the estimate shrinks
    let noise = NoiseModel::new(0.002, 0.02).unwrap();
    let noisy = mirror_probability(&a, &empty, &b, Some(&noise), ShotSpec::Shots(100_000), 7)
        .unwrap();
    println!(
        "with depolarizing noise (p1 0.002, p2 0.02): {:.4}",
        noisy.probability
    );
}
