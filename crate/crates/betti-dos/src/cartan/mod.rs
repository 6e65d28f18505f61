//! Lie-algebraic compilation data: commutator closure of an operator's
//! strings, the symmetry split of that algebra, and a maximal abelian
//! subalgebra to diagonalize into.
//!
//! Everything works on phaseless canonical keys. The split classifies a
//! string by the parity of its Y count: even-Y strings are real symmetric
//! matrices (class `m`), odd-Y strings real antisymmetric (class `k`, the
//! generators of the orthogonal frame rotations).

use crate::complex::{clique_complex, ComplexError};
use crate::operator::{keys_commute, laplacian, key_y_count, Key, PauliSum, IDENTITY};
use rayon::prelude::*;
use std::collections::{HashMap, HashSet};
use thiserror::Error;

pub mod khk;

pub use khk::{khk_optimize, KhkOptions, KhkResult};

/// Default cap on closure size.
pub const CLOSURE_CAP: usize = 4096;

#[derive(Debug, Error)]
pub enum CartanError {
    #[error("closure seed is empty after removing the identity term")]
    EmptySeed,
    #[error("commutator closure exceeded the cap of {cap} strings")]
    ClosureCapExceeded { cap: usize },
    #[error("basis is not closed: commutator of elements {i} and {j} is outside the basis")]
    NotClosed { i: usize, j: usize },
    #[error("split relation violated by elements {i} and {j}")]
    SplitRelation { i: usize, j: usize },
    #[error("no abelian subalgebra available (empty m part)")]
    EmptyCsa,
    #[error("optimization did not reach the residual tolerance; best residual {best:.3e}")]
    NotConverged { best: f64 },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Ordered basis of the commutator closure; order is insertion order, which
/// downstream stages treat as canonical.
#[derive(Clone, Debug)]
pub struct LieBasis {
    keys: Vec<Key>,
    index: HashMap<Key, usize>,
}

impl LieBasis {
    fn from_keys(keys: Vec<Key>) -> Self {
        let index = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        LieBasis { keys, index }
    }

    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    pub fn keys(&self) -> &[Key] {
        &self.keys
    }

    pub fn key(&self, idx: usize) -> Key {
        self.keys[idx]
    }

    pub fn position(&self, key: Key) -> Option<usize> {
        self.index.get(&key).copied()
    }
}

/// Key of `[a, b]` up to scale, or None when the strings commute.
pub fn commutator_key(a: Key, b: Key) -> Option<Key> {
    if keys_commute(a, b) {
        None
    } else {
        Some((a.0 ^ b.0, a.1 ^ b.1))
    }
}

/// Breadth-first commutator closure of the operator's strings. The identity
/// string rides along if present (it commutes with everything and generates
/// nothing). Deterministic: seed strings in canonical order, commutators in
/// discovery order.
pub fn lie_closure(seed: &PauliSum, cap: usize) -> Result<LieBasis, CartanError> {
    let keys: Vec<Key> = seed.keys().collect();
    if keys.iter().all(|&k| k == IDENTITY) {
        return Err(CartanError::EmptySeed);
    }
    let mut seen: HashSet<Key> = keys.iter().copied().collect();
    let mut list = keys;
    if list.len() > cap {
        return Err(CartanError::ClosureCapExceeded { cap });
    }
    let mut i = 1;
    while i < list.len() {
        for j in 0..i {
            if let Some(c) = commutator_key(list[i], list[j]) {
                if seen.insert(c) {
                    if list.len() == cap {
                        return Err(CartanError::ClosureCapExceeded { cap });
                    }
                    list.push(c);
                }
            }
        }
        i += 1;
    }
    Ok(LieBasis::from_keys(list))
}

/// The closure basis partitioned by the symmetry involution, plus the chosen
/// abelian subalgebra (empty until selected). All three field vectors hold
/// indices into `basis` and preserve basis order (`h_indices` preserves its
/// own greedy selection order).
#[derive(Clone, Debug)]
pub struct CartanSplit {
    pub basis: LieBasis,
    /// Odd-Y elements: antisymmetric, the frame rotation generators.
    pub k_indices: Vec<usize>,
    /// Even-Y elements: symmetric; the operator to compile lives here.
    pub m_indices: Vec<usize>,
    /// Mutually commuting subset of `m_indices`, maximal once selected.
    pub h_indices: Vec<usize>,
}

impl CartanSplit {
    pub fn k_keys(&self) -> Vec<Key> {
        self.k_indices.iter().map(|&i| self.basis.key(i)).collect()
    }

    pub fn h_keys(&self) -> Vec<Key> {
        self.h_indices.iter().map(|&i| self.basis.key(i)).collect()
    }
}

#[inline]
fn is_m_class(key: Key) -> bool {
    key_y_count(key) % 2 == 0
}

/// Splits the closure by Y-count parity and verifies, pair by pair, that the
/// basis is commutator-closed and the three class relations hold:
/// same-class commutators land in `k`, mixed-class in `m`.
pub fn involution_split(basis: LieBasis) -> Result<CartanSplit, CartanError> {
    let dim = basis.dim();
    for i in 0..dim {
        for j in 0..i {
            if let Some(c) = commutator_key(basis.key(i), basis.key(j)) {
                let Some(pos) = basis.position(c) else {
                    return Err(CartanError::NotClosed { i, j });
                };
                let same_class = is_m_class(basis.key(i)) == is_m_class(basis.key(j));
                let c_in_k = !is_m_class(basis.key(pos));
                if same_class != c_in_k {
                    return Err(CartanError::SplitRelation { i, j });
                }
            }
        }
    }
    let (m_indices, k_indices): (Vec<usize>, Vec<usize>) =
        (0..dim).partition(|&i| is_m_class(basis.key(i)));
    Ok(CartanSplit {
        basis,
        k_indices,
        m_indices,
        h_indices: Vec::new(),
    })
}

/// Greedy maximal abelian subalgebra of `m`: first the operator's own
/// strings in canonical order (those lying in `m`), then every further `m`
/// element, in basis order, that commutes with all current members.
pub fn select_cartan_subalgebra(
    mut split: CartanSplit,
    hamiltonian: &PauliSum,
) -> Result<CartanSplit, CartanError> {
    if split.m_indices.is_empty() {
        return Err(CartanError::EmptyCsa);
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_keys: Vec<Key> = Vec::new();
    let push_if_commuting = |idx: usize, key: Key, chosen: &mut Vec<usize>, chosen_keys: &mut Vec<Key>| {
        if chosen_keys.iter().all(|&c| keys_commute(c, key)) {
            chosen.push(idx);
            chosen_keys.push(key);
        }
    };
    for key in hamiltonian.keys() {
        if let Some(idx) = split.basis.position(key) {
            if is_m_class(key) && !chosen.contains(&idx) {
                push_if_commuting(idx, key, &mut chosen, &mut chosen_keys);
            }
        }
    }
    for &idx in &split.m_indices {
        let key = split.basis.key(idx);
        if !chosen.contains(&idx) {
            push_if_commuting(idx, key, &mut chosen, &mut chosen_keys);
        }
    }
    if chosen.is_empty() {
        return Err(CartanError::EmptyCsa);
    }
    split.h_indices = chosen;
    Ok(split)
}

/// Convenience: closure, split and subalgebra selection for one operator.
pub fn cartan_split_of(sum: &PauliSum, cap: usize) -> Result<CartanSplit, CartanError> {
    let basis = lie_closure(sum, cap)?;
    let split = involution_split(basis)?;
    select_cartan_subalgebra(split, sum)
}

/// One row of the dimension scan table.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub edges: usize,
    pub k: usize,
    pub mean_dim: f64,
    pub count: usize,
}

/// Closure dimension of the order-k Laplacian algebra, averaged over every
/// graph on `n` labelled vertices (as clique complexes), grouped by edge
/// count. The zero operator counts as dimension 0.
pub fn lie_dim_scan(n: usize, k: usize, cap: usize) -> Result<Vec<ScanRow>, CartanError> {
    assert!((1..=5).contains(&n), "scan is exhaustive; n must be 1..=5");
    let mut pairs = Vec::new();
    for a in 1..=n {
        for b in (a + 1)..=n {
            pairs.push((a, b));
        }
    }
    let graph_count = 1usize << pairs.len();
    let dims: Vec<Result<(usize, usize), CartanError>> = (0..graph_count)
        .into_par_iter()
        .map(|g| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| g >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let cx = clique_complex(n, &edges)?;
            let lap = laplacian(&cx, k);
            let dim = if lap.without_identity().is_zero() {
                0
            } else {
                lie_closure(&lap, cap)?.dim()
            };
            Ok((edges.len(), dim))
        })
        .collect();
    let mut totals = vec![(0usize, 0usize); pairs.len() + 1];
    for r in dims {
        let (edges, dim) = r?;
        totals[edges].0 += dim;
        totals[edges].1 += 1;
    }
    Ok(totals
        .iter()
        .enumerate()
        .map(|(edges, &(sum, count))| ScanRow {
            edges,
            k,
            mean_dim: sum as f64 / count as f64,
            count,
        })
        .collect())
}
