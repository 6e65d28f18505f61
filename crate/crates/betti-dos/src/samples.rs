//! Small named complexes used across tests, examples and benchmarks.

use crate::complex::SimplicialComplex;

/// Four vertices, two disjoint edges: two connected components, no loops.
pub fn two_components() -> SimplicialComplex {
    SimplicialComplex::from_maximal(4, &[&[1, 2], &[3, 4]]).unwrap()
}

/// A filled triangle: one component, its boundary loop is filled in.
pub fn filled_triangle() -> SimplicialComplex {
    SimplicialComplex::from_maximal(3, &[&[1, 2, 3]]).unwrap()
}

/// Four vertices carrying five of the six possible edges and no triangles:
/// one component with two independent loops.
pub fn two_loops() -> SimplicialComplex {
    SimplicialComplex::from_maximal(4, &[&[1, 3], &[1, 4], &[2, 3], &[2, 4], &[3, 4]]).unwrap()
}
