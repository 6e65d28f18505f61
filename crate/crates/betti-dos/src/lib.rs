//! Classical laboratory for estimating Betti numbers of simplicial complexes by
//! spectral counting. The combinatorial Laplacian of a complex is built as a
//! sparse Pauli-string sum, compiled into a fixed-depth evolution circuit through
//! a Lie-algebraic (Cartan) decomposition, sampled through interferometric
//! overlap measurements under configurable shot and depolarizing noise, and read
//! out as integer eigenvalue multiplicities via Fourier analysis of the sampled
//! trace signal. An exact dense-matrix oracle validates every stage at small
//! sizes.
//!
//! Module map:
//! - [`complex`]: point clouds, Vietoris-Rips/clique construction, explicit
//!   complexes, simplex enumeration and projector bases.
//! - [`operator`]: Pauli-string algebra, the involutory boundary operator,
//!   diagonal projectors, combinatorial Laplacians, and the dense oracle.
//! - [`cartan`]: commutator closure, involution split, Cartan-subalgebra
//!   selection, and the angle optimization extracting a commuting effective
//!   Hamiltonian with the same spectrum as the Laplacian.
//! - [`circuit`]: gate-level synthesis of evolutions and state preparations, a
//!   statevector simulator with shots and stochastic Pauli noise, and the two
//!   overlap estimators (mirror and destructive swap).
//! - [`dos`]: sampling plans, trace reconstruction from overlap probabilities,
//!   signal post-processing, trigonometric/spline interpolation, Fourier
//!   coefficients, and rank/Betti estimates.
//! - [`pipeline`]: run configuration, orchestration, reports and file artifacts.
//! - [`samples`]: small built-in complexes used by tests and examples.

pub mod cartan;
pub mod circuit;
pub mod complex;
pub mod dos;
pub mod operator;
pub mod pipeline;
pub(crate) mod rng;
pub mod samples;
