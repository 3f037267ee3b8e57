//! Shared fixtures for the benchmark targets.

use nil2_core::{GradedAlgebra, Prime, Subspace, WedgeVector};

pub const ENUM_CAP: usize = 6;

pub fn p3() -> Prime {
    Prime::new(3).unwrap()
}

/// A dense but class-K algebra of the given dimension: one relation tying
/// the first four coordinates, as in the canonical instance.
pub fn w_algebra(dim: usize) -> GradedAlgebra {
    assert!(dim >= 4);
    let p = p3();
    let gen = WedgeVector::from_triples(p, dim, &[(0, 2, 1), (1, 3, 1)]);
    let relations = Subspace::line(p, gen.coeffs());
    GradedAlgebra::new(p, dim, relations).unwrap()
}

/// Deterministic pseudo-random rows for matrix kernels, without pulling in
/// an RNG dependency: a simple linear congruence over F_p.
pub fn dense_rows(rows: usize, cols: usize, salt: u32) -> Vec<Vec<u32>> {
    let mut state = salt.wrapping_mul(2654435761).wrapping_add(12345);
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    state = state.wrapping_mul(1103515245).wrapping_add(12345);
                    (state >> 16) % 3
                })
                .collect()
        })
        .collect()
}
