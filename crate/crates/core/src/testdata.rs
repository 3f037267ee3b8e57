//! Shared fixtures for in-crate tests: the worked extension examples over a
//! free three-generator base, in basis order (b0, b1, b2, a0, a1, …) = (e0,
//! e1, e2, e3, e4, …).

use crate::algebra::GradedAlgebra;
use crate::exterior::{pair_count, WedgeVector};
use crate::fp::Prime;
use crate::linalg::{Matrix, Subspace};

pub(crate) fn p3() -> Prime {
    Prime::new(3).unwrap()
}

pub(crate) fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

/// The free base algebra on (b0, b1, b2).
pub(crate) fn base_b() -> GradedAlgebra {
    GradedAlgebra::free(p3(), 3)
}

/// Transcendental extension: a fresh generator a0 with no new relations.
pub(crate) fn a_tr() -> GradedAlgebra {
    GradedAlgebra::free(p3(), 4)
}

/// Algebraic extension: one relation a0∧b0 + b1∧b2.
pub(crate) fn a_alg() -> GradedAlgebra {
    let p = p3();
    let gen = WedgeVector::from_triples(p, 4, &[(0, 3, 2), (1, 2, 1)]);
    // a0∧b0 = -(b0∧a0), so the triple (0,3) carries coefficient -1 ≡ 2.
    let n = Subspace::span(p, pair_count(4), &[gen.coeffs().to_vec()]).unwrap();
    GradedAlgebra::new(p, 4, n).unwrap()
}

/// Prealgebraic extension: fresh a0, a1 with relations a0∧b0 + a1∧b1 and
/// a0∧a1 + b1∧b2.
pub(crate) fn a_pr() -> GradedAlgebra {
    let p = p3();
    let g1 = WedgeVector::from_triples(p, 5, &[(0, 3, 2), (1, 4, 2)]);
    let g2 = WedgeVector::from_triples(p, 5, &[(3, 4, 1), (1, 2, 1)]);
    let n = Subspace::span(p, pair_count(5), &[g1.coeffs().to_vec(), g2.coeffs().to_vec()])
        .unwrap();
    GradedAlgebra::new(p, 5, n).unwrap()
}

/// The span of the first `k` coordinate vectors inside an algebra's degree-1
/// part.
pub(crate) fn prefix_subspace(alg: &GradedAlgebra, k: usize) -> Subspace {
    let rows: Vec<Vec<u32>> = (0..k).map(|i| unit(alg.dim(), i)).collect();
    Subspace::span(alg.modulus(), alg.dim(), &rows).unwrap()
}

pub(crate) fn span_of(alg: &GradedAlgebra, rows: &[Vec<u32>]) -> Subspace {
    Subspace::span(alg.modulus(), alg.dim(), rows).unwrap()
}

/// A linear map on a subspace, given by basis images in ambient coordinates.
pub(crate) fn map_matrix(p: Prime, cols: usize, images: &[Vec<u32>]) -> Matrix {
    Matrix::from_rows(p, cols, images).unwrap()
}
