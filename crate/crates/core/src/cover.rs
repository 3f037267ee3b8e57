//! The two-sorted cover structure over a workspace: a point sort of pairs
//! `(a, u)` above the degree-1 part, with projection, translation action,
//! the tangent-style relations `T_W`, the automorphisms `σ_f` induced by
//! total graded derivations, the killing-derivation construction, and the
//! stabilizer-identity residual.

use thiserror::Error;

use crate::algebra::{AlgebraError, BracketValue, GradedAlgebra};
use crate::amalgam::{AmalgamError, Workspace};
use crate::derivation::{DerivationError, PartialDerivation};
use crate::exterior::{wedge, WedgeVector};
use crate::fp::Prime;
use crate::linalg::{add_vecs, is_zero_vec, LinalgError, Subspace};
use crate::strong::{is_strong, StrongError};

/// Errors from cover-structure evaluation.
#[derive(Debug, Error)]
pub enum CoverError {
    #[error("ambient mismatch: expected dimension {expected}, found {found}")]
    AmbientMismatch { expected: usize, found: usize },
    #[error("point-list length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("the derivation is not total on the workspace")]
    NotTotal,
    #[error("the spanned subspace carries relations; the construction needs a relation-free span")]
    RelationSpaceNotEmpty,
    #[error("the chosen vector already lies in the span")]
    VectorInSpan,
    #[error("a required subspace is not strong in the workspace")]
    NotStrong { violator: Subspace },
    #[error("the quadruple does not satisfy the defining condition of W")]
    NotOnW,
    #[error("a pair count must be at least one")]
    EmptySpec,
    #[error(transparent)]
    Strong(#[from] StrongError),
    #[error(transparent)]
    Derivation(#[from] DerivationError),
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A point of the second sort: a pair of degree-1 vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoverPoint {
    pub a: Vec<u32>,
    pub u: Vec<u32>,
}

impl CoverPoint {
    pub fn new(a: Vec<u32>, u: Vec<u32>) -> CoverPoint {
        CoverPoint { a, u }
    }
}

/// The shape of a `T_W` relation: `n` pairs, condition `Σ [x_i, y_i] = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TWSpec {
    n: usize,
}

impl TWSpec {
    pub fn new(n: usize) -> Result<TWSpec, CoverError> {
        if n == 0 {
            return Err(CoverError::EmptySpec);
        }
        Ok(TWSpec { n })
    }

    pub fn pairs(&self) -> usize {
        self.n
    }
}

/// The projection onto the first component.
pub fn project(s: &CoverPoint) -> &[u32] {
    &s.a
}

/// The translation action of the degree-1 group: `b * (a, u) = (a, u + b)`.
pub fn act(p: Prime, b: &[u32], s: &CoverPoint) -> Result<CoverPoint, CoverError> {
    if b.len() != s.a.len() || s.u.len() != s.a.len() {
        return Err(CoverError::AmbientMismatch {
            expected: s.a.len(),
            found: b.len().max(s.u.len()),
        });
    }
    Ok(CoverPoint {
        a: s.a.clone(),
        u: add_vecs(p, &s.u, b),
    })
}

fn check_points(alg: &GradedAlgebra, pts: &[CoverPoint], expected: usize) -> Result<(), CoverError> {
    if pts.len() != expected {
        return Err(CoverError::LengthMismatch {
            expected,
            found: pts.len(),
        });
    }
    let n = alg.dim();
    for s in pts {
        if s.a.len() != n || s.u.len() != n {
            return Err(CoverError::AmbientMismatch {
                expected: n,
                found: s.a.len().max(s.u.len()),
            });
        }
    }
    Ok(())
}

/// Evaluates a `T_W` instance on `n` pairs of cover points: both the sum
/// `Σ [a_i, b_i]` over first components and the mixed sum
/// `Σ ([u_i, b_i] + [a_i, v_i])` must vanish modulo the relations.
pub fn tw_holds(
    alg: &GradedAlgebra,
    spec: &TWSpec,
    xs: &[CoverPoint],
    ys: &[CoverPoint],
) -> Result<bool, CoverError> {
    check_points(alg, xs, spec.n)?;
    check_points(alg, ys, spec.n)?;
    let p = alg.modulus();
    let n = alg.dim();
    let mut first = WedgeVector::zero(p, n);
    let mut second = WedgeVector::zero(p, n);
    for (x, y) in xs.iter().zip(ys) {
        first = first.add(&wedge(p, &x.a, &y.a));
        second = second
            .add(&wedge(p, &x.u, &y.a))
            .add(&wedge(p, &x.a, &y.u));
    }
    Ok(alg.reduce_wedge(&first).is_zero() && alg.reduce_wedge(&second).is_zero())
}

/// The automorphism induced by a total graded derivation: `(a, u) ↦
/// (a, u + f(a))`, the identity on the first sort. It preserves every `T_W`
/// instance because the second sum changes by the lift of the first.
pub fn sigma_f(f: &PartialDerivation, s: &CoverPoint) -> Result<CoverPoint, CoverError> {
    if !f.is_total() {
        return Err(CoverError::NotTotal);
    }
    let n = f.algebra().dim();
    if s.a.len() != n || s.u.len() != n {
        return Err(CoverError::AmbientMismatch {
            expected: n,
            found: s.a.len().max(s.u.len()),
        });
    }
    let shift = f.apply(&s.a)?;
    Ok(CoverPoint {
        a: s.a.clone(),
        u: add_vecs(f.modulus(), &s.u, &shift),
    })
}

/// The killing derivation: on a relation-free strong span `⟨a, b_1, …⟩`,
/// the map `a ↦ e`, `b_i ↦ 0`. Validity is automatic because the span
/// carries no relations; strongness of the span and of the span plus `e`
/// keeps the map extendable through the workspace.
pub fn killing_derivation(
    ws: &Workspace,
    a: &[u32],
    bs: &[Vec<u32>],
    e: &[u32],
    enum_cap: usize,
) -> Result<PartialDerivation, CoverError> {
    let alg = ws.algebra();
    let p = alg.modulus();
    let n = alg.dim();
    if a.len() != n || e.len() != n || bs.iter().any(|b| b.len() != n) {
        return Err(CoverError::AmbientMismatch {
            expected: n,
            found: a.len().max(e.len()),
        });
    }
    let mut rows = vec![a.to_vec()];
    rows.extend(bs.iter().cloned());
    let span = Subspace::span(p, n, &rows)?;
    if !alg.relations_of(&span).is_zero() {
        return Err(CoverError::RelationSpaceNotEmpty);
    }
    let full = ws.full_space();
    let report = is_strong(alg, &span, &full, enum_cap)?;
    if let Some((violator, _)) = report.violator {
        return Err(CoverError::NotStrong { violator });
    }
    if !is_zero_vec(e) {
        if span.contains(e) {
            return Err(CoverError::VectorInSpan);
        }
        let grown = span.with_vector(e);
        let report = is_strong(alg, &grown, &full, enum_cap)?;
        if let Some((violator, _)) = report.violator {
            return Err(CoverError::NotStrong { violator });
        }
    }
    let mut pairs = vec![(a.to_vec(), e.to_vec())];
    for b in bs {
        pairs.push((b.clone(), vec![0; n]));
    }
    let f = PartialDerivation::from_pairs(alg.clone(), &pairs)?;
    debug_assert!(f.validate()?.ok);
    Ok(f)
}

/// The six-term residual of the stabilizer identity: for a quadruple with
/// first components `a, b, c, d` satisfying `[a, c] + [b, d] = 0` and shifts
/// `e_1, …, e_4` applied to them in order, returns the canonical reduction
/// of `[a, e_3] + [e_1, c] + [e_1, e_3] + [b, e_4] + [e_2, d] + [e_2, e_4]`;
/// it vanishes exactly when the shifted quadruple still satisfies the
/// defining condition.
pub fn stabilizer_residual(
    alg: &GradedAlgebra,
    pts: &[CoverPoint],
    shifts: &[Vec<u32>],
) -> Result<BracketValue, CoverError> {
    check_points(alg, pts, 4)?;
    if shifts.len() != 4 {
        return Err(CoverError::LengthMismatch {
            expected: 4,
            found: shifts.len(),
        });
    }
    let p = alg.modulus();
    let n = alg.dim();
    for e in shifts {
        if e.len() != n {
            return Err(CoverError::AmbientMismatch {
                expected: n,
                found: e.len(),
            });
        }
    }
    let (a, b, c, d) = (&pts[0].a, &pts[1].a, &pts[2].a, &pts[3].a);
    let base = wedge(p, a, c).add(&wedge(p, b, d));
    if !alg.reduce_wedge(&base).is_zero() {
        return Err(CoverError::NotOnW);
    }
    let (e1, e2, e3, e4) = (&shifts[0], &shifts[1], &shifts[2], &shifts[3]);
    let sum = wedge(p, a, e3)
        .add(&wedge(p, e1, c))
        .add(&wedge(p, e1, e3))
        .add(&wedge(p, b, e4))
        .add(&wedge(p, e2, d))
        .add(&wedge(p, e2, e4));
    Ok(alg.reduce_wedge(&sum))
}

/// The canonical `W`-instance workspace: four generators `a, b, c, d` with
/// the single relation `a∧c + b∧d`, followed by a relation-free block of
/// `fresh` extra generators.
pub fn canonical_w_workspace(
    p: Prime,
    fresh: usize,
    budget: usize,
    enum_cap: usize,
    scan_cap: u128,
) -> Result<Workspace, CoverError> {
    let dim = 4 + fresh;
    let gen = WedgeVector::from_triples(p, dim, &[(0, 2, 1), (1, 3, 1)]);
    let rels = Subspace::span(p, crate::exterior::pair_count(dim), &[gen.coeffs().to_vec()])?;
    let alg = GradedAlgebra::new(p, dim, rels)?;
    Ok(Workspace::new(alg, budget, enum_cap, scan_cap)?)
}
