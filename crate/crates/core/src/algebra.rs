//! Finite 2-nilpotent graded Lie algebras presented over their degree-1 part.
//!
//! An algebra is `V ⊕ (∧²V / N)` for `V = F_p^n` and a relation subspace
//! `N ⊆ ∧²V`: degree-1 vectors bracket to their wedge taken modulo N, brackets
//! of anything of degree 2 vanish. The whole structure is captured by `(p, n,
//! N)`, so subalgebra bookkeeping reduces to subspaces of `V`.
//!
//! For a subspace `B ⊆ V` the induced relation space is `N(B) = N ∩ ∧²B`, and
//! the predimension is `δ(B) = dim B - dim N(B)`. The class **K** of
//! admissible algebras requires that no nonzero decomposable wedge lies in N
//! (brackets of independent vectors never vanish) and that `δ(C) ≥ 1` for
//! every nonzero subspace `C`.

use crate::exterior::{
    find_decomposable, pair_count, wedge, wedge_square_span, ExteriorError, WedgeVector,
};
use crate::fp::Prime;
use crate::linalg::{intermediate_subspaces, LinalgError, Subspace};
use thiserror::Error;

/// Errors from algebra-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    /// The relation subspace does not live in `∧²F^n`.
    #[error("relation space has ambient {got}, expected the wedge ambient {expected} of F^{n}")]
    BadRelationAmbient { n: usize, expected: usize, got: usize },
    /// Moduli disagree.
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    /// A label list has the wrong length.
    #[error("expected {expected} labels, got {got}")]
    BadLabelCount { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

/// A 2-nilpotent graded Lie algebra presented by its degree-1 dimension and
/// relation subspace.
#[derive(Debug, Clone)]
pub struct GradedAlgebra {
    p: Prime,
    dim: usize,
    relations: Subspace,
    labels: Option<Vec<String>>,
}

/// Labels are display metadata; two algebras are equal when their modulus,
/// dimension, and canonical relation spaces agree.
impl PartialEq for GradedAlgebra {
    fn eq(&self, other: &GradedAlgebra) -> bool {
        self.p == other.p && self.dim == other.dim && self.relations == other.relations
    }
}

impl Eq for GradedAlgebra {}

impl GradedAlgebra {
    /// The free algebra: no relations.
    pub fn free(p: Prime, dim: usize) -> GradedAlgebra {
        GradedAlgebra {
            p,
            dim,
            relations: Subspace::zero(p, pair_count(dim)),
            labels: None,
        }
    }

    pub fn new(p: Prime, dim: usize, relations: Subspace) -> Result<GradedAlgebra, AlgebraError> {
        if relations.modulus() != p {
            return Err(AlgebraError::ModulusMismatch {
                left: p.get(),
                right: relations.modulus().get(),
            });
        }
        if relations.ambient_dim() != pair_count(dim) {
            return Err(AlgebraError::BadRelationAmbient {
                n: dim,
                expected: pair_count(dim),
                got: relations.ambient_dim(),
            });
        }
        Ok(GradedAlgebra {
            p,
            dim,
            relations,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<GradedAlgebra, AlgebraError> {
        if labels.len() != self.dim {
            return Err(AlgebraError::BadLabelCount {
                expected: self.dim,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    /// Dimension of the degree-1 part.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the degree-2 part `∧²V / N`.
    pub fn degree2_dim(&self) -> usize {
        pair_count(self.dim) - self.relations.dim()
    }

    pub fn relations(&self) -> &Subspace {
        &self.relations
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label_of(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => format!("e{i}"),
        }
    }

    /// The degree-1 part as a subspace of itself.
    pub fn full_space(&self) -> Subspace {
        Subspace::full(self.p, self.dim)
    }

    /// Bracket of two degree-1 vectors: the class of `x ∧ y` in `∧²V / N`,
    /// held by its canonical coset representative.
    pub fn bracket(&self, x: &[u32], y: &[u32]) -> BracketValue {
        let w = wedge(self.p, x, y);
        self.reduce_wedge(&w)
    }

    /// Canonical representative of the class of a wedge vector mod N.
    pub fn reduce_wedge(&self, w: &WedgeVector) -> BracketValue {
        let rep = self.relations.reduce(w.coeffs());
        BracketValue {
            rep: WedgeVector::from_coeffs(self.p, self.dim, rep),
        }
    }

    /// Relation space of a subspace: `N(B) = N ∩ ∧²B`.
    pub fn relations_of(&self, sub: &Subspace) -> Subspace {
        debug_assert_eq!(sub.ambient_dim(), self.dim, "subspace of the degree-1 part");
        self.relations
            .intersect(&wedge_square_span(sub))
            .expect("wedge ambients agree by construction")
    }

    /// Predimension `δ(B) = dim B - dim N(B)`.
    pub fn predim(&self, sub: &Subspace) -> i64 {
        sub.dim() as i64 - self.relations_of(sub).dim() as i64
    }

    /// Relative predimension `δ(B / C) = δ(B) - δ(C)`.
    pub fn rel_predim(&self, sub: &Subspace, base: &Subspace) -> i64 {
        self.predim(sub) - self.predim(base)
    }

    /// The support of the relation space: the sum of the supports of its
    /// canonical generators. Every relation of the algebra lies in the wedge
    /// square of this subspace.
    pub fn relation_support(&self) -> Subspace {
        let mut supp = Subspace::zero(self.p, self.dim);
        for row in self.relations.basis_rows() {
            let w = WedgeVector::from_coeffs(self.p, self.dim, row);
            supp = supp.sum(&w.support()).unwrap();
        }
        supp
    }

    /// Re-presents the algebra over a larger degree-1 ambient, zero-padding
    /// the relations.
    pub fn pad_to(&self, dim: usize) -> GradedAlgebra {
        assert!(dim >= self.dim);
        let rows: Vec<Vec<u32>> = self
            .relations
            .basis_rows()
            .into_iter()
            .map(|r| {
                WedgeVector::from_coeffs(self.p, self.dim, r)
                    .pad_to(dim)
                    .coeffs()
                    .to_vec()
            })
            .collect();
        GradedAlgebra {
            p: self.p,
            dim,
            relations: Subspace::span(self.p, pair_count(dim), &rows).unwrap(),
            labels: None,
        }
    }

    /// Checks membership in class K.
    ///
    /// Condition 1 (no decomposable relations) is an exhaustive scan of N up
    /// to scalar. Condition 2 (`δ(C) ≥ 1` for nonzero `C`) is checked by
    /// exhaustive enumeration over one of two index sets, both exact: a
    /// violator `C` can be replaced by the joint support of `N ∩ ∧²C`, which
    /// sits inside both `C` and `supp N`, carries at least as many relations,
    /// and so has predimension no larger. Violations are therefore witnessed
    /// both among the subspaces of the relation support and among the joint
    /// supports of subspaces of `N` itself; the check scans the support when
    /// its dimension fits `enum_cap` and falls back to subspaces of `N`
    /// otherwise. `scan_cap` guards the decomposability scan.
    pub fn check_class_k(
        &self,
        enum_cap: usize,
        scan_cap: u128,
    ) -> Result<ClassKReport, AlgebraError> {
        if let Some((v, w)) = find_decomposable(self.dim, &self.relations, scan_cap)? {
            return Ok(ClassKReport {
                ok: false,
                witness: Some(ClassKWitness::DecomposableRelation { v, w }),
            });
        }
        match self.low_predim_witness(enum_cap)? {
            Some((subspace, predim)) => Ok(ClassKReport {
                ok: false,
                witness: Some(ClassKWitness::LowPredim { subspace, predim }),
            }),
            None => Ok(ClassKReport { ok: true, witness: None }),
        }
    }

    /// A nonzero subspace of predimension below one, if any exists. Any
    /// violator intersects into the relation support without raising its
    /// predimension, so the search is exact: it scans the support when its
    /// dimension fits `enum_cap` and falls back to walking subspaces of the
    /// relation space (through their joint minimal supports) otherwise.
    pub fn low_predim_witness(
        &self,
        enum_cap: usize,
    ) -> Result<Option<(Subspace, i64)>, AlgebraError> {
        let supp = self.relation_support();
        if supp.dim() <= enum_cap {
            let zero = Subspace::zero(self.p, self.dim);
            for c in intermediate_subspaces(&zero, &supp, enum_cap)? {
                if c.is_zero() {
                    continue;
                }
                let delta = self.predim(&c);
                if delta < 1 {
                    return Ok(Some((c, delta)));
                }
            }
            return Ok(None);
        }
        let zero_rel = Subspace::zero(self.p, pair_count(self.dim));
        for w_space in intermediate_subspaces(&zero_rel, &self.relations, enum_cap)? {
            if w_space.is_zero() {
                continue;
            }
            let mut c = Subspace::zero(self.p, self.dim);
            for row in w_space.basis_rows() {
                let w = WedgeVector::from_coeffs(self.p, self.dim, row);
                c = c.sum(&w.support())?;
            }
            let delta = self.predim(&c);
            if delta < 1 {
                return Ok(Some((c, delta)));
            }
        }
        Ok(None)
    }
}

/// A degree-2 value: the canonical coset representative of a wedge modulo the
/// relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BracketValue {
    rep: WedgeVector,
}

impl BracketValue {
    pub fn representative(&self) -> &WedgeVector {
        &self.rep
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    pub fn add(&self, other: &BracketValue) -> BracketValue {
        BracketValue {
            rep: self.rep.add(&other.rep),
        }
    }
}

/// Outcome of a class-K membership check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassKReport {
    pub ok: bool,
    pub witness: Option<ClassKWitness>,
}

/// Why an algebra fails to be in class K.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassKWitness {
    /// Independent vectors whose wedge is a relation (their bracket vanishes).
    DecomposableRelation { v: Vec<u32>, w: Vec<u32> },
    /// A nonzero subspace with predimension below 1.
    LowPredim { subspace: Subspace, predim: i64 },
}
