//! Free amalgamation over strong bases, and the growing workspace.
//!
//! Two algebras sharing a strong base glue into their free amalgam: the
//! degree-1 spaces are joined over the base with no identification between
//! the complements, and the relation space is the sum of the two factors'
//! relations. The `Workspace` wraps an algebra that only ever grows by such
//! amalgams — it is the finite stand-in for a rich ambient model, and every
//! growth step validates that the result stays in class K, that the old
//! relations are untouched, and that the embedded factor lands strongly.
//!
//! Conventions: a factor presented "over" a base carries the base as its
//! first coordinates. Inside the workspace the base may be any strong
//! subspace; the embedding matches the factor's base prefix to the subspace's
//! canonical basis, in order, and appends fresh coordinates for the rest.

use crate::algebra::{AlgebraError, ClassKWitness, GradedAlgebra};
use crate::exterior::{pair_count, InducedWedgeMap, WedgeVector};
use crate::fp::Prime;
use crate::linalg::{LinalgError, Matrix, Subspace};
use crate::strong::{is_strong, StrongError};
use thiserror::Error;

/// Which factor of an amalgam an error refers to. In workspace growth the
/// left factor is the workspace and the right factor is the extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

/// Errors from amalgamation and workspace growth.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmalgamError {
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("base dimension {base} exceeds the {side} factor dimension {factor}")]
    BaseTooLarge { base: usize, side: Side, factor: usize },
    #[error("the base is not strong in the {side} factor")]
    BaseNotStrong { side: Side, violator: Subspace },
    #[error("the {side} factor is not in class K")]
    FactorNotInK { side: Side, witness: ClassKWitness },
    #[error("the factors disagree on the relations over the base")]
    BaseRelationMismatch { left: Subspace, right: Subspace },
    #[error("the amalgam leaves class K")]
    AmalgamNotInK { witness: ClassKWitness },
    #[error("the {side} factor does not embed strongly in the amalgam")]
    ImageNotStrong { side: Side, violator: Subspace },
    #[error("growth to {needed} ambient dimensions exceeds the budget of {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("embedding map is not injective")]
    NotInjective,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Strong(#[from] StrongError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// An injective linear map of degree-1 spaces, by images of the source's
/// coordinate vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    map: Matrix,
}

impl Embedding {
    pub fn new(map: Matrix) -> Result<Embedding, AmalgamError> {
        if map.rank() != map.rows() {
            return Err(AmalgamError::NotInjective);
        }
        Ok(Embedding { map })
    }

    pub fn source_dim(&self) -> usize {
        self.map.rows()
    }

    pub fn target_dim(&self) -> usize {
        self.map.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.map
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        self.map.apply(v)
    }

    pub fn induced(&self) -> InducedWedgeMap {
        InducedWedgeMap::new(&self.map)
    }

    pub fn apply_subspace(&self, sub: &Subspace) -> Subspace {
        let p = self.map.modulus();
        let rows: Vec<Vec<u32>> = sub.basis_rows().iter().map(|r| self.apply(r)).collect();
        Subspace::span(p, self.target_dim(), &rows).unwrap()
    }

    /// The image of the whole source space.
    pub fn image(&self) -> Subspace {
        let rows: Vec<Vec<u32>> = self.map.iter_rows().map(|r| r.to_vec()).collect();
        Subspace::span(self.map.modulus(), self.target_dim(), &rows).unwrap()
    }
}

/// The span of the first `m` coordinate vectors.
fn prefix_space(p: Prime, ambient: usize, m: usize) -> Subspace {
    let rows: Vec<Vec<u32>> = (0..m)
        .map(|i| {
            let mut v = vec![0u32; ambient];
            v[i] = 1;
            v
        })
        .collect();
    Subspace::span(p, ambient, &rows).unwrap()
}

/// Relations of a factor that live over its base prefix, re-expressed in the
/// base's own coordinates.
fn base_relations(alg: &GradedAlgebra, m: usize) -> Subspace {
    let p = alg.modulus();
    let prefix = prefix_space(p, alg.dim(), m);
    let rows: Vec<Vec<u32>> = alg
        .relations_of(&prefix)
        .basis_rows()
        .into_iter()
        .map(|r| {
            // Supported on the first m coordinates, so truncation is exact.
            let w = WedgeVector::from_coeffs(p, alg.dim(), r);
            let mut out = WedgeVector::zero(p, m);
            for i in 0..m {
                for j in (i + 1)..m {
                    out.add_term(i, j, w.coeff(i, j));
                }
            }
            out.coeffs().to_vec()
        })
        .collect();
    Subspace::span(p, pair_count(m), &rows).unwrap()
}

fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0u32; n];
    v[i] = 1;
    v
}

/// Result of a free amalgam: the joined algebra and the two factor
/// embeddings.
#[derive(Debug, Clone)]
pub struct AmalgamOutcome {
    pub algebra: GradedAlgebra,
    pub left: Embedding,
    pub right: Embedding,
}

fn validate_factor(
    alg: &GradedAlgebra,
    m: usize,
    side: Side,
    enum_cap: usize,
    scan_cap: u128,
) -> Result<(), AmalgamError> {
    if m > alg.dim() {
        return Err(AmalgamError::BaseTooLarge {
            base: m,
            side,
            factor: alg.dim(),
        });
    }
    let report = alg.check_class_k(enum_cap, scan_cap)?;
    if let Some(witness) = report.witness {
        return Err(AmalgamError::FactorNotInK { side, witness });
    }
    let prefix = prefix_space(alg.modulus(), alg.dim(), m);
    let strength = is_strong(alg, &prefix, &alg.full_space(), enum_cap)?;
    if let Some((violator, _)) = strength.violator {
        return Err(AmalgamError::BaseNotStrong { side, violator });
    }
    Ok(())
}

/// Free amalgam of two factors over their common base prefix of dimension
/// `base_dim`. Output coordinates: the base, then the left complement, then
/// the right complement. Both factors must be in class K with the base
/// strong; the result is validated in class K and both embeddings are
/// validated strong — failures are reported, never repaired.
pub fn free_amalgam(
    base_dim: usize,
    left: &GradedAlgebra,
    right: &GradedAlgebra,
    enum_cap: usize,
    scan_cap: u128,
) -> Result<AmalgamOutcome, AmalgamError> {
    let p = left.modulus();
    if right.modulus() != p {
        return Err(AmalgamError::ModulusMismatch {
            left: p.get(),
            right: right.modulus().get(),
        });
    }
    validate_factor(left, base_dim, Side::Left, enum_cap, scan_cap)?;
    validate_factor(right, base_dim, Side::Right, enum_cap, scan_cap)?;
    let left_base = base_relations(left, base_dim);
    let right_base = base_relations(right, base_dim);
    if left_base != right_base {
        return Err(AmalgamError::BaseRelationMismatch {
            left: left_base,
            right: right_base,
        });
    }
    let k1 = left.dim() - base_dim;
    let k2 = right.dim() - base_dim;
    let ambient = base_dim + k1 + k2;
    let mut left_rows = Vec::with_capacity(left.dim());
    for i in 0..left.dim() {
        left_rows.push(unit(ambient, i));
    }
    let mut right_rows = Vec::with_capacity(right.dim());
    for i in 0..base_dim {
        right_rows.push(unit(ambient, i));
    }
    for j in 0..k2 {
        right_rows.push(unit(ambient, base_dim + k1 + j));
    }
    let left_emb = Embedding::new(Matrix::from_rows(p, ambient, &left_rows)?)?;
    let right_emb = Embedding::new(Matrix::from_rows(p, ambient, &right_rows)?)?;
    let relations = left_emb
        .induced()
        .apply_subspace(left.relations())
        .sum(&right_emb.induced().apply_subspace(right.relations()))?;
    let algebra = GradedAlgebra::new(p, ambient, relations)?;
    let report = algebra.check_class_k(enum_cap, scan_cap)?;
    if let Some(witness) = report.witness {
        return Err(AmalgamError::AmalgamNotInK { witness });
    }
    for (emb, side) in [(&left_emb, Side::Left), (&right_emb, Side::Right)] {
        let strength = is_strong(&algebra, &emb.image(), &algebra.full_space(), enum_cap)?;
        if let Some((violator, _)) = strength.violator {
            return Err(AmalgamError::ImageNotStrong { side, violator });
        }
    }
    Ok(AmalgamOutcome {
        algebra,
        left: left_emb,
        right: right_emb,
    })
}

/// One logged growth step of a workspace.
#[derive(Debug, Clone)]
pub struct GrowthRecord {
    /// The base subspace, in the pre-growth ambient.
    pub base: Subspace,
    /// The extension algebra that was embedded.
    pub extension: GradedAlgebra,
    /// The embedding of the extension into the post-growth ambient.
    pub embedding: Embedding,
}

/// A finite algebra in class K that grows only by free amalgams over strong
/// bases.
#[derive(Debug, Clone)]
pub struct Workspace {
    algebra: GradedAlgebra,
    history: Vec<GrowthRecord>,
    budget: usize,
}

impl Workspace {
    /// Wraps an algebra, validating class-K membership and the budget.
    pub fn new(
        algebra: GradedAlgebra,
        budget: usize,
        enum_cap: usize,
        scan_cap: u128,
    ) -> Result<Workspace, AmalgamError> {
        if algebra.dim() > budget {
            return Err(AmalgamError::BudgetExceeded {
                needed: algebra.dim(),
                budget,
            });
        }
        let report = algebra.check_class_k(enum_cap, scan_cap)?;
        if let Some(witness) = report.witness {
            return Err(AmalgamError::FactorNotInK {
                side: Side::Left,
                witness,
            });
        }
        Ok(Workspace {
            algebra,
            history: Vec::new(),
            budget,
        })
    }

    /// The zero-dimensional workspace.
    pub fn empty(p: Prime, budget: usize) -> Workspace {
        Workspace {
            algebra: GradedAlgebra::free(p, 0),
            history: Vec::new(),
            budget,
        }
    }

    pub fn algebra(&self) -> &GradedAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn modulus(&self) -> Prime {
        self.algebra.modulus()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn history(&self) -> &[GrowthRecord] {
        &self.history
    }

    pub fn full_space(&self) -> Subspace {
        self.algebra.full_space()
    }

    /// Grows the workspace by the free amalgam of its algebra with `ext`
    /// over `base`. The extension carries the base as its coordinate prefix,
    /// matched in order to the canonical basis of `base`; the complement of
    /// the prefix lands on fresh coordinates appended to the ambient.
    /// Returns the embedding of the extension.
    pub fn embed_extension(
        &mut self,
        base: &Subspace,
        ext: &GradedAlgebra,
        enum_cap: usize,
        scan_cap: u128,
    ) -> Result<Embedding, AmalgamError> {
        let p = self.modulus();
        if ext.modulus() != p {
            return Err(AmalgamError::ModulusMismatch {
                left: p.get(),
                right: ext.modulus().get(),
            });
        }
        let n = self.dim();
        let m = base.dim();
        if m > ext.dim() {
            return Err(AmalgamError::BaseTooLarge {
                base: m,
                side: Side::Right,
                factor: ext.dim(),
            });
        }
        let k = ext.dim() - m;
        let grown_dim = n + k;
        if grown_dim > self.budget {
            return Err(AmalgamError::BudgetExceeded {
                needed: grown_dim,
                budget: self.budget,
            });
        }
        let strength = is_strong(&self.algebra, base, &self.algebra.full_space(), enum_cap)?;
        if let Some((violator, _)) = strength.violator {
            return Err(AmalgamError::BaseNotStrong {
                side: Side::Left,
                violator,
            });
        }
        validate_factor(ext, m, Side::Right, enum_cap, scan_cap)?;
        // The factors must agree on the relations over the base, read
        // through the prefix-to-basis correspondence.
        let ws_base_rel = {
            let rows: Vec<Vec<u32>> = self
                .algebra
                .relations_of(base)
                .basis_rows()
                .into_iter()
                .map(|r| {
                    let w = WedgeVector::from_coeffs(p, n, r);
                    // Rewrite over the canonical basis of `base`: solve the
                    // coordinates over its basis wedges.
                    wedge_coordinates(base, &w)
                })
                .collect();
            Subspace::span(p, pair_count(m), &rows).unwrap()
        };
        let ext_base_rel = base_relations(ext, m);
        if ws_base_rel != ext_base_rel {
            return Err(AmalgamError::BaseRelationMismatch {
                left: ws_base_rel,
                right: ext_base_rel,
            });
        }
        let mut rows = Vec::with_capacity(ext.dim());
        for r in base.basis_rows() {
            let mut padded = r;
            padded.resize(grown_dim, 0);
            rows.push(padded);
        }
        for j in 0..k {
            rows.push(unit(grown_dim, n + j));
        }
        let embedding = Embedding::new(Matrix::from_rows(p, grown_dim, &rows)?)?;
        let old_relations = {
            let padded: Vec<Vec<u32>> = self
                .algebra
                .relations()
                .basis_rows()
                .into_iter()
                .map(|r| {
                    WedgeVector::from_coeffs(p, n, r)
                        .pad_to(grown_dim)
                        .coeffs()
                        .to_vec()
                })
                .collect();
            Subspace::span(p, pair_count(grown_dim), &padded).unwrap()
        };
        let relations = old_relations.sum(&embedding.induced().apply_subspace(ext.relations()))?;
        let grown = GradedAlgebra::new(p, grown_dim, relations)?;
        let report = grown.check_class_k(enum_cap, scan_cap)?;
        if let Some(witness) = report.witness {
            return Err(AmalgamError::AmalgamNotInK { witness });
        }
        let image = embedding.image();
        let strength = is_strong(&grown, &image, &grown.full_space(), enum_cap)?;
        if let Some((violator, _)) = strength.violator {
            return Err(AmalgamError::ImageNotStrong {
                side: Side::Right,
                violator,
            });
        }
        debug_assert_eq!(
            grown.relations_of(&self.algebra.full_space().pad_to(grown_dim)),
            old_relations,
            "growth never disturbs existing relations"
        );
        self.history.push(GrowthRecord {
            base: base.clone(),
            extension: ext.clone(),
            embedding: embedding.clone(),
        });
        self.algebra = grown;
        Ok(embedding)
    }

    /// Replays a sequence of growth steps from this workspace. Deterministic:
    /// the same steps always produce the same algebra.
    pub fn replay_steps<'a, I>(
        &mut self,
        steps: I,
        enum_cap: usize,
        scan_cap: u128,
    ) -> Result<Vec<Embedding>, AmalgamError>
    where
        I: IntoIterator<Item = (&'a Subspace, &'a GradedAlgebra)>,
    {
        let mut embeddings = Vec::new();
        for (base, ext) in steps {
            embeddings.push(self.embed_extension(base, ext, enum_cap, scan_cap)?);
        }
        Ok(embeddings)
    }
}

/// Coordinates of a wedge supported on `sub` over the basis wedges of `sub`.
pub(crate) fn wedge_coordinates(sub: &Subspace, w: &WedgeVector) -> Vec<u32> {
    let p = sub.modulus();
    let rows: Vec<Vec<u32>> = crate::exterior::basis_wedges(sub)
        .into_iter()
        .map(|bw| bw.coeffs().to_vec())
        .collect();
    let matrix = Matrix::from_rows(p, w.coeffs().len(), &rows).unwrap();
    matrix
        .solve_left(w.coeffs())
        .expect("the wedge is supported on the subspace")
}
