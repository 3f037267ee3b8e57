//! Partial graded derivations and the machinery for extending them: free
//! pseudosolutions, decomposable-witness solving, and the workspace-growing
//! extension driver.
//!
//! A partial derivation is a linear map `f` from a subspace `B` of the
//! degree-1 part into the ambient degree-1 part whose Leibniz lift sends
//! every relation supported on `B` back into the relation space. Extending
//! such a map to a larger strong subspace either succeeds inside the current
//! workspace (when a forced decomposable wedge pins the new image down) or
//! requires growing the workspace by a free amalgam.

use thiserror::Error;

use crate::algebra::{AlgebraError, GradedAlgebra};
use crate::amalgam::{wedge_coordinates, AmalgamError, Workspace};
use crate::exterior::{
    basis_wedges, find_decomposable, flat_to_pair, pair_count, wedge, wedge_square_span,
    ExteriorError, LeibnizLift, WedgeVector, DEFAULT_SCAN_CAP,
};
use crate::fp::Prime;
use crate::linalg::{
    add_scaled, is_zero_vec, neg_vec, scale_vec, sub_vecs, LinalgError, Matrix, Subspace,
};
use crate::strong::{
    classify_step, is_strong, minimal_tower, self_sufficient_closure, ExtensionKind, StrongError,
};

/// Errors raised by derivation construction, validation, and extension.
#[derive(Debug, Error)]
pub enum DerivationError {
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("ambient mismatch: expected dimension {expected}, found {found}")]
    AmbientMismatch { expected: usize, found: usize },
    #[error("image rows do not match the domain: {rows} rows for a domain of dimension {dim}")]
    ShapeMismatch { rows: usize, dim: usize },
    #[error("the pairs do not define a map: a dependency among domain vectors fails on the images")]
    InconsistentPairs,
    #[error("vector lies outside the domain of the map")]
    OutsideDomain { vector: Vec<u32> },
    #[error("not a derivation: a lifted relation generator leaves the relation space")]
    NotDerivation { generator: WedgeVector },
    #[error("the base is not contained in the target")]
    BaseNotInTarget,
    #[error("the map's domain differs from the problem base")]
    DomainMismatch,
    #[error("the base is not strong in the target: violator of predimension {predim}")]
    BaseNotStrongInTarget { violator: Subspace, predim: i64 },
    #[error("target plus mapped base is not strong in the workspace: violator of predimension {predim}")]
    AugmentedTargetNotStrong { violator: Subspace, predim: i64 },
    #[error("the derivation's algebra differs from the workspace algebra")]
    WorkspaceMismatch,
    #[error("the domain is not strong in the workspace")]
    DomainNotStrong { violator: Subspace },
    #[error("the domain plus its image is not strong in the workspace")]
    DomainImageNotStrong { violator: Subspace },
    #[error("the intermediate subspace does not sit between base and target")]
    IntermediateOutOfRange,
    #[error("extension recursion depth exhausted (limit {limit})")]
    DepthExhausted { limit: usize },
    #[error("internal inconsistency: {detail}")]
    Inconsistent { detail: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Strong(#[from] StrongError),
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn inconsistent(detail: &str) -> DerivationError {
    DerivationError::Inconsistent {
        detail: detail.to_string(),
    }
}

/// Outcome of checking the derivation condition on a map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    /// A relation generator whose lift leaves the relation space, if any.
    pub violating_generator: Option<WedgeVector>,
}

fn pad_vec(v: &[u32], n: usize) -> Vec<u32> {
    let mut out = v.to_vec();
    out.resize(n, 0);
    out
}

fn unit_vec(n: usize, i: usize) -> Vec<u32> {
    let mut out = vec![0; n];
    out[i] = 1;
    out
}

/// A linear map from a subspace of the degree-1 part into the degree-1 part,
/// stored as the images of the domain's canonical basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialDerivation {
    algebra: GradedAlgebra,
    domain: Subspace,
    images: Matrix,
}

impl PartialDerivation {
    /// Wraps a domain and an image row per canonical basis vector.
    pub fn new(
        algebra: GradedAlgebra,
        domain: Subspace,
        images: Matrix,
    ) -> Result<PartialDerivation, DerivationError> {
        let p = algebra.modulus();
        if domain.modulus() != p || images.modulus() != p {
            return Err(DerivationError::ModulusMismatch {
                left: p.get(),
                right: domain.modulus().get().max(images.modulus().get()),
            });
        }
        let n = algebra.dim();
        if domain.ambient_dim() != n {
            return Err(DerivationError::AmbientMismatch {
                expected: n,
                found: domain.ambient_dim(),
            });
        }
        if images.cols() != n {
            return Err(DerivationError::AmbientMismatch {
                expected: n,
                found: images.cols(),
            });
        }
        if images.rows() != domain.dim() {
            return Err(DerivationError::ShapeMismatch {
                rows: images.rows(),
                dim: domain.dim(),
            });
        }
        Ok(PartialDerivation {
            algebra,
            domain,
            images,
        })
    }

    /// The zero map on `domain`.
    pub fn zero(algebra: GradedAlgebra, domain: Subspace) -> Result<PartialDerivation, DerivationError> {
        let p = algebra.modulus();
        let n = algebra.dim();
        let images = Matrix::zero(p, domain.dim(), n);
        PartialDerivation::new(algebra, domain, images)
    }

    /// Builds a map from `(vector, image)` pairs and converts it to the
    /// canonical basis of the spanned domain. Fails when a linear dependency
    /// among the listed vectors does not hold among the listed images.
    pub fn from_pairs(
        algebra: GradedAlgebra,
        pairs: &[(Vec<u32>, Vec<u32>)],
    ) -> Result<PartialDerivation, DerivationError> {
        let p = algebra.modulus();
        let n = algebra.dim();
        for (v, w) in pairs {
            if v.len() != n || w.len() != n {
                return Err(DerivationError::AmbientMismatch {
                    expected: n,
                    found: v.len().max(w.len()),
                });
            }
        }
        let dom_rows: Vec<Vec<u32>> = pairs.iter().map(|(v, _)| v.clone()).collect();
        let img_rows: Vec<Vec<u32>> = pairs.iter().map(|(_, w)| w.clone()).collect();
        let dom_matrix = Matrix::from_rows(p, n, &dom_rows)?;
        let img_matrix = Matrix::from_rows(p, n, &img_rows)?;
        for krow in dom_matrix.left_kernel().basis_rows() {
            if !is_zero_vec(&img_matrix.apply(&krow)) {
                return Err(DerivationError::InconsistentPairs);
            }
        }
        let domain = Subspace::from_matrix(&dom_matrix);
        let mut images = Vec::with_capacity(domain.dim());
        for b in domain.basis_rows() {
            let x = dom_matrix
                .solve_left(&b)
                .expect("canonical basis vectors lie in the row space");
            images.push(img_matrix.apply(&x));
        }
        PartialDerivation::new(algebra, domain, Matrix::from_rows(p, n, &images)?)
    }

    pub fn algebra(&self) -> &GradedAlgebra {
        &self.algebra
    }

    pub fn modulus(&self) -> Prime {
        self.algebra.modulus()
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    /// Image rows aligned with the canonical basis of the domain.
    pub fn images(&self) -> &Matrix {
        &self.images
    }

    /// The span of the images.
    pub fn image_space(&self) -> Subspace {
        Subspace::from_matrix(&self.images)
    }

    /// Whether the domain is the full degree-1 part.
    pub fn is_total(&self) -> bool {
        self.domain.dim() == self.algebra.dim()
    }

    /// Applies the map to a vector of the domain.
    pub fn apply(&self, v: &[u32]) -> Result<Vec<u32>, DerivationError> {
        let coords = self
            .domain
            .coordinates_of(v)
            .ok_or_else(|| DerivationError::OutsideDomain { vector: v.to_vec() })?;
        Ok(self.images.apply(&coords))
    }

    /// The `(basis vector, image)` pairs over the canonical basis.
    pub fn pairs(&self) -> Vec<(Vec<u32>, Vec<u32>)> {
        self.domain
            .basis_rows()
            .into_iter()
            .zip(self.images.iter_rows().map(|r| r.to_vec()))
            .collect()
    }

    /// The Leibniz lift of the map on the wedge square of the domain.
    pub fn lift(&self) -> LeibnizLift {
        LeibnizLift::new(&self.domain, &self.images)
    }

    /// Checks the derivation condition: the lift of every canonical
    /// generator of the domain's relation space must stay inside the
    /// relation space (equivalently, inside the relations of domain plus
    /// image, since a lifted wedge never leaves that wedge square).
    pub fn validate(&self) -> Result<ValidationReport, DerivationError> {
        let lift = self.lift();
        let rels = self.algebra.relations_of(&self.domain);
        for row in rels.basis_rows() {
            let gen = WedgeVector::from_coeffs(self.modulus(), self.algebra.dim(), row);
            let image = lift.apply(&gen)?;
            if !self.algebra.reduce_wedge(&image).is_zero() {
                return Ok(ValidationReport {
                    ok: false,
                    violating_generator: Some(gen),
                });
            }
        }
        Ok(ValidationReport {
            ok: true,
            violating_generator: None,
        })
    }

    fn require_valid(&self) -> Result<(), DerivationError> {
        let report = self.validate()?;
        match report.violating_generator {
            None => Ok(()),
            Some(generator) => Err(DerivationError::NotDerivation { generator }),
        }
    }

    /// Extends the map by additional `(vector, image)` pairs.
    pub fn extend_with(
        &self,
        extra: &[(Vec<u32>, Vec<u32>)],
    ) -> Result<PartialDerivation, DerivationError> {
        let mut pairs = self.pairs();
        pairs.extend_from_slice(extra);
        PartialDerivation::from_pairs(self.algebra.clone(), &pairs)
    }

    /// Restricts the map to a subspace of its domain.
    pub fn restrict(&self, to: &Subspace) -> Result<PartialDerivation, DerivationError> {
        if !to.is_subspace_of(&self.domain) {
            let row = to
                .basis_rows()
                .into_iter()
                .find(|r| !self.domain.contains(r))
                .unwrap_or_default();
            return Err(DerivationError::OutsideDomain { vector: row });
        }
        let mut images = Vec::with_capacity(to.dim());
        for b in to.basis_rows() {
            images.push(self.apply(&b)?);
        }
        let images = Matrix::from_rows(self.modulus(), self.algebra.dim(), &images)?;
        PartialDerivation::new(self.algebra.clone(), to.clone(), images)
    }

    /// Pointwise sum of two maps on the same domain. The derivation
    /// condition is linear, so the sum of valid maps stays valid.
    pub fn add(&self, other: &PartialDerivation) -> Result<PartialDerivation, DerivationError> {
        if self.algebra != other.algebra || self.domain != other.domain {
            return Err(DerivationError::DomainMismatch);
        }
        let p = self.modulus();
        let rows: Vec<Vec<u32>> = self
            .images
            .iter_rows()
            .zip(other.images.iter_rows())
            .map(|(a, b)| crate::linalg::add_vecs(p, a, b))
            .collect();
        let images = Matrix::from_rows(p, self.algebra.dim(), &rows)?;
        PartialDerivation::new(self.algebra.clone(), self.domain.clone(), images)
    }

    /// The pointwise negation of the map.
    pub fn negate(&self) -> PartialDerivation {
        let p = self.modulus();
        let rows: Vec<Vec<u32>> = self.images.iter_rows().map(|r| neg_vec(p, r)).collect();
        let images = Matrix::from_rows(p, self.algebra.dim(), &rows)
            .expect("negation preserves the shape");
        PartialDerivation {
            algebra: self.algebra.clone(),
            domain: self.domain.clone(),
            images,
        }
    }

    /// Re-presents the map over a larger algebra obtained by zero-padding.
    pub fn promote(&self, algebra: &GradedAlgebra) -> Result<PartialDerivation, DerivationError> {
        if algebra.modulus() != self.modulus() {
            return Err(DerivationError::ModulusMismatch {
                left: self.modulus().get(),
                right: algebra.modulus().get(),
            });
        }
        let n = algebra.dim();
        if n < self.algebra.dim() {
            return Err(DerivationError::AmbientMismatch {
                expected: self.algebra.dim(),
                found: n,
            });
        }
        let rows: Vec<Vec<u32>> = self.images.iter_rows().map(|r| pad_vec(r, n)).collect();
        PartialDerivation::new(
            algebra.clone(),
            self.domain.pad_to(n),
            Matrix::from_rows(self.modulus(), n, &rows)?,
        )
    }
}

/// A derivation extension problem: a map on `base` to be extended to
/// `target`, inside the workspace algebra the map lives in.
#[derive(Debug, Clone)]
pub struct ExtensionProblem {
    base: Subspace,
    target: Subspace,
    map: PartialDerivation,
}

impl ExtensionProblem {
    /// Validates and wraps a problem: the base must equal the map's domain
    /// and be strong in the target, and the target plus the mapped base must
    /// be strong in the workspace.
    pub fn new(
        base: Subspace,
        target: Subspace,
        map: PartialDerivation,
        enum_cap: usize,
    ) -> Result<ExtensionProblem, DerivationError> {
        let alg = map.algebra();
        let p = alg.modulus();
        let n = alg.dim();
        if base.modulus() != p || target.modulus() != p {
            return Err(DerivationError::ModulusMismatch {
                left: p.get(),
                right: base.modulus().get().max(target.modulus().get()),
            });
        }
        if base.ambient_dim() != n || target.ambient_dim() != n {
            return Err(DerivationError::AmbientMismatch {
                expected: n,
                found: base.ambient_dim().max(target.ambient_dim()),
            });
        }
        if !base.is_subspace_of(&target) {
            return Err(DerivationError::BaseNotInTarget);
        }
        if map.domain() != &base {
            return Err(DerivationError::DomainMismatch);
        }
        map.require_valid()?;
        let report = is_strong(alg, &base, &target, enum_cap)?;
        if let Some((violator, predim)) = report.violator {
            return Err(DerivationError::BaseNotStrongInTarget { violator, predim });
        }
        let augmented = target.sum(&map.image_space())?;
        let report = is_strong(alg, &augmented, &alg.full_space(), enum_cap)?;
        if let Some((violator, predim)) = report.violator {
            return Err(DerivationError::AugmentedTargetNotStrong { violator, predim });
        }
        Ok(ExtensionProblem { base, target, map })
    }

    pub fn base(&self) -> &Subspace {
        &self.base
    }

    pub fn target(&self) -> &Subspace {
        &self.target
    }

    pub fn map(&self) -> &PartialDerivation {
        &self.map
    }

    pub fn algebra(&self) -> &GradedAlgebra {
        self.map.algebra()
    }

    /// The target plus the mapped base, in the workspace ambient.
    pub fn augmented_target(&self) -> Result<Subspace, DerivationError> {
        Ok(self.target.sum(&self.map.image_space())?)
    }
}

/// The free pseudosolution of an extension problem: the ambient grows by one
/// fresh coordinate per new target direction, the map sends the canonical
/// complement onto those fresh coordinates, and the lifted target relations
/// are adjoined to the relation space.
#[derive(Debug, Clone)]
pub struct Pseudosolution {
    problem: ExtensionProblem,
    extended_algebra: GradedAlgebra,
    extended: PartialDerivation,
    new_relations: Vec<WedgeVector>,
    fresh_start: usize,
    fresh_count: usize,
}

impl Pseudosolution {
    pub fn problem(&self) -> &ExtensionProblem {
        &self.problem
    }

    pub fn extended_algebra(&self) -> &GradedAlgebra {
        &self.extended_algebra
    }

    /// The freely extended map on the padded target.
    pub fn extended(&self) -> &PartialDerivation {
        &self.extended
    }

    /// Lifts of the canonical target relation generators, in the enlarged
    /// wedge ambient, aligned with the generators' canonical order.
    pub fn new_relations(&self) -> &[WedgeVector] {
        &self.new_relations
    }

    /// Index of the first fresh coordinate.
    pub fn fresh_start(&self) -> usize {
        self.fresh_start
    }

    /// Number of fresh coordinates (the codimension of base in target).
    pub fn fresh_count(&self) -> usize {
        self.fresh_count
    }

    /// Target plus the image of the extended map, in the enlarged ambient.
    pub fn extended_span(&self) -> Result<Subspace, DerivationError> {
        Ok(self.extended.domain().sum(&self.extended.image_space())?)
    }
}

/// Builds the free pseudosolution of a validated extension problem.
pub fn free_pseudosolution(problem: &ExtensionProblem) -> Result<Pseudosolution, DerivationError> {
    let alg = problem.algebra();
    let p = alg.modulus();
    let n = alg.dim();
    let k = problem.target.dim() - problem.base.dim();
    let grown = n + k;

    let comp = problem.base.complement_in(&problem.target);
    let mut dom_rows: Vec<Vec<u32>> = problem
        .base
        .basis_rows()
        .iter()
        .map(|r| pad_vec(r, grown))
        .collect();
    let mut img_rows: Vec<Vec<u32>> = problem
        .map
        .images()
        .iter_rows()
        .map(|r| pad_vec(r, grown))
        .collect();
    for (i, c) in comp.iter().enumerate() {
        dom_rows.push(pad_vec(c, grown));
        img_rows.push(unit_vec(grown, n + i));
    }
    let dom_matrix = Matrix::from_rows(p, grown, &dom_rows)?;
    let img_matrix = Matrix::from_rows(p, grown, &img_rows)?;
    let target_pad = problem.target.pad_to(grown);
    let mut images = Vec::with_capacity(target_pad.dim());
    for u in target_pad.basis_rows() {
        let x = dom_matrix
            .solve_left(&u)
            .ok_or_else(|| inconsistent("target basis escapes the base plus complement"))?;
        images.push(img_matrix.apply(&x));
    }
    let images = Matrix::from_rows(p, grown, &images)?;

    let lift = LeibnizLift::new(&target_pad, &images);
    let target_rels = alg.relations_of(&problem.target);
    let mut new_relations = Vec::with_capacity(target_rels.dim());
    for row in target_rels.basis_rows() {
        let gen = WedgeVector::from_coeffs(p, n, row).pad_to(grown);
        new_relations.push(lift.apply(&gen)?);
    }

    let mut rel_rows: Vec<Vec<u32>> = alg
        .relations()
        .basis_rows()
        .into_iter()
        .map(|row| WedgeVector::from_coeffs(p, n, row).pad_to(grown).coeffs().to_vec())
        .collect();
    rel_rows.extend(new_relations.iter().map(|w| w.coeffs().to_vec()));
    let rel_space = Subspace::span(p, pair_count(grown), &rel_rows)?;
    let extended_algebra = GradedAlgebra::new(p, grown, rel_space)?;
    let extended = PartialDerivation::new(extended_algebra.clone(), target_pad, images)?;

    Ok(Pseudosolution {
        problem: problem.clone(),
        extended_algebra,
        extended,
        new_relations,
        fresh_start: n,
        fresh_count: k,
    })
}

/// How a pseudosolution resolves: either a decomposable wedge appears among
/// the relations of the extended span and pins the solution down in place,
/// or the extended algebra stays clean and embeds freely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PseudosolutionClass {
    CaseA { v0: Vec<u32>, v1: Vec<u32> },
    InK,
}

/// Scans the relations of the extended span for a decomposable wedge.
pub fn classify_pseudosolution(
    ps: &Pseudosolution,
    scan_cap: u128,
) -> Result<PseudosolutionClass, DerivationError> {
    let x = ps.extended_span()?;
    let rels = ps.extended_algebra.relations_of(&x);
    match find_decomposable(ps.extended_algebra.dim(), &rels, scan_cap)? {
        Some((v0, v1)) => Ok(PseudosolutionClass::CaseA { v0, v1 }),
        None => Ok(PseudosolutionClass::InK),
    }
}

/// Scalar `t` with `t * a == b`, when the two vectors are parallel.
fn parallel_ratio(p: Prime, a: &[u32], b: &[u32]) -> Option<u32> {
    let lead = a.iter().position(|&x| x != 0)?;
    let t = p.mul(b[lead], p.inv(a[lead]));
    if scale_vec(p, t, a) == b {
        Some(t)
    } else {
        None
    }
}

/// Cuts a wedge down to the first `n` coordinates; `None` when a nonzero
/// coefficient touches a dropped coordinate.
fn truncate_wedge(w: &WedgeVector, n: usize) -> Option<WedgeVector> {
    let big = w.degree1_dim();
    let mut triples = Vec::new();
    for (flat, &c) in w.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let (i, j) = flat_to_pair(big, flat);
        if j >= n {
            return None;
        }
        triples.push((i, j, c));
    }
    Some(WedgeVector::from_triples(w.modulus(), n, &triples))
}

/// Solves a pseudosolution carrying a decomposable witness: recovers the
/// forced relation `e = a0 ∧ d + (base terms)` and the residue `c`, orients
/// the witness so its fresh component is the fresh unit of the new
/// direction, and returns the extension `g` with `g(a0)` read off the
/// witness's old component. The output satisfies `g̃(e) = -c` exactly and
/// maps the target into target plus mapped base; every failure of the forced
/// shape is an internal inconsistency.
pub fn solve_case_a(
    ps: &Pseudosolution,
    v0: &[u32],
    v1: &[u32],
) -> Result<PartialDerivation, DerivationError> {
    let alg = ps.problem.algebra();
    let p = alg.modulus();
    let n = alg.dim();
    let grown = ps.extended_algebra.dim();
    let k = ps.fresh_count;
    if k == 0 {
        return Err(inconsistent("a witness cannot exist without fresh coordinates"));
    }
    if v0.len() != grown || v1.len() != grown {
        return Err(DerivationError::AmbientMismatch {
            expected: grown,
            found: v0.len().max(v1.len()),
        });
    }
    let x_span = ps.extended_span()?;
    if !x_span.contains(v0) || !x_span.contains(v1) {
        return Err(inconsistent("witness vectors leave the pseudosolution span"));
    }
    let w = wedge(p, v0, v1);
    if w.is_zero() {
        return Err(inconsistent("witness vectors are dependent"));
    }

    // Express the witness wedge over the lifted target generators and the
    // relations of target plus mapped base; canonicalize the solution.
    let aug = ps.problem.augmented_target()?;
    let aug_rels = alg.relations_of(&aug);
    let mut rows: Vec<Vec<u32>> = ps
        .new_relations
        .iter()
        .map(|r| r.coeffs().to_vec())
        .collect();
    let lifted_count = rows.len();
    for row in aug_rels.basis_rows() {
        rows.push(
            WedgeVector::from_coeffs(p, n, row)
                .pad_to(grown)
                .coeffs()
                .to_vec(),
        );
    }
    let stacked = Matrix::from_rows(p, pair_count(grown), &rows)?;
    let sol = stacked
        .solve_left(w.coeffs())
        .ok_or_else(|| inconsistent("witness wedge is not spanned by the stored generators"))?;
    let sol = stacked.left_kernel().reduce(&sol);

    // The matching combination of target relation generators, and the residue.
    let gen_rows = alg.relations_of(&ps.problem.target).basis_rows();
    debug_assert_eq!(gen_rows.len(), lifted_count);
    let mut e = WedgeVector::zero(p, n);
    for (i, row) in gen_rows.iter().enumerate() {
        e = e.add(&WedgeVector::from_coeffs(p, n, row.clone()).scale(sol[i]));
    }
    let mut residue = w.clone();
    for (i, lifted) in ps.new_relations.iter().enumerate() {
        residue = residue.sub(&lifted.scale(sol[i]));
    }
    let c = truncate_wedge(&residue, n)
        .ok_or_else(|| inconsistent("witness residue touches fresh coordinates"))?;
    if !aug_rels.contains(c.coeffs()) {
        return Err(inconsistent("witness residue is not a relation of the augmented base"));
    }

    // Recover the forced shape of `e` over the basis adapted to base and
    // complement: no complement-pair terms, and exactly one complement
    // direction wedged against a nonzero base vector.
    let b_rows = ps.problem.base.basis_rows();
    let comp = ps.problem.base.complement_in(&ps.problem.target);
    let mut adapted_rows: Vec<Vec<u32>> = Vec::new();
    for i in 0..b_rows.len() {
        for j in (i + 1)..b_rows.len() {
            adapted_rows.push(wedge(p, &b_rows[i], &b_rows[j]).coeffs().to_vec());
        }
    }
    let mixed_start = adapted_rows.len();
    for c_row in &comp {
        for b_row in &b_rows {
            adapted_rows.push(wedge(p, c_row, b_row).coeffs().to_vec());
        }
    }
    let comp_start = adapted_rows.len();
    for i in 0..comp.len() {
        for j in (i + 1)..comp.len() {
            adapted_rows.push(wedge(p, &comp[i], &comp[j]).coeffs().to_vec());
        }
    }
    let adapted = Matrix::from_rows(p, pair_count(n), &adapted_rows)?;
    let coeffs = adapted
        .solve_left(e.coeffs())
        .ok_or_else(|| inconsistent("forced relation leaves the target wedge square"))?;
    for idx in comp_start..adapted_rows.len() {
        if coeffs[idx] != 0 {
            return Err(inconsistent("forced relation wedges two new directions"));
        }
    }
    let mut active: Option<usize> = None;
    for i in 0..comp.len() {
        let mut d = vec![0u32; n];
        for (j, b_row) in b_rows.iter().enumerate() {
            add_scaled(p, &mut d, b_row, coeffs[mixed_start + i * b_rows.len() + j]);
        }
        if !is_zero_vec(&d) {
            if active.is_some() {
                return Err(inconsistent("forced relation involves several new directions"));
            }
            active = Some(i);
        }
    }
    let i0 = active.ok_or_else(|| inconsistent("forced relation misses the new direction"))?;
    let a0 = comp[i0].clone();
    if comp.len() != 1 {
        return Err(inconsistent("forced relation found but the step is not codimension one"));
    }

    // Orient the witness: fresh component concentrated on the active fresh
    // unit with coefficient one, the partner stripped of fresh components.
    let mut v0m = v0.to_vec();
    let mut v1m = v1.to_vec();
    if is_zero_vec(&v0m[n..]) {
        if is_zero_vec(&v1m[n..]) {
            return Err(inconsistent("witness carries no fresh component"));
        }
        let old0 = v0m;
        v0m = v1m;
        v1m = neg_vec(p, &old0);
    }
    if !is_zero_vec(&v1m[n..]) {
        let t = parallel_ratio(p, &v0m[n..], &v1m[n..])
            .ok_or_else(|| inconsistent("witness fresh components are not parallel"))?;
        let shear = scale_vec(p, t, &v0m);
        v1m = sub_vecs(p, &v1m, &shear);
        if !is_zero_vec(&v1m[n..]) {
            return Err(inconsistent("witness shear left a fresh component"));
        }
    }
    for (j, &cj) in v0m[n..].iter().enumerate() {
        if j != i0 && cj != 0 {
            return Err(inconsistent("witness fresh component leaves the active coordinate"));
        }
    }
    let alpha = v0m[n + i0];
    if alpha == 0 {
        return Err(inconsistent("witness fresh component misses the active coordinate"));
    }
    v0m = scale_vec(p, p.inv(alpha), &v0m);
    let a0_prime = v0m[..n].to_vec();
    if !aug.contains(&a0_prime) {
        return Err(inconsistent("recovered image leaves the augmented base"));
    }

    // The solved extension and its exactness postconditions.
    let g = ps
        .problem
        .map
        .extend_with(&[(a0, neg_vec(p, &a0_prime))])?;
    if g.domain() != &ps.problem.target {
        return Err(inconsistent("solved map does not cover the target"));
    }
    g.require_valid()
        .map_err(|_| inconsistent("solved map fails the derivation condition"))?;
    let ge = g.lift().apply(&e)?;
    if !ge.add(&c).is_zero() {
        return Err(inconsistent("solved map misses the forced relation"));
    }
    if !g.image_space().is_subspace_of(&aug) {
        return Err(inconsistent("solved map leaves the augmented base"));
    }
    Ok(g)
}

/// Caps and limits for the extension driver.
#[derive(Debug, Clone, Copy)]
pub struct DriverCaps {
    /// Intermediate-enumeration cap for strongness and closure.
    pub enum_cap: usize,
    /// Element cap for decomposable scans.
    pub scan_cap: u128,
    /// Recursion depth limit for the image-closing detour.
    pub max_depth: usize,
}

impl Default for DriverCaps {
    fn default() -> DriverCaps {
        DriverCaps {
            enum_cap: 6,
            scan_cap: DEFAULT_SCAN_CAP,
            max_depth: 8,
        }
    }
}

fn check_driver_preconditions(
    ws: &Workspace,
    f: &PartialDerivation,
    requested: &Subspace,
    caps: &DriverCaps,
) -> Result<(), DerivationError> {
    if f.algebra() != ws.algebra() {
        return Err(DerivationError::WorkspaceMismatch);
    }
    if requested.ambient_dim() != ws.dim() {
        return Err(DerivationError::AmbientMismatch {
            expected: ws.dim(),
            found: requested.ambient_dim(),
        });
    }
    if requested.modulus() != ws.modulus() {
        return Err(DerivationError::ModulusMismatch {
            left: ws.modulus().get(),
            right: requested.modulus().get(),
        });
    }
    f.require_valid()?;
    let full = ws.full_space();
    let report = is_strong(ws.algebra(), f.domain(), &full, caps.enum_cap)?;
    if let Some((violator, _)) = report.violator {
        return Err(DerivationError::DomainNotStrong { violator });
    }
    let augmented = f.domain().sum(&f.image_space())?;
    let report = is_strong(ws.algebra(), &augmented, &full, caps.enum_cap)?;
    if let Some((violator, _)) = report.violator {
        return Err(DerivationError::DomainImageNotStrong { violator });
    }
    Ok(())
}

/// Extends a derivation until its domain contains `requested`, following the
/// minimal tower of the self-sufficient closure step by step. Each step is
/// solved in place when a decomposable witness forces the image, and by a
/// free-amalgam growth of the workspace otherwise. When a transcendental
/// step's target plus the current image fails to be strong, the driver first
/// extends over domain plus image and its closure before retrying.
///
/// Preconditions: the map is a valid derivation on the workspace algebra,
/// and both its domain and domain plus image are strong in the workspace.
/// The same holds for the returned extension.
pub fn extend_derivation(
    ws: &mut Workspace,
    f: &PartialDerivation,
    requested: &Subspace,
    caps: &DriverCaps,
) -> Result<PartialDerivation, DerivationError> {
    Ok(extend_derivation_traced(ws, f, requested, caps)?.0)
}

/// One driver decision, in the order taken. Useful for reporting which route
/// each minimal step went through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// A minimal step solved in place from a decomposable witness.
    CaseA { kind: ExtensionKind },
    /// A minimal step embedded into the workspace as a free amalgam.
    AmalgamEmbed { kind: ExtensionKind },
    /// A transcendental step whose augmentation by the current image was not
    /// strong; the driver first extended over domain plus image, then over
    /// the closure of the augmented step.
    Detour,
}

impl std::fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceEvent::CaseA { kind } => write!(f, "case-a({kind})"),
            TraceEvent::AmalgamEmbed { kind } => write!(f, "amalgam-embed({kind})"),
            TraceEvent::Detour => write!(f, "detour"),
        }
    }
}

/// Like [`extend_derivation`], additionally reporting the route taken per
/// minimal step.
pub fn extend_derivation_traced(
    ws: &mut Workspace,
    f: &PartialDerivation,
    requested: &Subspace,
    caps: &DriverCaps,
) -> Result<(PartialDerivation, Vec<TraceEvent>), DerivationError> {
    check_driver_preconditions(ws, f, requested, caps)?;
    let mut trace = Vec::new();
    let g = extend_inner(
        ws,
        f.clone(),
        requested.clone(),
        caps,
        caps.max_depth,
        &mut trace,
    )?;
    Ok((g, trace))
}

fn extend_inner(
    ws: &mut Workspace,
    mut f: PartialDerivation,
    requested: Subspace,
    caps: &DriverCaps,
    depth: usize,
    trace: &mut Vec<TraceEvent>,
) -> Result<PartialDerivation, DerivationError> {
    if depth == 0 {
        return Err(DerivationError::DepthExhausted {
            limit: caps.max_depth,
        });
    }
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > 2 * ws.budget() + 16 {
            return Err(inconsistent("extension driver failed to terminate"));
        }
        let alg = ws.algebra().clone();
        let req = requested.pad_to(ws.dim());
        let d = f.domain().clone();
        if req.is_subspace_of(&d) {
            return Ok(f);
        }
        let a = self_sufficient_closure(&alg, &d.sum(&req)?, caps.enum_cap)?;
        let tower = minimal_tower(&alg, &d, &a, caps.enum_cap)?;
        let s = tower
            .first()
            .cloned()
            .ok_or_else(|| inconsistent("empty tower for a proper extension"))?;
        let image = f.image_space();
        let s_aug = s.sum(&image)?;
        let report = is_strong(&alg, &s_aug, &alg.full_space(), caps.enum_cap)?;
        if report.strong {
            let kind = classify_step(&alg, &d, &s, caps.enum_cap)?.kind();
            let problem = ExtensionProblem::new(d, s, f.clone(), caps.enum_cap)?;
            let ps = free_pseudosolution(&problem)?;
            match classify_pseudosolution(&ps, caps.scan_cap)? {
                PseudosolutionClass::CaseA { v0, v1 } => {
                    f = solve_case_a(&ps, &v0, &v1)?;
                    trace.push(TraceEvent::CaseA { kind });
                }
                PseudosolutionClass::InK => {
                    let (aug_base, ext) = extension_for_embedding(&ps)?;
                    ws.embed_extension(&aug_base, &ext, caps.enum_cap, caps.scan_cap)?;
                    if ws.algebra() != &ps.extended_algebra {
                        return Err(inconsistent(
                            "grown workspace differs from the pseudosolution algebra",
                        ));
                    }
                    f = PartialDerivation::new(
                        ws.algebra().clone(),
                        ps.extended.domain().clone(),
                        ps.extended.images().clone(),
                    )?;
                    trace.push(TraceEvent::AmalgamEmbed { kind });
                }
            }
        } else {
            // Only a transcendental step can fail the augmented strongness;
            // close domain plus image first, then the closure of the
            // augmented step, and retry.
            if alg.rel_predim(&s, &d) != 1 {
                return Err(inconsistent(
                    "a predimension-preserving minimal step produced a non-strong augmentation",
                ));
            }
            trace.push(TraceEvent::Detour);
            let a_tilde = self_sufficient_closure(&alg, &s_aug, caps.enum_cap)?;
            let e_space = d.sum(&image)?;
            f = extend_inner(ws, f, e_space, caps, depth - 1, trace)?;
            let a_tilde = a_tilde.pad_to(ws.dim());
            f = extend_inner(ws, f, a_tilde, caps, depth - 1, trace)?;
        }
    }
}

/// Re-presents the extended span of an in-K pseudosolution as a standalone
/// algebra over the augmented target, for embedding into the workspace: the
/// coordinates are the canonical basis of target plus mapped base followed
/// by the fresh units, and the relations are those of the extended span.
fn extension_for_embedding(
    ps: &Pseudosolution,
) -> Result<(Subspace, GradedAlgebra), DerivationError> {
    let p = ps.extended_algebra.modulus();
    let aug = ps.problem.augmented_target()?;
    let b = aug.dim();
    let k = ps.fresh_count;
    let x = ps.extended_span()?;
    debug_assert_eq!(x.dim(), b + k);
    let rels = ps.extended_algebra.relations_of(&x);
    let mut ext_rows = Vec::with_capacity(rels.dim());
    for row in rels.basis_rows() {
        let w = WedgeVector::from_coeffs(p, ps.extended_algebra.dim(), row);
        ext_rows.push(wedge_coordinates(&x, &w));
    }
    let ext_rels = Subspace::span(p, pair_count(b + k), &ext_rows)?;
    let ext = GradedAlgebra::new(p, b + k, ext_rels)?;
    Ok((aug, ext))
}

/// Extends a derivation to the whole workspace. Each missing unit vector is
/// first tried directly (zero image first, then the current image span when
/// it is small), falling back to the extension driver when no direct image
/// keeps the map a derivation with strong domain and image.
pub fn totalize(
    ws: &mut Workspace,
    f: &PartialDerivation,
    caps: &DriverCaps,
) -> Result<PartialDerivation, DerivationError> {
    check_driver_preconditions(ws, f, &Subspace::zero(ws.modulus(), ws.dim()), caps)?;
    let mut f = f.clone();
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > 4 * ws.budget() + 16 {
            return Err(inconsistent("totalization failed to terminate"));
        }
        let n = ws.dim();
        let dom = f.domain().clone();
        if dom.dim() == n {
            return Ok(f);
        }
        let missing = (0..n)
            .find(|&i| !dom.contains(&unit_vec(n, i)))
            .ok_or_else(|| inconsistent("full-rank domain missing a unit vector"))?;
        let u = unit_vec(n, missing);
        let grown_dom = dom.with_vector(&u);
        let full = ws.full_space();
        let mut settled = false;
        if is_strong(ws.algebra(), &grown_dom, &full, caps.enum_cap)?.strong {
            for cand in direct_candidates(&f) {
                let g = f.extend_with(&[(u.clone(), cand)])?;
                if !g.validate()?.ok {
                    continue;
                }
                let aug = g.domain().sum(&g.image_space())?;
                if is_strong(ws.algebra(), &aug, &full, caps.enum_cap)?.strong {
                    f = g;
                    settled = true;
                    break;
                }
            }
        }
        if !settled {
            let line = Subspace::line(ws.modulus(), &u);
            let mut trace = Vec::new();
            f = extend_inner(ws, f, line, caps, caps.max_depth, &mut trace)?;
        }
    }
}

/// Candidate images for a direct totalization step: zero first, then the
/// elements of the current image span when that span is small.
fn direct_candidates(f: &PartialDerivation) -> Vec<Vec<u32>> {
    let n = f.algebra().dim();
    let mut out = vec![vec![0u32; n]];
    let image = f.image_space();
    if image.element_count() <= 243 {
        for v in image.elements() {
            if !is_zero_vec(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// A basis for the space of valid derivations on `domain`: all image
/// matrices whose Leibniz lift sends the domain's relation generators into
/// the relation space. The lift and the reduction are both linear in the
/// images, so the space is the kernel of one linear system.
pub fn derivation_space(
    algebra: &GradedAlgebra,
    domain: &Subspace,
) -> Result<Vec<Matrix>, DerivationError> {
    let p = algebra.modulus();
    let n = algebra.dim();
    if domain.ambient_dim() != n {
        return Err(DerivationError::AmbientMismatch {
            expected: n,
            found: domain.ambient_dim(),
        });
    }
    let t = domain.dim();
    if t == 0 {
        return Ok(Vec::new());
    }
    let gens: Vec<WedgeVector> = algebra
        .relations_of(domain)
        .basis_rows()
        .into_iter()
        .map(|row| WedgeVector::from_coeffs(p, n, row))
        .collect();
    if gens.is_empty() {
        let mut out = Vec::with_capacity(t * n);
        for r in 0..t {
            for c in 0..n {
                let mut imgs = Matrix::zero(p, t, n);
                imgs.set(r, c, 1);
                out.push(imgs);
            }
        }
        return Ok(out);
    }
    let mut rows = Vec::with_capacity(t * n);
    for r in 0..t {
        for c in 0..n {
            let mut imgs = Matrix::zero(p, t, n);
            imgs.set(r, c, 1);
            let lift = LeibnizLift::new(domain, &imgs);
            let mut row = Vec::new();
            for gen in &gens {
                let image = lift.apply(gen)?;
                row.extend_from_slice(&algebra.relations().reduce(image.coeffs()));
            }
            rows.push(row);
        }
    }
    let cols = rows[0].len();
    let constraint = Matrix::from_rows(p, cols, &rows)?;
    let mut out = Vec::new();
    for krow in constraint.left_kernel().basis_rows() {
        let img_rows: Vec<Vec<u32>> = (0..t).map(|r| krow[r * n..(r + 1) * n].to_vec()).collect();
        out.push(Matrix::from_rows(p, n, &img_rows)?);
    }
    Ok(out)
}

fn require_intermediate(
    ps: &Pseudosolution,
    intermediate: &Subspace,
) -> Result<(), DerivationError> {
    if ps.problem.base.is_subspace_of(intermediate)
        && intermediate.is_subspace_of(&ps.problem.target)
    {
        Ok(())
    } else {
        Err(DerivationError::IntermediateOutOfRange)
    }
}

fn mapped_span(ps: &Pseudosolution, sub: &Subspace) -> Result<Subspace, DerivationError> {
    let grown = ps.extended_algebra.dim();
    let p = ps.extended_algebra.modulus();
    let mut rows = Vec::with_capacity(sub.dim());
    for r in sub.pad_to(grown).basis_rows() {
        rows.push(ps.extended.apply(&r)?);
    }
    Ok(Subspace::span(p, grown, &rows)?)
}

/// Checks, for `base ⊆ intermediate ⊆ target`, that the wedges of the target
/// whose lifts stay inside the wedge square of target plus the mapped
/// intermediate are exactly the wedges of the intermediate.
pub fn check_wedge_preimage(
    ps: &Pseudosolution,
    intermediate: &Subspace,
) -> Result<bool, DerivationError> {
    require_intermediate(ps, intermediate)?;
    let p = ps.extended_algebra.modulus();
    let grown = ps.extended_algebra.dim();
    let target_pad = ps.extended.domain();
    let x_mid = target_pad.sum(&mapped_span(ps, intermediate)?)?;
    let w_span = wedge_square_span(&x_mid);
    let lift = ps.extended.lift();
    let bw = basis_wedges(target_pad);
    let mut rows = Vec::with_capacity(bw.len());
    for w in &bw {
        let l = lift.apply(w)?;
        rows.push(w_span.reduce(l.coeffs()));
    }
    let reduced = Matrix::from_rows(p, pair_count(grown), &rows)?;
    let mut pre_rows = Vec::new();
    for x in reduced.left_kernel().basis_rows() {
        let mut acc = WedgeVector::zero(p, grown);
        for (i, w) in bw.iter().enumerate() {
            acc = acc.add(&w.scale(x[i]));
        }
        pre_rows.push(acc.coeffs().to_vec());
    }
    let preimage = Subspace::span(p, pair_count(grown), &pre_rows)?;
    Ok(preimage == wedge_square_span(&intermediate.pad_to(grown)))
}

/// Checks that the old relations of target plus mapped base are exactly the
/// relations of the extended span cut to that wedge square.
pub fn check_relation_restriction(ps: &Pseudosolution) -> Result<bool, DerivationError> {
    let alg = ps.problem.algebra();
    let p = alg.modulus();
    let n = alg.dim();
    let grown = ps.extended_algebra.dim();
    let aug = ps.problem.augmented_target()?;
    let lhs_rows: Vec<Vec<u32>> = alg
        .relations_of(&aug)
        .basis_rows()
        .into_iter()
        .map(|row| WedgeVector::from_coeffs(p, n, row).pad_to(grown).coeffs().to_vec())
        .collect();
    let lhs = Subspace::span(p, pair_count(grown), &lhs_rows)?;
    let x = ps.extended_span()?;
    let rhs = ps
        .extended_algebra
        .relations_of(&x)
        .intersect(&wedge_square_span(&aug.pad_to(grown)))?;
    Ok(lhs == rhs)
}

/// Checks, for `base ⊆ intermediate ⊆ target`, that relative predimension
/// transports through the map, and that lifting a relative relation basis of
/// the intermediate over the base completes a relation basis on the mapped
/// side.
pub fn check_relative_transport(
    ps: &Pseudosolution,
    intermediate: &Subspace,
) -> Result<bool, DerivationError> {
    require_intermediate(ps, intermediate)?;
    let alg = ps.problem.algebra();
    let p = alg.modulus();
    let n = alg.dim();
    let grown = ps.extended_algebra.dim();
    let target_pad = ps.extended.domain();
    let x_mid = target_pad.sum(&mapped_span(ps, intermediate)?)?;
    let x_base = target_pad.sum(&mapped_span(ps, &ps.problem.base)?)?;
    if ps.extended_algebra.rel_predim(&x_mid, &x_base)
        != alg.rel_predim(intermediate, &ps.problem.base)
    {
        return Ok(false);
    }
    let n_mid = alg.relations_of(intermediate);
    let n_base = alg.relations_of(&ps.problem.base);
    let comp = n_base.complement_in(&n_mid);
    let lift = ps.extended.lift();
    let mut rows = ps.extended_algebra.relations_of(&x_base).basis_rows();
    let start = rows.len();
    for row in &comp {
        let w = WedgeVector::from_coeffs(p, n, row.clone()).pad_to(grown);
        rows.push(lift.apply(&w)?.coeffs().to_vec());
    }
    let span = Subspace::span(p, pair_count(grown), &rows)?;
    Ok(span == ps.extended_algebra.relations_of(&x_mid) && span.dim() == start + comp.len())
}

/// Checks that the extended span extends target plus mapped base strongly,
/// and minimally when the underlying step is minimal.
pub fn check_strong_pseudosolution(
    ps: &Pseudosolution,
    enum_cap: usize,
) -> Result<bool, DerivationError> {
    let grown = ps.extended_algebra.dim();
    let x = ps.extended_span()?;
    let aug_pad = ps.problem.augmented_target()?.pad_to(grown);
    if !is_strong(&ps.extended_algebra, &aug_pad, &x, enum_cap)?.strong {
        return Ok(false);
    }
    let alg = ps.problem.algebra();
    let single = ps.problem.base == ps.problem.target
        || minimal_tower(alg, &ps.problem.base, &ps.problem.target, enum_cap)?.len() == 1;
    if single && x.dim() > aug_pad.dim() {
        let tower = minimal_tower(&ps.extended_algebra, &aug_pad, &x, enum_cap)?;
        return Ok(tower.len() == 1);
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::intermediate_subspaces;
    use crate::testdata::{self, a_alg, a_pr, p3, prefix_subspace, span_of, unit};

    const CAP: usize = 6;

    /// The codimension-one problem on the four-dimensional algebra with
    /// relation a0 ∧ b0 + b1 ∧ b2: extend f(b0) = scale * b0, f(b1) =
    /// f(b2) = 0 from the first three coordinates to everything.
    fn worked_problem(scale: u32) -> ExtensionProblem {
        let alg = a_alg();
        let base = prefix_subspace(&alg, 3);
        let target = alg.full_space();
        let mut img0 = vec![0u32; 4];
        img0[0] = scale;
        let images = testdata::map_matrix(p3(), 4, &[img0, vec![0; 4], vec![0; 4]]);
        let map = PartialDerivation::new(alg, base.clone(), images).unwrap();
        ExtensionProblem::new(base, target, map, CAP).unwrap()
    }

    fn worked_map(scale: u32) -> PartialDerivation {
        worked_problem(scale).map().clone()
    }

    #[test]
    fn validate_accepts_zero_and_worked_maps() {
        let alg = a_alg();
        let zero = PartialDerivation::zero(alg.clone(), alg.full_space()).unwrap();
        assert!(zero.validate().unwrap().ok);
        assert!(worked_map(1).validate().unwrap().ok);
        assert!(worked_map(2).validate().unwrap().ok);
    }

    #[test]
    fn validate_reports_the_violating_generator() {
        let p = p3();
        let rels = Subspace::span(
            p,
            pair_count(4),
            &[WedgeVector::from_triples(p, 4, &[(0, 1, 1), (2, 3, 1)])
                .coeffs()
                .to_vec()],
        )
        .unwrap();
        let alg = GradedAlgebra::new(p, 4, rels).unwrap();
        let good = PartialDerivation::new(
            alg.clone(),
            alg.full_space(),
            testdata::map_matrix(p, 4, &[unit(4, 1), vec![0; 4], vec![0; 4], vec![0; 4]]),
        )
        .unwrap();
        assert!(good.validate().unwrap().ok);
        let bad = PartialDerivation::new(
            alg.clone(),
            alg.full_space(),
            testdata::map_matrix(p, 4, &[unit(4, 2), vec![0; 4], vec![0; 4], vec![0; 4]]),
        )
        .unwrap();
        let report = bad.validate().unwrap();
        assert!(!report.ok);
        assert_eq!(
            report.violating_generator,
            Some(WedgeVector::from_triples(p, 4, &[(0, 1, 1), (2, 3, 1)]))
        );
    }

    #[test]
    fn from_pairs_checks_well_definedness() {
        let alg = a_alg();
        let p = p3();
        let e0 = unit(4, 0);
        let e1 = unit(4, 1);
        let two_e0 = vec![2, 0, 0, 0];
        let two_e1 = vec![0, 2, 0, 0];
        let f = PartialDerivation::from_pairs(
            alg.clone(),
            &[(e0.clone(), e1.clone()), (two_e0.clone(), two_e1)],
        )
        .unwrap();
        assert_eq!(f.domain(), &Subspace::line(p, &e0));
        assert_eq!(f.apply(&e0).unwrap(), e1);
        let err = PartialDerivation::from_pairs(alg, &[(e0, e1.clone()), (two_e0, e1)]);
        assert!(matches!(err, Err(DerivationError::InconsistentPairs)));
    }

    #[test]
    fn apply_respects_the_domain() {
        let f = worked_map(1);
        assert_eq!(f.apply(&[1, 1, 0, 0]).unwrap(), unit(4, 0));
        assert_eq!(f.apply(&[0, 2, 1, 0]).unwrap(), vec![0; 4]);
        let err = f.apply(&unit(4, 3));
        assert!(matches!(err, Err(DerivationError::OutsideDomain { .. })));
        assert_eq!(f.image_space(), Subspace::line(p3(), &unit(4, 0)));
        assert!(!f.is_total());
    }

    #[test]
    fn restriction_and_pair_roundtrips_preserve_the_map() {
        let f = worked_map(1);
        let alg = f.algebra().clone();
        let again = PartialDerivation::from_pairs(alg.clone(), &f.pairs()).unwrap();
        assert_eq!(again, f);
        let small = f.restrict(&prefix_subspace(&alg, 2)).unwrap();
        assert_eq!(small.images().row(0), &[1, 0, 0, 0]);
        assert_eq!(small.images().row(1), &[0, 0, 0, 0]);
        let back = small
            .extend_with(&[(unit(4, 2), vec![0; 4])])
            .unwrap();
        assert_eq!(back, f);
        let err = f.restrict(&Subspace::line(p3(), &unit(4, 3)));
        assert!(matches!(err, Err(DerivationError::OutsideDomain { .. })));
    }

    #[test]
    fn problem_validation_rejects_bad_data() {
        let alg = a_pr();
        let p = p3();
        let prefix3 = prefix_subspace(&alg, 3);
        let prefix4 = prefix_subspace(&alg, 4);
        let zero3 = PartialDerivation::zero(alg.clone(), prefix3.clone()).unwrap();
        let err = ExtensionProblem::new(prefix3.clone(), prefix4.clone(), zero3.clone(), CAP);
        assert!(matches!(
            err,
            Err(DerivationError::AugmentedTargetNotStrong { predim: 3, .. })
        ));
        let zero4 = PartialDerivation::zero(alg.clone(), prefix4.clone()).unwrap();
        let err = ExtensionProblem::new(prefix4.clone(), alg.full_space(), zero4, CAP);
        assert!(matches!(
            err,
            Err(DerivationError::BaseNotStrongInTarget { predim: 3, .. })
        ));
        let err = ExtensionProblem::new(
            prefix3.clone(),
            prefix_subspace(&alg, 2),
            zero3.clone(),
            CAP,
        );
        assert!(matches!(err, Err(DerivationError::BaseNotInTarget)));
        let err = ExtensionProblem::new(prefix4.clone(), prefix4, zero3, CAP);
        assert!(matches!(err, Err(DerivationError::DomainMismatch)));
        let alg = a_alg();
        let bad = PartialDerivation::new(
            alg.clone(),
            alg.full_space(),
            testdata::map_matrix(p, 4, &[unit(4, 1), vec![0; 4], vec![0; 4], vec![0; 4]]),
        )
        .unwrap();
        let err = ExtensionProblem::new(alg.full_space(), alg.full_space(), bad, CAP);
        match err {
            Err(DerivationError::NotDerivation { generator }) => {
                assert_eq!(
                    generator,
                    WedgeVector::from_triples(p, 4, &[(0, 3, 1), (1, 2, 2)])
                );
            }
            other => panic!("expected NotDerivation, got {other:?}"),
        }
    }

    #[test]
    fn pseudosolution_with_equal_base_and_target_changes_nothing() {
        let alg = a_alg();
        let base = prefix_subspace(&alg, 3);
        let f = worked_map(1);
        let problem = ExtensionProblem::new(base.clone(), base, f.clone(), CAP).unwrap();
        let ps = free_pseudosolution(&problem).unwrap();
        assert_eq!(ps.fresh_count(), 0);
        assert_eq!(ps.extended_algebra(), &alg);
        assert_eq!(ps.extended(), &f);
        assert!(ps.new_relations().is_empty());
        assert_eq!(
            classify_pseudosolution(&ps, DEFAULT_SCAN_CAP).unwrap(),
            PseudosolutionClass::InK
        );
    }

    #[test]
    fn pseudosolution_of_the_worked_problem_is_frozen() {
        let p = p3();
        let ps = free_pseudosolution(&worked_problem(1)).unwrap();
        assert_eq!(ps.fresh_start(), 4);
        assert_eq!(ps.fresh_count(), 1);
        assert_eq!(ps.extended_algebra().dim(), 5);
        let lifted = WedgeVector::from_triples(p, 5, &[(0, 3, 1), (0, 4, 1)]);
        assert_eq!(ps.new_relations(), &[lifted.clone()]);
        let expected_images = testdata::map_matrix(
            p,
            5,
            &[unit(5, 0), vec![0; 5], vec![0; 5], unit(5, 4)],
        );
        assert_eq!(ps.extended().images(), &expected_images);
        // The grown relation space is the padded old one plus the lifts.
        let padded_gen = WedgeVector::from_triples(p, 5, &[(0, 3, 2), (1, 2, 1)]);
        let expected_rels = Subspace::span(
            p,
            pair_count(5),
            &[padded_gen.coeffs().to_vec(), lifted.coeffs().to_vec()],
        )
        .unwrap();
        assert_eq!(ps.extended_algebra().relations(), &expected_rels);
        assert_eq!(ps.extended_span().unwrap(), Subspace::full(p, 5));
    }

    #[test]
    fn transcendental_pseudosolution_stays_free() {
        let p = p3();
        let alg = GradedAlgebra::free(p, 5);
        let base = prefix_subspace(&alg, 2);
        let target = prefix_subspace(&alg, 3);
        let images = testdata::map_matrix(p, 5, &[unit(5, 3), unit(5, 4)]);
        let map = PartialDerivation::new(alg, base.clone(), images).unwrap();
        let problem = ExtensionProblem::new(base, target, map, CAP).unwrap();
        let ps = free_pseudosolution(&problem).unwrap();
        assert_eq!(ps.extended_algebra().dim(), 6);
        assert!(ps.extended_algebra().relations().is_zero());
        assert!(ps.new_relations().is_empty());
        assert!(ps
            .extended_algebra()
            .check_class_k(CAP, DEFAULT_SCAN_CAP)
            .unwrap()
            .ok);
        assert_eq!(
            classify_pseudosolution(&ps, DEFAULT_SCAN_CAP).unwrap(),
            PseudosolutionClass::InK
        );
    }

    #[test]
    fn classification_finds_the_forced_decomposable() {
        let ps = free_pseudosolution(&worked_problem(1)).unwrap();
        let class = classify_pseudosolution(&ps, DEFAULT_SCAN_CAP).unwrap();
        match class {
            PseudosolutionClass::CaseA { v0, v1 } => {
                // The witness wedges to an element of the grown relation
                // space that the old relation space misses.
                let w = wedge(p3(), &v0, &v1);
                assert!(ps.extended_algebra().relations().contains(w.coeffs()));
                assert_eq!(v0, vec![0, 0, 0, 1, 1]);
                assert_eq!(v1, vec![2, 0, 0, 0, 0]);
            }
            PseudosolutionClass::InK => panic!("expected a decomposable witness"),
        }
    }

    #[test]
    fn classification_of_the_prealgebraic_zero_problem_is_in_k() {
        let p = p3();
        let alg = a_pr();
        let base = prefix_subspace(&alg, 3);
        let target = alg.full_space();
        let zero = PartialDerivation::zero(alg.clone(), base.clone()).unwrap();
        let problem = ExtensionProblem::new(base, target, zero, CAP).unwrap();
        let ps = free_pseudosolution(&problem).unwrap();
        assert_eq!(ps.fresh_count(), 2);
        assert_eq!(
            ps.new_relations(),
            &[
                WedgeVector::from_triples(p, 7, &[(0, 5, 1), (1, 6, 1)]),
                WedgeVector::from_triples(p, 7, &[(3, 6, 1), (4, 5, 2)]),
            ]
        );
        assert_eq!(
            classify_pseudosolution(&ps, DEFAULT_SCAN_CAP).unwrap(),
            PseudosolutionClass::InK
        );
    }

    #[test]
    fn solving_the_worked_problem_negates_the_new_direction() {
        let ps = free_pseudosolution(&worked_problem(1)).unwrap();
        let class = classify_pseudosolution(&ps, DEFAULT_SCAN_CAP).unwrap();
        let PseudosolutionClass::CaseA { v0, v1 } = class else {
            panic!("expected a witness");
        };
        let g = solve_case_a(&ps, &v0, &v1).unwrap();
        assert!(g.is_total());
        let expected = testdata::map_matrix(
            p3(),
            4,
            &[unit(4, 0), vec![0; 4], vec![0; 4], vec![0, 0, 0, 2]],
        );
        assert_eq!(g.images(), &expected);
        assert!(g.validate().unwrap().ok);
    }

    #[test]
    fn solving_the_scaled_problem_scales_the_negation() {
        let ps = free_pseudosolution(&worked_problem(2)).unwrap();
        let class = classify_pseudosolution(&ps, DEFAULT_SCAN_CAP).unwrap();
        let PseudosolutionClass::CaseA { v0, v1 } = class else {
            panic!("expected a witness");
        };
        let g = solve_case_a(&ps, &v0, &v1).unwrap();
        let expected = testdata::map_matrix(
            p3(),
            4,
            &[vec![2, 0, 0, 0], vec![0; 4], vec![0; 4], vec![0, 0, 0, 1]],
        );
        assert_eq!(g.images(), &expected);
    }

    #[test]
    fn solving_is_invariant_under_witness_scaling() {
        let p = p3();
        let ps = free_pseudosolution(&worked_problem(1)).unwrap();
        let PseudosolutionClass::CaseA { v0, v1 } =
            classify_pseudosolution(&ps, DEFAULT_SCAN_CAP).unwrap()
        else {
            panic!("expected a witness");
        };
        let g = solve_case_a(&ps, &v0, &v1).unwrap();
        let double0 = scale_vec(p, 2, &v0);
        let double1 = scale_vec(p, 2, &v1);
        assert_eq!(solve_case_a(&ps, &double0, &double1).unwrap(), g);
        assert_eq!(solve_case_a(&ps, &double0, &v1).unwrap(), g);
        assert_eq!(solve_case_a(&ps, &v1, &v0).unwrap(), g);
    }

    #[test]
    fn solving_rejects_a_foreign_witness() {
        let ps = free_pseudosolution(&worked_problem(1)).unwrap();
        let err = solve_case_a(&ps, &unit(5, 0), &unit(5, 1));
        assert!(matches!(err, Err(DerivationError::Inconsistent { .. })));
    }

    #[test]
    fn driver_returns_the_map_when_the_request_is_inside() {
        let mut ws = Workspace::new(a_alg(), 8, CAP, DEFAULT_SCAN_CAP).unwrap();
        let f = worked_map(1);
        let req = Subspace::line(p3(), &unit(4, 0));
        let g = extend_derivation(&mut ws, &f, &req, &DriverCaps::default()).unwrap();
        assert_eq!(g, f);
        assert_eq!(ws.dim(), 4);
        assert!(ws.history().is_empty());
    }

    #[test]
    fn driver_solves_the_worked_problem_without_growth() {
        let mut ws = Workspace::new(a_alg(), 8, CAP, DEFAULT_SCAN_CAP).unwrap();
        let f = worked_map(1);
        let req = Subspace::line(p3(), &unit(4, 3));
        let (g, trace) =
            extend_derivation_traced(&mut ws, &f, &req, &DriverCaps::default()).unwrap();
        assert_eq!(ws.dim(), 4);
        assert!(ws.history().is_empty());
        assert!(g.is_total());
        assert_eq!(
            trace,
            vec![TraceEvent::CaseA {
                kind: ExtensionKind::Algebraic
            }]
        );
        let expected = testdata::map_matrix(
            p3(),
            4,
            &[unit(4, 0), vec![0; 4], vec![0; 4], vec![0, 0, 0, 2]],
        );
        assert_eq!(g.images(), &expected);
    }

    #[test]
    fn driver_grows_the_workspace_for_a_transcendental_step() {
        let p = p3();
        let mut ws = Workspace::new(GradedAlgebra::free(p, 4), 8, CAP, DEFAULT_SCAN_CAP).unwrap();
        let f = PartialDerivation::zero(ws.algebra().clone(), prefix_subspace(ws.algebra(), 2))
            .unwrap();
        let req = Subspace::line(p, &unit(4, 2));
        let (g, trace) =
            extend_derivation_traced(&mut ws, &f, &req, &DriverCaps::default()).unwrap();
        assert_eq!(ws.dim(), 5);
        assert_eq!(ws.history().len(), 1);
        assert!(ws.algebra().relations().is_zero());
        assert_eq!(
            trace,
            vec![TraceEvent::AmalgamEmbed {
                kind: ExtensionKind::Transcendental
            }]
        );
        assert_eq!(g.domain(), &prefix_subspace(ws.algebra(), 3));
        let expected =
            testdata::map_matrix(p, 5, &[vec![0; 5], vec![0; 5], unit(5, 4)]);
        assert_eq!(g.images(), &expected);
    }

    #[test]
    fn driver_takes_the_image_closing_detour() {
        let p = p3();
        let alg = a_pr();
        let mut ws = Workspace::new(alg.clone(), 12, CAP, DEFAULT_SCAN_CAP).unwrap();
        let domain = prefix_subspace(&alg, 2);
        let images = testdata::map_matrix(p, 5, &[unit(5, 2), vec![0; 5]]);
        let f = PartialDerivation::new(alg.clone(), domain, images).unwrap();
        // Entry state: the domain and the domain plus image are strong, but
        // the first minimal step toward e3 wedges badly with the image.
        let req = Subspace::line(p, &unit(5, 3));
        let (g, trace) =
            extend_derivation_traced(&mut ws, &f, &req, &DriverCaps::default()).unwrap();
        assert_eq!(ws.dim(), 8);
        assert_eq!(ws.history().len(), 2);
        assert_eq!(
            trace,
            vec![
                TraceEvent::Detour,
                TraceEvent::AmalgamEmbed {
                    kind: ExtensionKind::Transcendental
                },
                TraceEvent::AmalgamEmbed {
                    kind: ExtensionKind::Prealgebraic
                },
            ]
        );
        assert_eq!(g.domain(), &prefix_subspace(&alg, 5).pad_to(8));
        let expected = testdata::map_matrix(
            p,
            8,
            &[unit(8, 2), vec![0; 8], unit(8, 5), unit(8, 6), unit(8, 7)],
        );
        assert_eq!(g.images(), &expected);
        assert!(g.validate().unwrap().ok);
        assert!(ws
            .algebra()
            .check_class_k(CAP, DEFAULT_SCAN_CAP)
            .unwrap()
            .ok);
    }

    #[test]
    fn driver_postconditions_hold_on_random_problems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(45);
        let p = p3();
        let caps = DriverCaps::default();
        for round in 0..12 {
            let alg = match round % 3 {
                0 => GradedAlgebra::free(p, 4),
                1 => a_alg(),
                _ => a_pr(),
            };
            let n = alg.dim();
            let raw: Vec<Vec<u32>> = (0..rng.random_range(0..=2usize))
                .map(|_| (0..n).map(|_| rng.random_range(0..3)).collect())
                .collect();
            let seed_span = Subspace::span(p, n, &raw).unwrap();
            let domain = self_sufficient_closure(&alg, &seed_span, CAP).unwrap();
            let basis = derivation_space(&alg, &domain).unwrap();
            let mut f = PartialDerivation::zero(alg.clone(), domain.clone()).unwrap();
            if !basis.is_empty() {
                let mut rows = vec![vec![0u32; n]; domain.dim()];
                for m in &basis {
                    let c = rng.random_range(0..3);
                    for (r, row) in rows.iter_mut().enumerate() {
                        add_scaled(p, row, m.row(r), c);
                    }
                }
                let images = Matrix::from_rows(p, n, &rows).unwrap();
                let cand = PartialDerivation::new(alg.clone(), domain.clone(), images).unwrap();
                let aug = cand.domain().sum(&cand.image_space()).unwrap();
                if is_strong(&alg, &aug, &alg.full_space(), CAP).unwrap().strong {
                    f = cand;
                }
            }
            let mut req_vec: Vec<u32> = (0..n).map(|_| rng.random_range(0..3)).collect();
            if is_zero_vec(&req_vec) {
                req_vec = unit(n, 0);
            }
            let req = Subspace::line(p, &req_vec);
            let mut ws = Workspace::new(alg.clone(), 20, CAP, DEFAULT_SCAN_CAP).unwrap();
            let g = extend_derivation(&mut ws, &f, &req, &caps).unwrap();
            assert!(req.pad_to(ws.dim()).is_subspace_of(g.domain()));
            assert!(g.validate().unwrap().ok);
            let full = ws.full_space();
            assert!(is_strong(ws.algebra(), g.domain(), &full, CAP).unwrap().strong);
            let aug = g.domain().sum(&g.image_space()).unwrap();
            assert!(is_strong(ws.algebra(), &aug, &full, CAP).unwrap().strong);
            for (v, w) in f.pairs() {
                let vp = pad_vec(&v, ws.dim());
                let wp = pad_vec(&w, ws.dim());
                assert_eq!(g.apply(&vp).unwrap(), wp);
            }
            assert!(ws
                .algebra()
                .check_class_k(CAP, DEFAULT_SCAN_CAP)
                .unwrap()
                .ok);
        }
    }

    #[test]
    fn totalizing_the_empty_map_gives_the_zero_derivation() {
        let p = p3();
        let alg = a_alg();
        let mut ws = Workspace::new(alg.clone(), 8, CAP, DEFAULT_SCAN_CAP).unwrap();
        let f = PartialDerivation::zero(alg.clone(), Subspace::zero(p, 4)).unwrap();
        let g = totalize(&mut ws, &f, &DriverCaps::default()).unwrap();
        assert!(g.is_total());
        assert_eq!(g.images(), &Matrix::zero(p, 4, 4));
        assert_eq!(ws.dim(), 4);
        assert!(ws.history().is_empty());
    }

    #[test]
    fn totalizing_falls_back_to_the_driver_when_direct_images_fail() {
        let mut ws = Workspace::new(a_alg(), 8, CAP, DEFAULT_SCAN_CAP).unwrap();
        let f = worked_map(1);
        let g = totalize(&mut ws, &f, &DriverCaps::default()).unwrap();
        assert!(g.is_total());
        assert_eq!(ws.dim(), 4);
        assert!(ws.history().is_empty());
        let expected = testdata::map_matrix(
            p3(),
            4,
            &[unit(4, 0), vec![0; 4], vec![0; 4], vec![0, 0, 0, 2]],
        );
        assert_eq!(g.images(), &expected);
    }

    #[test]
    fn derivation_space_has_the_frozen_dimension() {
        use rand::{Rng, SeedableRng};
        let p = p3();
        let free = GradedAlgebra::free(p, 3);
        let basis = derivation_space(&free, &prefix_subspace(&free, 2)).unwrap();
        assert_eq!(basis.len(), 6);
        let alg = a_alg();
        let basis = derivation_space(&alg, &alg.full_space()).unwrap();
        assert_eq!(basis.len(), 11);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for m in &basis {
            let f = PartialDerivation::new(alg.clone(), alg.full_space(), m.clone()).unwrap();
            assert!(f.validate().unwrap().ok);
        }
        for _ in 0..10 {
            let mut rows = vec![vec![0u32; 4]; 4];
            for m in &basis {
                let c = rng.random_range(0..3);
                for (r, row) in rows.iter_mut().enumerate() {
                    add_scaled(p, row, m.row(r), c);
                }
            }
            let images = Matrix::from_rows(p, 4, &rows).unwrap();
            let f = PartialDerivation::new(alg.clone(), alg.full_space(), images).unwrap();
            assert!(f.validate().unwrap().ok);
        }
        // The worked solution lies in the span: flatten and solve.
        let flat: Vec<Vec<u32>> = basis
            .iter()
            .map(|m| m.iter_rows().flatten().copied().collect())
            .collect();
        let stacked = Matrix::from_rows(p, 16, &flat).unwrap();
        let solution = vec![
            1, 0, 0, 0, //
            0, 0, 0, 0, //
            0, 0, 0, 0, //
            0, 0, 0, 2,
        ];
        assert!(stacked.solve_left(&solution).is_some());
    }

    #[test]
    fn structural_checks_hold_on_worked_pseudosolutions() {
        let problems = vec![
            worked_problem(1),
            {
                let p = p3();
                let alg = GradedAlgebra::free(p, 5);
                let base = prefix_subspace(&alg, 2);
                let target = prefix_subspace(&alg, 3);
                let images = testdata::map_matrix(p, 5, &[unit(5, 3), unit(5, 4)]);
                let map = PartialDerivation::new(alg, base.clone(), images).unwrap();
                ExtensionProblem::new(base, target, map, CAP).unwrap()
            },
            {
                let alg = a_pr();
                let base = prefix_subspace(&alg, 3);
                let target = alg.full_space();
                let zero = PartialDerivation::zero(alg.clone(), base.clone()).unwrap();
                ExtensionProblem::new(base, target, zero, CAP).unwrap()
            },
        ];
        for problem in problems {
            let ps = free_pseudosolution(&problem).unwrap();
            assert!(check_relation_restriction(&ps).unwrap());
            assert!(check_strong_pseudosolution(&ps, CAP).unwrap());
            let mut mids: Vec<Subspace> =
                intermediate_subspaces(problem.base(), problem.target(), CAP)
                    .unwrap()
                    .collect();
            mids.push(problem.base().clone());
            mids.push(problem.target().clone());
            for mid in mids {
                assert!(check_wedge_preimage(&ps, &mid).unwrap());
                assert!(check_relative_transport(&ps, &mid).unwrap());
            }
        }
        let ps = free_pseudosolution(&worked_problem(1)).unwrap();
        let outside = span_of(ps.problem().algebra(), &[unit(4, 3)]);
        let err = check_wedge_preimage(&ps, &outside);
        assert!(matches!(err, Err(DerivationError::IntermediateOutOfRange)));
    }
}
