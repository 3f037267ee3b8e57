//! Strong subspaces, self-sufficient closure, and minimal extension steps.
//!
//! A subspace `B` is strong in `A` (written `B ≤ A`) when every intermediate
//! `B ⊆ C ⊆ A` has `δ(C) ≥ δ(B)`: nothing between them loses predimension.
//! The self-sufficient closure of a subspace is the smallest strong superspace
//! in the ambient degree-1 space; it exists and is unique because `δ` is
//! submodular. A strong extension factors into a tower of minimal strong
//! steps, and each minimal step is one of exactly three shapes:
//!
//! * transcendental — one new vector, predimension rises by one;
//! * algebraic — one new vector, predimension unchanged, a single forced
//!   relation `a₀∧b₀ + d` with `b₀` in the base and `d ∈ ∧²` of the base;
//! * prealgebraic — several new vectors, predimension unchanged.
//!
//! Exhaustive subspace scans power every check here. They stay feasible
//! through an exact reduction: a predimension violator `C` intersected with
//! `base + supp N` keeps its relation space and can only shrink, so scans are
//! confined to that subspace and capped by `cap` on the quotient dimension.

use crate::algebra::{AlgebraError, GradedAlgebra};
use crate::exterior::{basis_wedges, wedge, WedgeVector};
use crate::linalg::{intermediate_subspaces, LinalgError, Matrix, Subspace};
use thiserror::Error;

/// Errors from strongness checks and tower decompositions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrongError {
    /// The base is not contained in the extension.
    #[error("base is not contained in the top subspace")]
    BaseNotContained,
    /// The base fails to be strong in the extension.
    #[error("base is not strong: a subspace of predimension {predim} sits above it")]
    NotStrong { violator: Subspace, predim: i64 },
    /// A step offered for classification has a proper strong intermediate.
    #[error("not a minimal strong step: a proper intermediate of dimension {} is strong", .intermediate.dim())]
    NotMinimal { intermediate: Subspace },
    /// A validated minimal step with a codimension/predimension combination
    /// that minimal steps cannot have; indicates internal inconsistency.
    #[error("minimal step with impossible shape: codimension {codim}, predimension change {delta_change}")]
    ImpossibleShape { codim: usize, delta_change: i64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Verdict of a strongness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongReport {
    pub strong: bool,
    /// A witness `C` with `δ(C) < δ(base)`, together with its predimension,
    /// when the check fails.
    pub violator: Option<(Subspace, i64)>,
}

/// The three shapes a minimal strong step can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtensionKind {
    Transcendental,
    Algebraic,
    Prealgebraic,
}

impl std::fmt::Display for ExtensionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtensionKind::Transcendental => write!(f, "transcendental"),
            ExtensionKind::Algebraic => write!(f, "algebraic"),
            ExtensionKind::Prealgebraic => write!(f, "prealgebraic"),
        }
    }
}

/// Full classification of a minimal strong step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepClassification {
    /// One new vector, no new relation.
    Transcendental { new_vector: Vec<u32> },
    /// One new vector `a₀` and one forced relation `a₀∧b₀ + d`, scaled so the
    /// leading coefficient of `b₀` is one.
    Algebraic {
        new_vector: Vec<u32>,
        partner: Vec<u32>,
        offset: WedgeVector,
        relation: WedgeVector,
    },
    /// Several new vectors, predimension unchanged, no strong intermediate.
    Prealgebraic { codim: usize },
}

impl StepClassification {
    pub fn kind(&self) -> ExtensionKind {
        match self {
            StepClassification::Transcendental { .. } => ExtensionKind::Transcendental,
            StepClassification::Algebraic { .. } => ExtensionKind::Algebraic,
            StepClassification::Prealgebraic { .. } => ExtensionKind::Prealgebraic,
        }
    }
}

fn check_contained(base: &Subspace, top: &Subspace) -> Result<(), StrongError> {
    if base.is_subspace_of(top) {
        Ok(())
    } else {
        Err(StrongError::BaseNotContained)
    }
}

/// The subspace every predimension violator can be intersected into: the base
/// plus the relation support, cut down to the top.
fn violation_support(
    alg: &GradedAlgebra,
    base: &Subspace,
    top: &Subspace,
) -> Result<Subspace, StrongError> {
    let hull = base.sum(&alg.relation_support())?;
    Ok(top.intersect(&hull)?)
}

/// Checks `base ≤ top`: no intermediate subspace drops below `δ(base)`.
pub fn is_strong(
    alg: &GradedAlgebra,
    base: &Subspace,
    top: &Subspace,
    cap: usize,
) -> Result<StrongReport, StrongError> {
    check_contained(base, top)?;
    let floor = alg.predim(base);
    let reduced_top = violation_support(alg, base, top)?;
    for c in intermediate_subspaces(base, &reduced_top, cap)? {
        let delta = alg.predim(&c);
        if delta < floor {
            return Ok(StrongReport {
                strong: false,
                violator: Some((c, delta)),
            });
        }
    }
    Ok(StrongReport {
        strong: true,
        violator: None,
    })
}

/// The self-sufficient closure of `sub` in the full degree-1 space: the
/// unique smallest strong superspace. Computed as the minimizer of
/// `(δ(C), dim C, C)` over intermediates; submodularity makes the minimizer
/// strong and forces it inside every strong superspace.
pub fn self_sufficient_closure(
    alg: &GradedAlgebra,
    sub: &Subspace,
    cap: usize,
) -> Result<Subspace, StrongError> {
    let top = violation_support(alg, sub, &alg.full_space())?;
    let mut best: Option<(i64, usize, Subspace)> = None;
    for c in intermediate_subspaces(sub, &top, cap)? {
        let key = (alg.predim(&c), c.dim(), c);
        match &best {
            Some(b) if *b <= key => {}
            _ => best = Some(key),
        }
    }
    let (_, _, closure) = best.expect("the enumeration always yields `sub` itself");
    Ok(closure)
}

/// Decomposes a strong extension `base ≤ top` into its tower of minimal
/// strong steps. Returns the strictly increasing chain above `base`, ending
/// at `top`; empty when `base == top`. Each step is taken as the
/// lexicographically least strong intermediate of minimal dimension, which
/// makes the tower canonical.
pub fn minimal_tower(
    alg: &GradedAlgebra,
    base: &Subspace,
    top: &Subspace,
    cap: usize,
) -> Result<Vec<Subspace>, StrongError> {
    let report = is_strong(alg, base, top, cap)?;
    if let Some((violator, predim)) = report.violator {
        return Err(StrongError::NotStrong { violator, predim });
    }
    let mut chain = Vec::new();
    let mut current = base.clone();
    while current != *top {
        let mut best: Option<Subspace> = None;
        for c in intermediate_subspaces(&current, top, cap)? {
            if c.dim() == current.dim() {
                continue;
            }
            if let Some(b) = &best {
                if c.dim() > b.dim() {
                    // Enumeration ascends by dimension: nothing smaller left.
                    break;
                }
            }
            if is_strong(alg, &c, top, cap)?.strong {
                match &best {
                    Some(b) if *b <= c => {}
                    _ => best = Some(c),
                }
            }
        }
        // `top` itself is strong in `top`, so a step always exists.
        current = best.expect("top is always a candidate");
        chain.push(current.clone());
    }
    Ok(chain)
}

/// Classifies a minimal strong step `base ≤ top`, validating minimality.
pub fn classify_step(
    alg: &GradedAlgebra,
    base: &Subspace,
    top: &Subspace,
    cap: usize,
) -> Result<StepClassification, StrongError> {
    let report = is_strong(alg, base, top, cap)?;
    if let Some((violator, predim)) = report.violator {
        return Err(StrongError::NotStrong { violator, predim });
    }
    for c in intermediate_subspaces(base, top, cap)? {
        if c.dim() == base.dim() || c.dim() == top.dim() {
            continue;
        }
        if is_strong(alg, &c, top, cap)?.strong {
            return Err(StrongError::NotMinimal { intermediate: c });
        }
    }
    let codim = top.dim() - base.dim();
    let change = alg.rel_predim(top, base);
    match (codim, change) {
        (1, 1) => Ok(StepClassification::Transcendental {
            new_vector: new_vector(base, top),
        }),
        (1, 0) => classify_algebraic(alg, base, top),
        (c, 0) if c >= 2 => Ok(StepClassification::Prealgebraic { codim }),
        (c, d) => Err(StrongError::ImpossibleShape {
            codim: c,
            delta_change: d,
        }),
    }
}

/// The canonical new vector of a codimension-one step: the single echelon
/// row of the complement, reduced modulo the base.
fn new_vector(base: &Subspace, top: &Subspace) -> Vec<u32> {
    let comp = base.complement_in(top);
    debug_assert_eq!(comp.len(), 1);
    comp.into_iter().next().unwrap()
}

fn classify_algebraic(
    alg: &GradedAlgebra,
    base: &Subspace,
    top: &Subspace,
) -> Result<StepClassification, StrongError> {
    let p = alg.modulus();
    let a0 = new_vector(base, top);
    // The forced relation: the one new echelon generator of N(top) over
    // N(base), reduced modulo N(base).
    let n_base = alg.relations_of(base);
    let n_top = alg.relations_of(top);
    let fresh = n_base.complement_in(&n_top);
    debug_assert_eq!(fresh.len(), 1, "codim-1 predim-0 step adds one relation");
    let mut relation = WedgeVector::from_coeffs(p, alg.dim(), fresh.into_iter().next().unwrap());
    // Decompose in the basis of ∧²top adapted to (base basis, a₀): rows
    // a₀∧cᵢ carry the partner, rows cᵢ∧cⱼ the offset.
    let base_rows = base.basis_rows();
    let mut rows: Vec<Vec<u32>> = base_rows
        .iter()
        .map(|c| wedge(p, &a0, c).coeffs().to_vec())
        .collect();
    let partner_rows = rows.len();
    for w in basis_wedges(base) {
        rows.push(w.coeffs().to_vec());
    }
    let matrix = Matrix::from_rows(p, relation.coeffs().len(), &rows)?;
    let coords = matrix
        .solve_left(relation.coeffs())
        .expect("the relation lies in the wedge square of the top");
    let mut partner = vec![0u32; alg.dim()];
    for (i, c) in base_rows.iter().enumerate() {
        for (k, x) in c.iter().enumerate() {
            partner[k] = p.add(partner[k], p.mul(coords[i], *x));
        }
    }
    // Scale so the partner's leading coefficient is one.
    let lead = partner
        .iter()
        .find(|x| **x != 0)
        .copied()
        .expect("a new relation never lies in the wedge square of the base");
    let scale = p.inv(lead);
    let partner: Vec<u32> = partner.iter().map(|x| p.mul(scale, *x)).collect();
    relation = relation.scale(scale);
    let offset = relation.sub(&wedge(p, &a0, &partner));
    debug_assert!(coords[partner_rows..]
        .iter()
        .zip(basis_wedges(base))
        .map(|(c, w)| w.scale(p.mul(*c, scale)))
        .fold(WedgeVector::zero(p, alg.dim()), |acc, w| acc.add(&w))
        .eq(&offset));
    Ok(StepClassification::Algebraic {
        new_vector: a0,
        partner,
        offset,
        relation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::pair_count;
    use crate::testdata;
    use proptest::prelude::*;

    fn p3() -> crate::fp::Prime {
        testdata::p3()
    }

    /// Strongness by unreduced exhaustion, as an oracle.
    fn is_strong_naive(
        alg: &GradedAlgebra,
        base: &Subspace,
        top: &Subspace,
        cap: usize,
    ) -> bool {
        let floor = alg.predim(base);
        intermediate_subspaces(base, top, cap)
            .unwrap()
            .all(|c| alg.predim(&c) >= floor)
    }

    #[test]
    fn worked_base_is_strong_in_all_three_extensions() {
        let b3 = |alg: &GradedAlgebra| testdata::prefix_subspace(alg, 3);
        for alg in [testdata::a_tr(), testdata::a_alg(), testdata::a_pr()] {
            let report = is_strong(&alg, &b3(&alg), &alg.full_space(), 6).unwrap();
            assert!(report.strong, "the three-generator base embeds strongly");
        }
    }

    #[test]
    fn non_strong_pair_reports_violator_frozen() {
        // N = ⟨e0∧e1, e0∧e2⟩ on F^4: above ⟨e1,e2⟩ the subspace ⟨e0,e1,e2⟩
        // has δ = 1 < 2, while the full space has δ = 2 and is fine.
        let p = p3();
        let rows = [
            wedge(p, &testdata::unit(4, 0), &testdata::unit(4, 1)).coeffs().to_vec(),
            wedge(p, &testdata::unit(4, 0), &testdata::unit(4, 2)).coeffs().to_vec(),
        ];
        let n = Subspace::span(p, pair_count(4), &rows).unwrap();
        let alg = GradedAlgebra::new(p, 4, n).unwrap();
        let base = testdata::span_of(&alg, &[testdata::unit(4, 1), testdata::unit(4, 2)]);
        assert_eq!(alg.predim(&alg.full_space()), 2);
        let report = is_strong(&alg, &base, &alg.full_space(), 6).unwrap();
        assert!(!report.strong);
        let (violator, delta) = report.violator.unwrap();
        let expected = testdata::span_of(
            &alg,
            &[testdata::unit(4, 0), testdata::unit(4, 1), testdata::unit(4, 2)],
        );
        assert_eq!(violator, expected);
        assert_eq!(delta, 1);
    }

    #[test]
    fn strongness_reflexive_and_base_violations() {
        let alg = testdata::a_pr();
        let full = alg.full_space();
        assert!(is_strong(&alg, &full, &full, 6).unwrap().strong);
        let zero = Subspace::zero(p3(), 5);
        // The zero space is strong exactly when no subspace has negative δ.
        assert!(is_strong(&alg, &zero, &full, 6).unwrap().strong);
    }

    #[test]
    fn support_reduction_matches_naive_strongness() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let p = p3();
        for _ in 0..60 {
            let n_dim = rng.random_range(2..=5usize);
            let wedge_dim = pair_count(n_dim);
            let rel_count = rng.random_range(0..=2usize);
            let rel_rows: Vec<Vec<u32>> = (0..rel_count)
                .map(|_| (0..wedge_dim).map(|_| rng.random_range(0..3u32)).collect())
                .collect();
            let alg = GradedAlgebra::new(
                p,
                n_dim,
                Subspace::span(p, wedge_dim, &rel_rows).unwrap(),
            )
            .unwrap();
            let base_rows: Vec<Vec<u32>> = (0..rng.random_range(0..=2usize))
                .map(|_| (0..n_dim).map(|_| rng.random_range(0..3u32)).collect())
                .collect();
            let base = Subspace::span(p, n_dim, &base_rows).unwrap();
            let top = alg.full_space();
            let fast = is_strong(&alg, &base, &top, 6).unwrap();
            assert_eq!(fast.strong, is_strong_naive(&alg, &base, &top, 6));
            if let Some((violator, delta)) = fast.violator {
                assert!(base.is_subspace_of(&violator) && violator.is_subspace_of(&top));
                assert_eq!(alg.predim(&violator), delta);
                assert!(delta < alg.predim(&base));
            }
        }
    }

    #[test]
    fn closure_of_strong_subspace_is_itself() {
        let alg = testdata::a_pr();
        let base = testdata::prefix_subspace(&alg, 3);
        assert_eq!(self_sufficient_closure(&alg, &base, 6).unwrap(), base);
    }

    #[test]
    fn closure_pulls_in_the_partner_generator_frozen() {
        // In the two-generator extension, ⟨b0,b1,b2,a0⟩ has δ = 4 but the
        // full space drops to 3, so the closure of the four-dimensional
        // space is everything.
        let alg = testdata::a_pr();
        let sub = testdata::prefix_subspace(&alg, 4);
        assert_eq!(alg.predim(&sub), 4);
        let closure = self_sufficient_closure(&alg, &sub, 6).unwrap();
        assert_eq!(closure, alg.full_space());
    }

    #[test]
    fn closure_matches_minimal_strong_superspace_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let p = p3();
        for _ in 0..40 {
            let n_dim = rng.random_range(2..=4usize);
            let wedge_dim = pair_count(n_dim);
            let rel_count = rng.random_range(0..=2usize);
            let rel_rows: Vec<Vec<u32>> = (0..rel_count)
                .map(|_| (0..wedge_dim).map(|_| rng.random_range(0..3u32)).collect())
                .collect();
            let alg = GradedAlgebra::new(
                p,
                n_dim,
                Subspace::span(p, wedge_dim, &rel_rows).unwrap(),
            )
            .unwrap();
            let sub_rows: Vec<Vec<u32>> = (0..rng.random_range(0..=2usize))
                .map(|_| (0..n_dim).map(|_| rng.random_range(0..3u32)).collect())
                .collect();
            let sub = Subspace::span(p, n_dim, &sub_rows).unwrap();
            let closure = self_sufficient_closure(&alg, &sub, 6).unwrap();
            // Oracle: strong superspaces of `sub`, by unreduced enumeration.
            let zero = Subspace::zero(p, n_dim);
            let full = alg.full_space();
            let strong_supers: Vec<Subspace> = intermediate_subspaces(&zero, &full, 6)
                .unwrap()
                .filter(|c| sub.is_subspace_of(c))
                .filter(|c| is_strong_naive(&alg, c, &full, 6))
                .collect();
            // The closure is strong, contains sub, and sits inside them all.
            assert!(strong_supers.contains(&closure));
            for s in &strong_supers {
                assert!(closure.is_subspace_of(s));
            }
        }
    }

    #[test]
    fn towers_of_the_three_worked_extensions_are_single_steps() {
        for (alg, kind) in [
            (testdata::a_tr(), ExtensionKind::Transcendental),
            (testdata::a_alg(), ExtensionKind::Algebraic),
            (testdata::a_pr(), ExtensionKind::Prealgebraic),
        ] {
            let base = testdata::prefix_subspace(&alg, 3);
            let full = alg.full_space();
            let tower = minimal_tower(&alg, &base, &full, 6).unwrap();
            assert_eq!(tower, vec![full.clone()], "one minimal step");
            let class = classify_step(&alg, &base, &full, 6).unwrap();
            assert_eq!(class.kind(), kind);
        }
    }

    #[test]
    fn algebraic_step_extracts_forced_relation_frozen() {
        let alg = testdata::a_alg();
        let base = testdata::prefix_subspace(&alg, 3);
        match classify_step(&alg, &base, &alg.full_space(), 6).unwrap() {
            StepClassification::Algebraic {
                new_vector,
                partner,
                offset,
                relation,
            } => {
                assert_eq!(new_vector, testdata::unit(4, 3));
                assert_eq!(partner, testdata::unit(4, 0));
                let p = p3();
                assert_eq!(offset, WedgeVector::from_triples(p, 4, &[(1, 2, 1)]));
                // relation = a0∧b0 + b1∧b2 exactly.
                assert_eq!(
                    relation,
                    WedgeVector::from_triples(p, 4, &[(0, 3, 2), (1, 2, 1)])
                );
                // It spans the relation space.
                assert_eq!(
                    Subspace::span(p, pair_count(4), &[relation.coeffs().to_vec()]).unwrap(),
                    *alg.relations()
                );
            }
            other => panic!("expected algebraic, got {other:?}"),
        }
    }

    #[test]
    fn prealgebraic_step_has_no_strong_intermediate() {
        let alg = testdata::a_pr();
        let base = testdata::prefix_subspace(&alg, 3);
        let full = alg.full_space();
        for c in intermediate_subspaces(&base, &full, 6).unwrap() {
            if c.dim() == base.dim() || c.dim() == full.dim() {
                continue;
            }
            assert!(!is_strong(&alg, &c, &full, 6).unwrap().strong);
        }
        assert_eq!(
            classify_step(&alg, &base, &full, 6).unwrap(),
            StepClassification::Prealgebraic { codim: 2 }
        );
    }

    /// The worked algebraic extension plus a disjoint transcendental
    /// generator: basis (b0, b1, b2, a0, a1), one relation a0∧b0 + b1∧b2.
    fn composite_algebra() -> GradedAlgebra {
        let p = p3();
        let g = WedgeVector::from_triples(p, 5, &[(0, 3, 2), (1, 2, 1)]);
        let n = Subspace::span(p, pair_count(5), &[g.coeffs().to_vec()]).unwrap();
        GradedAlgebra::new(p, 5, n).unwrap()
    }

    #[test]
    fn composite_extension_tower_frozen() {
        let alg = composite_algebra();
        let base = testdata::prefix_subspace(&alg, 3);
        let full = alg.full_space();
        let tower = minimal_tower(&alg, &base, &full, 6).unwrap();
        // The lex-least strong four-dimensional intermediate is ⟨b, a1⟩, so
        // the transcendental step comes first.
        let mid = testdata::span_of(
            &alg,
            &[
                testdata::unit(5, 0),
                testdata::unit(5, 1),
                testdata::unit(5, 2),
                testdata::unit(5, 4),
            ],
        );
        assert_eq!(tower, vec![mid.clone(), full.clone()]);
        match classify_step(&alg, &base, &mid, 6).unwrap() {
            StepClassification::Transcendental { new_vector } => {
                assert_eq!(new_vector, testdata::unit(5, 4));
            }
            other => panic!("expected transcendental, got {other:?}"),
        }
        match classify_step(&alg, &mid, &full, 6).unwrap() {
            StepClassification::Algebraic {
                new_vector,
                partner,
                relation,
                ..
            } => {
                assert_eq!(new_vector, testdata::unit(5, 3));
                assert_eq!(partner, testdata::unit(5, 0));
                assert_eq!(
                    relation,
                    WedgeVector::from_triples(p3(), 5, &[(0, 3, 2), (1, 2, 1)])
                );
            }
            other => panic!("expected algebraic, got {other:?}"),
        }
    }

    #[test]
    fn classify_rejects_non_minimal_step() {
        let alg = composite_algebra();
        let base = testdata::prefix_subspace(&alg, 3);
        match classify_step(&alg, &base, &alg.full_space(), 6) {
            Err(StrongError::NotMinimal { intermediate }) => {
                // First strong intermediate in enumeration order: ⟨b, a0⟩.
                assert_eq!(intermediate, testdata::prefix_subspace(&alg, 4));
            }
            other => panic!("expected NotMinimal, got {other:?}"),
        }
    }

    #[test]
    fn classify_rejects_non_strong_base() {
        let p = p3();
        let rows = [
            wedge(p, &testdata::unit(4, 0), &testdata::unit(4, 1)).coeffs().to_vec(),
            wedge(p, &testdata::unit(4, 0), &testdata::unit(4, 2)).coeffs().to_vec(),
        ];
        let alg =
            GradedAlgebra::new(p, 4, Subspace::span(p, pair_count(4), &rows).unwrap()).unwrap();
        let base = testdata::span_of(&alg, &[testdata::unit(4, 1), testdata::unit(4, 2)]);
        assert!(matches!(
            classify_step(&alg, &base, &alg.full_space(), 6),
            Err(StrongError::NotStrong { .. })
        ));
        assert!(matches!(
            minimal_tower(&alg, &base, &alg.full_space(), 6),
            Err(StrongError::NotStrong { .. })
        ));
    }

    #[test]
    fn tower_of_equal_spaces_is_empty() {
        let alg = testdata::a_alg();
        let full = alg.full_space();
        assert!(minimal_tower(&alg, &full, &full, 6).unwrap().is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn towers_decompose_into_classifiable_steps(
            rel_rows in proptest::collection::vec(proptest::collection::vec(0u32..3, 10), 0..3),
            sub_rows in proptest::collection::vec(proptest::collection::vec(0u32..3, 5), 0..2),
            extra in proptest::collection::vec(0u32..3, 5),
        ) {
            let p = p3();
            let relations = Subspace::span(p, 10, &rel_rows).unwrap();
            let alg = GradedAlgebra::new(p, 5, relations).unwrap();
            let seed = Subspace::span(p, 5, &sub_rows).unwrap();
            let base = self_sufficient_closure(&alg, &seed, 6).unwrap();
            let top = self_sufficient_closure(&alg, &base.with_vector(&extra), 6).unwrap();
            // Strong subspaces of the ambient are strong in each other.
            let tower = minimal_tower(&alg, &base, &top, 6).unwrap();
            let mut current = base.clone();
            let mut delta_total = 0;
            for next in &tower {
                prop_assert!(current.is_subspace_of(next));
                prop_assert!(current.dim() < next.dim());
                let class = classify_step(&alg, &current, next, 6).unwrap();
                let change = alg.rel_predim(next, &current);
                match class.kind() {
                    ExtensionKind::Transcendental => prop_assert_eq!(change, 1),
                    ExtensionKind::Algebraic | ExtensionKind::Prealgebraic => {
                        prop_assert_eq!(change, 0)
                    }
                }
                delta_total += change;
                current = next.clone();
            }
            prop_assert_eq!(&current, &top);
            prop_assert_eq!(delta_total, alg.rel_predim(&top, &base));
        }
    }
}
