//! The nine acceptance suites: worked-example reproduction, randomized law
//! checking at scale, and the finite probes of the cover structure. Each
//! suite returns a pass/fail outcome with a one-line account instead of
//! panicking, so the binary and the test harness can share them.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nil2_core::exterior::basis_wedges;
use nil2_core::linalg::{add_scaled, add_vecs, scale_vec};
use nil2_core::{
    canonical_w_workspace, check_relation_restriction, check_relative_transport,
    check_strong_pseudosolution, check_wedge_preimage, classify_pseudosolution, classify_step,
    derivation_space, extend_derivation, free_pseudosolution, intermediate_subspaces, is_strong,
    killing_derivation, pair_count, parse_algebra, parse_problem, self_sufficient_closure,
    sigma_f, solve_case_a, stabilizer_residual, to_canonical_json, totalize, tw_holds, CoverPoint,
    DriverCaps, ExtensionKind, ExtensionProblem, GradedAlgebra, LinalgError, Matrix,
    PartialDerivation, Prime, PseudosolutionClass, ScriptFile, StepClassification, StrongError,
    Subspace, TWSpec, WedgeVector, Workspace, DEFAULT_SCAN_CAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: usize = 6;

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl SuiteOutcome {
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        format!("{verdict} {}: {}", self.name, self.detail)
    }
}

/// Where the shipped algebra and problem files live when running from the
/// repository.
pub fn default_fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Runs all nine suites in order.
pub fn all_suites(fixtures: &Path, seed: u64) -> Vec<SuiteOutcome> {
    vec![
        criterion_1(fixtures),
        criterion_2(seed),
        criterion_3(seed),
        criterion_4(fixtures, seed),
        criterion_5(seed),
        criterion_6(seed),
        criterion_7(seed),
        criterion_8(),
        criterion_9(),
    ]
}

fn finish(
    name: &'static str,
    start: Instant,
    limit: Option<Duration>,
    result: Result<String, String>,
) -> SuiteOutcome {
    let elapsed = start.elapsed();
    match result {
        Ok(mut detail) => {
            let mut pass = true;
            if let Some(limit) = limit {
                if elapsed > limit {
                    pass = false;
                    detail.push_str(&format!(" [over the {limit:?} limit]"));
                }
            }
            detail.push_str(&format!(" ({} ms)", elapsed.as_millis()));
            SuiteOutcome { name, pass, detail }
        }
        Err(detail) => SuiteOutcome {
            name,
            pass: false,
            detail,
        },
    }
}

fn e2s(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn p3() -> Prime {
    Prime::new(3).unwrap()
}

fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn pad(v: &[u32], d: usize) -> Vec<u32> {
    let mut out = v.to_vec();
    out.resize(d.max(out.len()), 0);
    out
}

fn rvec(rng: &mut ChaCha8Rng, p: u32, n: usize) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(0..p)).collect()
}

fn rspan(rng: &mut ChaCha8Rng, p: Prime, n: usize, gens: usize) -> Result<Subspace, String> {
    let rows: Vec<Vec<u32>> = (0..gens).map(|_| rvec(rng, p.get(), n)).collect();
    Subspace::span(p, n, &rows).map_err(e2s)
}

/// A random span of combinations of the basis of `s`.
fn rsub_of(rng: &mut ChaCha8Rng, s: &Subspace, gens: usize) -> Result<Subspace, String> {
    let p = s.modulus();
    let basis = s.basis_rows();
    let n = s.ambient_dim();
    let mut rows = Vec::with_capacity(gens);
    for _ in 0..gens {
        let mut v = vec![0u32; n];
        for b in &basis {
            add_scaled(p, &mut v, b, rng.random_range(0..p.get()));
        }
        rows.push(v);
    }
    Subspace::span(p, n, &rows).map_err(e2s)
}

/// A class-K algebra with random relations; retries until membership holds.
fn random_class_k(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_rels: usize,
) -> Result<GradedAlgebra, String> {
    let p = p3();
    for _ in 0..300 {
        let rels = rng.random_range(0..=max_rels);
        let rows: Vec<Vec<u32>> = (0..rels)
            .map(|_| rvec(rng, p.get(), pair_count(n)))
            .collect();
        let span = Subspace::span(p, pair_count(n), &rows).map_err(e2s)?;
        let alg = GradedAlgebra::new(p, n, span).map_err(e2s)?;
        if alg.check_class_k(CAP, DEFAULT_SCAN_CAP).map_err(e2s)?.ok {
            return Ok(alg);
        }
    }
    Err("could not sample a class-K algebra in 300 tries".into())
}

/// The self-sufficient closure, with `None` when the enumeration cap blocks
/// the attempt (the caller resamples).
fn try_closure(alg: &GradedAlgebra, seed_space: &Subspace) -> Result<Option<Subspace>, String> {
    match self_sufficient_closure(alg, seed_space, CAP) {
        Ok(c) => Ok(Some(c)),
        Err(StrongError::Linalg(LinalgError::EnumerationTooLarge { .. })) => Ok(None),
        Err(e) => Err(e.to_string()),
    }
}

/// A random valid derivation on `domain`: a combination of the basis of the
/// derivation space.
fn random_derivation(
    rng: &mut ChaCha8Rng,
    alg: &GradedAlgebra,
    domain: &Subspace,
    basis: &[Matrix],
) -> Result<PartialDerivation, String> {
    let p = alg.modulus();
    let n = alg.dim();
    let t = domain.dim();
    let mut rows = vec![vec![0u32; n]; t];
    for b in basis {
        let c = rng.random_range(0..p.get());
        for (r, row) in rows.iter_mut().enumerate() {
            add_scaled(p, row, b.row(r), c);
        }
    }
    let images = Matrix::from_rows(p, n, &rows).map_err(e2s)?;
    PartialDerivation::new(alg.clone(), domain.clone(), images).map_err(e2s)
}

// ---------------------------------------------------------------------------
// Criterion 1: the three shipped example files classify as transcendental /
// algebraic / prealgebraic with the stated predimensions, in under a second.
// ---------------------------------------------------------------------------

pub fn criterion_1(fixtures: &Path) -> SuiteOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let p = p3();
        let files = ["a_tr.json", "a_alg.json", "a_pr.json"];
        let expected_kind = [
            ExtensionKind::Transcendental,
            ExtensionKind::Algebraic,
            ExtensionKind::Prealgebraic,
        ];
        let expected_delta = [4i64, 3, 3];
        let mut kinds = Vec::new();
        for (k, file) in files.iter().enumerate() {
            let path = fixtures.join(file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let alg = parse_algebra(&text).map_err(e2s)?.to_algebra().map_err(e2s)?;
            let base_rows: Vec<Vec<u32>> = (0..3).map(|i| unit(alg.dim(), i)).collect();
            let base = Subspace::span(p, alg.dim(), &base_rows).map_err(e2s)?;
            let full = alg.full_space();

            let delta_b = alg.predim(&base);
            if delta_b != 3 {
                return Err(format!("{file}: delta(B) = {delta_b}, expected 3"));
            }
            let delta_a = alg.predim(&full);
            if delta_a != expected_delta[k] {
                return Err(format!(
                    "{file}: delta(A) = {delta_a}, expected {}",
                    expected_delta[k]
                ));
            }
            let class = classify_step(&alg, &base, &full, CAP).map_err(e2s)?;
            if class.kind() != expected_kind[k] {
                return Err(format!(
                    "{file}: classified {}, expected {}",
                    class.kind(),
                    expected_kind[k]
                ));
            }
            if let StepClassification::Algebraic { relation, .. } = &class {
                // The forced relation must be a0∧b0 + b1∧b2 exactly.
                let expected =
                    WedgeVector::from_triples(p, alg.dim(), &[(0, 3, 2), (1, 2, 1)]);
                if relation != &expected {
                    return Err(format!("{file}: unexpected forced relation {relation:?}"));
                }
            }
            kinds.push(class.kind().to_string());
        }
        Ok(format!(
            "classified {} with deltas (4, 3, 3) and delta(B) = 3",
            kinds.join(" / ")
        ))
    })();
    finish(
        "criterion 1 (worked example classification)",
        start,
        Some(Duration::from_secs(1)),
        result,
    )
}

// ---------------------------------------------------------------------------
// Criterion 2: submodularity of the predimension on 10^4 random triples,
// cross-checked against element-counting on the first 100.
// ---------------------------------------------------------------------------

/// Predimension recomputed from scratch: count the relation-space elements
/// whose wedge lies in the span of the basis wedges of `s`.
fn oracle_predim(alg: &GradedAlgebra, s: &Subspace) -> Result<i64, String> {
    let p = alg.modulus();
    let rows: Vec<Vec<u32>> = basis_wedges(s)
        .into_iter()
        .map(|w| w.coeffs().to_vec())
        .collect();
    let matrix = Matrix::from_rows(p, pair_count(alg.dim()), &rows).map_err(e2s)?;
    let mut count: u128 = 0;
    for elem in alg.relations().elements() {
        if matrix.solve_left(&elem).is_some() {
            count += 1;
        }
    }
    let mut dim = 0i64;
    while count > 1 {
        count /= p.get() as u128;
        dim += 1;
    }
    Ok(s.dim() as i64 - dim)
}

pub fn criterion_2(seed: u64) -> SuiteOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let p = p3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
        let rounds = 10_000usize;
        let mut oracle_checked = 0usize;
        for round in 0..rounds {
            let n = rng.random_range(2..=6);
            let rels = rng.random_range(0..=3);
            let rel_rows: Vec<Vec<u32>> = (0..rels)
                .map(|_| rvec(&mut rng, p.get(), pair_count(n)))
                .collect();
            let span = Subspace::span(p, pair_count(n), &rel_rows).map_err(e2s)?;
            let alg = GradedAlgebra::new(p, n, span).map_err(e2s)?;
            let a_gens = rng.random_range(0..=3);
            let a = rspan(&mut rng, p, n, a_gens)?;
            let b_gens = rng.random_range(0..=3);
            let b = rspan(&mut rng, p, n, b_gens)?;
            let joined = a.sum(&b).map_err(e2s)?;
            let meet = a.intersect(&b).map_err(e2s)?;
            let lhs = alg.predim(&joined) - alg.predim(&b);
            let rhs = alg.predim(&a) - alg.predim(&meet);
            if lhs > rhs {
                return Err(format!(
                    "submodularity violated in round {round}: {lhs} > {rhs}"
                ));
            }
            if round < 100 {
                // Independent relation-counting oracle for all four terms.
                for s in [&joined, &meet, &a, &b] {
                    let direct = alg.predim(s);
                    let oracle = oracle_predim(&alg, s)?;
                    if direct != oracle {
                        return Err(format!(
                            "predimension disagrees with the counting oracle in round {round}: \
                             {direct} vs {oracle}"
                        ));
                    }
                }
                oracle_checked += 1;
            }
        }
        Ok(format!(
            "{rounds} random triples, zero violations; {oracle_checked} oracle cross-checks"
        ))
    })();
    finish("criterion 2 (submodularity suite)", start, None, result)
}

// ---------------------------------------------------------------------------
// Criteria 3 and 5 share one seeded stream of valid extension problems.
// ---------------------------------------------------------------------------

/// Generates `count` valid problems (dim base <= 4, codimension <= 3) over
/// random class-K algebras and hands each to `visit` together with its free
/// pseudosolution. The stream is a pure function of the seed.
fn problem_stream(
    seed: u64,
    count: usize,
    mut visit: impl FnMut(usize, &ExtensionProblem, &nil2_core::Pseudosolution) -> Result<(), String>,
) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let mut produced = 0usize;
    let mut minimal = 0usize;
    let mut attempts = 0usize;
    while produced < count {
        attempts += 1;
        if attempts > 60 * count {
            return Err(format!(
                "problem generator stalled after {attempts} attempts ({produced} problems)"
            ));
        }
        let n = rng.random_range(3..=7);
        let max_rels = if n >= 5 { 2 } else { 1 };
        let alg = random_class_k(&mut rng, n, max_rels)?;
        let a_gens = rng.random_range(1..=3);
        let a_seed = rspan(&mut rng, p3(), n, a_gens)?;
        let Some(a) = try_closure(&alg, &a_seed)? else {
            continue;
        };
        let b_gens = rng.random_range(0..=2);
        let b_seed = rsub_of(&mut rng, &a, b_gens)?;
        let Some(b) = try_closure(&alg, &b_seed)? else {
            continue;
        };
        if !b.is_subspace_of(&a) || b.dim() > 4 || a.dim() - b.dim() > 3 {
            continue;
        }
        let basis = derivation_space(&alg, &b).map_err(e2s)?;
        let mut problem = None;
        for _ in 0..6 {
            let f = random_derivation(&mut rng, &alg, &b, &basis)?;
            match ExtensionProblem::new(b.clone(), a.clone(), f, CAP) {
                Ok(pr) => {
                    problem = Some(pr);
                    break;
                }
                // The image may wedge badly with the target; resample.
                Err(nil2_core::DerivationError::AugmentedTargetNotStrong { .. }) => continue,
                Err(e) => return Err(format!("unexpected problem rejection: {e}")),
            }
        }
        let Some(problem) = problem else { continue };
        let ps = free_pseudosolution(&problem).map_err(e2s)?;
        visit(produced, &problem, &ps)?;
        if problem.base() != problem.target() {
            match classify_step(&alg, problem.base(), problem.target(), CAP) {
                Ok(_) => minimal += 1,
                Err(StrongError::NotMinimal { .. }) => {}
                Err(e) => return Err(format!("classification failed: {e}")),
            }
        }
        produced += 1;
    }
    Ok(minimal)
}

pub fn criterion_3(seed: u64) -> SuiteOutcome {
    let start = Instant::now();
    let count = 500usize;
    let result = (|| -> Result<String, String> {
        let minimal = problem_stream(seed, count, |round, problem, ps| {
            if !check_relation_restriction(ps).map_err(e2s)? {
                return Err(format!("intersection identity failed in round {round}"));
            }
            // The walk includes both endpoints.
            let mids: Vec<Subspace> =
                intermediate_subspaces(problem.base(), problem.target(), CAP)
                    .map_err(e2s)?
                    .collect();
            for mid in &mids {
                if !check_wedge_preimage(ps, mid).map_err(e2s)? {
                    return Err(format!("preimage identity failed in round {round}"));
                }
                if !check_relative_transport(ps, mid).map_err(e2s)? {
                    return Err(format!("dimension transport failed in round {round}"));
                }
            }
            if !check_strong_pseudosolution(ps, CAP).map_err(e2s)? {
                return Err(format!(
                    "strongness/minimality of the pseudosolution failed in round {round}"
                ));
            }
            Ok(())
        })?;
        Ok(format!(
            "{count} problems ({minimal} over minimal steps), all identities exact"
        ))
    })();
    finish(
        "criterion 3 (free-pseudosolution laws)",
        start,
        Some(Duration::from_secs(300)),
        result,
    )
}

pub fn criterion_5(seed: u64) -> SuiteOutcome {
    let start = Instant::now();
    let count = 500usize;
    let result = (|| -> Result<String, String> {
        problem_stream(seed, count, |round, _problem, ps| {
            // The base algebra is in class K by construction; every nonzero
            // subspace of the extended degree-1 part must keep delta >= 1.
            if let Some((subspace, predim)) = ps
                .extended_algebra()
                .low_predim_witness(CAP)
                .map_err(e2s)?
            {
                return Err(format!(
                    "round {round}: subspace of dimension {} with delta {predim}",
                    subspace.dim()
                ));
            }
            Ok(())
        })?;
        Ok(format!(
            "{count} pseudosolutions scanned, no subspace with delta < 1"
        ))
    })();
    finish("criterion 5 (predimension floor)", start, None, result)
}

// ---------------------------------------------------------------------------
// Criterion 4: the decomposable-witness solver on the worked file and on
// planted algebraic instances.
// ---------------------------------------------------------------------------

pub fn criterion_4(fixtures: &Path, seed: u64) -> SuiteOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let p = p3();
        // Worked example: g(b0) = b0, g(b1) = g(b2) = 0, g(a0) = -a0.
        let path = fixtures.join("worked_problem.json");
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let problem = parse_problem(&text)
            .map_err(e2s)?
            .to_problem(CAP)
            .map_err(e2s)?;
        let ps = free_pseudosolution(&problem).map_err(e2s)?;
        let class = classify_pseudosolution(&ps, DEFAULT_SCAN_CAP).map_err(e2s)?;
        let PseudosolutionClass::CaseA { v0, v1 } = class else {
            return Err("worked problem did not leave class K".into());
        };
        let g = solve_case_a(&ps, &v0, &v1).map_err(e2s)?;
        let expected = Matrix::from_rows(
            p,
            4,
            &[unit(4, 0), vec![0; 4], vec![0; 4], vec![0, 0, 0, 2]],
        )
        .map_err(e2s)?;
        if g.images() != &expected {
            return Err(format!("worked solution images {:?}", g.images()));
        }

        // Planted instances: ambient m+1 with a free spare direction, base
        // b0..b_{m-2}, new vector a0 = e_{m-1}, planted relation
        // a0∧b0 + d with d over the middle block, f = lambda on b0.
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
        let mut done = 0usize;
        let mut attempts = 0usize;
        while done < 100 {
            attempts += 1;
            if attempts > 5_000 {
                return Err(format!("planted generator stalled ({done} instances)"));
            }
            let m = rng.random_range(4..=6);
            let n = m + 1;
            let mut planted = WedgeVector::from_triples(p, n, &[(0, m - 1, 2)]);
            for i in 1..m - 1 {
                for j in (i + 1)..m - 1 {
                    planted.add_term(i, j, rng.random_range(0..3));
                }
            }
            let mut rel_rows = vec![planted.coeffs().to_vec()];
            if rng.random_range(0..3) == 0 {
                let mut extra = WedgeVector::zero(p, n);
                for i in 1..m - 1 {
                    for j in (i + 1)..m - 1 {
                        extra.add_term(i, j, rng.random_range(0..3));
                    }
                }
                if !extra.is_zero() {
                    rel_rows.push(extra.coeffs().to_vec());
                }
            }
            let span = Subspace::span(p, pair_count(n), &rel_rows).map_err(e2s)?;
            let alg = GradedAlgebra::new(p, n, span).map_err(e2s)?;
            if !alg.check_class_k(CAP, DEFAULT_SCAN_CAP).map_err(e2s)?.ok {
                continue;
            }
            let base_rows: Vec<Vec<u32>> = (0..m - 1).map(|i| unit(n, i)).collect();
            let base = Subspace::span(p, n, &base_rows).map_err(e2s)?;
            let target_rows: Vec<Vec<u32>> = (0..m).map(|i| unit(n, i)).collect();
            let target = Subspace::span(p, n, &target_rows).map_err(e2s)?;
            let lambda = rng.random_range(1..3);
            let mut images = vec![vec![0u32; n]; m - 1];
            images[0][0] = lambda;
            let f = PartialDerivation::new(
                alg.clone(),
                base.clone(),
                Matrix::from_rows(p, n, &images).map_err(e2s)?,
            )
            .map_err(e2s)?;
            let problem = ExtensionProblem::new(base, target, f, CAP).map_err(e2s)?;
            let ps = free_pseudosolution(&problem).map_err(e2s)?;
            let class = classify_pseudosolution(&ps, DEFAULT_SCAN_CAP).map_err(e2s)?;
            let PseudosolutionClass::CaseA { v0, v1 } = class else {
                return Err(format!("planted instance {attempts} did not trigger the solver"));
            };
            let g = solve_case_a(&ps, &v0, &v1).map_err(e2s)?;
            if !g.validate().map_err(e2s)?.ok {
                return Err(format!("planted instance {attempts}: solution not a derivation"));
            }
            let aug = problem.augmented_target().map_err(e2s)?;
            if !g.image_space().is_subspace_of(&aug) {
                return Err(format!(
                    "planted instance {attempts}: image leaves the augmented target"
                ));
            }
            done += 1;
        }
        Ok(format!(
            "worked file gives g(a0) = -a0 and {done} planted instances solved exactly"
        ))
    })();
    finish("criterion 4 (decomposable-witness solver)", start, None, result)
}

// ---------------------------------------------------------------------------
// Criterion 6: the extension driver on random scripts, with byte-identical
// replay of the recorded growth.
// ---------------------------------------------------------------------------

/// A random extension algebra of `dim` whose first `m` coordinates carry no
/// relations, suitable for embedding over an `m`-dimensional base.
fn random_extension_over(
    rng: &mut ChaCha8Rng,
    m: usize,
    dim: usize,
) -> Result<Option<GradedAlgebra>, String> {
    let p = p3();
    for _ in 0..60 {
        let rels = rng.random_range(0..=2);
        let rows: Vec<Vec<u32>> = (0..rels)
            .map(|_| rvec(rng, p.get(), pair_count(dim)))
            .collect();
        let span = Subspace::span(p, pair_count(dim), &rows).map_err(e2s)?;
        let alg = GradedAlgebra::new(p, dim, span).map_err(e2s)?;
        let prefix_rows: Vec<Vec<u32>> = (0..m).map(|i| unit(dim, i)).collect();
        let prefix = Subspace::span(p, dim, &prefix_rows).map_err(e2s)?;
        if !alg.relations_of(&prefix).is_zero() {
            continue;
        }
        if !alg.check_class_k(CAP, DEFAULT_SCAN_CAP).map_err(e2s)?.ok {
            continue;
        }
        return Ok(Some(alg));
    }
    Ok(None)
}

pub fn criterion_6(seed: u64) -> SuiteOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let p = p3();
        let caps = DriverCaps::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(6));
        let mut successes = 0usize;
        let mut capped = 0usize;
        let mut attempts = 0usize;
        while successes < 50 {
            attempts += 1;
            if attempts > 600 {
                return Err(format!(
                    "driver generator stalled: {successes} successes in {attempts} attempts"
                ));
            }
            let mut ws = Workspace::empty(p, 12);
            let steps = rng.random_range(1..=2);
            let mut scripted_ok = true;
            for _ in 0..steps {
                // Grow over the zero base or over a relation-free line.
                let base = if ws.dim() > 0 && rng.random_range(0..2) == 0 {
                    let line = rsub_of(&mut rng, &ws.full_space(), 1)?;
                    let strong = is_strong(ws.algebra(), &line, &ws.full_space(), CAP)
                        .map_err(e2s)?
                        .strong;
                    if strong && ws.algebra().relations_of(&line).is_zero() {
                        line
                    } else {
                        Subspace::zero(p, ws.dim())
                    }
                } else {
                    Subspace::zero(p, ws.dim())
                };
                let m = base.dim();
                let dim = m + rng.random_range(2..=3);
                let Some(ext) = random_extension_over(&mut rng, m, dim)? else {
                    scripted_ok = false;
                    break;
                };
                if ws.embed_extension(&base, &ext, CAP, DEFAULT_SCAN_CAP).is_err() {
                    scripted_ok = false;
                    break;
                }
            }
            if !scripted_ok || ws.dim() == 0 || ws.dim() > 9 {
                continue;
            }

            let d_gens = rng.random_range(1..=2);
            let d_seed = rspan(&mut rng, p, ws.dim(), d_gens)?;
            let Some(domain) = try_closure(ws.algebra(), &d_seed)? else {
                continue;
            };
            if domain.dim() > 4 {
                continue;
            }
            let basis = derivation_space(ws.algebra(), &domain).map_err(e2s)?;
            let alg = ws.algebra().clone();
            let mut chosen = None;
            for _ in 0..6 {
                let f = random_derivation(&mut rng, &alg, &domain, &basis)?;
                let aug = domain.sum(&f.image_space()).map_err(e2s)?;
                if is_strong(&alg, &aug, &ws.full_space(), CAP).map_err(e2s)?.strong {
                    chosen = Some(f);
                    break;
                }
            }
            let Some(f) = chosen else { continue };
            let mut v = rvec(&mut rng, p.get(), ws.dim());
            if v.iter().all(|&c| c == 0) {
                v[0] = 1;
            }
            let requested = Subspace::line(p, &v);

            let g = match extend_derivation(&mut ws, &f, &requested, &caps) {
                Ok(g) => g,
                Err(e) => {
                    use crate::run::{CliError, ErrorKind};
                    if CliError::from(e).kind == ErrorKind::Cap {
                        // Budget-bound instance; skip but count it.
                        capped += 1;
                        continue;
                    }
                    return Err(format!("driver failed in attempt {attempts}"));
                }
            };

            let padded = requested.pad_to(ws.dim());
            if !padded.is_subspace_of(g.domain()) {
                return Err(format!("attempt {attempts}: requested vector not in the domain"));
            }
            let full = ws.full_space();
            if !is_strong(ws.algebra(), g.domain(), &full, CAP).map_err(e2s)?.strong {
                return Err(format!("attempt {attempts}: domain not strong"));
            }
            let aug = g.domain().sum(&g.image_space()).map_err(e2s)?;
            if !is_strong(ws.algebra(), &aug, &full, CAP).map_err(e2s)?.strong {
                return Err(format!("attempt {attempts}: domain plus image not strong"));
            }

            let script = ScriptFile::from_workspace(&ws);
            let text = to_canonical_json(&script);
            let replayed = script.replay(12, CAP, DEFAULT_SCAN_CAP).map_err(e2s)?;
            if replayed.algebra() != ws.algebra() {
                return Err(format!("attempt {attempts}: replay rebuilt a different algebra"));
            }
            let text2 = to_canonical_json(&ScriptFile::from_workspace(&replayed));
            if text != text2 {
                return Err(format!("attempt {attempts}: replay record not byte-identical"));
            }
            successes += 1;
        }
        Ok(format!(
            "{successes} driver runs with strong domains and byte-identical replay \
             ({capped} skipped at the budget cap)"
        ))
    })();
    finish("criterion 6 (extension driver)", start, None, result)
}

// ---------------------------------------------------------------------------
// Criterion 7: killing-derivation automorphisms preserve the tangent
// relations on an exhaustive basis grid, in both directions, and compose
// additively.
// ---------------------------------------------------------------------------

fn grid_points(n: usize) -> Vec<CoverPoint> {
    (0..n)
        .map(|i| CoverPoint {
            a: unit(n, i),
            u: vec![0; n],
        })
        .collect()
}

fn apply_sigma(
    f: &PartialDerivation,
    points: &[CoverPoint],
) -> Result<Vec<CoverPoint>, String> {
    points.iter().map(|s| sigma_f(f, s).map_err(e2s)).collect()
}

pub fn criterion_7(seed: u64) -> SuiteOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let p = p3();
        let caps = DriverCaps::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));

        // Workspace prototypes with killing data: (workspace, a, bs, block).
        let mut setups: Vec<(Workspace, Vec<u32>, Vec<Vec<u32>>, Vec<usize>)> = Vec::new();
        let free6 = Workspace::new(GradedAlgebra::free(p, 6), 8, CAP, DEFAULT_SCAN_CAP)
            .map_err(e2s)?;
        setups.push((free6, unit(6, 0), vec![unit(6, 1)], (2..6).collect()));
        let free7 = Workspace::new(GradedAlgebra::free(p, 7), 8, CAP, DEFAULT_SCAN_CAP)
            .map_err(e2s)?;
        setups.push((
            free7,
            unit(7, 0),
            vec![unit(7, 1), unit(7, 2)],
            (3..7).collect(),
        ));
        // Totalizing over the relation needs headroom beyond the initial 8.
        let w8 = canonical_w_workspace(p, 4, 16, CAP, DEFAULT_SCAN_CAP).map_err(e2s)?;
        setups.push((w8, unit(8, 0), vec![unit(8, 1)], (4..8).collect()));

        // Build the total derivations, grouped by the algebra they live on.
        let mut groups: Vec<(GradedAlgebra, Vec<PartialDerivation>)> = Vec::new();
        let mut total = 0usize;
        for (proto, a, bs, block) in &setups {
            for round in 0..7 {
                // Random nonzero vector in the fresh block.
                let mut e = vec![0u32; proto.dim()];
                loop {
                    for &i in block {
                        e[i] = rng.random_range(0..3);
                    }
                    if e.iter().any(|&c| c != 0) {
                        break;
                    }
                }
                let mut local = proto.clone();
                let f = killing_derivation(&local, a, bs, &e, CAP).map_err(e2s)?;
                let f = totalize(&mut local, &f, &caps).map_err(e2s)?;
                if !f.is_total() {
                    return Err(format!("round {round}: totalization left a partial map"));
                }
                total += 1;
                let alg = local.algebra().clone();
                match groups.iter_mut().find(|(g, _)| g == &alg) {
                    Some((_, fs)) => fs.push(f),
                    None => groups.push((alg, vec![f])),
                }
            }
        }
        if total < 20 {
            return Err(format!("only {total} derivations built"));
        }

        // Preservation on the exhaustive unit grid for n = 1 and n = 2, in
        // both directions, plus constructed on-relation tuples with nonzero
        // fiber parts.
        let mut instances = 0u64;
        for (alg, fs) in &groups {
            let n = alg.dim();
            let units = grid_points(n);
            let spec1 = TWSpec::new(1).map_err(e2s)?;
            let spec2 = TWSpec::new(2).map_err(e2s)?;
            for f in fs {
                let neg = f.negate();
                for (dir, h) in [(0, f), (1, &neg)] {
                    for x in &units {
                        for y in &units {
                            let xs = [x.clone()];
                            let ys = [y.clone()];
                            let before = tw_holds(alg, &spec1, &xs, &ys).map_err(e2s)?;
                            let fx = apply_sigma(h, &xs)?;
                            let fy = apply_sigma(h, &ys)?;
                            let after = tw_holds(alg, &spec1, &fx, &fy).map_err(e2s)?;
                            if before != after {
                                return Err(format!(
                                    "n=1 preservation failed (direction {dir})"
                                ));
                            }
                            instances += 1;
                        }
                    }
                    for x1 in 0..n {
                        for y1 in 0..n {
                            for x2 in 0..n {
                                for y2 in 0..n {
                                    let xs = [units[x1].clone(), units[x2].clone()];
                                    let ys = [units[y1].clone(), units[y2].clone()];
                                    let before =
                                        tw_holds(alg, &spec2, &xs, &ys).map_err(e2s)?;
                                    let fx = apply_sigma(h, &xs)?;
                                    let fy = apply_sigma(h, &ys)?;
                                    let after =
                                        tw_holds(alg, &spec2, &fx, &fy).map_err(e2s)?;
                                    if before != after {
                                        return Err(format!(
                                            "n=2 preservation failed (direction {dir})"
                                        ));
                                    }
                                    instances += 1;
                                }
                            }
                        }
                    }
                }
                // Constructed on-relation tuples with nonzero fiber parts.
                for _ in 0..10 {
                    let x = CoverPoint {
                        a: rvec(&mut rng, 3, n),
                        u: rvec(&mut rng, 3, n),
                    };
                    let y = CoverPoint {
                        a: rvec(&mut rng, 3, n),
                        u: rvec(&mut rng, 3, n),
                    };
                    let xs = [x.clone(), y.clone()];
                    let ys = [y.clone(), x.clone()];
                    if !tw_holds(alg, &spec2, &xs, &ys).map_err(e2s)? {
                        return Err("paired tuple should satisfy the relation".into());
                    }
                    let fx = apply_sigma(f, &xs)?;
                    let fy = apply_sigma(f, &ys)?;
                    if !tw_holds(alg, &spec2, &fx, &fy).map_err(e2s)? {
                        return Err("preservation failed on a true instance".into());
                    }
                    instances += 1;
                }
            }
        }

        // Homomorphism law, pointwise on sampled points.
        let mut law_points = 0u64;
        for (alg, fs) in &groups {
            let n = alg.dim();
            for i in 0..fs.len() {
                for j in 0..fs.len() {
                    let sum = fs[i].add(&fs[j]).map_err(e2s)?;
                    for _ in 0..12 {
                        let s = CoverPoint {
                            a: rvec(&mut rng, 3, n),
                            u: rvec(&mut rng, 3, n),
                        };
                        let via_pair =
                            sigma_f(&fs[i], &sigma_f(&fs[j], &s).map_err(e2s)?).map_err(e2s)?;
                        let via_sum = sigma_f(&sum, &s).map_err(e2s)?;
                        if via_pair != via_sum {
                            return Err("composition disagrees with addition".into());
                        }
                        law_points += 1;
                    }
                }
            }
        }

        Ok(format!(
            "{total} total derivations, {instances} instances preserved both ways, \
             homomorphism law on {law_points} points"
        ))
    })();
    finish("criterion 7 (cover automorphisms)", start, None, result)
}

// ---------------------------------------------------------------------------
// Criterion 8: the killing-derivation orbit probe moves the fiber point to
// pairwise distinct images, one per choice in the fresh line.
// ---------------------------------------------------------------------------

pub fn criterion_8() -> SuiteOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let p = p3();
        let caps = DriverCaps::default();
        let proto = Workspace::new(GradedAlgebra::free(p, 6), 8, CAP, DEFAULT_SCAN_CAP)
            .map_err(e2s)?;
        let a = unit(6, 0);
        let bs = vec![unit(6, 1)];
        let probe = CoverPoint {
            a: a.clone(),
            u: unit(6, 2),
        };
        // All p choices of e in the fresh line through e5.
        let es: Vec<Vec<u32>> = (0..3).map(|c| scale_vec(p, c, &unit(6, 5))).collect();
        let mut images = Vec::new();
        for e in &es {
            let mut local = proto.clone();
            let f = killing_derivation(&local, &a, &bs, e, CAP).map_err(e2s)?;
            let f = totalize(&mut local, &f, &caps).map_err(e2s)?;
            // The ambient can grow under totalization; embed the probe with
            // zero padding and compare on the original coordinates.
            let d = f.algebra().dim();
            let grown = CoverPoint {
                a: pad(&probe.a, d),
                u: pad(&probe.u, d),
            };
            let image = sigma_f(&f, &grown).map_err(e2s)?;
            let expected = CoverPoint {
                a: pad(&a, d),
                u: pad(&add_vecs(p, &probe.u, e), d),
            };
            if image != expected {
                return Err(format!("image disagrees with direct evaluation for e = {e:?}"));
            }
            // Record on the original coordinates so runs compare uniformly.
            images.push(CoverPoint {
                a: a.clone(),
                u: add_vecs(p, &probe.u, e),
            });
        }
        for i in 0..images.len() {
            for j in (i + 1)..images.len() {
                if images[i] == images[j] {
                    return Err(format!("images {i} and {j} coincide"));
                }
            }
        }
        Ok(format!(
            "tally {}/{} pairwise distinct images",
            images.len(),
            es.len()
        ))
    })();
    finish("criterion 8 (orbit probe)", start, None, result)
}

// ---------------------------------------------------------------------------
// Criterion 9: exhaustive stabilizer scan over all 81 shift tuples on the
// canonical relation instance; zero residual only at the zero tuple.
// ---------------------------------------------------------------------------

pub fn criterion_9() -> SuiteOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let p = p3();
        let ws = canonical_w_workspace(p, 4, 12, CAP, DEFAULT_SCAN_CAP).map_err(e2s)?;
        let alg = ws.algebra();
        let n = ws.dim();
        let pts: Vec<CoverPoint> = (0..4)
            .map(|i| CoverPoint {
                a: unit(n, i),
                u: vec![0; n],
            })
            .collect();
        let mut zeros = 0usize;
        let mut scanned = 0usize;
        let mut zero_tuple_only = true;
        for c0 in 0..3u32 {
            for c1 in 0..3u32 {
                for c2 in 0..3u32 {
                    for c3 in 0..3u32 {
                        let tuple = [c0, c1, c2, c3];
                        let shifts: Vec<Vec<u32>> = (0..4)
                            .map(|i| scale_vec(p, tuple[i], &unit(n, 4 + i)))
                            .collect();
                        let residual =
                            stabilizer_residual(alg, &pts, &shifts).map_err(e2s)?;
                        scanned += 1;
                        if residual.is_zero() {
                            zeros += 1;
                            if tuple != [0, 0, 0, 0] {
                                zero_tuple_only = false;
                            }
                        }
                    }
                }
            }
        }
        if !(zero_tuple_only && zeros == 1 && scanned == 81) {
            return Err(format!(
                "{zeros}/{scanned} zero residuals; zero-only-at-zero: {zero_tuple_only}"
            ));
        }
        Ok("81/81 tuples scanned, zero residual only at the zero tuple".into())
    })();
    finish(
        "criterion 9 (stabilizer scan)",
        start,
        Some(Duration::from_secs(1)),
        result,
    )
}
