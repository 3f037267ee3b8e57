//! JSON file formats for on-disk artifacts: algebra descriptions, extension
//! problems, workspace growth scripts, and cover experiment scripts.
//!
//! Writers emit a canonical form — relation lists are echelon-reduced and the
//! triples of each generator appear in ascending index order — so equal
//! mathematical objects always serialize to byte-identical text.

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, GradedAlgebra};
use crate::amalgam::{AmalgamError, Workspace};
use crate::derivation::{DerivationError, ExtensionProblem, PartialDerivation};
use crate::exterior::{flat_to_pair, WedgeVector};
use crate::fp::{FieldError, Prime};
use crate::linalg::{LinalgError, Subspace};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("relation triple ({i}, {j}, {c}) is not canonical for dimension {dim} modulo {p}")]
    BadTriple {
        i: usize,
        j: usize,
        c: u32,
        dim: usize,
        p: u32,
    },
    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("vector has {found} entries, expected {expected}")]
    VectorLength { expected: usize, found: usize },
    #[error("entry {value} is not reduced modulo {p}")]
    EntryRange { value: u32, p: u32 },
    #[error("script declares modulus {script} but a step algebra uses {step}")]
    ScriptModulusMismatch { script: u32, step: u32 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error(transparent)]
    Derivation(#[from] DerivationError),
}

fn json_error(err: serde_json::Error) -> FormatError {
    FormatError::Json {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

/// One sparse term `c * e_i ∧ e_j` of a relation, with `i < j` and
/// `1 <= c < p` in canonical files.
pub type RelationTriple = (usize, usize, u32);

/// An algebra description: modulus, degree-1 dimension, optional basis
/// labels, and the relation generators as sparse wedge expressions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub p: u32,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub relations: Vec<Vec<RelationTriple>>,
}

impl AlgebraFile {
    /// Reads the canonical description of an algebra. Relations come out
    /// echelon-reduced because the algebra stores them that way.
    pub fn from_algebra(alg: &GradedAlgebra) -> AlgebraFile {
        let n = alg.dim();
        let relations = alg
            .relations()
            .basis_rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(_, &c)| c != 0)
                    .map(|(k, &c)| {
                        let (i, j) = flat_to_pair(n, k);
                        (i, j, c)
                    })
                    .collect()
            })
            .collect();
        AlgebraFile {
            p: alg.modulus().get(),
            dim: n,
            labels: None,
            relations,
        }
    }

    pub fn to_algebra(&self) -> Result<GradedAlgebra, FormatError> {
        let p = Prime::new(self.p)?;
        if let Some(labels) = &self.labels {
            if labels.len() != self.dim {
                return Err(FormatError::LabelCount {
                    expected: self.dim,
                    found: labels.len(),
                });
            }
        }
        let mut rows = Vec::with_capacity(self.relations.len());
        for rel in &self.relations {
            let mut w = WedgeVector::zero(p, self.dim);
            for &(i, j, c) in rel {
                if i >= j || j >= self.dim || c == 0 || c >= self.p {
                    return Err(FormatError::BadTriple {
                        i,
                        j,
                        c,
                        dim: self.dim,
                        p: self.p,
                    });
                }
                w.add_term(i, j, c);
            }
            rows.push(w.coeffs().to_vec());
        }
        let relations = Subspace::span(p, crate::exterior::pair_count(self.dim), &rows)?;
        Ok(GradedAlgebra::new(p, self.dim, relations)?)
    }

    /// Rewrites the relation list in canonical (echelon-reduced) form,
    /// keeping the labels.
    pub fn canonicalize(&self) -> Result<AlgebraFile, FormatError> {
        let mut canon = AlgebraFile::from_algebra(&self.to_algebra()?);
        canon.labels = self.labels.clone();
        Ok(canon)
    }
}

fn check_vector(p: u32, dim: usize, v: &[u32]) -> Result<(), FormatError> {
    if v.len() != dim {
        return Err(FormatError::VectorLength {
            expected: dim,
            found: v.len(),
        });
    }
    for &c in v {
        if c >= p {
            return Err(FormatError::EntryRange { value: c, p });
        }
    }
    Ok(())
}

/// A derivation-extension problem: the ambient algebra, the base and target
/// subspaces as vector lists, and the partial map as (argument, image) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub algebra: AlgebraFile,
    pub base: Vec<Vec<u32>>,
    pub target: Vec<Vec<u32>>,
    pub map: Vec<(Vec<u32>, Vec<u32>)>,
}

impl ProblemFile {
    pub fn from_problem(problem: &ExtensionProblem) -> ProblemFile {
        ProblemFile {
            algebra: AlgebraFile::from_algebra(problem.algebra()),
            base: problem.base().basis_rows(),
            target: problem.target().basis_rows(),
            map: problem.map().pairs(),
        }
    }

    /// Validates and assembles the problem, running all the structural
    /// preconditions (base inside target, map a derivation on the base,
    /// strongness of the base and the augmented target).
    pub fn to_problem(&self, enum_cap: usize) -> Result<ExtensionProblem, FormatError> {
        let alg = self.algebra.to_algebra()?;
        let p = alg.modulus();
        let n = alg.dim();
        for v in self.base.iter().chain(&self.target) {
            check_vector(self.algebra.p, n, v)?;
        }
        for (v, w) in &self.map {
            check_vector(self.algebra.p, n, v)?;
            check_vector(self.algebra.p, n, w)?;
        }
        let base = Subspace::span(p, n, &self.base)?;
        let target = Subspace::span(p, n, &self.target)?;
        let map = PartialDerivation::from_pairs(alg, &self.map)?;
        if map.domain() != &base {
            return Err(DerivationError::DomainMismatch.into());
        }
        Ok(ExtensionProblem::new(base, target, map, enum_cap)?)
    }
}

/// One growth request: embed `algebra` over the span of `base` (vectors in
/// the workspace as it stands when the step runs).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStep {
    pub base: Vec<Vec<u32>>,
    pub algebra: AlgebraFile,
}

/// An ordered growth script. Replaying from the empty workspace is
/// deterministic: the same script always rebuilds the same algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptFile {
    pub p: u32,
    pub steps: Vec<ScriptStep>,
}

impl ScriptFile {
    /// Records the growth history of a workspace as a replayable script.
    pub fn from_workspace(ws: &Workspace) -> ScriptFile {
        let steps = ws
            .history()
            .iter()
            .map(|record| ScriptStep {
                base: record.base.basis_rows(),
                algebra: AlgebraFile::from_algebra(&record.extension),
            })
            .collect();
        ScriptFile {
            p: ws.modulus().get(),
            steps,
        }
    }

    /// Replays every step from the empty workspace.
    pub fn replay(
        &self,
        budget: usize,
        enum_cap: usize,
        scan_cap: u128,
    ) -> Result<Workspace, FormatError> {
        let p = Prime::new(self.p)?;
        let mut ws = Workspace::empty(p, budget);
        for step in &self.steps {
            if step.algebra.p != self.p {
                return Err(FormatError::ScriptModulusMismatch {
                    script: self.p,
                    step: step.algebra.p,
                });
            }
            let ext = step.algebra.to_algebra()?;
            for v in &step.base {
                check_vector(self.p, ws.dim(), v)?;
            }
            let base = Subspace::span(p, ws.dim(), &step.base)?;
            ws.embed_extension(&base, &ext, enum_cap, scan_cap)?;
        }
        Ok(ws)
    }
}

/// A point of the two-sorted cover written out as its two coordinate blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSpec {
    pub a: Vec<u32>,
    pub u: Vec<u32>,
}

/// One cover experiment. The tagged layout keeps scripts self-describing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    /// Sample total derivations and check that each induced cover map
    /// preserves the n-ary relations (n bounded by `max_pairs`) on sampled
    /// tuples, in both directions, and that composition matches addition.
    AutomorphismCheck {
        derivations: usize,
        samples: usize,
        max_pairs: usize,
    },
    /// Kill `a` against `bs`, send the chosen vector to each `e` in turn,
    /// and probe how the induced maps move the fiber point `(a, u)`.
    OrbitProbe {
        a: Vec<u32>,
        bs: Vec<Vec<u32>>,
        u: Vec<u32>,
        es: Vec<Vec<u32>>,
    },
    /// Scan shift tuples over the span of `block` and tally which annihilate
    /// the stabilizer residual at `points`. When `expected_zeros` is given,
    /// the check passes only if the tally matches it.
    StabilizerScan {
        points: Vec<PointSpec>,
        block: Vec<Vec<u32>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expected_zeros: Option<u64>,
    },
}

/// A seeded batch of cover experiments over one workspace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentFile {
    pub seed: u64,
    pub experiments: Vec<Experiment>,
}

pub fn parse_algebra(text: &str) -> Result<AlgebraFile, FormatError> {
    serde_json::from_str(text).map_err(json_error)
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, FormatError> {
    serde_json::from_str(text).map_err(json_error)
}

pub fn parse_script(text: &str) -> Result<ScriptFile, FormatError> {
    serde_json::from_str(text).map_err(json_error)
}

pub fn parse_experiment(text: &str) -> Result<ExperimentFile, FormatError> {
    serde_json::from_str(text).map_err(json_error)
}

/// Pretty-prints with a trailing newline. Struct fields keep their declared
/// order, so the output is deterministic.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serialization cannot fail");
    text.push('\n');
    text
}

/// Canonicalizes the relation list before printing.
pub fn write_algebra(file: &AlgebraFile) -> Result<String, FormatError> {
    Ok(to_canonical_json(&file.canonicalize()?))
}
