//! Exact-arithmetic toolkit for finite 2-nilpotent graded Lie algebras over
//! small prime fields.
//!
//! An algebra here is presented by its degree-1 part V = F_p^n together with a
//! relation subspace N of the exterior square of V; the degree-2 part is the
//! quotient, and the bracket of degree-1 vectors is the wedge taken modulo N.
//! On top of that presentation the crate implements:
//!
//! * predimension bookkeeping (`dim B - dim N(B)`) and its submodularity,
//! * self-sufficient ("strong") subspaces, closures, and the decomposition of
//!   strong extensions into minimal steps (transcendental / algebraic /
//!   prealgebraic),
//! * graded partial derivations, their free pseudosolutions, and the
//!   constructive solver for the decomposable-witness case,
//! * free amalgamation of algebras over a strong base and a growing,
//!   replayable workspace,
//! * the two-sorted cover structure (point sort Q over the vector sort) with
//!   derivation-induced automorphisms and stabilizer residues.
//!
//! All computation is exact over F_p and deterministic: subspaces are held in
//! canonical reduced echelon form, searches use fixed orders, and every
//! exhaustive enumeration is guarded by explicit caps that fail loudly rather
//! than degrade.

pub mod algebra;
pub mod amalgam;
pub mod cover;
pub mod derivation;
pub mod exterior;
pub mod format;
pub mod fp;
pub mod linalg;
pub mod strong;
#[cfg(test)]
pub(crate) mod testdata;

pub use algebra::{AlgebraError, BracketValue, ClassKReport, ClassKWitness, GradedAlgebra};
pub use amalgam::{free_amalgam, AmalgamError, AmalgamOutcome, Embedding, GrowthRecord, Workspace};
pub use cover::{
    act, canonical_w_workspace, killing_derivation, project, sigma_f, stabilizer_residual,
    tw_holds, CoverError, CoverPoint, TWSpec,
};
pub use derivation::{
    check_relation_restriction, check_relative_transport, check_strong_pseudosolution,
    check_wedge_preimage, classify_pseudosolution, derivation_space, extend_derivation,
    extend_derivation_traced, free_pseudosolution, solve_case_a, totalize, DerivationError,
    DriverCaps, ExtensionProblem, PartialDerivation, Pseudosolution, PseudosolutionClass,
    TraceEvent, ValidationReport,
};
pub use strong::{
    classify_step, is_strong, minimal_tower, self_sufficient_closure, ExtensionKind,
    StepClassification, StrongError, StrongReport,
};

pub use exterior::{
    find_decomposable, pair_count, wedge, wedge_square_span, ExteriorError, InducedWedgeMap,
    LeibnizLift, WedgeVector, DEFAULT_SCAN_CAP,
};
pub use format::{
    parse_algebra, parse_experiment, parse_problem, parse_script, to_canonical_json,
    write_algebra, AlgebraFile, Experiment, ExperimentFile, FormatError, PointSpec, ProblemFile,
    RelationTriple, ScriptFile, ScriptStep,
};
pub use fp::{FieldError, Prime};
pub use linalg::{
    intermediate_subspaces, subspace_count, LinalgError, Matrix, Subspace,
};
