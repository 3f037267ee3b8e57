//! The three commands behind the binary: verdict checks on algebra files,
//! derivation extension over a replayed workspace, and cover experiments.
//!
//! Failures carry a kind so the process can exit with a distinct code per
//! category: file or JSON trouble, violated preconditions, exhausted caps,
//! and internal inconsistencies.

use nil2_core::{
    extend_derivation_traced, AlgebraError, AmalgamError, CoverError, DerivationError, DriverCaps,
    ExteriorError, FormatError, GradedAlgebra, LinalgError, StrongError, Subspace,
};
use serde_json::json;

use crate::experiments;
use crate::report::{CheckResult, Parameters, Report};

/// Failure category, one exit code each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable file or malformed JSON.
    Parse,
    /// A stated precondition does not hold for the given inputs.
    Precondition,
    /// An enumeration, scan, budget, or depth cap was exceeded.
    Cap,
    /// An invariant the implementation relies on failed; a bug.
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Parse => 2,
            ErrorKind::Precondition => 3,
            ErrorKind::Cap => 4,
            ErrorKind::Internal => 5,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn precondition(message: impl Into<String>) -> CliError {
        CliError {
            kind: ErrorKind::Precondition,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

fn kind_of_linalg(err: &LinalgError) -> ErrorKind {
    match err {
        LinalgError::EnumerationTooLarge { .. } => ErrorKind::Cap,
        _ => ErrorKind::Precondition,
    }
}

fn kind_of_exterior(err: &ExteriorError) -> ErrorKind {
    match err {
        ExteriorError::ScanTooLarge { .. } => ErrorKind::Cap,
        _ => ErrorKind::Precondition,
    }
}

fn kind_of_algebra(err: &AlgebraError) -> ErrorKind {
    match err {
        AlgebraError::Linalg(e) => kind_of_linalg(e),
        AlgebraError::Exterior(e) => kind_of_exterior(e),
        _ => ErrorKind::Precondition,
    }
}

fn kind_of_strong(err: &StrongError) -> ErrorKind {
    match err {
        StrongError::ImpossibleShape { .. } => ErrorKind::Internal,
        StrongError::Algebra(e) => kind_of_algebra(e),
        StrongError::Linalg(e) => kind_of_linalg(e),
        _ => ErrorKind::Precondition,
    }
}

fn kind_of_amalgam(err: &AmalgamError) -> ErrorKind {
    match err {
        AmalgamError::BudgetExceeded { .. } => ErrorKind::Cap,
        AmalgamError::Algebra(e) => kind_of_algebra(e),
        AmalgamError::Strong(e) => kind_of_strong(e),
        AmalgamError::Linalg(e) => kind_of_linalg(e),
        _ => ErrorKind::Precondition,
    }
}

fn kind_of_derivation(err: &DerivationError) -> ErrorKind {
    match err {
        DerivationError::DepthExhausted { .. } => ErrorKind::Cap,
        DerivationError::Inconsistent { .. } => ErrorKind::Internal,
        DerivationError::Algebra(e) => kind_of_algebra(e),
        DerivationError::Strong(e) => kind_of_strong(e),
        DerivationError::Amalgam(e) => kind_of_amalgam(e),
        DerivationError::Exterior(e) => kind_of_exterior(e),
        DerivationError::Linalg(e) => kind_of_linalg(e),
        _ => ErrorKind::Precondition,
    }
}

fn kind_of_cover(err: &CoverError) -> ErrorKind {
    match err {
        CoverError::Strong(e) => kind_of_strong(e),
        CoverError::Derivation(e) => kind_of_derivation(e),
        CoverError::Amalgam(e) => kind_of_amalgam(e),
        CoverError::Linalg(e) => kind_of_linalg(e),
        CoverError::Algebra(e) => kind_of_algebra(e),
        _ => ErrorKind::Precondition,
    }
}

fn kind_of_format(err: &FormatError) -> ErrorKind {
    match err {
        FormatError::Json { .. } => ErrorKind::Parse,
        FormatError::Algebra(e) => kind_of_algebra(e),
        FormatError::Linalg(e) => kind_of_linalg(e),
        FormatError::Amalgam(e) => kind_of_amalgam(e),
        FormatError::Derivation(e) => kind_of_derivation(e),
        _ => ErrorKind::Precondition,
    }
}

macro_rules! impl_from_error {
    ($ty:ty, $kind_fn:ident) => {
        impl From<$ty> for CliError {
            fn from(err: $ty) -> CliError {
                CliError {
                    kind: $kind_fn(&err),
                    message: err.to_string(),
                }
            }
        }
    };
}

impl_from_error!(FormatError, kind_of_format);
impl_from_error!(AlgebraError, kind_of_algebra);
impl_from_error!(StrongError, kind_of_strong);
impl_from_error!(AmalgamError, kind_of_amalgam);
impl_from_error!(DerivationError, kind_of_derivation);
impl_from_error!(CoverError, kind_of_cover);
impl_from_error!(LinalgError, kind_of_linalg);

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> CliError {
        CliError {
            kind: ErrorKind::Parse,
            message: err.to_string(),
        }
    }
}

/// Shared run configuration, mirroring the flags.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub p: u32,
    pub cap_enum: usize,
    pub cap_ambient: usize,
    pub seed: u64,
}

impl RunOptions {
    pub fn parameters(&self) -> Parameters {
        Parameters {
            p: self.p,
            cap_enum: self.cap_enum,
            cap_ambient: self.cap_ambient,
            seed: self.seed,
        }
    }

    pub fn driver_caps(&self) -> DriverCaps {
        DriverCaps {
            enum_cap: self.cap_enum,
            ..DriverCaps::default()
        }
    }
}

fn read_input(report: &mut Report, path: &str) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError {
            kind: ErrorKind::Parse,
            message: format!("cannot read {path}: {e}"),
        })?;
    report.record_input(path, text.as_bytes());
    Ok(text)
}

fn check_modulus(file_p: u32, opts: &RunOptions) -> Result<(), CliError> {
    if file_p != opts.p {
        return Err(CliError::precondition(format!(
            "input uses modulus {file_p} but the run is configured for --p {}",
            opts.p
        )));
    }
    Ok(())
}

pub fn subspace_json(s: &Subspace) -> serde_json::Value {
    json!(s.basis_rows())
}

fn delta_row(alg: &GradedAlgebra, name: &str, space: &Subspace) -> CheckResult {
    let delta = alg.predim(space);
    let relations = alg.relations_of(space).dim();
    CheckResult::new(format!("delta({name})"), true)
        .detail(format!(
            "dim {}, relations {relations}, delta {delta}",
            space.dim()
        ))
        .witness(json!({
            "basis": space.basis_rows(),
            "dim": space.dim(),
            "relations": relations,
            "delta": delta,
        }))
}

/// Class-K verdict plus a predimension table: the full space, the support of
/// each relation generator, and any explicitly requested spans.
pub fn cmd_check(
    command: String,
    algebra_path: &str,
    spans: &[Vec<Vec<u32>>],
    opts: &RunOptions,
) -> Result<Report, CliError> {
    let mut report = Report::new(command, opts.parameters());
    let text = read_input(&mut report, algebra_path)?;
    let file = nil2_core::parse_algebra(&text)?;
    check_modulus(file.p, opts)?;
    let alg = file.to_algebra()?;

    let verdict = alg.check_class_k(opts.cap_enum, nil2_core::DEFAULT_SCAN_CAP)?;
    let mut check = CheckResult::new("class_k", verdict.ok);
    check = match &verdict.witness {
        None => check.detail("all nonzero subspaces have delta >= 1"),
        Some(nil2_core::ClassKWitness::DecomposableRelation { v, w }) => check
            .detail("independent vectors with a vanishing bracket")
            .witness(json!({ "kind": "decomposable_relation", "v": v, "w": w })),
        Some(nil2_core::ClassKWitness::LowPredim { subspace, predim }) => check
            .detail(format!("subspace of delta {predim}"))
            .witness(json!({
                "kind": "low_predim",
                "basis": subspace.basis_rows(),
                "delta": predim,
            })),
    };
    report.push(check);

    report.push(delta_row(&alg, "full", &alg.full_space()));
    for (k, row) in alg.relations().basis_rows().into_iter().enumerate() {
        let w = nil2_core::WedgeVector::from_coeffs(alg.modulus(), alg.dim(), row);
        report.push(delta_row(&alg, &format!("supp(g{k})"), &w.support()));
    }
    for (k, rows) in spans.iter().enumerate() {
        for v in rows {
            if v.len() != alg.dim() {
                return Err(CliError::precondition(format!(
                    "requested span {k} has a vector of length {}, expected {}",
                    v.len(),
                    alg.dim()
                )));
            }
        }
        let span = Subspace::span(alg.modulus(), alg.dim(), rows)?;
        report.push(delta_row(&alg, &format!("span{k}"), &span));
    }
    Ok(report)
}

/// Replays the growth script, then extends the problem's map over its target
/// inside the replayed workspace. Reports the resulting derivation table, the
/// per-step route trace, and strongness certificates.
pub fn cmd_extend(
    command: String,
    script_path: &str,
    problem_path: &str,
    opts: &RunOptions,
) -> Result<Report, CliError> {
    let mut report = Report::new(command, opts.parameters());
    let script_text = read_input(&mut report, script_path)?;
    let problem_text = read_input(&mut report, problem_path)?;
    let script = nil2_core::parse_script(&script_text)?;
    let problem_file = nil2_core::parse_problem(&problem_text)?;
    check_modulus(script.p, opts)?;
    check_modulus(problem_file.algebra.p, opts)?;

    let mut ws = script.replay(
        opts.cap_ambient,
        opts.cap_enum,
        nil2_core::DEFAULT_SCAN_CAP,
    )?;
    let problem = problem_file.to_problem(opts.cap_enum)?;
    if problem.algebra() != ws.algebra() {
        return Err(CliError::precondition(
            "problem algebra does not match the replayed workspace",
        ));
    }

    let requested = problem.target().clone();
    let caps = opts.driver_caps();
    let (g, trace) = extend_derivation_traced(&mut ws, problem.map(), &requested, &caps)?;

    report.push(
        CheckResult::new("derivation_table", true)
            .detail(format!(
                "domain dimension {}, image dimension {}",
                g.domain().dim(),
                g.image_space().dim()
            ))
            .witness(json!(g.pairs())),
    );
    let trace_strings: Vec<String> = trace.iter().map(|e| e.to_string()).collect();
    report.push(
        CheckResult::new("case_trace", true)
            .detail(if trace_strings.is_empty() {
                "no steps needed".to_owned()
            } else {
                trace_strings.join(", ")
            })
            .witness(json!(trace_strings)),
    );

    let full = ws.full_space();
    let dom_report = nil2_core::is_strong(ws.algebra(), g.domain(), &full, opts.cap_enum)?;
    let mut check = CheckResult::new("domain_strong", dom_report.strong);
    if let Some((violator, predim)) = &dom_report.violator {
        check = check.witness(json!({
            "violator": violator.basis_rows(),
            "delta": predim,
        }));
    }
    report.push(check);

    let augmented = g.domain().sum(&g.image_space())?;
    let aug_report = nil2_core::is_strong(ws.algebra(), &augmented, &full, opts.cap_enum)?;
    let mut check = CheckResult::new("domain_plus_image_strong", aug_report.strong);
    if let Some((violator, predim)) = &aug_report.violator {
        check = check.witness(json!({
            "violator": violator.basis_rows(),
            "delta": predim,
        }));
    }
    report.push(check);

    let valid = g.validate()?;
    report.push(CheckResult::new("derivation_valid", valid.ok));
    let padded = requested.pad_to(ws.dim());
    report.push(CheckResult::new(
        "domain_contains_requested",
        padded.is_subspace_of(g.domain()),
    ));
    let ws_class = ws
        .algebra()
        .check_class_k(opts.cap_enum, nil2_core::DEFAULT_SCAN_CAP)?;
    report.push(CheckResult::new("workspace_class_k", ws_class.ok));
    report.push(
        CheckResult::new("workspace", true)
            .detail(format!(
                "ambient dimension {}, growth steps {}",
                ws.dim(),
                ws.history().len()
            ))
            .witness(json!({
                "dim": ws.dim(),
                "growth_steps": ws.history().len(),
            })),
    );
    Ok(report)
}

/// Replays the growth script and runs each experiment from the script file
/// against the resulting workspace.
pub fn cmd_cover(
    command: String,
    script_path: &str,
    experiment_path: &str,
    opts: &RunOptions,
) -> Result<Report, CliError> {
    let mut report = Report::new(command, opts.parameters());
    let script_text = read_input(&mut report, script_path)?;
    let experiment_text = read_input(&mut report, experiment_path)?;
    let script = nil2_core::parse_script(&script_text)?;
    let experiments = nil2_core::parse_experiment(&experiment_text)?;
    check_modulus(script.p, opts)?;

    let ws = script.replay(
        opts.cap_ambient,
        opts.cap_enum,
        nil2_core::DEFAULT_SCAN_CAP,
    )?;
    for (index, experiment) in experiments.experiments.iter().enumerate() {
        let checks = experiments::run_experiment(&ws, index, experiment, experiments.seed, opts)?;
        for check in checks {
            report.push(check);
        }
    }
    Ok(report)
}
