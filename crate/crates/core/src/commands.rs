//! Command implementations behind the `cubalg` binary.
//!
//! Every command takes the algebra file's text and returns a JSON
//! [`RunReport`] plus an exit status. Reports contain no timing or
//! environment data, so identical inputs give byte-identical output.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::algebra::{check_structure, StructureReport, Vector};
use crate::algebra::{cubic_from_algebra, BilinearForm, MetrisedAlgebra};
use crate::calculus::{fd_check, FdReport, FD_STEP};
use crate::io::{parse_vector, AlgebraDocument, ParseError};
use crate::peirce::{decide_decomposable, peirce_report, Cluster, SubalgebraCheck, Verdict};
use crate::search::{demonstrate_oddness_gap, find_idempotents, restart_point, SearchConfig};
use crate::zoo::{counterexample_cubic, make_hadamard, random_cubic, CounterexampleParams};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Inconclusive = 1,
    InputError = 2,
    Internal = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum State {
    Ok,
    Inconclusive,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Status {
    pub state: State,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport<T: Serialize> {
    pub command: String,
    pub input_digest: String,
    pub config: SearchConfig,
    pub status: Status,
    pub results: Option<T>,
}

/// Rendered report and the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub text: String,
    pub exit: ExitStatus,
}

pub fn digest(input: &str) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(input.as_bytes())))
}

fn render<T: Serialize>(
    command: &str,
    input: &str,
    cfg: &SearchConfig,
    state: State,
    message: impl Into<String>,
    results: Option<T>,
) -> String {
    let report = RunReport {
        command: command.to_string(),
        input_digest: digest(input),
        config: cfg.clone(),
        status: Status {
            state,
            message: message.into(),
        },
        results,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    text
}

fn failure(
    command: &str,
    input: &str,
    cfg: &SearchConfig,
    exit: ExitStatus,
    msg: String,
) -> CommandOutput {
    CommandOutput {
        text: render::<()>(command, input, cfg, State::Error, msg, None),
        exit,
    }
}

fn load(command: &str, input: &str, cfg: &SearchConfig) -> Result<MetrisedAlgebra, CommandOutput> {
    cfg.validate()
        .map_err(|e| failure(command, input, cfg, ExitStatus::InputError, e.to_string()))?;
    AlgebraDocument::parse(input)
        .and_then(|d| Ok(d.algebra()?))
        .map_err(|e| failure(command, input, cfg, ExitStatus::InputError, e.to_string()))
}

fn vector_arg(
    command: &str,
    input: &str,
    cfg: &SearchConfig,
    a: &MetrisedAlgebra,
    raw: &str,
) -> Result<Vector, CommandOutput> {
    let v = parse_vector(raw).map_err(|e: ParseError| {
        failure(command, input, cfg, ExitStatus::InputError, e.to_string())
    })?;
    if v.len() != a.dim() {
        return Err(failure(
            command,
            input,
            cfg,
            ExitStatus::InputError,
            format!(
                "vector has {} components, algebra has dimension {}",
                v.len(),
                a.dim()
            ),
        ));
    }
    Ok(v)
}

/// Deterministic nonzero probe point for derivative checks.
fn probe_point(a: &MetrisedAlgebra, seed: u64) -> Vector {
    a.form().from_orthonormal(&restart_point(a.dim(), seed, 0))
}

#[derive(Debug, Serialize)]
struct CheckResults {
    structure: StructureReport,
    fd_point: Vec<f64>,
    fd: FdReport,
}

pub fn cmd_check(input: &str, cfg: &SearchConfig) -> CommandOutput {
    const CMD: &str = "check";
    let a = match load(CMD, input, cfg) {
        Ok(a) => a,
        Err(out) => return out,
    };
    let structure = check_structure(&a);
    let x = probe_point(&a, cfg.seed);
    let fd = match fd_check(&a, &x, FD_STEP) {
        Ok(r) => r,
        Err(e) => return failure(CMD, input, cfg, ExitStatus::Internal, e.to_string()),
    };
    let (state, exit, msg) = if !structure.pass {
        (
            State::Error,
            ExitStatus::InputError,
            "structure check failed",
        )
    } else if !fd.pass {
        (
            State::Error,
            ExitStatus::Internal,
            "derivative check failed",
        )
    } else {
        (State::Ok, ExitStatus::Ok, "all checks passed")
    };
    let results = CheckResults {
        structure,
        fd_point: x.iter().copied().collect(),
        fd,
    };
    CommandOutput {
        text: render(CMD, input, cfg, state, msg, Some(results)),
        exit,
    }
}

pub fn cmd_fd_check(input: &str, cfg: &SearchConfig, h: f64, point: Option<&str>) -> CommandOutput {
    const CMD: &str = "fd-check";
    let a = match load(CMD, input, cfg) {
        Ok(a) => a,
        Err(out) => return out,
    };
    let x = match point {
        Some(raw) => match vector_arg(CMD, input, cfg, &a, raw) {
            Ok(v) => v,
            Err(out) => return out,
        },
        None => probe_point(&a, cfg.seed),
    };
    match fd_check(&a, &x, h) {
        Ok(fd) => {
            let (state, exit, msg) = if fd.pass {
                (State::Ok, ExitStatus::Ok, "derivatives agree")
            } else {
                (
                    State::Error,
                    ExitStatus::Internal,
                    "derivative check failed",
                )
            };
            let results = CheckResults {
                structure: check_structure(&a),
                fd_point: x.iter().copied().collect(),
                fd,
            };
            CommandOutput {
                text: render(CMD, input, cfg, state, msg, Some(results)),
                exit,
            }
        }
        Err(e) => failure(CMD, input, cfg, ExitStatus::InputError, e.to_string()),
    }
}

pub fn cmd_idempotents(input: &str, cfg: &SearchConfig) -> CommandOutput {
    const CMD: &str = "idempotents";
    let a = match load(CMD, input, cfg) {
        Ok(a) => a,
        Err(out) => return out,
    };
    match find_idempotents(&a, cfg) {
        Ok(found) => {
            let (state, exit) =
                if a.is_zero() || !found.idempotents.is_empty() || !found.nil_squares.is_empty() {
                    (State::Ok, ExitStatus::Ok)
                } else {
                    (State::Inconclusive, ExitStatus::Inconclusive)
                };
            let msg = found.status.clone();
            CommandOutput {
                text: render(CMD, input, cfg, state, msg, Some(found)),
                exit,
            }
        }
        Err(e) => failure(CMD, input, cfg, ExitStatus::Internal, e.to_string()),
    }
}

#[derive(Debug, Serialize)]
struct PeirceSummary {
    c: Vec<f64>,
    eigenvalues: Vec<Cluster>,
    tol_eig: f64,
    dim_v1: usize,
    v1_basis: Vec<Vec<f64>>,
    subalgebra: SubalgebraCheck,
}

pub fn cmd_peirce(input: &str, cfg: &SearchConfig, c: &str) -> CommandOutput {
    const CMD: &str = "peirce";
    let a = match load(CMD, input, cfg) {
        Ok(a) => a,
        Err(out) => return out,
    };
    let c = match vector_arg(CMD, input, cfg, &a, c) {
        Ok(v) => v,
        Err(out) => return out,
    };
    match peirce_report(&a, &c, cfg) {
        Ok(r) => {
            let summary = PeirceSummary {
                c: r.c,
                eigenvalues: r.eigenvalues,
                tol_eig: r.tol_eig,
                dim_v1: r.dim_v1,
                v1_basis: r.v1_basis,
                subalgebra: r.subalgebra,
            };
            CommandOutput {
                text: render(CMD, input, cfg, State::Ok, "ok", Some(summary)),
                exit: ExitStatus::Ok,
            }
        }
        Err(e) => failure(CMD, input, cfg, ExitStatus::InputError, e.to_string()),
    }
}

pub fn cmd_decompose(input: &str, cfg: &SearchConfig, c: &str) -> CommandOutput {
    const CMD: &str = "decompose";
    let a = match load(CMD, input, cfg) {
        Ok(a) => a,
        Err(out) => return out,
    };
    let c = match vector_arg(CMD, input, cfg, &a, c) {
        Ok(v) => v,
        Err(out) => return out,
    };
    match decide_decomposable(&a, &c, cfg) {
        Ok(r) => {
            let (state, exit) = match r.verdict {
                Verdict::Inconclusive => (State::Inconclusive, ExitStatus::Inconclusive),
                _ => (State::Ok, ExitStatus::Ok),
            };
            let msg = r
                .diagnostic
                .clone()
                .unwrap_or_else(|| r.verdict.as_str().to_string());
            CommandOutput {
                text: render(CMD, input, cfg, state, msg, Some(r)),
                exit,
            }
        }
        Err(e) => failure(CMD, input, cfg, ExitStatus::InputError, e.to_string()),
    }
}

pub fn cmd_gap_demo(input: &str, cfg: &SearchConfig) -> CommandOutput {
    const CMD: &str = "gap-demo";
    let a = match load(CMD, input, cfg) {
        Ok(a) => a,
        Err(out) => return out,
    };
    match demonstrate_oddness_gap(&a, cfg) {
        Ok(g) => {
            let msg = if g.anti_collinear {
                "max/min pair is anti-collinear"
            } else {
                "max/min pair is not anti-collinear"
            };
            CommandOutput {
                text: render(CMD, input, cfg, State::Ok, msg, Some(g)),
                exit: ExitStatus::Ok,
            }
        }
        Err(e) => failure(CMD, input, cfg, ExitStatus::InputError, e.to_string()),
    }
}

/// Generator families for `generate`.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `a = None` selects the default coefficients.
    Counterexample {
        n: usize,
        a: Option<Vec<f64>>,
    },
    Hadamard {
        n: usize,
    },
    Random {
        n: usize,
        seed: u64,
        scale: f64,
    },
}

/// Emits an algebra file for one of the reference families.
pub fn cmd_generate(family: &Family) -> Result<String, crate::error::AlgebraError> {
    let doc = match family {
        Family::Counterexample { n, a } => {
            let p = match a {
                Some(a) => CounterexampleParams::new(*n, a.clone())?,
                None => CounterexampleParams::with_defaults(*n)?,
            };
            AlgebraDocument::from_cubic(counterexample_cubic(&p), BilinearForm::identity(*n)?)
        }
        Family::Hadamard { n } => {
            let a = make_hadamard(*n)?;
            AlgebraDocument::from_cubic(cubic_from_algebra(&a), BilinearForm::identity(*n)?)
        }
        Family::Random { n, seed, scale } => {
            if *n == 0 {
                return Err(crate::error::AlgebraError::InvalidParams(
                    "n must be at least 1".into(),
                ));
            }
            AlgebraDocument::from_cubic(
                random_cubic(*n, *seed, *scale)?,
                BilinearForm::identity(*n)?,
            )
        }
    };
    doc.map(|d| d.to_text()).map_err(|e| match e {
        ParseError::Algebra(a) => a,
        other => crate::error::AlgebraError::InvalidParams(other.to_string()),
    })
}
