use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cubalg::commands::{self, CommandOutput, ExitStatus, Family};
use cubalg::io::parse_vector;
use cubalg::SearchConfig;

#[derive(Parser)]
#[command(
    name = "cubalg",
    version,
    about = "Idempotents and Peirce decompositions of cubic-form algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SearchFlags {
    #[arg(long, default_value_t = 200)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol_stat: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_idem: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_eig: f64,
    #[arg(long, default_value_t = 1e-5)]
    dedup_radius: f64,
}

impl From<SearchFlags> for SearchConfig {
    fn from(f: SearchFlags) -> Self {
        SearchConfig {
            restarts: f.restarts,
            seed: f.seed,
            max_iters: f.max_iters,
            tol_stat: f.tol_stat,
            tol_idem: f.tol_idem,
            tol_eig: f.tol_eig,
            dedup_radius: f.dedup_radius,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Structural invariants and derivative checks.
    Check {
        input: PathBuf,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Idempotents from the stationary points of <x, x^2> on the sphere.
    Idempotents {
        input: PathBuf,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Peirce spectrum of an idempotent.
    Peirce {
        input: PathBuf,
        /// Idempotent as comma-separated reals.
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Decide decomposability of an idempotent.
    Decompose {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Emit an algebra file for a reference family.
    Generate {
        #[command(subcommand)]
        family: FamilyCmd,
    },
    /// Compare analytic derivatives with central differences.
    FdCheck {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
        /// Evaluation point; defaults to a seeded random unit vector.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Maximizer/minimizer pair of f and whether it is anti-collinear.
    GapDemo {
        input: PathBuf,
        #[command(flatten)]
        search: SearchFlags,
    },
}

#[derive(Subcommand)]
enum FamilyCmd {
    Counterexample {
        #[arg(long)]
        n: usize,
        /// Coefficients a_2..a_n; defaults to (2k - 1) / (4n).
        #[arg(long)]
        a: Option<String>,
    },
    Hadamard {
        #[arg(long)]
        n: usize,
    },
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
}

fn read(path: &PathBuf) -> Result<String, CommandOutput> {
    std::fs::read_to_string(path).map_err(|e| CommandOutput {
        text: format!("error: cannot read {}: {e}\n", path.display()),
        exit: ExitStatus::InputError,
    })
}

fn run(cli: Cli) -> CommandOutput {
    let with_input = |path: &PathBuf, f: &dyn Fn(&str) -> CommandOutput| match read(path) {
        Ok(text) => f(&text),
        Err(out) => out,
    };
    match cli.command {
        Command::Check { input, search } => {
            with_input(&input, &|t| commands::cmd_check(t, &search.clone().into()))
        }
        Command::Idempotents { input, search } => with_input(&input, &|t| {
            commands::cmd_idempotents(t, &search.clone().into())
        }),
        Command::Peirce { input, c, search } => with_input(&input, &|t| {
            commands::cmd_peirce(t, &search.clone().into(), &c)
        }),
        Command::Decompose { input, c, search } => with_input(&input, &|t| {
            commands::cmd_decompose(t, &search.clone().into(), &c)
        }),
        Command::FdCheck {
            input,
            h,
            point,
            search,
        } => with_input(&input, &|t| {
            commands::cmd_fd_check(t, &search.clone().into(), h, point.as_deref())
        }),
        Command::GapDemo { input, search } => with_input(&input, &|t| {
            commands::cmd_gap_demo(t, &search.clone().into())
        }),
        Command::Generate { family } => {
            let family = match family {
                FamilyCmd::Counterexample { n, a } => {
                    let a = match a.as_deref().map(parse_vector).transpose() {
                        Ok(a) => a.map(|v| v.iter().copied().collect()),
                        Err(e) => {
                            return CommandOutput {
                                text: format!("error: {e}\n"),
                                exit: ExitStatus::InputError,
                            }
                        }
                    };
                    Family::Counterexample { n, a }
                }
                FamilyCmd::Hadamard { n } => Family::Hadamard { n },
                FamilyCmd::Random { n, seed, scale } => Family::Random { n, seed, scale },
            };
            match commands::cmd_generate(&family) {
                Ok(text) => CommandOutput {
                    text,
                    exit: ExitStatus::Ok,
                },
                Err(e) => CommandOutput {
                    text: format!("error: {e}\n"),
                    exit: ExitStatus::InputError,
                },
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match std::panic::catch_unwind(|| run(cli)) {
        Ok(out) => out,
        Err(_) => CommandOutput {
            text: String::new(),
            exit: ExitStatus::Internal,
        },
    };
    if out.text.starts_with("error:") {
        eprint!("{}", out.text);
    } else {
        print!("{}", out.text);
    }
    ExitCode::from(out.exit.code() as u8)
}
