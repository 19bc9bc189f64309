//! `psskit`: verify families, check structural conditions, build immersions,
//! emit certificates and reconstruct surfaces from the command line.
//!
//! Exit status: 0 when every requested check passes, 1 when a check fails,
//! 2 for configuration errors, 3 for I/O errors.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use psskit::families::{FamilyKind, ScalarConfig, ScalarValue};
use serde_json::json;

use config::{CertifyOptions, CommandName, FamilySpec, ImmerseOptions, ReconstructOptions, RunConfig, Solution, Tolerances};

/// Report layout version, bumped when fields change meaning.
const REPORT_VERSION: u32 = 1;

#[derive(Debug)]
pub enum Failure {
    Check(String),
    Config(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Check(m) => write!(f, "check failed: {m}"),
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<psskit::Error> for Failure {
    fn from(e: psskit::Error) -> Self {
        use psskit::Error as E;
        match e {
            E::Syntax { .. } | E::UnknownSymbol { .. } | E::SumDenominator(_) | E::InvalidPde(_) | E::Validation(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "psskit", version, about = "Checks for third-order PDEs describing pseudospherical surfaces")]
struct Cli {
    /// Directory receiving the report and any exported files.
    #[arg(long, global = true, default_value = "psskit-out")]
    out: PathBuf,
    /// Seed for randomized sampling, recorded in the report.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct FamilyArgs {
    /// Preset such as `t22-default` or `t24-default-minus`, or a TOML/JSON file.
    #[arg(long, conflicts_with = "kind")]
    family: Option<String>,
    /// Family kind, starting from its default parameters.
    #[arg(long)]
    kind: Option<FamilyKind>,
    /// Sign branch ε, used with --kind.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    sign: i8,
    #[arg(long, allow_negative_numbers = true)]
    mu2: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    mu3: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    eta2: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    eta3: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    c2: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<String>,
}

impl FamilyArgs {
    fn overrides(&self) -> ScalarConfig {
        let v = |s: &Option<String>| s.clone().map(ScalarValue::Text);
        ScalarConfig {
            mu2: v(&self.mu2),
            mu3: v(&self.mu3),
            eta2: v(&self.eta2),
            eta3: v(&self.eta3),
            lambda: v(&self.lambda),
            c1: v(&self.c1),
            c2: v(&self.c2),
            theta: v(&self.theta),
            nu: v(&self.nu),
            sigma: v(&self.sigma),
            tau: v(&self.tau),
            eta: v(&self.eta),
        }
    }

    fn spec(&self) -> Result<Option<FamilySpec>, Failure> {
        let overrides = self.overrides();
        match (&self.family, self.kind) {
            (Some(f), _) => {
                if overrides != ScalarConfig::default() {
                    return Err(Failure::Config("scalar overrides need --kind, not --family".into()));
                }
                config::family_spec(f).map(Some)
            }
            (None, Some(kind)) => Ok(Some(FamilySpec::Inline(config::family_from_kind(kind, self.sign, &overrides)))),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Args, Debug)]
struct TolArgs {
    /// ODE tolerance.
    #[arg(long, default_value_t = Tolerances::default().ode)]
    ode_tol: f64,
    /// Gauss-equation tolerance.
    #[arg(long, default_value_t = Tolerances::default().gauss)]
    gauss_tol: f64,
    /// Codazzi tolerance.
    #[arg(long, default_value_t = Tolerances::default().codazzi)]
    codazzi_tol: f64,
    /// Frame drift tolerance.
    #[arg(long, default_value_t = Tolerances::default().drift)]
    drift_tol: f64,
}

impl TolArgs {
    fn get(&self) -> Tolerances {
        Tolerances {
            ode: self.ode_tol,
            gauss: self.gauss_tol,
            codazzi: self.codazzi_tol,
            drift: self.drift_tol,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the structure equations of a family exactly.
    Verify {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Check the structural conditions on the 1-forms.
    Lemma21 {
        #[command(flatten)]
        family: FamilyArgs,
        /// Constant δ; solved from the forms when absent.
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<String>,
    },
    /// Find the family containing the generalized Camassa-Holm equation.
    MatchCh,
    /// Build a second fundamental form and check Gauss and Codazzi.
    Immerse {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        case: Option<String>,
        #[arg(long, default_value_t = 2.5, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        beta: f64,
        /// Sign of the square root in `a`.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        root: i8,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        b0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        xi0: f64,
        #[arg(long, num_args = 2, default_values_t = [0.0, 1.0], allow_negative_numbers = true)]
        xi_range: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Emit the obstruction certificate of a family, or sweep random ones.
    Certify {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Integrate the moving frame over a concrete solution and export a mesh.
    Reconstruct {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value = "sg-kink")]
        solution: SolutionArg,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, num_args = 3, default_values_t = [0.1, 0.05, 0.0], allow_negative_numbers = true)]
        initial: Vec<f64>,
        #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        #[arg(long, default_value_t = 101)]
        n: usize,
        #[arg(long)]
        case: Option<String>,
        #[arg(long, default_value_t = 2.5, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long)]
        reorthonormalize: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Re-run a config file, or the config embedded in a previous report.
    Run { config: PathBuf },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum SolutionArg {
    SgKink,
    TravelingWave,
}

fn build_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.command {
        Command::Run { config } => config::load_run_config(config)?,
        Command::Verify { family } => with_family(CommandName::Verify, family)?,
        Command::Lemma21 { family, delta } => {
            let mut c = with_family(CommandName::Lemma21, family)?;
            c.delta = delta.clone();
            c
        }
        Command::MatchCh => RunConfig::new(CommandName::MatchCh),
        Command::Immerse {
            family,
            case,
            alpha,
            beta,
            root,
            b0,
            xi0,
            xi_range,
            points,
            tol,
        } => {
            let mut c = with_family(CommandName::Immerse, family)?;
            c.tolerances = tol.get();
            c.immerse = Some(ImmerseOptions {
                case: case.clone(),
                alpha: *alpha,
                beta: *beta,
                root: *root,
                b0: *b0,
                xi0: *xi0,
                xi_range: [xi_range[0], xi_range[1]],
                points: *points,
                ..ImmerseOptions::default()
            });
            c
        }
        Command::Certify { family, sweep } => {
            let mut c = with_family(CommandName::Certify, family)?;
            c.certify = Some(CertifyOptions { sweep: *sweep });
            c
        }
        Command::Reconstruct {
            family,
            solution,
            a,
            c: speed,
            initial,
            x0,
            t0,
            h,
            n,
            case,
            alpha,
            beta,
            reorthonormalize,
            tol,
        } => {
            let mut c = with_family(CommandName::Reconstruct, family)?;
            c.tolerances = tol.get();
            c.reconstruct = Some(ReconstructOptions {
                solution: match solution {
                    SolutionArg::SgKink => Solution::SgKink,
                    SolutionArg::TravelingWave => Solution::TravelingWave,
                },
                a: *a,
                c: *speed,
                initial: [initial[0], initial[1], initial[2]],
                x0: *x0,
                t0: *t0,
                h: *h,
                n: *n,
                case: case.clone(),
                alpha: *alpha,
                beta: *beta,
                reorthonormalize: *reorthonormalize,
                ..ReconstructOptions::default()
            });
            c
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn with_family(command: CommandName, family: &FamilyArgs) -> Result<RunConfig, Failure> {
    let mut c = RunConfig::new(command);
    c.family = family.spec()?;
    Ok(c)
}

/// `PSSKIT_THREADS` caps the global rayon pool.
fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("PSSKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config(format!("PSSKIT_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    configure_threads()?;
    let mut cfg = build_config(cli)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let outcome = commands::run(&mut cfg)?;
    let elapsed = clock.elapsed();
    std::fs::create_dir_all(&cli.out).map_err(|e| Failure::Io(format!("{}: {e}", cli.out.display())))?;
    for (name, contents) in &outcome.files {
        write(&cli.out, name, contents)?;
    }
    let name = cfg.command.as_str();
    let report = json!({
        "report_version": REPORT_VERSION,
        "command": name,
        "version": psskit::VERSION,
        "seed": cfg.seed,
        "config": cfg,
        "passed": outcome.passed,
        "summary": outcome.summary,
        "result": outcome.result,
        "files": outcome.files.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        "timing": { "started_unix": started, "elapsed_ms": elapsed.as_millis() as u64 },
    });
    let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
    write(&cli.out, &format!("{name}.json"), &text)?;
    println!("{}: {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.summary);
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("psskit: {f}");
            ExitCode::from(f.code())
        }
    }
}
