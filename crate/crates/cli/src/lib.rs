//! Experiment runner: every library operation as a subcommand, writing CSV/JSON
//! artifacts and a run manifest into the output directory.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod output;
pub mod settings;

use output::{sha256_hex, FileDigest, Outputs, RunManifest};
use settings::Params;

/// Environment variable naming the output directory when `--out-dir` is absent.
pub const OUT_DIR_ENV: &str = "NDELAB_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot serialize output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NonConvergence(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ndelab", version, about = "Similarity shocks, compactons and Riemann problems for fifth-order NDEs")]
pub struct Cli {
    /// Directory for artifacts (default: $NDELAB_OUT_DIR, then the current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Flat key=value file overriding built-in defaults; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps over independent points.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Shock-profile solve settings shared by several subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct ShockArgs {
    /// nde50, nde41, nde32, nde23, nde14, uniform_div or uniform_nondiv.
    #[arg(long)]
    pub model: Option<String>,
    /// Half-length L of the truncated domain.
    #[arg(long)]
    pub domain: Option<String>,
    /// Regularization of the degenerate leading coefficient.
    #[arg(long)]
    pub nu: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    /// dirichlet or robin far-field closure.
    #[arg(long)]
    pub closure: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collocation solve of the similarity shock profile.
    SolveShock(ShockArgs),
    /// Bisection on D for the NDE50 blow-up profile.
    ShootD0 {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        zmax: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Blow-up profile of the α-family, shooting f‴(0).
    #[command(allow_negative_numbers = true)]
    BlowupProfile {
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        ymax: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Fate scan of the global similarity system over (1, −1, 0, 0, F₄).
    #[command(allow_negative_numbers = true)]
    GlobalExtensionScan {
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        ymax: Option<String>,
        #[arg(long)]
        f4_min: Option<String>,
        #[arg(long)]
        f4_max: Option<String>,
        #[arg(long)]
        f4_step: Option<String>,
        /// Instead of scanning, shoot F(0) = −1 along `diagonal` or `curvature`.
        #[arg(long)]
        shoot: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Roots of the blow-up characteristic polynomial.
    #[command(allow_negative_numbers = true)]
    CharRoots {
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Dimensions of the six asymptotic bundles.
    BundleDims {
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        c0: Option<String>,
    },
    /// Fundamental kernel of the linear fifth-order operator.
    Kernel {
        #[arg(long)]
        ymax: Option<String>,
        #[arg(long)]
        points: Option<String>,
    },
    /// Explicit compacton profile on a uniform grid.
    Compacton {
        /// k22 or q55.
        #[arg(long)]
        explicit: Option<String>,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Out-of-subspace energy of a quadratic dispersion operator.
    SubspaceCheck {
        /// Comma-separated coefficients, highest derivative first.
        #[arg(long)]
        coeffs: Option<String>,
        /// 5 or 7.
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Interface-bundle mismatch over y₀, or the third-order match.
    #[command(allow_negative_numbers = true)]
    RobustnessProbe {
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        y0_min: Option<String>,
        #[arg(long)]
        y0_max: Option<String>,
        #[arg(long)]
        y0_step: Option<String>,
        /// Run the third-order contrast F″ + cF = √F with this c instead.
        #[arg(long)]
        third_order: Option<String>,
        /// lo,hi interface bracket for the third-order match.
        #[arg(long)]
        bracket: Option<String>,
    },
    /// Oscillatory signed compacton.
    SignedCompacton {
        /// 1 or 2.
        #[arg(long)]
        branch: Option<String>,
    },
    /// L¹ distance to S₋ against |t| and its log–log slope.
    #[command(allow_negative_numbers = true)]
    ConvergenceRate {
        #[command(flatten)]
        shock: ShockArgs,
        /// Half-width l of the L¹ window.
        #[arg(long)]
        l: Option<String>,
        /// Comma-separated |t| values.
        #[arg(long)]
        times: Option<String>,
    },
    /// Shock profile reflected into the rarefaction branch.
    Reflect(ShockArgs),
    /// Jump relation residual or solutions; `?` marks a free coefficient.
    Rh {
        /// F₀⁻,…,F₄⁻.
        #[arg(long, allow_hyphen_values = true)]
        minus: Option<String>,
        /// F₀⁺,…,F₄⁺.
        #[arg(long, allow_hyphen_values = true)]
        plus: Option<String>,
        /// Values of the first free axis when two are free.
        #[arg(long, allow_hyphen_values = true)]
        sweep: Option<String>,
    },
    /// Phase-plane shock of the fifth-order-in-time equation.
    #[command(allow_negative_numbers = true)]
    T5Shock {
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
    /// δ-entropy verdict for S₋ or S₊.
    #[command(allow_negative_numbers = true)]
    EntropyTest {
        /// minus or plus.
        #[arg(long)]
        shock: Option<String>,
        #[command(flatten)]
        solve: ShockArgs,
        /// Comma-separated δ values.
        #[arg(long)]
        deltas: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SolveShock(_) => "solve-shock",
            Command::ShootD0 { .. } => "shoot-d0",
            Command::BlowupProfile { .. } => "blowup-profile",
            Command::GlobalExtensionScan { .. } => "global-extension-scan",
            Command::CharRoots { .. } => "char-roots",
            Command::BundleDims { .. } => "bundle-dims",
            Command::Kernel { .. } => "kernel",
            Command::Compacton { .. } => "compacton",
            Command::SubspaceCheck { .. } => "subspace-check",
            Command::RobustnessProbe { .. } => "robustness-probe",
            Command::SignedCompacton { .. } => "signed-compacton",
            Command::ConvergenceRate { .. } => "convergence-rate",
            Command::Reflect(_) => "reflect",
            Command::Rh { .. } => "rh",
            Command::T5Shock { .. } => "t5-shock",
            Command::EntropyTest { .. } => "entropy-test",
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Parses and runs one invocation; returns the manifest path on success.
pub fn execute(cli: &Cli) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let mut inputs = Vec::new();
    let config = match &cli.config {
        Some(path) => {
            let bytes = std::fs::read(path)?;
            inputs.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
            let text = String::from_utf8(bytes).map_err(|_| CliError::Usage("config file is not UTF-8".into()))?;
            ndelab::models::parse_key_values(&text).map_err(|e| CliError::Usage(e.to_string()))?
        }
        None => Default::default(),
    };
    let jobs = match cli.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => n,
        None => rayon::current_num_threads(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let name = cli.command.name();
    let mut params = Params::new(config);
    let mut out = Outputs::new(out_dir(cli), name)?;
    pool.install(|| commands::dispatch(&cli.command, &mut params, &mut out))?;
    let manifest = RunManifest {
        subcommand: name.to_string(),
        parameters: params.resolved.into_iter().collect(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        outputs: out.written.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    out.manifest(&manifest)
}

/// Full command-line entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(path) => {
            println!("{}", path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
