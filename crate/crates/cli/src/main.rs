mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lyapnorm::bounds::TPath;
use lyapnorm::Mode;

use commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "lyapnorm", version, about = "Lyapounov normal forms, bound ledgers and orbit validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalize a model and write normalform.json.
    Normalize(NormalizeArgs),
    /// Compare every computed norm with its estimate; writes ledger.csv and certificate.json.
    Certify(CertifyArgs),
    /// Integrate a Lyapounov orbit and compare it with the synthesized one.
    Orbit(OrbitArgs),
    /// Run the randomized Cauchy suite and the combinatorial checks.
    Verify(VerifyArgs),
    /// Turn a real (q, p) Hamiltonian into a model file in complex variables.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Model file (JSON).
    #[arg(long = "in")]
    input: PathBuf,
    /// thm1, thm2 or birkhoff; overrides the model file.
    #[arg(long)]
    mode: Option<Mode>,
    /// Polydisk radii, comma separated; overrides the model file.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct NormalizeOpts {
    /// Normalization order; the last normal-form term has degree order + 2.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    order: u32,
    /// Truncation degree of the transformed Hamiltonian (default order + 4).
    #[arg(long)]
    trunc: Option<usize>,
    /// Relative threshold below which tail coefficients are dropped.
    #[arg(long, default_value_t = 0.0)]
    prune: f64,
}

#[derive(Debug, Args)]
struct NormalizeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    opts: NormalizeOpts,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    opts: NormalizeOpts,
    /// Domain-loss budget, 0 < d < 1/2.
    #[arg(long, default_value_t = 0.25)]
    d: f64,
    /// How T_{r,s} is evaluated: definition, exact or closed.
    #[arg(long = "t-path", default_value = "exact", value_parser = parse_t_path)]
    t_path: TPath,
}

#[derive(Debug, Args)]
struct OrbitArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    opts: NormalizeOpts,
    /// Target modulus |x1(0)| of the initial state.
    #[arg(long, default_value_t = 0.01)]
    amplitude: f64,
    /// RK4 step.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Lowest order of the sweep; defaults to --order (no sweep).
    #[arg(long = "from-order")]
    from_order: Option<u32>,
    /// Keep every n-th step in orbit.csv.
    #[arg(long = "store-every", default_value_t = 10)]
    store_every: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Model file; the built-in two-oscillator model when omitted.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Domain-loss budget used by the T checks.
    #[arg(long, default_value_t = 0.25)]
    d: f64,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// Real Hamiltonian file: {"hamiltonian": "...", "mode"?, "radii"?} with q in the x slots and p in the y slots.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    mode: Option<Mode>,
}

fn parse_t_path(s: &str) -> Result<TPath, String> {
    match s {
        "definition" => Ok(TPath::Definition),
        "exact" => Ok(TPath::Exact),
        "closed" => Ok(TPath::Closed),
        other => Err(format!("unknown T path '{other}' (expected definition, exact or closed)")),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LYAPNORM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("LYAPNORM_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Normalize(a) => commands::normalize(&a),
        Command::Certify(a) => commands::certify(&a),
        Command::Orbit(a) => commands::orbit(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Convert(a) => commands::convert(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
