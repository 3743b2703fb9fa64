use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kdvlab::cli::{self, AsymptoteArgs, RhpArgs, ValidateArgs, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "kdvlab", version, about = "Scattering, Riemann-Hilbert checks and soliton asymptotics for KdV step data")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute scattering data for a potential.
    Scatter {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate the multisoliton profile with region tags.
    Asymptote {
        #[arg(long)]
        scatter: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
    /// Integrate KdV directly from the configured initial datum.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
    /// Compare an oracle field with the asymptotic field.
    Validate {
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long)]
        asymptotic: PathBuf,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 4)]
        m0: u32,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Only check artifact schema versions.
        #[arg(long)]
        schema_check: bool,
    },
    /// Jump-matrix decay, model algebra and small-k checks.
    Rhpcheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scatter: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[arg(long)]
        schema_check: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = std::env::var("KDVLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: KDVLAB_THREADS: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    }
    let args = Args::parse();
    let result = match &args.command {
        Command::Scatter { config, out } => cli::cmd_scatter(config, out),
        Command::Asymptote { scatter, config, out, beta, eps, times } => cli::cmd_asymptote(AsymptoteArgs {
            scatter,
            config,
            out,
            beta: *beta,
            eps: *eps,
            times: times.clone(),
        }),
        Command::Evolve { config, out, times } => cli::cmd_evolve(config, out, times.clone()),
        Command::Validate { oracle, asymptotic, c, beta, m0, out, schema_check } => {
            cli::cmd_validate(ValidateArgs {
                oracle,
                asymptotic,
                out,
                c: *c,
                beta: *beta,
                m0: *m0,
                schema_check: *schema_check,
            })
        }
        Command::Rhpcheck { config, scatter, out, j, beta, eps, times, schema_check } => cli::cmd_rhpcheck(RhpArgs {
            config,
            scatter,
            out,
            j: *j,
            beta: *beta,
            eps: *eps,
            times: times.clone(),
            schema_check: *schema_check,
        }),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
