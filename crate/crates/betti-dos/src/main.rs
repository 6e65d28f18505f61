use betti_dos::complex::Metric;
use betti_dos::dos::{InterpolationMode, Protocol};
use betti_dos::pipeline::{
    self, CircuitVariant, EvolutionChoice, PipelineError, RunConfig, ScopeChoice,
};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "betti-dos",
    version,
    about = "Betti numbers via density-of-states estimation of combinatorial Laplacians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Config file plus overrides; any flag given here wins over the file.
#[derive(Args)]
struct RunArgs {
    /// Structured run config, TOML or JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Explicit complex JSON input.
    #[arg(long)]
    complex: Option<PathBuf>,
    /// Point-cloud CSV input.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Homology order k.
    #[arg(long)]
    k: Option<usize>,
    /// Filtration scale for point-cloud input.
    #[arg(long)]
    epsilon: Option<f64>,
    /// euclidean | manhattan | chebyshev
    #[arg(long)]
    metric: Option<Metric>,
    /// mirror | swap | exact
    #[arg(long)]
    protocol: Option<Protocol>,
    /// all | complex-only
    #[arg(long)]
    scope: Option<ScopeChoice>,
    /// cartan | trotter | dense
    #[arg(long)]
    evolution: Option<EvolutionChoice>,
    #[arg(long)]
    trotter_steps: Option<usize>,
    /// Shots per overlap circuit.
    #[arg(long)]
    shots: Option<u64>,
    /// Depolarizing rate after one-qubit gates.
    #[arg(long)]
    noise_p1: Option<f64>,
    /// Depolarizing rate after two-qubit gates.
    #[arg(long)]
    noise_p2: Option<f64>,
    /// Sampling-rate override.
    #[arg(long)]
    f_s: Option<usize>,
    /// Number of fundamental periods to sample.
    #[arg(long)]
    period_multiplier: Option<usize>,
    /// trig | spline
    #[arg(long)]
    interpolation: Option<InterpolationMode>,
    /// Master seed for every random choice.
    #[arg(long)]
    seed: Option<u64>,
    /// Artifact directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, PipelineError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($field:ident) => {
                if let Some(value) = self.$field {
                    config.$field = Some(value);
                }
            };
            ($field:ident, direct) => {
                if let Some(value) = self.$field {
                    config.$field = value;
                }
            };
        }
        set!(complex);
        set!(points);
        set!(epsilon);
        set!(f_s);
        set!(k, direct);
        set!(metric, direct);
        set!(protocol, direct);
        set!(scope, direct);
        set!(evolution, direct);
        set!(trotter_steps, direct);
        set!(shots, direct);
        set!(noise_p1, direct);
        set!(noise_p2, direct);
        set!(period_multiplier, direct);
        set!(interpolation, direct);
        set!(seed, direct);
        set!(out);
        if config.out.is_none() {
            config.out = Some(PathBuf::from("out"));
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: complex, operator, compilation, sampling, rank, Betti.
    Analyze(RunArgs),
    /// Exact simplex-block diagonalization of the configured operator.
    Oracle(RunArgs),
    /// Frame compilation only; writes cartan.json.
    Cartan(RunArgs),
    /// OpenQASM export of evolution and interferometer circuits.
    ExportCircuits {
        #[command(flatten)]
        run: Box<RunArgs>,
        /// Sampled time indices to export (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "0")]
        times: Vec<usize>,
        /// Target basis mask.
        #[arg(long, default_value_t = 0)]
        target: u32,
        /// Interferometer legs: hot, plus, cross (default all).
        #[arg(long, value_delimiter = ',')]
        variant: Vec<CircuitVariant>,
    },
    /// Mean closure-dimension table over all clique complexes on n vertices.
    ScanLieDims {
        /// Vertex count (exhaustive scan, n <= 5).
        #[arg(long)]
        n: usize,
        /// Output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Closure safety cap.
        #[arg(long, default_value_t = 4096)]
        cap: usize,
    },
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Analyze(args) => {
            let config = args.into_config()?;
            let report = pipeline::analyze(&config)?;
            println!(
                "beta_{} = {}  (rank_c0 {:.4}, rank_sum {:.4}, |S_k| {})",
                config.k,
                report.betti.beta,
                report.betti.rank_c0,
                report.betti.rank_sum,
                report.betti.s_k
            );
            if let Some(oracle) = &report.oracle {
                println!(
                    "oracle: beta = {}, rank = {}, max trace bias {:.3e}",
                    oracle.betti, oracle.rank, oracle.trace_bias_max
                );
            }
            println!("artifacts: {}", config.out.as_ref().unwrap().display());
            Ok(())
        }
        Command::Oracle(args) => {
            let config = args.into_config()?;
            let report = pipeline::oracle(&config)?;
            println!(
                "beta_{} = {}  (rank {}, |S_k| {})",
                report.k, report.betti, report.rank, report.s_k
            );
            println!(
                "block eigenvalues: {}",
                report
                    .block_eigenvalues
                    .iter()
                    .map(|v| format!("{v:.6}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            println!(
                "artifacts: {}",
                config.out.as_ref().unwrap().join("oracle.json").display()
            );
            Ok(())
        }
        Command::Cartan(args) => {
            let config = args.into_config()?;
            let result = pipeline::compile_cartan(&config)?;
            println!(
                "core terms {} ({} non-identity), residual {:.3e}, iterations {}, restarts {}",
                result.h_sum.len(),
                result.h_sum.non_identity_len(),
                result.residual,
                result.iterations,
                result.restarts_used
            );
            println!(
                "artifacts: {}",
                config.out.as_ref().unwrap().join("cartan.json").display()
            );
            Ok(())
        }
        Command::ExportCircuits {
            run,
            times,
            target,
            variant,
        } => {
            let config = run.into_config()?;
            let variants = if variant.is_empty() {
                CircuitVariant::ALL.to_vec()
            } else {
                variant
            };
            let written = pipeline::export_circuits(&config, &times, target, &variants)?;
            println!(
                "wrote {} circuits to {}",
                written.len(),
                config.out.as_ref().unwrap().display()
            );
            Ok(())
        }
        Command::ScanLieDims { n, out, cap } => {
            let table = pipeline::scan_table(n, cap)?;
            let path = out.unwrap_or_else(|| PathBuf::from(format!("lie_dims_n{n}.csv")));
            std::fs::write(&path, &table).map_err(|err| PipelineError {
                stage: "io",
                message: err.to_string(),
            })?;
            println!("wrote {} rows to {}", table.lines().count() - 1, path.display());
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(2);
    }
}
