use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use fsi_schur::coupling::SchurSolver;
use fsi_schur::harness::{parse_config, run_study, StudyConfig, StudyKind};
use fsi_schur::FsiError;

const CONFIG_KEYS: &str = "\
Config keys (flat TOML, all optional):
  study          space | time | conditioning | single (must match the subcommand)
  meshes         list of subdivisions n, dx = 1/n          [2, 4, 8, 16, 32]
  dt_list        list of time steps                        [1e-5]
  T              final time, a multiple of every dt        1e-3
  rho_f, rho_s, nu_f, nu_s, lambda                          1.0
  lm_coarsening  interface multiplier coarsening factor    1
  solver         cg | pcg | direct                         pcg
  rel_tol        Krylov relative tolerance                 1e-10
  max_iter       Krylov cap, 0 = ten times the dimension   0
  fluid_neumann  fluid sides with traction data            [\"left\", \"right\"]
  solid_neumann  solid sides with traction data            []
  exact_variant  corrected | printed                       corrected
  eigen_method   auto | dense | lanczos                    auto
  output         CSV path                                  stdout

On failure a single line `error<TAB>kind=<kind>[<TAB>key=<key>]<TAB><message>`
is written to stderr and the exit status is nonzero.";

#[derive(Parser)]
#[command(
    name = "fsi-schur",
    version,
    about = "Partitioned Stokes/elasticity FSI studies",
    after_help = CONFIG_KEYS
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spatial convergence study
    Space(Args),
    /// Temporal convergence study
    Time(Args),
    /// Condition numbers and iteration counts
    Conditioning(Args),
    /// One transient run with per-step diagnostics
    Single(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Flat TOML configuration; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; overrides `output` from the config (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Schur solver; overrides `solver` from the config
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Cg,
    Pcg,
    Direct,
}

impl From<SolverArg> for SchurSolver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Cg => SchurSolver::Cg,
            SolverArg::Pcg => SchurSolver::Pcg,
            SolverArg::Direct => SchurSolver::Direct,
        }
    }
}

fn load(kind: StudyKind, args: &Args) -> Result<StudyConfig, FsiError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let has_study = text
                .parse::<toml::Table>()
                .map(|t| t.contains_key("study"))
                .unwrap_or(false);
            let c = parse_config(&text)?;
            if has_study && c.study != kind {
                return Err(FsiError::Config {
                    key: "study".into(),
                    message: format!(
                        "config says `{}` but the `{}` subcommand was used",
                        c.study.as_str(),
                        kind.as_str()
                    ),
                });
            }
            c
        }
        None => StudyConfig::default(),
    };
    config.study = kind;
    if let Some(s) = args.solver {
        config.solver = s.into();
    }
    if let Some(out) = &args.out {
        config.output = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

fn run(kind: StudyKind, args: &Args) -> Result<(), FsiError> {
    let config = load(kind, args)?;
    let start = Instant::now();
    let report = run_study(&config)?;
    eprintln!(
        "{} study finished in {:.3} s",
        kind.as_str(),
        start.elapsed().as_secs_f64()
    );
    let csv = report.to_csv();
    match &config.output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, csv)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Space(a) => (StudyKind::Space, a),
        Command::Time(a) => (StudyKind::Time, a),
        Command::Conditioning(a) => (StudyKind::Conditioning, a),
        Command::Single(a) => (StudyKind::Single, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let detail = e.to_string().replace(['\n', '\t'], " ");
            match &e {
                FsiError::Config { key, .. } => {
                    eprintln!("error\tkind={}\tkey={key}\t{detail}", e.kind())
                }
                _ => eprintln!("error\tkind={}\t{detail}", e.kind()),
            }
            ExitCode::FAILURE
        }
    }
}
