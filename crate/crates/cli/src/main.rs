use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varqte::experiment::{self, manifest_path, write_csv, EvolutionConfig, RunStatus};
use varqte::{Error, EvolutionKind, OdeKind, SolverKind};

const EXIT_FAILED_CHECKS: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INTEGRATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "varqte",
    version,
    about = "Variational quantum time evolution with a-posteriori error bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration and write the trajectory CSV plus manifest.
    Run(ConfigArgs),
    /// Run the finite-difference and ancilla-circuit self-checks.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the JSON configuration of a preset.
    Preset { name: String },
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a preset: illustrative, ising or hydrogen.
    #[arg(long)]
    preset: Option<String>,
    /// real or imag.
    #[arg(long)]
    evolution: Option<EvolutionKind>,
    /// standard or argmin.
    #[arg(long)]
    ode: Option<OdeKind>,
    /// euler or rk54.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Euler step count.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV path; the manifest goes next to it. Without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn resolve(args: &ConfigArgs) -> Result<EvolutionConfig, Error> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => EvolutionConfig::from_json(
            &std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        )?,
        (None, Some(name)) => experiment::preset(name)?,
        (None, None) => {
            return Err(Error::Config(
                "either --config or --preset is required".into(),
            ))
        }
    };
    if let (Some(_), Some(name)) = (&args.config, &args.preset) {
        cfg.hamiltonian = experiment::HamiltonianSpec::Preset {
            preset: name.clone(),
        };
    }
    if let Some(k) = args.evolution {
        cfg.evolution = k;
    }
    if let Some(o) = args.ode {
        cfg.ode = o;
    }
    if let Some(t) = args.t_final {
        cfg.t_final = t;
    }
    if let Some(s) = args.seed {
        cfg.initial.seed = s;
    }
    let solver_name = args.solver.clone().unwrap_or_else(|| {
        if args.steps.is_some() {
            "euler".into()
        } else {
            cfg.solver.name().into()
        }
    });
    cfg.solver = match solver_name.as_str() {
        "euler" => {
            if args.rel_tol.is_some() || args.abs_tol.is_some() {
                return Err(Error::Config(
                    "--rel-tol/--abs-tol apply to rk54 only".into(),
                ));
            }
            let n_steps = match (args.steps, cfg.solver) {
                (Some(n), _) => n,
                (None, SolverKind::Euler { n_steps }) => n_steps,
                (None, _) => 100,
            };
            SolverKind::Euler { n_steps }
        }
        "rk54" => {
            if args.steps.is_some() {
                return Err(Error::Config("--steps applies to euler only".into()));
            }
            let (rel, abs) = match cfg.solver {
                SolverKind::Rk54 { rel_tol, abs_tol } => (rel_tol, abs_tol),
                _ => (1e-6, 1e-8),
            };
            SolverKind::Rk54 {
                rel_tol: args.rel_tol.unwrap_or(rel),
                abs_tol: args.abs_tol.unwrap_or(abs),
            }
        }
        other => return Err(Error::Config(format!("unknown solver `{other}`"))),
    };
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    cfg.check()?;
    Ok(cfg)
}

fn config_error(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn cmd_run(args: &ConfigArgs) -> ExitCode {
    let cfg = match resolve(args) {
        Ok(c) => c,
        Err(e) => return config_error(&e),
    };
    let result = match &cfg.output {
        Some(path) => experiment::run_to_files(&cfg, path),
        None => experiment::run(&cfg).and_then(|out| {
            write_csv(io::stdout().lock(), out.n_params, &out.rows)?;
            Ok(out)
        }),
    };
    let out = match result {
        Ok(o) => o,
        Err(e @ (Error::Io(_) | Error::Integration { .. })) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INTEGRATION);
        }
        Err(e) => return config_error(&e),
    };
    let s = &out.manifest.summary;
    eprintln!(
        "{} steps to t = {:.6}: epsilon = {:.6e}, bures = {:.6e}, energy = {:.10} (exact {:.10}), {:.3} s",
        s.steps_accepted, s.final_t, s.final_epsilon, s.final_bures, s.final_energy_prepared, s.final_energy_exact, s.wall_time_s
    );
    if let Some(path) = &cfg.output {
        eprintln!(
            "wrote {} and {}",
            path.display(),
            manifest_path(path).display()
        );
    }
    match out.manifest.status {
        RunStatus::Ok => ExitCode::SUCCESS,
        RunStatus::Failed => {
            eprintln!(
                "integration failed: {}",
                out.manifest.failure.as_deref().unwrap_or("unknown")
            );
            ExitCode::from(EXIT_INTEGRATION)
        }
    }
}

fn cmd_validate(args: &ConfigArgs, json: bool) -> ExitCode {
    // Ansatz problems are reported as failing checks rather than rejected up front.
    let cfg = match resolve(args) {
        Ok(c) => c,
        Err(Error::InvalidAnsatz(_)) => match lenient(args) {
            Ok(c) => c,
            Err(e) => return config_error(&e),
        },
        Err(e) => return config_error(&e),
    };
    let report = experiment::validate(&cfg);
    let mut stdout = io::stdout().lock();
    let written = if json {
        serde_json::to_string_pretty(&report)
            .map_err(io::Error::other)
            .and_then(|s| writeln!(stdout, "{s}"))
    } else {
        write!(stdout, "{report}")
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_FAILED_CHECKS);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED_CHECKS)
    }
}

/// Config loading without the consistency checks.
fn lenient(args: &ConfigArgs) -> Result<EvolutionConfig, Error> {
    match (&args.config, &args.preset) {
        (Some(path), _) => EvolutionConfig::from_json(&std::fs::read_to_string(path)?),
        (None, Some(name)) => experiment::preset(name),
        (None, None) => Err(Error::Config(
            "either --config or --preset is required".into(),
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Validate { config, json } => cmd_validate(config, *json),
        Command::Preset { name } => match experiment::preset(name).and_then(|c| c.to_json()) {
            Ok(json) => {
                println!("{json}");
                ExitCode::SUCCESS
            }
            Err(e) => config_error(&e),
        },
    }
}
