use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stopfield_cli::config::{load, Overrides};
use stopfield_cli::output::write_sweep_csv;
use stopfield_cli::runner;
use stopfield_cli::CliError;

/// Equilibrium solver and population simulator for mean-field optimal
/// stopping scenarios.
#[derive(Parser)]
#[command(name = "stopfield", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the equilibrium curve and write curve.csv / solutions.json /
    /// plot.json.
    Solve(RunArgs),
    /// Solve, run the finite-n population against the curve, audit a sample
    /// of agents, and write all artifacts.
    Simulate(RunArgs),
    /// Solve and audit a deterministic sample of agents.
    Audit(AuditArgs),
    /// Re-run the scenario across a list of parameter values and write
    /// sweep.csv.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for the population streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of agents.
    #[arg(long)]
    agents: Option<usize>,
    /// Grid step.
    #[arg(long)]
    dt: Option<f64>,
    /// u-grid resolution of the root scan.
    #[arg(long = "u-res")]
    u_res: Option<usize>,
    /// Branch policy: maximal | minimal | index:<k>.
    #[arg(long)]
    policy: Option<String>,
    /// Output format: csv | json | both.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Number of agents to audit.
    #[arg(long, default_value_t = 100)]
    sample: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Parameter to sweep: c | eps | r.
    #[arg(long)]
    param: String,
    /// Comma-separated parameter values.
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
}

fn overrides(args: &RunArgs) -> Overrides {
    Overrides {
        out: args.out.clone(),
        seed: args.seed,
        agents: args.agents,
        dt: args.dt,
        u_res: args.u_res,
        policy: args.policy.clone(),
        format: args.format.clone(),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => {
            let cfg = load(&args.config, &overrides(&args))?;
            let artifacts = runner::run_solve(&cfg)?;
            for path in runner::write_artifacts(&cfg, &artifacts)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Simulate(args) => {
            let cfg = load(&args.config, &overrides(&args))?;
            let artifacts = runner::run_simulate(&cfg)?;
            if let Some(pop) = &artifacts.population {
                println!("sup_residual {}", pop.sup_residual);
            }
            if let Some(audit) = &artifacts.audit {
                println!(
                    "audit worst_gap {} (agent {}, {} sampled)",
                    audit.worst_gap, audit.worst_agent, audit.sampled
                );
            }
            for path in runner::write_artifacts(&cfg, &artifacts)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Audit(args) => {
            let cfg = load(&args.run.config, &overrides(&args.run))?;
            let report = runner::run_audit(&cfg, args.sample)?;
            std::fs::create_dir_all(&cfg.out_dir).map_err(|e| {
                CliError::Io(format!("cannot create {}: {e}", cfg.out_dir.display()))
            })?;
            let path = cfg.out_dir.join("audit.json");
            stopfield_cli::output::write_audit_json(&path, &report)?;
            println!(
                "audit worst_gap {} (agent {}, {} sampled)",
                report.worst_gap, report.worst_agent, report.sampled
            );
            println!("wrote {}", path.display());
        }
        Command::Sweep(args) => {
            let cfg = load(&args.run.config, &overrides(&args.run))?;
            let rows = runner::run_sweep(&cfg, &args.param, &args.values)?;
            std::fs::create_dir_all(&cfg.out_dir).map_err(|e| {
                CliError::Io(format!("cannot create {}: {e}", cfg.out_dir.display()))
            })?;
            let path = cfg.out_dir.join("sweep.csv");
            write_sweep_csv(&path, &rows)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
