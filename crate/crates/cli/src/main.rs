use std::path::PathBuf;
use std::process::ExitCode;

use bhgcs_cli::config::OracleMode;
use bhgcs_cli::{compare_files, exit, presets, run_scenario, run_sweep, validate_config, validate_sweep, CliError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bhgcs", version, about = "Variational Bose-Hubbard dynamics in a coherent-state basis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario.
    Run(ScenarioArgs),
    /// Run every combination of sweep_N and sweep_beta.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Parallel runs.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// List the bundled presets.
    Presets,
    /// Compare the population columns of two trajectory CSVs.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (flat TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled preset; keys in --config override it.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Exact reference: auto runs it when the Fock sector is below the cap.
    #[arg(long, value_parser = ["auto", "on", "off"])]
    oracle: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ScenarioArgs {
    fn document(&self) -> Result<String, CliError> {
        let mut table = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(vec![format!("{}: {e}", path.display())]))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Validation(vec![format!("{}: {}", path.display(), e.message())]))?
            }
            None => toml::Table::new(),
        };
        if let Some(p) = &self.preset {
            table.insert("preset".into(), toml::Value::String(p.clone()));
        }
        if self.config.is_none() && self.preset.is_none() {
            return Err(CliError::Validation(vec!["give --config or --preset".into()]));
        }
        Ok(table.to_string())
    }

    fn apply(&self, cfg: &mut bhgcs_cli::ScenarioConfig) {
        if let Some(seed) = self.seed {
            cfg.grid.seed = seed;
        }
        if let Some(mode) = &self.oracle {
            cfg.run_oracle = mode.parse::<OracleMode>().expect("checked by clap");
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Presets => {
            for p in presets::all() {
                let cfg = (p.build)();
                println!("{:<24} {}  (Lambda = {:.3})", p.name, p.summary, cfg.lambda());
            }
            Ok(exit::SUCCESS)
        }
        Command::Run(args) => {
            let mut cfg = validate_config(&args.document()?).map_err(CliError::Validation)?;
            args.apply(&mut cfg);
            let report = run_scenario(&cfg)?;
            for n in &report.notices {
                eprintln!("notice: {n}");
            }
            println!("scenario     {}", report.name);
            println!("Lambda       {:.4}", cfg.lambda());
            println!("trajectory   {}", report.trajectory_csv.display());
            if let Some(r) = report.projection_residual {
                println!("projection   residual {r:.3e}");
            }
            if let (Some(dev), Some(path)) = (report.max_oracle_deviation, &report.comparison_csv) {
                println!("comparison   {}", path.display());
                println!("max |dpop|   {dev:.6e}");
            }
            println!("norm drift   {:.3e}", report.trajectory.max_norm_drift());
            println!("energy drift {:.3e} (relative)", report.trajectory.max_relative_energy_drift());
            println!("xi drift     {:.3e}", report.trajectory.max_xi_drift());
            println!("wall time    {:.2} s", report.wall_time);
            Ok(exit::SUCCESS)
        }
        Command::Sweep { scenario, workers } => {
            let mut cfg = validate_sweep(&scenario.document()?).map_err(CliError::Validation)?;
            scenario.apply(&mut cfg.base);
            let report = run_sweep(&cfg, workers)?;
            for n in &report.notices {
                eprintln!("notice: {n}");
            }
            println!("summary {}", report.summary_csv.display());
            for c in &report.cells {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3e}"));
                println!(
                    "N={:<5} beta={:<10.6} vs largest N {:>10}  vs oracle {:>10}  {:>8.2} s  {}",
                    c.size,
                    c.beta,
                    fmt(c.deviation_from_largest),
                    fmt(c.oracle_deviation),
                    c.wall_time,
                    c.status
                );
            }
            Ok(if report.failures() > 0 { exit::PROPAGATION } else { exit::SUCCESS })
        }
        Command::Compare { a, b, tol } => {
            let report = compare_files(&a, &b, tol)?;
            for c in &report.columns {
                println!("{:<24} {:.6e}", c.column, c.max_abs_diff);
            }
            println!(
                "max population difference {:.6e} ({} tolerance {tol})",
                report.max_population_diff,
                if report.passed() { "within" } else { "exceeds" }
            );
            Ok(if report.passed() { exit::SUCCESS } else { exit::TOLERANCE })
        }
    }
}
