use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rfterm::exec::Exec;
use rfterm::gate::Mode;
use rfterm::scenario::{cmd_fig3, cmd_gate, cmd_pec, cmd_sweep, cmd_swap, Manifest, RunContext, Scenario};
use rfterm::{Error, Result};

const EXIT_VALIDATION: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;

#[derive(Parser)]
#[command(name = "rfterm", version, about = "Rydberg-Fermi cavity-QED terminal simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario TOML; the implementation operating point when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory (default: scenario `output_dir`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache directory (default: scenario `cache_dir`, else $RFTERM_CACHE_DIR).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Relative integration tolerance per step.
    #[arg(long)]
    tol: Option<f64>,
    /// Species file, overriding the scenario.
    #[arg(long)]
    species: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Nonhermitian,
    Lindblad,
}

#[derive(Subcommand)]
enum Command {
    /// Potential curve and per-site level shifts.
    Pec(Common),
    /// Conditional emission gate on a logical input.
    Gate {
        #[command(flatten)]
        common: Common,
        /// Logical input: 0L, 1L, +L or -L.
        #[arg(long)]
        logical: Option<String>,
        /// Dump per-step populations to trajectory.csv.
        #[arg(long)]
        trajectory: bool,
    },
    /// One-dimensional parameter sweep of the gate.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Field name (omega_s, omega_r, g, delta, v_rf, gamma_c, gamma_p, gamma_r,
        /// sigma, separation_us) or delta_ratio, gamma_ratio, rabi_ratio.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        logical: Option<String>,
    },
    /// The three operating-regime panels.
    Fig3(Common),
    /// Entanglement swap of two terminal records.
    Swap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        first: Option<PathBuf>,
        #[arg(long)]
        second: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<(Scenario, RunContext)> {
    let mut scenario = match &common.scenario {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default(),
    };
    if let Some(m) = common.mode {
        scenario.mode = match m {
            ModeArg::Nonhermitian => Mode::Nonhermitian,
            ModeArg::Lindblad => Mode::Lindblad,
        };
    }
    if let Some(t) = common.tol {
        scenario.tolerance = t;
    }
    if let Some(s) = &common.species {
        scenario.species_file = Some(s.clone());
    }
    let ctx = RunContext::resolve(&scenario, common.out.clone(), common.cache.clone(), common.workers);
    Ok((scenario, ctx))
}

fn logical_override(scenario: &mut Scenario, logical: Option<String>) {
    if let Some(l) = logical {
        scenario.input = rfterm::scenario::InputSpec { logical: Some(l), ..Default::default() };
    }
}

fn run(cli: Cli) -> Result<Manifest> {
    let common = match &cli.command {
        Command::Pec(c) | Command::Fig3(c) => c,
        Command::Gate { common, .. } | Command::Sweep { common, .. } | Command::Swap { common, .. } => common,
    }
    .clone();
    let (mut scenario, ctx) = load(&common)?;
    Exec::with_workers(common.workers, move || match cli.command {
        Command::Pec(_) => cmd_pec(&scenario, &ctx),
        Command::Gate { logical, trajectory, .. } => {
            logical_override(&mut scenario, logical);
            scenario.trajectory |= trajectory;
            cmd_gate(&scenario, &ctx)
        }
        Command::Sweep { axis, values, logical, .. } => {
            logical_override(&mut scenario, logical);
            cmd_sweep(&scenario, &ctx, axis.as_deref(), values)
        }
        Command::Fig3(_) => cmd_fig3(&scenario, &ctx),
        Command::Swap { first, second, .. } => cmd_swap(&scenario, &ctx, first, second),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(m) => {
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&m.summary).unwrap_or_default());
            eprintln!("wrote {} file(s) in {:.2} s", m.outputs.len(), m.timings_s.get("total").copied().unwrap_or(0.0));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_COMPUTATION
    }
}
