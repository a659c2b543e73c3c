use std::path::PathBuf;
use std::process::ExitCode;

use arena_cli::commands::{self, GadgetArgs, Start};
use arena_cli::format::{GameFile, ProtocolArg};
use arena_cli::{max_profiles_from_env, CliError, Output};
use arena_core::corpus::CostClass;
use arena_core::equilibrium::EnumConfig;
use arena_core::gadgets::GadgetKind;
use arena_core::rational::parse_rational;
use arena_core::{Execution, Rational};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arena", version, about = "Exact analysis of cost-sharing games")]
struct Cli {
    /// Enumerate on a single thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibria, optimum, PoA and PoS of a game file.
    Analyze {
        file: PathBuf,
        /// shapley, gws, gws:<weights.json> or table:<table.json>
        #[arg(long, default_value = "shapley")]
        protocol: String,
    },
    /// Per-resource cost shares at a profile.
    Shares {
        file: PathBuf,
        /// Strategy index per player, comma separated.
        #[arg(long)]
        profile: String,
        #[arg(long, default_value = "shapley")]
        protocol: String,
    },
    /// Build and verify a lower-bound network game.
    Gadget {
        /// pos_linear, pos_nharmonic or poa_unbounded
        kind: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value = "1/4", value_parser = rational)]
        eps: Rational,
        #[arg(long, default_value = "2", value_parser = rational)]
        a: Rational,
        #[arg(long)]
        protocol: Option<String>,
        /// Largest pair cost probed by poa_unbounded (default 2^20 a).
        #[arg(long, value_parser = rational)]
        q_probe_max: Option<Rational>,
        /// Write the generated game file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best-response dynamics from a start profile.
    Dynamics {
        file: PathBuf,
        #[arg(long, default_value = "shapley")]
        protocol: String,
        /// Strategy indices, or random:<seed>.
        #[arg(long)]
        start: String,
        #[arg(long)]
        max_steps: Option<usize>,
        /// round-robin or shuffled:<seed>
        #[arg(long, default_value = "round-robin")]
        schedule: String,
        /// Exit with 3 when the step limit is hit before convergence.
        #[arg(long)]
        strict: bool,
    },
    /// Check the PoS/PoA upper bounds on seeded random games.
    VerifyBounds {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// submodular, supermodular or arbitrary; all classes when omitted.
        #[arg(long)]
        class: Option<String>,
    },
}

fn rational(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let cfg = EnumConfig {
        max_profiles: max_profiles_from_env()?,
        execution: if cli.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };
    match cli.command {
        Command::Analyze { file, protocol } => {
            let game = GameFile::load(&file)?;
            let protocol = ProtocolArg::parse(&protocol)?.resolve(game.players())?;
            commands::analyze(&game, &protocol, &cfg)
        }
        Command::Shares {
            file,
            profile,
            protocol,
        } => {
            let game = GameFile::load(&file)?;
            let protocol = ProtocolArg::parse(&protocol)?.resolve(game.players())?;
            commands::shares(&game, &protocol, &profile)
        }
        Command::Gadget {
            kind,
            n,
            eps,
            a,
            protocol,
            q_probe_max,
            out,
        } => {
            let args = GadgetArgs {
                kind: kind.parse::<GadgetKind>()?,
                n,
                eps,
                a,
                protocol: protocol.as_deref().map(ProtocolArg::parse).transpose()?,
                q_probe_max,
            };
            commands::gadget(&args, out.as_deref(), &cfg)
        }
        Command::Dynamics {
            file,
            protocol,
            start,
            max_steps,
            schedule,
            strict,
        } => {
            let game = GameFile::load(&file)?;
            let protocol = ProtocolArg::parse(&protocol)?.resolve(game.players())?;
            let schedule = commands::parse_schedule(&schedule)?;
            commands::dynamics(&game, &protocol, &Start::parse(&start)?, max_steps, schedule, strict)
        }
        Command::VerifyBounds { seed, count, class } => {
            let class = class.as_deref().map(str::parse::<CostClass>).transpose()?;
            commands::verify_bounds(seed, count, class, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            eprint!("{}", out.human);
            println!("{}", serde_json::to_string_pretty(&out.json).expect("json"));
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
