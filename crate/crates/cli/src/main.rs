use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lyapdl::dynamics::Variant;
use lyapdl::proofs::Part;
use lyapdl_cli::commands::{self, parse_grid, parse_pair, ProveOpts, SimulateOpts};
use lyapdl_cli::server;

#[derive(Parser)]
#[command(name = "lyapdl", version, about = "Replays Lyapunov stability proofs in differential dynamic logic")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Trig,
    Linear,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a problem's parameters against the stable-family constraints.
    Derive { file: PathBuf },
    /// Replay the stability proof (or one part of it) on a problem.
    Prove {
        file: PathBuf,
        /// 1, 2, 3 or full
        #[arg(long, default_value = "full")]
        part: Part,
        /// Replay this script instead of the built-in one.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Write the proof tree as JSON.
        #[arg(long)]
        emit_tree: Option<PathBuf>,
        /// Minimize V over the unit ball rather than the annulus in Cut4.
        #[arg(long)]
        literal: bool,
        /// Sample each oracle leaf this many times (seed from LYAPDL_SEED).
        #[arg(long, default_value_t = 0)]
        falsify: usize,
        /// Export oracle leaves as SMT-LIB files into this directory.
        #[arg(long)]
        smtlib: Option<PathBuf>,
        /// Print the script that was run.
        #[arg(long)]
        print_script: bool,
    },
    /// Integrate the closed loop and sample V, V' on a grid.
    Simulate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "trig")]
        variant: VariantArg,
        /// Initial state `th,w`.
        #[arg(long, default_value = "0.5,0", value_parser = parse_pair, allow_hyphen_values = true)]
        x0: (f64, f64),
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        /// `lo:hi:n,lo:hi:n` for theta then omega.
        #[arg(long, default_value = "-1:1:41,-1:1:41", value_parser = parse_grid, allow_hyphen_values = true)]
        grid: lyapdl::dynamics::GridSpec,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Serve the proof-session HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory for session snapshots.
        #[arg(long)]
        persist: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    let code = match cli.cmd {
        Cmd::Derive { file } => commands::derive(&file, &mut out, &mut err),
        Cmd::Prove {
            file,
            part,
            script,
            emit_tree,
            literal,
            falsify,
            smtlib,
            print_script,
        } => {
            let opts = ProveOpts {
                part,
                script,
                emit_tree,
                literal,
                falsify,
                smtlib,
                print_script,
            };
            commands::prove(&file, &opts, &mut out, &mut err)
        }
        Cmd::Simulate {
            file,
            variant,
            x0,
            dt,
            t_end,
            grid,
            out: out_dir,
        } => {
            let variant = match variant {
                VariantArg::Trig => Variant::Trig,
                VariantArg::Linear => Variant::Linear,
            };
            let opts = SimulateOpts {
                variant,
                x0,
                dt,
                t_end,
                grid,
                out_dir,
            };
            commands::simulate_cmd(&file, &opts, &mut out, &mut err)
        }
        Cmd::Serve { port, persist } => match server::serve(port, persist) {
            Ok(()) => commands::EXIT_OK,
            Err(e) => {
                eprintln!("error: {e:#}");
                commands::EXIT_IO
            }
        },
    };
    ExitCode::from(code)
}
