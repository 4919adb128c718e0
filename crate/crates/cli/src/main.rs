//! `qccs`: parse, explore and compare quantum CCS processes.
//!
//! Exit codes: 0 success or bisimilar, 1 diagnostics, 2 refuted,
//! 3 undecided, 64 bad usage, 66 unreadable file, 70 internal error.

mod commands;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qccs", version, about = "Quantum CCS toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for the random state suite and diamond-norm search.
    #[arg(long, global = true, env = "QCCS_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reserved fresh variables per type in the register.
    #[arg(long, global = true, default_value_t = 1)]
    pub fresh: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Sb,
    Srb,
    Diamond,
}

#[derive(Args, Debug)]
pub struct Run {
    pub file: PathBuf,
    /// Constant name, or a process term.
    #[arg(long = "proc")]
    pub proc_: String,
    #[arg(long)]
    pub state: String,
}

#[derive(Args, Debug)]
pub struct Pair {
    pub file: PathBuf,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub q: String,
    /// Declared states added to the random suite.
    #[arg(long, value_delimiter = ',')]
    pub states: Vec<String>,
    /// Rounds explored before a branch counts as undecided.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Choi-matrix tolerance for operation equality.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random product states in the suite.
    #[arg(long)]
    pub random_product: Option<usize>,
    /// Random entangled states in the suite.
    #[arg(long)]
    pub random_entangled: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a file and report diagnostics.
    Parse { file: PathBuf },
    /// List transitions, one per line: `ACTION :: PROCESS :: STATE`.
    Steps {
        #[command(flatten)]
        run: Run,
        /// Levels of transitions to list.
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Build the reachable transition system.
    Lts {
        #[command(flatten)]
        run: Run,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[arg(long, default_value_t = 64)]
        depth: usize,
        #[arg(long, default_value_t = 10_000)]
        max_nodes: usize,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Print the normal form of a process.
    Nf {
        file: PathBuf,
        #[arg(long = "proc")]
        proc_: String,
    },
    /// Strong bisimilarity.
    Bisim(Pair),
    /// Reduction bisimilarity.
    Rbisim(Pair),
    /// Bisimulation distance, or the diamond distance of two operations.
    Distance {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        e: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long, value_delimiter = ',')]
        states: Vec<String>,
        /// Bisection probes, including the two at 0 and 1.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Random starts for the diamond-norm search.
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Run the bundled examples and law suites.
    Selftest {
        /// Random instances per law.
        #[arg(long, default_value_t = 10)]
        instances: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(70);
        }
    }
    let g = &cli.global;
    let result = match cli.command {
        Command::Parse { file } => commands::parse(&file),
        Command::Steps { run, depth, format } => commands::steps(g, &run, depth, format),
        Command::Lts {
            run,
            format,
            depth,
            max_nodes,
            output,
        } => commands::lts(g, &run, format, depth, max_nodes, output.as_deref()),
        Command::Nf { file, proc_ } => commands::nf(&file, &proc_),
        Command::Bisim(pair) => commands::bisim(g, &pair, false),
        Command::Rbisim(pair) => commands::bisim(g, &pair, true),
        Command::Distance {
            file,
            kind,
            p,
            q,
            e,
            f,
            states,
            budget,
            depth,
            tol,
            starts,
        } => commands::distance(
            g,
            &commands::DistanceArgs {
                file,
                kind,
                p,
                q,
                e,
                f,
                states,
                budget,
                depth,
                tol,
                starts,
            },
        ),
        Command::Selftest { instances } => selftest::run(g, instances),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
