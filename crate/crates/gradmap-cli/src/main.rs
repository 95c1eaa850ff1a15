//! Command-line front end: representation I/O, analysis commands, and
//! machine-readable reports.
//!
//! Exit codes: 0 success, 1 input error, 2 verification-hook failure,
//! 3 destabilization budget exhausted.

mod commands;
mod repfile;
mod report;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "gradmap",
    about = "Orbit geometry of commuting symmetric matrix actions",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// `REP` is either a path to a rep file or `gallery:<name>[:params]`.
#[derive(Subcommand)]
enum Cmd {
    /// Weight table, eigenbasis, and reconstruction checks
    Diag { rep: String },
    /// Support, weight cone and polytope with faces, and orbit-limit tables
    Analyze {
        rep: String,
        #[arg(long)]
        point: String,
    },
    /// Orbit-closure classification with recomputed certificates
    Classify {
        rep: String,
        #[arg(long)]
        point: Option<String>,
        /// One comma-separated point per line; output keeps input order
        #[arg(long)]
        points_file: Option<PathBuf>,
        #[arg(long)]
        projective: bool,
    },
    /// Null cone as a union of maximal coordinate subspaces
    Nullcone { rep: String },
    /// One-parameter degeneration onto the origin or a support face
    Witness {
        rep: String,
        #[arg(long)]
        point: String,
        /// `zero` or `face:<indices>` (ambient eigenbasis, comma-separated)
        #[arg(long)]
        target: String,
    },
    /// Newton inversion of the gradient map to a prescribed target
    Invert {
        rep: String,
        #[arg(long)]
        point: String,
        /// Target value, comma-separated over the abelian coordinates
        #[arg(long)]
        target: String,
        #[arg(long)]
        projective: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Negative gradient flow of the gradient-map norm square
    Flow {
        rep: String,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 200.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 1e-10)]
        stop_tol: f64,
        #[arg(long, default_value = "flow_trace.csv")]
        trace_out: PathBuf,
    },
    /// Minimal gradient-map norm over the orbit closure, two methods
    Minnorm {
        rep: String,
        #[arg(long)]
        point: String,
        #[arg(long)]
        projective: bool,
    },
    /// Dual-coordinate sample cloud over a full group orbit
    Khull {
        rep: String,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the rotation factor and sample the abelian orbit only
        #[arg(long)]
        a_only: bool,
        #[arg(long, default_value = "khull_cloud.csv")]
        cloud_out: PathBuf,
    },
    /// Search for a noncompact direction with negative maximal weight
    Destabilize {
        rep: String,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Built-in representations
    Gallery {
        #[command(subcommand)]
        cmd: GalleryCmd,
    },
}

#[derive(Subcommand)]
enum GalleryCmd {
    /// Names and descriptions of the built-ins
    List,
    /// Print the canonical rep file for a built-in
    Emit { name: String, params: Vec<i64> },
}

fn run(cmd: Cmd) -> Result<i32, String> {
    match cmd {
        Cmd::Diag { rep } => commands::diag(&rep),
        Cmd::Analyze { rep, point } => commands::analyze(&rep, &point),
        Cmd::Classify { rep, point, points_file, projective } => {
            commands::classify(&rep, point.as_deref(), points_file.as_deref(), projective)
        }
        Cmd::Nullcone { rep } => commands::nullcone(&rep),
        Cmd::Witness { rep, point, target } => commands::witness(&rep, &point, &target),
        Cmd::Invert { rep, point, target, projective, tol } => {
            commands::invert(&rep, &point, &target, projective, tol)
        }
        Cmd::Flow { rep, point, t_max, dt, stop_tol, trace_out } => {
            commands::flow(&rep, &point, t_max, dt, stop_tol, &trace_out)
        }
        Cmd::Minnorm { rep, point, projective } => {
            commands::minnorm(&rep, &point, projective)
        }
        Cmd::Khull { rep, point, samples, seed, a_only, cloud_out } => {
            commands::khull(&rep, &point, samples, seed, a_only, &cloud_out)
        }
        Cmd::Destabilize { rep, point, seed } => {
            commands::destabilize(&rep, &point, seed)
        }
        Cmd::Gallery { cmd: GalleryCmd::List } => commands::gallery_list(),
        Cmd::Gallery { cmd: GalleryCmd::Emit { name, params } } => {
            commands::gallery_emit(&name, &params)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with success; everything else
            // is an input error.
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli.cmd) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    };
    std::process::exit(code);
}
