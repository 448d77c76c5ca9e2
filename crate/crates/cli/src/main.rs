//! `prr`: command-line analysis of planar 3-PRR manipulators.
//!
//! All angles on the command line are in degrees.  Printed and written
//! numbers use 17 significant digits so results can be fed back in without
//! loss.

mod args;
mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use prr_core::motion::RateLaw;
use prr_core::{BranchSelector, JointVector, Pose};

#[derive(Debug, Parser)]
#[command(
    name = "prr",
    version,
    about = "Kinematics and workspace analysis for planar 3-PRR manipulators"
)]
#[command(after_help = "Angles (pose orientation, rotation rates) are given in degrees.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Geometry file (TOML).
    #[arg(long, short)]
    pub geometry: PathBuf,
    /// Write PREFIX.csv (and .svg where applicable) plus PREFIX.manifest.json.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Grid {
    /// Grid points along x and y, as NxM.
    #[arg(long, default_value = "200x200", value_parser = args::resolution)]
    pub resolution: (usize, usize),
    /// Orientation samples over (-180, 180].
    #[arg(long, default_value_t = 36)]
    pub orientations: usize,
    /// Worker threads for the scan (0 uses every core).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint positions for a pose.
    Ik {
        #[command(flatten)]
        common: Common,
        /// x,y,theta of the gripper point G.
        #[arg(long, value_parser = args::pose, allow_hyphen_values = true)]
        pose: Pose,
        /// Elbow signs such as "+-+"; defaults to the first assembly mode,
        /// preferring one within the strokes.
        #[arg(long, allow_hyphen_values = true)]
        branch: Option<BranchSelector>,
        /// Reject joint positions outside [0, stroke].
        #[arg(long)]
        strict_stroke: bool,
    },
    /// Pose for joint positions, nearest the seed pose.
    Fk {
        #[command(flatten)]
        common: Common,
        /// rho_1,rho_2,rho_3.
        #[arg(long, value_parser = args::joints, allow_hyphen_values = true)]
        joints: JointVector,
        /// x,y,theta to start from.
        #[arg(long, value_parser = args::pose, allow_hyphen_values = true)]
        seed_pose: Pose,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
    },
    /// Direct and inverse kinematics matrices at a pose.
    Jacobian {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = args::pose, allow_hyphen_values = true)]
        pose: Pose,
        #[arg(long, allow_hyphen_values = true)]
        branch: Option<BranchSelector>,
    },
    /// Singularity classification at a pose.
    Singularity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = args::pose, allow_hyphen_values = true)]
        pose: Pose,
        #[arg(long, allow_hyphen_values = true)]
        branch: Option<BranchSelector>,
        #[arg(long, default_value_t = 1e-8)]
        eps_serial: f64,
        #[arg(long, default_value_t = 1e-8)]
        eps_parallel: f64,
    },
    /// Reachability grid over the bounding rectangle.
    Workspace {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Workspace fraction for a list of stroke lengths.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        /// Stroke lengths.
        #[arg(long, value_parser = args::list, default_value = "1,1.5,2,2.5,3")]
        strokes: ::std::vec::Vec<f64>,
    },
    /// Integrate a rate law in joint space.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_parser = args::pose, allow_hyphen_values = true)]
        pose: Pose,
        #[arg(long, allow_hyphen_values = true)]
        branch: Option<BranchSelector>,
        /// horizontal:V, vertical:V, rotation:DEG_PER_T or twist:VX,VY,DEG_PER_T.
        #[arg(long, value_parser = args::law, allow_hyphen_values = true)]
        law: RateLaw,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run_args(&argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
