use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use clap::Parser;

use prr_core::config::{load_geometry, ConfigError};
use prr_core::export::{fmt_f64, workspace_svg, SvgStyle};
use prr_core::kinematics::{forward_kinematics, inverse_kinematics, jacobians, reachable_branch};
use prr_core::motion::{simulate, MotionError, SimulationOptions, TrajectoryTrace};
use prr_core::singularity::{classify, SingularityReport, Thresholds};
use prr_core::workspace::{
    dead_zones, scan, stroke_sweep, sweep_csv, SweepTemplate, WorkspaceError,
};
use prr_core::{
    BranchSelector, Configuration, FkOptions, Geometry, KinematicsError, Pose, WorkspaceSpec,
};

use crate::manifest::RunManifest;
use crate::{Cli, Command, Common, Grid};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or geometry file.
    Input(String),
    /// The request is geometrically impossible or singular.
    Domain(String),
    /// An iterative method failed.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Domain(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<KinematicsError> for CliError {
    fn from(e: KinematicsError) -> Self {
        match e {
            KinematicsError::NoConvergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<WorkspaceError> for CliError {
    fn from(e: WorkspaceError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MotionError> for CliError {
    fn from(e: MotionError) -> Self {
        match e {
            MotionError::Kinematics(k) => k.into(),
            MotionError::NonFiniteLaw | MotionError::InvalidTimeStep(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

/// Parses and runs one invocation; `argv` excludes the program name.
pub fn run_args(argv: &[String]) -> Result<(), CliError> {
    let cli =
        match Cli::try_parse_from(std::iter::once("prr".to_owned()).chain(argv.iter().cloned())) {
            Ok(cli) => cli,
            Err(e) if !e.use_stderr() => {
                // --help and --version
                print!("{e}");
                return Ok(());
            }
            Err(e) => {
                let text = e.render().to_string();
                let text = text
                    .trim_end()
                    .strip_prefix("error: ")
                    .unwrap_or(text.trim_end());
                return Err(CliError::Input(text.to_owned()));
            }
        };
    run(cli.command, argv)
}

struct Outputs {
    prefix: Option<PathBuf>,
    manifest: RunManifest,
}

impl Outputs {
    fn new(command: &str, common: &Common, argv: &[String]) -> Self {
        Self {
            prefix: common.out.clone(),
            manifest: RunManifest::new(command, &common.geometry, argv),
        }
    }

    fn path(prefix: &Path, ext: &str) -> PathBuf {
        let mut name = prefix.as_os_str().to_owned();
        name.push(ext);
        PathBuf::from(name)
    }

    fn write(&mut self, ext: &str, contents: &str) -> Result<(), CliError> {
        let Some(prefix) = &self.prefix else {
            return Ok(());
        };
        let path = Self::path(prefix, ext);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.output_paths.push(path.display().to_string());
        Ok(())
    }

    fn finish(mut self) -> Result<(), CliError> {
        let Some(prefix) = self.prefix.clone() else {
            return Ok(());
        };
        let path = Self::path(&prefix, ".manifest.json");
        self.manifest.output_paths.push(path.display().to_string());
        std::fs::write(&path, self.manifest.to_json())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
    }
}

fn run(command: Command, argv: &[String]) -> Result<(), CliError> {
    match command {
        Command::Ik {
            common,
            pose,
            branch,
            strict_stroke,
        } => {
            let g = load_geometry(&common.geometry)?;
            let config = match branch {
                Some(b) => inverse_kinematics(&pose, &g, b, strict_stroke)?,
                None if strict_stroke => first_feasible(&pose, &g, true)?,
                None => analysis_configuration(&pose, &g, None)?,
            };
            let csv = ik_csv(&config);
            print!("{csv}");
            let mut out = Outputs::new("ik", &common, argv);
            out.manifest
                .param("pose", pose_text(&pose))
                .param("branch", config.branch)
                .param("strict_stroke", strict_stroke);
            out.write(".csv", &csv)?;
            out.finish()
        }
        Command::Fk {
            common,
            joints,
            seed_pose,
            tol,
            max_iter,
        } => {
            let g = load_geometry(&common.geometry)?;
            let options = FkOptions {
                tol,
                max_iter,
                ..FkOptions::default()
            };
            let pose = forward_kinematics(&joints, &g, &seed_pose, &options)?;
            let config = prr_core::kinematics::assemble(&pose, &joints, &g);
            let csv = format!(
                "x_G,y_G,theta_G_deg,branch\n{},{},{},{}\n",
                fmt_f64(pose.x),
                fmt_f64(pose.y),
                fmt_f64(pose.theta.to_degrees()),
                config.branch
            );
            print!("{csv}");
            let mut out = Outputs::new("fk", &common, argv);
            let [r1, r2, r3] = joints.0;
            out.manifest
                .param(
                    "joints",
                    format!("{},{},{}", fmt_f64(r1), fmt_f64(r2), fmt_f64(r3)),
                )
                .param("seed_pose", pose_text(&seed_pose))
                .param("tol", tol)
                .param("max_iter", max_iter);
            out.write(".csv", &csv)?;
            out.finish()
        }
        Command::Jacobian {
            common,
            pose,
            branch,
        } => {
            let g = load_geometry(&common.geometry)?;
            let config = analysis_configuration(&pose, &g, branch)?;
            let pair = jacobians(&config, &g);
            let mut csv = String::from("entry,value\n");
            for (name, m) in [("A", &pair.a), ("B", &pair.b)] {
                for r in 0..3 {
                    for c in 0..3 {
                        let _ = writeln!(csv, "{name}{}{},{}", r + 1, c + 1, fmt_f64(m[(r, c)]));
                    }
                }
            }
            let _ = writeln!(csv, "det_a,{}", fmt_f64(pair.det_a));
            let _ = writeln!(
                csv,
                "det_a_normalized,{}",
                fmt_f64(pair.det_a_normalized(&g))
            );
            let _ = writeln!(csv, "det_b,{}", fmt_f64(pair.det_b));
            let _ = writeln!(
                csv,
                "det_b_normalized,{}",
                fmt_f64(pair.det_b_normalized(&g))
            );
            print!("{csv}");
            let mut out = Outputs::new("jacobian", &common, argv);
            out.manifest
                .param("pose", pose_text(&pose))
                .param("branch", config.branch);
            out.write(".csv", &csv)?;
            out.finish()
        }
        Command::Singularity {
            common,
            pose,
            branch,
            eps_serial,
            eps_parallel,
        } => {
            let g = load_geometry(&common.geometry)?;
            let config = analysis_configuration(&pose, &g, branch)?;
            let thresholds = Thresholds {
                serial: eps_serial,
                parallel: eps_parallel,
            };
            let report = classify(&config, &g, &thresholds);
            let csv = format!("{}\n{}\n", SingularityReport::CSV_HEADER, report.csv_row());
            print!("{csv}");
            let mut out = Outputs::new("singularity", &common, argv);
            out.manifest
                .param("pose", pose_text(&pose))
                .param("branch", config.branch)
                .param("eps_serial", eps_serial)
                .param("eps_parallel", eps_parallel);
            out.write(".csv", &csv)?;
            out.finish()
        }
        Command::Workspace { common, grid } => {
            let g = load_geometry(&common.geometry)?;
            let spec = grid_spec(&g, &grid);
            let result = with_threads(grid.threads, || scan(&g, &spec))??;
            let zones = dead_zones(&result);
            let reachable = result.cells.iter().filter(|c| c.is_reachable()).count();
            println!("S,reachable_cells,total_cells,dead_zones");
            println!(
                "{},{},{},{}",
                fmt_f64(result.fraction),
                reachable,
                result.cells.len(),
                zones.len()
            );
            let mut out = Outputs::new("workspace", &common, argv);
            record_grid(&mut out.manifest, &grid);
            out.manifest.param("fraction", fmt_f64(result.fraction));
            out.write(".csv", &result.to_csv())?;
            out.write(
                ".svg",
                &workspace_svg(&result, &zones, None, &SvgStyle::default()),
            )?;
            out.finish()
        }
        Command::Sweep {
            common,
            grid,
            strokes,
        } => {
            let g = load_geometry(&common.geometry)?;
            let template = SweepTemplate {
                nx: grid.resolution.0,
                ny: grid.resolution.1,
                orientations: grid.orientations,
            };
            let rows = with_threads(grid.threads, || stroke_sweep(&g, &strokes, &template))??;
            let csv = sweep_csv(&rows);
            print!("{csv}");
            let mut out = Outputs::new("sweep", &common, argv);
            record_grid(&mut out.manifest, &grid);
            let list: Vec<String> = strokes.iter().map(|s| fmt_f64(*s)).collect();
            out.manifest.param("strokes", list.join(","));
            out.write(".csv", &csv)?;
            out.finish()
        }
        Command::Simulate {
            common,
            grid,
            pose,
            branch,
            law,
            dt,
            steps,
        } => {
            let g = load_geometry(&common.geometry)?;
            let branch = match branch {
                Some(b) => b,
                None => analysis_configuration(&pose, &g, None)?.branch,
            };
            let (trace, halted) = match simulate(
                &pose,
                &law,
                dt,
                steps,
                &g,
                branch,
                &SimulationOptions::default(),
            ) {
                Ok(trace) => (trace, None),
                Err(MotionError::SingularityEncountered {
                    step,
                    report,
                    trace,
                }) => (
                    *trace,
                    Some(CliError::Domain(format!(
                        "singularity ({}) reached at step {step}; trace stops at t = {}",
                        report.kind,
                        fmt_f64((step - 1) as f64 * dt)
                    ))),
                ),
                Err(e) => return Err(e.into()),
            };
            let csv = trace.to_csv();
            let mut out = Outputs::new("simulate", &common, argv);
            if out.prefix.is_some() {
                print_trace_summary(&trace);
            } else {
                print!("{csv}");
            }
            out.manifest
                .param("pose", pose_text(&pose))
                .param("branch", branch)
                .param("law", law)
                .param("dt", fmt_f64(dt))
                .param("steps", steps);
            out.write(".csv", &csv)?;
            if out.prefix.is_some() {
                record_grid(&mut out.manifest, &grid);
                let spec = grid_spec(&g, &grid);
                let result = with_threads(grid.threads, || scan(&g, &spec))??;
                let zones = dead_zones(&result);
                let path = trace.path();
                let svg = workspace_svg(&result, &zones, Some(&path), &SvgStyle::default());
                out.write(".svg", &svg)?;
            }
            out.finish()?;
            match halted {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Replay { manifest } => {
            let m = RunManifest::read(&manifest).map_err(CliError::Input)?;
            if m.args.first().map(String::as_str) == Some("replay") {
                return Err(CliError::Input(
                    "a manifest cannot replay another replay".into(),
                ));
            }
            run_args(&m.args)
        }
    }
}

fn pose_text(pose: &Pose) -> String {
    format!(
        "{},{},{}",
        fmt_f64(pose.x),
        fmt_f64(pose.y),
        fmt_f64(pose.theta.to_degrees())
    )
}

fn grid_spec(g: &Geometry, grid: &Grid) -> WorkspaceSpec {
    WorkspaceSpec::for_geometry(g, grid.resolution.0, grid.resolution.1, grid.orientations)
}

fn record_grid(manifest: &mut RunManifest, grid: &Grid) {
    manifest
        .param(
            "resolution",
            format!("{}x{}", grid.resolution.0, grid.resolution.1),
        )
        .param("orientations", grid.orientations)
        .param("threads", grid.threads);
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// First assembly mode (in `BranchSelector::all` order) that IK accepts.
/// When none does, the error reported is the one that got furthest through
/// the legs.
fn first_feasible(
    pose: &Pose,
    g: &Geometry,
    strict: bool,
) -> Result<Configuration, KinematicsError> {
    if strict {
        if let Some(b) = reachable_branch(pose, g) {
            return inverse_kinematics(pose, g, b, true);
        }
    }
    let mut worst: Option<KinematicsError> = None;
    for b in BranchSelector::all() {
        match inverse_kinematics(pose, g, b, strict) {
            Ok(config) => return Ok(config),
            Err(e) => {
                if worst
                    .as_ref()
                    .is_none_or(|w| failing_leg(&e) > failing_leg(w))
                {
                    worst = Some(e);
                }
            }
        }
    }
    Err(worst.expect("eight branches were tried"))
}

fn failing_leg(e: &KinematicsError) -> usize {
    match e {
        KinematicsError::Unreachable { leg, .. } | KinematicsError::StrokeViolation { leg, .. } => {
            *leg
        }
        _ => 0,
    }
}

/// The requested branch ignoring strokes, or else the first mode within the
/// strokes, or else the first geometrically closed mode.
fn analysis_configuration(
    pose: &Pose,
    g: &Geometry,
    branch: Option<BranchSelector>,
) -> Result<Configuration, KinematicsError> {
    match branch {
        Some(b) => inverse_kinematics(pose, g, b, false),
        None => first_feasible(pose, g, true).or_else(|_| first_feasible(pose, g, false)),
    }
}

fn ik_csv(config: &Configuration) -> String {
    let mut csv = String::from("leg,elbow,rho,alpha_deg,b_x,b_y,c_x,c_y\n");
    let elbows = config.branch.to_string();
    for (leg, elbow) in elbows.chars().enumerate() {
        let _ = writeln!(
            csv,
            "{},{elbow},{},{},{},{},{},{}",
            leg + 1,
            fmt_f64(config.joints.0[leg]),
            fmt_f64(config.alpha[leg].to_degrees()),
            fmt_f64(config.b[leg].x),
            fmt_f64(config.b[leg].y),
            fmt_f64(config.c[leg].x),
            fmt_f64(config.c[leg].y)
        );
    }
    csv
}

fn print_trace_summary(trace: &TrajectoryTrace) {
    let end = trace.final_pose();
    println!("steps,t_end,x_G,y_G,theta_G_deg");
    println!(
        "{},{},{},{},{}",
        trace.samples.len(),
        fmt_f64(trace.samples.len() as f64 * trace.dt),
        fmt_f64(end.x),
        fmt_f64(end.y),
        fmt_f64(end.theta.to_degrees())
    );
}
