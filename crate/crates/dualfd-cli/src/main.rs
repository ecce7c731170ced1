//! Command-line driver: mesh generation and refinement pipelines,
//! convergence studies, error metrics and CSV emission.

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dualfd::harness::{run_1d_study, run_convergence, run_diff_study, run_eigen_study, Study};
use dualfd::mesh::{self, generate_test_mesh, DualMesh, MeshKind};
use dualfd::pde::{advection_problem, biharmonic_problem, minimal_surface_problem, poisson_problem, ProblemSpec};
use dualfd::stencil2d::{check_separation, StencilFamily};
use dualfd::subdivision::refine_times;

#[derive(Parser)]
#[command(name = "dualfd", about = "High-order finite differences on dual quadrilateral meshes", version)]
struct Cli {
    /// Key=value file with default flag values; explicit flags override.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// PDE convergence study with order gate.
    Study(StudyArgs),
    /// 1D differentiation study (regular and irregular grids).
    Diff1d(Diff1dArgs),
    /// 2D differentiation study on a mesh family.
    Diff2d(Diff2dArgs),
    /// Spectrum of the upwinded advection operator.
    Eigs(EigsArgs),
    /// Mesh generation, refinement, validation and conversion.
    #[command(subcommand)]
    Mesh(MeshCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemFlag {
    Poisson9,
    Poisson25,
    Biharmonic,
    Minsurf9,
    Minsurf25,
    Advect,
}

impl ProblemFlag {
    fn spec(self) -> ProblemSpec {
        match self {
            ProblemFlag::Poisson9 | ProblemFlag::Poisson25 => poisson_problem(),
            ProblemFlag::Biharmonic => biharmonic_problem(),
            ProblemFlag::Minsurf9 | ProblemFlag::Minsurf25 => minimal_surface_problem(),
            ProblemFlag::Advect => advection_problem(),
        }
    }

    fn family(self) -> StencilFamily {
        match self {
            ProblemFlag::Poisson9 | ProblemFlag::Minsurf9 | ProblemFlag::Advect => {
                StencilFamily::Compact
            }
            _ => StencilFamily::Extended,
        }
    }

    fn expected_order(self) -> (f64, f64) {
        match self {
            ProblemFlag::Poisson25 | ProblemFlag::Minsurf25 => (4.0, 0.5),
            _ => (2.0, 0.35),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshFlag {
    RegularPlane,
    Triangle,
    Pentagon,
    UnstructuredPlane,
    UnstructuredPlaneSmall,
    TwoHole,
}

impl MeshFlag {
    fn kind(self, n: usize) -> MeshKind {
        match self {
            MeshFlag::RegularPlane => MeshKind::RegularPlane { n },
            MeshFlag::Triangle => MeshKind::Triangle,
            MeshFlag::Pentagon => MeshKind::Pentagon,
            MeshFlag::UnstructuredPlane => MeshKind::UnstructuredPlane,
            MeshFlag::UnstructuredPlaneSmall => MeshKind::UnstructuredPlaneSmall,
            MeshFlag::TwoHole => MeshKind::TwoHole,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyFlag {
    Compact,
    Extended,
}

impl From<FamilyFlag> for StencilFamily {
    fn from(f: FamilyFlag) -> Self {
        match f {
            FamilyFlag::Compact => StencilFamily::Compact,
            FamilyFlag::Extended => StencilFamily::Extended,
        }
    }
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, value_enum)]
    problem: ProblemFlag,
    #[arg(long, value_enum)]
    mesh: MeshFlag,
    /// Refinement range, e.g. 2..4 (inclusive).
    #[arg(long, default_value = "2..4")]
    refinements: String,
    /// Stencil family override (defaults to the problem's).
    #[arg(long, value_enum)]
    family: Option<FamilyFlag>,
    /// Vertices per side for the regular plane mesh.
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Diff1dArgs {
    /// Output path for the regular-grid panel.
    #[arg(long)]
    out_reg: Option<PathBuf>,
    /// Output path for the irregular-grid panel.
    #[arg(long)]
    out_irreg: Option<PathBuf>,
}

#[derive(Args)]
struct Diff2dArgs {
    #[arg(long, value_enum)]
    mesh: MeshFlag,
    #[arg(long, default_value = "2..4")]
    refinements: String,
    #[arg(long, value_enum, default_value = "compact")]
    family: FamilyFlag,
    #[arg(long, default_value_t = 7)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EigsArgs {
    #[arg(long, value_enum)]
    mesh: MeshFlag,
    #[arg(long, default_value_t = 2)]
    refinements: usize,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Generate a named test mesh.
    Gen {
        #[arg(long, value_enum)]
        kind: MeshFlag,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Refine a mesh file.
    Refine {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate the dual-mesh invariants of a mesh file.
    Validate {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Also check stencil constructibility for this family.
        #[arg(long, value_enum)]
        family: Option<FamilyFlag>,
    },
    /// Convert between primal and dual forms.
    Convert {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_parser = ["dual", "primal"])]
        to: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_range(text: &str) -> Result<RangeInclusive<usize>, String> {
    let parts: Vec<&str> = text.split("..").collect();
    match parts.as_slice() {
        [single] => {
            let v = single.trim().parse().map_err(|_| format!("bad refinement {text:?}"))?;
            Ok(v..=v)
        }
        [a, b] => {
            let lo = a.trim().parse().map_err(|_| format!("bad range {text:?}"))?;
            let hi = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad range {text:?}"))?;
            Ok(lo..=hi)
        }
        _ => Err(format!("bad range {text:?}")),
    }
}

/// Key=value presets inserted before the real arguments so that explicit
/// flags take precedence.
fn apply_config(args: Vec<String>) -> Vec<String> {
    let mut out = args.clone();
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return out;
    };
    let Some(path) = args.get(pos + 1) else { return out };
    let Ok(text) = std::fs::read_to_string(path) else {
        eprintln!("warning: cannot read config {path}");
        return out;
    };
    let mut extra = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            let flag = format!("--{}", k.trim());
            if !out.contains(&flag) {
                extra.push(flag);
                extra.push(v.trim().to_string());
            }
        }
    }
    out.extend(extra);
    out
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn report_study(study: &Study, expected: f64, tol: f64) -> bool {
    if let Some(f) = &study.failure {
        eprintln!("study stopped early: {f}");
    }
    let order = study.orders[0];
    let ok = study.is_complete() && (order - expected).abs() <= tol;
    eprintln!(
        "observed order {order:.3} (expected {expected} +- {tol}): {}",
        if ok { "ok" } else { "OUT OF RANGE" }
    );
    ok
}

fn run() -> Result<bool, Box<dyn std::error::Error>> {
    let args = apply_config(std::env::args().collect());
    let cli = Cli::parse_from(args);
    match cli.command {
        Command::Study(a) => {
            let range = parse_range(&a.refinements)?;
            let family = a.family.map(Into::into).unwrap_or_else(|| a.problem.family());
            let study = run_convergence(&a.problem.spec(), a.mesh.kind(a.n), range, family)?;
            write_or_print(&a.out, &study.csv())?;
            let (expected, tol) = a.problem.expected_order();
            Ok(report_study(&study, expected, tol))
        }
        Command::Diff1d(a) => {
            let (reg, irreg) = run_1d_study()?;
            write_or_print(&a.out_reg, &reg.csv())?;
            write_or_print(&a.out_irreg, &irreg.csv())?;
            let reg_ok = reg
                .orders
                .iter()
                .zip([4.0, 4.0, 2.0, 2.0])
                .all(|(&o, e)| (o - e).abs() <= 0.35);
            let irreg_ok = irreg
                .orders
                .iter()
                .zip([4.0, 3.0, 2.0, 1.0])
                .all(|(&o, e)| (o - e).abs() <= 0.35);
            eprintln!("regular orders {:?}, irregular orders {:?}", reg.orders, irreg.orders);
            Ok(reg_ok && irreg_ok)
        }
        Command::Diff2d(a) => {
            let range = parse_range(&a.refinements)?;
            let study = run_diff_study(a.mesh.kind(a.n), range, a.family.into())?;
            write_or_print(&a.out, &study.csv())?;
            let gate = match a.mesh {
                MeshFlag::RegularPlane => study.orders.iter().all(|&o| (o - 2.0).abs() <= 0.35),
                _ => {
                    (study.order("dx") - 2.0).abs() <= 0.35
                        && (study.order("dy") - 2.0).abs() <= 0.35
                        && study.order("dxx") >= 1.0
                        && study.order("dxy") >= 1.0
                        && study.order("dyy") >= 1.0
                }
            };
            eprintln!("orders {:?}", study.orders);
            Ok(gate)
        }
        Command::Eigs(a) => {
            let study = run_eigen_study(a.mesh.kind(a.n), a.refinements)?;
            write_or_print(&a.out, &study.csv())?;
            eprintln!("max real part {:.6e}", study.max_real);
            Ok(study.max_real < 0.0)
        }
        Command::Mesh(cmd) => run_mesh(cmd),
    }
}

fn run_mesh(cmd: MeshCommand) -> Result<bool, Box<dyn std::error::Error>> {
    match cmd {
        MeshCommand::Gen { kind, n, out } => {
            let mesh = generate_test_mesh(kind.kind(n));
            mesh::save(&mesh, &out)?;
            eprintln!(
                "wrote {} vertices, {} faces to {}",
                mesh.vertex_count(),
                mesh.face_count(),
                out.display()
            );
            Ok(true)
        }
        MeshCommand::Refine { input, times, out } => {
            let mesh = mesh::load(&input)?;
            let refined = refine_times(&mesh, times)?;
            mesh::save(&refined, &out)?;
            eprintln!(
                "refined {times}x: {} vertices, {} faces",
                refined.vertex_count(),
                refined.face_count()
            );
            Ok(true)
        }
        MeshCommand::Validate { input, family } => {
            let mesh = mesh::load(&input)?;
            let report = mesh.validate();
            for v in &report.violations {
                eprintln!("violation: {v}");
            }
            let mut ok = report.is_clean();
            if let Some(f) = family {
                let sep = check_separation(&mesh, f.into());
                for (v, reason) in &sep.failures {
                    eprintln!("stencil failure at vertex {v}: {reason}");
                }
                for (a, b, rings) in &sep.pair_rings {
                    eprintln!("defects {a} and {b}: {rings} rings apart");
                }
                ok = ok && sep.is_clean();
            }
            eprintln!("{}", if ok { "mesh is valid" } else { "mesh has problems" });
            Ok(ok)
        }
        MeshCommand::Convert { input, to, out } => {
            let loaded = mesh::load(&input)?;
            let converted: DualMesh = match to.as_str() {
                "dual" => mesh::primal_to_dual(&loaded)?,
                _ => mesh::dual_to_primal(&loaded)?,
            };
            mesh::save(&converted, &out)?;
            eprintln!(
                "converted to {to}: {} vertices, {} faces",
                converted.vertex_count(),
                converted.face_count()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
