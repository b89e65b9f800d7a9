//! Command-line front end. [`run`] returns the process exit code: 0 when
//! every flag passed, 1 when a flag failed or a computation broke down, 2 on
//! bad input.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use starspec_core::assembly::{assemble_with, AssemblyOptions, OuterCondition};
use starspec_core::models::delta_prime_1d_system;

use crate::config::{parse_f64, parse_list, GraphSpec, MeshSpec, ProblemSpec};
use crate::dump::{matrix_to_string, mesh_to_string};
use crate::error::{config_err, Result};
use crate::experiments::*;
use crate::report::ExperimentReport;

pub const OUT_ENV: &str = "STARSPEC_OUT";
const DEFAULT_OUT: &str = "starspec-out";

/// Sections of a TOML run file; every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub solve: SolveConfig,
    pub sweep_theta: MonotonicityConfig,
    pub asymptotics: AsymptoticsConfig,
    pub compare: CompareConfig,
    pub threshold: ThresholdConfig,
    pub weyl: WeylConfig,
    pub converge: ConvergenceConfig,
    pub scale_check: ScaleConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub comparison: ComparisonConfig,
    pub parity: ParityConfig,
    pub corollary: CorollaryConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Ok(toml::from_str(&text)?)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "starspec",
    version,
    about = "Finite-element spectra of δ′-interactions on star graphs"
)]
struct Cli {
    /// TOML run file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides STARSPEC_OUT and the run file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; defaults to the available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Read angles given on the command line in degrees.
    #[arg(long, global = true)]
    degrees: bool,
    /// Also write mesh and matrix dumps (solve only).
    #[arg(long, global = true)]
    dump: bool,
    /// Only print failures.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest eigenvalues of one operator.
    Solve(SolveArgs),
    /// E_n(θ) monotonicity with fold and scale checks.
    SweepTheta(SweepArgs),
    /// Small-angle fit.
    Asymptotics(AsymptoticsArgs),
    /// Comparison inequalities, parity split and the many-eigenvalue construction.
    Compare(CompareArgs),
    /// Cluster below the essential threshold as R grows.
    Threshold(ThresholdArgs),
    /// Trial-function residual quotients.
    Weyl(WeylArgs),
    /// Truncation and refinement ladders.
    Converge(ConvergeArgs),
    /// Coupling rescale against mesh rescale.
    ScaleCheck(ScaleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Operator {
    Star,
    Robin,
    DeltaLine,
    HalfNeumann,
    HalfDirichlet,
    #[value(name = "delta-prime-1d")]
    DeltaPrime1d,
}

#[derive(Debug, Args, Default)]
struct MeshArgs {
    /// Truncation radius.
    #[arg(long = "R", allow_hyphen_values = true)]
    radius: Option<f64>,
    /// Target edge length.
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grading: Option<f64>,
}

impl MeshArgs {
    fn apply(&self, m: &mut MeshSpec) {
        if let Some(r) = self.radius {
            m.radius = r;
        }
        if let Some(h) = self.h {
            m.h = h;
        }
        if let Some(g) = self.grading {
            m.grading = g;
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    operator: Option<Operator>,
    /// line, half-line, broken:<theta> or angles:<a>,<b>,...
    #[arg(long)]
    graph: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    theta: Option<String>,
    /// Half-length of the 1D model.
    #[arg(long = "L")]
    half_length: Option<f64>,
    /// Elements per side of the 1D model.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
    #[arg(long)]
    neumann_outer: bool,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    mesh: MeshArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    thetas: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    scale_alpha: Option<f64>,
    #[command(flatten)]
    mesh: MeshArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Full,
    Reduced,
}

#[derive(Debug, Args)]
struct AsymptoticsArgs {
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long)]
    thetas: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long = "R")]
    radius: Option<f64>,
    #[arg(long)]
    h_ref: Option<f64>,
    #[arg(long)]
    grading: Option<f64>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    thetas: Option<String>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Branch count of the enlarged graph.
    #[arg(long)]
    branches: Option<usize>,
    /// Requested eigenvalue count for the enlarged graph.
    #[arg(long)]
    count: Option<usize>,
    #[command(flatten)]
    mesh: MeshArgs,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long)]
    graph: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    grading: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct WeylArgs {
    #[arg(long)]
    graph: Option<String>,
    /// Wave number; the certified spectral point is k² − 4.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    /// Comma-separated list of n.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    quad: Option<usize>,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[arg(long)]
    graph: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    hs: Option<String>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct ScaleArgs {
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    mesh: MeshArgs,
}

struct Angles {
    degrees: bool,
}

impl Angles {
    fn one(&self, s: &str) -> Result<f64> {
        let v = parse_f64(s)?;
        Ok(if self.degrees { v.to_radians() } else { v })
    }

    fn list(&self, s: &str) -> Result<Vec<f64>> {
        let v = parse_list(s)?;
        Ok(if self.degrees {
            v.into_iter().map(f64::to_radians).collect()
        } else {
            v
        })
    }

    fn graph(&self, s: &str) -> Result<GraphSpec> {
        let mut g: GraphSpec = s.parse()?;
        if self.degrees {
            g.degrees_to_radians();
        }
        Ok(g)
    }
}

fn star_spec(base: &ProblemSpec, graph: Option<GraphSpec>, alpha: Option<f64>) -> ProblemSpec {
    let (g0, a0) = match base {
        ProblemSpec::Star { graph, alpha } => (graph.clone(), *alpha),
        _ => (GraphSpec::Line, -1.0),
    };
    ProblemSpec::Star {
        graph: graph.unwrap_or(g0),
        alpha: alpha.unwrap_or(a0),
    }
}

fn resolve_solve(args: &SolveArgs, mut cfg: SolveConfig, ang: &Angles) -> Result<SolveConfig> {
    let graph = args.graph.as_deref().map(|g| ang.graph(g)).transpose()?;
    let theta = args.theta.as_deref().map(|t| ang.one(t)).transpose()?;
    let (theta0, gamma0) = match cfg.problem {
        ProblemSpec::RobinSector { gamma, theta } | ProblemSpec::DeltaLine { gamma, theta } => (theta, gamma),
        ProblemSpec::HalfNeumann { theta } | ProblemSpec::HalfDirichlet { theta } => (theta, 1.0),
        ProblemSpec::Star {
            graph: GraphSpec::BrokenLine { theta },
            ..
        } => (theta, 1.0),
        _ => (0.3, 1.0),
    };
    let th = theta.unwrap_or(theta0);
    let gamma = args.gamma.unwrap_or(gamma0);
    let kind = args.operator.or(match cfg.problem {
        _ if graph.is_some() || args.alpha.is_some() => Some(Operator::Star),
        _ => None,
    });
    if let Some(op) = kind {
        cfg.problem = match op {
            Operator::Star => {
                let graph = graph.or(theta.map(|t| GraphSpec::BrokenLine { theta: t }));
                star_spec(&cfg.problem, graph, args.alpha)
            }
            Operator::Robin => ProblemSpec::RobinSector { gamma, theta: th },
            Operator::DeltaLine => ProblemSpec::DeltaLine { gamma, theta: th },
            Operator::HalfNeumann => ProblemSpec::HalfNeumann { theta: th },
            Operator::HalfDirichlet => ProblemSpec::HalfDirichlet { theta: th },
            Operator::DeltaPrime1d => {
                let (l0, p0) = match cfg.problem {
                    ProblemSpec::DeltaPrime1d { half_length, points } => (half_length, points),
                    _ => (10.0, 10_000),
                };
                ProblemSpec::DeltaPrime1d {
                    half_length: args.half_length.unwrap_or(l0),
                    points: args.points.unwrap_or(p0),
                }
            }
        };
    } else if theta.is_some() || args.gamma.is_some() {
        cfg.problem = match cfg.problem {
            ProblemSpec::RobinSector { .. } => ProblemSpec::RobinSector { gamma, theta: th },
            ProblemSpec::DeltaLine { .. } => ProblemSpec::DeltaLine { gamma, theta: th },
            ProblemSpec::HalfNeumann { .. } => ProblemSpec::HalfNeumann { theta: th },
            ProblemSpec::HalfDirichlet { .. } => ProblemSpec::HalfDirichlet { theta: th },
            ProblemSpec::Star { alpha, .. } => ProblemSpec::Star {
                graph: GraphSpec::BrokenLine { theta: th },
                alpha,
            },
            p @ ProblemSpec::DeltaPrime1d { .. } => p,
        };
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if args.threshold.is_some() {
        cfg.threshold = args.threshold;
    }
    if args.neumann_outer {
        cfg.neumann_outer = true;
    }
    if let Some(t) = args.tol {
        cfg.solver.tol = t;
    }
    args.mesh.apply(&mut cfg.mesh);
    cfg.validate()?;
    Ok(cfg)
}

fn list_f64(s: &str) -> Result<Vec<f64>> {
    parse_list(s)
}

/// Resolved work for one invocation.
enum Job {
    Solve(SolveConfig),
    Sweep(MonotonicityConfig),
    Asymptotics(AsymptoticsConfig),
    Compare(CompareConfig),
    Threshold(ThresholdConfig),
    Weyl(WeylConfig),
    Converge(ConvergenceConfig),
    Scale(ScaleConfig),
}

fn resolve(cmd: &Command, run: RunConfig, ang: &Angles) -> Result<Job> {
    Ok(match cmd {
        Command::Solve(a) => Job::Solve(resolve_solve(a, run.solve, ang)?),
        Command::SweepTheta(a) => {
            let mut c = run.sweep_theta;
            if let Some(t) = &a.thetas {
                c.thetas = ang.list(t)?;
            }
            if let Some(al) = a.alpha {
                c.alpha = al;
            }
            if let Some(n) = a.n {
                c.n = n;
            }
            if a.scale_alpha.is_some() {
                c.scale_alpha = a.scale_alpha;
            }
            a.mesh.apply(&mut c.mesh);
            c.validate()?;
            Job::Sweep(c)
        }
        Command::Asymptotics(a) => {
            let mut c = match a.preset {
                Some(PresetArg::Full) => AsymptoticsConfig::preset(Preset::Full),
                Some(PresetArg::Reduced) => AsymptoticsConfig::preset(Preset::Reduced),
                None => run.asymptotics,
            };
            if let Some(t) = &a.thetas {
                c.thetas = ang.list(t)?;
            }
            if let Some(al) = a.alpha {
                c.alpha = al;
            }
            if let Some(n) = a.n_max {
                c.n_max = n;
            }
            if let Some(r) = a.radius {
                c.radius = r;
            }
            if let Some(h) = a.h_ref {
                c.h_ref = h;
            }
            if let Some(g) = a.grading {
                c.grading = g;
            }
            c.validate()?;
            Job::Asymptotics(c)
        }
        Command::Compare(a) => {
            let mut c = run.compare;
            if let Some(t) = &a.thetas {
                let t = ang.list(t)?;
                c.comparison.thetas = t.clone();
                c.parity.thetas = t;
            }
            if let Some(n) = a.n_max {
                c.comparison.n_max = n;
            }
            if let Some(b) = a.branches {
                c.corollary.branches = b;
            }
            if let Some(n) = a.count {
                c.corollary.n = n;
            }
            a.mesh.apply(&mut c.comparison.mesh);
            a.mesh.apply(&mut c.parity.mesh);
            c.comparison.validate()?;
            c.parity.validate()?;
            c.corollary.validate()?;
            Job::Compare(c)
        }
        Command::Threshold(a) => {
            let mut c = run.threshold;
            if let Some(g) = &a.graph {
                c.graph = ang.graph(g)?;
            }
            if let Some(al) = a.alpha {
                c.alpha = al;
            }
            if let Some(r) = &a.radii {
                c.radii = list_f64(r)?;
            }
            if let Some(h) = a.h {
                c.h = h;
            }
            if let Some(g) = a.grading {
                c.grading = g;
            }
            if let Some(k) = a.k {
                c.k = k;
            }
            c.validate()?;
            Job::Threshold(c)
        }
        Command::Weyl(a) => {
            let mut c = run.weyl;
            if let Some(g) = &a.graph {
                c.graph = ang.graph(g)?;
            }
            if let Some(k) = a.k {
                c.k = k;
            }
            if let Some(n) = &a.n {
                c.ns = list_f64(n)?;
            }
            if a.a.is_some() {
                c.a = a.a;
            }
            if let Some(q) = a.quad {
                c.quad_points = q;
            }
            c.graph.graph(-1.0)?;
            Job::Weyl(c)
        }
        Command::Converge(a) => {
            let mut c = run.converge;
            if a.graph.is_some() || a.alpha.is_some() {
                let g = a.graph.as_deref().map(|g| ang.graph(g)).transpose()?;
                c.problem = star_spec(&c.problem, g, a.alpha);
            }
            if let Some(r) = &a.radii {
                c.radii = list_f64(r)?;
            }
            if let Some(h) = &a.hs {
                c.hs = list_f64(h)?;
            }
            if let Some(k) = a.k {
                c.k = k;
            }
            c.validate()?;
            Job::Converge(c)
        }
        Command::ScaleCheck(a) => {
            let mut c = run.scale_check;
            if let Some(k) = a.k {
                c.k = k;
            }
            a.mesh.apply(&mut c.mesh);
            c.mesh.params()?;
            Job::Scale(c)
        }
    })
}

fn execute(job: &Job) -> Result<Vec<ExperimentReport>> {
    Ok(match job {
        Job::Solve(c) => vec![solve_report(c)?],
        Job::Sweep(c) => vec![monotonicity_study(c)?],
        Job::Asymptotics(c) => vec![asymptotics_study(c)?],
        Job::Compare(c) => vec![
            comparison_suite(&c.comparison)?,
            parity_study(&c.parity)?,
            corollary_many_eigenvalues(&c.corollary)?,
        ],
        Job::Threshold(c) => vec![threshold_study(c)?],
        Job::Weyl(c) => vec![weyl_study(c)?],
        Job::Converge(c) => vec![convergence_study(c)?],
        Job::Scale(c) => vec![scale_study(c)?],
    })
}

fn dump_solve(cfg: &SolveConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let (a, m) = match cfg.problem {
        ProblemSpec::DeltaPrime1d { half_length, points } => delta_prime_1d_system(half_length, points, -1.0)?,
        _ => {
            let problem = cfg.problem.problem()?;
            let mesh = problem.mesh(&cfg.mesh.params()?)?;
            let path = dir.join("mesh.txt");
            fs::write(&path, mesh_to_string(&mesh))?;
            written.push(path);
            let opts = AssemblyOptions {
                outer: if cfg.neumann_outer {
                    OuterCondition::Neumann
                } else {
                    OuterCondition::Dirichlet
                },
                ..AssemblyOptions::default()
            };
            let sys = assemble_with(&mesh, problem.spec(), &opts)?;
            (sys.a, sys.m)
        }
    };
    for (name, mat) in [("A.txt", &a), ("M.txt", &m)] {
        let path = dir.join(name);
        fs::write(&path, matrix_to_string(mat))?;
        written.push(path);
    }
    Ok(written)
}

fn output_dir(flag: Option<PathBuf>, run: &RunConfig) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| run.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn one_line(e: &dyn std::fmt::Display) -> String {
    let s = e.to_string();
    let first = s.lines().find(|l| !l.trim().is_empty()).unwrap_or("").trim();
    first.strip_prefix("error: ").unwrap_or(first).to_string()
}

/// Parses `argv` (including the program name), runs, writes artifacts and
/// returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    print!("{e}");
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        2
                    } else {
                        0
                    }
                }
                _ => {
                    eprintln!("error: {}", one_line(&e));
                    2
                }
            };
        }
    };
    let run_cfg = match cli.config.as_deref().map(RunConfig::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            return 2;
        }
    };
    let jobs = cli.jobs.or(run_cfg.jobs);
    if jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return 2;
    }
    let out = output_dir(cli.out.clone(), &run_cfg);
    let ang = Angles { degrees: cli.degrees };
    let job = match resolve(&cli.command, run_cfg, &ang) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            return 2;
        }
    };
    if cli.dump && !matches!(job, Job::Solve(_)) {
        eprintln!("error: --dump is only available for solve");
        return 2;
    }
    let result = match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&job)),
            Err(e) => {
                eprintln!("error: cannot start {n} worker threads: {e}");
                return 1;
            }
        },
        None => execute(&job),
    };
    let reports = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            return if e.is_input_error() { 2 } else { 1 };
        }
    };
    match write_all(&reports, &job, &out, cli.dump, cli.quiet) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            return 1;
        }
    }
    if reports.iter().all(ExperimentReport::passed) {
        0
    } else {
        1
    }
}

fn write_all(reports: &[ExperimentReport], job: &Job, out: &Path, dump: bool, quiet: bool) -> Result<()> {
    for r in reports {
        let (csv, json) = r.write_to(out)?;
        if !quiet {
            println!(
                "{}: {} ({} flags) {} {}",
                r.name,
                if r.passed() { "pass" } else { "FAIL" },
                r.flags.len(),
                csv.display(),
                json.display()
            );
        }
        for f in r.failed_flags() {
            eprintln!(
                "{}: flag {} failed: value {} tolerance {} ({})",
                r.name, f.name, f.value, f.tolerance, f.detail
            );
        }
    }
    if let (true, Job::Solve(c)) = (dump, job) {
        for p in dump_solve(c, out)? {
            if !quiet {
                println!("dump: {}", p.display());
            }
        }
    }
    Ok(())
}
