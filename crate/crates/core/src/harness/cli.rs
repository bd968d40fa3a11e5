use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::meshio::{read_mesh, write_mesh};
use super::rates::{compute_rates, read_csv_column};
use super::svg::{convergence_svg, mesh_svg, Series};
use super::{RunConfig, OUT_ENV};
use crate::adaptivity::{afem_loop, Mode, RunRecord};
use crate::benchmarks::ProblemSpec;
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "morley-adapt", version, about = "Adaptive modified Morley FEM for fourth-order plate problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an AFEM study and write CSV, mesh and convergence SVGs.
    Run(RunArgs),
    /// Least-squares and per-interval rates of CSV columns against NDOF.
    Rates(RatesArgs),
    /// Render a mesh file to SVG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Uniform,
    Adaptive,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// square-layer, lshape-singular, vk-square or vk-cusp
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    max_ndof: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file; flags given on the command line take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quad_degree: Option<usize>,
    /// Start Newton from the previous level's solution
    #[arg(long)]
    warm_start: bool,
    /// Use F(I_h Φ) instead of F(Φ) in the von Kármán load
    #[arg(long)]
    nodal_rhs: bool,
    /// Step halving in Newton's method
    #[arg(long)]
    damping: bool,
}

#[derive(Debug, Args)]
struct RatesArgs {
    csv: PathBuf,
    /// Columns to analyse (default: err_energy, err_h1_ih, eta)
    #[arg(long)]
    column: Vec<String>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    mesh: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Run(args) => match build_config(&args) {
            Ok(cfg) => execute_run(&cfg),
            Err(e) => {
                eprintln!("error: {e}\n\nusage: morley-adapt run --problem <P> --mode <uniform|adaptive> [--eps E] [--theta T] [--max-ndof N] [--out DIR]");
                return 2;
            }
        },
        Command::Rates(args) => execute_rates(&args),
        Command::Render(args) => execute_render(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn build_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_kv(&fs::read_to_string(path)?)?;
    }
    if let Some(p) = &args.problem {
        cfg.problem = p.clone();
    }
    if let Some(m) = args.mode {
        cfg.mode = match m {
            ModeArg::Uniform => Mode::Uniform,
            ModeArg::Adaptive => Mode::Adaptive,
        };
    }
    if args.eps.is_some() {
        cfg.eps = args.eps;
    }
    if let Some(t) = args.theta {
        cfg.theta = t;
    }
    if let Some(n) = args.max_ndof {
        cfg.max_ndof = n;
    }
    if let Some(o) = &args.out {
        cfg.out_dir = o.clone();
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(q) = args.quad_degree {
        cfg.quad_degree = q;
    }
    cfg.warm_start |= args.warm_start;
    cfg.nodal_rhs |= args.nodal_rhs;
    cfg.damping |= args.damping;
    if let Some(dir) = std::env::var_os(OUT_ENV) {
        cfg.out_dir = PathBuf::from(dir);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_run_outputs(dir: &Path, record: &RunRecord, von_karman: bool) -> Result<()> {
    record.write_csv(File::create(dir.join("run.csv"))?)?;
    if von_karman {
        record.write_newton_csv(File::create(dir.join("newton.csv"))?)?;
    }
    let ndof = |r: &crate::adaptivity::LevelRecord| r.ndof as f64;
    let mut series = vec![Series {
        label: "eta".into(),
        points: record.levels.iter().map(|r| (ndof(r), r.eta)).collect(),
    }];
    if record.levels.iter().any(|r| r.err_energy.is_some()) {
        series.push(Series {
            label: if von_karman { "H2 error".into() } else { "energy error".into() },
            points: record.levels.iter().filter_map(|r| Some((ndof(r), r.err_energy?))).collect(),
        });
        series.push(Series {
            label: "H1 interpolation error".into(),
            points: record.levels.iter().filter_map(|r| Some((ndof(r), r.err_h1_ih?))).collect(),
        });
    }
    fs::write(dir.join("convergence.svg"), convergence_svg(&record.label, &series, &[-0.5, -0.25]))?;
    Ok(())
}

fn execute_run(cfg: &RunConfig) -> Result<()> {
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    let problem = ProblemSpec::by_name(&cfg.problem, cfg.eps)?;
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join("run.conf"), cfg.to_kv())?;
    let dir = cfg.out_dir.clone();
    let mut last_mesh = None;
    let mut io_error: Option<Error> = None;
    let outcome = afem_loop(&problem, &cfg.afem_options(), |state| {
        let path = dir.join(format!("mesh-{:03}.svg", state.record.level));
        let highlight = if cfg.mode == Mode::Adaptive { state.marked } else { &[] };
        if let Err(e) = fs::write(path, mesh_svg(state.mesh, highlight)) {
            io_error.get_or_insert(e.into());
        }
        last_mesh = Some(state.mesh.clone());
        println!(
            "level {:>3}  ndof {:>8}  eta {:.4e}  error {}",
            state.record.level,
            state.record.ndof,
            state.record.eta,
            state.record.total_error().map(|e| format!("{e:.4e}")).unwrap_or_else(|| "-".into())
        );
    });
    write_run_outputs(&dir, &outcome.record, problem.is_von_karman())?;
    if let Some(mesh) = &last_mesh {
        write_mesh(mesh, File::create(dir.join("mesh-final.txt"))?)?;
    }
    if let Some(e) = io_error {
        return Err(e);
    }
    outcome.into_result().map(|_| ())
}

fn execute_rates(args: &RatesArgs) -> Result<()> {
    let columns = if args.column.is_empty() {
        vec!["err_energy".to_string(), "err_h1_ih".into(), "eta".into()]
    } else {
        args.column.clone()
    };
    for col in &columns {
        let (ndof, values) = read_csv_column(File::open(&args.csv)?, col)?;
        if values.iter().all(Option::is_none) {
            println!("{col}: no data");
            continue;
        }
        let r = compute_rates(&ndof, &values)?;
        let intervals: Vec<String> = r.intervals.iter().map(|s| format!("{s:.3}")).collect();
        println!("{col}: least-squares slope {:.3}; intervals [{}]", r.least_squares, intervals.join(", "));
    }
    Ok(())
}

fn execute_render(args: &RenderArgs) -> Result<()> {
    let mesh = read_mesh(BufReader::new(File::open(&args.mesh)?))?;
    fs::write(&args.out, mesh_svg(&mesh, &[]))?;
    Ok(())
}
