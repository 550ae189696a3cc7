use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fastcdf::csvio::{read_result_file, read_sample_file, write_result_file, write_sample_file};
use fastcdf::dnc::{ecdf_dnc_with, kde_dnc_with};
use fastcdf::{
    build_grid_auto, ecdf_fastsum, ecdf_naive, generate_gaussian_sample, kde_fastsum, kde_naive,
    multilinear_interp, Alignment, Bandwidth, DeltaVector, DncOptions, EvalResult, KernelFamily, KernelSpec,
    RectilinearGrid, Sample, TiePolicy,
};

mod bench;
mod error;
mod plot;

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "fastcdf", version, about = "Fast exact empirical CDFs and kernel density estimates")]
struct Cli {
    /// Worker threads for internal parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded standard normal sample.
    Gen(GenArgs),
    /// Empirical distribution function.
    Ecdf(EcdfArgs),
    /// Kernel density estimate.
    Kde(KdeArgs),
    /// Maximum absolute gap between two result files.
    Compare(CompareArgs),
    /// Timing ladder over methods, dimensions and sizes.
    Bench(bench::BenchArgs),
    /// Log-log line plot of two columns of a CSV file.
    Plot(plot::PlotArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Naive,
    Fastsum,
    Dnc,
}

#[derive(Args, Debug)]
struct Target {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    method: Method,
    /// Grid knots per dimension, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "at_points")]
    grid: Option<Vec<usize>>,
    /// Evaluate at the sample points.
    #[arg(long)]
    at_points: bool,
    /// Interpolate grid values to the sample points (fastsum only).
    #[arg(long, requires = "grid")]
    interp: bool,
    /// Order tied coordinates by input index instead of failing (dnc only).
    #[arg(long)]
    break_ties: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EcdfArgs {
    #[command(flatten)]
    target: Target,
    /// Sign vector, e.g. `1,-1,1`; `+1` gives <=, `-1` gives <.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    delta: Option<Vec<i8>>,
}

#[derive(Args, Debug)]
struct KdeArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value = "laplacian")]
    kernel: String,
    /// Bandwidth per dimension; one value applies to all.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    bandwidth: Vec<f64>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Fail unless every value matches bit for bit.
    #[arg(long, conflicts_with = "tol")]
    exact: bool,
    /// Fail when the gap exceeds this tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

enum Layout {
    Grid(RectilinearGrid),
    Points,
    Interp(RectilinearGrid),
}

fn layout(t: &Target, sample: &Sample) -> Result<Layout, CliError> {
    let grid = |counts: &[usize]| -> Result<RectilinearGrid, CliError> {
        if counts.len() != sample.dim() {
            return Err(CliError::Usage(format!(
                "--grid has {} entries but the sample has {} dimensions",
                counts.len(),
                sample.dim()
            )));
        }
        Ok(build_grid_auto(sample, counts)?)
    };
    match (t.method, &t.grid, t.at_points, t.interp) {
        (Method::Dnc, Some(_), _, _) => Err(CliError::Usage(
            "dnc evaluates only at the sample points; use --at-points".into(),
        )),
        (m, _, _, true) if m != Method::Fastsum => {
            Err(CliError::Usage("--interp applies to the fastsum method only".into()))
        }
        (_, Some(c), _, true) => Ok(Layout::Interp(grid(c)?)),
        (_, Some(c), _, false) => Ok(Layout::Grid(grid(c)?)),
        (Method::Fastsum, None, true, _) => Err(CliError::Usage(
            "fastsum evaluates on a grid; use --grid (with --interp for sample points)".into(),
        )),
        (_, None, true, _) => Ok(Layout::Points),
        (_, None, false, _) => Err(CliError::Usage("choose --grid or --at-points".into())),
    }
}

fn dnc_options(t: &Target) -> Result<DncOptions, CliError> {
    if t.break_ties && t.method != Method::Dnc {
        return Err(CliError::Usage("--break-ties applies to the dnc method only".into()));
    }
    Ok(DncOptions {
        ties: if t.break_ties { TiePolicy::BreakByIndex } else { TiePolicy::Error },
    })
}

fn write_out(t: &Target, mut result: EvalResult, layout: &Layout, sample: &Sample) -> Result<(), CliError> {
    match layout {
        Layout::Grid(g) => {
            // naive results over grid points are query-aligned; the file layout follows the grid
            result.alignment = Alignment::Grid;
            write_result_file(&t.out, &result, Some(g), None)?
        }
        Layout::Points | Layout::Interp(_) => write_result_file(&t.out, &result, None, Some(&sample.rows()))?,
    }
    Ok(())
}

fn run_ecdf(args: &EcdfArgs) -> Result<(), CliError> {
    let t = &args.target;
    let options = dnc_options(t)?;
    let sample = read_sample_file(&t.input)?;
    let d = sample.dim();
    let delta = match &args.delta {
        Some(signs) => DeltaVector::new(signs.clone()).map_err(|e| CliError::Usage(e.to_string()))?,
        None => DeltaVector::all_plus(d),
    };
    if delta.dim() != d {
        return Err(CliError::Usage(format!(
            "--delta has {} entries but the sample has {d} dimensions",
            delta.dim()
        )));
    }
    let layout = layout(t, &sample)?;
    let result = match (&layout, t.method) {
        (Layout::Grid(g), Method::Naive) => ecdf_naive(&sample, &g.points(), &delta, false)?,
        (Layout::Grid(g), _) => ecdf_fastsum(&sample, g, &delta)?,
        (Layout::Interp(g), _) => {
            let on_grid = ecdf_fastsum(&sample, g, &delta)?;
            multilinear_interp(g, &on_grid, &sample.rows())?
        }
        (Layout::Points, Method::Naive) => ecdf_naive(&sample, &sample.rows(), &delta, false)?,
        // strict dominance below x_j; the point itself counts only when
        // every coordinate comparison is non-strict
        (Layout::Points, _) => ecdf_dnc_with(&sample, delta.is_all_plus(), options)?,
    };
    write_out(t, result, &layout, &sample)
}

fn supports(method: Method, kernel: &KernelSpec) -> bool {
    match method {
        Method::Naive => true,
        Method::Fastsum => matches!(
            kernel.family,
            KernelFamily::Laplacian | KernelFamily::Matern32Additive | KernelFamily::Uniform
        ),
        Method::Dnc => matches!(kernel.family, KernelFamily::Laplacian | KernelFamily::Matern32Additive),
    }
}

pub fn parse_bandwidth(values: &[f64], d: usize) -> Result<Bandwidth, CliError> {
    let h = match values.len() {
        1 => vec![values[0]; d],
        n if n == d => values.to_vec(),
        n => {
            return Err(CliError::Usage(format!(
                "--bandwidth has {n} entries but the sample has {d} dimensions"
            )))
        }
    };
    Bandwidth::diagonal(h).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn parse_kernel(spec: &str) -> Result<KernelSpec, CliError> {
    spec.parse().map_err(|e: fastcdf::Error| CliError::Usage(e.to_string()))
}

fn run_kde(args: &KdeArgs) -> Result<(), CliError> {
    let t = &args.target;
    let options = dnc_options(t)?;
    let kernel = parse_kernel(&args.kernel)?;
    if !supports(t.method, &kernel) {
        return Err(CliError::Usage(format!(
            "kernel {kernel} is not available with the {:?} method",
            t.method
        )));
    }
    let sample = read_sample_file(&t.input)?;
    let h = parse_bandwidth(&args.bandwidth, sample.dim())?;
    let layout = layout(t, &sample)?;
    let result = match (&layout, t.method) {
        (Layout::Grid(g), Method::Naive) => kde_naive(&sample, &g.points(), &kernel, &h)?,
        (Layout::Grid(g), _) => kde_fastsum(&sample, g, &kernel, &h)?,
        (Layout::Interp(g), _) => {
            let on_grid = kde_fastsum(&sample, g, &kernel, &h)?;
            multilinear_interp(g, &on_grid, &sample.rows())?
        }
        (Layout::Points, Method::Naive) => kde_naive(&sample, &sample.rows(), &kernel, &h)?,
        (Layout::Points, _) => kde_dnc_with(&sample, &kernel, &h, options)?,
    };
    write_out(t, result, &layout, &sample)
}

/// Exit status 1 on a breach.
fn run_compare(args: &CompareArgs) -> Result<bool, CliError> {
    let a = read_result_file(&args.a)?;
    let b = read_result_file(&args.b)?;
    if a.values.len() != b.values.len() {
        return Err(CliError::Mismatch(format!(
            "{} has {} rows, {} has {}",
            args.a.display(),
            a.values.len(),
            args.b.display(),
            b.values.len()
        )));
    }
    if let Some(row) = a.coords.iter().zip(&b.coords).position(|(x, y)| x != y) {
        return Err(CliError::Mismatch(format!("coordinates differ at row {}", row + 1)));
    }
    let gap = fastcdf::max_abs_diff(&a.values, &b.values);
    let differing = a.values.iter().zip(&b.values).filter(|(x, y)| x != y).count();
    println!("rows {} max_abs_gap {gap:e} differing {differing}", a.values.len());
    let ok = if args.exact {
        differing == 0
    } else if let Some(tol) = args.tol {
        gap <= tol
    } else {
        true
    };
    Ok(ok)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    match cli.command {
        Command::Gen(a) => {
            let s = generate_gaussian_sample(a.n, a.dim, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
            write_sample_file(&a.out, &s, false)?;
        }
        Command::Ecdf(a) => run_ecdf(&a)?,
        Command::Kde(a) => run_kde(&a)?,
        Command::Compare(a) => {
            if !run_compare(&a)? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Bench(a) => bench::run(&a)?,
        Command::Plot(a) => plot::run(&a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fastcdf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
