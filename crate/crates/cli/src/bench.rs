use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use fastcdf::{
    build_grid_auto, ecdf_dnc, ecdf_fastsum, ecdf_naive, generate_gaussian_sample, kde_dnc,
    kde_fastsum, kde_naive, DeltaVector, RectilinearGrid, Sample,
};

use crate::error::CliError;
use crate::{parse_bandwidth, parse_kernel, Method};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Ecdf,
    Kde,
}

impl Task {
    fn name(self) -> &'static str {
        match self {
            Task::Ecdf => "ecdf",
            Task::Kde => "kde",
        }
    }
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    task: Task,
    #[arg(long, value_delimiter = ',', required = true)]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "laplacian")]
    kernel: String,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    bandwidth: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Naive => "naive",
        Method::Fastsum => "fastsum",
        Method::Dnc => "dnc",
    }
}

/// Grid with about `n` points, equal counts per dimension.
fn grid_like(sample: &Sample, n: usize) -> Result<RectilinearGrid, CliError> {
    let d = sample.dim();
    let side = (n as f64).powf(1.0 / d as f64).round().max(2.0) as usize;
    Ok(build_grid_auto(sample, &vec![side; d])?)
}

/// Median wall-clock time of the algorithm call over `repeats` runs.
fn median_seconds(repeats: usize, mut call: impl FnMut() -> fastcdf::Result<()>) -> Result<f64, CliError> {
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        call()?;
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    Ok(if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    })
}

/// Naive evaluates at the sample points, fastsum on a grid of about `N`
/// points, dnc at the sample points.
pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be positive".into()));
    }
    let kernel = parse_kernel(&args.kernel)?;
    let mut wtr = csv::Writer::from_path(&args.out)?;
    wtr.write_record(["task", "method", "dim", "n", "repeat", "seconds"])?;
    for &d in &args.dims {
        let h = parse_bandwidth(&args.bandwidth, d)?;
        for &n in &args.sizes {
            let sample = generate_gaussian_sample(n, d, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;
            let rows = sample.rows();
            for &method in &args.methods {
                let delta = DeltaVector::all_plus(d);
                let secs = match (args.task, method) {
                    (Task::Ecdf, Method::Naive) => {
                        median_seconds(args.repeats, || ecdf_naive(&sample, &rows, &delta, false).map(drop))?
                    }
                    (Task::Ecdf, Method::Fastsum) => {
                        let g = grid_like(&sample, n)?;
                        median_seconds(args.repeats, || ecdf_fastsum(&sample, &g, &delta).map(drop))?
                    }
                    (Task::Ecdf, Method::Dnc) => {
                        median_seconds(args.repeats, || ecdf_dnc(&sample, true).map(drop))?
                    }
                    (Task::Kde, Method::Naive) => {
                        median_seconds(args.repeats, || kde_naive(&sample, &rows, &kernel, &h).map(drop))?
                    }
                    (Task::Kde, Method::Fastsum) => {
                        let g = grid_like(&sample, n)?;
                        median_seconds(args.repeats, || kde_fastsum(&sample, &g, &kernel, &h).map(drop))?
                    }
                    (Task::Kde, Method::Dnc) => {
                        median_seconds(args.repeats, || kde_dnc(&sample, &kernel, &h).map(drop))?
                    }
                };
                wtr.write_record([
                    args.task.name().to_string(),
                    method_name(method).to_string(),
                    d.to_string(),
                    n.to_string(),
                    args.repeats.to_string(),
                    fastcdf::csvio::format_f64(secs),
                ])?;
                wtr.flush()?;
            }
        }
    }
    Ok(())
}
