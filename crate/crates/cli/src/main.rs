//! `modeset`: confidence sets for the mode from the command line.
//!
//! Exit status: 0 on success, 2 on invalid input or flags, 3 when the chosen
//! method cannot run on the data (for example a sample too small for M1).

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modeset_core::mest::{Bandwidth, DEFAULT_GRID_SIZE};
use modeset_core::multivariate::{scan_region, GridSpec, PointCloud};
use modeset_core::sim::{reports_to_csv, run_coverage_study, widths_to_csv, StudyConfig};
use modeset_core::{
    confidence_set, Method, MethodConfig, ModeError, Probability, RngStream, SplitConfig,
};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Mode(#[from] ModeError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Mode(e) if e.is_infeasible() => 3,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "modeset",
    version,
    about = "Finite-sample confidence sets for the mode of a unimodal distribution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Confidence set for the mode of a univariate sample.
    Ci(CiArgs),
    /// Monte-Carlo coverage and width study on the f_β family.
    Simulate(SimulateArgs),
    /// Membership grid of the mode confidence set for d-dimensional data.
    Mode2d(Mode2dArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Flags shared by every command that runs a univariate method.
#[derive(Args, Debug)]
struct MethodArgs {
    /// Method: m1, m2, m2a (adaptive M2), m3 or m3p (dependence-robust M3).
    #[arg(long, default_value = "m1", value_parser = parse_method)]
    method: Method,
    /// Miscoverage level in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bandwidth for m2.
    #[arg(long)]
    h: Option<f64>,
    /// Smallest bandwidth of the m2a grid (default: half the smallest gap).
    #[arg(long)]
    h_grid_min: Option<f64>,
    /// Largest bandwidth of the m2a grid (default: the sample range).
    #[arg(long)]
    h_grid_max: Option<f64>,
    /// Number of geometric grid points for m2a.
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    h_grid_size: usize,
    /// Exponent ρ > 1 for m3p.
    #[arg(long, default_value_t = 2.0)]
    rho: f64,
    /// Pilot window r for split methods (default ⌈√n⌉ of the pilot half).
    #[arg(long)]
    pilot_r: Option<usize>,
    /// Seed of the sample split for m2, m2a, m3 and m3p.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
}

#[derive(Args, Debug)]
struct CiArgs {
    #[command(flatten)]
    method: MethodArgs,
    /// Whitespace-separated values, one per line; `-` reads stdin.
    #[arg(long)]
    input: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "m1,m2,m3", value_parser = parse_method)]
    methods: Vec<Method>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000")]
    n: Vec<usize>,
    /// Comma-separated smoothness exponents β.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
    beta: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Replications per (method, n, β) cell.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Exponent ρ > 1 for m3p.
    #[arg(long, default_value_t = 2.0)]
    rho: f64,
    /// Report path (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-replication widths to this path.
    #[arg(long)]
    emit_widths: Option<PathBuf>,
    /// Fill the `seconds` column with wall-clock times (output is then not
    /// reproducible byte for byte).
    #[arg(long)]
    timings: bool,
}

#[derive(Args, Debug)]
struct Mode2dArgs {
    #[command(flatten)]
    method: MethodArgs,
    /// Unimodality index γ > 0 of the data.
    #[arg(long)]
    gamma: f64,
    /// Headerless CSV, one point per row; `-` reads stdin.
    #[arg(long)]
    input: PathBuf,
    /// `auto` for the data bounding box, or `lo,hi` per dimension
    /// (`x_lo,x_hi,y_lo,y_hi`).
    #[arg(long = "box", default_value = "auto")]
    bounds: String,
    /// Cells per dimension: one count for all, or one per dimension.
    #[arg(long, value_delimiter = ',', default_value = "64")]
    res: Vec<usize>,
    /// Mask CSV path (default stdout); the JSON summary then goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

fn level(alpha: f64) -> Result<Probability, CliError> {
    Probability::level(alpha)
        .map_err(|_| CliError::Usage(format!("alpha must lie in (0, 1), got {alpha}")))
}

fn check_rho(rho: f64) -> Result<(), CliError> {
    if rho > 1.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("rho must exceed 1, got {rho}")))
    }
}

impl MethodArgs {
    /// Validates flags and builds the method configuration; `m2a` grid
    /// bounds that are not given are filled from `data`.
    fn config(&self, data: &[f64]) -> Result<MethodConfig, CliError> {
        let alpha = level(self.alpha)?;
        let mut split = SplitConfig::with_stream(RngStream::new(self.split_seed, 0));
        if let Some(r) = self.pilot_r {
            if r == 0 {
                return Err(CliError::Usage("--pilot-r must be positive".into()));
            }
            split.pilot_window = Some(r);
        }
        let bandwidth = match self.method {
            Method::M2 => match self.h {
                Some(h) if h > 0.0 && h.is_finite() => Bandwidth::Fixed(h),
                Some(h) => return Err(CliError::Usage(format!("--h must be positive, got {h}"))),
                None => return Err(CliError::Usage("m2 needs --h".into())),
            },
            Method::M2a => self.grid(data)?,
            _ => Bandwidth::Auto {
                size: DEFAULT_GRID_SIZE,
            },
        };
        if self.method == Method::M3p {
            check_rho(self.rho)?;
        }
        Ok(MethodConfig::new(self.method, alpha)
            .with_bandwidth(bandwidth)
            .with_rho(self.rho)
            .with_split(split))
    }

    fn grid(&self, data: &[f64]) -> Result<Bandwidth, CliError> {
        let size = self.h_grid_size;
        if size == 0 {
            return Err(CliError::Usage("--h-grid-size must be positive".into()));
        }
        if self.h_grid_min.is_none() && self.h_grid_max.is_none() {
            return Ok(Bandwidth::Auto { size });
        }
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        let range = sorted[sorted.len() - 1] - sorted[0];
        let min_gap = sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&g| g > 0.0)
            .fold(f64::INFINITY, f64::min);
        let lo = self.h_grid_min.unwrap_or(0.5 * min_gap);
        let hi = self.h_grid_max.unwrap_or(range);
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(CliError::Usage(format!(
                "bandwidth grid needs 0 < min ≤ max, got [{lo}, {hi}]"
            )));
        }
        let grid = if size == 1 {
            vec![lo]
        } else {
            (0..size)
                .map(|k| lo * (hi / lo).powf(k as f64 / (size - 1) as f64))
                .collect()
        };
        Ok(Bandwidth::Grid(grid))
    }
}

fn run_ci(args: &CiArgs) -> Result<(), CliError> {
    // validate flags before touching the input
    args.method.config(&[0.0, 1.0])?;
    let data = io::read_values(&args.input)?;
    let cfg = args.method.config(&data)?;
    let est = confidence_set(&data, &cfg)?;
    if let Some(p) = est.pilot {
        eprintln!("pilot: {p}");
    }
    if let Some(h) = est.bandwidth {
        eprintln!("bandwidth: {h}");
    }
    if est.vacuous {
        eprintln!("note: count condition excluded nothing; set clamped to the breakpoint hull");
    }
    let body = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string(&est.set.report(cfg.alpha.get(), cfg.method.name()))
                .map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("lo,hi\n");
            for iv in est.set.intervals() {
                s.push_str(&format!("{},{}\n", iv.lo, iv.hi));
            }
            s
        }
    };
    io::write_output(None, body.as_bytes())
}

fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let alpha = level(args.alpha)?;
    if args.methods.contains(&Method::M3p) {
        check_rho(args.rho)?;
    }
    let cfg = StudyConfig {
        methods: args.methods.clone(),
        n_values: args.n.clone(),
        beta_values: args.beta.clone(),
        alpha,
        replications: args.reps,
        base_seed: args.seed,
        rho: args.rho,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let reports = run_coverage_study(&cfg)?;
    io::write_output(
        args.out.as_deref(),
        reports_to_csv(&reports, args.timings).as_bytes(),
    )?;
    if let Some(p) = &args.emit_widths {
        io::write_output(Some(p), widths_to_csv(&reports).as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct GridSummary {
    dim: usize,
    points: usize,
    gamma: f64,
    alpha: f64,
    method: &'static str,
    bounds: Vec<[f64; 2]>,
    resolution: Vec<usize>,
    cells: usize,
    in_set: usize,
    member_hull: Option<Vec<[f64; 2]>>,
}

fn parse_bounds(spec: &str, cloud: &PointCloud) -> Result<Vec<(f64, f64)>, CliError> {
    let d = cloud.dim();
    if spec.trim().eq_ignore_ascii_case("auto") {
        return Ok(cloud
            .bounding_box()
            .into_iter()
            .map(|(lo, hi)| {
                // pad degenerate extents so cells have positive size
                let pad = if hi > lo { 0.0 } else { 0.5 };
                (lo - pad, hi + pad)
            })
            .collect());
    }
    let vals = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--box: '{t}' is not a number")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if vals.len() != 2 * d {
        return Err(CliError::Usage(format!(
            "--box needs {} numbers for {d}-dimensional data, got {}",
            2 * d,
            vals.len()
        )));
    }
    let bounds: Vec<(f64, f64)> = vals.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    if bounds
        .iter()
        .any(|&(lo, hi)| lo >= hi || lo.is_nan() || hi.is_nan())
    {
        return Err(CliError::Usage(
            "--box needs lo < hi in every dimension".into(),
        ));
    }
    Ok(bounds)
}

fn run_mode2d(args: &Mode2dArgs) -> Result<(), CliError> {
    if !(args.gamma > 0.0 && args.gamma.is_finite()) {
        return Err(CliError::Usage(format!(
            "--gamma must be positive, got {}",
            args.gamma
        )));
    }
    if args.res.is_empty() || args.res.contains(&0) {
        return Err(CliError::Usage("--res must be positive".into()));
    }
    let rows = io::read_rows(&args.input)?;
    let cloud = PointCloud::new(rows, args.gamma).map_err(|e| CliError::Usage(e.to_string()))?;
    let d = cloud.dim();
    if !(1..=3).contains(&d) {
        return Err(CliError::Usage(format!(
            "grid scans support 1 to 3 dimensions, got {d}"
        )));
    }
    let resolution = match args.res.len() {
        1 => vec![args.res[0]; d],
        k if k == d => args.res.clone(),
        k => {
            return Err(CliError::Usage(format!(
                "--res has {k} entries for {d}-dimensional data"
            )))
        }
    };
    let bounds = parse_bounds(&args.bounds, &cloud)?;
    // a partially given m2a grid is completed from the distances to the box centre
    let centre: Vec<f64> = bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
    let probe = modeset_core::multivariate::radial_transform(&cloud, &centre)?;
    let cfg = args.method.config(&probe)?;
    let grid = GridSpec { bounds, resolution };
    let result = scan_region(&cloud, &grid, &cfg).map_err(|e| match e {
        ModeError::InvalidParameter(m) => CliError::Usage(m),
        other => CliError::Mode(other),
    })?;

    let names = ["x", "y", "z"];
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = names[..d].to_vec();
    header.push("in_set");
    w.write_record(&header)
        .map_err(|e| CliError::Io(e.to_string()))?;
    for (c, m) in result.cells() {
        let mut rec: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        rec.push((m as u8).to_string());
        w.write_record(&rec)
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let mask = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;

    let summary = GridSummary {
        dim: d,
        points: cloud.len(),
        gamma: cloud.gamma(),
        alpha: cfg.alpha.get(),
        method: cfg.method.name(),
        bounds: grid.bounds.iter().map(|&(a, b)| [a, b]).collect(),
        resolution: grid.resolution.clone(),
        cells: grid.cells(),
        in_set: result.count(),
        member_hull: result
            .member_hull()
            .map(|h| h.into_iter().map(|(a, b)| [a, b]).collect()),
    };
    let mut json = serde_json::to_string(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    json.push('\n');
    match &args.out {
        Some(p) => {
            io::write_output(Some(p), &mask)?;
            io::write_output(None, json.as_bytes())
        }
        None => {
            io::write_output(None, &mask)?;
            eprint!("{json}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("MODESET_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!(
                "MODESET_THREADS must be a positive integer, got '{v}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Ci(a) => run_ci(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Mode2d(a) => run_mode2d(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
