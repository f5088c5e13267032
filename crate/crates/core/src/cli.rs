//! Command-line front end. Parsing, dispatch and serialization live here so
//! the binary stays a thin wrapper and every command can be driven from
//! tests.
//!
//! Documents are written as `{"command", "config", "result", "caveats",
//! "runtime_ms"}`. `runtime_ms` is `null` unless `--timing` is given, so
//! repeated runs of one configuration are byte-identical.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::dimension::{box_dim_regression, moran_dim, CoverAtScale, DimensionEstimate, DEFAULT_MIN_LEVEL};
use crate::error::{Error, Result};
use crate::ifs::{attractor_cover, log_ratio_resonance, similarity_dim, LinearIfs, LinearMap, Resonance};
use crate::intervals::{Interval, IntervalSet};
use crate::json::{self, format_f64};
use crate::oracle::{eigenvalues, FibonacciPotential, TridiagonalMatrix};
use crate::periodic::{self, PeriodicPointInfo};
use crate::spectrum::{cover_ladder, spectrum_cover, DEFAULT_EDGE_TOL};
use crate::sumset::{check_theorem_rect, minkowski_sum, TheoremReport};
use crate::tracemap::Coupling;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "SQFIB_THREADS";

#[derive(Parser, Debug, Clone)]
#[command(name = "sqfib", version, about = "Fibonacci Hamiltonian band covers, dimensions and sum sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the document here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// Record wall-clock time in `runtime_ms`.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Band cover σ_k ∪ σ_{k+1} of the spectrum.
    Spectrum(SpectrumArgs),
    /// Eigenvalues of a finite truncation, checked against a band cover.
    Oracle(OracleArgs),
    /// Box-counting and Moran dimension estimates of the spectrum.
    Dim(DimArgs),
    /// Sum-set dimension report for one or two couplings.
    Sum(SumArgs),
    /// Periodic orbits p_a, q_a, their multipliers and log-ratio.
    Periodic(PeriodicArgs),
    /// Linear IFS attractor, dimensions and resonance.
    Ifs(IfsArgs),
    /// Map another command over a grid of λ or a.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Oracle(_) => "oracle",
            Command::Dim(_) => "dim",
            Command::Sum(_) => "sum",
            Command::Periodic(_) => "periodic",
            Command::Ifs(_) => "ifs",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_EDGE_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OracleArgs {
    #[arg(long)]
    pub lambda: f64,
    /// Truncation size (Fibonacci numbers keep the word a natural prefix).
    #[arg(long, default_value_t = 610)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub omega0: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Level of the band cover the eigenvalues are compared with.
    #[arg(long, default_value_t = 12)]
    pub level: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub dilation: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DimArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub k: usize,
    /// First level entering the box regression.
    #[arg(long, default_value_t = DEFAULT_MIN_LEVEL)]
    pub k_min: usize,
    #[arg(long, default_value_t = DEFAULT_EDGE_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SumArgs {
    #[arg(long)]
    pub lambda: f64,
    /// Second coupling; defaults to `--lambda` (square operator).
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_EDGE_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PeriodicArgs {
    #[arg(long)]
    pub a: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    MiddleThirds,
    MiddleHalves,
}

impl Preset {
    fn build(self) -> LinearIfs {
        match self {
            Preset::MiddleThirds => LinearIfs::middle_thirds(),
            Preset::MiddleHalves => LinearIfs::middle_halves(),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IfsArgs {
    #[arg(long, value_enum, conflicts_with = "maps")]
    pub preset: Option<Preset>,
    /// A map `ratio:translation`; repeat for each map.
    #[arg(long = "map", value_name = "R:T")]
    pub maps: Vec<String>,
    /// Hull `lo:hi` for custom maps.
    #[arg(long, default_value = "0:1")]
    pub hull: String,
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    /// Shallowest depth in the box regression.
    #[arg(long, default_value_t = 4)]
    pub min_depth: u32,
    /// Also estimate the dimension of the sum with this attractor.
    #[arg(long, value_enum)]
    pub sum_with: Option<Preset>,
    #[arg(long, default_value_t = 1_000_000)]
    pub qmax: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Lambda,
    A,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepTarget {
    Spectrum,
    Oracle,
    Dim,
    Sum,
    Periodic,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    #[arg(long = "run", value_enum)]
    pub target: SweepTarget,
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_LEVEL)]
    pub k_min: usize,
    #[arg(long, default_value_t = 610)]
    pub n: usize,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EDGE_TOL)]
    pub tol: f64,
}

// ---------------------------------------------------------------------------
// results

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub lambda: f64,
    pub level: usize,
    pub band_count_k: usize,
    pub band_count_k1: usize,
    pub cover_length: f64,
    pub sigma_k: IntervalSet,
    pub sigma_k1: IntervalSet,
    pub cover: IntervalSet,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub lambda: f64,
    pub omega0: f64,
    pub size: usize,
    pub cover_level: usize,
    pub dilation: f64,
    pub fraction_in_cover: f64,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimResult {
    pub lambda: f64,
    pub level: usize,
    pub box_estimate: DimensionEstimate,
    pub moran_estimate: Option<DimensionEstimate>,
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicResult {
    pub a: f64,
    pub lambda: f64,
    pub p: PeriodicPointInfo,
    pub q: PeriodicPointInfo,
    pub log_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IfsResult {
    pub depth: u32,
    pub similarity_dim: f64,
    pub box_estimate: DimensionEstimate,
    pub resonance: Option<Resonance>,
    pub sum_box_estimate: Option<DimensionEstimate>,
    pub cover: IntervalSet,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub result: Outcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub param: SweepParam,
    pub target: SweepTarget,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Spectrum(SpectrumResult),
    Oracle(OracleResult),
    Dim(DimResult),
    Sum(Box<TheoremReport>),
    Periodic(Box<PeriodicResult>),
    Ifs(IfsResult),
    Sweep(SweepResult),
}

impl Outcome {
    fn caveats(&self) -> Vec<String> {
        match self {
            Outcome::Spectrum(_) => vec![
                "bands are approximants σ_k; the spectrum is only known to lie in σ_k ∪ σ_{k+1}".into(),
            ],
            Outcome::Oracle(_) => vec![
                "Dirichlet truncation: edge states may fall outside the cover".into(),
            ],
            Outcome::Dim(d) if d.moran_estimate.is_some() => vec![
                "Moran estimate uses a single level and is approximate".into(),
            ],
            Outcome::Dim(_) => vec!["Moran estimate unavailable at this level".into()],
            Outcome::Sum(r) => r.caveats.clone(),
            Outcome::Periodic(_) => vec![
                "p_a and q_a lie on the surface I = a, i.e. coupling λ = 2√a".into(),
            ],
            Outcome::Ifs(_) => Vec::new(),
            Outcome::Sweep(s) => {
                let mut all: Vec<String> = Vec::new();
                for row in &s.rows {
                    for c in row.result.caveats() {
                        if !all.contains(&c) {
                            all.push(c);
                        }
                    }
                }
                all
            }
        }
    }

    /// Scalar columns for sweep tables.
    fn summary(&self) -> Vec<(&'static str, f64)> {
        match self {
            Outcome::Spectrum(s) => vec![
                ("band_count_k", s.band_count_k as f64),
                ("band_count_k1", s.band_count_k1 as f64),
                ("cover_length", s.cover_length),
            ],
            Outcome::Oracle(o) => vec![("fraction_in_cover", o.fraction_in_cover)],
            Outcome::Dim(d) => vec![
                ("box_dim", d.box_estimate.value),
                ("box_stderr", d.box_estimate.slope_stderr),
                ("moran_dim", d.moran_estimate.as_ref().map_or(f64::NAN, |m| m.value)),
            ],
            Outcome::Sum(r) => vec![
                ("hd1", r.hd1_est.value),
                ("hd2", r.hd2_est.value),
                ("sum_dim", r.sum_dim_est.value),
                ("rhs", r.rhs),
                ("gap", r.gap),
            ],
            Outcome::Periodic(p) => vec![
                ("multiplier_p", p.p.multiplier_closed),
                ("multiplier_q", p.q.multiplier_closed),
                ("log_ratio", p.log_ratio),
            ],
            Outcome::Ifs(i) => vec![
                ("similarity_dim", i.similarity_dim),
                ("box_dim", i.box_estimate.value),
            ],
            Outcome::Sweep(_) => Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// commands

fn run_spectrum(args: &SpectrumArgs) -> Result<SpectrumResult> {
    let cover = spectrum_cover(Coupling::new(args.lambda)?, args.k, args.tol)?;
    Ok(SpectrumResult {
        lambda: args.lambda,
        level: args.k,
        band_count_k: cover.sigma_k.len(),
        band_count_k1: cover.sigma_k1.len(),
        cover_length: cover.cover.total_length(),
        sigma_k: cover.sigma_k,
        sigma_k1: cover.sigma_k1,
        cover: cover.cover,
    })
}

fn run_oracle(args: &OracleArgs) -> Result<OracleResult> {
    if args.n == 0 {
        return Err(Error::InvalidArgument("truncation size must be >= 1".into()));
    }
    let coupling = Coupling::new(args.lambda)?;
    let potential = FibonacciPotential::new(args.lambda, args.omega0)?;
    let matrix = TridiagonalMatrix::fibonacci(&potential, args.n)?;
    let ev = eigenvalues(&matrix, args.tol)?;
    let cover = spectrum_cover(coupling, args.level, DEFAULT_EDGE_TOL)?
        .cover
        .dilate(args.dilation);
    let inside = ev.iter().filter(|&&e| cover.contains(e)).count();
    Ok(OracleResult {
        lambda: args.lambda,
        omega0: args.omega0,
        size: args.n,
        cover_level: args.level,
        dilation: args.dilation,
        fraction_in_cover: inside as f64 / ev.len() as f64,
        eigenvalues: ev,
    })
}

/// Box estimate over levels `k_min..=k` with the longest band as the box
/// size, plus Moran on `σ_k`.
pub fn spectrum_dimension(lambda: f64, k: usize, k_min: usize, tol: f64) -> Result<DimResult> {
    if k < k_min + 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 levels: k_min={k_min}, k={k}"
        )));
    }
    let ladder = cover_ladder(Coupling::new(lambda)?, k, tol)?;
    let scales: Vec<f64> = (k_min..=k).map(|j| ladder[j].band_scale()).collect();
    let samples: Vec<CoverAtScale> = (k_min..=k)
        .zip(&scales)
        .map(|(j, &eps)| CoverAtScale { level: j, cover: &ladder[j].cover, eps })
        .collect();
    let box_estimate = box_dim_regression(&samples)?;
    let moran_estimate = moran_dim(&ladder[k].sigma_k).ok().map(|mut m| {
        m.approximate = true;
        m.levels_used = vec![k];
        m
    });
    Ok(DimResult {
        lambda,
        level: k,
        box_estimate,
        moran_estimate,
        scales,
    })
}

fn run_periodic(args: &PeriodicArgs) -> Result<PeriodicResult> {
    Ok(PeriodicResult {
        a: args.a,
        lambda: periodic::coupling_for(args.a),
        p: periodic::analyze_p(args.a)?,
        q: periodic::analyze_q(args.a)?,
        log_ratio: periodic::log_ratio(args.a)?,
    })
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("bad {what} '{s}'")))
    };
    match s.split_once(':') {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => Err(Error::InvalidArgument(format!("{what} must look like A:B, got '{s}'"))),
    }
}

fn build_ifs(args: &IfsArgs) -> Result<LinearIfs> {
    if let Some(p) = args.preset {
        return Ok(p.build());
    }
    if args.maps.is_empty() {
        return Err(Error::InvalidArgument("give --preset or at least one --map".into()));
    }
    let maps = args
        .maps
        .iter()
        .map(|m| {
            let (r, t) = parse_pair(m, "map")?;
            LinearMap::new(r, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = parse_pair(&args.hull, "hull")?;
    LinearIfs::new(maps, Interval::new(lo, hi)?)
}

/// Box estimate over depths, with box size `r_min^depth`.
pub fn ifs_box_estimate(covers: &[(u32, IntervalSet)], r_min: f64) -> Result<DimensionEstimate> {
    let samples: Vec<CoverAtScale> = covers
        .iter()
        .map(|(d, c)| CoverAtScale { level: *d as usize, cover: c, eps: r_min.powi(*d as i32) })
        .collect();
    box_dim_regression(&samples)
}

fn run_ifs(args: &IfsArgs) -> Result<IfsResult> {
    if args.depth < args.min_depth + 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 depths: min_depth={}, depth={}",
            args.min_depth, args.depth
        )));
    }
    let ifs = build_ifs(args)?;
    let depths: Vec<u32> = (args.min_depth..=args.depth).collect();
    let covers: Vec<(u32, IntervalSet)> = depths
        .iter()
        .map(|&d| Ok((d, attractor_cover(&ifs, d)?)))
        .collect::<Result<_>>()?;
    let box_estimate = ifs_box_estimate(&covers, ifs.min_ratio())?;
    let resonance = match ifs.maps() {
        [m1, m2, ..] => Some(log_ratio_resonance(m1.ratio, m2.ratio, args.qmax)?),
        _ => None,
    };
    let sum_box_estimate = match args.sum_with {
        Some(preset) => {
            let other = preset.build();
            let sums: Vec<(u32, IntervalSet)> = covers
                .iter()
                .map(|(d, c)| Ok((*d, minkowski_sum(c, &attractor_cover(&other, *d)?)?)))
                .collect::<Result<_>>()?;
            Some(ifs_box_estimate(&sums, ifs.min_ratio().min(other.min_ratio()))?)
        }
        None => None,
    };
    Ok(IfsResult {
        depth: args.depth,
        similarity_dim: similarity_dim(&ifs)?,
        box_estimate,
        resonance,
        sum_box_estimate,
        cover: covers.last().expect("non-empty depth range").1.clone(),
    })
}

fn run_sum(args: &SumArgs) -> Result<TheoremReport> {
    check_theorem_rect(args.lambda, args.lambda2.unwrap_or(args.lambda), args.k, args.tol)
}

fn sweep_grid(args: &SweepArgs) -> Result<Vec<f64>> {
    if !args.from.is_finite() || !args.to.is_finite() || args.steps < 1 {
        return Err(Error::InvalidArgument("sweep needs finite bounds and steps >= 1".into()));
    }
    if args.steps == 1 {
        return Ok(vec![args.from]);
    }
    Ok((0..args.steps)
        .map(|i| {
            if i + 1 == args.steps {
                args.to
            } else {
                args.from + (args.to - args.from) * i as f64 / (args.steps - 1) as f64
            }
        })
        .collect())
}

fn sweep_point(args: &SweepArgs, value: f64) -> Result<Outcome> {
    let (lambda, a) = match args.param {
        SweepParam::Lambda => (value, (value / 2.0).powi(2)),
        SweepParam::A => (periodic::coupling_for(value), value),
    };
    Ok(match args.target {
        SweepTarget::Spectrum => Outcome::Spectrum(run_spectrum(&SpectrumArgs {
            lambda,
            k: args.k,
            tol: args.tol,
        })?),
        SweepTarget::Oracle => Outcome::Oracle(run_oracle(&OracleArgs {
            lambda,
            n: args.n,
            omega0: 0.0,
            tol: 1e-10,
            level: args.k,
            dilation: 1e-2,
        })?),
        SweepTarget::Dim => Outcome::Dim(spectrum_dimension(lambda, args.k, args.k_min, args.tol)?),
        SweepTarget::Sum => Outcome::Sum(Box::new(run_sum(&SumArgs {
            lambda,
            lambda2: args.lambda2,
            k: args.k,
            tol: args.tol,
        })?)),
        SweepTarget::Periodic => Outcome::Periodic(Box::new(run_periodic(&PeriodicArgs { a })?)),
    })
}

fn run_sweep(args: &SweepArgs) -> Result<SweepResult> {
    let grid = sweep_grid(args)?;
    let rows = grid
        .par_iter()
        .map(|&value| Ok(SweepRow { value, result: sweep_point(args, value)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        param: args.param,
        target: args.target,
        rows,
    })
}

/// Runs the command without serializing it.
pub fn execute(command: &Command) -> Result<Outcome> {
    Ok(match command {
        Command::Spectrum(a) => Outcome::Spectrum(run_spectrum(a)?),
        Command::Oracle(a) => Outcome::Oracle(run_oracle(a)?),
        Command::Dim(a) => Outcome::Dim(spectrum_dimension(a.lambda, a.k, a.k_min, a.tol)?),
        Command::Sum(a) => Outcome::Sum(Box::new(run_sum(a)?)),
        Command::Periodic(a) => Outcome::Periodic(Box::new(run_periodic(a)?)),
        Command::Ifs(a) => Outcome::Ifs(run_ifs(a)?),
        Command::Sweep(a) => Outcome::Sweep(run_sweep(a)?),
    })
}

// ---------------------------------------------------------------------------
// serialization

#[derive(Serialize)]
struct Document<'a> {
    command: &'static str,
    config: &'a Command,
    result: &'a Outcome,
    caveats: Vec<String>,
    runtime_ms: Option<f64>,
}

fn csv_intervals(out: &mut String, label: Option<&str>, set: &IntervalSet) {
    for iv in set {
        if let Some(l) = label {
            out.push_str(l);
            out.push(',');
        }
        out.push_str(&format!("{},{}\n", format_f64(iv.lo), format_f64(iv.hi)));
    }
}

fn to_csv(outcome: &Outcome) -> Result<String> {
    let mut out = String::new();
    match outcome {
        Outcome::Spectrum(s) => {
            out.push_str("set,lo,hi\n");
            csv_intervals(&mut out, Some("sigma_k"), &s.sigma_k);
            csv_intervals(&mut out, Some("sigma_k1"), &s.sigma_k1);
            csv_intervals(&mut out, Some("cover"), &s.cover);
        }
        Outcome::Sum(r) => {
            out.push_str("lo,hi\n");
            csv_intervals(&mut out, None, &r.sum_cover);
        }
        Outcome::Ifs(i) => {
            out.push_str("lo,hi\n");
            csv_intervals(&mut out, None, &i.cover);
        }
        Outcome::Sweep(s) => {
            let header: Vec<&str> = s
                .rows
                .first()
                .map(|r| r.result.summary().iter().map(|(k, _)| *k).collect())
                .unwrap_or_default();
            out.push_str("value");
            for h in &header {
                out.push(',');
                out.push_str(h);
            }
            out.push('\n');
            for row in &s.rows {
                out.push_str(&format_f64(row.value));
                for (_, v) in row.result.summary() {
                    out.push(',');
                    out.push_str(&format_f64(v));
                }
                out.push('\n');
            }
        }
        _ => {
            return Err(Error::InvalidArgument(
                "CSV output covers interval sets and sweep tables only".into(),
            ))
        }
    }
    Ok(out)
}

/// Runs `cli` and renders its document.
pub fn render(cli: &Cli) -> Result<String> {
    let start = Instant::now();
    let outcome = match cli.threads {
        Some(0) => return Err(Error::InvalidArgument("--threads must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| execute(&cli.command))?,
        None => execute(&cli.command)?,
    };
    match cli.format {
        Format::Csv => to_csv(&outcome),
        Format::Json => {
            let doc = Document {
                command: cli.command.name(),
                config: &cli.command,
                caveats: outcome.caveats(),
                result: &outcome,
                runtime_ms: cli.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
            };
            let mut text = json::to_string(&doc)
                .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
            text.push('\n');
            Ok(text)
        }
    }
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomically(path: &Path, contents: &str) -> std::io::Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp.{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

/// Full front end: parse, run, write. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let text = match render(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cli.output {
        Some(path) => write_atomically(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            1
        }
    }
}
