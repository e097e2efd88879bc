/// `println!` that tolerates a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use output::{Format, Output, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_DOMAIN: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "hypgeo", version, about = "Hyperbolic geometry verification suites and experiments")]
struct Cli {
    /// JSON run configuration; replaces the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<Format>,
    /// Embed the generation time in SVG plots.
    #[arg(long, global = true)]
    timestamp: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Right-angled pentagons, hexagons and trirectangles.
    Polygon {
        #[command(subcommand)]
        shape: Shape,
    },
    /// Run the property suites and print a pass/fail matrix.
    VerifyAll(VerifyArgs),
    /// Monte Carlo experiments on random covers.
    Covers {
        #[command(subcommand)]
        cmd: CoversCmd,
    },
    /// Density and curvature profiles of the collar metrics.
    Metrics {
        #[command(subcommand)]
        cmd: MetricsCmd,
    },
    /// Pentagon-to-pentagon maps.
    Maps {
        #[command(subcommand)]
        cmd: MapsCmd,
    },
    /// Mass distribution of collar modes.
    Collar {
        #[command(subcommand)]
        cmd: CollarCmd,
    },
    /// Finite-difference and shooting eigenvalue solvers.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Glued surfaces and eigenvalue bounds.
    Surface {
        #[command(subcommand)]
        cmd: SurfaceCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum Shape {
    /// Pentagon with consecutive sides a, b.
    Pentagon(PentagonArgs),
    /// Hexagon with alternating sides a, b, c.
    Hexagon(HexagonArgs),
    /// Trirectangle from the two sides at the right angle opposite the acute one.
    Trirectangle(PentagonArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PentagonArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct HexagonArgs {
    #[arg(long, required_unless_present = "regular")]
    pub a: Option<f64>,
    #[arg(long, required_unless_present = "regular")]
    pub b: Option<f64>,
    #[arg(long, required_unless_present = "regular")]
    pub c: Option<f64>,
    #[arg(long, conflicts_with_all = ["a", "b", "c"])]
    pub regular: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Restrict to these suites (repeatable).
    #[arg(long)]
    pub suite: Vec<hypgeo::verify::Suite>,
    /// Perturbation size for the pants-map suite.
    #[arg(long, default_value_t = 1e-6)]
    pub delta: f64,
    /// Override every suite's sample count.
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum CoversCmd {
    /// Probability that a word acts without fixed points.
    Fixfree(FixfreeArgs),
    /// Probability that the cover has systole at least eps.
    Systole(SystoleArgs),
    /// Fixed-point and cycle-length histograms of a word.
    Histogram(FixfreeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct FixfreeArgs {
    #[arg(long)]
    pub word: String,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SystoleArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = hypgeo::covers::DEFAULT_MAX_WORD_LEN)]
    pub max_word_len: usize,
}

#[derive(Debug, Subcommand)]
pub enum MetricsCmd {
    /// Densities and curvature across the intermediate collar metric.
    Profile(ProfileArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Inner radius; defaults to exp(-2 pi).
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
}

#[derive(Debug, Subcommand)]
pub enum MapsCmd {
    /// Distortion of the map onto a perturbed pentagon.
    Distortion(DistortionArgs),
    /// The intermediate inequalities for one pentagon pair.
    Bounds(DistortionArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DistortionArgs {
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.5)]
    pub d: f64,
    /// Signed change of d.
    #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Heatmap resolution per axis.
    #[arg(long, default_value_t = 60)]
    pub heatmap: usize,
}

#[derive(Debug, Subcommand)]
pub enum CollarCmd {
    /// Mass ratio of a mode between two widths.
    Mass(MassArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct MassArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub j: u32,
    #[arg(long)]
    pub ell: f64,
    #[arg(long)]
    pub w1: f64,
    #[arg(long)]
    pub w2: f64,
    #[arg(long, value_parser = ["interior", "neumann", "dirichlet"], default_value = "interior")]
    pub boundary: String,
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    /// Lowest eigenvalues of a collar, cross-checked two ways.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub ell: f64,
    #[arg(long)]
    pub w: f64,
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    #[arg(long, default_value_t = 3)]
    pub count: usize,
    #[arg(long, default_value_t = hypgeo::oracle::DEFAULT_INTERVALS)]
    pub intervals: usize,
    #[arg(long)]
    pub two_sided: bool,
}

#[derive(Debug, Subcommand)]
pub enum SurfaceCmd {
    /// Glue a closed surface from a chain of pieces.
    Glue(GlueArgs),
    /// Rayleigh and Cheng bounds as the genus grows.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GlueArgs {
    #[arg(long)]
    pub g: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Largest piece genus; pieces double from 1.
    #[arg(long, default_value_t = 16)]
    pub max_piece_genus: usize,
}

impl Command {
    fn describe(&self) -> (String, serde_json::Value) {
        fn v<T: Serialize>(x: &T) -> serde_json::Value {
            serde_json::to_value(x).unwrap_or(serde_json::Value::Null)
        }
        let (name, params) = match self {
            Command::Polygon { shape: Shape::Pentagon(a) } => ("polygon pentagon", v(a)),
            Command::Polygon { shape: Shape::Hexagon(a) } => ("polygon hexagon", v(a)),
            Command::Polygon { shape: Shape::Trirectangle(a) } => ("polygon trirectangle", v(a)),
            Command::VerifyAll(a) => ("verify-all", v(a)),
            Command::Covers { cmd: CoversCmd::Fixfree(a) } => ("covers fixfree", v(a)),
            Command::Covers { cmd: CoversCmd::Systole(a) } => ("covers systole", v(a)),
            Command::Covers { cmd: CoversCmd::Histogram(a) } => ("covers histogram", v(a)),
            Command::Metrics { cmd: MetricsCmd::Profile(a) } => ("metrics profile", v(a)),
            Command::Maps { cmd: MapsCmd::Distortion(a) } => ("maps distortion", v(a)),
            Command::Maps { cmd: MapsCmd::Bounds(a) } => ("maps bounds", v(a)),
            Command::Collar { cmd: CollarCmd::Mass(a) } => ("collar mass", v(a)),
            Command::Oracle { cmd: OracleCmd::Spectrum(a) } => ("oracle spectrum", v(a)),
            Command::Surface { cmd: SurfaceCmd::Glue(a) } => ("surface glue", v(a)),
            Command::Surface { cmd: SurfaceCmd::Bounds(a) } => ("surface bounds", v(a)),
        };
        (name.to_string(), params)
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn parse<I: IntoIterator<Item = String>>(args: I) -> std::result::Result<Cli, ExitCode> {
    Cli::try_parse_from(args).map_err(|e| {
        use clap::error::ErrorKind;
        let _ = e.print();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
            _ => ExitCode::from(EXIT_USAGE),
        }
    })
}

fn threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("HYPGEO_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("HYPGEO_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("HYPGEO_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let mut cli = match parse(std::env::args()) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(path) = cli.config.take() {
        if cli.command.is_some() {
            return usage("--config replaces the command line; give one or the other");
        }
        let run = match RunConfig::load(&path).and_then(|r| r.to_args()) {
            Ok(a) => a,
            Err(e) => return usage(format!("{}: {e}", path.display())),
        };
        let timestamp = cli.timestamp;
        cli = match parse(run) {
            Ok(c) => c,
            Err(code) => return code,
        };
        cli.timestamp |= timestamp;
    }
    let Some(command) = cli.command else {
        return usage("no command given; see `hypgeo --help`");
    };
    if let Err(msg) = threads() {
        return usage(msg);
    }
    let (name, params) = command.describe();
    let parameters = match params {
        serde_json::Value::Object(m) => m.into_iter().collect(),
        _ => Default::default(),
    };
    let mut formats = if cli.format.is_empty() { output::default_formats() } else { cli.format };
    formats.sort();
    formats.dedup();
    let run = RunConfig {
        command: name,
        parameters,
        seed: cli.seed.unwrap_or_else(output::default_seed),
        output_dir: cli.output_dir.unwrap_or_else(output::default_output_dir),
        formats,
    };
    let mut out = Output::new(run, cli.timestamp);
    let code = match commands::run(command, &mut out) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DOMAIN
        }
    };
    for p in &out.written {
        eprintln!("wrote {}", p.display());
    }
    ExitCode::from(code)
}
