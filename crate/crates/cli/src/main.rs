//! `latentmix` command-line tool.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latentmix::csv::{amplification_table, latent_stats_table, num, toy2d_table, Table};
use latentmix::{
    apply_region_offset, bias_growth_experiment, centroid, make_biased_set, mean_adjusted_interp,
    read_latents, toy2d_paths, write_latents, BiasSpec, Dtype, ExperimentConfig, InterpMethod,
    Latent, LatentSet, LatentShape, LatfError, MeanMode, NormMode, Region, SeedSpec, Toy2dPaths,
    Weights,
};

/// Weights given on the command line may be off from 1 by at most this much.
const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "latentmix", version, about = "Interpolate diffusion latents and measure bias amplification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolate the latents of a LATF file with the given weights.
    Interp(InterpArgs),
    /// Uniform-weight interpolation of (a prefix of) a LATF file.
    Centroid(CentroidArgs),
    /// Run the bias-growth experiment on synthetic latents and emit CSV.
    Simulate(SimulateArgs),
    /// Emit the two-input toy interpolation paths as CSV.
    Toy2d(Toy2dArgs),
    /// Per-latent norms and channel means of a LATF file as CSV.
    Diagnose(DiagnoseArgs),
    /// Add per-channel offsets inside a spatial region of every latent.
    Offset(OffsetArgs),
    /// Write synthetic bias-plus-noise latents to a LATF file.
    Sample(SampleArgs),
}

#[derive(Args)]
struct MethodArgs {
    /// Norm treatment: lin, fix or nin.
    #[arg(long = "norm", value_parser = parse_norm, default_value = "fix")]
    norm: NormMode,
    /// Mean adjustment: 0 (none), m (global mean) or chm (channel means).
    #[arg(long = "mean", value_parser = parse_mean, default_value = "0")]
    mean: MeanMode,
}

impl MethodArgs {
    fn method(&self) -> Result<InterpMethod, CliError> {
        InterpMethod::new(self.norm, self.mean).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DtypeArg {
    F32,
    F64,
}

impl From<DtypeArg> for Dtype {
    fn from(d: DtypeArg) -> Self {
        match d {
            DtypeArg::F32 => Dtype::F32,
            DtypeArg::F64 => Dtype::F64,
        }
    }
}

#[derive(Args)]
struct InterpArgs {
    /// Input LATF file.
    #[arg(long, short)]
    input: PathBuf,
    /// Comma-separated weights, one per latent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    weights: Vec<f64>,
    #[command(flatten)]
    method: MethodArgs,
    /// Output LATF file for the interpolated latent.
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "f64")]
    dtype: DtypeArg,
}

#[derive(Args)]
struct CentroidArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Use only the first N latents.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "f64")]
    dtype: DtypeArg,
}

#[derive(Args)]
struct SimulateArgs {
    /// Latent shape as CxHxW.
    #[arg(long, value_parser = parse_shape, default_value = "4x64x64")]
    shape: LatentShape,
    /// Constant bias added to every element.
    #[arg(long, default_value_t = 0.02, allow_hyphen_values = true)]
    bias: f64,
    /// Per-channel biases; overrides --bias.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bias_channels: Option<Vec<f64>>,
    /// Set sizes, comma-separated and strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "2,8,32,48,64,96")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long)]
    seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Toy2dArgs {
    #[arg(long, default_value_t = 101)]
    steps: usize,
    /// First input as x,y.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z1: Option<Vec<f64>>,
    /// Second input as x,y.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z2: Option<Vec<f64>>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OffsetArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    /// Offset magnitude: channel 0 gets −b, channel 1 gets +b.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Explicit per-channel offsets; overrides --b.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    offsets: Option<Vec<f64>>,
    /// Row range start:end (half-open). Defaults to the top quarter.
    #[arg(long, value_parser = parse_range)]
    rows: Option<std::ops::Range<usize>>,
    /// Column range start:end (half-open). Defaults to the full width.
    #[arg(long, value_parser = parse_range)]
    cols: Option<std::ops::Range<usize>>,
    #[arg(long, value_enum, default_value = "f64")]
    dtype: DtypeArg,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_parser = parse_shape, default_value = "4x64x64")]
    shape: LatentShape,
    /// Number of latents.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    bias: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bias_channels: Option<Vec<f64>>,
    #[arg(long)]
    seed: u64,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "f64")]
    dtype: DtypeArg,
}

fn parse_norm(s: &str) -> Result<NormMode, String> {
    s.parse().map_err(|e: latentmix::Error| e.to_string())
}

fn parse_mean(s: &str) -> Result<MeanMode, String> {
    s.parse().map_err(|e: latentmix::Error| e.to_string())
}

fn parse_shape(s: &str) -> Result<LatentShape, String> {
    s.parse()
        .map_err(|_| format!("`{s}` is not a shape of the form CxHxW with positive dimensions"))
}

fn parse_range(s: &str) -> Result<std::ops::Range<usize>, String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}` is not a range start:end"))?;
    let a = a.trim().parse().map_err(|_| format!("bad range start in `{s}`"))?;
    let b = b.trim().parse().map_err(|_| format!("bad range end in `{s}`"))?;
    Ok(a..b)
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Math(latentmix::Error),
    File(LatfError),
    Io(io::Error),
}

impl From<latentmix::Error> for CliError {
    fn from(e: latentmix::Error) -> Self {
        CliError::Math(e)
    }
}

impl From<LatfError> for CliError {
    fn from(e: LatfError) -> Self {
        CliError::File(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn bias_from(bias: f64, channels: Option<Vec<f64>>) -> BiasSpec {
    match channels {
        Some(v) => BiasSpec::PerChannel(v),
        None if bias == 0.0 => BiasSpec::None,
        None => BiasSpec::GlobalConstant(bias),
    }
}

fn emit(table: &Table, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => table.write_to(BufWriter::new(File::create(path)?))?,
        None => table.write_to(io::stdout().lock())?,
    }
    Ok(())
}

/// `source,weight,norm` rows for the inputs followed by the result.
fn norm_report(set: &LatentSet, weights: &Weights, result: &Latent) -> Table {
    let mut table = Table::new(["source", "weight", "norm"]);
    for (k, (w, z)) in weights.as_slice().iter().zip(set).enumerate() {
        table.push(vec![format!("input{k}"), num(*w), num(z.norm())]);
    }
    table.push(vec!["output".into(), String::new(), num(result.norm())]);
    table
}

fn write_single(path: &Path, z: Latent, dtype: DtypeArg) -> Result<(), CliError> {
    write_latents(path, &LatentSet::new(vec![z])?, dtype.into())?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Interp(args) => {
            let method = args.method.method()?;
            let set = read_latents(&args.input)?;
            let weights = Weights::normalized_within(args.weights, WEIGHT_SUM_TOLERANCE)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            if weights.len() != set.len() {
                return Err(CliError::Usage(format!(
                    "{} weights given for {} latents",
                    weights.len(),
                    set.len()
                )));
            }
            let result = mean_adjusted_interp(&set, &weights, method)?;
            emit(&norm_report(&set, &weights, &result), None)?;
            write_single(&args.output, result, args.dtype)
        }
        Command::Centroid(args) => {
            let method = args.method.method()?;
            let mut set = read_latents(&args.input)?;
            if let Some(n) = args.n {
                if n == 0 || n > set.len() {
                    return Err(CliError::Usage(format!(
                        "--n {n} out of range for a file with {} latents",
                        set.len()
                    )));
                }
                set = set.prefix(n)?;
            }
            let result = centroid(&set, method)?;
            let weights = Weights::uniform(set.len())?;
            emit(&norm_report(&set, &weights, &result), None)?;
            write_single(&args.output, result, args.dtype)
        }
        Command::Simulate(args) => {
            let config = ExperimentConfig {
                shape: args.shape,
                bias: bias_from(args.bias, args.bias_channels),
                n_values: args.n,
                trials: args.trials,
                methods: vec![args.method.method()?],
                seed: args.seed,
            };
            let reports = bias_growth_experiment(&config).map_err(|e| match e {
                latentmix::Error::InvalidConfig(_) | latentmix::Error::InvalidBias(_) => {
                    CliError::Usage(e.to_string())
                }
                other => CliError::Math(other),
            })?;
            emit(&amplification_table(&reports), args.output.as_deref())
        }
        Command::Toy2d(args) => {
            let pair = |v: Option<Vec<f64>>, default: [f64; 2]| match v.as_deref() {
                None => Ok(default),
                Some([x, y]) => Ok([*x, *y]),
                Some(_) => Err(CliError::Usage("toy inputs take exactly two values x,y".into())),
            };
            let z1 = pair(args.z1, Toy2dPaths::DEFAULT_Z1)?;
            let z2 = pair(args.z2, Toy2dPaths::DEFAULT_Z2)?;
            if args.steps < 2 {
                return Err(CliError::Usage("--steps must be at least 2".into()));
            }
            let paths = toy2d_paths(z1, z2, args.steps)?;
            emit(&toy2d_table(&paths), args.output.as_deref())
        }
        Command::Diagnose(args) => {
            let set = read_latents(&args.input)?;
            emit(&latent_stats_table(&set), args.output.as_deref())
        }
        Command::Offset(args) => {
            let set = read_latents(&args.input)?;
            let shape = set.shape();
            let offsets = match (args.offsets, args.b) {
                (Some(o), _) => o,
                (None, Some(b)) => match BiasSpec::balanced_region(shape, b)? {
                    BiasSpec::RegionOffset { offsets, .. } => offsets,
                    _ => unreachable!(),
                },
                (None, None) => return Err(CliError::Usage("one of --b or --offsets is required".into())),
            };
            let default = Region::top_quarter(shape);
            let bias = BiasSpec::RegionOffset {
                region: Region::new(args.rows.unwrap_or(default.rows), args.cols.unwrap_or(default.cols)),
                offsets,
            };
            let out = set
                .iter()
                .map(|z| apply_region_offset(z, &bias))
                .collect::<Result<Vec<_>, _>>()?;
            write_latents(&args.output, &LatentSet::new(out)?, args.dtype.into())?;
            Ok(())
        }
        Command::Sample(args) => {
            let bias = bias_from(args.bias, args.bias_channels);
            let set = make_biased_set(args.n, args.shape, &bias, SeedSpec::new(args.seed, 0))?;
            write_latents(&args.output, &set, args.dtype.into())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, msg) = match err {
                CliError::Usage(m) => (2, format!("usage error: {m}")),
                CliError::Math(e) => (1, format!("error: {}: {e}", e.name())),
                CliError::File(e) => (1, format!("error: {}: {e}", e.name())),
                CliError::Io(e) => (1, format!("error: Io: {e}")),
            };
            let _ = writeln!(io::stderr(), "{msg}");
            ExitCode::from(code)
        }
    }
}
