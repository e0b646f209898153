use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rac_core::config::{DEFAULT_BLOCK_SIZE, DEFAULT_DATA_WAYS, DEFAULT_SETS, DEFAULT_TAG_WAYS};
use rac_core::{Case4Mode, PolicyKind, SimConfig, TraceFormat};

#[derive(Debug, Parser)]
#[command(name = "racsim", version, about = "Trace-driven cache simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one policy over a trace and report its statistics.
    Run(RunArgs),
    /// Run several policies over the same trace and tabulate them.
    Compare(CompareArgs),
    /// Write a synthetic trace.
    Gen(GenArgs),
}

pub fn parse_u64(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid number '{s}': {e}"))
}

fn parse_u32(s: &str) -> Result<u32, String> {
    let v = parse_u64(s)?;
    u32::try_from(v).map_err(|_| format!("{s} is out of range"))
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse()
}

fn parse_case4(s: &str) -> Result<Case4Mode, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<TraceFormat, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenFormat {
    Text,
    Bin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pattern {
    Uniform,
    Zipf,
    Cyclic,
    SingleSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineChoice {
    Engine,
    Oracle,
}

#[derive(Debug, Args)]
pub struct Geometry {
    /// Number of sets (power of two).
    #[arg(long, default_value_t = DEFAULT_SETS, value_parser = parse_u32)]
    pub sets: u32,
    /// Tag-directory ways per set.
    #[arg(long = "tag-ways", default_value_t = DEFAULT_TAG_WAYS, value_parser = parse_u32)]
    pub tag_ways: u32,
    /// Data frames per set; also the associativity of the lru/random baselines.
    #[arg(long = "data-ways", default_value_t = DEFAULT_DATA_WAYS, value_parser = parse_u32)]
    pub data_ways: u32,
    /// Block size in bytes (power of two).
    #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE, value_parser = parse_u64)]
    pub block: u64,
    #[arg(long, default_value_t = 0, value_parser = parse_u64)]
    pub seed: u64,
    /// Handling when both the set's tags and the data store are full.
    #[arg(long, default_value = "reuse", value_parser = parse_case4)]
    pub case4: Case4Mode,
}

impl Geometry {
    pub fn config(&self) -> SimConfig {
        SimConfig {
            num_sets: self.sets,
            tag_ways: self.tag_ways,
            data_ways: self.data_ways,
            block_size_bytes: self.block,
            seed: self.seed,
            case4_mode: self.case4,
        }
    }
}

#[derive(Debug, Args)]
pub struct TraceInput {
    /// Trace file, or `-` for standard input.
    #[arg(long)]
    pub trace: String,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    pub format: TraceFormat,
    /// Accesses that warm the cache but are not counted.
    #[arg(long, default_value_t = 0, value_parser = parse_u64)]
    pub warmup: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: TraceInput,
    #[arg(long, default_value = "rac", value_parser = parse_policy)]
    pub policy: PolicyKind,
    #[command(flatten)]
    pub geometry: Geometry,
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    pub emit: Emit,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replay through the reference oracle instead of the engine.
    #[arg(long, value_enum, default_value_t = EngineChoice::Engine, hide = true)]
    pub engine: EngineChoice,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: TraceInput,
    /// Comma-separated policies, at least two.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_policy)]
    pub policies: Vec<PolicyKind>,
    #[command(flatten)]
    pub geometry: Geometry,
    #[arg(long, value_enum, default_value_t = Emit::Human)]
    pub emit: Emit,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub pattern: Pattern,
    /// Output encoding.
    #[arg(long, visible_alias = "format", value_enum, default_value_t = GenFormat::Text)]
    pub fmt: GenFormat,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Byte addresses for the cyclic pattern, comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_u64)]
    pub blocks: Vec<u64>,
    #[arg(long, default_value_t = 1, value_parser = parse_u64)]
    pub passes: u64,
    /// Distinct blocks for uniform and zipf.
    #[arg(long = "n-blocks", default_value_t = 1024, value_parser = parse_u64)]
    pub n_blocks: u64,
    /// Accesses to emit for uniform and zipf.
    #[arg(long, default_value_t = 100_000, value_parser = parse_u64)]
    pub length: u64,
    /// Zipf exponent.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 0, value_parser = parse_u64)]
    pub seed: u64,
    /// Target set for single-set.
    #[arg(long, default_value_t = 0, value_parser = parse_u32)]
    pub set: u32,
    /// Distinct blocks for single-set.
    #[arg(long, default_value_t = 20, value_parser = parse_u64)]
    pub distinct: u64,
    #[arg(long, default_value_t = DEFAULT_SETS, value_parser = parse_u32)]
    pub sets: u32,
    #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE, value_parser = parse_u64)]
    pub block: u64,
}
