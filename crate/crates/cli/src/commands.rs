use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::process::ExitCode;
use std::thread;

use rac_core::gen::{gen_cyclic, gen_single_set, gen_uniform, gen_zipf, GenError};
use rac_core::oracle::Oracle;
use rac_core::run::{simulate, simulate_slice};
use rac_core::stats::{self, RunMeta, Stats, StatsReport};
use rac_core::trace::{self, encode_binary, write_text};
use rac_core::{build_policy, Access, ConfigError, SimConfig, TraceError};
use thiserror::Error;

use crate::args::{
    CompareArgs, Emit, EngineChoice, GenArgs, GenFormat, Pattern, RunArgs, TraceInput,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("malformed trace: {0}")]
    Malformed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Malformed(_) => 3,
        })
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        if e.is_malformed() {
            CliError::Malformed(e.to_string())
        } else {
            CliError::Io(e.to_string())
        }
    }
}

fn open_input(path: &str) -> Result<Box<dyn BufRead>, CliError> {
    if path == "-" {
        return Ok(Box::new(BufReader::new(io::stdin().lock())));
    }
    let file = File::open(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    Ok(Box::new(BufReader::new(file)))
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let result = match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| format!("stdout: {e}"))
        }
    };
    result.map_err(CliError::Io)
}

fn descriptor(input: &TraceInput) -> String {
    let name = if input.trace == "-" {
        "stdin"
    } else {
        &input.trace
    };
    format!("{name} ({})", input.format)
}

fn read_trace(input: &TraceInput) -> Result<Vec<Access>, CliError> {
    let reader = open_input(&input.trace)?;
    Ok(trace::read_all(input.format, reader)?.accesses)
}

fn render_one(report: &StatsReport, emit: Emit) -> String {
    match emit {
        Emit::Human => report.to_human(),
        Emit::Json => report.to_json() + "\n",
        Emit::Csv => stats::to_csv(std::slice::from_ref(report)),
    }
}

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let config = args.geometry.config();
    let policy = args.policy;
    let meta = RunMeta::new(policy, &config, descriptor(&args.input));
    let warmup = args.input.warmup;

    let stats = match args.engine {
        EngineChoice::Engine => {
            let mut engine = build_policy(policy, &config)?;
            let reader = open_input(&args.input.trace)?;
            simulate(
                engine.as_mut(),
                trace::reader(args.input.format, reader),
                warmup,
            )?
        }
        EngineChoice::Oracle => {
            let accesses = read_trace(&args.input)?;
            let mut oracle = Oracle::new(&config, policy)?;
            let mut stats = Stats::default();
            for (i, a) in accesses.iter().enumerate() {
                let outcome = oracle.step(*a);
                if i as u64 >= warmup {
                    stats.record(a, &outcome);
                }
            }
            stats
        }
    };

    let report = stats.finalize(meta);
    write_output(
        args.out.as_deref(),
        render_one(&report, args.emit).as_bytes(),
    )
}

fn run_all(
    config: &SimConfig,
    args: &CompareArgs,
    accesses: &[Access],
) -> Result<Vec<StatsReport>, CliError> {
    let mut engines = Vec::with_capacity(args.policies.len());
    for &p in &args.policies {
        engines.push((p, build_policy(p, config)?));
    }
    let trace_name = descriptor(&args.input);
    let warmup = args.input.warmup;
    let reports = thread::scope(|scope| {
        let handles: Vec<_> = engines
            .into_iter()
            .map(|(p, mut engine)| {
                let meta = RunMeta::new(p, config, trace_name.clone());
                scope
                    .spawn(move || simulate_slice(engine.as_mut(), accesses, warmup).finalize(meta))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("policy run panicked"))
            .collect()
    });
    Ok(reports)
}

pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    if args.policies.len() < 2 {
        return Err(CliError::Usage(
            "compare needs at least two policies in --policies".into(),
        ));
    }
    let config = args.geometry.config();
    config.validate()?;
    let accesses = read_trace(&args.input)?;
    let reports = run_all(&config, &args, &accesses)?;
    let text = match args.emit {
        Emit::Human => stats::compare(&reports),
        Emit::Json => stats::to_json_array(&reports) + "\n",
        Emit::Csv => stats::to_csv(&reports),
    };
    write_output(args.out.as_deref(), text.as_bytes())
}

pub fn gen(args: GenArgs) -> Result<(), CliError> {
    let length =
        usize::try_from(args.length).map_err(|_| CliError::Usage("length too large".into()))?;
    let passes =
        usize::try_from(args.passes).map_err(|_| CliError::Usage("passes too large".into()))?;
    let stream = match args.pattern {
        Pattern::Uniform => gen_uniform(args.n_blocks, length, args.seed, args.block)?,
        Pattern::Zipf => gen_zipf(args.n_blocks, args.s, length, args.seed, args.block)?,
        Pattern::Cyclic => {
            if args.blocks.is_empty() {
                return Err(CliError::Usage("cyclic pattern needs --blocks".into()));
            }
            if args.block == 0 || !args.block.is_power_of_two() {
                return Err(CliError::Usage(format!(
                    "block size {} is not a power of two",
                    args.block
                )));
            }
            let ids: Vec<u64> = args.blocks.iter().map(|a| a / args.block).collect();
            gen_cyclic(&ids, passes, args.block)?
        }
        Pattern::SingleSet => {
            let config = SimConfig::default().block_size(args.block);
            let config = SimConfig {
                num_sets: args.sets,
                ..config
            };
            gen_single_set(&config, args.set, args.distinct, passes)?
        }
    };

    let bytes = match args.fmt {
        GenFormat::Text => {
            let mut buf = Vec::new();
            write_text(&mut buf, &stream.accesses).map_err(|e| CliError::Io(e.to_string()))?;
            buf
        }
        GenFormat::Bin => encode_binary(&stream.accesses),
    };
    write_output(args.out.as_deref(), &bytes)
}
