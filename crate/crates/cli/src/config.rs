//! Flag and config-file handling.
//!
//! Every option can come from the command line or from a JSON config file
//! (`--config`); the command line wins field by field. Thresholds have no
//! defaults: a missing one is a usage error, never a silent assumption.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use epimine::fed::Semantics;
use epimine::harness::{benchmark, GeneratorSpec};
use epimine::sid::MinConf;
use epimine::time::{Granularity, Periodicity, TimestampFormat};
use serde::{Deserialize, Deserializer};

/// A command failure carrying its process exit code: 1 for usage or
/// configuration problems, 2 for data problems.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
}

/// The JSON config file: any flag, spelled in camelCase. Numeric JSON
/// values are accepted wherever a flag takes a number-like token.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct FileConfig {
    #[serde(default, deserialize_with = "path_or_list")]
    input: Option<Vec<PathBuf>>,
    out_dir: Option<PathBuf>,
    format: Option<String>,
    periodicity: Option<String>,
    granularity: Option<String>,
    #[serde(default, deserialize_with = "string_or_number")]
    min_conf: Option<String>,
    max_len: Option<u32>,
    window: Option<u32>,
    semantics: Option<String>,
    n: Option<u32>,
    seed: Option<u64>,
    days: Option<u32>,
    kind: Option<String>,
    #[serde(default, deserialize_with = "token_list")]
    values: Option<Vec<String>>,
    spec: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn string_or_number<'de, D: Deserializer<'de>>(de: D) -> Result<Option<String>, D::Error> {
    use serde::de::Error;
    match Option::<serde_json::Value>::deserialize(de)? {
        None => Ok(None),
        Some(serde_json::Value::String(text)) => Ok(Some(text)),
        Some(serde_json::Value::Number(number)) => Ok(Some(number.to_string())),
        Some(other) => Err(D::Error::custom(format!("expected a string or number, got {other}"))),
    }
}

fn token_list<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Vec<String>>, D::Error> {
    use serde::de::Error;
    let unexpected = |v: &serde_json::Value| {
        D::Error::custom(format!("expected a string or number, got {v}"))
    };
    match Option::<serde_json::Value>::deserialize(de)? {
        None => Ok(None),
        Some(serde_json::Value::String(text)) => Ok(Some(split_tokens(&text))),
        Some(serde_json::Value::Array(items)) => items
            .iter()
            .map(|item| match item {
                serde_json::Value::String(text) => Ok(text.clone()),
                serde_json::Value::Number(number) => Ok(number.to_string()),
                other => Err(unexpected(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
        Some(other) => Err(D::Error::custom(format!("expected a string or list, got {other}"))),
    }
}

fn path_or_list<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Vec<PathBuf>>, D::Error> {
    use serde::de::Error;
    match Option::<serde_json::Value>::deserialize(de)? {
        None => Ok(None),
        Some(serde_json::Value::String(text)) => Ok(Some(vec![PathBuf::from(text)])),
        Some(serde_json::Value::Array(items)) => items
            .iter()
            .map(|item| match item {
                serde_json::Value::String(text) => Ok(PathBuf::from(text)),
                other => Err(D::Error::custom(format!("expected a path string, got {other}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
        Some(other) => Err(D::Error::custom(format!("expected a path or list, got {other}"))),
    }
}

fn split_tokens(raw: &str) -> Vec<String> {
    raw.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::to_string).collect()
}

fn require<T>(what: &str, value: Option<T>) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("{what} is required (flag or config file)")))
}

fn parse_token<T: FromStr>(what: &str, token: &str) -> Result<T, Failure>
where
    T::Err: Display,
{
    token.parse().map_err(|e| Failure::usage(format!("{what}: {e}")))
}

fn parse_tokens<T: FromStr>(what: &str, tokens: &[String]) -> Result<Vec<T>, Failure>
where
    T::Err: Display,
{
    tokens.iter().map(|token| parse_token(what, token)).collect()
}

fn positive(what: &str, value: Option<u32>) -> Result<Option<u32>, Failure> {
    if value == Some(0) {
        return Err(Failure::usage(format!("{what} must be positive")));
    }
    Ok(value)
}

/// Options shared by every file-reading command.
#[derive(Args, Debug)]
pub struct IoArgs {
    /// JSON config file that may supply any flag; explicit flags win.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Input file; repeat the flag to concatenate several.
    #[arg(long, value_name = "FILE")]
    input: Vec<PathBuf>,
    /// Directory for result files and the run manifest.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

impl IoArgs {
    fn resolve(self) -> Result<(FileConfig, Vec<PathBuf>, PathBuf), Failure> {
        let file = load_config(self.config.as_deref())?;
        let inputs = if self.input.is_empty() { file.input.clone() } else { Some(self.input) };
        let inputs = require("--input", inputs.filter(|paths| !paths.is_empty()))?;
        let out_dir = self.out_dir.or_else(|| file.out_dir.clone());
        Ok((file, inputs, out_dir.unwrap_or_else(|| PathBuf::from("."))))
    }
}

#[derive(Args, Debug)]
pub struct CleanArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Timestamp format of the raw log: auto, mdy or iso.
    #[arg(long)]
    format: Option<String>,
}

pub struct ResolvedClean {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub format: TimestampFormat,
}

impl CleanArgs {
    pub fn resolve(self) -> Result<ResolvedClean, Failure> {
        let (file, inputs, out_dir) = self.io.resolve()?;
        let token = self.format.or(file.format).unwrap_or_else(|| "auto".into());
        Ok(ResolvedClean { inputs, out_dir, format: parse_token("--format", &token)? })
    }
}

#[derive(Args, Debug)]
pub struct FoldArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Period to fold over: daily or weekly.
    #[arg(long)]
    periodicity: Option<String>,
    /// Time-point resolution: minute or second.
    #[arg(long)]
    granularity: Option<String>,
    /// Period count N; default is the inclusive span of the input.
    #[arg(long)]
    n: Option<u32>,
}

pub struct ResolvedFold {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub periodicity: Periodicity,
    pub granularity: Granularity,
    pub n_override: Option<u32>,
}

fn parse_period(
    periodicity: Option<String>,
    granularity: Option<String>,
) -> Result<(Periodicity, Granularity), Failure> {
    let periodicity = match periodicity {
        Some(token) => parse_token("--periodicity", &token)?,
        None => Periodicity::Daily,
    };
    let granularity = match granularity {
        Some(token) => parse_token("--granularity", &token)?,
        None => Granularity::Minute,
    };
    Ok((periodicity, granularity))
}

impl FoldArgs {
    pub fn resolve(self) -> Result<ResolvedFold, Failure> {
        let (file, inputs, out_dir) = self.io.resolve()?;
        let (periodicity, granularity) =
            parse_period(self.periodicity.or(file.periodicity), self.granularity.or(file.granularity))?;
        let n_override = positive("--n", self.n.or(file.n))?;
        Ok(ResolvedFold { inputs, out_dir, periodicity, granularity, n_override })
    }
}

#[derive(Args, Debug)]
pub struct SiArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Confidence threshold as a percent, up to 2 decimals.
    #[arg(long)]
    min_conf: Option<String>,
    /// Span cap in granularity units.
    #[arg(long)]
    max_len: Option<u32>,
}

pub struct ResolvedSi {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub min_conf: MinConf,
    pub max_len: u32,
}

impl SiArgs {
    pub fn resolve(self) -> Result<ResolvedSi, Failure> {
        let (file, inputs, out_dir) = self.io.resolve()?;
        let min_conf = parse_token("--min-conf", &require("--min-conf", self.min_conf.or(file.min_conf))?)?;
        let max_len = require("--max-len", self.max_len.or(file.max_len))?;
        Ok(ResolvedSi { inputs, out_dir, min_conf, max_len })
    }
}

#[derive(Args, Debug)]
pub struct AllsiArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Confidence threshold as a percent, up to 2 decimals.
    #[arg(long)]
    min_conf: Option<String>,
}

pub struct ResolvedAllsi {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub min_conf: MinConf,
}

impl AllsiArgs {
    pub fn resolve(self) -> Result<ResolvedAllsi, Failure> {
        let (file, inputs, out_dir) = self.io.resolve()?;
        let min_conf = parse_token("--min-conf", &require("--min-conf", self.min_conf.or(file.min_conf))?)?;
        Ok(ResolvedAllsi { inputs, out_dir, min_conf })
    }
}

#[derive(Args, Debug)]
pub struct FedArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Sequential window length in granularity units.
    #[arg(long)]
    window: Option<u32>,
    /// Window rule: s (starts within W) or e (starts and ends within W).
    #[arg(long)]
    semantics: Option<String>,
}

pub struct ResolvedFed {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub window: u32,
    pub semantics: Semantics,
}

impl FedArgs {
    pub fn resolve(self) -> Result<ResolvedFed, Failure> {
        let (file, inputs, out_dir) = self.io.resolve()?;
        let window = require("--window", self.window.or(file.window))?;
        let semantics =
            parse_token("--semantics", &require("--semantics", self.semantics.or(file.semantics))?)?;
        Ok(ResolvedFed { inputs, out_dir, window, semantics })
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// JSON config file that may supply any flag; explicit flags win.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for result files and the run manifest.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Generator description as JSON; default is the built-in benchmark.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// RNG seed; overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Day count; overrides the spec's days.
    #[arg(long)]
    days: Option<u32>,
}

pub struct ResolvedGen {
    pub out_dir: PathBuf,
    pub spec_path: Option<PathBuf>,
    pub spec: GeneratorSpec,
}

impl GenArgs {
    pub fn resolve(self) -> Result<ResolvedGen, Failure> {
        let file = load_config(self.config.as_deref())?;
        let out_dir = self.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from("."));
        let spec_path = self.spec.or(file.spec);
        let seed = self.seed.or(file.seed);
        let mut spec = match (&spec_path, seed) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<GeneratorSpec>(&text)
                    .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
            }
            (None, Some(seed)) => benchmark(seed),
            (None, None) => return Err(Failure::usage("gen needs --spec or --seed")),
        };
        if let Some(seed) = seed {
            spec.seed = seed;
        }
        if let Some(days) = self.days.or(file.days) {
            spec.days = days;
        }
        Ok(ResolvedGen { out_dir, spec_path, spec })
    }
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    io: IoArgs,
    /// What to sweep: maxlen, minconf, compare or window.
    #[arg(long)]
    kind: Option<String>,
    /// Comma-separated parameter values to sweep over.
    #[arg(long)]
    values: Option<String>,
    /// Confidence threshold for maxlen sweeps.
    #[arg(long)]
    min_conf: Option<String>,
    /// Span cap for minconf and compare sweeps.
    #[arg(long)]
    max_len: Option<u32>,
    /// Window rule for window sweeps: s or e.
    #[arg(long)]
    semantics: Option<String>,
}

pub enum SweepKind {
    MaxLen { min_conf: MinConf, caps: Vec<u32> },
    MinConf { max_len: u32, thresholds: Vec<MinConf> },
    Compare { max_len: u32, thresholds: Vec<MinConf> },
    Window { semantics: Semantics, windows: Vec<u32> },
}

pub struct ResolvedSweep {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub kind: SweepKind,
}

impl SweepArgs {
    pub fn resolve(self) -> Result<ResolvedSweep, Failure> {
        let (file, inputs, out_dir) = self.io.resolve()?;
        let kind = require("--kind", self.kind.or(file.kind))?;
        let tokens = match self.values {
            Some(raw) => split_tokens(&raw),
            None => file.values.unwrap_or_default(),
        };
        if tokens.is_empty() {
            return Err(Failure::usage("--values needs at least one value"));
        }
        let min_conf = |token: Option<String>| {
            parse_token::<MinConf>("--min-conf", &require("--min-conf", token)?)
        };
        let semantics = |token: Option<String>| {
            parse_token::<Semantics>("--semantics", &require("--semantics", token)?)
        };
        let kind = match kind.to_ascii_lowercase().as_str() {
            "maxlen" | "max-len" => SweepKind::MaxLen {
                min_conf: min_conf(self.min_conf.or(file.min_conf))?,
                caps: parse_tokens("--values", &tokens)?,
            },
            "minconf" | "min-conf" => SweepKind::MinConf {
                max_len: require("--max-len", self.max_len.or(file.max_len))?,
                thresholds: parse_tokens("--values", &tokens)?,
            },
            "compare" => SweepKind::Compare {
                max_len: require("--max-len", self.max_len.or(file.max_len))?,
                thresholds: parse_tokens("--values", &tokens)?,
            },
            "window" => SweepKind::Window {
                semantics: semantics(self.semantics.or(file.semantics))?,
                windows: parse_tokens("--values", &tokens)?,
            },
            other => {
                return Err(Failure::usage(format!(
                    "--kind {other:?} is not one of maxlen, minconf, compare, window"
                )))
            }
        };
        Ok(ResolvedSweep { inputs, out_dir, kind })
    }
}

#[derive(Args, Debug)]
pub struct ContribArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Period to fold over: daily or weekly.
    #[arg(long)]
    periodicity: Option<String>,
    /// Time-point resolution: minute or second.
    #[arg(long)]
    granularity: Option<String>,
    /// Confidence threshold as a percent, up to 2 decimals.
    #[arg(long)]
    min_conf: Option<String>,
    /// Span cap; omit to mine without one.
    #[arg(long)]
    max_len: Option<u32>,
    /// Sequential window length in granularity units.
    #[arg(long)]
    window: Option<u32>,
    /// Window rule: s or e.
    #[arg(long)]
    semantics: Option<String>,
    /// Period count N; default is each month's inclusive span.
    #[arg(long)]
    n: Option<u32>,
}

pub struct ResolvedContrib {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub config: epimine::sid::MiningConfig,
}

impl ContribArgs {
    pub fn resolve(self) -> Result<ResolvedContrib, Failure> {
        let (file, inputs, out_dir) = self.io.resolve()?;
        let (periodicity, granularity) =
            parse_period(self.periodicity.or(file.periodicity), self.granularity.or(file.granularity))?;
        let config = epimine::sid::MiningConfig {
            periodicity,
            granularity,
            min_conf: parse_token("--min-conf", &require("--min-conf", self.min_conf.or(file.min_conf))?)?,
            max_len: self.max_len.or(file.max_len),
            window: require("--window", self.window.or(file.window))?,
            semantics: parse_token("--semantics", &require("--semantics", self.semantics.or(file.semantics))?)?,
            n_override: positive("--n", self.n.or(file.n))?,
        };
        Ok(ResolvedContrib { inputs, out_dir, config })
    }
}
