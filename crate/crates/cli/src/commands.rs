//! Command bodies: file plumbing around the library operations.
//!
//! Each command reads its inputs, runs one library operation, writes the
//! result files atomically and seals a manifest. Outputs are pure
//! functions of (inputs, parameters, seed), so reruns are byte-identical
//! apart from measured timings and manifest timestamps.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use epimine::fed::{self, FedInput, FedInterval, Semantics};
use epimine::folding::{self, FoldedSeries, FoldedTable};
use epimine::harness;
use epimine::ingest::{self, LogRecord};
use epimine::sid::{self, MinConf};
use epimine::time::{Granularity, Periodicity, TimestampFormat};
use serde::{Deserialize, Serialize};

use crate::config::{
    Failure, ResolvedAllsi, ResolvedClean, ResolvedContrib, ResolvedFed, ResolvedFold,
    ResolvedGen, ResolvedSi, ResolvedSweep, SweepKind,
};
use crate::manifest::{snapshot, Run};

fn data_at(path: &Path) -> impl Fn(epimine::Error) -> Failure + '_ {
    move |e| Failure::data(format!("{}: {e}", path.display()))
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::data(e.to_string())
}

fn open(path: &Path) -> Result<fs::File, Failure> {
    fs::File::open(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn read_records(paths: &[PathBuf], format: TimestampFormat) -> Result<Vec<LogRecord>, Failure> {
    let mut records = Vec::new();
    for path in paths {
        records.extend(ingest::parse_log(open(path)?, format).map_err(data_at(path))?);
    }
    Ok(records)
}

/// Folded input files merged into one dataset. All files must agree on the
/// fold parameters and no entity may appear twice.
struct FoldedDataset {
    granularity: Granularity,
    series: Vec<FoldedSeries>,
}

fn read_tables(paths: &[PathBuf]) -> Result<FoldedDataset, Failure> {
    let mut params: Option<(Periodicity, Granularity, u32)> = None;
    let mut seen = BTreeSet::new();
    let mut series = Vec::new();
    for path in paths {
        let table = folding::read_folded(open(path)?).map_err(data_at(path))?;
        let this = (table.periodicity(), table.granularity(), table.period_count());
        match params {
            None => params = Some(this),
            Some(first) if first != this => {
                return Err(Failure::data(format!(
                    "{}: fold parameters differ from the first input file",
                    path.display()
                )))
            }
            Some(_) => {}
        }
        for s in table.series() {
            if !seen.insert(s.entity().to_string()) {
                return Err(Failure::data(format!(
                    "{}: entity {:?} appears in more than one input",
                    path.display(),
                    s.entity()
                )));
            }
            series.push(s.clone());
        }
    }
    let (_, granularity, _) = params.expect("at least one input file");
    Ok(FoldedDataset { granularity, series })
}

fn read_intervals(paths: &[PathBuf]) -> Result<Vec<FedInterval>, Failure> {
    let mut intervals = Vec::new();
    for path in paths {
        intervals.extend(fed::read_fed_intervals(open(path)?).map_err(data_at(path))?);
    }
    Ok(intervals)
}

fn render<F>(write: F) -> Result<Vec<u8>, Failure>
where
    F: FnOnce(&mut Vec<u8>) -> epimine::Result<()>,
{
    let mut bytes = Vec::new();
    write(&mut bytes).map_err(data)?;
    Ok(bytes)
}

fn entity_file_name(entity: &str) -> String {
    let safe: String = entity
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect();
    format!("cleaned.{safe}.csv")
}

#[derive(Serialize, Deserialize)]
struct CleanConfig {
    format: String,
}

pub fn clean(args: ResolvedClean) -> Result<(), Failure> {
    let mut run = Run::start("clean", &args.inputs, &args.out_dir)?;
    let records = read_records(&args.inputs, args.format)?;
    let mut names = BTreeSet::new();
    for (entity, records) in ingest::clean(records) {
        let name = entity_file_name(&entity);
        if !names.insert(name.clone()) {
            return Err(Failure::data(format!(
                "entity {entity:?} collides with another entity on output file {name}"
            )));
        }
        run.write_output(&name, &render(|w| ingest::write_records(w, &records))?)?;
    }
    run.finish(snapshot(&CleanConfig { format: args.format.to_string() })?, None)
}

#[derive(Serialize, Deserialize)]
struct FoldConfig {
    periodicity: Periodicity,
    granularity: Granularity,
    n: u32,
}

pub fn fold(args: ResolvedFold) -> Result<(), Failure> {
    let mut run = Run::start("fold", &args.inputs, &args.out_dir)?;
    let records = read_records(&args.inputs, TimestampFormat::Auto)?;
    let n = match args.n_override {
        Some(n) => n,
        None => folding::period_count(&records, args.periodicity)
            .map_err(|e| Failure::data(format!("{e}; pass --n to fold an empty input")))?,
    };
    let mut groups: BTreeMap<String, Vec<LogRecord>> = BTreeMap::new();
    for record in records {
        groups.entry(record.entity.clone()).or_default().push(record);
    }
    let series = groups
        .values()
        .map(|records| folding::fold(records, args.periodicity, args.granularity, Some(n)))
        .collect::<epimine::Result<Vec<_>>>()
        .map_err(data)?;
    let table =
        FoldedTable::new(args.periodicity, args.granularity, n, series).map_err(data)?;
    run.write_output("folded.csv", &render(|w| folding::write_folded(w, &table))?)?;
    let config =
        FoldConfig { periodicity: args.periodicity, granularity: args.granularity, n };
    run.finish(snapshot(&config)?, None)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SiConfig {
    min_conf: MinConf,
    max_len: u32,
}

pub fn si(args: ResolvedSi) -> Result<(), Failure> {
    let mut run = Run::start("si", &args.inputs, &args.out_dir)?;
    let dataset = read_tables(&args.inputs)?;
    let mut intervals = Vec::new();
    for series in &dataset.series {
        intervals.extend(sid::one_pass_si(series, args.min_conf, args.max_len));
    }
    run.write_output(
        "intervals.csv",
        &render(|w| sid::write_intervals(w, &intervals, dataset.granularity))?,
    )?;
    run.finish(snapshot(&SiConfig { min_conf: args.min_conf, max_len: args.max_len })?, None)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct AllsiConfig {
    min_conf: MinConf,
}

pub fn allsi(args: ResolvedAllsi) -> Result<(), Failure> {
    let mut run = Run::start("allsi", &args.inputs, &args.out_dir)?;
    let dataset = read_tables(&args.inputs)?;
    let mut intervals = Vec::new();
    for series in &dataset.series {
        intervals.extend(sid::one_pass_allsi(series, args.min_conf));
    }
    run.write_output(
        "intervals.csv",
        &render(|w| sid::write_intervals(w, &intervals, dataset.granularity))?,
    )?;
    run.finish(snapshot(&AllsiConfig { min_conf: args.min_conf })?, None)
}

#[derive(Serialize, Deserialize)]
struct FedConfig {
    window: u32,
    semantics: Semantics,
}

pub fn fed_cmd(args: ResolvedFed) -> Result<(), Failure> {
    let mut run = Run::start("fed", &args.inputs, &args.out_dir)?;
    let input = FedInput::sorted(read_intervals(&args.inputs)?).map_err(data)?;
    let episodes = fed::one_pass_fed(&input, args.window, args.semantics);
    let by_level = fed::episodes_by_level(&episodes);
    let top = by_level.keys().max().copied().unwrap_or(2);
    for level in 2..=top {
        let members = by_level.get(&level).map(Vec::as_slice).unwrap_or(&[]);
        let name = format!("episodes.level{level}.csv");
        run.write_output(&name, &render(|w| fed::write_episode_level(w, members, level))?)?;
    }
    let note = (args.semantics == Semantics::E).then(|| {
        "semantics e interpreted as: a joining interval must start and end \
         within the window of the base start"
            .to_string()
    });
    run.finish(snapshot(&FedConfig { window: args.window, semantics: args.semantics })?, note)
}

pub fn generate(args: ResolvedGen) -> Result<(), Failure> {
    let inputs: Vec<PathBuf> = args.spec_path.iter().cloned().collect();
    let mut run = Run::start("gen", &inputs, &args.out_dir)?;
    let records = harness::generate(&args.spec).map_err(|e| Failure::usage(e.to_string()))?;
    run.write_output("records.csv", &render(|w| ingest::write_records(w, &records))?)?;
    run.finish(snapshot(&args.spec)?, None)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SweepConfig {
    kind: String,
    values: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    min_conf: Option<MinConf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    max_len: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    semantics: Option<Semantics>,
}

pub fn sweep(args: ResolvedSweep) -> Result<(), Failure> {
    let mut run = Run::start("sweep", &args.inputs, &args.out_dir)?;
    let config = match args.kind {
        SweepKind::MaxLen { min_conf, caps } => {
            let dataset = read_tables(&args.inputs)?;
            let result = harness::sweep_maxlen(&dataset.series, min_conf, &caps);
            run.write_output("sweep.csv", &render(|w| harness::write_sweep(w, &result))?)?;
            SweepConfig {
                kind: "maxlen".into(),
                values: caps.iter().map(u32::to_string).collect(),
                min_conf: Some(min_conf),
                max_len: None,
                semantics: None,
            }
        }
        SweepKind::MinConf { max_len, thresholds } => {
            let dataset = read_tables(&args.inputs)?;
            let result = harness::sweep_minconf(&dataset.series, max_len, &thresholds);
            run.write_output("sweep.csv", &render(|w| harness::write_sweep(w, &result))?)?;
            SweepConfig {
                kind: "minconf".into(),
                values: thresholds.iter().map(MinConf::as_percent_text).collect(),
                min_conf: None,
                max_len: Some(max_len),
                semantics: None,
            }
        }
        SweepKind::Compare { max_len, thresholds } => {
            let dataset = read_tables(&args.inputs)?;
            let (capped, uncapped) = harness::compare_si_allsi(&dataset.series, max_len, &thresholds);
            run.write_output("sweep.si.csv", &render(|w| harness::write_sweep(w, &capped))?)?;
            run.write_output("sweep.allsi.csv", &render(|w| harness::write_sweep(w, &uncapped))?)?;
            SweepConfig {
                kind: "compare".into(),
                values: thresholds.iter().map(MinConf::as_percent_text).collect(),
                min_conf: None,
                max_len: Some(max_len),
                semantics: None,
            }
        }
        SweepKind::Window { semantics, windows } => {
            let input = FedInput::sorted(read_intervals(&args.inputs)?).map_err(data)?;
            let result = harness::sweep_window(&input, &windows, semantics);
            run.write_output("sweep.csv", &render(|w| harness::write_sweep(w, &result))?)?;
            SweepConfig {
                kind: "window".into(),
                values: windows.iter().map(u32::to_string).collect(),
                min_conf: None,
                max_len: None,
                semantics: Some(semantics),
            }
        }
    };
    run.finish(snapshot(&config)?, None)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ContribConfig {
    periodicity: Periodicity,
    granularity: Granularity,
    min_conf: MinConf,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    max_len: Option<u32>,
    window: u32,
    semantics: Semantics,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    n: Option<u32>,
}

pub fn contrib(args: ResolvedContrib) -> Result<(), Failure> {
    let mut run = Run::start("contrib", &args.inputs, &args.out_dir)?;
    let records = read_records(&args.inputs, TimestampFormat::Auto)?;
    let tagged = harness::episodes_by_month(&records, &args.config).map_err(data)?;
    let rows = harness::contribution_report(&tagged);
    run.write_output("contribution.csv", &render(|w| harness::write_contribution(w, &rows))?)?;
    let config = ContribConfig {
        periodicity: args.config.periodicity,
        granularity: args.config.granularity,
        min_conf: args.config.min_conf,
        max_len: args.config.max_len,
        window: args.config.window,
        semantics: args.config.semantics,
        n: args.config.n_override,
    };
    run.finish(snapshot(&config)?, None)
}
