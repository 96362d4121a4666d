use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use isoturn_core::ingest::{
    generate_fixture, read_canonical_csv, read_delimited, read_fixed_width, write_canonical_csv, write_raw_csv,
    FixedWidthLayout, FixtureConfig,
};
use isoturn_core::simulation::write_results_csv;
use isoturn_core::turnover::HypothesisSource;
use isoturn_core::{
    compare_strategies, complete_cases, encode_records, estimate_fwer, estimate_power, run_turnover, BinaryProfile,
    EncodingRules, Error, ParentStrategy, SimulationSpec, ThresholdConfig, TurnoverConfig, TurnoverReport,
};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser)]
#[command(name = "isoturn", version, about = "Isotonic subgroup selection with data-turnover validation")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a raw survey file into the canonical CSV.
    Encode {
        /// Raw survey file: delimited with a header row, or fixed-width with --layout.
        #[arg(long)]
        input: PathBuf,
        /// Encoding rules JSON; the built-in BRFSS 2023 rules when omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Fixed-width layout JSON; the input is read as fixed-width when given.
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Field delimiter of a delimited input.
        #[arg(long, default_value_t = ',')]
        delimiter: char,
        /// Canonical CSV to write.
        #[arg(long)]
        output: PathBuf,
    },
    /// Screen on one half, validate on the other, in both directions.
    Turnover {
        /// Canonical CSV with group labels.
        #[arg(long)]
        data: PathBuf,
        /// Odds multiplier defining the risk threshold.
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        /// Baseline outcome probability taken from outside the analysis sample.
        #[arg(long)]
        p0: f64,
        /// Family-wise error level, split evenly between the directions.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Screening cut-off on screening-half p-values.
        #[arg(long, default_value_t = 0.025)]
        kappa: f64,
        /// Parent-selection strategy for the validation forest.
        #[arg(long, default_value = "p-guided", value_parser = parse_strategy)]
        strategy: ParentStrategy,
        /// Seed for tie-breaking in forest construction.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Profiles validated on red in place of blue screening: a JSON array or one profile per line.
        #[arg(long)]
        hypotheses: Option<PathBuf>,
        /// Report JSON to write; traces are written beside it.
        #[arg(long)]
        report: PathBuf,
    },
    /// Monte-Carlo FWER, power or strategy comparison on a synthetic model.
    Simulate {
        /// Simulation JSON: model plus pipeline settings.
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Results CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic raw survey file that follows the default rules.
    Fixture {
        #[arg(long, default_value_t = 500)]
        records: usize,
        #[arg(long, default_value_t = 2023)]
        seed: u64,
        /// Raw CSV to write.
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fwer,
    Power,
    Strategies,
}

fn parse_strategy(s: &str) -> Result<ParentStrategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn open(path: &Path) -> anyhow::Result<File> {
    File::open(path).with_context(|| format!("cannot open {}", path.display()))
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Writes through a temporary file so a failed run leaves no partial output.
fn write_atomic(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    let tmp = path.with_file_name(name);
    let mut w = BufWriter::new(File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?);
    let result = body(&mut w).and_then(|_| w.flush().map_err(Into::into));
    drop(w);
    match result {
        Ok(()) => std::fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display())),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn encode(
    input: &Path,
    rules: Option<&Path>,
    layout: Option<&Path>,
    delimiter: char,
    output: &Path,
) -> anyhow::Result<()> {
    let rules = match rules {
        Some(p) => EncodingRules::from_json(&read_text(p)?)?,
        None => EncodingRules::default(),
    };
    if !delimiter.is_ascii() {
        bail!(Error::InvalidConfig(format!("delimiter {delimiter:?} is not ASCII")));
    }
    let records = match layout {
        Some(p) => {
            let layout = FixedWidthLayout::from_json(&read_text(p)?)?;
            read_fixed_width(BufReader::new(open(input)?), &layout, &rules)?
        }
        None => read_delimited(open(input)?, &rules, delimiter as u8)?,
    };
    let (data, summary) = complete_cases(&encode_records(&records, &rules), rules.dimension())?;
    write_atomic(output, |w| Ok(write_canonical_csv(&data, w)?))?;
    eprintln!("{summary}");
    Ok(())
}

fn read_hypotheses(path: &Path) -> anyhow::Result<Vec<BinaryProfile>> {
    let text = read_text(path)?;
    let list: Vec<BinaryProfile> = if text.trim_start().starts_with('[') {
        serde_json::from_str(&text).map_err(Error::from)?
    } else {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<BinaryProfile>())
            .collect::<Result<_, _>>()?
    };
    if list.is_empty() {
        bail!(Error::Data(format!("{}: no hypotheses listed", path.display())));
    }
    Ok(list)
}

#[allow(clippy::too_many_arguments)]
fn turnover(
    data: &Path,
    c: f64,
    p0: f64,
    alpha: f64,
    kappa: f64,
    strategy: ParentStrategy,
    seed: u64,
    hypotheses: Option<&Path>,
    report: &Path,
) -> anyhow::Result<()> {
    let thresholds = ThresholdConfig::from_odds(c, p0, alpha, kappa)?;
    let data = read_canonical_csv(open(data)?)?;
    if data.is_empty() {
        bail!(Error::Data("data file has no observations".into()));
    }
    let mut cfg = TurnoverConfig::new(thresholds, seed);
    cfg.strategy = strategy;
    if let Some(p) = hypotheses {
        cfg.blue_hypotheses = HypothesisSource::External(read_hypotheses(p)?);
    }
    let candidates = BinaryProfile::all(data.dimension())?;
    let result = run_turnover(&data, &candidates, &cfg)?;

    let dir = report.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    for r in &result.directions {
        let path = dir.join(TurnoverReport::trace_file_name(r.direction));
        write_atomic(&path, |w| Ok(r.rejections.write_trace_jsonl(w)?))?;
    }
    write_atomic(report, |w| {
        serde_json::to_writer_pretty(&mut *w, &result.to_json()).map_err(Error::from)?;
        writeln!(w)?;
        Ok(())
    })?;
    eprintln!(
        "tau={:.6} replicable={} global_null={}",
        thresholds.tau,
        result.replicable.len(),
        result.global_null.len()
    );
    Ok(())
}

fn simulate(model: &Path, mode: Mode, replicates: usize, seed: u64, out: &Path) -> anyhow::Result<()> {
    let spec = SimulationSpec::from_json(&read_text(model)?)?;
    let synthetic = spec.model()?;
    let cfg = spec.config()?;
    let rows = match mode {
        Mode::Fwer => {
            if replicates == 0 {
                Vec::new()
            } else {
                vec![estimate_fwer(&synthetic, &cfg, replicates, seed)?]
            }
        }
        Mode::Power => {
            let target = spec
                .target
                .ok_or_else(|| Error::InvalidConfig("power mode needs a target profile in the model file".into()))?;
            if replicates == 0 {
                Vec::new()
            } else {
                spec.strategies
                    .iter()
                    .map(|&s| estimate_power(&synthetic, &cfg.with_strategy(s), &target, replicates, seed))
                    .collect::<Result<_, _>>()?
            }
        }
        Mode::Strategies => compare_strategies(&synthetic, &cfg, &spec.strategies, replicates, seed)?,
    };
    write_atomic(out, |w| Ok(write_results_csv(&rows, w)?))
}

fn fixture(records: usize, seed: u64, output: &Path) -> anyhow::Result<()> {
    let fx = generate_fixture(&FixtureConfig {
        records,
        seed,
        ..Default::default()
    })?;
    write_atomic(output, |w| Ok(write_raw_csv(&fx.records, &EncodingRules::default(), w)?))?;
    eprintln!("{}", fx.summary);
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::OutOfRange { .. } | Error::InvalidConfig(_)) => EXIT_USAGE,
        Some(Error::Numeric(_)) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!(Error::InvalidConfig("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    match cli.command {
        Command::Encode {
            input,
            rules,
            layout,
            delimiter,
            output,
        } => encode(&input, rules.as_deref(), layout.as_deref(), delimiter, &output),
        Command::Turnover {
            data,
            c,
            p0,
            alpha,
            kappa,
            strategy,
            seed,
            hypotheses,
            report,
        } => turnover(&data, c, p0, alpha, kappa, strategy, seed, hypotheses.as_deref(), &report),
        Command::Simulate {
            model,
            mode,
            replicates,
            seed,
            out,
        } => simulate(&model, mode, replicates, seed, &out),
        Command::Fixture { records, seed, output } => fixture(records, seed, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
