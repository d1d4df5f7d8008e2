use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use oddeec::bench::{self, ExperimentSpec};
use oddeec::validate::{self, Check, Scale};
use oddeec::variance::var_mhat_sampled;
use oddeec::{check_safety, preset, tune_sampling_length, BitString, Codec, CodecConfig, Codeword, MleTable, Packet};

#[derive(Parser)]
#[command(name = "oddeec", version, about = "OddEEC bit error rate estimation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pick the sampling length for a BER range.
    Tune(TuneArgs),
    /// Build or inspect precomputed MLE tables.
    #[command(subcommand)]
    Table(TableCommand),
    /// Encode a hex packet into a hex codeword.
    Encode(EncodeArgs),
    /// Estimate the BER from a received hex packet and codeword.
    Decode(DecodeArgs),
    /// Run the accuracy experiment and write CSV.
    Bench(BenchArgs),
    /// Run the model and simulator checks.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// oddeec-s, oddeec-l, oddeec-c, oddeec-c80 or file:<path>.
    #[arg(long, default_value = "oddeec-c")]
    config: String,
    /// Base seed for presets and experiments.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Assume the codeword arrives intact.
    #[arg(long)]
    immune: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<CodecConfig> {
        let cfg = match self.config.strip_prefix("file:") {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading config {path}"))?;
                CodecConfig::from_text(&text).with_context(|| format!("parsing config {path}"))?
            }
            None => preset(&self.config, self.seed)?,
        };
        Ok(if self.immune { cfg.with_immune(true) } else { cfg })
    }
}

#[derive(Args)]
struct TuneArgs {
    /// Longest packet length in bits.
    #[arg(long, default_value_t = 12_000)]
    length: usize,
    #[arg(long, default_value_t = 0.001)]
    theta_min: f64,
    #[arg(long, default_value_t = 0.01)]
    theta_max: f64,
    /// Sketch length in bits.
    #[arg(long, default_value_t = 96)]
    n: usize,
}

#[derive(Subcommand)]
enum TableCommand {
    /// Precompute the MLE table for a configuration.
    Build {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 12_000)]
        length: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a table file's header and summary.
    Inspect {
        #[arg(long)]
        table: PathBuf,
    },
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Packet bits as hex, most significant bit of each byte first.
    #[arg(long)]
    packet: String,
    /// Packet length in bits; defaults to four bits per hex digit.
    #[arg(long)]
    length: Option<usize>,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    packet: String,
    #[arg(long)]
    codeword: String,
    #[arg(long)]
    length: Option<usize>,
    /// Precomputed table; built on the fly when omitted.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 12_000)]
    length: usize,
    #[arg(long, conflicts_with = "theta_list")]
    theta_min: Option<f64>,
    #[arg(long, conflicts_with = "theta_list")]
    theta_max: Option<f64>,
    #[arg(long, conflicts_with = "theta_list")]
    theta_count: Option<usize>,
    /// Comma-separated BER values.
    #[arg(long, value_delimiter = ',')]
    theta_list: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Precomputed table; built on the fly when omitted.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Smaller Monte-Carlo samples.
    #[arg(long)]
    quick: bool,
    /// Run only the named checks (repeatable).
    #[arg(long = "check", value_parser = clap::builder::PossibleValuesParser::new(CHECK_NAMES))]
    checks: Vec<String>,
}

const CHECK_NAMES: [&str; 10] = [
    "saturation",
    "xor-identity",
    "normalization",
    "transition",
    "variance",
    "tuner",
    "ordering",
    "table-geometry",
    "latency",
    "replay",
];

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Tune(a) => {
            let r = tune_sampling_length(a.length, a.theta_min, a.theta_max, a.n)?;
            let beta = r as f64 / a.length as f64;
            let m_mid = a.length as f64 * (a.theta_min + a.theta_max) / 2.0;
            let pred = var_mhat_sampled(m_mid, a.n, beta)?;
            writeln!(stdout, "r = {r}")?;
            writeln!(stdout, "beta = {beta:.6}")?;
            writeln!(stdout, "m_mid = {m_mid}")?;
            writeln!(stdout, "predicted_var_mhat = {:.6}", pred.var_mhat)?;
            writeln!(stdout, "predicted_rmse = {:.6}", pred.rmse_theta)?;
            writeln!(stdout, "safe = {}", check_safety(r, a.theta_max, a.n))?;
        }
        Command::Table(TableCommand::Build { config, length, out }) => {
            let cfg = config.resolve()?;
            let table = Codec::new(&cfg, length)?.build_standard_table()?;
            bench::emit_table_file(&table, &out)?;
            writeln!(stdout, "wrote {} entries to {}", table.len(), out.display())?;
        }
        Command::Table(TableCommand::Inspect { table }) => {
            let t = MleTable::read_from(&table)?;
            writeln!(stdout, "resolutions = {}", t.resolutions().len())?;
            for (i, r) in t.resolutions().iter().enumerate() {
                writeln!(
                    stdout,
                    "resolution[{i}] = n:{} r:{} sketch_seed:{} plan_seed:{}",
                    r.n, r.r, r.sketch_seed, r.plan_seed
                )?;
            }
            writeln!(stdout, "theta_cap = {}", t.theta_cap())?;
            writeln!(stdout, "grid = [{}, {}] x {}", t.grid_min(), t.grid_max(), t.grid_size())?;
            writeln!(stdout, "entries = {}", t.len())?;
            writeln!(stdout, "compat_dims = {:?}", t.compat_dims())?;
            writeln!(stdout, "compat_payload_bytes = {}", t.compat_payload_bytes())?;
        }
        Command::Encode(a) => {
            let cfg = a.config.resolve()?;
            let packet = parse_packet(&a.packet, a.length)?;
            let cw = Codec::new(&cfg, packet.len())?.encode(&packet)?;
            writeln!(stdout, "{}", cw.bits().to_hex())?;
        }
        Command::Decode(a) => {
            let cfg = a.config.resolve()?;
            let packet = parse_packet(&a.packet, a.length)?;
            let codec = Codec::new(&cfg, packet.len())?;
            let bits = BitString::from_hex(&a.codeword, cfg.total_n()).context("parsing --codeword")?;
            let codeword = Codeword::from_bits(bits, &cfg)?;
            let table = load_table(&codec, a.table.as_ref())?;
            let obs = codec.observe(&packet, &codeword)?;
            let theta = table.lookup(obs.as_slice())?;
            let phis: Vec<String> = obs.as_slice().iter().map(|p| p.to_string()).collect();
            writeln!(stdout, "theta_hat = {theta:.8e}")?;
            writeln!(stdout, "phi = {}", phis.join(","))?;
        }
        Command::Bench(a) => {
            let cfg = a.config.resolve()?;
            let theta_grid = match (&a.theta_list, a.theta_min, a.theta_max, a.theta_count) {
                (Some(list), ..) => list.clone(),
                (None, None, None, None) => bench::standard_theta_grid(),
                (None, lo, hi, count) => {
                    bench::theta_grid(lo.unwrap_or(0.001), hi.unwrap_or(0.05), count.unwrap_or(14))?
                }
            };
            let spec = ExperimentSpec {
                l: a.length,
                theta_grid,
                trials: a.trials,
                config: cfg.clone(),
                base_seed: a.config.seed,
                immune: cfg.immune(),
            };
            let codec = Codec::new(&cfg, a.length)?;
            let table = load_table(&codec, a.table.as_ref())?;
            let rows = bench::run_experiment_with(&spec, &codec, &table)?;
            match &a.out {
                Some(path) => bench::emit_csv(&rows, path)?,
                None => bench::write_csv(&rows, &mut stdout)?,
            }
        }
        Command::Validate(a) => {
            let scale = if a.quick { Scale::quick() } else { Scale::full() };
            let wanted = |name: &str| a.checks.is_empty() || a.checks.iter().any(|c| c == name);
            let mut all_passed = true;
            for name in CHECK_NAMES.iter().copied().filter(|n| wanted(n)) {
                let check = run_check(name, scale)?;
                all_passed &= check.passed;
                writeln!(
                    stdout,
                    "{} {}: {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                )?;
                stdout.flush()?;
            }
            if !all_passed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_check(name: &str, s: Scale) -> Result<Check> {
    Ok(match name {
        "saturation" => validate::saturation_probability(s.saturation_seeds)?,
        "xor-identity" => validate::xor_identity(s.xor_cases)?,
        "normalization" => validate::likelihood_normalization()?,
        "transition" => validate::transition_oracle(s.transition_pairs)?,
        "variance" => validate::mom_prediction(s.mom_trials)?,
        "tuner" => validate::tuner()?,
        "ordering" => validate::resolution_ordering(s.bench_trials)?,
        "table-geometry" => validate::table_geometry()?,
        "latency" => validate::decode_latency(s.lookups, s.decodes)?,
        "replay" => validate::replay(s.bench_trials.min(200))?,
        other => bail!("unknown check {other:?}"),
    })
}

fn parse_packet(hex: &str, length: Option<usize>) -> Result<Packet> {
    let hex = hex.trim();
    let len = length.unwrap_or(4 * hex.len());
    let bits = BitString::from_hex(hex, len).context("parsing --packet")?;
    Ok(Packet::new(bits)?)
}

fn load_table(codec: &Codec, path: Option<&PathBuf>) -> Result<MleTable> {
    let table = match path {
        Some(p) => MleTable::read_from(p)?,
        None => codec.build_standard_table()?,
    };
    codec.check_table(&table).context("table does not match the configuration")?;
    Ok(table)
}
