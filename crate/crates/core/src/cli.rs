//! Command-line driver. Every command prints a human-readable summary
//! to stdout, writes machine artifacts only behind --out, and records a
//! manifest (resolved parameters plus artifact checksums) so any run
//! can be reproduced bit-exactly.
//!
//! Exit codes: 0 success, 1 protocol-level abort, 2 invalid input,
//! 3 verification failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use sqrng::attack::{sample_random_attack, verify_reduction, GeneralAttack, OperationSchedule};
use sqrng::bits::MessageBit;
use sqrng::error::{Error, Result};
use sqrng::postprocess::{
    extract, from_output_format, to_output_format, ExtractionConfig, HashSeedSource,
};
use sqrng::protocol::{run_protocol, ProtocolConfig, Transcript};
use sqrng::rate::{
    depolarization_stats, entropy_bound, linspace, rate_curve, write_curve_csv, ChannelMode,
    ChannelModel, ObservedStats,
};
use sqrng::seeding::{random_bits, substream, LABEL_ATTACKS, LABEL_SCHEDULE};

const EXIT_OK: u8 = 0;
const EXIT_ABORT: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn run() -> u8 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

#[derive(Parser)]
#[command(
    name = "sqrng",
    version,
    about = "Semi-quantum randomness expansion: simulation, security checks, extraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate protocol rounds against a depolarizing channel.
    Simulate(SimulateArgs),
    /// Compute the secure-rate bound from observed statistics.
    Rate(RateArgs),
    /// Sweep rate against depolarizing noise into a CSV file.
    Curve(CurveArgs),
    /// Check the acceptance-filter reduction on server attacks.
    VerifyReduction(VerifyReductionArgs),
    /// Select an output length and hash a transcript's raw bits.
    Extract(ExtractArgs),
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Rate(a) => cmd_rate(a),
        Command::Curve(a) => cmd_curve(a),
        Command::VerifyReduction(a) => cmd_verify_reduction(a),
        Command::Extract(a) => cmd_extract(a),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Dependent,
    Independent,
}

impl From<ModeArg> for ChannelMode {
    fn from(m: ModeArg) -> ChannelMode {
        match m {
            ModeArg::Dependent => ChannelMode::Dependent,
            ModeArg::Independent => ChannelMode::Independent,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveModeArg {
    Dependent,
    Independent,
    Both,
}

/// Everything needed to reproduce a run: the resolved parameters, the
/// seed, and checksums of every file read or written.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    version: &'static str,
    params: serde_json::Value,
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// Appends an extra extension to the full file name:
/// `t.json` -> `t.json.manifest.json`.
fn with_added_extension(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// Writes the manifest next to the primary artifact unless an explicit
/// path is given; runs that produce no files keep it stdout-only.
fn write_manifest(
    manifest: &RunManifest,
    explicit: Option<&Path>,
    primary_out: Option<&Path>,
) -> Result<()> {
    let path = match (explicit, primary_out) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(out)) => with_added_extension(out, ".manifest.json"),
        (None, None) => return Ok(()),
    };
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(&path, text)?;
    println!("manifest written to {}", path.display());
    Ok(())
}

fn opt_path(p: &Option<PathBuf>) -> serde_json::Value {
    match p {
        Some(p) => json!(path_str(p)),
        None => serde_json::Value::Null,
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Total protocol rounds.
    #[arg(long)]
    rounds: usize,
    /// Rounds reflected for testing; the rest generate raw bits.
    #[arg(long)]
    tests: usize,
    /// Depolarizing parameter Q in [0, 0.5].
    #[arg(long)]
    q: f64,
    /// Whether the reflected-round flip rate is Q itself or 2Q(1-Q).
    #[arg(long, value_enum, default_value_t = ModeArg::Dependent)]
    mode: ModeArg,
    /// Master seed; schedule and round noise use separate substreams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the transcript JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep per-round records in the transcript.
    #[arg(long)]
    keep_rounds: bool,
    /// Manifest path (default: <out>.manifest.json).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn print_stats(stats: &ObservedStats) {
    for a in [0u8, 1] {
        for c in [MessageBit::Plus, MessageBit::Minus] {
            println!("P[a={a}, c={c}] = {:?}", stats.p_ac(a, c));
        }
    }
    println!("P(+|acc) = {:?}", stats.p_cond_acc(MessageBit::Plus));
    println!("P(-|acc) = {:?}", stats.p_cond_acc(MessageBit::Minus));
    println!("slack = {:?}", stats.slack());
}

fn cmd_simulate(a: SimulateArgs) -> Result<u8> {
    let channel = ChannelModel::new(a.q, a.mode.into())?;
    let config = ProtocolConfig::new(a.rounds, a.tests, channel, a.seed)?;
    let transcript = run_protocol(&config, a.keep_rounds)?;
    println!("rounds = {}", a.rounds);
    println!("tests = {}", a.tests);
    println!("raw bits = {}", transcript.raw().len());
    match transcript.stats() {
        Some(stats) => print_stats(stats),
        None => println!("statistics unavailable: a round kind has zero samples"),
    }
    println!("seed_cost_bits = {:?}", transcript.seed_cost_bits());

    let mut outputs = BTreeMap::new();
    if let Some(out) = &a.out {
        fs::write(out, transcript.to_json()?)?;
        outputs.insert(path_str(out), sha256_file(out)?);
        println!("transcript written to {}", out.display());
    }
    write_manifest(
        &RunManifest {
            command: "simulate",
            version: VERSION,
            params: json!({
                "rounds": a.rounds,
                "tests": a.tests,
                "q": a.q,
                "mode": ChannelMode::from(a.mode).to_string(),
                "keep_rounds": a.keep_rounds,
                "out": opt_path(&a.out),
            }),
            seed: Some(a.seed),
            inputs: BTreeMap::new(),
            outputs,
        },
        a.manifest.as_deref(),
        a.out.as_deref(),
    )?;
    Ok(EXIT_OK)
}

#[derive(Args)]
struct RateArgs {
    /// Statistics JSON (either a bare statistics object or a transcript).
    #[arg(long, conflicts_with_all = ["q", "mode"])]
    stats: Option<PathBuf>,
    /// Depolarizing parameter Q for analytic statistics.
    #[arg(long)]
    q: Option<f64>,
    /// Channel mode accompanying --q.
    #[arg(long, value_enum, default_value_t = ModeArg::Dependent)]
    mode: ModeArg,
    /// Write the full report JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest path (default: <out>.manifest.json).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn load_stats(path: &Path) -> Result<ObservedStats> {
    let text = fs::read_to_string(path)?;
    if let Ok(stats) = serde_json::from_str::<ObservedStats>(&text) {
        return Ok(stats);
    }
    let transcript = Transcript::from_json(&text)?;
    transcript.stats().cloned().ok_or_else(|| {
        Error::InvalidConfig(
            "transcript carries no statistics (zero test or zero raw rounds)".into(),
        )
    })
}

fn label(c: usize) -> &'static str {
    if c == 0 {
        "+"
    } else {
        "-"
    }
}

fn cmd_rate(a: RateArgs) -> Result<u8> {
    let (stats, source) = match (&a.stats, a.q) {
        (Some(path), None) => (load_stats(path)?, json!(path_str(path))),
        (None, Some(q)) => {
            let channel = ChannelModel::new(q, a.mode.into())?;
            (depolarization_stats(&channel), serde_json::Value::Null)
        }
        _ => {
            return Err(Error::InvalidConfig(
                "pass exactly one of --stats or --q".into(),
            ))
        }
    };
    let report = entropy_bound(&stats)?;
    for c in 0..2 {
        match report.lambda[c] {
            Some(v) => println!("lambda[{}] = {:?}", label(c), v),
            None => println!("lambda[{}] = none (zero message mass)", label(c)),
        }
        println!("overlap2re[{}] = {:?}", label(c), report.inner2re[c]);
        println!("term[{}] = {:?}", label(c), report.term[c]);
    }
    println!("bound = {:?}", report.bound);
    println!("abort = {}", report.abort);

    let mut outputs = BTreeMap::new();
    if let Some(out) = &a.out {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        fs::write(out, text)?;
        outputs.insert(path_str(out), sha256_file(out)?);
        println!("report written to {}", out.display());
    }
    let mut inputs = BTreeMap::new();
    if let Some(path) = &a.stats {
        inputs.insert(path_str(path), sha256_file(path)?);
    }
    write_manifest(
        &RunManifest {
            command: "rate",
            version: VERSION,
            params: json!({
                "stats": source,
                "q": a.q,
                "mode": ChannelMode::from(a.mode).to_string(),
                "out": opt_path(&a.out),
            }),
            seed: None,
            inputs,
            outputs,
        },
        a.manifest.as_deref(),
        a.out.as_deref(),
    )?;
    Ok(if report.abort { EXIT_ABORT } else { EXIT_OK })
}

#[derive(Args)]
struct CurveArgs {
    /// Lower end of the Q grid.
    #[arg(long, default_value_t = 0.0)]
    q_min: f64,
    /// Upper end of the Q grid.
    #[arg(long, default_value_t = 0.5)]
    q_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 101)]
    steps: usize,
    /// Channel mode; `both` writes one file per mode.
    #[arg(long, value_enum, default_value_t = CurveModeArg::Dependent)]
    mode: CurveModeArg,
    /// CSV output path; `both` inserts the mode before the extension.
    #[arg(long)]
    out: PathBuf,
    /// Manifest path (default: <out>.manifest.json).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

/// `curve.csv` + dependent -> `curve.dependent.csv`.
fn mode_suffixed(path: &Path, mode: ChannelMode) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_os_string();
    let mut name = stem;
    name.push(format!(".{mode}"));
    if let Some(ext) = path.extension() {
        name.push(".");
        name.push(ext);
    }
    path.with_file_name(name)
}

fn cmd_curve(a: CurveArgs) -> Result<u8> {
    let grid = linspace(a.q_min, a.q_max, a.steps);
    let targets: Vec<(ChannelMode, PathBuf)> = match a.mode {
        CurveModeArg::Dependent => vec![(ChannelMode::Dependent, a.out.clone())],
        CurveModeArg::Independent => vec![(ChannelMode::Independent, a.out.clone())],
        CurveModeArg::Both => vec![
            (
                ChannelMode::Dependent,
                mode_suffixed(&a.out, ChannelMode::Dependent),
            ),
            (
                ChannelMode::Independent,
                mode_suffixed(&a.out, ChannelMode::Independent),
            ),
        ],
    };
    let mut outputs = BTreeMap::new();
    for (mode, path) in &targets {
        let rows = rate_curve(&grid, *mode)?;
        let mut buf = Vec::new();
        write_curve_csv(&rows, &mut buf)?;
        fs::write(path, &buf)?;
        outputs.insert(path_str(path), sha256_file(path)?);
        println!(
            "mode {}: {} rows, rate {:?} at Q={:?} down to {:?} at Q={:?}, written to {}",
            mode,
            rows.len(),
            rows.first().map(|r| r.rate).unwrap_or(0.0),
            a.q_min,
            rows.last().map(|r| r.rate).unwrap_or(0.0),
            a.q_max,
            path.display()
        );
    }
    let mode_name = match a.mode {
        CurveModeArg::Dependent => "dependent",
        CurveModeArg::Independent => "independent",
        CurveModeArg::Both => "both",
    };
    write_manifest(
        &RunManifest {
            command: "curve",
            version: VERSION,
            params: json!({
                "q_min": a.q_min,
                "q_max": a.q_max,
                "steps": a.steps,
                "mode": mode_name,
                "out": path_str(&a.out),
            }),
            seed: None,
            inputs: BTreeMap::new(),
            outputs,
        },
        a.manifest.as_deref(),
        Some(a.out.as_path()),
    )?;
    Ok(EXIT_OK)
}

#[derive(Args)]
struct VerifyReductionArgs {
    /// Number of attacks to sample.
    #[arg(long, default_value_t = 100)]
    attacks: usize,
    /// Sampled round counts are uniform over 1..=rounds-max.
    #[arg(long, default_value_t = 3)]
    rounds_max: usize,
    /// Sampled ancilla output dimensions are uniform over 1..=dout.
    #[arg(long, default_value_t = 4)]
    dout: usize,
    /// Master seed for attack and schedule sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check this one attack (interchange JSON) instead of sampling.
    #[arg(long, requires = "theta")]
    attack_file: Option<PathBuf>,
    /// Operation schedule for --attack-file, e.g. 01 (1 = measure-resend).
    #[arg(long)]
    theta: Option<String>,
    /// Tolerance on accept probability and state fidelity.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the per-attack report JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest path (default: <out>.manifest.json).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Serialize)]
struct VerifyRow {
    rounds: usize,
    d_out: usize,
    theta: String,
    accept_probability: f64,
    expected_accept: f64,
    state_fidelity: f64,
    passed: bool,
}

#[derive(Serialize)]
struct VerifySummary {
    attacks: usize,
    tol: f64,
    worst_accept_deviation: f64,
    min_fidelity: f64,
    all_passed: bool,
    reports: Vec<VerifyRow>,
}

fn cmd_verify_reduction(a: VerifyReductionArgs) -> Result<u8> {
    let mut rows = Vec::new();
    if let Some(path) = &a.attack_file {
        let attack = GeneralAttack::from_json(&fs::read_to_string(path)?)?;
        let theta = a.theta.as_deref().expect("clap enforces --theta");
        let schedule = OperationSchedule::parse(theta)?;
        let report = verify_reduction(&attack, &schedule, a.tol)?;
        rows.push(VerifyRow {
            rounds: schedule.len(),
            d_out: attack.d_out(),
            theta: theta.to_string(),
            accept_probability: report.accept_probability,
            expected_accept: report.expected_accept,
            state_fidelity: report.state_fidelity,
            passed: report.passed,
        });
    } else {
        if a.attacks == 0 || a.rounds_max == 0 || a.dout == 0 {
            return Err(Error::InvalidConfig(
                "--attacks, --rounds-max and --dout must all be >= 1".into(),
            ));
        }
        let mut attack_rng = substream(a.seed, LABEL_ATTACKS);
        let mut schedule_rng = substream(a.seed, LABEL_SCHEDULE);
        for _ in 0..a.attacks {
            let rounds = attack_rng.random_range(1..=a.rounds_max);
            let d_out = attack_rng.random_range(1..=a.dout);
            let attack = sample_random_attack(rounds, d_out, &mut attack_rng)?;
            let schedule = OperationSchedule::new(random_bits(&mut schedule_rng, rounds))?;
            let report = verify_reduction(&attack, &schedule, a.tol)?;
            rows.push(VerifyRow {
                rounds,
                d_out,
                theta: schedule.theta().to_string(),
                accept_probability: report.accept_probability,
                expected_accept: report.expected_accept,
                state_fidelity: report.state_fidelity,
                passed: report.passed,
            });
        }
    }

    let worst_dev = rows
        .iter()
        .map(|r| (r.accept_probability - r.expected_accept).abs())
        .fold(0.0, f64::max);
    let min_fid = rows.iter().map(|r| r.state_fidelity).fold(1.0, f64::min);
    let all_passed = rows.iter().all(|r| r.passed);
    println!("attacks checked = {}", rows.len());
    println!("worst accept deviation = {:?}", worst_dev);
    println!("min fidelity = {:?}", min_fid);
    println!("all passed = {}", all_passed);
    if rows.len() == 1 {
        println!("accept probability = {:?}", rows[0].accept_probability);
        println!("expected accept = {:?}", rows[0].expected_accept);
        println!("state fidelity = {:?}", rows[0].state_fidelity);
    }

    let summary = VerifySummary {
        attacks: rows.len(),
        tol: a.tol,
        worst_accept_deviation: worst_dev,
        min_fidelity: min_fid,
        all_passed,
        reports: rows,
    };
    let mut outputs = BTreeMap::new();
    if let Some(out) = &a.out {
        let mut text = serde_json::to_string_pretty(&summary)?;
        text.push('\n');
        fs::write(out, text)?;
        outputs.insert(path_str(out), sha256_file(out)?);
        println!("report written to {}", out.display());
    }
    let mut inputs = BTreeMap::new();
    if let Some(path) = &a.attack_file {
        inputs.insert(path_str(path), sha256_file(path)?);
    }
    write_manifest(
        &RunManifest {
            command: "verify-reduction",
            version: VERSION,
            params: json!({
                "attacks": a.attacks,
                "rounds_max": a.rounds_max,
                "dout": a.dout,
                "attack_file": opt_path(&a.attack_file),
                "theta": a.theta,
                "tol": a.tol,
                "out": opt_path(&a.out),
            }),
            seed: Some(a.seed),
            inputs,
            outputs,
        },
        a.manifest.as_deref(),
        a.out.as_deref(),
    )?;
    Ok(if all_passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

#[derive(Args)]
struct ExtractArgs {
    /// Transcript JSON produced by `simulate`.
    #[arg(long)]
    transcript: PathBuf,
    /// Rate safety margin in bits per raw bit.
    #[arg(long, default_value_t = 0.0)]
    margin: f64,
    /// Hash seed file (`ell=<n>` header plus hex); derived when absent.
    #[arg(long)]
    hash_seed: Option<PathBuf>,
    /// Master seed for hash-seed derivation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Abort when observed P(-|acc) exceeds this.
    #[arg(long)]
    threshold_qfr: Option<f64>,
    /// Output bits file (`ell=<n>` header plus hex).
    #[arg(long)]
    out: PathBuf,
    /// Manifest path (default: <out>.manifest.json).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn cmd_extract(a: ExtractArgs) -> Result<u8> {
    let transcript = Transcript::from_json(&fs::read_to_string(&a.transcript)?)?;
    let hash_seed = match &a.hash_seed {
        Some(path) => HashSeedSource::Explicit(from_output_format(&fs::read_to_string(path)?)?),
        None => HashSeedSource::Derive(a.seed),
    };
    let config = ExtractionConfig {
        margin: a.margin,
        threshold_qfr: a.threshold_qfr,
        hash_seed,
    };
    let result = extract(&transcript, &config)?;

    let mut inputs = BTreeMap::new();
    inputs.insert(path_str(&a.transcript), sha256_file(&a.transcript)?);
    if let Some(path) = &a.hash_seed {
        inputs.insert(path_str(path), sha256_file(path)?);
    }
    let params = json!({
        "transcript": path_str(&a.transcript),
        "margin": a.margin,
        "hash_seed": opt_path(&a.hash_seed),
        "threshold_qfr": a.threshold_qfr,
        "out": path_str(&a.out),
    });

    if let Some(reason) = result.aborted {
        println!("{reason}");
        write_manifest(
            &RunManifest {
                command: "extract",
                version: VERSION,
                params,
                seed: Some(a.seed),
                inputs,
                outputs: BTreeMap::new(),
            },
            a.manifest.as_deref(),
            None,
        )?;
        return Ok(EXIT_ABORT);
    }

    fs::write(&a.out, to_output_format(&result.output))?;
    let mut outputs = BTreeMap::new();
    outputs.insert(path_str(&a.out), sha256_file(&a.out)?);
    println!("ell = {}", result.ell);
    println!("rate_used = {:?}", result.rate_used);
    println!("output written to {}", a.out.display());
    if a.hash_seed.is_none() {
        let seed_bits = result.hash_seed.as_ref().expect("present when not aborted");
        let seed_path = with_added_extension(&a.out, ".seed");
        fs::write(&seed_path, to_output_format(seed_bits))?;
        outputs.insert(path_str(&seed_path), sha256_file(&seed_path)?);
        println!("hash seed written to {}", seed_path.display());
    }
    write_manifest(
        &RunManifest {
            command: "extract",
            version: VERSION,
            params,
            seed: Some(a.seed),
            inputs,
            outputs,
        },
        a.manifest.as_deref(),
        Some(a.out.as_path()),
    )?;
    Ok(EXIT_OK)
}
