//! Command-line experiment runner.
//!
//! Every command reads a flat `key=value` config file (optional), applies
//! `--set key=value` pairs and then explicit flags on top, and writes its
//! primary CSV to `--out` or stdout. Primary outputs depend only on the
//! settings and the seed; wall-clock timings go to a separate stream.

use std::collections::BTreeMap;
use std::fmt::{Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::adversary::{run_attack, AttackConfig, AttackKind, ATTACK_CSV_HEADER};
use crate::compile2pc::{run_2pc, transcript_audit, OtBackend};
use crate::error::{Error, Result};
use crate::gc::parse_bristol;
use crate::noise::bqsm_survival_probability;
use crate::protocol::{run_protocol, ProtocolParams, Variant};
use crate::qsim::RegisterMode;
use crate::rng::derive_rng;
use crate::spectra::{bound_chain_report, default_alpha, reports_to_csv, STAR_NUMERIC_MAX_N};
use crate::tlp::{self, HashMeter, PuzzleSolution};

#[derive(Debug, Parser)]
#[command(name = "qot", version, about = "Quantum oblivious transfer and one-shot 2PC experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an OT protocol once or for many trials.
    RunOt(RunOtArgs),
    /// `run-ot` with the variant fixed to oneshot_tlp.
    RunOneshotOt(RunOtArgs),
    /// Monte-Carlo attack against one protocol variant.
    AttackSim(AttackArgs),
    /// Spectral bound table over a range of N.
    Spectra(SpectraArgs),
    /// One-shot garbled-circuit two-party computation.
    #[command(name = "run-2pc")]
    Run2pc(TwoPcArgs),
    /// Time-lock puzzle hash counts and solve timings.
    TlpBench(TlpArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extra key=value override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Primary CSV output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunOtArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "n", short = 'n')]
    pub n: Option<usize>,
    #[arg(long)]
    pub sigma: Option<u32>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub tau_ticks: Option<u64>,
    #[arg(long)]
    pub lambda: Option<u32>,
    #[arg(long)]
    pub hashes_per_tick: Option<u64>,
    /// sampled or exact.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub x0: Option<u8>,
    #[arg(long)]
    pub x1: Option<u8>,
    #[arg(long)]
    pub y: Option<u8>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Transcript log path.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// sdc, sdc_blind, subset, delay or honest.
    #[arg(long)]
    pub attack: Option<String>,
    /// Register size, or a comma-separated list.
    #[arg(long = "n", short = 'n')]
    pub n: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub tau_ticks: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub y: Option<u8>,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Rényi order; defaults to 16·|E| per row.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TwoPcArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bristol-fashion circuit file.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Party 1 input as hex.
    #[arg(long)]
    pub garbler_input: Option<String>,
    /// Party 2 input as hex.
    #[arg(long)]
    pub evaluator_input: Option<String>,
    /// ideal or quantum_sim.
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub label_bits: Option<usize>,
    #[arg(long = "n", short = 'n')]
    pub n: Option<usize>,
    #[arg(long)]
    pub tau_ticks: Option<u64>,
    #[arg(long)]
    pub lambda: Option<u32>,
    #[arg(long)]
    pub hashes_per_tick: Option<u64>,
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TlpArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated chain lengths.
    #[arg(long)]
    pub taus: Option<String>,
    #[arg(long)]
    pub lambda: Option<u32>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Secondary output for wall-clock timings (stderr when absent).
    #[arg(long)]
    pub timing_out: Option<PathBuf>,
}

/// Exit status for an error: 2 for usage problems, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) => 2,
        _ => 1,
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_from<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RunOt(a) => cmd_run_ot(&a, None),
        Command::RunOneshotOt(a) => cmd_run_ot(&a, Some(Variant::OneShotTlp)),
        Command::AttackSim(a) => cmd_attack_sim(&a),
        Command::Spectra(a) => cmd_spectra(&a),
        Command::Run2pc(a) => cmd_run_2pc(&a),
        Command::TlpBench(a) => cmd_tlp_bench(&a),
    }
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected key=value, got '{line}'", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Alternate spellings folded onto one key.
fn canonical_key(key: &str) -> &str {
    match key {
        "m" | "M" => "bqsm.memory_bound",
        "rate" | "r" => "noise.rate",
        "noise.tau_ticks" | "tau" => "tau_ticks",
        "N" => "n",
        other => other,
    }
}

const COMMON_KEYS: &[&str] = &["seed", "out"];

/// Resolved settings for one command.
#[derive(Clone, Debug)]
pub struct Settings {
    command: &'static str,
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Config file, then `--set` pairs, then flags. Keys outside `allowed`
    /// are usage errors.
    pub fn resolve(
        command: &'static str,
        allowed: &[&str],
        common: &CommonArgs,
        flags: Vec<(&str, Option<String>)>,
    ) -> Result<Self> {
        let mut s = Self { command, values: BTreeMap::new() };
        let is_allowed = |k: &str| allowed.contains(&k) || COMMON_KEYS.contains(&k);
        let layer = |pairs: Vec<(String, String)>, s: &mut Self| -> Result<()> {
            let mut seen = BTreeMap::new();
            for (k, v) in pairs {
                let key = canonical_key(&k).to_string();
                if !is_allowed(&key) {
                    return Err(Error::Usage(format!("unknown config key '{k}' for {command}")));
                }
                if let Some(prev) = seen.insert(key.clone(), v.clone()) {
                    if prev != v {
                        return Err(Error::Usage(format!("conflicting values for '{key}'")));
                    }
                }
                s.values.insert(key, v);
            }
            Ok(())
        };
        if let Some(path) = &common.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
            layer(parse_config(&text)?, &mut s)?;
        }
        let sets = common
            .set
            .iter()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| Error::Usage(format!("--set expects key=value, got '{kv}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        layer(sets, &mut s)?;
        let mut explicit: Vec<(String, String)> =
            flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))).collect();
        explicit.extend(common.seed.map(|v| ("seed".to_string(), v.to_string())));
        explicit.extend(common.out.as_ref().map(|p| ("out".to_string(), p.display().to_string())));
        layer(explicit, &mut s)?;
        Ok(s)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| Error::Usage(format!("{}: bad value '{v}' for '{key}': {e}", self.command)))
            })
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| Error::Usage(format!("{}: missing required key '{key}'", self.command)))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.raw(key)
            .map(|v| match v {
                "0" | "false" => Ok(false),
                "1" | "true" => Ok(true),
                _ => Err(Error::Usage(format!("{}: '{key}' must be 0 or 1, got '{v}'", self.command))),
            })
            .transpose()
    }

    pub fn seed(&self) -> Result<u64> {
        self.require("seed")
    }

    pub fn out_path(&self) -> Option<PathBuf> {
        self.raw("out").map(PathBuf::from)
    }
}

fn opt<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn opt_path(v: &Option<PathBuf>) -> Option<String> {
    v.as_ref().map(|p| p.display().to_string())
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_mode(s: &str) -> Result<RegisterMode> {
    match s {
        "sampled" => Ok(RegisterMode::Sampled),
        "exact" => Ok(RegisterMode::Exact),
        _ => Err(Error::Usage(format!("mode must be sampled or exact, got '{s}'"))),
    }
}

fn usage<E: Display>(e: E) -> Error {
    Error::Usage(e.to_string())
}

const RUN_OT_KEYS: &[&str] = &[
    "n",
    "sigma",
    "variant",
    "tau_ticks",
    "lambda",
    "hashes_per_tick",
    "mode",
    "bqsm.memory_bound",
    "bqsm.bound_tick",
    "x0",
    "x1",
    "y",
    "trials",
    "log",
];

pub const RUN_OT_CSV_HEADER: &str = "trial,variant,N,x0,x1,y,k,l,output,correct";

fn cmd_run_ot(a: &RunOtArgs, preset: Option<Variant>) -> Result<()> {
    let command = if preset.is_some() { "run-oneshot-ot" } else { "run-ot" };
    let s = Settings::resolve(
        command,
        RUN_OT_KEYS,
        &a.common,
        vec![
            ("n", opt(&a.n)),
            ("sigma", opt(&a.sigma)),
            ("variant", a.variant.clone()),
            ("tau_ticks", opt(&a.tau_ticks)),
            ("lambda", opt(&a.lambda)),
            ("hashes_per_tick", opt(&a.hashes_per_tick)),
            ("mode", a.mode.clone()),
            ("bqsm.memory_bound", opt(&a.m)),
            ("x0", opt(&a.x0)),
            ("x1", opt(&a.x1)),
            ("y", opt(&a.y)),
            ("trials", opt(&a.trials)),
            ("log", opt_path(&a.log)),
        ],
    )?;
    let seed = s.seed()?;
    let n: usize = s.require("n")?;
    let variant = match (preset, s.get::<Variant>("variant")?) {
        (Some(p), Some(v)) if p != v => {
            return Err(Error::Usage(format!("{command} fixes variant {p}, config says {v}")))
        }
        (Some(p), _) => p,
        (None, v) => v.unwrap_or(Variant::Nqsm2Msg),
    };
    let mut params = ProtocolParams::new(variant, n);
    params.sigma = s.get_or("sigma", params.sigma)?;
    params.tau_ticks = s.get_or("tau_ticks", params.tau_ticks)?;
    params.lambda = s.get_or("lambda", params.lambda)?;
    params.hashes_per_tick = s.get_or("hashes_per_tick", params.hashes_per_tick)?;
    if let Some(m) = s.raw("mode") {
        params.mode = parse_mode(m)?;
    }
    if variant == Variant::Bqsm2Msg {
        let m: usize = s.require("bqsm.memory_bound")?;
        if m > n {
            return Err(Error::Usage(format!("bqsm.memory_bound {m} exceeds N = {n}")));
        }
        if s.get_or("bqsm.bound_tick", 0u64)? != 0 {
            return Err(Error::Usage("bqsm_2msg delivers the indices at tick 0, so bqsm.bound_tick must be 0".into()));
        }
    } else if s.raw("bqsm.memory_bound").is_some() || s.raw("bqsm.bound_tick").is_some() {
        return Err(Error::Usage(format!("bqsm.* keys only apply to bqsm_2msg, variant is {variant}")));
    }
    params.validate().map_err(usage)?;
    let trials: usize = s.get_or("trials", 1)?;
    if trials == 0 {
        return Err(Error::Usage("trials must be at least 1".into()));
    }
    let fixed = [s.get_bool("x0")?, s.get_bool("x1")?, s.get_bool("y")?];

    let runs = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = derive_rng(seed, "inputs", t);
            let [x0, x1, y] = fixed.map(|f| f.unwrap_or_else(|| rng.random()));
            let trial_seed: u64 = derive_rng(seed, "trial", t).random();
            let run = run_protocol(&params, x0, x1, y, trial_seed)?;
            Ok((t, x0, x1, y, run))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv = format!("{RUN_OT_CSV_HEADER}\n");
    let mut log = String::from("trial,tick,party,event,digest\n");
    for (t, x0, x1, y, run) in &runs {
        let want = if *y { *x1 } else { *x0 };
        let _ = writeln!(
            csv,
            "{t},{variant},{n},{},{},{},{},{},{},{}",
            *x0 as u8,
            *x1 as u8,
            *y as u8,
            run.pair.0,
            run.pair.1,
            run.output as u8,
            (run.output == want) as u8
        );
        for line in run.transcript.to_log().lines().skip(1) {
            let _ = writeln!(log, "{t},{line}");
        }
    }
    if let Some(path) = s.raw("log") {
        fs::write(path, &log)?;
    }
    write_output(s.out_path().as_deref(), &csv)
}

const ATTACK_KEYS: &[&str] =
    &["attack", "n", "bqsm.memory_bound", "bqsm.bound_tick", "noise.rate", "tau_ticks", "trials", "y"];

/// The attack CSV plus the stored-pair columns of the subset attack.
pub fn attack_csv_header() -> String {
    format!("{ATTACK_CSV_HEADER},stored_pair,stored_expected,stored_doubled")
}

fn cmd_attack_sim(a: &AttackArgs) -> Result<()> {
    let s = Settings::resolve(
        "attack-sim",
        ATTACK_KEYS,
        &a.common,
        vec![
            ("attack", a.attack.clone()),
            ("n", a.n.clone()),
            ("bqsm.memory_bound", opt(&a.m)),
            ("noise.rate", opt(&a.rate)),
            ("tau_ticks", opt(&a.tau_ticks)),
            ("trials", opt(&a.trials)),
            ("y", opt(&a.y)),
        ],
    )?;
    let seed = s.seed()?;
    let attack: AttackKind = s.require("attack")?;
    let ns: Vec<usize> = s
        .raw("n")
        .ok_or_else(|| Error::Usage("attack-sim: missing required key 'n'".into()))?
        .split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|e| Error::Usage(format!("bad N '{v}': {e}"))))
        .collect::<Result<_>>()?;
    let (m, rate, tau_ticks) = match attack {
        AttackKind::Subset => {
            if s.get_or("bqsm.bound_tick", 0u64)? != 0 {
                return Err(Error::Usage("the subset attack faces the bound at tick 0".into()));
            }
            (s.require("bqsm.memory_bound")?, 0.0, 0)
        }
        AttackKind::Delay => (0, s.require("noise.rate")?, s.require("tau_ticks")?),
        _ => (0, 0.0, 0),
    };
    let trials = s.get_or("trials", 10_000usize)?;
    let y = s.get_bool("y")?.unwrap_or(false);
    let mut csv = attack_csv_header();
    csv.push('\n');
    for n in ns {
        let config = AttackConfig { attack, n, m, rate, tau_ticks, trials, seed, y };
        let report = run_attack(&config)?;
        let extra = if attack == AttackKind::Subset {
            let sp = bqsm_survival_probability(n, m)?;
            format!("{:.6},{:.6},{:.6}", report.stats.stored_pair, sp.combinatorial, sp.doubled)
        } else {
            ",,".to_string()
        };
        let _ = writeln!(csv, "{},{extra}", report.csv_row());
    }
    write_output(s.out_path().as_deref(), &csv)
}

fn cmd_spectra(a: &SpectraArgs) -> Result<()> {
    let s = Settings::resolve(
        "spectra",
        &["n_min", "n_max", "alpha"],
        &a.common,
        vec![("n_min", opt(&a.n_min)), ("n_max", opt(&a.n_max)), ("alpha", opt(&a.alpha))],
    )?;
    // The seed is recorded for uniformity; the table is deterministic.
    s.seed()?;
    let n_min: usize = s.get_or("n_min", 2)?;
    let n_max: usize = s.get_or("n_max", STAR_NUMERIC_MAX_N)?;
    if n_min < 2 || n_min > n_max {
        return Err(Error::Usage(format!("need 2 <= n_min <= n_max, got {n_min}..{n_max}")));
    }
    if n_max > STAR_NUMERIC_MAX_N {
        return Err(Error::Capacity { what: "spectra N", requested: n_max, cap: STAR_NUMERIC_MAX_N });
    }
    let alpha: Option<f64> = s.get("alpha")?;
    let reports = (n_min..=n_max)
        .map(|n| bound_chain_report(n, alpha.unwrap_or_else(|| default_alpha(n))))
        .collect::<Result<Vec<_>>>()?;
    write_output(s.out_path().as_deref(), &reports_to_csv(&reports))
}

/// Hex string to `width` bits, least significant first.
pub fn hex_to_bits(hex_str: &str, width: usize) -> Result<Vec<bool>> {
    let t = hex_str.trim().trim_start_matches("0x");
    let padded = if t.len() % 2 == 1 { format!("0{t}") } else { t.to_string() };
    let bytes = hex::decode(&padded).map_err(|e| Error::Usage(format!("bad hex '{hex_str}': {e}")))?;
    let bits: Vec<bool> = bytes.iter().rev().flat_map(|b| (0..8).map(move |i| b >> i & 1 == 1)).collect();
    if bits.iter().skip(width).any(|&b| b) {
        return Err(Error::Usage(format!("input {hex_str} does not fit in {width} bits")));
    }
    let mut out: Vec<bool> = bits.into_iter().take(width).collect();
    out.resize(width, false);
    Ok(out)
}

/// Bits, least significant first, to lowercase hex.
pub fn bits_to_hex(bits: &[bool]) -> String {
    let nibbles = bits.len().div_ceil(4).max(1);
    (0..nibbles)
        .rev()
        .map(|i| {
            let v = (0..4).fold(0u32, |acc, j| acc | (*bits.get(4 * i + j).unwrap_or(&false) as u32) << j);
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

const TWO_PC_KEYS: &[&str] = &[
    "circuit",
    "garbler_input",
    "evaluator_input",
    "backend",
    "label_bits",
    "n",
    "tau_ticks",
    "lambda",
    "hashes_per_tick",
    "log",
];

pub const TWO_PC_CSV_HEADER: &str =
    "backend,label_bits,output_hex,output_bits_lsb_first,message_bytes,ot_payloads,messages,audit";

fn cmd_run_2pc(a: &TwoPcArgs) -> Result<()> {
    let s = Settings::resolve(
        "run-2pc",
        TWO_PC_KEYS,
        &a.common,
        vec![
            ("circuit", opt_path(&a.circuit)),
            ("garbler_input", a.garbler_input.clone()),
            ("evaluator_input", a.evaluator_input.clone()),
            ("backend", a.backend.clone()),
            ("label_bits", opt(&a.label_bits)),
            ("n", opt(&a.n)),
            ("tau_ticks", opt(&a.tau_ticks)),
            ("lambda", opt(&a.lambda)),
            ("hashes_per_tick", opt(&a.hashes_per_tick)),
            ("log", opt_path(&a.log)),
        ],
    )?;
    let seed = s.seed()?;
    let path: PathBuf = s.require("circuit")?;
    let text =
        fs::read_to_string(&path).map_err(|e| Error::Usage(format!("cannot read circuit {}: {e}", path.display())))?;
    let circuit = parse_bristol(&text)?;
    let [w_g, w_e] = circuit.input_widths();
    let g_in = hex_to_bits(&s.require::<String>("garbler_input")?, w_g)?;
    let e_in = hex_to_bits(&s.require::<String>("evaluator_input")?, w_e)?;
    let (backend, default_bits) = match s.raw("backend").unwrap_or("ideal") {
        "ideal" => (OtBackend::Ideal, 128),
        "quantum_sim" => {
            let mut p = ProtocolParams::new(Variant::OneShotTlp, s.get_or("n", 4)?);
            p.tau_ticks = s.get_or("tau_ticks", p.tau_ticks)?;
            p.lambda = s.get_or("lambda", p.lambda)?;
            p.hashes_per_tick = s.get_or("hashes_per_tick", p.hashes_per_tick)?;
            (OtBackend::quantum(p).map_err(usage)?, 8)
        }
        other => return Err(Error::Usage(format!("backend must be ideal or quantum_sim, got '{other}'"))),
    };
    let label_bits = s.get_or("label_bits", default_bits)?;
    let run = run_2pc(&circuit, &g_in, &e_in, &backend, label_bits, seed)?;
    let audit = transcript_audit(&run.record);
    if let Some(log) = s.raw("log") {
        fs::write(log, run.record.to_log())?;
    }
    let bits: String = run.output.iter().map(|&b| if b { '1' } else { '0' }).collect();
    let csv = format!(
        "{TWO_PC_CSV_HEADER}\n{},{label_bits},{},{bits},{},{},{},{}\n",
        backend.name(),
        bits_to_hex(&run.output),
        run.message_bytes,
        run.ot_payloads,
        run.record.messages().len(),
        if audit.is_ok() { "pass" } else { "fail" }
    );
    write_output(s.out_path().as_deref(), &csv)?;
    audit
}

pub const TLP_CSV_HEADER: &str = "tau,lambda,chain_hashes,pad_hashes,roundtrip,ciphertext_digest";

fn cmd_tlp_bench(a: &TlpArgs) -> Result<()> {
    let s = Settings::resolve(
        "tlp-bench",
        &["taus", "lambda", "repeats", "timing_out"],
        &a.common,
        vec![
            ("taus", a.taus.clone()),
            ("lambda", opt(&a.lambda)),
            ("repeats", opt(&a.repeats)),
            ("timing_out", opt_path(&a.timing_out)),
        ],
    )?;
    let seed = s.seed()?;
    let taus: Vec<u64> = s
        .raw("taus")
        .unwrap_or("1,10,100,1000,10000")
        .split(',')
        .map(|v| v.trim().parse::<u64>().map_err(|e| Error::Usage(format!("bad tau '{v}': {e}"))))
        .collect::<Result<_>>()?;
    let lambda: u32 = s.get_or("lambda", 32)?;
    let repeats: usize = s.get_or("repeats", 3)?.max(1);
    let mut csv = format!("{TLP_CSV_HEADER}\n");
    let mut timing = String::from("tau,seconds_min\n");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &tau) in taus.iter().enumerate() {
        let mut rng = derive_rng(seed, "tlp-bench", i as u64);
        let sol = PuzzleSolution::random(rng.random_range(1..100), rng.random_range(100..200), lambda, &mut rng)
            .map_err(usage)?;
        let z = tlp::puzzle_gen(tau, &sol, &mut rng).map_err(usage)?;
        let mut meter = HashMeter::default();
        let back = tlp::puzzle_sol_metered(&z, lambda, &mut meter)?;
        let digest = hex::encode(&Sha256::digest(z.to_bytes())[..8]);
        let _ = writeln!(csv, "{tau},{lambda},{},{},{},{digest}", meter.chain, meter.pad, (back == sol) as u8);
        let best = (0..repeats)
            .map(|_| tlp::time_solve(tau).map(|d| d.as_secs_f64()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let _ = writeln!(timing, "{tau},{best:.9}");
        xs.push(tau as f64);
        ys.push(best);
    }
    if xs.len() >= 2 {
        let (slope, intercept, r2) = tlp::linear_fit(&xs, &ys);
        let _ = writeln!(timing, "# fit seconds = {slope:.3e}*tau + {intercept:.3e}, r2 = {r2:.4}");
    }
    match s.raw("timing_out") {
        Some(p) => fs::write(p, &timing)?,
        None => eprint!("{timing}"),
    }
    write_output(s.out_path().as_deref(), &csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing_skips_comments() {
        let pairs = parse_config("# c\n\nn = 4\nnoise.rate=0.5\n").unwrap();
        assert_eq!(pairs, vec![("n".into(), "4".into()), ("noise.rate".into(), "0.5".into())]);
        assert!(matches!(parse_config("oops"), Err(Error::Usage(_))));
    }

    #[test]
    fn hex_round_trip() {
        assert_eq!(hex_to_bits("17", 8).unwrap(), crate::gc::bits_from_u64(23, 8));
        assert_eq!(bits_to_hex(&crate::gc::bits_from_u64(68, 8)), "44");
        assert_eq!(bits_to_hex(&[true]), "1");
        assert!(hex_to_bits("1ff", 8).is_err());
        assert!(hex_to_bits("zz", 8).is_err());
    }

    #[test]
    fn aliases_fold_onto_one_key() {
        assert_eq!(canonical_key("m"), "bqsm.memory_bound");
        assert_eq!(canonical_key("noise.tau_ticks"), "tau_ticks");
    }
}
