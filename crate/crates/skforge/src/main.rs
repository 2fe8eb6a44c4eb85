use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use skforge::bench::{self, BenchConfig};
use skforge::gateset::{self, GateFileError, LoadedGateSet};
use skforge::netfile::{self, NetFileError};
use skforge::verify;
use skforge_core::basenet::{Net, NetParams};
use skforge_core::real::working_precision;
use skforge_core::steps::{StepParams, DEFAULT_CONJ_LEN};
use skforge_core::su2::GroupElement;
use skforge_core::words::Template;
use skforge_core::zigzag::{SynthError, SynthParams, Synthesizer, DEFAULT_CK};

/// Exit code for command-line usage errors (clap's own 2 is taken).
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "skforge", version, about = "Single-qubit gate synthesis by zigzag recursion over a base net")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Working precision in bits (default: derived from n).
    #[arg(long, global = true)]
    precision_bits: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Step candidates tried per index.
    #[arg(long, global = true, default_value_t = 3)]
    window: usize,
    /// Longest conjugator word used when tuning steps.
    #[arg(long, global = true, default_value_t = DEFAULT_CONJ_LEN)]
    conj_len: usize,
    /// Extra conjugator bits c_k.
    #[arg(long, global = true, default_value_t = DEFAULT_CK)]
    ck: usize,
    /// Step template: comm or elk3..elk9.
    #[arg(long, global = true, default_value = "comm", value_parser = parse_template)]
    template: Template,
    /// Output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Gate-set JSON file (default: bundled Clifford+T).
    #[arg(long, global = true)]
    gates: Option<PathBuf>,
    /// Net file (default: cached under SKFORGE_NET_CACHE, built if missing).
    #[arg(long, global = true)]
    net: Option<PathBuf>,
    /// Longest net word.
    #[arg(long, global = true, default_value_t = 18)]
    l0: usize,
    /// Net dedupe radius.
    #[arg(long, global = true, default_value_t = 1e-4)]
    delta_d: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Build a net file and print its covering estimate.
    NetBuild,
    /// Synthesize one target.
    Synth {
        /// `a,b,c,d`, a gate word such as `H T H`, `identity` or `random`.
        #[arg(long, default_value = "random")]
        target: String,
        /// Accuracy index: the word is within 2^-n of the target.
        #[arg(short, long)]
        n: usize,
    },
    /// Length-scaling benchmark written as CSV.
    Bench {
        #[arg(long, default_value_t = 10)]
        n_min: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, value_delimiter = ',', default_value = "comm,elk5", value_parser = parse_template)]
        templates: Vec<Template>,
        #[arg(long, default_value_t = 3)]
        targets: usize,
        /// Write wall_ms as 0 so the CSV depends only on the manifest.
        #[arg(long)]
        no_timing: bool,
    },
    /// Run a verification suite.
    Verify {
        what: Suite,
        /// Largest index (sample count for `cross`).
        n_max: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    ElkasapyLengths,
    Nilfib,
    Cross,
    Endpoints,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{failed} verification row(s) failed")]
    Verify { failed: usize },
    #[error("only {0:.1}% of bench rows succeeded")]
    Bench(f64),
    #[error("bad target: {0}")]
    BadTarget(String),
    #[error("{0}")]
    Usage(String),
}

fn parse_template(s: &str) -> Result<Template, String> {
    Template::parse(s).ok_or_else(|| format!("unknown template {s:?}; expected comm or elk3..elk9"))
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(e) = cause.downcast_ref::<GateFileError>() {
            return match e {
                GateFileError::Invalid(_) => 2,
                _ => 3,
            };
        }
        if cause.is::<NetFileError>() || cause.is::<std::io::Error>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<SynthError>() {
            return match e {
                SynthError::PrecisionShortfall { .. } => 5,
                _ => 4,
            };
        }
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Verify { .. } => 1,
                CliError::Bench(_) => 4,
                CliError::BadTarget(_) | CliError::Usage(_) => EXIT_USAGE,
            };
        }
    }
    1
}

/// The error chain, skipping causes already quoted by their parent.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn cache_dir() -> PathBuf {
    let env = |k| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
    env("SKFORGE_NET_CACHE")
        .or_else(|| env("XDG_CACHE_HOME").map(|p| p.join("skforge")))
        .or_else(|| env("HOME").map(|p| p.join(".cache").join("skforge")))
        .unwrap_or_else(|| std::env::temp_dir().join("skforge"))
}

fn cache_path(gs: &LoadedGateSet, c: &Common) -> PathBuf {
    cache_dir().join(format!("{}-L{}.sknet", &gs.hash_hex()[..16], c.l0))
}

fn net_params(c: &Common) -> NetParams {
    NetParams { max_len: c.l0, delta_d: c.delta_d }
}

/// The `--net` file, else the cached net for this gate set and `--l0`,
/// building and caching it when absent or stale.
fn obtain_net(gs: &LoadedGateSet, c: &Common) -> Result<Net> {
    if let Some(p) = &c.net {
        return Ok(netfile::load(p, &gs.gates, &gs.hash)?);
    }
    let path = cache_path(gs, c);
    if let Ok(net) = netfile::load(&path, &gs.gates, &gs.hash) {
        if net.params() == net_params(c) {
            return Ok(net);
        }
    }
    eprintln!("building net (L0 = {}) at {}", c.l0, path.display());
    let net = Net::build(&gs.gates, net_params(c));
    if let Err(e) = netfile::save(&net, &gs.hash, &path) {
        eprintln!("warning: net not cached: {e}");
    }
    Ok(net)
}

fn parse_target(text: &str, gs: &LoadedGateSet, seed: u64, p: usize) -> Result<GroupElement> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("identity") {
        return Ok(GroupElement::identity(p));
    }
    if t.eq_ignore_ascii_case("random") {
        return Ok(bench::random_targets(seed, 1, p).remove(0));
    }
    if t.contains(',') {
        let v: Vec<f64> = t
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::BadTarget(format!("{t:?}: {e}")))?;
        let v: [f64; 4] = v.try_into().map_err(|_| CliError::BadTarget(format!("{t:?}: expected four numbers")))?;
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 1e-12) {
            return Err(CliError::BadTarget(format!("{t:?} does not normalize")).into());
        }
        return Ok(GroupElement::from_f64(v, p).normalized());
    }
    let word = gs.gates.parse_word(t).map_err(|e| CliError::BadTarget(e.to_string()))?;
    Ok(gs.gates.evaluate(&word, p))
}

fn step_params(c: &Common) -> StepParams {
    StepParams { template: c.template, window: c.window, conj_len: c.conj_len }
}

fn net_build(c: &Common) -> Result<()> {
    let gs = gateset::load_or_default(c.gates.as_deref())?;
    let net = Net::build(&gs.gates, net_params(c));
    let path = c.out.clone().unwrap_or_else(|| cache_path(&gs, c));
    netfile::save(&net, &gs.hash, &path)?;
    println!("entries: {}", net.entries().len());
    println!("covering_estimate: {:.6}", net.covering());
    println!("written: {}", path.display());
    Ok(())
}

fn synth(c: &Common, target: &str, n: usize) -> Result<()> {
    let gs = gateset::load_or_default(c.gates.as_deref())?;
    let p = c.precision_bits.unwrap_or_else(|| working_precision(n));
    let g = parse_target(target, &gs, c.seed, p)?;
    let net = obtain_net(&gs, c)?;
    let params = SynthParams { template: c.template, c_k: c.ck, ..SynthParams::default() };
    let mut sy = Synthesizer::new(&gs.gates, &net, params, step_params(c), p);
    let r = sy.synthesize(&g, n)?;
    let text = gs.gates.word_to_text(&r.word);
    println!("word: {}", if text.is_empty() { "(empty)" } else { &text });
    println!("length: {}", r.word.len());
    let d = r.achieved_distance.to_f64();
    if d == 0.0 {
        println!("distance: 0 rad (exact)");
    } else {
        println!("distance: {d:.6e} rad ({:.2} bits)", -r.achieved_distance.log2());
    }
    println!("precision: {} bits", r.precision);
    Ok(())
}

fn bench_cmd(c: &Common, n_min: usize, n_max: usize, templates: Vec<Template>, targets: usize, no_timing: bool) -> Result<()> {
    if n_min < 1 || n_max < n_min {
        return Err(CliError::Usage(format!("need 1 <= n_min <= n_max, got {n_min}..{n_max}")).into());
    }
    let gs = gateset::load_or_default(c.gates.as_deref())?;
    let net = obtain_net(&gs, c)?;
    let cfg = BenchConfig {
        n_min,
        n_max,
        templates,
        targets,
        seed: c.seed,
        step: step_params(c),
        c_k: c.ck,
        precision: c.precision_bits.unwrap_or_else(|| working_precision(n_max)),
        timing: !no_timing,
    };
    let report = bench::run(&gs.gates, gs.hash_hex(), &net, &cfg);
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from("bench.csv"));
    report.save(&out).with_context(|| format!("writing {}", out.display()))?;
    print!("{}", report.summary(SynthParams::default().m_mult));
    println!("written: {}", out.display());
    let frac = report.success_fraction();
    if frac < 0.9 {
        return Err(CliError::Bench(100.0 * frac).into());
    }
    Ok(())
}

fn verify_cmd(c: &Common, what: Suite, n_max: Option<usize>) -> Result<()> {
    let table = match what {
        Suite::ElkasapyLengths => verify::elkasapy_lengths(n_max.unwrap_or(24) as u32),
        Suite::Nilfib => verify::nilfib(n_max.unwrap_or(9) as u32),
        Suite::Cross => verify::cross(n_max.unwrap_or(1000), c.seed, c.precision_bits.unwrap_or(128)),
        Suite::Endpoints => verify::endpoints_table(n_max.unwrap_or(24) as u32),
    };
    print!("{}", table.render());
    if !table.all_passed() {
        return Err(CliError::Verify { failed: table.rows.len() - table.passed() }.into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let c = &cli.common;
    let r = match cli.command {
        Command::NetBuild => net_build(c),
        Command::Synth { target, n } => synth(c, &target, n),
        Command::Bench { n_min, n_max, templates, targets, no_timing } => bench_cmd(c, n_min, n_max, templates, targets, no_timing),
        Command::Verify { what, n_max } => verify_cmd(c, what, n_max),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
