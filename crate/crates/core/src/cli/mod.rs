//! Command-line front end: codebook dumps, seeded simulations, analysis
//! tables and figure data.
//!
//! Every output starts with `#` comment lines naming the tool version, the
//! fully resolved configuration and the seed, so a file can be regenerated
//! from its own header.

pub mod figures;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    avg_r_net_lower, avg_r_res_exact, avg_r_res_lower, beta_star, beta_star_sic, jensen_upper, optimal_k, s_exact,
    s_sic_exact, upper_bound_net, worst_r_res, SchemeParams,
};
use crate::error::{Result, ScraError};
use crate::protocol::{simulate, ProtocolConfig, Workload};
use crate::sigcode::build_codebook;
use figures::{log_grid, FigureName, FigureParams, FigureTable};

/// Environment variable naming the directory outputs go to when `--out`
/// is not given. Without either, output goes to stdout.
pub const OUT_DIR_ENV: &str = "SCRA_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "scra", version, about = "Signature-coded random access: simulator and exact analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a K-out-of-M signature codebook and dump it.
    Codebook(CodebookArgs),
    /// Run seeded contention-resolution trials.
    Simulate(SimulateArgs),
    /// Evaluate throughput and net-rate bounds over a range of K.
    Analyze(AnalyzeArgs),
    /// Emit the data behind one of the figures or tables.
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file. Defaults to $SCRA_OUT_DIR/<name> or stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CodebookArgs {
    #[arg(long = "M")]
    pub m: u32,
    #[arg(long = "K")]
    pub k: u32,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long = "M")]
    pub m: u32,
    #[arg(long = "K")]
    pub k: u32,
    /// Fixed number of active users per trial.
    #[arg(long = "L", conflicts_with_all = ["p", "pm"])]
    pub l: Option<u32>,
    /// Per-user activity probability.
    #[arg(long = "p", conflicts_with = "pm")]
    pub p: Option<f64>,
    /// Expected number of active users; sets p = pM / M.
    #[arg(long = "pM")]
    pub pm: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub sic: bool,
    /// Payload symbols carried by every message.
    #[arg(long = "payload-symbols", default_value_t = 4)]
    pub payload_symbols: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long = "M", default_value_t = 1031)]
    pub m: u64,
    #[arg(long = "K", conflicts_with = "k_range")]
    pub k: Option<u32>,
    /// `a..b` or a comma list.
    #[arg(long = "K-range")]
    pub k_range: Option<String>,
    #[arg(long = "p", conflicts_with = "pm")]
    pub p: Option<f64>,
    #[arg(long = "pM")]
    pub pm: Option<f64>,
    #[arg(long = "P", default_value_t = 100.0)]
    pub power: f64,
    /// Payload bits; `inf` is accepted.
    #[arg(long = "D", default_value_t = 1e4)]
    pub d: f64,
    #[arg(long)]
    pub sic: bool,
    /// Also report S(L) for this batch size.
    #[arg(long = "L")]
    pub l: Option<u64>,
    /// Divide the full-knowledge upper bound by P(L > 0).
    #[arg(long)]
    pub conditioned: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long = "figure", value_parser = clap::value_parser!(FigureName))]
    pub figure: FigureName,
    #[arg(long = "M", default_value_t = 1031)]
    pub m: u64,
    /// K values drawn, `a..b` or a comma list.
    #[arg(long = "K-range")]
    pub k_range: Option<String>,
    /// Largest K searched for the optimum (default floor(M/2)).
    #[arg(long = "K")]
    pub k_max: Option<u32>,
    /// Comma list of expected active-user counts.
    #[arg(long = "pM")]
    pub pm: Option<String>,
    #[arg(long = "P", default_value_t = 100.0)]
    pub power: f64,
    /// `lo:hi:n`, log spaced.
    #[arg(long = "D-range", default_value = "1e2:1e6:41")]
    pub d_range: String,
    /// Largest L for the per-batch figures.
    #[arg(long = "L", default_value_t = 20)]
    pub l: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

impl clap::builder::ValueParserFactory for FigureName {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<FigureName>())
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Codebook(a) => cmd_codebook(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Figure(a) => cmd_figure(a),
    }
}

/// `a..b`, `a..=b` or `a,b,c`, returned sorted and deduplicated.
pub fn parse_k_list(s: &str) -> Result<Vec<u32>> {
    let bad = || ScraError::argument(format!("cannot read K list '{s}'"));
    let mut ks: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() || ks[0] == 0 {
        return Err(ScraError::argument(format!("K list '{s}' must be nonempty and positive")));
    }
    Ok(ks)
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    let mut v = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| ScraError::argument(format!("cannot read positive number '{x}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

/// `lo:hi:n`.
pub fn parse_d_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<_> = s.split(':').collect();
    let bad = || ScraError::argument(format!("D range '{s}' should read lo:hi:n"));
    match parts.as_slice() {
        [lo, hi, n] => {
            log_grid(lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?)
        }
        _ => Err(bad()),
    }
}

fn header(command: &str, config: &[(&str, String)], seed: Option<u64>) -> String {
    let mut h = format!("# scra {}\n# command: {command}\n# config:", env!("CARGO_PKG_VERSION"));
    for (k, v) in config {
        let _ = write!(h, " {k}={v}");
    }
    h.push('\n');
    match seed {
        Some(s) => {
            let _ = writeln!(h, "# seed: {s}");
        }
        None => h.push_str("# seed: none\n"),
    }
    h
}

fn emit(out: &OutArgs, default_name: &str, content: &str) -> Result<()> {
    let path = match (&out.out, std::env::var_os(OUT_DIR_ENV)) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(PathBuf::from(dir).join(default_name)),
        (None, None) => None,
    };
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(&p, content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_codebook(a: CodebookArgs) -> Result<()> {
    let cb = build_codebook(a.m, a.k)?;
    let p = cb.params();
    let config = [
        ("M", a.m.to_string()),
        ("K", a.k.to_string()),
        ("q", p.q.to_string()),
        ("r", p.r.to_string()),
        ("construction", construction_label(&cb)),
    ];
    let text = header("codebook", &config, None) + &cb.dump();
    emit(&a.out, &format!("codebook_M{}_K{}.txt", a.m, a.k), &text)
}

fn construction_label(cb: &crate::sigcode::SignatureCodebook) -> String {
    use crate::numtheory::Construction;
    match cb.sidon().construction() {
        Construction::Identity => "identity".into(),
        Construction::Search => "search".into(),
        Construction::BoseChowla(_) => "bose-chowla".into(),
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    if a.trials == 0 {
        return Err(ScraError::argument("--trials must be at least 1"));
    }
    let (workload, workload_label) = match (a.l, a.p, a.pm) {
        (Some(l), None, None) => (Workload::Fixed(l), format!("L={l}")),
        (None, Some(p), None) => (Workload::Bernoulli(p), format!("p={p}")),
        (None, None, Some(pm)) => (Workload::Bernoulli(pm / a.m as f64), format!("pM={pm}")),
        _ => return Err(ScraError::argument("give exactly one of --L, --p, --pM")),
    };
    if let Workload::Bernoulli(p) = workload {
        if !(0.0..=1.0).contains(&p) {
            return Err(ScraError::argument(format!("activity probability {p} outside [0, 1]")));
        }
    }
    let cb = build_codebook(a.m, a.k)?;
    let config = ProtocolConfig::new(&cb, a.sic, a.payload_symbols, a.seed);
    let summary = simulate(&config, workload, a.trials)?;

    let scheme = if a.sic { "sic" } else { "basic" };
    let settings = [
        ("M", a.m.to_string()),
        ("K", a.k.to_string()),
        ("workload", workload_label.clone()),
        ("trials", a.trials.to_string()),
        ("scheme", scheme.to_string()),
        ("payload_symbols", a.payload_symbols.to_string()),
        ("rng", "chacha8/stream=trial".to_string()),
    ];
    let mut text = header("simulate", &settings, Some(a.seed));
    text.push_str("scheme,K,workload,trials,mean_active,mean_slots,std_error,throughput,theory,z\n");
    let (theory, z) = match workload {
        Workload::Fixed(l) => {
            let s = if a.sic { s_sic_exact(l as u64, a.k) } else { s_exact(l as u64, a.k) };
            let se = summary.slots.std_error();
            let diff = summary.slots.mean() - s;
            let z = if se > 0.0 {
                diff / se
            } else if diff.abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            (s.to_string(), z.to_string())
        }
        Workload::Bernoulli(_) => ("".into(), "".into()),
    };
    let _ = writeln!(
        text,
        "{scheme},{},{workload_label},{},{},{},{},{},{theory},{z}",
        a.k,
        a.trials,
        summary.active.mean(),
        summary.slots.mean(),
        summary.slots.std_error(),
        summary.throughput(),
    );
    emit(&a.out, &format!("simulate_M{}_K{}_{scheme}.csv", a.m, a.k), &text)
}

fn resolve_p(m: u64, p: Option<f64>, pm: Option<f64>) -> Result<(f64, String)> {
    match (p, pm) {
        (Some(p), None) => Ok((p, format!("p={p}"))),
        (None, Some(pm)) => Ok((pm / m as f64, format!("pM={pm}"))),
        (None, None) => Ok((3.0 / m as f64, "pM=3".into())),
        _ => Err(ScraError::argument("give at most one of --p and --pM")),
    }
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<()> {
    let ks = match (&a.k, &a.k_range) {
        (Some(k), None) => vec![*k],
        (None, Some(r)) => parse_k_list(r)?,
        (None, None) => vec![1, 2, 4, 8, 16],
        _ => unreachable!("clap rejects --K with --K-range"),
    };
    let (p, p_label) = resolve_p(a.m, a.p, a.pm)?;
    let scheme = if a.sic { "sic" } else { "basic" };
    let base = SchemeParams::new(a.m, ks[0], p, a.power, a.d, a.sic)?;
    let mut config = vec![
        ("M", a.m.to_string()),
        ("K", ks.iter().map(u32::to_string).collect::<Vec<_>>().join(",")),
        ("activity", p_label),
        ("P", a.power.to_string()),
        ("D", a.d.to_string()),
        ("scheme", scheme.to_string()),
        ("conditioned_upper", a.conditioned.to_string()),
    ];
    if let Some(l) = a.l {
        config.push(("L", l.to_string()));
    }
    let mut text = header("analyze", &config, None);
    text.push_str("K,beta,worst_R_res,R_res_lower,R_res_exact,exact_truncated_at,N_w,R_net_lower");
    if a.l.is_some() {
        text.push_str(",S_L");
    }
    text.push('\n');
    for &k in &ks {
        let params = base.with_k(k)?;
        let exact = avg_r_res_exact(&params)?;
        let beta = if a.sic { beta_star_sic(k) } else { beta_star(k) };
        let _ = write!(
            text,
            "{k},{beta},{},{},{},{},{},{}",
            worst_r_res(k, a.sic),
            avg_r_res_lower(&params)?,
            exact.value,
            exact.truncated_at,
            params.signature_bits(),
            avg_r_net_lower(&params)?,
        );
        if let Some(l) = a.l {
            let s = if a.sic { s_sic_exact(l, k) } else { s_exact(l, k) };
            let _ = write!(text, ",{s}");
        }
        text.push('\n');
    }
    let (k_star, best) = optimal_k(&base, ks[0]..=*ks.last().expect("nonempty"))?;
    let _ = writeln!(
        text,
        "# K_star={k_star} R_net_lower={best} upper_bound={} jensen={}",
        upper_bound_net(&base, a.conditioned)?,
        jensen_upper(&base)
    );
    emit(&a.out, &format!("analyze_M{}_{scheme}.csv", a.m), &text)
}

fn cmd_figure(a: FigureArgs) -> Result<()> {
    let fp = FigureParams {
        m: a.m,
        power: a.power,
        ks: a.k_range.as_deref().map(parse_k_list).transpose()?,
        pms: a.pm.as_deref().map(parse_f64_list).transpose()?,
        ds: parse_d_range(&a.d_range)?,
        l_max: a.l,
        k_star_max: a.k_max,
    };
    if a.m < 2 || !(a.power > 0.0) || a.l == 0 {
        return Err(ScraError::argument("need M >= 2, P > 0 and L >= 1"));
    }
    if fp.k_star_range().is_empty() || *fp.k_star_range().end() as u64 > a.m {
        return Err(ScraError::argument(format!("K search range {:?} does not fit M={}", fp.k_star_range(), a.m)));
    }
    let table = figures::build(a.figure, &fp)?;
    let config = [
        ("figure", a.figure.to_string()),
        ("M", a.m.to_string()),
        ("P", a.power.to_string()),
        ("K-range", a.k_range.clone().unwrap_or_else(|| "default".into())),
        ("K-search", format!("1..={}", fp.k_star_range().end())),
        ("pM", a.pm.clone().unwrap_or_else(|| "default".into())),
        ("D-range", a.d_range.clone()),
        ("L", a.l.to_string()),
    ];
    let text = header("figure", &config, None) + &table.render();
    // Validate what is about to be written, read back from its text form.
    figures::validate(a.figure, &FigureTable::parse(&text)?, &fp)?;
    emit(&a.out, &format!("{}.csv", a.figure), &text)
}
