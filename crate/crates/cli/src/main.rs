use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use spls_core::benders::solve_benders;
use spls_core::cuts::{Family, CUT_LOG_HEADER};
use spls_core::formulation::{build, Formulation};
use spls_core::instance::generate;
use spls_core::solver::{solve, CutConfig, SolveOptions, SolveReport, SolveStatus};
use spls_core::suites::{facets_suite, hull_suite, separation_suite, validity_suite, SuiteReport};
use spls_core::Instance;

const EXIT_USAGE: u8 = 2;
const EXIT_TIME_LIMIT: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_VERIFY: u8 = 5;

const BENCH_HEADER: [&str; 13] = [
    "eps",
    "n",
    "m",
    "method",
    "cuts",
    "time_sec",
    "gap_pct",
    "nodes",
    "root_gap_pct",
    "cuts_mixing",
    "cuts_new",
    "cuts_stock",
    "cuts_benders",
];

#[derive(Parser)]
#[command(name = "spls", version, about = "Static probabilistic lot-sizing: models, cuts and certifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Compact)]
        method: Method,
        /// Comma-separated subset of mixing,new,stock,ls; empty for none.
        #[arg(long, default_value = "mixing,new,stock")]
        cuts: String,
        #[arg(long, default_value_t = 150)]
        mixing_limit: usize,
        /// Seconds.
        #[arg(long, default_value_t = 600.0)]
        time_limit: f64,
        /// Report JSON; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write every added cut as CSV.
        #[arg(long)]
        cut_log: Option<PathBuf>,
        /// Benders iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run an oracle-backed verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a benchmark grid and write averaged rows as CSV.
    Bench {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Dep,
    Compact,
    Benders,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Dep => "dep",
            Method::Compact => "compact",
            Method::Benders => "benders",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Validity,
    Separation,
    Hull,
    Facets,
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn parse_cuts(list: &str, mixing_limit: usize) -> Result<CutConfig> {
    let mut families = Vec::new();
    for name in list.split([',', '+']).map(str::trim).filter(|s| !s.is_empty()) {
        families.push(match name.to_ascii_lowercase().as_str() {
            "mixing" => Family::Mixing,
            "new" => Family::New,
            "stock" => Family::Stock,
            "ls" => Family::LsBigM,
            other => return Err(usage(format!("unknown cut family '{other}'"))),
        });
    }
    Ok(CutConfig { mixing_limit, ..CutConfig::only(&families) })
}

/// Drops stock cuts for models without inventory columns.
fn fit_cuts(mut cfg: CutConfig, method: Method) -> (CutConfig, bool) {
    let dropped = cfg.stock && method != Method::Dep;
    if dropped {
        cfg.stock = false;
    }
    (cfg, dropped)
}

struct Solved {
    report: SolveReport,
    trace_csv: Option<String>,
}

fn run_method(inst: &Instance, method: Method, cfg: &CutConfig, limit: Duration, log_cuts: bool) -> Result<Solved> {
    Ok(match method {
        Method::Benders => {
            let r = solve_benders(inst, cfg, limit)?;
            let trace_csv = Some(r.trace_csv());
            Solved { report: r.report, trace_csv }
        }
        Method::Dep | Method::Compact => {
            let f = if method == Method::Dep { Formulation::Dep } else { Formulation::Compact };
            let opts = SolveOptions { log_cuts, ..SolveOptions::with_time_limit(limit) };
            Solved { report: solve(&build(inst, f), cfg, &opts)?, trace_csv: None }
        }
    })
}

fn seconds(s: f64) -> Result<Duration> {
    if !(s.is_finite() && s > 0.0) {
        return Err(usage("--time-limit must be positive"));
    }
    Ok(Duration::from_secs_f64(s))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(n: usize, m: usize, eps: f64, seed: u64, out: Option<PathBuf>) -> Result<u8> {
    if !(0.0..1.0).contains(&eps) {
        return Err(usage("--eps must satisfy 0 <= eps < 1"));
    }
    let inst = generate(n, m, eps, seed).map_err(|e| usage(e.to_string()))?;
    let mut json = inst.to_json();
    json.push('\n');
    write_or_print(out.as_deref(), &json)?;
    match out {
        Some(p) => println!("wrote {} (n={n}, m={m}, k={})", p.display(), inst.k()),
        None => eprintln!("k={}", inst.k()),
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    input: &Path,
    method: Method,
    cuts: &str,
    mixing_limit: usize,
    time_limit: f64,
    out: Option<&Path>,
    cut_log: Option<&Path>,
    trace: Option<&Path>,
) -> Result<u8> {
    let cfg = parse_cuts(cuts, mixing_limit)?;
    let limit = seconds(time_limit)?;
    let inst = Instance::load(input).map_err(|e| usage(format!("{}: {e}", input.display())))?;
    let (cfg, dropped) = fit_cuts(cfg, method);
    if dropped {
        eprintln!("warning: stock cuts need inventory variables; skipped for --method {}", method.name());
    }
    let solved = run_method(&inst, method, &cfg, limit, cut_log.is_some())?;
    let mut json = serde_json::to_string_pretty(&solved.report.to_json())?;
    json.push('\n');
    write_or_print(out, &json)?;
    if let Some(p) = cut_log {
        let mut text = format!("{CUT_LOG_HEADER}\n");
        for line in &solved.report.cut_log {
            text.push_str(line);
            text.push('\n');
        }
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = trace {
        match &solved.trace_csv {
            Some(csv) => fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
            None => eprintln!("warning: --trace only applies to --method benders"),
        }
    }
    Ok(match solved.report.status {
        SolveStatus::Optimal => 0,
        SolveStatus::TimeLimit => EXIT_TIME_LIMIT,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
    })
}

fn cmd_verify(suite: Suite, trials: Option<usize>, seed: u64) -> Result<u8> {
    let report: SuiteReport = match suite {
        Suite::Validity => validity_suite(trials.unwrap_or(200), seed)?,
        Suite::Separation => {
            let points = trials.unwrap_or(1000);
            separation_suite(points, points.div_ceil(5), seed)?
        }
        Suite::Hull => hull_suite(10, trials.unwrap_or(100), seed)?,
        Suite::Facets => facets_suite(trials.unwrap_or(12), seed)?,
    };
    println!("{}", report.summary());
    for note in &report.notes {
        println!("  {note}");
    }
    for f in &report.failures {
        println!("failure: {}", f.detail);
        if !f.instance.is_empty() {
            println!("instance: {}", f.instance);
        }
    }
    Ok(if report.passed() { 0 } else { EXIT_VERIFY })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Grid {
    eps: Vec<f64>,
    n: Vec<usize>,
    m: Vec<usize>,
    seeds: Vec<u64>,
    methods: Vec<Method>,
    /// Each entry is a cut list as accepted by `solve --cuts`.
    #[serde(default = "default_cut_sets")]
    cuts: Vec<String>,
    #[serde(default = "default_time_limit")]
    time_limit: f64,
    #[serde(default = "default_mixing_limit")]
    mixing_limit: usize,
}

fn default_cut_sets() -> Vec<String> {
    vec!["mixing,new,stock".into()]
}

fn default_time_limit() -> f64 {
    600.0
}

fn default_mixing_limit() -> usize {
    150
}

#[derive(Default)]
struct Mean {
    sum: f64,
    count: usize,
}

impl Mean {
    fn add(&mut self, v: f64) {
        if v.is_finite() {
            self.sum += v;
            self.count += 1;
        }
    }

    fn get(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }
}

fn bench_row(inst_of: impl Fn(u64) -> Result<Instance>, grid: &Grid, method: Method, cfg: &CutConfig) -> [Mean; 8] {
    let mut acc: [Mean; 8] = Default::default();
    let limit = Duration::from_secs_f64(grid.time_limit);
    for &seed in &grid.seeds {
        let r = inst_of(seed).and_then(|inst| run_method(&inst, method, cfg, limit, false));
        match r {
            Ok(s) => {
                let r = &s.report;
                let values = [
                    r.time_sec,
                    r.gap_pct(),
                    r.nodes as f64,
                    r.root_gap_pct,
                    r.cut_count(Family::Mixing) as f64,
                    r.cut_count(Family::New) as f64,
                    r.cut_count(Family::Stock) as f64,
                    r.cut_count(Family::BendersOpt) as f64,
                ];
                for (a, v) in acc.iter_mut().zip(values) {
                    a.add(v);
                }
            }
            Err(e) => eprintln!("warning: seed {seed} {} failed: {e:#}", method.name()),
        }
    }
    acc
}

fn cmd_bench(grid_path: &Path, out: &Path) -> Result<u8> {
    let text = fs::read_to_string(grid_path).with_context(|| format!("reading {}", grid_path.display()))?;
    let grid: Grid = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", grid_path.display())))?;
    if grid.seeds.is_empty() {
        return Err(usage("grid needs at least one seed"));
    }
    seconds(grid.time_limit)?;
    let cut_sets: Vec<CutConfig> =
        grid.cuts.iter().map(|c| parse_cuts(c, grid.mixing_limit)).collect::<Result<_>>()?;

    let mut w = csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
    w.write_record(BENCH_HEADER)?;
    for &eps in &grid.eps {
        for &n in &grid.n {
            for &m in &grid.m {
                for &method in &grid.methods {
                    for cfg in &cut_sets {
                        let (cfg, _) = fit_cuts(cfg.clone(), method);
                        let inst_of = |seed| generate(n, m, eps, seed).map_err(anyhow::Error::from);
                        let acc = bench_row(inst_of, &grid, method, &cfg);
                        let mut rec = vec![eps.to_string(), n.to_string(), m.to_string(), method.name().into()];
                        rec.push(if cfg.label().is_empty() { "none".into() } else { cfg.label() });
                        rec.extend(acc.iter().map(|a| format!("{:.6}", a.get())));
                        w.write_record(&rec)?;
                        w.flush()?;
                    }
                }
            }
        }
    }
    w.flush()?;
    println!("wrote {}", out.display());
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen { n, m, eps, seed, out } => cmd_gen(n, m, eps, seed, out),
        Command::Solve { input, method, cuts, mixing_limit, time_limit, out, cut_log, trace } => cmd_solve(
            &input,
            method,
            &cuts,
            mixing_limit,
            time_limit,
            out.as_deref(),
            cut_log.as_deref(),
            trace.as_deref(),
        ),
        Command::Verify { suite, trials, seed } => cmd_verify(suite, trials, seed),
        Command::Bench { grid, out } => cmd_bench(&grid, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Usage>() { EXIT_USAGE } else { 1 })
        }
    }
}
