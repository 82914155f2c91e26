//! `regperc`: command-line front end for the percolation lab.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use regperc_core::config_model::{
    pairing_to_multigraph, sample_pairing, sample_simple, DEFAULT_MAX_ATTEMPTS,
};
use regperc_core::experiments::{self, SweepConfig};
use regperc_core::exploration::{self, init_chain, trace_csv, CHAIN_CSV_HEADER};
use regperc_core::oracle::{self, Statistic};
use regperc_core::percolation::{census, percolate, CENSUS_CSV_HEADER};
use regperc_core::rational::{parse_rational, to_f64, Rational};
use regperc_core::rng::seeded;
use regperc_core::{theory, treecount, DegreeSpec, Error, Result, StopPolicy};

#[derive(Parser)]
#[command(
    name = "regperc",
    version,
    about = "Bond percolation on random regular multigraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a pairing and print its multigraph as an edge list
    Sample(SampleArgs),
    /// Percolate a sampled multigraph and print census CSV rows
    Percolate(PercolateArgs),
    /// Run the cluster-growth chain and print run CSV rows
    Explore(ExploreArgs),
    /// Print critical probability, extinction probability, giant fraction and stopping time
    Theory(TheoryArgs),
    /// Expected number of tree components of size k, exact or asymptotic
    Treecount(TreecountArgs),
    /// Exact distributions by exhaustive enumeration (tiny instances only)
    Oracle(OracleArgs),
    /// Run a Monte Carlo sweep from a config file and print CSV
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// Number of vertices
    #[arg(long)]
    n: usize,
    /// Vertex degree
    #[arg(long, default_value_t = 3)]
    d: u32,
    /// Reject pairings until the multigraph is simple
    #[arg(long)]
    simple: bool,
    /// Attempt budget for --simple
    #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    max_attempts: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PercolateArgs {
    /// Number of vertices
    #[arg(long)]
    n: usize,
    /// Vertex degree
    #[arg(long, default_value_t = 3)]
    d: u32,
    /// Open probability (decimal or a/b)
    #[arg(long)]
    p: String,
    /// Rows to emit; row r uses seed + r
    #[arg(long, default_value_t = 1)]
    replicates: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExploreArgs {
    /// Number of vertices
    #[arg(long)]
    n: usize,
    /// Vertex degree
    #[arg(long, default_value_t = 3)]
    d: u32,
    /// Open probability (decimal or a/b)
    #[arg(long)]
    p: String,
    /// Initially active vertices
    #[arg(long, default_value_t = 1)]
    m: u64,
    /// Rows to emit; row r uses seed + r
    #[arg(long, default_value_t = 1)]
    replicates: u64,
    /// Also stop once fewer than n q^d / 2 inactive points remain
    #[arg(long)]
    inactive_floor: bool,
    /// Stop after this many steps
    #[arg(long)]
    max_steps: Option<u64>,
    /// Write a decimated trajectory `t,A,I_0..I_d` here (single replicate only)
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TheoryArgs {
    /// Vertex degree
    #[arg(long, default_value_t = 3)]
    d: u32,
    /// Open probability (decimal or a/b)
    #[arg(long)]
    p: String,
    /// Initially active vertices, for the stopping time with m/n > 0
    #[arg(long, default_value_t = 0)]
    m: u64,
    /// Number of vertices, for m/n (required with --m)
    #[arg(long)]
    n: Option<u64>,
    /// Print JSON instead of key=value lines
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TreecountArgs {
    /// Number of vertices
    #[arg(long)]
    n: u64,
    /// Vertex degree
    #[arg(long, default_value_t = 3)]
    d: u64,
    /// Tree size
    #[arg(long)]
    k: u64,
    /// Open probability; a/b with --exact
    #[arg(long)]
    p: String,
    /// Exact rational value instead of the asymptotic formula
    #[arg(long)]
    exact: bool,
    /// Print JSON
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleStat {
    /// Largest component size
    L1,
    /// Size of the component of vertex --vertex
    Component,
    /// Expected number of tree components of size --k
    Trees,
}

#[derive(Args)]
struct OracleArgs {
    /// Number of vertices (regular spec)
    #[arg(long, required_unless_present = "degrees")]
    n: Option<usize>,
    /// Vertex degree (regular spec)
    #[arg(long, default_value_t = 3)]
    d: u32,
    /// Comma-separated degree sequence, instead of --n/--d
    #[arg(long, conflicts_with = "n")]
    degrees: Option<String>,
    /// Open probability as a/b
    #[arg(long)]
    p: String,
    /// Statistic to tabulate
    #[arg(long, value_enum, default_value_t = OracleStat::L1)]
    stat: OracleStat,
    /// Vertex for --stat component (1-based)
    #[arg(long, default_value_t = 1)]
    vertex: usize,
    /// Tree size for --stat trees
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Print JSON
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config file
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the config's master_seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's replicate count
    #[arg(long)]
    replicates: Option<usize>,
    /// Also write the per-cell JSON summary here
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,
    /// Write CSV here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Accepts `0.6` or `3/5`.
fn float_p(s: &str) -> Result<f64> {
    let p = match parse_rational(s) {
        Ok(r) => to_f64(&r),
        Err(_) => s
            .parse::<f64>()
            .map_err(|_| Error::Validation(format!("bad probability {s:?}")))?,
    };
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Validation(format!("probability {s} outside [0, 1]")));
    }
    Ok(p)
}

fn exact_p(s: &str) -> Result<Rational> {
    let p = parse_rational(s)?;
    regperc_core::rational::check_probability(&p)?;
    Ok(p)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn sample(a: SampleArgs) -> Result<()> {
    let spec = DegreeSpec::regular(a.n, a.d)?;
    let mut rng = seeded(a.common.seed);
    let g = if a.simple {
        sample_simple(&spec, &mut rng, a.max_attempts)?
    } else {
        pairing_to_multigraph(&sample_pairing(&spec, &mut rng)?, &spec)?
    };
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf)?;
    emit(
        &a.common.out,
        &String::from_utf8(buf).expect("edge list is ASCII"),
    )
}

fn check_replicates(r: u64) -> Result<()> {
    if r == 0 {
        return Err(Error::Validation("replicates must be at least 1".into()));
    }
    Ok(())
}

fn percolate_cmd(a: PercolateArgs) -> Result<()> {
    let spec = DegreeSpec::regular(a.n, a.d)?;
    let p = float_p(&a.p)?;
    check_replicates(a.replicates)?;
    let mut out = format!("{CENSUS_CSV_HEADER}\n");
    for r in 0..a.replicates {
        let seed = a.common.seed.wrapping_add(r);
        let mut rng = seeded(seed);
        let pairing = sample_pairing(&spec, &mut rng)?;
        let g = pairing_to_multigraph(&pairing, &spec)?;
        let mask = percolate(&pairing, p, &mut rng)?;
        writeln!(out, "{}", census(&g, &mask)?.csv_row(seed, a.d, p)).unwrap();
    }
    emit(&a.common.out, &out)
}

fn explore(a: ExploreArgs) -> Result<()> {
    let spec = DegreeSpec::regular(a.n, a.d)?;
    let p = float_p(&a.p)?;
    check_replicates(a.replicates)?;
    if a.trace.is_some() && a.replicates != 1 {
        return Err(Error::Validation("--trace needs --replicates 1".into()));
    }
    let start = init_chain(&spec, a.m)?;
    let policy = StopPolicy {
        inactive_floor: a.inactive_floor,
        max_steps: a.max_steps,
        trace: a.trace.is_some(),
    };
    let mut out = format!("{CHAIN_CSV_HEADER}\n");
    for r in 0..a.replicates {
        let seed = a.common.seed.wrapping_add(r);
        let run = exploration::run(start.clone(), p, &mut seeded(seed), policy)?;
        writeln!(out, "{}", run.csv_row(seed, p, a.m)).unwrap();
        if let (Some(path), Some(trace)) = (&a.trace, &run.trace) {
            fs::write(path, trace_csv(trace))?;
        }
    }
    emit(&a.common.out, &out)
}

fn theory_cmd(a: TheoryArgs) -> Result<()> {
    let p = float_p(&a.p)?;
    let m_over_n = match (a.m, a.n) {
        (0, _) => 0.0,
        (m, Some(n)) if m <= n && n > 0 => m as f64 / n as f64,
        (_, None) => return Err(Error::Validation("--m needs --n".into())),
        (m, Some(n)) => return Err(Error::Validation(format!("m = {m} outside [0, {n}]"))),
    };
    let s = theory::summary(a.d, p, m_over_n)?;
    let text = if a.json {
        serde_json::to_string_pretty(&s).expect("summary serializes") + "\n"
    } else {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x}"));
        format!(
            "d={}\np={}\np_star={}\npi={}\nalpha={}\nm_over_n={}\ny_hat={}\ntau_hat={}\n",
            s.d,
            s.p,
            s.p_star,
            s.pi,
            s.alpha,
            s.m_over_n,
            opt(s.y_hat),
            opt(s.tau_hat)
        )
    };
    emit(&a.common.out, &text)
}

fn treecount_cmd(a: TreecountArgs) -> Result<()> {
    let (exact, value) = if a.exact {
        let c = treecount::exact_e_k(a.n, a.d, a.k, &exact_p(&a.p)?)?;
        (Some(c.value.to_string()), c.to_f64())
    } else {
        (
            None,
            treecount::asymptotic_e_k(a.n, a.d, a.k, float_p(&a.p)?)?,
        )
    };
    let text = if a.json {
        let v = serde_json::json!({
            "n": a.n, "d": a.d, "k": a.k, "p": a.p,
            "mode": if a.exact { "exact" } else { "asymptotic" },
            "exact": exact, "value": value,
        });
        serde_json::to_string_pretty(&v).expect("json") + "\n"
    } else {
        match exact {
            Some(r) => format!("E_{}={r}\nE_{}~{value}\n", a.k, a.k),
            None => format!("E_{}~{value}\n", a.k),
        }
    };
    emit(&a.common.out, &text)
}

fn oracle_cmd(a: OracleArgs) -> Result<()> {
    let spec = match (&a.degrees, a.n) {
        (Some(list), _) => {
            let ds = list
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Validation(format!("bad degree list {list:?}")))?;
            DegreeSpec::sequence(ds)?
        }
        (None, Some(n)) => DegreeSpec::regular(n, a.d)?,
        (None, None) => return Err(Error::Validation("need --n or --degrees".into())),
    };
    let p = exact_p(&a.p)?;
    let rows: Vec<(usize, Rational)> = match a.stat {
        OracleStat::Trees => {
            vec![(
                a.k,
                oracle::exact_tree_component_expectation(&spec, &p, a.k)?,
            )]
        }
        OracleStat::L1 | OracleStat::Component => {
            let stat = match a.stat {
                OracleStat::L1 => Statistic::LargestComponent,
                _ => Statistic::ComponentOf(a.vertex),
            };
            oracle::exact_distribution(&spec, &p, stat)?
                .support
                .into_iter()
                .collect()
        }
    };
    let label = match a.stat {
        OracleStat::Trees => "k,expectation,approx",
        _ => "value,probability,approx",
    };
    let text = if a.json {
        let map: serde_json::Map<String, serde_json::Value> = rows
            .iter()
            .map(|(v, r)| (v.to_string(), serde_json::Value::String(r.to_string())))
            .collect();
        serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("json") + "\n"
    } else {
        let mut s = format!("{label}\n");
        for (v, r) in &rows {
            writeln!(s, "{v},{r},{}", to_f64(r)).unwrap();
        }
        s
    };
    emit(&a.common.out, &text)
}

fn sweep_cmd(a: SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config)?;
    let mut cfg = SweepConfig::parse(&text)?;
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    let records = experiments::run_sweep(&cfg)?;
    if let Some(path) = &a.summary {
        fs::write(path, experiments::summary_json(&cfg, &records) + "\n")?;
    }
    emit(&a.out, &experiments::to_csv(&records))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(a) => sample(a),
        Command::Percolate(a) => percolate_cmd(a),
        Command::Explore(a) => explore(a),
        Command::Theory(a) => theory_cmd(a),
        Command::Treecount(a) => treecount_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
