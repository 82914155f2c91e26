//! Seeded Monte Carlo sweeps over `(n, p)` grids.
//!
//! A sweep is a pure function of its [`SweepConfig`]: every replicate draws
//! from its own stream keyed by `(master_seed, n, p, replicate)`, jobs may run
//! on any number of workers, and records always come back in lexicographic
//! `(n, p, replicate)` order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config_model::{pairing_to_multigraph, sample_pairing, DegreeSpec};
use crate::error::{Error, Result};
use crate::exploration::{self, init_chain, StopPolicy, StopReason};
use crate::percolation::{census, percolate, tree_component_count};
use crate::rng::{derive_u64, seeded};
use crate::theory;

pub const SWEEP_CSV_HEADER: &str = "seed,n,d,p,m,mode,replicate,L1,L2,num_components,\
tree_k_lo,tree_k_hi,tree_count,T,C_n,stop_reason,error,wall_ms";

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "REGPERC_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Census,
    Exploration,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Census => "census",
            Mode::Exploration => "exploration",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "census" => Ok(Mode::Census),
            "exploration" => Ok(Mode::Exploration),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub d: u32,
    pub n_list: Vec<usize>,
    /// Absolute probabilities.
    pub p_list: Vec<f64>,
    /// Window offsets `c`, each giving `p = p* + c n^(-1/3)` per `n`.
    pub p_offsets: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub mode: Mode,
    /// Initial active vertices in exploration mode.
    pub m: u64,
    pub tree_k: Option<(usize, usize)>,
    pub max_steps: Option<u64>,
    pub threads: Option<usize>,
    /// Fill `wall_ms`; off by default because timings break byte-identity.
    pub record_wall_time: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            d: 3,
            n_list: Vec::new(),
            p_list: Vec::new(),
            p_offsets: Vec::new(),
            replicates: 1,
            master_seed: 0,
            mode: Mode::Census,
            m: 1,
            tree_k: None,
            max_steps: None,
            threads: None,
            record_wall_time: false,
        }
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value {raw:?} for {key}"),
    })
}

/// Accepts `100000`, `1e5` or `10^5`.
fn parse_size(line: usize, raw: &str) -> Result<usize> {
    if let Ok(v) = raw.parse::<usize>() {
        return Ok(v);
    }
    let v = match raw.split_once('^') {
        Some((b, e)) => parse_num::<f64>(line, "n", b)?.powf(parse_num::<f64>(line, "n", e)?),
        None => parse_num::<f64>(line, "n", raw)?,
    };
    if v.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&v) {
        return Err(Error::Parse {
            line,
            msg: format!("n = {raw:?} is not a positive integer"),
        });
    }
    Ok(v as usize)
}

impl SweepConfig {
    /// Parses `key = value` lines. `#` starts a comment. `n`, `p` and
    /// `p_offset` take comma lists and may repeat; other keys appear once.
    pub fn parse(text: &str) -> Result<SweepConfig> {
        let mut cfg = SweepConfig::default();
        let mut seen = std::collections::HashSet::new();
        let (mut k_lo, mut k_hi) = (None, None);
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw_line.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: "expected key = value".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let list = matches!(key, "n" | "p" | "p_offset");
            if !list && !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key {key}"),
                });
            }
            let items = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
            match key {
                "d" => cfg.d = parse_num(line, key, value)?,
                "n" => {
                    for s in items() {
                        cfg.n_list.push(parse_size(line, s)?);
                    }
                }
                "p" => {
                    for s in items() {
                        cfg.p_list.push(parse_num(line, key, s)?);
                    }
                }
                "p_offset" => {
                    for s in items() {
                        cfg.p_offsets.push(parse_num(line, key, s)?);
                    }
                }
                "replicates" => cfg.replicates = parse_num(line, key, value)?,
                "master_seed" => cfg.master_seed = parse_num(line, key, value)?,
                "mode" => {
                    cfg.mode = value.parse().map_err(|e: Error| Error::Parse {
                        line,
                        msg: e.to_string(),
                    })?
                }
                "m" => cfg.m = parse_num(line, key, value)?,
                "tree_k_lo" => k_lo = Some(parse_num(line, key, value)?),
                "tree_k_hi" => k_hi = Some(parse_num(line, key, value)?),
                "max_steps" => cfg.max_steps = Some(parse_num(line, key, value)?),
                "threads" => cfg.threads = Some(parse_num(line, key, value)?),
                "record_wall_time" => cfg.record_wall_time = parse_num(line, key, value)?,
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        cfg.tree_k = match (k_lo, k_hi) {
            (None, None) => None,
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (Some(k), None) | (None, Some(k)) => Some((k, k)),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::invalid("sweep needs at least one n"));
        }
        if self.p_list.is_empty() && self.p_offsets.is_empty() {
            return Err(Error::invalid("sweep needs at least one p or p_offset"));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be at least 1"));
        }
        if let Some((lo, hi)) = self.tree_k {
            if lo == 0 || lo > hi {
                return Err(Error::invalid(format!(
                    "tree range [{lo}, {hi}] is empty or starts at 0"
                )));
            }
        }
        for &n in &self.n_list {
            DegreeSpec::regular(n, self.d)?;
            if self.mode == Mode::Exploration && (self.m == 0 || self.m > n as u64) {
                return Err(Error::invalid(format!("m = {} outside [1, {n}]", self.m)));
            }
        }
        for (n, p) in self.cells() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("p = {p} at n = {n} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn p_star(&self) -> f64 {
        1.0 / (self.d as f64 - 1.0)
    }

    /// Distinct `(n, p)` cells in canonical order.
    pub fn cells(&self) -> Vec<(usize, f64)> {
        let p_star = self.p_star();
        let mut cells = Vec::new();
        for &n in &self.n_list {
            for &p in &self.p_list {
                cells.push((n, p));
            }
            for &c in &self.p_offsets {
                cells.push((n, p_star + c * (n as f64).powf(-1.0 / 3.0)));
            }
        }
        cells.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        cells.dedup_by(|a, b| a.0 == b.0 && a.1.to_bits() == b.1.to_bits());
        cells
    }

    /// `omega = n^(1/3) |p - p*|`.
    pub fn omega(&self, n: usize, p: f64) -> f64 {
        (n as f64).cbrt() * (p - self.p_star()).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub seed: u64,
    pub n: usize,
    pub d: u32,
    pub p: f64,
    pub m: Option<u64>,
    pub mode: Mode,
    pub replicate: usize,
    pub l1: Option<usize>,
    pub l2: Option<usize>,
    pub num_components: Option<usize>,
    pub tree_k: Option<(usize, usize)>,
    pub tree_count: Option<usize>,
    pub t: Option<u64>,
    pub c_n: Option<u64>,
    pub stop_reason: Option<StopReason>,
    pub error: Option<String>,
    pub wall_ms: Option<f64>,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl SweepRecord {
    pub fn csv_row(&self) -> String {
        let (k_lo, k_hi) = match self.tree_k {
            Some((lo, hi)) => (lo.to_string(), hi.to_string()),
            None => (String::new(), String::new()),
        };
        let error = self
            .error
            .as_deref()
            .map(|e| e.replace([',', '\n', '\r'], ";"))
            .unwrap_or_default();
        let wall = self.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{k_lo},{k_hi},{},{},{},{},{error},{wall}",
            self.seed,
            self.n,
            self.d,
            self.p,
            opt(&self.m),
            self.mode.as_str(),
            self.replicate,
            opt(&self.l1),
            opt(&self.l2),
            opt(&self.num_components),
            opt(&self.tree_count),
            opt(&self.t),
            opt(&self.c_n),
            self.stop_reason.map(StopReason::as_str).unwrap_or(""),
        )
    }
}

impl Serialize for StopReason {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Seed of one replicate, as reported in the `seed` column.
pub fn replicate_seed(master_seed: u64, n: usize, p: f64, replicate: usize) -> u64 {
    derive_u64(master_seed, &[n as u64, p.to_bits(), replicate as u64])
}

fn run_job(cfg: &SweepConfig, n: usize, p: f64, replicate: usize) -> SweepRecord {
    let seed = replicate_seed(cfg.master_seed, n, p, replicate);
    let mut rec = SweepRecord {
        seed,
        n,
        d: cfg.d,
        p,
        m: (cfg.mode == Mode::Exploration).then_some(cfg.m),
        mode: cfg.mode,
        replicate,
        l1: None,
        l2: None,
        num_components: None,
        tree_k: None,
        tree_count: None,
        t: None,
        c_n: None,
        stop_reason: None,
        error: None,
        wall_ms: None,
    };
    let start = Instant::now();
    let outcome = (|| -> Result<()> {
        let spec = DegreeSpec::regular(n, cfg.d)?;
        let mut rng = seeded(seed);
        match cfg.mode {
            Mode::Census => {
                let pairing = sample_pairing(&spec, &mut rng)?;
                let g = pairing_to_multigraph(&pairing, &spec)?;
                let mask = percolate(&pairing, p, &mut rng)?;
                let c = census(&g, &mask)?;
                rec.l1 = Some(c.l1());
                rec.l2 = Some(c.l2());
                rec.num_components = Some(c.num_components());
                if let Some((lo, hi)) = cfg.tree_k {
                    rec.tree_k = Some((lo, hi));
                    rec.tree_count = Some(tree_component_count(&c, lo, hi)?);
                }
            }
            Mode::Exploration => {
                let state = init_chain(&spec, cfg.m)?;
                let policy = StopPolicy {
                    max_steps: cfg.max_steps,
                    ..StopPolicy::default()
                };
                let run = exploration::run(state, p, &mut rng, policy)?;
                rec.t = Some(run.steps());
                rec.c_n = Some(run.component_size());
                rec.stop_reason = Some(run.stop_reason);
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error = Some(e.to_string());
    }
    if cfg.record_wall_time {
        rec.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    rec
}

fn worker_count(cfg: &SweepConfig) -> usize {
    let mut workers = cfg
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if let Some(cap) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        workers = workers.min(cap.max(1));
    }
    workers.max(1)
}

/// Runs every `(cell, replicate)` job. Per-job failures land in the record's
/// error column; only an invalid config or a pool failure aborts.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, f64, usize)> = cfg
        .cells()
        .into_iter()
        .flat_map(|(n, p)| (0..cfg.replicates).map(move |r| (n, p, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cfg))
        .build()
        .map_err(|e| Error::Numerical {
            what: format!("worker pool: {e}"),
            residual: 0.0,
        })?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|&(n, p, r)| run_job(cfg, n, p, r))
            .collect()
    }))
}

pub fn write_csv<W: Write>(records: &[SweepRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    writeln!(out, "{SWEEP_CSV_HEADER}").unwrap();
    for r in records {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    out
}

/// `q`-quantile of sorted data with linear interpolation between order
/// statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean after dropping `floor(trim * len)` points from each end.
pub fn trimmed_mean(sorted: &[f64], trim: f64) -> f64 {
    let cut = (sorted.len() as f64 * trim).floor() as usize;
    let kept = &sorted[cut..sorted.len() - cut];
    kept.iter().sum::<f64>() / kept.len() as f64
}

pub const TRIM_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub trimmed_mean: f64,
    pub min: f64,
    pub max: f64,
    pub q10: f64,
    pub q25: f64,
    pub q75: f64,
    pub q90: f64,
}

impl StatSummary {
    pub fn from_values(mut v: Vec<f64>) -> Option<StatSummary> {
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(StatSummary {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: quantile(&v, 0.5),
            trimmed_mean: trimmed_mean(&v, TRIM_FRACTION),
            min: v[0],
            max: v[v.len() - 1],
            q10: quantile(&v, 0.1),
            q25: quantile(&v, 0.25),
            q75: quantile(&v, 0.75),
            q90: quantile(&v, 0.9),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub p: f64,
    pub omega: f64,
    /// `p > p*` with `omega >= (ln n)^2`.
    pub deep_supercritical: bool,
    pub replicates: usize,
    pub errors: usize,
    pub stats: BTreeMap<String, StatSummary>,
}

/// Per-cell summaries keyed `"n=<n>,p=<p>"`, in canonical cell order.
pub fn summarize(cfg: &SweepConfig, records: &[SweepRecord]) -> Vec<(String, CellSummary)> {
    let mut out = Vec::new();
    for (n, p) in cfg.cells() {
        let cell: Vec<&SweepRecord> = records
            .iter()
            .filter(|r| r.n == n && r.p.to_bits() == p.to_bits())
            .collect();
        let ok: Vec<&&SweepRecord> = cell.iter().filter(|r| r.error.is_none()).collect();
        let mut stats = BTreeMap::new();
        let columns: [(&str, fn(&SweepRecord) -> Option<f64>); 6] = [
            ("L1", |r| r.l1.map(|v| v as f64)),
            ("L2", |r| r.l2.map(|v| v as f64)),
            ("num_components", |r| r.num_components.map(|v| v as f64)),
            ("tree_count", |r| r.tree_count.map(|v| v as f64)),
            ("T", |r| r.t.map(|v| v as f64)),
            ("C_n", |r| r.c_n.map(|v| v as f64)),
        ];
        for (name, get) in columns {
            if let Some(s) = StatSummary::from_values(ok.iter().filter_map(|r| get(r)).collect()) {
                stats.insert(name.to_string(), s);
            }
        }
        let omega = cfg.omega(n, p);
        out.push((
            format!("n={n},p={p}"),
            CellSummary {
                n,
                p,
                omega,
                deep_supercritical: p > cfg.p_star() && omega >= (n as f64).ln().powi(2),
                replicates: cell.len(),
                errors: cell.len() - ok.len(),
                stats,
            },
        ));
    }
    out
}

pub fn summary_json(cfg: &SweepConfig, records: &[SweepRecord]) -> String {
    let map: serde_json::Map<String, serde_json::Value> = summarize(cfg, records)
        .into_iter()
        .map(|(k, v)| (k, serde_json::to_value(v).expect("summary serializes")))
        .collect();
    serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("summary serializes")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence half-width of the slope.
    pub half_width: f64,
}

/// Least-squares slope of `ln(statistic)` against `ln(n)`.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::invalid("scaling fit needs at least 3 distinct n"));
    }
    if points
        .iter()
        .any(|&(n, s)| !(n > 0.0) || !(s > 0.0) || !s.is_finite())
    {
        return Err(Error::invalid(
            "scaling fit needs positive n and statistics",
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let df = k - 2.0;
    let se = (rss / df / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::invalid(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(ScalingFit {
        slope,
        intercept,
        half_width: t * se,
    })
}

/// Common `(n, d, p, m)` of a batch of successful exploration records.
fn exploration_cell(records: &[SweepRecord]) -> Result<(usize, u32, f64, u64, Vec<&SweepRecord>)> {
    let ok: Vec<&SweepRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let first = ok
        .first()
        .ok_or_else(|| Error::invalid("no successful runs"))?;
    let m = first
        .m
        .ok_or_else(|| Error::invalid("records are not exploration runs"))?;
    if ok.iter().any(|r| {
        r.mode != Mode::Exploration
            || r.n != first.n
            || r.d != first.d
            || r.p.to_bits() != first.p.to_bits()
            || r.m != Some(m)
    }) {
        return Err(Error::invalid(
            "runs must come from a single exploration cell",
        ));
    }
    if first.p <= 1.0 / (first.d as f64 - 1.0) {
        return Err(Error::invalid(format!(
            "p = {} is not supercritical",
            first.p
        )));
    }
    Ok((first.n, first.d, first.p, m, ok))
}

/// Fraction of runs with `T` in `[lo n tau_hat, hi n tau_hat]`.
pub fn dichotomy_stats(records: &[SweepRecord], lo: f64, hi: f64) -> Result<f64> {
    if !(0.0 <= lo && lo <= hi) {
        return Err(Error::invalid(format!("band ({lo}, {hi}) is not ordered")));
    }
    let (n, d, p, m, ok) = exploration_cell(records)?;
    let (_, tau_hat) = theory::y_hat_tau_hat(d, p, m as f64 / n as f64)?;
    let scale = n as f64 * tau_hat;
    let inside = ok
        .iter()
        .filter(|r| {
            let t = r.t.unwrap_or(0) as f64;
            lo * scale <= t && t <= hi * scale
        })
        .count();
    Ok(inside as f64 / ok.len() as f64)
}

/// Fraction of runs with `C_n >= threshold n alpha`.
pub fn giant_hit_rate(records: &[SweepRecord], threshold: f64) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid("threshold must be non-negative"));
    }
    let (n, d, p, _, ok) = exploration_cell(records)?;
    let alpha = theory::alpha(&DegreeSpec::regular(n, d)?, p)?;
    let cut = threshold * n as f64 * alpha;
    let hits = ok
        .iter()
        .filter(|r| r.c_n.unwrap_or(0) as f64 >= cut)
        .count();
    Ok(hits as f64 / ok.len() as f64)
}
