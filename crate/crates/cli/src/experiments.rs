//! Experiment runners: the accuracy suite and the cost-scaling fit, both
//! emitting rows in the fixed experiment-record CSV schema.

use anyhow::{bail, Context, Result};
use num_rational::Ratio;
use num_traits::ToPrimitive;
use oracount_core::adversarial::{er_hypergraph, er_partite_hypergraph, star_hypergraph};
use oracount_core::col::fine_count;
use oracount_core::cost::CostModel;
use oracount_core::hypergraph::Hypergraph;
use oracount_core::oracle::{OracleMode, OracleSession, SessionGraph};
use oracount_core::profile::Profile;
use oracount_core::rng::RngStream;
use oracount_core::uncol::uncol;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::sync::Arc;

pub type Rat = Ratio<i128>;

/// Parses "a/b", an integer, or a decimal into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let num: i128 = a.trim().parse().context("bad numerator")?;
        let den: i128 = b.trim().parse().context("bad denominator")?;
        if den == 0 {
            bail!("zero denominator in `{s}`");
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int: i128 = if int.is_empty() { 0 } else { int.parse().context("bad integer part")? };
        let scale = 10i128.pow(frac.len() as u32);
        let fr: i128 = frac.parse().context("bad fractional part")?;
        return Ok(Rat::new(int * scale + fr, scale));
    }
    let v: i128 = s.parse().with_context(|| format!("cannot parse `{s}` as a rational"))?;
    Ok(Rat::from_integer(v))
}

pub fn rat_f64(r: Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One row of the experiment CSV. The column set and order are fixed.
#[derive(Clone, Debug)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub family: String,
    pub n: u64,
    pub k: u32,
    pub alpha: f64,
    pub eps: f64,
    pub delta: f64,
    pub profile: String,
    pub seed: u64,
    pub estimate: Option<f64>,
    pub exact: Option<u64>,
    pub within_eps: Option<bool>,
    pub total_cost: f64,
    pub queries: u64,
    pub runtime_ms: u128,
}

pub const CSV_HEADER: &str =
    "experiment,family,n,k,alpha,eps,delta,profile,seed,estimate,exact,within_eps,total_cost,queries,runtime_ms";

impl ExperimentRecord {
    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let est = self.estimate.map_or("RTE".to_string(), |v| format!("{v}"));
        let exact = self.exact.map_or(String::new(), |v| v.to_string());
        let within = self.within_eps.map_or(String::new(), |b| u8::from(b).to_string());
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.family,
            self.n,
            self.k,
            self.alpha,
            self.eps,
            self.delta,
            self.profile,
            self.seed,
            est,
            exact,
            within,
            self.total_cost,
            self.queries,
            self.runtime_ms
        );
        s
    }
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// An instance family the suites can draw from.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub name: String,
    pub n: u64,
    pub k: u32,
    pub t: u64,
    pub r: u32,
    pub p: f64,
}

impl FamilySpec {
    /// Parses `er:n=64,k=2,p=3/10` style specs.
    pub fn parse(spec: &str) -> Result<FamilySpec> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut out = FamilySpec {
            name: name.trim().to_string(),
            n: 64,
            k: 2,
            t: 16,
            r: 1,
            p: 0.3,
        };
        for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, val) = kv
                .split_once('=')
                .with_context(|| format!("expected key=value in `{kv}`"))?;
            match key.trim() {
                "n" => out.n = val.parse()?,
                "k" => out.k = val.parse()?,
                "t" => out.t = val.parse()?,
                "r" => out.r = val.parse()?,
                "p" => out.p = rat_f64(parse_rat(val)?),
                other => bail!("unknown family parameter `{other}`"),
            }
        }
        Ok(out)
    }

    pub fn instantiate(&self, rng: &mut RngStream) -> Result<SessionGraph> {
        match self.name.as_str() {
            "er" => Ok(SessionGraph::Plain(Arc::new(er_hypergraph(self.n, self.k, self.p, rng)?))),
            "er-partite" => Ok(SessionGraph::Partitioned(Arc::new(er_partite_hypergraph(
                self.t, self.k, self.p, rng,
            )?))),
            "star" => Ok(SessionGraph::Plain(Arc::new(star_hypergraph(self.n, self.k, self.r)?))),
            "empty" => Ok(SessionGraph::Plain(Arc::new(Hypergraph::empty(self.n as u32, self.k as usize)?))),
            other => bail!("unknown family `{other}`"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Uncol,
    Col,
}

#[derive(Clone, Debug)]
pub struct AccuracyConfig {
    pub families: Vec<FamilySpec>,
    pub eps: f64,
    pub delta: f64,
    pub alpha: f64,
    pub algo: Algo,
    pub trials: u32,
    pub profile: Profile,
    pub seed: u64,
}

fn run_one_trial(
    cfg: &AccuracyConfig,
    fam: &FamilySpec,
    trial: u32,
) -> Result<ExperimentRecord> {
    let start = std::time::Instant::now();
    let mut rng = RngStream::new(cfg.seed).child(trial);
    let graph = fam.instantiate(&mut rng)?;
    let exact = match &graph {
        SessionGraph::Plain(g) => g.edge_count(),
        SessionGraph::Partitioned(p) => p.base.edge_count(),
    };
    let mode = match cfg.algo {
        Algo::Uncol => OracleMode::Indora,
        Algo::Col => OracleMode::Cindora,
    };
    let model = CostModel::power(cfg.alpha)?;
    let mut sess = OracleSession::new(graph, model, mode)?;
    let est = match cfg.algo {
        Algo::Uncol => uncol(&mut sess, cfg.eps, cfg.delta, &cfg.profile, &mut rng)?,
        Algo::Col => fine_count(&mut sess, cfg.eps, cfg.delta, &cfg.profile, &mut rng)?,
    };
    let estimate = est.value.numeric();
    let within = estimate.map(|v| (v - exact as f64).abs() <= cfg.eps * exact as f64);
    Ok(ExperimentRecord {
        experiment: "accuracy".into(),
        family: fam.name.clone(),
        n: match &sess.graph() {
            SessionGraph::Plain(g) => u64::from(g.n()),
            SessionGraph::Partitioned(p) => u64::from(p.base.n()),
        },
        k: cfg.families[0].k,
        alpha: cfg.alpha,
        eps: cfg.eps,
        delta: cfg.delta,
        profile: profile_name(&cfg.profile),
        seed: rng.seed(),
        estimate,
        exact: Some(exact),
        within_eps: within,
        total_cost: est.oracle_cost,
        queries: est.queries,
        runtime_ms: start.elapsed().as_millis(),
    })
}

pub fn profile_name(p: &Profile) -> String {
    match p.kind {
        oracount_core::profile::ProfileKind::Theory => "theory".into(),
        oracount_core::profile::ProfileKind::Fast => "fast".into(),
    }
}

/// Runs every (family, trial) cell; rows come back in deterministic
/// (family, trial) order regardless of thread count.
pub fn run_accuracy_suite(cfg: &AccuracyConfig) -> Result<Vec<ExperimentRecord>> {
    let cells: Vec<(usize, u32)> = (0..cfg.families.len())
        .flat_map(|f| (0..cfg.trials).map(move |t| (f, t)))
        .collect();
    let mut rows: Vec<((usize, u32), ExperimentRecord)> = cells
        .par_iter()
        .map(|&(f, t)| {
            // Each family gets its own seed lane.
            let fam = &cfg.families[f];
            let sub = AccuracyConfig { seed: cfg.seed.wrapping_add(1000 * f as u64), ..cfg.clone() };
            run_one_trial(&sub, fam, t).map(|r| ((f, t), r))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|(key, _)| *key);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Edge density of the scaling family: a fixed rate, or `c` expected edges
/// per vertex (the near-worst-case density for the sampling schedule, where
/// the peak-overhead iteration is also the halting one).
#[derive(Clone, Copy, Debug)]
pub enum Density {
    Fixed(f64),
    PerVertex(f64),
}

impl Density {
    pub fn parse(s: &str) -> Result<Density> {
        if let Some(rest) = s.strip_prefix("fixed:") {
            return Ok(Density::Fixed(rat_f64(parse_rat(rest)?)));
        }
        if let Some(rest) = s.strip_prefix("linear:") {
            return Ok(Density::PerVertex(rat_f64(parse_rat(rest)?)));
        }
        bail!("density must be fixed:<p> or linear:<c>, got `{s}`")
    }

    pub fn rate(&self, n: u64, k: u32) -> f64 {
        match *self {
            Density::Fixed(p) => p,
            Density::PerVertex(c) => {
                let mut total = 1.0f64;
                for j in 0..u64::from(k) {
                    total *= (n - j) as f64 / (j + 1) as f64;
                }
                (c * n as f64 / total).min(0.999)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScalingConfig {
    pub k: u32,
    pub alphas: Vec<f64>,
    pub n_list: Vec<u64>,
    pub density: Density,
    pub eps: f64,
    pub trials: u32,
    pub profile: Profile,
    pub seed: u64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ScalingSummary {
    pub alpha: f64,
    /// `(n, median cost)` pairs.
    pub medians: Vec<(u64, f64)>,
    /// Least-squares slope of `log2(median)` vs `log2(n)` over the top half
    /// of the grid; absent for a single-point grid.
    pub slope: Option<f64>,
}

fn median_of(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Median ledger cost vs n per cost index, with a slope fit over the top
/// half of the grid.
pub fn run_cost_scaling(
    cfg: &ScalingConfig,
) -> Result<(Vec<ExperimentRecord>, Vec<ScalingSummary>)> {
    let cells: Vec<(usize, usize, u32)> = (0..cfg.alphas.len())
        .flat_map(|a| {
            (0..cfg.n_list.len()).flat_map(move |n| (0..cfg.trials).map(move |t| (a, n, t)))
        })
        .collect();
    let mut rows: Vec<((usize, usize, u32), ExperimentRecord)> = cells
        .par_iter()
        .map(|&(ai, ni, t)| {
            let alpha = cfg.alphas[ai];
            let n = cfg.n_list[ni];
            let start = std::time::Instant::now();
            // Same (n, trial) seeds across alphas: identical query streams,
            // different charges.
            let mut rng = RngStream::new(cfg.seed).child(ni as u32).child(t);
            let graph = er_hypergraph(n, cfg.k, cfg.density.rate(n, cfg.k), &mut rng)?;
            let exact = graph.edge_count();
            let model = CostModel::power(alpha)?;
            let mut sess = OracleSession::plain(Arc::new(graph), model, OracleMode::Indora)?;
            let est = oracount_core::uncol::uncol_approx(&mut sess, cfg.eps, &cfg.profile, &mut rng)?;
            let estimate = est.value.numeric();
            let within = estimate.map(|v| (v - exact as f64).abs() <= cfg.eps * exact as f64);
            let rec = ExperimentRecord {
                experiment: "scaling".into(),
                family: "er".into(),
                n,
                k: cfg.k,
                alpha,
                eps: cfg.eps,
                delta: 0.0,
                profile: profile_name(&cfg.profile),
                seed: rng.seed(),
                estimate,
                exact: Some(exact),
                within_eps: within,
                total_cost: est.oracle_cost,
                queries: est.queries,
                runtime_ms: start.elapsed().as_millis(),
            };
            Ok(((ai, ni, t), rec))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|(key, _)| *key);
    let records: Vec<ExperimentRecord> = rows.into_iter().map(|(_, r)| r).collect();

    let mut summaries = Vec::new();
    for (ai, &alpha) in cfg.alphas.iter().enumerate() {
        let mut medians = Vec::new();
        for (ni, &n) in cfg.n_list.iter().enumerate() {
            let costs: Vec<f64> = records
                .iter()
                .filter(|r| r.alpha == cfg.alphas[ai] && r.n == cfg.n_list[ni])
                .map(|r| r.total_cost)
                .collect();
            medians.push((n, median_of(costs)));
        }
        let slope = if medians.len() >= 2 {
            let top = &medians[medians.len() / 2..];
            let pts: Vec<(f64, f64)> = top
                .iter()
                .map(|&(n, c)| ((n as f64).log2(), c.max(1e-12).log2()))
                .collect();
            Some(least_squares_slope(&pts))
        } else {
            None
        };
        summaries.push(ScalingSummary { alpha, medians, slope });
    }
    Ok((records, summaries))
}

/// Two-column `n cost` export for external plotting.
pub fn gnuplot_export(summary: &ScalingSummary) -> String {
    let mut out = String::new();
    for &(n, c) in &summary.medians {
        let _ = writeln!(out, "{n} {c}");
    }
    out
}
