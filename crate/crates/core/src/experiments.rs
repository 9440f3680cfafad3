//! Routing sweeps over ring sizes, seeds and schemes.
//!
//! For every `(n, seed)` cell the schemes that run on a single long-range link
//! share one augmented network, so their hop counts are paired; the
//! two-link greedy baseline gets its own network from the same seed. Query
//! destinations are drawn once per cell and reused by every scheme.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::awareness::build_awareness;
use crate::error::{Error, Result};
use crate::netgen::{build_network, ceil_log2, NetworkConfig, NodeId, SmallWorldNet};
use crate::rng;
use crate::routing::{route, RoutingParams, Scheme};

pub const DEFAULT_N_GRID: [u32; 5] = [5000, 10000, 15000, 20000, 25000];
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

pub const CSV_HEADER: &str = "scheme,n,seed,trials,mean_hops,hop_stddev,failures,storage_bits";

/// Partial routing parameters; unset fields take the per-ring defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub awareness_depth: Option<u32>,
    pub c: Option<f64>,
    pub hop_cap: Option<u32>,
    pub sigma: Option<f64>,
}

impl ParamOverrides {
    pub fn resolve(&self, n: u32) -> RoutingParams {
        let d = RoutingParams::for_ring(n);
        RoutingParams {
            awareness_depth: self.awareness_depth.unwrap_or(d.awareness_depth),
            c: self.c.unwrap_or(d.c),
            hop_cap: self.hop_cap.unwrap_or(d.hop_cap),
            sigma: self.sigma.unwrap_or(d.sigma),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub n_grid: Vec<u32>,
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
    /// Queries issued by every node when `sampled_pairs` is unset.
    pub queries_per_node: u32,
    /// Route this many uniformly drawn source/destination pairs per cell instead
    /// of one query per node.
    pub sampled_pairs: Option<u32>,
    pub params: ParamOverrides,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            n_grid: DEFAULT_N_GRID.to_vec(),
            schemes: Scheme::ALL.to_vec(),
            seeds: DEFAULT_SEEDS.to_vec(),
            queries_per_node: 1,
            sampled_pairs: None,
            params: ParamOverrides::default(),
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.schemes.is_empty() || self.seeds.is_empty() {
            return Err(Error::InvalidConfig(
                "plan needs at least one ring size, scheme and seed".into(),
            ));
        }
        if self.queries_per_node == 0 || self.sampled_pairs == Some(0) {
            return Err(Error::InvalidConfig("plan issues no queries".into()));
        }
        for &n in &self.n_grid {
            NetworkConfig::augmented(n, 0).validate()?;
            self.params.resolve(n).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub scheme: Scheme,
    pub n: u32,
    pub seed: u64,
    pub trials: u64,
    /// Mean over successful trials only.
    pub mean_hops: f64,
    pub hop_stddev: f64,
    pub failures: u64,
    pub storage_bits: u64,
}

impl MetricsRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.4},{},{}",
            self.scheme,
            self.n,
            self.seed,
            self.trials,
            self.mean_hops,
            self.hop_stddev,
            self.failures,
            self.storage_bits
        )
    }
}

pub fn write_csv<W: Write>(rows: &[MetricsRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    Ok(())
}

pub fn to_csv_string(rows: &[MetricsRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Network variant a scheme runs on for a given ring size and seed.
pub fn network_config_for(scheme: Scheme, n: u32, seed: u64) -> NetworkConfig {
    match scheme {
        Scheme::GreedyQ2 => NetworkConfig::new(n, seed).with_q(2),
        _ => NetworkConfig::augmented(n, seed),
    }
}

/// Worst-case per-node storage in bits: stored node ids times `⌈lg n⌉`.
pub fn storage_bits(scheme: Scheme, net: &SmallWorldNet, params: &RoutingParams) -> Result<u64> {
    let n = net.n();
    let id_bits = ceil_log2(n) as u64;
    let q = net.config().q as u64;
    let ids = match scheme {
        Scheme::GreedyQ1 | Scheme::GreedyQ2 => 1 + q,
        Scheme::LocalAwareness => {
            let window = ceil_log2(n) as u64;
            1 + q + window + window * q
        }
        Scheme::NonOblivious | Scheme::Oblivious => {
            let own = net.out_degree(0) as u64;
            let largest = (0..n)
                .into_par_iter()
                .map(|x| build_awareness(net, x, params.awareness_depth).map(|aw| aw.len() as u64))
                .try_reduce(|| 0, |a, b| Ok(a.max(b)))?;
            own + largest + largest * q
        }
    };
    Ok(ids * id_bits)
}

/// Uniform destination different from `s`.
pub fn draw_destination<R: Rng + ?Sized>(s: NodeId, n: u32, rng: &mut R) -> NodeId {
    let t = rng.gen_range(0..n - 1);
    if t >= s {
        t + 1
    } else {
        t
    }
}

fn draw_queries(plan: &ExperimentPlan, n: u32, seed: u64) -> Vec<(NodeId, NodeId)> {
    let mut rng = rng::stream(seed, rng::DESTINATION_STREAM);
    match plan.sampled_pairs {
        Some(pairs) => (0..pairs)
            .map(|_| {
                let s = rng.gen_range(0..n);
                (s, draw_destination(s, n, &mut rng))
            })
            .collect(),
        None => (0..n)
            .flat_map(|s| std::iter::repeat_n(s, plan.queries_per_node as usize))
            .map(|s| (s, draw_destination(s, n, &mut rng)))
            .collect(),
    }
}

/// Hop counts of every query under one scheme; `None` marks a trial that hit the hop cap.
pub fn route_queries(
    scheme: Scheme,
    net: &SmallWorldNet,
    queries: &[(NodeId, NodeId)],
    params: &RoutingParams,
) -> Result<Vec<Option<u32>>> {
    queries
        .par_iter()
        .map(|&(s, t)| route(scheme, net, s, t, params).map(|r| r.succeeded.then_some(r.hops)))
        .collect()
}

fn summarize(outcomes: &[Option<u32>]) -> (u64, f64, f64, u64) {
    let trials = outcomes.len() as u64;
    let ok: Vec<f64> = outcomes.iter().flatten().map(|&h| h as f64).collect();
    let failures = trials - ok.len() as u64;
    if ok.is_empty() {
        return (trials, 0.0, 0.0, failures);
    }
    let mean = ok.iter().sum::<f64>() / ok.len() as f64;
    let sd = if ok.len() > 1 {
        let ss: f64 = ok.iter().map(|h| (h - mean).powi(2)).sum();
        (ss / (ok.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    (trials, mean, sd, failures)
}

/// Runs every `(n, seed, scheme)` cell; rows come out ordered by grid, then
/// seed, then scheme as listed in the plan.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<MetricsRow>> {
    plan.validate()?;
    let mut rows = Vec::with_capacity(plan.n_grid.len() * plan.seeds.len() * plan.schemes.len());
    for &n in &plan.n_grid {
        let params = plan.params.resolve(n);
        for &seed in &plan.seeds {
            let queries = draw_queries(plan, n, seed);
            let mut networks: Vec<(NetworkConfig, SmallWorldNet)> = Vec::new();
            for &scheme in &plan.schemes {
                let cfg = network_config_for(scheme, n, seed);
                let net = match networks.iter().position(|(c, _)| *c == cfg) {
                    Some(i) => &networks[i].1,
                    None => {
                        networks.push((cfg, build_network(cfg)?));
                        &networks.last().unwrap().1
                    }
                };
                let outcomes = route_queries(scheme, net, &queries, &params)?;
                let (trials, mean_hops, hop_stddev, failures) = summarize(&outcomes);
                rows.push(MetricsRow {
                    scheme,
                    n,
                    seed,
                    trials,
                    mean_hops,
                    hop_stddev,
                    failures,
                    storage_bits: storage_bits(scheme, net, &params)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Trial-weighted mean hops of `scheme` at ring size `n`, pooled over seeds.
pub fn pooled_mean(rows: &[MetricsRow], scheme: Scheme, n: u32) -> Option<f64> {
    let (mut weighted, mut count) = (0.0, 0u64);
    for r in rows.iter().filter(|r| r.scheme == scheme && r.n == n) {
        let ok = r.trials - r.failures;
        weighted += r.mean_hops * ok as f64;
        count += ok;
    }
    (count > 0).then(|| weighted / count as f64)
}
