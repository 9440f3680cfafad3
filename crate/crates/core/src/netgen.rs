//! Construction of directed small-world rings.
//!
//! A network on `n` nodes is a directed ring where node `u` always links to
//! `(u + 1) mod n` (the ring link). Each node additionally draws `q`
//! long-range links whose forward distance `d` has probability
//! `1 / (d * H_{n-1})`, and, when augmented, two local links drawn uniformly
//! from the next `al_span` ring positions.

use std::fmt::{self, Write as _};
use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

pub type NodeId = u32;

/// Smallest ring the generator accepts.
pub const MIN_RING_SIZE: u32 = 8;

/// Directed distance from `u` to `v` on a ring of `n` nodes.
#[inline]
pub fn ring_distance(u: NodeId, v: NodeId, n: u32) -> u32 {
    debug_assert!(u < n && v < n);
    if v >= u {
        v - u
    } else {
        n - (u - v)
    }
}

#[inline]
pub fn ring_offset(u: NodeId, offset: u32, n: u32) -> NodeId {
    ((u as u64 + offset as u64) % n as u64) as NodeId
}

pub fn floor_log2(n: u32) -> u32 {
    assert!(n > 0);
    31 - n.leading_zeros()
}

pub fn ceil_log2(n: u32) -> u32 {
    assert!(n > 0);
    if n.is_power_of_two() {
        floor_log2(n)
    } else {
        floor_log2(n) + 1
    }
}

/// `⌊lg n⌋²`, capped at `n - 1` so that small rings still have a valid window.
pub fn default_al_span(n: u32) -> u32 {
    let lg = floor_log2(n.max(1));
    (lg * lg).clamp(1, n.saturating_sub(1).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkConfig {
    pub n: u32,
    pub q: u32,
    pub augmented: bool,
    pub al_span: u32,
    pub seed: u64,
}

impl NetworkConfig {
    /// Plain ring with one long-range link per node and the default AL window.
    pub fn new(n: u32, seed: u64) -> Self {
        Self {
            n,
            q: 1,
            augmented: false,
            al_span: default_al_span(n),
            seed,
        }
    }

    pub fn augmented(n: u32, seed: u64) -> Self {
        Self {
            augmented: true,
            ..Self::new(n, seed)
        }
    }

    pub fn with_q(mut self, q: u32) -> Self {
        self.q = q;
        self
    }

    pub fn with_al_span(mut self, al_span: u32) -> Self {
        self.al_span = al_span;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_RING_SIZE {
            return Err(Error::InvalidConfig(format!(
                "ring size {} is below the minimum of {MIN_RING_SIZE}",
                self.n
            )));
        }
        if self.q == 0 {
            return Err(Error::InvalidConfig(
                "at least one long-range link per node is required".into(),
            ));
        }
        if self.al_span == 0 || self.al_span > self.n - 1 {
            return Err(Error::InvalidConfig(format!(
                "AL span {} outside [1, {}]",
                self.al_span,
                self.n - 1
            )));
        }
        Ok(())
    }
}

/// Cumulative breakpoints of the harmonic distance law on a ring of `n` nodes.
///
/// `breakpoints()[k - 1]` is `B_k = H_k / H_{n-1}`; a uniform draw `x` in
/// `(0, 1]` maps to the smallest `k` with `x <= B_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicIntervals {
    breakpoints: Vec<f64>,
}

pub fn harmonic_cdf_intervals(n: u32) -> Result<HarmonicIntervals> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "harmonic intervals need at least 2 nodes, got {n}"
        )));
    }
    let mut partial = 0.0f64;
    let mut breakpoints: Vec<f64> = (1..n)
        .map(|i| {
            partial += 1.0 / i as f64;
            partial
        })
        .collect();
    let total = partial;
    for b in &mut breakpoints {
        *b /= total;
    }
    *breakpoints.last_mut().expect("n >= 2") = 1.0;
    Ok(HarmonicIntervals { breakpoints })
}

impl HarmonicIntervals {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn ring_size(&self) -> u32 {
        self.breakpoints.len() as u32 + 1
    }

    /// Probability mass assigned to forward distance `d` (zero outside `1..n`).
    pub fn mass(&self, d: u32) -> f64 {
        match d {
            0 => 0.0,
            1 => self.breakpoints[0],
            d if (d as usize) <= self.breakpoints.len() => {
                self.breakpoints[d as usize - 1] - self.breakpoints[d as usize - 2]
            }
            _ => 0.0,
        }
    }

    /// Distance selected by a draw `x ∈ (0, 1]`.
    #[inline]
    pub fn distance_for(&self, x: f64) -> u32 {
        let idx = self.breakpoints.partition_point(|&b| b < x);
        // x > 1 cannot happen for draws in (0, 1]; clamp for robustness against x == 1 + ulp.
        idx.min(self.breakpoints.len() - 1) as u32 + 1
    }

    pub fn sample_distance<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.distance_for(unit_interval_draw(rng))
    }
}

/// Uniform draw in `(0, 1]`.
#[inline]
pub fn unit_interval_draw<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Long-range neighbor of `u` for an explicit draw `x ∈ (0, 1]`.
pub fn k_link_for_draw(u: NodeId, intervals: &HarmonicIntervals, x: f64) -> NodeId {
    ring_offset(u, intervals.distance_for(x), intervals.ring_size())
}

pub fn sample_k_link<R: Rng + ?Sized>(
    u: NodeId,
    intervals: &HarmonicIntervals,
    rng: &mut R,
) -> NodeId {
    k_link_for_draw(u, intervals, unit_interval_draw(rng))
}

/// Two independent uniform AL targets in `(u, u + al_span]` (mod `n`).
pub fn sample_al_links<R: Rng + ?Sized>(
    u: NodeId,
    al_span: u32,
    n: u32,
    rng: &mut R,
) -> [NodeId; 2] {
    let first = rng.gen_range(1..=al_span);
    let second = rng.gen_range(1..=al_span);
    [ring_offset(u, first, n), ring_offset(u, second, n)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    Ring,
    LongRange,
    AugmentedLocal,
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkKind::Ring => "R",
            LinkKind::LongRange => "K",
            LinkKind::AugmentedLocal => "AL",
        })
    }
}

/// Immutable small-world network. The ring link of every node is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallWorldNet {
    config: NetworkConfig,
    /// `n * q` long-range targets, node-major.
    k_links: Vec<NodeId>,
    al_links: Option<Vec<[NodeId; 2]>>,
}

pub fn build_network(config: NetworkConfig) -> Result<SmallWorldNet> {
    config.validate()?;
    let n = config.n;
    let intervals = harmonic_cdf_intervals(n)?;
    let mut rng = rng::stream(config.seed, rng::NETWORK_STREAM);

    let mut k_links = Vec::with_capacity(n as usize * config.q as usize);
    let mut al_links = config.augmented.then(|| Vec::with_capacity(n as usize));
    for u in 0..n {
        for _ in 0..config.q {
            k_links.push(sample_k_link(u, &intervals, &mut rng));
        }
        if let Some(al) = al_links.as_mut() {
            al.push(sample_al_links(u, config.al_span, n, &mut rng));
        }
    }
    Ok(SmallWorldNet {
        config,
        k_links,
        al_links,
    })
}

impl SmallWorldNet {
    /// Assembles a network from explicit link tables, checking every structural invariant.
    ///
    /// `k_links` is node-major with `config.q` entries per node; `al_links`
    /// must be present exactly when `config.augmented` is set.
    pub fn from_links(
        config: NetworkConfig,
        k_links: Vec<NodeId>,
        al_links: Option<Vec<[NodeId; 2]>>,
    ) -> Result<Self> {
        config.validate()?;
        let n = config.n;
        if k_links.len() != n as usize * config.q as usize {
            return Err(Error::InvalidConfig(format!(
                "expected {} long-range links, got {}",
                n as usize * config.q as usize,
                k_links.len()
            )));
        }
        for (i, &v) in k_links.iter().enumerate() {
            let u = (i / config.q as usize) as NodeId;
            if v >= n || v == u {
                return Err(Error::InvalidConfig(format!(
                    "node {u} has invalid long-range target {v}"
                )));
            }
        }
        match (&al_links, config.augmented) {
            (Some(al), true) => {
                if al.len() != n as usize {
                    return Err(Error::InvalidConfig(format!(
                        "expected {n} AL entries, got {}",
                        al.len()
                    )));
                }
                for (u, pair) in al.iter().enumerate() {
                    for &v in pair {
                        let off = if v < n {
                            ring_distance(u as NodeId, v, n)
                        } else {
                            0
                        };
                        if off == 0 || off > config.al_span {
                            return Err(Error::InvalidConfig(format!(
                                "node {u} has AL target {v} outside its window of {}",
                                config.al_span
                            )));
                        }
                    }
                }
            }
            (None, false) => {}
            (Some(_), false) => {
                return Err(Error::InvalidConfig(
                    "AL links given for a non-augmented configuration".into(),
                ))
            }
            (None, true) => {
                return Err(Error::InvalidConfig(
                    "augmented configuration without AL links".into(),
                ))
            }
        }
        Ok(Self {
            config,
            k_links,
            al_links,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.config.n
    }

    pub fn is_augmented(&self) -> bool {
        self.al_links.is_some()
    }

    #[inline]
    pub fn r_neighbor(&self, u: NodeId) -> NodeId {
        ring_offset(u, 1, self.config.n)
    }

    #[inline]
    pub fn k_neighbors(&self, u: NodeId) -> &[NodeId] {
        let q = self.config.q as usize;
        let start = u as usize * q;
        &self.k_links[start..start + q]
    }

    /// AL targets of `u`; empty for non-augmented networks.
    #[inline]
    pub fn al_neighbors(&self, u: NodeId) -> &[NodeId] {
        match &self.al_links {
            Some(al) => &al[u as usize],
            None => &[],
        }
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        1 + self.k_neighbors(u).len() + self.al_neighbors(u).len()
    }

    #[inline]
    pub fn distance(&self, u: NodeId, v: NodeId) -> u32 {
        ring_distance(u, v, self.config.n)
    }

    /// Kind of a link `u -> v`, preferring ring, then long-range, then AL when several coincide.
    pub fn link_kind(&self, u: NodeId, v: NodeId) -> Option<LinkKind> {
        if self.r_neighbor(u) == v {
            Some(LinkKind::Ring)
        } else if self.k_neighbors(u).contains(&v) {
            Some(LinkKind::LongRange)
        } else if self.al_neighbors(u).contains(&v) {
            Some(LinkKind::AugmentedLocal)
        } else {
            None
        }
    }

    pub fn has_link(&self, u: NodeId, v: NodeId) -> bool {
        self.link_kind(u, v).is_some()
    }

    /// Plain-text dump: a `#kswn` header line, then `node<TAB>k1[,k2..]<TAB>al1,al2`
    /// per node (`-` in the last column for non-augmented networks).
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        let c = &self.config;
        writeln!(
            out,
            "#kswn n={} q={} seed={} al_span={}",
            c.n, c.q, c.seed, c.al_span
        )?;
        let mut line = String::new();
        for u in 0..c.n {
            line.clear();
            write!(line, "{u}\t").unwrap();
            join_ids(&mut line, self.k_neighbors(u));
            line.push('\t');
            if self.is_augmented() {
                join_ids(&mut line, self.al_neighbors(u));
            } else {
                line.push('-');
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_dump_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Dump {
            line: 1,
            reason: "empty input".into(),
        })?;
        let header = header.strip_prefix("#kswn ").ok_or_else(|| Error::Dump {
            line: 1,
            reason: "missing #kswn header".into(),
        })?;
        let mut fields = [None::<u64>; 4];
        for kv in header.split_whitespace() {
            let (key, value) = kv.split_once('=').ok_or_else(|| Error::Dump {
                line: 1,
                reason: format!("bad header field `{kv}`"),
            })?;
            let slot = match key {
                "n" => 0,
                "q" => 1,
                "seed" => 2,
                "al_span" => 3,
                _ => {
                    return Err(Error::Dump {
                        line: 1,
                        reason: format!("unknown header key `{key}`"),
                    })
                }
            };
            fields[slot] = Some(value.parse().map_err(|_| Error::Dump {
                line: 1,
                reason: format!("bad value for `{key}`"),
            })?);
        }
        let get = |i: usize, name: &str| {
            fields[i].ok_or_else(|| Error::Dump {
                line: 1,
                reason: format!("missing `{name}`"),
            })
        };
        let (n, q, seed, al_span) = (
            get(0, "n")? as u32,
            get(1, "q")? as u32,
            get(2, "seed")?,
            get(3, "al_span")? as u32,
        );

        let mut k_links = Vec::with_capacity(n as usize * q as usize);
        let mut al_links: Vec<[NodeId; 2]> = Vec::new();
        let mut augmented = None;
        let mut expected: NodeId = 0;
        for (idx, line) in lines {
            let lineno = idx + 1;
            let bad = |reason: &str| Error::Dump {
                line: lineno,
                reason: reason.to_string(),
            };
            let mut cols = line.split('\t');
            let (Some(id), Some(ks), Some(als), None) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(bad("expected three tab-separated columns"));
            };
            if id.parse::<NodeId>().ok() != Some(expected) {
                return Err(bad("node ids must be consecutive from 0"));
            }
            let ks = parse_ids(ks).ok_or_else(|| bad("bad long-range list"))?;
            if ks.len() != q as usize {
                return Err(bad("long-range list length differs from q"));
            }
            k_links.extend(ks);
            let node_aug = als != "-";
            if *augmented.get_or_insert(node_aug) != node_aug {
                return Err(bad("AL column present on some nodes only"));
            }
            if node_aug {
                let al = parse_ids(als).ok_or_else(|| bad("bad AL list"))?;
                let pair: [NodeId; 2] = al
                    .try_into()
                    .map_err(|_| bad("exactly two AL links expected"))?;
                al_links.push(pair);
            }
            expected += 1;
        }
        if expected != n {
            return Err(Error::Dump {
                line: expected as usize + 1,
                reason: format!("expected {n} node lines, found {expected}"),
            });
        }
        let augmented = augmented.unwrap_or(false);
        let config = NetworkConfig {
            n,
            q,
            augmented,
            al_span,
            seed,
        };
        Self::from_links(config, k_links, augmented.then_some(al_links))
    }
}

fn join_ids(out: &mut String, ids: &[NodeId]) {
    for (i, id) in ids.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{id}").unwrap();
    }
}

fn parse_ids(s: &str) -> Option<Vec<NodeId>> {
    s.split(',').map(|x| x.parse().ok()).collect()
}
