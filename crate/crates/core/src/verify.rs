//! Monte Carlo estimators for the probabilistic properties the routing
//! schemes rely on, plus scaling-law fits over experiment rows.
//!
//! Each check returns a typed report carrying sample counts, binomial
//! standard errors and the explicit threshold it was judged against. Every
//! report converts into [`CheckReport`] lines for the text and CSV outputs.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rand::Rng;
use rayon::prelude::*;

use crate::awareness::build_awareness;
use crate::error::{Error, Result};
use crate::experiments::MetricsRow;
use crate::netgen::{build_network, harmonic_cdf_intervals, ring_offset, NetworkConfig, NodeId};
use crate::rng::{self, SimRng};
use crate::routing::{find_good_intermediate, phase_threshold, Scheme};

/// Default pass thresholds.
pub mod thresholds {
    /// Largest tolerated `|d · H_{n-1} · P̂(d) − 1|`.
    pub const KLINK_MAX_DEVIATION: f64 = 0.05;
    /// Smallest tolerated fraction of origins whose awareness reaches `lg n / σ` members.
    pub const AWARENESS_PSI: f64 = 0.5;
    /// Smallest tolerated probability that the awareness holds a half-distance jump.
    pub const HALF_DISTANCE_PROBABILITY: f64 = 0.05;
    /// Largest tolerated flatness ratio of greedy hops over `lg²n`.
    pub const GREEDY_FLATNESS: f64 = 1.6;
    /// Largest tolerated flatness ratio of AL-awareness hops over `lg n · lg lg n`.
    pub const NEAR_OPTIMAL_FLATNESS: f64 = 1.7;
}

pub const MIN_KLINK_SAMPLES: u64 = 100_000;
pub const MIN_ORIGINS: u32 = 500;
pub const MIN_GRID_POINTS: usize = 3;
/// Origins evaluated on each freshly built network.
pub const ORIGINS_PER_BATCH: u32 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Estimate must be strictly below the threshold.
    Below,
    /// Estimate must be at least the threshold.
    AtLeast,
    /// Estimate must be strictly above the threshold.
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportLine {
    pub parameter: String,
    pub estimate: f64,
    pub stderr: Option<f64>,
    /// `None` for informational lines.
    pub gate: Option<(Comparison, f64)>,
}

impl ReportLine {
    pub fn info(parameter: impl Into<String>, estimate: f64, stderr: Option<f64>) -> Self {
        Self {
            parameter: parameter.into(),
            estimate,
            stderr,
            gate: None,
        }
    }

    pub fn gated(
        parameter: impl Into<String>,
        estimate: f64,
        stderr: Option<f64>,
        cmp: Comparison,
        threshold: f64,
    ) -> Self {
        Self {
            parameter: parameter.into(),
            estimate,
            stderr,
            gate: Some((cmp, threshold)),
        }
    }

    pub fn pass(&self) -> Option<bool> {
        self.gate.map(|(cmp, th)| match cmp {
            Comparison::Below => self.estimate < th,
            Comparison::AtLeast => self.estimate >= th,
            Comparison::Above => self.estimate > th,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub lines: Vec<ReportLine>,
}

pub const REPORT_CSV_HEADER: &str = "check,parameter,estimate,stderr,threshold,pass";

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.pass() != Some(false))
    }

    pub fn csv_lines(&self) -> Vec<String> {
        self.lines
            .iter()
            .map(|l| {
                let stderr = l.stderr.map(|s| format!("{s:.6}")).unwrap_or_default();
                let threshold = l.gate.map(|(_, t)| format!("{t}")).unwrap_or_default();
                let pass = l.pass().map(|p| p.to_string()).unwrap_or_default();
                format!(
                    "{},{},{:.6},{},{},{}",
                    self.check, l.parameter, l.estimate, stderr, threshold, pass
                )
            })
            .collect()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(f, "[{verdict}] {}", self.check)?;
        for l in &self.lines {
            let mut s = format!("    {:<28} {:>12.6}", l.parameter, l.estimate);
            if let Some(se) = l.stderr {
                write!(s, " ± {se:.6}").unwrap();
            }
            if let Some((cmp, th)) = l.gate {
                let op = match cmp {
                    Comparison::Below => "<",
                    Comparison::AtLeast => ">=",
                    Comparison::Above => ">",
                };
                let ok = if l.pass() == Some(true) {
                    "ok"
                } else {
                    "FAILED"
                };
                write!(s, "   (need {op} {th}: {ok})").unwrap();
            }
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

pub fn reports_to_csv(reports: &[CheckReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        for line in r.csv_lines() {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

fn binomial_stderr(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        0.0
    } else {
        (p * (1.0 - p) / trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlinkPoint {
    pub distance: u32,
    pub estimate: f64,
    pub expected: f64,
    /// `|d · H_{n-1} · P̂(d) − 1|`.
    pub deviation: f64,
    /// Standard error of `d · H_{n-1} · P̂(d)`.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlinkReport {
    pub n: u32,
    pub samples: u64,
    pub points: Vec<KlinkPoint>,
    pub max_deviation: f64,
    /// Sum of the empirical mass over every distance.
    pub total_mass: f64,
    /// `(min, max)` of `d · lg n · P̂(d)` over the probed distances.
    pub implied_constants: (f64, f64),
    pub threshold: f64,
}

impl KlinkReport {
    pub fn passed(&self) -> bool {
        self.max_deviation < self.threshold
    }
}

/// Empirical law of the long-range distance sampler at distances `1, 2, 4, …, n/2`.
pub fn check_klink_law(
    n: u32,
    samples: u64,
    threshold: f64,
    rng: &mut SimRng,
) -> Result<KlinkReport> {
    if samples < MIN_KLINK_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: samples,
            required: MIN_KLINK_SAMPLES,
        });
    }
    let intervals = harmonic_cdf_intervals(n)?;
    let mut counts = vec![0u64; n as usize];
    for _ in 0..samples {
        counts[intervals.sample_distance(rng) as usize] += 1;
    }
    let harmonic: f64 = (1..n).map(|i| 1.0 / i as f64).sum();
    let lg = (n as f64).log2();
    let mut points = Vec::new();
    let mut d = 1u32;
    while d <= n / 2 {
        let p_hat = counts[d as usize] as f64 / samples as f64;
        let expected = 1.0 / (d as f64 * harmonic);
        let scale = d as f64 * harmonic;
        points.push(KlinkPoint {
            distance: d,
            estimate: p_hat,
            expected,
            deviation: (scale * p_hat - 1.0).abs(),
            stderr: scale * binomial_stderr(expected, samples),
        });
        d *= 2;
    }
    let max_deviation = points.iter().map(|p| p.deviation).fold(0.0, f64::max);
    let implied = points
        .iter()
        .map(|p| p.distance as f64 * lg * p.estimate)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c), hi.max(c))
        });
    Ok(KlinkReport {
        n,
        samples,
        points,
        max_deviation,
        total_mass: counts.iter().sum::<u64>() as f64 / samples as f64,
        implied_constants: implied,
        threshold,
    })
}

impl From<&KlinkReport> for CheckReport {
    fn from(r: &KlinkReport) -> Self {
        let mut lines: Vec<ReportLine> = r
            .points
            .iter()
            .map(|p| {
                ReportLine::info(
                    format!("normalized_mass_d{}", p.distance),
                    p.estimate / p.expected,
                    Some(p.stderr),
                )
            })
            .collect();
        let worst_se = r.points.iter().map(|p| p.stderr).fold(0.0, f64::max);
        lines.push(ReportLine::gated(
            "max_deviation",
            r.max_deviation,
            Some(worst_se),
            Comparison::Below,
            r.threshold,
        ));
        lines.push(ReportLine::info("total_mass", r.total_mass, None));
        lines.push(ReportLine::info("implied_c1", r.implied_constants.0, None));
        lines.push(ReportLine::info("implied_c2", r.implied_constants.1, None));
        lines.push(ReportLine::info("samples", r.samples as f64, None));
        CheckReport {
            check: format!("klink_law_n{}", r.n),
            lines,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AwarenessSizeReport {
    pub n: u32,
    pub depth: u32,
    pub sigma: f64,
    pub origins: u64,
    /// Fraction of origins with at least `lg n / σ` members.
    pub psi_hat: f64,
    pub stderr: f64,
    /// Awareness size → number of origins.
    pub histogram: BTreeMap<usize, u64>,
    pub threshold: f64,
}

impl AwarenessSizeReport {
    pub fn size_floor(&self) -> f64 {
        (self.n as f64).log2() / self.sigma
    }

    pub fn passed(&self) -> bool {
        self.psi_hat >= self.threshold
    }
}

fn batch_seeds(origins: u32, rng: &mut SimRng) -> Vec<(u64, u32)> {
    let batches = origins.div_ceil(ORIGINS_PER_BATCH);
    (0..batches)
        .map(|i| {
            let size = (origins - i * ORIGINS_PER_BATCH).min(ORIGINS_PER_BATCH);
            (rng.gen::<u64>(), size)
        })
        .collect()
}

/// Fraction of random origins whose depth-`depth` awareness holds at least
/// `lg n / σ` nodes. A fresh augmented network is built for every batch of
/// [`ORIGINS_PER_BATCH`] origins.
pub fn check_awareness_size(
    n: u32,
    depth: u32,
    sigma: f64,
    origins: u32,
    threshold: f64,
    rng: &mut SimRng,
) -> Result<AwarenessSizeReport> {
    if origins < MIN_ORIGINS {
        return Err(Error::InsufficientSamples {
            got: origins as u64,
            required: MIN_ORIGINS as u64,
        });
    }
    let floor = (n as f64).log2() / sigma;
    let per_batch: Vec<Vec<usize>> = batch_seeds(origins, rng)
        .into_par_iter()
        .enumerate()
        .map(|(i, (seed, size))| {
            let net = build_network(NetworkConfig::augmented(n, seed))?;
            let mut pick = rng::stream(seed, rng::BATCH_STREAM_BASE + i as u64);
            (0..size)
                .map(|_| build_awareness(&net, pick.gen_range(0..n), depth).map(|aw| aw.len()))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut histogram = BTreeMap::new();
    let mut hits = 0u64;
    for &size in per_batch.iter().flatten() {
        *histogram.entry(size).or_insert(0) += 1;
        if size as f64 >= floor {
            hits += 1;
        }
    }
    let total = origins as u64;
    let psi_hat = hits as f64 / total as f64;
    Ok(AwarenessSizeReport {
        n,
        depth,
        sigma,
        origins: total,
        psi_hat,
        stderr: binomial_stderr(psi_hat, total),
        histogram,
        threshold,
    })
}

impl From<&AwarenessSizeReport> for CheckReport {
    fn from(r: &AwarenessSizeReport) -> Self {
        let mean = r
            .histogram
            .iter()
            .map(|(&size, &count)| size as f64 * count as f64)
            .sum::<f64>()
            / r.origins as f64;
        CheckReport {
            check: format!("awareness_size_n{}_depth{}", r.n, r.depth),
            lines: vec![
                ReportLine::gated(
                    "psi_hat",
                    r.psi_hat,
                    Some(r.stderr),
                    Comparison::AtLeast,
                    r.threshold,
                ),
                ReportLine::info("size_floor", r.size_floor(), None),
                ReportLine::info("mean_size", mean, None),
                ReportLine::info("origins", r.origins as f64, None),
            ],
        }
    }
}

/// Ring distance at which targets are placed from their origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetDistance {
    /// `⌈lg²n · lg lg n⌉`, the smallest distance where the AL-awareness phase runs.
    Threshold,
    /// `n - 1`.
    Max,
    Exact(u32),
}

impl TargetDistance {
    pub fn resolve(self, n: u32) -> u32 {
        match self {
            TargetDistance::Threshold => (phase_threshold(n, 1.0).ceil() as u32).min(n - 1),
            TargetDistance::Max => n - 1,
            TargetDistance::Exact(d) => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfDistanceReport {
    pub n: u32,
    pub depth: u32,
    pub distance: u32,
    pub origins: u64,
    pub probability: f64,
    pub stderr: f64,
    pub threshold: f64,
}

impl HalfDistanceReport {
    pub fn passed(&self) -> bool {
        self.probability >= self.threshold
    }
}

/// Probability that a random origin's awareness contains a member whose
/// long-range link lands within half the origin's distance to the target.
pub fn check_half_distance(
    config: NetworkConfig,
    depth: u32,
    origins: u32,
    distance: TargetDistance,
    threshold: f64,
    rng: &mut SimRng,
) -> Result<HalfDistanceReport> {
    if origins < MIN_ORIGINS {
        return Err(Error::InsufficientSamples {
            got: origins as u64,
            required: MIN_ORIGINS as u64,
        });
    }
    if !config.augmented {
        return Err(Error::NotAugmented);
    }
    let n = config.n;
    let d = distance.resolve(n);
    if d == 0 || d >= n {
        return Err(Error::InvalidConfig(format!(
            "target distance {d} outside [1, {}]",
            n - 1
        )));
    }
    let per_batch: Vec<u64> = batch_seeds(origins, rng)
        .into_par_iter()
        .enumerate()
        .map(|(i, (seed, size))| {
            let net = build_network(NetworkConfig { seed, ..config })?;
            let mut pick = rng::stream(seed, rng::BATCH_STREAM_BASE + i as u64);
            let mut hits = 0;
            for _ in 0..size {
                let x: NodeId = pick.gen_range(0..n);
                let t = ring_offset(x, d, n);
                let aw = build_awareness(&net, x, depth)?;
                if find_good_intermediate(&aw, &net, x, t).is_some() {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;
    let total = origins as u64;
    let probability = per_batch.iter().sum::<u64>() as f64 / total as f64;
    Ok(HalfDistanceReport {
        n,
        depth,
        distance: d,
        origins: total,
        probability,
        stderr: binomial_stderr(probability, total),
        threshold,
    })
}

impl From<&HalfDistanceReport> for CheckReport {
    fn from(r: &HalfDistanceReport) -> Self {
        CheckReport {
            check: format!("half_distance_n{}_dist{}", r.n, r.distance),
            lines: vec![
                ReportLine::gated(
                    "probability",
                    r.probability,
                    Some(r.stderr),
                    Comparison::AtLeast,
                    r.threshold,
                ),
                ReportLine::info("origins", r.origins as f64, None),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingLaw {
    Constant,
    /// `lg²n`.
    LgSquared,
    /// `lg n · lg lg n`.
    LgLgLg,
}

impl ScalingLaw {
    pub fn eval(self, n: u32) -> f64 {
        let lg = (n as f64).log2();
        match self {
            ScalingLaw::Constant => 1.0,
            ScalingLaw::LgSquared => lg * lg,
            ScalingLaw::LgLgLg => lg * lg.log2(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalingLaw::Constant => "const",
            ScalingLaw::LgSquared => "lg2n",
            ScalingLaw::LgLgLg => "lgn_lglgn",
        }
    }

    /// Law expected for a scheme, and the contrasting one.
    pub fn for_scheme(scheme: Scheme) -> (ScalingLaw, ScalingLaw) {
        match scheme {
            Scheme::NonOblivious | Scheme::Oblivious => (ScalingLaw::LgLgLg, ScalingLaw::LgSquared),
            _ => (ScalingLaw::LgSquared, ScalingLaw::LgLgLg),
        }
    }
}

/// `max r / min r` for `r(n) = hops(n) / law(n)`.
pub fn flatness_ratio(points: &[(u32, f64)], law: ScalingLaw) -> f64 {
    let ratios = points.iter().map(|&(n, h)| h / law.eval(n));
    let (lo, hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r), hi.max(r))
    });
    hi / lo
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub scheme: Scheme,
    /// `(n, pooled mean hops)` in increasing `n`.
    pub points: Vec<(u32, f64)>,
    pub law: ScalingLaw,
    pub flatness: f64,
    pub contrast_law: ScalingLaw,
    pub contrast_flatness: f64,
}

/// Flatness of each scheme's hop counts under its expected law and the contrasting one.
pub fn fit_scaling(rows: &[MetricsRow]) -> Result<Vec<ScalingFit>> {
    let mut by_scheme: BTreeMap<Scheme, BTreeMap<u32, (f64, u64)>> = BTreeMap::new();
    for r in rows {
        let ok = r.trials - r.failures;
        let cell = by_scheme
            .entry(r.scheme)
            .or_default()
            .entry(r.n)
            .or_default();
        cell.0 += r.mean_hops * ok as f64;
        cell.1 += ok;
    }
    by_scheme
        .into_iter()
        .map(|(scheme, cells)| {
            if cells.len() < MIN_GRID_POINTS {
                return Err(Error::TooFewGridPoints {
                    scheme: scheme.to_string(),
                    got: cells.len(),
                    required: MIN_GRID_POINTS,
                });
            }
            let points: Vec<(u32, f64)> = cells
                .into_iter()
                .map(|(n, (sum, count))| (n, if count > 0 { sum / count as f64 } else { 0.0 }))
                .collect();
            let (law, contrast_law) = ScalingLaw::for_scheme(scheme);
            Ok(ScalingFit {
                scheme,
                flatness: flatness_ratio(&points, law),
                contrast_flatness: flatness_ratio(&points, contrast_law),
                points,
                law,
                contrast_law,
            })
        })
        .collect()
}

impl ScalingFit {
    pub fn report(&self, max_flatness: f64) -> CheckReport {
        let mut lines: Vec<ReportLine> = self
            .points
            .iter()
            .map(|&(n, h)| ReportLine::info(format!("mean_hops_n{n}"), h, None))
            .collect();
        lines.push(ReportLine::gated(
            format!("flatness_{}", self.law.name()),
            self.flatness,
            None,
            Comparison::Below,
            max_flatness,
        ));
        lines.push(ReportLine::gated(
            format!("flatness_{}", self.contrast_law.name()),
            self.contrast_flatness,
            None,
            Comparison::Above,
            self.flatness,
        ));
        CheckReport {
            check: format!("scaling_{}", self.scheme),
            lines,
        }
    }
}
