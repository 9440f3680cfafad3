//! Command-line front end: `gen`, `route`, `bench` and `verify`.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 when a
//! `verify` check misses its threshold.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentPlan, ParamOverrides};
use crate::netgen::{build_network, NetworkConfig, SmallWorldNet};
use crate::rng;
use crate::routing::{self, default_awareness_depth, Scheme};
use crate::verify::{self, thresholds, CheckReport, TargetDistance};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "kswn",
    version,
    about = "Small-world ring generation, routing and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Ring size.
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Long-range links per node.
    #[arg(long, global = true)]
    q: Option<u32>,
    /// Root seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true)]
    scheme: Option<Scheme>,
    /// AL awareness depth (default max(1, ⌊lg lg n⌋)).
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Threshold multiplier of the oblivious scheme.
    #[arg(long, global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true)]
    hop_cap: Option<u32>,
    /// Comma-separated seeds for sweeps.
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated ring sizes for sweeps.
    #[arg(long, global = true, value_delimiter = ',')]
    n_grid: Option<Vec<u32>>,
    /// Write the primary output (dump, trace or CSV) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sampled source/destination pairs per cell (bench, scaling check).
    #[arg(long, global = true)]
    trials: Option<u32>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump a generated network.
    Gen {
        #[arg(long)]
        augmented: bool,
        #[arg(long)]
        al_span: Option<u32>,
    },
    /// Route one query and print its hop trace.
    Route {
        #[arg(long)]
        source: u32,
        #[arg(long)]
        target: u32,
    },
    /// Run a routing sweep and emit metrics CSV.
    Bench {
        /// Comma-separated schemes (default: all).
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<Scheme>>,
        #[arg(long, default_value_t = 1)]
        queries_per_node: u32,
    },
    /// Run Monte Carlo checks.
    Verify {
        #[arg(long, value_enum, default_value_t = CheckKind::All)]
        check: CheckKind,
        /// Draws for the long-range law check.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Random origins for the awareness checks.
        #[arg(long, default_value_t = 2000)]
        origins: u32,
        /// Override the default pass threshold of the selected check.
        #[arg(long)]
        threshold: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Klink,
    Awareness,
    HalfDistance,
    Scaling,
    All,
}

pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if informational { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return if informational { EXIT_OK } else { EXIT_INVALID };
        }
    };
    let pool = match cli.global.jobs {
        Some(0) => {
            let _ = writeln!(stderr, "error: --jobs must be positive");
            return EXIT_INVALID;
        }
        Some(jobs) => rayon::ThreadPoolBuilder::new().num_threads(jobs).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let mut buffered = Vec::new();
    let outcome = pool.install(|| run(&cli, &mut buffered));
    if let Err(e) = stdout.write_all(&buffered) {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_INVALID;
    }
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn run(cli: &Cli, stdout: &mut Vec<u8>) -> Result<i32> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen { augmented, al_span } => {
            let n = g.n.unwrap_or(1024);
            let mut cfg = NetworkConfig::new(n, g.seed).with_q(g.q.unwrap_or(1));
            cfg.augmented = *augmented;
            if let Some(span) = al_span {
                cfg.al_span = *span;
            }
            let net = build_network(cfg)?;
            emit(g, stdout, net.to_dump_string().as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Route { source, target } => {
            let n = g.n.unwrap_or(1024);
            let scheme = g.scheme.unwrap_or(Scheme::Oblivious);
            let mut cfg = experiments::network_config_for(scheme, n, g.seed);
            if let Some(q) = g.q {
                cfg.q = q;
            }
            let net = build_network(cfg)?;
            let params = overrides(g).resolve(n);
            params.validate()?;
            let result = routing::route(scheme, &net, *source, *target, &params)?;
            emit(g, stdout, format_trace(&net, &result, g.seed).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Bench {
            schemes,
            queries_per_node,
        } => {
            let schemes = schemes
                .clone()
                .or_else(|| g.scheme.map(|s| vec![s]))
                .unwrap_or_else(|| Scheme::ALL.to_vec());
            let n_grid = g
                .n_grid
                .clone()
                .or_else(|| g.n.map(|n| vec![n]))
                .unwrap_or_else(|| experiments::DEFAULT_N_GRID.to_vec());
            let plan = ExperimentPlan {
                n_grid,
                schemes,
                seeds: g
                    .seeds
                    .clone()
                    .unwrap_or_else(|| experiments::DEFAULT_SEEDS.to_vec()),
                queries_per_node: *queries_per_node,
                sampled_pairs: g.trials,
                params: overrides(g),
            };
            let rows = experiments::run_plan(&plan)?;
            emit(g, stdout, experiments::to_csv_string(&rows).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            check,
            samples,
            origins,
            threshold,
        } => {
            let reports = run_checks(g, *check, *samples, *origins, *threshold)?;
            for r in &reports {
                write!(stdout, "{r}")?;
            }
            let csv = verify::reports_to_csv(&reports);
            match &g.out {
                Some(path) => fs::write(path, csv)?,
                None => write!(stdout, "\n{csv}")?,
            }
            let passed = reports.iter().all(CheckReport::passed);
            Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

fn overrides(g: &GlobalArgs) -> ParamOverrides {
    ParamOverrides {
        awareness_depth: g.depth,
        c: g.c,
        hop_cap: g.hop_cap,
        sigma: g.sigma,
    }
}

fn emit(g: &GlobalArgs, stdout: &mut Vec<u8>, bytes: &[u8]) -> Result<()> {
    match &g.out {
        Some(path) => fs::write(path, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

/// `step<TAB>node<TAB>link_kind<TAB>dist_to_target`, one line per visited node,
/// after a `#` summary line.
pub fn format_trace(net: &SmallWorldNet, r: &routing::RouteResult, seed: u64) -> String {
    let t = r.target;
    let mut out = format!(
        "# scheme={} n={} seed={} source={} target={} hops={} long_range_hops={} final_hops={} succeeded={}\n",
        r.scheme,
        net.n(),
        seed,
        r.path[0],
        t,
        r.hops,
        r.phase_hops.long_range,
        r.phase_hops.final_phase,
        r.succeeded
    );
    for (step, &node) in r.path.iter().enumerate() {
        let kind = if step == 0 {
            "-".to_string()
        } else {
            r.links[step - 1].to_string()
        };
        out.push_str(&format!(
            "{step}\t{node}\t{kind}\t{}\n",
            net.distance(node, t)
        ));
    }
    out
}

fn run_checks(
    g: &GlobalArgs,
    check: CheckKind,
    samples: u64,
    origins: u32,
    threshold: Option<f64>,
) -> Result<Vec<CheckReport>> {
    let wanted = |k: CheckKind| check == k || check == CheckKind::All;
    let mut root = rng::seeded(g.seed);
    let mut reports = Vec::new();
    if wanted(CheckKind::Klink) {
        let n = g.n.unwrap_or(1024);
        let th = threshold.unwrap_or(thresholds::KLINK_MAX_DEVIATION);
        let r = verify::check_klink_law(n, samples, th, &mut root)?;
        reports.push(CheckReport::from(&r));
    }
    if wanted(CheckKind::Awareness) {
        let n = g.n.unwrap_or(1 << 16);
        let depth = g.depth.unwrap_or_else(|| default_awareness_depth(n));
        let th = threshold.unwrap_or(thresholds::AWARENESS_PSI);
        let sigma = g.sigma.unwrap_or(4.0);
        let r = verify::check_awareness_size(n, depth, sigma, origins, th, &mut root)?;
        reports.push(CheckReport::from(&r));
    }
    if wanted(CheckKind::HalfDistance) {
        let n = g.n.unwrap_or(1 << 16);
        let depth = g.depth.unwrap_or_else(|| default_awareness_depth(n));
        let th = threshold.unwrap_or(thresholds::HALF_DISTANCE_PROBABILITY);
        for dist in [TargetDistance::Threshold, TargetDistance::Max] {
            let cfg = NetworkConfig::augmented(n, 0);
            let r = verify::check_half_distance(cfg, depth, origins, dist, th, &mut root)?;
            reports.push(CheckReport::from(&r));
        }
    }
    if wanted(CheckKind::Scaling) {
        let plan = ExperimentPlan {
            n_grid: g
                .n_grid
                .clone()
                .unwrap_or_else(|| vec![1 << 12, 1 << 14, 1 << 16]),
            schemes: match g.scheme {
                Some(s) => vec![s],
                None => vec![Scheme::GreedyQ1, Scheme::NonOblivious, Scheme::Oblivious],
            },
            seeds: g.seeds.clone().unwrap_or_else(|| vec![g.seed]),
            queries_per_node: 1,
            sampled_pairs: Some(g.trials.unwrap_or(2000)),
            params: overrides(g),
        };
        let rows = experiments::run_plan(&plan)?;
        for fit in verify::fit_scaling(&rows)? {
            let th = threshold.unwrap_or(match fit.law {
                verify::ScalingLaw::LgSquared => thresholds::GREEDY_FLATNESS,
                _ => thresholds::NEAR_OPTIMAL_FLATNESS,
            });
            reports.push(fit.report(th));
        }
    }
    if reports.is_empty() {
        return Err(Error::InvalidConfig("no checks selected".into()));
    }
    Ok(reports)
}
