//! Acceptance suite. Each criterion runs at its stated size and tolerance and
//! prints one PASS/FAIL line; the process exits non-zero if any criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kswn::experiments::{network_config_for, pooled_mean, DEFAULT_N_GRID, DEFAULT_SEEDS};
use kswn::netgen::{ceil_log2, harmonic_cdf_intervals};
use kswn::rng::seeded;
use kswn::routing::default_awareness_depth;
use kswn::verify::{
    check_awareness_size, check_half_distance, check_klink_law, fit_scaling, thresholds,
    ScalingFit, TargetDistance,
};
use kswn::{
    build_awareness, build_network, route, run_plan, storage_bits, ExperimentPlan, NetworkConfig,
    RoutingParams, Scheme,
};
use num_rational::Ratio;
use rand::Rng;

const SCALING_GRID: [u32; 3] = [1 << 12, 1 << 14, 1 << 16];
const SCALING_TRIALS: u32 = 2000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn sampler_exactness() -> Outcome {
    let start = Instant::now();
    let r = check_klink_law(
        1024,
        1_000_000,
        thresholds::KLINK_MAX_DEVIATION,
        &mut seeded(1),
    )
    .expect("valid check");
    let iv = harmonic_cdf_intervals(4).expect("n = 4 is valid");
    let exact = [Ratio::new(6u64, 11), Ratio::new(9, 11), Ratio::new(1, 1)];
    let analytic = exact
        .iter()
        .zip(iv.breakpoints())
        .all(|(q, &b)| (b - *q.numer() as f64 / *q.denom() as f64).abs() < 1e-15);
    let elapsed = start.elapsed();
    let pass = r.max_deviation < thresholds::KLINK_MAX_DEVIATION && analytic && within(elapsed, 10);
    outcome(
        pass,
        format!(
            "max |d·H·P̂(d) − 1| = {:.4} (need < {}), n=4 breakpoints exact: {analytic}, {:.1}s",
            r.max_deviation,
            thresholds::KLINK_MAX_DEVIATION,
            elapsed.as_secs_f64()
        ),
    )
}

fn scaling_fits(schemes: Vec<Scheme>) -> Vec<ScalingFit> {
    let plan = ExperimentPlan {
        n_grid: SCALING_GRID.to_vec(),
        schemes,
        seeds: vec![1],
        sampled_pairs: Some(SCALING_TRIALS),
        ..ExperimentPlan::default()
    };
    fit_scaling(&run_plan(&plan).expect("valid plan")).expect("three grid points")
}

fn greedy_scaling() -> Outcome {
    let start = Instant::now();
    let fit = scaling_fits(vec![Scheme::GreedyQ1]).remove(0);
    let elapsed = start.elapsed();
    let pass = fit.flatness <= thresholds::GREEDY_FLATNESS && within(elapsed, 60);
    outcome(
        pass,
        format!(
            "greedy_q1 flatness under lg²n = {:.3} (need ≤ {}), {:.1}s",
            fit.flatness,
            thresholds::GREEDY_FLATNESS,
            elapsed.as_secs_f64()
        ),
    )
}

fn near_optimal_scaling() -> Outcome {
    let start = Instant::now();
    let fits = scaling_fits(vec![Scheme::NonOblivious, Scheme::Oblivious]);
    let elapsed = start.elapsed();
    let mut pass = within(elapsed, 300);
    let mut parts = Vec::new();
    for f in &fits {
        pass &= f.flatness <= thresholds::NEAR_OPTIMAL_FLATNESS && f.flatness < f.contrast_flatness;
        parts.push(format!(
            "{} {:.3} (lg²n {:.3})",
            f.scheme, f.flatness, f.contrast_flatness
        ));
    }
    outcome(
        pass,
        format!(
            "flatness under lg n·lg lg n: {} (need ≤ {} and below lg²n), {:.1}s",
            parts.join(", "),
            thresholds::NEAR_OPTIMAL_FLATNESS,
            elapsed.as_secs_f64()
        ),
    )
}

fn scheme_ordering() -> Outcome {
    let start = Instant::now();
    let plan = ExperimentPlan {
        schemes: vec![
            Scheme::GreedyQ1,
            Scheme::GreedyQ2,
            Scheme::LocalAwareness,
            Scheme::NonOblivious,
        ],
        seeds: DEFAULT_SEEDS.to_vec(),
        ..ExperimentPlan::default()
    };
    let rows = run_plan(&plan).expect("valid plan");
    let elapsed = start.elapsed();
    let mut pass = within(elapsed, 300);
    let mut worst = String::new();
    for &n in DEFAULT_N_GRID.iter().filter(|&&n| n >= 10_000) {
        let m = |s| pooled_mean(&rows, s, n).expect("row present");
        let (g1, g2, local, ours) = (
            m(Scheme::GreedyQ1),
            m(Scheme::GreedyQ2),
            m(Scheme::LocalAwareness),
            m(Scheme::NonOblivious),
        );
        let ok = ours < local && local < g1 && g2 < g1;
        if !ok && worst.is_empty() {
            worst = format!(" violated at n={n}");
        }
        pass &= ok;
        if n == *DEFAULT_N_GRID.last().unwrap() {
            worst.push_str(&format!(
                " n={n}: non_oblivious {ours:.2} < local {local:.2} < greedy_q1 {g1:.2}, greedy_q2 {g2:.2}"
            ));
        }
    }
    outcome(
        pass,
        format!(
            "ordering at every n ≥ 10000;{worst}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn storage_accounting() -> Outcome {
    let mut pass = true;
    let mut last = String::new();
    for &n in &DEFAULT_N_GRID {
        let params = RoutingParams::for_ring(n);
        let id_bits = ceil_log2(n) as u64;
        let net = build_network(network_config_for(Scheme::GreedyQ1, n, 1)).expect("valid config");
        let greedy = storage_bits(Scheme::GreedyQ1, &net, &params).expect("storage");
        let bound = (4 + 2 * ((1u64 << (params.awareness_depth + 1)) - 1)) * id_bits;
        pass &= greedy == 2 * id_bits;
        for s in [Scheme::NonOblivious, Scheme::Oblivious] {
            let bits = storage_bits(s, &net, &params).expect("storage");
            pass &= bits <= bound;
            last = format!("n={n}: greedy_q1 {greedy} = 2·{id_bits}, ours {bits} ≤ {bound}");
        }
    }
    outcome(pass, last)
}

fn awareness_size() -> Outcome {
    let origins = 2000;
    let mut psi = Vec::new();
    let mut rng = seeded(1);
    for &n in &SCALING_GRID {
        let r = check_awareness_size(n, 4, 4.0, origins, thresholds::AWARENESS_PSI, &mut rng)
            .expect("valid check");
        psi.push((n, r.psi_hat, r.stderr));
    }
    let (_, top, _) = psi[2];
    let monotone = psi
        .windows(2)
        .all(|w| w[1].1 >= w[0].1 - 2.0 * (w[0].2.powi(2) + w[1].2.powi(2)).sqrt());
    let pass = top >= thresholds::AWARENESS_PSI && monotone;
    let listed: Vec<String> = psi
        .iter()
        .map(|(n, p, se)| format!("{n}: {p:.3}±{se:.3}"))
        .collect();
    outcome(
        pass,
        format!(
            "ψ̂ at 2^16 = {top:.3} (need ≥ {}), non-decreasing within 2 SE: {monotone} [{}]",
            thresholds::AWARENESS_PSI,
            listed.join(", ")
        ),
    )
}

fn half_distance() -> Outcome {
    let n = 1 << 16;
    let r = check_half_distance(
        NetworkConfig::augmented(n, 0),
        default_awareness_depth(n),
        2000,
        TargetDistance::Threshold,
        thresholds::HALF_DISTANCE_PROBABILITY,
        &mut seeded(1),
    )
    .expect("valid check");
    outcome(
        r.passed(),
        format!(
            "P(half-distance jump) at distance {} = {:.4} ± {:.4} (need ≥ {})",
            r.distance,
            r.probability,
            r.stderr,
            thresholds::HALF_DISTANCE_PROBABILITY
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = seeded(8);
    let mut mismatches = 0;
    let mut checked = 0;
    for _ in 0..200 {
        let n = rng.gen_range(8..=256);
        let net = build_network(NetworkConfig::augmented(n, rng.gen())).expect("valid config");
        let x = rng.gen_range(0..n);
        let depth = rng.gen_range(0..=4);
        let aw = build_awareness(&net, x, depth).expect("augmented");
        let oracle = common::al_distances(&net, x, depth);
        if aw.len() != oracle.len() {
            mismatches += 1;
            continue;
        }
        for (&z, &d) in &oracle {
            checked += 1;
            match aw.shortest_path(z) {
                Ok(p) if p.len() as u32 == d + 1 => {}
                _ => mismatches += 1,
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("200 instances, {checked} members, {mismatches} mismatches"),
    )
}

fn obliviousness_replay() -> Outcome {
    let mut rng = seeded(9);
    let mut diverged = 0;
    let mut traces = 0;
    while traces < 100 {
        let n = 1u32 << rng.gen_range(10..=14);
        let net = build_network(NetworkConfig::augmented(n, rng.gen())).expect("valid config");
        let params = RoutingParams::for_ring(n);
        let (s, t) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let full = route(Scheme::Oblivious, &net, s, t, &params).expect("augmented");
        if full.path.len() < 3 {
            continue;
        }
        traces += 1;
        let i = rng.gen_range(1..full.path.len() - 1);
        let rest = route(Scheme::Oblivious, &net, full.path[i], t, &params).expect("augmented");
        if rest.path[..] != full.path[i..] || rest.links[..] != full.links[i..] {
            diverged += 1;
        }
    }
    outcome(
        diverged == 0,
        format!("{traces} traces, {diverged} diverged after restart"),
    )
}

fn cli_determinism() -> Outcome {
    let runs: [&[&str]; 4] = [
        &["gen", "--n", "2000", "--augmented", "--seed", "4"],
        &[
            "route", "--n", "16384", "--source", "7", "--target", "9000", "--seed", "4",
        ],
        &[
            "bench",
            "--n-grid",
            "2000,4000",
            "--seeds",
            "1,2",
            "--trials",
            "500",
        ],
        &[
            "verify",
            "--check",
            "half-distance",
            "--n",
            "16384",
            "--origins",
            "500",
        ],
    ];
    let mut differing = Vec::new();
    for args in runs {
        let once = || {
            Command::new(env!("CARGO_BIN_EXE_kswn"))
                .args(args)
                .output()
                .expect("binary runs")
        };
        let (a, b) = (once(), once());
        if a.stdout != b.stdout || a.status.code() != b.status.code() || a.stdout.is_empty() {
            differing.push(args[0]);
        }
    }
    outcome(
        differing.is_empty(),
        format!("gen, route, bench, verify run twice; differing: {differing:?}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("sampler exactness", sampler_exactness),
        ("greedy baseline law", greedy_scaling),
        ("near-optimal scaling", near_optimal_scaling),
        ("scheme ordering", scheme_ordering),
        ("storage accounting", storage_accounting),
        ("awareness size estimator", awareness_size),
        ("half-distance estimator", half_distance),
        ("awareness oracle equivalence", oracle_equivalence),
        ("obliviousness replay", obliviousness_replay),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
