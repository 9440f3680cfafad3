//! Decentralized routing schemes and hop-by-hop traces.
//!
//! * greedy forwarding over the ring and long-range links (one or two
//!   long-range links per node),
//! * greedy forwarding with awareness of the next `⌈lg n⌉` ring successors
//!   and their long-range links,
//! * the non-oblivious AL-awareness scheme, which carries a header stack of
//!   precomputed AL hops toward the best long-range jump,
//! * the oblivious AL-awareness scheme, which recomputes its decision from
//!   scratch at every node.
//!
//! Both AL-awareness schemes switch to plain greedy forwarding (including AL
//! links) once the remaining distance drops below `c · lg²n · lg lg n`.

use std::fmt;
use std::str::FromStr;

use crate::awareness::{build_awareness, Awareness};
use crate::error::{Error, Result};
use crate::netgen::{ceil_log2, ring_offset, LinkKind, NodeId, SmallWorldNet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    GreedyQ1,
    GreedyQ2,
    LocalAwareness,
    NonOblivious,
    Oblivious,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::GreedyQ1,
        Scheme::GreedyQ2,
        Scheme::LocalAwareness,
        Scheme::NonOblivious,
        Scheme::Oblivious,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::GreedyQ1 => "greedy_q1",
            Scheme::GreedyQ2 => "greedy_q2",
            Scheme::LocalAwareness => "local_awareness",
            Scheme::NonOblivious => "non_oblivious",
            Scheme::Oblivious => "oblivious",
        }
    }

    /// Long-range links per node in the network this scheme runs on.
    pub fn long_range_links(self) -> u32 {
        match self {
            Scheme::GreedyQ2 => 2,
            _ => 1,
        }
    }

    pub fn needs_augmented(self) -> bool {
        matches!(self, Scheme::NonOblivious | Scheme::Oblivious)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// `max(1, ⌊lg lg n⌋)`.
pub fn default_awareness_depth(n: u32) -> u32 {
    ((n as f64).log2().log2().floor() as u32).max(1)
}

/// Distance below which the AL-awareness schemes fall back to greedy: `c · lg²n · lg lg n`.
pub fn phase_threshold(n: u32, c: f64) -> f64 {
    let lg = (n as f64).log2();
    c * lg * lg * lg.log2()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingParams {
    pub awareness_depth: u32,
    /// Threshold multiplier for the oblivious scheme.
    pub c: f64,
    pub hop_cap: u32,
    /// Awareness-size constant, used only by diagnostics.
    pub sigma: f64,
}

impl RoutingParams {
    pub fn for_ring(n: u32) -> Self {
        let lg = ceil_log2(n);
        Self {
            awareness_depth: default_awareness_depth(n),
            c: 1.0,
            hop_cap: 50 * lg * lg,
            sigma: 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "threshold constant c must be positive, got {}",
                self.c
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.hop_cap == 0 {
            return Err(Error::InvalidConfig("hop cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseHops {
    pub long_range: u32,
    pub final_phase: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteResult {
    pub scheme: Scheme,
    pub target: NodeId,
    /// Visited nodes, source first.
    pub path: Vec<NodeId>,
    /// `links[i]` is the kind of link used for hop `path[i] -> path[i + 1]`.
    pub links: Vec<LinkKind>,
    pub hops: u32,
    /// Single-phase schemes (plain greedy, local awareness) count every hop as final-phase.
    pub phase_hops: PhaseHops,
    pub succeeded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    LongRange,
    Final,
}

struct Trace {
    result: RouteResult,
    hop_cap: u32,
}

impl Trace {
    fn new(scheme: Scheme, s: NodeId, t: NodeId, hop_cap: u32) -> Self {
        Self {
            result: RouteResult {
                scheme,
                target: t,
                path: vec![s],
                links: Vec::new(),
                hops: 0,
                phase_hops: PhaseHops::default(),
                succeeded: false,
            },
            hop_cap,
        }
    }

    fn at(&self) -> NodeId {
        *self.result.path.last().unwrap()
    }

    fn exhausted(&self) -> bool {
        self.result.hops >= self.hop_cap
    }

    fn hop(&mut self, to: NodeId, kind: LinkKind, phase: Phase) {
        let r = &mut self.result;
        r.path.push(to);
        r.links.push(kind);
        r.hops += 1;
        match phase {
            Phase::LongRange => r.phase_hops.long_range += 1,
            Phase::Final => r.phase_hops.final_phase += 1,
        }
    }

    fn finish(mut self) -> RouteResult {
        self.result.succeeded = self.at() == self.result.target;
        self.result
    }
}

/// Immediate neighbor closest to `t`, with the link used to reach it.
///
/// Candidates are scanned ring link first, then long-range links, then AL
/// links (when `use_al`), each in stored order; the first strict minimum wins.
pub fn greedy_step_link(
    net: &SmallWorldNet,
    x: NodeId,
    t: NodeId,
    use_al: bool,
) -> (NodeId, LinkKind) {
    let r = net.r_neighbor(x);
    let mut best = (r, LinkKind::Ring);
    let mut best_d = net.distance(r, t);
    for &v in net.k_neighbors(x) {
        let d = net.distance(v, t);
        if d < best_d {
            best_d = d;
            best = (v, LinkKind::LongRange);
        }
    }
    if use_al {
        for &v in net.al_neighbors(x) {
            let d = net.distance(v, t);
            if d < best_d {
                best_d = d;
                best = (v, LinkKind::AugmentedLocal);
            }
        }
    }
    best
}

pub fn greedy_step(net: &SmallWorldNet, x: NodeId, t: NodeId, use_al: bool) -> NodeId {
    greedy_step_link(net, x, t, use_al).0
}

fn greedy_until_target(trace: &mut Trace, net: &SmallWorldNet, t: NodeId, use_al: bool) {
    while trace.at() != t && !trace.exhausted() {
        let (next, kind) = greedy_step_link(net, trace.at(), t, use_al);
        trace.hop(next, kind, Phase::Final);
    }
}

/// Plain greedy forwarding; AL links are candidates only when `use_al` is set.
pub fn route_greedy(
    net: &SmallWorldNet,
    s: NodeId,
    t: NodeId,
    params: &RoutingParams,
    use_al: bool,
) -> RouteResult {
    let scheme = if net.config().q >= 2 {
        Scheme::GreedyQ2
    } else {
        Scheme::GreedyQ1
    };
    let mut trace = Trace::new(scheme, s, t, params.hop_cap);
    greedy_until_target(&mut trace, net, t, use_al);
    trace.finish()
}

/// Next hop under successor awareness.
///
/// The holder sees its next `⌈lg n⌉` ring successors and their long-range
/// links. Reaching the link owned by the successor at offset `i` costs `i`
/// ring hops plus the long-range hop. If some such link gains more distance
/// per hop spent than the best immediate neighbor gains in one hop, the
/// message takes one ring step toward its owner; otherwise it moves greedily.
pub fn local_awareness_next_hop(net: &SmallWorldNet, x: NodeId, t: NodeId) -> (NodeId, LinkKind) {
    let n = net.n();
    let remaining = net.distance(x, t);
    let greedy = greedy_step_link(net, x, t, false);
    let window = ceil_log2(n);
    if window >= remaining {
        return greedy;
    }
    let direct_gain = (remaining - net.distance(greedy.0, t)) as u64;
    let worth_walking = (1..=window).any(|i| {
        net.k_neighbors(ring_offset(x, i, n)).iter().any(|&y| {
            let d = net.distance(y, t);
            d < remaining && (remaining - d) as u64 > (i as u64 + 1) * direct_gain
        })
    });
    if worth_walking {
        (net.r_neighbor(x), LinkKind::Ring)
    } else {
        greedy
    }
}

pub fn route_local_awareness(
    net: &SmallWorldNet,
    s: NodeId,
    t: NodeId,
    params: &RoutingParams,
) -> RouteResult {
    let mut trace = Trace::new(Scheme::LocalAwareness, s, t, params.hop_cap);
    while trace.at() != t && !trace.exhausted() {
        let (next, kind) = local_awareness_next_hop(net, trace.at(), t);
        trace.hop(next, kind, Phase::Final);
    }
    trace.finish()
}

/// Header of a message routed by the non-oblivious scheme; the top of the
/// stack is the next AL hop.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageHeader {
    stack: Vec<NodeId>,
}

impl MessageHeader {
    /// Pushes `path` so that `path[0]` is popped first.
    pub fn push_path(&mut self, path: &[NodeId]) {
        self.stack.extend(path.iter().rev());
    }

    pub fn pop(&mut self) -> Option<NodeId> {
        self.stack.pop()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }
}

/// Long-range neighbor of `u` closest to `t` (the first one on ties).
fn closest_k_neighbor(net: &SmallWorldNet, u: NodeId, t: NodeId) -> NodeId {
    *net.k_neighbors(u)
        .iter()
        .min_by_key(|&&v| net.distance(v, t))
        .expect("every node has a long-range link")
}

/// Member whose long-range link lands closest to `t`; ties go to the lowest
/// level, then to the earliest discovered.
pub fn best_jump_intermediate(aw: &Awareness, net: &SmallWorldNet, t: NodeId) -> NodeId {
    let mut best = aw.origin();
    let mut best_d = u32::MAX;
    // Discovery order is level order, so the first strict minimum wins both tie-breaks.
    for z in aw.members() {
        let d = net.distance(closest_k_neighbor(net, z, t), t);
        if d < best_d {
            best_d = d;
            best = z;
        }
    }
    best
}

/// Non-oblivious routing with a header stack of AL hops.
///
/// While the distance is at least `lg²n · lg lg n`: with an empty header the
/// message takes the holder's long-range link to `y`, and `y` pushes the AL
/// path to the member of its awareness whose long-range link lands closest to
/// `t`; otherwise the next hop is popped from the header. The remainder is
/// greedy over all immediate neighbors.
pub fn route_non_oblivious(
    net: &SmallWorldNet,
    s: NodeId,
    t: NodeId,
    params: &RoutingParams,
) -> Result<RouteResult> {
    if !net.is_augmented() {
        return Err(Error::NotAugmented);
    }
    let threshold = phase_threshold(net.n(), 1.0);
    let mut trace = Trace::new(Scheme::NonOblivious, s, t, params.hop_cap);
    let mut header = MessageHeader::default();
    while (net.distance(trace.at(), t) as f64) >= threshold && !trace.exhausted() {
        let x = trace.at();
        match header.pop() {
            None => {
                let y = closest_k_neighbor(net, x, t);
                trace.hop(y, LinkKind::LongRange, Phase::LongRange);
                let aw = build_awareness(net, y, params.awareness_depth)?;
                let z = best_jump_intermediate(&aw, net, t);
                header.push_path(&aw.shortest_path(z)?[1..]);
            }
            Some(next) => {
                debug_assert!(net.al_neighbors(x).contains(&next));
                trace.hop(next, LinkKind::AugmentedLocal, Phase::LongRange);
            }
        }
    }
    greedy_until_target(&mut trace, net, t, true);
    Ok(trace.finish())
}

/// Closest member (in AL hops, then discovery order) owning a long-range link
/// that lands within half of the holder's remaining distance to `t`.
pub fn find_good_intermediate(
    aw: &Awareness,
    net: &SmallWorldNet,
    x: NodeId,
    t: NodeId,
) -> Option<NodeId> {
    let remaining = net.distance(x, t) as u64;
    aw.members().find(|&z| {
        net.k_neighbors(z)
            .iter()
            .any(|&k| 2 * net.distance(k, t) as u64 <= remaining)
    })
}

/// One decision of the oblivious scheme; a function of `(x, t, net, params)` only.
pub fn oblivious_next_hop(
    net: &SmallWorldNet,
    x: NodeId,
    t: NodeId,
    params: &RoutingParams,
) -> Result<(NodeId, LinkKind, bool)> {
    if !net.is_augmented() {
        return Err(Error::NotAugmented);
    }
    let remaining = net.distance(x, t);
    if (remaining as f64) < phase_threshold(net.n(), params.c) {
        let (next, kind) = greedy_step_link(net, x, t, true);
        return Ok((next, kind, false));
    }
    let aw = build_awareness(net, x, params.awareness_depth)?;
    let hop = match find_good_intermediate(&aw, net, x, t) {
        None => greedy_step_link(net, x, t, true),
        Some(z) if z == x => (closest_k_neighbor(net, x, t), LinkKind::LongRange),
        Some(z) => (aw.shortest_path(z)?[1], LinkKind::AugmentedLocal),
    };
    Ok((hop.0, hop.1, true))
}

/// Oblivious routing: the awareness of the current holder is rebuilt at every
/// hop and no state travels with the message.
pub fn route_oblivious(
    net: &SmallWorldNet,
    s: NodeId,
    t: NodeId,
    params: &RoutingParams,
) -> Result<RouteResult> {
    if !net.is_augmented() {
        return Err(Error::NotAugmented);
    }
    let mut trace = Trace::new(Scheme::Oblivious, s, t, params.hop_cap);
    while trace.at() != t && !trace.exhausted() {
        let (next, kind, long_range) = oblivious_next_hop(net, trace.at(), t, params)?;
        let phase = if long_range {
            Phase::LongRange
        } else {
            Phase::Final
        };
        trace.hop(next, kind, phase);
    }
    Ok(trace.finish())
}

/// Routes one query under `scheme`. The network must match the scheme's needs.
pub fn route(
    scheme: Scheme,
    net: &SmallWorldNet,
    s: NodeId,
    t: NodeId,
    params: &RoutingParams,
) -> Result<RouteResult> {
    for node in [s, t] {
        if node >= net.n() {
            return Err(Error::UnknownNode(node));
        }
    }
    match scheme {
        Scheme::GreedyQ1 | Scheme::GreedyQ2 => Ok(route_greedy(net, s, t, params, false)),
        Scheme::LocalAwareness => Ok(route_local_awareness(net, s, t, params)),
        Scheme::NonOblivious => route_non_oblivious(net, s, t, params),
        Scheme::Oblivious => route_oblivious(net, s, t, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{build_network, NetworkConfig};

    fn plain_with_k(n: u32, k: impl Fn(NodeId) -> NodeId) -> SmallWorldNet {
        SmallWorldNet::from_links(NetworkConfig::new(n, 0), (0..n).map(k).collect(), None).unwrap()
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!(matches!(
            "greedy".parse::<Scheme>(),
            Err(Error::UnknownScheme(_))
        ));
    }

    #[test]
    fn default_params() {
        let p = RoutingParams::for_ring(1024);
        assert_eq!(p.awareness_depth, 3);
        assert_eq!(p.hop_cap, 5000);
        assert_eq!(p.c, 1.0);
        assert_eq!(default_awareness_depth(65536), 4);
        assert_eq!(default_awareness_depth(16), 2);
        assert_eq!(default_awareness_depth(8), 1);
        assert!((phase_threshold(65536, 1.0) - 1024.0).abs() < 1e-9);
        assert!(RoutingParams { c: 0.0, ..p }.validate().is_err());
        assert!(p.validate().is_ok());
    }

    #[test]
    fn greedy_step_examples() {
        let far = plain_with_k(1024, |u| if u == 0 { 400 } else { (u + 2) % 1024 });
        assert_eq!(greedy_step(&far, 0, 100, false), 1);
        let near = plain_with_k(1024, |u| if u == 0 { 90 } else { (u + 2) % 1024 });
        assert_eq!(greedy_step(&near, 0, 100, false), 90);
        assert_eq!(greedy_step(&near, 99, 100, false), 100);
    }

    #[test]
    fn greedy_ties_prefer_ring_link() {
        let net = plain_with_k(16, |u| (u + 1) % 16);
        assert_eq!(greedy_step_link(&net, 3, 9, false), (4, LinkKind::Ring));
    }

    #[test]
    fn greedy_self_route_and_backward_links() {
        let net = plain_with_k(64, |u| (u + 63) % 64);
        let p = RoutingParams::for_ring(64);
        let r = route_greedy(&net, 5, 5, &p, false);
        assert_eq!(r.path, vec![5]);
        assert_eq!(r.hops, 0);
        assert!(r.succeeded);
        let r = route_greedy(&net, 10, 40, &p, false);
        assert_eq!(r.hops, 30);
        assert!(r.links.iter().all(|&k| k == LinkKind::Ring));
    }

    #[test]
    fn local_awareness_walks_to_owner() {
        // Node 3 owns a link straight to the target; node 0 sees it within its lg n window.
        let net = plain_with_k(64, |u| if u == 3 { 50 } else { (u + 63) % 64 });
        let p = RoutingParams::for_ring(64);
        let r = route_local_awareness(&net, 0, 50, &p);
        assert_eq!(r.path, vec![0, 1, 2, 3, 50]);
        assert!(r.succeeded);
        let r = route_local_awareness(&net, 7, 7, &p);
        assert_eq!(r.hops, 0);
    }

    #[test]
    fn local_awareness_inside_window_is_monotone() {
        let net = build_network(NetworkConfig::new(256, 4)).unwrap();
        let p = RoutingParams::for_ring(256);
        for s in 0..256 {
            let t = (s + 5) % 256;
            let r = route_local_awareness(&net, s, t, &p);
            assert!(r.succeeded && r.hops <= 5);
            let dists: Vec<u32> = r.path.iter().map(|&v| net.distance(v, t)).collect();
            assert!(dists.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn header_pops_in_path_order() {
        let mut h = MessageHeader::default();
        h.push_path(&[4, 9, 12]);
        assert_eq!(h.len(), 3);
        assert_eq!(h.pop(), Some(4));
        assert_eq!(h.pop(), Some(9));
        assert_eq!(h.pop(), Some(12));
        assert!(h.is_empty());
        h.push_path(&[]);
        assert_eq!(h.pop(), None);
    }

    fn traced_net() -> SmallWorldNet {
        let n = 64;
        let mut al: Vec<[NodeId; 2]> = (0..n).map(|u| [(u + 1) % n, (u + 2) % n]).collect();
        al[0] = [3, 7];
        al[3] = [5, 9];
        al[7] = [9, 12];
        let cfg = NetworkConfig::augmented(n, 0).with_al_span(7);
        let k = (0..n).map(|u| (u + 63) % n).collect();
        SmallWorldNet::from_links(cfg, k, Some(al)).unwrap()
    }

    fn with_k(net: &SmallWorldNet, overrides: &[(NodeId, NodeId)]) -> SmallWorldNet {
        let n = net.n();
        let mut k: Vec<NodeId> = (0..n).map(|u| net.k_neighbors(u)[0]).collect();
        for &(u, v) in overrides {
            k[u as usize] = v;
        }
        let al = (0..n)
            .map(|u| net.al_neighbors(u).try_into().unwrap())
            .collect();
        SmallWorldNet::from_links(*net.config(), k, Some(al)).unwrap()
    }

    #[test]
    fn good_intermediate_selection() {
        let base = traced_net();
        let aw = build_awareness(&base, 0, 2).unwrap();
        // All long-range links point one step backward: nobody qualifies.
        assert_eq!(find_good_intermediate(&aw, &base, 0, 40), None);

        let own = with_k(&base, &[(0, 30)]);
        let aw = build_awareness(&own, 0, 2).unwrap();
        assert_eq!(find_good_intermediate(&aw, &own, 0, 40), Some(0));

        let levels = with_k(&base, &[(12, 38), (7, 35)]);
        let aw = build_awareness(&levels, 0, 2).unwrap();
        assert_eq!(find_good_intermediate(&aw, &levels, 0, 40), Some(7));
        assert_eq!(best_jump_intermediate(&aw, &levels, 40), 12);
    }

    #[test]
    fn non_oblivious_below_threshold_matches_greedy() {
        let net = build_network(NetworkConfig::augmented(4096, 8)).unwrap();
        let p = RoutingParams::for_ring(4096);
        for s in (0..4096).step_by(211) {
            let t = (s + 300) % 4096;
            let a = route_non_oblivious(&net, s, t, &p).unwrap();
            let b = route_greedy(&net, s, t, &p, true);
            assert_eq!(a.path, b.path);
            assert_eq!(a.phase_hops.long_range, 0);
        }
    }

    #[test]
    fn zero_length_push_takes_landing_nodes_link() {
        // Only multiples of 600 own a forward long-range link, so every landing
        // node is its own best intermediate.
        let n = 4096;
        let k: Vec<NodeId> = (0..n)
            .map(|u| {
                if u % 600 == 0 {
                    (u + 600) % n
                } else {
                    (u + n - 1) % n
                }
            })
            .collect();
        let al: Vec<[NodeId; 2]> = (0..n).map(|u| [(u + 1) % n, (u + 1) % n]).collect();
        let cfg = NetworkConfig::augmented(n, 0);
        let net = SmallWorldNet::from_links(cfg, k, Some(al)).unwrap();
        let p = RoutingParams::for_ring(n);
        let r = route_non_oblivious(&net, 0, 3000, &p).unwrap();
        assert!(r.succeeded);
        assert_eq!(r.path, vec![0, 600, 1200, 1800, 2400, 3000]);
        assert!(r.links.iter().all(|&k| k == LinkKind::LongRange));
        assert_eq!(r.phase_hops.long_range, 5);
    }

    #[test]
    fn awareness_schemes_need_al_links() {
        let net = build_network(NetworkConfig::new(64, 0)).unwrap();
        let p = RoutingParams::for_ring(64);
        assert!(matches!(
            route_oblivious(&net, 0, 5, &p),
            Err(Error::NotAugmented)
        ));
        assert!(matches!(
            route_non_oblivious(&net, 0, 5, &p),
            Err(Error::NotAugmented)
        ));
        assert!(matches!(
            route(Scheme::GreedyQ1, &net, 0, 64, &p),
            Err(Error::UnknownNode(64))
        ));
    }

    #[test]
    fn oblivious_self_route() {
        let net = build_network(NetworkConfig::augmented(1024, 0)).unwrap();
        let p = RoutingParams::for_ring(1024);
        let r = route_oblivious(&net, 17, 17, &p).unwrap();
        assert_eq!((r.hops, r.succeeded), (0, true));
    }

    #[test]
    fn hop_cap_reports_failure() {
        let net = plain_with_k(64, |u| (u + 63) % 64);
        let p = RoutingParams {
            hop_cap: 5,
            ..RoutingParams::for_ring(64)
        };
        let r = route_greedy(&net, 0, 30, &p, false);
        assert!(!r.succeeded);
        assert_eq!(r.hops, 5);
        assert_eq!(r.path.len(), 6);
    }
}
