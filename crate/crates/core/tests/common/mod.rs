#![allow(dead_code)]

use std::collections::BTreeMap;

use kswn::netgen::LinkKind;
use kswn::{NodeId, RouteResult, SmallWorldNet};

/// AL-hop distance from `x` to every node reachable within `depth` hops,
/// computed by exhaustive frontier expansion.
pub fn al_distances(net: &SmallWorldNet, x: NodeId, depth: u32) -> BTreeMap<NodeId, u32> {
    let mut dist = BTreeMap::from([(x, 0)]);
    for level in 1..=depth {
        let frontier: Vec<NodeId> = dist
            .iter()
            .filter(|&(_, &d)| d == level - 1)
            .map(|(&v, _)| v)
            .collect();
        for v in frontier {
            for &w in net.al_neighbors(v) {
                dist.entry(w).or_insert(level);
            }
        }
    }
    dist
}

/// Every hop follows a link of the recorded kind, and the path ends at the target iff it succeeded.
pub fn check_trace(net: &SmallWorldNet, r: &RouteResult) {
    assert_eq!(r.path.len(), r.links.len() + 1);
    assert_eq!(r.hops as usize, r.links.len());
    assert_eq!(r.phase_hops.long_range + r.phase_hops.final_phase, r.hops);
    for (w, &kind) in r.path.windows(2).zip(&r.links) {
        let (u, v) = (w[0], w[1]);
        let ok = match kind {
            LinkKind::Ring => net.r_neighbor(u) == v,
            LinkKind::LongRange => net.k_neighbors(u).contains(&v),
            LinkKind::AugmentedLocal => net.al_neighbors(u).contains(&v),
        };
        assert!(ok, "{u} -> {v} is not a {kind} link");
    }
    assert_eq!(r.succeeded, *r.path.last().unwrap() == r.target);
}
