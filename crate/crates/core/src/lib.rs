//! Kleinberg-style small-world rings, their variant with two augmented local
//! (AL) links per node, and decentralized routing over both.
//!
//! * [`netgen`] builds networks from a seed,
//! * [`awareness`] computes bounded-depth AL neighborhoods,
//! * [`routing`] implements greedy, successor-awareness and the two
//!   AL-awareness routing schemes,
//! * [`experiments`] sweeps schemes over ring sizes and seeds,
//! * [`verify`] estimates the probabilistic quantities the schemes rely on,
//! * [`cli`] exposes all of the above on the command line.

pub mod awareness;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod netgen;
pub mod rng;
pub mod routing;
pub mod verify;

pub use awareness::{build_awareness, Awareness};
pub use error::{Error, Result};
pub use experiments::{run_plan, storage_bits, ExperimentPlan, MetricsRow, ParamOverrides};
pub use netgen::{
    build_network, harmonic_cdf_intervals, ring_distance, HarmonicIntervals, LinkKind,
    NetworkConfig, NodeId, SmallWorldNet,
};
pub use routing::{
    route, route_greedy, route_local_awareness, route_non_oblivious, route_oblivious, RouteResult,
    RoutingParams, Scheme,
};
