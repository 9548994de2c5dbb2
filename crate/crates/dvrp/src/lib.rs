//! Solver kit for dynamic capacitated vehicle routing.
//!
//! Requests arrive while vehicles are already on the road. The day is split
//! into time slices; at each slice boundary the dispatcher re-plans everything
//! not yet committed, using one of four strategies: a spanning-forest
//! heuristic, the same heuristic over Monte Carlo samples of the still-unknown
//! requests, a particle swarm over cluster-center assignments, or the sampling
//! phase followed by the swarm phase. A benchmark harness runs the strategies
//! over a reconstructed instance set and reports costs, wall times and how
//! solve time scales with instance size.

pub mod assemble;
pub mod bench;
pub mod cluster;
pub mod io;
pub mod local_search;
pub mod mc;
pub mod model;
pub mod pso;
pub mod sim;
pub mod suite;
