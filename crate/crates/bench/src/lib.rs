//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use trigraph::graph::sample_fixed_edge_graph;
use trigraph::{ChainState, ConstraintSpec, LabeledGraph, ProposalKind, SimRng};

/// Nodes and edges of the reference working point (edge density 0.67).
pub const N: usize = 54;
pub const EDGES: u64 = 959;
/// Triangle cap at triangle density 0.24.
pub const TRIANGLES: u64 = 5953;

/// Uniform graph with the reference edge count.
pub fn reference_graph(seed: u64) -> LabeledGraph {
    sample_fixed_edge_graph(N, EDGES, &mut SimRng::seed_from_u64(seed)).expect("feasible")
}

/// Chain at the reference point, run until it has entered the constraint set.
pub fn reference_chain(kind: ProposalKind, seed: u64) -> ChainState {
    let spec = ConstraintSpec::ExactEdgesTriangleCap { edges: EDGES, triangles: TRIANGLES };
    let mut chain = ChainState::new(reference_graph(seed), spec, kind, seed);
    while !chain.in_constraint() {
        chain.run(10_000);
    }
    chain.run(1_000_000);
    chain
}
