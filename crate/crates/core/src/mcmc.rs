//! Metropolis-Hastings chains on graphs with edge and triangle constraints.
//!
//! A chain is defined by a constraint set, a distance to that set and a
//! proposal kernel. A proposed graph is accepted when it lies in the
//! constraint set or is no farther from it than the current graph; otherwise
//! the chain stays put. Triangle changes are computed from codegrees before
//! anything is mutated, so rejected proposals leave the graph untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sample_fixed_edge_graph, EdgeFlip, LabeledGraph};
use crate::graphon::{a30_from_et, maximize_entropy_bipodal, sample_from_graphon, MultipodalGraphon};
use crate::spectral::lambda2;
use crate::stats::ks_distance;

/// Generator used by every chain; seeded and portable.
pub type SimRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ConstraintSpec {
    /// Exactly `edges` edges and at most `triangles` triangles.
    ExactEdgesTriangleCap { edges: u64, triangles: u64 },
    /// Edge and triangle counts each within `slack` of the targets.
    WindowBox { edges: u64, triangles: u64, slack: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalKind {
    /// Delete a uniform edge, add a uniform non-edge.
    GlobalSwap,
    /// Pick a uniform vertex and rewire one of its edges to one of its
    /// non-neighbours.
    VertexLocalSwap,
    /// Delete, add, or swap, each with probability 1/3.
    AddDeleteOrSwap,
}

impl std::str::FromStr for ProposalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" | "global_swap" | "1" => Ok(Self::GlobalSwap),
            "vertex" | "vertex_local_swap" | "2" => Ok(Self::VertexLocalSwap),
            "add_delete" | "add_delete_or_swap" | "3" => Ok(Self::AddDeleteOrSwap),
            _ => Err(Error::Domain(format!("unknown proposal kind {s:?}"))),
        }
    }
}

/// A proposed change to the current graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Null,
    Delete((usize, usize)),
    Add((usize, usize)),
    Swap(EdgeFlip),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    Rejected,
    Null,
}

impl ConstraintSpec {
    pub fn target_edges(&self) -> u64 {
        match *self {
            Self::ExactEdgesTriangleCap { edges, .. } | Self::WindowBox { edges, .. } => edges,
        }
    }

    pub fn target_triangles(&self) -> u64 {
        match *self {
            Self::ExactEdgesTriangleCap { triangles, .. } | Self::WindowBox { triangles, .. } => {
                triangles
            }
        }
    }

    /// Distance in integer units; `None` stands for infinity.
    #[inline]
    fn distance_counts(&self, e: u64, t: u64) -> Option<u64> {
        match *self {
            Self::ExactEdgesTriangleCap { edges, triangles } => {
                (e == edges).then(|| t.saturating_sub(triangles))
            }
            Self::WindowBox { edges, triangles, slack } => {
                Some((e.abs_diff(edges) + t.abs_diff(triangles)).saturating_sub(2 * slack))
            }
        }
    }

    #[inline]
    fn contains_counts(&self, e: u64, t: u64) -> bool {
        match *self {
            Self::ExactEdgesTriangleCap { edges, triangles } => e == edges && t <= triangles,
            Self::WindowBox { edges, triangles, slack } => {
                e.abs_diff(edges) <= slack && t.abs_diff(triangles) <= slack
            }
        }
    }

    pub fn contains(&self, g: &LabeledGraph) -> bool {
        self.contains_counts(g.edge_count(), g.triangle_count())
    }
}

/// Distance from `g` to the constraint set; infinite when an exact edge
/// constraint is violated.
pub fn distance_to_constraint(g: &LabeledGraph, spec: &ConstraintSpec) -> f64 {
    spec.distance_counts(g.edge_count(), g.triangle_count()).map_or(f64::INFINITY, |d| d as f64)
}

/// Draws a move from the proposal kernel.
pub fn propose<R: Rng + ?Sized>(g: &LabeledGraph, kind: ProposalKind, rng: &mut R) -> Move {
    match kind {
        ProposalKind::GlobalSwap => match (g.random_edge(rng), g.random_non_edge(rng)) {
            (Some(removed), Some(added)) => Move::Swap(EdgeFlip { removed, added }),
            _ => Move::Null,
        },
        ProposalKind::VertexLocalSwap => {
            let v = rng.gen_range(0..g.node_count());
            match (g.random_neighbor(v, rng), g.random_non_neighbor(v, rng)) {
                (Some(u), Some(w)) => Move::Swap(EdgeFlip { removed: (v, u), added: (v, w) }),
                _ => Move::Null,
            }
        }
        ProposalKind::AddDeleteOrSwap => match rng.gen_range(0..3u8) {
            0 => g.random_edge(rng).map_or(Move::Null, Move::Delete),
            1 => g.random_non_edge(rng).map_or(Move::Null, Move::Add),
            _ => match (g.random_edge(rng), g.random_non_edge(rng)) {
                (Some(removed), Some(added)) => Move::Swap(EdgeFlip { removed, added }),
                _ => Move::Null,
            },
        },
    }
}

/// Change in `(E, T)` if `mv` were applied to `g`.
#[inline]
pub fn move_delta(g: &LabeledGraph, mv: &Move) -> (i64, i64) {
    match *mv {
        Move::Null => (0, 0),
        Move::Delete((a, b)) => (-1, -(g.codegree_unchecked(a, b) as i64)),
        Move::Add((a, b)) => (1, g.codegree_unchecked(a, b) as i64),
        Move::Swap(EdgeFlip { removed: (a, b), added: (c, d) }) => {
            let mut dt = g.codegree_unchecked(c, d) as i64 - g.codegree_unchecked(a, b) as i64;
            // Sharing one endpoint: the removed edge took away a common
            // neighbour of the added pair if the two far ends are adjacent.
            let far = if a == c {
                Some((b, d))
            } else if a == d {
                Some((b, c))
            } else if b == c {
                Some((a, d))
            } else if b == d {
                Some((a, c))
            } else {
                None
            };
            if let Some((y, z)) = far {
                if g.has_edge(y, z) {
                    dt -= 1;
                }
            }
            (0, dt)
        }
    }
}

fn apply_move(g: &mut LabeledGraph, mv: &Move) {
    match *mv {
        Move::Null => {}
        Move::Delete((a, b)) | Move::Add((a, b)) => {
            g.flip(a, b);
        }
        Move::Swap(EdgeFlip { removed: (a, b), added: (c, d) }) => {
            g.flip(a, b);
            g.flip(c, d);
        }
    }
}

/// Graph, constraint, kernel, generator and step counters of one chain.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub graph: LabeledGraph,
    pub spec: ConstraintSpec,
    pub kind: ProposalKind,
    pub seed: u64,
    /// Accepted (state-changing or not) steps.
    pub step: u64,
    /// Attempted steps, including null moves.
    pub attempt: u64,
    rng: SimRng,
}

/// Sidecar written next to a checkpointed graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub step: u64,
    pub attempt: u64,
    pub spec: ConstraintSpec,
    pub kind: ProposalKind,
    /// Generator position, as a decimal string (128-bit).
    pub rng_word_pos: String,
}

impl ChainState {
    pub fn new(graph: LabeledGraph, spec: ConstraintSpec, kind: ProposalKind, seed: u64) -> Self {
        Self { graph, spec, kind, seed, step: 0, attempt: 0, rng: SimRng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    pub fn distance(&self) -> f64 {
        distance_to_constraint(&self.graph, &self.spec)
    }

    pub fn in_constraint(&self) -> bool {
        self.spec.contains(&self.graph)
    }

    /// One Metropolis-Hastings update.
    #[inline]
    pub fn mh_step(&mut self) -> StepOutcome {
        self.attempt += 1;
        let mv = propose(&self.graph, self.kind, &mut self.rng);
        if mv == Move::Null {
            return StepOutcome::Null;
        }
        let (e, t) = (self.graph.edge_count(), self.graph.triangle_count());
        let (de, dt) = move_delta(&self.graph, &mv);
        let (e2, t2) = ((e as i64 + de) as u64, (t as i64 + dt) as u64);
        let accept = self.spec.contains_counts(e2, t2) || {
            match (self.spec.distance_counts(e2, t2), self.spec.distance_counts(e, t)) {
                (Some(new), Some(old)) => new <= old,
                (_, None) => true,
                (None, Some(_)) => false,
            }
        };
        if accept {
            apply_move(&mut self.graph, &mv);
            self.step += 1;
            debug_assert_eq!(self.graph.triangle_count(), t2);
            StepOutcome::Accepted
        } else {
            StepOutcome::Rejected
        }
    }

    /// Runs `attempts` attempted steps.
    pub fn run(&mut self, attempts: u64) {
        for _ in 0..attempts {
            self.mh_step();
        }
    }

    /// Runs until `accepted` more steps have been accepted or `max_attempts`
    /// attempts have been made.
    pub fn run_accepted(&mut self, accepted: u64, max_attempts: u64) {
        let target = self.step + accepted;
        let limit = self.attempt + max_attempts;
        while self.step < target && self.attempt < limit {
            self.mh_step();
        }
    }

    /// Sorts the graph's internal pair lists so that a chain reloaded from
    /// the checkpoint continues exactly as this one will.
    pub fn checkpoint(&mut self) -> (LabeledGraph, CheckpointMeta) {
        self.graph = canonical(&self.graph);
        let meta = CheckpointMeta {
            seed: self.seed,
            step: self.step,
            attempt: self.attempt,
            spec: self.spec,
            kind: self.kind,
            rng_word_pos: self.rng.get_word_pos().to_string(),
        };
        (self.graph.clone(), meta)
    }

    pub fn resume(graph: LabeledGraph, meta: &CheckpointMeta) -> Result<Self> {
        let pos: u128 = meta
            .rng_word_pos
            .parse()
            .map_err(|e| Error::Parse { line: 0, msg: format!("rng_word_pos: {e}") })?;
        let mut rng = SimRng::seed_from_u64(meta.seed);
        rng.set_word_pos(pos);
        Ok(Self {
            graph: canonical(&graph),
            spec: meta.spec,
            kind: meta.kind,
            seed: meta.seed,
            step: meta.step,
            attempt: meta.attempt,
            rng,
        })
    }
}

fn canonical(g: &LabeledGraph) -> LabeledGraph {
    let mut es: Vec<_> = g.edges().collect();
    es.sort_unstable();
    let mut out = LabeledGraph::empty(g.node_count()).expect("same size");
    // insert in reverse so the absent-pair list ends up in a fixed order too
    for &(i, j) in es.iter().rev() {
        out.flip(i, j);
    }
    out
}

/// Budget for [`equilibrate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibrationBudget {
    /// Accepted steps to run before inspecting the state.
    pub accepted_steps: u64,
    /// Hard cap on attempts for the main phase.
    pub max_attempts: u64,
    /// Extra attempts allowed for landing exactly on the target counts.
    pub settle_attempts: u64,
}

impl EquilibrationBudget {
    pub fn new(accepted_steps: u64) -> Self {
        Self {
            accepted_steps,
            max_attempts: accepted_steps.saturating_mul(20).max(1000),
            settle_attempts: 10_000,
        }
    }
}

impl Default for EquilibrationBudget {
    fn default() -> Self {
        Self::new(10_000_000)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibrationFailure {
    pub closest_edges: u64,
    pub closest_triangles: u64,
    pub attempts: u64,
}

/// Result of an equilibration attempt.
#[derive(Clone, Debug)]
pub struct Equilibrated {
    pub graph: LabeledGraph,
    pub accepted: u64,
    pub attempts: u64,
}

/// Runs a variant-1/2 chain towards exactly `(edges, triangles)` from `start`
/// and returns the final graph if it sits exactly on the target counts.
/// After the main budget the chain keeps stepping for at most
/// `settle_attempts` until it lands exactly on the target.
pub fn equilibrate_from(
    start: LabeledGraph,
    triangles: u64,
    kind: ProposalKind,
    budget: EquilibrationBudget,
    seed: u64,
) -> std::result::Result<Equilibrated, EquilibrationFailure> {
    let edges = start.edge_count();
    let spec = ConstraintSpec::ExactEdgesTriangleCap { edges, triangles };
    let mut chain = ChainState::new(start, spec, kind, seed);
    let mut closest = (edges, chain.graph.triangle_count());
    let mut track = |g: &LabeledGraph| {
        if g.triangle_count().abs_diff(triangles) < closest.1.abs_diff(triangles) {
            closest = (g.edge_count(), g.triangle_count());
        }
    };
    let limit = budget.max_attempts;
    while chain.step < budget.accepted_steps && chain.attempt < limit {
        chain.mh_step();
        if chain.attempt % 4096 == 0 {
            track(&chain.graph);
        }
    }
    let settle_end = chain.attempt + budget.settle_attempts;
    loop {
        track(&chain.graph);
        if chain.graph.triangle_count() == triangles {
            return Ok(Equilibrated {
                accepted: chain.step,
                attempts: chain.attempt,
                graph: chain.graph,
            });
        }
        if chain.attempt >= settle_end {
            break;
        }
        chain.mh_step();
    }
    Err(EquilibrationFailure {
        closest_edges: closest.0,
        closest_triangles: closest.1,
        attempts: chain.attempt,
    })
}

/// Equilibrates from a uniform graph with exactly `edges` edges.
pub fn equilibrate(
    n: usize,
    edges: u64,
    triangles: u64,
    kind: ProposalKind,
    budget: EquilibrationBudget,
    seed: u64,
) -> Result<std::result::Result<Equilibrated, EquilibrationFailure>> {
    let mut rng = SimRng::seed_from_u64(seed ^ 0x5eed_0f_1417);
    let start = sample_fixed_edge_graph(n, edges, &mut rng)?;
    Ok(equilibrate_from(start, triangles, kind, budget, seed))
}

/// Initial distribution of a convergence-check chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    UniformFixedEdges,
    Bipodal,
    Tripodal,
}

/// Starting graph with exactly `edges` edges drawn from the given family. For
/// the graphon families a graphon sample is taken and then edges are added or
/// removed uniformly at random to hit the edge count.
pub fn initial_graph<R: Rng + ?Sized>(
    init: InitKind,
    n: usize,
    edges: u64,
    triangles: u64,
    rng: &mut R,
) -> Result<LabeledGraph> {
    let e = edges as f64 / crate::graph::pairs(n) as f64;
    let t = triangles as f64 / crate::graph::triples(n) as f64;
    let graphon = match init {
        InitKind::UniformFixedEdges => return sample_fixed_edge_graph(n, edges, rng),
        InitKind::Tripodal => {
            let (a, b) = a30_from_et(e, t)?;
            MultipodalGraphon::a30(a, b)?
        }
        InitKind::Bipodal => {
            // the B(1,1) optimum only exists above the bipodal floor; fall
            // back to the nearest feasible triangle density
            let floor = crate::graphon::min_triangle_bipodal_er(e)?;
            let tb = t.max(floor + 2e-3).min(e * e * e);
            maximize_entropy_bipodal(e, tb)?
        }
    };
    let (mut g, _) = sample_from_graphon(&graphon, n, rng)?;
    while g.edge_count() > edges {
        let (a, b) = g.random_edge(rng).expect("nonempty");
        g.flip(a, b);
    }
    while g.edge_count() < edges {
        let (a, b) = g.random_non_edge(rng).expect("not complete");
        g.flip(a, b);
    }
    Ok(g)
}

/// Settings for [`convergence_check`].
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceConfig {
    pub chains_per_init: usize,
    /// Accepted steps before the first sample.
    pub burn_in: u64,
    pub samples_per_chain: usize,
    /// Accepted steps between samples.
    pub spacing: u64,
    pub ks_threshold: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            chains_per_init: 4,
            burn_in: 10_000_000,
            samples_per_chain: 50,
            spacing: 100_000,
            ks_threshold: 0.15,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub inits: [InitKind; 3],
    pub samples: [Vec<f64>; 3],
    /// KS distances for the pairs (0,1), (0,2), (1,2).
    pub ks: [f64; 3],
    pub failed_chains: Vec<(InitKind, usize, String)>,
    pub pass: bool,
}

/// Runs chains from the three initial families and compares their λ₂
/// samples pairwise with the two-sample KS statistic.
pub fn convergence_check(
    n: usize,
    edges: u64,
    triangles: u64,
    kind: ProposalKind,
    cfg: ConvergenceConfig,
    seed: u64,
) -> Result<ConvergenceReport> {
    let inits = [InitKind::UniformFixedEdges, InitKind::Bipodal, InitKind::Tripodal];
    let mut samples: [Vec<f64>; 3] = Default::default();
    let mut failed = Vec::new();
    for (slot, &init) in inits.iter().enumerate() {
        for c in 0..cfg.chains_per_init {
            let chain_seed = seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add((slot * 1_000_003 + c) as u64);
            let mut rng = SimRng::seed_from_u64(chain_seed ^ 0xa11c);
            let start = initial_graph(init, n, edges, triangles, &mut rng)?;
            let spec = ConstraintSpec::ExactEdgesTriangleCap { edges, triangles };
            let mut chain = ChainState::new(start, spec, kind, chain_seed);
            chain.run_accepted(cfg.burn_in, cfg.burn_in.saturating_mul(20));
            let mut taken = 0;
            let mut guard = 0u64;
            while taken < cfg.samples_per_chain {
                chain.run_accepted(cfg.spacing, cfg.spacing.saturating_mul(20));
                guard += 1;
                if chain.graph.triangle_count() == triangles {
                    samples[slot].push(lambda2(&chain.graph)?);
                    taken += 1;
                } else if guard > 20 * cfg.samples_per_chain as u64 {
                    failed.push((
                        init,
                        c,
                        format!("stuck at T = {}", chain.graph.triangle_count()),
                    ));
                    break;
                }
            }
        }
    }
    let ks = [
        pair_ks(&samples[0], &samples[1]),
        pair_ks(&samples[0], &samples[2]),
        pair_ks(&samples[1], &samples[2]),
    ];
    let pass = failed.is_empty() && ks.iter().all(|&d| d < cfg.ks_threshold);
    Ok(ConvergenceReport { inits, samples, ks, failed_chains: failed, pass })
}

fn pair_ks(a: &[f64], b: &[f64]) -> f64 {
    ks_distance(a, b).unwrap_or(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::pairs;
    use std::collections::HashMap;

    #[test]
    fn distance_examples() {
        let k4 = LabeledGraph::complete(4).unwrap();
        let spec = ConstraintSpec::ExactEdgesTriangleCap { edges: 6, triangles: 4 };
        assert_eq!(distance_to_constraint(&k4, &spec), 0.0);
        let tight = ConstraintSpec::ExactEdgesTriangleCap { edges: 6, triangles: 0 };
        assert_eq!(distance_to_constraint(&k4, &tight), 4.0);
        let wrong_e = ConstraintSpec::ExactEdgesTriangleCap { edges: 5, triangles: 4 };
        assert!(distance_to_constraint(&k4, &wrong_e).is_infinite());

        let win = ConstraintSpec::WindowBox { edges: 10, triangles: 20, slack: 5 };
        assert_eq!(win.distance_counts(13, 29), Some(2));
        assert_eq!(win.distance_counts(13, 20), Some(0));
        assert!(!win.contains_counts(16, 20));
        assert!(win.contains_counts(15, 25));
    }

    #[test]
    fn cap_distance_seven() {
        let mut rng = SimRng::seed_from_u64(1);
        let g = sample_fixed_edge_graph(12, 40, &mut rng).unwrap();
        let t = g.triangle_count();
        let spec = ConstraintSpec::ExactEdgesTriangleCap { edges: 40, triangles: t - 7 };
        assert_eq!(distance_to_constraint(&g, &spec), 7.0);
    }

    #[test]
    fn move_delta_matches_application() {
        let mut rng = SimRng::seed_from_u64(2);
        for kind in [ProposalKind::GlobalSwap, ProposalKind::VertexLocalSwap, ProposalKind::AddDeleteOrSwap] {
            let mut g = sample_fixed_edge_graph(20, 120, &mut rng).unwrap();
            for _ in 0..3000 {
                let mv = propose(&g, kind, &mut rng);
                let (de, dt) = move_delta(&g, &mv);
                let (e, t) = (g.edge_count() as i64, g.triangle_count() as i64);
                apply_move(&mut g, &mv);
                assert_eq!(g.edge_count() as i64, e + de);
                assert_eq!(g.triangle_count() as i64, t + dt);
                assert_eq!(g.triangle_count(), g.recount_triangles());
            }
        }
    }

    #[test]
    fn global_swap_preserves_edges() {
        let mut rng = SimRng::seed_from_u64(3);
        let path = LabeledGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        for _ in 0..100 {
            let mv = propose(&path, ProposalKind::GlobalSwap, &mut rng);
            let mut g = path.clone();
            apply_move(&mut g, &mv);
            assert_eq!(g.edge_count(), 2);
        }
    }

    #[test]
    fn vertex_swap_preserves_pivot_degree() {
        let mut rng = SimRng::seed_from_u64(4);
        let g = sample_fixed_edge_graph(15, 50, &mut rng).unwrap();
        for _ in 0..500 {
            if let Move::Swap(f) = propose(&g, ProposalKind::VertexLocalSwap, &mut rng) {
                let v = f.removed.0;
                assert_eq!(f.added.0, v);
                let mut h = g.clone();
                apply_move(&mut h, &Move::Swap(f));
                assert_eq!(h.degree(v), g.degree(v));
            }
        }
    }

    #[test]
    fn degenerate_proposals_are_null() {
        let mut rng = SimRng::seed_from_u64(5);
        let empty = LabeledGraph::empty(5).unwrap();
        let full = LabeledGraph::complete(5).unwrap();
        for kind in [ProposalKind::GlobalSwap, ProposalKind::VertexLocalSwap] {
            assert_eq!(propose(&empty, kind, &mut rng), Move::Null);
            assert_eq!(propose(&full, kind, &mut rng), Move::Null);
        }
        let spec = ConstraintSpec::ExactEdgesTriangleCap { edges: 10, triangles: 10 };
        let mut chain = ChainState::new(full.clone(), spec, ProposalKind::GlobalSwap, 1);
        assert_eq!(chain.mh_step(), StepOutcome::Null);
        assert_eq!((chain.step, chain.attempt), (0, 1));
    }

    #[test]
    fn global_swap_is_uniform_over_pairs() {
        // 6 nodes, 5 edges: 5 * 10 = 50 (edge, non-edge) combinations
        let mut rng = SimRng::seed_from_u64(6);
        let g = LabeledGraph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 5)]).unwrap();
        let draws = 100_000;
        let mut freq: HashMap<(usize, usize, usize, usize), u32> = HashMap::new();
        for _ in 0..draws {
            if let Move::Swap(f) = propose(&g, ProposalKind::GlobalSwap, &mut rng) {
                *freq.entry((f.removed.0, f.removed.1, f.added.0, f.added.1)).or_default() += 1;
            }
        }
        let cells = 5 * (pairs(6) as usize - 5);
        assert_eq!(freq.len(), cells);
        let p = 1.0 / cells as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in freq.values() {
            assert!((c as f64 - draws as f64 * p).abs() < 4.0 * sigma, "{c}");
        }
    }

    #[test]
    fn acceptance_rule_cases() {
        // K4 minus an edge: T = 2. Inside the cap every swap stays inside.
        let g = LabeledGraph::from_edges(5, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let t = g.triangle_count();
        let roomy = ConstraintSpec::ExactEdgesTriangleCap { edges: 5, triangles: 10 };
        let mut c = ChainState::new(g.clone(), roomy, ProposalKind::GlobalSwap, 7);
        for _ in 0..50 {
            assert_eq!(c.mh_step(), StepOutcome::Accepted);
        }
        // At the cap with a strictly triangle-free target, no move may raise T.
        let zero = ConstraintSpec::ExactEdgesTriangleCap { edges: 5, triangles: 0 };
        let mut c = ChainState::new(g, zero, ProposalKind::GlobalSwap, 8);
        let mut last = c.distance();
        for _ in 0..500 {
            c.mh_step();
            assert!(c.distance() <= last);
            last = c.distance();
        }
        assert!(t > 0);
    }

    #[test]
    fn equal_distance_is_accepted() {
        // A swap keeping T unchanged outside the cap must be accepted.
        let spec = ConstraintSpec::ExactEdgesTriangleCap { edges: 0, triangles: 0 };
        assert_eq!(spec.distance_counts(0, 5), Some(5));
        let g = LabeledGraph::from_edges(
            8,
            [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (6, 7)],
        )
        .unwrap();
        let spec = ConstraintSpec::ExactEdgesTriangleCap { edges: 7, triangles: 0 };
        let mut c = ChainState::new(g, spec, ProposalKind::GlobalSwap, 9);
        let mut equal_moves = 0;
        for _ in 0..2000 {
            let before = c.distance();
            let t0 = c.graph.triangle_count();
            if c.mh_step() == StepOutcome::Accepted && c.distance() == before && before > 0.0 {
                equal_moves += 1;
            }
            assert!(c.graph.triangle_count() <= t0);
        }
        assert!(equal_moves > 0);
    }

    #[test]
    fn forced_equilibration() {
        let out = equilibrate(5, 10, 10, ProposalKind::GlobalSwap, EquilibrationBudget::new(100), 1)
            .unwrap()
            .unwrap();
        assert_eq!(out.graph, LabeledGraph::complete(5).unwrap());
    }

    #[test]
    fn impossible_target_reports_closest() {
        // 5 nodes, 10 edges forces 10 triangles; a cap of 3 is unreachable
        let err = equilibrate(5, 10, 3, ProposalKind::GlobalSwap, EquilibrationBudget::new(100), 1)
            .unwrap()
            .unwrap_err();
        assert_eq!((err.closest_edges, err.closest_triangles), (10, 10));
    }

    #[test]
    fn checkpoint_resume_is_exact() {
        let mut rng = SimRng::seed_from_u64(10);
        let g = sample_fixed_edge_graph(30, 290, &mut rng).unwrap();
        let t = g.triangle_count() * 9 / 10;
        let spec = ConstraintSpec::ExactEdgesTriangleCap { edges: 290, triangles: t };
        let mut a = ChainState::new(g, spec, ProposalKind::GlobalSwap, 77);
        a.run(5000);
        let (graph, meta) = a.checkpoint();
        let mut text = Vec::new();
        graph.write_edge_list(&mut text).unwrap();
        let json = serde_json::to_string(&meta).unwrap();
        let reloaded = LabeledGraph::read_edge_list(&text[..]).unwrap();
        let meta2: CheckpointMeta = serde_json::from_str(&json).unwrap();
        let mut b = ChainState::resume(reloaded, &meta2).unwrap();
        a.run(5000);
        b.run(5000);
        assert_eq!(a.graph, b.graph);
        assert_eq!((a.step, a.attempt), (b.step, b.attempt));
    }

    #[test]
    fn proposal_kind_parsing() {
        assert_eq!("global".parse::<ProposalKind>().unwrap(), ProposalKind::GlobalSwap);
        assert_eq!("2".parse::<ProposalKind>().unwrap(), ProposalKind::VertexLocalSwap);
        assert!("nope".parse::<ProposalKind>().is_err());
    }
}
