//! Quenches across the transition and their three-stage analysis.
//!
//! A quench starts from a graph equilibrated at one triangle count and runs
//! the exact-edges/triangle-cap chain with a new target. Stage 1 ends when the
//! new target first constrains the dynamics; stage 2 ends where a fitted
//! "sloped line, then horizontal line" model switches to the horizontal part.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{triples, LabeledGraph};
use crate::mcmc::{ChainState, ConstraintSpec, ProposalKind, StepOutcome};
use crate::spectral::{embedding, lambda2, NodeEmbedding};
use crate::stats::{fit_gamma, GammaFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
}

/// What advances the trajectory clock.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepClock {
    /// Every proposal, accepted or not.
    Attempted,
    /// Only accepted proposals.
    #[default]
    Accepted,
}

impl std::str::FromStr for StepClock {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attempted" => Ok(Self::Attempted),
            "accepted" => Ok(Self::Accepted),
            other => Err(Error::Domain(format!("unknown step clock {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchProtocol {
    pub n: usize,
    pub edges: u64,
    pub t_source: u64,
    pub t_target: u64,
    pub kind: ProposalKind,
    /// Run length on the `clock`.
    pub total_steps: u64,
    #[serde(default)]
    pub clock: StepClock,
    pub record_every: u64,
    /// Embedding snapshot cadence; 0 disables snapshots.
    pub embed_every: u64,
    pub seed: u64,
}

impl QuenchProtocol {
    pub fn direction(&self) -> Direction {
        if self.t_target >= self.t_source {
            Direction::Up
        } else {
            Direction::Down
        }
    }

    fn validate(&self) -> Result<()> {
        if self.record_every == 0 {
            return Err(Error::Domain("record_every must be at least 1".into()));
        }
        if self.t_target > triples(self.n) {
            return Err(Error::ConstraintInfeasible(format!(
                "target of {} triangles on {} nodes",
                self.t_target, self.n
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: u64,
    /// Attempted proposals so far.
    pub attempt: u64,
    #[serde(rename = "T")]
    pub triangles: u64,
    pub lambda2: f64,
    pub two_ear: u64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub protocol: QuenchProtocol,
    pub records: Vec<TrajectoryRecord>,
    pub embeddings: Vec<(u64, NodeEmbedding)>,
    /// Step whose proposal was first rejected while the chain sat inside the
    /// constraint set, i.e. rejected only because of the triangle cap.
    pub first_cap_rejection: Option<u64>,
    /// First step at which `T == t_target` (up) or `T <= t_target` (down).
    pub first_on_target: Option<u64>,
    /// The attempt budget ran out before `total_steps` accepted steps.
    pub truncated: bool,
    pub final_graph: LabeledGraph,
}

/// Runs a quench from `start` (which must have exactly `proto.edges` edges).
pub fn run_quench(start: LabeledGraph, proto: &QuenchProtocol) -> Result<Trajectory> {
    proto.validate()?;
    if start.edge_count() != proto.edges || start.node_count() != proto.n {
        return Err(Error::InvalidGraph(format!(
            "start graph has n={} E={}, protocol wants n={} E={}",
            start.node_count(),
            start.edge_count(),
            proto.n,
            proto.edges
        )));
    }
    let spec = ConstraintSpec::ExactEdgesTriangleCap {
        edges: proto.edges,
        triangles: proto.t_target,
    };
    let up = proto.direction() == Direction::Up;
    let on_target = |t: u64| if up { t == proto.t_target } else { t <= proto.t_target };

    let mut chain = ChainState::new(start, spec, proto.kind, proto.seed);
    let mut records = Vec::with_capacity((proto.total_steps / proto.record_every + 1) as usize);
    let mut embeddings = Vec::new();
    let mut first_cap_rejection = None;
    let mut first_on_target = on_target(chain.graph.triangle_count()).then_some(0);

    let mut record = |chain: &ChainState, step: u64| -> Result<()> {
        records.push(TrajectoryRecord {
            step,
            attempt: chain.attempt,
            triangles: chain.graph.triangle_count(),
            lambda2: lambda2(&chain.graph)?,
            two_ear: chain.graph.two_ear_count(),
        });
        if proto.embed_every > 0 && step % proto.embed_every == 0 {
            embeddings.push((step, embedding(&chain.graph)?));
        }
        Ok(())
    };
    record(&chain, 0)?;
    // guards the accepted clock against chains that cannot move
    let attempt_budget = proto.total_steps.saturating_mul(1000).max(1_000_000);
    let mut step = 0;
    let mut truncated = false;
    while step < proto.total_steps {
        if chain.attempt >= attempt_budget {
            truncated = true;
            break;
        }
        let inside = first_cap_rejection.is_none() && chain.in_constraint();
        let outcome = chain.mh_step();
        if inside && outcome == StepOutcome::Rejected {
            first_cap_rejection = Some(step + 1);
        }
        if proto.clock == StepClock::Accepted && outcome != StepOutcome::Accepted {
            continue;
        }
        step += 1;
        if first_on_target.is_none() && on_target(chain.graph.triangle_count()) {
            first_on_target = Some(step);
        }
        if step % proto.record_every == 0 {
            record(&chain, step)?;
        }
    }
    Ok(Trajectory {
        protocol: proto.clone(),
        records,
        embeddings,
        first_cap_rejection,
        first_on_target,
        truncated,
        final_graph: chain.graph,
    })
}

/// Non-overlapping block means; a trailing partial block is averaged on its
/// own. A window longer than the series gives one block.
pub fn smooth(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::Domain("smoothing window must be at least 1".into()));
    }
    Ok(series.chunks(window).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect())
}

/// Block means of `(step, value)` points, indexed by the mean step of each
/// block.
pub fn smooth_points(points: &[(f64, f64)], window: usize) -> Result<Vec<(f64, f64)>> {
    if window == 0 {
        return Err(Error::Domain("smoothing window must be at least 1".into()));
    }
    Ok(points
        .chunks(window)
        .map(|c| {
            let k = c.len() as f64;
            (c.iter().map(|p| p.0).sum::<f64>() / k, c.iter().map(|p| p.1).sum::<f64>() / k)
        })
        .collect())
}

/// Centered moving average (same length as the input, window shrinks at the
/// ends).
pub fn smooth_sliding(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::Domain("smoothing window must be at least 1".into()));
    }
    let n = series.len();
    let mut prefix = vec![0.0; n + 1];
    for (i, x) in series.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
    }
    let half = window / 2;
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (lo + window).min(n);
            let lo = hi.saturating_sub(window).min(lo);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect())
}

/// Step at which stage 1 ends, or `None` if the target was never reached.
pub fn detect_stage1_end(traj: &Trajectory) -> Option<u64> {
    let p = &traj.protocol;
    if p.t_source == p.t_target {
        return Some(0);
    }
    match p.direction() {
        Direction::Down => traj.first_on_target,
        Direction::Up => traj.first_cap_rejection.or(traj.first_on_target),
    }
}

/// Line on `[start, breakpoint)` followed by a constant on
/// `[breakpoint, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFit {
    pub breakpoint: f64,
    pub slope: f64,
    /// Line value at step 0.
    pub intercept: f64,
    pub plateau: f64,
    pub sse: f64,
    /// Plateau minus the line's value at the breakpoint.
    pub discontinuity: f64,
}

#[derive(Clone, Copy, Default)]
struct Sums {
    n: f64,
    x: f64,
    y: f64,
    xx: f64,
    xy: f64,
    yy: f64,
}

impl Sums {
    fn add(mut self, x: f64, y: f64) -> Self {
        self.n += 1.0;
        self.x += x;
        self.y += y;
        self.xx += x * x;
        self.xy += x * y;
        self.yy += y * y;
        self
    }

    fn minus(&self, o: &Sums) -> Sums {
        Sums {
            n: self.n - o.n,
            x: self.x - o.x,
            y: self.y - o.y,
            xx: self.xx - o.xx,
            xy: self.xy - o.xy,
            yy: self.yy - o.yy,
        }
    }

    fn syy(&self) -> f64 {
        if self.n == 0.0 {
            0.0
        } else {
            (self.yy - self.y * self.y / self.n).max(0.0)
        }
    }

    /// `(slope, intercept, sse)` of the OLS line.
    fn line(&self) -> (f64, f64, f64) {
        if self.n == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let sxx = self.xx - self.x * self.x / self.n;
        if self.n < 2.0 || sxx <= 0.0 {
            return (0.0, self.y / self.n, self.syy());
        }
        let sxy = self.xy - self.x * self.y / self.n;
        let slope = sxy / sxx;
        let intercept = (self.y - slope * self.x) / self.n;
        (slope, intercept, (self.syy() - slope * sxy).max(0.0))
    }
}

/// Exhaustive breakpoint scan over the points with `start <= step <= end`.
pub fn fit_piecewise(points: &[(f64, f64)], start: f64, end: f64) -> Result<PiecewiseFit> {
    let win: Vec<(f64, f64)> =
        points.iter().copied().filter(|&(s, _)| s >= start && s <= end).collect();
    if win.len() < 10 {
        return Err(Error::Domain(format!(
            "piecewise fit needs at least 10 points in [{start}, {end}], got {}",
            win.len()
        )));
    }
    let m = win.len();
    // centre both axes for conditioning
    let (cx, cy) = (
        win.iter().map(|p| p.0).sum::<f64>() / m as f64,
        win.iter().map(|p| p.1).sum::<f64>() / m as f64,
    );
    let mut prefix = vec![Sums::default(); m + 1];
    for (i, &(x, y)) in win.iter().enumerate() {
        prefix[i + 1] = prefix[i].add(x - cx, y - cy);
    }
    let total = prefix[m];
    let tol = 1e-12 * (1.0 + total.syy());
    let mut best: Option<(f64, usize)> = None;
    for k in 0..m {
        let (_, _, sse_line) = prefix[k].line();
        let sse = sse_line + total.minus(&prefix[k]).syy();
        if best.map_or(true, |(b, _)| sse < b - tol) {
            best = Some((sse, k));
        }
    }
    let (sse, k) = best.unwrap();
    let flat = total.minus(&prefix[k]);
    let plateau = flat.y / flat.n + cy;
    let bx = win[k].0;
    let (slope, icpt_c, _) = if k == 0 { (0.0, plateau - cy, 0.0) } else { prefix[k].line() };
    // line in original coordinates: y = slope * x + intercept
    let intercept = icpt_c + cy - slope * cx;
    Ok(PiecewiseFit {
        breakpoint: bx,
        slope,
        intercept,
        plateau,
        sse,
        discontinuity: plateau - (slope * bx + intercept),
    })
}

/// Which λ₂ series the stage-2 fit uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    /// Block-smoothing window (in records) applied before fitting; 1 = raw.
    pub smooth_window: usize,
    /// Fit horizon in steps.
    pub horizon: u64,
}

impl SegmentationConfig {
    pub fn for_direction(d: Direction) -> Self {
        match d {
            Direction::Up => Self { smooth_window: 1, horizon: 10_000 },
            Direction::Down => Self { smooth_window: 100, horizon: 10_000 },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSegmentation {
    pub stage1_end: u64,
    pub stage2_end: u64,
    pub fit: PiecewiseFit,
}

impl StageSegmentation {
    pub fn stage2_length(&self) -> u64 {
        self.stage2_end - self.stage1_end
    }
}

/// JSON shape of a segmentation result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub stage1_end: u64,
    pub stage2_end: u64,
    pub slope: f64,
    pub plateau: f64,
    pub sse: f64,
    pub discontinuity: f64,
}

impl From<&StageSegmentation> for SegmentationReport {
    fn from(s: &StageSegmentation) -> Self {
        Self {
            stage1_end: s.stage1_end,
            stage2_end: s.stage2_end,
            slope: s.fit.slope,
            plateau: s.fit.plateau,
            sse: s.fit.sse,
            discontinuity: s.fit.discontinuity,
        }
    }
}

/// Stage-1 detection plus the piecewise fit of λ₂ after it.
pub fn segment(traj: &Trajectory, cfg: SegmentationConfig) -> Result<StageSegmentation> {
    let stage1_end = detect_stage1_end(traj)
        .ok_or_else(|| Error::Domain("not nucleated: target never reached".into()))?;
    let raw: Vec<(f64, f64)> =
        traj.records.iter().map(|r| (r.step as f64, r.lambda2)).collect();
    let points = smooth_points(&raw, cfg.smooth_window)?;
    let fit = fit_piecewise(&points, stage1_end as f64, cfg.horizon as f64)?;
    let stage2_end = (fit.breakpoint.round() as u64).max(stage1_end);
    Ok(StageSegmentation { stage1_end, stage2_end, fit })
}

/// One run of an ensemble; `segmentation` is `Err` when that run failed.
#[derive(Clone, Debug)]
pub struct EnsembleRun {
    pub seed: u64,
    pub segmentation: std::result::Result<StageSegmentation, String>,
    pub final_lambda2: f64,
}

#[derive(Clone, Debug)]
pub struct EnsembleResult {
    pub runs: Vec<EnsembleRun>,
}

impl EnsembleResult {
    fn ok(&self) -> impl Iterator<Item = &StageSegmentation> {
        self.runs.iter().filter_map(|r| r.segmentation.as_ref().ok())
    }

    pub fn stage1_lengths(&self) -> Vec<u64> {
        self.ok().map(|s| s.stage1_end).collect()
    }

    pub fn stage2_lengths(&self) -> Vec<u64> {
        self.ok().map(|s| s.stage2_length()).collect()
    }

    /// Plateau of the fitted horizontal line per successful run.
    pub fn plateaus(&self) -> Vec<f64> {
        self.ok().map(|s| s.fit.plateau).collect()
    }

    /// Gamma fit of the stage-2 lengths (zero lengths are dropped).
    pub fn stage2_gamma(&self) -> Result<GammaFit> {
        let xs: Vec<f64> =
            self.stage2_lengths().into_iter().filter(|&l| l > 0).map(|l| l as f64).collect();
        fit_gamma(&xs)
    }
}

/// Runs `runs` quenches; run `i` starts from `starts[i % starts.len()]` with
/// seed `proto.seed + i`.
pub fn stage_length_ensemble(
    starts: &[LabeledGraph],
    proto: &QuenchProtocol,
    runs: usize,
    cfg: SegmentationConfig,
) -> Result<EnsembleResult> {
    if runs < 2 || starts.is_empty() {
        return Err(Error::Domain("an ensemble needs at least 2 runs and a start graph".into()));
    }
    let mut out = Vec::with_capacity(runs);
    for i in 0..runs {
        let p = QuenchProtocol { seed: proto.seed.wrapping_add(i as u64), ..proto.clone() };
        let (segmentation, final_lambda2) = match run_quench(starts[i % starts.len()].clone(), &p)
        {
            Ok(traj) => (
                segment(&traj, cfg).map_err(|e| e.to_string()),
                traj.records.last().map_or(f64::NAN, |r| r.lambda2),
            ),
            Err(e) => (Err(e.to_string()), f64::NAN),
        };
        out.push(EnsembleRun { seed: p.seed, segmentation, final_lambda2 });
    }
    Ok(EnsembleResult { runs: out })
}

/// A jump in smoothed λ₂ between adjacent windows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MigrationEvent {
    /// Step at the start of the later window.
    pub step: u64,
    pub lambda2_jump: f64,
    pub two_ear_change: f64,
    /// `true` when the two-ear count moved opposite to λ₂.
    pub anti_correlated: bool,
}

/// Flags adjacent smoothing windows whose mean λ₂ differs by more than
/// `threshold`.
pub fn stage3_event_scan(
    traj: &Trajectory,
    window: usize,
    threshold: f64,
) -> Result<Vec<MigrationEvent>> {
    let lam: Vec<f64> = traj.records.iter().map(|r| r.lambda2).collect();
    let ears: Vec<f64> = traj.records.iter().map(|r| r.two_ear as f64).collect();
    let starts: Vec<u64> = traj.records.chunks(window.max(1)).map(|c| c[0].step).collect();
    Ok(scan_jumps(&smooth(&lam, window)?, &smooth(&ears, window)?, &starts, threshold))
}

fn scan_jumps(lam: &[f64], ears: &[f64], starts: &[u64], threshold: f64) -> Vec<MigrationEvent> {
    (1..lam.len())
        .filter_map(|i| {
            let jump = lam[i] - lam[i - 1];
            (jump.abs() > threshold).then(|| {
                let de = ears[i] - ears[i - 1];
                MigrationEvent {
                    step: starts[i],
                    lambda2_jump: jump,
                    two_ear_change: de,
                    anti_correlated: jump * de < 0.0,
                }
            })
        })
        .collect()
}

/// Pode sizes (descending) of every embedding snapshot, clustered into `k`
/// podes.
pub fn pode_size_sequence(traj: &Trajectory, k: usize, seed: u64) -> Result<Vec<(u64, Vec<usize>)>> {
    use rand::SeedableRng;
    let mut rng = crate::mcmc::SimRng::seed_from_u64(seed);
    traj.embeddings
        .iter()
        .map(|(step, emb)| {
            let mut sizes = crate::spectral::assign_podes(emb, k, &mut rng)?.sizes();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            Ok((*step, sizes))
        })
        .collect()
}

/// `step,T,lambda2,two_ear,attempt` CSV.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    writeln!(w, "step,T,lambda2,two_ear,attempt")?;
    for r in &traj.records {
        writeln!(w, "{},{},{:.10},{},{}", r.step, r.triangles, r.lambda2, r.two_ear, r.attempt)?;
    }
    Ok(())
}
