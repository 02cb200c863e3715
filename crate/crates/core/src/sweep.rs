//! Equilibrium λ₂ sweeps over triangle density, node count and edge density.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pairs, triples, LabeledGraph};
use crate::mcmc::{equilibrate, ChainState, ConstraintSpec, EquilibrationBudget, ProposalKind};
use crate::spectral::lambda2;

/// Rounds densities to the integer targets the chain uses.
pub fn counts_from_densities(n: usize, e: f64, t: f64) -> Result<(u64, u64)> {
    if !(0.0..=1.0).contains(&e) || !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("densities ({e}, {t}) outside [0, 1]")));
    }
    Ok(((e * pairs(n) as f64).round() as u64, (t * triples(n) as f64).round() as u64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kind: ProposalKind,
    /// Independent chains per cell; samples are spread evenly over them.
    pub chains: usize,
    /// Accepted steps of initial equilibration per chain.
    pub burn_in: u64,
    /// Accepted steps between recorded samples of one chain.
    pub spacing: u64,
    /// Attempts allowed for landing exactly on the target after each spacing.
    pub settle_attempts: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            kind: ProposalKind::GlobalSwap,
            chains: 4,
            burn_in: 10_000_000,
            spacing: 1_000_000,
            settle_attempts: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub n: usize,
    pub e: f64,
    pub t: f64,
    pub edges: u64,
    pub triangles: u64,
    pub samples: Vec<f64>,
    /// Chains or samples that never landed exactly on the target.
    pub failures: usize,
}

impl SweepCell {
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Unbiased sample variance; NaN below two samples.
    pub fn variance(&self) -> f64 {
        let k = self.samples.len();
        if k < 2 {
            return f64::NAN;
        }
        let m = self.mean();
        self.samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (k - 1) as f64
    }
}

/// Graphs with exactly `(edges, triangles)`, drawn from `cfg.chains`
/// independent chains at `cfg.spacing` accepted steps apart. Returns the
/// graphs and the number of chains or draws that missed the target.
pub fn sample_graphs(
    n: usize,
    edges: u64,
    triangles: u64,
    count: usize,
    cfg: &SweepConfig,
    seed: u64,
) -> Result<(Vec<LabeledGraph>, usize)> {
    if count == 0 || cfg.chains == 0 {
        return Err(Error::Domain("need at least one sample and one chain".into()));
    }
    let mut out = Vec::with_capacity(count);
    let mut failures = 0;
    let chains = cfg.chains.min(count);
    for c in 0..chains {
        let quota = count / chains + usize::from(c < count % chains);
        let chain_seed = seed.wrapping_add(c as u64 * 0x9e37_79b9);
        let budget =
            EquilibrationBudget { settle_attempts: cfg.settle_attempts, ..EquilibrationBudget::new(cfg.burn_in) };
        let eq = match equilibrate(n, edges, triangles, cfg.kind, budget, chain_seed)? {
            Ok(eq) => eq,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let spec = ConstraintSpec::ExactEdgesTriangleCap { edges, triangles };
        let mut chain = ChainState::new(eq.graph, spec, cfg.kind, chain_seed ^ 0xa5a5);
        for k in 0..quota {
            if k > 0 {
                chain.run_accepted(cfg.spacing, cfg.spacing.saturating_mul(20).max(1000));
            }
            let mut left = cfg.settle_attempts;
            while chain.graph.triangle_count() != triangles && left > 0 {
                chain.mh_step();
                left -= 1;
            }
            if chain.graph.triangle_count() == triangles {
                out.push(chain.graph.clone());
            } else {
                failures += 1;
            }
        }
    }
    Ok((out, failures))
}

/// Draws `samples` λ₂ values of graphs with exactly the target counts.
pub fn sample_cell(n: usize, e: f64, t: f64, samples: usize, cfg: &SweepConfig, seed: u64) -> Result<SweepCell> {
    let (edges, triangles) = counts_from_densities(n, e, t)?;
    let (graphs, failures) = sample_graphs(n, edges, triangles, samples, cfg, seed)?;
    let samples = graphs.iter().map(lambda2).collect::<Result<Vec<f64>>>()?;
    Ok(SweepCell { n, e, t, edges, triangles, samples, failures })
}

/// λ₂ samples for every `(n, t)` pair at fixed `e`. Cells that fail outright
/// are reported in the second vector and the sweep continues.
pub fn sweep_lambda2(
    ns: &[usize],
    e: f64,
    ts: &[f64],
    samples: usize,
    cfg: &SweepConfig,
    seed: u64,
) -> (Vec<SweepCell>, Vec<(usize, f64, Error)>) {
    let mut cells = Vec::new();
    let mut failed = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            match sample_cell(n, e, t, samples, cfg, cell_seed(seed, i * ts.len() + j)) {
                Ok(c) => cells.push(c),
                Err(err) => failed.push((n, t, err)),
            }
        }
    }
    (cells, failed)
}

/// Midpoint of the adjacent pair of `t` values with the largest mean-λ₂
/// slope. Cells must share one `n` and be sorted by `t`.
pub fn crossover(cells: &[SweepCell]) -> Option<f64> {
    let usable: Vec<&SweepCell> = cells.iter().filter(|c| !c.samples.is_empty()).collect();
    usable
        .windows(2)
        .map(|w| ((w[1].mean() - w[0].mean()).abs() / (w[1].t - w[0].t), 0.5 * (w[0].t + w[1].t)))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, t)| t)
}

/// One cell of an `(e, t)` grid; `mean_lambda2` is `None` for infeasible or
/// failed cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub e: f64,
    pub t: f64,
    pub mean_lambda2: Option<f64>,
    pub samples: usize,
    pub status: String,
}

/// Mean λ₂ at one `(e, t)`. Cells above the clique bound `t > e^{3/2}` or
/// with non-positive `t` are marked infeasible without running a chain.
pub fn grid_cell(n: usize, e: f64, t: f64, samples: usize, cfg: &SweepConfig, seed: u64) -> GridCell {
    let base = GridCell { e, t, mean_lambda2: None, samples: 0, status: String::new() };
    if t <= 0.0 || t > e.powf(1.5) {
        return GridCell { status: "infeasible".into(), ..base };
    }
    match sample_cell(n, e, t, samples, cfg, seed) {
        Ok(c) if !c.samples.is_empty() => GridCell {
            mean_lambda2: Some(c.mean()),
            samples: c.samples.len(),
            status: "ok".into(),
            ..base
        },
        Ok(_) => GridCell { status: "no_samples".into(), ..base },
        Err(err) => GridCell { status: format!("error: {err}"), ..base },
    }
}

/// Seed of cell `index` in a sweep or grid.
pub fn cell_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64) << 32)
}

/// [`grid_cell`] over `es × ts`, `e`-major.
pub fn et_grid(n: usize, es: &[f64], ts: &[f64], samples: usize, cfg: &SweepConfig, seed: u64) -> Vec<GridCell> {
    let cells = es.iter().flat_map(|&e| ts.iter().map(move |&t| (e, t)));
    cells.enumerate().map(|(k, (e, t))| grid_cell(n, e, t, samples, cfg, cell_seed(seed, k))).collect()
}

/// One `n,e,t,E,T,sample,lambda2` row per sample.
pub fn write_sweep_samples_csv<W: Write>(cells: &[SweepCell], mut w: W) -> Result<()> {
    writeln!(w, "n,e,t,E,T,sample,lambda2")?;
    for c in cells {
        for (k, x) in c.samples.iter().enumerate() {
            writeln!(w, "{},{},{},{},{},{},{:.10}", c.n, c.e, c.t, c.edges, c.triangles, k, x)?;
        }
    }
    Ok(())
}

/// `n,e,t,E,T,count,mean,variance,failures`.
pub fn write_sweep_summary_csv<W: Write>(cells: &[SweepCell], mut w: W) -> Result<()> {
    writeln!(w, "n,e,t,E,T,count,mean,variance,failures")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{:.10},{:.10},{}",
            c.n,
            c.e,
            c.t,
            c.edges,
            c.triangles,
            c.samples.len(),
            c.mean(),
            c.variance(),
            c.failures
        )?;
    }
    Ok(())
}

/// `e,t,mean_lambda2,count,status`; the mean is empty for unmarked cells.
pub fn write_grid_csv<W: Write>(cells: &[GridCell], mut w: W) -> Result<()> {
    writeln!(w, "e,t,mean_lambda2,count,status")?;
    for c in cells {
        let m = c.mean_lambda2.map(|m| format!("{m:.10}")).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", c.e, c.t, m, c.samples, c.status)?;
    }
    Ok(())
}
