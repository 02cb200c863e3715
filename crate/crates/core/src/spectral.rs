//! Adjacency spectra and the phase diagnostics built on them: the second most
//! negative eigenvalue, the two-dimensional node embedding given by the two
//! most negative eigenvectors, k-means pode assignment in that plane, and the
//! empirical block graphon of a partition.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pairs, LabeledGraph};
use crate::graphon::MultipodalGraphon;
use crate::linalg::{symmetric_eigen, symmetric_eigenvalues};

/// Spectrum (ascending) plus unit eigenvectors of the two most negative
/// eigenvalues.
#[derive(Clone, Debug)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
}

/// Per-node coordinates `(xi1(v), xi2(v))`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeEmbedding {
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PodePartition {
    pub assignment: Vec<usize>,
    pub k: usize,
}

impl PodePartition {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &a in &self.assignment {
            s[a] += 1;
        }
        s
    }
}

// Largest-magnitude entry made positive; first index wins ties.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn eigendecompose(g: &LabeledGraph) -> Result<SpectralSummary> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidGraph("spectrum needs at least 2 nodes".into()));
    }
    let eig = symmetric_eigen(&g.adjacency_matrix(), n, true);
    let mut xi1 = eig.vector(0).expect("vectors requested");
    let mut xi2 = eig.vector(1).expect("vectors requested");
    fix_sign(&mut xi1);
    fix_sign(&mut xi2);
    Ok(SpectralSummary {
        lambda1: eig.values[0],
        lambda2: eig.values[1],
        eigenvalues: eig.values,
        xi1,
        xi2,
    })
}

/// Second most negative adjacency eigenvalue.
pub fn lambda2(g: &LabeledGraph) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidGraph("spectrum needs at least 2 nodes".into()));
    }
    Ok(symmetric_eigenvalues(&g.adjacency_matrix(), n)[1])
}

pub fn embedding(g: &LabeledGraph) -> Result<NodeEmbedding> {
    if g.node_count() < 3 {
        return Err(Error::InvalidGraph("embedding needs at least 3 nodes".into()));
    }
    let s = eigendecompose(g)?;
    Ok(NodeEmbedding { points: s.xi1.iter().zip(&s.xi2).map(|(&a, &b)| [a, b]).collect() })
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

const KMEANS_RESTARTS: usize = 20;
const KMEANS_MAX_ITER: usize = 200;

/// k-means in the embedding plane, best of 20 k-means++ restarts by
/// within-cluster sum of squares.
pub fn assign_podes<R: Rng + ?Sized>(
    emb: &NodeEmbedding,
    k: usize,
    rng: &mut R,
) -> Result<PodePartition> {
    let n = emb.points.len();
    if k == 0 || k > n {
        return Err(Error::DegenerateEmbedding(format!("cannot split {n} points into {k} podes")));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..KMEANS_RESTARTS {
        if let Some((wcss, assignment)) = kmeans_once(&emb.points, k, rng) {
            if best.as_ref().map_or(true, |(b, _)| wcss < *b) {
                best = Some((wcss, assignment));
            }
        }
    }
    let (_, assignment) = best.ok_or_else(|| {
        Error::DegenerateEmbedding(format!("every restart left an empty cluster (k = {k})"))
    })?;
    Ok(PodePartition { assignment, k })
}

fn kmeans_once<R: Rng + ?Sized>(
    points: &[[f64; 2]],
    k: usize,
    rng: &mut R,
) -> Option<(f64, Vec<usize>)> {
    let n = points.len();
    // k-means++ seeding
    let mut centers = vec![points[rng.gen_range(0..n)]];
    let mut d2: Vec<f64> = points.iter().map(|&p| dist2(p, centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut r = rng.gen_range(0.0..total);
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if r < w {
                    pick = i;
                    break;
                }
                r -= w;
            }
            pick
        };
        centers.push(points[next]);
        for (i, &p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, points[next]));
        }
    }

    let mut assignment = vec![usize::MAX; n];
    let mut reseeds = 0;
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for (i, &p) in points.iter().enumerate() {
            let c = (0..k)
                .min_by(|&a, &b| dist2(p, centers[a]).total_cmp(&dist2(p, centers[b])))
                .unwrap();
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
        }
        let mut sums = vec![[0.0; 2]; k];
        let mut counts = vec![0usize; k];
        for (i, &p) in points.iter().enumerate() {
            let c = assignment[i];
            sums[c][0] += p[0];
            sums[c][1] += p[1];
            counts[c] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            // re-seed at the point farthest from its center
            reseeds += 1;
            if reseeds > 10 {
                return None;
            }
            let far = (0..n)
                .max_by(|&a, &b| {
                    dist2(points[a], centers[assignment[a]])
                        .total_cmp(&dist2(points[b], centers[assignment[b]]))
                })
                .unwrap();
            centers[empty] = points[far];
            assignment[far] = usize::MAX;
            continue;
        }
        for c in 0..k {
            centers[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
        }
        if !changed {
            break;
        }
    }
    let mut counts = vec![0usize; k];
    for &a in &assignment {
        if a == usize::MAX {
            return None;
        }
        counts[a] += 1;
    }
    if counts.contains(&0) {
        return None;
    }
    let wcss = points.iter().zip(&assignment).map(|(&p, &a)| dist2(p, centers[a])).sum();
    Some((wcss, assignment))
}

/// Block edge densities of a graph under a node partition. Diagonal blocks of
/// podes with fewer than two nodes have no pairs and are reported as `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalGraphon {
    pub sizes: Vec<usize>,
    pub fractions: Vec<f64>,
    pub blocks: Vec<Vec<Option<f64>>>,
}

impl EmpiricalGraphon {
    /// Converts to a graphon; fails if any block is undefined.
    pub fn to_graphon(&self) -> Result<MultipodalGraphon> {
        let blocks = self
            .blocks
            .iter()
            .map(|row| row.iter().copied().collect::<Option<Vec<f64>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                Error::InvalidGraph("a pode with fewer than 2 nodes has no diagonal block".into())
            })?;
        MultipodalGraphon::new(self.fractions.clone(), blocks)
    }
}

pub fn empirical_graphon(g: &LabeledGraph, part: &PodePartition) -> Result<EmpiricalGraphon> {
    let n = g.node_count();
    if part.assignment.len() != n || part.assignment.iter().any(|&a| a >= part.k) {
        return Err(Error::InvalidGraph("partition does not cover the graph".into()));
    }
    let k = part.k;
    let sizes = part.sizes();
    let mut counts = vec![vec![0u64; k]; k];
    for (i, j) in g.edges() {
        let (a, b) = (part.assignment[i], part.assignment[j]);
        counts[a][b] += 1;
        if a != b {
            counts[b][a] += 1;
        }
    }
    let blocks = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    let avail = if a == b {
                        pairs(sizes[a])
                    } else {
                        (sizes[a] * sizes[b]) as u64
                    };
                    (avail > 0).then(|| counts[a][b] as f64 / avail as f64)
                })
                .collect()
        })
        .collect();
    Ok(EmpiricalGraphon {
        fractions: sizes.iter().map(|&s| s as f64 / n as f64).collect(),
        sizes,
        blocks,
    })
}

/// `node,xi1,xi2` CSV.
pub fn write_embedding_csv<W: Write>(emb: &NodeEmbedding, mut w: W) -> Result<()> {
    writeln!(w, "node,xi1,xi2")?;
    for (v, p) in emb.points.iter().enumerate() {
        writeln!(w, "{v},{:.12},{:.12}", p[0], p[1])?;
    }
    Ok(())
}

/// `index,eigenvalue` CSV, ascending.
pub fn write_eigenvalues_csv<W: Write>(values: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "index,eigenvalue")?;
    for (i, x) in values.iter().enumerate() {
        writeln!(w, "{i},{x:.12}")?;
    }
    Ok(())
}
