//! Labeled simple graphs with incrementally maintained edge and triangle
//! counts.
//!
//! Adjacency is stored as one 128-bit row per node, so the codegree of a pair
//! is two popcounts. The graph additionally keeps the present and absent node
//! pairs in two dense lists, which lets the chain draw a uniform edge or a
//! uniform non-edge in O(1).

use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest supported node count.
pub const MAX_NODES: usize = 128;

const WORDS: usize = MAX_NODES / 64;

type Row = [u64; WORDS];

/// `n choose 2`.
pub fn pairs(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// `n choose 3`.
pub fn triples(n: usize) -> u64 {
    let n = n as u64;
    if n < 3 {
        return 0;
    }
    n * (n - 1) * (n - 2) / 6
}

#[inline]
fn pair_id(i: usize, j: usize) -> u16 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    ((a << 7) | b) as u16
}

#[inline]
fn unpack(id: u16) -> (usize, usize) {
    ((id >> 7) as usize, (id & 0x7f) as usize)
}

#[inline]
fn intersect_count(a: &Row, b: &Row) -> u32 {
    (a[0] & b[0]).count_ones() + (a[1] & b[1]).count_ones()
}

/// Position of the `k`-th (0-based) set bit of `row`.
#[inline]
fn select_bit(row: &Row, mut k: u32) -> usize {
    for (w, &word) in row.iter().enumerate() {
        let c = word.count_ones();
        if k < c {
            let mut x = word;
            for _ in 0..k {
                x &= x - 1;
            }
            return w * 64 + x.trailing_zeros() as usize;
        }
        k -= c;
    }
    unreachable!("select_bit past the last set bit")
}

/// An edge swap: `removed` is an edge, `added` a non-edge of the graph it
/// applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeFlip {
    pub removed: (usize, usize),
    pub added: (usize, usize),
}

/// A simple graph on `n` labeled nodes with cached edge and triangle counts.
#[derive(Clone, Debug)]
pub struct LabeledGraph {
    n: usize,
    rows: Vec<Row>,
    edges: Vec<u16>,
    non_edges: Vec<u16>,
    // slot[pair_id] = index of the pair in `edges` or `non_edges`
    slot: Vec<u32>,
    triangles: u64,
}

impl PartialEq for LabeledGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.rows == other.rows
    }
}

impl Eq for LabeledGraph {}

impl LabeledGraph {
    /// The empty graph on `n` nodes.
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_NODES {
            return Err(Error::InvalidGraph(format!(
                "{n} nodes exceeds the supported maximum of {MAX_NODES}"
            )));
        }
        let mut non_edges = Vec::with_capacity(pairs(n) as usize);
        let mut slot = vec![0u32; MAX_NODES * MAX_NODES];
        for i in 0..n {
            for j in i + 1..n {
                let id = pair_id(i, j);
                slot[id as usize] = non_edges.len() as u32;
                non_edges.push(id);
            }
        }
        Ok(Self {
            n,
            rows: vec![[0; WORDS]; n],
            edges: Vec::new(),
            non_edges,
            slot,
            triangles: 0,
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for i in 0..n {
            for j in i + 1..n {
                g.flip(i, j);
            }
        }
        Ok(g)
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n)?;
        for (i, j) in edges {
            g.check_pair(i, j)?;
            if !g.has_edge(i, j) {
                g.flip(i, j);
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> u64 {
        self.edges.len() as u64
    }

    #[inline]
    pub fn non_edge_count(&self) -> u64 {
        self.non_edges.len() as u64
    }

    #[inline]
    pub fn triangle_count(&self) -> u64 {
        self.triangles
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i][j >> 6] >> (j & 63) & 1 == 1
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        let r = &self.rows[v];
        (r[0].count_ones() + r[1].count_ones()) as usize
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.has_edge(v, u))
    }

    /// Present edges as `(i, j)` with `i < j`, in internal order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&id| unpack(id))
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::InvalidPair(i, j));
        }
        Ok(())
    }

    /// Edge and triangle densities `(E / C(n,2), T / C(n,3))`.
    pub fn densities(&self) -> Result<(f64, f64)> {
        if self.n < 3 {
            return Err(Error::InvalidGraph(format!(
                "densities need at least 3 nodes, got {}",
                self.n
            )));
        }
        Ok((
            self.edge_count() as f64 / pairs(self.n) as f64,
            self.triangles as f64 / triples(self.n) as f64,
        ))
    }

    /// Number of common neighbours of `i` and `j`.
    pub fn codegree(&self, i: usize, j: usize) -> Result<u32> {
        self.check_pair(i, j)?;
        Ok(self.codegree_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn codegree_unchecked(&self, i: usize, j: usize) -> u32 {
        intersect_count(&self.rows[i], &self.rows[j])
    }

    /// Flips the presence of edge `(i, j)`, keeping the cached counts exact.
    pub fn toggle_edge(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_pair(i, j)?;
        self.flip(i, j);
        Ok(())
    }

    /// Unchecked toggle; returns the change in triangle count.
    #[inline]
    pub(crate) fn flip(&mut self, i: usize, j: usize) -> i64 {
        let common = self.codegree_unchecked(i, j) as i64;
        let id = pair_id(i, j);
        let present = self.has_edge(i, j);
        self.rows[i][j >> 6] ^= 1 << (j & 63);
        self.rows[j][i >> 6] ^= 1 << (i & 63);
        let (from, to) = if present {
            (&mut self.edges, &mut self.non_edges)
        } else {
            (&mut self.non_edges, &mut self.edges)
        };
        let pos = self.slot[id as usize] as usize;
        let last = *from.last().expect("pair list out of sync");
        from.swap_remove(pos);
        if last != id {
            self.slot[last as usize] = pos as u32;
        }
        self.slot[id as usize] = to.len() as u32;
        to.push(id);
        if present {
            self.triangles -= common as u64;
            -common
        } else {
            self.triangles += common as u64;
            common
        }
    }

    /// Uniformly random present edge.
    #[inline]
    pub(crate) fn random_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<(usize, usize)> {
        if self.edges.is_empty() {
            return None;
        }
        Some(unpack(self.edges[rng.gen_range(0..self.edges.len())]))
    }

    /// Uniformly random absent pair.
    #[inline]
    pub(crate) fn random_non_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<(usize, usize)> {
        if self.non_edges.is_empty() {
            return None;
        }
        Some(unpack(
            self.non_edges[rng.gen_range(0..self.non_edges.len())],
        ))
    }

    /// Uniformly random neighbour of `v`.
    pub(crate) fn random_neighbor<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> Option<usize> {
        let d = self.degree(v) as u32;
        if d == 0 {
            return None;
        }
        Some(select_bit(&self.rows[v], rng.gen_range(0..d)))
    }

    /// Uniformly random node `u != v` not adjacent to `v`.
    pub(crate) fn random_non_neighbor<R: Rng + ?Sized>(
        &self,
        v: usize,
        rng: &mut R,
    ) -> Option<usize> {
        let mut row = self.rows[v];
        for (w, word) in row.iter_mut().enumerate() {
            *word = !*word;
            let lo = w * 64;
            if self.n <= lo {
                *word = 0;
            } else if self.n < lo + 64 {
                *word &= (1u64 << (self.n - lo)) - 1;
            }
        }
        row[v >> 6] &= !(1 << (v & 63));
        let c = row[0].count_ones() + row[1].count_ones();
        if c == 0 {
            return None;
        }
        Some(select_bit(&row, rng.gen_range(0..c)))
    }

    /// Number of diamonds (two triangles sharing an edge), each counted once
    /// through its shared edge.
    pub fn two_ear_count(&self) -> u64 {
        self.edges
            .iter()
            .map(|&id| {
                let (i, j) = unpack(id);
                let c = self.codegree_unchecked(i, j) as u64;
                c * c.saturating_sub(1) / 2
            })
            .sum()
    }

    /// Recounts triangles from scratch.
    pub fn recount_triangles(&self) -> u64 {
        let total: u64 = self
            .edges
            .iter()
            .map(|&id| {
                let (i, j) = unpack(id);
                self.codegree_unchecked(i, j) as u64
            })
            .sum();
        total / 3
    }

    /// Dense row-major 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for &id in &self.edges {
            let (i, j) = unpack(id);
            m[i * n + j] = 1.0;
            m[j * n + i] = 1.0;
        }
        m
    }

    /// The graph with node `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidGraph("permutation length mismatch".into()));
        }
        Self::from_edges(self.n, self.edges().map(|(i, j)| (perm[i], perm[j])))
    }

    /// Writes the edge-list format: header `n E T`, then one `i j` per line.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.n, self.edge_count(), self.triangles)?;
        let mut es: Vec<_> = self.edges().collect();
        es.sort_unstable();
        for (i, j) in es {
            writeln!(w, "{i} {j}")?;
        }
        Ok(())
    }

    /// Parses the edge-list format, checking the header counts. Blank lines
    /// and `#` comment lines are skipped.
    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate().filter_map(|(k, l)| match l {
            Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('#') => None,
            other => Some((k + 1, other)),
        });
        let (hline, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let nums = parse_ints(&header, hline)?;
        let [n, e, t] = nums[..] else {
            return Err(Error::Parse { line: hline, msg: "header must be `n E T`".into() });
        };
        let mut g = Self::empty(n as usize)?;
        for (line, text) in lines {
            let text = text?;
            let v = parse_ints(&text, line)?;
            let [i, j] = v[..] else {
                return Err(Error::Parse { line, msg: "expected `i j`".into() });
            };
            let (i, j) = (i as usize, j as usize);
            if g.check_pair(i, j).is_err() || g.has_edge(i, j) {
                return Err(Error::Parse { line, msg: format!("bad or repeated pair {i} {j}") });
            }
            g.flip(i, j);
        }
        if g.edge_count() != e || g.triangle_count() != t {
            return Err(Error::Parse {
                line: hline,
                msg: format!(
                    "header says E={e} T={t}, body has E={} T={}",
                    g.edge_count(),
                    g.triangle_count()
                ),
            });
        }
        Ok(g)
    }
}

fn parse_ints(s: &str, line: usize) -> Result<Vec<u64>> {
    s.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|e| Error::Parse { line, msg: format!("{tok:?}: {e}") })
        })
        .collect()
}

/// Uniform graph on `n` nodes with exactly `edges` edges.
pub fn sample_fixed_edge_graph<R: Rng + ?Sized>(
    n: usize,
    edges: u64,
    rng: &mut R,
) -> Result<LabeledGraph> {
    let total = pairs(n);
    if edges > total {
        return Err(Error::ConstraintInfeasible(format!(
            "{edges} edges on {n} nodes (max {total})"
        )));
    }
    let mut g = LabeledGraph::empty(n)?;
    let all: Vec<u16> = g.non_edges.clone();
    for k in index::sample(rng, all.len(), edges as usize) {
        let (i, j) = unpack(all[k]);
        g.flip(i, j);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_triangles(g: &LabeledGraph) -> u64 {
        let n = g.node_count();
        let mut t = 0;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                        t += 1;
                    }
                }
            }
        }
        t
    }

    fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> LabeledGraph {
        let mut g = LabeledGraph::empty(n).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    g.toggle_edge(i, j).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn densities_of_trivial_graphs() {
        assert_eq!(LabeledGraph::empty(10).unwrap().densities().unwrap(), (0.0, 0.0));
        for n in 3..9 {
            assert_eq!(LabeledGraph::complete(n).unwrap().densities().unwrap(), (1.0, 1.0));
        }
        assert!(LabeledGraph::empty(2).unwrap().densities().is_err());
    }

    #[test]
    fn densities_at_the_working_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = sample_fixed_edge_graph(54, 959, &mut rng).unwrap();
        // only the arithmetic matters here
        let (e, _) = g.densities().unwrap();
        assert!((e - 959.0 / 1431.0).abs() < 1e-15);
        assert!((e - 0.670161).abs() < 1e-6);
        assert_eq!(triples(54), 24804);
        assert!((5953.0 / 24804.0f64 - 0.24).abs() < 1e-4);
        g.toggle_edge(0, 1).unwrap();
    }

    #[test]
    fn codegree_small_cases() {
        let k3 = LabeledGraph::complete(3).unwrap();
        let k4 = LabeledGraph::complete(4).unwrap();
        assert_eq!(k3.codegree(0, 2).unwrap(), 1);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(k4.codegree(i, j).unwrap(), 2);
                }
            }
        }
        assert_eq!(k4.codegree(1, 1), Err(Error::InvalidPair(1, 1)));
    }

    #[test]
    fn codegree_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = random_graph(12, 0.5, &mut rng);
            for i in 0..12 {
                for j in 0..12 {
                    if i == j {
                        continue;
                    }
                    let scan = (0..12).filter(|&w| g.has_edge(i, w) && g.has_edge(j, w)).count();
                    assert_eq!(g.codegree(i, j).unwrap() as usize, scan);
                }
            }
        }
    }

    #[test]
    fn toggle_examples() {
        let mut path = LabeledGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.triangle_count(), 0);
        path.toggle_edge(0, 2).unwrap();
        assert_eq!(path.triangle_count(), 1);

        let mut k4 = LabeledGraph::complete(4).unwrap();
        assert_eq!(k4.triangle_count(), 4);
        k4.toggle_edge(2, 3).unwrap();
        assert_eq!(k4.triangle_count(), 2);
        assert_eq!(k4.edge_count(), 5);
        assert!(k4.toggle_edge(3, 3).is_err());
    }

    #[test]
    fn toggles_keep_caches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = LabeledGraph::empty(30).unwrap();
        for step in 0..10_000 {
            let i = rng.gen_range(0..30);
            let j = (i + rng.gen_range(1..30)) % 30;
            let before = g.codegree(i, j).unwrap() as i64;
            let t0 = g.triangle_count() as i64;
            let had = g.has_edge(i, j);
            g.toggle_edge(i, j).unwrap();
            let dt = g.triangle_count() as i64 - t0;
            assert_eq!(dt, if had { -before } else { before });
            if step % 1000 == 0 {
                assert_eq!(g.triangle_count(), brute_triangles(&g));
            }
        }
        let e = (0..30)
            .flat_map(|i| (i + 1..30).map(move |j| (i, j)))
            .filter(|&(i, j)| g.has_edge(i, j))
            .count() as u64;
        assert_eq!(g.edge_count(), e);
        assert_eq!(g.non_edge_count(), pairs(30) - e);
        assert_eq!(g.triangle_count(), brute_triangles(&g));
    }

    #[test]
    fn two_ears_simple() {
        let star = LabeledGraph::from_edges(5, (1..5).map(|v| (0, v))).unwrap();
        assert_eq!(star.two_ear_count(), 0);
        assert_eq!(LabeledGraph::complete(4).unwrap().two_ear_count(), 6);
        // one diamond
        let d = LabeledGraph::from_edges(4, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(d.two_ear_count(), 1);
    }

    #[test]
    fn fixed_edge_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(
            sample_fixed_edge_graph(5, 10, &mut rng).unwrap(),
            LabeledGraph::complete(5).unwrap()
        );
        assert_eq!(sample_fixed_edge_graph(5, 0, &mut rng).unwrap().edge_count(), 0);
        assert!(matches!(
            sample_fixed_edge_graph(5, 11, &mut rng),
            Err(Error::ConstraintInfeasible(_))
        ));
        let g = sample_fixed_edge_graph(54, 959, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 959);
        assert_eq!(g.triangle_count(), brute_triangles(&g));
    }

    #[test]
    fn random_neighbor_choices_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(100, 0.3, &mut rng);
        for _ in 0..2000 {
            let v = rng.gen_range(0..100);
            if let Some(u) = g.random_neighbor(v, &mut rng) {
                assert!(g.has_edge(v, u));
            }
            if let Some(u) = g.random_non_neighbor(v, &mut rng) {
                assert!(u != v && u < 100 && !g.has_edge(v, u));
            }
        }
        let k = LabeledGraph::complete(7).unwrap();
        assert_eq!(k.random_non_neighbor(3, &mut rng), None);
        assert_eq!(LabeledGraph::empty(7).unwrap().random_neighbor(3, &mut rng), None);
    }

    #[test]
    fn edge_list_round_trip_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_graph(20, 0.4, &mut rng);
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let h = LabeledGraph::read_edge_list(&buf[..]).unwrap();
        assert_eq!(g, h);
        assert_eq!(h.triangle_count(), g.triangle_count());

        let bad = b"4 2 0\n0 1\n1 1\n";
        assert_eq!(
            LabeledGraph::read_edge_list(&bad[..]).unwrap_err(),
            Error::Parse { line: 3, msg: "bad or repeated pair 1 1".into() }
        );
        let wrong_t = b"3 3 0\n0 1\n1 2\n0 2\n";
        assert!(matches!(
            LabeledGraph::read_edge_list(&wrong_t[..]),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
