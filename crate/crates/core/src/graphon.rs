//! Multipodal graphons: densities, block entropy, the closed-form symmetric
//! tripodal family, numerical bipodal entropy maximization and the location of
//! the tripodal/bipodal crossing.
//!
//! A bipodal graphon has four parameters `(c, p11, p12, p22)`. With the edge
//! density fixed, `p22` is affine in `p11`; with the triangle density also
//! fixed, `p11` is a root of a cubic. The optimizer therefore searches the
//! two-dimensional `(c, p12)` plane, solving the cubic exactly at every point,
//! first on a uniform grid and then by repeated local zooming around the best
//! cell.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

/// Block-constant graphon: pode fractions and a symmetric block matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultipodalGraphon {
    pub fractions: Vec<f64>,
    pub blocks: Vec<Vec<f64>>,
}

/// `-u ln u - (1-u) ln(1-u)`, zero at the endpoints.
pub fn binary_entropy(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        -u * u.ln() - (1.0 - u) * (-u).ln_1p()
    }
}

impl MultipodalGraphon {
    pub fn new(fractions: Vec<f64>, blocks: Vec<Vec<f64>>) -> Result<Self> {
        let k = fractions.len();
        if k == 0 || blocks.len() != k || blocks.iter().any(|r| r.len() != k) {
            return Err(Error::ParameterInfeasible("block matrix must be k x k".into()));
        }
        if fractions.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::ParameterInfeasible("pode fractions must be positive".into()));
        }
        if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::ParameterInfeasible("pode fractions must sum to 1".into()));
        }
        for i in 0..k {
            for j in 0..k {
                let p = blocks[i][j];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::ParameterInfeasible(format!("block value {p} not in [0,1]")));
                }
                if (p - blocks[j][i]).abs() > 1e-12 {
                    return Err(Error::ParameterInfeasible("block matrix not symmetric".into()));
                }
            }
        }
        Ok(Self { fractions, blocks })
    }

    pub fn constant(p: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![vec![p]])
    }

    /// Three equal podes, `a` on the diagonal and `b` off it.
    pub fn a30(a: f64, b: f64) -> Result<Self> {
        let third = 1.0 / 3.0;
        Self::new(
            vec![third; 3],
            (0..3).map(|i| (0..3).map(|j| if i == j { a } else { b }).collect()).collect(),
        )
    }

    pub fn bipodal(c: f64, p11: f64, p12: f64, p22: f64) -> Result<Self> {
        Self::new(vec![c, 1.0 - c], vec![vec![p11, p12], vec![p12, p22]])
    }

    pub fn podes(&self) -> usize {
        self.fractions.len()
    }

    pub fn edge_density(&self) -> f64 {
        let c = &self.fractions;
        let mut s = 0.0;
        for i in 0..c.len() {
            for j in 0..c.len() {
                s += c[i] * c[j] * self.blocks[i][j];
            }
        }
        s
    }

    pub fn triangle_density(&self) -> f64 {
        let c = &self.fractions;
        let p = &self.blocks;
        let k = c.len();
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    s += c[i] * c[j] * c[l] * p[i][j] * p[j][l] * p[l][i];
                }
            }
        }
        s
    }

    pub fn entropy(&self) -> f64 {
        let c = &self.fractions;
        let mut s = 0.0;
        for i in 0..c.len() {
            for j in 0..c.len() {
                s += c[i] * c[j] * binary_entropy(self.blocks[i][j]);
            }
        }
        s
    }

    /// Nonzero-capable spectrum of the block operator, ascending. For a
    /// block-constant kernel this is the spectrum of
    /// `diag(sqrt c) P diag(sqrt c)`.
    pub fn operator_spectrum(&self) -> Vec<f64> {
        let k = self.podes();
        let sq: Vec<f64> = self.fractions.iter().map(|c| c.sqrt()).collect();
        let mut m = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                m[i * k + j] = sq[i] * self.blocks[i][j] * sq[j];
            }
        }
        crate::linalg::symmetric_eigenvalues(&m, k)
    }
}

/// Block values `(a, b)` of the symmetric tripodal graphon with edge density
/// `e` and triangle density `t <= e^3`.
pub fn a30_from_et(e: f64, t: f64) -> Result<(f64, f64)> {
    let gap = e * e * e - t;
    // roundoff around t = e^3 would otherwise be amplified by the cube root
    let tol = 8.0 * f64::EPSILON * e * e * e;
    if gap < -tol || !gap.is_finite() {
        return Err(Error::BranchInfeasible { e, t });
    }
    // (a - b) / 3 = -((e^3 - t) / 2)^(1/3)
    let d = if gap <= tol { 0.0 } else { -(gap / 2.0).cbrt() };
    let (a, b) = (e + 2.0 * d, e - d);
    // a = 0 and b = 1 are reachable edges of the branch; absorb roundoff there
    let slack = 1e-12;
    let (a, b) = (
        if (-slack..0.0).contains(&a) { 0.0 } else { a },
        if b > 1.0 && b <= 1.0 + slack { 1.0 } else { b },
    );
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::ParameterInfeasible(format!(
            "(e, t) = ({e}, {t}) gives a = {a}, b = {b}"
        )));
    }
    Ok((a, b))
}

/// `{(a-b)/3, (a-b)/3, (a+2b)/3}` sorted ascending.
pub fn a30_spectrum(a: f64, b: f64) -> [f64; 3] {
    let mut s = [(a - b) / 3.0, (a - b) / 3.0, (a + 2.0 * b) / 3.0];
    s.sort_by(f64::total_cmp);
    s
}

/// Entropy of the symmetric tripodal graphon at `(e, t)`.
pub fn a30_entropy(e: f64, t: f64) -> Result<f64> {
    let (a, b) = a30_from_et(e, t)?;
    Ok(binary_entropy(a) / 3.0 + 2.0 * binary_entropy(b) / 3.0)
}

/// Grid and zoom settings for the bipodal searches.
#[derive(Clone, Copy, Debug)]
pub struct BipodalSearch {
    /// Grid points per axis in the initial scan.
    pub grid: usize,
    /// Local zoom rounds after the scan.
    pub zoom_rounds: usize,
    /// Points per axis in each zoom window.
    pub zoom_grid: usize,
}

impl Default for BipodalSearch {
    fn default() -> Self {
        Self { grid: 201, zoom_rounds: 60, zoom_grid: 9 }
    }
}

// Smallest fraction of the smaller pode considered.
const MIN_FRACTION: f64 = 1e-4;

/// Bipodal block values with fixed `c` and `p12`: `p22 = y0 + y1 * p11`.
#[derive(Clone, Copy, Debug)]
struct Slice {
    c: f64,
    q: f64,
    y0: f64,
    y1: f64,
}

impl Slice {
    fn new(e: f64, c: f64, q: f64) -> Self {
        let d = (1.0 - c) * (1.0 - c);
        Self { c, q, y0: (e - 2.0 * c * (1.0 - c) * q) / d, y1: -c * c / d }
    }

    fn y(&self, x: f64) -> f64 {
        self.y0 + self.y1 * x
    }

    /// Range of `p11` keeping both `p11` and `p22` in `[0, 1]`.
    fn x_range(&self) -> Option<(f64, f64)> {
        let s = -self.y1;
        let lo = ((self.y0 - 1.0) / s).max(0.0);
        let hi = (self.y0 / s).min(1.0);
        (lo <= hi).then_some((lo, hi))
    }

    /// Coefficients of the triangle density as a cubic in `p11`.
    fn cubic(&self) -> [f64; 4] {
        let (c, q, y0, y1) = (self.c, self.q, self.y0, self.y1);
        let a3 = c * c * c;
        let b3 = (1.0 - c).powi(3);
        let k1 = 3.0 * c * c * (1.0 - c) * q * q;
        let k2 = 3.0 * c * (1.0 - c) * (1.0 - c) * q * q;
        [
            k2 * y0 + b3 * y0 * y0 * y0,
            k1 + k2 * y1 + 3.0 * b3 * y0 * y0 * y1,
            3.0 * b3 * y0 * y1 * y1,
            a3 + b3 * y1 * y1 * y1,
        ]
    }

    fn entropy(&self, x: f64) -> f64 {
        let c = self.c;
        c * c * binary_entropy(x)
            + 2.0 * c * (1.0 - c) * binary_entropy(self.q)
            + (1.0 - c) * (1.0 - c) * binary_entropy(self.y(x))
    }

    fn graphon(&self, x: f64) -> Result<MultipodalGraphon> {
        let y = self.y(x).clamp(0.0, 1.0);
        MultipodalGraphon::bipodal(self.c, x, self.q, y)
    }
}

fn eval_cubic(p: &[f64; 4], x: f64) -> f64 {
    ((p[3] * x + p[2]) * x + p[1]) * x + p[0]
}

/// Real roots of `p(x) = target` on `[lo, hi]`: split at the critical points
/// into monotone pieces and bisect each piece that changes sign.
fn cubic_roots_in(p: &[f64; 4], target: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut cuts = vec![lo];
    // p'(x) = 3 p3 x^2 + 2 p2 x + p1
    let (qa, qb, qc) = (3.0 * p[3], 2.0 * p[2], p[1]);
    let mut crit = Vec::with_capacity(2);
    if qa.abs() > 1e-300 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let s = disc.sqrt();
            crit.push((-qb - s) / (2.0 * qa));
            crit.push((-qb + s) / (2.0 * qa));
        }
    } else if qb.abs() > 1e-300 {
        crit.push(-qc / qb);
    }
    crit.sort_by(f64::total_cmp);
    cuts.extend(crit.into_iter().filter(|&x| x > lo && x < hi));
    cuts.push(hi);

    let f = |x: f64| eval_cubic(p, x) - target;
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        if fb == 0.0 {
            // picked up as the left end of the next piece, or here if last
            if b == hi {
                roots.push(b);
            }
            continue;
        }
        let rising = fb > fa;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if (f(m) < 0.0) == rising {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

/// Best entropy over admissible `p11` at fixed `(c, p12)`.
fn best_on_slice(e: f64, t: f64, c: f64, q: f64) -> Option<(f64, f64)> {
    let s = Slice::new(e, c, q);
    let (lo, hi) = s.x_range()?;
    cubic_roots_in(&s.cubic(), t, lo, hi)
        .into_iter()
        .map(|x| (s.entropy(x), x))
        .max_by(|a, b| a.0.total_cmp(&b.0))
}

/// Least triangle density over admissible `p11` at fixed `(c, p12)`.
fn min_t_on_slice(e: f64, c: f64, q: f64) -> Option<(f64, f64)> {
    let s = Slice::new(e, c, q);
    let (lo, hi) = s.x_range()?;
    let p = s.cubic();
    let mut cands = vec![lo, hi];
    let (qa, qb, qc) = (3.0 * p[3], 2.0 * p[2], p[1]);
    if qa.abs() > 1e-300 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let r = disc.sqrt();
            cands.push((-qb - r) / (2.0 * qa));
            cands.push((-qb + r) / (2.0 * qa));
        }
    } else if qb.abs() > 1e-300 {
        cands.push(-qc / qb);
    }
    cands
        .into_iter()
        .filter(|&x| x >= lo && x <= hi)
        .map(|x| (-eval_cubic(&p, x), x))
        .max_by(|a, b| a.0.total_cmp(&b.0))
}

/// Maximizes `score(c, q)` over `c in [MIN_FRACTION, 1/2]`, `q in [0, 1]`:
/// uniform scan, then zooming on the best point. Returns `(score, c, q, x)`.
fn scan_and_zoom<F>(opts: BipodalSearch, score: F) -> Option<(f64, f64, f64, f64)>
where
    F: Fn(f64, f64) -> Option<(f64, f64)>,
{
    let (c_lo, c_hi) = (MIN_FRACTION, 0.5);
    let n = opts.grid.max(2);
    let mut best: Option<(f64, f64, f64, f64)> = None;
    let consider = |c: f64, q: f64, best: &mut Option<(f64, f64, f64, f64)>| {
        if let Some((s, x)) = score(c, q) {
            if best.map_or(true, |b| s > b.0) {
                *best = Some((s, c, q, x));
            }
        }
    };
    for i in 0..n {
        let c = c_lo + (c_hi - c_lo) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            consider(c, j as f64 / (n - 1) as f64, &mut best);
        }
    }
    let mut best = best?;
    let mut hc = (c_hi - c_lo) / (n - 1) as f64;
    let mut hq = 1.0 / (n - 1) as f64;
    let m = opts.zoom_grid.max(3);
    for _ in 0..opts.zoom_rounds {
        let (_, c0, q0, _) = best;
        let mut round = Some(best);
        for i in 0..m {
            let c = (c0 - hc + 2.0 * hc * i as f64 / (m - 1) as f64).clamp(c_lo, c_hi);
            for j in 0..m {
                let q = (q0 - hq + 2.0 * hq * j as f64 / (m - 1) as f64).clamp(0.0, 1.0);
                consider(c, q, &mut round);
            }
        }
        best = round.unwrap();
        hc *= 0.5;
        hq *= 0.5;
    }
    Some(best)
}

/// Entropy-maximizing bipodal graphon with densities `(e, t)`. Pode 0 is the
/// larger pode.
pub fn maximize_entropy_bipodal(e: f64, t: f64) -> Result<MultipodalGraphon> {
    maximize_entropy_bipodal_with(e, t, BipodalSearch::default())
}

pub fn maximize_entropy_bipodal_with(
    e: f64,
    t: f64,
    opts: BipodalSearch,
) -> Result<MultipodalGraphon> {
    if !(0.0..=1.0).contains(&e) || !(0.0..=1.0).contains(&t) {
        return Err(Error::NoFeasiblePoint { e, t });
    }
    if (t - e * e * e).abs() < 1e-14 {
        // Erdos-Renyi attains the unconstrained entropy bound
        return MultipodalGraphon::bipodal(0.5, e, e, e);
    }
    let (_, c, q, x) = scan_and_zoom(opts, |c, q| best_on_slice(e, t, c, q))
        .ok_or(Error::NoFeasiblePoint { e, t })?;
    let g = Slice::new(e, c, q).graphon(x)?;
    let b = &g.blocks;
    // larger pode first
    MultipodalGraphon::bipodal(1.0 - c, b[1][1], b[0][1], b[0][0])
}

/// Least triangle density of a bipodal graphon with edge density `e`.
pub fn min_triangle_bipodal_er(e: f64) -> Result<f64> {
    min_triangle_bipodal_er_with(e, BipodalSearch::default())
}

pub fn min_triangle_bipodal_er_with(e: f64, opts: BipodalSearch) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::NoFeasiblePoint { e, t: f64::NAN });
    }
    let (neg, ..) = scan_and_zoom(opts, |c, q| min_t_on_slice(e, c, q))
        .ok_or(Error::NoFeasiblePoint { e, t: f64::NAN })?;
    Ok((-neg).max(0.0))
}

/// Tripodal minus best bipodal entropy at `(e, t)`.
pub fn entropy_gap(e: f64, t: f64) -> Result<f64> {
    Ok(a30_entropy(e, t)? - maximize_entropy_bipodal(e, t)?.entropy())
}

/// Triangle density at which the symmetric tripodal and the optimal bipodal
/// graphons have equal entropy, for edge density `e`.
pub fn locate_transition(e: f64) -> Result<f64> {
    let t_min = min_triangle_bipodal_er(e)?;
    let t_max = e * e * e;
    let (lo, hi) = (t_min + 1e-9, t_max - 1e-9);
    if !(lo < hi) {
        return Err(Error::NotBracketed { lo, hi });
    }
    // scan for the first sign change (tripodal ahead -> bipodal ahead)
    const SCAN: usize = 40;
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for k in 0..=SCAN {
        let t = lo + (hi - lo) * (k as f64 / SCAN as f64).powi(2);
        let Ok(g) = entropy_gap(e, t) else { continue };
        if let Some((tp, gp)) = prev {
            if gp > 0.0 && g <= 0.0 {
                bracket = Some((tp, t));
                break;
            }
        }
        prev = Some((t, g));
    }
    let (mut a, mut b) = bracket.ok_or(Error::NotBracketed { lo, hi })?;
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if entropy_gap(e, m)? > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Pode sizes for `n` nodes by largest-remainder rounding of `fractions * n`.
pub fn pode_sizes(fractions: &[f64], n: usize) -> Vec<usize> {
    let raw: Vec<f64> = fractions.iter().map(|c| c * n as f64).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&i, &j| {
        let (fi, fj) = (raw[i] - raw[i].floor(), raw[j] - raw[j].floor());
        fj.total_cmp(&fi).then(i.cmp(&j))
    });
    for &i in order.iter().cycle().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    sizes
}

/// Random graph from a graphon: contiguous podes of rounded sizes, each pair
/// connected independently with its block probability. Also returns the pode
/// of every node.
pub fn sample_from_graphon<R: Rng + ?Sized>(
    g: &MultipodalGraphon,
    n: usize,
    rng: &mut R,
) -> Result<(LabeledGraph, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InvalidGraph("need at least 2 nodes".into()));
    }
    let sizes = pode_sizes(&g.fractions, n);
    let pode: Vec<usize> =
        sizes.iter().enumerate().flat_map(|(k, &s)| std::iter::repeat(k).take(s)).collect();
    let mut out = LabeledGraph::empty(n)?;
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(g.blocks[pode[i]][pode[j]]) {
                out.flip(i, j);
            }
        }
    }
    Ok((out, pode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn densities_of_simple_graphons() {
        let g = MultipodalGraphon::constant(0.3).unwrap();
        assert!((g.edge_density() - 0.3).abs() < 1e-15);
        assert!((g.triangle_density() - 0.027).abs() < 1e-15);
        let (a, b) = (0.2, 0.9);
        let g = MultipodalGraphon::a30(a, b).unwrap();
        assert!((g.edge_density() - (a + 2.0 * b) / 3.0).abs() < 1e-15);
        let t = a * a * a / 9.0 + 2.0 * a * b * b / 3.0 + 2.0 * b * b * b / 9.0;
        assert!((g.triangle_density() - t).abs() < 1e-15);
        let kb = MultipodalGraphon::bipodal(0.5, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(kb.edge_density(), 0.5);
        assert_eq!(kb.triangle_density(), 0.0);
    }

    #[test]
    fn validation() {
        assert!(MultipodalGraphon::new(vec![0.5, 0.6], vec![vec![0.0; 2]; 2]).is_err());
        assert!(MultipodalGraphon::bipodal(0.5, 0.1, 1.2, 0.1).is_err());
        assert!(MultipodalGraphon::new(vec![0.5, 0.5], vec![vec![0.1, 0.2], vec![0.3, 0.1]])
            .is_err());
    }

    #[test]
    fn entropy_examples() {
        let half = MultipodalGraphon::constant(0.5).unwrap();
        assert!((half.entropy() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(MultipodalGraphon::bipodal(0.3, 0.0, 1.0, 1.0).unwrap().entropy(), 0.0);
        assert!(binary_entropy(0.5) > binary_entropy(0.9));
    }

    #[test]
    fn a30_working_point() {
        let (a, b) = a30_from_et(0.67, 0.24).unwrap();
        // exact solve: a = 0.045930, b = 0.982035
        assert!((b - a - 0.936105).abs() < 1e-6, "{}", b - a);
        assert!((a - 0.0457).abs() < 5e-4 && (b - 0.9822).abs() < 5e-4);
        assert!(((a + 2.0 * b) / 3.0 - 0.67).abs() < 1e-15);
        assert!(((a - b) / 3.0 + 0.31216).abs() < 2e-4);
        let s = a30_spectrum(a, b);
        assert!((s[0] + 0.31216).abs() < 2e-4 && s[0] == s[1]);
        assert!((s[2] - 0.67).abs() < 1e-12);
        let g = MultipodalGraphon::a30(a, b).unwrap();
        assert!((g.triangle_density() - 0.24).abs() < 1e-12);
    }

    #[test]
    fn a30_boundary_and_errors() {
        let e: f64 = 0.6;
        let (a, b) = a30_from_et(e, e.powi(3)).unwrap();
        assert_eq!((a, b), (e, e));
        assert!(matches!(a30_from_et(0.6, 0.3), Err(Error::BranchInfeasible { .. })));
        assert!(matches!(a30_from_et(0.2, 0.0), Err(Error::ParameterInfeasible(_))));
    }

    #[test]
    fn a30_spectrum_examples() {
        let s = a30_spectrum(0.4, 0.4);
        assert!(s[0] == 0.0 && s[1] == 0.0 && (s[2] - 0.4).abs() < 1e-15);
        let s = a30_spectrum(0.0, 1.0);
        assert!((s[0] + 1.0 / 3.0).abs() < 1e-15 && (s[2] - 2.0 / 3.0).abs() < 1e-15);
        // the block-operator route agrees
        let op = MultipodalGraphon::a30(0.1, 0.8).unwrap().operator_spectrum();
        for (x, y) in op.iter().zip(a30_spectrum(0.1, 0.8)) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_root_finder() {
        // (x - 0.2)(x - 0.5)(x - 0.9) = x^3 - 1.6x^2 + 0.73x - 0.09
        let p = [-0.09, 0.73, -1.6, 1.0];
        let r = cubic_roots_in(&p, 0.0, 0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (x, want) in r.iter().zip([0.2, 0.5, 0.9]) {
            assert!((x - want).abs() < 1e-14);
        }
        assert!(cubic_roots_in(&p, 0.0, 0.55, 0.85).is_empty());
    }

    #[test]
    fn bipodal_at_erdos_renyi() {
        let e: f64 = 0.67;
        let g = maximize_entropy_bipodal(e, e.powi(3)).unwrap();
        assert!((g.entropy() - binary_entropy(e)).abs() < 1e-15);
        // just below the ER curve the optimum is continuous with it
        let g = maximize_entropy_bipodal(e, e.powi(3) - 1e-5).unwrap();
        assert!((g.entropy() - binary_entropy(e)).abs() < 1e-3);
    }

    #[test]
    fn bipodal_optimum_residuals_and_rank() {
        let g = maximize_entropy_bipodal(0.67, 0.26).unwrap();
        assert!((g.edge_density() - 0.67).abs() < 1e-8);
        assert!((g.triangle_density() - 0.26).abs() < 1e-8);
        assert!(g.fractions[0] > 0.55 && g.fractions[0] < 0.65, "{:?}", g.fractions);
        let spec = g.operator_spectrum();
        assert_eq!(spec.iter().filter(|&&x| x < -1e-9).count(), 1);
    }

    #[test]
    fn infeasible_bipodal() {
        assert!(matches!(
            maximize_entropy_bipodal(0.67, 0.2),
            Err(Error::NoFeasiblePoint { .. })
        ));
    }

    #[test]
    fn min_triangle_examples() {
        assert!(min_triangle_bipodal_er(0.5).unwrap() < 1e-12);
        assert!((min_triangle_bipodal_er(1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pode_rounding() {
        assert_eq!(pode_sizes(&[1.0 / 3.0; 3], 54), vec![18, 18, 18]);
        assert_eq!(pode_sizes(&[1.0 / 3.0; 3], 10), vec![4, 3, 3]);
        assert_eq!(pode_sizes(&[0.62, 0.38], 54), vec![33, 21]);
        assert_eq!(pode_sizes(&[0.5, 0.5], 7).iter().sum::<usize>(), 7);
    }

    #[test]
    fn sampling_constant_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = MultipodalGraphon::constant(1.0).unwrap();
        let (h, _) = sample_from_graphon(&g, 12, &mut rng).unwrap();
        assert_eq!(h, LabeledGraph::complete(12).unwrap());
    }
}
