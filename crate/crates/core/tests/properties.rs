//! Randomized invariants across graph, spectral, graphon, chain, quench and
//! statistics code.

use proptest::prelude::*;
use rand::SeedableRng;
use trigraph::graph::sample_fixed_edge_graph;
use trigraph::graphon::a30_from_et;
use trigraph::nucleation::{
    fit_piecewise, run_quench, segment, Direction, SegmentationConfig, StepClock,
};
use trigraph::spectral::eigendecompose;
use trigraph::stats::{
    fit_gamma, fit_gamma_moments, gamma_log_likelihood, histogram, ks_distance, Bins,
};
use trigraph::{
    pairs, ChainState, ConstraintSpec, LabeledGraph, MultipodalGraphon, ProposalKind,
    QuenchProtocol, SimRng,
};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = LabeledGraph> {
    (3..=max_n, any::<u64>(), 0.0..1.0f64).prop_map(|(n, seed, frac)| {
        let mut rng = SimRng::seed_from_u64(seed);
        let edges = (frac * pairs(n) as f64).round() as u64;
        sample_fixed_edge_graph(n, edges, &mut rng).unwrap()
    })
}

fn brute_triangles(g: &LabeledGraph) -> u64 {
    let n = g.node_count();
    let mut t = 0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                t += u64::from(g.has_edge(a, b) && g.has_edge(a, c) && g.has_edge(b, c));
            }
        }
    }
    t
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut SimRng::seed_from_u64(seed));
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn toggles_change_t_by_codegree(g in graph_strategy(30), pairs_seed in any::<u64>()) {
        use rand::Rng;
        let mut g = g;
        let n = g.node_count();
        let mut rng = SimRng::seed_from_u64(pairs_seed);
        for _ in 0..50 {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            let before = g.triangle_count() as i64;
            let c = g.codegree(a, b).unwrap() as i64;
            let added = !g.has_edge(a, b);
            g.toggle_edge(a, b).unwrap();
            prop_assert_eq!(g.triangle_count() as i64 - before, if added { c } else { -c });
        }
        prop_assert_eq!(g.triangle_count(), brute_triangles(&g));
        prop_assert_eq!(g.triangle_count(), g.recount_triangles());
        prop_assert_eq!(g.edge_count(), g.edges().count() as u64);
    }

    #[test]
    fn relabeling_preserves_invariants(g in graph_strategy(24), seed in any::<u64>()) {
        let h = g.relabel(&permutation(g.node_count(), seed)).unwrap();
        prop_assert_eq!(h.edge_count(), g.edge_count());
        prop_assert_eq!(h.triangle_count(), g.triangle_count());
        prop_assert_eq!(h.two_ear_count(), g.two_ear_count());
        let (a, b) = (eigendecompose(&g).unwrap(), eigendecompose(&h).unwrap());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenpairs_have_small_residuals(g in graph_strategy(40)) {
        let n = g.node_count();
        let s = eigendecompose(&g).unwrap();
        let m = g.adjacency_matrix();
        for (lambda, v) in [(s.lambda1, &s.xi1), (s.lambda2, &s.xi2)] {
            let r: f64 = (0..n)
                .map(|i| {
                    let mv: f64 = (0..n).map(|j| m[i * n + j] * v[j]).sum();
                    (mv - lambda * v[i]).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            prop_assert!(r <= 1e-8 * n as f64, "residual {}", r);
            let norm: f64 = v.iter().map(|x| x * x).sum();
            prop_assert!((norm - 1.0).abs() < 1e-9);
        }
        let e = g.edge_count() as f64;
        let t = g.triangle_count() as f64;
        let s2: f64 = s.eigenvalues.iter().map(|x| x * x).sum();
        let s3: f64 = s.eigenvalues.iter().map(|x| x * x * x).sum();
        prop_assert!(s.eigenvalues.iter().sum::<f64>().abs() <= 1e-6);
        prop_assert!((s2 - 2.0 * e).abs() <= 1e-6 * (2.0 * e).max(1.0));
        prop_assert!((s3 - 6.0 * t).abs() <= 1e-6 * (6.0 * t).max(1.0));
    }

    #[test]
    fn a30_round_trip(e in 0.01..0.99f64, u in 0.0..1.0f64) {
        let e3 = e * e * e;
        let lo = (0.75 * e3).max(e3 - 2.0 * (1.0 - e).powi(3));
        let t = lo + u * (e3 - lo);
        let (a, b) = a30_from_et(e, t).unwrap();
        prop_assert!(a <= b + 1e-15);
        let g = MultipodalGraphon::a30(a, b).unwrap();
        prop_assert!((g.edge_density() - e).abs() <= 1e-10);
        prop_assert!((g.triangle_density() - t).abs() <= 1e-10);
    }

    #[test]
    fn a30_triangle_identity(a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let g = MultipodalGraphon::a30(a, b).unwrap();
        let want = ((a + 2.0 * b) / 3.0).powi(3) + 2.0 * ((a - b) / 3.0).powi(3);
        prop_assert!((g.triangle_density() - want).abs() <= 1e-12);
    }

    #[test]
    fn pode_relabeling_preserves_functionals(
        raw in prop::collection::vec(0.05..1.0f64, 2..5),
        vals in prop::collection::vec(0.0..=1.0f64, 10),
        seed in any::<u64>(),
    ) {
        let k = raw.len();
        let total: f64 = raw.iter().sum();
        let fractions: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let mut blocks = vec![vec![0.0; k]; k];
        let mut it = vals.iter().cycle();
        for i in 0..k {
            for j in i..k {
                let v = *it.next().unwrap();
                blocks[i][j] = v;
                blocks[j][i] = v;
            }
        }
        let p = permutation(k, seed);
        let pf: Vec<f64> = p.iter().map(|&i| fractions[i]).collect();
        let pb: Vec<Vec<f64>> = p.iter().map(|&i| p.iter().map(|&j| blocks[i][j]).collect()).collect();
        let g = MultipodalGraphon::new(fractions, blocks).unwrap();
        let h = MultipodalGraphon::new(pf, pb).unwrap();
        prop_assert!((g.edge_density() - h.edge_density()).abs() < 1e-12);
        prop_assert!((g.triangle_density() - h.triangle_density()).abs() < 1e-12);
        prop_assert!((g.entropy() - h.entropy()).abs() < 1e-12);
    }

    #[test]
    fn chain_never_moves_away_from_omega(seed in any::<u64>(), vertex in any::<bool>(), cap in 0u64..40) {
        let mut rng = SimRng::seed_from_u64(seed);
        let g = sample_fixed_edge_graph(14, 45, &mut rng).unwrap();
        let spec = ConstraintSpec::ExactEdgesTriangleCap { edges: 45, triangles: cap };
        let kind = if vertex { ProposalKind::VertexLocalSwap } else { ProposalKind::GlobalSwap };
        let mut chain = ChainState::new(g, spec, kind, seed);
        let mut d = chain.distance();
        let (mut step, mut attempt) = (0, 0);
        for _ in 0..3000 {
            chain.mh_step();
            prop_assert!(chain.distance() <= d);
            prop_assert_eq!(chain.graph.edge_count(), 45);
            prop_assert!(chain.step >= step && chain.attempt == attempt + 1);
            d = chain.distance();
            step = chain.step;
            attempt = chain.attempt;
        }
        prop_assert_eq!(chain.graph.triangle_count(), brute_triangles(&chain.graph));
    }

    #[test]
    fn piecewise_fit_is_exhaustive_optimum(ys in prop::collection::vec(-5.0..5.0f64, 10..40)) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (2.0 * i as f64, y)).collect();
        let fit = fit_piecewise(&pts, 0.0, 1e9).unwrap();
        // the reported parameters reproduce the reported SSE
        let direct: f64 = pts
            .iter()
            .map(|&(x, y)| {
                let f = if x < fit.breakpoint { fit.slope * x + fit.intercept } else { fit.plateau };
                (y - f).powi(2)
            })
            .sum();
        prop_assert!((direct - fit.sse).abs() <= 1e-8 * (1.0 + direct));
        for k in 0..pts.len() {
            prop_assert!(fit.sse <= naive_sse(&pts, k) + 1e-8);
        }
    }

    #[test]
    fn gamma_fit_scale_equivariance(
        xs in prop::collection::vec(0.1..100.0f64, 5..60),
        s in 0.01..100.0f64,
    ) {
        prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-3));
        let a = fit_gamma(&xs).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| x * s).collect();
        let b = fit_gamma(&scaled).unwrap();
        prop_assert!((a.alpha - b.alpha).abs() <= 1e-6 * a.alpha);
        prop_assert!((a.theta * s - b.theta).abs() <= 1e-6 * b.theta);
        let m = fit_gamma_moments(&xs).unwrap();
        prop_assert!(a.log_likelihood >= gamma_log_likelihood(&xs, m.alpha, m.theta) - 1e-9 * a.log_likelihood.abs().max(1.0));
        prop_assert!(a.alpha > 0.0 && a.theta > 0.0);
    }

    #[test]
    fn histogram_ignores_order(xs in prop::collection::vec(-10.0..10.0f64, 2..80), seed in any::<u64>(), bins in 1usize..12) {
        prop_assume!(xs.iter().any(|&x| x != xs[0]));
        let p = permutation(xs.len(), seed);
        let ys: Vec<f64> = p.iter().map(|&i| xs[i]).collect();
        let (a, b) = (histogram(&xs, &Bins::Count(bins)).unwrap(), histogram(&ys, &Bins::Count(bins)).unwrap());
        prop_assert_eq!(&a.counts, &b.counts);
        prop_assert_eq!(a.counts.iter().sum::<u64>(), xs.len() as u64);
    }

    #[test]
    fn ks_distance_is_a_bounded_symmetric_statistic(
        xs in prop::collection::vec(-10.0..10.0f64, 1..50),
        ys in prop::collection::vec(-10.0..10.0f64, 1..50),
    ) {
        let d = ks_distance(&xs, &ys).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_distance(&ys, &xs).unwrap());
        prop_assert_eq!(ks_distance(&xs, &xs).unwrap(), 0.0);
    }
}

fn naive_sse(pts: &[(f64, f64)], k: usize) -> f64 {
    let (head, tail) = pts.split_at(k);
    let line_sse = if head.len() < 2 {
        0.0
    } else {
        let n = head.len() as f64;
        let mx = head.iter().map(|p| p.0).sum::<f64>() / n;
        let my = head.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = head.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = head.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let b = sxy / sxx;
        head.iter().map(|p| (p.1 - my - b * (p.0 - mx)).powi(2)).sum()
    };
    let mt = tail.iter().map(|p| p.1).sum::<f64>() / tail.len() as f64;
    line_sse + tail.iter().map(|p| (p.1 - mt).powi(2)).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quench_invariants(seed in any::<u64>(), down in any::<bool>(), attempted in any::<bool>()) {
        let mut rng = SimRng::seed_from_u64(seed);
        let start = sample_fixed_edge_graph(20, 95, &mut rng).unwrap();
        let t0 = start.triangle_count();
        let target = if down { t0.saturating_sub(60) } else { t0 + 60 };
        let proto = QuenchProtocol {
            n: 20,
            edges: 95,
            t_source: t0,
            t_target: target,
            kind: ProposalKind::GlobalSwap,
            total_steps: 1500,
            clock: if attempted { StepClock::Attempted } else { StepClock::Accepted },
            record_every: 1,
            embed_every: 0,
            seed,
        };
        let traj = run_quench(start.clone(), &proto).unwrap();
        prop_assert!(traj.records.windows(2).all(|w| w[1].step > w[0].step));
        prop_assert!(traj.final_graph.edge_count() == 95);
        if down {
            for w in traj.records.windows(2) {
                if w[0].triangles > target {
                    prop_assert!(w[1].triangles <= w[0].triangles);
                }
            }
        }
        let again = run_quench(start, &proto).unwrap();
        prop_assert_eq!(&traj.records, &again.records);
        let dir = if down { Direction::Down } else { Direction::Up };
        let cfg = SegmentationConfig { smooth_window: 1, horizon: 1500 };
        prop_assert_eq!(proto.direction(), dir);
        if let Ok(s) = segment(&traj, cfg) {
            prop_assert!(s.stage1_end <= s.stage2_end);
            prop_assert!(s.stage2_end <= traj.records.last().unwrap().step);
        }
    }
}
