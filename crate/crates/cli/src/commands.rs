use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use serde::Serialize;
use serde_json::json;

use trigraph::graph::{pairs, triples};
use trigraph::graphon::{
    a30_entropy, a30_from_et, a30_spectrum, locate_transition, maximize_entropy_bipodal,
    min_triangle_bipodal_er,
};
use trigraph::mcmc::{equilibrate as run_equilibration, EquilibrationBudget, ProposalKind, SimRng};
use trigraph::nucleation::{
    run_quench, segment, write_trajectory_csv, Direction, QuenchProtocol, SegmentationConfig,
    SegmentationReport, StepClock,
};
use trigraph::spectral::{
    assign_podes, eigendecompose, embedding, empirical_graphon, write_eigenvalues_csv,
    write_embedding_csv,
};
use trigraph::stats::{fit_gamma, fit_gamma_moments, histogram, Bins};
use trigraph::sweep::{
    cell_seed, grid_cell, sample_cell, sample_graphs, write_grid_csv, write_sweep_samples_csv,
    write_sweep_summary_csv, SweepConfig,
};

use crate::output::{emit, with_meta, write_json, write_text, Meta};
use crate::params::Params;
use crate::CliError;

const DEFAULT_SEED: u64 = 1;

fn out_dir(p: &mut Params, default: &str) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(p.get_or("out", default.to_string())?);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn proposal(p: &mut Params) -> Result<ProposalKind, CliError> {
    let kind: ProposalKind = p
        .get_or("proposal", "global".to_string())?
        .parse()
        .map_err(|e: trigraph::Error| CliError::Usage(e.to_string()))?;
    if kind == ProposalKind::AddDeleteOrSwap {
        return Err(CliError::Usage(
            "exact-count targets need an edge-preserving proposal (global or vertex)".into(),
        ));
    }
    Ok(kind)
}

fn edge_target(p: &Params, n: usize) -> Result<u64, CliError> {
    let edges = match (p.get::<u64>("edges")?, p.get::<f64>("e")?) {
        (Some(edges), _) => edges,
        (None, Some(e)) if (0.0..=1.0).contains(&e) => (e * pairs(n) as f64).round() as u64,
        (None, Some(e)) => return Err(CliError::Usage(format!("edge density {e} outside [0, 1]"))),
        (None, None) => return Err(CliError::Usage("give e or edges".into())),
    };
    if edges > pairs(n) {
        return Err(trigraph::Error::ConstraintInfeasible(format!("{edges} edges on {n} nodes")).into());
    }
    Ok(edges)
}

fn triangle_target(p: &Params, n: usize, density_key: &str, count_key: &str) -> Result<u64, CliError> {
    let t = match (p.get::<u64>(count_key)?, p.get::<f64>(density_key)?) {
        (Some(t), _) => t,
        (None, Some(t)) if (0.0..=1.0).contains(&t) => (t * triples(n) as f64).round() as u64,
        (None, Some(t)) => {
            return Err(CliError::Usage(format!("triangle density {t} outside [0, 1]")))
        }
        (None, None) => return Err(CliError::Usage(format!("give {density_key} or {count_key}"))),
    };
    if t > triples(n) {
        return Err(trigraph::Error::ConstraintInfeasible(format!("{t} triangles on {n} nodes")).into());
    }
    Ok(t)
}

fn sweep_config(p: &mut Params, kind: ProposalKind) -> Result<SweepConfig, CliError> {
    let d = SweepConfig::default();
    Ok(SweepConfig {
        kind,
        chains: p.get_or("chains", d.chains)?,
        burn_in: p.get_or("burn_in", d.burn_in)?,
        spacing: p.get_or("spacing", d.spacing)?,
        settle_attempts: p.get_or("settle_attempts", 100_000)?,
    })
}

/// Runs `f(0..count)` on up to `workers` threads; results keep index order.
fn parallel_map<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if workers <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(count));
    std::thread::scope(|s| {
        for _ in 0..workers.min(count) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let r = f(i);
                done.lock().unwrap().push((i, r));
            });
        }
    });
    let mut done = done.into_inner().unwrap();
    done.sort_by_key(|(i, _)| *i);
    done.into_iter().map(|(_, r)| r).collect()
}

pub fn equilibrate(mut p: Params) -> Result<(), CliError> {
    let n: usize = p.require("n")?;
    let edges = edge_target(&p, n)?;
    let tris = triangle_target(&p, n, "t", "triangles")?;
    let kind = proposal(&mut p)?;
    let seed = p.get_or("seed", DEFAULT_SEED)?;
    let steps = p.get_or("steps", 10_000_000u64)?;
    let max_attempts = p.get_or("max_attempts", steps.saturating_mul(20).max(1000))?;
    let podes = p.get_or("podes", 3usize)?.clamp(1, n.max(1));
    let settle_attempts = p.get_or("settle_attempts", 100_000u64)?;
    let dir = out_dir(&mut p, "equilibrate_out")?;
    let meta = Meta::new(&p, Some(seed));
    let budget = EquilibrationBudget { accepted_steps: steps, max_attempts, settle_attempts };

    let eq = match run_equilibration(n, edges, tris, kind, budget, seed)? {
        Ok(eq) => eq,
        Err(fail) => {
            let diag = json!({
                "status": "timeout",
                "n": n, "E": edges, "T": tris,
                "closest_E": fail.closest_edges,
                "closest_T": fail.closest_triangles,
                "attempts": fail.attempts,
            });
            write_json(&dir.join("diagnostics.json"), &diag, &meta)?;
            return Err(CliError::Timeout(format!(
                "no graph with E={edges} T={tris} after {} attempts (closest T={})",
                fail.attempts, fail.closest_triangles
            )));
        }
    };
    let g = &eq.graph;
    write_text(&dir.join("graph.txt"), &meta, |w| g.write_edge_list(w))?;
    let mut diag = json!({
        "status": "ok",
        "n": n, "E": edges, "T": tris,
        "e": g.densities().map(|d| d.0).ok(),
        "t": g.densities().map(|d| d.1).ok(),
        "accepted": eq.accepted,
        "attempts": eq.attempts,
        "two_ear": g.two_ear_count(),
    });
    if n >= 3 {
        let spec = eigendecompose(g)?;
        diag["lambda1"] = json!(spec.lambda1);
        diag["lambda2"] = json!(spec.lambda2);
        write_text(&dir.join("eigenvalues.csv"), &meta, |w| write_eigenvalues_csv(&spec.eigenvalues, w))?;
        let emb = embedding(g)?;
        write_text(&dir.join("embedding.csv"), &meta, |w| write_embedding_csv(&emb, w))?;
        let mut rng = SimRng::seed_from_u64(seed);
        match assign_podes(&emb, podes, &mut rng).and_then(|part| empirical_graphon(g, &part)) {
            Ok(eg) => {
                diag["pode_sizes"] = json!(eg.sizes);
                write_json(&dir.join("graphon.json"), &eg, &meta)?;
            }
            Err(e) => {
                eprintln!("warning: empirical graphon skipped: {e}");
                diag["graphon_error"] = json!(e.to_string());
            }
        }
    }
    write_json(&dir.join("diagnostics.json"), &diag, &meta)?;
    emit(&serde_json::to_string(&with_meta(&diag, &meta)?)?)?;
    Ok(())
}

pub fn sweep_lambda2(mut p: Params) -> Result<(), CliError> {
    let ns: Vec<usize> = p.list("ns")?;
    let ts: Vec<f64> = p.list("ts")?;
    let e: f64 = p.require("e")?;
    let samples = p.get_or("samples", 200usize)?;
    let kind = proposal(&mut p)?;
    let cfg = sweep_config(&mut p, kind)?;
    let workers = p.get_or("workers", 1usize)?;
    let seed = p.get_or("seed", DEFAULT_SEED)?;
    let dir = out_dir(&mut p, "sweep_out")?;
    let meta = Meta::new(&p, Some(seed));

    let grid: Vec<(usize, f64)> = ns.iter().flat_map(|&n| ts.iter().map(move |&t| (n, t))).collect();
    let results = parallel_map(grid.len(), workers, |k| {
        let (n, t) = grid[k];
        sample_cell(n, e, t, samples, &cfg, cell_seed(seed, k))
    });
    let mut cells = Vec::new();
    for ((n, t), r) in grid.iter().zip(results) {
        match r {
            Ok(c) => {
                if c.failures > 0 {
                    eprintln!("warning: n={n} t={t}: {} draws missed the target", c.failures);
                }
                cells.push(c);
            }
            Err(err) => eprintln!("warning: n={n} t={t} failed: {err}"),
        }
    }
    write_text(&dir.join("lambda2_samples.csv"), &meta, |w| write_sweep_samples_csv(&cells, w))?;
    write_text(&dir.join("lambda2_summary.csv"), &meta, |w| write_sweep_summary_csv(&cells, w))?;
    Ok(())
}

pub fn et_grid(mut p: Params) -> Result<(), CliError> {
    let n: usize = p.require("n")?;
    let es: Vec<f64> = p.list("es")?;
    let ts: Vec<f64> = p.list("ts")?;
    let samples = p.get_or("samples", 20usize)?;
    let kind = proposal(&mut p)?;
    let cfg = sweep_config(&mut p, kind)?;
    let workers = p.get_or("workers", 1usize)?;
    let seed = p.get_or("seed", DEFAULT_SEED)?;
    let dir = out_dir(&mut p, "grid_out")?;
    let meta = Meta::new(&p, Some(seed));

    let grid: Vec<(f64, f64)> = es.iter().flat_map(|&e| ts.iter().map(move |&t| (e, t))).collect();
    let cells = parallel_map(grid.len(), workers, |k| {
        let (e, t) = grid[k];
        grid_cell(n, e, t, samples, &cfg, cell_seed(seed, k))
    });
    for c in cells.iter().filter(|c| c.status.starts_with("error")) {
        eprintln!("warning: e={} t={}: {}", c.e, c.t, c.status);
    }
    write_text(&dir.join("et_grid.csv"), &meta, |w| write_grid_csv(&cells, w))?;
    Ok(())
}

#[derive(Serialize)]
struct RunRow {
    run: usize,
    seed: u64,
    status: String,
    stage1_end: Option<u64>,
    stage2_end: Option<u64>,
    stage2_length: Option<u64>,
    slope: Option<f64>,
    plateau: Option<f64>,
    sse: Option<f64>,
    discontinuity: Option<f64>,
    final_lambda2: f64,
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn quench(mut p: Params) -> Result<(), CliError> {
    let n: usize = p.require("n")?;
    let edges = edge_target(&p, n)?;
    let t_source = triangle_target(&p, n, "t_source", "triangles_source")?;
    let t_target = triangle_target(&p, n, "t_target", "triangles_target")?;
    let kind = proposal(&mut p)?;
    let reps = p.get_or("repetitions", 100usize)?.max(1);
    let steps = p.get_or("steps", 10_000u64)?;
    let record_every = p.get_or("record_every", if steps <= 10_000 { 1u64 } else { 100 })?;
    let embed_every = p.get_or("embed_every", 0u64)?;
    let clock: StepClock = p.get_or("clock", "accepted".to_string())?.parse()?;
    let seed = p.get_or("seed", DEFAULT_SEED)?;
    let direction = if t_target >= t_source { Direction::Up } else { Direction::Down };
    let default_seg = SegmentationConfig::for_direction(direction);
    let seg = SegmentationConfig {
        smooth_window: p.get_or("smooth", default_seg.smooth_window)?.max(1),
        horizon: p.get_or("horizon", steps)?,
    };
    let cfg = sweep_config(&mut p, kind)?;
    let workers = p.get_or("workers", 1usize)?;
    let dir = out_dir(&mut p, "quench_out")?;
    let meta = Meta::new(&p, Some(seed));

    let (starts, missed) = sample_graphs(n, edges, t_source, reps, &cfg, seed)?;
    if starts.is_empty() {
        return Err(CliError::Timeout(format!("no start graph reached E={edges} T={t_source}")));
    }
    if missed > 0 {
        eprintln!("warning: {missed} start draws missed the source target; reusing others");
    }
    let base = QuenchProtocol {
        n,
        edges,
        t_source,
        t_target,
        kind,
        total_steps: steps,
        clock,
        record_every,
        embed_every,
        seed,
    };
    let rows = parallel_map(reps, workers, |i| -> Result<RunRow, CliError> {
        let proto = QuenchProtocol { seed: seed.wrapping_add(1 << 40).wrapping_add(i as u64), ..base.clone() };
        let mut row = RunRow {
            run: i,
            seed: proto.seed,
            status: "ok".into(),
            stage1_end: None,
            stage2_end: None,
            stage2_length: None,
            slope: None,
            plateau: None,
            sse: None,
            discontinuity: None,
            final_lambda2: f64::NAN,
        };
        let traj = match run_quench(starts[i % starts.len()].clone(), &proto) {
            Ok(t) => t,
            Err(e) => {
                row.status = format!("error: {e}");
                return Ok(row);
            }
        };
        row.final_lambda2 = traj.records.last().map_or(f64::NAN, |r| r.lambda2);
        write_text(&dir.join(format!("trajectory_{i:03}.csv")), &meta, |w| write_trajectory_csv(&traj, w))?;
        for (step, emb) in &traj.embeddings {
            write_text(&dir.join(format!("embedding_{i:03}_{step}.csv")), &meta, |w| {
                write_embedding_csv(emb, w)
            })?;
        }
        match segment(&traj, seg) {
            Ok(s) => {
                write_json(&dir.join(format!("segmentation_{i:03}.json")), &SegmentationReport::from(&s), &meta)?;
                row.stage1_end = Some(s.stage1_end);
                row.stage2_end = Some(s.stage2_end);
                row.stage2_length = Some(s.stage2_length());
                row.slope = Some(s.fit.slope);
                row.plateau = Some(s.fit.plateau);
                row.sse = Some(s.fit.sse);
                row.discontinuity = Some(s.fit.discontinuity);
            }
            Err(e) => {
                eprintln!("warning: run {i}: {e}");
                row.stage1_end = trigraph::nucleation::detect_stage1_end(&traj);
                row.status = format!("unsegmented: {e}");
            }
        }
        Ok(row)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_text(&dir.join("stage_lengths.csv"), &meta, |w| {
        writeln!(w, "run,seed,status,stage1_end,stage2_end,stage2_length,slope,plateau,sse,discontinuity,final_lambda2")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.run,
                r.seed,
                r.status.replace(',', ";"),
                opt(r.stage1_end),
                opt(r.stage2_end),
                opt(r.stage2_length),
                opt(r.slope),
                opt(r.plateau),
                opt(r.sse),
                opt(r.discontinuity),
                r.final_lambda2
            )?;
        }
        Ok(())
    })?;

    let ok: Vec<&RunRow> = rows.iter().filter(|r| r.status == "ok").collect();
    let s1: Vec<f64> = ok.iter().filter_map(|r| r.stage1_end).map(|x| x as f64).collect();
    let mut s2: Vec<f64> = ok.iter().filter_map(|r| r.stage2_length).map(|x| x as f64).collect();
    s2.sort_by(f64::total_cmp);
    let positive: Vec<f64> = s2.iter().copied().filter(|&x| x > 0.0).collect();
    let summary = json!({
        "direction": direction,
        "E": edges,
        "T_source": t_source,
        "T_target": t_target,
        "runs": rows.len(),
        "segmented": ok.len(),
        "mean_stage1": mean(&s1),
        "median_stage2": median(&s2),
        "gamma_fit": fit_gamma(&positive).ok(),
    });
    write_json(&dir.join("ensemble.json"), &summary, &meta)?;
    emit(&serde_json::to_string(&summary)?)?;
    Ok(())
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn median(sorted: &[f64]) -> Option<f64> {
    let k = sorted.len();
    (k > 0).then(|| if k % 2 == 1 { sorted[k / 2] } else { 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]) })
}

/// Reads one numeric column. Lines starting with `#` are comments; a first
/// data line that parses as a number means the file has no header. Empty
/// fields are skipped.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let idx = match rows.peek() {
        None => return Err(CliError::Schema(format!("{}: no data", path.display()))),
        Some((_, first)) if first.split(',').count() == 1 && first.parse::<f64>().is_ok() => 0,
        Some(&(line, header)) => {
            let idx = header.split(',').position(|h| h.trim() == column).ok_or_else(|| {
                CliError::Schema(format!("line {line}: no column {column:?} in header {header:?}"))
            })?;
            rows.next();
            idx
        }
    };
    let mut out = Vec::new();
    for (line, row) in rows {
        let field = row
            .split(',')
            .nth(idx)
            .ok_or_else(|| CliError::Schema(format!("line {line}: missing field {}", idx + 1)))?
            .trim();
        if field.is_empty() {
            continue;
        }
        out.push(
            field
                .parse::<f64>()
                .map_err(|e| CliError::Schema(format!("line {line}: {field:?}: {e}")))?,
        );
    }
    Ok(out)
}

pub fn analyze(mut p: Params) -> Result<(), CliError> {
    let input: String = p.require("input")?;
    let column = p.get_or("column", "stage2_length".to_string())?;
    let method = p.get_or("method", "mle".to_string())?;
    let bins = p.get_or("bins", 20usize)?;
    let dir = out_dir(&mut p, "analysis_out")?;
    let meta = Meta::new(&p, None);

    let all = read_column(Path::new(&input), &column)?;
    let xs: Vec<f64> = all.iter().copied().filter(|&x| x > 0.0).collect();
    let fit = match method.as_str() {
        "mle" => fit_gamma(&xs)?,
        "moments" => fit_gamma_moments(&xs)?,
        other => return Err(CliError::Usage(format!("unknown method {other:?}"))),
    };
    let ks = fit.ks(&xs)?;
    let hist = histogram(&xs, &Bins::Count(bins))?;
    let mut report = serde_json::to_value(&fit)?;
    report["ks"] = json!(ks);
    report["dropped_nonpositive"] = json!(all.len() - xs.len());
    write_json(&dir.join("fit.json"), &report, &meta)?;
    write_text(&dir.join("histogram.csv"), &meta, |w| {
        writeln!(w, "bin_lo,bin_hi,count")?;
        for (k, c) in hist.counts.iter().enumerate() {
            writeln!(w, "{},{},{}", hist.edges[k], hist.edges[k + 1], c)?;
        }
        Ok(())
    })?;
    emit(&serde_json::to_string(&report)?)?;
    Ok(())
}

pub fn graphon(which: &str, p: Params) -> Result<(), CliError> {
    let e: f64 = p.require("e")?;
    let body = match which {
        "solve-a30" => {
            let t: f64 = p.require("t")?;
            let (a, b) = a30_from_et(e, t)?;
            json!({ "e": e, "t": t, "a": a, "b": b, "spectrum": a30_spectrum(a, b), "entropy": a30_entropy(e, t)? })
        }
        "maximize-bipodal" => {
            let t: f64 = p.require("t")?;
            let g = maximize_entropy_bipodal(e, t)?;
            json!({
                "e": e,
                "t": t,
                "fractions": g.fractions,
                "blocks": g.blocks,
                "larger_pode_fraction": g.fractions.iter().copied().fold(0.0, f64::max),
                "entropy": g.entropy(),
                "edge_density": g.edge_density(),
                "triangle_density": g.triangle_density(),
            })
        }
        "locate-transition" => json!({ "e": e, "t_transition": locate_transition(e)? }),
        "min-t-bipodal" => json!({ "e": e, "t_min": min_triangle_bipodal_er(e)? }),
        other => return Err(CliError::Usage(format!("unknown graphon command {other}"))),
    };
    let meta = Meta::new(&p, None);
    emit(&serde_json::to_string_pretty(&with_meta(&body, &meta)?)?)?;
    Ok(())
}
