//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use normembed::graph::{load_edge_list, write_edge_list, write_node_map};
use normembed::metrics::{FidelityReport, DEFAULT_HISTOGRAM_BINS};
use normembed::space::write_embedding;
use normembed::tasks::{
    load_interactions, train_linkpred, train_recsys_with_margin, LinkSplit, RecsysLoss,
    RecsysReport, DEFAULT_MARGIN,
};
use normembed::{apsp, grid_search, Graph, PairStore, SearchGrid, SpaceSpec, TrainConfig};
use rayon::prelude::*;
use serde_json::json;

use crate::expr;
use crate::plan::{slug, CommonArgs, Defaults, ExperimentPlan};
use crate::records::*;
use crate::svg::{self, Series};

const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

/// A graph named by a generator expression or an edge-list path.
pub struct GraphSource {
    pub name: String,
    pub graph: Graph,
}

pub fn load_graph(source: &str, weighted: bool) -> Result<GraphSource> {
    let path = Path::new(source);
    if path.is_file() {
        let loaded = load_edge_list(path, weighted)?;
        let name = path
            .file_stem()
            .map_or(source.into(), |s| s.to_string_lossy().into_owned());
        return Ok(GraphSource {
            name,
            graph: loaded.graph,
        });
    }
    let e = match expr::parse(source) {
        Ok(e) => e,
        Err(err)
            if source.contains(['/', '\\'])
                || source.ends_with(".edges")
                || source.ends_with(".txt") =>
        {
            bail!("no such edge-list file `{source}` (and not a generator expression: {err})")
        }
        Err(err) => return Err(err.into()),
    };
    let graph = expr::build(&e)?;
    Ok(GraphSource {
        name: source.split_whitespace().collect(),
        graph,
    })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)
        .with_context(|| format!("writing {}", path.display()))
}

fn print_summary(title: &str, rows: &[SummaryRow]) {
    println!("{title}");
    for s in rows {
        println!(
            "  {:<24} {:<24} {:<10} {} (n={}, failed={})",
            s.group,
            s.space,
            s.metric,
            fmt_summary(s),
            s.runs,
            s.failed
        );
    }
}

fn check_any_ok(total: usize, failed: usize) -> Result<()> {
    if total > 0 && failed == total {
        bail!("all {total} runs failed");
    }
    if failed > 0 {
        eprintln!("warning: {failed} of {total} runs failed");
    }
    Ok(())
}

pub fn generate(expression: &str, out: &Path) -> Result<()> {
    let e = expr::parse(expression)?;
    let g = expr::build(&e)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_edge_list(&g, out)?;
    let names: Vec<String> = (0..g.num_nodes()).map(|i| i.to_string()).collect();
    let map_path = out.with_extension("nodes");
    write_node_map(&names, &map_path)?;
    println!("|V| = {}, |E| = {}", g.num_nodes(), g.num_edges());
    println!("wrote {} and {}", out.display(), map_path.display());
    Ok(())
}

/// Best embedding of one (space, seed) cell of a sweep.
struct CellResult {
    row_d_avg: Option<f64>,
    row_map: Option<f64>,
    wall: Option<f64>,
    best_epoch: Option<usize>,
    loss_curve: Vec<(usize, f64)>,
    histogram: Vec<HistogramRow>,
}

/// Grid search, fidelity report and per-run artifacts under `runs/`.
fn embed_cell(
    pairs: &PairStore,
    spec: &SpaceSpec,
    grid: &SearchGrid,
    base: &TrainConfig,
    seed: u64,
    runs_dir: &Path,
    tag: &str,
) -> Result<CellResult> {
    let base = TrainConfig {
        seed,
        workers: 1,
        ..base.clone()
    };
    let stem = format!("{tag}_{}_seed{seed}", slug(&spec.to_string()));
    let outcome = match grid_search(pairs, spec, grid, &base) {
        Ok(o) => o,
        Err(e) => {
            write_json(
                &runs_dir.join(format!("{stem}.json")),
                &json!({ "space": spec, "seed": seed, "status": "failed", "error": e.to_string() }),
            )?;
            return Err(e.into());
        }
    };
    let fidelity = FidelityReport::compute(&outcome.best_points, pairs, DEFAULT_HISTOGRAM_BINS)?;
    write_embedding(&outcome.best_points, runs_dir.join(format!("{stem}.emb")))?;
    let grid_runs: Vec<_> = outcome
        .runs
        .iter()
        .map(|r| match &r.outcome {
            Ok(rep) => json!({ "config": r.config, "final_d_avg": rep.final_d_avg, "final_map": rep.final_map, "best_epoch": rep.best_epoch }),
            Err(e) => json!({ "config": r.config, "error": e }),
        })
        .collect();
    write_json(
        &runs_dir.join(format!("{stem}.json")),
        &json!({
            "space": spec,
            "seed": seed,
            "status": "ok",
            "d_avg": fidelity.d_avg,
            "map": fidelity.map,
            "best_index": outcome.best_index,
            "best": outcome.best,
            "grid": grid_runs,
        }),
    )?;
    Ok(CellResult {
        row_d_avg: Some(fidelity.d_avg * 100.0),
        row_map: fidelity.map.map(|m| m * 100.0),
        wall: Some(outcome.best.wall_time_seconds),
        best_epoch: Some(outcome.best.best_epoch),
        loss_curve: outcome.best.loss_curve,
        histogram: fidelity
            .histogram
            .iter()
            .map(|b| HistogramRow {
                bin_low: b.bin_low,
                bin_high: b.bin_high,
                count: b.count,
            })
            .collect(),
    })
}

fn cells(plan: &ExperimentPlan) -> Vec<(usize, u64)> {
    (0..plan.spaces.len())
        .flat_map(|s| plan.seeds.iter().map(move |&seed| (s, seed)))
        .collect()
}

pub fn reconstruct(source: &str, weighted: bool, common: &CommonArgs) -> Result<()> {
    let plan = common.resolve(Defaults {
        base: TrainConfig::default(),
        grid: SearchGrid::reconstruction(),
        seeds: DEFAULT_SEEDS.to_vec(),
    })?;
    let src = load_graph(source, weighted)?;
    let pairs = apsp(&src.graph);
    if pairs.is_empty() {
        bail!("graph `{}` has no connected pairs", src.name);
    }
    println!(
        "{}: {} nodes, {} edges, {} pairs; {} spaces x {} seeds x {} grid points",
        src.name,
        src.graph.num_nodes(),
        src.graph.num_edges(),
        pairs.len(),
        plan.spaces.len(),
        plan.seeds.len(),
        plan.grid.len()
    );
    let runs_dir = plan.out.join("runs");
    fs::create_dir_all(&runs_dir)?;

    let jobs = cells(&plan);
    let results: Vec<Result<CellResult>> = pool(plan.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(s, seed)| {
                embed_cell(
                    &pairs,
                    &plan.spaces[s],
                    &plan.grid,
                    &plan.base,
                    seed,
                    &runs_dir,
                    "reconstruct",
                )
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut curves: Vec<Vec<Series>> = plan.spaces.iter().map(|_| Vec::new()).collect();
    let mut failed = 0;
    for (&(s, seed), res) in jobs.iter().zip(results) {
        let space = plan.spaces[s].to_string();
        match res {
            Ok(cell) => {
                let hist_path = plan
                    .out
                    .join(format!("hist_{}_seed{seed}.csv", slug(&space)));
                write_csv(&hist_path, &cell.histogram)?;
                if curves[s].is_empty() {
                    let bins: Vec<_> = cell
                        .histogram
                        .iter()
                        .map(|b| (b.bin_low, b.bin_high, b.count))
                        .collect();
                    let title = format!("{} in {space}, seed {seed}", src.name);
                    fs::write(
                        plan.out.join(format!("hist_{}.svg", slug(&space))),
                        svg::bar_chart(&title, "d_Y / d_G - 1", &bins),
                    )?;
                }
                curves[s].push(Series {
                    label: format!("seed {seed}"),
                    points: cell
                        .loss_curve
                        .iter()
                        .map(|&(e, l)| (e as f64, l))
                        .collect(),
                });
                rows.push(ReconstructionRow {
                    graph: src.name.clone(),
                    space,
                    seed,
                    d_avg_pct: cell.row_d_avg,
                    map_pct: cell.row_map,
                    wall_time_s: cell.wall,
                    best_epoch: cell.best_epoch,
                    status: Status::Ok,
                });
            }
            Err(e) => {
                eprintln!("run {space} seed {seed} failed: {e:#}");
                failed += 1;
                rows.push(ReconstructionRow {
                    graph: src.name.clone(),
                    space,
                    seed,
                    d_avg_pct: None,
                    map_pct: None,
                    wall_time_s: None,
                    best_epoch: None,
                    status: Status::Failed,
                });
            }
        }
    }
    for (spec, series) in plan.spaces.iter().zip(&curves) {
        if !series.is_empty() {
            let title = format!("{} in {spec}: training loss", src.name);
            fs::write(
                plan.out
                    .join(format!("loss_{}.svg", slug(&spec.to_string()))),
                svg::line_chart(&title, "epoch", "loss", series, true),
            )?;
        }
    }
    write_csv(&plan.out.join("results.csv"), &rows)?;
    let summary = summarize(
        &rows,
        |r| (r.graph.clone(), r.space.clone()),
        &[("d_avg_pct", |r| r.d_avg_pct), ("map_pct", |r| r.map_pct)],
    );
    write_csv(&plan.out.join("summary.csv"), &summary)?;
    print_summary("mean ± std over seeds", &summary);
    check_any_ok(rows.len(), failed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    Tree,
    Grid,
    Fullerene,
}

pub struct CapacityArgs {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub branching: usize,
    pub side: usize,
    pub data_dir: PathBuf,
}

pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    let sizes: Vec<usize> = if let Some((a, b)) = s.split_once("..=") {
        (a.trim().parse()?..=b.trim().parse()?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (a.trim().parse()?..b.trim().parse()?).collect()
    } else {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .with_context(|| format!("bad size `{t}`"))
            })
            .collect::<Result<_>>()?
    };
    if sizes.is_empty() {
        bail!("size range `{s}` is empty");
    }
    Ok(sizes)
}

fn capacity_graph(args: &CapacityArgs, size: usize) -> Result<Graph> {
    Ok(match args.family {
        Family::Tree => normembed::graph::gen_tree(args.branching, size)?,
        Family::Grid => normembed::graph::gen_grid(&vec![args.side; size])?,
        Family::Fullerene => {
            let path = args.data_dir.join(format!("fullerene_{size}.edges"));
            if !path.is_file() {
                bail!("missing {}; fullerene sizes are read from pre-generated `fullerene_<n>.edges` files", path.display());
            }
            load_edge_list(&path, false)?.graph
        }
    })
}

pub fn capacity(args: &CapacityArgs, common: &CommonArgs) -> Result<()> {
    if args.sizes.is_empty() {
        bail!("empty size range");
    }
    let plan = common.resolve(Defaults {
        base: TrainConfig::default(),
        grid: SearchGrid::reconstruction(),
        seeds: vec![0, 1, 2],
    })?;
    let family = format!("{:?}", args.family).to_lowercase();
    let graphs: Vec<(usize, Graph, PairStore)> = args
        .sizes
        .iter()
        .map(|&size| {
            let g = capacity_graph(args, size)?;
            let pairs = apsp(&g);
            if pairs.is_empty() {
                bail!("{family} size {size} has no connected pairs");
            }
            Ok((size, g, pairs))
        })
        .collect::<Result<_>>()?;
    let runs_dir = plan.out.join("runs");
    fs::create_dir_all(&runs_dir)?;

    let jobs: Vec<(usize, usize, u64)> = (0..graphs.len())
        .flat_map(|g| cells(&plan).into_iter().map(move |(s, seed)| (g, s, seed)))
        .collect();
    let results: Vec<Result<CellResult>> = pool(plan.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(g, s, seed)| {
                let tag = format!("{family}{}", graphs[g].0);
                embed_cell(
                    &graphs[g].2,
                    &plan.spaces[s],
                    &plan.grid,
                    &plan.base,
                    seed,
                    &runs_dir,
                    &tag,
                )
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut failed = 0;
    for (&(g, s, seed), res) in jobs.iter().zip(results) {
        let (size, graph, _) = &graphs[g];
        let space = plan.spaces[s].to_string();
        let cell = res
            .map_err(|e| eprintln!("run {family}({size}) {space} seed {seed} failed: {e:#}"))
            .ok();
        failed += usize::from(cell.is_none());
        rows.push(CapacityRow {
            family: family.clone(),
            size: *size,
            nodes: graph.num_nodes(),
            space,
            seed,
            d_avg_pct: cell.as_ref().and_then(|c| c.row_d_avg),
            map_pct: cell.as_ref().and_then(|c| c.row_map),
            wall_time_s: cell.as_ref().and_then(|c| c.wall),
            best_epoch: cell.as_ref().and_then(|c| c.best_epoch),
            status: if cell.is_some() {
                Status::Ok
            } else {
                Status::Failed
            },
        });
    }
    write_csv(&plan.out.join("capacity.csv"), &rows)?;
    let summary = summarize(
        &rows,
        |r| (format!("{}({})", r.family, r.size), r.space.clone()),
        &[
            ("d_avg_pct", |r| r.d_avg_pct),
            ("map_pct", |r| r.map_pct),
            ("wall_s", |r| r.wall_time_s),
        ],
    );
    write_csv(&plan.out.join("capacity_summary.csv"), &summary)?;

    let x_label = match args.family {
        Family::Tree => "tree height",
        Family::Grid => "grid dimensions",
        Family::Fullerene => "fullerene atoms",
    };
    let series_of = |metric: fn(&CapacityRow) -> Option<f64>| -> Vec<Series> {
        plan.spaces
            .iter()
            .map(|spec| {
                let space = spec.to_string();
                let points = args
                    .sizes
                    .iter()
                    .filter_map(|&size| {
                        let v: Vec<f64> = rows
                            .iter()
                            .filter(|r| r.size == size && r.space == space)
                            .filter_map(metric)
                            .collect();
                        mean_std(&v).map(|(m, _)| (size as f64, m))
                    })
                    .collect();
                Series {
                    label: space,
                    points,
                }
            })
            .collect()
    };
    fs::write(
        plan.out.join("capacity_davg.svg"),
        svg::line_chart(
            &format!("{family}: average distortion"),
            x_label,
            "D_avg (%)",
            &series_of(|r| r.d_avg_pct),
            false,
        ),
    )?;
    fs::write(
        plan.out.join("capacity_time.svg"),
        svg::line_chart(
            &format!("{family}: training time"),
            x_label,
            "seconds",
            &series_of(|r| r.wall_time_s),
            false,
        ),
    )?;
    print_summary("mean ± std over seeds", &summary);
    check_any_ok(rows.len(), failed)
}

pub struct RecsysArgs {
    pub prefix: PathBuf,
    pub loss: RecsysLoss,
    pub margin: f64,
}

impl Default for RecsysArgs {
    fn default() -> Self {
        Self {
            prefix: PathBuf::new(),
            loss: RecsysLoss::Hinge,
            margin: DEFAULT_MARGIN,
        }
    }
}

/// Trains every grid point and keeps the best dev HR@10 (nDCG@10 breaks ties).
fn best_recsys(
    data: &normembed::tasks::InteractionSet,
    spec: &SpaceSpec,
    plan: &ExperimentPlan,
    seed: u64,
    args: &RecsysArgs,
) -> Result<RecsysReport> {
    let mut best: Option<RecsysReport> = None;
    let mut last_err = None;
    for cfg in plan.grid.configs(&TrainConfig {
        seed,
        workers: 1,
        ..plan.base.clone()
    }) {
        match train_recsys_with_margin(data, spec, &cfg, args.loss, args.margin) {
            Ok((_, rep)) => {
                let better = best.as_ref().map_or(true, |b| {
                    (rep.dev.hr10, rep.dev.ndcg10) > (b.dev.hr10, b.dev.ndcg10)
                });
                if better {
                    best = Some(rep);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| anyhow!(last_err.map_or("no grid points".into(), |e| e.to_string())))
}

pub fn recsys(args: &RecsysArgs, common: &CommonArgs) -> Result<()> {
    let base = TrainConfig::recsys();
    let plan = common.resolve(Defaults {
        grid: SearchGrid::single(&base),
        base,
        seeds: DEFAULT_SEEDS.to_vec(),
    })?;
    let data = load_interactions(&args.prefix)?.set;
    let dataset = args
        .prefix
        .file_name()
        .map_or("dataset".into(), |s| s.to_string_lossy().into_owned());
    println!(
        "{dataset}: {} users, {} items, {} train interactions",
        data.num_users(),
        data.num_items(),
        data.train().len()
    );
    let runs_dir = plan.out.join("runs");
    fs::create_dir_all(&runs_dir)?;
    let jobs = cells(&plan);
    let results: Vec<Result<RecsysReport>> = pool(plan.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(s, seed)| best_recsys(&data, &plan.spaces[s], &plan, seed, args))
            .collect()
    });
    let mut rows = Vec::new();
    let mut failed = 0;
    for (&(s, seed), res) in jobs.iter().zip(results) {
        let space = plan.spaces[s].to_string();
        let path = runs_dir.join(format!("recsys_{}_seed{seed}.json", slug(&space)));
        match res {
            Ok(rep) => {
                write_json(
                    &path,
                    &json!({ "space": space, "seed": seed, "status": "ok", "report": rep }),
                )?;
                rows.push(RecsysRow {
                    dataset: dataset.clone(),
                    space,
                    seed,
                    hr10: Some(rep.test.hr10),
                    ndcg10: Some(rep.test.ndcg10),
                    status: Status::Ok,
                });
            }
            Err(e) => {
                eprintln!("run {space} seed {seed} failed: {e:#}");
                write_json(
                    &path,
                    &json!({ "space": space, "seed": seed, "status": "failed", "error": e.to_string() }),
                )?;
                failed += 1;
                rows.push(RecsysRow {
                    dataset: dataset.clone(),
                    space,
                    seed,
                    hr10: None,
                    ndcg10: None,
                    status: Status::Failed,
                });
            }
        }
    }
    write_csv(&plan.out.join("recsys.csv"), &rows)?;
    let summary = summarize(
        &rows,
        |r| (r.dataset.clone(), r.space.clone()),
        &[("hr10", |r| r.hr10), ("ndcg10", |r| r.ndcg10)],
    );
    write_csv(&plan.out.join("recsys_summary.csv"), &summary)?;
    print_summary("mean ± std over seeds", &summary);
    check_any_ok(rows.len(), failed)
}

pub fn linkpred(source: &str, common: &CommonArgs) -> Result<()> {
    let base = TrainConfig::linkpred();
    let plan = common.resolve(Defaults {
        grid: SearchGrid::single(&base),
        base,
        seeds: DEFAULT_SEEDS.to_vec(),
    })?;
    let src = load_graph(source, false)?;
    println!(
        "{}: {} nodes, {} edges",
        src.name,
        src.graph.num_nodes(),
        src.graph.num_edges()
    );
    let runs_dir = plan.out.join("runs");
    fs::create_dir_all(&runs_dir)?;
    let jobs = cells(&plan);
    let run = |s: usize, seed: u64| -> Result<normembed::tasks::LinkPredReport> {
        let split = LinkSplit::new(&src.graph, seed)?;
        let mut best: Option<normembed::tasks::LinkPredReport> = None;
        let mut last_err = None;
        for cfg in plan.grid.configs(&TrainConfig {
            seed,
            workers: 1,
            ..plan.base.clone()
        }) {
            match train_linkpred(&src.graph, &split, &plan.spaces[s], &cfg) {
                Ok((_, rep)) => {
                    if best.as_ref().map_or(true, |b| rep.dev_auc > b.dev_auc) {
                        best = Some(rep);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        best.ok_or_else(|| anyhow!(last_err.map_or("no grid points".into(), |e| e.to_string())))
    };
    let results: Vec<_> =
        pool(plan.workers)?.install(|| jobs.par_iter().map(|&(s, seed)| run(s, seed)).collect());
    let mut rows = Vec::new();
    let mut failed = 0;
    for (&(s, seed), res) in jobs.iter().zip(results) {
        let space = plan.spaces[s].to_string();
        let path = runs_dir.join(format!("linkpred_{}_seed{seed}.json", slug(&space)));
        let auc = match res {
            Ok(rep) => {
                write_json(
                    &path,
                    &json!({ "space": space, "seed": seed, "status": "ok", "report": rep }),
                )?;
                Some(rep.test_auc)
            }
            Err(e) => {
                eprintln!("run {space} seed {seed} failed: {e:#}");
                write_json(
                    &path,
                    &json!({ "space": space, "seed": seed, "status": "failed", "error": e.to_string() }),
                )?;
                failed += 1;
                None
            }
        };
        let status = if auc.is_some() {
            Status::Ok
        } else {
            Status::Failed
        };
        rows.push(LinkPredRow {
            dataset: src.name.clone(),
            space,
            seed,
            auc,
            status,
        });
    }
    write_csv(&plan.out.join("linkpred.csv"), &rows)?;
    let summary = summarize(
        &rows,
        |r| (r.dataset.clone(), r.space.clone()),
        &[("auc", |r| r.auc)],
    );
    write_csv(&plan.out.join("linkpred_summary.csv"), &summary)?;
    print_summary("mean ± std over seeds", &summary);
    check_any_ok(rows.len(), failed)
}
