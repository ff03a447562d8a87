//! Sequential vs parallel throughput of the data-parallel stages and the
//! full pipeline.
//!
//! "sequential" drives the same code through explicit per-item loops (the
//! code path of a `--no-default-features` build) or a single-thread rayon
//! pool for the end-to-end run; "parallel" uses the default pool. Run
//! with `cargo bench -p battleflow`.

use battleflow::cli::{run_pipeline, PipelineConfig};
use battleflow::layout::{layout_all, layout_graph, place_labels};
use battleflow::semantics::{
    cluster_all_routes, cluster_routes, group_by_od, semantify, semantify_all, split_episodes,
};
use battleflow::synth::{match_log, SynthParams};
use battleflow::territory::{build_territory, cluster_points, extract_characteristic_points};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_params() -> SynthParams {
    SynthParams {
        teams: 2,
        units_per_team: 15,
        samples_per_unit: 600,
        sample_dt: 1.0,
        combat_events: 150,
        ..SynthParams::default()
    }
}

fn stages(c: &mut Criterion) {
    let log = match_log(7, &bench_params());
    let points = extract_characteristic_points(&log.units, 30.0, 0.5, 5.0).unwrap();
    let seeds = cluster_points(&points, log.bounds.diagonal() * 0.05);
    let territory = build_territory(&seeds, log.bounds).unwrap();
    let trajectories = semantify_all(&log.units, &territory);
    let episodes: Vec<_> = trajectories
        .iter()
        .flat_map(|st| split_episodes(st, 60.0))
        .collect();
    let groups = group_by_od(&episodes);
    let reps: Vec<_> = cluster_all_routes(&groups, 0.5)
        .iter()
        .flat_map(battleflow::flowgraph::split_at_revisit)
        .filter(|r| r.landmarks.len() >= 2)
        .collect();
    let graphs = battleflow::flowgraph::build_flow_graphs(&reps, None).unwrap();
    let positions = territory.positions();
    let max_troop = graphs
        .iter()
        .flat_map(|g| g.edges.iter().map(|e| e.weight))
        .max()
        .unwrap_or(1);

    let mut group = c.benchmark_group("semantify");
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let out: Vec<_> = log.units.iter().map(|u| semantify(u, &territory)).collect();
            black_box(out)
        })
    });
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(semantify_all(&log.units, &territory)))
    });
    group.finish();

    let mut group = c.benchmark_group("route_clustering");
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let out: Vec<_> = groups.iter().flat_map(|g| cluster_routes(g, 0.5)).collect();
            black_box(out)
        })
    });
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(cluster_all_routes(&groups, 0.5)))
    });
    group.finish();

    let mut group = c.benchmark_group("layout");
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let out: Vec<_> = graphs
                .iter()
                .map(|g| place_labels(layout_graph(g, &positions, 12.0, max_troop).unwrap()))
                .collect();
            black_box(out)
        })
    });
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(layout_all(&graphs, &positions, 12.0, max_troop).unwrap()))
    });
    group.finish();
}

fn full_pipeline(c: &mut Criterion) {
    let log = match_log(7, &bench_params());
    let config = PipelineConfig::new("bench.json", "bench.svg");
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(20);
    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        group.bench_function("sequential", |b| {
            b.iter(|| single.install(|| black_box(run_pipeline(log.clone(), &config).unwrap())))
        });
        group.bench_function("parallel", |b| {
            b.iter(|| black_box(run_pipeline(log.clone(), &config).unwrap()))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(run_pipeline(log.clone(), &config).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, stages, full_pipeline);
criterion_main!(benches);
