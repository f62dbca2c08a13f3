//! Benchmarks for each stage of the workspace pipeline, from single
//! kinematics evaluations up to a coarse end-to-end RDW computation.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ortho3r::kinematics::{
    conditioning_index, default_ik_tol, det_jacobian, forward_kinematics, inverse_kinematics,
    jacobian,
};
use ortho3r::rdw::{compute_rdw, RdwConfig};
use ortho3r::singularity::singular_set;
use ortho3r_bench::{geom_c, regular_config};

fn kinematics(c: &mut Criterion) {
    let g = geom_c();
    let q = regular_config();
    let p = forward_kinematics(&g, &q);
    let tol = default_ik_tol(&g);

    c.bench_function("forward_kinematics", |b| {
        b.iter(|| forward_kinematics(black_box(&g), black_box(&q)))
    });
    c.bench_function("inverse_kinematics", |b| {
        b.iter(|| inverse_kinematics(black_box(&g), black_box(&p), tol))
    });
    c.bench_function("jacobian_conditioning", |b| {
        b.iter(|| conditioning_index(&jacobian(black_box(&g), black_box(&q))))
    });
    c.bench_function("det_jacobian", |b| {
        b.iter(|| det_jacobian(black_box(&g), black_box(&q)))
    });
}

fn singularity_scan(c: &mut Criterion) {
    let g = geom_c();
    c.bench_function("singular_set_grid_128", |b| {
        b.iter(|| singular_set(black_box(&g), 128, 0.025).expect("scan succeeds"))
    });
}

fn rdw_pipeline(c: &mut Criterion) {
    let g = geom_c();
    let config = RdwConfig {
        singular_grid_n: 128,
        reach_grid_n: 128,
        spacing_div: 100,
        n_scan: 20,
        hj_max_evals: 4000,
        ..RdwConfig::default()
    };
    let mut group = c.benchmark_group("rdw");
    group.sample_size(10);
    group.bench_function("compute_rdw_coarse", |b| {
        b.iter(|| compute_rdw(black_box(&g), 0.25, &config).expect("pipeline succeeds"))
    });
    group.finish();
}

criterion_group!(benches, kinematics, singularity_scan, rdw_pipeline);
criterion_main!(benches);
