use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use isocap::bounds::{bound_parallel_volume, bound_perimeter_integral, BoundsConfig};
use isocap::capacity::{cap_ellipsoid, cap_hitting_mc, WosConfig, DEFAULT_QUAD_TOL};
use isocap::fraenkel::asymmetry;
use isocap::sausage::{run, SausageConfig};
use isocap::MCConfig;
use isocap_bench::{ellipsoid_211, polytope, unit_cube};

fn analytic(c: &mut Criterion) {
    let e = ellipsoid_211();
    let cube = unit_cube();
    let cfg = BoundsConfig::default();
    c.bench_function("cap_ellipsoid", |b| b.iter(|| cap_ellipsoid(black_box(&e), DEFAULT_QUAD_TOL).unwrap()));
    c.bench_function("perimeter_integral_cube", |b| b.iter(|| bound_perimeter_integral(black_box(&cube), &cfg).unwrap()));
    c.bench_function("parallel_volume_cube", |b| b.iter(|| bound_parallel_volume(black_box(&cube), &cfg).unwrap()));
    let p = polytope(42);
    let x = [1.7, -0.4, 0.9];
    c.bench_function("polytope_distance", |b| b.iter(|| p.distance(black_box(&x))));
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    let cube = unit_cube();
    g.bench_function("wos_cube_10k", |b| b.iter(|| cap_hitting_mc(&cube, &WosConfig::new(MCConfig::new(1, 10_000))).unwrap()));
    g.bench_function("asymmetry_cube_20k", |b| b.iter(|| asymmetry(&cube, MCConfig::new(1, 20_000)).unwrap()));
    let cfg = SausageConfig::ball(5, 0.5, 2.0, 10, 1e-3, 1);
    g.bench_function("sausage_d5_10_paths", |b| b.iter(|| run(&cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, analytic, monte_carlo);
criterion_main!(benches);
