use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use expsum::gale::{line_intersections, AffineLine};
use expsum::zeroset::{count_components_2d, ExpSum};
use expsum::{chambers, fixtures, BoxRegion, ContourSampler, SignVector};

fn contour(c: &mut Criterion) {
    let spec = fixtures::pentagon();
    let basis = spec.null_basis().unwrap();
    let sigma: SignVector = "+--++".parse().unwrap();
    c.bench_function("pentagon signed contour, 2000 samples", |b| {
        b.iter(|| ContourSampler::new(2000).box_radius(4.0).main(&basis, black_box(&sigma)))
    });
    c.bench_function("pentagon class census, 10^4 samples", |b| {
        b.iter(|| ContourSampler::new(10_000).nonempty_classes(black_box(&basis)))
    });
}

fn raster(c: &mut Criterion) {
    let spec = fixtures::pentagon();
    let basis = spec.null_basis().unwrap();
    let sigma: SignVector = "+--++".parse().unwrap();
    let cloud = ContourSampler::new(2000).box_radius(4.0).main(&basis, &sigma);
    let bbox = BoxRegion::square(4.0).unwrap();
    let mut group = c.benchmark_group("chambers");
    group.sample_size(10);
    group.bench_function("pentagon +--++ at 800/1600/3200", |b| {
        b.iter(|| chambers(black_box(&cloud), bbox, 800).unwrap())
    });
    group.finish();
}

fn gale(c: &mut Criterion) {
    let spec = fixtures::parallelogram();
    let basis = spec.null_basis().unwrap();
    let sigma = SignVector::of_values(&fixtures::circles_g1()).unwrap();
    let line = AffineLine::random(2, 4.0, 1).unwrap();
    c.bench_function("parallelogram completed line intersections", |b| {
        b.iter(|| line_intersections(&spec, &basis, &sigma, black_box(&line), true, 400).unwrap())
    });
}

fn components(c: &mut Criterion) {
    let g = ExpSum::new(fixtures::parallelogram(), fixtures::circles_g1()).unwrap();
    let mut group = c.benchmark_group("components");
    group.sample_size(10);
    group.bench_function("circles g1, grid 512 from radius 8", |b| {
        b.iter(|| count_components_2d(black_box(&g), 512, 8.0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, contour, raster, gale, components);
criterion_main!(benches);
