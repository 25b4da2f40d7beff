use criterion::{black_box, criterion_group, criterion_main, Criterion};
use multidicke::model::presets::xi3;
use multidicke::phasemap::{scan_grid, trace_separatrices};
use multidicke::varsurface::{minimize, minimize_numeric, NumericOptions};
use multidicke_bench::ladder_axes;

fn closed_form(c: &mut Criterion) {
    let s = xi3(1.2, 0.9);
    c.bench_function("minimize_closed_form", |b| b.iter(|| minimize(black_box(&s))));
    c.bench_function("minimize_numeric", |b| b.iter(|| minimize_numeric(black_box(&s), &NumericOptions::default())));
}

fn grids(c: &mut Criterion) {
    let base = xi3(0.0, 0.0);
    let axes = ladder_axes();
    c.bench_function("scan_grid_100x100", |b| b.iter(|| scan_grid(&base, &axes, 100).unwrap()));
    let grid = scan_grid(&base, &axes, 40).unwrap();
    c.bench_function("trace_separatrices_40x40", |b| b.iter(|| trace_separatrices(&base, &grid).unwrap()));
}

criterion_group!(benches, closed_form, grids);
criterion_main!(benches);
