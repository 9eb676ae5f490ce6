use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rough_kac::{
    area_closed_form, sample_poisson, sew, solve_ode_smooth, Epsilon, FastXEps, FbmArea, Grid, HurstParam, OdeOptions,
    SewOptions, TrigField, WienerGrid,
};

fn telegraph(c: &mut Criterion) {
    let h = HurstParam::new(0.4).unwrap();
    let eps = Epsilon::new(0.05).unwrap();
    let grid = Grid::new(1.0, 4097).unwrap();
    let pr = sample_poisson(2, 1.0, eps, 1).unwrap();
    let fast = FastXEps::new(h, eps, grid);
    c.bench_function("x_eps_fft_path_4096", |b| b.iter(|| fast.path(black_box(&pr)).unwrap()));

    let field = TrigField { scale: 1.0 };
    c.bench_function("ode_rk4_4096", |b| {
        b.iter(|| solve_ode_smooth(black_box(&pr), h, &field, &[0.5, -0.5], &grid, OdeOptions::default()).unwrap())
    });

    let pr = sample_poisson(2, 1.0, Epsilon::new(0.1).unwrap(), 1).unwrap();
    c.bench_function("area_closed_form", |b| b.iter(|| area_closed_form(black_box(&pr), h, 0.0, 1.0, 1e-8).unwrap()));
}

fn fbm(c: &mut Criterion) {
    let h = HurstParam::new(0.4).unwrap();
    let grid = Grid::new(1.0, 4097).unwrap();
    let builder = FbmArea::new(&grid, h);
    let w = WienerGrid::sample(&grid, 2, 3).unwrap();
    c.bench_function("fbm_area_field_4096", |b| b.iter(|| builder.field(black_box(&w)).unwrap()));
}

fn sewing(c: &mut Criterion) {
    let germ = |s: f64, t: f64| 0.5 * (t * t - s * s) + (t - s).powf(1.5);
    c.bench_function("sew_regularity_1_5", |b| {
        b.iter(|| sew(germ, 0.0, black_box(1.0), SewOptions::default()).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = telegraph, fbm, sewing
}
criterion_main!(benches);
