use aniso_hardy::area::product_lusin_area;
use aniso_hardy::atoms::{atomic_decompose, AdmissibleTriplet, HardySystem};
use aniso_hardy::balls::BallFamily;
use aniso_hardy::cubes::DyadicCubeTree;
use aniso_hardy::frames::{band_limited, FramePair, Profile};
use aniso_hardy::maximal::ball_maximal;
use aniso_hardy::weights::Weight;
use aniso_hardy::{EllipsoidGauge, ExpansiveDilation, Field, GridSpec};
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauge(rows: &[Vec<f64>]) -> EllipsoidGauge {
    EllipsoidGauge::build(&ExpansiveDilation::with_epsilon(rows, aniso_hardy::dilation::DEFAULT_EPSILON).unwrap()).unwrap()
}

fn geometry(c: &mut Criterion) {
    let shear = vec![vec![2.0, 1.0], vec![0.0, 2.0]];
    c.bench_function("gauge_build_shear", |b| b.iter(|| gauge(black_box(&shear))));
    let g = gauge(&shear);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts: Vec<[f64; 2]> = (0..1000).map(|_| [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)]).collect();
    c.bench_function("step_quasi_norm_1000", |b| b.iter(|| pts.iter().map(|p| g.rho(p)).sum::<f64>()));
    let fs = GridSpec::cube(2, 8.0, 128).unwrap();
    c.bench_function("cube_tree_shear_128sq", |b| b.iter(|| DyadicCubeTree::build(&g, &fs, DyadicCubeTree::auto_levels(&g, &fs, -1)).unwrap()));
}

fn maximal(c: &mut Criterion) {
    let g = gauge(&[vec![2.0]]);
    let fs = GridSpec::cube(1, 16.0, 4096).unwrap();
    let fam = BallFamily::resolvable(&g, &fs, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data: Vec<f64> = (0..fs.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    c.bench_function("ball_maximal_1d_4096", |b| b.iter(|| ball_maximal(black_box(&data), &fs, &fam)));
}

fn frames_and_area(c: &mut Criterion) {
    let g = gauge(&[vec![2.0]]);
    let fs = GridSpec::cube(1, 16.0, 1024).unwrap();
    let pair = FramePair::build(&g, &fs, 1, Profile::default(), None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = band_limited(&fs, &pair.covered_mask(), &mut rng);
    c.bench_function("frame_reproduce_1d_1024", |b| b.iter(|| pair.reproduce(black_box(&f)).unwrap()));

    let spec = GridSpec::product_1d(8.0, 128, 8.0, 128).unwrap();
    let tri = AdmissibleTriplet::new(1.0, 2.0, None, 1.0, [1.0, 1.0]).unwrap();
    let sys = HardySystem::build([&g, &g], &spec, Weight::constant(&spec), tri.frame_order(), Profile::default()).unwrap();
    let mask: Vec<f64> = sys.covered_mask().iter().map(|m| if *m { 1.0 } else { 0.0 }).collect();
    let bump = Field::from_fn(&spec, |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp() * (3.0 * x[0]).cos(), 0.0));
    let f = bump.spectrum().mul_real(&mask).to_field().real_part();
    c.bench_function("product_lusin_area_128sq", |b| {
        b.iter(|| product_lusin_area(black_box(&f), [&sys.psi[0], &sys.psi[1]], [&g, &g]).unwrap())
    });
    let mut group = c.benchmark_group("decomposition");
    group.sample_size(10);
    group.bench_function("atomic_decompose_128sq", |b| b.iter(|| atomic_decompose(black_box(&f), &sys, &tri).unwrap()));
    group.finish();
}

criterion_group!(benches, geometry, maximal, frames_and_area);
criterion_main!(benches);
