use aniso_hardy::area::*;
use aniso_hardy::frames::{band_limited, PartitionOfUnity, Profile};
use aniso_hardy::{EllipsoidGauge, ExpansiveDilation, Field, GridSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn filters(spec: &GridSpec, levels: (i32, i32)) -> (EllipsoidGauge, ScaleFilters) {
    let d = ExpansiveDilation::scalar(2.0).unwrap();
    let g = EllipsoidGauge::build(&d).unwrap();
    let p = PartitionOfUnity::build(&d, Profile::default(), 1.0, levels, spec).unwrap();
    (g, ScaleFilters::from_partition(&p, spec).unwrap())
}

/// f ∗ φ_k by explicit DFT sums on a one-axis grid.
fn naive_filter(f: &[f64], m: &[Complex64], n: usize) -> Vec<Complex64> {
    // the (−1)^k phase of the spectrum cancels between the two transforms
    let dft: Vec<Complex64> = (0..n)
        .map(|k| (0..n).map(|j| f[j] * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64)).sum())
        .collect();
    (0..n)
        .map(|j| (0..n).map(|k| dft[k] * m[k] * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64)).sum::<Complex64>() / n as f64)
        .collect()
}

fn ball_offsets(g: &EllipsoidGauge, spec: &GridSpec, k: i32) -> Vec<i64> {
    let n = spec.samples()[0] as i64;
    (-n / 2..n / 2).filter(|d| g.in_ball(k, &[*d as f64 * spec.spacing(0)])).collect()
}

#[test]
fn area_matches_direct_double_sum() {
    let spec = GridSpec::cube(1, 8.0, 64).unwrap();
    let (g, fl) = filters(&spec, (-2, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let vals: Vec<f64> = (0..64).map(|_| rng.gen::<f64>() - 0.5).collect();
    let f = Field::from_real(&spec, vals.clone()).unwrap();
    let s = lusin_area(&f, &fl, &g).unwrap();
    let n = 64usize;
    let mut oracle = vec![0.0; n];
    for (i, k) in fl.levels.iter().enumerate() {
        let fk = naive_filter(&vals, &fl.multipliers[i], n);
        let offs = ball_offsets(&g, &spec, *k);
        for x in 0..n {
            let acc: f64 = offs.iter().map(|d| fk[(x as i64 - d).rem_euclid(n as i64) as usize].norm_sqr()).sum();
            oracle[x] += acc / offs.len() as f64;
        }
    }
    for x in 0..n {
        assert!((s[x] - oracle[x].sqrt()).abs() < 1e-10, "{x}: {} {}", s[x], oracle[x].sqrt());
    }
}

#[test]
fn area_is_translation_equivariant_and_homogeneous() {
    let spec = GridSpec::cube(1, 16.0, 256).unwrap();
    let (g, fl) = filters(&spec, (-3, 3));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = band_limited(&spec, &vec![true; 256], &mut rng);
    let s = lusin_area(&f, &fl, &g).unwrap();
    let shifted = lusin_area(&f.shift(&[17]), &fl, &g).unwrap();
    for i in 0..256 {
        assert!((shifted[(i + 17) % 256] - s[i]).abs() < 1e-12);
    }
    let scaled = lusin_area(&f.scale(Complex64::new(0.0, -3.0)), &fl, &g).unwrap();
    for i in 0..256 {
        assert!((scaled[i] - 3.0 * s[i]).abs() < 1e-12 * (1.0 + s[i]));
    }
}

fn product_setup() -> (GridSpec, [EllipsoidGauge; 2], [ScaleFilters; 2]) {
    let s1 = GridSpec::cube(1, 8.0, 32).unwrap();
    let s2 = GridSpec::cube(1, 4.0, 16).unwrap();
    let (g1, f1) = filters(&s1, (-1, 1));
    let (g2, f2) = filters(&s2, (-2, 0));
    (GridSpec::product(&s1, &s2).unwrap(), [g1, g2], [f1, f2])
}

#[test]
fn product_area_factorizes_on_separable_input() {
    let (spec, g, fl) = product_setup();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = band_limited(&fl[0].spec, &vec![true; 32], &mut rng);
    let b = band_limited(&fl[1].spec, &vec![true; 16], &mut rng);
    let s = product_lusin_area(&Field::tensor(&a, &b).unwrap(), [&fl[0], &fl[1]], [&g[0], &g[1]]).unwrap();
    let sa = lusin_area(&a, &fl[0], &g[0]).unwrap();
    let sb = lusin_area(&b, &fl[1], &g[1]).unwrap();
    for i in 0..spec.len() {
        assert!((s[i] - sa[i / 16] * sb[i % 16]).abs() < 1e-10);
    }
    let z = product_lusin_area(&Field::zeros(&spec), [&fl[0], &fl[1]], [&g[0], &g[1]]).unwrap();
    assert!(z.iter().all(|v| *v == 0.0));
}

#[test]
fn product_area_matches_cone_form() {
    let (spec, g, fl) = product_setup();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = band_limited(&spec, &vec![true; spec.len()], &mut rng);
    let s = product_lusin_area(&f, [&fl[0], &fl[1]], [&g[0], &g[1]]).unwrap();
    let squares = product_scale_squares(&f, [&fl[0], &fl[1]]).unwrap();
    let (s1, s2) = (spec.factor_spec(0), spec.factor_spec(1));
    // Γ(x) = {(y, k₁, k₂) : y − x ∈ B_{k₁} × B_{k₂}}, integer counting in k
    for x in (0..spec.len()).step_by(7) {
        let (x1, x2) = ((x / 16) as i64, (x % 16) as i64);
        let mut acc = 0.0;
        for ((k1, k2), sq) in &squares {
            let o1 = ball_offsets(&g[0], &s1, *k1);
            let o2 = ball_offsets(&g[1], &s2, *k2);
            let mut inner = 0.0;
            for d1 in &o1 {
                for d2 in &o2 {
                    let y = (x1 + d1).rem_euclid(32) as usize * 16 + (x2 + d2).rem_euclid(16) as usize;
                    inner += sq[y];
                }
            }
            acc += inner / (o1.len() * o2.len()) as f64;
        }
        assert!((s[x] - acc.sqrt()).abs() < 1e-10, "{x}");
    }
}

#[test]
fn equivalence_report_is_dilation_covariant() {
    // f∘A⁻¹ on [−16,16) has the samples of f on [−8,8); the filter range shifts by one
    let big = GridSpec::cube(1, 16.0, 256).unwrap();
    let small = GridSpec::cube(1, 8.0, 256).unwrap();
    let (g, fb) = filters(&big, (-2, 3));
    let (_, fs) = filters(&small, (-3, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fam: Vec<Vec<f64>> = (0..4).map(|_| band_limited(&big, &vec![true; 256], &mut rng).re()).collect();
    let fb_fam: Vec<Field> = fam.iter().map(|v| Field::from_real(&big, v.clone()).unwrap()).collect();
    let fs_fam: Vec<Field> = fam.iter().map(|v| Field::from_real(&small, v.clone()).unwrap()).collect();
    let rb = equivalence_report(&fb_fam, |f| lusin_area(f, &fb, &g), 2.0, None, "1").unwrap();
    let rs = equivalence_report(&fs_fam, |f| lusin_area(f, &fs, &g), 2.0, None, "1").unwrap();
    for (a, b) in rb.rows.iter().zip(&rs.rows) {
        assert!((a.ratio - b.ratio).abs() < 1e-8, "{} {}", a.ratio, b.ratio);
    }
}
