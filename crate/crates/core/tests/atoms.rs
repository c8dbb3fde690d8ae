use aniso_hardy::atoms::*;
use aniso_hardy::cubes::DyadicRectangle;
use aniso_hardy::frames::Profile;
use aniso_hardy::weights::Weight;
use aniso_hardy::{EllipsoidGauge, Error, ExpansiveDilation, Field, GridSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauge() -> EllipsoidGauge {
    EllipsoidGauge::build(&ExpansiveDilation::scalar(2.0).unwrap()).unwrap()
}

fn system(n: usize) -> (HardySystem, AdmissibleTriplet) {
    let g = gauge();
    let spec = GridSpec::product_1d(8.0, n, 8.0, n).unwrap();
    let tri = AdmissibleTriplet::new(1.0, 2.0, None, 1.0, [1.0, 1.0]).unwrap();
    let sys = HardySystem::build([&g, &g], &spec, Weight::constant(&spec), tri.frame_order(), Profile::default()).unwrap();
    (sys, tri)
}

/// A modulated Gaussian bump projected onto the reproduced band.
fn bump(sys: &HardySystem, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
    let w = [rng.gen_range(2.0..4.0), rng.gen_range(2.0..4.0)];
    let raw = Field::from_fn(&sys.spec, |x| {
        let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
        Complex64::new((-r2).exp() * (w[0] * x[0] + w[1] * x[1]).cos(), 0.0)
    });
    let mask: Vec<f64> = sys.covered_mask().iter().map(|m| if *m { 1.0 } else { 0.0 }).collect();
    raw.spectrum().mul_real(&mask).to_field().real_part()
}

#[test]
fn decomposition_end_to_end() {
    let (sys, tri) = system(256);
    let mut ratios = Vec::new();
    for seed in 0..2 {
        let f = bump(&sys, seed);
        let d = atomic_decompose(&f, &sys, &tri).unwrap();
        assert!(!d.atoms.is_empty());
        assert_eq!(d.unassigned, 0);
        let err = d.reconstruct().sub(&f).unwrap().l2_norm() / f.l2_norm();
        assert!(err < 1e-6, "{err}");
        for a in &d.atoms {
            let r = validate_atom(a, &tri, &sys.weight, &sys.trees);
            assert!(r.passed(), "{:?}", r.failures);
        }
        ratios.push(d.coefficient_ratio());
    }
    assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
}

#[test]
fn zero_input_gives_empty_decomposition() {
    let (sys, tri) = system(128);
    let d = atomic_decompose(&Field::zeros(&sys.spec), &sys, &tri).unwrap();
    assert!(d.atoms.is_empty());
    assert_eq!(d.coefficient_sum, 0.0);
}

#[test]
fn doubling_the_input_shifts_the_levels() {
    let (sys, tri) = system(128);
    let f = bump(&sys, 3);
    let d1 = atomic_decompose(&f, &sys, &tri).unwrap();
    let d2 = atomic_decompose(&f.scale(Complex64::new(2.0, 0.0)), &sys, &tri).unwrap();
    assert_eq!(d1.atoms.len(), d2.atoms.len());
    for (a, b) in d1.atoms.iter().zip(&d2.atoms) {
        assert_eq!(b.k, a.k + 1);
        assert!((b.lambda - 2.0 * a.lambda).abs() < 1e-12 * a.lambda);
        assert_eq!(a.omega, b.omega);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
    }
}

#[test]
fn insufficient_frame_moments_are_rejected() {
    let (sys, _) = system(128);
    let tri = AdmissibleTriplet::new(1.0, 2.0, Some([1, 0]), 1.0, [1.0, 1.0]).unwrap();
    let f = bump(&sys, 0);
    assert!(matches!(atomic_decompose(&f, &sys, &tri), Err(Error::FrameMomentDeficit { .. })));
}

#[test]
fn rectangular_atom_fixtures() {
    let (sys, _) = system(128);
    let tri = AdmissibleTriplet::new(1.0, 2.0, Some([1, 1]), 1.0, [1.0, 1.0]).unwrap();
    let t = &sys.trees;
    let l1 = t.trees[0].finest();
    let l2 = t.trees[1].finest() - 1;
    let rect = DyadicRectangle { level1: l1, id1: 3, level2: l2, id2: 1 };
    let mut v = rectangular_bump(t, &rect, tri.s);
    normalize_rectangular(&mut v, &rect, t, &sys.weight, tri.p, tri.q);
    let atom = RectangularAtom { rect, values: v.clone() };
    let r = validate_rectangular_atom(&atom, &tri, &sys.weight, t);
    assert!(r.passed(), "{:?}", r.failures);
    assert!((r.size_margin - 1.0).abs() < 1e-9);
    let doubled = RectangularAtom { rect, values: v.iter().map(|x| 2.0 * x).collect() };
    let r2 = validate_rectangular_atom(&doubled, &tri, &sys.weight, t);
    assert!(!r2.passed());
    assert!((r2.size_margin - 2.0).abs() < 1e-9);
    let zero = RectangularAtom { rect, values: vec![0.0; v.len()] };
    assert!(validate_rectangular_atom(&zero, &tri, &sys.weight, t).passed());
    // an unsubtracted bump keeps its mean and fails the moment clause
    let raw = RectangularAtom { rect, values: v.iter().map(|x| x.abs()).collect() };
    assert!(!validate_rectangular_atom(&raw, &tri, &sys.weight, t).moments_ok);
}

#[test]
fn doubled_atom_fails_particle_sum_by_two_to_the_q() {
    let (sys, tri) = system(128);
    let d = atomic_decompose(&bump(&sys, 1), &sys, &tri).unwrap();
    let a = &d.atoms[0];
    let base = validate_atom(a, &tri, &sys.weight, &sys.trees);
    let mut b = a.clone();
    b.values.iter_mut().for_each(|v| *v *= 2.0);
    b.particles.iter_mut().for_each(|p| p.values.iter_mut().for_each(|v| *v *= 2.0));
    let r = validate_atom(&b, &tri, &sys.weight, &sys.trees);
    assert!(!r.passed());
    assert!((r.particle_margin / base.particle_margin - 4.0).abs() < 1e-9);
}

#[test]
fn truncation_at_full_range_is_exact() {
    let (sys, tri) = system(128);
    let f = bump(&sys, 2);
    let d = atomic_decompose(&f, &sys, &tri).unwrap();
    let (full, rep) = finite_truncate(&d, &sys, &f, 1000, 1000, tri.q).unwrap();
    assert_eq!(full.values(), d.reconstruct().values());
    assert_eq!(rep.tail_norm_q, 0.0);
    let (f0, rep0) = finite_truncate(&d, &sys, &f, 0, 1000, tri.q).unwrap();
    let k0 = d.partial_sum(|l| l.k == 0);
    assert_eq!(f0.values(), k0.values());
    let direct = f.sub(&f0).unwrap().l2_norm();
    assert!((rep0.residual_l2 - direct).abs() < 1e-10);
}

#[test]
fn key_estimate_on_empty_and_single_rectangle() {
    let (sys, _) = system(128);
    let f = bump(&sys, 4);
    let e = key_estimate_check(&sys, &f, &[]).unwrap();
    assert_eq!(e.quotient_sup, 0.0);
    let t = &sys.trees;
    let l1 = t.level_for_scale(0, sys.frame.pairs[0].levels().0);
    let l2 = t.level_for_scale(1, sys.frame.pairs[1].levels().0);
    let r = DyadicRectangle { level1: l1, id1: 0, level2: l2, id2: 0 };
    let e = key_estimate_check(&sys, &f, &[r]).unwrap();
    assert!(e.quotient_sup.is_finite());
}

#[test]
fn fine_decay_slope_tracks_moment_order() {
    let g = gauge();
    let spec = GridSpec::cube(1, 32.0, 65536).unwrap();
    let f = Field::from_fn_centered(&spec, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0));
    let ks: Vec<i32> = (-5..=3).collect();
    let mut slopes = Vec::new();
    for s in 0..2 {
        let psi = gaussian_derivative(s);
        let env = decay_envelope_check(&f, &psi, s, 1.0, &g, &ks).unwrap();
        assert!((env.fine_slope / env.predicted_fine_slope - 1.0).abs() < 0.1, "{env:?}");
        assert!(env.coarse_slope < 0.0);
        assert!(env.fitted_c.is_finite());
        slopes.push(env.fine_slope);
    }
    assert!((slopes[1] - slopes[0] - 1.0).abs() < 0.15);
}

#[test]
fn product_envelope_respects_all_quadrants() {
    let g = gauge();
    let spec = GridSpec::product_1d(16.0, 512, 16.0, 512).unwrap();
    let f = Field::from_fn(&spec, |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(), 0.0));
    let p0 = gaussian_derivative(0);
    let p1 = gaussian_derivative(1);
    let env = product_decay_envelope(&f, [&p0, &p1], [0, 1], [&g, &g], &[-2, -1, 0, 1, 2]).unwrap();
    assert!(env.worst_ratio <= 1.0 + 1e-12);
    assert!(env.quadrant_c.iter().flatten().all(|c| c.is_finite() && *c > 0.0));
}
