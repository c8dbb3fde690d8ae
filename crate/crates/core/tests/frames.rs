use aniso_hardy::frames::*;
use aniso_hardy::{validate_expansive, EllipsoidGauge, ExpansiveDilation, Field, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauge(rows: &[Vec<f64>]) -> EllipsoidGauge {
    EllipsoidGauge::build(&validate_expansive(rows).unwrap()).unwrap()
}

fn dyadic_pair(n: usize, half: f64) -> FramePair {
    let spec = GridSpec::cube(1, half, n).unwrap();
    FramePair::build(&gauge(&[vec![2.0]]), &spec, 1, Profile::default(), None).unwrap()
}

#[test]
fn partition_telescopes_at_random_covered_frequencies() {
    let d = validate_expansive(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
    let spec = GridSpec::cube(2, 16.0, 128).unwrap();
    let p = PartitionOfUnity::build(&d, Profile::default(), 1.0, (-2, 3), &spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut hits = 0;
    while hits < 1000 {
        let xi = [rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0)];
        if !p.is_covered(&xi) {
            continue;
        }
        hits += 1;
        let sum: f64 = (-2..=3).map(|t| p.phi_hat(t, &xi)).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
    let zero: f64 = (-2..=3).map(|t| p.phi_hat(t, &[0.0, 0.0])).sum();
    assert_eq!(zero, 0.0);
    assert!(!p.is_covered(&[0.0, 0.0]));
}

#[test]
fn partition_reproduces_band_limited_input() {
    let pair = dyadic_pair(1024, 16.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = band_limited(&pair.spec, &pair.covered_mask(), &mut rng);
    let r = pair.partition.reproduce(&f);
    assert!(r.rel_error < 1e-10, "{}", r.rel_error);
    let zero = pair.reproduce(&Field::zeros(&pair.spec)).unwrap();
    assert_eq!(zero.rel_error, 0.0);
}

#[test]
fn out_of_band_error_matches_parseval() {
    let pair = dyadic_pair(1024, 16.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let all = vec![true; pair.spec.len()];
    let f = band_limited(&pair.spec, &all, &mut rng);
    let r = pair.reproduce(&f).unwrap();
    assert!(r.out_of_band > 0.1);
    assert!((r.rel_error - r.predicted_error).abs() < 1e-8, "{} {}", r.rel_error, r.predicted_error);
}

#[test]
fn two_dimensional_pairs_are_certified() {
    for rows in [vec![vec![2.0, 0.0], vec![0.0, 4.0]], vec![vec![2.0, 1.0], vec![0.0, 2.0]]] {
        let spec = GridSpec::cube(2, 16.0, 256).unwrap();
        for s in [0, 1] {
            let pair = FramePair::build(&gauge(&rows), &spec, s, Profile::default(), None).unwrap();
            assert!(pair.certified(), "{rows:?} {:?}", pair.certificates);
            assert!(pair.certificates.annulus_ratio >= DIVISION_THRESHOLD);
            let mut rng = ChaCha8Rng::seed_from_u64(s as u64);
            let f = band_limited(&spec, &pair.covered_mask(), &mut rng);
            assert!(pair.reproduce(&f).unwrap().rel_error < 1e-6);
        }
    }
}

#[test]
fn product_frame_reconstructs() {
    let a = dyadic_pair(256, 4.0);
    let b = dyadic_pair(128, 8.0);
    let spec = GridSpec::product(&a.spec, &b.spec).unwrap();
    let frame = ProductFrame::new(&spec, a.clone(), b.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g1 = band_limited(&a.spec, &a.covered_mask(), &mut rng);
    let g2 = band_limited(&b.spec, &b.covered_mask(), &mut rng);
    let sep = Field::tensor(&g1, &g2).unwrap();
    assert!(frame.reproduce(&sep).unwrap().rel_error < 2e-6);
    let f = band_limited(&spec, &frame.covered_mask(), &mut rng);
    assert!(frame.reproduce(&f).unwrap().rel_error < 1e-5);
    assert_eq!(frame.reproduce(&Field::zeros(&spec)).unwrap().rel_error, 0.0);
    let c = frame.certificates();
    assert!(c.support_exact && c.moment_error < 1e-10 && c.pairing_error < 1e-10);
}

#[test]
fn partition_is_scale_covariant() {
    // f∘A⁻¹ on [−16,16) has the samples of f on [−8,8)
    let d = ExpansiveDilation::scalar(2.0).unwrap();
    let big = GridSpec::cube(1, 16.0, 512).unwrap();
    let small = GridSpec::cube(1, 8.0, 512).unwrap();
    let p = PartitionOfUnity::build(&d, Profile::default(), 1.0, (-3, 3), &big).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let vals: Vec<f64> = (0..512).map(|_| rng.gen::<f64>()).collect();
    let g = Field::from_real(&big, vals.clone()).unwrap();
    let f = Field::from_real(&small, vals).unwrap();
    for t in -2..=3 {
        let lhs = p.convolve(t, &g);
        let rhs = p.convolve(t - 1, &f);
        let err = lhs.values().iter().zip(rhs.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "t={t} err={err}");
    }
}

#[test]
fn partition_sum_bound_is_refinement_stable() {
    let d = ExpansiveDilation::scalar(2.0).unwrap();
    let bounds: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|n| {
            let spec = GridSpec::cube(1, 16.0, *n).unwrap();
            PartitionOfUnity::build(&d, Profile::default(), 1.0, (-4, 4), &spec).unwrap().sum_bound
        })
        .collect();
    assert!(bounds.iter().all(|b| b.is_finite() && *b >= 1.0 - 1e-12 && *b <= 2.0), "{bounds:?}");
}

#[test]
fn frame_descriptor_round_trips() {
    let json = r#"{"s":1,"profile":{"kind":"bump","inner":1.0,"outer":2.0},"levels":[-2,4]}"#;
    let d: FrameDescriptor = serde_json::from_str(json).unwrap();
    assert_eq!(d.profile.build().unwrap(), Profile::default());
    assert_eq!(d.levels, Some([-2, 4]));
    let bad = ProfileDescriptor { kind: "box".into(), inner: 1.0, outer: 2.0 };
    assert!(bad.build().is_err());
}

#[test]
fn unresolved_scale_is_rejected() {
    let spec = GridSpec::cube(1, 16.0, 64).unwrap();
    assert!(FramePair::build(&gauge(&[vec![2.0]]), &spec, 0, Profile::default(), Some((-6, -6))).is_err());
}
