use aniso_hardy::balls::BallFamily;
use aniso_hardy::weights::{ap_constant, ap_refinement, critical_index, doubling_report, product_ap_constant, Weight, WeightDescriptor};
use aniso_hardy::{EllipsoidGauge, ExpansiveDilation, GridSpec};
use proptest::prelude::*;

fn g1() -> EllipsoidGauge {
    EllipsoidGauge::build(&ExpansiveDilation::scalar(2.0).unwrap()).unwrap()
}

/// Direct sup over centres and levels of the two ball averages.
fn brute_ap(density: &[f64], fam: &BallFamily, p: f64) -> f64 {
    let n = density.len() as i64;
    let mut best = 0.0f64;
    for win in &fam.windows {
        let offs = win.offsets();
        for c in 0..n {
            let cells: Vec<f64> = offs.iter().map(|o| density[(c + o[0]).rem_euclid(n) as usize]).collect();
            let m = cells.len() as f64;
            let a = cells.iter().sum::<f64>() / m;
            let b = (cells.iter().map(|v| v.powf(-1.0 / (p - 1.0))).sum::<f64>() / m).powf(p - 1.0);
            best = best.max(a * b);
        }
    }
    best
}

fn spec64() -> GridSpec {
    GridSpec::cube(1, 8.0, 64).unwrap()
}

#[test]
fn ap_constant_matches_direct_sweep() {
    let g = g1();
    let spec = spec64();
    let fam = BallFamily::resolvable(&g, &spec, 0).unwrap();
    let d: Vec<f64> = (0..64).map(|i| 1.0 + ((i * 37) % 11) as f64 * 0.7).collect();
    let w = Weight::from_density(&spec, d.clone(), WeightDescriptor::Table { file: "inline".into() }).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let got = ap_constant(&w, p, &fam).unwrap().constant_estimate;
        let want = brute_ap(&d, &fam, p);
        assert!((got - want).abs() < 1e-12 * want, "p={p}: {got} vs {want}");
    }
}

#[test]
fn constant_weight_has_unit_constant() {
    let g = g1();
    let spec = spec64();
    let fam = BallFamily::resolvable(&g, &spec, 0).unwrap();
    for p in [1.0, 1.5, 4.0] {
        let c = ap_constant(&Weight::constant(&spec), p, &fam).unwrap().constant_estimate;
        assert!((c - 1.0).abs() < 1e-12);
    }
}

#[test]
fn vanishing_weight_on_a_ball_is_infinite() {
    let g = g1();
    let spec = spec64();
    let fam = BallFamily::resolvable(&g, &spec, 0).unwrap();
    let mut d = vec![1.0; 64];
    d[10] = 0.0;
    let w = Weight::from_density(&spec, d, WeightDescriptor::Table { file: "inline".into() }).unwrap();
    let r = ap_constant(&w, 2.0, &fam).unwrap();
    assert!(r.constant_estimate.is_infinite());
    assert!(Weight::from_density(&spec, vec![-1.0; 64], WeightDescriptor::Constant).is_err());
}

#[test]
fn power_weights_inside_and_outside_the_class() {
    let g = g1();
    let run = |alpha: f64| ap_refinement(&g, 1, 8.0, &[256, 512, 1024], 2.0, 0.1, |s| Weight::power(&g, s, alpha)).unwrap();
    for alpha in [-0.5, 0.5] {
        let r = run(alpha);
        assert!(r.stable && !r.divergent, "{alpha}: {r:?}");
    }
    for alpha in [-2.0, 1.5] {
        let r = run(alpha);
        assert!(r.divergent, "{alpha}: {r:?}");
    }
}

#[test]
fn product_power_constant_is_the_worse_factor() {
    let g = g1();
    let spec = GridSpec::product_1d(8.0, 64, 8.0, 64).unwrap();
    let f1 = BallFamily::resolvable(&g, &spec, 0).unwrap();
    let f2 = BallFamily::resolvable(&g, &spec, 1).unwrap();
    let w = Weight::product_power([&g, &g], &spec, [0.5, -0.3]).unwrap();
    let c = product_ap_constant(&w, 2.0, [&f1, &f2]).unwrap().constant_estimate;
    let fs = spec.factor_spec(0);
    let ff = BallFamily::resolvable(&g, &fs, 0).unwrap();
    let a = ap_constant(&Weight::power(&g, &fs, 0.5).unwrap(), 2.0, &ff).unwrap().constant_estimate;
    let b = ap_constant(&Weight::power(&g, &fs, -0.3).unwrap(), 2.0, &ff).unwrap().constant_estimate;
    assert!((c - a.max(b)).abs() < 1e-10 * c, "{c} {a} {b}");
    assert!(product_ap_constant(&w, 1.0, [&f1, &f2]).is_err());
}

#[test]
fn critical_index_conventions() {
    let ps = [1.5, 2.0, 3.0];
    assert_eq!(critical_index(&ps, |_| Ok(true)).unwrap(), 1.0);
    assert_eq!(critical_index(&ps, |_| Ok(false)).unwrap(), f64::INFINITY);
    assert_eq!(critical_index(&ps, |p| Ok(p >= 2.0)).unwrap(), 2.0);
    assert!(critical_index(&[2.0, 1.5], |_| Ok(true)).is_err());
}

#[test]
fn constant_weight_doubling_follows_ball_counts() {
    let g = g1();
    let spec = GridSpec::cube(1, 8.0, 256).unwrap();
    let r = doubling_report(&Weight::constant(&spec), 1.0, &g, 0, &[0, 100, 128], -3..=2).unwrap();
    assert!(r.fitted_c.is_finite() && r.fitted_c >= 1.0);
    assert!(r.checked > 0);
    // discrete balls are within one cell of b^k volume
    assert!(r.fitted_c < 4.0, "{r:?}");
}

proptest! {
    #[test]
    fn ap_constant_is_at_least_one_and_scale_free(
        d in prop::collection::vec(0.1f64..10.0, 64),
        c in 0.01f64..100.0,
        p in 1.2f64..4.0,
    ) {
        let g = g1();
        let spec = spec64();
        let fam = BallFamily::resolvable(&g, &spec, 0).unwrap();
        let w = Weight::from_density(&spec, d.clone(), WeightDescriptor::Table { file: "p".into() }).unwrap();
        let ws = Weight::from_density(&spec, d.iter().map(|v| v * c).collect(), WeightDescriptor::Table { file: "p".into() }).unwrap();
        let a = ap_constant(&w, p, &fam).unwrap().constant_estimate;
        let b = ap_constant(&ws, p, &fam).unwrap().constant_estimate;
        prop_assert!(a >= 1.0 - 1e-12);
        prop_assert!((a - b).abs() < 1e-9 * a);
    }
}
