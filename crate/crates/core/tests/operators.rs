use aniso_hardy::atoms::{atomic_decompose, AdmissibleTriplet, HardySystem, RectangularAtom};
use aniso_hardy::frames::Profile;
use aniso_hardy::operators::*;
use aniso_hardy::weights::Weight;
use aniso_hardy::{EllipsoidGauge, Error, ExpansiveDilation, Field, GridSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn system(n: usize) -> (HardySystem, AdmissibleTriplet) {
    let g = EllipsoidGauge::build(&ExpansiveDilation::scalar(2.0).unwrap()).unwrap();
    let spec = GridSpec::product_1d(8.0, n, 8.0, n).unwrap();
    let tri = AdmissibleTriplet::new(1.0, 2.0, None, 1.0, [1.0, 1.0]).unwrap();
    let sys = HardySystem::build([&g, &g], &spec, Weight::constant(&spec), tri.frame_order(), Profile::default()).unwrap();
    (sys, tri)
}

fn fine_levels(sys: &HardySystem) -> [std::ops::RangeInclusive<i32>; 2] {
    let t = &sys.trees.trees;
    [t[0].finest() - 1..=t[0].finest(), t[1].finest() - 1..=t[1].finest()]
}

fn atoms(sys: &HardySystem, tri: &AdmissibleTriplet, count: usize) -> Vec<RectangularAtom> {
    synthetic_rectangular_atoms(&sys.trees, &sys.weight, tri, fine_levels(sys), count, 11).unwrap()
}

fn as_fields(sys: &HardySystem, a: &[RectangularAtom]) -> Vec<Field> {
    a.iter().map(|a| Field::from_real(&sys.spec, a.values.clone()).unwrap()).collect()
}

#[test]
fn zero_operator_has_zero_sup() {
    let (sys, tri) = system(64);
    let r = atom_sup_bound(&SublinearOperator::zero(), &as_fields(&sys, &atoms(&sys, &tri, 10))).unwrap();
    assert_eq!(r.sup, 0.0);
    assert_eq!(r.count, 10);
}

#[test]
fn identity_sup_respects_the_size_condition() {
    let (sys, tri) = system(64);
    let a = atoms(&sys, &tri, 20);
    let op = SublinearOperator::identity(&sys.weight, tri.q).unwrap();
    for atom in &a {
        let wr = sys.weight.measure(&sys.trees.flat_cells(&atom.rect));
        let n = op.norm(&Field::from_real(&sys.spec, atom.values.clone()).unwrap()).unwrap();
        assert!(n / wr.powf(1.0 / tri.q - 1.0 / tri.p) <= 1.0 + 1e-9);
    }
}

#[test]
fn area_operator_is_bounded_on_atoms_and_decays_off_the_rectangle() {
    let (sys, tri) = system(128);
    let a = atoms(&sys, &tri, 100);
    let trees = sys.trees.clone();
    let op = SublinearOperator::area(sys, 2.0, None).unwrap();
    let r = atom_sup_bound(&op, &as_fields_spec(&trees.spec, &a)).unwrap();
    assert!(r.sup.is_finite() && r.sup > 0.0);
    assert!(r.quantiles.windows(2).all(|w| w[0] <= w[1]));
    let ex = CriterionExponents::new(1.0, 2.0, 2.0, 1.0).unwrap();
    let rep = rectangular_criterion(&op, &a[..8], &trees, &[0, 1, 2, 3], ex).unwrap();
    for c in &rep.curves {
        assert!(c.nonincreasing, "{:?}", c.tails);
        assert!(c.epsilon > 0.0, "{c:?}");
    }
}

fn as_fields_spec(spec: &GridSpec, a: &[RectangularAtom]) -> Vec<Field> {
    a.iter().map(|a| Field::from_real(spec, a.values.clone()).unwrap()).collect()
}

#[test]
fn identity_tail_vanishes_and_oversized_enlargement_is_empty() {
    let (sys, tri) = system(64);
    let a = atoms(&sys, &tri, 4);
    let op = SublinearOperator::identity(&sys.weight, tri.q).unwrap();
    let ex = CriterionExponents::new(1.0, 2.0, 2.0, 1.0).unwrap();
    let rep = rectangular_criterion(&op, &a, &sys.trees, &[0, 1, 40], ex).unwrap();
    for c in &rep.curves {
        assert_eq!(c.epsilon, f64::INFINITY);
        assert_eq!(c.tails[2], 0.0);
    }
}

#[test]
fn square_of_magnitude_is_not_sublinear() {
    let spec = GridSpec::cube(1, 4.0, 32).unwrap();
    let op = SublinearOperator::new("square", 1.0, 1.0, None, Box::new(|f: &Field| Ok(f.abs().iter().map(|v| v * v).collect()))).unwrap();
    let f = Field::from_fn_centered(&spec, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
    assert!(matches!(op.check_subadditivity(&[(f.clone(), f)]), Err(Error::SubadditivityViolation(_))));
}

#[test]
fn bundled_operators_are_subadditive_on_random_pairs() {
    let (sys, tri) = system(64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rand_field = || Field::from_real(&sys.spec, (0..sys.spec.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let pairs: Vec<(Field, Field)> = (0..5).map(|_| (rand_field(), rand_field())).collect();
    let trees = sys.trees.clone();
    let lv = fine_levels(&sys);
    let id = SublinearOperator::identity(&sys.weight, tri.q).unwrap();
    assert!(id.check_subadditivity(&pairs).unwrap() >= 0.0);
    let avg = SublinearOperator::rectangle_averaging(trees, lv, 2.0).unwrap();
    assert!(avg.check_subadditivity(&pairs).unwrap() >= 0.0);
    let area = SublinearOperator::area(sys, 2.0, None).unwrap();
    assert!(area.check_subadditivity(&pairs).unwrap() >= 0.0);
}

#[test]
fn extension_inequality_along_a_decomposition() {
    let (sys, tri) = system(128);
    let f = Field::from_fn(&sys.spec, |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp() * (3.0 * x[0]).cos(), 0.0));
    let mask: Vec<f64> = sys.covered_mask().iter().map(|m| if *m { 1.0 } else { 0.0 }).collect();
    let f = f.spectrum().mul_real(&mask).to_field().real_part();
    let d = atomic_decompose(&f, &sys, &tri).unwrap();
    let spec = sys.spec.clone();
    let op = SublinearOperator::area(sys, 2.0, None).unwrap();
    let sup = atom_sup_bound(&op, &pipeline_atoms(&d).unwrap()).unwrap().sup;
    let r = extend_sublinear(&op, &d, &f, 1.0, sup).unwrap();
    assert!(r.lhs <= r.rhs * (1.0 + 1e-9));
    assert!(r.direct_norm <= r.assembled_bound * (1.0 + 1e-6));
    assert!(r.ratio.is_finite());
    assert!(extend_sublinear(&op, &d, &f, 0.5, sup).is_err());
    // the identity is linear, so γ = 1 is the triangle inequality
    let id = SublinearOperator::identity(&Weight::constant(&spec), 2.0).unwrap();
    let sup = atom_sup_bound(&id, &pipeline_atoms(&d).unwrap()).unwrap().sup;
    let r = extend_sublinear(&id, &d, &f, 1.0, sup).unwrap();
    assert!(r.lhs <= r.rhs * (1.0 + 1e-9));
    if d.atoms.len() == 1 {
        assert!((r.lhs - r.rhs).abs() < 1e-9 * r.rhs);
    }
}
