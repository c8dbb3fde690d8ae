//! Sublinear operators acting on Hardy-space atoms: uniform atom bounds,
//! the γ-sublinear extension check along an atomic series, and the decay
//! criterion for rectangular atoms.
//!
//! An operator is represented by its pointwise magnitude |Tf|(x) on the
//! grid together with the target norm ‖·‖_{L^r_w}; every bundled operator
//! is sublinear in that pointwise sense.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::{normalize_rectangular, rectangular_bump, validate_rectangular_atom, AdmissibleTriplet, AtomicDecomposition, HardySystem, RectangularAtom};
use crate::cubes::{DyadicRectangle, ProductTrees};
use crate::error::{Error, Result};
use crate::field::{lp_norm_values, Field};
use crate::grid::neumaier_sum;
use crate::weights::Weight;

/// Slack allowed in subadditivity comparisons.
pub const SUBADDITIVITY_SLACK: f64 = 1e-9;

type Evaluator = Box<dyn Fn(&Field) -> Result<Vec<f64>> + Send + Sync>;

/// f ↦ |Tf| with values measured in L^r_w.
pub struct SublinearOperator {
    pub name: String,
    /// ‖·‖^γ is subadditive on the target.
    pub gamma: f64,
    /// Target exponent r.
    pub exponent: f64,
    weight: Option<Vec<f64>>,
    eval: Evaluator,
}

impl std::fmt::Debug for SublinearOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SublinearOperator").field("name", &self.name).field("gamma", &self.gamma).field("exponent", &self.exponent).finish()
    }
}

impl SublinearOperator {
    pub fn new(name: &str, gamma: f64, exponent: f64, weight: Option<&Weight>, eval: Evaluator) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!("gamma = {gamma} must lie in (0, 1]")));
        }
        if !(exponent > 0.0) {
            return Err(Error::InvalidArgument(format!("target exponent {exponent} must be positive")));
        }
        Ok(Self { name: name.into(), gamma, exponent, weight: weight.map(|w| w.density().to_vec()), eval })
    }

    /// T = 0.
    pub fn zero() -> Self {
        Self::new("zero", 1.0, 2.0, None, Box::new(|f: &Field| Ok(vec![0.0; f.len()]))).unwrap()
    }

    /// |f| measured in L^q_w.
    pub fn identity(weight: &Weight, q: f64) -> Result<Self> {
        Self::new("identity", 1.0_f64.min(q), q, Some(weight), Box::new(|f: &Field| Ok(f.abs())))
    }

    /// The product Lusin-area function of the system, in L^r (unweighted
    /// when `weight` is `None`).
    pub fn area(system: HardySystem, r: f64, weight: Option<&Weight>) -> Result<Self> {
        let spec = system.spec.clone();
        Self::new(
            "area",
            1.0_f64.min(r),
            r,
            weight,
            Box::new(move |f: &Field| {
                if f.spec() != &spec {
                    return Err(Error::SpecMismatch);
                }
                system.area(f)
            }),
        )
    }

    /// sup over tree rectangles R ∋ x with levels in `levels` of |mean_R f|,
    /// measured in L^r.
    pub fn rectangle_averaging(trees: ProductTrees, levels: [std::ops::RangeInclusive<i32>; 2], r: f64) -> Result<Self> {
        for (i, lv) in levels.iter().enumerate() {
            if lv.clone().any(|l| trees.trees[i].level(l).is_none()) {
                return Err(Error::InvalidArgument(format!("factor {} levels {lv:?} are not all in the tree", i + 1)));
            }
        }
        Self::new(
            "rectangle_averaging",
            1.0_f64.min(r),
            r,
            None,
            Box::new(move |f: &Field| {
                if f.spec() != &trees.spec {
                    return Err(Error::SpecMismatch);
                }
                Ok(rectangle_average_sup(f, &trees, &levels))
            }),
        )
    }

    /// |Tf| on the grid.
    pub fn magnitude(&self, f: &Field) -> Result<Vec<f64>> {
        (self.eval)(f)
    }

    /// ‖Tf‖_{L^r_w}.
    pub fn norm(&self, f: &Field) -> Result<f64> {
        let m = self.magnitude(f)?;
        lp_norm_values(&m, f.spec().cell_volume(), self.exponent, self.weight.as_deref())
    }

    /// ∫_E |Tf|^r w over a cell mask.
    pub fn restricted_integral(&self, magnitude: &[f64], cell_volume: f64, mask: &[bool]) -> f64 {
        let r = self.exponent;
        let w = self.weight.as_deref();
        neumaier_sum(magnitude.iter().enumerate().filter(|(i, _)| mask[*i]).map(|(i, m)| m.powf(r) * w.map_or(1.0, |w| w[i]))) * cell_volume
    }

    /// Checks ‖T(f+g)‖^γ ≤ ‖Tf‖^γ + ‖Tg‖^γ on each pair and returns the
    /// smallest margin rhs − lhs.
    pub fn check_subadditivity(&self, pairs: &[(Field, Field)]) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for (i, (f, g)) in pairs.iter().enumerate() {
            let lhs = self.norm(&f.add(g)?)?.powf(self.gamma);
            let rhs = self.norm(f)?.powf(self.gamma) + self.norm(g)?.powf(self.gamma);
            if lhs > rhs + SUBADDITIVITY_SLACK * (1.0 + rhs) {
                return Err(Error::SubadditivityViolation(format!("pair {i}: {lhs} > {rhs}")));
            }
            worst = worst.min(rhs - lhs);
        }
        Ok(worst)
    }
}

fn rectangle_average_sup(f: &Field, trees: &ProductTrees, levels: &[std::ops::RangeInclusive<i32>; 2]) -> Vec<f64> {
    let vals = f.values();
    let n2 = trees.n2();
    let mut out = vec![0.0f64; f.len()];
    for l1 in levels[0].clone() {
        let lab1 = &trees.trees[0].level(l1).expect("validated").labels;
        for l2 in levels[1].clone() {
            let lv2 = trees.trees[1].level(l2).expect("validated");
            let (m1, m2) = (trees.trees[0].level(l1).unwrap().cubes.len(), lv2.cubes.len());
            let mut sums = vec![num_complex::Complex64::new(0.0, 0.0); m1 * m2];
            let mut counts = vec![0usize; m1 * m2];
            for (x, v) in vals.iter().enumerate() {
                let id = lab1[x / n2] * m2 + lv2.labels[x % n2];
                sums[id] += v;
                counts[id] += 1;
            }
            for (x, o) in out.iter_mut().enumerate() {
                let id = lab1[x / n2] * m2 + lv2.labels[x % n2];
                *o = o.max(sums[id].norm() / counts[id] as f64);
            }
        }
    }
    out
}

/// Distribution of ‖Ta‖ over an atom sample.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AtomSupReport {
    pub operator: String,
    pub count: usize,
    pub sup: f64,
    /// Quantiles at 0, 0.25, 0.5, 0.75, 1.
    pub quantiles: [f64; 5],
    pub values: Vec<f64>,
}

/// max_a ‖Ta‖ over the given atoms, evaluated in parallel.
pub fn atom_sup_bound(op: &SublinearOperator, atoms: &[Field]) -> Result<AtomSupReport> {
    let values: Vec<f64> = atoms.par_iter().map(|a| op.norm(a)).collect::<Result<_>>()?;
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let q = |t: f64| {
        if sorted.is_empty() {
            0.0
        } else {
            sorted[((sorted.len() - 1) as f64 * t).round() as usize]
        }
    };
    Ok(AtomSupReport {
        operator: op.name.clone(),
        count: values.len(),
        sup: sorted.last().copied().unwrap_or(0.0),
        quantiles: [q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)],
        values,
    })
}

/// The two sides of the γ-sublinear extension bound along one series.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExtensionReport {
    pub gamma: f64,
    pub atoms: usize,
    /// ‖T(Σ λ_k a_k)‖^γ.
    pub lhs: f64,
    /// Σ |λ_k|^γ ‖T a_k‖^γ.
    pub rhs: f64,
    /// ‖Tf‖ for the input itself.
    pub direct_norm: f64,
    /// sup_a ‖Ta‖ · (Σ |λ_k|^γ)^{1/γ}.
    pub assembled_bound: f64,
    /// (Σ |λ_k|^p)^{1/p}, the atomic Hardy-norm proxy.
    pub coefficient_norm: f64,
    /// direct_norm / coefficient_norm.
    pub ratio: f64,
}

/// Evaluates T on the reconstructed series and on each atom and checks the
/// γ-subadditive bound; `f` is the decomposed input and `sup_bound` an
/// atom bound from [`atom_sup_bound`].
pub fn extend_sublinear(op: &SublinearOperator, decomp: &AtomicDecomposition, f: &Field, gamma: f64, sup_bound: f64) -> Result<ExtensionReport> {
    if !(gamma >= decomp.p && gamma <= 1.0) {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} must lie in [p, 1] with p = {}", decomp.p)));
    }
    if !sup_bound.is_finite() {
        return Err(Error::InvalidArgument("atom sup bound is not finite".into()));
    }
    let spec = &decomp.spec;
    let series = decomp.reconstruct();
    let lhs = op.norm(&series)?.powf(gamma);
    let terms: Vec<f64> = decomp
        .atoms
        .par_iter()
        .map(|a| {
            let fa = Field::from_real(spec, a.values.clone())?;
            Ok(a.lambda.abs().powf(gamma) * op.norm(&fa)?.powf(gamma))
        })
        .collect::<Result<_>>()?;
    let rhs = neumaier_sum(terms.iter().cloned());
    if lhs > rhs + SUBADDITIVITY_SLACK * (1.0 + rhs) {
        return Err(Error::SubadditivityViolation(format!("series of {} atoms: {lhs} > {rhs}", decomp.atoms.len())));
    }
    let lam_gamma = neumaier_sum(decomp.atoms.iter().map(|a| a.lambda.abs().powf(gamma)));
    let coefficient_norm = neumaier_sum(decomp.atoms.iter().map(|a| a.lambda.abs().powf(decomp.p))).powf(1.0 / decomp.p);
    let direct_norm = op.norm(f)?;
    Ok(ExtensionReport {
        gamma,
        atoms: decomp.atoms.len(),
        lhs,
        rhs,
        direct_norm,
        assembled_bound: sup_bound * lam_gamma.powf(1.0 / gamma),
        coefficient_norm,
        ratio: if coefficient_norm > 0.0 { direct_norm / coefficient_norm } else { 0.0 },
    })
}

/// Exponents tying the atom class to the operator's target space.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CriterionExponents {
    pub p: f64,
    pub q: f64,
    pub q0: f64,
    pub q1: f64,
}

impl CriterionExponents {
    pub fn new(p: f64, q: f64, q0: f64, q1: f64) -> Result<Self> {
        let gap = (1.0 / q - 1.0 / p) - (1.0 / q0 - 1.0 / q1);
        if !(p > 0.0 && q > 0.0 && q0 > 0.0 && q1 > 0.0) || gap.abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("1/q − 1/p must equal 1/q0 − 1/q1 (gap {gap})")));
        }
        Ok(Self { p, q, q0, q1 })
    }
}

/// Tail integrals of one rectangular atom and the fitted decay exponent.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DecayCurve {
    pub rect: DyadicRectangle,
    pub ks: Vec<i32>,
    /// ∫ over the complement of R_{1,k} × R_{2,k} of |Ta|^r w.
    pub tails: Vec<f64>,
    pub nonincreasing: bool,
    /// +∞ when the tail vanishes from the first positive entry on.
    pub epsilon: f64,
}

/// Decay fits for every atom.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RectangularCriterionReport {
    pub operator: String,
    pub exponents: CriterionExponents,
    pub curves: Vec<DecayCurve>,
    pub min_epsilon: f64,
}

/// For each atom a on R and each k, integrates |Ta|^r w outside the
/// enlarged rectangle x_R + B_{v(ℓ−1)+u+5σ+k} per factor, then fits
/// tail_k ≈ C·max(b₁, b₂)^{−kε} by least squares on the positive tails.
pub fn rectangular_criterion(op: &SublinearOperator, atoms: &[RectangularAtom], trees: &ProductTrees, ks: &[i32], exponents: CriterionExponents) -> Result<RectangularCriterionReport> {
    let spec = &trees.spec;
    let cv = spec.cell_volume();
    let bmax = trees.trees[0].gauge().b().max(trees.trees[1].gauge().b());
    let curves: Vec<DecayCurve> = atoms
        .par_iter()
        .map(|a| {
            let ta = op.magnitude(&Field::from_real(spec, a.values.clone())?)?;
            let tails: Vec<f64> = ks
                .iter()
                .map(|k| {
                    let inside = enlarged_rectangle(trees, &a.rect, 5, *k);
                    let outside: Vec<bool> = inside.iter().map(|v| !v).collect();
                    op.restricted_integral(&ta, cv, &outside)
                })
                .collect();
            let nonincreasing = tails.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-300);
            Ok(DecayCurve { rect: a.rect, ks: ks.to_vec(), epsilon: fit_epsilon(ks, &tails, bmax), tails, nonincreasing })
        })
        .collect::<Result<_>>()?;
    let min_epsilon = curves.iter().map(|c| c.epsilon).fold(f64::INFINITY, f64::min);
    Ok(RectangularCriterionReport { operator: op.name.clone(), exponents, curves, min_epsilon })
}

/// Product cell mask of x_{R_i} + B_{v_i(ℓ_i−1)+u_i+pad·σ_i+k}.
pub fn enlarged_rectangle(trees: &ProductTrees, r: &DyadicRectangle, pad: i32, k: i32) -> Vec<bool> {
    let f = |i: usize, l: i32, id: usize| {
        let t = &trees.trees[i];
        let j = t.v() * (l - 1) + t.u() + pad * t.gauge().sigma() as i32 + k;
        t.ball_mask(t.cube(l, id).center, j)
    };
    let m1 = f(0, r.level1, r.id1);
    let m2 = f(1, r.level2, r.id2);
    let n2 = m2.len();
    (0..m1.len() * n2).map(|x| m1[x / n2] && m2[x % n2]).collect()
}

fn fit_epsilon(ks: &[i32], tails: &[f64], b: f64) -> f64 {
    let first = tails.iter().position(|t| *t > 0.0);
    let Some(first) = first else { return f64::INFINITY };
    let pts: Vec<(f64, f64)> = ks[first..].iter().zip(&tails[first..]).filter(|(_, t)| **t > 0.0).map(|(k, t)| (*k as f64, t.ln())).collect();
    // a single positive entry followed by zeros decays faster than any rate
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    -(sxy / sxx) / b.ln()
}

/// `count` rectangular atoms on random rectangles with levels in `levels`:
/// moment-free bumps with random signs per factor, normalized to the size
/// bound and kept only when they validate.
pub fn synthetic_rectangular_atoms(trees: &ProductTrees, weight: &Weight, triplet: &AdmissibleTriplet, levels: [std::ops::RangeInclusive<i32>; 2], count: usize, seed: u64) -> Result<Vec<RectangularAtom>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, i: usize| -> Result<(i32, usize)> {
        let lv: Vec<i32> = levels[i].clone().filter(|l| trees.trees[i].level(*l).is_some()).collect();
        if lv.is_empty() {
            return Err(Error::InvalidArgument(format!("no tree level of factor {} in {:?}", i + 1, levels[i])));
        }
        let l = lv[rng.gen_range(0..lv.len())];
        Ok((l, rng.gen_range(0..trees.trees[i].level(l).unwrap().cubes.len())))
    };
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 20 * count + 100 {
            return Err(Error::InvalidArgument(format!("only {} of {count} synthetic atoms validated", out.len())));
        }
        let (l1, id1) = pick(&mut rng, 0)?;
        let (l2, id2) = pick(&mut rng, 1)?;
        let rect = DyadicRectangle { level1: l1, id1, level2: l2, id2 };
        let mut values = rectangular_bump(trees, &rect, triplet.s);
        if rng.gen_bool(0.5) {
            values.iter_mut().for_each(|v| *v = -*v);
        }
        if values.iter().all(|v| *v == 0.0) {
            continue;
        }
        normalize_rectangular(&mut values, &rect, trees, weight, triplet.p, triplet.q);
        let atom = RectangularAtom { rect, values };
        if validate_rectangular_atom(&atom, triplet, weight, trees).passed() {
            out.push(atom);
        }
    }
    Ok(out)
}

/// The atoms a_k of a decomposition as fields.
pub fn pipeline_atoms(decomp: &AtomicDecomposition) -> Result<Vec<Field>> {
    decomp.atoms.iter().map(|a| Field::from_real(&decomp.spec, a.values.clone())).collect()
}
