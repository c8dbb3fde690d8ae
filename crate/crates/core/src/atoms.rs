//! Weighted product Hardy spaces on sampled grids: admissible parameters,
//! the area-function quasi-norm, the constructive atomic decomposition,
//! atom validators, the key pointwise estimate, finite truncation and the
//! decay envelopes of ψ-convolutions.
//!
//! The decomposition works on a product of two one-axis factors. Every
//! dyadic rectangle R at levels (ℓ₁, ℓ₂) carries the frame scale t with
//! ℓᵢ = level_for_scale(tᵢ), and e_R = θ_t ∗ (χ_R · ψ_t ∗ f). Summing e_R
//! over all rectangles reproduces f on the covered band.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::area::{product_lusin_area, tensor, ScaleFilters};
use crate::balls::BallFamily;
use crate::cubes::{default_c0, expand_open_set, ColumnTable, DyadicCubeTree, DyadicRectangle, ProductTrees};
use crate::dilation::EllipsoidGauge;
use crate::error::{Error, Result};
use crate::field::{lp_norm_values, Field};
use crate::frames::{FramePair, ProductFrame, Profile};
use crate::grid::{neumaier_sum, GridSpec};
use crate::maximal::{grand_maximal, strong_maximal, TestFunctionDictionary};
use crate::weights::Weight;

/// Relative tolerance of slice moments.
pub const MOMENT_TOLERANCE: f64 = 1e-8;
/// Relative slack of the size inequalities.
pub const SIZE_SLACK: f64 = 1e-9;

/// Parameters (p, q, s⃗) checked against the weight's critical index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleTriplet {
    pub p: f64,
    pub q: f64,
    pub s: [u32; 2],
    pub q_w: f64,
    pub zeta_minus: [f64; 2],
    /// Whether s⃗ also meets the strengthened bounds used for finite atomic norms.
    pub strengthened: bool,
}

/// Least sᵢ with sᵢ ≥ ⌊(q_w/p − 1)/ζᵢ₋⌋.
pub fn minimal_moments(p: f64, q_w: f64, zeta_minus: [f64; 2]) -> [u32; 2] {
    zeta_minus.map(|z| ((q_w / p - 1.0) / z).floor().max(0.0) as u32)
}

/// Checks p ∈ (0,1], q ∈ [2,∞) ∩ (q_w,∞) and the moment bound; returns the
/// verdict and the minimal compliant s⃗.
pub fn admissible(p: f64, q: f64, s: [u32; 2], q_w: f64, zeta_minus: [f64; 2]) -> (bool, [u32; 2]) {
    let smin = minimal_moments(p, q_w, zeta_minus);
    let ok = p > 0.0 && p <= 1.0 && q >= 2.0 && q > q_w && s[0] >= smin[0] && s[1] >= smin[1];
    (ok, smin)
}

/// Least integers with sᵢ > [(q_w/p) − 1 + (q_w/p)(v_j/v_i) log_{b_i} b_j]/ζᵢ₋ − 1.
pub fn strengthened_moments(p: f64, q_w: f64, v: [i32; 2], b: [f64; 2], zeta_minus: [f64; 2]) -> [u32; 2] {
    let r = q_w / p;
    let one = |i: usize, j: usize| {
        let bound = (r - 1.0 + r * (v[j] as f64 / v[i] as f64) * (b[j].ln() / b[i].ln())) / zeta_minus[i] - 1.0;
        (bound.floor() + 1.0).max(0.0) as u32
    };
    [one(0, 1), one(1, 0)]
}

impl AdmissibleTriplet {
    /// `s = None` picks the minimal admissible s⃗.
    pub fn new(p: f64, q: f64, s: Option<[u32; 2]>, q_w: f64, zeta_minus: [f64; 2]) -> Result<Self> {
        let s = s.unwrap_or_else(|| minimal_moments(p, q_w, zeta_minus));
        let (ok, smin) = admissible(p, q, s, q_w, zeta_minus);
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "(p, q, s) = ({p}, {q}, {s:?}) is not admissible for q_w = {q_w} (minimal s {smin:?})"
            )));
        }
        Ok(Self { p, q, s, q_w, zeta_minus, strengthened: false })
    }

    /// Records whether s⃗ meets [`strengthened_moments`].
    pub fn with_strengthened(mut self, v: [i32; 2], b: [f64; 2]) -> Self {
        let m = strengthened_moments(self.p, self.q_w, v, b, self.zeta_minus);
        self.strengthened = self.s[0] >= m[0] && self.s[1] >= m[1];
        self
    }

    /// θ moment order the decomposition needs: 2 max(s₁, s₂) + 1.
    pub fn frame_order(&self) -> u32 {
        2 * self.s[0].max(self.s[1]) + 1
    }
}

/// Everything the decomposition runs on: product grid, frames, trees,
/// ball families and weight.
#[derive(Debug, Clone)]
pub struct HardySystem {
    pub spec: GridSpec,
    pub frame: ProductFrame,
    pub trees: ProductTrees,
    pub families: [BallFamily; 2],
    pub psi: [ScaleFilters; 2],
    pub theta: [ScaleFilters; 2],
    pub weight: Weight,
}

impl HardySystem {
    /// Trees are extended up to four levels past the automatic range; the
    /// frame uses the scales both the trees and the grid resolve.
    pub fn build(gauges: [&EllipsoidGauge; 2], spec: &GridSpec, weight: Weight, frame_order: u32, profile: Profile) -> Result<Self> {
        Self::build_with_levels(gauges, spec, weight, frame_order, profile, None)
    }

    /// As [`HardySystem::build`], with the frame scales of each factor fixed
    /// to `levels` when given; they must lie in the automatic range.
    pub fn build_with_levels(gauges: [&EllipsoidGauge; 2], spec: &GridSpec, weight: Weight, frame_order: u32, profile: Profile, levels: Option<[(i32, i32); 2]>) -> Result<Self> {
        if spec.factors() != 2 {
            return Err(Error::SpecMismatch);
        }
        spec.check_same(weight.spec())?;
        let mut trees = Vec::new();
        let mut pairs = Vec::new();
        for i in 0..2 {
            let fs = spec.factor_spec(i);
            if fs.axes() != 1 {
                return Err(Error::InvalidArgument("the decomposition runs on one-axis factors".into()));
            }
            let tree = DyadicCubeTree::build_finest(gauges[i], &fs, 4)?;
            let (tlo, thi) = tree.scale_range();
            let (flo, fhi) = crate::frames::frame_levels(gauges[i], &fs)
                .ok_or_else(|| Error::RangeTooNarrow(format!("factor {i} resolves no frame scale")))?;
            let (lo, hi) = (tlo.max(flo), thi.min(fhi));
            if lo > hi {
                return Err(Error::RangeTooNarrow(format!("factor {i}: tree scales {tlo}..={thi} miss frame scales {flo}..={fhi}")));
            }
            let (lo, hi) = match levels {
                Some(lv) if lv[i].0 < lo || lv[i].1 > hi || lv[i].0 > lv[i].1 => {
                    return Err(Error::RangeTooNarrow(format!("factor {i}: requested scales {:?} outside {lo}..={hi}", lv[i])));
                }
                Some(lv) => lv[i],
                None => (lo, hi),
            };
            pairs.push(FramePair::build(gauges[i], &fs, frame_order, profile, Some((lo, hi)))?);
            trees.push(tree);
        }
        let t2 = trees.pop().unwrap();
        let t1 = trees.pop().unwrap();
        let trees = ProductTrees::new(spec, t1, t2)?;
        let p2 = pairs.pop().unwrap();
        let p1 = pairs.pop().unwrap();
        let frame = ProductFrame::new(spec, p1, p2)?;
        Self::from_parts(spec, frame, trees, gauges, weight)
    }

    pub fn from_parts(spec: &GridSpec, frame: ProductFrame, trees: ProductTrees, gauges: [&EllipsoidGauge; 2], weight: Weight) -> Result<Self> {
        let families = [BallFamily::resolvable(gauges[0], spec, 0)?, BallFamily::resolvable(gauges[1], spec, 1)?];
        let psi = [ScaleFilters::from_psi(&frame.pairs[0])?, ScaleFilters::from_psi(&frame.pairs[1])?];
        let theta = [ScaleFilters::from_theta(&frame.pairs[0])?, ScaleFilters::from_theta(&frame.pairs[1])?];
        Ok(Self { spec: spec.clone(), frame, trees, families, psi, theta, weight })
    }

    pub fn gauges(&self) -> [&EllipsoidGauge; 2] {
        [self.trees.trees[0].gauge(), self.trees.trees[1].gauge()]
    }

    /// Moment order 2m − 1 of the coarser factor frame.
    pub fn moment_order(&self) -> u32 {
        self.frame.pairs.iter().map(|p| 2 * p.m - 1).min().unwrap()
    }

    /// S⃗_ψ f.
    pub fn area(&self, f: &Field) -> Result<Vec<f64>> {
        product_lusin_area(f, [&self.psi[0], &self.psi[1]], self.gauges())
    }

    /// Frequencies the product frame reproduces.
    pub fn covered_mask(&self) -> Vec<bool> {
        self.frame.covered_mask()
    }
}

/// ‖S⃗_ψ f‖_{L^p_w}.
pub fn hardy_norm(f: &Field, system: &HardySystem, p: f64) -> Result<f64> {
    let s = system.area(f)?;
    lp_norm_values(&s, system.spec.cell_volume(), p, Some(system.weight.density()))
}

/// Sparse particle values on the product grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub rect: DyadicRectangle,
    pub cells: Vec<usize>,
    pub values: Vec<f64>,
}

impl Particle {
    pub fn dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (c, v) in self.cells.iter().zip(&self.values) {
            out[*c] = *v;
        }
        out
    }

    fn from_dense(rect: DyadicRectangle, data: &[f64], scale: f64) -> Self {
        let (cells, values) = data.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, v * scale)).unzip();
        Self { rect, cells, values }
    }
}

/// One atom a_k with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atom {
    pub k: i32,
    pub lambda: f64,
    /// 2^k w(Ω_k)^{1/p}.
    pub nominal_lambda: f64,
    pub omega: Vec<bool>,
    pub expanded: Vec<bool>,
    pub particles: Vec<Particle>,
    pub values: Vec<f64>,
}

/// Raw contribution Σ e_R of one (k, t₁, t₂) layer.
#[derive(Debug, Clone)]
pub struct Layer {
    pub k: i32,
    pub scales: (i32, i32),
    pub levels: (i32, i32),
    pub values: Vec<f64>,
}

/// Output of [`atomic_decompose`].
#[derive(Debug, Clone)]
pub struct AtomicDecomposition {
    pub spec: GridSpec,
    pub p: f64,
    pub atoms: Vec<Atom>,
    pub layers: Vec<Layer>,
    /// Rectangles carrying energy that no level set claims.
    pub unassigned: usize,
    /// Rectangles not inside Ω̃_k, kept as their own maximal rectangle.
    pub uncontained: usize,
    pub rectangles: usize,
    pub coefficient_sum: f64,
    pub area_norm_p: f64,
}

impl AtomicDecomposition {
    /// Σ_k λ_k a_k, summed over the stored layers.
    pub fn reconstruct(&self) -> Field {
        self.partial_sum(|_| true)
    }

    /// Σ of the layers accepted by `keep`, in stored order.
    pub fn partial_sum<F: Fn(&Layer) -> bool>(&self, keep: F) -> Field {
        let mut out = vec![0.0; self.spec.len()];
        for l in self.layers.iter().filter(|l| keep(l)) {
            for (o, v) in out.iter_mut().zip(&l.values) {
                *o += v;
            }
        }
        Field::from_real(&self.spec, out).expect("finite layers")
    }

    /// Σ|λ_k|^p / ‖S⃗_ψ f‖_p^p.
    pub fn coefficient_ratio(&self) -> f64 {
        if self.area_norm_p == 0.0 {
            0.0
        } else {
            self.coefficient_sum / self.area_norm_p
        }
    }

    /// Largest λ_k/(2^k w(Ω_k)^{1/p}): the folded normalisation multiple.
    pub fn fold_constant(&self) -> f64 {
        self.atoms.iter().map(|a| a.lambda / a.nominal_lambda).fold(0.0, f64::max)
    }
}

/// Nonzero taps (offset in cells, value × cell length) of θ_t on one axis.
fn taps(pair: &FramePair, t: i32) -> Vec<(i64, f64)> {
    let sc = pair.scale(t).expect("frame scale");
    let n = pair.spec.len() as i64;
    let o = n / 2;
    let h = pair.spec.spacing(0);
    sc.theta
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.re != 0.0)
        .map(|(i, v)| {
            let d = (i as i64 - o + n / 2).rem_euclid(n) - n / 2;
            (d, v.re * h)
        })
        .collect()
}

/// Adds θ₁⊗θ₂ ∗ (χ_{R₁×R₂} g) into `out` by direct separable convolution, so
/// cells outside R + supp θ stay exactly zero.
fn add_local_convolution(out: &mut [f64], g: &[f64], r1: &[usize], r2: &[usize], taps1: &[(i64, f64)], taps2: &[(i64, f64)], n1: usize, n2: usize) {
    let mut row = vec![0.0; n2];
    let mut cols: Vec<usize> = Vec::new();
    let mut used = vec![false; n2];
    for &i1 in r1 {
        row.iter_mut().for_each(|v| *v = 0.0);
        for &j2 in r2 {
            let gv = g[i1 * n2 + j2];
            if gv == 0.0 {
                continue;
            }
            for (d, tv) in taps2 {
                let x2 = (j2 as i64 + d).rem_euclid(n2 as i64) as usize;
                row[x2] += tv * gv;
                if !used[x2] {
                    used[x2] = true;
                    cols.push(x2);
                }
            }
        }
        for (d, tv) in taps1 {
            let x1 = (i1 as i64 + d).rem_euclid(n1 as i64) as usize;
            let base = x1 * n2;
            for &x2 in &cols {
                out[base + x2] += tv * row[x2];
            }
        }
        for &x2 in &cols {
            used[x2] = false;
        }
        cols.clear();
    }
}

/// The (⌊n/2⌋+1)-th largest value: R has more than half its cells above τ
/// iff this value exceeds τ.
fn majority_value(values: &mut [f64]) -> f64 {
    let n = values.len();
    let idx = n / 2;
    let (_, v, _) = values.select_nth_unstable_by(n - 1 - idx, |a, b| a.partial_cmp(b).unwrap());
    *v
}

/// Largest k with 2^k < q, or None when q ≤ 0.
fn dyadic_index(q: f64) -> Option<i32> {
    if !(q > 0.0) {
        return None;
    }
    let mut k = q.log2().ceil() as i32 - 1;
    while 2f64.powi(k + 1) < q {
        k += 1;
    }
    while 2f64.powi(k) >= q {
        k -= 1;
    }
    Some(k)
}

/// The constructive decomposition of f into λ_k a_k.
pub fn atomic_decompose(f: &Field, system: &HardySystem, triplet: &AdmissibleTriplet) -> Result<AtomicDecomposition> {
    f.spec().check_same(&system.spec)?;
    let need = triplet.frame_order();
    let have = system.moment_order();
    if have < need {
        return Err(Error::FrameMomentDeficit { have: have as usize, need: need as usize });
    }
    let spec = &system.spec;
    let trees = &system.trees;
    let (n1, n2) = (trees.n1(), trees.n2());
    let p = triplet.p;
    let cv = spec.cell_volume();
    let s = system.area(f)?;
    let area_norm_p = lp_norm_values(&s, cv, p, Some(system.weight.density()))?.powf(p);

    // ψ_t ∗ f for every scale pair
    let fhat = f.spectrum();
    let pairs = &system.frame.pairs;
    let scale_pairs: Vec<(i32, i32)> = pairs[0].scales.iter().flat_map(|a| pairs[1].scales.iter().map(move |b| (a.t, b.t))).collect();
    let psi_f: Vec<Vec<f64>> = scale_pairs
        .par_iter()
        .map(|&(t1, t2)| {
            let m = tensor(&pairs[0].scale(t1).unwrap().psi_hat, &pairs[1].scale(t2).unwrap().psi_hat);
            let mut g = fhat.clone();
            for (c, w) in g.coefficients_mut().iter_mut().zip(&m) {
                *c *= w;
            }
            g.to_field().re()
        })
        .collect();

    // rectangle classification
    struct Assigned {
        rect: DyadicRectangle,
        scale: usize,
        k: i32,
    }
    let mut assigned: Vec<Assigned> = Vec::new();
    let mut unassigned = 0;
    let mut rectangles = 0;
    for (si, &(t1, t2)) in scale_pairs.iter().enumerate() {
        let l1 = trees.level_for_scale(0, t1);
        let l2 = trees.level_for_scale(1, t2);
        let rects = trees.rectangles_at(l1, l2);
        rectangles += rects.len();
        let ks: Vec<(Option<i32>, bool)> = rects
            .par_iter()
            .map(|r| {
                let cells = trees.flat_cells(r);
                let energy = cells.iter().any(|c| psi_f[si][*c] != 0.0);
                let mut vals: Vec<f64> = cells.iter().map(|c| s[*c]).collect();
                (dyadic_index(majority_value(&mut vals)), energy)
            })
            .collect();
        for (r, (k, energy)) in rects.into_iter().zip(ks) {
            match k {
                Some(k) => assigned.push(Assigned { rect: r, scale: si, k }),
                None if energy => unassigned += 1,
                None => {}
            }
        }
    }
    let mut by_k: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, a) in assigned.iter().enumerate() {
        by_k.entry(a.k).or_default().push(i);
    }

    let c0 = default_c0(trees);
    let fam = [&system.families[0], &system.families[1]];
    let taps_for: Vec<(Vec<(i64, f64)>, Vec<(i64, f64)>)> = scale_pairs.iter().map(|&(t1, t2)| (taps(&pairs[0], t1), taps(&pairs[1], t2))).collect();
    let per_k: Vec<(Atom, Vec<Layer>, usize)> = by_k
        .par_iter()
        .map(|(&k, members)| {
            let thr = 2f64.powi(k);
            let omega: Vec<bool> = s.iter().map(|v| *v > thr).collect();
            let expanded = expand_open_set(&omega, trees, fam, c0);
            let cols = ColumnTable::new(&expanded, trees);
            let mut uncontained = 0;
            let mut particles: BTreeMap<DyadicRectangle, Vec<f64>> = BTreeMap::new();
            let mut layers: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for &i in members {
                let a = &assigned[i];
                let star = match maximal_ancestor(&a.rect, trees, &cols) {
                    Some(r) => r,
                    None => {
                        uncontained += 1;
                        a.rect
                    }
                };
                let (r1, r2) = trees.cells(&a.rect);
                let (tp1, tp2) = &taps_for[a.scale];
                let buf = particles.entry(star).or_insert_with(|| vec![0.0; n1 * n2]);
                add_local_convolution(buf, &psi_f[a.scale], r1, r2, tp1, tp2, n1, n2);
                let lay = layers.entry(a.scale).or_insert_with(|| vec![0.0; n1 * n2]);
                add_local_convolution(lay, &psi_f[a.scale], r1, r2, tp1, tp2, n1, n2);
            }
            let omega_cells: Vec<usize> = omega.iter().enumerate().filter(|(_, o)| **o).map(|(i, _)| i).collect();
            let w_omega = system.weight.measure(&omega_cells);
            let nominal = thr * w_omega.powf(1.0 / p);
            let raw: Vec<f64> = (0..n1 * n2).map(|c| neumaier_sum(particles.values().map(|b| b[c]))).collect();
            let q = triplet.q;
            let dens = system.weight.density();
            let norm_q = |v: &[f64]| lp_norm_values(&v.iter().map(|x| x.abs()).collect::<Vec<_>>(), cv, q, Some(dens)).unwrap();
            let total = norm_q(&raw);
            let parts = neumaier_sum(particles.values().map(|b| norm_q(b).powf(q))).powf(1.0 / q);
            let bound = w_omega.powf(1.0 / q - 1.0 / p);
            let lambda = (total.max(parts) / bound).max(f64::MIN_POSITIVE);
            let inv = 1.0 / lambda;
            let atom = Atom {
                k,
                lambda,
                nominal_lambda: nominal,
                omega,
                expanded,
                particles: particles.iter().map(|(r, b)| Particle::from_dense(*r, b, inv)).collect(),
                values: raw.iter().map(|v| v * inv).collect(),
            };
            let layers = layers
                .into_iter()
                .map(|(si, values)| {
                    let (t1, t2) = scale_pairs[si];
                    Layer { k, scales: (t1, t2), levels: (trees.level_for_scale(0, t1), trees.level_for_scale(1, t2)), values }
                })
                .collect();
            (atom, layers, uncontained)
        })
        .collect();
    let mut atoms = Vec::new();
    let mut layers = Vec::new();
    let mut uncontained = 0;
    for (a, l, u) in per_k {
        atoms.push(a);
        layers.extend(l);
        uncontained += u;
    }
    let coefficient_sum = neumaier_sum(atoms.iter().map(|a| a.lambda.powf(p)));
    Ok(AtomicDecomposition { spec: spec.clone(), p, atoms, layers, unassigned, uncontained, rectangles, coefficient_sum, area_norm_p })
}

/// R*: the maximal rectangle of Ω̃ containing R, taking the longest factor-1
/// side first and then the longest factor-2 side.
pub fn maximal_ancestor(r: &DyadicRectangle, trees: &ProductTrees, cols: &ColumnTable) -> Option<DyadicRectangle> {
    let (t1, t2) = (&trees.trees[0], &trees.trees[1]);
    for l1 in t1.coarsest()..=r.level1 {
        let a1 = t1.ancestor(r.level1, r.id1, l1);
        let base = DyadicRectangle { level1: l1, id1: a1, ..*r };
        if !cols.contains(trees, &base) {
            continue;
        }
        for l2 in t2.coarsest()..=r.level2 {
            let cand = DyadicRectangle { level2: l2, id2: t2.ancestor(r.level2, r.id2, l2), ..base };
            if cols.contains(trees, &cand) {
                return Some(cand);
            }
        }
    }
    None
}

/// Clause-by-clause verdict of an atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub support_ok: bool,
    /// Worst slice moment relative to MOMENT_TOLERANCE · ‖slice‖₁ · L^{|γ|}.
    pub moment_error: f64,
    pub moments_ok: bool,
    /// ‖a‖_{L^q_w} / w(Ω)^{1/q−1/p}.
    pub size_margin: f64,
    /// Σ‖a_R‖^q / w(Ω)^{1−q/p}.
    pub particle_margin: f64,
    /// Slices whose support closes around the torus; only their mean is checked.
    pub wrapped_slices: usize,
    pub failures: Vec<String>,
}

impl AtomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Largest circular gap of zeros along a lane; returns the start of the
/// support after that gap, or None if the lane has no zero.
fn gap_cut(nonzero: &[bool]) -> Option<usize> {
    let n = nonzero.len();
    let first_zero = nonzero.iter().position(|v| !*v)?;
    let mut best = (0usize, first_zero);
    let mut run = 0usize;
    for j in 0..n {
        let i = (first_zero + j) % n;
        if !nonzero[i] {
            run += 1;
            if run > best.0 {
                best = (run, (i + 1) % n);
            }
        } else {
            run = 0;
        }
    }
    Some(best.1)
}

/// Worst relative moment error over every sampled slice along `axis` of a
/// dense product field; returns (error, wrapped slice count).
fn slice_moments(data: &[f64], n1: usize, n2: usize, axis: usize, order: u32, spacing: f64, half: f64) -> (f64, usize) {
    let (lanes, len) = if axis == 0 { (n2, n1) } else { (n1, n2) };
    let at = |lane: usize, j: usize| if axis == 0 { data[j * n2 + lane] } else { data[lane * n2 + j] };
    let mut worst: f64 = 0.0;
    let mut wrapped = 0;
    for lane in 0..lanes {
        let vals: Vec<f64> = (0..len).map(|j| at(lane, j)).collect();
        let l1 = neumaier_sum(vals.iter().map(|v| v.abs())) * spacing;
        if l1 == 0.0 {
            continue;
        }
        let nz: Vec<bool> = vals.iter().map(|v| *v != 0.0).collect();
        let (start, top) = match gap_cut(&nz) {
            Some(s) => (s, order),
            None => {
                wrapped += 1;
                (0, 0)
            }
        };
        for g in 0..=top {
            let m = neumaier_sum((0..len).map(|j| {
                let i = (start + j) % len;
                vals[i] * (j as f64 * spacing).powi(g as i32)
            })) * spacing;
            // moments taken about the cut; the bound is translation invariant up to L^g
            let scale = MOMENT_TOLERANCE * l1 * (2.0 * half).powi(g as i32);
            worst = worst.max(m.abs() / scale);
        }
    }
    (worst, wrapped)
}

/// Checks support in R″, slice moments up to sᵢ, and both size conditions.
pub fn validate_atom(atom: &Atom, triplet: &AdmissibleTriplet, weight: &Weight, trees: &ProductTrees) -> AtomReport {
    let spec = weight.spec();
    let (n1, n2) = (trees.n1(), trees.n2());
    let (p, q) = (triplet.p, triplet.q);
    let cv = spec.cell_volume();
    let mut failures = Vec::new();
    let mut support_ok = true;
    let mut moment_error: f64 = 0.0;
    let mut wrapped_slices = 0;
    let dens = weight.density();
    let norm_q = |v: &[f64]| lp_norm_values(&v.iter().map(|x| x.abs()).collect::<Vec<_>>(), cv, q, Some(dens)).unwrap();
    let mut particle_sum = 0.0;
    let s1 = spec.factor_spec(0);
    let s2 = spec.factor_spec(1);
    for part in &atom.particles {
        let [m1, m2] = trees.shadow_double_prime(&part.rect);
        if let Some(c) = part.cells.iter().find(|c| !(m1[**c / n2] && m2[**c % n2])) {
            support_ok = false;
            failures.push(format!("particle {:?} has a value at cell {c} outside R''", part.rect));
        }
        let dense = part.dense(n1 * n2);
        let (e1, w1) = slice_moments(&dense, n1, n2, 0, triplet.s[0], s1.spacing(0), s1.box_half_widths()[0]);
        let (e2, w2) = slice_moments(&dense, n1, n2, 1, triplet.s[1], s2.spacing(0), s2.box_half_widths()[0]);
        moment_error = moment_error.max(e1).max(e2);
        wrapped_slices += w1 + w2;
        particle_sum += norm_q(&dense).powf(q);
    }
    let moments_ok = moment_error <= 1.0;
    if !moments_ok {
        failures.push(format!("slice moment error {moment_error:.3e} times tolerance"));
    }
    let omega_cells: Vec<usize> = atom.omega.iter().enumerate().filter(|(_, o)| **o).map(|(i, _)| i).collect();
    let w = weight.measure(&omega_cells);
    let total = norm_q(&atom.values);
    let size_margin = if total == 0.0 { 0.0 } else { total / w.powf(1.0 / q - 1.0 / p) };
    let particle_margin = if particle_sum == 0.0 { 0.0 } else { particle_sum / w.powf(1.0 - q / p) };
    if size_margin > 1.0 + SIZE_SLACK {
        failures.push(format!("||a||_q exceeds the size bound by {size_margin:.6}"));
    }
    if particle_margin > 1.0 + SIZE_SLACK {
        failures.push(format!("particle sum exceeds its bound by {particle_margin:.6}"));
    }
    AtomReport { support_ok, moment_error, moments_ok, size_margin, particle_margin, wrapped_slices, failures }
}

/// A single-rectangle atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RectangularAtom {
    pub rect: DyadicRectangle,
    pub values: Vec<f64>,
}

/// Support in R″, factor moments, and ‖a‖_{L^q_w} ≤ w(R)^{1/q−1/p}.
pub fn validate_rectangular_atom(atom: &RectangularAtom, triplet: &AdmissibleTriplet, weight: &Weight, trees: &ProductTrees) -> AtomReport {
    let cells = trees.flat_cells(&atom.rect);
    let mut omega = vec![false; atom.values.len()];
    for c in cells {
        omega[c] = true;
    }
    let part = Particle::from_dense(atom.rect, &atom.values, 1.0);
    let wrapped = Atom { k: 0, lambda: 1.0, nominal_lambda: 1.0, omega, expanded: vec![], particles: vec![part], values: atom.values.clone() };
    let mut r = validate_atom(&wrapped, triplet, weight, trees);
    // one particle: the two size clauses coincide, keep the ‖a‖ form
    r.failures.retain(|f| !f.starts_with("particle sum"));
    r
}

/// A smooth separable bump on R with its factor moments up to sᵢ removed.
pub fn rectangular_bump(trees: &ProductTrees, rect: &DyadicRectangle, s: [u32; 2]) -> Vec<f64> {
    let (c1, c2) = trees.cells(rect);
    let f1 = moment_free_profile(c1, trees.n1(), trees.trees[0].spec().spacing(0), s[0]);
    let f2 = moment_free_profile(c2, trees.n2(), trees.trees[1].spec().spacing(0), s[1]);
    let n2 = trees.n2();
    let mut out = vec![0.0; trees.n1() * n2];
    for (i1, a) in f1.iter().enumerate() {
        if *a == 0.0 {
            continue;
        }
        for (i2, b) in f2.iter().enumerate() {
            out[i1 * n2 + i2] = a * b;
        }
    }
    out
}

/// sin-shaped profile on `cells` with moments up to `order` projected out
/// (Gram–Schmidt against monomials in coordinates unwrapped at the gap).
fn moment_free_profile(cells: &[usize], n: usize, h: f64, order: u32) -> Vec<f64> {
    let mut mask = vec![false; n];
    for c in cells {
        mask[*c] = true;
    }
    let start = gap_cut(&mask).unwrap_or(0);
    let idx: Vec<usize> = (0..n).map(|j| (start + j) % n).filter(|i| mask[*i]).collect();
    let m = idx.len();
    let xs: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect();
    let mut v: Vec<f64> = xs.iter().map(|x| (std::f64::consts::PI * x).sin().powi(2) * (1.0 + x)).collect();
    // orthonormal monomial basis by modified Gram–Schmidt
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for g in 0..=order.min(m.saturating_sub(1) as u32) {
        let mut b: Vec<f64> = xs.iter().map(|x| (x - 0.5).powi(g as i32)).collect();
        for e in &basis {
            let d: f64 = b.iter().zip(e).map(|(a, c)| a * c).sum();
            b.iter_mut().zip(e).for_each(|(a, c)| *a -= d * c);
        }
        let nb = b.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nb > 0.0 {
            b.iter_mut().for_each(|a| *a /= nb);
            basis.push(b);
        }
    }
    for _ in 0..2 {
        for e in &basis {
            let d: f64 = v.iter().zip(e).map(|(a, c)| a * c).sum();
            v.iter_mut().zip(e).for_each(|(a, c)| *a -= d * c);
        }
    }
    let mut out = vec![0.0; n];
    for (j, i) in idx.iter().enumerate() {
        out[*i] = v[j] / h;
    }
    out
}

/// Normalises a rectangular atom to ‖a‖_{L^q_w} = w(R)^{1/q−1/p}.
pub fn normalize_rectangular(values: &mut [f64], rect: &DyadicRectangle, trees: &ProductTrees, weight: &Weight, p: f64, q: f64) {
    let cv = weight.spec().cell_volume();
    let wr = weight.measure(&trees.flat_cells(rect));
    let norm = lp_norm_values(&values.iter().map(|x| x.abs()).collect::<Vec<_>>(), cv, q, Some(weight.density())).unwrap();
    if norm > 0.0 {
        let c = wr.powf(1.0 / q - 1.0 / p) / norm;
        values.iter_mut().for_each(|v| *v *= c);
    }
}

/// The two sides of the key pointwise estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyEstimate {
    pub rectangles: usize,
    /// sup_x [S⃗_θ(Σ e_R)(x)]² / Σ_R [M_s(c_R χ_R)(x)]².
    pub quotient_sup: f64,
    pub lhs_max: f64,
    pub rhs_max: f64,
}

/// c_R = {Σ_{t ∈ R₊} ∫_R |ψ_t ∗ f|² / |R|}^{1/2}.
pub fn rectangle_coefficient(system: &HardySystem, psi_f: &[((i32, i32), Vec<f64>)], r: &DyadicRectangle) -> f64 {
    let trees = &system.trees;
    let cells = trees.flat_cells(r);
    let w = trees.plus_windows(r);
    let cv = system.spec.cell_volume();
    let mut acc = 0.0;
    for ((t1, t2), vals) in psi_f {
        if w[0].contains(t1) && w[1].contains(t2) {
            acc += neumaier_sum(cells.iter().map(|c| vals[*c] * vals[*c])) * cv;
        }
    }
    (acc / trees.measure(r)).sqrt()
}

/// ψ_t ∗ f for every frame scale pair.
pub fn scale_responses(system: &HardySystem, f: &Field) -> Vec<((i32, i32), Vec<f64>)> {
    let pairs = &system.frame.pairs;
    let fhat = f.spectrum();
    let mut out = Vec::new();
    for a in &pairs[0].scales {
        for b in &pairs[1].scales {
            let m = tensor(&a.psi_hat, &b.psi_hat);
            let mut g = fhat.clone();
            for (c, w) in g.coefficients_mut().iter_mut().zip(&m) {
                *c *= w;
            }
            out.push(((a.t, b.t), g.to_field().re()));
        }
    }
    out
}

/// e_R = θ_t ∗ (χ_R ψ_t ∗ f) at the scale pair of R.
pub fn rectangle_component(system: &HardySystem, psi_f: &[((i32, i32), Vec<f64>)], r: &DyadicRectangle) -> Vec<f64> {
    let trees = &system.trees;
    let (n1, n2) = (trees.n1(), trees.n2());
    let mut out = vec![0.0; n1 * n2];
    let (c1, c2) = trees.cells(r);
    for ((t1, t2), vals) in psi_f {
        if trees.level_for_scale(0, *t1) == r.level1 && trees.level_for_scale(1, *t2) == r.level2 {
            let tp1 = taps(&system.frame.pairs[0], *t1);
            let tp2 = taps(&system.frame.pairs[1], *t2);
            add_local_convolution(&mut out, vals, c1, c2, &tp1, &tp2, n1, n2);
        }
    }
    out
}

/// Evaluates both sides of the key estimate on the rectangle set `g`.
pub fn key_estimate_check(system: &HardySystem, f: &Field, g: &[DyadicRectangle]) -> Result<KeyEstimate> {
    let spec = &system.spec;
    let n = spec.len();
    if g.is_empty() {
        return Ok(KeyEstimate { rectangles: 0, quotient_sup: 0.0, lhs_max: 0.0, rhs_max: 0.0 });
    }
    let psi_f = scale_responses(system, f);
    let mut sum = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let fam = [&system.families[0], &system.families[1]];
    for r in g {
        let e = rectangle_component(system, &psi_f, r);
        sum.iter_mut().zip(&e).for_each(|(a, b)| *a += b);
        let c = rectangle_coefficient(system, &psi_f, r);
        let mut chi = vec![0.0; n];
        for cell in system.trees.flat_cells(r) {
            chi[cell] = c;
        }
        let m = strong_maximal(&chi, spec, &fam);
        rhs.iter_mut().zip(&m).for_each(|(a, b)| *a += b * b);
    }
    let e = Field::from_real(spec, sum)?;
    let st = product_lusin_area(&e, [&system.theta[0], &system.theta[1]], system.gauges())?;
    let lhs: Vec<f64> = st.iter().map(|v| v * v).collect();
    let rhs_max = rhs.iter().cloned().fold(0.0, f64::max);
    let lhs_max = lhs.iter().cloned().fold(0.0, f64::max);
    let quotient_sup = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| if *r > 1e-14 * rhs_max { l / r } else if *l > 1e-14 * lhs_max { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(KeyEstimate { rectangles: g.len(), quotient_sup, lhs_max, rhs_max })
}

/// Result of a finite truncation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationReport {
    pub n: i32,
    pub l: i32,
    pub retained_layers: usize,
    /// ‖S⃗_ψ(f − f_{N,L})‖_{L^p_w}.
    pub residual_hardy: f64,
    pub residual_l2: f64,
    /// ‖g_N‖_{L^q_w} with g_N = Σ_{|k|>N} λ_k a_k.
    pub tail_norm_q: f64,
    /// w(∪_{|k|>N} Ω_k)^{1/q−1/p}.
    pub tail_bound: f64,
}

/// f_{N,L} = Σ_{|k|≤N} λ_k a_{k,L} with a_{k,L} keeping rectangles with
/// both |ℓᵢ| ≤ L.
pub fn finite_truncate(decomp: &AtomicDecomposition, system: &HardySystem, f: &Field, n: i32, l: i32, q: f64) -> Result<(Field, TruncationReport)> {
    let keep = |lay: &Layer| lay.k.abs() <= n && lay.levels.0.abs() <= l && lay.levels.1.abs() <= l;
    let fnl = decomp.partial_sum(keep);
    let retained_layers = decomp.layers.iter().filter(|lay| keep(lay)).count();
    let resid = f.sub(&fnl)?;
    let cv = system.spec.cell_volume();
    let p = decomp.p;
    let dens = system.weight.density();
    let residual_hardy = hardy_norm(&resid, system, p)?;
    let residual_l2 = resid.l2_norm();
    let tail = decomp.partial_sum(|lay| lay.k.abs() > n);
    let tail_norm_q = lp_norm_values(&tail.abs(), cv, q, Some(dens))?;
    let mut union = vec![false; system.spec.len()];
    for a in decomp.atoms.iter().filter(|a| a.k.abs() > n) {
        union.iter_mut().zip(&a.omega).for_each(|(u, o)| *u |= *o);
    }
    let cells: Vec<usize> = union.iter().enumerate().filter(|(_, u)| **u).map(|(i, _)| i).collect();
    let wb = system.weight.measure(&cells);
    let tail_bound = if cells.is_empty() { 0.0 } else { wb.powf(1.0 / q - 1.0 / p) };
    Ok((fnl, TruncationReport { n, l, retained_layers, residual_hardy, residual_l2, tail_norm_q, tail_bound }))
}

/// sup norms of g ∗ ψ_k over a range of k, with the fitted envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub ks: Vec<i32>,
    pub sups: Vec<f64>,
    /// sup_x |g∗ψ_k(x)|(1 + ρ(x))^M.
    pub weighted_sups: Vec<f64>,
    /// Slope of log_b sup over the fine branch k ≤ −1.
    pub fine_slope: f64,
    /// Slope of log_b sup over the coarse branch k ≥ 1.
    pub coarse_slope: f64,
    /// (s+1)ζ₋.
    pub predicted_fine_slope: f64,
    /// Smallest C with weighted_sup ≤ C b^{k(s+1)ζ₋} (k ≤ 0) and ≤ C b^{−kζ₋} (k ≥ 0).
    pub fitted_c: f64,
}

/// ψ with exactly s vanishing moments: the (s+1)-th derivative of a
/// standard Gaussian, up to sign.
pub fn gaussian_derivative(s: u32) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        // probabilists' Hermite recursion
        let (mut h0, mut h1) = (1.0, x);
        let order = s + 1;
        for n in 1..order {
            let h2 = x * h1 - n as f64 * h0;
            h0 = h1;
            h1 = h2;
        }
        let he = if order == 0 { h0 } else { h1 };
        he * (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }
}

fn envelope_exponents(k: i32, zeta: f64, s: u32) -> f64 {
    if k <= 0 {
        k as f64 * (s as f64 + 1.0) * zeta
    } else {
        -(k as f64) * zeta
    }
}

/// sup |g ∗ ψ_k| on a one-axis scalar-dilation grid, ψ_k(x) = b^{−k}ψ(A^{−k}x).
pub fn decay_envelope_check(g: &Field, psi: &(dyn Fn(f64) -> f64 + Sync), s: u32, m: f64, gauge: &EllipsoidGauge, ks: &[i32]) -> Result<DecayEnvelope> {
    let spec = g.spec();
    if spec.axes() != 1 || gauge.dim() != 1 {
        return Err(Error::InvalidArgument("decay envelopes run on one-axis grids".into()));
    }
    let dil = gauge.dilation();
    let a = dil.matrix()[(0, 0)];
    let b = dil.det_abs();
    let zeta = dil.zeta_minus();
    let rho: Vec<f64> = (0..spec.len()).map(|i| gauge.rho(&crate::maximal::centered_point(spec, i))).collect();
    let mut sups = Vec::new();
    let mut weighted = Vec::new();
    for &k in ks {
        let ak = a.powi(k);
        let kern = Field::from_fn_centered(spec, |x| Complex64::new(psi(x[0] / ak) / b.powi(k), 0.0));
        let c = crate::field::convolve(g, &kern)?;
        let mag = c.abs();
        sups.push(mag.iter().cloned().fold(0.0, f64::max));
        // g is centred, so |g∗ψ_k| is weighted about the origin
        weighted.push(mag.iter().zip(&rho).map(|(v, r)| v * (1.0 + r).powf(m)).fold(0.0, f64::max));
    }
    let fit = |sel: &dyn Fn(i32) -> bool| {
        let pts: Vec<(f64, f64)> = ks.iter().zip(&sups).filter(|(k, _)| sel(**k)).map(|(k, v)| (*k as f64, v.ln() / b.ln())).collect();
        if pts.len() < 2 {
            f64::NAN
        } else {
            crate::dilation::regression_slope(&pts)
        }
    };
    let fine_slope = fit(&|k| k <= -1);
    let coarse_slope = fit(&|k| k >= 1);
    let fitted_c = ks
        .iter()
        .zip(&weighted)
        .map(|(k, v)| v / b.powf(envelope_exponents(*k, zeta, s)))
        .fold(0.0, f64::max);
    Ok(DecayEnvelope { ks: ks.to_vec(), sups, weighted_sups: weighted, fine_slope, coarse_slope, predicted_fine_slope: (s as f64 + 1.0) * zeta, fitted_c })
}

/// Four-quadrant product envelope table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductEnvelope {
    /// (k₁, k₂, sup_x |g ∗ ψ_{k₁,k₂}|).
    pub table: Vec<(i32, i32, f64)>,
    /// Fitted C per quadrant (k₁ ≤ 0 | k₁ > 0) × (k₂ ≤ 0 | k₂ > 0).
    pub quadrant_c: [[f64; 2]; 2],
    /// Largest table entry over its envelope C_q b₁^{e₁(k₁)} b₂^{e₂(k₂)}.
    pub worst_ratio: f64,
}

/// The product analogue on a two-factor grid of one-axis factors.
pub fn product_decay_envelope(g: &Field, psi: [&(dyn Fn(f64) -> f64 + Sync); 2], s: [u32; 2], gauges: [&EllipsoidGauge; 2], ks: &[i32]) -> Result<ProductEnvelope> {
    let spec = g.spec();
    if spec.factors() != 2 || spec.axes() != 2 {
        return Err(Error::InvalidArgument("product envelopes run on two one-axis factors".into()));
    }
    let f = [spec.factor_spec(0), spec.factor_spec(1)];
    let consts = gauges.map(|gg| {
        let d = gg.dilation();
        (d.matrix()[(0, 0)], d.det_abs(), d.zeta_minus())
    });
    let kern_hat = |i: usize, k: i32| {
        let (a, b, _) = consts[i];
        let ak = a.powi(k);
        Field::from_fn_centered(&f[i], |x| Complex64::new(psi[i](x[0] / ak) / b.powi(k), 0.0)).spectrum().coefficients().to_vec()
    };
    let ghat = g.spectrum();
    let mut table = Vec::new();
    let mut quadrant_c = [[0.0f64; 2]; 2];
    for &k1 in ks {
        let h1 = kern_hat(0, k1);
        for &k2 in ks {
            let h2 = kern_hat(1, k2);
            let m = tensor(&h1, &h2);
            let mut c = ghat.clone();
            for (x, w) in c.coefficients_mut().iter_mut().zip(&m) {
                *x *= w;
            }
            let sup = c.to_field().max_abs();
            table.push((k1, k2, sup));
            let env = consts[0].1.powf(envelope_exponents(k1, consts[0].2, s[0])) * consts[1].1.powf(envelope_exponents(k2, consts[1].2, s[1]));
            let q = &mut quadrant_c[(k1 > 0) as usize][(k2 > 0) as usize];
            *q = q.max(sup / env);
        }
    }
    let worst_ratio = table
        .iter()
        .map(|(k1, k2, v)| {
            let env = consts[0].1.powf(envelope_exponents(*k1, consts[0].2, s[0])) * consts[1].1.powf(envelope_exponents(*k2, consts[1].2, s[1]));
            v / (quadrant_c[(*k1 > 0) as usize][(*k2 > 0) as usize] * env)
        })
        .fold(0.0, f64::max);
    Ok(ProductEnvelope { table, quadrant_c, worst_ratio })
}

/// max over atoms of ‖M_N a‖_{L^p_w} for the grand maximal function.
pub fn grand_maximal_bound(atoms: &[&[f64]], spec: &GridSpec, gauges: [&EllipsoidGauge; 2], dict: &TestFunctionDictionary, p: f64, weight: &Weight) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in atoms {
        let f = Field::from_real(spec, a.to_vec())?;
        let m = grand_maximal(&f, &gauges, dict)?;
        worst = worst.max(lp_norm_values(&m, spec.cell_volume(), p, Some(weight.density()))?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_examples() {
        assert_eq!(admissible(1.0, 2.0, [0, 0], 1.0, [1.0, 1.0]), (true, [0, 0]));
        assert_eq!(minimal_moments(0.5, 1.0, [1.0 / 3.0, 1.0])[0], 3);
        assert!(!admissible(1.0, 1.5, [0, 0], 1.0, [1.0, 1.0]).0);
        assert!(!admissible(1.0, 2.0, [0, 0], 2.5, [1.0, 1.0]).0);
    }

    #[test]
    fn strengthened_examples() {
        assert_eq!(strengthened_moments(1.0, 1.0, [-1, -1], [2.0, 2.0], [1.0, 1.0]), [1, 1]);
        assert_eq!(strengthened_moments(1.0, 1.0, [-1, -1], [2.0, 4.0], [1.0, 1.0])[0], 2);
    }

    #[test]
    fn dyadic_index_brackets() {
        assert_eq!(dyadic_index(1.0), Some(-1));
        assert_eq!(dyadic_index(1.5), Some(0));
        assert_eq!(dyadic_index(4.0), Some(1));
        assert_eq!(dyadic_index(0.0), None);
    }

    #[test]
    fn majority_value_counts_cells() {
        let mut v = vec![5.0, 1.0, 3.0, 2.0];
        // three of four cells exceed τ iff τ < 2
        assert_eq!(majority_value(&mut v), 2.0);
    }

    #[test]
    fn gap_cut_finds_largest_gap() {
        let nz = [true, false, false, false, true, true, false, true];
        assert_eq!(gap_cut(&nz), Some(4));
        assert_eq!(gap_cut(&[true, true]), None);
    }

    #[test]
    fn gaussian_derivative_moments() {
        for s in 0..3u32 {
            let psi = gaussian_derivative(s);
            let h = 1e-3;
            for g in 0..=s + 1 {
                let m: f64 = (-12000..=12000).map(|i| i as f64 * h).map(|x| psi(x) * x.powi(g as i32) * h).sum();
                if g <= s {
                    assert!(m.abs() < 1e-10, "s={s} g={g} m={m}");
                } else {
                    assert!(m.abs() > 0.1, "s={s} g={g} m={m}");
                }
            }
        }
    }
}
