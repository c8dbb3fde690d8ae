//! Muckenhoupt weights for one dilation and for products: constructors,
//! A_p constants over ball sweeps, refinement sweeps, the critical index and
//! doubling brackets.
//!
//! Constants are exact on the grid measure over every grid-centred ball of
//! the family. On a product grid the one-parameter constant along a factor
//! is the maximum over all slices in that factor at once.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balls::{window_max, window_mean, window_sum, BallFamily};
use crate::dilation::EllipsoidGauge;
use crate::error::{Error, Result};
use crate::grid::{neumaier_sum, GridSpec};
use crate::maximal::{centered_point, strong_maximal};

/// Closed-form tag of a weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightDescriptor {
    Constant,
    Power { alpha: f64 },
    ProductPower { alphas: [f64; 2] },
    Table { file: String },
}

/// A nonnegative density on a grid (one factor or a product).
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    spec: GridSpec,
    density: Vec<f64>,
    pub descriptor: WeightDescriptor,
}

/// Sub-cell samples per axis for the origin cell of power weights.
pub const ORIGIN_OVERSAMPLING: usize = 16;

impl Weight {
    pub fn from_density(spec: &GridSpec, density: Vec<f64>, descriptor: WeightDescriptor) -> Result<Self> {
        if density.len() != spec.len() {
            return Err(Error::SpecMismatch);
        }
        if let Some(i) = density.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::NegativeWeight { index: i });
        }
        if density.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument("weight vanishes identically".into()));
        }
        Ok(Self { spec: spec.clone(), density, descriptor })
    }

    pub fn constant(spec: &GridSpec) -> Self {
        Self { spec: spec.clone(), density: vec![1.0; spec.len()], descriptor: WeightDescriptor::Constant }
    }

    /// ρ(x)^α on a one-factor grid; the origin cell holds the cell average.
    pub fn power(gauge: &EllipsoidGauge, spec: &GridSpec, alpha: f64) -> Result<Self> {
        if spec.factors() != 1 || spec.axes() != gauge.dim() {
            return Err(Error::SpecMismatch);
        }
        let density = power_density(gauge, spec, alpha);
        Self::from_density(spec, density, WeightDescriptor::Power { alpha })
    }

    /// ρ₁(x₁)^{α₁} ρ₂(x₂)^{α₂} on a two-factor grid.
    pub fn product_power(gauges: [&EllipsoidGauge; 2], spec: &GridSpec, alphas: [f64; 2]) -> Result<Self> {
        if spec.factors() != 2 {
            return Err(Error::SpecMismatch);
        }
        let d1 = power_density(gauges[0], &spec.factor_spec(0), alphas[0]);
        let d2 = power_density(gauges[1], &spec.factor_spec(1), alphas[1]);
        let n2 = d2.len();
        let density = (0..spec.len()).map(|i| d1[i / n2] * d2[i % n2]).collect();
        Self::from_density(spec, density, WeightDescriptor::ProductPower { alphas })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// w(E) for a cell set.
    pub fn measure(&self, cells: &[usize]) -> f64 {
        neumaier_sum(cells.iter().map(|c| self.density[*c])) * self.spec.cell_volume()
    }

    pub fn total(&self) -> f64 {
        neumaier_sum(self.density.iter().cloned()) * self.spec.cell_volume()
    }

    /// w(x₁, ·) as a one-factor weight (product grids).
    pub fn slice(&self, factor: usize, index: usize) -> Result<Weight> {
        if self.spec.factors() != 2 {
            return Err(Error::SpecMismatch);
        }
        let n2 = self.spec.factor_spec(1).len();
        let n1 = self.spec.factor_spec(0).len();
        let d: Vec<f64> = if factor == 1 {
            self.density[index * n2..(index + 1) * n2].to_vec()
        } else {
            (0..n1).map(|i| self.density[i * n2 + index]).collect()
        };
        Weight::from_density(&self.spec.factor_spec(factor), d, self.descriptor.clone())
    }
}

fn power_density(gauge: &EllipsoidGauge, fspec: &GridSpec, alpha: f64) -> Vec<f64> {
    let origin = fspec.flat_index(&fspec.origin_index());
    let d = fspec.axes();
    (0..fspec.len())
        .into_par_iter()
        .map(|i| {
            if i != origin {
                return gauge.rho(&centered_point(fspec, i)).powf(alpha);
            }
            let m = ORIGIN_OVERSAMPLING;
            let total = m.pow(d as u32);
            let vals = (0..total).map(|s| {
                let mut r = s;
                let x: Vec<f64> = (0..d)
                    .map(|a| {
                        let j = r % m;
                        r /= m;
                        ((j as f64 + 0.5) / m as f64 - 0.5) * fspec.spacing(a)
                    })
                    .collect();
                gauge.rho(&x).powf(alpha)
            });
            neumaier_sum(vals) / total as f64
        })
        .collect()
}

/// A ball attaining the supremum.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BallWitness {
    pub center: usize,
    pub level: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MuckenhouptReport {
    pub p: f64,
    /// +∞ when w vanishes on a whole ball.
    pub constant_estimate: f64,
    pub witness: Option<BallWitness>,
    pub q_w_estimate: Option<f64>,
}

/// sup over the family of mean_B(w)·(mean_B w^{−1/(p−1)})^{p−1}, or
/// mean_B(w)·max_B w^{−1} for p = 1, along the family's factor.
pub fn ap_constant(w: &Weight, p: f64, family: &BallFamily) -> Result<MuckenhouptReport> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be at least 1, got {p}")));
    }
    let spec = w.spec();
    let dens = w.density();
    // zero cells make the dual factor infinite; track them separately so
    // prefix sums stay finite
    let zeros: Vec<f64> = dens.iter().map(|v| if *v > 0.0 { 0.0 } else { 1.0 }).collect();
    let dual: Vec<f64> = if p == 1.0 {
        dens.iter().map(|v| if *v > 0.0 { 1.0 / v } else { 0.0 }).collect()
    } else {
        dens.iter().map(|v| if *v > 0.0 { v.powf(-1.0 / (p - 1.0)) } else { 0.0 }).collect()
    };
    let any_zero = zeros.iter().any(|z| *z > 0.0);
    let mut best = (0.0f64, None);
    for win in &family.windows {
        let a = window_mean(dens, spec, family.factor, win);
        let b: Vec<f64> = if p == 1.0 {
            window_max(&dual, spec, family.factor, win)
        } else {
            window_mean(&dual, spec, family.factor, win).into_iter().map(|v| v.powf(p - 1.0)).collect()
        };
        let hit = if any_zero { window_max(&zeros, spec, family.factor, win) } else { vec![0.0; a.len()] };
        for (i, (x, y)) in a.iter().zip(&b).enumerate() {
            let c = if hit[i] > 0.0 { f64::INFINITY } else { x * y };
            if c > best.0 || best.1.is_none() {
                best = (c, Some(BallWitness { center: i, level: win.level }));
            }
        }
    }
    Ok(MuckenhouptReport { p, constant_estimate: best.0, witness: best.1, q_w_estimate: None })
}

/// max over both directions of the per-slice one-parameter constants.
pub fn product_ap_constant(w: &Weight, p: f64, families: [&BallFamily; 2]) -> Result<MuckenhouptReport> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument("the product class needs p > 1".into()));
    }
    if w.spec().factors() != 2 || families[0].factor != 0 || families[1].factor != 1 {
        return Err(Error::SpecMismatch);
    }
    let a = ap_constant(w, p, families[0])?;
    let b = ap_constant(w, p, families[1])?;
    Ok(if b.constant_estimate > a.constant_estimate { b } else { a })
}

/// Constants over successive grid refinements with a verdict.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RefinementReport {
    pub samples: Vec<usize>,
    pub constants: Vec<f64>,
    /// Every constant within ±tolerance of the median.
    pub stable: bool,
    /// Strictly increasing with total growth above the tolerance.
    pub divergent: bool,
}

impl RefinementReport {
    pub fn from_constants(samples: Vec<usize>, constants: Vec<f64>, tolerance: f64) -> Self {
        let mut sorted = constants.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let med = sorted[sorted.len() / 2];
        let finite = constants.iter().all(|c| c.is_finite());
        let stable = finite && constants.iter().all(|c| (c - med).abs() <= tolerance * med);
        let increasing = constants.windows(2).all(|w| w[1] > w[0]);
        let divergent = !finite
            || (increasing && constants[constants.len() - 1] > (1.0 + tolerance) * constants[0]);
        Self { samples, constants, stable, divergent }
    }
}

/// A_p constants of a one-factor weight built on grids with N, 2N, 4N, …
/// samples per axis and a fixed box; the ball levels are those resolvable on
/// the coarsest grid.
pub fn ap_refinement<F>(gauge: &EllipsoidGauge, dim: usize, half_width: f64, samples: &[usize], p: f64, tolerance: f64, build: F) -> Result<RefinementReport>
where
    F: Fn(&GridSpec) -> Result<Weight>,
{
    let coarse = GridSpec::cube(dim, half_width, samples[0])?;
    let (lo, hi) = crate::balls::resolvable_levels(gauge, &coarse);
    let mut constants = Vec::new();
    for &n in samples {
        let spec = GridSpec::cube(dim, half_width, n)?;
        let fam = BallFamily::new(gauge, &spec, 0, lo..=hi)?;
        constants.push(ap_constant(&build(&spec)?, p, &fam)?.constant_estimate);
    }
    Ok(RefinementReport::from_constants(samples.to_vec(), constants, tolerance))
}

/// Smallest probed p whose constant is finite and refinement-stable; 1 when
/// every probe passes and +∞ when none does.
pub fn critical_index<F>(probe_ps: &[f64], passes: F) -> Result<f64>
where
    F: Fn(f64) -> Result<bool>,
{
    if probe_ps.windows(2).any(|w| w[1] <= w[0]) || probe_ps.iter().any(|p| !(*p > 1.0 && *p <= 8.0)) {
        return Err(Error::InvalidArgument("probe exponents must be sorted within (1, 8]".into()));
    }
    let verdicts: Vec<bool> = probe_ps.iter().map(|p| passes(*p)).collect::<Result<_>>()?;
    if verdicts.iter().all(|v| *v) {
        return Ok(1.0);
    }
    Ok(probe_ps.iter().zip(&verdicts).find(|(_, v)| **v).map(|(p, _)| *p).unwrap_or(f64::INFINITY))
}

/// Two-sided doubling bracket C^{−1} b^{(m−k)/p} ≤ w(x+B_m)/w(x+B_k) ≤ C b^{(m−k)p}.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DoublingReport {
    pub p: f64,
    /// Smallest C ≥ 1 making both sides hold over the sample.
    pub fitted_c: f64,
    /// min ratio / lower bound.
    pub worst_lower: f64,
    /// max ratio / upper bound.
    pub worst_upper: f64,
    pub checked: usize,
}

/// One-parameter bracket along `factor` for every sampled point and k ≤ m
/// in `levels`.
pub fn doubling_report(w: &Weight, p: f64, gauge: &EllipsoidGauge, factor: usize, sample_points: &[usize], levels: std::ops::RangeInclusive<i32>) -> Result<DoublingReport> {
    let spec = w.spec();
    let fam = BallFamily::new(gauge, spec, factor, levels)?;
    let sums: Vec<Vec<f64>> = fam.windows.iter().map(|win| window_sum(w.density(), spec, factor, win)).collect();
    let b = gauge.b();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut checked = 0;
    for (ki, wk) in fam.windows.iter().enumerate() {
        for (mi, wm) in fam.windows.iter().enumerate().skip(ki) {
            let e = (wm.level - wk.level) as f64;
            for &x in sample_points {
                let r = sums[mi][x] / sums[ki][x];
                lo = lo.min(r / b.powf(e / p));
                hi = hi.max(r / b.powf(e * p));
                checked += 1;
            }
        }
    }
    Ok(DoublingReport { p, fitted_c: (1.0 / lo).max(hi).max(1.0), worst_lower: lo, worst_upper: hi, checked })
}

/// Product bracket with one level pair per factor.
pub fn product_doubling_report(w: &Weight, p: f64, gauges: [&EllipsoidGauge; 2], sample_points: &[usize], levels: [std::ops::RangeInclusive<i32>; 2]) -> Result<DoublingReport> {
    let spec = w.spec();
    let f1 = BallFamily::new(gauges[0], spec, 0, levels[0].clone())?;
    let f2 = BallFamily::new(gauges[1], spec, 1, levels[1].clone())?;
    // sums[i][j] over B¹_i × B²_j
    let sums: Vec<Vec<Vec<f64>>> = f1
        .windows
        .iter()
        .map(|a| {
            let s1 = window_sum(w.density(), spec, 0, a);
            f2.windows.iter().map(|b| window_sum(&s1, spec, 1, b)).collect()
        })
        .collect();
    let (b1, b2) = (gauges[0].b(), gauges[1].b());
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut checked = 0;
    for k1 in 0..f1.windows.len() {
        for l1 in k1..f1.windows.len() {
            for k2 in 0..f2.windows.len() {
                for l2 in k2..f2.windows.len() {
                    let e1 = (f1.windows[l1].level - f1.windows[k1].level) as f64;
                    let e2 = (f2.windows[l2].level - f2.windows[k2].level) as f64;
                    for &x in sample_points {
                        let r = sums[l1][l2][x] / sums[k1][k2][x];
                        lo = lo.min(r / (b1.powf(e1 / p) * b2.powf(e2 / p)));
                        hi = hi.max(r / (b1.powf(e1 * p) * b2.powf(e2 * p)));
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(DoublingReport { p, fitted_c: (1.0 / lo).max(hi).max(1.0), worst_lower: lo, worst_upper: hi, checked })
}

/// ‖M_s f‖_{L^p_w} / ‖f‖_{L^p_w}.
pub fn strong_maximal_ratio(f: &[f64], w: &Weight, p: f64, families: &[&BallFamily]) -> f64 {
    let a: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let m = strong_maximal(&a, w.spec(), families);
    let norm = |v: &[f64]| neumaier_sum(v.iter().zip(w.density()).map(|(x, d)| x.powf(p) * d)).powf(1.0 / p);
    let d = norm(&a);
    if d == 0.0 {
        0.0
    } else {
        norm(&m) / d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::ExpansiveDilation;

    fn g1() -> EllipsoidGauge {
        EllipsoidGauge::build(&ExpansiveDilation::scalar(2.0).unwrap()).unwrap()
    }

    #[test]
    fn constant_weight_has_unit_constants() {
        let g = g1();
        let spec = GridSpec::cube(1, 4.0, 128).unwrap();
        let fam = BallFamily::resolvable(&g, &spec, 0).unwrap();
        let w = Weight::constant(&spec);
        for p in [1.0, 1.5, 2.0, 4.0] {
            assert_eq!(ap_constant(&w, p, &fam).unwrap().constant_estimate, 1.0);
        }
    }

    #[test]
    fn rejects_negative_density() {
        let spec = GridSpec::cube(1, 1.0, 16).unwrap();
        let mut d = vec![1.0; 16];
        d[3] = -1.0;
        assert!(matches!(Weight::from_density(&spec, d, WeightDescriptor::Constant), Err(Error::NegativeWeight { index: 3 })));
    }

    #[test]
    fn vanishing_ball_gives_infinite_constant() {
        let g = g1();
        let spec = GridSpec::cube(1, 4.0, 64).unwrap();
        let fam = BallFamily::resolvable(&g, &spec, 0).unwrap();
        let mut d = vec![1.0; 64];
        for v in d.iter_mut().take(20) {
            *v = 0.0;
        }
        let w = Weight::from_density(&spec, d, WeightDescriptor::Constant).unwrap();
        assert!(ap_constant(&w, 2.0, &fam).unwrap().constant_estimate.is_infinite());
    }

    #[test]
    fn origin_cell_is_oversampled() {
        let g = g1();
        let spec = GridSpec::cube(1, 4.0, 64).unwrap();
        let w = Weight::power(&g, &spec, -0.5).unwrap();
        let o = spec.flat_index(&spec.origin_index());
        assert!(w.density()[o].is_finite() && w.density()[o] > w.density()[o + 1]);
    }
}
