//! Lusin-area functions, one-parameter and product, and the norm-equivalence
//! experiments built on them.
//!
//! The cone integral b^{−k}∫_{B_k}|f∗φ_k(x−y)|²dy is realised as the mean of
//! |f∗φ_k|² over the discrete ball window, so that ‖Sf‖₂² = Σ_k‖f∗φ_k‖₂²
//! holds exactly on the grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balls::{product_mean, window_mean, BallWindow};
use crate::dilation::{EllipsoidGauge, ExpansiveDilation};
use crate::error::{Error, Result};
use crate::field::{dilated_spectrum, lp_norm_values, Field, SpectralField};
use crate::frames::{FramePair, PartitionOfUnity};
use crate::grid::{neumaier_sum, GridSpec};

/// Relative size of φ̂_k(0) tolerated as a vanishing mean.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// Dilated filters φ̂_k sampled on the dual lattice of one factor grid.
#[derive(Debug, Clone)]
pub struct ScaleFilters {
    pub spec: GridSpec,
    pub levels: Vec<i32>,
    pub multipliers: Vec<Vec<Complex64>>,
}

impl ScaleFilters {
    /// Fails with `NonvanishingMean` when some |φ̂_k(0)| exceeds
    /// [`MEAN_TOLERANCE`] times its maximum.
    pub fn new(spec: &GridSpec, levels: Vec<i32>, multipliers: Vec<Vec<Complex64>>) -> Result<Self> {
        if levels.len() != multipliers.len() || multipliers.iter().any(|m| m.len() != spec.len()) {
            return Err(Error::SpecMismatch);
        }
        for m in &multipliers {
            let max = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
            // slot 0 is ξ = 0
            if m[0].norm() > MEAN_TOLERANCE * max.max(f64::MIN_POSITIVE) {
                return Err(Error::NonvanishingMean(m[0].norm()));
            }
        }
        Ok(Self { spec: spec.clone(), levels, multipliers })
    }

    /// φ̂_t of a partition of unity.
    pub fn from_partition(p: &PartitionOfUnity, spec: &GridSpec) -> Result<Self> {
        let levels: Vec<i32> = (p.levels.0..=p.levels.1).collect();
        let ms = levels.iter().map(|t| p.spectrum(*t, spec).into_iter().map(|v| Complex64::new(v, 0.0)).collect()).collect();
        Self::new(spec, levels, ms)
    }

    /// ψ̂_t of a frame pair.
    pub fn from_psi(pair: &FramePair) -> Result<Self> {
        Self::new(&pair.spec, pair.scales.iter().map(|s| s.t).collect(), pair.scales.iter().map(|s| s.psi_hat.clone()).collect())
    }

    /// θ̂_t of a frame pair.
    pub fn from_theta(pair: &FramePair) -> Result<Self> {
        Self::new(&pair.spec, pair.scales.iter().map(|s| s.t).collect(), pair.scales.iter().map(|s| s.theta_hat.clone()).collect())
    }

    /// φ̂((A*)^k ξ) for a closed-form base spectrum.
    pub fn from_spectrum(phihat: &(dyn Fn(&[f64]) -> Complex64 + Sync), dil: &ExpansiveDilation, levels: std::ops::RangeInclusive<i32>, spec: &GridSpec) -> Result<Self> {
        let levels: Vec<i32> = levels.collect();
        let ms = levels.iter().map(|k| dilated_spectrum(phihat, dil, *k, spec).coefficients().to_vec()).collect();
        Self::new(spec, levels, ms)
    }

    /// sup_ξ Σ_k |φ̂_k(ξ)|², the L² bound of the area function.
    pub fn plancherel_bound(&self) -> f64 {
        (0..self.spec.len())
            .map(|i| neumaier_sum(self.multipliers.iter().map(|m| m[i].norm_sqr())))
            .fold(0.0, f64::max)
    }

    /// f ∗ φ_k for the k-th listed level.
    pub fn apply(&self, index: usize, f: &Field) -> Field {
        let mut s = f.spectrum();
        for (c, m) in s.coefficients_mut().iter_mut().zip(&self.multipliers[index]) {
            *c *= m;
        }
        s.to_field()
    }
}

/// S_φf on a one-factor grid.
pub fn lusin_area(f: &Field, filters: &ScaleFilters, gauge: &EllipsoidGauge) -> Result<Vec<f64>> {
    f.spec().check_same(&filters.spec)?;
    if f.spec().factors() != 1 || f.spec().axes() != gauge.dim() {
        return Err(Error::SpecMismatch);
    }
    let spec = f.spec();
    let fhat = f.spectrum();
    let layers: Vec<Vec<f64>> = filters
        .levels
        .par_iter()
        .zip(&filters.multipliers)
        .map(|(k, m)| {
            let sq = filtered_square(&fhat, m);
            let w = BallWindow::new(gauge, spec, *k);
            window_mean(&sq, spec, 0, &w)
        })
        .collect();
    Ok(sum_sqrt(&layers, spec.len()))
}

/// S⃗_φf on a two-factor grid for φ = φ⁽¹⁾ ⊗ φ⁽²⁾.
pub fn product_lusin_area(f: &Field, filters: [&ScaleFilters; 2], gauges: [&EllipsoidGauge; 2]) -> Result<Vec<f64>> {
    let spec = f.spec();
    check_product(spec, filters)?;
    let fhat = f.spectrum();
    let windows: [Vec<BallWindow>; 2] = [0, 1].map(|i| {
        let fs = spec.factor_spec(i);
        filters[i].levels.iter().map(|k| BallWindow::new(gauges[i], &fs, *k)).collect()
    });
    let pairs: Vec<(usize, usize)> = (0..filters[0].levels.len()).flat_map(|a| (0..filters[1].levels.len()).map(move |b| (a, b))).collect();
    let mut acc = vec![vec![0.0; spec.len()]];
    // bounded memory: reduce in fixed-size chunks, in order
    for chunk in pairs.chunks(8) {
        let layers: Vec<Vec<f64>> = chunk
            .par_iter()
            .map(|&(a, b)| {
                let m = tensor(&filters[0].multipliers[a], &filters[1].multipliers[b]);
                let sq = filtered_square(&fhat, &m);
                product_mean(&sq, spec, &[(0, &windows[0][a]), (1, &windows[1][b])])
            })
            .collect();
        acc.extend(layers);
        let s = sum_layers(&acc, spec.len());
        acc = vec![s];
    }
    Ok(acc[0].iter().map(|v| v.max(0.0).sqrt()).collect())
}

/// |f ∗ φ_{k₁,k₂}|² for every scale pair, with the product windows; used by
/// the cone-form oracle and by the decomposition.
pub fn product_scale_squares(f: &Field, filters: [&ScaleFilters; 2]) -> Result<Vec<((i32, i32), Vec<f64>)>> {
    check_product(f.spec(), filters)?;
    let fhat = f.spectrum();
    let mut out = Vec::new();
    for (a, k1) in filters[0].levels.iter().enumerate() {
        for (b, k2) in filters[1].levels.iter().enumerate() {
            let m = tensor(&filters[0].multipliers[a], &filters[1].multipliers[b]);
            out.push(((*k1, *k2), filtered_square(&fhat, &m)));
        }
    }
    Ok(out)
}

fn check_product(spec: &GridSpec, filters: [&ScaleFilters; 2]) -> Result<()> {
    if spec.factors() != 2 || spec.factor_spec(0) != filters[0].spec || spec.factor_spec(1) != filters[1].spec {
        return Err(Error::SpecMismatch);
    }
    Ok(())
}

pub(crate) fn tensor(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

fn filtered_square(fhat: &SpectralField, m: &[Complex64]) -> Vec<f64> {
    let mut s = fhat.clone();
    for (c, w) in s.coefficients_mut().iter_mut().zip(m) {
        *c *= w;
    }
    s.to_field().values().iter().map(|v| v.norm_sqr()).collect()
}

fn sum_layers(layers: &[Vec<f64>], n: usize) -> Vec<f64> {
    (0..n).into_par_iter().map(|i| neumaier_sum(layers.iter().map(|l| l[i]))).collect()
}

fn sum_sqrt(layers: &[Vec<f64>], n: usize) -> Vec<f64> {
    sum_layers(layers, n).into_iter().map(|v| v.max(0.0).sqrt()).collect()
}

/// One row of an equivalence report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub f_id: usize,
    pub p: f64,
    pub weight_id: String,
    pub norm_f: f64,
    #[serde(rename = "norm_Sf")]
    pub norm_sf: f64,
    pub ratio: f64,
}

/// Ratios ‖Sf‖_{L^p_w}/‖f‖_{L^p_w} over a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

/// Evaluates `area` on every member of `family`.
pub fn equivalence_report<F>(family: &[Field], area: F, p: f64, weight: Option<&[f64]>, weight_id: &str) -> Result<EquivalenceReport>
where
    F: Fn(&Field) -> Result<Vec<f64>>,
{
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("equivalence needs 1 < p < ∞, got {p}")));
    }
    let mut rows = Vec::with_capacity(family.len());
    for (id, f) in family.iter().enumerate() {
        let cv = f.spec().cell_volume();
        let nf = lp_norm_values(&f.abs(), cv, p, weight)?;
        let ns = lp_norm_values(&area(f)?, cv, p, weight)?;
        rows.push(EquivalenceRow { f_id: id, p, weight_id: weight_id.to_string(), norm_f: nf, norm_sf: ns, ratio: ns / nf });
    }
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(EquivalenceReport { rows, min, max, spread: max / min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Profile;

    fn setup() -> (EllipsoidGauge, GridSpec, ScaleFilters) {
        let d = ExpansiveDilation::scalar(2.0).unwrap();
        let g = EllipsoidGauge::build(&d).unwrap();
        let spec = GridSpec::cube(1, 16.0, 256).unwrap();
        let p = PartitionOfUnity::build(&d, Profile::default(), 1.0, (-3, 3), &spec).unwrap();
        let filters = ScaleFilters::from_partition(&p, &spec).unwrap();
        (g, spec, filters)
    }

    #[test]
    fn zero_input_gives_zero() {
        let (g, spec, filters) = setup();
        let s = lusin_area(&Field::zeros(&spec), &filters, &g).unwrap();
        assert!(s.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn nonzero_mean_is_rejected() {
        let d = ExpansiveDilation::scalar(2.0).unwrap();
        let spec = GridSpec::cube(1, 16.0, 64).unwrap();
        let gauss = |x: &[f64]| Complex64::new((-x[0] * x[0]).exp(), 0.0);
        assert!(matches!(ScaleFilters::from_spectrum(&gauss, &d, 0..=1, &spec), Err(Error::NonvanishingMean(_))));
    }

    #[test]
    fn plancherel_identity_is_exact() {
        let (g, spec, filters) = setup();
        let f = Field::from_fn_centered(&spec, |x| Complex64::new((-x[0] * x[0] / 4.0).exp() * (3.0 * x[0]).sin(), 0.0));
        let s = lusin_area(&f, &filters, &g).unwrap();
        let lhs = neumaier_sum(s.iter().map(|v| v * v)) * spec.cell_volume();
        let rhs = neumaier_sum((0..filters.levels.len()).map(|i| filters.apply(i, &f).l2_norm().powi(2)));
        assert!((lhs - rhs).abs() < 1e-10 * rhs, "{lhs} {rhs}");
    }
}
