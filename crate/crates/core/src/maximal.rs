//! Maximal operators on sampled grids: Hardy–Littlewood, strong, dyadic,
//! sharp and grand maximal functions, the Calderón–Zygmund decomposition,
//! and the good-λ and Fefferman–Stein reports.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balls::{product_max, product_mean, window_max, window_mean, BallFamily, BallWindow};
use crate::cubes::DyadicCubeTree;
use crate::dilation::EllipsoidGauge;
use crate::error::{Error, Result};
use crate::field::{dilated_kernel_unchecked, Field, Kernel};
use crate::grid::{neumaier_sum, GridSpec};

/// sup over balls x ∈ y + B_k (k in the family) of the mean of `data` on y + B_k.
pub fn ball_maximal(data: &[f64], spec: &GridSpec, family: &BallFamily) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; data.len()];
    for w in &family.windows {
        let m = window_max(&window_mean(data, spec, family.factor, w), spec, family.factor, w);
        out.par_iter_mut().zip(m).for_each(|(o, v)| *o = o.max(v));
    }
    out
}

/// M f on the family's factor (the one-parameter operator M⁽ⁱ⁾ on products).
pub fn hardy_littlewood(f: &Field, family: &BallFamily) -> Vec<f64> {
    ball_maximal(&f.abs(), f.spec(), family)
}

/// sup over product balls y + B¹_{k₁} × B²_{k₂} × … of the mean of `data`.
pub fn strong_maximal(data: &[f64], spec: &GridSpec, families: &[&BallFamily]) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; data.len()];
    let mut combo: Vec<usize> = vec![0; families.len()];
    if families.iter().any(|f| f.windows.is_empty()) {
        return data.to_vec();
    }
    loop {
        let ws: Vec<(usize, &BallWindow)> = families.iter().zip(&combo).map(|(f, i)| (f.factor, &f.windows[*i])).collect();
        let m = product_max(&product_mean(data, spec, &ws), spec, &ws);
        out.par_iter_mut().zip(m).for_each(|(o, v)| *o = o.max(v));
        let mut i = 0;
        loop {
            if i == families.len() {
                return out;
            }
            combo[i] += 1;
            if combo[i] < families[i].windows.len() {
                break;
            }
            combo[i] = 0;
            i += 1;
        }
    }
}

/// M⁽¹⁾[M⁽²⁾ f], the iterated bound for the strong maximal function.
pub fn iterated_maximal(data: &[f64], spec: &GridSpec, families: &[&BallFamily]) -> Vec<f64> {
    let mut cur = data.to_vec();
    for f in families.iter().rev() {
        cur = ball_maximal(&cur, spec, f);
    }
    cur
}

/// Extremes of M χ_{B_k}(x) · (b^k + ρ(x)) / b^k over x ∈ B_J, J the
/// coarsest level of `family`: farther points are not reached by any ball
/// that fits on the torus.
pub fn ball_indicator_comparability(gauge: &EllipsoidGauge, fspec: &GridSpec, family: &BallFamily, k: i32) -> (f64, f64) {
    let reach = family.levels().max().unwrap_or(k);
    let chi: Vec<f64> = (0..fspec.len())
        .map(|i| {
            let x = centered_point(fspec, i);
            if gauge.in_ball(k, &x) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let m = ball_maximal(&chi, fspec, family);
    let bk = gauge.b().powi(k);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (i, v) in m.iter().enumerate() {
        let x = centered_point(fspec, i);
        if !gauge.in_ball(reach, &x) {
            continue;
        }
        let r = v * (bk + gauge.rho(&x)) / bk;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (hi, lo)
}

/// Extremes of M_s χ_{B¹_{k₁}×B²_{k₂}}(x) · Π_i (b_i^{k_i} + ρ_i(x_i)) / b_i^{k_i}
/// on a two-factor grid, over x ∈ B¹_{J₁} × B²_{J₂} as in the one-factor case.
pub fn product_indicator_comparability(gauges: [&EllipsoidGauge; 2], spec: &GridSpec, families: [&BallFamily; 2], k: [i32; 2]) -> (f64, f64) {
    let fs = [spec.factor_spec(0), spec.factor_spec(1)];
    let n2 = fs[1].len();
    let factor = |i: usize| -> (Vec<bool>, Vec<f64>) {
        let bk = gauges[i].b().powi(k[i]);
        let reach = families[i].levels().max().unwrap_or(k[i]);
        (0..fs[i].len())
            .map(|j| {
                let x = centered_point(&fs[i], j);
                let g = if gauges[i].in_ball(reach, &x) { (bk + gauges[i].rho(&x)) / bk } else { f64::NAN };
                (gauges[i].in_ball(k[i], &x), g)
            })
            .unzip()
    };
    let (in1, g1) = factor(0);
    let (in2, g2) = factor(1);
    let chi: Vec<f64> = (0..spec.len()).map(|x| if in1[x / n2] && in2[x % n2] { 1.0 } else { 0.0 }).collect();
    let m = strong_maximal(&chi, spec, &families);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (x, v) in m.iter().enumerate() {
        let r = v * g1[x / n2] * g2[x % n2];
        if r.is_nan() {
            continue;
        }
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (hi, lo)
}

/// Grid point i measured from the origin cell.
pub fn centered_point(spec: &GridSpec, i: usize) -> Vec<f64> {
    let idx = spec.multi_index(i);
    let o = spec.origin_index();
    (0..spec.axes()).map(|a| (idx[a] as f64 - o[a] as f64) * spec.spacing(a)).collect()
}

/// M_d f on a factor grid: sup of cube means over the tree, plus the cell
/// itself as the finest level.
pub fn dyadic_maximal(data: &[f64], tree: &DyadicCubeTree) -> Vec<f64> {
    let mut out: Vec<f64> = data.to_vec();
    for lvl in tree.levels() {
        let means: Vec<f64> = lvl.cubes.iter().map(|c| neumaier_sum(c.cells.iter().map(|x| data[*x])) / c.cells.len() as f64).collect();
        for (o, lab) in out.iter_mut().zip(&lvl.labels) {
            *o = o.max(means[*lab]);
        }
    }
    out
}

/// Ball oscillations osc[k][y] = mean_{y+B_k} |f − f_B|.
fn ball_oscillations(f: &[Complex64], fspec: &GridSpec, w: &BallWindow) -> Vec<f64> {
    let offs = w.offsets();
    (0..f.len())
        .into_par_iter()
        .map(|y| {
            let idx = fspec.multi_index(y);
            let cells: Vec<usize> = offs
                .iter()
                .map(|o| {
                    let j: Vec<usize> = (0..idx.len()).map(|a| fspec.wrap(a, idx[a] as i64 + o[a])).collect();
                    fspec.flat_index(&j)
                })
                .collect();
            let n = cells.len() as f64;
            let re = neumaier_sum(cells.iter().map(|c| f[*c].re)) / n;
            let im = neumaier_sum(cells.iter().map(|c| f[*c].im)) / n;
            let mean = Complex64::new(re, im);
            neumaier_sum(cells.iter().map(|c| (f[*c] - mean).norm())) / n
        })
        .collect()
}

/// M♯f(x) = sup_{x ∈ B} mean_B |f − f_B| over the family (one-factor grid).
pub fn sharp_maximal(f: &Field, family: &BallFamily) -> Vec<f64> {
    let spec = f.spec();
    let mut out = vec![0.0f64; f.len()];
    for w in &family.windows {
        let osc = ball_oscillations(f.values(), spec, w);
        let m = window_max(&osc, spec, family.factor, w);
        out.par_iter_mut().zip(m).for_each(|(o, v)| *o = o.max(v));
    }
    out
}

/// sup_{x ∈ B} inf_a mean_B |f − a| for real f, with the inner infimum
/// found by golden-section search on [min_B f, max_B f].
pub fn sharp_maximal_inf(f: &[f64], fspec: &GridSpec, family: &BallFamily) -> Vec<f64> {
    let mut out = vec![0.0f64; f.len()];
    for w in &family.windows {
        let offs = w.offsets();
        let osc: Vec<f64> = (0..f.len())
            .into_par_iter()
            .map(|y| {
                let idx = fspec.multi_index(y);
                let vals: Vec<f64> = offs
                    .iter()
                    .map(|o| {
                        let j: Vec<usize> = (0..idx.len()).map(|a| fspec.wrap(a, idx[a] as i64 + o[a])).collect();
                        f[fspec.flat_index(&j)]
                    })
                    .collect();
                let cost = |a: f64| neumaier_sum(vals.iter().map(|v| (v - a).abs())) / vals.len() as f64;
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                golden_min(cost, lo, hi)
            })
            .collect();
        let m = window_max(&osc, fspec, family.factor, w);
        out.par_iter_mut().zip(m).for_each(|(o, v)| *o = o.max(v));
    }
    out
}

/// Minimum of a convex function on [lo, hi].
fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = f(lo).min(f(hi));
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    best = best.min(fc).min(fd);
    best
}

/// One factor's dictionary member: Hermite-type Gaussian derivative
/// He_j(x₀/s)·exp(−|x|²/2s²), scaled to unit 𝒮_N seminorm.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DictionaryMember {
    pub order: u32,
    pub width: f64,
    /// Factor by which the raw function was divided.
    pub seminorm: f64,
}

impl DictionaryMember {
    fn raw(&self, x: &[f64]) -> f64 {
        let t = x[0] / self.width;
        let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (self.width * self.width);
        hermite(self.order, t) * (-0.5 * r2).exp()
    }
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.raw(x) / self.seminorm
    }
}

/// Probabilists' Hermite polynomial He_n.
fn hermite(n: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = x * b - k as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// sup_x sup_{|α| ≤ N} |∂^α φ(x)| (1 + ρ(x))^N with centred differences on
/// an auxiliary grid of step h.
pub fn schwartz_seminorm(phi: &dyn Fn(&[f64]) -> f64, gauge: &EllipsoidGauge, order: u32, half_width: f64, samples: usize) -> f64 {
    let d = gauge.dim();
    let spec = GridSpec::cube(d, half_width, samples).expect("valid auxiliary grid");
    let h = spec.spacing(0);
    let n = spec.len();
    let base: Vec<f64> = (0..n).map(|i| phi(&spec.point(&spec.multi_index(i)))).collect();
    let weight: Vec<f64> = (0..n).map(|i| (1.0 + gauge.rho(&spec.point(&spec.multi_index(i)))).powi(order as i32)).collect();
    // multi-indices with |α| ≤ N, reached by successive differences
    let mut best: f64 = 0.0;
    let mut frontier: Vec<(Vec<u32>, Vec<f64>)> = vec![(vec![0; d], base)];
    let mut seen = std::collections::HashSet::new();
    while let Some((alpha, vals)) = frontier.pop() {
        if !seen.insert(alpha.clone()) {
            continue;
        }
        // only interior points where every difference is defined
        let total: u32 = alpha.iter().sum();
        for i in 0..n {
            let idx = spec.multi_index(i);
            if idx.iter().all(|j| *j >= total as usize && *j + (total as usize) < samples) {
                best = best.max(vals[i].abs() * weight[i]);
            }
        }
        if total < order {
            for a in 0..d {
                let stride = spec.strides()[a];
                let next: Vec<f64> = (0..n)
                    .map(|i| {
                        let j = spec.multi_index(i)[a];
                        if j == 0 || j + 1 == samples {
                            0.0
                        } else {
                            (vals[i + stride] - vals[i - stride]) / (2.0 * h)
                        }
                    })
                    .collect();
                let mut beta = alpha.clone();
                beta[a] += 1;
                frontier.push((beta, next));
            }
        }
    }
    best
}

/// A finite dictionary of product test functions for the grand maximal
/// function. Each factor carries its own members; the dictionary is every
/// tensor product of one member per factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFunctionDictionary {
    pub orders: Vec<u32>,
    pub members: Vec<Vec<DictionaryMember>>,
}

impl TestFunctionDictionary {
    /// Eight members per factor: Gaussian derivatives of order 0..=3 at
    /// widths 1/2 and 1, each scaled to unit 𝒮_{Nᵢ} seminorm.
    pub fn gaussian(gauges: &[&EllipsoidGauge], orders: &[u32]) -> Result<Self> {
        if gauges.len() != orders.len() || gauges.is_empty() {
            return Err(Error::InvalidArgument("one order per factor".into()));
        }
        let mut members = Vec::new();
        for (g, &n) in gauges.iter().zip(orders) {
            let samples = if g.dim() == 1 { 1024 } else { 128 };
            let mut list = Vec::new();
            for width in [0.5, 1.0] {
                for order in 0..4u32 {
                    let mut m = DictionaryMember { order, width, seminorm: 1.0 };
                    let raw = m.clone();
                    m.seminorm = schwartz_seminorm(&|x| raw.raw(x), g, n, 8.0, samples);
                    list.push(m);
                }
            }
            members.push(list);
        }
        Ok(Self { orders: orders.to_vec(), members })
    }

    /// Keeps only the listed members of each factor.
    pub fn restrict(&self, keep: &[Vec<usize>]) -> Self {
        Self {
            orders: self.orders.clone(),
            members: self.members.iter().zip(keep).map(|(m, k)| k.iter().map(|i| m[*i].clone()).collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.iter().map(|m| m.len()).product()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Spectrum of member `m` dilated to level k on a factor grid.
fn member_spectrum(m: &DictionaryMember, gauge: &EllipsoidGauge, fspec: &GridSpec, k: i32) -> Vec<Complex64> {
    let mm = m.clone();
    let kern = Kernel::Spatial(std::sync::Arc::new(move |x: &[f64]| Complex64::new(mm.eval(x), 0.0)));
    dilated_kernel_unchecked(&kern, gauge.dilation(), k, fspec).spectrum().coefficients().to_vec()
}

/// f ∗ (φ⁽¹⁾_{k₁} ⊗ φ⁽²⁾_{k₂} ⊗ …) for one member per factor.
pub fn member_convolution(f: &Field, gauges: &[&EllipsoidGauge], members: &[&DictionaryMember], levels: &[i32]) -> Result<Field> {
    let spec = f.spec();
    if spec.factors() != gauges.len() || members.len() != gauges.len() || levels.len() != gauges.len() {
        return Err(Error::SpecMismatch);
    }
    let spectra: Vec<Vec<Complex64>> = (0..gauges.len())
        .map(|i| member_spectrum(members[i], gauges[i], &spec.factor_spec(i), levels[i]))
        .collect();
    let fhat = f.spectrum();
    Ok(apply_separable(&fhat, &spectra))
}

fn apply_separable(fhat: &crate::field::SpectralField, spectra: &[Vec<Complex64>]) -> Field {
    let spec = fhat.spec().clone();
    let lens: Vec<usize> = (0..spec.factors()).map(|i| spec.factor_spec(i).len()).collect();
    let mut out = fhat.clone();
    out.coefficients_mut().par_iter_mut().enumerate().for_each(|(flat, c)| {
        let mut rem = flat;
        let mut m = Complex64::new(1.0, 0.0);
        for i in (0..lens.len()).rev() {
            m *= spectra[i][rem % lens[i]];
            rem /= lens[i];
        }
        *c *= m;
    });
    out.to_field()
}

/// Scales used for dictionary dilations: levels whose balls hold at least
/// three cells and fit on the torus.
pub fn dictionary_levels(gauge: &EllipsoidGauge, fspec: &GridSpec) -> Vec<i32> {
    let (lo, hi) = crate::balls::resolvable_levels(gauge, fspec);
    (lo..=hi).filter(|k| BallWindow::new(gauge, fspec, *k).count >= 3).collect()
}

/// M_{N⃗} f: sup over dictionary members and scale pairs of |f ∗ φ_{k⃗}|.
pub fn grand_maximal(f: &Field, gauges: &[&EllipsoidGauge], dict: &TestFunctionDictionary) -> Result<Vec<f64>> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let spec = f.spec();
    if spec.factors() != gauges.len() || dict.members.len() != gauges.len() {
        return Err(Error::SpecMismatch);
    }
    let fhat = f.spectrum();
    // per factor: list of (member, level) spectra
    let per_factor: Vec<Vec<Vec<Complex64>>> = (0..gauges.len())
        .map(|i| {
            let fs = spec.factor_spec(i);
            let levels = dictionary_levels(gauges[i], &fs);
            let mut v = Vec::new();
            for m in &dict.members[i] {
                for &k in &levels {
                    v.push(member_spectrum(m, gauges[i], &fs, k));
                }
            }
            v
        })
        .collect();
    let mut out = vec![0.0f64; f.len()];
    let mut combo = vec![0usize; per_factor.len()];
    loop {
        let spectra: Vec<Vec<Complex64>> = combo.iter().zip(&per_factor).map(|(c, p)| p[*c].clone()).collect();
        let g = apply_separable(&fhat, &spectra);
        out.par_iter_mut().zip(g.values()).for_each(|(o, v)| *o = o.max(v.norm()));
        let mut i = 0;
        loop {
            if i == combo.len() {
                return Ok(out);
            }
            combo[i] += 1;
            if combo[i] < per_factor[i].len() {
                break;
            }
            combo[i] = 0;
            i += 1;
        }
    }
}

/// One bad part of a Calderón–Zygmund decomposition.
#[derive(Debug, Clone)]
pub struct BadPart {
    /// Cube level, or `None` for a single cell below the finest level.
    pub level: Option<i32>,
    pub cells: Vec<usize>,
    /// b_j on the cells of Q_j, in the same order.
    pub values: Vec<Complex64>,
    pub mean_abs: f64,
}

#[derive(Debug, Clone)]
pub struct CzDecomposition {
    pub good: Field,
    pub bad: Vec<BadPart>,
    /// max_j mean_{Q_j}|f| / λ.
    pub constant: f64,
}

/// f = g + Σ b_j with Q_j the maximal tree cubes (or single cells) where the
/// mean of |f| exceeds λ. The weight is accepted for weighted reports and
/// does not change the stopping rule.
pub fn cz_decompose(f: &Field, lambda: f64, tree: &DyadicCubeTree) -> Result<CzDecomposition> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("λ must be positive".into()));
    }
    if f.spec() != tree.spec() {
        return Err(Error::SpecMismatch);
    }
    let n = f.len();
    let abs = f.abs();
    let vals = f.values();
    let mut taken = vec![false; n];
    let mut bad = Vec::new();
    let mut push = |level: Option<i32>, cells: Vec<usize>, taken: &mut Vec<bool>| {
        let k = cells.len() as f64;
        let re = neumaier_sum(cells.iter().map(|c| vals[*c].re)) / k;
        let im = neumaier_sum(cells.iter().map(|c| vals[*c].im)) / k;
        let mean = Complex64::new(re, im);
        let mean_abs = neumaier_sum(cells.iter().map(|c| abs[*c])) / k;
        for c in &cells {
            taken[*c] = true;
        }
        let values = cells.iter().map(|c| vals[*c] - mean).collect();
        bad.push(BadPart { level, cells, values, mean_abs });
    };
    for lvl in tree.levels() {
        for c in &lvl.cubes {
            if taken[c.cells[0]] {
                continue;
            }
            let m = neumaier_sum(c.cells.iter().map(|x| abs[*x])) / c.cells.len() as f64;
            if m > lambda {
                push(Some(lvl.level), c.cells.clone(), &mut taken);
            }
        }
    }
    for x in 0..n {
        if !taken[x] && abs[x] > lambda {
            push(None, vec![x], &mut taken);
        }
    }
    let mut good = f.clone();
    for b in &bad {
        for (c, v) in b.cells.iter().zip(&b.values) {
            good.values_mut()[*c] -= *v;
        }
    }
    let constant = bad.iter().map(|b| b.mean_abs / lambda).fold(0.0, f64::max);
    Ok(CzDecomposition { good, bad, constant })
}

/// One lattice point of the good-λ report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GoodLambdaPoint {
    pub lambda: f64,
    pub gamma: f64,
    /// w({M_d f > 2λ, M♯f ≤ γλ}).
    pub lhs: f64,
    /// w({M_d f > λ}).
    pub level_set: f64,
    /// lhs / (γ^{1/p} · level_set), 0 when the level set is empty.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GoodLambdaReport {
    pub points: Vec<GoodLambdaPoint>,
    /// Fitted C₀ = max ratio.
    pub fitted_c0: f64,
}

/// Good-λ measurement on precomputed M_d f and M♯f.
pub fn good_lambda_report(md: &[f64], sharp: &[f64], weight: &[f64], cell_volume: f64, p: f64, lambdas: &[f64], gammas: &[f64]) -> GoodLambdaReport {
    let wsum = |pred: &dyn Fn(usize) -> bool| neumaier_sum((0..md.len()).filter(|i| pred(*i)).map(|i| weight[i])) * cell_volume;
    let mut points = Vec::new();
    for &lambda in lambdas {
        let level_set = wsum(&|i| md[i] > lambda);
        for &gamma in gammas {
            let lhs = wsum(&|i| md[i] > 2.0 * lambda && sharp[i] <= gamma * lambda);
            let ratio = if level_set > 0.0 { lhs / (gamma.powf(1.0 / p) * level_set) } else { 0.0 };
            points.push(GoodLambdaPoint { lambda, gamma, lhs, level_set, ratio });
        }
    }
    let fitted_c0 = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
    GoodLambdaReport { points, fitted_c0 }
}

/// ‖(Σ_j [M_s f_j]^q)^{1/q}‖_{L^p_w} / ‖(Σ_j |f_j|^q)^{1/q}‖_{L^p_w}.
pub fn fefferman_stein_ratio(fs: &[Vec<f64>], spec: &GridSpec, families: &[&BallFamily], weight: &[f64], p: f64, q: f64) -> f64 {
    let n = spec.len();
    let mut lhs = vec![0.0f64; n];
    let mut rhs = vec![0.0f64; n];
    for f in fs {
        let a: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        let m = strong_maximal(&a, spec, families);
        for i in 0..n {
            lhs[i] += m[i].powf(q);
            rhs[i] += a[i].powf(q);
        }
    }
    let norm = |v: &[f64]| neumaier_sum(v.iter().zip(weight).map(|(x, w)| x.powf(p / q) * w)).powf(1.0 / p);
    let r = norm(&rhs);
    if r == 0.0 {
        0.0
    } else {
        norm(&lhs) / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::ExpansiveDilation;

    fn setup() -> (EllipsoidGauge, GridSpec, BallFamily) {
        let g = EllipsoidGauge::build(&ExpansiveDilation::scalar(2.0).unwrap()).unwrap();
        let spec = GridSpec::cube(1, 4.0, 64).unwrap();
        let fam = BallFamily::resolvable(&g, &spec, 0).unwrap();
        (g, spec, fam)
    }

    #[test]
    fn constants_are_fixed_points() {
        let (_, spec, fam) = setup();
        let f = Field::from_real(&spec, vec![-2.5; 64]).unwrap();
        assert!(hardy_littlewood(&f, &fam).iter().all(|v| (v - 2.5).abs() < 1e-12));
        assert!(sharp_maximal(&f, &fam).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn hardy_littlewood_dominates_and_matches_brute_force() {
        let (g, spec, fam) = setup();
        let data: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64).collect();
        let m = ball_maximal(&data, &spec, &fam);
        for x in 0..64usize {
            let mut best: f64 = 0.0;
            for w in &fam.windows {
                for y in 0..64i64 {
                    let offs = w.offsets();
                    if !offs.iter().any(|o| spec.wrap(0, y + o[0]) == x) {
                        continue;
                    }
                    let s: f64 = offs.iter().map(|o| data[spec.wrap(0, y + o[0])]).sum();
                    best = best.max(s / offs.len() as f64);
                }
            }
            assert!((best - m[x]).abs() < 1e-12);
            assert!(m[x] >= data[x] - 1e-12);
        }
        let _ = g;
    }

    #[test]
    fn golden_section_finds_median_cost() {
        let v = [1.0, 2.0, 7.0, 9.0, 10.0];
        let cost = |a: f64| v.iter().map(|x| (x - a).abs()).sum::<f64>();
        assert!((golden_min(cost, 1.0, 10.0) - cost(7.0)).abs() < 1e-9);
    }

    #[test]
    fn hermite_recurrence() {
        assert_eq!(hermite(2, 3.0), 8.0);
        assert_eq!(hermite(3, 2.0), 2.0);
    }
}
