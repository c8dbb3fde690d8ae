//! Expansive dilations, the ellipsoid gauge, dilated balls and the step
//! quasi-norm.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative margin used to bracket eigenvalue moduli of
/// non-diagonalizable matrices.
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Ball levels whose quadratic forms are cached; the level search clamps
/// outside this window.
pub const LEVEL_BOUND: i32 = 64;

/// JSON descriptor of a dilation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DilationDescriptor {
    pub matrix: Vec<Vec<f64>>,
    #[serde(default = "default_epsilon")]
    pub epsilon_bracket: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl DilationDescriptor {
    pub fn build(&self) -> Result<ExpansiveDilation> {
        ExpansiveDilation::with_epsilon(&self.matrix, self.epsilon_bracket)
    }
}

/// A validated expansive matrix with its spectral data.
#[derive(Debug, Clone)]
pub struct ExpansiveDilation {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det_abs: f64,
    lambda_minus: f64,
    lambda_plus: f64,
    zeta_minus: f64,
    zeta_plus: f64,
    diagonalizable: bool,
    epsilon: f64,
}

/// Validates `rows` as an expansive dilation with the default bracket margin.
pub fn validate_expansive(rows: &[Vec<f64>]) -> Result<ExpansiveDilation> {
    ExpansiveDilation::with_epsilon(rows, DEFAULT_EPSILON)
}

impl ExpansiveDilation {
    /// `a·I₁` on the real line.
    pub fn scalar(a: f64) -> Result<Self> {
        validate_expansive(&[vec![a]])
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { entries[i] } else { 0.0 }).collect())
            .collect();
        validate_expansive(&rows)
    }

    pub fn with_epsilon(rows: &[Vec<f64>], epsilon: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("matrix must be square and non-empty".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon_bracket {epsilon} not in (0,1)")));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(matrix, epsilon)
    }

    pub fn from_matrix(matrix: DMatrix<f64>, epsilon: f64) -> Result<Self> {
        let det = matrix.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular);
        }
        let inverse = matrix.clone().try_inverse().ok_or(Error::Singular)?;
        let eig = eigenvalues(&matrix);
        let moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
        let min_mod = moduli.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_mod = moduli.iter().cloned().fold(0.0, f64::max);
        if min_mod <= 1.0 {
            return Err(Error::NotExpansive { modulus: min_mod });
        }
        let diagonalizable = is_diagonalizable(&matrix, &eig);
        let (lambda_minus, lambda_plus) = if diagonalizable {
            (min_mod, max_mod)
        } else {
            let lo = min_mod * (1.0 - epsilon);
            let lo = if lo <= 1.0 { 0.5 * (1.0 + min_mod) } else { lo };
            (lo, max_mod * (1.0 + epsilon))
        };
        let det_abs = det.abs();
        let lb = det_abs.ln();
        Ok(Self {
            matrix,
            inverse,
            det_abs,
            lambda_minus,
            lambda_plus,
            zeta_minus: lambda_minus.ln() / lb,
            zeta_plus: lambda_plus.ln() / lb,
            diagonalizable,
            epsilon,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }
    /// b = |det A|.
    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }
    pub fn lambda_minus(&self) -> f64 {
        self.lambda_minus
    }
    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }
    pub fn zeta_minus(&self) -> f64 {
        self.zeta_minus
    }
    pub fn zeta_plus(&self) -> f64 {
        self.zeta_plus
    }
    pub fn is_diagonalizable(&self) -> bool {
        self.diagonalizable
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// A^k for any integer k.
    pub fn power(&self, k: i32) -> DMatrix<f64> {
        let base = if k >= 0 { &self.matrix } else { &self.inverse };
        let mut out = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..k.unsigned_abs() {
            out = base * out;
        }
        out
    }

    /// The adjoint dilation A* = Aᵀ with the same bracket margin.
    pub fn transpose(&self) -> Self {
        Self::from_matrix(self.matrix.transpose(), self.epsilon)
            .expect("transpose of an expansive matrix is expansive")
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.matrix[(i, j)]).collect())
            .collect()
    }
}

fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    if m.nrows() == 1 {
        return vec![Complex::new(m[(0, 0)], 0.0)];
    }
    m.complex_eigenvalues().iter().cloned().collect()
}

fn is_diagonalizable(m: &DMatrix<f64>, eig: &[Complex<f64>]) -> bool {
    let n = m.nrows();
    let scale = m.norm().max(1.0);
    let tol = 1e-7 * scale;
    let mut seen = vec![false; eig.len()];
    for i in 0..eig.len() {
        if seen[i] {
            continue;
        }
        let group: Vec<usize> = (i..eig.len())
            .filter(|&j| (eig[j] - eig[i]).norm() < tol)
            .collect();
        for &j in &group {
            seen[j] = true;
        }
        if group.len() < 2 {
            continue;
        }
        let lam = eig[i];
        let shifted = DMatrix::from_fn(n, n, |r, c| {
            Complex::new(m[(r, c)], 0.0) - if r == c { lam } else { Complex::new(0.0, 0.0) }
        });
        let sv = shifted.svd(false, false).singular_values;
        let nullity = sv.iter().filter(|s| **s < 1e-6 * scale).count();
        if nullity < group.len() {
            return false;
        }
    }
    true
}

/// Largest generalized eigenvalue max xᵀXx / xᵀYx for symmetric X and SPD Y.
pub fn generalized_max_eigenvalue(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    let chol = y
        .clone()
        .cholesky()
        .ok_or_else(|| Error::ConstructionFailed("form is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .try_inverse()
        .ok_or_else(|| Error::ConstructionFailed("singular Cholesky factor".into()))?;
    let m = &linv * x * linv.transpose();
    let sym = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    Ok(eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

fn unit_ball_volume(n: usize) -> f64 {
    // V_n = π^{n/2} / Γ(n/2 + 1), via the two-step recursion V_n = 2π/n · V_{n-2}.
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// The unit-volume ellipsoid Δ = {xᵀPx < c} with growth factor r and σ.
#[derive(Debug, Clone)]
pub struct EllipsoidGauge {
    dilation: ExpansiveDilation,
    form: DMatrix<f64>,
    radius: f64,
    growth_r: f64,
    sigma: u32,
    series_terms: usize,
    /// Flattened forms P_k = (A^{-k})ᵀ P A^{-k}, k ∈ [-LEVEL_BOUND, LEVEL_BOUND].
    forms: Vec<Vec<f64>>,
}

/// ρ(x) together with its level k (x ∈ B_{k+1} \ B_k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiNormValue {
    /// `None` for x = 0.
    pub level: Option<i32>,
    pub value: f64,
    /// The level search hit the cached window and was clamped.
    pub clamped: bool,
}

impl EllipsoidGauge {
    /// Lyapunov-type series construction, unit-volume rescaling, growth
    /// factor and σ.
    pub fn build(dilation: &ExpansiveDilation) -> Result<Self> {
        let n = dilation.dim();
        let (form, radius, series_terms) = if n == 1 {
            // Δ = (-1/2, 1/2) exactly, so dyadic ball boundaries are exact.
            (DMatrix::from_element(1, 1, 4.0), 1.0, 1)
        } else {
            let r0 = 0.5 * (1.0 + dilation.lambda_minus());
            let ainv = dilation.inverse();
            let mut term_mat = DMatrix::<f64>::identity(n, n);
            let mut p = DMatrix::<f64>::zeros(n, n);
            let mut j = 0usize;
            loop {
                let term = term_mat.transpose() * &term_mat * r0.powi(2 * j as i32);
                let tn = term.norm();
                p += term;
                j += 1;
                if tn < 1e-12 * p.norm() {
                    break;
                }
                if j > 10_000 {
                    return Err(Error::ConstructionFailed("series did not converge".into()));
                }
                term_mat = ainv * term_mat;
            }
            let p = (&p + p.transpose()) * 0.5;
            let det = p.determinant();
            if !(det > 0.0) {
                return Err(Error::ConstructionFailed("series form not positive definite".into()));
            }
            // |Δ| = V_n c^{n/2} / sqrt(det P) = 1.
            let vn = unit_ball_volume(n);
            let c = (det / (vn * vn)).powf(1.0 / n as f64);
            (p, c, j)
        };
        let ainv = dilation.inverse();
        let pulled = ainv.transpose() * &form * ainv;
        let lam = generalized_max_eigenvalue(&pulled, &form)?;
        let growth_r = 1.0 / lam.sqrt();
        if !(growth_r > 1.0) {
            return Err(Error::ConstructionFailed(format!(
                "containment r·Δ ⊂ AΔ fails: largest admissible r = {growth_r}"
            )));
        }
        let mut forms = Vec::with_capacity(2 * LEVEL_BOUND as usize + 1);
        for k in -LEVEL_BOUND..=LEVEL_BOUND {
            let ak = dilation.power(-k);
            let pk = ak.transpose() * &form * ak;
            let pk = (&pk + pk.transpose()) * 0.5;
            forms.push(pk.iter().cloned().collect());
        }
        let mut gauge = Self {
            dilation: dilation.clone(),
            form,
            radius,
            growth_r,
            sigma: 0,
            series_terms,
            forms,
        };
        gauge.sigma = gauge.compute_sigma()?;
        Ok(gauge)
    }

    fn compute_sigma(&self) -> Result<u32> {
        // 2B₀ ⊆ A^σB₀ ⟺ 4·P_σ ≤ P in the Loewner order.
        for sigma in 1..=LEVEL_BOUND as u32 {
            let ps = self.form_matrix(sigma as i32) * 4.0;
            let lam = generalized_max_eigenvalue(&ps, &self.form)?;
            if lam <= 1.0 + 1e-12 {
                return Ok(sigma);
            }
        }
        Err(Error::ConstructionFailed("no σ found within the level window".into()))
    }

    pub fn dilation(&self) -> &ExpansiveDilation {
        &self.dilation
    }
    pub fn dim(&self) -> usize {
        self.dilation.dim()
    }
    pub fn form(&self) -> &DMatrix<f64> {
        &self.form
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn growth_r(&self) -> f64 {
        self.growth_r
    }
    pub fn sigma(&self) -> u32 {
        self.sigma
    }
    pub fn series_terms(&self) -> usize {
        self.series_terms
    }
    pub fn b(&self) -> f64 {
        self.dilation.det_abs()
    }

    /// P_k as a matrix (computed on the fly outside the cached window).
    pub fn form_matrix(&self, k: i32) -> DMatrix<f64> {
        let n = self.dim();
        if k.abs() <= LEVEL_BOUND {
            let f = &self.forms[(k + LEVEL_BOUND) as usize];
            DMatrix::from_column_slice(n, n, f)
        } else {
            let ak = self.dilation.power(-k);
            ak.transpose() * &self.form * ak
        }
    }

    /// xᵀ P_k x.
    #[inline]
    pub fn quad_level(&self, k: i32, x: &[f64]) -> f64 {
        let n = self.dim();
        if k.abs() > LEVEL_BOUND {
            let m = self.form_matrix(k);
            let v = DVector::from_column_slice(x);
            return (v.transpose() * m * v)[(0, 0)];
        }
        let f = &self.forms[(k + LEVEL_BOUND) as usize];
        let mut s = 0.0;
        for j in 0..n {
            let mut row = 0.0;
            for i in 0..n {
                row += f[i + j * n] * x[i];
            }
            s += row * x[j];
        }
        s
    }

    /// xᵀ P x (the level-0 gauge).
    pub fn quad(&self, x: &[f64]) -> f64 {
        self.quad_level(0, x)
    }

    /// x ∈ B_k = A^kΔ.
    #[inline]
    pub fn in_ball(&self, k: i32, x: &[f64]) -> bool {
        self.quad_level(k, x) < self.radius
    }

    /// |B_k| = b^k (Δ has unit volume).
    pub fn ball_volume(&self, k: i32) -> f64 {
        self.b().powi(k)
    }

    /// The step quasi-norm ρ(x) = b^k for x ∈ B_{k+1} \ B_k.
    pub fn step_quasi_norm(&self, x: &[f64]) -> QuasiNormValue {
        if x.iter().all(|v| *v == 0.0) {
            return QuasiNormValue { level: None, value: 0.0, clamped: false };
        }
        let c = self.radius;
        let (level, clamped) = if self.quad_level(LEVEL_BOUND, x) >= c {
            (LEVEL_BOUND, true)
        } else if self.quad_level(-LEVEL_BOUND, x) < c {
            (-LEVEL_BOUND - 1, true)
        } else {
            // invariant: q_lo >= c > q_hi
            let (mut lo, mut hi) = (-LEVEL_BOUND, LEVEL_BOUND);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if self.quad_level(mid, x) >= c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo, false)
        };
        QuasiNormValue { level: Some(level), value: self.b().powi(level), clamped }
    }

    /// Shorthand for `step_quasi_norm(x).value`.
    pub fn rho(&self, x: &[f64]) -> f64 {
        self.step_quasi_norm(x).value
    }

    /// Quasi-triangle constant H = b^σ.
    pub fn quasi_triangle_constant(&self) -> f64 {
        self.b().powi(self.sigma as i32)
    }

    /// Samples `count` points on ∂Δ and counts violations of Δ ⊂ rΔ ⊂ AΔ.
    pub fn certify_containment(&self, count: usize, seed: u64) -> usize {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ainv = self.dilation.inverse();
        let mut violations = 0;
        for _ in 0..count {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q = self.quad(&u);
            if q == 0.0 {
                continue;
            }
            let s = (self.radius / q).sqrt() * (1.0 - 1e-12);
            let y: Vec<f64> = u.iter().map(|v| v * s).collect();
            // y ∈ Δ must lie in rΔ: q(y/r) < c.
            let yr: Vec<f64> = y.iter().map(|v| v / self.growth_r).collect();
            if !(self.quad(&yr) < self.radius) {
                violations += 1;
            }
            // r·y ∈ rΔ must lie in AΔ: q(A^{-1} r y) < c.
            let ry = DVector::from_iterator(n, y.iter().map(|v| v * self.growth_r));
            let pulled = ainv * ry;
            if !(self.quad(pulled.as_slice()) < self.radius) {
                violations += 1;
            }
        }
        violations
    }

    /// Report JSON for the geometry of this gauge.
    pub fn report(&self, fitted: Option<&ComparisonReport>) -> GeometryReport {
        GeometryReport {
            b: self.b(),
            lambda: [self.dilation.lambda_minus(), self.dilation.lambda_plus()],
            zeta: [self.dilation.zeta_minus(), self.dilation.zeta_plus()],
            sigma: self.sigma,
            r: self.growth_r,
            fitted_constants: fitted.map(|c| c.constants),
        }
    }
}

/// Serializable geometry summary.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GeometryReport {
    pub b: f64,
    pub lambda: [f64; 2],
    pub zeta: [f64; 2],
    pub sigma: u32,
    pub r: f64,
    pub fitted_constants: Option<[f64; 4]>,
}

/// Fitted constants of the four two-sided comparisons between |x|, ρ(x)
/// and |A^j x|.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ComparisonReport {
    /// [large ρ vs |x|, small ρ vs |x|, j ≥ 0 growth, j ≤ 0 growth].
    pub constants: [f64; 4],
    pub worst_ratio: f64,
    /// Per-decade maxima of the ρ-vs-|x| ratios, coarse to fine in |x|.
    pub decade_maxima: Vec<f64>,
    /// Fitted slope of ln|x| against ln ρ(x) along each coordinate axis.
    pub axis_exponents: Vec<f64>,
    pub unbounded: bool,
}

/// Ratios of the four comparisons at one point x, with |x| = `xn`; slot
/// 0/1 hold the ρ ≥ 1 / ρ < 1 ratio (the other is 0), slots 2/3 the worst
/// growth ratio over j ∈ [0, 8] and j ∈ [−8, −1].
fn comparison_ratios(gauge: &EllipsoidGauge, powers: &[DMatrix<f64>], x: &[f64], xn: f64) -> [f64; 4] {
    let dil = gauge.dilation();
    let (zm, zp, b) = (dil.zeta_minus(), dil.zeta_plus(), dil.det_abs());
    let mut c = [0.0f64; 4];
    let rho = gauge.rho(x);
    if rho >= 1.0 {
        c[0] = (rho.powf(zm) / xn).max(xn / rho.powf(zp));
    } else {
        c[1] = (rho.powf(zp) / xn).max(xn / rho.powf(zm));
    }
    let xv = DVector::from_column_slice(x);
    for (idx, j) in (-8..=8).enumerate() {
        let ajx = (&powers[idx] * &xv).norm();
        let jf = j as f64;
        let r = if j >= 0 {
            (b.powf(jf * zm) * xn / ajx).max(ajx / (b.powf(jf * zp) * xn))
        } else {
            (b.powf(jf * zp) * xn / ajx).max(ajx / (b.powf(jf * zm) * xn))
        };
        let slot = if j >= 0 { 2 } else { 3 };
        c[slot] = c[slot].max(r);
    }
    c
}

/// Random points with |x| log-uniform in [1e-4, 1e4]; `None` for a zero
/// direction.
fn comparison_sample(rng: &mut ChaCha8Rng, n: usize) -> Option<(Vec<f64>, f64, f64)> {
    let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dn = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let e: f64 = rng.gen_range(-4.0..4.0);
    if dn == 0.0 {
        return None;
    }
    let t = 10f64.powf(e) / dn;
    Some((dir.iter().map(|v| v * t).collect(), 10f64.powf(e), e))
}

/// Fits the constants of the |x| ↔ ρ(x) and |A^j x| ↔ |x| comparisons.
pub fn norm_comparisons(gauge: &EllipsoidGauge, sample_count: usize, seed: u64) -> Result<ComparisonReport> {
    if sample_count < 100 {
        return Err(Error::InvalidArgument("sample_count must be at least 100".into()));
    }
    let dil = gauge.dilation();
    let n = dil.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = [1.0f64; 4];
    let decades = 8usize;
    let mut decade_max = vec![0.0f64; decades];
    let powers: Vec<DMatrix<f64>> = (-8..=8).map(|j| dil.power(j)).collect();
    for _ in 0..sample_count {
        let Some((x, xn, e)) = comparison_sample(&mut rng, n) else { continue };
        let r = comparison_ratios(gauge, &powers, &x, xn);
        for (ci, ri) in c.iter_mut().zip(&r) {
            *ci = ci.max(*ri);
        }
        let d = (((e + 4.0) / 8.0) * decades as f64).floor().clamp(0.0, decades as f64 - 1.0) as usize;
        decade_max[d] = decade_max[d].max(r[0].max(r[1]));
    }
    let worst_ratio = c.iter().cloned().fold(0.0, f64::max);
    let unbounded = decade_max.windows(2).all(|w| w[1] >= w[0])
        && decade_max.last().copied().unwrap_or(0.0) > 10.0 * decade_max[0].max(1e-300)
        || decade_max.windows(2).all(|w| w[1] <= w[0])
            && decade_max[0] > 10.0 * decade_max.last().copied().unwrap_or(0.0).max(1e-300);
    let mut axis_exponents = Vec::with_capacity(n);
    for axis in 0..n {
        let mut pts = Vec::new();
        for i in 0..=800 {
            let e = -4.0 + 8.0 * i as f64 / 800.0;
            let mut x = vec![0.0; n];
            x[axis] = 10f64.powf(e);
            pts.push((gauge.rho(&x).ln(), x[axis].ln()));
        }
        axis_exponents.push(regression_slope(&pts));
    }
    Ok(ComparisonReport { constants: c, worst_ratio, decade_maxima: decade_max, axis_exponents, unbounded })
}

/// Points of a fresh sample at which one of the four comparisons exceeds
/// the given constants.
pub fn comparison_violations(gauge: &EllipsoidGauge, constants: &[f64; 4], sample_count: usize, seed: u64) -> usize {
    let n = gauge.dim();
    let powers: Vec<DMatrix<f64>> = (-8..=8).map(|j| gauge.dilation().power(j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..sample_count {
        let Some((x, xn, _)) = comparison_sample(&mut rng, n) else { continue };
        let r = comparison_ratios(gauge, &powers, &x, xn);
        if r.iter().zip(constants).any(|(a, c)| *a > *c) {
            bad += 1;
        }
    }
    bad
}

/// Least-squares slope of y on x.
pub fn regression_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn diagonal_spectral_data() {
        let d = validate_expansive(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(d.det_abs(), 4.0);
        assert_relative_eq!(d.zeta_minus(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(d.zeta_plus(), 0.5, epsilon = 1e-15);
        let d = ExpansiveDilation::diagonal(&[2.0, 4.0]).unwrap();
        assert_eq!(d.det_abs(), 8.0);
        assert_eq!((d.lambda_minus(), d.lambda_plus()), (2.0, 4.0));
        assert_relative_eq!(d.zeta_minus(), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(d.zeta_plus(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_contractive_and_singular() {
        assert!(matches!(
            validate_expansive(&[vec![1.0, 0.0], vec![0.0, 0.5]]),
            Err(Error::NotExpansive { .. })
        ));
        assert!(matches!(validate_expansive(&[vec![0.0, 0.0], vec![0.0, 3.0]]), Err(Error::Singular)));
    }

    #[test]
    fn shear_gets_strict_bracket() {
        let d = validate_expansive(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(!d.is_diagonalizable());
        assert_relative_eq!(d.lambda_minus(), 1.9, epsilon = 1e-9);
        assert_relative_eq!(d.lambda_plus(), 2.1, epsilon = 1e-9);
        assert_relative_eq!(d.zeta_minus(), 1.9f64.ln() / 4f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn line_gauge_is_the_unit_interval() {
        let g = EllipsoidGauge::build(&ExpansiveDilation::scalar(2.0).unwrap()).unwrap();
        assert_eq!(g.sigma(), 1);
        assert!(g.in_ball(0, &[0.4999]));
        assert!(!g.in_ball(0, &[0.5]));
        assert!(g.in_ball(3, &[-3.99]));
        assert!(!g.in_ball(3, &[4.0]));
        let v = g.step_quasi_norm(&[0.75]);
        assert_eq!(v.level, Some(0));
        assert_eq!(v.value, 1.0);
        assert_eq!(g.rho(&[0.0]), 0.0);
    }

    #[test]
    fn ellipsoid_volume_and_containment() {
        for rows in [
            vec![vec![2.0, 0.0], vec![0.0, 4.0]],
            vec![vec![2.0, 1.0], vec![0.0, 2.0]],
        ] {
            let g = EllipsoidGauge::build(&validate_expansive(&rows).unwrap()).unwrap();
            let vol = std::f64::consts::PI * g.radius() / g.form().determinant().sqrt();
            assert_relative_eq!(vol, 1.0, epsilon = 1e-9);
            assert!(g.growth_r() > 1.0);
            assert_eq!(g.certify_containment(10_000, 7), 0);
        }
    }
}
