//! Calderón reproducing systems on sampled grids: telescoping partitions of
//! unity, (θ, ψ) frame pairs with compact support and vanishing moments, and
//! their tensor products.
//!
//! The partition lives in frequency: φ̂(ξ) = η(|(A*)^{−1}ξ|*/κ) − η(|ξ|*/κ)
//! with |·|* the dual ellipsoid gauge, so Σ_{t=J−}^{J+} φ̂_t telescopes to
//! η(|(A*)^{J−−1}ξ|*/κ) − η(|(A*)^{J+}ξ|*/κ), which is exactly one on the
//! covered frequencies. Each θ_t is built directly at scale t as
//! (−Δ_h)^m of a bump supported in B_t, and ψ̂_t = φ̂_t/θ̂_t.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dilation::{EllipsoidGauge, ExpansiveDilation};
use crate::error::{Error, Result};
use crate::field::{ball_extent_cells, Field, SpectralField};
use crate::grid::{neumaier_sum, GridSpec};
use crate::maximal::centered_point;

/// Threshold of |θ̂_t| relative to its maximum below which no division happens.
pub const DIVISION_THRESHOLD: f64 = 1e-3;
/// Fewest cells B_t may span on any axis.
pub const MIN_SCALE_CELLS: f64 = 8.0;

/// Smooth decreasing cutoff: 1 on [0, inner], 0 on [outer, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub inner: f64,
    pub outer: f64,
}

impl Default for Profile {
    fn default() -> Self {
        Self { inner: 1.0, outer: 2.0 }
    }
}

impl Profile {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::InvalidArgument(format!("profile needs 0 < inner < outer, got {inner}, {outer}")));
        }
        Ok(Self { inner, outer })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= self.inner {
            return 1.0;
        }
        if r >= self.outer {
            return 0.0;
        }
        let u = (self.outer - r) / (self.outer - self.inner);
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// JSON form of a frame request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDescriptor {
    pub s: u32,
    pub profile: ProfileDescriptor,
    #[serde(default)]
    pub levels: Option<[i32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDescriptor {
    pub kind: String,
    pub inner: f64,
    pub outer: f64,
}

impl ProfileDescriptor {
    pub fn build(&self) -> Result<Profile> {
        if self.kind != "bump" {
            return Err(Error::InvalidArgument(format!("unknown profile kind {}", self.kind)));
        }
        Profile::new(self.inner, self.outer)
    }
}

/// The telescoping partition Σ_t φ̂((A*)^t ξ) over levels [lo, hi].
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    dual: EllipsoidGauge,
    pub profile: Profile,
    pub kappa: f64,
    pub levels: (i32, i32),
    /// max |Σ_t φ̂_t − 1| over covered grid frequencies.
    pub certificate: f64,
    /// Covered grid frequencies.
    pub covered: usize,
    /// max over the dual grid of Σ_t |φ̂_t|.
    pub sum_bound: f64,
}

impl PartitionOfUnity {
    pub fn build(dil: &ExpansiveDilation, profile: Profile, kappa: f64, levels: (i32, i32), spec: &GridSpec) -> Result<Self> {
        if levels.0 > levels.1 {
            return Err(Error::InvalidArgument("empty level range".into()));
        }
        if spec.factors() != 1 || spec.axes() != dil.dim() {
            return Err(Error::SpecMismatch);
        }
        let dual = EllipsoidGauge::build(&dil.transpose())?;
        let mut p = Self { dual, profile, kappa, levels, certificate: 0.0, covered: 0, sum_bound: 0.0 };
        let xs = frequencies(spec);
        let stats: Vec<(bool, f64, f64)> = xs
            .par_iter()
            .map(|xi| {
                let s: Vec<f64> = (levels.0..=levels.1).map(|t| p.phi_hat(t, xi)).collect();
                let sum = neumaier_sum(s.iter().cloned());
                let abs = neumaier_sum(s.iter().map(|v| v.abs()));
                let cov = p.is_covered(xi);
                (cov, if cov { (sum - 1.0).abs() } else { 0.0 }, abs)
            })
            .collect();
        p.covered = stats.iter().filter(|s| s.0).count();
        p.certificate = stats.iter().map(|s| s.1).fold(0.0, f64::max);
        p.sum_bound = stats.iter().map(|s| s.2).fold(0.0, f64::max);
        if p.covered == 0 {
            return Err(Error::RangeTooNarrow(format!(
                "levels {}..={} cover no grid frequency",
                levels.0, levels.1
            )));
        }
        Ok(p)
    }

    /// |(A*)^t ξ|* / κ.
    fn radius(&self, t: i32, xi: &[f64]) -> f64 {
        (self.dual.quad_level(-t, xi) / self.dual.radius()).sqrt() / self.kappa
    }

    /// φ̂_t(ξ) = η(|(A*)^{t−1}ξ|*/κ) − η(|(A*)^t ξ|*/κ).
    pub fn phi_hat(&self, t: i32, xi: &[f64]) -> f64 {
        self.profile.eval(self.radius(t - 1, xi)) - self.profile.eval(self.radius(t, xi))
    }

    /// Both telescoping ends are saturated, so the partition sums to one.
    pub fn is_covered(&self, xi: &[f64]) -> bool {
        self.profile.eval(self.radius(self.levels.0 - 1, xi)) == 1.0 && self.profile.eval(self.radius(self.levels.1, xi)) == 0.0
    }

    pub fn covered_mask(&self, spec: &GridSpec) -> Vec<bool> {
        frequencies(spec).par_iter().map(|xi| self.is_covered(xi)).collect()
    }

    /// φ̂_t sampled on the dual lattice of `spec`.
    pub fn spectrum(&self, t: i32, spec: &GridSpec) -> Vec<f64> {
        frequencies(spec).par_iter().map(|xi| self.phi_hat(t, xi)).collect()
    }

    /// f ∗ φ_t.
    pub fn convolve(&self, t: i32, f: &Field) -> Field {
        f.spectrum().mul_real(&self.spectrum(t, f.spec())).to_field()
    }

    /// Σ_t f ∗ φ_t.
    pub fn reproduce(&self, f: &Field) -> Reconstruction {
        let spec = f.spec();
        let fhat = f.spectrum();
        let mut total = vec![0.0f64; spec.len()];
        for t in self.levels.0..=self.levels.1 {
            for (a, b) in total.iter_mut().zip(self.spectrum(t, spec)) {
                *a += b;
            }
        }
        Reconstruction::new(f, &fhat, &total, &self.covered_mask(spec))
    }
}

/// Dual-lattice frequency of every flat slot.
pub fn frequencies(spec: &GridSpec) -> Vec<Vec<f64>> {
    (0..spec.len())
        .map(|flat| {
            let idx = spec.multi_index(flat);
            idx.iter().enumerate().map(|(a, &k)| spec.frequency(a, k)).collect()
        })
        .collect()
}

/// Reconstruction with its L² error and out-of-band energy.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub field: Field,
    pub rel_error: f64,
    /// Fraction of ‖f‖₂² on uncovered frequencies.
    pub out_of_band: f64,
    /// ‖(1 − m)f̂‖/‖f̂‖ from the multiplier, by Parseval equal to `rel_error`.
    pub predicted_error: f64,
}

impl Reconstruction {
    fn new(f: &Field, fhat: &SpectralField, multiplier: &[f64], covered: &[bool]) -> Self {
        let field = fhat.mul_real(multiplier).to_field();
        let out_e = neumaier_sum(fhat.coefficients().iter().zip(covered).filter(|(_, k)| !**k).map(|(c, _)| c.norm_sqr()));
        let all_e = neumaier_sum(fhat.coefficients().iter().map(|c| c.norm_sqr()));
        let miss = neumaier_sum(fhat.coefficients().iter().zip(multiplier).map(|(c, m)| c.norm_sqr() * (1.0 - m).powi(2)));
        let norm = f.l2_norm();
        let err = field.sub(f).map(|d| d.l2_norm()).unwrap_or(f64::INFINITY);
        Self {
            field,
            rel_error: if norm > 0.0 { err / norm } else { 0.0 },
            out_of_band: if all_e > 0.0 { out_e / all_e } else { 0.0 },
            predicted_error: if all_e > 0.0 { (miss / all_e).sqrt() } else { 0.0 },
        }
    }
}

/// One scale of a frame pair.
#[derive(Debug, Clone)]
pub struct FrameScale {
    pub t: i32,
    /// θ_t, supported in B_t.
    pub theta: Field,
    pub theta_hat: Vec<Complex64>,
    pub psi_hat: Vec<Complex64>,
    pub phi_hat: Vec<f64>,
    /// Bump support as a fraction of B_t.
    pub shrink: f64,
}

impl FrameScale {
    /// ψ_t in space.
    pub fn psi(&self, spec: &GridSpec) -> Field {
        let mut s = SpectralField::zeros(spec);
        s.coefficients_mut().copy_from_slice(&self.psi_hat);
        s.to_field()
    }
}

/// Certificates of a frame pair.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FrameCertificates {
    /// Every cell outside B_t holds exactly zero.
    pub support_exact: bool,
    /// max over scales and |γ| ≤ 2m−1 of |∫θ x^γ| / (‖θ‖₁ L^{|γ|}).
    pub moment_error: f64,
    /// max |Σ_t ψ̂_t θ̂_t − 1| over covered frequencies.
    pub pairing_error: f64,
    /// min over scales of min_{supp φ̂_t}|θ̂_t| / max|θ̂_t|.
    pub annulus_ratio: f64,
    pub partition_error: f64,
}

/// A discrete Calderón pair on a one-factor grid.
#[derive(Debug, Clone)]
pub struct FramePair {
    pub spec: GridSpec,
    pub gauge: EllipsoidGauge,
    /// Requested vanishing-moment order.
    pub s: u32,
    /// Number of Laplacians; moments vanish up to 2m − 1 ≥ s.
    pub m: u32,
    pub partition: PartitionOfUnity,
    pub scales: Vec<FrameScale>,
    pub certificates: FrameCertificates,
}

/// Scales t for which B_t spans at least [`MIN_SCALE_CELLS`] cells on every
/// axis and at most half the torus; strongly anisotropic dilations on small
/// grids fall back to half that many cells.
pub fn frame_levels(gauge: &EllipsoidGauge, fspec: &GridSpec) -> Option<(i32, i32)> {
    let range = |min_cells: f64| {
        let ok = |t: i32| {
            let e = ball_extent_cells(gauge, t, fspec);
            e.iter().all(|v| *v >= min_cells) && e.iter().zip(fspec.samples()).all(|(v, n)| *v <= *n as f64 / 2.0)
        };
        let ts: Vec<i32> = (-40..=40).filter(|t| ok(*t)).collect();
        Some((*ts.first()?, *ts.last()?))
    };
    range(MIN_SCALE_CELLS).or_else(|| range(MIN_SCALE_CELLS / 2.0))
}

/// θ_t = (−Δ_h)^m γ_t with γ_t a bump on a shrunk copy of B_t, shrunk until
/// the support of θ_t lies in B_t; L¹-normalised.
fn build_theta(gauge: &EllipsoidGauge, fspec: &GridSpec, t: i32, m: u32) -> Result<(Field, f64)> {
    let n = fspec.len();
    let pts: Vec<Vec<f64>> = (0..n).map(|i| centered_point(fspec, i)).collect();
    let inside: Vec<bool> = pts.iter().map(|x| gauge.in_ball(t, x)).collect();
    let c = gauge.radius();
    let mut shrink = 1.0f64;
    for _ in 0..200 {
        let r2 = c * shrink * shrink;
        let mut g: Vec<f64> = pts
            .par_iter()
            .map(|x| {
                let q = gauge.quad_level(t, x);
                if q < r2 {
                    (-1.0 / (1.0 - q / r2)).exp()
                } else {
                    0.0
                }
            })
            .collect();
        for _ in 0..m {
            g = neg_laplacian(&g, fspec);
        }
        if g.iter().zip(&inside).all(|(v, ins)| *ins || *v == 0.0) {
            let l1 = neumaier_sum(g.iter().map(|v| v.abs())) * fspec.cell_volume();
            if l1 == 0.0 {
                break;
            }
            let theta = Field::from_real(fspec, g.iter().map(|v| v / l1).collect())?;
            return Ok((theta, shrink));
        }
        shrink *= 0.97;
    }
    Err(Error::ConstructionFailed(format!("no bump fits inside B_{t} after {m} Laplacians")))
}

/// −Δ_h with one-cell steps on every axis.
fn neg_laplacian(g: &[f64], fspec: &GridSpec) -> Vec<f64> {
    let strides = fspec.strides();
    let samples = fspec.samples().to_vec();
    (0..g.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for a in 0..samples.len() {
                let h = fspec.spacing(a);
                let j = (i / strides[a]) % samples[a];
                let up = if j + 1 == samples[a] { i + strides[a] - samples[a] * strides[a] } else { i + strides[a] };
                let dn = if j == 0 { i + (samples[a] - 1) * strides[a] } else { i - strides[a] };
                acc += (2.0 * g[i] - g[up] - g[dn]) / (h * h);
            }
            acc
        })
        .collect()
}

/// Multi-indices γ ∈ ℕ^d with |γ| ≤ order.
pub fn multi_indices(d: usize, order: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for v in &out {
            let used: u32 = v.iter().sum();
            for k in 0..=(order - used) {
                let mut w = v.clone();
                w.push(k);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// max over |γ| ≤ order of |∫θ x^γ| / (‖θ‖₁ L^{|γ|}), origin-centred coordinates.
pub fn moment_error(theta: &Field, order: u32) -> f64 {
    let spec = theta.spec();
    let pts: Vec<Vec<f64>> = (0..spec.len()).map(|i| centered_point(spec, i)).collect();
    let l1 = neumaier_sum(theta.values().iter().map(|v| v.norm())) * spec.cell_volume();
    let box_w = spec.box_half_widths().iter().cloned().fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for g in multi_indices(spec.axes(), order) {
        let deg: u32 = g.iter().sum();
        let mono = |x: &[f64]| x.iter().zip(&g).map(|(v, e)| v.powi(*e as i32)).product::<f64>();
        let re = neumaier_sum(theta.values().iter().zip(&pts).map(|(v, x)| v.re * mono(x))) * spec.cell_volume();
        let im = neumaier_sum(theta.values().iter().zip(&pts).map(|(v, x)| v.im * mono(x))) * spec.cell_volume();
        worst = worst.max(Complex64::new(re, im).norm() / (l1 * box_w.powi(deg as i32)));
    }
    worst
}

impl FramePair {
    /// Builds the pair on `fspec` at levels `levels` (default [`frame_levels`]).
    pub fn build(gauge: &EllipsoidGauge, fspec: &GridSpec, s: u32, profile: Profile, levels: Option<(i32, i32)>) -> Result<Self> {
        if fspec.factors() != 1 || fspec.axes() != gauge.dim() {
            return Err(Error::SpecMismatch);
        }
        let levels = match levels.or_else(|| frame_levels(gauge, fspec)) {
            Some(l) => l,
            None => {
                return Err(Error::RangeTooNarrow(format!(
                    "no scale spans {MIN_SCALE_CELLS} to N/2 cells"
                )))
            }
        };
        let m = (s + 2) / 2;
        let thetas: Vec<(i32, Field, f64)> = (levels.0..=levels.1)
            .map(|t| build_theta(gauge, fspec, t, m).map(|(th, sh)| (t, th, sh)))
            .collect::<Result<_>>()?;
        let theta_hats: Vec<Vec<Complex64>> = thetas.iter().map(|(_, th, _)| th.spectrum().coefficients().to_vec()).collect();
        let kappa = choose_kappa(gauge, fspec, profile, levels, &theta_hats)?;
        let partition = PartitionOfUnity::build(gauge.dilation(), profile, kappa, levels, fspec)?;
        let mut scales = Vec::new();
        let mut annulus_ratio = f64::INFINITY;
        for ((t, theta, shrink), th) in thetas.into_iter().zip(theta_hats) {
            let phi = partition.spectrum(t, fspec);
            let maxth = th.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let mut psi = vec![Complex64::new(0.0, 0.0); phi.len()];
            let mut minth = f64::INFINITY;
            for i in 0..phi.len() {
                if phi[i] != 0.0 {
                    let a = th[i].norm();
                    minth = minth.min(a);
                    if a < DIVISION_THRESHOLD * maxth {
                        return Err(Error::AnnulusMismatch(format!(
                            "|θ̂_{t}| = {:.3e} of its maximum inside supp φ̂_{t}",
                            a / maxth
                        )));
                    }
                    psi[i] = phi[i] / th[i];
                }
            }
            annulus_ratio = annulus_ratio.min(minth / maxth);
            scales.push(FrameScale { t, theta, theta_hat: th, psi_hat: psi, phi_hat: phi, shrink });
        }
        let support_exact = scales.iter().all(|sc| {
            sc.theta.values().iter().enumerate().all(|(i, v)| *v == Complex64::new(0.0, 0.0) || gauge.in_ball(sc.t, &centered_point(fspec, i)))
        });
        let moment = scales.iter().map(|sc| moment_error(&sc.theta, 2 * m - 1)).fold(0.0, f64::max);
        let covered = partition.covered_mask(fspec);
        let mut pairing: f64 = 0.0;
        for i in 0..fspec.len() {
            if covered[i] {
                let s = scales.iter().fold(Complex64::new(0.0, 0.0), |acc, sc| acc + sc.psi_hat[i] * sc.theta_hat[i]);
                pairing = pairing.max((s - 1.0).norm());
            }
        }
        let certificates = FrameCertificates {
            support_exact,
            moment_error: moment,
            pairing_error: pairing,
            annulus_ratio,
            partition_error: partition.certificate,
        };
        Ok(Self { spec: fspec.clone(), gauge: gauge.clone(), s, m, partition, scales, certificates })
    }

    pub fn levels(&self) -> (i32, i32) {
        self.partition.levels
    }

    pub fn scale(&self, t: i32) -> Option<&FrameScale> {
        self.scales.iter().find(|s| s.t == t)
    }

    /// Σ_t f ∗ ψ_t ∗ θ_t.
    pub fn reproduce(&self, f: &Field) -> Result<Reconstruction> {
        f.spec().check_same(&self.spec)?;
        let fhat = f.spectrum();
        let mut total = vec![Complex64::new(0.0, 0.0); self.spec.len()];
        for sc in &self.scales {
            for i in 0..total.len() {
                total[i] += sc.psi_hat[i] * sc.theta_hat[i];
            }
        }
        // ψ̂θ̂ = φ̂ is real up to rounding
        let real: Vec<f64> = total.iter().map(|v| v.re).collect();
        Ok(Reconstruction::new(f, &fhat, &real, &self.partition.covered_mask(&self.spec)))
    }

    pub fn covered_mask(&self) -> Vec<bool> {
        self.partition.covered_mask(&self.spec)
    }

    /// All certificates at their acceptance tolerances.
    pub fn certified(&self) -> bool {
        let c = &self.certificates;
        c.support_exact && c.moment_error < 1e-10 && c.pairing_error < 1e-10 && c.partition_error < 1e-12
    }
}

/// κ maximising min over scales of min_{supp φ̂_t}|θ̂_t|/max|θ̂_t| among
/// candidates that cover at least one grid frequency.
fn choose_kappa(gauge: &EllipsoidGauge, fspec: &GridSpec, profile: Profile, levels: (i32, i32), theta_hats: &[Vec<Complex64>]) -> Result<f64> {
    let dual = EllipsoidGauge::build(&gauge.dilation().transpose())?;
    let xs = frequencies(fspec);
    let maxes: Vec<f64> = theta_hats.iter().map(|th| th.iter().map(|v| v.norm()).fold(0.0, f64::max)).collect();
    let mut best: Option<(f64, f64)> = None;
    for i in -64..=64 {
        let kappa = 2f64.powf(i as f64 / 8.0);
        let p = PartitionOfUnity { dual: dual.clone(), profile, kappa, levels, certificate: 0.0, covered: 0, sum_bound: 0.0 };
        let covered = xs.iter().any(|xi| p.is_covered(xi));
        if !covered {
            continue;
        }
        let ratio = (levels.0..=levels.1)
            .enumerate()
            .map(|(k, t)| {
                xs.iter()
                    .enumerate()
                    .filter(|(_, xi)| p.phi_hat(t, xi) != 0.0)
                    .map(|(j, _)| theta_hats[k][j].norm() / maxes[k])
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        if best.map_or(true, |b| ratio > b.1) {
            best = Some((kappa, ratio));
        }
    }
    match best {
        Some((k, r)) if r >= DIVISION_THRESHOLD => Ok(k),
        Some((_, r)) => Err(Error::AnnulusMismatch(format!("best profile scale reaches only {r:.3e}"))),
        None => Err(Error::RangeTooNarrow("no profile scale covers a grid frequency".into())),
    }
}

/// Tensor product of two one-factor pairs on a two-factor grid.
#[derive(Debug, Clone)]
pub struct ProductFrame {
    pub spec: GridSpec,
    pub pairs: [FramePair; 2],
}

impl ProductFrame {
    pub fn new(spec: &GridSpec, a: FramePair, b: FramePair) -> Result<Self> {
        if spec.factors() != 2 || spec.factor_spec(0) != a.spec || spec.factor_spec(1) != b.spec {
            return Err(Error::SpecMismatch);
        }
        Ok(Self { spec: spec.clone(), pairs: [a, b] })
    }

    pub fn build(gauges: [&EllipsoidGauge; 2], spec: &GridSpec, s: [u32; 2], profile: Profile) -> Result<Self> {
        let a = FramePair::build(gauges[0], &spec.factor_spec(0), s[0], profile, None)?;
        let b = FramePair::build(gauges[1], &spec.factor_spec(1), s[1], profile, None)?;
        Self::new(spec, a, b)
    }

    /// Covered product frequencies.
    pub fn covered_mask(&self) -> Vec<bool> {
        let a = self.pairs[0].covered_mask();
        let b = self.pairs[1].covered_mask();
        let n2 = b.len();
        (0..self.spec.len()).map(|i| a[i / n2] && b[i % n2]).collect()
    }

    /// Σ_{t₁,t₂} f ∗ ψ_{t₁,t₂} ∗ θ_{t₁,t₂}.
    pub fn reproduce(&self, f: &Field) -> Result<Reconstruction> {
        f.spec().check_same(&self.spec)?;
        let sum = |p: &FramePair| {
            let mut total = vec![0.0f64; p.spec.len()];
            for sc in &p.scales {
                for (i, v) in total.iter_mut().enumerate() {
                    *v += (sc.psi_hat[i] * sc.theta_hat[i]).re;
                }
            }
            total
        };
        let a = sum(&self.pairs[0]);
        let b = sum(&self.pairs[1]);
        let n2 = b.len();
        let m: Vec<f64> = (0..self.spec.len()).map(|i| a[i / n2] * b[i % n2]).collect();
        Ok(Reconstruction::new(f, &f.spectrum(), &m, &self.covered_mask()))
    }

    /// Product certificates: the worse of the two factors.
    pub fn certificates(&self) -> FrameCertificates {
        let (a, b) = (&self.pairs[0].certificates, &self.pairs[1].certificates);
        FrameCertificates {
            support_exact: a.support_exact && b.support_exact,
            moment_error: a.moment_error.max(b.moment_error),
            pairing_error: a.pairing_error.max(b.pairing_error) + a.pairing_error * b.pairing_error,
            annulus_ratio: a.annulus_ratio.min(b.annulus_ratio),
            partition_error: a.partition_error.max(b.partition_error),
        }
    }
}

/// A real field whose spectrum lies on the `mask` frequencies (mask must be
/// symmetric under ξ ↦ −ξ).
pub fn band_limited(spec: &GridSpec, mask: &[bool], rng: &mut ChaCha8Rng) -> Field {
    let noise: Vec<f64> = (0..spec.len()).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    let f = Field::from_real(spec, noise).expect("finite noise");
    let proj: Vec<f64> = mask.iter().map(|m| if *m { 1.0 } else { 0.0 }).collect();
    f.spectrum().mul_real(&proj).to_field().real_part()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn pair(s: u32) -> FramePair {
        let g = EllipsoidGauge::build(&ExpansiveDilation::scalar(2.0).unwrap()).unwrap();
        let spec = GridSpec::cube(1, 16.0, 1024).unwrap();
        FramePair::build(&g, &spec, s, Profile::default(), None).unwrap()
    }

    #[test]
    fn profile_is_smooth_step() {
        let p = Profile::default();
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(2.0), 0.0);
        assert!((p.eval(1.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn multi_index_count() {
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(1, 3).len(), 4);
    }

    #[test]
    fn one_dimensional_pair_is_certified() {
        for s in [0, 1, 3] {
            let p = pair(s);
            assert!(p.certified(), "{:?}", p.certificates);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let f = band_limited(&p.spec, &p.covered_mask(), &mut rng);
            let r = p.reproduce(&f).unwrap();
            assert!(r.rel_error < 1e-6, "{}", r.rel_error);
        }
    }
}
